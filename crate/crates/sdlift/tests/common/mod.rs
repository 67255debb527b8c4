//! Seeded generators shared by the property suites and the acceptance run.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use sdlift::blcs::Blcs;

pub const MAX_VARIABLES: usize = 12;

fn names(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("v{i}")).collect()
}

fn parity<R: Rng>(rng: &mut R) -> i8 {
    if rng.gen() {
        1
    } else {
        -1
    }
}

/// 1 to 12 variables, 1 to 6 constraints, each a random non-empty subset.
pub fn random_blcs<R: Rng>(rng: &mut R) -> Blcs {
    let p = rng.gen_range(1..=MAX_VARIABLES);
    let vars = names(p);
    let cs = (0..rng.gen_range(1..=6))
        .map(|_| {
            let k = rng.gen_range(1..=p.min(5));
            let pick: Vec<String> = vars.choose_multiple(rng, k).cloned().collect();
            (pick, parity(rng))
        })
        .collect();
    Blcs::new(vars, cs).expect("generated system is well formed")
}

/// Every variable in exactly two distinct constraints: a random loopless
/// multigraph with constraints as vertices and variables as edges.
pub fn random_arrangement<R: Rng>(rng: &mut R) -> Blcs {
    let c = rng.gen_range(2..=6);
    let p = rng.gen_range(1..=MAX_VARIABLES);
    let vars = names(p);
    let mut members: Vec<Vec<String>> = vec![Vec::new(); c];
    for v in &vars {
        let i = rng.gen_range(0..c);
        let j = (i + rng.gen_range(1..c)) % c;
        members[i].push(v.clone());
        members[j].push(v.clone());
    }
    let cs = members.into_iter().filter(|m| !m.is_empty()).map(|m| (m, parity(rng))).collect();
    Blcs::new(vars, cs).expect("generated arrangement is well formed")
}

/// Even degrees (2 or 4) and system parity −1.
pub fn random_lemma1_system<R: Rng>(rng: &mut R) -> Blcs {
    let c = rng.gen_range(4..=6);
    let p = rng.gen_range(1..=MAX_VARIABLES);
    let vars = names(p);
    let mut members: Vec<Vec<String>> = vec![Vec::new(); c];
    let slots: Vec<usize> = (0..c).collect();
    for v in &vars {
        let d = if rng.gen() { 2 } else { 4 };
        for &j in slots.choose_multiple(rng, d) {
            members[j].push(v.clone());
        }
    }
    let mut cs: Vec<(Vec<String>, i8)> =
        members.into_iter().filter(|m| !m.is_empty()).map(|m| (m, parity(rng))).collect();
    let total: i8 = cs.iter().map(|c| c.1).product();
    cs[0].1 *= -total;
    Blcs::new(vars, cs).expect("generated system is well formed")
}

/// Exhaustive search over all 2^p assignments, optionally with one
/// variable held at +1.
pub fn brute_force_realizable_with(s: &Blcs, fixed_plus: Option<&str>) -> bool {
    let p = s.num_variables();
    (0u32..1 << p).any(|mask| {
        let a: sdlift::blcs::Assignment = s
            .variables()
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), if mask >> i & 1 == 1 { -1 } else { 1 }))
            .collect();
        fixed_plus.is_none_or(|v| a[v] == 1) && s.satisfies(&a)
    })
}

pub fn brute_force_realizable(s: &Blcs) -> bool {
    brute_force_realizable_with(s, None)
}

/// Checks the BLCS properties on one system; `Err` names the first failure.
pub fn check_blcs_properties(s: &Blcs) -> Result<(), String> {
    let truth = brute_force_realizable(s);
    let dfs = s.has_classical_solution().map_err(|e| e.to_string())?;
    if dfs.is_some() != truth || s.solvable_gf2() != truth {
        return Err(format!("solvers disagree with brute force on {}", s.to_json()));
    }
    if let Some(a) = &dfs {
        if !s.satisfies(a) {
            return Err("witness does not satisfy the system".into());
        }
    }
    if s.lemma1_check() && truth {
        return Err(format!("lemma1 holds on a realizable system {}", s.to_json()));
    }
    for v in s.variables() {
        let negated = s.negate_variable(v).map_err(|e| e.to_string())?;
        if brute_force_realizable(&negated) != truth {
            return Err(format!("negating {v} changed realizability"));
        }
        // The appended v.1·v.2 = +1 pins the old value to +1, so the split
        // preserves non-realizability and is realizable iff some solution
        // has v = +1.
        let split = s.split_variable(v).map_err(|e| e.to_string())?;
        if split.solvable_gf2() != brute_force_realizable_with(s, Some(v)) {
            return Err(format!("splitting {v} is not realizable exactly when v = +1 is"));
        }
    }
    if !truth {
        let st = s.standardize().map_err(|e| e.to_string())?;
        if !st.system.lemma1_check() || st.system.solvable_gf2() {
            return Err("standard form is not a lemma1 system".into());
        }
    }
    Ok(())
}

pub fn check_lemma1_system(s: &Blcs) -> Result<(), String> {
    if !s.lemma1_check() {
        return Err(format!("generator produced a non-lemma1 system {}", s.to_json()));
    }
    if brute_force_realizable(s) {
        return Err(format!("lemma1 system is realizable {}", s.to_json()));
    }
    let st = s.standardize().map_err(|e| e.to_string())?;
    if st.case != 0 || &st.system != s {
        return Err("standardize is not the identity on a standard-form system".into());
    }
    check_blcs_properties(s)
}

pub fn check_arrangement(s: &Blcs) -> Result<(), String> {
    let predicted = s.arkhipov_realizable().map_err(|e| e.to_string())?;
    if predicted != brute_force_realizable(s) {
        return Err(format!("parity criterion disagrees with brute force on {}", s.to_json()));
    }
    Ok(())
}
