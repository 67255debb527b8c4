//! Symmetric deterministic lifting: the bespoke lifted systems and games,
//! the three generic lifting protocols, and conformance checks.

use crate::blcs::{Blcs, BlcsError};
use crate::games::{
    binary_game_to_blcs, binary_var_name, blcs_to_game_named, compact_square_game,
    compact_star_game, grid_game, GameError, NonlocalGame, Rule, SideCorrelation,
};
use crate::gf2;
use crate::quantum::{behavior_from_strategy, parity_game_value, QuantumError, QuantumStrategy, Slot};
use crate::scalar::Surd;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// 4×4 grid `v1..v16` (row-major). Rows `r1..r4` then columns `c1..c4`;
/// only `c4` has parity −1.
pub fn sdl_magic_square() -> Blcs {
    let vars = names("v", 16);
    let mut cs = Vec::new();
    for r in 0..4 {
        cs.push(((0..4).map(|c| vars[4 * r + c].clone()).collect(), 1));
    }
    for c in 0..4 {
        cs.push(((0..4).map(|r| vars[4 * r + c].clone()).collect(), if c == 3 { -1 } else { 1 }));
    }
    Blcs::new(vars, cs).expect("valid")
}

/// Six edges `s1..s6` over `u1..u15`; any two edges share exactly one
/// vertex and only `s2` has parity −1.
pub fn sdl_magic_star() -> Blcs {
    let vars = names("u", 15);
    let edges: [&[usize]; 6] = [
        &[1, 2, 3, 4, 5],
        &[1, 6, 7, 8, 9],
        &[2, 7, 10, 11, 12],
        &[3, 9, 10, 13, 14],
        &[4, 6, 11, 13, 15],
        &[5, 8, 12, 14, 15],
    ];
    let cs = edges
        .iter()
        .enumerate()
        .map(|(k, e)| (e.iter().map(|&i| vars[i - 1].clone()).collect(), if k == 1 { -1 } else { 1 }))
        .collect();
    Blcs::new(vars, cs).expect("valid")
}

/// The lifted CHSH system on `v1, v2, v11, v12, v21, v22`.
pub fn lifted_chsh_system() -> Blcs {
    let vars = ["v1", "v2", "v11", "v12", "v21", "v22"];
    let c = |vs: &[&str], p: i8| (vs.iter().map(|s| s.to_string()).collect::<Vec<_>>(), p);
    Blcs::new(
        vars.to_vec(),
        vec![
            c(&["v12", "v22", "v1", "v2"], 1),
            c(&["v11", "v21", "v1", "v2"], -1),
            c(&["v11", "v21", "v12", "v22"], 1),
        ],
    )
    .expect("valid")
}

/// Variable pairs whose two-body correlator must have unit modulus.
pub const LIFTED_CHSH_PAIRS: [[&str; 2]; 3] = [["v1", "v2"], ["v11", "v21"], ["v12", "v22"]];

pub fn sdl_magic_square_game() -> NonlocalGame {
    compact_square_game(&sdl_magic_square(), &[0, 1, 2, 3], &[4, 5, 6, 7], "sdl_magic_square")
        .expect("grid")
}

pub fn magic_square_game() -> NonlocalGame {
    compact_square_game(&crate::blcs::magic_square(), &[0, 1, 2], &[3, 4, 5], "magic_square")
        .expect("grid")
}

pub fn sdl_magic_star_game() -> NonlocalGame {
    compact_star_game(&sdl_magic_star(), "sdl_magic_star").expect("edges are non-empty")
}

/// Faces `x ∈ {0,1,2}` with parities `(+1, −1, +1)`.
pub fn lifted_ghz_game() -> NonlocalGame {
    grid_game(3, &[1, -1, 1], "lifted_ghz")
}

/// Constraint-system game of the lifted CHSH system, with the unit-modulus
/// two-body correlator requirements attached.
pub fn lifted_chsh_game() -> NonlocalGame {
    let system = lifted_chsh_system();
    let mut game = blcs_to_game_named(&system, "lifted_chsh");
    for (j, c) in system.constraints().iter().enumerate() {
        for pair in LIFTED_CHSH_PAIRS {
            let pos = |v: &str| c.vars.iter().position(|w| w == v);
            if let (Some(a), Some(b)) = (pos(pair[0]), pos(pair[1])) {
                game.side_correlations.push(SideCorrelation { player: 0, input: j, coords: (a, b) });
            }
        }
    }
    game
}

// ---------------------------------------------------------------------------
// Generic lifting protocols.

/// Upper bound on lifted variables produced by protocol 2.
pub const PROTOCOL2_VAR_CAP: usize = 200_000;

#[derive(Debug, Error)]
pub enum LiftError {
    #[error("input is not in standard form: {0}")]
    NotStandard(String),
    #[error("input is not an arrangement")]
    NotArrangement,
    #[error("input system parity must be -1")]
    WrongParity,
    #[error("lifted system needs {count} variables, over the cap of {cap}")]
    CapExceeded { count: usize, cap: usize },
    #[error("no deterministic assignment: {0}")]
    NoAssignment(String),
    #[error("lifting check failed at {x_star:?}: {reason}")]
    CheckFailed { x_star: Vec<usize>, reason: String },
    #[error(transparent)]
    Blcs(#[from] BlcsError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// Where a lifted variable came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum Provenance {
    /// A variable of the input system.
    Original { var: String },
    /// `v_{i,j}`: copy of `var` for constraint `constraint` (1-based).
    Copy { var: String, constraint: usize },
    /// `u_index` (1-based; `q+1` is the shared one).
    Aux { index: usize },
    /// `v^{(player, copy)}_{input, bit}`; player and copy 1-based, input
    /// 0-based with `m` the added setting, bit 1-based.
    Replica { player: usize, input: usize, bit: usize, copy: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructuralFlags {
    pub parity: i8,
    pub even_degrees: bool,
    /// Common degree, when all variables share one.
    pub uniform_degree: Option<usize>,
    pub arrangement: bool,
}

impl StructuralFlags {
    pub fn of(system: &Blcs) -> Self {
        let degs = system.degrees();
        let uniform_degree = degs.first().copied().filter(|d| degs.iter().all(|e| e == d));
        StructuralFlags {
            parity: system.system_parity(),
            even_degrees: degs.iter().all(|d| d % 2 == 0),
            uniform_degree,
            arrangement: system.is_arrangement(),
        }
    }
}

/// IO sets of one (player, input) after the negation step: variables in
/// `s` are pairwise consistent, `s_prime` holds the negated ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IoPartition {
    pub player: usize,
    pub input: usize,
    pub s: Vec<usize>,
    pub s_prime: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    pub protocol: u8,
    pub original: Blcs,
    pub lifted: Blcs,
    /// One entry per lifted variable, in declaration order.
    pub provenance: Vec<(String, Provenance)>,
    pub flags: StructuralFlags,
    /// Protocol 2 only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub io_partition: Option<Vec<IoPartition>>,
    /// Protocol 2 only: number of game-constraint copies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub copies: Option<usize>,
    /// Protocol 2 only: `C_IO ∪ C_G` before the negation step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<Blcs>,
}

impl LiftReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Provenance lists every lifted variable exactly once.
    pub fn provenance_complete(&self) -> bool {
        let names: Vec<&String> = self.provenance.iter().map(|(v, _)| v).collect();
        let set: HashSet<&String> = names.iter().copied().collect();
        set.len() == names.len() && names.len() == self.lifted.num_variables()
            && self.lifted.variables().iter().all(|v| set.contains(v))
    }
}

/// A deterministic assignment for one lifted constraint and the system it
/// leaves behind.
#[derive(Debug, Clone)]
pub struct CaseReduction {
    /// 0-based lifted constraint index.
    pub constraint: usize,
    pub case: &'static str,
    pub assignment: BTreeMap<String, i8>,
    pub reduced: Blcs,
    /// Lifted constraints the assignment fully fixes and violates.
    pub violated: Vec<usize>,
    pub isomorphic: bool,
}

impl CaseReduction {
    pub fn ok(&self) -> bool {
        self.violated.is_empty() && self.isomorphic
    }

    fn build(
        lifted: &Blcs,
        target: &Blcs,
        constraint: usize,
        case: &'static str,
        assignment: BTreeMap<String, i8>,
    ) -> Result<Self, LiftError> {
        let fixed: HashMap<String, i8> = assignment.iter().map(|(k, v)| (k.clone(), *v)).collect();
        let r = lifted.reduce(&fixed);
        let isomorphic = r.violated.is_empty() && r.system.is_isomorphic(target)?.is_some();
        Ok(CaseReduction { constraint, case, assignment, reduced: r.system, violated: r.violated, isomorphic })
    }
}

fn fresh(taken: &mut HashSet<String>, base: String) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('\'');
    }
    taken.insert(name.clone());
    name
}

/// Constraint indices (0-based) containing each variable.
fn incidence_sets(system: &Blcs) -> Vec<Vec<usize>> {
    system
        .variables()
        .iter()
        .map(|v| {
            system.constraints().iter().enumerate().filter(|(_, c)| c.vars.contains(v)).map(|(j, _)| j).collect()
        })
        .collect()
}

/// Adds the copies `v_{i,j}`: the copy for constraint `j` multiplies every
/// other constraint containing `v_i`. Returns the copy names indexed by
/// (variable, constraint) and the extra factors per constraint.
fn add_copies(
    system: &Blcs,
    taken: &mut HashSet<String>,
    provenance: &mut Vec<(String, Provenance)>,
) -> (HashMap<(usize, usize), String>, Vec<Vec<String>>) {
    let s = incidence_sets(system);
    let mut copies = HashMap::new();
    let mut extra = vec![Vec::new(); system.num_constraints()];
    for (i, v) in system.variables().iter().enumerate() {
        for &j in &s[i] {
            let name = fresh(taken, format!("{v}_{}", j + 1));
            provenance.push((name.clone(), Provenance::Copy { var: v.clone(), constraint: j + 1 }));
            for &k in &s[i] {
                if k != j {
                    extra[k].push(name.clone());
                }
            }
            copies.insert((i, j), name);
        }
    }
    (copies, extra)
}

fn originals(system: &Blcs) -> (HashSet<String>, Vec<(String, Provenance)>) {
    let taken = system.variables().iter().cloned().collect();
    let prov = system.variables().iter().map(|v| (v.clone(), Provenance::Original { var: v.clone() })).collect();
    (taken, prov)
}

/// Lifting of a standard-form system (parity −1, even degrees): copies
/// `v_{i,j}`, auxiliaries `u_1..u_{q+1}` and the closing constraint
/// `∏V′ · ∏U = +1`.
pub fn protocol1(system: &Blcs) -> Result<LiftReport, LiftError> {
    if !system.lemma1_check() {
        return Err(LiftError::NotStandard("parity must be -1 and every degree even".into()));
    }
    let q = system.num_constraints();
    let (mut taken, mut provenance) = originals(system);
    let (_, extra) = add_copies(system, &mut taken, &mut provenance);
    let us: Vec<String> = (1..=q + 1)
        .map(|i| {
            let n = fresh(&mut taken, format!("u{i}"));
            provenance.push((n.clone(), Provenance::Aux { index: i }));
            n
        })
        .collect();
    let mut cs = Vec::with_capacity(q + 1);
    for (k, c) in system.constraints().iter().enumerate() {
        let mut vars = c.vars.clone();
        vars.extend(extra[k].iter().cloned());
        vars.push(us[k].clone());
        if c.parity == -1 {
            vars.push(us[q].clone());
        }
        cs.push((vars, c.parity));
    }
    let closing: Vec<String> = provenance
        .iter()
        .filter(|(_, p)| !matches!(p, Provenance::Original { .. }))
        .map(|(n, _)| n.clone())
        .collect();
    cs.push((closing, 1));
    let names: Vec<String> = provenance.iter().map(|(n, _)| n.clone()).collect();
    let lifted = Blcs::new(names, cs)?;
    Ok(LiftReport {
        protocol: 1,
        original: system.clone(),
        flags: StructuralFlags::of(&lifted),
        lifted,
        provenance,
        io_partition: None,
        copies: None,
        base: None,
    })
}

fn copy_name<'a>(report: &'a LiftReport, var: &str, constraint: usize) -> Option<&'a String> {
    report.provenance.iter().find_map(|(n, p)| match p {
        Provenance::Copy { var: v, constraint: c } if v == var && *c == constraint => Some(n),
        _ => None,
    })
}

/// Everything outside `V` at +1, except the copies `v_{i,j}` of the
/// variables of constraint `j`, which stay free.
fn base_assignment(report: &LiftReport, j: Option<usize>) -> BTreeMap<String, i8> {
    let free: HashSet<&String> = match j {
        Some(j) => report.original.constraints()[j]
            .vars
            .iter()
            .filter_map(|v| copy_name(report, v, j + 1))
            .collect(),
        None => HashSet::new(),
    };
    report
        .provenance
        .iter()
        .filter(|(n, p)| !matches!(p, Provenance::Original { .. }) && !free.contains(n))
        .map(|(n, _)| (n.clone(), 1))
        .collect()
}

/// The deterministic assignment for every lifted constraint of a protocol
/// 1 output, each paired with its reduced system.
pub fn protocol1_reductions(report: &LiftReport) -> Result<Vec<CaseReduction>, LiftError> {
    let orig = &report.original;
    let q = orig.num_constraints();
    let aux = |i: usize| {
        report.provenance.iter().find_map(|(n, p)| matches!(p, Provenance::Aux { index } if *index == i).then(|| n.clone()))
    };
    let mut out = Vec::with_capacity(q + 1);
    for j in 0..q {
        let mut a = base_assignment(report, Some(j));
        for v in &report.lifted.constraints()[j].vars {
            a.insert(v.clone(), 1);
        }
        let case = if orig.constraints()[j].parity == 1 {
            "ii"
        } else {
            a.insert(aux(q + 1).expect("u_{q+1}"), -1);
            for (i, c) in orig.constraints().iter().enumerate() {
                if i != j && c.parity == -1 {
                    a.insert(aux(i + 1).expect("u_i"), -1);
                }
            }
            "iii"
        };
        out.push(CaseReduction::build(&report.lifted, orig, j, case, a)?);
    }
    out.push(CaseReduction::build(&report.lifted, orig, q, "i", base_assignment(report, None))?);
    Ok(out)
}

/// Lifting of a parity −1 arrangement: copies `v_{i,j}` and the closing
/// constraint `∏V′ = +1`; the output is again a parity −1 arrangement.
pub fn protocol3(system: &Blcs) -> Result<LiftReport, LiftError> {
    if !system.is_arrangement() {
        return Err(LiftError::NotArrangement);
    }
    if system.system_parity() != -1 {
        return Err(LiftError::WrongParity);
    }
    let (mut taken, mut provenance) = originals(system);
    let (_, extra) = add_copies(system, &mut taken, &mut provenance);
    let mut cs: Vec<(Vec<String>, i8)> = system
        .constraints()
        .iter()
        .enumerate()
        .map(|(k, c)| (c.vars.iter().chain(&extra[k]).cloned().collect(), c.parity))
        .collect();
    cs.push((provenance.iter().skip(system.num_variables()).map(|(n, _)| n.clone()).collect(), 1));
    let names: Vec<String> = provenance.iter().map(|(n, _)| n.clone()).collect();
    let lifted = Blcs::new(names, cs)?;
    Ok(LiftReport {
        protocol: 3,
        original: system.clone(),
        flags: StructuralFlags::of(&lifted),
        lifted,
        provenance,
        io_partition: None,
        copies: None,
        base: None,
    })
}

/// Protocol 3 reductions: constraint `j` is answered with all `+1` (its
/// first variable set to −1 when the parity is −1); the other copies are
/// `+1` except those standing in for the variables of `j`.
pub fn protocol3_reductions(report: &LiftReport) -> Result<Vec<CaseReduction>, LiftError> {
    let orig = &report.original;
    let q = orig.num_constraints();
    let mut out = Vec::with_capacity(q + 1);
    for j in 0..q {
        let mut a = base_assignment(report, Some(j));
        let c = &report.lifted.constraints()[j];
        for (k, v) in c.vars.iter().enumerate() {
            a.insert(v.clone(), if k == 0 && c.parity == -1 { -1 } else { 1 });
        }
        out.push(CaseReduction::build(&report.lifted, orig, j, "constraint", a)?);
    }
    out.push(CaseReduction::build(&report.lifted, orig, q, "closing", base_assignment(report, None))?);
    Ok(out)
}

/// Internal layout of a protocol 2 lifting.
struct P2 {
    n: usize,
    m: usize,
    d: usize,
    /// Input tuples in lexicographic order (player 0 most significant).
    tuples: Vec<Vec<usize>>,
    /// Game constraints as `(player, input, bit)` occurrences, after the
    /// negation step (all parity +1).
    game: Vec<Vec<(usize, usize, usize)>>,
    /// `(player, input)` -> bits (1-based) moved to `S′`.
    s_prime: HashMap<(usize, usize), HashSet<usize>>,
}

fn replica(i: usize, x: usize, j: usize, t: usize) -> String {
    format!("v{}_{}_{}^{}", i + 1, x, j, t + 1)
}

fn bit_name(i: usize, x: usize, j: usize) -> String {
    format!("v{}_{}_{}", i + 1, x, j)
}

impl P2 {
    fn in_n(&self, i: usize, x: usize, t: usize) -> bool {
        self.tuples[t][i] != x
    }

    fn io_parity(&self, i: usize, x: usize, j: usize, k: usize) -> i8 {
        let sp = self.s_prime.get(&(i, x));
        let inside = |b| sp.is_some_and(|s| s.contains(&b));
        if inside(j) != inside(k) { -1 } else { 1 }
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        (1..=self.d).flat_map(|j| (j + 1..=self.d).map(move |k| (j, k))).collect()
    }

    fn io_vars(&self, i: usize, x: usize, j: usize, k: usize) -> Vec<String> {
        let ts: Vec<usize> = (0..self.tuples.len()).filter(|&t| self.in_n(i, x, t)).collect();
        ts.iter().map(|&t| replica(i, x, j, t)).chain(ts.iter().map(|&t| replica(i, x, k, t))).collect()
    }
}

fn p2_layout(game: &NonlocalGame) -> Result<(P2, Blcs, Blcs), LiftError> {
    let system = binary_game_to_blcs(game)?;
    let sc = &game.scenario;
    let n = sc.players();
    let m = sc.num_inputs(0);
    if (0..n).any(|p| sc.num_inputs(p) != m) {
        return Err(LiftError::NotStandard("players have different input counts".into()));
    }
    let flags = StructuralFlags::of(&system);
    let d = match flags.uniform_degree {
        Some(d) if d % 2 == 0 && flags.parity == -1 => d,
        _ => {
            return Err(LiftError::NotStandard(format!(
                "needs parity -1 and one even degree; got parity {} and degrees {:?}",
                flags.parity,
                system.degrees()
            )))
        }
    };
    let mut owner: HashMap<String, (usize, usize)> = HashMap::new();
    for p in 0..n {
        for x in 0..m {
            owner.insert(binary_var_name(p, x), (p, x));
        }
    }
    let mut counter: HashMap<(usize, usize), usize> = HashMap::new();
    let mut game_cs = Vec::new();
    let mut s_prime: HashMap<(usize, usize), HashSet<usize>> = HashMap::new();
    let mut base_cs = Vec::new();
    for c in system.constraints() {
        let occ: Vec<(usize, usize, usize)> = c
            .vars
            .iter()
            .map(|v| {
                let &(p, x) = owner.get(v).expect("binary game variable");
                let j = counter.entry((p, x)).or_insert(0);
                *j += 1;
                (p, x, *j)
            })
            .collect();
        base_cs.push((occ.iter().map(|&(p, x, j)| bit_name(p, x, j)).collect::<Vec<_>>(), c.parity));
        if c.parity == -1 {
            let (p, x, j) = occ[0];
            s_prime.entry((p, x)).or_default().insert(j);
        }
        game_cs.push(occ);
    }
    let tuples: Vec<Vec<usize>> = (0..(m + 1).pow(n as u32))
        .map(|mut g| {
            let mut t = vec![0; n];
            for i in (0..n).rev() {
                t[i] = g % (m + 1);
                g /= m + 1;
            }
            t
        })
        .collect();
    let layout = P2 { n, m, d, tuples, game: game_cs, s_prime };
    let mut base_vars = Vec::new();
    for p in 0..n {
        for x in 0..m {
            for j in 1..=d {
                base_vars.push(bit_name(p, x, j));
            }
        }
    }
    for p in 0..n {
        for x in 0..m {
            for (j, k) in layout.pairs() {
                base_cs.push((vec![bit_name(p, x, j), bit_name(p, x, k)], 1));
            }
        }
    }
    let base = Blcs::new(base_vars, base_cs)?;
    Ok((layout, system, base))
}

/// Lifting of an `n`-player binary game with `m` inputs per player whose
/// constraint system has parity −1 and uniform even degree `d`. Adds an
/// input `m`, replicates every output bit once per input tuple that does
/// not ask it, and takes one copy of the game constraints per input tuple
/// with that tuple's inputs redirected to the added setting.
pub fn protocol2(game: &NonlocalGame) -> Result<LiftReport, LiftError> {
    let (l, original, base) = p2_layout(game)?;
    let copies = l.tuples.len();
    let count = l.n * (l.m + 1) * l.d * l.m * copies / (l.m + 1);
    if count > PROTOCOL2_VAR_CAP {
        return Err(LiftError::CapExceeded { count, cap: PROTOCOL2_VAR_CAP });
    }
    let mut provenance = Vec::with_capacity(count);
    for i in 0..l.n {
        for x in 0..=l.m {
            for j in 1..=l.d {
                for t in 0..copies {
                    if l.in_n(i, x, t) {
                        provenance.push((replica(i, x, j, t), Provenance::Replica { player: i + 1, input: x, bit: j, copy: t + 1 }));
                    }
                }
            }
        }
    }
    let mut cs = Vec::new();
    for t in 0..copies {
        for c in &l.game {
            let vars = c
                .iter()
                .map(|&(i, x, j)| replica(i, if x == l.tuples[t][i] { l.m } else { x }, j, t))
                .collect();
            cs.push((vars, 1));
        }
    }
    let mut io_partition = Vec::new();
    for i in 0..l.n {
        for x in 0..=l.m {
            for (j, k) in l.pairs() {
                cs.push((l.io_vars(i, x, j, k), l.io_parity(i, x, j, k)));
            }
            let sp = l.s_prime.get(&(i, x));
            let (s_prime, s): (Vec<usize>, Vec<usize>) = (1..=l.d).partition(|b| sp.is_some_and(|s| s.contains(b)));
            io_partition.push(IoPartition { player: i + 1, input: x, s, s_prime });
        }
    }
    let names: Vec<String> = provenance.iter().map(|(n, _)| n.clone()).collect();
    let lifted = Blcs::new(names, cs)?;
    Ok(LiftReport {
        protocol: 2,
        original,
        flags: StructuralFlags::of(&lifted),
        lifted,
        provenance,
        io_partition: Some(io_partition),
        copies: Some(copies),
        base: Some(base),
    })
}

/// Deterministic assignment of every variable outside copy `g` (0-based
/// input tuple index) such that all fully fixed constraints hold and the
/// remaining IO constraints carry the parities of the setting they stand
/// for. Found by a GF(2) solve; the reduced system is compared with
/// `C_IO ∪ C_G`.
pub fn protocol2_reduction(game: &NonlocalGame, report: &LiftReport, g: usize) -> Result<CaseReduction, LiftError> {
    let (l, _, base) = p2_layout(game)?;
    if g >= l.tuples.len() {
        return Err(LiftError::NoAssignment(format!("copy {} out of range", g + 1)));
    }
    let lifted = &report.lifted;
    let fixed_vars: Vec<&String> = lifted.variables().iter().filter(|v| !v.ends_with(&format!("^{}", g + 1))).collect();
    let col: HashMap<&String, usize> = fixed_vars.iter().enumerate().map(|(k, v)| (*v, k)).collect();
    let nv = fixed_vars.len();
    let mut eqs = Vec::new();
    let bit = |p: i8| p == -1;
    let copies = l.tuples.len();
    for (ci, c) in lifted.constraints().iter().enumerate() {
        let fixed: Vec<usize> = c.vars.iter().filter_map(|v| col.get(v).copied()).collect();
        let target = if ci < copies * l.game.len() {
            if ci / l.game.len() == g {
                continue;
            }
            1
        } else {
            // IO block: recover (player, input, pair) from the first variable.
            let Some(Provenance::Replica { player, input, .. }) =
                report.provenance.iter().find(|(n, _)| *n == c.vars[0]).map(|(_, p)| p.clone())
            else {
                return Err(LiftError::NoAssignment("IO constraint without provenance".into()));
            };
            let (i, x) = (player - 1, input);
            let bits: Vec<usize> = c
                .vars
                .iter()
                .filter_map(|v| report.provenance.iter().find(|(n, _)| n == v))
                .filter_map(|(_, p)| match p {
                    Provenance::Replica { bit, .. } => Some(*bit),
                    _ => None,
                })
                .collect();
            let (j, k) = (*bits.iter().min().expect("pair"), *bits.iter().max().expect("pair"));
            if x == l.tuples[g][i] {
                1
            } else {
                let y = if x == l.m { l.tuples[g][i] } else { x };
                l.io_parity(i, y, j, k)
            }
        };
        eqs.push(gf2::Equation::new(nv, fixed, bit(c.parity) != bit(target)));
    }
    let sol = gf2::solve(nv, &eqs).ok_or_else(|| LiftError::NoAssignment(format!("copy {}", g + 1)))?;
    let assignment = fixed_vars.iter().zip(sol).map(|(v, b)| ((*v).clone(), if b { -1 } else { 1 })).collect();
    CaseReduction::build(lifted, &base, g, "copy", assignment)
}

// ---------------------------------------------------------------------------
// Conformance of a lifted game with its partially deterministic strategies.

#[derive(Debug, Clone)]
pub struct SdLiftingEntry {
    pub x_star: Vec<usize>,
    pub strategies: usize,
    /// Every supplied strategy is deterministic at `x_star`.
    pub deterministic: bool,
    /// Smallest value over the supplied strategies.
    pub min_value: Surd,
    /// Reduced lifted system isomorphic to the original; `None` when no
    /// system form was supplied.
    pub symmetric: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct SdLiftingReport {
    pub entries: Vec<SdLiftingEntry>,
    /// Tuples the input distribution never asks; not checked.
    pub skipped: Vec<Vec<usize>>,
}

fn strategy_value(game: &NonlocalGame, s: &QuantumStrategy) -> Result<Surd, LiftError> {
    Ok(match game.rule {
        Rule::Parity(_) => parity_game_value(game, s)?,
        Rule::Table(_) => crate::games::game_value(game, &behavior_from_strategy(game, s)?)?,
    })
}

/// Checks every asked input tuple of `lifted`: each strategy of the family is
/// deterministic there and reaches `claimed`; when `systems` gives the
/// constraint-system form `(original, lifted)` whose variables name the
/// game's output slots, fixing the deterministic answers at `x*` must
/// leave a reduced system isomorphic to the original. Fails at the first
/// tuple that violates a check.
pub fn check_sd_lifting(
    lifted: &NonlocalGame,
    systems: Option<(&Blcs, &Blcs)>,
    family: impl Fn(&[usize]) -> Result<Vec<QuantumStrategy>, QuantumError>,
    claimed: &Surd,
) -> Result<SdLiftingReport, LiftError> {
    let sc = &lifted.scenario;
    let mut entries = Vec::with_capacity(sc.num_input_tuples());
    let mut skipped = Vec::new();
    for xi in 0..sc.num_input_tuples() {
        let x = sc.input_tuple(xi);
        if num_traits::Zero::is_zero(&lifted.dist[xi]) {
            skipped.push(x);
            continue;
        }
        let fail = |reason: String| LiftError::CheckFailed { x_star: x.clone(), reason };
        let strategies = family(&x)?;
        if strategies.is_empty() {
            return Err(fail("empty strategy family".into()));
        }
        let mut min_value: Option<Surd> = None;
        let mut symmetric = systems.map(|_| true);
        for (k, s) in strategies.iter().enumerate() {
            if !s.is_deterministic_at(&x) {
                return Err(fail(format!("strategy {} is not deterministic", k + 1)));
            }
            let v = strategy_value(lifted, s)?;
            if v != *claimed {
                return Err(fail(format!("strategy {} has value {v}, expected {claimed}", k + 1)));
            }
            min_value = Some(min_value.map_or(v.clone(), |m| m.min(v)));
            if let Some((orig, sys)) = systems {
                let mut fixed: HashMap<String, i8> = HashMap::new();
                for (p, &xp) in x.iter().enumerate() {
                    for (label, slot) in sc.slots[p][xp].iter().zip(&s.slots[p][xp]) {
                        let Slot::Const(c) = slot else { unreachable!("deterministic") };
                        if fixed.insert(label.clone(), *c).is_some_and(|old| old != *c) {
                            return Err(fail(format!("players disagree on `{label}`")));
                        }
                    }
                }
                let r = sys.reduce(&fixed);
                let iso = r.violated.is_empty() && r.system.is_isomorphic(orig)?.is_some();
                if !iso {
                    return Err(fail(format!("strategy {}: reduced system is not isomorphic to the original", k + 1)));
                }
                symmetric = Some(true);
            }
        }
        entries.push(SdLiftingEntry {
            x_star: x.clone(),
            strategies: strategies.len(),
            deterministic: true,
            min_value: min_value.expect("non-empty"),
            symmetric,
        });
    }
    Ok(SdLiftingReport { entries, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blcs::{chsh_system, magic_square, magic_star};
    use crate::games::mermin_ghz_game;
    use crate::quantum::{lifted_ghz_pd_strategy, sdlmsq_pd_strategy, sdlmstar_pd_strategy};

    fn one() -> Surd {
        Surd::from_ratio(1, 1)
    }

    #[test]
    fn catalog_structure() {
        let sq = sdl_magic_square();
        assert!(sq.lemma1_check());
        assert!(sq.intersection_graph().is_complete_bipartite(&[0, 1, 2, 3], &[4, 5, 6, 7]));
        let st = sdl_magic_star();
        assert!(st.is_arrangement());
        assert_eq!(st.system_parity(), -1);
        assert!(st.intersection_graph().is_complete());
        assert_eq!(lifted_chsh_game().side_correlations.len(), 6);
    }

    #[test]
    fn protocol1_magic_square() {
        let r = protocol1(&magic_square()).unwrap();
        assert_eq!((r.lifted.num_variables(), r.lifted.num_constraints()), (34, 7));
        assert!(r.flags.even_degrees && r.flags.parity == -1);
        assert!(r.lifted.lemma1_check());
        assert!(r.provenance_complete());
        let reds = protocol1_reductions(&r).unwrap();
        assert_eq!(reds.len(), 7);
        for red in &reds {
            assert!(red.ok(), "constraint {} case {}", red.constraint + 1, red.case);
        }
        // Case (i) leaves the original system verbatim.
        assert_eq!(reds[6].reduced, magic_square());
        assert!(r.to_json().contains("\"role\": \"aux\""));
    }

    #[test]
    fn protocol1_chsh_has_no_classical_solution() {
        let r = protocol1(&chsh_system()).unwrap();
        assert_eq!(r.lifted.num_variables(), 2 + 4 + 3);
        assert!(r.lifted.has_classical_solution().unwrap().is_none());
        assert!(protocol1_reductions(&r).unwrap().iter().all(CaseReduction::ok));
        let even = Blcs::new(vec!["a", "b"], vec![(vec!["a".into(), "b".into()], 1); 2]).unwrap();
        assert!(matches!(protocol1(&even), Err(LiftError::NotStandard(_))));
    }

    #[test]
    fn protocol3_chsh_is_the_lifted_chsh() {
        let r = protocol3(&chsh_system()).unwrap();
        assert_eq!((r.lifted.num_variables(), r.lifted.num_constraints()), (6, 3));
        assert!(r.lifted.is_isomorphic(&lifted_chsh_system()).unwrap().is_some());
        assert!(!r.lifted.arkhipov_realizable().unwrap());
        assert!(protocol3_reductions(&r).unwrap().iter().all(CaseReduction::ok));
    }

    #[test]
    fn protocol3_magic_square() {
        let r = protocol3(&magic_square()).unwrap();
        assert_eq!((r.lifted.num_variables(), r.lifted.num_constraints()), (27, 7));
        assert!(r.flags.arrangement && r.flags.parity == -1);
        assert!(protocol3_reductions(&r).unwrap().iter().all(CaseReduction::ok));
        let single = Blcs::new(vec!["a", "b"], vec![(vec!["a".into(), "b".into()], -1)]).unwrap();
        assert!(matches!(protocol3(&single), Err(LiftError::NotArrangement)));
        assert_eq!(protocol3(&sdl_magic_square()).unwrap().lifted.num_variables(), 48);
    }

    #[test]
    fn protocol2_ghz() {
        let game = mermin_ghz_game();
        let r = protocol2(&game).unwrap();
        assert_eq!(r.copies, Some(27));
        assert_eq!(r.lifted.num_variables(), 324);
        assert_eq!(r.lifted.num_constraints(), 27 * 4 + 9);
        assert_eq!(r.flags.uniform_degree, Some(2));
        assert_eq!(r.flags.parity, -1);
        assert!(r.provenance_complete());
        for g in 0..27 {
            let red = protocol2_reduction(&game, &r, g).unwrap();
            assert!(red.ok(), "copy {}", g + 1);
        }
        // The all-new-setting tuple is the last one and is answered by +1.
        let last = protocol2_reduction(&game, &r, 26).unwrap();
        assert!(last.assignment.values().all(|&v| v == 1));
    }

    #[test]
    fn sd_lifting_square() {
        let game = sdl_magic_square_game();
        let (ms, sq) = (magic_square(), sdl_magic_square());
        let rep = check_sd_lifting(
            &game,
            Some((&ms, &sq)),
            |x| (1..=32).map(|i| sdlmsq_pd_strategy(x[0] + 1, x[1] + 1, i)).collect(),
            &one(),
        )
        .unwrap();
        assert_eq!(rep.entries.len(), 16);
        assert!(rep.entries.iter().all(|e| e.strategies == 32 && e.symmetric == Some(true)));
    }

    #[test]
    fn sd_lifting_star_and_grid() {
        let game = sdl_magic_star_game();
        let (ms, st) = (magic_star(), sdl_magic_star());
        let rep = check_sd_lifting(
            &game,
            Some((&ms, &st)),
            |x| (1..=16).map(|i| sdlmstar_pd_strategy(x[0] + 1, i)).collect(),
            &one(),
        )
        .unwrap();
        assert_eq!(rep.entries.len(), 30);
        assert_eq!(rep.skipped.len(), 60);
        let rep = check_sd_lifting(
            &lifted_ghz_game(),
            None,
            |x| Ok(vec![lifted_ghz_pd_strategy([x[0], x[1], x[2]])?]),
            &one(),
        )
        .unwrap();
        assert_eq!(rep.entries.len(), 27);
        // A family deterministic at the wrong tuple is rejected.
        let bad = check_sd_lifting(&lifted_ghz_game(), None, |_| Ok(vec![lifted_ghz_pd_strategy([0, 0, 0])?]), &one());
        assert!(matches!(bad, Err(LiftError::CheckFailed { .. })));
    }
}
