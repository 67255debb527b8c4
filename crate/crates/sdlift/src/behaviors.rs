//! Behavior tables, no-signaling checks, partially deterministic
//! decomposition certificates, and the convex-combination attack.

use crate::games::{classical_value, game_value, outcome_string, GameError, NonlocalGame, Scenario};
use crate::scalar::{OrderedField, Rational, Surd};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BehaviorError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("decomposition invalid: {0}")]
    InvalidDecomposition(String),
    #[error("spot-check probability {0} must lie strictly between 0 and 1")]
    BadGamma(f64),
    #[error("part {0} cannot be sampled: {1}")]
    Unsamplable(usize, String),
    #[error("invalid json: {0}")]
    Json(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Dense table `p(a|x)`: one row per input tuple, one entry per outcome
/// tuple, both in the scenario's mixed-radix order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Behavior {
    scenario: Scenario,
    table: Vec<Vec<Surd>>,
}

impl Behavior {
    pub fn new(scenario: Scenario, table: Vec<Vec<Surd>>) -> Result<Self, BehaviorError> {
        if table.len() != scenario.num_input_tuples() {
            return Err(BehaviorError::ShapeMismatch("row count".into()));
        }
        for (xi, row) in table.iter().enumerate() {
            if row.len() != scenario.num_outcomes(&scenario.input_tuple(xi)) {
                return Err(BehaviorError::ShapeMismatch(format!("row {xi} length")));
            }
        }
        Ok(Behavior { scenario, table })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn row(&self, xi: usize) -> &[Surd] {
        &self.table[xi]
    }

    pub fn rows(&self) -> &[Vec<Surd>] {
        &self.table
    }

    pub fn get(&self, x: &[usize], a: &[usize]) -> &Surd {
        let xi = self.scenario.input_index(x);
        &self.table[xi][self.scenario.outcome_index(x, a)]
    }

    /// Uniform over each row.
    pub fn uniform(scenario: Scenario) -> Self {
        let table = (0..scenario.num_input_tuples())
            .map(|xi| {
                let k = scenario.num_outcomes(&scenario.input_tuple(xi));
                vec![Surd::from_ratio(1, k as i64); k]
            })
            .collect();
        Behavior { scenario, table }
    }

    /// `Σ w_i · part_i`.
    pub fn mixture(weights: &[Surd], parts: &[Behavior]) -> Result<Behavior, BehaviorError> {
        let first = parts.first().ok_or_else(|| BehaviorError::ShapeMismatch("no parts".into()))?;
        if weights.len() != parts.len() {
            return Err(BehaviorError::ShapeMismatch("weights and parts differ in length".into()));
        }
        let mut table: Vec<Vec<Surd>> =
            first.table.iter().map(|r| vec![Surd::default(); r.len()]).collect();
        for (w, part) in weights.iter().zip(parts) {
            if part.scenario != first.scenario {
                return Err(BehaviorError::ShapeMismatch("parts have different scenarios".into()));
            }
            for (row, prow) in table.iter_mut().zip(&part.table) {
                for (t, p) in row.iter_mut().zip(prow) {
                    if !p.is_zero() {
                        *t = &*t + &(w * p);
                    }
                }
            }
        }
        Ok(Behavior { scenario: first.scenario.clone(), table })
    }

    /// Largest |self − other| over all entries.
    pub fn max_deviation(&self, other: &Behavior) -> Result<Surd, BehaviorError> {
        if self.scenario != other.scenario {
            return Err(BehaviorError::ShapeMismatch("scenarios differ".into()));
        }
        let mut worst = Surd::default();
        for (r, s) in self.table.iter().zip(&other.table) {
            for (a, b) in r.iter().zip(s) {
                let d = (a - b).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        Ok(worst)
    }

    /// Sub-behavior on the listed inputs of each player, in the given order.
    pub fn restrict_inputs(&self, keep: &[Vec<usize>]) -> Result<Behavior, BehaviorError> {
        let sc = &self.scenario;
        if keep.len() != sc.players()
            || keep.iter().enumerate().any(|(p, k)| k.is_empty() || k.iter().any(|&x| x >= sc.num_inputs(p)))
        {
            return Err(BehaviorError::ShapeMismatch("restriction does not fit the scenario".into()));
        }
        let sub = Scenario {
            inputs: (0..sc.players()).map(|p| keep[p].iter().map(|&x| sc.inputs[p][x].clone()).collect()).collect(),
            slots: (0..sc.players()).map(|p| keep[p].iter().map(|&x| sc.slots[p][x].clone()).collect()).collect(),
            alphabets: (0..sc.players()).map(|p| keep[p].iter().map(|&x| sc.alphabets[p][x].clone()).collect()).collect(),
        };
        let table = (0..sub.num_input_tuples())
            .map(|xi| {
                let x: Vec<usize> = sub.input_tuple(xi).iter().enumerate().map(|(p, &i)| keep[p][i]).collect();
                self.table[sc.input_index(&x)].clone()
            })
            .collect();
        Behavior::new(sub, table)
    }

    /// Outcome tuple with probability one at `x`, if any.
    pub fn deterministic_outcome(&self, x: &[usize]) -> Option<Vec<usize>> {
        let xi = self.scenario.input_index(x);
        let one = Surd::from_ratio(1, 1);
        self.table[xi].iter().position(|p| *p == one).map(|ai| self.scenario.outcome_tuple(x, ai))
    }

    pub fn max_probability(&self, x: &[usize]) -> Surd {
        let xi = self.scenario.input_index(x);
        self.table[xi].iter().max().cloned().unwrap_or_default()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&BehaviorJson::from(self)).expect("serializable")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&BehaviorJson::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Behavior, BehaviorError> {
        let raw: BehaviorJson = serde_json::from_str(s).map_err(|e| BehaviorError::Json(e.to_string()))?;
        raw.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct BehaviorJson {
    shape: Scenario,
    table: Vec<EntryJson>,
    exact: bool,
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    x: Vec<String>,
    a: Vec<String>,
    p: String,
}

impl From<&Behavior> for BehaviorJson {
    fn from(b: &Behavior) -> Self {
        let sc = &b.scenario;
        let mut table = Vec::new();
        for (xi, row) in b.table.iter().enumerate() {
            let x = sc.input_tuple(xi);
            let xl: Vec<String> = x.iter().enumerate().map(|(p, &xp)| sc.inputs[p][xp].clone()).collect();
            for (ai, p) in row.iter().enumerate() {
                let a = sc.outcome_tuple(&x, ai);
                table.push(EntryJson {
                    x: xl.clone(),
                    a: a.iter()
                        .enumerate()
                        .map(|(pl, &o)| outcome_string(&sc.alphabets[pl][x[pl]][o]))
                        .collect(),
                    p: p.to_string(),
                });
            }
        }
        BehaviorJson { shape: sc.clone(), table, exact: true }
    }
}

impl TryFrom<BehaviorJson> for Behavior {
    type Error = BehaviorError;
    fn try_from(raw: BehaviorJson) -> Result<Self, Self::Error> {
        let sc = raw.shape;
        sc.validate()?;
        let mut table: Vec<Vec<Surd>> = (0..sc.num_input_tuples())
            .map(|xi| vec![Surd::default(); sc.num_outcomes(&sc.input_tuple(xi))])
            .collect();
        let bad = |m: String| BehaviorError::Json(m);
        for e in raw.table {
            if e.x.len() != sc.players() || e.a.len() != sc.players() {
                return Err(bad("entry arity".into()));
            }
            let x: Vec<usize> = e
                .x
                .iter()
                .enumerate()
                .map(|(p, l)| sc.find_input(p, l).ok_or_else(|| bad(format!("unknown input `{l}`"))))
                .collect::<Result<_, _>>()?;
            let a: Vec<usize> = e
                .a
                .iter()
                .enumerate()
                .map(|(p, s)| {
                    let o = crate::games::parse_outcome(s).map_err(bad)?;
                    sc.find_outcome(p, x[p], &o).ok_or_else(|| bad(format!("outcome `{s}` not in alphabet")))
                })
                .collect::<Result<_, _>>()?;
            let p: Surd = e.p.parse().map_err(|e: crate::scalar::ParseSurdError| bad(e.to_string()))?;
            table[sc.input_index(&x)][sc.outcome_index(&x, &a)] = p;
        }
        Behavior::new(sc, table)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalingViolation {
    /// Players whose marginal was compared.
    pub subset: Vec<usize>,
    pub x: Vec<usize>,
    pub x_other: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BehaviorReport {
    pub nonnegative: bool,
    /// Input tuples whose row does not sum to one.
    pub unnormalized: Vec<Vec<usize>>,
    pub signaling: Vec<SignalingViolation>,
}

impl BehaviorReport {
    pub fn ok(&self) -> bool {
        self.nonnegative && self.unnormalized.is_empty() && self.signaling.is_empty()
    }
}

/// Normalization, non-negativity and marginal consistency for every proper
/// non-empty subset of players.
pub fn check_behavior(b: &Behavior) -> BehaviorReport {
    let sc = &b.scenario;
    let n = sc.players();
    let one = Surd::from_ratio(1, 1);
    let nonnegative = b.table.iter().flatten().all(|p| !p.is_negative());
    let unnormalized = (0..sc.num_input_tuples())
        .filter(|&xi| b.table[xi].iter().cloned().sum::<Surd>() != one)
        .map(|xi| sc.input_tuple(xi))
        .collect();
    let mut signaling = Vec::new();
    for mask in 1u32..(1 << n) - 1 {
        let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let mut reference: HashMap<Vec<usize>, (Vec<usize>, Vec<Surd>)> = HashMap::new();
        for xi in 0..sc.num_input_tuples() {
            let x = sc.input_tuple(xi);
            let xs: Vec<usize> = subset.iter().map(|&i| x[i]).collect();
            let size: usize = subset.iter().map(|&i| sc.alphabets[i][x[i]].len()).product();
            let mut marg = vec![Surd::default(); size];
            for (ai, p) in b.table[xi].iter().enumerate() {
                if p.is_zero() {
                    continue;
                }
                let a = sc.outcome_tuple(&x, ai);
                let k = subset.iter().fold(0, |acc, &i| acc * sc.alphabets[i][x[i]].len() + a[i]);
                marg[k] = &marg[k] + p;
            }
            match reference.get(&xs) {
                None => {
                    reference.insert(xs, (x, marg));
                }
                Some((x0, m0)) if *m0 != marg => signaling.push(SignalingViolation {
                    subset: subset.clone(),
                    x: x0.clone(),
                    x_other: x,
                }),
                Some(_) => {}
            }
        }
    }
    BehaviorReport { nonnegative, unnormalized, signaling }
}

/// Convex decomposition whose parts are deterministic at `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdDecomposition {
    pub target: Vec<usize>,
    pub weights: Vec<Surd>,
    pub parts: Vec<Behavior>,
    /// Declared deterministic outcome of each part at `target`.
    pub outcomes: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionReport {
    pub weights_valid: bool,
    /// Parts that fail to put probability one on their declared outcome.
    pub nondeterministic_parts: Vec<usize>,
    pub max_deviation: Surd,
}

impl DecompositionReport {
    pub fn ok(&self) -> bool {
        self.weights_valid && self.nondeterministic_parts.is_empty() && self.max_deviation.is_zero()
    }
}

/// Entrywise check of `Σ q_i part_i == target`, plus weight validity and
/// determinism of each part at the target input.
pub fn verify_decomposition(
    target: &Behavior,
    d: &PdDecomposition,
) -> Result<DecompositionReport, BehaviorError> {
    if d.parts.len() != d.weights.len() || d.parts.len() != d.outcomes.len() {
        return Err(BehaviorError::ShapeMismatch("decomposition lists differ in length".into()));
    }
    if d.target.len() != target.scenario.players() {
        return Err(BehaviorError::ShapeMismatch("target arity".into()));
    }
    let one = Surd::from_ratio(1, 1);
    let weights_valid = d.weights.iter().all(|w| !w.is_negative())
        && d.weights.iter().cloned().sum::<Surd>() == one;
    let nondeterministic_parts = d
        .parts
        .iter()
        .zip(&d.outcomes)
        .enumerate()
        .filter(|(_, (p, o))| *p.get(&d.target, o) != one)
        .map(|(i, _)| i)
        .collect();
    let mix = Behavior::mixture(&d.weights, &d.parts)?;
    let max_deviation = mix.max_deviation(target)?;
    Ok(DecompositionReport { weights_valid, nondeterministic_parts, max_deviation })
}

/// Certified lower bound `Σ q_i max_a part_i(a|x*)` on the guessing
/// probability against a classical adversary holding the mixture label.
pub fn guessing_certificate(
    target: &Behavior,
    x_star: &[usize],
    d: &PdDecomposition,
) -> Result<Surd, BehaviorError> {
    let r = verify_decomposition(target, d)?;
    if !r.weights_valid || !r.max_deviation.is_zero() {
        return Err(BehaviorError::InvalidDecomposition(format!(
            "weights valid: {}, max deviation: {}",
            r.weights_valid, r.max_deviation
        )));
    }
    Ok(d.weights.iter().zip(&d.parts).map(|(w, p)| w * &p.max_probability(x_star)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalFraction {
    Zero,
    Inconclusive,
}

/// A perfectly winning behavior of a game without a perfect classical
/// strategy has no local component.
pub fn local_fraction_support_check(
    game: &NonlocalGame,
    b: &Behavior,
) -> Result<LocalFraction, BehaviorError> {
    let one = Surd::from_ratio(1, 1);
    if game_value(game, b)? != one {
        return Ok(LocalFraction::Inconclusive);
    }
    let c = classical_value(game)?;
    Ok(if c.value < Rational::from_integer(1.into()) {
        LocalFraction::Zero
    } else {
        LocalFraction::Inconclusive
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundKind {
    Generation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    pub round: usize,
    pub kind: RoundKind,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    /// Index of the mixture component drawn from the shared variable.
    pub part: usize,
    /// Eve's guess on generation rounds.
    pub guess: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct BandCheck {
    pub entries: usize,
    pub within: usize,
    /// Worst |count − n·p| / σ over entries with 0 < p < 1.
    pub worst_sigma: f64,
}

impl BandCheck {
    pub fn all_within(&self) -> bool {
        self.within == self.entries
    }
}

#[derive(Debug, Clone)]
pub struct AttackTranscript {
    pub seed: u64,
    pub gamma: f64,
    pub x_star: Vec<usize>,
    pub records: Vec<RoundRecord>,
    pub generation_rounds: usize,
    pub correct_guesses: usize,
    pub bands: BandCheck,
}

impl AttackTranscript {
    /// 1.0 on an empty run.
    pub fn guess_rate(&self) -> f64 {
        if self.generation_rounds == 0 {
            1.0
        } else {
            self.correct_guesses as f64 / self.generation_rounds as f64
        }
    }

    pub fn to_csv(&self, scenario: &Scenario) -> String {
        let mut s = String::from("round,type,inputs,outputs,guess,match\n");
        let show_x = |x: &[usize]| -> String {
            x.iter().enumerate().map(|(p, &xp)| scenario.inputs[p][xp].clone()).collect::<Vec<_>>().join(";")
        };
        let show_a = |x: &[usize], a: &[usize]| -> String {
            a.iter()
                .enumerate()
                .map(|(p, &o)| outcome_string(&scenario.alphabets[p][x[p]][o]))
                .collect::<Vec<_>>()
                .join(";")
        };
        for r in &self.records {
            let (kind, guess, hit) = match (&r.kind, &r.guess) {
                (RoundKind::Generation, Some(g)) => {
                    ("generation", show_a(&r.inputs, g), (g == &r.outputs).to_string())
                }
                _ => ("test", String::new(), String::new()),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.round,
                kind,
                show_x(&r.inputs),
                show_a(&r.inputs, &r.outputs),
                guess,
                hit
            );
        }
        s
    }
}

fn sample_index(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding can leave u just above the accumulated mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Spot-checking protocol under the convex-combination attack. Each round
/// draws a mixture component from the shared variable; generation rounds
/// (probability 1 − γ) use `x_star` and Eve guesses the component's
/// deterministic outcome; test rounds draw inputs from `dist` and outputs
/// from the component.
pub fn attack_simulate(
    target: &Behavior,
    d: &PdDecomposition,
    dist: &[Rational],
    gamma: f64,
    rounds: usize,
    seed: u64,
) -> Result<AttackTranscript, BehaviorError> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(BehaviorError::BadGamma(gamma));
    }
    let sc = target.scenario();
    if dist.len() != sc.num_input_tuples() {
        return Err(BehaviorError::ShapeMismatch("test distribution length".into()));
    }
    let report = verify_decomposition(target, d)?;
    if !report.ok() {
        return Err(BehaviorError::InvalidDecomposition(format!(
            "max deviation {}",
            report.max_deviation
        )));
    }
    let weights: Vec<f64> = d.weights.iter().map(OrderedField::to_f64).collect();
    let pi: Vec<f64> = dist.iter().map(OrderedField::to_f64).collect();
    let rows: Vec<Vec<Vec<f64>>> = d
        .parts
        .iter()
        .map(|p| p.rows().iter().map(|r| r.iter().map(OrderedField::to_f64).collect()).collect())
        .collect();
    for (i, part) in rows.iter().enumerate() {
        for (xi, r) in part.iter().enumerate() {
            if pi[xi] > 0.0 && (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(BehaviorError::Unsamplable(i, format!("row {xi} is not normalized")));
            }
        }
    }
    let x_star_idx = sc.input_index(&d.target);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(rounds);
    let mut counts: Vec<Vec<u64>> = target.rows().iter().map(|r| vec![0; r.len()]).collect();
    let mut seen = vec![0u64; sc.num_input_tuples()];
    let (mut generation_rounds, mut correct_guesses) = (0, 0);
    for round in 0..rounds {
        let part = sample_index(&mut rng, &weights);
        let test = rng.gen::<f64>() < gamma;
        let (kind, xi) = if test {
            (RoundKind::Test, sample_index(&mut rng, &pi))
        } else {
            (RoundKind::Generation, x_star_idx)
        };
        let x = sc.input_tuple(xi);
        let ai = sample_index(&mut rng, &rows[part][xi]);
        let outputs = sc.outcome_tuple(&x, ai);
        let guess = match kind {
            RoundKind::Generation => {
                generation_rounds += 1;
                let g = d.outcomes[part].clone();
                if g == outputs {
                    correct_guesses += 1;
                }
                Some(g)
            }
            RoundKind::Test => {
                counts[xi][ai] += 1;
                seen[xi] += 1;
                None
            }
        };
        records.push(RoundRecord { round, kind, inputs: x, outputs, part, guess });
    }
    let bands = band_check(target, &counts, &seen);
    Ok(AttackTranscript {
        seed,
        gamma,
        x_star: d.target.clone(),
        records,
        generation_rounds,
        correct_guesses,
        bands,
    })
}

/// Per-entry binomial 4σ bands on the test-round counts.
fn band_check(target: &Behavior, counts: &[Vec<u64>], seen: &[u64]) -> BandCheck {
    let (mut entries, mut within, mut worst) = (0, 0, 0.0f64);
    for (xi, row) in target.rows().iter().enumerate() {
        let n = seen[xi] as f64;
        if seen[xi] == 0 {
            continue;
        }
        for (ai, p) in row.iter().enumerate() {
            let p = p.to_f64();
            let c = counts[xi][ai] as f64;
            entries += 1;
            let sigma = (n * p * (1.0 - p)).sqrt();
            let dev = (c - n * p).abs();
            let ok = if sigma < 1e-12 { dev < 0.5 } else { dev <= 4.0 * sigma };
            if sigma >= 1e-12 {
                worst = worst.max(dev / sigma);
            }
            if ok {
                within += 1;
            }
        }
    }
    BandCheck { entries, within, worst_sigma: worst }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{binary_alphabet, chsh_xor_game};

    fn two_by_two() -> Scenario {
        chsh_xor_game().scenario
    }

    fn product_behavior(pa: [i64; 2], pb: [i64; 2]) -> Behavior {
        // p(a,b|x,y) = [a = pa[x]] [b = pb[y]] with outcome index 0 for +1.
        let sc = two_by_two();
        let table = (0..4)
            .map(|xi| {
                let x = sc.input_tuple(xi);
                (0..4)
                    .map(|ai| {
                        let a = sc.outcome_tuple(&x, ai);
                        let hit = a[0] as i64 == pa[x[0]] && a[1] as i64 == pb[x[1]];
                        Surd::from_ratio(hit as i64, 1)
                    })
                    .collect()
            })
            .collect();
        Behavior::new(sc, table).unwrap()
    }

    #[test]
    fn deterministic_behaviors_pass() {
        let b = product_behavior([0, 1], [1, 1]);
        assert!(check_behavior(&b).ok());
        assert!(check_behavior(&Behavior::uniform(two_by_two())).ok());
    }

    #[test]
    fn signaling_table_is_caught() {
        // Alice's output copies Bob's input.
        let sc = two_by_two();
        let table = (0..4)
            .map(|xi| {
                let x = sc.input_tuple(xi);
                (0..4)
                    .map(|ai| {
                        let a = sc.outcome_tuple(&x, ai);
                        Surd::from_ratio((a[0] == x[1] && a[1] == 0) as i64, 1)
                    })
                    .collect()
            })
            .collect();
        let r = check_behavior(&Behavior::new(sc, table).unwrap());
        assert!(r.unnormalized.is_empty());
        assert!(r.signaling.iter().any(|v| v.subset == vec![0]));
    }

    #[test]
    fn uniform_parts_give_one_eighth() {
        // Target: uniform over eight outcomes at a single-player input.
        let sc = Scenario {
            inputs: vec![vec!["0".into()], vec!["0".into()]],
            slots: vec![vec![vec!["a".into(), "b".into(), "c".into()]], vec![vec!["d".into()]]],
            alphabets: vec![vec![crate::games::all_strings(3)], vec![vec![vec![1]]]],
        };
        let u = Behavior::uniform(sc);
        let d = PdDecomposition {
            target: vec![0, 0],
            weights: vec![Surd::from_ratio(1, 1)],
            parts: vec![u.clone()],
            outcomes: vec![vec![0, 0]],
        };
        assert_eq!(guessing_certificate(&u, &[0, 0], &d).unwrap(), Surd::from_ratio(1, 8));
        assert_eq!(verify_decomposition(&u, &d).unwrap().nondeterministic_parts, vec![0]);
    }

    #[test]
    fn perturbed_weight_fails() {
        let p0 = product_behavior([0, 0], [0, 0]);
        let p1 = product_behavior([1, 1], [1, 1]);
        let half = Surd::from_ratio(1, 2);
        let target = Behavior::mixture(&[half.clone(), half.clone()], &[p0.clone(), p1.clone()]).unwrap();
        let good = PdDecomposition {
            target: vec![0, 0],
            weights: vec![half.clone(), half],
            parts: vec![p0.clone(), p1.clone()],
            outcomes: vec![vec![0, 0], vec![1, 1]],
        };
        assert!(verify_decomposition(&target, &good).unwrap().ok());
        assert_eq!(guessing_certificate(&target, &[0, 0], &good).unwrap(), Surd::from_ratio(1, 1));
        let bad = PdDecomposition {
            weights: vec![Surd::from_ratio(501, 1000), Surd::from_ratio(499, 1000)],
            ..good
        };
        let r = verify_decomposition(&target, &bad).unwrap();
        assert!(!r.ok());
        assert_eq!(r.max_deviation, Surd::from_ratio(1, 1000));
    }

    #[test]
    fn json_roundtrip() {
        let b = product_behavior([0, 1], [1, 0]);
        let s = b.to_json();
        assert_eq!(Behavior::from_json(&s).unwrap(), b);
        assert_eq!(binary_alphabet().len(), 2);
    }

    #[test]
    fn empty_attack_is_vacuous() {
        let p0 = product_behavior([0, 0], [0, 0]);
        let d = PdDecomposition {
            target: vec![1, 1],
            weights: vec![Surd::from_ratio(1, 1)],
            parts: vec![p0.clone()],
            outcomes: vec![vec![0, 0]],
        };
        let t = attack_simulate(&p0, &d, &chsh_xor_game().dist, 0.1, 0, 7).unwrap();
        assert!(t.records.is_empty());
        assert_eq!(t.guess_rate(), 1.0);
        assert!(matches!(
            attack_simulate(&p0, &d, &chsh_xor_game().dist, 1.0, 10, 7),
            Err(BehaviorError::BadGamma(_))
        ));
    }
}
