//! Non-local games with explicit per-input output alphabets, exact values,
//! and the correspondences with binary linear constraint systems.

use crate::behaviors::Behavior;
use crate::blcs::Blcs;
use crate::gf2;
use crate::scalar::{rat, Rational, Surd};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// An output: one ±1 value per output coordinate of the input.
pub type Outcome = Vec<i8>;

/// Default bound on enumeration work (strategies × table lookups).
pub const DEFAULT_ENUM_CAP: u128 = 200_000_000;
/// Default bound on the number of soft-constraint subsets tried by the
/// parity route.
pub const DEFAULT_SUBSET_CAP: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("search space of {count} exceeds cap {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("player {player} input {input} has {size} outcomes; a binary alphabet is required")]
    NonBinary { player: usize, input: usize, size: usize },
    #[error("input distribution sums to {0}, not 1")]
    BadDistribution(String),
    #[error("malformed game: {0}")]
    Malformed(String),
    #[error("game is not a parity game")]
    NotParity,
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid json: {0}")]
    Json(String),
}

/// Bell scenario: inputs, output coordinates and alphabets per player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    /// player -> input labels
    pub inputs: Vec<Vec<String>>,
    /// player -> input -> output coordinate labels
    pub slots: Vec<Vec<Vec<String>>>,
    /// player -> input -> outcomes, each of length `slots[p][x].len()`
    #[serde(with = "alphabet_serde")]
    pub alphabets: Vec<Vec<Vec<Outcome>>>,
}

mod alphabet_serde {
    use super::Outcome;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(a: &[Vec<Vec<Outcome>>], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<Vec<Vec<String>>> = a
            .iter()
            .map(|p| p.iter().map(|x| x.iter().map(|o| super::outcome_string(o)).collect()).collect())
            .collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Vec<Outcome>>>, D::Error> {
        let strs: Vec<Vec<Vec<String>>> = Vec::deserialize(d)?;
        strs.into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|x| {
                        x.into_iter()
                            .map(|o| super::parse_outcome(&o).map_err(serde::de::Error::custom))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

/// `+` / `-` per coordinate.
pub fn outcome_string(o: &[i8]) -> String {
    o.iter().map(|&s| if s == 1 { '+' } else { '-' }).collect()
}

pub fn parse_outcome(s: &str) -> Result<Outcome, String> {
    s.chars()
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            _ => Err(format!("bad outcome character `{c}` in `{s}`")),
        })
        .collect()
}

/// All ±1 strings of length `len`, `+1` before `−1`, lexicographic.
pub fn all_strings(len: usize) -> Vec<Outcome> {
    (0..1u64 << len)
        .map(|bits| (0..len).map(|k| if bits >> (len - 1 - k) & 1 == 1 { -1 } else { 1 }).collect())
        .collect()
}

/// Strings of length `len` whose product is `parity`, in the order of
/// [`all_strings`].
pub fn parity_strings(len: usize, parity: i8) -> Vec<Outcome> {
    all_strings(len).into_iter().filter(|o| o.iter().product::<i8>() == parity).collect()
}

pub fn binary_alphabet() -> Vec<Outcome> {
    vec![vec![1], vec![-1]]
}

impl Scenario {
    pub fn players(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_inputs(&self, player: usize) -> usize {
        self.inputs[player].len()
    }

    pub fn num_input_tuples(&self) -> usize {
        self.inputs.iter().map(Vec::len).product()
    }

    /// Mixed-radix decoding, player 0 most significant.
    pub fn input_tuple(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.players()];
        for p in (0..self.players()).rev() {
            let r = self.inputs[p].len();
            out[p] = idx % r;
            idx /= r;
        }
        out
    }

    pub fn input_index(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.inputs).fold(0, |acc, (&xi, ins)| acc * ins.len() + xi)
    }

    pub fn alphabet(&self, player: usize, input: usize) -> &[Outcome] {
        &self.alphabets[player][input]
    }

    pub fn num_outcomes(&self, x: &[usize]) -> usize {
        x.iter().enumerate().map(|(p, &xi)| self.alphabets[p][xi].len()).product()
    }

    pub fn outcome_tuple(&self, x: &[usize], mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; x.len()];
        for p in (0..x.len()).rev() {
            let r = self.alphabets[p][x[p]].len();
            out[p] = idx % r;
            idx /= r;
        }
        out
    }

    pub fn outcome_index(&self, x: &[usize], a: &[usize]) -> usize {
        a.iter()
            .enumerate()
            .fold(0, |acc, (p, &ai)| acc * self.alphabets[p][x[p]].len() + ai)
    }

    pub fn find_input(&self, player: usize, label: &str) -> Option<usize> {
        self.inputs[player].iter().position(|l| l == label)
    }

    pub fn find_outcome(&self, player: usize, input: usize, o: &[i8]) -> Option<usize> {
        self.alphabets[player][input].iter().position(|a| a == o)
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let n = self.players();
        if self.slots.len() != n || self.alphabets.len() != n || n == 0 {
            return Err(GameError::Malformed("per-player lists disagree in length".into()));
        }
        for p in 0..n {
            if self.inputs[p].is_empty() {
                return Err(GameError::Malformed(format!("player {p} has no inputs")));
            }
            if self.slots[p].len() != self.inputs[p].len()
                || self.alphabets[p].len() != self.inputs[p].len()
            {
                return Err(GameError::Malformed(format!("player {p}: input lists disagree")));
            }
            for (x, alpha) in self.alphabets[p].iter().enumerate() {
                if alpha.is_empty() {
                    return Err(GameError::Malformed(format!("player {p} input {x}: empty alphabet")));
                }
                let k = self.slots[p][x].len();
                if alpha.iter().any(|o| o.len() != k || o.iter().any(|&s| s != 1 && s != -1)) {
                    return Err(GameError::Malformed(format!(
                        "player {p} input {x}: outcome length or value"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `∏ a[player][coord] == sign` over the listed slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCheck {
    pub slots: Vec<(usize, usize)>,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// Per input tuple, dense over outcome tuples.
    Table(Vec<Vec<bool>>),
    /// Per input tuple; `None` means every outcome wins.
    Parity(Vec<Option<ParityCheck>>),
}

/// Requirement that a player's two output coordinates be perfectly
/// correlated or anti-correlated. Deterministic strategies satisfy it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideCorrelation {
    pub player: usize,
    pub input: usize,
    pub coords: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonlocalGame {
    pub name: String,
    pub scenario: Scenario,
    /// Dense over input tuples.
    pub dist: Vec<Rational>,
    pub rule: Rule,
    pub side_correlations: Vec<SideCorrelation>,
}

/// Output index per player and input.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeterministicStrategy {
    pub choice: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicalMethod {
    Enumeration,
    ParityMinViolation,
}

#[derive(Debug, Clone)]
pub struct ClassicalValue {
    pub value: Rational,
    pub witness: DeterministicStrategy,
    pub method: ClassicalMethod,
}

impl NonlocalGame {
    pub fn new(
        name: impl Into<String>,
        scenario: Scenario,
        dist: Vec<Rational>,
        rule: Rule,
    ) -> Result<Self, GameError> {
        let g = NonlocalGame {
            name: name.into(),
            scenario,
            dist,
            rule,
            side_correlations: Vec::new(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GameError> {
        self.scenario.validate()?;
        let nx = self.scenario.num_input_tuples();
        if self.dist.len() != nx {
            return Err(GameError::Malformed("distribution length".into()));
        }
        if self.dist.iter().any(Signed::is_negative) {
            return Err(GameError::Malformed("negative probability".into()));
        }
        let total: Rational = self.dist.iter().sum();
        if !total.is_one() {
            return Err(GameError::BadDistribution(total.to_string()));
        }
        match &self.rule {
            Rule::Table(t) => {
                if t.len() != nx {
                    return Err(GameError::Malformed("rule table length".into()));
                }
                for (xi, row) in t.iter().enumerate() {
                    let x = self.scenario.input_tuple(xi);
                    if row.len() != self.scenario.num_outcomes(&x) {
                        return Err(GameError::Malformed(format!("rule row {xi} length")));
                    }
                }
            }
            Rule::Parity(checks) => {
                if checks.len() != nx {
                    return Err(GameError::Malformed("rule list length".into()));
                }
                for (xi, c) in checks.iter().enumerate() {
                    let x = self.scenario.input_tuple(xi);
                    for &(p, k) in c.iter().flat_map(|c| &c.slots) {
                        if p >= x.len() || k >= self.scenario.slots[p][x[p]].len() {
                            return Err(GameError::Malformed(format!("parity slot at input {xi}")));
                        }
                    }
                }
            }
        }
        for sc in &self.side_correlations {
            let k = self.scenario.slots.get(sc.player).and_then(|s| s.get(sc.input)).map(Vec::len);
            match k {
                Some(k) if sc.coords.0 < k && sc.coords.1 < k => {}
                _ => return Err(GameError::Malformed("side correlation out of range".into())),
            }
        }
        Ok(())
    }

    pub fn players(&self) -> usize {
        self.scenario.players()
    }

    /// W for input tuple index `xi` and per-player outcome indices `a`.
    pub fn wins(&self, xi: usize, a: &[usize]) -> bool {
        match &self.rule {
            Rule::Table(t) => {
                let x = self.scenario.input_tuple(xi);
                t[xi][self.scenario.outcome_index(&x, a)]
            }
            Rule::Parity(checks) => match &checks[xi] {
                None => true,
                Some(c) => {
                    let x = self.scenario.input_tuple(xi);
                    let prod: i8 = c
                        .slots
                        .iter()
                        .map(|&(p, k)| self.scenario.alphabets[p][x[p]][a[p]][k])
                        .product();
                    prod == c.sign
                }
            },
        }
    }

    /// The rule as an explicit table.
    pub fn rule_table(&self) -> Vec<Vec<bool>> {
        (0..self.scenario.num_input_tuples())
            .map(|xi| {
                let x = self.scenario.input_tuple(xi);
                (0..self.scenario.num_outcomes(&x))
                    .map(|ai| self.wins(xi, &self.scenario.outcome_tuple(&x, ai)))
                    .collect()
            })
            .collect()
    }

    /// Behavior of a deterministic strategy.
    pub fn deterministic_behavior(&self, s: &DeterministicStrategy) -> Behavior {
        let sc = &self.scenario;
        let table = (0..sc.num_input_tuples())
            .map(|xi| {
                let x = sc.input_tuple(xi);
                let a: Vec<usize> = x.iter().enumerate().map(|(p, &xp)| s.choice[p][xp]).collect();
                let hit = sc.outcome_index(&x, &a);
                (0..sc.num_outcomes(&x))
                    .map(|ai| if ai == hit { Surd::from_ratio(1, 1) } else { Surd::from_ratio(0, 1) })
                    .collect()
            })
            .collect();
        Behavior::new(sc.clone(), table).expect("deterministic behavior is well formed")
    }

    pub fn strategy_value(&self, s: &DeterministicStrategy) -> Rational {
        let sc = &self.scenario;
        let mut total = Rational::zero();
        for (xi, pi) in self.dist.iter().enumerate() {
            if pi.is_zero() {
                continue;
            }
            let x = sc.input_tuple(xi);
            let a: Vec<usize> = x.iter().enumerate().map(|(p, &xp)| s.choice[p][xp]).collect();
            if self.wins(xi, &a) {
                total += pi;
            }
        }
        total
    }

    fn parity_checks(&self) -> Option<&[Option<ParityCheck>]> {
        match &self.rule {
            Rule::Parity(c) => Some(c),
            Rule::Table(_) => None,
        }
    }

    /// Hard constraint on a player's output for one input when its alphabet
    /// is exactly the full set of strings (None) or a parity class (Some).
    fn alphabet_constraint(alpha: &[Outcome], len: usize) -> Option<Option<i8>> {
        if alpha == all_strings(len).as_slice() {
            return Some(None);
        }
        for parity in [1i8, -1] {
            if len > 0 && alpha == parity_strings(len, parity).as_slice() {
                return Some(Some(parity));
            }
        }
        None
    }

    pub fn is_parity_game(&self) -> bool {
        self.parity_checks().is_some()
            && (0..self.players()).all(|p| {
                (0..self.scenario.num_inputs(p)).all(|x| {
                    Self::alphabet_constraint(
                        &self.scenario.alphabets[p][x],
                        self.scenario.slots[p][x].len(),
                    )
                    .is_some()
                })
            })
    }
}

/// ω = Σ π(x) W(x,a) p(a|x).
pub fn game_value(game: &NonlocalGame, behavior: &Behavior) -> Result<Surd, GameError> {
    if behavior.scenario() != &game.scenario {
        return Err(GameError::ShapeMismatch("behavior scenario differs from the game".into()));
    }
    let sc = &game.scenario;
    let mut total = Surd::default();
    for (xi, pi) in game.dist.iter().enumerate() {
        if pi.is_zero() {
            continue;
        }
        let x = sc.input_tuple(xi);
        let mut won = Surd::default();
        for (ai, p) in behavior.row(xi).iter().enumerate() {
            if crate::scalar::OrderedField::is_zero(p) {
                continue;
            }
            if game.wins(xi, &sc.outcome_tuple(&x, ai)) {
                won = &won + p;
            }
        }
        total = &total + &(&won * &Surd::rational(pi.clone()));
    }
    Ok(total)
}

/// Exact classical value. Enumerates deterministic strategies when the
/// search fits the cap; otherwise parity games use the minimum-violation
/// route.
pub fn classical_value(game: &NonlocalGame) -> Result<ClassicalValue, GameError> {
    match classical_value_enumerate(game, DEFAULT_ENUM_CAP) {
        Err(GameError::CapExceeded { .. }) if game.is_parity_game() => {
            classical_value_parity(game, DEFAULT_SUBSET_CAP)
        }
        other => other,
    }
}

fn enumeration_work(game: &NonlocalGame) -> u128 {
    let sc = &game.scenario;
    let n = sc.players();
    let mut count: u128 = 1;
    for p in 0..n - 1 {
        for alpha in &sc.alphabets[p] {
            count = count.saturating_mul(alpha.len() as u128);
        }
    }
    let last: u128 = sc.alphabets[n - 1].iter().map(|a| a.len() as u128).max().unwrap_or(1);
    count.saturating_mul(sc.num_input_tuples() as u128).saturating_mul(last)
}

/// Common denominator representation of π.
fn integer_weights(dist: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let den = dist.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let nums = dist.iter().map(|r| (r * Rational::from_integer(den.clone())).to_integer()).collect();
    (nums, den)
}

/// Enumerates all strategies of players `0..n-1` in lexicographic order;
/// the last player best-responds per input (lowest index on ties). The
/// witness is the lexicographically least optimal strategy.
pub fn classical_value_enumerate(
    game: &NonlocalGame,
    cap: u128,
) -> Result<ClassicalValue, GameError> {
    let work = enumeration_work(game);
    if work > cap {
        return Err(GameError::CapExceeded { count: work, cap });
    }
    let sc = &game.scenario;
    let n = sc.players();
    let (nums, den) = integer_weights(&game.dist);
    let weights: Vec<i128> = nums
        .iter()
        .map(|b| b.to_i128().ok_or_else(|| GameError::Malformed("weights overflow".into())))
        .collect::<Result<_, _>>()?;
    let live: Vec<usize> = (0..game.dist.len()).filter(|&xi| weights[xi] != 0).collect();
    let tuples: Vec<Vec<usize>> = live.iter().map(|&xi| sc.input_tuple(xi)).collect();
    // Odometer digits over (player, input) for players 0..n-1.
    let digits: Vec<(usize, usize)> =
        (0..n - 1).flat_map(|p| (0..sc.num_inputs(p)).map(move |x| (p, x))).collect();
    let radix: Vec<usize> = digits.iter().map(|&(p, x)| sc.alphabets[p][x].len()).collect();
    let mut odo = vec![0usize; digits.len()];
    let last = n - 1;
    let mut best: Option<(i128, DeterministicStrategy)> = None;
    let mut choice: Vec<Vec<usize>> = (0..n).map(|p| vec![0; sc.num_inputs(p)]).collect();
    let mut score: Vec<Vec<i128>> =
        sc.alphabets[last].iter().map(|a| vec![0; a.len()]).collect();
    let mut a = vec![0usize; n];
    loop {
        for (d, &(p, x)) in digits.iter().enumerate() {
            choice[p][x] = odo[d];
        }
        for row in score.iter_mut() {
            row.iter_mut().for_each(|s| *s = 0);
        }
        for (k, &xi) in live.iter().enumerate() {
            let x = &tuples[k];
            for p in 0..last {
                a[p] = choice[p][x[p]];
            }
            for b in 0..sc.alphabets[last][x[last]].len() {
                a[last] = b;
                if game.wins(xi, &a) {
                    score[x[last]][b] += weights[xi];
                }
            }
        }
        let mut total = 0i128;
        for (y, row) in score.iter().enumerate() {
            let (arg, &m) = row
                .iter()
                .enumerate()
                .fold((0, &row[0]), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            choice[last][y] = arg;
            total += m;
        }
        if best.as_ref().is_none_or(|(v, _)| total > *v) {
            best = Some((total, DeterministicStrategy { choice: choice.clone() }));
        }
        // Advance the odometer; the last digit moves fastest.
        let mut d = digits.len();
        loop {
            if d == 0 {
                let (v, witness) = best.expect("at least one strategy");
                return Ok(ClassicalValue {
                    value: Rational::new(BigInt::from(v), den),
                    witness,
                    method: ClassicalMethod::Enumeration,
                });
            }
            d -= 1;
            odo[d] += 1;
            if odo[d] < radix[d] {
                break;
            }
            odo[d] = 0;
        }
    }
}

/// Exact classical value of a parity game: the optimum violates a minimum
/// weight set of rule checks, found by trying subsets in increasing size
/// and testing consistency over GF(2).
pub fn classical_value_parity(
    game: &NonlocalGame,
    subset_cap: u64,
) -> Result<ClassicalValue, GameError> {
    if !game.is_parity_game() {
        return Err(GameError::NotParity);
    }
    let sc = &game.scenario;
    let checks = game.parity_checks().expect("parity rule");
    // Bit index per (player, input, coord).
    let mut offset = BTreeMap::new();
    let mut nbits = 0;
    for p in 0..sc.players() {
        for x in 0..sc.num_inputs(p) {
            offset.insert((p, x), nbits);
            nbits += sc.slots[p][x].len();
        }
    }
    let mut hard = Vec::new();
    for p in 0..sc.players() {
        for x in 0..sc.num_inputs(p) {
            let len = sc.slots[p][x].len();
            if let Some(Some(parity)) = NonlocalGame::alphabet_constraint(&sc.alphabets[p][x], len) {
                let o = offset[&(p, x)];
                hard.push(gf2::Equation::new(nbits, o..o + len, parity == -1));
            }
        }
    }
    let mut soft: Vec<(Rational, gf2::Equation)> = Vec::new();
    let mut always_lost = Rational::zero();
    for (xi, pi) in game.dist.iter().enumerate() {
        if pi.is_zero() {
            continue;
        }
        let Some(c) = &checks[xi] else { continue };
        let x = sc.input_tuple(xi);
        let bits: Vec<usize> = c.slots.iter().map(|&(p, k)| offset[&(p, x[p])] + k).collect();
        let eq = gf2::Equation::new(nbits, bits, c.sign == -1);
        if eq.row.is_zero() && eq.rhs {
            always_lost += pi;
            continue;
        }
        soft.push((pi.clone(), eq));
    }
    let mut order: Vec<usize> = (0..soft.len()).collect();
    order.sort_by(|&i, &j| soft[i].0.cmp(&soft[j].0));
    let mut best: Option<(Rational, Vec<bool>)> = None;
    let mut tried: u64 = 0;
    for k in 0..=soft.len() {
        let floor: Rational = order.iter().take(k).map(|&i| soft[i].0.clone()).sum();
        if best.as_ref().is_some_and(|(w, _)| floor >= *w) {
            break;
        }
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            tried += 1;
            if tried > subset_cap {
                return Err(GameError::CapExceeded {
                    count: tried as u128,
                    cap: subset_cap as u128,
                });
            }
            let weight: Rational = subset.iter().map(|&i| soft[i].0.clone()).sum();
            if best.as_ref().is_none_or(|(w, _)| weight < *w) {
                let mut eqs = hard.clone();
                eqs.extend(
                    (0..soft.len()).filter(|i| !subset.contains(i)).map(|i| soft[i].1.clone()),
                );
                if let Some(sol) = gf2::solve(nbits, &eqs) {
                    best = Some((weight, sol));
                }
            }
            if !next_combination(&mut subset, soft.len()) {
                break;
            }
        }
    }
    let (lost, bits) = best.ok_or_else(|| GameError::Malformed("alphabet constraints are inconsistent".into()))?;
    let choice = (0..sc.players())
        .map(|p| {
            (0..sc.num_inputs(p))
                .map(|x| {
                    let o = offset[&(p, x)];
                    let out: Outcome = (0..sc.slots[p][x].len())
                        .map(|k| if bits[o + k] { -1 } else { 1 })
                        .collect();
                    sc.find_outcome(p, x, &out).expect("solution respects the alphabet")
                })
                .collect()
        })
        .collect();
    Ok(ClassicalValue {
        value: Rational::one() - lost - always_lost,
        witness: DeterministicStrategy { choice },
        method: ClassicalMethod::ParityMinViolation,
    })
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Two-player game of a constraint system: Alice gets a constraint, Bob a
/// variable; uniform over all pairs; they must agree on the variable when
/// it lies in Alice's constraint.
pub fn blcs_to_game(system: &Blcs) -> NonlocalGame {
    blcs_to_game_named(system, "blcs")
}

pub fn blcs_to_game_named(system: &Blcs, name: &str) -> NonlocalGame {
    let q = system.num_constraints();
    let p = system.num_variables();
    let alice_inputs: Vec<String> = (1..=q).map(|j| j.to_string()).collect();
    let alice_slots: Vec<Vec<String>> = system.constraints().iter().map(|c| c.vars.clone()).collect();
    let alice_alpha: Vec<Vec<Outcome>> = system
        .constraints()
        .iter()
        .map(|c| parity_strings(c.vars.len(), c.parity))
        .collect();
    let bob_inputs: Vec<String> = system.variables().to_vec();
    let scenario = Scenario {
        inputs: vec![alice_inputs, bob_inputs.clone()],
        slots: vec![alice_slots, bob_inputs.iter().map(|v| vec![v.clone()]).collect()],
        alphabets: vec![alice_alpha, vec![binary_alphabet(); p]],
    };
    let mut checks = Vec::with_capacity(p * q);
    for c in system.constraints() {
        for v in system.variables() {
            checks.push(c.vars.iter().position(|w| w == v).map(|k| ParityCheck {
                slots: vec![(0, k), (1, 0)],
                sign: 1,
            }));
        }
    }
    let pi = rat(1, (p * q) as i64);
    NonlocalGame::new(name, scenario, vec![pi; p * q], Rule::Parity(checks))
        .expect("constraint-system game is well formed")
}

/// Row/column game: both players get hyperedges of a grid and must agree
/// on the vertex their edges share.
pub fn compact_square_game(
    system: &Blcs,
    rows: &[usize],
    cols: &[usize],
    name: &str,
) -> Result<NonlocalGame, GameError> {
    let cs = system.constraints();
    let get = |j: usize| {
        cs.get(j).ok_or_else(|| GameError::Malformed(format!("constraint {j} out of range")))
    };
    let mut checks = Vec::new();
    for &r in rows {
        for &c in cols {
            let (rv, cv) = (&get(r)?.vars, &get(c)?.vars);
            let shared: Vec<(usize, usize)> = rv
                .iter()
                .enumerate()
                .filter_map(|(i, v)| cv.iter().position(|w| w == v).map(|k| (i, k)))
                .collect();
            let [(i, k)] = shared[..] else {
                return Err(GameError::Malformed(format!(
                    "edges {r} and {c} share {} vertices; a grid needs exactly one",
                    shared.len()
                )));
            };
            checks.push(Some(ParityCheck { slots: vec![(0, i), (1, k)], sign: 1 }));
        }
    }
    let side = |ids: &[usize]| -> (Vec<String>, Vec<Vec<String>>, Vec<Vec<Outcome>>) {
        (
            ids.iter().map(|&j| format!("{}", j + 1)).collect(),
            ids.iter().map(|&j| cs[j].vars.clone()).collect(),
            ids.iter().map(|&j| parity_strings(cs[j].vars.len(), cs[j].parity)).collect(),
        )
    };
    let (ai, asl, aal) = side(rows);
    let (bi, bsl, bal) = side(cols);
    let scenario = Scenario { inputs: vec![ai, bi], slots: vec![asl, bsl], alphabets: vec![aal, bal] };
    let n = rows.len() * cols.len();
    NonlocalGame::new(name, scenario, vec![rat(1, n as i64); n], Rule::Parity(checks))
}

/// Edge/vertex game: Alice gets an edge, Bob a vertex of it; uniform over
/// valid pairs (pairs with Bob's vertex outside the edge have weight 0).
pub fn compact_star_game(system: &Blcs, name: &str) -> Result<NonlocalGame, GameError> {
    let cs = system.constraints();
    let vars = system.variables();
    let valid: usize = cs.iter().map(|c| c.vars.len()).sum();
    if valid == 0 {
        return Err(GameError::Malformed("no edge contains a vertex".into()));
    }
    let mut dist = Vec::new();
    let mut checks = Vec::new();
    for c in cs {
        for v in vars {
            match c.vars.iter().position(|w| w == v) {
                Some(k) => {
                    dist.push(rat(1, valid as i64));
                    checks.push(Some(ParityCheck { slots: vec![(0, k), (1, 0)], sign: 1 }));
                }
                None => {
                    dist.push(Rational::zero());
                    checks.push(None);
                }
            }
        }
    }
    let scenario = Scenario {
        inputs: vec![(1..=cs.len()).map(|j| j.to_string()).collect(), vars.to_vec()],
        slots: vec![
            cs.iter().map(|c| c.vars.clone()).collect(),
            vars.iter().map(|v| vec![v.clone()]).collect(),
        ],
        alphabets: vec![
            cs.iter().map(|c| parity_strings(c.vars.len(), c.parity)).collect(),
            vec![binary_alphabet(); vars.len()],
        ],
    };
    NonlocalGame::new(name, scenario, dist, Rule::Parity(checks))
}

/// A game whose players receive the faces of an `side`^3 grid; player `i`
/// with input `x` labels the vertices with `i`-th coordinate `x` so their
/// product is `parities[x]`; the three labels at the common vertex must
/// multiply to +1. Uniform over input triples.
pub fn grid_game(side: usize, parities: &[i8], name: &str) -> NonlocalGame {
    assert_eq!(parities.len(), side);
    let coords = |i: usize, x: usize| -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for a in 0..side {
            for b in 0..side {
                let mut v = [0; 3];
                v[i] = x;
                let others: Vec<usize> = (0..3).filter(|&k| k != i).collect();
                v[others[0]] = a;
                v[others[1]] = b;
                out.push(v);
            }
        }
        out
    };
    let label = |v: [usize; 3]| format!("({},{},{})", v[0], v[1], v[2]);
    let mut inputs = Vec::new();
    let mut slots = Vec::new();
    let mut alphabets = Vec::new();
    for i in 0..3 {
        inputs.push((0..side).map(|x| x.to_string()).collect());
        slots.push((0..side).map(|x| coords(i, x).into_iter().map(label).collect()).collect());
        alphabets.push((0..side).map(|x| parity_strings(side * side, parities[x])).collect());
    }
    let scenario = Scenario { inputs, slots, alphabets };
    let mut checks = Vec::new();
    for x1 in 0..side {
        for x2 in 0..side {
            for x3 in 0..side {
                let v = [x1, x2, x3];
                let slots = (0..3)
                    .map(|i| (i, coords(i, v[i]).iter().position(|w| *w == v).expect("on face")))
                    .collect();
                checks.push(Some(ParityCheck { slots, sign: 1 }));
            }
        }
    }
    let n = side.pow(3);
    NonlocalGame::new(name, scenario, vec![rat(1, n as i64); n], Rule::Parity(checks))
        .expect("grid game is well formed")
}

pub fn ghz_cube_game() -> NonlocalGame {
    grid_game(2, &[1, -1], "ghz_cube")
}

/// Three-player binary Mermin game: even-weight inputs, uniformly; the
/// output product must be +1 for input 000 and −1 otherwise.
pub fn mermin_ghz_game() -> NonlocalGame {
    binary_game_from_fn("mermin_ghz", 3, 2, |x| {
        let w: usize = x.iter().sum();
        if w % 2 == 1 {
            return (Rational::zero(), None);
        }
        (rat(1, 4), Some(if w == 0 { 1 } else { -1 }))
    })
}

/// Two-player XOR form of CHSH: outputs multiply to −1 exactly on input (1,1).
pub fn chsh_xor_game() -> NonlocalGame {
    binary_game_from_fn("chsh_xor", 2, 2, |x| {
        (rat(1, 4), Some(if x[0] == 1 && x[1] == 1 { -1 } else { 1 }))
    })
}

/// Binary-outcome game whose rule is the product of all outputs, given per
/// input tuple as `(π, required sign)`.
pub fn binary_game_from_fn(
    name: &str,
    n: usize,
    m: usize,
    f: impl Fn(&[usize]) -> (Rational, Option<i8>),
) -> NonlocalGame {
    let scenario = Scenario {
        inputs: vec![(0..m).map(|x| x.to_string()).collect(); n],
        slots: (0..n)
            .map(|p| (0..m).map(|x| vec![format!("v{}_{}", p + 1, x)]).collect())
            .collect(),
        alphabets: vec![vec![binary_alphabet(); m]; n],
    };
    let mut dist = Vec::new();
    let mut checks = Vec::new();
    for xi in 0..scenario.num_input_tuples() {
        let x = scenario.input_tuple(xi);
        let (pi, sign) = f(&x);
        dist.push(pi);
        checks.push(sign.map(|sign| ParityCheck { slots: (0..n).map(|p| (p, 0)).collect(), sign }));
    }
    NonlocalGame::new(name, scenario, dist, Rule::Parity(checks)).expect("binary game is well formed")
}

/// Variable naming for constraint systems of binary games.
pub fn binary_var_name(player: usize, input: usize) -> String {
    format!("v{}_{}", player + 1, input)
}

/// Correlator expansion of a binary game. Each non-vanishing coefficient
/// γ of a correlator ⟨∏_{i∈S} A_{x_i}⟩ yields one constraint on the
/// variables `v{i}_{x_i}`, with parity sgn γ.
pub fn binary_game_to_blcs(game: &NonlocalGame) -> Result<Blcs, GameError> {
    let sc = &game.scenario;
    let n = sc.players();
    for p in 0..n {
        for x in 0..sc.num_inputs(p) {
            let alpha = &sc.alphabets[p][x];
            if alpha.len() != 2 || sc.slots[p][x].len() != 1 {
                return Err(GameError::NonBinary { player: p, input: x, size: alpha.len() });
            }
        }
    }
    // Coefficients keyed by (S, x_S) in a deterministic order.
    let mut gamma: BTreeMap<(Vec<usize>, Vec<usize>), Rational> = BTreeMap::new();
    let scale = Rational::new(BigInt::one(), BigInt::one() << n);
    for xi in 0..sc.num_input_tuples() {
        let pi = &game.dist[xi];
        if pi.is_zero() {
            continue;
        }
        let x = sc.input_tuple(xi);
        for mask in 1u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let mut c = Rational::zero();
            for ai in 0..sc.num_outcomes(&x) {
                let a = sc.outcome_tuple(&x, ai);
                if !game.wins(xi, &a) {
                    continue;
                }
                let sign: i8 = set.iter().map(|&i| sc.alphabets[i][x[i]][a[i]][0]).product();
                c += Rational::from_integer(BigInt::from(sign));
            }
            if c.is_zero() {
                continue;
            }
            let key = (set.clone(), set.iter().map(|&i| x[i]).collect());
            *gamma.entry(key).or_insert_with(Rational::zero) += c * &scale * pi;
        }
    }
    let variables: Vec<String> = (0..n)
        .flat_map(|p| (0..sc.num_inputs(p)).map(move |x| binary_var_name(p, x)))
        .collect();
    let mut constraints: Vec<((Vec<usize>, Vec<usize>), Rational)> =
        gamma.into_iter().filter(|(_, g)| !g.is_zero()).collect();
    // Order constraints by input tuple so the listing follows the game.
    constraints.sort_by_key(|a| (a.0 .1.clone(), a.0 .0.clone()));
    let cs = constraints
        .into_iter()
        .map(|((set, xs), g)| {
            let vars = set.iter().zip(&xs).map(|(&p, &x)| binary_var_name(p, x)).collect();
            (vars, if g.is_positive() { 1 } else { -1 })
        })
        .collect();
    Blcs::new(variables, cs).map_err(|e| GameError::Malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blcs::{chsh_system, magic_square};

    /// Independent oracle: recursive maximization over every player's full
    /// deterministic strategy, no best responses.
    fn brute_value(game: &NonlocalGame) -> Rational {
        let sc = &game.scenario;
        let digits: Vec<(usize, usize)> = (0..sc.players())
            .flat_map(|p| (0..sc.num_inputs(p)).map(move |x| (p, x)))
            .collect();
        fn rec(
            g: &NonlocalGame,
            digits: &[(usize, usize)],
            k: usize,
            choice: &mut Vec<Vec<usize>>,
        ) -> Rational {
            if k == digits.len() {
                return g.strategy_value(&DeterministicStrategy { choice: choice.clone() });
            }
            let (p, x) = digits[k];
            (0..g.scenario.alphabets[p][x].len())
                .map(|o| {
                    choice[p][x] = o;
                    rec(g, digits, k + 1, choice)
                })
                .max()
                .expect("non-empty alphabet")
        }
        let mut choice = (0..sc.players()).map(|p| vec![0; sc.num_inputs(p)]).collect();
        rec(game, &digits, 0, &mut choice)
    }

    #[test]
    fn chsh_values() {
        let g = blcs_to_game(&chsh_system());
        assert_eq!(classical_value(&g).unwrap().value, rat(3, 4));
        assert_eq!(brute_value(&g), rat(3, 4));
        assert_eq!(classical_value(&chsh_xor_game()).unwrap().value, rat(3, 4));
    }

    #[test]
    fn magic_square_blcs_game() {
        let g = blcs_to_game(&magic_square());
        // One violated constraint costs exactly one of the 54 pairs.
        assert_eq!(classical_value(&g).unwrap().value, rat(53, 54));
        assert_eq!(classical_value_parity(&g, 1000).unwrap().value, rat(53, 54));
    }

    #[test]
    fn single_constraint_game_is_won() {
        let s = Blcs::new(vec!["v1", "v2"], vec![(vec!["v1".into(), "v2".into()], 1)]).unwrap();
        assert_eq!(classical_value(&blcs_to_game(&s)).unwrap().value, rat(1, 1));
    }

    #[test]
    fn ghz_cube_routes_agree() {
        let g = ghz_cube_game();
        let e = classical_value_enumerate(&g, u128::MAX).unwrap();
        let p = classical_value_parity(&g, 1000).unwrap();
        assert_eq!(e.value, rat(7, 8));
        assert_eq!(p.value, rat(7, 8));
        assert_eq!(g.strategy_value(&p.witness), rat(7, 8));
    }

    #[test]
    fn lifted_grid_value() {
        let g = grid_game(3, &[1, -1, 1], "lifted_ghz");
        let v = classical_value(&g).unwrap();
        assert_eq!(v.method, ClassicalMethod::ParityMinViolation);
        assert_eq!(v.value, rat(26, 27));
        assert_eq!(g.strategy_value(&v.witness), rat(26, 27));
    }

    #[test]
    fn witness_is_lexicographically_least() {
        let g = blcs_to_game(&chsh_system());
        let v = classical_value(&g).unwrap();
        let mut best = None;
        for a0 in 0..2 {
            for a1 in 0..2 {
                for b0 in 0..2 {
                    for b1 in 0..2 {
                        let s = DeterministicStrategy { choice: vec![vec![a0, a1], vec![b0, b1]] };
                        if g.strategy_value(&s) == v.value && best.is_none() {
                            best = Some(s);
                        }
                    }
                }
            }
        }
        assert_eq!(Some(v.witness), best);
    }

    #[test]
    fn mermin_to_blcs() {
        let s = binary_game_to_blcs(&mermin_ghz_game()).unwrap();
        assert_eq!(s.num_constraints(), 4);
        assert_eq!(s.system_parity(), -1);
        assert!(s.degrees().iter().all(|&d| d == 2));
        assert!(s.constraints().iter().all(|c| c.vars.len() == 3));
        let plus: Vec<_> = s.constraints().iter().filter(|c| c.parity == 1).collect();
        assert_eq!(plus.len(), 1);
        assert_eq!(plus[0].vars, vec!["v1_0", "v2_0", "v3_0"]);
    }

    #[test]
    fn chsh_xor_to_blcs_is_a_four_cycle() {
        let s = binary_game_to_blcs(&chsh_xor_game()).unwrap();
        assert_eq!(s.num_constraints(), 4);
        assert!(s.is_arrangement());
        assert_eq!(s.system_parity(), -1);
    }

    #[test]
    fn constant_rule_has_no_constraints() {
        let g = binary_game_from_fn("const", 2, 2, |_| (rat(1, 4), None));
        assert_eq!(binary_game_to_blcs(&g).unwrap().num_constraints(), 0);
        assert!(matches!(
            binary_game_to_blcs(&blcs_to_game(&chsh_system())),
            Err(GameError::NonBinary { .. })
        ));
    }

    #[test]
    fn parity_strings_order() {
        assert_eq!(parity_strings(2, 1), vec![vec![1, 1], vec![-1, -1]]);
        assert_eq!(parity_strings(2, -1), vec![vec![1, -1], vec![-1, 1]]);
        assert_eq!(parity_strings(4, 1).len(), 8);
    }
}
