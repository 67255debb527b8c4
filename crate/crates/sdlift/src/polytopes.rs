//! Linear programs over no-signaling, local and partially deterministic
//! polytopes.
//!
//! Every program is built on "blocks": one nonnegative variable per
//! behavior entry `(x, a)`, with some entries pinned to zero by omission.
//! A block lies in the no-signaling cone when each player's marginal is
//! independent of that player's own input; equal row totals follow.

use crate::behaviors::{guessing_certificate, Behavior, BehaviorError, PdDecomposition};
use crate::games::{binary_alphabet, outcome_string, DeterministicStrategy, Scenario};
use crate::lp::{self, LpError, LpProblem, LpResult, Relation, Sense};
use crate::scalar::{rat, OrderedField, Rational, Surd};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

/// Local deterministic strategies enumerated at most.
pub const VERTEX_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolytopeError {
    #[error("{what}: size {size} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, size: u128, cap: u128 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("unknown functional {0:?}")]
    UnknownFunctional(String),
    #[error("not certified: {0}")]
    Uncertified(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

/// Two players, `m` inputs each, outcomes ±1. Matches the scenario of the
/// binary games built in `games` for the same input count.
pub fn binary_scenario(m: usize) -> Scenario {
    Scenario {
        inputs: vec![(0..m).map(|x| x.to_string()).collect(); 2],
        slots: (0..2).map(|p| (0..m).map(|x| vec![format!("v{}_{}", p + 1, x)]).collect()).collect(),
        alphabets: vec![vec![binary_alphabet(); m]; 2],
    }
}

fn entry_label(sc: &Scenario, xi: usize, ai: usize) -> String {
    let x = sc.input_tuple(xi);
    let a = sc.outcome_tuple(&x, ai);
    let xs: Vec<&str> = x.iter().enumerate().map(|(p, &xp)| sc.inputs[p][xp].as_str()).collect();
    let as_: Vec<String> = a.iter().enumerate().map(|(p, &ap)| outcome_string(&sc.alphabet(p, x[p])[ap])).collect();
    format!("{}|{}", as_.join(","), xs.join(","))
}

/// Variable per behavior entry; `None` where pinned to zero.
type Block = Vec<Vec<Option<usize>>>;

fn new_block<F: OrderedField>(
    lp: &mut LpProblem<F>,
    sc: &Scenario,
    prefix: &str,
    keep: impl Fn(usize, usize) -> bool,
) -> Block {
    (0..sc.num_input_tuples())
        .map(|xi| {
            let k = sc.num_outcomes(&sc.input_tuple(xi));
            (0..k)
                .map(|ai| keep(xi, ai).then(|| lp.add_var(format!("{prefix}({})", entry_label(sc, xi, ai)))))
                .collect()
        })
        .collect()
}

/// Rows putting `block` in the no-signaling cone: for each player, each
/// pair of input tuples differing only in that player's (consecutive)
/// input, and each outcome of the others, the two marginals agree.
fn add_ns_cone<F: OrderedField>(lp: &mut LpProblem<F>, sc: &Scenario, block: &Block) -> Vec<usize> {
    let one = F::one();
    let mut ids = Vec::new();
    for p in 0..sc.players() {
        for xi in 0..sc.num_input_tuples() {
            let x = sc.input_tuple(xi);
            if x[p] + 1 >= sc.num_inputs(p) {
                continue;
            }
            let mut x2 = x.clone();
            x2[p] += 1;
            let xi2 = sc.input_index(&x2);
            let mut rows: BTreeMap<Vec<usize>, Vec<(usize, F)>> = BTreeMap::new();
            for (xx, xxi, sign) in [(&x, xi, one.clone()), (&x2, xi2, one.neg())] {
                for ai in 0..sc.num_outcomes(xx) {
                    let mut a = sc.outcome_tuple(xx, ai);
                    a.remove(p);
                    let row = rows.entry(a).or_default();
                    if let Some(v) = block[xxi][ai] {
                        row.push((v, sign.clone()));
                    }
                }
            }
            for (_, row) in rows {
                if !row.is_empty() {
                    ids.push(lp.add_constraint(row, Relation::Eq, F::zero()));
                }
            }
        }
    }
    ids
}

/// Entries a block deterministic on outcome `e` at `target` can occupy: by
/// no-signaling each player's output at its target input is fixed to `e`
/// regardless of the other inputs.
fn deterministic_support(sc: &Scenario, target: &[usize], e: &[usize], xi: usize, ai: usize) -> bool {
    let x = sc.input_tuple(xi);
    let a = sc.outcome_tuple(&x, ai);
    (0..sc.players()).all(|p| x[p] != target[p] || a[p] == e[p])
}

fn block_values<F: OrderedField>(block: &Block, x: &[F]) -> Vec<Vec<F>> {
    block.iter().map(|r| r.iter().map(|v| v.map_or_else(F::zero, |j| x[j].clone())).collect()).collect()
}

fn scale_rows(rows: Vec<Vec<Surd>>, inv: &Surd) -> Vec<Vec<Surd>> {
    rows.into_iter().map(|r| r.into_iter().map(|v| &v * inv).collect()).collect()
}

fn surd_inverse(s: &Surd) -> Surd {
    OrderedField::div(&Surd::from_ratio(1, 1), s)
}

fn check_players(b: &Behavior, target: &[usize]) -> Result<(), PolytopeError> {
    let sc = b.scenario();
    if target.len() != sc.players() || target.iter().enumerate().any(|(p, &x)| x >= sc.num_inputs(p)) {
        return Err(PolytopeError::ShapeMismatch("target input tuple".into()));
    }
    Ok(())
}

/// All local deterministic strategies, players in order, inputs in order,
/// lexicographic over outcome choices.
pub fn deterministic_strategies(sc: &Scenario, cap: usize) -> Result<Vec<DeterministicStrategy>, PolytopeError> {
    let radices: Vec<(usize, usize, usize)> = (0..sc.players())
        .flat_map(|p| (0..sc.num_inputs(p)).map(move |x| (p, x)))
        .map(|(p, x)| (p, x, sc.alphabet(p, x).len()))
        .collect();
    let count = radices.iter().fold(1u128, |acc, (_, _, r)| acc.saturating_mul(*r as u128));
    if count > cap as u128 {
        return Err(PolytopeError::CapExceeded { what: "deterministic strategies", size: count, cap: cap as u128 });
    }
    let mut out = Vec::with_capacity(count as usize);
    for mut idx in 0..count as usize {
        let mut choice: Vec<Vec<usize>> = (0..sc.players()).map(|p| vec![0; sc.num_inputs(p)]).collect();
        for &(p, x, r) in radices.iter().rev() {
            choice[p][x] = idx % r;
            idx /= r;
        }
        out.push(DeterministicStrategy { choice });
    }
    Ok(out)
}

/// Outcome index hit by a deterministic strategy at each input tuple.
fn vertex_hits(sc: &Scenario, s: &DeterministicStrategy) -> Vec<usize> {
    (0..sc.num_input_tuples())
        .map(|xi| {
            let x = sc.input_tuple(xi);
            let a: Vec<usize> = x.iter().enumerate().map(|(p, &xp)| s.choice[p][xp]).collect();
            sc.outcome_index(&x, &a)
        })
        .collect()
}

pub fn deterministic_behavior(sc: &Scenario, s: &DeterministicStrategy) -> Behavior {
    let hits = vertex_hits(sc, s);
    let table = hits
        .iter()
        .enumerate()
        .map(|(xi, &h)| {
            let k = sc.num_outcomes(&sc.input_tuple(xi));
            (0..k).map(|ai| Surd::from_ratio((ai == h) as i64, 1)).collect()
        })
        .collect();
    Behavior::new(sc.clone(), table).expect("vertex table matches its scenario")
}

// ---------------------------------------------------------------------------
// Bell functionals.

/// Linear functional `Σ coeffs[x][a] · p(a|x)`, shaped like a behavior table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellFunctional {
    pub name: String,
    pub scenario: Scenario,
    pub coeffs: Vec<Vec<Rational>>,
}

impl BellFunctional {
    pub fn from_coefficients(name: &str, scenario: Scenario, coeffs: Vec<Vec<Rational>>) -> Result<Self, PolytopeError> {
        let shape_ok = coeffs.len() == scenario.num_input_tuples()
            && coeffs.iter().enumerate().all(|(xi, r)| r.len() == scenario.num_outcomes(&scenario.input_tuple(xi)));
        if !shape_ok {
            return Err(PolytopeError::ShapeMismatch(format!("coefficients of {name}")));
        }
        Ok(BellFunctional { name: name.into(), scenario, coeffs })
    }

    pub fn zero(name: &str, scenario: Scenario) -> Self {
        let coeffs = (0..scenario.num_input_tuples())
            .map(|xi| vec![Rational::zero(); scenario.num_outcomes(&scenario.input_tuple(xi))])
            .collect();
        BellFunctional { name: name.into(), scenario, coeffs }
    }

    pub fn evaluate(&self, b: &Behavior) -> Result<Surd, PolytopeError> {
        if *b.scenario() != self.scenario {
            return Err(PolytopeError::ShapeMismatch("functional and behavior scenarios differ".into()));
        }
        let mut acc = Surd::default();
        for (row, crow) in b.rows().iter().zip(&self.coeffs) {
            for (p, c) in row.iter().zip(crow) {
                if !c.is_zero() {
                    acc = &acc + &(p * &Surd::rational(c.clone()));
                }
            }
        }
        Ok(acc)
    }

    fn add_to(&mut self, x: usize, y: usize, a: usize, b: usize, c: &Rational) {
        let sc = &self.scenario;
        let xi = sc.input_index(&[x, y]);
        let ai = sc.outcome_index(&[x, y], &[a, b]);
        self.coeffs[xi][ai] += c;
    }
}

/// CHSH in winning-probability form on inputs 0 and 1 of a binary
/// two-player scenario with `m ≥ 2` inputs: win iff `a ⊕ b = x ∧ y`, with
/// outcome +1 read as bit 0.
pub fn chsh_functional(m: usize) -> BellFunctional {
    assert!(m >= 2, "CHSH needs two inputs per player");
    let mut f = BellFunctional::zero("chsh", binary_scenario(m));
    let q = rat(1, 4);
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    if (a ^ b) == (x & y) {
                        f.add_to(x, y, a, b, &q);
                    }
                }
            }
        }
    }
    f
}

/// I3322 in Collins-Gisin form over probabilities of outcome +1:
/// `−pA(0) − 2pB(0) − pB(1) + Σ J[x][y] p(++|x,y)` with
/// `J = [[1,1,1],[1,1,−1],[1,−1,0]]`. Alice's marginals are read at Bob's
/// input 0 and Bob's at Alice's input 0.
pub fn i3322_functional() -> BellFunctional {
    let mut f = BellFunctional::zero("i3322", binary_scenario(3));
    let alice = [-1i64, 0, 0];
    let bob = [-2i64, -1, 0];
    let joint = [[1i64, 1, 1], [1, 1, -1], [1, -1, 0]];
    for x in 0..3 {
        for b in 0..2 {
            f.add_to(x, 0, 0, b, &rat(alice[x], 1));
        }
    }
    for y in 0..3 {
        for a in 0..2 {
            f.add_to(0, y, a, 0, &rat(bob[y], 1));
        }
    }
    for x in 0..3 {
        for y in 0..3 {
            f.add_to(x, y, 0, 0, &rat(joint[x][y], 1));
        }
    }
    f
}

/// Named functional on the three-input binary scenario.
pub fn bell_functional(name: &str) -> Result<BellFunctional, PolytopeError> {
    match name {
        "chsh" => Ok(chsh_functional(3)),
        "i3322" => Ok(i3322_functional()),
        other => Err(PolytopeError::UnknownFunctional(other.into())),
    }
}

/// Maximum over local deterministic vertices, with the first maximizer.
pub fn classical_bound_with_witness(f: &BellFunctional) -> Result<(Rational, DeterministicStrategy), PolytopeError> {
    let sc = &f.scenario;
    let mut best: Option<(Rational, DeterministicStrategy)> = None;
    for s in deterministic_strategies(sc, VERTEX_CAP)? {
        let v: Rational = vertex_hits(sc, &s).iter().enumerate().map(|(xi, &h)| f.coeffs[xi][h].clone()).sum();
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, s));
        }
    }
    best.ok_or_else(|| PolytopeError::ShapeMismatch("scenario has no strategies".into()))
}

pub fn classical_bound(f: &BellFunctional) -> Result<Rational, PolytopeError> {
    classical_bound_with_witness(f).map(|(v, _)| v)
}

// ---------------------------------------------------------------------------
// Partially deterministic membership.

/// `F(p) = Σ coeffs·p` with `F(b) > 0` and `yᵀ`-certified `F ≤ 0` on every
/// partially deterministic point (supported inside `b`'s support when
/// `support_restricted`).
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatingFunctional {
    pub coeffs: Vec<Vec<Surd>>,
    pub value_at_behavior: Surd,
    pub support_restricted: bool,
}

impl SeparatingFunctional {
    pub fn evaluate(&self, b: &Behavior) -> Surd {
        let mut acc = Surd::default();
        for (row, crow) in b.rows().iter().zip(&self.coeffs) {
            for (p, c) in row.iter().zip(crow) {
                acc = &acc + &(p * c);
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PdMembership {
    Member(PdDecomposition),
    NonMember(SeparatingFunctional),
}

/// Decomposition program for `b` at `target`: one block per outcome tuple
/// `e` at the target, deterministic there on `e`, blocks summing to `b`.
/// Returns the program, the blocks with their `e`, and the equality rows
/// `Σ_e block_e = b` indexed like the behavior table.
struct PdProgram {
    lp: LpProblem<Surd>,
    blocks: Vec<(Vec<usize>, Block)>,
    sum_rows: Vec<Vec<Option<usize>>>,
}

fn pd_program(b: &Behavior, target: &[usize], full_support: bool, guess_objective: bool) -> PdProgram {
    let sc = b.scenario();
    let ti = sc.input_index(target);
    let present = |xi: usize, ai: usize| full_support || !b.row(xi)[ai].is_zero();
    let mut lp = LpProblem::new(if guess_objective { Sense::Maximize } else { Sense::Feasibility });
    let mut blocks = Vec::new();
    for e in 0..sc.num_outcomes(target) {
        if !present(ti, e) {
            continue;
        }
        let et = sc.outcome_tuple(target, e);
        let pinned = !guess_objective;
        let block = new_block(&mut lp, sc, &format!("r[{}]", entry_label(sc, ti, e)), |xi, ai| {
            present(xi, ai) && (!pinned || deterministic_support(sc, target, &et, xi, ai))
        });
        if guess_objective {
            if let Some(v) = block[ti][e] {
                lp.objective.push((v, Surd::from_ratio(1, 1)));
            }
        }
        blocks.push((et, block));
    }
    let mut sum_rows = Vec::new();
    for xi in 0..sc.num_input_tuples() {
        let mut row_ids = Vec::new();
        for ai in 0..b.row(xi).len() {
            let coeffs: Vec<(usize, Surd)> =
                blocks.iter().filter_map(|(_, bl)| bl[xi][ai]).map(|v| (v, Surd::from_ratio(1, 1))).collect();
            let rhs = b.row(xi)[ai].clone();
            if coeffs.is_empty() && rhs.is_zero() {
                row_ids.push(None);
                continue;
            }
            row_ids.push(Some(lp.add_constraint(coeffs, Relation::Eq, rhs)));
        }
        sum_rows.push(row_ids);
    }
    for (_, block) in &blocks {
        add_ns_cone(&mut lp, sc, block);
    }
    PdProgram { lp, blocks, sum_rows }
}

fn blocks_to_decomposition(
    b: &Behavior,
    target: &[usize],
    blocks: &[(Vec<usize>, Block)],
    x: &[Surd],
) -> Result<PdDecomposition, PolytopeError> {
    let sc = b.scenario();
    let ti = sc.input_index(target);
    let mut weights = Vec::new();
    let mut parts = Vec::new();
    let mut outcomes = Vec::new();
    for (e, block) in blocks {
        let vals = block_values(block, x);
        let total: Surd = vals[ti].iter().cloned().sum();
        if total.is_zero() {
            continue;
        }
        parts.push(Behavior::new(sc.clone(), scale_rows(vals, &surd_inverse(&total)))?);
        weights.push(total);
        outcomes.push(e.clone());
    }
    Ok(PdDecomposition { target: target.to_vec(), weights, parts, outcomes })
}

/// Whether `b` lies in the partially deterministic polytope at `target`.
/// Uses every behavior entry when the program fits the LP cap, so that the
/// separating functional is valid on the whole polytope; otherwise only
/// entries in `b`'s support.
pub fn pd_membership(b: &Behavior, target: &[usize]) -> Result<PdMembership, PolytopeError> {
    check_players(b, target)?;
    let sc = b.scenario();
    let entries: usize = b.rows().iter().map(Vec::len).sum();
    let full = entries.saturating_mul(sc.num_outcomes(target)) <= lp::DEFAULT_VARIABLE_CAP;
    let prog = pd_program(b, target, full, false);
    match lp::lp_solve(&prog.lp)? {
        LpResult::Optimal { x, .. } => {
            Ok(PdMembership::Member(blocks_to_decomposition(b, target, &prog.blocks, &x)?))
        }
        LpResult::Infeasible { farkas } => {
            // Feasible points satisfy Σ y_row·p ≥ 0 on the sum rows; negate.
            let coeffs: Vec<Vec<Surd>> = prog
                .sum_rows
                .iter()
                .map(|r| r.iter().map(|id| id.map_or_else(Surd::default, |i| -&farkas[i])).collect())
                .collect();
            let sep = SeparatingFunctional { coeffs, value_at_behavior: Surd::default(), support_restricted: !full };
            let value = sep.evaluate(b);
            if !value.is_positive() {
                return Err(PolytopeError::Uncertified("separating functional is not positive at b".into()));
            }
            Ok(PdMembership::NonMember(SeparatingFunctional { value_at_behavior: value, ..sep }))
        }
        LpResult::Unbounded { .. } => Err(PolytopeError::Uncertified("feasibility program is unbounded".into())),
    }
}

// ---------------------------------------------------------------------------
// No-signaling adversary.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuessingMethod {
    /// Solved by the simplex.
    Simplex,
    /// A supplied decomposition turned into a feasible point of value one,
    /// matched by the bound `Σ_e p_e(e|x*) ≤ 1`.
    WitnessWithTrivialDual,
}

#[derive(Debug, Clone)]
pub struct GuessingBound {
    pub value: Surd,
    pub method: GuessingMethod,
    pub problem: LpProblem<Surd>,
    /// Verified by substitution against `problem`.
    pub result: LpResult<Surd>,
}

impl GuessingBound {
    pub fn to_json(&self) -> Value {
        json!({
            "value": self.value.to_string(),
            "method": format!("{:?}", self.method),
            "variables": self.problem.num_vars(),
            "constraints": self.problem.constraints.len(),
            "certificate": self.result.to_json(&self.problem),
        })
    }
}

/// Maximal probability that a no-signaling extension `p(a, e|x)` with
/// honest marginal `b` has `e = a` at `x*`. Eve's alphabet is the support
/// of `b` at `x*`, which loses nothing: a block guessing an impossible
/// outcome can be merged into any other without lowering the objective.
///
/// Past the LP cap, a decomposition `hint` with certificate one is accepted
/// as a feasible point; any other case over the cap is an error.
pub fn ns_guessing_lp(
    b: &Behavior,
    x_star: &[usize],
    hint: Option<&PdDecomposition>,
) -> Result<GuessingBound, PolytopeError> {
    check_players(b, x_star)?;
    let sc = b.scenario();
    let prog = pd_program(b, x_star, false, true);
    let n = prog.lp.num_vars();
    if n <= lp::DEFAULT_VARIABLE_CAP {
        let result = lp::lp_solve(&prog.lp)?;
        let LpResult::Optimal { value, .. } = &result else {
            return Err(PolytopeError::Uncertified(format!("guessing program is {}", result.status())));
        };
        return Ok(GuessingBound { value: value.clone(), method: GuessingMethod::Simplex, problem: prog.lp, result });
    }
    let Some(d) = hint else {
        return Err(PolytopeError::CapExceeded { what: "guessing program variables", size: n as u128, cap: lp::DEFAULT_VARIABLE_CAP as u128 });
    };
    if d.target != x_star || guessing_certificate(b, x_star, d)? != Surd::from_ratio(1, 1) {
        return Err(PolytopeError::Uncertified("hint is not a deterministic decomposition at x*".into()));
    }
    let ti = sc.input_index(x_star);
    let mut x = vec![Surd::default(); n];
    for ((w, part), o) in d.weights.iter().zip(&d.parts).zip(&d.outcomes) {
        let e = sc.outcome_tuple(x_star, sc.outcome_index(x_star, o));
        let (_, block) = prog
            .blocks
            .iter()
            .find(|(be, _)| *be == e)
            .ok_or_else(|| PolytopeError::Uncertified("hint outcome outside the support".into()))?;
        for (xi, row) in part.rows().iter().enumerate() {
            for (ai, v) in row.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let j = block[xi][ai]
                    .ok_or_else(|| PolytopeError::Uncertified("hint leaves the support".into()))?;
                x[j] = &x[j] + &(w * v);
            }
        }
    }
    let mut dual = vec![Surd::default(); prog.lp.constraints.len()];
    for id in prog.sum_rows[ti].iter().flatten() {
        dual[*id] = Surd::from_ratio(1, 1);
    }
    let result = LpResult::Optimal { value: Surd::from_ratio(1, 1), x, dual };
    lp::verify(&prog.lp, &result, &Surd::default())?;
    Ok(GuessingBound {
        value: Surd::from_ratio(1, 1),
        method: GuessingMethod::WitnessWithTrivialDual,
        problem: prog.lp,
        result,
    })
}

// ---------------------------------------------------------------------------
// Local fraction.

#[derive(Debug, Clone)]
pub struct LocalFractionResult {
    pub value: Surd,
    /// Vertices with positive weight.
    pub local_part: Vec<(DeterministicStrategy, Surd)>,
    pub problem: LpProblem<Surd>,
    pub result: LpResult<Surd>,
}

/// `max Σ c_v` with `c ≥ 0` such that `b − Σ c_v·vertex_v` lies in the
/// no-signaling cone.
pub fn local_fraction_lp(b: &Behavior) -> Result<LocalFractionResult, PolytopeError> {
    let sc = b.scenario();
    let strategies = deterministic_strategies(sc, VERTEX_CAP)?;
    let mut lp = LpProblem::new(Sense::Maximize);
    let mut cols = Vec::with_capacity(strategies.len());
    for (i, s) in strategies.iter().enumerate() {
        let v = lp.add_var(format!("c{i}"));
        lp.objective.push((v, Surd::from_ratio(1, 1)));
        cols.push((v, vertex_hits(sc, s)));
    }
    let rest = new_block(&mut lp, sc, "r", |xi, ai| !b.row(xi)[ai].is_zero());
    for xi in 0..sc.num_input_tuples() {
        for ai in 0..b.row(xi).len() {
            let mut coeffs: Vec<(usize, Surd)> =
                cols.iter().filter(|(_, h)| h[xi] == ai).map(|(v, _)| (*v, Surd::from_ratio(1, 1))).collect();
            coeffs.extend(rest[xi][ai].map(|v| (v, Surd::from_ratio(1, 1))));
            lp.add_constraint(coeffs, Relation::Eq, b.row(xi)[ai].clone());
        }
    }
    add_ns_cone(&mut lp, sc, &rest);
    let result = lp::lp_solve(&lp)?;
    let LpResult::Optimal { value, x, .. } = &result else {
        return Err(PolytopeError::Uncertified(format!("local fraction program is {}", result.status())));
    };
    let local_part = strategies
        .into_iter()
        .zip(&cols)
        .filter(|(_, (v, _))| !x[*v].is_zero())
        .map(|(s, (v, _))| (s, x[*v].clone()))
        .collect();
    Ok(LocalFractionResult { value: value.clone(), local_part, problem: lp, result })
}

// ---------------------------------------------------------------------------
// Intersection of all partially deterministic polytopes.

/// `max f(p)` over normalized `p` in NS(m,2;m,2); with `pd`, `p` must also
/// decompose into blocks deterministic at each of the `m²` input pairs.
pub struct IntersectionProgram<F> {
    pub lp: LpProblem<F>,
    p: Block,
    norm_rows: Vec<usize>,
    /// `[target][xi][ai]`: row `Σ_e block_e − p = 0`.
    sum_rows: Vec<Vec<Vec<usize>>>,
    blocks: Vec<PdBlock>,
}

struct PdBlock {
    target: usize,
    outcome: Vec<usize>,
    vars: Block,
    ns_rows: Vec<usize>,
}

pub fn intersection_program<F: OrderedField>(f: &BellFunctional, pd: bool) -> IntersectionProgram<F> {
    let sc = &f.scenario;
    let mut lp = LpProblem::new(Sense::Maximize);
    let p = new_block(&mut lp, sc, "p", |_, _| true);
    let norm_rows = add_normalized_objective(&mut lp, f, &p);
    let mut prog = IntersectionProgram { lp, p, norm_rows, sum_rows: Vec::new(), blocks: Vec::new() };
    if !pd {
        add_ns_cone(&mut prog.lp, sc, &prog.p);
        return prog;
    }
    for ti in 0..sc.num_input_tuples() {
        let t = sc.input_tuple(ti);
        let first = prog.blocks.len();
        for e in 0..sc.num_outcomes(&t) {
            let prefix = format!("r[{}]", entry_label(sc, ti, e));
            let et = sc.outcome_tuple(&t, e);
            let vars = new_block(&mut prog.lp, sc, &prefix, |xi, ai| deterministic_support(sc, &t, &et, xi, ai));
            prog.blocks.push(PdBlock { target: ti, outcome: et, vars, ns_rows: Vec::new() });
        }
        let rows = add_sum_rows(&mut prog.lp, &prog.p, prog.blocks[first..].iter().map(|b| &b.vars));
        prog.sum_rows.push(rows);
        for k in first..prog.blocks.len() {
            prog.blocks[k].ns_rows = add_ns_cone(&mut prog.lp, sc, &prog.blocks[k].vars);
        }
    }
    prog
}

fn add_normalized_objective<F: OrderedField>(lp: &mut LpProblem<F>, f: &BellFunctional, p: &Block) -> Vec<usize> {
    let mut rows = Vec::new();
    for (xi, row) in p.iter().enumerate() {
        let coeffs = row.iter().map(|v| (v.expect("full block"), F::one())).collect();
        rows.push(lp.add_constraint(coeffs, Relation::Eq, F::one()));
        for (ai, v) in row.iter().enumerate() {
            let c = &f.coeffs[xi][ai];
            if !c.is_zero() {
                lp.objective.push((v.expect("full block"), F::from_rational(c)));
            }
        }
    }
    rows
}

/// Rows `Σ parts − p = 0`, one per entry of `p`, in table order.
fn add_sum_rows<'a, F: OrderedField>(
    lp: &mut LpProblem<F>,
    p: &Block,
    parts: impl Iterator<Item = &'a Block> + Clone,
) -> Vec<Vec<usize>> {
    p.iter()
        .enumerate()
        .map(|(xi, row)| {
            (0..row.len())
                .map(|ai| {
                    let mut coeffs: Vec<(usize, F)> =
                        parts.clone().filter_map(|bl| bl[xi][ai]).map(|v| (v, F::one())).collect();
                    coeffs.push((p[xi][ai].expect("full block"), F::one().neg()));
                    lp.add_constraint(coeffs, Relation::Eq, F::zero())
                })
                .collect()
        })
        .collect()
}

/// Generators of the partially deterministic polytope at target `ti` of
/// `binary_scenario(m)`, `m ≤ 3`: for each target outcome, every vertex of
/// the no-signaling polytope on the remaining inputs (deterministic points,
/// plus the eight PR boxes when two inputs remain on each side), extended
/// with the target outputs fixed. Only used to find candidate optima; the
/// certificate is checked against the block program, so an incomplete
/// list would be reported, not trusted.
fn pd_generators(sc: &Scenario, ti: usize) -> Result<Vec<(Vec<usize>, Vec<Vec<Rational>>)>, PolytopeError> {
    let m = sc.num_inputs(0);
    if *sc != binary_scenario(m) || !(2..=3).contains(&m) {
        return Err(PolytopeError::ShapeMismatch("generators are tabulated for binary scenarios with 2 or 3 inputs".into()));
    }
    let t = sc.input_tuple(ti);
    let rest = |skip: usize| -> Vec<usize> { (0..m).filter(|&x| x != skip).collect() };
    let (xr, yr) = (rest(t[0]), rest(t[1]));
    let r = m - 1;
    // Boxes on the remaining inputs: w[i][j][a][b].
    type Box = Vec<Vec<[[Rational; 2]; 2]>>;
    let zero = rat(0, 1);
    let blank = || -> Box { vec![vec![[[zero.clone(), zero.clone()], [zero.clone(), zero.clone()]]; r]; r] };
    let mut boxes: Vec<Box> = Vec::new();
    for alpha in 0..1usize << r {
        for beta in 0..1usize << r {
            let mut w = blank();
            for i in 0..r {
                for j in 0..r {
                    w[i][j][(alpha >> i) & 1][(beta >> j) & 1] = rat(1, 1);
                }
            }
            boxes.push(w);
        }
    }
    if r == 2 {
        for shift in 0..8usize {
            let mut w = blank();
            for i in 0..2 {
                for j in 0..2 {
                    for a in 0..2 {
                        let b = a ^ (i & j) ^ (i & (shift & 1)) ^ (j & (shift >> 1 & 1)) ^ (shift >> 2);
                        w[i][j][a][b] = rat(1, 2);
                    }
                }
            }
            boxes.push(w);
        }
    }
    let mut out = Vec::new();
    for e in 0..4 {
        let (sa, sb) = (e / 2, e % 2);
        for w in &boxes {
            let table = (0..sc.num_input_tuples())
                .map(|xi| {
                    let x = sc.input_tuple(xi);
                    let i = xr.iter().position(|&v| v == x[0]);
                    let j = yr.iter().position(|&v| v == x[1]);
                    (0..4)
                        .map(|ai| {
                            let (a, b) = (ai / 2, ai % 2);
                            let marg_a = |i: usize| &w[i][0][a][0] + &w[i][0][a][1];
                            let marg_b = |j: usize| &w[0][j][0][b] + &w[0][j][1][b];
                            match (i, j) {
                                (None, None) => rat((a == sa && b == sb) as i64, 1),
                                (None, Some(j)) => if a == sa { marg_b(j) } else { zero.clone() },
                                (Some(i), None) => if b == sb { marg_a(i) } else { zero.clone() },
                                (Some(i), Some(j)) => w[i][j][a][b].clone(),
                            }
                        })
                        .collect()
                })
                .collect();
            out.push((vec![sa, sb], table));
        }
    }
    Ok(out)
}

/// Collins-Gisin coordinates of a binary two-player table as coefficient
/// vectors: `pA(+|x)` at Bob's input 0, `pB(+|y)` at Alice's input 0,
/// `p(++|x,y)`, then the total of row `(0,0)`. They determine every element
/// of the no-signaling cone.
fn cg_coordinates(sc: &Scenario) -> Vec<Vec<Vec<Rational>>> {
    let m = sc.num_inputs(0);
    let mut out = Vec::new();
    let blank = || BellFunctional::zero("cg", sc.clone());
    for x in 0..m {
        let mut f = blank();
        f.add_to(x, 0, 0, 0, &rat(1, 1));
        f.add_to(x, 0, 0, 1, &rat(1, 1));
        out.push(f.coeffs);
    }
    for y in 0..m {
        let mut f = blank();
        f.add_to(0, y, 0, 0, &rat(1, 1));
        f.add_to(0, y, 1, 0, &rat(1, 1));
        out.push(f.coeffs);
    }
    for x in 0..m {
        for y in 0..m {
            let mut f = blank();
            f.add_to(x, y, 0, 0, &rat(1, 1));
            out.push(f.coeffs);
        }
    }
    let mut f = blank();
    for ai in 0..4 {
        f.coeffs[0][ai] = rat(1, 1);
    }
    out.push(f.coeffs);
    out
}

fn pair(u: &[Vec<Rational>], v: &[Vec<Rational>]) -> Rational {
    u.iter().zip(v).flat_map(|(a, b)| a.iter().zip(b)).map(|(a, b)| a * b).sum()
}

/// Optimum over the intersection, with a certificate for the block
/// program.
///
/// The optimum is located on a generator program: weights `λ^t` over the
/// generators of each partially deterministic polytope, with every
/// decomposition equal to the one at target `(0,0)` in Collins-Gisin
/// coordinates and unit total. Its dual `(η^t, ν)` yields functionals
/// `Y^t = Σ η^t_c φ_c` for `t ≠ (0,0)` and
/// `Y^(0,0) = ν·total − Σ Y^t − f`, all nonnegative on their generators;
/// these become the sum-row multipliers of the block program, `ν` its
/// multiplier on the normalization of row `(0,0)`, and a small program per
/// block supplies the no-signaling multipliers showing each `Y^t` is
/// nonnegative on the whole block cone.
pub fn intersection_optimum<F: OrderedField>(
    f: &BellFunctional,
    tol: &F,
) -> Result<(IntersectionProgram<F>, LpResult<F>), PolytopeError> {
    let sc = &f.scenario;
    let opts = lp::SolveOptions { tol: tol.clone(), ..Default::default() };
    let full = intersection_program::<F>(f, true);
    let cg = cg_coordinates(sc);
    let total = cg.last().expect("total coordinate").clone();
    let nt = sc.num_input_tuples();
    let mut gen = LpProblem::new(Sense::Maximize);
    let mut lambdas: Vec<Vec<(usize, Vec<usize>, Vec<Vec<Rational>>)>> = Vec::with_capacity(nt);
    for ti in 0..nt {
        let gens = pd_generators(sc, ti)?;
        lambdas.push(
            gens.into_iter()
                .enumerate()
                .map(|(g, (e, table))| (gen.add_var(format!("l[{ti}][{g}]")), e, table))
                .collect(),
        );
    }
    for (v, _, table) in &lambdas[0] {
        let c = pair(&f.coeffs, table);
        if !c.is_zero() {
            gen.objective.push((*v, F::from_rational(&c)));
        }
    }
    let mut eta_rows = Vec::new();
    for ti in 1..nt {
        let rows: Vec<usize> = cg
            .iter()
            .map(|phi| {
                let mut coeffs = Vec::new();
                for (sign, t) in [(F::one(), ti), (F::one().neg(), 0)] {
                    for (v, _, table) in &lambdas[t] {
                        let c = pair(phi, table);
                        if !c.is_zero() {
                            coeffs.push((*v, F::from_rational(&c).mul(&sign)));
                        }
                    }
                }
                gen.add_constraint(coeffs, Relation::Eq, F::zero())
            })
            .collect();
        eta_rows.push(rows);
    }
    let unit_coeffs = lambdas[0].iter().map(|(v, _, table)| (*v, F::from_rational(&pair(&total, table)))).collect();
    let nu_row = gen.add_constraint(unit_coeffs, Relation::Eq, F::one());
    let LpResult::Optimal { value, x: gx, dual: gy } = lp::lp_solve_with(&gen, &opts)? else {
        return Err(PolytopeError::Uncertified(format!("generator program for {} has no optimum", f.name)));
    };

    // Primal: blocks are the weighted generators; p is their sum at (0,0).
    let mut x = vec![F::zero(); full.lp.num_vars()];
    for (ti, gens) in lambdas.iter().enumerate() {
        for (v, e, table) in gens {
            if gx[*v].is_zero() {
                continue;
            }
            let block = full.blocks.iter().find(|b| b.target == ti && b.outcome == *e).expect("block per outcome");
            for (xi, row) in table.iter().enumerate() {
                for (ai, c) in row.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let w = gx[*v].mul(&F::from_rational(c));
                    let j = block.vars[xi][ai]
                        .ok_or_else(|| PolytopeError::Uncertified("generator leaves its block".into()))?;
                    x[j] = x[j].add(&w);
                    if ti == 0 {
                        let pj = full.p[xi][ai].expect("full block");
                        x[pj] = x[pj].add(&w);
                    }
                }
            }
        }
    }

    // Dual.
    let shape: Vec<usize> = full.p.iter().map(Vec::len).collect();
    let zeros = || -> Vec<Vec<F>> { shape.iter().map(|&k| vec![F::zero(); k]).collect() };
    let combine = |acc: &mut Vec<Vec<F>>, coeffs: &[Vec<Rational>], w: &F| {
        for (arow, crow) in acc.iter_mut().zip(coeffs) {
            for (a, c) in arow.iter_mut().zip(crow) {
                if !c.is_zero() {
                    *a = a.add(&F::from_rational(c).mul(w));
                }
            }
        }
    };
    let nu = gy[nu_row].clone();
    let mut functionals: Vec<Vec<Vec<F>>> = vec![zeros()];
    let mut y00 = zeros();
    combine(&mut y00, &total, &nu);
    combine(&mut y00, &f.coeffs, &F::one().neg());
    for rows in &eta_rows {
        let mut yt = zeros();
        for (phi, r) in cg.iter().zip(rows) {
            combine(&mut yt, phi, &gy[*r]);
        }
        for (a, b) in y00.iter_mut().flatten().zip(yt.iter().flatten()) {
            *a = a.sub(b);
        }
        functionals.push(yt);
    }
    functionals[0] = y00;
    let mut y = vec![F::zero(); full.lp.constraints.len()];
    y[full.norm_rows[0]] = nu;
    for (rows, yt) in full.sum_rows.iter().zip(&functionals) {
        for (r, v) in rows.iter().flatten().zip(yt.iter().flatten()) {
            y[*r] = v.clone();
        }
    }
    for block in &full.blocks {
        let w = block_cone_multipliers(&full.lp, block, &functionals[block.target], &opts)?;
        for (row, wi) in block.ns_rows.iter().zip(w) {
            y[*row] = wi.neg();
        }
    }
    Ok((full, LpResult::Optimal { value, x, dual: y }))
}

/// Multipliers `w` on the block's no-signaling rows with
/// `weights − wᵀA ≥ 0` on every block variable, found by minimizing the
/// weighted total over the block cone at unit mass.
fn block_cone_multipliers<F: OrderedField>(
    full: &LpProblem<F>,
    block: &PdBlock,
    weights: &[Vec<F>],
    opts: &lp::SolveOptions<F>,
) -> Result<Vec<F>, PolytopeError> {
    let mut local = LpProblem::new(Sense::Minimize);
    let mut index = BTreeMap::new();
    for (xi, row) in block.vars.iter().enumerate() {
        for (ai, v) in row.iter().enumerate() {
            if let Some(v) = v {
                let j = local.add_var(full.names[*v].clone());
                index.insert(*v, j);
                if !weights[xi][ai].is_zero() {
                    local.objective.push((j, weights[xi][ai].clone()));
                }
            }
        }
    }
    for r in &block.ns_rows {
        let c = &full.constraints[*r];
        local.add_constraint(c.coeffs.iter().map(|(v, a)| (index[v], a.clone())).collect(), c.relation, c.rhs.clone());
    }
    let mass = block.vars[block.target].iter().flatten().map(|v| (index[v], F::one())).collect();
    local.add_constraint(mass, Relation::Eq, F::one());
    let LpResult::Optimal { value, mut dual, .. } = lp::lp_solve_with(&local, opts)? else {
        return Err(PolytopeError::Uncertified("block program has no optimum".into()));
    };
    if value.add(&opts.tol).is_negative() {
        return Err(PolytopeError::Uncertified("sum-row functional is negative on a block cone".into()));
    }
    dual.truncate(block.ns_rows.len());
    Ok(dual)
}

fn ns_only_optimum<F: OrderedField>(f: &BellFunctional, tol: &F) -> Result<F, PolytopeError> {
    let prog = intersection_program::<F>(f, false);
    let opts = lp::SolveOptions { tol: tol.clone(), ..Default::default() };
    match lp::lp_solve_with(&prog.lp, &opts)? {
        LpResult::Optimal { value, .. } => Ok(value),
        other => Err(PolytopeError::Uncertified(format!("no-signaling program is {}", other.status()))),
    }
}

#[derive(Debug, Clone)]
pub struct Theorem3Entry<F> {
    pub functional: String,
    pub optimum: F,
    pub classical: Rational,
    pub matches_classical: bool,
    pub dual_verified: bool,
    pub variables: usize,
    pub constraints: usize,
    pub dual: Vec<F>,
}

#[derive(Debug, Clone)]
pub struct Theorem3Report<F> {
    pub entries: Vec<Theorem3Entry<F>>,
    /// CHSH over the no-signaling polytope alone.
    pub ns_only_chsh: F,
}

impl<F: OrderedField> Theorem3Report<F> {
    pub fn ok(&self) -> bool {
        self.entries.iter().all(|e| e.matches_classical && e.dual_verified)
    }

    pub fn summary(&self) -> String {
        self.entries
            .iter()
            .map(|e| {
                let mark = if e.matches_classical && e.dual_verified { "✓" } else { "✗" };
                match e.functional.as_str() {
                    "chsh" => format!("CHSH: {} = classical {mark}", e.optimum),
                    _ => format!("I3322: bound = classical {mark}"),
                }
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "entries": self.entries.iter().map(|e| json!({
                "functional": e.functional,
                "optimum": e.optimum.to_string(),
                "classical": e.classical.to_string(),
                "matches_classical": e.matches_classical,
                "dual_verified": e.dual_verified,
                "variables": e.variables,
                "constraints": e.constraints,
                "dual": e.dual.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(i, v)| json!([i, v.to_string()])).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "ns_only_chsh": self.ns_only_chsh.to_string(),
        })
    }
}

/// Maximizes CHSH and I3322 over the intersection of NS(3,2;3,2) with all
/// nine partially deterministic polytopes and compares with the classical
/// bounds from vertex enumeration. The two programs run in parallel.
/// `tol` is zero for exact fields.
pub fn theorem3_verify_with<F: OrderedField>(tol: &F) -> Result<Theorem3Report<F>, PolytopeError> {
    let functionals = [chsh_functional(3), i3322_functional()];
    let results: Vec<Result<Theorem3Entry<F>, PolytopeError>> = std::thread::scope(|s| {
        let handles: Vec<_> = functionals
            .iter()
            .map(|f| {
                s.spawn(move || {
                    let classical = classical_bound(f)?;
                    let (prog, result) = intersection_optimum::<F>(f, tol)?;
                    let dual_verified = lp::verify(&prog.lp, &result, tol).is_ok();
                    let LpResult::Optimal { value: optimum, dual, .. } = result else { unreachable!("optimal by construction") };
                    let diff = optimum.sub(&F::from_rational(&classical));
                    let matches_classical = diff.sub(tol).sign().is_le() && diff.add(tol).sign().is_ge();
                    Ok(Theorem3Entry {
                        functional: f.name.clone(),
                        optimum,
                        classical,
                        matches_classical,
                        dual_verified,
                        variables: prog.lp.num_vars(),
                        constraints: prog.lp.constraints.len(),
                        dual,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread")).collect()
    });
    let entries = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let ns_only_chsh = ns_only_optimum::<F>(&chsh_functional(3), tol)?;
    Ok(Theorem3Report { entries, ns_only_chsh })
}

pub fn theorem3_verify() -> Result<Theorem3Report<Rational>, PolytopeError> {
    theorem3_verify_with::<Rational>(&Rational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviors::verify_decomposition;
    use crate::scalar::rat_int;

    fn pr_box(m: usize) -> Behavior {
        let sc = binary_scenario(m);
        let table = (0..sc.num_input_tuples())
            .map(|xi| {
                let x = sc.input_tuple(xi);
                (0..4)
                    .map(|ai| {
                        let a = sc.outcome_tuple(&x, ai);
                        let win = (a[0] ^ a[1]) == (x[0] & x[1] & 1);
                        Surd::from_ratio(win as i64, 2)
                    })
                    .collect()
            })
            .collect();
        Behavior::new(sc, table).unwrap()
    }

    #[test]
    fn chsh_bound_is_three_quarters() {
        assert_eq!(classical_bound(&chsh_functional(2)).unwrap(), rat(3, 4));
        assert_eq!(classical_bound(&bell_functional("chsh").unwrap()).unwrap(), rat(3, 4));
    }

    #[test]
    fn i3322_bound_matches_direct_enumeration() {
        // Independent oracle: the Collins-Gisin expression on bits.
        let mut best = i64::MIN;
        for s in 0..64u32 {
            let a = |x: usize| ((s >> x) & 1 == 0) as i64;
            let b = |y: usize| ((s >> (3 + y)) & 1 == 0) as i64;
            let j = [[1, 1, 1], [1, 1, -1], [1, -1, 0]];
            let mut v = -a(0) - 2 * b(0) - b(1);
            for x in 0..3 {
                for y in 0..3 {
                    v += j[x][y] * a(x) * b(y);
                }
            }
            best = best.max(v);
        }
        assert_eq!(best, 0);
        assert_eq!(classical_bound(&i3322_functional()).unwrap(), rat_int(best));
    }

    #[test]
    fn zero_functional_bound() {
        assert_eq!(classical_bound(&BellFunctional::zero("z", binary_scenario(2))).unwrap(), rat_int(0));
        assert!(bell_functional("nosuch").is_err());
    }

    #[test]
    fn local_vertex_is_member_everywhere() {
        let sc = binary_scenario(2);
        let strategies = deterministic_strategies(&sc, VERTEX_CAP).unwrap();
        let b = Behavior::mixture(
            &[Surd::from_ratio(1, 3), Surd::from_ratio(2, 3)],
            &[deterministic_behavior(&sc, &strategies[3]), deterministic_behavior(&sc, &strategies[10])],
        )
        .unwrap();
        for k in 0..2 {
            for l in 0..2 {
                let PdMembership::Member(d) = pd_membership(&b, &[k, l]).unwrap() else { panic!("({k},{l})") };
                assert!(verify_decomposition(&b, &d).unwrap().ok());
            }
        }
    }

    #[test]
    fn pr_box_is_not_partially_deterministic() {
        let b = pr_box(2);
        let PdMembership::NonMember(sep) = pd_membership(&b, &[1, 1]).unwrap() else { panic!() };
        assert!(sep.value_at_behavior.is_positive());
        assert!(!sep.support_restricted);
        // At this size PD_{1,1} is the local polytope: check every vertex.
        let sc = binary_scenario(2);
        for s in deterministic_strategies(&sc, VERTEX_CAP).unwrap() {
            assert!(!sep.evaluate(&deterministic_behavior(&sc, &s)).is_positive());
        }
    }

    #[test]
    fn local_fractions() {
        assert_eq!(local_fraction_lp(&pr_box(2)).unwrap().value, Surd::default());
        let t = crate::quantum::tsirelson_behavior().unwrap();
        let v = local_fraction_lp(&t).unwrap().value;
        assert!(v.is_positive() && v < Surd::from_ratio(1, 1));
        let sc = binary_scenario(2);
        let s = &deterministic_strategies(&sc, VERTEX_CAP).unwrap()[5];
        assert_eq!(local_fraction_lp(&deterministic_behavior(&sc, s)).unwrap().value, Surd::from_ratio(1, 1));
    }

    #[test]
    fn guessing_bounds() {
        let sc = binary_scenario(2);
        let s = &deterministic_strategies(&sc, VERTEX_CAP).unwrap()[7];
        let g = ns_guessing_lp(&deterministic_behavior(&sc, s), &[0, 1], None).unwrap();
        assert_eq!(g.value, Surd::from_ratio(1, 1));
        let t = crate::quantum::tsirelson_behavior().unwrap();
        let g = ns_guessing_lp(&t, &[0, 0], None).unwrap();
        assert!(g.value < Surd::from_ratio(1, 1));
        assert!(lp::verify(&g.problem, &g.result, &Surd::default()).is_ok());
    }

    #[test]
    fn two_input_intersection_is_local() {
        let (prog, res) = intersection_optimum::<Rational>(&chsh_functional(2), &Rational::zero()).unwrap();
        assert_eq!(res.value(), Some(&rat(3, 4)));
        assert!(lp::verify(&prog.lp, &res, &Rational::zero()).is_ok());
    }

    #[test]
    fn ns_only_chsh_reaches_one() {
        let v = ns_only_optimum::<Rational>(&chsh_functional(2), &Rational::zero()).unwrap();
        assert_eq!(v, rat_int(1));
    }
}
