//! Exact finite-dimensional quantum strategies and the behaviors they
//! generate.
//!
//! A strategy fixes a pure state on `⊗_p C^{d_p}` and, per player and
//! input, one slot per output coordinate holding either a constant ±1 or a
//! ±1-valued observable on that player's factor. Observables of one input
//! must commute, so every outcome string has the joint projector
//! `∏_k (I + a_k O_k)/2`.

use crate::behaviors::{Behavior, BehaviorError, PdDecomposition};
use crate::blcs::Blcs;
use crate::games::{all_strings, GameError, NonlocalGame, Rule};
use crate::gf2;
use crate::lifting::{lifted_chsh_game, sdl_magic_square, sdl_magic_star, LIFTED_CHSH_PAIRS};
use crate::qnum::QNum;
use crate::scalar::Surd;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("unknown operator label `{0}`")]
    BadLabel(String),
    #[error("player {player}, input {input}, slot {slot}: observable is not a Hermitian involution")]
    NotObservable { player: usize, input: usize, slot: usize },
    #[error("player {player}, input {input}: slots {a} and {b} do not commute")]
    NonCommuting { player: usize, input: usize, a: usize, b: usize },
    #[error("player {player}, input {input}: outcome projectors do not resolve the identity over the alphabet")]
    AlphabetViolation { player: usize, input: usize },
    #[error("state is not normalized")]
    NotNormalized,
    #[error("probability with non-zero imaginary part")]
    NotReal,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("index out of range: {0}")]
    BadIndex(String),
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("invalid json: {0}")]
    Json(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    d: usize,
    e: Vec<QNum>,
}

impl Matrix {
    pub fn zeros(d: usize) -> Self {
        Matrix { d, e: vec![QNum::ZERO; d * d] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Matrix::zeros(d);
        for i in 0..d {
            m.e[i * d + i] = QNum::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<QNum>>) -> Self {
        let d = rows.len();
        assert!(rows.iter().all(|r| r.len() == d), "matrix must be square");
        Matrix { d, e: rows.into_iter().flatten().collect() }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, r: usize, c: usize) -> QNum {
        self.e[r * self.d + c]
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        let d = self.d;
        let mut out = Matrix::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let x = self.e[r * d + k];
                if x.is_zero() {
                    continue;
                }
                for c in 0..d {
                    let y = o.e[k * d + c];
                    if !y.is_zero() {
                        out.e[r * d + c] = out.e[r * d + c] + x * y;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        Matrix { d: self.d, e: self.e.iter().zip(&o.e).map(|(a, b)| *a + *b).collect() }
    }

    pub fn scale(&self, s: QNum) -> Matrix {
        Matrix { d: self.d, e: self.e.iter().map(|a| *a * s).collect() }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(QNum::int(-1))
    }

    pub fn kron(&self, o: &Matrix) -> Matrix {
        let (d1, d2) = (self.d, o.d);
        let d = d1 * d2;
        let mut out = Matrix::zeros(d);
        for r1 in 0..d1 {
            for c1 in 0..d1 {
                let x = self.e[r1 * d1 + c1];
                if x.is_zero() {
                    continue;
                }
                for r2 in 0..d2 {
                    for c2 in 0..d2 {
                        out.e[(r1 * d2 + r2) * d + c1 * d2 + c2] = x * o.e[r2 * d2 + c2];
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let d = self.d;
        let mut out = Matrix::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.e[c * d + r] = self.e[r * d + c];
            }
        }
        out
    }

    pub fn adjoint(&self) -> Matrix {
        let mut t = self.transpose();
        for x in &mut t.e {
            *x = x.conj();
        }
        t
    }

    pub fn trace(&self) -> QNum {
        (0..self.d).fold(QNum::ZERO, |acc, i| acc + self.e[i * self.d + i])
    }

    pub fn is_hermitian(&self) -> bool {
        *self == self.adjoint()
    }

    /// Hermitian with square `I`: a ±1-valued observable.
    pub fn is_observable(&self) -> bool {
        self.is_hermitian() && self.mul(self) == Matrix::identity(self.d)
    }

    pub fn commutes_with(&self, o: &Matrix) -> bool {
        self.mul(o) == o.mul(self)
    }

    /// `Some(±1)` when the matrix is `±I`.
    pub fn identity_sign(&self) -> Option<i8> {
        let id = Matrix::identity(self.d);
        if *self == id {
            Some(1)
        } else if *self == id.neg() {
            Some(-1)
        } else {
            None
        }
    }

    pub fn apply(&self, v: &[QNum]) -> Vec<QNum> {
        let d = self.d;
        (0..d)
            .map(|r| (0..d).fold(QNum::ZERO, |acc, c| acc + self.e[r * d + c] * v[c]))
            .collect()
    }

    /// Coefficients in the Pauli basis, `M = Σ_P c_P P`, for dimension
    /// `2^k`; labels are strings over `IXYZ`.
    pub fn pauli_coefficients(&self) -> Option<Vec<(String, QNum)>> {
        let k = self.d.trailing_zeros() as usize;
        if self.d != 1 << k {
            return None;
        }
        let inv_d = QNum::inv_sqrt2_pow(2 * k as u32);
        let mut out = Vec::new();
        for idx in 0..(1usize << (2 * k)) {
            let label: String = (0..k).map(|q| ['I', 'X', 'Y', 'Z'][idx >> (2 * (k - 1 - q)) & 3]).collect();
            let p = pauli_string(&label).expect("valid label");
            let c = p.mul(self).trace() * inv_d;
            if !c.is_zero() {
                out.push((label, c));
            }
        }
        Some(out)
    }
}

/// `I`, `X`, `Y`, `Z` (also `id`, `sx`, `sy`, `sz`).
pub fn pauli(name: &str) -> Result<Matrix, QuantumError> {
    let z = QNum::ZERO;
    let one = QNum::ONE;
    let i = QNum::i();
    Ok(match name {
        "I" | "id" => Matrix::identity(2),
        "X" | "sx" => Matrix::from_rows(vec![vec![z, one], vec![one, z]]),
        "Y" | "sy" => Matrix::from_rows(vec![vec![z, -i], vec![i, z]]),
        "Z" | "sz" => Matrix::from_rows(vec![vec![one, z], vec![z, -one]]),
        _ => return Err(QuantumError::BadLabel(name.to_string())),
    })
}

/// Tensor product of single-qubit Paulis, e.g. `"XZ"`; a leading `-`
/// negates.
pub fn pauli_string(s: &str) -> Result<Matrix, QuantumError> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    if body.is_empty() {
        return Err(QuantumError::BadLabel(s.to_string()));
    }
    let factors = body
        .chars()
        .map(|c| pauli(&c.to_string()).map_err(|_| QuantumError::BadLabel(s.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let m = tensor(&factors);
    Ok(if neg { m.neg() } else { m })
}

pub fn tensor(list: &[Matrix]) -> Matrix {
    list.iter().fold(Matrix::identity(1), |acc, m| acc.kron(m))
}

/// `(1/√d) Σ_i |i,i⟩` for `d` a power of two up to 64.
pub fn mes_state(d: usize) -> Result<Vec<QNum>, QuantumError> {
    if !(2..=64).contains(&d) || !d.is_power_of_two() {
        return Err(QuantumError::UnsupportedDimension(d));
    }
    let amp = QNum::inv_sqrt2_pow(d.trailing_zeros());
    let mut v = vec![QNum::ZERO; d * d];
    for i in 0..d {
        v[i * d + i] = amp;
    }
    Ok(v)
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz_state(n: usize) -> Result<Vec<QNum>, QuantumError> {
    if !(2..=6).contains(&n) {
        return Err(QuantumError::UnsupportedDimension(n));
    }
    let mut v = vec![QNum::ZERO; 1 << n];
    v[0] = QNum::inv_sqrt2();
    v[(1 << n) - 1] = QNum::inv_sqrt2();
    Ok(v)
}

fn inner(u: &[QNum], v: &[QNum]) -> QNum {
    u.iter().zip(v).fold(QNum::ZERO, |acc, (a, b)| if a.is_zero() || b.is_zero() { acc } else { acc + a.conj() * *b })
}

/// Applies `m` to tensor factor `k` (player 0 most significant).
fn apply_local(state: &[QNum], dims: &[usize], k: usize, m: &Matrix) -> Vec<QNum> {
    let stride: usize = dims[k + 1..].iter().product();
    let dk = dims[k];
    let block = dk * stride;
    let mut out = vec![QNum::ZERO; state.len()];
    for base in (0..state.len()).step_by(block) {
        for off in 0..stride {
            for c in 0..dk {
                let x = state[base + c * stride + off];
                if x.is_zero() {
                    continue;
                }
                for r in 0..dk {
                    let y = m.get(r, c);
                    if !y.is_zero() {
                        let t = &mut out[base + r * stride + off];
                        *t = *t + y * x;
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Slot {
    Const(i8),
    Op(Matrix),
}

impl Slot {
    pub fn negated(&self) -> Slot {
        match self {
            Slot::Const(c) => Slot::Const(-c),
            Slot::Op(m) => Slot::Op(m.neg()),
        }
    }

    /// Partner slot for the other half of a maximally entangled state.
    pub fn transposed(&self) -> Slot {
        match self {
            Slot::Const(c) => Slot::Const(*c),
            Slot::Op(m) => Slot::Op(m.transpose()),
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Slot::Const(_))
    }
}

/// Product of slot values as a matrix on a `d`-dimensional factor.
fn slot_product<'a>(slots: impl IntoIterator<Item = &'a Slot>, d: usize) -> Matrix {
    slots.into_iter().fold(Matrix::identity(d), |acc, s| match s {
        Slot::Const(1) => acc,
        Slot::Const(_) => acc.neg(),
        Slot::Op(m) => acc.mul(m),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantumStrategy {
    pub dims: Vec<usize>,
    pub state: Vec<QNum>,
    /// `slots[player][input][coordinate]`.
    pub slots: Vec<Vec<Vec<Slot>>>,
}

impl QuantumStrategy {
    pub fn players(&self) -> usize {
        self.dims.len()
    }

    /// Every slot of every player's input in `x` is a constant.
    pub fn is_deterministic_at(&self, x: &[usize]) -> bool {
        x.iter().enumerate().all(|(p, &xp)| self.slots[p][xp].iter().all(Slot::is_const))
    }

    pub fn is_deterministic_for(&self, player: usize, input: usize) -> bool {
        self.slots[player][input].iter().all(Slot::is_const)
    }

    /// Normalization, observables, and per-input commutation.
    pub fn validate(&self) -> Result<(), QuantumError> {
        if self.slots.len() != self.dims.len() {
            return Err(QuantumError::ShapeMismatch("player count".into()));
        }
        if self.state.len() != self.dims.iter().product::<usize>() {
            return Err(QuantumError::ShapeMismatch("state length".into()));
        }
        if inner(&self.state, &self.state) != QNum::ONE {
            return Err(QuantumError::NotNormalized);
        }
        for (p, per_input) in self.slots.iter().enumerate() {
            for (x, slots) in per_input.iter().enumerate() {
                let ops: Vec<(usize, &Matrix)> = slots
                    .iter()
                    .enumerate()
                    .filter_map(|(k, s)| match s {
                        Slot::Op(m) => Some((k, m)),
                        Slot::Const(_) => None,
                    })
                    .collect();
                for &(k, m) in &ops {
                    if m.dim() != self.dims[p] || !m.is_observable() {
                        return Err(QuantumError::NotObservable { player: p, input: x, slot: k });
                    }
                }
                for (i, &(a, ma)) in ops.iter().enumerate() {
                    for &(b, mb) in &ops[i + 1..] {
                        if !ma.commutes_with(mb) {
                            return Err(QuantumError::NonCommuting { player: p, input: x, a, b });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// `⟨ψ| O_1 ⊗ … ⊗ O_n |ψ⟩`; `None` entries are identities.
    pub fn expectation(&self, ops: &[Option<Matrix>]) -> QNum {
        let mut v = self.state.clone();
        for (p, op) in ops.iter().enumerate() {
            if let Some(m) = op {
                v = apply_local(&v, &self.dims, p, m);
            }
        }
        inner(&self.state, &v)
    }

    /// Expectation of the product of the listed slots, grouped per player.
    pub fn slot_correlator(&self, slots: &[(usize, usize, usize)]) -> QNum {
        let mut per: Vec<Vec<&Slot>> = vec![Vec::new(); self.players()];
        for &(p, x, k) in slots {
            per[p].push(&self.slots[p][x][k]);
        }
        let ops: Vec<Option<Matrix>> = per
            .iter()
            .enumerate()
            .map(|(p, s)| (!s.is_empty()).then(|| slot_product(s.iter().copied(), self.dims[p])))
            .collect();
        self.expectation(&ops)
    }

    fn check_shape(&self, game: &NonlocalGame) -> Result<(), QuantumError> {
        let sc = &game.scenario;
        if sc.players() != self.players() {
            return Err(QuantumError::ShapeMismatch("player count differs from the game".into()));
        }
        for p in 0..sc.players() {
            if self.slots[p].len() != sc.num_inputs(p) {
                return Err(QuantumError::ShapeMismatch(format!("player {p}: input count")));
            }
            for x in 0..sc.num_inputs(p) {
                if self.slots[p][x].len() != sc.slots[p][x].len() {
                    return Err(QuantumError::ShapeMismatch(format!("player {p}, input {x}: slot count")));
                }
            }
        }
        Ok(())
    }

    /// Outcome projectors over the player's alphabet at one input; `None`
    /// is the zero projector. Errors unless they sum to the identity.
    fn projectors(&self, game: &NonlocalGame, p: usize, x: usize) -> Result<Vec<Option<Matrix>>, QuantumError> {
        let d = self.dims[p];
        let slots = &self.slots[p][x];
        let id = Matrix::identity(d);
        let half = QNum::half();
        let mut total = Matrix::zeros(d);
        let mut out = Vec::new();
        for o in &game.scenario.alphabets[p][x] {
            let mut proj = Some(id.clone());
            for (s, &ok) in slots.iter().zip(o) {
                proj = match (proj, s) {
                    (None, _) => None,
                    (Some(m), Slot::Const(c)) => (*c == ok).then_some(m),
                    (Some(m), Slot::Op(op)) => {
                        let f = id.add(&op.scale(QNum::int(ok as i128))).scale(half);
                        Some(m.mul(&f))
                    }
                };
            }
            if let Some(m) = &proj {
                total = total.add(m);
            }
            out.push(proj.filter(|m| *m != Matrix::zeros(d)));
        }
        if total != id {
            return Err(QuantumError::AlphabetViolation { player: p, input: x });
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&StrategyJson::from(self)).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self, QuantumError> {
        let raw: StrategyJson = serde_json::from_str(s).map_err(|e| QuantumError::Json(e.to_string()))?;
        raw.try_into()
    }
}

/// Exact behavior `p(a|x) = ⟨ψ| ⊗_p P^{(p)}_{x_p,a_p} |ψ⟩` on every input
/// tuple of the game.
pub fn behavior_from_strategy(game: &NonlocalGame, s: &QuantumStrategy) -> Result<Behavior, QuantumError> {
    s.check_shape(game)?;
    s.validate()?;
    let sc = &game.scenario;
    let n = sc.players();
    let mut proj: Vec<Vec<Vec<Option<Matrix>>>> = Vec::with_capacity(n);
    for p in 0..n {
        proj.push((0..sc.num_inputs(p)).map(|x| s.projectors(game, p, x)).collect::<Result<_, _>>()?);
    }
    let mut table = Vec::with_capacity(sc.num_input_tuples());
    for xi in 0..sc.num_input_tuples() {
        let x = sc.input_tuple(xi);
        // Left factors: players 0..n-1 applied to ψ, indexed by outcome prefix.
        let mut lefts: Vec<(usize, Vec<QNum>)> = vec![(0, s.state.clone())];
        for p in 0..n - 1 {
            let k = sc.alphabets[p][x[p]].len();
            let mut next = Vec::new();
            for (idx, v) in &lefts {
                for (o, pm) in proj[p][x[p]].iter().enumerate() {
                    if let Some(m) = pm {
                        let w = apply_local(v, &s.dims, p, m);
                        if w.iter().any(|a| !a.is_zero()) {
                            next.push((idx * k + o, w));
                        }
                    }
                }
            }
            lefts = next;
        }
        let last = n - 1;
        let rights: Vec<Option<Vec<QNum>>> = proj[last][x[last]]
            .iter()
            .map(|pm| pm.as_ref().map(|m| apply_local(&s.state, &s.dims, last, m)))
            .collect();
        let k = rights.len();
        let mut row = vec![Surd::default(); sc.num_outcomes(&x)];
        for (idx, l) in &lefts {
            for (o, r) in rights.iter().enumerate() {
                if let Some(r) = r {
                    let v = inner(l, r);
                    if !v.is_zero() {
                        row[idx * k + o] = v.to_surd().ok_or(QuantumError::NotReal)?;
                    }
                }
            }
        }
        table.push(row);
    }
    Ok(Behavior::new(sc.clone(), table)?)
}

/// Winning probability of a parity-rule game computed from correlators:
/// `P(win | x) = (1 + sign · ⟨∏ O⟩)/2`. Avoids materializing behaviors
/// whose output alphabets are too large to tabulate.
pub fn parity_game_value(game: &NonlocalGame, s: &QuantumStrategy) -> Result<Surd, QuantumError> {
    s.check_shape(game)?;
    s.validate()?;
    let Rule::Parity(checks) = &game.rule else {
        return Err(QuantumError::ShapeMismatch("game rule is not a parity check".into()));
    };
    for p in 0..game.players() {
        for x in 0..game.scenario.num_inputs(p) {
            s.projectors(game, p, x)?;
        }
    }
    let sc = &game.scenario;
    let half = Surd::from_ratio(1, 2);
    let mut total = Surd::default();
    for (xi, pi) in game.dist.iter().enumerate() {
        if num_traits::Zero::is_zero(pi) {
            continue;
        }
        let win = match &checks[xi] {
            None => Surd::from_ratio(1, 1),
            Some(c) => {
                let x = sc.input_tuple(xi);
                let list: Vec<(usize, usize, usize)> = c.slots.iter().map(|&(p, k)| (p, x[p], k)).collect();
                let e = s.slot_correlator(&list).to_surd().ok_or(QuantumError::NotReal)?;
                let signed = if c.sign == 1 { e } else { -&e };
                &half * &(&Surd::from_ratio(1, 1) + &signed)
            }
        };
        total = &total + &(&win * &Surd::rational(pi.clone()));
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Operator solutions and sign repair.

/// Standard two-qubit solution of the 3×3 Magic Square: rows multiply to
/// `+I`, columns to `+I, +I, −I`.
pub fn magic_square_operator_solution() -> Vec<Vec<Matrix>> {
    [["XI", "IX", "XX"], ["IZ", "ZI", "ZZ"], ["XZ", "ZX", "YY"]]
        .iter()
        .map(|r| r.iter().map(|l| pauli_string(l).expect("label")).collect())
        .collect()
}

/// Mermin pentagram lines; the last multiplies to `−I`, the rest to `+I`.
pub fn pentagram_lines() -> Vec<Vec<&'static str>> {
    vec![
        vec!["XII", "IXI", "IIX", "XXX"],
        vec!["XYY", "XII", "IYI", "IIY"],
        vec!["YXY", "YII", "IXI", "IIY"],
        vec!["YYX", "YII", "IYI", "IIX"],
        vec!["XXX", "XYY", "YXY", "YYX"],
    ]
}

/// Per-variable slots (in one player's frame) keyed by variable name.
pub type SlotTable = HashMap<String, Slot>;

/// Negates observables so every constraint of `system` holds as an
/// operator identity. Constraints of constants alone must already hold.
pub fn repair_signs(system: &Blcs, table: &mut SlotTable, d: usize) -> Result<(), QuantumError> {
    let ops: Vec<&String> = system.variables().iter().filter(|v| matches!(table.get(*v), Some(Slot::Op(_)))).collect();
    let col: HashMap<&String, usize> = ops.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut eqs = Vec::new();
    for (j, c) in system.constraints().iter().enumerate() {
        let sign = constraint_sign(table, &c.vars, d)
            .ok_or_else(|| QuantumError::ConstraintViolated(format!("constraint {} is not ±I", j + 1)))?;
        let vars: Vec<usize> = c.vars.iter().filter_map(|v| col.get(v).copied()).collect();
        if vars.is_empty() && sign != c.parity {
            return Err(QuantumError::ConstraintViolated(format!("constant constraint {} fails", j + 1)));
        }
        eqs.push(gf2::Equation::new(ops.len(), vars, sign != c.parity));
    }
    let flips = gf2::solve(ops.len(), &eqs)
        .ok_or_else(|| QuantumError::ConstraintViolated("no sign repair exists".into()))?;
    for (v, f) in ops.iter().zip(flips) {
        if f {
            let s = table.get_mut(*v).expect("present");
            *s = s.negated();
        }
    }
    Ok(())
}

fn constraint_sign(table: &SlotTable, vars: &[String], d: usize) -> Option<i8> {
    let slots: Vec<&Slot> = vars.iter().map(|v| table.get(v)).collect::<Option<_>>()?;
    slot_product(slots, d).identity_sign()
}

/// Checks every constraint of `system` as an operator identity.
pub fn table_satisfies(system: &Blcs, table: &SlotTable, d: usize) -> bool {
    system.constraints().iter().all(|c| constraint_sign(table, &c.vars, d) == Some(c.parity))
}

/// Two-player strategy on the maximally entangled state where both
/// players' slots are named variables: Alice uses the table, Bob the
/// transposes, so shared variables are perfectly correlated.
pub fn mes_strategy(game: &NonlocalGame, table: &SlotTable, d: usize) -> Result<QuantumStrategy, QuantumError> {
    let sc = &game.scenario;
    if sc.players() != 2 {
        return Err(QuantumError::ShapeMismatch("two players required".into()));
    }
    let lookup = |v: &String| table.get(v).cloned().ok_or_else(|| QuantumError::BadLabel(v.clone()));
    let alice = sc.slots[0].iter().map(|vs| vs.iter().map(lookup).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>()?;
    let bob = sc.slots[1]
        .iter()
        .map(|vs| vs.iter().map(|v| lookup(v).map(|s| s.transposed())).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuantumStrategy { dims: vec![d, d], state: mes_state(d)?, slots: vec![alice, bob] })
}

/// The 3×3 Magic Square table: `v1..v9` row-major.
pub fn magic_square_table() -> SlotTable {
    let sol = magic_square_operator_solution();
    let mut t = SlotTable::new();
    for (r, row) in sol.into_iter().enumerate() {
        for (c, m) in row.into_iter().enumerate() {
            t.insert(format!("v{}", 3 * r + c + 1), Slot::Op(m));
        }
    }
    t
}

fn gamma(len: usize, i: usize) -> Result<Vec<i8>, QuantumError> {
    all_strings(len)
        .into_iter()
        .nth(i.wrapping_sub(1))
        .ok_or_else(|| QuantumError::BadIndex(format!("strategy index {i} outside 1..={}", 1 << len)))
}

// ---------------------------------------------------------------------------
// SDL Magic Square.

fn sq_name(r: usize, c: usize) -> String {
    format!("v{}", 4 * (r - 1) + c)
}

/// Template table deterministic on row 1 and column 1. `γ1..γ5` fill
/// `(1,1), (1,2), (1,3), (2,1), (3,1)`; the 3×3 block of rows and columns
/// 2..4 carries the Magic Square observables, sign-repaired.
pub fn sdlmsq_template(i: usize) -> Result<SlotTable, QuantumError> {
    let g = gamma(5, i)?;
    let mut t = SlotTable::new();
    for (r, c, v) in [
        (1, 1, g[0]),
        (1, 2, g[1]),
        (1, 3, g[2]),
        (2, 1, g[3]),
        (3, 1, g[4]),
        (1, 4, g[0] * g[1] * g[2]),
        (4, 1, g[0] * g[3] * g[4]),
    ] {
        t.insert(sq_name(r, c), Slot::Const(v));
    }
    let sol = magic_square_operator_solution();
    for r in 2..=4 {
        for c in 2..=4 {
            t.insert(sq_name(r, c), Slot::Op(sol[r - 2][c - 2].clone()));
        }
    }
    repair_signs(&sdl_magic_square(), &mut t, 4)?;
    Ok(t)
}

/// Table deterministic on row `m` and column `n`: the template with rows
/// `1↔m` and columns `1↔n` swapped. When column `n` has parity −1 the swap
/// moves that parity to column 1, so entries `(1,1)` and `(1,n)` of the
/// result are negated, which restores both columns and keeps row 1 intact.
pub fn sdlmsq_table(m: usize, n: usize, i: usize) -> Result<SlotTable, QuantumError> {
    if !(1..=4).contains(&m) || !(1..=4).contains(&n) {
        return Err(QuantumError::BadIndex(format!("input pair ({m},{n})")));
    }
    let t = sdlmsq_template(i)?;
    let swap = |a: usize, k: usize| if k == 1 { a } else if k == a { 1 } else { k };
    let mut out = SlotTable::new();
    for k in 1..=4 {
        for l in 1..=4 {
            let mut s = t[&sq_name(swap(m, k), swap(n, l))].clone();
            if n == 4 && k == 1 && (l == 1 || l == n) {
                s = s.negated();
            }
            out.insert(sq_name(k, l), s);
        }
    }
    Ok(out)
}

pub fn sdlmsq_pd_strategy(m: usize, n: usize, i: usize) -> Result<QuantumStrategy, QuantumError> {
    let game = crate::lifting::sdl_magic_square_game();
    mes_strategy(&game, &sdlmsq_table(m, n, i)?, 4)
}

/// Uniform over winning outcomes on every input tuple.
pub fn uniform_on_winning(game: &NonlocalGame) -> Behavior {
    let sc = &game.scenario;
    let table = (0..sc.num_input_tuples())
        .map(|xi| {
            let x = sc.input_tuple(xi);
            let wins: Vec<bool> = (0..sc.num_outcomes(&x)).map(|ai| game.wins(xi, &sc.outcome_tuple(&x, ai))).collect();
            let k = wins.iter().filter(|&&w| w).count() as i64;
            wins.iter().map(|&w| if w { Surd::from_ratio(1, k) } else { Surd::default() }).collect()
        })
        .collect();
    Behavior::new(sc.clone(), table).expect("shape from the game")
}

/// `1/32` on every winning entry of the SDL Magic Square game.
pub fn sdlmsq_behavior() -> Behavior {
    uniform_on_winning(&crate::lifting::sdl_magic_square_game())
}

// ---------------------------------------------------------------------------
// SDL Magic Star.

/// For each variable of an edge system of degree two, the 1-based indices
/// of the two edges containing it.
fn edge_pairs(system: &Blcs) -> HashMap<String, (usize, usize)> {
    let mut out = HashMap::new();
    for v in system.variables() {
        let ks: Vec<usize> =
            system.constraints().iter().enumerate().filter(|(_, c)| c.vars.contains(v)).map(|(k, _)| k + 1).collect();
        out.insert(v.clone(), (ks[0], ks[1]));
    }
    out
}

/// Template table deterministic on edge `s1`: `γ1..γ4` on `u2..u5`,
/// `u1 = γ1γ2γ3γ4`; the other ten vertices carry the pentagram observables
/// with edges `s2..s6` playing the five lines, sign-repaired.
pub fn sdlmstar_template(i: usize) -> Result<SlotTable, QuantumError> {
    let g = gamma(4, i)?;
    let system = sdl_magic_star();
    let pairs = edge_pairs(&system);
    let lines = pentagram_lines();
    let mut t = SlotTable::new();
    t.insert("u1".into(), Slot::Const(g.iter().product()));
    for k in 0..4 {
        t.insert(format!("u{}", k + 2), Slot::Const(g[k]));
    }
    for v in system.variables().iter().skip(5) {
        let (k, l) = pairs[v];
        let shared: Vec<&&str> = lines[k - 2].iter().filter(|o| lines[l - 2].contains(o)).collect();
        let [label] = shared[..] else {
            return Err(QuantumError::ConstraintViolated(format!("lines {} and {} do not meet once", k - 1, l - 1)));
        };
        t.insert(v.clone(), Slot::Op(pauli_string(label)?));
    }
    repair_signs(&system, &mut t, 8)?;
    Ok(t)
}

/// Table deterministic on edge `s_j`: vertex `{k,l}` takes the template
/// value of `{τk, τl}` with `τ = (1 j)`, and the vertex `{1, j}` is
/// multiplied by `par(s_j)`.
pub fn sdlmstar_table(j: usize, i: usize) -> Result<SlotTable, QuantumError> {
    if !(1..=6).contains(&j) {
        return Err(QuantumError::BadIndex(format!("edge {j}")));
    }
    let system = sdl_magic_star();
    let t = sdlmstar_template(i)?;
    let pairs = edge_pairs(&system);
    let by_pair: HashMap<(usize, usize), &String> = pairs.iter().map(|(v, &p)| (p, v)).collect();
    let tau = |k: usize| if k == 1 { j } else if k == j { 1 } else { k };
    let par_j = system.constraints()[j - 1].parity;
    let mut out = SlotTable::new();
    for (v, &(k, l)) in &pairs {
        let (a, b) = (tau(k).min(tau(l)), tau(k).max(tau(l)));
        let mut s = t[by_pair[&(a, b)]].clone();
        if j != 1 && (k, l) == (1, j) && par_j == -1 {
            s = s.negated();
        }
        out.insert(v.clone(), s);
    }
    Ok(out)
}

pub fn sdlmstar_pd_strategy(j: usize, i: usize) -> Result<QuantumStrategy, QuantumError> {
    let game = crate::lifting::sdl_magic_star_game();
    mes_strategy(&game, &sdlmstar_table(j, i)?, 8)
}

/// `1/16` on winning entries of valid (edge, vertex) pairs and `1/32` on
/// the pairs the distribution never asks.
pub fn sdlmstar_behavior() -> Behavior {
    uniform_on_winning(&crate::lifting::sdl_magic_star_game())
}

// ---------------------------------------------------------------------------
// Convex decompositions into partially deterministic parts.

/// Equal-weight decomposition whose parts are the behaviors of `strategies`,
/// each required to be deterministic at `target`.
pub fn uniform_decomposition(
    game: &NonlocalGame,
    target: &[usize],
    strategies: impl IntoIterator<Item = Result<QuantumStrategy, QuantumError>>,
) -> Result<PdDecomposition, QuantumError> {
    let parts = strategies
        .into_iter()
        .map(|s| behavior_from_strategy(game, &s?))
        .collect::<Result<Vec<_>, _>>()?;
    let outcomes = parts
        .iter()
        .enumerate()
        .map(|(i, b)| {
            b.deterministic_outcome(target)
                .ok_or_else(|| QuantumError::ConstraintViolated(format!("part {} is not deterministic at {target:?}", i + 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let w = Surd::from_ratio(1, parts.len() as i64);
    Ok(PdDecomposition { target: target.to_vec(), weights: vec![w; parts.len()], parts, outcomes })
}

/// The 32-part decomposition deterministic at `(r_m, c_n)`.
pub fn sdlmsq_decomposition(m: usize, n: usize) -> Result<PdDecomposition, QuantumError> {
    let game = crate::lifting::sdl_magic_square_game();
    let target = [m.wrapping_sub(1), n.wrapping_sub(1)];
    uniform_decomposition(&game, &target, (1..=32).map(|i| sdlmsq_pd_strategy(m, n, i)))
}

/// The 16-part decomposition deterministic on edge `s_j`, certified at
/// Bob's vertex `y` (0-based; must lie on `s_j`). Every part is
/// deterministic at every vertex of the edge.
pub fn sdlmstar_decomposition(j: usize, y: usize) -> Result<PdDecomposition, QuantumError> {
    let system = sdl_magic_star();
    let on_edge = j >= 1
        && j <= system.num_constraints()
        && system.variables().get(y).is_some_and(|v| system.constraints()[j - 1].vars.contains(v));
    if !on_edge {
        return Err(QuantumError::BadIndex(format!("vertex {y} on edge {j}")));
    }
    let game = crate::lifting::sdl_magic_star_game();
    uniform_decomposition(&game, &[j - 1, y], (1..=16).map(|i| sdlmstar_pd_strategy(j, i)))
}

/// First vertex of edge `s_j`, as a 0-based Bob input.
pub fn sdlmstar_default_vertex(j: usize) -> Option<usize> {
    let system = sdl_magic_star();
    let v = system.constraints().get(j.checked_sub(1)?)?.vars.first()?;
    system.variables().iter().position(|w| w == v)
}

// ---------------------------------------------------------------------------
// GHZ cube and its 3×3×3 lifting.

fn parse_vertex(label: &str) -> Option<[usize; 3]> {
    let inner = label.strip_prefix('(')?.strip_suffix(')')?;
    let v: Vec<usize> = inner.split(',').map(|t| t.parse().ok()).collect::<Option<_>>()?;
    v.try_into().ok()
}

/// Player `i`'s cube observable at vertex `c ∈ {0,1}^3`: with own
/// coordinate `w` and the others `(p, q)` read cyclically, `w = 0` gives
/// `σx` on `p = q` and `+1` otherwise; `w = 1` gives `+1` on `p = q`, `σy`
/// at `(1,0)` and `−σy` at `(0,1)`.
fn cube_slot(i: usize, c: [usize; 3]) -> Slot {
    let (w, p, q) = (c[i], c[(i + 1) % 3], c[(i + 2) % 3]);
    let y = pauli("Y").expect("label");
    match (w, p == q, p) {
        (0, true, _) => Slot::Op(pauli("X").expect("label")),
        (0, false, _) | (1, true, _) => Slot::Const(1),
        (_, false, 1) => Slot::Op(y),
        _ => Slot::Op(y.neg()),
    }
}

fn grid_strategy(game: &NonlocalGame, f: impl Fn(usize, [usize; 3]) -> Slot) -> Result<QuantumStrategy, QuantumError> {
    let sc = &game.scenario;
    let slots = (0..3)
        .map(|p| {
            sc.slots[p]
                .iter()
                .map(|vs| {
                    vs.iter()
                        .map(|l| parse_vertex(l).map(|v| f(p, v)).ok_or_else(|| QuantumError::BadLabel(l.clone())))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuantumStrategy { dims: vec![2, 2, 2], state: ghz_state(3)?, slots })
}

pub fn ghz_cube_strategy() -> Result<QuantumStrategy, QuantumError> {
    grid_strategy(&crate::games::ghz_cube_game(), cube_slot)
}

/// Strategy for the 3×3×3 grid deterministic on `x*`: every vertex on one
/// of the faces `x*_i` gets `+1` from all players, the eight remaining
/// vertices carry the cube strategy (each axis' two free values mapped to
/// 0 and 1 in increasing order), and face parities are repaired by
/// negating pairs of slots at a common vertex, which leaves every vertex
/// product unchanged.
pub fn lifted_ghz_pd_strategy(x_star: [usize; 3]) -> Result<QuantumStrategy, QuantumError> {
    if x_star.iter().any(|&x| x > 2) {
        return Err(QuantumError::BadIndex(format!("{x_star:?}")));
    }
    let game = crate::lifting::lifted_ghz_game();
    let parities = [1i8, -1, 1];
    let free = |i: usize, v: usize| -> usize { (0..3).filter(|&u| u != x_star[i]).position(|u| u == v).expect("free value") };
    let vertices: Vec<[usize; 3]> =
        (0..27).map(|k| [k / 9, k / 3 % 3, k % 3]).collect();
    let vid = |v: [usize; 3]| v[0] * 9 + v[1] * 3 + v[2];
    let mut table: Vec<[Slot; 3]> = vertices
        .iter()
        .map(|&v| {
            if (0..3).any(|i| v[i] == x_star[i]) {
                [Slot::Const(1), Slot::Const(1), Slot::Const(1)]
            } else {
                let c = [free(0, v[0]), free(1, v[1]), free(2, v[2])];
                [cube_slot(0, c), cube_slot(1, c), cube_slot(2, c)]
            }
        })
        .collect();
    // Unknown s[i][v] = 1 negates player i's slot at vertex v.
    let var = |i: usize, v: usize| i * 27 + v;
    let mut eqs = Vec::new();
    for v in 0..27 {
        eqs.push(gf2::Equation::new(81, (0..3).map(|i| var(i, v)), false));
    }
    for i in 0..3 {
        for x in 0..3 {
            let face: Vec<usize> = vertices.iter().filter(|v| v[i] == x).map(|&v| vid(v)).collect();
            let sign = slot_product(face.iter().map(|&v| &table[v][i]), 2)
                .identity_sign()
                .ok_or_else(|| QuantumError::ConstraintViolated(format!("player {i} face {x} is not ±I")))?;
            eqs.push(gf2::Equation::new(81, face.iter().map(|&v| var(i, v)), sign != parities[x]));
        }
    }
    let flips = gf2::solve(81, &eqs).ok_or_else(|| QuantumError::ConstraintViolated("parity repair failed".into()))?;
    for v in 0..27 {
        for i in 0..3 {
            if flips[var(i, v)] {
                table[v][i] = table[v][i].negated();
            }
        }
    }
    grid_strategy(&game, |p, v| table[vid(v)][p].clone())
}

// ---------------------------------------------------------------------------
// CHSH and its lifting.

fn tsirelson_bob(plus: bool) -> Matrix {
    let (z, x) = (pauli("Z").expect("label"), pauli("X").expect("label"));
    let m = if plus { z.add(&x) } else { z.add(&x.neg()) };
    m.scale(QNum::inv_sqrt2())
}

/// Tsirelson behavior of the binary CHSH game: Alice `σz`, `σx`; Bob
/// `(σz ± σx)/√2`; shared `|φ+⟩`.
pub fn tsirelson_behavior() -> Result<Behavior, QuantumError> {
    let game = crate::games::chsh_xor_game();
    let s = QuantumStrategy {
        dims: vec![2, 2],
        state: mes_state(2)?,
        slots: vec![
            vec![vec![Slot::Op(pauli("Z")?)], vec![Slot::Op(pauli("X")?)]],
            vec![vec![Slot::Op(tsirelson_bob(true))], vec![Slot::Op(tsirelson_bob(false))]],
        ],
    };
    behavior_from_strategy(&game, &s)
}

#[derive(Debug, Clone)]
pub struct LiftedChshReport {
    /// `(Alice input, Bob input)`, 0-based.
    pub target: (usize, usize),
    /// Variables carrying the embedded Tsirelson sub-game.
    pub live_pair: [String; 2],
    /// `⟨∏ A⟩` per Alice input.
    pub parity_expectations: Vec<Surd>,
    /// `(Alice input, pair, ⟨A_u A_w⟩)`.
    pub two_body: Vec<(usize, [String; 2], Surd)>,
    pub value: Surd,
    pub alice_deterministic: bool,
    /// False exactly when Bob's target variable is in the live pair: the
    /// sub-game then needs his measurement there.
    pub bob_deterministic: bool,
}

/// For target `(j, v)`: Alice answers constraint `j` deterministically
/// (+1 everywhere except the first variable when the parity is −1), and the
/// Tsirelson strategy runs on the pair of variables outside constraint
/// `j`. In each other constraint, the non-live variables copy Alice's
/// constants, and the live pair gets `(σx, σx)` or `(σz, −σz)` according
/// to the parity it must have.
pub fn lifted_chsh_strategy(j: usize, v: usize) -> Result<(QuantumStrategy, LiftedChshReport), QuantumError> {
    let game = lifted_chsh_game();
    let system = crate::lifting::lifted_chsh_system();
    let cs = system.constraints();
    if j >= cs.len() || v >= system.num_variables() {
        return Err(QuantumError::BadIndex(format!("input pair ({j},{v})")));
    }
    let live = LIFTED_CHSH_PAIRS
        .iter()
        .find(|p| !cs[j].vars.iter().any(|w| w == p[0] || w == p[1]))
        .expect("every constraint misses one pair");
    let mut consts: BTreeMap<String, i8> = BTreeMap::new();
    for (k, w) in cs[j].vars.iter().enumerate() {
        consts.insert(w.clone(), if k == 0 { cs[j].parity } else { 1 });
    }
    let (x, z) = (pauli("X")?, pauli("Z")?);
    let mut alice = Vec::new();
    for (k, c) in cs.iter().enumerate() {
        if k == j {
            alice.push(c.vars.iter().map(|w| Slot::Const(consts[w])).collect::<Vec<_>>());
            continue;
        }
        let fixed: i8 = c.vars.iter().filter_map(|w| consts.get(w)).product();
        let need = c.parity * fixed;
        let (first, second) = if need == 1 {
            (Slot::Op(x.clone()), Slot::Op(x.clone()))
        } else {
            (Slot::Op(z.clone()), Slot::Op(z.neg()))
        };
        alice.push(
            c.vars
                .iter()
                .map(|w| {
                    if w == live[0] {
                        first.clone()
                    } else if w == live[1] {
                        second.clone()
                    } else {
                        Slot::Const(consts[w])
                    }
                })
                .collect(),
        );
    }
    // Bob bisects Alice's two anticommuting observables for each live
    // variable, which is the Tsirelson angle for that pair of questions.
    let bisector = |w: &str| -> Matrix {
        let mut acc = Matrix::zeros(2);
        for (k, c) in cs.iter().enumerate() {
            if let Some(t) = c.vars.iter().position(|u| u == w) {
                if let Slot::Op(m) = &alice[k][t] {
                    acc = acc.add(&m.transpose());
                }
            }
        }
        acc.scale(QNum::inv_sqrt2())
    };
    let bob: Vec<Vec<Slot>> = system
        .variables()
        .iter()
        .map(|w| vec![if live.contains(&w.as_str()) { Slot::Op(bisector(w)) } else { Slot::Const(consts[w]) }])
        .collect();
    let s = QuantumStrategy { dims: vec![2, 2], state: mes_state(2)?, slots: vec![alice, bob] };
    let b = behavior_from_strategy(&game, &s)?;
    let value = crate::games::game_value(&game, &b)?;

    let mut parity_expectations = Vec::new();
    for (k, c) in cs.iter().enumerate() {
        let list: Vec<_> = (0..c.vars.len()).map(|t| (0, k, t)).collect();
        let e = s.slot_correlator(&list).to_surd().ok_or(QuantumError::NotReal)?;
        if e != Surd::from_ratio(c.parity as i64, 1) {
            return Err(QuantumError::ConstraintViolated(format!("parity of constraint {} is {e}", k + 1)));
        }
        parity_expectations.push(e);
    }
    let mut two_body = Vec::new();
    for sc in &game.side_correlations {
        let e = s.slot_correlator(&[(0, sc.input, sc.coords.0), (0, sc.input, sc.coords.1)]).to_surd().ok_or(QuantumError::NotReal)?;
        if e.abs() != Surd::from_ratio(1, 1) {
            return Err(QuantumError::ConstraintViolated(format!("two-body correlator {e} at input {}", sc.input + 1)));
        }
        let vars = &cs[sc.input].vars;
        two_body.push((sc.input, [vars[sc.coords.0].clone(), vars[sc.coords.1].clone()], e));
    }
    let report = LiftedChshReport {
        target: (j, v),
        live_pair: [live[0].to_string(), live[1].to_string()],
        parity_expectations,
        two_body,
        value,
        alice_deterministic: s.is_deterministic_for(0, j),
        bob_deterministic: s.is_deterministic_for(1, v),
    };
    Ok((s, report))
}

// ---------------------------------------------------------------------------
// JSON: observables as Pauli expansions, the state as real amplitudes.

#[derive(Serialize, Deserialize)]
struct StrategyJson {
    dims: Vec<usize>,
    state: Vec<String>,
    slots: Vec<Vec<Vec<SlotJson>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SlotJson {
    Const(i8),
    /// Pauli label to real coefficient.
    Pauli(BTreeMap<String, String>),
}

fn real_string(q: &QNum) -> String {
    q.to_surd().map(|s| s.to_string()).unwrap_or_else(|| q.to_string())
}

impl From<&QuantumStrategy> for StrategyJson {
    fn from(s: &QuantumStrategy) -> Self {
        let slot = |sl: &Slot| match sl {
            Slot::Const(c) => SlotJson::Const(*c),
            Slot::Op(m) => SlotJson::Pauli(
                m.pauli_coefficients()
                    .expect("power-of-two dimension")
                    .into_iter()
                    .map(|(l, c)| (l, real_string(&c)))
                    .collect(),
            ),
        };
        StrategyJson {
            dims: s.dims.clone(),
            state: s.state.iter().map(real_string).collect(),
            slots: s.slots.iter().map(|p| p.iter().map(|x| x.iter().map(slot).collect()).collect()).collect(),
        }
    }
}

impl TryFrom<StrategyJson> for QuantumStrategy {
    type Error = QuantumError;
    fn try_from(raw: StrategyJson) -> Result<Self, Self::Error> {
        let num = |s: &str| -> Result<QNum, QuantumError> {
            let v: Surd = s.parse().map_err(|_| QuantumError::Json(format!("amplitude `{s}`")))?;
            QNum::from_surd(&v).ok_or_else(|| QuantumError::Json(format!("non-dyadic amplitude `{s}`")))
        };
        let state = raw.state.iter().map(|s| num(s)).collect::<Result<Vec<_>, _>>()?;
        let slot = |sj: &SlotJson| -> Result<Slot, QuantumError> {
            Ok(match sj {
                SlotJson::Const(c) => Slot::Const(*c),
                SlotJson::Pauli(terms) => {
                    let mut acc: Option<Matrix> = None;
                    for (label, c) in terms {
                        let term = pauli_string(label)?.scale(num(c)?);
                        acc = Some(match acc {
                            None => term,
                            Some(a) => a.add(&term),
                        });
                    }
                    Slot::Op(acc.ok_or_else(|| QuantumError::Json("empty Pauli expansion".into()))?)
                }
            })
        };
        let slots = raw
            .slots
            .iter()
            .map(|p| p.iter().map(|x| x.iter().map(slot).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QuantumStrategy { dims: raw.dims, state, slots })
    }
}
