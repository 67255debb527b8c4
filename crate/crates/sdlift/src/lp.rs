//! Two-phase simplex over an ordered field, returning certificates that
//! are re-checked by substitution before they leave this module.
//!
//! Problems are `opt c·x` subject to rows `a·x {≤,=,≥} b` with `x ≥ 0`.
//! The default rule prices by Dantzig's largest coefficient and breaks
//! ratio ties lexicographically, switching to Bland's rule after a long
//! degenerate run; Bland's rule alone is available as a slower reference.
//!
//! Certificate conventions, for `max c·x`:
//! * optimal: `y` with `y_i ≥ 0` on `≤` rows, `y_i ≤ 0` on `≥` rows,
//!   `yᵀA ≥ c` and `y·b = c·x*`;
//! * infeasible: `y` with the same sign pattern, `yᵀA ≥ 0` and `y·b < 0`;
//! * unbounded: a feasible `x` and a ray `r ≥ 0` with `A r` compatible with
//!   every row relation and `c·r > 0`.
//!
//! For `min c·x` the dual is that of `max −c·x`, negated: `yᵀA ≤ c`, signs
//! reversed, `y·b = c·x*`.

use crate::scalar::OrderedField;
use serde_json::{json, Value};
use std::cmp::Ordering;
use thiserror::Error;

pub const DEFAULT_VARIABLE_CAP: usize = 10_000;
const PIVOT_LIMIT: usize = 1_000_000;
/// Consecutive degenerate pivots after which Bland's rule takes over.
const DEGENERATE_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("{vars} variables exceed the cap of {cap}")]
    CapExceeded { vars: usize, cap: usize },
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("certificate rejected: {0}")]
    CertificateRejected(String),
    #[error("pivot limit reached")]
    PivotLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint<F> {
    /// Sparse `(variable, coefficient)`; repeated variables are summed.
    pub coeffs: Vec<(usize, F)>,
    pub relation: Relation,
    pub rhs: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem<F> {
    pub names: Vec<String>,
    pub constraints: Vec<LinearConstraint<F>>,
    pub objective: Vec<(usize, F)>,
    pub sense: Sense,
}

impl<F: OrderedField> LpProblem<F> {
    pub fn new(sense: Sense) -> Self {
        LpProblem { names: Vec::new(), constraints: Vec::new(), objective: Vec::new(), sense }
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    /// Adds a nonnegative variable and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, F)>, relation: Relation, rhs: F) -> usize {
        self.constraints.push(LinearConstraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let bad = |c: &[(usize, F)]| c.iter().any(|(j, _)| *j >= n);
        if bad(&self.objective) {
            return Err(LpError::Malformed("objective references an unknown variable".into()));
        }
        if let Some(i) = self.constraints.iter().position(|c| bad(&c.coeffs)) {
            return Err(LpError::Malformed(format!("row {i} references an unknown variable")));
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[F]) -> F {
        dot(&self.objective, x)
    }

    /// `c` densified with the sign that turns the problem into a maximization.
    fn max_costs(&self) -> Vec<F> {
        let mut c = vec![F::zero(); self.num_vars()];
        if self.sense != Sense::Feasibility {
            for (j, v) in &self.objective {
                c[*j] = c[*j].add(v);
            }
        }
        if self.sense == Sense::Minimize {
            for v in &mut c {
                *v = v.neg();
            }
        }
        c
    }

    /// `yᵀA` over structural columns.
    pub fn transpose_apply(&self, y: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.num_vars()];
        for (row, yi) in self.constraints.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (j, a) in &row.coeffs {
                out[*j] = out[*j].add(&a.mul(yi));
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let terms = |c: &[(usize, F)]| -> Value {
            c.iter().map(|(j, v)| json!([self.names[*j], v.to_string()])).collect()
        };
        json!({
            "sense": format!("{:?}", self.sense).to_lowercase(),
            "variables": self.names,
            "objective": terms(&self.objective),
            "constraints": self.constraints.iter().map(|c| json!({
                "terms": terms(&c.coeffs),
                "relation": match c.relation { Relation::Le => "<=", Relation::Eq => "=", Relation::Ge => ">=" },
                "rhs": c.rhs.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

fn dot<F: OrderedField>(c: &[(usize, F)], x: &[F]) -> F {
    c.iter().fold(F::zero(), |acc, (j, v)| acc.add(&v.mul(&x[*j])))
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult<F> {
    Optimal { value: F, x: Vec<F>, dual: Vec<F> },
    Infeasible { farkas: Vec<F> },
    Unbounded { x: Vec<F>, ray: Vec<F> },
}

impl<F: OrderedField> LpResult<F> {
    pub fn status(&self) -> &'static str {
        match self {
            LpResult::Optimal { .. } => "optimal",
            LpResult::Infeasible { .. } => "infeasible",
            LpResult::Unbounded { .. } => "unbounded",
        }
    }

    pub fn value(&self) -> Option<&F> {
        match self {
            LpResult::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn to_json(&self, p: &LpProblem<F>) -> Value {
        let named = |v: &[F]| -> Value {
            v.iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(j, x)| json!([p.names[j], x.to_string()]))
                .collect()
        };
        let rows = |v: &[F]| -> Value {
            v.iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, x)| json!([i, x.to_string()]))
                .collect()
        };
        match self {
            LpResult::Optimal { value, x, dual } => json!({
                "status": "optimal", "value": value.to_string(), "primal": named(x), "dual": rows(dual),
            }),
            LpResult::Infeasible { farkas } => json!({ "status": "infeasible", "farkas": rows(farkas) }),
            LpResult::Unbounded { x, ray } => json!({ "status": "unbounded", "primal": named(x), "ray": named(ray) }),
        }
    }
}

/// `|v| ≤ tol`; `tol` is zero in exact arithmetic.
fn near_zero<F: OrderedField>(v: &F, tol: &F) -> bool {
    v.sub(tol).sign() != Ordering::Greater && v.add(tol).sign() != Ordering::Less
}

fn at_least<F: OrderedField>(v: &F, bound: &F, tol: &F) -> bool {
    v.sub(bound).add(tol).sign() != Ordering::Less
}

fn row_ok<F: OrderedField>(lhs: &F, rel: Relation, rhs: &F, tol: &F) -> bool {
    match rel {
        Relation::Le => at_least(rhs, lhs, tol),
        Relation::Ge => at_least(lhs, rhs, tol),
        Relation::Eq => near_zero(&lhs.sub(rhs), tol),
    }
}

/// Sign admissible for a multiplier on a row of the maximization form.
fn multiplier_ok<F: OrderedField>(y: &F, rel: Relation, tol: &F) -> bool {
    match rel {
        Relation::Le => at_least(y, &F::zero(), tol),
        Relation::Ge => at_least(&F::zero(), y, tol),
        Relation::Eq => true,
    }
}

pub fn check_primal<F: OrderedField>(p: &LpProblem<F>, x: &[F], tol: &F) -> Result<(), LpError> {
    if x.len() != p.num_vars() {
        return Err(LpError::CertificateRejected("primal length".into()));
    }
    if let Some(j) = x.iter().position(|v| !at_least(v, &F::zero(), tol)) {
        return Err(LpError::CertificateRejected(format!("x[{j}] is negative")));
    }
    for (i, row) in p.constraints.iter().enumerate() {
        if !row_ok(&dot(&row.coeffs, x), row.relation, &row.rhs, tol) {
            return Err(LpError::CertificateRejected(format!("row {i} violated")));
        }
    }
    Ok(())
}

/// Re-checks a result against the problem by substitution alone.
pub fn verify<F: OrderedField>(p: &LpProblem<F>, r: &LpResult<F>, tol: &F) -> Result<(), LpError> {
    p.validate()?;
    let m = p.constraints.len();
    let flip = p.sense == Sense::Minimize;
    let signed = |y: &[F]| -> Vec<F> { y.iter().map(|v| if flip { v.neg() } else { v.clone() }).collect() };
    match r {
        LpResult::Optimal { value, x, dual } => {
            check_primal(p, x, tol)?;
            if dual.len() != m {
                return Err(LpError::CertificateRejected("dual length".into()));
            }
            let cx = if p.sense == Sense::Feasibility { F::zero() } else { p.objective_at(x) };
            if !near_zero(&cx.sub(value), tol) {
                return Err(LpError::CertificateRejected("primal objective differs from value".into()));
            }
            let y = signed(dual);
            let c = p.max_costs();
            for (i, row) in p.constraints.iter().enumerate() {
                if !multiplier_ok(&y[i], row.relation, tol) {
                    return Err(LpError::CertificateRejected(format!("dual sign on row {i}")));
                }
            }
            for (j, (ya, cj)) in p.transpose_apply(&y).iter().zip(&c).enumerate() {
                if !at_least(ya, cj, tol) {
                    return Err(LpError::CertificateRejected(format!("dual infeasible at column {j}")));
                }
            }
            let yb = y.iter().zip(&p.constraints).fold(F::zero(), |acc, (yi, row)| acc.add(&yi.mul(&row.rhs)));
            let target = if flip { value.neg() } else { value.clone() };
            if !near_zero(&yb.sub(&target), tol) {
                return Err(LpError::CertificateRejected("dual objective differs from value".into()));
            }
            Ok(())
        }
        LpResult::Infeasible { farkas } => {
            if farkas.len() != m {
                return Err(LpError::CertificateRejected("farkas length".into()));
            }
            for (i, row) in p.constraints.iter().enumerate() {
                if !multiplier_ok(&farkas[i], row.relation, tol) {
                    return Err(LpError::CertificateRejected(format!("farkas sign on row {i}")));
                }
            }
            if let Some(j) = p.transpose_apply(farkas).iter().position(|v| !at_least(v, &F::zero(), tol)) {
                return Err(LpError::CertificateRejected(format!("farkas column {j} negative")));
            }
            let yb = farkas.iter().zip(&p.constraints).fold(F::zero(), |acc, (yi, row)| acc.add(&yi.mul(&row.rhs)));
            if at_least(&yb, &F::zero(), tol) {
                return Err(LpError::CertificateRejected("farkas bound is not negative".into()));
            }
            Ok(())
        }
        LpResult::Unbounded { x, ray } => {
            check_primal(p, x, tol)?;
            if ray.len() != p.num_vars() || ray.iter().any(|v| !at_least(v, &F::zero(), tol)) {
                return Err(LpError::CertificateRejected("ray must be nonnegative".into()));
            }
            for (i, row) in p.constraints.iter().enumerate() {
                if !row_ok(&dot(&row.coeffs, ray), row.relation, &F::zero(), tol) {
                    return Err(LpError::CertificateRejected(format!("ray leaves row {i}")));
                }
            }
            let c = p.max_costs();
            let cr = c.iter().zip(ray).fold(F::zero(), |acc, (a, b)| acc.add(&a.mul(b)));
            if at_least(&F::zero(), &cr, tol) {
                return Err(LpError::CertificateRejected("ray does not improve the objective".into()));
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions<F> {
    pub cap: usize,
    pub rule: PivotRule,
    /// Certificate residual tolerance; zero for exact fields.
    pub tol: F,
}

impl<F: OrderedField> Default for SolveOptions<F> {
    fn default() -> Self {
        SolveOptions { cap: DEFAULT_VARIABLE_CAP, rule: PivotRule::default(), tol: F::zero() }
    }
}

/// Solves with default options and verifies the certificate exactly.
pub fn lp_solve<F: OrderedField>(p: &LpProblem<F>) -> Result<LpResult<F>, LpError> {
    lp_solve_with(p, &SolveOptions::default())
}

/// Solves, then verifies the certificate with residuals up to `opts.tol`.
pub fn lp_solve_with<F: OrderedField>(p: &LpProblem<F>, opts: &SolveOptions<F>) -> Result<LpResult<F>, LpError> {
    let r = solve_unchecked(p, opts.cap, opts.rule)?;
    verify(p, &r, &opts.tol)?;
    Ok(r)
}

type SparseRow<F> = Vec<(usize, F)>;

fn entry<F: OrderedField>(row: &SparseRow<F>, col: usize) -> Option<&F> {
    row.binary_search_by_key(&col, |(j, _)| *j).ok().map(|k| &row[k].1)
}

/// `row − f·prow`, both sorted by column.
fn axpy<F: OrderedField>(row: &SparseRow<F>, f: &F, prow: &SparseRow<F>) -> SparseRow<F> {
    let mut out = Vec::with_capacity(row.len() + prow.len());
    let (mut i, mut k) = (0, 0);
    while i < row.len() || k < prow.len() {
        let take_row = k == prow.len() || (i < row.len() && row[i].0 < prow[k].0);
        let take_p = i == row.len() || (k < prow.len() && prow[k].0 < row[i].0);
        if take_row {
            out.push(row[i].clone());
            i += 1;
        } else if take_p {
            out.push((prow[k].0, prow[k].1.mul(f).neg()));
            k += 1;
        } else {
            let v = row[i].1.sub(&prow[k].1.mul(f));
            if !v.is_zero() {
                out.push((row[i].0, v));
            }
            i += 1;
            k += 1;
        }
    }
    out
}

/// Entering and leaving rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Largest reduced cost; ratio ties broken lexicographically on the
    /// rows of `B⁻¹`, which rules out cycling.
    #[default]
    DantzigLexicographic,
    /// Smallest improving column and smallest leaving basic column.
    Bland,
}

struct Tableau<F> {
    rows: Vec<SparseRow<F>>,
    rhs: Vec<F>,
    basis: Vec<usize>,
    /// Reduced costs `c_j − c_Bᵀ B⁻¹ A_j`.
    z: Vec<F>,
    artificial: Vec<bool>,
    /// Columns of the starting identity basis; in the tableau they hold `B⁻¹`.
    unit: Vec<bool>,
    rule: PivotRule,
    pivots: usize,
    degenerate: usize,
}

enum Step {
    Optimal,
    Unbounded(usize),
    Pivoted,
}

impl<F: OrderedField> Tableau<F> {
    fn pivot(&mut self, r: usize, q: usize) {
        let piv = entry(&self.rows[r], q).expect("pivot entry").clone();
        let inv = F::one().div(&piv);
        for (_, v) in self.rows[r].iter_mut() {
            *v = v.mul(&inv);
        }
        self.rhs[r] = self.rhs[r].mul(&inv);
        let prow = std::mem::take(&mut self.rows[r]);
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = entry(&self.rows[i], q).cloned() {
                self.rows[i] = axpy(&self.rows[i], &f, &prow);
                self.rhs[i] = self.rhs[i].sub(&f.mul(&self.rhs[r]));
            }
        }
        let dq = self.z[q].clone();
        if !dq.is_zero() {
            for (j, v) in &prow {
                self.z[*j] = self.z[*j].sub(&dq.mul(v));
            }
        }
        self.rows[r] = prow;
        self.basis[r] = q;
        self.pivots += 1;
    }

    /// Degenerate pivots putting structural columns (sparsest first) in
    /// place of the artificials of zero right-hand-side rows. No right-hand
    /// side changes, but rows may lose lexicographic positivity, which is
    /// why long degenerate runs fall back to Bland's rule.
    fn crash(&mut self, n: usize) {
        let mut count = vec![0usize; n];
        for row in &self.rows {
            for (j, _) in row.iter().filter(|(j, _)| *j < n) {
                count[*j] += 1;
            }
        }
        let mut used = vec![false; n];
        for i in 0..self.rows.len() {
            if !self.artificial[self.basis[i]] || !self.rhs[i].is_zero() {
                continue;
            }
            let q = self.rows[i]
                .iter()
                .filter(|(j, _)| *j < n && !used[*j])
                .min_by_key(|(j, _)| count[*j])
                .map(|(j, _)| *j);
            if let Some(q) = q {
                used[q] = true;
                self.pivot(i, q);
            }
        }
    }

    /// Compares `B⁻¹` rows `i` and `k` scaled by `1/ti` and `1/tk`.
    fn lex_cmp(&self, i: usize, ti: &F, k: usize, tk: &F) -> Ordering {
        let mut a = self.rows[i].iter().filter(|(j, _)| self.unit[*j]).peekable();
        let mut b = self.rows[k].iter().filter(|(j, _)| self.unit[*j]).peekable();
        loop {
            let (va, vb) = match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                (Some((ja, _)), Some((jb, _))) if ja == jb => {
                    let (_, x) = a.next().expect("peeked");
                    let (_, y) = b.next().expect("peeked");
                    (x.div(ti), y.div(tk))
                }
                (Some((ja, _)), Some((jb, _))) if ja < jb => (a.next().expect("peeked").1.div(ti), F::zero()),
                (Some(_), None) => (a.next().expect("peeked").1.div(ti), F::zero()),
                _ => (F::zero(), b.next().expect("peeked").1.div(tk)),
            };
            match va.cmp_field(&vb) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
    }

    fn step(&mut self, allow_artificial: bool) -> Result<Step, LpError> {
        if self.pivots >= PIVOT_LIMIT {
            return Err(LpError::PivotLimit);
        }
        let mut q: Option<usize> = None;
        for (j, d) in self.z.iter().enumerate() {
            if !d.is_positive() || (!allow_artificial && self.artificial[j]) {
                continue;
            }
            if self.rule == PivotRule::Bland {
                q = Some(j);
                break;
            }
            if q.is_none_or(|k| d.cmp_field(&self.z[k]) == Ordering::Greater) {
                q = Some(j);
            }
        }
        let Some(q) = q else { return Ok(Step::Optimal) };
        let mut best: Option<(usize, F, F)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let Some(t) = entry(row, q) else { continue };
            if !t.is_positive() {
                continue;
            }
            let ratio = self.rhs[i].div(t);
            let better = match &best {
                None => true,
                Some((b, br, bt)) => match ratio.cmp_field(br) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => match self.rule {
                        PivotRule::Bland => self.basis[i] < self.basis[*b],
                        PivotRule::DantzigLexicographic => self.lex_cmp(i, t, *b, bt) == Ordering::Less,
                    },
                },
            };
            if better {
                best = Some((i, ratio, t.clone()));
            }
        }
        let Some((r, ratio, _)) = best else { return Ok(Step::Unbounded(q)) };
        if ratio.is_zero() {
            self.degenerate += 1;
            if self.degenerate >= DEGENERATE_LIMIT {
                self.rule = PivotRule::Bland;
            }
        } else {
            self.degenerate = 0;
        }
        self.pivot(r, q);
        Ok(Step::Pivoted)
    }

    fn set_costs(&mut self, c: &[F]) {
        self.z = c.to_vec();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &c[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in row {
                self.z[*j] = self.z[*j].sub(&cb.mul(v));
            }
        }
    }
}

fn solve_unchecked<F: OrderedField>(p: &LpProblem<F>, cap: usize, rule: PivotRule) -> Result<LpResult<F>, LpError> {
    p.validate()?;
    let n = p.num_vars();
    if n > cap {
        return Err(LpError::CapExceeded { vars: n, cap });
    }
    let m = p.constraints.len();
    let mut rows: Vec<SparseRow<F>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut flipped = vec![false; m];
    let mut rels = Vec::with_capacity(m);
    for (i, c) in p.constraints.iter().enumerate() {
        let mut dense: std::collections::BTreeMap<usize, F> = std::collections::BTreeMap::new();
        for (j, v) in &c.coeffs {
            let e = dense.entry(*j).or_insert_with(F::zero);
            *e = e.add(v);
        }
        let mut row: SparseRow<F> = dense.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        let mut b = c.rhs.clone();
        let mut rel = c.relation;
        if b.is_negative() {
            flipped[i] = true;
            b = b.neg();
            for (_, v) in row.iter_mut() {
                *v = v.neg();
            }
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rows.push(row);
        rhs.push(b);
        rels.push(rel);
    }
    // Auxiliary columns: slack or surplus, then artificial, per row.
    let mut ncols = n;
    let mut unit = vec![0; m];
    let mut artificial = vec![false; n];
    for i in 0..m {
        match rels[i] {
            Relation::Le => {
                rows[i].push((ncols, F::one()));
                artificial.push(false);
                unit[i] = ncols;
                ncols += 1;
            }
            Relation::Ge => {
                rows[i].push((ncols, F::one().neg()));
                rows[i].push((ncols + 1, F::one()));
                artificial.extend([false, true]);
                unit[i] = ncols + 1;
                ncols += 2;
            }
            Relation::Eq => {
                rows[i].push((ncols, F::one()));
                artificial.push(true);
                unit[i] = ncols;
                ncols += 1;
            }
        }
    }
    let mut t = Tableau {
        rows,
        rhs,
        basis: unit.clone(),
        z: vec![F::zero(); ncols],
        unit: {
            let mut u = vec![false; ncols];
            for &c in &unit {
                u[c] = true;
            }
            u
        },
        artificial,
        rule,
        pivots: 0,
        degenerate: 0,
    };
    t.crash(n);
    let phase1: Vec<F> = t.artificial.iter().map(|&a| if a { F::one().neg() } else { F::zero() }).collect();
    t.set_costs(&phase1);
    while let Step::Pivoted = t.step(true)? {}
    let w = (0..m).fold(F::zero(), |acc, i| acc.add(&phase1[t.basis[i]].mul(&t.rhs[i])));
    let row_duals = |t: &Tableau<F>, costs: &[F]| -> Vec<F> {
        (0..m)
            .map(|i| {
                let y = costs[unit[i]].sub(&t.z[unit[i]]);
                if flipped[i] {
                    y.neg()
                } else {
                    y
                }
            })
            .collect()
    };
    if w.is_negative() {
        return Ok(LpResult::Infeasible { farkas: row_duals(&t, &phase1) });
    }
    // Drive zero-level artificials out of the basis or drop redundant rows.
    let mut i = 0;
    while i < t.rows.len() {
        if t.artificial[t.basis[i]] {
            let q = t.rows[i].iter().find(|(j, _)| !t.artificial[*j]).map(|(j, _)| *j);
            match q {
                Some(q) => t.pivot(i, q),
                None => {
                    t.rows.swap_remove(i);
                    t.rhs.swap_remove(i);
                    t.basis.swap_remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut phase2 = p.max_costs();
    phase2.resize(ncols, F::zero());
    t.set_costs(&phase2);
    let outcome = loop {
        match t.step(false)? {
            Step::Pivoted => continue,
            other => break other,
        }
    };
    let mut x = vec![F::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs[i].clone();
        }
    }
    match outcome {
        Step::Unbounded(q) => {
            let mut ray = vec![F::zero(); n];
            if q < n {
                ray[q] = F::one();
            }
            for (i, &b) in t.basis.iter().enumerate() {
                if b < n {
                    if let Some(v) = entry(&t.rows[i], q) {
                        ray[b] = v.neg();
                    }
                }
            }
            Ok(LpResult::Unbounded { x, ray })
        }
        _ => {
            let mut dual = row_duals(&t, &phase2);
            let mut value = p.objective_at(&x);
            match p.sense {
                Sense::Minimize => {
                    for v in &mut dual {
                        *v = v.neg();
                    }
                }
                Sense::Feasibility => {
                    value = F::zero();
                    dual = vec![F::zero(); m];
                }
                Sense::Maximize => {}
            }
            Ok(LpResult::Optimal { value, x, dual })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int, Rational, Surd};

    fn r(n: i64, d: i64) -> Rational {
        rat(n, d)
    }

    #[test]
    fn half_bound() {
        let mut p = LpProblem::new(Sense::Maximize);
        let x = p.add_var("x");
        p.add_constraint(vec![(x, r(1, 1))], Relation::Le, r(1, 2));
        p.objective = vec![(x, r(1, 1))];
        let LpResult::Optimal { value, dual, .. } = lp_solve(&p).unwrap() else { panic!() };
        assert_eq!(value, r(1, 2));
        assert_eq!(dual, vec![r(1, 1)]);
    }

    #[test]
    fn contradictory_bounds() {
        let mut p = LpProblem::new(Sense::Feasibility);
        let x = p.add_var("x");
        p.add_constraint(vec![(x, r(1, 1))], Relation::Le, r(0, 1));
        p.add_constraint(vec![(x, r(1, 1))], Relation::Ge, r(1, 1));
        let res = lp_solve(&p).unwrap();
        assert!(matches!(res, LpResult::Infeasible { .. }));
    }

    #[test]
    fn unbounded_ray() {
        let mut p = LpProblem::new(Sense::Maximize);
        let x = p.add_var("x");
        let y = p.add_var("y");
        p.add_constraint(vec![(x, r(1, 1)), (y, r(-1, 1))], Relation::Le, r(1, 1));
        p.objective = vec![(x, r(1, 1))];
        assert!(matches!(lp_solve(&p).unwrap(), LpResult::Unbounded { .. }));
    }

    #[test]
    fn minimization_with_equalities() {
        // min x + 2y s.t. x + y = 3, x ≤ 1, y ≥ 0  -> x = 1, y = 2, value 5
        let mut p = LpProblem::new(Sense::Minimize);
        let x = p.add_var("x");
        let y = p.add_var("y");
        p.add_constraint(vec![(x, r(1, 1)), (y, r(1, 1))], Relation::Eq, r(3, 1));
        p.add_constraint(vec![(x, r(1, 1))], Relation::Le, r(1, 1));
        p.objective = vec![(x, r(1, 1)), (y, r(2, 1))];
        let res = lp_solve(&p).unwrap();
        assert_eq!(res.value(), Some(&r(5, 1)));
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // max x s.t. -x ≥ -4, x + y = 2, 2x + 2y = 4
        let mut p = LpProblem::new(Sense::Maximize);
        let x = p.add_var("x");
        let y = p.add_var("y");
        p.add_constraint(vec![(x, r(-1, 1))], Relation::Ge, r(-4, 1));
        p.add_constraint(vec![(x, r(1, 1)), (y, r(1, 1))], Relation::Eq, r(2, 1));
        p.add_constraint(vec![(x, r(2, 1)), (y, r(2, 1))], Relation::Eq, r(4, 1));
        p.objective = vec![(x, r(1, 1))];
        assert_eq!(lp_solve(&p).unwrap().value(), Some(&r(2, 1)));
    }

    #[test]
    fn surd_coefficients() {
        // max x s.t. √2 x ≤ 1  -> 1/√2 = √2/2
        let mut p = LpProblem::new(Sense::Maximize);
        let x = p.add_var("x");
        p.add_constraint(vec![(x, Surd::sqrt2())], Relation::Le, Surd::from_ratio(1, 1));
        p.objective = vec![(x, Surd::from_ratio(1, 1))];
        assert_eq!(lp_solve(&p).unwrap().value(), Some(&Surd::new(r(0, 1), r(1, 2))));
    }

    #[test]
    fn tampered_dual_is_rejected() {
        let mut p = LpProblem::new(Sense::Maximize);
        let x = p.add_var("x");
        p.add_constraint(vec![(x, rat_int(1))], Relation::Le, r(1, 2));
        p.objective = vec![(x, rat_int(1))];
        let mut res = lp_solve(&p).unwrap();
        if let LpResult::Optimal { dual, .. } = &mut res {
            dual[0] = r(1, 2);
        }
        assert!(verify(&p, &res, &rat_int(0)).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let mut p: LpProblem<Rational> = LpProblem::new(Sense::Feasibility);
        p.add_var("a");
        p.add_var("b");
        assert_eq!(lp_solve_with(&p, &SolveOptions { cap: 1, ..Default::default() }), Err(LpError::CapExceeded { vars: 2, cap: 1 }));
    }
}
