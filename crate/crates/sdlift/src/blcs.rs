//! Binary linear constraint systems over ±1 variables.
//!
//! Constraint `j` reads `∏_{v ∈ vars_j} v = parity_j`. Constraint variable
//! lists are kept in declaration order of the variables, which is the
//! canonical form used for equality and serialization.

use crate::gf2;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

pub const DEFAULT_SEARCH_CAP: usize = 24;
pub const DEFAULT_ISO_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlcsError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("constraint {0} is empty")]
    EmptyConstraint(usize),
    #[error("constraint {0} repeats variable `{1}`")]
    RepeatedInConstraint(usize, String),
    #[error("constraint {0} has parity {1}; expected +1 or -1")]
    BadParity(usize, i64),
    #[error("{count} variables exceed the search cap of {cap}")]
    CapExceeded { count: usize, cap: usize },
    #[error("system admits a classical solution")]
    Realizable,
    #[error("system is not an arrangement")]
    NotArrangement,
    #[error("invalid json: {0}")]
    Json(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub vars: Vec<String>,
    pub parity: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawBlcs", into = "RawBlcs")]
pub struct Blcs {
    variables: Vec<String>,
    constraints: Vec<Constraint>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct RawBlcs {
    variables: Vec<String>,
    constraints: Vec<RawConstraint>,
}

#[derive(Serialize, Deserialize)]
struct RawConstraint {
    vars: Vec<String>,
    parity: i64,
}

impl TryFrom<RawBlcs> for Blcs {
    type Error = BlcsError;
    fn try_from(raw: RawBlcs) -> Result<Self, Self::Error> {
        let cs = raw
            .constraints
            .into_iter()
            .enumerate()
            .map(|(j, c)| match c.parity {
                1 | -1 => Ok((c.vars, c.parity as i8)),
                p => Err(BlcsError::BadParity(j, p)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Blcs::new(raw.variables, cs)
    }
}

impl From<Blcs> for RawBlcs {
    fn from(s: Blcs) -> Self {
        RawBlcs {
            variables: s.variables,
            constraints: s
                .constraints
                .into_iter()
                .map(|c| RawConstraint { vars: c.vars, parity: c.parity as i64 })
                .collect(),
        }
    }
}

impl PartialEq for Blcs {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.constraints == other.constraints
    }
}

impl Eq for Blcs {}

/// Total ±1 assignment, keyed by variable id.
pub type Assignment = BTreeMap<String, i8>;

/// One step of the standardization procedure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Negate(String),
    Split { var: String, into: [String; 2] },
}

#[derive(Debug, Clone)]
pub struct Standardized {
    pub system: Blcs,
    /// Which case of the standard-form construction applied (0..=3).
    pub case: u8,
    pub steps: Vec<Step>,
}

/// Variable bijection plus sign flips carrying one system onto another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isomorphism {
    /// `(var in a, image in b)` in declaration order of `a`.
    pub map: Vec<(String, String)>,
    /// Sign applied to each variable of `a` (−1 means flipped).
    pub signs: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl IntersectionGraph {
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.edges.binary_search(&(a, b)).is_ok()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * (self.n.saturating_sub(1)) / 2
    }

    /// True when the vertices split into the given sides with every cross
    /// pair adjacent and no pair inside a side adjacent.
    pub fn is_complete_bipartite(&self, left: &[usize], right: &[usize]) -> bool {
        let mut seen: Vec<usize> = left.iter().chain(right).copied().collect();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.n || left.len() + right.len() != self.n {
            return false;
        }
        let inside = |side: &[usize]| {
            side.iter().all(|&i| side.iter().all(|&j| i == j || !self.has_edge(i, j)))
        };
        let across = left.iter().all(|&i| right.iter().all(|&j| self.has_edge(i, j)));
        inside(left) && inside(right) && across
    }
}

/// Reduced system after fixing some variables, plus constraints the fixed
/// values violate outright.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub system: Blcs,
    /// Index in the reduced system -> index in the source system.
    pub origin: Vec<usize>,
    pub violated: Vec<usize>,
}

impl Blcs {
    pub fn new<S: Into<String>>(
        variables: Vec<S>,
        constraints: Vec<(Vec<String>, i8)>,
    ) -> Result<Self, BlcsError> {
        let variables: Vec<String> = variables.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(BlcsError::DuplicateVariable(v.clone()));
            }
        }
        let mut out = Vec::with_capacity(constraints.len());
        for (j, (vars, parity)) in constraints.into_iter().enumerate() {
            if parity != 1 && parity != -1 {
                return Err(BlcsError::BadParity(j, parity as i64));
            }
            if vars.is_empty() {
                return Err(BlcsError::EmptyConstraint(j));
            }
            let mut ids = Vec::with_capacity(vars.len());
            for v in &vars {
                let &i = index.get(v).ok_or_else(|| BlcsError::UnknownVariable(v.clone()))?;
                ids.push(i);
            }
            ids.sort_unstable();
            if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
                return Err(BlcsError::RepeatedInConstraint(j, variables[w[0]].clone()));
            }
            out.push(Constraint {
                vars: ids.into_iter().map(|i| variables[i].clone()).collect(),
                parity,
            });
        }
        Ok(Blcs { variables, constraints: out, index })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_index(&self, v: &str) -> Result<usize, BlcsError> {
        self.index.get(v).copied().ok_or_else(|| BlcsError::UnknownVariable(v.to_string()))
    }

    pub fn contains_var(&self, v: &str) -> bool {
        self.index.contains_key(v)
    }

    /// Variable indices of each constraint.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        self.constraints
            .iter()
            .map(|c| c.vars.iter().map(|v| self.index[v]).collect())
            .collect()
    }

    pub fn degree(&self, v: &str) -> Result<usize, BlcsError> {
        self.var_index(v)?;
        Ok(self.constraints.iter().filter(|c| c.vars.iter().any(|w| w == v)).count())
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.variables.len()];
        for c in &self.constraints {
            for v in &c.vars {
                deg[self.index[v]] += 1;
            }
        }
        deg
    }

    pub fn system_parity(&self) -> i8 {
        self.constraints.iter().map(|c| c.parity).product()
    }

    pub fn negate_variable(&self, v: &str) -> Result<Blcs, BlcsError> {
        self.var_index(v)?;
        let mut out = self.clone();
        for c in &mut out.constraints {
            if c.vars.iter().any(|w| w == v) {
                c.parity = -c.parity;
            }
        }
        Ok(out)
    }

    /// Fresh ids for the two halves of a split, unique within the system.
    pub fn split_names(&self, v: &str) -> [String; 2] {
        let fresh = |k: usize| {
            let mut name = format!("{v}.{k}");
            while self.contains_var(&name) {
                name.push('\'');
            }
            name
        };
        [fresh(1), fresh(2)]
    }

    pub fn split_variable(&self, v: &str) -> Result<Blcs, BlcsError> {
        self.split_variable_named(v).map(|(s, _)| s)
    }

    /// Splits `v` into `v.1 · v.2`; the halves take `v`'s declaration slot
    /// and the constraint `v.1 · v.2 = +1` is appended.
    pub fn split_variable_named(&self, v: &str) -> Result<(Blcs, [String; 2]), BlcsError> {
        let k = self.var_index(v)?;
        let names = self.split_names(v);
        let mut vars = self.variables.clone();
        vars.splice(k..=k, names.iter().cloned());
        let mut cs: Vec<(Vec<String>, i8)> = self
            .constraints
            .iter()
            .map(|c| {
                let mut out = Vec::with_capacity(c.vars.len() + 1);
                for w in &c.vars {
                    if w == v {
                        out.extend(names.iter().cloned());
                    } else {
                        out.push(w.clone());
                    }
                }
                (out, c.parity)
            })
            .collect();
        cs.push((names.to_vec(), 1));
        Ok((Blcs::new(vars, cs)?, names))
    }

    /// Standard form: even degrees and parity −1, via negations and splits.
    pub fn standardize(&self) -> Result<Standardized, BlcsError> {
        self.standardize_with_cap(DEFAULT_SEARCH_CAP)
    }

    pub fn standardize_with_cap(&self, cap: usize) -> Result<Standardized, BlcsError> {
        if self.has_classical_solution_with_cap(cap)?.is_some() {
            return Err(BlcsError::Realizable);
        }
        let mut sys = self.clone();
        let mut steps = Vec::new();
        let odd = |s: &Blcs| -> Vec<String> {
            let deg = s.degrees();
            s.variables.iter().zip(deg).filter(|(_, d)| d % 2 == 1).map(|(v, _)| v.clone()).collect()
        };
        let parity = sys.system_parity();
        let has_odd = !odd(&sys).is_empty();
        let case = match (parity, has_odd) {
            (-1, false) => 0,
            (-1, true) => 1,
            (_, true) => 2,
            (_, false) => 3,
        };
        if case == 3 {
            let v = sys.variables[0].clone();
            let (next, into) = sys.split_variable_named(&v)?;
            steps.push(Step::Split { var: v, into });
            sys = next;
        }
        if case >= 2 {
            let v = odd(&sys)[0].clone();
            sys = sys.negate_variable(&v)?;
            steps.push(Step::Negate(v));
        }
        if case >= 1 {
            for v in odd(&sys) {
                let (next, into) = sys.split_variable_named(&v)?;
                steps.push(Step::Split { var: v, into });
                sys = next;
            }
        }
        debug_assert!(sys.lemma1_check());
        Ok(Standardized { system: sys, case, steps })
    }

    pub fn has_classical_solution(&self) -> Result<Option<Assignment>, BlcsError> {
        self.has_classical_solution_with_cap(DEFAULT_SEARCH_CAP)
    }

    /// Exhaustive depth-first search in declaration order, trying +1 before
    /// −1, pruning as soon as a constraint is fully assigned and violated.
    /// The witness is the least satisfying assignment in that order.
    pub fn has_classical_solution_with_cap(
        &self,
        cap: usize,
    ) -> Result<Option<Assignment>, BlcsError> {
        let p = self.variables.len();
        if p > cap {
            return Err(BlcsError::CapExceeded { count: p, cap });
        }
        let inc = self.incidence();
        // closing[i]: constraints whose last variable is i.
        let mut closing: Vec<Vec<usize>> = vec![Vec::new(); p];
        for (j, ids) in inc.iter().enumerate() {
            closing[*ids.iter().max().expect("non-empty")].push(j);
        }
        let mut vals = vec![1i8; p];
        fn dfs(
            i: usize,
            vals: &mut [i8],
            inc: &[Vec<usize>],
            closing: &[Vec<usize>],
            parities: &[i8],
        ) -> bool {
            if i == vals.len() {
                return true;
            }
            for s in [1i8, -1] {
                vals[i] = s;
                let ok = closing[i]
                    .iter()
                    .all(|&j| inc[j].iter().map(|&k| vals[k]).product::<i8>() == parities[j]);
                if ok && dfs(i + 1, vals, inc, closing, parities) {
                    return true;
                }
            }
            false
        }
        let parities: Vec<i8> = self.constraints.iter().map(|c| c.parity).collect();
        if dfs(0, &mut vals, &inc, &closing, &parities) {
            Ok(Some(self.variables.iter().cloned().zip(vals).collect()))
        } else {
            Ok(None)
        }
    }

    /// Solvability by Gaussian elimination; an independent oracle for the
    /// exhaustive search.
    pub fn solvable_gf2(&self) -> bool {
        let p = self.variables.len();
        let eqs: Vec<gf2::Equation> = self
            .incidence()
            .into_iter()
            .zip(&self.constraints)
            .map(|(ids, c)| gf2::Equation::new(p, ids, c.parity == -1))
            .collect();
        gf2::solve(p, &eqs).is_some()
    }

    pub fn satisfies(&self, a: &Assignment) -> bool {
        self.constraints
            .iter()
            .all(|c| c.vars.iter().map(|v| a.get(v).copied().unwrap_or(0)).product::<i8>() == c.parity)
    }

    /// Even degrees and parity −1, which rules out classical solutions.
    pub fn lemma1_check(&self) -> bool {
        self.system_parity() == -1 && self.degrees().iter().all(|d| d % 2 == 0)
    }

    pub fn is_arrangement(&self) -> bool {
        self.degrees().iter().all(|&d| d == 2)
    }

    /// On arrangements, realizability is decided by parities alone: each
    /// connected component of constraints must have parity +1. For a
    /// connected arrangement that is the system parity.
    pub fn arkhipov_realizable(&self) -> Result<bool, BlcsError> {
        if !self.is_arrangement() {
            return Err(BlcsError::NotArrangement);
        }
        let n = self.constraints.len();
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], mut i: usize) -> usize {
            while root[i] != i {
                root[i] = root[root[i]];
                i = root[i];
            }
            i
        }
        let mut owner: Vec<Option<usize>> = vec![None; self.variables.len()];
        for (j, ids) in self.incidence().into_iter().enumerate() {
            for v in ids {
                if let Some(k) = owner[v].replace(j) {
                    let (a, b) = (find(&mut root, j), find(&mut root, k));
                    root[a] = b;
                }
            }
        }
        let mut parity = vec![1i8; n];
        for (j, c) in self.constraints.iter().enumerate() {
            let r = find(&mut root, j);
            parity[r] *= c.parity;
        }
        Ok(parity.iter().all(|&p| p == 1))
    }

    pub fn intersection_graph(&self) -> IntersectionGraph {
        let sets: Vec<HashSet<&String>> =
            self.constraints.iter().map(|c| c.vars.iter().collect()).collect();
        let mut edges = Vec::new();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if !sets[i].is_disjoint(&sets[j]) {
                    edges.push((i, j));
                }
            }
        }
        IntersectionGraph { n: sets.len(), edges }
    }

    /// Fixes the assigned variables; fully assigned constraints disappear
    /// (recorded in `violated` when they fail).
    pub fn reduce(&self, fixed: &HashMap<String, i8>) -> Reduction {
        let vars: Vec<String> =
            self.variables.iter().filter(|v| !fixed.contains_key(*v)).cloned().collect();
        let mut cs = Vec::new();
        let mut origin = Vec::new();
        let mut violated = Vec::new();
        for (j, c) in self.constraints.iter().enumerate() {
            let mut sign = c.parity;
            let mut rest = Vec::new();
            for v in &c.vars {
                match fixed.get(v) {
                    Some(&s) => sign *= s,
                    None => rest.push(v.clone()),
                }
            }
            if rest.is_empty() {
                if sign != 1 {
                    violated.push(j);
                }
            } else {
                cs.push((rest, sign));
                origin.push(j);
            }
        }
        let system = Blcs::new(vars, cs).expect("reduction of a valid system is valid");
        Reduction { system, origin, violated }
    }

    pub fn is_isomorphic(&self, other: &Blcs) -> Result<Option<Isomorphism>, BlcsError> {
        self.is_isomorphic_with_cap(other, DEFAULT_ISO_CAP)
    }

    /// Searches for a variable bijection and sign flips mapping this
    /// system's constraints onto `other`'s (as multisets).
    pub fn is_isomorphic_with_cap(
        &self,
        other: &Blcs,
        cap: usize,
    ) -> Result<Option<Isomorphism>, BlcsError> {
        for s in [self, other] {
            if s.num_variables() > cap {
                return Err(BlcsError::CapExceeded { count: s.num_variables(), cap });
            }
        }
        iso::search(self, other)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Blcs, BlcsError> {
        serde_json::from_str(s).map_err(|e| BlcsError::Json(e.to_string()))
    }
}

mod iso {
    use super::*;

    struct Shape {
        inc: Vec<Vec<usize>>,
        parity: Vec<i8>,
        /// var -> constraints containing it
        occ: Vec<Vec<usize>>,
        deg: Vec<usize>,
    }

    impl Shape {
        fn of(s: &Blcs) -> Shape {
            let inc = s.incidence();
            let mut occ = vec![Vec::new(); s.num_variables()];
            for (j, ids) in inc.iter().enumerate() {
                for &i in ids {
                    occ[i].push(j);
                }
            }
            let deg = occ.iter().map(Vec::len).collect();
            let parity = s.constraints.iter().map(|c| c.parity).collect();
            Shape { inc, parity, occ, deg }
        }
    }

    fn sorted<T: Ord + Clone>(xs: &[T]) -> Vec<T> {
        let mut v = xs.to_vec();
        v.sort();
        v
    }

    pub(super) fn search(a: &Blcs, b: &Blcs) -> Result<Option<Isomorphism>, BlcsError> {
        if a.num_variables() != b.num_variables() || a.num_constraints() != b.num_constraints() {
            return Ok(None);
        }
        let sa = Shape::of(a);
        let sb = Shape::of(b);
        if sorted(&sa.deg) != sorted(&sb.deg) {
            return Ok(None);
        }
        let sizes = |s: &Shape| sorted(&s.inc.iter().map(Vec::len).collect::<Vec<_>>());
        if sizes(&sa) != sizes(&sb) {
            return Ok(None);
        }
        // Supports of b, with multiplicity.
        let mut supports_b: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (j, ids) in sb.inc.iter().enumerate() {
            supports_b.entry(sorted(ids)).or_default().push(j);
        }
        let order = bfs_order(&sa);
        let p = a.num_variables();
        let mut f: Vec<Option<usize>> = vec![None; p];
        let mut used = vec![false; p];
        let mut result = None;
        backtrack(0, &order, &sa, &sb, &supports_b, &mut f, &mut used, &mut result);
        Ok(result.map(|(f, signs): (Vec<usize>, Vec<i8>)| Isomorphism {
            map: (0..p).map(|i| (a.variables[i].clone(), b.variables[f[i]].clone())).collect(),
            signs,
        }))
    }

    /// Variables in breadth-first order along shared constraints, so partial
    /// maps close constraints early.
    fn bfs_order(s: &Shape) -> Vec<usize> {
        let p = s.deg.len();
        let mut seen = vec![false; p];
        let mut order = Vec::with_capacity(p);
        for start in 0..p {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &j in &s.occ[v] {
                    for &w in &s.inc[j] {
                        if !seen[w] {
                            seen[w] = true;
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        order
    }

    #[allow(clippy::too_many_arguments)]
    fn backtrack(
        k: usize,
        order: &[usize],
        sa: &Shape,
        sb: &Shape,
        supports_b: &HashMap<Vec<usize>, Vec<usize>>,
        f: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        result: &mut Option<(Vec<usize>, Vec<i8>)>,
    ) -> bool {
        if k == order.len() {
            let full: Vec<usize> = f.iter().map(|x| x.expect("total")).collect();
            if let Some(signs) = solve_signs(&full, sa, sb, supports_b) {
                *result = Some((full, signs));
                return true;
            }
            return false;
        }
        let v = order[k];
        for w in 0..sb.deg.len() {
            if used[w] || sb.deg[w] != sa.deg[v] {
                continue;
            }
            f[v] = Some(w);
            used[w] = true;
            if consistent(v, sa, sb, f) && backtrack(k + 1, order, sa, sb, supports_b, f, used, result)
            {
                return true;
            }
            f[v] = None;
            used[w] = false;
        }
        false
    }

    /// Every constraint through `v` must still fit inside some constraint of
    /// `b` of equal size that avoids images of variables outside it.
    fn consistent(v: usize, sa: &Shape, sb: &Shape, f: &[Option<usize>]) -> bool {
        sa.occ[v].iter().all(|&j| {
            let inside: HashSet<usize> = sa.inc[j].iter().filter_map(|&u| f[u]).collect();
            let count_a = sa.inc.iter().filter(|c| {
                c.len() == sa.inc[j].len()
                    && c.iter().filter_map(|&u| f[u]).collect::<HashSet<_>>() == inside
                    && c.iter().filter(|&&u| f[u].is_some()).count() == inside.len()
            });
            let needed = count_a.count();
            let available = sb
                .inc
                .iter()
                .filter(|c| {
                    c.len() == sa.inc[j].len()
                        && inside.iter().all(|w| c.contains(w))
                        && c.iter().all(|w| {
                            inside.contains(w) || !f.contains(&Some(*w))
                        })
                })
                .count();
            available >= needed
        })
    }

    /// Given a full bijection, finds signs `s` with β_a(c)·∏ s = β_b(image c)
    /// under some matching of equal-support constraints.
    fn solve_signs(
        f: &[usize],
        sa: &Shape,
        sb: &Shape,
        supports_b: &HashMap<Vec<usize>, Vec<usize>>,
    ) -> Option<Vec<i8>> {
        let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (j, ids) in sa.inc.iter().enumerate() {
            let img = sorted(&ids.iter().map(|&i| f[i]).collect::<Vec<_>>());
            groups.entry(img).or_default().push(j);
        }
        // For each support group, the admissible values of ∏ s over it.
        let mut choices: Vec<(Vec<usize>, Vec<bool>)> = Vec::new();
        for (img, js) in &groups {
            let bs = supports_b.get(img)?;
            if bs.len() != js.len() {
                return None;
            }
            let mut pa: Vec<i8> = js.iter().map(|&j| sa.parity[j]).collect();
            let mut pb: Vec<i8> = bs.iter().map(|&j| sb.parity[j]).collect();
            pa.sort_unstable();
            pb.sort_unstable();
            let mut opts = Vec::new();
            if pa == pb {
                opts.push(false);
            }
            let mut neg: Vec<i8> = pa.iter().map(|x| -x).collect();
            neg.sort_unstable();
            if neg == pb {
                opts.push(true);
            }
            if opts.is_empty() {
                return None;
            }
            choices.push((sa.inc[js[0]].clone(), opts));
        }
        let p = f.len();
        let ambiguous: Vec<usize> =
            (0..choices.len()).filter(|&g| choices[g].1.len() > 1).collect();
        // Ambiguous groups contribute at most a handful of branches in
        // practice; each branch is one GF(2) solve.
        let branches = 1usize << ambiguous.len().min(16);
        for mask in 0..branches {
            let eqs: Vec<gf2::Equation> = choices
                .iter()
                .enumerate()
                .map(|(g, (vars, opts))| {
                    let pick = match ambiguous.iter().position(|&x| x == g) {
                        Some(bit) => opts[(mask >> bit) & 1],
                        None => opts[0],
                    };
                    gf2::Equation::new(p, vars.iter().copied(), pick)
                })
                .collect();
            if let Some(x) = gf2::solve(p, &eqs) {
                return Some(x.into_iter().map(|b| if b { -1 } else { 1 }).collect());
            }
        }
        None
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn pick(vars: &[String], ids: &[usize]) -> Vec<String> {
    ids.iter().map(|&i| vars[i - 1].clone()).collect()
}

/// The 3×3 Magic Square: rows `v1..v3`, `v4..v6`, `v7..v9` then columns;
/// the third column has parity −1.
pub fn magic_square() -> Blcs {
    let vars = names("v", 9);
    let mut cs = Vec::new();
    for r in 0..3 {
        cs.push((pick(&vars, &[3 * r + 1, 3 * r + 2, 3 * r + 3]), 1));
    }
    for c in 0..3 {
        let parity = if c == 2 { -1 } else { 1 };
        cs.push((pick(&vars, &[c + 1, c + 4, c + 7]), parity));
    }
    Blcs::new(vars, cs).expect("valid")
}

/// Vertex pairs `(k, l)`, `k < l`, of the complete graph on `n` lines, in
/// lexicographic order; vertex `u_i` is the `i`-th pair.
pub fn star_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 1..=n {
        for l in k + 1..=n {
            out.push((k, l));
        }
    }
    out
}

/// The Magic Star (pentagram): five lines, any two meeting in one of ten
/// points `u1..u10`; line 1 has parity −1.
pub fn magic_star() -> Blcs {
    let pairs = star_pairs(5);
    let vars = names("u", pairs.len());
    let cs = (1..=5)
        .map(|k| {
            let ids: Vec<usize> = pairs
                .iter()
                .enumerate()
                .filter(|(_, &(a, b))| a == k || b == k)
                .map(|(i, _)| i + 1)
                .collect();
            (pick(&vars, &ids), if k == 1 { -1 } else { 1 })
        })
        .collect();
    Blcs::new(vars, cs).expect("valid")
}

/// `v1·v2 = +1`, `v1·v2 = −1`.
pub fn chsh_system() -> Blcs {
    let v = names("v", 2);
    Blcs::new(v.clone(), vec![(v.clone(), 1), (v, -1)]).expect("valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> Blcs {
        Blcs::new(vec!["v1", "v2"], vec![(vec!["v1".into(), "v2".into()], 1)]).unwrap()
    }

    #[test]
    fn magic_square_basics() {
        let ms = magic_square();
        assert!(ms.variables().iter().all(|v| ms.degree(v).unwrap() == 2));
        assert_eq!(ms.system_parity(), -1);
        assert!(ms.lemma1_check());
        assert!(ms.has_classical_solution().unwrap().is_none());
        assert!(ms.is_arrangement());
        assert!(!ms.arkhipov_realizable().unwrap());
        assert!(ms.intersection_graph().is_complete_bipartite(&[0, 1, 2], &[3, 4, 5]));
    }

    #[test]
    fn magic_star_is_k5_arrangement() {
        let st = magic_star();
        assert_eq!(st.num_variables(), 10);
        assert!(st.is_arrangement());
        assert_eq!(st.system_parity(), -1);
        assert!(st.intersection_graph().is_complete());
    }

    #[test]
    fn degree_errors_and_zero() {
        let s = Blcs::new(vec!["a", "b", "z"], vec![(vec!["a".into(), "b".into()], 1)]).unwrap();
        assert_eq!(s.degree("z").unwrap(), 0);
        assert_eq!(s.degree("q"), Err(BlcsError::UnknownVariable("q".into())));
        assert_eq!(s.negate_variable("z").unwrap(), s);
    }

    #[test]
    fn parity_of_empty_and_chsh() {
        let empty = Blcs::new(Vec::<String>::new(), vec![]).unwrap();
        assert_eq!(empty.system_parity(), 1);
        assert_eq!(chsh_system().system_parity(), -1);
    }

    #[test]
    fn negate_chsh_v1() {
        let n = chsh_system().negate_variable("v1").unwrap();
        let ps: Vec<i8> = n.constraints().iter().map(|c| c.parity).collect();
        assert_eq!(ps, vec![-1, 1]);
        assert_eq!(n.system_parity(), -1);
    }

    #[test]
    fn split_degrees_and_counts() {
        let ms = magic_square();
        let (s, [a, b]) = ms.split_variable_named("v5").unwrap();
        assert_eq!(s.degree(&a).unwrap(), 3);
        assert_eq!(s.degree(&b).unwrap(), 3);
        assert_eq!(s.num_variables(), 10);
        assert_eq!(s.num_constraints(), 7);
        assert!(s.has_classical_solution().unwrap().is_none());
    }

    #[test]
    fn single_constraint_solution() {
        let w = single().has_classical_solution().unwrap().unwrap();
        assert_eq!(w["v1"], 1);
        assert_eq!(w["v2"], 1);
        assert!(!single().lemma1_check());
    }

    #[test]
    fn lemma1_on_chsh() {
        assert!(chsh_system().lemma1_check());
        assert!(chsh_system().has_classical_solution().unwrap().is_none());
    }

    #[test]
    fn standardize_cases() {
        let ms = magic_square();
        let st = ms.standardize().unwrap();
        assert_eq!(st.case, 0);
        assert_eq!(st.system, ms);
        // x·y = ±1 twice each: parity +1, degree 4, unrealizable.
        let v: Vec<String> = vec!["x".into(), "y".into()];
        let s = Blcs::new(
            v.clone(),
            vec![(v.clone(), 1), (v.clone(), -1), (v.clone(), 1), (v.clone(), -1)],
        )
        .unwrap();
        assert_eq!(s.system_parity(), 1);
        let st = s.standardize().unwrap();
        assert_eq!(st.case, 3);
        assert!(st.system.lemma1_check());
        assert!(matches!(st.steps[0], Step::Split { .. }));
        assert!(matches!(st.steps[1], Step::Negate(_)));
        assert!(single().standardize().is_err());
    }

    #[test]
    fn arrangement_examples() {
        let v: Vec<String> = vec!["v1".into(), "v2".into()];
        let s = Blcs::new(v.clone(), vec![(v.clone(), 1), (v, 1)]).unwrap();
        assert!(s.is_arrangement());
        assert!(s.arkhipov_realizable().unwrap());
        assert!(s.has_classical_solution().unwrap().is_some());
        assert_eq!(single().arkhipov_realizable(), Err(BlcsError::NotArrangement));
        // Two disjoint CHSH-like cycles of parity −1: total parity +1.
        let w: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
        let (ab, cd) = (w[..2].to_vec(), w[2..].to_vec());
        let s = Blcs::new(w, vec![(ab.clone(), 1), (ab, -1), (cd.clone(), 1), (cd, -1)]).unwrap();
        assert_eq!(s.system_parity(), 1);
        assert!(!s.arkhipov_realizable().unwrap());
        assert!(s.has_classical_solution().unwrap().is_none());
    }

    #[test]
    fn isomorphism_examples() {
        let c = chsh_system();
        let iso = c.is_isomorphic(&c).unwrap().unwrap();
        assert_eq!(iso.map[0], ("v1".to_string(), "v1".to_string()));
        let v: Vec<String> = vec!["v1".into(), "v2".into()];
        let swapped = Blcs::new(v.clone(), vec![(v.clone(), -1), (v, 1)]).unwrap();
        assert!(c.is_isomorphic(&swapped).unwrap().is_some());
        assert!(magic_square().is_isomorphic(&magic_star()).unwrap().is_none());
        // Same support, different parity products up to flips: x·y=1,x·y=1 vs chsh.
        let v: Vec<String> = vec!["v1".into(), "v2".into()];
        let plus = Blcs::new(v.clone(), vec![(v.clone(), 1), (v, 1)]).unwrap();
        assert!(c.is_isomorphic(&plus).unwrap().is_none());
    }

    #[test]
    fn isomorphism_relabels_magic_square() {
        let ms = magic_square();
        // Transpose the grid and flip two variables of one row.
        let vars = names("w", 9);
        let mut cs = Vec::new();
        for c in 0..3 {
            let parity = if c == 2 { -1 } else { 1 };
            cs.push((pick(&vars, &[c + 1, c + 4, c + 7]), parity));
        }
        for r in 0..3 {
            cs.push((pick(&vars, &[3 * r + 1, 3 * r + 2, 3 * r + 3]), 1));
        }
        let t = Blcs::new(vars, cs).unwrap().negate_variable("w1").unwrap();
        let iso = ms.is_isomorphic(&t).unwrap().unwrap();
        assert_eq!(iso.map.len(), 9);
    }

    #[test]
    fn json_roundtrip_is_byte_identical() {
        let s = magic_square().to_json();
        assert_eq!(Blcs::from_json(&s).unwrap().to_json(), s);
        assert!(Blcs::from_json(r#"{"variables":["a"],"constraints":[{"vars":["a"],"parity":2}]}"#)
            .is_err());
        assert!(Blcs::from_json(r#"{"variables":["a"],"constraints":[{"vars":["b"],"parity":1}]}"#)
            .is_err());
    }

    #[test]
    fn reduction_of_chsh() {
        let mut fixed = HashMap::new();
        fixed.insert("v1".to_string(), -1);
        let r = chsh_system().reduce(&fixed);
        assert_eq!(r.system.num_variables(), 1);
        let ps: Vec<i8> = r.system.constraints().iter().map(|c| c.parity).collect();
        assert_eq!(ps, vec![-1, 1]);
        assert!(r.violated.is_empty());
    }
}
