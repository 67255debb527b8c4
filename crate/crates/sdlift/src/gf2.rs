//! Dense linear algebra over GF(2).
//!
//! A ±1 value `s` is encoded as the bit `s == -1`, so products of signs
//! become XORs of bits.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(n: usize) -> Self {
        BitRow { words: vec![0; n.div_ceil(64)] }
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_with(&mut self, other: &BitRow) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
}

/// One equation `XOR_{i in row} x_i = rhs`.
#[derive(Clone, Debug)]
pub struct Equation {
    pub row: BitRow,
    pub rhs: bool,
}

impl Equation {
    pub fn new(n: usize, vars: impl IntoIterator<Item = usize>, rhs: bool) -> Self {
        let mut row = BitRow::zeros(n);
        for v in vars {
            row.flip(v);
        }
        Equation { row, rhs }
    }
}

/// Solves the system; free variables are set to 0 so the returned solution
/// is deterministic. `None` when inconsistent.
pub fn solve(n: usize, equations: &[Equation]) -> Option<Vec<bool>> {
    let mut rows: Vec<Equation> = equations.to_vec();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].row.get(col)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, eq) in rows.iter_mut().enumerate() {
            if i != r && eq.row.get(col) {
                eq.row.xor_with(&pivot.row);
                eq.rhs ^= pivot.rhs;
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    if rows[r..].iter().any(|eq| eq.rhs) {
        return None;
    }
    let mut x = vec![false; n];
    for &(i, col) in &pivots {
        // Fully reduced: the pivot row contains only its pivot among pivot
        // columns, and free columns are 0.
        debug_assert_eq!(rows[i].row.first_one(), Some(col));
        x[col] = rows[i].rhs;
    }
    Some(x)
}

pub fn rank(n: usize, rows: &[BitRow]) -> usize {
    let mut rows = rows.to_vec();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].get(col)) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.get(col) {
                row.xor_with(&pivot);
            }
        }
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_detects_inconsistency() {
        // x0 ^ x1 = 1, x1 ^ x2 = 0
        let eqs = [Equation::new(3, [0, 1], true), Equation::new(3, [1, 2], false)];
        let x = solve(3, &eqs).unwrap();
        assert!(x[0] ^ x[1]);
        assert!(!(x[1] ^ x[2]));
        // x0 ^ x1 = 0 and x0 ^ x1 = 1
        let bad = [Equation::new(2, [0, 1], false), Equation::new(2, [0, 1], true)];
        assert!(solve(2, &bad).is_none());
    }

    #[test]
    fn wide_rows() {
        let eqs: Vec<_> = (0..99).map(|i| Equation::new(100, [i, i + 1], i % 3 == 0)).collect();
        let x = solve(100, &eqs).unwrap();
        for i in 0..99 {
            assert_eq!(x[i] ^ x[i + 1], i % 3 == 0);
        }
        assert_eq!(rank(100, &eqs.iter().map(|e| e.row.clone()).collect::<Vec<_>>()), 99);
    }
}
