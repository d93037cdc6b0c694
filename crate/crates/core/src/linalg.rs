//! Dense vectors over `F_p` and an incremental row-echelon basis.
//!
//! Vectors over `F_2` are bit-packed into `u64` words; other primes store
//! one residue per entry. Pivoting is always on the first nonzero entry, so
//! every result (rank, greedy basis, solution) is deterministic.

use std::cmp::Ordering;

use crate::base_algebra::PrimeField;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Binary(Vec<u64>),
    Prime(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpVector {
    p: u32,
    len: usize,
    repr: Repr,
}

impl FpVector {
    pub fn zeros(p: u32, len: usize) -> Self {
        let repr = if p == 2 { Repr::Binary(vec![0; len.div_ceil(64)]) } else { Repr::Prime(vec![0; len]) };
        Self { p, len, repr }
    }

    pub fn unit(p: u32, len: usize, i: usize) -> Self {
        let mut v = Self::zeros(p, len);
        v.set(i, 1);
        v
    }

    pub fn from_residues(p: u32, vals: &[u32]) -> Self {
        let mut v = Self::zeros(p, vals.len());
        for (i, &x) in vals.iter().enumerate() {
            if x % p != 0 {
                v.set(i, x % p);
            }
        }
        v
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        match &self.repr {
            Repr::Binary(w) => ((w[i / 64] >> (i % 64)) & 1) as u32,
            Repr::Prime(v) => v[i],
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, x: u32) {
        match &mut self.repr {
            Repr::Binary(w) => {
                if x & 1 == 1 {
                    w[i / 64] |= 1 << (i % 64);
                } else {
                    w[i / 64] &= !(1 << (i % 64));
                }
            }
            Repr::Prime(v) => v[i] = x % self.p,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Binary(w) => w.iter().all(|&x| x == 0),
            Repr::Prime(v) => v.iter().all(|&x| x == 0),
        }
    }

    /// First index `>= from` holding a nonzero entry.
    pub fn first_nonzero_from(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        match &self.repr {
            Repr::Binary(w) => {
                let mut wi = from / 64;
                let mut word = w[wi] & (!0u64 << (from % 64));
                loop {
                    if word != 0 {
                        return Some(wi * 64 + word.trailing_zeros() as usize);
                    }
                    wi += 1;
                    if wi >= w.len() {
                        return None;
                    }
                    word = w[wi];
                }
            }
            Repr::Prime(v) => v[from..].iter().position(|&x| x != 0).map(|i| i + from),
        }
    }

    pub fn nonzero(&self) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        let mut i = 0;
        while let Some(j) = self.first_nonzero_from(i) {
            out.push((j, self.get(j)));
            i = j + 1;
        }
        out
    }

    pub fn to_residues(&self) -> Vec<u32> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// `self += c * other`, touching only entries at or after `from`
    /// (callers guarantee `other` vanishes before `from`).
    pub fn axpy_from(&mut self, c: u32, other: &FpVector, from: usize) {
        debug_assert_eq!(self.len, other.len);
        let c = c % self.p;
        if c == 0 {
            return;
        }
        match (&mut self.repr, &other.repr) {
            (Repr::Binary(a), Repr::Binary(b)) => {
                for (x, y) in a[from / 64..].iter_mut().zip(&b[from / 64..]) {
                    *x ^= *y;
                }
            }
            (Repr::Prime(a), Repr::Prime(b)) => {
                let f = PrimeField::new_unchecked(self.p);
                for (x, &y) in a[from..].iter_mut().zip(&b[from..]) {
                    if y != 0 {
                        *x = f.add(*x, f.mul(c, y));
                    }
                }
            }
            _ => unreachable!("mixed vector representations"),
        }
    }

    pub fn axpy(&mut self, c: u32, other: &FpVector) {
        self.axpy_from(c, other, 0);
    }

    pub fn scale(&mut self, c: u32) {
        let c = c % self.p;
        match &mut self.repr {
            Repr::Binary(w) => {
                if c == 0 {
                    w.iter_mut().for_each(|x| *x = 0);
                }
            }
            Repr::Prime(v) => {
                let f = PrimeField::new_unchecked(self.p);
                v.iter_mut().for_each(|x| *x = f.mul(*x, c));
            }
        }
    }

    /// Lexicographic comparison of entries.
    pub fn cmp_entries(&self, other: &FpVector) -> Ordering {
        let n = self.len.min(other.len);
        let mut i = 0;
        loop {
            let a = self.first_nonzero_from(i).filter(|&j| j < n);
            let b = other.first_nonzero_from(i).filter(|&j| j < n);
            match (a, b) {
                (None, None) => return self.len.cmp(&other.len),
                (Some(x), Some(y)) if x == y => match self.get(x).cmp(&other.get(x)) {
                    Ordering::Equal => i = x + 1,
                    o => return o,
                },
                // the vector whose first differing nonzero comes earlier is larger there
                (Some(x), Some(y)) => return y.cmp(&x),
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
            }
        }
    }
}

/// Row-echelon basis grown one vector at a time.
///
/// When built with tracking, each stored row remembers which combination of
/// the inserted vectors produced it, so targets in the span can be expressed
/// in terms of the original inserts.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: PrimeField,
    dim: usize,
    rows: Vec<FpVector>,
    pivot_row: Vec<u32>,
    combos: Option<(usize, Vec<FpVector>)>,
    inserted: usize,
}

const NO_PIVOT: u32 = u32::MAX;

impl Echelon {
    pub fn new(p: u32, dim: usize) -> Self {
        Self {
            field: PrimeField::new_unchecked(p),
            dim,
            rows: Vec::new(),
            pivot_row: vec![NO_PIVOT; dim],
            combos: None,
            inserted: 0,
        }
    }

    /// Tracks combinations over up to `capacity` inserted vectors.
    pub fn with_tracking(p: u32, dim: usize, capacity: usize) -> Self {
        let mut e = Self::new(p, dim);
        e.combos = Some((capacity, Vec::new()));
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Reduces `v` against the stored rows; returns the residual and, when
    /// tracking, the combination of inserts that was subtracted.
    fn reduce(&self, mut v: FpVector) -> (FpVector, Option<FpVector>) {
        let mut combo = self.combos.as_ref().map(|(cap, _)| FpVector::zeros(self.field.p(), *cap));
        let mut from = 0;
        while let Some(i) = v.first_nonzero_from(from) {
            let r = self.pivot_row[i];
            if r == NO_PIVOT {
                break;
            }
            let c = v.get(i);
            let neg = self.field.neg(c);
            v.axpy_from(neg, &self.rows[r as usize], i);
            if let (Some(acc), Some((_, combos))) = (combo.as_mut(), self.combos.as_ref()) {
                acc.axpy(neg, &combos[r as usize]);
            }
            from = i + 1;
        }
        (v, combo)
    }

    /// Inserts `v`; returns true when it was independent of the rows so far.
    pub fn insert(&mut self, v: &FpVector) -> bool {
        assert_eq!(v.len(), self.dim, "vector length must match echelon dimension");
        let id = self.inserted;
        self.inserted += 1;
        let (mut res, combo) = self.reduce(v.clone());
        let Some(pivot) = res.first_nonzero_from(0) else {
            return false;
        };
        let inv = self.field.inv(res.get(pivot)).expect("pivot is nonzero");
        res.scale(inv);
        if let (Some(mut combo), Some((cap, combos))) = (combo, self.combos.as_mut()) {
            // row = (v - sum) * inv, so its combination is (e_id + combo) * inv
            assert!(id < *cap, "tracking capacity exceeded");
            combo.set(id, self.field.add(combo.get(id), 1));
            combo.scale(inv);
            combos.push(combo);
        }
        self.pivot_row[pivot] = self.rows.len() as u32;
        self.rows.push(res);
        true
    }

    pub fn contains(&self, v: &FpVector) -> bool {
        self.reduce(v.clone()).0.is_zero()
    }

    /// Coefficients `x` over the inserted vectors with `sum x_i v_i = target`,
    /// or `None` when the target is outside the span. Requires tracking.
    pub fn express(&self, target: &FpVector) -> Option<FpVector> {
        let (res, combo) = self.reduce(target.clone());
        if !res.is_zero() {
            return None;
        }
        let mut combo = combo.expect("express requires a tracking echelon");
        // reduce subtracted the combination; the target equals its negation
        combo.scale(self.field.neg(1));
        Some(combo)
    }
}

/// Inverse of a square matrix given as rows, or `None` if singular.
pub fn invert(p: u32, rows: &[Vec<u32>]) -> Option<Vec<Vec<u32>>> {
    let n = rows.len();
    // columns of M inserted with tracking; M x = e_b gives column b of M^-1
    let mut ech = Echelon::with_tracking(p, n, n);
    for c in 0..n {
        let col: Vec<u32> = rows.iter().map(|r| r[c]).collect();
        if !ech.insert(&FpVector::from_residues(p, &col)) {
            return None;
        }
    }
    let mut inv = vec![vec![0u32; n]; n];
    for b in 0..n {
        let x = ech.express(&FpVector::unit(p, n, b))?;
        for (a, row) in inv.iter_mut().enumerate() {
            row[b] = x.get(a);
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_rank_and_duplicates() {
        let mut e = Echelon::new(2, 5);
        assert!(e.insert(&FpVector::from_residues(2, &[1, 1, 0, 0, 0])));
        assert!(e.insert(&FpVector::from_residues(2, &[0, 1, 1, 0, 0])));
        assert!(!e.insert(&FpVector::from_residues(2, &[1, 0, 1, 0, 0])));
        assert!(!e.insert(&FpVector::from_residues(2, &[1, 1, 0, 0, 0])));
        assert_eq!(e.rank(), 2);
    }

    #[test]
    fn express_in_terms_of_inserts() {
        for p in [2u32, 3, 7] {
            let vs = [[1u32, 2, 0, 1], [0, 1, 1, 0], [1, 0, 0, 3]];
            let mut e = Echelon::with_tracking(p, 4, 3);
            for v in &vs {
                e.insert(&FpVector::from_residues(p, v));
            }
            let f = PrimeField::new(p).unwrap();
            // target = 2*v0 + v2
            let target: Vec<u32> = (0..4).map(|i| f.add(f.mul(2, vs[0][i] % p), vs[2][i] % p)).collect();
            let x = e.express(&FpVector::from_residues(p, &target)).unwrap();
            let mut back = vec![0u32; 4];
            for (k, v) in vs.iter().enumerate() {
                for i in 0..4 {
                    back[i] = f.add(back[i], f.mul(x.get(k), v[i] % p));
                }
            }
            assert_eq!(back, target);
        }
    }

    #[test]
    fn invert_small() {
        let m = vec![vec![2, 1], vec![1, 1]];
        let inv = invert(5, &m).unwrap();
        assert_eq!(inv, vec![vec![1, 4], vec![4, 2]]);
        assert!(invert(2, &[vec![1, 1], vec![1, 1]]).is_none());
    }

    #[test]
    fn first_nonzero_crosses_words() {
        let mut v = FpVector::zeros(2, 200);
        v.set(130, 1);
        assert_eq!(v.first_nonzero_from(0), Some(130));
        assert_eq!(v.first_nonzero_from(131), None);
    }
}
