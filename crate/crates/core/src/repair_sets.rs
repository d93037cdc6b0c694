//! The download sets of the repair scheme.
//!
//! Every set is written in the coordinates of a [`RepairSpace`]: position
//! `a` (0-based) of the failed set refers to its `a`-th smallest node. All
//! families share one shape, a base set multiplied by
//! `beta^{sum u_j t_j} * prod alpha_j^{q_j}` over ranges of `u` and `q`, and
//! are produced by [`SetBuilder::expand`].

use crate::error::{Error, Result};
use crate::monomial_space::{extract_basis, project_local, RepairSpace};
use crate::tower_field::{Mode, SparseElement};

/// The constants `s_1..s_{h+1}` and their partial products `t_1..t_{h+1}`,
/// stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairConstants {
    h: usize,
    d: usize,
    k: usize,
    beta_degree: usize,
    s: Vec<usize>,
    t: Vec<usize>,
}

impl RepairConstants {
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta_degree(&self) -> usize {
        self.beta_degree
    }

    pub fn s(&self) -> &[usize] {
        &self.s
    }

    pub fn t(&self) -> &[usize] {
        &self.t
    }
}

/// Degree of `beta` for a mode.
pub fn beta_degree(mode: Mode, k: usize) -> usize {
    match mode {
        Mode::Universal { r } => (1..=r).product(),
        Mode::TwoErasure { d } => (d + 1 - k) * (d + 2 - k),
    }
}

/// Whether `(h, d)` is a repair configuration the mode supports (for a code of length `n`).
pub fn is_legal(mode: Mode, n: usize, k: usize, h: usize, d: usize) -> bool {
    if h == 0 || d < k || d + h > n {
        return false;
    }
    match mode {
        Mode::Universal { r } => h <= r && d + h - k <= r,
        Mode::TwoErasure { d: d0 } => (h == 2 && d == d0) || (h == 1 && (d == d0 || d == d0 + 1)),
    }
}

/// Every legal `(h, d)`, ordered by `h` then `d`.
pub fn legal_pairs(mode: Mode, n: usize, k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for h in 1..n {
        for d in k..=n - h {
            if is_legal(mode, n, k, h, d) {
                out.push((h, d));
            }
        }
    }
    out
}

/// `s_i = d + i - k`, `t_i = prod_{j<i} s_j`, `s_{h+1} = D / t_{h+1}`, with the
/// exact-cover property of `sum u_i t_i` checked by enumeration.
pub fn constants(mode: Mode, h: usize, d: usize, k: usize) -> Result<RepairConstants> {
    let legal = match mode {
        Mode::Universal { r } => h >= 1 && h <= r && d >= k && d + h - k <= r,
        Mode::TwoErasure { d: d0 } => d0 >= k && ((h == 2 && d == d0) || (h == 1 && (d == d0 || d == d0 + 1))),
    };
    if !legal {
        return Err(Error::IllegalRepair(format!("(h, d) = ({h}, {d}) with k = {k} in mode {mode:?}")));
    }
    let big_d = beta_degree(mode, k);
    let mut s: Vec<usize> = (1..=h).map(|i| d + i - k).collect();
    let mut t = vec![1usize];
    for i in 0..h {
        t.push(t[i] * s[i]);
    }
    if !big_d.is_multiple_of(t[h]) {
        return Err(Error::Divisibility(format!("t_(h+1) = {} does not divide {big_d}", t[h])));
    }
    s.push(big_d / t[h]);
    let mut hit = vec![false; big_d];
    let mut u = vec![0usize; h + 1];
    loop {
        let idx: usize = u.iter().zip(&t).map(|(a, b)| a * b).sum();
        if idx >= big_d || hit[idx] {
            return Err(Error::Divisibility("sum u_i t_i is not an exact cover".into()));
        }
        hit[idx] = true;
        if !crate::tower_field::odometer(&mut u, &s) {
            break;
        }
    }
    Ok(RepairConstants { h, d, k, beta_degree: big_d, s, t })
}

/// Builds the set families for one failed set.
#[derive(Clone, Debug)]
pub struct SetBuilder<'a> {
    space: &'a RepairSpace,
    consts: &'a RepairConstants,
}

impl<'a> SetBuilder<'a> {
    pub fn new(space: &'a RepairSpace, consts: &'a RepairConstants) -> Result<Self> {
        if space.failed().len() != consts.h {
            return Err(Error::IllegalRepair(format!(
                "{} failed nodes but constants for h = {}",
                space.failed().len(),
                consts.h
            )));
        }
        if space.tower().radix()[0] != consts.beta_degree {
            return Err(Error::IndexSpaceMismatch("beta degree differs from the constants".into()));
        }
        Ok(Self { space, consts })
    }

    pub fn space(&self) -> &RepairSpace {
        self.space
    }

    pub fn consts(&self) -> &RepairConstants {
        self.consts
    }

    /// Degree `p` of the generator at position `a`.
    pub fn prime(&self, a: usize) -> usize {
        self.space.tower().radix()[a + 1]
    }

    fn index(&self, u: usize, a: usize, e: usize) -> usize {
        let st = self.space.strides();
        u * st[0] + e * st[a + 1]
    }

    /// `W_a = {beta^{u t_a} alpha^{u + q s_a}} ∪ {sum_u beta^{u t_a} alpha^{p_a - 1}}`.
    pub fn w(&self, a: usize) -> Result<Vec<SparseElement>> {
        let (s, t, p) = (self.consts.s[a], self.consts.t[a], self.prime(a));
        if (p - 1) % s != 0 {
            return Err(Error::Divisibility(format!("s = {s} does not divide p - 1 = {}", p - 1)));
        }
        let mut out = Vec::with_capacity(p);
        for u in 0..s {
            for q in 0..(p - 1) / s {
                out.push(SparseElement::monomial(self.index(u * t, a, u + q * s)));
            }
        }
        let terms = (0..s).map(|u| (self.index(u * t, a, p - 1) as u32, 1)).collect();
        out.push(SparseElement::from_terms(self.space.p(), terms));
        Ok(out)
    }

    /// Multiplies every element of `base` by `beta^{sum_{j in us} u_j t_j} * prod_{j in qs} alpha_j^{q_j}`
    /// for all `u_j < s_j`, `q_j < p_j`, lexicographically with `base` innermost.
    pub fn expand(&self, base: &[SparseElement], us: &[usize], qs: &[usize]) -> Result<Vec<SparseElement>> {
        let tower = self.space.tower();
        let st = self.space.strides();
        let mut radix: Vec<usize> = us.iter().map(|&j| self.consts.s[j]).collect();
        radix.extend(qs.iter().map(|&j| self.prime(j)));
        let total: usize = radix.iter().product();
        let mut out = Vec::with_capacity(total * base.len());
        let mut digits = vec![0usize; radix.len()];
        loop {
            let beta_shift: usize = us.iter().zip(&digits).map(|(&j, &u)| u * self.consts.t[j]).sum();
            let mut shift = vec![0usize; self.consts.h + 1];
            shift[0] = beta_shift;
            for (&j, &q) in qs.iter().zip(&digits[us.len()..]) {
                shift[j + 1] = q;
            }
            let offset: usize = shift.iter().zip(st).map(|(a, b)| a * b).sum();
            for b in base {
                for &(i, _) in b.terms() {
                    let e = tower.exps_of(i as usize);
                    if e.iter().zip(&shift).zip(tower.radix()).any(|((x, y), r)| x + y >= *r) {
                        return Err(Error::SupportViolation(format!("shift of monomial {e:?} by {shift:?} overflows")));
                    }
                }
                let terms = b.terms().iter().map(|&(i, c)| (i + offset as u32, c)).collect();
                out.push(SparseElement::from_terms(self.space.p(), terms));
            }
            if !crate::tower_field::odometer(&mut digits, &radix) {
                break;
            }
        }
        Ok(out)
    }

    fn all_but(&self, a: usize, upto: usize) -> Vec<usize> {
        (0..upto).filter(|&j| j != a).collect()
    }

    /// `T_a`: `W_a` times the other `beta` blocks and the generators before `a`.
    pub fn t_set(&self, a: usize) -> Result<Vec<SparseElement>> {
        let us = self.all_but(a, self.consts.h + 1);
        let qs: Vec<usize> = (0..a).collect();
        self.expand(&self.w(a)?, &us, &qs)
    }

    /// `S_a`: `W_a` times the other `beta` blocks and all other failed generators.
    pub fn s_set(&self, a: usize) -> Result<Vec<SparseElement>> {
        let us = self.all_but(a, self.consts.h + 1);
        let qs = self.all_but(a, self.consts.h);
        self.expand(&self.w(a)?, &us, &qs)
    }

    /// `(B_a, G_a)`: `G_0 = W_0`, `G_a` a basis of `G_[a] ∪ W_[a]`, and
    /// `B_a = G_a` times the later `beta` blocks and generators.
    pub fn b_and_g(&self, a: usize) -> Result<(Vec<SparseElement>, Vec<SparseElement>)> {
        let h = self.consts.h;
        if a >= h {
            return Err(Error::InvalidParameter(format!("position {} exceeds h = {h}", a + 1)));
        }
        let mut g = self.w(0)?;
        for i in 1..=a {
            let g_bracket = self.expand(&g, &[i], &[i])?;
            let prev: Vec<usize> = (0..i).collect();
            let w_bracket = self.expand(&self.w(i)?, &prev, &prev)?;
            let mg = project_local(&g_bracket, self.space)?;
            let mw = project_local(&w_bracket, self.space)?;
            g = extract_basis(&[&mg, &mw])?;
        }
        let us: Vec<usize> = (a + 1..=h).collect();
        let qs: Vec<usize> = (a + 1..h).collect();
        Ok((self.expand(&g, &us, &qs)?, g))
    }
}
