//! Arithmetic in the composite field `K = F_p(alpha_1, .., alpha_n, beta)`.
//!
//! Every generator is adjoined through its own minimal polynomial over
//! `F_p`. Because the degrees are pairwise coprime, the tensor product
//! `F_p[beta, alpha_1, .., alpha_n] / (g, f_1, .., f_n)` is already a field,
//! and an element is a dense coefficient vector over the monomials
//! `beta^u * prod alpha_i^{e_i}` in mixed radix, `u` most significant.
//!
//! A [`Tower`] is any sub-product of these axes, so subfields such as
//! `F_p(alpha_j : j in A)` and the repair spaces over `beta` and the failed
//! generators share the same machinery. Traces are contractions of one axis
//! at a time against that generator's power sums.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use rand::Rng;

use crate::base_algebra::{find_irreducible, newton_power_sums, select_primes, PrimeField, PrimeFieldPoly};
use crate::error::{Error, Result};
use crate::linalg::{Echelon, FpVector};

/// Largest tower dimension that will be materialized densely.
pub const MAX_DENSE_DIM: usize = 1 << 24;

/// Axis id of `beta`; `alpha_i` (0-based node `i`) has id `i + 1`.
pub const BETA: usize = 0;

#[inline]
pub fn alpha_axis(node: usize) -> usize {
    node + 1
}

/// One adjoined generator: its minimal polynomial and power-sum table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axis {
    id: usize,
    poly: PrimeFieldPoly,
    degree: usize,
    /// `S_0 ..= S_{2d-2}`, enough for traces of products of two reduced monomials.
    power_sums: Vec<u32>,
    /// `x^d = sum tail_j x^j` as nonzero `(j, coeff)` pairs.
    tail: Vec<(usize, u32)>,
}

impl Axis {
    fn new(id: usize, poly: PrimeFieldPoly) -> Self {
        let degree = poly.degree().expect("minimal polynomial is nonzero");
        let f = PrimeField::new_unchecked(poly.p());
        let power_sums = newton_power_sums(&poly, 2 * degree - 1);
        let tail = (0..degree)
            .filter_map(|j| {
                let c = f.neg(poly.coeff(j));
                (c != 0).then_some((j, c))
            })
            .collect();
        Self { id, poly, degree, power_sums, tail }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn poly(&self) -> &PrimeFieldPoly {
        &self.poly
    }

    /// Trace over `F_p` of the `e`-th power of the generator, `e <= 2d - 1`.
    #[inline]
    pub fn power_sum(&self, e: usize) -> u32 {
        self.power_sums[e]
    }
}

/// Dense element of some [`Tower`]: one coefficient per monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    coeffs: Vec<u32>,
}

impl FieldElement {
    pub fn from_coeffs(coeffs: Vec<u32>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.iter().filter(|&&c| c != 0).count()
    }

    pub fn to_sparse(&self) -> SparseElement {
        SparseElement {
            terms: self.coeffs.iter().enumerate().filter(|(_, &c)| c != 0).map(|(i, &c)| (i as u32, c)).collect(),
        }
    }

    /// Packs coefficients little-endian, `ceil(log2 p)` bits each.
    pub fn to_bytes(&self, p: u32) -> Vec<u8> {
        pack_residues(&self.coeffs, p)
    }

    pub fn from_bytes(bytes: &[u8], p: u32, len: usize) -> Result<Self> {
        Ok(Self { coeffs: unpack_residues(bytes, p, len)? })
    }
}

fn digit_width(p: u32) -> u32 {
    32 - (p - 1).leading_zeros()
}

/// Little-endian bit packing of base-`p` digits (one bit each when `p = 2`).
pub fn pack_residues(vals: &[u32], p: u32) -> Vec<u8> {
    let w = digit_width(p) as usize;
    let mut out = vec![0u8; (vals.len() * w).div_ceil(8)];
    for (i, &v) in vals.iter().enumerate() {
        for b in 0..w {
            if (v >> b) & 1 == 1 {
                let bit = i * w + b;
                out[bit / 8] |= 1 << (bit % 8);
            }
        }
    }
    out
}

pub fn unpack_residues(bytes: &[u8], p: u32, len: usize) -> Result<Vec<u32>> {
    let w = digit_width(p) as usize;
    if bytes.len() != (len * w).div_ceil(8) {
        return Err(Error::LengthMismatch { expected: (len * w).div_ceil(8), got: bytes.len() });
    }
    (0..len)
        .map(|i| {
            let v = (0..w).fold(0u32, |acc, b| {
                let bit = i * w + b;
                acc | ((((bytes[bit / 8] >> (bit % 8)) & 1) as u32) << b)
            });
            if v >= p {
                Err(Error::InvalidParameter(format!("digit {v} out of range for p = {p}")))
            } else {
                Ok(v)
            }
        })
        .collect()
}

/// Sparse element: sorted `(monomial index, coefficient)` pairs, no zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SparseElement {
    terms: Vec<(u32, u32)>,
}

impl SparseElement {
    /// Normalizes arbitrary terms: merges duplicates mod `p`, drops zeros, sorts.
    pub fn from_terms(p: u32, mut terms: Vec<(u32, u32)>) -> Self {
        let f = PrimeField::new_unchecked(p);
        terms.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(u32, u32)> = Vec::with_capacity(terms.len());
        for (i, c) in terms {
            let c = c % p;
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 = f.add(last.1, c),
                _ => out.push((i, c)),
            }
        }
        out.retain(|t| t.1 != 0);
        Self { terms: out }
    }

    pub fn monomial(index: usize) -> Self {
        Self { terms: vec![(index as u32, 1)] }
    }

    pub fn terms(&self) -> &[(u32, u32)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_dense(&self, size: usize) -> FieldElement {
        let mut coeffs = vec![0; size];
        for &(i, c) in &self.terms {
            coeffs[i as usize] = c;
        }
        FieldElement { coeffs }
    }
}

/// A field generated by a subset of the axes, with mixed-radix indexing.
#[derive(Clone, Debug)]
pub struct Tower {
    field: PrimeField,
    axes: Vec<Arc<Axis>>,
    radix: Vec<usize>,
    stride: Vec<usize>,
    size: usize,
    ext_stride: Vec<usize>,
    ext_size: usize,
    /// canonical index -> index in the unreduced product buffer (radix `2d-1`)
    ext_of: Vec<u32>,
}

impl Tower {
    fn new(field: PrimeField, mut axes: Vec<Arc<Axis>>) -> Result<Self> {
        axes.sort_by_key(|a| a.id);
        let radix: Vec<usize> = axes.iter().map(|a| a.degree).collect();
        let size128: u128 = radix.iter().map(|&r| r as u128).product();
        let ext128: u128 = radix.iter().map(|&r| (2 * r - 1) as u128).product();
        if ext128 > MAX_DENSE_DIM as u128 * 32 || size128 > MAX_DENSE_DIM as u128 {
            return Err(Error::TooLarge(size128));
        }
        let size = size128 as usize;
        let ext_size = ext128 as usize;
        let mut stride = vec![1; axes.len()];
        let mut ext_stride = vec![1; axes.len()];
        for i in (0..axes.len().saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] * radix[i + 1];
            ext_stride[i] = ext_stride[i + 1] * (2 * radix[i + 1] - 1);
        }
        let mut ext_of = Vec::with_capacity(size);
        let mut exps = vec![0usize; axes.len()];
        for _ in 0..size {
            ext_of.push(exps.iter().zip(&ext_stride).map(|(e, s)| e * s).sum::<usize>() as u32);
            odometer(&mut exps, &radix);
        }
        Ok(Self { field, axes, radix, stride, size, ext_stride, ext_size, ext_of })
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn prime_field(&self) -> PrimeField {
        self.field
    }

    /// Dimension over `F_p`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn axes(&self) -> &[Arc<Axis>] {
        &self.axes
    }

    pub fn ids(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.id).collect()
    }

    pub fn radix(&self) -> &[usize] {
        &self.radix
    }

    pub fn stride(&self) -> &[usize] {
        &self.stride
    }

    /// Position of an axis id within this tower.
    pub fn position(&self, id: usize) -> Option<usize> {
        self.axes.iter().position(|a| a.id == id)
    }

    /// The sub-tower generated by the given axis ids (each must be present).
    pub fn sub_tower(&self, ids: &[usize]) -> Result<Tower> {
        let axes = ids
            .iter()
            .map(|&id| {
                self.position(id)
                    .map(|k| self.axes[k].clone())
                    .ok_or_else(|| Error::IndexSpaceMismatch(format!("axis {id} not in tower")))
            })
            .collect::<Result<Vec<_>>>()?;
        Tower::new(self.field, axes)
    }

    pub fn index_of(&self, exps: &[usize]) -> Result<usize> {
        if exps.len() != self.axes.len() {
            return Err(Error::LengthMismatch { expected: self.axes.len(), got: exps.len() });
        }
        let mut idx = 0;
        for ((&e, &r), &s) in exps.iter().zip(&self.radix).zip(&self.stride) {
            if e >= r {
                return Err(Error::ExponentOutOfRange { exponent: e, degree: r });
            }
            idx += e * s;
        }
        Ok(idx)
    }

    pub fn exps_of(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            out[k] = idx % self.radix[k];
            idx /= self.radix[k];
        }
        out
    }

    /// Exponent of axis position `k` in monomial `idx`.
    #[inline]
    pub fn exp_at(&self, idx: usize, k: usize) -> usize {
        (idx / self.stride[k]) % self.radix[k]
    }

    fn check(&self, a: &FieldElement) -> Result<()> {
        if a.coeffs.len() != self.size {
            return Err(Error::ShapeMismatch { expected: self.size, got: a.coeffs.len() });
        }
        Ok(())
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { coeffs: vec![0; self.size] }
    }

    pub fn one(&self) -> FieldElement {
        self.scalar(1)
    }

    pub fn scalar(&self, c: u32) -> FieldElement {
        let mut z = self.zero();
        z.coeffs[0] = c % self.p();
        z
    }

    /// The basis monomial with the given exponents (one per axis, in id order).
    pub fn monomial(&self, exps: &[usize]) -> Result<FieldElement> {
        let idx = self.index_of(exps)?;
        let mut z = self.zero();
        z.coeffs[idx] = 1;
        Ok(z)
    }

    /// The generator with the given axis id, as an element.
    pub fn generator(&self, id: usize) -> Result<FieldElement> {
        let k = self.position(id).ok_or_else(|| Error::IndexSpaceMismatch(format!("axis {id} not in tower")))?;
        let mut exps = vec![0; self.axes.len()];
        if self.radix[k] == 1 {
            // degree-one generator is the root of x, i.e. zero
            return Ok(self.zero());
        }
        exps[k] = 1;
        self.monomial(&exps)
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let p = self.p();
        FieldElement { coeffs: (0..self.size).map(|_| rng.gen_range(0..p)).collect() }
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        let f = self.field;
        Ok(FieldElement { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| f.add(x, y)).collect() })
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        let f = self.field;
        Ok(FieldElement { coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| f.sub(x, y)).collect() })
    }

    pub fn neg(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        let f = self.field;
        Ok(FieldElement { coeffs: a.coeffs.iter().map(|&x| f.neg(x)).collect() })
    }

    pub fn scale(&self, a: &FieldElement, c: u32) -> FieldElement {
        let f = self.field;
        FieldElement { coeffs: a.coeffs.iter().map(|&x| f.mul(x, c % f.p())).collect() }
    }

    /// `acc += c * a` in place.
    pub fn add_scaled(&self, acc: &mut FieldElement, c: u32, a: &FieldElement) {
        let f = self.field;
        let c = c % f.p();
        if c == 0 {
            return;
        }
        for (x, &y) in acc.coeffs.iter_mut().zip(&a.coeffs) {
            if y != 0 {
                *x = f.add(*x, f.mul(c, y));
            }
        }
    }

    /// Product of two elements: convolution into the unreduced buffer, then
    /// reduction modulo each minimal polynomial, one axis at a time.
    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        self.check(b)?;
        let ta: Vec<(u32, u32)> = nonzero_terms(&a.coeffs);
        let tb: Vec<(u32, u32)> = nonzero_terms(&b.coeffs);
        Ok(FieldElement { coeffs: self.mul_terms(&ta, &tb) })
    }

    pub fn mul_sparse(&self, a: &SparseElement, b: &SparseElement) -> SparseElement {
        let coeffs = self.mul_terms(&a.terms, &b.terms);
        FieldElement { coeffs }.to_sparse()
    }

    fn mul_terms(&self, ta: &[(u32, u32)], tb: &[(u32, u32)]) -> Vec<u32> {
        let p = self.p();
        if ta.is_empty() || tb.is_empty() {
            return vec![0; self.size];
        }
        let ea: Vec<(usize, u32)> = ta.iter().map(|&(i, c)| (self.ext_of[i as usize] as usize, c)).collect();
        let eb: Vec<(usize, u32)> = tb.iter().map(|&(i, c)| (self.ext_of[i as usize] as usize, c)).collect();
        let mut buf = if p == 2 {
            let mut bits = vec![0u8; self.ext_size];
            for &(x, _) in &ea {
                let row = &mut bits[x..];
                for &(y, _) in &eb {
                    row[y] ^= 1;
                }
            }
            bits.into_iter().map(|v| v as u64).collect::<Vec<u64>>()
        } else {
            // p < 2^16, so products stay below 2^32 and sums of fewer than 2^32 of them fit
            let mut acc = vec![0u64; self.ext_size];
            for &(x, cx) in &ea {
                let row = &mut acc[x..];
                for &(y, cy) in &eb {
                    row[y] += cx as u64 * cy as u64;
                }
            }
            acc
        };
        self.reduce_ext(&mut buf);
        self.ext_of.iter().map(|&e| (buf[e as usize] % p as u64) as u32).collect()
    }

    /// Folds every exponent `>= d` of each axis back using `x^d = tail(x)`.
    fn reduce_ext(&self, buf: &mut [u64]) {
        let p = self.p() as u64;
        for (k, axis) in self.axes.iter().enumerate() {
            let d = axis.degree;
            let er = 2 * d - 1;
            let s = self.ext_stride[k];
            let block = er * s;
            let outer = self.ext_size / block;
            for e in (d..er).rev() {
                for o in 0..outer {
                    let base = o * block;
                    for inner in 0..s {
                        let src = base + e * s + inner;
                        let c = buf[src] % p;
                        if c == 0 {
                            buf[src] = 0;
                            continue;
                        }
                        buf[src] = 0;
                        for &(j, t) in &axis.tail {
                            buf[base + (e - d + j) * s + inner] += c * t as u64;
                        }
                    }
                }
            }
            if p != 2 {
                buf.iter_mut().for_each(|x| *x %= p);
            } else {
                buf.iter_mut().for_each(|x| *x &= 1);
            }
        }
    }

    /// Multiplies by the generator at axis position `k` (a shift with one fold).
    pub fn mul_by_axis(&self, a: &FieldElement, k: usize) -> FieldElement {
        let f = self.field;
        let d = self.radix[k];
        let s = self.stride[k];
        let block = d * s;
        let mut out = vec![0u32; self.size];
        let tail = &self.axes[k].tail;
        for o in 0..self.size / block {
            let base = o * block;
            for e in 0..d {
                for inner in 0..s {
                    let c = a.coeffs[base + e * s + inner];
                    if c == 0 {
                        continue;
                    }
                    if e + 1 < d {
                        let t = base + (e + 1) * s + inner;
                        out[t] = f.add(out[t], c);
                    } else {
                        for &(j, tc) in tail {
                            let t = base + j * s + inner;
                            out[t] = f.add(out[t], f.mul(c, tc));
                        }
                    }
                }
            }
        }
        FieldElement { coeffs: out }
    }

    pub fn pow(&self, a: &FieldElement, mut e: u128) -> Result<FieldElement> {
        self.check(a)?;
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }

    /// Multiplicative inverse, solved as a linear system inside the smallest
    /// sub-tower containing the element.
    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::ZeroDivision);
        }
        let support: Vec<usize> = (0..self.axes.len())
            .filter(|&k| a.coeffs.iter().enumerate().any(|(i, &c)| c != 0 && self.exp_at(i, k) != 0))
            .map(|k| self.axes[k].id)
            .collect();
        let sub = self.sub_tower(&support)?;
        let local = sub.restrict_from(self, a)?;
        let x = sub.inv_dense(&local)?;
        self.embed_from(&sub, &x)
    }

    /// Inverse by solving `a * x = 1` over `F_p` in this tower.
    fn inv_dense(&self, a: &FieldElement) -> Result<FieldElement> {
        let n = self.size;
        let p = self.p();
        // column for monomial idx = a * monomial(idx), built by shifting an earlier column
        let mut cols: Vec<FieldElement> = Vec::with_capacity(n);
        cols.push(a.clone());
        for idx in 1..n {
            let k = (0..self.axes.len()).rev().find(|&k| self.exp_at(idx, k) != 0).expect("idx > 0");
            let prev = idx - self.stride[k];
            let c = self.mul_by_axis(&cols[prev], k);
            cols.push(c);
        }
        let mut ech = Echelon::with_tracking(p, n, n);
        for c in &cols {
            if !ech.insert(&FpVector::from_residues(p, &c.coeffs)) {
                return Err(Error::ZeroDivision);
            }
        }
        let x = ech.express(&FpVector::unit(p, n, 0)).ok_or(Error::ZeroDivision)?;
        Ok(FieldElement { coeffs: x.to_residues() })
    }

    /// Index map from `sub` monomials into this tower (sub's axes must be a subset).
    pub fn embedding(&self, sub: &Tower) -> Result<Vec<usize>> {
        let pos: Vec<usize> = sub
            .axes
            .iter()
            .map(|a| self.position(a.id).ok_or_else(|| Error::IndexSpaceMismatch(format!("axis {} missing", a.id))))
            .collect::<Result<_>>()?;
        Ok((0..sub.size).map(|i| (0..sub.axes.len()).map(|k| sub.exp_at(i, k) * self.stride[pos[k]]).sum()).collect())
    }

    /// Embeds an element of a sub-tower.
    pub fn embed_from(&self, sub: &Tower, a: &FieldElement) -> Result<FieldElement> {
        sub.check(a)?;
        let map = self.embedding(sub)?;
        let mut z = self.zero();
        for (i, &c) in a.coeffs.iter().enumerate() {
            z.coeffs[map[i]] = c;
        }
        Ok(z)
    }

    pub fn embed_sparse_from(&self, sub: &Tower, a: &SparseElement) -> Result<SparseElement> {
        let map = self.embedding(sub)?;
        Ok(SparseElement { terms: a.terms.iter().map(|&(i, c)| (map[i as usize] as u32, c)).collect() })
    }

    /// Restricts an element of a larger tower to this one; fails if it uses other axes.
    pub fn restrict_from(&self, sup: &Tower, a: &FieldElement) -> Result<FieldElement> {
        sup.check(a)?;
        let map = sup.embedding(self)?;
        let mut z = self.zero();
        let mut hit = 0usize;
        for (i, &src) in map.iter().enumerate() {
            z.coeffs[i] = a.coeffs[src];
            hit += (a.coeffs[src] != 0) as usize;
        }
        if hit != a.nnz() {
            return Err(Error::SupportViolation(format!("element uses generators outside axes {:?}", self.ids())));
        }
        Ok(z)
    }

    pub fn restrict_sparse_from(&self, sup: &Tower, a: &SparseElement) -> Result<SparseElement> {
        let map = sup.embedding(self)?;
        let mut back = std::collections::HashMap::with_capacity(map.len());
        for (i, &src) in map.iter().enumerate() {
            back.insert(src as u32, i as u32);
        }
        let terms = a
            .terms
            .iter()
            .map(|&(i, c)| {
                back.get(&i).map(|&j| (j, c)).ok_or_else(|| {
                    Error::SupportViolation(format!("element uses generators outside axes {:?}", self.ids()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SparseElement::from_terms(self.p(), terms))
    }

    /// Relative trace onto the subfield generated by `retained` axis ids,
    /// returned in this tower's coordinates.
    pub fn trace(&self, a: &FieldElement, retained: &[usize]) -> Result<FieldElement> {
        self.check(a)?;
        let f = self.field;
        let mut v = a.coeffs.clone();
        for (k, axis) in self.axes.iter().enumerate() {
            if retained.contains(&axis.id) {
                continue;
            }
            let d = self.radix[k];
            let s = self.stride[k];
            let block = d * s;
            for o in 0..self.size / block {
                let base = o * block;
                for inner in 0..s {
                    let mut acc = 0u32;
                    for e in 0..d {
                        let c = v[base + e * s + inner];
                        if c != 0 {
                            acc = f.add(acc, f.mul(c, axis.power_sums[e]));
                        }
                        v[base + e * s + inner] = 0;
                    }
                    v[base + inner] = acc;
                }
            }
        }
        Ok(FieldElement { coeffs: v })
    }

    /// Trace down to `F_p` of a sparse element (product of per-axis power sums).
    pub fn absolute_trace_sparse(&self, a: &SparseElement) -> u32 {
        let f = self.field;
        a.terms.iter().fold(0, |acc, &(i, c)| {
            let w =
                (0..self.axes.len()).fold(1u32, |w, k| f.mul(w, self.axes[k].power_sums[self.exp_at(i as usize, k)]));
            f.add(acc, f.mul(c, w))
        })
    }

    /// `tr_{this/F_p}(a * b)` computed from unreduced monomial products.
    pub fn trace_form(&self, a: &SparseElement, b: &SparseElement) -> u32 {
        let f = self.field;
        let mut acc = 0u32;
        for &(i, ci) in &a.terms {
            for &(j, cj) in &b.terms {
                let mut w = f.mul(ci, cj);
                for k in 0..self.axes.len() {
                    if w == 0 {
                        break;
                    }
                    let e = self.exp_at(i as usize, k) + self.exp_at(j as usize, k);
                    w = f.mul(w, self.axes[k].power_sums[e]);
                }
                acc = f.add(acc, w);
            }
        }
        acc
    }
}

fn nonzero_terms(c: &[u32]) -> Vec<(u32, u32)> {
    c.iter().enumerate().filter(|(_, &x)| x != 0).map(|(i, &x)| (i as u32, x)).collect()
}

/// Mixed-radix counter, last digit fastest. Returns false on wrap-around.
pub(crate) fn odometer(digits: &mut [usize], radix: &[usize]) -> bool {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < radix[k] {
            return true;
        }
        digits[k] = 0;
    }
    false
}

/// Splits a tower into a "local" sub-tower and the complementary "rest"
/// sub-tower. The parent is their tensor product, so the relative trace onto
/// the rest is `id (x) tr_local` and products of a local and a rest element
/// need no reduction.
#[derive(Clone, Debug)]
pub struct AxisSplit {
    local: Tower,
    rest: Tower,
    local_of: Vec<u32>,
    rest_of: Vec<u32>,
}

impl AxisSplit {
    pub fn new(parent: &Tower, local_ids: &[usize]) -> Result<Self> {
        let rest_ids: Vec<usize> = parent.ids().into_iter().filter(|id| !local_ids.contains(id)).collect();
        let local = parent.sub_tower(local_ids)?;
        let rest = parent.sub_tower(&rest_ids)?;
        let lpos: Vec<usize> = local.axes.iter().map(|a| parent.position(a.id).unwrap()).collect();
        let rpos: Vec<usize> = rest.axes.iter().map(|a| parent.position(a.id).unwrap()).collect();
        let mut local_of = Vec::with_capacity(parent.size);
        let mut rest_of = Vec::with_capacity(parent.size);
        for i in 0..parent.size {
            let li: usize = lpos.iter().enumerate().map(|(k, &pk)| parent.exp_at(i, pk) * local.stride[k]).sum();
            let ri: usize = rpos.iter().enumerate().map(|(k, &pk)| parent.exp_at(i, pk) * rest.stride[k]).sum();
            local_of.push(li as u32);
            rest_of.push(ri as u32);
        }
        Ok(Self { local, rest, local_of, rest_of })
    }

    pub fn local(&self) -> &Tower {
        &self.local
    }

    pub fn rest(&self) -> &Tower {
        &self.rest
    }

    /// `tr_{parent/rest}(e * x)` for a local element `e`, in rest coordinates.
    pub fn trace_product(&self, e: &SparseElement, x: &FieldElement) -> Result<FieldElement> {
        if x.len() != self.local_of.len() {
            return Err(Error::ShapeMismatch { expected: self.local_of.len(), got: x.len() });
        }
        let f = self.local.field;
        // weight(m') = tr_local(e * m') for every local monomial m'
        let mut weight = vec![0u32; self.local.size];
        for &(m, c) in &e.terms {
            let me = self.local.exps_of(m as usize);
            for (mp, w) in weight.iter_mut().enumerate() {
                let mut t = c;
                for (k, axis) in self.local.axes.iter().enumerate() {
                    if t == 0 {
                        break;
                    }
                    t = f.mul(t, axis.power_sums[me[k] + self.local.exp_at(mp, k)]);
                }
                *w = f.add(*w, t);
            }
        }
        let p = f.p() as u64;
        let mut out = vec![0u64; self.rest.size];
        for (k, &c) in x.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let w = weight[self.local_of[k] as usize];
            if w != 0 {
                let slot = &mut out[self.rest_of[k] as usize];
                *slot = (*slot + c as u64 * w as u64) % p;
            }
        }
        Ok(FieldElement { coeffs: out.into_iter().map(|v| v as u32).collect() })
    }

    /// The parent element whose rest-coordinates at local monomial `m` are `parts[m]`,
    /// i.e. `sum_m parts[m] * m`.
    pub fn assemble(&self, parts: &[FieldElement]) -> Result<FieldElement> {
        if parts.len() != self.local.size {
            return Err(Error::ShapeMismatch { expected: self.local.size, got: parts.len() });
        }
        for part in parts {
            self.rest.check(part)?;
        }
        Ok(FieldElement {
            coeffs: self
                .local_of
                .iter()
                .zip(&self.rest_of)
                .map(|(&l, &r)| parts[l as usize].coeffs[r as usize])
                .collect(),
        })
    }

    /// `sum_a rest_a (x) local_a` as a parent element.
    pub fn combine(&self, pairs: &[(FieldElement, FieldElement)]) -> Result<FieldElement> {
        let f = self.local.field;
        let n = self.local_of.len();
        let mut out = vec![0u32; n];
        for (r, l) in pairs {
            self.rest.check(r)?;
            self.local.check(l)?;
            if r.is_zero() || l.is_zero() {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate() {
                let a = r.coeffs[self.rest_of[k] as usize];
                if a == 0 {
                    continue;
                }
                let b = l.coeffs[self.local_of[k] as usize];
                if b != 0 {
                    *o = f.add(*o, f.mul(a, b));
                }
            }
        }
        Ok(FieldElement { coeffs: out })
    }
}

/// Which construction a tower serves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    /// Every `h <= r` erasures from every admissible helper count; `beta` has degree `r!`.
    Universal { r: usize },
    /// Two erasures from `d` helpers; `beta` has degree `(d+1-k)(d+2-k)`.
    TwoErasure { d: usize },
}

/// Subfield `F_A = F_p(alpha_j : j in A)`; `beta` is never retained.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubfieldMask {
    retained: BTreeSet<usize>,
}

impl SubfieldMask {
    pub fn new(retained: impl IntoIterator<Item = usize>) -> Self {
        Self { retained: retained.into_iter().collect() }
    }

    /// Generators of every node outside `excluded`.
    pub fn complement(n: usize, excluded: &[usize]) -> Self {
        Self::new((0..n).filter(|j| !excluded.contains(j)))
    }

    pub fn retained(&self) -> &BTreeSet<usize> {
        &self.retained
    }

    pub fn axis_ids(&self) -> Vec<usize> {
        self.retained.iter().map(|&j| alpha_axis(j)).collect()
    }
}

/// The algebraic context of a code: primes, minimal polynomials, power sums.
#[derive(Debug)]
pub struct TowerSpec {
    p: u32,
    mode: Mode,
    n: usize,
    k: usize,
    beta_degree: usize,
    primes: Vec<usize>,
    axes: Vec<Arc<Axis>>,
    field: OnceLock<Arc<Tower>>,
}

fn factorial(r: usize) -> Option<usize> {
    (1..=r).try_fold(1usize, |acc, x| acc.checked_mul(x))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Builds the tower for an `(n, k)` code in the given mode.
pub fn build_tower(p: u32, mode: Mode, n: usize, k: usize) -> Result<TowerSpec> {
    PrimeField::new(p)?;
    if p >= 1 << 16 {
        return Err(Error::InvalidParameter(format!("p = {p} must be below 65536")));
    }
    if k < 1 || k >= n {
        return Err(Error::InvalidParameter(format!("1 <= k < n required (n = {n}, k = {k})")));
    }
    let beta_degree = match mode {
        Mode::Universal { r } => {
            if r < 1 || r > n - k {
                return Err(Error::InvalidParameter(format!("1 <= r <= n - k required (r = {r})")));
            }
            factorial(r).ok_or_else(|| Error::InvalidParameter(format!("r = {r} is too large")))?
        }
        Mode::TwoErasure { d } => {
            if d < k || d + 2 > n {
                return Err(Error::InvalidParameter(format!("k <= d <= n - 2 required (d = {d})")));
            }
            (d + 1 - k) * (d + 2 - k)
        }
    };
    let primes: Vec<usize> = select_primes(n, beta_degree as u64)?.into_iter().map(|q| q as usize).collect();
    if primes.iter().any(|&q| gcd(beta_degree, q) != 1) {
        return Err(Error::Divisibility(format!("gcd({beta_degree}, prod p_i) != 1")));
    }
    let mut axes = Vec::with_capacity(n + 1);
    axes.push(Arc::new(Axis::new(BETA, find_irreducible(p, beta_degree)?)));
    for (i, &q) in primes.iter().enumerate() {
        axes.push(Arc::new(Axis::new(alpha_axis(i), find_irreducible(p, q)?)));
    }
    Ok(TowerSpec { p, mode, n, k, beta_degree, primes, axes, field: OnceLock::new() })
}

impl TowerSpec {
    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Degree of `beta` (`r!` or `s_1 s_2`).
    pub fn beta_degree(&self) -> usize {
        self.beta_degree
    }

    pub fn primes(&self) -> &[usize] {
        &self.primes
    }

    pub fn alpha_poly(&self, node: usize) -> &PrimeFieldPoly {
        &self.axes[alpha_axis(node)].poly
    }

    pub fn beta_poly(&self) -> &PrimeFieldPoly {
        &self.axes[BETA].poly
    }

    /// `l = [K : F_p] = D * prod p_i`.
    pub fn sub_packetization(&self) -> u128 {
        self.primes.iter().fold(self.beta_degree as u128, |acc, &q| acc * q as u128)
    }

    /// `[K : F_A] = D * prod_{j not in A} p_j`.
    pub fn degree_over(&self, mask: &SubfieldMask) -> u128 {
        (0..self.n)
            .filter(|j| !mask.retained.contains(j))
            .fold(self.beta_degree as u128, |acc, j| acc * self.primes[j] as u128)
    }

    /// `[F_A : F_p] = prod_{j in A} p_j`.
    pub fn subfield_degree(&self, mask: &SubfieldMask) -> u128 {
        mask.retained.iter().fold(1u128, |acc, &j| acc * self.primes[j] as u128)
    }

    /// The whole field `K`, materialized on first use.
    pub fn field(&self) -> Result<Arc<Tower>> {
        if let Some(t) = self.field.get() {
            return Ok(t.clone());
        }
        let t = Arc::new(Tower::new(PrimeField::new_unchecked(self.p), self.axes.clone())?);
        Ok(self.field.get_or_init(|| t).clone())
    }

    /// The sub-tower over the given axis ids, built without materializing `K`.
    pub fn tower_over(&self, ids: &[usize]) -> Result<Tower> {
        let axes = ids
            .iter()
            .map(|&id| {
                self.axes.get(id).cloned().ok_or_else(|| Error::IndexSpaceMismatch(format!("axis {id} not in tower")))
            })
            .collect::<Result<Vec<_>>>()?;
        Tower::new(PrimeField::new_unchecked(self.p), axes)
    }

    /// `beta^u * prod alpha_i^{exps[i]}` in `K`.
    pub fn monomial(&self, u: usize, exps: &[usize]) -> Result<FieldElement> {
        if exps.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: exps.len() });
        }
        let mut all = Vec::with_capacity(self.n + 1);
        all.push(u);
        all.extend_from_slice(exps);
        self.field()?.monomial(&all)
    }

    /// `alpha_i` as an element of `K`.
    pub fn alpha(&self, node: usize) -> Result<FieldElement> {
        self.field()?.generator(alpha_axis(node))
    }

    pub fn beta(&self) -> Result<FieldElement> {
        self.field()?.generator(BETA)
    }
}

pub fn mul(a: &FieldElement, b: &FieldElement, spec: &TowerSpec) -> Result<FieldElement> {
    spec.field()?.mul(a, b)
}

pub fn add(a: &FieldElement, b: &FieldElement, spec: &TowerSpec) -> Result<FieldElement> {
    spec.field()?.add(a, b)
}

pub fn inv(a: &FieldElement, spec: &TowerSpec) -> Result<FieldElement> {
    spec.field()?.inv(a)
}

/// `tr_{K/F_A}(a)`, supported on monomials of the retained generators only.
pub fn trace_to(a: &FieldElement, mask: &SubfieldMask, spec: &TowerSpec) -> Result<FieldElement> {
    spec.field()?.trace(a, &mask.axis_ids())
}

pub fn monomial(u: usize, exps: &[usize], spec: &TowerSpec) -> Result<FieldElement> {
    spec.monomial(u, exps)
}
