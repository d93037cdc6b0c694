//! Reed-Solomon codes over `K` and the dual GRS codewords used for repair.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::tower_field::{FieldElement, SparseElement, Tower, TowerSpec};

/// Polynomial over a tower, coefficients low degree first.
pub type Poly = Vec<FieldElement>;

/// `RS_K(n, k, Omega)` with `Omega = {alpha_1, .., alpha_n}` and its dual multipliers.
#[derive(Clone, Debug)]
pub struct CodeSpec {
    n: usize,
    k: usize,
    field: Arc<Tower>,
    omega: Vec<FieldElement>,
    v: Vec<FieldElement>,
    /// `v_i` as the list of factors `(omega_i - omega_j)^{-1}`, each sparse.
    v_factors: Vec<Vec<SparseElement>>,
}

impl CodeSpec {
    /// The code evaluated at the tower generators `alpha_1, .., alpha_n`.
    pub fn new(spec: &TowerSpec) -> Result<Self> {
        let field = spec.field()?;
        let omega = (0..spec.n()).map(|i| spec.alpha(i)).collect::<Result<Vec<_>>>()?;
        Self::with_points(field, spec.k(), omega)
    }

    pub fn with_points(field: Arc<Tower>, k: usize, omega: Vec<FieldElement>) -> Result<Self> {
        let n = omega.len();
        if k < 1 || k > n {
            return Err(Error::InvalidParameter(format!("1 <= k <= n required (n = {n}, k = {k})")));
        }
        let v_factors = inverse_differences(&omega, &field)?;
        let v = v_factors
            .iter()
            .map(|fs| fs.iter().try_fold(field.one(), |acc, f| field.mul(&acc, &f.to_dense(field.size()))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n, k, field, omega, v, v_factors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn field(&self) -> &Arc<Tower> {
        &self.field
    }

    pub fn omega(&self) -> &[FieldElement] {
        &self.omega
    }

    pub fn v(&self) -> &[FieldElement] {
        &self.v
    }

    pub fn v_factors(&self, i: usize) -> &[SparseElement] {
        &self.v_factors[i]
    }

    /// Multiplies `x` by `v_i` one sparse factor at a time.
    pub fn times_v(&self, i: usize, x: &FieldElement) -> Result<FieldElement> {
        mul_factors(&self.field, x, &self.v_factors[i])
    }

    /// Evaluates the message polynomial (coefficients low degree first) at every point.
    pub fn encode(&self, message: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: message.len() });
        }
        self.omega.iter().map(|w| eval(&self.field, message, w)).collect()
    }

    /// `(v_j * omega_j^t * h(omega_j))_j`, a codeword of the dual code when
    /// `t + deg h <= n - k - 1`.
    pub fn dual_codeword(&self, t: usize, h: &Poly) -> Result<Vec<FieldElement>> {
        let deg = h.len().saturating_sub(1);
        let bound = self.n - self.k - 1;
        if self.n == self.k || t + deg > bound {
            return Err(Error::DegreeBound { got: t + deg, bound });
        }
        (0..self.n)
            .map(|j| {
                let w = self.field.pow(&self.omega[j], t as u128)?;
                let hv = eval(&self.field, h, &self.omega[j])?;
                self.field.mul(&self.v[j], &self.field.mul(&w, &hv)?)
            })
            .collect()
    }

    /// Recovers the message from `k` coordinates by Lagrange interpolation.
    pub fn decode_from_k(&self, positions: &[usize], values: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if positions.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: positions.len() });
        }
        if values.len() != positions.len() {
            return Err(Error::LengthMismatch { expected: positions.len(), got: values.len() });
        }
        let mut sorted = positions.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Repeated);
        }
        if let Some(&j) = positions.iter().find(|&&j| j >= self.n) {
            return Err(Error::InvalidParameter(format!("position {} out of range", j + 1)));
        }
        let f = &self.field;
        let mut msg = vec![f.zero(); self.k];
        for (a, &pa) in positions.iter().enumerate() {
            let others: Vec<FieldElement> =
                positions.iter().filter(|&&pb| pb != pa).map(|&pb| self.omega[pb].clone()).collect();
            let basis = annihilator(f, &others)?;
            let denom = eval(f, &basis, &self.omega[pa])?;
            let scale = f.mul(&values[a], &f.inv(&denom)?)?;
            for (m, b) in msg.iter_mut().zip(&basis) {
                *m = f.add(m, &f.mul(&scale, b)?)?;
            }
        }
        Ok(msg)
    }
}

/// `sum_i a_i b_i`.
pub fn inner_product(field: &Tower, a: &[FieldElement], b: &[FieldElement]) -> Result<FieldElement> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: b.len() });
    }
    a.iter().zip(b).try_fold(field.zero(), |acc, (x, y)| field.add(&acc, &field.mul(x, y)?))
}

/// Horner evaluation of a polynomial with coefficients low degree first.
pub fn eval(field: &Tower, poly: &[FieldElement], x: &FieldElement) -> Result<FieldElement> {
    poly.iter().rev().try_fold(field.zero(), |acc, c| field.add(&field.mul(&acc, x)?, c))
}

/// Monic `prod (x - a)` over the given points.
pub fn annihilator(field: &Tower, points: &[FieldElement]) -> Result<Poly> {
    let mut poly = vec![field.one()];
    for a in points {
        let mut next = vec![field.zero(); poly.len() + 1];
        for (d, c) in poly.iter().enumerate() {
            next[d + 1] = field.add(&next[d + 1], c)?;
            next[d] = field.sub(&next[d], &field.mul(c, a)?)?;
        }
        poly = next;
    }
    Ok(poly)
}

/// Multiplies `x` by each sparse factor in turn.
pub fn mul_factors(field: &Tower, x: &FieldElement, factors: &[SparseElement]) -> Result<FieldElement> {
    factors.iter().try_fold(x.clone(), |acc, f| field.mul(&acc, &f.to_dense(field.size())))
}

fn inverse_differences(omega: &[FieldElement], field: &Tower) -> Result<Vec<Vec<SparseElement>>> {
    let mut out = Vec::with_capacity(omega.len());
    for (i, wi) in omega.iter().enumerate() {
        let mut fs = Vec::with_capacity(omega.len().saturating_sub(1));
        for (j, wj) in omega.iter().enumerate() {
            if i == j {
                continue;
            }
            let diff = field.sub(wi, wj)?;
            if diff.is_zero() {
                return Err(Error::Repeated);
            }
            fs.push(field.inv(&diff)?.to_sparse());
        }
        out.push(fs);
    }
    Ok(out)
}

/// `v_i = prod_{j != i} (omega_i - omega_j)^{-1}`.
pub fn dual_multipliers(field: &Tower, omega: &[FieldElement]) -> Result<Vec<FieldElement>> {
    inverse_differences(omega, field)?.iter().map(|fs| mul_factors(field, &field.one(), fs)).collect()
}
