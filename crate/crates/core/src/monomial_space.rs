//! Linear algebra in the reduced monomial space of a failed set.
//!
//! For a failed set `F`, every download-set element is an `F_p`-combination
//! of monomials `beta^u * prod_{j in F} alpha_j^{e_j}`. These monomials form a
//! basis of `K` over the repair field `F_p(alpha_j : j not in F)`, and the
//! rank of `F_p` columns does not grow under field extension, so all span and
//! dimension questions are settled here over `F_p` in dimension
//! `D * prod_{j in F} p_j` instead of `[K : F_p]`.

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{Echelon, FpVector};
use crate::tower_field::{alpha_axis, FieldElement, SparseElement, Tower, TowerSpec, BETA};

/// The sub-tower over `beta` and the generators of the failed nodes.
#[derive(Clone, Debug)]
pub struct RepairSpace {
    failed: Vec<usize>,
    tower: Tower,
}

impl RepairSpace {
    /// `failed` holds 0-based node indices; they are sorted and deduplicated.
    pub fn new(spec: &TowerSpec, failed: &[usize]) -> Result<Self> {
        let mut failed = failed.to_vec();
        failed.sort_unstable();
        let before = failed.len();
        failed.dedup();
        if failed.len() != before {
            return Err(Error::Repeated);
        }
        if let Some(&j) = failed.iter().find(|&&j| j >= spec.n()) {
            return Err(Error::InvalidParameter(format!("node {} out of range", j + 1)));
        }
        let mut ids = vec![BETA];
        ids.extend(failed.iter().map(|&j| alpha_axis(j)));
        let tower = spec.tower_over(&ids)?;
        Ok(Self { failed, tower })
    }

    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn dim(&self) -> usize {
        self.tower.size()
    }

    pub fn p(&self) -> u32 {
        self.tower.p()
    }

    /// Monomial index for `beta^u * prod alpha_{failed[m]}^{e[m]}`.
    pub fn index(&self, u: usize, e: &[usize]) -> Result<usize> {
        let mut exps = Vec::with_capacity(e.len() + 1);
        exps.push(u);
        exps.extend_from_slice(e);
        self.tower.index_of(&exps)
    }

    /// Stride of the `beta` axis and of each failed generator, in that order.
    pub fn strides(&self) -> &[usize] {
        self.tower.stride()
    }
}

/// `F_p` coordinate columns of a set of elements, in canonical column order.
#[derive(Clone, Debug)]
pub struct MonomialMatrix {
    failed: Vec<usize>,
    dim: usize,
    columns: Vec<FpVector>,
    elements: Vec<SparseElement>,
}

fn column_order(a: &FpVector, b: &FpVector) -> Ordering {
    let la = a.first_nonzero_from(0).unwrap_or(usize::MAX);
    let lb = b.first_nonzero_from(0).unwrap_or(usize::MAX);
    la.cmp(&lb).then_with(|| b.cmp_entries(a))
}

impl MonomialMatrix {
    fn from_sparse(space: &RepairSpace, elements: Vec<SparseElement>) -> Self {
        let p = space.p();
        let dim = space.dim();
        let mut pairs: Vec<(FpVector, SparseElement)> = elements
            .into_iter()
            .map(|e| {
                let mut v = FpVector::zeros(p, dim);
                for &(i, c) in e.terms() {
                    v.set(i as usize, c);
                }
                (v, e)
            })
            .collect();
        pairs.sort_by(|a, b| column_order(&a.0, &b.0));
        let (columns, elements) = pairs.into_iter().unzip();
        Self { failed: space.failed.clone(), dim, columns, elements }
    }

    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn columns(&self) -> &[FpVector] {
        &self.columns
    }

    /// The set elements, in the same order as the columns.
    pub fn elements(&self) -> &[SparseElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Projects elements of `K` onto the monomial space of `space`.
pub fn project(elements: &[FieldElement], space: &RepairSpace, spec: &TowerSpec) -> Result<MonomialMatrix> {
    let k = spec.field()?;
    let sparse =
        elements.iter().map(|e| space.tower.restrict_from(&k, e).map(|x| x.to_sparse())).collect::<Result<Vec<_>>>()?;
    Ok(MonomialMatrix::from_sparse(space, sparse))
}

/// Projects elements already written in the coordinates of `space`.
pub fn project_local(elements: &[SparseElement], space: &RepairSpace) -> Result<MonomialMatrix> {
    let dim = space.dim() as u32;
    if let Some(e) = elements.iter().find(|e| e.terms().iter().any(|&(i, _)| i >= dim)) {
        return Err(Error::SupportViolation(format!("term outside the monomial space: {e:?}")));
    }
    Ok(MonomialMatrix::from_sparse(space, elements.to_vec()))
}

pub fn rank(m: &MonomialMatrix) -> usize {
    span_sum_dim(&[m]).expect("a single matrix is always consistent")
}

fn check_same_space(sets: &[&MonomialMatrix]) -> Result<()> {
    if let Some(first) = sets.first() {
        for m in &sets[1..] {
            if m.failed != first.failed || m.dim != first.dim {
                return Err(Error::IndexSpaceMismatch(format!("failed sets {:?} and {:?}", first.failed, m.failed)));
            }
        }
    }
    Ok(())
}

fn p_of(sets: &[&MonomialMatrix]) -> u32 {
    sets.iter().flat_map(|m| m.columns.first()).map(|c| c.p()).next().unwrap_or(2)
}

/// Dimension of the sum of the spans.
pub fn span_sum_dim(sets: &[&MonomialMatrix]) -> Result<usize> {
    check_same_space(sets)?;
    let dim = sets.first().map_or(0, |m| m.dim);
    let mut ech = Echelon::new(p_of(sets), dim);
    for m in sets {
        for c in &m.columns {
            ech.insert(c);
        }
    }
    Ok(ech.rank())
}

/// `dim(span a ∩ span b) = rank a + rank b - rank(a || b)`.
pub fn span_intersection_dim(a: &MonomialMatrix, b: &MonomialMatrix) -> Result<usize> {
    let ra = span_sum_dim(&[a])?;
    let rb = span_sum_dim(&[b])?;
    let rab = span_sum_dim(&[a, b])?;
    Ok(ra + rb - rab)
}

/// Greedy maximal independent subset of the concatenated columns.
pub fn extract_basis(sets: &[&MonomialMatrix]) -> Result<Vec<SparseElement>> {
    check_same_space(sets)?;
    let dim = sets.first().map_or(0, |m| m.dim);
    let mut ech = Echelon::new(p_of(sets), dim);
    let mut out = Vec::new();
    for m in sets {
        for (c, e) in m.columns.iter().zip(&m.elements) {
            if ech.insert(c) {
                out.push(e.clone());
            }
        }
    }
    Ok(out)
}

/// `{a * b : a in A, b in B}` with duplicates removed, first occurrence kept.
pub fn set_product(a: &[SparseElement], b: &[SparseElement], space: &RepairSpace) -> Vec<SparseElement> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let z = space.tower.mul_sparse(x, y);
            if seen.insert(z.clone()) {
                out.push(z);
            }
        }
    }
    out
}
