//! Planning, helper payloads, reconstruction and bandwidth accounting.
//!
//! Failed nodes are repaired one position at a time in ascending node order.
//! At position `a` the node is recovered from its traces onto
//! `F_[a] = F_p(alpha_j : j not among the first a+1 failed nodes)` against a
//! basis `{gamma * alpha^t}` of `K` over `F_[a]`. Those traces come from the
//! dual-codeword identities: helper contributions are read off the downloaded
//! traces onto the coarser `F_[h]`, and earlier positions contribute directly.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grs_code::{annihilator, eval, mul_factors, CodeSpec};
use crate::linalg::{invert, Echelon, FpVector};
use crate::monomial_space::{extract_basis, project_local, RepairSpace};
use crate::repair_sets::{constants, is_legal, RepairConstants, SetBuilder};
use crate::tower_field::{alpha_axis, AxisSplit, FieldElement, SparseElement, Tower, TowerSpec, BETA};

/// `h * d * l / (h + d - k)`, the fewest `F_p` symbols any repair of `h`
/// nodes from `d` helpers can download.
pub fn cutset_bound(h: usize, d: usize, k: usize, l: u128) -> Result<u128> {
    if h == 0 || d < k {
        return Err(Error::InvalidParameter(format!("h >= 1 and d >= k required (h = {h}, d = {d}, k = {k})")));
    }
    let num = h as u128 * d as u128 * l;
    let den = (h + d - k) as u128;
    if !num.is_multiple_of(den) {
        return Err(Error::Divisibility(format!("{den} does not divide {num}")));
    }
    Ok(num / den)
}

/// Bandwidth figures of a plan, all in `F_p` symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bandwidth {
    pub per_helper: u128,
    pub total: u128,
    pub cutset: u128,
    /// Downloading `k` whole nodes and re-encoding.
    pub naive: u128,
    /// Downloading every helper's whole content.
    pub whole_helpers: u128,
}

/// Which symbols each helper sends: the download sets and their merged basis.
#[derive(Clone, Debug)]
pub struct DownloadPlan {
    failed: Vec<usize>,
    helpers: Vec<usize>,
    consts: RepairConstants,
    space: RepairSpace,
    s_sets: Vec<Vec<SparseElement>>,
    basis: Vec<SparseElement>,
    subfield_degree: u128,
    l: u128,
    k: usize,
}

impl DownloadPlan {
    pub fn failed(&self) -> &[usize] {
        &self.failed
    }

    pub fn helpers(&self) -> &[usize] {
        &self.helpers
    }

    pub fn consts(&self) -> &RepairConstants {
        &self.consts
    }

    pub fn space(&self) -> &RepairSpace {
        &self.space
    }

    pub fn s_sets(&self) -> &[Vec<SparseElement>] {
        &self.s_sets
    }

    /// The download basis `B` in the coordinates of the repair space.
    pub fn basis(&self) -> &[SparseElement] {
        &self.basis
    }

    /// `[F_[h] : F_p]`, the number of `F_p` symbols per downloaded trace.
    pub fn subfield_degree(&self) -> u128 {
        self.subfield_degree
    }

    pub fn bandwidth(&self) -> Result<Bandwidth> {
        let per_helper = self.basis.len() as u128 * self.subfield_degree;
        Ok(Bandwidth {
            per_helper,
            total: per_helper * self.helpers.len() as u128,
            cutset: cutset_bound(self.failed.len(), self.helpers.len(), self.k, self.l)?,
            naive: self.k as u128 * self.l,
            whole_helpers: self.helpers.len() as u128 * self.l,
        })
    }
}

fn check_nodes(nodes: &[usize], n: usize, what: &str) -> Result<Vec<usize>> {
    let mut v = nodes.to_vec();
    v.sort_unstable();
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Repeated);
    }
    if let Some(&j) = v.iter().find(|&&j| j >= n) {
        return Err(Error::InvalidParameter(format!("{what} node {} out of range 1..={n}", j + 1)));
    }
    Ok(v)
}

/// Builds the download sets for repairing `failed` from `helpers` (0-based nodes).
pub fn plan_downloads(spec: &TowerSpec, failed: &[usize], helpers: &[usize]) -> Result<DownloadPlan> {
    let n = spec.n();
    let failed = check_nodes(failed, n, "failed")?;
    let helpers = check_nodes(helpers, n, "helper")?;
    if let Some(j) = failed.iter().find(|j| helpers.contains(j)) {
        return Err(Error::IllegalRepair(format!("node {} is both failed and a helper", j + 1)));
    }
    let (h, d) = (failed.len(), helpers.len());
    if !is_legal(spec.mode(), n, spec.k(), h, d) {
        return Err(Error::IllegalRepair(format!(
            "h = {h} failed nodes with d = {d} helpers is not supported by {:?} at n = {n}, k = {}",
            spec.mode(),
            spec.k()
        )));
    }
    let consts = constants(spec.mode(), h, d, spec.k())?;
    let space = RepairSpace::new(spec, &failed)?;
    let builder = SetBuilder::new(&space, &consts)?;
    let s_sets = (0..h).map(|a| builder.s_set(a)).collect::<Result<Vec<_>>>()?;
    let mats = s_sets.iter().map(|s| project_local(s, &space)).collect::<Result<Vec<_>>>()?;
    let basis = extract_basis(&mats.iter().collect::<Vec<_>>())?;
    let subfield_degree = (0..n).filter(|j| !failed.contains(j)).map(|j| spec.primes()[j] as u128).product();
    Ok(DownloadPlan {
        failed,
        helpers,
        consts,
        space,
        s_sets,
        basis,
        subfield_degree,
        l: spec.sub_packetization(),
        k: spec.k(),
    })
}

/// Everything the collector precomputes for one repair position.
#[derive(Clone, Debug)]
struct PositionPlan {
    node: usize,
    s: usize,
    /// `K` split into `F_p(beta, alpha_{f_0..f_a})` and `F_[a]`.
    split: AxisSplit,
    /// `F_[a]` split into the later failed generators and `F_[h]`.
    later: AxisSplit,
    /// `T_a` in the local coordinates of `split`.
    t_set: Vec<SparseElement>,
    /// Dual basis of `{gamma * alpha^t}`, indexed `g * s + t`.
    dual: Vec<FieldElement>,
    /// Coordinates over `B` of `gamma_g * alpha^q` for every later exponent tuple `q`.
    coords: Vec<Vec<Vec<(u32, u32)>>>,
    hankel_inv: Vec<Vec<u32>>,
    /// `alpha_j^t * h_a(alpha_j)` in `F_[a]`, indexed by helper then `t`.
    weights: Vec<Vec<FieldElement>>,
    /// For each earlier position `m`, the sparse factors of `v * h_a` at that node.
    earlier: Vec<Vec<SparseElement>>,
    /// Sparse factors of `(v * h_a)^{-1}` at this node.
    z_inv: Vec<SparseElement>,
}

/// A complete repair plan with everything needed to run it on codewords.
#[derive(Clone, Debug)]
pub struct RepairPlan {
    download: DownloadPlan,
    code: Arc<CodeSpec>,
    top: AxisSplit,
    positions: Vec<PositionPlan>,
}

/// The `F_p` symbols one helper sends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelperPayload {
    pub helper: usize,
    pub symbols: Vec<u32>,
}

fn local_map(space: &Tower, local: &Tower) -> Result<HashMap<u32, u32>> {
    Ok(space.embedding(local)?.into_iter().enumerate().map(|(i, s)| (s as u32, i as u32)).collect())
}

fn relabel(p: u32, e: &SparseElement, map: &HashMap<u32, u32>) -> Result<SparseElement> {
    let terms = e
        .terms()
        .iter()
        .map(|&(i, c)| {
            map.get(&i)
                .map(|&j| (j, c))
                .ok_or_else(|| Error::SupportViolation(format!("monomial {i} outside the local tower")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SparseElement::from_terms(p, terms))
}

/// Builds the full plan: download sets plus every per-position table.
pub fn make_plan(spec: &TowerSpec, code: Arc<CodeSpec>, failed: &[usize], helpers: &[usize]) -> Result<RepairPlan> {
    let download = plan_downloads(spec, failed, helpers)?;
    let k_field = spec.field()?;
    let p = spec.p();
    let failed = download.failed.clone();
    let helpers = download.helpers.clone();
    let h = failed.len();
    let space = &download.space;
    let builder = SetBuilder::new(space, &download.consts)?;
    let failed_ids: Vec<usize> = std::iter::once(BETA).chain(failed.iter().map(|&j| alpha_axis(j))).collect();
    let top = AxisSplit::new(&k_field, &failed_ids)?;

    let mut tracker = Echelon::with_tracking(p, space.dim(), download.basis.len());
    for b in &download.basis {
        tracker.insert(&sparse_vector(p, space.dim(), b));
    }

    let diff_inv = |i: usize, j: usize| -> Result<SparseElement> {
        let d = k_field.sub(&spec.alpha(i)?, &spec.alpha(j)?)?;
        Ok(k_field.inv(&d)?.to_sparse())
    };
    let diff = |i: usize, j: usize| -> Result<SparseElement> {
        Ok(k_field.sub(&spec.alpha(i)?, &spec.alpha(j)?)?.to_sparse())
    };

    let mut positions = Vec::with_capacity(h);
    for a in 0..h {
        let node = failed[a];
        let s = download.consts.s()[a];
        let split = AxisSplit::new(&k_field, &failed_ids[..a + 2])?;
        let later_ids: Vec<usize> = failed[a + 1..].iter().map(|&j| alpha_axis(j)).collect();
        let later = AxisSplit::new(split.rest(), &later_ids)?;
        let local = split.local();

        let t_space = builder.t_set(a)?;
        let map = local_map(space.tower(), local)?;
        let t_set = t_space.iter().map(|g| relabel(p, g, &map)).collect::<Result<Vec<_>>>()?;

        let later_pos: Vec<usize> = (a + 1..h).collect();
        let mut coords = Vec::with_capacity(t_space.len());
        for g in &t_space {
            let shifted = builder.expand(std::slice::from_ref(g), &[], &later_pos)?;
            let per_q = shifted
                .iter()
                .map(|x| {
                    let lam = tracker
                        .express(&sparse_vector(p, space.dim(), x))
                        .ok_or_else(|| Error::IllegalRepair("S element outside the download span".into()))?;
                    Ok(lam.nonzero().into_iter().map(|(b, c)| (b as u32, c)).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            coords.push(per_q);
        }

        let lq = later.local();
        let q_count = lq.size();
        let hankel: Vec<Vec<u32>> = (0..q_count)
            .map(|x| {
                (0..q_count).map(|y| lq.trace_form(&SparseElement::monomial(x), &SparseElement::monomial(y))).collect()
            })
            .collect();
        let hankel_inv = invert(p, &hankel).ok_or(Error::SingularGram(a + 1))?;

        let alpha_pos = local.position(alpha_axis(node)).expect("failed generator in local tower");
        let mut basis_el = Vec::with_capacity(t_set.len() * s);
        for g in &t_set {
            let mut cur = g.to_dense(local.size());
            for _ in 0..s {
                basis_el.push(cur.to_sparse());
                cur = local.mul_by_axis(&cur, alpha_pos);
            }
        }
        let gram: Vec<Vec<u32>> =
            basis_el.iter().map(|x| basis_el.iter().map(|y| local.trace_form(x, y)).collect()).collect();
        let gram_inv = invert(p, &gram).ok_or(Error::SingularGram(a + 1))?;
        let dual = gram_inv
            .iter()
            .map(|row| {
                let mut e = local.zero();
                for (c, b) in row.iter().zip(&basis_el) {
                    if *c != 0 {
                        local.add_scaled(&mut e, *c, &b.to_dense(local.size()));
                    }
                }
                e
            })
            .collect();

        let rest = split.rest();
        let repaired: Vec<usize> = failed[..=a].to_vec();
        let annihilated: Vec<usize> = (0..spec.n()).filter(|j| !helpers.contains(j) && !repaired.contains(j)).collect();
        let points = annihilated.iter().map(|&j| rest.generator(alpha_axis(j))).collect::<Result<Vec<_>>>()?;
        let h_poly = annihilator(rest, &points)?;
        let weights = helpers
            .iter()
            .map(|&j| {
                let x = rest.generator(alpha_axis(j))?;
                let mut w = eval(rest, &h_poly, &x)?;
                let mut out = Vec::with_capacity(s);
                for _ in 0..s {
                    out.push(w.clone());
                    w = rest.mul(&w, &x)?;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;

        let earlier = failed[..a]
            .iter()
            .map(|&m| {
                helpers
                    .iter()
                    .chain(&repaired)
                    .filter(|&&j| j != m)
                    .map(|&j| diff_inv(m, j))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let z_inv = helpers.iter().chain(&failed[..a]).map(|&j| diff(node, j)).collect::<Result<Vec<_>>>()?;

        positions.push(PositionPlan {
            node,
            s,
            split,
            later,
            t_set,
            dual,
            coords,
            hankel_inv,
            weights,
            earlier,
            z_inv,
        });
    }
    Ok(RepairPlan { download, code, top, positions })
}

fn sparse_vector(p: u32, dim: usize, e: &SparseElement) -> FpVector {
    let mut v = FpVector::zeros(p, dim);
    for &(i, c) in e.terms() {
        v.set(i as usize, c);
    }
    v
}

impl RepairPlan {
    pub fn download(&self) -> &DownloadPlan {
        &self.download
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    pub fn bandwidth(&self) -> Result<Bandwidth> {
        self.download.bandwidth()
    }

    /// Size of the reconstruction basis at each position, `[K : F_[a]]`.
    pub fn reconstruction_dims(&self) -> Vec<usize> {
        self.positions.iter().map(|pp| pp.dual.len()).collect()
    }

    /// The reconstruction basis `{gamma * alpha^t}` at a position, embedded in `K`.
    pub fn reconstruction_basis(&self, a: usize) -> Result<Vec<FieldElement>> {
        let pp = self.positions.get(a).ok_or_else(|| Error::InvalidParameter(format!("position {}", a + 1)))?;
        let k = self.code.field();
        let local = pp.split.local();
        let alpha_pos = local.position(alpha_axis(pp.node)).expect("failed generator in local tower");
        let mut out = Vec::with_capacity(pp.dual.len());
        for g in &pp.t_set {
            let mut cur = g.to_dense(local.size());
            for _ in 0..pp.s {
                out.push(k.embed_from(local, &cur)?);
                cur = local.mul_by_axis(&cur, alpha_pos);
            }
        }
        Ok(out)
    }

    /// `tr_{K/F_[h]}(b * v_j * c_j)` for every `b` in `B`, flattened to `F_p` symbols.
    pub fn helper_payload(&self, j: usize, c_j: &FieldElement) -> Result<HelperPayload> {
        if !self.download.helpers.contains(&j) {
            return Err(Error::IllegalRepair(format!("node {} is not a helper", j + 1)));
        }
        let x = self.code.times_v(j, c_j)?;
        let mut symbols = Vec::with_capacity(self.download.basis.len() * self.top.rest().size());
        for b in &self.download.basis {
            symbols.extend_from_slice(self.top.trace_product(b, &x)?.coeffs());
        }
        Ok(HelperPayload { helper: j, symbols })
    }

    /// Recovers the failed nodes, in ascending node order, from one payload per helper.
    pub fn reconstruct(&self, payloads: &[HelperPayload]) -> Result<Vec<FieldElement>> {
        let k = self.code.field();
        let p = k.p();
        let lh = self.top.rest().size();
        let nb = self.download.basis.len();
        let mut by_helper: Vec<Option<&HelperPayload>> = vec![None; self.download.helpers.len()];
        for pl in payloads {
            let idx = self
                .download
                .helpers
                .iter()
                .position(|&j| j == pl.helper)
                .ok_or_else(|| Error::Payload(format!("node {} is not a helper", pl.helper + 1)))?;
            if by_helper[idx].is_some() {
                return Err(Error::Payload(format!("two payloads from node {}", pl.helper + 1)));
            }
            if pl.symbols.len() != nb * lh {
                return Err(Error::Payload(format!(
                    "node {} sent {} symbols, expected {}",
                    pl.helper + 1,
                    pl.symbols.len(),
                    nb * lh
                )));
            }
            by_helper[idx] = Some(pl);
        }
        let payloads: Vec<&HelperPayload> = by_helper
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                x.ok_or_else(|| Error::Payload(format!("missing payload from node {}", self.download.helpers[i] + 1)))
            })
            .collect::<Result<_>>()?;

        let mut recovered: Vec<FieldElement> = Vec::with_capacity(self.positions.len());
        for pp in &self.positions {
            let rest = pp.split.rest();
            let q_count = pp.hankel_inv.len();

            // y[j][g] = tr_{K/F_[a]}(gamma_g * v_j * c_j)
            let mut y: Vec<Vec<FieldElement>> = Vec::with_capacity(payloads.len());
            for pl in &payloads {
                let mut per_g = Vec::with_capacity(pp.t_set.len());
                for coords in &pp.coords {
                    let sigma: Vec<Vec<u64>> = coords
                        .iter()
                        .map(|lam| {
                            let mut acc = vec![0u64; lh];
                            for &(b, c) in lam {
                                let chunk = &pl.symbols[b as usize * lh..(b as usize + 1) * lh];
                                for (a, &x) in acc.iter_mut().zip(chunk) {
                                    *a = (*a + c as u64 * x as u64) % p as u64;
                                }
                            }
                            acc
                        })
                        .collect();
                    let parts = (0..q_count)
                        .map(|x| {
                            let mut acc = vec![0u64; lh];
                            for (q, s) in sigma.iter().enumerate() {
                                let c = pp.hankel_inv[x][q] as u64;
                                if c != 0 {
                                    for (a, &v) in acc.iter_mut().zip(s) {
                                        *a = (*a + c * v) % p as u64;
                                    }
                                }
                            }
                            FieldElement::from_coeffs(acc.into_iter().map(|v| v as u32).collect())
                        })
                        .collect::<Vec<_>>();
                    per_g.push(pp.later.assemble(&parts)?);
                }
                y.push(per_g);
            }

            // earlier repaired nodes, scaled by v * alpha^t * h_a
            let mut xs: Vec<Vec<FieldElement>> = Vec::with_capacity(pp.earlier.len());
            for (m, factors) in pp.earlier.iter().enumerate() {
                let pos = k.position(alpha_axis(self.positions[m].node)).expect("generator in K");
                let mut cur = mul_factors(k, &recovered[m], factors)?;
                let mut per_t = Vec::with_capacity(pp.s);
                for _ in 0..pp.s {
                    per_t.push(cur.clone());
                    cur = k.mul_by_axis(&cur, pos);
                }
                xs.push(per_t);
            }

            let mut pairs = Vec::with_capacity(pp.dual.len());
            for (g, gamma) in pp.t_set.iter().enumerate() {
                for t in 0..pp.s {
                    let mut acc = rest.zero();
                    for per_t in &xs {
                        acc = rest.add(&acc, &pp.split.trace_product(gamma, &per_t[t])?)?;
                    }
                    for (jdx, per_g) in y.iter().enumerate() {
                        acc = rest.add(&acc, &rest.mul(&pp.weights[jdx][t], &per_g[g])?)?;
                    }
                    pairs.push((rest.neg(&acc)?, pp.dual[g * pp.s + t].clone()));
                }
            }
            let scaled = pp.split.combine(&pairs)?;
            recovered.push(mul_factors(k, &scaled, &pp.z_inv)?);
        }
        Ok(recovered)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower_field::{build_tower, trace_to, Mode, SubfieldMask};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(mode: Mode, n: usize, k: usize) -> (TowerSpec, Arc<CodeSpec>) {
        let t = build_tower(2, mode, n, k).unwrap();
        let c = Arc::new(CodeSpec::new(&t).unwrap());
        (t, c)
    }

    fn random_codeword(c: &CodeSpec, rng: &mut ChaCha8Rng) -> Vec<FieldElement> {
        let msg: Vec<_> = (0..c.k()).map(|_| c.field().random(rng)).collect();
        c.encode(&msg).unwrap()
    }

    fn run(plan: &RepairPlan, cw: &[FieldElement]) -> Vec<FieldElement> {
        let payloads: Vec<_> =
            plan.download().helpers().iter().map(|&j| plan.helper_payload(j, &cw[j]).unwrap()).collect();
        plan.reconstruct(&payloads).unwrap()
    }

    #[test]
    fn cutset_examples() {
        assert_eq!(cutset_bound(1, 2, 1, 210).unwrap(), 210);
        assert_eq!(cutset_bound(2, 2, 1, 321594).unwrap(), 428792);
        assert_eq!(cutset_bound(2, 3, 3, 10).unwrap(), 30);
    }

    #[test]
    fn single_erasure_bandwidth() {
        let (t, c) = setup(Mode::Universal { r: 2 }, 3, 1);
        let plan = make_plan(&t, c, &[0], &[1, 2]).unwrap();
        let bw = plan.bandwidth().unwrap();
        assert_eq!(bw.per_helper, 105);
        assert_eq!(bw.total, 210);
        assert_eq!(bw.cutset, 210);
        assert_eq!(bw.naive, 210);
        assert_eq!(bw.whole_helpers, 420);
    }

    #[test]
    fn overlap_and_illegal_sets_rejected() {
        let (t, c) = setup(Mode::Universal { r: 2 }, 3, 1);
        assert!(matches!(make_plan(&t, c.clone(), &[0], &[0, 1]), Err(Error::IllegalRepair(_))));
        assert!(make_plan(&t, c.clone(), &[0, 1, 2], &[]).is_err());
        assert!(matches!(make_plan(&t, c, &[0], &[1, 1]), Err(Error::Repeated)));
    }

    #[test]
    fn payload_matches_multiply_then_trace() {
        let (t, c) = setup(Mode::Universal { r: 2 }, 3, 1);
        let plan = make_plan(&t, c.clone(), &[1], &[0, 2]).unwrap();
        let k = t.field().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = k.random(&mut rng);
        let pl = plan.helper_payload(2, &x).unwrap();
        let mask = SubfieldMask::complement(3, &[1]);
        let rest = t.tower_over(&mask.axis_ids()).unwrap();
        let vx = k.mul(&c.v()[2], &x).unwrap();
        let mut expect = Vec::new();
        for b in plan.download().basis() {
            let bk = k.embed_sparse_from(plan.download().space().tower(), b).unwrap();
            let tr = trace_to(&k.mul(&bk.to_dense(k.size()), &vx).unwrap(), &mask, &t).unwrap();
            expect.extend_from_slice(rest.restrict_from(&k, &tr).unwrap().coeffs());
        }
        assert_eq!(pl.symbols, expect);
        assert_eq!(pl.symbols.len(), 105);
        assert!(plan.helper_payload(1, &x).is_err());
    }

    #[test]
    fn payload_is_linear_and_zero_on_zero() {
        let (t, c) = setup(Mode::Universal { r: 2 }, 3, 1);
        let plan = make_plan(&t, c, &[0], &[1, 2]).unwrap();
        let k = t.field().unwrap();
        assert!(plan.helper_payload(1, &k.zero()).unwrap().symbols.iter().all(|&s| s == 0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, b) = (k.random(&mut rng), k.random(&mut rng));
        let pa = plan.helper_payload(1, &a).unwrap().symbols;
        let pb = plan.helper_payload(1, &b).unwrap().symbols;
        let pab = plan.helper_payload(1, &k.add(&a, &b).unwrap()).unwrap().symbols;
        let sum: Vec<u32> = pa.iter().zip(&pb).map(|(x, y)| (x + y) % 2).collect();
        assert_eq!(pab, sum);
    }

    #[test]
    fn single_erasure_repairs_exactly() {
        let (t, c) = setup(Mode::Universal { r: 2 }, 3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for f in 0..3 {
            let helpers: Vec<usize> = (0..3).filter(|&j| j != f).collect();
            let plan = make_plan(&t, c.clone(), &[f], &helpers).unwrap();
            for _ in 0..3 {
                let cw = random_codeword(&c, &mut rng);
                assert_eq!(run(&plan, &cw), vec![cw[f].clone()]);
            }
            let zero = vec![t.field().unwrap().zero(); 3];
            assert_eq!(run(&plan, &zero), vec![zero[0].clone()]);
        }
    }

    #[test]
    fn two_erasures_repair_exactly() {
        let (t, c) = setup(Mode::Universal { r: 2 }, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let plan = make_plan(&t, c.clone(), &[0, 2], &[1, 3]).unwrap();
        assert_eq!(plan.bandwidth().unwrap().total, 4620);
        for _ in 0..2 {
            let cw = random_codeword(&c, &mut rng);
            assert_eq!(run(&plan, &cw), vec![cw[0].clone(), cw[2].clone()]);
        }
    }

    #[test]
    fn two_erasure_mode_repairs_exactly() {
        let (t, c) = setup(Mode::TwoErasure { d: 2 }, 4, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (failed, helpers) in [(vec![1, 3], vec![0, 2]), (vec![2], vec![0, 1, 3]), (vec![0], vec![1, 3])] {
            let plan = make_plan(&t, c.clone(), &failed, &helpers).unwrap();
            let bw = plan.bandwidth().unwrap();
            assert_eq!(bw.total, bw.cutset);
            let cw = random_codeword(&c, &mut rng);
            let expect: Vec<_> = failed.iter().map(|&j| cw[j].clone()).collect();
            assert_eq!(run(&plan, &cw), expect);
        }
    }

    #[test]
    fn corrupted_payload_breaks_reconstruction() {
        let (t, c) = setup(Mode::Universal { r: 2 }, 3, 1);
        let plan = make_plan(&t, c.clone(), &[0], &[1, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cw = random_codeword(&c, &mut rng);
        let mut payloads: Vec<_> = [1, 2].iter().map(|&j| plan.helper_payload(j, &cw[j]).unwrap()).collect();
        payloads[0].symbols[17] ^= 1;
        assert_ne!(plan.reconstruct(&payloads).unwrap(), vec![cw[0].clone()]);
        payloads[0].symbols.pop();
        assert!(matches!(plan.reconstruct(&payloads), Err(Error::Payload(_))));
        assert!(plan.reconstruct(&payloads[1..]).is_err());
    }
}
