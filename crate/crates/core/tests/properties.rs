use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rsrepair::base_algebra::{find_irreducible, is_irreducible, select_primes};
use rsrepair::grs_code::CodeSpec;
use rsrepair::linalg::{Echelon, FpVector};
use rsrepair::repair_engine::{make_plan, plan_downloads, RepairPlan};
use rsrepair::repair_sets::legal_pairs;
use rsrepair::tower_field::{
    build_tower, pack_residues, trace_to, unpack_residues, FieldElement, Mode, SubfieldMask, Tower, TowerSpec,
};

fn spec() -> &'static TowerSpec {
    static SPEC: OnceLock<TowerSpec> = OnceLock::new();
    SPEC.get_or_init(|| build_tower(2, Mode::Universal { r: 2 }, 3, 1).unwrap())
}

fn field() -> Arc<Tower> {
    spec().field().unwrap()
}

fn code() -> Arc<CodeSpec> {
    static CODE: OnceLock<Arc<CodeSpec>> = OnceLock::new();
    CODE.get_or_init(|| Arc::new(CodeSpec::new(spec()).unwrap())).clone()
}

fn plans() -> &'static Vec<RepairPlan> {
    static PLANS: OnceLock<Vec<RepairPlan>> = OnceLock::new();
    PLANS.get_or_init(|| {
        (0..3)
            .map(|f| {
                let helpers: Vec<usize> = (0..3).filter(|&j| j != f).collect();
                make_plan(spec(), code(), &[f], &helpers).unwrap()
            })
            .collect()
    })
}

fn element(seed: u64) -> FieldElement {
    field().random(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// Plain Gaussian elimination over `F_p` on a dense row-major matrix.
fn naive_rank(p: u32, mut rows: Vec<Vec<u32>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&i| !rows[i][c].is_multiple_of(p)) else { continue };
        rows.swap(rank, piv);
        let inv = (1..p).find(|&x| (x as u64 * rows[rank][c] as u64) % p as u64 == 1).unwrap();
        for x in rows[rank].iter_mut() {
            *x = ((*x as u64 * inv as u64) % p as u64) as u32;
        }
        let pivot = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row[c] != 0 {
                let f = row[c] as u64;
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    let sub = (f * y as u64) % p as u64;
                    *x = ((*x as u64 + p as u64 - sub) % p as u64) as u32;
                }
            }
        }
        rank += 1;
    }
    rank
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn multiplication_is_associative_and_distributive(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let k = field();
        let (x, y, z) = (element(a), element(b), element(c));
        prop_assert_eq!(k.mul(&k.mul(&x, &y)?, &z)?, k.mul(&x, &k.mul(&y, &z)?)?);
        prop_assert_eq!(k.mul(&x, &k.add(&y, &z)?)?, k.add(&k.mul(&x, &y)?, &k.mul(&x, &z)?)?);
        prop_assert_eq!(k.mul(&x, &y)?, k.mul(&y, &x)?);
    }

    #[test]
    fn nonzero_elements_invert(a in any::<u64>()) {
        let k = field();
        let x = element(a);
        prop_assume!(!x.is_zero());
        prop_assert_eq!(k.mul(&x, &k.inv(&x)?)?, k.one());
    }

    #[test]
    fn absolute_trace_is_frobenius_invariant(a in any::<u64>(), b in any::<u64>()) {
        let k = field();
        let none = SubfieldMask::new([]);
        let (x, y) = (element(a), element(b));
        let tx = trace_to(&x, &none, spec())?;
        prop_assert_eq!(trace_to(&k.mul(&x, &x)?, &none, spec())?, tx.clone());
        prop_assert!(tx.coeffs()[1..].iter().all(|&c| c == 0));
        let sum = k.add(&trace_to(&x, &none, spec())?, &trace_to(&y, &none, spec())?)?;
        prop_assert_eq!(trace_to(&k.add(&x, &y)?, &none, spec())?, sum);
    }

    #[test]
    fn relative_trace_is_subfield_linear(a in any::<u64>(), b in any::<u64>(), node in 0usize..3) {
        let k = field();
        let mask = SubfieldMask::new([node]);
        let x = element(a);
        let c = k.trace(&element(b), &mask.axis_ids())?;
        let lhs = trace_to(&k.mul(&c, &x)?, &mask, spec())?;
        let rhs = k.mul(&c, &trace_to(&x, &mask, spec())?)?;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn element_bytes_round_trip(a in any::<u64>()) {
        let x = element(a);
        let bytes = x.to_bytes(2);
        prop_assert_eq!(FieldElement::from_bytes(&bytes, 2, x.len())?, x);
    }

    #[test]
    fn residue_packing_round_trips(p in prop::sample::select(vec![2u32, 3, 5, 7, 31, 257]), vals in prop::collection::vec(any::<u32>(), 0..200)) {
        let vals: Vec<u32> = vals.into_iter().map(|v| v % p).collect();
        let packed = pack_residues(&vals, p);
        prop_assert_eq!(unpack_residues(&packed, p, vals.len())?, vals);
    }

    #[test]
    fn erasure_decoding_recovers_message(seed in any::<u64>(), keep in 0usize..3) {
        let c = code();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msg = vec![c.field().random(&mut rng)];
        let cw = c.encode(&msg)?;
        prop_assert_eq!(c.decode_from_k(&[keep], &[cw[keep].clone()])?, msg);
    }

    #[test]
    fn payloads_are_linear(a in any::<u64>(), b in any::<u64>(), f in 0usize..3) {
        let plan = &plans()[f];
        let k = field();
        let j = plan.download().helpers()[0];
        let (x, y) = (element(a), element(b));
        let px = plan.helper_payload(j, &x)?;
        let py = plan.helper_payload(j, &y)?;
        let pxy = plan.helper_payload(j, &k.add(&x, &y)?)?;
        let sum: Vec<u32> = px.symbols.iter().zip(&py.symbols).map(|(u, v)| (u + v) % 2).collect();
        prop_assert_eq!(pxy.symbols, sum);
    }

    #[test]
    fn single_erasure_repair_is_exact(seed in any::<u64>(), f in 0usize..3) {
        let plan = &plans()[f];
        let c = code();
        let cw = c.encode(&[element(seed)])?;
        let payloads = plan
            .download()
            .helpers()
            .iter()
            .map(|&j| plan.helper_payload(j, &cw[j]))
            .collect::<Result<Vec<_>, _>>()?;
        let got = plan.reconstruct(&payloads)?;
        prop_assert_eq!(&got[0], &cw[f]);
        let metered: usize = payloads.iter().map(|p| p.symbols.len()).sum();
        prop_assert_eq!(metered as u128, plan.bandwidth()?.total);
    }

    #[test]
    fn echelon_rank_matches_elimination(
        p in prop::sample::select(vec![2u32, 3, 5, 7]),
        rows in prop::collection::vec(prop::collection::vec(any::<u32>(), 6), 0..8),
    ) {
        let rows: Vec<Vec<u32>> = rows.into_iter().map(|r| r.into_iter().map(|v| v % p).collect()).collect();
        let mut e = Echelon::new(p, 6);
        for r in &rows {
            e.insert(&FpVector::from_residues(p, r));
        }
        prop_assert_eq!(e.rank(), naive_rank(p, rows.clone()));
        for r in &rows {
            prop_assert!(e.contains(&FpVector::from_residues(p, r)));
        }
    }

    #[test]
    fn selected_primes_are_coprime_and_increasing(count in 1usize..7, modulus in 1u64..30) {
        let primes = select_primes(count, modulus)?;
        prop_assert_eq!(primes.len(), count);
        prop_assert!(primes.windows(2).all(|w| w[0] < w[1]));
        for q in primes {
            prop_assert!(q >= 2 && (2..q).all(|t| q % t != 0));
            prop_assert_eq!(modulus % q == 0, false);
        }
    }

    #[test]
    fn found_polynomials_are_irreducible(p in prop::sample::select(vec![2u32, 3, 5]), degree in 1usize..8) {
        let f = find_irreducible(p, degree)?;
        prop_assert_eq!(f.degree(), Some(degree));
        prop_assert!(f.is_monic());
        prop_assert!(is_irreducible(&f)?);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn planned_bandwidth_meets_cutset(n in 3usize..6, k in 1usize..3, r in 1usize..3) {
        prop_assume!(k < n && r <= n - k);
        let t = build_tower(2, Mode::Universal { r }, n, k)?;
        for (h, d) in legal_pairs(t.mode(), n, k) {
            let failed: Vec<usize> = (0..h).collect();
            let helpers: Vec<usize> = (h..h + d).collect();
            let bw = plan_downloads(&t, &failed, &helpers)?.bandwidth()?;
            prop_assert_eq!(bw.total, bw.cutset);
            prop_assert_eq!(bw.total, bw.per_helper * d as u128);
        }
    }
}
