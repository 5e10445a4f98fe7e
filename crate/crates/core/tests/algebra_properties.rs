use std::collections::BTreeSet;

use coker_core::matrix::{cokernel, determinant, howell_form, MatrixOverR};
use coker_core::modules::{hom_count, sur_count, ConcreteModule, ModuleType};
use coker_core::Ring;
use num_bigint::BigUint;
use proptest::prelude::*;

const RINGS: [&str; 5] = ["Z/2", "Z/4", "Z/8", "Z/9", "F4[t]/t^2"];

fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = (usize, Vec<u32>)> {
    (0..RINGS.len(), prop::collection::vec(any::<u32>(), rows * cols))
}

fn build(which: usize, rows: usize, cols: usize, raw: &[u32]) -> (Ring, MatrixOverR) {
    let ring = Ring::parse(RINGS[which]).unwrap();
    let data = raw.iter().map(|x| x % ring.size()).collect();
    let m = MatrixOverR::new(&ring, rows, cols, data).unwrap();
    (ring, m)
}

/// Elementary transvection `I + c e_{ij}`.
fn transvection(ring: &Ring, n: usize, i: usize, j: usize, c: u32) -> MatrixOverR {
    let mut t = MatrixOverR::identity(ring, n);
    if i != j {
        t.set(i, j, c);
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cokernel_is_invariant_under_elementary_operations(
        (which, raw) in arb_matrix(3, 4),
        ops in prop::collection::vec((0usize..3, 0usize..4, 0usize..4, any::<u32>(), any::<bool>()), 1..8),
    ) {
        let (ring, m) = build(which, 3, 4, &raw);
        let before = cokernel(&m);
        let mut x = m.clone();
        let mut right_only = m.clone();
        for (i, a, b, c, left) in ops {
            let c = c % ring.size();
            if left {
                x = transvection(&ring, 3, i, a % 3, c).mul(&x).unwrap();
            } else {
                let t = transvection(&ring, 4, a, b, c);
                x = x.mul(&t).unwrap();
                right_only = right_only.mul(&t).unwrap();
            }
        }
        prop_assert_eq!(cokernel(&x), before);
        // column operations preserve the span itself
        prop_assert_eq!(howell_form(&right_only).encoding(), howell_form(&m).encoding());
    }

    #[test]
    fn cokernel_size_matches_span_size((which, raw) in arb_matrix(3, 2)) {
        let (ring, m) = build(which, 3, 2, &raw);
        let coker = cokernel(&m);
        prop_assert_eq!(coker.length() + howell_form(&m).span_length(&ring), ring.e() * 3);
    }

    #[test]
    fn determinant_valuation_is_capped_cokernel_length((which, raw) in arb_matrix(3, 3)) {
        let (ring, m) = build(which, 3, 3, &raw);
        let det = determinant(&m).unwrap();
        let v = ring.valuation(det).unwrap();
        let length = cokernel(&m).length();
        prop_assert_eq!(v, length.min(ring.e()));
        prop_assert_eq!(ring.is_unit(det).unwrap(), cokernel(&m).is_trivial());
    }
}

/// Span of `images` inside the concrete module, by closing under addition and scaling.
fn span(module: &ConcreteModule, images: &[u32]) -> BTreeSet<u32> {
    let ring = module.ring();
    let mut set = BTreeSet::from([0u32]);
    for &g in images {
        let multiples: Vec<u32> = (0..ring.size()).map(|r| module.scale(r, g)).collect();
        set = set.iter().flat_map(|&s| multiples.iter().map(move |&t| module.add(s, t))).collect();
    }
    set
}

/// Homomorphisms `A -> B` given by generator images `b_i` with `pi^(lambda_i) b_i = 0`.
fn brute_force_homs(a: &ModuleType, b: &ConcreteModule) -> (u64, u64) {
    let admissible: Vec<Vec<u32>> = a
        .lambda()
        .iter()
        .map(|&l| (0..b.size()).filter(|&x| b.mul_pi_pow(x, l) == 0).collect())
        .collect();
    let mut homs = 0;
    let mut surs = 0;
    let mut idx = vec![0usize; admissible.len()];
    loop {
        homs += 1;
        let images: Vec<u32> = idx.iter().zip(&admissible).map(|(&i, opts)| opts[i]).collect();
        if span(b, &images).len() == b.size() as usize {
            surs += 1;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return (homs, surs);
            }
            idx[k] += 1;
            if idx[k] < admissible[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn hom_sur_aut_counts_match_brute_force() {
    for ring in ["Z/4", "Z/8", "Z/9", "F4[t]/t^2", "Z/2"] {
        let ring = Ring::parse(ring).unwrap();
        let types: Vec<ModuleType> =
            ModuleType::enumerate(ring.spec(), 3).into_iter().filter(|t| t.cardinality_u64().unwrap() <= 64).collect();
        for a in &types {
            for b in &types {
                if a.is_trivial() || b.is_trivial() {
                    continue;
                }
                let concrete = ConcreteModule::new(&ring, b.clone()).unwrap();
                let (homs, surs) = brute_force_homs(a, &concrete);
                assert_eq!(hom_count(a, b).unwrap(), BigUint::from(homs), "Hom({a:?}, {b:?})");
                assert_eq!(sur_count(a, b).unwrap(), BigUint::from(surs), "Sur({a:?}, {b:?})");
                if a == b {
                    assert_eq!(a.aut_count(), BigUint::from(surs), "Aut({a:?})");
                }
            }
        }
    }
}

#[test]
fn general_linear_group_order_over_z4() {
    let ring = Ring::parse("Z/4").unwrap();
    let mut invertible = 0u64;
    for code in 0..256u32 {
        let data = (0..4).map(|i| (code >> (2 * i)) & 3).collect();
        let m = MatrixOverR::new(&ring, 2, 2, data).unwrap();
        if ring.is_unit(determinant(&m).unwrap()).unwrap() {
            invertible += 1;
        }
    }
    let free = ModuleType::free(ring.spec(), 2);
    assert_eq!(BigUint::from(invertible), free.aut_count());
    // |GL_2(F_2)| * 2^4
    assert_eq!(invertible, 96);
}
