use proptest::prelude::*;

use pwaff_core::catalog;
use pwaff_core::exactgeom::{int, RMat, RVec};
use pwaff_core::pwamap::{iterate_partition, max_multiplicity, refine, PwaMap};
use pwaff_core::rates::{exterior_norm, lambda_rates};
use pwaff_core::skew::{BaseDynamics, SkewProduct};

const CAP: usize = 200_000;

fn random(d: usize, seed: u64) -> PwaMap {
    catalog::random_map(d, seed).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn refinement_nests_cells(d in 1usize..=3, seed in any::<u64>()) {
        let f = random(d, seed);
        let n = if d == 3 { 2 } else { 3 };
        let p = iterate_partition(&f, n, CAP).unwrap();
        let q = refine(&p, &f).unwrap();
        prop_assert!(q.len() >= p.len());
        for c in &q.cells {
            let parent = p.cells.iter().find(|a| a.word[..] == c.word[..n]);
            prop_assert!(parent.is_some(), "word {:?} has no parent", c.word);
            prop_assert!(c.region.closure_subset_of(&parent.unwrap().region).unwrap());
        }
    }

    #[test]
    fn cells_are_disjoint_and_words_distinct(d in 1usize..=2, seed in any::<u64>()) {
        let f = random(d, seed);
        let p = iterate_partition(&f, 3, CAP).unwrap();
        prop_assert_eq!(p.words().len(), p.len());
        for (i, a) in p.cells.iter().enumerate() {
            for b in &p.cells[i + 1..] {
                prop_assert!(!a.region.intersect(&b.region).unwrap().has_interior());
            }
        }
    }

    #[test]
    fn counts_are_monotone_and_submultiplicative(d in 1usize..=2, seed in any::<u64>()) {
        let f = random(d, seed);
        let ps: Vec<_> = (1..=4).map(|n| iterate_partition(&f, n, CAP).unwrap()).collect();
        let mult: Vec<usize> = ps.iter().map(|p| max_multiplicity(p).unwrap().0).collect();
        for k in 1..ps.len() {
            prop_assert!(ps[k].len() >= ps[k - 1].len());
            prop_assert!(mult[k] >= mult[k - 1]);
        }
        for m in 1..=2 {
            for n in 1..=(4 - m) {
                prop_assert!(ps[m + n - 1].len() <= ps[m - 1].len() * ps[n - 1].len());
            }
        }
    }

    #[test]
    fn norm_rates_are_subadditive(d in 1usize..=2, seed in any::<u64>()) {
        let f = random(d, seed);
        let total = |n: usize| {
            let r = lambda_rates(&iterate_partition(&f, n, CAP).unwrap()).unwrap();
            (n as f64 * r.lambda_max, n as f64 * r.lambda_plus)
        };
        let (m1, p1) = total(1);
        let (m2, p2) = total(2);
        let (m3, p3) = total(3);
        prop_assert!(m3 <= m1 + m2 + 1e-9);
        prop_assert!(p3 <= p1 + p2 + 1e-9);
    }

    #[test]
    fn exterior_norms_are_submultiplicative(seed_a in any::<u64>(), seed_b in any::<u64>(), k in 1usize..=2) {
        let a = random(2, seed_a).pieces()[0].map.linear.clone();
        let b = random(2, seed_b).pieces()[0].map.linear.clone();
        let ab = a.mul(&b).unwrap();
        let n = |m: &RMat| exterior_norm(&m.to_f64(), k);
        prop_assert!(n(&ab) <= n(&a) * n(&b) * (1.0 + 1e-12));
    }

    #[test]
    fn flattened_skews_keep_block_structure(base_seed in any::<u64>(), fibre_seed in any::<u64>(), pick in any::<u8>()) {
        let base = random(1, base_seed);
        let fibres = vec![random(1, fibre_seed), random(1, fibre_seed.wrapping_add(1))];
        let fibre_space = fibres[0].ambient().clone();
        let assignment: Vec<usize> = (0..base.pieces().len()).map(|i| (pick as usize >> i) & 1).collect();
        let sp = SkewProduct::new(BaseDynamics::Map(base.clone()), fibre_space, fibres.clone(), assignment.clone()).unwrap();
        let flat = sp.flatten().unwrap();
        let p = iterate_partition(&flat, 3, CAP).unwrap();
        for c in &p.cells {
            let l = &c.composed.linear;
            prop_assert!(l[(0, 1)] == int(0) && l[(1, 0)] == int(0));
            let mut base_part = RMat::identity(1);
            let mut fibre_part = RMat::identity(1);
            // diagonal blocks are the base and fibre compositions along the cell's orbit
            let x = c.region.interior_point().unwrap();
            let orbit = base.orbit(&RVec(vec![x[0].clone()]), 3).unwrap();
            let mut y = RVec(vec![x[1].clone()]);
            for &k in &orbit.itinerary {
                base_part = base.pieces()[k].map.linear.mul(&base_part).unwrap();
                let g = &fibres[assignment[k]];
                let j = g.piece_of(&y).unwrap();
                fibre_part = g.pieces()[j].map.linear.mul(&fibre_part).unwrap();
                y = g.evaluate(&y).unwrap();
            }
            prop_assert_eq!(l.block(0, 0, 1, 1), base_part);
            prop_assert_eq!(l.block(1, 1, 1, 1), fibre_part);
        }
    }
}
