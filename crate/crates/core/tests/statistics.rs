mod common;

use std::collections::BTreeSet;

use common::rng;
use kosrel::evaluate::{
    correlation_matrix, evolution_cohorts, mann_whitney, mann_whitney_exact, mann_whitney_normal, ChangeRecord,
    ChangeType, CorrelationMethod,
};
use kosrel::{Hierarchy, NodeScores};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Tie-free draws: a random permutation of 1..=n split in two.
fn tie_free(r: &mut impl Rng, n1: usize, n2: usize) -> (Vec<f64>, Vec<f64>) {
    let mut all: Vec<f64> = (1..=n1 + n2).map(|v| v as f64).collect();
    all.shuffle(r);
    let b = all.split_off(n1);
    (all, b)
}

#[test]
fn exact_and_normal_agree_on_small_samples() {
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n1 = r.random_range(8..=10);
        let n2 = r.random_range(8..=10);
        let (a, b) = tie_free(&mut r, n1, n2);
        let e = mann_whitney_exact(&a, &b).unwrap();
        let n = mann_whitney_normal(&a, &b).unwrap();
        assert_eq!(e.u_statistic, n.u_statistic);
        worst = worst.max((e.p_value - n.p_value).abs());
    }
    assert!(worst < 0.02, "largest gap {worst}");
}

#[test]
fn exact_matches_enumeration() {
    // all C(7, 3) assignments of ranks to the first group
    let a = [1.0, 4.0, 6.0];
    let b = [2.0, 3.0, 5.0, 7.0];
    let u_obs = mann_whitney(&a, &b).unwrap().u_statistic;
    let mut count = 0;
    let mut total = 0;
    for mask in 0u32..128 {
        if mask.count_ones() != 3 {
            continue;
        }
        total += 1;
        let r1: u32 = (0..7).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).sum();
        let u1 = r1 as f64 - 6.0;
        if u1.min(12.0 - u1) <= u_obs {
            count += 1;
        }
    }
    let p = mann_whitney(&a, &b).unwrap().p_value;
    assert!((p - (count as f64 / total as f64).min(1.0)).abs() < 1e-12);
}

#[test]
fn planted_shift_is_detected() {
    let mut r = rng(5);
    let a: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut r)).collect();
    let b: Vec<f64> = (0..200).map(|_| 1.0 + Distribution::<f64>::sample(&StandardNormal, &mut r)).collect();
    let res = mann_whitney(&a, &b).unwrap();
    assert!(res.p_value < 0.001, "{}", res.p_value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn symmetric(a in prop::collection::vec(0i32..20, 1..30), b in prop::collection::vec(0i32..20, 1..30)) {
        let a: Vec<f64> = a.into_iter().map(f64::from).collect();
        let b: Vec<f64> = b.into_iter().map(f64::from).collect();
        let x = mann_whitney(&a, &b).unwrap();
        let y = mann_whitney(&b, &a).unwrap();
        prop_assert_eq!(x.u_statistic, y.u_statistic);
        prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&x.p_value));
    }

    #[test]
    fn pearson_matrix_is_psd(seed in any::<u64>(), rows in 3usize..40, cols in 2usize..6) {
        let mut r = rng(seed);
        let columns: Vec<Vec<f64>> = (0..cols).map(|_| (0..rows).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let m = correlation_matrix(&columns, CorrelationMethod::Pearson).unwrap();
        let dm = DMatrix::from_fn(cols, cols, |i, j| m[i][j]);
        prop_assert!((&dm - dm.transpose()).amax() == 0.0);
        let eig = dm.symmetric_eigen();
        prop_assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-9));
    }

    #[test]
    fn cohorts_partition_descriptors(seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = common::random_hierarchy(&mut r, 60, 4);
        let mut b = kosrel::kosmodel::HierarchyBuilder::new();
        for (i, c) in h.codes().iter().enumerate() {
            b.node(c.clone(), "");
            if i % 2 == 0 {
                b.map(c.clone(), &format!("D{}", i / 4));
            }
        }
        let h: Hierarchy = b.build().unwrap();
        let scores: NodeScores = h.codes().iter().map(|c| (c.clone(), r.random_range(0.0..1.0))).collect();
        let changes: Vec<ChangeRecord> = h
            .descriptors()
            .filter(|_| r.random_bool(0.3))
            .map(|(d, _)| ChangeRecord { release: "2014AA".into(), descriptor: d.to_string(), change_type: ChangeType::Move })
            .collect();
        let c = evolution_cohorts(&scores, &changes, &h);
        prop_assert_eq!(c.evolving.len(), changes.len());
        prop_assert_eq!(c.evolving.len() + c.stable.len(), h.descriptor_count());
        let names: BTreeSet<&str> = changes.iter().map(|c| c.descriptor.as_str()).collect();
        prop_assert_eq!(names.len(), changes.len());
    }
}
