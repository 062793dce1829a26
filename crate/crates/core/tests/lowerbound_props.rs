mod common;

use common::rel_close;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use psi_core::lowerbound::GAP_TOLERANCE;
use psi_core::{alternative_instance, class_b_check, verify_gap_preservation, ClassVariant, MeanMatrix};

/// Optimal arms evenly spaced on an anti-diagonal, each with one dominated
/// partner close below it.
fn paired_front() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=4, 2.0..5.0f64).prop_flat_map(|(p, s)| {
        prop::collection::vec((0.02..s / 10.0, 0.02..s / 10.0), p).prop_map(move |offsets| {
            let mut rows: Vec<Vec<f64>> = (0..p).map(|i| vec![i as f64 * s, (p - 1 - i) as f64 * s]).collect();
            for (i, (u, v)) in offsets.iter().enumerate() {
                rows.push(vec![i as f64 * s - u, (p - 1 - i) as f64 * s - v]);
            }
            rows
        })
    })
}

/// Like [`paired_front`] but each partner sits at least three times further
/// below its dominator on one axis than on the other, so the margin between
/// the two is large against both gaps.
fn lopsided_front() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..=4, 2.0..5.0f64).prop_flat_map(|(p, s)| {
        prop::collection::vec((0.02..s / 40.0, 3.5..6.0f64, any::<bool>()), p).prop_map(move |offsets| {
            let mut rows: Vec<Vec<f64>> = (0..p).map(|i| vec![i as f64 * s, (p - 1 - i) as f64 * s]).collect();
            for (i, &(u, ratio, flip)) in offsets.iter().enumerate() {
                let (du, dv) = if flip { (u * ratio, u) } else { (u, u * ratio) };
                rows.push(vec![i as f64 * s - du, (p - 1 - i) as f64 * s - dv]);
            }
            rows
        })
    })
}

proptest! {
    #[test]
    fn members_admit_gap_preserving_alternatives(rows in paired_front()) {
        let theta = MeanMatrix::new(rows.clone()).unwrap();
        let report = class_b_check(&theta, ClassVariant::B);
        prop_assume!(report.member);
        for i in 0..rows.len() {
            let alt = alternative_instance(&theta, i, ClassVariant::B).unwrap();
            let changed: Vec<(usize, usize)> = (0..rows.len())
                .flat_map(|a| (0..rows[0].len()).map(move |d| (a, d)))
                .filter(|&(a, d)| alt.row(a)[d] != rows[a][d])
                .collect();
            prop_assert_eq!(changed.len(), 1);
            let (a, d) = changed[0];
            prop_assert_eq!(a, i);
            prop_assert!(rel_close((alt.row(a)[d] - rows[a][d]).abs(), 2.0 * report.gaps[i], 1e-12));

            let g = verify_gap_preservation(&theta, Some(i), ClassVariant::B).unwrap();
            prop_assert!(g.pareto_changed);
            prop_assert!(g.max_rel_deviation <= GAP_TOLERANCE, "arm {}: {}", i, g.max_rel_deviation);
        }
    }

    #[test]
    fn b_prime_alternatives_do_not_raise_complexity(rows in lopsided_front()) {
        let theta = MeanMatrix::new(rows.clone()).unwrap();
        let report = class_b_check(&theta, ClassVariant::BPrime);
        prop_assume!(report.member);
        for i in 0..rows.len() {
            let g = verify_gap_preservation(&theta, Some(i), ClassVariant::BPrime).unwrap();
            prop_assert!(g.pareto_changed, "arm {}", i);
            prop_assert!(g.complexity_not_larger(), "arm {}: {} > {}", i, g.h1_after, g.h1_before);
        }
    }
}

#[test]
fn paired_fronts_are_usually_members() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let mut members = 0;
    for _ in 0..200 {
        let rows = paired_front().new_tree(&mut runner).unwrap().current();
        members += usize::from(class_b_check(&MeanMatrix::new(rows).unwrap(), ClassVariant::B).member);
    }
    assert!(members > 100, "only {members} of 200 generated fronts are members");

    let mut members = 0;
    for _ in 0..200 {
        let rows = lopsided_front().new_tree(&mut runner).unwrap().current();
        members += usize::from(class_b_check(&MeanMatrix::new(rows).unwrap(), ClassVariant::BPrime).member);
    }
    assert!(members > 100, "only {members} of 200 lopsided fronts are B' members");
}
