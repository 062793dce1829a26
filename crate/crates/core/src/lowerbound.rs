//! Hard-instance machinery behind the fixed-budget lower bound.
//!
//! On instances of class `B` (and the wider `B'`), moving a single arm by
//! twice its gap along one axis changes the Pareto set while keeping every
//! gap unchanged (class `B`) or no larger (class `B'`). This module checks
//! class membership, builds those alternative instances and measures how well
//! the gaps are preserved.

use crate::error::{invalid, PsiError, Result};
use crate::pareto::{dominated_by, gap_vector, h1_of, max_margin, pareto_mask, MeanMatrix};
use crate::scalar::Scalar;

/// Relative tolerance for per-arm gap preservation.
pub const GAP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassVariant {
    #[default]
    B,
    BPrime,
}

/// One margin condition `M(i, j) >= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginCheck<S> {
    pub i: usize,
    pub j: usize,
    pub margin: S,
    pub bound: S,
}

impl<S: Scalar> MarginCheck<S> {
    pub fn holds(&self) -> bool {
        self.margin >= self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassBReport<S> {
    pub variant: ClassVariant,
    pub member: bool,
    pub pareto: Vec<usize>,
    pub gaps: Vec<S>,
    /// For each sub-optimal arm, the arm it is shifted towards (its unique
    /// dominator for `B`, its lowest-index maximal dominator for `B'`).
    pub dominator: Vec<Option<usize>>,
    /// For each optimal arm, its unique dominated partner.
    pub partner: Vec<Option<usize>>,
    /// For each sub-optimal arm, the axis its alternative instance moves along.
    pub shift_dim: Vec<Option<usize>>,
    pub margin_checks: Vec<MarginCheck<S>>,
    /// Human-readable reasons for non-membership.
    pub failures: Vec<String>,
}

/// Arms dominating `i` (Ω(i)).
fn dominators<S: Scalar>(theta: &MeanMatrix<S>, i: usize) -> Vec<usize> {
    (0..theta.arms())
        .filter(|&j| j != i && dominated_by(theta.row(i), theta.row(j)))
        .collect()
}

/// Arms dominated by `j`.
fn dominated<S: Scalar>(theta: &MeanMatrix<S>, j: usize) -> Vec<usize> {
    (0..theta.arms())
        .filter(|&i| i != j && dominated_by(theta.row(i), theta.row(j)))
        .collect()
}

/// `argmin_d (a^d - b^d)`, lowest axis on ties.
fn closest_axis<S: Scalar>(a: &[S], b: &[S]) -> usize {
    let mut best = 0;
    for d in 1..a.len() {
        if a[d] - b[d] < a[best] - b[best] {
            best = d;
        }
    }
    best
}

/// Arms `j` that maximally dominate `i`: `m(i, j) = max_k m(i, k)`.
fn maximal_dominators<S: Scalar>(theta: &MeanMatrix<S>, i: usize) -> Vec<usize> {
    let m = |j: usize| -max_margin(theta.row(i), theta.row(j));
    let best = (0..theta.arms())
        .filter(|&j| j != i)
        .map(m)
        .fold(S::neg_infinity(), S::max);
    (0..theta.arms()).filter(|&j| j != i && m(j) == best).collect()
}

/// Checks the structural and margin conditions of class `B` or `B'`.
pub fn class_b_check<S: Scalar>(theta: &MeanMatrix<S>, variant: ClassVariant) -> ClassBReport<S> {
    let k = theta.arms();
    let mask = pareto_mask(theta);
    let gaps = gap_vector(theta);
    let mut report = ClassBReport {
        variant,
        member: false,
        pareto: (0..k).filter(|&i| mask[i]).collect(),
        gaps: gaps.clone(),
        dominator: vec![None; k],
        partner: vec![None; k],
        shift_dim: vec![None; k],
        margin_checks: Vec::new(),
        failures: Vec::new(),
    };
    if let Some(arm) = gaps.iter().position(|g| !(*g > S::zero())) {
        report.failures.push(format!("arm {arm} has a zero gap"));
        return report;
    }
    match variant {
        ClassVariant::B => check_b(theta, &mask, &gaps, &mut report),
        ClassVariant::BPrime => check_b_prime(theta, &mask, &gaps, &mut report),
    }
    report.member = report.failures.is_empty() && report.margin_checks.iter().all(MarginCheck::holds);
    report
}

fn check_b<S: Scalar>(theta: &MeanMatrix<S>, mask: &[bool], gaps: &[S], report: &mut ClassBReport<S>) {
    let k = theta.arms();
    for i in (0..k).filter(|&i| !mask[i]) {
        match dominators(theta, i).as_slice() {
            [only] => {
                report.dominator[i] = Some(*only);
                report.shift_dim[i] = Some(closest_axis(theta.row(*only), theta.row(i)));
            }
            many => report
                .failures
                .push(format!("sub-optimal arm {i} has {} dominators", many.len())),
        }
    }
    for j in (0..k).filter(|&j| mask[j]) {
        match dominated(theta, j).as_slice() {
            [only] => report.partner[j] = Some(*only),
            many => report
                .failures
                .push(format!("optimal arm {j} dominates {} arms", many.len())),
        }
    }
    if !report.failures.is_empty() {
        return;
    }
    for i in (0..k).filter(|&i| !mask[i]) {
        for j in (0..k).filter(|&j| mask[j]) {
            if dominated_by(theta.row(i), theta.row(j)) {
                continue;
            }
            let partner = report.partner[j].expect("checked above");
            report.margin_checks.push(MarginCheck {
                i,
                j,
                margin: max_margin(theta.row(i), theta.row(j)),
                bound: S::lit(3.0) * gaps[i].max(gaps[partner]),
            });
        }
    }
}

fn check_b_prime<S: Scalar>(theta: &MeanMatrix<S>, mask: &[bool], gaps: &[S], report: &mut ClassBReport<S>) {
    let k = theta.arms();
    let sole_max: Vec<Option<usize>> = (0..k)
        .map(|i| match maximal_dominators(theta, i).as_slice() {
            [only] => Some(*only),
            _ => None,
        })
        .collect();
    // (1): some unit shift by the gap leaves the arm strictly undominated
    for i in (0..k).filter(|&i| !mask[i]) {
        let target = maximal_dominators(theta, i)[0];
        report.dominator[i] = Some(target);
        let preferred = closest_axis(theta.row(target), theta.row(i));
        let axes = std::iter::once(preferred).chain((0..theta.dims()).filter(|&d| d != preferred));
        let found = axes.into_iter().find(|&d| {
            let mut p = theta.row(i).to_vec();
            p[d] = p[d] + gaps[i];
            (0..k).all(|j| j == i || max_margin(&p, theta.row(j)) >= S::zero())
        });
        match found {
            Some(d) => report.shift_dim[i] = Some(d),
            None => report
                .failures
                .push(format!("no unit shift of sub-optimal arm {i} reaches the front")),
        }
    }
    // (2): Π(j) = {p} and Ω(p) = {j}
    for j in (0..k).filter(|&j| mask[j]) {
        let pi: Vec<usize> = (0..k).filter(|&p| !mask[p] && sole_max[p] == Some(j)).collect();
        match pi.as_slice() {
            [p] if dominators(theta, *p) == [j] => report.partner[j] = Some(*p),
            _ => report
                .failures
                .push(format!("optimal arm {j} has no unique maximally dominated partner")),
        }
    }
    if !report.failures.is_empty() {
        return;
    }
    let three = S::lit(3.0);
    // (3)
    for i in (0..k).filter(|&i| mask[i]) {
        for j in (0..k).filter(|&j| j != i && mask[j]) {
            let (pi, pj) = (report.partner[i].unwrap(), report.partner[j].unwrap());
            report.margin_checks.push(MarginCheck {
                i,
                j,
                margin: max_margin(theta.row(i), theta.row(j)),
                bound: three * gaps[pi].max(gaps[pj]),
            });
        }
    }
    // (4)
    for i in 0..k {
        for j in (0..k).filter(|&j| j != i) {
            if dominated_by(theta.row(i), theta.row(j)) {
                continue;
            }
            report.margin_checks.push(MarginCheck {
                i,
                j,
                margin: max_margin(theta.row(i), theta.row(j)),
                bound: three * gaps[i].max(gaps[j]),
            });
        }
    }
}

/// Builds `ν^(i)`: arm `i` moved by `2Δ_i` along one axis, every other row untouched.
///
/// A sub-optimal arm moves up along its shift axis; an optimal arm moves down
/// along the shift axis of its partner.
pub fn alternative_instance<S: Scalar>(
    theta: &MeanMatrix<S>,
    i: usize,
    variant: ClassVariant,
) -> Result<MeanMatrix<S>> {
    if i >= theta.arms() {
        return invalid(format!("arm {i} out of range for K = {}", theta.arms()));
    }
    let report = class_b_check(theta, variant);
    if !report.member {
        return Err(PsiError::NotClassMember(summary(&report)));
    }
    shifted(theta, &report, i)
}

fn shifted<S: Scalar>(theta: &MeanMatrix<S>, report: &ClassBReport<S>, i: usize) -> Result<MeanMatrix<S>> {
    let two_gap = S::lit(2.0) * report.gaps[i];
    let mut row = theta.row(i).to_vec();
    match report.partner[i] {
        Some(p) => {
            let d = report.shift_dim[p].expect("member partners are sub-optimal");
            row[d] = row[d] - two_gap;
        }
        None => {
            let d = report.shift_dim[i].expect("member sub-optimal arms have a shift axis");
            row[d] = row[d] + two_gap;
        }
    }
    theta.with_row(i, &row)
}

fn summary<S: Scalar>(report: &ClassBReport<S>) -> String {
    let mut reasons = report.failures.clone();
    let broken = report.margin_checks.iter().filter(|c| !c.holds()).count();
    if broken > 0 {
        reasons.push(format!("{broken} margin conditions fail"));
    }
    reasons.join("; ")
}

/// Comparison of an instance with one of its alternatives.
#[derive(Debug, Clone, PartialEq)]
pub struct GapPreservationReport<S> {
    /// Shifted arm, `None` for the instance itself.
    pub arm: Option<usize>,
    pub pareto_before: Vec<usize>,
    pub pareto_after: Vec<usize>,
    pub pareto_changed: bool,
    pub gaps_before: Vec<S>,
    pub gaps_after: Vec<S>,
    /// `max_k |Δ_k^(i) - Δ_k| / Δ_k`.
    pub max_rel_deviation: S,
    pub h1_before: S,
    pub h1_after: S,
}

impl<S: Scalar> GapPreservationReport<S> {
    /// Pareto set changed and every gap preserved within [`GAP_TOLERANCE`].
    pub fn preserved(&self) -> bool {
        (self.arm.is_none() || self.pareto_changed) && self.max_rel_deviation <= S::lit(GAP_TOLERANCE)
    }

    /// Pareto set changed and `H` did not grow (up to [`GAP_TOLERANCE`]).
    pub fn complexity_not_larger(&self) -> bool {
        (self.arm.is_none() || self.pareto_changed)
            && self.h1_after <= self.h1_before * (S::one() + S::lit(GAP_TOLERANCE))
    }
}

/// Compares gaps of `ν` and `ν^(i)` (`arm = None` compares `ν` with itself).
pub fn verify_gap_preservation<S: Scalar>(
    theta: &MeanMatrix<S>,
    arm: Option<usize>,
    variant: ClassVariant,
) -> Result<GapPreservationReport<S>> {
    let alt = match arm {
        Some(i) => alternative_instance(theta, i, variant)?,
        None => theta.clone(),
    };
    let before = gap_vector(theta);
    let after = gap_vector(&alt);
    let max_rel_deviation = before
        .iter()
        .zip(&after)
        .map(|(&b, &a)| if a == b { S::zero() } else { ((a - b) / b).abs() })
        .fold(S::zero(), |acc, x| if x.is_nan() || x > acc { x } else { acc });
    let pareto_before = crate::pareto::pareto_set(theta);
    let pareto_after = crate::pareto::pareto_set(&alt);
    Ok(GapPreservationReport {
        arm,
        pareto_changed: pareto_before != pareto_after,
        pareto_before,
        pareto_after,
        h1_before: h1_of(&before),
        h1_after: h1_of(&after),
        gaps_before: before,
        gaps_after: after,
        max_rel_deviation,
    })
}

/// `(1/4)·exp(-2T / (σ² H))`.
pub fn lb_value<S: Scalar>(budget: S, h1: S, sigma: S) -> S {
    S::lit(0.25) * (-(S::lit(2.0) * budget) / (sigma * sigma * h1)).exp()
}
