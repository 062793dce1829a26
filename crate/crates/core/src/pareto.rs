//! Pareto dominance, margins, sub-optimality gaps and complexity terms on known means.
//!
//! Arms are indexed from 0. For a pair of arms the two margins are
//!
//! * `M(i, j) = max_d (mu_i^d - mu_j^d)`: the smallest uniform increase of `j`
//!   that makes it dominate `i`,
//! * `m(i, j) = min_d (mu_j^d - mu_i^d) = -M(i, j)`.
//!
//! Gaps follow the fixed-confidence definitions: for a sub-optimal arm the
//! largest `m(i, j)` over optimal `j`; for an optimal arm the minimum of its
//! distance to the other optimal arms and to the sub-optimal arms (shifted by
//! their own gaps). [`gap_unified`] computes the same quantity without first
//! computing the Pareto set.

use crate::error::{invalid, PsiError, Result};
use crate::scalar::{cmp_nan_last, Scalar};

/// `K x D` matrix of arm means, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanMatrix<S> {
    arms: usize,
    dims: usize,
    data: Vec<S>,
}

impl<S: Scalar> MeanMatrix<S> {
    /// Builds a matrix from one row per arm. Requires `K >= 2`, `D >= 1`,
    /// equal row lengths and finite entries.
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self> {
        let arms = rows.len();
        let dims = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dims) {
            return Err(PsiError::Validation("rows have different lengths".into()));
        }
        Self::from_flat(arms, dims, rows.into_iter().flatten().collect())
    }

    pub fn from_flat(arms: usize, dims: usize, data: Vec<S>) -> Result<Self> {
        if arms < 2 {
            return Err(PsiError::Validation(format!("need at least 2 arms, got {arms}")));
        }
        if dims < 1 {
            return Err(PsiError::Validation("need at least 1 objective".into()));
        }
        if data.len() != arms * dims {
            return Err(PsiError::Validation(format!(
                "expected {} entries for a {arms}x{dims} matrix, got {}",
                arms * dims,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(PsiError::Validation(format!(
                "non-finite mean at arm {}, objective {}",
                pos / dims,
                pos % dims
            )));
        }
        Ok(Self { arms, dims, data })
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, arm: usize) -> &[S] {
        &self.data[arm * self.dims..(arm + 1) * self.dims]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> + '_ {
        self.data.chunks_exact(self.dims)
    }

    pub fn as_flat(&self) -> &[S] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.rows().map(<[S]>::to_vec).collect()
    }

    /// Copy of the matrix with one row replaced.
    pub fn with_row(&self, arm: usize, row: &[S]) -> Result<Self> {
        if arm >= self.arms {
            return invalid(format!("arm {arm} out of range for K = {}", self.arms));
        }
        if row.len() != self.dims {
            return invalid(format!("row has {} entries, expected {}", row.len(), self.dims));
        }
        let mut data = self.data.clone();
        data[arm * self.dims..(arm + 1) * self.dims].copy_from_slice(row);
        Self::from_flat(self.arms, self.dims, data)
    }

    /// Converts every entry to another scalar type.
    pub fn cast<T: Scalar>(&self) -> MeanMatrix<T> {
        MeanMatrix {
            arms: self.arms,
            dims: self.dims,
            data: self.data.iter().map(|&x| T::lit(x.to_f64_lossy())).collect(),
        }
    }

    fn check_arm(&self, i: usize) -> Result<()> {
        if i >= self.arms {
            return invalid(format!("arm {i} out of range for K = {}", self.arms));
        }
        Ok(())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_arm(i)?;
        self.check_arm(j)?;
        if i == j {
            return invalid(format!("margins need two distinct arms, got i = j = {i}"));
        }
        Ok(())
    }

    /// `K x K` table of `M(i, j)`; the diagonal is left at zero.
    pub fn margin_table(&self) -> Vec<S> {
        margin_table(self.arms, |i| self.row(i))
    }
}

/// `max_d (a^d - b^d)`.
#[inline]
pub fn max_margin<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x - y).fold(S::neg_infinity(), S::max)
}

/// `a ≺ b`: `a <= b` componentwise with at least one strict coordinate.
#[inline]
pub fn dominated_by<S: Scalar>(a: &[S], b: &[S]) -> bool {
    let mut strict = false;
    for (&x, &y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

pub(crate) fn margin_table<'a, S: Scalar>(n: usize, row: impl Fn(usize) -> &'a [S]) -> Vec<S> {
    let mut table = vec![S::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                table[i * n + j] = max_margin(row(i), row(j));
            }
        }
    }
    table
}

/// `M(i, j)`.
pub fn big_m<S: Scalar>(theta: &MeanMatrix<S>, i: usize, j: usize) -> Result<S> {
    theta.check_pair(i, j)?;
    Ok(max_margin(theta.row(i), theta.row(j)))
}

/// `m(i, j)`, computed as the exact negation of `M(i, j)`.
pub fn little_m<S: Scalar>(theta: &MeanMatrix<S>, i: usize, j: usize) -> Result<S> {
    big_m(theta, i, j).map(|x| -x)
}

/// Indices of arms not dominated by any other arm, ascending.
pub fn pareto_set<S: Scalar>(theta: &MeanMatrix<S>) -> Vec<usize> {
    pareto_mask(theta)
        .into_iter()
        .enumerate()
        .filter_map(|(i, opt)| opt.then_some(i))
        .collect()
}

pub(crate) fn pareto_mask<S: Scalar>(theta: &MeanMatrix<S>) -> Vec<bool> {
    (0..theta.arms)
        .map(|i| (0..theta.arms).all(|j| j == i || !dominated_by(theta.row(i), theta.row(j))))
        .collect()
}

fn gap_sub_given<S: Scalar>(theta: &MeanMatrix<S>, mask: &[bool], i: usize) -> S {
    (0..theta.arms)
        .filter(|&j| mask[j])
        .map(|j| -max_margin(theta.row(i), theta.row(j)))
        .fold(S::neg_infinity(), S::max)
}

fn gap_opt_given<S: Scalar>(theta: &MeanMatrix<S>, mask: &[bool], i: usize) -> (S, S) {
    let mut plus = S::infinity();
    let mut minus = S::infinity();
    for j in (0..theta.arms).filter(|&j| j != i) {
        let m_ij = max_margin(theta.row(i), theta.row(j));
        let m_ji = max_margin(theta.row(j), theta.row(i));
        if mask[j] {
            plus = plus.min(m_ij.min(m_ji));
        } else {
            minus = minus.min(m_ji.pos() + gap_sub_given(theta, mask, j));
        }
    }
    (plus, minus)
}

/// Gap of a sub-optimal arm: `max_{j in S*} m(i, j)`.
pub fn gap_suboptimal<S: Scalar>(theta: &MeanMatrix<S>, i: usize) -> Result<S> {
    theta.check_arm(i)?;
    let mask = pareto_mask(theta);
    if mask[i] {
        return invalid(format!("arm {i} is Pareto optimal"));
    }
    Ok(gap_sub_given(theta, &mask, i))
}

/// Gap of an optimal arm: `min(delta_plus, delta_minus)`, with `min` over an
/// empty set equal to `+inf`.
pub fn gap_optimal<S: Scalar>(theta: &MeanMatrix<S>, i: usize) -> Result<S> {
    let (plus, minus) = gap_optimal_parts(theta, i)?;
    Ok(plus.min(minus))
}

/// `(delta_plus, delta_minus)` for an optimal arm.
pub fn gap_optimal_parts<S: Scalar>(theta: &MeanMatrix<S>, i: usize) -> Result<(S, S)> {
    theta.check_arm(i)?;
    let mask = pareto_mask(theta);
    if !mask[i] {
        return invalid(format!("arm {i} is not Pareto optimal"));
    }
    Ok(gap_opt_given(theta, &mask, i))
}

/// Gap of any arm without reference to the Pareto set: `Delta*_i` when it is
/// positive, `delta*_i = min_{j != i} [M(i,j) ∧ (M(j,i)^+ + (Delta*_j)^+)]` otherwise.
pub fn gap_unified<S: Scalar>(theta: &MeanMatrix<S>, i: usize) -> Result<S> {
    theta.check_arm(i)?;
    let table = theta.margin_table();
    let parts = UnifiedParts::from_table(theta.arms, &table);
    Ok(parts.unified(i))
}

/// `Delta*` and `delta*` for every arm of an `n x n` margin table.
#[derive(Debug, Clone)]
pub(crate) struct UnifiedParts<S> {
    pub delta_star: Vec<S>,
    pub delta_small: Vec<S>,
}

impl<S: Scalar> UnifiedParts<S> {
    pub fn from_table(n: usize, table: &[S]) -> Self {
        let delta_star: Vec<S> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| -table[i * n + j])
                    .fold(S::neg_infinity(), S::max)
            })
            .collect();
        let delta_small = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| table[i * n + j].min(table[j * n + i].pos() + delta_star[j].pos()))
                    .fold(S::infinity(), S::min)
            })
            .collect();
        Self {
            delta_star,
            delta_small,
        }
    }

    pub fn unified(&self, i: usize) -> S {
        if self.delta_star[i] > S::zero() {
            self.delta_star[i]
        } else {
            self.delta_small[i]
        }
    }
}

/// Gaps and complexity terms of an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile<S> {
    /// Optimal arms, ascending.
    pub pareto: Vec<usize>,
    /// Gap of every arm (`+inf` allowed).
    pub delta: Vec<S>,
    /// Signed `Delta*_i = max_{j != i} m(i, j)`.
    pub delta_star: Vec<S>,
    /// `H = sum_a Delta_a^-2`.
    pub h1: S,
    /// `H_2 = max_i i * Delta_(i)^-2` with gaps sorted ascending.
    pub h2: S,
}

impl<S: Scalar> GapProfile<S> {
    pub fn is_optimal(&self, arm: usize) -> bool {
        self.pareto.binary_search(&arm).is_ok()
    }
}

/// Per-arm gaps by the branch definitions (no degeneracy check).
pub fn gap_vector<S: Scalar>(theta: &MeanMatrix<S>) -> Vec<S> {
    let mask = pareto_mask(theta);
    (0..theta.arms)
        .map(|i| {
            if mask[i] {
                let (p, m) = gap_opt_given(theta, &mask, i);
                p.min(m)
            } else {
                gap_sub_given(theta, &mask, i)
            }
        })
        .collect()
}

/// `sum_a Delta_a^-2`, infinite gaps contributing zero.
pub fn h1_of<S: Scalar>(gaps: &[S]) -> S {
    gaps.iter()
        .filter(|g| g.is_finite())
        .fold(S::zero(), |acc, &g| acc + (g * g).recip())
}

/// `max_i i * Delta_(i)^-2`, infinite gaps ranked last (contributing zero).
pub fn h2_of<S: Scalar>(gaps: &[S]) -> S {
    let mut sorted = gaps.to_vec();
    sorted.sort_by(|a, b| cmp_nan_last(*a, *b));
    sorted
        .iter()
        .enumerate()
        .filter(|(_, g)| g.is_finite())
        .map(|(rank, &g)| S::lit((rank + 1) as f64) / (g * g))
        .fold(S::zero(), S::max)
}

/// Gaps, `H` and `H_2`. Fails with [`PsiError::DegenerateInstance`] when some
/// gap is zero (e.g. duplicated means at the classification boundary).
pub fn complexity_profile<S: Scalar>(theta: &MeanMatrix<S>) -> Result<GapProfile<S>> {
    let delta = gap_vector(theta);
    if let Some(arm) = delta.iter().position(|g| !(*g > S::zero())) {
        return Err(PsiError::DegenerateInstance { arm });
    }
    let table = theta.margin_table();
    let delta_star = UnifiedParts::from_table(theta.arms, &table).delta_star;
    Ok(GapProfile {
        pareto: pareto_set(theta),
        h1: h1_of(&delta),
        h2: h2_of(&delta),
        delta,
        delta_star,
    })
}

/// Gaps relaxed for the "at most k optimal arms" problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedGapProfile<S> {
    pub k: usize,
    /// k-th largest gap among optimal arms, zero if fewer than `k` are optimal.
    pub omega_k: S,
    pub delta_k: Vec<S>,
    pub h2_k: S,
}

pub fn relaxed_profile<S: Scalar>(theta: &MeanMatrix<S>, k: usize) -> Result<RelaxedGapProfile<S>> {
    if k < 1 {
        return invalid("k must be at least 1");
    }
    let profile = complexity_profile(theta)?;
    Ok(relax(&profile, k))
}

pub(crate) fn relax<S: Scalar>(profile: &GapProfile<S>, k: usize) -> RelaxedGapProfile<S> {
    let mut optimal_gaps: Vec<S> = profile.pareto.iter().map(|&i| profile.delta[i]).collect();
    optimal_gaps.sort_by(|a, b| cmp_nan_last(*b, *a));
    let omega_k = optimal_gaps.get(k - 1).copied().unwrap_or_else(S::zero);
    let delta_k: Vec<S> = profile
        .delta
        .iter()
        .enumerate()
        .map(|(i, &g)| if profile.is_optimal(i) { g.max(omega_k) } else { g })
        .collect();
    RelaxedGapProfile {
        k,
        omega_k,
        h2_k: h2_of(&delta_k),
        delta_k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i3() -> MeanMatrix<f64> {
        MeanMatrix::new(vec![vec![1.0, 0.2], vec![0.2, 1.0], vec![0.5, 0.1]]).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn margins_on_i3() {
        let t = i3();
        assert!(close(big_m(&t, 0, 1).unwrap(), 0.8));
        assert!(close(big_m(&t, 2, 0).unwrap(), -0.1));
        assert!(close(little_m(&t, 2, 0).unwrap(), 0.1));
        assert!(close(little_m(&t, 0, 1).unwrap(), -0.8));
        for i in 0..3 {
            for j in (0..3).filter(|&j| j != i) {
                assert_eq!(big_m(&t, i, j).unwrap() + little_m(&t, i, j).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn margin_errors() {
        let t = i3();
        assert!(matches!(big_m(&t, 1, 1), Err(PsiError::InvalidArgument(_))));
        assert!(matches!(little_m(&t, 0, 7), Err(PsiError::InvalidArgument(_))));
    }

    #[test]
    fn duplicated_rows_have_zero_margin() {
        let t = MeanMatrix::new(vec![vec![0.3, 0.4], vec![0.3, 0.4], vec![0.1, 0.1]]).unwrap();
        assert_eq!(big_m(&t, 0, 1).unwrap(), 0.0);
        // both copies are undominated
        assert_eq!(pareto_set(&t), vec![0, 1]);
        assert!(matches!(
            complexity_profile(&t),
            Err(PsiError::DegenerateInstance { .. })
        ));
    }

    #[test]
    fn identical_means_all_optimal() {
        let t = MeanMatrix::new(vec![vec![0.5, 0.5]; 4]).unwrap();
        assert_eq!(pareto_set(&t), vec![0, 1, 2, 3]);
    }

    #[test]
    fn i3_gaps() {
        let t = i3();
        assert_eq!(pareto_set(&t), vec![0, 1]);
        assert!(close(gap_suboptimal(&t, 2).unwrap(), 0.1));
        let (p, m) = gap_optimal_parts(&t, 0).unwrap();
        assert!(close(p, 0.8) && close(m, 0.1));
        let (p, m) = gap_optimal_parts(&t, 1).unwrap();
        assert!(close(p, 0.8) && close(m, 0.4));
        assert!(close(gap_optimal(&t, 1).unwrap(), 0.4));
        for (i, want) in [(0, 0.1), (1, 0.4), (2, 0.1)] {
            assert!(close(gap_unified(&t, i).unwrap(), want));
        }
        assert!(gap_suboptimal(&t, 0).is_err());
        assert!(gap_optimal(&t, 2).is_err());
    }

    #[test]
    fn uniform_dominance_gap() {
        let g = 0.25;
        let t = MeanMatrix::new(vec![vec![1.0, 2.0, 3.0], vec![1.0 - g, 2.0 - g, 3.0 - g]]).unwrap();
        assert!(close(gap_suboptimal(&t, 1).unwrap(), g));
    }

    #[test]
    fn all_optimal_uses_delta_plus() {
        let t = MeanMatrix::<f64>::new(vec![vec![0.0, 1.0], vec![0.4, 0.7], vec![1.0, 0.0]]).unwrap();
        for i in 0..3 {
            let (p, m) = gap_optimal_parts(&t, i).unwrap();
            assert!(m.is_infinite());
            assert_eq!(gap_optimal(&t, i).unwrap(), p);
        }
    }

    #[test]
    fn i3_profile() {
        let prof = complexity_profile(&i3()).unwrap();
        assert!(close(prof.h1, 206.25));
        assert!(close(prof.h2, 200.0));
        assert!(close(prof.delta_star[2], 0.1));
        assert!(prof.delta_star[0] < 0.0);
    }

    #[test]
    fn equal_gaps_give_equal_complexities() {
        let gaps = vec![0.2; 6];
        assert!(close(h1_of(&gaps), 6.0 / 0.04));
        assert!(close(h2_of(&gaps), 6.0 / 0.04));
    }

    #[test]
    fn infinite_gap_contributes_nothing() {
        let gaps = vec![0.5, f64::INFINITY, 0.25];
        assert_eq!(h1_of(&gaps), 4.0 + 16.0);
        assert_eq!(h2_of(&gaps), 16.0f64.max(2.0 * 4.0));
    }

    #[test]
    fn i3_relaxed() {
        let t = i3();
        let r1 = relaxed_profile(&t, 1).unwrap();
        assert!(close(r1.omega_k, 0.4));
        for (g, want) in r1.delta_k.iter().zip([0.4, 0.4, 0.1]) {
            assert!(close(*g, want));
        }
        assert!(close(r1.h2_k, 100.0));
        let r2 = relaxed_profile(&t, 2).unwrap();
        assert!(close(r2.omega_k, 0.1));
        assert!(close(r2.h2_k, 200.0));
        let r5 = relaxed_profile(&t, 5).unwrap();
        let prof = complexity_profile(&t).unwrap();
        assert_eq!(r5.omega_k, 0.0);
        assert_eq!(r5.delta_k, prof.delta);
        assert_eq!(r5.h2_k, prof.h2);
        assert!(relaxed_profile(&t, 0).is_err());
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(MeanMatrix::<f64>::new(vec![vec![1.0]]).is_err());
        assert!(MeanMatrix::new(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(MeanMatrix::new(vec![vec![1.0, f64::NAN], vec![1.0, 0.0]]).is_err());
        assert!(MeanMatrix::<f64>::new(vec![vec![], vec![]]).is_err());
    }

    #[test]
    fn single_precision_i3() {
        let t: MeanMatrix<f32> = i3().cast();
        let prof = complexity_profile(&t).unwrap();
        assert_eq!(prof.pareto, vec![0, 1]);
        assert!((prof.h1 - 206.25).abs() < 1e-2);
    }
}
