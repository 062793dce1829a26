//! Exact hypervolume of the region dominated by a point set (maximization).
//!
//! Two objectives use a sweep line. Three or more objectives slice along the
//! last objective and recurse on the remaining ones, filtering each slice
//! down to its non-dominated points first.

use crate::error::{invalid, Result};
use crate::pareto::{dominated_by, pareto_set, MeanMatrix};
use crate::scalar::{cmp_nan_last, Scalar};

/// Lebesgue measure of `∪_x [reference, x]`.
///
/// Every point must weakly dominate `reference`. The empty set has volume 0.
pub fn hypervolume<S: Scalar, P: AsRef<[S]>>(points: &[P], reference: &[S]) -> Result<S> {
    let dims = reference.len();
    if dims == 0 {
        return invalid("reference point has no coordinates");
    }
    for (idx, p) in points.iter().enumerate() {
        let p = p.as_ref();
        if p.len() != dims {
            return invalid(format!("point {idx} has {} coordinates, expected {dims}", p.len()));
        }
        if let Some(d) = (0..dims).find(|&d| !(p[d] >= reference[d])) {
            return invalid(format!(
                "reference is not dominated by point {idx} (objective {d}: {} < {})",
                p[d], reference[d]
            ));
        }
    }
    let shifted: Vec<Vec<S>> = points
        .iter()
        .map(|p| p.as_ref().iter().zip(reference).map(|(&x, &r)| x - r).collect())
        .collect();
    Ok(volume(nondominated(shifted), dims))
}

/// Hypervolume ratio `HV(recommended) / HV(S*)` of arm mean vectors.
///
/// An empty recommendation scores 0.
pub fn hv_fraction<S: Scalar>(recommended: &[usize], theta: &MeanMatrix<S>, reference: &[S]) -> Result<S> {
    if let Some(&bad) = recommended.iter().find(|&&a| a >= theta.arms()) {
        return invalid(format!("recommended arm {bad} out of range"));
    }
    if recommended.is_empty() {
        return Ok(S::zero());
    }
    let front: Vec<&[S]> = pareto_set(theta).into_iter().map(|i| theta.row(i)).collect();
    let total = hypervolume(&front, reference)?;
    if !(total > S::zero()) {
        return invalid("Pareto set has zero hypervolume for this reference point");
    }
    let chosen: Vec<&[S]> = recommended.iter().map(|&i| theta.row(i)).collect();
    Ok(hypervolume(&chosen, reference)? / total)
}

/// Drops dominated points and duplicates (reference already at the origin).
fn nondominated<S: Scalar>(mut pts: Vec<Vec<S>>) -> Vec<Vec<S>> {
    pts.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| cmp_nan_last(*y, *x))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts.dedup();
    let keep: Vec<bool> = (0..pts.len())
        .map(|i| !pts.iter().any(|q| dominated_by(&pts[i], q)))
        .collect();
    pts.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect()
}

fn volume<S: Scalar>(pts: Vec<Vec<S>>, dims: usize) -> S {
    if pts.is_empty() {
        return S::zero();
    }
    match dims {
        1 => pts.iter().map(|p| p[0]).fold(S::zero(), S::max),
        2 => sweep_2d(pts),
        _ => slice(pts, dims),
    }
}

fn sweep_2d<S: Scalar>(mut pts: Vec<Vec<S>>) -> S {
    pts.sort_by(|a, b| cmp_nan_last(b[0], a[0]));
    let mut area = S::zero();
    let mut top = S::zero();
    for p in &pts {
        if p[1] > top {
            area = area + p[0] * (p[1] - top);
            top = p[1];
        }
    }
    area
}

fn slice<S: Scalar>(mut pts: Vec<Vec<S>>, dims: usize) -> S {
    let last = dims - 1;
    pts.sort_by(|a, b| cmp_nan_last(b[last], a[last]));
    let mut total = S::zero();
    let mut idx = 0;
    while idx < pts.len() {
        let level = pts[idx][last];
        while idx < pts.len() && pts[idx][last] == level {
            idx += 1;
        }
        let below = pts.get(idx).map_or(S::zero(), |p| p[last]);
        let height = level - below;
        if height > S::zero() {
            let section: Vec<Vec<S>> = pts[..idx].iter().map(|p| p[..last].to_vec()).collect();
            total = total + volume(nondominated(section), last) * height;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rectangles() {
        let hv: f64 = hypervolume(&[vec![1.0, 0.2], vec![0.2, 1.0]], &[0.0, 0.0]).unwrap();
        assert!((hv - 0.36).abs() < 1e-12);
    }

    #[test]
    fn single_box() {
        let hv: f64 = hypervolume(&[vec![3.0, 2.0, 0.5]], &[1.0, -1.0, 0.0]).unwrap();
        assert!((hv - 2.0 * 3.0 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_objective() {
        let hv: f64 = hypervolume(&[[0.3], [0.9], [0.1]], &[0.1]).unwrap();
        assert!((hv - 0.8).abs() < 1e-12);
    }

    #[test]
    fn empty_set_is_zero() {
        let pts: Vec<Vec<f64>> = vec![];
        assert_eq!(hypervolume(&pts, &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn reference_must_be_dominated() {
        assert!(hypervolume(&[vec![1.0, 0.2]], &[0.0, 0.5]).is_err());
        assert!(hypervolume(&[vec![1.0]], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn i3_fractions() {
        let t = MeanMatrix::<f64>::new(vec![vec![1.0, 0.2], vec![0.2, 1.0], vec![0.5, 0.1]]).unwrap();
        let r = [0.0, 0.0];
        assert!((hv_fraction(&[0, 1], &t, &r).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(hv_fraction(&[], &t, &r).unwrap(), 0.0);
        assert!((hv_fraction(&[0], &t, &r).unwrap() - 0.2 / 0.36).abs() < 1e-12);
        assert!((hv_fraction(&[0, 1, 2], &t, &r).unwrap() - 1.0).abs() < 1e-15);
    }
}
