//! Estimators built on the k-NN regressor: level sets, the global maximum,
//! and the empirical count of distinct k-NN sets.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::{squared_distance, KdTree, PointSet};
use crate::regression::{Regressor, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Samples,
    GridTruth,
}

/// A finite point set that may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    provenance: Provenance,
    /// Spacing of the grid a discretized truth set came from.
    spacing: Option<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: coords.len() % dim,
            });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate {
                index: i / dim,
                axis: i % dim,
            });
        }
        Ok(Self {
            dim,
            coords,
            provenance,
            spacing: None,
        })
    }

    pub fn from_points(points: &PointSet, provenance: Provenance) -> Self {
        Self {
            dim: points.dim(),
            coords: points.coords().to_vec(),
            provenance,
            spacing: None,
        }
    }

    pub fn with_spacing(mut self, h: f64) -> Self {
        self.spacing = Some(h);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn spacing(&self) -> Option<f64> {
        self.spacing
    }

    pub fn to_point_set(&self) -> Result<PointSet> {
        if self.is_empty() {
            return Err(Error::EmptyCloud);
        }
        PointSet::new(self.dim, self.coords.clone())
    }
}

/// A regular grid with `per_axis` points per axis over the box `bounds`,
/// returned with its largest axis spacing.
pub fn regular_grid(bounds: &[(f64, f64)], per_axis: usize) -> Result<(PointSet, f64)> {
    if bounds.is_empty() {
        return Err(Error::invalid("grid", "needs at least one axis"));
    }
    if per_axis < 2 {
        return Err(Error::invalid("grid", "needs at least two points per axis"));
    }
    for &(lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::invalid("grid", "each axis needs finite lo < hi"));
        }
    }
    let dim = bounds.len();
    let total = per_axis
        .checked_pow(dim as u32)
        .ok_or(Error::Overflow("grid size"))?;
    let steps: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| (hi - lo) / (per_axis - 1) as f64)
        .collect();
    let mut coords = Vec::with_capacity(total * dim);
    for mut i in 0..total {
        for (a, &(lo, hi)) in bounds.iter().enumerate() {
            let j = i % per_axis;
            i /= per_axis;
            coords.push(if j == per_axis - 1 {
                hi
            } else {
                lo + steps[a] * j as f64
            });
        }
    }
    let h = steps.iter().copied().fold(0.0, f64::max);
    Ok((PointSet::new(dim, coords)?, h))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetEstimate {
    pub lambda: f64,
    pub epsilon: f64,
    /// Sorted indices `i` with `f_k(x_i) >= lambda - epsilon`.
    pub member_indices: Vec<usize>,
    pub member_points: PointCloud,
}

/// Sample points whose prediction clears `lambda - epsilon` (inclusive).
pub fn estimate_level_set(reg: &Regressor, lambda: f64, epsilon: f64) -> Result<LevelSetEstimate> {
    let preds = reg.predict_at_samples()?;
    level_set_from_predictions(reg, &preds, lambda, epsilon)
}

/// As [`estimate_level_set`], reusing predictions at the samples.
pub fn level_set_from_predictions(
    reg: &Regressor,
    preds: &[f64],
    lambda: f64,
    epsilon: f64,
) -> Result<LevelSetEstimate> {
    if !(epsilon >= 0.0) {
        return Err(Error::invalid("epsilon", "must be nonnegative"));
    }
    if lambda.is_nan() {
        return Err(Error::invalid("lambda", "must not be NaN"));
    }
    let x = reg.data().x();
    if preds.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: preds.len(),
        });
    }
    let threshold = lambda - epsilon;
    let member_indices: Vec<usize> = (0..preds.len())
        .filter(|&i| preds[i] >= threshold)
        .collect();
    let mut coords = Vec::with_capacity(member_indices.len() * x.dim());
    for &i in &member_indices {
        coords.extend_from_slice(x.point(i));
    }
    Ok(LevelSetEstimate {
        lambda,
        epsilon,
        member_indices,
        member_points: PointCloud::new(x.dim(), coords, Provenance::Samples)?,
    })
}

/// Grid points with `f >= lambda`; errors with [`Error::EmptyTruth`] when
/// none qualify.
pub fn true_level_set_grid(
    field: &ScalarField,
    lambda: f64,
    grid: &PointSet,
    spacing: f64,
) -> Result<PointCloud> {
    if grid.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: grid.dim(),
        });
    }
    let mut coords = Vec::new();
    for p in grid.iter() {
        if field.evaluate(p) >= lambda {
            coords.extend_from_slice(p);
        }
    }
    if coords.is_empty() {
        return Err(Error::EmptyTruth);
    }
    Ok(PointCloud::new(grid.dim(), coords, Provenance::GridTruth)?.with_spacing(spacing))
}

fn check_pair(a: &PointCloud, b: &PointCloud) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

fn directed(from: &PointCloud, to: &KdTree) -> Result<f64> {
    let dists: Vec<f64> = (0..from.len())
        .into_par_iter()
        .map(|i| to.nearest_distance(from.point(i)))
        .collect::<Result<_>>()?;
    Ok(dists.into_iter().fold(0.0, f64::max))
}

/// Hausdorff distance between two nonempty finite sets.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_pair(a, b)?;
    let ta = KdTree::build(&a.to_point_set()?);
    let tb = KdTree::build(&b.to_point_set()?);
    Ok(directed(a, &tb)?.max(directed(b, &ta)?))
}

/// Quadratic-time reference for [`hausdorff_distance`].
pub fn hausdorff_distance_brute(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_pair(a, b)?;
    let dir = |x: &PointCloud, y: &PointCloud| {
        x.iter()
            .map(|p| {
                y.iter()
                    .map(|q| squared_distance(p, q).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(dir(a, b).max(dir(b, a)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximaEstimate {
    pub argmax_index: usize,
    pub location: Vec<f64>,
    pub value: f64,
}

/// Sample point with the largest prediction; ties go to the smallest index.
pub fn estimate_maxima(reg: &Regressor) -> Result<MaximaEstimate> {
    let preds = reg.predict_at_samples()?;
    maxima_from_predictions(reg, &preds)
}

pub fn maxima_from_predictions(reg: &Regressor, preds: &[f64]) -> Result<MaximaEstimate> {
    if preds.is_empty() || preds.len() != reg.data().len() {
        return Err(Error::DimensionMismatch {
            expected: reg.data().len(),
            got: preds.len(),
        });
    }
    let mut best = 0;
    for (i, &v) in preds.iter().enumerate().skip(1) {
        if v > preds[best] {
            best = i;
        }
    }
    Ok(MaximaEstimate {
        argmax_index: best,
        location: reg.data().x().point(best).to_vec(),
        value: preds[best],
    })
}

/// Number of distinct k-NN member sets seen over `probes`.
pub fn count_distinct_knn_sets(points: &PointSet, k: usize, probes: &PointSet) -> Result<usize> {
    if probes.is_empty() {
        return Err(Error::EmptyProbes);
    }
    if probes.dim() != points.dim() {
        return Err(Error::DimensionMismatch {
            expected: points.dim(),
            got: probes.dim(),
        });
    }
    let tree = KdTree::build(points);
    let sets: Vec<Vec<usize>> = (0..probes.len())
        .into_par_iter()
        .map(|i| tree.knn(probes.point(i), k).map(|s| s.members))
        .collect::<Result<_>>()?;
    Ok(sets.into_iter().collect::<HashSet<_>>().len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::Dataset;

    fn cloud(values: &[f64]) -> PointCloud {
        PointCloud::new(1, values.to_vec(), Provenance::Samples).unwrap()
    }

    fn identity_regressor(xs: &[f64], k: usize) -> Regressor {
        let x = PointSet::from_scalars(xs).unwrap();
        Regressor::new(Dataset::new(x, xs.to_vec()).unwrap(), k).unwrap()
    }

    #[test]
    fn level_set_hand_example() {
        let reg = identity_regressor(&[0.1, 0.5, 0.9], 1);
        let est = estimate_level_set(&reg, 0.5, 0.0).unwrap();
        assert_eq!(est.member_indices, vec![1, 2]);
        assert_eq!(est.member_points, cloud(&[0.5, 0.9]));
        let all = estimate_level_set(&reg, 0.5, 1e9).unwrap();
        assert_eq!(all.member_indices, vec![0, 1, 2]);
        let all = estimate_level_set(&reg, -1e300, 0.0).unwrap();
        assert_eq!(all.member_indices.len(), 3);
        assert!(estimate_level_set(&reg, 0.5, -1.0).is_err());
    }

    #[test]
    fn truth_grid_hand_example() {
        let f = ScalarField::linear(vec![1.0], 0.0);
        let (grid, h) = regular_grid(&[(0.0, 1.0)], 11).unwrap();
        assert!((h - 0.1).abs() < 1e-15);
        let t = true_level_set_grid(&f, 0.5, &grid, h).unwrap();
        assert_eq!(t.len(), 6);
        assert_eq!(t.provenance(), Provenance::GridTruth);
        assert_eq!(true_level_set_grid(&f, -1.0, &grid, h).unwrap().len(), 11);
        assert!(matches!(
            true_level_set_grid(&f, 2.0, &grid, h),
            Err(Error::EmptyTruth)
        ));
    }

    #[test]
    fn hausdorff_hand_examples() {
        assert_eq!(
            hausdorff_distance(&cloud(&[0.0]), &cloud(&[3.0])).unwrap(),
            3.0
        );
        assert_eq!(
            hausdorff_distance(&cloud(&[0.0, 1.0]), &cloud(&[0.0, 4.0])).unwrap(),
            3.0
        );
        let a = cloud(&[0.3, 0.1, 0.7]);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let empty = PointCloud::new(1, vec![], Provenance::Samples).unwrap();
        assert!(matches!(
            hausdorff_distance(&a, &empty),
            Err(Error::EmptyCloud)
        ));
    }

    #[test]
    fn maxima_ties_take_first_index() {
        let reg = identity_regressor(&[0.9, 0.1, 0.9], 1);
        let m = estimate_maxima(&reg).unwrap();
        assert_eq!(m.argmax_index, 0);
        assert_eq!(m.value, 0.9);
    }

    #[test]
    fn set_count_hand_examples() {
        let pts = PointSet::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        // 400 points avoid the midpoints 0.5 and 1.5, where ties would
        // produce the two-member sets {0, 1} and {1, 2}
        let (probes, _) = regular_grid(&[(-1.0, 3.0)], 400).unwrap();
        assert_eq!(count_distinct_knn_sets(&pts, 1, &probes).unwrap(), 3);
        let one = PointSet::from_scalars(&[0.4]).unwrap();
        assert_eq!(count_distinct_knn_sets(&one, 1, &probes).unwrap(), 1);
    }

    #[test]
    fn grid_includes_endpoints() {
        let (g, h) = regular_grid(&[(0.0, 1.0), (-1.0, 1.0)], 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(h, 1.0);
        assert_eq!(g.point(8), &[1.0, 1.0]);
        assert_eq!(g.point(0), &[0.0, -1.0]);
    }
}
