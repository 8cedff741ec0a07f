//! k-NN regression: `f_k(x)` is the plain average of the observations in the
//! tie-inclusive neighbor set `N_k(x)`, divided by `|N_k(x)|` rather than `k`.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::index::{squared_distance, KdTree, NeighborSet, PointSet, SortedLine};
use crate::synth::{halton, CurveEmbedding, CurveProfile};

/// Sample points with one scalar observation each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: PointSet,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: PointSet, y: Vec<f64>) -> Result<Self> {
        if y.len() != x.len() {
            return Err(Error::invalid(
                "y",
                format!("{} observations for {} points", y.len(), x.len()),
            ));
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteObservation { index });
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &PointSet {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// Same points, observations mapped through `f`.
    pub fn map_y(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.x.clone(), self.y.iter().map(|&v| f(v)).collect())
    }

    /// Parses the plain-text format: a `D n` header line followed by `n`
    /// lines of `D` coordinates and one observation.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `D n` header".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 {
            return Err(parse_err(hline + 1, "header must be `D n`".into()));
        }
        let dim: usize = head[0]
            .parse()
            .map_err(|_| parse_err(hline + 1, format!("bad dimension `{}`", head[0])))?;
        let n: usize = head[1]
            .parse()
            .map_err(|_| parse_err(hline + 1, format!("bad count `{}`", head[1])))?;
        if dim == 0 {
            return Err(parse_err(hline + 1, "dimension must be positive".into()));
        }
        let mut coords = Vec::with_capacity(n * dim);
        let mut y = Vec::with_capacity(n);
        for (lno, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dim + 1 {
                return Err(parse_err(
                    lno + 1,
                    format!("expected {} fields, found {}", dim + 1, fields.len()),
                ));
            }
            for f in &fields {
                let v: f64 = f
                    .parse()
                    .map_err(|_| parse_err(lno + 1, format!("bad number `{f}`")))?;
                coords.push(v);
            }
            y.push(coords.pop().unwrap_or_default());
        }
        if y.len() != n {
            return Err(parse_err(
                hline + 1,
                format!("header declares {n} rows, found {}", y.len()),
            ));
        }
        Self::new(PointSet::new(dim, coords)?, y)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

// `{}` on f64 prints the shortest round-trip decimal without an exponent.
impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.dim(), self.len())?;
        for (p, y) in self.x.iter().zip(&self.y) {
            for c in p {
                write!(f, "{c} ")?;
            }
            writeln!(f, "{y}")?;
        }
        Ok(())
    }
}

/// Mean of `values[i]` over `members`.
fn neighbor_mean(values: &[f64], members: &[usize]) -> f64 {
    let picked: Vec<f64> = members.iter().map(|&i| values[i]).collect();
    shifted_mean(&picked)
}

// Mean computed relative to the first value, so constant inputs give that
// constant exactly and integer inputs stay exact. Four interleaved
// accumulators keep the loop free of a single dependency chain.
fn shifted_mean(values: &[f64]) -> f64 {
    let first = values[0];
    let mut sum = [0.0; 4];
    let chunks = values.chunks_exact(4);
    let tail = chunks.remainder();
    for c in chunks {
        for j in 0..4 {
            sum[j] += c[j] - first;
        }
    }
    for &v in tail {
        sum[0] += v - first;
    }
    let total = (sum[0] + sum[1]) + (sum[2] + sum[3]);
    first + total / values.len() as f64
}

/// k-NN regressor over an owned dataset.
#[derive(Debug, Clone)]
pub struct Regressor {
    data: Dataset,
    index: KdTree,
    // one-dimensional data: sorted positions and responses in that order
    line: Option<(SortedLine, Vec<f64>)>,
    k: usize,
}

impl Regressor {
    pub fn new(data: Dataset, k: usize) -> Result<Self> {
        if k == 0 || k > data.len() {
            return Err(Error::InvalidK { k, n: data.len() });
        }
        let index = KdTree::build(data.x());
        let line = SortedLine::build(data.x()).ok().map(|line| {
            let ys = (0..line.len()).map(|pos| data.y()[line.id(pos)]).collect();
            (line, ys)
        });
        Ok(Self {
            data,
            index,
            line,
            k,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn index(&self) -> &KdTree {
        &self.index
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self, query: &[f64]) -> Result<NeighborSet> {
        match &self.line {
            Some((line, _)) if query.len() == 1 => line.knn(query[0], self.k),
            _ => self.index.knn(query, self.k),
        }
    }

    /// `f_k(query)`, the mean response over the k-NN set.
    pub fn predict(&self, query: &[f64]) -> Result<f64> {
        match &self.line {
            Some((line, ys)) if query.len() == 1 => {
                let (lo, hi, _) = line.window(query[0], self.k)?;
                Ok(shifted_mean(&ys[lo..hi]))
            }
            _ => {
                let ns = self.index.knn(query, self.k)?;
                Ok(neighbor_mean(self.data.y(), &ns.members))
            }
        }
    }

    /// `r_k(query)`.
    pub fn knn_radius(&self, query: &[f64]) -> Result<f64> {
        match &self.line {
            Some((line, _)) if query.len() == 1 => Ok(line.window(query[0], self.k)?.2.sqrt()),
            _ => Ok(self.index.knn(query, self.k)?.radius),
        }
    }

    /// `f_k` at every point of `queries`, in order.
    pub fn predict_all(&self, queries: &PointSet) -> Result<Vec<f64>> {
        if queries.dim() != self.data.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.data.dim(),
                got: queries.dim(),
            });
        }
        (0..queries.len())
            .into_par_iter()
            .map(|i| self.predict(queries.point(i)))
            .collect()
    }

    /// `f_k` at every sample point.
    pub fn predict_at_samples(&self) -> Result<Vec<f64>> {
        self.predict_all(self.data.x())
    }

    pub fn sup_error(&self, field: &ScalarField, probes: &PointSet) -> Result<SupError> {
        sup_error(self, field, probes)
    }
}

/// Largest absolute error over a probe set.
#[derive(Debug, Clone, PartialEq)]
pub struct SupError {
    pub sup: f64,
    /// First probe attaining `sup`.
    pub argmax_probe: usize,
    pub per_probe: Vec<f64>,
}

pub fn sup_error(reg: &Regressor, field: &ScalarField, probes: &PointSet) -> Result<SupError> {
    if probes.is_empty() {
        return Err(Error::EmptyProbes);
    }
    if probes.dim() != reg.data().dim() {
        return Err(Error::DimensionMismatch {
            expected: reg.data().dim(),
            got: probes.dim(),
        });
    }
    let per_probe: Vec<f64> = (0..probes.len())
        .into_par_iter()
        .map(|i| {
            let p = probes.point(i);
            Ok((reg.predict(p)? - field.evaluate(p)).abs())
        })
        .collect::<Result<_>>()?;
    let mut sup = f64::NEG_INFINITY;
    let mut argmax_probe = 0;
    for (i, &e) in per_probe.iter().enumerate() {
        if e > sup {
            sup = e;
            argmax_probe = i;
        }
    }
    Ok(SupError {
        sup,
        argmax_probe,
        per_probe,
    })
}

/// Hölder continuity `|f(x) - f(x')| <= c_alpha * |x - x'|^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Holder {
    pub alpha: f64,
    pub c_alpha: f64,
}

/// Regularity of `f` around the boundary of `{f >= lambda}`:
/// `c_low * d^beta <= |lambda - f(x)| <= c_high * d^beta` within `r_m` of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetRegularity {
    pub lambda: f64,
    pub beta: f64,
    pub c_low: f64,
    pub c_high: f64,
    pub r_m: f64,
}

/// Quadratic decay around a unique maximum:
/// `c_low |x0 - x|^2 <= f(x0) - f(x) <= c_high |x0 - x|^2` on `B(x0, r_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximumInfo {
    pub location: Vec<f64>,
    pub c_low: f64,
    pub c_high: f64,
    pub r_m: f64,
}

/// Declared constants a field is known to satisfy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldMeta {
    pub holder: Option<Holder>,
    pub level_set: Option<LevelSetRegularity>,
    pub maximum: Option<MaximumInfo>,
}

#[derive(Clone)]
enum Shape {
    Constant(f64),
    Linear {
        coef: Vec<f64>,
        offset: f64,
    },
    /// `height - scale * |x - center|^power`
    Radial {
        center: Vec<f64>,
        height: f64,
        scale: f64,
        power: f64,
    },
    OnCurve {
        curve: Arc<CurveEmbedding>,
        profile: CurveProfile,
    },
    Custom(fn(&[f64]) -> f64),
}

/// A ground-truth function `f: R^dim -> R` with optional declared constants.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    shape: Shape,
    meta: FieldMeta,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.shape {
            Shape::Constant(_) => "constant",
            Shape::Linear { .. } => "linear",
            Shape::Radial { .. } => "radial",
            Shape::OnCurve { .. } => "on-curve",
            Shape::Custom(_) => "custom",
        };
        f.debug_struct("ScalarField")
            .field("dim", &self.dim)
            .field("kind", &kind)
            .field("meta", &self.meta)
            .finish()
    }
}

impl ScalarField {
    pub fn constant(dim: usize, value: f64) -> Self {
        Self {
            dim,
            shape: Shape::Constant(value),
            meta: FieldMeta {
                holder: Some(Holder {
                    alpha: 1.0,
                    c_alpha: 0.0,
                }),
                ..FieldMeta::default()
            },
        }
    }

    /// `f(x) = coef . x + offset`.
    pub fn linear(coef: Vec<f64>, offset: f64) -> Self {
        let norm = coef.iter().map(|c| c * c).sum::<f64>().sqrt();
        Self {
            dim: coef.len(),
            shape: Shape::Linear { coef, offset },
            meta: FieldMeta {
                holder: Some(Holder {
                    alpha: 1.0,
                    c_alpha: norm,
                }),
                ..FieldMeta::default()
            },
        }
    }

    /// `f(x) = height - scale * |x - center|^power` with no metadata attached.
    pub fn radial(center: Vec<f64>, height: f64, scale: f64, power: f64) -> Self {
        Self {
            dim: center.len(),
            shape: Shape::Radial {
                center,
                height,
                scale,
                power,
            },
            meta: FieldMeta::default(),
        }
    }

    pub(crate) fn on_curve(curve: Arc<CurveEmbedding>, profile: CurveProfile) -> Self {
        let holder = curve.lipschitz_factor().map(|factor| Holder {
            alpha: 1.0,
            c_alpha: profile.slope * factor,
        });
        Self {
            dim: curve.ambient_dim(),
            shape: Shape::OnCurve { curve, profile },
            meta: FieldMeta {
                holder,
                ..FieldMeta::default()
            },
        }
    }

    /// Wraps an arbitrary function; no closed-form modulus is known for it.
    pub fn custom(dim: usize, f: fn(&[f64]) -> f64) -> Self {
        Self {
            dim,
            shape: Shape::Custom(f),
            meta: FieldMeta::default(),
        }
    }

    pub fn with_meta(mut self, meta: FieldMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn meta(&self) -> &FieldMeta {
        &self.meta
    }

    pub(crate) fn meta_mut(&mut self) -> &mut FieldMeta {
        &mut self.meta
    }

    /// Radial parameters `(center, height, scale, power)` if the field is radial.
    pub fn radial_parts(&self) -> Option<(&[f64], f64, f64, f64)> {
        match &self.shape {
            Shape::Radial {
                center,
                height,
                scale,
                power,
            } => Some((center, *height, *scale, *power)),
            _ => None,
        }
    }

    pub fn curve(&self) -> Option<&CurveEmbedding> {
        match &self.shape {
            Shape::OnCurve { curve, .. } => Some(curve),
            _ => None,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Constant(c) => *c,
            Shape::Linear { coef, offset } => {
                coef.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + offset
            }
            Shape::Radial {
                center,
                height,
                scale,
                power,
            } => height - scale * radial_power(squared_distance(x, center), *power),
            Shape::OnCurve { curve, profile } => {
                profile.evaluate(curve.intrinsic_of(x), curve.period())
            }
            Shape::Custom(f) => f(x),
        }
    }

    /// `(sup, inf)` of `f` over the closed ball `B(x, r)` when known in
    /// closed form. The ball is not intersected with any support, so the
    /// resulting moduli can only overstate the restricted ones.
    pub fn ball_extremes(&self, x: &[f64], r: f64) -> Option<(f64, f64)> {
        match &self.shape {
            Shape::Constant(c) => Some((*c, *c)),
            Shape::Linear { coef, .. } => {
                let fx = self.evaluate(x);
                let norm = coef.iter().map(|c| c * c).sum::<f64>().sqrt();
                Some((fx + norm * r, fx - norm * r))
            }
            Shape::Radial {
                center,
                height,
                scale,
                power,
            } => {
                let rho = squared_distance(x, center).sqrt();
                let g = |t: f64| height - scale * radial_power(t * t, *power);
                let near = (rho - r).max(0.0);
                if *scale >= 0.0 {
                    Some((g(near), g(rho + r)))
                } else {
                    Some((g(rho + r), g(near)))
                }
            }
            Shape::OnCurve { .. } | Shape::Custom(_) => None,
        }
    }

    /// Closed-form modulus of continuity `u_f(x, r)`, if available.
    pub fn modulus(&self, x: &[f64], r: f64) -> Option<f64> {
        let fx = self.evaluate(x);
        self.ball_extremes(x, r)
            .map(|(hi, lo)| (hi - fx).max(fx - lo).max(0.0))
    }

    /// One-sided moduli `(sup f - f(x), f(x) - inf f)` over `B(x, r)`.
    pub fn one_sided_modulus(&self, x: &[f64], r: f64) -> Option<(f64, f64)> {
        let fx = self.evaluate(x);
        self.ball_extremes(x, r)
            .map(|(hi, lo)| ((hi - fx).max(0.0), (fx - lo).max(0.0)))
    }
}

fn radial_power(d2: f64, power: f64) -> f64 {
    if power == 2.0 {
        d2
    } else if power == 1.0 {
        d2.sqrt()
    } else {
        d2.sqrt().powf(power)
    }
}

/// Result of [`empirical_modulus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusEstimate {
    pub value: f64,
    /// True when `value` came from sampling and is only a lower bound.
    pub approximate: bool,
}

/// `u_f(x, r) = sup_{x' in B(x, r)} |f(x) - f(x')|`.
///
/// Uses the field's closed form when it has one. Otherwise evaluates `f` at
/// the `2 * dim` axis extremes `x +- r e_j` plus `resolution` Halton points
/// inside the ball, which gives a lower bound.
pub fn empirical_modulus(
    field: &ScalarField,
    x: &[f64],
    r: f64,
    resolution: usize,
) -> Result<ModulusEstimate> {
    if x.len() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: x.len(),
        });
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    if let Some(value) = field.modulus(x, r) {
        return Ok(ModulusEstimate {
            value,
            approximate: false,
        });
    }
    let dim = x.len();
    let fx = field.evaluate(x);
    let mut best = 0.0f64;
    let mut probe = x.to_vec();
    for j in 0..dim {
        for sign in [-1.0, 1.0] {
            probe.copy_from_slice(x);
            probe[j] += sign * r;
            best = best.max((field.evaluate(&probe) - fx).abs());
        }
    }
    let mut accepted = 0;
    let mut i = 1u64;
    while accepted < resolution && i < 64 * (resolution as u64 + 1) {
        let u = halton(i, dim);
        i += 1;
        let v: Vec<f64> = u.iter().map(|t| 2.0 * t - 1.0).collect();
        if v.iter().map(|c| c * c).sum::<f64>() > 1.0 {
            continue;
        }
        for (p, (xi, vi)) in probe.iter_mut().zip(x.iter().zip(&v)) {
            *p = xi + r * vi;
        }
        best = best.max((field.evaluate(&probe) - fx).abs());
        accepted += 1;
    }
    Ok(ModulusEstimate {
        value: best,
        approximate: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::brute_force_knn;

    fn line_data(x: &[f64], y: &[f64]) -> Dataset {
        Dataset::new(PointSet::from_scalars(x).unwrap(), y.to_vec()).unwrap()
    }

    #[test]
    fn constant_observations_predict_exactly() {
        let d = line_data(&[0.0, 0.3, 0.7, 0.9, 1.4], &[0.1; 5]);
        for k in 1..=5 {
            let reg = Regressor::new(d.clone(), k).unwrap();
            for q in [-3.0, 0.2, 0.95, 7.0] {
                assert_eq!(reg.predict(&[q]).unwrap(), 0.1);
            }
        }
    }

    #[test]
    fn hand_computed_average() {
        let reg = Regressor::new(line_data(&[0.0, 1.0, 2.0], &[0.0, 10.0, 20.0]), 2).unwrap();
        assert_eq!(reg.neighbors(&[0.9]).unwrap().members, vec![0, 1]);
        assert_eq!(reg.predict(&[0.9]).unwrap(), 5.0);
        assert_eq!(reg.knn_radius(&[0.9]).unwrap(), 0.9);
    }

    #[test]
    fn ties_enlarge_the_average() {
        // k = 1 at 1.0 ties between 0 and 2
        let reg = Regressor::new(line_data(&[0.0, 2.0, 5.0], &[1.0, 3.0, 100.0]), 1).unwrap();
        assert_eq!(reg.predict(&[1.0]).unwrap(), 2.0);
    }

    #[test]
    fn full_k_is_the_global_mean() {
        let y = [1.0, 2.0, 4.0, 9.0];
        let reg = Regressor::new(line_data(&[0.0, 1.0, 2.0, 3.0], &y), 4).unwrap();
        for q in [-1.0, 1.5, 10.0] {
            assert_eq!(reg.predict(&[q]).unwrap(), 4.0);
        }
    }

    #[test]
    fn radius_at_a_sample_is_zero() {
        let reg = Regressor::new(line_data(&[0.0, 1.0, 2.0], &[0.0, 0.0, 0.0]), 1).unwrap();
        assert_eq!(reg.knn_radius(&[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn radius_agrees_with_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let coords: Vec<f64> = (0..600).map(|_| rng.random::<f64>()).collect();
        let x = PointSet::new(3, coords).unwrap();
        let reg = Regressor::new(Dataset::new(x.clone(), vec![0.0; 200]).unwrap(), 7).unwrap();
        for _ in 0..1000 {
            let q: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 1.2 - 0.1).collect();
            assert_eq!(
                reg.knn_radius(&q).unwrap(),
                brute_force_knn(&x, &q, 7).unwrap().radius
            );
        }
    }

    #[test]
    fn rejects_bad_k_and_dims() {
        let d = line_data(&[0.0, 1.0], &[0.0, 1.0]);
        assert!(matches!(
            Regressor::new(d.clone(), 0),
            Err(Error::InvalidK { .. })
        ));
        assert!(matches!(
            Regressor::new(d.clone(), 3),
            Err(Error::InvalidK { .. })
        ));
        let reg = Regressor::new(d, 1).unwrap();
        assert!(matches!(
            reg.predict(&[0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sup_error_on_constant_field() {
        let d = line_data(&[0.1, 0.5, 0.9], &[2.0; 3]);
        let reg = Regressor::new(d, 2).unwrap();
        let probes = PointSet::from_scalars(&[0.0, 0.25, 0.5, 1.0]).unwrap();
        let s = reg
            .sup_error(&ScalarField::constant(1, 2.0), &probes)
            .unwrap();
        assert_eq!(s.sup, 0.0);
        assert_eq!(s.argmax_probe, 0);
        assert_eq!(s.per_probe.len(), 4);
    }

    #[test]
    fn sup_error_rejects_mismatched_probes() {
        let reg = Regressor::new(line_data(&[0.0], &[0.0]), 1).unwrap();
        let probes = PointSet::new(2, vec![0.0, 0.0]).unwrap();
        assert!(reg
            .sup_error(&ScalarField::constant(2, 0.0), &probes)
            .is_err());
    }

    #[test]
    fn modulus_closed_forms() {
        let c = ScalarField::constant(2, 3.0);
        for r in [0.0, 0.5, 10.0] {
            let m = empirical_modulus(&c, &[0.1, 0.2], r, 64).unwrap();
            assert_eq!(m.value, 0.0);
            assert!(!m.approximate);
        }
        let lin = ScalarField::linear(vec![1.0], 0.0);
        let m = empirical_modulus(&lin, &[0.3], 0.25, 64).unwrap();
        assert!((m.value - 0.25).abs() < 1e-15);
        assert!(!m.approximate);
    }

    #[test]
    fn sampled_modulus_of_abs() {
        fn abs(x: &[f64]) -> f64 {
            x[0].abs()
        }
        let f = ScalarField::custom(1, abs);
        let m = empirical_modulus(&f, &[0.0], 0.5, 32).unwrap();
        assert_eq!(m.value, 0.5);
        assert!(m.approximate);
    }

    #[test]
    fn sampled_modulus_is_a_lower_bound() {
        fn bowl(x: &[f64]) -> f64 {
            x[0] * x[0] + x[1] * x[1]
        }
        let f = ScalarField::custom(2, bowl);
        let m = empirical_modulus(&f, &[1.0, 0.0], 0.5, 256).unwrap();
        // exact sup is at (1.5, 0): 2.25 - 1
        assert!(m.value <= 1.25 + 1e-12);
        assert!(m.value >= 1.25 - 1e-12);
    }

    #[test]
    fn radial_modulus_matches_hand_values() {
        // tent 1 - 2|x - 0.5|
        let tent = ScalarField::radial(vec![0.5], 1.0, 2.0, 1.0);
        assert!((tent.modulus(&[0.5], 0.1).unwrap() - 0.2).abs() < 1e-15);
        let (up, down) = tent.one_sided_modulus(&[0.3], 0.1).unwrap();
        assert!((up - 0.2).abs() < 1e-12);
        assert!((down - 0.2).abs() < 1e-12);
        // straddling the peak: sup is the peak itself
        let (up, _) = tent.one_sided_modulus(&[0.45], 0.1).unwrap();
        assert!((up - 0.1).abs() < 1e-12);
    }

    #[test]
    fn dataset_text_format_round_trip() {
        let d = Dataset::new(
            PointSet::new(2, vec![0.1, 0.2, 1e-7, 3.0]).unwrap(),
            vec![-1.5, 2.0e10],
        )
        .unwrap();
        let text = d.to_string();
        assert!(text.starts_with("2 2\n"));
        assert!(!text.contains('e'));
        assert_eq!(Dataset::parse(&text, "mem").unwrap(), d);
    }

    #[test]
    fn dataset_parse_errors() {
        assert!(Dataset::parse("", "x").is_err());
        assert!(Dataset::parse("1 2\n0.0 1.0\n", "x").is_err());
        assert!(Dataset::parse("1 1\n0.0\n", "x").is_err());
        assert!(Dataset::parse("1 1\n0.0 nan\n", "x").is_err());
        let err = Dataset::parse("1 1\n0.0 abc\n", "data.txt").unwrap_err();
        assert!(err.to_string().contains("data.txt:2"));
    }
}
