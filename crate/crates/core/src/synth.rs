//! Ground-truth generators whose declared constants are true by construction:
//! sampling densities with known floors, centered noise with valid
//! sub-Gaussian parameters, test fields with known Hölder and regularity
//! constants, and one-dimensional curves embedded in higher dimension.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::bounds::unit_ball_volume;
use crate::error::{Error, Result};
use crate::index::{squared_distance, PointSet};
use crate::regression::{FieldMeta, Holder, LevelSetRegularity, MaximumInfo, ScalarField};

const fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed for stream `label` of trial `trial` under `master`.
///
/// `splitmix64(splitmix64(splitmix64(master) ^ trial) ^ fnv1a(label))`; the
/// resulting seed feeds a ChaCha8 generator.
pub fn stream_seed(master: u64, trial: u64, label: &str) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ trial) ^ fnv1a(label))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131,
];

/// `i`-th point of the Halton sequence in `[0, 1)^dim` (dim <= 32).
pub fn halton(mut i: u64, dim: usize) -> Vec<f64> {
    assert!(
        dim <= PRIMES.len(),
        "halton sequence supports up to 32 dims"
    );
    let start = i;
    (0..dim)
        .map(|d| {
            i = start;
            let base = PRIMES[d];
            let mut f = 1.0;
            let mut r = 0.0;
            while i > 0 {
                f /= base as f64;
                r += f * (i % base) as f64;
                i /= base;
            }
            r
        })
        .collect()
}

/// Constants of a sampling density: `p0` lower-bounds the density on its
/// support, and every ball of radius below `r0` centered in the support keeps
/// at least a `gamma` fraction of its volume inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityConstants {
    pub p0: f64,
    pub gamma: f64,
    pub r0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    /// Uniform on `[lo, lo + side]^dim`.
    UniformBox { dim: usize, lo: f64, side: f64 },
    /// Uniform on the closed ball `B(center, radius)`.
    UniformBall { center: Vec<f64>, radius: f64 },
    /// On `[0, 1]^dim`: with probability `uniform_weight` uniform, otherwise
    /// a product of normals `N(mean, sd^2)` truncated to `[0, 1]`.
    TruncatedMixture {
        dim: usize,
        uniform_weight: f64,
        mean: f64,
        sd: f64,
    },
}

impl DensitySpec {
    pub fn unit_box(dim: usize) -> Self {
        DensitySpec::UniformBox {
            dim,
            lo: 0.0,
            side: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DensitySpec::UniformBox { dim, .. } | DensitySpec::TruncatedMixture { dim, .. } => *dim,
            DensitySpec::UniformBall { center, .. } => center.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::invalid("density.dim", "must be positive"));
        }
        match self {
            DensitySpec::UniformBox { lo, side, .. } => {
                if !(lo.is_finite() && side.is_finite() && *side > 0.0) {
                    return Err(Error::invalid(
                        "density.side",
                        "must be finite and positive",
                    ));
                }
            }
            DensitySpec::UniformBall { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid(
                        "density.radius",
                        "must be finite and positive",
                    ));
                }
            }
            DensitySpec::TruncatedMixture {
                uniform_weight,
                mean,
                sd,
                ..
            } => {
                if !(*uniform_weight > 0.0 && *uniform_weight <= 1.0) {
                    return Err(Error::invalid("density.weight", "must lie in (0, 1]"));
                }
                if !(mean.is_finite() && sd.is_finite() && *sd > 0.0) {
                    return Err(Error::invalid("density.sd", "must be finite and positive"));
                }
            }
        }
        Ok(())
    }

    /// Declared `p0`, `gamma`, `r0`.
    ///
    /// Boxes and balls use `gamma = 2^-dim`: a box corner keeps one orthant,
    /// and a ball of radius `r <= R` around any point of a radius-`R` ball
    /// contains a radius-`r/2` ball inside the support.
    pub fn constants(&self) -> DensityConstants {
        let dim = self.dim();
        let gamma = 0.5f64.powi(dim as i32);
        match self {
            DensitySpec::UniformBox { side, .. } => DensityConstants {
                p0: side.powi(-(dim as i32)),
                gamma,
                r0: side / 2.0,
            },
            DensitySpec::UniformBall { radius, .. } => DensityConstants {
                p0: 1.0 / (unit_ball_volume(dim).unwrap_or(f64::NAN) * radius.powi(dim as i32)),
                gamma,
                r0: *radius,
            },
            DensitySpec::TruncatedMixture {
                uniform_weight,
                mean,
                sd,
                ..
            } => {
                let tn = TruncatedNormal::new(*mean, *sd);
                let floor = tn.pdf(0.0).min(tn.pdf(1.0)).powi(dim as i32);
                DensityConstants {
                    p0: uniform_weight + (1.0 - uniform_weight) * floor,
                    gamma,
                    r0: 0.5,
                }
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DensitySpec::UniformBox { lo, side, .. } => {
                x.iter().all(|&c| c >= *lo && c <= lo + side)
            }
            DensitySpec::UniformBall { center, radius } => {
                squared_distance(x, center) <= radius * radius
            }
            DensitySpec::TruncatedMixture { .. } => x.iter().all(|&c| (0.0..=1.0).contains(&c)),
        }
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        match self {
            DensitySpec::UniformBox { .. } | DensitySpec::UniformBall { .. } => self.constants().p0,
            DensitySpec::TruncatedMixture {
                uniform_weight,
                mean,
                sd,
                ..
            } => {
                let tn = TruncatedNormal::new(*mean, *sd);
                let prod: f64 = x.iter().map(|&c| tn.pdf(c)).product();
                uniform_weight + (1.0 - uniform_weight) * prod
            }
        }
    }

    /// Axis-aligned bounding box of the support, `(lo, hi)` per axis.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        match self {
            DensitySpec::UniformBox { dim, lo, side } => vec![(*lo, lo + side); *dim],
            DensitySpec::UniformBall { center, radius } => {
                center.iter().map(|c| (c - radius, c + radius)).collect()
            }
            DensitySpec::TruncatedMixture { dim, .. } => vec![(0.0, 1.0); *dim],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct TruncatedNormal {
    normal: Normal,
    cdf_lo: f64,
    mass: f64,
}

impl TruncatedNormal {
    fn new(mean: f64, sd: f64) -> Self {
        let normal = Normal::new(mean, sd).expect("validated normal parameters");
        let cdf_lo = normal.cdf(0.0);
        let mass = normal.cdf(1.0) - cdf_lo;
        Self {
            normal,
            cdf_lo,
            mass,
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        self.normal.pdf(x) / self.mass
    }

    fn sample(&self, u: f64) -> f64 {
        self.normal
            .inverse_cdf(self.cdf_lo + u * self.mass)
            .clamp(0.0, 1.0)
    }
}

/// `n` i.i.d. points from `spec`; deterministic in `seed`.
pub fn sample_points(spec: &DensitySpec, n: usize, seed: u64) -> Result<PointSet> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    let dim = spec.dim();
    let mut rng = rng_from_seed(seed);
    let mut coords = Vec::with_capacity(n * dim);
    match spec {
        DensitySpec::UniformBox { lo, side, .. } => {
            for _ in 0..n * dim {
                coords.push(lo + side * rng.random::<f64>());
            }
        }
        DensitySpec::UniformBall { center, radius } => {
            let mut dir = vec![0.0; dim];
            for _ in 0..n {
                let norm = loop {
                    for v in dir.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        break norm;
                    }
                };
                let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
                for (c, v) in center.iter().zip(&dir) {
                    coords.push(c + r * v / norm);
                }
            }
        }
        DensitySpec::TruncatedMixture {
            uniform_weight,
            mean,
            sd,
            ..
        } => {
            let tn = TruncatedNormal::new(*mean, *sd);
            for _ in 0..n {
                let uniform = rng.random::<f64>() < *uniform_weight;
                for _ in 0..dim {
                    let u = rng.random::<f64>();
                    coords.push(if uniform { u } else { tn.sample(u) });
                }
            }
        }
    }
    PointSet::new(dim, coords)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    None,
    Gaussian {
        sigma: f64,
    },
    /// Uniform on `[-half_width, half_width]`.
    Uniform {
        half_width: f64,
    },
    /// `+-scale` with equal probability.
    Rademacher {
        scale: f64,
    },
}

impl NoiseSpec {
    /// A valid sub-Gaussian parameter. For uniform noise this is the half
    /// width, which is valid but not tight (the optimal one is `a / sqrt(3)`
    /// only for the variance, not the sub-Gaussian constant).
    pub fn sigma(&self) -> f64 {
        match *self {
            NoiseSpec::None => 0.0,
            NoiseSpec::Gaussian { sigma } => sigma,
            NoiseSpec::Uniform { half_width } => half_width,
            NoiseSpec::Rademacher { scale } => scale,
        }
    }

    /// `E[xi^2]`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            NoiseSpec::None => 0.0,
            NoiseSpec::Gaussian { sigma } => sigma * sigma,
            NoiseSpec::Uniform { half_width } => half_width * half_width / 3.0,
            NoiseSpec::Rademacher { scale } => scale * scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = match *self {
            NoiseSpec::None => 0.0,
            NoiseSpec::Gaussian { sigma } => sigma,
            NoiseSpec::Uniform { half_width } => half_width,
            NoiseSpec::Rademacher { scale } => scale,
        };
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::invalid(
                "noise.scale",
                "must be finite and nonnegative",
            ));
        }
        Ok(())
    }
}

pub fn sample_noise(spec: &NoiseSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::invalid("n", "must be positive"));
    }
    let mut rng = rng_from_seed(seed);
    Ok(match *spec {
        NoiseSpec::None => vec![0.0; n],
        NoiseSpec::Gaussian { sigma } => (0..n)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
        NoiseSpec::Uniform { half_width } => (0..n)
            .map(|_| half_width * (2.0 * rng.random::<f64>() - 1.0))
            .collect(),
        NoiseSpec::Rademacher { scale } => (0..n)
            .map(|_| if rng.random::<bool>() { scale } else { -scale })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Constant,
    Linear,
    /// `height - c_alpha |x - center|^alpha`
    HolderCusp,
    /// `height - slope |x - center|`
    Tent,
    /// `height - q |x - center|^2`
    QuadraticPeak,
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "constant" => FieldKind::Constant,
            "linear" => FieldKind::Linear,
            "holder-cusp" => FieldKind::HolderCusp,
            "tent" => FieldKind::Tent,
            "quadratic-peak" => FieldKind::QuadraticPeak,
            other => {
                return Err(Error::invalid(
                    "field.kind",
                    format!("unknown kind `{other}`"),
                ))
            }
        })
    }
}

/// Parameters for [`make_field`]; unused entries are ignored per kind.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldParams {
    pub dim: usize,
    /// Defaults to the center of the unit box.
    pub center: Option<Vec<f64>>,
    pub height: f64,
    pub slope: f64,
    pub alpha: f64,
    pub c_alpha: f64,
    pub q: f64,
    pub value: f64,
    pub coef: Option<Vec<f64>>,
    pub offset: f64,
    /// Attach level-set regularity at this level.
    pub level: Option<f64>,
    /// Radius of the ball around the peak that stays inside the support.
    pub r_m: Option<f64>,
    /// Largest distance from the peak to any support point, for the
    /// quadratic peak's Lipschitz constant.
    pub support_radius: Option<f64>,
}

impl FieldParams {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            center: None,
            height: 1.0,
            slope: 1.0,
            alpha: 1.0,
            c_alpha: 1.0,
            q: 1.0,
            value: 0.0,
            coef: None,
            offset: 0.0,
            level: None,
            r_m: None,
            support_radius: None,
        }
    }
}

fn finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(name, "must be finite"))
    }
}

/// Builds a test field whose metadata is exact. Unless `r_m` or
/// `support_radius` are given, the support is taken to be `[0, 1]^dim`.
pub fn make_field(kind: FieldKind, params: &FieldParams) -> Result<ScalarField> {
    let dim = params.dim;
    if dim == 0 {
        return Err(Error::invalid("field.dim", "must be positive"));
    }
    let center = match &params.center {
        Some(c) if c.len() != dim => {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.len(),
            })
        }
        Some(c) => c.clone(),
        None => vec![0.5; dim],
    };
    let height = finite("field.height", params.height)?;
    let mut field = match kind {
        FieldKind::Constant => ScalarField::constant(dim, finite("field.value", params.value)?),
        FieldKind::Linear => {
            let coef = params
                .coef
                .clone()
                .ok_or(Error::MissingParameter("field.coef"))?;
            if coef.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: coef.len(),
                });
            }
            ScalarField::linear(coef, finite("field.offset", params.offset)?)
        }
        FieldKind::HolderCusp => {
            let alpha = params.alpha;
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::invalid("field.alpha", "must lie in (0, 1]"));
            }
            if !(params.c_alpha >= 0.0 && params.c_alpha.is_finite()) {
                return Err(Error::invalid(
                    "field.c_alpha",
                    "must be finite and nonnegative",
                ));
            }
            ScalarField::radial(center, height, params.c_alpha, alpha).with_meta(FieldMeta {
                holder: Some(Holder {
                    alpha,
                    c_alpha: params.c_alpha,
                }),
                ..FieldMeta::default()
            })
        }
        FieldKind::Tent => {
            if !(params.slope > 0.0 && params.slope.is_finite()) {
                return Err(Error::invalid("field.slope", "must be finite and positive"));
            }
            ScalarField::radial(center, height, params.slope, 1.0).with_meta(FieldMeta {
                holder: Some(Holder {
                    alpha: 1.0,
                    c_alpha: params.slope,
                }),
                ..FieldMeta::default()
            })
        }
        FieldKind::QuadraticPeak => {
            let q = params.q;
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::invalid("field.q", "must be finite and positive"));
            }
            let in_unit_box = center.iter().all(|c| (0.0..=1.0).contains(c));
            let r_m = match params.r_m {
                Some(r) if r > 0.0 => r,
                Some(_) => return Err(Error::invalid("field.r_m", "must be positive")),
                None if in_unit_box => center
                    .iter()
                    .map(|&c| c.min(1.0 - c))
                    .fold(f64::INFINITY, f64::min),
                None => return Err(Error::MissingParameter("field.r_m")),
            };
            if r_m <= 0.0 {
                return Err(Error::invalid(
                    "field.center",
                    "peak lies on the support boundary",
                ));
            }
            let support_radius = match params.support_radius {
                Some(r) => r,
                None if in_unit_box => center
                    .iter()
                    .map(|&c| c.max(1.0 - c).powi(2))
                    .sum::<f64>()
                    .sqrt(),
                None => return Err(Error::MissingParameter("field.support_radius")),
            };
            ScalarField::radial(center.clone(), height, q, 2.0).with_meta(FieldMeta {
                holder: Some(Holder {
                    alpha: 1.0,
                    c_alpha: 2.0 * q * support_radius,
                }),
                level_set: None,
                maximum: Some(MaximumInfo {
                    location: center,
                    c_low: q,
                    c_high: q,
                    r_m,
                }),
            })
        }
    };
    if let Some(level) = params.level {
        attach_level_set(&mut field, level)?;
    }
    Ok(field)
}

/// Declares level-set regularity of a radial field at `lambda`.
///
/// With `a` the radius of `{f >= lambda}`, `|lambda - f| = scale |rho^p - a^p|`.
/// For `p = 1` this equals `scale * d(x, boundary)` everywhere (`r_m = a`);
/// otherwise the mean value theorem on `rho in [a/2, 3a/2]` gives the
/// constants with `beta = 1` and `r_m = a / 2`.
pub fn attach_level_set(field: &mut ScalarField, lambda: f64) -> Result<()> {
    let (_, height, scale, power) = field.radial_parts().ok_or_else(|| {
        Error::invalid("field.level", "level-set regularity needs a radial field")
    })?;
    if !(scale > 0.0) {
        return Err(Error::invalid(
            "field.level",
            "field must decrease away from its center",
        ));
    }
    if !(lambda < height) {
        return Err(Error::invalid(
            "field.level",
            "level must lie below the peak height",
        ));
    }
    let a = ((height - lambda) / scale).powf(1.0 / power);
    let reg = if power == 1.0 {
        LevelSetRegularity {
            lambda,
            beta: 1.0,
            c_low: scale,
            c_high: scale,
            r_m: a,
        }
    } else {
        let inner = scale * power * (a / 2.0).powf(power - 1.0);
        let outer = scale * power * (1.5 * a).powf(power - 1.0);
        LevelSetRegularity {
            lambda,
            beta: 1.0,
            c_low: inner.min(outer),
            c_high: inner.max(outer),
            r_m: a / 2.0,
        }
    };
    field.meta_mut().level_set = Some(reg);
    Ok(())
}

/// Tent profile along a curve's intrinsic coordinate:
/// `height - slope * dist(t, center)`, with wrap-around on closed curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveProfile {
    pub center: f64,
    pub height: f64,
    pub slope: f64,
}

impl CurveProfile {
    pub fn evaluate(&self, t: f64, period: Option<f64>) -> f64 {
        let mut d = (t - self.center).abs();
        if let Some(p) = period {
            d %= p;
            d = d.min(p - d);
        }
        self.height - self.slope * d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    /// Circle of the given radius around the origin, parametrized by arc length.
    Circle { radius: f64 },
    /// `((R + r cos 2pi q t) cos 2pi p t, (R + r cos 2pi q t) sin 2pi p t, r sin 2pi q t)`,
    /// `t in [0, 1)`.
    TorusCurve {
        major: f64,
        minor: f64,
        p: u32,
        q: u32,
    },
    /// `scale * (theta cos theta, theta sin theta)`, `theta in [start, end]`.
    SwissRollCurve { start: f64, end: f64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    pub kind: CurveKind,
    pub ambient_dim: usize,
    /// Apply a fixed random rotation derived from this seed.
    pub rotation_seed: Option<u64>,
    pub profile: CurveProfile,
}

/// Declared manifold constants for uniform intrinsic sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldConstants {
    pub intrinsic_dim: usize,
    /// Reach `tau`, when known in closed form.
    pub tau: Option<f64>,
    /// Density floor with respect to the curve's length measure.
    pub p0: f64,
    pub volume: Option<f64>,
}

const TABLE_SIZE: usize = 4096;

/// A curve placed in `R^ambient_dim` by zero padding and an optional rotation.
#[derive(Debug, Clone)]
pub struct CurveEmbedding {
    kind: CurveKind,
    ambient_dim: usize,
    base_dim: usize,
    // row-major ambient_dim x ambient_dim, orthogonal
    rotation: Option<Vec<f64>>,
    table: Vec<Vec<f64>>,
}

impl CurveEmbedding {
    pub fn new(kind: CurveKind, ambient_dim: usize, rotation_seed: Option<u64>) -> Result<Self> {
        let base_dim = match kind {
            CurveKind::Circle { radius } => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return Err(Error::invalid(
                        "manifold.radius",
                        "must be finite and positive",
                    ));
                }
                2
            }
            CurveKind::TorusCurve { major, minor, p, q } => {
                if !(major > minor && minor > 0.0) || p == 0 || q == 0 {
                    return Err(Error::invalid(
                        "manifold.torus",
                        "need major > minor > 0 and positive winding numbers",
                    ));
                }
                3
            }
            CurveKind::SwissRollCurve { start, end, scale } => {
                if !(end > start && start >= 0.0 && scale > 0.0) {
                    return Err(Error::invalid(
                        "manifold.swiss_roll",
                        "need 0 <= start < end and positive scale",
                    ));
                }
                2
            }
        };
        if ambient_dim <= 1 || ambient_dim < base_dim {
            return Err(Error::UnsupportedManifold(format!(
                "curve needs ambient dimension >= {base_dim}, got {ambient_dim}"
            )));
        }
        let rotation = rotation_seed.map(|s| random_rotation(ambient_dim, s));
        let mut emb = Self {
            kind,
            ambient_dim,
            base_dim,
            rotation,
            table: Vec::new(),
        };
        if !matches!(kind, CurveKind::Circle { .. }) {
            let (lo, hi) = emb.param_range();
            emb.table = (0..=TABLE_SIZE)
                .map(|i| emb.base_point(lo + (hi - lo) * i as f64 / TABLE_SIZE as f64))
                .collect();
        }
        Ok(emb)
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Intrinsic parameter range.
    pub fn param_range(&self) -> (f64, f64) {
        match self.kind {
            CurveKind::Circle { radius } => (0.0, 2.0 * PI * radius),
            CurveKind::TorusCurve { .. } => (0.0, 1.0),
            CurveKind::SwissRollCurve { start, end, .. } => (start, end),
        }
    }

    /// Period of the intrinsic coordinate for closed curves.
    pub fn period(&self) -> Option<f64> {
        match self.kind {
            CurveKind::Circle { .. } | CurveKind::TorusCurve { .. } => {
                let (lo, hi) = self.param_range();
                Some(hi - lo)
            }
            CurveKind::SwissRollCurve { .. } => None,
        }
    }

    /// Factor `L` with `|dt| <= L |dx|` between intrinsic and ambient distance.
    /// For a circle in arc length, arc <= (pi / 2) chord on half circles.
    pub fn lipschitz_factor(&self) -> Option<f64> {
        match self.kind {
            CurveKind::Circle { .. } => Some(PI / 2.0),
            _ => None,
        }
    }

    pub fn constants(&self) -> ManifoldConstants {
        let (lo, hi) = self.param_range();
        let (tau, p0, volume) = match self.kind {
            CurveKind::Circle { radius } => {
                let len = 2.0 * PI * radius;
                (Some(radius), 1.0 / len, Some(len))
            }
            CurveKind::TorusCurve { major, minor, p, q } => {
                // |c'(t)|^2 = (2 pi p (R + r cos))^2 + (2 pi q r)^2, maximal at cos = 1
                let a = 2.0 * PI * p as f64 * (major + minor);
                let b = 2.0 * PI * q as f64 * minor;
                (None, 1.0 / (a * a + b * b).sqrt(), None)
            }
            CurveKind::SwissRollCurve { scale, .. } => {
                // |c'(theta)| = scale sqrt(1 + theta^2), maximal at the end
                let speed = scale * (1.0 + hi * hi).sqrt();
                (None, 1.0 / ((hi - lo) * speed), None)
            }
        };
        ManifoldConstants {
            intrinsic_dim: 1,
            tau,
            p0,
            volume,
        }
    }

    fn base_point(&self, t: f64) -> Vec<f64> {
        match self.kind {
            CurveKind::Circle { radius } => {
                let a = t / radius;
                vec![radius * a.cos(), radius * a.sin()]
            }
            CurveKind::TorusCurve { major, minor, p, q } => {
                let u = 2.0 * PI * p as f64 * t;
                let v = 2.0 * PI * q as f64 * t;
                let w = major + minor * v.cos();
                vec![w * u.cos(), w * u.sin(), minor * v.sin()]
            }
            CurveKind::SwissRollCurve { scale, .. } => {
                vec![scale * t * t.cos(), scale * t * t.sin()]
            }
        }
    }

    /// Ambient point at intrinsic coordinate `t`.
    pub fn point(&self, t: f64) -> Vec<f64> {
        let mut padded = self.base_point(t);
        padded.resize(self.ambient_dim, 0.0);
        match &self.rotation {
            None => padded,
            Some(rot) => {
                let d = self.ambient_dim;
                (0..d)
                    .map(|i| (0..d).map(|j| rot[i * d + j] * padded[j]).sum())
                    .collect()
            }
        }
    }

    /// Coordinates in the curve's own plane or space (`R^T x`, truncated).
    fn base_coords(&self, x: &[f64]) -> Vec<f64> {
        match &self.rotation {
            None => x[..self.base_dim].to_vec(),
            Some(rot) => {
                let d = self.ambient_dim;
                (0..self.base_dim)
                    .map(|j| (0..d).map(|i| rot[i * d + j] * x[i]).sum())
                    .collect()
            }
        }
    }

    /// Intrinsic coordinate of the curve point nearest to `x`.
    pub fn intrinsic_of(&self, x: &[f64]) -> f64 {
        let b = self.base_coords(x);
        match self.kind {
            CurveKind::Circle { radius } => {
                let a = b[1].atan2(b[0]).rem_euclid(2.0 * PI);
                let s = a * radius;
                if s >= 2.0 * PI * radius {
                    0.0
                } else {
                    s
                }
            }
            _ => self.project_by_table(&b),
        }
    }

    fn project_by_table(&self, b: &[f64]) -> f64 {
        let (lo, hi) = self.param_range();
        let step = (hi - lo) / TABLE_SIZE as f64;
        let best = self
            .table
            .iter()
            .enumerate()
            .min_by(|(_, p), (_, q)| squared_distance(p, b).total_cmp(&squared_distance(q, b)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let t0 = lo + step * best as f64;
        let mut a = t0 - step;
        let mut c = t0 + step;
        if self.period().is_none() {
            a = a.max(lo);
            c = c.min(hi);
        }
        let dist = |t: f64| squared_distance(&self.base_point(t), b);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let m1 = c - g * (c - a);
            let m2 = a + g * (c - a);
            if dist(m1) <= dist(m2) {
                c = m2;
            } else {
                a = m1;
            }
        }
        let t = 0.5 * (a + c);
        match self.period() {
            Some(p) => (t - lo).rem_euclid(p) + lo,
            None => t,
        }
    }

    /// `count` points evenly spaced in the intrinsic coordinate.
    pub fn probes(&self, count: usize) -> Result<PointSet> {
        let (lo, hi) = self.param_range();
        let ts: Vec<f64> = match self.period() {
            Some(p) => (0..count)
                .map(|i| lo + p * i as f64 / count as f64)
                .collect(),
            None if count == 1 => vec![lo],
            None => (0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect(),
        };
        let rows: Vec<Vec<f64>> = ts.iter().map(|&t| self.point(t)).collect();
        PointSet::from_rows(&rows)
    }
}

fn random_rotation(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        // two Gram-Schmidt passes for orthogonality to machine precision
        for _ in 0..2 {
            for c in &cols {
                let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= dot * ci;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        cols.push(v);
    }
    let mut rot = vec![0.0; dim * dim];
    for (j, c) in cols.iter().enumerate() {
        for i in 0..dim {
            rot[i * dim + j] = c[i];
        }
    }
    rot
}

/// Points on an embedded curve plus the field they observe.
#[derive(Debug, Clone)]
pub struct ManifoldSample {
    pub points: PointSet,
    pub intrinsic: Vec<f64>,
    pub field: ScalarField,
    pub embedding: Arc<CurveEmbedding>,
}

impl ManifoldSpec {
    pub fn embedding(&self) -> Result<Arc<CurveEmbedding>> {
        Ok(Arc::new(CurveEmbedding::new(
            self.kind,
            self.ambient_dim,
            self.rotation_seed,
        )?))
    }

    /// The attached field: the profile evaluated at the intrinsic coordinate
    /// of the nearest curve point.
    pub fn field(&self, embedding: Arc<CurveEmbedding>) -> ScalarField {
        ScalarField::on_curve(embedding, self.profile)
    }
}

/// Samples `n` points uniformly in the intrinsic coordinate.
pub fn embed_manifold(spec: &ManifoldSpec, n: usize, seed: u64) -> Result<ManifoldSample> {
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    let embedding = spec.embedding()?;
    let (lo, hi) = embedding.param_range();
    let mut rng = rng_from_seed(seed);
    let intrinsic: Vec<f64> = (0..n)
        .map(|_| lo + (hi - lo) * rng.random::<f64>())
        .collect();
    let rows: Vec<Vec<f64>> = intrinsic.iter().map(|&t| embedding.point(t)).collect();
    let points = PointSet::from_rows(&rows)?;
    let field = spec.field(embedding.clone());
    Ok(ManifoldSample {
        points,
        intrinsic,
        field,
        embedding,
    })
}
