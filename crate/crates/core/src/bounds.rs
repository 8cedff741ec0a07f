//! Closed-form calculators for the finite-sample bounds: radius bounds, the
//! variance term, Hölder bounds, k-validity windows, rate-optimal k, the
//! k-NN-set counting bound, and the data-driven level-set threshold.
//!
//! Every logarithm is natural.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::regression::Dataset;

/// Problem constants. Calculators reject with [`Error::MissingParameter`]
/// when a field they need is absent.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoundParams {
    /// Ambient dimension.
    pub dim: usize,
    pub gamma: Option<f64>,
    pub p0: Option<f64>,
    pub r0: Option<f64>,
    pub sigma: Option<f64>,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub c_alpha: Option<f64>,
    pub beta: Option<f64>,
    pub c_low: Option<f64>,
    pub c_high: Option<f64>,
    pub r_m: Option<f64>,
    /// Intrinsic dimension.
    pub d: Option<usize>,
    pub tau: Option<f64>,
    /// `sqrt(E[y^2])`.
    pub m2: Option<f64>,
}

fn need<T: Copy>(v: Option<T>, name: &'static str) -> Result<T> {
    v.ok_or(Error::MissingParameter(name))
}

impl BoundParams {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Self::default()
        }
    }

    /// Checks every present field against its admissible range.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        let positive = |v: Option<f64>, name: &'static str| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                Err(Error::invalid(name, "must be finite and positive"))
            }
            _ => Ok(()),
        };
        let nonneg = |v: Option<f64>, name: &'static str| match v {
            Some(x) if !(x >= 0.0 && x.is_finite()) => {
                Err(Error::invalid(name, "must be finite and nonnegative"))
            }
            _ => Ok(()),
        };
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g <= 1.0) {
                return Err(Error::invalid("gamma", "must lie in (0, 1]"));
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::invalid("delta", "must lie in (0, 1)"));
            }
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::invalid("alpha", "must lie in (0, 1]"));
            }
        }
        if let Some(d) = self.d {
            if d == 0 || d > self.dim {
                return Err(Error::invalid("d", "must lie in [1, dim]"));
            }
        }
        positive(self.p0, "p0")?;
        positive(self.r0, "r0")?;
        positive(self.beta, "beta")?;
        positive(self.c_low, "c_low")?;
        positive(self.c_high, "c_high")?;
        positive(self.r_m, "r_m")?;
        positive(self.tau, "tau")?;
        nonneg(self.sigma, "sigma")?;
        nonneg(self.c_alpha, "c_alpha")?;
        nonneg(self.m2, "m2")?;
        Ok(())
    }
}

/// `pi^{D/2} / Gamma(D/2 + 1)`.
pub fn unit_ball_volume(dim: usize) -> Result<f64> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be positive"));
    }
    let h = dim as f64 / 2.0;
    Ok((h * PI.ln() - ln_gamma(h + 1.0)).exp())
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid("n", "must be at least 2"));
    }
    if k == 0 {
        return Err(Error::invalid("k", "must be positive"));
    }
    Ok(())
}

fn log_term(dim: usize, n: usize, delta: f64) -> f64 {
    dim as f64 * (n as f64).ln() + (2.0 / delta).ln()
}

/// `2 sigma sqrt((D log n + log(2/delta)) / k)`.
pub fn variance_term(params: &BoundParams, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let sigma = need(params.sigma, "sigma")?;
    let delta = need(params.delta, "delta")?;
    Ok(2.0 * sigma * (log_term(params.dim, n, delta) / k as f64).sqrt())
}

/// `(2k / (gamma v_D n p0))^{1/D}`.
pub fn radius_bound(params: &BoundParams, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let gamma = need(params.gamma, "gamma")?;
    let p0 = need(params.p0, "p0")?;
    let v = unit_ball_volume(params.dim)?;
    Ok((2.0 * k as f64 / (gamma * v * n as f64 * p0)).powf(1.0 / params.dim as f64))
}

/// `(4k / (v_d n p0))^{1/d}` with intrinsic dimension `d`.
pub fn manifold_radius_bound(params: &BoundParams, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let d = need(params.d, "d")?;
    let p0 = need(params.p0, "p0")?;
    let v = unit_ball_volume(d)?;
    Ok((4.0 * k as f64 / (v * n as f64 * p0)).powf(1.0 / d as f64))
}

/// `C_alpha * r^alpha + variance_term`, where `r` is the full-dimensional or
/// manifold radius bound. The manifold variant keeps the ambient `D` in the
/// variance term.
pub fn holder_bound(params: &BoundParams, n: usize, k: usize, manifold: bool) -> Result<f64> {
    let alpha = need(params.alpha, "alpha")?;
    let c_alpha = need(params.c_alpha, "c_alpha")?;
    let r = if manifold {
        manifold_radius_bound(params, n, k)?
    } else {
        radius_bound(params, n, k)?
    };
    Ok(c_alpha * r.powf(alpha) + variance_term(params, n, k)?)
}

/// Bounds on the k-NN estimate over `B(x, r)`:
/// `lower = f_low - eps_var` and `upper = f_high + eps_var` where
/// `(f_low, f_high)` are the extremes of the true field on the ball.
pub fn one_sided_envelope(f_low: f64, f_high: f64, eps_var: f64) -> (f64, f64) {
    (f_low - eps_var, f_high + eps_var)
}

/// Squared-distance bound on the k-NN argmax:
/// `max{32 sigma / c_low * sqrt((D log n + log(2/delta)) / k),
///      32 c_high / c_low * (2k / (gamma p0 v_D n))^{2/D}}`.
pub fn maxima_bound_sq(params: &BoundParams, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let sigma = need(params.sigma, "sigma")?;
    let delta = need(params.delta, "delta")?;
    let c_low = need(params.c_low, "c_low")?;
    let c_high = need(params.c_high, "c_high")?;
    let r = radius_bound(params, n, k)?;
    let noise = 32.0 * sigma / c_low * (log_term(params.dim, n, delta) / k as f64).sqrt();
    let bias = 32.0 * c_high / c_low * r * r;
    Ok(noise.max(bias))
}

/// Hausdorff-distance bound for the level-set estimate:
/// `2 (24 M / c_low)^{1/beta} (D log n * log(2/delta))^{1/(2 beta)} k^{-1/(2 beta)}`.
pub fn level_set_bound(params: &BoundParams, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let beta = need(params.beta, "beta")?;
    let c_low = need(params.c_low, "c_low")?;
    let m2 = need(params.m2, "m2")?;
    let delta = need(params.delta, "delta")?;
    let logs = params.dim as f64 * (n as f64).ln() * (2.0 / delta).ln();
    Ok(2.0 * (24.0 * m2 / c_low).powf(1.0 / beta) * (logs / k as f64).powf(1.0 / (2.0 * beta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Setting {
    Full,
    Manifold,
    LevelSet,
    Maxima,
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "full" => Setting::Full,
            "manifold" => Setting::Manifold,
            "levelset" => Setting::LevelSet,
            "maxima" => Setting::Maxima,
            other => {
                return Err(Error::invalid(
                    "setting",
                    format!("unknown setting `{other}`"),
                ))
            }
        })
    }
}

/// One inequality `lhs <= rhs` of a k-validity window.
#[derive(Debug, Clone, PartialEq)]
pub struct Inequality {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Inequality {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            pass: lhs <= rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KRangeReport {
    pub setting: Setting,
    pub n: usize,
    pub k: usize,
    pub checks: Vec<Inequality>,
    pub pass: bool,
}

impl fmt::Display for KRangeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "k = {} with n = {} ({:?}): {}",
            self.k,
            self.n,
            self.setting,
            if self.pass { "valid" } else { "invalid" }
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  {:<28} {:>14.6} <= {:<14.6} {}",
                c.name,
                c.lhs,
                c.rhs,
                if c.pass { "ok" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Evaluates the conditions on `k` under which the bounds for `setting` hold.
///
/// `k > n` adds a failing `k <= n` check ahead of the others.
pub fn k_range_check(
    params: &BoundParams,
    n: usize,
    k: usize,
    setting: Setting,
) -> Result<KRangeReport> {
    check_nk(n, k)?;
    let dim = params.dim as f64;
    let nf = n as f64;
    let kf = k as f64;
    let logn = nf.ln();
    let mut checks = Vec::new();
    if k > n {
        checks.push(Inequality::new("k <= n", kf, nf));
    }
    match setting {
        Setting::Full | Setting::Manifold => {
            let delta = need(params.delta, "delta")?;
            let l4 = (4.0 / delta).ln();
            checks.push(Inequality::new(
                "k lower: 2^8 D log^2(4/d) log n",
                256.0 * dim * l4 * l4 * logn,
                kf,
            ));
            if setting == Setting::Full {
                let gamma = need(params.gamma, "gamma")?;
                let p0 = need(params.p0, "p0")?;
                let r0 = need(params.r0, "r0")?;
                let v = unit_ball_volume(params.dim)?;
                checks.push(Inequality::new(
                    "k upper: gamma p0 v_D r0^D n / 2",
                    kf,
                    0.5 * gamma * p0 * v * r0.powi(params.dim as i32) * nf,
                ));
            } else {
                let d = need(params.d, "d")?;
                let tau = need(params.tau, "tau")?;
                let p0 = need(params.p0, "p0")?;
                let v = unit_ball_volume(d)?;
                let m = (tau / (4.0 * d as f64)).min(1.0 / tau);
                checks.push(Inequality::new(
                    "k upper: (min)^d p0 v_d n / 4",
                    kf,
                    0.25 * m.powi(d as i32) * p0 * v * nf,
                ));
            }
        }
        Setting::LevelSet => {
            let delta = need(params.delta, "delta")?;
            let beta = need(params.beta, "beta")?;
            let c_low = need(params.c_low, "c_low")?;
            let c_high = need(params.c_high, "c_high")?;
            let r_m = need(params.r_m, "r_m")?;
            let r0 = need(params.r0, "r0")?;
            let m2 = need(params.m2, "m2")?;
            let sigma = need(params.sigma, "sigma")?;
            let gamma = need(params.gamma, "gamma")?;
            let p0 = need(params.p0, "p0")?;
            let l4 = (4.0 / delta).ln();
            let reach = (2.0 * r_m.min(r0)).powf(2.0 * beta);
            let factor = (40.0 * m2 * m2 / (reach * c_low * c_low)).max(1.0);
            checks.push(Inequality::new(
                "k lower: 8 max{1,..} log(4/d) D log n",
                8.0 * factor * l4 * dim * logn,
                kf,
            ));
            let v = unit_ball_volume(params.dim)?;
            let s = 2.0 * beta + dim;
            let upper = (4.0 * sigma * sigma / c_high).powf(2.0 * dim / s)
                * (dim * logn + l4).powf(beta / s)
                * (2.0 * gamma * p0 * v).powf(2.0 * beta / s)
                * nf.powf(2.0 * beta / s);
            checks.push(Inequality::new("k upper: level-set window", kf, upper));
        }
        Setting::Maxima => {
            let delta = need(params.delta, "delta")?;
            let sigma = need(params.sigma, "sigma")?;
            let c_low = need(params.c_low, "c_low")?;
            let c_high = need(params.c_high, "c_high")?;
            let r_m = need(params.r_m, "r_m")?;
            let r0 = need(params.r0, "r0")?;
            let gamma = need(params.gamma, "gamma")?;
            let p0 = need(params.p0, "p0")?;
            let l4 = (4.0 / delta).ln();
            let denom = if sigma == 0.0 {
                1.0
            } else {
                (c_low * c_low * r_m.powi(4) / (sigma * sigma)).min(1.0)
            };
            checks.push(Inequality::new(
                "k lower: 2^10 D log^2(4/d) log n / min",
                1024.0 * dim * l4 * l4 * logn / denom,
                kf,
            ));
            let v = unit_ball_volume(params.dim)?;
            let inner = r0
                .powi(params.dim as i32)
                .min((c_low * r_m * r_m / (32.0 * c_high)).powf(dim / 2.0));
            checks.push(Inequality::new(
                "k upper: gamma p0 v_D min{..} n / 2",
                kf,
                0.5 * gamma * p0 * v * inner * nf,
            ));
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(KRangeReport {
        setting,
        n,
        k,
        checks,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KMode {
    Regression,
    LevelSet,
    Maxima,
}

impl FromStr for KMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "regression" => KMode::Regression,
            "levelset" => KMode::LevelSet,
            "maxima" => KMode::Maxima,
            other => return Err(Error::invalid("k.mode", format!("unknown mode `{other}`"))),
        })
    }
}

/// Exponent `e` of the rate-optimal `k ~ n^e`. In level-set mode `alpha`
/// carries `beta`; maxima mode ignores it.
pub fn optimal_k_exponent(alpha: f64, dim: usize, mode: KMode) -> f64 {
    let d = dim as f64;
    match mode {
        KMode::Regression | KMode::LevelSet => 2.0 * alpha / (2.0 * alpha + d),
        KMode::Maxima => 4.0 / (4.0 + d),
    }
}

/// `max(1, round(n^e))`.
pub fn optimal_k(n: usize, alpha: f64, dim: usize, mode: KMode) -> usize {
    let e = optimal_k_exponent(alpha, dim, mode);
    ((n as f64).powf(e).round() as usize).max(1)
}

/// `D * n^D` exactly; errors instead of wrapping.
pub fn knn_set_count_bound(n: u64, dim: u32) -> Result<u128> {
    if n == 0 || dim == 0 {
        return Err(Error::invalid("n", "n and dim must be positive"));
    }
    u128::from(n)
        .checked_pow(dim)
        .and_then(|p| p.checked_mul(u128::from(dim)))
        .ok_or(Error::Overflow("D * n^D"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetThreshold {
    pub sigma_hat: f64,
    pub epsilon: f64,
}

/// `sigma_hat = sqrt((2/n) sum y_i^2)` and
/// `epsilon = 4 sigma_hat sqrt((D log n + log(2/delta)) / k)`.
pub fn level_set_epsilon(
    data: &Dataset,
    dim: usize,
    k: usize,
    delta: f64,
) -> Result<LevelSetThreshold> {
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    check_nk(n, k)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", "must lie in (0, 1)"));
    }
    let sum_sq: f64 = data.y().iter().map(|y| y * y).sum();
    let sigma_hat = (2.0 / n as f64 * sum_sq).sqrt();
    let epsilon = 4.0 * sigma_hat * (log_term(dim, n, delta) / k as f64).sqrt();
    Ok(LevelSetThreshold { sigma_hat, epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::PointSet;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn ball_volumes() {
        assert!(close(unit_ball_volume(1).unwrap(), 2.0, 1e-13));
        assert!(close(unit_ball_volume(2).unwrap(), PI, 1e-13));
        assert!(close(unit_ball_volume(3).unwrap(), 4.0 * PI / 3.0, 1e-13));
        assert!(close(unit_ball_volume(4).unwrap(), PI * PI / 2.0, 1e-13));
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn ball_volume_matches_recursion() {
        // v_D = 2 pi / D * v_{D-2}
        let mut prev2 = 1.0;
        let mut prev1 = 2.0;
        for d in 2..=40usize {
            let v = 2.0 * PI / d as f64 * prev2;
            assert!(close(unit_ball_volume(d).unwrap(), v, 1e-12), "D = {d}");
            prev2 = prev1;
            prev1 = v;
        }
    }

    fn variance_params() -> BoundParams {
        BoundParams {
            sigma: Some(1.0),
            delta: Some(0.1),
            ..BoundParams::new(1)
        }
    }

    #[test]
    fn variance_hand_value() {
        let v = variance_term(&variance_params(), 10, 4).unwrap();
        assert!((v - 2.30180).abs() < 1e-5, "{v}");
    }

    #[test]
    fn variance_noiseless_and_scaling() {
        let mut p = variance_params();
        p.sigma = Some(0.0);
        assert_eq!(variance_term(&p, 1000, 7).unwrap(), 0.0);
        let p = variance_params();
        let a = variance_term(&p, 500, 8).unwrap();
        let b = variance_term(&p, 500, 16).unwrap();
        assert!(close(a / b, 2f64.sqrt(), 1e-15));
        assert!(matches!(
            variance_term(&BoundParams::new(1), 10, 2),
            Err(Error::MissingParameter("sigma"))
        ));
    }

    #[test]
    fn radius_hand_values() {
        let p = BoundParams {
            gamma: Some(1.0),
            p0: Some(1.0),
            ..BoundParams::new(1)
        };
        assert!(close(radius_bound(&p, 1000, 100).unwrap(), 0.1, 1e-15));
        let disk = BoundParams {
            gamma: Some(1.0),
            p0: Some(1.0 / PI),
            ..BoundParams::new(2)
        };
        assert!(close(
            radius_bound(&disk, 1000, 100).unwrap(),
            0.2f64.sqrt(),
            1e-14
        ));
        assert!(matches!(
            radius_bound(&BoundParams::new(1), 10, 2),
            Err(Error::MissingParameter("gamma"))
        ));
    }

    #[test]
    fn manifold_radius_hand_value_ignores_ambient_dim() {
        for dim in [1, 3, 10, 50] {
            let p = BoundParams {
                d: Some(1),
                p0: Some(1.0),
                ..BoundParams::new(dim)
            };
            assert!(close(
                manifold_radius_bound(&p, 1000, 50).unwrap(),
                0.1,
                1e-15
            ));
            let quarter = manifold_radius_bound(&p, 4000, 50).unwrap();
            assert!(close(quarter, 0.025, 1e-15));
        }
    }

    #[test]
    fn holder_bound_sums_terms() {
        let p = BoundParams {
            gamma: Some(1.0),
            p0: Some(1.0),
            sigma: Some(0.0),
            delta: Some(0.1),
            alpha: Some(1.0),
            c_alpha: Some(0.0),
            ..BoundParams::new(1)
        };
        assert_eq!(holder_bound(&p, 1000, 100, false).unwrap(), 0.0);
        let p = BoundParams {
            c_alpha: Some(1.0),
            sigma: Some(1.0),
            ..p
        };
        let radius = radius_bound(&p, 1000, 100).unwrap();
        let var = variance_term(&p, 10, 4).unwrap();
        assert!((radius + var - 2.40180).abs() < 1e-5);
        let total = holder_bound(&p, 1000, 100, false).unwrap();
        assert_eq!(total, radius + variance_term(&p, 1000, 100).unwrap());
    }

    #[test]
    fn holder_terms_are_monotone_in_k() {
        let p = BoundParams {
            gamma: Some(0.5),
            p0: Some(1.0),
            sigma: Some(0.3),
            delta: Some(0.05),
            alpha: Some(0.7),
            c_alpha: Some(2.0),
            ..BoundParams::new(2)
        };
        let mut prev_bias = 0.0;
        let mut prev_var = f64::INFINITY;
        for k in 1..200 {
            let bias = 2.0 * radius_bound(&p, 5000, k).unwrap().powf(0.7);
            let var = variance_term(&p, 5000, k).unwrap();
            assert!(bias > prev_bias && var < prev_var);
            prev_bias = bias;
            prev_var = var;
        }
    }

    #[test]
    fn full_k_window_is_empty_at_desk_scale() {
        let p = BoundParams {
            gamma: Some(1.0),
            p0: Some(1.0),
            r0: Some(1.0),
            delta: Some(0.25),
            ..BoundParams::new(1)
        };
        let r = k_range_check(&p, 1000, 100, Setting::Full).unwrap();
        assert!(!r.pass);
        let lower = &r.checks[0];
        assert!((lower.lhs - 13594.0).abs() < 1.0, "{}", lower.lhs);
        assert!(!lower.pass);
        assert!(r.to_string().contains("FAIL"));
    }

    #[test]
    fn k_above_n_is_flagged() {
        let p = BoundParams {
            gamma: Some(1.0),
            p0: Some(1.0),
            r0: Some(1.0),
            delta: Some(0.25),
            ..BoundParams::new(1)
        };
        let r = k_range_check(&p, 10, 11, Setting::Full).unwrap();
        assert_eq!(r.checks[0].name, "k <= n");
        assert!(!r.checks[0].pass && !r.pass);
    }

    #[test]
    fn k_window_passes_when_large_enough() {
        let p = BoundParams {
            gamma: Some(1.0),
            p0: Some(1.0),
            r0: Some(1.0),
            delta: Some(0.5),
            ..BoundParams::new(1)
        };
        let n = 10_000_000;
        assert!(k_range_check(&p, n, 100_000, Setting::Full).unwrap().pass);
    }

    #[test]
    fn maxima_noiseless_denominator() {
        let p = BoundParams {
            gamma: Some(1.0),
            p0: Some(1.0),
            r0: Some(0.5),
            delta: Some(0.1),
            sigma: Some(0.0),
            c_low: Some(1.0),
            c_high: Some(1.0),
            r_m: Some(0.1),
            ..BoundParams::new(1)
        };
        let r = k_range_check(&p, 1000, 10, Setting::Maxima).unwrap();
        let l4 = 40f64.ln();
        assert!(close(
            r.checks[0].lhs,
            1024.0 * l4 * l4 * 1000f64.ln(),
            1e-14
        ));
    }

    #[test]
    fn missing_parameters_are_named() {
        let p = BoundParams {
            delta: Some(0.1),
            ..BoundParams::new(3)
        };
        assert!(matches!(
            k_range_check(&p, 100, 5, Setting::Full),
            Err(Error::MissingParameter("gamma"))
        ));
        assert!(matches!(
            k_range_check(&p, 100, 5, Setting::Manifold),
            Err(Error::MissingParameter("d"))
        ));
        assert!(matches!(
            k_range_check(&p, 100, 5, Setting::LevelSet),
            Err(Error::MissingParameter("beta"))
        ));
    }

    #[test]
    fn optimal_k_examples() {
        assert_eq!(optimal_k(10_000, 1.0, 2, KMode::Regression), 100);
        assert_eq!(optimal_k(100_000, 0.0, 1, KMode::Maxima), 10_000);
        assert_eq!(optimal_k(2, 1.0, 50, KMode::Regression), 1);
        assert_eq!(optimal_k(1000, 1.0, 1, KMode::LevelSet), 100);
    }

    #[test]
    fn set_count_bound_is_exact_or_errors() {
        assert_eq!(knn_set_count_bound(10, 2).unwrap(), 200);
        assert_eq!(knn_set_count_bound(1, 7).unwrap(), 7);
        assert_eq!(
            knn_set_count_bound(1_000_000, 3).unwrap(),
            3_000_000_000_000_000_000
        );
        assert!(matches!(
            knn_set_count_bound(1_000_000, 7),
            Err(Error::Overflow(_))
        ));
    }

    #[test]
    fn epsilon_hand_values() {
        let x = PointSet::from_scalars(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let data = Dataset::new(x.clone(), vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let t = level_set_epsilon(&data, 1, 4, 0.5).unwrap();
        assert!(close(t.sigma_hat, 2f64.sqrt(), 1e-15));
        assert!((t.epsilon - 4.70964).abs() < 1e-5, "{}", t.epsilon);
        let zero = Dataset::new(x, vec![0.0; 4]).unwrap();
        let t = level_set_epsilon(&zero, 1, 2, 0.5).unwrap();
        assert_eq!((t.sigma_hat, t.epsilon), (0.0, 0.0));
    }

    #[test]
    fn level_set_bound_shrinks_in_k() {
        let p = BoundParams {
            beta: Some(1.0),
            c_low: Some(2.0),
            m2: Some(0.5),
            delta: Some(0.1),
            ..BoundParams::new(1)
        };
        let a = level_set_bound(&p, 1000, 10).unwrap();
        let b = level_set_bound(&p, 1000, 40).unwrap();
        assert!(close(a / b, 2.0, 1e-14));
    }

    #[test]
    fn params_validation() {
        let mut p = BoundParams::new(2);
        assert!(p.validate().is_ok());
        p.gamma = Some(1.5);
        assert!(p.validate().is_err());
        let p = BoundParams {
            d: Some(3),
            ..BoundParams::new(2)
        };
        assert!(p.validate().is_err());
    }
}
