//! Monte Carlo experiments. Each trial `(n, t)` draws its data from streams
//! seeded by the master seed, `n` and `t`, so trials run in parallel and
//! produce the same records as a serial run.

use std::time::Instant;

use rayon::prelude::*;

use crate::bounds::{self, BoundParams, Setting};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, ExperimentKind};
use crate::harness::record::ExperimentRecord;
use crate::index::{squared_distance, PointSet};
use crate::regression::{Dataset, Regressor, ScalarField};
use crate::structures::{
    count_distinct_knn_sets, hausdorff_distance, level_set_from_predictions,
    maxima_from_predictions, regular_grid, true_level_set_grid, PointCloud,
};
use crate::synth::{
    embed_manifold, make_field, sample_noise, sample_points, stream_seed, DensitySpec, ManifoldSpec,
};

/// Trial identifier mixed into every stream seed.
pub fn trial_id(n: usize, t: u64) -> u64 {
    ((n as u64) << 32) | (t & 0xffff_ffff)
}

/// Everything a trial needs that does not depend on `(n, t)`.
#[derive(Debug, Clone)]
pub struct Setup {
    pub field: ScalarField,
    pub probes: PointSet,
    pub params: BoundParams,
    /// Smoothness exponent fed to the optimal k rule.
    pub smoothness: Option<f64>,
    /// Dimension governing the rate: intrinsic on manifolds, ambient otherwise.
    pub rate_dim: usize,
    pub manifold: Option<ManifoldSpec>,
}

impl Setup {
    pub fn is_manifold(&self) -> bool {
        self.manifold.is_some()
    }
}

/// Grid over the density's bounding box restricted to its support.
fn support_grid(density: &DensitySpec, per_axis: usize) -> Result<(PointSet, f64)> {
    let (grid, h) = regular_grid(&density.bounding_box(), per_axis)?;
    if matches!(density, DensitySpec::UniformBall { .. }) {
        let inside: Vec<usize> = (0..grid.len())
            .filter(|&i| density.contains(grid.point(i)))
            .collect();
        return Ok((grid.select(&inside)?, h));
    }
    Ok((grid, h))
}

/// `sqrt(E[y^2])` by quadrature of `f^2` against the density on `grid`.
pub fn second_moment_root(cfg: &ExperimentConfig, field: &ScalarField, grid: &PointSet) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for p in grid.iter() {
        let w = cfg.density.pdf(p);
        let f = field.evaluate(p);
        num += w * f * f;
        den += w;
    }
    (num / den + cfg.noise.second_moment()).sqrt()
}

/// Builds the field, probes and bound constants for `kind`.
pub fn setup(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<Setup> {
    let wants_manifold = kind == ExperimentKind::Manifold
        || (kind == ExperimentKind::Coverage && cfg.manifold.is_some());
    if wants_manifold {
        let spec = cfg
            .manifold
            .clone()
            .ok_or_else(|| Error::Config("missing key `manifold.kind`".to_string()))?;
        let embedding = spec.embedding()?;
        let field = spec.field(embedding.clone());
        let probes = embedding.probes(cfg.probe_count)?;
        let mc = embedding.constants();
        let holder = field.meta().holder;
        let params = BoundParams {
            d: Some(mc.intrinsic_dim),
            p0: Some(mc.p0),
            tau: mc.tau,
            sigma: Some(cfg.noise.sigma()),
            delta: Some(cfg.delta),
            alpha: holder.map(|h| h.alpha),
            c_alpha: holder.map(|h| h.c_alpha),
            ..BoundParams::new(spec.ambient_dim)
        };
        return Ok(Setup {
            field,
            probes,
            params,
            smoothness: Some(holder.map_or(1.0, |h| h.alpha)),
            rate_dim: mc.intrinsic_dim,
            manifold: Some(spec),
        });
    }

    let dim = cfg.density.dim();
    let mut fp = cfg.field.clone();
    fp.dim = dim;
    if kind == ExperimentKind::LevelSet {
        fp.level = Some(
            cfg.levelset
                .lambda
                .ok_or_else(|| Error::Config("missing key `levelset.lambda`".to_string()))?,
        );
    }
    let field_kind = cfg
        .field_kind
        .ok_or_else(|| Error::Config("missing key `field.kind`".to_string()))?;
    let field = make_field(field_kind, &fp)?;
    let (probes, _) = support_grid(&cfg.density, cfg.probe_resolution)?;
    let dc = cfg.density.constants();
    let meta = field.meta();
    let mut params = BoundParams {
        gamma: Some(dc.gamma),
        p0: Some(dc.p0),
        r0: Some(dc.r0),
        sigma: Some(cfg.noise.sigma()),
        delta: Some(cfg.delta),
        alpha: meta.holder.map(|h| h.alpha),
        c_alpha: meta.holder.map(|h| h.c_alpha),
        ..BoundParams::new(dim)
    };
    let mut smoothness = meta.holder.map(|h| h.alpha);
    match kind {
        ExperimentKind::LevelSet => {
            if let Some(ls) = meta.level_set {
                params.beta = Some(ls.beta);
                params.c_low = Some(ls.c_low);
                params.c_high = Some(ls.c_high);
                params.r_m = Some(ls.r_m);
                smoothness = Some(ls.beta);
            }
            let (grid, _) = support_grid(&cfg.density, cfg.levelset.grid)?;
            params.m2 = Some(second_moment_root(cfg, &field, &grid));
        }
        ExperimentKind::Maxima => {
            if let Some(m) = &meta.maximum {
                params.c_low = Some(m.c_low);
                params.c_high = Some(m.c_high);
                params.r_m = Some(m.r_m);
            }
        }
        _ => {}
    }
    Ok(Setup {
        field,
        probes,
        params,
        smoothness,
        rate_dim: dim,
        manifold: None,
    })
}

/// Samples the data of trial `(n, t)`.
pub fn trial_data(cfg: &ExperimentConfig, setup: &Setup, n: usize, t: u64) -> Result<Dataset> {
    let id = trial_id(n, t);
    let point_seed = stream_seed(cfg.master_seed, id, "points");
    let x = match &setup.manifold {
        Some(spec) => embed_manifold(spec, n, point_seed)?.points,
        None => sample_points(&cfg.density, n, point_seed)?,
    };
    let noise = sample_noise(&cfg.noise, n, stream_seed(cfg.master_seed, id, "noise"))?;
    let y = x
        .iter()
        .zip(&noise)
        .map(|(p, e)| setup.field.evaluate(p) + e)
        .collect();
    Dataset::new(x, y)
}

fn or_nan(v: Result<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn valid(params: &BoundParams, n: usize, k: usize, setting: Setting) -> bool {
    bounds::k_range_check(params, n, k, setting)
        .map(|r| r.pass)
        .unwrap_or(false)
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    setup: &'a Setup,
    name: &'static str,
}

impl Ctx<'_> {
    #[allow(clippy::too_many_arguments)]
    fn record(
        &self,
        n: usize,
        k: usize,
        t: u64,
        quantity: &str,
        value: f64,
        bound: f64,
        valid_k: bool,
    ) -> ExperimentRecord {
        ExperimentRecord {
            experiment: self.name.to_string(),
            n,
            k,
            seed: t,
            quantity: quantity.to_string(),
            value,
            bound,
            valid_k,
            ms: None,
        }
    }

    fn ks(&self, n: usize) -> Result<Vec<usize>> {
        let ks = self
            .cfg
            .k_values(n, self.setup.smoothness, self.setup.rate_dim)?;
        if let Some(&k) = ks.iter().find(|&&k| k > n) {
            return Err(Error::InvalidK { k, n });
        }
        Ok(ks)
    }
}

/// Runs `trial` over every `(n, t)` in parallel and returns the records
/// sorted by `(n, seed)`, keeping each trial's own order.
fn run_trials<F>(cfg: &ExperimentConfig, trial: F) -> Result<Vec<ExperimentRecord>>
where
    F: Fn(usize, u64) -> Result<Vec<ExperimentRecord>> + Sync,
{
    let jobs: Vec<(usize, u64)> = cfg
        .ladder
        .iter()
        .flat_map(|&n| (0..cfg.seeds as u64).map(move |t| (n, t)))
        .collect();
    let per_trial: Vec<Vec<ExperimentRecord>> = jobs
        .par_iter()
        .map(|&(n, t)| {
            let start = Instant::now();
            let mut recs = trial(n, t)?;
            if cfg.timing {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                recs.iter_mut().for_each(|r| r.ms = Some(ms));
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<ExperimentRecord> = per_trial.into_iter().flatten().collect();
    out.sort_by_key(|r| (r.n, r.seed));
    Ok(out)
}

fn sup_error_records(
    ctx: &Ctx,
    n: usize,
    t: u64,
    with_radius: bool,
) -> Result<Vec<ExperimentRecord>> {
    let data = trial_data(ctx.cfg, ctx.setup, n, t)?;
    let manifold = ctx.setup.is_manifold();
    let setting = if manifold {
        Setting::Manifold
    } else {
        Setting::Full
    };
    let params = &ctx.setup.params;
    let mut out = Vec::new();
    for k in ctx.ks(n)? {
        let reg = Regressor::new(data.clone(), k)?;
        let sup = reg.sup_error(&ctx.setup.field, &ctx.setup.probes)?;
        let ok = valid(params, n, k, setting);
        let bound = or_nan(bounds::holder_bound(params, n, k, manifold));
        out.push(ctx.record(n, k, t, "sup_error", sup.sup, bound, ok));
        if with_radius {
            let probes = &ctx.setup.probes;
            let radii: Vec<f64> = (0..probes.len())
                .into_par_iter()
                .map(|i| reg.knn_radius(probes.point(i)))
                .collect::<Result<_>>()?;
            let max_r = radii.into_iter().fold(0.0, f64::max);
            let rb = if manifold {
                bounds::manifold_radius_bound(params, n, k)
            } else {
                bounds::radius_bound(params, n, k)
            };
            out.push(ctx.record(n, k, t, "max_radius", max_r, or_nan(rb), ok));
        }
    }
    Ok(out)
}

/// Sup error over the probes against the Hölder bound, per `(n, seed, k)`.
/// Uses the embedded curve when the config declares one.
pub fn run_regression_rate(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let kind = if cfg.manifold.is_some() {
        ExperimentKind::Manifold
    } else {
        ExperimentKind::Regress
    };
    let setup = setup(cfg, kind)?;
    let ctx = Ctx {
        cfg,
        setup: &setup,
        name: kind.name(),
    };
    run_trials(cfg, |n, t| sup_error_records(&ctx, n, t, false))
}

pub fn run_manifold(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    if cfg.manifold.is_none() {
        return Err(Error::Config("missing key `manifold.kind`".to_string()));
    }
    run_regression_rate(cfg)
}

/// Hausdorff distance between the estimated level set and a grid
/// discretization of the true one. Empty truth or empty estimates produce
/// `hausdorff_failure` rows with NaN values.
pub fn run_levelset(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let setup = setup(cfg, ExperimentKind::LevelSet)?;
    let lambda = cfg.levelset.lambda.expect("checked in setup");
    let (grid, h) = support_grid(&cfg.density, cfg.levelset.grid)?;
    let truth = true_level_set_grid(&setup.field, lambda, &grid, h);
    let ctx = Ctx {
        cfg,
        setup: &setup,
        name: ExperimentKind::LevelSet.name(),
    };
    let dim = cfg.density.dim();
    run_trials(cfg, |n, t| {
        let data = trial_data(cfg, &setup, n, t)?;
        let mut out = Vec::new();
        for k in ctx.ks(n)? {
            let ok = valid(&setup.params, n, k, Setting::LevelSet);
            let bound = or_nan(bounds::level_set_bound(&setup.params, n, k));
            let truth = match &truth {
                Ok(t) => t,
                Err(_) => {
                    out.push(ctx.record(n, k, t, "hausdorff_failure", f64::NAN, bound, ok));
                    continue;
                }
            };
            let epsilon = match cfg.levelset.epsilon {
                Some(e) => e,
                None => bounds::level_set_epsilon(&data, dim, k, cfg.delta)?.epsilon,
            };
            let reg = Regressor::new(data.clone(), k)?;
            let preds = reg.predict_at_samples()?;
            let est = level_set_from_predictions(&reg, &preds, lambda, epsilon)?;
            if est.member_points.is_empty() {
                out.push(ctx.record(n, k, t, "hausdorff_failure", f64::NAN, bound, ok));
                continue;
            }
            let d = hausdorff_distance(&est.member_points, truth)?;
            out.push(ctx.record(n, k, t, "hausdorff", d, bound, ok));
        }
        Ok(out)
    })
}

/// Distance from the k-NN argmax to the true maximizer.
pub fn run_maxima(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let setup = setup(cfg, ExperimentKind::Maxima)?;
    let x0 = setup
        .field
        .meta()
        .maximum
        .as_ref()
        .map(|m| m.location.clone())
        .ok_or(Error::MissingParameter(
            "field maximum (use field.kind = quadratic-peak)",
        ))?;
    let ctx = Ctx {
        cfg,
        setup: &setup,
        name: ExperimentKind::Maxima.name(),
    };
    run_trials(cfg, |n, t| {
        let data = trial_data(cfg, &setup, n, t)?;
        let mut out = Vec::new();
        for k in ctx.ks(n)? {
            let reg = Regressor::new(data.clone(), k)?;
            let preds = reg.predict_at_samples()?;
            let m = maxima_from_predictions(&reg, &preds)?;
            let d = squared_distance(&m.location, &x0).sqrt();
            let ok = valid(&setup.params, n, k, Setting::Maxima);
            let bound = or_nan(bounds::maxima_bound_sq(&setup.params, n, k).map(f64::sqrt));
            out.push(ctx.record(n, k, t, "argmax_error", d, bound, ok));
        }
        Ok(out)
    })
}

/// Coverage of the uniform bound and of the radius event.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub trials: usize,
    /// Fraction of trials with `sup_error <= holder_bound`.
    pub coverage: f64,
    /// Fraction of trials with `max_radius <= radius_bound`.
    pub radius_coverage: f64,
    /// `(n, seed, k)` of trials violating the uniform bound.
    pub violations: Vec<(usize, u64, usize)>,
    pub radius_violations: Vec<(usize, u64, usize)>,
}

/// Summarizes `sup_error` and `max_radius` rows.
pub fn coverage_from_records(records: &[ExperimentRecord]) -> Result<CoverageReport> {
    let tally = |quantity: &str| {
        let rows: Vec<&ExperimentRecord> =
            records.iter().filter(|r| r.quantity == quantity).collect();
        let bad: Vec<(usize, u64, usize)> = rows
            .iter()
            .filter(|r| !(r.value <= r.bound))
            .map(|r| (r.n, r.seed, r.k))
            .collect();
        (rows.len(), bad)
    };
    let (trials, violations) = tally("sup_error");
    let (radius_trials, radius_violations) = tally("max_radius");
    if trials == 0 {
        return Err(Error::invalid("records", "no sup_error rows to summarize"));
    }
    let frac = |total: usize, bad: usize| {
        if total == 0 {
            f64::NAN
        } else {
            1.0 - bad as f64 / total as f64
        }
    };
    Ok(CoverageReport {
        trials,
        coverage: frac(trials, violations.len()),
        radius_coverage: frac(radius_trials, radius_violations.len()),
        violations,
        radius_violations,
    })
}

pub fn run_coverage(cfg: &ExperimentConfig) -> Result<(CoverageReport, Vec<ExperimentRecord>)> {
    let setup = setup(cfg, ExperimentKind::Coverage)?;
    if setup.params.alpha.is_none() {
        return Err(Error::MissingParameter("field Hölder constants"));
    }
    let ctx = Ctx {
        cfg,
        setup: &setup,
        name: ExperimentKind::Coverage.name(),
    };
    let records = run_trials(cfg, |n, t| sup_error_records(&ctx, n, t, true))?;
    Ok((coverage_from_records(&records)?, records))
}

/// Distinct k-NN sets over a probe grid against `D n^D`, for every rung
/// `n` and every `k <= n` in `setcount.k`.
pub fn run_setcount(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let dim = cfg.density.dim();
    let (probes, _) = support_grid(&cfg.density, cfg.setcount.grid)?;
    let name = ExperimentKind::SetCount.name();
    run_trials(cfg, |n, t| {
        let points = sample_points(
            &cfg.density,
            n,
            stream_seed(cfg.master_seed, trial_id(n, t), "points"),
        )?;
        let bound = bounds::knn_set_count_bound(n as u64, dim as u32)? as f64;
        let mut out = Vec::new();
        for &k in cfg.setcount.k.iter().filter(|&&k| k <= n) {
            let count = count_distinct_knn_sets(&points, k, &probes)?;
            out.push(ExperimentRecord {
                experiment: name.to_string(),
                n,
                k,
                seed: t,
                quantity: "set_count".to_string(),
                value: count as f64,
                bound,
                valid_k: true,
                ms: None,
            });
        }
        Ok(out)
    })
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ExperimentRecord>,
    pub coverage: Option<CoverageReport>,
}

/// Runs `kind`, rejecting configs that declare a different experiment.
pub fn run_experiment(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<RunOutput> {
    if let Some(declared) = cfg.experiment {
        if declared != kind {
            return Err(Error::Config(format!(
                "config declares experiment `{declared}`, not `{kind}`"
            )));
        }
    }
    let records = match kind {
        ExperimentKind::Regress => {
            if cfg.manifold.is_some() {
                return Err(Error::Config(
                    "manifold.* keys belong to the manifold experiment".to_string(),
                ));
            }
            run_regression_rate(cfg)?
        }
        ExperimentKind::Manifold => run_manifold(cfg)?,
        ExperimentKind::LevelSet => run_levelset(cfg)?,
        ExperimentKind::Maxima => run_maxima(cfg)?,
        ExperimentKind::SetCount => run_setcount(cfg)?,
        ExperimentKind::Coverage => {
            let (report, records) = run_coverage(cfg)?;
            return Ok(RunOutput {
                records,
                coverage: Some(report),
            });
        }
    };
    Ok(RunOutput {
        records,
        coverage: None,
    })
}

/// Point cloud of the discretized true level set used by the level-set
/// experiment.
pub fn levelset_truth(cfg: &ExperimentConfig, field: &ScalarField) -> Result<PointCloud> {
    let lambda = cfg
        .levelset
        .lambda
        .ok_or_else(|| Error::Config("missing key `levelset.lambda`".to_string()))?;
    let (grid, h) = support_grid(&cfg.density, cfg.levelset.grid)?;
    true_level_set_grid(field, lambda, &grid, h)
}
