//! Experiment configuration: flat `key = value` lines, dotted section
//! prefixes, `#` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::bounds::KMode;
use crate::error::{Error, Result};
use crate::synth::{
    CurveKind, CurveProfile, DensitySpec, FieldKind, FieldParams, ManifoldSpec, NoiseSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Regress,
    Manifold,
    LevelSet,
    Maxima,
    Coverage,
    SetCount,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Regress => "regress",
            ExperimentKind::Manifold => "manifold",
            ExperimentKind::LevelSet => "levelset",
            ExperimentKind::Maxima => "maxima",
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::SetCount => "setcount",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "regress" => ExperimentKind::Regress,
            "manifold" => ExperimentKind::Manifold,
            "levelset" => ExperimentKind::LevelSet,
            "maxima" => ExperimentKind::Maxima,
            "coverage" => ExperimentKind::Coverage,
            "setcount" => ExperimentKind::SetCount,
            other => return Err(Error::Config(format!("unknown experiment `{other}`"))),
        })
    }
}

/// How `k` is chosen at each sample size.
#[derive(Debug, Clone, PartialEq)]
pub enum KRule {
    /// The listed values at every `n`.
    Fixed(Vec<usize>),
    /// `ceil(factor * n^exponent)`.
    Power { exponent: f64, factor: f64 },
    /// `max(1, round(factor * n^e))` with the rate-optimal exponent `e`.
    Optimal { mode: KMode, factor: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetOptions {
    pub lambda: Option<f64>,
    /// Replaces the data-driven threshold margin when set.
    pub epsilon: Option<f64>,
    /// Truth-grid points per axis.
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetCountOptions {
    pub k: Vec<usize>,
    /// Probe-grid points per axis.
    pub grid: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub master_seed: u64,
    pub delta: f64,
    pub seeds: usize,
    pub ladder: Vec<usize>,
    pub k_rule: KRule,
    pub density: DensitySpec,
    pub noise: NoiseSpec,
    pub field_kind: Option<FieldKind>,
    pub field: FieldParams,
    pub manifold: Option<ManifoldSpec>,
    /// Probe-grid points per axis for full-dimensional experiments.
    pub probe_resolution: usize,
    /// Probes along the curve for manifold experiments.
    pub probe_count: usize,
    pub levelset: LevelSetOptions,
    pub setcount: SetCountOptions,
    /// Fill the `ms` column with wall time (breaks byte reproducibility).
    pub timing: bool,
}

struct Entries<'a> {
    origin: &'a str,
    map: BTreeMap<String, (String, usize)>,
}

impl<'a> Entries<'a> {
    fn parse(text: &str, origin: &'a str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: i + 1,
                    message: format!("malformed key `{key}`"),
                });
            }
            if map
                .insert(key.to_string(), (value.trim().to_string(), i + 1))
                .is_some()
            {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: i + 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { origin, map })
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.map.remove(key)
    }

    fn parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|e| Error::Parse {
                path: self.origin.to_string(),
                line,
                message: format!("`{key}`: {e}"),
            }),
        }
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| s.trim().parse::<T>())
                .collect::<Result<Vec<T>, _>>()
                .map(Some)
                .map_err(|e| Error::Parse {
                    path: self.origin.to_string(),
                    line,
                    message: format!("`{key}`: {e}"),
                }),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.into_iter().next() {
            None => Ok(()),
            Some((key, (_, line))) => Err(Error::Parse {
                path: self.origin.to_string(),
                line,
                message: format!("unknown key `{key}`"),
            }),
        }
    }
}

/// A real number written either as a decimal or as a fraction `p/q`.
struct Exponent(f64);

impl FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        match s.split_once('/') {
            Some((p, q)) => Ok(Exponent(num(p)? / num(q)?)),
            None => Ok(Exponent(num(s)?)),
        }
    }
}

fn required<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing key `{key}`")))
}

impl ExperimentConfig {
    /// Parses config text; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut e = Entries::parse(text, origin)?;
        let experiment = e.parsed::<ExperimentKind>("experiment")?;
        let master_seed = e.parsed("master_seed")?.unwrap_or(0);
        let delta = e.parsed("delta")?.unwrap_or(0.1);
        let seeds = e.parsed("seeds")?.unwrap_or(1);
        let ladder = required(e.list("n.ladder")?, "n.ladder")?;

        let rule: String = e.parsed("k.rule")?.unwrap_or_else(|| "optimal".to_string());
        let factor = e.parsed("k.factor")?.unwrap_or(1.0);
        let k_rule = match rule.as_str() {
            "fixed" => KRule::Fixed(required(e.list("k.values")?, "k.values")?),
            "power" => KRule::Power {
                exponent: required(e.parsed::<Exponent>("k.exponent")?, "k.exponent")?.0,
                factor,
            },
            "optimal" => KRule::Optimal {
                mode: e.parsed("k.mode")?.unwrap_or(KMode::Regression),
                factor,
            },
            other => return Err(Error::Config(format!("unknown k.rule `{other}`"))),
        };

        let kind: String = e
            .parsed("density.kind")?
            .unwrap_or_else(|| "uniform-box".to_string());
        let density = match kind.as_str() {
            "uniform-box" => DensitySpec::UniformBox {
                dim: e.parsed("density.dim")?.unwrap_or(1),
                lo: e.parsed("density.lo")?.unwrap_or(0.0),
                side: e.parsed("density.side")?.unwrap_or(1.0),
            },
            "uniform-ball" => {
                let center: Vec<f64> = required(e.list("density.center")?, "density.center")?;
                if let Some(dim) = e.parsed::<usize>("density.dim")? {
                    if dim != center.len() {
                        return Err(Error::Config(
                            "density.dim disagrees with density.center".to_string(),
                        ));
                    }
                }
                DensitySpec::UniformBall {
                    center,
                    radius: e.parsed("density.radius")?.unwrap_or(1.0),
                }
            }
            "truncated-mixture" => DensitySpec::TruncatedMixture {
                dim: e.parsed("density.dim")?.unwrap_or(1),
                uniform_weight: required(e.parsed("density.weight")?, "density.weight")?,
                mean: e.parsed("density.mean")?.unwrap_or(0.5),
                sd: required(e.parsed("density.sd")?, "density.sd")?,
            },
            other => return Err(Error::Config(format!("unknown density.kind `{other}`"))),
        };

        let kind: String = e
            .parsed("noise.kind")?
            .unwrap_or_else(|| "none".to_string());
        let scale = e.parsed::<f64>("noise.scale")?;
        let noise = match kind.as_str() {
            "none" => NoiseSpec::None,
            "gaussian" => NoiseSpec::Gaussian {
                sigma: required(scale, "noise.scale")?,
            },
            "uniform" => NoiseSpec::Uniform {
                half_width: required(scale, "noise.scale")?,
            },
            "rademacher" => NoiseSpec::Rademacher {
                scale: required(scale, "noise.scale")?,
            },
            other => return Err(Error::Config(format!("unknown noise.kind `{other}`"))),
        };

        let field_kind = e.parsed::<FieldKind>("field.kind")?;
        let mut field = FieldParams::new(density.dim());
        field.center = e.list("field.center")?;
        if let Some(v) = e.parsed("field.height")? {
            field.height = v;
        }
        if let Some(v) = e.parsed("field.slope")? {
            field.slope = v;
        }
        if let Some(v) = e.parsed("field.alpha")? {
            field.alpha = v;
        }
        if let Some(v) = e.parsed("field.c_alpha")? {
            field.c_alpha = v;
        }
        if let Some(v) = e.parsed("field.q")? {
            field.q = v;
        }
        if let Some(v) = e.parsed("field.value")? {
            field.value = v;
        }
        field.coef = e.list("field.coef")?;
        if let Some(v) = e.parsed("field.offset")? {
            field.offset = v;
        }
        field.r_m = e.parsed("field.r_m")?;
        field.support_radius = e.parsed("field.support_radius")?;

        let manifold = match e.parsed::<String>("manifold.kind")? {
            None => None,
            Some(kind) => {
                let curve = match kind.as_str() {
                    "circle" => CurveKind::Circle {
                        radius: required(e.parsed("manifold.radius")?, "manifold.radius")?,
                    },
                    "torus-curve" => CurveKind::TorusCurve {
                        major: required(e.parsed("manifold.major")?, "manifold.major")?,
                        minor: required(e.parsed("manifold.minor")?, "manifold.minor")?,
                        p: e.parsed("manifold.p")?.unwrap_or(1),
                        q: e.parsed("manifold.q")?.unwrap_or(1),
                    },
                    "swiss-roll-curve" => CurveKind::SwissRollCurve {
                        start: required(e.parsed("manifold.start")?, "manifold.start")?,
                        end: required(e.parsed("manifold.end")?, "manifold.end")?,
                        scale: e.parsed("manifold.scale")?.unwrap_or(1.0),
                    },
                    other => return Err(Error::Config(format!("unknown manifold.kind `{other}`"))),
                };
                Some(ManifoldSpec {
                    kind: curve,
                    ambient_dim: required(
                        e.parsed("manifold.ambient_dim")?,
                        "manifold.ambient_dim",
                    )?,
                    rotation_seed: e.parsed("manifold.rotation_seed")?,
                    profile: CurveProfile {
                        center: e.parsed("manifold.profile.center")?.unwrap_or(0.5),
                        height: e.parsed("manifold.profile.height")?.unwrap_or(1.0),
                        slope: e.parsed("manifold.profile.slope")?.unwrap_or(1.0),
                    },
                })
            }
        };

        let probe_resolution = e.parsed("probes.resolution")?.unwrap_or(513);
        let probe_count = e.parsed("probes.count")?.unwrap_or(4096);
        let levelset = LevelSetOptions {
            lambda: e.parsed("levelset.lambda")?,
            epsilon: e.parsed("levelset.epsilon")?,
            grid: e.parsed("levelset.grid")?.unwrap_or(4097),
        };
        let setcount = SetCountOptions {
            k: e.list("setcount.k")?.unwrap_or_else(|| vec![1]),
            grid: e.parsed("setcount.grid")?.unwrap_or(200),
        };
        let timing = e.parsed("output.timing")?.unwrap_or(false);
        e.finish()?;

        let cfg = Self {
            experiment,
            master_seed,
            delta,
            seeds,
            ladder,
            k_rule,
            density,
            noise,
            field_kind,
            field,
            manifold,
            probe_resolution,
            probe_count,
            levelset,
            setcount,
            timing,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Structural checks that do not depend on the experiment kind.
    pub fn validate(&self) -> Result<()> {
        if self.ladder.is_empty() {
            return Err(Error::Config("n.ladder is empty".to_string()));
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "n.ladder must be strictly increasing".to_string(),
            ));
        }
        if self.ladder[0] == 0 {
            return Err(Error::Config(
                "n.ladder entries must be positive".to_string(),
            ));
        }
        if self.ladder.iter().any(|&n| n > u32::MAX as usize) {
            return Err(Error::Config(
                "n.ladder entries must fit in 32 bits".to_string(),
            ));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be at least 1".to_string()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config("delta must lie in (0, 1)".to_string()));
        }
        match &self.k_rule {
            KRule::Fixed(ks) if ks.is_empty() || ks.contains(&0) => {
                return Err(Error::Config("k.values must be positive".to_string()))
            }
            KRule::Power { exponent, factor } if !(*exponent >= 0.0 && *factor > 0.0) => {
                return Err(Error::Config(
                    "k.exponent must be nonnegative and k.factor positive".to_string(),
                ))
            }
            KRule::Optimal { factor, .. } if !(*factor > 0.0) => {
                return Err(Error::Config("k.factor must be positive".to_string()))
            }
            _ => {}
        }
        if self.setcount.k.is_empty() || self.setcount.k.contains(&0) {
            return Err(Error::Config("setcount.k must be positive".to_string()));
        }
        if self.probe_resolution < 2 || self.levelset.grid < 2 || self.setcount.grid < 2 {
            return Err(Error::Config(
                "grid resolutions need at least 2 points per axis".to_string(),
            ));
        }
        if self.probe_count == 0 {
            return Err(Error::Config("probes.count must be positive".to_string()));
        }
        self.density.validate()?;
        self.noise.validate()?;
        Ok(())
    }

    /// `k` values used at sample size `n`. `alpha` is the smoothness
    /// exponent for the optimal rule and `dim` the effective dimension.
    pub fn k_values(&self, n: usize, alpha: Option<f64>, dim: usize) -> Result<Vec<usize>> {
        let nf = n as f64;
        Ok(match &self.k_rule {
            KRule::Fixed(ks) => ks.clone(),
            KRule::Power { exponent, factor } => {
                // values within rounding of an integer are that integer, so
                // that 512^(2/3) gives 64 rather than 65
                let v = factor * nf.powf(*exponent);
                let k = if (v - v.round()).abs() <= 1e-9 * v.max(1.0) {
                    v.round()
                } else {
                    v.ceil()
                };
                vec![(k as usize).clamp(1, n)]
            }
            KRule::Optimal { mode, factor } => {
                let a = match mode {
                    KMode::Maxima => 0.0,
                    _ => alpha.ok_or(Error::MissingParameter(
                        "field smoothness for k.rule = optimal",
                    ))?,
                };
                let e = crate::bounds::optimal_k_exponent(a, dim, *mode);
                vec![((factor * nf.powf(e)).round() as usize).clamp(1, n)]
            }
        })
    }
}
