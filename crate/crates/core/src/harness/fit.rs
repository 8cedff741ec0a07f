//! Log-log rate fits over per-rung medians.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::harness::record::{format_g17, ExperimentRecord};

pub const FIT_HEADER: &str = "experiment,quantity,rungs,slope,intercept,slope_stderr,residual_rms";

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub experiment: String,
    pub quantity: String,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub residual_rms: f64,
    /// `(n, median)` per rung, increasing in `n`.
    pub medians: Vec<(usize, f64)>,
}

impl RateFit {
    pub fn rungs(&self) -> usize {
        self.medians.len()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.experiment,
            self.quantity,
            self.rungs(),
            format_g17(self.slope),
            format_g17(self.intercept),
            format_g17(self.slope_stderr),
            format_g17(self.residual_rms)
        )
    }
}

/// Median of a nonempty slice (mean of the middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Ordinary least squares of `y` on `x`: `(slope, intercept, slope_stderr, residual_rms)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let stderr = if x.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, intercept, stderr, (sse / n).sqrt())
}

/// Fits `log(median quantity)` against `log n` over the records carrying
/// `quantity`. Non-finite values are skipped.
pub fn fit_rate(records: &[ExperimentRecord], quantity: &str) -> Result<RateFit> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut experiment = None;
    for r in records.iter().filter(|r| r.quantity == quantity) {
        if r.value.is_finite() {
            by_n.entry(r.n).or_default().push(r.value);
            experiment.get_or_insert_with(|| r.experiment.clone());
        }
    }
    if by_n.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "`{quantity}` has {} rungs, need at least 4",
            by_n.len()
        )));
    }
    let medians: Vec<(usize, f64)> = by_n.iter().map(|(&n, v)| (n, median(v))).collect();
    if let Some(&(n, m)) = medians.iter().find(|(_, m)| !(*m > 0.0)) {
        return Err(Error::DegenerateFit(format!(
            "median `{quantity}` at n = {n} is {m}, need positive medians"
        )));
    }
    let x: Vec<f64> = medians.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let y: Vec<f64> = medians.iter().map(|&(_, m)| m.ln()).collect();
    let (slope, intercept, slope_stderr, residual_rms) = ols(&x, &y);
    Ok(RateFit {
        experiment: experiment.unwrap_or_default(),
        quantity: quantity.to_string(),
        slope,
        intercept,
        slope_stderr,
        residual_rms,
        medians,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recs(f: impl Fn(f64) -> f64, ns: &[usize]) -> Vec<ExperimentRecord> {
        ns.iter()
            .flat_map(|&n| (0..3).map(move |s| (n, s)))
            .map(|(n, s)| ExperimentRecord {
                experiment: "regress".into(),
                n,
                k: 1,
                seed: s,
                quantity: "sup_error".into(),
                value: f(n as f64),
                bound: f64::NAN,
                valid_k: false,
                ms: None,
            })
            .collect()
    }

    #[test]
    fn exact_power_laws() {
        let ns = [512, 1024, 2048, 4096, 8192];
        let fit = fit_rate(&recs(|n| n.powf(-0.5), &ns), "sup_error").unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-10);
        assert!(fit.residual_rms < 1e-10);
        let fit = fit_rate(&recs(|n| 3.0 * n.powf(-1.0 / 3.0), &ns), "sup_error").unwrap();
        assert!((fit.slope + 1.0 / 3.0).abs() < 1e-10);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn degenerate_fits() {
        let few = recs(|n| 1.0 / n, &[1, 2, 3]);
        assert!(matches!(
            fit_rate(&few, "sup_error"),
            Err(Error::DegenerateFit(_))
        ));
        let zeros = recs(|_| 0.0, &[1, 2, 3, 4]);
        assert!(matches!(
            fit_rate(&zeros, "sup_error"),
            Err(Error::DegenerateFit(_))
        ));
        let other = recs(|n| 1.0 / n, &[1, 2, 3, 4]);
        assert!(fit_rate(&other, "hausdorff").is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
