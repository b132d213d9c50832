//! Empirical convergence rates from a sweep's `results.csv`.
//!
//! The fitted slope is informative only: nothing in the theory predicts a
//! rate, so it is never compared against a threshold.

use std::collections::BTreeMap;
use std::io::Read;

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    /// Slope of `log gap` against `log ε`.
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
    pub points: usize,
    /// Points dropped because the gap was zero or negative.
    pub excluded: usize,
}

/// Least-squares fit of `log gap = slope·log ε + c`. Needs three positive
/// gaps.
pub fn fit_rate(eps: &[f64], gap: &[f64]) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(gap)
        .filter(|(e, g)| **e > 0.0 && **g > 0.0)
        .map(|(e, g)| (e.ln(), g.ln()))
        .collect();
    let excluded = eps.len().min(gap.len()) - pts.len();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Some(RateFit {
        slope,
        intercept,
        residual,
        points: pts.len(),
        excluded,
    })
}

/// Series key: family, time, probe and order.
pub type SeriesKey = (String, String, String, String);

#[derive(Clone, Debug)]
pub struct RateRow {
    pub key: SeriesKey,
    pub fit: Option<RateFit>,
    pub total: usize,
}

/// Groups rows by `(family, t, probe_id, k_or_p)` and fits each series.
pub fn rate_table<R: Read>(input: R, column: &str) -> Result<Vec<RateRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Validation(format!("results file has no column `{name}`")))
    };
    let (fam, eps_c, t_c, probe_c, k_c, val_c) = (
        col("family")?,
        col("eps")?,
        col("t")?,
        col("probe_id")?,
        col("k_or_p")?,
        col(column)?,
    );
    let mut series: BTreeMap<SeriesKey, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|_| HarnessError::Validation(format!("`{}` is not a number", &rec[i])))
        };
        let key = (
            rec[fam].to_string(),
            rec[t_c].to_string(),
            rec[probe_c].to_string(),
            rec[k_c].to_string(),
        );
        let entry = series.entry(key).or_default();
        entry.0.push(parse(eps_c)?);
        entry.1.push(parse(val_c)?.abs());
    }
    Ok(series
        .into_iter()
        .map(|(key, (e, g))| RateRow {
            fit: fit_rate(&e, &g),
            total: e.len(),
            key,
        })
        .collect())
}
