//! Power-law fits to the degree distribution tail.
//!
//! The default fit is ordinary least squares on `(ln d, ln f_d)` over the
//! empirical pmf for `d >= dmin`. A discrete maximum-likelihood estimate is
//! available as an alternative.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Empirical degree pmf: `d -> (node count, f_d)` with `Σ f_d = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    points: BTreeMap<usize, (usize, f64)>,
    total: usize,
}

impl DegreeDistribution {
    pub fn from_histogram(hist: &BTreeMap<usize, usize>) -> Self {
        let total: usize = hist.values().sum();
        let points = hist
            .iter()
            .filter(|&(_, &c)| c > 0)
            .map(|(&d, &c)| (d, (c, c as f64 / total as f64)))
            .collect();
        DegreeDistribution { points, total }
    }

    pub fn from_degrees(degrees: &[usize]) -> Self {
        let mut hist = BTreeMap::new();
        for &d in degrees {
            *hist.entry(d).or_insert(0) += 1;
        }
        Self::from_histogram(&hist)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// `(d, count, f_d)` in ascending degree order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.points.iter().map(|(&d, &(c, f))| (d, c, f))
    }

    pub fn frequency(&self, d: usize) -> f64 {
        self.points.get(&d).map_or(0.0, |&(_, f)| f)
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.points.keys().next_back().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    LogLog,
    Mle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub method: FitMethod,
    /// Exponent of `f_d ∝ d^alpha` (negative for a decaying tail).
    pub alpha: f64,
    /// `ln f_d` at `d = 1` on the fitted line.
    pub intercept: f64,
    pub dmin: usize,
    /// Coefficient of determination of the log-log line; `None` for MLE.
    pub r_squared: Option<f64>,
    /// Degrees (log-log) or samples (MLE) used.
    pub n_tail: usize,
}

impl PowerLawFit {
    /// Fitted `f_d`.
    pub fn predict(&self, d: usize) -> f64 {
        (self.intercept + self.alpha * (d as f64).ln()).exp()
    }
}

/// Least-squares line through `(ln d, ln f_d)` for `d >= dmin`. Entries with
/// `f_d <= 0` are skipped.
pub fn fit_loglog_points(points: &[(usize, f64)], dmin: usize) -> Result<PowerLawFit> {
    let tail: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(d, f)| d >= dmin && d > 0 && f > 0.0)
        .map(|&(d, f)| ((d as f64).ln(), f.ln()))
        .collect();
    if tail.len() < 3 {
        return Err(Error::InsufficientTail {
            dmin,
            needed: 3,
            found: tail.len(),
        });
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &tail {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = tail
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(PowerLawFit {
        method: FitMethod::LogLog,
        alpha: slope,
        intercept,
        dmin,
        r_squared: Some(r_squared),
        n_tail: tail.len(),
    })
}

pub fn fit_loglog(dist: &DegreeDistribution, dmin: usize) -> Result<PowerLawFit> {
    let points: Vec<(usize, f64)> = dist.iter().map(|(d, _, f)| (d, f)).collect();
    fit_loglog_points(&points, dmin)
}

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (k + q)^-s` for `s > 1`, `q > 0`: the
/// first terms summed directly, the rest by Euler–Maclaurin.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    const DIRECT: usize = 20;
    let head: f64 = (0..DIRECT).map(|k| (q + k as f64).powf(-s)).sum();
    let a = q + DIRECT as f64;
    let t = a.powf(-s);
    let tail = a * t / (s - 1.0) + 0.5 * t + s / 12.0 * t / a - s * (s + 1.0) * (s + 2.0) / 720.0 * t / a.powi(3)
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30_240.0 * t / a.powi(5);
    head + tail
}

/// Discrete maximum-likelihood exponent for `P(d) = d^-a / ζ(a, dmin)` over
/// samples `d_i >= dmin`.
///
/// The log-likelihood is concave in `a`, so a golden-section search over
/// `(1, 50]` finds the maximum. The intercept places the fitted pmf, scaled
/// by the fraction of samples in the tail, on the same axes as `f_d`.
pub fn fit_mle(degrees: &[usize], dmin: usize) -> Result<PowerLawFit> {
    const MIN_SAMPLES: usize = 10;
    if dmin == 0 {
        return Err(Error::Config("dmin must be at least 1".into()));
    }
    let tail: Vec<usize> = degrees.iter().copied().filter(|&d| d >= dmin).collect();
    if tail.len() < MIN_SAMPLES {
        return Err(Error::InsufficientTail {
            dmin,
            needed: MIN_SAMPLES,
            found: tail.len(),
        });
    }
    if tail.iter().all(|&d| d == tail[0]) {
        return Err(Error::DegenerateTail(tail[0]));
    }
    let n = tail.len() as f64;
    let mean_ln = tail.iter().map(|&d| (d as f64).ln()).sum::<f64>() / n;
    let q = dmin as f64;
    let loglik = |a: f64| -a * mean_ln - hurwitz_zeta(a, q).ln();

    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1.0 + 1e-9, 50.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (loglik(x1), loglik(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = loglik(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = loglik(x1);
        }
    }
    let exponent = 0.5 * (lo + hi);
    let tail_fraction = n / degrees.len() as f64;
    Ok(PowerLawFit {
        method: FitMethod::Mle,
        alpha: -exponent,
        intercept: tail_fraction.ln() - hurwitz_zeta(exponent, q).ln(),
        dmin,
        r_squared: None,
        n_tail: tail.len(),
    })
}
