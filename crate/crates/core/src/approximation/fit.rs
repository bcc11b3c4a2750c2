//! Log-domain least-squares fits of `e(N) ~ C N^-beta (log N)^gamma`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateModel {
    PurePower,
    PowerWithLog,
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateModel::PurePower => "pure-power",
            RateModel::PowerWithLog => "power-with-log",
        })
    }
}

impl FromStr for RateModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure-power" => Ok(RateModel::PurePower),
            "power-with-log" => Ok(RateModel::PowerWithLog),
            _ => Err(Error::InvalidArgument(format!("unknown rate model {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub model: RateModel,
    pub beta: f64,
    /// Exponent of `log N`; zero for the pure power.
    pub log_exponent: f64,
    pub log_exponent_fixed: bool,
    pub constant: f64,
    /// RMS of the log-domain residuals.
    pub residual: f64,
    pub fit_range: (f64, f64),
    pub points_used: usize,
}

impl RateReport {
    pub const CSV_HEADER: &'static str = "model,beta,log_exponent,log_exponent_fixed,constant,residual,n_min,n_max,points";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{},{:e},{:e},{},{},{}",
            self.model,
            self.beta,
            self.log_exponent,
            self.log_exponent_fixed,
            self.constant,
            self.residual,
            self.fit_range.0,
            self.fit_range.1,
            self.points_used
        )
    }
}

pub const MIN_POINTS: usize = 5;

/// Default fit window: drops the smallest `N` and the largest 10% of the
/// points.
pub fn default_range(ns: &[f64]) -> Option<(f64, f64)> {
    if ns.len() < 3 {
        return None;
    }
    let drop_top = (ns.len() as f64 * 0.1).ceil() as usize;
    let hi = ns.len().checked_sub(1 + drop_top)?;
    (hi >= 1).then(|| (ns[1], ns[hi]))
}

/// Fits `points = (N, e)` over `range` (inclusive), or the default window.
pub fn fit_rate(
    points: &[(f64, f64)],
    model: RateModel,
    fixed_log_exponent: Option<f64>,
    range: Option<(f64, f64)>,
) -> Result<RateReport> {
    let range = match range {
        Some(r) => r,
        None => {
            let ns: Vec<f64> = points.iter().map(|p| p.0).collect();
            default_range(&ns).ok_or_else(|| Error::DegenerateFit(format!("{} points are too few", points.len())))?
        }
    };
    let used: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(n, _)| *n >= range.0 && *n <= range.1)
        .collect();
    if used.len() < MIN_POINTS {
        return Err(Error::DegenerateFit(format!(
            "{} points in [{}, {}], at least {MIN_POINTS} required",
            used.len(),
            range.0,
            range.1
        )));
    }
    if let Some((n, e)) = used.iter().find(|(n, e)| !(*e > 0.0) || !e.is_finite() || !(*n > 1.0)) {
        return Err(Error::DegenerateFit(format!("non-positive value e({n}) = {e}")));
    }
    if used.iter().all(|p| p.1 == used[0].1) {
        return Err(Error::DegenerateFit("all errors are equal".into()));
    }
    let free_log = model == RateModel::PowerWithLog && fixed_log_exponent.is_none();
    let gamma_fixed = match model {
        RateModel::PurePower => 0.0,
        RateModel::PowerWithLog => fixed_log_exponent.unwrap_or(0.0),
    };
    let cols = if free_log { 3 } else { 2 };
    let m = used.len();
    let mut a = DMatrix::<f64>::zeros(m, cols);
    let mut b = DVector::<f64>::zeros(m);
    for (i, (n, e)) in used.iter().enumerate() {
        let ln = n.ln();
        a[(i, 0)] = 1.0;
        a[(i, 1)] = -ln;
        if free_log {
            a[(i, 2)] = ln.ln();
        }
        b[i] = e.ln() - gamma_fixed * ln.ln();
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-12 * smax {
        return Err(Error::DegenerateFit("design matrix is rank deficient".into()));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let r = &a * &x - &b;
    let residual = (r.norm_squared() / m as f64).sqrt();
    Ok(RateReport {
        model,
        beta: x[1],
        log_exponent: if free_log { x[2] } else { gamma_fixed },
        log_exponent_fixed: !free_log,
        constant: x[0].exp(),
        residual,
        fit_range: (used[0].0, used[m - 1].0),
        points_used: m,
    })
}
