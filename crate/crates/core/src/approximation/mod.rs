//! N-term thresholding, error curves and decay-rate fits.

pub mod fit;
pub mod wavelet;

use std::cmp::Ordering;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::transform::{dual_reconstruct_with, CoefficientSet, Preconditioner, ShearletTransform, SolverOptions};

pub use fit::{fit_rate, RateModel, RateReport};
pub use wavelet::{WaveletTransform, BASELINE_ORDER};

/// Positions of the `n` largest magnitudes; ties go to the earlier position.
pub fn top_positions(values: &[f64], n: usize) -> Vec<usize> {
    let n = n.min(values.len());
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let cmp = |a: &usize, b: &usize| {
        values[*b]
            .abs()
            .partial_cmp(&values[*a].abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    };
    if n > 0 && n < idx.len() {
        idx.select_nth_unstable_by(n - 1, cmp);
    }
    idx.truncate(n);
    idx.sort_unstable();
    idx
}

/// Keeps the `n` largest-magnitude entries, ties broken by canonical index
/// order.
pub fn threshold_values(values: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for i in top_positions(values, n) {
        out[i] = values[i];
    }
    out
}

pub fn threshold_top_n(coeffs: &CoefficientSet, n: usize) -> Result<CoefficientSet> {
    if n > coeffs.len() {
        return Err(Error::InvalidArgument(format!(
            "N = {n} exceeds the {} coefficients",
            coeffs.len()
        )));
    }
    CoefficientSet::from_values(coeffs.system().clone(), threshold_values(coeffs.values(), n))
}

/// Squared magnitudes sorted in decreasing order.
pub fn sorted_energies(values: &[f64]) -> Vec<f64> {
    let mut e: Vec<f64> = values.iter().map(|v| v * v).collect();
    e.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    e
}

/// `sum_{i > N} |theta|_i^2` for each requested `N`.
pub fn tail_energies(values: &[f64], ns: &[usize]) -> Vec<f64> {
    let e = sorted_energies(values);
    // suffix sums from the small end
    let mut suffix = vec![0.0; e.len() + 1];
    for i in (0..e.len()).rev() {
        suffix[i] = suffix[i + 1] + e[i];
    }
    ns.iter().map(|&n| suffix[n.min(e.len())]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub n: usize,
    pub squared_error: f64,
    pub iterations: usize,
    pub wall_ms: f64,
    /// Coefficient tail `sum_{i > N} |theta|_i^2`.
    pub tail_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorCurve {
    pub points: Vec<CurvePoint>,
    pub config_hash: u64,
}

impl ErrorCurve {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.n as f64, p.squared_error)).collect()
    }

    /// Largest increase `e(N') - e(N)` for `N' > N`, relative to `e(N)`.
    pub fn worst_increase(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                if q.squared_error > p.squared_error {
                    worst = worst.max((q.squared_error - p.squared_error) / p.squared_error.max(f64::MIN_POSITIVE));
                }
            }
        }
        worst
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.worst_increase() <= slack
    }

    /// CSV with header `N,squared_error,reconstruction_iters,wall_ms`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,squared_error,reconstruction_iters,wall_ms\n");
        for p in &self.points {
            s.push_str(&format!("{},{:e},{},{}\n", p.n, p.squared_error, p.iterations, p.wall_ms));
        }
        s
    }
}

fn check_ascending(ns: &[usize]) -> Result<()> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("N values must be strictly ascending".into()));
    }
    Ok(())
}

/// Squared `L2([0,1]^2)` distance of two grids read as piecewise constant.
pub fn squared_l2_error(a: &Grid, b: &Grid) -> f64 {
    let n = a.n();
    let s: f64 = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    s / (n * n) as f64
}

/// Options of an N-term run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NTermOptions {
    pub solver: SolverOptions,
    /// Record wall-clock times; off by default since they are not
    /// reproducible.
    pub timing: bool,
}

impl Default for NTermOptions {
    fn default() -> Self {
        NTermOptions {
            solver: SolverOptions::default(),
            timing: false,
        }
    }
}

/// N-term errors of the canonical dual reconstruction against the grid
/// that was analyzed. `N` values are processed in ascending order, each
/// solve warm-started from the previous reconstruction.
pub fn nterm_error_curve(
    grid: &Grid,
    t: &ShearletTransform,
    pre: &dyn Preconditioner,
    ns: &[usize],
    opts: NTermOptions,
) -> Result<ErrorCurve> {
    check_ascending(ns)?;
    let coeffs = t.analyze(grid)?;
    nterm_error_curve_from(grid, &coeffs, t, pre, ns, opts)
}

/// As [`nterm_error_curve`], with coefficients already computed.
pub fn nterm_error_curve_from(
    grid: &Grid,
    coeffs: &CoefficientSet,
    t: &ShearletTransform,
    pre: &dyn Preconditioner,
    ns: &[usize],
    opts: NTermOptions,
) -> Result<ErrorCurve> {
    check_ascending(ns)?;
    let tails = tail_energies(coeffs.values(), ns);
    let mut warm: Option<Grid> = None;
    let mut points = Vec::with_capacity(ns.len());
    for (&n, tail) in ns.iter().zip(tails) {
        let start = Instant::now();
        let kept = threshold_top_n(coeffs, n)?;
        let rec = dual_reconstruct_with(t, pre, &kept, warm.as_ref(), opts.solver)?;
        if !rec.converged {
            return Err(Error::MaxIterExceeded {
                iterations: rec.iterations,
                residual: rec.residual,
                context: Some(format!("N = {n}")),
            });
        }
        let squared_error = squared_l2_error(&rec.grid, grid);
        points.push(CurvePoint {
            n,
            squared_error,
            iterations: rec.iterations,
            wall_ms: if opts.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
            tail_energy: tail,
        });
        warm = Some(rec.grid);
    }
    Ok(ErrorCurve { points, config_hash: 0 })
}

/// N-term errors of the orthonormal wavelet basis: keep the largest
/// wavelet coefficients and invert exactly.
pub fn wavelet_baseline(grid: &Grid, w: &WaveletTransform, ns: &[usize], timing: bool) -> Result<ErrorCurve> {
    check_ascending(ns)?;
    if w.n() != grid.n() {
        return Err(Error::InvalidArgument("wavelet transform size differs from the grid".into()));
    }
    let c = w.forward(grid);
    let tails = tail_energies(&c, ns);
    let mut points = Vec::with_capacity(ns.len());
    for (&n, tail) in ns.iter().zip(tails) {
        if n > c.len() {
            return Err(Error::InvalidArgument(format!("N = {n} exceeds {} coefficients", c.len())));
        }
        let start = Instant::now();
        let rec = w.inverse(&threshold_values(&c, n))?;
        points.push(CurvePoint {
            n,
            squared_error: squared_l2_error(&rec, grid),
            iterations: 0,
            wall_ms: if timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
            tail_energy: tail,
        });
    }
    Ok(ErrorCurve { points, config_hash: 0 })
}

/// `2^lo, 2^(lo+1/steps), ..., 2^hi` rounded to integers, deduplicated.
pub fn log_spaced(lo: f64, hi: f64, steps_per_octave: usize) -> Vec<usize> {
    let count = ((hi - lo) * steps_per_octave as f64).round() as usize;
    let mut out: Vec<usize> = (0..=count)
        .map(|i| (lo + i as f64 / steps_per_octave as f64).exp2().round() as usize)
        .collect();
    out.dedup();
    out
}
