//! Empirical checks of coefficient decay near edges, weighted Bessel sums
//! of smooth functions and counts of significant coefficients.

pub mod probe;

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::approximation::{fit_rate, tail_energies, RateModel, RateReport};
use crate::cartoon::{CartoonImage, RadiusProfile, SmoothPatch};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::shearlet::{Cone, ShearletSystem, Slab};
use crate::transform::{CoefficientSet, ShearletTransform};

pub use probe::{boundary_samples, boundary_slopes, dyadic_cube, EdgeProbe, Rect, BOUNDARY_SAMPLES, DEFAULT_PADDING};

/// Which decay estimate a table is normalized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `|c| <= C 2^(-3j/4) / |k + 2^(j/2) s|^3`, for `|s| <= 3`.
    Moderate,
    /// `|c| <= C 2^(-9j/4)`, for `|s| > 3/2` or a horizontal tangent.
    Steep,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Moderate => "moderate",
            Regime::Steep => "steep",
        }
    }

    pub fn admits(self, probe: &EdgeProbe) -> bool {
        self.admits_slope(probe.slope.magnitude())
    }

    /// Whether an edge piece with tangent slope magnitude `s` is in the
    /// regime.
    pub fn admits_slope(self, s: f64) -> bool {
        match self {
            Regime::Moderate => s <= 3.0,
            Regime::Steep => s > 1.5,
        }
    }

    fn ratio(self, probe: &EdgeProbe, j: u32, k: i32, c: f64) -> f64 {
        let j = j as f64;
        match self {
            Regime::Moderate => c * probe.shear_offset(j as u32, k).powi(3) * (0.75 * j).exp2(),
            Regime::Steep => c * (2.25 * j).exp2(),
        }
    }
}

/// Rasterizes and analyzes an image.
pub fn analyze_image(f: &CartoonImage, t: &ShearletTransform, oversample: usize) -> Result<CoefficientSet> {
    t.analyze(&f.rasterize(t.n(), oversample)?)
}

/// Area-sampled raster of a smooth patch.
pub fn rasterize_patch(g: &SmoothPatch, n: usize, oversample: usize) -> Result<Grid> {
    if n == 0 || !n.is_power_of_two() || oversample == 0 {
        return Err(Error::InvalidArgument(format!("bad raster size {n} x {oversample}")));
    }
    let inv = 1.0 / (n * oversample) as f64;
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i2, row)| {
        for (i1, px) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for s2 in 0..oversample {
                let y = ((i2 * oversample + s2) as f64 + 0.5) * inv;
                for s1 in 0..oversample {
                    acc += g.value([((i1 * oversample + s1) as f64 + 0.5) * inv, y]);
                }
            }
            *px = acc / (oversample * oversample) as f64;
        }
    });
    Grid::from_vec(n, data)
}

/// Lattice points `(a, b)` of a horizontal slab whose support box meets the
/// cube and holds a boundary sample of the window in its interior.
fn edge_translates(sys: &ShearletSystem, slab: &Slab, samples: &[[f64; 2]], cube: &Rect) -> BTreeSet<(i64, i64)> {
    let (lo, hi) = sys.relative_support(slab.cone, slab.j, slab.k);
    let (s1, s2) = sys.steps(slab.cone, slab.j);
    let r = sys.atom_resolution() as f64;
    let support = |a: i64, b: i64| {
        let x = [sys.snap(s1, a) as f64 / r, sys.snap(s2, b) as f64 / r];
        Rect {
            lo: [x[0] + lo[0], x[1] + lo[1]],
            hi: [x[0] + hi[0], x[1] + hi[1]],
        }
    };
    let mut out = BTreeSet::new();
    for x in samples {
        let a0 = (((x[0] - hi[0]) / s1).floor() as i64 - 1).max(slab.a_lo);
        let a1 = (((x[0] - lo[0]) / s1).ceil() as i64 + 1).min(slab.a_hi);
        let b0 = (((x[1] - hi[1]) / s2).floor() as i64 - 1).max(slab.b_lo);
        let b1 = (((x[1] - lo[1]) / s2).ceil() as i64 + 1).min(slab.b_hi);
        for b in b0..=b1 {
            for a in a0..=a1 {
                let s = support(a, b);
                if s.contains_open(*x) && s.overlaps(cube) {
                    out.insert((a, b));
                }
            }
        }
    }
    out
}

fn slab_value(coeffs: &CoefficientSet, slab: &Slab, a: i64, b: i64) -> f64 {
    coeffs.values()[slab.offset + (b - slab.b_lo) as usize * slab.na() + (a - slab.a_lo) as usize]
}

/// Horizontal-cone shearlets meeting the probe's edge, per `(j, k)`.
/// With a regime, only boundary samples whose own tangent slope lies in the
/// regime count as edge.
fn probe_sets(
    coeffs: &CoefficientSet,
    probe: &EdgeProbe,
    regime: Option<Regime>,
    js: &RangeInclusive<u32>,
) -> Result<Vec<(Slab, BTreeSet<(i64, i64)>)>> {
    let sys = coeffs.system();
    if *js.end() > sys.j_max() || js.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "scale range {js:?} outside 0..={}",
            sys.j_max()
        )));
    }
    let samples: Vec<[f64; 2]> = boundary_samples(&probe.boundary, BOUNDARY_SAMPLES)
        .into_iter()
        .zip(boundary_slopes(&probe.boundary, BOUNDARY_SAMPLES))
        .filter(|(_, s)| regime.map_or(true, |r| r.admits_slope(*s)))
        .map(|(x, _)| x)
        .collect();
    let slabs: Vec<Slab> = sys
        .slabs()
        .iter()
        .filter(|s| s.cone == Cone::Horizontal && js.contains(&s.j))
        .cloned()
        .collect();
    let sets: Vec<(Slab, BTreeSet<(i64, i64)>)> = slabs
        .into_par_iter()
        .map(|s| {
            let window = probe.window(s.j);
            let local: Vec<[f64; 2]> = samples.iter().copied().filter(|x| window.contains_open(*x)).collect();
            let set = edge_translates(sys, &s, &local, &probe.cube(s.j));
            (s, set)
        })
        .collect();
    if sets.iter().all(|(_, s)| s.is_empty()) {
        return Err(Error::NoIntersectingShearlets(format!(
            "probe at theta = {} over scales {js:?}",
            probe.theta
        )));
    }
    Ok(sets)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub j: u32,
    pub k: i32,
    /// Translates meeting the cube and the edge.
    pub translates: usize,
    pub max_abs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayTable {
    pub regime: Regime,
    pub rows: Vec<DecayRow>,
    /// Largest ratio at each scale.
    pub per_scale: Vec<(u32, f64)>,
}

impl DecayTable {
    /// `max / min` of the per-scale maxima over the last `top` scales.
    pub fn spread(&self, top: usize) -> f64 {
        let tail = &self.per_scale[self.per_scale.len().saturating_sub(top)..];
        let hi = tail.iter().fold(0.0f64, |m, r| m.max(r.1));
        let lo = tail.iter().fold(f64::INFINITY, |m, r| m.min(r.1));
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }

    /// Ratio at the last scale over the first of the last `top` scales.
    pub fn growth(&self, top: usize) -> f64 {
        let tail = &self.per_scale[self.per_scale.len().saturating_sub(top)..];
        match (tail.first(), tail.last()) {
            (Some(a), Some(b)) if a.1 > 0.0 => b.1 / a.1,
            _ => 1.0,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("regime,j,k,translates,max_abs,ratio\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{:e},{:e}\n",
                self.regime.name(),
                r.j,
                r.k,
                r.translates,
                r.max_abs,
                r.ratio
            ));
        }
        s
    }
}

/// Decay table of the coefficients of shearlets meeting the probe's edge.
pub fn edge_decay_table(
    coeffs: &CoefficientSet,
    probe: &EdgeProbe,
    regime: Regime,
    js: RangeInclusive<u32>,
) -> Result<DecayTable> {
    if !regime.admits(probe) {
        return Err(Error::InvalidArgument(format!(
            "slope {:?} outside the {} regime",
            probe.slope,
            regime.name()
        )));
    }
    let sets = probe_sets(coeffs, probe, Some(regime), &js)?;
    let mut rows = vec![];
    for (slab, set) in &sets {
        if set.is_empty() {
            continue;
        }
        let max_abs = set
            .iter()
            .fold(0.0f64, |m, &(a, b)| m.max(slab_value(coeffs, slab, a, b).abs()));
        rows.push(DecayRow {
            j: slab.j,
            k: slab.k,
            translates: set.len(),
            max_abs,
            ratio: regime.ratio(probe, slab.j, slab.k, max_abs),
        });
    }
    let mut per_scale: Vec<(u32, f64)> = vec![];
    for r in &rows {
        match per_scale.last_mut() {
            Some(last) if last.0 == r.j => last.1 = last.1.max(r.ratio),
            _ => per_scale.push((r.j, r.ratio)),
        }
    }
    Ok(DecayTable { regime, rows, per_scale })
}

pub fn edge_coefficient_decay(
    f: &CartoonImage,
    t: &ShearletTransform,
    oversample: usize,
    probe: &EdgeProbe,
    regime: Regime,
    js: RangeInclusive<u32>,
) -> Result<DecayTable> {
    edge_decay_table(&analyze_image(f, t, oversample)?, probe, regime, js)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeRow {
    pub j: u32,
    pub k: i32,
    pub translates: usize,
    pub significant: usize,
    /// `translates / (|k + 2^(j/2) s| + 1)`; `None` for a horizontal tangent.
    pub geometric_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeScale {
    pub j: u32,
    pub significant: usize,
    /// `(eps^(-1/3) 2^(-j/4) + 1)^2`
    pub fine_bound: f64,
    /// `2^j`
    pub crude_bound: f64,
    /// `max / min` of the geometric ratios over `k`.
    pub geometric_spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeReport {
    pub epsilon: f64,
    pub rows: Vec<CubeRow>,
    pub scales: Vec<CubeScale>,
}

impl CubeReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,k,translates,significant,geometric_ratio\n");
        for r in &self.rows {
            let g = r.geometric_ratio.map(|v| format!("{v:e}")).unwrap_or_default();
            s.push_str(&format!("{},{},{},{},{}\n", r.j, r.k, r.translates, r.significant, g));
        }
        s
    }
}

/// Divides coefficients by `||psi||_1` of the scaled generator, so every
/// `|c|` is at most `||f||_inf 2^(-3j/4)`.
pub fn l1_normalizer(sys: &ShearletSystem) -> f64 {
    sys.config.unit * sys.spec.psi_norm_l1()
}

/// Intersecting and significant shearlets per `(j, k)` in the probe cube.
pub fn per_cube_count(
    coeffs: &CoefficientSet,
    probe: &EdgeProbe,
    epsilon: f64,
    js: RangeInclusive<u32>,
) -> Result<CubeReport> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon}")));
    }
    let norm = l1_normalizer(coeffs.system());
    let sets = probe_sets(coeffs, probe, None, &js)?;
    let mut rows = vec![];
    for (slab, set) in &sets {
        if set.is_empty() {
            continue;
        }
        let significant = set
            .iter()
            .filter(|&&(a, b)| slab_value(coeffs, slab, a, b).abs() / norm > epsilon)
            .count();
        let off = probe.shear_offset(slab.j, slab.k);
        rows.push(CubeRow {
            j: slab.j,
            k: slab.k,
            translates: set.len(),
            significant,
            geometric_ratio: off.is_finite().then(|| set.len() as f64 / (off + 1.0)),
        });
    }
    let mut scales = vec![];
    for j in js {
        let at: Vec<&CubeRow> = rows.iter().filter(|r| r.j == j).collect();
        if at.is_empty() {
            continue;
        }
        let ratios: Vec<f64> = at.iter().filter_map(|r| r.geometric_ratio).collect();
        let spread = (!ratios.is_empty()).then(|| {
            ratios.iter().fold(0.0f64, |m, v| m.max(*v)) / ratios.iter().fold(f64::INFINITY, |m, v| m.min(*v))
        });
        scales.push(CubeScale {
            j,
            significant: at.iter().map(|r| r.significant).sum(),
            fine_bound: (epsilon.powf(-1.0 / 3.0) * (-(j as f64) / 4.0).exp2() + 1.0).powi(2),
            crude_bound: (j as f64).exp2(),
            geometric_spread: spread,
        });
    }
    Ok(CubeReport { epsilon, rows, scales })
}

/// Number of cubes `Q_{j,p}` meeting `[0,1]^2` whose interior holds a
/// boundary sample, per scale, with the count divided by `2^(j/2)`.
pub fn edge_cube_counts(boundary: &RadiusProfile, js: RangeInclusive<u32>) -> Vec<(u32, usize, f64)> {
    let samples = boundary_samples(boundary, BOUNDARY_SAMPLES);
    js.map(|j| {
        let s = (j as f64 / 2.0).exp2();
        let mut cubes = BTreeSet::new();
        for x in &samples {
            let (u, v) = (x[0] * s, x[1] * s);
            for p0 in (u - 1.0).floor() as i64..=(u + 1.0).ceil() as i64 {
                for p1 in (v - 1.0).floor() as i64..=(v + 1.0).ceil() as i64 {
                    if dyadic_cube(j, [p0, p1]).contains_open(*x) {
                        cubes.insert((p0, p1));
                    }
                }
            }
        }
        (j, cubes.len(), cubes.len() as f64 / s)
    })
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BesselReport {
    /// `(J, Sigma_J)` for `J = 0..=j_max`.
    pub partial_sums: Vec<(u32, f64)>,
    /// `||d^2 g / dx1^2||_2^2`.
    pub denominator: f64,
    /// `Sigma_J / denominator`.
    pub ratios: Vec<f64>,
}

impl BesselReport {
    /// `(Sigma_J - Sigma_{J-1}) / Sigma_{J-1}` at the last scale.
    pub fn final_increment(&self) -> f64 {
        let n = self.partial_sums.len();
        if n < 2 || self.partial_sums[n - 2].1 == 0.0 {
            return 0.0;
        }
        (self.partial_sums[n - 1].1 - self.partial_sums[n - 2].1) / self.partial_sums[n - 2].1
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("J,partial_sum,ratio\n");
        for ((j, p), r) in self.partial_sums.iter().zip(&self.ratios) {
            s.push_str(&format!("{j},{p:e},{r:e}\n"));
        }
        s
    }
}

/// Samples per axis of the midpoint rule for `||d^2 g / dx1^2||^2`.
pub const QUADRATURE_SAMPLES: usize = 1024;

pub fn second_derivative_energy(g: &SmoothPatch) -> f64 {
    let q = QUADRATURE_SAMPLES;
    let h = 1.0 / q as f64;
    let rows: Vec<f64> = (0..q)
        .into_par_iter()
        .map(|i2| {
            let y = (i2 as f64 + 0.5) * h;
            (0..q)
                .map(|i1| g.jet([(i1 as f64 + 0.5) * h, y]).hess[0].powi(2))
                .sum::<f64>()
        })
        .collect();
    rows.iter().sum::<f64>() * h * h
}

/// Weighted partial sums `sum_{j <= J} sum_{k, m} 2^(4j) |<g, psi>|^2` over
/// the horizontal cone.
pub fn bessel_sums(coeffs: &CoefficientSet, g: &SmoothPatch) -> BesselReport {
    let sys = coeffs.system();
    let mut per_j = vec![0.0; sys.j_max() as usize + 1];
    for (i, s) in sys.slabs().iter().enumerate() {
        if s.cone == Cone::Horizontal {
            let e: f64 = coeffs.slab(i).iter().map(|v| v * v).sum();
            per_j[s.j as usize] += (4.0 * s.j as f64).exp2() * e;
        }
    }
    let denominator = second_derivative_energy(g);
    let mut acc = 0.0;
    let mut partial_sums = vec![];
    for (j, e) in per_j.iter().enumerate() {
        acc += e;
        partial_sums.push((j as u32, acc));
    }
    let ratios = partial_sums
        .iter()
        .map(|(_, p)| if denominator > 0.0 { p / denominator } else { 0.0 })
        .collect();
    BesselReport {
        partial_sums,
        denominator,
        ratios,
    }
}

pub fn smooth_bessel_check(g: &SmoothPatch, t: &ShearletTransform, oversample: usize) -> Result<BesselReport> {
    let coeffs = t.analyze(&rasterize_patch(g, t.n(), oversample)?)?;
    Ok(bessel_sums(&coeffs, g))
}

/// Coefficient tails `sum_{i > N} |theta|_i^2` and their pure-power fit.
pub fn tail_rate(values: &[f64], ns: &[usize], range: Option<(f64, f64)>) -> Result<(Vec<f64>, RateReport)> {
    let tails = tail_energies(values, ns);
    let pts: Vec<(f64, f64)> = ns.iter().zip(&tails).map(|(n, t)| (*n as f64, *t)).collect();
    let report = fit_rate(&pts, RateModel::PurePower, None, range)?;
    Ok((tails, report))
}

pub fn smooth_part_rate(
    g: &SmoothPatch,
    t: &ShearletTransform,
    oversample: usize,
    ns: &[usize],
    range: Option<(f64, f64)>,
) -> Result<(Vec<f64>, RateReport)> {
    let coeffs = t.analyze(&rasterize_patch(g, t.n(), oversample)?)?;
    tail_rate(coeffs.values(), ns, range)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountReport {
    pub epsilons: Vec<f64>,
    pub counts: Vec<usize>,
    /// Significant coefficients above the scale cutoff `(4/3) log2(1/eps)`.
    pub beyond_cutoff: Vec<usize>,
    /// Pure-power exponent of the count against `1/eps`.
    pub exponent: Option<f64>,
    /// Exponent with the `log(1/eps)` factor fixed at power one.
    pub corrected_exponent: Option<f64>,
    /// Free power of `log(1/eps)` in the three-parameter fit.
    pub log_coefficient: Option<f64>,
}

impl CountReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,count,beyond_cutoff\n");
        for ((e, c), b) in self.epsilons.iter().zip(&self.counts).zip(&self.beyond_cutoff) {
            s.push_str(&format!("{e:e},{c},{b}\n"));
        }
        s
    }
}

/// Counts `|c| / ||psi||_1 > eps` for descending `eps`.
pub fn significant_count(coeffs: &CoefficientSet, epsilons: &[f64]) -> Result<CountReport> {
    if epsilons.iter().any(|e| !(*e > 0.0)) || epsilons.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidArgument("epsilons must be positive and strictly descending".into()));
    }
    let sys = coeffs.system();
    let norm = l1_normalizer(sys);
    let mut per_j: Vec<Vec<f64>> = vec![vec![]; sys.j_max() as usize + 1];
    for (i, s) in sys.slabs().iter().enumerate() {
        per_j[s.j as usize].extend(coeffs.slab(i).iter().map(|v| v.abs() / norm));
    }
    for v in &mut per_j {
        v.sort_unstable_by(|a, b| a.total_cmp(b));
    }
    let above = |v: &[f64], e: f64| v.len() - v.partition_point(|x| *x <= e);
    let mut counts = vec![];
    let mut beyond = vec![];
    for &e in epsilons {
        let cutoff = 4.0 / 3.0 * (1.0 / e).log2();
        counts.push(per_j.iter().map(|v| above(v, e)).sum());
        beyond.push(
            per_j
                .iter()
                .enumerate()
                .filter(|(j, _)| *j as f64 > cutoff)
                .map(|(_, v)| above(v, e))
                .sum(),
        );
    }
    let pts: Vec<(f64, f64)> = epsilons
        .iter()
        .zip(&counts)
        .filter(|(e, c)| **c > 0 && **e < 1.0)
        .map(|(e, c)| (1.0 / e, *c as f64))
        .collect();
    let range = pts.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let fit = |model, fixed| fit_rate(&pts, model, fixed, Some(range)).ok();
    let pure = fit(RateModel::PurePower, None);
    let corrected = fit(RateModel::PowerWithLog, Some(1.0));
    let free = fit(RateModel::PowerWithLog, None);
    Ok(CountReport {
        epsilons: epsilons.to_vec(),
        counts,
        beyond_cutoff: beyond,
        exponent: pure.map(|r| -r.beta),
        corrected_exponent: corrected.map(|r| -r.beta),
        log_coefficient: free.map(|r| r.log_exponent),
    })
}

/// `count` values log-spaced from `hi` down to `lo`.
pub fn log_epsilons(hi: f64, lo: f64, count: usize) -> Vec<f64> {
    let (a, b) = (hi.ln(), lo.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests;
