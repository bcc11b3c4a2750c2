//! The six experiment kinds and the artifacts each one writes.

use std::path::PathBuf;
use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shearsparse_core::approximation::{
    fit_rate, log_spaced, nterm_error_curve_from, wavelet_baseline, ErrorCurve, NTermOptions, RateModel, RateReport,
    WaveletTransform, BASELINE_ORDER,
};
use shearsparse_core::cartoon::Slope;
use shearsparse_core::decay::{
    analyze_image, edge_cube_counts, edge_decay_table, log_epsilons, per_cube_count, rasterize_patch, significant_count,
    tail_rate, bessel_sums, EdgeProbe, Regime,
};
use shearsparse_core::shearlet::FilterFamily;
use shearsparse_core::transform::solver::estimate_frame_bounds_with;
use shearsparse_core::{CartoonImage, ShearletSystem, ShearletTransform, SmoothPatch, SolverOptions};
use shearsparse_core::transform::FourierPreconditioner;

use crate::config::{scene_name, ExperimentConfig, ExperimentKind, Scene};
use crate::error::{CliError, Result};
use crate::manifest::{content_hash, write_artifacts, Artifact, Manifest};
use crate::plot::{reference_slopes, Plot, Series};

/// Streams of the root seed.
pub const SEED_STREAM_BOUNDS: u64 = 1;

/// Counter-based derivation: stream `stream` of the ChaCha generator keyed
/// by the root seed.
pub fn derive_seed(root: u64, stream: u64) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(root);
    r.set_stream(stream);
    r.next_u64()
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
    /// Human-readable result lines.
    pub summary: Vec<String>,
}

/// Header of `experiment.csv`, the record `summarize` joins on.
pub const EXPERIMENT_HEADER: &str = "kind,image,system,n,J,unit,c,seed,config_hash";

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    image_name: String,
    config_hash: u64,
    artifacts: Vec<Artifact>,
    summary: Vec<String>,
}

impl Context<'_> {
    fn push(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.artifacts.push(Artifact::new(name, bytes));
    }

    fn system(&self) -> Result<Arc<ShearletSystem>> {
        let spec = self.cfg.generator_spec()?;
        Ok(Arc::new(ShearletSystem::new(Arc::new(spec), self.cfg.system_config())?))
    }

    fn transform(&self) -> Result<ShearletTransform> {
        Ok(ShearletTransform::new(self.system()?, self.cfg.n)?)
    }

    fn image(&self) -> Result<CartoonImage> {
        match self.cfg.scene()? {
            Scene::Image(i) => Ok(i),
            Scene::Patch(_) => Err(CliError::config("scene", "this experiment needs a cartoon image")),
        }
    }

    fn patch(&self) -> Result<SmoothPatch> {
        match self.cfg.scene()? {
            Scene::Patch(p) => Ok(p),
            Scene::Image(_) => Err(CliError::config("scene", "bessel needs an edge-free patch")),
        }
    }

    fn ns(&self, total: usize) -> Result<Vec<usize>> {
        let s = &self.cfg.sweep;
        let ns = log_spaced(s.lo, s.hi, s.steps_per_octave);
        if ns.last().is_some_and(|&n| n > total) {
            return Err(CliError::config(
                "sweep.hi",
                format!("largest N = {} exceeds the {total} available coefficients", ns.last().unwrap()),
            ));
        }
        Ok(ns)
    }

    fn label(&self, system: &str) -> String {
        format!("{},{}", self.image_name, system)
    }
}

pub fn system_label(cfg: &ExperimentConfig) -> Result<String> {
    let g = cfg.generator_config()?;
    let fam = match g.family {
        FilterFamily::Spline { order, moments } => format!("spline{order}m{moments}"),
        FilterFamily::Daubechies { order } => format!("db{order}"),
    };
    let sc = cfg.system_config();
    Ok(format!("{fam}-J{}-u{:e}-c{}", cfg.j_max, sc.unit, sc.c))
}

fn slope_text(s: Slope) -> String {
    match s {
        Slope::Finite(v) => format!("{v:e}"),
        Slope::Infinite => "inf".into(),
    }
}

fn rate_rows(prefix: &str, reports: &[RateReport]) -> String {
    let mut s = format!("image,system,{}\n", RateReport::CSV_HEADER);
    for r in reports {
        s.push_str(&format!("{prefix},{}\n", r.csv_row()));
    }
    s
}

/// Pure power, power with the configured log exponent, and the free fit
/// when it is well posed.
fn fit_all(curve: &[(f64, f64)], cfg: &ExperimentConfig) -> Result<Vec<RateReport>> {
    let range = cfg.sweep.fit;
    let mut out = vec![fit_rate(curve, RateModel::PurePower, None, range)?];
    out.push(fit_rate(curve, RateModel::PowerWithLog, Some(cfg.sweep.log_exponent), range)?);
    if let Ok(r) = fit_rate(curve, RateModel::PowerWithLog, None, range) {
        out.push(r);
    }
    Ok(out)
}

fn curve_plot(title: &str, label: &str, curve: &ErrorCurve, y_label: &str) -> String {
    let pts = curve.pairs();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut series = vec![Series::data(label, pts.clone())];
    if let Some(&a) = pts.iter().find(|p| p.1 > 0.0) {
        series.extend(reference_slopes(a, &xs));
    }
    Plot {
        title: title.into(),
        x_label: "N".into(),
        y_label: y_label.into(),
        log_x: true,
        series,
    }
    .to_svg()
}

/// Runs the configured experiment and writes its artifacts and manifest.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let canonical = cfg.canonical();
    let image_name = cfg.scene_path().as_deref().map(scene_name).unwrap_or_else(|| "-".into());
    let mut cx = Context {
        cfg,
        image_name,
        config_hash: content_hash(canonical.as_bytes()),
        artifacts: vec![],
        summary: vec![],
    };
    let system = match cfg.kind {
        ExperimentKind::BaselineCompare => format!("wavelet-db{BASELINE_ORDER}"),
        _ => system_label(cfg)?,
    };
    let unit = cfg.system_config().unit;
    cx.push("config.toml", canonical.clone());
    cx.push(
        "experiment.csv",
        format!(
            "{EXPERIMENT_HEADER}\n{},{},{},{},{},{:e},{},{},{:016x}\n",
            cfg.kind, cx.image_name, system, cfg.n, cfg.j_max, unit, cfg.c, cfg.seed, cx.config_hash
        ),
    );
    match cfg.kind {
        ExperimentKind::Nterm => nterm(&mut cx, &system)?,
        ExperimentKind::BaselineCompare => baseline(&mut cx, &system)?,
        ExperimentKind::EdgeDecay => edge_decay(&mut cx)?,
        ExperimentKind::Bessel => bessel(&mut cx, &system)?,
        ExperimentKind::Counting => counting(&mut cx)?,
        ExperimentKind::FrameBounds => frame_bounds(&mut cx)?,
    }
    let dir = cfg.output_dir();
    let (manifest_path, manifest) = write_artifacts(&dir, &cx.artifacts)?;
    Ok(RunOutcome {
        dir,
        manifest_path,
        manifest,
        summary: cx.summary,
    })
}

fn nterm(cx: &mut Context, system: &str) -> Result<()> {
    let cfg = cx.cfg;
    let image = cx.image()?;
    let grid = image.rasterize(cfg.n, cfg.oversample)?;
    let t = cx.transform()?;
    let pre = FourierPreconditioner::new(&t);
    let coeffs = t.analyze(&grid)?;
    let ns = cx.ns(coeffs.len())?;
    let opts = NTermOptions {
        solver: SolverOptions {
            tol: cfg.tolerance.cg,
            max_iter: cfg.tolerance.max_iter,
        },
        timing: cfg.timing,
    };
    let mut curve = nterm_error_curve_from(&grid, &coeffs, &t, &pre, &ns, opts)?;
    curve.config_hash = cx.config_hash;
    // growth beyond the reconstruction floor means the curve is not monotone
    let floor = cfg.tolerance.monotone_factor * cfg.tolerance.cg.powi(2) * grid.l2_norm_sq();
    for (i, p) in curve.points.iter().enumerate() {
        if let Some(q) = curve.points[i + 1..].iter().find(|q| q.squared_error > p.squared_error + floor) {
            return Err(CliError::InvariantViolated(format!(
                "error grows from {:e} at N = {} to {:e} at N = {}",
                p.squared_error, p.n, q.squared_error, q.n
            )));
        }
    }
    let reports = fit_all(&curve.pairs(), cfg)?;
    let n2 = (cfg.n * cfg.n) as f64;
    let mut tail = String::from("N,tail_energy,normalized_tail\n");
    for p in &curve.points {
        tail.push_str(&format!("{},{:e},{:e}\n", p.n, p.tail_energy, p.tail_energy / n2));
    }
    cx.summary.push(format!("shearlet beta = {:.4} over {:?}", reports[0].beta, reports[0].fit_range));
    cx.push("error_curve.csv", curve.to_csv());
    cx.push("tail.csv", tail);
    cx.push("rate_report.csv", rate_rows(&cx.label(system), &reports));
    cx.push(
        "error_curve.svg",
        curve_plot(&format!("N-term error, {}", cx.image_name), "shearlet", &curve, "squared L2 error"),
    );
    if cfg.dump_coefficients {
        let mut buf = vec![];
        coeffs.write_dump(&mut buf)?;
        cx.push("coefficients.bin", buf);
    }
    Ok(())
}

fn baseline(cx: &mut Context, system: &str) -> Result<()> {
    let cfg = cx.cfg;
    let image = cx.image()?;
    let grid = image.rasterize(cfg.n, cfg.oversample)?;
    let w = WaveletTransform::new(cfg.n, BASELINE_ORDER)?;
    let ns = cx.ns(cfg.n * cfg.n)?;
    let mut curve = wavelet_baseline(&grid, &w, &ns, cfg.timing)?;
    curve.config_hash = cx.config_hash;
    let reports = fit_all(&curve.pairs(), cfg)?;
    cx.summary.push(format!("wavelet beta = {:.4} over {:?}", reports[0].beta, reports[0].fit_range));
    cx.push("error_curve.csv", curve.to_csv());
    cx.push("rate_report.csv", rate_rows(&cx.label(system), &reports));
    cx.push(
        "error_curve.svg",
        curve_plot(&format!("Wavelet N-term error, {}", cx.image_name), "wavelet", &curve, "squared L2 error"),
    );
    if cfg.dump_coefficients {
        let mut buf = vec![];
        for v in w.forward(&grid) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        cx.push("wavelet_coefficients.f64le", buf);
    }
    Ok(())
}

fn edge_decay(cx: &mut Context) -> Result<()> {
    let cfg = cx.cfg;
    let image = cx.image()?;
    let t = cx.transform()?;
    let coeffs = analyze_image(&image, &t, cfg.oversample)?;
    let js = cfg.probe.j_min..=cfg.j_max;
    let mut scales = String::from("probe,theta,slope,regime,j,max_ratio\n");
    let mut summary = String::from("probe,theta,slope,regime,spread_top3,growth\n");
    let mut plot = vec![];
    for (i, &theta) in cfg.probe.thetas.iter().enumerate() {
        let probe = EdgeProbe::new(image.boundary.clone(), theta)?.with_padding(cfg.probe.padding)?;
        let slope = slope_text(probe.slope);
        let mut rows = String::new();
        // the regimes overlap on 3/2 < |s| <= 3; both rows are produced there
        for regime in [Regime::Moderate, Regime::Steep] {
            if !regime.admits(&probe) {
                continue;
            }
            let table = edge_decay_table(&coeffs, &probe, regime, js.clone())?;
            let csv = table.to_csv();
            rows.push_str(if rows.is_empty() { &csv } else { csv.split_once('\n').unwrap().1 });
            for (j, r) in &table.per_scale {
                scales.push_str(&format!("{i},{theta:e},{slope},{},{j},{r:e}\n", regime.name()));
            }
            let spread = table.spread(3);
            summary.push_str(&format!("{i},{theta:e},{slope},{},{spread:e},{:e}\n", regime.name(), table.growth(3)));
            cx.summary.push(format!("probe {i} ({}) spread over top 3 scales = {spread:.3}", regime.name()));
            plot.push(Series::data(
                format!("theta={theta:.3} {}", regime.name()),
                table.per_scale.iter().map(|(j, r)| (*j as f64, *r)).collect(),
            ));
        }
        cx.push(&format!("decay_probe{i}.csv"), rows);
        let cube = per_cube_count(&coeffs, &probe, cfg.probe.cube_epsilon, js.clone())?;
        let mut cs = String::from("j,significant,fine_bound,crude_bound,geometric_spread\n");
        for s in &cube.scales {
            let g = s.geometric_spread.map(|v| format!("{v:e}")).unwrap_or_default();
            cs.push_str(&format!("{},{},{:e},{:e},{g}\n", s.j, s.significant, s.fine_bound, s.crude_bound));
        }
        cx.push(&format!("cube_probe{i}.csv"), cube.to_csv());
        cx.push(&format!("cube_scales_probe{i}.csv"), cs);
    }
    let mut ec = String::from("j,edge_cubes,per_sqrt_scale\n");
    for (j, c, r) in edge_cube_counts(&image.boundary, js.clone()) {
        ec.push_str(&format!("{j},{c},{r:e}\n"));
    }
    cx.push("decay_scales.csv", scales);
    cx.push("decay_summary.csv", summary);
    cx.push("edge_cubes.csv", ec);
    cx.push(
        "decay_scales.svg",
        Plot {
            title: format!("Edge coefficient bound ratios, {}", cx.image_name),
            x_label: "j".into(),
            y_label: "max ratio".into(),
            log_x: false,
            series: plot,
        }
        .to_svg(),
    );
    Ok(())
}

fn bessel(cx: &mut Context, system: &str) -> Result<()> {
    let cfg = cx.cfg;
    let g = cx.patch()?;
    let t = cx.transform()?;
    let coeffs = t.analyze(&rasterize_patch(&g, cfg.n, cfg.oversample)?)?;
    let report = bessel_sums(&coeffs, &g);
    cx.summary.push(format!("final relative increment = {:.3e}", report.final_increment()));
    cx.push("bessel.csv", report.to_csv());
    let ns = cx.ns(coeffs.len())?;
    let (tails, rate) = tail_rate(coeffs.values(), &ns, cfg.sweep.fit)?;
    cx.summary.push(format!("smooth tail beta = {:.4} over {:?}", rate.beta, rate.fit_range));
    let mut tc = String::from("N,tail_energy\n");
    for (n, v) in ns.iter().zip(&tails) {
        tc.push_str(&format!("{n},{v:e}\n"));
    }
    cx.push("smooth_tail.csv", tc);
    cx.push("rate_report.csv", rate_rows(&cx.label(system), &[rate]));
    let curve = ErrorCurve {
        points: ns
            .iter()
            .zip(&tails)
            .map(|(&n, &v)| shearsparse_core::approximation::CurvePoint {
                n,
                squared_error: v,
                iterations: 0,
                wall_ms: 0.0,
                tail_energy: v,
            })
            .collect(),
        config_hash: cx.config_hash,
    };
    cx.push(
        "smooth_tail.svg",
        curve_plot(&format!("Coefficient tail, {}", cx.image_name), "tail", &curve, "tail energy"),
    );
    Ok(())
}

fn counting(cx: &mut Context) -> Result<()> {
    let cfg = cx.cfg;
    let image = cx.image()?;
    let t = cx.transform()?;
    let coeffs = analyze_image(&image, &t, cfg.oversample)?;
    let k = &cfg.counting;
    let eps = log_epsilons(k.eps_hi, k.eps_lo, k.eps_count);
    let r = significant_count(&coeffs, &eps)?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    cx.summary.push(format!(
        "count exponent = {} over eps in [{:e}, {:e}]",
        r.exponent.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into()),
        k.eps_lo,
        k.eps_hi
    ));
    cx.push("counting.csv", r.to_csv());
    cx.push(
        "count_fit.csv",
        format!(
            "exponent,corrected_exponent,log_coefficient,eps_hi,eps_lo\n{},{},{},{:e},{:e}\n",
            opt(r.exponent),
            opt(r.corrected_exponent),
            opt(r.log_coefficient),
            k.eps_hi,
            k.eps_lo
        ),
    );
    let pts: Vec<(f64, f64)> = r.epsilons.iter().zip(&r.counts).map(|(e, c)| (1.0 / e, *c as f64)).collect();
    let mut series = vec![Series::data("count", pts.clone())];
    if let Some(&a) = pts.iter().find(|p| p.1 > 0.0) {
        series.push(Series::reference(
            "eps^-2/3",
            pts.iter().map(|p| (p.0, a.1 * (p.0 / a.0).powf(2.0 / 3.0))).collect(),
        ));
    }
    cx.push(
        "counting.svg",
        Plot {
            title: format!("Significant coefficients, {}", cx.image_name),
            x_label: "1/eps".into(),
            y_label: "count".into(),
            log_x: true,
            series,
        }
        .to_svg(),
    );
    Ok(())
}

fn frame_bounds(cx: &mut Context) -> Result<()> {
    let cfg = cx.cfg;
    let t = cx.transform()?;
    let pre = FourierPreconditioner::new(&t);
    let b = estimate_frame_bounds_with(&t, &pre, cfg.tolerance.bounds, derive_seed(cfg.seed, SEED_STREAM_BOUNDS))?;
    cx.summary.push(format!("A = {:.6e}, B = {:.6e}, B/A = {:.4}", b.lower, b.upper, b.ratio()));
    cx.push(
        "frame_bounds.csv",
        format!(
            "lower,upper,ratio,iterations,residual\n{:e},{:e},{:e},{},{:e}\n",
            b.lower,
            b.upper,
            b.ratio(),
            b.iterations,
            b.residual
        ),
    );
    Ok(())
}
