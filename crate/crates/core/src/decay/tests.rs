use std::f64::consts::PI;
use std::sync::Arc;

use super::*;
use crate::cartoon::{scenes, PatchTerm};
use crate::shearlet::{build_generators, GeneratorConfig, SystemConfig};

fn transform(j: u32, n: usize) -> ShearletTransform {
    let spec = build_generators(&GeneratorConfig {
        depth: 8,
        ..GeneratorConfig::default()
    })
    .unwrap();
    let sys = Arc::new(ShearletSystem::new(Arc::new(spec), SystemConfig::pixel_matched(j, n)).unwrap());
    ShearletTransform::new(sys, n).unwrap()
}

fn bump(amp: f64, center: [f64; 2]) -> SmoothPatch {
    SmoothPatch::new(vec![PatchTerm::Gaussian { amp, center, sigma: 0.08 }])
}

#[test]
fn zero_image_gives_zero_ratios() {
    let t = transform(3, 128);
    let zero = CoefficientSet::zeros(t.system().clone());
    let probe = EdgeProbe::new(scenes::disk().boundary, 0.0).unwrap();
    let table = edge_decay_table(&zero, &probe, Regime::Moderate, 1..=3).unwrap();
    assert!(!table.rows.is_empty());
    assert!(table.rows.iter().all(|r| r.ratio == 0.0 && r.max_abs == 0.0));
    let report = significant_count(&zero, &[1e-1, 1e-3]).unwrap();
    assert_eq!(report.counts, vec![0, 0]);
    assert!(report.exponent.is_none());
}

#[test]
fn regimes_check_the_probe_slope() {
    let t = transform(2, 64);
    let zero = CoefficientSet::zeros(t.system().clone());
    let vertical = EdgeProbe::new(scenes::disk().boundary, 0.0).unwrap();
    let horizontal = EdgeProbe::new(scenes::disk().boundary, PI / 2.0).unwrap();
    assert!(edge_decay_table(&zero, &vertical, Regime::Steep, 0..=2).is_err());
    assert!(edge_decay_table(&zero, &horizontal, Regime::Moderate, 0..=2).is_err());
    assert!(edge_decay_table(&zero, &horizontal, Regime::Steep, 0..=2).is_ok());
    assert!(edge_decay_table(&zero, &vertical, Regime::Moderate, 0..=5).is_err());
}

#[test]
fn probe_away_from_the_image_meets_nothing() {
    let t = transform(2, 64);
    let zero = CoefficientSet::zeros(t.system().clone());
    // a boundary entirely outside the unit square
    let mut far = scenes::disk().boundary;
    far.translate = [5.0, 5.0];
    let probe = EdgeProbe::new(far, 0.0).unwrap();
    assert!(matches!(
        edge_decay_table(&zero, &probe, Regime::Moderate, 0..=2),
        Err(Error::NoIntersectingShearlets(_))
    ));
}

#[test]
fn selected_shearlets_meet_cube_and_edge() {
    let t = transform(3, 128);
    let sys = t.system().clone();
    let probe = EdgeProbe::new(scenes::disk().boundary, 0.0).unwrap();
    let samples = boundary_samples(&probe.boundary, BOUNDARY_SAMPLES);
    for s in sys.slabs().iter().filter(|s| s.cone == Cone::Horizontal && s.j == 3) {
        let set = edge_translates(&sys, s, &samples, &probe.cube(3));
        assert!(!set.is_empty());
        for &(a, b) in &set {
            let idx = crate::shearlet::ShearletIndex {
                cone: s.cone,
                j: s.j,
                k: s.k,
                m: s.m_of(a, b),
            };
            let (lo, hi) = sys.support_box(&idx).unwrap();
            let r = Rect { lo, hi };
            assert!(r.overlaps(&probe.cube(3)));
            assert!(samples.iter().any(|x| r.contains_open(*x)));
        }
        // brute force over the slab agrees
        let mut count = 0;
        for b in s.b_lo..=s.b_hi {
            for a in s.a_lo..=s.a_hi {
                let idx = crate::shearlet::ShearletIndex {
                    cone: s.cone,
                    j: s.j,
                    k: s.k,
                    m: s.m_of(a, b),
                };
                let (lo, hi) = sys.support_box(&idx).unwrap();
                let r = Rect { lo, hi };
                if r.overlaps(&probe.cube(3)) && samples.iter().any(|x| r.contains_open(*x)) {
                    count += 1;
                }
            }
        }
        assert_eq!(count, set.len(), "k = {}", s.k);
    }
}

#[test]
fn counts_are_monotone_and_vanish_above_the_maximum() {
    let t = transform(3, 128);
    let c = analyze_image(&scenes::disk(), &t, 4).unwrap();
    let max = c.max_abs() / l1_normalizer(t.system());
    let eps = log_epsilons(2.0 * max, 1e-4 * max, 12);
    let r = significant_count(&c, &eps).unwrap();
    assert_eq!(r.counts[0], 0);
    assert!(r.counts.windows(2).all(|w| w[0] <= w[1]));
    assert!(r.counts.last().unwrap() > &1000);
    assert!(significant_count(&c, &[1e-3, 1e-2]).is_err());
    let cube = per_cube_count(&c, &EdgeProbe::new(scenes::disk().boundary, 0.0).unwrap(), 2.0 * max, 1..=3).unwrap();
    assert!(cube.scales.iter().all(|s| s.significant == 0));
    assert!(cube.rows.iter().all(|r| r.translates > 0));
}

#[test]
fn edge_cubes_grow_like_the_square_root_of_the_scale() {
    let counts = edge_cube_counts(&scenes::disk().boundary, 2..=12);
    let ratios: Vec<f64> = counts.iter().map(|c| c.2).collect();
    let hi = ratios.iter().fold(0.0f64, |m, v| m.max(*v));
    let lo = ratios.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    assert!(hi / lo < 2.5, "{ratios:?}");
}

#[test]
fn bessel_ratio_is_scale_invariant() {
    let t = transform(3, 128);
    let g = bump(1.0, [0.5, 0.5]);
    let a = smooth_bessel_check(&g, &t, 2).unwrap();
    let b = smooth_bessel_check(&g.scaled(2.0), &t, 2).unwrap();
    assert!((b.denominator / a.denominator - 4.0).abs() < 1e-12);
    for ((x, y), (pa, pb)) in a.ratios.iter().zip(&b.ratios).zip(a.partial_sums.iter().zip(&b.partial_sums)) {
        assert!((x - y).abs() <= 1e-12 * x.abs());
        assert!((pb.1 / pa.1 - 4.0).abs() <= 1e-12);
    }
    assert!(a.ratios.windows(2).all(|w| w[0] <= w[1]));
    let zero = smooth_bessel_check(&SmoothPatch::zero(), &t, 1).unwrap();
    assert!(zero.ratios.iter().all(|r| *r == 0.0));
}

#[test]
fn bessel_ratio_is_nearly_translation_invariant() {
    let t = transform(4, 256);
    let a = smooth_bessel_check(&bump(1.0, [0.5, 0.5]), &t, 2).unwrap();
    let b = smooth_bessel_check(&bump(1.0, [0.46, 0.53]), &t, 2).unwrap();
    let (x, y) = (a.ratios.last().unwrap(), b.ratios.last().unwrap());
    assert!((x - y).abs() <= 0.05 * x, "{x} vs {y}");
}

#[test]
fn second_derivative_energy_of_a_gaussian() {
    // int (d11 G)^2 = 3 amp^2 pi / (4 sigma^2) for a full-plane Gaussian
    let sigma = 0.08;
    let e = second_derivative_energy(&bump(1.0, [0.5, 0.5]));
    let exact = 3.0 * PI / (4.0 * sigma * sigma);
    assert!((e - exact).abs() <= 1e-6 * exact, "{e} vs {exact}");
}

#[test]
fn synthetic_tails_decay_like_n_to_the_minus_two() {
    let theta: Vec<f64> = (1..=1 << 20).map(|n| (n as f64).powf(-1.5)).collect();
    let ns: Vec<usize> = (6..=16).map(|p| 1usize << p).collect();
    let (tails, r) = tail_rate(&theta, &ns, Some((64.0, 65536.0))).unwrap();
    assert!((r.beta - 2.0).abs() <= 0.01, "{}", r.beta);
    // tail ~ N^-2 / 2
    assert!((tails[4] * (ns[4] as f64).powi(2) - 0.5).abs() < 0.02);
    let zero = vec![0.0; 100];
    assert!(matches!(tail_rate(&zero, &[1, 2, 4, 8, 16, 32], None), Err(Error::DegenerateFit(_))));
}
