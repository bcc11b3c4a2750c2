use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::approximation::WaveletTransform;
use crate::error::Error;
use crate::grid::Grid;
use crate::shearlet::{build_generators, Cone, GeneratorConfig, ShearletIndex, ShearletSystem, SystemConfig};

fn system_with(config: SystemConfig) -> Arc<ShearletSystem> {
    let spec = build_generators(&GeneratorConfig {
        depth: 9,
        ..GeneratorConfig::default()
    })
    .unwrap();
    Arc::new(ShearletSystem::new(Arc::new(spec), config).unwrap())
}

fn system(j: u32) -> Arc<ShearletSystem> {
    system_with(SystemConfig::new(j))
}

fn matched(j: u32, n: usize) -> Arc<ShearletSystem> {
    system_with(SystemConfig::pixel_matched(j, n))
}

fn random_grid(n: usize, rng: &mut ChaCha8Rng) -> Grid {
    Grid::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_coeffs(sys: &Arc<ShearletSystem>, rng: &mut ChaCha8Rng) -> CoefficientSet {
    let v = (0..sys.total_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CoefficientSet::from_values(sys.clone(), v).unwrap()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[test]
fn zero_grid_and_zero_coefficients() {
    let sys = system(2);
    let t = ShearletTransform::new(sys.clone(), 64).unwrap();
    assert!(t.analyze(&Grid::zeros(64)).unwrap().values().iter().all(|v| *v == 0.0));
    let g = t.synthesize(&CoefficientSet::zeros(sys)).unwrap();
    assert!(g.as_slice().iter().all(|v| *v == 0.0));
}

#[test]
fn grid_must_resolve_the_atom_lattice() {
    let sys = system(3);
    assert_eq!(
        ShearletTransform::new(sys.clone(), 64).unwrap_err(),
        Error::ResolutionTooCoarse { n: 64, required: 128 }
    );
    assert!(matches!(ShearletTransform::new(sys, 200), Err(Error::InvalidArgument(_))));
}

#[test]
fn constant_image_gives_vanishing_interior_coefficients() {
    let sys = system(3);
    let n = 128;
    let kappa = 2.5;
    let c = analyze(&Grid::from_fn(n, |_, _| kappa), &sys).unwrap();
    let mut checked = 0;
    for (idx, v) in c.iter() {
        if idx.cone == Cone::Coarse {
            continue;
        }
        let (lo, hi) = sys.support_box(&idx).unwrap();
        if lo[0] >= 0.0 && lo[1] >= 0.0 && hi[0] <= 1.0 && hi[1] <= 1.0 {
            assert!(v.abs() <= 1e-8 * kappa, "{idx:?}: {v}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn rasterized_atom_reproduces_its_norm() {
    let sys = system(2);
    let n = 512;
    let t = ShearletTransform::new(sys.clone(), n).unwrap();
    let norm_sq = sys.spec.psi_norm_l2().powi(2);
    for (cone, j, k) in [(Cone::Coarse, 0, 0), (Cone::Horizontal, 0, 1), (Cone::Vertical, 1, -1)] {
        let s = &sys.slabs()[sys.slab_position(cone, j, k).unwrap()];
        let (a, b) = ((s.a_lo + s.a_hi) / 2, (s.b_lo + s.b_hi) / 2);
        let idx = ShearletIndex { cone, j, k, m: s.m_of(a, b) };
        // independent raster: oversampled point values of the atom
        let os = 8;
        let g = Grid::from_fn(n, |i1, i2| {
            let mut acc = 0.0;
            for u in 0..os {
                for v in 0..os {
                    let x = [
                        (i1 as f64 + (u as f64 + 0.5) / os as f64) / n as f64,
                        (i2 as f64 + (v as f64 + 0.5) / os as f64) / n as f64,
                    ];
                    acc += sys.atom_value(&idx, x).unwrap();
                }
            }
            acc / (os * os) as f64
        });
        let c = t.analyze(&g).unwrap().get(&idx).unwrap();
        // the coefficient is the energy of the rasterized atom
        let oracle = g.norm_sq() / (n * n) as f64;
        assert!((c - oracle).abs() <= 1e-4 * oracle, "{idx:?}: {c} vs {oracle}");
        assert!((c - norm_sq).abs() <= 5e-3 * norm_sq, "{idx:?}: {c}");
    }
}

#[test]
fn analysis_matches_zero_padded_fft_correlation() {
    let sys = system(2);
    let n = 64;
    let t = ShearletTransform::new(sys.clone(), n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = random_grid(n, &mut rng);
    let gt = g.transpose();
    let c = t.analyze(&g).unwrap();
    for (i, s) in sys.slabs().iter().enumerate() {
        let src = if s.cone == Cone::Vertical { &gt } else { &g };
        let (p1, p2) = t.positions(i);
        let oracle = fft_correlate(src.as_slice(), n, t.kernel(i), p1, p2);
        let scale = oracle.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        for (a, b) in c.slab(i).iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-12 * scale * 10.0, "{:?} {} {}: {a} vs {b}", s.cone, s.j, s.k);
        }
    }
}

#[test]
fn synthesis_is_the_exact_adjoint() {
    let sys = system(2);
    let n = 64;
    let t = ShearletTransform::new(sys.clone(), n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let g = random_grid(n, &mut rng);
        let c = random_coeffs(&sys, &mut rng);
        let lhs = t.analyze(&g).unwrap().dot(&c);
        let rhs = g.dot(&t.synthesize(&c).unwrap());
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()), "{lhs} vs {rhs}");
    }
}

#[test]
fn frame_operator_is_linear_symmetric_positive() {
    let sys = system(2);
    let n = 64;
    let t = ShearletTransform::new(sys.clone(), n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = random_grid(n, &mut rng);
    let h = random_grid(n, &mut rng);
    let sg = t.frame_apply(&g).unwrap();
    let sh = t.frame_apply(&h).unwrap();

    let composed = t.synthesize(&t.analyze(&g).unwrap()).unwrap();
    assert!(rel_diff(composed.as_slice(), sg.as_slice()) <= 1e-12);

    let (al, be) = (0.7, -1.9);
    let mut comb = g.clone();
    comb.scale(al);
    comb.axpy(be, &h);
    let s_comb = t.frame_apply(&comb).unwrap();
    let mut expect = sg.clone();
    expect.scale(al);
    expect.axpy(be, &sh);
    assert!(rel_diff(s_comb.as_slice(), expect.as_slice()) <= 1e-12);

    let (a, b) = (sg.dot(&h), g.dot(&sh));
    assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()));

    let energy = t.analyze(&g).unwrap().norm_sq();
    let q = sg.dot(&g);
    assert!(q >= 0.0 && (q - energy).abs() <= 1e-12 * energy);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let sys = system(3);
    let n = 128;
    let t = ShearletTransform::new(sys.clone(), n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_grid(n, &mut rng);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| t.frame_apply(&g).unwrap())
    };
    let one = run(1);
    let three = run(3);
    assert!(one
        .as_slice()
        .iter()
        .zip(three.as_slice())
        .all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn orthonormal_toy_frame_has_unit_bounds() {
    let tol = 1e-8;
    let w = WaveletTransform::new(32, 4).unwrap();
    let b = estimate_frame_bounds_plain(&w, tol, 1).unwrap();
    assert!((b.lower - 1.0).abs() <= tol && (b.upper - 1.0).abs() <= tol, "{b:?}");
    let d = estimate_frame_bounds_plain(&DuplicatedFrame(w), tol, 1).unwrap();
    assert!((d.lower - 2.0).abs() <= 2.0 * tol && (d.upper - 2.0).abs() <= 2.0 * tol, "{d:?}");
}

#[test]
fn duplication_doubles_nontrivial_bounds() {
    // a small explicit frame with distinct bounds
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (rows, cols) = (40, 12);
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let m = MatrixFrame { rows, cols, data };
    let tol = 1e-9;
    let b = estimate_frame_bounds_plain(&m, tol, 3).unwrap();
    let d = estimate_frame_bounds_plain(&DuplicatedFrame(m.clone()), tol, 3).unwrap();
    assert!(((d.lower - 2.0 * b.lower) / (2.0 * b.lower)).abs() <= 1e-6, "{b:?} {d:?}");
    assert!(((d.upper - 2.0 * b.upper) / (2.0 * b.upper)).abs() <= 1e-6, "{b:?} {d:?}");

    // against a dense eigensolve
    let a = nalgebra::DMatrix::from_row_slice(rows, cols, &m.data);
    let ev = (a.transpose() * a).symmetric_eigenvalues();
    let (lo, hi) = (ev.min(), ev.max());
    assert!((b.lower - lo).abs() <= 1e-6 * lo && (b.upper - hi).abs() <= 1e-6 * hi);
}

#[test]
fn rank_deficient_frames_are_rejected() {
    let m = MatrixFrame {
        rows: 2,
        cols: 3,
        data: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
    };
    assert!(matches!(estimate_frame_bounds_plain(&m, 1e-6, 1), Err(Error::NotAFrame { .. })));
}

#[test]
fn dual_reconstruction_recovers_analyzed_grids() {
    let sys = matched(2, 64);
    let n = 64;
    let t = ShearletTransform::new(sys.clone(), n).unwrap();
    let pre = FourierPreconditioner::new(&t);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let tol = 1e-8;
    let opts = SolverOptions { tol, max_iter: 500 };
    for _ in 0..3 {
        // a random element of the analyzable span, the range of T*
        let g = t.synthesize(&random_coeffs(&sys, &mut rng)).unwrap();
        let c = t.analyze(&g).unwrap();
        let r = dual_reconstruct_with(&t, &pre, &c, None, opts).unwrap();
        assert!(r.converged, "{} iterations, residual {}", r.iterations, r.residual);
        assert!(rel_diff(r.grid.as_slice(), g.as_slice()) <= 10.0 * tol);
        for w in r.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{w:?}");
        }
    }
    let z = dual_reconstruct_with(&t, &pre, &CoefficientSet::zeros(sys), None, opts).unwrap();
    assert_eq!(z.iterations, 0);
    assert!(z.grid.as_slice().iter().all(|v| *v == 0.0));
}

#[test]
fn unpreconditioned_solver_agrees() {
    let sys = matched(2, 64);
    let n = 64;
    let t = ShearletTransform::new(sys, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = random_grid(n, &mut rng);
    let b = t.frame_apply(&g).unwrap();
    let opts = SolverOptions { tol: 1e-9, max_iter: 2000 };
    let rep = conjugate_residual(&t, &IdentityPreconditioner, b.as_slice(), None, opts);
    assert!(rep.converged);
    assert!(rel_diff(&rep.x, g.as_slice()) <= 1e-7);
    for w in rep.history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12));
    }
}

#[test]
fn max_iter_is_reported() {
    let sys = system(2);
    let n = 64;
    let t = ShearletTransform::new(sys, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let c = t.analyze(&random_grid(n, &mut rng)).unwrap();
    let opts = SolverOptions { tol: 1e-14, max_iter: 2 };
    let r = dual_reconstruct_with(&t, &IdentityPreconditioner, &c, None, opts).unwrap();
    assert!(!r.converged && r.iterations == 2);
    assert!(matches!(r.into_result(), Err(Error::MaxIterExceeded { iterations: 2, .. })));
}

#[test]
fn iterative_bounds_match_dense_gram_eigenvalues() {
    let sys = matched(2, 32);
    let n = 32;
    let t = ShearletTransform::new(sys.clone(), n).unwrap();
    let len = n * n;
    let mut cols = Vec::with_capacity(len);
    let mut e = vec![0.0; len];
    let mut c = vec![0.0; t.coeff_len()];
    for i in 0..len {
        e[i] = 1.0;
        t.analyze_into(&e, &mut c);
        cols.push(nalgebra::DVector::from_column_slice(&c));
        e[i] = 0.0;
    }
    let tm = nalgebra::DMatrix::from_columns(&cols);
    let ev = (tm.transpose() * &tm).symmetric_eigenvalues();
    let (lo, hi) = (ev.min(), ev.max());
    let pre = FourierPreconditioner::new(&t);
    let b = estimate_frame_bounds_with(&t, &pre, 1e-9, 0x5eed).unwrap();
    assert!((b.upper - hi).abs() <= 1e-4 * hi, "{} vs {hi}", b.upper);
    assert!((b.lower - lo).abs() <= 1e-4 * lo, "{} vs {lo}", b.lower);

    // frame sandwich on random grids
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let g = random_grid(n, &mut rng);
        let en = t.analyze(&g).unwrap().norm_sq();
        let gn = g.norm_sq();
        assert!(b.lower * gn <= en * 1.01 && en <= 1.01 * b.upper * gn);
    }
}
