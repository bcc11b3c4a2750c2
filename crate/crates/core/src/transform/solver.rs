use std::sync::Arc;

use rand::{Rng, SeedableRng};
use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

use super::coeffs::CoefficientSet;
use super::fft::FourierPreconditioner;
use super::frame::{FrameOperator, IdentityPreconditioner, Preconditioner};
use super::ops::ShearletTransform;
use crate::error::{Error, Result};
use crate::grid::{dot, Grid};
use crate::shearlet::ShearletSystem;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `||b - S x|| / ||b||` of the returned iterate.
    pub residual: f64,
    pub converged: bool,
    /// Relative preconditioned residual norm `sqrt(r . M^-1 r)`, the
    /// quantity minimized over the Krylov space; one entry per iterate.
    pub history: Vec<f64>,
    /// Relative Euclidean residual norm per iterate.
    pub residual_history: Vec<f64>,
}

/// Preconditioned conjugate residuals for `S x = b` with the frame operator
/// `S = T* T`. Stops when `||b - S x|| <= tol ||b||`.
pub fn conjugate_residual(
    op: &dyn FrameOperator,
    pre: &dyn Preconditioner,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: SolverOptions,
) -> SolveReport {
    let len = b.len();
    let bnorm = dot(b, b).sqrt();
    let mut x = x0.map_or_else(|| vec![0.0; len], <[f64]>::to_vec);
    if bnorm == 0.0 {
        x.fill(0.0);
        return SolveReport {
            x,
            iterations: 0,
            residual: 0.0,
            converged: true,
            history: vec![0.0],
            residual_history: vec![0.0],
        };
    }
    let apply = |v: &[f64], out: &mut [f64]| op.frame_apply_into(v, out);
    let mut r = vec![0.0; len];
    let mut z = vec![0.0; len];
    let mut az = vec![0.0; len];
    let mut p = vec![0.0; len];
    let mut ap = vec![0.0; len];
    let mut q = vec![0.0; len];
    let mut history = Vec::new();
    let mut residual_history = Vec::new();
    let mut iterations = 0;

    // one restart after the recursive residual claims convergence but the
    // true residual disagrees
    loop {
        if x.iter().any(|v| *v != 0.0) {
            apply(&x, &mut r);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
        } else {
            r.copy_from_slice(b);
        }
        pre.apply(&r, &mut z);
        apply(&z, &mut az);
        p.copy_from_slice(&z);
        ap.copy_from_slice(&az);
        let mut rho = dot(&z, &az);
        let rnorm = dot(&r, &r).sqrt();
        history.push(dot(&r, &z).max(0.0).sqrt() / bnorm);
        residual_history.push(rnorm / bnorm);
        let mut done = rnorm <= opts.tol * bnorm;
        while !done && iterations < opts.max_iter {
            pre.apply(&ap, &mut q);
            let denom = dot(&ap, &q);
            if !(denom > 0.0) || !(rho > 0.0) {
                break;
            }
            let alpha = rho / denom;
            for i in 0..len {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
                z[i] -= alpha * q[i];
            }
            iterations += 1;
            apply(&z, &mut az);
            let rho_new = dot(&z, &az);
            let beta = rho_new / rho;
            rho = rho_new;
            for i in 0..len {
                p[i] = z[i] + beta * p[i];
                ap[i] = az[i] + beta * ap[i];
            }
            let rn = dot(&r, &r).sqrt();
            history.push(dot(&r, &z).max(0.0).sqrt() / bnorm);
            residual_history.push(rn / bnorm);
            done = rn <= opts.tol * bnorm;
        }
        // verify against the true residual
        apply(&x, &mut r);
        let true_res = r
            .iter()
            .zip(b)
            .map(|(s, bi)| (bi - s) * (bi - s))
            .sum::<f64>()
            .sqrt()
            / bnorm;
        if true_res <= opts.tol || iterations >= opts.max_iter || !done {
            return SolveReport {
                x,
                iterations,
                residual: true_res,
                converged: true_res <= opts.tol,
                history,
                residual_history,
            };
        }
    }
}

/// Result of a dual-frame reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub grid: Grid,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

impl Reconstruction {
    /// The reconstruction, or `MaxIterExceeded` if the solve fell short.
    pub fn into_result(self) -> Result<Reconstruction> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::MaxIterExceeded {
                iterations: self.iterations,
                residual: self.residual,
                context: None,
            })
        }
    }
}

/// `S^-1 T* c`, with an optional warm start.
pub fn dual_reconstruct_with(
    t: &ShearletTransform,
    pre: &dyn Preconditioner,
    coeffs: &CoefficientSet,
    warm: Option<&Grid>,
    opts: SolverOptions,
) -> Result<Reconstruction> {
    let b = t.synthesize(coeffs)?;
    let rep = conjugate_residual(t, pre, b.as_slice(), warm.map(Grid::as_slice), opts);
    Ok(Reconstruction {
        grid: Grid::from_vec(t.n(), rep.x)?,
        iterations: rep.iterations,
        residual: rep.residual,
        converged: rep.converged,
        history: rep.history,
    })
}

/// Canonical dual reconstruction on an `n x n` grid with the Fourier
/// preconditioner. A solve that does not converge is returned with
/// `converged == false`.
pub fn dual_reconstruct(coeffs: &CoefficientSet, n: usize, opts: SolverOptions) -> Result<Reconstruction> {
    let t = ShearletTransform::new(coeffs.system().clone(), n)?;
    let pre = FourierPreconditioner::new(&t);
    dual_reconstruct_with(&t, &pre, coeffs, None, opts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    /// Largest relative eigen-residual `||S x - l x|| / l` of the two
    /// final iterates.
    pub residual: f64,
}

impl FrameBounds {
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }
}

struct EigenEstimate {
    value: f64,
    iterations: usize,
    residual: f64,
}

fn random_unit(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalize(&mut x);
    x
}

fn normalize(x: &mut [f64]) -> f64 {
    let nrm = dot(x, x).sqrt();
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    nrm
}

/// Single-vector preconditioned LOBPCG for the smallest (`sign = 1`) or
/// largest (`sign = -1`) eigenvalue of `S`. Stops when
/// `||S x - l x|| <= tol |l|`, or once `l` drops below `floor`.
fn lobpcg(
    op: &dyn FrameOperator,
    pre: &dyn Preconditioner,
    mut x: Vec<f64>,
    sign: f64,
    tol: f64,
    floor: f64,
    max_iter: usize,
) -> EigenEstimate {
    let len = x.len();
    let apply = |v: &[f64], out: &mut Vec<f64>| {
        op.frame_apply_into(v, out);
        out.iter_mut().for_each(|o| *o *= sign);
    };
    let mut ax = vec![0.0; len];
    apply(&x, &mut ax);
    let mut lambda = dot(&x, &ax);
    let mut p: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut r = vec![0.0; len];
    let mut w = vec![0.0; len];
    let mut aw = vec![0.0; len];
    let mut residual;
    let mut it = 0;
    loop {
        r.iter_mut().zip(ax.iter().zip(&x)).for_each(|(r, (a, v))| *r = a - lambda * v);
        residual = dot(&r, &r).sqrt() / lambda.abs();
        if !(residual > tol) || it >= max_iter || sign * lambda <= floor {
            break;
        }
        it += 1;
        pre.apply(&r, &mut w);
        if normalize(&mut w) == 0.0 {
            break;
        }
        apply(&w, &mut aw);
        let mut basis: Vec<(&[f64], &[f64])> = vec![(&x, &ax), (&w, &aw)];
        if let Some((pv, apv)) = &p {
            basis.push((pv, apv));
        }
        let coef = loop {
            match ritz_vector(&basis) {
                Some(c) => break Some(c),
                None if basis.len() > 2 => {
                    basis.pop();
                }
                None => break None,
            }
        };
        let Some((_, c)) = coef else { break };
        let combine = |skip: usize, image: bool| {
            let mut out = vec![0.0; len];
            for (ci, b) in c.iter().zip(&basis).skip(skip) {
                let src = if image { b.1 } else { b.0 };
                out.iter_mut().zip(src).for_each(|(o, v)| *o += ci * v);
            }
            out
        };
        let mut np = combine(1, false);
        let mut nap = combine(1, true);
        let mut nx = combine(0, false);
        let mut nax = combine(0, true);
        let sx = normalize(&mut nx);
        nax.iter_mut().for_each(|v| *v /= sx);
        let sp = normalize(&mut np);
        if sp > 0.0 {
            nap.iter_mut().for_each(|v| *v /= sp);
        }
        x = nx;
        ax = nax;
        lambda = dot(&x, &ax);
        p = (sp > 0.0).then_some((np, nap));
    }
    EigenEstimate {
        value: sign * lambda,
        iterations: it,
        residual,
    }
}

/// Smallest Ritz pair of the pencil `(V^T A V, V^T V)`; `None` when the
/// basis is numerically dependent.
fn ritz_vector(basis: &[(&[f64], &[f64])]) -> Option<(f64, Vec<f64>)> {
    let k = basis.len();
    let mut g = DMatrix::<f64>::zeros(k, k);
    let mut h = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            g[(i, j)] = dot(basis[i].0, basis[j].0);
            g[(j, i)] = g[(i, j)];
            let v = 0.5 * (dot(basis[i].0, basis[j].1) + dot(basis[j].0, basis[i].1));
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let eig = g.clone().symmetric_eigen();
    if eig.eigenvalues.min() <= 1e-10 * eig.eigenvalues.max() {
        return None;
    }
    let l = g.cholesky()?;
    let linv = l.l().try_inverse()?;
    let c = &linv * h * linv.transpose();
    let e = c.symmetric_eigen();
    let (i, value) = e
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))?;
    let y = e.eigenvectors.column(i).into_owned();
    let coef = linv.transpose() * y;
    Some((value, coef.iter().copied().collect()))
}

/// Frame bounds of an arbitrary frame operator by preconditioned LOBPCG on
/// both ends of the spectrum. A lower bound below `1e-10 B` means `S` has a
/// numerical null space and is reported as `NotAFrame`.
pub fn estimate_frame_bounds_with(
    op: &dyn FrameOperator,
    pre: &dyn Preconditioner,
    tol: f64,
    seed: u64,
) -> Result<FrameBounds> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tol = {tol} not in (0,1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_unit(op.signal_len(), &mut rng);
    let upper = lobpcg(op, pre, x, -1.0, tol, f64::NEG_INFINITY, MAX_EIGEN_ITER);
    let x = random_unit(op.signal_len(), &mut rng);
    let lower = lobpcg(op, pre, x, 1.0, tol, SINGULAR_RATIO * upper.value, MAX_EIGEN_ITER);
    if !(upper.value > 0.0) || !(lower.value > SINGULAR_RATIO * upper.value) {
        return Err(Error::NotAFrame {
            lower: lower.value,
            upper: upper.value,
        });
    }
    Ok(FrameBounds {
        lower: lower.value,
        upper: upper.value.max(lower.value),
        iterations: upper.iterations + lower.iterations,
        residual: upper.residual.max(lower.residual),
    })
}

const MAX_EIGEN_ITER: usize = 5000;
const SINGULAR_RATIO: f64 = 1e-10;

/// Frame bounds of the digital system on an `n x n` grid.
pub fn estimate_frame_bounds(system: &Arc<ShearletSystem>, n: usize, tol: f64) -> Result<FrameBounds> {
    let t = ShearletTransform::new(system.clone(), n)?;
    let pre = FourierPreconditioner::new(&t);
    estimate_frame_bounds_with(&t, &pre, tol, 0x5eed)
}

/// Frame bounds without preconditioning, for small or toy frames.
pub fn estimate_frame_bounds_plain(op: &dyn FrameOperator, tol: f64, seed: u64) -> Result<FrameBounds> {
    estimate_frame_bounds_with(op, &IdentityPreconditioner, tol, seed)
}
