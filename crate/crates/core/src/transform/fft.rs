//! Fourier-domain helpers: a zero-padded FFT correlation used as an
//! independent check of the direct slab correlation, and a diagonal
//! Fourier preconditioner for the frame operator.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::frame::Preconditioner;
use super::kernel::Kernel;
use super::ops::ShearletTransform;
use crate::shearlet::Cone;

/// In-place 2-D FFT of a row-major `size x size` buffer.
pub struct Fft2 {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    fn run(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.size;
        fft.process(buf);
        transpose_square(buf, n);
        fft.process(buf);
        transpose_square(buf, n);
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.forward);
    }

    /// Unnormalized inverse.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.inverse);
    }
}

fn transpose_square<T: Copy>(buf: &mut [T], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Places the kernel into a `size x size` buffer at its circular offsets.
fn embed_kernel(ker: &Kernel, size: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::default(); size * size];
    let s = size as i64;
    for r in &ker.rows {
        let y = r.q2.rem_euclid(s) as usize;
        for (c, v) in ker.row_values(r).iter().enumerate() {
            let x = (r.q1 + c as i64).rem_euclid(s) as usize;
            buf[y * size + x].re += v;
        }
    }
    buf
}

/// `sum_q g[p + q] K[q]` at every anchor `(p1[a], p2[b])`, by a zero-padded
/// FFT (no wrap-around); output is `b`-major like a slab.
pub fn fft_correlate(g: &[f64], n: usize, ker: &Kernel, p1: &[i64], p2: &[i64]) -> Vec<f64> {
    let (_, _, w, h) = ker.extent();
    let size = (n + w.max(h) + 1).next_power_of_two();
    let fft = Fft2::new(size);
    let mut gb = vec![Complex64::default(); size * size];
    for i2 in 0..n {
        for i1 in 0..n {
            gb[i2 * size + i1].re = g[i2 * n + i1];
        }
    }
    let mut kb = embed_kernel(ker, size);
    fft.forward(&mut gb);
    fft.forward(&mut kb);
    for (a, b) in gb.iter_mut().zip(&kb) {
        *a *= b.conj();
    }
    fft.inverse(&mut gb);
    let norm = (size * size) as f64;
    let s = size as i64;
    let mut out = Vec::with_capacity(p1.len() * p2.len());
    for &y in p2 {
        for &x in p1 {
            let (xi, yi) = (x.rem_euclid(s) as usize, y.rem_euclid(s) as usize);
            out.push(gb[yi * size + xi].re / norm);
        }
    }
    out
}

pub const DEFAULT_FLOOR: f64 = 1e-2;

/// Diagonal approximation of the frame operator in the Fourier domain:
/// each slab contributes `|K^(w)|^2` divided by its sampling density.
pub struct FourierPreconditioner {
    n: usize,
    fft: Fft2,
    inverse_symbol: Vec<f64>,
}

impl FourierPreconditioner {
    pub fn new(t: &ShearletTransform) -> Self {
        Self::with_floor(t, DEFAULT_FLOOR)
    }

    /// Symbol values below `floor * max` are raised to that level.
    pub fn with_floor(t: &ShearletTransform, floor: f64) -> Self {
        let n = t.n();
        let sys = t.system();
        let fft = Fft2::new(n);
        let density = |cone: Cone, j: u32| {
            let (s1, s2) = sys.steps(cone, j);
            1.0 / (s1 * n as f64 * s2 * n as f64)
        };
        // vertical slabs contribute the transpose of the horizontal symbol
        let parts: Vec<(bool, Vec<f64>)> = sys
            .slabs()
            .par_iter()
            .enumerate()
            .filter(|(_, s)| s.cone != Cone::Vertical)
            .map(|(i, s)| {
                let mut buf = embed_kernel(t.kernel(i), n);
                fft.forward(&mut buf);
                let d = density(s.cone, s.j);
                (s.cone == Cone::Horizontal, buf.iter().map(|z| z.norm_sqr() * d).collect())
            })
            .collect();
        let has_vertical = sys.slabs().iter().any(|s| s.cone == Cone::Vertical);
        let mut symbol = vec![0.0; n * n];
        let mut horiz = vec![0.0; n * n];
        for (h, p) in parts {
            let dst = if h { &mut horiz } else { &mut symbol };
            for (d, v) in dst.iter_mut().zip(&p) {
                *d += v;
            }
        }
        for i2 in 0..n {
            for i1 in 0..n {
                symbol[i2 * n + i1] += horiz[i2 * n + i1];
                if has_vertical {
                    symbol[i2 * n + i1] += horiz[i1 * n + i2];
                }
            }
        }
        let floor = floor * symbol.iter().fold(0.0f64, |m, v| m.max(*v));
        let norm = (n * n) as f64;
        let inverse_symbol = symbol.iter().map(|v| 1.0 / (v.max(floor) * norm)).collect();
        FourierPreconditioner { n, fft, inverse_symbol }
    }

    /// Extreme values of the symbol, an a-priori guess of the frame bounds.
    pub fn symbol_range(&self) -> (f64, f64) {
        let norm = (self.n * self.n) as f64;
        self.inverse_symbol.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
            let s = 1.0 / (v * norm);
            (lo.min(s), hi.max(s))
        })
    }
}

impl Preconditioner for FourierPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let mut buf: Vec<Complex64> = r.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        self.fft.forward(&mut buf);
        for (b, w) in buf.iter_mut().zip(&self.inverse_symbol) {
            *b *= w;
        }
        self.fft.inverse(&mut buf);
        for (zv, b) in z.iter_mut().zip(&buf) {
            *zv = b.re;
        }
    }
}
