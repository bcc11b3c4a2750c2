//! Pixel-integrated atom kernels.
//!
//! A kernel holds `K[q] = int_{pixel q} psi_lambda(x_m + x) dx` for pixels `q`
//! relative to the anchor pixel of the translate. The `x1` integral is exact
//! through the antiderivative of the first factor; `x2` uses 6-point
//! Gauss-Legendre on each pixel row.

use crate::shearlet::{Cone, Profile1D, ShearletSystem};

const GL_NODES: [f64; 6] = [
    -0.932_469_514_203_152_1,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152_1,
];
const GL_WEIGHTS: [f64; 6] = [
    0.171_324_492_379_170_3,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691_0,
    0.467_913_934_572_691_0,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_3,
];

#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    pub q2: i64,
    pub q1: i64,
    pub start: usize,
    pub len: usize,
}

/// Sparse kernel stored as contiguous row segments, in the slab's
/// horizontal frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Kernel {
    pub rows: Vec<KernelRow>,
    pub values: Vec<f64>,
}

/// Affine description `amp * f1(s1 x1 + sh x2) * f2(s2 x2)` of an atom
/// anchored at the origin.
struct AtomShape<'a> {
    f1: &'a Profile1D,
    f2: &'a Profile1D,
    amp: f64,
    s1: f64,
    sh: f64,
    s2: f64,
}

impl Kernel {
    /// Kernel of the `(cone, j, k)` slab on an `n x n` grid; vertical slabs
    /// share the horizontal kernel (they act on the transposed image).
    pub fn build(system: &ShearletSystem, cone: Cone, j: u32, k: i32, n: usize) -> Kernel {
        let spec = &system.spec;
        let u = system.config.unit;
        let jf = j as f64;
        let shape = match cone {
            Cone::Coarse => AtomShape {
                f1: &spec.psi2,
                f2: &spec.psi2,
                amp: 1.0 / u,
                s1: 1.0 / u,
                sh: 0.0,
                s2: 1.0 / u,
            },
            _ => AtomShape {
                f1: &spec.psi1,
                f2: &spec.psi2,
                amp: (0.75 * jf).exp2() / u,
                s1: jf.exp2() / u,
                sh: k as f64 * (jf / 2.0).exp2() / u,
                s2: (jf / 2.0).exp2() / u,
            },
        };
        let (lo, hi) = system.relative_support(cone, j, k);
        build_shape(&shape, lo[1], hi[1], n)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_values(&self, r: &KernelRow) -> &[f64] {
        &self.values[r.start..r.start + r.len]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Bounding box `(q1_min, q2_min, width, height)` of the stored pixels.
    pub fn extent(&self) -> (i64, i64, usize, usize) {
        if self.rows.is_empty() {
            return (0, 0, 0, 0);
        }
        let q1_min = self.rows.iter().map(|r| r.q1).min().unwrap();
        let q1_max = self.rows.iter().map(|r| r.q1 + r.len as i64).max().unwrap();
        let q2_min = self.rows.first().unwrap().q2;
        let q2_max = self.rows.last().unwrap().q2 + 1;
        (q1_min, q2_min, (q1_max - q1_min) as usize, (q2_max - q2_min) as usize)
    }
}

fn build_shape(s: &AtomShape<'_>, lo2: f64, hi2: f64, n: usize) -> Kernel {
    let nf = n as f64;
    let (p0, p1) = s.f1.support();
    let mut kernel = Kernel::default();
    let q2_first = (lo2 * nf).floor() as i64;
    let q2_last = (hi2 * nf).ceil() as i64 - 1;
    let mut bounds: Vec<f64> = Vec::new();
    for q2 in q2_first..=q2_last {
        let y_lo = (q2 as f64 / nf).max(lo2);
        let y_hi = ((q2 + 1) as f64 / nf).min(hi2);
        if y_hi <= y_lo {
            continue;
        }
        // x1 extent over the row: the support of f1 slides with x2
        let e = |x2: f64| ((p0 - s.sh * x2) / s.s1, (p1 - s.sh * x2) / s.s1);
        let (a0, b0) = e(y_lo);
        let (a1, b1) = e(y_hi);
        let x1_min = a0.min(a1);
        let x1_max = b0.max(b1);
        let q1_first = (x1_min * nf - 1e-9).floor() as i64;
        let q1_last = (x1_max * nf + 1e-9).ceil() as i64 - 1;
        let cols = (q1_last - q1_first + 1) as usize;
        let mut row = vec![0.0; cols];
        let half = 0.5 * (y_hi - y_lo);
        let mid = 0.5 * (y_hi + y_lo);
        for (t, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            let x2 = mid + half * t;
            let f2v = s.f2.eval(s.s2 * x2);
            if f2v == 0.0 {
                continue;
            }
            let off = s.sh * x2;
            bounds.clear();
            bounds.extend(
                (0..=cols).map(|c| s.f1.eval_integral(s.s1 * ((q1_first + c as i64) as f64 / nf) + off)),
            );
            let wf = w * half * f2v;
            for c in 0..cols {
                row[c] += wf * (bounds[c + 1] - bounds[c]);
            }
        }
        let scale = s.amp / s.s1;
        // drop exact zeros at the segment ends
        let first = row.iter().position(|v| *v != 0.0);
        let last = row.iter().rposition(|v| *v != 0.0);
        if let (Some(f), Some(l)) = (first, last) {
            let start = kernel.values.len();
            kernel.values.extend(row[f..=l].iter().map(|v| v * scale));
            kernel.rows.push(KernelRow {
                q2,
                q1: q1_first + f as i64,
                start,
                len: l - f + 1,
            });
        }
    }
    kernel
}
