/// A finite frame on a signal space of `signal_len` reals: analysis `T`
/// and its exact adjoint `T*`.
pub trait FrameOperator: Sync {
    fn signal_len(&self) -> usize;
    fn coeff_len(&self) -> usize;
    fn analyze_into(&self, x: &[f64], c: &mut [f64]);
    /// Overwrites `x` with `T* c`.
    fn synthesize_into(&self, c: &[f64], x: &mut [f64]);

    /// `S x = T* T x`.
    fn frame_apply_into(&self, x: &[f64], out: &mut [f64]) {
        let mut c = vec![0.0; self.coeff_len()];
        self.analyze_into(x, &mut c);
        self.synthesize_into(&c, out);
    }
}

/// Approximate inverse of a frame operator, applied to residuals.
pub trait Preconditioner: Sync {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// The union of a frame with itself: every element appears twice.
#[derive(Debug, Clone)]
pub struct DuplicatedFrame<F>(pub F);

impl<F: FrameOperator> FrameOperator for DuplicatedFrame<F> {
    fn signal_len(&self) -> usize {
        self.0.signal_len()
    }

    fn coeff_len(&self) -> usize {
        2 * self.0.coeff_len()
    }

    fn analyze_into(&self, x: &[f64], c: &mut [f64]) {
        let (c1, c2) = c.split_at_mut(self.0.coeff_len());
        self.0.analyze_into(x, c1);
        c2.copy_from_slice(c1);
    }

    fn synthesize_into(&self, c: &[f64], x: &mut [f64]) {
        let (c1, c2) = c.split_at(self.0.coeff_len());
        self.0.synthesize_into(c1, x);
        let mut y = vec![0.0; x.len()];
        self.0.synthesize_into(c2, &mut y);
        for (a, b) in x.iter_mut().zip(&y) {
            *a += b;
        }
    }
}

/// A frame given by an explicit dense matrix (rows are frame elements).
#[derive(Debug, Clone)]
pub struct MatrixFrame {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl FrameOperator for MatrixFrame {
    fn signal_len(&self) -> usize {
        self.cols
    }

    fn coeff_len(&self) -> usize {
        self.rows
    }

    fn analyze_into(&self, x: &[f64], c: &mut [f64]) {
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = crate::grid::dot(&self.data[i * self.cols..(i + 1) * self.cols], x);
        }
    }

    fn synthesize_into(&self, c: &[f64], x: &mut [f64]) {
        x.fill(0.0);
        for (i, ci) in c.iter().enumerate() {
            for (xv, a) in x.iter_mut().zip(&self.data[i * self.cols..(i + 1) * self.cols]) {
                *xv += ci * a;
            }
        }
    }
}
