//! Periodized orthonormal separable 2-D Daubechies wavelet transform.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::shearlet::filters::daubechies_taps;
use crate::transform::FrameOperator;

/// Default filter: six vanishing moments, matching the default `psi1`.
pub const BASELINE_ORDER: usize = 6;

/// Orthonormal 2-D DWT on `n x n` grids. The pyramid stops once the
/// approximation band reaches the filter length (rounded up to a power of
/// two), so the periodized filters stay orthonormal.
#[derive(Debug, Clone)]
pub struct WaveletTransform {
    n: usize,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
    coarsest: usize,
}

impl WaveletTransform {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("grid size {n} is not a power of two")));
        }
        let lowpass = daubechies_taps(order)?.to_vec();
        let l = lowpass.len();
        let highpass = (0..l)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * lowpass[l - 1 - i])
            .collect();
        let coarsest = l.next_power_of_two().max(2).min(n);
        Ok(WaveletTransform {
            n,
            lowpass,
            highpass,
            coarsest,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of decomposition levels.
    pub fn levels(&self) -> usize {
        (self.n.trailing_zeros() - self.coarsest.trailing_zeros()) as usize
    }

    fn step_forward(&self, x: &[f64], out: &mut [f64]) {
        let len = x.len();
        let half = len / 2;
        for i in 0..half {
            let (mut a, mut d) = (0.0, 0.0);
            for (t, (h, g)) in self.lowpass.iter().zip(&self.highpass).enumerate() {
                let v = x[(2 * i + t) % len];
                a += h * v;
                d += g * v;
            }
            out[i] = a;
            out[half + i] = d;
        }
    }

    fn step_inverse(&self, c: &[f64], out: &mut [f64]) {
        let len = c.len();
        let half = len / 2;
        out.fill(0.0);
        for i in 0..half {
            let (a, d) = (c[i], c[half + i]);
            for (t, (h, g)) in self.lowpass.iter().zip(&self.highpass).enumerate() {
                out[(2 * i + t) % len] += h * a + g * d;
            }
        }
    }

    /// Applies `f` to every row then every column of the top-left
    /// `size x size` block.
    fn sweep(&self, data: &mut [f64], size: usize, f: impl Fn(&[f64], &mut [f64])) {
        let n = self.n;
        let mut line = vec![0.0; size];
        let mut res = vec![0.0; size];
        for r in 0..size {
            line.copy_from_slice(&data[r * n..r * n + size]);
            f(&line, &mut res);
            data[r * n..r * n + size].copy_from_slice(&res);
        }
        for c in 0..size {
            for r in 0..size {
                line[r] = data[r * n + c];
            }
            f(&line, &mut res);
            for r in 0..size {
                data[r * n + c] = res[r];
            }
        }
    }

    pub fn forward(&self, g: &Grid) -> Vec<f64> {
        let mut c = vec![0.0; self.n * self.n];
        self.analyze_into(g.as_slice(), &mut c);
        c
    }

    pub fn inverse(&self, c: &[f64]) -> Result<Grid> {
        let mut x = vec![0.0; self.n * self.n];
        self.synthesize_into(c, &mut x);
        Grid::from_vec(self.n, x)
    }
}

impl FrameOperator for WaveletTransform {
    fn signal_len(&self) -> usize {
        self.n * self.n
    }

    fn coeff_len(&self) -> usize {
        self.n * self.n
    }

    fn analyze_into(&self, x: &[f64], c: &mut [f64]) {
        c.copy_from_slice(x);
        let mut size = self.n;
        while size > self.coarsest {
            self.sweep(c, size, |a, b| self.step_forward(a, b));
            size /= 2;
        }
    }

    fn synthesize_into(&self, c: &[f64], x: &mut [f64]) {
        x.copy_from_slice(c);
        let mut size = 2 * self.coarsest;
        while size <= self.n {
            self.sweep(x, size, |a, b| self.step_inverse(a, b));
            size *= 2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_grid(n: usize, seed: u64) -> Grid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Grid::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn parseval_and_perfect_reconstruction() {
        for (n, order) in [(64, 6), (32, 2), (128, 4), (16, 6)] {
            let w = WaveletTransform::new(n, order).unwrap();
            let g = random_grid(n, 3);
            let c = w.forward(&g);
            let e: f64 = c.iter().map(|v| v * v).sum();
            assert!((e - g.norm_sq()).abs() <= 1e-10 * g.norm_sq(), "{n} db{order}");
            let back = w.inverse(&c).unwrap();
            let err = back
                .as_slice()
                .iter()
                .zip(g.as_slice())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-12, "{err}");
        }
    }

    #[test]
    fn polynomials_leave_no_detail_energy() {
        // six vanishing moments annihilate quadratics away from the wrap
        let n = 256;
        let w = WaveletTransform::new(n, 6).unwrap();
        let g = Grid::from_fn(n, |i, _| {
            let x = i as f64 / n as f64;
            1.0 + x - 0.5 * x * x
        });
        let c = w.forward(&g);
        // finest-scale details in the interior of the first detail band
        let half = n / 2;
        let mut interior = 0.0f64;
        for r in 0..half {
            for col in 8..half - 8 {
                interior = interior.max(c[r * n + half + col].abs());
            }
        }
        assert!(interior < 1e-9, "{interior}");
    }

    #[test]
    fn levels_stop_at_filter_length() {
        let w = WaveletTransform::new(512, 6).unwrap();
        assert_eq!(w.levels(), 5);
        assert!(WaveletTransform::new(500, 6).is_err());
    }
}
