//! Cartoon-like images `f = f0 + f1 * chi_B` with star-shaped `B`.

mod patch;
mod profile;
pub mod scenes;

pub use patch::{Jet, PatchTerm, SmoothPatch, C2_SAMPLES_PER_AXIS};
pub use profile::{RadiusProfile, Slope, DEFAULT_RHO_MAX, THETA_SAMPLES};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Default number of subsamples per pixel axis in [`CartoonImage::rasterize`].
pub const DEFAULT_OVERSAMPLE: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartoonImage {
    pub smooth_part: SmoothPatch,
    pub jump_part: SmoothPatch,
    pub boundary: RadiusProfile,
}

impl CartoonImage {
    pub fn new(smooth_part: SmoothPatch, jump_part: SmoothPatch, boundary: RadiusProfile) -> Self {
        CartoonImage {
            smooth_part,
            jump_part,
            boundary,
        }
    }

    /// `f0(x) + f1(x) chi_B(x)`
    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        let mut v = self.smooth_part.value(x);
        if !self.jump_part.is_zero() && self.boundary.contains(x) {
            v += self.jump_part.value(x);
        }
        v
    }

    /// `alpha * self + beta * other`; both images must share the boundary.
    pub fn combine(&self, alpha: f64, other: &CartoonImage, beta: f64) -> Result<CartoonImage> {
        if self.boundary != other.boundary {
            return Err(Error::InvalidArgument(
                "linear combination needs a common boundary set".into(),
            ));
        }
        Ok(CartoonImage {
            smooth_part: self.smooth_part.combine(alpha, &other.smooth_part, beta),
            jump_part: self.jump_part.combine(alpha, &other.jump_part, beta),
            boundary: self.boundary.clone(),
        })
    }

    /// Area-sampled `n x n` raster: every pixel is the mean of
    /// `oversample^2` evaluations on a uniform sub-grid of the pixel.
    pub fn rasterize(&self, n: usize, oversample: usize) -> Result<Grid> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("n = {n} is not a power of two")));
        }
        if oversample == 0 {
            return Err(Error::InvalidArgument("oversample must be >= 1".into()));
        }
        let (rho_lo, rho_hi) = self.boundary.radius_bounds();
        let t = self.boundary.translate;
        let half_diag = std::f64::consts::SQRT_2 / (2.0 * n as f64);
        let inv = 1.0 / (n * oversample) as f64;
        let weight = 1.0 / (oversample * oversample) as f64;
        let has_jump = !self.jump_part.is_zero();
        let has_smooth = !self.smooth_part.is_zero();
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i2, row)| {
            for (i1, px) in row.iter_mut().enumerate() {
                let cx = (i1 as f64 + 0.5) / n as f64;
                let cy = (i2 as f64 + 0.5) / n as f64;
                let d = (cx - t[0]).hypot(cy - t[1]);
                // 1: all inside, 0: all outside, otherwise test each sample
                let class = if d + half_diag < rho_lo {
                    1
                } else if d - half_diag > rho_hi {
                    0
                } else {
                    2
                };
                let mut acc = 0.0;
                for s2 in 0..oversample {
                    let y = ((i2 * oversample + s2) as f64 + 0.5) * inv;
                    for s1 in 0..oversample {
                        let x = [((i1 * oversample + s1) as f64 + 0.5) * inv, y];
                        let mut v = if has_smooth {
                            self.smooth_part.value(x)
                        } else {
                            0.0
                        };
                        if has_jump
                            && (class == 1 || (class == 2 && self.boundary.contains(x)))
                        {
                            v += self.jump_part.value(x);
                        }
                        acc += v;
                    }
                }
                *px = acc * weight;
            }
        });
        Grid::from_vec(n, data)
    }
}
