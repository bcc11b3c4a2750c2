use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of uniform angle samples used when validating a profile.
pub const THETA_SAMPLES: usize = 4096;

/// Default bound on the radius.
pub const DEFAULT_RHO_MAX: f64 = 0.45;

/// Slope of a boundary tangent, `dx1/dx2` along the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slope {
    Finite(f64),
    /// Horizontal tangent (`dx2 = 0`).
    Infinite,
}

impl Slope {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Slope::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Slope::Finite(s) => Some(s),
            Slope::Infinite => None,
        }
    }

    /// `|s|`, with `+inf` for a horizontal tangent.
    pub fn magnitude(&self) -> f64 {
        match *self {
            Slope::Finite(s) => s.abs(),
            Slope::Infinite => f64::INFINITY,
        }
    }
}

/// Radius function `rho(theta) = r0 + sum_m (a_m cos(m theta) + b_m sin(m theta))`
/// of a star-shaped set translated to `translate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusProfile {
    /// `(a_m, b_m)` for harmonics `m = 1, 2, ...`.
    pub fourier_coeffs: Vec<(f64, f64)>,
    pub base_radius: f64,
    pub translate: [f64; 2],
    pub nu: f64,
    pub rho_max: f64,
}

impl RadiusProfile {
    /// Builds and validates a profile with the default radius bound.
    pub fn new(
        coeffs: Vec<(f64, f64)>,
        base_radius: f64,
        translate: [f64; 2],
        nu: f64,
    ) -> Result<Self> {
        Self::with_rho_max(coeffs, base_radius, translate, nu, DEFAULT_RHO_MAX)
    }

    pub fn with_rho_max(
        coeffs: Vec<(f64, f64)>,
        base_radius: f64,
        translate: [f64; 2],
        nu: f64,
        rho_max: f64,
    ) -> Result<Self> {
        if !(base_radius > 0.0 && base_radius < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "base_radius {base_radius} not in (0,1)"
            )));
        }
        if !(nu > 0.0) {
            return Err(Error::InvalidArgument(format!("nu {nu} must be positive")));
        }
        if !(rho_max > 0.0 && rho_max < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rho_max {rho_max} not in (0,1)"
            )));
        }
        let p = RadiusProfile {
            fourier_coeffs: coeffs,
            base_radius,
            translate,
            nu,
            rho_max,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks the class invariants by dense uniform sampling of `theta`.
    pub fn validate(&self) -> Result<()> {
        let sampled = self.sampled_curvature_bound();
        if sampled > self.nu {
            return Err(Error::CurvatureExceeded {
                sampled,
                nu: self.nu,
            });
        }
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        let mut rho_lo = f64::INFINITY;
        let mut rho_hi = f64::NEG_INFINITY;
        for i in 0..THETA_SAMPLES {
            let theta = 2.0 * PI * i as f64 / THETA_SAMPLES as f64;
            let r = self.rho(theta);
            rho_lo = rho_lo.min(r);
            rho_hi = rho_hi.max(r);
            let p = self.boundary_point(theta);
            for d in 0..2 {
                min[d] = min[d].min(p[d]);
                max[d] = max[d].max(p[d]);
            }
        }
        if min[0] < 0.0 || min[1] < 0.0 || max[0] > 1.0 || max[1] > 1.0 {
            return Err(Error::OutOfUnitSquare { min, max });
        }
        if rho_lo <= 0.0 {
            return Err(Error::InvalidProfile(format!(
                "radius reaches {rho_lo} <= 0"
            )));
        }
        if rho_hi > self.rho_max {
            return Err(Error::InvalidProfile(format!(
                "radius reaches {rho_hi} > rho_max = {}",
                self.rho_max
            )));
        }
        Ok(())
    }

    /// `max |rho''|` over the uniform validation grid.
    pub fn sampled_curvature_bound(&self) -> f64 {
        (0..THETA_SAMPLES)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / THETA_SAMPLES as f64;
                self.rho_dd(theta).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn rho(&self, theta: f64) -> f64 {
        let mut r = self.base_radius;
        for (i, &(a, b)) in self.fourier_coeffs.iter().enumerate() {
            let m = (i + 1) as f64;
            let (s, c) = (m * theta).sin_cos();
            r += a * c + b * s;
        }
        r
    }

    pub fn rho_d(&self, theta: f64) -> f64 {
        let mut r = 0.0;
        for (i, &(a, b)) in self.fourier_coeffs.iter().enumerate() {
            let m = (i + 1) as f64;
            let (s, c) = (m * theta).sin_cos();
            r += m * (b * c - a * s);
        }
        r
    }

    pub fn rho_dd(&self, theta: f64) -> f64 {
        let mut r = 0.0;
        for (i, &(a, b)) in self.fourier_coeffs.iter().enumerate() {
            let m = (i + 1) as f64;
            let (s, c) = (m * theta).sin_cos();
            r -= m * m * (a * c + b * s);
        }
        r
    }

    /// Guaranteed bounds `lo <= rho(theta) <= hi` for every angle.
    pub fn radius_bounds(&self) -> (f64, f64) {
        let amp: f64 = self
            .fourier_coeffs
            .iter()
            .map(|&(a, b)| a.hypot(b))
            .sum();
        (self.base_radius - amp, self.base_radius + amp)
    }

    /// `beta(theta) + translate`.
    pub fn boundary_point(&self, theta: f64) -> [f64; 2] {
        let r = self.rho(theta);
        let (s, c) = theta.sin_cos();
        [self.translate[0] + r * c, self.translate[1] + r * s]
    }

    /// Derivative of the boundary curve with respect to `theta`.
    pub fn boundary_tangent(&self, theta: f64) -> [f64; 2] {
        let r = self.rho(theta);
        let rd = self.rho_d(theta);
        let (s, c) = theta.sin_cos();
        [rd * c - r * s, rd * s + r * c]
    }

    /// Membership in the closed set `B`.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        let d0 = x[0] - self.translate[0];
        let d1 = x[1] - self.translate[1];
        let r = d0.hypot(d1);
        if r == 0.0 {
            return true;
        }
        // relative slack of a few ulps keeps sampled boundary points inside
        r <= self.rho(d1.atan2(d0)) * (1.0 + 1e-12)
    }

    /// Tangent slope `dx1/dx2` at `theta`.
    pub fn tangent_slope(&self, theta: f64) -> Result<Slope> {
        let t = self.boundary_tangent(theta);
        let norm = t[0].hypot(t[1]);
        if !(norm > 0.0) {
            return Err(Error::DegenerateTangent { theta });
        }
        if t[1].abs() <= 1e-12 * norm {
            Ok(Slope::Infinite)
        } else {
            Ok(Slope::Finite(t[0] / t[1]))
        }
    }

    /// Angle of a point relative to the translate, in `[0, 2 pi)`.
    pub fn angle_of(&self, x: [f64; 2]) -> f64 {
        let a = (x[1] - self.translate[1]).atan2(x[0] - self.translate[0]);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }
}
