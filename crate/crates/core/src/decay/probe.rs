//! Edge probes: a boundary point, its tangent slope and the dyadic cubes
//! around it.

use std::f64::consts::PI;

use crate::cartoon::{RadiusProfile, Slope};
use crate::error::{Error, Result};

/// Number of uniform boundary samples used for intersection tests.
pub const BOUNDARY_SAMPLES: usize = 8192;

/// Default half-width of the search window, in units of `2^(-j/2)`.
pub const DEFAULT_PADDING: f64 = 3.0;

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    /// Open interiors overlap.
    pub fn overlaps(&self, o: &Rect) -> bool {
        self.lo[0] < o.hi[0] && o.lo[0] < self.hi[0] && self.lo[1] < o.hi[1] && o.lo[1] < self.hi[1]
    }

    pub fn contains_open(&self, x: [f64; 2]) -> bool {
        x[0] > self.lo[0] && x[0] < self.hi[0] && x[1] > self.lo[1] && x[1] < self.hi[1]
    }
}

/// `Q_{j,p} = [-2^(-j/2), 2^(-j/2)]^2 + 2^(-j/2) p`.
pub fn dyadic_cube(j: u32, p: [i64; 2]) -> Rect {
    let h = (-(j as f64) / 2.0).exp2();
    Rect {
        lo: [h * (p[0] as f64 - 1.0), h * (p[1] as f64 - 1.0)],
        hi: [h * (p[0] as f64 + 1.0), h * (p[1] as f64 + 1.0)],
    }
}

/// Uniform samples of the boundary curve.
pub fn boundary_samples(boundary: &RadiusProfile, count: usize) -> Vec<[f64; 2]> {
    (0..count)
        .map(|i| boundary.boundary_point(2.0 * PI * i as f64 / count as f64))
        .collect()
}

/// Tangent slope magnitudes `|dx1/dx2|` at the same samples.
pub fn boundary_slopes(boundary: &RadiusProfile, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            boundary
                .tangent_slope(2.0 * PI * i as f64 / count as f64)
                .map(|s| s.magnitude())
                .unwrap_or(f64::NAN)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProbe {
    pub boundary: RadiusProfile,
    pub theta: f64,
    pub point: [f64; 2],
    pub slope: Slope,
    /// Shearlets must meet the edge within `padding * 2^(-j/2)` of the
    /// cube centre.
    pub padding: f64,
}

impl EdgeProbe {
    pub fn new(boundary: RadiusProfile, theta: f64) -> Result<Self> {
        let slope = boundary.tangent_slope(theta)?;
        let point = boundary.boundary_point(theta);
        Ok(EdgeProbe {
            boundary,
            theta,
            point,
            slope,
            padding: DEFAULT_PADDING,
        })
    }

    pub fn with_padding(mut self, padding: f64) -> Result<Self> {
        if !(padding >= 1.0) {
            return Err(Error::InvalidArgument(format!("padding {padding} below 1")));
        }
        self.padding = padding;
        Ok(self)
    }

    /// Cube index `p` whose cube holds the probe point in its inner half.
    pub fn cube_index(&self, j: u32) -> [i64; 2] {
        let s = (j as f64 / 2.0).exp2();
        [(self.point[0] * s).round() as i64, (self.point[1] * s).round() as i64]
    }

    pub fn cube(&self, j: u32) -> Rect {
        dyadic_cube(j, self.cube_index(j))
    }

    /// Search window: the cube centre padded to `padding * 2^(-j/2)`.
    pub fn window(&self, j: u32) -> Rect {
        let h = (-(j as f64) / 2.0).exp2();
        let p = self.cube_index(j);
        let r = self.padding * h;
        let c = [h * p[0] as f64, h * p[1] as f64];
        Rect {
            lo: [c[0] - r, c[1] - r],
            hi: [c[0] + r, c[1] + r],
        }
    }

    /// `|k + 2^(j/2) s|`, infinite for a horizontal tangent.
    pub fn shear_offset(&self, j: u32, k: i32) -> f64 {
        match self.slope {
            Slope::Finite(s) => (k as f64 + (j as f64 / 2.0).exp2() * s).abs(),
            Slope::Infinite => f64::INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> RadiusProfile {
        RadiusProfile::new(vec![], 0.25, [0.5, 0.5], 1.0).unwrap()
    }

    #[test]
    fn probe_point_lies_inside_its_cubes() {
        for theta in [0.0, 0.3, PI / 2.0, 2.0] {
            let p = EdgeProbe::new(disk(), theta).unwrap();
            for j in 0..10 {
                let c = p.cube(j);
                assert!(c.contains_open(p.point), "j = {j} theta = {theta}");
                let h = (-(j as f64) / 2.0).exp2();
                assert!((c.hi[0] - c.lo[0] - 2.0 * h).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn disk_slopes() {
        let p = EdgeProbe::new(disk(), 0.0).unwrap();
        assert_eq!(p.slope, Slope::Finite(0.0));
        assert_eq!(p.shear_offset(4, -3), 3.0);
        let p = EdgeProbe::new(disk(), PI / 2.0).unwrap();
        assert!(p.slope.is_infinite());
        assert!(p.with_padding(0.5).is_err());
    }

    #[test]
    fn rect_overlap_is_open() {
        let a = Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] };
        let b = Rect { lo: [1.0, 0.0], hi: [2.0, 1.0] };
        assert!(!a.overlaps(&b));
        let c = Rect { lo: [0.5, 0.5], hi: [2.0, 2.0] };
        assert!(a.overlaps(&c));
    }
}
