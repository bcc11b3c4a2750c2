//! The standard scene corpus and smooth test patches.

use super::{CartoonImage, PatchTerm, RadiusProfile, SmoothPatch};

/// Jump amplitude window: identically 1 on `B`, decaying to zero with a
/// `C^2` quintic before reaching the border of the unit square.
pub fn unit_jump(boundary: &RadiusProfile) -> SmoothPatch {
    let t = boundary.translate;
    let (_, rho_hi) = boundary.radius_bounds();
    let r_inner = rho_hi + 0.01;
    let room = t[0].min(t[1]).min(1.0 - t[0]).min(1.0 - t[1]) - 0.005;
    let r_outer = room.max(r_inner + 0.01);
    SmoothPatch::new(vec![PatchTerm::PolyWindow {
        center: t,
        r_inner,
        r_outer,
        monomials: vec![(0, 0, 1.0)],
    }])
}

/// Low-amplitude compactly supported smooth background.
pub fn background() -> SmoothPatch {
    SmoothPatch::new(vec![PatchTerm::PolyWindow {
        center: [0.5, 0.5],
        r_inner: 0.0,
        r_outer: 0.42,
        monomials: vec![(0, 0, 0.2), (1, 0, 0.3), (0, 1, -0.15)],
    }])
}

/// Edge-free Gaussian bump used by the smooth-part experiments.
pub fn smooth_bump() -> SmoothPatch {
    SmoothPatch::new(vec![PatchTerm::Gaussian {
        amp: 1.0,
        center: [0.5, 0.5],
        sigma: 0.08,
    }])
}

fn with_boundary(boundary: RadiusProfile) -> CartoonImage {
    let jump = unit_jump(&boundary);
    CartoonImage::new(background(), jump, boundary)
}

/// Disk of radius 0.25 centred in the square.
pub fn disk() -> CartoonImage {
    with_boundary(RadiusProfile::new(vec![], 0.25, [0.5, 0.5], 1.0).expect("valid disk"))
}

/// `rho = 0.3 + 0.03 sin(3 theta) + 0.08 cos(5 theta)`, curvature bound 10.
pub fn star() -> CartoonImage {
    let coeffs = vec![(0.0, 0.0), (0.0, 0.0), (0.0, 0.03), (0.0, 0.0), (0.08, 0.0)];
    with_boundary(RadiusProfile::new(coeffs, 0.3, [0.5, 0.5], 10.0).expect("valid star"))
}

/// Off-centre `rho = 0.2 + 0.05 cos(2 theta)`.
pub fn ellipse() -> CartoonImage {
    with_boundary(
        RadiusProfile::new(vec![(0.0, 0.0), (0.05, 0.0)], 0.2, [0.45, 0.55], 1.0)
            .expect("valid ellipse"),
    )
}

pub fn corpus() -> Vec<(&'static str, CartoonImage)> {
    vec![("disk", disk()), ("star", star()), ("ellipse", ellipse())]
}

pub fn by_name(name: &str) -> Option<CartoonImage> {
    corpus().into_iter().find(|(n, _)| *n == name).map(|(_, f)| f)
}
