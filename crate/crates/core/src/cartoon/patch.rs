use serde::{Deserialize, Serialize};

/// Side of the sampling grid used by [`SmoothPatch::c2_norm`].
pub const C2_SAMPLES_PER_AXIS: usize = 128;

/// Value, gradient and Hessian `[d11, d12, d22]` at a point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

impl Jet {
    fn add_scaled(&mut self, s: f64, o: &Jet) {
        self.value += s * o.value;
        self.grad[0] += s * o.grad[0];
        self.grad[1] += s * o.grad[1];
        for i in 0..3 {
            self.hess[i] += s * o.hess[i];
        }
    }
}

/// One summand of a smooth patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PatchTerm {
    /// `amp * exp(-|x - center|^2 / (2 sigma^2))`
    Gaussian {
        amp: f64,
        center: [f64; 2],
        sigma: f64,
    },
    /// `p(x - center) * w(|x - center|)` with `p` given by monomials
    /// `(i, j, coeff)` meaning `coeff * d1^i * d2^j`, and `w` a quintic
    /// smoothstep equal to 1 on `r <= r_inner` and 0 on `r >= r_outer`.
    PolyWindow {
        center: [f64; 2],
        r_inner: f64,
        r_outer: f64,
        monomials: Vec<(u32, u32, f64)>,
    },
}

/// `f(x) = sum of terms`; every term is `C^2` with closed-form derivatives.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SmoothPatch {
    #[serde(default)]
    pub terms: Vec<PatchTerm>,
}

fn powi(x: f64, k: u32) -> f64 {
    x.powi(k as i32)
}

fn monomial_jet(i: u32, j: u32, d: [f64; 2]) -> Jet {
    let (a, b) = (d[0], d[1]);
    let pa = powi(a, i);
    let pb = powi(b, j);
    let da = if i >= 1 { i as f64 * powi(a, i - 1) } else { 0.0 };
    let db = if j >= 1 { j as f64 * powi(b, j - 1) } else { 0.0 };
    let dda = if i >= 2 {
        (i * (i - 1)) as f64 * powi(a, i - 2)
    } else {
        0.0
    };
    let ddb = if j >= 2 {
        (j * (j - 1)) as f64 * powi(b, j - 2)
    } else {
        0.0
    };
    Jet {
        value: pa * pb,
        grad: [da * pb, pa * db],
        hess: [dda * pb, da * db, pa * ddb],
    }
}

/// Quintic smoothstep `S(t) = 6t^5 - 15t^4 + 10t^3` and its first two derivatives.
fn smoothstep(t: f64) -> (f64, f64, f64) {
    let t2 = t * t;
    (
        t2 * t * (10.0 - 15.0 * t + 6.0 * t2),
        30.0 * t2 * (1.0 - t) * (1.0 - t),
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t),
    )
}

fn window_jet(d: [f64; 2], r_inner: f64, r_outer: f64) -> Jet {
    let r = d[0].hypot(d[1]);
    if r <= r_inner {
        return Jet {
            value: 1.0,
            ..Jet::default()
        };
    }
    if r >= r_outer {
        return Jet::default();
    }
    let w = r_outer - r_inner;
    let t = (r_outer - r) / w;
    let (s, s1, s2) = smoothstep(t);
    let wr = -s1 / w;
    let wrr = s2 / (w * w);
    let u = [d[0] / r, d[1] / r];
    Jet {
        value: s,
        grad: [wr * u[0], wr * u[1]],
        hess: [
            wrr * u[0] * u[0] + wr * (1.0 - u[0] * u[0]) / r,
            wrr * u[0] * u[1] - wr * u[0] * u[1] / r,
            wrr * u[1] * u[1] + wr * (1.0 - u[1] * u[1]) / r,
        ],
    }
}

impl PatchTerm {
    pub fn jet(&self, x: [f64; 2]) -> Jet {
        match *self {
            PatchTerm::Gaussian { amp, center, sigma } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let s2 = sigma * sigma;
                let g = amp * (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * s2)).exp();
                Jet {
                    value: g,
                    grad: [-g * d[0] / s2, -g * d[1] / s2],
                    hess: [
                        g * (d[0] * d[0] / s2 - 1.0) / s2,
                        g * d[0] * d[1] / (s2 * s2),
                        g * (d[1] * d[1] / s2 - 1.0) / s2,
                    ],
                }
            }
            PatchTerm::PolyWindow {
                center,
                r_inner,
                r_outer,
                ref monomials,
            } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let w = window_jet(d, r_inner, r_outer);
                if w.value == 0.0 && w.grad == [0.0, 0.0] {
                    return Jet::default();
                }
                let mut p = Jet::default();
                for &(i, j, c) in monomials {
                    p.add_scaled(c, &monomial_jet(i, j, d));
                }
                Jet {
                    value: p.value * w.value,
                    grad: [
                        p.grad[0] * w.value + p.value * w.grad[0],
                        p.grad[1] * w.value + p.value * w.grad[1],
                    ],
                    hess: [
                        p.hess[0] * w.value + 2.0 * p.grad[0] * w.grad[0] + p.value * w.hess[0],
                        p.hess[1] * w.value
                            + p.grad[0] * w.grad[1]
                            + p.grad[1] * w.grad[0]
                            + p.value * w.hess[1],
                        p.hess[2] * w.value + 2.0 * p.grad[1] * w.grad[1] + p.value * w.hess[2],
                    ],
                }
            }
        }
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        match *self {
            PatchTerm::Gaussian { amp, center, sigma } => {
                let d0 = x[0] - center[0];
                let d1 = x[1] - center[1];
                amp * (-(d0 * d0 + d1 * d1) / (2.0 * sigma * sigma)).exp()
            }
            PatchTerm::PolyWindow {
                center,
                r_inner,
                r_outer,
                ref monomials,
            } => {
                let d = [x[0] - center[0], x[1] - center[1]];
                let r = d[0].hypot(d[1]);
                if r >= r_outer {
                    return 0.0;
                }
                let w = if r <= r_inner {
                    1.0
                } else {
                    smoothstep((r_outer - r) / (r_outer - r_inner)).0
                };
                let p: f64 = monomials
                    .iter()
                    .map(|&(i, j, c)| c * powi(d[0], i) * powi(d[1], j))
                    .sum();
                p * w
            }
        }
    }

    fn scaled(&self, s: f64) -> PatchTerm {
        match self.clone() {
            PatchTerm::Gaussian { amp, center, sigma } => PatchTerm::Gaussian {
                amp: amp * s,
                center,
                sigma,
            },
            PatchTerm::PolyWindow {
                center,
                r_inner,
                r_outer,
                monomials,
            } => PatchTerm::PolyWindow {
                center,
                r_inner,
                r_outer,
                monomials: monomials.into_iter().map(|(i, j, c)| (i, j, c * s)).collect(),
            },
        }
    }
}

impl SmoothPatch {
    pub fn zero() -> Self {
        SmoothPatch { terms: vec![] }
    }

    pub fn new(terms: Vec<PatchTerm>) -> Self {
        SmoothPatch { terms }
    }

    /// Constant `kappa` on the whole unit square (a wide plateau window).
    pub fn constant(kappa: f64) -> Self {
        SmoothPatch::new(vec![PatchTerm::PolyWindow {
            center: [0.5, 0.5],
            r_inner: 1.0,
            r_outer: 2.0,
            monomials: vec![(0, 0, kappa)],
        }])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.terms.iter().map(|t| t.value(x)).sum()
    }

    pub fn jet(&self, x: [f64; 2]) -> Jet {
        let mut j = Jet::default();
        for t in &self.terms {
            j.add_scaled(1.0, &t.jet(x));
        }
        j
    }

    pub fn scaled(&self, s: f64) -> SmoothPatch {
        SmoothPatch::new(self.terms.iter().map(|t| t.scaled(s)).collect())
    }

    /// `alpha * self + beta * other`, as a concatenation of scaled terms.
    pub fn combine(&self, alpha: f64, other: &SmoothPatch, beta: f64) -> SmoothPatch {
        let mut terms: Vec<PatchTerm> = self.terms.iter().map(|t| t.scaled(alpha)).collect();
        terms.extend(other.terms.iter().map(|t| t.scaled(beta)));
        SmoothPatch::new(terms)
    }

    /// `sum over |alpha| <= 2 of sup |D^alpha f|`, sampled on a
    /// 128 x 128 grid of pixel centres of the unit square.
    pub fn c2_norm(&self) -> f64 {
        let n = C2_SAMPLES_PER_AXIS;
        let mut m = [0.0f64; 6];
        for i2 in 0..n {
            for i1 in 0..n {
                let x = [(i1 as f64 + 0.5) / n as f64, (i2 as f64 + 0.5) / n as f64];
                let j = self.jet(x);
                let v = [
                    j.value, j.grad[0], j.grad[1], j.hess[0], j.hess[1], j.hess[2],
                ];
                for k in 0..6 {
                    m[k] = m[k].max(v[k].abs());
                }
            }
        }
        m.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sample_patch() -> SmoothPatch {
        SmoothPatch::new(vec![
            PatchTerm::Gaussian {
                amp: 0.3,
                center: [0.4, 0.6],
                sigma: 0.15,
            },
            PatchTerm::PolyWindow {
                center: [0.5, 0.45],
                r_inner: 0.1,
                r_outer: 0.35,
                monomials: vec![(0, 0, 0.5), (1, 0, 0.2), (1, 2, -0.7), (2, 1, 0.4)],
            },
        ])
    }

    #[test]
    fn bump_value_at_center() {
        let p = SmoothPatch::new(vec![PatchTerm::Gaussian {
            amp: 0.5,
            center: [0.3, 0.7],
            sigma: 0.1,
        }]);
        assert_eq!(p.value([0.3, 0.7]), 0.5);
    }

    #[test]
    fn constant_patch() {
        let p = SmoothPatch::constant(0.75);
        assert_eq!(p.value([0.0, 0.0]), 0.75);
        assert_eq!(p.value([1.0, 1.0]), 0.75);
        assert_relative_eq!(p.c2_norm(), 0.75);
    }

    #[test]
    fn value_matches_jet() {
        let p = sample_patch();
        for x in [[0.5, 0.5], [0.3, 0.2], [0.7, 0.45], [0.55, 0.72]] {
            assert_relative_eq!(p.value(x), p.jet(x).value, max_relative = 1e-13);
        }
    }

    #[test]
    fn small_patch_has_small_c2_norm() {
        let p = SmoothPatch::new(vec![PatchTerm::Gaussian {
            amp: 0.002,
            center: [0.5, 0.5],
            sigma: 0.2,
        }]);
        assert!(p.c2_norm() < 1.0);
        assert!(sample_patch().c2_norm() > 1.0);
    }

    proptest! {
        #[test]
        fn derivatives_match_finite_differences(x1 in 0.05..0.95f64, x2 in 0.05..0.95f64) {
            let p = sample_patch();
            let h = 1e-5;
            let j = p.jet([x1, x2]);
            let jx = |dx: f64, dy: f64| p.jet([x1 + dx, x2 + dy]);
            let g0 = (p.value([x1 + h, x2]) - p.value([x1 - h, x2])) / (2.0 * h);
            let g1 = (p.value([x1, x2 + h]) - p.value([x1, x2 - h])) / (2.0 * h);
            prop_assert!((g0 - j.grad[0]).abs() < 1e-6, "{g0} {}", j.grad[0]);
            prop_assert!((g1 - j.grad[1]).abs() < 1e-6, "{g1} {}", j.grad[1]);
            let h11 = (jx(h, 0.0).grad[0] - jx(-h, 0.0).grad[0]) / (2.0 * h);
            let h12 = (jx(0.0, h).grad[0] - jx(0.0, -h).grad[0]) / (2.0 * h);
            let h22 = (jx(0.0, h).grad[1] - jx(0.0, -h).grad[1]) / (2.0 * h);
            prop_assert!((h11 - j.hess[0]).abs() < 1e-5);
            prop_assert!((h12 - j.hess[1]).abs() < 1e-5);
            prop_assert!((h22 - j.hess[2]).abs() < 1e-5);
        }
    }
}
