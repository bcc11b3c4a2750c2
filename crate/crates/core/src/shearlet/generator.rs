use serde::{Deserialize, Serialize};

use super::cascade::{cascade, wavelet_from, Profile1D, Tabulated};
use super::filters::{vanishing_moments, FilterFamily, FilterPair};
use crate::error::{Error, Result};

fn default_depth() -> u32 {
    10
}
fn default_alpha() -> f64 {
    5.5
}
fn default_gamma() -> f64 {
    4.0
}

/// Serializable description of a generator: filter family, cascade depth
/// and the decay exponents the generator is expected to satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    #[serde(flatten)]
    pub family: FilterFamily,
    #[serde(default = "default_depth")]
    pub depth: u32,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            family: FilterFamily::default(),
            depth: default_depth(),
            alpha: default_alpha(),
            gamma: default_gamma(),
        }
    }
}

/// Separable generators `psi = psi1 (x) psi2`, `psi~ = psi2 (x) psi1`,
/// `phi = psi2 (x) psi2`, each 1-D factor normalized to unit `L2` norm.
/// Coordinates here are the generator's native units.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub config: GeneratorConfig,
    pub filters: FilterPair,
    pub psi1: Profile1D,
    pub psi2: Profile1D,
    /// Number of vanishing moments of `psi1`.
    pub moments: usize,
}

/// Tabulates `psi1` and `psi2` by the cascade algorithm.
pub fn build_generators(config: &GeneratorConfig) -> Result<GeneratorSpec> {
    if !(config.alpha > 5.0) {
        return Err(Error::InvalidArgument(format!("alpha = {} must exceed 5", config.alpha)));
    }
    if !(config.gamma >= 4.0) {
        return Err(Error::InvalidArgument(format!("gamma = {} must be >= 4", config.gamma)));
    }
    if !(2..=14).contains(&config.depth) {
        return Err(Error::InvalidArgument(format!(
            "cascade depth {} not in 2..=14",
            config.depth
        )));
    }
    let filters = config.family.filters()?;
    let moments = vanishing_moments(&filters.highpass);
    if moments < 2 {
        return Err(Error::InsufficientMoments {
            found: moments,
            required: 2,
        });
    }
    let phi = cascade(&filters.lowpass, config.depth + 1)?;
    let psi = wavelet_from(&phi, &filters.highpass);
    let normalize = |t: &Tabulated| t.scaled(1.0 / t.norm_sq().sqrt());
    Ok(GeneratorSpec {
        config: config.clone(),
        psi1: Profile1D::from_fine(&normalize(&psi)),
        psi2: Profile1D::from_fine(&normalize(&phi)),
        filters,
        moments,
    })
}

impl GeneratorSpec {
    pub fn alpha(&self) -> f64 {
        self.config.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.config.gamma
    }

    /// `psi(x1, x2) = psi1(x1) psi2(x2)`
    pub fn psi(&self, x: [f64; 2]) -> f64 {
        self.psi1.eval(x[0]) * self.psi2.eval(x[1])
    }

    /// `psi~(x1, x2) = psi1(x2) psi2(x1)`
    pub fn psi_tilde(&self, x: [f64; 2]) -> f64 {
        self.psi1.eval(x[1]) * self.psi2.eval(x[0])
    }

    /// `phi(x1, x2) = psi2(x1) psi2(x2)`
    pub fn phi(&self, x: [f64; 2]) -> f64 {
        self.psi2.eval(x[0]) * self.psi2.eval(x[1])
    }

    /// Support box of `psi` in native units.
    pub fn psi_support(&self) -> ([f64; 2], [f64; 2]) {
        let (a1, b1) = self.psi1.support();
        let (a2, b2) = self.psi2.support();
        ([a1, a2], [b1, b2])
    }

    pub fn psi_norm_l2(&self) -> f64 {
        (self.psi1.f.norm_sq() * self.psi2.f.norm_sq()).sqrt()
    }

    pub fn psi_norm_l1(&self) -> f64 {
        self.psi1.f.l1_norm() * self.psi2.f.l1_norm()
    }

    /// `int x1^l psi1(x1) dx1` on the tabulation.
    pub fn psi1_moment(&self, l: u32) -> f64 {
        self.psi1.f.moment(l)
    }

    /// `int x1^l psi(S_k (x1, x2)) dx1` for a fixed `x2`, computed by the
    /// exact substitution `t = x1 + k x2` on the tabulation of `psi1`.
    pub fn sheared_moment(&self, l: u32, k: f64, x2: f64) -> f64 {
        let shift = k * x2;
        self.psi1.f.quadrature(|t| (t - shift).powi(l as i32)) * self.psi2.eval(x2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_generator_properties() {
        let g = build_generators(&GeneratorConfig::default()).unwrap();
        assert_eq!(g.moments, 6);
        assert_eq!(g.psi1.support(), (0.0, 5.0));
        assert_eq!(g.psi2.support(), (0.0, 4.0));
        assert_relative_eq!(g.psi_norm_l2(), 1.0, max_relative = 1e-12);
        for l in 0..6 {
            let m = g.psi1_moment(l);
            assert!(m.abs() < 1e-10, "moment {l}: {m}");
        }
        assert!(g.psi1_moment(6).abs() > 1e-6);
    }

    #[test]
    fn two_moment_wavelets_are_accepted() {
        for family in [
            FilterFamily::Spline { order: 4, moments: 2 },
            FilterFamily::Daubechies { order: 2 },
        ] {
            let cfg = GeneratorConfig {
                family,
                ..GeneratorConfig::default()
            };
            let g = build_generators(&cfg).unwrap();
            assert_eq!(g.moments, 2);
            assert!(g.psi1_moment(0).abs() <= 1e-8);
            assert!(g.psi1_moment(1).abs() <= 1e-8);
        }
    }

    #[test]
    fn haar_is_rejected() {
        for family in [
            FilterFamily::Daubechies { order: 1 },
            FilterFamily::Spline { order: 4, moments: 1 },
        ] {
            let cfg = GeneratorConfig {
                family,
                ..GeneratorConfig::default()
            };
            assert_eq!(
                build_generators(&cfg).unwrap_err(),
                Error::InsufficientMoments {
                    found: 1,
                    required: 2
                }
            );
        }
    }

    #[test]
    fn exponents_are_validated() {
        let cfg = GeneratorConfig {
            alpha: 5.0,
            ..GeneratorConfig::default()
        };
        assert!(matches!(build_generators(&cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn sheared_moments_vanish() {
        let g = build_generators(&GeneratorConfig::default()).unwrap();
        let l1 = g.psi_norm_l1();
        for k in -6..=6 {
            for x2 in [0.3, 1.1, 2.0, 3.7] {
                for l in 0..2 {
                    assert!(g.sheared_moment(l, k as f64, x2).abs() <= 1e-8 * l1);
                }
            }
        }
    }
}
