//! Compactly supported cone-adapted shearlet frames, cartoon-like images
//! and sparse N-term approximation experiments.

pub mod approximation;
pub mod cartoon;
pub mod decay;
pub mod error;
pub mod grid;
pub mod shearlet;
pub mod transform;

pub use cartoon::{CartoonImage, RadiusProfile, SmoothPatch};
pub use error::{Error, Result};
pub use grid::Grid;
pub use shearlet::{build_generators, Cone, GeneratorConfig, GeneratorSpec, ShearletIndex, ShearletSystem, SystemConfig};
pub use transform::{CoefficientSet, FrameBounds, ShearletTransform, SolverOptions};
