//! Separable compactly supported generators and the cone-adapted system.

pub mod cascade;
pub mod conditions;
pub mod filters;
pub mod generator;
pub mod system;

pub use cascade::{Profile1D, Tabulated};
pub use conditions::{verify_decay_conditions, BandLimitedMock, DecayReport, DecayRow, SeparableSpectrum};
pub use filters::{FilterFamily, FilterPair};
pub use generator::{build_generators, GeneratorConfig, GeneratorSpec};
pub use system::{
    parabolic_matrix, shear_bound, shear_matrix, AtomTabulation, Cone, Mat2, ShearletIndex,
    ShearletSystem, Slab, SystemConfig,
};
