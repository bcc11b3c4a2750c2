//! Analysis, synthesis, the frame operator and dual-frame reconstruction.

pub mod coeffs;
pub mod fft;
pub mod frame;
pub mod kernel;
pub mod ops;
pub mod solver;

pub use coeffs::{CoefficientDump, CoefficientSet};
pub use fft::{fft_correlate, FourierPreconditioner};
pub use frame::{DuplicatedFrame, FrameOperator, IdentityPreconditioner, MatrixFrame, Preconditioner};
pub use kernel::Kernel;
pub use ops::{analyze, frame_apply, synthesize, ShearletTransform};
pub use solver::{
    conjugate_residual, dual_reconstruct, dual_reconstruct_with, estimate_frame_bounds,
    estimate_frame_bounds_plain, estimate_frame_bounds_with, FrameBounds, Reconstruction, SolveReport,
    SolverOptions,
};

#[cfg(test)]
mod tests;
