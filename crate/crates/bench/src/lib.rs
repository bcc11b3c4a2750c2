//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use shearsparse_core::cartoon::scenes;
use shearsparse_core::{build_generators, GeneratorConfig, Grid, ShearletSystem, ShearletTransform, SystemConfig};

/// Pixel-matched transform of size `n` and finest scale `j`, with the
/// rasterized disk scene.
pub fn disk_fixture(n: usize, j: u32) -> (ShearletTransform, Grid) {
    let spec = Arc::new(build_generators(&GeneratorConfig::default()).expect("default generators"));
    let sys = Arc::new(ShearletSystem::new(spec, SystemConfig::pixel_matched(j, n)).expect("system"));
    let t = ShearletTransform::new(sys, n).expect("transform");
    let g = scenes::disk().rasterize(n, 2).expect("raster");
    (t, g)
}
