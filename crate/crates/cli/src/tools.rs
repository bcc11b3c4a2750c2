//! `verify-generators` and `dump-atoms`.

use std::path::Path;
use std::sync::Arc;

use shearsparse_core::shearlet::verify_decay_conditions;
use shearsparse_core::{build_generators, Cone, GeneratorSpec, ShearletIndex, ShearletSystem, SystemConfig};

use crate::config::read_generator_config;
use crate::error::{CliError, Result};

/// Frequency extent and samples per axis of the decay-condition check.
pub const CONDITION_EXTENT: f64 = 64.0;
pub const CONDITION_SAMPLES: usize = 257;

fn load_spec(path: &Path) -> Result<GeneratorSpec> {
    let cfg = read_generator_config(path).map_err(|e| CliError::config("spec", e))?;
    build_generators(&cfg).map_err(|e| CliError::config("spec", e.to_string()))
}

/// Condition table, `psi1` moments and the worst sheared moment residual;
/// fails with the first violated condition.
pub fn verify_generators(path: &Path) -> Result<String> {
    let spec = load_spec(path)?;
    let report = verify_decay_conditions(&spec, CONDITION_EXTENT, CONDITION_SAMPLES)?;
    let mut s = report.to_csv();
    s.push_str(&format!(
        "\nvanishing moments of psi1: {}\nC1 = {:e}, ||h||_1 = {:e}\n\nl,moment,sheared_max\n",
        spec.moments, report.c1, report.h_l1
    ));
    let (lo, hi) = spec.psi2.support();
    for l in 0..=spec.moments as u32 {
        let mut worst = 0.0f64;
        for k in -4..=4 {
            for i in 0..=32 {
                let x2 = lo + (hi - lo) * i as f64 / 32.0;
                worst = worst.max(spec.sheared_moment(l, k as f64 / 4.0, x2).abs());
            }
        }
        s.push_str(&format!("{l},{:e},{worst:e}\n", spec.psi1_moment(l)));
    }
    Ok(s)
}

/// Samples of `psi_{j,k,m}` in the given cone for the translate nearest the
/// middle of its slab: a description line and CSV `i,l,x1,x2,value`.
pub fn dump_atom(path: &Path, j: u32, k: i32, cone: Cone, unit: Option<f64>) -> Result<(String, String)> {
    let spec = load_spec(path)?;
    let mut cfg = SystemConfig::new(j);
    if let Some(u) = unit {
        if !(u > 0.0 && u.is_finite()) {
            return Err(CliError::config("unit", format!("{u} is not positive")));
        }
        cfg.unit = u;
    }
    let sys = ShearletSystem::new(Arc::new(spec), cfg)?;
    let slab = sys
        .slabs()
        .iter()
        .find(|s| s.cone == cone && s.j == j && s.k == k)
        .ok_or_else(|| CliError::config("k", format!("no {} shearlet with j = {j}, k = {k}", cone.name())))?;
    let m = slab.m_of((slab.a_lo + slab.a_hi) / 2, (slab.b_lo + slab.b_hi) / 2);
    let atom = sys.atom(&ShearletIndex { cone, j, k, m })?;
    let info = format!(
        "cone={} j={j} k={k} m=({},{}) weight={:e} norm_sq={:e}",
        cone.name(),
        m[0],
        m[1],
        atom.weight,
        atom.norm_sq()
    );
    let mut s = String::from("i,l,x1,x2,value\n");
    for l in 0..atom.n2 {
        for i in 0..atom.n1 {
            let p = atom.point(i, l);
            s.push_str(&format!("{i},{l},{:e},{:e},{:e}\n", p[0], p[1], atom.values[l * atom.n1 + i]));
        }
    }
    Ok((info, s))
}
