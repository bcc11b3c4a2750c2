use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::shearlet::{Cone, ShearletIndex, ShearletSystem, Slab};

pub const COEF_MAGIC: &[u8; 8] = b"SHSPCOEF";
pub const COEF_VERSION: u32 = 1;

/// Dense coefficients of a shearlet system, one `(a, b)` rectangle per
/// `(cone, j, k)` slab, laid out in the system's canonical order.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    system: Arc<ShearletSystem>,
    values: Vec<f64>,
}

impl PartialEq for CoefficientSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.system, &other.system) && self.values == other.values
    }
}

impl CoefficientSet {
    pub fn zeros(system: Arc<ShearletSystem>) -> Self {
        let len = system.total_count();
        CoefficientSet {
            system,
            values: vec![0.0; len],
        }
    }

    pub fn from_values(system: Arc<ShearletSystem>, values: Vec<f64>) -> Result<Self> {
        if values.len() != system.total_count() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a system of {}",
                values.len(),
                system.total_count()
            )));
        }
        Ok(CoefficientSet { system, values })
    }

    pub fn system(&self) -> &Arc<ShearletSystem> {
        &self.system
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values of slab `s`, `b`-major.
    pub fn slab(&self, s: usize) -> &[f64] {
        let slab = &self.system.slabs()[s];
        &self.values[slab.offset..slab.offset + slab.len()]
    }

    pub fn slab_mut(&mut self, s: usize) -> &mut [f64] {
        let slab = self.system.slabs()[s].clone();
        &mut self.values[slab.offset..slab.offset + slab.len()]
    }

    pub fn get(&self, idx: &ShearletIndex) -> Option<f64> {
        self.system.position_of(idx).map(|p| self.values[p])
    }

    pub fn set(&mut self, idx: &ShearletIndex, v: f64) -> Result<()> {
        let p = self
            .system
            .position_of(idx)
            .ok_or_else(|| Error::InvalidArgument(format!("{idx:?} not in the system")))?;
        self.values[p] = v;
        Ok(())
    }

    pub fn dot(&self, other: &CoefficientSet) -> f64 {
        crate::grid::dot(&self.values, &other.values)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Iterates `(index, value)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (ShearletIndex, f64)> + '_ {
        self.system.slabs().iter().flat_map(move |s| {
            let vals = &self.values[s.offset..s.offset + s.len()];
            (s.b_lo..=s.b_hi).flat_map(move |b| {
                (s.a_lo..=s.a_hi).map(move |a| {
                    let i = (b - s.b_lo) as usize * s.na() + (a - s.a_lo) as usize;
                    (
                        ShearletIndex {
                            cone: s.cone,
                            j: s.j,
                            k: s.k,
                            m: s.m_of(a, b),
                        },
                        vals[i],
                    )
                })
            })
        })
    }

    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let sys = &self.system;
        w.write_all(COEF_MAGIC)?;
        w.write_all(&COEF_VERSION.to_le_bytes())?;
        w.write_all(&sys.config.c.to_le_bytes())?;
        w.write_all(&sys.j_max().to_le_bytes())?;
        w.write_all(&(sys.slabs().len() as u32).to_le_bytes())?;
        for (i, s) in sys.slabs().iter().enumerate() {
            w.write_all(&[s.cone.code()])?;
            w.write_all(&(s.j as u16).to_le_bytes())?;
            w.write_all(&s.k.to_le_bytes())?;
            for v in [s.a_lo, s.a_hi, s.b_lo, s.b_hi] {
                w.write_all(&v.to_le_bytes())?;
            }
            let mut buf = Vec::with_capacity(8 * s.len());
            for v in self.slab(i) {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    /// Reads a dump and checks that it belongs to `system`.
    pub fn read_dump<R: Read>(system: Arc<ShearletSystem>, r: R) -> Result<Self> {
        let dump = CoefficientDump::read(r)?;
        if dump.c.to_bits() != system.config.c.to_bits() || dump.j_max != system.j_max() {
            return Err(Error::Format(format!(
                "dump has c = {}, J = {}; system has c = {}, J = {}",
                dump.c,
                dump.j_max,
                system.config.c,
                system.j_max()
            )));
        }
        if dump.slabs.len() != system.slabs().len() {
            return Err(Error::Format(format!(
                "dump has {} slabs, system has {}",
                dump.slabs.len(),
                system.slabs().len()
            )));
        }
        let mut values = Vec::with_capacity(system.total_count());
        for ((h, v), s) in dump.slabs.iter().zip(system.slabs()) {
            if (h.cone, h.j, h.k, h.a_lo, h.a_hi, h.b_lo, h.b_hi)
                != (s.cone, s.j, s.k, s.a_lo, s.a_hi, s.b_lo, s.b_hi)
            {
                return Err(Error::Format(format!(
                    "slab {:?} j={} k={} does not match the system",
                    h.cone, h.j, h.k
                )));
            }
            values.extend_from_slice(v);
        }
        CoefficientSet::from_values(system, values)
    }
}

/// System-independent contents of a coefficient dump.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientDump {
    pub c: f64,
    pub j_max: u32,
    pub slabs: Vec<(Slab, Vec<f64>)>,
}

impl CoefficientDump {
    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != COEF_MAGIC {
            return Err(Error::Format("not a coefficient dump".into()));
        }
        let version = read_u32(&mut r)?;
        if version != COEF_VERSION {
            return Err(Error::Format(format!("unsupported dump version {version}")));
        }
        let c = f64::from_le_bytes(read_arr(&mut r)?);
        let j_max = read_u32(&mut r)?;
        let count = read_u32(&mut r)? as usize;
        let mut slabs = Vec::with_capacity(count.min(1 << 16));
        let mut offset = 0;
        for _ in 0..count {
            let [code] = read_arr::<1, _>(&mut r)?;
            let cone = Cone::from_code(code).ok_or_else(|| Error::Format(format!("bad cone code {code}")))?;
            let j = u16::from_le_bytes(read_arr(&mut r)?) as u32;
            let k = i32::from_le_bytes(read_arr(&mut r)?);
            let mut rng = [0i64; 4];
            for v in &mut rng {
                *v = i64::from_le_bytes(read_arr(&mut r)?);
            }
            let [a_lo, a_hi, b_lo, b_hi] = rng;
            if a_hi < a_lo || b_hi < b_lo {
                return Err(Error::Format("empty slab range".into()));
            }
            let slab = Slab {
                cone,
                j,
                k,
                a_lo,
                a_hi,
                b_lo,
                b_hi,
                offset,
            };
            let len = slab.len();
            let mut bytes = vec![0u8; 8 * len];
            r.read_exact(&mut bytes)?;
            let vals = bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            offset += len;
            slabs.push((slab, vals));
        }
        Ok(CoefficientDump { c, j_max, slabs })
    }
}

fn read_arr<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_arr(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shearlet::{build_generators, GeneratorConfig, SystemConfig};

    fn system(j: u32) -> Arc<ShearletSystem> {
        let spec = build_generators(&GeneratorConfig {
            depth: 6,
            ..GeneratorConfig::default()
        })
        .unwrap();
        Arc::new(ShearletSystem::new(Arc::new(spec), SystemConfig::new(j)).unwrap())
    }

    #[test]
    fn dump_round_trip_is_bit_exact() {
        let sys = system(2);
        let vals: Vec<f64> = (0..sys.total_count())
            .map(|i| (i as f64 * 0.37).sin() * 1e-3 + if i % 7 == 0 { f64::MIN_POSITIVE } else { 0.0 })
            .collect();
        let c = CoefficientSet::from_values(sys.clone(), vals).unwrap();
        let mut buf = Vec::new();
        c.write_dump(&mut buf).unwrap();
        let back = CoefficientSet::read_dump(sys.clone(), buf.as_slice()).unwrap();
        assert!(c.values().iter().zip(back.values()).all(|(a, b)| a.to_bits() == b.to_bits()));
        let mut again = Vec::new();
        back.write_dump(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn dump_rejects_foreign_system_and_garbage() {
        let c = CoefficientSet::zeros(system(2));
        let mut buf = Vec::new();
        c.write_dump(&mut buf).unwrap();
        assert!(matches!(CoefficientSet::read_dump(system(3), buf.as_slice()), Err(Error::Format(_))));
        assert!(matches!(CoefficientDump::read(&b"SHSPGRID...."[..]), Err(Error::Format(_))));
        assert!(matches!(CoefficientDump::read(&buf[..buf.len() - 3]), Err(Error::Io(_))));
    }

    #[test]
    fn iteration_follows_storage_order() {
        let sys = system(2);
        let vals: Vec<f64> = (0..sys.total_count()).map(|i| i as f64).collect();
        let c = CoefficientSet::from_values(sys.clone(), vals).unwrap();
        for (i, (idx, v)) in c.iter().enumerate().step_by(97) {
            assert_eq!(v, i as f64);
            assert_eq!(sys.position_of(&idx), Some(i));
        }
    }
}
