//! The discrete cone-adapted system and its index set.
//!
//! Generators live in native units; one native unit is `unit` image units,
//! so `psi(y) = unit^-1 psi1(y1/unit) psi2(y2/unit)` on the image plane and
//! `||psi||_2 = 1`. The sampling constant `c` is measured in native units.
//!
//! A horizontal atom is `2^(3j/4) psi(S_k A_(2^j) (x - x_m))` where
//! `x_m = A^-1 S_k^-1 (c unit m)`. In the lattice coordinates
//! `a = m1 - k m2`, `b = m2` this is `x_m = (2^-j c unit a, 2^-(j/2) c unit b)`.
//! Translation points are rounded to the `1/atom_resolution` lattice so that
//! they fall on pixel corners for every grid with `n >= atom_resolution`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::generator::GeneratorSpec;
use crate::error::{Error, Result};

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cone {
    Coarse,
    Horizontal,
    Vertical,
}

impl Cone {
    pub fn code(self) -> u8 {
        match self {
            Cone::Coarse => 0,
            Cone::Horizontal => 1,
            Cone::Vertical => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Cone> {
        match c {
            0 => Some(Cone::Coarse),
            1 => Some(Cone::Horizontal),
            2 => Some(Cone::Vertical),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Cone::Coarse => "coarse",
            Cone::Horizontal => "horizontal",
            Cone::Vertical => "vertical",
        }
    }
}

/// `A_(2^j)` (horizontal) or `A~_(2^j)` (vertical); identity for the coarse part.
pub fn parabolic_matrix(j: u32, cone: Cone) -> Mat2 {
    let a = (j as f64).exp2();
    let b = (j as f64 / 2.0).exp2();
    match cone {
        Cone::Horizontal => [[a, 0.0], [0.0, b]],
        Cone::Vertical => [[b, 0.0], [0.0, a]],
        Cone::Coarse => [[1.0, 0.0], [0.0, 1.0]],
    }
}

/// `S_k` (horizontal) or `S_k^T` (vertical); identity for the coarse part.
pub fn shear_matrix(k: i32, cone: Cone) -> Mat2 {
    let k = k as f64;
    match cone {
        Cone::Horizontal => [[1.0, k], [0.0, 1.0]],
        Cone::Vertical => [[1.0, 0.0], [k, 1.0]],
        Cone::Coarse => [[1.0, 0.0], [0.0, 1.0]],
    }
}

pub fn mat_vec(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// `ceil(2^(j/2))`
pub fn shear_bound(j: u32) -> i32 {
    if j % 2 == 0 {
        1 << (j / 2)
    } else {
        ((j as f64 / 2.0).exp2()).ceil() as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShearletIndex {
    pub cone: Cone,
    pub j: u32,
    pub k: i32,
    pub m: [i64; 2],
}

fn default_c() -> f64 {
    1.0
}
fn default_unit() -> f64 {
    0.125
}
fn default_atom_depth() -> u32 {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Sampling constant in native units.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Finest scale `J`.
    pub j_max: u32,
    /// Image length of one native generator unit.
    #[serde(default = "default_unit")]
    pub unit: f64,
    /// Lattice of translation points, samples per unit length
    /// (default `2^(J+4)`).
    #[serde(default)]
    pub atom_resolution: Option<usize>,
    /// Dyadic depth of the sample grid returned by `atom`.
    #[serde(default = "default_atom_depth")]
    pub atom_depth: u32,
}

impl SystemConfig {
    pub fn new(j_max: u32) -> Self {
        SystemConfig {
            c: default_c(),
            j_max,
            unit: default_unit(),
            atom_resolution: None,
            atom_depth: default_atom_depth(),
        }
    }

    /// Finest-scale native unit of one pixel on an `n x n` grid: `unit = 2^J / n`
    /// and translates snapped to the pixel lattice.
    pub fn pixel_matched(j_max: u32, n: usize) -> Self {
        SystemConfig {
            unit: (j_max as f64).exp2() / n as f64,
            atom_resolution: Some(n),
            ..SystemConfig::new(j_max)
        }
    }
}

/// One `(cone, j, k)` block of translates: a dense rectangle of lattice
/// coordinates `a_lo..=a_hi`, `b_lo..=b_hi`, stored `b`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub cone: Cone,
    pub j: u32,
    pub k: i32,
    pub a_lo: i64,
    pub a_hi: i64,
    pub b_lo: i64,
    pub b_hi: i64,
    pub offset: usize,
}

impl Slab {
    pub fn na(&self) -> usize {
        (self.a_hi - self.a_lo + 1).max(0) as usize
    }

    pub fn nb(&self) -> usize {
        (self.b_hi - self.b_lo + 1).max(0) as usize
    }

    pub fn len(&self) -> usize {
        self.na() * self.nb()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Translation parameter `m` of lattice point `(a, b)`.
    pub fn m_of(&self, a: i64, b: i64) -> [i64; 2] {
        let k = self.k as i64;
        match self.cone {
            Cone::Coarse => [a, b],
            Cone::Horizontal => [a + k * b, b],
            Cone::Vertical => [b, a + k * b],
        }
    }

    /// Inverse of [`Slab::m_of`].
    pub fn lattice_of(&self, m: [i64; 2]) -> (i64, i64) {
        let k = self.k as i64;
        match self.cone {
            Cone::Coarse => (m[0], m[1]),
            Cone::Horizontal => (m[0] - k * m[1], m[1]),
            Cone::Vertical => (m[1] - k * m[0], m[0]),
        }
    }
}

/// Sampled atom: `values[l * n1 + i]` is the atom at
/// `origin + i * e1 + l * e2`; `weight` is the quadrature cell area.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomTabulation {
    pub index: ShearletIndex,
    pub origin: [f64; 2],
    pub e1: [f64; 2],
    pub e2: [f64; 2],
    pub n1: usize,
    pub n2: usize,
    pub values: Vec<f64>,
    pub weight: f64,
    pub support_min: [f64; 2],
    pub support_max: [f64; 2],
}

impl AtomTabulation {
    pub fn point(&self, i: usize, l: usize) -> [f64; 2] {
        [
            self.origin[0] + i as f64 * self.e1[0] + l as f64 * self.e2[0],
            self.origin[1] + i as f64 * self.e1[1] + l as f64 * self.e2[1],
        ]
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.weight
    }
}

#[derive(Debug, Clone)]
pub struct ShearletSystem {
    pub spec: Arc<GeneratorSpec>,
    pub config: SystemConfig,
    resolution: usize,
    slabs: Vec<Slab>,
    total: usize,
}

impl ShearletSystem {
    pub fn new(spec: Arc<GeneratorSpec>, config: SystemConfig) -> Result<Self> {
        if !(config.c > 0.0) {
            return Err(Error::InvalidArgument(format!("c = {} must be positive", config.c)));
        }
        if !(config.unit > 0.0 && config.unit <= 1.0) {
            return Err(Error::InvalidArgument(format!("unit = {} not in (0,1]", config.unit)));
        }
        if config.j_max > 12 {
            return Err(Error::InvalidArgument(format!("J = {} too large", config.j_max)));
        }
        let resolution = config
            .atom_resolution
            .unwrap_or(1usize << (config.j_max + 4));
        if resolution == 0 || !resolution.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "atom_resolution {resolution} must be a power of two"
            )));
        }
        // the finest translation step must span at least one lattice cell
        let finest = config.c * config.unit * (-(config.j_max as f64)).exp2() * resolution as f64;
        if finest < 1.0 - 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "atom_resolution {resolution} cannot separate the finest translates (step {finest} cells)"
            )));
        }
        if config.atom_depth > spec.config.depth {
            return Err(Error::InvalidArgument(format!(
                "atom_depth {} exceeds the cascade depth {}",
                config.atom_depth, spec.config.depth
            )));
        }
        let mut sys = ShearletSystem {
            spec,
            config,
            resolution,
            slabs: vec![],
            total: 0,
        };
        sys.enumerate_slabs();
        Ok(sys)
    }

    pub fn j_max(&self) -> u32 {
        self.config.j_max
    }

    pub fn atom_resolution(&self) -> usize {
        self.resolution
    }

    pub fn slabs(&self) -> &[Slab] {
        &self.slabs
    }

    pub fn total_count(&self) -> usize {
        self.total
    }

    pub fn slab_position(&self, cone: Cone, j: u32, k: i32) -> Option<usize> {
        self.slabs
            .iter()
            .position(|s| s.cone == cone && s.j == j && s.k == k)
    }

    /// Translation step along `(a, b)` in image units, in the slab's own
    /// (horizontal) frame.
    pub fn steps(&self, cone: Cone, j: u32) -> (f64, f64) {
        let cu = self.config.c * self.config.unit;
        match cone {
            Cone::Coarse => (cu, cu),
            _ => (cu * (-(j as f64)).exp2(), cu * (-(j as f64) / 2.0).exp2()),
        }
    }

    /// Snapped translation coordinate, in lattice cells of `1/atom_resolution`.
    pub fn snap(&self, step: f64, a: i64) -> i64 {
        (step * a as f64 * self.resolution as f64).round() as i64
    }

    /// Support box of the atom anchored at the origin, in the slab's
    /// horizontal frame (vertical atoms are the transpose).
    pub fn relative_support(&self, cone: Cone, j: u32, k: i32) -> ([f64; 2], [f64; 2]) {
        let u = self.config.unit;
        let (p0, p1) = self.spec.psi1.support();
        let (q0, q1) = self.spec.psi2.support();
        match cone {
            Cone::Coarse => ([q0 * u, q0 * u], [q1 * u, q1 * u]),
            _ => {
                let s1 = (-(j as f64)).exp2();
                let s2 = (-(j as f64) / 2.0).exp2();
                let k = k as f64;
                // x1 = 2^-j (y1 - k y2), x2 = 2^-(j/2) y2
                let kq = [k * q0 * u, k * q1 * u];
                let kmin = kq[0].min(kq[1]);
                let kmax = kq[0].max(kq[1]);
                (
                    [s1 * (p0 * u - kmax), s2 * q0 * u],
                    [s1 * (p1 * u - kmin), s2 * q1 * u],
                )
            }
        }
    }

    /// Inclusive index range of translates whose box meets `(0, 1)` along one axis.
    fn axis_range(&self, step: f64, lo: f64, hi: f64) -> (i64, i64) {
        let r = self.resolution as f64;
        let pos = |a: i64| self.snap(step, a) as f64 / r;
        let mut first = ((-hi) / step).floor() as i64 - 2;
        while pos(first) + hi <= 0.0 {
            first += 1;
        }
        while pos(first - 1) + hi > 0.0 {
            first -= 1;
        }
        let mut last = ((1.0 - lo) / step).ceil() as i64 + 2;
        while pos(last) + lo >= 1.0 {
            last -= 1;
        }
        while pos(last + 1) + lo < 1.0 {
            last += 1;
        }
        (first, last)
    }

    fn enumerate_slabs(&mut self) {
        let mut slabs = vec![];
        let mut offset = 0;
        let mut push = |cone: Cone, j: u32, k: i32, sys: &ShearletSystem| {
            let (lo, hi) = sys.relative_support(cone, j, k);
            let (s1, s2) = sys.steps(cone, j);
            let (a_lo, a_hi) = sys.axis_range(s1, lo[0], hi[0]);
            let (b_lo, b_hi) = sys.axis_range(s2, lo[1], hi[1]);
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
            offset += slab.len();
            slabs.push(slab);
        };
        push(Cone::Coarse, 0, 0, self);
        for cone in [Cone::Horizontal, Cone::Vertical] {
            for j in 0..=self.config.j_max {
                let kb = shear_bound(j);
                for k in -kb..=kb {
                    push(cone, j, k, self);
                }
            }
        }
        self.slabs = slabs;
        self.total = offset;
    }

    /// All indices in storage order: `(cone, j, k)` as enumerated, then
    /// lattice row `b`, then `a`.
    pub fn enumerate_indices(&self) -> Vec<ShearletIndex> {
        let mut out = Vec::with_capacity(self.total);
        for s in &self.slabs {
            for b in s.b_lo..=s.b_hi {
                for a in s.a_lo..=s.a_hi {
                    out.push(ShearletIndex {
                        cone: s.cone,
                        j: s.j,
                        k: s.k,
                        m: s.m_of(a, b),
                    });
                }
            }
        }
        out
    }

    /// Storage position of an index, if it is enumerated.
    pub fn position_of(&self, idx: &ShearletIndex) -> Option<usize> {
        let s = &self.slabs[self.slab_position(idx.cone, idx.j, idx.k)?];
        let (a, b) = s.lattice_of(idx.m);
        if a < s.a_lo || a > s.a_hi || b < s.b_lo || b > s.b_hi {
            return None;
        }
        Some(s.offset + (b - s.b_lo) as usize * s.na() + (a - s.a_lo) as usize)
    }

    /// Index stored at position `pos`.
    pub fn index_at(&self, pos: usize) -> ShearletIndex {
        let si = self.slabs.partition_point(|s| s.offset + s.len() <= pos);
        let s = &self.slabs[si];
        let r = pos - s.offset;
        let a = s.a_lo + (r % s.na()) as i64;
        let b = s.b_lo + (r / s.na()) as i64;
        ShearletIndex {
            cone: s.cone,
            j: s.j,
            k: s.k,
            m: s.m_of(a, b),
        }
    }

    /// Anchor of lattice point `(a, b)` in lattice cells, in image
    /// coordinates (already transposed for vertical slabs).
    pub fn anchor_cells(&self, slab: &Slab, a: i64, b: i64) -> [i64; 2] {
        let (s1, s2) = self.steps(slab.cone, slab.j);
        let p = [self.snap(s1, a), self.snap(s2, b)];
        match slab.cone {
            Cone::Vertical => [p[1], p[0]],
            _ => p,
        }
    }

    pub fn anchor(&self, idx: &ShearletIndex) -> Result<[f64; 2]> {
        let si = self
            .slab_position(idx.cone, idx.j, idx.k)
            .ok_or_else(|| Error::InvalidArgument(format!("{idx:?} not in the system")))?;
        let s = &self.slabs[si];
        let (a, b) = s.lattice_of(idx.m);
        let c = self.anchor_cells(s, a, b);
        let r = self.resolution as f64;
        Ok([c[0] as f64 / r, c[1] as f64 / r])
    }

    /// Exact support box of `psi_lambda`.
    pub fn support_box(&self, idx: &ShearletIndex) -> Result<([f64; 2], [f64; 2])> {
        let x = self.anchor(idx)?;
        let (lo, hi) = self.relative_support(idx.cone, idx.j, idx.k);
        Ok(match idx.cone {
            Cone::Vertical => ([x[0] + lo[1], x[1] + lo[0]], [x[0] + hi[1], x[1] + hi[0]]),
            _ => ([x[0] + lo[0], x[1] + lo[1]], [x[0] + hi[0], x[1] + hi[1]]),
        })
    }

    /// Point value `psi_lambda(x)`.
    pub fn atom_value(&self, idx: &ShearletIndex, x: [f64; 2]) -> Result<f64> {
        let anchor = self.anchor(idx)?;
        let u = self.config.unit;
        let d = [x[0] - anchor[0], x[1] - anchor[1]];
        let spec = &self.spec;
        Ok(match idx.cone {
            Cone::Coarse => spec.psi2.eval(d[0] / u) * spec.psi2.eval(d[1] / u) / u,
            _ => {
                let d = if idx.cone == Cone::Vertical { [d[1], d[0]] } else { d };
                let j = idx.j as f64;
                let y1 = (j.exp2() * d[0] + idx.k as f64 * (j / 2.0).exp2() * d[1]) / u;
                let y2 = (j / 2.0).exp2() * d[1] / u;
                (0.75 * j).exp2() * spec.psi1.eval(y1) * spec.psi2.eval(y2) / u
            }
        })
    }

    /// Transported generator samples: the generator grid mapped through
    /// `x = x_m + A^-1 S_k^-1 (unit y)`, values scaled by `2^(3j/4) / unit`.
    pub fn atom(&self, idx: &ShearletIndex) -> Result<AtomTabulation> {
        if self.position_of(idx).is_none() {
            return Err(Error::InvalidArgument(format!("{idx:?} is not enumerated")));
        }
        let spec = &self.spec;
        let d = self.config.atom_depth;
        let u = self.config.unit;
        let (f1, f2) = match idx.cone {
            Cone::Coarse => (spec.psi2.f.coarsen(d), spec.psi2.f.coarsen(d)),
            _ => (spec.psi1.f.coarsen(d), spec.psi2.f.coarsen(d)),
        };
        let h = f1.step();
        let j = idx.j as f64;
        let (sa, sb) = match idx.cone {
            Cone::Coarse => (1.0, 1.0),
            _ => (j.exp2(), (j / 2.0).exp2()),
        };
        let amp = match idx.cone {
            Cone::Coarse => 1.0 / u,
            _ => (0.75 * j).exp2() / u,
        };
        let k = if idx.cone == Cone::Coarse { 0.0 } else { idx.k as f64 };
        // horizontal frame: x1 = (y1 - k y2) u / sa, x2 = y2 u / sb
        let mut e1 = [h * u / sa, 0.0];
        let mut e2 = [-k * h * u / sa, h * u / sb];
        let mut o = [
            (f1.start - k * f2.start) * u / sa,
            f2.start * u / sb,
        ];
        if idx.cone == Cone::Vertical {
            e1 = [e1[1], e1[0]];
            e2 = [e2[1], e2[0]];
            o = [o[1], o[0]];
        }
        let anchor = self.anchor(idx)?;
        let origin = [anchor[0] + o[0], anchor[1] + o[1]];
        let (n1, n2) = (f1.values.len(), f2.values.len());
        let mut values = Vec::with_capacity(n1 * n2);
        for l in 0..n2 {
            for i in 0..n1 {
                values.push(amp * f1.values[i] * f2.values[l]);
            }
        }
        let (smin, smax) = self.support_box(idx)?;
        Ok(AtomTabulation {
            index: *idx,
            origin,
            e1,
            e2,
            n1,
            n2,
            values,
            weight: h * h * u * u / (sa * sb),
            support_min: smin,
            support_max: smax,
        })
    }
}
