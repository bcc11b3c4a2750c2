use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;

use super::coeffs::CoefficientSet;
use super::frame::FrameOperator;
use super::kernel::Kernel;
use crate::error::{Error, Result};
use crate::grid::{dot, Grid};
use crate::shearlet::{Cone, ShearletSystem};

/// Slabs accumulated into one synthesis buffer.
const SYNTH_CHUNK: usize = 8;

/// The digital shearlet transform of a system on an `n x n` pixel grid.
///
/// Coefficients are inner products of the grid, read as a piecewise
/// constant function on `[0,1]^2`, with the atoms; atoms are never
/// periodized. Each slab is a cross-correlation of the grid (transposed
/// for the vertical cone) with one pixel-integrated kernel, sampled at the
/// slab's translation lattice.
#[derive(Debug, Clone)]
pub struct ShearletTransform {
    system: Arc<ShearletSystem>,
    n: usize,
    kernels: Vec<Arc<Kernel>>,
    pos1: Vec<Vec<i64>>,
    pos2: Vec<Vec<i64>>,
    chunks: Vec<Range<usize>>,
}

impl ShearletTransform {
    pub fn new(system: Arc<ShearletSystem>, n: usize) -> Result<Self> {
        let r = system.atom_resolution();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("grid size {n} is not a power of two")));
        }
        if n < r {
            return Err(Error::ResolutionTooCoarse { n, required: r });
        }
        let cells = (n / r) as i64;
        let slabs = system.slabs();
        let mut shapes: Vec<(Cone, u32, i32)> = slabs
            .iter()
            .map(|s| match s.cone {
                Cone::Vertical => (Cone::Horizontal, s.j, s.k),
                c => (c, s.j, s.k),
            })
            .collect();
        shapes.sort();
        shapes.dedup();
        let built: Vec<Arc<Kernel>> = shapes
            .par_iter()
            .map(|&(c, j, k)| Arc::new(Kernel::build(&system, c, j, k, n)))
            .collect();
        let table: HashMap<_, _> = shapes.into_iter().zip(built).collect();
        let mut kernels = Vec::with_capacity(slabs.len());
        let mut pos1 = Vec::with_capacity(slabs.len());
        let mut pos2 = Vec::with_capacity(slabs.len());
        for s in slabs {
            let key = match s.cone {
                Cone::Vertical => (Cone::Horizontal, s.j, s.k),
                c => (c, s.j, s.k),
            };
            kernels.push(table[&key].clone());
            let (st1, st2) = system.steps(s.cone, s.j);
            pos1.push((s.a_lo..=s.a_hi).map(|a| system.snap(st1, a) * cells).collect());
            pos2.push((s.b_lo..=s.b_hi).map(|b| system.snap(st2, b) * cells).collect());
        }
        let mut chunks: Vec<Range<usize>> = Vec::new();
        for (i, s) in slabs.iter().enumerate() {
            let vertical = s.cone == Cone::Vertical;
            match chunks.last_mut() {
                Some(ch)
                    if ch.len() < SYNTH_CHUNK
                        && (slabs[ch.start].cone == Cone::Vertical) == vertical =>
                {
                    ch.end = i + 1
                }
                _ => chunks.push(i..i + 1),
            }
        }
        Ok(ShearletTransform {
            system,
            n,
            kernels,
            pos1,
            pos2,
            chunks,
        })
    }

    pub fn system(&self) -> &Arc<ShearletSystem> {
        &self.system
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Kernel of slab `s`, in the slab's horizontal frame.
    pub fn kernel(&self, s: usize) -> &Kernel {
        &self.kernels[s]
    }

    /// Pixel anchors of slab `s` along `a` and `b`, in the slab's frame.
    pub fn positions(&self, s: usize) -> (&[i64], &[i64]) {
        (&self.pos1[s], &self.pos2[s])
    }

    fn check_grid(&self, g: &Grid) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::InvalidArgument(format!(
                "grid of size {} given to a transform of size {}",
                g.n(),
                self.n
            )));
        }
        Ok(())
    }

    pub fn analyze(&self, g: &Grid) -> Result<CoefficientSet> {
        self.check_grid(g)?;
        let mut c = vec![0.0; self.system.total_count()];
        self.analyze_into(g.as_slice(), &mut c);
        CoefficientSet::from_values(self.system.clone(), c)
    }

    pub fn synthesize(&self, c: &CoefficientSet) -> Result<Grid> {
        if c.len() != self.system.total_count()
            || (!Arc::ptr_eq(c.system(), &self.system) && c.system().slabs() != self.system.slabs())
        {
            return Err(Error::InvalidArgument("coefficients belong to another system".into()));
        }
        let mut out = vec![0.0; self.n * self.n];
        self.synthesize_into(c.values(), &mut out);
        Grid::from_vec(self.n, out)
    }

    pub fn frame_apply(&self, g: &Grid) -> Result<Grid> {
        self.check_grid(g)?;
        let mut out = vec![0.0; self.n * self.n];
        FrameOperator::frame_apply_into(self, g.as_slice(), &mut out);
        Grid::from_vec(self.n, out)
    }

    fn split_slabs<'a>(&self, c: &'a mut [f64]) -> Vec<&'a mut [f64]> {
        let mut parts = Vec::with_capacity(self.system.slabs().len());
        let mut rest = c;
        for s in self.system.slabs() {
            let (head, tail) = rest.split_at_mut(s.len());
            parts.push(head);
            rest = tail;
        }
        parts
    }
}

fn transpose(x: &[f64], n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i2 in 0..n {
        for i1 in 0..n {
            t[i1 * n + i2] = x[i2 * n + i1];
        }
    }
    t
}

fn analyze_slab(g: &[f64], n: usize, ker: &Kernel, p1: &[i64], p2: &[i64], out: &mut [f64]) {
    let na = p1.len();
    let ni = n as i64;
    for (ib, &y0) in p2.iter().enumerate() {
        let acc = &mut out[ib * na..(ib + 1) * na];
        acc.fill(0.0);
        for row in &ker.rows {
            let y = y0 + row.q2;
            if y < 0 || y >= ni {
                continue;
            }
            let grow = &g[y as usize * n..(y as usize + 1) * n];
            let vals = ker.row_values(row);
            for (ia, &x0) in p1.iter().enumerate() {
                let xs = x0 + row.q1;
                let lo = xs.max(0);
                let hi = (xs + row.len as i64).min(ni);
                if lo >= hi {
                    continue;
                }
                acc[ia] += dot(
                    &grow[lo as usize..hi as usize],
                    &vals[(lo - xs) as usize..(hi - xs) as usize],
                );
            }
        }
    }
}

fn synthesize_slab(c: &[f64], n: usize, ker: &Kernel, p1: &[i64], p2: &[i64], out: &mut [f64]) {
    let na = p1.len();
    let ni = n as i64;
    for (ib, &y0) in p2.iter().enumerate() {
        let coef = &c[ib * na..(ib + 1) * na];
        if coef.iter().all(|v| *v == 0.0) {
            continue;
        }
        for row in &ker.rows {
            let y = y0 + row.q2;
            if y < 0 || y >= ni {
                continue;
            }
            let orow = &mut out[y as usize * n..(y as usize + 1) * n];
            let vals = ker.row_values(row);
            for (&x0, &cv) in p1.iter().zip(coef) {
                if cv == 0.0 {
                    continue;
                }
                let xs = x0 + row.q1;
                let lo = xs.max(0);
                let hi = (xs + row.len as i64).min(ni);
                if lo >= hi {
                    continue;
                }
                let seg = &vals[(lo - xs) as usize..(hi - xs) as usize];
                for (o, v) in orow[lo as usize..hi as usize].iter_mut().zip(seg) {
                    *o += cv * v;
                }
            }
        }
    }
}

impl FrameOperator for ShearletTransform {
    fn signal_len(&self) -> usize {
        self.n * self.n
    }

    fn coeff_len(&self) -> usize {
        self.system.total_count()
    }

    fn analyze_into(&self, x: &[f64], c: &mut [f64]) {
        let n = self.n;
        let slabs = self.system.slabs();
        let xt = if slabs.iter().any(|s| s.cone == Cone::Vertical) {
            transpose(x, n)
        } else {
            Vec::new()
        };
        self.split_slabs(c)
            .into_par_iter()
            .enumerate()
            .for_each(|(i, out)| {
                let src = if slabs[i].cone == Cone::Vertical { &xt } else { x };
                analyze_slab(src, n, &self.kernels[i], &self.pos1[i], &self.pos2[i], out);
            });
    }

    fn synthesize_into(&self, c: &[f64], x: &mut [f64]) {
        let n = self.n;
        let slabs = self.system.slabs();
        let parts: Vec<(bool, Vec<f64>)> = self
            .chunks
            .par_iter()
            .map(|ch| {
                let mut buf = vec![0.0; n * n];
                for i in ch.clone() {
                    let s = &slabs[i];
                    let ci = &c[s.offset..s.offset + s.len()];
                    synthesize_slab(ci, n, &self.kernels[i], &self.pos1[i], &self.pos2[i], &mut buf);
                }
                (slabs[ch.start].cone == Cone::Vertical, buf)
            })
            .collect();
        // fixed-order reduction: chunk buffers are summed in slab order
        x.fill(0.0);
        let mut vert: Option<Vec<f64>> = None;
        for (vertical, buf) in parts {
            let dst = if vertical {
                vert.get_or_insert_with(|| vec![0.0; n * n])
            } else {
                &mut *x
            };
            for (d, v) in dst.iter_mut().zip(&buf) {
                *d += v;
            }
        }
        if let Some(v) = vert {
            for i2 in 0..n {
                for i1 in 0..n {
                    x[i2 * n + i1] += v[i1 * n + i2];
                }
            }
        }
    }
}

/// One-shot analysis of `grid` by `system`.
pub fn analyze(grid: &Grid, system: &Arc<ShearletSystem>) -> Result<CoefficientSet> {
    ShearletTransform::new(system.clone(), grid.n())?.analyze(grid)
}

/// One-shot synthesis `T* c` on an `n x n` grid.
pub fn synthesize(coeffs: &CoefficientSet, n: usize) -> Result<Grid> {
    ShearletTransform::new(coeffs.system().clone(), n)?.synthesize(coeffs)
}

/// One-shot frame operator `S g = T* T g`.
pub fn frame_apply(grid: &Grid, system: &Arc<ShearletSystem>) -> Result<Grid> {
    ShearletTransform::new(system.clone(), grid.n())?.frame_apply(grid)
}
