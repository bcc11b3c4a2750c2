//! Square pixel grids over the unit square and their on-disk formats.
//!
//! Pixel `(i1, i2)` covers `[i1/n, (i1+1)/n] x [i2/n, (i2+1)/n]`; storage is
//! row-major with `x1` as the fast axis, so `data[i2 * n + i1]`.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Magic prefix of the float64 raw grid format.
pub const GRID_MAGIC: &[u8; 8] = b"SHSPGRID";

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn zeros(n: usize) -> Self {
        Grid {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "grid data has {} values, expected {}",
                data.len(),
                n * n
            )));
        }
        Ok(Grid { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i2 in 0..n {
            for i1 in 0..n {
                data.push(f(i1, i2));
            }
        }
        Grid { n, data }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i1: usize, i2: usize) -> f64 {
        self.data[i2 * self.n + i1]
    }

    #[inline]
    pub fn set(&mut self, i1: usize, i2: usize, v: f64) {
        self.data[i2 * self.n + i1] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i2: usize) -> &[f64] {
        &self.data[i2 * self.n..(i2 + 1) * self.n]
    }

    /// Euclidean inner product of the pixel values.
    pub fn dot(&self, other: &Grid) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    /// Squared `L2([0,1]^2)` norm of the piecewise-constant function.
    pub fn l2_norm_sq(&self) -> f64 {
        self.norm_sq() / (self.n * self.n) as f64
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Grid) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn transpose(&self) -> Grid {
        Grid::from_fn(self.n, |i1, i2| self.get(i2, i1))
    }

    /// Float64 raw export: magic, `u32` width, `u32` height, then the values
    /// as little-endian `f64` in storage order.
    pub fn write_raw<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(GRID_MAGIC)?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_raw<R: Read>(mut r: R) -> Result<Grid> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != GRID_MAGIC {
            return Err(Error::Format("bad grid magic".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let width = u32::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let height = u32::from_le_bytes(word) as usize;
        if width != height {
            return Err(Error::Format(format!(
                "non-square grid {width}x{height}"
            )));
        }
        let mut bytes = vec![0u8; width * height * 8];
        r.read_exact(&mut bytes)?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Grid::from_vec(width, data)
    }

    /// Binary 16-bit PGM (P5). Values are mapped linearly from `[min, max]`
    /// onto `[0, 65535]`; the first pixel row written is `i2 = n - 1` so the
    /// picture appears with `x2` pointing up.
    pub fn write_pgm16<W: Write>(&self, mut w: W) -> Result<()> {
        let (lo, hi) = self
            .data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = if hi > lo { hi - lo } else { 1.0 };
        write!(w, "P5\n{} {}\n65535\n", self.n, self.n)?;
        let mut buf = Vec::with_capacity(self.data.len() * 2);
        for i2 in (0..self.n).rev() {
            for &v in self.row(i2) {
                let q = (((v - lo) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16;
                buf.extend_from_slice(&q.to_be_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators; the summation order is fixed
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}
