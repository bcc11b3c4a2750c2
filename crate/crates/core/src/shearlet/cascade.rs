//! Cascade-algorithm tabulation of refinable functions on dyadic grids.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Samples `values[i] = f(start + i * 2^-depth)`; `f` vanishes outside
/// `[start, start + (len - 1) * 2^-depth]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    pub start: f64,
    pub depth: u32,
    pub values: Vec<f64>,
}

impl Tabulated {
    #[inline]
    pub fn step(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    pub fn end(&self) -> f64 {
        self.start + (self.values.len() - 1) as f64 * self.step()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.start, self.end())
    }

    /// Sample at grid point `i`, zero outside the table.
    #[inline]
    pub fn at(&self, i: isize) -> f64 {
        if i < 0 || i as usize >= self.values.len() {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    /// Four-point Lagrange interpolation; zero outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x <= a || x >= b {
            return if x == a { self.values[0] } else if x == b { *self.values.last().unwrap() } else { 0.0 };
        }
        let u = (x - self.start) / self.step();
        let i = u.floor() as isize;
        let t = u - i as f64;
        let (p0, p1, p2, p3) = (self.at(i - 1), self.at(i), self.at(i + 1), self.at(i + 2));
        // cubic through t = -1, 0, 1, 2
        let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3
    }

    /// Riemann/trapezoid sum `sum_i w(x_i) f(x_i) h` (the end values are
    /// zero for continuous compactly supported `f`).
    pub fn quadrature(&self, w: impl Fn(f64) -> f64) -> f64 {
        let h = self.step();
        let n = self.values.len();
        let mut s = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let wt = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            s += wt * v * w(self.start + i as f64 * h);
        }
        s * h
    }

    pub fn norm_sq(&self) -> f64 {
        let h = self.step();
        let n = self.values.len();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 0 || i == n - 1 { 0.5 * v * v } else { v * v })
            .sum::<f64>()
            * h
    }

    pub fn l1_norm(&self) -> f64 {
        self.quadrature_abs()
    }

    fn quadrature_abs(&self) -> f64 {
        let n = self.values.len();
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 0 || i == n - 1 { 0.5 * v.abs() } else { v.abs() })
            .sum::<f64>()
            * self.step()
    }

    pub fn moment(&self, l: u32) -> f64 {
        self.quadrature(|x| x.powi(l as i32))
    }

    pub fn scaled(&self, s: f64) -> Tabulated {
        Tabulated {
            start: self.start,
            depth: self.depth,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Keep every `2^(depth - d)`-th sample.
    pub fn coarsen(&self, d: u32) -> Tabulated {
        assert!(d <= self.depth);
        let stride = 1usize << (self.depth - d);
        Tabulated {
            start: self.start,
            depth: d,
            values: self.values.iter().step_by(stride).copied().collect(),
        }
    }
}

/// Values of the refinable function `phi = sum h_n phi(2 . - n)` at the
/// integers `0..len(h)-1`, normalized to sum 1 (partition of unity).
pub fn integer_values(h: &[f64]) -> Result<Vec<f64>> {
    let l = h.len();
    if l < 2 {
        return Err(Error::InvalidArgument("refinement filter needs >= 2 taps".into()));
    }
    // phi(i) = sum_k h_{2i-k} phi(k), plus sum_k phi(k) = 1
    let mut a = DMatrix::<f64>::zeros(l + 1, l);
    for i in 0..l {
        for k in 0..l {
            let idx = 2 * i as isize - k as isize;
            if idx >= 0 && (idx as usize) < l {
                a[(i, k)] = h[idx as usize];
            }
        }
        a[(i, i)] -= 1.0;
    }
    for k in 0..l {
        a[(l, k)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(l + 1);
    b[l] = 1.0;
    let svd = a.clone().svd(true, true);
    let v = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidArgument(format!("integer-value solve failed: {e}")))?;
    let resid = (&a * &v - &b).norm();
    if resid > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "refinement filter has no continuous solution (residual {resid:e})"
        )));
    }
    Ok(v.iter().copied().collect())
}

/// Cascade tabulation of `phi` at spacing `2^-depth`, support `[0, len(h)-1]`.
pub fn cascade(h: &[f64], depth: u32) -> Result<Tabulated> {
    let l = h.len();
    let mut vals = integer_values(h)?;
    for d in 0..depth {
        // level d has 2^d (l-1) + 1 samples; phi(m/2^(d+1)) = sum_n h_n phi(m/2^d - n)
        let prev = vals;
        let scale = 1usize << d;
        let count = (scale << 1) * (l - 1) + 1;
        let mut next = vec![0.0; count];
        for (m, out) in next.iter_mut().enumerate() {
            let mut s = 0.0;
            for (n, hn) in h.iter().enumerate() {
                let idx = m as isize - (n * scale) as isize;
                if idx >= 0 && (idx as usize) < prev.len() {
                    s += hn * prev[idx as usize];
                }
            }
            *out = s;
        }
        vals = next;
    }
    Ok(Tabulated {
        start: 0.0,
        depth,
        values: vals,
    })
}

/// `psi(x) = sum_n g_n phi(2x - n)` sampled on the grid of `phi`
/// (requires `phi.depth >= 1`); support `[0, (len(h) - 1 + len(g) - 1) / 2]`.
pub fn wavelet_from(phi: &Tabulated, g: &[f64]) -> Tabulated {
    assert!(phi.depth >= 1);
    let d = phi.depth;
    let per_unit = 1usize << d;
    let lh = (phi.values.len() - 1) / per_unit; // support length of phi
    let total_half_units = lh + g.len() - 1;
    let count = total_half_units * per_unit / 2 + 1;
    let mut values = vec![0.0; count];
    for (m, out) in values.iter_mut().enumerate() {
        // psi(m / 2^d) = sum_n g_n phi((2m - n 2^d) / 2^d)
        let mut s = 0.0;
        for (n, gn) in g.iter().enumerate() {
            let idx = 2 * m as isize - (n * per_unit) as isize;
            s += gn * phi.at(idx);
        }
        *out = s;
    }
    Tabulated {
        start: 0.0,
        depth: d,
        values,
    }
}

/// Antiderivative `F(x) = int_{-inf}^x f`, sampled at the coarse grid of
/// `fine.depth - 1` by composite Simpson on `fine`.
pub fn antiderivative(fine: &Tabulated) -> Tabulated {
    assert!(fine.depth >= 1);
    let h = fine.step();
    let n = (fine.values.len() - 1) / 2;
    let mut values = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    values.push(0.0);
    for i in 0..n {
        let (a, b, c) = (fine.values[2 * i], fine.values[2 * i + 1], fine.values[2 * i + 2]);
        acc += h / 3.0 * (a + 4.0 * b + c);
        values.push(acc);
    }
    Tabulated {
        start: fine.start,
        depth: fine.depth - 1,
        values,
    }
}

/// A tabulated generator together with its antiderivative, evaluated by
/// cubic Hermite interpolation (the derivative of `F` is `f` itself).
#[derive(Debug, Clone, PartialEq)]
pub struct Profile1D {
    pub f: Tabulated,
    pub integral: Tabulated,
}

impl Profile1D {
    pub fn from_fine(fine: &Tabulated) -> Self {
        let integral = antiderivative(fine);
        let f = fine.coarsen(fine.depth - 1);
        Profile1D { f, integral }
    }

    pub fn support(&self) -> (f64, f64) {
        self.f.support()
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.f.eval(x)
    }

    /// `int_{-inf}^x f`.
    #[inline]
    pub fn eval_integral(&self, x: f64) -> f64 {
        let t = &self.integral;
        if x <= t.start {
            return 0.0;
        }
        let h = t.step();
        let u = (x - t.start) / h;
        let last = t.values.len() - 1;
        if u >= last as f64 {
            return t.values[last];
        }
        let i = u as usize;
        let s = u - i as f64;
        let (p0, p1) = (t.values[i], t.values[i + 1]);
        let (m0, m1) = (self.f.values[i] * h, self.f.values[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * p1
            + (s3 - s2) * m1
    }

    pub fn scaled(&self, s: f64) -> Profile1D {
        Profile1D {
            f: self.f.scaled(s),
            integral: self.integral.scaled(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const CUBIC: [f64; 5] = [0.125, 0.5, 0.75, 0.5, 0.125];

    fn bspline4(x: f64) -> f64 {
        // centred cubic B-spline shifted to [0, 4]
        let t = (x - 2.0).abs();
        if t >= 2.0 {
            0.0
        } else if t >= 1.0 {
            (2.0 - t).powi(3) / 6.0
        } else {
            (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0
        }
    }

    #[test]
    fn cubic_bspline_integer_values() {
        let v = integer_values(&CUBIC).unwrap();
        let expect = [0.0, 1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0, 0.0];
        for (a, b) in v.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn cascade_matches_closed_form_bspline() {
        let t = cascade(&CUBIC, 8).unwrap();
        assert_eq!(t.support(), (0.0, 4.0));
        for (i, v) in t.values.iter().enumerate() {
            let x = i as f64 * t.step();
            assert!((v - bspline4(x)).abs() < 1e-13);
        }
        assert_relative_eq!(t.quadrature(|_| 1.0), 1.0, max_relative = 1e-13);
    }

    #[test]
    fn consecutive_depths_agree_on_shared_points() {
        let h: Vec<f64> = crate::shearlet::filters::daubechies_taps(4)
            .unwrap()
            .iter()
            .map(|t| t * std::f64::consts::SQRT_2)
            .collect();
        let a = cascade(&h, 8).unwrap();
        let b = cascade(&h, 9).unwrap();
        let sup = a
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (v - b.values[2 * i]).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-6, "sup diff {sup}");
    }

    #[test]
    fn antiderivative_and_hermite() {
        let fine = cascade(&CUBIC, 9).unwrap();
        let p = Profile1D::from_fine(&fine);
        assert_relative_eq!(p.eval_integral(4.0), 1.0, max_relative = 1e-13);
        assert_relative_eq!(p.eval_integral(2.0), 0.5, max_relative = 1e-13);
        // F(1) = int_0^1 x^3/6 = 1/24
        assert_relative_eq!(p.eval_integral(1.0), 1.0 / 24.0, max_relative = 1e-12);
        // off-grid point
        let x: f64 = 0.3141592;
        assert_relative_eq!(p.eval_integral(x), x.powi(4) / 24.0, max_relative = 1e-8);
        assert_relative_eq!(p.eval(1.37), bspline4(1.37), epsilon = 1e-9);
        assert_eq!(p.eval_integral(-1.0), 0.0);
    }
}
