//! Low-pass/high-pass filter pairs of refinable generator families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Orthonormal Daubechies low-pass filters `db1..db8` (taps sum to `sqrt 2`).
const DAUBECHIES: [&[f64]; 8] = [
    // db1
    &[0.70710678118654752, 0.70710678118654752],
    // db2
    &[0.48296291314453414, 0.83651630373780791, 0.22414386804201338, -0.12940952255126038],
    // db3
    &[0.33267055295008262, 0.80689150931109258, 0.45987750211849157, -0.13501102001025459, -0.085441273882026662, 0.035226291885709537],
    // db4
    &[0.2303778133088965, 0.71484657055291565, 0.63088076792985891, -0.027983769416859854, -0.18703481171909308, 0.030841381835560764, 0.0328830116668852, -0.010597401785069032],
    // db5
    &[0.16010239797419291, 0.60382926979718967, 0.72430852843777293, 0.13842814590132073, -0.24229488706638203, -0.032244869584638375, 0.077571493840045714, -0.0062414902127982743, -0.012580751999081999, 0.0033357252854737713],
    // db6
    &[0.11154074335010946, 0.49462389039845309, 0.75113390802109535, 0.31525035170919763, -0.22626469396543982, -0.12976686756726194, 0.097501605587323049, 0.027522865530305729, -0.03158203931748603, 0.00055384220116149614, 0.0047772575109455106, -0.0010773010853084796],
    // db7
    &[0.077852054085009179, 0.39653931948191731, 0.72913209084623512, 0.46978228740519312, -0.14390600392856498, -0.22403618499387498, 0.071309219266830265, 0.080612609151083072, -0.038029936935014414, -0.016574541630666881, 0.012550998556099841, 0.00042957797292136652, -0.0018016407040474909, 0.00035371379997452025],
    // db8
    &[0.05441584224310401, 0.31287159091429997, 0.67563073629728981, 0.58535468365420671, -0.015829105256349306, -0.28401554296154693, 0.00047248457391328277, 0.12874742662047846, -0.017369301001807546, -0.044088253930794752, 0.013981027917398282, 0.0087460940474057767, -0.0048703529934515743, -0.00039174037337694705, 0.00067544940645056937, -0.00011747678412476953],
];

/// Filter family used to build `psi1` and `psi2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FilterFamily {
    /// B-spline scaling function of the given order (degree + 1) and a
    /// wavelet built from an `moments`-fold difference filter.
    Spline { order: usize, moments: usize },
    /// Orthonormal Daubechies pair with `order` vanishing moments.
    Daubechies { order: usize },
}

impl Default for FilterFamily {
    fn default() -> Self {
        FilterFamily::Spline {
            order: 4,
            moments: 6,
        }
    }
}

/// Refinement filters with the normalization `sum(lowpass) = 2`, i.e.
/// `phi(x) = sum_n h_n phi(2x - n)` and `psi(x) = sum_n g_n phi(2x - n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair {
    pub lowpass: Vec<f64>,
    pub highpass: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Orthonormal Daubechies low-pass taps (sum `sqrt 2`), `order` in `1..=8`.
pub fn daubechies_taps(order: usize) -> Result<&'static [f64]> {
    if order == 0 || order > DAUBECHIES.len() {
        return Err(Error::InvalidArgument(format!(
            "Daubechies order {order} not in 1..={}",
            DAUBECHIES.len()
        )));
    }
    Ok(DAUBECHIES[order - 1])
}

impl FilterFamily {
    pub fn filters(&self) -> Result<FilterPair> {
        match *self {
            FilterFamily::Spline { order, moments } => {
                if order < 1 {
                    return Err(Error::InvalidArgument("spline order must be >= 1".into()));
                }
                let scale = 2f64.powi(1 - order as i32);
                let lowpass = (0..=order).map(|n| scale * binomial(order, n)).collect();
                let highpass = (0..=moments)
                    .map(|n| if n % 2 == 0 { 1.0 } else { -1.0 } * binomial(moments, n))
                    .collect();
                Ok(FilterPair { lowpass, highpass })
            }
            FilterFamily::Daubechies { order } => {
                let taps = daubechies_taps(order)?;
                let l = taps.len();
                let lowpass: Vec<f64> = taps.iter().map(|t| t * std::f64::consts::SQRT_2).collect();
                let highpass = (0..l)
                    .map(|n| if n % 2 == 0 { 1.0 } else { -1.0 } * lowpass[l - 1 - n])
                    .collect();
                Ok(FilterPair { lowpass, highpass })
            }
        }
    }
}

/// Number of leading vanishing discrete moments `sum_n g_n n^l`, which
/// equals the number of vanishing moments of `psi = sum g_n phi(2x - n)`.
pub fn vanishing_moments(highpass: &[f64]) -> usize {
    let scale: f64 = highpass.iter().map(|g| g.abs()).sum();
    let mut count = 0;
    for l in 0..highpass.len() {
        let mut m = 0.0;
        let mut mag = 0.0;
        for (n, g) in highpass.iter().enumerate() {
            let p = (n as f64).powi(l as i32);
            m += g * p;
            mag += (g * p).abs();
        }
        if m.abs() <= 1e-10 * mag.max(scale) {
            count += 1;
        } else {
            break;
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn daubechies_orthonormality() {
        for order in 1..=8 {
            let h = daubechies_taps(order).unwrap();
            assert_eq!(h.len(), 2 * order);
            let s: f64 = h.iter().sum();
            assert_relative_eq!(s, std::f64::consts::SQRT_2, max_relative = 1e-14);
            for shift in 0..order {
                let ip: f64 = (0..h.len() - 2 * shift).map(|n| h[n] * h[n + 2 * shift]).sum();
                let expect = if shift == 0 { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-14, "db{order} shift {shift}: {ip}");
            }
        }
    }

    #[test]
    fn moment_counts() {
        for order in 1..=8 {
            let f = FilterFamily::Daubechies { order }.filters().unwrap();
            assert_eq!(vanishing_moments(&f.highpass), order);
        }
        for moments in 1..=7 {
            let f = FilterFamily::Spline { order: 4, moments }.filters().unwrap();
            assert_eq!(vanishing_moments(&f.highpass), moments);
        }
    }

    #[test]
    fn spline_lowpass_is_binomial() {
        let f = FilterFamily::Spline { order: 4, moments: 2 }.filters().unwrap();
        assert_eq!(f.lowpass, vec![0.125, 0.5, 0.75, 0.5, 0.125]);
        assert_eq!(f.highpass, vec![1.0, -2.0, 1.0]);
    }
}
