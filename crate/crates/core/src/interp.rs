//! Evaluation of sampled fields at off-grid points.
//!
//! The default is trigonometric interpolation: the unique band-limited
//! periodic function through the samples, evaluated by direct summation of the
//! Fourier series (O(n) per point). A natural cubic spline is available as a
//! cheaper, lower-order alternative.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::{ComplexField, Grid, Spectral};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Trigonometric,
    CubicSpline,
}

/// Reseed the phase recurrence every this many modes.
const RESEED: usize = 32;

#[derive(Clone, Debug)]
enum Scheme {
    // Fourier coefficients in FFT order, already divided by n.
    Trig(Vec<Complex64>),
    // Second derivatives at the nodes.
    Spline(Vec<Complex64>),
}

/// Continuous representation of a sampled field on its box.
#[derive(Clone, Debug)]
pub struct Interpolator {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
    scheme: Scheme,
}

impl Interpolator {
    pub fn new(field: &ComplexField, kind: Interpolation) -> Self {
        let grid = field.grid().clone();
        let values = field.values().to_vec();
        let scheme = match kind {
            Interpolation::Trigonometric => {
                let mut coeffs = values.clone();
                Spectral::new(grid.n()).forward(&mut coeffs);
                let scale = 1.0 / grid.n() as f64;
                coeffs.iter_mut().for_each(|c| *c *= scale);
                Scheme::Trig(coeffs)
            }
            Interpolation::CubicSpline => Scheme::Spline(natural_spline(&values, grid.dt())),
        };
        Self {
            grid,
            values,
            scheme,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Value at `x`, or `None` when `x` lies outside `[t_min, t_max]`.
    pub fn eval(&self, x: f64) -> Option<Complex64> {
        if !self.grid.contains(x) {
            return None;
        }
        Some(match &self.scheme {
            Scheme::Trig(coeffs) => self.eval_trig(coeffs, x),
            Scheme::Spline(m) => self.eval_spline(m, x),
        })
    }

    fn eval_trig(&self, coeffs: &[Complex64], x: f64) -> Complex64 {
        let n = coeffs.len();
        let half = n / 2;
        let theta = 2.0 * std::f64::consts::PI * (x - self.grid.t_min())
            / (self.grid.t_max() - self.grid.t_min());
        let step = Complex64::from_polar(1.0, theta);
        let mut sum = coeffs[0];
        let mut w = Complex64::new(1.0, 0.0);
        for m in 1..half {
            w = if m % RESEED == 0 {
                Complex64::from_polar(1.0, m as f64 * theta)
            } else {
                w * step
            };
            sum += coeffs[m] * w + coeffs[n - m] * w.conj();
        }
        // the Nyquist mode is split evenly between +half and -half
        sum + coeffs[half] * (half as f64 * theta).cos()
    }

    fn eval_spline(&self, m: &[Complex64], x: f64) -> Complex64 {
        let n = self.values.len();
        let h = self.grid.dt();
        let s = (x - self.grid.t_min()) / h;
        let j = (s.floor() as usize).min(n - 2);
        let a = (j + 1) as f64 - s;
        let b = s - j as f64;
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        y0 * a
            + y1 * b
            + (m[j] * (a * a * a - a) + m[j + 1] * (b * b * b - b)) * (h * h / 6.0)
    }
}

// Natural cubic spline second derivatives on a uniform grid (Thomas algorithm).
fn natural_spline(y: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = y.len();
    let mut m = vec![Complex64::new(0.0, 0.0); n];
    if n < 3 {
        return m;
    }
    // interior system: m[j-1] + 4 m[j] + m[j+1] = 6 (y[j+1] - 2y[j] + y[j-1]) / h²
    let inner = n - 2;
    let mut diag = vec![4.0; inner];
    let mut rhs: Vec<Complex64> = (1..n - 1)
        .map(|j| (y[j + 1] - y[j] * 2.0 + y[j - 1]) * (6.0 / (h * h)))
        .collect();
    for i in 1..inner {
        let w = 1.0 / diag[i - 1];
        diag[i] -= w;
        let prev = rhs[i - 1];
        rhs[i] -= prev * w;
    }
    m[inner] = rhs[inner - 1] / diag[inner - 1];
    for i in (0..inner - 1).rev() {
        m[i + 1] = (rhs[i] - m[i + 2]) / diag[i];
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_chirp(t: f64) -> Complex64 {
        Complex64::from_polar((-t * t / 2.0).exp(), 0.3 * t * t)
    }

    #[test]
    fn trig_reproduces_grid_values() {
        let g = Grid::new(-12.0, 12.0, 128).unwrap();
        let f = ComplexField::from_fn(g.clone(), 0.0, gaussian_chirp).unwrap();
        let it = Interpolator::new(&f, Interpolation::Trigonometric);
        for (t, v) in g.t().iter().zip(f.values()) {
            assert!((it.eval(*t).unwrap() - v).norm() < 1e-13);
        }
    }

    #[test]
    fn trig_is_spectrally_accurate_off_grid() {
        let g = Grid::symmetric(15.0, 256).unwrap();
        let f = ComplexField::from_fn(g.clone(), 0.0, gaussian_chirp).unwrap();
        let it = Interpolator::new(&f, Interpolation::Trigonometric);
        let err = (0..200)
            .map(|i| -9.7 + 0.0973 * i as f64)
            .map(|x| (it.eval(x).unwrap() - gaussian_chirp(x)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
    }

    #[test]
    fn spline_is_second_order_ish() {
        let g = Grid::symmetric(15.0, 1024).unwrap();
        let f = ComplexField::from_fn(g.clone(), 0.0, gaussian_chirp).unwrap();
        let it = Interpolator::new(&f, Interpolation::CubicSpline);
        let err = (0..200)
            .map(|i| -9.7 + 0.0973 * i as f64)
            .map(|x| (it.eval(x).unwrap() - gaussian_chirp(x)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
        for (t, v) in g.t().iter().zip(f.values()) {
            assert!((it.eval(*t).unwrap() - v).norm() < 1e-12);
        }
    }

    #[test]
    fn outside_box_is_none() {
        let g = Grid::symmetric(5.0, 32).unwrap();
        let f = ComplexField::zeros(g, 0.0);
        for kind in [Interpolation::Trigonometric, Interpolation::CubicSpline] {
            let it = Interpolator::new(&f, kind);
            assert!(it.eval(5.0).is_some());
            assert!(it.eval(5.01).is_none());
            assert!(it.eval(-5.2).is_none());
        }
    }
}
