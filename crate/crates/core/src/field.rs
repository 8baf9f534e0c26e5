//! Uniform periodic grids, sampled complex envelopes and the quadrature norms
//! used throughout the crate.
//!
//! The real line is truncated to a periodic box `[t_min, t_max)`. Every
//! integral is the plain rectangle rule `sum(x_j) * dt`, which coincides with
//! the periodic trapezoid rule and is spectrally accurate for smooth fields
//! that have decayed at the box edges. Moment norms (`t^2 u`, `t u_t`) are only
//! meaningful for such edge-decaying fields; [`ComplexField::edge_max`] lets
//! callers check it.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest admissible number of samples.
pub const MIN_SAMPLES: usize = 16;

/// Fraction of samples at each end of the box that counts as "edge".
pub const EDGE_FRACTION: f64 = 0.05;

/// Uniform sampling of `[t_min, t_max)` together with its Fourier dual.
#[derive(Clone, PartialEq)]
pub struct Grid {
    t_min: f64,
    t_max: f64,
    n: usize,
    dt: f64,
    t: Vec<f64>,
    wavenumbers: Vec<f64>,
    // t^4, shared by every moment evaluation
    t4: Vec<f64>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("t_min", &self.t_min)
            .field("t_max", &self.t_max)
            .field("n", &self.n)
            .finish()
    }
}

impl Grid {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Arc<Self>> {
        if !(t_min.is_finite() && t_max.is_finite()) || t_max <= t_min {
            return Err(Error::InvalidDomain { t_min, t_max });
        }
        if n < MIN_SAMPLES || !n.is_power_of_two() {
            return Err(Error::InvalidSize(n));
        }
        let width = t_max - t_min;
        let dt = width / n as f64;
        let t: Vec<f64> = (0..n).map(|j| t_min + j as f64 * dt).collect();
        let dk = 2.0 * PI / width;
        // FFT ordering: 0, 1, .., n/2 - 1, -n/2, .., -1
        let wavenumbers = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                m * dk
            })
            .collect();
        let t4 = t.iter().map(|&x| x.powi(4)).collect();
        Ok(Arc::new(Self {
            t_min,
            t_max,
            n,
            dt,
            t,
            wavenumbers,
            t4,
        }))
    }

    /// Grid centred at zero with half-width `half_width`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Arc<Self>> {
        Self::new(-half_width, half_width, n)
    }

    /// The same number of samples over the box scaled by `factor` about `t = 0`.
    pub fn dilated(&self, factor: f64) -> Result<Arc<Self>> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParams(format!("dilation factor {factor}")));
        }
        Self::new(self.t_min * factor, self.t_max * factor, self.n)
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Index of the single unpaired (Nyquist) mode.
    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    /// Largest wavenumber magnitude, `pi / dt`.
    pub fn k_max(&self) -> f64 {
        PI / self.dt
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.t_min && x <= self.t_max
    }

    pub(crate) fn t4(&self) -> &[f64] {
        &self.t4
    }

    /// Number of samples at each end treated as the edge region.
    pub fn edge_len(&self) -> usize {
        ((self.n as f64 * EDGE_FRACTION).ceil() as usize).max(1)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.n == other.n && self.t_min == other.t_min && self.t_max == other.t_max
    }
}

/// Forward/inverse FFT plans plus scratch for one transform length.
///
/// The inverse is normalised, so `inverse(forward(x)) == x`.
pub struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            scale: 1.0 / n as f64,
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        data.iter_mut().for_each(|x| *x *= self.scale);
    }

    /// Multiply the spectrum of `data` by `multiplier(j)` for mode index `j`.
    pub fn apply_multiplier<F>(&mut self, data: &mut [Complex64], multiplier: F)
    where
        F: Fn(usize) -> Complex64,
    {
        self.forward(data);
        data.iter_mut()
            .enumerate()
            .for_each(|(j, x)| *x *= multiplier(j));
        self.inverse(data);
    }
}

/// A sampled complex envelope at a fixed evolution coordinate.
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
    z: f64,
}

impl ComplexField {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>, z: f64) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        let field = Self { grid, values, z };
        field.check_finite()?;
        Ok(field)
    }

    pub fn zeros(grid: Arc<Grid>, z: f64) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.n()];
        Self { grid, values, z }
    }

    /// Samples `f(t_j)` on the grid.
    pub fn from_fn<F>(grid: Arc<Grid>, z: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let values = grid.t().iter().map(|&t| f(t)).collect();
        Self::new(grid, values, z)
    }

    /// `amplitude * exp(-t^2 / (2 width^2))` at `z = 0`.
    pub fn gaussian(grid: Arc<Grid>, amplitude: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidWidth(width));
        }
        let denom = 2.0 * width * width;
        Self::from_fn(grid, 0.0, |t| {
            Complex64::new(amplitude * (-t * t / denom).exp(), 0.0)
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    // callers must put back a vector of the same length
    pub(crate) fn values_vec_mut(&mut self) -> &mut Vec<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn set_z(&mut self, z: f64) {
        self.z = z;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self
            .values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            Some(j) => Err(Error::NonFinite(j)),
            None => Ok(()),
        }
    }

    /// `sum |u_j|^2 dt`, the squared L² norm.
    pub fn mass(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.dt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// `‖t² u‖`.
    pub fn weighted_norm_t2(&self) -> f64 {
        let sum: f64 = self
            .values
            .iter()
            .zip(self.grid.t4())
            .map(|(v, w)| w * v.norm_sqr())
            .sum();
        (sum * self.grid.dt()).sqrt()
    }

    /// `‖t u_t‖`, with the derivative taken spectrally.
    pub fn weighted_norm_t_ut(&self) -> f64 {
        let du = self.spectral_derivative();
        let sum: f64 = du
            .values
            .iter()
            .zip(self.grid.t())
            .map(|(v, t)| t * t * v.norm_sqr())
            .sum();
        (sum * self.grid.dt()).sqrt()
    }

    /// Sup norm over the samples.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus over the outer [`EDGE_FRACTION`] of samples at either end.
    pub fn edge_max(&self) -> f64 {
        let m = self.grid.edge_len();
        let n = self.values.len();
        self.values[..m]
            .iter()
            .chain(&self.values[n - m..])
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// `∂_t u`: Fourier coefficients multiplied by `i k`.
    ///
    /// The Nyquist coefficient is dropped; for an odd derivative it has no
    /// consistent sign. Only meaningful for fields that decay at the edges.
    pub fn spectral_derivative(&self) -> ComplexField {
        let mut spectral = Spectral::new(self.grid.n());
        self.spectral_derivative_with(&mut spectral)
    }

    pub fn spectral_derivative_with(&self, spectral: &mut Spectral) -> ComplexField {
        let mut out = self.values.clone();
        let k = self.grid.wavenumbers();
        let nyquist = self.grid.nyquist_index();
        spectral.apply_multiplier(&mut out, |j| {
            if j == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k[j])
            }
        });
        ComplexField {
            grid: self.grid.clone(),
            values: out,
            z: self.z,
        }
    }

    /// `∂_t² u`: Fourier coefficients multiplied by `-k²` (Nyquist kept).
    pub fn spectral_second_derivative_with(&self, spectral: &mut Spectral) -> ComplexField {
        let mut out = self.values.clone();
        let k = self.grid.wavenumbers();
        spectral.apply_multiplier(&mut out, |j| Complex64::new(-k[j] * k[j], 0.0));
        ComplexField {
            grid: self.grid.clone(),
            values: out,
            z: self.z,
        }
    }

    pub fn scaled(&self, factor: Complex64) -> ComplexField {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            z: self.z,
        }
    }

    /// `‖self - other‖`; both fields must share a grid.
    pub fn distance(&self, other: &ComplexField) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((sum * self.grid.dt()).sqrt())
    }

    /// Writes the `t,re,im` snapshot format.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,re,im")?;
        for (t, v) in self.grid.t().iter().zip(&self.values) {
            writeln!(out, "{t},{},{}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io_err)?;
        let mut out = std::io::BufWriter::new(file);
        self.write_csv(&mut out).map_err(io_err)?;
        out.flush().map_err(io_err)
    }

    /// Reads a `t,re,im` snapshot. The sample coordinates must match `grid`.
    pub fn read_csv<R: BufRead>(grid: Arc<Grid>, z: f64, input: R, origin: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader
            .headers()
            .map_err(|e| parse_err(e.to_string()))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "re", "im"] {
            return Err(parse_err(format!("expected header t,re,im, got {headers:?}")));
        }
        let mut values = Vec::with_capacity(grid.n());
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| parse_err(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("row {}: {e}", row + 1)))
            };
            let (t, re, im) = (num(0)?, num(1)?, num(2)?);
            if let Some(&expected) = grid.t().get(row) {
                if (t - expected).abs() > 1e-9 * grid.dt().max(expected.abs()) {
                    return Err(parse_err(format!(
                        "row {}: t = {t} does not match grid sample {expected}",
                        row + 1
                    )));
                }
            }
            values.push(Complex64::new(re, im));
        }
        Self::new(grid, values, z).map_err(|e| parse_err(e.to_string()))
    }

    pub fn load_csv(grid: Arc<Grid>, z: f64, path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(grid, z, std::io::BufReader::new(file), path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_spacing_and_errors() {
        let g = Grid::new(-10.0, 10.0, 16).unwrap();
        assert_eq!(g.dt(), 1.25);
        assert_eq!(g.t().len(), 16);
        assert_eq!(g.t()[3], -10.0 + 3.0 * 1.25);
        assert!(matches!(Grid::new(-10.0, 10.0, 15), Err(Error::InvalidSize(15))));
        assert!(matches!(Grid::new(-10.0, 10.0, 8), Err(Error::InvalidSize(8))));
        assert!(matches!(Grid::new(0.0, 0.0, 16), Err(Error::InvalidDomain { .. })));
    }

    #[test]
    fn wavenumbers_symmetric_except_nyquist() {
        let g = Grid::new(-3.0, 5.0, 32).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k[0], 0.0);
        for j in 1..16 {
            assert_relative_eq!(k[j], -k[32 - j], epsilon = 1e-14);
        }
        assert_relative_eq!(k[16], -PI / g.dt(), epsilon = 1e-12);
    }

    #[test]
    fn norms_of_zero_field() {
        let g = Grid::symmetric(10.0, 64).unwrap();
        let f = ComplexField::zeros(g, 0.0);
        assert_eq!(f.l2_norm(), 0.0);
        assert_eq!(f.weighted_norm_t2(), 0.0);
        assert_eq!(f.weighted_norm_t_ut(), 0.0);
    }

    #[test]
    fn gaussian_norms_match_closed_forms() {
        // ∫ e^{-t²} = √π, ∫ t⁴ e^{-t²} = (3/4)√π
        let g = Grid::symmetric(20.0, 2048).unwrap();
        let f = ComplexField::gaussian(g, 1.0, 1.0).unwrap();
        let sqrt_pi = PI.sqrt();
        assert!((f.l2_norm() - sqrt_pi.sqrt()).abs() < 1e-8);
        let moment = (0.75 * sqrt_pi).sqrt();
        assert!((f.weighted_norm_t2() - moment).abs() < 1e-7);
        assert!((f.weighted_norm_t_ut() - moment).abs() < 1e-7);
        assert!((f.l2_norm() - 1.331336).abs() < 1e-6);
        assert!((moment - 1.152975).abs() < 1e-5);
    }

    #[test]
    fn phase_rotation_keeps_norm() {
        let g = Grid::symmetric(20.0, 256).unwrap();
        let f = ComplexField::gaussian(g, 1.3, 2.0).unwrap();
        let rotated = f.scaled(Complex64::from_polar(1.0, 0.77));
        assert_relative_eq!(rotated.l2_norm(), f.l2_norm(), max_relative = 1e-14);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = Grid::symmetric(5.0, 64).unwrap();
        let f = ComplexField::from_fn(g, 0.0, |_| c(2.0, -1.0)).unwrap();
        assert!(f.spectral_derivative().max_abs() < 1e-13);
        assert!(f.weighted_norm_t_ut() < 1e-12);
    }

    #[test]
    fn derivative_of_plane_wave() {
        let g = Grid::new(-4.0, 6.0, 128).unwrap();
        let k0 = g.wavenumbers()[7];
        let f = ComplexField::from_fn(g, 0.0, |t| Complex64::from_polar(1.0, k0 * t)).unwrap();
        let d = f.spectral_derivative();
        for (t, v) in f.grid().t().iter().zip(d.values()) {
            let expected = c(0.0, k0) * Complex64::from_polar(1.0, k0 * t);
            assert!((v - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn derivative_of_gaussian() {
        let g = Grid::symmetric(20.0, 2048).unwrap();
        let f = ComplexField::gaussian(g, 1.0, 1.0).unwrap();
        let d = f.spectral_derivative();
        let err = f
            .grid()
            .t()
            .iter()
            .zip(d.values())
            .map(|(&t, v)| (v - c(-t * (-t * t / 2.0).exp(), 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }

    #[test]
    fn moment_of_point_mass_at_origin_vanishes() {
        let g = Grid::symmetric(10.0, 64).unwrap();
        let mut f = ComplexField::zeros(g.clone(), 0.0);
        let origin = g.t().iter().position(|&t| t == 0.0).unwrap();
        f.values_mut()[origin] = c(3.0, 0.0);
        assert_eq!(f.weighted_norm_t2(), 0.0);
    }

    #[test]
    fn gaussian_width_must_be_positive() {
        let g = Grid::symmetric(10.0, 64).unwrap();
        assert!(matches!(
            ComplexField::gaussian(g.clone(), 1.0, 0.0),
            Err(Error::InvalidWidth(_))
        ));
        let zero = ComplexField::gaussian(g, 0.0, 1.0).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn parseval() {
        let g = Grid::new(-7.0, 9.0, 256).unwrap();
        let f = ComplexField::from_fn(g.clone(), 0.0, |t| {
            Complex64::from_polar((-(t - 1.0).powi(2) / 3.0).exp(), 0.4 * t * t)
        })
        .unwrap();
        let mut spectrum = f.values().to_vec();
        Spectral::new(g.n()).forward(&mut spectrum);
        let dual: f64 = spectrum.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dt() / g.n() as f64;
        assert_relative_eq!(dual, f.mass(), max_relative = 1e-10);
    }

    #[test]
    fn csv_round_trip() {
        let g = Grid::symmetric(8.0, 32).unwrap();
        let f = ComplexField::from_fn(g.clone(), 0.0, |t| c(t.sin(), t.cos() / 3.0)).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"t,re,im\n"));
        let back = ComplexField::read_csv(g.clone(), 0.0, buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back.values(), f.values());

        let bad = b"t,x,y\n0,1,2\n";
        assert!(ComplexField::read_csv(g, 0.0, &bad[..], Path::new("mem")).is_err());
    }

    #[test]
    fn new_rejects_non_finite() {
        let g = Grid::symmetric(8.0, 16).unwrap();
        let mut v = vec![c(0.0, 0.0); 16];
        v[4] = c(f64::NAN, 0.0);
        assert!(matches!(ComplexField::new(g.clone(), v, 0.0), Err(Error::NonFinite(4))));
        assert!(matches!(
            ComplexField::new(g, vec![c(0.0, 0.0); 3], 0.0),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
