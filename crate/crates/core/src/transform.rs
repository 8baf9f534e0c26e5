//! Exact maps between the integrable model and the standard cubic equation.
//!
//! With `T = e^{-C₂z} t` and `Z(z) = (1 - e^{-2C₂z}) / (2C₂)`,
//!
//! ```text
//! v(z, t) = exp(i C₂ t²/4 - C₂ z/2) · Q(Z(z), T)
//! ```
//!
//! turns a solution `Q` of `i Q_Z + Q_TT + ρ|Q|²Q = 0` into a solution `v` of
//! the integrable model with `C₁ = ρ`. The inverse uses `t = (1 - 2C₂Z)^{-1/2} T`
//! and `z(Z) = -ln(1 - 2C₂Z) / (2C₂)`, defined for `Z` in `[0, 1/(2C₂))`.
//!
//! Off-grid samples are produced by [`Interpolator`]. Because the map is a pure
//! dilation of the time axis, a field can also be carried over exactly onto
//! the dilated grid ([`inverse_map_natural`]).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid};
use crate::interp::{Interpolation, Interpolator};
use crate::models::Sign;

/// Loss constant of the map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapParams {
    c2: f64,
}

impl MapParams {
    pub fn new(c2: f64) -> Result<Self> {
        if !(c2.is_finite() && c2 > 0.0) {
            return Err(Error::InvalidParams(format!("c2 must be positive, got {c2}")));
        }
        Ok(Self { c2 })
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// `1/(2C₂)`, never attained by `Z(z)`.
    pub fn horizon(&self) -> f64 {
        0.5 / self.c2
    }

    /// `T/t = e^{-C₂z}`.
    pub fn contraction(&self, z: f64) -> f64 {
        (-self.c2 * z).exp()
    }
}

/// `Z(z) = (1 - e^{-2C₂z}) / (2C₂)`.
pub fn z_to_cubic(z: f64, c2: f64) -> Result<f64> {
    let p = MapParams::new(c2)?;
    if z < 0.0 || z.is_nan() {
        return Err(Error::NegativeZ(z));
    }
    Ok(-(-2.0 * p.c2 * z).exp_m1() / (2.0 * p.c2))
}

/// `z(Z) = -ln(1 - 2C₂Z) / (2C₂)`.
pub fn cubic_to_z(big_z: f64, c2: f64) -> Result<f64> {
    let p = MapParams::new(c2)?;
    if !(0.0..p.horizon()).contains(&big_z) {
        return Err(Error::OutOfRange {
            big_z,
            horizon: p.horizon(),
        });
    }
    Ok(-(-2.0 * p.c2 * big_z).ln_1p() / (2.0 * p.c2))
}

/// `exp(i C₂ t²/4 - C₂ z/2)`.
fn gauge(c2: f64, z: f64, t: f64) -> Complex64 {
    Complex64::from_polar((-0.5 * c2 * z).exp(), 0.25 * c2 * t * t)
}

/// Where `Q(Z, ·)` comes from when building `v(z, ·)`.
pub enum CubicSource<'a> {
    /// Closed-form `Q(Z, T)`.
    Analytic(&'a dyn Fn(f64, f64) -> Complex64),
    /// Samples of `Q` at `Z(z)`; evaluated off-grid by interpolation.
    Sampled(&'a ComplexField, Interpolation),
}

fn out_of_box(point: f64, grid: &Grid, hint: String) -> Error {
    Error::OutOfBox {
        point,
        t_min: grid.t_min(),
        t_max: grid.t_max(),
        hint,
    }
}

/// `v(z, t_j) = exp(i C₂ t_j²/4 - C₂ z/2) · Q(Z(z), e^{-C₂z} t_j)` on `grid`.
pub fn forward_map(
    source: CubicSource<'_>,
    z: f64,
    grid: &Arc<Grid>,
    params: MapParams,
) -> Result<ComplexField> {
    let big_z = z_to_cubic(z, params.c2)?;
    let shrink = params.contraction(z);
    let values = match source {
        CubicSource::Analytic(q) => grid
            .t()
            .iter()
            .map(|&t| gauge(params.c2, z, t) * q(big_z, shrink * t))
            .collect::<Vec<_>>(),
        CubicSource::Sampled(q, kind) => {
            let tol = 1e-9 * (1.0 + big_z.abs());
            if (q.z() - big_z).abs() > tol {
                return Err(Error::InvalidParams(format!(
                    "sampled Q sits at Z = {}, but z = {z} maps to Z = {big_z}",
                    q.z()
                )));
            }
            let it = Interpolator::new(q, kind);
            grid.t()
                .iter()
                .map(|&t| {
                    let big_t = shrink * t;
                    it.eval(big_t)
                        .map(|value| gauge(params.c2, z, t) * value)
                        .ok_or_else(|| {
                            out_of_box(big_t, q.grid(), "the target box is too wide for this z".into())
                        })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    ComplexField::new(grid.clone(), values, z)
}

/// Largest `z` for which `e^{C₂z}` times every sample of `target` stays inside
/// `source`.
fn max_admissible_z(source: &Grid, target: &Grid, c2: f64) -> f64 {
    let hi = target.t_max() - target.dt();
    let lo = target.t_min();
    let side = |edge: f64, bound: f64| {
        if edge == 0.0 {
            f64::INFINITY
        } else if bound / edge <= 0.0 {
            0.0
        } else {
            ((bound / edge).ln() / c2).max(0.0)
        }
    };
    let upper = if hi > 0.0 { side(hi, source.t_max()) } else { f64::INFINITY };
    let lower = if lo < 0.0 { side(lo, source.t_min()) } else { f64::INFINITY };
    upper.min(lower)
}

/// `Q(Z(z), T_j) = exp(-i C₂ t²/4 + C₂ z/2) · v(z, t)` with `t = e^{C₂z} T_j`,
/// sampled on `target` by interpolating `v`.
pub fn inverse_map(
    v: &ComplexField,
    params: MapParams,
    target: &Arc<Grid>,
    kind: Interpolation,
) -> Result<ComplexField> {
    let z = v.z();
    let big_z = z_to_cubic(z, params.c2)?;
    let stretch = 1.0 / params.contraction(z);
    let it = Interpolator::new(v, kind);
    let values = target
        .t()
        .iter()
        .map(|&big_t| {
            let t = stretch * big_t;
            it.eval(t)
                .map(|value| value / gauge(params.c2, z, t))
                .ok_or_else(|| {
                    let max_z = max_admissible_z(v.grid(), target, params.c2);
                    out_of_box(t, v.grid(), format!("largest admissible z is {max_z}"))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    ComplexField::new(target.clone(), values, big_z)
}

/// [`inverse_map`] onto the grid dilated by `e^{-C₂z}`, where every `t(Z, T_j)`
/// is a sample of `v` and no interpolation is needed.
pub fn inverse_map_natural(v: &ComplexField, params: MapParams) -> Result<ComplexField> {
    let z = v.z();
    let big_z = z_to_cubic(z, params.c2)?;
    let target = v.grid().dilated(params.contraction(z))?;
    let values = v
        .values()
        .iter()
        .zip(v.grid().t())
        .map(|(value, &t)| value / gauge(params.c2, z, t))
        .collect();
    ComplexField::new(target, values, big_z)
}

/// Bright soliton `a √(2/ρ) sech(aT) e^{i a² Z}` of the focusing cubic equation.
pub fn soliton_value(a: f64, big_z: f64, big_t: f64) -> Complex64 {
    Complex64::from_polar(a * 2f64.sqrt() / (a * big_t).cosh(), a * a * big_z)
}

pub fn soliton(a: f64, rho: Sign, big_z: f64, grid: &Arc<Grid>) -> Result<ComplexField> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidAmplitude(a));
    }
    if rho != Sign::Plus {
        return Err(Error::DefocusingRequested);
    }
    ComplexField::from_fn(grid.clone(), big_z, |t| soliton_value(a, big_z, t))
}

/// `(‖t² v(z)‖, e^{2C₂z} ‖T² Q(Z(z))‖)` with `Q` from [`inverse_map_natural`].
pub fn lemma_shift_check(v: &ComplexField, params: MapParams) -> Result<(f64, f64)> {
    let q = inverse_map_natural(v, params)?;
    Ok(shift_pair(v, &q, params))
}

/// As [`lemma_shift_check`] with `Q` interpolated onto `target`.
pub fn lemma_shift_check_on(
    v: &ComplexField,
    params: MapParams,
    target: &Arc<Grid>,
    kind: Interpolation,
) -> Result<(f64, f64)> {
    let q = inverse_map(v, params, target, kind)?;
    Ok(shift_pair(v, &q, params))
}

fn shift_pair(v: &ComplexField, q: &ComplexField, params: MapParams) -> (f64, f64) {
    let lhs = v.weighted_norm_t2();
    let rhs = (2.0 * params.c2 * v.z()).exp() * q.weighted_norm_t2();
    (lhs, rhs)
}
