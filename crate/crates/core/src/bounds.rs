//! Closed-form a-priori estimates for the distance between the dissipative and
//! the integrable model, and the constants they depend on.
//!
//! Constants:
//!
//! * `K` bounds `|u|² + |v|²` pointwise.
//! * `C = 3K/2` is a Lipschitz constant of `ζ ↦ |ζ|²ζ` on that ball. Writing
//!   `|ζ|²ζ - |ξ|²ξ = |ζ|²(ζ - ξ) + ξ(|ζ|² - |ξ|²)` and
//!   `||ζ|² - |ξ|²| ≤ (|ζ| + |ξ|)|ζ - ξ|` give
//!   `(|ζ|² + |ζ||ξ| + |ξ|²)|ζ - ξ| ≤ (3/2)(|ζ|² + |ξ|²)|ζ - ξ|`.
//! * `C̃` closes the differential inequality for `h(Z) = ‖T Q_T‖²`:
//!   `h' ≤ 4√h ‖Q_TT‖ + 2h ‖Q‖²_∞ ≤ C̃ (√h + h)` with
//!   `C̃ = max(4 sup ‖Q_TT‖, 2 sup ‖Q‖²_∞)`.
//!
//! From those, with `A = (C₂/2 + 1)δ + 1` and `E(Z) = (8/C̃)(e^{C̃Z/2} - 1)`:
//!
//! ```text
//! ‖T Q_T(Z)‖ ≤ A e^{C̃Z/2} - 1                          (h_bound)
//! ‖T² Q(Z)‖  ≤ η(Z, δ) = δ + A E(Z) - 4Z                (f_bound)
//! ‖t² v(z)‖  ≤ e^{2C₂z} η(Z(z), δ)                      (g_bound)
//! ‖v - u‖    ≤ (C₂^p/4) η(Z(z), δ) z e^{(2C₂+C)z}       (distance_bound)
//! ```
//!
//! `p = 2` follows from the Duhamel estimate (the `C₂²t²/4` potential term);
//! `p = 1` is kept as [`Variant::PaperLiteral`] for comparison.
//!
//! `E` is evaluated as `4Z · expm1(x)/x`, so `C̃ = 0` is handled by its limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Spectral;
use crate::solver::Trajectory;

/// Number of points in the geometric z-grid used for root finding.
pub const GRID_POINTS: usize = 512;
/// Left end of the geometric z-grid.
pub const GRID_START: f64 = 1e-6;
/// Default right end of the z-grid, in units of `1/C₂`.
pub const HORIZON_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `C₂²/4` prefactor.
    #[default]
    Squared,
    /// `C₂/4` prefactor.
    PaperLiteral,
}

impl Variant {
    fn power(self, c2: f64) -> f64 {
        match self {
            Variant::Squared => c2 * c2,
            Variant::PaperLiteral => c2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Squared => "squared",
            Variant::PaperLiteral => "paper_literal",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
    pub c2: f64,
    pub delta: f64,
}

impl BoundConstants {
    /// Sets `C = 3K/2`.
    pub fn new(k: f64, c_tilde: f64, c2: f64, delta: f64) -> Result<Self> {
        let out = Self {
            k,
            c: 1.5 * k,
            c_tilde,
            c2,
            delta,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("K", self.k),
            ("C", self.c),
            ("C_tilde", self.c_tilde),
            ("delta", self.delta),
        ];
        for (name, x) in named {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be finite and >= 0, got {x}")));
            }
        }
        if !(self.c2.is_finite() && self.c2 > 0.0) {
            return Err(Error::InvalidParams(format!("c2 must be positive, got {}", self.c2)));
        }
        Ok(())
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    /// `Z(z)`, clamped at zero.
    pub fn big_z(&self, z: f64) -> f64 {
        -(-2.0 * self.c2 * z.max(0.0)).exp_m1() / (2.0 * self.c2)
    }

    fn amplitude(&self, delta: f64) -> f64 {
        (self.c2 / 2.0 + 1.0) * delta + 1.0
    }
}

/// Suprema read off the trajectories, kept for reporting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Suprema {
    pub sup_uv: f64,
    pub sup_q_tt: f64,
    pub sup_q_inf_sq: f64,
}

/// `K` and `C̃` from simulated trajectories.
///
/// `u` and `v` must share their grid and snapshot positions; `q` is sampled on
/// the cubic evolution variable.
pub fn estimate_constants(
    u: &Trajectory,
    v: &Trajectory,
    q: &Trajectory,
    c2: f64,
    delta: f64,
) -> Result<(BoundConstants, Suprema)> {
    if u.is_empty() || v.is_empty() || q.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if u.len() != v.len() {
        return Err(Error::InvalidParams(format!(
            "u has {} snapshots but v has {}",
            u.len(),
            v.len()
        )));
    }
    let mut sup_uv: f64 = 0.0;
    for (a, b) in u.snapshots.iter().zip(&v.snapshots) {
        if !a.grid().same_as(b.grid()) {
            return Err(Error::GridMismatch);
        }
        if (a.z() - b.z()).abs() > 1e-12 * (1.0 + a.z().abs()) {
            return Err(Error::InvalidParams(format!(
                "u and v snapshots at different z: {} vs {}",
                a.z(),
                b.z()
            )));
        }
        let m = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x.norm_sqr() + y.norm_sqr())
            .fold(0.0, f64::max);
        sup_uv = sup_uv.max(m);
    }
    let mut spectral = Spectral::new(q.snapshots[0].len());
    let mut sup_q_tt: f64 = 0.0;
    let mut sup_q_inf: f64 = 0.0;
    for s in &q.snapshots {
        sup_q_tt = sup_q_tt.max(s.spectral_second_derivative_with(&mut spectral).l2_norm());
        sup_q_inf = sup_q_inf.max(s.max_abs());
    }
    let sup_q_inf_sq = sup_q_inf * sup_q_inf;
    let c_tilde = (4.0 * sup_q_tt).max(2.0 * sup_q_inf_sq);
    let consts = BoundConstants::new(sup_uv, c_tilde, c2, delta)?;
    Ok((
        consts,
        Suprema {
            sup_uv,
            sup_q_tt,
            sup_q_inf_sq,
        },
    ))
}

/// `(8/C̃)(e^{C̃Z/2} - 1)`, with the limit `4Z` at `C̃ = 0`.
pub fn growth(big_z: f64, c_tilde: f64) -> f64 {
    let x = 0.5 * c_tilde * big_z;
    if x == 0.0 {
        4.0 * big_z
    } else {
        4.0 * big_z * x.exp_m1() / x
    }
}

/// Bound on `‖T Q_T(Z)‖`.
pub fn h_bound(big_z: f64, consts: &BoundConstants) -> f64 {
    let a = consts.amplitude(consts.delta);
    let x = 0.5 * consts.c_tilde * big_z;
    // a e^x - 1 = (a - 1) + a (e^x - 1)
    (a - 1.0) + a * x.exp_m1()
}

/// `η(Z, δ) = δ + ((C₂/2 + 1)δ + 1) E(Z) - 4Z`.
pub fn eta(big_z: f64, delta: f64, consts: &BoundConstants) -> f64 {
    let e = growth(big_z, consts.c_tilde);
    // (E - 4Z) is evaluated as one expression to avoid cancellation
    let excess = if consts.c_tilde == 0.0 {
        0.0
    } else {
        excess_growth(big_z, consts.c_tilde)
    };
    delta + (consts.c2 / 2.0 + 1.0) * delta * e + excess
}

/// `E(Z) - 4Z = (8/C̃)(e^x - 1 - x)`, `x = C̃Z/2`.
fn excess_growth(big_z: f64, c_tilde: f64) -> f64 {
    let x = 0.5 * c_tilde * big_z;
    let tail = if x.abs() < 1e-3 {
        // x²/2 + x³/6 + x⁴/24 + x⁵/120
        x * x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)))
    } else {
        x.exp_m1() - x
    };
    8.0 / c_tilde * tail
}

/// Bound on `‖T² Q(Z)‖`; the same as `eta(Z, consts.delta)`.
pub fn f_bound(big_z: f64, consts: &BoundConstants) -> f64 {
    eta(big_z, consts.delta, consts)
}

/// Bound on `‖t² v(z)‖`.
pub fn g_bound(z: f64, consts: &BoundConstants) -> f64 {
    (2.0 * consts.c2 * z).exp() * eta(consts.big_z(z), consts.delta, consts)
}

/// Bound on `‖v(z) - u(z)‖`.
pub fn distance_bound(z: f64, consts: &BoundConstants, variant: Variant) -> f64 {
    variant.power(consts.c2) / 4.0
        * eta(consts.big_z(z), consts.delta, consts)
        * z
        * ((2.0 * consts.c2 + consts.c) * z).exp()
}

/// `G(z, ε) = 4ε e^{-(2C₂+C)z} / (C₂^p z)`.
pub fn g_func(z: f64, epsilon: f64, consts: &BoundConstants, variant: Variant) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::NonPositiveZ(z));
    }
    Ok(4.0 * epsilon * (-(2.0 * consts.c2 + consts.c) * z).exp() / (variant.power(consts.c2) * z))
}

/// `H(z) = E(Z(z)) - 4Z(z)`.
pub fn h_func(z: f64, consts: &BoundConstants) -> f64 {
    if consts.c_tilde == 0.0 {
        return 0.0;
    }
    excess_growth(consts.big_z(z), consts.c_tilde)
}

/// `lim_{z→∞} H(z)`.
pub fn h_limit(consts: &BoundConstants) -> f64 {
    h_func(f64::INFINITY, consts)
}

/// `n` points from `lo` to `hi` in geometric progression.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "geometric grid needs 0 < lo < hi and n >= 2");
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64).exp()).collect();
    out[n - 1] = hi;
    out
}

/// The default z-grid for a given `C₂`.
pub fn default_z_grid(c2: f64) -> Vec<f64> {
    geometric_grid(GRID_START, HORIZON_FACTOR / c2, GRID_POINTS)
}

/// Result of [`find_l`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthScale {
    pub l: f64,
    /// `G - H` stayed positive up to the horizon, which is returned as `l`.
    pub saturated: bool,
}

/// First zero of `G(·, ε) - H` on `(0, 10/C₂]`.
pub fn find_l(epsilon: f64, consts: &BoundConstants, variant: Variant) -> Result<LengthScale> {
    find_l_within(epsilon, consts, variant, HORIZON_FACTOR / consts.c2)
}

/// As [`find_l`] with an explicit horizon.
///
/// The sign change is located on a geometric grid and refined by bisection to
/// machine precision. The returned `l` is the left end of the final bracket, so
/// `G(l) - H(l) >= 0`.
pub fn find_l_within(
    epsilon: f64,
    consts: &BoundConstants,
    variant: Variant,
    horizon: f64,
) -> Result<LengthScale> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParams(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(horizon > GRID_START) {
        return Err(Error::InvalidParams(format!("horizon {horizon} is below {GRID_START}")));
    }
    let gap = |z: f64| -> Result<f64> { Ok(g_func(z, epsilon, consts, variant)? - h_func(z, consts)) };
    let grid = geometric_grid(GRID_START, horizon, GRID_POINTS);
    let first = gap(grid[0])?;
    if !(first > 0.0) {
        return Err(Error::BracketFailure {
            horizon,
            diagnostics: format!("G - H = {first:e} at z = {GRID_START:e}; epsilon is too small"),
        });
    }
    let mut lo = grid[0];
    let mut hi = None;
    for &z in &grid[1..] {
        let d = gap(z)?;
        if !d.is_finite() {
            return Err(Error::BracketFailure {
                horizon,
                diagnostics: format!("G - H is not finite at z = {z}"),
            });
        }
        if d < 0.0 {
            hi = Some(z);
            break;
        }
        lo = z;
    }
    let Some(mut hi) = hi else {
        return Ok(LengthScale {
            l: horizon,
            saturated: true,
        });
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid)? >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LengthScale {
        l: lo,
        saturated: false,
    })
}

/// Largest admissible initial moment bound for closeness `ε` on `[0, L]`:
/// `[1 + (C₂/2 + 1) E(Z(L))]⁻¹ (G(L, ε) - H(L))`.
pub fn delta_max(l: f64, epsilon: f64, consts: &BoundConstants, variant: Variant) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::NonPositiveZ(l));
    }
    let gap = g_func(l, epsilon, consts, variant)? - h_func(l, consts);
    if gap < 0.0 {
        return Err(Error::LTooLarge { l, gap });
    }
    let e = growth(consts.big_z(l), consts.c_tilde);
    Ok(gap / (1.0 + (consts.c2 / 2.0 + 1.0) * e))
}

/// Smallest `ε` with `G(L̄, ε) ≥ H(L̄)`: any larger `ε` leaves room for a
/// positive `δ` on `[0, L̄]`.
pub fn epsilon_threshold(l_bar: f64, consts: &BoundConstants, variant: Variant) -> Result<f64> {
    if !(l_bar > 0.0) {
        return Err(Error::NonPositiveZ(l_bar));
    }
    Ok(h_func(l_bar, consts) * variant.power(consts.c2) * l_bar * ((2.0 * consts.c2 + consts.c) * l_bar).exp()
        / 4.0)
}

/// Longest `L` in `(0, l_max]` with `δ ≤ δ_max(L, ε)`, by bisection; `δ_max`
/// decreases in `L`. Returns 0 when even the first grid point fails.
pub fn admissible_length(
    delta: f64,
    epsilon: f64,
    consts: &BoundConstants,
    variant: Variant,
    l_max: f64,
) -> Result<f64> {
    let ok = |l: f64| -> Result<bool> {
        match delta_max(l, epsilon, consts, variant) {
            Ok(d) => Ok(delta <= d),
            Err(Error::LTooLarge { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if ok(l_max)? {
        return Ok(l_max);
    }
    let mut lo = GRID_START.min(l_max);
    if !ok(lo)? {
        return Ok(0.0);
    }
    let mut hi = l_max;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Index of the first sample where `values` fails to be nondecreasing, if any.
pub fn first_decrease(values: &[f64]) -> Option<usize> {
    values.windows(2).position(|w| w[1] < w[0]).map(|i| i + 1)
}
