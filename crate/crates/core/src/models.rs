//! Parameter sets for the fiber equation and the Painlevé constraint engine.
//!
//! # Normalization
//!
//! The fiber equation is `i u_z = -(β₂/2) u_tt + γ e^{-αz} |u|² u`. With
//! `t = T₀ τ`, `z = L ζ`, `u = √P ψ` and
//!
//! * `L = 2 T₀² / |β₂|` (twice the dispersion length),
//! * `P = 1 / (γ L)`,
//!
//! it becomes `i ψ_ζ = -sgn(β₂) ψ_ττ + e^{-αLζ} |ψ|² ψ`. For normal dispersion
//! (`β₂ > 0`) this is `i ψ_ζ + ψ_ττ + C₁ e^{-C₂ζ}|ψ|²ψ = 0` with `C₁ = -1`. For
//! anomalous dispersion the conjugate field `ψ̄` satisfies the same form with
//! `C₁ = +1`, so the dimensionless envelope is the complex conjugate of the
//! scaled physical one in the focusing case. In both cases `C₂ = α L`, and a
//! pulse of peak power `P₀` enters with amplitude `√(P₀/P)`.
//!
//! # Painlevé condition
//!
//! For `i v_z + f v_tt + g|v|²v + (V₀ + V₁t + V₂t²) v + i h v = 0` with
//! coefficients depending on `z` only, the equation passes the WTC test when
//!
//! ```text
//! (4f²g g_z - 2f f_z g²) h - 4f²g²h² - 2f²g² h_z - g² f f_zz
//!     + f² g g_zz - 2f² g_z² + f_z² g² + f_z g f g_z + 4 V₂ f³ g² = 0
//! ```
//!
//! [`painleve_residual`] evaluates the left side pointwise and
//! [`v2_from_fg`] solves it for `V₂` when `h ≡ 0`.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A coefficient restricted to `±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("expected +1 or -1, got {other}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

/// Dimensional fiber parameters. Units are whatever the caller uses
/// consistently (e.g. km, ps, W).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberParams {
    /// Loss coefficient, 1/length.
    pub alpha: f64,
    /// Group-velocity dispersion, time²/length.
    pub beta2: f64,
    /// Kerr coefficient, 1/(power·length).
    pub gamma: f64,
    /// Input pulse width.
    pub t0: f64,
    /// Input peak power.
    pub p0: f64,
}

impl FiberParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive("alpha", self.alpha)?;
        positive("gamma", self.gamma)?;
        positive("T0", self.t0)?;
        positive("P0", self.p0)?;
        if !self.beta2.is_finite() || self.beta2 == 0.0 {
            return Err(Error::InvalidParams(format!(
                "beta2 must be finite and nonzero, got {}",
                self.beta2
            )));
        }
        Ok(())
    }

    /// `L_D = T₀² / |β₂|`.
    pub fn dispersion_length(&self) -> f64 {
        self.t0 * self.t0 / self.beta2.abs()
    }

    /// `L_NL = 1 / (γ P₀)`.
    pub fn nonlinear_length(&self) -> f64 {
        1.0 / (self.gamma * self.p0)
    }
}

/// Coefficients of the dimensionless models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    /// `+1` focusing (anomalous dispersion), `-1` defocusing.
    pub c1: Sign,
    /// Loss per normalized length, `> 0`.
    pub c2: f64,
    /// Sign of the cubic term in the standard equation.
    pub rho: Sign,
}

impl DimensionlessParams {
    /// `ρ` follows `C₁`: the coordinate map carries the sign over unchanged.
    pub fn new(c1: Sign, c2: f64) -> Result<Self> {
        let p = Self { c1, c2, rho: c1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c2.is_finite() && self.c2 > 0.0) {
            return Err(Error::InvalidParams(format!("c2 must be positive, got {}", self.c2)));
        }
        Ok(())
    }
}

/// Result of [`normalize`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Normalization {
    pub params: DimensionlessParams,
    /// Physical length of one normalized unit, `2 T₀²/|β₂|`.
    pub length_scale: f64,
    /// Physical time of one normalized unit, `T₀`.
    pub time_scale: f64,
    /// Power of one normalized unit, `1/(γ L)`.
    pub power_scale: f64,
    /// Peak amplitude of the input pulse in normalized units, `√(P₀/P)`.
    pub input_amplitude: f64,
    /// The dimensionless envelope is the conjugate of the scaled physical one.
    pub conjugated: bool,
    /// `L_D / L_NL`.
    pub regime_ratio: f64,
    /// Whether `regime_ratio` lies within the requested factor of 1.
    pub regime_ok: bool,
}

impl Normalization {
    pub fn alpha(&self) -> f64 {
        self.params.c2 / self.length_scale
    }

    pub fn beta2(&self) -> f64 {
        -self.params.c1.value() * 2.0 * self.time_scale * self.time_scale / self.length_scale
    }

    /// `γ P₀` reconstructed from the scales.
    pub fn gamma_p0(&self) -> f64 {
        self.input_amplitude * self.input_amplitude / self.length_scale
    }
}

/// Brings the fiber equation to `i u_z + u_tt + C₁ e^{-C₂z}|u|²u = 0`.
///
/// `regime_factor` bounds `L_D/L_NL` for the advisory regime check; it is
/// reported, never enforced.
pub fn normalize(params: &FiberParams, regime_factor: f64) -> Result<Normalization> {
    params.validate()?;
    let length_scale = 2.0 * params.dispersion_length();
    let time_scale = params.t0;
    let power_scale = 1.0 / (params.gamma * length_scale);
    let c1 = if params.beta2 < 0.0 { Sign::Plus } else { Sign::Minus };
    let dimensionless = DimensionlessParams::new(c1, params.alpha * length_scale)?;
    let regime_ratio = params.dispersion_length() / params.nonlinear_length();
    let regime_ok = regime_ratio <= regime_factor && regime_ratio >= 1.0 / regime_factor;
    Ok(Normalization {
        params: dimensionless,
        length_scale,
        time_scale,
        power_scale,
        input_amplitude: (params.p0 / power_scale).sqrt(),
        conjugated: c1 == Sign::Plus,
        regime_ratio,
        regime_ok,
    })
}

/// A real coefficient of `z`.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficient {
    Const(f64),
    /// `scale · e^{rate·z}`.
    Exp { scale: f64, rate: f64 },
    /// Tabulated values; derivatives by finite differences on the nodes.
    Samples { z: Vec<f64>, values: Vec<f64> },
}

impl Default for Coefficient {
    fn default() -> Self {
        Coefficient::Const(0.0)
    }
}

/// How to obtain derivatives of a coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Derivatives {
    /// Closed form where available, finite differences for samples.
    #[default]
    Exact,
    /// Always finite differences on the evaluation grid.
    FiniteDifference,
}

/// Value and first two derivatives on a z-grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl Coefficient {
    /// Reads a two-column `z,value` CSV.
    pub fn load_samples(path: &Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| parse_err(e.to_string()))?;
        let headers = reader.headers().map_err(|e| parse_err(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["z", "value"] {
            return Err(parse_err(format!("expected header z,value, got {headers:?}")));
        }
        let (mut z, mut values) = (Vec::new(), Vec::new());
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| parse_err(e.to_string()))?;
            let num = |i: usize| {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| parse_err(format!("row {}: {e}", row + 1)))
            };
            z.push(num(0)?);
            values.push(num(1)?);
        }
        if z.windows(2).any(|w| w[1] <= w[0]) {
            return Err(parse_err("z column must be strictly increasing".into()));
        }
        Ok(Coefficient::Samples { z, values })
    }

    /// Closed-form value, if this coefficient has one.
    pub fn closed_form(&self, z: f64) -> Option<f64> {
        match *self {
            Coefficient::Const(c) => Some(c),
            Coefficient::Exp { scale, rate } => Some(scale * (rate * z).exp()),
            Coefficient::Samples { .. } => None,
        }
    }

    fn sampled_on(&self, z_grid: &[f64]) -> Result<Vec<f64>> {
        match self {
            Coefficient::Samples { z, values } => {
                let matches = z.len() == z_grid.len()
                    && z.iter()
                        .zip(z_grid)
                        .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()));
                if !matches {
                    return Err(Error::InvalidParams(
                        "sampled coefficients must be evaluated on their own z nodes".into(),
                    ));
                }
                Ok(values.clone())
            }
            other => Ok(z_grid
                .iter()
                .map(|&z| other.closed_form(z).expect("closed form"))
                .collect()),
        }
    }

    pub fn jet(&self, z_grid: &[f64], mode: Derivatives) -> Result<Jet> {
        match (self, mode) {
            (Coefficient::Const(c), Derivatives::Exact) => Ok(Jet {
                value: vec![*c; z_grid.len()],
                d1: vec![0.0; z_grid.len()],
                d2: vec![0.0; z_grid.len()],
            }),
            (&Coefficient::Exp { scale, rate }, Derivatives::Exact) => {
                let value: Vec<f64> = z_grid.iter().map(|&z| scale * (rate * z).exp()).collect();
                Ok(Jet {
                    d1: value.iter().map(|v| rate * v).collect(),
                    d2: value.iter().map(|v| rate * rate * v).collect(),
                    value,
                })
            }
            _ => {
                let value = self.sampled_on(z_grid)?;
                let (d1, d2) = finite_differences(z_grid, &value)?;
                Ok(Jet { value, d1, d2 })
            }
        }
    }

    /// `∫₀^z c(s) ds`.
    fn integral(&self, z: f64) -> Result<f64> {
        match self {
            Coefficient::Const(c) => Ok(c * z),
            &Coefficient::Exp { scale, rate } => Ok(if rate == 0.0 {
                scale * z
            } else {
                scale * (rate * z).exp_m1() / rate
            }),
            Coefficient::Samples { z: nodes, values } => {
                trapezoid_from_zero(nodes, values, z)
            }
        }
    }
}

// Trapezoid rule over tabulated nodes on [0, z], with linear interpolation of
// the final partial panel.
fn trapezoid_from_zero(nodes: &[f64], values: &[f64], z: f64) -> Result<f64> {
    let fail = |reason: &str| Error::QuadratureFailure {
        z,
        reason: reason.to_string(),
    };
    let (first, last) = match (nodes.first(), nodes.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(fail("no samples")),
    };
    if first > 0.0 || z > last || z < 0.0 {
        return Err(fail("samples do not cover [0, z]"));
    }
    let lerp = |x: f64| {
        let j = nodes.partition_point(|&n| n <= x).clamp(1, nodes.len() - 1);
        let (z0, z1) = (nodes[j - 1], nodes[j]);
        let w = (x - z0) / (z1 - z0);
        values[j - 1] * (1.0 - w) + values[j] * w
    };
    let mut knots = vec![0.0];
    knots.extend(nodes.iter().copied().filter(|&n| n > 0.0 && n < z));
    knots.push(z);
    Ok(knots
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (lerp(w[0]) + lerp(w[1])))
        .sum())
}

/// Fornberg weights for derivatives 0..=2 at `x0` over `nodes`.
fn fornberg(x0: f64, nodes: &[f64]) -> [Vec<f64>; 3] {
    let n = nodes.len();
    let mut c = vec![[0.0f64; 3]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(2);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    [
        c.iter().map(|w| w[0]).collect(),
        c.iter().map(|w| w[1]).collect(),
        c.iter().map(|w| w[2]).collect(),
    ]
}

/// Fourth-order first and second derivatives: centred five-point stencils in
/// the interior, six-point one-sided stencils at the two ends.
pub fn finite_differences(z: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = z.len();
    if n < 5 || y.len() != n {
        return Err(Error::InsufficientGrid(n));
    }
    let width = 6.min(n);
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        let range = if i >= 2 && i + 2 < n {
            i - 2..i + 3
        } else if i < 2 {
            0..width
        } else {
            n - width..n
        };
        let w = fornberg(z[i], &z[range.clone()]);
        d1[i] = w[1].iter().zip(&y[range.clone()]).map(|(a, b)| a * b).sum();
        d2[i] = w[2].iter().zip(&y[range]).map(|(a, b)| a * b).sum();
    }
    Ok((d1, d2))
}

/// Coefficients of the general non-autonomous equation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientFamily {
    pub f: Coefficient,
    pub g: Coefficient,
    pub h: Coefficient,
    pub v0: Coefficient,
    pub v1: Coefficient,
    pub v2: Coefficient,
}

impl CoefficientFamily {
    /// `f = β₂/2`, `g = -γ e^{-αz}`, `h = 0`, `V₂ = α²/(2β₂)`.
    pub fn fiber(alpha: f64, beta2: f64, gamma: f64) -> Self {
        Self {
            f: Coefficient::Const(beta2 / 2.0),
            g: Coefficient::Exp {
                scale: -gamma,
                rate: -alpha,
            },
            v2: Coefficient::Const(alpha * alpha / (2.0 * beta2)),
            ..Self::default()
        }
    }
}

fn nonvanishing(name: &'static str, jet: &Jet, z_grid: &[f64]) -> Result<()> {
    match jet.value.iter().position(|&v| v == 0.0 || !v.is_finite()) {
        Some(i) => Err(Error::SingularCoefficient { name, z: z_grid[i] }),
        None => Ok(()),
    }
}

/// `V₂(z)` making an `h ≡ 0` family Painlevé integrable.
pub fn v2_from_fg(
    family: &CoefficientFamily,
    z_grid: &[f64],
    mode: Derivatives,
) -> Result<Vec<f64>> {
    let h = family.h.jet(z_grid, mode)?;
    if h.value.iter().any(|&v| v != 0.0) {
        return Err(Error::InvalidParams(
            "v2_from_fg needs h = 0; remove the loss with gauge_remove_loss first".into(),
        ));
    }
    let f = family.f.jet(z_grid, mode)?;
    let g = family.g.jet(z_grid, mode)?;
    nonvanishing("f", &f, z_grid)?;
    nonvanishing("g", &g, z_grid)?;
    Ok((0..z_grid.len())
        .map(|i| {
            let (f0, f1, f2) = (f.value[i], f.d1[i], f.d2[i]);
            let (g0, g1, g2) = (g.value[i], g.d1[i], g.d2[i]);
            let numerator = g0 * g0 * f0 * f2 - f0 * f0 * g0 * g2 + 2.0 * f0 * f0 * g1 * g1
                - g0 * g0 * f1 * f1
                - g0 * f0 * g1 * f1;
            numerator / (4.0 * f0.powi(3) * g0 * g0)
        })
        .collect())
}

/// Pointwise left side of the Painlevé condition; zero certifies the family.
pub fn painleve_residual(
    family: &CoefficientFamily,
    z_grid: &[f64],
    mode: Derivatives,
) -> Result<Vec<f64>> {
    let f = family.f.jet(z_grid, mode)?;
    let g = family.g.jet(z_grid, mode)?;
    let h = family.h.jet(z_grid, mode)?;
    let v2 = family.v2.jet(z_grid, mode)?;
    nonvanishing("f", &f, z_grid)?;
    nonvanishing("g", &g, z_grid)?;
    Ok((0..z_grid.len())
        .map(|i| {
            let (f0, f1, f2) = (f.value[i], f.d1[i], f.d2[i]);
            let (g0, g1, g2) = (g.value[i], g.d1[i], g.d2[i]);
            let (h0, h1) = (h.value[i], h.d1[i]);
            let (ff, gg) = (f0 * f0, g0 * g0);
            (4.0 * ff * g0 * g1 - 2.0 * f0 * f1 * gg) * h0 - 4.0 * ff * gg * h0 * h0
                - 2.0 * ff * gg * h1
                - gg * f0 * f2
                + ff * g0 * g2
                - 2.0 * ff * g1 * g1
                + f1 * f1 * gg
                + f1 * g0 * f0 * g1
                + 4.0 * v2.value[i] * ff * f0 * gg
        })
        .collect())
}

/// `exp(-∫₀^z h)`, the amplitude factor that removes a loss/gain term.
pub fn gauge_remove_loss(h: &Coefficient, z: f64) -> Result<f64> {
    Ok((-h.integral(z)?).exp())
}

/// As [`gauge_remove_loss`] for an arbitrary integrand, by adaptive Simpson
/// quadrature.
pub fn gauge_remove_loss_with<F: Fn(f64) -> f64>(h: F, z: f64) -> Result<f64> {
    Ok((-adaptive_simpson(&h, 0.0, z, 1e-13)?).exp())
}

const MAX_DEPTH: u32 = 48;

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fail = |reason: &str| Error::QuadratureFailure {
        z: b,
        reason: reason.to_string(),
    };
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let value = simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
        .ok_or_else(|| fail("tolerance not reached at maximum depth"))?;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(fail("integrand is not finite"))
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return None;
    }
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    Some(
        simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?
            + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?,
    )
}
