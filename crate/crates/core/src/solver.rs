//! Strang split-step Fourier propagation of the three model equations
//!
//! * dissipative: `i u_z + u_tt + C₁ e^{-C₂z}|u|²u = 0`
//! * integrable:  `i v_z + v_tt + C₁ e^{-C₂z}|v|²v + (C₂²/4) t² v = 0`
//! * cubic:       `i Q_Z + Q_TT + ρ|Q|²Q = 0`
//!
//! Each step is `N(dz/2) ∘ D(dz) ∘ N(dz/2)` where `D` is the dispersion
//! multiplier `e^{-ik²dz}` and `N` is the pointwise phase flow of the
//! nonlinear and potential terms. `|u|` is constant along `N`, so the
//! z-dependent coefficient is integrated in closed form and every substep is
//! exact and unitary.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid, Spectral};
use crate::models::{DimensionlessParams, Sign};

/// Relative mass growth per step treated as blow-up.
pub const MASS_GROWTH_LIMIT: f64 = 0.10;
/// Sample modulus treated as blow-up.
pub const AMPLITUDE_LIMIT: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Dissipative { c1: Sign, c2: f64 },
    Integrable { c1: Sign, c2: f64 },
    Cubic { rho: Sign },
}

impl Model {
    pub fn dissipative(p: &DimensionlessParams) -> Self {
        Model::Dissipative { c1: p.c1, c2: p.c2 }
    }

    pub fn integrable(p: &DimensionlessParams) -> Self {
        Model::Integrable { c1: p.c1, c2: p.c2 }
    }

    pub fn cubic(p: &DimensionlessParams) -> Self {
        Model::Cubic { rho: p.rho }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Dissipative { .. } => "dissipative",
            Model::Integrable { .. } => "integrable",
            Model::Cubic { .. } => "cubic",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Model::Dissipative { c2, .. } | Model::Integrable { c2, .. }
                if !(c2.is_finite() && c2 > 0.0) =>
            {
                Err(Error::InvalidParams(format!("c2 must be positive, got {c2}")))
            }
            _ => Ok(()),
        }
    }

    /// Coefficient of `|u|²u` at `z`.
    pub fn nonlinear_coefficient(&self, z: f64) -> f64 {
        match *self {
            Model::Dissipative { c1, c2 } | Model::Integrable { c1, c2 } => {
                c1.value() * (-c2 * z).exp()
            }
            Model::Cubic { rho } => rho.value(),
        }
    }

    /// Coefficient of `t² u`.
    pub fn potential_coefficient(&self) -> f64 {
        match *self {
            Model::Integrable { c2, .. } => c2 * c2 / 4.0,
            _ => 0.0,
        }
    }

    /// `∫_z^{z+δ}` of the nonlinear coefficient.
    fn nonlinear_integral(&self, z: f64, delta: f64) -> f64 {
        match *self {
            Model::Dissipative { c1, c2 } | Model::Integrable { c1, c2 } => {
                let x = c2 * delta;
                let decay = (-c2 * z).exp();
                let integral = if x.abs() < 1e-8 {
                    delta * (1.0 - 0.5 * x)
                } else {
                    -(-x).exp_m1() / c2
                };
                c1.value() * decay * integral
            }
            Model::Cubic { rho } => rho.value() * delta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitStepConfig {
    pub dz: f64,
    pub snapshot_every: usize,
}

impl SplitStepConfig {
    pub fn new(dz: f64, snapshot_every: usize) -> Result<Self> {
        let c = Self { dz, snapshot_every };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dz.is_finite() && self.dz > 0.0) {
            return Err(Error::InvalidParams(format!("dz must be positive, got {}", self.dz)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidParams("snapshot_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Advisory message when `dz · k_max² ≥ π`. The dispersion substep is exact
    /// regardless; the splitting error grows with this product.
    pub fn stability_hint(&self, grid: &Grid) -> Option<String> {
        let product = self.dz * grid.k_max().powi(2);
        (product >= std::f64::consts::PI).then(|| {
            format!("dz * k_max^2 = {product:.3} exceeds pi; splitting error may be large")
        })
    }
}

/// Per-z observables recorded with each snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Observables {
    pub z: f64,
    pub l2: f64,
    pub t2_moment: f64,
    pub t_ut_moment: f64,
}

/// Reusable solver state for one trajectory: FFT plans and cached phases.
pub struct Stepper {
    model: Model,
    grid: Arc<Grid>,
    spectral: Spectral,
    dispersion: Option<(f64, Vec<Complex64>)>,
    potential: Option<(f64, Vec<Complex64>)>,
}

impl Stepper {
    pub fn new(model: Model, grid: Arc<Grid>) -> Result<Self> {
        model.validate()?;
        let spectral = Spectral::new(grid.n());
        Ok(Self {
            model,
            grid,
            spectral,
            dispersion: None,
            potential: None,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn spectral(&mut self) -> &mut Spectral {
        &mut self.spectral
    }

    fn cache_dispersion(&mut self, dz: f64) {
        if self.dispersion.as_ref().map(|(d, _)| *d) != Some(dz) {
            let phases = self
                .grid
                .wavenumbers()
                .iter()
                .map(|k| Complex64::from_polar(1.0, -k * k * dz))
                .collect();
            self.dispersion = Some((dz, phases));
        }
    }

    fn potential_phases(&mut self, delta: f64) -> Option<&[Complex64]> {
        let strength = self.model.potential_coefficient();
        if strength == 0.0 {
            return None;
        }
        if self.potential.as_ref().map(|(d, _)| *d) != Some(delta) {
            let phases = self
                .grid
                .t()
                .iter()
                .map(|t| Complex64::from_polar(1.0, strength * t * t * delta))
                .collect();
            self.potential = Some((delta, phases));
        }
        Some(&self.potential.as_ref().expect("cached").1)
    }

    fn nonlinear_substep(&mut self, values: &mut [Complex64], z: f64, delta: f64) {
        let weight = self.model.nonlinear_integral(z, delta);
        for v in values.iter_mut() {
            *v *= Complex64::from_polar(1.0, weight * v.norm_sqr());
        }
        if let Some(phases) = self.potential_phases(delta) {
            values.iter_mut().zip(phases).for_each(|(v, p)| *v *= p);
        }
    }

    /// Advances `field` by `dz` (negative `dz` runs the scheme backwards).
    pub fn step(&mut self, field: &mut ComplexField, dz: f64) -> Result<()> {
        if !field.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        if !dz.is_finite() || dz == 0.0 {
            return Err(Error::InvalidParams(format!("dz must be finite and nonzero, got {dz}")));
        }
        let z = field.z();
        let before = field.l2_norm();
        let half = 0.5 * dz;

        let mut values = std::mem::take(field.values_vec_mut());
        self.nonlinear_substep(&mut values, z, half);
        self.cache_dispersion(dz);
        self.spectral.forward(&mut values);
        let phases = &self.dispersion.as_ref().expect("cached").1;
        values.iter_mut().zip(phases).for_each(|(v, p)| *v *= p);
        self.spectral.inverse(&mut values);
        self.nonlinear_substep(&mut values, z + half, half);
        *field.values_vec_mut() = values;
        field.set_z(z + dz);

        let unstable = |reason: String| Error::StepInstability { z: z + dz, reason };
        if field.check_finite().is_err() {
            return Err(unstable("non-finite samples".into()));
        }
        let after = field.l2_norm();
        if after > before * (1.0 + MASS_GROWTH_LIMIT) {
            return Err(unstable(format!("L2 norm grew from {before:e} to {after:e}")));
        }
        let peak = field.max_abs();
        if peak > AMPLITUDE_LIMIT {
            return Err(unstable(format!("amplitude {peak:e} exceeds {AMPLITUDE_LIMIT:e}")));
        }
        Ok(())
    }

    pub fn observe(&mut self, field: &ComplexField) -> Observables {
        let du = field.spectral_derivative_with(&mut self.spectral);
        let t_ut = du
            .values()
            .iter()
            .zip(field.grid().t())
            .map(|(v, t)| t * t * v.norm_sqr())
            .sum::<f64>()
            * field.grid().dt();
        Observables {
            z: field.z(),
            l2: field.l2_norm(),
            t2_moment: field.weighted_norm_t2(),
            t_ut_moment: t_ut.sqrt(),
        }
    }
}

/// One Strang step of `model` applied to a copy of `field`.
pub fn step(model: &Model, field: &ComplexField, dz: f64) -> Result<ComplexField> {
    let mut out = field.clone();
    Stepper::new(*model, field.grid().clone())?.step(&mut out, dz)?;
    Ok(out)
}

/// Snapshots of a propagated field.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub model: Model,
    pub z_values: Vec<f64>,
    pub snapshots: Vec<ComplexField>,
    pub observables: Vec<Observables>,
}

impl Trajectory {
    /// Wraps externally produced snapshots (e.g. an analytic solution).
    pub fn from_snapshots(model: Model, snapshots: Vec<ComplexField>) -> Result<Self> {
        let first = snapshots.first().ok_or(Error::EmptyTrajectory)?;
        let grid = first.grid().clone();
        if snapshots.iter().any(|s| !s.grid().same_as(&grid)) {
            return Err(Error::GridMismatch);
        }
        if snapshots.windows(2).any(|w| w[1].z() <= w[0].z()) {
            return Err(Error::InvalidParams("snapshot z must be strictly increasing".into()));
        }
        let mut stepper = Stepper::new(model, grid)?;
        let observables = snapshots.iter().map(|s| stepper.observe(s)).collect();
        Ok(Self {
            model,
            z_values: snapshots.iter().map(|s| s.z()).collect(),
            snapshots,
            observables,
        })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn last(&self) -> &ComplexField {
        self.snapshots.last().expect("trajectories hold at least one snapshot")
    }

    /// Writes `z,l2,t2_moment,t_ut_moment`.
    pub fn write_metrics_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "z,l2,t2_moment,t_ut_moment")?;
        for o in &self.observables {
            writeln!(out, "{},{},{},{}", o.z, o.l2, o.t2_moment, o.t_ut_moment)?;
        }
        Ok(())
    }

    /// Writes one `t,re,im` file per snapshot, `step_<index>.csv`.
    pub fn save_fields(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        for (i, s) in self.snapshots.iter().enumerate() {
            s.save_csv(&dir.join(format!("step_{i:06}.csv")))?;
        }
        Ok(())
    }
}

fn record(traj: &mut Trajectory, stepper: &mut Stepper, field: &ComplexField) {
    traj.z_values.push(field.z());
    traj.observables.push(stepper.observe(field));
    traj.snapshots.push(field.clone());
}

/// Propagates `initial` from `z = 0` to `z_end`.
///
/// Snapshots are taken every `snapshot_every` steps and at `z_end`; the last
/// step is shortened to land on `z_end` exactly.
pub fn evolve(
    model: &Model,
    initial: &ComplexField,
    z_end: f64,
    config: &SplitStepConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if !(z_end.is_finite() && z_end >= 0.0) {
        return Err(Error::InvalidParams(format!("z_end must be nonnegative, got {z_end}")));
    }
    let mut stepper = Stepper::new(*model, initial.grid().clone())?;
    let mut traj = Trajectory {
        model: *model,
        z_values: Vec::new(),
        snapshots: Vec::new(),
        observables: Vec::new(),
    };
    let mut field = initial.clone();
    let z0 = field.z();
    record(&mut traj, &mut stepper, &field);
    let steps = ((z_end / config.dz) - 1e-9).ceil().max(0.0) as usize;
    for k in 1..=steps {
        let (target, dz) = if k == steps {
            (z0 + z_end, z_end - (k - 1) as f64 * config.dz)
        } else {
            (z0 + k as f64 * config.dz, config.dz)
        };
        stepper.step(&mut field, dz)?;
        field.set_z(target);
        if k % config.snapshot_every == 0 || k == steps {
            record(&mut traj, &mut stepper, &field);
        }
    }
    Ok(traj)
}

/// Propagates `initial` through the increasing coordinates `targets`, taking
/// uniform steps no longer than `max_dz` between consecutive targets and
/// recording a snapshot at each one.
pub fn evolve_through(
    model: &Model,
    initial: &ComplexField,
    targets: &[f64],
    max_dz: f64,
) -> Result<Trajectory> {
    SplitStepConfig::new(max_dz, 1)?;
    let mut stepper = Stepper::new(*model, initial.grid().clone())?;
    let mut traj = Trajectory {
        model: *model,
        z_values: Vec::new(),
        snapshots: Vec::new(),
        observables: Vec::new(),
    };
    let mut field = initial.clone();
    record(&mut traj, &mut stepper, &field);
    for &target in targets {
        let span = target - field.z();
        if span < 0.0 {
            return Err(Error::InvalidParams("targets must be increasing".into()));
        }
        if span == 0.0 {
            continue;
        }
        let start = field.z();
        let steps = ((span / max_dz) - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for k in 1..=steps {
            let z_next = if k == steps { target } else { start + k as f64 * h };
            stepper.step(&mut field, h)?;
            field.set_z(z_next);
        }
        record(&mut traj, &mut stepper, &field);
    }
    Ok(traj)
}

/// Grid max of `|i ∂_z u + u_tt + N(z)|u|²u + V t² u|` at an interior
/// snapshot, with a centred difference in z and a spectral `u_tt`.
pub fn residual(model: &Model, traj: &Trajectory, index: usize) -> Result<f64> {
    let len = traj.snapshots.len();
    if index == 0 || index + 1 >= len {
        return Err(Error::BoundaryIndex { index, len });
    }
    let (prev, here, next) = (
        &traj.snapshots[index - 1],
        &traj.snapshots[index],
        &traj.snapshots[index + 1],
    );
    let (h_back, h_fwd) = (here.z() - prev.z(), next.z() - here.z());
    if (h_back - h_fwd).abs() > 1e-9 * h_fwd.abs().max(1e-300) {
        return Err(Error::InvalidParams(format!(
            "snapshots around index {index} are not equally spaced ({h_back} vs {h_fwd})"
        )));
    }
    let mut spectral = Spectral::new(here.grid().n());
    let utt = here.spectral_second_derivative_with(&mut spectral);
    let nonlinear = model.nonlinear_coefficient(here.z());
    let potential = model.potential_coefficient();
    let i = Complex64::new(0.0, 1.0);
    let worst = (0..here.len())
        .map(|j| {
            let u = here.values()[j];
            let uz = (next.values()[j] - prev.values()[j]) / (2.0 * h_fwd);
            let t = here.grid().t()[j];
            (i * uz + utt.values()[j] + u * (nonlinear * u.norm_sqr() + potential * t * t)).norm()
        })
        .fold(0.0, f64::max);
    Ok(worst)
}
