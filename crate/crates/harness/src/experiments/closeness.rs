//! Closeness of the dissipative and the integrable evolution from a common
//! datum, measured against the explicit bounds.
//!
//! The bound constants depend on the trajectories and the admissible moment
//! bound depends on the constants, so the datum is scaled down until its
//! moments sit below `δ = 0.9 δ_max(L, ε)`; each pass re-runs the three
//! evolutions and re-estimates `K`, `C̃`. Both moments are homogeneous of
//! degree one in the amplitude, so a scale factor always exists.

use nlse_core::bounds::{self, BoundConstants, Suprema, Variant};
use nlse_core::solver::{self, Trajectory};
use nlse_core::transform::{self, MapParams};
use nlse_core::{ComplexField, Model};
use serde::Serialize;

use crate::config::{ExperimentConfig, ModelKind};
use crate::error::{HarnessError, Result};
use crate::output::{LineChart, RunDir, Series};

/// Safety factor applied to `δ_max` and to the datum rescaling.
pub const SAFETY: f64 = 0.9;

#[derive(Clone, Debug, Serialize)]
pub struct Sample {
    pub z: f64,
    #[serde(rename = "Z")]
    pub big_z: f64,
    pub in_interval: bool,
    pub measured_distance: f64,
    pub distance_bound: f64,
    pub distance_bound_paper_literal: f64,
    pub measured_t2_v: f64,
    pub g_bound: f64,
    pub measured_t_qt: f64,
    pub h_bound: f64,
    pub measured_t2_q: f64,
    pub f_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub z: f64,
    pub quantity: &'static str,
    pub measured: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosenessReport {
    pub c1: i8,
    pub c2: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
    pub suprema: Suprema,
    pub delta: f64,
    pub delta_admissible: bool,
    pub epsilon: f64,
    #[serde(rename = "L_of_epsilon")]
    pub l_of_epsilon: f64,
    #[serde(rename = "L_saturated")]
    pub l_saturated: bool,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "L_clipped")]
    pub l_clipped: bool,
    pub delta_max: f64,
    pub variant: Variant,
    pub scale_factor: f64,
    pub passes: usize,
    pub initial_t2_moment: f64,
    pub initial_t_ut_moment: f64,
    pub eta_nondecreasing: bool,
    pub max_distance_in_interval: f64,
    pub warnings: Vec<String>,
    pub samples: Vec<Sample>,
    pub violations: Vec<Violation>,
    pub verdict: &'static str,
}

impl ClosenessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The three evolutions from one datum.
pub struct Runs {
    pub u: Trajectory,
    pub v: Trajectory,
    pub q: Trajectory,
}

pub struct Closeness {
    pub report: ClosenessReport,
    pub runs: Runs,
}

pub(crate) fn evolve_all(cfg: &ExperimentConfig, v0: &ComplexField) -> Result<Runs> {
    let m = cfg.require_model()?;
    let s = cfg.require_solver()?;
    let split = cfg.split_step()?;
    let v = solver::evolve(&m.model(ModelKind::Integrable), v0, s.z_end, &split)?;
    let u = solver::evolve(&m.model(ModelKind::Dissipative), v0, s.z_end, &split)?;
    let p = MapParams::new(m.c2)?;
    let q0 = transform::inverse_map_natural(v0, p)?;
    let targets = v.z_values[1..]
        .iter()
        .map(|&z| transform::z_to_cubic(z, m.c2))
        .collect::<nlse_core::Result<Vec<_>>>()?;
    let q = solver::evolve_through(&Model::Cubic { rho: m.rho() }, &q0, &targets, s.dz)?;
    Ok(Runs { u, v, q })
}

fn moments(v0: &ComplexField) -> (f64, f64) {
    (v0.weighted_norm_t2(), v0.weighted_norm_t_ut())
}

pub fn run_closeness(cfg: &ExperimentConfig) -> Result<Closeness> {
    let m = *cfg.require_model()?;
    if m.rho() != m.c1 {
        return Err(HarnessError::Config {
            path: "model.rho".into(),
            message: "the closeness experiment needs rho = c1".into(),
        });
    }
    let s = *cfg.require_solver()?;
    if !(s.z_end > 0.0) {
        return Err(HarnessError::Config {
            path: "solver.z_end".into(),
            message: "must be positive for the closeness experiment".into(),
        });
    }
    let b = cfg.bounds.clone();
    let mut v0 = cfg.initial_field(ModelKind::Integrable)?;
    let mut scale_factor = 1.0;
    let mut warnings = Vec::new();

    let mut pass = 0;
    let (runs, consts, sup, root, l, d_max, delta) = loop {
        pass += 1;
        let runs = evolve_all(cfg, &v0)?;
        let (base, sup) = bounds::estimate_constants(&runs.u, &runs.v, &runs.q, m.c2, 0.0)?;
        let root = bounds::find_l(b.epsilon, &base, b.variant)?;
        let l = (b.l_fraction * root.l).min(s.z_end);
        let d_max = bounds::delta_max(l, b.epsilon, &base, b.variant)?;
        let delta = b.delta.unwrap_or(SAFETY * d_max);
        let (t2, tut) = moments(&v0);
        let worst = t2.max(tut);
        if worst == 0.0 || worst < delta {
            break (runs, base.with_delta(delta), sup, root, l, d_max, delta);
        }
        if pass >= b.max_rescale || delta == 0.0 {
            return Err(HarnessError::Core(nlse_core::Error::InvalidParams(format!(
                "datum moments {worst:e} still exceed delta = {delta:e} after {pass} rescaling passes"
            ))));
        }
        let factor = SAFETY * delta / worst;
        v0 = v0.scaled(factor.into());
        scale_factor *= factor;
    };

    if root.saturated {
        warnings.push(format!("G - H stays positive up to z = {}; L(epsilon) is the horizon", root.l));
    }
    if let Some(hint) = cfg.split_step()?.stability_hint(v0.grid()) {
        warnings.push(hint);
    }
    for (name, traj) in [("u", &runs.u), ("v", &runs.v), ("Q", &runs.q)] {
        let last = traj.last();
        let peak = last.max_abs();
        if peak > 0.0 && last.edge_max() > 1e-6 * peak {
            warnings.push(format!(
                "{name} reaches the box edge (edge/peak = {:.2e}); widen the grid",
                last.edge_max() / peak
            ));
        }
    }

    let (t2, tut) = moments(&v0);
    let report = assemble(&runs, &consts, sup, b.epsilon, b.variant, l, root, d_max, delta);
    let report = ClosenessReport {
        c1: m.c1.into(),
        l_clipped: b.l_fraction * root.l > s.z_end,
        scale_factor,
        passes: pass,
        initial_t2_moment: t2,
        initial_t_ut_moment: tut,
        warnings,
        ..report
    };
    Ok(Closeness { report, runs })
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    runs: &Runs,
    consts: &BoundConstants,
    suprema: Suprema,
    epsilon: f64,
    variant: Variant,
    l: f64,
    root: bounds::LengthScale,
    delta_max: f64,
    delta: f64,
) -> ClosenessReport {
    let mut samples = Vec::with_capacity(runs.v.len());
    let mut violations = Vec::new();
    // Q carries the initial snapshot plus one per positive z of v
    for (i, (v, u)) in runs.v.snapshots.iter().zip(&runs.u.snapshots).enumerate() {
        let q = &runs.q.snapshots[i];
        let z = v.z();
        let big_z = q.z();
        let sample = Sample {
            z,
            big_z,
            in_interval: z <= l,
            measured_distance: v.distance(u).expect("u and v share the grid"),
            distance_bound: bounds::distance_bound(z, consts, variant),
            distance_bound_paper_literal: bounds::distance_bound(z, consts, Variant::PaperLiteral),
            measured_t2_v: v.weighted_norm_t2(),
            g_bound: bounds::g_bound(z, consts),
            measured_t_qt: q.weighted_norm_t_ut(),
            h_bound: bounds::h_bound(big_z, consts),
            measured_t2_q: q.weighted_norm_t2(),
            f_bound: bounds::f_bound(big_z, consts),
        };
        if sample.in_interval {
            let checks = [
                ("distance", sample.measured_distance, sample.distance_bound),
                ("t2_v", sample.measured_t2_v, sample.g_bound),
                ("t_qt", sample.measured_t_qt, sample.h_bound),
                ("t2_q", sample.measured_t2_q, sample.f_bound),
            ];
            for (quantity, measured, bound) in checks {
                if !(measured <= bound) {
                    violations.push(Violation {
                        z,
                        quantity,
                        measured,
                        bound,
                    });
                }
            }
        }
        samples.push(sample);
    }
    let etas: Vec<f64> = samples.iter().map(|s| s.f_bound).collect();
    let max_distance_in_interval = samples
        .iter()
        .filter(|s| s.in_interval)
        .map(|s| s.measured_distance)
        .fold(0.0, f64::max);
    ClosenessReport {
        c1: 0,
        c2: consts.c2,
        k: consts.k,
        c: consts.c,
        c_tilde: consts.c_tilde,
        suprema,
        delta,
        delta_admissible: delta < delta_max,
        epsilon,
        l_of_epsilon: root.l,
        l_saturated: root.saturated,
        l,
        l_clipped: false,
        delta_max,
        variant,
        scale_factor: 1.0,
        passes: 0,
        initial_t2_moment: 0.0,
        initial_t_ut_moment: 0.0,
        eta_nondecreasing: bounds::first_decrease(&etas).is_none(),
        max_distance_in_interval,
        warnings: Vec::new(),
        verdict: if violations.is_empty() { "pass" } else { "fail" },
        samples,
        violations,
    }
}

pub fn write_closeness(out: &RunDir, run: &Closeness) -> Result<()> {
    let r = &run.report;
    out.table("metrics.csv", &r.samples)?;
    out.report(r)?;
    out.fields("v", &run.runs.v.snapshots)?;
    out.fields("u", &run.runs.u.snapshots)?;
    out.fields("q", &run.runs.q.snapshots)?;
    let pick = |f: fn(&Sample) -> f64| -> Vec<(f64, f64)> { r.samples.iter().map(|s| (s.z, f(s))).collect() };
    out.plot(
        "distance",
        &LineChart::new("||v - u|| against the bound", "z", "L2 distance")
            .log_y()
            .with(Series::new("measured", pick(|s| s.measured_distance)))
            .with(Series::new("bound", pick(|s| s.distance_bound)).dashed())
            .with(Series::new("bound (C2/4)", pick(|s| s.distance_bound_paper_literal)).dashed()),
    )?;
    out.plot(
        "moments",
        &LineChart::new("weighted moments against their bounds", "z", "norm")
            .log_y()
            .with(Series::new("||t^2 v||", pick(|s| s.measured_t2_v)))
            .with(Series::new("g bound", pick(|s| s.g_bound)).dashed())
            .with(Series::new("||T Q_T||", pick(|s| s.measured_t_qt)))
            .with(Series::new("h bound", pick(|s| s.h_bound)).dashed())
            .with(Series::new("||T^2 Q||", pick(|s| s.measured_t2_q)))
            .with(Series::new("f bound", pick(|s| s.f_bound)).dashed()),
    )?;
    Ok(())
}
