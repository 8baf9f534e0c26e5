//! Plain propagation of one model from the configured datum.

use nlse_core::solver::{self, Trajectory};
use serde::Serialize;

use crate::config::{ExperimentConfig, ModelKind};
use crate::error::Result;
use crate::output::{LineChart, RunDir, Series};

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub z: f64,
    pub mass: f64,
    pub l2: f64,
    pub t2_moment: f64,
    pub t_ut_moment: f64,
    pub max_abs: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateReport {
    pub model: ModelKind,
    pub z_end: f64,
    pub dz: f64,
    pub n: usize,
    pub snapshots: usize,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub relative_mass_drift: f64,
    pub edge_ratio: f64,
    pub warnings: Vec<String>,
}

pub struct Simulation {
    pub report: SimulateReport,
    pub rows: Vec<Row>,
    pub trajectory: Trajectory,
}

pub fn run_simulate(cfg: &ExperimentConfig) -> Result<Simulation> {
    let m = cfg.require_model()?;
    let s = cfg.require_solver()?;
    let split = cfg.split_step()?;
    let u0 = cfg.initial_field(m.kind)?;
    let traj = solver::evolve(&m.model(m.kind), &u0, s.z_end, &split)?;
    let rows: Vec<Row> = traj
        .snapshots
        .iter()
        .zip(&traj.observables)
        .map(|(f, o)| Row {
            z: o.z,
            mass: f.mass(),
            l2: o.l2,
            t2_moment: o.t2_moment,
            t_ut_moment: o.t_ut_moment,
            max_abs: f.max_abs(),
        })
        .collect();
    let (m0, m1) = (rows[0].mass, rows[rows.len() - 1].mass);
    let last = traj.last();
    let edge_ratio = if last.max_abs() > 0.0 { last.edge_max() / last.max_abs() } else { 0.0 };
    let mut warnings = Vec::new();
    if let Some(h) = split.stability_hint(u0.grid()) {
        warnings.push(h);
    }
    if edge_ratio > 1e-6 {
        warnings.push(format!("the field reaches the box edge (edge/peak = {edge_ratio:.2e})"));
    }
    let report = SimulateReport {
        model: m.kind,
        z_end: s.z_end,
        dz: s.dz,
        n: u0.len(),
        snapshots: traj.len(),
        mass_initial: m0,
        mass_final: m1,
        relative_mass_drift: if m0 > 0.0 { (m1 - m0).abs() / m0 } else { 0.0 },
        edge_ratio,
        warnings,
    };
    Ok(Simulation {
        report,
        rows,
        trajectory: traj,
    })
}

pub fn write_simulate(out: &RunDir, sim: &Simulation) -> Result<()> {
    out.table("metrics.csv", &sim.rows)?;
    out.report(&sim.report)?;
    out.fields("u", &sim.trajectory.snapshots)?;
    let pick = |f: fn(&Row) -> f64| -> Vec<(f64, f64)> { sim.rows.iter().map(|r| (r.z, f(r))).collect() };
    out.plot(
        "moments",
        &LineChart::new("observables", "z", "value")
            .with(Series::new("||u||", pick(|r| r.l2)))
            .with(Series::new("||t^2 u||", pick(|r| r.t2_moment)))
            .with(Series::new("||t u_t||", pick(|r| r.t_ut_moment)))
            .with(Series::new("max |u|", pick(|r| r.max_abs))),
    )
}
