//! Step-size study of the split-step solver against the exact cubic soliton.

use nlse_core::solver::{self, SplitStepConfig};
use nlse_core::transform;
use serde::Serialize;

use crate::config::{ExperimentConfig, InitialSpec, ModelKind};
use crate::error::{HarnessError, Result};
use crate::output::{LineChart, RunDir, Series};

/// Accepted range for the fitted order of a second-order scheme.
pub const ORDER_RANGE: (f64, f64) = (1.8, 2.2);

#[derive(Clone, Debug, Serialize)]
pub struct Level {
    pub dz: f64,
    pub steps: usize,
    pub error: f64,
    /// `error(dz) / error(dz/2)`; empty for the finest level.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub a: f64,
    pub z_end: f64,
    pub n: usize,
    pub levels: Vec<Level>,
    pub fitted_order: Option<f64>,
    pub monotone: bool,
    pub verdict: &'static str,
}

impl ConvergenceReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

/// Least-squares slope of `log error` against `log dz`.
pub fn fitted_order(dz: &[f64], error: &[f64]) -> Option<f64> {
    if dz.len() < 2 || error.iter().any(|&e| !(e > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = dz.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = error.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let a = match cfg.initial {
        Some(InitialSpec::Soliton { a }) => a,
        _ => {
            return Err(HarnessError::Config {
                path: "initial.kind".into(),
                message: "the convergence study needs a soliton datum".into(),
            })
        }
    };
    let m = cfg.require_model()?;
    let s = cfg.require_solver()?;
    let grid = cfg.require_grid()?;
    let model = m.model(ModelKind::Cubic);
    let q0 = cfg.initial_field(ModelKind::Cubic)?;
    let exact = transform::soliton(a, m.rho(), s.z_end, &grid)?;
    let mut levels = Vec::new();
    for k in 0..cfg.convergence.levels {
        let dz = s.dz / 2f64.powi(k as i32);
        let steps = ((s.z_end / dz) - 1e-9).ceil().max(0.0) as usize;
        let traj = solver::evolve(&model, &q0, s.z_end, &SplitStepConfig::new(dz, usize::MAX)?)?;
        let mut end = traj.last().clone();
        end.set_z(s.z_end);
        levels.push(Level {
            dz,
            steps,
            error: end.distance(&exact)?,
            ratio: None,
        });
    }
    for i in 0..levels.len().saturating_sub(1) {
        let next = levels[i + 1].error;
        levels[i].ratio = (next > 0.0).then(|| levels[i].error / next);
    }
    let dz: Vec<f64> = levels.iter().map(|l| l.dz).collect();
    let err: Vec<f64> = levels.iter().map(|l| l.error).collect();
    let order = fitted_order(&dz, &err);
    let monotone = err.windows(2).all(|w| w[1] < w[0]);
    let zero = err.iter().all(|&e| e == 0.0);
    let pass = zero
        || match order {
            Some(p) => monotone && (ORDER_RANGE.0..=ORDER_RANGE.1).contains(&p),
            None => levels.len() == 1,
        };
    Ok(ConvergenceReport {
        a,
        z_end: s.z_end,
        n: grid.n(),
        levels,
        fitted_order: order,
        monotone,
        verdict: if pass { "pass" } else { "fail" },
    })
}

pub fn write_convergence(out: &RunDir, r: &ConvergenceReport) -> Result<()> {
    out.table("metrics.csv", &r.levels)?;
    out.report(r)?;
    let measured: Vec<(f64, f64)> = r.levels.iter().map(|l| (l.dz, l.error)).collect();
    let reference = match measured.first() {
        Some(&(dz0, e0)) => r.levels.iter().map(|l| (l.dz, e0 * (l.dz / dz0).powi(2))).collect(),
        None => Vec::new(),
    };
    out.plot(
        "convergence",
        &LineChart::new("soliton error against step size", "dz", "L2 error")
            .log_x()
            .log_y()
            .with(Series::new("measured", measured))
            .with(Series::new("slope 2", reference).dashed()),
    )
}
