//! Experiments for the dissipative/integrable NLS correspondence: closeness
//! against the explicit bounds, solver convergence, bound sweeps, plain
//! propagation and the Painlevé check.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::Path;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};

use experiments::{closeness, convergence, painleve, simulate, sweep};
use output::RunDir;

#[derive(Clone, Debug)]
pub enum Experiment {
    Simulate,
    Closeness,
    Convergence,
    Sweep { epsilons: Vec<f64>, deltas: Vec<f64> },
    PainleveCheck,
}

/// What a finished run reports back to the command line.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    pub summary: Vec<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    /// 0 when every verdict passed, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.passed { 0 } else { 1 }
    }
}

/// Runs `experiment` and writes its outputs under `out`.
pub fn execute(experiment: &Experiment, cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let dir = RunDir::create(out, &cfg.output)?;
    match experiment {
        Experiment::Simulate => {
            let sim = simulate::run_simulate(cfg)?;
            simulate::write_simulate(&dir, &sim)?;
            let r = &sim.report;
            Ok(Outcome {
                passed: true,
                summary: vec![
                    format!("{:?} model to z = {} in {} snapshots", r.model, r.z_end, r.snapshots),
                    format!("relative mass drift {:.3e}", r.relative_mass_drift),
                ],
                warnings: r.warnings.clone(),
            })
        }
        Experiment::Closeness => {
            let run = closeness::run_closeness(cfg)?;
            closeness::write_closeness(&dir, &run)?;
            let r = &run.report;
            let mut summary = vec![
                format!("K = {:.4e}, C = {:.4e}, C_tilde = {:.4e}", r.k, r.c, r.c_tilde),
                format!(
                    "L(eps = {}) = {:.6}, verified on [0, {:.6}], delta = {:.4e} (delta_max {:.4e})",
                    r.epsilon, r.l_of_epsilon, r.l, r.delta, r.delta_max
                ),
                format!(
                    "datum scaled by {:.4e}; max ||v - u|| on [0, L] = {:.4e}",
                    r.scale_factor, r.max_distance_in_interval
                ),
                format!("verdict: {} ({} violations)", r.verdict, r.violations.len()),
            ];
            for v in r.violations.iter().take(5) {
                summary.push(format!("  z = {}: {} = {:e} > {:e}", v.z, v.quantity, v.measured, v.bound));
            }
            Ok(Outcome {
                passed: r.passed(),
                summary,
                warnings: r.warnings.clone(),
            })
        }
        Experiment::Convergence => {
            let r = convergence::run_convergence(cfg)?;
            convergence::write_convergence(&dir, &r)?;
            let mut summary: Vec<String> = r
                .levels
                .iter()
                .map(|l| format!("dz = {:.3e}: error {:.3e}", l.dz, l.error))
                .collect();
            summary.push(match r.fitted_order {
                Some(p) => format!("fitted order {p:.3}; verdict {}", r.verdict),
                None => format!("no order fitted; verdict {}", r.verdict),
            });
            Ok(Outcome {
                passed: r.passed(),
                summary,
                warnings: Vec::new(),
            })
        }
        Experiment::Sweep { epsilons, deltas } => {
            let r = sweep::run_sweep(cfg, epsilons, deltas)?;
            sweep::write_sweep(&dir, &r)?;
            let mut summary: Vec<String> = r
                .epsilons
                .iter()
                .map(|e| format!("eps = {}: L = {:.6}{}", e.epsilon, e.l_of_epsilon, if e.l_saturated { " (horizon)" } else { "" }))
                .collect();
            summary.push(format!("L_bar = {} needs eps > {:.4e}", r.l_bar, r.epsilon_threshold));
            Ok(Outcome {
                passed: true,
                summary,
                warnings: Vec::new(),
            })
        }
        Experiment::PainleveCheck => {
            let (r, rows) = painleve::run_painleve(cfg)?;
            painleve::write_painleve(&dir, &r, &rows)?;
            let mut summary = vec![format!("max |residual| = {:.3e} over {} points", r.max_abs_residual, r.points)];
            if let Some(e) = r.v2_max_rel_error {
                summary.push(format!("max relative V2 error {e:.3e}"));
            }
            summary.push(format!("verdict: {}", r.verdict));
            Ok(Outcome {
                passed: r.passed(),
                summary,
                warnings: Vec::new(),
            })
        }
    }
}
