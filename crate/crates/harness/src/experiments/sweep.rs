//! Tabulation of `L(ε)`, `δ_max(L, ε)` and the reverse reading: the smallest
//! `ε` that a given propagation distance can certify.

use nlse_core::bounds::{self, BoundConstants, Suprema, Variant};
use serde::Serialize;

use crate::config::{ExperimentConfig, ModelKind};
use crate::error::{HarnessError, Result};
use crate::experiments::closeness;
use crate::output::{LineChart, RunDir, Series};

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub epsilon: f64,
    pub delta: f64,
    #[serde(rename = "L_of_epsilon")]
    pub l_of_epsilon: f64,
    #[serde(rename = "L_saturated")]
    pub l_saturated: bool,
    /// Longest `L ≤ L(ε)` with `δ ≤ δ_max(L, ε)`.
    pub admissible_l: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub z: f64,
    pub delta_max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonEntry {
    pub epsilon: f64,
    #[serde(rename = "L_of_epsilon")]
    pub l_of_epsilon: f64,
    #[serde(rename = "L_saturated")]
    pub l_saturated: bool,
    /// `G(L̄, ε) > H(L̄)`.
    pub certifies_l_bar: bool,
    pub delta_max_curve: Vec<CurvePoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
    pub c2: f64,
    pub constants_source: &'static str,
    pub suprema: Option<Suprema>,
    pub variant: Variant,
    #[serde(rename = "L_bar")]
    pub l_bar: f64,
    /// Smallest `ε` with `G(L̄, ε) ≥ H(L̄)`.
    pub epsilon_threshold: f64,
    pub epsilons: Vec<EpsilonEntry>,
    pub rows: Vec<Row>,
}

fn constants(cfg: &ExperimentConfig) -> Result<(BoundConstants, Option<Suprema>, &'static str)> {
    let m = cfg.require_model()?;
    let b = &cfg.bounds;
    if let (Some(k), Some(ct)) = (b.k, b.c_tilde) {
        return Ok((BoundConstants::new(k, ct, m.c2, 0.0)?, None, "config"));
    }
    let v0 = cfg.initial_field(ModelKind::Integrable)?;
    let runs = closeness::evolve_all(cfg, &v0)?;
    let (est, sup) = bounds::estimate_constants(&runs.u, &runs.v, &runs.q, m.c2, 0.0)?;
    let k = b.k.unwrap_or(est.k);
    let ct = b.c_tilde.unwrap_or(est.c_tilde);
    let source = if b.k.is_some() || b.c_tilde.is_some() { "mixed" } else { "measured" };
    Ok((BoundConstants::new(k, ct, m.c2, 0.0)?, Some(sup), source))
}

pub fn run_sweep(cfg: &ExperimentConfig, epsilons: &[f64], deltas: &[f64]) -> Result<SweepReport> {
    for (name, values) in [("--epsilons", epsilons), ("--deltas", deltas)] {
        if let Some(bad) = values.iter().find(|&&x| !(x.is_finite() && x > 0.0)) {
            return Err(HarnessError::Config {
                path: name.into(),
                message: format!("values must be positive, got {bad}"),
            });
        }
    }
    let m = cfg.require_model()?;
    let variant = cfg.bounds.variant;
    let (consts, suprema, source) = if epsilons.is_empty() {
        (BoundConstants::new(0.0, 0.0, m.c2, 0.0)?, None, "none")
    } else {
        constants(cfg)?
    };
    let l_bar = cfg
        .bounds
        .l_bar
        .or_else(|| cfg.solver.map(|s| s.z_end).filter(|&z| z > 0.0))
        .unwrap_or(1.0 / m.c2);
    let threshold = bounds::epsilon_threshold(l_bar, &consts, variant)?;
    let grid = bounds::default_z_grid(m.c2);

    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for &eps in epsilons {
        let root = bounds::find_l(eps, &consts, variant)?;
        let curve = grid
            .iter()
            .filter(|&&z| z < root.l)
            .filter_map(|&z| {
                bounds::delta_max(z, eps, &consts, variant)
                    .ok()
                    .map(|d| CurvePoint { z, delta_max: d })
            })
            .collect();
        let certifies = bounds::g_func(l_bar, eps, &consts, variant)? > bounds::h_func(l_bar, &consts);
        entries.push(EpsilonEntry {
            epsilon: eps,
            l_of_epsilon: root.l,
            l_saturated: root.saturated,
            certifies_l_bar: certifies,
            delta_max_curve: curve,
        });
        for &delta in deltas {
            rows.push(Row {
                epsilon: eps,
                delta,
                l_of_epsilon: root.l,
                l_saturated: root.saturated,
                admissible_l: bounds::admissible_length(delta, eps, &consts, variant, root.l)?,
            });
        }
    }
    Ok(SweepReport {
        k: consts.k,
        c: consts.c,
        c_tilde: consts.c_tilde,
        c2: consts.c2,
        constants_source: source,
        suprema,
        variant,
        l_bar,
        epsilon_threshold: threshold,
        epsilons: entries,
        rows,
    })
}

pub fn write_sweep(out: &RunDir, r: &SweepReport) -> Result<()> {
    out.table("metrics.csv", &r.rows)?;
    out.report(r)?;
    let mut chart = LineChart::new("largest admissible delta", "L", "delta_max").log_x().log_y();
    for e in &r.epsilons {
        let pts = e.delta_max_curve.iter().map(|p| (p.z, p.delta_max)).collect();
        chart = chart.with(Series::new(&format!("eps = {}", e.epsilon), pts));
    }
    out.plot("delta_max", &chart)?;
    let l_of_eps = r.epsilons.iter().map(|e| (e.epsilon, e.l_of_epsilon)).collect();
    out.plot(
        "l_of_epsilon",
        &LineChart::new("L(epsilon)", "epsilon", "L").log_x().with(Series::new("L", l_of_eps)),
    )
}
