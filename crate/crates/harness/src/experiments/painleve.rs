//! Painlevé condition for a coefficient family on a z-grid.

use nlse_core::models::{self, Coefficient, Derivatives};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{LineChart, RunDir, Series};

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub z: f64,
    pub v2_computed: Option<f64>,
    pub v2_given: Option<f64>,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PainleveReport {
    pub points: usize,
    pub derivatives: &'static str,
    pub tolerance: f64,
    pub max_abs_residual: f64,
    /// Max relative gap between the given and the computed `V₂`.
    pub v2_max_rel_error: Option<f64>,
    pub verdict: &'static str,
}

impl PainleveReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

pub fn run_painleve(cfg: &ExperimentConfig) -> Result<(PainleveReport, Vec<Row>)> {
    let (mut family, v2_given, z, mode, tolerance) = cfg.painleve_family()?;
    let lossless = matches!(family.h, Coefficient::Const(h) if h == 0.0);
    let computed = if lossless || v2_given.is_none() {
        Some(models::v2_from_fg(&family, &z, mode)?)
    } else {
        None
    };
    let given = match &v2_given {
        Some(v2) => Some(v2.jet(&z, mode)?.value),
        None => None,
    };
    family.v2 = match (v2_given, &computed) {
        (Some(v2), _) => v2,
        (None, Some(values)) => Coefficient::Samples {
            z: z.clone(),
            values: values.clone(),
        },
        (None, None) => unreachable!("v2 is computed whenever it is not given"),
    };
    let residual = models::painleve_residual(&family, &z, mode)?;
    let max_abs_residual = residual.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let v2_max_rel_error = match (&computed, &given) {
        (Some(c), Some(g)) => Some(
            c.iter()
                .zip(g)
                .map(|(c, g)| if *g == 0.0 { c.abs() } else { ((c - g) / g).abs() })
                .fold(0.0, f64::max),
        ),
        _ => None,
    };
    let pass = max_abs_residual < tolerance && v2_max_rel_error.is_none_or(|e| e < tolerance);
    let rows = (0..z.len())
        .map(|i| Row {
            z: z[i],
            v2_computed: computed.as_ref().map(|c| c[i]),
            v2_given: given.as_ref().map(|g| g[i]),
            residual: residual[i],
        })
        .collect();
    let report = PainleveReport {
        points: z.len(),
        derivatives: match mode {
            Derivatives::Exact => "exact",
            Derivatives::FiniteDifference => "finite_difference",
        },
        tolerance,
        max_abs_residual,
        v2_max_rel_error,
        verdict: if pass { "pass" } else { "fail" },
    };
    Ok((report, rows))
}

pub fn write_painleve(out: &RunDir, report: &PainleveReport, rows: &[Row]) -> Result<()> {
    out.table("metrics.csv", rows)?;
    out.report(report)?;
    let chart = LineChart::new("Painleve residual", "z", "|residual|")
        .log_y()
        .with(Series::new("|residual|", rows.iter().map(|r| (r.z, r.residual.abs())).collect()));
    if rows.iter().any(|r| r.v2_computed.is_some()) {
        let pts = rows.iter().filter_map(|r| r.v2_computed.map(|v| (r.z, v))).collect();
        out.plot("v2", &LineChart::new("potential curvature V2", "z", "V2").with(Series::new("computed", pts)))?;
    }
    out.plot("residual", &chart)
}
