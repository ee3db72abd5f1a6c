//! JSON reports and CSV plot tables.

use priorsens_core::{
    export_plot_data, CardinalModuli, PolarGrid, PolarSeries, PriorSpec, Scale, SensitivityLevel,
    SensitivityResult,
};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct BaseJson {
    pub family: &'static str,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl From<&PriorSpec> for BaseJson {
    fn from(p: &PriorSpec) -> Self {
        BaseJson {
            family: p.family().name(),
            gamma1: p.point().gamma1,
            gamma2: p.point().gamma2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryJson {
    pub phi: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub h_post: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CalibratedJson {
    /// `None` when the posterior distance saturates the calibration.
    pub exact: Option<f64>,
    pub approx: f64,
}

/// Provenance of an RW1 run.
#[derive(Debug, Clone, Serialize)]
pub struct Rw1Json {
    pub n: usize,
    pub window: String,
    pub kappa: f64,
    pub kappa_estimate: f64,
    pub kappa_overridden: bool,
    pub engine: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SensitivityReport {
    pub epsilon: f64,
    pub n_angles: usize,
    pub base: BaseJson,
    pub parametrization: &'static str,
    pub worst_case: f64,
    pub worst_angle: f64,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub level: &'static str,
    pub super_sensitive: bool,
    pub calibrated_worst: CalibratedJson,
    pub excluded_angles: Vec<f64>,
    pub degenerate_angles: Vec<f64>,
    pub entries: Vec<EntryJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rw1: Option<Rw1Json>,
}

pub fn scale_name(scale: Scale) -> &'static str {
    match scale {
        Scale::Natural => "natural",
        Scale::LogParameter => "log",
    }
}

pub fn level_name(level: SensitivityLevel) -> &'static str {
    match level {
        SensitivityLevel::Robust => "robust",
        SensitivityLevel::Boundary => "boundary",
        SensitivityLevel::SuperSensitive => "super-sensitive",
    }
}

impl SensitivityReport {
    pub fn new(
        result: &SensitivityResult,
        n_angles: usize,
        scale: Scale,
        rw1: Option<Rw1Json>,
    ) -> Self {
        SensitivityReport {
            epsilon: result.epsilon,
            n_angles,
            base: (&result.base).into(),
            parametrization: scale_name(scale),
            worst_case: result.worst_case,
            worst_angle: result.worst_angle,
            mean: result.mean,
            median: result.median,
            min: result.min,
            level: level_name(result.level()),
            super_sensitive: result.super_sensitive(),
            calibrated_worst: CalibratedJson {
                exact: result.calibrated_worst.exact,
                approx: result.calibrated_worst.approx,
            },
            excluded_angles: result.excluded_angles.clone(),
            degenerate_angles: result.degenerate_angles.clone(),
            entries: result
                .entries
                .iter()
                .map(|e| EntryJson {
                    phi: e.phi,
                    gamma1: e.point.gamma1,
                    gamma2: e.point.gamma2,
                    h_post: e.h_post,
                    ratio: e.ratio,
                })
                .collect(),
            rw1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CardinalJson {
    pub down: f64,
    pub right: f64,
    pub up: f64,
    pub left: f64,
}

impl From<CardinalModuli> for CardinalJson {
    fn from(c: CardinalModuli) -> Self {
        CardinalJson {
            down: c.down,
            right: c.right,
            up: c.up,
            left: c.left,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridReport {
    pub epsilon: f64,
    pub n_angles: usize,
    pub base: BaseJson,
    pub cardinal_moduli: CardinalJson,
    pub solved: usize,
    pub failed_angles: Vec<f64>,
}

impl From<&PolarGrid> for GridReport {
    fn from(g: &PolarGrid) -> Self {
        GridReport {
            epsilon: g.epsilon,
            n_angles: g.n_angles,
            base: (&g.base).into(),
            cardinal_moduli: g.cardinal.into(),
            solved: g.points.len(),
            failed_angles: g.failed_angles.clone(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

fn table<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| CliError::Input(format!("writing CSV: {e}"));
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Input(format!("writing CSV: {e}")))
}

/// `phi,gamma1,gamma2,hellinger_residual`, one row per solved direction.
pub fn grid_csv(grid: &PolarGrid) -> Result<Vec<u8>> {
    table(
        &["phi", "gamma1", "gamma2", "hellinger_residual"],
        grid.points.iter().map(|p| {
            [
                p.phi.to_string(),
                p.point.gamma1.to_string(),
                p.point.gamma2.to_string(),
                p.residual.to_string(),
            ]
        }),
    )
}

/// Polar trace and reference circles: `series,level,phi,radius,x,y`.
pub fn polar_csv(result: &SensitivityResult) -> Result<Vec<u8>> {
    let tables = export_plot_data(result);
    table(
        &["series", "level", "phi", "radius", "x", "y"],
        tables.polar.iter().map(|r| {
            let (series, level) = match r.series {
                PolarSeries::Trace => ("trace", String::new()),
                PolarSeries::Reference(l) => ("reference", l.to_string()),
            };
            [
                series.to_string(),
                level,
                r.phi.to_string(),
                r.radius.to_string(),
                r.x.to_string(),
                r.y.to_string(),
            ]
        }),
    )
}

/// Sensitivity against angle: `phi,ratio,reference_half,reference_one,is_worst`.
pub fn rolled_csv(result: &SensitivityResult) -> Result<Vec<u8>> {
    let tables = export_plot_data(result);
    table(
        &[
            "phi",
            "ratio",
            "reference_half",
            "reference_one",
            "is_worst",
        ],
        tables.rolled.iter().map(|r| {
            [
                r.phi.to_string(),
                r.ratio.to_string(),
                r.reference_half.to_string(),
                r.reference_one.to_string(),
                r.is_worst.to_string(),
            ]
        }),
    )
}
