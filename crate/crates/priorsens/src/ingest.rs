use std::path::Path;

use priorsens_core::seasonal::precision_from_residuals;
use priorsens_core::{deseasonalize, ParamPoint, Rw1Model, SeriesWindow};

use crate::error::Result;
use crate::io::read_counts;

#[derive(Debug, Clone)]
pub struct Ingested {
    pub model: Rw1Model,
    /// `1 / sample variance` of the residuals.
    pub kappa_estimate: f64,
    /// Whether the model's kappa came from an override.
    pub kappa_overridden: bool,
}

/// RW1 model from a monthly count CSV: square root, calendar-month means
/// removed within the window, centred.
pub fn ingest_timeseries(
    path: &Path,
    window: SeriesWindow,
    kappa: Option<f64>,
    prior: ParamPoint,
) -> Result<Ingested> {
    let series = read_counts(path)?;
    let y = deseasonalize(&series.counts, series.months.as_deref(), window)?;
    let kappa_estimate = precision_from_residuals(&y)?;
    let model = Rw1Model::new(y, kappa.unwrap_or(kappa_estimate), prior)?;
    Ok(Ingested {
        model,
        kappa_estimate,
        kappa_overridden: kappa.is_some(),
    })
}
