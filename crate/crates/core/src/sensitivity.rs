//! Circular and worst-case sensitivity.
//!
//! For every contour point the posterior distance is divided by `epsilon`;
//! the set of ratios is the circular sensitivity and its maximum the
//! worst-case sensitivity. Values above 1 are reported as they are.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use libm::{cos, sin};

use crate::calibration::{calibrated_ratio, CalibratedRatio};
use crate::contour::{ContourPoint, PolarGrid};
use crate::density::{ParamPoint, PriorSpec};
use crate::error::{Error, Result};
use crate::reweight::{reweight_posterior, PosteriorInput};

/// Worst cases within this of 1 are reported as the boundary case.
pub const BOUNDARY_TOLERANCE: f64 = 5e-5;

/// Ratios of the reference circles in the polar plot table.
pub const REFERENCE_RATIOS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityEntry {
    pub phi: f64,
    pub point: ParamPoint,
    /// Hellinger distance between the perturbed and the base posterior.
    pub h_post: f64,
    /// `h_post / epsilon`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityResult {
    pub epsilon: f64,
    pub base: PriorSpec,
    pub entries: Vec<SensitivityEntry>,
    pub worst_case: f64,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    /// First angle attaining the worst case.
    pub worst_angle: f64,
    pub calibrated_worst: CalibratedRatio,
    /// Angles with no contour point, excluded from the summaries.
    pub excluded_angles: Vec<f64>,
    /// Angles whose reweighted posterior put its mass on fewer than three points.
    pub degenerate_angles: Vec<f64>,
}

impl SensitivityResult {
    pub fn super_sensitive(&self) -> bool {
        self.level() == SensitivityLevel::SuperSensitive
    }

    pub fn level(&self) -> SensitivityLevel {
        SensitivityLevel::of(self.worst_case)
    }

    pub fn worst_entry(&self) -> &SensitivityEntry {
        self.entries
            .iter()
            .find(|e| e.phi == self.worst_angle)
            .expect("worst angle belongs to an entry")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityLevel {
    /// Posteriors move less than the priors.
    Robust,
    /// Posteriors move as much as the priors: the data do not update the prior.
    Boundary,
    /// Posteriors move more than the priors.
    SuperSensitive,
}

impl SensitivityLevel {
    pub fn of(worst_case: f64) -> Self {
        if (worst_case - 1.0).abs() <= BOUNDARY_TOLERANCE {
            SensitivityLevel::Boundary
        } else if worst_case > 1.0 {
            SensitivityLevel::SuperSensitive
        } else {
            SensitivityLevel::Robust
        }
    }
}

/// Per-angle posterior distance of a contour point, with a degeneracy flag.
pub struct PointDistance {
    pub h_post: f64,
    pub degenerate: bool,
}

/// Build a result from a contour and a per-point posterior distance.
///
/// The engine-specific part of sensitivity estimation is the distance; both
/// the reweighting engine and the exact RW1 formula go through here.
pub fn assemble<F>(grid: &PolarGrid, mut distance: F) -> Result<SensitivityResult>
where
    F: FnMut(&ContourPoint) -> Result<PointDistance>,
{
    if grid.points.is_empty() {
        return Err(Error::InvalidInput("contour has no points".into()));
    }
    let epsilon = grid.epsilon;
    let mut entries = Vec::with_capacity(grid.points.len());
    let mut degenerate_angles = Vec::new();
    for p in &grid.points {
        let d = distance(p).map_err(|e| e.at_angle(p.phi))?;
        if d.degenerate {
            degenerate_angles.push(p.phi);
        }
        entries.push(SensitivityEntry {
            phi: p.phi,
            point: p.point,
            h_post: d.h_post,
            ratio: d.h_post / epsilon,
        });
    }

    let (mut worst_case, mut worst_angle) = (entries[0].ratio, entries[0].phi);
    for e in &entries[1..] {
        if e.ratio > worst_case {
            worst_case = e.ratio;
            worst_angle = e.phi;
        }
    }
    let n = entries.len() as f64;
    let mean = entries.iter().map(|e| e.ratio).sum::<f64>() / n;
    let min = entries
        .iter()
        .map(|e| e.ratio)
        .fold(f64::INFINITY, f64::min);
    let mut sorted: Vec<f64> = entries.iter().map(|e| e.ratio).collect();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    let calibrated_worst = calibrated_ratio(worst_case * epsilon, epsilon)?;

    Ok(SensitivityResult {
        epsilon,
        base: grid.base,
        entries,
        worst_case,
        mean,
        median,
        min,
        worst_angle,
        calibrated_worst,
        excluded_angles: grid.failed_angles.clone(),
        degenerate_angles,
    })
}

/// Sensitivity of a tabulated posterior over a contour, by reweighting.
pub fn circular_sensitivity(input: &PosteriorInput, grid: &PolarGrid) -> Result<SensitivityResult> {
    if grid.base != *input.base_prior() {
        return Err(Error::InvalidInput(
            "contour and posterior use different base priors".into(),
        ));
    }
    assemble(grid, |p| {
        let prior = input.base_prior().with_point(p.point)?;
        let reweighted = reweight_posterior(input, &prior)?;
        let h_post = crate::density::hellinger_grid(&reweighted.grid, input.posterior())?;
        Ok(PointDistance {
            h_post,
            degenerate: reweighted.degenerate,
        })
    })
}

/// Human-readable account of a result.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub level: SensitivityLevel,
    pub text: String,
}

fn percent(ratio: f64) -> String {
    format!("{:.1}%", 100.0 * ratio)
}

pub fn summarize(result: &SensitivityResult) -> Report {
    let level = result.level();
    let mut text = String::new();
    let base = result.base.point();
    // write! into a String cannot fail
    let _ = writeln!(
        text,
        "{} prior at ({}, {}), epsilon = {}, {} directions",
        result.base.family().name(),
        base.gamma1,
        base.gamma2,
        result.epsilon,
        result.entries.len()
    );
    let _ = writeln!(
        text,
        "worst-case sensitivity {:.4} at phi = {:.4}",
        result.worst_case, result.worst_angle
    );
    let _ = writeln!(
        text,
        "mean {:.4}, median {:.4}, min {:.4}",
        result.mean, result.median, result.min
    );
    let exact = match result.calibrated_worst.exact {
        Some(r) => format!("{r:.4}"),
        None => String::from("saturated"),
    };
    let _ = writeln!(
        text,
        "on the unit-variance normal scale the posterior mean shift is about {} of the prior mean shift (calibrated ratio {})",
        percent(result.worst_case),
        exact
    );
    match level {
        SensitivityLevel::SuperSensitive => {
            let _ = writeln!(
                text,
                "SUPER-SENSITIVE: posteriors move more than the priors that induced them"
            );
        }
        SensitivityLevel::Boundary => {
            let _ = writeln!(
                text,
                "BOUNDARY: posteriors move exactly as much as the priors; the data do not update this prior"
            );
        }
        SensitivityLevel::Robust => {}
    }
    if !result.excluded_angles.is_empty() {
        let _ = writeln!(
            text,
            "{} directions without a contour point were excluded: {:?}",
            result.excluded_angles.len(),
            result.excluded_angles
        );
    }
    if !result.degenerate_angles.is_empty() {
        let _ = writeln!(
            text,
            "warning: degenerate reweighted posterior in {} directions",
            result.degenerate_angles.len()
        );
    }
    Report { level, text }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolarSeries {
    Trace,
    /// Reference circle at the given ratio.
    Reference(f64),
}

/// One vertex of the polar plot: the point at distance `radius` from the base
/// parameters in direction `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarRow {
    pub series: PolarSeries,
    pub phi: f64,
    pub radius: f64,
    pub x: f64,
    pub y: f64,
}

/// Sensitivity against angle, with the reference levels 0.5 and 1.0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolledRow {
    pub phi: f64,
    pub ratio: f64,
    pub reference_half: f64,
    pub reference_one: f64,
    pub is_worst: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotTables {
    pub polar: Vec<PolarRow>,
    pub rolled: Vec<RolledRow>,
}

pub fn export_plot_data(result: &SensitivityResult) -> PlotTables {
    let base = result.base.point();
    let vertex = |series, phi: f64, radius: f64| PolarRow {
        series,
        phi,
        radius,
        x: base.gamma1 + radius * cos(phi),
        y: base.gamma2 + radius * sin(phi),
    };
    let mut polar: Vec<PolarRow> = result
        .entries
        .iter()
        .map(|e| vertex(PolarSeries::Trace, e.phi, e.ratio))
        .collect();
    for level in REFERENCE_RATIOS {
        polar.extend(
            result
                .entries
                .iter()
                .map(|e| vertex(PolarSeries::Reference(level), e.phi, level)),
        );
    }
    let mut marked = false;
    let rolled = result
        .entries
        .iter()
        .map(|e| {
            let is_worst = !marked && e.phi == result.worst_angle;
            marked |= is_worst;
            RolledRow {
                phi: e.phi,
                ratio: e.ratio,
                reference_half: 0.5,
                reference_one: 1.0,
                is_worst,
            }
        })
        .collect();
    PlotTables { polar, rolled }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{compute_grid, CardinalModuli};
    use crate::density::Scale;

    fn synthetic(ratios: &[f64]) -> SensitivityResult {
        let eps = 0.01;
        let base = PriorSpec::gamma(1.0, 1.0).unwrap();
        let n = ratios.len();
        let points = (0..n)
            .map(|k| ContourPoint {
                phi: -core::f64::consts::PI + 2.0 * core::f64::consts::PI * k as f64 / n as f64,
                point: base.point(),
                log_modulus: 0.0,
                residual: 0.0,
            })
            .collect();
        let grid = PolarGrid {
            base,
            epsilon: eps,
            points,
            cardinal: CardinalModuli {
                down: 1.0,
                right: 1.0,
                up: 1.0,
                left: 1.0,
            },
            n_angles: n,
            failed_angles: Vec::new(),
        };
        let mut it = ratios.iter();
        assemble(&grid, |_| {
            Ok(PointDistance {
                h_post: it.next().unwrap() * eps,
                degenerate: false,
            })
        })
        .unwrap()
    }

    #[test]
    fn summaries() {
        let r = synthetic(&[0.2, 0.9, 0.4, 0.9, 0.1, 0.3]);
        assert_eq!(
            r.worst_case,
            r.entries.iter().map(|e| e.ratio).fold(0.0, f64::max)
        );
        assert!((r.worst_case - 0.9).abs() < 1e-12);
        assert_eq!(r.worst_angle, r.entries[1].phi);
        assert!((r.min - 0.1).abs() < 1e-12);
        assert!((r.median - 0.35).abs() < 1e-12);
        assert!((r.mean - 2.8 / 6.0).abs() < 1e-12);
        assert!(r.min <= r.worst_case);
    }

    #[test]
    fn super_sensitivity_is_not_truncated() {
        let r = synthetic(&[0.5, 1.568, 1.2, 0.7, 0.9, 1.1, 0.4, 0.2]);
        assert!((r.worst_case - 1.568).abs() < 1e-12);
        let report = summarize(&r);
        assert_eq!(report.level, SensitivityLevel::SuperSensitive);
        assert!(report.text.contains("156.8%"), "{}", report.text);
        assert!(report.text.contains("SUPER-SENSITIVE"));
    }

    #[test]
    fn report_percentages() {
        let r = synthetic(&[0.355, 0.1, 0.2, 0.3, 0.1, 0.2, 0.3, 0.1]);
        let report = summarize(&r);
        assert!(report.text.contains("35.5%"), "{}", report.text);
        assert_eq!(report.level, SensitivityLevel::Robust);

        let r = synthetic(&[1.0; 8]);
        assert_eq!(summarize(&r).level, SensitivityLevel::Boundary);
        assert!(summarize(&r).text.contains("BOUNDARY"));
    }

    #[test]
    fn plot_tables() {
        let r = synthetic(&[1.0; 16]);
        let t = export_plot_data(&r);
        assert_eq!(t.rolled.len(), 16);
        assert_eq!(t.polar.len(), 16 * (1 + REFERENCE_RATIOS.len()));
        let one: Vec<&PolarRow> = t
            .polar
            .iter()
            .filter(|p| p.series == PolarSeries::Reference(1.0))
            .collect();
        let trace: Vec<&PolarRow> = t
            .polar
            .iter()
            .filter(|p| p.series == PolarSeries::Trace)
            .collect();
        for (a, b) in trace.iter().zip(one) {
            assert_eq!((a.x, a.y), (b.x, b.y));
        }

        let r = synthetic(&[0.2, 0.9, 0.4, 0.9, 0.1, 0.3, 0.3, 0.3]);
        let t = export_plot_data(&r);
        let worst: Vec<&RolledRow> = t.rolled.iter().filter(|row| row.is_worst).collect();
        assert_eq!(worst.len(), 1);
        assert_eq!(worst[0].phi, r.worst_angle);
    }

    #[test]
    fn flat_likelihood_gives_unit_ratios() {
        let base = PriorSpec::gamma(1.0, 0.34).unwrap();
        let eps = 0.00354;
        let grid = compute_grid(&base, eps, 64).unwrap();
        let input =
            PosteriorInput::new(base.tabulate(Scale::LogParameter, 4001).unwrap(), base).unwrap();
        let r = circular_sensitivity(&input, &grid).unwrap();
        for e in &r.entries {
            assert!(
                (e.ratio - 1.0).abs() < 5e-5,
                "ratio {} at {}",
                e.ratio,
                e.phi
            );
        }
    }

    #[test]
    fn mismatched_base_is_rejected() {
        let base = PriorSpec::gamma(1.0, 0.34).unwrap();
        let grid = compute_grid(&base, 0.01, 16).unwrap();
        let other = PriorSpec::gamma(1.0, 0.5).unwrap();
        let input =
            PosteriorInput::new(other.tabulate(Scale::LogParameter, 501).unwrap(), other).unwrap();
        assert!(circular_sensitivity(&input, &grid).is_err());
    }
}
