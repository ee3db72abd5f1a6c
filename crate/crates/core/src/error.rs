use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::contour::PolarGrid;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter or evaluation point lies outside the admissible domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid density grid: {0}")]
    InvalidGrid(String),

    /// Two grids were expected to share a support but do not.
    #[error("density grids are not aligned")]
    Misaligned,

    #[error("density supports do not overlap")]
    EmptyIntersection,

    /// Hellinger distance so close to 1 that its calibration is not finite in
    /// floating point.
    #[error("calibration saturated for h = {h}")]
    Saturated { h: f64 },

    #[error("contour at distance {epsilon} unreachable in direction phi = {phi}")]
    Unreachable { phi: f64, epsilon: f64 },

    /// Some directions of the contour could not be solved. The grid holds
    /// every direction that was, and lists the failed angles.
    #[error("contour solved for {} directions, failed for {}", .0.points.len(), .0.failed_angles.len())]
    PartialGrid(Box<PolarGrid>),

    #[error("reweighting unstable: base prior density underflows at x = {x}")]
    ReweightInstability { x: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("at phi = {phi}: {source}")]
    AtAngle {
        phi: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_angle(self, phi: f64) -> Self {
        Error::AtAngle {
            phi,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping angle annotations.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::AtAngle { source, .. } => source.root_cause(),
            other => other,
        }
    }

    /// Angles that failed in a partial contour, if this is one.
    pub fn failed_angles(&self) -> Option<&Vec<f64>> {
        match self {
            Error::PartialGrid(grid) => Some(&grid.failed_angles),
            _ => None,
        }
    }
}
