//! Calibration of Hellinger distances against a unit-variance normal.
//!
//! A distance `h` corresponds to the mean shift `mu(h) = sqrt(-8 ln(1 - h^2))`
//! between N(0, 1) and N(mu, 1); the inverse is `h(mu) = sqrt(1 - exp(-mu^2 / 8))`.

use alloc::format;

use libm::{expm1, log1p, sqrt};

use crate::error::{Error, Result};

/// Distances at or above this have no finite calibration in binary64.
pub const SATURATION: f64 = 1.0 - 1e-15;

/// A distance paired with its equivalent unit-variance normal mean shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedValue {
    pub h: f64,
    pub mu: f64,
}

impl CalibratedValue {
    pub fn from_h(h: f64) -> Result<Self> {
        Ok(CalibratedValue {
            h,
            mu: calibrate(h)?,
        })
    }

    pub fn from_mu(mu: f64) -> Result<Self> {
        Ok(CalibratedValue {
            h: inverse_calibrate(mu)?,
            mu,
        })
    }
}

/// Mean shift of a unit-variance normal at Hellinger distance `h` from N(0, 1).
pub fn calibrate(h: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&h) {
        return Err(Error::domain(format!(
            "calibration needs 0 <= h < 1, got {h}"
        )));
    }
    if h >= SATURATION {
        return Err(Error::Saturated { h });
    }
    Ok(sqrt(-8.0 * log1p(-h * h)))
}

/// Hellinger distance between N(0, 1) and N(mu, 1).
pub fn inverse_calibrate(mu: f64) -> Result<f64> {
    if !(mu >= 0.0) || mu.is_infinite() {
        return Err(Error::domain(format!(
            "inverse calibration needs finite mu >= 0, got {mu}"
        )));
    }
    Ok(sqrt(-expm1(-mu * mu / 8.0)))
}

/// Ratio of calibrated distances next to the plain distance ratio it is
/// usually approximated by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedRatio {
    /// `mu(h_post) / mu(epsilon)`; `None` when `h_post` saturates.
    pub exact: Option<f64>,
    /// `h_post / epsilon`.
    pub approx: f64,
}

pub fn calibrated_ratio(h_post: f64, epsilon: f64) -> Result<CalibratedRatio> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let denominator = calibrate(epsilon)?;
    let exact = match calibrate(h_post) {
        Ok(mu) => Some(mu / denominator),
        Err(Error::Saturated { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CalibratedRatio {
        exact,
        approx: h_post / epsilon,
    })
}
