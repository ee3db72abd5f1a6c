//! Monthly count series to RW1 observations: square root, per-calendar-month
//! mean removal, centring.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{Error, Result};

/// Shortest window that still holds two observations of every month.
pub const MIN_OBSERVATIONS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesWindow {
    Full,
    /// The most recent `n` observations.
    Last(usize),
}

impl SeriesWindow {
    /// Range of indices selected from a series of length `len`.
    pub fn range(self, len: usize) -> Result<core::ops::Range<usize>> {
        match self {
            SeriesWindow::Full => Ok(0..len),
            SeriesWindow::Last(n) if n <= len => Ok(len - n..len),
            SeriesWindow::Last(n) => Err(Error::InvalidInput(format!(
                "window of {n} observations exceeds the series length {len}"
            ))),
        }
    }
}

/// Residuals after removing the calendar-month means of `sqrt(counts)`.
///
/// `months` holds the calendar month (1 to 12) of each observation; without
/// it months are assigned by position in the full series. The window is cut
/// before the monthly means are estimated.
pub fn deseasonalize(
    counts: &[f64],
    months: Option<&[u8]>,
    window: SeriesWindow,
) -> Result<Vec<f64>> {
    if let Some(m) = months {
        if m.len() != counts.len() {
            return Err(Error::InvalidInput(
                "month labels and counts differ in length".into(),
            ));
        }
        if let Some(bad) = m.iter().find(|&&v| !(1..=12).contains(&v)) {
            return Err(Error::InvalidInput(format!("invalid calendar month {bad}")));
        }
    }
    if let Some((i, c)) = counts
        .iter()
        .enumerate()
        .find(|(_, c)| !(**c > 0.0 && c.is_finite()))
    {
        return Err(Error::InvalidInput(format!(
            "count {c} at position {i} is not positive"
        )));
    }
    let range = window.range(counts.len())?;
    if range.len() < MIN_OBSERVATIONS {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_OBSERVATIONS} monthly observations, got {}",
            range.len()
        )));
    }
    let month_of = |i: usize| match months {
        Some(m) => (m[i] - 1) as usize,
        None => i % 12,
    };

    let y: Vec<f64> = counts[range.clone()].iter().map(|&c| sqrt(c)).collect();
    let mut sums = [0.0; 12];
    let mut seen = [0usize; 12];
    for (k, i) in range.clone().enumerate() {
        sums[month_of(i)] += y[k];
        seen[month_of(i)] += 1;
    }
    let mut residuals: Vec<f64> = range
        .enumerate()
        .map(|(k, i)| {
            let m = month_of(i);
            y[k] - sums[m] / seen[m] as f64
        })
        .collect();
    let mean = residuals.iter().sum::<f64>() / residuals.len() as f64;
    residuals.iter_mut().for_each(|r| *r -= mean);
    Ok(residuals)
}

/// `1 / s^2` with the sample variance `s^2` (divisor `n - 1`).
pub fn precision_from_residuals(residuals: &[f64]) -> Result<f64> {
    let n = residuals.len();
    if n < 2 {
        return Err(Error::InvalidInput("variance needs two residuals".into()));
    }
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let ss: f64 = residuals.iter().map(|r| (r - mean) * (r - mean)).sum();
    let var = ss / (n - 1) as f64;
    let scale = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    if !(var > 0.0) || scale == 0.0 || var <= (1e-14 * scale) * (1e-14 * scale) {
        return Err(Error::InvalidInput(
            "residuals have zero variance; the noise precision is undefined".into(),
        ));
    }
    Ok(1.0 / var)
}

/// Calendar months of `n` consecutive observations starting at `first` (1 to 12).
pub fn consecutive_months(first: u8, n: usize) -> Vec<u8> {
    let mut out = vec![0u8; n];
    for (i, m) in out.iter_mut().enumerate() {
        *m = ((first as usize - 1 + i) % 12 + 1) as u8;
    }
    out
}
