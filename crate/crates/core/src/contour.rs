//! Contours of prior parameters at a fixed Hellinger distance from a base prior.
//!
//! Directions are parametrized by an angle `phi` in polar coordinates centred
//! on the base parameters `(g1, g2)`. A direction's point is
//!
//! ```text
//! (g1 + r cos(phi) cx(phi), g2 + r sin(phi) cy(phi)),   r = exp(z)
//! ```
//!
//! where `cx`, `cy` are moduli solved beforehand along the four axis directions.
//! With that scaling the solved `r` is close to 1 in every direction, and the
//! root in `z` is found by a bracketed solver.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use libm::{cos, exp, log, sin};

use crate::density::{hellinger, ParamPoint, PriorSpec};
use crate::error::{Error, Result};
use crate::root::{self, Bracket};

/// Initial bracket for the log-modulus.
const Z_START: f64 = 6.0;
/// Furthest the bracket is expanded before a direction is declared unreachable.
const Z_LIMIT: f64 = 20.0;
/// Contour residual tolerance relative to epsilon used by the solver. The
/// contract is `1e-4`; solving tighter keeps grid error out of sensitivities.
const RESIDUAL_RTOL: f64 = 1e-7;
/// Residual bound every returned point satisfies, relative to epsilon.
pub const RESIDUAL_BOUND: f64 = 1e-4;
/// Largest admissible epsilon.
pub const MAX_EPSILON: f64 = 0.5;
pub const MIN_ANGLES: usize = 8;

/// Moduli solved along the axis directions, used to scale every other direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CardinalModuli {
    /// `r*(-pi/2)`: decreasing the second parameter.
    pub down: f64,
    /// `r*(0)`: increasing the first parameter.
    pub right: f64,
    /// `r*(pi/2)`: increasing the second parameter.
    pub up: f64,
    /// `r*(pi)`: decreasing the first parameter.
    pub left: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPoint {
    pub phi: f64,
    pub point: ParamPoint,
    /// Solved `z = ln r` in scaled coordinates.
    pub log_modulus: f64,
    /// `H(point, base) - epsilon` with the analytic family distance.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub base: PriorSpec,
    pub epsilon: f64,
    /// Solved directions in increasing angle.
    pub points: Vec<ContourPoint>,
    pub cardinal: CardinalModuli,
    /// Number of directions requested.
    pub n_angles: usize,
    /// Directions without a solution; empty for a complete grid.
    pub failed_angles: Vec<f64>,
}

impl PolarGrid {
    pub fn is_complete(&self) -> bool {
        self.failed_angles.is_empty()
    }
}

/// `n` equidistant angles starting at `-pi`, spaced `2 pi / n` apart.
pub fn polar_angles(n: usize) -> Vec<f64> {
    let step = 2.0 * PI / n as f64;
    (0..n).map(|k| -PI + step * k as f64).collect()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= MAX_EPSILON {
        Ok(())
    } else {
        Err(Error::domain(alloc::format!(
            "epsilon must lie in (0, {MAX_EPSILON}], got {epsilon}"
        )))
    }
}

/// Search for the point at distance `epsilon` along the ray
/// `base + t (dx, dy)`, `t = exp(z)`.
fn solve_ray(base: &PriorSpec, epsilon: f64, phi: f64, dx: f64, dy: f64) -> Result<ContourPoint> {
    let family = base.family();
    let g0 = base.point();
    let unreachable = || Error::Unreachable { phi, epsilon };
    let at = |t: f64| ParamPoint::new(g0.gamma1 + t * dx, g0.gamma2 + t * dy);

    // largest t keeping the ray inside the parameter domain
    let mut t_max = f64::INFINITY;
    if dy < 0.0 {
        t_max = t_max.min(g0.gamma2 / -dy);
    }
    if family == crate::density::Family::Gamma && dx < 0.0 {
        t_max = t_max.min(g0.gamma1 / -dx);
    }
    let z_domain = if t_max.is_finite() {
        log(t_max) + log(1.0 - 1e-12)
    } else {
        f64::INFINITY
    };

    let residual = |z: f64| -> f64 {
        let p = at(exp(z));
        if !family.admits(p) {
            return f64::NAN;
        }
        hellinger(family, g0, p).map_or(f64::NAN, |h| h - epsilon)
    };

    let mut lo = -Z_START;
    let mut f_lo = residual(lo);
    while !(f_lo < 0.0) {
        if lo <= -Z_LIMIT {
            return Err(unreachable());
        }
        lo = (2.0 * lo).max(-Z_LIMIT);
        f_lo = residual(lo);
    }

    let mut hi = Z_START.min(z_domain);
    if hi <= lo {
        return Err(unreachable());
    }
    let mut f_hi = residual(hi);
    while !(f_hi > 0.0) {
        if hi >= Z_LIMIT || hi >= z_domain {
            return Err(unreachable());
        }
        hi = (2.0 * hi).min(Z_LIMIT).min(z_domain);
        f_hi = residual(hi);
    }

    let z = root::solve(
        residual,
        Bracket { lo, hi, f_lo, f_hi },
        epsilon * RESIDUAL_RTOL,
        1e-15,
        400,
    )
    .ok_or_else(unreachable)?;
    let point = at(exp(z));
    let residual = hellinger(family, g0, point)? - epsilon;
    if !family.admits(point) || residual.abs() > epsilon * RESIDUAL_BOUND {
        return Err(unreachable());
    }
    Ok(ContourPoint {
        phi,
        point,
        log_modulus: z,
        residual,
    })
}

/// Solve the four axis-aligned moduli on unscaled Cartesian offsets.
pub fn preexplore(base: &PriorSpec, epsilon: f64) -> Result<CardinalModuli> {
    check_epsilon(epsilon)?;
    let modulus = |phi: f64, dx: f64, dy: f64| -> Result<f64> {
        Ok(exp(solve_ray(base, epsilon, phi, dx, dy)?.log_modulus))
    };
    Ok(CardinalModuli {
        down: modulus(-FRAC_PI_2, 0.0, -1.0)?,
        right: modulus(0.0, 1.0, 0.0)?,
        up: modulus(FRAC_PI_2, 0.0, 1.0)?,
        left: modulus(PI, -1.0, 0.0)?,
    })
}

/// Piecewise-constant scaling `(cx, cy)` for direction `phi`.
///
/// `cx` is `r*(0)` for `phi` in `[-pi/2, pi/2]` and `r*(pi)` otherwise; `cy` is
/// `r*(pi/2)` for `phi` in `[0, pi]` and `r*(-pi/2)` otherwise. Boundary angles
/// belong to the closed intervals; at those angles the factor is multiplied by
/// a vanishing cosine or sine, so the tie-break never moves a point.
pub fn scaling_factors(phi: f64, moduli: &CardinalModuli) -> (f64, f64) {
    let cx = if (-FRAC_PI_2..=FRAC_PI_2).contains(&phi) {
        moduli.right
    } else {
        moduli.left
    };
    let cy = if (0.0..=PI).contains(&phi) {
        moduli.up
    } else {
        moduli.down
    };
    (cx, cy)
}

/// Point at distance `epsilon` from `base` in scaled direction `phi`.
pub fn solve_radius(
    base: &PriorSpec,
    epsilon: f64,
    phi: f64,
    cx: f64,
    cy: f64,
) -> Result<ContourPoint> {
    check_epsilon(epsilon)?;
    if !(cx > 0.0 && cy > 0.0) {
        return Err(Error::domain("scaling factors must be positive"));
    }
    solve_ray(base, epsilon, phi, cos(phi) * cx, sin(phi) * cy)
}

/// The contour at distance `epsilon` over `n_angles` equidistant directions.
///
/// Directions that cannot be solved are collected; if any fail, the error
/// carries the partial grid.
pub fn compute_grid(base: &PriorSpec, epsilon: f64, n_angles: usize) -> Result<PolarGrid> {
    check_epsilon(epsilon)?;
    if n_angles < MIN_ANGLES {
        return Err(Error::InvalidInput(alloc::format!(
            "at least {MIN_ANGLES} angles required, got {n_angles}"
        )));
    }
    let cardinal = preexplore(base, epsilon)?;
    let mut points = Vec::with_capacity(n_angles);
    let mut failed_angles = Vec::new();
    for phi in polar_angles(n_angles) {
        let (cx, cy) = scaling_factors(phi, &cardinal);
        match solve_radius(base, epsilon, phi, cx, cy) {
            Ok(p) => points.push(p),
            Err(Error::Unreachable { .. }) => failed_angles.push(phi),
            Err(e) => return Err(e.at_angle(phi)),
        }
    }
    let grid = PolarGrid {
        base: *base,
        epsilon,
        points,
        cardinal,
        n_angles,
        failed_angles,
    };
    if grid.is_complete() {
        Ok(grid)
    } else {
        Err(Error::PartialGrid(alloc::boxed::Box::new(grid)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::inverse_calibrate;
    use crate::density::{hellinger_gamma, hellinger_normal, Family};

    fn moduli() -> CardinalModuli {
        CardinalModuli {
            down: 1.0,
            right: 2.0,
            up: 3.0,
            left: 4.0,
        }
    }

    #[test]
    fn scaling_factor_case_table() {
        let m = moduli();
        assert_eq!(scaling_factors(0.0, &m), (2.0, 3.0));
        assert_eq!(scaling_factors(PI, &m), (4.0, 3.0));
        assert_eq!(scaling_factors(-PI / 4.0, &m), (2.0, 1.0));
        assert_eq!(scaling_factors(3.0 * PI / 4.0, &m), (4.0, 3.0));
        assert_eq!(scaling_factors(-3.0 * PI / 4.0, &m), (4.0, 1.0));
        // closed-interval tie-break
        assert_eq!(scaling_factors(FRAC_PI_2, &m), (2.0, 3.0));
        assert_eq!(scaling_factors(-FRAC_PI_2, &m), (2.0, 1.0));
        assert_eq!(scaling_factors(-PI, &m), (4.0, 1.0));
    }

    #[test]
    fn normal_mean_shift_moduli_are_symmetric() {
        let base = PriorSpec::normal(0.0, 1.0).unwrap();
        let m = preexplore(&base, 0.00354).unwrap();
        assert!((m.right - m.left).abs() < 1e-9 * m.right);
        // equal precision: mean shift equals the calibrated distance
        let expected = crate::calibration::calibrate(0.00354).unwrap();
        assert!((m.right - expected).abs() < 1e-6 * expected);
    }

    #[test]
    fn gamma_moduli_match_one_dimensional_bisection() {
        let base = PriorSpec::gamma(1.0, 0.34).unwrap();
        let eps = 0.00354;
        let m = preexplore(&base, eps).unwrap();
        // plain bisection on the shape offset
        let g0 = ParamPoint::new(1.0, 0.34);
        let f = |r: f64| hellinger_gamma(g0, ParamPoint::new(1.0 + r, 0.34)).unwrap() - eps;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        assert!((m.right - lo).abs() < 1e-4 * lo, "{} vs {}", m.right, lo);
        // elongated contour: the rate direction is much shorter than the shape direction
        assert!(m.up / m.right < 0.5, "{m:?}");
    }

    #[test]
    fn zero_angle_recovers_mean_shift() {
        let base = PriorSpec::normal(0.0, 1.0).unwrap();
        let eps = 0.00354;
        let m = preexplore(&base, eps).unwrap();
        let (cx, cy) = scaling_factors(0.0, &m);
        let p = solve_radius(&base, eps, 0.0, cx, cy).unwrap();
        let mu = crate::calibration::calibrate(eps).unwrap();
        assert!((p.point.gamma1 - mu).abs() < 1e-6 * mu);
        assert!((p.point.gamma2 - 1.0).abs() < 1e-15);
        // the mean shift is inverse_calibrate's argument
        assert!((inverse_calibrate(p.point.gamma1).unwrap() - eps).abs() < eps * 1e-4);
    }

    #[test]
    fn precision_up_and_down_differ() {
        let base = PriorSpec::normal(0.0, 1.0).unwrap();
        let eps = 0.00354;
        let m = preexplore(&base, eps).unwrap();
        let up = solve_radius(&base, eps, FRAC_PI_2, m.right, m.up).unwrap();
        let down = solve_radius(&base, eps, -FRAC_PI_2, m.right, m.down).unwrap();
        assert!(up.point.gamma2 > 1.0 && down.point.gamma2 < 1.0);
        let d_up = up.point.gamma2 - 1.0;
        let d_down = 1.0 - down.point.gamma2;
        assert!((d_up - d_down).abs() > 1e-6 * d_up);
        for p in [up, down] {
            let h = hellinger_normal(base.point(), p.point).unwrap();
            assert!((h - eps).abs() <= eps * 1e-4);
        }
    }

    #[test]
    fn every_point_lies_on_the_contour() {
        for base in [
            PriorSpec::gamma(1.0, 0.34).unwrap(),
            PriorSpec::normal(0.0, 0.001).unwrap(),
            PriorSpec::gamma(0.5, 20.0).unwrap(),
        ] {
            let eps = 0.00354;
            let grid = compute_grid(&base, eps, 400).unwrap();
            assert_eq!(grid.points.len(), 400);
            for w in grid.points.windows(2) {
                assert!(w[1].phi > w[0].phi);
            }
            for p in &grid.points {
                let h = crate::density::hellinger(base.family(), base.point(), p.point).unwrap();
                assert!((h - eps).abs() <= eps * 1e-4);
                assert!(base.family().admits(p.point));
                assert!(p.log_modulus.abs() <= 3.0, "z = {}", p.log_modulus);
            }
        }
    }

    #[test]
    fn normal_contour_is_mirror_symmetric_in_the_mean() {
        let base = PriorSpec::normal(1.5, 2.0).unwrap();
        let grid = compute_grid(&base, 0.01, 40).unwrap();
        // angle phi and pi - phi reflect through the mean
        let n = grid.points.len();
        for k in 1..n / 2 {
            let a = grid.points[k];
            let b = grid.points[n / 2 - k];
            assert!((a.phi + b.phi + PI).abs() < 1e-12 || (a.phi + b.phi - PI).abs() < 1e-12);
            assert!(((a.point.gamma1 - 1.5) + (b.point.gamma1 - 1.5)).abs() < 1e-7);
            assert!((a.point.gamma2 - b.point.gamma2).abs() < 1e-7);
        }
    }

    #[test]
    fn contour_is_deterministic() {
        let base = PriorSpec::gamma(2.0, 1.0).unwrap();
        let a = compute_grid(&base, 0.01, 64).unwrap();
        let b = compute_grid(&base, 0.01, 64).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_arguments() {
        let base = PriorSpec::gamma(1.0, 0.34).unwrap();
        assert!(compute_grid(&base, 0.0, 400).is_err());
        assert!(compute_grid(&base, 0.6, 400).is_err());
        assert!(compute_grid(&base, 0.01, 4).is_err());
        assert!(solve_radius(&base, 0.01, 0.3, -1.0, 1.0).is_err());
        assert_eq!(base.family(), Family::Gamma);
    }
}
