//! Two-parameter priors, tabulated densities and Hellinger distances between them.
//!
//! Normal priors are parametrized by mean and precision, gamma priors by shape
//! and rate. Both have closed-form Bhattacharyya coefficients, evaluated in log
//! space. Tabulated densities are compared by trapezoidal quadrature.

use alloc::format;
use alloc::vec::Vec;

use libm::{exp, expm1, log, log1p, sqrt};

use crate::error::{Error, Result};
use crate::quadrature::{trapezoid, trapezoid_by};
use crate::special::{gamma_ln_quantile, ln_gamma, LN_2PI};

/// Minimum number of support points of a [`DensityGrid`].
pub const MIN_GRID_POINTS: usize = 8;

/// Points in internally generated tabulations.
pub const DEFAULT_GRID_POINTS: usize = 4001;

/// Half-width of generated normal tabulations, in standard deviations.
pub const NORMAL_TABULATION_SDS: f64 = 10.0;

/// Tail probability cut from each side of generated gamma tabulations.
pub const GAMMA_TABULATION_TAIL: f64 = 1e-8;

/// Width below the upper end of a log-scale gamma range that gets its own points in [`tabulate_pair`].
const GAMMA_LOG_CORE: f64 = 30.0;

/// Mass deficits of aligned grids below this are treated as rounding.
const MASS_ROUNDING: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Mean `gamma1`, precision `gamma2`.
    Normal,
    /// Shape `gamma1`, rate `gamma2`.
    Gamma,
}

/// Parametrization of the variable a density is tabulated over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scale {
    Natural,
    /// The variable is `z = ln(theta)`; densities carry the Jacobian `exp(z)`.
    LogParameter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPoint {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl ParamPoint {
    pub const fn new(gamma1: f64, gamma2: f64) -> Self {
        ParamPoint { gamma1, gamma2 }
    }
}

impl Family {
    /// Whether `point` is an admissible parameter for this family.
    pub fn admits(self, point: ParamPoint) -> bool {
        let finite = point.gamma1.is_finite() && point.gamma2.is_finite();
        match self {
            Family::Normal => finite && point.gamma2 > 0.0,
            Family::Gamma => finite && point.gamma1 > 0.0 && point.gamma2 > 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Gamma => "gamma",
        }
    }

    fn check(self, point: ParamPoint) -> Result<()> {
        if self.admits(point) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "({}, {}) is not a valid {} parameter",
                point.gamma1,
                point.gamma2,
                self.name()
            )))
        }
    }
}

/// A prior family together with its parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    family: Family,
    point: ParamPoint,
}

impl PriorSpec {
    pub fn new(family: Family, point: ParamPoint) -> Result<Self> {
        family.check(point)?;
        Ok(PriorSpec { family, point })
    }

    pub fn normal(mean: f64, precision: f64) -> Result<Self> {
        Self::new(Family::Normal, ParamPoint::new(mean, precision))
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(Family::Gamma, ParamPoint::new(shape, rate))
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn point(&self) -> ParamPoint {
        self.point
    }

    /// Same family, different parameters.
    pub fn with_point(&self, point: ParamPoint) -> Result<Self> {
        Self::new(self.family, point)
    }

    /// Log density of the parameter `theta` itself, without any Jacobian.
    pub(crate) fn ln_density_natural(&self, theta: f64) -> Result<f64> {
        let ParamPoint { gamma1, gamma2 } = self.point;
        match self.family {
            Family::Normal => {
                let d = theta - gamma1;
                Ok(0.5 * (log(gamma2) - LN_2PI) - 0.5 * gamma2 * d * d)
            }
            Family::Gamma => {
                // at the origin the density has a finite limit only for shape >= 1
                if theta == 0.0 && gamma1 >= 1.0 {
                    return Ok(if gamma1 == 1.0 {
                        log(gamma2)
                    } else {
                        f64::NEG_INFINITY
                    });
                }
                if !(theta > 0.0) {
                    return Err(Error::domain(format!(
                        "gamma density undefined at x = {theta}"
                    )));
                }
                Ok(
                    gamma1 * log(gamma2) - ln_gamma(gamma1) + (gamma1 - 1.0) * log(theta)
                        - gamma2 * theta,
                )
            }
        }
    }

    /// Log density at `x` on the given scale.
    pub fn ln_density(&self, x: f64, scale: Scale) -> Result<f64> {
        match scale {
            Scale::Natural => self.ln_density_natural(x),
            Scale::LogParameter => match self.family {
                Family::Normal => Err(Error::domain(
                    "a normal prior has no log-parameter representation",
                )),
                Family::Gamma => {
                    let ParamPoint { gamma1, gamma2 } = self.point;
                    Ok(gamma1 * log(gamma2) - ln_gamma(gamma1) + gamma1 * x - gamma2 * exp(x))
                }
            },
        }
    }

    /// Density at `x` on the given scale. On [`Scale::LogParameter`] this is the
    /// density of `z = ln(theta)`, i.e. `f(exp z) * exp z`.
    pub fn density(&self, x: f64, scale: Scale) -> Result<f64> {
        self.ln_density(x, scale).map(exp)
    }

    /// Default tabulation range: mean +- 10 sd for normal priors, the
    /// `[1e-8, 1 - 1e-8]` quantile range for gamma priors (mapped to logs on
    /// the log scale).
    pub fn tabulation_range(&self, scale: Scale) -> Result<(f64, f64)> {
        let ParamPoint { gamma1, gamma2 } = self.point;
        match (self.family, scale) {
            (Family::Normal, Scale::Natural) => {
                let half = NORMAL_TABULATION_SDS / sqrt(gamma2);
                Ok((gamma1 - half, gamma1 + half))
            }
            (Family::Normal, Scale::LogParameter) => Err(Error::domain(
                "a normal prior has no log-parameter representation",
            )),
            (Family::Gamma, scale) => {
                let lo = gamma_ln_quantile(gamma1, gamma2, GAMMA_TABULATION_TAIL);
                let hi = gamma_ln_quantile(gamma1, gamma2, 1.0 - GAMMA_TABULATION_TAIL);
                match scale {
                    Scale::LogParameter => Ok((lo, hi)),
                    Scale::Natural => Ok((exp(lo).max(f64::MIN_POSITIVE), exp(hi))),
                }
            }
        }
    }

    /// Normalized tabulation on the default range with `n_points` points.
    ///
    /// Points are equidistant except for a gamma prior on the natural scale,
    /// where they are equidistant in `ln x` to follow the `x^(alpha - 1)`
    /// behaviour at the origin.
    pub fn tabulate(&self, scale: Scale, n_points: usize) -> Result<DensityGrid> {
        let (lo, hi) = self.tabulation_range(scale)?;
        let support = match (self.family, scale) {
            (Family::Gamma, Scale::Natural) => {
                let mut s: Vec<f64> = linspace(log(lo), log(hi), n_points)
                    .into_iter()
                    .map(exp)
                    .collect();
                s[0] = lo;
                s[n_points.max(1) - 1] = hi;
                s
            }
            _ => linspace(lo, hi, n_points),
        };
        self.tabulate_on(scale, support)
    }

    /// Normalized tabulation on an explicit support.
    pub fn tabulate_on(&self, scale: Scale, support: Vec<f64>) -> Result<DensityGrid> {
        let values = support
            .iter()
            .map(|&x| self.density(x, scale))
            .collect::<Result<Vec<_>>>()?;
        DensityGrid::new(support, values, scale)?.normalized()
    }
}

/// Both priors tabulated on one support: the union of their default ranges,
/// each covered by `n_points` equidistant points. Each density is resolved by
/// its own points however different the two scales are.
pub fn tabulate_pair(
    p0: &PriorSpec,
    p1: &PriorSpec,
    scale: Scale,
    n_points: usize,
) -> Result<(DensityGrid, DensityGrid)> {
    let (lo0, hi0) = p0.tabulation_range(scale)?;
    let (lo1, hi1) = p1.tabulation_range(scale)?;
    let mut support = Vec::with_capacity(4 * n_points);
    for (spec, lo, hi) in [(p0, lo0, hi0), (p1, lo1, hi1)] {
        support.extend(linspace(lo, hi, n_points));
        // a small-shape gamma in log space has a long exp(alpha z) lower tail
        // but falls off doubly exponentially a few units below the upper end
        if spec.family == Family::Gamma && scale == Scale::LogParameter && hi - lo > GAMMA_LOG_CORE
        {
            support.extend(linspace(hi - GAMMA_LOG_CORE, hi, n_points));
        }
        // x^(alpha - 1) near zero needs geometric spacing on the natural scale
        if spec.family == Family::Gamma && scale == Scale::Natural {
            support.extend(linspace(log(lo), log(hi), n_points).into_iter().map(exp));
        }
    }
    support.sort_by(f64::total_cmp);
    // relative, so geometric nodes near the origin survive
    support.dedup_by(|b, a| *b - *a <= 1e-12 * a.abs().max(b.abs()));
    Ok((
        p0.tabulate_on(scale, support.clone())?,
        p1.tabulate_on(scale, support)?,
    ))
}

/// `n` equidistant points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
            v[n - 1] = hi;
            v
        }
    }
}

fn normal_ln_bc(p0: ParamPoint, p1: ParamPoint) -> f64 {
    let (l0, l1) = (p0.gamma2, p1.gamma2);
    let sum = l0 + l1;
    let root_gap = sqrt(l0) - sqrt(l1);
    let d = p0.gamma1 - p1.gamma1;
    // 2 sqrt(l0 l1) / (l0 + l1) = 1 - (sqrt l0 - sqrt l1)^2 / (l0 + l1)
    0.5 * log1p(-root_gap * root_gap / sum) - 0.25 * d * d * (l0 * l1) / sum
}

fn gamma_ln_bc(p0: ParamPoint, p1: ParamPoint) -> f64 {
    let (a0, b0) = (p0.gamma1, p0.gamma2);
    let (a1, b1) = (p1.gamma1, p1.gamma2);
    let a_mid = 0.5 * (a0 + a1);
    let b_mid = 0.5 * (b0 + b1);
    ln_gamma(a_mid) - 0.5 * (ln_gamma(a0) + ln_gamma(a1)) + 0.5 * (a0 * log(b0) + a1 * log(b1))
        - a_mid * log(b_mid)
}

fn hellinger_from_ln_bc(ln_bc: f64) -> f64 {
    sqrt((-expm1(ln_bc.min(0.0))).max(0.0))
}

/// Hellinger distance between two normal densities given as (mean, precision).
pub fn hellinger_normal(p0: ParamPoint, p1: ParamPoint) -> Result<f64> {
    Family::Normal.check(p0)?;
    Family::Normal.check(p1)?;
    Ok(hellinger_from_ln_bc(normal_ln_bc(p0, p1)))
}

/// Hellinger distance between two gamma densities given as (shape, rate).
pub fn hellinger_gamma(p0: ParamPoint, p1: ParamPoint) -> Result<f64> {
    Family::Gamma.check(p0)?;
    Family::Gamma.check(p1)?;
    Ok(hellinger_from_ln_bc(gamma_ln_bc(p0, p1)))
}

/// Analytic Hellinger distance for either family.
pub fn hellinger(family: Family, p0: ParamPoint, p1: ParamPoint) -> Result<f64> {
    match family {
        Family::Normal => hellinger_normal(p0, p1),
        Family::Gamma => hellinger_gamma(p0, p1),
    }
}

/// A one-dimensional density tabulated on a strictly increasing support.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    support: Vec<f64>,
    values: Vec<f64>,
    scale: Scale,
}

impl DensityGrid {
    pub fn new(support: Vec<f64>, values: Vec<f64>, scale: Scale) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} support points but {} values",
                support.len(),
                values.len()
            )));
        }
        if support.len() < MIN_GRID_POINTS {
            return Err(Error::InvalidGrid(format!(
                "{} points, at least {MIN_GRID_POINTS} required",
                support.len()
            )));
        }
        if support.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("non-finite support point".into()));
        }
        if let Some(i) = support.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid(format!(
                "support not strictly increasing at index {}",
                i + 1
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidGrid(
                "density values must be finite and nonnegative".into(),
            ));
        }
        if !values.iter().any(|v| *v > 0.0) {
            return Err(Error::InvalidGrid("density is identically zero".into()));
        }
        Ok(DensityGrid {
            support,
            values,
            scale,
        })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Trapezoidal integral of the values.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.support, &self.values)
    }

    /// Rescale so the trapezoidal integral is 1.
    pub fn normalized(mut self) -> Result<Self> {
        let mass = self.mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidGrid(format!("cannot normalize mass {mass}")));
        }
        self.values.iter_mut().for_each(|v| *v /= mass);
        Ok(self)
    }

    /// Linear interpolation, zero outside the support.
    pub fn interpolate(&self, x: f64) -> f64 {
        let s = &self.support;
        if x < s[0] || x > s[s.len() - 1] {
            return 0.0;
        }
        match s.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => self.values[i],
            Err(i) => {
                let (x0, x1) = (s[i - 1], s[i]);
                let t = (x - x0) / (x1 - x0);
                self.values[i - 1] + t * (self.values[i] - self.values[i - 1])
            }
        }
    }

    fn aligned_with(&self, other: &DensityGrid) -> bool {
        self.scale == other.scale && self.support == other.support
    }

    pub(crate) fn from_parts_unchecked(support: Vec<f64>, values: Vec<f64>, scale: Scale) -> Self {
        DensityGrid {
            support,
            values,
            scale,
        }
    }
}

/// Resample two grids onto a shared support covering the intersection of
/// their ranges. Points of either grid inside the intersection are kept and
/// both densities are linearly interpolated onto them. No renormalization is
/// applied: mass outside the intersection does not overlap and drops out of
/// the Bhattacharyya integral.
pub fn common_support(g0: &DensityGrid, g1: &DensityGrid) -> Result<(DensityGrid, DensityGrid)> {
    if g0.scale != g1.scale {
        return Err(Error::InvalidInput(
            "cannot align grids on different scales".into(),
        ));
    }
    if g0.support == g1.support {
        return Ok((g0.clone(), g1.clone()));
    }
    let lo = g0.support[0].max(g1.support[0]);
    let hi = g0.support[g0.len() - 1].min(g1.support[g1.len() - 1]);
    if !(lo < hi) {
        return Err(Error::EmptyIntersection);
    }
    let merge_tol = 1e-12 * (hi - lo);
    let mut points: Vec<f64> = g0
        .support
        .iter()
        .chain(g1.support.iter())
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    points.push(lo);
    points.push(hi);
    points.sort_by(f64::total_cmp);
    let mut support: Vec<f64> = Vec::with_capacity(points.len());
    for x in points {
        match support.last() {
            Some(&last) if x - last <= merge_tol => {}
            _ => support.push(x),
        }
    }
    // the last kept point may sit within merge_tol below hi
    if let Some(last) = support.last_mut() {
        *last = hi;
    }
    if support.len() < MIN_GRID_POINTS {
        return Err(Error::InvalidGrid(format!(
            "support intersection holds only {} points",
            support.len()
        )));
    }
    let v0 = support.iter().map(|&x| g0.interpolate(x)).collect();
    let v1 = support.iter().map(|&x| g1.interpolate(x)).collect();
    Ok((
        DensityGrid::from_parts_unchecked(support.clone(), v0, g0.scale),
        DensityGrid::from_parts_unchecked(support, v1, g1.scale),
    ))
}

/// Bhattacharyya coefficient of two aligned grids by trapezoidal quadrature
/// of `sqrt(f0 f1)`.
pub fn bhattacharyya_grid(g0: &DensityGrid, g1: &DensityGrid) -> Result<f64> {
    if !g0.aligned_with(g1) {
        return Err(Error::Misaligned);
    }
    let bc = trapezoid_by(&g0.support, &g0.values, &g1.values, |a, b| sqrt(a * b));
    Ok(bc.clamp(0.0, 1.0))
}

/// Hellinger distance `sqrt(1 - BC)` of two aligned, normalized grids.
///
/// `1 - BC` is accumulated as `0.5 * int (sqrt f0 - sqrt f1)^2` plus the mass
/// the aligned grids lack relative to 1, which avoids cancellation for nearby
/// densities.
pub fn hellinger_grid(g0: &DensityGrid, g1: &DensityGrid) -> Result<f64> {
    if !g0.aligned_with(g1) {
        return Err(Error::Misaligned);
    }
    let spread = 0.5
        * trapezoid_by(&g0.support, &g0.values, &g1.values, |a, b| {
            let d = sqrt(a) - sqrt(b);
            d * d
        });
    let mut deficit = 1.0 - 0.5 * (g0.mass() + g1.mass());
    if deficit.abs() <= MASS_ROUNDING {
        deficit = 0.0;
    }
    Ok(sqrt((spread + deficit).clamp(0.0, 1.0)))
}
