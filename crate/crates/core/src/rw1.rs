//! Conjugate first-order random-walk smoothing model.
//!
//! ```text
//! x | tau     ~ N_n(0, (tau R)^-1)      R: RW1 structure matrix, rank n - 1
//! y | x       ~ N_n(x, (kappa I)^-1)    kappa fixed
//! tau         ~ Gamma(alpha, beta)
//! ```
//!
//! Integrating out `x` gives the posterior of the precision in closed form up
//! to its normalizing constant `C(alpha, beta)`:
//!
//! ```text
//! pi(tau | y) = tau^(alpha + (n-1)/2 - 1) |Q|^(-1/2) exp(-beta tau + mu'Q mu / 2) / C(alpha, beta)
//! Q = tau R + kappa I,   mu = kappa Q^-1 y,   |Q| = prod_i (tau lambda_i + kappa)
//! ```
//!
//! with `lambda_i = 2 - 2 cos(pi (i - 1) / n)` the eigenvalues of `R`. Because
//! the exponent is linear in `(alpha, beta)`, the Hellinger distance between
//! two such posteriors only needs three normalizing constants:
//!
//! ```text
//! H^2 = 1 - C((alpha0 + alpha1) / 2, (beta0 + beta1) / 2) / sqrt(C(alpha0, beta0) C(alpha1, beta1))
//! ```

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use libm::{exp, expm1, log, sin, sqrt};

use crate::contour::{compute_grid, PolarGrid};
use crate::density::{linspace, DensityGrid, Family, ParamPoint, PriorSpec, Scale};
use crate::error::{Error, Result};
use crate::quadrature::simpson_weights;
use crate::reweight::PosteriorInput;
use crate::sensitivity::{assemble, PointDistance, SensitivityResult};

/// Points of the default log-precision tabulation.
pub const DEFAULT_TABULATION_POINTS: usize = 2001;
/// The tabulation ends where the density drops below `exp(-28)` (< 1e-12) of its peak.
const TABULATION_CUTOFF: f64 = 28.0;
/// Integration ends where the integrand drops below `exp(-40)` of its peak.
const INTEGRATION_CUTOFF: f64 = 40.0;
/// Convergence target on log normalizing constants under node doubling,
/// relative once they exceed one in magnitude.
const LOG_CONST_TOL: f64 = 1e-13;
const MIN_INTERVALS: usize = 64;
const MAX_INTERVALS: usize = 1 << 17;
const SCAN_STEP: f64 = 0.25;
const SCAN_HALF_WIDTH: f64 = 40.0;
const SCAN_LIMIT: f64 = 600.0;

/// Eigenvalues `2 - 2 cos(pi (i - 1) / n)` of the RW1 structure matrix, ascending.
///
/// Evaluated as `4 sin^2(pi (i - 1) / (2n))`, the same quantity without the
/// cancellation near `i = 1`.
pub fn rw1_eigenvalues(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let s = sin(FRAC_PI_2 * i as f64 / n as f64);
            4.0 * s * s
        })
        .collect()
}

/// `ln |tau R + kappa I|` for an RW1 structure matrix of size `n`.
pub fn logdet_precision(tau: f64, kappa: f64, n: usize) -> f64 {
    rw1_eigenvalues(n)
        .iter()
        .map(|l| log(tau * l + kappa))
        .sum()
}

/// Solve a tridiagonal system by forward elimination and back substitution.
///
/// `lower[i]` couples row `i + 1` to column `i`, `upper[i]` row `i` to column
/// `i + 1`. No pivoting: intended for diagonally dominant matrices.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || rhs.len() != n || lower.len() + 1 != n || upper.len() + 1 != n {
        return Err(Error::InvalidInput(
            "tridiagonal system dimensions disagree".into(),
        ));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
    }
    if n > 1 {
        c[0] = upper[0] / pivot;
    }
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c[i - 1];
        if pivot == 0.0 {
            return Err(Error::Numerical("zero pivot in tridiagonal solve".into()));
        }
        if i + 1 < n {
            c[i] = upper[i] / pivot;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Tridiagonal elimination specialised to `tau R + kappa I`.
///
/// The generic pivots `p_i = d_i - tau^2 / p_(i-1)` lose `kappa` entirely once
/// `tau >> kappa / eps`. Tracking `q_i = p_i - tau` instead gives
/// `q_i = kappa + tau q_(i-1) / (tau + q_(i-1))`, a sum of nonnegative terms.
fn solve_rw1(tau: f64, kappa: f64, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut pivot = vec![0.0; n];
    let mut q = kappa;
    for (i, p) in pivot.iter_mut().enumerate() {
        if i > 0 {
            q = kappa + tau * q / (tau + q);
        }
        *p = if i + 1 < n { tau + q } else { q };
    }
    let mut d = vec![0.0; n];
    d[0] = b[0] / pivot[0];
    for i in 1..n {
        d[i] = (b[i] + tau * d[i - 1]) / pivot[i];
    }
    for i in (0..n - 1).rev() {
        d[i] += tau / pivot[i] * d[i + 1];
    }
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rw1Model {
    y: Vec<f64>,
    kappa: f64,
    prior: ParamPoint,
    eigenvalues: Vec<f64>,
}

impl Rw1Model {
    pub fn new(y: Vec<f64>, kappa: f64, prior: ParamPoint) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "RW1 model needs at least 2 observations, got {}",
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite observation".into()));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::domain(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if !Family::Gamma.admits(prior) {
            return Err(Error::domain(format!(
                "gamma prior ({}, {}) is invalid",
                prior.gamma1, prior.gamma2
            )));
        }
        let eigenvalues = rw1_eigenvalues(y.len());
        Ok(Rw1Model {
            y,
            kappa,
            prior,
            eigenvalues,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn prior(&self) -> ParamPoint {
        self.prior
    }

    pub fn prior_spec(&self) -> PriorSpec {
        PriorSpec::gamma(self.prior.gamma1, self.prior.gamma2).expect("validated on construction")
    }

    pub fn with_prior(&self, prior: ParamPoint) -> Result<Self> {
        Rw1Model::new(self.y.clone(), self.kappa, prior)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `ln |Q|` from the eigenvalue product.
    pub fn logdet_precision(&self, tau: f64) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| log(tau * l + self.kappa))
            .sum()
    }

    /// Bands `(off_diagonal, diagonal)` of `Q = tau R + kappa I`.
    pub fn precision_bands(&self, tau: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let mut diag = vec![2.0 * tau + self.kappa; n];
        diag[0] = tau + self.kappa;
        diag[n - 1] = tau + self.kappa;
        (vec![-tau; n - 1], diag)
    }

    /// `Q^-1 b` for `Q = tau R + kappa I`.
    pub fn solve_precision(&self, tau: f64, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n() {
            return Err(Error::InvalidInput(
                "right-hand side has the wrong length".into(),
            ));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!("tau must be nonnegative, got {tau}")));
        }
        Ok(solve_rw1(tau, self.kappa, b))
    }

    /// `mu' Q mu / 2 = kappa^2 y' Q^-1 y / 2`.
    pub fn quad_term(&self, tau: f64) -> Result<f64> {
        let v = self.solve_precision(tau, &self.y)?;
        let yv: f64 = self.y.iter().zip(&v).map(|(a, b)| a * b).sum();
        Ok(0.5 * self.kappa * self.kappa * yv)
    }

    /// Prior-free part of the log posterior of `u = ln tau`, Jacobian included:
    /// `((n-1)/2) u - ln|Q|/2 + mu'Q mu/2`.
    fn log_kernel(&self, u: f64) -> Result<f64> {
        let tau = exp(u);
        let k = 0.5 * (self.n() - 1) as f64 * u - 0.5 * self.logdet_precision(tau)
            + self.quad_term(tau)?;
        if k.is_finite() {
            Ok(k)
        } else {
            Err(Error::Numerical(format!(
                "non-finite posterior integrand at tau = {tau}"
            )))
        }
    }

    /// Unnormalized log posterior density of `tau` under the model's prior.
    pub fn log_unnormalized_posterior(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::domain(format!("tau must be positive, got {tau}")));
        }
        let ParamPoint {
            gamma1: alpha,
            gamma2: beta,
        } = self.prior;
        Ok((alpha + 0.5 * (self.n() - 1) as f64 - 1.0) * log(tau)
            - 0.5 * self.logdet_precision(tau)
            - beta * tau
            + self.quad_term(tau)?)
    }

    /// `ln C(alpha, beta)`.
    pub fn normconst(&self, alpha: f64, beta: f64) -> Result<f64> {
        let p = ParamPoint::new(alpha, beta);
        if !Family::Gamma.admits(p) {
            return Err(Error::domain(format!(
                "normalizing constant needs alpha, beta > 0, got ({alpha}, {beta})"
            )));
        }
        let q = LogTauQuadrature::covering(self, &[p])?;
        Ok(q.log_integral(p))
    }

    /// Hellinger distance between the posteriors of `tau` under two gamma priors.
    pub fn exact_posterior_hellinger(&self, p0: ParamPoint, p1: ParamPoint) -> Result<f64> {
        for p in [p0, p1] {
            if !Family::Gamma.admits(p) {
                return Err(Error::domain(format!(
                    "gamma prior ({}, {}) is invalid",
                    p.gamma1, p.gamma2
                )));
            }
        }
        let q = LogTauQuadrature::covering(self, &[p0, p1, midpoint(p0, p1)])?;
        Ok(q.hellinger(p0, p1))
    }

    /// Normalized posterior of `ln tau` under the model's prior, on `n_points`
    /// equidistant points spanning the region above `1e-12` of the peak.
    pub fn tabulate_posterior(&self, n_points: usize) -> Result<PosteriorInput> {
        let prior = self.prior;
        let scan = Scan::new(self, &[prior])?;
        let g = |u: f64| -> Result<f64> { Ok(self.log_kernel(u)? + exponent(prior, u)) };
        let (mode, peak) = scan.refine_mode(prior, &g)?;
        let level = peak - TABULATION_CUTOFF;
        let (lo_bracket, hi_bracket) = scan.cut_brackets(prior, level);
        let lo = bisect_level(&g, lo_bracket, mode, level)?;
        let hi = bisect_level(&g, mode, hi_bracket, level)?;
        // step just outside the level crossings so the boundary sits below it
        let pad = 1e-9 * (hi - lo);
        let support = linspace(lo - pad, hi + pad, n_points);
        let values = support
            .iter()
            .map(|&u| Ok(exp(g(u)? - peak)))
            .collect::<Result<Vec<_>>>()?;
        let grid = DensityGrid::new(support, values, Scale::LogParameter)?;
        PosteriorInput::new(grid, self.prior_spec())
    }
}

fn midpoint(p0: ParamPoint, p1: ParamPoint) -> ParamPoint {
    ParamPoint::new(0.5 * (p0.gamma1 + p1.gamma1), 0.5 * (p0.gamma2 + p1.gamma2))
}

/// Prior-dependent part of the log integrand in `u = ln tau`.
#[inline]
fn exponent(p: ParamPoint, u: f64) -> f64 {
    p.gamma1 * u - p.gamma2 * exp(u)
}

/// Kernel values on a coarse equidistant grid in `u`, wide enough that every
/// requested prior's integrand has dropped by the integration cutoff at both ends.
struct Scan {
    u: Vec<f64>,
    kernel: Vec<f64>,
}

impl Scan {
    fn new(model: &Rw1Model, priors: &[ParamPoint]) -> Result<Self> {
        let mut lo = -SCAN_HALF_WIDTH;
        let mut hi = SCAN_HALF_WIDTH;
        loop {
            let steps = libm::round((hi - lo) / SCAN_STEP) as usize;
            let u = linspace(lo, hi, steps + 1);
            let kernel = u
                .iter()
                .map(|&v| model.log_kernel(v))
                .collect::<Result<Vec<_>>>()?;
            let scan = Scan { u, kernel };
            let (mut extend_lo, mut extend_hi) = (false, false);
            for &p in priors {
                let g: Vec<f64> = scan.values(p).collect();
                let max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                extend_lo |= g[0] > max - INTEGRATION_CUTOFF;
                extend_hi |= g[g.len() - 1] > max - INTEGRATION_CUTOFF;
            }
            if !extend_lo && !extend_hi {
                return Ok(scan);
            }
            if (extend_lo && lo <= -SCAN_LIMIT) || (extend_hi && hi >= SCAN_LIMIT) {
                return Err(Error::Numerical(
                    "posterior of tau does not decay within the scanned range".into(),
                ));
            }
            if extend_lo {
                lo -= SCAN_HALF_WIDTH;
            }
            if extend_hi {
                hi += SCAN_HALF_WIDTH;
            }
        }
    }

    fn values(&self, p: ParamPoint) -> impl Iterator<Item = f64> + '_ {
        self.u
            .iter()
            .zip(&self.kernel)
            .map(move |(&u, &k)| k + exponent(p, u))
    }

    fn argmax(&self, p: ParamPoint) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, g) in self.values(p).enumerate() {
            if g > best.1 {
                best = (i, g);
            }
        }
        best.0
    }

    /// Scan points on either side of the mode where `p`'s integrand is below `level`.
    fn cut_brackets(&self, p: ParamPoint, level: f64) -> (f64, f64) {
        let g: Vec<f64> = self.values(p).collect();
        let m = self.argmax(p);
        let lo = (0..m).rev().find(|&i| g[i] < level).unwrap_or(0);
        let hi = (m + 1..g.len())
            .find(|&i| g[i] < level)
            .unwrap_or(g.len() - 1);
        (self.u[lo], self.u[hi])
    }

    /// Golden-section refinement of the mode around the best scan point.
    fn refine_mode<G>(&self, p: ParamPoint, g: &G) -> Result<(f64, f64)>
    where
        G: Fn(f64) -> Result<f64>,
    {
        let m = self.argmax(p);
        let mut a = self.u[m.saturating_sub(1)];
        let mut b = self.u[(m + 1).min(self.u.len() - 1)];
        let ratio = 0.5 * (sqrt(5.0) - 1.0);
        let mut x1 = b - ratio * (b - a);
        let mut x2 = a + ratio * (b - a);
        let mut f1 = g(x1)?;
        let mut f2 = g(x2)?;
        for _ in 0..80 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + ratio * (b - a);
                f2 = g(x2)?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - ratio * (b - a);
                f1 = g(x1)?;
            }
        }
        let mode = 0.5 * (a + b);
        let at_scan = self.kernel[m] + exponent(p, self.u[m]);
        let peak = g(mode)?.max(at_scan);
        Ok((mode, peak))
    }
}

/// Point between `a` and `b` where `g` crosses `level`; `g` is above the level
/// at exactly one end.
fn bisect_level<G>(g: &G, a: f64, b: f64, level: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let (mut below, mut above) = if g(a)? < level { (a, b) } else { (b, a) };
    for _ in 0..100 {
        let mid = 0.5 * (below + above);
        if g(mid)? < level {
            below = mid;
        } else {
            above = mid;
        }
    }
    Ok(below)
}

/// Composite Simpson rule in `u = ln tau` with the prior-free kernel cached at
/// every node, so integrals for many gamma priors share nodes and rounding.
pub struct LogTauQuadrature {
    u: Vec<f64>,
    weights: Vec<f64>,
    kernel: Vec<f64>,
}

impl LogTauQuadrature {
    /// Nodes adequate for every prior in `priors`: the interval covers each
    /// integrand down to `exp(-40)` of its peak and the node count is doubled
    /// until every log integral is stable to `1e-13`.
    pub fn covering(model: &Rw1Model, priors: &[ParamPoint]) -> Result<Self> {
        let scan = Scan::new(model, priors)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &p in priors {
            let g: Vec<f64> = scan.values(p).collect();
            let max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (a, b) = scan.cut_brackets(p, max - INTEGRATION_CUTOFF);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        let mut intervals = MIN_INTERVALS;
        let mut q = Self::build(model, lo, hi, intervals)?;
        let mut previous: Vec<f64> = priors.iter().map(|&p| q.log_integral(p)).collect();
        loop {
            intervals *= 2;
            if intervals > MAX_INTERVALS {
                return Err(Error::Numerical(
                    "normalizing constant quadrature did not converge".into(),
                ));
            }
            q = Self::build(model, lo, hi, intervals)?;
            let current: Vec<f64> = priors.iter().map(|&p| q.log_integral(p)).collect();
            let change = previous
                .iter()
                .zip(&current)
                .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
                .fold(0.0, f64::max);
            if change <= LOG_CONST_TOL {
                return Ok(q);
            }
            previous = current;
        }
    }

    /// Fixed rule with `intervals` equal panels on `[lo, hi]`.
    pub fn build(model: &Rw1Model, lo: f64, hi: f64, intervals: usize) -> Result<Self> {
        let intervals = intervals.max(2) + intervals % 2;
        let u = linspace(lo, hi, intervals + 1);
        let weights = simpson_weights(intervals, (hi - lo) / intervals as f64);
        let kernel = u
            .iter()
            .map(|&v| model.log_kernel(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(LogTauQuadrature { u, weights, kernel })
    }

    pub fn nodes(&self) -> usize {
        self.u.len()
    }

    pub fn intervals(&self) -> usize {
        self.u.len() - 1
    }

    /// Integration limits in `ln tau`.
    pub fn range(&self) -> (f64, f64) {
        (self.u[0], self.u[self.u.len() - 1])
    }

    fn peak(&self, p: ParamPoint) -> f64 {
        self.u
            .iter()
            .zip(&self.kernel)
            .map(|(&u, &k)| k + exponent(p, u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum_i w_i exp(g_p(u_i) - shift)`.
    fn shifted_sum(&self, p: ParamPoint, shift: f64) -> f64 {
        self.u
            .iter()
            .zip(&self.kernel)
            .zip(&self.weights)
            .map(|((&u, &k), &w)| w * exp(k + exponent(p, u) - shift))
            .sum()
    }

    /// `ln C(alpha, beta)` for `p = (alpha, beta)`.
    pub fn log_integral(&self, p: ParamPoint) -> f64 {
        let shift = self.peak(p);
        shift + log(self.shifted_sum(p, shift))
    }

    /// Hellinger distance between the posteriors under `p0` and `p1`. All
    /// three sums share one shift so the log ratio is formed from O(1) numbers.
    pub fn hellinger(&self, p0: ParamPoint, p1: ParamPoint) -> f64 {
        let shift = self.peak(p0);
        let s0 = self.shifted_sum(p0, shift);
        let s1 = self.shifted_sum(p1, shift);
        let s_mid = self.shifted_sum(midpoint(p0, p1), shift);
        let ln_bc = log(s_mid) - 0.5 * (log(s0) + log(s1));
        sqrt((-expm1(ln_bc.min(0.0))).max(0.0))
    }
}

/// Sensitivity of the posterior of `tau` with exact posterior distances over
/// the contour around the model's prior.
pub fn exact_sensitivity(
    model: &Rw1Model,
    epsilon: f64,
    n_angles: usize,
) -> Result<SensitivityResult> {
    let grid = compute_grid(&model.prior_spec(), epsilon, n_angles)?;
    exact_sensitivity_on(model, &grid)
}

/// Exact sensitivity over a precomputed contour.
pub fn exact_sensitivity_on(model: &Rw1Model, grid: &PolarGrid) -> Result<SensitivityResult> {
    if grid.base != model.prior_spec() {
        return Err(Error::InvalidInput(
            "contour is not centred on the model's prior".into(),
        ));
    }
    let base = model.prior;
    let mut priors: Vec<ParamPoint> = Vec::with_capacity(grid.points.len() + 1);
    priors.push(base);
    priors.extend(grid.points.iter().map(|p| p.point));
    let q = LogTauQuadrature::covering(model, &priors)?;
    assemble(grid, |p| {
        Ok(PointDistance {
            h_post: q.hellinger(base, p.point),
            degenerate: false,
        })
    })
}
