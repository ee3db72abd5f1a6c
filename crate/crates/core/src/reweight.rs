//! Marginal posteriors under a perturbed prior, obtained from the base
//! posterior by multiplying with the prior ratio and renormalizing.

use alloc::format;
use alloc::vec::Vec;

use libm::{exp, log};

use crate::density::{hellinger_grid, DensityGrid, PriorSpec, Scale};
use crate::error::{Error, Result};
use crate::quadrature::trapezoid;

/// Posterior values below this fraction of the peak are dropped before reweighting.
pub const TAIL_GUARD: f64 = 1e-15;
/// `ln(1e-300)`: base prior log densities below this make reweighting unstable.
const LN_PRIOR_FLOOR: f64 = -690.775_527_898_213_7;
/// Fewer support points than this carrying the mass flags a degenerate posterior.
const MIN_EFFECTIVE_POINTS: usize = 3;

/// A tabulated marginal posterior together with the prior it was computed under.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorInput {
    posterior: DensityGrid,
    base_prior: PriorSpec,
    /// Log base-prior kernel at each support point, `None` where the guarded
    /// posterior vanishes.
    ln_base: Vec<Option<f64>>,
}

impl PosteriorInput {
    /// Normalizes the grid and checks the base prior is positive wherever the
    /// posterior carries mass.
    pub fn new(posterior: DensityGrid, base_prior: PriorSpec) -> Result<Self> {
        let posterior = posterior.normalized()?;
        let scale = posterior.scale();
        let peak = posterior.values().iter().copied().fold(0.0, f64::max);
        let cutoff = TAIL_GUARD * peak;
        let ln_base = posterior
            .support()
            .iter()
            .zip(posterior.values())
            .map(|(&x, &v)| {
                if v <= cutoff {
                    return Ok(None);
                }
                let theta = theta_at(x, scale);
                let lp = base_prior.ln_density_natural(theta)?;
                if !(lp >= LN_PRIOR_FLOOR) {
                    return Err(Error::ReweightInstability { x });
                }
                Ok(Some(lp))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PosteriorInput {
            posterior,
            base_prior,
            ln_base,
        })
    }

    pub fn posterior(&self) -> &DensityGrid {
        &self.posterior
    }

    pub fn base_prior(&self) -> &PriorSpec {
        &self.base_prior
    }

    pub fn parametrization(&self) -> Scale {
        self.posterior.scale()
    }
}

/// On the log scale both priors are evaluated at `theta = exp(z)` without the
/// Jacobian `exp(z)`, which cancels in the ratio.
fn theta_at(x: f64, scale: Scale) -> f64 {
    match scale {
        Scale::Natural => x,
        Scale::LogParameter => exp(x),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reweighted {
    pub grid: DensityGrid,
    /// Nearly all mass sits on fewer than three support points.
    pub degenerate: bool,
}

/// Posterior under `new_prior`, on the support of the base posterior.
pub fn reweight_posterior(input: &PosteriorInput, new_prior: &PriorSpec) -> Result<Reweighted> {
    if new_prior.family() != input.base_prior.family() {
        return Err(Error::InvalidInput(format!(
            "cannot reweight a {} prior by a {} prior",
            input.base_prior.family().name(),
            new_prior.family().name()
        )));
    }
    let scale = input.parametrization();
    let support = input.posterior.support();
    let values = input.posterior.values();

    let mut ln_weights: Vec<f64> = Vec::with_capacity(support.len());
    let mut max = f64::NEG_INFINITY;
    for ((&x, &v), ln_base) in support.iter().zip(values).zip(&input.ln_base) {
        let lw = match ln_base {
            None => f64::NEG_INFINITY,
            Some(lb) => {
                let ln_new = new_prior.ln_density_natural(theta_at(x, scale))?;
                log(v) + ln_new - lb
            }
        };
        if lw > max {
            max = lw;
        }
        ln_weights.push(lw);
    }
    if !max.is_finite() {
        return Err(Error::Numerical(
            "reweighted posterior has no finite mass".into(),
        ));
    }
    let mut out: Vec<f64> = ln_weights.iter().map(|lw| exp(lw - max)).collect();
    let mass = trapezoid(support, &out);
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Numerical(format!("reweighted mass {mass}")));
    }
    out.iter_mut().for_each(|v| *v /= mass);
    let degenerate = is_degenerate(support, &out);
    Ok(Reweighted {
        grid: DensityGrid::from_parts_unchecked(support.to_vec(), out, scale),
        degenerate,
    })
}

/// Whether fewer than three support points hold all but `1e-6` of the mass.
fn is_degenerate(support: &[f64], values: &[f64]) -> bool {
    let n = support.len();
    let mut contributions: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 {
                support[i] - support[i - 1]
            } else {
                0.0
            };
            let right = if i + 1 < n {
                support[i + 1] - support[i]
            } else {
                0.0
            };
            0.5 * (left + right) * values[i]
        })
        .collect();
    let total: f64 = contributions.iter().sum();
    contributions.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    for (k, c) in contributions.iter().enumerate() {
        acc += c;
        if acc >= (1.0 - 1e-6) * total {
            return k + 1 < MIN_EFFECTIVE_POINTS;
        }
    }
    false
}

/// Hellinger distance between the posterior under `new_prior` and the base posterior.
pub fn posterior_distance(input: &PosteriorInput, new_prior: &PriorSpec) -> Result<f64> {
    let reweighted = reweight_posterior(input, new_prior)?;
    hellinger_grid(&reweighted.grid, &input.posterior)
}
