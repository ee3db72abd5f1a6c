//! Bracketed scalar root finding: bisection interleaved with secant steps.

use libm::fabs;

pub(crate) struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

/// Find `x` in `[lo, hi]` with `|f(x)| <= ftol`, given `f(lo) < 0 < f(hi)`.
///
/// Each step takes the secant (regula falsi) point; a bisection is forced
/// whenever the secant point falls outside the middle of the bracket or the
/// bracket failed to halve over the previous two steps. Returns the best
/// point found once `ftol` is met or the bracket is narrower than `xtol`.
pub(crate) fn solve<F>(
    mut f: F,
    bracket: Bracket,
    ftol: f64,
    xtol: f64,
    max_iter: usize,
) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = bracket;
    debug_assert!(lo < hi && f_lo < 0.0 && f_hi > 0.0);
    let mut width_two_steps_ago = f64::INFINITY;
    let mut width_one_step_ago = f64::INFINITY;
    for _ in 0..max_iter {
        let width = hi - lo;
        let secant = lo - f_lo * width / (f_hi - f_lo);
        let margin = 1e-3 * width;
        let shrinking = width <= 0.5 * width_two_steps_ago || width_two_steps_ago.is_infinite();
        let x = if shrinking && secant > lo + margin && secant < hi - margin {
            secant
        } else {
            0.5 * (lo + hi)
        };
        let fx = f(x);
        if !fx.is_finite() {
            return None;
        }
        if fabs(fx) <= ftol {
            return Some(x);
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        width_two_steps_ago = width_one_step_ago;
        width_one_step_ago = width;
        if hi - lo <= xtol {
            return Some(if fabs(f_lo) < fabs(f_hi) { lo } else { hi });
        }
    }
    None
}
