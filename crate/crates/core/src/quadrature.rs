/// Trapezoidal rule over an ordered, possibly non-uniform support.
///
/// `x` and `f` must have the same length; fewer than two points integrate to 0.
pub fn trapezoid(x: &[f64], f: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), f.len());
    x.windows(2)
        .zip(f.windows(2))
        .map(|(xs, fs)| 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1]))
        .sum()
}

/// Trapezoidal integral of `g(f0[i], f1[i])` without allocating.
pub(crate) fn trapezoid_by<G>(x: &[f64], f0: &[f64], f1: &[f64], mut g: G) -> f64
where
    G: FnMut(f64, f64) -> f64,
{
    let mut total = 0.0;
    let mut prev = g(f0[0], f1[0]);
    for i in 1..x.len() {
        let cur = g(f0[i], f1[i]);
        total += 0.5 * (x[i] - x[i - 1]) * (prev + cur);
        prev = cur;
    }
    total
}

/// Composite Simpson weights for `intervals` (even) equal panels of width `h`.
pub(crate) fn simpson_weights(intervals: usize, h: f64) -> alloc::vec::Vec<f64> {
    debug_assert!(intervals >= 2 && intervals.is_multiple_of(2));
    (0..=intervals)
        .map(|i| {
            let w = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}
