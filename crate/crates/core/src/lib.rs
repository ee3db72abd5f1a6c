//! Local prior sensitivity of marginal posteriors in Hellinger geometry.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only numerics:
//!
//! - [`density`]: normal and gamma priors, tabulated densities, analytic and
//!   grid Hellinger distances.
//! - [`calibration`]: mapping a Hellinger distance to the mean shift of a
//!   unit-variance normal.
//! - [`contour`]: the polar search for prior parameters at a fixed distance
//!   `epsilon` from a base prior.
//! - [`reweight`]: recomputing a marginal posterior for a perturbed prior
//!   from the base posterior by density reweighting.
//! - [`sensitivity`]: circular and worst-case sensitivity, summaries and plot
//!   tables.
//! - [`rw1`]: the conjugate first-order random-walk smoothing model, whose
//!   posterior for the precision is known up to a one-dimensional integral.
//!   It serves as an exact reference for the generic engine.
//! - [`seasonal`]: turning a monthly count series into RW1 observations.
//!
//! ```
//! use priorsens_core::{compute_grid, Family, ParamPoint, PriorSpec};
//!
//! let base = PriorSpec::new(Family::Gamma, ParamPoint::new(1.0, 0.34)).unwrap();
//! let grid = compute_grid(&base, 0.00354, 64).unwrap();
//! assert_eq!(grid.points.len(), 64);
//! ```

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod calibration;
pub mod contour;
pub mod density;
mod error;
mod quadrature;
pub mod reweight;
mod root;
pub mod rw1;
pub mod seasonal;
pub mod sensitivity;
pub mod special;

pub use calibration::{
    calibrate, calibrated_ratio, inverse_calibrate, CalibratedRatio, CalibratedValue,
};
pub use contour::{
    compute_grid, preexplore, scaling_factors, solve_radius, CardinalModuli, ContourPoint,
    PolarGrid,
};
pub use density::{
    bhattacharyya_grid, common_support, hellinger, hellinger_gamma, hellinger_grid,
    hellinger_normal, tabulate_pair, DensityGrid, Family, ParamPoint, PriorSpec, Scale,
};
pub use error::{Error, Result};
pub use quadrature::trapezoid;
pub use reweight::{posterior_distance, reweight_posterior, PosteriorInput, Reweighted};
pub use rw1::{exact_sensitivity, rw1_eigenvalues, Rw1Model};
pub use seasonal::{deseasonalize, SeriesWindow};
pub use sensitivity::{
    circular_sensitivity, export_plot_data, summarize, PlotTables, PolarRow, PolarSeries, Report,
    RolledRow, SensitivityEntry, SensitivityLevel, SensitivityResult,
};

/// Hellinger distance of a unit-variance normal shifted by 0.01.
pub const DEFAULT_EPSILON: f64 = 0.00354;

/// Number of polar directions in a default contour.
pub const DEFAULT_ANGLES: usize = 400;
