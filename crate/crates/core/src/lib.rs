//! Exponential functionals `V = ∫_0^∞ e^{−ξ_{s−}} dη_s` of independent Lévy
//! processes: support classification, range membership when `ξ` is Brownian
//! motion with drift, stable laws, the Frobenius solution of the Laplace
//! transform ODE, and Monte Carlo simulation.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bm;
pub mod error;
pub mod levy;
pub mod quad;
pub mod range;
pub mod sim;
pub mod spec_file;
pub mod special;
pub mod stable;
pub mod support;

pub use bm::{frobenius_solve, nesting_witness, BmDriftParams, FrobeniusSeries, NestingReport, SeriesPoint};
pub use error::{Error, Result};
pub use levy::{
    eval_laplace_exponent, is_bernstein, subordinator_drift_limit, BernsteinOptions, BernsteinVerdict, Decision,
    LaplaceExponent, LevyMeasureSpec, LevyTriplet, Side,
};
pub use range::{
    check_in_range, decide_membership, finite_k_check, g_mu, growth_necessary_check, EtaWitness, FiniteKOptions,
    GrowthReport, PositiveLawSpec, RangeVerdict,
};
pub use sim::{
    empirical_laplace, simulate_functional, support_consistency, verify_fixed_point, FixedPointReport, SampleSet,
    SimConfig, SupportReport,
};
pub use spec_file::SpecDoc;
pub use stable::{stable_preimage, stable_range_check, PreimagePolynomialForm, StableComponent, StableConvolutionSpec};
pub use support::{positivity_check, support_eta_is_time, support_of_functional, SupportKind, SupportResult};
