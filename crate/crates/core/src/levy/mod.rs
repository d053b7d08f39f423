//! Lévy triplets, Lévy measures, Laplace exponents and the Bernstein test.

pub mod bernstein;
pub mod exponent;
pub mod measure;
pub mod triplet;

pub use bernstein::{
    is_bernstein, log_grid, subordinator_drift_limit, BernsteinOptions, BernsteinVerdict, Decision, DriftLimit,
    GridInfo, Violation,
};
pub use exponent::{eval_laplace_exponent, FamilyTag, LaplaceExponent, PowerTerm};
pub use measure::{Atom, DensityShape, LevyMeasureSpec, ParametricDensity, Side, TabulatedDensity};
pub use triplet::LevyTriplet;
