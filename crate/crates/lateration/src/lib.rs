//! Exact n-dimensional multilateration.
//!
//! Given `m` satellite positions `a_i ∈ ℝⁿ` and signal arrival times `t_i`
//! (propagation speed normalized to 1), this crate recovers every pair
//! `(t, x)` of clock bias and user position with `‖a_i − x‖ = t_i − t`, and
//! classifies geometrically whether that pair is unique:
//!
//! - [`solver::solve`] runs the direct algebraic procedure — a single
//!   pseudoinverse application when the linearized system has full rank, a
//!   scalar quadratic otherwise — and always returns one or two solutions.
//! - [`uniqueness::classify_uniqueness`] names the geometric case at a user
//!   position: the solution fails to be unique exactly when the satellites
//!   lie on one sheet of a two-sheet hyperboloid of revolution with the user
//!   at a focus.
//! - [`uniqueness::certify_uniqueness`] certifies uniqueness for *all* user
//!   positions from the satellite geometry alone, via the rank of the
//!   moment matrix of degree-≤2 monomials.
//! - [`experiments`] reproduces uniqueness statistics (histograms over
//!   random configurations) and planar uniqueness region maps.
//!
//! The `parallel` feature (on by default) runs the Monte Carlo experiments
//! on a rayon pool; results are bit-identical to the sequential path for a
//! fixed seed.

pub mod experiments;
pub mod model;
pub mod numkernel;
pub mod quadric;
pub mod solver;
pub mod uniqueness;

pub use experiments::{monte_carlo, monte_carlo_sequential, region_map, Histogram, MonteCarloParams, RegionMap};
pub use model::{synthesize_times, GroundTruth, ModelError, Scenario, Solution};
pub use numkernel::{Matrix, Tolerance};
pub use quadric::{classify_focal, recover_focal_parameters, FocalQuadric, QuadricClass};
pub use solver::{solve, Branch, Reduction, SolveError, SolveReport};
pub use uniqueness::{
    certify_uniqueness, classify_uniqueness, det_product, sample_hyperboloid_witness, CaseLabel,
    Certificate, DetProduct, UniquenessClassifier, UniquenessReport,
};
