//! Simulation and analysis of fully coupled networks of memristive, diffusive
//! FitzHugh-Nagumo neurons on a 2-D grid.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64` (and `f32` where it is useful), which is what
//! the file formats and the command-line tool use.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod model;
pub mod scalar;
pub mod sim;
pub mod theory;
pub mod verify;

pub use error::{Component, Error, Result};
pub use grid::{cfl_max_dt, laplacian_neumann, zero_flux_sum, Field2D, Grid2D};
pub use metrics::{
    absorbing_check, asynchronous_degree_estimate, fit_decay_rate, l2_norm_sq, l4_bound_check, l4_norm_4,
    pairwise_component_differences, pairwise_differences, sync_envelope_check, DecayFit, DecayTarget, MetricsRecord,
    MetricsSeries, PairMatrix,
};
pub use model::{f_eval, init_random, verify_assumption, NetworkParams, NetworkState, NonlinearityBounds};
pub use scalar::Scalar;
pub use sim::{
    integrate, integrate_from, reduce_to_ode_check, rhs, step_euler, step_rk4, NoopObserver, RunConfig, RunObserver,
    RunOutput, Scheme,
};
pub use theory::{threshold_report, NormConventions, TheoryConstants, ThresholdReport, Verdict};

pub type Grid = Grid2D<f64>;
pub type Field = Field2D<f64>;
pub type Params = NetworkParams<f64>;
pub type Bounds = NonlinearityBounds<f64>;
pub type State = NetworkState<f64>;
pub type Config = RunConfig<f64>;
pub type Series = MetricsSeries<f64>;
pub type Constants = TheoryConstants<f64>;

pub type Grid32 = Grid2D<f32>;
pub type Field32 = Field2D<f32>;
pub type Params32 = NetworkParams<f32>;
pub type State32 = NetworkState<f32>;
pub type Config32 = RunConfig<f32>;
