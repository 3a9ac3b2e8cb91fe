//! Stationary processes on finite alphabets, driven by higher-order
//! transition tensors.
//!
//! The crate covers the full loop from model to data and back:
//!
//! * [`tensor`]: stochastic tensors over a finite alphabet, context codes,
//!   and the flattened transition matrix on context space.
//! * [`projection`]: stationary vectors, the projection that turns a tensor
//!   of order N into the compatible tensor of order N−1, and the kernel
//!   sequences that describe a stationary process completely.
//! * [`measure`]: cylinder probabilities of the induced process and a
//!   behavioral stationarity check.
//! * [`sampler`]: seeded, reproducible sampling of orders, tensors, and
//!   trajectories.
//! * [`stats`]: exact gram counting, empirical transition estimates, and the
//!   symmetry defect statistics.
//! * [`posterior`]: order inference by defect-weighted updating and
//!   Dirichlet conjugacy for the rows.
//!
//! Numerical conventions: probabilities are f64, row sums are enforced to
//! 1e-12 at construction, long products and large sums live in log space,
//! and every fallible operation returns [`error::Error`] with a class that
//! separates validation failures from numerical ones.

pub mod error;
pub mod logspace;
pub mod measure;
pub mod posterior;
pub mod projection;
pub mod sampler;
pub mod stats;
pub mod tensor;

pub use error::{Error, ErrorClass, Result};
pub use logspace::{log_sum_exp, LogValue};
pub use measure::{
    cylinder_probability, log_cylinder_probability, stationarity_report, stationarity_residual,
    StationarityReport, MAX_STATIONARITY_DEPTH,
};
pub use posterior::{
    conditional_log_marginal, full_posterior, posterior_predictive, update_dirichlet,
    update_order, PosteriorState,
};
pub use projection::{
    closed_form_binary_order3, closed_form_constants, kernel_sequence, project_chain,
    project_down, renormalize_stationary, stationary_vector, stationary_vector_dense,
    stationary_vector_power, KernelSequence, StationaryVector, RESIDUAL_TOLERANCE,
};
pub use sampler::{
    sample_order, sample_scheme, sample_tensor, sample_trajectory, stream_rng,
    DirichletTensorPrior, OrderDistribution, SampledModel, Trajectory, ORDER_STREAM,
    TENSOR_STREAM, TRAJECTORY_STREAM,
};
pub use stats::{
    count_grams, empirical_measure, estimate_tensor, symmetry_defect_term,
    symmetry_defect_total, EmpiricalMeasure, GramTable, PartialTensor, SymmetryDefect,
};
pub use tensor::{
    decode_context, encode_context, flatten, make_tensor, Alphabet, FlattenedMatrix,
    StochasticTensor, Symbol, ROW_SUM_TOLERANCE,
};
