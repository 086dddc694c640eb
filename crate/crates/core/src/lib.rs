//! Discrete-time Markov chain model of a superscalar processor's issue queue
//! and functional units.
//!
//! Each clock cycle is an issue stage (ready instructions leave for their
//! functional units) followed by a dispatch stage (new instructions arrive).
//! The crate builds the issue matrix `C`, the dispatch matrix `A` and the
//! per-cycle matrix `P = C × A` over the occupancy states of the queue,
//! solves for the stationary distribution and derives per-type queue
//! lengths. A seeded simulator of the same stochastic process serves as an
//! independent check, and the optimizer searches for the cheapest
//! functional-unit configuration.
//!
//! ```
//! use iqchain::{analyze, InstructionType, ModelConfig};
//!
//! let model = ModelConfig::new(
//!     3,
//!     vec![
//!         InstructionType::poisson("I1", 1.5, 0.75, 2)?,
//!         InstructionType::poisson("I2", 1.0, 0.8, 1)?,
//!     ],
//! )?;
//! let report = analyze(&model)?.report;
//! assert!((report.l_total - 2.51).abs() < 5e-3);
//! # Ok::<(), iqchain::ModelError>(())
//! ```

pub mod config;
pub mod distributions;
pub mod error;
pub mod matrix;
pub mod multi_type;
pub mod optimizer;
pub mod report;
pub mod sim;
pub mod single_type;
pub mod solver;
pub mod state_space;

pub use distributions::{binomial_pmf, poisson_pmf, ArrivalDist, Readiness};
pub use error::{ModelError, Result};
pub use matrix::{MatrixRole, TransitionMatrix};
pub use multi_type::{
    joint_arrival_matrix, joint_consumption_matrix, multinomial_coefficient, type_probability, InstructionType,
    ModelConfig,
};
pub use optimizer::{configuration_cost, grid_search, hill_climb, FuCostParams, OptimizationResult};
pub use sim::{run as simulate, total_variation, SimConfig, SimReport};
pub use single_type::{arrival_matrix_1d, consumption_matrix_1d, SingleTypeParams};
pub use solver::{analyze, complete_matrix, metrics, steady_state, Analysis, SteadyStateReport};
pub use state_space::{is_boundary, state_space_size, OccupancyState, StateSpace};
