//! Identification of the `h` most mutually correlated arms among `K` jointly
//! Gaussian arms.
//!
//! - [`model`]: correlation matrices, problem instances, the Gaussian sampler.
//! - [`estimators`]: pairwise sufficient statistics and correlation estimates.
//! - [`objective`]: subset scores, suboptimality ratios, `α`, `H_C`, `U`.
//! - [`algorithms`]: uniform sampling, successive rejects, successive
//!   elimination, the two-arm threshold test.
//! - [`theory`]: chi-square tail bounds, KL divergences, risk lower bounds.

pub mod algorithms;
pub mod estimators;
pub mod model;
pub mod objective;
pub mod special;
pub mod theory;

pub use algorithms::{AlgorithmError, AlgorithmOutcome, Caps, DistanceFeed, Verdict};
pub use estimators::PairStatsTable;
pub use model::{ArmSource, CorrelationMatrix, GaussianArms, InstanceFile, ModelError, ProblemInstance};
pub use objective::{DistanceMatrix, Subset};
