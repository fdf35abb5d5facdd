//! Minimum-cost many-to-many bipartite assignment with per-vertex demand and
//! capacity bounds, solved by Hungarian-style primal-dual augmentation.
//!
//! Everything is generic over an exact [`Scalar`]; [`IntInstance`] and
//! [`RatInstance`] are the common instantiations.

pub mod capacitated;
pub mod cli;
pub mod expansion;
pub mod hungarian;
pub mod model;
pub mod oracles;
pub mod scalar;

pub use capacitated::{solve_ga, solve_lca, Solution, SolveError, SolveReport};
pub use hungarian::{solve_max_weight_perfect, HungarianSolver};
pub use model::{validate_instance, Assignment, Instance, ModelError, Side, VertexRef};
pub use scalar::Scalar;

pub type Rational = num_rational::Ratio<i64>;

pub type IntInstance = Instance<i64>;
pub type IntAssignment = Assignment<i64>;
pub type RatInstance = Instance<Rational>;
pub type RatAssignment = Assignment<Rational>;
