//! Greedy maximization of string submodular functions, with curvature-based
//! performance bounds.
//!
//! Strings of actions are the domain; an [`Objective`] maps each string to a
//! real value. The crate provides the greedy and optimal strategies, exact
//! curvature computations by enumeration, the family of greedy-versus-optimal
//! bounds with their hypothesis checks, string matroids, and two application
//! models (task assignment and Gaussian information gain).

pub mod bounds;
pub mod checks;
pub mod curvature;
pub mod error;
pub mod infogain;
pub mod matroid;
pub mod objective;
pub mod strategy;
pub mod string;
pub mod table;
pub mod tasks;

pub use bounds::{run_bound_suite, BoundCheck, Status, SuiteConfig, SuiteReport, Theorem};
pub use checks::{Violation, ViolationReport};
pub use curvature::{CurvatureKind, CurvatureReport, EtaBar, Witness};
pub use error::{Error, Result};
pub use matroid::{MaxRepeats, PrefixForbidden, StringMatroid, Uniform};
pub use objective::{from_fn, normalize, Memoized, Normalized, Objective, StringLinear};
pub use strategy::{backward_greedy, greedy, optimal_exhaustive, GreedyTrace, ProblemSpec};
pub use string::{Action, ActionString};
pub use table::{RandomSubmodular, TableOracle};

/// Tolerance for every inequality check.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default cap on oracle evaluations for enumerative operations.
pub const DEFAULT_BUDGET: u128 = 2_000_000;
