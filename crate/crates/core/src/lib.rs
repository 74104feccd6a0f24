//! Generalized von Neumann–Jordan constants for metrics on vector spaces.
//!
//! The crate evaluates the ratio
//! `G(x, y) = [f^σ(x+y) + f^σ(x−y)] / [2^{σ−1} (f^σ(x) + f^σ(y))]` of a metric's
//! gauge `f(x) = d(x, 0)`, searches for its supremum, audits the structural
//! properties that bound it, and builds product metrics from simplex functions.
//! Metrics need not be translation invariant or normable.
//!
//! * [`metric`] and [`ratio`]: the space abstraction and the two ratio functionals.
//! * [`properties`]: sampled audits with replayable counterexamples.
//! * [`estimator`]: multi-start search with certified witnesses.
//! * [`zoo`]: floating-point example metrics.
//! * [`qspace`]: exact rational spaces over declared bases.
//! * [`product`]: simplex functions, product metrics and closed-form constants.

pub mod error;
pub mod estimator;
pub mod metric;
pub mod product;
pub mod properties;
pub mod qspace;
pub mod ratio;
pub mod zoo;

pub use error::{Error, Result};
pub use metric::{child_rng, gauge, Gauge, MetricSpace, Order, Vector};
pub use ratio::{gauge_ratio, param_ratio, theorem_bounds, Bracket, RatioSample};

/// Schema tag carried by every serialized report.
pub const SCHEMA: &str = "njc-lab/1";
