//! Exact rational vector spaces over a finite declared basis.
//!
//! A point is a finite ℚ-combination of basis labels. Each label carries a real
//! value (its embedding) and a rational value of an additive functional `φ`.
//! Floating point cannot represent this structure, so coefficients are exact
//! and only the final gauge is assembled in double precision.

mod basis;
mod rational;
mod spaces;

pub use basis::{additive_functional, BasisDecl, BasisEntry, QVector, ScalarAction};
pub use rational::{format_rational, parse_rational, Rational};
pub use spaces::{
    hamel_witness_generator, make_hamel_additive_metric, make_rational_euclidean_metric, rational_parallelogram_exact,
    HamelAdditive, RationalEuclidean,
};
