//! Calderón–Zygmund toolkit for finitely supported, possibly non-doubling measures in `R^d`.
//!
//! Every structure is generic over [`Scalar`] (`f32` or `f64`); the aliases at the crate root
//! fix `f64`.

// `!(x > 0)` style guards are kept on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop, clippy::too_many_arguments, clippy::type_complexity)]

pub mod calibration;
pub mod corpus;
pub mod covering;
pub mod cubes;
pub mod czdecomp;
pub mod error;
pub mod io;
pub mod ledger;
pub mod mainlemma;
pub mod maximal;
pub mod measure;
pub mod scalar;
pub mod spaces;
pub mod suite;

pub use cubes::{Cube, DoublingParams};
pub use error::{Error, Result};
pub use ledger::{ConstantsLedger, Provenance};
pub use mainlemma::{decompose_main, MainDecomposition, MainParams};
pub use measure::{DiscreteMeasure, GrowthReport};
pub use scalar::Scalar;

pub type Measure = DiscreteMeasure<f64>;
pub type CubeF = Cube<f64>;
