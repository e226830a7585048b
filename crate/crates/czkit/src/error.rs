//! Error type shared by all operations.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measure has no atoms")]
    EmptyMeasure,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("inner cube is not contained in the outer cube")]
    NotNested,
    #[error("point is not an atom of the measure")]
    NotInSupport,
    #[error("target is not reachable from this point")]
    NotReachable,
    #[error("covering input contains a cube of side zero")]
    ZeroSideCube,
    #[error("the open set contains the enlarged bounding cube")]
    OmegaIsEverything,
    #[error("simplex did not converge after {iterations} pivots")]
    LpNotConverged { iterations: usize },
    #[error("linear program is infeasible")]
    LpInfeasible,
    #[error("test function fails admissibility: {0}")]
    AdmissibilityViolation(String),
    #[error("cube carries zero mass")]
    ZeroMassCube,
    #[error("canonical cube family is empty")]
    EmptyFamily,
    #[error("function does not have mean zero (integral {0})")]
    NotMeanZero(f64),
    #[error("lambda must be positive")]
    LambdaNonpositive,
    #[error("not enough doubling scales")]
    NotEnoughScales,
    #[error("companion cubes are not nested: {0}")]
    NestingViolation(String),
    #[error("kernel condition {which} violated at atom {location}")]
    ConditionViolated { which: String, location: usize },
    #[error("parameters infeasible: {0}")]
    ParamsInfeasible(String),
    #[error("property {tag} violated at {location}")]
    PropertyViolated { tag: String, location: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("schema error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
