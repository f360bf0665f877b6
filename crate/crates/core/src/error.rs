use thiserror::Error;

use crate::model::ProductVertex;

pub type Result<T> = std::result::Result<T, FifError>;

/// Errors raised while building, evaluating or analysing an interpolation system.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FifError {
    /// A point lies outside the triangle hull it was supposed to be in.
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested enumeration or table would exceed the configured budget.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The data set does not cover every vertex of the product vertex set.
    #[error("missing data for {} vertices: {}", .0.len(), list_vertices(.0))]
    MissingVertices(Vec<ProductVertex>),

    /// A boundary vertex carries a non-zero value.
    #[error("boundary value must be zero at {vertex}, found {value}")]
    BoundaryNonZero { vertex: ProductVertex, value: f64 },

    /// Two representations of the same vertex were given different values.
    #[error("conflicting values for {vertex}: {first} vs {second}")]
    DuplicateVertex {
        vertex: ProductVertex,
        first: f64,
        second: f64,
    },

    /// Any other data-set or geometry validation failure.
    #[error("validation error: {0}")]
    Validation(String),

    /// The scaling field is not a contraction.
    #[error("scaling field is not contractive: sup |alpha| = {0} (must be < 1)")]
    Contraction(f64),

    /// A caller-side precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The dimension bounds were requested for a model outside their hypothesis.
    #[error("hypothesis not satisfied: sup |alpha| = {alpha_sup} is not below 2^-{n} = {threshold}")]
    HypothesisNotSatisfied {
        alpha_sup: f64,
        n: usize,
        threshold: f64,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

fn list_vertices(v: &[ProductVertex]) -> String {
    const SHOWN: usize = 12;
    let mut out = v
        .iter()
        .take(SHOWN)
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    if v.len() > SHOWN {
        out.push_str(&format!(", ... and {} more", v.len() - SHOWN));
    }
    out
}
