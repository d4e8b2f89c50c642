//! Interpolation operators: univariate barycentric Lagrange evaluation,
//! full tensor-product interpolation, and the sparse-grid surrogate built
//! from hierarchical surpluses.

pub mod barycentric;
pub mod sparse;
pub mod tensor;
