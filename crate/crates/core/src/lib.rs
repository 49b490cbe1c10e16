//! Moore-Penrose pseudoinverses of (possibly rank-deficient) operators,
//! polyhedral cone calculus, and checkers for the six equivalent
//! characterisations of `(T*T)†(K*) ⊆ K`.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod cone;
pub mod error;
pub mod instances;
pub mod numlin;
pub mod operator;
pub mod scalar;
pub mod theorem;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Matrix = numlin::DenseMatrix<f64>;
pub type Policy = numlin::TolerancePolicy<f64>;
pub type Operator = operator::MatrixOperator<f64>;
pub type Spectral = operator::SingularSystem<f64>;
pub type Cone = cone::ConvexCone<f64>;
pub type Instance = theorem::GramInstance<f64>;
pub type Report = theorem::ConditionReport<f64>;

pub type Matrix32 = numlin::DenseMatrix<f32>;
pub type Cone32 = cone::ConvexCone<f32>;
pub type Instance32 = theorem::GramInstance<f32>;
