//! Multi-index bookkeeping and quadrature on `R^d`.

mod index;
mod quadrature;

pub use index::{MultiIndex, TruncationScheme};
pub use quadrature::{
    gauss_hermite_rule, integrate, tensor_rule, uniform_rule, Discretization, QuadratureRule,
    RuleKind,
};
