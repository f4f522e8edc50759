//! Tensor-jet calculus: expressions, exact evaluation, canonicalization and integration by parts.

pub mod canon;
pub mod eval;
pub mod expr;
pub mod ibp;

pub use canon::{canonicalize, canonicalize_in, reduce, reduce_in, Geometry};
pub use eval::{vanishes_identically, Evaluator, MetricModel};
pub use ibp::{ibp_to_operator, leading_coefficient, OperatorExpr};
pub use expr::{Factor, Head, Label, TensorJetExpr, Term};
