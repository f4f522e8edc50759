//! Exact scalars, multi-indices and sparse polynomials.

pub mod multiindex;
pub mod poly;
pub mod linalg;
pub mod rational;

pub use multiindex::{enumerate_multiindices, enumerate_up_to, MultiIndex};
pub use poly::{Func, Monomial, MultiPoly, Sym};
pub use rational::{binomial, fmt_q, parse_q, q, qi, GaussianRational, Q};
