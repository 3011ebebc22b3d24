//! Symbolic regression by coefficient optimization over a parametric family
//! of rational functions composed with guarded unary base functions.
//!
//! The family for a [`family::ModelSpec`] with base functions `g_1..g_k` is
//!
//! ```text
//! f(x) = Q_out(x, g_1(Q_1(x)), ..., g_k(Q_k(x)))
//! ```
//!
//! where every `Q` is a rational function whose denominator is normalized to
//! unit Euclidean coefficient norm. Coefficients are fitted by basin hopping
//! over BFGS local searches, then sparsified by a threshold schedule.

pub mod algebra;
pub mod data;
pub mod datagen;
pub mod error;
pub mod expressivity;
pub mod family;
pub mod metrics;
pub mod optimize;
pub mod search;

pub use data::{Dataset, Split};
pub use error::{Error, Result};
pub use family::{BaseFunction, BaseKind, Family, ModelSpec, ParamVector};
pub use metrics::expr::Expr;
