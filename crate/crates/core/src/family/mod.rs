//! The parametric model, its coefficient layout and numerical guards.

pub mod guards;
pub mod model;
pub mod spec;

pub use model::{evaluate, gradient, loss, Family, Prepared};
pub use spec::{count_params, BaseFunction, BaseKind, Block, Layout, ModelSpec, ParamVector, Part};
