// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod math;
pub mod model;
pub mod priors;
pub mod metrics;
pub mod sampler;
pub mod io;
pub mod experiment;
