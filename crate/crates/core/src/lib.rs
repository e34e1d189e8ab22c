// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assignment;
pub mod beamform;
pub mod cli;
pub mod dsp;
pub mod error;
pub mod evaluate;
pub mod geometry;
pub mod glmb;
pub mod io;
pub mod localization;
pub mod metrics;
pub mod pipeline;
pub mod pitch;
pub mod scene;

pub use error::{Error, Result};
