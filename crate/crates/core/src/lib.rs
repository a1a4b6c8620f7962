// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod camera;
pub mod cli;
pub mod error;
pub mod geodesy;
pub mod odd;
pub mod scenario;
pub mod labeler;
pub mod metrics;
