#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebraic;
pub mod cli;
pub mod asymptotics;
pub mod ellipsoid;
pub mod error;
pub mod finite_type;
pub mod kernel;
pub mod linalg;
pub mod quadrature;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
