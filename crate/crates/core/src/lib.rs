#![allow(clippy::manual_is_multiple_of, clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod fock;
pub mod params;
pub mod specfun;
pub mod spectra;
pub mod table;
pub mod verify;
pub mod wavefn;

pub use error::{Error, Result};
