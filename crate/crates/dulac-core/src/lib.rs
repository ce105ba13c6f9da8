#![no_std]
//! Truncated formal Dulac series and the machinery around them.

extern crate alloc;

pub mod derivations;
pub mod diffeo;
pub mod error;
pub mod loopclass;
pub mod num;
pub mod poly;
pub mod polexp;
pub mod rigidity;
pub mod saddlenum;
pub mod transseries;

pub use error::{Error, Result};
pub use num::{Cx, Prec, Qd};
pub use polexp::PolExp;
pub use poly::PolyZ;
pub use transseries::{Classification, DulacSeries, DynType};
