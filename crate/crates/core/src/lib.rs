//! Exact truncated q-series: theta and Appell functions, mock theta
//! functions, admissible-level string functions and an identity checker.

pub mod appell;
pub mod error;
pub mod mocktheta;
pub mod theta;
pub mod verify;
pub mod qexpr;
pub mod qlaurent;
pub mod strings;
pub mod ring;

pub use error::{Error, Result};
pub use qlaurent::{Comparison, Exp, QSeries};
pub use ring::{Conductor, CycCoeff};
