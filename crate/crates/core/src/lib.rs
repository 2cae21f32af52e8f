//! Exact counts of coincidences among products of polynomial values,
//! `prod P(x_i) = prod P(y_i)` over `[N]^k`, together with the number
//! theory they rest on and a Monte Carlo model through random
//! multiplicative functions.

pub mod congruence;
pub mod counting;
pub mod curves;
pub mod error;
pub mod intfactor;
pub mod polyalg;
pub mod report;
pub mod rmf;

pub use error::{Error, Result};
