//! Exact solver for piecewise-linear maximin exponent programs, plus
//! numerical checks of the summation identities behind a bound for sums of
//! Hecke eigenvalues along congruences.

pub mod expr;
pub mod lp;
pub mod nt;
pub mod optimize;
pub mod rational;
pub mod reproduce;
pub mod sums;
