//! Spectral-Galerkin variational machinery for time-periodic, radially
//! symmetric solutions of semilinear wave equations on an `n`-ball.

pub mod bessel;
pub mod critsearch;
pub mod exec;
pub mod functional;
pub mod reduction;
pub mod space;
pub mod spectrum;
pub mod verify;
