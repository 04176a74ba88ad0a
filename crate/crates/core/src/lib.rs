//! Tunneling times, exact 1D scattering, gravitational time dilation rebuilt
//! from tunneling, quantum speed limits and tensor-network bond accounting,
//! with a dimension-checking expression language for the constants algebra.

pub mod bondnet;
pub mod cli;
pub mod dimparse;
pub mod gravclock;
pub mod orthoclock;
pub mod scatter;
pub mod sweep;
pub mod tuntime;
pub mod units;
