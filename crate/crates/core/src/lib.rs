//! Closed-loop quantum gate calibration on a simulated transmon device.
//!
//! The library models a three-level transmon (single qubit or a coupled
//! pair), runs fixed-depth randomized-benchmarking sequences on it, and
//! drives gate parameters with a Nelder-Mead loop that uses the sequence
//! fidelity at fixed depth as its scalar cost.

pub mod clifford;
pub mod device;
pub mod linalg;
pub mod optim;
pub mod rb;
pub mod seeds;
