//! Simulation core for docking a hand exoskeleton to grounded force-feedback arms.
//!
//! The crate is `no_std` (with `alloc`) so the same models can run inside a
//! device callback. File formats, logging and the command line live in the
//! `dockhap` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod capability;
pub mod devices;
pub mod docking;
pub mod frames;
pub mod math;
pub mod scenario;
pub mod sim;
