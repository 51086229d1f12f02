//! Simulation and analysis of rapid adiabatic passage in a driven two-level
//! system whose detuning carries a single sinusoidal noise tone.
//!
//! The detuning is swept linearly through resonance while a cosine
//! perturbation of fixed amplitude, frequency, and phase rides on top of it.
//! The crate propagates the Schrödinger dynamics exactly (fixed-step and
//! adaptive Runge-Kutta), evaluates closed-form transfer estimates, builds a
//! discretized jump model from the noise sidebands, and scans transfer
//! efficiency over noise parameters, including phase averages and tolerance
//! boundaries.
//!
//! Frequencies are angular and expressed in units of the Rabi frequency;
//! time is in inverse Rabi frequencies. The sweep crosses the unperturbed
//! resonance at t = 0.

pub mod analytic;
pub mod csv;
pub mod dynamics;
pub mod error;
pub mod multijump;
pub mod scan;
pub mod special;
pub mod system;
pub mod tolerance;

pub use error::{Error, Result};
pub use system::{
    bloch_from_state, detuning, BlochVector, NoiseConfig, StateVector, SweepConfig, DEFAULT_RABI,
};
