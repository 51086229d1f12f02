//! Problem definition: the swept two-level system and its sinusoidal
//! detuning perturbation.
//!
//! Units: hbar = 1 and the bare Rabi frequency sets the scale. Frequencies
//! (detunings, noise amplitude and frequency) are in units of the Rabi
//! frequency, time in its inverse, and the sweep rate in its square. The
//! Rabi frequency is stored explicitly (default 1.0) rather than hard-coded
//! so dimensional relations stay visible in formulas.
//!
//! Time zero is the instant the unperturbed chirp crosses resonance, so a
//! sweep is fully specified by its detuning endpoints; integration runs over
//! t in [delta_start/rate, delta_end/rate].

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_RABI: f64 = 1.0;

/// Linear detuning chirp with constant coupling over a finite window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    /// Bare Rabi frequency, the unit of the problem. Positive.
    pub rabi: f64,
    /// Chirp rate in Rabi-frequency squared. Positive.
    pub rate: f64,
    /// Detuning at the start of the sweep.
    pub delta_start: f64,
    /// Detuning at the end of the sweep. Must exceed `delta_start`.
    pub delta_end: f64,
}

impl SweepConfig {
    pub fn new(rabi: f64, rate: f64, delta_start: f64, delta_end: f64) -> Result<Self> {
        if !(rabi > 0.0) || !rabi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "rabi frequency must be positive and finite, got {rabi}"
            )));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sweep rate must be positive and finite, got {rate}"
            )));
        }
        if !(delta_start < delta_end) {
            return Err(Error::InvalidConfig(format!(
                "detuning window must satisfy start < end, got [{delta_start}, {delta_end}]"
            )));
        }
        Ok(Self { rabi, rate, delta_start, delta_end })
    }

    /// Symmetric window of half-width `half_range` at unit Rabi frequency.
    pub fn symmetric(rate: f64, half_range: f64) -> Result<Self> {
        Self::new(DEFAULT_RABI, rate, -half_range, half_range)
    }

    pub fn t_start(&self) -> f64 {
        self.delta_start / self.rate
    }

    pub fn t_end(&self) -> f64 {
        self.delta_end / self.rate
    }

    /// Sweep duration (delta_end - delta_start) / rate.
    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start()
    }
}

/// Single sinusoidal perturbation of the level splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// Oscillation amplitude, >= 0. Zero disables the perturbation.
    pub amplitude: f64,
    /// Oscillation frequency, >= 0.
    pub frequency: f64,
    /// Oscillation phase, normalized into [0, 2*pi).
    pub phase: f64,
}

impl NoiseConfig {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "noise amplitude must be >= 0 and finite, got {amplitude}"
            )));
        }
        if !(frequency >= 0.0) || !frequency.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "noise frequency must be >= 0 and finite, got {frequency}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidConfig(format!("noise phase must be finite, got {phase}")));
        }
        Ok(Self {
            amplitude,
            frequency,
            phase: phase.rem_euclid(std::f64::consts::TAU),
        })
    }

    pub const fn off() -> Self {
        Self { amplitude: 0.0, frequency: 0.0, phase: 0.0 }
    }

    /// Same oscillation with a different phase (normalized).
    pub fn with_phase(&self, phase: f64) -> Self {
        Self {
            amplitude: self.amplitude,
            frequency: self.frequency,
            phase: phase.rem_euclid(std::f64::consts::TAU),
        }
    }
}

/// Instantaneous detuning rate*t - amplitude*cos(frequency*t + phase).
///
/// Total function; evaluation outside the sweep window is permitted for
/// diagnostics.
pub fn detuning(t: f64, sweep: &SweepConfig, noise: &NoiseConfig) -> f64 {
    let base = sweep.rate * t;
    if noise.amplitude == 0.0 {
        return base;
    }
    base - noise.amplitude * (noise.frequency * t + noise.phase).cos()
}

/// Pure state of the two-level system, (ground, excited) amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub c_g: Complex64,
    pub c_e: Complex64,
}

impl StateVector {
    pub const fn ground() -> Self {
        Self { c_g: Complex64::new(1.0, 0.0), c_e: Complex64::new(0.0, 0.0) }
    }

    pub fn norm_sq(&self) -> f64 {
        self.c_g.norm_sqr() + self.c_e.norm_sqr()
    }

    pub fn excited_pop(&self) -> f64 {
        self.c_e.norm_sqr()
    }
}

/// Bloch-sphere coordinates of a pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

const BLOCH_NORM_TOL: f64 = 1e-6;

/// u = 2 Re(c_g conj(c_e)), v = 2 Im(c_g conj(c_e)), w = |c_e|^2 - |c_g|^2.
///
/// Rejects states whose norm deviates from 1 by more than 1e-6; the Bloch
/// image of a pure state is only meaningful on the unit sphere.
pub fn bloch_from_state(s: &StateVector) -> Result<BlochVector> {
    let n = s.norm_sq();
    if (n - 1.0).abs() > BLOCH_NORM_TOL {
        return Err(Error::InvalidConfig(format!(
            "state norm^2 = {n} is not within {BLOCH_NORM_TOL} of 1"
        )));
    }
    let cross = s.c_g * s.c_e.conj();
    Ok(BlochVector {
        u: 2.0 * cross.re,
        v: 2.0 * cross.im,
        w: s.c_e.norm_sqr() - s.c_g.norm_sqr(),
    })
}
