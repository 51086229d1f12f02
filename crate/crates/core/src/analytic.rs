//! Closed-form transfer estimates: the asymptotic sweep-loss exponential, the
//! worst-case bound under sinusoidal detuning noise, and the sufficient noise
//! slope that keeps phase-averaged transfer above a threshold.

use crate::error::{Error, Result};
use crate::special::j0_first_zero;
use std::f64::consts::PI;

/// Probability of remaining in the ground state after an infinite noiseless
/// sweep: exp(-pi rabi^2 / (2 rate)).
pub fn lz_lost(rabi: f64, rate: f64) -> f64 {
    (-PI * rabi * rabi / (2.0 * rate)).exp()
}

/// Complement of [`lz_lost`]: the asymptotic transfer probability.
pub fn lz_transfer(rabi: f64, rate: f64) -> f64 {
    1.0 - lz_lost(rabi, rate)
}

/// Worst-case transfer bound over the noise phase, before clamping.
///
/// lz_transfer * (1 - 2 exp(-A))^2 with A = pi rabi^2 amplitude^2 /
/// (8 rate frequency^2). Valid for rate << rabi^2 and amplitude << frequency.
pub fn min_transfer_raw(rabi: f64, rate: f64, amplitude: f64, frequency: f64) -> f64 {
    if amplitude == 0.0 {
        return lz_transfer(rabi, rate);
    }
    let a = PI * rabi * rabi * amplitude * amplitude / (8.0 * rate * frequency * frequency);
    let factor = 1.0 - 2.0 * (-a).exp();
    lz_transfer(rabi, rate) * factor * factor
}

/// [`min_transfer_raw`] clamped below at zero.
///
/// The raw value is a squared factor times a probability and cannot actually
/// go negative; the clamp is kept as a guard on the stated output range.
pub fn min_transfer(rabi: f64, rate: f64, amplitude: f64, frequency: f64) -> f64 {
    min_transfer_raw(rabi, rate, amplitude, frequency).max(0.0)
}

/// Transfer threshold, a fraction of the noiseless asymptotic transfer.
/// Strictly inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(x: f64) -> Result<Self> {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "threshold must lie strictly between 0 and 1, got {x}"
            )));
        }
        Ok(Threshold(x))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// The two candidate closed forms for the sufficient slope. They differ only
/// in the argument of the inner logarithm; `Sum` uses (1 + sqrt(x))/2 and is
/// the default, `Difference` uses (1 - sqrt(x))/2. The acceptance suite
/// compares both against simulated threshold boundaries and reports which one
/// tracks them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlopeBranch {
    #[default]
    Sum,
    Difference,
}

/// Sufficient noise slope (amplitude / frequency): noise below this slope
/// keeps the phase-averaged transfer above `x` times the noiseless value.
///
/// sqrt(-(8/pi) ln(arg)) * sqrt(rate / rabi^2), with `arg` chosen by `branch`.
pub fn sufficient_slope_with(x: Threshold, rate: f64, rabi: f64, branch: SlopeBranch) -> f64 {
    let sx = x.get().sqrt();
    let arg = match branch {
        SlopeBranch::Sum => (1.0 + sx) / 2.0,
        SlopeBranch::Difference => (1.0 - sx) / 2.0,
    };
    (-(8.0 / PI) * arg.ln()).sqrt() * (rate / (rabi * rabi)).sqrt()
}

/// [`sufficient_slope_with`] at the default branch.
pub fn sufficient_slope(x: Threshold, rate: f64, rabi: f64) -> f64 {
    sufficient_slope_with(x, rate, rabi, SlopeBranch::default())
}

/// Noise slope amplitude/frequency at which the carrier coupling vanishes:
/// the first zero of J_0, about 2.4048. Sweeps become opaque there no matter
/// how slow the rate.
pub fn critical_ratio() -> f64 {
    j0_first_zero()
}
