//! Discrete jump model of the sweep: the noise splits the drive into
//! sidebands of order m with coupling rabi * J_m(amplitude/frequency), each
//! resonant once, at t_m = m * frequency / rate. Evolution is reduced to a
//! time-ordered product of one 2x2 crossing matrix per resonance inside the
//! sweep window; everything between resonances is free phase accumulation,
//! folded into the off-diagonal phases.

use crate::error::{Error, Result};
use crate::special::{arg_gamma_one_minus_ik, bessel_jm};
use crate::system::{NoiseConfig, SweepConfig};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI, TAU};

#[derive(Debug, Clone, PartialEq)]
pub struct JumpSchedule {
    /// Sideband orders whose resonance lies inside the sweep window,
    /// ascending (equivalently: in time order).
    pub orders: Vec<i32>,
    /// Resonance times m * frequency / rate, strictly increasing.
    pub times: Vec<f64>,
    /// Coupling at each resonance, rabi * J_m(amplitude/frequency). Signed:
    /// the sign carries the Bessel parity and enters the jump phase.
    pub sideband_rabi: Vec<f64>,
}

impl JumpSchedule {
    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }
}

/// Smallest order budget whose resonances cover the sweep window, plus two
/// guard orders.
pub fn default_m_max(sweep: &SweepConfig, noise: &NoiseConfig) -> Result<u32> {
    if noise.frequency <= 0.0 {
        return Err(Error::NoResonances);
    }
    let span = sweep.delta_start.abs().max(sweep.delta_end.abs());
    Ok((span / noise.frequency).ceil() as u32 + 2)
}

/// All sideband resonances of order |m| <= m_max inside the sweep window.
pub fn build_schedule(
    sweep: &SweepConfig,
    noise: &NoiseConfig,
    m_max: u32,
) -> Result<JumpSchedule> {
    if noise.frequency <= 0.0 {
        return Err(Error::NoResonances);
    }
    if m_max < 1 {
        return Err(Error::InvalidConfig(
            "m_max must be at least 1".to_string(),
        ));
    }
    let z = noise.amplitude / noise.frequency;
    let slack = 1e-12 * sweep.delta_start.abs().max(sweep.delta_end.abs()).max(1.0);
    let mut orders = Vec::new();
    let mut times = Vec::new();
    let mut sideband_rabi = Vec::new();
    for m in -(m_max as i32)..=(m_max as i32) {
        let resonance = m as f64 * noise.frequency;
        if resonance < sweep.delta_start - slack || resonance > sweep.delta_end + slack {
            continue;
        }
        orders.push(m);
        times.push(resonance / sweep.rate);
        sideband_rabi.push(sweep.rabi * bessel_jm(m, z));
    }
    Ok(JumpSchedule {
        orders,
        times,
        sideband_rabi,
    })
}

/// One crossing matrix, rows and columns ordered (ground, excited).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpMatrix {
    pub gg: Complex64,
    pub ge: Complex64,
    pub eg: Complex64,
    pub ee: Complex64,
}

impl JumpMatrix {
    pub const IDENTITY: Self = Self {
        gg: Complex64::new(1.0, 0.0),
        ge: Complex64::new(0.0, 0.0),
        eg: Complex64::new(0.0, 0.0),
        ee: Complex64::new(1.0, 0.0),
    };

    pub fn apply(&self, g: Complex64, e: Complex64) -> (Complex64, Complex64) {
        (self.gg * g + self.ge * e, self.eg * g + self.ee * e)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            gg: self.gg * rhs.gg + self.ge * rhs.eg,
            ge: self.gg * rhs.ge + self.ge * rhs.ee,
            eg: self.eg * rhs.gg + self.ee * rhs.eg,
            ee: self.eg * rhs.ge + self.ee * rhs.ee,
        }
    }

    /// Largest absolute deviation of conj(U) U from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let a = self.gg.norm_sqr() + self.eg.norm_sqr() - 1.0;
        let b = self.ge.norm_sqr() + self.ee.norm_sqr() - 1.0;
        let c = self.gg.conj() * self.ge + self.eg.conj() * self.ee;
        a.abs().max(b.abs()).max(c.norm())
    }
}

/// Stokes phase of a linear crossing with adiabaticity kappa:
/// pi/4 + kappa (ln kappa - 1) + arg Gamma(1 - i kappa). Approaches pi/4 as
/// kappa -> 0 and 0 as kappa -> infinity.
fn stokes_phase(kappa: f64) -> f64 {
    if kappa == 0.0 {
        return FRAC_PI_4;
    }
    FRAC_PI_4 + kappa * (kappa.ln() - 1.0) + arg_gamma_one_minus_ik(kappa)
}

/// Crossing matrix for order `m` of the schedule.
///
/// Diabatic-pass amplitude sqrt(p), p = exp(-pi coupling^2 / (2 rate));
/// flip amplitude sqrt(1-p). The off-diagonal phase combines the dynamical
/// phase accumulated at the resonance position (m^2 frequency^2 / (2 rate)),
/// the sideband phase m * noise.phase, the sign of the Bessel coupling, and
/// the Stokes phase of the crossing.
pub fn jump_unitary(
    m: i32,
    schedule: &JumpSchedule,
    sweep: &SweepConfig,
    noise: &NoiseConfig,
) -> Result<JumpMatrix> {
    let idx = schedule
        .orders
        .iter()
        .position(|&o| o == m)
        .ok_or_else(|| Error::InvalidConfig(format!("order {m} is not in the schedule")))?;
    Ok(unitary_at(idx, schedule, sweep, noise))
}

fn unitary_at(
    idx: usize,
    schedule: &JumpSchedule,
    sweep: &SweepConfig,
    noise: &NoiseConfig,
) -> JumpMatrix {
    let m = schedule.orders[idx] as f64;
    let coupling = schedule.sideband_rabi[idx];
    let kappa = coupling * coupling / (4.0 * sweep.rate);
    let p = (-TAU * kappa).exp();
    let flip = (1.0 - p).max(0.0).sqrt();
    let pass = p.sqrt();
    let coupling_arg = if coupling < 0.0 { PI } else { 0.0 };
    let beta = m * m * noise.frequency * noise.frequency / (2.0 * sweep.rate)
        + m * noise.phase
        + coupling_arg
        - stokes_phase(kappa);
    let phase = Complex64::from_polar(1.0, beta);
    JumpMatrix {
        gg: Complex64::new(pass, 0.0),
        ge: -flip * phase,
        eg: flip * phase.conj(),
        ee: Complex64::new(pass, 0.0),
    }
}

/// Final excited population of the jump model at the phase carried by
/// `noise`, applying the schedule's crossings in time order to the ground
/// state.
pub fn transfer_with_schedule(
    schedule: &JumpSchedule,
    sweep: &SweepConfig,
    noise: &NoiseConfig,
) -> f64 {
    let mut g = Complex64::new(1.0, 0.0);
    let mut e = Complex64::new(0.0, 0.0);
    for idx in 0..schedule.len() {
        let u = unitary_at(idx, schedule, sweep, noise);
        (g, e) = u.apply(g, e);
    }
    e.norm_sqr()
}

/// Jump-model transfer at a single noise phase.
pub fn transfer_at_phase(sweep: &SweepConfig, noise: &NoiseConfig, m_max: u32) -> Result<f64> {
    let schedule = build_schedule(sweep, noise, m_max)?;
    Ok(transfer_with_schedule(&schedule, sweep, noise))
}

/// Phase-averaged jump-model transfer over the uniform grid
/// phi_k = 2 pi k / n_phases, accumulated in ascending k.
pub fn multijump_efficiency(
    sweep: &SweepConfig,
    noise: &NoiseConfig,
    m_max: u32,
    n_phases: u32,
) -> Result<f64> {
    if n_phases < 1 {
        return Err(Error::InvalidConfig(
            "phase average needs at least one sample".to_string(),
        ));
    }
    let schedule = build_schedule(sweep, noise, m_max)?;
    let mut sum = 0.0;
    for k in 0..n_phases {
        let sample = noise.with_phase(TAU * k as f64 / n_phases as f64);
        sum += transfer_with_schedule(&schedule, sweep, &sample);
    }
    Ok(sum / n_phases as f64)
}

/// Jump-model transfer truncated to the orders {-1, 0, +1}: the regime where
/// the closed-form worst-case bound lives.
pub fn three_order_transfer(sweep: &SweepConfig, noise: &NoiseConfig) -> Result<f64> {
    transfer_at_phase(sweep, noise, 1)
}
