//! Empirical noise-tolerance boundaries: how much oscillation amplitude a
//! sweep absorbs at each noise frequency before its transfer drops below an
//! acceptability threshold, and how the slope of that boundary moves with
//! the sweep rate.

use rayon::prelude::*;

use crate::analytic::{lz_transfer, sufficient_slope_with, SlopeBranch, Threshold};
use crate::dynamics::IntegratorSettings;
use crate::error::{Error, Result};
use crate::scan::{phase_averaged_efficiency, Engine, PhaseAverageSpec};
use crate::system::{NoiseConfig, SweepConfig};

/// How an amplitude search reads a non-monotone response. Transfer is not
/// monotone in the noise amplitude, so "maximum acceptable" is ambiguous:
/// stop at the first amplitude that fails, or keep scanning to the ceiling
/// and report the largest amplitude that passed anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    FirstFailure,
    LastAcceptable,
}

impl Convention {
    pub fn as_str(&self) -> &'static str {
        match self {
            Convention::FirstFailure => "first_failure",
            Convention::LastAcceptable => "last_acceptable",
        }
    }
}

/// Settings for one amplitude search. The grid step is
/// `step_fraction * frequency` and the scan stops at
/// `ceiling_factor * frequency`, so resolution and reach scale with the
/// probed frequency.
#[derive(Debug, Clone)]
pub struct ToleranceSearch {
    pub threshold: Threshold,
    pub engine: Engine,
    pub convention: Convention,
    pub step_fraction: f64,
    pub ceiling_factor: f64,
    pub phases: PhaseAverageSpec,
    pub integrator: IntegratorSettings,
}

impl Default for ToleranceSearch {
    fn default() -> Self {
        Self {
            threshold: Threshold::new(0.99).expect("in (0,1)"),
            engine: Engine::default(),
            convention: Convention::default(),
            step_fraction: 1.0 / 50.0,
            ceiling_factor: 5.0,
            phases: PhaseAverageSpec::default(),
            integrator: IntegratorSettings::default(),
        }
    }
}

impl ToleranceSearch {
    pub fn validate(&self) -> Result<()> {
        if !self.step_fraction.is_finite() || self.step_fraction <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "amplitude step fraction must be positive and finite, got {}",
                self.step_fraction
            )));
        }
        if !self.ceiling_factor.is_finite() || self.ceiling_factor < self.step_fraction {
            return Err(Error::InvalidConfig(format!(
                "amplitude ceiling factor must be finite and at least the step fraction, got {}",
                self.ceiling_factor
            )));
        }
        self.phases.validate()?;
        self.integrator.validate()
    }
}

/// Largest noise amplitude at `frequency` for which the phase-averaged
/// transfer stays above `threshold` times the noiseless asymptotic value,
/// under the search's convention. Scans upward from one grid step; returns
/// the ceiling when nothing below it fails.
pub fn max_acceptable_amplitude(
    frequency: f64,
    sweep: &SweepConfig,
    search: &ToleranceSearch,
) -> Result<f64> {
    search.validate()?;
    if !frequency.is_finite() || frequency <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "noise frequency must be positive and finite, got {frequency}"
        )));
    }
    let target = search.threshold.get() * lz_transfer(sweep.rabi, sweep.rate);
    let step = search.step_fraction * frequency;
    let ceiling = search.ceiling_factor * frequency;
    // tiny slack so ceiling_factor an exact multiple of step_fraction tests
    // its own endpoint
    let n_steps = (ceiling / step * (1.0 + 1e-12)).floor() as usize;
    let mut last_passed = 0.0;
    let mut any_failed = false;
    for k in 1..=n_steps {
        let amplitude = step * k as f64;
        let noise = NoiseConfig::new(amplitude, frequency, 0.0)?;
        let mean = phase_averaged_efficiency(
            sweep,
            &noise,
            &search.phases,
            search.engine,
            &search.integrator,
        )?;
        if mean > target {
            last_passed = amplitude;
        } else {
            any_failed = true;
            if search.convention == Convention::FirstFailure {
                return Ok(last_passed);
            }
        }
    }
    if any_failed {
        Ok(last_passed)
    } else {
        Ok(ceiling)
    }
}

/// Acceptable-amplitude boundary over a frequency grid.
#[derive(Debug, Clone)]
pub struct ToleranceCurve {
    pub frequencies: Vec<f64>,
    pub max_amplitudes: Vec<f64>,
    pub threshold: Threshold,
    pub sweep_rate: f64,
    pub engine: Engine,
}

impl ToleranceCurve {
    pub fn new(
        frequencies: Vec<f64>,
        max_amplitudes: Vec<f64>,
        threshold: Threshold,
        sweep_rate: f64,
        engine: Engine,
    ) -> Result<Self> {
        if frequencies.len() != max_amplitudes.len() {
            return Err(Error::InvalidConfig(format!(
                "tolerance curve arrays differ in length: {} frequencies, {} amplitudes",
                frequencies.len(),
                max_amplitudes.len()
            )));
        }
        if let Some(f) = frequencies.iter().find(|f| !f.is_finite() || **f <= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance curve frequency must be positive and finite, got {f}"
            )));
        }
        if let Some(a) = max_amplitudes.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance curve amplitude must be nonnegative and finite, got {a}"
            )));
        }
        Ok(Self {
            frequencies,
            max_amplitudes,
            threshold,
            sweep_rate,
            engine,
        })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// One amplitude search per frequency, concurrent across frequencies.
/// Output order follows the input grid regardless of worker scheduling.
pub fn tolerance_curve(
    frequencies: &[f64],
    sweep: &SweepConfig,
    search: &ToleranceSearch,
) -> Result<ToleranceCurve> {
    search.validate()?;
    if frequencies.is_empty() {
        return Err(Error::InvalidConfig("frequency grid is empty".to_string()));
    }
    let max_amplitudes = frequencies
        .par_iter()
        .map(|&f| {
            max_acceptable_amplitude(f, sweep, search).map_err(|e| Error::ScanPoint {
                axis1: f,
                axis2: f64::NAN,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ToleranceCurve::new(
        frequencies.to_vec(),
        max_amplitudes,
        search.threshold,
        sweep.rate,
        search.engine,
    )
}

/// Uniform frequency grid spanning (0.2 rabi, 1.2 delta_end]: left edge
/// excluded, right endpoint on the grid.
pub fn frequency_grid(sweep: &SweepConfig, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "frequency grid needs at least one point".to_string(),
        ));
    }
    let lo = 0.2 * sweep.rabi;
    let hi = 1.2 * sweep.delta_end;
    if !(hi > lo) {
        return Err(Error::InvalidConfig(format!(
            "frequency grid span is empty: sweep ends at {} while the grid starts above {lo}",
            sweep.delta_end
        )));
    }
    Ok((1..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect())
}

/// [`frequency_grid`] at the default density of 200 points.
pub fn default_frequency_grid(sweep: &SweepConfig) -> Result<Vec<f64>> {
    frequency_grid(sweep, 200)
}

/// Steepest line through the origin lying on or below every curve point:
/// the minimum of amplitude / frequency. Needs at least five points to
/// describe a boundary rather than a fluke.
pub fn empirical_sufficient_slope(curve: &ToleranceCurve) -> Result<f64> {
    if curve.len() < 5 {
        return Err(Error::DegenerateCurve(format!(
            "boundary slope needs at least 5 curve points, got {}",
            curve.len()
        )));
    }
    Ok(curve
        .frequencies
        .iter()
        .zip(&curve.max_amplitudes)
        .map(|(f, a)| a / f)
        .fold(f64::INFINITY, f64::min))
}

/// Empirical boundary slope per sweep rate, next to the closed-form
/// sufficient slope at the same threshold.
#[derive(Debug, Clone)]
pub struct BoundarySlopeResult {
    pub sweep_rates: Vec<f64>,
    pub empirical_slopes: Vec<f64>,
    pub analytic_slopes: Vec<f64>,
}

/// Tolerance curve and boundary slope at each rate, holding everything else
/// fixed. The sweep's own rate is ignored; the grid of `rates` replaces it.
pub fn boundary_slopes(
    rates: &[f64],
    sweep: &SweepConfig,
    frequencies: &[f64],
    search: &ToleranceSearch,
    branch: SlopeBranch,
) -> Result<BoundarySlopeResult> {
    if rates.is_empty() {
        return Err(Error::InvalidConfig("rate grid is empty".to_string()));
    }
    let mut empirical_slopes = Vec::with_capacity(rates.len());
    let mut analytic_slopes = Vec::with_capacity(rates.len());
    for &rate in rates {
        let swept = SweepConfig::new(sweep.rabi, rate, sweep.delta_start, sweep.delta_end)?;
        let curve = tolerance_curve(frequencies, &swept, search)?;
        empirical_slopes.push(empirical_sufficient_slope(&curve)?);
        analytic_slopes.push(sufficient_slope_with(
            search.threshold,
            rate,
            sweep.rabi,
            branch,
        ));
    }
    Ok(BoundarySlopeResult {
        sweep_rates: rates.to_vec(),
        empirical_slopes,
        analytic_slopes,
    })
}
