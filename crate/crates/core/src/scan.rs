//! Phase-averaged efficiency evaluation and 1-D/2-D parameter scans.
//!
//! Grid points are embarrassingly parallel; every result is written into its
//! preassigned slot and phase means are accumulated in fixed ascending order,
//! so the output is bit-identical regardless of worker count.

use crate::dynamics::{propagate, IntegratorSettings};
use crate::error::{Error, Result};
use crate::multijump::{build_schedule, default_m_max, transfer_with_schedule};
use crate::system::{NoiseConfig, SweepConfig};
use rayon::prelude::*;
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseAverageSpec {
    /// Number of uniform phase samples phi_k = 2 pi k / n_phases.
    pub n_phases: u32,
}

impl Default for PhaseAverageSpec {
    fn default() -> Self {
        Self { n_phases: 16 }
    }
}

impl PhaseAverageSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_phases < 1 {
            return Err(Error::InvalidConfig(
                "phase average needs at least one sample".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    FullSimulation,
    Multijump,
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::FullSimulation => "full",
            Engine::Multijump => "multijump",
        }
    }
}

/// Mean engine efficiency over the uniform phase grid, ascending k. The
/// phase carried by `noise` is ignored; the grid replaces it. A zero noise
/// amplitude short-circuits to a single engine evaluation, which it equals
/// exactly.
pub fn phase_averaged_efficiency(
    sweep: &SweepConfig,
    noise: &NoiseConfig,
    phases: &PhaseAverageSpec,
    engine: Engine,
    settings: &IntegratorSettings,
) -> Result<f64> {
    phases.validate()?;
    let n = if noise.amplitude == 0.0 { 1 } else { phases.n_phases };
    match engine {
        Engine::FullSimulation => {
            let mut sum = 0.0;
            for k in 0..n {
                let phi = TAU * k as f64 / n as f64;
                let sample = noise.with_phase(phi);
                let r = propagate(sweep, &sample, settings).map_err(|e| Error::PhaseSample {
                    phi,
                    source: Box::new(e),
                })?;
                sum += r.final_excited_pop;
            }
            Ok(sum / n as f64)
        }
        Engine::Multijump => {
            let schedule = build_schedule(sweep, noise, default_m_max(sweep, noise)?)?;
            let mut sum = 0.0;
            for k in 0..n {
                let phi = TAU * k as f64 / n as f64;
                sum += transfer_with_schedule(&schedule, sweep, &noise.with_phase(phi));
            }
            Ok(sum / n as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    NoiseFrequency,
    NoiseAmplitude,
    SweepRate,
}

impl AxisName {
    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::NoiseFrequency => "noise_frequency",
            AxisName::NoiseAmplitude => "noise_amplitude",
            AxisName::SweepRate => "sweep_rate",
        }
    }
}

impl std::fmt::Display for AxisName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanAxis {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
}

impl ScanAxis {
    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::InvalidConfig(format!(
                "axis {} needs at least one point",
                self.name
            )));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "axis {} bounds must be finite",
                self.name
            )));
        }
        if self.n_points >= 2 && self.start >= self.stop {
            return Err(Error::InvalidConfig(format!(
                "axis {}: start {} must be below stop {}",
                self.name, self.start, self.stop
            )));
        }
        Ok(())
    }

    /// Inclusive uniform grid; a single point sits at `start`.
    pub fn coordinates(&self) -> Vec<f64> {
        if self.n_points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|i| self.start + i as f64 * step)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub axis1: ScanAxis,
    pub axis2: Option<ScanAxis>,
    pub engine: Engine,
    pub sweep: SweepConfig,
    pub noise: NoiseConfig,
    pub phases: PhaseAverageSpec,
    pub integrator: IntegratorSettings,
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(axis2) = &self.axis2 {
            axis2.validate()?;
            if axis2.name == self.axis1.name {
                return Err(Error::InvalidConfig(format!(
                    "scan axes must differ, both are {}",
                    axis2.name
                )));
            }
        }
        self.phases.validate()?;
        self.integrator.validate()
    }
}

#[derive(Debug, Clone)]
pub struct EfficiencyGrid {
    pub axis1: Vec<f64>,
    /// Empty for 1-D scans.
    pub axis2: Vec<f64>,
    /// Row-major over (axis1, axis2); one row per axis1 coordinate. Clamped
    /// to [0, 1]; integrator norm drift can land a value a hair outside.
    pub values: Vec<f64>,
    pub spec: ScanSpec,
    pub version: &'static str,
}

impl EfficiencyGrid {
    pub fn value(&self, i1: usize, i2: usize) -> f64 {
        let n2 = self.axis2.len().max(1);
        self.values[i1 * n2 + i2]
    }

    /// Values along axis1 at a fixed axis2 index.
    pub fn column(&self, i2: usize) -> Vec<f64> {
        (0..self.axis1.len()).map(|i1| self.value(i1, i2)).collect()
    }
}

fn with_axis_value(
    sweep: &SweepConfig,
    noise: &NoiseConfig,
    name: AxisName,
    v: f64,
) -> Result<(SweepConfig, NoiseConfig)> {
    match name {
        AxisName::NoiseFrequency => Ok((
            *sweep,
            NoiseConfig::new(noise.amplitude, v, noise.phase)?,
        )),
        AxisName::NoiseAmplitude => Ok((
            *sweep,
            NoiseConfig::new(v, noise.frequency, noise.phase)?,
        )),
        AxisName::SweepRate => Ok((
            SweepConfig::new(sweep.rabi, v, sweep.delta_start, sweep.delta_end)?,
            *noise,
        )),
    }
}

/// Grid of phase-averaged efficiencies over one or two axes. Points are
/// evaluated in parallel; any point failure aborts the scan carrying the
/// point coordinates.
pub fn run_scan(spec: &ScanSpec) -> Result<EfficiencyGrid> {
    spec.validate()?;
    let axis1 = spec.axis1.coordinates();
    let axis2 = spec.axis2.as_ref().map(|a| a.coordinates()).unwrap_or_default();

    let mut points = Vec::with_capacity(axis1.len() * axis2.len().max(1));
    for &x1 in &axis1 {
        if axis2.is_empty() {
            points.push((x1, None));
        } else {
            for &x2 in &axis2 {
                points.push((x1, Some(x2)));
            }
        }
    }

    let values = points
        .par_iter()
        .map(|&(x1, x2)| {
            evaluate_point(spec, x1, x2).map_err(|e| Error::ScanPoint {
                axis1: x1,
                axis2: x2.unwrap_or(f64::NAN),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(EfficiencyGrid {
        axis1,
        axis2,
        values,
        spec: spec.clone(),
        version: env!("CARGO_PKG_VERSION"),
    })
}

fn evaluate_point(spec: &ScanSpec, x1: f64, x2: Option<f64>) -> Result<f64> {
    let (sweep, noise) = with_axis_value(&spec.sweep, &spec.noise, spec.axis1.name, x1)?;
    let (sweep, noise) = match (x2, &spec.axis2) {
        (Some(v), Some(axis2)) => with_axis_value(&sweep, &noise, axis2.name, v)?,
        _ => (sweep, noise),
    };
    let p = phase_averaged_efficiency(&sweep, &noise, &spec.phases, spec.engine, &spec.integrator)?;
    Ok(p.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakSpacing {
    pub peak_positions: Vec<f64>,
    pub spacings: Vec<f64>,
    pub mean: f64,
}

/// Adjacent-spacing statistics of the strict local maxima of `values` over
/// `positions`, optionally after 3-point moving-average smoothing.
pub fn peak_spacing(positions: &[f64], values: &[f64], smooth: bool) -> Result<PeakSpacing> {
    if positions.len() != values.len() {
        return Err(Error::DegenerateCurve(format!(
            "{} positions vs {} values",
            positions.len(),
            values.len()
        )));
    }
    if values.len() < 3 {
        return Err(Error::DegenerateCurve(format!(
            "need at least 3 samples, got {}",
            values.len()
        )));
    }
    let smoothed: Vec<f64> = if smooth {
        (0..values.len())
            .map(|i| {
                if i == 0 || i == values.len() - 1 {
                    values[i]
                } else {
                    (values[i - 1] + values[i] + values[i + 1]) / 3.0
                }
            })
            .collect()
    } else {
        values.to_vec()
    };

    let mut peak_positions = Vec::new();
    for i in 1..smoothed.len() - 1 {
        if smoothed[i] > smoothed[i - 1] && smoothed[i] > smoothed[i + 1] {
            peak_positions.push(positions[i]);
        }
    }
    if peak_positions.len() < 2 {
        return Err(Error::TooFewPeaks {
            found: peak_positions.len(),
        });
    }
    let spacings: Vec<f64> = peak_positions.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    Ok(PeakSpacing {
        peak_positions,
        spacings,
        mean,
    })
}
