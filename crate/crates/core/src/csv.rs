//! Plain-text result serialization. Floats are written in shortest
//! round-trip form, so parsing a field back yields the exact bits that were
//! written and rewriting the same data is byte-identical.

use std::io::Write;

use crate::dynamics::TrajectoryRecord;
use crate::error::Result;
use crate::scan::EfficiencyGrid;
use crate::system::SweepConfig;
use crate::tolerance::{BoundarySlopeResult, ToleranceCurve, ToleranceSearch};

pub const TRAJECTORY_HEADER: &str = "t,re_cg,im_cg,re_ce,im_ce,u,v,w,pe";
pub const GRID_HEADER: &str = "axis1,axis2,pe";
pub const TOLERANCE_HEADER: &str = "frequency,max_amplitude";
pub const BOUNDARY_HEADER: &str = "sweep_rate,empirical_slope,analytic_slope";

/// One row per recorded step.
pub fn write_trajectory_csv<W: Write>(mut w: W, record: &TrajectoryRecord) -> Result<()> {
    write!(w, "{TRAJECTORY_HEADER}\n")?;
    for i in 0..record.len() {
        let s = &record.states[i];
        let b = &record.bloch[i];
        write!(
            w,
            "{},{},{},{},{},{},{},{},{}\n",
            record.times[i],
            s.c_g.re,
            s.c_g.im,
            s.c_e.re,
            s.c_e.im,
            b.u,
            b.v,
            b.w,
            record.excited_pop[i]
        )?;
    }
    Ok(())
}

/// Long form, row-major over (axis1, axis2). A 1-D grid leaves the axis2
/// field empty rather than inventing a coordinate.
pub fn write_grid_csv<W: Write>(mut w: W, grid: &EfficiencyGrid) -> Result<()> {
    write!(w, "{GRID_HEADER}\n")?;
    if grid.axis2.is_empty() {
        for (a1, pe) in grid.axis1.iter().zip(&grid.values) {
            write!(w, "{a1},,{pe}\n")?;
        }
    } else {
        for (i1, a1) in grid.axis1.iter().enumerate() {
            for (i2, a2) in grid.axis2.iter().enumerate() {
                write!(w, "{a1},{a2},{}\n", grid.value(i1, i2))?;
            }
        }
    }
    Ok(())
}

fn write_sweep_section<W: Write>(w: &mut W, sweep: &SweepConfig) -> Result<()> {
    write!(w, "\n[sweep]\n")?;
    write!(w, "rabi = {}\n", sweep.rabi)?;
    write!(w, "rate = {}\n", sweep.rate)?;
    write!(w, "delta_start = {}\n", sweep.delta_start)?;
    write!(w, "delta_end = {}\n", sweep.delta_end)?;
    Ok(())
}

fn write_integrator_section<W: Write>(
    w: &mut W,
    settings: &crate::dynamics::IntegratorSettings,
) -> Result<()> {
    write!(w, "\n[integrator]\n")?;
    write!(w, "method = {}\n", settings.method.as_str())?;
    write!(w, "rel_tol = {}\n", settings.rel_tol)?;
    write!(w, "abs_tol = {}\n", settings.abs_tol)?;
    write!(
        w,
        "steps_per_fastest_period = {}\n",
        settings.steps_per_fastest_period
    )?;
    write!(w, "record_stride = {}\n", settings.record_stride)?;
    Ok(())
}

/// Fully-resolved scan parameters, defaults included, as the key = value
/// sidecar of the grid CSV.
pub fn write_grid_metadata<W: Write>(mut w: W, grid: &EfficiencyGrid) -> Result<()> {
    let spec = &grid.spec;
    write!(w, "version = {}\n", grid.version)?;
    write!(w, "engine = {}\n", spec.engine.as_str())?;
    write!(w, "\n[axis1]\n")?;
    write!(w, "name = {}\n", spec.axis1.name.as_str())?;
    write!(w, "start = {}\n", spec.axis1.start)?;
    write!(w, "stop = {}\n", spec.axis1.stop)?;
    write!(w, "n_points = {}\n", spec.axis1.n_points)?;
    if let Some(axis2) = &spec.axis2 {
        write!(w, "\n[axis2]\n")?;
        write!(w, "name = {}\n", axis2.name.as_str())?;
        write!(w, "start = {}\n", axis2.start)?;
        write!(w, "stop = {}\n", axis2.stop)?;
        write!(w, "n_points = {}\n", axis2.n_points)?;
    }
    write_sweep_section(&mut w, &spec.sweep)?;
    write!(w, "\n[noise]\n")?;
    write!(w, "amplitude = {}\n", spec.noise.amplitude)?;
    write!(w, "frequency = {}\n", spec.noise.frequency)?;
    write!(w, "phase = {}\n", spec.noise.phase)?;
    write!(w, "\n[phases]\n")?;
    write!(w, "n_phases = {}\n", spec.phases.n_phases)?;
    write_integrator_section(&mut w, &spec.integrator)?;
    Ok(())
}

pub fn write_tolerance_csv<W: Write>(mut w: W, curve: &ToleranceCurve) -> Result<()> {
    write!(w, "{TOLERANCE_HEADER}\n")?;
    for (f, a) in curve.frequencies.iter().zip(&curve.max_amplitudes) {
        write!(w, "{f},{a}\n")?;
    }
    Ok(())
}

/// Sidecar for a tolerance curve; carries the search settings the curve
/// itself does not retain, the amplitude ceiling rule included.
pub fn write_tolerance_metadata<W: Write>(
    mut w: W,
    curve: &ToleranceCurve,
    sweep: &SweepConfig,
    search: &ToleranceSearch,
) -> Result<()> {
    write!(w, "version = {}\n", env!("CARGO_PKG_VERSION"))?;
    write!(w, "engine = {}\n", curve.engine.as_str())?;
    write!(w, "threshold = {}\n", curve.threshold.get())?;
    write!(w, "convention = {}\n", search.convention.as_str())?;
    write!(w, "step_fraction = {}\n", search.step_fraction)?;
    write!(w, "ceiling_factor = {}\n", search.ceiling_factor)?;
    write!(w, "n_points = {}\n", curve.len())?;
    write_sweep_section(&mut w, sweep)?;
    write!(w, "\n[phases]\n")?;
    write!(w, "n_phases = {}\n", search.phases.n_phases)?;
    write_integrator_section(&mut w, &search.integrator)?;
    Ok(())
}

pub fn write_boundary_csv<W: Write>(mut w: W, result: &BoundarySlopeResult) -> Result<()> {
    write!(w, "{BOUNDARY_HEADER}\n")?;
    for i in 0..result.sweep_rates.len() {
        write!(
            w,
            "{},{},{}\n",
            result.sweep_rates[i], result.empirical_slopes[i], result.analytic_slopes[i]
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::Threshold;
    use crate::dynamics::{propagate_with_trajectory, IntegratorSettings};
    use crate::scan::{run_scan, Engine, PhaseAverageSpec, ScanAxis, ScanSpec};
    use crate::system::NoiseConfig;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn parse_rows(text: &str, header: &str) -> Vec<Vec<String>> {
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(header));
        lines
            .map(|l| l.split(',').map(str::to_string).collect())
            .collect()
    }

    #[test]
    fn floats_round_trip_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let v: f64 = rng.gen_range(-1.0..1.0) * 10f64.powi(rng.gen_range(-300..300));
            let text = format!("{v}");
            assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{text}");
        }
    }

    #[test]
    fn trajectory_rows_match_the_record() {
        let sweep = SweepConfig::symmetric(0.5, 10.0).unwrap();
        let noise = NoiseConfig::off();
        let settings = IntegratorSettings {
            record_stride: 7,
            ..IntegratorSettings::default()
        };
        let result = propagate_with_trajectory(&sweep, &noise, &settings).unwrap();
        let record = result.trajectory.expect("recording enabled");
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &record).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = parse_rows(&text, TRAJECTORY_HEADER);
        assert_eq!(rows.len(), record.len());
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), 9);
            assert_eq!(row[0].parse::<f64>().unwrap().to_bits(), record.times[i].to_bits());
            assert_eq!(
                row[8].parse::<f64>().unwrap().to_bits(),
                record.excited_pop[i].to_bits()
            );
            let u: f64 = row[5].parse().unwrap();
            assert_eq!(u.to_bits(), record.bloch[i].u.to_bits());
        }
    }

    fn small_grid(two_dee: bool) -> crate::scan::EfficiencyGrid {
        let spec = ScanSpec {
            axis1: ScanAxis {
                name: crate::scan::AxisName::NoiseFrequency,
                start: 3.0,
                stop: 5.0,
                n_points: 2,
            },
            axis2: two_dee.then(|| ScanAxis {
                name: crate::scan::AxisName::NoiseAmplitude,
                start: 0.5,
                stop: 1.5,
                n_points: 3,
            }),
            engine: Engine::Multijump,
            sweep: SweepConfig::symmetric(0.4, 12.0).unwrap(),
            noise: NoiseConfig::new(1.0, 4.0, 0.0).unwrap(),
            phases: PhaseAverageSpec { n_phases: 4 },
            integrator: IntegratorSettings::default(),
        };
        run_scan(&spec).unwrap()
    }

    #[test]
    fn grid_rows_are_row_major_with_exact_values() {
        let grid = small_grid(true);
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &grid).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = parse_rows(&text, GRID_HEADER);
        assert_eq!(rows.len(), 6);
        for (k, row) in rows.iter().enumerate() {
            let (i1, i2) = (k / 3, k % 3);
            assert_eq!(row[0].parse::<f64>().unwrap().to_bits(), grid.axis1[i1].to_bits());
            assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), grid.axis2[i2].to_bits());
            assert_eq!(
                row[2].parse::<f64>().unwrap().to_bits(),
                grid.value(i1, i2).to_bits()
            );
        }
    }

    #[test]
    fn one_dimensional_grid_leaves_axis2_empty() {
        let grid = small_grid(false);
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &grid).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = parse_rows(&text, GRID_HEADER);
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert_eq!(row.len(), 3);
            assert!(row[1].is_empty());
        }
    }

    #[test]
    fn rewriting_is_byte_identical() {
        let grid = small_grid(true);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_grid_csv(&mut a, &grid).unwrap();
        write_grid_csv(&mut b, &grid).unwrap();
        assert_eq!(a, b);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_grid_metadata(&mut a, &grid).unwrap();
        write_grid_metadata(&mut b, &grid).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn metadata_echoes_resolved_settings() {
        let grid = small_grid(true);
        let mut buf = Vec::new();
        write_grid_metadata(&mut buf, &grid).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in [
            "engine = multijump",
            "[axis1]",
            "name = noise_frequency",
            "[axis2]",
            "name = noise_amplitude",
            "n_points = 3",
            "[sweep]",
            "rate = 0.4",
            "[phases]",
            "n_phases = 4",
            "[integrator]",
            "method = adaptive_rk45",
            "steps_per_fastest_period = 200",
        ] {
            assert!(text.lines().any(|l| l == line), "missing {line:?}");
        }
        assert!(text.starts_with("version = "));

        let grid1 = small_grid(false);
        let mut buf = Vec::new();
        write_grid_metadata(&mut buf, &grid1).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains("[axis2]"));
    }

    #[test]
    fn tolerance_and_boundary_tables() {
        let curve = ToleranceCurve::new(
            vec![2.0, 4.0],
            vec![0.25, 0.5],
            Threshold::new(0.99).unwrap(),
            0.05,
            Engine::Multijump,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_tolerance_csv(&mut buf, &curve).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = parse_rows(&text, TOLERANCE_HEADER);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1], vec!["4", "0.5"]);

        let sweep = SweepConfig::symmetric(0.05, 20.0).unwrap();
        let search = crate::tolerance::ToleranceSearch::default();
        let mut buf = Vec::new();
        write_tolerance_metadata(&mut buf, &curve, &sweep, &search).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in [
            "threshold = 0.99",
            "convention = first_failure",
            "ceiling_factor = 5",
            "n_points = 2",
        ] {
            assert!(text.lines().any(|l| l == line), "missing {line:?}");
        }

        let result = BoundarySlopeResult {
            sweep_rates: vec![0.02, 0.04],
            empirical_slopes: vec![0.031, 0.046],
            analytic_slopes: vec![0.0113, 0.016],
        };
        let mut buf = Vec::new();
        write_boundary_csv(&mut buf, &result).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows = parse_rows(&text, BOUNDARY_HEADER);
        assert_eq!(rows[0], vec!["0.02", "0.031", "0.0113"]);
    }
}
