//! End-to-end runs of the compiled binary: exit codes, output files, and
//! agreement with the library called directly.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use arp_core::analytic::{lz_lost, lz_transfer};
use arp_core::dynamics::{propagate_with_trajectory, IntegratorSettings};
use arp_core::scan::{run_scan, AxisName, Engine, PhaseAverageSpec, ScanAxis, ScanSpec};
use arp_core::system::{NoiseConfig, SweepConfig};

fn arp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

fn assert_valid_xml(path: &Path) {
    let text = fs::read_to_string(path).unwrap();
    let mut reader = quick_xml::Reader::from_str(&text);
    loop {
        match reader.read_event() {
            Ok(quick_xml::events::Event::Eof) => break,
            Ok(_) => {}
            Err(e) => panic!("{}: invalid xml: {e}", path.display()),
        }
    }
}

#[test]
fn lz_prints_both_closed_forms() {
    let out = arp(&["lz", "1", "0.05"]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], format!("lost={}", lz_lost(1.0, 0.05)));
    assert_eq!(lines[1], format!("transfer={}", lz_transfer(1.0, 0.05)));
}

#[test]
fn lz_rejects_nonpositive_inputs() {
    let out = arp(&["lz", "1", "-0.05"]);
    assert_eq!(out.status.code(), Some(2));
}

const SWEEP_CONF: &str = "[sweep]\n\
    rate = 0.5\n\
    delta_start = -6\n\
    delta_end = 6\n\
    \n\
    [noise]\n\
    amplitude = 0.5\n\
    frequency = 3\n\
    phase = 0.3\n";

#[test]
fn sweep_writes_trajectory_and_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, SWEEP_CONF).unwrap();
    let out_dir = dir.path().join("out");
    let out = arp(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let lines = stdout_lines(&out);
    let pe_line = lines.last().unwrap();
    assert!(pe_line.starts_with("pe="), "{pe_line}");

    let sweep = SweepConfig::new(1.0, 0.5, -6.0, 6.0).unwrap();
    let noise = NoiseConfig::new(0.5, 3.0, 0.3).unwrap();
    let settings = IntegratorSettings {
        record_stride: 1,
        ..IntegratorSettings::default()
    };
    let result = propagate_with_trajectory(&sweep, &noise, &settings).unwrap();
    assert_eq!(*pe_line, format!("pe={}", result.final_excited_pop));

    let mut expected = Vec::new();
    arp_core::csv::write_trajectory_csv(&mut expected, result.trajectory.as_ref().unwrap())
        .unwrap();
    let written = fs::read(out_dir.join("trajectory.csv")).unwrap();
    assert_eq!(written, expected);

    assert!(out_dir.join("resolved_config.txt").exists());
    assert_valid_xml(&out_dir.join("population.svg"));
    assert_valid_xml(&out_dir.join("bloch.svg"));
}

#[test]
fn no_plots_suppresses_figures() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, SWEEP_CONF).unwrap();
    let out_dir = dir.path().join("out");
    let out = arp(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--no-plots",
    ]);
    assert!(out.status.success());
    assert!(out_dir.join("trajectory.csv").exists());
    assert!(!out_dir.join("population.svg").exists());
    assert!(!out_dir.join("bloch.svg").exists());
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, format!("{SWEEP_CONF}typo = 1\n")).unwrap();
    let out = arp(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown key"), "{stderr}");
}

#[test]
fn missing_config_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = arp(&[
        "sweep",
        "--config",
        dir.path().join("absent.conf").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_breakdown_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "[sweep]\nrate = 0.2\ndelta_start = -10\ndelta_end = 10\n\
         [integrator]\nrel_tol = 1e-300\nabs_tol = 1e-300\n",
    )
    .unwrap();
    let out = arp(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("step size underflow"), "{stderr}");
}

#[test]
fn engine_flag_is_rejected_outside_scan_and_tolerance() {
    let out = arp(&["sweep", "--engine", "full", "--config", "x"]);
    assert_eq!(out.status.code(), Some(2));
}

const SCAN_CONF: &str = "[sweep]\n\
    rate = 0.4\n\
    delta_start = -20\n\
    delta_end = 20\n\
    \n\
    [noise]\n\
    amplitude = 5\n\
    frequency = 9\n\
    \n\
    [scan]\n\
    engine = multijump\n\
    axis1 = noise_frequency\n\
    axis1_start = 8\n\
    axis1_stop = 11\n\
    axis1_points = 4\n\
    overlay = true\n";

#[test]
fn one_dimensional_scan_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, SCAN_CONF).unwrap();
    let out_dir = dir.path().join("out");
    let out = arp(&[
        "scan",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let spec = ScanSpec {
        axis1: ScanAxis {
            name: AxisName::NoiseFrequency,
            start: 8.0,
            stop: 11.0,
            n_points: 4,
        },
        axis2: None,
        engine: Engine::Multijump,
        sweep: SweepConfig::new(1.0, 0.4, -20.0, 20.0).unwrap(),
        noise: NoiseConfig::new(5.0, 9.0, 0.0).unwrap(),
        phases: PhaseAverageSpec::default(),
        integrator: IntegratorSettings::default(),
    };
    let grid = run_scan(&spec).unwrap();
    let mut expected = Vec::new();
    arp_core::csv::write_grid_csv(&mut expected, &grid).unwrap();
    let written = fs::read(out_dir.join("efficiency.csv")).unwrap();
    assert_eq!(written, expected);

    let meta = fs::read_to_string(out_dir.join("efficiency_meta.txt")).unwrap();
    assert!(meta.contains("engine = multijump"), "{meta}");
    let svg = fs::read_to_string(out_dir.join("efficiency.svg")).unwrap();
    assert!(svg.contains("stroke-dasharray"), "stripe overlay expected");
    assert_valid_xml(&out_dir.join("efficiency.svg"));
}

#[test]
fn engine_flag_overrides_the_config_engine() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, SCAN_CONF.replace("engine = multijump", "engine = full")).unwrap();
    let out_dir = dir.path().join("out");
    let out = arp(&[
        "scan",
        "--engine",
        "multijump",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--no-plots",
    ]);
    assert!(out.status.success());
    let meta = fs::read_to_string(out_dir.join("efficiency_meta.txt")).unwrap();
    assert!(meta.contains("engine = multijump"), "{meta}");
}

#[test]
fn two_dimensional_scan_writes_a_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "[sweep]\nrate = 2\ndelta_start = -6\ndelta_end = 6\n\
         [noise]\namplitude = 0.5\nfrequency = 3\n\
         [phases]\nn_phases = 4\n\
         [scan]\naxis1 = noise_frequency\naxis1_start = 2\naxis1_stop = 4\naxis1_points = 2\n\
         axis2 = noise_amplitude\naxis2_start = 2\naxis2_stop = 8\naxis2_points = 2\n\
         overlay = true\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = arp(&[
        "scan",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("efficiency.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(csv.lines().next().unwrap(), "axis1,axis2,pe");
    let meta = fs::read_to_string(out_dir.join("efficiency_meta.txt")).unwrap();
    assert!(meta.contains("[axis2]"), "{meta}");
    let svg = fs::read_to_string(out_dir.join("efficiency.svg")).unwrap();
    // carrier-suppression ray drawn over the frequency x amplitude map
    assert!(svg.contains("stroke-dasharray=\"6 4\""), "ray overlay expected");
    assert_valid_xml(&out_dir.join("efficiency.svg"));
}

#[test]
fn tolerance_writes_curve_table_and_figure() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "[sweep]\nrate = 0.4\ndelta_start = -20\ndelta_end = 20\n\
         [tolerance]\nengine = multijump\nthreshold = 0.9\nceiling_factor = 1\n\
         freq_start = 8\nfreq_stop = 11\nfreq_points = 6\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = arp(&[
        "tolerance",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("tolerance.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert_eq!(csv.lines().next().unwrap(), "frequency,max_amplitude");
    let meta = fs::read_to_string(out_dir.join("tolerance_meta.txt")).unwrap();
    assert!(meta.contains("convention = first_failure"), "{meta}");
    assert_valid_xml(&out_dir.join("tolerance.svg"));
}

#[test]
fn tolerance_rates_list_switches_to_boundary_mode() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "[sweep]\nrate = 0.4\ndelta_start = -20\ndelta_end = 20\n\
         [tolerance]\nengine = multijump\nthreshold = 0.9\nceiling_factor = 1\n\
         freq_start = 8\nfreq_stop = 11\nfreq_points = 5\nrates = 0.3, 0.4\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = arp(&[
        "tolerance",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("boundary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(
        csv.lines().next().unwrap(),
        "sweep_rate,empirical_slope,analytic_slope"
    );
    let meta = fs::read_to_string(out_dir.join("boundary_meta.txt")).unwrap();
    assert!(meta.contains("log_ratio_rms_sum"), "{meta}");
    assert!(meta.contains("log_ratio_rms_difference"), "{meta}");
    assert_valid_xml(&out_dir.join("boundary.svg"));
    assert!(!out_dir.join("tolerance.csv").exists());
}

#[test]
fn compare_writes_both_engines_and_their_difference() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "[sweep]\nrate = 0.4\ndelta_start = -20\ndelta_end = 20\n\
         [noise]\namplitude = 5\nfrequency = 9\n\
         [phases]\nn_phases = 4\n\
         [scan]\naxis1 = noise_frequency\naxis1_start = 8\naxis1_stop = 10\naxis1_points = 3\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = arp(&[
        "compare",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let parse = |name: &str| -> Vec<f64> {
        fs::read_to_string(out_dir.join(name))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect()
    };
    let full = parse("full.csv");
    let jumps = parse("jumps.csv");
    let diff = parse("diff.csv");
    assert_eq!(full.len(), 3);
    assert_eq!(jumps.len(), 3);
    for i in 0..3 {
        assert_eq!(diff[i], full[i] - jumps[i]);
    }
    assert_valid_xml(&out_dir.join("compare.svg"));
}

#[test]
fn compare_rejects_an_engine_key() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        "[sweep]\nrate = 0.4\ndelta_start = -20\ndelta_end = 20\n\
         [noise]\namplitude = 5\nfrequency = 9\n\
         [scan]\nengine = full\naxis1 = noise_frequency\naxis1_start = 8\n\
         axis1_stop = 10\naxis1_points = 3\n",
    )
    .unwrap();
    let out = arp(&[
        "compare",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn resolved_config_echo_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, SCAN_CONF).unwrap();
    let out1 = dir.path().join("out1");
    let run1 = arp(&[
        "scan",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
        "--no-plots",
    ]);
    assert!(run1.status.success());
    let echo1 = out1.join("resolved_config.txt");

    let out2 = dir.path().join("out2");
    let run2 = arp(&[
        "scan",
        "--config",
        echo1.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
        "--no-plots",
    ]);
    assert!(run2.status.success(), "{}", String::from_utf8_lossy(&run2.stderr));

    let a = fs::read(&echo1).unwrap();
    let b = fs::read(out2.join("resolved_config.txt")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        fs::read(out1.join("efficiency.csv")).unwrap(),
        fs::read(out2.join("efficiency.csv")).unwrap()
    );
}
