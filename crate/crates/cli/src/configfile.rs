//! Experiment configuration files: flat `key = value` text grouped under
//! `[section]` headers, `#` comment lines, nothing else. Strict in both
//! directions: the document layer rejects malformed lines and duplicates,
//! the typed layer rejects keys and sections it does not know, so a typo
//! cannot silently become a default.

use std::collections::BTreeMap;

use arp_core::analytic::{SlopeBranch, Threshold};
use arp_core::dynamics::{IntegratorSettings, Method};
use arp_core::scan::{AxisName, Engine, PhaseAverageSpec, ScanAxis, ScanSpec};
use arp_core::system::{NoiseConfig, SweepConfig};
use arp_core::tolerance::{Convention, ToleranceSearch};

use crate::CliError;

/// Parsed but untyped document: section name -> key -> raw value.
/// Top-level keys live under the empty section name; the typed layer
/// rejects them.
#[derive(Debug, Clone, Default)]
pub struct ConfigDocument {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let n = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(inner) = line.strip_prefix('[') {
                let Some(name) = inner.strip_suffix(']') else {
                    return Err(format!("line {n}: section header does not end with ']'"));
                };
                if !valid_name(name) {
                    return Err(format!(
                        "line {n}: section name must be lowercase letters, digits or '_', got {name:?}"
                    ));
                }
                if sections.contains_key(name) {
                    return Err(format!("line {n}: section [{name}] appears twice"));
                }
                sections.insert(name.to_string(), BTreeMap::new());
                current = name.to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {n}: expected 'key = value' or a [section] header"));
            };
            let key = key.trim();
            let value = value.trim();
            if !valid_name(key) {
                return Err(format!(
                    "line {n}: key must be lowercase letters, digits or '_', got {key:?}"
                ));
            }
            if value.is_empty() {
                return Err(format!("line {n}: key {key:?} has no value"));
            }
            if value.contains('=') || value.contains('#') || value.chars().any(char::is_control) {
                return Err(format!("line {n}: value for {key:?} contains a reserved character"));
            }
            let section = sections.entry(current.clone()).or_default();
            if section.contains_key(key) {
                let place = if current.is_empty() {
                    "top level".to_string()
                } else {
                    format!("section [{current}]")
                };
                return Err(format!("line {n}: key {key:?} appears twice in {place}"));
            }
            section.insert(key.to_string(), value.to_string());
        }
        Ok(Self { sections })
    }
}

/// Consuming view over one section; whatever is not taken by the time
/// `finish` runs is an unknown-key error.
pub struct SectionReader {
    name: String,
    entries: BTreeMap<String, String>,
}

impl SectionReader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        self.take(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| {
                    CliError::Config(format!(
                        "[{}] {key}: expected a number, got {v:?}",
                        self.name
                    ))
                })
            })
            .transpose()
    }

    fn take_u32(&mut self, key: &str) -> Result<Option<u32>, CliError> {
        self.take(key)
            .map(|v| {
                v.parse::<u32>().map_err(|_| {
                    CliError::Config(format!(
                        "[{}] {key}: expected a nonnegative integer, got {v:?}",
                        self.name
                    ))
                })
            })
            .transpose()
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>, CliError> {
        self.take(key)
            .map(|v| {
                v.parse::<usize>().map_err(|_| {
                    CliError::Config(format!(
                        "[{}] {key}: expected a nonnegative integer, got {v:?}",
                        self.name
                    ))
                })
            })
            .transpose()
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>, CliError> {
        self.take(key)
            .map(|v| match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(CliError::Config(format!(
                    "[{}] {key}: expected true or false, got {v:?}",
                    self.name
                ))),
            })
            .transpose()
    }

    fn take_list_f64(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(v) = self.take(key) else {
            return Ok(None);
        };
        let mut out = Vec::new();
        for part in v.split(',') {
            let part = part.trim();
            out.push(part.parse::<f64>().map_err(|_| {
                CliError::Config(format!(
                    "[{}] {key}: expected comma-separated numbers, got {part:?}",
                    self.name
                ))
            })?);
        }
        Ok(Some(out))
    }

    fn finish(self) -> Result<(), CliError> {
        if self.entries.is_empty() {
            Ok(())
        } else {
            let keys: Vec<&str> = self.entries.keys().map(String::as_str).collect();
            Err(CliError::Config(format!(
                "unknown key(s) in [{}]: {}",
                self.name,
                keys.join(", ")
            )))
        }
    }
}

/// Consuming view over the whole document.
pub struct DocReader {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl DocReader {
    pub fn new(doc: ConfigDocument) -> Self {
        Self {
            sections: doc.sections,
        }
    }

    fn section(&mut self, name: &str) -> Option<SectionReader> {
        self.sections.remove(name).map(|entries| SectionReader {
            name: name.to_string(),
            entries,
        })
    }

    fn require(&mut self, name: &str) -> Result<SectionReader, CliError> {
        self.section(name)
            .ok_or_else(|| CliError::Config(format!("missing required section [{name}]")))
    }

    fn finish(self) -> Result<(), CliError> {
        if let Some((name, entries)) = self.sections.into_iter().next() {
            if name.is_empty() {
                let keys: Vec<&str> = entries.keys().map(String::as_str).collect();
                return Err(CliError::Config(format!(
                    "keys outside any section: {}",
                    keys.join(", ")
                )));
            }
            return Err(CliError::Config(format!("unknown section [{name}]")));
        }
        Ok(())
    }
}

fn resolve_sweep(reader: &mut DocReader) -> Result<SweepConfig, CliError> {
    let mut s = reader.require("sweep")?;
    let rabi = s.take_f64("rabi")?.unwrap_or(1.0);
    let rate = s
        .take_f64("rate")?
        .ok_or_else(|| CliError::Config("[sweep] rate is required".to_string()))?;
    let delta_start = s
        .take_f64("delta_start")?
        .ok_or_else(|| CliError::Config("[sweep] delta_start is required".to_string()))?;
    let delta_end = s
        .take_f64("delta_end")?
        .ok_or_else(|| CliError::Config("[sweep] delta_end is required".to_string()))?;
    s.finish()?;
    Ok(SweepConfig::new(rabi, rate, delta_start, delta_end)?)
}

fn resolve_noise(reader: &mut DocReader, required: bool) -> Result<NoiseConfig, CliError> {
    let Some(mut s) = reader.section("noise") else {
        if required {
            return Err(CliError::Config("missing required section [noise]".to_string()));
        }
        return Ok(NoiseConfig::off());
    };
    let amplitude = s.take_f64("amplitude")?.unwrap_or(0.0);
    let frequency = s.take_f64("frequency")?.unwrap_or(0.0);
    let phase = s.take_f64("phase")?.unwrap_or(0.0);
    s.finish()?;
    Ok(NoiseConfig::new(amplitude, frequency, phase)?)
}

fn parse_method(v: &str) -> Result<Method, CliError> {
    match v {
        "fixed_rk4" => Ok(Method::FixedRk4),
        "adaptive_rk45" => Ok(Method::AdaptiveRk45),
        _ => Err(CliError::Config(format!(
            "[integrator] method: expected fixed_rk4 or adaptive_rk45, got {v:?}"
        ))),
    }
}

fn resolve_integrator(reader: &mut DocReader) -> Result<IntegratorSettings, CliError> {
    let mut settings = IntegratorSettings::default();
    if let Some(mut s) = reader.section("integrator") {
        if let Some(m) = s.take("method") {
            settings.method = parse_method(&m)?;
        }
        if let Some(v) = s.take_f64("rel_tol")? {
            settings.rel_tol = v;
        }
        if let Some(v) = s.take_f64("abs_tol")? {
            settings.abs_tol = v;
        }
        if let Some(v) = s.take_u32("steps_per_fastest_period")? {
            settings.steps_per_fastest_period = v;
        }
        if let Some(v) = s.take_u32("record_stride")? {
            settings.record_stride = v;
        }
        s.finish()?;
    }
    settings.validate()?;
    Ok(settings)
}

fn resolve_phases(reader: &mut DocReader) -> Result<PhaseAverageSpec, CliError> {
    let mut phases = PhaseAverageSpec::default();
    if let Some(mut s) = reader.section("phases") {
        if let Some(n) = s.take_u32("n_phases")? {
            phases.n_phases = n;
        }
        s.finish()?;
    }
    phases.validate()?;
    Ok(phases)
}

fn parse_engine(v: &str) -> Result<Engine, CliError> {
    match v {
        "full" => Ok(Engine::FullSimulation),
        "multijump" => Ok(Engine::Multijump),
        _ => Err(CliError::Config(format!(
            "engine: expected full or multijump, got {v:?}"
        ))),
    }
}

fn parse_axis_name(v: &str) -> Result<AxisName, CliError> {
    match v {
        "noise_frequency" => Ok(AxisName::NoiseFrequency),
        "noise_amplitude" => Ok(AxisName::NoiseAmplitude),
        "sweep_rate" => Ok(AxisName::SweepRate),
        _ => Err(CliError::Config(format!(
            "axis: expected noise_frequency, noise_amplitude or sweep_rate, got {v:?}"
        ))),
    }
}

fn take_axis(s: &mut SectionReader, which: &str) -> Result<Option<ScanAxis>, CliError> {
    let name = s.take(&format!("{which}"));
    let start = s.take_f64(&format!("{which}_start"))?;
    let stop = s.take_f64(&format!("{which}_stop"))?;
    let points = s.take_usize(&format!("{which}_points"))?;
    match (name, start, stop, points) {
        (None, None, None, None) => Ok(None),
        (Some(name), Some(start), Some(stop), Some(n_points)) => {
            let axis = ScanAxis {
                name: parse_axis_name(&name)?,
                start,
                stop,
                n_points,
            };
            axis.validate()?;
            Ok(Some(axis))
        }
        _ => Err(CliError::Config(format!(
            "{which} needs all of {which}, {which}_start, {which}_stop, {which}_points"
        ))),
    }
}

/// Fully-resolved `sweep` command inputs.
pub struct SweepCommand {
    pub sweep: SweepConfig,
    pub noise: NoiseConfig,
    pub integrator: IntegratorSettings,
}

pub fn resolve_sweep_command(doc: ConfigDocument) -> Result<SweepCommand, CliError> {
    let mut reader = DocReader::new(doc);
    let sweep = resolve_sweep(&mut reader)?;
    let noise = resolve_noise(&mut reader, false)?;
    let mut integrator = resolve_integrator(&mut reader)?;
    if integrator.record_stride == 0 {
        // a sweep exists to show its trajectory
        integrator.record_stride = 1;
    }
    reader.finish()?;
    Ok(SweepCommand {
        sweep,
        noise,
        integrator,
    })
}

/// Fully-resolved `scan` command inputs.
pub struct ScanCommand {
    pub spec: ScanSpec,
    pub overlay: bool,
}

pub fn resolve_scan_command(
    doc: ConfigDocument,
    engine_override: Option<Engine>,
) -> Result<ScanCommand, CliError> {
    let mut reader = DocReader::new(doc);
    let sweep = resolve_sweep(&mut reader)?;
    let noise = resolve_noise(&mut reader, true)?;
    let integrator = resolve_integrator(&mut reader)?;
    let phases = resolve_phases(&mut reader)?;
    let mut s = reader.require("scan")?;
    let mut engine = Engine::FullSimulation;
    if let Some(v) = s.take("engine") {
        engine = parse_engine(&v)?;
    }
    if let Some(forced) = engine_override {
        engine = forced;
    }
    let axis1 = take_axis(&mut s, "axis1")?
        .ok_or_else(|| CliError::Config("[scan] axis1 is required".to_string()))?;
    let axis2 = take_axis(&mut s, "axis2")?;
    let overlay = s.take_bool("overlay")?.unwrap_or(false);
    s.finish()?;
    reader.finish()?;
    let spec = ScanSpec {
        axis1,
        axis2,
        engine,
        sweep,
        noise,
        phases,
        integrator,
    };
    spec.validate()?;
    Ok(ScanCommand { spec, overlay })
}

/// Fully-resolved `tolerance` command inputs.
pub struct ToleranceCommand {
    pub sweep: SweepConfig,
    pub search: ToleranceSearch,
    pub frequencies: Vec<f64>,
    pub freq_start: f64,
    pub freq_stop: f64,
    pub freq_points: usize,
    /// More than one rate switches to boundary-slope mode.
    pub rates: Vec<f64>,
    pub branch: SlopeBranch,
}

pub fn resolve_tolerance_command(
    doc: ConfigDocument,
    engine_override: Option<Engine>,
) -> Result<ToleranceCommand, CliError> {
    let mut reader = DocReader::new(doc);
    let sweep = resolve_sweep(&mut reader)?;
    let integrator = resolve_integrator(&mut reader)?;
    let phases = resolve_phases(&mut reader)?;
    let mut s = reader.require("tolerance")?;
    let mut search = ToleranceSearch {
        phases,
        integrator,
        ..ToleranceSearch::default()
    };
    if let Some(v) = s.take("engine") {
        search.engine = parse_engine(&v)?;
    }
    if let Some(forced) = engine_override {
        search.engine = forced;
    }
    if let Some(v) = s.take_f64("threshold")? {
        search.threshold = Threshold::new(v)?;
    }
    if let Some(v) = s.take("convention") {
        search.convention = match v.as_str() {
            "first_failure" => Convention::FirstFailure,
            "last_acceptable" => Convention::LastAcceptable,
            _ => {
                return Err(CliError::Config(format!(
                    "[tolerance] convention: expected first_failure or last_acceptable, got {v:?}"
                )))
            }
        };
    }
    if let Some(v) = s.take_f64("step_fraction")? {
        search.step_fraction = v;
    }
    if let Some(v) = s.take_f64("ceiling_factor")? {
        search.ceiling_factor = v;
    }
    search.validate()?;
    let freq_start = s.take_f64("freq_start")?.unwrap_or(0.2 * sweep.rabi);
    let freq_stop = s.take_f64("freq_stop")?.unwrap_or(1.2 * sweep.delta_end);
    let freq_points = s.take_usize("freq_points")?.unwrap_or(200);
    if freq_points == 0 || !freq_start.is_finite() || !(freq_stop > freq_start) {
        return Err(CliError::Config(format!(
            "[tolerance] frequency grid must have points over a forward span, got \
             {freq_points} over ({freq_start}, {freq_stop}]"
        )));
    }
    let frequencies: Vec<f64> = (1..=freq_points)
        .map(|i| freq_start + (freq_stop - freq_start) * i as f64 / freq_points as f64)
        .collect();
    let rates = s.take_list_f64("rates")?.unwrap_or_default();
    let branch = match s.take("branch").as_deref() {
        None | Some("sum") => SlopeBranch::Sum,
        Some("difference") => SlopeBranch::Difference,
        Some(v) => {
            return Err(CliError::Config(format!(
                "[tolerance] branch: expected sum or difference, got {v:?}"
            )))
        }
    };
    s.finish()?;
    reader.finish()?;
    Ok(ToleranceCommand {
        sweep,
        search,
        frequencies,
        freq_start,
        freq_stop,
        freq_points,
        rates,
        branch,
    })
}

/// Fully-resolved `compare` command inputs: one scan spec run under both
/// engines. The [scan] section must not pick an engine here.
pub struct CompareCommand {
    pub spec: ScanSpec,
}

pub fn resolve_compare_command(doc: ConfigDocument) -> Result<CompareCommand, CliError> {
    let mut reader = DocReader::new(doc);
    let sweep = resolve_sweep(&mut reader)?;
    let noise = resolve_noise(&mut reader, true)?;
    let integrator = resolve_integrator(&mut reader)?;
    let phases = resolve_phases(&mut reader)?;
    let mut s = reader.require("scan")?;
    if s.take("engine").is_some() {
        return Err(CliError::Config(
            "[scan] engine is not a choice here: the comparison runs both engines".to_string(),
        ));
    }
    let axis1 = take_axis(&mut s, "axis1")?
        .ok_or_else(|| CliError::Config("[scan] axis1 is required".to_string()))?;
    let axis2 = take_axis(&mut s, "axis2")?;
    let overlay = s.take_bool("overlay")?.unwrap_or(false);
    let _ = overlay;
    s.finish()?;
    reader.finish()?;
    let spec = ScanSpec {
        axis1,
        axis2,
        engine: Engine::FullSimulation,
        sweep,
        noise,
        phases,
        integrator,
    };
    spec.validate()?;
    Ok(CompareCommand { spec })
}

fn push_sweep(out: &mut String, sweep: &SweepConfig) {
    out.push_str("[sweep]\n");
    out.push_str(&format!("rabi = {}\n", sweep.rabi));
    out.push_str(&format!("rate = {}\n", sweep.rate));
    out.push_str(&format!("delta_start = {}\n", sweep.delta_start));
    out.push_str(&format!("delta_end = {}\n", sweep.delta_end));
}

fn push_noise(out: &mut String, noise: &NoiseConfig) {
    out.push_str("\n[noise]\n");
    out.push_str(&format!("amplitude = {}\n", noise.amplitude));
    out.push_str(&format!("frequency = {}\n", noise.frequency));
    out.push_str(&format!("phase = {}\n", noise.phase));
}

fn push_integrator(out: &mut String, settings: &IntegratorSettings) {
    out.push_str("\n[integrator]\n");
    out.push_str(&format!("method = {}\n", settings.method.as_str()));
    out.push_str(&format!("rel_tol = {}\n", settings.rel_tol));
    out.push_str(&format!("abs_tol = {}\n", settings.abs_tol));
    out.push_str(&format!(
        "steps_per_fastest_period = {}\n",
        settings.steps_per_fastest_period
    ));
    out.push_str(&format!("record_stride = {}\n", settings.record_stride));
}

fn push_phases(out: &mut String, phases: &PhaseAverageSpec) {
    out.push_str("\n[phases]\n");
    out.push_str(&format!("n_phases = {}\n", phases.n_phases));
}

fn push_axis(out: &mut String, which: &str, axis: &ScanAxis) {
    out.push_str(&format!("{which} = {}\n", axis.name.as_str()));
    out.push_str(&format!("{which}_start = {}\n", axis.start));
    out.push_str(&format!("{which}_stop = {}\n", axis.stop));
    out.push_str(&format!("{which}_points = {}\n", axis.n_points));
}

/// The config as it was actually run, defaults filled in. Parsing this text
/// again resolves to the same settings.
pub fn echo_sweep(cmd: &SweepCommand) -> String {
    let mut out = String::new();
    push_sweep(&mut out, &cmd.sweep);
    push_noise(&mut out, &cmd.noise);
    push_integrator(&mut out, &cmd.integrator);
    out
}

pub fn echo_scan(cmd: &ScanCommand) -> String {
    let mut out = String::new();
    push_sweep(&mut out, &cmd.spec.sweep);
    push_noise(&mut out, &cmd.spec.noise);
    push_integrator(&mut out, &cmd.spec.integrator);
    push_phases(&mut out, &cmd.spec.phases);
    out.push_str("\n[scan]\n");
    out.push_str(&format!("engine = {}\n", cmd.spec.engine.as_str()));
    push_axis(&mut out, "axis1", &cmd.spec.axis1);
    if let Some(axis2) = &cmd.spec.axis2 {
        push_axis(&mut out, "axis2", axis2);
    }
    out.push_str(&format!("overlay = {}\n", cmd.overlay));
    out
}

pub fn echo_tolerance(cmd: &ToleranceCommand) -> String {
    let mut out = String::new();
    push_sweep(&mut out, &cmd.sweep);
    push_integrator(&mut out, &cmd.search.integrator);
    push_phases(&mut out, &cmd.search.phases);
    out.push_str("\n[tolerance]\n");
    out.push_str(&format!("engine = {}\n", cmd.search.engine.as_str()));
    out.push_str(&format!("threshold = {}\n", cmd.search.threshold.get()));
    out.push_str(&format!("convention = {}\n", cmd.search.convention.as_str()));
    out.push_str(&format!("step_fraction = {}\n", cmd.search.step_fraction));
    out.push_str(&format!("ceiling_factor = {}\n", cmd.search.ceiling_factor));
    out.push_str(&format!("freq_start = {}\n", cmd.freq_start));
    out.push_str(&format!("freq_stop = {}\n", cmd.freq_stop));
    out.push_str(&format!("freq_points = {}\n", cmd.freq_points));
    if !cmd.rates.is_empty() {
        let rates: Vec<String> = cmd.rates.iter().map(|r| format!("{r}")).collect();
        out.push_str(&format!("rates = {}\n", rates.join(", ")));
    }
    let branch = match cmd.branch {
        SlopeBranch::Sum => "sum",
        SlopeBranch::Difference => "difference",
    };
    out.push_str(&format!("branch = {branch}\n"));
    out
}

pub fn echo_compare(cmd: &CompareCommand) -> String {
    let mut out = String::new();
    push_sweep(&mut out, &cmd.spec.sweep);
    push_noise(&mut out, &cmd.spec.noise);
    push_integrator(&mut out, &cmd.spec.integrator);
    push_phases(&mut out, &cmd.spec.phases);
    out.push_str("\n[scan]\n");
    push_axis(&mut out, "axis1", &cmd.spec.axis1);
    if let Some(axis2) = &cmd.spec.axis2 {
        push_axis(&mut out, "axis2", axis2);
    }
    out
}
