//! Sweep configuration files.
//!
//! A config is TOML. Every key is optional; an empty file is a one-point sweep
//! at the default settings.
//!
//! ```toml
//! seed = 0
//! seeds = 10
//! k = 16
//! epsilon = 1.0
//! users = 10000
//! distributions = 100
//! mechanisms = ["KRR", "OLH"]
//! coded = "both"
//!
//! [channel]
//! slot_duration = 1.0
//! molecules = 100
//!
//! [sweep]
//! axis = "t_s"
//! start = 0.1
//! stop = 1.0
//! step = 0.1
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use mcldp_core::channel::ChannelParams;
use mcldp_core::harness::{ExperimentConfig, Pipeline};
use mcldp_core::ldp::MechanismKind;
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    Invalid {
        field: String,
        reason: String,
    },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse {
                line,
                column,
                message,
            } => {
                write!(f, "config line {line}, column {column}: {message}")
            }
            ConfigError::Invalid { field, reason } => write!(f, "invalid `{field}`: {reason}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_owned(),
        reason: reason.into(),
    }
}

fn from_core(err: mcldp_core::Error) -> ConfigError {
    use mcldp_core::Error as E;
    let field = match &err {
        E::InvalidChannel { field, .. }
        | E::InvalidMechanism { field, .. }
        | E::InvalidExperiment { field, .. } => *field,
        E::CodebookTooLarge { .. } => "coded",
        _ => "config",
    };
    invalid(field, err.to_string())
}

/// Parameter varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "epsilon")]
    Epsilon,
    #[serde(rename = "k")]
    K,
    #[serde(rename = "t_s")]
    SlotDuration,
    #[serde(rename = "M")]
    Molecules,
    #[serde(rename = "r0")]
    Distance,
    #[serde(rename = "sigma2")]
    NoiseVariance,
    #[serde(rename = "N")]
    Users,
}

impl Axis {
    pub const ALL: [Axis; 7] = [
        Axis::Epsilon,
        Axis::K,
        Axis::SlotDuration,
        Axis::Molecules,
        Axis::Distance,
        Axis::NoiseVariance,
        Axis::Users,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Epsilon => "epsilon",
            Axis::K => "k",
            Axis::SlotDuration => "t_s",
            Axis::Molecules => "M",
            Axis::Distance => "r0",
            Axis::NoiseVariance => "sigma2",
            Axis::Users => "N",
        }
    }

    fn current(self, cfg: &ExperimentConfig) -> f64 {
        match self {
            Axis::Epsilon => cfg.epsilon,
            Axis::K => f64::from(cfg.k),
            Axis::SlotDuration => cfg.channel.slot_duration,
            Axis::Molecules => cfg.channel.molecules as f64,
            Axis::Distance => cfg.channel.distance,
            Axis::NoiseVariance => cfg.channel.noise_variance,
            Axis::Users => cfg.users as f64,
        }
    }

    fn apply(self, cfg: &mut ExperimentConfig, value: f64) -> Result<(), ConfigError> {
        let whole = |min: f64, max: f64| {
            if value.fract() == 0.0 && value >= min && value <= max {
                Ok(value)
            } else {
                Err(invalid(
                    "sweep.values",
                    format!(
                        "axis {} needs whole numbers in [{min}, {max}], got {value}",
                        self.name()
                    ),
                ))
            }
        };
        match self {
            Axis::Epsilon => cfg.epsilon = value,
            Axis::K => cfg.k = whole(2.0, f64::from(u32::MAX))? as u32,
            Axis::SlotDuration => cfg.channel.slot_duration = value,
            Axis::Molecules => cfg.channel.molecules = whole(1.0, 2f64.powi(53))? as u64,
            Axis::Distance => cfg.channel.distance = value,
            Axis::NoiseVariance => cfg.channel.noise_variance = value,
            Axis::Users => cfg.users = whole(1.0, 2f64.powi(40))? as usize,
        }
        Ok(())
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| invalid("sweep.axis", format!("unknown axis `{s}`")))
    }
}

/// Which transmission pipelines a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Coded {
    Uncoded,
    Rlim,
    Both,
}

impl Coded {
    pub fn pipelines(self) -> &'static [Pipeline] {
        match self {
            Coded::Uncoded => &[Pipeline::Uncoded],
            Coded::Rlim => &[Pipeline::Rlim],
            Coded::Both => &[Pipeline::Uncoded, Pipeline::Rlim],
        }
    }
}

/// Problem sizes for quick runs and for full reproductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    /// N = 2000, R = 20, 10 seeds.
    Desk,
    /// N = 10⁴, R = 100.
    Paper,
}

/// A validated sweep: one experiment template, one axis and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    /// Settings shared by every point; the axis value overrides one field.
    pub template: ExperimentConfig,
    pub coded: Coded,
    /// Seeds `seed, seed + 1, …` are run at every point.
    pub seeds: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        let template = ExperimentConfig::default();
        Self {
            axis: Axis::Epsilon,
            values: vec![template.epsilon],
            template,
            coded: Coded::Both,
            seeds: 1,
        }
    }
}

impl SweepSpec {
    /// The experiment at one axis value.
    pub fn point(&self, value: f64) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = self.template.clone();
        self.axis.apply(&mut cfg, value)?;
        Ok(cfg)
    }

    pub fn seed_list(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.seeds).map(|i| self.template.seed.wrapping_add(i))
    }

    pub fn apply_scale(&mut self, scale: Scale) {
        match scale {
            Scale::Desk => {
                self.template.users = 2000;
                self.template.distributions = 20;
                self.seeds = 10;
            }
            Scale::Paper => {
                self.template.users = 10_000;
                self.template.distributions = 100;
            }
        }
        self.template.pilot_users = self.template.pilot_users.min(self.template.users);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.values.is_empty() {
            return Err(invalid("sweep.values", "must not be empty"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sweep.values", "must be finite"));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("sweep.values", "must be strictly increasing"));
        }
        if self.seeds == 0 {
            return Err(invalid("seeds", "at least one seed is required"));
        }
        for &v in &self.values {
            let cfg = self.point(v)?;
            cfg.validate().map_err(from_core)?;
            if self.coded != Coded::Uncoded && (cfg.pilot_users == 0 || cfg.pilot_users > cfg.users)
            {
                return Err(invalid("pilot_users", "must lie in [1, users]"));
            }
        }
        Ok(())
    }

    /// Canonical TOML for this spec, with every field spelled out.
    pub fn to_toml(&self) -> String {
        let t = &self.template;
        let c = &t.channel;
        let raw = RawConfig {
            seed: Some(t.seed),
            seeds: Some(self.seeds),
            k: Some(t.k),
            epsilon: Some(t.epsilon),
            users: Some(t.users),
            distributions: Some(t.distributions),
            pilot_users: Some(t.pilot_users),
            boundary_safe: Some(t.boundary_safe),
            mechanisms: Some(t.mechanisms.iter().map(|m| m.name().to_owned()).collect()),
            coded: Some(self.coded),
            channel: Some(RawChannel {
                diffusion: Some(c.diffusion),
                receiver_radius: Some(c.receiver_radius),
                distance: Some(c.distance),
                slot_duration: Some(c.slot_duration),
                molecules: Some(c.molecules),
                memory: Some(c.memory),
                noise_variance: Some(c.noise_variance),
            }),
            sweep: Some(RawSweep {
                axis: self.axis,
                values: Some(self.values.clone()),
                start: None,
                stop: None,
                step: None,
            }),
        };
        toml::to_string(&raw).expect("config fields are all representable in TOML")
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seeds: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    users: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distributions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pilot_users: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary_safe: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mechanisms: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coded: Option<Coded>,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<RawChannel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    #[serde(skip_serializing_if = "Option::is_none")]
    diffusion: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    receiver_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slot_duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    molecules: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    memory: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_variance: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Axis,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
}

/// `start, start + step, …` up to `stop` inclusive, rounded to 12 decimals so
/// that `0.1 + 2·0.1` reads back as `0.3`.
fn range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, ConfigError> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
        return Err(invalid(
            "sweep.step",
            "start, stop and a positive step must be finite",
        ));
    }
    if stop < start {
        return Err(invalid("sweep.stop", "must not be below start"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(invalid("sweep.step", "range has more than 100000 points"));
    }
    Ok((0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Parses and validates a config document.
pub fn parse_str(text: &str) -> Result<SweepSpec, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_owned(),
        }
    })?;

    let mut spec = SweepSpec::default();
    let t = &mut spec.template;
    if let Some(v) = raw.seed {
        t.seed = v;
    }
    if let Some(v) = raw.seeds {
        spec.seeds = v;
    }
    if let Some(v) = raw.k {
        t.k = v;
    }
    if let Some(v) = raw.epsilon {
        t.epsilon = v;
    }
    if let Some(v) = raw.users {
        t.users = v;
    }
    if let Some(v) = raw.distributions {
        t.distributions = v;
    }
    if let Some(v) = raw.pilot_users {
        t.pilot_users = v;
    }
    if let Some(v) = raw.boundary_safe {
        t.boundary_safe = v;
    }
    if let Some(names) = raw.mechanisms {
        t.mechanisms = parse_mechanisms(names.iter().map(String::as_str))?;
    }
    if let Some(v) = raw.coded {
        spec.coded = v;
    }
    if let Some(ch) = raw.channel {
        let c: &mut ChannelParams = &mut t.channel;
        if let Some(v) = ch.diffusion {
            c.diffusion = v;
        }
        if let Some(v) = ch.receiver_radius {
            c.receiver_radius = v;
        }
        if let Some(v) = ch.distance {
            c.distance = v;
        }
        if let Some(v) = ch.slot_duration {
            c.slot_duration = v;
        }
        if let Some(v) = ch.molecules {
            c.molecules = v;
        }
        if let Some(v) = ch.memory {
            c.memory = v;
        }
        if let Some(v) = ch.noise_variance {
            c.noise_variance = v;
        }
    }
    match raw.sweep {
        None => {
            spec.values = vec![spec.axis.current(&spec.template)];
        }
        Some(sw) => {
            spec.axis = sw.axis;
            spec.values = match (sw.values, sw.start, sw.stop, sw.step) {
                (Some(v), None, None, None) => v,
                (None, Some(a), Some(b), Some(s)) => range(a, b, s)?,
                (None, None, None, None) => vec![spec.axis.current(&spec.template)],
                _ => {
                    return Err(invalid(
                        "sweep.values",
                        "give either `values` or all of `start`, `stop`, `step`",
                    ))
                }
            };
        }
    }
    spec.validate()?;
    Ok(spec)
}

pub fn parse_config(path: &Path) -> Result<SweepSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
    parse_str(&text)
}

/// Mechanism names, case-insensitive, without duplicates.
pub fn parse_mechanisms<'a>(
    names: impl IntoIterator<Item = &'a str>,
) -> Result<Vec<MechanismKind>, ConfigError> {
    let mut out = Vec::new();
    for name in names {
        let kind: MechanismKind = name
            .parse()
            .map_err(|_| invalid("mechanisms", format!("unknown mechanism `{name}`")))?;
        if out.contains(&kind) {
            return Err(invalid("mechanisms", format!("`{name}` listed twice")));
        }
        out.push(kind);
    }
    if out.is_empty() {
        return Err(invalid("mechanisms", "at least one mechanism is required"));
    }
    Ok(out)
}
