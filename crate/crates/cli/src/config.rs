//! Run configuration.
//!
//! A [`RunConfig`] is assembled from an optional `key = value` file and then
//! from command-line flags, which go through the same [`RunConfig::set`] path
//! and so override file values. [`RunConfig::to_config_string`] writes a file
//! that reads back to an identical value.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use collider_lab::sweep::{
    fig2_base, fig3_base, preset_fig2, preset_fig3, FIGURE_RANGE, FIGURE_STEPS,
};
use collider_lab::{Coefficient, InterceptMode, Scales, ScmParams, SweepSpec};

use crate::error::{CliError, CliResult};
use crate::table::format_f64;

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_TOLERANCE: f64 = 4.0;
pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "COLLIDER_LAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Compute,
    Sweep,
    McCheck,
    Plot,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Compute => "compute",
            Command::Sweep => "sweep",
            Command::McCheck => "mc-check",
            Command::Plot => "plot",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match norm(s).as_str() {
            "compute" => Ok(Command::Compute),
            "sweep" => Ok(Command::Sweep),
            "mc_check" => Ok(Command::McCheck),
            "plot" => Ok(Command::Plot),
            _ => Err(CliError::usage(format!("unknown command `{s}`"))),
        }
    }
}

/// Named parameter settings from the two published figure families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Independent mediator and outcome (`beta_M = 0`).
    Fig2Top,
    /// As above with `beta_M = 1`.
    Fig2Bottom,
    /// The eight-coefficient base used for the interaction panels.
    Fig3,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2Top => "fig2-top",
            Preset::Fig2Bottom => "fig2-bottom",
            Preset::Fig3 => "fig3",
        }
    }

    pub fn base(self) -> ScmParams {
        match self {
            Preset::Fig2Top => fig2_base(0.0),
            Preset::Fig2Bottom => fig2_base(1.0),
            Preset::Fig3 => fig3_base(),
        }
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match norm(s).as_str() {
            "fig2_top" => Ok(Preset::Fig2Top),
            "fig2_bottom" => Ok(Preset::Fig2Bottom),
            "fig3" | "fig3_base" => Ok(Preset::Fig3),
            _ => Err(CliError::usage(format!(
                "unknown preset `{s}` (expected fig2-top, fig2-bottom or fig3)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Csv => "csv",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match norm(s).as_str() {
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            _ => Err(CliError::usage(format!(
                "unknown format `{s}` (expected text or csv)"
            ))),
        }
    }
}

/// Which scale(s) the chart shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleChoice {
    #[default]
    OddsRatio,
    Additive,
    Both,
}

impl ScaleChoice {
    pub fn name(self) -> &'static str {
        match self {
            ScaleChoice::OddsRatio => "or",
            ScaleChoice::Additive => "additive",
            ScaleChoice::Both => "both",
        }
    }

    pub fn scales(self) -> Scales {
        Scales {
            additive: self != ScaleChoice::OddsRatio,
            odds_ratio: self != ScaleChoice::Additive,
        }
    }
}

impl FromStr for ScaleChoice {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match norm(s).as_str() {
            "or" | "odds_ratio" => Ok(ScaleChoice::OddsRatio),
            "additive" => Ok(ScaleChoice::Additive),
            "both" => Ok(ScaleChoice::Both),
            _ => Err(CliError::usage(format!(
                "unknown scale `{s}` (expected or, additive or both)"
            ))),
        }
    }
}

/// A numeric model setting that can be overridden.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ParamKey {
    PA,
    PU,
    Nu,
    Alpha0,
    Beta0,
    Coef(Coefficient),
}

impl ParamKey {
    pub fn all() -> impl Iterator<Item = ParamKey> {
        [
            ParamKey::PA,
            ParamKey::PU,
            ParamKey::Nu,
            ParamKey::Alpha0,
            ParamKey::Beta0,
        ]
        .into_iter()
        .chain(Coefficient::ALL.into_iter().map(ParamKey::Coef))
    }

    /// Config-file key (`p_a`, `alpha_au`, ...).
    pub fn key(self) -> String {
        match self {
            ParamKey::PA => "p_a".into(),
            ParamKey::PU => "p_u".into(),
            ParamKey::Nu => "nu".into(),
            ParamKey::Alpha0 => "alpha_0".into(),
            ParamKey::Beta0 => "beta_0".into(),
            ParamKey::Coef(c) => c.name().to_ascii_lowercase(),
        }
    }

    fn parse(key: &str) -> Option<ParamKey> {
        let key = norm(key);
        ParamKey::all().find(|p| p.key() == key)
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<Preset>,
    pub params: BTreeMap<ParamKey, f64>,
    pub vary: Option<Coefficient>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
    pub scale: ScaleChoice,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub n: u64,
    pub seed: Option<u64>,
    pub tolerance: f64,
}

fn norm(s: &str) -> String {
    s.trim().to_ascii_lowercase().replace('-', "_")
}

fn parse_f64(key: &str, value: &str) -> CliResult<f64> {
    let x: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("{key}: `{value}` is not a number")))?;
    if !x.is_finite() {
        return Err(CliError::usage(format!("{key}: `{value}` is not finite")));
    }
    Ok(x)
}

fn parse_int<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("{key}: `{value}` is not a non-negative integer")))
}

/// Strips a comment: `#` at the start of a line or after whitespace.
fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if b == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()) {
            return &line[..i];
        }
    }
    line
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            preset: None,
            params: BTreeMap::new(),
            vary: None,
            from: None,
            to: None,
            steps: None,
            scale: ScaleChoice::default(),
            format: Format::default(),
            out: None,
            svg: None,
            input: None,
            n: DEFAULT_SAMPLES,
            seed: None,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// Sets one field from its textual key and value. Keys are
    /// case-insensitive and accept `-` for `_`.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let k = norm(key);
        let v = value.trim();
        if let Some(p) = ParamKey::parse(&k) {
            self.params.insert(p, parse_f64(&k, v)?);
            return Ok(());
        }
        match k.as_str() {
            "command" => self.command = v.parse()?,
            "preset" => self.preset = Some(v.parse()?),
            "vary" => {
                self.vary = Some(v.parse().map_err(|_| {
                    CliError::usage(format!("vary: `{v}` is not a model coefficient"))
                })?)
            }
            "from" => self.from = Some(parse_f64(&k, v)?),
            "to" => self.to = Some(parse_f64(&k, v)?),
            "steps" => self.steps = Some(parse_int(&k, v)?),
            "scale" => self.scale = v.parse()?,
            "format" => self.format = v.parse()?,
            "out" => self.out = Some(PathBuf::from(v)),
            "svg" => self.svg = Some(PathBuf::from(v)),
            "input" => self.input = Some(PathBuf::from(v)),
            "n" => self.n = parse_int(&k, v)?,
            "seed" => self.seed = Some(parse_int(&k, v)?),
            "tolerance" => {
                let t = parse_f64(&k, v)?;
                if t <= 0.0 {
                    return Err(CliError::usage(format!(
                        "tolerance must be positive, got {t}"
                    )));
                }
                self.tolerance = t;
            }
            _ => {
                return Err(CliError::usage(format!(
                    "unknown configuration key `{key}`"
                )))
            }
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file in order.
    pub fn apply_file(&mut self, text: &str) -> CliResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!("config line {}: expected `key = value`", i + 1))
            })?;
            self.set(key, value)
                .map_err(|e| CliError::usage(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Parses a complete config file. A missing `command` key means `compute`.
    pub fn from_config_str(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::new(Command::Compute);
        cfg.apply_file(text)?;
        Ok(cfg)
    }

    pub fn to_config_string(&self) -> String {
        let mut lines = vec![format!("command = {}", self.command.name())];
        if let Some(p) = self.preset {
            lines.push(format!("preset = {}", p.name()));
        }
        for (k, v) in &self.params {
            lines.push(format!("{k} = {}", format_f64(*v)));
        }
        if let Some(c) = self.vary {
            lines.push(format!("vary = {c}"));
        }
        if let Some(x) = self.from {
            lines.push(format!("from = {}", format_f64(x)));
        }
        if let Some(x) = self.to {
            lines.push(format!("to = {}", format_f64(x)));
        }
        if let Some(s) = self.steps {
            lines.push(format!("steps = {s}"));
        }
        lines.push(format!("scale = {}", self.scale.name()));
        lines.push(format!("format = {}", self.format.name()));
        for (key, path) in [
            ("out", &self.out),
            ("svg", &self.svg),
            ("input", &self.input),
        ] {
            if let Some(p) = path {
                lines.push(format!("{key} = {}", p.display()));
            }
        }
        lines.push(format!("n = {}", self.n));
        if let Some(s) = self.seed {
            lines.push(format!("seed = {s}"));
        }
        lines.push(format!("tolerance = {}", format_f64(self.tolerance)));
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }

    /// Seed from the config, else from the environment, else the default.
    pub fn resolve_seed(&self) -> CliResult<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => parse_int(SEED_ENV, &v),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    /// Model parameters: the preset base (or all-default) with overrides applied.
    pub fn model_params(&self) -> CliResult<ScmParams> {
        let mut p = self.preset.map(Preset::base).unwrap_or_default();
        for (&k, &v) in &self.params {
            match k {
                ParamKey::PA => p.p_a = v,
                ParamKey::PU => p.p_u = v,
                ParamKey::Nu => p.nu = v,
                ParamKey::Alpha0 | ParamKey::Beta0 => {}
                ParamKey::Coef(c) => p.set(c, v),
            }
        }
        match (
            self.params.get(&ParamKey::Alpha0),
            self.params.get(&ParamKey::Beta0),
        ) {
            (Some(&alpha_0), Some(&beta_0)) => {
                p.intercepts = InterceptMode::Explicit { alpha_0, beta_0 }
            }
            (None, None) => {}
            _ => return Err(CliError::usage("alpha_0 and beta_0 must be given together")),
        }
        p.validate()?;
        Ok(p)
    }

    pub fn sweep_spec(&self) -> CliResult<SweepSpec> {
        let vary = self
            .vary
            .ok_or_else(|| CliError::usage("sweep needs a coefficient to vary (--vary)"))?;
        let mut spec = match self.preset {
            Some(Preset::Fig2Top) => preset_fig2(0.0, vary)?,
            Some(Preset::Fig2Bottom) => preset_fig2(1.0, vary)?,
            Some(Preset::Fig3) => preset_fig3(vary)?,
            None => SweepSpec::new(
                ScmParams::default(),
                vary,
                FIGURE_RANGE.0,
                FIGURE_RANGE.1,
                FIGURE_STEPS,
            )?,
        };
        spec.base = self.model_params()?;
        spec.from = self.from.unwrap_or(spec.from);
        spec.to = self.to.unwrap_or(spec.to);
        spec.steps = self.steps.unwrap_or(spec.steps);
        spec.scales = self.scale.scales();
        spec.validate()?;
        Ok(spec)
    }
}
