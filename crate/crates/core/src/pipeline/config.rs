//! Flat `key = value` configuration files.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Every
//! key is optional except `input`. Relative paths are resolved against the
//! directory holding the config file. [`PipelineConfig::to_config_text`]
//! writes every key back out, so the run log doubles as a config.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::field::{percentile_nonzero, ScalarField3D};
use crate::mcpm::{McpmParams, SimError};

/// A config problem, naming the offending key where there is one.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub key: Option<String>,
    /// 1-based line in the config text.
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, line: Option<usize>, message: impl Into<String>) -> Self {
        ConfigError {
            key: Some(key.to_string()),
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("config")?;
        if let Some(line) = self.line {
            write!(f, " line {line}")?;
        }
        if let Some(key) = &self.key {
            write!(f, ": {key}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// How the input file is turned into food points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    /// A triangle mesh whose welded vertices become food.
    Mesh,
    /// A plain-text point list.
    Points,
}

impl InputKind {
    /// `.txt`, `.xyz` and `.pts` are point lists; everything else a mesh.
    pub fn from_extension(path: &Path) -> InputKind {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("txt" | "xyz" | "pts") => InputKind::Points,
            _ => InputKind::Mesh,
        }
    }
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputKind::Mesh => "mesh",
            InputKind::Points => "points",
        })
    }
}

impl FromStr for InputKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mesh" => Ok(InputKind::Mesh),
            "points" => Ok(InputKind::Points),
            _ => Err(format!("expected mesh or points, got {s:?}")),
        }
    }
}

/// Choice of iso value for meshing and threshold for evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsoPolicy {
    /// A fixed field value.
    Absolute(f64),
    /// Nearest-rank percentile over the nonzero voxels, in `(0, 100]`.
    Percentile(f64),
}

impl Default for IsoPolicy {
    fn default() -> Self {
        IsoPolicy::Percentile(50.0)
    }
}

impl IsoPolicy {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            IsoPolicy::Absolute(v) if !(v > 0.0 && v.is_finite()) => Err(format!("iso must be positive, got {v}")),
            IsoPolicy::Percentile(p) if !(p > 0.0 && p <= 100.0) => {
                Err(format!("percentile must be in (0, 100], got {p}"))
            }
            _ => Ok(()),
        }
    }

    /// The iso value for `field`; `None` when a percentile is asked of an
    /// all-zero field.
    pub fn resolve(&self, field: &ScalarField3D) -> Option<f64> {
        match *self {
            IsoPolicy::Absolute(v) => Some(v),
            IsoPolicy::Percentile(p) => percentile_nonzero(field, p).map(f64::from),
        }
    }
}

/// `p50` for a percentile, a bare number for an absolute value.
impl fmt::Display for IsoPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsoPolicy::Absolute(v) => write!(f, "{v}"),
            IsoPolicy::Percentile(p) => write!(f, "p{p}"),
        }
    }
}

impl FromStr for IsoPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let policy = match s.strip_prefix('p') {
            Some(p) => IsoPolicy::Percentile(p.parse().map_err(|_| format!("bad percentile {s:?}"))?),
            None => IsoPolicy::Absolute(s.parse().map_err(|_| format!("expected a number or pNN, got {s:?}"))?),
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// Everything one pipeline run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub input_kind: InputKind,
    /// Offset along normals, in model units; `None` keeps the points as is.
    pub thicken_offset: Option<f64>,
    /// Mesh vertices closer than this merge into one food point; 0 disables.
    pub weld_epsilon: f64,
    /// Voxels along the longest axis.
    pub resolution: usize,
    /// Padding around the input, as a fraction of its largest extent.
    pub margin: f64,
    pub params: McpmParams,
    pub iso_policy: IsoPolicy,
    /// Steps between trace snapshots; 0 disables them.
    pub snapshot_interval: usize,
    pub output_dir: PathBuf,
}

impl PipelineConfig {
    /// Defaults for everything but the input.
    pub fn new(input: impl Into<PathBuf>) -> Self {
        let input = input.into();
        PipelineConfig {
            input_kind: InputKind::from_extension(&input),
            input,
            thicken_offset: None,
            weld_epsilon: 1e-6,
            resolution: 128,
            margin: 0.1,
            params: McpmParams::default(),
            iso_policy: IsoPolicy::default(),
            snapshot_interval: 0,
            output_dir: PathBuf::from("out"),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, super::PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| super::PipelineError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Ok(Self::parse(&text, base)?)
    }

    /// Parses and validates config text; relative paths join onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut entries: Vec<(usize, &str, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError {
                key: None,
                line: Some(i + 1),
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if let Some((first, _, _)) = entries.iter().find(|e| e.1 == key) {
                return Err(ConfigError::new(
                    key,
                    Some(i + 1),
                    format!("duplicate key, first set on line {first}"),
                ));
            }
            entries.push((i + 1, key, value));
        }

        let input = entries
            .iter()
            .find(|e| e.1 == "input")
            .ok_or_else(|| ConfigError::new("input", None, "missing required key"))?;
        let mut cfg = PipelineConfig::new(base.join(input.2));
        cfg.output_dir = base.join(&cfg.output_dir);
        let mut kind_given = false;
        for &(line, key, value) in &entries {
            let at = Some(line);
            let p = &mut cfg.params;
            match key {
                "input" => {}
                "input_kind" => {
                    cfg.input_kind = parse(key, at, value)?;
                    kind_given = true;
                }
                "thicken_offset" => cfg.thicken_offset = Some(parse(key, at, value)?),
                "weld_epsilon" => cfg.weld_epsilon = parse(key, at, value)?,
                "resolution" => cfg.resolution = parse(key, at, value)?,
                "margin" => cfg.margin = parse(key, at, value)?,
                "num_agents" => p.num_agents = parse(key, at, value)?,
                "num_steps" => p.num_steps = parse(key, at, value)?,
                "sense_distance" => p.sense_distance = parse(key, at, value)?,
                "sense_spread" => p.sense_spread = parse(key, at, value)?,
                "move_distance" => p.move_distance = parse(key, at, value)?,
                "num_samples" => p.num_samples = parse(key, at, value)?,
                "sharpness" => p.sharpness = parse(key, at, value)?,
                "agent_deposit" => p.agent_deposit = parse(key, at, value)?,
                "food_deposit" => p.food_deposit = parse(key, at, value)?,
                "deposit_decay" => p.deposit_decay = parse(key, at, value)?,
                "trace_decay" => p.trace_decay = parse(key, at, value)?,
                "boundary_policy" => p.boundary_policy = parse(key, at, value)?,
                "seed" => p.seed = parse(key, at, value)?,
                "iso_policy" => cfg.iso_policy = parse(key, at, value)?,
                "snapshot_interval" => cfg.snapshot_interval = parse(key, at, value)?,
                "output_dir" => cfg.output_dir = base.join(value),
                _ => return Err(ConfigError::new(key, at, "unknown key")),
            }
        }
        if !kind_given {
            cfg.input_kind = InputKind::from_extension(&cfg.input);
        }
        let line_of = |key: &str| entries.iter().find(|e| e.1 == key).map(|e| e.0);
        cfg.validate().map_err(|mut e| {
            e.line = e.key.as_deref().and_then(line_of);
            e
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.resolution < 8 {
            return Err(ConfigError::new(
                "resolution",
                None,
                format!("must be at least 8, got {}", self.resolution),
            ));
        }
        if !(0.0..0.5).contains(&self.margin) {
            return Err(ConfigError::new(
                "margin",
                None,
                format!("must be in [0, 0.5), got {}", self.margin),
            ));
        }
        if let Some(t) = self.thicken_offset {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError::new(
                    "thicken_offset",
                    None,
                    format!("must be positive, got {t}"),
                ));
            }
        }
        if !(self.weld_epsilon >= 0.0 && self.weld_epsilon.is_finite()) {
            return Err(ConfigError::new(
                "weld_epsilon",
                None,
                format!("must be non-negative, got {}", self.weld_epsilon),
            ));
        }
        self.iso_policy
            .validate()
            .map_err(|m| ConfigError::new("iso_policy", None, m))?;
        self.params.validate().map_err(|e| match e {
            SimError::InvalidParameter { name, message } => ConfigError::new(name, None, message),
            other => ConfigError {
                key: None,
                line: None,
                message: other.to_string(),
            },
        })
    }

    /// Every key with its resolved value, parseable by [`PipelineConfig::parse`].
    pub fn to_config_text(&self) -> String {
        let p = &self.params;
        let mut lines = vec![
            format!("input = {}", self.input.display()),
            format!("input_kind = {}", self.input_kind),
        ];
        if let Some(t) = self.thicken_offset {
            lines.push(format!("thicken_offset = {t}"));
        }
        lines.extend([
            format!("weld_epsilon = {}", self.weld_epsilon),
            format!("resolution = {}", self.resolution),
            format!("margin = {}", self.margin),
            format!("num_agents = {}", p.num_agents),
            format!("num_steps = {}", p.num_steps),
            format!("sense_distance = {}", p.sense_distance),
            format!("sense_spread = {}", p.sense_spread),
            format!("move_distance = {}", p.move_distance),
            format!("num_samples = {}", p.num_samples),
            format!("sharpness = {}", p.sharpness),
            format!("agent_deposit = {}", p.agent_deposit),
            format!("food_deposit = {}", p.food_deposit),
            format!("deposit_decay = {}", p.deposit_decay),
            format!("trace_decay = {}", p.trace_decay),
            format!("boundary_policy = {}", p.boundary_policy),
            format!("seed = {}", p.seed),
            format!("iso_policy = {}", self.iso_policy),
            format!("snapshot_interval = {}", self.snapshot_interval),
            format!("output_dir = {}", self.output_dir.display()),
        ]);
        lines.join("\n") + "\n"
    }
}

fn parse<T: FromStr>(key: &str, line: Option<usize>, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| ConfigError::new(key, line, format!("cannot parse {value:?}: {e}")))
}
