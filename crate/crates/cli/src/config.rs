use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use hedgeplay::{GameSpec, LossMatrix};

/// Matrix used when none is given.
pub const DEFAULT_MATRIX: &str = "1,0;-1,3";
pub const DEFAULT_HORIZON: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixSource {
    Inline(String),
    File(PathBuf),
}

impl MatrixSource {
    pub fn load(&self) -> Result<LossMatrix> {
        let text = match self {
            MatrixSource::Inline(text) => text.clone(),
            MatrixSource::File(path) => read_matrix_file(path)?,
        };
        Ok(text.parse::<LossMatrix>()?)
    }
}

/// Accepts the inline syntax or one row per line.
fn read_matrix_file(path: &Path) -> Result<String> {
    let raw = fs::read_to_string(path).with_context(|| format!("reading matrix file {}", path.display()))?;
    let rows: Vec<&str> = raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    Ok(rows.join(";"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum CommandConfig {
    Simulate { policy: String },
    Solve { method: String },
    Analyze,
    Verify {
        depth: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mutate: Option<String>,
        count: usize,
    },
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Simulate { .. } => "simulate",
            CommandConfig::Solve { .. } => "solve",
            CommandConfig::Analyze => "analyze",
            CommandConfig::Verify { .. } => "verify",
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: CommandConfig,
    /// `None` lets `verify` sample its own games.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSource>,
    /// `"auto"` or a positive decimal.
    pub eta: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    pub fn eta(&self) -> Result<Option<f64>> {
        if self.eta == "auto" {
            return Ok(None);
        }
        let v: f64 = self
            .eta
            .parse()
            .with_context(|| format!("invalid learning rate `{}`", self.eta))?;
        Ok(Some(v))
    }

    pub fn matrix_source(&self) -> MatrixSource {
        self.matrix
            .clone()
            .unwrap_or_else(|| MatrixSource::Inline(DEFAULT_MATRIX.into()))
    }

    pub fn spec(&self) -> Result<GameSpec> {
        let matrix = self.matrix_source().load()?;
        Ok(GameSpec::validate(matrix, self.eta()?, self.horizon)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
