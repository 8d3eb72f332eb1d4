use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bvarcast::bvar::{Family, MinnesotaHyper, ModelSpec};
use bvarcast::evaluation::McsConfig;
use bvarcast::forecast::RollingPlan;
use chrono::NaiveDate;
use clap::ValueEnum;
use serde::Deserialize;

pub const DATA_DIR_ENV: &str = "BVARCAST_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 6000 iterations, 1000 burn-in, 567 origins.
    #[default]
    Full,
    /// 2000 iterations, 500 burn-in, 100 origins.
    Desk,
}

impl Profile {
    fn budget(self) -> (usize, usize) {
        match self {
            Profile::Full => (6000, 1000),
            Profile::Desk => (2000, 500),
        }
    }

    fn origins(self) -> usize {
        match self {
            Profile::Full => 567,
            Profile::Desk => 100,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default = "default_data_dir")]
    pub dir: PathBuf,
    pub targets: Vec<String>,
    #[serde(default)]
    pub predictors: Vec<String>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub models: Vec<String>,
    #[serde(default = "default_benchmark")]
    pub benchmark: String,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_window")]
    pub window: usize,
    pub origins: Option<usize>,
    #[serde(default = "default_lags")]
    pub lags: usize,
    pub n_iter: Option<usize>,
    pub n_burn: Option<usize>,
}

fn default_benchmark() -> String {
    "BVAR".into()
}
fn default_out() -> PathBuf {
    PathBuf::from("output")
}
fn default_window() -> usize {
    731
}
fn default_lags() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McsSection {
    #[serde(default = "default_reps")]
    pub reps: usize,
    pub block_length: Option<usize>,
}

fn default_reps() -> usize {
    5000
}

impl Default for McsSection {
    fn default() -> Self {
        Self {
            reps: default_reps(),
            block_length: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    pub run: RunSection,
    #[serde(default)]
    pub prior: MinnesotaHyper,
    #[serde(default)]
    pub mcs: McsSection,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub profile: Option<Profile>,
    pub seed: Option<u64>,
    pub models: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
        if cfg.data.dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.data.dir = parent.join(&cfg.data.dir);
            }
        }
        if cfg.run.out.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.run.out = parent.join(&cfg.run.out);
            }
        }
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = o.profile {
            self.run.profile = p;
        }
        if let Some(s) = o.seed {
            self.run.seed = s;
        }
        if let Some(m) = &o.models {
            self.run.models = m.clone();
        }
        if let Some(out) = &o.out {
            self.run.out = out.clone();
        }
        if let Some(d) = &o.data_dir {
            self.data.dir = d.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.targets.is_empty() {
            bail!("config lists no target series");
        }
        if self.run.models.is_empty() {
            bail!("config lists no models");
        }
        let specs = self.model_specs()?;
        let bench = ModelSpec::from_label(&self.run.benchmark)?.label();
        if !specs.iter().any(|s| s.label() == bench) {
            bail!("benchmark {bench} is not in the model list");
        }
        if specs.iter().any(|s| s.family == Family::Varx) && self.data.predictors.is_empty() {
            bail!("VARX models need predictor series in [data]");
        }
        Ok(())
    }

    pub fn benchmark(&self) -> Result<String> {
        Ok(ModelSpec::from_label(&self.run.benchmark)?.label())
    }

    /// Sampler settings per model, with the profile budget unless overridden.
    pub fn model_specs(&self) -> Result<Vec<ModelSpec>> {
        let (n_iter, n_burn) = self.run.profile.budget();
        let n_iter = self.run.n_iter.unwrap_or(n_iter);
        let n_burn = self.run.n_burn.unwrap_or(n_burn);
        let mut out: Vec<ModelSpec> = Vec::new();
        for label in &self.run.models {
            let mut spec = ModelSpec::from_label(label)?;
            if spec.family != Family::Ar {
                spec.lags = self.run.lags;
            }
            spec.n_iter = n_iter;
            spec.n_burn = n_burn;
            spec.prior = self.prior;
            spec.seed = self.run.seed;
            spec.validate()?;
            if out.iter().any(|s| s.label() == spec.label()) {
                bail!("model {} listed twice", spec.label());
            }
            out.push(spec);
        }
        Ok(out)
    }

    /// The last `origins` forecastable rows of a panel with `n_rows` rows.
    pub fn plan(&self, n_rows: usize) -> Result<RollingPlan> {
        let n = self.run.origins.unwrap_or_else(|| self.run.profile.origins());
        RollingPlan::last_origins(self.run.window, n, n_rows).with_context(|| {
            format!(
                "{n} origins with window {} need {} return rows, the panel has {n_rows}",
                self.run.window,
                self.run.window + n
            )
        })
    }

    pub fn mcs(&self) -> McsConfig {
        McsConfig {
            alpha: 0.10,
            reps: self.mcs.reps,
            block_length: self.mcs.block_length,
            seed: self.run.seed,
        }
    }

    pub fn returns_path(&self) -> PathBuf {
        self.run.out.join("returns.csv")
    }

    pub fn predictors_path(&self) -> PathBuf {
        self.run.out.join("predictors.csv")
    }

    pub fn draws_dir(&self) -> PathBuf {
        self.run.out.join("draws")
    }

    pub fn draw_path(&self, spec: &ModelSpec) -> PathBuf {
        self.draws_dir().join(format!("{}.draws", file_stem(&spec.label())))
    }
}

pub fn file_stem(label: &str) -> String {
    label
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || *c == '-')
        .collect::<String>()
        .to_ascii_lowercase()
}
