//! Run configuration. Precedence is flag, then environment, then config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use faceqa_core::batch::Limits;
use faceqa_core::endpoint::DEFAULT_CREDENTIAL_ENV;
use faceqa_core::schema::Mode;

/// Optional settings shared by several subcommands.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub strict: Option<bool>,
    pub endpoint: Option<String>,
    pub credential_env: Option<String>,
    pub concurrency: Option<usize>,
    pub retries: Option<u32>,
    pub qps: Option<f64>,
    pub timeout_secs: Option<u64>,
    pub schema: Option<PathBuf>,
    pub cleaning: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.schema, &mut cfg.cleaning].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub mode: Mode,
    pub endpoint: Option<String>,
    pub credential_env: String,
    pub concurrency: usize,
    pub retries: u32,
    pub qps: Option<f64>,
    pub timeout_secs: u64,
    pub schema: Option<PathBuf>,
    pub cleaning: Option<PathBuf>,
}

/// Values given on the command line or through the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub strict: bool,
    pub endpoint: Option<String>,
    pub credential_env: Option<String>,
    pub concurrency: Option<usize>,
    pub retries: Option<u32>,
    pub qps: Option<f64>,
    pub timeout_secs: Option<u64>,
    pub schema: Option<PathBuf>,
    pub cleaning: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(o: Overrides, file: FileConfig) -> Result<Self> {
        let cfg = RunConfig {
            seed: o.seed.or(file.seed),
            mode: if o.strict || file.strict.unwrap_or(false) { Mode::Strict } else { Mode::Lenient },
            endpoint: o.endpoint.or(file.endpoint),
            credential_env: o
                .credential_env
                .or(file.credential_env)
                .unwrap_or_else(|| DEFAULT_CREDENTIAL_ENV.to_string()),
            concurrency: o.concurrency.or(file.concurrency).unwrap_or(4),
            retries: o.retries.or(file.retries).unwrap_or(3),
            qps: o.qps.or(file.qps),
            timeout_secs: o.timeout_secs.or(file.timeout_secs).unwrap_or(120),
            schema: o.schema.or(file.schema),
            cleaning: o.cleaning.or(file.cleaning),
        };
        if cfg.concurrency == 0 {
            bail!("concurrency must be at least 1");
        }
        if cfg.qps.is_some_and(|q| q.is_nan() || q <= 0.0) {
            bail!("qps must be positive");
        }
        Ok(cfg)
    }

    pub fn require_seed(&self, command: &str) -> Result<u64> {
        self.seed
            .with_context(|| format!("{command} needs a seed: pass --seed, set FACEQA_SEED or add `seed` to the config file"))
    }

    pub fn limits(&self) -> Limits {
        Limits {
            max_concurrency: self.concurrency,
            max_retries: self.retries,
            qps_cap: self.qps,
            ..Limits::default()
        }
    }
}
