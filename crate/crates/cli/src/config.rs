use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use cogito_core::{BackendKind, EngineConfig, Fraction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Live,
    Scripted,
}

impl From<BackendArg> for BackendKind {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Live => BackendKind::Live,
            BackendArg::Scripted => BackendKind::Scripted,
        }
    }
}

/// Engine settings. Each flag overrides the matching key of `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct EngineArgs {
    /// TOML file mirroring the engine configuration
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Expert-phase attempt bound
    #[arg(long = "t", value_name = "T")]
    pub expert_attempts: Option<u32>,
    /// Independent runs per task (the n of pass@k)
    #[arg(long, value_name = "N")]
    pub samples: Option<u32>,
    #[arg(long, value_name = "FRACTION")]
    pub weight_planner: Option<Fraction>,
    #[arg(long, value_name = "FRACTION")]
    pub weight_coder: Option<Fraction>,
    #[arg(long, value_name = "FRACTION")]
    pub weight_debugger: Option<Fraction>,
    #[arg(long, value_name = "N")]
    pub group_debug_limit: Option<u32>,
    #[arg(long, value_name = "MS")]
    pub sandbox_timeout_ms: Option<u64>,
    #[arg(long, value_name = "BYTES")]
    pub max_output_bytes: Option<usize>,
    /// Python interpreter used by the judge
    #[arg(long, value_name = "CMD")]
    pub interpreter: Option<String>,
    /// Concurrent sandbox processes, 0 for one per CPU
    #[arg(long, value_name = "N")]
    pub max_sandboxes: Option<usize>,
    #[arg(long, value_name = "CHARS")]
    pub digest_budget: Option<usize>,
    #[arg(long, value_name = "FRACTION")]
    pub digest_threshold: Option<Fraction>,
    /// Directory of `<stage>.<family>.txt` template overrides
    #[arg(long, value_name = "DIR")]
    pub templates_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// JSON Lines script for the scripted backend
    #[arg(long, value_name = "PATH")]
    pub script: Option<PathBuf>,
    #[arg(long, value_name = "URL")]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Name of the environment variable holding the API key
    #[arg(long, value_name = "VAR")]
    pub api_key_env: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long, value_name = "N")]
    pub max_retries: Option<u32>,
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Loads a config file. Relative paths inside it are taken relative to the file.
pub fn load_file(path: &Path) -> Result<EngineConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let mut config: EngineConfig =
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let rebase = |p: &mut Option<String>| {
        if let Some(s) = p.as_mut() {
            if Path::new(s).is_relative() {
                *s = path_string(&base.join(&*s));
            }
        }
    };
    rebase(&mut config.backend.script_path);
    rebase(&mut config.templates_dir);
    Ok(config)
}

impl EngineArgs {
    pub fn resolve(&self) -> Result<EngineConfig> {
        let mut c = match &self.config {
            Some(path) => load_file(path)?,
            None => EngineConfig::default(),
        };
        macro_rules! set {
            ($flag:expr, $field:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v.into();
                }
            };
        }
        set!(self.seed, c.seed);
        set!(self.expert_attempts, c.expert_attempts_t);
        set!(self.samples, c.samples_per_task);
        set!(self.weight_planner, c.weights.planner);
        set!(self.weight_coder, c.weights.coder);
        set!(self.weight_debugger, c.weights.debugger);
        set!(self.group_debug_limit, c.group_debug_limit);
        set!(self.sandbox_timeout_ms, c.sandbox_timeout_ms);
        set!(self.max_output_bytes, c.max_output_bytes);
        set!(self.interpreter, c.interpreter_command);
        set!(self.max_sandboxes, c.max_sandboxes);
        set!(self.digest_budget, c.digest_budget_chars);
        set!(self.digest_threshold, c.digest_score_threshold);
        set!(self.backend, c.backend.kind);
        set!(self.temperature, c.backend.temperature);
        set!(self.max_retries, c.backend.max_retries);
        if let Some(p) = &self.templates_dir {
            c.templates_dir = Some(path_string(p));
        }
        if let Some(p) = &self.script {
            c.backend.script_path = Some(path_string(p));
        }
        if let Some(v) = &self.endpoint {
            c.backend.endpoint_url = Some(v.clone());
        }
        if let Some(v) = &self.model {
            c.backend.model_name = Some(v.clone());
        }
        if let Some(v) = &self.api_key_env {
            c.backend.api_key_env_var = Some(v.clone());
        }
        Ok(c)
    }
}
