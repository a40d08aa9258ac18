use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sic_core::dialogue::DialogueConfig;
use sic_core::feedback::FeedbackConfig;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("config file: {0}")]
    Toml(String),
    #[error("env {var}: {message}")]
    Env { var: &'static str, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Default,
    /// Requires the mock provider.
    Test,
}

/// Outbound chat provider.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    /// Answer from the deterministic in-process mock instead of `endpoint`.
    pub mock: bool,
    /// Chat-completions URL.
    pub endpoint: Option<String>,
    pub model: String,
    /// Name of the env var holding the bearer token. The token itself never
    /// goes in the file.
    pub token_env: Option<String>,
    pub timeout_ms: u64,
    /// Extra attempts after a failed call.
    pub retries: u32,
    /// Ask the endpoint for an event stream and forward deltas.
    pub stream: bool,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            mock: true,
            endpoint: None,
            model: "default".into(),
            token_env: None,
            timeout_ms: 20_000,
            retries: 1,
            stream: false,
        }
    }
}

impl ProviderConfig {
    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }
}

/// Optional skill model. Without it classification is rule-only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    pub endpoint: String,
    #[serde(default)]
    pub token_env: Option<String>,
    #[serde(default = "classifier_timeout")]
    pub timeout_ms: u64,
    #[serde(default)]
    pub retries: u32,
}

fn classifier_timeout() -> u64 {
    5_000
}

/// Data files replacing the shipped ones. Unset entries keep the builtin.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub schema: Option<PathBuf>,
    pub persona: Option<PathBuf>,
    pub lexicons: Vec<PathBuf>,
    pub hedges: Option<PathBuf>,
    pub few_shot: Option<PathBuf>,
    pub statements: Option<PathBuf>,
    pub context: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub profile: Profile,
    pub bind: String,
    /// Session documents directory. Unset keeps sessions in memory.
    pub data_dir: Option<PathBuf>,
    /// Static key required on /v1 routes when set.
    pub api_key: Option<String>,
    pub provider: ProviderConfig,
    pub classifier: Option<ClassifierConfig>,
    pub dialogue: DialogueConfig,
    pub feedback: FeedbackConfig,
    pub paths: DataPaths,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            profile: Profile::Default,
            bind: "127.0.0.1:8080".into(),
            data_dir: None,
            api_key: None,
            provider: ProviderConfig::default(),
            classifier: None,
            dialogue: DialogueConfig::default(),
            feedback: FeedbackConfig::default(),
            paths: DataPaths::default(),
        }
    }
}

impl ServiceConfig {
    /// In-memory sessions, mock provider, builtin data.
    pub fn for_tests() -> Self {
        Self { profile: Profile::Test, ..Self::default() }
    }

    pub fn from_toml(src: &str) -> Result<Self, ConfigError> {
        toml::from_str(src).map_err(|e| ConfigError::Toml(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_toml(&src)
    }

    /// File (if any), then process environment, then validation.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut c = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        c.apply_env(|k| std::env::var(k).ok())?;
        c.validate()?;
        Ok(c)
    }

    /// Applies `SIC_*` overrides looked up through `var`.
    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(var: &'static str, v: &str) -> Result<T, ConfigError> {
            v.trim().parse().map_err(|_| ConfigError::Env { var, message: format!("not a number: {v:?}") })
        }
        fn flag(var: &'static str, v: &str) -> Result<bool, ConfigError> {
            match v.trim().to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" | "on" => Ok(true),
                "0" | "false" | "no" | "off" => Ok(false),
                _ => Err(ConfigError::Env { var, message: format!("not a boolean: {v:?}") }),
            }
        }
        let get = |k: &str| var(k).filter(|v| !v.is_empty());

        if let Some(v) = get("SIC_BIND") {
            self.bind = v;
        }
        if let Some(v) = get("SIC_DATA_DIR") {
            self.data_dir = Some(v.into());
        }
        if let Some(v) = get("SIC_API_KEY") {
            self.api_key = Some(v);
        }
        if let Some(v) = get("SIC_PROVIDER_MOCK") {
            self.provider.mock = flag("SIC_PROVIDER_MOCK", &v)?;
        }
        if let Some(v) = get("SIC_PROVIDER_ENDPOINT") {
            self.provider.endpoint = Some(v);
        }
        if let Some(v) = get("SIC_PROVIDER_MODEL") {
            self.provider.model = v;
        }
        if let Some(v) = get("SIC_PROVIDER_TIMEOUT_MS") {
            self.provider.timeout_ms = num("SIC_PROVIDER_TIMEOUT_MS", &v)?;
        }
        if let Some(v) = get("SIC_PROVIDER_RETRIES") {
            self.provider.retries = num("SIC_PROVIDER_RETRIES", &v)?;
        }
        if let Some(v) = get("SIC_CLASSIFIER_ENDPOINT") {
            match &mut self.classifier {
                Some(c) => c.endpoint = v,
                None => {
                    self.classifier =
                        Some(ClassifierConfig { endpoint: v, token_env: None, timeout_ms: classifier_timeout(), retries: 0 })
                }
            }
        }
        if let Some(v) = get("SIC_SUCCESS_THRESHOLD") {
            self.dialogue.success_threshold = num("SIC_SUCCESS_THRESHOLD", &v)?;
        }
        if let Some(v) = get("SIC_MODULE_CAP_MS") {
            self.dialogue.module_cap_ms = num("SIC_MODULE_CAP_MS", &v)?;
        }
        if let Some(v) = get("SIC_SESSION_CAP_MS") {
            self.dialogue.session_cap_ms = num("SIC_SESSION_CAP_MS", &v)?;
        }
        if let Some(v) = get("SIC_SCHEMA_PATH") {
            self.paths.schema = Some(v.into());
        }
        if let Some(v) = get("SIC_PERSONA_PATH") {
            self.paths.persona = Some(v.into());
        }
        if let Some(v) = get("SIC_LEXICON_PATHS") {
            self.paths.lexicons = std::env::split_paths(&v).collect();
        }
        if let Some(v) = get("SIC_HEDGES_PATH") {
            self.paths.hedges = Some(v.into());
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.provider.timeout_ms == 0 {
            return bad("provider.timeout_ms must be positive");
        }
        if !self.provider.mock && self.provider.endpoint.as_deref().map_or(true, |e| e.trim().is_empty()) {
            return bad("provider.endpoint is required unless provider.mock is set");
        }
        if self.profile == Profile::Test && !self.provider.mock {
            return bad("the test profile requires provider.mock");
        }
        if let Some(c) = &self.classifier {
            if c.timeout_ms == 0 {
                return bad("classifier.timeout_ms must be positive");
            }
            if c.endpoint.trim().is_empty() {
                return bad("classifier.endpoint is empty");
            }
        }
        if self.dialogue.success_threshold == 0 {
            return bad("dialogue.success_threshold must be positive");
        }
        if self.dialogue.module_cap_ms == 0 || self.dialogue.session_cap_ms == 0 {
            return bad("dialogue caps must be positive");
        }
        if self.api_key.as_deref().is_some_and(|k| k.trim().is_empty()) {
            return bad("api_key is empty");
        }
        Ok(())
    }
}
