use anyhow::Context;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use svgrefine_core::backend::HttpConfig;
use svgrefine_core::metrics::{TokenCounter, DEFAULT_TOKEN_DIVISOR};
use svgrefine_core::normalize::{NormalizeConfig, DEFAULT_TOKEN_LIMIT};
use svgrefine_core::prefdata::{PairMode, DEFAULT_BETA, DEFAULT_CANDIDATES, DEFAULT_DELTA, DEFAULT_SAMPLE_TEMPERATURE};
use svgrefine_core::refine::LoopConfig;

/// File-level configuration. Flags override it; it overrides built-in defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub backend: HttpConfig,
    #[serde(rename = "loop")]
    pub loop_: LoopConfig,
    pub normalize: NormalizeSection,
    pub pref: PrefSection,
    pub paths: PathsSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeSection {
    pub token_limit: usize,
    pub token_divisor: usize,
    /// External tokenizer: program and arguments, text on stdin, count on stdout.
    pub tokenizer_command: Option<Vec<String>>,
}

impl Default for NormalizeSection {
    fn default() -> Self {
        NormalizeSection {
            token_limit: DEFAULT_TOKEN_LIMIT,
            token_divisor: DEFAULT_TOKEN_DIVISOR,
            tokenizer_command: None,
        }
    }
}

impl NormalizeSection {
    pub fn to_config(&self, token_limit: Option<usize>) -> NormalizeConfig {
        NormalizeConfig {
            token_limit: token_limit.unwrap_or(self.token_limit),
            tokens: TokenCounter { divisor: self.token_divisor, command: self.tokenizer_command.clone() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrefSection {
    pub n: usize,
    pub temperature: f64,
    pub score_temperature: f64,
    pub delta: f64,
    pub mode: PairMode,
    pub beta: f64,
}

impl Default for PrefSection {
    fn default() -> Self {
        PrefSection {
            n: DEFAULT_CANDIDATES,
            temperature: DEFAULT_SAMPLE_TEMPERATURE,
            score_temperature: 0.0,
            delta: DEFAULT_DELTA,
            mode: PairMode::AllPairs,
            beta: DEFAULT_BETA,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub prompts: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl AppConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: AppConfig = toml::from_str(text)?;
        cfg.loop_.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_constants() {
        let cfg = AppConfig::default();
        assert_eq!(cfg.loop_.n_max, 3);
        assert_eq!(cfg.loop_.tau, 9.5);
        assert_eq!((cfg.loop_.gen_temperature, cfg.loop_.critique_temperature), (0.5, 0.0));
        assert_eq!(cfg.pref.beta, 0.1);
        assert_eq!((cfg.pref.n, cfg.pref.temperature), (5, 0.9));
        assert_eq!(cfg.normalize.token_limit, 8000);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = AppConfig::parse("[loop]\ntau = 9.0\n[backend]\nmodel = \"m\"\n").unwrap();
        assert_eq!(cfg.loop_.tau, 9.0);
        assert_eq!(cfg.loop_.n_max, 3);
        assert_eq!(cfg.backend.model, "m");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(AppConfig::parse("[loop]\ntua = 9.0\n").is_err());
        assert!(AppConfig::parse("[extra]\n").is_err());
        assert!(AppConfig::parse("[loop]\ntau = 12.0\n").is_err());
    }
}
