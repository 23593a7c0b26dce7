//! Run configuration: JSON config file, command-line flags (flags win),
//! and environment variables for provider credentials.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use insight_core::search::SearchParams;
use insight_core::table::InferenceOptions;
use insight_core::{QugenParams, Thresholds};

use crate::PipelineError;

/// Card-generation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// LLM-generated questions followed by insight search.
    Quis,
    /// Statistical baseline cards followed by insight search.
    Onlystats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EmbedderKind {
    /// HTTP embedding endpoint.
    Remote,
    /// Deterministic offline hashed-token embedder.
    Fallback,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QugenConfig {
    pub iterations: usize,
    pub samples_per_iteration: usize,
    pub temperature: f64,
    pub in_context_examples: usize,
    pub relevance_threshold: f64,
    pub dedup_threshold: f64,
    pub llm_stats: bool,
}

impl Default for QugenConfig {
    fn default() -> Self {
        let p = QugenParams::default();
        QugenConfig {
            iterations: p.iterations,
            samples_per_iteration: p.samples_per_iteration,
            temperature: p.temperature,
            in_context_examples: p.in_context_examples,
            relevance_threshold: p.relevance_threshold,
            dedup_threshold: p.dedup_threshold,
            llm_stats: p.llm_stats,
        }
    }
}

impl QugenConfig {
    pub fn to_params(&self) -> QugenParams {
        QugenParams {
            iterations: self.iterations,
            samples_per_iteration: self.samples_per_iteration,
            temperature: self.temperature,
            in_context_examples: self.in_context_examples,
            relevance_threshold: self.relevance_threshold,
            dedup_threshold: self.dedup_threshold,
            llm_stats: self.llm_stats,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub beam_width: usize,
    pub exp_factor: usize,
    pub max_depth: usize,
    pub w_llm: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        let p = SearchParams::default();
        SearchConfig {
            beam_width: p.beam_width,
            exp_factor: p.exp_factor,
            max_depth: p.max_depth,
            w_llm: p.w_llm,
        }
    }
}

impl SearchConfig {
    pub fn to_params(&self, seed: u64) -> SearchParams {
        SearchParams {
            beam_width: self.beam_width,
            exp_factor: self.exp_factor,
            max_depth: self.max_depth,
            w_llm: self.w_llm,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub trend: f64,
    pub outstanding_value: f64,
    pub attribution: f64,
    pub distribution_difference: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        ThresholdConfig {
            trend: t.trend,
            outstanding_value: t.outstanding_value,
            attribution: t.attribution,
            distribution_difference: t.distribution_difference,
        }
    }
}

impl ThresholdConfig {
    pub fn to_thresholds(&self) -> Thresholds {
        Thresholds {
            trend: self.trend,
            outstanding_value: self.outstanding_value,
            attribution: self.attribution,
            distribution_difference: self.distribution_difference,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    /// Chat-completion endpoint URL; the LLM_ENDPOINT environment variable
    /// overrides it.
    pub endpoint: Option<String>,
    pub model: Option<String>,
    /// Directory of canned responses consumed one file per call.
    pub stub_dir: Option<PathBuf>,
    /// Embedding endpoint for `--embedder remote`.
    pub embedding_endpoint: Option<String>,
    pub embedding_model: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceConfig {
    pub ordinal_max_distinct: usize,
    pub temporal_hints: Vec<String>,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        let o = InferenceOptions::default();
        InferenceConfig {
            ordinal_max_distinct: o.ordinal_max_distinct,
            temporal_hints: o.temporal_hints,
        }
    }
}

impl InferenceConfig {
    pub fn to_options(&self) -> InferenceOptions {
        InferenceOptions {
            ordinal_max_distinct: self.ordinal_max_distinct,
            temporal_hints: self.temporal_hints.clone(),
        }
    }
}

/// The complete run configuration; this is echoed into the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub meta: Option<PathBuf>,
    pub mode: Mode,
    pub out: PathBuf,
    pub seed: u64,
    /// Number of baseline cards in onlystats mode.
    pub top_k: usize,
    /// Maximum insights kept per card.
    pub insight_cap: usize,
    /// Record wall-clock stage timings in the report file. Off by default
    /// so reruns with the same seed are byte-identical.
    pub record_timings: bool,
    pub qugen: QugenConfig,
    pub search: SearchConfig,
    pub thresholds: ThresholdConfig,
    pub inference: InferenceConfig,
    pub llm: LlmConfig,
    pub embedder: EmbedderKind,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            meta: None,
            mode: Mode::Onlystats,
            out: PathBuf::from("insight-out"),
            seed: 0,
            top_k: 20,
            insight_cap: 10,
            record_timings: false,
            qugen: QugenConfig::default(),
            search: SearchConfig::default(),
            thresholds: ThresholdConfig::default(),
            inference: InferenceConfig::default(),
            llm: LlmConfig::default(),
            embedder: EmbedderKind::Fallback,
        }
    }
}

/// Command-line flags; every flag overrides the config file.
#[derive(Debug, Clone, clap::Parser)]
#[command(
    name = "mine",
    about = "Mine statistically scored insights from a CSV dataset",
    version
)]
pub struct CliArgs {
    /// CSV dataset to analyze.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// JSON metadata sidecar (name, description, column descriptions).
    #[arg(long)]
    pub meta: Option<PathBuf>,
    /// Card generation mode.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run seed; everything downstream derives from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (must not exist yet).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Chat-completion endpoint URL.
    #[arg(long)]
    pub llm_endpoint: Option<String>,
    /// Model name for the chat-completion endpoint.
    #[arg(long)]
    pub llm_model: Option<String>,
    /// Directory of canned LLM responses (one file per call, in name order).
    #[arg(long)]
    pub llm_stub: Option<PathBuf>,
    /// Embedding provider.
    #[arg(long, value_enum)]
    pub embedder: Option<EmbedderKind>,
    #[arg(long)]
    pub beam_width: Option<usize>,
    #[arg(long)]
    pub exp_factor: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Probability mass for LLM-suggested filter columns, in [0, 1].
    #[arg(long)]
    pub w_llm: Option<f64>,
    /// Card-generation iterations in quis mode.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Number of baseline cards in onlystats mode.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Maximum insights kept per card.
    #[arg(long)]
    pub insight_cap: Option<usize>,
    /// Record wall-clock stage timings in the report file (makes reruns
    /// differ byte-wise).
    #[arg(long)]
    pub record_timings: bool,
}

impl RunConfig {
    /// Loads the config file (when given) and applies flag overrides.
    pub fn from_args(args: &CliArgs) -> Result<RunConfig, PipelineError> {
        let mut config = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    PipelineError::Config(format!("cannot read config {}: {e}", path.display()))
                })?;
                serde_json::from_str::<RunConfig>(&text).map_err(|e| {
                    PipelineError::Config(format!("invalid config {}: {e}", path.display()))
                })?
            }
            None => RunConfig::default(),
        };

        if let Some(dataset) = &args.dataset {
            config.dataset = Some(dataset.clone());
        }
        if let Some(meta) = &args.meta {
            config.meta = Some(meta.clone());
        }
        if let Some(mode) = args.mode {
            config.mode = mode;
        }
        if let Some(seed) = args.seed {
            config.seed = seed;
        }
        if let Some(out) = &args.out {
            config.out = out.clone();
        }
        if let Some(endpoint) = &args.llm_endpoint {
            config.llm.endpoint = Some(endpoint.clone());
        }
        if let Some(model) = &args.llm_model {
            config.llm.model = Some(model.clone());
        }
        if let Some(stub) = &args.llm_stub {
            config.llm.stub_dir = Some(stub.clone());
        }
        if let Some(embedder) = args.embedder {
            config.embedder = embedder;
        }
        if let Some(beam_width) = args.beam_width {
            config.search.beam_width = beam_width;
        }
        if let Some(exp_factor) = args.exp_factor {
            config.search.exp_factor = exp_factor;
        }
        if let Some(max_depth) = args.max_depth {
            config.search.max_depth = max_depth;
        }
        if let Some(w_llm) = args.w_llm {
            config.search.w_llm = w_llm;
        }
        if let Some(iterations) = args.iterations {
            config.qugen.iterations = iterations;
        }
        if let Some(top_k) = args.top_k {
            config.top_k = top_k;
        }
        if let Some(cap) = args.insight_cap {
            config.insight_cap = cap;
        }
        if args.record_timings {
            config.record_timings = true;
        }

        // Environment overrides for provider settings.
        if let Ok(endpoint) = std::env::var("LLM_ENDPOINT") {
            if !endpoint.is_empty() {
                config.llm.endpoint = Some(endpoint);
            }
        }

        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    #[test]
    fn default_parameters() {
        let config = RunConfig::default();
        assert_eq!(config.search.beam_width, 100);
        assert_eq!(config.search.exp_factor, 100);
        assert_eq!(config.search.max_depth, 1);
        assert_eq!(config.search.w_llm, 0.5);
        assert_eq!(config.qugen.iterations, 10);
        assert_eq!(config.qugen.samples_per_iteration, 3);
        assert_eq!(config.qugen.temperature, 1.1);
        assert_eq!(config.qugen.in_context_examples, 6);
        assert_eq!(config.top_k, 20);
        assert_eq!(config.thresholds.trend, 0.95);
        assert_eq!(config.thresholds.outstanding_value, 1.4);
        assert_eq!(config.thresholds.attribution, 0.5);
        assert_eq!(config.thresholds.distribution_difference, 0.2);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("config.json");
        std::fs::write(
            &config_path,
            r#"{"seed": 5, "search": {"beam_width": 7}, "mode": "quis"}"#,
        )
        .unwrap();
        let args = CliArgs::parse_from([
            "mine",
            "--config",
            config_path.to_str().unwrap(),
            "--seed",
            "9",
            "--dataset",
            "data.csv",
        ]);
        let config = RunConfig::from_args(&args).unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.search.beam_width, 7);
        assert_eq!(config.mode, Mode::Quis);
        assert_eq!(config.dataset.unwrap(), PathBuf::from("data.csv"));
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let config_path = dir.path().join("config.json");
        std::fs::write(&config_path, r#"{"tpo_k": 3}"#).unwrap();
        let args =
            CliArgs::parse_from(["mine", "--config", config_path.to_str().unwrap()]);
        assert!(matches!(
            RunConfig::from_args(&args),
            Err(PipelineError::Config(_))
        ));
    }
}
