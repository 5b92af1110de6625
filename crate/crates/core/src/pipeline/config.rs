//! Pipeline configuration and its flat `key = value` file format with
//! bracketed section headers. Example:
//!
//! ```text
//! [inputs]
//! corpus = poets.jsonl
//! word_embeddings = words.vec
//! poem_embeddings = poems.vec
//!
//! [corpus]
//! min_lines = 500
//!
//! [semantic]
//! freq_blend = 0.5
//! jaccard_blend = 0.5
//! scale_k = 3.0
//! top_n_vocab = 2000
//!
//! [fusion]
//! weights = 0.2, 0.2, 0.2, 0.2, 0.2
//!
//! [graph]
//! threshold = 0.4
//! top_k = 10
//!
//! [metrics]
//! distance_mode = hop
//! katz_beta = 1.0
//!
//! [community]
//! seed = 0
//!
//! [output]
//! dir = out
//! histogram_bins = 40
//! ```

use crate::metrics::DistanceMode;
use crate::similarity::{FusionParams, SemanticParams};
use std::path::{Path, PathBuf};

use super::PipelineError;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub corpus_path: PathBuf,
    pub word_embeddings_path: Option<PathBuf>,
    pub poem_embeddings_path: Option<PathBuf>,
    pub min_lines: usize,
    pub semantic: SemanticParams,
    pub fusion: FusionParams,
    pub threshold: Option<f64>,
    pub target_density: Option<f64>,
    pub top_k: Option<usize>,
    /// Distance interpretation for path-based measures.
    pub distance_mode: DistanceMode,
    pub katz_alpha: Option<f64>,
    pub katz_beta: f64,
    pub louvain_seed: u64,
    pub output_dir: PathBuf,
    pub histogram_bins: usize,
}

impl PipelineConfig {
    pub fn new(corpus_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            corpus_path: corpus_path.into(),
            word_embeddings_path: None,
            poem_embeddings_path: None,
            min_lines: 500,
            semantic: SemanticParams::default(),
            fusion: FusionParams::default(),
            threshold: None,
            target_density: None,
            top_k: None,
            distance_mode: DistanceMode::Hop,
            katz_alpha: None,
            katz_beta: 1.0,
            louvain_seed: 0,
            output_dir: output_dir.into(),
            histogram_bins: 40,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.fusion
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        self.semantic
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.threshold.is_some() && self.target_density.is_some() {
            return Err(PipelineError::Config(
                "threshold and target_density are mutually exclusive".into(),
            ));
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(PipelineError::Config(format!(
                    "threshold {t} outside [0, 1]"
                )));
            }
        }
        if let Some(d) = self.target_density {
            if !(0.0..=1.0).contains(&d) {
                return Err(PipelineError::Config(format!(
                    "target_density {d} outside [0, 1]"
                )));
            }
        }
        if self.histogram_bins == 0 {
            return Err(PipelineError::Config("histogram_bins must be positive".into()));
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(PipelineError::Io)?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base)
    }

    /// Parse config text. Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut cfg = PipelineConfig::new(PathBuf::new(), PathBuf::from("out"));
        let mut have_corpus = false;
        let mut section = String::new();
        let resolve = |value: &str, base: &Path| -> PathBuf {
            let p = PathBuf::from(value);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                PipelineError::Config(format!("line {line_no}: expected key = value"))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad_value = |what: &str| {
                PipelineError::Config(format!("line {line_no}: invalid {what} \"{value}\""))
            };
            match (section.as_str(), key) {
                ("inputs", "corpus") => {
                    cfg.corpus_path = resolve(value, base);
                    have_corpus = true;
                }
                ("inputs", "word_embeddings") => {
                    cfg.word_embeddings_path = Some(resolve(value, base));
                }
                ("inputs", "poem_embeddings") => {
                    cfg.poem_embeddings_path = Some(resolve(value, base));
                }
                ("corpus", "min_lines") => {
                    cfg.min_lines = value.parse().map_err(|_| bad_value("integer"))?;
                }
                ("semantic", "freq_blend") => {
                    cfg.semantic.freq_blend = value.parse().map_err(|_| bad_value("float"))?;
                }
                ("semantic", "jaccard_blend") => {
                    cfg.semantic.jaccard_blend = value.parse().map_err(|_| bad_value("float"))?;
                }
                ("semantic", "scale_k") => {
                    cfg.semantic.scale_k = value.parse().map_err(|_| bad_value("float"))?;
                }
                ("semantic", "top_n_vocab") => {
                    cfg.semantic.top_n_vocab = value.parse().map_err(|_| bad_value("integer"))?;
                }
                ("fusion", "weights") => {
                    let parts: Result<Vec<f64>, _> =
                        value.split(',').map(|p| p.trim().parse::<f64>()).collect();
                    let parts = parts.map_err(|_| bad_value("weight list"))?;
                    if parts.len() != 5 {
                        return Err(PipelineError::Config(format!(
                            "line {line_no}: expected 5 fusion weights, got {}",
                            parts.len()
                        )));
                    }
                    cfg.fusion.weights = [parts[0], parts[1], parts[2], parts[3], parts[4]];
                }
                ("graph", "threshold") => {
                    cfg.threshold = Some(value.parse().map_err(|_| bad_value("float"))?);
                }
                ("graph", "target_density") => {
                    cfg.target_density = Some(value.parse().map_err(|_| bad_value("float"))?);
                }
                ("graph", "top_k") => {
                    cfg.top_k = Some(value.parse().map_err(|_| bad_value("integer"))?);
                }
                ("metrics", "distance_mode") => {
                    cfg.distance_mode = match value {
                        "hop" => DistanceMode::Hop,
                        "inverse_weight" => DistanceMode::InverseWeight,
                        _ => return Err(bad_value("distance_mode (hop|inverse_weight)")),
                    };
                }
                ("metrics", "katz_alpha") => {
                    cfg.katz_alpha = Some(value.parse().map_err(|_| bad_value("float"))?);
                }
                ("metrics", "katz_beta") => {
                    cfg.katz_beta = value.parse().map_err(|_| bad_value("float"))?;
                }
                ("community", "seed") => {
                    cfg.louvain_seed = value.parse().map_err(|_| bad_value("integer"))?;
                }
                ("output", "dir") => {
                    cfg.output_dir = resolve(value, base);
                }
                ("output", "histogram_bins") => {
                    cfg.histogram_bins = value.parse().map_err(|_| bad_value("integer"))?;
                }
                _ => {
                    return Err(PipelineError::Config(format!(
                        "line {line_no}: unknown key \"{key}\" in section \"{section}\""
                    )));
                }
            }
        }
        if !have_corpus {
            return Err(PipelineError::Config(
                "missing required key: corpus (section [inputs])".into(),
            ));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
