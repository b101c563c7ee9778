use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use atlas_core::geometry::UmapParams;
use atlas_core::transport::OtParams;
use serde::{Deserialize, Serialize};

/// How author pairs are compared in the `distances` stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportMethod {
    #[default]
    Exact,
    Sinkhorn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransportConfig {
    pub method: TransportMethod,
    pub p: u32,
    pub sinkhorn_lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Concurrent pair solves; 0 uses every core.
    pub threads: usize,
    pub memory_budget_mb: usize,
}

impl Default for TransportConfig {
    fn default() -> Self {
        let ot = OtParams::default();
        TransportConfig {
            method: TransportMethod::Exact,
            p: ot.p,
            sinkhorn_lambda: ot.sinkhorn_lambda,
            max_iter: ot.max_iter,
            tol: ot.tol,
            threads: 0,
            memory_budget_mb: ot.memory_budget >> 20,
        }
    }
}

impl TransportConfig {
    pub fn params(&self) -> OtParams {
        OtParams {
            p: self.p,
            sinkhorn_lambda: self.sinkhorn_lambda,
            max_iter: self.max_iter,
            tol: self.tol,
            memory_budget: self.memory_budget_mb << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub k: usize,
    pub louvain_replicates: usize,
    pub null_replicates: usize,
    pub top_words: usize,
    pub min_word_count: u64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            k: 3,
            louvain_replicates: 20,
            null_replicates: 500,
            top_words: 10,
            min_word_count: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FetchConfig {
    pub base_url: Option<String>,
    pub rate: Option<usize>,
    pub retries: u32,
    pub page_size: usize,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            base_url: None,
            rate: None,
            retries: 4,
            page_size: 100,
        }
    }
}

/// Pipeline settings. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub queries: Option<PathBuf>,
    /// Optional CSV `author_id,group` of external labels such as departments.
    pub groups: Option<PathBuf>,
    /// Optional exclusion list; the built-in list is used otherwise.
    pub exclusions: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub vocab_size: usize,
    pub min_count: u64,
    pub seed: u64,
    /// Intra-stage worker threads; 0 uses every core.
    pub threads: usize,
    pub umap: UmapParams,
    pub transport: TransportConfig,
    pub graph: GraphConfig,
    pub fetch: FetchConfig,
    pub report: ReportConfig,
}

/// Extra tests run by the report stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Term pairs tested for co-occurrence across documents.
    pub term_pairs: Vec<(String, String)>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: PathBuf::from("corpus.json"),
            queries: None,
            groups: None,
            exclusions: None,
            output_dir: PathBuf::from("atlas-out"),
            vocab_size: 5000,
            min_count: 1,
            seed: 1,
            threads: 0,
            umap: UmapParams::default(),
            transport: TransportConfig::default(),
            graph: GraphConfig::default(),
            fetch: FetchConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).context("invalid configuration")?;
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.corpus);
        join(&mut self.output_dir);
        for p in [&mut self.queries, &mut self.groups, &mut self.exclusions].into_iter().flatten() {
            join(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size < 100 {
            bail!("vocab_size must be at least 100 (got {})", self.vocab_size);
        }
        if self.graph.k == 0 {
            bail!("graph.k must be at least 1");
        }
        self.transport.params().validate()?;
        Ok(())
    }

    /// UMAP parameters with the pipeline seed applied.
    pub fn umap_params(&self) -> UmapParams {
        UmapParams {
            seed: self.seed,
            ..self.umap.clone()
        }
    }

    pub fn report_term_pairs(&self) -> &[(String, String)] {
        &self.report.term_pairs
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_relative_paths() {
        let cfg = PipelineConfig::from_toml(
            "corpus = \"c.json\"\noutput_dir = \"out\"\nvocab_size = 200\n[graph]\nk = 4\n",
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(cfg.corpus, PathBuf::from("/data/c.json"));
        assert_eq!(cfg.output_dir, PathBuf::from("/data/out"));
        assert_eq!(cfg.graph.k, 4);
        assert_eq!(cfg.graph.louvain_replicates, 20);
        assert_eq!(cfg.umap.dim, 3);
        assert_eq!(cfg.transport.p, 2);
    }

    #[test]
    fn rejects_small_vocabulary_and_unknown_keys() {
        assert!(PipelineConfig::from_toml("vocab_size = 50\n", Path::new(".")).is_err());
        assert!(PipelineConfig::from_toml("vocab = 500\n", Path::new(".")).is_err());
        assert!(PipelineConfig::from_toml("[transport]\np = 3\n", Path::new(".")).is_err());
    }
}
