use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use atlas_core::corpus::{load_corpus, parse_query_file, persist_corpus, Corpus};
use atlas_core::docterm::{build_matrix, dedupe_rows, DedupReport, SparseDocTermMatrix};
use atlas_core::geometry::{pairwise_term_distances, trustworthiness, umap_embed, MatrixKind};
use atlas_core::graph::{
    adjusted_rand_index, characteristic_words, closeness_centrality, degree_stats, louvain_replicates,
    permutation_null, to_dot, to_graphml, within_cluster_distance, write_cluster_csv, AuthorGraph, Closeness,
    DegreeStats, GroupDistance, NullSummary, UndirectedGraph, Unreachable, VertexAttributes,
};
use atlas_core::stats::{fisher_exact, wilcoxon_signed_rank, ContingencyTable2x2, FisherResult, SpearmanResult, WilcoxonResult};
use atlas_core::text::{
    author_profiles, build_vocabulary, default_exclusions, fit_vocabulary, load_exclusions, AuthorProfile,
    TermList, Tokenizer, Vocabulary,
};
use atlas_core::transport::{
    direct_author_angular_distance, make_point_pattern, pairwise_author_distances, pairwise_sinkhorn_distances,
};
use atlas_core::{DistanceMatrix, Embedding};
use serde::{Deserialize, Serialize};

use crate::compare::{compare_distances, write_comparison_csv};
use crate::config::{PipelineConfig, TransportMethod};
use crate::groups::{labels_for, read_groups};
use crate::manifest::{file_key, hash_files, manifest_path, read_json, read_manifest, sha256_file, timings_path, write_json, Manifest, Timings};

pub const TERMS: &str = "terms.json";
pub const VOCABULARY: &str = "vocabulary.csv";
pub const ZIPF_JSON: &str = "zipf.json";
pub const ZIPF_CSV: &str = "zipf.csv";
pub const PROFILES: &str = "profiles.json";
pub const MATRIX: &str = "matrix.csv";
pub const MATRIX_META: &str = "matrix.json";
pub const DEDUP: &str = "dedup.json";
pub const EMBEDDING: &str = "embedding.csv";
pub const EMBEDDING_META: &str = "embedding.json";
pub const AUTHOR_DISTANCES: &str = "author_distances.csv";
pub const AUTHOR_DISTANCES_BIN: &str = "author_distances.bin";
pub const AUTHOR_DISTANCES_HEADER: &str = "author_distances.json";
pub const DIRECT_DISTANCES: &str = "direct_distances.csv";
pub const GRAPHML: &str = "graph.graphml";
pub const DOT: &str = "graph.dot";
pub const PARTITION: &str = "partition.json";
pub const CLUSTERS: &str = "clusters.csv";
pub const STATS: &str = "stats.json";
pub const COMPARISON: &str = "distance_comparison.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Fetch,
    Process,
    Matrix,
    Embed,
    Distances,
    Graph,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Fetch,
        Stage::Process,
        Stage::Matrix,
        Stage::Embed,
        Stage::Distances,
        Stage::Graph,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Fetch => "fetch",
            Stage::Process => "process",
            Stage::Matrix => "matrix",
            Stage::Embed => "embed",
            Stage::Distances => "distances",
            Stage::Graph => "graph",
            Stage::Report => "report",
        }
    }

    /// Files read by the stage, each with the stage that writes it.
    pub fn inputs(self, cfg: &PipelineConfig) -> Vec<(PathBuf, Stage)> {
        let o = |n: &str| cfg.out(n);
        match self {
            Stage::Fetch => Vec::new(),
            Stage::Process => vec![(cfg.corpus.clone(), Stage::Fetch)],
            Stage::Matrix => vec![
                (cfg.corpus.clone(), Stage::Fetch),
                (o(TERMS), Stage::Process),
                (o(VOCABULARY), Stage::Process),
            ],
            Stage::Embed => vec![
                (o(VOCABULARY), Stage::Process),
                (o(MATRIX), Stage::Matrix),
                (o(MATRIX_META), Stage::Matrix),
            ],
            Stage::Distances => vec![
                (o(VOCABULARY), Stage::Process),
                (o(PROFILES), Stage::Process),
                (o(EMBEDDING), Stage::Embed),
            ],
            Stage::Graph => vec![(cfg.corpus.clone(), Stage::Fetch), (o(AUTHOR_DISTANCES), Stage::Distances)],
            Stage::Report => vec![
                (o(VOCABULARY), Stage::Process),
                (o(PROFILES), Stage::Process),
                (o(MATRIX), Stage::Matrix),
                (o(MATRIX_META), Stage::Matrix),
                (o(AUTHOR_DISTANCES), Stage::Distances),
                (o(DIRECT_DISTANCES), Stage::Distances),
                (o(PARTITION), Stage::Graph),
            ],
        }
    }

    pub fn outputs(self, cfg: &PipelineConfig) -> Vec<PathBuf> {
        let names: &[&str] = match self {
            Stage::Fetch => return vec![cfg.corpus.clone()],
            Stage::Process => &[TERMS, VOCABULARY, ZIPF_JSON, ZIPF_CSV, PROFILES],
            Stage::Matrix => &[MATRIX, MATRIX_META, DEDUP],
            Stage::Embed => &[EMBEDDING, EMBEDDING_META],
            Stage::Distances => &[AUTHOR_DISTANCES, AUTHOR_DISTANCES_BIN, AUTHOR_DISTANCES_HEADER, DIRECT_DISTANCES],
            Stage::Graph => &[GRAPHML, DOT, PARTITION],
            Stage::Report => &[CLUSTERS, STATS, COMPARISON],
        };
        names.iter().map(|n| cfg.out(n)).collect()
    }
}

impl std::str::FromStr for Stage {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .with_context(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Proceed even when an input no longer matches its producer's manifest.
    pub force: bool,
    /// Run every upstream stage first.
    pub from_scratch: bool,
}

/// Runs `stage`, or the chain of stages leading to it with `from_scratch`.
/// Fetching is skipped when the corpus file already exists.
pub fn run(stage: Stage, cfg: &PipelineConfig, opts: RunOptions) -> Result<()> {
    if opts.from_scratch {
        for st in Stage::ALL.into_iter().filter(|&s| s <= stage) {
            if st == Stage::Fetch && cfg.corpus.exists() {
                log::info!("corpus {} present; skipping fetch", cfg.corpus.display());
                continue;
            }
            run_stage(st, cfg, RunOptions { from_scratch: false, ..opts })?;
        }
        return Ok(());
    }
    run_stage(stage, cfg, opts)
}

fn check_inputs(stage: Stage, cfg: &PipelineConfig, force: bool) -> Result<()> {
    let mut producers: HashMap<Stage, Option<Manifest>> = HashMap::new();
    for (path, producer) in stage.inputs(cfg) {
        if !path.exists() {
            bail!("missing {}: run {} first", path.display(), producer.name());
        }
        let manifest = match producers.get(&producer) {
            Some(m) => m.clone(),
            None => {
                let m = read_manifest(&cfg.output_dir, producer.name())?;
                producers.insert(producer, m.clone());
                m
            }
        };
        let Some(manifest) = manifest else { continue };
        let Some(recorded) = manifest.outputs.get(&file_key(&path)) else { continue };
        if *recorded != sha256_file(&path)? {
            let msg = format!(
                "stale input {}: it changed after {} wrote it; rerun {} or pass --force",
                path.display(),
                producer.name(),
                producer.name()
            );
            if force {
                log::warn!("{msg}");
            } else {
                bail!(msg);
            }
        }
    }
    Ok(())
}

pub fn run_stage(stage: Stage, cfg: &PipelineConfig, opts: RunOptions) -> Result<()> {
    check_inputs(stage, cfg, opts.force)?;
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let start = Instant::now();
    log::info!("running {}", stage.name());
    let params = match stage {
        Stage::Fetch => fetch(cfg)?,
        Stage::Process => process(cfg)?,
        Stage::Matrix => matrix(cfg)?,
        Stage::Embed => embed(cfg)?,
        Stage::Distances => distances(cfg)?,
        Stage::Graph => graph(cfg)?,
        Stage::Report => report(cfg)?,
    };
    let inputs: Vec<PathBuf> = stage.inputs(cfg).into_iter().map(|(p, _)| p).collect();
    let manifest = Manifest {
        stage: stage.name().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: hash_files(&inputs)?,
        outputs: hash_files(&stage.outputs(cfg))?,
        params,
        seed: cfg.seed,
    };
    write_json(&manifest_path(&cfg.output_dir, stage.name()), &manifest)?;
    write_json(
        &timings_path(&cfg.output_dir, stage.name()),
        &Timings {
            stage: stage.name().to_string(),
            elapsed_ms: start.elapsed().as_millis(),
            finished_at: chrono::Utc::now().to_rfc3339(),
        },
    )?;
    log::info!("{} finished in {:.2?}", stage.name(), start.elapsed());
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn fetch(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    let queries = cfg.queries.as_ref().context("`queries` is not set in the configuration")?;
    fetch_queries(queries, &cfg.corpus, &cfg.fetch)?;
    Ok(serde_json::json!({ "queries": file_key(queries), "fetch": serde_json::to_value(&cfg.fetch)? }))
}

/// Retrieves every query in `queries` and writes the corpus to `out`.
pub fn fetch_queries(queries: &Path, out: &Path, fc: &crate::config::FetchConfig) -> Result<Corpus> {
    let queries = parse_query_file(queries)?;
    let mut client_cfg = atlas_biblio::ClientConfig::from_env();
    if let Some(url) = &fc.base_url {
        client_cfg.base_url = url.clone();
    }
    client_cfg.rate = fc.rate;
    client_cfg.retries = fc.retries;
    client_cfg.page_size = fc.page_size;
    let client = atlas_biblio::EutilsClient::live(client_cfg);
    let corpus = client.fetch_corpus(&queries, chrono::Utc::now())?;
    persist_corpus(&corpus, out)?;
    log::info!("wrote {} records for {} authors", corpus.records.len(), corpus.authors.len());
    Ok(corpus)
}

fn tokenizer(cfg: &PipelineConfig) -> Result<Tokenizer> {
    let exclusions = match &cfg.exclusions {
        Some(p) => load_exclusions(p)?,
        None => default_exclusions(),
    };
    Ok(Tokenizer::new(exclusions))
}

fn read_vocabulary(cfg: &PipelineConfig) -> Result<Vocabulary> {
    Ok(Vocabulary::read_csv(open(&cfg.out(VOCABULARY))?)?)
}

fn process(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    let corpus = load_corpus(&cfg.corpus)?;
    let docs = tokenizer(cfg)?.tokenize_all(&corpus.records);
    let vocab = build_vocabulary(&docs, cfg.min_count)?;
    let profiles = author_profiles(&corpus, &docs, &vocab)?;
    write_json(&cfg.out(TERMS), &docs)?;
    vocab.write_csv(create(&cfg.out(VOCABULARY))?)?;
    write_json(&cfg.out(PROFILES), &profiles)?;

    let fit = match fit_vocabulary(&vocab) {
        Ok(fit) => Some(fit),
        Err(e) => {
            log::warn!("rank-frequency fit failed: {e}");
            None
        }
    };
    write_json(&cfg.out(ZIPF_JSON), &fit)?;
    let freqs: Vec<f64> = vocab.counts().iter().map(|&c| c as f64).collect();
    let mut w = csv::Writer::from_writer(create(&cfg.out(ZIPF_CSV))?);
    w.write_record(["rank", "observed", "fitted"])?;
    for (i, obs) in freqs.iter().enumerate() {
        let fitted = fit.map(|f| f.predict(i + 1).to_string()).unwrap_or_default();
        w.write_record([(i + 1).to_string(), obs.to_string(), fitted])?;
    }
    w.flush()?;

    let top = vocab.truncate(cfg.vocab_size);
    log::info!(
        "{} documents, {} terms; top {} cover {:.1}% of term occurrences; {} empty abstracts",
        docs.len(),
        vocab.len(),
        top.len(),
        100.0 * top.total() as f64 / vocab.total().max(1) as f64,
        corpus.empty_abstracts()
    );
    Ok(serde_json::json!({
        "exclusions": cfg.exclusions.as_deref().map(file_key),
        "min_count": cfg.min_count,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocEntry {
    pub doc: usize,
    pub record_id: String,
    pub author_id: String,
}

/// Sidecar of the matrix triplet file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixMeta {
    pub n_docs: usize,
    pub n_terms: usize,
    /// Documents left with no retained term.
    pub empty_docs: Vec<usize>,
    /// Rows kept after deduplication.
    pub docs: Vec<DocEntry>,
}

fn matrix(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    let corpus = load_corpus(&cfg.corpus)?;
    let docs: Vec<TermList> = read_json(&cfg.out(TERMS))?;
    let top = read_vocabulary(cfg)?.truncate(cfg.vocab_size);
    let (x, empty_docs) = build_matrix(&docs, &top)?;
    if !empty_docs.is_empty() {
        log::warn!("{} documents have no retained terms and were dropped", empty_docs.len());
    }
    let doc_author = x.rows().iter().map(|r| (r.doc_index, corpus.records[r.doc_index].author_id.clone())).collect();
    let (x, report): (SparseDocTermMatrix, DedupReport) = dedupe_rows(&x.with_doc_authors(doc_author));
    log::info!(
        "dropped {} duplicate rows ({:.1}%)",
        report.dropped_rows.len(),
        100.0 * report.fraction_dropped
    );
    x.write_csv(create(&cfg.out(MATRIX))?)?;
    let meta = MatrixMeta {
        n_docs: x.n_docs(),
        n_terms: x.n_terms(),
        empty_docs,
        docs: x
            .rows()
            .iter()
            .map(|r| DocEntry {
                doc: r.doc_index,
                record_id: corpus.records[r.doc_index].record_id.clone(),
                author_id: corpus.records[r.doc_index].author_id.clone(),
            })
            .collect(),
    };
    write_json(&cfg.out(MATRIX_META), &meta)?;
    write_json(&cfg.out(DEDUP), &report)?;
    Ok(serde_json::json!({ "vocab_size": cfg.vocab_size }))
}

fn read_matrix(cfg: &PipelineConfig) -> Result<SparseDocTermMatrix> {
    let meta: MatrixMeta = read_json(&cfg.out(MATRIX_META))?;
    Ok(SparseDocTermMatrix::read_csv(open(&cfg.out(MATRIX))?, meta.n_docs, meta.n_terms)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub dim: usize,
    pub seed: u64,
    pub n_points: usize,
    pub excluded_terms: Vec<String>,
    pub trustworthiness: Option<f64>,
}

/// Largest term count for which trustworthiness is scored.
const TRUST_LIMIT: usize = 3000;

fn embed(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    let top = read_vocabulary(cfg)?.truncate(cfg.vocab_size);
    let x = read_matrix(cfg)?;
    let td = pairwise_term_distances::<f64>(&x, &top)?;
    let params = cfg.umap_params();
    let emb = umap_embed(&td.matrix, &params)?;
    let n = emb.len();
    let k = params.n_neighbors.min(n.saturating_sub(1));
    let trust = (n <= TRUST_LIMIT && 3 * k + 2 <= 2 * n)
        .then(|| trustworthiness(&td.matrix, &emb, k))
        .transpose()?;
    emb.write_csv(create(&cfg.out(EMBEDDING))?, &top)?;
    let meta = EmbeddingMeta {
        dim: emb.dim,
        seed: emb.seed,
        n_points: n,
        excluded_terms: td.excluded.iter().filter_map(|&r| top.term(r).map(str::to_string)).collect(),
        trustworthiness: trust,
    };
    write_json(&cfg.out(EMBEDDING_META), &meta)?;
    Ok(serde_json::to_value(&params)?)
}

fn distances(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    let top = read_vocabulary(cfg)?.truncate(cfg.vocab_size);
    let profiles: Vec<AuthorProfile> = read_json(&cfg.out(PROFILES))?;
    let emb = Embedding::read_csv(open(&cfg.out(EMBEDDING))?, cfg.seed)?;
    let patterns = profiles.iter().map(|p| make_point_pattern(p, &emb)).collect::<atlas_core::Result<Vec<_>>>()?;
    let params = cfg.transport.params();
    let w = match cfg.transport.method {
        TransportMethod::Exact => pairwise_author_distances(&patterns, &params, cfg.transport.threads)?,
        TransportMethod::Sinkhorn => pairwise_sinkhorn_distances(&patterns, &params, cfg.transport.threads)?,
    };
    w.write_square_csv(create(&cfg.out(AUTHOR_DISTANCES))?)?;
    w.write_binary(create(&cfg.out(AUTHOR_DISTANCES_BIN))?)?;
    write_json(&cfg.out(AUTHOR_DISTANCES_HEADER), &w.header())?;

    let ids: Vec<String> = profiles.iter().map(|p| p.author_id.clone()).collect();
    let direct = DistanceMatrix::try_from_fn(profiles.len(), MatrixKind::Author, ids, |i, j| {
        direct_author_angular_distance(&profiles[i], &profiles[j], &top)
    })?;
    direct.write_square_csv(create(&cfg.out(DIRECT_DISTANCES))?)?;
    Ok(serde_json::to_value(&cfg.transport)?)
}

fn read_author_matrix(path: &Path) -> Result<DistanceMatrix> {
    Ok(DistanceMatrix::read_square_csv(open(path)?, MatrixKind::Author)?)
}

/// Graph stage result, consumed by the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionFile {
    pub ids: Vec<String>,
    pub epsilon: f64,
    pub k: usize,
    pub edges: Vec<(usize, usize)>,
    pub assignment: Vec<usize>,
    pub modularity: f64,
    pub best_replicate: usize,
    pub cluster_count_frequency: BTreeMap<usize, usize>,
    pub replicate_modularities: Vec<f64>,
}

fn author_groups(cfg: &PipelineConfig, ids: &[String]) -> Result<Option<Vec<String>>> {
    match &cfg.groups {
        Some(path) => Ok(Some(labels_for(ids, &read_groups(path)?))),
        None => Ok(None),
    }
}

fn graph(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    let corpus = load_corpus(&cfg.corpus)?;
    let w = read_author_matrix(&cfg.out(AUTHOR_DISTANCES))?;
    let ag = AuthorGraph::from_distances(&w, cfg.graph.k)?;
    let summary = louvain_replicates(&ag.graph, cfg.seed, cfg.graph.louvain_replicates);
    let groups = author_groups(cfg, &ag.ids)?;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in &corpus.records {
        *counts.entry(r.author_id.as_str()).or_insert(0) += 1;
    }
    let names: HashMap<&str, &str> =
        corpus.authors.iter().map(|a| (a.author_id.as_str(), a.display_name.as_str())).collect();
    let attrs: Vec<VertexAttributes> = ag
        .ids
        .iter()
        .enumerate()
        .map(|(v, id)| VertexAttributes {
            author_id: id.clone(),
            display_name: names.get(id.as_str()).copied().unwrap_or(id).to_string(),
            group: groups.as_ref().map(|g| g[v].clone()),
            cluster: Some(summary.best.assignment[v]),
            abstract_count: counts.get(id.as_str()).copied().unwrap_or(0),
        })
        .collect();
    fs::write(cfg.out(GRAPHML), to_graphml(&ag.graph, &attrs)?)?;
    fs::write(cfg.out(DOT), to_dot(&ag.graph, &attrs)?)?;
    let part = PartitionFile {
        ids: ag.ids.clone(),
        epsilon: ag.epsilon,
        k: ag.k,
        edges: ag.graph.edges().collect(),
        assignment: summary.best.assignment.clone(),
        modularity: summary.best.modularity,
        best_replicate: summary.best_replicate,
        cluster_count_frequency: summary.cluster_count_frequency,
        replicate_modularities: summary.modularities,
    };
    write_json(&cfg.out(PARTITION), &part)?;
    log::info!(
        "epsilon {:.4}, {} edges, {} clusters, Q = {:.4}",
        part.epsilon,
        part.edges.len(),
        summary.best.n_communities(),
        part.modularity
    );
    Ok(serde_json::json!({ "graph": serde_json::to_value(&cfg.graph)?, "groups": cfg.groups.as_deref().map(file_key) }))
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexStats {
    pub author_id: String,
    pub cluster: usize,
    pub group: Option<String>,
    pub degree: usize,
    pub closeness: Closeness,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectGraphComparison {
    pub epsilon: f64,
    pub n_edges: usize,
    /// Closeness in the direct-distance graph minus the transport graph,
    /// over vertices of the transport graph's giant component.
    pub closeness_wilcoxon: Option<WilcoxonResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermPairTest {
    pub terms: (String, String),
    pub table: ContingencyTable2x2,
    pub result: FisherResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub epsilon: f64,
    pub k: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub degree: DegreeStats,
    pub modularity: f64,
    pub n_clusters: usize,
    pub cluster_count_frequency: BTreeMap<usize, usize>,
    pub vertices: Vec<VertexStats>,
    pub within_cluster_distance: BTreeMap<String, GroupDistance>,
    pub within_group_distance: Option<BTreeMap<String, GroupDistance>>,
    /// Null over the external groups when given, otherwise over clusters.
    pub permutation_null: BTreeMap<String, NullSummary>,
    pub null_replicates: usize,
    pub adjusted_rand_index: Option<f64>,
    pub distance_correlation: SpearmanResult,
    pub direct_graph: Option<DirectGraphComparison>,
    pub term_pairs: Vec<TermPairTest>,
}

/// Presence cross-tab of two terms over the deduplicated documents.
pub fn term_pair_table(x: &SparseDocTermMatrix, rank_a: u32, rank_b: u32) -> ContingencyTable2x2 {
    let mut t = ContingencyTable2x2::new(0, 0, 0, 0);
    for row in x.rows() {
        let a = row.terms.binary_search(&rank_a).is_ok();
        let b = row.terms.binary_search(&rank_b).is_ok();
        match (a, b) {
            (true, true) => t.a += 1,
            (true, false) => t.b += 1,
            (false, true) => t.c += 1,
            (false, false) => t.d += 1,
        }
    }
    t
}

fn report(cfg: &PipelineConfig) -> Result<serde_json::Value> {
    let part: PartitionFile = read_json(&cfg.out(PARTITION))?;
    let g = UndirectedGraph::from_edges(part.ids.len(), part.edges.iter().copied());
    let profiles: Vec<AuthorProfile> = read_json(&cfg.out(PROFILES))?;
    let by_id: HashMap<&str, &AuthorProfile> = profiles.iter().map(|p| (p.author_id.as_str(), p)).collect();
    let ordered: Vec<AuthorProfile> = part
        .ids
        .iter()
        .map(|id| by_id.get(id.as_str()).map(|p| (*p).clone()).with_context(|| format!("no profile for `{id}`")))
        .collect::<Result<_>>()?;
    let clusters = characteristic_words(&ordered, &part.assignment, cfg.graph.top_words, cfg.graph.min_word_count)?;
    write_cluster_csv(create(&cfg.out(CLUSTERS))?, &clusters)?;

    let groups = author_groups(cfg, &part.ids)?;
    let cluster_labels: Vec<String> = part.assignment.iter().map(|c| c.to_string()).collect();
    let closeness = closeness_centrality(&g);
    let vertices = part
        .ids
        .iter()
        .enumerate()
        .map(|(v, id)| VertexStats {
            author_id: id.clone(),
            cluster: part.assignment[v],
            group: groups.as_ref().map(|gr| gr[v].clone()),
            degree: g.degree(v),
            closeness: closeness[v],
        })
        .collect();
    let null_labels = groups.as_ref().unwrap_or(&cluster_labels);
    let null_reps = cfg.graph.null_replicates.max(1);

    let w = read_author_matrix(&cfg.out(AUTHOR_DISTANCES))?;
    let direct = read_author_matrix(&cfg.out(DIRECT_DISTANCES))?;
    let comparison = compare_distances(&w, &direct)?;
    write_comparison_csv(create(&cfg.out(COMPARISON))?, &comparison.rows)?;

    let direct_graph = match AuthorGraph::from_distances(&direct, cfg.graph.k) {
        Ok(dg) => {
            let dc = closeness_centrality(&dg.graph);
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for v in 0..g.n_vertices() {
                if let (true, Some(a), Some(b)) = (closeness[v].in_giant_component, dc[v].value, closeness[v].value) {
                    xs.push(a);
                    ys.push(b);
                }
            }
            Some(DirectGraphComparison {
                epsilon: dg.epsilon,
                n_edges: dg.graph.n_edges(),
                closeness_wilcoxon: wilcoxon_signed_rank(&xs, &ys).ok(),
            })
        }
        Err(e) => {
            log::warn!("direct-distance graph unavailable: {e}");
            None
        }
    };

    let mut term_pairs = Vec::new();
    if !cfg.report_term_pairs().is_empty() {
        let top = read_vocabulary(cfg)?.truncate(cfg.vocab_size);
        let x = read_matrix(cfg)?;
        for (a, b) in cfg.report_term_pairs() {
            let (Some(ra), Some(rb)) = (top.rank(a), top.rank(b)) else {
                log::warn!("term pair ({a}, {b}) not in the vocabulary; skipped");
                continue;
            };
            let table = term_pair_table(&x, ra as u32, rb as u32);
            match fisher_exact(table) {
                Ok(result) => term_pairs.push(TermPairTest {
                    terms: (a.clone(), b.clone()),
                    table,
                    result,
                }),
                Err(e) => log::warn!("term pair ({a}, {b}): {e}"),
            }
        }
    }

    let stats = StatsReport {
        epsilon: part.epsilon,
        k: part.k,
        n_vertices: g.n_vertices(),
        n_edges: g.n_edges(),
        degree: degree_stats(&g),
        modularity: part.modularity,
        n_clusters: part.assignment.iter().copied().max().map_or(0, |m| m + 1),
        cluster_count_frequency: part.cluster_count_frequency.clone(),
        vertices,
        within_cluster_distance: within_cluster_distance(&g, &cluster_labels, Unreachable::Exclude)?,
        within_group_distance: groups
            .as_ref()
            .map(|gr| within_cluster_distance(&g, gr, Unreachable::Exclude))
            .transpose()?,
        permutation_null: permutation_null(&g, null_labels, null_reps, cfg.seed)?,
        null_replicates: null_reps,
        adjusted_rand_index: groups.as_ref().map(|gr| adjusted_rand_index(&part.assignment, gr)).transpose()?,
        distance_correlation: comparison.spearman,
        direct_graph,
        term_pairs,
    };
    write_json(&cfg.out(STATS), &stats)?;
    Ok(serde_json::json!({ "graph": serde_json::to_value(&cfg.graph)?, "term_pairs": cfg.report_term_pairs() }))
}
