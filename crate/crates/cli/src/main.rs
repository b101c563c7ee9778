use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use anyhow::{Context, Result};
use atlas_cli::compare::{compare_distances, write_comparison_csv};
use atlas_cli::config::{FetchConfig, PipelineConfig};
use atlas_cli::stages::{self, RunOptions, Stage};
use atlas_core::geometry::MatrixKind;
use atlas_core::DistanceMatrix;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "collab-atlas", version, about = "Maps research interests of an author list from their abstracts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StageArgs {
    /// Pipeline configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Continue when an input changed since its producing stage ran.
    #[arg(long)]
    force: bool,
    /// Run every upstream stage first.
    #[arg(long)]
    from_scratch: bool,
    /// Worker threads for the stage; overrides the configuration.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Retrieve abstracts for each author query.
    Fetch {
        /// CSV with columns author_id,display_name,query.
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Requests per second; defaults by API key presence.
        #[arg(long)]
        rate: Option<usize>,
        #[arg(long, default_value_t = 4)]
        retries: u32,
        #[arg(long, default_value_t = 100)]
        page_size: usize,
        #[arg(long)]
        base_url: Option<String>,
    },
    /// Tokenize, lemmatize and count terms.
    Process(StageArgs),
    /// Build the deduplicated document-term matrix.
    Matrix(StageArgs),
    /// Embed terms from their angular distances.
    Embed(StageArgs),
    /// Compute transport distances between authors.
    Distances(StageArgs),
    /// Build the author network and detect communities.
    Graph(StageArgs),
    /// Characteristic words and summary statistics.
    Report(StageArgs),
    /// Run the whole pipeline.
    Run(StageArgs),
    /// Rank-correlate two square author distance matrices.
    Compare {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
        /// Per-pair CSV output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_stage(stage: Stage, args: StageArgs) -> Result<()> {
    let mut cfg = PipelineConfig::load(&args.config)?;
    if let Some(t) = args.threads {
        cfg.threads = t;
        cfg.transport.threads = t;
    }
    let opts = RunOptions {
        force: args.force,
        from_scratch: args.from_scratch,
    };
    stages::run(stage, &cfg, opts)
}

fn read_matrix(path: &PathBuf) -> Result<DistanceMatrix> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(DistanceMatrix::read_square_csv(BufReader::new(f), MatrixKind::Author)?)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Fetch { queries, out, rate, retries, page_size, base_url } => {
            let fc = FetchConfig { base_url, rate, retries, page_size };
            stages::fetch_queries(&queries, &out, &fc)?;
            Ok(())
        }
        Command::Process(a) => run_stage(Stage::Process, a),
        Command::Matrix(a) => run_stage(Stage::Matrix, a),
        Command::Embed(a) => run_stage(Stage::Embed, a),
        Command::Distances(a) => run_stage(Stage::Distances, a),
        Command::Graph(a) => run_stage(Stage::Graph, a),
        Command::Report(a) => run_stage(Stage::Report, a),
        Command::Run(mut a) => {
            a.from_scratch = true;
            run_stage(Stage::Report, a)
        }
        Command::Compare { first, second, out } => {
            let cmp = compare_distances(&read_matrix(&first)?, &read_matrix(&second)?)?;
            if let Some(out) = out {
                let f = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
                write_comparison_csv(BufWriter::new(f), &cmp.rows)?;
            }
            println!("{}", serde_json::to_string_pretty(&cmp.spearman)?);
            Ok(())
        }
    }
}
