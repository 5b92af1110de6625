//! Command-line driver for the versegraph pipeline.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use versegraph::pipeline::{run_to_stage, PipelineConfig, Stage};

#[derive(Parser)]
#[command(
    name = "versegraph",
    version,
    about = "Corpus-to-influence-graph analytics: similarity matrices, graph construction, and network analysis"
)]
struct Cli {
    /// Pipeline configuration file (key = value with [sections]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the output directory.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Override the community-detection seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the edge-inclusion threshold.
    #[arg(long, global = true, conflicts_with = "target_density")]
    threshold: Option<f64>,
    /// Calibrate the threshold so graph density approximates this value.
    #[arg(long = "target-density", global = true)]
    target_density: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Load, normalize, and filter the corpus (writes nodes.csv).
    Ingest,
    /// Extract per-poet features (writes features.csv).
    Features,
    /// Compute the five similarity matrices and their fusion.
    Similarity,
    /// Build the influence graph (edge list, GraphML, histograms).
    Graph,
    /// Compute centralities and their correlations.
    Analyze,
    /// Detect communities over the influence graph.
    Communities,
    /// Produce the full network report.
    Report,
    /// Run every stage.
    All,
}

impl Command {
    fn stage(self) -> Stage {
        match self {
            Command::Ingest => Stage::Ingest,
            Command::Features => Stage::Features,
            Command::Similarity => Stage::Similarity,
            Command::Graph => Stage::Graph,
            Command::Analyze => Stage::Analyze,
            Command::Communities => Stage::Communities,
            Command::Report | Command::All => Stage::Report,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(config_path) = &cli.config else {
        eprintln!("error: --config <path> is required");
        return ExitCode::FAILURE;
    };
    let mut cfg = match PipelineConfig::from_file(config_path) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Some(out) = &cli.output {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.louvain_seed = seed;
    }
    if let Some(threshold) = cli.threshold {
        cfg.threshold = Some(threshold);
        cfg.target_density = None;
    }
    if let Some(density) = cli.target_density {
        cfg.target_density = Some(density);
        cfg.threshold = None;
    }

    match run_to_stage(&cfg, cli.command.stage()) {
        Ok(outcome) => {
            for warning in &outcome.warnings {
                eprintln!("warning: {warning}");
            }
            println!(
                "wrote {} files to {}",
                outcome.files.len(),
                cfg.output_dir.display()
            );
            if let Some(report) = &outcome.report {
                println!(
                    "nodes: {}  edges: {}  density: {:.6}  components: {}  communities: {}",
                    report.node_count,
                    report.edge_count,
                    report.density,
                    report.component_count,
                    report.community.communities.len()
                );
                if let Some(q) = report.community.modularity {
                    println!("modularity: {q:.6}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
