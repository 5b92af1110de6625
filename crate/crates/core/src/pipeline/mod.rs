//! Pipeline orchestration: stage execution, persistence of every
//! intermediate artifact, and the MANIFEST that records completeness.
//!
//! Stages run in a fixed order (ingest, features, similarity, graph,
//! analyze, communities, report); running through stage S writes the
//! output files of S and of everything before it. A failed stage leaves
//! the files written so far in place and marks the MANIFEST as failed.

pub mod config;
pub mod report;

pub use config::PipelineConfig;
pub use report::{communities_json, report_json, CommunityInfo, CommunityReport, NetworkReport};

use crate::community::louvain;
use crate::corpus::{self, Corpus};
use crate::features::{
    aggregate_poem_embeddings, load_embeddings, meter_profile, pca_fit, pca_transform, poet_idf,
    stylistic_feature_matrix, tfidf_fit, validate_poem_keys, zscore_columns, MeterProfile,
    PcaTarget, StylisticFeatureVector, DEFAULT_MAX_FEATURES, STYLISTIC_FIELDS,
};
use crate::graph::{
    build_graph, calibrate_threshold, connected_components, degree_stats, density, edges_tsv,
    edge_weight_histogram, graphml, InfluenceGraph,
};
use crate::metrics::{
    average_clustering, average_shortest_path_with, centrality_table_with,
    pearson_correlation_matrix, CentralityOptions, CentralityTable, CorrelationMatrix,
    METRIC_NAMES,
};
use crate::similarity::{
    fuse, lexical_matrix, meter_matrix, semantic_matrix, stylistic_matrix, thematic_matrix,
    FusionParams, SimilarityMatrix,
};
use crate::util::{csv_field, sig12};
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("stage {stage} failed: {message}")]
    Stage {
        stage: &'static str,
        message: String,
    },
}

fn stage_err<E: std::fmt::Display>(stage: &'static str) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError::Stage {
        stage,
        message: e.to_string(),
    }
}

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Features,
    Similarity,
    Graph,
    Analyze,
    Communities,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Features,
        Stage::Similarity,
        Stage::Graph,
        Stage::Analyze,
        Stage::Communities,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Features => "features",
            Stage::Similarity => "similarity",
            Stage::Graph => "graph",
            Stage::Analyze => "analyze",
            Stage::Communities => "communities",
            Stage::Report => "report",
        }
    }
}

/// What a (partial) run produced.
#[derive(Debug)]
pub struct StageOutcome {
    /// File names written into the output directory, in write order.
    pub files: Vec<String>,
    pub warnings: Vec<String>,
    /// Present only when the report stage ran.
    pub report: Option<NetworkReport>,
}

struct OutputDir<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl OutputDir<'_> {
    fn write(&mut self, name: &str, content: &str) -> Result<(), PipelineError> {
        fs::write(self.dir.join(name), content)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Run the full pipeline and return the network report.
pub fn run(cfg: &PipelineConfig) -> Result<NetworkReport, PipelineError> {
    let outcome = run_to_stage(cfg, Stage::Report)?;
    Ok(outcome.report.expect("report stage ran"))
}

/// Run the pipeline through `through`, writing all artifacts of the
/// executed stages plus a MANIFEST.
pub fn run_to_stage(cfg: &PipelineConfig, through: Stage) -> Result<StageOutcome, PipelineError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let mut out = OutputDir {
        dir: &cfg.output_dir,
        files: Vec::new(),
    };
    let mut warnings: Vec<String> = Vec::new();
    let mut executed: Vec<&'static str> = Vec::new();
    let result = run_stages(cfg, through, &mut out, &mut warnings, &mut executed);
    let manifest = render_manifest(&result, &executed, &warnings, &out.files);
    fs::write(cfg.output_dir.join("MANIFEST"), manifest)?;
    result.map(|report| StageOutcome {
        files: out.files,
        warnings,
        report,
    })
}

fn run_stages(
    cfg: &PipelineConfig,
    through: Stage,
    out: &mut OutputDir,
    warnings: &mut Vec<String>,
    executed: &mut Vec<&'static str>,
) -> Result<Option<NetworkReport>, PipelineError> {
    // ingest: load, normalize, filter.
    let corpus = corpus::load_corpus(&cfg.corpus_path).map_err(stage_err("ingest"))?;
    let corpus = corpus::normalize_corpus(corpus).map_err(stage_err("ingest"))?;
    let corpus = corpus::filter_poets(corpus, cfg.min_lines);
    executed.push("ingest");
    out.write("nodes.csv", &nodes_csv(&corpus))?;
    if through == Stage::Ingest {
        return Ok(None);
    }

    // features
    let features = stylistic_feature_matrix(&corpus).map_err(stage_err("features"))?;
    let profiles: Vec<MeterProfile> = corpus.poets.iter().map(meter_profile).collect();
    executed.push("features");
    out.write("features.csv", &features_csv(&corpus, &features))?;
    if through == Stage::Features {
        return Ok(None);
    }

    // similarity: the five matrices plus fusion.
    let ids = corpus.poet_ids();
    let n = ids.len();
    let mut fusion_weights = cfg.fusion.weights;

    let semantic = match &cfg.word_embeddings_path {
        Some(path) => {
            let load = load_embeddings(path).map_err(stage_err("similarity"))?;
            if load.duplicates > 0 {
                warnings.push(format!(
                    "word embeddings: {} duplicate keys overwritten (last wins)",
                    load.duplicates
                ));
            }
            let idf = poet_idf(&corpus);
            let (matrix, mut semantic_warnings) =
                semantic_matrix(&corpus, &load.table, &idf, &cfg.semantic)
                    .map_err(stage_err("similarity"))?;
            warnings.append(&mut semantic_warnings);
            matrix
        }
        None => {
            warnings.push(
                "word embeddings not provided; semantic dimension zeroed and its fusion weight redistributed"
                    .into(),
            );
            fusion_weights[0] = 0.0;
            SimilarityMatrix::zero(ids.clone())
        }
    };

    let stylistic = if n == 1 {
        SimilarityMatrix::zero(ids.clone())
    } else {
        let rows: Vec<Vec<f64>> = features.iter().map(StylisticFeatureVector::to_row).collect();
        let z = zscore_columns(&rows).map_err(stage_err("similarity"))?;
        let model =
            pca_fit(&z, PcaTarget::VarianceFraction(0.95)).map_err(stage_err("similarity"))?;
        let reduced = pca_transform(&model, &z);
        stylistic_matrix(ids.clone(), &reduced).map_err(stage_err("similarity"))?
    };

    let thematic = match &cfg.poem_embeddings_path {
        Some(path) => {
            let load = load_embeddings(path).map_err(stage_err("similarity"))?;
            if load.duplicates > 0 {
                warnings.push(format!(
                    "poem embeddings: {} duplicate keys overwritten (last wins)",
                    load.duplicates
                ));
            }
            validate_poem_keys(&load.table, &corpus).map_err(stage_err("similarity"))?;
            let mut present_ids = Vec::new();
            let mut vectors = Vec::new();
            for poet in &corpus.poets {
                match aggregate_poem_embeddings(poet, &load.table) {
                    Ok(v) => {
                        present_ids.push(poet.poet_id.clone());
                        vectors.push(v);
                    }
                    Err(_) => warnings.push(format!(
                        "poet \"{}\" has no embedded poems; thematic similarity set to 0",
                        poet.poet_id
                    )),
                }
            }
            if present_ids.is_empty() {
                warnings.push("no poet has poem embeddings; thematic dimension zeroed".into());
                SimilarityMatrix::zero(ids.clone())
            } else if present_ids.len() == 1 {
                SimilarityMatrix {
                    poet_ids: present_ids,
                    values: vec![vec![1.0]],
                }
                .expand(&ids)
            } else {
                // 64 thematic components, bounded by the data rank.
                let k = 64.min(present_ids.len() - 1).min(load.table.dim);
                let model = pca_fit(&vectors, PcaTarget::Components(k))
                    .map_err(stage_err("similarity"))?;
                let reduced = pca_transform(&model, &vectors);
                thematic_matrix(present_ids, &reduced)
                    .map_err(stage_err("similarity"))?
                    .expand(&ids)
            }
        }
        None => {
            warnings.push(
                "poem embeddings not provided; thematic dimension zeroed and its fusion weight redistributed"
                    .into(),
            );
            fusion_weights[2] = 0.0;
            SimilarityMatrix::zero(ids.clone())
        }
    };

    for (poet, profile) in corpus.poets.iter().zip(&profiles) {
        if profile.is_empty() {
            warnings.push(format!(
                "poet \"{}\" has no meter labels; meter similarity is 0",
                poet.poet_id
            ));
        }
    }
    let meter = meter_matrix(ids.clone(), &profiles);

    let tdm = tfidf_fit(&corpus, DEFAULT_MAX_FEATURES).map_err(stage_err("similarity"))?;
    let lexical = lexical_matrix(&tdm);

    out.write("similarity_semantic.csv", &semantic.to_csv())?;
    out.write("similarity_stylistic.csv", &stylistic.to_csv())?;
    out.write("similarity_thematic.csv", &thematic.to_csv())?;
    out.write("similarity_meter.csv", &meter.to_csv())?;
    out.write("similarity_lexical.csv", &lexical.to_csv())?;

    let weight_total: f64 = fusion_weights.iter().sum();
    if weight_total <= 0.0 {
        return Err(PipelineError::Stage {
            stage: "similarity",
            message: "all fusion weights are zero after dropping missing dimensions".into(),
        });
    }
    if (weight_total - 1.0).abs() > 1e-12 {
        for w in &mut fusion_weights {
            *w /= weight_total;
        }
    }
    let matrices = [semantic, stylistic, thematic, meter, lexical];
    let fused = fuse(
        &matrices,
        &FusionParams {
            weights: fusion_weights,
        },
    )
    .map_err(stage_err("similarity"))?;
    executed.push("similarity");
    out.write("fused.csv", &fused.to_csv())?;
    if through == Stage::Similarity {
        return Ok(None);
    }

    // graph
    let tau = match (cfg.threshold, cfg.target_density) {
        (Some(t), _) => t,
        (None, Some(d)) => {
            let t = calibrate_threshold(&fused, d);
            warnings.push(format!(
                "calibrated threshold {} for target density {}",
                sig12(t),
                sig12(d)
            ));
            t
        }
        (None, None) => 0.0,
    };
    let g = build_graph(&fused, tau, cfg.top_k).map_err(stage_err("graph"))?;
    executed.push("graph");
    out.write("edges.tsv", &edges_tsv(&g))?;
    out.write("graph.graphml", &graphml(&g))?;
    out.write("degree_hist.csv", &degree_hist_csv(&g))?;
    out.write(
        "weight_hist.csv",
        &weight_hist_csv(&g, cfg.histogram_bins),
    )?;
    if through == Stage::Graph {
        return Ok(None);
    }

    // analyze
    let options = CentralityOptions {
        distance_mode: cfg.distance_mode,
        katz_alpha: cfg.katz_alpha,
        katz_beta: cfg.katz_beta,
    };
    let table = centrality_table_with(&g, &options).map_err(stage_err("analyze"))?;
    let correlation = if n >= 2 {
        pearson_correlation_matrix(&table).map_err(stage_err("analyze"))?
    } else {
        warnings.push("fewer than 2 nodes; correlation matrix is the identity by convention".into());
        let mut values = [[0.0; 5]; 5];
        for (i, row) in values.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        CorrelationMatrix {
            values,
            zero_variance: [true; 5],
        }
    };
    executed.push("analyze");
    out.write("centrality.csv", &centrality_csv(&table))?;
    out.write("correlation.csv", &correlation_csv(&correlation))?;
    if through == Stage::Analyze {
        return Ok(None);
    }

    // communities
    let (assignment, modularity) = if g.edge_count() == 0 {
        warnings.push(
            "graph has no edges; every node is its own community and modularity is undefined"
                .into(),
        );
        ((0..n).collect::<Vec<_>>(), None)
    } else {
        let partition = louvain(&g, cfg.louvain_seed, 1e-12).map_err(stage_err("communities"))?;
        (partition.assignment, Some(partition.modularity))
    };
    let community_report = build_community_report(&g, &fused, &assignment, modularity);
    executed.push("communities");
    out.write("communities.csv", &communities_csv(&g, &assignment))?;
    out.write(
        "communities_summary.json",
        &communities_json(&community_report),
    )?;
    if through == Stage::Communities {
        return Ok(None);
    }

    // report
    let components = connected_components(&g);
    let lcc_size = components.first().map_or(0, Vec::len);
    let lcc_avg_shortest_path = if lcc_size >= 2 {
        Some(
            average_shortest_path_with(&g, &components[0], cfg.distance_mode)
                .map_err(stage_err("report"))?,
        )
    } else {
        None
    };
    let top_poets = (0..5)
        .map(|metric| top_entries(&table, metric, 5))
        .collect();
    let network_report = NetworkReport {
        node_count: g.n(),
        edge_count: g.edge_count(),
        density: density(&g),
        component_count: components.len(),
        lcc_size,
        lcc_avg_shortest_path,
        avg_clustering: average_clustering(&g),
        degree_stats: degree_stats(&g),
        top_poets,
        correlation,
        community: community_report,
    };
    executed.push("report");
    out.write("report.json", &report_json(&network_report))?;
    Ok(Some(network_report))
}

fn top_entries(table: &CentralityTable, metric: usize, k: usize) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = table
        .poet_ids
        .iter()
        .cloned()
        .zip(table.column(metric))
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked.truncate(k);
    ranked
}

fn build_community_report(
    g: &InfluenceGraph,
    fused: &SimilarityMatrix,
    assignment: &[usize],
    modularity: Option<f64>,
) -> CommunityReport {
    let count = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (node, &c) in assignment.iter().enumerate() {
        members[c].push(node);
    }
    let communities = members
        .into_iter()
        .enumerate()
        .map(|(community_id, nodes)| {
            let mut sum = 0.0;
            let mut pairs = 0usize;
            for (i, &a) in nodes.iter().enumerate() {
                for &b in &nodes[(i + 1)..] {
                    sum += fused.get(a, b);
                    pairs += 1;
                }
            }
            CommunityInfo {
                community_id,
                size: nodes.len(),
                members: nodes
                    .iter()
                    .map(|&v| g.node_ids()[v].clone())
                    .collect(),
                mean_internal_similarity: if pairs > 0 { sum / pairs as f64 } else { 0.0 },
            }
        })
        .collect();
    CommunityReport {
        modularity,
        communities,
    }
}

fn nodes_csv(corpus: &Corpus) -> String {
    let mut out = String::from("poet_id,name,birth_year_hijri,poem_count,verse_count\n");
    for poet in &corpus.poets {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&poet.poet_id),
            csv_field(&poet.name),
            poet.birth_year_hijri
                .map_or(String::new(), |y| y.to_string()),
            poet.poems.len(),
            poet.verse_count()
        ));
    }
    out
}

fn features_csv(corpus: &Corpus, features: &[StylisticFeatureVector]) -> String {
    let mut out = String::from("poet_id");
    for field in STYLISTIC_FIELDS {
        out.push(',');
        out.push_str(field);
    }
    out.push_str(",pos_tagged\n");
    for (poet, f) in corpus.poets.iter().zip(features) {
        out.push_str(&csv_field(&poet.poet_id));
        for value in f.to_row() {
            out.push(',');
            out.push_str(&sig12(value));
        }
        out.push_str(if f.pos_tagged { ",true\n" } else { ",false\n" });
    }
    out
}

fn centrality_csv(table: &CentralityTable) -> String {
    let mut out = String::from("poet_id,degree,betweenness,closeness,eigenvector,katz\n");
    for (id, row) in table.poet_ids.iter().zip(&table.rows) {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(id),
            sig12(row.degree),
            sig12(row.betweenness),
            sig12(row.closeness),
            sig12(row.eigenvector),
            sig12(row.katz)
        ));
    }
    out
}

fn correlation_csv(correlation: &CorrelationMatrix) -> String {
    let mut out = String::from("metric");
    for name in METRIC_NAMES {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (name, row) in METRIC_NAMES.iter().zip(&correlation.values) {
        out.push_str(name);
        for v in row {
            out.push(',');
            out.push_str(&sig12(*v));
        }
        out.push('\n');
    }
    out
}

fn communities_csv(g: &InfluenceGraph, assignment: &[usize]) -> String {
    let mut out = String::from("poet_id,community_id\n");
    for (id, c) in g.node_ids().iter().zip(assignment) {
        out.push_str(&format!("{},{}\n", csv_field(id), c));
    }
    out
}

fn degree_hist_csv(g: &InfluenceGraph) -> String {
    let max_degree = (0..g.n()).map(|v| g.degree(v)).max().unwrap_or(0);
    let mut counts = vec![0usize; max_degree + 1];
    for v in 0..g.n() {
        counts[g.degree(v)] += 1;
    }
    let mut out = String::from("degree,count\n");
    for (degree, count) in counts.iter().enumerate() {
        out.push_str(&format!("{degree},{count}\n"));
    }
    out
}

fn weight_hist_csv(g: &InfluenceGraph, bins: usize) -> String {
    let mut out = String::from("bin_lower,bin_upper,count\n");
    for (lo, hi, count) in edge_weight_histogram(g, bins) {
        out.push_str(&format!("{},{},{count}\n", sig12(lo), sig12(hi)));
    }
    out
}

fn render_manifest(
    result: &Result<Option<NetworkReport>, PipelineError>,
    executed: &[&'static str],
    warnings: &[String],
    files: &[String],
) -> String {
    let mut out = String::new();
    match result {
        Ok(_) => out.push_str("status = complete\n"),
        Err(e) => {
            out.push_str("status = failed\n");
            let stage = match e {
                PipelineError::Stage { stage, .. } => stage,
                PipelineError::Config(_) => "config",
                PipelineError::Io(_) => "io",
            };
            out.push_str(&format!("failed_stage = {stage}\n"));
            out.push_str(&format!("error = {e}\n"));
        }
    }
    out.push_str(&format!("stages = {}\n", executed.join(",")));
    for w in warnings {
        out.push_str(&format!("warning = {w}\n"));
    }
    let mut sorted: Vec<&String> = files.iter().collect();
    sorted.sort();
    for f in sorted {
        out.push_str(&format!("file = {f}\n"));
    }
    out
}
