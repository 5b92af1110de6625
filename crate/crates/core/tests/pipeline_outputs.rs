//! End-to-end pipeline behavior: output files per stage, fallback and
//! failure handling, and self-consistency of the persisted report.

mod common;

use common::synthetic_fixture;
use std::fs;
use std::path::Path;
use versegraph::graph::{
    connected_components, degree_stats, density, InfluenceGraph,
};
use versegraph::metrics::{average_clustering, average_shortest_path};
use versegraph::pipeline::{run, run_to_stage, PipelineConfig, PipelineError, Stage};

fn three_poet_fixture(dir: &Path) -> PipelineConfig {
    let fixture = synthetic_fixture(dir, 3, 5);
    let mut cfg = PipelineConfig::new(fixture.corpus, dir.join("out"));
    cfg.word_embeddings_path = Some(fixture.word_embeddings);
    cfg.poem_embeddings_path = Some(fixture.poem_embeddings);
    cfg.min_lines = 1;
    cfg.threshold = Some(0.0);
    cfg.histogram_bins = 5;
    cfg
}

#[test]
fn full_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = three_poet_fixture(dir.path());
    let report = run(&cfg).unwrap();
    assert_eq!(report.node_count, 3);
    for name in [
        "nodes.csv",
        "features.csv",
        "similarity_semantic.csv",
        "similarity_stylistic.csv",
        "similarity_thematic.csv",
        "similarity_meter.csv",
        "similarity_lexical.csv",
        "fused.csv",
        "edges.tsv",
        "graph.graphml",
        "degree_hist.csv",
        "weight_hist.csv",
        "centrality.csv",
        "correlation.csv",
        "communities.csv",
        "communities_summary.json",
        "report.json",
        "MANIFEST",
    ] {
        assert!(
            cfg.output_dir.join(name).exists(),
            "missing output file {name}"
        );
    }
    let manifest = fs::read_to_string(cfg.output_dir.join("MANIFEST")).unwrap();
    assert!(manifest.starts_with("status = complete\n"));
    assert!(manifest
        .contains("stages = ingest,features,similarity,graph,analyze,communities,report"));
}

#[test]
fn stage_subcommands_write_partial_trees() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = three_poet_fixture(dir.path());

    let outcome = run_to_stage(&cfg, Stage::Ingest).unwrap();
    assert_eq!(outcome.files, vec!["nodes.csv"]);
    assert!(outcome.report.is_none());
    assert!(!cfg.output_dir.join("features.csv").exists());

    let outcome = run_to_stage(&cfg, Stage::Similarity).unwrap();
    assert!(outcome.files.contains(&"fused.csv".to_string()));
    assert!(!cfg.output_dir.join("edges.tsv").exists());

    let outcome = run_to_stage(&cfg, Stage::Graph).unwrap();
    assert!(outcome.files.contains(&"graph.graphml".to_string()));
    assert!(!cfg.output_dir.join("centrality.csv").exists());
}

#[test]
fn missing_word_embeddings_redistributes_weight() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = three_poet_fixture(dir.path());
    cfg.word_embeddings_path = None;
    let report = run(&cfg).unwrap();
    assert_eq!(report.node_count, 3);

    let manifest = fs::read_to_string(cfg.output_dir.join("MANIFEST")).unwrap();
    assert!(manifest.contains("warning = word embeddings not provided"));

    // The semantic matrix is still written, as the zero matrix.
    let semantic = fs::read_to_string(cfg.output_dir.join("similarity_semantic.csv")).unwrap();
    let m = versegraph::similarity::SimilarityMatrix::from_csv(&semantic).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(m.get(i, j), if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn stage_failure_marks_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = three_poet_fixture(dir.path());
    cfg.word_embeddings_path = Some(dir.path().join("no-such-file.vec"));
    let err = run(&cfg).unwrap_err();
    match &err {
        PipelineError::Stage { stage, .. } => assert_eq!(*stage, "similarity"),
        other => panic!("unexpected error {other:?}"),
    }
    let manifest = fs::read_to_string(cfg.output_dir.join("MANIFEST")).unwrap();
    assert!(manifest.starts_with("status = failed\n"));
    assert!(manifest.contains("failed_stage = similarity"));
    // Earlier artifacts are retained.
    assert!(cfg.output_dir.join("nodes.csv").exists());
    assert!(cfg.output_dir.join("features.csv").exists());
}

#[test]
fn threshold_of_one_yields_edgeless_graph_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = three_poet_fixture(dir.path());
    cfg.threshold = Some(1.0);
    let report = run(&cfg).unwrap();
    assert_eq!(report.edge_count, 0);
    assert_eq!(report.component_count, report.node_count);
    assert!(report.community.modularity.is_none());
    assert_eq!(report.community.communities.len(), report.node_count);
    let manifest = fs::read_to_string(cfg.output_dir.join("MANIFEST")).unwrap();
    assert!(manifest.contains("warning = graph has no edges"));
}

#[test]
fn duplicate_poet_fails_in_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let line = "{\"poet_id\":\"a\",\"name\":\"a\",\"poems\":[{\"poem_id\":\"p\",\"verses\":[\"x\"]}]}";
    let corpus = dir.path().join("bad.jsonl");
    fs::write(&corpus, format!("{line}\n{line}\n")).unwrap();
    let cfg = PipelineConfig::new(corpus, dir.path().join("out"));
    match run(&cfg).unwrap_err() {
        PipelineError::Stage { stage, message } => {
            assert_eq!(stage, "ingest");
            assert!(message.contains("duplicate"));
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn target_density_calibration_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synthetic_fixture(dir.path(), 12, 21);
    let mut cfg = PipelineConfig::new(fixture.corpus, dir.path().join("out"));
    cfg.word_embeddings_path = Some(fixture.word_embeddings);
    cfg.poem_embeddings_path = Some(fixture.poem_embeddings);
    cfg.min_lines = 1;
    cfg.threshold = None;
    cfg.target_density = Some(0.25);
    let report = run(&cfg).unwrap();
    assert!(
        (report.density - 0.25).abs() < 0.08,
        "calibrated density {}",
        report.density
    );
    let manifest = fs::read_to_string(cfg.output_dir.join("MANIFEST")).unwrap();
    assert!(manifest.contains("warning = calibrated threshold"));
}

/// Every structural number in report.json must be recomputable from the
/// persisted node and edge lists.
#[test]
fn report_matches_recomputation_from_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synthetic_fixture(dir.path(), 14, 3);
    let mut cfg = PipelineConfig::new(fixture.corpus, dir.path().join("out"));
    cfg.word_embeddings_path = Some(fixture.word_embeddings);
    cfg.poem_embeddings_path = Some(fixture.poem_embeddings);
    cfg.min_lines = 1;
    cfg.threshold = Some(0.35);
    run(&cfg).unwrap();

    // Rebuild the graph from nodes.csv + edges.tsv.
    let nodes_text = fs::read_to_string(cfg.output_dir.join("nodes.csv")).unwrap();
    let ids: Vec<String> = nodes_text
        .lines()
        .skip(1)
        .map(|l| versegraph::util::csv_split(l)[0].clone())
        .collect();
    let index: std::collections::HashMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let edges_text = fs::read_to_string(cfg.output_dir.join("edges.tsv")).unwrap();
    let edges: Vec<(usize, usize, f64)> = edges_text
        .lines()
        .skip(1)
        .map(|l| {
            let fields: Vec<&str> = l.split('\t').collect();
            (
                index[fields[0]],
                index[fields[1]],
                fields[2].parse::<f64>().unwrap(),
            )
        })
        .collect();
    let g = InfluenceGraph::from_edges(ids, &edges).unwrap();

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(cfg.output_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["node_count"].as_u64().unwrap() as usize, g.n());
    assert_eq!(
        report["edge_count"].as_u64().unwrap() as usize,
        g.edge_count()
    );
    let close = |key: &str, value: f64| {
        let got = report[key].as_f64().unwrap();
        assert!((got - value).abs() < 1e-9, "{key}: {got} vs {value}");
    };
    close("density", density(&g));
    close("avg_clustering", average_clustering(&g));
    let components = connected_components(&g);
    assert_eq!(
        report["component_count"].as_u64().unwrap() as usize,
        components.len()
    );
    assert_eq!(
        report["lcc_size"].as_u64().unwrap() as usize,
        components[0].len()
    );
    if components[0].len() >= 2 {
        let expected = average_shortest_path(&g, &components[0]).unwrap();
        let got = report["lcc_avg_shortest_path"].as_f64().unwrap();
        assert!((got - expected).abs() < 1e-9);
    }
    let stats = degree_stats(&g);
    let ds = &report["degree_stats"];
    assert_eq!(ds["min"].as_u64().unwrap() as usize, stats.min);
    assert_eq!(ds["max"].as_u64().unwrap() as usize, stats.max);
    assert!((ds["mean"].as_f64().unwrap() - stats.mean).abs() < 1e-9);
    assert!((ds["median"].as_f64().unwrap() - stats.median).abs() < 1e-9);
    assert!((ds["std"].as_f64().unwrap() - stats.std).abs() < 1e-9);

    // Histogram counts in weight_hist.csv sum to the edge count.
    let hist = fs::read_to_string(cfg.output_dir.join("weight_hist.csv")).unwrap();
    let total: usize = hist
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, g.edge_count());
}

#[test]
fn config_file_round_trip_drives_run() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = synthetic_fixture(dir.path(), 5, 11);
    let config_text = format!(
        "[inputs]\ncorpus = {}\nword_embeddings = {}\npoem_embeddings = {}\n\n\
         [corpus]\nmin_lines = 1\n\n[graph]\nthreshold = 0.2\n\n\
         [community]\nseed = 3\n\n[output]\ndir = {}\nhistogram_bins = 6\n",
        fixture.corpus.display(),
        fixture.word_embeddings.display(),
        fixture.poem_embeddings.display(),
        dir.path().join("cfg-out").display()
    );
    let config_path = dir.path().join("run.conf");
    fs::write(&config_path, config_text).unwrap();
    let cfg = PipelineConfig::from_file(&config_path).unwrap();
    let report = run(&cfg).unwrap();
    assert_eq!(report.node_count, 5);
    assert!(dir.path().join("cfg-out").join("report.json").exists());
}
