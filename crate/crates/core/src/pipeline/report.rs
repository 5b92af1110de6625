//! The end-of-run network report and its canonical JSON serialization:
//! keys sorted, floats at 12 significant digits, byte-stable across runs.

use crate::graph::DegreeStats;
use crate::metrics::{CorrelationMatrix, METRIC_NAMES};
use crate::util::{json_escape, sig12};

/// One detected community in the report.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityInfo {
    pub community_id: usize,
    pub size: usize,
    pub members: Vec<String>,
    /// Mean fused similarity over unordered member pairs; 0 for
    /// singletons.
    pub mean_internal_similarity: f64,
}

#[derive(Debug, Clone)]
pub struct CommunityReport {
    /// None when the graph has no edges (modularity is undefined there).
    pub modularity: Option<f64>,
    pub communities: Vec<CommunityInfo>,
}

/// Graph-level summary: structure, degree statistics, top poets per
/// centrality metric, metric correlations, and community composition.
#[derive(Debug, Clone)]
pub struct NetworkReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: f64,
    pub component_count: usize,
    pub lcc_size: usize,
    /// None when the largest component has fewer than two nodes.
    pub lcc_avg_shortest_path: Option<f64>,
    pub avg_clustering: f64,
    pub degree_stats: DegreeStats,
    /// Per metric (in METRIC_NAMES order): up to five (poet_id, value)
    /// pairs, best first.
    pub top_poets: Vec<Vec<(String, f64)>>,
    pub correlation: CorrelationMatrix,
    pub community: CommunityReport,
}

fn opt_f64(value: Option<f64>) -> String {
    value.map_or_else(|| "null".to_string(), sig12)
}

fn community_object(c: &CommunityInfo) -> String {
    let members: Vec<String> = c
        .members
        .iter()
        .map(|m| format!("\"{}\"", json_escape(m)))
        .collect();
    format!(
        "{{\"id\":{},\"mean_internal_similarity\":{},\"members\":[{}],\"size\":{}}}",
        c.community_id,
        sig12(c.mean_internal_similarity),
        members.join(","),
        c.size
    )
}

/// Canonical JSON for the community summary file.
pub fn communities_json(report: &CommunityReport) -> String {
    let entries: Vec<String> = report.communities.iter().map(community_object).collect();
    format!(
        "{{\"communities\":[{}],\"modularity\":{}}}\n",
        entries.join(","),
        opt_f64(report.modularity)
    )
}

/// Canonical JSON for the full network report.
pub fn report_json(report: &NetworkReport) -> String {
    let communities: Vec<String> = report
        .community
        .communities
        .iter()
        .map(community_object)
        .collect();
    let correlation_rows: Vec<String> = report
        .correlation
        .values
        .iter()
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|&v| sig12(v)).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    let metric_names: Vec<String> = METRIC_NAMES
        .iter()
        .map(|n| format!("\"{n}\""))
        .collect();
    let top_entries: Vec<String> = METRIC_NAMES
        .iter()
        .zip(&report.top_poets)
        .map(|(name, entries)| {
            let list: Vec<String> = entries
                .iter()
                .map(|(id, v)| {
                    format!(
                        "{{\"poet_id\":\"{}\",\"value\":{}}}",
                        json_escape(id),
                        sig12(*v)
                    )
                })
                .collect();
            format!("\"{name}\":[{}]", list.join(","))
        })
        .collect();
    let stats = &report.degree_stats;
    format!(
        concat!(
            "{{",
            "\"avg_clustering\":{},",
            "\"communities\":[{}],",
            "\"component_count\":{},",
            "\"correlation\":{{\"metrics\":[{}],\"values\":[{}]}},",
            "\"degree_stats\":{{\"max\":{},\"mean\":{},\"median\":{},\"min\":{},\"std\":{}}},",
            "\"density\":{},",
            "\"edge_count\":{},",
            "\"lcc_avg_shortest_path\":{},",
            "\"lcc_size\":{},",
            "\"modularity\":{},",
            "\"node_count\":{},",
            "\"top_poets\":{{{}}}",
            "}}\n"
        ),
        sig12(report.avg_clustering),
        communities.join(","),
        report.component_count,
        metric_names.join(","),
        correlation_rows.join(","),
        stats.max,
        sig12(stats.mean),
        sig12(stats.median),
        stats.min,
        sig12(stats.std),
        sig12(report.density),
        report.edge_count,
        opt_f64(report.lcc_avg_shortest_path),
        report.lcc_size,
        opt_f64(report.community.modularity),
        report.node_count,
        top_entries.join(",")
    )
}
