//! The sparse weighted undirected influence graph and its structural
//! primitives: thresholded construction from a fused similarity matrix,
//! connected components, degree statistics, edge-weight histograms,
//! density, and the TSV/GraphML exports.

use crate::similarity::SimilarityMatrix;
use crate::util::{sig12, xml_escape};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("threshold {0} outside [0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("invalid edge ({a}, {b}): {reason}")]
    InvalidEdge { a: usize, b: usize, reason: String },
}

/// One undirected edge, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Sparse weighted undirected graph over poet ids. No self-loops, no
/// duplicate edges; isolated nodes are retained.
#[derive(Debug, Clone)]
pub struct InfluenceGraph {
    node_ids: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
    weighted_degrees: Vec<f64>,
    total_weight: f64,
}

impl InfluenceGraph {
    /// Construct from an explicit edge list. Endpoints may be given in
    /// either order; weights must be positive and finite.
    pub fn from_edges(
        node_ids: Vec<String>,
        edges: &[(usize, usize, f64)],
    ) -> Result<Self, GraphError> {
        let n = node_ids.len();
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut normalized: Vec<Edge> = Vec::with_capacity(edges.len());
        let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
        for &(x, y, w) in edges {
            let (a, b) = if x < y { (x, y) } else { (y, x) };
            if a == b {
                return Err(GraphError::InvalidEdge {
                    a,
                    b,
                    reason: "self-loop".into(),
                });
            }
            if b >= n {
                return Err(GraphError::InvalidEdge {
                    a,
                    b,
                    reason: format!("node index out of range (n = {n})"),
                });
            }
            if w <= 0.0 || !w.is_finite() {
                return Err(GraphError::InvalidEdge {
                    a,
                    b,
                    reason: format!("weight {w} must be positive and finite"),
                });
            }
            if seen.insert((a, b), ()).is_some() {
                return Err(GraphError::InvalidEdge {
                    a,
                    b,
                    reason: "duplicate edge".into(),
                });
            }
            normalized.push(Edge { a, b, weight: w });
        }
        normalized.sort_by_key(|x| (x.a, x.b));
        for e in &normalized {
            adjacency[e.a].push((e.b, e.weight));
            adjacency[e.b].push((e.a, e.weight));
        }
        for list in &mut adjacency {
            list.sort_by_key(|x| x.0);
        }
        // Weighted degrees sum each adjacency list in neighbor order;
        // modularity relies on reusing these exact sums.
        let weighted_degrees: Vec<f64> = adjacency
            .iter()
            .map(|list| list.iter().map(|&(_, w)| w).sum())
            .collect();
        let total_weight = normalized.iter().map(|e| e.weight).sum();
        Ok(Self {
            node_ids,
            edges: normalized,
            adjacency,
            weighted_degrees,
            total_weight,
        })
    }

    pub fn n(&self) -> usize {
        self.node_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    /// Unweighted degree.
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Weighted degree k_v = sum of incident edge weights.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.weighted_degrees[v]
    }

    /// Total edge weight m.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }
}

/// Build the influence graph from a fused matrix: keep the pair (i, j)
/// when its similarity is positive, at least `threshold`, and (when
/// `top_k` is set) ranks within the top k values of either endpoint.
#[allow(clippy::needless_range_loop)]
pub fn build_graph(
    fused: &SimilarityMatrix,
    threshold: f64,
    top_k: Option<usize>,
) -> Result<InfluenceGraph, GraphError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(GraphError::ThresholdOutOfRange(threshold));
    }
    let n = fused.n();
    let keep_by_rank: Vec<Vec<bool>> = match top_k {
        None => Vec::new(),
        Some(k) => {
            let mut keep = vec![vec![false; n]; n];
            for (i, flags) in keep.iter_mut().enumerate() {
                let mut ranked: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                ranked.sort_by(|&a, &b| {
                    fused.values[i][b]
                        .partial_cmp(&fused.values[i][a])
                        .unwrap()
                        .then(a.cmp(&b))
                });
                for &j in ranked.iter().take(k) {
                    flags[j] = true;
                }
            }
            keep
        }
    };
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let w = fused.values[i][j];
            if w <= 0.0 || w < threshold {
                continue;
            }
            if let Some(_k) = top_k {
                if !keep_by_rank[i][j] && !keep_by_rank[j][i] {
                    continue;
                }
            }
            edges.push((i, j, w));
        }
    }
    InfluenceGraph::from_edges(fused.poet_ids.clone(), &edges)
}

/// Binary-search a threshold whose resulting graph density is closest to
/// `target_density`.
pub fn calibrate_threshold(fused: &SimilarityMatrix, target_density: f64) -> f64 {
    let density_at =
        |tau: f64| density(&build_graph(fused, tau, None).expect("tau in range"));
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if density_at(mid) > target_density {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (d_lo, d_hi) = (density_at(lo), density_at(hi));
    if (d_lo - target_density).abs() <= (d_hi - target_density).abs() {
        lo
    } else {
        hi
    }
}

/// Connected components by undirected reachability, sorted by descending
/// size then smallest contained node index; nodes inside each component
/// are sorted ascending.
pub fn connected_components(g: &InfluenceGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut component = vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![start];
        component[start] = id;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &(u, _) in g.neighbors(v) {
                if component[u] == usize::MAX {
                    component[u] = id;
                    members.push(u);
                    queue.push_back(u);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    components
}

/// Summary statistics over unweighted degrees. The median is the lower
/// middle for even node counts; std is the population form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

pub fn degree_stats(g: &InfluenceGraph) -> DegreeStats {
    let n = g.n();
    if n == 0 {
        return DegreeStats {
            min: 0,
            max: 0,
            mean: 0.0,
            median: 0.0,
            std: 0.0,
        };
    }
    let mut degrees: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    degrees.sort_unstable();
    let mean = 2.0 * g.edge_count() as f64 / n as f64;
    let variance = degrees
        .iter()
        .map(|&d| {
            let c = d as f64 - mean;
            c * c
        })
        .sum::<f64>()
        / n as f64;
    DegreeStats {
        min: degrees[0],
        max: degrees[n - 1],
        mean,
        median: degrees[(n - 1) / 2] as f64,
        std: variance.sqrt(),
    }
}

/// Histogram of edge weights over `bin_count` uniform bins spanning
/// [min_w, max_w]. Bins are half-open [lo, hi) except the last, which
/// is closed; an empty edge set yields an empty histogram.
pub fn edge_weight_histogram(g: &InfluenceGraph, bin_count: usize) -> Vec<(f64, f64, usize)> {
    if g.edge_count() == 0 || bin_count == 0 {
        return Vec::new();
    }
    let weights: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
    let lo = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bin_count as f64;
    let mut counts = vec![0usize; bin_count];
    for &w in &weights {
        let idx = if width > 0.0 {
            (((w - lo) / (hi - lo)) * bin_count as f64).floor() as usize
        } else {
            bin_count - 1
        };
        counts[idx.min(bin_count - 1)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let bin_lo = lo + width * i as f64;
            let bin_hi = if i + 1 == bin_count {
                hi
            } else {
                lo + width * (i + 1) as f64
            };
            (bin_lo, bin_hi, c)
        })
        .collect()
}

/// Density 2E / (n(n-1)); zero for graphs with fewer than two nodes.
pub fn density(g: &InfluenceGraph) -> f64 {
    let n = g.n();
    if n <= 1 {
        return 0.0;
    }
    2.0 * g.edge_count() as f64 / (n as f64 * (n - 1) as f64)
}

/// Edge-list export: tab-separated source_id, target_id, weight.
pub fn edges_tsv(g: &InfluenceGraph) -> String {
    let mut out = String::from("source_id\ttarget_id\tweight\n");
    for e in g.edges() {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            g.node_ids()[e.a],
            g.node_ids()[e.b],
            sig12(e.weight)
        ));
    }
    out
}

/// GraphML export with nodes in id order and a `weight` attribute per
/// edge. Output is byte-stable for identical graphs.
pub fn graphml(g: &InfluenceGraph) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"w\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for id in g.node_ids() {
        out.push_str(&format!("    <node id=\"{}\"/>\n", xml_escape(id)));
    }
    for e in g.edges() {
        out.push_str(&format!(
            "    <edge source=\"{}\" target=\"{}\"><data key=\"w\">{}</data></edge>\n",
            xml_escape(&g.node_ids()[e.a]),
            xml_escape(&g.node_ids()[e.b]),
            sig12(e.weight)
        ));
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
