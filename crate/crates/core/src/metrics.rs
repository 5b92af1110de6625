//! Centrality measures, their Pearson correlations, clustering, and
//! shortest-path statistics.
//!
//! Path-based measures (betweenness, closeness, average path length)
//! default to unweighted hop distance; `DistanceMode::InverseWeight`
//! switches them to 1/w edge lengths. Eigenvector and Katz centrality
//! always use the weighted adjacency.

use crate::graph::InfluenceGraph;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("graph has no edges")]
    EdgelessGraph,
    #[error("iteration did not converge within {iterations} steps")]
    NonConvergence { iterations: usize },
    #[error("katz alpha {alpha} >= 1/lambda_max (lambda_max ~ {lambda_max}); iteration diverges")]
    KatzDivergence { alpha: f64, lambda_max: f64 },
    #[error("need at least 2 rows")]
    InsufficientRows,
    #[error("component has fewer than 2 nodes")]
    ComponentTooSmall,
    #[error("component is not connected")]
    DisconnectedComponent,
}

/// Distance interpretation for shortest-path measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMode {
    /// Every edge has length 1.
    #[default]
    Hop,
    /// Edge length 1/w, so strong similarities are short.
    InverseWeight,
}

pub const METRIC_NAMES: [&str; 5] =
    ["degree", "betweenness", "closeness", "eigenvector", "katz"];

pub const DEFAULT_EIGENVECTOR_TOL: f64 = 1e-8;
pub const DEFAULT_EIGENVECTOR_MAX_ITER: usize = 1000;
pub const DEFAULT_KATZ_TOL: f64 = 1e-10;
pub const DEFAULT_KATZ_MAX_ITER: usize = 5000;

/// C_D(v) = deg(v) / (n - 1); zero for a single-node graph.
pub fn degree_centrality(g: &InfluenceGraph) -> Vec<f64> {
    let n = g.n();
    if n <= 1 {
        return vec![0.0; n];
    }
    (0..n).map(|v| g.degree(v) as f64 / (n - 1) as f64).collect()
}

// Shortest-path state from one source: settlement order, predecessor
// lists, and path counts, shared by Brandes and closeness.
struct SsspResult {
    order: Vec<usize>,
    preds: Vec<Vec<usize>>,
    sigma: Vec<f64>,
    dist: Vec<f64>,
}

fn bfs_sssp(g: &InfluenceGraph, s: usize) -> SsspResult {
    let n = g.n();
    let mut order = Vec::with_capacity(n);
    let mut preds = vec![Vec::new(); n];
    let mut sigma = vec![0.0; n];
    let mut dist = vec![f64::INFINITY; n];
    sigma[s] = 1.0;
    dist[s] = 0.0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(w, _) in g.neighbors(v) {
            if dist[w].is_infinite() {
                dist[w] = dist[v] + 1.0;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1.0 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    SsspResult {
        order,
        preds,
        sigma,
        dist,
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so BinaryHeap pops the smallest distance; node index
        // breaks ties deterministically.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap()
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra_sssp(g: &InfluenceGraph, s: usize) -> SsspResult {
    let n = g.n();
    let mut order = Vec::with_capacity(n);
    let mut preds = vec![Vec::new(); n];
    let mut sigma = vec![0.0; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    sigma[s] = 1.0;
    dist[s] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry { dist: 0.0, node: s });
    while let Some(HeapEntry { dist: d, node: v }) = heap.pop() {
        if settled[v] {
            continue;
        }
        settled[v] = true;
        order.push(v);
        for &(w, weight) in g.neighbors(v) {
            let nd = d + 1.0 / weight;
            if nd < dist[w] {
                dist[w] = nd;
                sigma[w] = sigma[v];
                preds[w] = vec![v];
                heap.push(HeapEntry { dist: nd, node: w });
            } else if nd == dist[w] && !settled[w] {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    SsspResult {
        order,
        preds,
        sigma,
        dist,
    }
}

fn sssp(g: &InfluenceGraph, s: usize, mode: DistanceMode) -> SsspResult {
    match mode {
        DistanceMode::Hop => bfs_sssp(g, s),
        DistanceMode::InverseWeight => dijkstra_sssp(g, s),
    }
}

/// Brandes betweenness centrality, halved for undirectedness and
/// normalized by (n-1)(n-2)/2 so values lie in [0, 1].
pub fn betweenness_centrality_with(g: &InfluenceGraph, mode: DistanceMode) -> Vec<f64> {
    let n = g.n();
    let mut centrality = vec![0.0; n];
    if n < 3 {
        return centrality;
    }
    for s in 0..n {
        let SsspResult {
            mut order,
            preds,
            sigma,
            ..
        } = sssp(g, s, mode);
        let mut delta = vec![0.0; n];
        while let Some(w) = order.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }
    let scale = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
    for c in &mut centrality {
        *c *= scale;
    }
    centrality
}

pub fn betweenness_centrality(g: &InfluenceGraph) -> Vec<f64> {
    betweenness_centrality_with(g, DistanceMode::Hop)
}

/// Component-aware closeness: with r nodes reachable from v and S their
/// summed distances, C_C(v) = (r / (n-1)) * (r / S). Isolated nodes get 0.
pub fn closeness_centrality_with(g: &InfluenceGraph, mode: DistanceMode) -> Vec<f64> {
    let n = g.n();
    if n <= 1 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|v| {
            let dist = sssp(g, v, mode).dist;
            let mut reachable = 0usize;
            let mut total = 0.0;
            for (u, &d) in dist.iter().enumerate() {
                if u != v && d.is_finite() {
                    reachable += 1;
                    total += d;
                }
            }
            if reachable == 0 || total == 0.0 {
                0.0
            } else {
                (reachable as f64 / (n - 1) as f64) * (reachable as f64 / total)
            }
        })
        .collect()
}

pub fn closeness_centrality(g: &InfluenceGraph) -> Vec<f64> {
    closeness_centrality_with(g, DistanceMode::Hop)
}

fn multiply_adjacency(g: &InfluenceGraph, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; g.n()];
    for (v, out_v) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &(u, w) in g.neighbors(v) {
            acc += w * x[u];
        }
        *out_v = acc;
    }
    out
}

fn l2_normalize(x: &mut [f64]) -> f64 {
    let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
    norm
}

fn linf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

// Power iteration with a 0.5 self-blend per step; the blend suppresses
// the sign-flipping mode on bipartite graphs and leaves the fixed point
// unchanged. Returns (unit eigenvector, lambda_max estimate).
fn power_iteration(
    g: &InfluenceGraph,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64), MetricsError> {
    let n = g.n();
    if g.edge_count() == 0 {
        return Err(MetricsError::EdgelessGraph);
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..max_iter {
        let mut z = multiply_adjacency(g, &x);
        if l2_normalize(&mut z) == 0.0 {
            return Err(MetricsError::NonConvergence {
                iterations: max_iter,
            });
        }
        let mut next: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 0.5 * (a + b)).collect();
        l2_normalize(&mut next);
        let diff = linf_diff(&next, &x);
        x = next;
        if diff < tol {
            // Isolated nodes decay geometrically; pin them to exact zero.
            for (v, val) in x.iter_mut().enumerate() {
                if g.degree(v) == 0 {
                    *val = 0.0;
                }
            }
            l2_normalize(&mut x);
            let ax = multiply_adjacency(g, &x);
            let lambda: f64 = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
            return Ok((x, lambda));
        }
    }
    Err(MetricsError::NonConvergence {
        iterations: max_iter,
    })
}

/// Eigenvector centrality of the weighted adjacency: the dominant unit
/// eigenvector, nonnegative, with isolated nodes at exactly 0.
pub fn eigenvector_centrality(
    g: &InfluenceGraph,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, MetricsError> {
    power_iteration(g, tol, max_iter).map(|(x, _)| x)
}

/// Largest-eigenvalue estimate of the weighted adjacency; 0 for an
/// edgeless graph.
pub fn spectral_radius_estimate(g: &InfluenceGraph) -> Result<f64, MetricsError> {
    if g.edge_count() == 0 {
        return Ok(0.0);
    }
    power_iteration(g, 1e-10, 10_000).map(|(_, lambda)| lambda)
}

/// The default Katz damping factor 0.9 / lambda_max (0 when the graph has
/// no edges, where any alpha acts identically).
pub fn default_katz_alpha(g: &InfluenceGraph) -> Result<f64, MetricsError> {
    let lambda = spectral_radius_estimate(g)?;
    Ok(if lambda > 0.0 { 0.9 / lambda } else { 0.0 })
}

/// Katz centrality: the fixed point of x <- alpha A x + beta 1,
/// L2-normalized. `alpha` defaults to 0.9 / lambda_max and must stay
/// below 1 / lambda_max.
pub fn katz_centrality(
    g: &InfluenceGraph,
    alpha: Option<f64>,
    beta: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, MetricsError> {
    let n = g.n();
    let lambda = spectral_radius_estimate(g)?;
    let alpha = match alpha {
        Some(a) => a,
        None => {
            if lambda > 0.0 {
                0.9 / lambda
            } else {
                0.0
            }
        }
    };
    if lambda > 0.0 && alpha * lambda >= 1.0 {
        return Err(MetricsError::KatzDivergence {
            alpha,
            lambda_max: lambda,
        });
    }
    let mut x = vec![beta; n];
    for _ in 0..max_iter {
        let ax = multiply_adjacency(g, &x);
        let next: Vec<f64> = ax.iter().map(|&v| alpha * v + beta).collect();
        let diff = linf_diff(&next, &x);
        x = next;
        if diff < tol {
            l2_normalize(&mut x);
            return Ok(x);
        }
    }
    Err(MetricsError::NonConvergence {
        iterations: max_iter,
    })
}

/// One poet's five centrality values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralityRow {
    pub degree: f64,
    pub betweenness: f64,
    pub closeness: f64,
    pub eigenvector: f64,
    pub katz: f64,
}

impl CentralityRow {
    pub fn by_metric(&self, metric: usize) -> f64 {
        match metric {
            0 => self.degree,
            1 => self.betweenness,
            2 => self.closeness,
            3 => self.eigenvector,
            4 => self.katz,
            _ => panic!("metric index out of range"),
        }
    }
}

/// All five centralities for every node, in node order.
#[derive(Debug, Clone)]
pub struct CentralityTable {
    pub poet_ids: Vec<String>,
    pub rows: Vec<CentralityRow>,
}

impl CentralityTable {
    pub fn column(&self, metric: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.by_metric(metric)).collect()
    }
}

/// Knobs for assembling the full table.
#[derive(Debug, Clone)]
pub struct CentralityOptions {
    /// Distance interpretation for betweenness and closeness.
    pub distance_mode: DistanceMode,
    /// Katz damping factor; defaults to 0.9 / lambda_max when absent.
    pub katz_alpha: Option<f64>,
    pub katz_beta: f64,
}

impl Default for CentralityOptions {
    fn default() -> Self {
        Self {
            distance_mode: DistanceMode::Hop,
            katz_alpha: None,
            katz_beta: 1.0,
        }
    }
}

/// Run all five measures and assemble the table. On an edgeless graph
/// the eigenvector column is all zero (the measure is undefined there)
/// and Katz degenerates to the uniform vector.
pub fn centrality_table(g: &InfluenceGraph) -> Result<CentralityTable, MetricsError> {
    centrality_table_with(g, &CentralityOptions::default())
}

pub fn centrality_table_with(
    g: &InfluenceGraph,
    options: &CentralityOptions,
) -> Result<CentralityTable, MetricsError> {
    let degree = degree_centrality(g);
    let betweenness = betweenness_centrality_with(g, options.distance_mode);
    let closeness = closeness_centrality_with(g, options.distance_mode);
    let eigenvector = if g.edge_count() == 0 {
        vec![0.0; g.n()]
    } else {
        eigenvector_centrality(g, DEFAULT_EIGENVECTOR_TOL, DEFAULT_EIGENVECTOR_MAX_ITER)?
    };
    let katz = katz_centrality(
        g,
        options.katz_alpha,
        options.katz_beta,
        DEFAULT_KATZ_TOL,
        DEFAULT_KATZ_MAX_ITER,
    )?;
    let rows = (0..g.n())
        .map(|v| CentralityRow {
            degree: degree[v],
            betweenness: betweenness[v],
            closeness: closeness[v],
            eigenvector: eigenvector[v],
            katz: katz[v],
        })
        .collect();
    Ok(CentralityTable {
        poet_ids: g.node_ids().to_vec(),
        rows,
    })
}

/// Pearson correlations between the five centrality columns. A column
/// with zero variance correlates 0 with everything by convention and is
/// flagged; the diagonal stays 1.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub values: [[f64; 5]; 5],
    pub zero_variance: [bool; 5],
}

pub fn pearson_correlation_matrix(
    table: &CentralityTable,
) -> Result<CorrelationMatrix, MetricsError> {
    let n = table.rows.len();
    if n < 2 {
        return Err(MetricsError::InsufficientRows);
    }
    let columns: Vec<Vec<f64>> = (0..5).map(|m| table.column(m)).collect();
    let means: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    let stds: Vec<f64> = columns
        .iter()
        .zip(&means)
        .map(|(c, &m)| {
            (c.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64).sqrt()
        })
        .collect();
    let zero_variance: [bool; 5] = std::array::from_fn(|i| stds[i] == 0.0);
    let mut values = [[0.0; 5]; 5];
    for i in 0..5 {
        values[i][i] = 1.0;
        for j in (i + 1)..5 {
            let r = if zero_variance[i] || zero_variance[j] {
                0.0
            } else {
                let cov = columns[i]
                    .iter()
                    .zip(&columns[j])
                    .map(|(a, b)| (a - means[i]) * (b - means[j]))
                    .sum::<f64>()
                    / n as f64;
                (cov / (stds[i] * stds[j])).clamp(-1.0, 1.0)
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix {
        values,
        zero_variance,
    })
}

/// Mean over all nodes of the local clustering coefficient
/// 2 T(v) / (deg(v)(deg(v)-1)); nodes of degree < 2 contribute 0.
pub fn average_clustering(g: &InfluenceGraph) -> f64 {
    let n = g.n();
    if n == 0 {
        return 0.0;
    }
    let neighbor_sets: Vec<Vec<usize>> = (0..n)
        .map(|v| g.neighbors(v).iter().map(|&(u, _)| u).collect())
        .collect();
    let mut total = 0.0;
    for v in 0..n {
        let d = neighbor_sets[v].len();
        if d < 2 {
            continue;
        }
        let mut links = 0usize;
        for (i, &a) in neighbor_sets[v].iter().enumerate() {
            for &b in &neighbor_sets[v][(i + 1)..] {
                // Adjacency lists are sorted by neighbor index.
                if neighbor_sets[a].binary_search(&b).is_ok() {
                    links += 1;
                }
            }
        }
        total += 2.0 * links as f64 / (d as f64 * (d - 1) as f64);
    }
    total / n as f64
}

/// Mean shortest-path distance over all unordered node pairs of a
/// connected component.
pub fn average_shortest_path_with(
    g: &InfluenceGraph,
    component: &[usize],
    mode: DistanceMode,
) -> Result<f64, MetricsError> {
    let k = component.len();
    if k < 2 {
        return Err(MetricsError::ComponentTooSmall);
    }
    let members: std::collections::HashSet<usize> = component.iter().copied().collect();
    let mut total = 0.0;
    for &s in component {
        let dist = sssp(g, s, mode).dist;
        for &t in component {
            if t == s {
                continue;
            }
            if !dist[t].is_finite() || !members.contains(&t) {
                return Err(MetricsError::DisconnectedComponent);
            }
            total += dist[t];
        }
    }
    Ok(total / (k * (k - 1)) as f64)
}

pub fn average_shortest_path(
    g: &InfluenceGraph,
    component: &[usize],
) -> Result<f64, MetricsError> {
    average_shortest_path_with(g, component, DistanceMode::Hop)
}
