//! Louvain community detection with modularity, plus an exhaustive
//! partition search usable as an oracle on small graphs.
//!
//! Modularity follows the ordered-pair convention: self-loops created by
//! aggregation carry twice the internal weight, which keeps Q identical
//! across aggregation levels.

use crate::graph::InfluenceGraph;
use crate::util::SplitMix64;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CommunityError {
    #[error("modularity undefined on edgeless graph")]
    EdgelessGraph,
    #[error("partition covers {got} nodes, graph has {expected}")]
    PartitionSize { got: usize, expected: usize },
    #[error("graph has {n} nodes; exhaustive search is limited to {max}")]
    TooLarge { n: usize, max: usize },
    #[error("modularity decreased during a sweep ({before} -> {after})")]
    NonMonotoneSweep { before: f64, after: f64 },
}

/// A node-to-community assignment with its modularity. Community ids are
/// compacted to 0..K-1 in descending size order (ties by smallest member
/// index); `levels` holds the assignment after each aggregation round,
/// expressed over the original nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityPartition {
    pub assignment: Vec<usize>,
    pub modularity: f64,
    pub levels: Vec<Vec<usize>>,
}

impl CommunityPartition {
    pub fn community_count(&self) -> usize {
        self.assignment.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Members of each community, sorted within and across communities.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); self.community_count()];
        for (node, &c) in self.assignment.iter().enumerate() {
            groups[c].push(node);
        }
        groups
    }
}

/// Weighted modularity Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] d(c_i, c_j)
/// over ordered pairs, diagonal included.
pub fn modularity(g: &InfluenceGraph, assignment: &[usize]) -> Result<f64, CommunityError> {
    let n = g.n();
    if assignment.len() != n {
        return Err(CommunityError::PartitionSize {
            got: assignment.len(),
            expected: n,
        });
    }
    if g.edge_count() == 0 {
        return Err(CommunityError::EdgelessGraph);
    }
    // Dense community ids in ascending-node first-occurrence order, so
    // all accumulations run in a fixed order.
    let mut dense: HashMap<usize, usize> = HashMap::new();
    let mut ids = Vec::with_capacity(n);
    for &c in assignment {
        let next = dense.len();
        ids.push(*dense.entry(c).or_insert(next));
    }
    let k_count = dense.len();
    let mut sigma_tot = vec![0.0f64; k_count];
    let mut sigma_in = vec![0.0f64; k_count];
    let mut two_m = 0.0f64;
    for v in 0..n {
        let k_v = g.weighted_degree(v);
        two_m += k_v;
        sigma_tot[ids[v]] += k_v;
        let mut within = 0.0;
        for &(u, w) in g.neighbors(v) {
            if ids[u] == ids[v] {
                within += w;
            }
        }
        sigma_in[ids[v]] += within;
    }
    let mut q = 0.0;
    for c in 0..k_count {
        let frac = sigma_tot[c] / two_m;
        q += sigma_in[c] / two_m - frac * frac;
    }
    Ok(q)
}

// One aggregation level: adjacency without self-loops, self-loop weights
// in the ordered-pair convention, and weighted degrees including them.
struct LevelGraph {
    n: usize,
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    k: Vec<f64>,
    two_m: f64,
}

impl LevelGraph {
    fn from_graph(g: &InfluenceGraph) -> Self {
        let n = g.n();
        let adj: Vec<Vec<(usize, f64)>> = (0..n).map(|v| g.neighbors(v).to_vec()).collect();
        let k: Vec<f64> = (0..n).map(|v| g.weighted_degree(v)).collect();
        let two_m = k.iter().sum();
        LevelGraph {
            n,
            adj,
            self_loops: vec![0.0; n],
            k,
            two_m,
        }
    }

    fn modularity(&self, community: &[usize]) -> f64 {
        let mut sigma_tot = vec![0.0f64; self.n];
        let mut sigma_in = vec![0.0f64; self.n];
        for v in 0..self.n {
            sigma_tot[community[v]] += self.k[v];
            let mut within = self.self_loops[v];
            for &(u, w) in &self.adj[v] {
                if community[u] == community[v] {
                    within += w;
                }
            }
            sigma_in[community[v]] += within;
        }
        let mut q = 0.0;
        for c in 0..self.n {
            if sigma_tot[c] != 0.0 || sigma_in[c] != 0.0 {
                let frac = sigma_tot[c] / self.two_m;
                q += sigma_in[c] / self.two_m - frac * frac;
            }
        }
        q
    }

    // Collapse communities into super-nodes. `dense_nodes[v]` is node
    // v's community relabeled to 0..k_count in first-occurrence order.
    fn aggregate(&self, dense_nodes: &[usize], k_count: usize) -> LevelGraph {
        let mut self_loops = vec![0.0f64; k_count];
        let mut inter: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k_count];
        for v in 0..self.n {
            let cv = dense_nodes[v];
            self_loops[cv] += self.self_loops[v];
            for &(u, w) in &self.adj[v] {
                let cu = dense_nodes[u];
                if cu == cv {
                    // Visited from both endpoints: accumulates 2w, the
                    // ordered-pair self-loop convention.
                    self_loops[cv] += w;
                } else {
                    *inter[cv].entry(cu).or_insert(0.0) += w;
                }
            }
        }
        let adj: Vec<Vec<(usize, f64)>> = inter
            .into_iter()
            .map(|m| m.into_iter().collect())
            .collect();
        let k: Vec<f64> = (0..k_count)
            .map(|c| self_loops[c] + adj[c].iter().map(|&(_, w)| w).sum::<f64>())
            .collect();
        let two_m = k.iter().sum();
        LevelGraph {
            n: k_count,
            adj,
            self_loops,
            k,
            two_m,
        }
    }
}

// One full pass over the nodes in `order`; returns whether any node moved.
fn sweep(
    lg: &LevelGraph,
    community: &mut [usize],
    sigma_tot: &mut [f64],
    order: &[usize],
    min_gain: f64,
) -> bool {
    let m = lg.two_m / 2.0;
    let mut moved = false;
    for &v in order {
        let c_old = community[v];
        let mut k_to: BTreeMap<usize, f64> = BTreeMap::new();
        for &(u, w) in &lg.adj[v] {
            *k_to.entry(community[u]).or_insert(0.0) += w;
        }
        sigma_tot[c_old] -= lg.k[v];
        let insert_gain = |c: usize, k_vc: f64| k_vc / m - sigma_tot[c] * lg.k[v] / (2.0 * m * m);
        let stay = insert_gain(c_old, k_to.get(&c_old).copied().unwrap_or(0.0));
        let mut best_c = c_old;
        let mut best_gain = stay;
        // BTreeMap iteration is ascending, so strict improvement keeps
        // the smallest community id among ties.
        for (&c, &k_vc) in &k_to {
            if c == c_old {
                continue;
            }
            let gain = insert_gain(c, k_vc);
            if gain > best_gain && gain - stay > min_gain {
                best_gain = gain;
                best_c = c;
            }
        }
        community[v] = best_c;
        sigma_tot[best_c] += lg.k[v];
        if best_c != c_old {
            moved = true;
        }
    }
    moved
}

// Relabel per-node community ids to 0..k in first-occurrence order;
// returns the per-node labels and the community count.
fn dense_relabel(community: &[usize]) -> (Vec<usize>, usize) {
    let mut map: HashMap<usize, usize> = HashMap::new();
    let mut out = Vec::with_capacity(community.len());
    for &c in community {
        let next = map.len();
        out.push(*map.entry(c).or_insert(next));
    }
    (out, map.len())
}

fn compact_by_size(assignment: &[usize]) -> Vec<usize> {
    let mut size: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (node, &c) in assignment.iter().enumerate() {
        let entry = size.entry(c).or_insert((0, node));
        entry.0 += 1;
    }
    let mut order: Vec<(usize, (usize, usize))> = size.into_iter().collect();
    order.sort_by(|a, b| b.1 .0.cmp(&a.1 .0).then(a.1 .1.cmp(&b.1 .1)));
    let remap: HashMap<usize, usize> = order
        .into_iter()
        .enumerate()
        .map(|(new, (old, _))| (old, new))
        .collect();
    assignment.iter().map(|c| remap[c]).collect()
}

/// Louvain community detection. Node visit order is ascending index,
/// permuted by a seeded generator when `seed != 0`. Every sweep is
/// checked to be modularity-monotone.
pub fn louvain(
    g: &InfluenceGraph,
    seed: u64,
    min_gain: f64,
) -> Result<CommunityPartition, CommunityError> {
    if g.edge_count() == 0 {
        return Err(CommunityError::EdgelessGraph);
    }
    let n = g.n();
    let mut lg = LevelGraph::from_graph(g);
    let mut node_to_super: Vec<usize> = (0..n).collect();
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut rng = SplitMix64::new(seed);
    let final_assignment;
    loop {
        let mut community: Vec<usize> = (0..lg.n).collect();
        let mut sigma_tot = lg.k.clone();
        let mut order: Vec<usize> = (0..lg.n).collect();
        if seed != 0 {
            rng.shuffle(&mut order);
        }
        let mut any_move = false;
        loop {
            let before = lg.modularity(&community);
            let moved = sweep(&lg, &mut community, &mut sigma_tot, &order, min_gain);
            let after = lg.modularity(&community);
            if after < before - 1e-9 {
                return Err(CommunityError::NonMonotoneSweep { before, after });
            }
            if !moved {
                break;
            }
            any_move = true;
        }
        let (dense_nodes, distinct) = dense_relabel(&community);
        let snapshot: Vec<usize> = node_to_super.iter().map(|&s| dense_nodes[s]).collect();
        levels.push(snapshot.clone());
        if !any_move || distinct == lg.n {
            final_assignment = snapshot;
            break;
        }
        lg = lg.aggregate(&dense_nodes, distinct);
        node_to_super = snapshot;
    }
    let assignment = compact_by_size(&final_assignment);
    let q = modularity(g, &assignment)?;
    Ok(CommunityPartition {
        assignment,
        modularity: q,
        levels,
    })
}

pub const BRUTE_FORCE_MAX_NODES: usize = 10;

/// Exhaustive best-modularity partition via restricted-growth-string
/// enumeration. Ties resolve to the lexicographically smallest canonical
/// assignment. Limited to 10 nodes.
pub fn brute_force_best_partition(
    g: &InfluenceGraph,
) -> Result<CommunityPartition, CommunityError> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(CommunityError::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_NODES,
        });
    }
    if g.edge_count() == 0 {
        return Err(CommunityError::EdgelessGraph);
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut rgs = vec![0usize; n];
    // Depth-first enumeration in lexicographic order; position i may use
    // any existing label or the next fresh one.
    fn recurse(
        g: &InfluenceGraph,
        rgs: &mut Vec<usize>,
        pos: usize,
        max_used: usize,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        let n = rgs.len();
        if pos == n {
            let q = modularity(g, rgs).expect("edge check done");
            if best.as_ref().is_none_or(|(bq, _)| q > *bq) {
                *best = Some((q, rgs.clone()));
            }
            return;
        }
        for label in 0..=(max_used + 1).min(n - 1) {
            rgs[pos] = label;
            recurse(g, rgs, pos + 1, max_used.max(label), best);
        }
    }
    // The first node is always labeled 0.
    recurse(g, &mut rgs, 1, 0, &mut best);
    let (q, raw) = best.expect("at least one partition");
    let assignment = compact_by_size(&raw);
    let q_check = modularity(g, &assignment)?;
    debug_assert!((q - q_check).abs() < 1e-12);
    Ok(CommunityPartition {
        assignment,
        modularity: q_check,
        levels: vec![raw],
    })
}
