//! Shared test support: a deterministic synthetic corpus with embedding
//! files, random graph generation, and independent oracles.

// Each integration test target compiles this module separately and uses
// a different subset of it.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use versegraph::corpus::{PoemRecord, PoetRecord};
use versegraph::graph::InfluenceGraph;
use versegraph::util::SplitMix64;

const CONSONANTS: [char; 12] = ['د', 'ل', 'م', 'ن', 'ب', 'ر', 'س', 'ک', 'گ', 'ف', 'ج', 'ش'];
const VOWELS: [char; 3] = ['ا', 'و', 'ی'];
const METERS: [&str; 5] = ["hazaj", "ramal", "motaqareb", "khafif", "rajaz"];
const POS_TAGS: [&str; 4] = ["N", "V", "ADJ", "ADV"];

fn make_vocabulary(rng: &mut SplitMix64, size: usize) -> Vec<String> {
    let mut vocab = Vec::new();
    while vocab.len() < size {
        let syllables = 1 + rng.next_index(3);
        let mut word = String::new();
        for _ in 0..syllables {
            word.push(CONSONANTS[rng.next_index(CONSONANTS.len())]);
            word.push(VOWELS[rng.next_index(VOWELS.len())]);
            if rng.next_f64() < 0.4 {
                word.push(CONSONANTS[rng.next_index(CONSONANTS.len())]);
            }
        }
        if !vocab.contains(&word) {
            vocab.push(word);
        }
    }
    vocab
}

// Reverse some normalization steps so ingestion has real work to do;
// normalize_text maps the result back to the canonical token.
fn denormalize(token: &str, rng: &mut SplitMix64) -> String {
    let mut out = String::new();
    for c in token.chars() {
        match c {
            'ی' if rng.next_f64() < 0.3 => out.push('\u{064A}'),
            'ک' if rng.next_f64() < 0.3 => out.push('\u{0643}'),
            c => out.push(c),
        }
        if rng.next_f64() < 0.08 {
            out.push('\u{0650}'); // kasra, removed by normalization
        }
        if rng.next_f64() < 0.05 {
            out.push('\u{200C}'); // zero-width non-joiner
        }
    }
    out
}

/// Paths of a generated fixture.
pub struct Fixture {
    pub dir: PathBuf,
    pub corpus: PathBuf,
    pub word_embeddings: PathBuf,
    pub poem_embeddings: PathBuf,
    pub poet_count: usize,
}

/// Deterministic synthetic corpus with word and poem embedding files.
/// Poet `poet07` carries no meter labels and the last poet's poems have
/// no embeddings, so the degenerate similarity paths are exercised.
pub fn synthetic_fixture(dir: &Path, poet_count: usize, seed: u64) -> Fixture {
    let mut rng = SplitMix64::new(seed);
    let vocab = make_vocabulary(&mut rng, 140);
    let mut poets = Vec::new();
    for p in 0..poet_count {
        let poet_id = format!("poet{p:02}");
        let tagged = p % 2 == 0;
        let poem_count = 2 + rng.next_index(3);
        let mut poems = Vec::new();
        for q in 0..poem_count {
            let verse_count = 3 + rng.next_index(5);
            let mut verses = Vec::new();
            let mut pos_tags = Vec::new();
            for _ in 0..verse_count {
                let token_count = 3 + rng.next_index(4);
                let mut raw = String::new();
                let mut tags = Vec::new();
                for t in 0..token_count {
                    if t > 0 {
                        raw.push_str(if rng.next_f64() < 0.2 { "  " } else { " " });
                    }
                    let token = &vocab[rng.next_index(vocab.len())];
                    raw.push_str(&denormalize(token, &mut rng));
                    tags.push(POS_TAGS[rng.next_index(POS_TAGS.len())].to_string());
                }
                if rng.next_f64() < 0.15 {
                    raw.push_str("!!");
                }
                verses.push(raw);
                pos_tags.push(tags);
            }
            let meter_label = if p == 7 || rng.next_f64() < 0.2 {
                None
            } else {
                Some(METERS[rng.next_index(METERS.len())].to_string())
            };
            poems.push(PoemRecord {
                poem_id: format!("{poet_id}-q{q}"),
                title: Some(format!("poem {q} of {poet_id}")),
                meter_label,
                verses,
                pos_tags: if tagged { Some(pos_tags) } else { None },
            });
        }
        poets.push(PoetRecord {
            poet_id,
            name: format!("Poet {p}, the {}", if p % 3 == 0 { "Elder" } else { "Younger" }),
            birth_year_hijri: Some(300 + (p as i32) * 31 % 900),
            poems,
        });
    }

    fs::create_dir_all(dir).unwrap();
    let corpus = dir.join("poets.jsonl");
    let lines: Vec<String> = poets
        .iter()
        .map(|p| serde_json::to_string(p).unwrap())
        .collect();
    fs::write(&corpus, lines.join("\n") + "\n").unwrap();

    // Word embeddings for ~90% of the vocabulary, dim 8.
    let word_embeddings = dir.join("words.vec");
    let mut text = String::new();
    for token in &vocab {
        if rng.next_f64() < 0.9 {
            text.push_str(token);
            for _ in 0..8 {
                text.push_str(&format!(" {:.6}", rng.next_f64() * 2.0 - 1.0));
            }
            text.push('\n');
        }
    }
    fs::write(&word_embeddings, text).unwrap();

    // Poem embeddings for every poem except the last poet's, dim 12.
    let poem_embeddings = dir.join("poems.vec");
    let mut text = String::new();
    for poet in poets.iter().take(poet_count.saturating_sub(1)) {
        for poem in &poet.poems {
            text.push_str(&poem.poem_id);
            for _ in 0..12 {
                text.push_str(&format!(" {:.6}", rng.next_f64() * 2.0 - 1.0));
            }
            text.push('\n');
        }
    }
    fs::write(&poem_embeddings, text).unwrap();

    Fixture {
        dir: dir.to_path_buf(),
        corpus,
        word_embeddings,
        poem_embeddings,
        poet_count,
    }
}

pub fn node_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// Random connected weighted graph: a spanning path plus extra edges.
pub fn random_connected_graph(rng: &mut SplitMix64, n: usize, extra_p: f64) -> InfluenceGraph {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 1..n {
        edges.push((i - 1, i, 0.1 + 0.9 * rng.next_f64()));
    }
    for i in 0..n {
        for j in (i + 2)..n {
            if rng.next_f64() < extra_p {
                edges.push((i, j, 0.1 + 0.9 * rng.next_f64()));
            }
        }
    }
    InfluenceGraph::from_edges(node_ids(n), &edges).unwrap()
}

/// Random graph that may be disconnected; unit weights.
pub fn random_unit_graph(rng: &mut SplitMix64, n: usize, p: f64) -> InfluenceGraph {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.next_f64() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    InfluenceGraph::from_edges(node_ids(n), &edges).unwrap()
}

/// Brute-force betweenness by explicit shortest-path enumeration,
/// normalized identically to the implementation under test.
pub fn brute_force_betweenness(g: &InfluenceGraph) -> Vec<f64> {
    let n = g.n();
    let mut centrality = vec![0.0; n];
    if n < 3 {
        return centrality;
    }
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|v| g.neighbors(v).iter().map(|&(u, _)| u).collect())
        .collect();
    for s in 0..n {
        let dist = bfs_distances(&adjacency, s);
        for t in (s + 1)..n {
            if dist[t] == usize::MAX {
                continue;
            }
            let mut paths: Vec<Vec<usize>> = Vec::new();
            let mut current = vec![t];
            enumerate_paths(&adjacency, &dist, s, t, &mut current, &mut paths);
            let sigma = paths.len() as f64;
            let mut through = vec![0usize; n];
            for path in &paths {
                for &v in &path[1..path.len() - 1] {
                    through[v] += 1;
                }
            }
            for v in 0..n {
                if v != s && v != t && through[v] > 0 {
                    centrality[v] += through[v] as f64 / sigma;
                }
            }
        }
    }
    let scale = 2.0 / ((n - 1) as f64 * (n - 2) as f64);
    for c in &mut centrality {
        *c *= scale;
    }
    centrality
}

fn bfs_distances(adjacency: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adjacency.len()];
    dist[s] = 0;
    let mut queue = std::collections::VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        for &u in &adjacency[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

// Walk backwards from t along strictly-decreasing BFS depth, emitting
// every shortest path.
fn enumerate_paths(
    adjacency: &[Vec<usize>],
    dist: &[usize],
    s: usize,
    v: usize,
    current: &mut Vec<usize>,
    paths: &mut Vec<Vec<usize>>,
) {
    if v == s {
        let mut path = current.clone();
        path.reverse();
        paths.push(path);
        return;
    }
    for &u in &adjacency[v] {
        if dist[u] + 1 == dist[v] {
            current.push(u);
            enumerate_paths(adjacency, dist, s, u, current, paths);
            current.pop();
        }
    }
}
