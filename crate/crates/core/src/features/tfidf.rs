//! TF-IDF document matrix over poets.
//!
//! Each poet's cleaned poems are concatenated into one token stream, term
//! frequencies are raw counts, idf(t) = ln((1 + P) / (1 + df(t))) + 1 at
//! poet granularity, and every row is L2-normalized. The vocabulary is
//! capped at `max_features` tokens chosen by total corpus count (ties
//! broken lexicographically) and stored sorted.

use crate::corpus::{tokenize, Corpus};
use std::collections::HashMap;

use super::FeatureError;

pub const DEFAULT_MAX_FEATURES: usize = 100_000;

/// Sparse TF-IDF rows over a shared vocabulary, one row per poet in
/// corpus order. Row entries are (vocabulary index, weight) sorted by
/// index; nonzero rows have unit L2 norm.
#[derive(Debug, Clone)]
pub struct TermDocMatrix {
    pub poet_ids: Vec<String>,
    pub vocabulary: Vec<String>,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl TermDocMatrix {
    pub fn row_dot(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.rows[i], &self.rows[j]);
        let mut dot = 0.0;
        let (mut x, mut y) = (0usize, 0usize);
        while x < a.len() && y < b.len() {
            match a[x].0.cmp(&b[y].0) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    dot += a[x].1 * b[y].1;
                    x += 1;
                    y += 1;
                }
            }
        }
        dot
    }
}

/// Build the TF-IDF matrix for a normalized corpus.
pub fn tfidf_fit(corpus: &Corpus, max_features: usize) -> Result<TermDocMatrix, FeatureError> {
    if corpus.poets.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let p = corpus.poets.len();

    // One concatenated token stream per poet.
    let mut poet_counts: Vec<HashMap<String, u64>> = Vec::with_capacity(p);
    let mut total_counts: HashMap<String, u64> = HashMap::new();
    let mut doc_freq: HashMap<String, u64> = HashMap::new();
    for poet in &corpus.poets {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for poem in &poet.poems {
            for verse in &poem.verses {
                for tok in tokenize(verse) {
                    *counts.entry(tok).or_insert(0) += 1;
                }
            }
        }
        for (tok, c) in &counts {
            *total_counts.entry(tok.clone()).or_insert(0) += c;
            *doc_freq.entry(tok.clone()).or_insert(0) += 1;
        }
        poet_counts.push(counts);
    }

    // Top max_features tokens by total count, ties lexicographic; the
    // stored vocabulary is then sorted for deterministic indexing.
    let mut ranked: Vec<(&String, &u64)> = total_counts.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    let mut vocabulary: Vec<String> = ranked
        .into_iter()
        .take(max_features)
        .map(|(t, _)| t.clone())
        .collect();
    vocabulary.sort();
    let index: HashMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(p);
    for counts in &poet_counts {
        let mut row: Vec<(usize, f64)> = Vec::new();
        for (tok, &tf) in counts {
            if let Some(&col) = index.get(tok.as_str()) {
                let df = doc_freq[tok] as f64;
                let idf = ((1.0 + p as f64) / (1.0 + df)).ln() + 1.0;
                row.push((col, tf as f64 * idf));
            }
        }
        row.sort_by_key(|&(col, _)| col);
        let norm: f64 = row.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut row {
                *w /= norm;
            }
        }
        rows.push(row);
    }

    Ok(TermDocMatrix {
        poet_ids: corpus.poet_ids(),
        vocabulary,
        rows,
    })
}
