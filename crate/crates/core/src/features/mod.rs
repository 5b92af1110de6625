//! Feature extraction: stylistic statistics per poet, meter profiles,
//! poet-level idf weights, and aggregation of external embeddings.

pub mod embeddings;
pub mod pca;
pub mod tfidf;

pub use embeddings::{
    load_embeddings, EmbeddingError, EmbeddingLoad, EmbeddingTable, PoemEmbeddingTable,
    WordEmbeddingTable,
};
pub use pca::{pca_fit, pca_inverse_transform, pca_transform, zscore_columns, PcaModel, PcaTarget};
pub use tfidf::{tfidf_fit, TermDocMatrix, DEFAULT_MAX_FEATURES};

use crate::corpus::{tokenize, Corpus, PoetRecord};
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("corpus has no poets")]
    EmptyCorpus,
    #[error("poet \"{poet_id}\" has no tokens")]
    NoTokens { poet_id: String },
    #[error("insufficient rows: got {got}, need at least {needed}")]
    InsufficientRows { got: usize, needed: usize },
    #[error("requested {k} components, at most {max} available")]
    ComponentsTooLarge { k: usize, max: usize },
    #[error("poet \"{poet_id}\" has no embedded poems")]
    NoEmbeddedPoems { poet_id: String },
    #[error("embedding keys not present in corpus: {}", ids.join(", "))]
    UnknownPoemIds { ids: Vec<String> },
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// Column order shared by the feature matrix and the features CSV export.
pub const STYLISTIC_FIELDS: [&str; 11] = [
    "avg_verse_len",
    "avg_word_len",
    "type_token_ratio",
    "pos_diversity",
    "noun_ratio",
    "verb_ratio",
    "adj_ratio",
    "adv_ratio",
    "word_len_variance",
    "word_len_std",
    "syllable_complexity",
];

/// Low-level stylistic statistics of one poet's corpus. POS-derived
/// fields are zero when no tags were supplied; `pos_tagged` records
/// whether any were.
#[derive(Debug, Clone, PartialEq)]
pub struct StylisticFeatureVector {
    pub avg_verse_len: f64,
    pub avg_word_len: f64,
    pub type_token_ratio: f64,
    pub pos_diversity: f64,
    pub noun_ratio: f64,
    pub verb_ratio: f64,
    pub adj_ratio: f64,
    pub adv_ratio: f64,
    pub word_len_variance: f64,
    pub word_len_std: f64,
    pub syllable_complexity: f64,
    pub pos_tagged: bool,
}

impl StylisticFeatureVector {
    pub fn to_row(&self) -> Vec<f64> {
        vec![
            self.avg_verse_len,
            self.avg_word_len,
            self.type_token_ratio,
            self.pos_diversity,
            self.noun_ratio,
            self.verb_ratio,
            self.adj_ratio,
            self.adv_ratio,
            self.word_len_variance,
            self.word_len_std,
            self.syllable_complexity,
        ]
    }
}

// Tag classes are matched by prefix on the uppercased tag, covering both
// Persian tagger conventions (N/V/AJ/ADV) and Penn-style tags (NN/VB/JJ/RB).
fn is_adverb(tag: &str) -> bool {
    tag.starts_with("ADV") || tag.starts_with('R')
}

fn is_adjective(tag: &str) -> bool {
    tag.starts_with("ADJ") || tag.starts_with("AJ") || tag.starts_with('J')
}

fn is_noun(tag: &str) -> bool {
    tag.starts_with('N')
}

fn is_verb(tag: &str) -> bool {
    tag.starts_with('V')
}

/// Vowel letters counted for syllable complexity: alef, waw, yeh, heh
/// anywhere in the token, plus a word-initial alef-madda.
fn vowel_count(token: &str) -> usize {
    let mut count = 0;
    for (i, c) in token.chars().enumerate() {
        match c {
            '\u{0627}' | '\u{0648}' | '\u{06CC}' | '\u{0647}' => count += 1,
            '\u{0622}' if i == 0 => count += 1,
            _ => {}
        }
    }
    count
}

/// Compute the full stylistic vector for one poet. The poet must yield at
/// least one token.
pub fn extract_stylistic_features(
    poet: &PoetRecord,
) -> Result<StylisticFeatureVector, FeatureError> {
    // Length sums accumulate as integers so the result is exactly
    // invariant under poem reordering.
    let mut verse_count = 0usize;
    let mut total = 0u64;
    let mut len_sum = 0u64;
    let mut len_sq_sum = 0u64;
    let mut distinct: HashSet<String> = HashSet::new();
    let mut vowel_total = 0u64;
    let mut tags: Vec<String> = Vec::new();
    for poem in &poet.poems {
        for verse in &poem.verses {
            verse_count += 1;
            for tok in tokenize(verse) {
                let len = tok.chars().count() as u64;
                total += 1;
                len_sum += len;
                len_sq_sum += len * len;
                vowel_total += vowel_count(&tok) as u64;
                distinct.insert(tok);
            }
        }
        if let Some(pos) = &poem.pos_tags {
            for seq in pos {
                for tag in seq {
                    tags.push(tag.to_uppercase());
                }
            }
        }
    }
    if total == 0 {
        return Err(FeatureError::NoTokens {
            poet_id: poet.poet_id.clone(),
        });
    }
    let total_f = total as f64;
    let mean_len = len_sum as f64 / total_f;
    let variance = (len_sq_sum as f64 / total_f - mean_len * mean_len).max(0.0);

    let (mut nouns, mut verbs, mut adjs, mut advs) = (0usize, 0, 0, 0);
    let mut distinct_tags: HashSet<&str> = HashSet::new();
    for tag in &tags {
        distinct_tags.insert(tag.as_str());
        if is_adverb(tag) {
            advs += 1;
        } else if is_adjective(tag) {
            adjs += 1;
        } else if is_noun(tag) {
            nouns += 1;
        } else if is_verb(tag) {
            verbs += 1;
        }
    }
    let tag_total = tags.len() as f64;
    let ratio = |count: usize| {
        if tags.is_empty() {
            0.0
        } else {
            count as f64 / tag_total
        }
    };

    Ok(StylisticFeatureVector {
        avg_verse_len: total_f / verse_count as f64,
        avg_word_len: mean_len,
        type_token_ratio: distinct.len() as f64 / total_f,
        pos_diversity: if tags.is_empty() {
            0.0
        } else {
            distinct_tags.len() as f64 / tag_total
        },
        noun_ratio: ratio(nouns),
        verb_ratio: ratio(verbs),
        adj_ratio: ratio(adjs),
        adv_ratio: ratio(advs),
        word_len_variance: variance,
        word_len_std: variance.sqrt(),
        syllable_complexity: vowel_total as f64 / total_f,
        pos_tagged: !tags.is_empty(),
    })
}

/// Stylistic vectors for every poet, in corpus order.
pub fn stylistic_feature_matrix(
    corpus: &Corpus,
) -> Result<Vec<StylisticFeatureVector>, FeatureError> {
    if corpus.poets.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    corpus.poets.iter().map(extract_stylistic_features).collect()
}

/// Frequency distribution of a poet's meter labels. Poems without a
/// label are skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeterProfile {
    pub counts: BTreeMap<String, u32>,
}

impl MeterProfile {
    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn meter_profile(poet: &PoetRecord) -> MeterProfile {
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    for poem in &poet.poems {
        if let Some(label) = &poem.meter_label {
            *counts.entry(label.clone()).or_insert(0) += 1;
        }
    }
    MeterProfile { counts }
}

/// Arithmetic mean of the poem embeddings available for this poet.
pub fn aggregate_poem_embeddings(
    poet: &PoetRecord,
    table: &PoemEmbeddingTable,
) -> Result<Vec<f64>, FeatureError> {
    let mut sum = vec![0.0; table.dim];
    let mut count = 0usize;
    for poem in &poet.poems {
        if let Some(vec) = table.get(&poem.poem_id) {
            for (s, v) in sum.iter_mut().zip(vec) {
                *s += v;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(FeatureError::NoEmbeddedPoems {
            poet_id: poet.poet_id.clone(),
        });
    }
    for s in &mut sum {
        *s /= count as f64;
    }
    Ok(sum)
}

/// Every key of a poem-embedding table must name a poem in the corpus.
pub fn validate_poem_keys(table: &PoemEmbeddingTable, corpus: &Corpus) -> Result<(), FeatureError> {
    let known: HashSet<&str> = corpus
        .poets
        .iter()
        .flat_map(|p| p.poems.iter().map(|poem| poem.poem_id.as_str()))
        .collect();
    let mut unknown: Vec<String> = table
        .vectors
        .keys()
        .filter(|k| !known.contains(k.as_str()))
        .cloned()
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        unknown.sort();
        Err(FeatureError::UnknownPoemIds { ids: unknown })
    }
}

/// Poet-granularity inverse document frequency: idf(t) = ln(1 + P / df(t)).
pub fn poet_idf(corpus: &Corpus) -> HashMap<String, f64> {
    let p = corpus.poets.len() as f64;
    let mut df: HashMap<String, u64> = HashMap::new();
    for poet in &corpus.poets {
        let mut seen: HashSet<String> = HashSet::new();
        for poem in &poet.poems {
            for verse in &poem.verses {
                for tok in tokenize(verse) {
                    seen.insert(tok);
                }
            }
        }
        for tok in seen {
            *df.entry(tok).or_insert(0) += 1;
        }
    }
    df.into_iter()
        .map(|(tok, d)| (tok, (1.0 + p / d as f64).ln()))
        .collect()
}
