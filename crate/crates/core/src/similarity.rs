//! The five poet-by-poet similarity matrices (semantic, stylistic,
//! thematic, meter, lexical) and their fusion into one matrix.
//!
//! Every matrix is exactly symmetric (each unordered pair is evaluated
//! once and written into both cells), has a unit diagonal, and keeps all
//! entries in [0, 1].

use crate::corpus::{tokenize, Corpus, PoetRecord};
use crate::features::{MeterProfile, TermDocMatrix, WordEmbeddingTable};
use crate::util::{csv_field, csv_split, sig12};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("poet \"{poet_id}\" has no embedded vocabulary")]
    NoEmbeddedVocab { poet_id: String },
    #[error("feature rows have zero components")]
    ZeroComponents,
    #[error("poet orderings differ between matrices")]
    PoetOrderMismatch,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("matrix CSV is malformed: {0}")]
    MalformedCsv(String),
}

/// Dense symmetric similarity matrix over an ordered poet list.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub poet_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    /// Build from a pair function evaluated once per unordered pair; the
    /// diagonal is fixed at 1.
    #[allow(clippy::needless_range_loop)]
    pub fn from_pairs<F>(poet_ids: Vec<String>, mut pair: F) -> Self
    where
        F: FnMut(usize, usize) -> f64,
    {
        let n = poet_ids.len();
        let mut values = vec![vec![0.0; n]; n];
        for i in 0..n {
            values[i][i] = 1.0;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let v = pair(i, j);
                values[i][j] = v;
                values[j][i] = v;
            }
        }
        SimilarityMatrix { poet_ids, values }
    }

    /// Unit diagonal, all off-diagonal entries zero.
    pub fn zero(poet_ids: Vec<String>) -> Self {
        Self::from_pairs(poet_ids, |_, _| 0.0)
    }

    pub fn n(&self) -> usize {
        self.poet_ids.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Verify the type invariants: exact symmetry, unit diagonal, finite
    /// entries in [0, 1].
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.n();
        if self.values.len() != n || self.values.iter().any(|r| r.len() != n) {
            return Err("matrix shape does not match poet list".into());
        }
        for i in 0..n {
            if self.values[i][i] != 1.0 {
                return Err(format!("diagonal entry {i} is {}", self.values[i][i]));
            }
            for j in 0..n {
                let v = self.values[i][j];
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(format!("entry ({i},{j}) = {v} out of range"));
                }
                if self.values[j][i] != v {
                    return Err(format!("asymmetry at ({i},{j})"));
                }
            }
        }
        Ok(())
    }

    /// Embed this matrix into a larger poet list. Poets absent from
    /// `self` get zero similarity to everyone and 1 to themselves.
    pub fn expand(&self, full_ids: &[String]) -> SimilarityMatrix {
        let index: HashMap<&str, usize> = self
            .poet_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let positions: Vec<Option<usize>> = full_ids
            .iter()
            .map(|id| index.get(id.as_str()).copied())
            .collect();
        SimilarityMatrix::from_pairs(full_ids.to_vec(), |i, j| {
            match (positions[i], positions[j]) {
                (Some(a), Some(b)) => self.values[a][b],
                _ => 0.0,
            }
        })
    }

    /// CSV with a header row and leading column of poet ids, values at 12
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("poet_id");
        for id in &self.poet_ids {
            out.push(',');
            out.push_str(&csv_field(id));
        }
        out.push('\n');
        for (i, id) in self.poet_ids.iter().enumerate() {
            out.push_str(&csv_field(id));
            for v in &self.values[i] {
                out.push(',');
                out.push_str(&sig12(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<SimilarityMatrix, SimilarityError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| SimilarityError::MalformedCsv("empty input".into()))?;
        let ids: Vec<String> = csv_split(header).into_iter().skip(1).collect();
        let n = ids.len();
        let mut values = Vec::with_capacity(n);
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let row_idx = values.len();
            let fields = csv_split(line);
            if fields.len() != n + 1 {
                return Err(SimilarityError::MalformedCsv(format!(
                    "row {} has {} fields, expected {}",
                    row_idx + 1,
                    fields.len(),
                    n + 1
                )));
            }
            if row_idx >= n || fields[0] != ids[row_idx] {
                return Err(SimilarityError::MalformedCsv(format!(
                    "unexpected row label \"{}\"",
                    fields[0]
                )));
            }
            let row: Result<Vec<f64>, _> = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| SimilarityError::MalformedCsv(format!("bad float {f:?}")))
                })
                .collect();
            values.push(row?);
        }
        if values.len() != n {
            return Err(SimilarityError::MalformedCsv(format!(
                "{} rows for {} poets",
                values.len(),
                n
            )));
        }
        Ok(SimilarityMatrix {
            poet_ids: ids,
            values,
        })
    }
}

/// Parameters of the semantic measure; the blends keep the result in
/// [0, 1] with 0 mapped to 0 and 1 to 1.
#[derive(Debug, Clone)]
pub struct SemanticParams {
    /// Blend between pure embedding alignment and the squared
    /// frequency-ratio penalty (gamma).
    pub freq_blend: f64,
    /// Blend between pure embedding alignment and Jaccard vocabulary
    /// overlap (delta).
    pub jaccard_blend: f64,
    /// Exponential contrast strength (k).
    pub scale_k: f64,
    /// Per-poet vocabulary truncation before the max-cosine step.
    pub top_n_vocab: usize,
}

impl Default for SemanticParams {
    fn default() -> Self {
        Self {
            freq_blend: 0.5,
            jaccard_blend: 0.5,
            scale_k: 3.0,
            top_n_vocab: 2000,
        }
    }
}

impl SemanticParams {
    pub fn validate(&self) -> Result<(), SimilarityError> {
        if !(0.0..=1.0).contains(&self.freq_blend) || !(0.0..=1.0).contains(&self.jaccard_blend) {
            return Err(SimilarityError::InvalidParams(
                "blend factors must lie in [0, 1]".into(),
            ));
        }
        if self.scale_k <= 0.0 || self.scale_k.is_nan() {
            return Err(SimilarityError::InvalidParams(
                "scale_k must be positive".into(),
            ));
        }
        if self.top_n_vocab == 0 {
            return Err(SimilarityError::InvalidParams(
                "top_n_vocab must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Fusion weights for (semantic, stylistic, thematic, meter, lexical).
#[derive(Debug, Clone)]
pub struct FusionParams {
    pub weights: [f64; 5],
}

impl Default for FusionParams {
    fn default() -> Self {
        Self { weights: [0.2; 5] }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<(), SimilarityError> {
        if self.weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(SimilarityError::InvalidParams(
                "fusion weights must be nonnegative".into(),
            ));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(SimilarityError::InvalidParams(format!(
                "fusion weights sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

/// Cosine similarity, clamped into [-1, 1]. Either vector being all-zero
/// yields 0 by convention.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, SimilarityError> {
    if u.len() != v.len() {
        return Err(SimilarityError::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

fn euclidean(u: &[f64], v: &[f64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn manhattan(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum()
}

/// The exponential contrast map (e^(k*raw) - 1) / (e^k - 1): strictly
/// increasing on [0, 1] with 0 -> 0 and 1 -> 1.
pub fn contrast_scale(raw: f64, k: f64) -> f64 {
    ((k * raw).exp() - 1.0) / (k.exp() - 1.0)
}

/// A poet's truncated vocabulary with token frequencies, ready for the
/// semantic measure. Tokens are the `top_n` most frequent (ties broken
/// lexicographically).
#[derive(Debug, Clone)]
pub struct PoetVocab {
    pub poet_id: String,
    pub freqs: BTreeMap<String, u64>,
}

pub fn poet_vocab(poet: &PoetRecord, top_n: usize) -> PoetVocab {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for poem in &poet.poems {
        for verse in &poem.verses {
            for tok in tokenize(verse) {
                *counts.entry(tok).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_n);
    PoetVocab {
        poet_id: poet.poet_id.clone(),
        freqs: ranked.into_iter().collect(),
    }
}

// Embedded tokens of a vocabulary: idf weight plus unit-normalized vector,
// kept in token order so accumulation is deterministic.
struct EmbeddedVocab {
    weights: Vec<f64>,
    units: Vec<Vec<f64>>,
}

fn embed_vocab(
    vocab: &PoetVocab,
    emb: &WordEmbeddingTable,
    idf: &HashMap<String, f64>,
) -> EmbeddedVocab {
    let mut weights = Vec::new();
    let mut units = Vec::new();
    for token in vocab.freqs.keys() {
        if let Some(v) = emb.get(token) {
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let unit = if norm > 0.0 {
                v.iter().map(|x| x / norm).collect()
            } else {
                v.to_vec()
            };
            weights.push(idf.get(token).copied().unwrap_or(1.0));
            units.push(unit);
        }
    }
    EmbeddedVocab { weights, units }
}

/// Directional embedding alignment: idf-weighted mean over `from` of the
/// best (nonnegative) cosine against any vector of `to`.
fn directional_alignment(from: &EmbeddedVocab, to: &EmbeddedVocab) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, u) in from.weights.iter().zip(&from.units) {
        let mut best = 0.0f64;
        for v in &to.units {
            let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
            // Unit vectors can overshoot 1 by an ulp; the clamp keeps the
            // self-similarity anchor exact.
            let c = dot.clamp(-1.0, 1.0).max(0.0);
            if c > best {
                best = c;
            }
        }
        num += w * best;
        den += w;
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn semantic_from_profiles(
    a: &PoetVocab,
    ea: &EmbeddedVocab,
    b: &PoetVocab,
    eb: &EmbeddedVocab,
    p: &SemanticParams,
) -> f64 {
    let base = 0.5 * (directional_alignment(ea, eb) + directional_alignment(eb, ea));

    // Frequency similarity over shared words: mean squared min/max ratio.
    let mut shared = 0usize;
    let mut ratio_sum = 0.0;
    for (tok, &fa) in &a.freqs {
        if let Some(&fb) = b.freqs.get(tok) {
            shared += 1;
            let r = fa.min(fb) as f64 / fa.max(fb) as f64;
            ratio_sum += r * r;
        }
    }
    let freq_sim = if shared > 0 {
        ratio_sum / shared as f64
    } else {
        0.0
    };

    let union = a.freqs.len() + b.freqs.len() - shared;
    let jaccard = if union > 0 {
        shared as f64 / union as f64
    } else {
        0.0
    };

    let raw = base
        * (p.freq_blend + (1.0 - p.freq_blend) * freq_sim)
        * (p.jaccard_blend + (1.0 - p.jaccard_blend) * jaccard);
    contrast_scale(raw, p.scale_k)
}

/// Semantic similarity of one poet pair. Both poets must have at least
/// one embedded token among their truncated vocabularies.
pub fn semantic_pair(
    a: &PoetVocab,
    b: &PoetVocab,
    emb: &WordEmbeddingTable,
    idf: &HashMap<String, f64>,
    p: &SemanticParams,
) -> Result<f64, SimilarityError> {
    p.validate()?;
    let ea = embed_vocab(a, emb, idf);
    let eb = embed_vocab(b, emb, idf);
    if ea.units.is_empty() {
        return Err(SimilarityError::NoEmbeddedVocab {
            poet_id: a.poet_id.clone(),
        });
    }
    if eb.units.is_empty() {
        return Err(SimilarityError::NoEmbeddedVocab {
            poet_id: b.poet_id.clone(),
        });
    }
    Ok(semantic_from_profiles(a, &ea, b, &eb, p))
}

/// The full semantic matrix. Poets with no embedded vocabulary are kept
/// with zero similarity to everyone; each such poet adds a warning.
pub fn semantic_matrix(
    corpus: &Corpus,
    emb: &WordEmbeddingTable,
    idf: &HashMap<String, f64>,
    p: &SemanticParams,
) -> Result<(SimilarityMatrix, Vec<String>), SimilarityError> {
    p.validate()?;
    let vocabs: Vec<PoetVocab> = corpus
        .poets
        .iter()
        .map(|poet| poet_vocab(poet, p.top_n_vocab))
        .collect();
    let embedded: Vec<EmbeddedVocab> = vocabs.iter().map(|v| embed_vocab(v, emb, idf)).collect();
    let mut warnings = Vec::new();
    for (vocab, emb_vocab) in vocabs.iter().zip(&embedded) {
        if emb_vocab.units.is_empty() {
            warnings.push(format!(
                "poet \"{}\" has no embedded vocabulary; semantic similarity set to 0",
                vocab.poet_id
            ));
        }
    }
    let matrix = SimilarityMatrix::from_pairs(corpus.poet_ids(), |i, j| {
        if embedded[i].units.is_empty() || embedded[j].units.is_empty() {
            0.0
        } else {
            semantic_from_profiles(&vocabs[i], &embedded[i], &vocabs[j], &embedded[j], p)
        }
    });
    Ok((matrix, warnings))
}

/// Stylistic similarity over PCA-reduced z-scored feature rows:
/// 0.5 * (cos+1)/2 + 0.25 / (1+d_euclid) + 0.25 / (1+d_manhattan).
pub fn stylistic_matrix(
    poet_ids: Vec<String>,
    rows: &[Vec<f64>],
) -> Result<SimilarityMatrix, SimilarityError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(SimilarityError::ZeroComponents);
    }
    Ok(SimilarityMatrix::from_pairs(poet_ids, |i, j| {
        let (x, y) = (&rows[i], &rows[j]);
        if x == y {
            return 1.0;
        }
        let c01 = (cosine(x, y).expect("equal lengths") + 1.0) / 2.0;
        let e_sim = 1.0 / (1.0 + euclidean(x, y));
        let m_sim = 1.0 / (1.0 + manhattan(x, y));
        0.5 * c01 + 0.25 * e_sim + 0.25 * m_sim
    }))
}

/// Thematic similarity over PCA-reduced poem-embedding means:
/// 0.5 c^2 + 0.2 eS^2 + 0.2 mS^2 + 0.1 b^2, with the cosine clamped at 0
/// before squaring and Bray-Curtis computed on min-shifted (nonnegative)
/// coordinates.
pub fn thematic_matrix(
    poet_ids: Vec<String>,
    vectors: &[Vec<f64>],
) -> Result<SimilarityMatrix, SimilarityError> {
    if vectors.is_empty() || vectors[0].is_empty() {
        return Err(SimilarityError::ZeroComponents);
    }
    let dim = vectors[0].len();
    let mut mins = vec![f64::INFINITY; dim];
    for v in vectors {
        for (m, x) in mins.iter_mut().zip(v) {
            *m = m.min(*x);
        }
    }
    let shifted: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mins).map(|(x, m)| x - m).collect())
        .collect();
    Ok(SimilarityMatrix::from_pairs(poet_ids, |i, j| {
        let (x, y) = (&vectors[i], &vectors[j]);
        if x == y {
            return 1.0;
        }
        let c = cosine(x, y).expect("equal lengths").max(0.0);
        let e_sim = 1.0 / (1.0 + euclidean(x, y));
        let m_sim = 1.0 / (1.0 + manhattan(x, y));
        let (sx, sy) = (&shifted[i], &shifted[j]);
        let denom: f64 = sx.iter().zip(sy).map(|(a, b)| a + b).sum();
        let bray = if denom > 0.0 {
            (1.0 - manhattan(sx, sy) / denom).max(0.0)
        } else if sx == sy {
            1.0
        } else {
            0.0
        };
        0.5 * c * c + 0.2 * e_sim * e_sim + 0.2 * m_sim * m_sim + 0.1 * bray * bray
    }))
}

/// Meter similarity: cosine over label-count vectors in the union label
/// space. An empty profile is similar to no one (and 1 to itself).
pub fn meter_matrix(poet_ids: Vec<String>, profiles: &[MeterProfile]) -> SimilarityMatrix {
    let labels: BTreeSet<&String> = profiles.iter().flat_map(|p| p.counts.keys()).collect();
    let index: HashMap<&String, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let vectors: Vec<Vec<f64>> = profiles
        .iter()
        .map(|p| {
            let mut v = vec![0.0; index.len().max(1)];
            for (label, &count) in &p.counts {
                v[index[label]] = count as f64;
            }
            v
        })
        .collect();
    SimilarityMatrix::from_pairs(poet_ids, |i, j| {
        cosine(&vectors[i], &vectors[j])
            .expect("equal lengths")
            .max(0.0)
    })
}

/// Lexical similarity: dot products of the L2-normalized TF-IDF rows.
pub fn lexical_matrix(tdm: &TermDocMatrix) -> SimilarityMatrix {
    SimilarityMatrix::from_pairs(tdm.poet_ids.clone(), |i, j| {
        tdm.row_dot(i, j).clamp(0.0, 1.0)
    })
}

/// Fuse the five matrices: min-max normalize each over its off-diagonal
/// entries, then combine with the given weights. A constant off-diagonal
/// maps to all-zero, except in the two-poet case where the single value
/// normalizes to 1.
pub fn fuse(
    matrices: &[SimilarityMatrix; 5],
    p: &FusionParams,
) -> Result<SimilarityMatrix, SimilarityError> {
    p.validate()?;
    let ids = &matrices[0].poet_ids;
    if matrices.iter().any(|m| &m.poet_ids != ids) {
        return Err(SimilarityError::PoetOrderMismatch);
    }
    let n = ids.len();
    let mut ranges = Vec::with_capacity(5);
    for m in matrices.iter() {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            for j in (i + 1)..n {
                lo = lo.min(m.values[i][j]);
                hi = hi.max(m.values[i][j]);
            }
        }
        ranges.push((lo, hi));
    }
    Ok(SimilarityMatrix::from_pairs(ids.clone(), |i, j| {
        let mut acc = 0.0;
        for (d, m) in matrices.iter().enumerate() {
            let (lo, hi) = ranges[d];
            let normalized = if hi > lo {
                (m.values[i][j] - lo) / (hi - lo)
            } else if n == 2 {
                1.0
            } else {
                0.0
            };
            acc += p.weights[d] * normalized;
        }
        acc.clamp(0.0, 1.0)
    }))
}
