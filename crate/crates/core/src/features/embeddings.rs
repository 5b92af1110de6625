//! Loader for external embedding files in the word2vec text format:
//! an optional `count dim` header line, then one `key v1 v2 ... vdim`
//! record per line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("failed to read embedding file: {0}")]
    Io(#[from] std::io::Error),
    #[error("non-numeric field at line {line}")]
    NonNumeric { line: usize },
    #[error("non-finite value at line {line}")]
    NonFinite { line: usize },
    #[error("vector for \"{key}\" has length {got}, expected {expected}")]
    LengthMismatch {
        key: String,
        expected: usize,
        got: usize,
    },
    #[error("no vectors in embedding file")]
    Empty,
}

/// A table of fixed-dimension dense vectors keyed by string. Used both for
/// word vectors (keyed by token) and poem vectors (keyed by poem id).
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
}

pub type WordEmbeddingTable = EmbeddingTable;
pub type PoemEmbeddingTable = EmbeddingTable;

impl EmbeddingTable {
    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.vectors.get(key).map(|v| v.as_slice())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Result of a load: the table plus how many keys were overwritten by a
/// later duplicate line (last occurrence wins).
#[derive(Debug)]
pub struct EmbeddingLoad {
    pub table: EmbeddingTable,
    pub duplicates: usize,
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingLoad, EmbeddingError> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();
    let mut dim: Option<usize> = None;
    let mut duplicates = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        // A first line of exactly two integers is the "count dim" header.
        if line_no == 1 && fields.len() == 2 {
            if let (Ok(_), Ok(d)) = (fields[0].parse::<u64>(), fields[1].parse::<usize>()) {
                dim = Some(d);
                continue;
            }
        }
        let key = fields[0].to_string();
        let mut values = Vec::with_capacity(fields.len() - 1);
        for f in &fields[1..] {
            let v: f64 = f
                .parse()
                .map_err(|_| EmbeddingError::NonNumeric { line: line_no })?;
            if !v.is_finite() {
                return Err(EmbeddingError::NonFinite { line: line_no });
            }
            values.push(v);
        }
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(EmbeddingError::LengthMismatch {
                    key,
                    expected: d,
                    got: values.len(),
                });
            }
            Some(_) => {}
        }
        if vectors.insert(key, values).is_some() {
            duplicates += 1;
        }
    }
    if vectors.is_empty() {
        return Err(EmbeddingError::Empty);
    }
    Ok(EmbeddingLoad {
        table: EmbeddingTable {
            dim: dim.unwrap(),
            vectors,
        },
        duplicates,
    })
}
