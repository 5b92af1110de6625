//! Corpus ingestion: loading poet records from line-delimited JSON,
//! Persian/Arabic-script text normalization, tokenization, and the
//! minimum-output filter.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use thiserror::Error;
use unicode_general_category::{get_general_category, GeneralCategory};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read corpus file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse failure at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate poet_id \"{poet_id}\"")]
    DuplicatePoet { poet_id: String },
    #[error("poem \"{poem_id}\" of poet \"{poet_id}\" (line {line}) has no verses")]
    EmptyVerses {
        line: usize,
        poet_id: String,
        poem_id: String,
    },
    #[error("corpus is already normalized")]
    AlreadyNormalized,
}

/// One poem: an ordered list of verse lines (hemistichs) with optional
/// metadata. `pos_tags`, when present, parallels `verses` with one tag
/// sequence per verse.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoemRecord {
    pub poem_id: String,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub meter_label: Option<String>,
    pub verses: Vec<String>,
    #[serde(default)]
    pub pos_tags: Option<Vec<Vec<String>>>,
}

/// One poet with all attributed poems. Birth years use the Hijri calendar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoetRecord {
    pub poet_id: String,
    pub name: String,
    #[serde(default)]
    pub birth_year_hijri: Option<i32>,
    pub poems: Vec<PoemRecord>,
}

impl PoetRecord {
    /// Total verse-line count across all poems.
    pub fn verse_count(&self) -> usize {
        self.poems.iter().map(|p| p.verses.len()).sum()
    }
}

/// The loaded corpus. Poets are kept sorted by `poet_id` so every
/// downstream matrix indexes deterministically.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub poets: Vec<PoetRecord>,
    pub source_path: String,
    pub normalization_applied: bool,
}

impl Corpus {
    pub fn poet_ids(&self) -> Vec<String> {
        self.poets.iter().map(|p| p.poet_id.clone()).collect()
    }
}

/// Load a corpus from a line-delimited JSON file: one poet object per
/// line, UTF-8. Poets come back sorted by id with normalization pending.
pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut poets: Vec<PoetRecord> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut poet: PoetRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
        if !seen.insert(poet.poet_id.clone()) {
            return Err(CorpusError::DuplicatePoet {
                poet_id: poet.poet_id,
            });
        }
        for poem in &mut poet.poems {
            if poem.verses.is_empty() {
                return Err(CorpusError::EmptyVerses {
                    line: line_no,
                    poet_id: poet.poet_id.clone(),
                    poem_id: poem.poem_id.clone(),
                });
            }
            // Canonicalize meter labels: trimmed, and never empty.
            if let Some(label) = &poem.meter_label {
                let trimmed = label.trim();
                poem.meter_label = if trimmed.is_empty() {
                    None
                } else {
                    Some(trimmed.to_string())
                };
            }
        }
        poets.push(poet);
    }
    poets.sort_by(|a, b| a.poet_id.cmp(&b.poet_id));
    Ok(Corpus {
        poets,
        source_path: path.display().to_string(),
        normalization_applied: false,
    })
}

/// Character-form standardization table: Arabic-script variants mapped to
/// their Persian counterparts, and both Arabic-Indic digit blocks mapped
/// to ASCII digits.
fn map_char(c: char) -> char {
    match c {
        '\u{064A}' => '\u{06CC}', // Arabic yeh -> Persian yeh
        '\u{0643}' => '\u{06A9}', // Arabic kaf -> Persian keheh
        '\u{0629}' => '\u{0647}', // teh marbuta -> heh
        '\u{0623}' | '\u{0625}' => '\u{0627}', // hamza-carrying alef -> alef
        '\u{0624}' => '\u{0648}', // waw with hamza -> waw
        '\u{0660}'..='\u{0669}' => {
            char::from_u32('0' as u32 + (c as u32 - 0x0660)).unwrap()
        }
        '\u{06F0}'..='\u{06F9}' => {
            char::from_u32('0' as u32 + (c as u32 - 0x06F0)).unwrap()
        }
        other => other,
    }
}

fn is_removed_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{0652}' | '\u{0670}')
}

// ZWSP, ZWNJ, ZWJ, LRM, RLM, word joiner, BOM.
fn is_zero_width(c: char) -> bool {
    matches!(c, '\u{200B}'..='\u{200F}' | '\u{2060}' | '\u{FEFF}')
}

/// True for any Unicode punctuation (general categories P*), which also
/// covers the Arabic comma, semicolon, question mark, and guillemets.
pub fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Normalize one string: apply the character mapping, drop the combining
/// diacritics in U+064B..=U+0652 and U+0670, delete zero-width format
/// characters, collapse runs of an identical punctuation character, and
/// collapse/trim whitespace.
///
/// Total and idempotent; never increases the number of scalar values.
pub fn normalize_text(raw: &str) -> String {
    let mapped = raw
        .chars()
        .map(map_char)
        .filter(|&c| !is_removed_diacritic(c) && !is_zero_width(c));

    // Collapse repeated identical punctuation in the same pass.
    let mut collapsed = String::with_capacity(raw.len());
    let mut prev: Option<char> = None;
    for c in mapped {
        if let Some(p) = prev {
            if p == c && is_punctuation(c) {
                continue;
            }
        }
        collapsed.push(c);
        prev = Some(c);
    }

    let mut out = String::with_capacity(collapsed.len());
    let mut pending_space = false;
    for c in collapsed.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

/// Normalize every verse of every poem. Rejects a corpus that has already
/// been normalized; verse counts are unchanged.
pub fn normalize_corpus(mut corpus: Corpus) -> Result<Corpus, CorpusError> {
    if corpus.normalization_applied {
        return Err(CorpusError::AlreadyNormalized);
    }
    for poet in &mut corpus.poets {
        for poem in &mut poet.poems {
            for verse in &mut poem.verses {
                *verse = normalize_text(verse);
            }
        }
    }
    corpus.normalization_applied = true;
    Ok(corpus)
}

/// Keep exactly the poets whose total verse-line count is at least
/// `min_lines`; relative order is preserved.
pub fn filter_poets(corpus: Corpus, min_lines: usize) -> Corpus {
    let Corpus {
        poets,
        source_path,
        normalization_applied,
    } = corpus;
    let poets = poets
        .into_iter()
        .filter(|p| p.verse_count() >= min_lines)
        .collect();
    Corpus {
        poets,
        source_path,
        normalization_applied,
    }
}

/// Whitespace-split, then strip leading/trailing punctuation from each
/// token; empty tokens are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(is_punctuation))
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn poet_json(id: &str, verses_per_poem: &[usize]) -> String {
        let poems: Vec<String> = verses_per_poem
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                let verses: Vec<String> =
                    (0..n).map(|v| format!("\"verse {v}\"")).collect();
                format!(
                    "{{\"poem_id\":\"{id}-p{i}\",\"verses\":[{}]}}",
                    verses.join(",")
                )
            })
            .collect();
        format!(
            "{{\"poet_id\":\"{id}\",\"name\":\"{id}\",\"poems\":[{}]}}",
            poems.join(",")
        )
    }

    fn write_corpus(lines: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f
    }

    #[test]
    fn load_sorts_by_poet_id() {
        let f = write_corpus(&[poet_json("zz", &[2]), poet_json("aa", &[1])]);
        let corpus = load_corpus(f.path()).unwrap();
        assert_eq!(corpus.poet_ids(), vec!["aa", "zz"]);
        assert!(!corpus.normalization_applied);
    }

    #[test]
    fn load_rejects_duplicate_id() {
        let f = write_corpus(&[poet_json("hafez", &[1]), poet_json("hafez", &[1])]);
        match load_corpus(f.path()) {
            Err(CorpusError::DuplicatePoet { poet_id }) => assert_eq!(poet_id, "hafez"),
            other => panic!("expected duplicate-id error, got {other:?}"),
        }
    }

    #[test]
    fn load_empty_file_gives_empty_corpus() {
        let f = write_corpus(&[]);
        let corpus = load_corpus(f.path()).unwrap();
        assert!(corpus.poets.is_empty());
    }

    #[test]
    fn load_parse_error_names_line() {
        let f = write_corpus(&[poet_json("a", &[1]), "{not json".to_string()]);
        match load_corpus(f.path()) {
            Err(CorpusError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_verseless_poem() {
        let f = write_corpus(&[
            "{\"poet_id\":\"a\",\"name\":\"a\",\"poems\":[{\"poem_id\":\"p\",\"verses\":[]}]}"
                .to_string(),
        ]);
        assert!(matches!(
            load_corpus(f.path()),
            Err(CorpusError::EmptyVerses { .. })
        ));
    }

    #[test]
    fn character_mapping() {
        assert_eq!(normalize_text("علي"), "علی");
        assert_eq!(normalize_text("كتاب"), "کتاب");
        assert_eq!(normalize_text("\u{0660}\u{0661}\u{06F2}"), "012");
    }

    #[test]
    fn diacritic_removal() {
        assert_eq!(normalize_text("کِتاب"), "کتاب");
        assert_eq!(normalize_text("مَرد"), "مرد");
    }

    #[test]
    fn zero_width_and_whitespace() {
        assert_eq!(normalize_text("می\u{200C}رود  ."), "میرود .");
        assert_eq!(normalize_text("  دل  رفت "), "دل رفت");
    }

    #[test]
    fn repeated_punctuation_collapses() {
        assert_eq!(normalize_text("برو!!!"), "برو!");
        assert_eq!(normalize_text("چرا؟؟"), "چرا؟");
        // Distinct adjacent marks are kept.
        assert_eq!(normalize_text("!?"), "!?");
    }

    #[test]
    fn normalize_corpus_applies_to_verses() {
        let f = write_corpus(&[
            "{\"poet_id\":\"a\",\"name\":\"a\",\"poems\":[{\"poem_id\":\"p\",\"verses\":[\"علي  رفت\"]}]}"
                .to_string(),
        ]);
        let corpus = load_corpus(f.path()).unwrap();
        let corpus = normalize_corpus(corpus).unwrap();
        assert_eq!(corpus.poets[0].poems[0].verses[0], "علی رفت");
        assert!(corpus.normalization_applied);
        assert!(matches!(
            normalize_corpus(corpus),
            Err(CorpusError::AlreadyNormalized)
        ));
    }

    #[test]
    fn normalize_empty_corpus_sets_flag() {
        let f = write_corpus(&[]);
        let corpus = normalize_corpus(load_corpus(f.path()).unwrap()).unwrap();
        assert!(corpus.poets.is_empty());
        assert!(corpus.normalization_applied);
    }

    #[test]
    fn filter_boundary_is_inclusive() {
        let f = write_corpus(&[
            poet_json("exact", &[250, 250]),
            poet_json("short", &[250, 249]),
            poet_json("tiny", &[1]),
        ]);
        let corpus = load_corpus(f.path()).unwrap();
        let kept = filter_poets(corpus.clone(), 500);
        assert_eq!(kept.poet_ids(), vec!["exact"]);
        let all = filter_poets(corpus, 1);
        assert_eq!(all.poets.len(), 3);
    }

    #[test]
    fn filter_retains_minimum_counts() {
        let f = write_corpus(&[poet_json("a", &[3, 4]), poet_json("b", &[2])]);
        let kept = filter_poets(load_corpus(f.path()).unwrap(), 3);
        for poet in &kept.poets {
            assert!(poet.verse_count() >= 3);
        }
        assert_eq!(kept.poets.len(), 1);
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("دل میرود ز دستم"),
            vec!["دل", "میرود", "ز", "دستم"]
        );
        assert_eq!(tokenize("گفت: برو!"), vec!["گفت", "برو"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("!!! ... ؟").is_empty());
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,64}") {
            let once = normalize_text(&s);
            prop_assert_eq!(normalize_text(&once), once);
        }

        #[test]
        fn normalize_never_grows(s in "\\PC{0,64}") {
            prop_assert!(normalize_text(&s).chars().count() <= s.chars().count());
        }

        #[test]
        fn filter_is_idempotent(counts in proptest::collection::vec(0usize..40, 0..8), k in 0usize..20) {
            let lines: Vec<String> = counts
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(i, &n)| poet_json(&format!("p{i:02}"), &[n]))
                .collect();
            let f = write_corpus(&lines);
            let corpus = load_corpus(f.path()).unwrap();
            let once = filter_poets(corpus, k);
            let twice = filter_poets(once.clone(), k);
            prop_assert_eq!(once.poet_ids(), twice.poet_ids());
        }

        #[test]
        fn tokens_are_clean(s in "\\PC{0,64}") {
            for tok in tokenize(&normalize_text(&s)) {
                prop_assert!(!tok.is_empty());
                prop_assert!(!tok.chars().any(char::is_whitespace));
            }
        }
    }
}
