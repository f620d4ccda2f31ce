//! Benchmark file readers.
//!
//! * word similarity: `word1 <TAB> word2 <TAB> rating`
//! * phrase similarity: `phrase_type <TAB> root <TAB> dependent <TAB> root2/dependent2 <TAB> rating`
//! * the original ML10 distribution (whitespace separated):
//!   `participant type group w1 w2 w3 w4 rating`, where `w1 w2` and `w3 w4`
//!   are the two phrases in surface order.
//!
//! Lines that are blank or start with `#` are skipped, as is a first line
//! whose rating column is not numeric (a header).

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::compose::PhraseType;
use crate::error::{Error, Result};
use crate::ingest::open_text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordPairItem {
    pub word1: String,
    pub word2: String,
    pub rating: f64,
}

/// A phrase as strings, split into its syntactic root and dependent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhraseWords {
    pub root: String,
    pub dependent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhrasePairItem {
    pub phrase_type: PhraseType,
    pub left: PhraseWords,
    pub right: PhraseWords,
    pub rating: f64,
    /// Set when ratings are kept per participant instead of averaged.
    pub participant: Option<String>,
}

/// Non-comment lines with their 1-based line numbers.
fn data_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in open_text(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push((i + 1, t.to_string()));
    }
    Ok(out)
}

fn rating(path: &Path, line: usize, s: &str) -> Result<f64> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(path, line, format!("bad rating {s:?}"))),
    }
}

fn is_header(fields: &[&str], rating_col: usize, first: bool) -> bool {
    first && fields.get(rating_col).is_some_and(|r| r.parse::<f64>().is_err())
}

pub fn read_wordsim<P: AsRef<Path>>(path: P) -> Result<Vec<WordPairItem>> {
    let path = path.as_ref();
    let mut items = Vec::new();
    for (k, (line, text)) in data_lines(path)?.into_iter().enumerate() {
        let f: Vec<&str> = text.split('\t').map(str::trim).collect();
        if is_header(&f, 2, k == 0) {
            continue;
        }
        if f.len() != 3 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 3 tab-separated fields, found {}", f.len()),
            ));
        }
        items.push(WordPairItem {
            word1: f[0].to_lowercase(),
            word2: f[1].to_lowercase(),
            rating: rating(path, line, f[2])?,
        });
    }
    Ok(items)
}

pub fn read_composition<P: AsRef<Path>>(path: P) -> Result<Vec<PhrasePairItem>> {
    let path = path.as_ref();
    let mut items = Vec::new();
    for (k, (line, text)) in data_lines(path)?.into_iter().enumerate() {
        let f: Vec<&str> = text.split('\t').map(str::trim).collect();
        if is_header(&f, 4, k == 0) {
            continue;
        }
        if f.len() != 5 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 5 tab-separated fields, found {}", f.len()),
            ));
        }
        let phrase_type: PhraseType = f[0]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("unknown phrase type {:?}", f[0])))?;
        let (root2, dep2) = f[3]
            .split_once('/')
            .ok_or_else(|| Error::parse(path, line, format!("expected root2/dependent2, found {:?}", f[3])))?;
        items.push(PhrasePairItem {
            phrase_type,
            left: PhraseWords {
                root: f[1].to_lowercase(),
                dependent: f[2].to_lowercase(),
            },
            right: PhraseWords {
                root: root2.trim().to_lowercase(),
                dependent: dep2.trim().to_lowercase(),
            },
            rating: rating(path, line, f[4])?,
            participant: None,
        });
    }
    Ok(items)
}

/// Splits a two-word phrase in surface order into root and dependent:
/// adjective-noun and noun-noun phrases are headed by the second word,
/// verb-object phrases by the first.
pub fn surface_to_phrase(pt: PhraseType, first: &str, second: &str) -> PhraseWords {
    let (root, dependent) = match pt {
        PhraseType::AN | PhraseType::NN => (second, first),
        PhraseType::VO => (first, second),
    };
    PhraseWords {
        root: root.to_lowercase(),
        dependent: dependent.to_lowercase(),
    }
}

fn ml10_type(s: &str) -> Option<PhraseType> {
    match s.to_ascii_lowercase().as_str() {
        "adjectivenouns" | "an" => Some(PhraseType::AN),
        "compoundnouns" | "nn" => Some(PhraseType::NN),
        "verbobjects" | "verbobjectnouns" | "vo" => Some(PhraseType::VO),
        _ => None,
    }
}

/// Reads the ML10 distribution. With `per_participant` false, ratings of the
/// same phrase pair are averaged into one item (first-seen order); otherwise
/// every participant rating is its own item.
pub fn read_ml10<P: AsRef<Path>>(path: P, per_participant: bool) -> Result<Vec<PhrasePairItem>> {
    let path = path.as_ref();
    let mut raw = Vec::new();
    for (k, (line, text)) in data_lines(path)?.into_iter().enumerate() {
        let f: Vec<&str> = text.split_whitespace().collect();
        if is_header(&f, 7, k == 0) {
            continue;
        }
        if f.len() != 8 {
            return Err(Error::parse(
                path,
                line,
                format!("expected 8 fields, found {}", f.len()),
            ));
        }
        let pt = ml10_type(f[1]).ok_or_else(|| Error::parse(path, line, format!("unknown phrase type {:?}", f[1])))?;
        raw.push(PhrasePairItem {
            phrase_type: pt,
            left: surface_to_phrase(pt, f[3], f[4]),
            right: surface_to_phrase(pt, f[5], f[6]),
            rating: rating(path, line, f[7])?,
            participant: Some(f[0].to_string()),
        });
    }
    if per_participant {
        return Ok(raw);
    }
    let mut order: Vec<(PhraseType, PhraseWords, PhraseWords)> = Vec::new();
    let mut sums: HashMap<(PhraseType, PhraseWords, PhraseWords), (f64, usize)> = HashMap::new();
    for it in raw {
        let key = (it.phrase_type, it.left, it.right);
        let e = sums.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0.0, 0)
        });
        e.0 += it.rating;
        e.1 += 1;
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let (s, n) = sums[&key];
            PhrasePairItem {
                phrase_type: key.0,
                left: key.1,
                right: key.2,
                rating: s / n as f64,
                participant: None,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn wordsim_with_header_and_comments() {
        let f = file("word1\tword2\tscore\n# note\nTiger\tcat\t7.35\n\nbook\tpaper\t7.46\n");
        let items = read_wordsim(f.path()).unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].word1, "tiger");
        assert_eq!(items[1].rating, 7.46);
    }

    #[test]
    fn wordsim_bad_line() {
        let f = file("a\tb\t1\nc\td\n");
        assert!(matches!(read_wordsim(f.path()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn composition_rows() {
        let f = file("VO\tpour\ttea\tdrink/water\t5.5\nAN\tcase\tparticular\tcircumstance/certain\t6\n");
        let items = read_composition(f.path()).unwrap();
        assert_eq!(items[0].phrase_type, PhraseType::VO);
        assert_eq!(items[0].right.root, "drink");
        assert_eq!(items[0].right.dependent, "water");
        assert_eq!(items[1].left.dependent, "particular");
    }

    #[test]
    fn ml10_averages_participants() {
        let f = file(
            "participant1 adjectivenouns 1 certain circumstance particular case 6\n\
             participant2 adjectivenouns 1 certain circumstance particular case 4\n\
             participant1 verbobjects 2 use knowledge exercise influence 3\n",
        );
        let avg = read_ml10(f.path(), false).unwrap();
        assert_eq!(avg.len(), 2);
        assert_eq!(avg[0].rating, 5.0);
        assert_eq!(avg[0].left.root, "circumstance");
        assert_eq!(avg[1].left.root, "use");
        let per = read_ml10(f.path(), true).unwrap();
        assert_eq!(per.len(), 3);
        assert_eq!(per[1].participant.as_deref(), Some("participant2"));
    }
}
