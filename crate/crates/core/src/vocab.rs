//! Word and relation index maps.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Suffix marking the inverse direction of a dependency or KG relation.
pub const INVERSE_SUFFIX: &str = "_inv";

/// Dense word index. Ids are positions in `entries`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, u64)>", into = "Vec<(String, u64)>")]
pub struct Vocab {
    entries: Vec<(String, u64)>,
    index: HashMap<String, u32>,
}

impl PartialEq for Vocab {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Vocab {
    /// Builds a vocabulary from `(word, count)` pairs, keeping the given order.
    pub fn from_entries(entries: Vec<(String, u64)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(entries.len());
        for (i, (w, _)) in entries.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::Invariant(format!("duplicate vocabulary entry {w:?}")));
            }
        }
        Ok(Self { entries, index })
    }

    /// Keeps words with `count >= min_count`, ordered by descending count and
    /// then lexically, so the id assignment is independent of input order.
    pub fn from_counts<I>(counts: I, min_count: u64) -> Self
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut entries: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c >= min_count).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_entries(entries).expect("counts are keyed by unique words")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.entries[id as usize].0
    }

    pub fn count(&self, id: u32) -> u64 {
        self.entries[id as usize].1
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }
}

impl TryFrom<Vec<(String, u64)>> for Vocab {
    type Error = Error;

    fn try_from(entries: Vec<(String, u64)>) -> Result<Self> {
        Self::from_entries(entries)
    }
}

impl From<Vocab> for Vec<(String, u64)> {
    fn from(v: Vocab) -> Self {
        v.entries
    }
}

/// Directed relation labels. Every base label `X` has a distinct inverse
/// `X_inv`; `inverse_of` is a fixed-point-free involution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RelationVocabRepr", into = "RelationVocabRepr")]
pub struct RelationVocab {
    entries: Vec<String>,
    inverse_of: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct RelationVocabRepr {
    entries: Vec<String>,
    inverse_of: Vec<u32>,
}

impl RelationVocab {
    /// Assigns ids `2k` to the k-th base label (in sorted order) and `2k + 1`
    /// to its inverse.
    pub fn from_base_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut base: Vec<String> = labels.into_iter().map(Into::into).collect();
        base.sort();
        base.dedup();
        let mut entries = Vec::with_capacity(base.len() * 2);
        let mut inverse_of = Vec::with_capacity(base.len() * 2);
        for (k, label) in base.into_iter().enumerate() {
            let inv = format!("{label}{INVERSE_SUFFIX}");
            entries.push(label);
            entries.push(inv);
            inverse_of.push(2 * k as u32 + 1);
            inverse_of.push(2 * k as u32);
        }
        Self { entries, inverse_of }
    }

    pub fn from_parts(entries: Vec<String>, inverse_of: Vec<u32>) -> Result<Self> {
        let rv = Self { entries, inverse_of };
        rv.validate()?;
        Ok(rv)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != self.inverse_of.len() {
            return Err(Error::Invariant(format!(
                "relation vocab has {} labels but {} inverse entries",
                self.entries.len(),
                self.inverse_of.len()
            )));
        }
        let n = self.entries.len() as u32;
        for (r, &inv) in self.inverse_of.iter().enumerate() {
            if inv >= n {
                return Err(Error::Invariant(format!("inverse of relation {r} out of range")));
            }
            if inv as usize == r {
                return Err(Error::Invariant(format!("relation {r} is its own inverse")));
            }
            if self.inverse_of[inv as usize] as usize != r {
                return Err(Error::Invariant(format!("inverse map is not an involution at {r}")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for label in &self.entries {
            if !seen.insert(label.as_str()) {
                return Err(Error::Invariant(format!("duplicate relation label {label:?}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn id(&self, label: &str) -> Option<u32> {
        self.entries.iter().position(|l| l == label).map(|i| i as u32)
    }

    pub fn label(&self, id: u32) -> &str {
        &self.entries[id as usize]
    }

    pub fn inverse(&self, id: u32) -> u32 {
        self.inverse_of[id as usize]
    }

    pub fn is_inverse(&self, id: u32) -> bool {
        self.entries[id as usize].ends_with(INVERSE_SUFFIX)
            && self.id(self.label(id).trim_end_matches(INVERSE_SUFFIX)) == Some(self.inverse(id))
    }

    pub fn base_count(&self) -> usize {
        self.entries.len() / 2
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn inverse_map(&self) -> &[u32] {
        &self.inverse_of
    }
}

impl TryFrom<RelationVocabRepr> for RelationVocab {
    type Error = Error;

    fn try_from(r: RelationVocabRepr) -> Result<Self> {
        Self::from_parts(r.entries, r.inverse_of)
    }
}

impl From<RelationVocab> for RelationVocabRepr {
    fn from(r: RelationVocab) -> Self {
        Self {
            entries: r.entries,
            inverse_of: r.inverse_of,
        }
    }
}
