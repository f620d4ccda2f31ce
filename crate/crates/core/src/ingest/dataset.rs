use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::conllu::DependencyArc;
use crate::binfmt::{read_container, write_container, write_u32s, Magic, PayloadReader};
use crate::error::{Error, Result};
use crate::triple::Triple;
use crate::vocab::{RelationVocab, Vocab};

pub(crate) const DATASET_MAGIC: Magic = Magic {
    prefix: "SYGD",
    version: "0001",
};

/// Bookkeeping from extraction, carried in the cache header and stats report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IngestLog {
    /// Distinct labels seen in the input, punctuation included.
    pub raw_label_count: usize,
    /// Distinct labels kept after label filtering.
    pub filtered_label_count: usize,
    pub input_arcs: u64,
    pub dropped_punct_arcs: u64,
    pub dropped_oov_arcs: u64,
    pub punct_dropped: bool,
}

/// Unique triples with multiplicities, plus the index maps they refer to.
///
/// Every triple `(h, r, t)` is stored together with `(t, inverse(r), h)` at the
/// same multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleDataset {
    pub triples: Vec<Triple>,
    /// Multiplicity of each unique triple.
    pub counts: Vec<u32>,
    pub vocab: Vocab,
    pub relations: RelationVocab,
    /// How often each entity fills the tail slot, over all occurrences.
    pub entity_counts: Vec<u64>,
    pub log: IngestLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub entities: usize,
    pub relations: usize,
    pub base_relations: usize,
    pub unique_triples: usize,
    pub total_triples: u64,
    /// Unique triples before inverse doubling.
    pub unique_base_triples: usize,
    pub total_base_triples: u64,
    pub raw_label_count: usize,
    pub filtered_label_count: usize,
    pub dropped_punct_arcs: u64,
    pub dropped_oov_arcs: u64,
}

#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub min_count: u64,
    pub drop_punct: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self {
            min_count: 0,
            drop_punct: true,
        }
    }
}

pub const PUNCT_LABEL: &str = "punct";

/// Accumulates unique triples (with inverse) in first-seen order.
struct TripleBuilder {
    index: HashMap<Triple, usize>,
    triples: Vec<Triple>,
    counts: Vec<u32>,
}

impl TripleBuilder {
    fn new() -> Self {
        Self {
            index: HashMap::new(),
            triples: Vec::new(),
            counts: Vec::new(),
        }
    }

    fn push(&mut self, tr: Triple) {
        match self.index.get(&tr) {
            Some(&i) => self.counts[i] += 1,
            None => {
                self.index.insert(tr, self.triples.len());
                self.triples.push(tr);
                self.counts.push(1);
            }
        }
    }

    fn push_with_inverse(&mut self, tr: Triple, relations: &RelationVocab) {
        self.push(tr);
        self.push(Triple::new(tr.t, relations.inverse(tr.r), tr.h));
    }
}

impl TripleDataset {
    fn assemble(builder: TripleBuilder, vocab: Vocab, relations: RelationVocab, log: IngestLog) -> Self {
        let mut entity_counts = vec![0u64; vocab.len()];
        for (tr, &c) in builder.triples.iter().zip(&builder.counts) {
            entity_counts[tr.t as usize] += c as u64;
        }
        Self {
            triples: builder.triples,
            counts: builder.counts,
            vocab,
            relations,
            entity_counts,
            log,
        }
    }

    pub fn empty() -> Self {
        Self {
            triples: Vec::new(),
            counts: Vec::new(),
            vocab: Vocab::default(),
            relations: RelationVocab::default(),
            entity_counts: Vec::new(),
            log: IngestLog::default(),
        }
    }

    pub fn unique_count(&self) -> usize {
        self.triples.len()
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Every occurrence, repetitions expanded, in storage order.
    pub fn occurrences(&self) -> Vec<Triple> {
        let mut out = Vec::with_capacity(self.total_count() as usize);
        for (tr, &c) in self.triples.iter().zip(&self.counts) {
            out.extend(std::iter::repeat_n(*tr, c as usize));
        }
        out
    }

    pub fn triple_set(&self) -> HashSet<Triple> {
        self.triples.iter().copied().collect()
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.vocab.len() as u32;
        let nr = self.relations.len() as u32;
        if self.counts.len() != self.triples.len() {
            return Err(Error::Invariant("counts/triples length differ".into()));
        }
        if self.entity_counts.len() != self.vocab.len() {
            return Err(Error::Invariant("entity_counts length differs from vocab".into()));
        }
        for tr in &self.triples {
            if tr.h >= nv || tr.t >= nv || tr.r >= nr {
                return Err(Error::Invariant(format!("triple {tr:?} out of range")));
            }
        }
        Ok(())
    }

    /// Re-indexes to words with corpus count `>= min_count`, dropping triples
    /// that touch removed words.
    pub fn restrict_min_count(&self, min_count: u64) -> TripleDataset {
        if self.vocab.entries().iter().all(|(_, c)| *c >= min_count) {
            return self.clone();
        }
        let vocab = Vocab::from_counts(self.vocab.entries().iter().cloned(), min_count);
        let remap: Vec<Option<u32>> = (0..self.vocab.len() as u32)
            .map(|i| vocab.id(self.vocab.word(i)))
            .collect();
        let mut builder = TripleBuilder::new();
        let mut dropped = 0u64;
        for (tr, &c) in self.triples.iter().zip(&self.counts) {
            match (remap[tr.h as usize], remap[tr.t as usize]) {
                (Some(h), Some(t)) => {
                    let nt = Triple::new(h, tr.r, t);
                    builder.index.insert(nt, builder.triples.len());
                    builder.triples.push(nt);
                    builder.counts.push(c);
                }
                _ => dropped += c as u64,
            }
        }
        let mut log = self.log.clone();
        // Each dropped arc removed a triple and its inverse.
        log.dropped_oov_arcs += dropped / 2;
        Self::assemble(builder, vocab, self.relations.clone(), log)
    }

    /// Deterministic split of unique base triples: a held-out fraction and the
    /// rest. Both parts keep inverse closure and share vocabularies.
    pub fn split_holdout(&self, fraction: f64, rng: &mut crate::rng::Rng) -> (TripleDataset, TripleDataset) {
        let mut base: Vec<usize> = (0..self.triples.len())
            .filter(|&i| !self.relations.is_inverse(self.triples[i].r))
            .collect();
        rng.shuffle(&mut base);
        let n_held = ((base.len() as f64) * fraction).round() as usize;
        let held: HashSet<usize> = base[..n_held].iter().copied().collect();
        let inverse_of = |tr: &Triple| Triple::new(tr.t, self.relations.inverse(tr.r), tr.h);
        let held_triples: HashSet<Triple> = held
            .iter()
            .flat_map(|&i| {
                let tr = self.triples[i];
                [tr, inverse_of(&tr)]
            })
            .collect();
        let mut train = TripleBuilder::new();
        let mut test = TripleBuilder::new();
        for (tr, &c) in self.triples.iter().zip(&self.counts) {
            let b = if held_triples.contains(tr) {
                &mut test
            } else {
                &mut train
            };
            b.index.insert(*tr, b.triples.len());
            b.triples.push(*tr);
            b.counts.push(c);
        }
        (
            Self::assemble(train, self.vocab.clone(), self.relations.clone(), self.log.clone()),
            Self::assemble(test, self.vocab.clone(), self.relations.clone(), IngestLog::default()),
        )
    }

    pub fn stats(&self) -> DatasetStats {
        dataset_stats(self)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.validate()?;
        let header = DatasetHeader {
            dtype: "u32".into(),
            vocab: self.vocab.clone(),
            relations: self.relations.clone(),
            log: self.log.clone(),
            manifest: vec![
                ("triples".into(), self.triples.len() * 3),
                ("counts".into(), self.counts.len()),
                ("entity_counts_lo".into(), self.entity_counts.len()),
                ("entity_counts_hi".into(), self.entity_counts.len()),
            ],
        };
        let flat: Vec<u32> = self.triples.iter().flat_map(|t| [t.h, t.r, t.t]).collect();
        let lo: Vec<u32> = self.entity_counts.iter().map(|&c| c as u32).collect();
        let hi: Vec<u32> = self.entity_counts.iter().map(|&c| (c >> 32) as u32).collect();
        write_container(path, &DATASET_MAGIC, &header, |w| {
            write_u32s(w, &flat)?;
            write_u32s(w, &self.counts)?;
            write_u32s(w, &lo)?;
            write_u32s(w, &hi)
        })
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let (header, payload) = read_container(path, &DATASET_MAGIC)?;
        let header: DatasetHeader = serde_json::from_slice(&header).map_err(|e| Error::Header(e.to_string()))?;
        if header.dtype != "u32" {
            return Err(Error::Header(format!("unsupported dtype {:?}", header.dtype)));
        }
        let names: Vec<&str> = header.manifest.iter().map(|(n, _)| n.as_str()).collect();
        if names != ["triples", "counts", "entity_counts_lo", "entity_counts_hi"] {
            return Err(Error::Header(format!("unexpected manifest {names:?}")));
        }
        let sizes: Vec<usize> = header.manifest.iter().map(|(_, s)| *s).collect();
        let mut r = PayloadReader::new(&payload, sizes.iter().sum())?;
        let flat = r.u32s(sizes[0]);
        let counts = r.u32s(sizes[1]);
        let lo = r.u32s(sizes[2]);
        let hi = r.u32s(sizes[3]);
        if !sizes[0].is_multiple_of(3) || sizes[0] / 3 != sizes[1] {
            return Err(Error::ShapeMismatch("triples and counts disagree".into()));
        }
        let ds = Self {
            triples: flat.chunks_exact(3).map(|c| Triple::new(c[0], c[1], c[2])).collect(),
            counts,
            vocab: header.vocab,
            relations: header.relations,
            entity_counts: lo
                .iter()
                .zip(&hi)
                .map(|(&l, &h)| ((h as u64) << 32) | l as u64)
                .collect(),
            log: header.log,
        };
        ds.validate()?;
        Ok(ds)
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetHeader {
    dtype: String,
    vocab: Vocab,
    relations: RelationVocab,
    log: IngestLog,
    manifest: Vec<(String, usize)>,
}

/// Builds triples from arcs: the vocabulary holds words whose token count is at
/// least `min_count`, and each kept arc `(g, rel, d)` yields `(g, rel, d)` and
/// `(d, rel_inv, g)`.
pub fn arcs_to_triples<I>(arcs: I, min_count: u64) -> TripleDataset
where
    I: IntoIterator<Item = DependencyArc>,
{
    extract_triples(
        arcs,
        &ExtractOptions {
            min_count,
            ..ExtractOptions::default()
        },
    )
}

pub fn extract_triples<I>(arcs: I, opts: &ExtractOptions) -> TripleDataset
where
    I: IntoIterator<Item = DependencyArc>,
{
    let arcs: Vec<DependencyArc> = arcs.into_iter().collect();
    // A token is (sentence, position); count each once.
    let mut seen_tokens: HashSet<(usize, u32)> = HashSet::new();
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut raw_labels: BTreeSet<&str> = BTreeSet::new();
    let mut kept_labels: BTreeSet<&str> = BTreeSet::new();
    for a in &arcs {
        for (pos, word) in [(a.governor_pos, &a.governor), (a.dependent_pos, &a.dependent)] {
            if seen_tokens.insert((a.sentence_id, pos)) {
                *counts.entry(word.clone()).or_default() += 1;
            }
        }
        raw_labels.insert(&a.relation);
        if !(opts.drop_punct && a.relation == PUNCT_LABEL) {
            kept_labels.insert(&a.relation);
        }
    }
    let vocab = Vocab::from_counts(counts, opts.min_count);
    let relations = RelationVocab::from_base_labels(kept_labels.iter().copied());
    let mut log = IngestLog {
        raw_label_count: raw_labels.len(),
        filtered_label_count: kept_labels.len(),
        input_arcs: arcs.len() as u64,
        punct_dropped: opts.drop_punct,
        ..IngestLog::default()
    };
    let mut builder = TripleBuilder::new();
    for a in &arcs {
        if opts.drop_punct && a.relation == PUNCT_LABEL {
            log.dropped_punct_arcs += 1;
            continue;
        }
        let (Some(g), Some(d)) = (vocab.id(&a.governor), vocab.id(&a.dependent)) else {
            log.dropped_oov_arcs += 1;
            continue;
        };
        let r = relations.id(&a.relation).expect("label registered above");
        builder.push_with_inverse(Triple::new(g, r, d), &relations);
    }
    TripleDataset::assemble(builder, vocab, relations, log)
}

/// Builds a dataset from `(head, relation, tail)` string triples, adding inverses.
/// Vocabulary counts are endpoint occurrences.
pub fn triples_from_strings<'a, I>(rows: I) -> TripleDataset
where
    I: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
{
    let rows: Vec<_> = rows.into_iter().collect();
    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut labels: BTreeSet<&str> = BTreeSet::new();
    for (h, r, t) in &rows {
        *counts.entry(h.to_string()).or_default() += 1;
        *counts.entry(t.to_string()).or_default() += 1;
        labels.insert(r);
    }
    let vocab = Vocab::from_counts(counts, 0);
    let relations = RelationVocab::from_base_labels(labels.iter().copied());
    let mut builder = TripleBuilder::new();
    for (h, r, t) in &rows {
        let tr = Triple::new(
            vocab.id(h).expect("counted"),
            relations.id(r).expect("registered"),
            vocab.id(t).expect("counted"),
        );
        builder.push_with_inverse(tr, &relations);
    }
    let log = IngestLog {
        raw_label_count: labels.len(),
        filtered_label_count: labels.len(),
        input_arcs: rows.len() as u64,
        ..IngestLog::default()
    };
    TripleDataset::assemble(builder, vocab, relations, log)
}

pub fn dataset_stats(ds: &TripleDataset) -> DatasetStats {
    let base_unique = ds.triples.iter().filter(|t| !ds.relations.is_inverse(t.r)).count();
    let base_total: u64 = ds
        .triples
        .iter()
        .zip(&ds.counts)
        .filter(|(t, _)| !ds.relations.is_inverse(t.r))
        .map(|(_, &c)| c as u64)
        .sum();
    DatasetStats {
        entities: ds.vocab.len(),
        relations: ds.relations.len(),
        base_relations: ds.relations.base_count(),
        unique_triples: ds.unique_count(),
        total_triples: ds.total_count(),
        unique_base_triples: base_unique,
        total_base_triples: base_total,
        raw_label_count: ds.log.raw_label_count,
        filtered_label_count: ds.log.filtered_label_count,
        dropped_punct_arcs: ds.log.dropped_punct_arcs,
        dropped_oov_arcs: ds.log.dropped_oov_arcs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arc(g: &str, rel: &str, d: &str, sid: usize, gp: u32, dp: u32) -> DependencyArc {
        DependencyArc {
            governor: g.into(),
            relation: rel.into(),
            dependent: d.into(),
            sentence_id: sid,
            governor_pos: gp,
            dependent_pos: dp,
        }
    }

    #[test]
    fn single_arc_gives_both_directions() {
        let ds = arcs_to_triples(vec![arc("pour", "dobj", "tea", 0, 1, 2)], 0);
        assert_eq!(ds.unique_count(), 2);
        assert_eq!(ds.relations.len(), 2);
        let pour = ds.vocab.id("pour").unwrap();
        let tea = ds.vocab.id("tea").unwrap();
        let dobj = ds.relations.id("dobj").unwrap();
        let inv = ds.relations.id("dobj_inv").unwrap();
        let set = ds.triple_set();
        assert!(set.contains(&Triple::new(pour, dobj, tea)));
        assert!(set.contains(&Triple::new(tea, inv, pour)));
    }

    #[test]
    fn rare_words_are_dropped_with_their_arcs() {
        // "rain" occurs once; "like" and "i" twice.
        let arcs = vec![
            arc("like", "nsubj", "i", 0, 2, 1),
            arc("like", "dobj", "rain", 0, 2, 3),
            arc("like", "nsubj", "i", 1, 2, 1),
            arc("like", "dobj", "tea", 1, 2, 3),
            arc("drink", "dobj", "tea", 2, 1, 2),
        ];
        let ds = arcs_to_triples(arcs, 2);
        assert!(ds.vocab.id("rain").is_none());
        assert!(ds.vocab.id("drink").is_none());
        assert_eq!(ds.log.dropped_oov_arcs, 2);
        assert_eq!(ds.vocab.count(ds.vocab.id("like").unwrap()), 2);
        let rain_free = ds
            .triples
            .iter()
            .all(|t| ds.vocab.word(t.h) != "rain" && ds.vocab.word(t.t) != "rain");
        assert!(rain_free);
    }

    #[test]
    fn punct_is_dropped_but_reported() {
        let arcs = vec![arc("go", "punct", ".", 0, 1, 2), arc("go", "advmod", "now", 0, 1, 3)];
        let ds = arcs_to_triples(arcs.clone(), 0);
        assert_eq!(ds.log.raw_label_count, 2);
        assert_eq!(ds.log.filtered_label_count, 1);
        assert_eq!(ds.log.dropped_punct_arcs, 1);
        assert_eq!(ds.relations.len(), 2);
        let keep = extract_triples(
            arcs,
            &ExtractOptions {
                min_count: 0,
                drop_punct: false,
            },
        );
        assert_eq!(keep.relations.len(), 4);
    }

    #[test]
    fn duplicates_counted_in_total_only() {
        let ds = triples_from_strings(vec![("a", "likes", "b"), ("a", "likes", "b")]);
        assert_eq!(ds.unique_count(), 2);
        assert_eq!(ds.total_count(), 4);
        let st = ds.stats();
        assert_eq!(st.unique_base_triples, 1);
        assert_eq!(st.total_base_triples, 2);
    }

    #[test]
    fn empty_stats_are_zero() {
        let st = dataset_stats(&TripleDataset::empty());
        assert_eq!(
            (st.entities, st.relations, st.unique_triples, st.total_triples),
            (0, 0, 0, 0)
        );
    }

    #[test]
    fn cache_round_trip() {
        let ds = triples_from_strings(vec![("a", "r", "b"), ("b", "s", "c"), ("a", "r", "b")]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.bin");
        ds.save(&p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert!(bytes.starts_with(b"SYGD0001\n"));
        assert_eq!(TripleDataset::load(&p).unwrap(), ds);
    }

    #[test]
    fn holdout_split_keeps_inverse_pairs_together() {
        let rows: Vec<(String, String)> = (0..30)
            .map(|i| (format!("e{i}"), format!("e{}", (i + 1) % 30)))
            .collect();
        let ds = triples_from_strings(rows.iter().map(|(a, b)| (a.as_str(), "next", b.as_str())));
        let (train, test) = ds.split_holdout(0.1, &mut crate::rng::Rng::new(0));
        assert_eq!(test.unique_count(), 6);
        assert_eq!(train.unique_count() + test.unique_count(), ds.unique_count());
        for part in [&train, &test] {
            let set = part.triple_set();
            for t in &part.triples {
                assert!(set.contains(&Triple::new(t.t, part.relations.inverse(t.r), t.h)));
            }
        }
    }

    #[test]
    fn restrict_min_count_reindexes() {
        let ds = triples_from_strings(vec![("a", "r", "b"), ("a", "r", "c"), ("a", "s", "b")]);
        let small = ds.restrict_min_count(2);
        assert_eq!(small.vocab.len(), 2);
        small.validate().unwrap();
        assert_eq!(small.unique_count(), 4);
    }

    fn arb_arcs() -> impl Strategy<Value = Vec<DependencyArc>> {
        let words = prop::sample::select(vec!["a", "b", "c", "d", "e", "f"]);
        let labels = prop::sample::select(vec!["amod", "dobj", "nmod", "punct"]);
        prop::collection::vec((words.clone(), labels, words), 0..40).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (g, r, d))| arc(g, r, d, i, 1, 2))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn inverse_closure_with_equal_multiplicity(arcs in arb_arcs(), mc in 0u64..4) {
            let ds = arcs_to_triples(arcs, mc);
            let mult: HashMap<Triple, u32> = ds.triples.iter().copied().zip(ds.counts.iter().copied()).collect();
            for (tr, c) in &mult {
                let inv = Triple::new(tr.t, ds.relations.inverse(tr.r), tr.h);
                prop_assert_eq!(mult.get(&inv), Some(c));
            }
            prop_assert!(ds.total_count() >= ds.unique_count() as u64);
            prop_assert!(ds.validate().is_ok());
        }

        #[test]
        fn min_count_is_monotone(arcs in arb_arcs(), mc in 0u64..4) {
            let lo = arcs_to_triples(arcs.clone(), mc);
            let hi = arcs_to_triples(arcs, mc + 1);
            prop_assert!(hi.vocab.len() <= lo.vocab.len());
            prop_assert!(hi.total_count() <= lo.total_count());
            prop_assert!(hi.unique_count() <= lo.unique_count());
        }
    }
}
