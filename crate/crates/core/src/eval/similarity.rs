use serde::{Deserialize, Serialize};

use super::bench_data::{PhrasePairItem, PhraseWords, WordPairItem};
use super::stats::{aggregate_seeds, spearman};
use crate::checkpoint::Checkpoint;
use crate::compose::{compose_phrase, PhraseAnalysis, PhraseType, RelationMapping, Strategy};
use crate::error::{Error, Result};
use crate::geometry::cosine_checked;
use crate::triple::ModelKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Position of the item in the benchmark file (after header removal).
    pub item: usize,
    pub gold: f64,
    pub pred: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    /// `None` when the correlation is undefined (constant ranks).
    pub rho: Option<f64>,
    pub covered: usize,
    pub total: usize,
    /// Covered items where a vector had zero norm; predicted similarity 0.
    pub zero_norm: usize,
    pub predictions: Vec<Prediction>,
}

/// Results of one benchmark (and phrase type) for one model and strategy,
/// over one or more seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub benchmark: String,
    pub model: String,
    pub strategy: String,
    pub phrase_type: Option<PhraseType>,
    pub per_seed: Vec<SeedResult>,
    /// Mean of the defined per-seed correlations.
    pub mean: Option<f64>,
    /// Standard error over seeds; `None` with fewer than two defined values.
    pub se: Option<f64>,
    pub covered: usize,
    pub total: usize,
    /// Items skipped because a word is out of vocabulary.
    pub dropped: Vec<String>,
    pub notes: Vec<String>,
}

impl EvalReport {
    fn refresh(&mut self) {
        let rhos: Vec<f64> = self.per_seed.iter().filter_map(|s| s.rho).collect();
        let agg = aggregate_seeds(&rhos);
        self.mean = agg.map(|a| a.mean);
        self.se = agg.and_then(|a| a.se);
    }

    /// Benchmark label including the phrase type, e.g. `ml10/AN`.
    pub fn label(&self) -> String {
        match self.phrase_type {
            Some(pt) => format!("{}/{}", self.benchmark, pt),
            None => self.benchmark.clone(),
        }
    }

    /// Combines single-seed reports of the same benchmark, model and strategy.
    pub fn merge_seeds(reports: Vec<EvalReport>) -> Result<EvalReport> {
        let mut it = reports.into_iter();
        let mut out = it.next().ok_or_else(|| Error::Config("no reports to merge".into()))?;
        for r in it {
            if r.benchmark != out.benchmark
                || r.model != out.model
                || r.strategy != out.strategy
                || r.phrase_type != out.phrase_type
            {
                return Err(Error::Config(format!(
                    "cannot merge {} {} {} with {} {} {}",
                    out.label(),
                    out.model,
                    out.strategy,
                    r.label(),
                    r.model,
                    r.strategy
                )));
            }
            out.per_seed.extend(r.per_seed);
            out.covered = out.covered.min(r.covered);
            for d in r.dropped {
                if !out.dropped.contains(&d) {
                    out.dropped.push(d);
                }
            }
        }
        out.refresh();
        Ok(out)
    }
}

fn correlate(preds: &[Prediction]) -> Result<Option<f64>> {
    let p: Vec<f64> = preds.iter().map(|x| x.pred).collect();
    let g: Vec<f64> = preds.iter().map(|x| x.gold).collect();
    match spearman(&p, &g) {
        Ok(r) => Ok(Some(r)),
        Err(Error::ZeroVariance) => Ok(None),
        Err(e) => Err(e),
    }
}

fn similarity(a: &[f64], b: &[f64], zero_norm: &mut usize) -> f64 {
    cosine_checked(a, b).unwrap_or_else(|| {
        *zero_norm += 1;
        0.0
    })
}

/// Cosine of entity embeddings (DM: target space) against human ratings.
pub fn eval_wordsim(ck: &Checkpoint, items: &[WordPairItem], benchmark: &str) -> Result<EvalReport> {
    let p = &ck.params;
    let mut preds = Vec::new();
    let mut dropped = Vec::new();
    let mut zero_norm = 0;
    for (i, it) in items.iter().enumerate() {
        let (Some(a), Some(b)) = (ck.vocab.id(&it.word1), ck.vocab.id(&it.word2)) else {
            dropped.push(format!("{} {}", it.word1, it.word2));
            continue;
        };
        let va: Vec<f64> = p.entity(a).iter().map(|&x| x as f64).collect();
        let vb: Vec<f64> = p.entity(b).iter().map(|&x| x as f64).collect();
        preds.push(Prediction {
            item: i,
            gold: it.rating,
            pred: similarity(&va, &vb, &mut zero_norm),
        });
    }
    if preds.len() < 2 {
        return Err(Error::InsufficientCoverage {
            covered: preds.len(),
            total: items.len(),
        });
    }
    if zero_norm > 0 {
        log::warn!("{benchmark}: {zero_norm} pairs involve a zero vector; similarity set to 0");
    }
    let rho = correlate(&preds)?;
    let mut r = EvalReport {
        benchmark: benchmark.to_string(),
        model: ck.model_kind.name().to_string(),
        strategy: "word".to_string(),
        phrase_type: None,
        per_seed: vec![SeedResult {
            seed: ck.train_config.seed,
            rho,
            covered: preds.len(),
            total: items.len(),
            zero_norm,
            predictions: preds.clone(),
        }],
        mean: None,
        se: None,
        covered: preds.len(),
        total: items.len(),
        dropped,
        notes: Vec::new(),
    };
    r.refresh();
    Ok(r)
}

fn resolve(ck: &Checkpoint, w: &PhraseWords, pt: PhraseType, relation: u32) -> Option<PhraseAnalysis> {
    Some(PhraseAnalysis {
        root: ck.vocab.id(&w.root)?,
        dependent: ck.vocab.id(&w.dependent)?,
        relation,
        phrase_type: pt,
    })
}

/// Phrase similarity per phrase type: cosine between the composed vectors of
/// both phrases, correlated with the ratings. One report per phrase type
/// present in `items`, in AN, NN, VO order.
pub fn eval_composition(
    ck: &Checkpoint,
    items: &[PhrasePairItem],
    strategy: Strategy,
    mapping: &RelationMapping,
    benchmark: &str,
) -> Result<Vec<EvalReport>> {
    let mut reports = Vec::new();
    for pt in PhraseType::ALL {
        let group: Vec<(usize, &PhrasePairItem)> = items
            .iter()
            .enumerate()
            .filter(|(_, it)| it.phrase_type == pt)
            .collect();
        if group.is_empty() {
            continue;
        }
        let relation = if strategy.uses_relation() {
            mapping.relation_id(pt, &ck.relations)?
        } else {
            0
        };
        let mut preds = Vec::new();
        let mut dropped = Vec::new();
        let mut zero_norm = 0;
        for &(i, it) in &group {
            let (Some(l), Some(r)) = (
                resolve(ck, &it.left, pt, relation),
                resolve(ck, &it.right, pt, relation),
            ) else {
                dropped.push(format!(
                    "{} {} | {} {}",
                    it.left.root, it.left.dependent, it.right.root, it.right.dependent
                ));
                continue;
            };
            let a = compose_phrase(&ck.params, &ck.relations, &l, strategy)?;
            let b = compose_phrase(&ck.params, &ck.relations, &r, strategy)?;
            preds.push(Prediction {
                item: i,
                gold: it.rating,
                pred: similarity(&a, &b, &mut zero_norm),
            });
        }
        if preds.len() < 2 {
            return Err(Error::InsufficientCoverage {
                covered: preds.len(),
                total: group.len(),
            });
        }
        let mut notes = Vec::new();
        if ck.model_kind == ModelKind::Dm && strategy.uses_relation() {
            notes.push("DM: mapped word uses the context-space embedding, the other word the target space".into());
        }
        let rho = correlate(&preds)?;
        let mut rep = EvalReport {
            benchmark: benchmark.to_string(),
            model: ck.model_kind.name().to_string(),
            strategy: strategy.name().to_string(),
            phrase_type: Some(pt),
            per_seed: vec![SeedResult {
                seed: ck.train_config.seed,
                rho,
                covered: preds.len(),
                total: group.len(),
                zero_norm,
                predictions: preds.clone(),
            }],
            mean: None,
            se: None,
            covered: preds.len(),
            total: group.len(),
            dropped,
            notes,
        };
        rep.refresh();
        reports.push(rep);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelParams;
    use crate::trainer::TrainConfig;
    use crate::vocab::{RelationVocab, Vocab};
    use approx::assert_abs_diff_eq;

    /// Three words on the unit circle at angles 0, 30 and 90 degrees plus a
    /// zero vector.
    fn circle_ck() -> Checkpoint {
        let vocab = Vocab::from_entries(["a", "b", "c", "z"].iter().map(|w| (w.to_string(), 1)).collect()).unwrap();
        let rels = RelationVocab::from_base_labels(["amod", "dobj", "nmod"]);
        let mut p = ModelParams::<f32>::zeros(ModelKind::RotE, 4, rels.len(), 2).unwrap();
        let s = 0.5f32;
        p.entity_mut(0).copy_from_slice(&[1.0, 0.0]);
        p.entity_mut(1).copy_from_slice(&[(3f32).sqrt() * s, s]);
        p.entity_mut(2).copy_from_slice(&[0.0, 1.0]);
        Checkpoint::new(vocab, rels, p, TrainConfig::defaults(ModelKind::RotE)).unwrap()
    }

    fn pair(a: &str, b: &str, r: f64) -> WordPairItem {
        WordPairItem {
            word1: a.into(),
            word2: b.into(),
            rating: r,
        }
    }

    #[test]
    fn constructed_ordering_gives_rho_one() {
        let ck = circle_ck();
        let items = [
            pair("a", "b", 9.0),
            pair("a", "c", 1.0),
            pair("b", "c", 5.0),
            pair("a", "q", 3.0),
        ];
        let r = eval_wordsim(&ck, &items, "toy").unwrap();
        assert_abs_diff_eq!(r.mean.unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!((r.covered, r.total), (3, 4));
        assert_eq!(r.dropped, vec!["a q".to_string()]);
        assert_eq!(r.se, None);
    }

    #[test]
    fn all_oov_is_an_error() {
        let ck = circle_ck();
        let err = eval_wordsim(&ck, &[pair("x", "y", 1.0), pair("u", "v", 2.0)], "toy").unwrap_err();
        assert!(matches!(err, Error::InsufficientCoverage { covered: 0, total: 2 }));
    }

    #[test]
    fn zero_vector_counted() {
        let ck = circle_ck();
        let items = [pair("a", "z", 1.0), pair("a", "b", 2.0), pair("a", "c", 0.5)];
        let r = eval_wordsim(&ck, &items, "toy").unwrap();
        assert_eq!(r.per_seed[0].zero_norm, 1);
    }

    fn phrase(root: &str, dep: &str, root2: &str, dep2: &str, rating: f64, pt: PhraseType) -> PhrasePairItem {
        PhrasePairItem {
            phrase_type: pt,
            left: PhraseWords {
                root: root.into(),
                dependent: dep.into(),
            },
            right: PhraseWords {
                root: root2.into(),
                dependent: dep2.into(),
            },
            rating,
            participant: None,
        }
    }

    #[test]
    fn identical_phrases_have_undefined_rho() {
        let ck = circle_ck();
        let items = [
            phrase("a", "b", "a", "b", 1.0, PhraseType::AN),
            phrase("b", "c", "b", "c", 3.0, PhraseType::AN),
            phrase("a", "c", "a", "c", 2.0, PhraseType::AN),
        ];
        let reps = eval_composition(&ck, &items, Strategy::SynBiD, &RelationMapping::default(), "toy").unwrap();
        assert_eq!(reps.len(), 1);
        assert_eq!(reps[0].per_seed[0].rho, None);
        assert_eq!(reps[0].mean, None);
    }

    #[test]
    fn groups_split_by_type_and_missing_mapping_errors() {
        let ck = circle_ck();
        let items = [
            phrase("a", "b", "a", "c", 1.0, PhraseType::VO),
            phrase("b", "c", "c", "a", 3.0, PhraseType::VO),
            phrase("a", "c", "b", "b", 2.0, PhraseType::NN),
            phrase("c", "c", "a", "b", 2.5, PhraseType::NN),
        ];
        let reps = eval_composition(&ck, &items, Strategy::Add, &RelationMapping::default(), "toy").unwrap();
        let types: Vec<_> = reps.iter().map(|r| r.phrase_type.unwrap()).collect();
        assert_eq!(types, vec![PhraseType::NN, PhraseType::VO]);
        let mapping = RelationMapping {
            entries: vec![(PhraseType::VO, "dobj".into())],
        };
        assert!(eval_composition(&ck, &items, Strategy::SynRh, &mapping, "toy").is_err());
    }

    #[test]
    fn merge_aggregates_seeds() {
        let ck = circle_ck();
        let items = [pair("a", "b", 9.0), pair("a", "c", 1.0), pair("b", "c", 5.0)];
        let r1 = eval_wordsim(&ck, &items, "toy").unwrap();
        let mut r2 = r1.clone();
        r2.per_seed[0].rho = Some(0.5);
        r2.per_seed[0].seed = 1;
        let m = EvalReport::merge_seeds(vec![r1, r2]).unwrap();
        assert_abs_diff_eq!(m.mean.unwrap(), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(m.se.unwrap(), 0.25, epsilon = 1e-12);
    }
}
