//! Phrase vectors from a trained model: additive composition and the three
//! syntax-aware strategies.
//!
//! For a directed triple `(h, r, t)` the syntax-aware phrase vector is
//!
//! * DM: `e_h + W_r e'_t`
//! * MuRE: `W_r o e_h + (e_t + w_r)`
//! * RotE / RefE: `(G_r e_h + t_r) + e_t`
//! * AttE: `Q(h, r) + e_t`
//!
//! Entity biases never enter composition.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{attention_weights, reflect_into, rotate_into, Real};
use crate::models::ModelParams;
use crate::triple::{ModelKind, Triple};
use crate::vocab::RelationVocab;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PhraseType {
    AN,
    VO,
    NN,
}

impl PhraseType {
    pub const ALL: [PhraseType; 3] = [PhraseType::AN, PhraseType::NN, PhraseType::VO];

    pub fn name(self) -> &'static str {
        match self {
            Self::AN => "AN",
            Self::VO => "VO",
            Self::NN => "NN",
        }
    }
}

impl fmt::Display for PhraseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhraseType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "an" | "adjectivenouns" => Ok(Self::AN),
            "vo" | "verbobjectnouns" => Ok(Self::VO),
            "nn" | "compoundnouns" => Ok(Self::NN),
            _ => Err(Error::Config(format!("unknown phrase type {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "add")]
    Add,
    #[serde(rename = "syn-rh")]
    SynRh,
    #[serde(rename = "syn-rt")]
    SynRt,
    #[serde(rename = "syn-bid")]
    SynBiD,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Add, Strategy::SynRh, Strategy::SynRt, Strategy::SynBiD];

    pub fn name(self) -> &'static str {
        match self {
            Self::Add => "add",
            Self::SynRh => "syn-rh",
            Self::SynRt => "syn-rt",
            Self::SynBiD => "syn-bid",
        }
    }

    pub fn uses_relation(self) -> bool {
        self != Self::Add
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "add" => Ok(Self::Add),
            "syn-rh" | "synrh" => Ok(Self::SynRh),
            "syn-rt" | "synrt" => Ok(Self::SynRt),
            "syn-bid" | "synbid" => Ok(Self::SynBiD),
            _ => Err(Error::Config(format!(
                "unknown strategy {s:?} (expected add|syn-rh|syn-rt|syn-bid)"
            ))),
        }
    }
}

/// A two-word phrase resolved to ids. `relation` is the base label in the
/// root-as-head direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhraseAnalysis {
    pub root: u32,
    pub dependent: u32,
    pub relation: u32,
    pub phrase_type: PhraseType,
}

/// Dependency label linking root and dependent for each phrase type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationMapping {
    pub entries: Vec<(PhraseType, String)>,
}

impl Default for RelationMapping {
    fn default() -> Self {
        Self {
            entries: vec![
                (PhraseType::AN, "amod".into()),
                (PhraseType::VO, "dobj".into()),
                (PhraseType::NN, "nmod".into()),
            ],
        }
    }
}

impl RelationMapping {
    pub fn label(&self, pt: PhraseType) -> Option<&str> {
        self.entries.iter().find(|(p, _)| *p == pt).map(|(_, l)| l.as_str())
    }

    pub fn set(&mut self, pt: PhraseType, label: impl Into<String>) {
        let label = label.into();
        match self.entries.iter_mut().find(|(p, _)| *p == pt) {
            Some(e) => e.1 = label,
            None => self.entries.push((pt, label)),
        }
    }

    /// Relation id for `pt`, which must be a base (non-inverse) label.
    pub fn relation_id(&self, pt: PhraseType, relations: &RelationVocab) -> Result<u32> {
        let label = self
            .label(pt)
            .ok_or_else(|| Error::Config(format!("no relation mapping for phrase type {pt}")))?;
        let id = relations
            .id(label)
            .ok_or_else(|| Error::UnknownRelation(label.to_string()))?;
        if relations.is_inverse(id) {
            return Err(Error::Config(format!("{label:?} is an inverse label")));
        }
        Ok(id)
    }
}

fn to_f64<F: Real>(x: &[F]) -> Vec<f64> {
    x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
}

fn check_entity<F: Real>(p: &ModelParams<F>, id: u32) -> Result<()> {
    if id as usize >= p.n_entities() {
        return Err(Error::IdOutOfRange {
            what: "entity",
            id: id as usize,
            limit: p.n_entities(),
        });
    }
    Ok(())
}

/// `e_root + e_dependent` (DM: both from the target space).
pub fn compose_add<F: Real>(p: &ModelParams<F>, pa: &PhraseAnalysis) -> Result<Vec<f64>> {
    check_entity(p, pa.root)?;
    check_entity(p, pa.dependent)?;
    Ok(p.entity(pa.root)
        .iter()
        .zip(p.entity(pa.dependent))
        .map(|(a, b)| a.to_f64().unwrap_or(f64::NAN) + b.to_f64().unwrap_or(f64::NAN))
        .collect())
}

/// The model's relation-specific transformation of one word: the part of
/// its phrase equation applied to the transformed slot. DM maps the
/// context-space vector, `W_r e'_w`; MuRE stretches, `W_r o e_w`; RotE/RefE
/// apply `G_r e_w + t_r`; AttE gives `Q(w, r)`.
pub fn head_transform<F: Real>(p: &ModelParams<F>, w: u32, r: u32) -> Result<Vec<f64>> {
    p.check_triple(Triple::new(w, r, w))?;
    let n = p.dim();
    let mut out = vec![F::zero(); n];
    match p.kind() {
        ModelKind::Dm => {
            let m = p.relation_part(0, r);
            let e = p.tail_entity(w);
            for i in 0..n {
                out[i] = crate::geometry::dot(&m[i * n..(i + 1) * n], e);
            }
        }
        ModelKind::Mure => {
            for ((o, &d), &e) in out.iter_mut().zip(p.relation_part(0, r)).zip(p.entity(w)) {
                *o = d * e;
            }
        }
        ModelKind::RotE | ModelKind::RefE => {
            if p.kind() == ModelKind::RotE {
                rotate_into(p.relation_part(0, r), p.entity(w), &mut out);
            } else {
                reflect_into(p.relation_part(0, r), p.entity(w), &mut out);
            }
            for (o, &t) in out.iter_mut().zip(p.relation_part(1, r)) {
                *o += t;
            }
        }
        ModelKind::AttE => {
            let e = p.entity(w);
            let mut q_rot = vec![F::zero(); n];
            let mut q_ref = vec![F::zero(); n];
            rotate_into(p.relation_part(0, r), e, &mut q_rot);
            reflect_into(p.relation_part(1, r), e, &mut q_ref);
            let (ar, af) = attention_weights(&q_rot, &q_ref, p.relation_part(3, r));
            let trans = p.relation_part(2, r);
            for i in 0..n {
                out[i] = ar * q_rot[i] + af * q_ref[i] + trans[i];
            }
        }
    }
    Ok(to_f64(&out))
}

/// Phrase vector of the directed triple `(h, r, t)`.
pub fn compose_syn_directed<F: Real>(p: &ModelParams<F>, h: u32, r: u32, t: u32) -> Result<Vec<f64>> {
    p.check_triple(Triple::new(h, r, t))?;
    let (mapped, unmapped) = match p.kind() {
        // DM transforms the tail (context space) and adds the target-space head.
        ModelKind::Dm => (head_transform(p, t, r)?, to_f64(p.entity(h))),
        ModelKind::Mure => {
            let mut tail = to_f64(p.entity(t));
            for (x, w) in tail.iter_mut().zip(p.relation_part(1, r)) {
                *x += w.to_f64().unwrap_or(f64::NAN);
            }
            (head_transform(p, h, r)?, tail)
        }
        _ => (head_transform(p, h, r)?, to_f64(p.entity(t))),
    };
    Ok(mapped.iter().zip(&unmapped).map(|(a, b)| a + b).collect())
}

pub fn compose_phrase<F: Real>(
    p: &ModelParams<F>,
    relations: &RelationVocab,
    pa: &PhraseAnalysis,
    strategy: Strategy,
) -> Result<Vec<f64>> {
    let r = pa.relation;
    if strategy.uses_relation() && r as usize >= relations.len() {
        return Err(Error::IdOutOfRange {
            what: "relation",
            id: r as usize,
            limit: relations.len(),
        });
    }
    match strategy {
        Strategy::Add => compose_add(p, pa),
        Strategy::SynRh => compose_syn_directed(p, pa.root, r, pa.dependent),
        Strategy::SynRt => compose_syn_directed(p, pa.dependent, relations.inverse(r), pa.root),
        Strategy::SynBiD => {
            let rh = compose_syn_directed(p, pa.root, r, pa.dependent)?;
            let rt = compose_syn_directed(p, pa.dependent, relations.inverse(r), pa.root)?;
            Ok(rh.iter().zip(&rt).map(|(a, b)| a + b).collect())
        }
    }
}
