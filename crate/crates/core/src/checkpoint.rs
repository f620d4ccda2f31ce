//! Trained-model persistence.
//!
//! Layout: `SYGE0001\n`, one JSON header line, then every parameter table as
//! little-endian `f32` in manifest order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::binfmt::{read_container, write_container, write_f32s, Magic, PayloadReader};
use crate::error::{Error, Result};
use crate::models::ModelParams;
use crate::trainer::TrainConfig;
use crate::triple::ModelKind;
use crate::vocab::{RelationVocab, Vocab};

pub(crate) const CHECKPOINT_MAGIC: Magic = Magic {
    prefix: "SYGE",
    version: "0001",
};

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model_kind: ModelKind,
    pub dim: usize,
    pub vocab: Vocab,
    pub relations: RelationVocab,
    pub params: ModelParams<f32>,
    pub train_config: TrainConfig,
}

#[derive(Serialize, Deserialize)]
struct Header {
    model_kind: ModelKind,
    dim: usize,
    vocab: Vec<(String, u64)>,
    relations: Vec<String>,
    inverse_of: Vec<u32>,
    train_config: TrainConfig,
    manifest: Vec<(String, usize)>,
}

impl Checkpoint {
    pub fn new(
        vocab: Vocab,
        relations: RelationVocab,
        params: ModelParams<f32>,
        train_config: TrainConfig,
    ) -> Result<Self> {
        let ck = Self {
            model_kind: params.kind(),
            dim: params.dim(),
            vocab,
            relations,
            params,
            train_config,
        };
        ck.validate()?;
        Ok(ck)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_kind.needs_even_dim() && !self.dim.is_multiple_of(2) {
            return Err(Error::OddDim {
                kind: self.model_kind.name(),
                dim: self.dim,
            });
        }
        let p = &self.params;
        if p.kind() != self.model_kind || p.dim() != self.dim {
            return Err(Error::ShapeMismatch(format!(
                "parameters are {} n={}, header says {} n={}",
                p.kind(),
                p.dim(),
                self.model_kind,
                self.dim
            )));
        }
        if p.n_entities() != self.vocab.len() || p.n_relations() != self.relations.len() {
            return Err(Error::ShapeMismatch(format!(
                "parameters cover {} entities / {} relations, vocabularies have {} / {}",
                p.n_entities(),
                p.n_relations(),
                self.vocab.len(),
                self.relations.len()
            )));
        }
        for (spec, table) in p.specs().iter().zip(p.tables()) {
            if table.data.len() != spec.len() || table.rows != spec.rows || table.cols != spec.cols {
                return Err(Error::ShapeMismatch(format!(
                    "table {} has {} elements, expected {}",
                    spec.name,
                    table.data.len(),
                    spec.len()
                )));
            }
        }
        self.relations.validate()
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.validate()?;
        let header = Header {
            model_kind: self.model_kind,
            dim: self.dim,
            vocab: self.vocab.entries().to_vec(),
            relations: self.relations.entries().to_vec(),
            inverse_of: self.relations.inverse_map().to_vec(),
            train_config: self.train_config.clone(),
            manifest: self
                .params
                .specs()
                .iter()
                .map(|s| (s.name.to_string(), s.len()))
                .collect(),
        };
        write_container(path, &CHECKPOINT_MAGIC, &header, |w| {
            for t in self.params.tables() {
                write_f32s(w, &t.data)?;
            }
            Ok(())
        })
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let (header, payload) = read_container(path, &CHECKPOINT_MAGIC)?;
        let h: Header = serde_json::from_slice(&header).map_err(|e| Error::Header(e.to_string()))?;
        if h.model_kind.needs_even_dim() && !h.dim.is_multiple_of(2) {
            return Err(Error::OddDim {
                kind: h.model_kind.name(),
                dim: h.dim,
            });
        }
        let vocab = Vocab::from_entries(h.vocab)?;
        let relations = RelationVocab::from_parts(h.relations, h.inverse_of)?;
        let specs = crate::models::layout(h.model_kind, vocab.len(), relations.len(), h.dim);
        let expected: Vec<(&str, usize)> = specs.iter().map(|s| (s.name, s.len())).collect();
        let found: Vec<(&str, usize)> = h.manifest.iter().map(|(n, c)| (n.as_str(), *c)).collect();
        if expected != found {
            return Err(Error::ShapeMismatch(format!(
                "manifest {found:?} does not match {} layout {expected:?}",
                h.model_kind
            )));
        }
        let total = specs.iter().map(|s| s.len()).sum();
        let mut r = PayloadReader::new(&payload, total)?;
        let data = specs.iter().map(|s| r.f32s(s.len())).collect();
        let params = ModelParams::from_tables(h.model_kind, vocab.len(), relations.len(), h.dim, data)?;
        Self::new(vocab, relations, params, h.train_config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::count_params;
    use crate::rng::Rng;

    fn small(kind: ModelKind, nv: usize, base_rels: usize, dim: usize, seed: u64) -> Checkpoint {
        let vocab = Vocab::from_counts((0..nv).map(|i| (format!("w{i}"), (nv - i) as u64)), 0);
        let relations = RelationVocab::from_base_labels((0..base_rels).map(|i| format!("r{i}")));
        let mut rng = Rng::new(seed);
        let mut params = ModelParams::init(kind, vocab.len(), relations.len(), dim, false, &mut rng).unwrap();
        for t in params.tables_mut() {
            for x in &mut t.data {
                *x += rng.uniform_f32(-1.0, 1.0);
            }
        }
        Checkpoint::new(vocab, relations, params, TrainConfig::defaults(kind)).unwrap()
    }

    #[test]
    fn round_trip_every_kind_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        for (i, kind) in ModelKind::ALL.into_iter().enumerate() {
            let ck = small(kind, 3, 1, 4, i as u64);
            let p = dir.path().join(format!("{kind}.ck"));
            ck.save(&p).unwrap();
            let back = Checkpoint::load(&p).unwrap();
            assert_eq!(back, ck);
            for (a, b) in back.params.tables().iter().zip(ck.params.tables()) {
                let ab: Vec<u32> = a.data.iter().map(|x| x.to_bits()).collect();
                let bb: Vec<u32> = b.data.iter().map(|x| x.to_bits()).collect();
                assert_eq!(ab, bb);
            }
        }
    }

    #[test]
    fn magic_prefix_written() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.ck");
        small(ModelKind::Dm, 3, 1, 4, 0).save(&p).unwrap();
        assert!(std::fs::read(&p).unwrap().starts_with(b"SYGE0001\n"));
    }

    #[test]
    fn mismatched_rows_refused() {
        let mut ck = small(ModelKind::Dm, 3, 1, 4, 0);
        ck.vocab = Vocab::from_counts(vec![("only".to_string(), 1)], 0);
        let dir = tempfile::tempdir().unwrap();
        let err = ck.save(dir.path().join("x.ck")).unwrap_err();
        assert!(err.to_string().contains("shape mismatch"), "{err}");
    }

    #[test]
    fn truncated_file_detected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.ck");
        small(ModelKind::Mure, 3, 1, 4, 0).save(&p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 6]).unwrap();
        let err = Checkpoint::load(&p).unwrap_err();
        assert!(err.to_string().contains("truncated payload"), "{err}");
    }

    #[test]
    fn bad_magic_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.ck");
        std::fs::write(&p, b"NOPE0001\n{}\n").unwrap();
        assert!(matches!(Checkpoint::load(&p), Err(Error::BadMagic { .. })));
        std::fs::write(&p, b"SYGE0002\n{}\n").unwrap();
        assert!(matches!(Checkpoint::load(&p), Err(Error::VersionMismatch { .. })));
    }

    #[test]
    fn odd_dim_rejected_on_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.ck");
        small(ModelKind::RotE, 3, 1, 4, 0).save(&p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        let text = String::from_utf8_lossy(&bytes).into_owned();
        let nl = text[9..].find('\n').unwrap() + 9;
        let header = text[9..nl].replacen("\"dim\":4", "\"dim\":301", 1);
        let mut out = b"SYGE0001\n".to_vec();
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&bytes[nl..]);
        std::fs::write(&p, out).unwrap();
        let err = Checkpoint::load(&p).unwrap_err();
        assert!(err.to_string().contains("dim must be even"), "{err}");
    }

    #[test]
    fn paper_scale_rote_file_size() {
        let nv = 72_000;
        let vocab = Vocab::from_counts((0..nv).map(|i| (format!("w{i}"), 1)), 0);
        let relations = RelationVocab::from_base_labels((0..44).map(|i| format!("r{i}")));
        let params = ModelParams::zeros(ModelKind::RotE, nv, 88, 300).unwrap();
        let ck = Checkpoint::new(vocab, relations, params, TrainConfig::defaults(ModelKind::RotE)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("big.ck");
        ck.save(&p).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        let header_len = bytes.iter().skip(9).position(|&b| b == b'\n').unwrap() + 10;
        let expected = count_params(ModelKind::RotE, nv, 88, 300);
        assert_eq!(bytes.len() - header_len, 4 * expected);
    }
}
