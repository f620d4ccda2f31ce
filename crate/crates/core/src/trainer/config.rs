use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::triple::ModelKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    #[serde(rename = "SGD")]
    Sgd,
    #[serde(rename = "Adam")]
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossMode {
    #[serde(rename = "SGNS")]
    Sgns,
    #[serde(rename = "BernoulliNLL")]
    BernoulliNll,
    #[serde(rename = "SoftmaxCE")]
    SoftmaxCe,
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Self::Sgd),
            "adam" => Ok(Self::Adam),
            _ => Err(Error::Config(format!("unknown optimizer {s:?} (expected sgd|adam)"))),
        }
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sgd => "sgd",
            Self::Adam => "adam",
        })
    }
}

impl FromStr for LossMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "sgns" => Ok(Self::Sgns),
            "bernoulli" | "bernoullinll" => Ok(Self::BernoulliNll),
            "softmax" | "softmaxce" | "ce" => Ok(Self::SoftmaxCe),
            _ => Err(Error::Config(format!(
                "unknown loss mode {s:?} (expected sgns|bernoulli|softmax-ce)"
            ))),
        }
    }
}

impl fmt::Display for LossMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sgns => "sgns",
            Self::BernoulliNll => "bernoulli",
            Self::SoftmaxCe => "softmax-ce",
        })
    }
}

/// Every hyperparameter of a training run. Stored verbatim in checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub model_kind: ModelKind,
    pub dim: usize,
    pub epochs: usize,
    pub neg_per_pos: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub batch_size: usize,
    pub min_count: u64,
    pub loss_mode: LossMode,
    pub seed: u64,
    pub neg_power: f64,
    /// 1 selects the deterministic single-writer loop.
    pub threads: usize,
    /// Softmax over every entity instead of sampled negatives.
    pub full_ce: bool,
    /// Start DM relation maps at the identity.
    pub identity_rel_maps: bool,
}

pub const DEFAULT_DIM: usize = 300;
pub const DEFAULT_BATCH: usize = 512;

impl TrainConfig {
    /// Best text8 settings per model: min count, negatives, epochs, learning
    /// rate and optimizer, with the loss family and sampling power each model
    /// was designed with.
    pub fn defaults(kind: ModelKind) -> Self {
        let (min_count, neg, epochs, lr, opt, loss, power) = match kind {
            ModelKind::Dm => (100, 20, 5, 0.001, Optimizer::Adam, LossMode::Sgns, 0.75),
            ModelKind::Mure => (0, 40, 50, 50.0, Optimizer::Sgd, LossMode::BernoulliNll, 0.0),
            ModelKind::RotE | ModelKind::RefE => (0, 30, 15, 50.0, Optimizer::Sgd, LossMode::SoftmaxCe, 0.0),
            ModelKind::AttE => (0, 25, 10, 50.0, Optimizer::Sgd, LossMode::SoftmaxCe, 0.0),
        };
        Self {
            model_kind: kind,
            dim: DEFAULT_DIM,
            epochs,
            neg_per_pos: neg,
            learning_rate: lr,
            optimizer: opt,
            batch_size: DEFAULT_BATCH,
            min_count,
            loss_mode: loss,
            seed: 0,
            neg_power: power,
            threads: 1,
            full_ce: false,
            identity_rel_maps: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.neg_per_pos < 1 && !self.full_ce {
            return Err(Error::Config("neg_per_pos must be >= 1".into()));
        }
        if self.epochs < 1 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.batch_size < 1 {
            return Err(Error::Config("batch_size must be >= 1".into()));
        }
        if self.threads < 1 {
            return Err(Error::Config("threads must be >= 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.neg_power.is_finite() && self.neg_power >= 0.0) {
            return Err(Error::Config(format!("neg_power must be >= 0, got {}", self.neg_power)));
        }
        if self.dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        if self.model_kind.needs_even_dim() && !self.dim.is_multiple_of(2) {
            return Err(Error::OddDim {
                kind: self.model_kind.name(),
                dim: self.dim,
            });
        }
        Ok(())
    }

    pub fn deterministic(&self) -> bool {
        self.threads == 1
    }

    /// Sets one field from its textual form, as used by `key = value` config
    /// files and command-line overrides. `model_kind` is not settable here.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
        }
        fn flag(key: &str, v: &str) -> Result<bool> {
            match v.to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" | "on" => Ok(true),
                "false" | "0" | "no" | "off" => Ok(false),
                _ => Err(Error::Config(format!("bad boolean {v:?} for {key}"))),
            }
        }
        match key {
            "dim" => self.dim = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "neg" | "neg_per_pos" => self.neg_per_pos = num(key, value)?,
            "lr" | "learning_rate" => self.learning_rate = num(key, value)?,
            "opt" | "optimizer" => self.optimizer = value.parse()?,
            "batch_size" => self.batch_size = num(key, value)?,
            "min_count" => self.min_count = num(key, value)?,
            "loss" | "loss_mode" => self.loss_mode = value.parse()?,
            "seed" => self.seed = num(key, value)?,
            "neg_power" => self.neg_power = num(key, value)?,
            "threads" => self.threads = num(key, value)?,
            "full_ce" => self.full_ce = flag(key, value)?,
            "identity_rel_maps" => self.identity_rel_maps = flag(key, value)?,
            _ => return Err(Error::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_defaults() {
        let m = TrainConfig::defaults(ModelKind::Mure);
        assert_eq!(
            (m.neg_per_pos, m.epochs, m.learning_rate, m.optimizer),
            (40, 50, 50.0, Optimizer::Sgd)
        );
        let r = TrainConfig::defaults(ModelKind::RefE);
        assert_eq!((r.neg_per_pos, r.epochs, r.learning_rate), (30, 15, 50.0));
        let d = TrainConfig::defaults(ModelKind::Dm);
        assert_eq!(
            (d.min_count, d.neg_per_pos, d.epochs, d.optimizer),
            (100, 20, 5, Optimizer::Adam)
        );
        assert_eq!(d.neg_power, 0.75);
        let a = TrainConfig::defaults(ModelKind::AttE);
        assert_eq!((a.neg_per_pos, a.epochs), (25, 10));
        for k in ModelKind::ALL {
            TrainConfig::defaults(k).validate().unwrap();
        }
    }

    #[test]
    fn invalid_values_rejected() {
        let mut c = TrainConfig::defaults(ModelKind::RotE);
        c.dim = 301;
        assert!(matches!(c.validate(), Err(Error::OddDim { .. })));
        let mut c = TrainConfig::defaults(ModelKind::Mure);
        c.neg_per_pos = 0;
        assert!(c.validate().is_err());
        assert!(c.set("nope", "1").is_err());
        assert!(c.set("epochs", "x").is_err());
    }

    #[test]
    fn set_parses_fields() {
        let mut c = TrainConfig::defaults(ModelKind::Dm);
        c.set("lr", "0.5").unwrap();
        c.set("opt", "SGD").unwrap();
        c.set("loss", "softmax-ce").unwrap();
        c.set("full_ce", "true").unwrap();
        assert_eq!(c.learning_rate, 0.5);
        assert_eq!(c.optimizer, Optimizer::Sgd);
        assert_eq!(c.loss_mode, LossMode::SoftmaxCe);
        assert!(c.full_ce);
    }
}
