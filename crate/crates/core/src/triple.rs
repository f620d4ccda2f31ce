use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A directed (head, relation, tail) edge over dense ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub h: u32,
    pub r: u32,
    pub t: u32,
}

impl Triple {
    pub const fn new(h: u32, r: u32, t: u32) -> Self {
        Self { h, r, t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "DM")]
    Dm,
    #[serde(rename = "MuRE")]
    Mure,
    #[serde(rename = "RotE")]
    RotE,
    #[serde(rename = "RefE")]
    RefE,
    #[serde(rename = "AttE")]
    AttE,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Dm,
        ModelKind::Mure,
        ModelKind::RotE,
        ModelKind::RefE,
        ModelKind::AttE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Dm => "DM",
            ModelKind::Mure => "MuRE",
            ModelKind::RotE => "RotE",
            ModelKind::RefE => "RefE",
            ModelKind::AttE => "AttE",
        }
    }

    /// Rotation and reflection act on coordinate pairs.
    pub fn needs_even_dim(self) -> bool {
        matches!(self, ModelKind::RotE | ModelKind::RefE | ModelKind::AttE)
    }

    /// Models scored by negative squared distance plus entity biases.
    pub fn is_distance_model(self) -> bool {
        !matches!(self, ModelKind::Dm)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dm" => Ok(ModelKind::Dm),
            "mure" => Ok(ModelKind::Mure),
            "rote" => Ok(ModelKind::RotE),
            "refe" => Ok(ModelKind::RefE),
            "atte" => Ok(ModelKind::AttE),
            other => Err(Error::Config(format!("unknown model {other:?}"))),
        }
    }
}
