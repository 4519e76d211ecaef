//! JSON instance documents.
//!
//! ```json
//! {
//!   "rb_count": 4,
//!   "ru_capacity": ["inf"],
//!   "total_capacity": 7.0,
//!   "weight": [[1.0, 0.5]],
//!   "gamma": [[[1.0, 1.0, 1.0, 1.0], [4.0, 4.0, 4.0, 4.0]]]
//! }
//! ```
//!
//! `ru_capacity` entries are numbers or the string `"inf"`. `rb_count` is
//! optional when at least one RU has a user. Finite doubles round-trip exactly.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Instance;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity(pub f64);

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Capacity(x)),
            Raw::Str(s) if matches!(s.as_str(), "inf" | "+inf" | "infinity" | "Infinity") => {
                Ok(Capacity(f64::INFINITY))
            }
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad capacity {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rb_count: Option<usize>,
    pub ru_capacity: Vec<Capacity>,
    pub total_capacity: f64,
    pub weight: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<Vec<f64>>>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        let rb_count = match self.rb_count {
            Some(k) => k,
            None => self
                .gamma
                .iter()
                .flatten()
                .next()
                .map(|row| row.len())
                .ok_or_else(|| Error::Parse("rb_count missing and no gamma rows present".into()))?,
        };
        Instance::new(
            rb_count,
            self.ru_capacity.into_iter().map(|c| c.0).collect(),
            self.total_capacity,
            self.weight,
            self.gamma,
        )
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let m = inst.ru_count();
        InstanceFile {
            rb_count: Some(inst.rb_count()),
            ru_capacity: inst.ru_capacities().iter().map(|&c| Capacity(c)).collect(),
            total_capacity: inst.total_capacity(),
            weight: (0..m).map(|i| (0..inst.users(i)).map(|j| inst.weight(i, j)).collect()).collect(),
            gamma: (0..m)
                .map(|i| {
                    (0..inst.users(i))
                        .map(|j| (0..inst.rb_count()).map(|k| inst.gamma(i, j, k)).collect())
                        .collect()
                })
                .collect(),
        }
    }
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<InstanceFile>(text)?.into_instance()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from_instance(self)).expect("serializable")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
