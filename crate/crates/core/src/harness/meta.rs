use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Movement,
    Workflow,
}

impl LabelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Movement => "movement",
            Self::Workflow => "workflow",
        }
    }
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "movement" => Ok(Self::Movement),
            "workflow" => Ok(Self::Workflow),
            _ => Err(Error::Label(format!("unknown label kind '{s}'"))),
        }
    }
}

/// Fixed per-recording annotation, copied onto every chunk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub label_kind: LabelKind,
    pub label: String,
    pub speed_mm_s: f64,
    pub move_distance_mm: f64,
    pub mic_distance_cm: f64,
    pub seed: Option<u64>,
}

impl RecordingMeta {
    pub fn validate(&self) -> Result<()> {
        crate::synth::label_names(self.label_kind)
            .iter()
            .any(|l| *l == self.label)
            .then_some(())
            .ok_or_else(|| Error::Label(format!("'{}' is not a valid {} label", self.label, self.label_kind)))?;
        for (name, v) in [
            ("speed_mm_s", self.speed_mm_s),
            ("move_distance_mm", self.move_distance_mm),
            ("mic_distance_cm", self.mic_distance_cm),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
