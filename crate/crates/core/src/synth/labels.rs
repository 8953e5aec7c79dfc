use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::LabelKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn fundamental_hz(self) -> f64 {
        match self {
            Self::X => 140.0,
            Self::Y => 180.0,
            Self::Z => 210.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MovementLabel {
    X,
    Y,
    Z,
    XY,
    XZ,
    YZ,
    XYZ,
}

impl MovementLabel {
    pub const ALL: [MovementLabel; 7] = [Self::X, Self::Y, Self::Z, Self::XY, Self::XZ, Self::YZ, Self::XYZ];
    pub const NAMES: [&'static str; 7] = ["X", "Y", "Z", "XY", "XZ", "YZ", "XYZ"];

    pub fn as_str(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn axes(self) -> &'static [Axis] {
        use Axis::*;
        match self {
            Self::X => &[X],
            Self::Y => &[Y],
            Self::Z => &[Z],
            Self::XY => &[X, Y],
            Self::XZ => &[X, Z],
            Self::YZ => &[Y, Z],
            Self::XYZ => &[X, Y, Z],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WorkflowLabel {
    Push,
    Pull,
    PickAndPlace,
    Packing,
}

impl WorkflowLabel {
    pub const ALL: [WorkflowLabel; 4] = [Self::Push, Self::Pull, Self::PickAndPlace, Self::Packing];
    pub const NAMES: [&'static str; 4] = ["Push", "Pull", "Pick-and-Place", "Packing"];

    pub fn as_str(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

fn normalize(s: &str) -> String {
    s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase()
}

impl FromStr for MovementLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Label(format!("unknown movement label '{s}'")))
    }
}

impl FromStr for WorkflowLabel {
    type Err = Error;

    /// Accepts `Pick-and-Place`, `PickAndPlace`, `pick_and_place` and so on.
    fn from_str(s: &str) -> Result<Self> {
        let key = normalize(s);
        Self::ALL
            .into_iter()
            .find(|w| normalize(w.as_str()) == key)
            .ok_or_else(|| Error::Label(format!("unknown workflow label '{s}'")))
    }
}

impl fmt::Display for MovementLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for WorkflowLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a clip depicts: a single movement or a scripted workflow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    Movement(MovementLabel),
    Workflow(WorkflowLabel),
}

impl Target {
    pub fn kind(self) -> LabelKind {
        match self {
            Self::Movement(_) => LabelKind::Movement,
            Self::Workflow(_) => LabelKind::Workflow,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Movement(m) => m.as_str(),
            Self::Workflow(w) => w.as_str(),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Self::Movement(m) => m.index(),
            Self::Workflow(w) => w.index(),
        }
    }

    pub fn parse(kind: LabelKind, label: &str) -> Result<Self> {
        Ok(match kind {
            LabelKind::Movement => Self::Movement(label.parse()?),
            LabelKind::Workflow => Self::Workflow(label.parse()?),
        })
    }
}

/// Canonical class names for a label kind, in class-index order.
pub fn label_names(kind: LabelKind) -> &'static [&'static str] {
    match kind {
        LabelKind::Movement => &MovementLabel::NAMES,
        LabelKind::Workflow => &WorkflowLabel::NAMES,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_counts() {
        assert_eq!(MovementLabel::ALL.len(), 7);
        assert_eq!(WorkflowLabel::ALL.len(), 4);
    }

    #[test]
    fn labels_parse_back() {
        for m in MovementLabel::ALL {
            assert_eq!(m.as_str().parse::<MovementLabel>().unwrap(), m);
            assert_eq!(m.index(), MovementLabel::NAMES.iter().position(|n| *n == m.as_str()).unwrap());
        }
        for w in WorkflowLabel::ALL {
            assert_eq!(w.as_str().parse::<WorkflowLabel>().unwrap(), w);
        }
        assert_eq!("PickAndPlace".parse::<WorkflowLabel>().unwrap(), WorkflowLabel::PickAndPlace);
        assert!(matches!("W".parse::<MovementLabel>(), Err(Error::Label(_))));
    }

    #[test]
    fn composites_superpose_axes() {
        assert_eq!(MovementLabel::XYZ.axes().len(), 3);
        assert_eq!(MovementLabel::YZ.axes(), &[Axis::Y, Axis::Z]);
    }
}
