//! Model identification shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Bond,
    Site,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    Oriented,
    NonOriented,
}

/// The four critical-point families: (kind, orientation) pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Bond,
    OrientedBond,
    Site,
    OrientedSite,
}

impl Family {
    /// Table column order.
    pub const ALL: [Family; 4] = [
        Family::Bond,
        Family::OrientedBond,
        Family::Site,
        Family::OrientedSite,
    ];

    pub fn kind(self) -> Kind {
        match self {
            Family::Bond | Family::OrientedBond => Kind::Bond,
            Family::Site | Family::OrientedSite => Kind::Site,
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            Family::OrientedBond | Family::OrientedSite => Orientation::Oriented,
            Family::Bond | Family::Site => Orientation::NonOriented,
        }
    }

    pub fn from_parts(kind: Kind, orientation: Orientation) -> Family {
        match (kind, orientation) {
            (Kind::Bond, Orientation::NonOriented) => Family::Bond,
            (Kind::Bond, Orientation::Oriented) => Family::OrientedBond,
            (Kind::Site, Orientation::NonOriented) => Family::Site,
            (Kind::Site, Orientation::Oriented) => Family::OrientedSite,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Bond => "bond",
            Family::OrientedBond => "oriented-bond",
            Family::Site => "site",
            Family::OrientedSite => "oriented-site",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("unknown model family `{0}`")]
    UnknownFamily(String),
}

impl FromStr for Family {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| ModelError::UnknownFamily(s.to_string()))
    }
}

/// Bernoulli percolation on `Z^d`: dimension, bond vs site, oriented or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub d: usize,
    pub kind: Kind,
    pub orientation: Orientation,
}

impl ModelSpec {
    pub fn new(d: usize, kind: Kind, orientation: Orientation) -> Result<Self, ModelError> {
        if d < 2 {
            return Err(ModelError::DimensionTooSmall(d));
        }
        Ok(ModelSpec {
            d,
            kind,
            orientation,
        })
    }

    pub fn from_family(family: Family, d: usize) -> Result<Self, ModelError> {
        ModelSpec::new(d, family.kind(), family.orientation())
    }

    pub fn family(&self) -> Family {
        Family::from_parts(self.kind, self.orientation)
    }

    pub fn is_oriented(&self) -> bool {
        self.orientation == Orientation::Oriented
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} d={}", self.family(), self.d)
    }
}
