//! Susceptible-infected explorations that couple a source percolation model
//! to a target one, run step by step on lazily sampled lattices, together
//! with the checks that the couplings do what they claim.

mod events;
mod process;
mod runs;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::LatticeError;
use crate::mc::SimError;
use crate::model::ModelError;

pub use events::{landing_point, sample_event_a, sample_event_b, SplitContext, K_CAP};
pub use process::{
    ExplorationState, RunOptions, SourceLattice, StepRecord, Susceptible, Violations,
};
pub use runs::{
    run_coupling, run_dimension_fold_coupling, run_direct, run_oriented_edge_split_coupling,
    run_site_vertex_split_coupling, run_triangular_coupling, CouplingSpec, CouplingTrace,
    DEFAULT_COUPLING_CAP,
};
pub use validate::{
    calibrate_event, two_proportion_test, validate_domination, CalibrationReport,
    PathwiseSummary, TailTest, ValidationReport, FAMILY_ALPHA, MIN_REPLICAS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CouplingError {
    #[error("parameter {name} = {value} outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("dimension {0} is too small for this coupling")]
    Dimension(usize),
    #[error("step cap must be at least 1")]
    ZeroStepCap,
    #[error("at least {min} replicas are required, got {got}")]
    TooFewReplicas { got: usize, min: usize },
    #[error("escalation chain reached {0} levels")]
    KCapReached(u32),
    #[error("the view does not hold the split lattice this event needs")]
    WrongView,
    #[error("the {0} coupling has no resolving event to calibrate")]
    NoEvent(&'static str),
    #[error("direction {0} is not available here")]
    Direction(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Result of resolving one frontier item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventOutcome {
    pub occurred: bool,
    /// Number of `u_{d+1}` steps taken before landing.
    #[serde(rename = "k")]
    pub landing_k: Option<u32>,
    /// Split copy (vertex split) or position in the class (fold) landed on.
    #[serde(rename = "label")]
    pub landing_label: Option<u8>,
}

impl EventOutcome {
    pub fn failed() -> Self {
        EventOutcome {
            occurred: false,
            landing_k: None,
            landing_label: None,
        }
    }

    pub fn landed(k: u32, label: Option<u8>) -> Self {
        EventOutcome {
            occurred: true,
            landing_k: Some(k),
            landing_label: label,
        }
    }
}

/// Merges the parameters of the last two directions: `1 - (1-a)(1-b)`.
pub fn combine_last_two_directions(p_d: f64, p_d1: f64) -> Result<f64, CouplingError> {
    let p_d = check_unit("p_d", p_d)?;
    let p_d1 = check_unit("p_d1", p_d1)?;
    Ok(1.0 - (1.0 - p_d) * (1.0 - p_d1))
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64, CouplingError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(CouplingError::Parameter {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<f64, CouplingError> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(CouplingError::Parameter {
            name,
            value,
            range: "(0, 1)",
        })
    }
}
