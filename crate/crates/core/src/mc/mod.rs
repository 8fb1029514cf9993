//! Lazily sampled Bernoulli configurations and the Monte Carlo estimators
//! built on them.

pub mod cluster;
pub mod exact;
pub mod stream;
pub mod sweep;
pub mod view;

use thiserror::Error;

use crate::lattice::{LatticeError, Vertex};

pub use cluster::{
    explore, explore_cluster, survival_proxy, survival_proxy_with, wilson_interval, ClusterReport,
    Domain, ExploreConfig, FiniteRegion, SurvivalEstimate, SurvivalEvent, Traversal,
    DEFAULT_STEP_CAP,
};
pub use exact::{exact_cluster_distribution, total_variation, SizeDistribution};
pub use stream::Stream;
pub use sweep::{sweep_replica, union_find_sweep, SweepCurve, SweepPoint, UnionFind};
pub use view::{LatticeShape, LatticeView, Params};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("expected {expected} per-axis probabilities, got {got}")]
    ParameterShape { expected: usize, got: usize },
    #[error("region is empty or has inconsistent dimensions")]
    EmptyRegion,
    #[error("region has {elements} random elements; at most {max} can be enumerated")]
    RegionTooLarge { elements: usize, max: usize },
    #[error("the origin is not in the region")]
    OriginOutsideRegion,
    #[error("operation not supported on {0:?}")]
    UnsupportedShape(LatticeShape),
    #[error("empty start set or zero step cap")]
    EmptyStart,
    #[error("start vertex {0:?} lies outside the domain")]
    StartOutsideDomain(Vertex),
    #[error("at least one replica is required")]
    NoReplicas,
    #[error("crossing sweeps are defined for non-oriented models only")]
    OrientedSweep,
    #[error("p grid must be sorted ascending")]
    UnsortedGrid,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}
