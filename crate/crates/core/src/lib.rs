//! Rigorous upper bounds on critical probabilities of Bernoulli percolation
//! on `Z^d`, together with the Monte Carlo machinery used to sanity-check
//! them: lazily sampled lattices, cluster exploration, union-find sweeps and
//! executable versions of the dynamical couplings behind the bounds.

pub mod bounds;
pub mod couplings;
pub mod lattice;
pub mod mc;
pub mod model;

pub use model::{Family, Kind, ModelSpec, Orientation};
