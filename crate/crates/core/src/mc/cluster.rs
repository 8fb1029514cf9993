use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::stream::Stream;
use super::view::{check_probability, LatticeShape, LatticeView};
use super::SimError;
use crate::lattice::{hypercubic_steps, EdgeId, Element, Vertex};
use crate::model::{Kind, ModelSpec};

pub const DEFAULT_STEP_CAP: usize = 1_000_000;

/// A finite set of vertices of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteRegion {
    dim: usize,
    vertices: BTreeSet<Vertex>,
}

impl FiniteRegion {
    /// The rectangle `lo[i] <= x_i <= hi[i]`.
    pub fn rect(lo: &[i32], hi: &[i32]) -> Result<Self, SimError> {
        if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| a > b) {
            return Err(SimError::EmptyRegion);
        }
        let mut vertices = BTreeSet::new();
        let mut cur: Vec<i32> = lo.to_vec();
        loop {
            vertices.insert(Vertex::new(cur.iter().copied()));
            let mut axis = 0;
            loop {
                if axis == lo.len() {
                    return Ok(FiniteRegion {
                        dim: lo.len(),
                        vertices,
                    });
                }
                if cur[axis] < hi[axis] {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = lo[axis];
                axis += 1;
            }
        }
    }

    pub fn from_vertices<I: IntoIterator<Item = Vertex>>(vertices: I) -> Result<Self, SimError> {
        let vertices: BTreeSet<Vertex> = vertices.into_iter().collect();
        let dim = vertices.iter().next().ok_or(SimError::EmptyRegion)?.dim();
        if vertices.iter().any(|v| v.dim() != dim) {
            return Err(SimError::EmptyRegion);
        }
        Ok(FiniteRegion { dim, vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.vertices.contains(v)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertices in sorted order.
    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter()
    }

    /// A vertex with a lattice neighbour outside the region.
    pub fn on_boundary(&self, v: &Vertex) -> bool {
        hypercubic_steps(self.dim, false)
            .into_iter()
            .any(|s| !self.contains(&v.step(s)))
    }
}

/// Where an exploration is allowed to go.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    /// The L-infinity ball of radius `radius`; its boundary is the sphere.
    Ball { radius: u32 },
    Region(FiniteRegion),
}

impl Domain {
    pub fn contains(&self, v: &Vertex) -> bool {
        match self {
            Domain::Ball { radius } => v.linf_norm() <= *radius,
            Domain::Region(r) => r.contains(v),
        }
    }

    pub fn on_boundary(&self, v: &Vertex) -> bool {
        match self {
            Domain::Ball { radius } => v.linf_norm() == *radius,
            Domain::Region(r) => r.on_boundary(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Traversal {
    BreadthFirst,
    DepthFirst,
}

/// What counts as reaching "far away".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurvivalEvent {
    /// The cluster touches the boundary of the domain.
    BoundaryHit,
    /// The cluster reaches L1 distance equal to the ball radius.
    OneArm,
}

#[derive(Debug, Clone)]
pub struct ExploreConfig {
    pub domain: Domain,
    pub step_cap: usize,
    pub traversal: Traversal,
    pub stop_at_boundary: bool,
    pub event: SurvivalEvent,
}

impl ExploreConfig {
    pub fn ball(radius: u32) -> Self {
        ExploreConfig {
            domain: Domain::Ball { radius },
            step_cap: DEFAULT_STEP_CAP,
            traversal: Traversal::BreadthFirst,
            stop_at_boundary: true,
            event: SurvivalEvent::BoundaryHit,
        }
    }

    /// Full exploration of the cluster inside a finite region.
    pub fn region(region: FiniteRegion) -> Self {
        ExploreConfig {
            domain: Domain::Region(region),
            step_cap: DEFAULT_STEP_CAP,
            traversal: Traversal::BreadthFirst,
            stop_at_boundary: false,
            event: SurvivalEvent::BoundaryHit,
        }
    }

    fn reached(&self, v: &Vertex) -> bool {
        match (self.event, &self.domain) {
            (SurvivalEvent::OneArm, Domain::Ball { radius }) => v.l1_norm() >= *radius as u64,
            _ => self.domain.on_boundary(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub size: usize,
    pub truncated: bool,
    pub boundary_hit: bool,
    pub steps: usize,
}

/// Explores the open cluster of `start` in a hypercubic view. Start vertices
/// count as open; bond clusters follow open edges, site clusters open
/// vertices, oriented models only forward steps.
pub fn explore(
    view: &mut LatticeView,
    start: &[Vertex],
    config: &ExploreConfig,
) -> Result<ClusterReport, SimError> {
    let model = match view.shape() {
        LatticeShape::Hypercubic(m) => m,
        other => return Err(SimError::UnsupportedShape(other)),
    };
    if start.is_empty() || config.step_cap == 0 {
        return Err(SimError::EmptyStart);
    }
    for v in start {
        v.check_dim(model.d)?;
        if !config.domain.contains(v) {
            return Err(SimError::StartOutsideDomain(v.clone()));
        }
    }

    let steps_out = hypercubic_steps(model.d, model.is_oriented());
    let mut seen: FxHashSet<Vertex> = FxHashSet::default();
    let mut frontier: VecDeque<Vertex> = VecDeque::new();
    let mut report = ClusterReport {
        size: 0,
        truncated: false,
        boundary_hit: false,
        steps: 0,
    };

    for v in start {
        if seen.contains(v) {
            continue;
        }
        if admit(v.clone(), &mut seen, &mut frontier, &mut report, config) {
            return Ok(report);
        }
    }

    while let Some(v) = match config.traversal {
        Traversal::BreadthFirst => frontier.pop_front(),
        Traversal::DepthFirst => frontier.pop_back(),
    } {
        report.steps += 1;
        for &s in &steps_out {
            let w = v.step(s);
            if !config.domain.contains(&w) || seen.contains(&w) {
                continue;
            }
            let open = match model.kind {
                Kind::Bond => view.is_open(&Element::Edge(EdgeId::hypercubic(&v, s))),
                Kind::Site => view.is_open(&Element::Site(w.clone())),
            };
            if open && admit(w, &mut seen, &mut frontier, &mut report, config) {
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// Adds `v` to the cluster; returns `true` when exploration must stop.
fn admit(
    v: Vertex,
    seen: &mut FxHashSet<Vertex>,
    frontier: &mut VecDeque<Vertex>,
    report: &mut ClusterReport,
    config: &ExploreConfig,
) -> bool {
    report.size += 1;
    if config.reached(&v) {
        report.boundary_hit = true;
    }
    seen.insert(v.clone());
    frontier.push_back(v);
    if (report.boundary_hit && config.stop_at_boundary) || report.size >= config.step_cap {
        report.truncated = true;
        return true;
    }
    false
}

/// Breadth-first exploration of the cluster of `start` inside the L-infinity
/// ball of radius `box_radius`, stopping at the sphere or at `step_cap`
/// vertices.
pub fn explore_cluster(
    view: &mut LatticeView,
    start: &[Vertex],
    box_radius: u32,
    step_cap: usize,
) -> Result<ClusterReport, SimError> {
    let mut config = ExploreConfig::ball(box_radius);
    config.step_cap = step_cap;
    explore(view, start, &config)
}

/// 95% Wilson score interval for `hits` successes out of `n`.
pub fn wilson_interval(hits: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n_f = n as f64;
    let p_hat = hits as f64 / n_f;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n_f;
    let center = (p_hat + z2 / (2.0 * n_f)) / denom;
    let half = Z / denom * (p_hat * (1.0 - p_hat) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    let lo = (center - half).clamp(0.0, 1.0).min(p_hat);
    let hi = (center + half).clamp(0.0, 1.0).max(p_hat);
    (if hits == 0 { 0.0 } else { lo }, if hits == n { 1.0 } else { hi })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalEstimate {
    pub model: ModelSpec,
    pub p: f64,
    pub box_radius: u32,
    pub replicas: usize,
    pub master_seed: u64,
    pub event: SurvivalEvent,
    pub hits: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Start vertices are open by convention, so site estimates are
    /// conditional on an open origin.
    pub convention: String,
}

/// Fraction of replicas whose origin cluster reaches the boundary of the
/// radius-`box_radius` ball.
pub fn survival_proxy(
    model: ModelSpec,
    p: f64,
    box_radius: u32,
    replicas: usize,
    master_seed: u64,
) -> Result<SurvivalEstimate, SimError> {
    survival_proxy_with(model, p, box_radius, replicas, master_seed, SurvivalEvent::BoundaryHit)
}

pub fn survival_proxy_with(
    model: ModelSpec,
    p: f64,
    box_radius: u32,
    replicas: usize,
    master_seed: u64,
    event: SurvivalEvent,
) -> Result<SurvivalEstimate, SimError> {
    check_probability(p)?;
    if replicas == 0 {
        return Err(SimError::NoReplicas);
    }
    let mut config = ExploreConfig::ball(box_radius);
    // Whether the sphere is reached does not depend on traversal order, and
    // depth-first gets there with far fewer samples above criticality.
    config.traversal = Traversal::DepthFirst;
    config.event = event;
    let origin = [Vertex::origin(model.d)];
    let outcomes = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut view = LatticeView::hypercubic(model, p, Stream::new(master_seed, r as u64))?;
            Ok(explore(&mut view, &origin, &config)?.boundary_hit)
        })
        .collect::<Result<Vec<bool>, SimError>>()?;
    let hits = outcomes.iter().filter(|&&h| h).count();
    let (ci_low, ci_high) = wilson_interval(hits, replicas);
    Ok(SurvivalEstimate {
        model,
        p,
        box_radius,
        replicas,
        master_seed,
        event,
        hits,
        estimate: hits as f64 / replicas as f64,
        ci_low,
        ci_high,
        convention: "start-open".to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Orientation;

    fn model(d: usize, kind: Kind, o: Orientation) -> ModelSpec {
        ModelSpec::new(d, kind, o).unwrap()
    }

    #[test]
    fn closed_lattice_gives_the_start_set() {
        let m = model(3, Kind::Bond, Orientation::NonOriented);
        let mut view = LatticeView::hypercubic(m, 0.0, Stream::new(0, 0)).unwrap();
        let start = [Vertex::origin(3), Vertex::unit(3, 0)];
        let r = explore_cluster(&mut view, &start, 5, 100).unwrap();
        assert_eq!(r.size, 2);
        assert!(!r.boundary_hit && !r.truncated);
    }

    #[test]
    fn open_lattice_reaches_the_sphere() {
        let m = model(2, Kind::Bond, Orientation::NonOriented);
        for radius in [1, 4, 9] {
            let mut view = LatticeView::hypercubic(m, 1.0, Stream::new(0, 0)).unwrap();
            let r = explore_cluster(&mut view, &[Vertex::origin(2)], radius, 1_000_000).unwrap();
            assert!(r.boundary_hit && r.truncated);
            assert!(r.size > radius as usize);
        }
    }

    #[test]
    fn step_cap_truncates() {
        let m = model(3, Kind::Site, Orientation::NonOriented);
        let mut view = LatticeView::hypercubic(m, 1.0, Stream::new(0, 0)).unwrap();
        let r = explore_cluster(&mut view, &[Vertex::origin(3)], 50, 10).unwrap();
        assert_eq!(r.size, 10);
        assert!(r.truncated && !r.boundary_hit);
    }

    #[test]
    fn start_outside_box_is_rejected() {
        let m = model(2, Kind::Site, Orientation::Oriented);
        let mut view = LatticeView::hypercubic(m, 0.5, Stream::new(0, 0)).unwrap();
        let e = explore_cluster(&mut view, &[Vertex::new([4, 0])], 3, 10).unwrap_err();
        assert!(matches!(e, SimError::StartOutsideDomain(_)));
    }

    #[test]
    fn oriented_bond_first_step_law() {
        // P(size >= 2) = 1 - (1-p)^2 = 0.75 at p = 1/2 in d = 2.
        let m = model(2, Kind::Bond, Orientation::Oriented);
        let n = 20_000;
        let hits = (0..n)
            .filter(|&r| {
                let mut view = LatticeView::hypercubic(m, 0.5, Stream::new(11, r)).unwrap();
                explore_cluster(&mut view, &[Vertex::origin(2)], 10, 100).unwrap().size >= 2
            })
            .count();
        let freq = hits as f64 / n as f64;
        let sigma = (0.75f64 * 0.25 / n as f64).sqrt();
        assert!((freq - 0.75).abs() < 4.0 * sigma, "{freq}");
    }

    #[test]
    fn traversal_order_does_not_change_the_cluster() {
        let m = model(2, Kind::Site, Orientation::NonOriented);
        let region = FiniteRegion::rect(&[-6, -6], &[6, 6]).unwrap();
        for r in 0..50 {
            let mut bfs = ExploreConfig::region(region.clone());
            let mut view = LatticeView::hypercubic(m, 0.55, Stream::new(3, r)).unwrap();
            let a = explore(&mut view, &[Vertex::origin(2)], &bfs).unwrap();
            bfs.traversal = Traversal::DepthFirst;
            let mut view = LatticeView::hypercubic(m, 0.55, Stream::new(3, r)).unwrap();
            let b = explore(&mut view, &[Vertex::origin(2)], &bfs).unwrap();
            assert_eq!((a.size, a.boundary_hit), (b.size, b.boundary_hit));
        }
    }

    #[test]
    fn survival_extremes() {
        let m = model(3, Kind::Bond, Orientation::Oriented);
        let one = survival_proxy(m, 1.0, 6, 20, 1).unwrap();
        assert_eq!((one.estimate, one.ci_high), (1.0, 1.0));
        let zero = survival_proxy(m, 0.0, 6, 20, 1).unwrap();
        assert_eq!((zero.estimate, zero.ci_low), (0.0, 0.0));
        assert!(survival_proxy(m, 0.5, 6, 0, 1).is_err());
        assert!(survival_proxy(m, -0.1, 6, 10, 1).is_err());
    }

    #[test]
    fn survival_is_monotone_under_shared_uniforms() {
        let m = model(2, Kind::Site, Orientation::NonOriented);
        let grid = [0.45, 0.55, 0.6, 0.65, 0.75];
        let hits: Vec<usize> = grid
            .iter()
            .map(|&p| survival_proxy(m, p, 12, 300, 77).unwrap().hits)
            .collect();
        assert!(hits.windows(2).all(|w| w[0] <= w[1]), "{hits:?}");
    }

    #[test]
    fn one_arm_event_is_available() {
        let m = model(2, Kind::Bond, Orientation::Oriented);
        let e = survival_proxy_with(m, 1.0, 8, 10, 0, SurvivalEvent::OneArm).unwrap();
        assert_eq!(e.hits, 10);
        let e = survival_proxy_with(m, 0.2, 8, 200, 0, SurvivalEvent::OneArm).unwrap();
        assert!(e.estimate < 0.05);
    }

    #[test]
    fn wilson_bounds_are_ordered() {
        for n in [1usize, 7, 100, 10_000] {
            for hits in [0, n / 3, n / 2, n] {
                let (lo, hi) = wilson_interval(hits, n);
                let est = hits as f64 / n as f64;
                assert!(0.0 <= lo && lo <= est && est <= hi && hi <= 1.0);
            }
        }
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn region_boundary() {
        let r = FiniteRegion::rect(&[0, 0], &[2, 2]).unwrap();
        assert_eq!(r.len(), 9);
        assert!(r.on_boundary(&Vertex::new([0, 1])));
        assert!(!r.on_boundary(&Vertex::new([1, 1])));
    }
}
