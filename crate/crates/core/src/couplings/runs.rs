use serde::{Deserialize, Serialize};

use super::events::{landing_point, sample_event_a, sample_event_b, SplitContext};
use super::process::{
    cached_cluster_size, ExplorationState, Process, Resolution, RunOptions, SourceLattice,
    StepRecord, Violations,
};
use super::{check_open_unit, check_unit, CouplingError, EventOutcome};
use crate::lattice::{
    hypercubic_steps, DirectionMap, EdgeId, Element, SplitEdgeId, SplitVertexId, Step, Vertex,
};
use crate::mc::{LatticeShape, LatticeView, Params, Stream};
use crate::model::{Kind, ModelSpec, Orientation};

pub const DEFAULT_COUPLING_CAP: usize = 100_000;

/// Stream purpose tag for direct simulations of the source model.
const DIRECT_PURPOSE: u64 = 0xD1EC7;

/// A coupling and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CouplingSpec {
    /// Anisotropic bond percolation on `T` inside `Z^3`.
    Triangular { p: [f64; 3] },
    /// Oriented bond percolation on `Z^d` inside `Z^{d+1}_E`.
    EdgeSplit { d: usize, p: f64 },
    /// Site percolation on `Z^d` inside `Z^{d+1}_V`.
    VertexSplit { d: usize, p: f64 },
    /// Site percolation on `Z^k` inside `Z^d`.
    Fold {
        d: usize,
        k: usize,
        p: f64,
        orientation: Orientation,
    },
}

impl CouplingSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingSpec::Triangular { .. } => "triangular",
            CouplingSpec::EdgeSplit { .. } => "edge-split",
            CouplingSpec::VertexSplit { .. } => "vertex-split",
            CouplingSpec::Fold { .. } => "fold",
        }
    }

    pub fn validate(&self) -> Result<(), CouplingError> {
        match *self {
            CouplingSpec::Triangular { p } => {
                for (name, v) in ["p1", "p2", "p3"].into_iter().zip(p) {
                    check_unit(name, v)?;
                }
            }
            CouplingSpec::EdgeSplit { d, p } | CouplingSpec::VertexSplit { d, p } => {
                if d < 2 {
                    return Err(CouplingError::Dimension(d));
                }
                check_open_unit("p", p)?;
            }
            CouplingSpec::Fold { d, k, p, .. } => {
                if d < 2 {
                    return Err(CouplingError::Dimension(d));
                }
                DirectionMap::partition(d, k)?;
                check_open_unit("p", p)?;
            }
        }
        Ok(())
    }

    /// Name of the event resolving each attempt, if it is not a single
    /// element.
    pub fn event_name(&self) -> Option<&'static str> {
        match self {
            CouplingSpec::Triangular { .. } => None,
            CouplingSpec::EdgeSplit { .. } => Some("A"),
            CouplingSpec::VertexSplit { .. } => Some("A_n"),
            CouplingSpec::Fold { .. } => Some("B"),
        }
    }

    /// Closed-form probability of the resolving event, which is the
    /// parameter of the source model the infection follows.
    pub fn event_probability(&self) -> Option<f64> {
        match *self {
            CouplingSpec::Triangular { .. } => None,
            CouplingSpec::EdgeSplit { d, p } => {
                Some(p / (p + (1.0 - p).powf((d as f64 + 1.0) / d as f64)))
            }
            CouplingSpec::VertexSplit { d, p } => {
                let m = (2 * d - 1) as f64;
                Some(p / (p + (1.0 - p).powf((m + 1.0) / m)))
            }
            CouplingSpec::Fold { d, k, p, .. } => Some(1.0 - (1.0 - p).powf(d as f64 / k as f64)),
        }
    }

    /// Open probability of the split elements.
    pub fn split_parameter(&self) -> Option<f64> {
        match *self {
            CouplingSpec::EdgeSplit { d, p } => Some(1.0 - (1.0 - p).powf(1.0 / d as f64)),
            CouplingSpec::VertexSplit { d, p } => {
                Some(1.0 - (1.0 - p).powf(1.0 / (2 * d - 1) as f64))
            }
            _ => None,
        }
    }

    pub fn source(&self) -> SourceLattice {
        match *self {
            CouplingSpec::Triangular { .. } => SourceLattice::Triangular,
            CouplingSpec::EdgeSplit { d, .. } => SourceLattice::Hypercubic { d, oriented: true },
            CouplingSpec::VertexSplit { d, .. } => SourceLattice::Hypercubic { d, oriented: false },
            CouplingSpec::Fold { k, orientation, .. } => SourceLattice::Hypercubic {
                d: k,
                oriented: orientation == Orientation::Oriented,
            },
        }
    }

    pub fn source_kind(&self) -> Kind {
        match self {
            CouplingSpec::Triangular { .. } | CouplingSpec::EdgeSplit { .. } => Kind::Bond,
            CouplingSpec::VertexSplit { .. } | CouplingSpec::Fold { .. } => Kind::Site,
        }
    }

    /// `I_0`.
    pub fn initial_infected(&self) -> Vec<Vertex> {
        let dim = self.source().dim();
        match self {
            CouplingSpec::VertexSplit { .. } => vec![Vertex::origin(dim), Vertex::unit(dim, 0)],
            _ => vec![Vertex::origin(dim)],
        }
    }
}

/// Outcome of one coupled (or direct) run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingTrace {
    pub spec: CouplingSpec,
    pub replica: u64,
    pub final_infected: usize,
    /// Open cluster of the start images in the target lattice, restricted to
    /// elements the run sampled.
    pub image_cluster_size: usize,
    pub steps: usize,
    pub frozen: bool,
    pub capped: bool,
    pub violations: Violations,
    pub log: Vec<StepRecord>,
    #[serde(skip)]
    pub state: ExplorationState,
}

impl CouplingTrace {
    pub fn dominated(&self) -> bool {
        self.final_infected <= self.image_cluster_size
    }
}

fn resolution(outcome: EventOutcome, image: Option<Element>) -> Resolution {
    Resolution { outcome, image }
}

/// Runs the coupling for one replica of `master_seed`.
pub fn run_coupling(
    spec: &CouplingSpec,
    step_cap: usize,
    master_seed: u64,
    replica: u64,
    opts: RunOptions,
) -> Result<CouplingTrace, CouplingError> {
    spec.validate()?;
    if step_cap == 0 {
        return Err(CouplingError::ZeroStepCap);
    }
    let stream = Stream::new(master_seed, replica);
    let source = spec.source();
    let kind = spec.source_kind();
    let finish = |process_out: (LatticeView, ExplorationState, Vec<StepRecord>, Violations, bool, bool),
                  starts: Vec<Element>,
                  next: &dyn Fn(&Element) -> Vec<(Element, Element)>| {
        let (view, state, log, mut violations, frozen, capped) = process_out;
        let image_cluster_size = cached_cluster_size(&view, &starts, next);
        let final_infected = state.infected.len();
        if final_infected > image_cluster_size {
            violations.domination += 1;
        }
        CouplingTrace {
            spec: spec.clone(),
            replica,
            final_infected,
            image_cluster_size,
            steps: state.step,
            frozen,
            capped,
            violations,
            log,
            state,
        }
    };

    match *spec {
        CouplingSpec::Triangular { p } => {
            let z3 = ModelSpec::new(3, Kind::Bond, Orientation::NonOriented)?;
            let view = LatticeView::new(LatticeShape::Hypercubic(z3), Params::PerAxis(p.to_vec()), stream)?;
            let tau = DirectionMap::tau();
            let origin = Element::Site(Vertex::origin(3));
            let starts = vec![(Vertex::origin(2), origin.clone())];
            let resolve = |view: &mut LatticeView, img: &Element, s: Step, _: Option<usize>| {
                let x = img.base();
                let t = tau.apply(s);
                Ok(if view.is_open(&Element::Edge(EdgeId::hypercubic(x, t))) {
                    resolution(EventOutcome::landed(0, None), Some(Element::Site(x.step(t))))
                } else {
                    resolution(EventOutcome::failed(), None)
                })
            };
            let projection = |v: &Vertex, img: &Element| {
                let (v, x) = (v.coords(), img.base().coords());
                v[0] == x[0] + x[2] && v[1] == x[1] + x[2]
            };
            let out = drive(source, kind, view, starts, step_cap, opts, resolve, projection)?;
            Ok(finish(out, vec![origin], &|e| bond_neighbours(e, 3, false)))
        }
        CouplingSpec::EdgeSplit { d, p } => {
            let q = spec.split_parameter().expect("edge split has q");
            let view = LatticeView::new(
                LatticeShape::EdgeSplit { d },
                Params::SplitEdge { direct: p, split: q },
                stream,
            )?;
            let origin = Element::Site(Vertex::origin(d + 1));
            let starts = vec![(Vertex::origin(d), origin.clone())];
            let resolve = |view: &mut LatticeView, img: &Element, s: Step, _: Option<usize>| {
                let x = img.base();
                let outcome = sample_event_a(view, x, s, SplitContext::EdgeSplit)?;
                let image = landing_point(x, s, &outcome).map(Element::Site);
                Ok(resolution(outcome, image))
            };
            let projection = move |v: &Vertex, img: &Element| img.base().projected(d) == *v;
            let out = drive(source, kind, view, starts, step_cap, opts, resolve, projection)?;
            Ok(finish(out, vec![origin], &|e| edge_split_neighbours(e, d)))
        }
        CouplingSpec::VertexSplit { d, .. } => {
            let q = spec.split_parameter().expect("vertex split has q");
            let view = LatticeView::new(LatticeShape::VertexSplit { d }, Params::Homogeneous(q), stream)?;
            let x0 = Element::SplitSite(SplitVertexId::new(Vertex::origin(d + 1), 1, d)?);
            let x1 = Element::SplitSite(SplitVertexId::new(Vertex::unit(d + 1, 0), 1, d)?);
            let starts = vec![(Vertex::origin(d), x0.clone()), (Vertex::unit(d, 0), x1.clone())];
            let resolve = move |view: &mut LatticeView, img: &Element, s: Step, j: Option<usize>| {
                let x = img.base();
                let chain_copy = j.expect("site couplings pass j");
                let outcome = sample_event_a(view, x, s, SplitContext::VertexSplit { chain_copy })?;
                let image = match (landing_point(x, s, &outcome), outcome.landing_label) {
                    (Some(base), Some(label)) => {
                        Some(Element::SplitSite(SplitVertexId::new(base, label as usize, d)?))
                    }
                    _ => None,
                };
                Ok(resolution(outcome, image))
            };
            let projection = move |v: &Vertex, img: &Element| img.base().projected(d) == *v;
            let out = drive(source, kind, view, starts, step_cap, opts, resolve, projection)?;
            Ok(finish(out, vec![x0, x1], &|e| vertex_split_neighbours(e, d)))
        }
        CouplingSpec::Fold { d, k, p, orientation } => {
            let target = ModelSpec::new(d, Kind::Site, orientation)?;
            let view = LatticeView::hypercubic(target, p, stream)?;
            let partition = DirectionMap::partition(d, k)?;
            let origin = Element::Site(Vertex::origin(d));
            let starts = vec![(Vertex::origin(k), origin.clone())];
            let resolve = |view: &mut LatticeView, img: &Element, u: Step, _: Option<usize>| {
                let (outcome, site) = sample_event_b(view, img.base(), &partition.class(u))?;
                Ok(resolution(outcome, site.map(Element::Site)))
            };
            let projection = |v: &Vertex, img: &Element| {
                let x = img.base().coords();
                (0..k).all(|u| {
                    let class_sum: i32 = partition.class(Step::plus(u)).iter().map(|e| x[e.axis]).sum();
                    class_sum == v.coords()[u]
                })
            };
            let oriented = orientation == Orientation::Oriented;
            let out = drive(source, kind, view, starts, step_cap, opts, resolve, projection)?;
            Ok(finish(out, vec![origin], &|e| site_neighbours(e, d, oriented)))
        }
    }
}

type DriveOutput = (LatticeView, ExplorationState, Vec<StepRecord>, Violations, bool, bool);

#[allow(clippy::too_many_arguments)]
fn drive<R, P>(
    source: SourceLattice,
    kind: Kind,
    view: LatticeView,
    starts: Vec<(Vertex, Element)>,
    cap: usize,
    opts: RunOptions,
    resolve: R,
    projection: P,
) -> Result<DriveOutput, CouplingError>
where
    R: FnMut(&mut LatticeView, &Element, Step, Option<usize>) -> Result<Resolution, CouplingError>,
    P: Fn(&Vertex, &Element) -> bool,
{
    let mut process = Process::new(source, kind, view, starts, cap, opts, resolve, projection);
    let (frozen, capped) = process.run()?;
    Ok((process.view, process.state, process.log, process.violations, frozen, capped))
}

fn bond_neighbours(node: &Element, d: usize, oriented: bool) -> Vec<(Element, Element)> {
    let x = node.base();
    hypercubic_steps(d, oriented)
        .into_iter()
        .map(|s| (Element::Site(x.step(s)), Element::Edge(EdgeId::hypercubic(x, s))))
        .collect()
}

fn edge_split_neighbours(node: &Element, d: usize) -> Vec<(Element, Element)> {
    let x = node.base();
    let mut out = bond_neighbours(node, d + 1, true);
    out.truncate(d);
    let up = Element::Site(x.shifted(d, 1));
    for label in 0..d {
        let copy = SplitEdgeId {
            base: x.clone(),
            label: label as u8,
        };
        out.push((up.clone(), Element::SplitEdge(copy)));
    }
    out
}

fn vertex_split_neighbours(node: &Element, d: usize) -> Vec<(Element, Element)> {
    let x = node.base();
    let mut out = Vec::with_capacity(2 * (d + 1) * (2 * d - 1));
    for s in hypercubic_steps(d + 1, false) {
        let base = x.step(s);
        for copy in 1..=2 * d - 1 {
            let n = Element::SplitSite(SplitVertexId {
                base: base.clone(),
                index: copy as u8,
            });
            out.push((n.clone(), n));
        }
    }
    out
}

fn site_neighbours(node: &Element, d: usize, oriented: bool) -> Vec<(Element, Element)> {
    let x = node.base();
    hypercubic_steps(d, oriented)
        .into_iter()
        .map(|s| {
            let n = Element::Site(x.step(s));
            (n.clone(), n)
        })
        .collect()
}

/// Runs the source model alone, with the event probability as its
/// parameter, under the same ordering, start set and cap as the coupling.
/// Uses a stream independent of the coupled one.
pub fn run_direct(
    spec: &CouplingSpec,
    step_cap: usize,
    master_seed: u64,
    replica: u64,
    opts: RunOptions,
) -> Result<CouplingTrace, CouplingError> {
    spec.validate()?;
    if step_cap == 0 {
        return Err(CouplingError::ZeroStepCap);
    }
    let stream = Stream::derive(master_seed, DIRECT_PURPOSE, replica);
    let source = spec.source();
    let kind = spec.source_kind();
    let (shape, params) = match *spec {
        CouplingSpec::Triangular { p } => (LatticeShape::Triangular, Params::PerAxis(p.to_vec())),
        _ => {
            let model = ModelSpec {
                d: source.dim(),
                kind,
                orientation: if matches!(source, SourceLattice::Hypercubic { oriented: true, .. }) {
                    Orientation::Oriented
                } else {
                    Orientation::NonOriented
                },
            };
            let p = spec.event_probability().expect("split and fold couplings have events");
            (LatticeShape::Hypercubic(model), Params::Homogeneous(p))
        }
    };
    let view = LatticeView::new(shape, params, stream)?;
    let starts = spec
        .initial_infected()
        .into_iter()
        .map(|v| (v.clone(), Element::Site(v)))
        .collect();
    let resolve = |view: &mut LatticeView, img: &Element, s: Step, _: Option<usize>| {
        let v = img.base();
        let w = source.step(v, s);
        let gate = match kind {
            Kind::Bond => source.edge(v, s),
            Kind::Site => Element::Site(w.clone()),
        };
        Ok(if view.is_open(&gate) {
            resolution(EventOutcome::landed(0, None), Some(Element::Site(w)))
        } else {
            resolution(EventOutcome::failed(), None)
        })
    };
    let identity = |v: &Vertex, img: &Element| img.base() == v;
    let (_, state, log, violations, frozen, capped) =
        drive(source, kind, view, starts, step_cap, opts, resolve, identity)?;
    Ok(CouplingTrace {
        spec: spec.clone(),
        replica,
        final_infected: state.infected.len(),
        image_cluster_size: state.infected.len(),
        steps: state.step,
        frozen,
        capped,
        violations,
        log,
        state,
    })
}

pub fn run_triangular_coupling(
    p1: f64,
    p2: f64,
    p3: f64,
    step_cap: usize,
    master_seed: u64,
) -> Result<CouplingTrace, CouplingError> {
    let spec = CouplingSpec::Triangular { p: [p1, p2, p3] };
    run_coupling(&spec, step_cap, master_seed, 0, RunOptions::default())
}

pub fn run_oriented_edge_split_coupling(
    d: usize,
    p: f64,
    step_cap: usize,
    master_seed: u64,
) -> Result<CouplingTrace, CouplingError> {
    run_coupling(&CouplingSpec::EdgeSplit { d, p }, step_cap, master_seed, 0, RunOptions::default())
}

pub fn run_site_vertex_split_coupling(
    d: usize,
    p: f64,
    step_cap: usize,
    master_seed: u64,
) -> Result<CouplingTrace, CouplingError> {
    run_coupling(&CouplingSpec::VertexSplit { d, p }, step_cap, master_seed, 0, RunOptions::default())
}

pub fn run_dimension_fold_coupling(
    d: usize,
    k: usize,
    p: f64,
    orientation: Orientation,
    step_cap: usize,
    master_seed: u64,
) -> Result<CouplingTrace, CouplingError> {
    let spec = CouplingSpec::Fold { d, k, p, orientation };
    run_coupling(&spec, step_cap, master_seed, 0, RunOptions::default())
}
