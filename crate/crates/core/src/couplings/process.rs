//! The step-by-step exploration shared by all couplings: a source lattice,
//! an infected set with its image map, removed and susceptible items, and a
//! resolver that decides each attempt in the target lattice.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use super::{CouplingError, EventOutcome};
use crate::lattice::{
    canonical_order_key, hypercubic_steps, triangular_move, triangular_steps, EdgeId, Element,
    OrderKey, Step, Vertex,
};
use crate::mc::LatticeView;
use crate::model::Kind;

/// The lattice the infection spreads on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "lattice")]
pub enum SourceLattice {
    Triangular,
    Hypercubic { d: usize, oriented: bool },
}

impl SourceLattice {
    pub fn dim(&self) -> usize {
        match self {
            SourceLattice::Triangular => 2,
            SourceLattice::Hypercubic { d, .. } => *d,
        }
    }

    /// Directions an infection may travel in.
    pub fn out_steps(&self) -> Vec<Step> {
        match *self {
            SourceLattice::Triangular => triangular_steps().to_vec(),
            SourceLattice::Hypercubic { d, oriented } => hypercubic_steps(d, oriented),
        }
    }

    fn all_steps(&self) -> Vec<Step> {
        match *self {
            SourceLattice::Triangular => triangular_steps().to_vec(),
            SourceLattice::Hypercubic { d, .. } => hypercubic_steps(d, false),
        }
    }

    pub fn step(&self, v: &Vertex, s: Step) -> Vertex {
        match self {
            SourceLattice::Triangular => triangular_move(v, s),
            SourceLattice::Hypercubic { .. } => v.step(s),
        }
    }

    pub fn edge(&self, v: &Vertex, s: Step) -> Element {
        match self {
            SourceLattice::Triangular => Element::Edge(EdgeId::triangular(v, s)),
            SourceLattice::Hypercubic { .. } => Element::Edge(EdgeId::hypercubic(v, s)),
        }
    }
}

/// A frontier item: an edge `<from, target>` or a site `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Susceptible {
    pub item: Element,
    pub target: Vertex,
    /// Infected endpoint and direction, for edges.
    pub from: Option<(Vertex, Step)>,
}

/// `(I_n, x(I_n), R_n, S_n)` and the step counter.
#[derive(Debug, Clone, Default)]
pub struct ExplorationState {
    /// Infected vertices in infection order.
    pub infected: Vec<Vertex>,
    pub image: FxHashMap<Vertex, Element>,
    /// Removed edges (bond) or vertices (site).
    pub removed: FxHashSet<Element>,
    pub susceptible: BTreeMap<OrderKey, Susceptible>,
    pub step: usize,
}

impl ExplorationState {
    /// `S_n` rebuilt from `I_n` and `R_n` alone.
    pub fn recompute_susceptible(&self, source: SourceLattice, kind: Kind) -> BTreeSet<OrderKey> {
        let mut out = BTreeSet::new();
        for v in &self.infected {
            for s in source.out_steps() {
                let w = source.step(v, s);
                if self.image.contains_key(&w) {
                    continue;
                }
                let item = match kind {
                    Kind::Bond => source.edge(v, s),
                    Kind::Site => Element::Site(w),
                };
                if !self.removed.contains(&item) {
                    out.insert(canonical_order_key(&item));
                }
            }
        }
        out
    }

    pub fn frontier_consistent(&self, source: SourceLattice, kind: Kind) -> bool {
        self.recompute_susceptible(source, kind)
            .iter()
            .eq(self.susceptible.keys())
    }
}

/// One resolved frontier item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    /// `g_n` (bond) or `a_n` (site).
    pub item: Element,
    /// The infected vertex the attempt was made from.
    pub source: Vertex,
    pub target: Vertex,
    /// Number of susceptible neighbours of `source` (site couplings).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub j: Option<u8>,
    pub event: EventOutcome,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub image: Option<Element>,
    pub infected_size: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    pub injectivity: usize,
    pub projection: usize,
    pub frontier: usize,
    /// Infected set larger than the image cluster.
    pub domination: usize,
}

impl Violations {
    pub fn total(&self) -> usize {
        self.injectivity + self.projection + self.frontier + self.domination
    }

    pub fn add(&mut self, other: &Violations) {
        self.injectivity += other.injectivity;
        self.projection += other.projection;
        self.frontier += other.frontier;
        self.domination += other.domination;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub record_log: bool,
    /// Recompute `S_n` after every step; quadratic in the run length.
    pub check_frontier: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            record_log: true,
            check_frontier: false,
        }
    }
}

pub(crate) struct Resolution {
    pub outcome: EventOutcome,
    pub image: Option<Element>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Advance {
    Stepped,
    Frozen,
    Capped,
}

/// `resolve(view, x(v), u, j)` decides the attempt from `v` in direction
/// `u`; `projection(v, x(v))` is the identity that makes `x` injective.
pub(crate) struct Process<R, P> {
    source: SourceLattice,
    kind: Kind,
    out_steps: Vec<Step>,
    all_steps: Vec<Step>,
    cap: usize,
    opts: RunOptions,
    pub view: LatticeView,
    pub state: ExplorationState,
    images: FxHashSet<Element>,
    pub log: Vec<StepRecord>,
    pub violations: Violations,
    resolve: R,
    projection: P,
}

impl<R, P> Process<R, P>
where
    R: FnMut(&mut LatticeView, &Element, Step, Option<usize>) -> Result<Resolution, CouplingError>,
    P: Fn(&Vertex, &Element) -> bool,
{
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        source: SourceLattice,
        kind: Kind,
        view: LatticeView,
        starts: Vec<(Vertex, Element)>,
        cap: usize,
        opts: RunOptions,
        resolve: R,
        projection: P,
    ) -> Self {
        let mut process = Process {
            source,
            kind,
            out_steps: source.out_steps(),
            all_steps: source.all_steps(),
            cap,
            opts,
            view,
            state: ExplorationState::default(),
            images: FxHashSet::default(),
            log: Vec::new(),
            violations: Violations::default(),
            resolve,
            projection,
        };
        for (v, img) in starts {
            process.infect(v, img);
        }
        process
    }

    fn infect(&mut self, w: Vertex, img: Element) {
        if !self.images.insert(img.clone()) {
            self.violations.injectivity += 1;
        }
        if !(self.projection)(&w, &img) {
            self.violations.projection += 1;
        }
        let st = &mut self.state;
        match self.kind {
            Kind::Bond => {
                for &s in &self.all_steps {
                    st.susceptible
                        .remove(&canonical_order_key(&self.source.edge(&w, s)));
                }
            }
            Kind::Site => {
                st.susceptible
                    .remove(&canonical_order_key(&Element::Site(w.clone())));
            }
        }
        st.image.insert(w.clone(), img);
        st.infected.push(w.clone());
        for &s in &self.out_steps {
            let n = self.source.step(&w, s);
            if st.image.contains_key(&n) {
                continue;
            }
            let (item, from) = match self.kind {
                Kind::Bond => (self.source.edge(&w, s), Some((w.clone(), s))),
                Kind::Site => (Element::Site(n.clone()), None),
            };
            if st.removed.contains(&item) {
                continue;
            }
            st.susceptible
                .entry(canonical_order_key(&item))
                .or_insert(Susceptible {
                    item,
                    target: n,
                    from,
                });
        }
    }

    pub fn step(&mut self) -> Result<Advance, CouplingError> {
        if self.state.infected.len() >= self.cap {
            return Ok(Advance::Capped);
        }
        let Some((_, next)) = self.state.susceptible.first_key_value() else {
            return Ok(Advance::Frozen);
        };
        let next = next.clone();
        let (v, s, j) = match &next.from {
            Some((v, s)) => (v.clone(), *s, None),
            None => {
                let (v, s) = self.site_parent(&next.target);
                let j = self.susceptible_neighbours(&v);
                (v, s, Some(j))
            }
        };
        self.state.susceptible.pop_first();
        let img_v = self.state.image[&v].clone();
        let res = (self.resolve)(&mut self.view, &img_v, s, j)?;
        match (self.kind, &res.image) {
            (_, Some(img)) if res.outcome.occurred => {
                if self.kind == Kind::Bond {
                    self.state.removed.insert(next.item.clone());
                }
                self.infect(next.target.clone(), img.clone());
            }
            _ => {
                self.state.removed.insert(next.item.clone());
            }
        }
        self.state.step += 1;
        if self.opts.record_log {
            self.log.push(StepRecord {
                n: self.state.step - 1,
                item: next.item,
                source: v,
                target: next.target,
                j: j.map(|j| j as u8),
                event: res.outcome,
                image: res.image,
                infected_size: self.state.infected.len(),
            });
        }
        if self.opts.check_frontier && !self.state.frontier_consistent(self.source, self.kind) {
            self.violations.frontier += 1;
        }
        Ok(Advance::Stepped)
    }

    /// Smallest infected vertex `v` with `a = v + u` for an allowed `u`.
    fn site_parent(&self, a: &Vertex) -> (Vertex, Step) {
        self.out_steps
            .iter()
            .filter_map(|&s| {
                let v = self.source.step(a, -s);
                self.state.image.contains_key(&v).then_some((v, s))
            })
            .min_by_key(|(v, _)| canonical_order_key(&Element::Site(v.clone())))
            .expect("a susceptible site has an infected neighbour")
    }

    fn susceptible_neighbours(&self, v: &Vertex) -> usize {
        self.out_steps
            .iter()
            .filter(|&&s| {
                let key = canonical_order_key(&Element::Site(self.source.step(v, s)));
                self.state.susceptible.contains_key(&key)
            })
            .count()
    }

    /// Steps until frozen or capped; returns `(frozen, capped)`.
    pub fn run(&mut self) -> Result<(bool, bool), CouplingError> {
        loop {
            match self.step()? {
                Advance::Stepped => {}
                Advance::Frozen => return Ok((true, false)),
                Advance::Capped => return Ok((false, true)),
            }
        }
    }
}

/// Size of the open cluster of `starts` using only elements already sampled
/// in `view`; `next(node)` lists `(neighbour, element that must be open)`.
pub(crate) fn cached_cluster_size<F>(view: &LatticeView, starts: &[Element], next: F) -> usize
where
    F: Fn(&Element) -> Vec<(Element, Element)>,
{
    let mut seen: FxHashSet<Element> = starts.iter().cloned().collect();
    let mut queue: VecDeque<Element> = seen.iter().cloned().collect();
    while let Some(node) = queue.pop_front() {
        for (n, gate) in next(&node) {
            if !seen.contains(&n) && view.state(&gate) == Some(true) {
                seen.insert(n.clone());
                queue.push_back(n);
            }
        }
    }
    seen.len()
}
