use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::stream::Stream;
use super::SimError;
use crate::lattice::Element;
use crate::model::ModelSpec;

/// The graph a view samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "lattice")]
pub enum LatticeShape {
    Hypercubic(ModelSpec),
    /// Bond percolation on `T`.
    Triangular,
    /// `Z^{d+1}_E`: `d` labelled copies of every edge parallel to `u_{d+1}`.
    EdgeSplit { d: usize },
    /// `Z^{d+1}_V`: `2d - 1` copies of every vertex.
    VertexSplit { d: usize },
}

/// Open probabilities per element class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Params {
    Homogeneous(f64),
    /// Edges parallel to axis `i` are open with probability `probs[i]`.
    PerAxis(Vec<f64>),
    /// Ordinary edges with `direct`, split copies with `split`.
    SplitEdge { direct: f64, split: f64 },
}

impl Params {
    fn values(&self) -> Vec<f64> {
        match self {
            Params::Homogeneous(p) => vec![*p],
            Params::PerAxis(ps) => ps.clone(),
            Params::SplitEdge { direct, split } => vec![*direct, *split],
        }
    }
}

pub fn check_probability(p: f64) -> Result<f64, SimError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(SimError::InvalidProbability(p))
    }
}

/// Lazily sampled Bernoulli configuration. Each element is drawn from the
/// counter-based stream the first time it is queried and memoized; the cache
/// doubles as the record of the explored region.
#[derive(Debug, Clone)]
pub struct LatticeView {
    shape: LatticeShape,
    params: Params,
    stream: Stream,
    cache: FxHashMap<Element, bool>,
}

impl LatticeView {
    pub fn new(shape: LatticeShape, params: Params, stream: Stream) -> Result<Self, SimError> {
        for p in params.values() {
            check_probability(p)?;
        }
        if let Params::PerAxis(ps) = &params {
            let axes = match shape {
                LatticeShape::Hypercubic(m) => m.d,
                LatticeShape::Triangular => 3,
                LatticeShape::EdgeSplit { d } | LatticeShape::VertexSplit { d } => d + 1,
            };
            if ps.len() != axes {
                return Err(SimError::ParameterShape {
                    expected: axes,
                    got: ps.len(),
                });
            }
        }
        Ok(LatticeView {
            shape,
            params,
            stream,
            cache: FxHashMap::default(),
        })
    }

    pub fn hypercubic(model: ModelSpec, p: f64, stream: Stream) -> Result<Self, SimError> {
        LatticeView::new(LatticeShape::Hypercubic(model), Params::Homogeneous(p), stream)
    }

    pub fn shape(&self) -> LatticeShape {
        self.shape
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn stream(&self) -> Stream {
        self.stream
    }

    pub fn probability(&self, item: &Element) -> f64 {
        match &self.params {
            Params::Homogeneous(p) => *p,
            Params::PerAxis(ps) => match item {
                Element::Edge(e) => ps[e.axis as usize],
                _ => ps[0],
            },
            Params::SplitEdge { direct, split } => match item {
                Element::SplitEdge(_) => *split,
                _ => *direct,
            },
        }
    }

    pub fn is_open(&mut self, item: &Element) -> bool {
        if let Some(&state) = self.cache.get(item) {
            return state;
        }
        let state = self.stream.uniform(item) < self.probability(item);
        self.cache.insert(item.clone(), state);
        state
    }

    /// The memoized state, if the element has been sampled.
    pub fn state(&self, item: &Element) -> Option<bool> {
        self.cache.get(item).copied()
    }

    pub fn sampled(&self) -> usize {
        self.cache.len()
    }

    #[cfg(test)]
    pub(crate) fn force_state(&mut self, item: Element, state: bool) {
        self.cache.insert(item, state);
    }

    pub fn sampled_elements(&self) -> impl Iterator<Item = (&Element, bool)> {
        self.cache.iter().map(|(e, &s)| (e, s))
    }
}
