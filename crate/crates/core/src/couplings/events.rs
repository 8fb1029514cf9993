//! The events that decide whether an infection attempt succeeds in the
//! split and folded lattices.

use serde::{Deserialize, Serialize};

use super::{CouplingError, EventOutcome};
use crate::lattice::{EdgeId, Element, SplitEdgeId, SplitVertexId, Step, Vertex};
use crate::mc::{LatticeShape, LatticeView};

/// Longest escalation chain walked before giving up.
pub const K_CAP: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "split")]
pub enum SplitContext {
    /// Climb along the split copies labelled by the direction.
    EdgeSplit,
    /// Climb along copy `chain_copy` of the vertices above the anchor.
    VertexSplit { chain_copy: usize },
}

/// `anchor + k u_{d+1} + sigma(direction)` for an occurred event.
pub fn landing_point(anchor: &Vertex, direction: Step, outcome: &EventOutcome) -> Option<Vertex> {
    let k = outcome.landing_k?;
    let top = anchor.dim() - 1;
    Some(anchor.shifted(top, k as i32).step(direction))
}

/// Walks `k = 0, 1, ...` up the last axis from `anchor`, succeeding at the
/// first level where the move along `sigma(direction)` is open and failing
/// as soon as the climbing element is closed.
///
/// Edge split: at level `k` test `<pos, pos + sigma(e)>`, then the split
/// copy of `<pos, pos + u_{d+1}>` labelled `e`. Vertex split: test copies
/// `1..=2d-1` of `pos + sigma(e)` in order (first open wins), then copy
/// `chain_copy` of `pos + u_{d+1}`.
pub fn sample_event_a(
    view: &mut LatticeView,
    anchor: &Vertex,
    direction: Step,
    context: SplitContext,
) -> Result<EventOutcome, CouplingError> {
    let d = match (view.shape(), context) {
        (LatticeShape::EdgeSplit { d }, SplitContext::EdgeSplit) => d,
        (LatticeShape::VertexSplit { d }, SplitContext::VertexSplit { .. }) => d,
        _ => return Err(CouplingError::WrongView),
    };
    anchor.check_dim(d + 1)?;
    if direction.axis >= d {
        return Err(CouplingError::Direction(format!("{direction:?}")));
    }
    let mut pos = anchor.clone();
    match context {
        SplitContext::EdgeSplit => {
            if !direction.positive {
                return Err(CouplingError::Direction(format!("{direction:?}")));
            }
            for k in 0..K_CAP {
                if view.is_open(&Element::Edge(EdgeId::new(pos.clone(), direction.axis))) {
                    return Ok(EventOutcome::landed(k, None));
                }
                let climb = SplitEdgeId {
                    base: pos.clone(),
                    label: direction.axis as u8,
                };
                if !view.is_open(&Element::SplitEdge(climb)) {
                    return Ok(EventOutcome::failed());
                }
                pos = pos.shifted(d, 1);
            }
        }
        SplitContext::VertexSplit { chain_copy } => {
            let chain_copy = SplitVertexId::new(anchor.clone(), chain_copy, d)?.index as usize;
            for k in 0..K_CAP {
                let side = pos.step(direction);
                for copy in 1..=2 * d - 1 {
                    let id = SplitVertexId::new(side.clone(), copy, d)?;
                    if view.is_open(&Element::SplitSite(id)) {
                        return Ok(EventOutcome::landed(k, Some(copy as u8)));
                    }
                }
                pos = pos.shifted(d, 1);
                let climb = SplitVertexId::new(pos.clone(), chain_copy, d)?;
                if !view.is_open(&Element::SplitSite(climb)) {
                    return Ok(EventOutcome::failed());
                }
            }
        }
    }
    Err(CouplingError::KCapReached(K_CAP))
}

/// Occurs when some `anchor + e`, `e` in `class`, is open; lands on the
/// first such site in the order given. The label is the 1-based position of
/// `e` in `class`.
pub fn sample_event_b(
    view: &mut LatticeView,
    anchor: &Vertex,
    class: &[Step],
) -> Result<(EventOutcome, Option<Vertex>), CouplingError> {
    match view.shape() {
        LatticeShape::Hypercubic(m) => anchor.check_dim(m.d)?,
        _ => return Err(CouplingError::WrongView),
    }
    for (i, &e) in class.iter().enumerate() {
        let site = anchor.step(e);
        if view.is_open(&Element::Site(site.clone())) {
            return Ok((EventOutcome::landed(0, Some(i as u8 + 1)), Some(site)));
        }
    }
    Ok((EventOutcome::failed(), None))
}
