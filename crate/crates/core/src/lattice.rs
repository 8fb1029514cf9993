//! Coordinates, adjacency and direction bookkeeping for the lattices used by
//! the bounds and couplings: `Z^d`, the triangular lattice `T`, the
//! edge-split multigraph `Z^{d+1}_E` and the vertex-split graph `Z^{d+1}_V`.
//!
//! Nothing here is ever materialized; adjacency is computed on demand.

use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::model::ModelSpec;

pub type Coords = SmallVec<[i32; 8]>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{k} does not divide {d}")]
    NotADivisor { d: usize, k: usize },
    #[error("split index {index} outside 1..={max}")]
    SplitIndexOutOfRange { index: usize, max: usize },
}

/// A point of an integer lattice.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex {
    coords: Coords,
}

impl Vertex {
    pub fn new<I: IntoIterator<Item = i32>>(coords: I) -> Self {
        Vertex {
            coords: coords.into_iter().collect(),
        }
    }

    pub fn origin(dim: usize) -> Self {
        Vertex {
            coords: smallvec::smallvec![0; dim],
        }
    }

    /// The positive unit vector along `axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        Vertex::origin(dim).shifted(axis, 1)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords
    }

    pub fn l1_norm(&self) -> u64 {
        self.coords.iter().map(|c| c.unsigned_abs() as u64).sum()
    }

    pub fn linf_norm(&self) -> u32 {
        self.coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn shifted(&self, axis: usize, delta: i32) -> Vertex {
        let mut out = self.clone();
        out.coords[axis] += delta;
        out
    }

    /// Unit move in the hypercubic lattice.
    pub fn step(&self, s: Step) -> Vertex {
        self.shifted(s.axis, s.sign())
    }

    pub fn plus(&self, other: &Vertex) -> Vertex {
        debug_assert_eq!(self.dim(), other.dim());
        Vertex::new(self.coords.iter().zip(&other.coords).map(|(a, b)| a + b))
    }

    /// First `dim` coordinates.
    pub fn projected(&self, dim: usize) -> Vertex {
        Vertex::new(self.coords[..dim].iter().copied())
    }

    /// Appends one trailing coordinate.
    pub fn extended(&self, last: i32) -> Vertex {
        let mut out = self.clone();
        out.coords.push(last);
        out
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<(), LatticeError> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(LatticeError::DimensionMismatch {
                expected,
                got: self.dim(),
            })
        }
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords.as_slice())
    }
}

/// A signed unit direction: `+e_axis` or `-e_axis`.
///
/// On the triangular lattice the three axes stand for `(1,0)`, `(0,1)` and
/// `(1,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Step {
    pub axis: usize,
    pub positive: bool,
}

impl Step {
    pub fn plus(axis: usize) -> Step {
        Step {
            axis,
            positive: true,
        }
    }

    pub fn minus(axis: usize) -> Step {
        Step {
            axis,
            positive: false,
        }
    }

    pub fn sign(self) -> i32 {
        if self.positive {
            1
        } else {
            -1
        }
    }
}

impl Neg for Step {
    type Output = Step;
    fn neg(self) -> Step {
        Step {
            axis: self.axis,
            positive: !self.positive,
        }
    }
}

/// Steps of `Z^d` in canonical order: by axis, `+` before `-`. Oriented
/// lattices only have the forward steps.
pub fn hypercubic_steps(d: usize, oriented: bool) -> Vec<Step> {
    let mut out = Vec::with_capacity(2 * d);
    for axis in 0..d {
        out.push(Step::plus(axis));
        if !oriented {
            out.push(Step::minus(axis));
        }
    }
    out
}

pub fn neighbors(model: &ModelSpec, v: &Vertex) -> Result<Vec<Vertex>, LatticeError> {
    v.check_dim(model.d)?;
    Ok(hypercubic_steps(model.d, model.is_oriented())
        .into_iter()
        .map(|s| v.step(s))
        .collect())
}

/// Positive offsets of the three edge classes of `T`.
pub const TRIANGULAR_AXES: [[i32; 2]; 3] = [[1, 0], [0, 1], [1, 1]];

pub fn triangular_steps() -> [Step; 6] {
    [
        Step::plus(0),
        Step::minus(0),
        Step::plus(1),
        Step::minus(1),
        Step::plus(2),
        Step::minus(2),
    ]
}

pub fn triangular_move(v: &Vertex, s: Step) -> Vertex {
    let [dx, dy] = TRIANGULAR_AXES[s.axis];
    let sign = s.sign();
    Vertex::new([v.coords[0] + sign * dx, v.coords[1] + sign * dy])
}

pub fn triangular_neighbors(v: &Vertex) -> Result<Vec<Vertex>, LatticeError> {
    v.check_dim(2)?;
    Ok(triangular_steps()
        .into_iter()
        .map(|s| triangular_move(v, s))
        .collect())
}

/// An edge `<base, base + axis offset>`; the offset is the unit vector in
/// `Z^d` and the `TRIANGULAR_AXES` entry in `T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId {
    pub base: Vertex,
    pub axis: u8,
}

impl EdgeId {
    pub fn new(base: Vertex, axis: usize) -> EdgeId {
        EdgeId {
            base,
            axis: axis as u8,
        }
    }

    /// The hypercubic edge traversed by stepping `s` from `from`.
    pub fn hypercubic(from: &Vertex, s: Step) -> EdgeId {
        if s.positive {
            EdgeId::new(from.clone(), s.axis)
        } else {
            EdgeId::new(from.step(s), s.axis)
        }
    }

    /// The triangular-lattice edge traversed by stepping `s` from `from`.
    pub fn triangular(from: &Vertex, s: Step) -> EdgeId {
        if s.positive {
            EdgeId::new(from.clone(), s.axis)
        } else {
            EdgeId::new(triangular_move(from, s), s.axis)
        }
    }
}

/// One of the `d` parallel copies of `<base, base + u_{d+1}>` in `Z^{d+1}_E`;
/// `label` is the zero-based index of the `e_i` it is indexed by.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SplitEdgeId {
    pub base: Vertex,
    pub label: u8,
}

/// Copy `index` (1-based, at most `2d-1`) of a vertex of `Z^{d+1}_V`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SplitVertexId {
    pub base: Vertex,
    pub index: u8,
}

impl SplitVertexId {
    /// `d` is the dimension of the source lattice; the split graph lives in
    /// dimension `d + 1` with `2d - 1` copies per vertex.
    pub fn new(base: Vertex, index: usize, d: usize) -> Result<Self, LatticeError> {
        base.check_dim(d + 1)?;
        let max = 2 * d - 1;
        if index == 0 || index > max {
            return Err(LatticeError::SplitIndexOutOfRange { index, max });
        }
        Ok(SplitVertexId {
            base,
            index: index as u8,
        })
    }
}

/// Anything that carries its own Bernoulli variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    Site(Vertex),
    Edge(EdgeId),
    SplitEdge(SplitEdgeId),
    SplitSite(SplitVertexId),
}

impl Element {
    pub fn base(&self) -> &Vertex {
        match self {
            Element::Site(v) => v,
            Element::Edge(e) => &e.base,
            Element::SplitEdge(e) => &e.base,
            Element::SplitSite(s) => &s.base,
        }
    }
}

/// Sort key: L1 distance of the base vertex, then its coordinates, then the
/// direction index, then the split label/index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderKey {
    distance: u64,
    coords: Coords,
    direction: u32,
    label: u32,
}

pub fn canonical_order_key(item: &Element) -> OrderKey {
    let base = item.base();
    let (direction, label) = match item {
        Element::Site(_) => (0, 0),
        Element::Edge(e) => (e.axis as u32, 0),
        Element::SplitEdge(e) => (base.dim().saturating_sub(1) as u32, e.label as u32 + 1),
        Element::SplitSite(s) => (0, s.index as u32),
    };
    OrderKey {
        distance: base.l1_norm(),
        coords: base.coords.clone(),
        direction,
        label,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectionMapKind {
    Tau,
    Sigma,
    Partition,
}

/// Sends source directions to target directions, sign preserved.
///
/// `assignment[i]` is the target axis of the positive source axis `i`, so
/// every map is odd by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionMap {
    pub kind: DirectionMapKind,
    pub source_dim: usize,
    pub target_dim: usize,
    assignment: Vec<usize>,
}

impl DirectionMap {
    /// `T -> Z^3`: `(1,0) -> e1`, `(0,1) -> e2`, `(1,1) -> e3`.
    pub fn tau() -> Self {
        DirectionMap {
            kind: DirectionMapKind::Tau,
            source_dim: 2,
            target_dim: 3,
            assignment: vec![0, 1, 2],
        }
    }

    /// `Z^d -> Z^{d+1}`: `e_i -> u_i`.
    pub fn sigma(d: usize) -> Self {
        DirectionMap {
            kind: DirectionMapKind::Sigma,
            source_dim: d,
            target_dim: d + 1,
            assignment: (0..d).collect(),
        }
    }

    /// Uniform partition of the `d` directions of `Z^d` into `k` consecutive
    /// blocks `D_{u_1}, ..., D_{u_k}` of size `d/k`. The map goes from `Z^d`
    /// (source) to the class label in `Z^k` (target).
    pub fn partition(d: usize, k: usize) -> Result<Self, LatticeError> {
        if k == 0 || !d.is_multiple_of(k) {
            return Err(LatticeError::NotADivisor { d, k });
        }
        let block = d / k;
        Ok(DirectionMap {
            kind: DirectionMapKind::Partition,
            source_dim: d,
            target_dim: k,
            assignment: (0..d).map(|i| i / block).collect(),
        })
    }

    pub fn source_axes(&self) -> usize {
        self.assignment.len()
    }

    pub fn apply(&self, s: Step) -> Step {
        Step {
            axis: self.assignment[s.axis],
            positive: s.positive,
        }
    }

    /// Preimage of a target direction, in increasing axis order. For the
    /// partition map this is `D_u` (and `D_{-u} = -D_u`).
    pub fn class(&self, target: Step) -> Vec<Step> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &t)| t == target.axis)
            .map(|(i, _)| Step {
                axis: i,
                positive: target.positive,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Kind, Orientation};
    use proptest::prelude::*;

    fn v(c: &[i32]) -> Vertex {
        Vertex::new(c.iter().copied())
    }

    #[test]
    fn square_lattice_neighbors_in_canonical_order() {
        let m = ModelSpec::new(2, Kind::Bond, Orientation::NonOriented).unwrap();
        let n = neighbors(&m, &Vertex::origin(2)).unwrap();
        assert_eq!(n, vec![v(&[1, 0]), v(&[-1, 0]), v(&[0, 1]), v(&[0, -1])]);
    }

    #[test]
    fn oriented_neighbors_are_forward() {
        let m = ModelSpec::new(3, Kind::Bond, Orientation::Oriented).unwrap();
        assert_eq!(
            neighbors(&m, &Vertex::origin(3)).unwrap(),
            vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])]
        );
        assert_eq!(
            neighbors(&m, &v(&[1, 2, 0])).unwrap(),
            vec![v(&[2, 2, 0]), v(&[1, 3, 0]), v(&[1, 2, 1])]
        );
    }

    #[test]
    fn neighbors_reject_wrong_dimension() {
        let m = ModelSpec::new(3, Kind::Site, Orientation::NonOriented).unwrap();
        assert_eq!(
            neighbors(&m, &Vertex::origin(2)),
            Err(LatticeError::DimensionMismatch {
                expected: 3,
                got: 2
            })
        );
        assert!(triangular_neighbors(&Vertex::origin(3)).is_err());
    }

    #[test]
    fn neighborhood_sizes() {
        for d in 2..7 {
            let no = ModelSpec::new(d, Kind::Bond, Orientation::NonOriented).unwrap();
            let o = ModelSpec::new(d, Kind::Bond, Orientation::Oriented).unwrap();
            let x = Vertex::new((0..d as i32).map(|i| i * 3 - 2));
            assert_eq!(neighbors(&no, &x).unwrap().len(), 2 * d);
            assert_eq!(neighbors(&o, &x).unwrap().len(), d);
        }
    }

    #[test]
    fn triangular_lattice_is_six_regular() {
        let n = triangular_neighbors(&Vertex::origin(2)).unwrap();
        assert_eq!(n.len(), 6);
        assert!(n.contains(&v(&[1, 1])) && n.contains(&v(&[-1, -1])));
        assert!(triangular_neighbors(&v(&[2, 3])).unwrap().contains(&v(&[3, 4])));
        for x in -3..3 {
            for y in -3..3 {
                let mut n = triangular_neighbors(&v(&[x, y])).unwrap();
                n.sort();
                n.dedup();
                assert_eq!(n.len(), 6);
            }
        }
    }

    #[test]
    fn edge_ids_are_undirected() {
        let a = v(&[0, 0]);
        let b = v(&[1, 1]);
        assert_eq!(
            EdgeId::triangular(&a, Step::plus(2)),
            EdgeId::triangular(&b, Step::minus(2))
        );
        let c = v(&[0, 0, 1]);
        assert_eq!(
            EdgeId::hypercubic(&Vertex::origin(3), Step::plus(2)),
            EdgeId::hypercubic(&c, Step::minus(2))
        );
    }

    #[test]
    fn order_key_examples() {
        let o = Vertex::origin(2);
        let k = |e: EdgeId| canonical_order_key(&Element::Edge(e));
        assert!(k(EdgeId::new(o.clone(), 0)) < k(EdgeId::new(v(&[1, 0]), 0)));
        assert!(k(EdgeId::new(o.clone(), 0)) < k(EdgeId::new(o.clone(), 2)));
        let mut keys: Vec<_> = triangular_steps()
            .into_iter()
            .map(|s| k(EdgeId::triangular(&o, s)))
            .collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 6);
    }

    #[test]
    fn tau_matches_the_triangular_embedding() {
        let tau = DirectionMap::tau();
        assert_eq!(tau.apply(Step::plus(2)), Step::plus(2));
        assert_eq!(tau.apply(Step::minus(0)), Step::minus(0));
        for s in triangular_steps() {
            assert_eq!(tau.apply(-s), -tau.apply(s));
        }
    }

    #[test]
    fn partition_classes() {
        let p = DirectionMap::partition(6, 2).unwrap();
        assert_eq!(
            p.class(Step::plus(0)),
            vec![Step::plus(0), Step::plus(1), Step::plus(2)]
        );
        assert_eq!(
            p.class(Step::minus(1)),
            vec![Step::minus(3), Step::minus(4), Step::minus(5)]
        );
        assert_eq!(
            DirectionMap::partition(6, 4),
            Err(LatticeError::NotADivisor { d: 6, k: 4 })
        );
    }

    #[test]
    fn partition_covers_disjointly() {
        for d in 1..=12 {
            for k in (1..=d).filter(|k| d % k == 0) {
                let p = DirectionMap::partition(d, k).unwrap();
                let mut seen = vec![0; d];
                for u in 0..k {
                    let class = p.class(Step::plus(u));
                    assert_eq!(class.len(), d / k);
                    for s in class {
                        seen[s.axis] += 1;
                    }
                }
                assert!(seen.iter().all(|&c| c == 1));
            }
        }
    }

    #[test]
    fn split_vertex_index_range() {
        let base = Vertex::origin(4);
        assert!(SplitVertexId::new(base.clone(), 5, 3).is_ok());
        assert!(SplitVertexId::new(base.clone(), 6, 3).is_err());
        assert!(SplitVertexId::new(base, 0, 3).is_err());
    }

    fn arb_element() -> impl Strategy<Value = Element> {
        let coords = prop::collection::vec(-4i32..4, 3);
        (coords, 0u8..4, 0usize..3, 1u8..4).prop_map(|(c, tag, axis, idx)| {
            let base = Vertex::new(c);
            match tag {
                0 => Element::Site(base),
                1 => Element::Edge(EdgeId::new(base, axis)),
                2 => Element::SplitEdge(SplitEdgeId { base, label: idx }),
                _ => Element::SplitSite(SplitVertexId { base, index: idx }),
            }
        })
    }

    proptest! {
        #[test]
        fn order_key_is_a_total_order(mut items in prop::collection::vec(arb_element(), 1..40)) {
            items.sort();
            items.dedup();
            let mut a = items.clone();
            a.sort_by_key(canonical_order_key);
            let mut b = items.clone();
            b.reverse();
            b.sort_by_key(canonical_order_key);
            // Distinct elements of the same variant never share a key.
            for w in a.windows(2) {
                let (ka, kb) = (canonical_order_key(&w[0]), canonical_order_key(&w[1]));
                prop_assert!(ka <= kb);
                if std::mem::discriminant(&w[0]) == std::mem::discriminant(&w[1]) {
                    prop_assert!(ka < kb);
                }
            }
            let ka: Vec<_> = a.iter().map(canonical_order_key).collect();
            let kb: Vec<_> = b.iter().map(canonical_order_key).collect();
            prop_assert_eq!(ka, kb);
        }
    }
}
