//! Newman–Ziff sweeps: one uniform per element, elements added in
//! increasing order, so a single pass answers every `p` on a grid and each
//! replica's crossing indicator is monotone in `p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cluster::wilson_interval;
use super::stream::Stream;
use super::view::check_probability;
use super::SimError;
use crate::lattice::{EdgeId, Element, Vertex};
use crate::model::{Kind, ModelSpec};

/// Weighted quick-union with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let up = self.parent[self.parent[x] as usize];
            self.parent[x] = up;
            x = up as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        ra
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn component_size(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub p: f64,
    pub hits: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub model: ModelSpec,
    pub box_radius: u32,
    pub replicas: usize,
    pub master_seed: u64,
    /// Left-to-right crossing of the box along the first axis.
    pub event: String,
    pub points: Vec<SweepPoint>,
}

impl SweepCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,estimate,ci_low,ci_high\n");
        for pt in &self.points {
            out.push_str(&format!("{},{},{},{}\n", pt.p, pt.estimate, pt.ci_low, pt.ci_high));
        }
        out
    }
}

struct BoxIndex {
    d: usize,
    side: usize,
    radius: i32,
}

impl BoxIndex {
    fn len(&self) -> usize {
        self.side.pow(self.d as u32)
    }

    fn coords(&self, mut i: usize) -> Vec<i32> {
        let mut c = vec![0; self.d];
        for x in c.iter_mut() {
            *x = (i % self.side) as i32 - self.radius;
            i /= self.side;
        }
        c
    }

    fn stride(&self, axis: usize) -> usize {
        self.side.pow(axis as u32)
    }
}

/// Crossing indicators of one replica at each grid value; `p_grid` must be
/// sorted. The uniforms are those of `Stream::new(master_seed, replica)`.
pub fn sweep_replica(
    model: ModelSpec,
    box_radius: u32,
    p_grid: &[f64],
    master_seed: u64,
    replica: u64,
) -> Result<Vec<bool>, SimError> {
    validate(model, p_grid)?;
    let stream = Stream::new(master_seed, replica);
    let idx = BoxIndex {
        d: model.d,
        side: 2 * box_radius as usize + 1,
        radius: box_radius as i32,
    };
    let n = idx.len();
    let (left, right) = (n, n + 1);
    let on_axis0 = |i: usize| i % idx.side;
    let last = idx.side - 1;

    // (uniform, a, b): adding the element joins a and b; for sites a == b.
    let mut items: Vec<(f64, usize, usize)> = Vec::new();
    match model.kind {
        Kind::Bond => {
            for i in 0..n {
                let c = idx.coords(i);
                for axis in 0..model.d {
                    if c[axis] == box_radius as i32 {
                        continue;
                    }
                    let id = EdgeId::new(Vertex::new(c.iter().copied()), axis);
                    let u = stream.uniform(&Element::Edge(id));
                    items.push((u, i, i + idx.stride(axis)));
                }
            }
        }
        Kind::Site => {
            for i in 0..n {
                let u = stream.uniform(&Element::Site(Vertex::new(idx.coords(i))));
                items.push((u, i, i));
            }
        }
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut uf = UnionFind::new(n + 2);
    let mut open_site = vec![false; n];
    if model.kind == Kind::Bond {
        for i in 0..n {
            match on_axis0(i) {
                0 => {
                    uf.union(i, left);
                }
                x if x == last => {
                    uf.union(i, right);
                }
                _ => {}
            }
        }
    }

    let mut out = Vec::with_capacity(p_grid.len());
    let mut next = 0;
    for &p in p_grid {
        while next < items.len() && items[next].0 < p {
            let (_, a, b) = items[next];
            next += 1;
            if model.kind == Kind::Bond {
                uf.union(a, b);
                continue;
            }
            open_site[a] = true;
            let c = idx.coords(a);
            for axis in 0..model.d {
                let s = idx.stride(axis);
                if c[axis] > -(box_radius as i32) && open_site[a - s] {
                    uf.union(a, a - s);
                }
                if c[axis] < box_radius as i32 && open_site[a + s] {
                    uf.union(a, a + s);
                }
            }
            if on_axis0(a) == 0 {
                uf.union(a, left);
            }
            if on_axis0(a) == last {
                uf.union(a, right);
            }
        }
        out.push(uf.connected(left, right));
    }
    Ok(out)
}

fn validate(model: ModelSpec, p_grid: &[f64]) -> Result<(), SimError> {
    if model.is_oriented() {
        return Err(SimError::OrientedSweep);
    }
    for &p in p_grid {
        check_probability(p)?;
    }
    if p_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(SimError::UnsortedGrid);
    }
    Ok(())
}

/// Crossing probability of `[-L, L]^d` along the first axis at every grid
/// value, from `replicas` independent sweeps.
pub fn union_find_sweep(
    model: ModelSpec,
    box_radius: u32,
    p_grid: &[f64],
    replicas: usize,
    master_seed: u64,
) -> Result<SweepCurve, SimError> {
    validate(model, p_grid)?;
    if replicas == 0 {
        return Err(SimError::NoReplicas);
    }
    let runs = (0..replicas as u64)
        .into_par_iter()
        .map(|r| sweep_replica(model, box_radius, p_grid, master_seed, r))
        .collect::<Result<Vec<_>, _>>()?;
    let points = p_grid
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let hits = runs.iter().filter(|run| run[j]).count();
            let (ci_low, ci_high) = wilson_interval(hits, replicas);
            SweepPoint {
                p,
                hits,
                estimate: hits as f64 / replicas as f64,
                ci_low,
                ci_high,
            }
        })
        .collect();
    Ok(SweepCurve {
        model,
        box_radius,
        replicas,
        master_seed,
        event: "left-right-crossing".to_string(),
        points,
    })
}
