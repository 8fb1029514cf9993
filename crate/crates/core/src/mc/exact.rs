//! Brute-force law of the origin-cluster size inside a small region.

use std::collections::BTreeMap;

use super::cluster::FiniteRegion;
use super::view::check_probability;
use super::SimError;
use crate::lattice::{hypercubic_steps, Vertex};
use crate::model::{Kind, ModelSpec};

pub const MAX_ENUMERATED_ELEMENTS: usize = 25;

/// Probability mass over cluster sizes.
pub type SizeDistribution = BTreeMap<usize, f64>;

/// Sums `p^open (1-p)^closed` over every configuration of the edges (bond)
/// or non-origin sites (site) inside `region`. The origin is open by
/// convention.
pub fn exact_cluster_distribution(
    model: ModelSpec,
    p: f64,
    region: &FiniteRegion,
) -> Result<SizeDistribution, SimError> {
    check_probability(p)?;
    let origin = Vertex::origin(model.d);
    if region.dim() != model.d || !region.contains(&origin) {
        return Err(SimError::OriginOutsideRegion);
    }
    let verts: Vec<&Vertex> = region.vertices().collect();
    let index = |v: &Vertex| verts.binary_search(&v).ok();
    let root = index(&origin).expect("origin is in the region");

    // adjacency[v] = (neighbour, bit that must be set to move there)
    let mut adjacency: Vec<Vec<(usize, Option<usize>)>> = vec![Vec::new(); verts.len()];
    let mut n_bits = 0;
    match model.kind {
        Kind::Bond => {
            for (i, v) in verts.iter().enumerate() {
                for axis in 0..model.d {
                    let Some(j) = index(&v.shifted(axis, 1)) else {
                        continue;
                    };
                    adjacency[i].push((j, Some(n_bits)));
                    if !model.is_oriented() {
                        adjacency[j].push((i, Some(n_bits)));
                    }
                    n_bits += 1;
                }
            }
        }
        Kind::Site => {
            let mut site_bit = vec![None; verts.len()];
            for (i, bit) in site_bit.iter_mut().enumerate() {
                if i != root {
                    *bit = Some(n_bits);
                    n_bits += 1;
                }
            }
            for (i, v) in verts.iter().enumerate() {
                for s in hypercubic_steps(model.d, model.is_oriented()) {
                    if let Some(j) = index(&v.step(s)) {
                        adjacency[i].push((j, site_bit[j]));
                    }
                }
            }
        }
    }
    if n_bits > MAX_ENUMERATED_ELEMENTS {
        return Err(SimError::RegionTooLarge {
            elements: n_bits,
            max: MAX_ENUMERATED_ELEMENTS,
        });
    }

    let mut mass = SizeDistribution::new();
    let mut seen = vec![false; verts.len()];
    let mut stack = Vec::with_capacity(verts.len());
    for config in 0u64..(1u64 << n_bits) {
        let open = config.count_ones() as i32;
        let weight = p.powi(open) * (1.0 - p).powi(n_bits as i32 - open);
        if weight == 0.0 {
            continue;
        }
        seen.iter_mut().for_each(|s| *s = false);
        seen[root] = true;
        stack.clear();
        stack.push(root);
        let mut size = 1;
        while let Some(v) = stack.pop() {
            for &(w, bit) in &adjacency[v] {
                let passable = bit.is_none_or(|b| config >> b & 1 == 1);
                if passable && !seen[w] {
                    seen[w] = true;
                    size += 1;
                    stack.push(w);
                }
            }
        }
        *mass.entry(size).or_insert(0.0) += weight;
    }
    Ok(mass)
}

/// Number of random elements the enumeration would range over.
pub fn random_element_count(model: ModelSpec, region: &FiniteRegion) -> usize {
    match model.kind {
        Kind::Site => region.len().saturating_sub(1),
        Kind::Bond => region
            .vertices()
            .map(|v| (0..model.d).filter(|&a| region.contains(&v.shifted(a, 1))).count())
            .sum(),
    }
}

/// Total-variation distance between two size laws.
pub fn total_variation(a: &SizeDistribution, b: &SizeDistribution) -> f64 {
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}
