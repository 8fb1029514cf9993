use std::collections::BTreeMap;

use percbound::lattice::Vertex;
use percbound::mc::{
    exact_cluster_distribution, explore, survival_proxy, total_variation, ExploreConfig,
    FiniteRegion, LatticeShape, LatticeView, Params, Stream,
};
use percbound::{Family, Kind, ModelSpec, Orientation};

fn cluster_size(model: ModelSpec, params: Params, config: &ExploreConfig, seed: u64, r: u64) -> usize {
    let mut view = LatticeView::new(LatticeShape::Hypercubic(model), params, Stream::new(seed, r)).unwrap();
    explore(&mut view, &[Vertex::origin(model.d)], config).unwrap().size
}

/// The whole cluster inside the ball, without stopping at the boundary.
fn full_ball(radius: u32) -> ExploreConfig {
    ExploreConfig {
        stop_at_boundary: false,
        ..ExploreConfig::ball(radius)
    }
}

fn histogram(sizes: impl Iterator<Item = usize>) -> BTreeMap<usize, u64> {
    let mut h = BTreeMap::new();
    for s in sizes {
        *h.entry(s).or_insert(0) += 1;
    }
    h
}

#[test]
fn small_box_matches_enumeration() {
    let model = ModelSpec::new(2, Kind::Bond, Orientation::NonOriented).unwrap();
    let region = FiniteRegion::rect(&[0, -1], &[2, 1]).unwrap();
    let p = 0.35;
    let exact = exact_cluster_distribution(model, p, &region).unwrap();
    let config = ExploreConfig::region(region);
    let n = 40_000u64;
    let h = histogram((0..n).map(|r| cluster_size(model, Params::Homogeneous(p), &config, 11, r)));
    let empirical = h.into_iter().map(|(s, c)| (s, c as f64 / n as f64)).collect();
    let tv = total_variation(&exact, &empirical);
    assert!(tv < 0.015, "TV {tv}");
}

#[test]
fn equal_axis_parameters_reproduce_the_homogeneous_lattice() {
    let model = ModelSpec::new(3, Kind::Bond, Orientation::NonOriented).unwrap();
    let config = ExploreConfig::ball(6);
    for r in 0..300 {
        let a = cluster_size(model, Params::Homogeneous(0.3), &config, 5, r);
        let b = cluster_size(model, Params::PerAxis(vec![0.3; 3]), &config, 5, r);
        assert_eq!(a, b, "replica {r}");
    }
}

/// Two-sample chi-square on size classes {1, 2, 3, 4-7, 8+}.
#[test]
fn anisotropic_law_is_invariant_under_axis_relabelling() {
    let model = ModelSpec::new(2, Kind::Bond, Orientation::NonOriented).unwrap();
    let config = full_ball(8);
    let n = 20_000u64;
    let bin = |s: usize| match s {
        1..=3 => s - 1,
        4..=7 => 3,
        _ => 4,
    };
    let counts = |probs: Vec<f64>, seed: u64| {
        let mut c = [0f64; 5];
        for r in 0..n {
            c[bin(cluster_size(model, Params::PerAxis(probs.clone()), &config, seed, r))] += 1.0;
        }
        c
    };
    let a = counts(vec![0.2, 0.45], 1);
    let b = counts(vec![0.45, 0.2], 2);
    let stat: f64 = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| **x + **y > 0.0)
        .map(|(x, y)| (x - y).powi(2) / (x + y))
        .sum();
    // 4 degrees of freedom, upper 0.1% point.
    assert!(stat < 18.47, "chi-square {stat}, {a:?} vs {b:?}");
}

#[test]
fn raising_one_axis_never_shrinks_a_cluster() {
    let model = ModelSpec::new(2, Kind::Bond, Orientation::NonOriented).unwrap();
    let config = full_ball(10);
    for r in 0..500 {
        let low = cluster_size(model, Params::PerAxis(vec![0.3, 0.5]), &config, 8, r);
        let high = cluster_size(model, Params::PerAxis(vec![0.4, 0.5]), &config, 8, r);
        assert!(low <= high, "replica {r}: {low} > {high}");
    }
}

#[test]
fn pilot_bond_survival_is_pinned() {
    let model = ModelSpec::from_family(Family::Bond, 3).unwrap();
    let est = survival_proxy(model, 0.3973, 20, 10_000, 20_240_601).unwrap();
    assert_eq!(est.hits, 9229);
    assert!(est.ci_low > 0.9);
}
