use std::collections::BTreeMap;

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use survfuse::fusion::{fusion_path, shear, FusionConfig};
use survfuse::tree::{grow, Tree, TreeConfig};
use survfuse::{Seed, SurvivalDataset};

fn grown(seed: u64) -> (SurvivalDataset, Vec<usize>, Tree) {
    let data = common::step_sample(seed, 500);
    let rows: Vec<usize> = (0..data.len()).collect();
    let tree = grow(&data, &rows, &TreeConfig::default(), Seed(seed));
    (data, rows, tree)
}

#[test]
fn path_points_satisfy_the_transform_identity() {
    for seed in 0..4 {
        let (data, rows, tree) = grown(seed);
        let path = fusion_path(&tree, &data, &rows, &FusionConfig::default()).unwrap();
        let t = &path.transform;
        let wb = t.w().matmul(&t.b());
        for point in &path.points {
            let gamma = wb.matvec(&point.beta);
            for (a, b) in gamma.iter().zip(&point.gamma) {
                assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
            }
            let back = t.b_inv().matmul(&t.w_inv()).matvec(&point.gamma);
            for (a, b) in back.iter().zip(&point.beta) {
                assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
            }
        }
    }
}

#[test]
fn zero_penalty_recovers_the_unit_estimates() {
    for seed in 0..4 {
        let (data, rows, tree) = grown(seed);
        let path = fusion_path(&tree, &data, &rows, &FusionConfig::default()).unwrap();
        let last = path.points.last().unwrap();
        assert_eq!(last.lambda, 0.0);
        for (b, m) in last.beta.iter().zip(&path.ordering.mple[1..]) {
            assert!((b - m).abs() < 1e-4, "{b} vs {m}");
        }
    }
}

#[test]
fn top_of_the_path_is_a_single_group() {
    for seed in 0..4 {
        let (data, rows, tree) = grown(seed);
        let path = fusion_path(&tree, &data, &rows, &FusionConfig::default()).unwrap();
        let first = &path.points[0];
        assert!(first.gamma.iter().all(|g| g.abs() < 1e-8));
        assert_eq!(path.patterns[first.pattern].group_count, 1);
        // patterns ascend in penalty
        assert!(path.patterns.windows(2).all(|w| w[0].lambda <= w[1].lambda));
        for p in &path.patterns {
            assert!(p.relaxed_betas.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(p.relaxed_betas[0], 0.0);
        }
    }
}

#[test]
fn shearing_preserves_group_routing() {
    let (data, rows, tree) = grown(11);
    let path = fusion_path(&tree, &data, &rows, &FusionConfig::default()).unwrap();
    for pattern in &path.patterns {
        let sheared = shear(&tree, &pattern.leaf_to_group);
        assert!(sheared.n_leaves() <= tree.n_leaves());
        assert!(sheared.n_leaves() >= pattern.group_count);
        for i in 0..data.len() {
            let want = pattern.leaf_to_group[&tree.route_row(&data, i)];
            let got = sheared.node(sheared.route_row(&data, i)).unwrap().group;
            assert_eq!(got, Some(want));
        }
    }
}

#[test]
fn shear_extremes() {
    let (_, _, tree) = grown(12);
    assert!(tree.n_leaves() > 2);
    let one: BTreeMap<u64, usize> = tree.leaves().into_iter().map(|l| (l, 1)).collect();
    let root = shear(&tree, &one);
    assert_eq!(root.n_leaves(), 1);
    assert_eq!(root.root().group, Some(1));

    let own: BTreeMap<u64, usize> = tree.leaves().into_iter().enumerate().map(|(k, l)| (l, k + 1)).collect();
    let same = shear(&tree, &own);
    assert_eq!(same.leaves(), tree.leaves());
    for (a, b) in same.nodes().iter().zip(tree.nodes()) {
        assert_eq!((a.id, &a.split), (b.id, &b.split));
    }
}

#[test]
fn json_round_trip_routes_identically() {
    let (_, _, tree) = grown(13);
    let back = Tree::from_json(&tree.to_json().unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10_000 {
        let z = [rng.random::<f64>(), rng.random::<f64>(), rng.random_range(0..3) as f64];
        assert_eq!(tree.route(&z), back.route(&z));
    }
}

#[test]
fn growth_is_deterministic_and_respects_the_limits() {
    let (data, rows, tree) = grown(14);
    let again = grow(&data, &rows, &TreeConfig::default(), Seed(14));
    assert_eq!(tree.to_json().unwrap(), again.to_json().unwrap());
    let config = TreeConfig::default();
    assert!(tree.depth() <= config.max_depth);
    for node in tree.nodes() {
        if !node.is_leaf() {
            assert!(node.n >= config.min_node_size && node.events >= config.min_node_events);
        }
    }
    let routed = tree.route_all(&data);
    for leaf in tree.leaves() {
        let n = routed.iter().filter(|&&l| l == leaf).count();
        assert_eq!(n, tree.node(leaf).unwrap().n);
    }
}
