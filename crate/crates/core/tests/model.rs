mod common;

use bcst::*;
use common::*;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn mrct_identity_against_floyd() {
    let mut r = rng(11);
    for _ in 0..100 {
        let n = r.gen_range(2..12);
        let p = uniform_points(n, 2, &mut r);
        let t = random_tree(n, &mut r);
        let d = floyd(n, t.edges(), |u, v| p.dist(u, v));
        let pairs: f64 = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| d[i * n + j]).sum();
        let scaled = (n * n) as f64 * cst_cost(&p, &t, &CostParams::new(1.0)).unwrap();
        assert!((scaled - pairs).abs() <= 1e-10 * pairs, "{scaled} vs {pairs}");
        let direct = mrct_pairwise_sum(&p, &t).unwrap();
        assert!((direct - pairs).abs() <= 1e-10 * pairs);
    }
}

#[test]
fn cst_cost_matches_naive_definition() {
    let mut r = rng(12);
    for k in 0..60 {
        let n = r.gen_range(2..10);
        let p = uniform_points(n, 1 + k % 3, &mut r);
        let t = random_tree(n, &mut r);
        let alpha = r.gen_range(-2.0..2.0);
        let a = cst_cost(&p, &t, &CostParams::new(alpha)).unwrap();
        let b = naive_cst_cost(&p, t.edges(), alpha);
        assert!((a - b).abs() <= 1e-12 * b.max(1.0));
    }
}

#[test]
fn full_shares_match_edge_removal() {
    for n in 3..8 {
        for shape in enumerate_full_topologies(n).unwrap().take(40) {
            let shares = compute_edge_shares(&shape).unwrap();
            let edges = TreeShape::edges(&shape);
            for (e, &(u, _)) in edges.iter().enumerate() {
                let c = side_count(2 * n - 2, n, edges, e, u);
                let m: f64 = shares.share(e);
                let expect = c as f64 / n as f64;
                assert!((m - expect).abs() < 1e-15 || (m - (1.0 - expect)).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn zero_length_edges_cost_nothing() {
    let p = PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let full = FullTopology::new(3, 2, [(0, 3), (1, 3), (2, 3)], vec![0.0, 0.0]).unwrap();
    let c = bcst_cost(&p, &full, &CostParams::new(-3.0)).unwrap();
    // Edge (0, 3) has length zero; the other two have share 1/3.
    let w = (2.0f64 / 9.0).powf(-3.0);
    assert!((c - 2.0 * w).abs() < 1e-12 * w);
}

#[test]
fn f32_and_f64_agree() {
    let mut r = rng(13);
    let p = uniform_points(9, 2, &mut r);
    let t = random_tree(9, &mut r);
    let a = cst_cost(&p, &t, &CostParams::new(0.5)).unwrap();
    let b = cst_cost(&p.cast::<f32>(), &t, &CostParams::new(0.5f32)).unwrap();
    assert!((a - b as f64).abs() < 1e-5 * a);
}

proptest! {
    #[test]
    fn cost_is_translation_invariant_and_scales_linearly(
        seed in 0u64..1000, n in 3usize..9, alpha in -1.0f64..1.5, s in 0.1f64..10.0, dx in -5.0f64..5.0
    ) {
        let mut r = rng(seed);
        let p = uniform_points(n, 2, &mut r);
        let t = random_tree(n, &mut r);
        let params = CostParams::new(alpha);
        let c = cst_cost(&p, &t, &params).unwrap();
        let moved = PointSet::from_flat(n, 2, p.coords().iter().map(|x| s * x + dx).collect()).unwrap();
        let c2 = cst_cost(&moved, &t, &params).unwrap();
        prop_assert!((c2 - s * c).abs() <= 1e-9 * s * c);
    }

    #[test]
    fn alpha_zero_is_tree_length(seed in 0u64..1000, n in 2usize..10) {
        let mut r = rng(seed);
        let p = uniform_points(n, 3, &mut r);
        let t = random_tree(n, &mut r);
        let c = cst_cost(&p, &t, &CostParams::new(0.0)).unwrap();
        prop_assert!((c - tree_length(&p, &t)).abs() <= 1e-12 * c.max(1.0));
    }
}
