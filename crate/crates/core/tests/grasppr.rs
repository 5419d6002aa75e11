mod common;

use bcst::*;
use common::*;
use rand::Rng;

/// Best single swap by brute force over all (drop, add) pairs.
fn best_swap_cost(p: &PointSet<f64>, t: &Topology, alpha: f64) -> f64 {
    let n = p.len();
    let mut best = f64::INFINITY;
    for drop in 0..t.edges().len() {
        for u in 0..n {
            for v in u + 1..n {
                if t.contains_edge(u, v) {
                    continue;
                }
                let mut edges: Vec<(usize, usize)> = t.edges().to_vec();
                edges[drop] = (u, v);
                if is_spanning_tree(n, &edges) {
                    best = best.min(naive_cst_cost(p, &edges, alpha));
                }
            }
        }
    }
    best
}

#[test]
fn local_search_ends_at_swap_local_optimum() {
    let mut r = rng(51);
    for case in 0..60 {
        let n = 3 + case % 5;
        let p = uniform_points(n, 2, &mut r);
        let alpha = [0.0, 0.2, 0.5, 1.0, -0.5][case % 5];
        let params = CostParams::new(alpha);
        let start = random_tree(n, &mut r);
        let t = local_search_edge_swap(&p, &start, &params, None).unwrap();
        let c = naive_cst_cost(&p, t.edges(), alpha);
        assert!(c <= naive_cst_cost(&p, start.edges(), alpha) + 1e-12);
        assert!(best_swap_cost(&p, &t, alpha) >= c * (1.0 - 1e-12), "case {case}");
    }
}

#[test]
fn relinking_stays_between_endpoints() {
    let mut r = rng(52);
    for _ in 0..30 {
        let n = r.gen_range(4..8);
        let p = uniform_points(n, 2, &mut r);
        let params = CostParams::new(0.5);
        let (a, b) = (random_tree(n, &mut r), random_tree(n, &mut r));
        let t = path_relink(&p, &a, &b, &params).unwrap();
        let c = cst_cost(&p, &t, &params).unwrap();
        assert!(c <= cst_cost(&p, &a, &params).unwrap() + 1e-12);
        assert!(c <= cst_cost(&p, &b, &params).unwrap() + 1e-12);
        // Every intermediate tree only uses edges of the two endpoints.
        assert!(t.edges().iter().all(|&(u, v)| a.contains_edge(u, v) || b.contains_edge(u, v)));
    }
}

#[test]
fn grasp_finds_small_optima() {
    let mut r = rng(53);
    for case in 0..8 {
        let p = uniform_points(6, 2, &mut r);
        let params = CostParams::new([0.2, 1.0][case % 2]);
        let cfg = GraspConfig { max_iterations: Some(20), seed: case as u64, ..GraspConfig::default() };
        let rep = grasp_pr_solve(&p, &params, &cfg).unwrap();
        let bf = brute_force_optimum(&p, &params, Mode::Cst).unwrap();
        assert!((rep.best_cost - bf.best_cost).abs() <= 1e-9 * bf.best_cost, "case {case}");
        assert!(is_spanning_tree(6, rep.best.edges()));
    }
}

#[test]
fn grasp_is_deterministic_and_hybrid_dominates() {
    let mut r = rng(54);
    let p = uniform_points(30, 2, &mut r);
    let params = CostParams::new(1.0);
    let cfg = GraspConfig { max_iterations: Some(8), seed: 9, ..GraspConfig::default() };
    let a = grasp_pr_solve(&p, &params, &cfg).unwrap();
    let b = grasp_pr_solve(&p, &params, &cfg).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.best_cost, b.best_cost);
    let h = grasp_pr_solve(&p, &params, &GraspConfig { init: GraspInit::Mstreg, ..cfg }).unwrap();
    assert!(h.best_cost <= a.best_cost + 1e-9);
    assert!(a.best_costs.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn randomized_construction_spans() {
    let mut r = rng(55);
    for _ in 0..200 {
        let n = r.gen_range(2..20);
        let p = uniform_points(n, 2, &mut r);
        let t = construct_randomized_tree(&p, &CostParams::new(r.gen_range(0.0..2.0)), &GraspConfig::default(), &mut r).unwrap();
        assert!(is_spanning_tree(n, t.edges()));
    }
}
