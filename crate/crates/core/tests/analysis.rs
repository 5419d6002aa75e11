mod common;

use bcst::*;
use common::*;
use rand::Rng;

#[test]
fn frobenius_is_a_metric_on_trees() {
    let mut r = rng(61);
    for _ in 0..100 {
        let n = r.gen_range(3..10);
        let p = uniform_points(n, 2, &mut r);
        let t: Vec<Tree<f64>> = (0..3).map(|_| Tree::Cst(random_tree(n, &mut r))).collect();
        let d = |a: usize, b: usize| tree_distance_frobenius(&p, &t[a], &p, &t[b]).unwrap();
        assert_eq!(d(0, 0), 0.0);
        assert!((d(0, 1) - d(1, 0)).abs() < 1e-12);
        assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
    }
}

#[test]
fn distance_matrix_matches_floyd() {
    let mut r = rng(62);
    for _ in 0..30 {
        let n = r.gen_range(3..9);
        let p = uniform_points(n, 2, &mut r);
        let full = spawn_full_topology(&p, &random_tree(n, &mut r)).unwrap();
        let m = 2 * n - 2;
        let d = floyd(m, full.edges(), |u, v| {
            let (a, b) = (full.node(&p, u), full.node(&p, v));
            a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
        });
        let got = tree_distance_matrix(&p, &Tree::Bcst(full)).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!((got[i * n + j] - d[i * m + j]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn perturbation_displacement_is_rayleigh_mean() {
    let mut r = rng(63);
    let p = uniform_points(1000, 2, &mut r);
    let sigma = 0.01;
    let (q, mean) = perturb_gaussian(&p, sigma, &mut r).unwrap();
    let expect = sigma * (std::f64::consts::PI / 2.0).sqrt();
    assert!((mean - expect).abs() < 0.1 * expect, "{mean} vs {expect}");
    let recomputed = (0..1000)
        .map(|i| {
            let (a, b) = (p.point(i), q.point(i));
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .sum::<f64>()
        / 1000.0;
    assert!((recomputed - mean).abs() < 1e-15);
}

/// Pearson correlation of average ranks, computed by counting.
fn naive_spearman(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|&a| {
                let below = v.iter().filter(|&&b| b < a).count() as f64;
                let equal = v.iter().filter(|&&b| b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let m = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (m(&rx), m(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn spearman_matches_counting_definition() {
    let mut r = rng(64);
    for _ in 0..200 {
        let k = r.gen_range(2..12);
        // Small integer values force ties.
        let x: Vec<f64> = (0..k).map(|_| r.gen_range(0..5) as f64).collect();
        let y: Vec<f64> = (0..k).map(|_| r.gen_range(0..5) as f64).collect();
        match spearman(&x, &y) {
            Some(s) => assert!((s - naive_spearman(&x, &y)).abs() < 1e-12),
            None => assert!(x.iter().all(|&v| v == x[0]) || y.iter().all(|&v| v == y[0])),
        }
    }
}

#[test]
fn centroid_star_is_within_factor_two_of_mrct_optimum() {
    let mut r = rng(65);
    for case in 0..20 {
        let n = 3 + case % 5;
        let p = uniform_points(n, 2, &mut r);
        let (_, star) = centroid_star_baseline(&p).unwrap();
        let opt = brute_force_optimum(&p, &CostParams::new(1.0), Mode::Cst).unwrap();
        let ratio = star / ((n * n) as f64 * opt.best_cost);
        assert!((1.0 - 1e-12..=2.0).contains(&ratio), "case {case}: {ratio}");
    }
}

#[test]
fn stability_rows_are_reproducible() {
    let mut r = rng(66);
    let p = uniform_points(12, 2, &mut r);
    let cfg = MstregConfig { num_iterations: 3, ..MstregConfig::default() };
    let a = stability_experiment(&p, &[0.0, 1.0], 0.01, 2, Mode::Cst, &cfg, 5).unwrap();
    let b = stability_experiment(&p, &[0.0, 1.0], 0.01, 2, Mode::Cst, &cfg, 5).unwrap();
    assert_eq!(a, b);
    // Shared perturbations across alpha.
    assert_eq!(a[0].mean_displacement, a[1].mean_displacement);
    let z = stability_experiment(&p, &[0.5], 0.0, 1, Mode::Cst, &cfg, 5).unwrap();
    assert_eq!(z[0].mean_frobenius, 0.0);
}
