#![allow(dead_code)]

use bcst::{PointSet, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points<R: Rng>(n: usize, dim: usize, rng: &mut R) -> PointSet<f64> {
    let flat = (0..n * dim).map(|_| rng.gen()).collect();
    PointSet::from_flat(n, dim, flat).unwrap()
}

/// Uniform random labelled tree from a random Pruefer sequence, decoded
/// here independently of the library.
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> Topology {
    if n == 2 {
        return Topology::new(2, [(0, 1)]).unwrap();
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &s in &seq {
        degree[s] += 1;
    }
    let mut edges = Vec::new();
    for &s in &seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    Topology::new(n, edges).unwrap()
}

/// Path lengths between all node pairs by Floyd-Warshall.
pub fn floyd(n: usize, edges: &[(usize, usize)], len: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for &(u, v) in edges {
        d[u * n + v] = len(u, v);
        d[v * n + u] = len(u, v);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + k] + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    d
}

/// Number of terminals (`< n_terminals`) reachable from `a` without using
/// edge `skip`, by repeated relaxation.
pub fn side_count(n_nodes: usize, n_terminals: usize, edges: &[(usize, usize)], skip: usize, a: usize) -> usize {
    let mut reach = vec![false; n_nodes];
    reach[a] = true;
    loop {
        let mut changed = false;
        for (e, &(u, v)) in edges.iter().enumerate() {
            if e != skip && reach[u] != reach[v] {
                reach[u] = true;
                reach[v] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n_terminals).filter(|&t| reach[t]).count()
}

/// CST cost from first principles.
pub fn naive_cst_cost(points: &PointSet<f64>, edges: &[(usize, usize)], alpha: f64) -> f64 {
    let n = points.len();
    edges
        .iter()
        .enumerate()
        .map(|(e, &(u, v))| {
            let m = side_count(n, n, edges, e, u) as f64 / n as f64;
            (m * (1.0 - m)).powf(alpha) * points.dist(u, v)
        })
        .sum()
}

/// Is the edge list a spanning tree on `n` nodes?
pub fn is_spanning_tree(n: usize, edges: &[(usize, usize)]) -> bool {
    if edges.len() + 1 != n {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for &(u, v) in edges {
        let (a, b) = (root(&mut parent, u), root(&mut parent, v));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// All spanning trees of the complete graph on `n` nodes, by choosing
/// `n - 1` of the `n (n - 1) / 2` edges.
pub fn all_spanning_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    let all: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    let mut pick = Vec::new();
    fn rec(all: &[(usize, usize)], start: usize, k: usize, n: usize, pick: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if pick.len() == k {
            if is_spanning_tree(n, pick) {
                out.push(pick.clone());
            }
            return;
        }
        for i in start..all.len() {
            if all.len() - i < k - pick.len() {
                break;
            }
            pick.push(all[i]);
            rec(all, i + 1, k, n, pick, out);
            pick.pop();
        }
    }
    rec(&all, 0, n - 1, n, &mut pick, &mut out);
    out
}

pub fn double_factorial(k: u64) -> u64 {
    (1..=k).rev().step_by(2).product::<u64>().max(1)
}
