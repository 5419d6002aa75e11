//! Exhaustive solvers for small instances.
//!
//! CST topologies are the `N^(N-2)` labelled trees, walked as Prüfer
//! sequences. Full topologies are the `(2N-5)!!` unrooted binary trees,
//! addressed by a mixed-radix index: terminal `k >= 3` subdivides edge
//! `digit_k < 2k - 3` of the tree built so far.

use crate::error::{argument, Result};
use crate::geomopt::{initial_steiner_coords, IrlsConfig, IrlsPlan};
use crate::model::{centrality_from_count, CostParams, FullShape, FullTopology, Mode, PointSet, Topology, Tree};
use crate::scalar::Scalar;

pub const MAX_CST_TERMINALS: usize = 9;
pub const MAX_FULL_TERMINALS: usize = 9;
/// Largest instance the BCST oracle accepts.
pub const MAX_BCST_TERMINALS: usize = 9;

/// Number of labelled trees on `n` nodes.
pub fn cayley_count(n: usize) -> u64 {
    if n <= 2 {
        1
    } else {
        (n as u64).pow(n as u32 - 2)
    }
}

/// `(2n - 5)!!` for `n >= 3`, and 1 for `n = 2`.
pub fn full_topology_count(n: usize) -> u64 {
    (3..n).map(|k| (2 * k - 3) as u64).product()
}

fn check_range(n: usize, lo: usize, hi: usize, what: &str) -> Result<()> {
    if n < lo || n > hi {
        return Err(argument(format!("{what} enumeration supports {lo} <= n <= {hi}, got {n}")));
    }
    Ok(())
}

/// Decodes a Prüfer sequence over `0..n` (length `n - 2`). Returns, in
/// removal order, `(leaf, parent)` pairs; the tree is rooted at `n - 1`.
pub(crate) fn prufer_decode_into(n: usize, seq: &[usize], degree: &mut Vec<usize>, out: &mut Vec<(usize, usize)>) {
    out.clear();
    degree.clear();
    degree.resize(n, 1);
    for &s in seq {
        degree[s] += 1;
    }
    let mut ptr = 0;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for &s in seq {
        out.push((leaf, s));
        degree[s] -= 1;
        if s < ptr && degree[s] == 1 {
            leaf = s;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    out.push((leaf, n - 1));
}

pub fn prufer_decode(n: usize, seq: &[usize]) -> Result<Topology> {
    if n < 2 || seq.len() != n - 2 || seq.iter().any(|&s| s >= n) {
        return Err(argument("Prüfer sequence must have length n - 2 with entries below n"));
    }
    let (mut deg, mut edges) = (Vec::new(), Vec::new());
    prufer_decode_into(n, seq, &mut deg, &mut edges);
    Topology::new(n, edges)
}

/// Advances an odometer over `0..radix` digits; false after the last value.
fn odometer_next(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// Every labelled tree on `n` nodes exactly once.
pub struct CstTopologies {
    n: usize,
    seq: Vec<usize>,
    done: bool,
}

impl Iterator for CstTopologies {
    type Item = Topology;

    fn next(&mut self) -> Option<Topology> {
        if self.done {
            return None;
        }
        let t = prufer_decode(self.n, &self.seq).expect("valid sequence");
        let n = self.n;
        self.done = !odometer_next(&mut self.seq, |_| n);
        Some(t)
    }
}

pub fn enumerate_cst_topologies(n: usize) -> Result<CstTopologies> {
    check_range(n, 2, MAX_CST_TERMINALS, "CST topology")?;
    Ok(CstTopologies { n, seq: vec![0; n - 2], done: false })
}

/// Edges of the full topology with mixed-radix index digits
/// (`digits[k - 3] < 2k - 3`).
pub(crate) fn full_edges_from_digits(n: usize, digits: &[usize], edges: &mut Vec<(usize, usize)>) {
    edges.clear();
    if n == 2 {
        edges.push((0, 1));
        return;
    }
    edges.extend([(0, n), (1, n), (2, n)]);
    for k in 3..n {
        let s = n + k - 2;
        let (a, b) = edges[digits[k - 3]];
        edges[digits[k - 3]] = (a, s);
        edges.push((s, b));
        edges.push((k, s));
    }
}

fn digits_of(n: usize, mut index: u64) -> Vec<usize> {
    let mut digits = vec![0usize; n.saturating_sub(3)];
    for k in (3..n).rev() {
        let r = (2 * k - 3) as u64;
        digits[k - 3] = (index % r) as usize;
        index /= r;
    }
    digits
}

/// The full topology with the given index in `0..(2n-5)!!`.
pub fn full_shape_at(n: usize, index: u64) -> Result<FullShape> {
    check_range(n, 2, usize::BITS as usize, "full topology")?;
    if index >= full_topology_count(n) {
        return Err(argument(format!("index {index} out of range for n = {n}")));
    }
    let mut edges = Vec::new();
    full_edges_from_digits(n, &digits_of(n, index), &mut edges);
    Ok(FullShape::new_unchecked(n, edges))
}

/// Every full topology on `n` terminals exactly once.
pub struct FullShapes {
    n: usize,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for FullShapes {
    type Item = FullShape;

    fn next(&mut self) -> Option<FullShape> {
        if self.done {
            return None;
        }
        let mut edges = Vec::with_capacity(2 * self.n - 3);
        full_edges_from_digits(self.n, &self.digits, &mut edges);
        self.done = !odometer_next(&mut self.digits, |i| 2 * (i + 3) - 3);
        Some(FullShape::new_unchecked(self.n, edges))
    }
}

pub fn enumerate_full_topologies(n: usize) -> Result<FullShapes> {
    check_range(n, 3, MAX_FULL_TERMINALS, "full topology")?;
    Ok(FullShapes { n, digits: vec![0; n - 3], done: false })
}

/// Unrooted binary trees on `n >= 3` labelled leaves, without a size guard
/// (used for local trees, whose leaf count is a node degree plus one).
pub(crate) fn all_full_shapes_unguarded(n: usize) -> FullShapes {
    FullShapes { n, digits: vec![0; n.saturating_sub(3)], done: false }
}

#[derive(Debug, Clone)]
pub struct BruteForce<T> {
    pub best: Tree<T>,
    pub best_cost: T,
    /// Costs of all topologies, ascending. For BCST, entries more than 1%
    /// above the optimum come from a shortened IRLS run and are upper bounds.
    pub sorted_costs: Vec<T>,
}

/// IRLS budget applied to every topology by the BCST oracle.
pub fn oracle_irls_config<T: Scalar>() -> IrlsConfig<T> {
    IrlsConfig { max_iters: 20_000, tol: T::lit(1e-10), epsilon_dist: T::lit(1e-12) }
}

/// Global optimum by exhaustive search.
pub fn brute_force_optimum<T: Scalar>(
    points: &PointSet<T>,
    params: &CostParams<T>,
    mode: Mode,
) -> Result<BruteForce<T>> {
    match mode {
        Mode::Cst => brute_force_cst(points, params),
        Mode::Bcst => brute_force_bcst(points, params, &oracle_irls_config()),
    }
}

fn brute_force_cst<T: Scalar>(points: &PointSet<T>, params: &CostParams<T>) -> Result<BruteForce<T>> {
    let n = points.len();
    check_range(n, 2, MAX_CST_TERMINALS, "CST brute force")?;
    let dist = points.distance_matrix();
    let weight: Vec<T> = (0..n)
        .map(|c| if c == 0 { T::zero() } else { centrality_from_count::<T>(c, n).powf(params.alpha) })
        .collect();
    let mut seq = vec![0usize; n - 2];
    let (mut deg, mut pairs) = (Vec::new(), Vec::new());
    let mut below = vec![0usize; n];
    let mut costs = Vec::with_capacity(cayley_count(n) as usize);
    let mut best: Option<(T, Vec<usize>)> = None;
    loop {
        prufer_decode_into(n, &seq, &mut deg, &mut pairs);
        below.iter_mut().for_each(|c| *c = 1);
        let mut cost = T::zero();
        // Leaves leave in an order where every child precedes its parent.
        for &(x, p) in &pairs {
            let len = dist[x * n + p];
            if len > T::zero() {
                cost += weight[below[x]] * len;
            }
            below[p] += below[x];
        }
        costs.push(cost);
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, seq.clone()));
        }
        if !odometer_next(&mut seq, |_| n) {
            break;
        }
    }
    let (best_cost, best_seq) = best.expect("at least one tree");
    costs.sort_by(|a, b| a.partial_cmp(b).expect("finite costs"));
    Ok(BruteForce { best: Tree::Cst(prufer_decode(n, &best_seq)?), best_cost, sorted_costs: costs })
}

pub(crate) fn brute_force_bcst<T: Scalar>(
    points: &PointSet<T>,
    params: &CostParams<T>,
    cfg: &IrlsConfig<T>,
) -> Result<BruteForce<T>> {
    let n = points.len();
    check_range(n, 2, MAX_BCST_TERMINALS, "BCST brute force")?;
    if n == 2 {
        let full = FullTopology::single_edge(points.dim());
        let cost = crate::model::bcst_cost(points, &full, params)?;
        return Ok(BruteForce { best: Tree::Bcst(full), best_cost: cost, sorted_costs: vec![cost] });
    }
    let solve = |shape: &FullShape, cfg: &IrlsConfig<T>| -> Result<(T, FullTopology<T>)> {
        let mut full = FullTopology::from_shape(shape, points.dim(), initial_steiner_coords(points, shape))?;
        let plan = IrlsPlan::new(&full, params.alpha)?;
        let cost = plan.run(points, full.steiner_coords_mut(), cfg, false)?[0];
        Ok((cost, full))
    };
    // IRLS descends monotonically, so a short run over-estimates each
    // topology's optimum (by ~1e-5 relative in practice). Only topologies
    // within REFINE_WINDOW of the short-run best are solved to `cfg`.
    let coarse = IrlsConfig { max_iters: COARSE_SWEEPS, tol: T::lit(1e-5), ..*cfg };
    let mut costs = Vec::with_capacity(full_topology_count(n) as usize);
    for shape in enumerate_full_topologies(n)? {
        costs.push(solve(&shape, &coarse)?.0);
    }
    let lo = costs.iter().copied().fold(T::infinity(), T::min);
    let cut = lo + lo.abs() * T::lit(REFINE_WINDOW);
    let mut best: Option<(T, FullTopology<T>)> = None;
    for (i, c) in costs.iter_mut().enumerate() {
        if *c > cut {
            continue;
        }
        let (cost, full) = solve(&full_shape_at(n, i as u64)?, cfg)?;
        *c = cost;
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, full));
        }
    }
    let (best_cost, full) = best.expect("the short-run best is refined");
    costs.sort_by(|a, b| a.partial_cmp(b).expect("finite costs"));
    Ok(BruteForce { best: Tree::Bcst(full), best_cost, sorted_costs: costs })
}

const COARSE_SWEEPS: usize = 50;
const REFINE_WINDOW: f64 = 0.01;

/// 1-based rank of `cost` among `sorted_costs`; costs within 1e-9 of a
/// better entry share its rank.
pub fn rank_of<T: Scalar>(cost: T, sorted_costs: &[T]) -> usize {
    let cut = cost - T::lit(1e-9);
    sorted_costs.partition_point(|&c| c < cut) + 1
}
