//! GRASP with path relinking for the CST objective.
//!
//! Both local search and relinking move by single edge swaps: drop a tree
//! edge, reconnect the two halves with another edge. A swap scan evaluates
//! every candidate in O(1) after an O(N) rerooting pass per dropped edge.

use std::time::{Duration, Instant};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{argument, Result};
use crate::model::{adjacency, centrality_from_count, cst_cost, CostParams, PointSet, Topology};
use crate::mstreg::{default_mu, mstreg_solve, MstregConfig};
use crate::scalar::Scalar;
use crate::topo::karger_random_tree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GraspInit {
    None,
    /// Also local-search the best mSTreg CST and relink it against the final
    /// elite set.
    Mstreg,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraspConfig<T> {
    pub time_budget_secs: f64,
    pub elite_size: usize,
    /// Edge kernel `exp(-mu * length)`; `None` uses the inverse mean edge
    /// length of the terminal mST.
    pub mu: Option<T>,
    /// Below this alpha construction is Karger-style, otherwise Prim-style.
    pub alpha_switch: T,
    pub seed: u64,
    pub init: GraspInit,
    /// Stop after this many construction rounds even if time remains.
    pub max_iterations: Option<usize>,
    /// Used when `init` is `Mstreg`; its seed is overridden by `seed`.
    pub mstreg: MstregConfig<T>,
}

impl<T: Scalar> Default for GraspConfig<T> {
    fn default() -> Self {
        Self {
            time_budget_secs: 300.0,
            elite_size: 10,
            mu: None,
            alpha_switch: T::lit(0.7),
            seed: 0,
            init: GraspInit::None,
            max_iterations: None,
            mstreg: MstregConfig::default(),
        }
    }
}

impl<T: Scalar> GraspConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.time_budget_secs > 0.0) {
            return Err(argument("time_budget_secs must be positive"));
        }
        if self.elite_size < 2 {
            return Err(argument("elite_size must be at least 2"));
        }
        if self.max_iterations == Some(0) {
            return Err(argument("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GraspReport<T> {
    pub best: Topology,
    pub best_cost: T,
    /// Construction rounds completed.
    pub iterations: usize,
    /// Running best after each round.
    pub best_costs: Vec<T>,
    /// CST cost of the mSTreg seed before local search.
    pub seed_cost: Option<T>,
    pub elite_costs: Vec<T>,
    pub wall_time: Duration,
}

/// Edge weight `(m (1 - m))^alpha` per side count, plus pairwise distances.
struct SwapScan<T> {
    n: usize,
    omega: Vec<T>,
    dist: Vec<T>,
}

struct Swap<T> {
    cost: T,
    drop: usize,
    add: (usize, usize),
}

impl<T: Scalar> SwapScan<T> {
    fn new(points: &PointSet<T>, alpha: T) -> Self {
        let n = points.len();
        let mut omega = vec![T::zero(); n + 1];
        for (s, w) in omega.iter_mut().enumerate().take(n).skip(1) {
            *w = centrality_from_count::<T>(s, n).powf(alpha);
        }
        Self { n, omega, dist: points.distance_matrix() }
    }

    fn d(&self, u: usize, v: usize) -> T {
        self.dist[u * self.n + v]
    }

    /// Best tree reachable by dropping an edge accepted by `droppable` and
    /// adding a cut-crossing edge accepted by `addable`. `None` if no pair
    /// qualifies or the deadline passed mid-scan.
    fn best(
        &self,
        edges: &[(usize, usize)],
        droppable: impl Fn(usize, usize) -> bool,
        addable: impl Fn(usize, usize) -> bool,
        deadline: Option<Instant>,
    ) -> Option<Swap<T>> {
        let adj = adjacency(self.n, edges);
        let mut seen = vec![false; self.n];
        let mut best: Option<Swap<T>> = None;
        for (e, &(a, b)) in edges.iter().enumerate() {
            if !droppable(a, b) {
                continue;
            }
            if deadline.is_some_and(|t| Instant::now() >= t) {
                return None;
            }
            let (cost_a, in_a) = self.half_costs(&adj, e, a, &mut seen);
            let (cost_b, in_b) = self.half_costs(&adj, e, b, &mut seen);
            let w_cut = self.omega[in_a.len()];
            for &u in &in_a {
                for &v in &in_b {
                    let add = (u.min(v), u.max(v));
                    if (u, v) == (a, b) || !addable(add.0, add.1) {
                        continue;
                    }
                    let cost = cost_a[u] + cost_b[v] + w_cut * self.d(u, v);
                    if best.as_ref().is_none_or(|s| cost < s.cost) {
                        best = Some(Swap { cost, drop: e, add });
                    }
                }
            }
        }
        best
    }

    /// Cost of the half containing `root` (after dropping edge `e`) as a
    /// function of where the other half is re-attached, indexed by node and
    /// valid inside the half, together with the half's members.
    fn half_costs(
        &self,
        adj: &[Vec<(usize, usize)>],
        e: usize,
        root: usize,
        seen: &mut [bool],
    ) -> (Vec<T>, Vec<usize>) {
        let n = self.n;
        let mut order = vec![root];
        let mut parent = vec![usize::MAX; n];
        seen[root] = true;
        let mut head = 0;
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &(y, f) in &adj[x] {
                if f != e && !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    order.push(y);
                }
            }
        }
        for &x in &order {
            seen[x] = false;
        }
        let rest = n - order.len();
        let mut count = vec![1usize; n];
        for &y in order.iter().skip(1).rev() {
            count[parent[y]] += count[y];
        }
        // Rerooting: moving the attachment point across an edge only
        // changes which side of that edge the other half hangs on.
        let mut cost = vec![T::zero(); n];
        cost[root] = order.iter().skip(1).map(|&y| self.omega[count[y]] * self.d(y, parent[y])).sum();
        for &y in order.iter().skip(1) {
            let x = parent[y];
            let len = self.d(x, y);
            cost[y] = cost[x] + (self.omega[count[y] + rest] - self.omega[count[y]]) * len;
        }
        (cost, order)
    }
}

fn apply(edges: &mut [(usize, usize)], swap: &Swap<impl Scalar>) {
    edges[swap.drop] = swap.add;
}

fn improves<T: Scalar>(new: T, old: T) -> bool {
    new < old - old.abs() * T::lit(1e-12)
}

/// Randomised spanning tree: Karger-style below `cfg.alpha_switch`, otherwise
/// a Prim-style growth from a root biased toward cheap stars.
pub fn construct_randomized_tree<T: Scalar, R: Rng + ?Sized>(
    points: &PointSet<T>,
    params: &CostParams<T>,
    cfg: &GraspConfig<T>,
    rng: &mut R,
) -> Result<Topology> {
    let n = points.len();
    if n < 2 {
        return Err(argument("need at least 2 points"));
    }
    let mu = match cfg.mu {
        Some(mu) => mu,
        None => default_mu(points)?,
    };
    if params.alpha < cfg.alpha_switch {
        return karger_random_tree(points, mu, rng);
    }
    if !mu.is_finite() || mu < T::zero() {
        return Err(argument("mu must be finite and nonnegative"));
    }
    let dist = points.distance_matrix();
    let mu = mu.as_f64();
    // Star costs share the factor (1/N (1 - 1/N))^alpha, so compare the sums.
    let star: Vec<f64> = (0..n).map(|r| (0..n).map(|j| dist[r * n + j].as_f64()).sum()).collect();
    let temp = star.iter().sum::<f64>() / n as f64;
    let lo = star.iter().copied().fold(f64::INFINITY, f64::min);
    let root_w: Vec<f64> = star.iter().map(|&c| (-(c - lo) / temp.max(f64::MIN_POSITIVE)).exp()).collect();
    let root = WeightedIndex::new(&root_w).map_err(|e| argument(e.to_string()))?.sample(rng);

    let mut in_tree = vec![false; n];
    in_tree[root] = true;
    let mut members = vec![root];
    let mut edges = Vec::with_capacity(n - 1);
    let mut frontier = Vec::new();
    let mut weights = Vec::new();
    while members.len() < n {
        frontier.clear();
        for &u in &members {
            for v in (0..n).filter(|&v| !in_tree[v]) {
                frontier.push((dist[u * n + v].as_f64(), u, v));
            }
        }
        let lo = frontier.iter().map(|f| f.0).fold(f64::INFINITY, f64::min);
        weights.clear();
        weights.extend(frontier.iter().map(|f| (-mu * (f.0 - lo)).exp()));
        let pick = WeightedIndex::new(&weights).map_err(|e| argument(e.to_string()))?.sample(rng);
        let (_, u, v) = frontier[pick];
        in_tree[v] = true;
        members.push(v);
        edges.push((u, v));
    }
    Topology::new(n, edges)
}

/// Best-improvement edge-swap descent until no swap helps or `deadline`.
pub fn local_search_edge_swap<T: Scalar>(
    points: &PointSet<T>,
    topo: &Topology,
    params: &CostParams<T>,
    deadline: Option<Instant>,
) -> Result<Topology> {
    let scan = SwapScan::new(points, params.alpha);
    local_search(&scan, points, topo, params, deadline)
}

fn local_search<T: Scalar>(
    scan: &SwapScan<T>,
    points: &PointSet<T>,
    topo: &Topology,
    params: &CostParams<T>,
    deadline: Option<Instant>,
) -> Result<Topology> {
    let mut cost = cst_cost(points, topo, params)?;
    let mut edges = topo.edges().to_vec();
    while let Some(s) = scan.best(&edges, |_, _| true, |_, _| true, deadline) {
        if !improves(s.cost, cost) {
            break;
        }
        apply(&mut edges, &s);
        cost = s.cost;
    }
    Topology::new(topo.n(), edges)
}

/// Walks from `source` to `guide`, each step adding the guide edge and
/// dropping the non-guide cycle edge that give the cheapest intermediate
/// tree. Returns the cheapest tree seen, endpoints included.
pub fn path_relink<T: Scalar>(
    points: &PointSet<T>,
    source: &Topology,
    guide: &Topology,
    params: &CostParams<T>,
) -> Result<Topology> {
    let scan = SwapScan::new(points, params.alpha);
    relink(&scan, points, source, guide, params)
}

fn relink<T: Scalar>(
    scan: &SwapScan<T>,
    points: &PointSet<T>,
    source: &Topology,
    guide: &Topology,
    params: &CostParams<T>,
) -> Result<Topology> {
    if source.n() != guide.n() {
        return Err(argument("relinked trees span different terminal sets"));
    }
    let mut best = (cst_cost(points, source, params)?, source.edges().to_vec());
    let mut edges = source.edges().to_vec();
    while let Some(s) = scan.best(&edges, |a, b| !guide.contains_edge(a, b), |u, v| guide.contains_edge(u, v), None) {
        apply(&mut edges, &s);
        if s.cost < best.0 {
            best = (s.cost, edges.clone());
        }
    }
    Topology::new(source.n(), best.1)
}

struct Elite<T> {
    members: Vec<(Topology, T)>,
    cap: usize,
}

impl<T: Scalar> Elite<T> {
    /// Admits `t` if the set has room or `t` beats the worst member, and
    /// `t` differs from every member by at least one swap.
    fn offer(&mut self, t: &Topology, cost: T) {
        if self.members.iter().any(|(m, _)| m.symmetric_difference(t) < 2) {
            return;
        }
        if self.members.len() < self.cap {
            self.members.push((t.clone(), cost));
            return;
        }
        let (worst, wc) = self
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| (i, m.1))
            .fold((0, T::neg_infinity()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if cost < wc {
            self.members[worst] = (t.clone(), cost);
        }
    }
}

/// GRASP_PR over CST topologies. With `GraspInit::Mstreg` the random
/// trajectory is unchanged; the mSTreg tree is an extra candidate, so the
/// result is never worse than the plain run with the same seed and number
/// of rounds.
pub fn grasp_pr_solve<T: Scalar>(
    points: &PointSet<T>,
    params: &CostParams<T>,
    cfg: &GraspConfig<T>,
) -> Result<GraspReport<T>> {
    cfg.validate()?;
    let n = points.len();
    if n < 3 {
        return Err(argument("GRASP_PR needs at least 3 points"));
    }
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(cfg.time_budget_secs);
    let scan = SwapScan::new(points, params.alpha);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut seeded = None;
    let mut seed_cost = None;
    if cfg.init == GraspInit::Mstreg {
        let mcfg = MstregConfig { optimize_cst: true, seed: cfg.seed, ..cfg.mstreg.clone() };
        let report = mstreg_solve(points, params, &mcfg)?;
        let (tree, c) = report.best_cst.expect("optimize_cst is set");
        seed_cost = Some(c);
        let t = local_search(&scan, points, &tree, params, Some(deadline))?;
        let c = cst_cost(points, &t, params)?;
        seeded = Some((t, c));
    }

    let mut elite = Elite { members: Vec::new(), cap: cfg.elite_size };
    let mut best: Option<(Topology, T)> = None;
    let mut best_costs = Vec::new();
    let mut iterations = 0;
    loop {
        if iterations > 0 && Instant::now() >= deadline {
            break;
        }
        if cfg.max_iterations.is_some_and(|m| iterations >= m) {
            break;
        }
        let t0 = construct_randomized_tree(points, params, cfg, &mut rng)?;
        let t = local_search(&scan, points, &t0, params, Some(deadline))?;
        let c = cst_cost(points, &t, params)?;
        let mut round = vec![(t, c)];
        if !elite.members.is_empty() {
            let k = rng.gen_range(0..elite.members.len());
            let r = relink(&scan, points, &round[0].0, &elite.members[k].0, params)?;
            let rc = cst_cost(points, &r, params)?;
            round.push((r, rc));
        }
        for (t, c) in round {
            elite.offer(&t, c);
            if best.as_ref().is_none_or(|b| c < b.1) {
                best = Some((t, c));
            }
        }
        iterations += 1;
        best_costs.push(best.as_ref().expect("one round done").1);
        log::debug!("grasp round {iterations}: best {}", best_costs[iterations - 1]);
    }

    let mut best = best.expect("at least one round runs");
    if let Some((t, c)) = seeded {
        let mut pool = vec![(t.clone(), c)];
        for (m, _) in &elite.members {
            let r = relink(&scan, points, &t, m, params)?;
            let rc = cst_cost(points, &r, params)?;
            pool.push((r, rc));
        }
        for (t, c) in pool {
            if c < best.1 {
                best = (t, c);
            }
        }
    }
    Ok(GraspReport {
        best: best.0,
        best_cost: best.1,
        iterations,
        best_costs,
        seed_cost,
        elite_costs: elite.members.iter().map(|m| m.1).collect(),
        wall_time: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_best_swap(points: &PointSet<f64>, t: &Topology, params: &CostParams<f64>) -> f64 {
        let n = t.n();
        let mut best = f64::INFINITY;
        for e in 0..t.edges().len() {
            for u in 0..n {
                for v in u + 1..n {
                    let mut edges = t.edges().to_vec();
                    edges[e] = (u, v);
                    if let Ok(s) = Topology::new(n, edges) {
                        if s != *t {
                            best = best.min(cst_cost(points, &s, params).unwrap());
                        }
                    }
                }
            }
        }
        best
    }

    fn pts(n: usize, seed: u64) -> PointSet<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointSet::from_flat(n, 2, (0..2 * n).map(|_| rng.gen()).collect()).unwrap()
    }

    #[test]
    fn swap_scan_matches_recomputation() {
        for (seed, alpha) in [(1u64, 0.0), (2, 0.4), (3, 1.0), (4, -1.5)] {
            let p = pts(7, seed);
            let params = CostParams::new(alpha);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = karger_random_tree(&p, 1.0, &mut rng).unwrap();
            let scan = SwapScan::new(&p, alpha);
            let s = scan.best(t.edges(), |_, _| true, |_, _| true, None).unwrap();
            let mut edges = t.edges().to_vec();
            apply(&mut edges, &s);
            let direct = cst_cost(&p, &Topology::new(7, edges).unwrap(), &params).unwrap();
            assert!((s.cost - direct).abs() < 1e-12);
            assert!((s.cost - brute_best_swap(&p, &t, &params)).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_star_descends_to_path() {
        let p = PointSet::<f64>::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let star = Topology::star(4, 0).unwrap();
        let out = local_search_edge_swap(&p, &star, &CostParams::new(0.0), None).unwrap();
        assert_eq!(out, Topology::path(&[0, 1, 2, 3]).unwrap());
    }

    #[test]
    fn relink_endpoints() {
        let p = pts(5, 9);
        let params = CostParams::new(0.5);
        let a = Topology::star(5, 0).unwrap();
        assert_eq!(path_relink(&p, &a, &a, &params).unwrap(), a);
        let b = Topology::new(5, [(0, 1), (0, 2), (0, 3), (3, 4)]).unwrap();
        let r = path_relink(&p, &a, &b, &params).unwrap();
        let (ca, cb) = (cst_cost(&p, &a, &params).unwrap(), cst_cost(&p, &b, &params).unwrap());
        assert_eq!(r, if ca <= cb { a } else { b });
    }

    #[test]
    fn constructions_span() {
        let p = pts(9, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for alpha in [0.2, 0.9] {
            let cfg = GraspConfig::default();
            for _ in 0..50 {
                let t = construct_randomized_tree(&p, &CostParams::new(alpha), &cfg, &mut rng).unwrap();
                assert_eq!(t.edges().len(), 8);
            }
        }
    }

    #[test]
    fn elite_rejects_near_duplicates() {
        let mut e = Elite { members: Vec::new(), cap: 3 };
        let a = Topology::star(4, 0).unwrap();
        e.offer(&a, 1.0);
        e.offer(&a, 0.5);
        assert_eq!(e.members.len(), 1);
        e.offer(&Topology::star(4, 1).unwrap(), 2.0);
        e.offer(&Topology::star(4, 2).unwrap(), 3.0);
        e.offer(&Topology::star(4, 3).unwrap(), 2.5);
        let costs: Vec<f64> = e.members.iter().map(|m| m.1).collect();
        assert_eq!(costs, vec![1.0, 2.0, 2.5]);
    }
}
