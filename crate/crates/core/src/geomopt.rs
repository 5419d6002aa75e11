//! Steiner point placement for a fixed full topology.
//!
//! Each IRLS sweep freezes the reciprocal-distance weights and minimizes the
//! resulting quadratic exactly. Terminals are leaves, so the Steiner points
//! form a tree on their own and the linear system is solved by eliminating
//! that tree leaf-first and back-substituting root-first.

use serde::Serialize;

use crate::error::{argument, numeric, structural, Result};
use crate::model::{compute_edge_shares, CostParams, FullShape, FullTopology, PointSet, TreeShape};
use crate::scalar::{distance, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IrlsConfig<T> {
    pub max_iters: usize,
    /// Stop once no Steiner coordinate moves more than this in a sweep.
    pub tol: T,
    /// Added to distances inside the reciprocal weights.
    pub epsilon_dist: T,
}

impl<T: Scalar> Default for IrlsConfig<T> {
    fn default() -> Self {
        Self { max_iters: 1000, tol: T::lit(1e-10), epsilon_dist: T::lit(1e-12) }
    }
}

impl<T: Scalar> IrlsConfig<T> {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.tol > T::zero()) || !(self.epsilon_dist > T::zero()) {
            return Err(argument("IRLS needs max_iters >= 1, tol > 0 and epsilon_dist > 0"));
        }
        Ok(())
    }
}

/// Elimination plan for the Steiner subtree of one full topology.
pub(crate) struct IrlsPlan<T> {
    n_terminals: usize,
    dim: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<T>,
    /// Steiner indices (0-based) in breadth-first order from Steiner 0.
    order: Vec<usize>,
    /// For each Steiner index: parent Steiner index and the connecting edge.
    parent: Vec<Option<(usize, usize)>>,
    /// For each Steiner index: incident edges as (edge, other node id).
    incident: Vec<Vec<(usize, usize)>>,
}

impl<T: Scalar> IrlsPlan<T> {
    pub(crate) fn new(full: &FullTopology<T>, alpha: T) -> Result<Self> {
        let shares = compute_edge_shares(full)?;
        let weights = shares.weights(alpha);
        let n = full.n_terminals();
        let ns = full.n_steiner();
        let mut incident = vec![Vec::new(); ns];
        for (e, &(u, v)) in full.edges().iter().enumerate() {
            if u >= n {
                incident[u - n].push((e, v));
            }
            if v >= n {
                incident[v - n].push((e, u));
            }
        }
        let mut order = Vec::with_capacity(ns);
        let mut parent = vec![None; ns];
        if ns > 0 {
            let mut seen = vec![false; ns];
            seen[0] = true;
            order.push(0);
            let mut head = 0;
            while head < order.len() {
                let s = order[head];
                head += 1;
                for &(e, other) in &incident[s] {
                    if other >= n && !seen[other - n] {
                        seen[other - n] = true;
                        parent[other - n] = Some((s, e));
                        order.push(other - n);
                    }
                }
            }
            if order.len() != ns {
                return Err(structural("Steiner points do not form a connected subtree"));
            }
        }
        Ok(Self {
            n_terminals: n,
            dim: full.dim(),
            edges: full.edges().to_vec(),
            weights,
            order,
            parent,
            incident,
        })
    }

    fn node<'a>(&self, points: &'a PointSet<T>, steiner: &'a [T], i: usize) -> &'a [T] {
        if i < self.n_terminals {
            points.point(i)
        } else {
            let k = i - self.n_terminals;
            &steiner[k * self.dim..(k + 1) * self.dim]
        }
    }

    pub(crate) fn cost(&self, points: &PointSet<T>, steiner: &[T]) -> T {
        let mut total = T::zero();
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let len = distance(self.node(points, steiner, u), self.node(points, steiner, v));
            if len > T::zero() {
                total += self.weights[e] * len;
            }
        }
        total
    }

    /// One exact reweighted least-squares sweep; returns the largest
    /// coordinate displacement.
    fn sweep(&self, points: &PointSet<T>, steiner: &mut [T], eps: T, scratch: &mut Scratch<T>) -> T {
        let d = self.dim;
        let n = self.n_terminals;
        let Scratch { w, diag, rhs } = scratch;
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let len = distance(self.node(points, steiner, u), self.node(points, steiner, v));
            w[e] = self.weights[e] / (len + eps);
        }
        // `diag` starts with the terminal weights only; Steiner children add
        // their Schur contribution `w off / (off + w)` during elimination,
        // which never cancels even when one weight dwarfs the rest.
        for (s, inc) in self.incident.iter().enumerate() {
            let mut dg = T::zero();
            let r = &mut rhs[s * d..(s + 1) * d];
            r.iter_mut().for_each(|x| *x = T::zero());
            for &(e, other) in inc {
                if other < n {
                    dg += w[e];
                }
                if other < n {
                    for (rk, &xk) in r.iter_mut().zip(points.point(other)) {
                        *rk += w[e] * xk;
                    }
                }
            }
            diag[s] = dg;
        }
        // Leaf-first elimination.
        for &s in self.order.iter().rev() {
            if let Some((p, e)) = self.parent[s] {
                let we = w[e];
                let f = we / (diag[s] + we);
                let kept = f * diag[s];
                diag[p] += kept;
                for k in 0..d {
                    let add = f * rhs[s * d + k];
                    rhs[p * d + k] += add;
                }
            }
        }
        // Root-first back-substitution.
        let mut moved = T::zero();
        for &s in &self.order {
            for k in 0..d {
                let mut x = rhs[s * d + k];
                let mut dg = diag[s];
                if let Some((p, e)) = self.parent[s] {
                    x += w[e] * steiner[p * d + k];
                    dg += w[e];
                }
                x /= dg;
                moved = moved.max((x - steiner[s * d + k]).abs());
                steiner[s * d + k] = x;
            }
        }
        moved
    }

    fn position<'a>(&self, points: &'a PointSet<T>, steiner: &'a [T], i: usize) -> &'a [T] {
        self.node(points, steiner, i)
    }

    /// Reciprocal weights pin coincident nodes together for good. After a
    /// descent phase, look for a collapsed edge whose terminal-free side is
    /// pulled away harder than the edge weight can hold (the subgradient
    /// optimality test for a fixed tree) and move that side out along the
    /// pull with a backtracking step. Returns true if something moved.
    fn escape(&self, points: &PointSet<T>, steiner: &mut [T], collapse_tol: T) -> bool {
        let n = self.n_terminals;
        let d = self.dim;
        let n_nodes = n + self.order.len();
        let len: Vec<T> = self
            .edges
            .iter()
            .map(|&(u, v)| distance(self.position(points, steiner, u), self.position(points, steiner, v)))
            .collect();
        let collapsed: Vec<bool> = len.iter().map(|&l| l <= collapse_tol).collect();
        if !collapsed.iter().any(|&c| c) {
            return false;
        }
        let mut cadj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_nodes];
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if collapsed[e] {
                cadj[u].push((v, e));
                cadj[v].push((u, e));
            }
        }
        let mut best: Option<(T, Vec<usize>, Vec<T>, T)> = None;
        let mut side = Vec::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if !collapsed[e] {
                continue;
            }
            for root in [a, b] {
                side.clear();
                side.push(root);
                let mut head = 0;
                let mut has_terminal = false;
                let mut from = vec![(root, e)];
                while head < side.len() {
                    let x = side[head];
                    let via = from[head].1;
                    head += 1;
                    has_terminal |= x < n;
                    for &(y, f) in &cadj[x] {
                        if f != via {
                            side.push(y);
                            from.push((y, f));
                        }
                    }
                }
                if has_terminal {
                    continue;
                }
                let mut pull = vec![T::zero(); d];
                let mut reach = T::infinity();
                for &x in &side {
                    let px = self.position(points, steiner, x);
                    for &(f, y) in &self.incident[x - n] {
                        if collapsed[f] {
                            continue;
                        }
                        let py = self.position(points, steiner, y);
                        for k in 0..d {
                            pull[k] += self.weights[f] * (py[k] - px[k]) / len[f];
                        }
                        reach = reach.min(len[f]);
                    }
                }
                let norm = pull.iter().map(|&x| x * x).sum::<T>().sqrt();
                let excess = norm - self.weights[e];
                if excess > self.weights[e] * T::lit(1e-9) && best.as_ref().is_none_or(|b| excess > b.0) {
                    let dir = pull.iter().map(|&x| x / norm).collect();
                    best = Some((excess, side.clone(), dir, reach));
                }
            }
        }
        let Some((_, side, dir, reach)) = best else {
            return false;
        };
        let before = self.cost(points, steiner);
        let saved = steiner.to_vec();
        let mut step = reach / T::lit(2.0);
        for _ in 0..40 {
            for &x in &side {
                let s = x - n;
                for k in 0..d {
                    steiner[s * d + k] = saved[s * d + k] + step * dir[k];
                }
            }
            if self.cost(points, steiner) < before {
                return true;
            }
            step /= T::lit(2.0);
        }
        steiner.copy_from_slice(&saved);
        false
    }

    /// Runs descent phases in place, each of at most `cfg.max_iters` sweeps,
    /// separated by escape steps off spurious collapses. Returns the cost
    /// trace (initial cost first) when `trace` is set, otherwise only the
    /// final cost.
    pub(crate) fn run(
        &self,
        points: &PointSet<T>,
        steiner: &mut [T],
        cfg: &IrlsConfig<T>,
        trace: bool,
    ) -> Result<Vec<T>> {
        let ns = self.order.len();
        let mut costs = vec![self.cost(points, steiner)];
        if ns == 0 {
            return Ok(costs);
        }
        let mut scratch = Scratch {
            w: vec![T::zero(); self.edges.len()],
            diag: vec![T::zero(); ns],
            rhs: vec![T::zero(); ns * self.dim],
        };
        let collapse_tol = T::lit(1e-6) * points.bbox_diagonal().max(T::min_positive_value());
        let max_escapes = 4 * ns;
        for phase in 0..=max_escapes {
            if phase > 0 {
                if !self.escape(points, steiner, collapse_tol) {
                    break;
                }
                if trace {
                    costs.push(self.cost(points, steiner));
                }
            }
            for _ in 0..cfg.max_iters {
                let moved = self.sweep(points, steiner, cfg.epsilon_dist, &mut scratch);
                if !moved.is_finite() || steiner.iter().any(|x| !x.is_finite()) {
                    return Err(numeric("IRLS produced non-finite Steiner coordinates"));
                }
                if trace {
                    costs.push(self.cost(points, steiner));
                }
                if moved < cfg.tol {
                    break;
                }
            }
        }
        if !trace {
            costs = vec![self.cost(points, steiner)];
        }
        Ok(costs)
    }
}

struct Scratch<T> {
    w: Vec<T>,
    diag: Vec<T>,
    rhs: Vec<T>,
}

/// Optimizes the Steiner coordinates of `full` for fixed topology.
/// Returns the updated tree and the cost after every sweep (initial cost
/// first). Terminals never move.
pub fn irls_optimize<T: Scalar>(
    points: &PointSet<T>,
    full: &FullTopology<T>,
    params: &CostParams<T>,
    cfg: &IrlsConfig<T>,
) -> Result<(FullTopology<T>, Vec<T>)> {
    cfg.validate()?;
    if points.len() != full.n_terminals() || points.dim() != full.dim() {
        return Err(structural("point set does not match the full topology"));
    }
    if full.steiner_coords().iter().any(|x| !x.is_finite()) {
        return Err(numeric("Steiner coordinates must be finite"));
    }
    let plan = IrlsPlan::new(full, params.alpha)?;
    let mut out = full.clone();
    let trace = plan.run(points, out.steiner_coords_mut(), cfg, true)?;
    Ok((out, trace))
}

/// Starting Steiner coordinates for a bare shape: each Steiner point is put
/// at the mean of the terminal centroids of its three branches.
pub fn initial_steiner_coords<T: Scalar>(points: &PointSet<T>, shape: &FullShape) -> Vec<T> {
    let n = shape.n_terminals();
    let ns = n - 2;
    let d = points.dim();
    let n_nodes = shape.n_nodes();
    if ns == 0 {
        return Vec::new();
    }
    let rooted = crate::model::RootedTree::new(n_nodes, shape.edges(), 0).expect("validated shape");
    // Sum of terminal coordinates and counts below each node (away from root 0).
    let mut sum = vec![T::zero(); n_nodes * d];
    let mut cnt = vec![0usize; n_nodes];
    for &u in rooted.order.iter().rev() {
        if u < n {
            cnt[u] += 1;
            for k in 0..d {
                sum[u * d + k] += points.point(u)[k];
            }
        }
        let p = rooted.parent[u];
        if p != crate::model::RootedTree::NONE {
            cnt[p] += cnt[u];
            for k in 0..d {
                let s = sum[u * d + k];
                sum[p * d + k] += s;
            }
        }
    }
    let total: Vec<T> = (0..d).map(|k| sum[k]).collect();
    let adj = crate::model::adjacency(n_nodes, shape.edges());
    let mut out = vec![T::zero(); ns * d];
    for s in n..n_nodes {
        let mut acc = vec![T::zero(); d];
        for &(v, _) in &adj[s] {
            // Branch through v: the subtree below v, or everything else when
            // v is the parent.
            let (c, mean): (usize, Vec<T>) = if rooted.parent[v] == s {
                (cnt[v], (0..d).map(|k| sum[v * d + k]).collect())
            } else {
                (n - cnt[s], (0..d).map(|k| total[k] - sum[s * d + k]).collect())
            };
            let c = T::from_count(c);
            for k in 0..d {
                acc[k] += mean[k] / c;
            }
        }
        for k in 0..d {
            out[(s - n) * d + k] = acc[k] / T::lit(3.0);
        }
    }
    out
}

/// Minimizer of `sum_i w_i ||x - a_i||` by Weiszfeld iteration.
pub fn weighted_geometric_median<T: Scalar>(anchors: &[(&[T], T)]) -> Result<Vec<T>> {
    let Some(&(first, _)) = anchors.first() else {
        return Err(argument("geometric median needs at least one anchor"));
    };
    let d = first.len();
    if anchors.iter().any(|(a, w)| a.len() != d || !w.is_finite() || *w < T::zero()) {
        return Err(argument("anchors must share a dimension and have finite nonnegative weights"));
    }
    let active: Vec<(&[T], T)> = anchors.iter().copied().filter(|(_, w)| *w > T::zero()).collect();
    if active.is_empty() {
        return Err(argument("all anchor weights are zero"));
    }
    if active.len() == 1 {
        return Ok(active[0].0.to_vec());
    }
    // An anchor is optimal iff the pull of all others does not exceed its weight.
    for (k, &(ak, wk)) in active.iter().enumerate() {
        let mut pull = vec![T::zero(); d];
        let mut extra = T::zero();
        for (j, &(aj, wj)) in active.iter().enumerate() {
            if j == k {
                continue;
            }
            let len = distance(ak, aj);
            if len == T::zero() {
                extra += wj;
                continue;
            }
            for m in 0..d {
                pull[m] += wj * (aj[m] - ak[m]) / len;
            }
        }
        let norm = pull.iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm <= wk + extra {
            return Ok(ak.to_vec());
        }
    }
    let total: T = active.iter().map(|&(_, w)| w).sum();
    let mut x = vec![T::zero(); d];
    for &(a, w) in &active {
        for m in 0..d {
            x[m] += w * a[m] / total;
        }
    }
    let scale = active.iter().map(|&(a, _)| distance(a, &x)).fold(T::zero(), T::max);
    let tol = T::lit(1e-14) * (T::one() + scale);
    let eps = T::lit(1e-15) * (T::one() + scale);
    for _ in 0..10_000 {
        let mut num = vec![T::zero(); d];
        let mut den = T::zero();
        for &(a, w) in &active {
            let c = w / (distance(a, &x) + eps);
            den += c;
            for m in 0..d {
                num[m] += c * a[m];
            }
        }
        let next: Vec<T> = num.iter().map(|&v| v / den).collect();
        let step = distance(&next, &x);
        x = next;
        if !(step > tol) {
            break;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(numeric("geometric median iteration diverged"));
    }
    Ok(x)
}

/// Optimal branching angles at a degree-3 Steiner point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchAngles<T> {
    pub theta1: T,
    pub theta2: T,
    /// `theta1 + theta2`: the angle between the two edges that merge at the
    /// Steiner point.
    pub collapse_threshold: T,
    /// Effective edge weights `k_i^alpha`.
    pub weights: [T; 3],
}

fn checked_cos<T: Scalar>(c: T) -> Result<T> {
    let slack = T::lit(1e-9);
    if !c.is_finite() || c < -T::one() - slack || c > T::one() + slack {
        return Err(numeric(format!("cosine {c} outside [-1, 1]: inconsistent branch weights")));
    }
    Ok(c.max(-T::one()).min(T::one()))
}

/// Branching angles for incident raw centralities `k0` (outgoing edge) and
/// `k1`, `k2` (merging edges); the exponent is applied here.
pub fn branching_angles<T: Scalar>(k0: T, k1: T, k2: T, alpha: T) -> Result<BranchAngles<T>> {
    if !(k0 > T::zero() && k1 > T::zero() && k2 > T::zero()) {
        return Err(argument("centralities must be positive"));
    }
    let (w0, w1, w2) = (k0.powf(alpha), k1.powf(alpha), k2.powf(alpha));
    let two = T::lit(2.0);
    let cos1 = checked_cos((w0 * w0 + w1 * w1 - w2 * w2) / (two * w0 * w1))?;
    let cos2 = checked_cos((w0 * w0 + w2 * w2 - w1 * w1) / (two * w0 * w2))?;
    let cos12 = checked_cos((w0 * w0 - w1 * w1 - w2 * w2) / (two * w1 * w2))?;
    let theta1 = cos1.acos();
    let theta2 = cos2.acos();
    let threshold = theta1 + theta2;
    if (threshold.cos() - cos12).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(64.0)) {
        return Err(numeric("branching angle formulas disagree"));
    }
    Ok(BranchAngles { theta1, theta2, collapse_threshold: threshold, weights: [w0, w1, w2] })
}

/// Branching angles where two edges of terminal shares `m1`, `m2` merge into
/// one of share `m1 + m2`, using centrality `x (1 - x)`.
pub fn branching_angles_from_shares<T: Scalar>(m1: T, m2: T, alpha: T) -> Result<BranchAngles<T>> {
    let f = |x: T| x * (T::one() - x);
    if !(m1 > T::zero() && m2 > T::zero() && m1 + m2 < T::one()) {
        return Err(argument("shares must be positive with m1 + m2 < 1"));
    }
    branching_angles(f(m1 + m2), f(m1), f(m2), alpha)
}

/// V-branching test: with `gamma` the angle at terminal `a0` between the
/// other two neighbors, the Steiner point collapses onto `a0` iff
/// `gamma >= theta1 + theta2`.
pub fn v_branching_collapse_test<T: Scalar>(gamma: T, angles: &BranchAngles<T>) -> bool {
    gamma >= angles.collapse_threshold
}

/// Per Steiner point: the largest deviation between the observed pairwise
/// edge cosines and the optimal-angle formulas. Steiner points with an
/// incident edge shorter than `collapse_tol` are reported as `None`.
pub fn angle_residuals<T: Scalar>(
    points: &PointSet<T>,
    full: &FullTopology<T>,
    alpha: T,
    collapse_tol: T,
) -> Result<Vec<Option<T>>> {
    let shares = compute_edge_shares(full)?;
    let n = full.n_terminals();
    let mut incident = vec![Vec::new(); full.n_steiner()];
    for (e, &(u, v)) in full.edges().iter().enumerate() {
        if u >= n {
            incident[u - n].push((e, v));
        }
        if v >= n {
            incident[v - n].push((e, u));
        }
    }
    let mut out = Vec::with_capacity(incident.len());
    for (s, inc) in incident.iter().enumerate() {
        let b = full.steiner_point(s);
        let mut units = Vec::with_capacity(3);
        let mut w = Vec::with_capacity(3);
        let mut collapsed = false;
        for &(e, other) in inc {
            let a = full.node(points, other);
            let len = distance(a, b);
            if len <= collapse_tol {
                collapsed = true;
                break;
            }
            units.push(a.iter().zip(b).map(|(&x, &y)| (x - y) / len).collect::<Vec<T>>());
            w.push(shares.weight(e, alpha));
        }
        if collapsed {
            out.push(None);
            continue;
        }
        let two = T::lit(2.0);
        let mut worst = T::zero();
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            let observed: T = units[i].iter().zip(&units[j]).map(|(&x, &y)| x * y).sum();
            let predicted = (w[k] * w[k] - w[i] * w[i] - w[j] * w[j]) / (two * w[i] * w[j]);
            worst = worst.max((observed - predicted).abs());
        }
        out.push(Some(worst));
    }
    Ok(out)
}
