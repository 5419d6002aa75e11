//! Point sets, tree topologies, edge shares and the CST / BCST objectives.
//!
//! Terminals are always numbered `0..N`. In a [`FullTopology`] the Steiner
//! points follow at `N..2N-2`. Edge shares are kept as integer terminal counts
//! and only turned into floating point when an edge weight is needed.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{argument, structural, Error, Result};
use crate::scalar::{distance, Scalar};

/// Terminal coordinates, `n x dim`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet<T> {
    n: usize,
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointSet<T> {
    pub fn from_flat(n: usize, dim: usize, coords: Vec<T>) -> Result<Self> {
        if n < 2 {
            return Err(argument(format!("a point set needs at least 2 points, got {n}")));
        }
        if dim == 0 {
            return Err(argument("dimension must be positive"));
        }
        if coords.len() != n * dim {
            return Err(argument(format!(
                "expected {} coordinates for {n} points in dimension {dim}, got {}",
                n * dim,
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Numeric("point coordinates must be finite".into()));
        }
        Ok(Self { n, dim, coords })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(argument("all points must have the same dimension"));
        }
        Self::from_flat(rows.len(), dim, rows.concat())
    }

    /// Number of terminals `N`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks_exact(self.dim)
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> T {
        distance(self.point(i), self.point(j))
    }

    /// Dense `n x n` distance matrix.
    pub fn distance_matrix(&self) -> Vec<T> {
        let n = self.n;
        let mut d = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = self.dist(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        d
    }

    pub fn centroid(&self) -> Vec<T> {
        let mut c = vec![T::zero(); self.dim];
        for row in self.rows() {
            for (acc, &x) in c.iter_mut().zip(row) {
                *acc += x;
            }
        }
        let n = T::from_count(self.n);
        c.iter_mut().for_each(|x| *x /= n);
        c
    }

    /// Length of the diagonal of the axis-aligned bounding box.
    pub fn bbox_diagonal(&self) -> T {
        let mut acc = T::zero();
        for k in 0..self.dim {
            let (lo, hi) = self
                .rows()
                .map(|r| r[k])
                .fold((T::infinity(), T::neg_infinity()), |(lo, hi), x| (lo.min(x), hi.max(x)));
            acc += (hi - lo) * (hi - lo);
        }
        acc.sqrt()
    }

    pub fn cast<U: Scalar>(&self) -> PointSet<U> {
        PointSet {
            n: self.n,
            dim: self.dim,
            coords: self.coords.iter().map(|&x| U::lit(x.as_f64())).collect(),
        }
    }
}

/// Access to the combinatorial part of a tree.
pub trait TreeShape {
    fn n_terminals(&self) -> usize;
    fn n_nodes(&self) -> usize;
    fn edges(&self) -> &[(usize, usize)];
}

fn normalize_edges(edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<(usize, usize)> {
    let mut out: Vec<_> = edges
        .into_iter()
        .map(|(u, v)| if u <= v { (u, v) } else { (v, u) })
        .collect();
    out.sort_unstable();
    out
}

/// Checks that `edges` form a spanning tree on `0..n_nodes`.
pub(crate) fn check_spanning_tree(n_nodes: usize, edges: &[(usize, usize)]) -> Result<()> {
    if n_nodes == 0 {
        return Err(structural("tree has no nodes"));
    }
    if edges.len() + 1 != n_nodes {
        return Err(structural(format!(
            "a tree on {n_nodes} nodes needs {} edges, got {}",
            n_nodes - 1,
            edges.len()
        )));
    }
    for &(u, v) in edges {
        if u == v {
            return Err(structural(format!("self-loop at node {u}")));
        }
        if u >= n_nodes || v >= n_nodes {
            return Err(structural(format!("edge ({u},{v}) out of range for {n_nodes} nodes")));
        }
    }
    let rooted = RootedTree::new(n_nodes, edges, 0)?;
    if rooted.order.len() != n_nodes {
        return Err(structural("edge list is not connected"));
    }
    Ok(())
}

pub(crate) fn degrees(n_nodes: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut deg = vec![0; n_nodes];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg
}

pub(crate) fn adjacency(n_nodes: usize, edges: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); n_nodes];
    for (e, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, e));
        adj[v].push((u, e));
    }
    adj
}

/// Breadth-first rooting of a tree. Node ids that appear in no edge are
/// ignored, which lets partially contracted structures reuse this.
pub(crate) struct RootedTree {
    pub order: Vec<usize>,
    pub parent: Vec<usize>,
    pub parent_edge: Vec<usize>,
}

impl RootedTree {
    pub const NONE: usize = usize::MAX;

    pub fn new(n_nodes: usize, edges: &[(usize, usize)], root: usize) -> Result<Self> {
        let adj = adjacency(n_nodes, edges);
        let mut parent = vec![Self::NONE; n_nodes];
        let mut parent_edge = vec![Self::NONE; n_nodes];
        let mut seen = vec![false; n_nodes];
        let mut order = Vec::with_capacity(edges.len() + 1);
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &(v, e) in &adj[u] {
                if e == parent_edge[u] {
                    continue;
                }
                if seen[v] {
                    return Err(structural("edge list contains a cycle"));
                }
                seen[v] = true;
                parent[v] = u;
                parent_edge[v] = e;
                queue.push_back(v);
            }
        }
        if order.len() != edges.len() + 1 {
            return Err(structural("edge list is not a connected tree"));
        }
        Ok(Self { order, parent, parent_edge })
    }
}

/// A spanning tree over the terminals only (CST solution form).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Topology {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let edges = normalize_edges(edges);
        if n < 2 {
            return Err(structural("a topology needs at least 2 nodes"));
        }
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(structural("duplicate edge"));
        }
        check_spanning_tree(n, &edges)?;
        Ok(Self { n, edges })
    }

    pub fn star(n: usize, center: usize) -> Result<Self> {
        Self::new(n, (0..n).filter(|&v| v != center).map(|v| (center, v)))
    }

    /// Path visiting `order` in sequence.
    pub fn path(order: &[usize]) -> Result<Self> {
        Self::new(order.len(), order.windows(2).map(|w| (w[0], w[1])))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        degrees(self.n, &self.edges)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        let e = if u <= v { (u, v) } else { (v, u) };
        self.edges.binary_search(&e).is_ok()
    }

    /// Number of edges present in one tree but not the other.
    pub fn symmetric_difference(&self, other: &Topology) -> usize {
        let common = self.edges.iter().filter(|&&(u, v)| other.contains_edge(u, v)).count();
        (self.edges.len() - common) + (other.edges.len() - common)
    }
}

impl TreeShape for Topology {
    fn n_terminals(&self) -> usize {
        self.n
    }
    fn n_nodes(&self) -> usize {
        self.n
    }
    fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

fn check_full_structure(n_terminals: usize, edges: &[(usize, usize)]) -> Result<()> {
    if n_terminals < 2 {
        return Err(structural("a full topology needs at least 2 terminals"));
    }
    let n_nodes = 2 * n_terminals - 2;
    check_spanning_tree(n_nodes, edges)?;
    for (v, d) in degrees(n_nodes, edges).into_iter().enumerate() {
        if v < n_terminals && d != 1 {
            return Err(structural(format!("terminal {v} has degree {d}, expected 1")));
        }
        if v >= n_terminals && d != 3 {
            return Err(structural(format!("Steiner point {v} has degree {d}, expected 3")));
        }
    }
    Ok(())
}

/// Structure of a full tree topology without coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FullShape {
    n_terminals: usize,
    edges: Vec<(usize, usize)>,
}

impl FullShape {
    pub fn new(n_terminals: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let edges = normalize_edges(edges);
        check_full_structure(n_terminals, &edges)?;
        Ok(Self { n_terminals, edges })
    }

    pub(crate) fn new_unchecked(n_terminals: usize, edges: Vec<(usize, usize)>) -> Self {
        Self { n_terminals, edges: normalize_edges(edges) }
    }

    /// Canonical label-free form: the sorted terminal bipartitions of all edges.
    pub fn splits(&self) -> Vec<Vec<u64>> {
        splits(self.n_terminals, 2 * self.n_terminals - 2, &self.edges)
    }
}

impl TreeShape for FullShape {
    fn n_terminals(&self) -> usize {
        self.n_terminals
    }
    fn n_nodes(&self) -> usize {
        2 * self.n_terminals - 2
    }
    fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Tree over `N` terminals and `N - 2` Steiner points (BCST solution form).
/// Terminals are leaves and Steiner points have degree three; a collapsed
/// Steiner point simply sits on top of another node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullTopology<T> {
    n_terminals: usize,
    dim: usize,
    edges: Vec<(usize, usize)>,
    steiner: Vec<T>,
}

impl<T: Scalar> FullTopology<T> {
    pub fn new(
        n_terminals: usize,
        dim: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        steiner: Vec<T>,
    ) -> Result<Self> {
        let edges = normalize_edges(edges);
        check_full_structure(n_terminals, &edges)?;
        if steiner.len() != (n_terminals - 2) * dim {
            return Err(structural(format!(
                "expected {} Steiner coordinates, got {}",
                (n_terminals - 2) * dim,
                steiner.len()
            )));
        }
        Ok(Self { n_terminals, dim, edges, steiner })
    }

    pub fn from_shape(shape: &FullShape, dim: usize, steiner: Vec<T>) -> Result<Self> {
        if steiner.len() != (shape.n_terminals - 2) * dim {
            return Err(structural("Steiner coordinate count does not match the shape"));
        }
        Ok(Self { n_terminals: shape.n_terminals, dim, edges: shape.edges.clone(), steiner })
    }

    /// Two terminals joined by one edge.
    pub fn single_edge(dim: usize) -> Self {
        Self { n_terminals: 2, dim, edges: vec![(0, 1)], steiner: Vec::new() }
    }

    #[inline]
    pub fn n_terminals(&self) -> usize {
        self.n_terminals
    }

    #[inline]
    pub fn n_steiner(&self) -> usize {
        self.n_terminals - 2
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        2 * self.n_terminals - 2
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn steiner_coords(&self) -> &[T] {
        &self.steiner
    }

    pub(crate) fn steiner_coords_mut(&mut self) -> &mut [T] {
        &mut self.steiner
    }

    /// Coordinates of Steiner point `k` (node id `N + k`).
    #[inline]
    pub fn steiner_point(&self, k: usize) -> &[T] {
        &self.steiner[k * self.dim..(k + 1) * self.dim]
    }

    pub fn set_steiner_point(&mut self, k: usize, x: &[T]) {
        self.steiner[k * self.dim..(k + 1) * self.dim].copy_from_slice(x);
    }

    /// Coordinates of node `i`, terminal or Steiner.
    #[inline]
    pub fn node<'a>(&'a self, points: &'a PointSet<T>, i: usize) -> &'a [T] {
        if i < self.n_terminals {
            points.point(i)
        } else {
            self.steiner_point(i - self.n_terminals)
        }
    }

    pub fn shape(&self) -> FullShape {
        FullShape { n_terminals: self.n_terminals, edges: self.edges.clone() }
    }

    pub fn splits(&self) -> Vec<Vec<u64>> {
        splits(self.n_terminals, self.n_nodes(), &self.edges)
    }

    pub fn edge_length(&self, points: &PointSet<T>, e: usize) -> T {
        let (u, v) = self.edges[e];
        distance(self.node(points, u), self.node(points, v))
    }
}

impl<T: Scalar> TreeShape for FullTopology<T> {
    fn n_terminals(&self) -> usize {
        self.n_terminals
    }
    fn n_nodes(&self) -> usize {
        2 * self.n_terminals - 2
    }
    fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Terminal bitsets on the non-root side of every edge, sorted.
fn splits(n_terminals: usize, n_nodes: usize, edges: &[(usize, usize)]) -> Vec<Vec<u64>> {
    let words = n_terminals.div_ceil(64);
    let rooted = RootedTree::new(n_nodes, edges, 0).expect("validated tree");
    let mut sets = vec![vec![0u64; words]; n_nodes];
    let mut out = Vec::with_capacity(edges.len());
    for &u in rooted.order.iter().rev() {
        if u < n_terminals {
            sets[u][u / 64] |= 1 << (u % 64);
        }
        let p = rooted.parent[u];
        if p != RootedTree::NONE {
            let child = std::mem::take(&mut sets[u]);
            for (a, b) in sets[p].iter_mut().zip(&child) {
                *a |= *b;
            }
            out.push(child);
        }
    }
    out.sort_unstable();
    out
}

/// Per-edge terminal counts on the side away from terminal 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeShares {
    n_terminals: usize,
    counts: Vec<usize>,
}

impl EdgeShares {
    #[inline]
    pub fn n_terminals(&self) -> usize {
        self.n_terminals
    }

    #[inline]
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Normalized share `m_e`.
    #[inline]
    pub fn share<T: Scalar>(&self, e: usize) -> T {
        T::from_count(self.counts[e]) / T::from_count(self.n_terminals)
    }

    /// `m_e (1 - m_e)`, evaluated from the integer counts.
    #[inline]
    pub fn centrality<T: Scalar>(&self, e: usize) -> T {
        centrality_from_count(self.counts[e], self.n_terminals)
    }

    /// `(m_e (1 - m_e))^alpha`.
    #[inline]
    pub fn weight<T: Scalar>(&self, e: usize, alpha: T) -> T {
        self.centrality::<T>(e).powf(alpha)
    }

    pub fn weights<T: Scalar>(&self, alpha: T) -> Vec<T> {
        (0..self.counts.len()).map(|e| self.weight(e, alpha)).collect()
    }
}

#[inline]
pub(crate) fn centrality_from_count<T: Scalar>(count: usize, n: usize) -> T {
    debug_assert!(count >= 1 && count < n, "edge share {count}/{n} outside (0,1)");
    T::from_count(count * (n - count)) / T::from_count(n * n)
}

/// Terminal counts for a tree whose terminal ids are `0..n_terminals`; ids that
/// appear in no edge are ignored.
pub(crate) fn shares_for_edges(
    n_nodes: usize,
    edges: &[(usize, usize)],
    n_terminals: usize,
) -> Result<EdgeShares> {
    let rooted = RootedTree::new(n_nodes, edges, 0)?;
    let mut below = vec![0usize; n_nodes];
    let mut counts = vec![0usize; edges.len()];
    for &u in rooted.order.iter().rev() {
        if u < n_terminals {
            below[u] += 1;
        }
        let p = rooted.parent[u];
        if p != RootedTree::NONE {
            below[p] += below[u];
            counts[rooted.parent_edge[u]] = below[u];
        }
    }
    Ok(EdgeShares { n_terminals, counts })
}

pub fn compute_edge_shares<G: TreeShape>(tree: &G) -> Result<EdgeShares> {
    let shares = shares_for_edges(tree.n_nodes(), tree.edges(), tree.n_terminals())?;
    if shares.counts.len() + 1 != tree.n_nodes() {
        return Err(structural("edge list does not span all nodes"));
    }
    Ok(shares)
}

/// Interpolation exponent and the distance guard for coincident nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostParams<T> {
    pub alpha: T,
    pub epsilon_dist: T,
}

impl<T: Scalar> CostParams<T> {
    pub fn new(alpha: T) -> Self {
        Self { alpha, epsilon_dist: T::lit(1e-12) }
    }

    pub fn with_epsilon(alpha: T, epsilon_dist: T) -> Result<Self> {
        if !(epsilon_dist > T::zero()) {
            return Err(argument("epsilon_dist must be positive"));
        }
        Ok(Self { alpha, epsilon_dist })
    }
}

/// `sum_e w_e * length_e`; zero-length edges contribute nothing.
pub(crate) fn weighted_length<'a, T: Scalar>(
    coords: impl Fn(usize) -> &'a [T],
    edges: &[(usize, usize)],
    shares: &EdgeShares,
    alpha: T,
) -> T {
    let mut total = T::zero();
    for (e, &(u, v)) in edges.iter().enumerate() {
        let len = distance(coords(u), coords(v));
        if len > T::zero() {
            total += shares.weight(e, alpha) * len;
        }
    }
    total
}

fn check_points<T: Scalar>(points: &PointSet<T>, n_terminals: usize) -> Result<()> {
    if points.len() != n_terminals {
        return Err(structural(format!(
            "tree has {n_terminals} terminals but the point set has {}",
            points.len()
        )));
    }
    Ok(())
}

/// CST objective: `sum_e (m_e (1 - m_e))^alpha * ||x_u - x_v||`.
pub fn cst_cost<T: Scalar>(points: &PointSet<T>, topo: &Topology, params: &CostParams<T>) -> Result<T> {
    check_points(points, topo.n)?;
    let shares = compute_edge_shares(topo)?;
    Ok(weighted_length(|i| points.point(i), &topo.edges, &shares, params.alpha))
}

/// BCST objective over terminal and Steiner coordinates.
pub fn bcst_cost<T: Scalar>(
    points: &PointSet<T>,
    full: &FullTopology<T>,
    params: &CostParams<T>,
) -> Result<T> {
    check_points(points, full.n_terminals)?;
    if points.dim() != full.dim {
        return Err(structural("dimension mismatch between points and Steiner coordinates"));
    }
    let shares = compute_edge_shares(full)?;
    Ok(weighted_length(|i| full.node(points, i), &full.edges, &shares, params.alpha))
}

/// Plain sum of Euclidean edge lengths.
pub fn tree_length<T: Scalar>(points: &PointSet<T>, topo: &Topology) -> T {
    topo.edges.iter().map(|&(u, v)| points.dist(u, v)).sum()
}

pub fn full_tree_length<T: Scalar>(points: &PointSet<T>, full: &FullTopology<T>) -> T {
    (0..full.edges.len()).map(|e| full.edge_length(points, e)).sum()
}

/// Sum over unordered terminal pairs of their path length in the tree.
pub fn mrct_pairwise_sum<T: Scalar>(points: &PointSet<T>, topo: &Topology) -> Result<T> {
    check_points(points, topo.n)?;
    let n = topo.n;
    let adj = adjacency(n, &topo.edges);
    let mut total = T::zero();
    let mut dist = vec![T::zero(); n];
    let mut stack = Vec::with_capacity(n);
    let mut seen = vec![usize::MAX; n];
    for s in 0..n {
        dist[s] = T::zero();
        seen[s] = s;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if seen[v] != s {
                    seen[v] = s;
                    dist[v] = dist[u] + points.dist(u, v);
                    stack.push(v);
                }
            }
        }
        total += dist[s + 1..].iter().copied().sum::<T>();
    }
    Ok(total)
}

/// Which objective a solver or tree refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Cst,
    Bcst,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Cst => "cst",
            Mode::Bcst => "bcst",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cst" => Ok(Mode::Cst),
            "bcst" => Ok(Mode::Bcst),
            other => Err(argument(format!("unknown mode '{other}' (expected cst or bcst)"))),
        }
    }
}

/// A solution of either objective.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Tree<T> {
    Cst(Topology),
    Bcst(FullTopology<T>),
}

impl<T: Scalar> Tree<T> {
    pub fn mode(&self) -> Mode {
        match self {
            Tree::Cst(_) => Mode::Cst,
            Tree::Bcst(_) => Mode::Bcst,
        }
    }

    pub fn n_terminals(&self) -> usize {
        match self {
            Tree::Cst(t) => t.n,
            Tree::Bcst(f) => f.n_terminals,
        }
    }

    pub fn n_nodes(&self) -> usize {
        match self {
            Tree::Cst(t) => t.n,
            Tree::Bcst(f) => f.n_nodes(),
        }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        match self {
            Tree::Cst(t) => &t.edges,
            Tree::Bcst(f) => &f.edges,
        }
    }

    /// Coordinates of node `i` (terminal or Steiner).
    pub fn node<'a>(&'a self, points: &'a PointSet<T>, i: usize) -> &'a [T] {
        match self {
            Tree::Cst(_) => points.point(i),
            Tree::Bcst(f) => f.node(points, i),
        }
    }

    pub fn cost(&self, points: &PointSet<T>, params: &CostParams<T>) -> Result<T> {
        match self {
            Tree::Cst(t) => cst_cost(points, t, params),
            Tree::Bcst(f) => bcst_cost(points, f, params),
        }
    }

    pub fn shares(&self) -> Result<EdgeShares> {
        match self {
            Tree::Cst(t) => compute_edge_shares(t),
            Tree::Bcst(f) => compute_edge_shares(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointSet<f64> {
        PointSet::from_rows(&xs.iter().map(|&x| vec![x, 0.0]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn path_of_three_has_star_centrality() {
        let topo = Topology::path(&[0, 1, 2]).unwrap();
        let shares = compute_edge_shares(&topo).unwrap();
        for e in 0..2 {
            let c: f64 = shares.centrality(e);
            assert!((c - 2.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_terminals_split_in_half() {
        let topo = Topology::new(2, [(0, 1)]).unwrap();
        let shares = compute_edge_shares(&topo).unwrap();
        assert_eq!(shares.share::<f64>(0), 0.5);
        assert_eq!(shares.centrality::<f64>(0), 0.25);
    }

    #[test]
    fn full_topology_shares_by_hand() {
        // terminals 0..4, Steiner points 4 and 5: 4-{0,1,5}, 5-{2,3,4}
        let full = FullTopology::new(
            4,
            2,
            [(4, 0), (4, 1), (4, 5), (5, 2), (5, 3)],
            vec![0.0; 4],
        )
        .unwrap();
        let shares = compute_edge_shares(&full).unwrap();
        for (e, &(u, v)) in full.edges().iter().enumerate() {
            let expected = if (u, v) == (4, 5) { 2 } else { 1 };
            let c = shares.counts()[e];
            assert!(c == expected || c == 4 - expected, "edge ({u},{v}) count {c}");
        }
    }

    #[test]
    fn cst_cost_examples() {
        let p = line(&[0.0, 1.0]);
        let t = Topology::new(2, [(0, 1)]).unwrap();
        assert!((cst_cost(&p, &t, &CostParams::new(1.0)).unwrap() - 0.25).abs() < 1e-15);

        let p = line(&[0.0, 1.0, 2.0]);
        let t = Topology::path(&[0, 1, 2]).unwrap();
        assert!((cst_cost(&p, &t, &CostParams::new(1.0)).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert!((cst_cost(&p, &t, &CostParams::new(0.0)).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bcst_equilateral_steiner_tree() {
        let h = 3f64.sqrt() / 2.0;
        let p = PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]).unwrap();
        let full =
            FullTopology::new(3, 2, [(3, 0), (3, 1), (3, 2)], vec![0.5, h / 3.0]).unwrap();
        let c = bcst_cost(&p, &full, &CostParams::new(0.0)).unwrap();
        assert!((c - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn coincident_steiner_points_match_collapsed_cst() {
        let p = PointSet::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.3], vec![0.4, 1.5], vec![1.7, 1.9]])
            .unwrap();
        // Both Steiner points sit on terminal 0: collapsed tree is the star at 0.
        let mut steiner = p.point(0).to_vec();
        steiner.extend_from_slice(p.point(0));
        let full =
            FullTopology::new(4, 2, [(4, 0), (4, 1), (4, 5), (5, 2), (5, 3)], steiner).unwrap();
        let star = Topology::star(4, 0).unwrap();
        for alpha in [0.0f64, 0.3, 1.0] {
            let params = CostParams::new(alpha);
            let a = bcst_cost(&p, &full, &params).unwrap();
            let b = cst_cost(&p, &star, &params).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mrct_examples() {
        let p = line(&[0.0, 1.0, 2.0]);
        let t = Topology::path(&[0, 1, 2]).unwrap();
        assert!((mrct_pairwise_sum(&p, &t).unwrap() - 4.0).abs() < 1e-15);
        let p = line(&[0.0, 3.5]);
        let t = Topology::new(2, [(0, 1)]).unwrap();
        assert!((mrct_pairwise_sum(&p, &t).unwrap() - 3.5).abs() < 1e-15);
    }

    #[test]
    fn structural_errors() {
        assert!(Topology::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Topology::new(4, [(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(Topology::new(3, [(0, 0), (1, 2)]).is_err());
        assert!(FullTopology::<f64>::new(4, 2, [(4, 0), (4, 1), (4, 2), (4, 3), (5, 4)], vec![0.0; 4])
            .is_err());
        assert!(matches!(
            PointSet::from_flat(1, 2, vec![0.0, 0.0]),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            PointSet::from_flat(2, 1, vec![0.0, f64::NAN]),
            Err(Error::Numeric(_))
        ));
    }

    #[test]
    fn splits_ignore_steiner_labels() {
        let a = FullShape::new(4, [(4, 0), (4, 1), (4, 5), (5, 2), (5, 3)]).unwrap();
        let b = FullShape::new(4, [(5, 0), (5, 1), (4, 5), (4, 2), (4, 3)]).unwrap();
        let c = FullShape::new(4, [(4, 0), (4, 2), (4, 5), (5, 1), (5, 3)]).unwrap();
        assert_eq!(a.splits(), b.splits());
        assert_ne!(a.splits(), c.splits());
    }

    #[test]
    fn f32_cost_agrees_with_f64() {
        let p = line(&[0.0, 1.0, 2.0]);
        let t = Topology::path(&[0, 1, 2]).unwrap();
        let c32 = cst_cost(&p.cast::<f32>(), &t, &CostParams::new(1.0f32)).unwrap();
        assert!((c32 as f64 - 4.0 / 9.0).abs() < 1e-6);
    }
}
