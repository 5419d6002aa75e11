//! Graph and topology plumbing: kNN graphs, Kruskal, random spanning trees,
//! conversion of arbitrary trees into full topologies and the reverse
//! collapse of Steiner points.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{argument, structural, Result};
use crate::geomopt::weighted_geometric_median;
use crate::model::{
    shares_for_edges, weighted_length, CostParams, FullTopology, PointSet, Topology,
};
use crate::scalar::{distance, Scalar};

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    pub n: usize,
    pub edges: Vec<(usize, usize, T)>,
}

impl<T: Scalar> WeightedGraph<T> {
    pub fn complete(points: &PointSet<T>) -> Self {
        let n = points.len();
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v, points.dist(u, v)));
            }
        }
        Self { n, edges }
    }

    pub fn is_connected(&self) -> bool {
        let mut dsu = Dsu::new(self.n);
        let mut parts = self.n;
        for &(u, v, _) in &self.edges {
            if dsu.union(u, v) {
                parts -= 1;
            }
        }
        parts == 1
    }
}

pub fn default_knn_k(n: usize) -> usize {
    let k = ((n as f64).ln().ceil() as usize).max(3);
    k.min(n.saturating_sub(1)).max(1)
}

/// Symmetric k-nearest-neighbor graph (brute force, exact).
pub fn knn_graph<T: Scalar>(points: &PointSet<T>, k: usize) -> Result<WeightedGraph<T>> {
    let n = points.len();
    if k == 0 || k >= n {
        return Err(argument(format!("k must lie in 1..{n}, got {k}")));
    }
    let mut set = BTreeSet::new();
    let mut cand: Vec<(T, usize)> = Vec::with_capacity(n - 1);
    for u in 0..n {
        cand.clear();
        cand.extend((0..n).filter(|&v| v != u).map(|v| (points.dist(u, v), v)));
        cand.sort_by(|a, b| cmp_scalar(a.0, b.0).then(a.1.cmp(&b.1)));
        for &(_, v) in &cand[..k] {
            set.insert((u.min(v), u.max(v)));
        }
    }
    let edges = set.into_iter().map(|(u, v)| (u, v, points.dist(u, v))).collect();
    Ok(WeightedGraph { n, edges })
}

/// Adds the closest cross pair between components until the graph is connected.
pub fn repair_connectivity<T: Scalar>(points: &PointSet<T>, g: &mut WeightedGraph<T>) {
    loop {
        let mut dsu = Dsu::new(g.n);
        for &(u, v, _) in &g.edges {
            dsu.union(u, v);
        }
        let comp: Vec<usize> = (0..g.n).map(|i| dsu.find(i)).collect();
        let mut best: Option<(T, usize, usize)> = None;
        let first = comp[0];
        // Join the component of node 0 with its nearest outside node.
        for u in (0..g.n).filter(|&u| comp[u] == first) {
            for v in (0..g.n).filter(|&v| comp[v] != first) {
                let d = points.dist(u, v);
                if best.is_none_or(|(bd, bu, bv)| (d, u.min(v), u.max(v)) < (bd, bu, bv)) {
                    best = Some((d, u.min(v), u.max(v)));
                }
            }
        }
        match best {
            Some((d, u, v)) => g.edges.push((u, v, d)),
            None => return,
        }
    }
}

fn cmp_scalar<T: Scalar>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

/// Kruskal; ties are broken by `(length, min endpoint, max endpoint)`.
pub fn minimum_spanning_tree<T: Scalar>(g: &WeightedGraph<T>) -> Result<Topology> {
    let mut order: Vec<(T, usize, usize)> =
        g.edges.iter().map(|&(u, v, w)| (w, u.min(v), u.max(v))).collect();
    order.sort_by(|a, b| cmp_scalar(a.0, b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut dsu = Dsu::new(g.n);
    let mut edges = Vec::with_capacity(g.n.saturating_sub(1));
    for (_, u, v) in order {
        if dsu.union(u, v) {
            edges.push((u, v));
            if edges.len() + 1 == g.n {
                break;
            }
        }
    }
    if edges.len() + 1 != g.n {
        return Err(structural("graph is disconnected; no spanning tree exists"));
    }
    Topology::new(g.n, edges)
}

/// Minimum spanning tree of a point cloud: exact over the complete graph for
/// small inputs, over a repaired kNN graph from 64 points on.
pub fn mst_over_points<T: Scalar>(points: &PointSet<T>) -> Result<Topology> {
    let n = points.len();
    let g = if n >= 64 {
        let mut g = knn_graph(points, default_knn_k(n))?;
        repair_connectivity(points, &mut g);
        g
    } else {
        WeightedGraph::complete(points)
    };
    minimum_spanning_tree(&g)
}

/// Random spanning tree: edges are drawn without replacement with
/// probability proportional to `exp(-mu * length)` and kept when they join
/// two components.
pub fn karger_random_tree<T: Scalar, R: Rng + ?Sized>(
    points: &PointSet<T>,
    mu: T,
    rng: &mut R,
) -> Result<Topology> {
    if !mu.is_finite() || mu < T::zero() {
        return Err(argument("mu must be finite and nonnegative"));
    }
    let n = points.len();
    // Exponential race: ascending E / w with E ~ Exp(1) is a weighted
    // sampling order; compare in log space to avoid underflow.
    let mut keys: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    let mu = mu.as_f64();
    for u in 0..n {
        for v in u + 1..n {
            let e: f64 = -(1.0 - rng.gen::<f64>()).ln();
            keys.push((e.ln() + mu * points.dist(u, v).as_f64(), u, v));
        }
    }
    keys.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut dsu = Dsu::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    for (_, u, v) in keys {
        if dsu.union(u, v) {
            edges.push((u, v));
            if edges.len() + 1 == n {
                break;
            }
        }
    }
    Topology::new(n, edges)
}

/// Unrooted binary tree on `L` leaves in full-topology numbering: leaves are
/// `0..L`, inner nodes `L..2L-2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LocalTree {
    pub n_leaves: usize,
    pub edges: Vec<(usize, usize)>,
}

/// Local tree from single-linkage clustering of `leaves`. Merge ties go to
/// the pair with smaller representatives (minimum leaf index). Each merge but
/// the last creates an inner node halfway between `hub` and the midpoint of
/// the two cluster centroids; the last merge joins the two remaining stubs
/// directly.
pub(crate) fn single_linkage_tree<T: Scalar>(hub: &[T], leaves: &[&[T]]) -> (LocalTree, Vec<Vec<T>>) {
    let l = leaves.len();
    let d = leaves.first().map_or(0, |x| x.len());
    let mut dist = vec![T::zero(); l * l];
    for i in 0..l {
        for j in i + 1..l {
            let v = distance(leaves[i], leaves[j]);
            dist[i * l + j] = v;
            dist[j * l + i] = v;
        }
    }
    // Slot i holds a live cluster; `rep` is the minimum leaf index.
    let mut alive = vec![true; l];
    let mut rep: Vec<usize> = (0..l).collect();
    let mut node: Vec<usize> = (0..l).collect();
    let mut size = vec![1usize; l];
    let mut sum: Vec<Vec<T>> = leaves.iter().map(|x| x.to_vec()).collect();
    let mut edges = Vec::with_capacity(l.saturating_sub(1) * 2);
    let mut inner = Vec::new();
    for _ in 0..l.saturating_sub(1) {
        let mut best: Option<(T, usize, usize, usize, usize)> = None;
        for a in (0..l).filter(|&a| alive[a]) {
            for b in (0..l).filter(|&b| alive[b] && rep[b] > rep[a]) {
                let key = (dist[a * l + b], rep[a], rep[b], a, b);
                let better = match best {
                    None => true,
                    Some(cur) => {
                        cmp_scalar(key.0, cur.0).then((key.1, key.2).cmp(&(cur.1, cur.2)))
                            == Ordering::Less
                    }
                };
                if better {
                    best = Some(key);
                }
            }
        }
        let (_, _, _, a, b) = best.expect("at least two clusters remain");
        if alive.iter().filter(|&&x| x).count() == 2 {
            edges.push((node[a], node[b]));
            break;
        }
        let id = l + inner.len();
        edges.push((id, node[a]));
        edges.push((id, node[b]));
        let two = T::lit(2.0);
        let mid: Vec<T> = (0..d)
            .map(|k| {
                let m = (sum[a][k] / T::from_count(size[a]) + sum[b][k] / T::from_count(size[b])) / two;
                (hub[k] + m) / two
            })
            .collect();
        inner.push(mid);
        let add = sum[b].clone();
        sum[a].iter_mut().zip(add).for_each(|(x, y)| *x += y);
        size[a] += size[b];
        rep[a] = rep[a].min(rep[b]);
        node[a] = id;
        alive[b] = false;
        for c in 0..l {
            let m = dist[a * l + c].min(dist[b * l + c]);
            dist[a * l + c] = m;
            dist[c * l + a] = m;
        }
    }
    (LocalTree { n_leaves: l, edges }, inner)
}

/// Tree with non-terminal leaves pruned and non-terminal degree-2 nodes
/// suppressed. Terminals keep any degree; non-terminals end with degree >= 3.
pub(crate) struct Reduced {
    pub n_terminals: usize,
    /// Sorted neighbor lists; empty for removed nodes.
    pub adj: Vec<BTreeSet<usize>>,
}

impl Reduced {
    pub fn new(n_terminals: usize, n_nodes: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![BTreeSet::new(); n_nodes];
        for &(u, v) in edges {
            adj[u].insert(v);
            adj[v].insert(u);
        }
        let mut stack: Vec<usize> = (n_terminals..n_nodes).collect();
        while let Some(x) = stack.pop() {
            match adj[x].len() {
                1 => {
                    let u = *adj[x].iter().next().unwrap();
                    adj[u].remove(&x);
                    adj[x].clear();
                    if u >= n_terminals {
                        stack.push(u);
                    }
                }
                2 => {
                    let mut it = adj[x].iter();
                    let (a, b) = (*it.next().unwrap(), *it.next().unwrap());
                    adj[a].remove(&x);
                    adj[b].remove(&x);
                    adj[a].insert(b);
                    adj[b].insert(a);
                    adj[x].clear();
                }
                _ => {}
            }
        }
        Self { n_terminals, adj }
    }

    pub fn is_hub(&self, x: usize) -> bool {
        let deg = self.adj[x].len();
        if x < self.n_terminals {
            deg >= 2
        } else {
            deg >= 4
        }
    }

    /// Leaf order of the local tree at hub `x`: the terminal itself first
    /// (terminal hubs only), then its neighbors ascending.
    pub fn hub_leaves(&self, x: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.adj[x].len() + 1);
        if x < self.n_terminals {
            out.push(x);
        }
        out.extend(self.adj[x].iter().copied());
        out
    }

    pub fn hubs(&self) -> Vec<usize> {
        (0..self.adj.len()).filter(|&x| self.is_hub(x)).collect()
    }

    /// Kept non-terminals of degree exactly three.
    pub fn kept_steiner(&self) -> Vec<usize> {
        (self.n_terminals..self.adj.len()).filter(|&x| self.adj[x].len() == 3).collect()
    }
}

/// Where a Steiner point of a glued full topology came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SteinerSource {
    Kept(usize),
    Inner { hub: usize, k: usize },
}

/// Replaces every hub of `red` by its local tree (`locals[i]` belongs to
/// `hubs[i]`) and relabels Steiner points to `N..`. Returns the edge list
/// and the origin of each Steiner point.
pub(crate) fn glue(
    red: &Reduced,
    hubs: &[usize],
    locals: &[&LocalTree],
) -> (Vec<(usize, usize)>, Vec<SteinerSource>) {
    let n = red.n_terminals;
    let n_nodes = red.adj.len();
    let mut sources = Vec::new();
    let mut label = vec![usize::MAX; n_nodes];
    for x in red.kept_steiner() {
        label[x] = n + sources.len();
        sources.push(SteinerSource::Kept(x));
    }
    // port[x] maps neighbor u to the node that carries x's end of edge (x,u).
    let mut port: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_nodes];
    let mut edges = Vec::new();
    for (h, (&x, local)) in hubs.iter().zip(locals).enumerate() {
        let leaves = red.hub_leaves(x);
        let l = local.n_leaves;
        debug_assert_eq!(l, leaves.len());
        let base = n + sources.len();
        for k in 0..l - 2 {
            sources.push(SteinerSource::Inner { hub: h, k });
        }
        let global = |i: usize| if i < l { leaves[i] } else { base + (i - l) };
        for &(a, b) in &local.edges {
            let (a, b) = if a < l || b >= l { (a, b) } else { (b, a) };
            match (a < l, b < l) {
                (true, false) if leaves[a] == x => edges.push((x, global(b))),
                (true, false) => port[x].push((leaves[a], global(b))),
                (false, false) => edges.push((global(a), global(b))),
                _ => unreachable!("local trees on 3+ leaves never join two leaves"),
            }
        }
    }
    let port_of = |x: usize, u: usize| -> usize {
        if red.is_hub(x) {
            port[x].iter().find(|p| p.0 == u).expect("hub port").1
        } else if x < n {
            x
        } else {
            label[x]
        }
    };
    for x in 0..n_nodes {
        for &u in &red.adj[x] {
            if x < u {
                edges.push((port_of(x, u), port_of(u, x)));
            }
        }
    }
    (edges, sources)
}

/// Converts a tree over terminals `0..N` plus extra nodes `N..` (coordinates
/// in `extra`, row-major) into a full topology. Extra leaves are pruned,
/// degree-2 extras suppressed, degree-3 extras kept as Steiner points, and
/// every other branching node is resolved by single-linkage clustering of
/// itself (if a terminal) and its neighbors.
pub fn full_topology_from_tree<T: Scalar>(
    points: &PointSet<T>,
    extra: &[T],
    edges: &[(usize, usize)],
) -> Result<FullTopology<T>> {
    let n = points.len();
    let d = points.dim();
    if !extra.len().is_multiple_of(d) {
        return Err(argument("extra coordinates are not a multiple of the dimension"));
    }
    let n_nodes = n + extra.len() / d;
    crate::model::check_spanning_tree(n_nodes, edges)?;
    if n == 2 {
        return Ok(FullTopology::single_edge(d));
    }
    let coord = |i: usize| -> &[T] {
        if i < n {
            points.point(i)
        } else {
            &extra[(i - n) * d..(i - n + 1) * d]
        }
    };
    let red = Reduced::new(n, n_nodes, edges);
    let hubs = red.hubs();
    let mut locals = Vec::with_capacity(hubs.len());
    let mut inner_coords = Vec::with_capacity(hubs.len());
    for &x in &hubs {
        let leaves: Vec<&[T]> = red.hub_leaves(x).into_iter().map(coord).collect();
        let (local, inner) = single_linkage_tree(coord(x), &leaves);
        locals.push(local);
        inner_coords.push(inner);
    }
    let refs: Vec<&LocalTree> = locals.iter().collect();
    let (full_edges, sources) = glue(&red, &hubs, &refs);
    let mut steiner = Vec::with_capacity(sources.len() * d);
    for s in &sources {
        match *s {
            SteinerSource::Kept(x) => steiner.extend_from_slice(coord(x)),
            SteinerSource::Inner { hub, k } => steiner.extend_from_slice(&inner_coords[hub][k]),
        }
    }
    FullTopology::new(n, d, full_edges, steiner)
}

/// Full topology derived from a terminal-only tree (see
/// [`full_topology_from_tree`]).
pub fn spawn_full_topology<T: Scalar>(points: &PointSet<T>, topo: &Topology) -> Result<FullTopology<T>> {
    if topo.n() != points.len() {
        return Err(structural("topology and point set differ in size"));
    }
    full_topology_from_tree(points, &[], topo.edges())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CollapseOrder {
    /// Steiner point nearest to any of its neighbors first.
    #[default]
    Closest,
    /// Steiner point nearest to an adjacent terminal first.
    ClosestTerminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CollapseTarget {
    /// Neighbor whose merge increases the CST cost least.
    #[default]
    Greedy,
    Closest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapsePolicy {
    pub order: CollapseOrder,
    pub target: CollapseTarget,
    /// Move an absorbing Steiner point to the weighted geometric median of
    /// its new neighborhood.
    pub update: bool,
}

impl Default for CollapsePolicy {
    fn default() -> Self {
        Self { order: CollapseOrder::Closest, target: CollapseTarget::Greedy, update: true }
    }
}

/// Collapses Steiner points one at a time into neighbors until only
/// terminals remain.
pub fn collapse_to_cst<T: Scalar>(
    points: &PointSet<T>,
    full: &FullTopology<T>,
    params: &CostParams<T>,
    policy: CollapsePolicy,
) -> Result<Topology> {
    let n = full.n_terminals();
    let d = points.dim();
    if points.len() != n || d != full.dim() {
        return Err(structural("point set does not match the full topology"));
    }
    let n_nodes = full.n_nodes();
    let mut coords = points.coords().to_vec();
    coords.extend_from_slice(full.steiner_coords());
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_nodes];
    for &(u, v) in full.edges() {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    let dist = |c: &[T], a: usize, b: usize| distance(&c[a * d..(a + 1) * d], &c[b * d..(b + 1) * d]);
    let edge_list = |adj: &[BTreeSet<usize>]| -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(n_nodes);
        for (x, nb) in adj.iter().enumerate() {
            out.extend(nb.range(x + 1..).map(|&y| (x, y)));
        }
        out
    };
    let mut alive: Vec<bool> = (0..n_nodes).map(|i| i >= n).collect();

    for _ in 0..full.n_steiner() {
        let mut pick: Option<(T, usize)> = None;
        for s in (n..n_nodes).filter(|&s| alive[s]) {
            let key = adj[s]
                .iter()
                .filter(|&&u| policy.order == CollapseOrder::Closest || u < n)
                .map(|&u| dist(&coords, s, u))
                .fold(T::infinity(), T::min);
            if pick.is_none_or(|(k, _)| key < k) {
                pick = Some((key, s));
            }
        }
        let (_, s) = pick.expect("a live Steiner point remains");
        let nb: Vec<usize> = adj[s].iter().copied().collect();
        let mut best = (T::infinity(), usize::MAX);
        match policy.target {
            CollapseTarget::Closest => {
                for &t in &nb {
                    let dd = dist(&coords, s, t);
                    if dd < best.0 || best.1 == usize::MAX {
                        best = (dd, t);
                    }
                }
            }
            CollapseTarget::Greedy => {
                let current = edge_list(&adj);
                for &t in &nb {
                    let cand: Vec<(usize, usize)> = current
                        .iter()
                        .filter(|&&(u, v)| !((u == s && v == t) || (u == t && v == s)))
                        .map(|&(u, v)| (if u == s { t } else { u }, if v == s { t } else { v }))
                        .collect();
                    let shares = shares_for_edges(n_nodes, &cand, n)?;
                    let c = weighted_length(|i| &coords[i * d..(i + 1) * d], &cand, &shares, params.alpha);
                    if c < best.0 || best.1 == usize::MAX {
                        best = (c, t);
                    }
                }
            }
        }
        let t = best.1;
        for &u in &nb {
            adj[u].remove(&s);
            if u != t {
                adj[u].insert(t);
                adj[t].insert(u);
            }
        }
        adj[s].clear();
        alive[s] = false;
        if policy.update && t >= n {
            let edges = edge_list(&adj);
            let shares = shares_for_edges(n_nodes, &edges, n)?;
            let mut anchors_owned = Vec::with_capacity(adj[t].len());
            for (e, &(u, v)) in edges.iter().enumerate() {
                let other = if u == t {
                    v
                } else if v == t {
                    u
                } else {
                    continue;
                };
                anchors_owned.push((coords[other * d..(other + 1) * d].to_vec(), shares.weight::<T>(e, params.alpha)));
            }
            let anchors: Vec<(&[T], T)> = anchors_owned.iter().map(|(p, w)| (&p[..], *w)).collect();
            let m = weighted_geometric_median(&anchors)?;
            coords[t * d..(t + 1) * d].copy_from_slice(&m);
        }
    }
    Topology::new(n, edge_list(&adj))
}

/// Interior points along every edge: `f - 2` equally spaced points per edge
/// (row-major). `f = 2` yields nothing, `f = 3` the midpoints.
pub fn sample_edge_points<T: Scalar>(
    points: &PointSet<T>,
    full: &FullTopology<T>,
    sampling_frequency: usize,
) -> Result<Vec<T>> {
    if sampling_frequency < 2 {
        return Err(argument("sampling frequency must be at least 2"));
    }
    let per_edge = sampling_frequency - 2;
    let mut out = Vec::with_capacity(full.edges().len() * per_edge * points.dim());
    let denom = T::from_count(sampling_frequency - 1);
    for &(u, v) in full.edges() {
        let (a, b) = (full.node(points, u), full.node(points, v));
        for k in 1..=per_edge {
            let t = T::from_count(k) / denom;
            out.extend(a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)));
        }
    }
    Ok(out)
}
