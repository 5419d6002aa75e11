//! Counting the correspondence between CST topologies and full topologies.
//!
//! A full topology yields one CST topology per spanning forest in which every
//! component holds exactly one terminal (collapse each Steiner point into its
//! component's terminal). By the matrix-tree theorem their number is the
//! determinant of the Laplacian restricted to Steiner rows and columns.
//! Conversely, a CST topology spawns `prod (2 d_v - 3)!!` full topologies,
//! one per choice of binary local tree at each terminal of degree `d_v >= 2`.

use std::collections::HashSet;
use std::ops::Neg;

use num_bigint::{BigInt, BigUint};
use num_traits::{Num, One};

use crate::error::{argument, Result};
use crate::model::{FullShape, Topology, TreeShape};
use crate::oracle::all_full_shapes_unguarded;
use crate::topo::{glue, LocalTree, Reduced};

/// Exact determinant by fraction-free (Bareiss) elimination. Every division
/// is exact, so any integer type works.
pub fn bareiss_determinant<I>(mut m: Vec<Vec<I>>) -> I
where
    I: Num + Clone + Neg<Output = I>,
{
    let n = m.len();
    if n == 0 {
        return I::one();
    }
    assert!(m.iter().all(|r| r.len() == n), "matrix must be square");
    let mut sign = I::one();
    let mut prev = I::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return I::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[k][k].clone() * m[i][j].clone() - m[i][k].clone() * m[k][j].clone();
                m[i][j] = v / prev.clone();
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Laplacian of a full topology restricted to its Steiner points.
pub fn steiner_laplacian<G: TreeShape>(full: &G) -> Vec<Vec<i64>> {
    let n = full.n_terminals();
    let ns = full.n_nodes() - n;
    let mut l = vec![vec![0i64; ns]; ns];
    for &(u, v) in full.edges() {
        if u >= n {
            l[u - n][u - n] += 1;
        }
        if v >= n {
            l[v - n][v - n] += 1;
        }
        if u >= n && v >= n {
            l[u - n][v - n] -= 1;
            l[v - n][u - n] -= 1;
        }
    }
    l
}

/// Number of CST topologies derivable from a full topology.
pub fn count_derivable_cst<G: TreeShape>(full: &G) -> BigUint {
    let m: Vec<Vec<BigInt>> = steiner_laplacian(full)
        .into_iter()
        .map(|r| r.into_iter().map(BigInt::from).collect())
        .collect();
    bareiss_determinant(m).to_biguint().expect("Laplacian minors of a tree are positive")
}

/// `k!!` (1 for `k <= 1`).
pub fn double_factorial(k: u64) -> BigUint {
    let mut out = BigUint::one();
    let mut i = k;
    while i > 1 {
        out *= i;
        i -= 2;
    }
    out
}

/// Number of full topologies derivable from a CST topology.
pub fn count_derivable_full(topo: &Topology) -> BigUint {
    topo.degrees()
        .into_iter()
        .filter(|&d| d >= 2)
        .map(|d| double_factorial(2 * d as u64 - 3))
        .product()
}

pub const MAX_DERIVABLE_CST_TERMINALS: usize = 8;

/// All distinct CST topologies derivable from `full` by collapsing Steiner
/// points along a terminal-separating spanning forest.
pub fn enumerate_derivable_cst<G: TreeShape>(full: &G) -> Result<Vec<Topology>> {
    let n = full.n_terminals();
    if n > MAX_DERIVABLE_CST_TERMINALS {
        return Err(argument(format!(
            "derivable CST enumeration supports at most {MAX_DERIVABLE_CST_TERMINALS} terminals"
        )));
    }
    let n_nodes = full.n_nodes();
    let ns = n_nodes - n;
    let edges = full.edges();
    let mut nbrs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); ns];
    for (e, &(u, v)) in edges.iter().enumerate() {
        if u >= n {
            nbrs[u - n].push((v, e));
        }
        if v >= n {
            nbrs[v - n].push((u, e));
        }
    }
    // Each Steiner point points at one neighbour; the pointer graph is a
    // forest rooted at terminals iff following pointers never cycles.
    let mut choice = vec![0usize; ns];
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut root = vec![usize::MAX; n_nodes];
    loop {
        if let Some(r) = roots(n, &nbrs, &choice, &mut root) {
            let in_forest: HashSet<usize> = (0..ns).map(|s| nbrs[s][choice[s]].1).collect();
            let cst: Vec<(usize, usize)> = edges
                .iter()
                .enumerate()
                .filter(|(e, _)| !in_forest.contains(e))
                .map(|(_, &(u, v))| (r[u], r[v]))
                .collect();
            let t = Topology::new(n, cst)?;
            if seen.insert(t.clone()) {
                out.push(t);
            }
        }
        let mut i = 0;
        loop {
            if i == ns {
                return Ok(out);
            }
            choice[i] += 1;
            if choice[i] < nbrs[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Terminal reached from every node by following the chosen pointers, or
/// `None` if some pointer chain cycles.
fn roots<'a>(
    n: usize,
    nbrs: &[Vec<(usize, usize)>],
    choice: &[usize],
    root: &'a mut [usize],
) -> Option<&'a [usize]> {
    for (i, r) in root.iter_mut().enumerate() {
        *r = if i < n { i } else { usize::MAX };
    }
    let ns = nbrs.len();
    let mut path = Vec::with_capacity(ns);
    for s in 0..ns {
        let mut x = n + s;
        path.clear();
        while root[x] == usize::MAX {
            if path.len() > ns {
                return None;
            }
            path.push(x);
            x = nbrs[x - n][choice[x - n]].0;
        }
        let r = root[x];
        for &p in &path {
            root[p] = r;
        }
    }
    Some(root)
}

pub const MAX_DERIVABLE_FULL: u64 = 2_000_000;

/// All full topology shapes derivable from a CST topology: every combination
/// of binary local trees over `{v} ∪ N(v)` at each terminal of degree >= 2.
pub fn enumerate_derivable_full(topo: &Topology) -> Result<Vec<FullShape>> {
    let n = topo.n();
    let total = count_derivable_full(topo);
    if total > BigUint::from(MAX_DERIVABLE_FULL) {
        return Err(argument(format!("{total} derivable full topologies exceed the enumeration limit")));
    }
    let red = Reduced::new(n, n, topo.edges());
    let hubs = red.hubs();
    let options: Vec<Vec<LocalTree>> = hubs
        .iter()
        .map(|&x| {
            let l = red.adj[x].len() + 1;
            all_full_shapes_unguarded(l)
                .map(|s| LocalTree { n_leaves: l, edges: s.edges().to_vec() })
                .collect()
        })
        .collect();
    let mut pick = vec![0usize; hubs.len()];
    let mut out = Vec::new();
    loop {
        let locals: Vec<&LocalTree> = pick.iter().zip(&options).map(|(&i, o)| &o[i]).collect();
        let (edges, _) = glue(&red, &hubs, &locals);
        out.push(FullShape::new(n, edges)?);
        let mut i = 0;
        loop {
            if i == hubs.len() {
                return Ok(out);
            }
            pick[i] += 1;
            if pick[i] < options[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_steiner_points() -> FullShape {
        FullShape::new(4, [(4, 0), (4, 1), (4, 5), (5, 2), (5, 3)]).unwrap()
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(bareiss_determinant(vec![vec![3i64, -1], vec![-1, 3]]), 8);
        assert_eq!(bareiss_determinant(vec![vec![3i64]]), 3);
        assert_eq!(
            bareiss_determinant(vec![vec![3i64, -1, 0], vec![-1, 3, -1], vec![0, -1, 3]]),
            21
        );
        // Needs a row swap; det = -2.
        assert_eq!(bareiss_determinant(vec![vec![0i64, 1], vec![2, 0]]), -2);
        assert_eq!(bareiss_determinant(vec![vec![1i64, 2], vec![2, 4]]), 0);
        let big = vec![vec![BigInt::from(2), BigInt::from(1)], vec![BigInt::from(1), BigInt::from(2)]];
        assert_eq!(bareiss_determinant(big), BigInt::from(3));
    }

    #[test]
    fn two_steiner_point_counts() {
        let f = two_steiner_points();
        assert_eq!(steiner_laplacian(&f), vec![vec![3, -1], vec![-1, 3]]);
        assert_eq!(count_derivable_cst(&f), BigUint::from(8u32));
        assert_eq!(enumerate_derivable_cst(&f).unwrap().len(), 8);
    }

    #[test]
    fn three_terminals_give_every_tree() {
        let f = FullShape::new(3, [(3, 0), (3, 1), (3, 2)]).unwrap();
        assert_eq!(count_derivable_cst(&f), BigUint::from(3u32));
        let all = enumerate_derivable_cst(&f).unwrap();
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn caterpillar_five() {
        let f = FullShape::new(5, [(5, 0), (5, 1), (5, 6), (6, 2), (6, 7), (7, 3), (7, 4)]).unwrap();
        assert_eq!(count_derivable_cst(&f), BigUint::from(21u32));
        assert_eq!(enumerate_derivable_cst(&f).unwrap().len(), 21);
    }

    #[test]
    fn spawn_counts() {
        assert_eq!(count_derivable_full(&Topology::path(&[0, 1, 2, 3, 4]).unwrap()), BigUint::one());
        assert_eq!(count_derivable_full(&Topology::star(4, 0).unwrap()), BigUint::from(3u32));
        assert_eq!(count_derivable_full(&Topology::star(6, 2).unwrap()), BigUint::from(105u32));
        assert_eq!(double_factorial(7), BigUint::from(105u32));
        assert_eq!(double_factorial(0), BigUint::one());
    }

    #[test]
    fn derivable_full_enumeration_is_distinct() {
        let star = Topology::star(5, 0).unwrap();
        let all = enumerate_derivable_full(&star).unwrap();
        assert_eq!(all.len(), 15);
        let splits: HashSet<_> = all.iter().map(|s| s.splits()).collect();
        assert_eq!(splits.len(), 15);
        let path = Topology::path(&[3, 1, 0, 2]).unwrap();
        assert_eq!(enumerate_derivable_full(&path).unwrap().len(), 1);
    }
}
