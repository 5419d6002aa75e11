//! Perturbation stability, tree distances and benchmark helpers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{argument, Result};
use crate::model::{adjacency, mrct_pairwise_sum, CostParams, Mode, PointSet, Topology, Tree};
use crate::mstreg::{mstreg_solve, MstregConfig};
use crate::scalar::{distance, Scalar};

/// Terminal-by-terminal path lengths through the tree, row-major.
pub fn tree_distance_matrix<T: Scalar>(points: &PointSet<T>, tree: &Tree<T>) -> Result<Vec<T>> {
    let n = tree.n_terminals();
    if points.len() != n {
        return Err(argument("point count does not match the tree"));
    }
    let m = tree.n_nodes();
    let adj = adjacency(m, tree.edges());
    let mut out = vec![T::zero(); n * n];
    let mut dist = vec![T::zero(); m];
    let mut seen = vec![usize::MAX; m];
    let mut stack = Vec::with_capacity(m);
    for s in 0..n {
        dist[s] = T::zero();
        seen[s] = s;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if seen[v] != s {
                    seen[v] = s;
                    dist[v] = dist[u] + distance(tree.node(points, u), tree.node(points, v));
                    stack.push(v);
                }
            }
        }
        out[s * n..(s + 1) * n].copy_from_slice(&dist[..n]);
    }
    Ok(out)
}

/// Frobenius norm of the difference of the two trees' terminal distance
/// matrices (both triangles), each measured in its own point set.
pub fn tree_distance_frobenius<T: Scalar>(
    points_a: &PointSet<T>,
    tree_a: &Tree<T>,
    points_b: &PointSet<T>,
    tree_b: &Tree<T>,
) -> Result<T> {
    if tree_a.n_terminals() != tree_b.n_terminals() {
        return Err(argument("trees span different numbers of terminals"));
    }
    let da = tree_distance_matrix(points_a, tree_a)?;
    let db = tree_distance_matrix(points_b, tree_b)?;
    Ok(da.iter().zip(&db).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt())
}

/// Adds i.i.d. `N(0, sigma^2)` noise to every coordinate. Also returns the
/// mean displacement of the points.
pub fn perturb_gaussian<T: Scalar, R: Rng + ?Sized>(
    points: &PointSet<T>,
    sigma: T,
    rng: &mut R,
) -> Result<(PointSet<T>, T)> {
    if !(sigma >= T::zero()) || !sigma.is_finite() {
        return Err(argument("sigma must be finite and nonnegative"));
    }
    let normal = Normal::new(0.0, sigma.as_f64()).map_err(|e| argument(e.to_string()))?;
    let coords: Vec<T> = points.coords().iter().map(|&x| x + T::lit(normal.sample(rng))).collect();
    let out = PointSet::from_flat(points.len(), points.dim(), coords)?;
    let moved = (0..points.len()).map(|i| distance(points.point(i), out.point(i))).sum::<T>();
    let mean = if points.is_empty() { T::zero() } else { moved / T::from_count(points.len()) };
    Ok((out, mean))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityRow<T> {
    pub alpha: T,
    pub mean_frobenius: T,
    /// Mean total Euclidean length of the perturbed solutions.
    pub mean_cost: T,
    /// Mean point displacement of the perturbations.
    pub mean_displacement: T,
}

fn solve_tree<T: Scalar>(points: &PointSet<T>, alpha: T, mode: Mode, cfg: &MstregConfig<T>) -> Result<Tree<T>> {
    let cfg = MstregConfig { optimize_cst: mode == Mode::Cst, ..cfg.clone() };
    let r = mstreg_solve(points, &CostParams::new(alpha), &cfg)?;
    Ok(match mode {
        Mode::Bcst => Tree::Bcst(r.best_full),
        Mode::Cst => Tree::Cst(r.best_cst.expect("optimize_cst is set").0),
    })
}

fn tree_length<T: Scalar>(points: &PointSet<T>, tree: &Tree<T>) -> T {
    tree.edges().iter().map(|&(u, v)| distance(tree.node(points, u), tree.node(points, v))).sum()
}

/// For each alpha: solve the original and `trials` perturbed copies with
/// mSTreg and report mean Frobenius distance and mean tree length. Trial
/// `k` uses the same perturbation for every alpha.
pub fn stability_experiment<T: Scalar>(
    points: &PointSet<T>,
    alphas: &[T],
    sigma: T,
    trials: usize,
    mode: Mode,
    cfg: &MstregConfig<T>,
    seed: u64,
) -> Result<Vec<StabilityRow<T>>> {
    if trials == 0 {
        return Err(argument("trials must be at least 1"));
    }
    let perturbed = (0..trials)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            perturb_gaussian(points, sigma, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let count = T::from_count(trials);
    let mut rows = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let base = solve_tree(points, alpha, mode, cfg)?;
        let (mut frob, mut len, mut disp) = (T::zero(), T::zero(), T::zero());
        for (p, d) in &perturbed {
            let t = solve_tree(p, alpha, mode, cfg)?;
            frob += tree_distance_frobenius(points, &base, p, &t)?;
            len += tree_length(p, &t);
            disp += *d;
        }
        log::info!("stability alpha {alpha}: frobenius {}", frob / count);
        rows.push(StabilityRow {
            alpha,
            mean_frobenius: frob / count,
            mean_cost: len / count,
            mean_displacement: disp / count,
        });
    }
    Ok(rows)
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties. `None` when
/// either side is constant or the lengths differ or are below 2.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let mean = (x.len() as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean) * (a - mean);
        syy += (b - mean) * (b - mean);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Star at the terminal nearest the centroid (lowest index on ties) and its
/// sum of pairwise routing distances.
pub fn centroid_star_baseline<T: Scalar>(points: &PointSet<T>) -> Result<(Topology, T)> {
    if points.len() < 2 {
        return Err(argument("need at least 2 points"));
    }
    let c = points.centroid();
    let mut center = 0;
    let mut best = T::infinity();
    for (i, p) in points.rows().enumerate() {
        let d = distance(p, &c);
        if d < best {
            best = d;
            center = i;
        }
    }
    let star = Topology::star(points.len(), center)?;
    let cost = mrct_pairwise_sum(points, &star)?;
    Ok((star, cost))
}

/// `100 (cost - reference) / reference`.
pub fn relative_error<T: Scalar>(cost: T, reference: T) -> Result<T> {
    if !(reference > T::zero()) {
        return Err(argument("reference cost must be positive"));
    }
    Ok(T::lit(100.0) * (cost - reference) / reference)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointSet<f64> {
        PointSet::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn frobenius_collinear_example() {
        let p = line(&[0.0, 1.0, 2.0]);
        let path = Tree::Cst(Topology::path(&[0, 1, 2]).unwrap());
        let star = Tree::Cst(Topology::star(3, 0).unwrap());
        // Only d(1,2) changes, 1 -> 3, in both triangles.
        let f = tree_distance_frobenius(&p, &path, &p, &star).unwrap();
        assert!((f - 8f64.sqrt()).abs() < 1e-15);
        assert_eq!(tree_distance_frobenius(&p, &path, &p, &path).unwrap(), 0.0);
        let shifted = line(&[5.0, 6.0, 7.0]);
        assert_eq!(tree_distance_frobenius(&p, &path, &shifted, &path).unwrap(), 0.0);
    }

    #[test]
    fn spearman_basics() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 2.0], &[1.0, 1.0]), None);
        // Ties take average ranks: ry = [1.5, 1.5, 3].
        let r = spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 6.0]).unwrap();
        assert!((r - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(2.0, 2.0).unwrap(), 0.0);
        assert!((relative_error(1.01 * 3.0, 3.0).unwrap() - 1.0f64).abs() < 1e-12);
        assert!(relative_error(1.0, 0.0).is_err());
    }

    #[test]
    fn centroid_star_square_and_pair() {
        let sq = PointSet::<f64>::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(centroid_star_baseline(&sq).unwrap().0, Topology::star(4, 0).unwrap());
        let two = PointSet::<f64>::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(centroid_star_baseline(&two).unwrap().1, 5.0);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let p = line(&[0.0, 1.0, 4.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (q, d) = perturb_gaussian(&p, 0.0, &mut rng).unwrap();
        assert_eq!(q, p);
        assert_eq!(d, 0.0);
    }
}
