//! Closed-form limit cases: the threshold functions that make stars optimal
//! for large `alpha` and paths optimal for very negative `alpha`.

use serde::Serialize;

use crate::error::{argument, Result};
use crate::geomopt::weighted_geometric_median;
use crate::model::{bcst_cost, cst_cost, CostParams, FullTopology, PointSet, Topology};
use crate::scalar::Scalar;

/// `((l (n - l) / (n - 1))^alpha - 1) / (l - 1)`.
pub fn h1<T: Scalar>(l: T, n: usize, alpha: T) -> Result<T> {
    if !(l > T::one()) {
        return Err(argument("h1 needs l > 1"));
    }
    let n = T::from_count(n);
    Ok(((l * (n - l) / (n - T::one())).powf(alpha) - T::one()) / (l - T::one()))
}

/// `((l (n - l))^alpha - ((l + s)(n - l - s))^alpha) / (s (n - s))^alpha`.
pub fn h2<T: Scalar>(l: T, s: T, n: usize, alpha: T) -> T {
    let n = T::from_count(n);
    ((l * (n - l)).powf(alpha) - ((l + s) * (n - l - s)).powf(alpha)) / (s * (n - s)).powf(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport<T> {
    pub n: usize,
    pub alpha_star: T,
    /// The `l = 2` and `l = n/2` candidates; `alpha_star` is their maximum.
    pub branch_values: [T; 2],
}

/// Exponent from which the optimal tree is a star.
pub fn alpha_star<T: Scalar>(n: usize) -> Result<ThresholdReport<T>> {
    if n < 4 {
        return Err(argument(format!("alpha_star needs n >= 4, got {n}")));
    }
    let one = T::one();
    let nf = T::from_count(n);
    let two = T::lit(2.0);
    let b1 = two.ln() / (one + (nf - T::lit(3.0)) / (nf - one)).ln();
    let half = nf / two;
    let b2 = half.ln() / (one + (half - one).powi(2) / (nf - one)).ln();
    Ok(ThresholdReport { n, alpha_star: b1.max(b2), branch_values: [b1, b2] })
}

fn triangle_check<T: Scalar>(costs: &[T], n: usize, t: T, strict: bool) -> bool {
    assert_eq!(costs.len(), n * n, "cost matrix must be n x n");
    for u in 0..n {
        for k in 0..n {
            if k == u {
                continue;
            }
            for v in 0..n {
                if v == u || v == k {
                    continue;
                }
                let lhs = costs[k * n + v] + t * costs[u * n + v];
                let rhs = costs[k * n + u];
                if lhs < rhs || (strict && lhs <= rhs) {
                    return false;
                }
            }
        }
    }
    true
}

/// `c_kv + t c_uv >= c_ku` for every triple of distinct nodes (row-major
/// `n x n` matrix).
pub fn strong_triangle_holds<T: Scalar>(costs: &[T], n: usize, t: T) -> bool {
    triangle_check(costs, n, t, false)
}

/// Strict version of [`strong_triangle_holds`].
pub fn strong_triangle_holds_strictly<T: Scalar>(costs: &[T], n: usize, t: T) -> bool {
    triangle_check(costs, n, t, true)
}

/// Index of the terminal minimizing the summed distance to all others.
/// Sums within a relative 1e-12 count as ties, which go to the lowest index.
pub fn medoid<T: Scalar>(points: &PointSet<T>) -> usize {
    let n = points.len();
    let sums: Vec<T> = (0..n).map(|u| (0..n).map(|v| points.dist(u, v)).sum()).collect();
    let min = sums.iter().copied().fold(T::infinity(), T::min);
    let slack = T::lit(1e-12) * min.abs().max(T::one());
    sums.iter().position(|&s| s <= min + slack).expect("non-empty point set")
}

/// Star centered at the medoid, with its CST cost.
pub fn medoid_star<T: Scalar>(points: &PointSet<T>, params: &CostParams<T>) -> Result<(Topology, T)> {
    let star = Topology::star(points.len(), medoid(points))?;
    let cost = cst_cost(points, &star, params)?;
    Ok((star, cost))
}

/// Unweighted geometric median of the terminals.
pub fn geometric_median<T: Scalar>(points: &PointSet<T>) -> Result<Vec<T>> {
    let anchors: Vec<(&[T], T)> = points.rows().map(|p| (p, T::one())).collect();
    weighted_geometric_median(&anchors)
}

/// Full topology with every Steiner point at the geometric median (a star
/// in disguise), with its BCST cost. The Steiner points form a chain:
/// the first holds terminals 0 and 1, the last the final two, and each one
/// in between a single terminal.
pub fn geometric_median_star<T: Scalar>(
    points: &PointSet<T>,
    params: &CostParams<T>,
) -> Result<(FullTopology<T>, T)> {
    let n = points.len();
    if n < 3 {
        return Err(argument("a geometric-median star needs at least 3 terminals"));
    }
    let median = geometric_median(points)?;
    let ns = n - 2;
    let mut edges = vec![(n, 0), (n, 1), (n + ns - 1, n - 2), (n + ns - 1, n - 1)];
    for k in 1..ns.saturating_sub(1) {
        edges.push((n + k, k + 1));
    }
    for k in 0..ns - 1 {
        edges.push((n + k, n + k + 1));
    }
    if ns == 1 {
        edges = vec![(n, 0), (n, 1), (n, 2)];
    }
    let steiner = median.iter().copied().cycle().take(ns * points.dim()).collect();
    let full = FullTopology::new(n, points.dim(), edges, steiner)?;
    let cost = bcst_cost(points, &full, params)?;
    Ok((full, cost))
}
