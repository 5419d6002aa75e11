//! mSTreg: alternate Steiner point optimization with a minimum spanning tree
//! recomputed over terminals, Steiner points and points sampled along edges.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{argument, Result};
use crate::geomopt::{irls_optimize, IrlsConfig};
use crate::model::{bcst_cost, cst_cost, tree_length, CostParams, FullTopology, PointSet, Topology};
use crate::scalar::Scalar;
use crate::topo::{
    collapse_to_cst, full_topology_from_tree, karger_random_tree, mst_over_points, sample_edge_points,
    spawn_full_topology, CollapsePolicy,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum MstregInit<T> {
    Mst,
    /// Random tree with edge kernel `exp(-mu * length)`; `None` uses the
    /// inverse mean edge length of the terminal mST.
    RandomKarger { mu: Option<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MstregConfig<T> {
    pub num_iterations: usize,
    pub sampling_frequency: usize,
    /// Also collapse every iterate to a CST and track the best one.
    pub optimize_cst: bool,
    pub collapse_policy: CollapsePolicy,
    pub irls: IrlsConfig<T>,
    pub seed: u64,
    pub init: MstregInit<T>,
}

impl<T: Scalar> Default for MstregConfig<T> {
    fn default() -> Self {
        Self {
            num_iterations: 20,
            sampling_frequency: 3,
            optimize_cst: true,
            collapse_policy: CollapsePolicy::default(),
            irls: IrlsConfig::default(),
            seed: 0,
            init: MstregInit::Mst,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport<T> {
    pub best_full: FullTopology<T>,
    pub best_full_cost: T,
    pub best_cst: Option<(Topology, T)>,
    /// BCST cost of every iterate; entry 0 is the initial tree.
    pub bcst_costs: Vec<T>,
    /// CST cost of every collapsed iterate (empty unless `optimize_cst`).
    pub cst_costs: Vec<T>,
    /// IRLS sweeps used by each iterate.
    pub irls_sweeps: Vec<usize>,
    /// Topology updates performed after the initial tree.
    pub iterations_run: usize,
    pub wall_time: Duration,
}

/// Mean edge length of the terminal mST, inverted.
pub fn default_mu<T: Scalar>(points: &PointSet<T>) -> Result<T> {
    let mst = mst_over_points(points)?;
    let mean = tree_length(points, &mst) / T::from_count(mst.edges().len());
    Ok(if mean > T::zero() { T::one() / mean } else { T::one() })
}

pub fn mstreg_solve<T: Scalar>(
    points: &PointSet<T>,
    params: &CostParams<T>,
    cfg: &MstregConfig<T>,
) -> Result<SolveReport<T>> {
    if cfg.num_iterations == 0 {
        return Err(argument("num_iterations must be at least 1"));
    }
    if cfg.sampling_frequency < 2 {
        return Err(argument("sampling_frequency must be at least 2"));
    }
    let start = Instant::now();
    let n = points.len();
    let irls = IrlsConfig { epsilon_dist: params.epsilon_dist, ..cfg.irls };
    let initial = match cfg.init {
        MstregInit::Mst => mst_over_points(points)?,
        MstregInit::RandomKarger { mu } => {
            let mu = match mu {
                Some(mu) => mu,
                None => default_mu(points)?,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            karger_random_tree(points, mu, &mut rng)?
        }
    };

    let mut report = SolveReport {
        best_full: FullTopology::single_edge(points.dim()),
        best_full_cost: T::infinity(),
        best_cst: None,
        bcst_costs: Vec::new(),
        cst_costs: Vec::new(),
        irls_sweeps: Vec::new(),
        iterations_run: 0,
        wall_time: Duration::ZERO,
    };
    if cfg.optimize_cst {
        // The starting tree is itself a CST candidate.
        let c = cst_cost(points, &initial, params)?;
        report.best_cst = Some((initial.clone(), c));
    }

    let mut full = spawn_full_topology(points, &initial)?;
    let mut seen = HashSet::new();
    for it in 0..=cfg.num_iterations {
        if it > 0 {
            let mut extra = full.steiner_coords().to_vec();
            if cfg.sampling_frequency > 2 {
                extra.extend(sample_edge_points(points, &full, cfg.sampling_frequency)?);
            }
            let mut all = points.coords().to_vec();
            all.extend_from_slice(&extra);
            let cloud = PointSet::from_flat(n + extra.len() / points.dim(), points.dim(), all)?;
            let mst = mst_over_points(&cloud)?;
            full = full_topology_from_tree(points, &extra, mst.edges())?;
            report.iterations_run = it;
        }
        let (opt, trace) = irls_optimize(points, &full, params, &irls)?;
        full = opt;
        report.irls_sweeps.push(trace.len() - 1);
        let cost = bcst_cost(points, &full, params)?;
        log::debug!("mstreg iteration {it}: bcst cost {cost}");
        report.bcst_costs.push(cost);
        if cost < report.best_full_cost {
            report.best_full_cost = cost;
            report.best_full = full.clone();
        }
        if cfg.optimize_cst {
            let topo = collapse_to_cst(points, &full, params, cfg.collapse_policy)?;
            let c = cst_cost(points, &topo, params)?;
            report.cst_costs.push(c);
            if report.best_cst.as_ref().is_none_or(|(_, b)| c < *b) {
                report.best_cst = Some((topo, c));
            }
        }
        if !seen.insert(full.splits()) {
            break;
        }
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral_steiner_tree() {
        let h = 3f64.sqrt() / 2.0;
        let p = PointSet::<f64>::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]).unwrap();
        let r = mstreg_solve(&p, &CostParams::new(0.0), &MstregConfig::default()).unwrap();
        assert!((r.best_full_cost - 3f64.sqrt()).abs() < 1e-7);
        let c = r.best_full.steiner_point(0);
        assert!((c[0] - 0.5).abs() < 1e-6 && (c[1] - h / 3.0).abs() < 1e-6);
    }

    #[test]
    fn two_points_single_edge() {
        let p = PointSet::<f64>::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        for alpha in [0.0, 0.5, 1.0] {
            let r = mstreg_solve(&p, &CostParams::new(alpha), &MstregConfig::default()).unwrap();
            assert_eq!(r.best_full.edges(), &[(0, 1)]);
            assert!((r.best_full_cost - 5.0 * 0.25f64.powf(alpha)).abs() < 1e-12);
            assert_eq!(r.best_cst.unwrap().0.edges(), &[(0, 1)]);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64 * 0.7).sin(), (i as f64 * 1.9).cos()]).collect();
        let p = PointSet::from_rows(&rows).unwrap();
        let cfg = MstregConfig { seed: 5, init: MstregInit::RandomKarger { mu: None }, ..Default::default() };
        let a = mstreg_solve(&p, &CostParams::new(0.3), &cfg).unwrap();
        let b = mstreg_solve(&p, &CostParams::new(0.3), &cfg).unwrap();
        assert_eq!(a.bcst_costs, b.bcst_costs);
        assert_eq!(a.best_full, b.best_full);
        assert_eq!(a.best_cst, b.best_cst);
    }
}
