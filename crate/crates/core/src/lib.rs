//! Central spanning trees (CST) and branched central spanning trees (BCST)
//! over Euclidean point sets.
//!
//! The CST objective weights each edge of a spanning tree by
//! `(m_e (1 - m_e))^alpha`, where `m_e` is the fraction of terminals on one
//! side of the edge. `alpha = 0` gives the minimum spanning tree and
//! `alpha = 1` the minimum routing cost tree. The branched variant adds
//! `N - 2` freely placed Steiner points; at `alpha = 0` it is the Euclidean
//! Steiner tree problem.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below fix the precision.

// `!(x > 0)`-style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod combinatorics;
pub mod error;
pub mod geomopt;
pub mod grasppr;
pub mod io;
pub mod limits;
pub mod model;
pub mod mstreg;
pub mod oracle;
pub mod scalar;
pub mod topo;

pub use analysis::{
    centroid_star_baseline, perturb_gaussian, relative_error, spearman, stability_experiment,
    tree_distance_frobenius, tree_distance_matrix, StabilityRow,
};
pub use combinatorics::{
    count_derivable_cst, count_derivable_full, enumerate_derivable_cst, enumerate_derivable_full,
};
pub use error::{Error, Result};
pub use geomopt::{
    angle_residuals, branching_angles, branching_angles_from_shares, irls_optimize,
    v_branching_collapse_test, weighted_geometric_median, BranchAngles, IrlsConfig,
};
pub use grasppr::{
    construct_randomized_tree, grasp_pr_solve, local_search_edge_swap, path_relink, GraspConfig, GraspInit,
    GraspReport,
};
pub use io::{
    parse_orlib_estein, parse_points_csv, parse_reference_costs, plot_data_csv, reference_instance, TreeRecord,
};
pub use limits::{
    alpha_star, geometric_median_star, h1, h2, medoid_star, strong_triangle_holds, ThresholdReport,
};
pub use model::{
    bcst_cost, compute_edge_shares, cst_cost, full_tree_length, mrct_pairwise_sum, tree_length,
    CostParams, EdgeShares, FullShape, FullTopology, Mode, PointSet, Topology, Tree, TreeShape,
};
pub use mstreg::{mstreg_solve, MstregConfig, MstregInit, SolveReport};
pub use oracle::{
    brute_force_optimum, enumerate_cst_topologies, enumerate_full_topologies, rank_of, BruteForce,
};
pub use scalar::Scalar;
pub use topo::{
    collapse_to_cst, full_topology_from_tree, karger_random_tree, knn_graph, minimum_spanning_tree,
    mst_over_points, sample_edge_points, spawn_full_topology, CollapseOrder, CollapsePolicy,
    CollapseTarget, WeightedGraph,
};

pub type PointSet64 = PointSet<f64>;
pub type PointSet32 = PointSet<f32>;
pub type FullTopology64 = FullTopology<f64>;
pub type FullTopology32 = FullTopology<f32>;
pub type CostParams64 = CostParams<f64>;
pub type CostParams32 = CostParams<f32>;
pub type IrlsConfig64 = IrlsConfig<f64>;
pub type IrlsConfig32 = IrlsConfig<f32>;
pub type MstregConfig64 = MstregConfig<f64>;
pub type SolveReport64 = SolveReport<f64>;
pub type GraspConfig64 = GraspConfig<f64>;
