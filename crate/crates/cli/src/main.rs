use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bcst::{
    alpha_star, brute_force_optimum, count_derivable_cst, count_derivable_full, grasp_pr_solve, mstreg_solve,
    parse_orlib_estein, parse_points_csv, parse_reference_costs, plot_data_csv, rank_of, reference_instance,
    relative_error, stability_experiment, CostParams, Error, FullShape, GraspConfig, GraspInit, Mode,
    MstregConfig, PointSet, Topology, Tree, TreeRecord,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

type Result<T> = std::result::Result<T, Error>;

#[derive(Parser)]
#[command(name = "bcst", version, about = "Central spanning trees with and without Steiner points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mSTreg heuristic.
    Solve(SolveArgs),
    /// Exhaustive optimum for small instances (N <= 9).
    Brute(BruteArgs),
    /// Count trees derivable from a stored tree.
    Count(CountArgs),
    /// GRASP with path relinking (CST objective).
    Grasp(GraspArgs),
    /// Perturbation stability table.
    Stability(StabilityArgs),
    /// Star-optimality threshold alpha*(N).
    Limits(LimitsArgs),
    /// Batch-solve an OR-library estein file.
    Orlib(OrlibArgs),
}

#[derive(Args)]
struct Problem {
    /// Point file: one point per line, comma or whitespace separated.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
}

#[derive(Args)]
struct HeuristicArgs {
    /// Topology updates after the initial tree.
    #[arg(long, default_value_t = 20)]
    max_iters: usize,
    #[arg(long, default_value_t = 3)]
    sampling_frequency: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl HeuristicArgs {
    fn config(&self) -> MstregConfig<f64> {
        MstregConfig {
            num_iterations: self.max_iters,
            sampling_frequency: self.sampling_frequency,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: Problem,
    #[arg(long)]
    mode: Mode,
    #[command(flatten)]
    heuristic: HeuristicArgs,
    /// Write the tree as JSON.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write per-edge length, share and weight as CSV.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct BruteArgs {
    #[command(flatten)]
    problem: Problem,
    #[arg(long)]
    mode: Mode,
    /// Report where this stored tree ranks among all topologies.
    #[arg(long)]
    rank_of: Option<PathBuf>,
    /// Write the optimal tree as JSON.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("what").required(true))]
struct CountArgs {
    #[arg(long)]
    tree: PathBuf,
    /// CST topologies obtainable by collapsing Steiner points (BCST tree).
    #[arg(long, group = "what")]
    derivable_cst: bool,
    /// Full topologies obtainable by splitting terminals (CST tree).
    #[arg(long, group = "what")]
    derivable_full: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    None,
    Mstreg,
}

#[derive(Args)]
struct GraspArgs {
    #[command(flatten)]
    problem: Problem,
    #[arg(long, default_value_t = 300.0)]
    time_budget: f64,
    #[arg(long, value_enum, default_value_t = InitArg::None)]
    init: InitArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    elite_size: usize,
    /// Stop after this many construction rounds.
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated list; `a,b,...,c` expands to an arithmetic sequence.
    #[arg(long)]
    alphas: String,
    /// Standard deviation of the coordinate noise.
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "cst")]
    mode: Mode,
    /// Also write the table to this CSV file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LimitsArgs {
    #[arg(long)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostScale {
    /// The objective itself.
    Objective,
    /// `N^2` times the objective: at alpha = 1, the sum over unordered pairs.
    Pairs,
    /// Twice `Pairs`: the sum over ordered pairs.
    OrderedPairs,
}

#[derive(Args)]
struct OrlibArgs {
    /// OR-library estein file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long)]
    mode: Mode,
    /// CSV of `instance_id,cost`; ids are instance numbers or `eN.k` labels.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Scale applied to solver costs before comparing with references.
    #[arg(long, value_enum, default_value_t = CostScale::Objective)]
    cost_scale: CostScale,
    #[command(flatten)]
    heuristic: HeuristicArgs,
}

impl Problem {
    fn params(&self) -> Result<CostParams<f64>> {
        alpha_params(self.alpha)
    }
}

fn alpha_params(alpha: f64) -> Result<CostParams<f64>> {
    if !alpha.is_finite() {
        return Err(Error::Argument(format!("alpha must be finite, got {alpha}")));
    }
    Ok(CostParams::new(alpha))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Argument(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Argument(format!("cannot write {}: {e}", path.display())))
}

fn load_points(path: &Path) -> Result<PointSet<f64>> {
    parse_points_csv(&read(path)?)
}

fn load_record(path: &Path) -> Result<TreeRecord> {
    TreeRecord::from_json(&read(path)?)
}

/// A tree file that parses but does not describe a valid tree is bad input,
/// not a caller mistake.
fn bad_tree(e: Error) -> Error {
    match e {
        Error::Argument(m) => Error::Structural(m),
        other => other,
    }
}

fn solve_tree(points: &PointSet<f64>, params: &CostParams<f64>, mode: Mode, cfg: &MstregConfig<f64>) -> Result<(Tree<f64>, f64, usize)> {
    let cfg = MstregConfig { optimize_cst: mode == Mode::Cst, ..cfg.clone() };
    let r = mstreg_solve(points, params, &cfg)?;
    Ok(match mode {
        Mode::Bcst => (Tree::Bcst(r.best_full), r.best_full_cost, r.iterations_run),
        Mode::Cst => {
            let (t, c) = r.best_cst.expect("optimize_cst is set");
            (Tree::Cst(t), c, r.iterations_run)
        }
    })
}

fn solve(a: &SolveArgs) -> Result<String> {
    let points = load_points(&a.problem.input)?;
    let params = a.problem.params()?;
    let (tree, cost, iterations) = solve_tree(&points, &params, a.mode, &a.heuristic.config())?;
    if let Some(path) = &a.output {
        write(path, &TreeRecord::new(&points, &tree, &params)?.to_json())?;
    }
    if let Some(path) = &a.plot_data {
        write(path, &plot_data_csv(&points, &tree, params.alpha)?)?;
    }
    Ok(format!("mode {}\nalpha {}\ncost {cost}\niterations {iterations}\n", a.mode, a.problem.alpha))
}

fn brute(a: &BruteArgs) -> Result<String> {
    let points = load_points(&a.problem.input)?;
    let params = a.problem.params()?;
    let bf = brute_force_optimum(&points, &params, a.mode)?;
    let mut out = format!("optimum {}\ntopologies {}\n", bf.best_cost, bf.sorted_costs.len());
    if let Some(path) = &a.rank_of {
        let record = load_record(path)?;
        if record.mode != a.mode {
            return Err(Error::Argument(format!("tree is {} but --mode is {}", record.mode, a.mode)));
        }
        let tree = record.to_tree::<f64>(points.dim()).map_err(bad_tree)?;
        let cost = tree.cost(&points, &params)?;
        let rank = rank_of(cost, &bf.sorted_costs);
        writeln!(out, "cost {cost}\nrank {rank} of {}", bf.sorted_costs.len()).expect("string write");
    }
    if let Some(path) = &a.output {
        write(path, &TreeRecord::new(&points, &bf.best, &params)?.to_json())?;
    }
    Ok(out)
}

fn count(a: &CountArgs) -> Result<String> {
    let record = load_record(&a.tree)?;
    let edges = record.edges.iter().map(|e| (e[0], e[1]));
    let n = if a.derivable_cst {
        if record.mode != Mode::Bcst {
            return Err(Error::Argument("--derivable-cst needs a BCST tree".into()));
        }
        count_derivable_cst(&FullShape::new(record.n_terminals, edges).map_err(bad_tree)?)
    } else {
        if record.mode != Mode::Cst {
            return Err(Error::Argument("--derivable-full needs a CST tree".into()));
        }
        count_derivable_full(&Topology::new(record.n_terminals, edges).map_err(bad_tree)?)
    };
    Ok(format!("{n}\n"))
}

fn grasp(a: &GraspArgs) -> Result<String> {
    let points = load_points(&a.problem.input)?;
    let params = a.problem.params()?;
    let cfg = GraspConfig {
        time_budget_secs: a.time_budget,
        elite_size: a.elite_size,
        seed: a.seed,
        init: match a.init {
            InitArg::None => GraspInit::None,
            InitArg::Mstreg => GraspInit::Mstreg,
        },
        max_iterations: a.max_iterations,
        ..Default::default()
    };
    let r = grasp_pr_solve(&points, &params, &cfg)?;
    if let Some(path) = &a.output {
        write(path, &TreeRecord::new(&points, &Tree::Cst(r.best.clone()), &params)?.to_json())?;
    }
    let mut out = format!("cost {}\niterations {}\n", r.best_cost, r.iterations);
    if let Some(c) = r.seed_cost {
        writeln!(out, "mstreg_cost {c}").expect("string write");
    }
    Ok(out)
}

/// `0,0.2,...,1` style lists.
fn parse_alphas(spec: &str) -> Result<Vec<f64>> {
    let toks: Vec<&str> = spec.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
    let num = |t: &str| match t.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Argument(format!("bad alpha '{t}'"))),
    };
    let mut out: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if toks[i] == "..." {
            if out.len() < 2 || i + 1 >= toks.len() {
                return Err(Error::Argument("'...' needs two values before it and one after".into()));
            }
            let step = out[out.len() - 1] - out[out.len() - 2];
            let end = num(toks[i + 1])?;
            if step.is_nan() || step <= 0.0 || end < out[out.len() - 1] {
                return Err(Error::Argument("'...' needs an increasing sequence".into()));
            }
            let start = out[out.len() - 2];
            let k0 = out.len() - 2;
            let steps = ((end - start) / step + 1e-9).floor() as usize;
            out.truncate(k0);
            out.extend((0..=steps).map(|k| start + step * k as f64));
            if (out[out.len() - 1] - end).abs() > 1e-9 * end.abs().max(1.0) {
                out.push(end);
            } else {
                *out.last_mut().expect("nonempty") = end;
            }
            i += 2;
        } else {
            out.push(num(toks[i])?);
            i += 1;
        }
    }
    if out.is_empty() {
        return Err(Error::Argument("no alpha values given".into()));
    }
    Ok(out)
}

fn stability(a: &StabilityArgs) -> Result<String> {
    let points = load_points(&a.input)?;
    let alphas = parse_alphas(&a.alphas)?;
    let cfg = MstregConfig { seed: a.seed, ..Default::default() };
    let rows = stability_experiment(&points, &alphas, a.sigma, a.trials, a.mode, &cfg, a.seed)?;
    let mut out = String::from("alpha,mean_frobenius,mean_cost,mean_displacement\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.alpha, r.mean_frobenius, r.mean_cost, r.mean_displacement).expect("string write");
    }
    if let Some(path) = &a.output {
        write(path, &out)?;
    }
    Ok(out)
}

fn limits(a: &LimitsArgs) -> Result<String> {
    let r = alpha_star::<f64>(a.n)?;
    Ok(format!(
        "n {}\nalpha_star {}\nbranch_1 {}\nbranch_2 {}\n",
        r.n, r.alpha_star, r.branch_values[0], r.branch_values[1]
    ))
}

fn orlib(a: &OrlibArgs) -> Result<String> {
    let instances = parse_orlib_estein::<f64>(&read(&a.input)?)?;
    let mut reference = vec![None; instances.len()];
    if let Some(path) = &a.reference {
        for (id, cost) in parse_reference_costs(&read(path)?)? {
            match reference_instance(&id).filter(|&k| k <= instances.len()) {
                Some(k) => reference[k - 1] = Some(cost),
                None => log::warn!("reference id '{id}' matches no instance"),
            }
        }
    }
    let params = alpha_params(a.alpha)?;
    let mut out = String::from("instance,n,cost,reference,rel_error\n");
    let mut errors = Vec::new();
    for (k, points) in instances.iter().enumerate() {
        let (_, cost, _) = solve_tree(points, &params, a.mode, &a.heuristic.config())?;
        let n2 = (points.len() * points.len()) as f64;
        let scaled = match a.cost_scale {
            CostScale::Objective => cost,
            CostScale::Pairs => cost * n2,
            CostScale::OrderedPairs => 2.0 * cost * n2,
        };
        let (refc, rel) = match reference[k] {
            Some(r) => {
                let e = relative_error(scaled, r)?;
                errors.push(e);
                (r.to_string(), e.to_string())
            }
            None => (String::new(), String::new()),
        };
        writeln!(out, "{},{},{scaled},{refc},{rel}", k + 1, points.len()).expect("string write");
    }
    if !errors.is_empty() {
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        writeln!(out, "# mean_rel_error {mean} over {} instances", errors.len()).expect("string write");
    }
    Ok(out)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Argument(_) => 1,
        Error::Parse { .. } | Error::Structural(_) => 2,
        Error::Numeric(_) => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Brute(a) => brute(a),
        Command::Count(a) => count(a),
        Command::Grasp(a) => grasp(a),
        Command::Stability(a) => stability(a),
        Command::Limits(a) => limits(a),
        Command::Orlib(a) => orlib(a),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
