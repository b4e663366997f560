//! `graybox`: generate k-bounded ADF instances, analyze their structure,
//! tabulate hyperplane statistics and run the optimizers.
//!
//! Exit codes: 0 on success, 1 on runtime or data errors, 2 on usage or
//! configuration errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable overriding the exhaustive enumeration cap.
pub const ENUM_LIMIT_VAR: &str = "GRAYBOX_ENUM_LIMIT";

#[derive(Parser, Debug)]
#[command(
    name = "graybox",
    version,
    about = "Gray-box analysis and optimization of k-bounded ADFs"
)]
pub struct Cli {
    /// Random seed; multi-run commands use consecutive seeds starting here.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write output to this path instead of stdout (a directory for replicate-paper).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Structural analysis: graphs, chordal completion, junction tree, tree-width.
    Analyze(AnalyzeArgs),
    /// Exhaustive marginal tables over a set of scopes.
    Marginals(MarginalArgs),
    /// Deception report of a set of scopes against a reference solution.
    Deception(DeceptionArgs),
    /// Factorized distribution algorithm runs.
    Fda(FdaArgs),
    /// Structure-aware hill climbing from random starts.
    Climb(ClimbArgs),
    /// Regenerate the ten-variable landscape tables and check them against the golden copies.
    ReplicatePaper(ReplicateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    AdjacentCyclic,
    AdjacentAcyclic,
    RandomScopes,
    Separable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Codomain {
    /// Values uniform in [0, 1).
    Uniform,
    /// 1 on all-ones and three random configurations, 0 elsewhere.
    FourOptima,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// The fixed ten-variable cyclic landscape.
    #[arg(long, conflicts_with_all = ["kind", "n", "k", "m", "codomain"])]
    pub paper_example: bool,
    #[arg(long, value_enum, required_unless_present = "paper_example")]
    pub kind: Option<Kind>,
    #[arg(long, required_unless_present = "paper_example")]
    pub n: Option<usize>,
    #[arg(long, required_unless_present = "paper_example")]
    pub k: Option<usize>,
    /// Number of subfunctions; defaults to what the family requires.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum)]
    pub codomain: Option<Codomain>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HeuristicArg {
    MinFill,
    MinDegree,
}

#[derive(Args, Debug, Clone)]
pub struct StructureArgs {
    /// Elimination heuristic for the chordal completion.
    #[arg(long, value_enum, default_value = "min-fill")]
    pub heuristic: HeuristicArg,
    /// Explicit elimination order, e.g. `0,1,2,...`; overrides --heuristic.
    #[arg(long)]
    pub elim_order: Option<String>,
    /// Root clique of the factorization as a vertex list; defaults to the first clique.
    #[arg(long)]
    pub root: Option<String>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("view").required(true).multiple(false))]
pub struct AnalyzeArgs {
    /// Instance file (`-` for stdin).
    pub instance: PathBuf,
    #[arg(long, group = "view")]
    pub vig: bool,
    #[arg(long, group = "view")]
    pub factor_graph: bool,
    #[arg(long, group = "view")]
    pub triangulate: bool,
    #[arg(long, group = "view")]
    pub junction_tree: bool,
    #[arg(long, group = "view")]
    pub factorization: bool,
    #[arg(long, group = "view")]
    pub treewidth: bool,
    /// With --treewidth, also compute the exact tree-width.
    #[arg(long, requires = "treewidth")]
    pub exact: bool,
    #[command(flatten)]
    pub structure: StructureArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Statistic {
    Sum,
    Mean,
    Boltzmann,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("selection").required(true).multiple(false))]
pub struct ScopeArgs {
    /// Instance file (`-` for stdin).
    pub instance: PathBuf,
    /// Explicit scopes, e.g. `0,1,2;3,4,5`.
    #[arg(long, group = "selection")]
    pub scopes: Option<String>,
    /// All n contiguous cyclic windows of this order.
    #[arg(long, group = "selection")]
    pub order: Option<usize>,
    /// The clique scopes of the derived junction-tree factorization.
    #[arg(long, group = "selection")]
    pub jt_factors: bool,
    #[arg(long, value_enum, default_value = "sum")]
    pub statistic: Statistic,
    /// Inverse temperature for `--statistic boltzmann`.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[command(flatten)]
    pub structure: StructureArgs,
}

#[derive(Args, Debug)]
pub struct MarginalArgs {
    #[command(flatten)]
    pub scopes: ScopeArgs,
}

#[derive(Args, Debug)]
pub struct DeceptionArgs {
    #[command(flatten)]
    pub scopes: ScopeArgs,
    /// Reference solution; defaults to the first global optimum.
    #[arg(long)]
    pub optimum: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SelectionArg {
    Truncation,
    Boltzmann,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("model").required(true).multiple(false))]
pub struct FdaArgs {
    /// Instance file (`-` for stdin).
    pub instance: PathBuf,
    /// Factorization derived from the junction tree of the chordal completion.
    #[arg(long, group = "model")]
    pub jt: bool,
    /// Fully factorized model.
    #[arg(long, group = "model")]
    pub univariate: bool,
    /// Factorization JSON file.
    #[arg(long, group = "model")]
    pub factor_file: Option<PathBuf>,
    #[command(flatten)]
    pub structure: StructureArgs,
    #[arg(long, alias = "pop", default_value_t = 500)]
    pub population: usize,
    #[arg(long, value_enum, default_value = "truncation")]
    pub selection: SelectionArg,
    /// Truncation ratio.
    #[arg(long, default_value_t = 0.3)]
    pub tau: f64,
    /// Boltzmann selection inverse temperature.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Boltzmann selection sample size; defaults to ceil(tau * population).
    #[arg(long)]
    pub selected: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub smoothing: f64,
    #[arg(long, default_value_t = 30)]
    pub max_gens: usize,
    #[arg(long, default_value_t = 1)]
    pub elitism: usize,
    /// Stop a run once this fitness is reached; enables success counting.
    #[arg(long)]
    pub target: Option<f64>,
    /// Number of runs, seeded consecutively from --seed.
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PivotArg {
    Best,
    First,
}

#[derive(Args, Debug)]
pub struct ClimbArgs {
    /// Instance file (`-` for stdin).
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub starts: usize,
    /// Also try VIG-restricted pair moves at 1-bit local optima.
    #[arg(long)]
    pub pairs: bool,
    #[arg(long, value_enum, default_value = "best")]
    pub pivot: PivotArg,
    #[arg(long)]
    pub max_moves: Option<usize>,
    /// Include the move trace of every climb.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args, Debug)]
pub struct ReplicateArgs {
    /// Directory with replacement golden tables `table4.tsv` … `table7.tsv`.
    #[arg(long)]
    pub golden_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
