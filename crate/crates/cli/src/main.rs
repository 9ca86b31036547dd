mod repro;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use pubgood::eqcore::{
    expected_revenue, solve_fixed_point, verify_equilibrium, PriceVector, SolverConfig, Status, Threshold,
    ThresholdVector,
};
use pubgood::netmodel::{generate, graph_to_json, load_cnf, load_graph, sat_reduction};
use pubgood::priceguide::{myerson_upper_bound, price_clique, price_d_regular, price_uniform_general};
use pubgood::seqprice::{
    best_ordering_revenue, clique_committed_optimum, clique_subgame_perfect, live_vs_greedy, sequential_revenue,
    BestOrdering, LiveGreedyComparison, Ordering, SequentialRevenue,
};
use pubgood::simkit::{check_hipster_welfare_bound, simulate, HipsterCheck, SimulationSummary};
use pubgood::worstcase::{
    hardness_experiment, worst_case_revenue_bounds, worst_case_revenue_exact, Verdict, EXACT_LIMIT,
};
use pubgood::{Distribution, Graph, GraphKind, ReductionSpec};

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] pubgood::Error),

    #[error("{0}")]
    Usage(String),

    /// A computed or supplied result failed its check.
    #[error("{0}")]
    Validation(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.code(),
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::Csv(_) => "csv",
            CliError::Json(_) => "json",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Lib(pubgood::Error::NonConvergence { .. } | pubgood::Error::Internal(_)) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "pubgood",
    version,
    about = "Posted prices for locally public goods on networks"
)]
struct Cli {
    /// Write the result here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for every random choice
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph
    Gen(GenArgs),
    /// Build the reduction graph of a 3-CNF formula
    Sat {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long = "L", default_value_t = 1)]
        exponent: u32,
    },
    /// Solve for an equilibrium (or check a given one) and report its revenue
    Eq(EqArgs),
    /// Recommend a price
    Price(PriceArgs),
    /// Worst-case revenue over all equilibria, uniform(0,1) values
    Worstcase {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long, conflicts_with = "bounds")]
        exact: bool,
        #[arg(long)]
        bounds: bool,
    },
    /// Run min sum x on the reduction graph of a formula
    Hardness {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long = "L", default_value_t = 1)]
        exponent: u32,
    },
    /// Sequential sale under a known ordering
    Seq(SeqArgs),
    /// Sequential pricing on a clique with uniform(0,1) values
    SeqClique {
        #[arg(long)]
        n: usize,
        /// Optimise a committed price vector instead
        #[arg(long)]
        commit: bool,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
    },
    /// Monte Carlo play of a threshold profile
    Sim(SimArgs),
    /// Run a named experiment and print its table
    Repro(repro::ReproArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Clique,
    Cycle,
    Path,
    Empty,
    Star,
    DRegularBipartite,
    PentagonGadget,
    RandomGnp,
    RandomDRegular,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    leaves: Option<usize>,
    /// Copies per triple of the pentagon gadget
    #[arg(long = "N")]
    copies: Option<usize>,
    #[arg(long)]
    prob: Option<f64>,
}

#[derive(Args, Debug)]
struct PriceInput {
    /// Common price for every node
    #[arg(long, conflicts_with = "price_file")]
    price: Option<f64>,
    /// JSON array of per-node prices
    #[arg(long)]
    price_file: Option<PathBuf>,
}

impl PriceInput {
    fn load(&self, n: usize) -> CliResult<PriceVector<f64>> {
        match (self.price, &self.price_file) {
            (Some(p), _) => Ok(PriceVector::uniform(n, p)?),
            (None, Some(path)) => Ok(PriceVector::from_json(&read(path)?)?),
            (None, None) => Err(CliError::Usage("one of --price or --price-file is required".into())),
        }
    }
}

#[derive(Args, Debug)]
struct EqArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "uniform:0,1")]
    dist: String,
    #[command(flatten)]
    prices: PriceInput,
    /// Check this threshold profile instead of solving
    #[arg(long)]
    thresholds: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SettingArg {
    Clique,
    DRegular,
    UniformGeneral,
}

#[derive(Args, Debug)]
struct PriceArgs {
    #[arg(long, value_enum)]
    setting: SettingArg,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value = "uniform:0,1")]
    dist: String,
}

#[derive(Args, Debug)]
struct SeqArgs {
    #[arg(long)]
    graph: PathBuf,
    /// JSON array giving the approach order; identity when omitted
    #[arg(long)]
    ordering: Option<PathBuf>,
    #[arg(long, default_value = "uniform:0,1")]
    dist: String,
    #[arg(long)]
    p: f64,
    /// Also report the best ordering (exact MWIS, small graphs)
    #[arg(long)]
    best: bool,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "uniform:0,1")]
    dist: String,
    /// Threshold array, or an `eq` report
    #[arg(long)]
    thresholds: PathBuf,
    #[command(flatten)]
    prices: PriceInput,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    /// Write the first `--keep` trials to this CSV file
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000)]
    keep: usize,
    /// Check Hipster welfare against the MWIS of every draw
    #[arg(long)]
    mwis: bool,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| {
        CliError::Lib(pubgood::Error::Parse {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })
    })
}

fn parse_dist(spec: &str) -> CliResult<Distribution> {
    Ok(spec.parse::<Distribution>()?)
}

fn graph(path: &Path) -> CliResult<Graph> {
    load_graph(path).map_err(|e| match e {
        pubgood::Error::Io(io) => pubgood::Error::Parse {
            line: 0,
            message: format!("cannot read {}: {io}", path.display()),
        }
        .into(),
        other => other.into(),
    })
}

/// Writes `text` to `--out` or standard output.
fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(pubgood::Error::Io)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(pubgood::Error::Io)?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(cli: &Cli, value: &T) -> CliResult<()> {
    if cli.format == Format::Csv {
        return Err(CliError::Usage("this command only writes json".into()));
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(cli.out.as_deref(), &text)
}

fn need(value: Option<usize>, flag: &str) -> CliResult<usize> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required here")))
}

fn run_gen(cli: &Cli, a: &GenArgs) -> CliResult<()> {
    let seed = cli.seed;
    let kind = match a.kind {
        Kind::Clique => GraphKind::Clique { n: need(a.n, "n")? },
        Kind::Cycle => GraphKind::Cycle { n: need(a.n, "n")? },
        Kind::Path => GraphKind::Path { n: need(a.n, "n")? },
        Kind::Empty => GraphKind::Empty { n: need(a.n, "n")? },
        Kind::Star => GraphKind::Star {
            leaves: need(a.leaves.or(a.n), "leaves")?,
        },
        Kind::DRegularBipartite => GraphKind::DRegularBipartite {
            n: need(a.n, "n")?,
            d: need(a.d, "d")?,
        },
        Kind::PentagonGadget => GraphKind::PentagonGadget {
            copies: need(a.copies, "N")?,
        },
        Kind::RandomGnp => GraphKind::RandomGnp {
            n: need(a.n, "n")?,
            prob: a
                .prob
                .ok_or_else(|| CliError::Usage("--prob is required here".into()))?,
            seed,
        },
        Kind::RandomDRegular => GraphKind::RandomDRegular {
            n: need(a.n, "n")?,
            d: need(a.d, "d")?,
            seed,
        },
    };
    let g = generate(&kind)?;
    emit_json_text(cli, graph_to_json(&g))
}

fn emit_json_text(cli: &Cli, mut text: String) -> CliResult<()> {
    if cli.format == Format::Csv {
        return Err(CliError::Usage("this command only writes json".into()));
    }
    text.push('\n');
    emit(cli.out.as_deref(), &text)
}

fn is_clique(g: &Graph) -> bool {
    let n = g.n();
    n >= 2 && g.edge_count() == n * (n - 1) / 2
}

/// Accepts a bare threshold array or any object holding one under
/// `thresholds.values` or `values`.
fn load_thresholds(path: &Path) -> CliResult<ThresholdVector<f64>> {
    let text = read(path)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| pubgood::Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let array = match &value {
        serde_json::Value::Array(_) => &value,
        v => v
            .pointer("/thresholds/values")
            .or_else(|| v.pointer("/values"))
            .ok_or_else(|| pubgood::Error::Parse {
                line: 1,
                message: "no threshold array found".into(),
            })?,
    };
    let values: Vec<Threshold<f64>> = serde_json::from_value(array.clone()).map_err(|e| pubgood::Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    Ok(ThresholdVector::candidate(values))
}

fn run_eq(cli: &Cli, a: &EqArgs) -> CliResult<()> {
    let g = graph(&a.graph)?;
    let dist = parse_dist(&a.dist)?;
    let prices = a.prices.load(g.n())?;
    let t = match &a.thresholds {
        Some(path) => {
            let mut t = load_thresholds(path)?;
            let check = verify_equilibrium(&g, &dist, &prices, &t, a.tol)?;
            if !check.valid {
                return Err(CliError::Validation(format!(
                    "not an equilibrium: residual {:e} at nodes {:?}",
                    check.residual, check.witnesses
                )));
            }
            t.residual = check.residual;
            t.status = Status::Verified;
            t
        }
        None => {
            let config = SolverConfig {
                max_iter: a.max_iter,
                ..SolverConfig::default()
            };
            solve_fixed_point(&g, &dist, &prices, &config)?
        }
    };
    let mut report = expected_revenue(&prices, &t, &dist)?;
    if is_clique(&g) {
        report = report.annotate("myerson_bound", myerson_upper_bound(&dist, g.n())?);
    }
    emit_json(cli, &report)
}

fn run_price(cli: &Cli, a: &PriceArgs) -> CliResult<()> {
    let dist = parse_dist(&a.dist)?;
    let rec = match a.setting {
        SettingArg::Clique => price_clique(&dist, need(a.n, "n")?)?,
        SettingArg::DRegular => price_d_regular(&dist, need(a.d, "d")?)?,
        SettingArg::UniformGeneral => price_uniform_general(&dist)?,
    };
    emit_json(cli, &rec)
}

fn run_worstcase(cli: &Cli, path: &Path, p: f64, exact: bool, bounds: bool) -> CliResult<()> {
    let g = graph(path)?;
    let exact = exact || (!bounds && g.n() <= EXACT_LIMIT);
    let res = if exact {
        worst_case_revenue_exact(&g, p)?
    } else {
        worst_case_revenue_bounds(&g, p)?
    };
    emit_json(cli, &res)
}

fn run_hardness(cli: &Cli, cnf: &Path, exponent: u32) -> CliResult<()> {
    let spec = ReductionSpec::new(load_cnf(cnf)?, exponent)?;
    let report = hardness_experiment(&spec)?;
    emit_json(cli, &report)?;
    if report.verdict == Verdict::Inconclusive {
        return Err(CliError::Validation(format!(
            "min sum x = {} is neither {} nor at least {}",
            report.min_sum_x, report.low_threshold, report.high_threshold
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SeqReport {
    sequential: SequentialRevenue<f64>,
    live_vs_greedy: LiveGreedyComparison,
    #[serde(skip_serializing_if = "Option::is_none")]
    best: Option<BestOrdering<f64>>,
}

fn run_seq(cli: &Cli, a: &SeqArgs) -> CliResult<()> {
    let g = graph(&a.graph)?;
    let dist = parse_dist(&a.dist)?;
    let ordering = match &a.ordering {
        Some(path) => Ordering::from_json(&read(path)?)?,
        None => Ordering::identity(g.n()),
    };
    let report = SeqReport {
        sequential: sequential_revenue(&g, &ordering, &dist, a.p)?,
        live_vs_greedy: live_vs_greedy(&g, &ordering)?,
        best: if a.best {
            Some(best_ordering_revenue(&g, &dist)?)
        } else {
            None
        },
    };
    emit_json(cli, &report)
}

fn run_seq_clique(cli: &Cli, n: usize, commit: bool, restarts: usize) -> CliResult<()> {
    if commit {
        emit_json(cli, &clique_committed_optimum(n, restarts, cli.seed)?)
    } else {
        emit_json(cli, &clique_subgame_perfect(n)?)
    }
}

#[derive(Serialize)]
struct SimReport {
    #[serde(flatten)]
    summary: SimulationSummary<f64>,
    closed_form_revenue: f64,
    equilibrium: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    hipster: Option<HipsterCheck<f64>>,
}

fn run_sim(cli: &Cli, a: &SimArgs) -> CliResult<()> {
    let g = graph(&a.graph)?;
    let dist = parse_dist(&a.dist)?;
    let prices = a.prices.load(g.n())?;
    let t = load_thresholds(&a.thresholds)?;
    let equilibrium = verify_equilibrium(&g, &dist, &prices, &t, 1e-8)?.valid;
    if !equilibrium {
        log::warn!("the threshold profile is not an equilibrium at these prices");
    }
    let keep = if a.csv.is_some() { a.keep.min(a.trials) } else { 0 };
    let mut summary = simulate(&g, &dist, &prices, &t, a.trials, cli.seed, keep)?;
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["trial".to_string()];
        header.extend((0..g.n()).map(|i| format!("v{i}")));
        header.extend(["buyers", "revenue", "welfare_public", "welfare_hipster"].map(String::from));
        w.write_record(&header)?;
        for (k, o) in summary.outcomes.iter().enumerate() {
            let mut rec = vec![k.to_string()];
            rec.extend(o.values.iter().map(f64::to_string));
            rec.push(o.buyers.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
            rec.extend([o.revenue_realized, o.welfare_public, o.welfare_hipster].map(|x| x.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(pubgood::Error::Io)?;
        summary.outcomes.clear();
    }
    let hipster = if a.mwis {
        Some(check_hipster_welfare_bound(&g, &dist, &prices, &t, a.trials, cli.seed)?)
    } else {
        None
    };
    let report = SimReport {
        closed_form_revenue: expected_revenue(&prices, &t, &dist)?.expected_revenue,
        summary,
        equilibrium,
        hipster,
    };
    if cli.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "trials",
            "mean_revenue",
            "stderr",
            "mean_welfare_public",
            "mean_welfare_hipster",
            "closed_form_revenue",
        ])?;
        let s = &report.summary;
        w.write_record(&[
            s.trials.to_string(),
            s.mean_revenue.to_string(),
            s.stderr.to_string(),
            s.mean_welfare_public.to_string(),
            s.mean_welfare_hipster.to_string(),
            report.closed_form_revenue.to_string(),
        ])?;
        let bytes = w.into_inner().map_err(|e| pubgood::Error::Io(e.into_error()))?;
        return emit(cli.out.as_deref(), &String::from_utf8_lossy(&bytes));
    }
    emit_json(cli, &report)
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Gen(a) => run_gen(cli, a),
        Command::Sat { cnf, exponent } => {
            let spec = ReductionSpec::new(load_cnf(cnf)?, *exponent)?;
            emit_json_text(cli, graph_to_json(&sat_reduction(&spec)?))
        }
        Command::Eq(a) => run_eq(cli, a),
        Command::Price(a) => run_price(cli, a),
        Command::Worstcase {
            graph,
            p,
            exact,
            bounds,
        } => run_worstcase(cli, graph, *p, *exact, *bounds),
        Command::Hardness { cnf, exponent } => run_hardness(cli, cnf, *exponent),
        Command::Seq(a) => run_seq(cli, a),
        Command::SeqClique { n, commit, restarts } => run_seq_clique(cli, *n, *commit, *restarts),
        Command::Sim(a) => run_sim(cli, a),
        Command::Repro(a) => {
            let result = repro::run(a, cli.seed)?;
            let text = match cli.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&result.to_json())?;
                    s.push('\n');
                    s
                }
                Format::Csv => result.table.to_csv()?,
            };
            emit(cli.out.as_deref(), &text)?;
            eprintln!("{}", result.status_line());
            if result.pass {
                Ok(())
            } else {
                Err(CliError::Validation(format!("experiment {} failed", result.name)))
            }
        }
    }
}

fn set_workers() -> CliResult<()> {
    let Ok(raw) = std::env::var("PUBGOOD_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("PUBGOOD_WORKERS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprint!("error[usage]: {}", msg.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match set_workers().and_then(|()| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code())
        }
    }
}
