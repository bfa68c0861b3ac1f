use std::path::PathBuf;
use std::process::ExitCode;

use active_labeling::minmax::Solver;
use active_labeling_cli::commands::{
    constants_csv, constants_table, constants_table_text, counterexample, game_csv, parse_distribution,
    parse_family, solve, verify_suite,
};
use active_labeling_cli::config::ExperimentConfig;
use active_labeling_cli::experiment::{run_experiment, write_outputs};
use active_labeling_cli::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Learning from single-bit label queries: experiments and checks.
#[derive(Parser)]
#[command(name = "active-labeling", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form reconstruction constants against Monte Carlo estimates.
    Constants(ConstantsArgs),
    /// Run a seeded multi-trial experiment and write curve.csv, curve.svg and manifest.txt.
    Run(RunArgs),
    /// Build and solve the query / prediction zero-sum game.
    Game(GameArgs),
    /// Run the quick invariant suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ConstantsArgs {
    /// Output dimensions to tabulate.
    #[arg(long = "m", value_delimiter = ',', default_values_t = vec![1usize, 2, 3, 10, 50])]
    m: Vec<usize>,
    /// Label bound M used by c1.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Monte Carlo draws per constant.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Perturb the closed forms (exercises the mismatch exit path).
    #[arg(long, hide = true)]
    corrupt_formula: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Config file of `key = value` lines; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Worker threads for trials (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// sin-regression | anchor-classification | libsvm | csv-regression
    #[arg(long)]
    task: Option<String>,
    /// active-median | active-least-squares | passive | full-sgd | infimum-loss | coordinate-passive
    #[arg(long)]
    strategy: Option<String>,
    /// Query budget T.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Gaussian kernel bandwidth.
    #[arg(long)]
    sigma: Option<String>,
    /// horizon | decaying | constant
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    gamma0: Option<String>,
    /// Ridge parameter.
    #[arg(long)]
    lambda: Option<String>,
    /// Label bound M.
    #[arg(long)]
    scale: Option<String>,
    /// Output dimension or number of classes.
    #[arg(long = "m")]
    m: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Number of representers.
    #[arg(long)]
    rank: Option<String>,
    #[arg(long)]
    train_fraction: Option<String>,
    #[arg(long)]
    input: Option<String>,
    /// Comma-separated target columns (csv-regression).
    #[arg(long)]
    targets: Option<String>,
    /// Output directory (default `out`).
    #[arg(long)]
    output: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Simplex,
    Mw,
}

#[derive(Args)]
struct GameArgs {
    /// Class distribution, e.g. `0.4,0.3,0.3`.
    #[arg(long, required_unless_present = "paper_counterexample")]
    p: Option<String>,
    /// Query sets as `1;2,3`, or `singletons`.
    #[arg(long, default_value = "singletons")]
    family: String,
    /// p = (0.4, 0.3, 0.3) against singleton queries.
    #[arg(long)]
    paper_counterexample: bool,
    #[arg(long, value_enum, default_value = "simplex")]
    solver: SolverArg,
    #[arg(long, default_value_t = 100_000)]
    iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

fn constants(a: ConstantsArgs) -> Result<(), CliError> {
    let rows = constants_table(&a.m, a.scale, a.samples, a.seed, a.corrupt_formula)?;
    print!("{}", constants_table_text(&rows));
    if let Some(path) = &a.csv {
        std::fs::write(path, constants_csv(&rows))
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    }
    let bad: Vec<String> = rows.iter().filter(|r| !r.agrees()).map(|r| r.m.to_string()).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(format!("Monte Carlo disagrees at m = {}", bad.join(", "))))
    }
}

fn run(a: RunArgs) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    let flags = [
        ("task", &a.task),
        ("strategy", &a.strategy),
        ("budget", &a.budget),
        ("trials", &a.trials),
        ("seed", &a.seed),
        ("sigma", &a.sigma),
        ("schedule", &a.schedule),
        ("gamma0", &a.gamma0),
        ("lambda", &a.lambda),
        ("scale", &a.scale),
        ("m", &a.m),
        ("epsilon", &a.epsilon),
        ("rank", &a.rank),
        ("train_fraction", &a.train_fraction),
        ("input", &a.input),
        ("targets", &a.targets),
        ("output", &a.output),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    for kv in &a.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("`--set {kv}`: expected KEY=VALUE")))?;
        cfg.set(k.trim(), v)?;
    }
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("out"));
    cfg.output = Some(dir.clone());
    let curve = run_experiment(&cfg, a.jobs)?;
    let files = write_outputs(&cfg, &curve, &dir)?;
    if let Some(last) = curve.points.last() {
        println!(
            "T = {}: mean risk {:.6} (std {:.6}, {} trials)",
            last.budget, last.mean_risk, last.std_risk, last.n_trials
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn game(a: GameArgs) -> Result<(), CliError> {
    let (p, family) = if a.paper_counterexample {
        counterexample()
    } else {
        let p = parse_distribution(a.p.as_deref().unwrap_or_default())?;
        let family = parse_family(&a.family, p.len())?;
        (p, family)
    };
    let solver = match a.solver {
        SolverArg::Simplex => Solver::Simplex,
        SolverArg::Mw => Solver::MultiplicativeWeights,
    };
    let (g, sol) = solve(&p, &family, solver, a.iterations, a.tol)?;
    print!("{}", game_csv(&g, &sol));
    Ok(())
}

fn verify(seed: u64) -> Result<(), CliError> {
    let checks = verify_suite(seed);
    for c in &checks {
        println!("{} {}  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(failed.join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Constants(a) => constants(a),
        Command::Run(a) => run(a),
        Command::Game(a) => game(a),
        Command::Verify { seed } => verify(seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
