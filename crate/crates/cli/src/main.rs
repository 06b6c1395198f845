//! `sisdmdp`: generate, validate, solve, benchmark and cross-check
//! single-input superstate decomposable MDP instances.
//!
//! Exit codes: 0 on success, 1 when an input fails validation (bad file,
//! bad configuration, structural violations), 2 when a solver fails on
//! valid input (singular system, iteration or budget exhaustion).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sisdmdp_cli::bench::{criterion_token, run_algorithm, run_bench, Algorithm, BenchSpec};
use sisdmdp_cli::compare::compare_solvers;
use sisdmdp_cli::io::{describe_violations, parse_model, serialize_model};
use sisdmdp_cli::report::{emit_report, ReportFormat};
use sisdmdp_core::{
    classify_release_states, generate_sisdmdp, instance_stats, validate_structure, Budget,
    Error, EvalCriterion, GeneratorConfig, Model,
};

#[derive(Parser)]
#[command(name = "sisdmdp", version, about = "Solver toolkit for single-input superstate decomposable MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as a model file.
    Generate(GenerateArgs),
    /// Check the structural properties of a model file.
    Validate(ValidateArgs),
    /// Find an optimal policy for a model file.
    Solve(SolveArgs),
    /// Time the solvers over a grid of generated instances.
    Bench(BenchArgs),
    /// Cross-check the decomposition solvers against dense oracles.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Average,
    Discounted,
}

fn make_criterion(arg: CriterionArg, gamma: f64) -> EvalCriterion<f64> {
    match arg {
        CriterionArg::Average => EvalCriterion::Average,
        CriterionArg::Discounted => EvalCriterion::Discounted { gamma },
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of states; must be a multiple of the partition count.
    #[arg(long)]
    states: usize,
    /// Number of partitions.
    #[arg(long)]
    partitions: usize,
    /// Number of actions.
    #[arg(long, default_value_t = 1)]
    actions: usize,
    /// Generator seed; identical seeds reproduce identical files.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Model file to check.
    model: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Model file to solve.
    model: PathBuf,
    #[arg(long, value_enum, default_value = "average")]
    criterion: CriterionArg,
    /// Discount factor, used when the criterion is `discounted`.
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    /// Convergence tolerance for the iterative solvers.
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    /// Iteration cap.
    #[arg(long = "max-iter", default_value_t = 100_000)]
    max_iter: usize,
    /// Algorithms to run; defaults to the decomposition-based policy
    /// iteration for the chosen criterion.
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<String>,
    /// Wall-clock budget per algorithm, in seconds.
    #[arg(long = "budget-s")]
    budget_s: Option<f64>,
    /// Write the full result (policy and values) as JSON to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// State counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    states: Vec<usize>,
    /// Partition counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    partitions: Vec<usize>,
    /// Action counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    actions: Vec<usize>,
    /// Instance seeds, comma separated; each grid point is generated once
    /// per seed.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seed: Vec<u64>,
    #[arg(long, value_enum, default_value = "average")]
    criterion: CriterionArg,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-9)]
    epsilon: f64,
    #[arg(long = "max-iter", default_value_t = 100_000)]
    max_iter: usize,
    /// Algorithms to time; defaults to every algorithm compatible with the
    /// criterion.
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<String>,
    /// Wall-clock budget per run, in seconds.
    #[arg(long = "budget-s", default_value_t = 60.0)]
    budget_s: f64,
    /// Report format: csv, markdown or json-lines.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Model file to cross-check.
    model: PathBuf,
    #[arg(long, value_enum, default_value = "average")]
    criterion: CriterionArg,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
}

/// Validation failures exit with 1, solver failures with 2.
fn exit_code(error: &Error) -> u8 {
    match error {
        Error::InvalidModel(_) | Error::Structure(_) | Error::InvalidConfig(_) => 1,
        Error::Singular(_) | Error::IterationLimit(_) | Error::BudgetExceeded(_) => 2,
    }
}

fn read_model(path: &PathBuf) -> Result<Model, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidModel(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn resolve_algorithms(
    tokens: &[String],
    criterion: &EvalCriterion<f64>,
    default_all: bool,
) -> Result<Vec<Algorithm>, Error> {
    if tokens.is_empty() {
        if default_all {
            return Ok(Algorithm::all_for(criterion));
        }
        return Ok(vec![if criterion.is_average() {
            Algorithm::MrpiChiuRb
        } else {
            Algorithm::MpiChiuRb
        }]);
    }
    tokens
        .iter()
        .map(|token| {
            Algorithm::parse(token).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown algorithm `{token}`; known: {}",
                    Algorithm::ALL.map(|a| a.name()).join(", ")
                ))
            })
        })
        .collect()
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let config = GeneratorConfig::new(args.states, args.partitions, args.actions, args.seed);
    let (model, layout) = generate_sisdmdp(&config)?;
    let stats = instance_stats(&model, &layout)?;
    log::info!(
        "generated N={} K={} |A|={}: {} intra arcs, {} cross arcs, density {:.4}",
        args.states,
        args.partitions,
        args.actions,
        stats.total_intra_arcs,
        stats.cross_arcs,
        stats.density
    );
    write_output(&args.out, &serialize_model(&model))
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Error> {
    let text = fs::read_to_string(&args.model)
        .map_err(|e| Error::InvalidModel(format!("cannot read {}: {e}", args.model.display())))?;
    let (chains, layout) = sisdmdp_cli::io::load_document(&text)?;
    let mut all_ok = true;
    for (a, chain) in chains.iter().enumerate() {
        let report = validate_structure(chain, &layout)?;
        let ok = report.is_decomposable();
        all_ok &= ok;
        println!(
            "action {a}: single_input {}, single_cycle {}, canonical_order {}, stochastic {}, \
             irreducible {}, aperiodic {}",
            verdict(report.single_input_ok()),
            verdict(report.single_cycle_ok()),
            verdict(report.canonical_order_ok),
            verdict(report.stochastic_ok()),
            report.irreducible,
            report.aperiodic,
        );
        if ok {
            let release = classify_release_states(chain, &layout)?;
            let sizes: Vec<usize> = release.per_partition().iter().map(Vec::len).collect();
            println!("action {a}: release states per partition {sizes:?}");
        } else {
            println!("action {a}: {}", describe_violations(&report));
        }
    }
    if all_ok {
        println!(
            "model ok: {} states, {} partitions, {} actions",
            layout.n_states(),
            layout.k(),
            chains.len()
        );
        Ok(())
    } else {
        Err(Error::Structure("model failed validation".into()))
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    let model = read_model(&args.model)?;
    let criterion = make_criterion(args.criterion, args.gamma);
    criterion.validate()?;
    let algorithms = resolve_algorithms(&args.algorithms, &criterion, false)?;
    let budget = args.budget_s.map(Budget::from_seconds);
    let mut results = Vec::new();
    for algorithm in algorithms {
        let start = Instant::now();
        let run = run_algorithm(
            algorithm,
            &model,
            &criterion,
            args.epsilon,
            args.max_iter,
            budget.as_ref(),
        )?;
        let time_s = start.elapsed().as_secs_f64();
        println!("algorithm: {algorithm}");
        println!(
            "  instance: {} states, {} partitions, {} actions",
            model.n_states(),
            model.layout().k(),
            model.n_actions()
        );
        println!("  iterations: {}", run.iterations);
        println!("  stop reason: {}", run.stop_reason);
        println!("  converged: {}", run.converged);
        println!(
            "  time: {time_s:.6} s (evaluation {:.6} s, improvement {:.6} s)",
            run.eval_time_s, run.improve_time_s
        );
        if let Some(rho) = run.rho {
            println!("  rho: {rho}");
        }
        let min = run.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = run.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("  values: min {min}, max {max}");
        results.push(serde_json::json!({
            "algorithm": algorithm.name(),
            "criterion": criterion_token(&criterion),
            "iterations": run.iterations,
            "stop_reason": run.stop_reason,
            "converged": run.converged,
            "time_s": time_s,
            "eval_time_s": run.eval_time_s,
            "improve_time_s": run.improve_time_s,
            "rho": run.rho,
            "policy": run.policy,
            "values": run.values,
        }));
    }
    if let Some(path) = &args.out {
        let doc = serde_json::json!({ "results": results });
        let text = serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::InvalidConfig(format!("result serialization: {e}")))?;
        fs::write(path, text)
            .map_err(|e| Error::InvalidConfig(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let format: ReportFormat = args.format.parse()?;
    let criterion = make_criterion(args.criterion, args.gamma);
    let algorithms = resolve_algorithms(&args.algorithms, &criterion, true)?;
    let mut grid = Vec::new();
    for &a in &args.actions {
        for &n in &args.states {
            for &k in &args.partitions {
                grid.push((a, n, k));
            }
        }
    }
    let spec = BenchSpec {
        grid,
        algorithms,
        criterion,
        epsilon: args.epsilon,
        max_iterations: args.max_iter,
        seeds: args.seed.clone(),
        time_budget_s: args.budget_s,
    };
    let records = run_bench(&spec)?;
    write_output(&args.out, &emit_report(&records, format))
}

fn cmd_compare(args: CompareArgs) -> Result<(), Error> {
    let model = read_model(&args.model)?;
    let criterion = make_criterion(args.criterion, args.gamma);
    let report = compare_solvers(&model, &criterion)?;
    print!("{}", report.render());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Compare(args) => cmd_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
