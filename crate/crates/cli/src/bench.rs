//! Benchmark harness.
//!
//! A [`BenchSpec`] names a grid of instance sizes, a set of algorithms and a
//! per-run time budget. [`run_bench`] generates one instance per grid point
//! and seed, times every algorithm on it, and returns one [`BenchRecord`]
//! per run in a deterministic order: grid order, then seed order, then
//! algorithm order.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use sisdmdp_core::{
    generate_sisdmdp, instance_stats, policy_iteration, relative_value_iteration,
    value_iteration, Budget, Error, EvalCriterion, Evaluator, GeneratorConfig, IntraSolver,
    Model, PiOptions, Result, RviOptions,
};

/// Solver configurations the harness can time.
///
/// The `MRPI`/`RPI`/`RVI` family targets the average criterion, the
/// `MPI`/`PI`/`VI` family the discounted one. `Chiu+RB` and `Chiu+GTH` use
/// the decomposition-based evaluator (with the sweep or state-reduction
/// intra solver), `GJ` the dense Gauss-Jordan evaluator and `FP` the
/// fixed-point evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    MrpiChiuRb,
    MrpiChiuGth,
    RpiFp,
    RpiGj,
    Rvi,
    MpiChiuRb,
    PiFp,
    PiGj,
    Vi,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::MrpiChiuRb,
        Algorithm::MrpiChiuGth,
        Algorithm::RpiFp,
        Algorithm::RpiGj,
        Algorithm::Rvi,
        Algorithm::MpiChiuRb,
        Algorithm::PiFp,
        Algorithm::PiGj,
        Algorithm::Vi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MrpiChiuRb => "MRPI+Chiu+RB",
            Algorithm::MrpiChiuGth => "MRPI+Chiu+GTH",
            Algorithm::RpiFp => "RPI+FP",
            Algorithm::RpiGj => "RPI+GJ",
            Algorithm::Rvi => "RVI",
            Algorithm::MpiChiuRb => "MPI+Chiu+RB",
            Algorithm::PiFp => "PI+FP",
            Algorithm::PiGj => "PI+GJ",
            Algorithm::Vi => "VI",
        }
    }

    /// Recognizes the exact display name, ignoring ASCII case.
    pub fn parse(token: &str) -> Option<Algorithm> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name().eq_ignore_ascii_case(token))
    }

    /// True for the algorithms that optimize the long-run average reward.
    pub fn is_average(self) -> bool {
        matches!(
            self,
            Algorithm::MrpiChiuRb
                | Algorithm::MrpiChiuGth
                | Algorithm::RpiFp
                | Algorithm::RpiGj
                | Algorithm::Rvi
        )
    }

    pub fn supports(self, criterion: &EvalCriterion<f64>) -> bool {
        self.is_average() == criterion.is_average()
    }

    /// All algorithms compatible with `criterion`, in the canonical order.
    pub fn all_for(criterion: &EvalCriterion<f64>) -> Vec<Algorithm> {
        Algorithm::ALL
            .iter()
            .copied()
            .filter(|a| a.supports(criterion))
            .collect()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lower-case token used in report rows.
pub fn criterion_token(criterion: &EvalCriterion<f64>) -> &'static str {
    if criterion.is_average() {
        "average"
    } else {
        "discounted"
    }
}

/// Grid, algorithm set and solver settings for one benchmark campaign.
#[derive(Debug, Clone)]
pub struct BenchSpec {
    /// `(n_actions, n_states, n_partitions)` tuples, one instance family
    /// each.
    pub grid: Vec<(usize, usize, usize)>,
    pub algorithms: Vec<Algorithm>,
    pub criterion: EvalCriterion<f64>,
    /// Convergence tolerance handed to the iterative solvers.
    pub epsilon: f64,
    /// Iteration cap for the outer loops and the fixed-point sweeps.
    pub max_iterations: usize,
    /// One instance is generated per grid point and seed.
    pub seeds: Vec<u64>,
    /// Wall-clock budget per (instance, algorithm) run; zero expires
    /// immediately.
    pub time_budget_s: f64,
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        self.criterion.validate()?;
        if self.algorithms.is_empty() {
            return Err(Error::InvalidConfig("no algorithms selected".into()));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if !a.supports(&self.criterion) {
                return Err(Error::InvalidConfig(format!(
                    "algorithm {a} is not defined under the {} criterion",
                    criterion_token(&self.criterion)
                )));
            }
            if self.algorithms[..i].contains(a) {
                return Err(Error::InvalidConfig(format!("algorithm {a} listed twice")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("iteration cap must be positive".into()));
        }
        if !self.time_budget_s.is_finite() || self.time_budget_s < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "time budget must be a finite non-negative number of seconds, got {}",
                self.time_budget_s
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("no seeds given".into()));
        }
        for &(a, n, k) in &self.grid {
            GeneratorConfig::new(n, k, a, 0).validate()?;
        }
        Ok(())
    }
}

/// Result summary column: the average reward, or the spread of a discounted
/// value vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueCell {
    /// The run produced no values (budget hit or failure).
    Empty,
    Rho(f64),
    Summary { min: f64, max: f64, mean: f64 },
}

/// One timed run of one algorithm on one generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    /// `average` or `discounted`.
    pub criterion: String,
    pub n_actions: usize,
    pub n_states: usize,
    pub n_partitions: usize,
    pub seed: u64,
    /// Wall time of the run; `None` once the run exceeded its budget.
    pub time_s: Option<f64>,
    pub iterations: usize,
    pub value: ValueCell,
    pub converged: bool,
    /// Solver stop token, `budget`, or `error`.
    pub stop_reason: String,
    /// Total intra-matrix entries over all partitions of the instance.
    pub total_intra_arcs: usize,
}

/// Everything a single algorithm run reports back.
#[derive(Debug, Clone)]
pub struct AlgorithmRun {
    pub values: Vec<f64>,
    pub rho: Option<f64>,
    pub policy: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: String,
    pub eval_time_s: f64,
    pub improve_time_s: f64,
}

/// Runs one algorithm on `model` with the given solver settings.
pub fn run_algorithm(
    algorithm: Algorithm,
    model: &Model,
    criterion: &EvalCriterion<f64>,
    epsilon: f64,
    max_iterations: usize,
    budget: Option<&Budget>,
) -> Result<AlgorithmRun> {
    if !algorithm.supports(criterion) {
        return Err(Error::InvalidConfig(format!(
            "algorithm {algorithm} is not defined under the {} criterion",
            criterion_token(criterion)
        )));
    }
    let pi_options = PiOptions {
        max_iterations,
    };
    let pi = |evaluator: Evaluator| -> Result<AlgorithmRun> {
        let out = policy_iteration(model, criterion, evaluator, &pi_options, budget)?;
        Ok(AlgorithmRun {
            values: out.eval.values,
            rho: out.eval.rho,
            policy: out.policy.actions().to_vec(),
            iterations: out.stats.iterations,
            converged: out.stats.converged,
            stop_reason: out.stats.stop_reason.to_string(),
            eval_time_s: out.stats.eval_time_s,
            improve_time_s: out.stats.improve_time_s,
        })
    };
    match algorithm {
        Algorithm::MrpiChiuRb | Algorithm::MpiChiuRb => pi(Evaluator::Structured {
            intra: IntraSolver::Robertazzi,
        }),
        Algorithm::MrpiChiuGth => pi(Evaluator::Structured {
            intra: IntraSolver::Gth,
        }),
        Algorithm::RpiGj | Algorithm::PiGj => pi(Evaluator::Direct),
        Algorithm::RpiFp | Algorithm::PiFp => pi(Evaluator::FixedPoint {
            epsilon,
            max_iterations,
        }),
        Algorithm::Rvi => {
            let options = RviOptions {
                epsilon,
                max_iterations,
                ..RviOptions::default()
            };
            let out = relative_value_iteration(model, &options, budget)?;
            Ok(AlgorithmRun {
                values: out.values,
                rho: Some(out.rho),
                policy: out.policy.actions().to_vec(),
                iterations: out.stats.iterations,
                converged: out.stats.converged,
                stop_reason: out.stats.stop_reason.to_string(),
                eval_time_s: out.stats.eval_time_s,
                improve_time_s: out.stats.improve_time_s,
            })
        }
        Algorithm::Vi => {
            let gamma = *criterion
                .discount()
                .expect("VI only runs under the discounted criterion");
            let out = value_iteration(model, gamma, epsilon, max_iterations, budget)?;
            Ok(AlgorithmRun {
                values: out.values,
                rho: None,
                policy: out.policy.actions().to_vec(),
                iterations: out.stats.iterations,
                converged: out.stats.converged,
                stop_reason: out.stats.stop_reason.to_string(),
                eval_time_s: out.stats.eval_time_s,
                improve_time_s: out.stats.improve_time_s,
            })
        }
    }
}

fn value_cell(criterion: &EvalCriterion<f64>, run: &AlgorithmRun) -> ValueCell {
    if criterion.is_average() {
        match run.rho {
            Some(rho) => ValueCell::Rho(rho),
            None => ValueCell::Empty,
        }
    } else if run.values.is_empty() {
        ValueCell::Empty
    } else {
        let min = run.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = run.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = run.values.iter().sum::<f64>() / run.values.len() as f64;
        ValueCell::Summary { min, max, mean }
    }
}

fn run_single(
    algorithm: Algorithm,
    model: &Model,
    spec: &BenchSpec,
    grid: (usize, usize, usize),
    seed: u64,
    total_intra_arcs: usize,
) -> BenchRecord {
    let (n_actions, n_states, n_partitions) = grid;
    let base = BenchRecord {
        algorithm,
        criterion: criterion_token(&spec.criterion).to_string(),
        n_actions,
        n_states,
        n_partitions,
        seed,
        time_s: None,
        iterations: 0,
        value: ValueCell::Empty,
        converged: false,
        stop_reason: "budget".to_string(),
        total_intra_arcs,
    };
    let budget = Budget::from_seconds(spec.time_budget_s);
    if budget.exceeded() {
        return base;
    }
    let start = Instant::now();
    match run_algorithm(
        algorithm,
        model,
        &spec.criterion,
        spec.epsilon,
        spec.max_iterations,
        Some(&budget),
    ) {
        Ok(run) => BenchRecord {
            time_s: Some(start.elapsed().as_secs_f64()),
            iterations: run.iterations,
            value: value_cell(&spec.criterion, &run),
            converged: run.converged,
            stop_reason: run.stop_reason,
            ..base
        },
        Err(Error::BudgetExceeded(_)) => base,
        Err(e) => {
            log::warn!(
                "{algorithm} failed on (|A|={n_actions}, N={n_states}, K={n_partitions}), \
                 seed {seed}: {e}"
            );
            BenchRecord {
                time_s: Some(start.elapsed().as_secs_f64()),
                stop_reason: "error".to_string(),
                ..base
            }
        }
    }
}

fn run_grid_point(spec: &BenchSpec, grid: (usize, usize, usize), seed: u64) -> Vec<BenchRecord> {
    let (n_actions, n_states, n_partitions) = grid;
    let config = GeneratorConfig::new(n_states, n_partitions, n_actions, seed);
    let (model, layout) = match generate_sisdmdp(&config) {
        Ok(pair) => pair,
        Err(e) => {
            log::warn!(
                "generator failed on (|A|={n_actions}, N={n_states}, K={n_partitions}), \
                 seed {seed}: {e}"
            );
            return spec
                .algorithms
                .iter()
                .map(|&algorithm| BenchRecord {
                    algorithm,
                    criterion: criterion_token(&spec.criterion).to_string(),
                    n_actions,
                    n_states,
                    n_partitions,
                    seed,
                    time_s: Some(0.0),
                    iterations: 0,
                    value: ValueCell::Empty,
                    converged: false,
                    stop_reason: "error".to_string(),
                    total_intra_arcs: 0,
                })
                .collect();
        }
    };
    let total_intra_arcs = instance_stats(&model, &layout)
        .map(|s| s.total_intra_arcs)
        .unwrap_or(0);
    spec.algorithms
        .iter()
        .map(|&algorithm| run_single(algorithm, &model, spec, grid, seed, total_intra_arcs))
        .collect()
}

/// Builds a worker pool honoring the `SISDMDP_THREADS` environment variable
/// (unset or `0` picks the core count).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("SISDMDP_THREADS") {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) => n,
            Err(_) => {
                log::warn!("ignoring unparsable SISDMDP_THREADS value {raw:?}");
                0
            }
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
}

/// Runs the whole campaign; records come back in grid, then seed, then
/// algorithm order regardless of worker scheduling.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<BenchRecord>> {
    spec.validate()?;
    let jobs: Vec<((usize, usize, usize), u64)> = spec
        .grid
        .iter()
        .flat_map(|&grid| spec.seeds.iter().map(move |&seed| (grid, seed)))
        .collect();
    let pool = thread_pool()?;
    let nested: Vec<Vec<BenchRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(grid, seed)| run_grid_point(spec, grid, seed))
            .collect()
    });
    Ok(nested.into_iter().flatten().collect())
}

/// Flags, per `(grid point, seed)` group, the converged record with the
/// smallest wall time. Returns one flag per record, in order.
pub fn fastest_flags(records: &[BenchRecord]) -> Vec<bool> {
    let mut flags = vec![false; records.len()];
    let mut groups: Vec<((usize, usize, usize, u64), usize)> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let key = (r.n_actions, r.n_states, r.n_partitions, r.seed);
        let time = match (r.converged, r.time_s) {
            (true, Some(t)) => t,
            _ => continue,
        };
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, best)) => {
                let current = records[*best].time_s.unwrap();
                if time < current {
                    *best = i;
                }
            }
            None => groups.push((key, i)),
        }
    }
    for (_, best) in groups {
        flags[best] = true;
    }
    flags
}
