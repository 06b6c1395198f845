//! Dynamic-programming control: policy iteration with pluggable evaluators,
//! discounted value iteration, and relative value iteration for the average
//! criterion.

use std::fmt;
use std::time::Instant;

use crate::budget::{check_opt, Budget};
use crate::chain::{MdpModel, Policy};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_policy_baseline, evaluate_policy_structured, BaselineSolver, EvalCriterion,
    EvalResult,
};
use crate::scalar::Scalar;
use crate::steady::IntraSolver;

/// Absolute tolerance within which two action values count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// Why an iterative algorithm stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Policy iteration reproduced the incumbent policy.
    PolicyFixed,
    /// The span seminorm of the update dropped below the tolerance.
    Span,
    /// The sup norm of the update dropped below the tolerance.
    Linf,
    /// The iteration cap was reached.
    MaxIter,
    /// The best span seen stopped improving over a trailing window.
    Stagnation,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let token = match self {
            StopReason::PolicyFixed => "policy_fixed",
            StopReason::Span => "span",
            StopReason::Linf => "linf",
            StopReason::MaxIter => "max_iter",
            StopReason::Stagnation => "stagnation",
        };
        f.write_str(token)
    }
}

/// Timing and convergence bookkeeping shared by the solvers.
#[derive(Debug, Clone)]
pub struct RunStats {
    pub iterations: usize,
    pub wall_time_s: f64,
    pub eval_time_s: f64,
    pub improve_time_s: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
}

/// Which evaluator backs each policy-iteration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Evaluator {
    /// Decomposition-based exact evaluation.
    Structured { intra: IntraSolver },
    /// Dense Gauss-Jordan solve of the full system.
    Direct,
    /// Successive-approximation sweeps.
    FixedPoint { epsilon: f64, max_iterations: usize },
}

/// Action values `Q(s, a)` for a fixed value vector.
#[derive(Debug, Clone)]
pub struct QTable<S: Scalar> {
    q: Vec<Vec<S>>,
}

impl<S: Scalar> QTable<S> {
    /// Number of states.
    pub fn n_states(&self) -> usize {
        self.q.len()
    }

    /// Number of actions.
    pub fn n_actions(&self) -> usize {
        self.q.first().map_or(0, Vec::len)
    }

    /// `Q(s, a)`.
    pub fn value(&self, s: usize, a: usize) -> &S {
        &self.q[s][a]
    }

    /// All action values of state `s`.
    pub fn row(&self, s: usize) -> &[S] {
        &self.q[s]
    }
}

/// Computes `Q(s, a) = r_a(s) + lambda * sum_t P_a(s, t) V(t)` for every
/// state and action; `lambda` is 1 under the average criterion and the
/// discount factor otherwise.
pub fn q_values<S: Scalar>(model: &MdpModel<S>, values: &[S], lambda: &S) -> Result<QTable<S>> {
    let n = model.n_states();
    if values.len() != n {
        return Err(Error::InvalidModel(format!(
            "got {} values for {n} states",
            values.len()
        )));
    }
    let mut q = vec![Vec::with_capacity(model.n_actions()); n];
    for a in 0..model.n_actions() {
        let chain = model.action(a);
        for s in 0..n {
            let mut acc = S::zero();
            for (t, p) in chain.row(s) {
                acc = acc + p.clone() * values[*t].clone();
            }
            q[s].push(chain.reward(s).clone() + lambda.clone() * acc);
        }
    }
    Ok(QTable { q })
}

fn select_action<S: Scalar>(row: &[S], incumbent: Option<usize>, tol: &S) -> usize {
    let mut best = 0;
    for (a, v) in row.iter().enumerate().skip(1) {
        if *v > row[best] {
            best = a;
        }
    }
    if let Some(inc) = incumbent {
        if row[best].clone() - row[inc].clone() <= *tol {
            return inc;
        }
    }
    for (a, v) in row.iter().enumerate() {
        if row[best].clone() - v.clone() <= *tol {
            return a;
        }
    }
    best
}

/// Greedy policy improvement that retains the incumbent action whenever it
/// is within [`TIE_TOL`] of the best action value, and otherwise picks the
/// lowest-index action within [`TIE_TOL`] of the best. The retention rule is
/// what makes policy iteration terminate instead of cycling between
/// equal-valued policies.
pub fn improve_policy<S: Scalar>(q: &QTable<S>, incumbent: &Policy) -> Result<Policy> {
    let n = q.n_states();
    if incumbent.len() != n {
        return Err(Error::InvalidModel(format!(
            "incumbent policy covers {} states, table has {n}",
            incumbent.len()
        )));
    }
    if q.n_actions() == 0 {
        return Err(Error::InvalidModel("no actions in table".into()));
    }
    let tol = S::from_f64_lossless(TIE_TOL);
    let mut actions = Vec::with_capacity(n);
    for s in 0..n {
        actions.push(select_action(q.row(s), Some(incumbent.action(s)), &tol));
    }
    Ok(Policy::new(actions))
}

fn greedy_policy<S: Scalar>(model: &MdpModel<S>, values: &[S], lambda: &S) -> Result<Policy> {
    let q = q_values(model, values, lambda)?;
    let tol = S::from_f64_lossless(TIE_TOL);
    let mut actions = Vec::with_capacity(q.n_states());
    for s in 0..q.n_states() {
        actions.push(select_action(q.row(s), None, &tol));
    }
    Ok(Policy::new(actions))
}

fn evaluate<S: Scalar>(
    model: &MdpModel<S>,
    policy: &Policy,
    criterion: &EvalCriterion<S>,
    evaluator: Evaluator,
    budget: Option<&Budget>,
) -> Result<EvalResult<S>> {
    let chain = model.induce_chain(policy)?;
    match evaluator {
        Evaluator::Structured { intra } => {
            evaluate_policy_structured(&chain, model.layout(), criterion, intra)
        }
        Evaluator::Direct => evaluate_policy_baseline(
            &chain,
            Some(model.layout()),
            criterion,
            BaselineSolver::Direct,
            budget,
        ),
        Evaluator::FixedPoint {
            epsilon,
            max_iterations,
        } => evaluate_policy_baseline(
            &chain,
            Some(model.layout()),
            criterion,
            BaselineSolver::FixedPoint {
                epsilon,
                max_iterations,
            },
            budget,
        ),
    }
}

/// Knobs for [`policy_iteration`].
#[derive(Debug, Clone, Copy)]
pub struct PiOptions {
    /// Cap on improvement rounds.
    pub max_iterations: usize,
}

impl Default for PiOptions {
    fn default() -> Self {
        PiOptions {
            max_iterations: 10_000,
        }
    }
}

/// Result of a policy-iteration run.
#[derive(Debug, Clone)]
pub struct PolicyIterationOutcome<S: Scalar> {
    /// The final policy.
    pub policy: Policy,
    /// Evaluation of the final policy.
    pub eval: EvalResult<S>,
    /// Timing and convergence bookkeeping.
    pub stats: RunStats,
    /// Every distinct policy visited, starting from the all-zeros policy.
    pub trace: Vec<Policy>,
}

/// Policy iteration from the all-zeros policy: evaluate the incumbent with
/// the chosen evaluator, improve greedily, stop when the policy reproduces
/// itself. Hitting the iteration cap returns the last policy, freshly
/// evaluated, flagged unconverged.
pub fn policy_iteration<S: Scalar>(
    model: &MdpModel<S>,
    criterion: &EvalCriterion<S>,
    evaluator: Evaluator,
    options: &PiOptions,
    budget: Option<&Budget>,
) -> Result<PolicyIterationOutcome<S>> {
    criterion.validate()?;
    if options.max_iterations == 0 {
        return Err(Error::InvalidConfig("iteration cap must be positive".into()));
    }
    let start = Instant::now();
    let lambda = match criterion.discount() {
        Some(g) => g.clone(),
        None => S::one(),
    };

    let mut policy = Policy::constant(model.n_states(), 0);
    let mut trace = vec![policy.clone()];
    let mut eval_time = 0.0;
    let mut improve_time = 0.0;
    let mut iterations = 0;

    loop {
        check_opt(budget)?;
        iterations += 1;

        let t = Instant::now();
        let eval = evaluate(model, &policy, criterion, evaluator, budget)?;
        eval_time += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let q = q_values(model, &eval.values, &lambda)?;
        let next = improve_policy(&q, &policy)?;
        improve_time += t.elapsed().as_secs_f64();

        if next == policy {
            let stats = RunStats {
                iterations,
                wall_time_s: start.elapsed().as_secs_f64(),
                eval_time_s: eval_time,
                improve_time_s: improve_time,
                converged: true,
                stop_reason: StopReason::PolicyFixed,
            };
            return Ok(PolicyIterationOutcome {
                policy,
                eval,
                stats,
                trace,
            });
        }
        policy = next;
        trace.push(policy.clone());

        if iterations >= options.max_iterations {
            let t = Instant::now();
            let eval = evaluate(model, &policy, criterion, evaluator, budget)?;
            eval_time += t.elapsed().as_secs_f64();
            let stats = RunStats {
                iterations,
                wall_time_s: start.elapsed().as_secs_f64(),
                eval_time_s: eval_time,
                improve_time_s: improve_time,
                converged: false,
                stop_reason: StopReason::MaxIter,
            };
            return Ok(PolicyIterationOutcome {
                policy,
                eval,
                stats,
                trace,
            });
        }
    }
}

/// Result of a value-iteration run.
#[derive(Debug, Clone)]
pub struct ValueIterationOutcome<S: Scalar> {
    /// Final value vector.
    pub values: Vec<S>,
    /// Greedy policy extracted from the final values.
    pub policy: Policy,
    /// Timing and convergence bookkeeping.
    pub stats: RunStats,
}

/// Discounted value iteration from `V = 0`: Bellman-optimality sweeps until
/// the sup-norm update drops below `epsilon` or the sweep cap is reached
/// (returned flagged unconverged, not an error).
pub fn value_iteration<S: Scalar>(
    model: &MdpModel<S>,
    gamma: S,
    epsilon: f64,
    max_iterations: usize,
    budget: Option<&Budget>,
) -> Result<ValueIterationOutcome<S>> {
    let criterion = EvalCriterion::Discounted {
        gamma: gamma.clone(),
    };
    criterion.validate()?;
    if max_iterations == 0 {
        return Err(Error::InvalidConfig("sweep cap must be positive".into()));
    }
    let start = Instant::now();
    let eps = S::from_f64_lossless(epsilon);
    let n = model.n_states();

    let mut values = vec![S::zero(); n];
    let mut iterations = 0;
    let mut converged = false;
    let sweep_start = Instant::now();
    while iterations < max_iterations {
        check_opt(budget)?;
        iterations += 1;
        let q = q_values(model, &values, &gamma)?;
        let mut next = Vec::with_capacity(n);
        let mut delta = S::zero();
        for s in 0..n {
            let row = q.row(s);
            let mut best = row[0].clone();
            for v in &row[1..] {
                if *v > best {
                    best = v.clone();
                }
            }
            let diff = (best.clone() - values[s].clone()).abs();
            if diff > delta {
                delta = diff;
            }
            next.push(best);
        }
        values = next;
        if delta < eps {
            converged = true;
            break;
        }
    }
    let eval_time = sweep_start.elapsed().as_secs_f64();

    let t = Instant::now();
    let policy = greedy_policy(model, &values, &gamma)?;
    let improve_time = t.elapsed().as_secs_f64();

    let stats = RunStats {
        iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
        eval_time_s: eval_time,
        improve_time_s: improve_time,
        converged,
        stop_reason: if converged {
            StopReason::Linf
        } else {
            StopReason::MaxIter
        },
    };
    Ok(ValueIterationOutcome {
        values,
        policy,
        stats,
    })
}

/// Knobs for [`relative_value_iteration`].
#[derive(Debug, Clone, Copy)]
pub struct RviOptions {
    /// Span tolerance on the update.
    pub epsilon: f64,
    /// Cap on sweeps.
    pub max_iterations: usize,
    /// Trailing window for stagnation detection.
    pub stagnation_window: usize,
    /// Minimum improvement of the best span over the window.
    pub stagnation_threshold: f64,
}

impl Default for RviOptions {
    fn default() -> Self {
        RviOptions {
            epsilon: 1e-15,
            max_iterations: 100_000,
            stagnation_window: 100,
            stagnation_threshold: 1e-13,
        }
    }
}

/// Result of a relative-value-iteration run.
#[derive(Debug, Clone)]
pub struct RviOutcome<S: Scalar> {
    /// Final relative values, anchored at state 0.
    pub values: Vec<S>,
    /// Average-reward estimate: midpoint of the final update's range, which
    /// brackets the optimal average reward and stays meaningful even when
    /// the iteration oscillates on a periodic chain.
    pub rho: S,
    /// Greedy policy extracted from the final values.
    pub policy: Policy,
    /// Timing and convergence bookkeeping.
    pub stats: RunStats,
}

/// Relative value iteration for the average criterion, anchored at state 0:
/// each sweep applies the Bellman-optimality operator and subtracts the
/// reference state's new value. Stops when the span of the update drops
/// below `epsilon`, when the best span seen stops improving by more than the
/// stagnation threshold over the trailing window (periodic chains never
/// spiral in, they orbit), or at the sweep cap.
pub fn relative_value_iteration<S: Scalar>(
    model: &MdpModel<S>,
    options: &RviOptions,
    budget: Option<&Budget>,
) -> Result<RviOutcome<S>> {
    if options.max_iterations == 0 {
        return Err(Error::InvalidConfig("sweep cap must be positive".into()));
    }
    if options.stagnation_window == 0 {
        return Err(Error::InvalidConfig(
            "stagnation window must be positive".into(),
        ));
    }
    let start = Instant::now();
    let n = model.n_states();
    let eps = S::from_f64_lossless(options.epsilon);
    let one = S::one();
    let half = S::from_f64_lossless(0.5);

    let mut values = vec![S::zero(); n];
    let mut rho = S::zero();
    let mut iterations = 0;
    let mut converged = false;
    let mut stop_reason = StopReason::MaxIter;
    let mut prefix_min: Vec<f64> = Vec::new();

    while iterations < options.max_iterations {
        check_opt(budget)?;
        iterations += 1;

        let q = q_values(model, &values, &one)?;
        let mut next = Vec::with_capacity(n);
        for s in 0..n {
            let row = q.row(s);
            let mut best = row[0].clone();
            for v in &row[1..] {
                if *v > best {
                    best = v.clone();
                }
            }
            next.push(best);
        }

        let mut lo = next[0].clone() - values[0].clone();
        let mut hi = lo.clone();
        for s in 1..n {
            let diff = next[s].clone() - values[s].clone();
            if diff < lo {
                lo = diff.clone();
            }
            if diff > hi {
                hi = diff;
            }
        }
        let span = hi.clone() - lo.clone();
        rho = (lo + hi) * half.clone();

        let anchor = next[0].clone();
        for v in next.iter_mut() {
            *v = v.clone() - anchor.clone();
        }
        values = next;

        if span < eps {
            converged = true;
            stop_reason = StopReason::Span;
            break;
        }

        let span_f = span.to_f64_approx();
        let running = prefix_min.last().copied().unwrap_or(f64::INFINITY);
        prefix_min.push(running.min(span_f));
        let len = prefix_min.len();
        if len > options.stagnation_window {
            let before = prefix_min[len - 1 - options.stagnation_window];
            let now = prefix_min[len - 1];
            if before - now < options.stagnation_threshold {
                stop_reason = StopReason::Stagnation;
                break;
            }
        }
    }

    let t = Instant::now();
    let policy = greedy_policy(model, &values, &one)?;
    let improve_time = t.elapsed().as_secs_f64();
    let wall = start.elapsed().as_secs_f64();

    let stats = RunStats {
        iterations,
        wall_time_s: wall,
        eval_time_s: wall - improve_time,
        improve_time_s: improve_time,
        converged,
        stop_reason,
    };
    Ok(RviOutcome {
        values,
        rho,
        policy,
        stats,
    })
}
