//! Policy evaluation: the decomposition-based exact evaluator that reduces
//! the `N x N` linear system to one `K x K` system plus per-partition
//! backward substitutions, and the classical baselines (direct dense solve,
//! fixed-point iteration) it is compared against.

use crate::budget::{check_opt, Budget};
use crate::chain::{PartitionLayout, SparseChain, STOCHASTIC_TOL};
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::scalar::{smax, Scalar};
use crate::steady::{
    chiu_average_reward, dense_transition_matrix, gth_steady_state, IntraSolver,
};

/// Accepted residual of the redundant root equation when solving the
/// superstate system under the average criterion.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Optimization criterion for evaluation and control.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalCriterion<S: Scalar> {
    /// Long-run average reward; values are relative, anchored at state 0.
    Average,
    /// Expected discounted total reward with factor `gamma` in `[0, 1)`.
    Discounted { gamma: S },
}

impl<S: Scalar> EvalCriterion<S> {
    /// Rejects discount factors outside `[0, 1)`.
    pub fn validate(&self) -> Result<()> {
        if let EvalCriterion::Discounted { gamma } = self {
            if gamma.is_negative() || *gamma >= S::one() {
                return Err(Error::InvalidModel(format!(
                    "discount factor {gamma} must lie in [0, 1)"
                )));
            }
        }
        Ok(())
    }

    /// The discount factor, when discounted.
    pub fn discount(&self) -> Option<&S> {
        match self {
            EvalCriterion::Average => None,
            EvalCriterion::Discounted { gamma } => Some(gamma),
        }
    }

    /// True under the average criterion.
    pub fn is_average(&self) -> bool {
        matches!(self, EvalCriterion::Average)
    }
}

/// Result of evaluating a fixed policy.
#[derive(Debug, Clone)]
pub struct EvalResult<S: Scalar> {
    /// State values; relative (anchored at state 0) under the average
    /// criterion, absolute under discounting.
    pub values: Vec<S>,
    /// Average reward, present under the average criterion.
    pub rho: Option<S>,
    /// Largest per-state deviation from the evaluation equations.
    pub residual: S,
    /// Sweeps performed; zero for exact solvers.
    pub iterations: usize,
    /// False only when an iterative solver hit its sweep limit.
    pub converged: bool,
}

/// Classical evaluator used as a baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineSolver {
    /// Dense Gauss-Jordan solve of the full evaluation system.
    Direct,
    /// Successive-approximation sweeps until the update drops below
    /// `epsilon` (span seminorm under the average criterion, sup norm under
    /// discounting) or `max_iterations` sweeps have run.
    FixedPoint { epsilon: f64, max_iterations: usize },
}

/// One partition's evaluation rows: `V(s_i) = M[i] . V_sup + b[i]` where
/// `V_sup` collects the root values of all `K` partitions.
#[derive(Debug, Clone)]
pub struct LocalSystem<S: Scalar> {
    /// Which partition the rows describe.
    pub partition: usize,
    /// `n_r x K` coefficient rows, local state order.
    pub m: Vec<Vec<S>>,
    /// Constant offsets, local state order.
    pub b: Vec<S>,
}

/// The `K x K` system `V_sup = M V_sup + b` tying root values together.
#[derive(Debug, Clone)]
pub struct SuperstateSystem<S: Scalar> {
    /// Root coefficient rows, one per partition.
    pub m: Vec<Vec<S>>,
    /// Root offsets, one per partition.
    pub b: Vec<S>,
}

impl<S: Scalar> SuperstateSystem<S> {
    /// Number of partitions.
    pub fn k(&self) -> usize {
        self.m.len()
    }
}

/// Expresses every state of partition `r` affinely in the root values by a
/// single backward sweep in decreasing state order.
///
/// Arcs to roots contribute to the corresponding coefficient column; arcs to
/// later states of the same partition substitute the already-computed row of
/// the target. Under discounting all probabilities are scaled by `gamma` on
/// access (rewards stay unscaled); under the average criterion the offset
/// starts from `r(s) - rho`. Each row is finally divided by
/// `d(s) = 1 - P(s, s)` (scaled), which must exceed the stochasticity
/// tolerance.
///
/// Returns the rows together with the arithmetic-operation count, which is
/// `O((n_r + m_r) K)` since substitution is a `K`-wide fused update per arc.
pub fn build_local_system<S: Scalar>(
    chain: &SparseChain<S>,
    layout: &PartitionLayout,
    r: usize,
    criterion: &EvalCriterion<S>,
    rho: Option<&S>,
) -> Result<(LocalSystem<S>, u64)> {
    criterion.validate()?;
    if chain.n_states() != layout.n_states() {
        return Err(Error::InvalidModel(format!(
            "chain has {} states, layout covers {}",
            chain.n_states(),
            layout.n_states()
        )));
    }
    if r >= layout.k() {
        return Err(Error::InvalidModel(format!(
            "partition {r} out of range (K = {})",
            layout.k()
        )));
    }
    match (criterion.is_average(), rho) {
        (true, None) => {
            return Err(Error::InvalidModel(
                "average-criterion rows need the average reward".into(),
            ))
        }
        (false, Some(_)) => {
            return Err(Error::InvalidModel(
                "discounted rows take no average reward".into(),
            ))
        }
        _ => {}
    }

    let k = layout.k();
    let block = layout.block(r);
    let start = block.start;
    let n = block.len();
    let gamma = criterion.discount();
    let tol = S::from_f64_lossless(STOCHASTIC_TOL);
    let mut ops: u64 = 0;

    let mut m: Vec<Vec<S>> = vec![Vec::new(); n];
    let mut b = vec![S::zero(); n];
    for i in (0..n).rev() {
        let s = start + i;
        let mut mrow = vec![S::zero(); k];
        let mut bacc = match rho {
            Some(rho) => {
                ops += 1;
                chain.reward(s).clone() - rho.clone()
            }
            None => chain.reward(s).clone(),
        };
        let mut p_self = S::zero();
        for (t, p) in chain.row(s) {
            let pe = match gamma {
                Some(g) => {
                    ops += 1;
                    g.clone() * p.clone()
                }
                None => p.clone(),
            };
            if *t == s {
                p_self = pe;
                continue;
            }
            if layout.is_root(*t) {
                let q = layout.partition_of(*t);
                mrow[q] = mrow[q].clone() + pe;
                ops += 1;
            } else if block.contains(t) {
                if *t < s {
                    return Err(Error::Structure(format!(
                        "intra arc {s} -> {t} violates canonical order"
                    )));
                }
                let j = *t - start;
                for (c, coef) in mrow.iter_mut().enumerate() {
                    *coef = coef.clone() + pe.clone() * m[j][c].clone();
                }
                bacc = bacc + pe * b[j].clone();
                ops += 2 * k as u64 + 2;
            } else {
                return Err(Error::Structure(format!(
                    "arc {s} -> {t} enters a foreign partition away from its root"
                )));
            }
        }
        let d = S::one() - p_self;
        ops += 1;
        if d <= tol {
            return Err(Error::Singular(format!(
                "state {s}: 1 - P(s, s) is within {STOCHASTIC_TOL:e} of 0"
            )));
        }
        for coef in mrow.iter_mut() {
            *coef = coef.clone() / d.clone();
        }
        b[i] = bacc / d;
        ops += k as u64 + 1;
        m[i] = mrow;
    }
    Ok((LocalSystem { partition: r, m, b }, ops))
}

/// Stacks the root rows of the per-partition systems into the `K x K`
/// superstate system. Root rows are taken verbatim.
pub fn extract_global_system<S: Scalar>(locals: &[LocalSystem<S>]) -> Result<SuperstateSystem<S>> {
    let k = locals.len();
    if k == 0 {
        return Err(Error::InvalidModel("no partition systems given".into()));
    }
    let mut m = Vec::with_capacity(k);
    let mut b = Vec::with_capacity(k);
    for (r, local) in locals.iter().enumerate() {
        if local.partition != r {
            return Err(Error::InvalidModel(format!(
                "partition systems out of order: found {} at position {r}",
                local.partition
            )));
        }
        if local.m.is_empty() || local.m.len() != local.b.len() {
            return Err(Error::InvalidModel(format!(
                "partition {r} system is empty or ragged"
            )));
        }
        if local.m[0].len() != k {
            return Err(Error::InvalidModel(format!(
                "partition {r} rows have width {}, expected {k}",
                local.m[0].len()
            )));
        }
        m.push(local.m[0].clone());
        b.push(local.b[0].clone());
    }
    Ok(SuperstateSystem { m, b })
}

/// Solves `(I - M) V_sup = b`.
///
/// Under discounting the system is solved directly. Under the average
/// criterion it is singular by construction, so the first equation is
/// replaced by the anchor `V_sup[0] = 0` and the displaced equation is
/// checked afterwards: its residual must stay below [`CONSISTENCY_TOL`],
/// otherwise the average reward the rows were built with is inconsistent
/// and an error is returned.
pub fn solve_superstate_system<S: Scalar>(
    sys: &SuperstateSystem<S>,
    criterion: &EvalCriterion<S>,
) -> Result<Vec<S>> {
    criterion.validate()?;
    let k = sys.k();
    if k == 0 || sys.b.len() != k || sys.m.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidModel("malformed superstate system".into()));
    }

    let mut a = vec![vec![S::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            let delta = if i == j { S::one() } else { S::zero() };
            a[i][j] = delta - sys.m[i][j].clone();
        }
    }
    let mut rhs = sys.b.clone();

    if criterion.is_average() {
        let displaced_row = a[0].clone();
        let displaced_rhs = rhs[0].clone();
        a[0] = vec![S::zero(); k];
        a[0][0] = S::one();
        rhs[0] = S::zero();
        let v = solve_dense(a, rhs, None)?;
        let mut acc = S::zero();
        for j in 0..k {
            acc = acc + displaced_row[j].clone() * v[j].clone();
        }
        let residual = (acc - displaced_rhs).abs();
        if residual > S::from_f64_lossless(CONSISTENCY_TOL) {
            return Err(Error::Singular(format!(
                "superstate system inconsistent: displaced root equation has residual {}",
                residual.to_f64_approx()
            )));
        }
        Ok(v)
    } else {
        solve_dense(a, rhs, None)
    }
}

/// Expands root values to all states through the per-partition rows. Roots
/// receive their superstate value verbatim; every other state evaluates its
/// affine row.
pub fn inject_values<S: Scalar>(
    layout: &PartitionLayout,
    locals: &[LocalSystem<S>],
    v_sup: &[S],
) -> Result<Vec<S>> {
    let k = layout.k();
    if locals.len() != k || v_sup.len() != k {
        return Err(Error::InvalidModel(format!(
            "expected {k} partition systems and root values, got {} and {}",
            locals.len(),
            v_sup.len()
        )));
    }
    let mut values = Vec::with_capacity(layout.n_states());
    for (r, local) in locals.iter().enumerate() {
        let n = layout.block_len(r);
        if local.partition != r || local.m.len() != n || local.b.len() != n {
            return Err(Error::InvalidModel(format!(
                "partition {r} system does not match the layout"
            )));
        }
        for i in 0..n {
            if i == 0 {
                values.push(v_sup[r].clone());
                continue;
            }
            if local.m[i].len() != k {
                return Err(Error::InvalidModel(format!(
                    "partition {r} row {i} has width {}, expected {k}",
                    local.m[i].len()
                )));
            }
            let mut acc = local.b[i].clone();
            for c in 0..k {
                acc = acc + local.m[i][c].clone() * v_sup[c].clone();
            }
            values.push(acc);
        }
    }
    Ok(values)
}

/// Largest per-state deviation of `values` (and `rho`, under the average
/// criterion) from the evaluation equations of the chain.
pub fn bellman_residual<S: Scalar>(
    chain: &SparseChain<S>,
    criterion: &EvalCriterion<S>,
    values: &[S],
    rho: Option<&S>,
) -> Result<S> {
    criterion.validate()?;
    let n = chain.n_states();
    if values.len() != n {
        return Err(Error::InvalidModel(format!(
            "got {} values for {n} states",
            values.len()
        )));
    }
    match (criterion.is_average(), rho) {
        (true, None) => {
            return Err(Error::InvalidModel(
                "average-criterion residual needs the average reward".into(),
            ))
        }
        (false, Some(_)) => {
            return Err(Error::InvalidModel(
                "discounted residual takes no average reward".into(),
            ))
        }
        _ => {}
    }
    let gamma = criterion.discount();

    let mut worst = S::zero();
    for s in 0..n {
        let mut acc = chain.reward(s).clone();
        if let Some(rho) = rho {
            acc = acc - rho.clone();
        }
        for (t, p) in chain.row(s) {
            let pe = match gamma {
                Some(g) => g.clone() * p.clone(),
                None => p.clone(),
            };
            acc = acc + pe * values[*t].clone();
        }
        worst = smax(worst, (acc - values[s].clone()).abs());
    }
    Ok(worst)
}

/// Exact policy evaluation through the decomposition: per-partition backward
/// sweeps, one `K x K` solve, injection.
///
/// Under the average criterion the average reward comes from the two-level
/// steady-state decomposition first (using `intra_solver` for the partition
/// distributions) and the values are relative with `V(0) = 0`. A one-state
/// chain short-circuits to `V = [0]`, `rho = r(0)`.
pub fn evaluate_policy_structured<S: Scalar>(
    chain: &SparseChain<S>,
    layout: &PartitionLayout,
    criterion: &EvalCriterion<S>,
    intra_solver: IntraSolver,
) -> Result<EvalResult<S>> {
    criterion.validate()?;
    if chain.n_states() != layout.n_states() {
        return Err(Error::InvalidModel(format!(
            "chain has {} states, layout covers {}",
            chain.n_states(),
            layout.n_states()
        )));
    }

    if chain.n_states() == 1 && criterion.is_average() {
        let rho = chain.reward(0).clone();
        let values = vec![S::zero()];
        let residual = bellman_residual(chain, criterion, &values, Some(&rho))?;
        return Ok(EvalResult {
            values,
            rho: Some(rho),
            residual,
            iterations: 0,
            converged: true,
        });
    }

    let rho = if criterion.is_average() {
        Some(chiu_average_reward(chain, layout, intra_solver)?.1)
    } else {
        None
    };

    let mut locals = Vec::with_capacity(layout.k());
    for r in 0..layout.k() {
        let (local, _) = build_local_system(chain, layout, r, criterion, rho.as_ref())?;
        locals.push(local);
    }
    let sys = extract_global_system(&locals)?;
    let v_sup = solve_superstate_system(&sys, criterion)?;
    let values = inject_values(layout, &locals, &v_sup)?;
    let residual = bellman_residual(chain, criterion, &values, rho.as_ref())?;
    Ok(EvalResult {
        values,
        rho,
        residual,
        iterations: 0,
        converged: true,
    })
}

/// Classical policy evaluation, exactly as a structure-oblivious solver
/// would do it.
///
/// `Direct` assembles the dense `N x N` evaluation system and solves it by
/// Gauss-Jordan elimination: under discounting `(I - gamma P) V = r`, under
/// the average criterion the unknowns are `(rho, V(1), ..., V(N-1))` with
/// `V(0) = 0` eliminated.
///
/// `FixedPoint` runs successive approximation. Under discounting it stops
/// when the sup-norm update drops below `epsilon`; under the average
/// criterion each sweep applies `V <- r - rho + P V`, re-anchors `V(0) = 0`,
/// and stops when the span of the update drops below `epsilon`. The average
/// reward itself is computed up front: through the two-level decomposition
/// when a layout is given, from the full-chain GTH stationary distribution
/// otherwise. Hitting `max_iterations` returns the last iterate flagged
/// unconverged rather than an error.
pub fn evaluate_policy_baseline<S: Scalar>(
    chain: &SparseChain<S>,
    layout: Option<&PartitionLayout>,
    criterion: &EvalCriterion<S>,
    method: BaselineSolver,
    budget: Option<&Budget>,
) -> Result<EvalResult<S>> {
    criterion.validate()?;
    if let Some(layout) = layout {
        if chain.n_states() != layout.n_states() {
            return Err(Error::InvalidModel(format!(
                "chain has {} states, layout covers {}",
                chain.n_states(),
                layout.n_states()
            )));
        }
    }
    let n = chain.n_states();

    match method {
        BaselineSolver::Direct => {
            if criterion.is_average() {
                if n == 1 {
                    let rho = chain.reward(0).clone();
                    let values = vec![S::zero()];
                    let residual = bellman_residual(chain, criterion, &values, Some(&rho))?;
                    return Ok(EvalResult {
                        values,
                        rho: Some(rho),
                        residual,
                        iterations: 0,
                        converged: true,
                    });
                }
                let mut a = vec![vec![S::zero(); n]; n];
                let mut rhs = Vec::with_capacity(n);
                for s in 0..n {
                    a[s][0] = S::one();
                    if s > 0 {
                        a[s][s] = a[s][s].clone() + S::one();
                    }
                    for (t, p) in chain.row(s) {
                        if *t > 0 {
                            a[s][*t] = a[s][*t].clone() - p.clone();
                        }
                    }
                    rhs.push(chain.reward(s).clone());
                }
                let x = solve_dense(a, rhs, budget)?;
                let rho = x[0].clone();
                let mut values = x;
                values[0] = S::zero();
                let residual = bellman_residual(chain, criterion, &values, Some(&rho))?;
                Ok(EvalResult {
                    values,
                    rho: Some(rho),
                    residual,
                    iterations: 0,
                    converged: true,
                })
            } else {
                let gamma = criterion.discount().expect("discounted").clone();
                let mut a = vec![vec![S::zero(); n]; n];
                let mut rhs = Vec::with_capacity(n);
                for s in 0..n {
                    a[s][s] = S::one();
                    for (t, p) in chain.row(s) {
                        a[s][*t] = a[s][*t].clone() - gamma.clone() * p.clone();
                    }
                    rhs.push(chain.reward(s).clone());
                }
                let values = solve_dense(a, rhs, budget)?;
                let residual = bellman_residual(chain, criterion, &values, None)?;
                Ok(EvalResult {
                    values,
                    rho: None,
                    residual,
                    iterations: 0,
                    converged: true,
                })
            }
        }
        BaselineSolver::FixedPoint {
            epsilon,
            max_iterations,
        } => {
            let eps = S::from_f64_lossless(epsilon);
            if criterion.is_average() {
                let rho = match layout {
                    Some(layout) => {
                        chiu_average_reward(chain, layout, IntraSolver::Robertazzi)?.1
                    }
                    None => {
                        let pi = gth_steady_state(dense_transition_matrix(chain))?;
                        let mut acc = S::zero();
                        for (s, p) in pi.as_slice().iter().enumerate() {
                            acc = acc + p.clone() * chain.reward(s).clone();
                        }
                        acc
                    }
                };
                let mut values = vec![S::zero(); n];
                let mut iterations = 0;
                let mut converged = false;
                while iterations < max_iterations {
                    check_opt(budget)?;
                    iterations += 1;
                    let mut next = Vec::with_capacity(n);
                    for s in 0..n {
                        let mut acc = chain.reward(s).clone() - rho.clone();
                        for (t, p) in chain.row(s) {
                            acc = acc + p.clone() * values[*t].clone();
                        }
                        next.push(acc);
                    }
                    let anchor = next[0].clone();
                    for v in next.iter_mut() {
                        *v = v.clone() - anchor.clone();
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
                    values = next;
                    if hi - lo < eps {
                        converged = true;
                        break;
                    }
                }
                let residual = bellman_residual(chain, criterion, &values, Some(&rho))?;
                Ok(EvalResult {
                    values,
                    rho: Some(rho),
                    residual,
                    iterations,
                    converged,
                })
            } else {
                let gamma = criterion.discount().expect("discounted").clone();
                let mut values = vec![S::zero(); n];
                let mut iterations = 0;
                let mut converged = false;
                while iterations < max_iterations {
                    check_opt(budget)?;
                    iterations += 1;
                    let mut next = Vec::with_capacity(n);
                    let mut delta = S::zero();
                    for s in 0..n {
                        let mut acc = chain.reward(s).clone();
                        for (t, p) in chain.row(s) {
                            acc = acc + gamma.clone() * p.clone() * values[*t].clone();
                        }
                        delta = smax(delta, (acc.clone() - values[s].clone()).abs());
                        next.push(acc);
                    }
                    values = next;
                    if delta < eps {
                        converged = true;
                        break;
                    }
                }
                let residual = bellman_residual(chain, criterion, &values, None)?;
                Ok(EvalResult {
                    values,
                    rho: None,
                    residual,
                    iterations,
                    converged,
                })
            }
        }
    }
}
