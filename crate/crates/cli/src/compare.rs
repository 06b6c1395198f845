//! Cross-checks the decomposition-based solvers against dense oracles on
//! one model: steady-state vectors, policy values, average rewards and
//! Bellman residuals, one table row per action.

use sisdmdp_core::{
    chiu_average_reward, dense_transition_matrix, evaluate_policy_baseline,
    evaluate_policy_structured, gth_steady_state, validate_structure, BaselineSolver, Error,
    EvalCriterion, IntraSolver, Model, Policy, Result,
};

use crate::bench::criterion_token;
use crate::io::describe_violations;

/// Dense Gauss-Jordan and full-chain GTH get quadratic-to-cubic in the state
/// count; above this size they stop being usable reference points.
pub const MAX_ORACLE_STATES: usize = 2000;

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub action: usize,
    /// `max |pi_decomposed - pi_gth|` over states.
    pub steady_gap: f64,
    /// `max |v_structured - v_direct|` over states.
    pub value_gap: f64,
    /// Average-reward disagreement; absent under discounting.
    pub rho_gap: Option<f64>,
    pub residual_structured: f64,
    pub residual_direct: f64,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub criterion: String,
    pub n_states: usize,
    pub n_partitions: usize,
    pub rows: Vec<CompareRow>,
}

impl CompareReport {
    pub fn max_steady_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.steady_gap).fold(0.0, f64::max)
    }

    pub fn max_value_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.value_gap).fold(0.0, f64::max)
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "# Solver comparison ({} criterion, N = {}, K = {})\n\n\
             | action | steady-state gap | value gap | rho gap | residual (structured) | \
             residual (direct) |\n|---|---:|---:|---:|---:|---:|\n",
            self.criterion, self.n_states, self.n_partitions
        );
        for row in &self.rows {
            let rho_gap = match row.rho_gap {
                Some(g) => format!("{g:.3e}"),
                None => "-".to_string(),
            };
            out.push_str(&format!(
                "| {} | {:.3e} | {:.3e} | {rho_gap} | {:.3e} | {:.3e} |\n",
                row.action, row.steady_gap, row.value_gap, row.residual_structured,
                row.residual_direct,
            ));
        }
        out
    }
}

/// Evaluates the constant policy of every action with both solver families
/// and reports the pairwise gaps. The model is re-validated first, so a
/// structural defect surfaces before any solve starts.
pub fn compare_solvers(model: &Model, criterion: &EvalCriterion<f64>) -> Result<CompareReport> {
    criterion.validate()?;
    let n = model.n_states();
    if n > MAX_ORACLE_STATES {
        return Err(Error::InvalidConfig(format!(
            "comparison needs dense oracles and stops at {MAX_ORACLE_STATES} states, got {n}"
        )));
    }
    let layout = model.layout();
    for (a, chain) in model.actions().iter().enumerate() {
        let report = validate_structure(chain, layout)?;
        if !report.is_canonical() {
            return Err(Error::Structure(format!(
                "action {a}: {}",
                if report.is_decomposable() {
                    "states are not in canonical order".to_string()
                } else {
                    describe_violations(&report)
                }
            )));
        }
    }

    let mut rows = Vec::with_capacity(model.n_actions());
    for a in 0..model.n_actions() {
        let chain = model.induce_chain(&Policy::constant(n, a))?;

        let (pi_fast, _) = chiu_average_reward(&chain, layout, IntraSolver::Robertazzi)?;
        let pi_full = gth_steady_state(dense_transition_matrix(&chain))?;
        let steady_gap = pi_fast
            .as_slice()
            .iter()
            .zip(pi_full.as_slice())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);

        let structured =
            evaluate_policy_structured(&chain, layout, criterion, IntraSolver::Robertazzi)?;
        let direct =
            evaluate_policy_baseline(&chain, None, criterion, BaselineSolver::Direct, None)?;
        let value_gap = structured
            .values
            .iter()
            .zip(&direct.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let rho_gap = match (structured.rho, direct.rho) {
            (Some(x), Some(y)) => Some((x - y).abs()),
            _ => None,
        };
        rows.push(CompareRow {
            action: a,
            steady_gap,
            value_gap,
            rho_gap,
            residual_structured: structured.residual,
            residual_direct: direct.residual,
        });
    }
    Ok(CompareReport {
        criterion: criterion_token(criterion).to_string(),
        n_states: n,
        n_partitions: layout.k(),
        rows,
    })
}
