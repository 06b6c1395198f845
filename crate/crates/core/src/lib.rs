//! Solvers for single-input superstate decomposable Markov decision processes.
//!
//! A SISDMDP is an MDP whose state space splits into `K` partitions
//! ("superstates") such that every arc entering a partition from outside lands
//! on a single designated root state, and the transition structure inside each
//! partition routes every internal cycle through that root. Markov chains with
//! this shape admit a steady-state sweep that is linear in the number of arcs
//! (Robertazzi's recursion) and, stitched together across partitions by Chiu's
//! decomposition, an exact policy evaluation that solves one small `K x K`
//! system instead of an `N x N` one.
//!
//! The crate provides:
//!
//! - model types for sparse chains, MDPs and partition layouts ([`chain`]),
//! - structural and ergodicity validators ([`validate`]),
//! - steady-state solvers and the decomposed average-reward evaluator
//!   ([`steady`]),
//! - structured and classical policy evaluation for the average and
//!   discounted criteria ([`eval`]),
//! - policy iteration, value iteration and relative value iteration ([`dp`]),
//! - a deterministic instance generator ([`generate`]).
//!
//! All numeric kernels are generic over [`Scalar`], so the same code runs in
//! `f64` for production and in exact rational arithmetic in tests. The type
//! aliases below fix `f64` for everyday use.
//!
//! ```
//! use sisdmdp_core::{fixture_f1, EvalCriterion, evaluate_policy_structured, IntraSolver};
//!
//! let (model, layout) = fixture_f1();
//! let chain = model.induce_chain(&sisdmdp_core::Policy::new(vec![0; 4])).unwrap();
//! let eval = evaluate_policy_structured(&chain, &layout, &EvalCriterion::Average, IntraSolver::Robertazzi)
//!     .unwrap();
//! assert!((eval.rho.unwrap() - 6.0 / 7.0).abs() < 1e-12);
//! ```

pub mod budget;
pub mod chain;
pub mod dp;
pub mod error;
pub mod eval;
pub mod generate;
pub mod linalg;
pub mod scalar;
pub mod steady;
pub mod validate;

pub use budget::Budget;
pub use chain::{MdpModel, PartitionLayout, Policy, SparseChain};
pub use dp::{
    improve_policy, policy_iteration, q_values, relative_value_iteration, value_iteration,
    Evaluator, PiOptions, PolicyIterationOutcome, QTable, RunStats, RviOptions, RviOutcome,
    StopReason, ValueIterationOutcome,
};
pub use error::{Error, Result};
pub use eval::{
    bellman_residual, build_local_system, evaluate_policy_baseline, evaluate_policy_structured,
    extract_global_system, inject_values, solve_superstate_system, BaselineSolver, EvalCriterion,
    EvalResult, LocalSystem, SuperstateSystem,
};
pub use generate::{
    fixture_f1, generate_sisdmdp, instance_stats, perturb_transition_matrix, GeneratorConfig,
    InstanceStats, Prng,
};
pub use scalar::Scalar;
pub use steady::{
    build_inter_matrix, build_intra_matrix, chiu_average_reward, dense_transition_matrix,
    gth_steady_state, robertazzi_steady_state, InterMatrix, IntraMatrix, IntraSolver,
    SteadyStateVector,
};
pub use validate::{
    canonical_reorder, classify_release_states, validate_ergodic, validate_structure,
    ErgodicityReport, ReleaseClassification, StructureReport,
};

/// Sparse chain over `f64`, the everyday working type.
pub type Chain = SparseChain<f64>;

/// MDP model over `f64`.
pub type Model = MdpModel<f64>;
