//! Acceptance gate: nine end-to-end checks covering fixture exactness,
//! oracle equivalence, policy-iteration parity, global optimality, scaling,
//! operation-count linearity, stopping-rule behavior and generator validity.
//! Each test prints one PASS/FAIL line (visible with `--nocapture`).

use std::time::Instant;

use sisdmdp_cli::serialize_model;
use sisdmdp_core::{
    build_intra_matrix, chiu_average_reward, dense_transition_matrix, evaluate_policy_baseline,
    evaluate_policy_structured, fixture_f1, generate_sisdmdp, gth_steady_state,
    perturb_transition_matrix, policy_iteration, relative_value_iteration,
    robertazzi_steady_state, validate_structure, value_iteration, BaselineSolver, Budget, Chain,
    Error, EvalCriterion, Evaluator, GeneratorConfig, IntraSolver, Model, PartitionLayout,
    PiOptions, Policy, RviOptions, StopReason,
};

fn report(name: &str, pass: bool, detail: &str) {
    println!(
        "acceptance {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {name} failed: {detail}");
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Instance family shared by the steady-state and evaluation equivalence
/// checks: 200 instances, N in [20, 200], K in [2, 10].
fn oracle_instances() -> impl Iterator<Item = (Model, PartitionLayout)> {
    (0..200u64).map(|i| {
        let k = 2 + (i as usize % 9);
        let l = 10 + ((i as usize * 7) % 11);
        let n = k * l;
        assert!((20..=200).contains(&n) && (2..=10).contains(&k));
        generate_sisdmdp(&GeneratorConfig::new(n, k, 1, 20_000 + i)).unwrap()
    })
}

#[test]
fn c1_fixture_exactness() {
    let (model, layout) = fixture_f1();
    let chain = model.action(0);
    let criterion = EvalCriterion::Average;
    chiu_average_reward(chain, &layout, IntraSolver::Robertazzi).unwrap();
    evaluate_policy_structured(chain, &layout, &criterion, IntraSolver::Robertazzi).unwrap();

    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..5 {
        let start = Instant::now();
        let (pi, rho) = chiu_average_reward(chain, &layout, IntraSolver::Robertazzi).unwrap();
        let eval =
            evaluate_policy_structured(chain, &layout, &criterion, IntraSolver::Robertazzi)
                .unwrap();
        best = best.min(start.elapsed().as_secs_f64());
        last = Some((pi, rho, eval));
    }
    let (pi, rho, eval) = last.unwrap();

    let pi_expected = [2.0 / 7.0, 1.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0];
    let v_expected = [0.0, -34.0 / 49.0, 20.0 / 49.0, -36.0 / 49.0];
    let pi_gap = linf(pi.as_slice(), &pi_expected);
    let rho_gap = (rho - 6.0 / 7.0).abs();
    let v_gap = linf(&eval.values, &v_expected);
    let pass = pi_gap <= 1e-12 && rho_gap <= 1e-12 && v_gap <= 1e-12 && best < 1e-3;
    report(
        "c1 fixture-exactness",
        pass,
        &format!("pi_gap {pi_gap:.2e}, rho_gap {rho_gap:.2e}, v_gap {v_gap:.2e}, time {best:.2e} s"),
    );
}

#[test]
fn c2_steady_state_oracle_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for (model, layout) in oracle_instances() {
        let chain = model.action(0);
        let (pi_fast, _) =
            chiu_average_reward(chain, &layout, IntraSolver::Robertazzi).unwrap();
        let pi_full = gth_steady_state(dense_transition_matrix(chain)).unwrap();
        worst = worst.max(linf(pi_fast.as_slice(), pi_full.as_slice()));
        count += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = count >= 200 && worst <= 1e-10 && elapsed < 30.0;
    report(
        "c2 steady-state-equivalence",
        pass,
        &format!("{count} instances, worst gap {worst:.2e}, {elapsed:.1} s"),
    );
}

#[test]
fn c3_evaluation_oracle_equivalence() {
    let criteria = [
        EvalCriterion::Average,
        EvalCriterion::Discounted { gamma: 0.9 },
    ];
    let mut worst_gap = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut count = 0usize;
    for (model, layout) in oracle_instances() {
        let chain = model.action(0);
        for criterion in &criteria {
            let structured =
                evaluate_policy_structured(chain, &layout, criterion, IntraSolver::Robertazzi)
                    .unwrap();
            let direct =
                evaluate_policy_baseline(chain, None, criterion, BaselineSolver::Direct, None)
                    .unwrap();
            worst_gap = worst_gap.max(linf(&structured.values, &direct.values));
            worst_residual = worst_residual
                .max(structured.residual)
                .max(direct.residual);
        }
        count += 1;
    }
    let pass = count >= 200 && worst_gap <= 1e-8 && worst_residual <= 1e-9;
    report(
        "c3 evaluation-equivalence",
        pass,
        &format!("{count} instances, worst gap {worst_gap:.2e}, worst residual {worst_residual:.2e}"),
    );
}

#[test]
fn c4_policy_iteration_parity() {
    let options = PiOptions {
        max_iterations: 10_000,
    };
    let mut count = 0usize;
    for &actions in &[2usize, 5] {
        for j in 0..25u64 {
            let k = 2 + (j as usize % 5);
            let l = 10 + ((j as usize * 3) % 41);
            let n = k * l;
            assert!(n <= 300);
            let (model, _) = generate_sisdmdp(&GeneratorConfig::new(
                n,
                k,
                actions,
                40_000 + 100 * actions as u64 + j,
            ))
            .unwrap();
            let structured = policy_iteration(
                &model,
                &EvalCriterion::Average,
                Evaluator::Structured {
                    intra: IntraSolver::Robertazzi,
                },
                &options,
                None,
            )
            .unwrap();
            let dense = policy_iteration(
                &model,
                &EvalCriterion::Average,
                Evaluator::Direct,
                &options,
                None,
            )
            .unwrap();
            assert_eq!(
                structured.trace, dense.trace,
                "policy sequences split on |A|={actions}, N={n}, K={k}, seed {j}"
            );
            assert_eq!(structured.stats.iterations, dense.stats.iterations);
            assert_eq!(structured.stats.stop_reason, StopReason::PolicyFixed);
            assert_eq!(dense.stats.stop_reason, StopReason::PolicyFixed);
            count += 1;
        }
    }
    report(
        "c4 policy-iteration-parity",
        count >= 50,
        &format!("{count} multi-action instances, identical sequences and counts"),
    );
}

fn brute_force_best(model: &Model, criterion: &EvalCriterion<f64>) -> (f64, Vec<f64>) {
    let n = model.n_states();
    let actions = model.n_actions();
    let total = (actions as u64).pow(n as u32);
    assert!(total <= 4096);
    let mut best_rho = f64::NEG_INFINITY;
    let mut best_values = vec![f64::NEG_INFINITY; n];
    for idx in 0..total {
        let mut assignment = Vec::with_capacity(n);
        let mut rest = idx;
        for _ in 0..n {
            assignment.push((rest % actions as u64) as usize);
            rest /= actions as u64;
        }
        let chain = model.induce_chain(&Policy::new(assignment)).unwrap();
        let eval =
            evaluate_policy_baseline(&chain, None, criterion, BaselineSolver::Direct, None)
                .unwrap();
        if let Some(rho) = eval.rho {
            best_rho = best_rho.max(rho);
        }
        for (slot, v) in best_values.iter_mut().zip(&eval.values) {
            *slot = slot.max(*v);
        }
    }
    (best_rho, best_values)
}

#[test]
fn c5_global_optimality() {
    let cases = [
        (2usize, 10usize, 31u64),
        (2, 12, 33),
        (3, 6, 34),
        (4, 6, 35),
        (2, 8, 36),
    ];
    let options = PiOptions {
        max_iterations: 10_000,
    };
    let mut worst_rho_gap = 0.0f64;
    let mut worst_v_gap = 0.0f64;
    for &(actions, n, seed) in &cases {
        let (model, _) =
            generate_sisdmdp(&GeneratorConfig::new(n, 2, actions, seed)).unwrap();

        let (best_rho, _) = brute_force_best(&model, &EvalCriterion::Average);
        let outcome = policy_iteration(
            &model,
            &EvalCriterion::Average,
            Evaluator::Structured {
                intra: IntraSolver::Robertazzi,
            },
            &options,
            None,
        )
        .unwrap();
        worst_rho_gap = worst_rho_gap.max((outcome.eval.rho.unwrap() - best_rho).abs());

        let discounted = EvalCriterion::Discounted { gamma: 0.9 };
        let (_, best_values) = brute_force_best(&model, &discounted);
        let outcome = policy_iteration(
            &model,
            &discounted,
            Evaluator::Structured {
                intra: IntraSolver::Robertazzi,
            },
            &options,
            None,
        )
        .unwrap();
        worst_v_gap = worst_v_gap.max(linf(&outcome.eval.values, &best_values));
    }
    let pass = worst_rho_gap <= 1e-8 && worst_v_gap <= 1e-8;
    report(
        "c5 global-optimality",
        pass,
        &format!(
            "{} enumerated models, rho gap {worst_rho_gap:.2e}, value gap {worst_v_gap:.2e}",
            cases.len()
        ),
    );
}

#[test]
fn c6_structured_evaluation_scaling() {
    let k = 10;
    let criterion = EvalCriterion::Average;
    let mut structured_times = Vec::new();
    let mut small_chain = None;
    let mut large_chain = None;
    for (idx, n) in [10_000usize, 20_000].into_iter().enumerate() {
        let (model, layout) =
            generate_sisdmdp(&GeneratorConfig::new(n, k, 1, 60 + idx as u64)).unwrap();
        let chain = model.action(0).clone();
        let mut best = f64::INFINITY;
        for _ in 0..5 {
            let start = Instant::now();
            evaluate_policy_structured(&chain, &layout, &criterion, IntraSolver::Robertazzi)
                .unwrap();
            best = best.min(start.elapsed().as_secs_f64());
        }
        structured_times.push(best);
        if idx == 0 {
            small_chain = Some(chain);
        } else {
            large_chain = Some(chain);
        }
    }
    let structured_ratio = structured_times[1] / structured_times[0];

    let time_direct = |chain: &Chain| -> Result<f64, Error> {
        let budget = Budget::from_seconds(60.0);
        let start = Instant::now();
        evaluate_policy_baseline(
            chain,
            None,
            &criterion,
            BaselineSolver::Direct,
            Some(&budget),
        )?;
        Ok(start.elapsed().as_secs_f64())
    };
    let direct_verdict = match time_direct(&small_chain.unwrap()) {
        Err(Error::BudgetExceeded(_)) => ">60 s at N=10^4".to_string(),
        Err(e) => panic!("direct evaluator failed: {e}"),
        Ok(t_small) => match time_direct(&large_chain.unwrap()) {
            Err(Error::BudgetExceeded(_)) => format!("{t_small:.1} s then >60 s"),
            Err(e) => panic!("direct evaluator failed: {e}"),
            Ok(t_large) => {
                let ratio = t_large / t_small;
                assert!(ratio >= 5.0, "direct evaluator grew only {ratio:.2}x");
                format!("grew {ratio:.1}x")
            }
        },
    };

    let pass = structured_times[0] < 10.0 && structured_ratio <= 3.0;
    report(
        "c6 scaling",
        pass,
        &format!(
            "structured {:.3} s -> {:.3} s (x{structured_ratio:.2}), direct {direct_verdict}",
            structured_times[0], structured_times[1]
        ),
    );
}

#[test]
fn c7_sweep_op_count_linearity() {
    let mut sizes = Vec::new();
    let mut ratios = Vec::new();
    for (n, seed) in [(40usize, 71u64), (80, 72), (160, 73), (400, 74), (800, 75)] {
        let (model, layout) = generate_sisdmdp(&GeneratorConfig::new(n, 2, 1, seed)).unwrap();
        let chain = model.action(0);
        for r in 0..layout.k() {
            let a = build_intra_matrix(chain, &layout, r).unwrap();
            let m = a.nnz();
            let (_, ops) = robertazzi_steady_state(&a, 0).unwrap();
            sizes.push(m);
            ratios.push(ops as f64 / m as f64);
        }
    }
    let m_min = *sizes.iter().min().unwrap() as f64;
    let m_max = *sizes.iter().max().unwrap() as f64;
    let ratio_max = ratios.iter().copied().fold(0.0, f64::max);
    let pass = m_max / m_min >= 10.0 && ratio_max <= 8.0;
    report(
        "c7 sweep-linearity",
        pass,
        &format!(
            "matrix sizes {m_min}..{m_max} ({}x span), ops/size <= {ratio_max:.2}",
            (m_max / m_min).floor()
        ),
    );
}

/// The fixture plus a second action per state, giving a four-state
/// two-action model with genuinely competing policies.
fn two_action_fixture() -> Model {
    let (model, layout) = fixture_f1();
    let first = model.action(0).clone();
    let second = Chain::new(
        4,
        vec![
            vec![(1, 0.3), (2, 0.7)],
            vec![(0, 0.5), (2, 0.5)],
            vec![(3, 1.0)],
            vec![(0, 0.2), (2, 0.8)],
        ],
        vec![0.5, 1.5, 0.3, 2.5],
    )
    .unwrap();
    Model::new(vec![first, second], layout.clone()).unwrap()
}

#[test]
fn c8_stopping_rules() {
    let flip = Chain::new(2, vec![vec![(1, 1.0)], vec![(0, 1.0)]], vec![2.0, 0.0]).unwrap();
    let flip_model =
        Model::new(vec![flip], PartitionLayout::single_block(2).unwrap()).unwrap();
    let rvi = relative_value_iteration(&flip_model, &RviOptions::default(), None).unwrap();
    let rvi_ok = rvi.stats.stop_reason == StopReason::Stagnation
        && (rvi.rho - 1.0).abs() <= 1e-9;

    let base = two_action_fixture();
    let mut variants = vec![base.clone()];
    for (seed, magnitude) in [(31u64, 0.15), (41, 0.3)] {
        let chains: Vec<Chain> = base
            .actions()
            .iter()
            .enumerate()
            .map(|(a, chain)| {
                perturb_transition_matrix(chain, seed + a as u64, magnitude).unwrap()
            })
            .collect();
        variants.push(Model::new(chains, base.layout().clone()).unwrap());
    }
    let gamma = 0.9;
    let epsilon = 1e-12;
    let bound = 2.0 * epsilon / (1.0 - gamma);
    let mut worst_vi_gap = 0.0f64;
    for model in &variants {
        let vi = value_iteration(model, gamma, epsilon, 1_000_000, None).unwrap();
        assert_eq!(vi.stats.stop_reason, StopReason::Linf);
        let pi = policy_iteration(
            model,
            &EvalCriterion::Discounted { gamma },
            Evaluator::Direct,
            &PiOptions {
                max_iterations: 10_000,
            },
            None,
        )
        .unwrap();
        worst_vi_gap = worst_vi_gap.max(linf(&vi.values, &pi.eval.values));
    }
    let pass = rvi_ok && worst_vi_gap <= bound;
    report(
        "c8 stopping-rules",
        pass,
        &format!(
            "rvi stop {} rho {:.12}, vi gap {worst_vi_gap:.2e} <= {bound:.2e}",
            rvi.stats.stop_reason, rvi.rho
        ),
    );
}

#[test]
fn c9_generator_validity() {
    let mut count = 0usize;
    for i in 0..1000u64 {
        let k = 2 + (i as usize % 9);
        let l = 4 + ((i as usize * 13) % 12);
        let n = k * l;
        let actions = 1 + (i as usize % 3);
        let mut config = GeneratorConfig::new(n, k, actions, 90_000 + i);
        config.forward_arc_rate = 1.0 + (i % 5) as f64;
        config.cross_arc_rate = 0.5 + (i % 3) as f64;
        let (model, layout) = generate_sisdmdp(&config).unwrap();
        for chain in model.actions() {
            let report = validate_structure(chain, &layout).unwrap();
            assert!(
                report.is_canonical() && report.irreducible,
                "config {i} produced an invalid action matrix"
            );
        }
        let (again, _) = generate_sisdmdp(&config).unwrap();
        assert_eq!(
            serialize_model(&model),
            serialize_model(&again),
            "config {i} is not reproducible"
        );
        count += 1;
    }
    report(
        "c9 generator-validity",
        count == 1000,
        &format!("{count} configs validated and reproduced byte-identically"),
    );
}
