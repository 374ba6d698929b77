mod common;

use common::{reference_instance, small_instance, two_node};
use freshroute::domain::Route;
use freshroute::models::{
    check_adaptive_constraints, compile_dro, compile_robust, compile_stochastic,
    evaluate_route_under_scenario, solve_adaptive, solve_deterministic, solve_dro, solve_model,
    solve_robust, solve_static, solve_stochastic, ModelKind,
};
use freshroute::solver::{brute_force_oracle, SolveStatus};
use proptest::prelude::*;

#[test]
fn two_node_window() {
    let ok = solve_deterministic(&two_node(1.0, 10.0)).unwrap();
    assert_eq!(ok.status, SolveStatus::Optimal);
    assert_eq!(ok.total_travel_hours, Some(2.0));
    let tight = solve_deterministic(&two_node(1.0, 1.5)).unwrap();
    assert_eq!(tight.status, SolveStatus::Infeasible);
    assert!(tight.route.is_none());
    assert_eq!(tight.diagnostics[0].load, 2.0);
    assert!(tight.diagnostics[0].slack < 0.0);
}

#[test]
fn degenerate_uncertainty_collapses_static_models() {
    for seed in 0..4 {
        let inst = reference_instance(seed).with_degenerate_uncertainty(0.0);
        let det = solve_deterministic(&inst).unwrap();
        for kind in [ModelKind::Robust, ModelKind::Stochastic, ModelKind::Dro] {
            let r = solve_static(kind, &inst).unwrap();
            assert!((r.objective.unwrap() - det.objective.unwrap()).abs() <= 1e-9);
            assert_eq!(r.route, det.route, "{kind}");
        }
    }
}

#[test]
fn ten_stop_models_match_enumeration() {
    let inst = reference_instance(11);
    let det = solve_deterministic(&inst).unwrap();
    let oracle = brute_force_oracle(
        &freshroute::models::compile_deterministic(&inst)
            .unwrap()
            .problem,
    )
    .unwrap();
    assert_eq!(det.objective, oracle.objective);
    assert_eq!(det.route.unwrap().order, oracle.route.unwrap().order);

    let robust = compile_robust(&inst).unwrap();
    let r = solve_robust(&inst).unwrap();
    assert_eq!(
        r.objective,
        brute_force_oracle(&robust.problem).unwrap().objective
    );

    let dro = compile_dro(&inst).unwrap();
    let d = solve_dro(&inst).unwrap();
    assert_eq!(
        d.route.unwrap().order,
        brute_force_oracle(&dro.problem)
            .unwrap()
            .route
            .unwrap()
            .order
    );
}

#[test]
fn stochastic_load_is_the_scenario_average() {
    let inst = reference_instance(12);
    let r = solve_stochastic(&inst).unwrap();
    let route = r.route.unwrap();
    let scenarios = inst.scenarios.as_ref().unwrap();
    let average: f64 = scenarios
        .iter()
        .map(|s| {
            s.probability
                * route
                    .arcs()
                    .map(|(i, j)| s.arc_time(&inst.network, i, j))
                    .sum::<f64>()
        })
        .sum();
    assert!((r.total_travel_hours.unwrap() - average).abs() <= 1e-9);
    let compiled = compile_stochastic(&inst).unwrap();
    assert!((compiled.planned_hours(&route) - average).abs() <= 1e-9);
}

#[test]
fn doubling_risk_aversion_tightens_every_arc() {
    let mut inst = reference_instance(13);
    let base = compile_dro(&inst).unwrap();
    inst.moments.as_mut().unwrap().risk_aversion *= 2.0;
    let doubled = compile_dro(&inst).unwrap();
    let m = inst.moments.as_ref().unwrap();
    for (i, j, w) in doubled.planning_hours.iter() {
        let extra = 0.5 * m.risk_aversion * (m.delay_variance[i] + m.travel_variance[(i, j)]);
        assert!((w - base.planning_hours[(i, j)] - extra).abs() <= 1e-12);
    }
}

#[test]
fn adaptive_trace_invariants() {
    let inst = reference_instance(14);
    for s in inst.scenarios.as_ref().unwrap().iter().take(10) {
        let r = solve_adaptive(&inst, s).unwrap();
        let trace = r.trace.as_ref().unwrap();
        let route = r.route.as_ref().unwrap();
        assert!(route.check_structure(inst.node_count()).is_ok());
        let sum_cost: f64 = trace.hops.iter().map(|h| h.cost).sum();
        let sum_travel: f64 = trace.hops.iter().map(|h| h.travel_hours).sum();
        assert!((trace.total_cost - sum_cost).abs() <= 1e-9);
        assert!((trace.total_travel_hours - sum_travel).abs() <= 1e-9);
        for hop in trace.hops.iter().filter(|h| h.to != 0) {
            for (k, p) in inst.products.iter().enumerate() {
                let t = hop.temperatures[k];
                assert!(t >= p.min_temperature && t <= p.max_temperature);
                assert_eq!(hop.deviations[k], (t - p.ideal_temperature).abs());
                if hop.slacks[k] > 0.0 {
                    assert!(t == p.min_temperature || t == p.max_temperature);
                }
            }
        }
        assert!(check_adaptive_constraints(trace, &inst, s).is_empty());
        // The replay of the adaptive route reproduces its deviation.
        let replay = evaluate_route_under_scenario(route, &inst, s, true).unwrap();
        assert!((replay.total_deviation - trace.total_deviation).abs() <= 1e-9);
    }
}

#[test]
fn tampered_trace_fails_the_constraint_check() {
    let inst = small_instance(3, 4);
    let s = &inst.scenarios.as_ref().unwrap()[0];
    let mut trace = solve_adaptive(&inst, s).unwrap().trace.unwrap();
    trace.hops[1].temperatures[0] += 0.5;
    assert!(!check_adaptive_constraints(&trace, &inst, s).is_empty());
}

#[test]
fn adaptive_without_penalties_is_nearest_neighbour_and_no_shorter_than_optimum() {
    for seed in 0..5 {
        let mut inst = small_instance(seed, 6);
        inst.adaptive_params.deviation_penalty = 0.0;
        inst.adaptive_params.slack_penalty = 0.0;
        let s = &inst.scenarios.as_ref().unwrap()[0];
        let r = solve_adaptive(&inst, s).unwrap();
        let order = r.route.as_ref().unwrap().order.clone();
        // Replay nearest neighbour on realized arc times.
        let n = inst.node_count();
        let mut visited = vec![false; n];
        visited[0] = true;
        let mut nn = vec![0];
        for _ in 1..n {
            let cur = *nn.last().unwrap();
            let mut best = None;
            for j in 1..n {
                if visited[j] {
                    continue;
                }
                let c = s.arc_time(&inst.network, cur, j);
                if best.is_none_or(|(_, b)| c < b) {
                    best = Some((j, c));
                }
            }
            let (j, _) = best.unwrap();
            visited[j] = true;
            nn.push(j);
        }
        nn.push(0);
        assert_eq!(order, nn);

        let mut realized = inst.clone();
        for i in 0..n {
            realized.network.delay[i] = s.realized_delay(&inst.network, i);
        }
        let opt = solve_deterministic(&realized).unwrap();
        assert!(r.total_travel_hours.unwrap() >= opt.objective.unwrap() - 1e-9);
    }
}

#[test]
fn uncorrected_evaluation_is_repeatable() {
    let inst = reference_instance(15);
    let route = solve_deterministic(&inst).unwrap().route.unwrap();
    let s = &inst.scenarios.as_ref().unwrap()[4];
    let a = evaluate_route_under_scenario(&route, &inst, s, false).unwrap();
    let b = evaluate_route_under_scenario(&route, &inst, s, false).unwrap();
    assert_eq!(a, b);
}

#[test]
fn adaptive_default_scenario_is_nominal() {
    let inst = small_instance(4, 5);
    let r = solve_model(ModelKind::Adaptive, &inst, None).unwrap();
    assert_eq!(r.trace.unwrap().total_deviation, 0.0);
    assert!(solve_model(ModelKind::Deterministic, &inst, None)
        .unwrap()
        .trace
        .is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn robust_dominates_deterministic(seed in 0u64..10_000, stops in 3usize..7) {
        let inst = small_instance(seed, stops);
        let det = solve_deterministic(&inst).unwrap();
        let rob = solve_robust(&inst).unwrap();
        prop_assert!(rob.objective.unwrap() >= det.objective.unwrap() - 1e-12);
    }

    #[test]
    fn correction_contracts_without_disturbance(seed in 0u64..10_000, beta in 0.05..1.0f64, offset in -2.9..2.9f64) {
        // Start off-ideal by shifting the first stop only; afterwards tau = 0.
        let mut inst = small_instance(seed, 5);
        inst.adaptive_params.correction_factor = beta;
        let mut s = inst.scenarios.as_ref().unwrap()[0].clone();
        for row in s.ambient_shift.iter_mut() {
            row.iter_mut().for_each(|t| *t = 0.0);
        }
        let route = Route::from_order(vec![0, 1, 2, 3, 4, 5, 0], |_, _| 1.0);
        for k in 0..inst.products.len() {
            s.ambient_shift[1][k] = offset;
        }
        let e = evaluate_route_under_scenario(&route, &inst, &s, true).unwrap();
        for k in 0..inst.products.len() {
            let theta = inst.products[k].ideal_temperature;
            for w in e.stop_temperatures.windows(2) {
                let (a, b) = ((w[0][k] - theta).abs(), (w[1][k] - theta).abs());
                prop_assert!((b - (1.0 - beta) * a).abs() <= 1e-9);
            }
        }
    }
}
