mod common;

use common::{reference_instance, small_instance};
use freshroute::analysis::{
    compare_models, comparison_csv, fmt_sig, pareto_csv, pareto_frontier, pareto_frontier_oracle,
    run_scenario_comparison, shelf_life_at, shelf_life_comparison, sweep_beta, sweep_csv,
    sweep_shelf_life, sweep_tau, ScenarioOutcome,
};
use freshroute::models::ModelKind;
use freshroute::scenarios::{generate_scenarios, ScenarioGenConfig};
use freshroute::solver::SolveStatus;
use proptest::prelude::*;

#[test]
fn degenerate_comparison_rows_agree() {
    let inst = reference_instance(31).with_degenerate_uncertainty(0.0);
    let rows = compare_models(&inst, None).unwrap();
    assert_eq!(rows.len(), 5);
    let det = rows[0].total_hours.unwrap();
    assert_eq!(rows[0].model, ModelKind::Deterministic);
    for r in &rows[1..4] {
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.total_hours.unwrap() - det).abs() <= 1e-6, "{}", r.model);
        assert_eq!(r.route, rows[0].route);
    }
    assert_eq!(rows[4].model, ModelKind::Adaptive);
    assert!(rows[4].total_hours.unwrap() >= det - 1e-9);
}

#[test]
fn robust_row_equals_deterministic_when_box_is_a_point() {
    let mut inst = reference_instance(32);
    inst.bounds = Some(freshroute::domain::UncertaintyBounds::nominal(
        &inst.network,
    ));
    let rows = compare_models(&inst, None).unwrap();
    assert_eq!(rows[1].total_hours, rows[0].total_hours);
    assert_eq!(rows[1].route, rows[0].route);
}

#[test]
fn comparison_is_repeatable_despite_parallelism() {
    let inst = reference_instance(33);
    let a = comparison_csv(&compare_models(&inst, None).unwrap());
    let b = comparison_csv(&compare_models(&inst, None).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("model,status,total_hours,objective,nodes_explored,route\n"));
    assert_eq!(a.lines().count(), 6);
}

#[test]
fn still_air_gives_no_reduction_figure() {
    let inst = reference_instance(34);
    let cfg = ScenarioGenConfig {
        ambient_std: 0.0,
        scenario_count: 8,
        ..Default::default()
    };
    let scenarios = generate_scenarios(&cfg, &inst).unwrap();
    let c = run_scenario_comparison(&inst, &scenarios).unwrap();
    assert_eq!(c.summary.mean_deterministic_deviation, 0.0);
    assert_eq!(c.summary.mean_adaptive_deviation, 0.0);
    assert_eq!(c.summary.mean_deviation_reduction_pct, None);
    assert!(run_scenario_comparison(&inst, &[]).is_err());
}

#[test]
fn comparison_summary_matches_its_pairs() {
    let inst = reference_instance(35);
    let scenarios = inst.scenarios.clone().unwrap();
    let c = run_scenario_comparison(&inst, &scenarios).unwrap();
    assert_eq!(c.pairs.len(), 50);
    let det: f64 = c
        .pairs
        .iter()
        .map(|p| p.deterministic.freshness_deviation)
        .sum::<f64>()
        / 50.0;
    let ada: f64 = c
        .pairs
        .iter()
        .map(|p| p.adaptive.freshness_deviation)
        .sum::<f64>()
        / 50.0;
    assert!((c.summary.mean_deterministic_deviation - det).abs() <= 1e-9);
    assert!((c.summary.mean_adaptive_deviation - ada).abs() <= 1e-9);
    let pct = c.summary.mean_deviation_reduction_pct.unwrap();
    assert!((pct - 100.0 * (1.0 - ada / det)).abs() <= 1e-9);
    for p in &c.pairs {
        assert_eq!(p.deterministic.scenario_id, p.adaptive.scenario_id);
        assert_eq!(p.adaptive.per_product_mean_temp.len(), 4);
    }
}

#[test]
fn ideal_temperature_gives_the_reference_life() {
    let inst = reference_instance(36);
    for p in &inst.products {
        let e = shelf_life_at(p, p.ideal_temperature).unwrap();
        assert!((e.shelf_life_days - p.initial_shelf_life / 24.0).abs() <= 1e-12);
    }
    let apple = &freshroute::scenarios::default_catalog()[0];
    assert_eq!(shelf_life_at(apple, 5.0).unwrap().shelf_life_days, 30.0);
}

#[test]
fn injected_mean_temperatures_give_known_lives() {
    let apple = &freshroute::scenarios::default_catalog()[0];
    let warm = shelf_life_at(apple, 6.23).unwrap().shelf_life_days;
    let hot = shelf_life_at(apple, 8.68).unwrap().shelf_life_days;
    assert!((warm - 27.548_284_869_027_714).abs() <= 1e-9);
    assert!((hot - 23.245_677_928_775_144).abs() <= 1e-9);
    assert!(warm > hot);
}

#[test]
fn shelf_life_comparison_tracks_mean_temperatures() {
    let inst = reference_instance(37);
    let s = &inst.scenarios.as_ref().unwrap()[0];
    let c = shelf_life_comparison(&inst, s, 0).unwrap();
    let apple = &inst.products[0];
    assert_eq!(
        c.adaptive.shelf_life_days,
        shelf_life_at(apple, c.adaptive.mean_temperature)
            .unwrap()
            .shelf_life_days
    );
    // Lower mean temperature means longer life.
    let (a, d) = (c.adaptive, c.deterministic);
    if a.mean_temperature < d.mean_temperature {
        assert!(a.shelf_life_days > d.shelf_life_days);
    } else if a.mean_temperature > d.mean_temperature {
        assert!(a.shelf_life_days < d.shelf_life_days);
    }
    assert!(shelf_life_comparison(&inst, s, 9).is_err());
}

#[test]
fn full_correction_in_still_air_has_no_deviation() {
    let inst = small_instance(38, 6);
    let cfg = ScenarioGenConfig {
        ambient_std: 0.0,
        ..Default::default()
    };
    let r = sweep_beta(&inst, &[0.0, 0.5, 1.0], 20, &cfg).unwrap();
    assert!(r.mean_deviation.iter().all(|&d| d == 0.0));
    assert!(r.mean_final_shelf_life.iter().all(|&l| l == 30.0));
    let t = sweep_tau(&inst, &[0.0, 1.0], 20, &ScenarioGenConfig::default(), 0.5).unwrap();
    assert_eq!(t.mean_deviation[0], 0.0);
    assert_eq!(t.mean_final_shelf_life[0], 30.0);
    assert!(t.mean_deviation[1] > 0.0);
}

#[test]
fn sweep_output_shape() {
    let inst = small_instance(39, 5);
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let r = sweep_beta(&inst, &grid, 10, &ScenarioGenConfig::default()).unwrap();
    let csv = sweep_csv(&r);
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "beta,mean_deviation,mean_final_shelf_life_days,replications"
    );
    assert_eq!(lines.count(), 11);
    assert_eq!(r.deviation_samples.len(), 11);
    assert!(r.deviation_samples.iter().all(|s| s.len() == 10));
}

#[test]
fn bad_grids_are_rejected() {
    let inst = small_instance(40, 4);
    let cfg = ScenarioGenConfig::default();
    assert!(sweep_beta(&inst, &[], 5, &cfg).is_err());
    assert!(sweep_beta(&inst, &[0.5, 0.2], 5, &cfg).is_err());
    assert!(sweep_beta(&inst, &[0.5, 1.5], 5, &cfg).is_err());
    assert!(sweep_beta(&inst, &[0.5], 0, &cfg).is_err());
    assert!(sweep_tau(&inst, &[-1.0], 5, &cfg, 0.5).is_err());
    assert!(sweep_tau(&inst, &[1.0], 5, &cfg, 2.0).is_err());
}

#[test]
fn sweep_life_reference_points() {
    assert_eq!(sweep_shelf_life(0.0), 30.0);
    assert!((sweep_shelf_life(10.0) - 15.0).abs() <= 1e-12);
}

#[test]
fn number_formatting() {
    assert_eq!(fmt_sig(0.0), "0");
    assert_eq!(fmt_sig(1.5), "1.5");
    assert_eq!(fmt_sig(12.345678), "12.3457");
    assert_eq!(fmt_sig(123456789.0), "123457000");
    assert_eq!(fmt_sig(-0.000001234), "-1.23400e-6");
    assert_eq!(fmt_sig(2.0 / 3.0), "0.666667");
}

fn outcomes_strategy() -> impl Strategy<Value = Vec<ScenarioOutcome>> {
    prop::collection::vec((0u8..12, 0u8..12), 0..40).prop_map(|pts| {
        pts.into_iter()
            .enumerate()
            .map(|(id, (t, d))| ScenarioOutcome {
                scenario_id: id as u32,
                trip_hours: f64::from(t) * 0.5,
                freshness_deviation: f64::from(d) * 0.25,
                slack_total: 0.0,
                per_product_mean_temp: vec![],
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn frontier_matches_quadratic_reference(pts in outcomes_strategy()) {
        let fast = pareto_frontier(&pts);
        prop_assert_eq!(&fast, &pareto_frontier_oracle(&pts));
        for w in fast.windows(2) {
            prop_assert!(w[0].trip_hours < w[1].trip_hours);
            prop_assert!(w[0].freshness_deviation > w[1].freshness_deviation);
        }
        prop_assert_eq!(pareto_csv(&fast).lines().count(), fast.len() + 1);
    }
}
