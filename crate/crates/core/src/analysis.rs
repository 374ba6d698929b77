//! Experiment analytics: Pareto frontiers, model comparison tables,
//! deterministic-versus-adaptive scenario studies, shelf-life comparison and
//! sensitivity sweeps, plus their CSV renderings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Instance, ProductSpec, Route, Scenario};
use crate::kinetics::{q10_shelf_life, q10_shelf_life_celsius};
use crate::models::{
    evaluate_route_under_scenario, solve_adaptive, solve_deterministic, solve_model,
    ConstraintSlack, ModelError, ModelKind,
};
use crate::scenarios::{generate_scenarios, ScenarioError, ScenarioGenConfig};
use crate::solver::SolveStatus;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{0}")]
    Domain(String),
    #[error("deterministic model is infeasible; no reference route")]
    NoReferenceRoute,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// One route's performance in one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub scenario_id: u32,
    pub trip_hours: f64,
    /// Sum over stops and products of `|t - theta|`, Celsius.
    pub freshness_deviation: f64,
    pub slack_total: f64,
    pub per_product_mean_temp: Vec<f64>,
}

fn dominates(a: &ScenarioOutcome, b: &ScenarioOutcome) -> bool {
    a.trip_hours <= b.trip_hours
        && a.freshness_deviation <= b.freshness_deviation
        && (a.trip_hours < b.trip_hours || a.freshness_deviation < b.freshness_deviation)
}

/// Non-dominated outcomes under joint minimization of trip hours and
/// deviation, sorted by trip hours. Of several identical points only the one
/// with the lowest scenario id is kept, so deviation strictly decreases along
/// the result.
pub fn pareto_frontier(outcomes: &[ScenarioOutcome]) -> Vec<ScenarioOutcome> {
    let mut sorted: Vec<&ScenarioOutcome> = outcomes.iter().collect();
    sorted.sort_by(|a, b| {
        a.trip_hours
            .total_cmp(&b.trip_hours)
            .then(a.freshness_deviation.total_cmp(&b.freshness_deviation))
            .then(a.scenario_id.cmp(&b.scenario_id))
    });
    let mut frontier: Vec<ScenarioOutcome> = Vec::new();
    for o in sorted {
        if frontier
            .last()
            .is_none_or(|last| o.freshness_deviation < last.freshness_deviation)
        {
            frontier.push(o.clone());
        }
    }
    frontier
}

/// Quadratic reference: every point no other point dominates, deduplicated
/// to the lowest scenario id, in frontier order.
pub fn pareto_frontier_oracle(outcomes: &[ScenarioOutcome]) -> Vec<ScenarioOutcome> {
    let mut keep: Vec<ScenarioOutcome> = outcomes
        .iter()
        .filter(|b| !outcomes.iter().any(|a| dominates(a, b)))
        .filter(|b| {
            !outcomes.iter().any(|a| {
                a.trip_hours == b.trip_hours
                    && a.freshness_deviation == b.freshness_deviation
                    && a.scenario_id < b.scenario_id
            })
        })
        .cloned()
        .collect();
    keep.sort_by(|a, b| a.trip_hours.total_cmp(&b.trip_hours));
    keep
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub status: SolveStatus,
    pub total_hours: Option<f64>,
    pub objective: Option<f64>,
    pub route: Option<String>,
    pub nodes_explored: u64,
    pub diagnostics: Vec<ConstraintSlack>,
}

/// Runs all five models. Static models report hours under their own
/// planning parameters; the adaptive model runs on `evaluation`, or on the
/// instance's first scenario, or on the nominal scenario.
pub fn compare_models(
    instance: &Instance,
    evaluation: Option<&Scenario>,
) -> Result<Vec<ComparisonRow>, AnalysisError> {
    let designated = evaluation.or_else(|| instance.scenarios.as_ref().and_then(|s| s.first()));
    ModelKind::ALL
        .par_iter()
        .map(|&kind| {
            let r = solve_model(kind, instance, designated)?;
            Ok(ComparisonRow {
                model: kind,
                status: r.status,
                total_hours: r.total_travel_hours,
                objective: r.objective,
                route: r.route.as_ref().map(Route::to_string),
                nodes_explored: r.nodes_explored,
                diagnostics: r.diagnostics,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPair {
    pub deterministic: ScenarioOutcome,
    pub adaptive: ScenarioOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub scenario_count: usize,
    pub mean_deterministic_deviation: f64,
    pub mean_adaptive_deviation: f64,
    /// `100 (1 - adaptive / deterministic)`; absent when the deterministic
    /// route shows no deviation at all.
    pub mean_deviation_reduction_pct: Option<f64>,
    pub mean_deterministic_hours: f64,
    pub mean_adaptive_hours: f64,
    pub mean_travel_increase_hours: f64,
    /// Share of scenarios in which the adaptive tour is at least as long as
    /// the deterministic one.
    pub adaptive_not_faster_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioComparison {
    pub deterministic_route: Route,
    pub pairs: Vec<ScenarioPair>,
    pub summary: ComparisonSummary,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Replays the deterministic-optimal route through each scenario without
/// temperature correction and runs the adaptive model on the same scenario.
pub fn run_scenario_comparison(
    instance: &Instance,
    scenarios: &[Scenario],
) -> Result<ScenarioComparison, AnalysisError> {
    if scenarios.is_empty() {
        return Err(AnalysisError::Domain(
            "scenario comparison needs at least one scenario".into(),
        ));
    }
    let det = solve_deterministic(instance)?;
    let route = det.route.ok_or(AnalysisError::NoReferenceRoute)?;
    let pairs = scenarios
        .par_iter()
        .map(|s| {
            let fixed = evaluate_route_under_scenario(&route, instance, s, false)?;
            let adaptive = solve_adaptive(instance, s)?;
            let trace = adaptive.trace.expect("adaptive result carries a trace");
            let adaptive_route = adaptive.route.expect("adaptive result carries a route");
            let replay = evaluate_route_under_scenario(&adaptive_route, instance, s, true)?;
            Ok(ScenarioPair {
                deterministic: ScenarioOutcome {
                    scenario_id: s.id,
                    trip_hours: fixed.travel_hours,
                    freshness_deviation: fixed.total_deviation,
                    slack_total: fixed.total_slack,
                    per_product_mean_temp: fixed.mean_temperature,
                },
                adaptive: ScenarioOutcome {
                    scenario_id: s.id,
                    trip_hours: trace.total_travel_hours,
                    freshness_deviation: trace.total_deviation,
                    slack_total: trace.total_slack,
                    per_product_mean_temp: replay.mean_temperature,
                },
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;

    let det_dev = mean(pairs.iter().map(|p| p.deterministic.freshness_deviation));
    let ada_dev = mean(pairs.iter().map(|p| p.adaptive.freshness_deviation));
    let det_hours = mean(pairs.iter().map(|p| p.deterministic.trip_hours));
    let ada_hours = mean(pairs.iter().map(|p| p.adaptive.trip_hours));
    let not_faster = pairs
        .iter()
        .filter(|p| p.adaptive.trip_hours >= p.deterministic.trip_hours - 1e-9)
        .count();
    let summary = ComparisonSummary {
        scenario_count: pairs.len(),
        mean_deterministic_deviation: det_dev,
        mean_adaptive_deviation: ada_dev,
        mean_deviation_reduction_pct: (det_dev > 0.0).then(|| 100.0 * (1.0 - ada_dev / det_dev)),
        mean_deterministic_hours: det_hours,
        mean_adaptive_hours: ada_hours,
        mean_travel_increase_hours: ada_hours - det_hours,
        adaptive_not_faster_share: not_faster as f64 / pairs.len() as f64,
    };
    Ok(ScenarioComparison {
        deterministic_route: route,
        pairs,
        summary,
    })
}

/// Mean transit temperature and the shelf life it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShelfLifeEstimate {
    pub mean_temperature: f64,
    pub shelf_life_days: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShelfLifeComparison {
    pub adaptive: ShelfLifeEstimate,
    pub deterministic: ShelfLifeEstimate,
}

/// Q10 shelf life, in days, of `product` held at `mean_temperature`.
pub fn shelf_life_at(
    product: &ProductSpec,
    mean_temperature: f64,
) -> Result<ShelfLifeEstimate, AnalysisError> {
    let reference = product
        .shelf_reference()
        .map_err(|e| AnalysisError::Domain(e.to_string()))?;
    Ok(ShelfLifeEstimate {
        mean_temperature,
        shelf_life_days: q10_shelf_life(&reference, &product.q10, mean_temperature) / 24.0,
    })
}

/// Shelf life of product `product_index` along the uncorrected deterministic
/// route and along the adaptive route, both in `scenario`.
pub fn shelf_life_comparison(
    instance: &Instance,
    scenario: &Scenario,
    product_index: usize,
) -> Result<ShelfLifeComparison, AnalysisError> {
    let product = instance
        .products
        .get(product_index)
        .ok_or_else(|| AnalysisError::Domain(format!("no product at index {product_index}")))?;
    let comparison = run_scenario_comparison(instance, std::slice::from_ref(scenario))?;
    let pair = &comparison.pairs[0];
    Ok(ShelfLifeComparison {
        adaptive: shelf_life_at(product, pair.adaptive.per_product_mean_temp[product_index])?,
        deterministic: shelf_life_at(
            product,
            pair.deterministic.per_product_mean_temp[product_index],
        )?,
    })
}

/// Reference used to turn sweep deviations into a shelf life: 30 days at
/// 5 °C with Q10 = 2.
pub const SWEEP_REFERENCE: (f64, f64, f64) = (30.0, 5.0, 2.0);

/// Final shelf life in days when the average per-stop, per-product deviation
/// is added on top of the reference temperature.
pub fn sweep_shelf_life(mean_deviation_per_visit: f64) -> f64 {
    let (life, reference, q10) = SWEEP_REFERENCE;
    q10_shelf_life_celsius(life, reference, q10, reference + mean_deviation_per_visit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter_name: String,
    pub grid: Vec<f64>,
    pub mean_deviation: Vec<f64>,
    pub mean_final_shelf_life: Vec<f64>,
    pub replication_count: usize,
    /// Per grid point, per replication total deviation. Replication `r` uses
    /// the same random numbers at every grid point.
    #[serde(skip)]
    pub deviation_samples: Vec<Vec<f64>>,
    #[serde(skip)]
    pub shelf_life_samples: Vec<Vec<f64>>,
}

fn check_grid(grid: &[f64], lo: f64, hi: f64, name: &str) -> Result<(), AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::Domain(format!("{name} grid is empty")));
    }
    if let Some(v) = grid.iter().find(|v| !(lo..=hi).contains(*v)) {
        return Err(AnalysisError::Domain(format!(
            "{name} value {v} outside [{lo}, {hi}]"
        )));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::Domain(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}

fn run_replications(
    instance: &Instance,
    scenarios: &[Scenario],
) -> Result<(Vec<f64>, Vec<f64>), AnalysisError> {
    let visits =
        ((instance.node_count().saturating_sub(1)) * instance.products.len()).max(1) as f64;
    let devs = scenarios
        .par_iter()
        .map(|s| solve_adaptive(instance, s).map(|r| r.trace.map_or(0.0, |t| t.total_deviation)))
        .collect::<Result<Vec<f64>, ModelError>>()?;
    let lives = devs.iter().map(|d| sweep_shelf_life(d / visits)).collect();
    Ok((devs, lives))
}

fn assemble(
    name: &str,
    grid: &[f64],
    replications: usize,
    samples: Vec<(Vec<f64>, Vec<f64>)>,
) -> SweepResult {
    let (deviation_samples, shelf_life_samples): (Vec<_>, Vec<_>) = samples.into_iter().unzip();
    SweepResult {
        parameter_name: name.into(),
        grid: grid.to_vec(),
        mean_deviation: deviation_samples
            .iter()
            .map(|s| mean(s.iter().copied()))
            .collect(),
        mean_final_shelf_life: shelf_life_samples
            .iter()
            .map(|s| mean(s.iter().copied()))
            .collect(),
        replication_count: replications,
        deviation_samples,
        shelf_life_samples,
    }
}

/// Adaptive deviation as a function of the correction factor. Every grid
/// point sees the same `replications` scenarios drawn from `scenarios`.
pub fn sweep_beta(
    instance: &Instance,
    grid: &[f64],
    replications: usize,
    scenarios: &ScenarioGenConfig,
) -> Result<SweepResult, AnalysisError> {
    check_grid(grid, 0.0, 1.0, "beta")?;
    if replications == 0 {
        return Err(AnalysisError::Domain("replications must be >= 1".into()));
    }
    let cfg = ScenarioGenConfig {
        scenario_count: replications,
        ..scenarios.clone()
    };
    let batch = generate_scenarios(&cfg, instance)?;
    let samples = grid
        .iter()
        .map(|&beta| {
            let mut inst = instance.clone();
            inst.adaptive_params.correction_factor = beta;
            run_replications(&inst, &batch)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble("beta", grid, replications, samples))
}

/// Adaptive deviation as a function of the ambient-shift standard deviation,
/// with the correction factor held at `beta`. The underlying normal draws
/// are shared across grid points.
pub fn sweep_tau(
    instance: &Instance,
    grid: &[f64],
    replications: usize,
    scenarios: &ScenarioGenConfig,
    beta: f64,
) -> Result<SweepResult, AnalysisError> {
    check_grid(grid, 0.0, f64::MAX, "ambient_std")?;
    if replications == 0 {
        return Err(AnalysisError::Domain("replications must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(AnalysisError::Domain(format!("beta {beta} outside [0, 1]")));
    }
    let mut inst = instance.clone();
    inst.adaptive_params.correction_factor = beta;
    let samples = grid
        .iter()
        .map(|&sigma| {
            let cfg = ScenarioGenConfig {
                scenario_count: replications,
                ambient_std: sigma,
                ..scenarios.clone()
            };
            let batch = generate_scenarios(&cfg, &inst)?;
            run_replications(&inst, &batch)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble("ambient_std", grid, replications, samples))
}

/// Mean and standard error of the paired differences `b - a`.
pub fn paired_difference(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len(), "paired samples must have equal length");
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let m = mean(d.iter().copied());
    if a.len() < 2 {
        return (m, 0.0);
    }
    let var = d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Formats with six significant digits, dropping trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let s = if magnitude >= 5 {
        let unit = 10f64.powi(magnitude - 5);
        format!("{:.0}", (x / unit).round() * unit)
    } else {
        let decimals = (5 - magnitude) as usize;
        format!("{x:.decimals$}")
    };
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn render(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV output is UTF-8")
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// `scenario_id,trip_hours,freshness_deviation,slack_total`
pub fn pareto_csv(frontier: &[ScenarioOutcome]) -> String {
    render(
        &strings(&[
            "scenario_id",
            "trip_hours",
            "freshness_deviation",
            "slack_total",
        ]),
        frontier.iter().map(|o| {
            vec![
                o.scenario_id.to_string(),
                fmt_sig(o.trip_hours),
                fmt_sig(o.freshness_deviation),
                fmt_sig(o.slack_total),
            ]
        }),
    )
}

/// `model,status,total_hours,objective,nodes_explored,route`
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    render(
        &strings(&[
            "model",
            "status",
            "total_hours",
            "objective",
            "nodes_explored",
            "route",
        ]),
        rows.iter().map(|r| {
            vec![
                r.model.to_string(),
                match r.status {
                    SolveStatus::Optimal => "optimal".into(),
                    SolveStatus::Infeasible => "infeasible".into(),
                },
                opt(r.total_hours),
                opt(r.objective),
                r.nodes_explored.to_string(),
                r.route.clone().unwrap_or_default(),
            ]
        }),
    )
}

/// `<parameter>,mean_deviation,mean_final_shelf_life_days,replications`
pub fn sweep_csv(result: &SweepResult) -> String {
    let header = vec![
        result.parameter_name.clone(),
        "mean_deviation".into(),
        "mean_final_shelf_life_days".into(),
        "replications".into(),
    ];
    render(
        &header,
        (0..result.grid.len()).map(|i| {
            vec![
                fmt_sig(result.grid[i]),
                fmt_sig(result.mean_deviation[i]),
                fmt_sig(result.mean_final_shelf_life[i]),
                result.replication_count.to_string(),
            ]
        }),
    )
}

/// `scenario_id,model,trip_hours,freshness_deviation,slack_total,mean_temp_<product>...`
pub fn scenario_outcomes_csv(pairs: &[ScenarioPair], product_ids: &[String]) -> String {
    let mut header = strings(&[
        "scenario_id",
        "model",
        "trip_hours",
        "freshness_deviation",
        "slack_total",
    ]);
    header.extend(product_ids.iter().map(|id| format!("mean_temp_{id}")));
    let row = |model: &str, o: &ScenarioOutcome| {
        let mut r = vec![
            o.scenario_id.to_string(),
            model.to_string(),
            fmt_sig(o.trip_hours),
            fmt_sig(o.freshness_deviation),
            fmt_sig(o.slack_total),
        ];
        r.extend(o.per_product_mean_temp.iter().map(|&t| fmt_sig(t)));
        r
    };
    render(
        &header,
        pairs.iter().flat_map(|p| {
            [
                row("deterministic", &p.deterministic),
                row("adaptive", &p.adaptive),
            ]
        }),
    )
}
