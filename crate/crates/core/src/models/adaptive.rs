//! Rolling-horizon routing with temperature feedback.
//!
//! Starting from the warehouse with every product at its ideal temperature,
//! each stage looks at the stops not yet visited and scores every candidate
//! hop `i -> j` by
//!
//! ```text
//! (T_ij + delta_i) + lambda_1 * sum_k D_jk + lambda_2 * sum_k S_jk
//! ```
//!
//! where the candidate temperature is `t_ik + tau_jk + beta (theta_k - t_ik)`.
//! If that leaves `[theta_min, theta_max]` the temperature is held at the
//! violated bound and the excess becomes slack `S_jk`; `D_jk` is the absolute
//! gap to `theta_k`. The cheapest candidate is taken (lowest index on ties),
//! its state becomes the next stage's start, and the tour closes with the leg
//! back to the warehouse.

use serde::{Deserialize, Serialize};

use crate::domain::{Instance, ProductSpec, Route, Scenario};
use crate::kinetics::time_weighted_mean;
use crate::solver::SolveStatus;

use super::{check_network, check_scenario, ModelError, ModelKind, ModelResult};

/// One traversed arc. The closing leg to the warehouse carries no product
/// state, so its vectors are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopRecord {
    pub from: usize,
    pub to: usize,
    pub temperatures: Vec<f64>,
    pub deviations: Vec<f64>,
    pub slacks: Vec<f64>,
    pub travel_hours: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveTrace {
    pub hops: Vec<HopRecord>,
    pub total_cost: f64,
    pub total_travel_hours: f64,
    pub total_deviation: f64,
    pub total_slack: f64,
}

impl AdaptiveTrace {
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0];
        order.extend(self.hops.iter().map(|h| h.to));
        order
    }
}

/// How product temperature evolves between stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemperatureRule {
    /// `t_j = t_i + tau_j`, unbounded.
    Drift,
    /// `t_j = t_i + tau_j + beta (theta - t_i)`, held inside the product's
    /// band with the excess reported as slack.
    Corrected { beta: f64 },
}

struct HopState {
    temperature: f64,
    deviation: f64,
    slack: f64,
}

fn step(rule: TemperatureRule, product: &ProductSpec, current: f64, tau: f64) -> HopState {
    let theta = product.ideal_temperature;
    match rule {
        TemperatureRule::Drift => {
            let t = current + tau;
            HopState {
                temperature: t,
                deviation: (t - theta).abs(),
                slack: 0.0,
            }
        }
        TemperatureRule::Corrected { beta } => {
            let raw = current + tau + beta * (theta - current);
            let (temperature, slack) = if raw > product.max_temperature {
                (product.max_temperature, raw - product.max_temperature)
            } else if raw < product.min_temperature {
                (product.min_temperature, product.min_temperature - raw)
            } else {
                (raw, 0.0)
            };
            HopState {
                temperature,
                deviation: (temperature - theta).abs(),
                slack,
            }
        }
    }
}

struct Candidate {
    states: Vec<HopState>,
    travel: f64,
    cost: f64,
}

/// Runs the rolling-horizon loop on one realized scenario.
pub fn solve_adaptive(instance: &Instance, scenario: &Scenario) -> Result<ModelResult, ModelError> {
    check_network(instance)?;
    check_scenario(instance, scenario)?;
    let net = &instance.network;
    let n = net.node_count;
    let params = instance.adaptive_params;
    let rule = TemperatureRule::Corrected {
        beta: params.correction_factor,
    };
    let products = &instance.products;

    if n < 2 {
        return Ok(ModelResult {
            kind: ModelKind::Adaptive,
            status: SolveStatus::Optimal,
            route: Some(Route::from_order(vec![0], |_, _| 0.0)),
            objective: Some(0.0),
            total_travel_hours: Some(0.0),
            trace: Some(AdaptiveTrace::default()),
            diagnostics: Vec::new(),
            nodes_explored: 0,
        });
    }

    let mut temps: Vec<f64> = products.iter().map(|p| p.ideal_temperature).collect();
    let mut remaining: Vec<bool> = (0..n).map(|v| v != 0).collect();
    let mut current = 0;
    let mut hops = Vec::with_capacity(n);
    let mut evaluated = 0u64;

    for _ in 1..n {
        let mut best: Option<(usize, Candidate)> = None;
        for j in (1..n).filter(|&j| remaining[j]) {
            evaluated += 1;
            let states: Vec<HopState> = products
                .iter()
                .zip(&temps)
                .enumerate()
                .map(|(k, (p, &t))| step(rule, p, t, scenario.ambient_shift[j][k]))
                .collect();
            let travel = scenario.arc_time(net, current, j);
            let dev: f64 = states.iter().map(|s| s.deviation).sum();
            let slack: f64 = states.iter().map(|s| s.slack).sum();
            let cost = travel + params.deviation_penalty * dev + params.slack_penalty * slack;
            if best.as_ref().is_none_or(|(_, b)| cost < b.cost) {
                best = Some((
                    j,
                    Candidate {
                        states,
                        travel,
                        cost,
                    },
                ));
            }
        }
        let (next, chosen) = best.expect("at least one stop remains");
        temps = chosen.states.iter().map(|s| s.temperature).collect();
        hops.push(HopRecord {
            from: current,
            to: next,
            temperatures: temps.clone(),
            deviations: chosen.states.iter().map(|s| s.deviation).collect(),
            slacks: chosen.states.iter().map(|s| s.slack).collect(),
            travel_hours: chosen.travel,
            cost: chosen.cost,
        });
        remaining[next] = false;
        current = next;
    }

    let back = scenario.arc_time(net, current, 0);
    hops.push(HopRecord {
        from: current,
        to: 0,
        temperatures: Vec::new(),
        deviations: Vec::new(),
        slacks: Vec::new(),
        travel_hours: back,
        cost: back,
    });

    let trace = AdaptiveTrace {
        total_cost: hops.iter().map(|h| h.cost).sum(),
        total_travel_hours: hops.iter().map(|h| h.travel_hours).sum(),
        total_deviation: hops.iter().flat_map(|h| &h.deviations).sum(),
        total_slack: hops.iter().flat_map(|h| &h.slacks).sum(),
        hops,
    };
    let route = Route::from_order(trace.order(), |i, j| scenario.arc_time(net, i, j));
    Ok(ModelResult {
        kind: ModelKind::Adaptive,
        status: SolveStatus::Optimal,
        objective: Some(trace.total_cost),
        total_travel_hours: Some(trace.total_travel_hours),
        route: Some(route),
        trace: Some(trace),
        diagnostics: Vec::new(),
        nodes_explored: evaluated,
    })
}

/// Checks a trace against the full big-M constraint set: temperature
/// propagation on every ordered pair of nodes (deactivated by `M` off the
/// route), the temperature band, and `D_jk = |t_jk - theta_k|`.
///
/// Returns a description of every violated constraint.
pub fn check_adaptive_constraints(
    trace: &AdaptiveTrace,
    instance: &Instance,
    scenario: &Scenario,
) -> Vec<String> {
    const TOL: f64 = 1e-9;
    let n = instance.node_count();
    let products = &instance.products;
    let params = instance.adaptive_params;
    let beta = params.correction_factor;
    let m = params.big_m;

    let mut node_temps: Vec<Vec<f64>> =
        vec![products.iter().map(|p| p.ideal_temperature).collect(); n];
    let mut node_slack: Vec<Vec<f64>> = vec![vec![0.0; products.len()]; n];
    let mut node_dev: Vec<Vec<f64>> = vec![vec![0.0; products.len()]; n];
    let mut on_route = vec![false; n * n];
    let mut problems = Vec::new();
    for hop in &trace.hops {
        on_route[hop.from * n + hop.to] = true;
        if hop.to != 0 {
            node_temps[hop.to] = hop.temperatures.clone();
            node_slack[hop.to] = hop.slacks.clone();
            node_dev[hop.to] = hop.deviations.clone();
        }
    }
    for (k, p) in products.iter().enumerate() {
        for j in 1..n {
            let t = node_temps[j][k];
            if t < p.min_temperature - TOL || t > p.max_temperature + TOL {
                problems.push(format!(
                    "node {j} product {}: temperature {t} outside band",
                    p.id
                ));
            }
            if (node_dev[j][k] - (t - p.ideal_temperature).abs()).abs() > TOL {
                problems.push(format!(
                    "node {j} product {}: deviation is not |t - theta|",
                    p.id
                ));
            }
            if node_slack[j][k] < -TOL {
                problems.push(format!("node {j} product {}: negative slack", p.id));
            }
            for i in (0..n).filter(|&i| i != j) {
                let x = if on_route[i * n + j] { 1.0 } else { 0.0 };
                let ti = node_temps[i][k];
                let predicted =
                    ti + scenario.ambient_shift[j][k] + beta * (p.ideal_temperature - ti);
                let relax = m * (1.0 - x) + node_slack[j][k];
                if t < predicted - relax - TOL || t > predicted + relax + TOL {
                    problems.push(format!(
                        "arc ({i},{j}) product {}: propagation violated (x = {x})",
                        p.id
                    ));
                }
            }
        }
    }
    problems
}

/// A fixed route replayed through a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteEvaluation {
    pub travel_hours: f64,
    /// `sum over stops and products of |t_ik - theta_k|`.
    pub total_deviation: f64,
    pub total_slack: f64,
    /// Time-weighted mean transit temperature per product, from departure to
    /// the last stop.
    pub mean_temperature: Vec<f64>,
    /// Arrival time at each stop, hours since departure.
    pub arrival_hours: Vec<f64>,
    /// Product temperatures at each stop, `[stop][product]`.
    pub stop_temperatures: Vec<Vec<f64>>,
}

/// Walks `route` through `scenario`. With `correct` the adaptive update rule
/// (with the instance's `beta`) is applied at every stop; without it the
/// products drift by the raw ambient shifts.
pub fn evaluate_route_under_scenario(
    route: &Route,
    instance: &Instance,
    scenario: &Scenario,
    correct: bool,
) -> Result<RouteEvaluation, ModelError> {
    check_network(instance)?;
    check_scenario(instance, scenario)?;
    let n = instance.node_count();
    route.check_structure(n)?;
    let net = &instance.network;
    let products = &instance.products;
    let rule = if correct {
        TemperatureRule::Corrected {
            beta: instance.adaptive_params.correction_factor,
        }
    } else {
        TemperatureRule::Drift
    };

    let mut temps: Vec<f64> = products.iter().map(|p| p.ideal_temperature).collect();
    let mut samples: Vec<Vec<(f64, f64)>> = temps.iter().map(|&t| vec![(0.0, t)]).collect();
    let mut clock = 0.0;
    let mut total_deviation = 0.0;
    let mut total_slack = 0.0;
    let mut arrival_hours = Vec::with_capacity(n);
    let mut stop_temperatures = Vec::with_capacity(n);

    for (i, j) in route.arcs() {
        clock += scenario.arc_time(net, i, j);
        if j == 0 {
            continue;
        }
        for (k, p) in products.iter().enumerate() {
            let s = step(rule, p, temps[k], scenario.ambient_shift[j][k]);
            temps[k] = s.temperature;
            total_deviation += s.deviation;
            total_slack += s.slack;
            samples[k].push((clock, s.temperature));
        }
        arrival_hours.push(clock);
        stop_temperatures.push(temps.clone());
    }

    Ok(RouteEvaluation {
        travel_hours: clock,
        total_deviation,
        total_slack,
        mean_temperature: samples.iter().map(|s| time_weighted_mean(s)).collect(),
        arrival_hours,
        stop_temperatures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::fixtures::{product, uniform_network};
    use crate::domain::{Network, SquareMatrix};

    fn instance(n: usize, beta: f64) -> Instance {
        let mut inst = Instance::new(uniform_network(n, 1.0, 0.0), vec![product("apple", 100.0)]);
        inst.adaptive_params.correction_factor = beta;
        inst
    }

    fn scenario_with_tau(n: usize, tau: &[f64]) -> Scenario {
        let mut s = Scenario::nominal(0, 1.0, n, 1);
        for (j, &t) in tau.iter().enumerate() {
            s.ambient_shift[j][0] = t;
        }
        s
    }

    #[test]
    fn undisturbed_run_is_nearest_neighbour() {
        let cost = SquareMatrix::from_rows(vec![
            vec![0.0, 5.0, 1.0, 3.0],
            vec![1.0, 0.0, 4.0, 1.0],
            vec![2.0, 2.0, 0.0, 6.0],
            vec![3.0, 1.0, 1.0, 0.0],
        ])
        .unwrap();
        let mut inst = Instance::new(
            Network::new(cost, vec![0.0; 4]),
            vec![product("apple", 100.0)],
        );
        inst.adaptive_params.correction_factor = 0.0;
        let r = solve_adaptive(&inst, &Scenario::nominal(0, 1.0, 4, 1)).unwrap();
        // 0 -> 2 (1), 2 -> 1 (2), 1 -> 3 (1), back 3 -> 0 (3).
        assert_eq!(r.route.as_ref().unwrap().order, vec![0, 2, 1, 3, 0]);
        let trace = r.trace.unwrap();
        assert_eq!(trace.total_deviation, 0.0);
        assert_eq!(trace.total_slack, 0.0);
        assert!(trace.hops[..3].iter().all(|h| h.temperatures == vec![5.0]));
        assert_eq!(trace.total_travel_hours, 7.0);
        assert_eq!(r.objective, Some(7.0));
    }

    #[test]
    fn full_correction_resets_each_hop() {
        let inst = instance(4, 1.0);
        let s = scenario_with_tau(4, &[0.0, 1.5, -2.0, 0.5]);
        let r = solve_adaptive(&inst, &s).unwrap();
        for hop in r.trace.as_ref().unwrap().hops.iter().filter(|h| h.to != 0) {
            assert_eq!(hop.temperatures[0], 5.0 + s.ambient_shift[hop.to][0]);
        }
    }

    #[test]
    fn deviation_penalty_flips_the_greedy_choice() {
        // Node 1 is the shorter hop but hot; node 2 is longer and calm.
        let cost = SquareMatrix::from_rows(vec![
            vec![0.0, 1.0, 1.5],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap();
        let mut inst = Instance::new(
            Network::new(cost, vec![0.0; 3]),
            vec![product("apple", 100.0)],
        );
        inst.adaptive_params = crate::domain::AdaptiveParams {
            correction_factor: 0.5,
            deviation_penalty: 2.0,
            slack_penalty: 10.0,
            big_m: 100.0,
        };
        let s = scenario_with_tau(3, &[0.0, 2.0, 0.0]);

        // Stage 1 from 0, t = 5:
        //   j=1: t = 5 + 2 = 7, D = 2, cost = 1.0 + 2*2 = 5.0
        //   j=2: t = 5,         D = 0, cost = 1.5
        // Stage 2 from 2, t = 5:
        //   j=1: t = 7, D = 2, cost = 1.0 + 4 = 5.0
        // Return 1 -> 0: 1.0. Total 7.5, deviation 2.
        let r = solve_adaptive(&inst, &s).unwrap();
        let trace = r.trace.unwrap();
        assert_eq!(trace.order(), vec![0, 2, 1, 0]);
        assert_eq!(trace.hops[0].cost, 1.5);
        assert_eq!(trace.hops[1].temperatures, vec![7.0]);
        assert_eq!(trace.hops[1].cost, 5.0);
        assert_eq!(trace.total_cost, 7.5);
        assert_eq!(trace.total_deviation, 2.0);
        assert_eq!(trace.total_travel_hours, 3.5);

        // Without the penalty the shorter hop wins.
        inst.adaptive_params.deviation_penalty = 0.0;
        let r = solve_adaptive(&inst, &s).unwrap();
        assert_eq!(r.route.unwrap().order, vec![0, 1, 2, 0]);
    }

    #[test]
    fn clamping_records_slack() {
        let inst = instance(3, 0.0);
        let s = scenario_with_tau(3, &[0.0, 4.0, -1.0]);
        let r = solve_adaptive(&inst, &s).unwrap();
        let trace = r.trace.as_ref().unwrap();
        for hop in trace.hops.iter().filter(|h| h.to != 0) {
            assert!(hop.temperatures[0] >= 2.0 && hop.temperatures[0] <= 8.0);
        }
        // Second stop is node 1 (5 - 1 + 4 = 8 exactly, no slack) or node 2
        // first; either way no candidate leaves the band by more than 1.
        assert!(check_adaptive_constraints(trace, &inst, &s).is_empty());
        let hot = scenario_with_tau(3, &[0.0, 4.0, 4.0]);
        let r = solve_adaptive(&inst, &hot).unwrap();
        let trace = r.trace.unwrap();
        // 5 + 4 = 9 -> held at 8 (S = 1); then 8 + 4 = 12 -> 8 (S = 4).
        assert_eq!(trace.hops[0].slacks, vec![1.0]);
        assert_eq!(trace.hops[1].slacks, vec![4.0]);
        assert_eq!(trace.total_slack, 5.0);
        assert!(check_adaptive_constraints(&trace, &inst, &hot).is_empty());
    }

    #[test]
    fn single_node_network_is_degenerate() {
        let mut inst = instance(2, 0.5);
        inst.network = Network::new(SquareMatrix::filled(1, 0.0), vec![0.0]);
        let r = solve_adaptive(&inst, &Scenario::nominal(0, 1.0, 1, 1)).unwrap();
        assert!(r.trace.unwrap().hops.is_empty());
        assert_eq!(r.objective, Some(0.0));
    }

    #[test]
    fn drift_accumulates_without_correction() {
        let inst = instance(3, 0.5);
        let s = scenario_with_tau(3, &[0.0, 1.0, 1.0]);
        let route = Route::from_order(vec![0, 1, 2, 0], |i, j| inst.network.arc_time(i, j));
        let off = evaluate_route_under_scenario(&route, &inst, &s, false).unwrap();
        assert_eq!(off.stop_temperatures, vec![vec![6.0], vec![7.0]]);
        assert_eq!(off.total_deviation, 3.0);
        let on = evaluate_route_under_scenario(&route, &inst, &s, true).unwrap();
        assert_eq!(on.stop_temperatures, vec![vec![6.0], vec![6.5]]);
        assert_eq!(on.total_deviation, 2.5);
        assert_eq!(on.travel_hours, 3.0);
        assert_eq!(off.arrival_hours, vec![1.0, 2.0]);
        // Trapezoid over (0,5), (1,6), (2,7) -> 6.
        assert_eq!(off.mean_temperature, vec![6.0]);
    }

    #[test]
    fn calm_scenario_has_no_deviation() {
        let inst = instance(4, 0.3);
        let s = Scenario::nominal(0, 1.0, 4, 1);
        let route = Route::from_order(vec![0, 3, 1, 2, 0], |i, j| inst.network.arc_time(i, j));
        for correct in [false, true] {
            let e = evaluate_route_under_scenario(&route, &inst, &s, correct).unwrap();
            assert_eq!(e.total_deviation, 0.0);
            assert_eq!(e.mean_temperature, vec![5.0]);
        }
    }

    #[test]
    fn evaluation_rejects_mismatched_inputs() {
        let inst = instance(3, 0.3);
        let route = Route::from_order(vec![0, 1, 2, 0], |_, _| 1.0);
        let bad = Scenario::nominal(0, 1.0, 4, 1);
        assert!(matches!(
            evaluate_route_under_scenario(&route, &inst, &bad, true),
            Err(ModelError::Dimension(_))
        ));
        let short = Route::from_order(vec![0, 1, 0], |_, _| 1.0);
        assert!(evaluate_route_under_scenario(
            &short,
            &inst,
            &Scenario::nominal(0, 1.0, 3, 1),
            true
        )
        .is_err());
    }
}
