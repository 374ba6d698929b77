use crate::domain::{Instance, ProductSpec, Route, SquareMatrix};
use crate::solver::{solve_exact, RouteAdditiveProblem, SideConstraint, SolveStatus};

use super::{check_network, check_scenario, ConstraintSlack, ModelError, ModelKind, ModelResult};

/// A static model reduced to the shared routing core.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledModel {
    pub kind: ModelKind,
    pub problem: RouteAdditiveProblem,
    /// Per-arc hours under the model's planning parameters. This is the
    /// weight matrix of every shelf-life constraint.
    pub planning_hours: SquareMatrix,
    pub product_ids: Vec<String>,
}

impl CompiledModel {
    pub fn planned_hours(&self, route: &Route) -> f64 {
        route.arcs().map(|(i, j)| self.planning_hours[(i, j)]).sum()
    }
}

fn shelf_constraints(
    products: &[ProductSpec],
    weights: &SquareMatrix,
    bound: impl Fn(&ProductSpec) -> f64,
) -> Vec<SideConstraint> {
    products
        .iter()
        .map(|p| SideConstraint {
            label: p.id.clone(),
            weights: weights.clone(),
            bound: bound(p),
        })
        .collect()
}

fn compiled(
    kind: ModelKind,
    instance: &Instance,
    arc_cost: SquareMatrix,
    planning_hours: SquareMatrix,
    bound: impl Fn(&ProductSpec) -> f64,
) -> CompiledModel {
    let side_constraints = shelf_constraints(&instance.products, &planning_hours, bound);
    CompiledModel {
        kind,
        problem: RouteAdditiveProblem {
            arc_cost,
            side_constraints,
        },
        planning_hours,
        product_ids: instance.products.iter().map(|p| p.id.clone()).collect(),
    }
}

/// Nominal `t_ij + delta_i` as both cost and shelf-constraint weight.
pub fn compile_deterministic(instance: &Instance) -> Result<CompiledModel, ModelError> {
    check_network(instance)?;
    let hours = instance.network.arc_time_matrix();
    Ok(compiled(
        ModelKind::Deterministic,
        instance,
        hours.clone(),
        hours,
        ProductSpec::shelf_window,
    ))
}

/// Worst case of the box: `T_max,ij + delta_max,i` everywhere.
pub fn compile_robust(instance: &Instance) -> Result<CompiledModel, ModelError> {
    check_network(instance)?;
    let b = instance
        .bounds
        .as_ref()
        .ok_or(ModelError::Missing("bounds"))?;
    let n = instance.node_count();
    if b.travel_time_max.dim() != n || b.delay_max.len() != n {
        return Err(ModelError::Dimension(
            "bounds do not match the network".into(),
        ));
    }
    let hours = SquareMatrix::from_fn(n, |i, j| b.travel_time_max[(i, j)] + b.delay_max[i]);
    Ok(compiled(
        ModelKind::Robust,
        instance,
        hours.clone(),
        hours,
        ProductSpec::shelf_window,
    ))
}

/// Nominal objective; shelf constraint on the scenario expectation
/// `sum_s p_s (t^s_ij + delta_i + delta^s_i)`.
pub fn compile_stochastic(instance: &Instance) -> Result<CompiledModel, ModelError> {
    check_network(instance)?;
    let scenarios = instance
        .scenarios
        .as_deref()
        .filter(|s| !s.is_empty())
        .ok_or(ModelError::Missing("scenarios"))?;
    for s in scenarios {
        check_scenario(instance, s)?;
    }
    let total: f64 = scenarios.iter().map(|s| s.probability).sum();
    if (total - 1.0).abs() > 1e-9
        || scenarios
            .iter()
            .any(|s| !(0.0..=1.0).contains(&s.probability))
    {
        return Err(ModelError::Probabilities(total));
    }
    let net = &instance.network;
    let expected = SquareMatrix::from_fn(net.node_count, |i, j| {
        scenarios
            .iter()
            .fold(0.0, |acc, s| acc + s.probability * s.arc_time(net, i, j))
    });
    Ok(compiled(
        ModelKind::Stochastic,
        instance,
        net.arc_time_matrix(),
        expected,
        ProductSpec::shelf_window,
    ))
}

/// Nominal objective; shelf constraint on
/// `(mu_delta_i + mu_T_ij) + z (var_delta_i + var_T_ij)`.
///
/// The bound is `L_k - R_k`, or `Q_k L_k - R_k` when the moments ask for
/// demand scaling.
pub fn compile_dro(instance: &Instance) -> Result<CompiledModel, ModelError> {
    check_network(instance)?;
    let m = instance
        .moments
        .as_ref()
        .ok_or(ModelError::Missing("moments"))?;
    let n = instance.node_count();
    if m.travel_mean.dim() != n
        || m.travel_variance.dim() != n
        || m.delay_mean.len() != n
        || m.delay_variance.len() != n
    {
        return Err(ModelError::Dimension(
            "moments do not match the network".into(),
        ));
    }
    let z = m.risk_aversion;
    let hours = SquareMatrix::from_fn(n, |i, j| {
        (m.delay_mean[i] + m.travel_mean[(i, j)])
            + z * (m.delay_variance[i] + m.travel_variance[(i, j)])
    });
    let scale = m.scale_by_demand;
    Ok(compiled(
        ModelKind::Dro,
        instance,
        instance.network.arc_time_matrix(),
        hours,
        move |p| {
            if scale {
                p.demand * p.initial_shelf_life - p.required_shelf_life
            } else {
                p.shelf_window()
            }
        },
    ))
}

fn run(model: CompiledModel) -> Result<ModelResult, ModelError> {
    let result = solve_exact(&model.problem)?;
    let diagnostics = match (&result.status, &result.route) {
        (SolveStatus::Optimal, Some(route)) => {
            let loads = model.problem.constraint_loads(&route.order);
            model
                .problem
                .side_constraints
                .iter()
                .zip(loads)
                .map(|(c, load)| ConstraintSlack {
                    product_id: c.label.clone(),
                    load,
                    bound: c.bound,
                    slack: c.bound - load,
                })
                .collect()
        }
        _ => infeasibility_report(&model)?,
    };
    let total_travel_hours = result.route.as_ref().map(|r| model.planned_hours(r));
    Ok(ModelResult {
        kind: model.kind,
        status: result.status,
        route: result.route,
        objective: result.objective,
        total_travel_hours,
        trace: None,
        diagnostics,
        nodes_explored: result.nodes_explored,
    })
}

/// Smallest achievable load per constraint, ignoring the others.
fn infeasibility_report(model: &CompiledModel) -> Result<Vec<ConstraintSlack>, ModelError> {
    model
        .problem
        .side_constraints
        .iter()
        .map(|c| {
            let best = solve_exact(&RouteAdditiveProblem::unconstrained(c.weights.clone()))?;
            let load = best.objective.unwrap_or(f64::NAN);
            Ok(ConstraintSlack {
                product_id: c.label.clone(),
                load,
                bound: c.bound,
                slack: c.bound - load,
            })
        })
        .collect()
}

pub fn solve_deterministic(instance: &Instance) -> Result<ModelResult, ModelError> {
    run(compile_deterministic(instance)?)
}

pub fn solve_robust(instance: &Instance) -> Result<ModelResult, ModelError> {
    run(compile_robust(instance)?)
}

pub fn solve_stochastic(instance: &Instance) -> Result<ModelResult, ModelError> {
    run(compile_stochastic(instance)?)
}

pub fn solve_dro(instance: &Instance) -> Result<ModelResult, ModelError> {
    run(compile_dro(instance)?)
}

/// Dispatches one of the four static models.
///
/// # Panics
///
/// On `ModelKind::Adaptive`, which needs a scenario.
pub fn solve_static(kind: ModelKind, instance: &Instance) -> Result<ModelResult, ModelError> {
    match kind {
        ModelKind::Deterministic => solve_deterministic(instance),
        ModelKind::Robust => solve_robust(instance),
        ModelKind::Stochastic => solve_stochastic(instance),
        ModelKind::Dro => solve_dro(instance),
        ModelKind::Adaptive => panic!("the adaptive model is not a static model"),
    }
}
