//! The five routing formulations.
//!
//! The four static models (deterministic, robust, stochastic, DRO) differ only
//! in the arc costs they minimize and the arc weights of their per-product
//! shelf-life constraint, so each compiles to a [`RouteAdditiveProblem`] and
//! is solved exactly. The adaptive model is a rolling-horizon loop that picks
//! one hop at a time under temperature feedback.

mod adaptive;
mod static_models;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DomainError, Instance, Route, Scenario};
use crate::solver::{SolveStatus, SolverError};

pub use adaptive::{
    check_adaptive_constraints, evaluate_route_under_scenario, solve_adaptive, AdaptiveTrace,
    HopRecord, RouteEvaluation, TemperatureRule,
};
pub use static_models::{
    compile_deterministic, compile_dro, compile_robust, compile_stochastic, solve_deterministic,
    solve_dro, solve_robust, solve_static, solve_stochastic, CompiledModel,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("instance has no {0} block")]
    Missing(&'static str),
    #[error("scenario probabilities sum to {0}, expected 1")]
    Probabilities(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unknown model '{0}'")]
    UnknownKind(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Deterministic,
    Robust,
    Stochastic,
    Dro,
    Adaptive,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Deterministic,
        ModelKind::Robust,
        ModelKind::Stochastic,
        ModelKind::Dro,
        ModelKind::Adaptive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Deterministic => "deterministic",
            ModelKind::Robust => "robust",
            ModelKind::Stochastic => "stochastic",
            ModelKind::Dro => "dro",
            ModelKind::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "deterministic" | "det" => Ok(ModelKind::Deterministic),
            "robust" | "ro" => Ok(ModelKind::Robust),
            "stochastic" | "sp" => Ok(ModelKind::Stochastic),
            "dro" => Ok(ModelKind::Dro),
            "adaptive" => Ok(ModelKind::Adaptive),
            other => Err(ModelError::UnknownKind(other.to_string())),
        }
    }
}

/// Load and bound of one shelf-life constraint on the returned route.
///
/// For an infeasible model, `load` is the smallest load any tour can reach
/// for that product alone, so a negative slack names the culprit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSlack {
    pub product_id: String,
    pub load: f64,
    pub bound: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub kind: ModelKind,
    pub status: SolveStatus,
    pub route: Option<Route>,
    pub objective: Option<f64>,
    /// Route hours under the parameters the model plans with: nominal,
    /// worst case, scenario expectation, moment-adjusted, or (adaptive) the
    /// realized scenario.
    pub total_travel_hours: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<AdaptiveTrace>,
    pub diagnostics: Vec<ConstraintSlack>,
    pub nodes_explored: u64,
}

impl ModelResult {
    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Runs any of the five models. `scenario` is only used by the adaptive
/// model; when absent it runs on the nominal, undisturbed scenario.
pub fn solve_model(
    kind: ModelKind,
    instance: &Instance,
    scenario: Option<&Scenario>,
) -> Result<ModelResult, ModelError> {
    match kind {
        ModelKind::Adaptive => {
            let nominal;
            let s = match scenario {
                Some(s) => s,
                None => {
                    nominal =
                        Scenario::nominal(0, 1.0, instance.node_count(), instance.products.len());
                    &nominal
                }
            };
            solve_adaptive(instance, s)
        }
        static_kind => solve_static(static_kind, instance),
    }
}

pub(crate) fn check_network(instance: &Instance) -> Result<(), ModelError> {
    let net = &instance.network;
    let n = net.node_count;
    if net.travel_time.dim() != n || net.delay.len() != n {
        return Err(ModelError::Dimension(format!(
            "network declares {n} nodes but travel_time is {0}x{0} and delay has {1} entries",
            net.travel_time.dim(),
            net.delay.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_scenario(instance: &Instance, scenario: &Scenario) -> Result<(), ModelError> {
    let n = instance.node_count();
    let k = instance.products.len();
    if scenario.extra_delays.len() != n {
        return Err(ModelError::Dimension(format!(
            "scenario {} has {} delays for {n} nodes",
            scenario.id,
            scenario.extra_delays.len()
        )));
    }
    if scenario.ambient_shift.len() != n || scenario.ambient_shift.iter().any(|r| r.len() != k) {
        return Err(ModelError::Dimension(format!(
            "scenario {} ambient shift must be {n} x {k}",
            scenario.id
        )));
    }
    if let Some(t) = &scenario.travel_times {
        if t.dim() != n {
            return Err(ModelError::Dimension(format!(
                "scenario {} travel times are {}x{}",
                scenario.id,
                t.dim(),
                t.dim()
            )));
        }
    }
    Ok(())
}
