//! Shared data model: products, the delivery network, uncertainty
//! descriptors, scenarios and routes.
//!
//! Node 0 is always the warehouse. Matrices serialize as arrays of rows.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinetics::{Q10Params, ShelfLifeRef};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid route: {0}")]
    InvalidRoute(String),
    #[error("invalid product {id}: {reason}")]
    InvalidProduct { id: String, reason: String },
}

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn filled(dim: usize, value: f64) -> Self {
        Self {
            dim,
            data: vec![value; dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, DomainError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(DomainError::Dimension(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.dim.max(1))
            .map(<[f64]>::to_vec)
            .take(self.dim)
            .collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Elementwise combination. Panics if dimensions differ.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let dim = self.dim;
        self.data
            .iter()
            .enumerate()
            .map(move |(idx, &v)| (idx / dim, idx % dim, v))
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for SquareMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.dim))?;
        for row in self.data.chunks(self.dim.max(1)).take(self.dim) {
            seq.serialize_element(row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Self::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// A perishable product and its thermal requirements.
///
/// Temperatures are Celsius, shelf lives are hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSpec {
    pub id: String,
    pub name: String,
    pub ideal_temperature: f64,
    pub min_temperature: f64,
    pub max_temperature: f64,
    pub initial_shelf_life: f64,
    pub required_shelf_life: f64,
    #[serde(default = "unit_demand")]
    pub demand: f64,
    pub q10: Q10Params,
}

fn unit_demand() -> f64 {
    1.0
}

impl ProductSpec {
    /// Hours of transit the product can absorb, `L_k - R_k`.
    pub fn shelf_window(&self) -> f64 {
        self.initial_shelf_life - self.required_shelf_life
    }

    /// Q10 reference anchored at the ideal temperature and initial shelf life.
    pub fn shelf_reference(&self) -> Result<ShelfLifeRef, crate::kinetics::KineticsError> {
        ShelfLifeRef::from_celsius(self.initial_shelf_life, self.ideal_temperature)
    }
}

/// Travel times, stop delays and (optionally) distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub node_count: usize,
    /// Hours, `t_ij`.
    pub travel_time: SquareMatrix,
    /// Hours spent at each node before departing, `delta_i`.
    pub delay: Vec<f64>,
    /// Kilometres, `d_ij`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<SquareMatrix>,
}

impl Network {
    pub fn new(travel_time: SquareMatrix, delay: Vec<f64>) -> Self {
        Self {
            node_count: travel_time.dim(),
            travel_time,
            delay,
            distance: None,
        }
    }

    /// Per-arc cost `t_ij + delta_i` used by every static model.
    pub fn arc_time(&self, i: usize, j: usize) -> f64 {
        self.travel_time[(i, j)] + self.delay[i]
    }

    pub fn arc_time_matrix(&self) -> SquareMatrix {
        SquareMatrix::from_fn(self.node_count, |i, j| self.arc_time(i, j))
    }
}

/// Box uncertainty set for travel times and delays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyBounds {
    pub travel_time_min: SquareMatrix,
    pub travel_time_max: SquareMatrix,
    pub delay_min: Vec<f64>,
    pub delay_max: Vec<f64>,
}

impl UncertaintyBounds {
    /// The degenerate box pinned at the nominal values.
    pub fn nominal(network: &Network) -> Self {
        Self {
            travel_time_min: network.travel_time.clone(),
            travel_time_max: network.travel_time.clone(),
            delay_min: network.delay.clone(),
            delay_max: network.delay.clone(),
        }
    }
}

/// First and second moments for the moment-based ambiguity set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentInfo {
    pub travel_mean: SquareMatrix,
    pub travel_variance: SquareMatrix,
    pub delay_mean: Vec<f64>,
    pub delay_variance: Vec<f64>,
    /// Safety factor `z` multiplying the variance terms.
    pub risk_aversion: f64,
    /// Multiply the shelf-life term of the bound by product demand.
    #[serde(default, skip_serializing_if = "is_false")]
    pub scale_by_demand: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

impl MomentInfo {
    /// Zero-variance moments at the nominal values.
    pub fn nominal(network: &Network, risk_aversion: f64) -> Self {
        let n = network.node_count;
        Self {
            travel_mean: network.travel_time.clone(),
            travel_variance: SquareMatrix::filled(n, 0.0),
            delay_mean: network.delay.clone(),
            delay_variance: vec![0.0; n],
            risk_aversion,
            scale_by_demand: false,
        }
    }
}

/// One realization of disruption delays and ambient temperature shifts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u32,
    pub probability: f64,
    /// Disruption delay at each node, hours, realized on top of the nominal
    /// stop delay. Index 0 is the warehouse.
    pub extra_delays: Vec<f64>,
    /// Realized travel times. `None` means the nominal matrix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub travel_times: Option<SquareMatrix>,
    /// Ambient shift `tau_jk` in Celsius, indexed `[node][product]`.
    pub ambient_shift: Vec<Vec<f64>>,
}

impl Scenario {
    /// The scenario that realizes exactly the nominal network with no
    /// temperature disturbance.
    pub fn nominal(id: u32, probability: f64, node_count: usize, product_count: usize) -> Self {
        Self {
            id,
            probability,
            extra_delays: vec![0.0; node_count],
            travel_times: None,
            ambient_shift: vec![vec![0.0; product_count]; node_count],
        }
    }

    pub fn realized_delay(&self, network: &Network, i: usize) -> f64 {
        network.delay[i] + self.extra_delays[i]
    }

    pub fn realized_travel(&self, network: &Network, i: usize, j: usize) -> f64 {
        match &self.travel_times {
            Some(t) => t[(i, j)],
            None => network.travel_time[(i, j)],
        }
    }

    /// Realized `t_ij + delta_i` for this scenario.
    pub fn arc_time(&self, network: &Network, i: usize, j: usize) -> f64 {
        self.realized_travel(network, i, j) + self.realized_delay(network, i)
    }
}

/// Parameters of the rolling-horizon temperature-feedback model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptiveParams {
    /// Fraction `beta` of the gap to the ideal temperature removed per hop.
    pub correction_factor: f64,
    /// `lambda_1`, cost per degree of deviation.
    pub deviation_penalty: f64,
    /// `lambda_2`, cost per degree of slack.
    pub slack_penalty: f64,
    /// Big-M used by the post-hoc constraint checker, Celsius.
    pub big_m: f64,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        Self {
            correction_factor: 0.5,
            deviation_penalty: 1.0,
            slack_penalty: 10.0,
            big_m: 100.0,
        }
    }
}

/// Free-form origin details recorded by generators.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
}

/// Everything a model run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub network: Network,
    pub products: Vec<ProductSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<UncertaintyBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<Vec<Scenario>>,
    #[serde(default)]
    pub adaptive_params: AdaptiveParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<InstanceMeta>,
}

impl Instance {
    pub fn new(network: Network, products: Vec<ProductSpec>) -> Self {
        Self {
            network,
            products,
            bounds: None,
            moments: None,
            scenarios: None,
            adaptive_params: AdaptiveParams::default(),
            meta: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.network.node_count
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }

    /// Same instance with every uncertainty block collapsed onto the nominal
    /// values: point box, one nominal scenario, zero-variance moments.
    pub fn with_degenerate_uncertainty(&self, risk_aversion: f64) -> Self {
        let n = self.node_count();
        let mut out = self.clone();
        out.bounds = Some(UncertaintyBounds::nominal(&self.network));
        out.moments = Some(MomentInfo::nominal(&self.network, risk_aversion));
        out.scenarios = Some(vec![Scenario::nominal(0, 1.0, n, self.products.len())]);
        out
    }
}

/// A single-vehicle tour rooted at the warehouse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    /// Visit order, starting and ending at node 0.
    pub order: Vec<usize>,
    /// Cost of each traversed arc, aligned with `order.windows(2)`.
    pub leg_costs: Vec<f64>,
    pub total_time: f64,
    /// MTZ sequencing value `u_i` per node: the visit index, 0 for the
    /// warehouse.
    pub sequencing: Vec<usize>,
}

impl Route {
    /// Builds a route from a closed visit order, attributing each arc's cost
    /// with `arc_cost`.
    pub fn from_order(order: Vec<usize>, arc_cost: impl Fn(usize, usize) -> f64) -> Self {
        let leg_costs: Vec<f64> = order.windows(2).map(|w| arc_cost(w[0], w[1])).collect();
        let total_time = leg_costs.iter().sum();
        let node_count = order.iter().copied().max().map_or(1, |m| m + 1);
        let mut sequencing = vec![0; node_count];
        for (pos, &node) in order.iter().enumerate().skip(1) {
            if node != 0 {
                sequencing[node] = pos;
            }
        }
        Self {
            order,
            leg_costs,
            total_time,
            sequencing,
        }
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.order.windows(2).map(|w| (w[0], w[1]))
    }

    /// Non-warehouse stops in visit order.
    pub fn stops(&self) -> &[usize] {
        if self.order.len() >= 2 {
            &self.order[1..self.order.len() - 1]
        } else {
            &[]
        }
    }

    /// Checks the degree, single-cycle and no-self-loop conditions for a
    /// network with `node_count` nodes.
    pub fn check_structure(&self, node_count: usize) -> Result<(), DomainError> {
        let order = &self.order;
        if order.len() != node_count + 1 {
            return Err(DomainError::InvalidRoute(format!(
                "expected {} positions for {node_count} nodes, got {}",
                node_count + 1,
                order.len()
            )));
        }
        if order.first() != Some(&0) || order.last() != Some(&0) {
            return Err(DomainError::InvalidRoute(
                "route must start and end at the warehouse".into(),
            ));
        }
        let mut seen = vec![false; node_count];
        for &node in &order[1..node_count] {
            if node == 0 || node >= node_count {
                return Err(DomainError::InvalidRoute(format!("unexpected node {node}")));
            }
            if std::mem::replace(&mut seen[node], true) {
                return Err(DomainError::InvalidRoute(format!(
                    "node {node} visited twice"
                )));
            }
        }
        if let Some((i, _)) = self.arcs().find(|(i, j)| i == j) {
            return Err(DomainError::InvalidRoute(format!("self-loop at node {i}")));
        }
        if self.leg_costs.len() != node_count {
            return Err(DomainError::InvalidRoute("leg cost count mismatch".into()));
        }
        Ok(())
    }

    /// MTZ inequalities `u_i - u_j + n x_ij <= n - 1` that fail for this
    /// route, as `(i, j)` pairs over customer nodes.
    pub fn mtz_violations(&self, node_count: usize) -> Vec<(usize, usize)> {
        let n = node_count as i64;
        let mut x = vec![false; node_count * node_count];
        for (i, j) in self.arcs() {
            if i < node_count && j < node_count {
                x[i * node_count + j] = true;
            }
        }
        let mut bad = Vec::new();
        for i in 1..node_count {
            for j in 1..node_count {
                if i == j {
                    continue;
                }
                let u_i = *self.sequencing.get(i).unwrap_or(&0) as i64;
                let u_j = *self.sequencing.get(j).unwrap_or(&0) as i64;
                let x_ij = i64::from(x[i * node_count + j]);
                if u_i - u_j + n * x_ij > n - 1 {
                    bad.push((i, j));
                }
            }
        }
        bad
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.order.iter().map(usize::to_string).collect();
        write!(f, "{}", parts.join("-"))
    }
}

/// Total time `sum (t_ij + delta_i)` over the route's arcs. The warehouse
/// delay counts once, on departure.
pub fn route_total_time(route: &Route, network: &Network) -> Result<f64, DomainError> {
    let n = network.node_count;
    if let Some(&bad) = route.order.iter().find(|&&v| v >= n) {
        return Err(DomainError::Dimension(format!(
            "route visits node {bad} but the network has {n} nodes"
        )));
    }
    Ok(route.arcs().map(|(i, j)| network.arc_time(i, j)).sum())
}

/// A single invariant violation, located by a JSON-style field path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ValidationIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.issues
            .iter()
            .any(|i| i.path.contains(needle) || i.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{}: {}", issue.path, issue.message)?;
        }
        Ok(())
    }
}

const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Collects every invariant violation in `instance`.
pub fn validate_instance(instance: &Instance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let net = &instance.network;
    let n = net.node_count;

    if n < 2 {
        report.push(
            "network.node_count",
            format!("need at least 2 nodes, got {n}"),
        );
    }
    if net.travel_time.dim() != n {
        report.push(
            "network.travel_time",
            format!("matrix is {0}x{0}, expected {n}x{n}", net.travel_time.dim()),
        );
    } else {
        for (i, j, v) in net.travel_time.iter() {
            if i == j && v != 0.0 {
                report.push(
                    format!("network.travel_time[{i}][{i}]"),
                    "diagonal must be zero",
                );
            } else if !(v >= 0.0 && v.is_finite()) {
                report.push(
                    format!("network.travel_time[{i}][{j}]"),
                    "must be finite and non-negative",
                );
            }
        }
    }
    if net.delay.len() != n {
        report.push(
            "network.delay",
            format!("length {} != node count {n}", net.delay.len()),
        );
    }
    for (i, &d) in net.delay.iter().enumerate() {
        if !(d >= 0.0 && d.is_finite()) {
            report.push(
                format!("network.delay[{i}]"),
                "must be finite and non-negative",
            );
        }
    }
    if let Some(dist) = &net.distance {
        if dist.dim() != n {
            report.push("network.distance", "dimension does not match node count");
        }
    }
    let shapes_ok = net.travel_time.dim() == n && net.delay.len() == n;

    if instance.products.is_empty() {
        report.push("products", "at least one product is required");
    }
    for (k, p) in instance.products.iter().enumerate() {
        let path = format!("products[{k}]");
        if !(p.min_temperature <= p.ideal_temperature && p.ideal_temperature <= p.max_temperature) {
            report.push(
                format!("{path}.ideal_temperature"),
                "need min_temperature <= ideal_temperature <= max_temperature",
            );
        }
        if p.required_shelf_life < 0.0 {
            report.push(
                format!("{path}.required_shelf_life"),
                "must be non-negative",
            );
        }
        if !(p.initial_shelf_life - p.required_shelf_life > 0.0) {
            report.push(
                format!("{path}.required_shelf_life"),
                "assumption L_k - R_k > 0 violated: required shelf life must be below initial shelf life",
            );
        }
        if p.demand < 0.0 {
            report.push(format!("{path}.demand"), "must be non-negative");
        }
        if !(p.q10.q10 > 1.0) {
            report.push(format!("{path}.q10"), "Q10 must exceed 1");
        }
    }

    if let (Some(b), true) = (&instance.bounds, shapes_ok) {
        check_box(&mut report, b, net);
    }
    if let Some(m) = &instance.moments {
        check_moments(&mut report, m, n);
    }
    let product_count = instance.products.len();
    let mut max_tau: f64 = 0.0;
    if let Some(scenarios) = &instance.scenarios {
        if scenarios.is_empty() {
            report.push("scenarios", "scenario list is empty");
        }
        let total: f64 = scenarios.iter().map(|s| s.probability).sum();
        if !scenarios.is_empty() && (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            report.push(
                "scenarios",
                format!("probabilities sum to {total}, expected 1"),
            );
        }
        for (s_idx, s) in scenarios.iter().enumerate() {
            let path = format!("scenarios[{s_idx}]");
            if !(0.0..=1.0).contains(&s.probability) {
                report.push(format!("{path}.probability"), "must lie in [0, 1]");
            }
            if s.extra_delays.len() != n {
                report.push(
                    format!("{path}.extra_delays"),
                    "length does not match node count",
                );
            }
            if s.extra_delays.iter().any(|&d| !(d >= 0.0)) {
                report.push(
                    format!("{path}.extra_delays"),
                    "delays must be non-negative",
                );
            }
            if let Some(t) = &s.travel_times {
                if t.dim() != n {
                    report.push(
                        format!("{path}.travel_times"),
                        "dimension does not match node count",
                    );
                }
            }
            if s.ambient_shift.len() != n
                || s.ambient_shift.iter().any(|r| r.len() != product_count)
            {
                report.push(
                    format!("{path}.ambient_shift"),
                    "shape must be [node][product]",
                );
            }
            for row in &s.ambient_shift {
                for &v in row {
                    max_tau = max_tau.max(v.abs());
                }
            }
        }
    }

    let a = &instance.adaptive_params;
    if !(0.0..=1.0).contains(&a.correction_factor) {
        report.push("adaptive_params.correction_factor", "must lie in [0, 1]");
    }
    if a.deviation_penalty < 0.0 {
        report.push("adaptive_params.deviation_penalty", "must be non-negative");
    }
    if a.slack_penalty < 0.0 {
        report.push("adaptive_params.slack_penalty", "must be non-negative");
    }
    let widest = instance
        .products
        .iter()
        .map(|p| p.max_temperature - p.min_temperature)
        .fold(0.0, f64::max);
    if !(a.big_m > widest + max_tau) {
        report.push(
            "adaptive_params.big_m",
            format!(
                "must exceed widest temperature band plus largest |tau| ({})",
                widest + max_tau
            ),
        );
    }
    report
}

fn check_box(report: &mut ValidationReport, b: &UncertaintyBounds, net: &Network) {
    let n = net.node_count;
    if b.travel_time_min.dim() != n || b.travel_time_max.dim() != n {
        report.push("bounds.travel_time", "dimension does not match node count");
        return;
    }
    for i in 0..n {
        for j in 0..n {
            let (lo, nom, hi) = (
                b.travel_time_min[(i, j)],
                net.travel_time[(i, j)],
                b.travel_time_max[(i, j)],
            );
            if lo > nom {
                report.push(
                    format!("bounds.travel_time_min[{i}][{j}]"),
                    format!("arc ({i},{j}): min {lo} exceeds nominal {nom}"),
                );
            }
            if hi < nom {
                report.push(
                    format!("bounds.travel_time_max[{i}][{j}]"),
                    format!("arc ({i},{j}): max {hi} below nominal {nom}"),
                );
            }
        }
    }
    if b.delay_min.len() != n || b.delay_max.len() != n {
        report.push("bounds.delay", "length does not match node count");
        return;
    }
    for i in 0..n {
        if b.delay_min[i] > net.delay[i] {
            report.push(format!("bounds.delay_min[{i}]"), "exceeds nominal delay");
        }
        if b.delay_max[i] < net.delay[i] {
            report.push(format!("bounds.delay_max[{i}]"), "below nominal delay");
        }
    }
}

fn check_moments(report: &mut ValidationReport, m: &MomentInfo, n: usize) {
    if m.travel_mean.dim() != n || m.travel_variance.dim() != n {
        report.push("moments.travel", "dimension does not match node count");
    }
    if m.delay_mean.len() != n || m.delay_variance.len() != n {
        report.push("moments.delay", "length does not match node count");
    }
    if m.travel_variance.iter().any(|(_, _, v)| v < 0.0)
        || m.delay_variance.iter().any(|&v| v < 0.0)
    {
        report.push("moments", "variances must be non-negative");
    }
    if m.risk_aversion < 0.0 {
        report.push("moments.risk_aversion", "must be non-negative");
    }
}
