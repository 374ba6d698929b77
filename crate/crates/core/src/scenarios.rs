//! Seeded generation of disruption scenarios and synthetic instances.
//!
//! Every random quantity is drawn from its own ChaCha8 stream whose seed is a
//! splitmix64 fold of `(seed, purpose, ids...)`. A draw therefore depends
//! only on its own coordinates: adding products, stops or scenarios never
//! perturbs existing values, and batches can be generated in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    Instance, InstanceMeta, MomentInfo, Network, ProductSpec, Scenario, SquareMatrix,
    UncertaintyBounds,
};
use crate::kinetics::Q10Params;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid generator setting: {0}")]
    InvalidConfig(String),
}

const TAG_DELAY: u64 = 1;
const TAG_AMBIENT: u64 = 2;
const TAG_STOP: u64 = 3;
const TAG_PRODUCT: u64 = 4;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent generator for one coordinate tuple.
pub fn substream(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    let key = parts
        .iter()
        .fold(splitmix64(seed), |h, &p| splitmix64(h ^ p));
    ChaCha8Rng::seed_from_u64(key)
}

/// Disruption model for scenario batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioGenConfig {
    /// Chance `p_d` that a stop suffers an extra delay.
    pub delay_probability: f64,
    /// Mean `mu_d` of the delay magnitude before truncation at zero, hours.
    pub delay_mean: f64,
    /// Standard deviation `sigma_d` of the delay magnitude, hours.
    pub delay_std: f64,
    /// Standard deviation `sigma_tau` of ambient shifts, Celsius.
    pub ambient_std: f64,
    pub scenario_count: usize,
    pub seed: u64,
}

impl Default for ScenarioGenConfig {
    fn default() -> Self {
        Self {
            delay_probability: 0.2,
            delay_mean: 0.5,
            delay_std: 0.2,
            ambient_std: 1.0,
            scenario_count: 50,
            seed: 0,
        }
    }
}

impl ScenarioGenConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(0.0..=1.0).contains(&self.delay_probability) {
            return Err(ScenarioError::InvalidConfig(format!(
                "delay_probability {} outside [0, 1]",
                self.delay_probability
            )));
        }
        if !self.delay_mean.is_finite() {
            return Err(ScenarioError::InvalidConfig(
                "delay_mean must be finite".into(),
            ));
        }
        if !(self.delay_std >= 0.0 && self.delay_std.is_finite()) {
            return Err(ScenarioError::InvalidConfig(format!(
                "delay_std {} must be >= 0",
                self.delay_std
            )));
        }
        if !(self.ambient_std >= 0.0 && self.ambient_std.is_finite()) {
            return Err(ScenarioError::InvalidConfig(format!(
                "ambient_std {} must be >= 0",
                self.ambient_std
            )));
        }
        if self.scenario_count == 0 {
            return Err(ScenarioError::InvalidConfig(
                "scenario_count must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Extra delay at `stop` in scenario `id`: Bernoulli occurrence, then
/// `max(0, N(mu_d, sigma_d^2))` with the negative mass placed at zero.
pub fn sample_extra_delay(config: &ScenarioGenConfig, id: u32, stop: usize) -> f64 {
    let mut rng = substream(config.seed, &[TAG_DELAY, id as u64, stop as u64]);
    let u: f64 = rng.random();
    let z: f64 = rng.sample(StandardNormal);
    if u < config.delay_probability {
        (config.delay_mean + config.delay_std * z).max(0.0)
    } else {
        0.0
    }
}

/// Ambient shift for `(stop, product)` in scenario `id`. The underlying
/// standard normal does not depend on `sigma_tau`, so batches that differ
/// only in `ambient_std` share random numbers.
pub fn sample_ambient_shift(
    config: &ScenarioGenConfig,
    id: u32,
    stop: usize,
    product: usize,
) -> f64 {
    let mut rng = substream(
        config.seed,
        &[TAG_AMBIENT, id as u64, stop as u64, product as u64],
    );
    let z: f64 = rng.sample(StandardNormal);
    config.ambient_std * z + 0.0
}

/// Equal probabilities whose running sum is exactly one.
pub fn uniform_probabilities(count: usize) -> Vec<f64> {
    if count == 0 {
        return Vec::new();
    }
    let p = 1.0 / count as f64;
    let mut probs = vec![p; count];
    let head: f64 = probs[..count - 1].iter().sum();
    probs[count - 1] = 1.0 - head;
    probs
}

/// Scenario batch for a network of `node_count` nodes carrying
/// `product_count` products. The warehouse (node 0) is never disturbed.
pub fn generate_scenarios_for(
    config: &ScenarioGenConfig,
    node_count: usize,
    product_count: usize,
) -> Result<Vec<Scenario>, ScenarioError> {
    config.validate()?;
    let probs = uniform_probabilities(config.scenario_count);
    Ok(probs
        .into_iter()
        .enumerate()
        .map(|(s, probability)| {
            let id = s as u32;
            let mut scenario = Scenario::nominal(id, probability, node_count, product_count);
            for stop in 1..node_count {
                scenario.extra_delays[stop] = sample_extra_delay(config, id, stop);
                for k in 0..product_count {
                    scenario.ambient_shift[stop][k] = sample_ambient_shift(config, id, stop, k);
                }
            }
            scenario
        })
        .collect())
}

pub fn generate_scenarios(
    config: &ScenarioGenConfig,
    instance: &Instance,
) -> Result<Vec<Scenario>, ScenarioError> {
    generate_scenarios_for(config, instance.node_count(), instance.products.len())
}

/// Synthetic instance layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub stop_count: usize,
    /// Range of warehouse-to-stop distances, km.
    pub distance_min: f64,
    pub distance_max: f64,
    /// km/h.
    pub vehicle_speed: f64,
    /// Range of nominal service delays at stops, hours.
    pub delay_min: f64,
    pub delay_max: f64,
    /// `alpha`: each product's initial shelf life is scaled by `1 + eps`,
    /// `eps ~ U(-alpha, alpha)`.
    pub shelf_perturbation: f64,
    pub product_catalog: Vec<ProductSpec>,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            stop_count: 10,
            distance_min: 15.0,
            distance_max: 60.0,
            vehicle_speed: 40.0,
            delay_min: 0.0,
            delay_max: 0.3,
            shelf_perturbation: 0.1,
            product_catalog: default_catalog(),
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::InvalidConfig(m));
        if self.stop_count == 0 {
            return bad("stop_count must be >= 1".into());
        }
        if !(self.distance_min > 0.0
            && self.distance_min <= self.distance_max
            && self.distance_max.is_finite())
        {
            return bad(format!(
                "need 0 < distance_min <= distance_max, got [{}, {}]",
                self.distance_min, self.distance_max
            ));
        }
        if !(self.vehicle_speed > 0.0 && self.vehicle_speed.is_finite()) {
            return bad(format!(
                "vehicle_speed {} must be positive",
                self.vehicle_speed
            ));
        }
        if !(self.delay_min >= 0.0
            && self.delay_min <= self.delay_max
            && self.delay_max.is_finite())
        {
            return bad(format!(
                "need 0 <= delay_min <= delay_max, got [{}, {}]",
                self.delay_min, self.delay_max
            ));
        }
        if !(0.0..1.0).contains(&self.shelf_perturbation) {
            return bad(format!(
                "shelf_perturbation {} outside [0, 1)",
                self.shelf_perturbation
            ));
        }
        if self.product_catalog.is_empty() {
            return bad("product_catalog is empty".into());
        }
        Ok(())
    }
}

/// Random geometric network and perturbed product catalog.
///
/// Stop `i` sits at distance `d_0i ~ U(d_min, d_max)` from the warehouse in
/// a uniformly random direction; stop-to-stop distances are Euclidean (at
/// least 1 m), so the metric satisfies the triangle inequality.
pub fn generate_instance(config: &SyntheticConfig) -> Result<Instance, ScenarioError> {
    config.validate()?;
    let n = config.stop_count + 1;
    let mut radius = vec![0.0; n];
    let mut position = vec![(0.0, 0.0); n];
    let mut delay = vec![0.0; n];
    for i in 1..n {
        let mut rng = substream(config.seed, &[TAG_STOP, i as u64]);
        let r = rng.random_range(config.distance_min..=config.distance_max);
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        radius[i] = r;
        position[i] = (r * phi.cos(), r * phi.sin());
        delay[i] = rng.random_range(config.delay_min..=config.delay_max);
    }
    let distance = SquareMatrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else if i == 0 {
            radius[j]
        } else if j == 0 {
            radius[i]
        } else {
            let (dx, dy) = (position[i].0 - position[j].0, position[i].1 - position[j].1);
            dx.hypot(dy).max(1e-3)
        }
    });
    let travel = distance.map(|d| d / config.vehicle_speed);
    let mut network = Network::new(travel, delay);
    network.distance = Some(distance);

    let alpha = config.shelf_perturbation;
    let products = config
        .product_catalog
        .iter()
        .enumerate()
        .map(|(k, template)| {
            let mut rng = substream(config.seed, &[TAG_PRODUCT, k as u64]);
            let eps = rng.random_range(-alpha..=alpha);
            let mut p = template.clone();
            if alpha > 0.0 {
                p.initial_shelf_life = template.initial_shelf_life * (1.0 + eps);
            }
            p
        })
        .collect();

    let mut instance = Instance::new(network, products);
    instance.meta = Some(InstanceMeta {
        seed: Some(config.seed),
        generator: Some("synthetic".into()),
    });
    Ok(instance)
}

/// How the uncertainty blocks of a generated instance are derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UncertaintyConfig {
    /// Relative half-width `rho` of the travel-time box:
    /// `T in [t (1 - rho), t (1 + rho)]`.
    pub travel_spread: f64,
    /// DRO risk-aversion `z`.
    pub risk_aversion: f64,
    pub scenarios: ScenarioGenConfig,
}

impl Default for UncertaintyConfig {
    fn default() -> Self {
        Self {
            travel_spread: 0.5,
            risk_aversion: 1.0,
            scenarios: ScenarioGenConfig::default(),
        }
    }
}

/// Draws a scenario batch and derives a consistent box and moment set from
/// it:
///
/// * box: travel times `t (1 -/+ rho)`; delays from nominal up to nominal
///   plus the larger of `mu_d + 3 sigma_d` (when delays can occur) and the
///   largest sampled extra delay;
/// * moments: delay mean/variance are the scenario-weighted moments of the
///   realized delay; travel mean is nominal with the variance of
///   `U[t (1 - rho), t (1 + rho)]`, i.e. `rho^2 t^2 / 3`.
pub fn attach_uncertainty(
    instance: &mut Instance,
    config: &UncertaintyConfig,
) -> Result<(), ScenarioError> {
    let rho = config.travel_spread;
    if !(0.0..=1.0).contains(&rho) {
        return Err(ScenarioError::InvalidConfig(format!(
            "travel_spread {rho} outside [0, 1]"
        )));
    }
    if !(config.risk_aversion >= 0.0 && config.risk_aversion.is_finite()) {
        return Err(ScenarioError::InvalidConfig(format!(
            "risk_aversion {} must be >= 0",
            config.risk_aversion
        )));
    }
    let scenarios = generate_scenarios(&config.scenarios, instance)?;
    let net = &instance.network;
    let n = net.node_count;
    let sc = &config.scenarios;
    let tail = if sc.delay_probability > 0.0 {
        (sc.delay_mean + 3.0 * sc.delay_std).max(0.0)
    } else {
        0.0
    };

    let mut delay_max = net.delay.clone();
    let mut delay_mean = net.delay.clone();
    let mut delay_variance = vec![0.0; n];
    for i in 1..n {
        let extras: Vec<(f64, f64)> = scenarios
            .iter()
            .map(|s| (s.probability, s.extra_delays[i]))
            .collect();
        let largest = extras.iter().map(|&(_, e)| e).fold(0.0, f64::max);
        delay_max[i] += tail.max(largest);
        let mean: f64 = extras.iter().map(|&(p, e)| p * e).sum();
        delay_mean[i] += mean;
        delay_variance[i] = extras.iter().map(|&(p, e)| p * (e - mean).powi(2)).sum();
    }

    instance.bounds = Some(UncertaintyBounds {
        travel_time_min: net.travel_time.map(|t| t * (1.0 - rho)),
        travel_time_max: net.travel_time.map(|t| t * (1.0 + rho)),
        delay_min: net.delay.clone(),
        delay_max,
    });
    instance.moments = Some(MomentInfo {
        travel_mean: net.travel_time.clone(),
        travel_variance: net.travel_time.map(|t| rho * rho * t * t / 3.0),
        delay_mean,
        delay_variance,
        risk_aversion: config.risk_aversion,
        scale_by_demand: false,
    });
    instance.scenarios = Some(scenarios);
    Ok(())
}

/// Synthetic instance with every uncertainty block attached.
pub fn generate_full_instance(
    synthetic: &SyntheticConfig,
    uncertainty: &UncertaintyConfig,
) -> Result<Instance, ScenarioError> {
    let mut instance = generate_instance(synthetic)?;
    attach_uncertainty(&mut instance, uncertainty)?;
    Ok(instance)
}

fn catalog_entry(
    id: &str,
    name: &str,
    ideal: f64,
    band: (f64, f64),
    life: f64,
    required: f64,
    q10: f64,
) -> ProductSpec {
    ProductSpec {
        id: id.into(),
        name: name.into(),
        ideal_temperature: ideal,
        min_temperature: band.0,
        max_temperature: band.1,
        initial_shelf_life: life,
        required_shelf_life: required,
        demand: 1.0,
        q10: Q10Params { q10 },
    }
}

/// Apples, bananas, tomatoes and strawberries. Shelf lives are hours at the
/// ideal temperature. Apple is 30 days at 5 °C with Q10 = 2; the other three
/// entries are this crate's defaults.
pub fn default_catalog() -> Vec<ProductSpec> {
    vec![
        catalog_entry("apple", "Apples", 5.0, (2.0, 8.0), 720.0, 168.0, 2.0),
        catalog_entry("banana", "Bananas", 13.5, (12.0, 15.0), 168.0, 48.0, 2.5),
        catalog_entry("tomato", "Tomatoes", 12.0, (10.0, 14.0), 336.0, 72.0, 2.2),
        catalog_entry(
            "strawberry",
            "Strawberries",
            1.0,
            (0.0, 4.0),
            120.0,
            36.0,
            3.0,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_instance;

    #[test]
    fn zero_delay_probability_gives_no_delays() {
        let cfg = ScenarioGenConfig {
            delay_probability: 0.0,
            ..Default::default()
        };
        for s in generate_scenarios_for(&cfg, 8, 2).unwrap() {
            assert!(s.extra_delays.iter().all(|&d| d == 0.0));
        }
    }

    #[test]
    fn zero_ambient_std_gives_zero_shifts() {
        let cfg = ScenarioGenConfig {
            ambient_std: 0.0,
            ..Default::default()
        };
        for s in generate_scenarios_for(&cfg, 8, 3).unwrap() {
            assert!(s
                .ambient_shift
                .iter()
                .flatten()
                .all(|&t| t == 0.0 && t.is_sign_positive()));
        }
    }

    #[test]
    fn probabilities_sum_to_one_exactly() {
        for count in 1..200 {
            let p = uniform_probabilities(count);
            assert_eq!(p.iter().sum::<f64>(), 1.0, "count {count}");
        }
    }

    #[test]
    fn adding_products_keeps_existing_draws() {
        let cfg = ScenarioGenConfig::default();
        let a = generate_scenarios_for(&cfg, 6, 2).unwrap();
        let b = generate_scenarios_for(&cfg, 6, 4).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.extra_delays, y.extra_delays);
            for (rx, ry) in x.ambient_shift.iter().zip(&y.ambient_shift) {
                assert_eq!(rx[..], ry[..2]);
            }
        }
    }

    #[test]
    fn no_perturbation_keeps_catalog_lives() {
        let cfg = SyntheticConfig {
            shelf_perturbation: 0.0,
            ..Default::default()
        };
        let inst = generate_instance(&cfg).unwrap();
        for (p, q) in inst.products.iter().zip(default_catalog()) {
            assert_eq!(p.initial_shelf_life, q.initial_shelf_life);
        }
    }

    #[test]
    fn fixed_radius_gives_unit_warehouse_legs() {
        let cfg = SyntheticConfig {
            distance_min: 40.0,
            distance_max: 40.0,
            ..Default::default()
        };
        let inst = generate_instance(&cfg).unwrap();
        for i in 1..inst.node_count() {
            assert_eq!(inst.network.travel_time[(0, i)], 1.0);
            assert_eq!(inst.network.travel_time[(i, 0)], 1.0);
        }
    }

    #[test]
    fn generated_instance_validates() {
        let inst =
            generate_full_instance(&SyntheticConfig::default(), &UncertaintyConfig::default())
                .unwrap();
        let report = validate_instance(&inst);
        assert!(report.is_empty(), "{report:?}");
        assert_eq!(inst.scenarios.as_ref().unwrap().len(), 50);
        assert_eq!(inst.products.len(), 4);
    }

    #[test]
    fn config_errors_are_reported() {
        let bad = ScenarioGenConfig {
            delay_probability: 1.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SyntheticConfig {
            distance_min: 70.0,
            ..Default::default()
        };
        assert!(generate_instance(&bad).is_err());
        let bad = SyntheticConfig {
            stop_count: 0,
            ..Default::default()
        };
        assert!(generate_instance(&bad).is_err());
    }
}
