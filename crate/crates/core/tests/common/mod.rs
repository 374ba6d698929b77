#![allow(dead_code)]

use freshroute::domain::{Instance, Network, ProductSpec, SquareMatrix};
use freshroute::kinetics::Q10Params;
use freshroute::scenarios::{generate_full_instance, SyntheticConfig, UncertaintyConfig};

/// Ten stops, four products, fifty scenarios, all seeded by `seed`.
pub fn reference_instance(seed: u64) -> Instance {
    let synthetic = SyntheticConfig {
        seed,
        ..Default::default()
    };
    let mut uncertainty = UncertaintyConfig::default();
    uncertainty.scenarios.seed = seed;
    generate_full_instance(&synthetic, &uncertainty).unwrap()
}

/// Same layout with `stops` stops.
pub fn small_instance(seed: u64, stops: usize) -> Instance {
    let synthetic = SyntheticConfig {
        seed,
        stop_count: stops,
        ..Default::default()
    };
    let mut uncertainty = UncertaintyConfig::default();
    uncertainty.scenarios.seed = seed;
    uncertainty.scenarios.scenario_count = 10;
    generate_full_instance(&synthetic, &uncertainty).unwrap()
}

/// A product held at 5 °C in [2, 8] with `window` hours of transit budget.
pub fn product(id: &str, window: f64) -> ProductSpec {
    ProductSpec {
        id: id.into(),
        name: id.into(),
        ideal_temperature: 5.0,
        min_temperature: 2.0,
        max_temperature: 8.0,
        initial_shelf_life: window + 24.0,
        required_shelf_life: 24.0,
        demand: 1.0,
        q10: Q10Params { q10: 2.0 },
    }
}

pub fn two_node(travel: f64, window: f64) -> Instance {
    let t = SquareMatrix::from_rows(vec![vec![0.0, travel], vec![travel, 0.0]]).unwrap();
    Instance::new(
        Network::new(t, vec![0.0, 0.0]),
        vec![product("apple", window)],
    )
}
