//! Temperature-dependent shelf-life kinetics.
//!
//! Two families are supported:
//!
//! - Arrhenius: `k = k0 * exp(-Ea / (R T))` for the degradation rate and
//!   `L(T) = L(T0) * exp[(Ea / R) (1/T - 1/T0)]` for shelf life. These take
//!   absolute temperature in Kelvin.
//! - Q10: `L(T) = L(T0) * Q10^((T0 - T) / 10)`. Only the temperature
//!   difference enters, so these take degrees Celsius.
//!
//! Conversions between the two scales are explicit ([`celsius_to_kelvin`]);
//! nothing in this module guesses the unit of a bare `f64`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Universal gas constant, J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314;

/// Offset between the Celsius and Kelvin scales.
pub const KELVIN_OFFSET: f64 = 273.15;

/// Typical Q10 range for fresh produce. Values outside are accepted but
/// reported by [`Q10Params::diagnostics`].
pub const TYPICAL_Q10_RANGE: (f64, f64) = (1.5, 3.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticsError {
    #[error("temperature must be positive in Kelvin, got {0} K")]
    NonPositiveTemperature(f64),
    #[error("invalid kinetic parameter: {0}")]
    InvalidParameter(String),
    #[error("temperature profile is empty")]
    EmptyProfile,
    #[error("profile times must be strictly increasing (sample {index}: {time} h)")]
    NonIncreasingTime { index: usize, time: f64 },
}

pub fn celsius_to_kelvin(celsius: f64) -> f64 {
    celsius + KELVIN_OFFSET
}

pub fn kelvin_to_celsius(kelvin: f64) -> f64 {
    kelvin - KELVIN_OFFSET
}

fn check_kelvin(temperature: f64) -> Result<(), KineticsError> {
    if temperature > 0.0 && temperature.is_finite() {
        Ok(())
    } else {
        Err(KineticsError::NonPositiveTemperature(temperature))
    }
}

/// Arrhenius rate parameters. The gas constant is fixed at [`GAS_CONSTANT`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrheniusParams {
    /// Pre-exponential factor `k0`, 1/hour.
    pub preexponential_factor: f64,
    /// Activation energy `Ea`, J/mol.
    pub activation_energy: f64,
}

impl ArrheniusParams {
    pub fn new(preexponential_factor: f64, activation_energy: f64) -> Result<Self, KineticsError> {
        if !(preexponential_factor > 0.0 && preexponential_factor.is_finite()) {
            return Err(KineticsError::InvalidParameter(format!(
                "pre-exponential factor must be positive, got {preexponential_factor}"
            )));
        }
        if !(activation_energy > 0.0 && activation_energy.is_finite()) {
            return Err(KineticsError::InvalidParameter(format!(
                "activation energy must be positive, got {activation_energy}"
            )));
        }
        Ok(Self {
            preexponential_factor,
            activation_energy,
        })
    }

    pub fn gas_constant(&self) -> f64 {
        GAS_CONSTANT
    }
}

/// Q10 temperature coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Q10Params {
    pub q10: f64,
}

impl Q10Params {
    pub fn new(q10: f64) -> Result<Self, KineticsError> {
        if !(q10 > 1.0 && q10.is_finite()) {
            return Err(KineticsError::InvalidParameter(format!(
                "Q10 must exceed 1, got {q10}"
            )));
        }
        Ok(Self { q10 })
    }

    /// Warnings for coefficients outside the typical produce range.
    pub fn diagnostics(&self) -> Vec<String> {
        let (lo, hi) = TYPICAL_Q10_RANGE;
        if self.q10 < lo || self.q10 > hi {
            vec![format!(
                "Q10 = {} is outside the typical range [{lo}, {hi}]",
                self.q10
            )]
        } else {
            Vec::new()
        }
    }
}

/// Known shelf life at a reference storage temperature.
///
/// The reference temperature is stored in Kelvin. Use
/// [`ShelfLifeRef::from_celsius`] at boundaries that speak Celsius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShelfLifeRef {
    pub reference_life: f64,
    pub reference_temperature: f64,
}

impl ShelfLifeRef {
    pub fn new(
        reference_life: f64,
        reference_temperature_kelvin: f64,
    ) -> Result<Self, KineticsError> {
        if !(reference_life > 0.0 && reference_life.is_finite()) {
            return Err(KineticsError::InvalidParameter(format!(
                "reference shelf life must be positive, got {reference_life}"
            )));
        }
        check_kelvin(reference_temperature_kelvin)?;
        Ok(Self {
            reference_life,
            reference_temperature: reference_temperature_kelvin,
        })
    }

    pub fn from_celsius(
        reference_life: f64,
        reference_celsius: f64,
    ) -> Result<Self, KineticsError> {
        Self::new(reference_life, celsius_to_kelvin(reference_celsius))
    }

    pub fn reference_celsius(&self) -> f64 {
        kelvin_to_celsius(self.reference_temperature)
    }
}

/// Degradation rate constant at `temperature` (Kelvin).
pub fn arrhenius_rate(params: &ArrheniusParams, temperature: f64) -> Result<f64, KineticsError> {
    check_kelvin(temperature)?;
    Ok(params.preexponential_factor
        * (-params.activation_energy / (GAS_CONSTANT * temperature)).exp())
}

/// Shelf life at `temperature` (Kelvin), same units as the reference life.
pub fn arrhenius_shelf_life(
    reference: &ShelfLifeRef,
    params: &ArrheniusParams,
    temperature: f64,
) -> Result<f64, KineticsError> {
    check_kelvin(temperature)?;
    let t0 = reference.reference_temperature;
    if temperature == t0 {
        return Ok(reference.reference_life);
    }
    let exponent = params.activation_energy / GAS_CONSTANT * (1.0 / temperature - 1.0 / t0);
    Ok(reference.reference_life * exponent.exp())
}

/// Shelf life at `temperature` (Celsius), same units as the reference life.
pub fn q10_shelf_life(reference: &ShelfLifeRef, params: &Q10Params, temperature: f64) -> f64 {
    // The difference is taken on the Kelvin scale the reference is stored in,
    // so a query at the reference temperature cancels exactly.
    let diff = reference.reference_temperature - celsius_to_kelvin(temperature);
    if diff == 0.0 {
        return reference.reference_life;
    }
    reference.reference_life * params.q10.powf(diff / 10.0)
}

/// Q10 law on plain Celsius numbers. Exact at `temperature == reference_celsius`.
pub fn q10_shelf_life_celsius(
    reference_life: f64,
    reference_celsius: f64,
    q10: f64,
    temperature: f64,
) -> f64 {
    let diff = reference_celsius - temperature;
    if diff == 0.0 {
        return reference_life;
    }
    reference_life * q10.powf(diff / 10.0)
}

/// Ordered `(hours, celsius)` samples from a logger or a simulated trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureProfile {
    samples: Vec<(f64, f64)>,
}

impl TemperatureProfile {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self, KineticsError> {
        if samples.is_empty() {
            return Err(KineticsError::EmptyProfile);
        }
        for (index, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(KineticsError::NonIncreasingTime {
                    index: index + 1,
                    time: w[1].0,
                });
            }
        }
        Ok(Self { samples })
    }

    pub fn constant(celsius: f64, duration_hours: f64) -> Result<Self, KineticsError> {
        Self::new(vec![(0.0, celsius), (duration_hours, celsius)])
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.0) - self.samples.first().map_or(0.0, |s| s.0)
    }

    /// Trapezoidal time-weighted mean temperature.
    pub fn mean_temperature(&self) -> f64 {
        time_weighted_mean(&self.samples)
    }
}

/// Trapezoidal time-weighted mean of `(time, value)` pairs.
///
/// Segments of zero length carry zero weight. A single sample, or a series
/// with no elapsed time, falls back to the arithmetic mean.
pub fn time_weighted_mean(samples: &[(f64, f64)]) -> f64 {
    match samples {
        [] => f64::NAN,
        [(_, v)] => *v,
        _ => {
            let mut area = 0.0;
            let mut span = 0.0;
            for w in samples.windows(2) {
                let dt = w[1].0 - w[0].0;
                area += dt * 0.5 * (w[0].1 + w[1].1);
                span += dt;
            }
            if span > 0.0 {
                area / span
            } else {
                samples.iter().map(|s| s.1).sum::<f64>() / samples.len() as f64
            }
        }
    }
}

/// Q10 shelf life evaluated at the profile's time-weighted mean temperature.
pub fn shelf_life_over_profile(
    reference: &ShelfLifeRef,
    params: &Q10Params,
    profile: &TemperatureProfile,
) -> Result<f64, KineticsError> {
    if profile.is_empty() {
        return Err(KineticsError::EmptyProfile);
    }
    Ok(q10_shelf_life(
        reference,
        params,
        profile.mean_temperature(),
    ))
}

/// Rate-integrated alternative to [`shelf_life_over_profile`].
///
/// Integrates the relative spoilage rate `Q10^((T - T0)/10)` over the profile
/// (trapezoid rule) and returns the shelf life that a constant temperature with
/// the same mean rate would give. Not used by the averaged-temperature
/// experiments.
pub fn shelf_life_rate_integrated(
    reference: &ShelfLifeRef,
    params: &Q10Params,
    profile: &TemperatureProfile,
) -> Result<f64, KineticsError> {
    if profile.is_empty() {
        return Err(KineticsError::EmptyProfile);
    }
    let t0 = reference.reference_celsius();
    let rates: Vec<(f64, f64)> = profile
        .samples()
        .iter()
        .map(|&(t, c)| (t, params.q10.powf((c - t0) / 10.0)))
        .collect();
    Ok(reference.reference_life / time_weighted_mean(&rates))
}
