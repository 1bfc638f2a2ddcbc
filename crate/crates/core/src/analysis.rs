//! Residual distribution, per-flight accumulated energy error and
//! prediction traces for held-out flights.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::{mean_std, EvalReport, EvalSplit};
use crate::learners::Predictor;
use crate::sample::Dataset;

pub const DEFAULT_HISTOGRAM_BINS: usize = 50;
/// Reference battery capacity in J (129.96 Wh).
pub const REFERENCE_CAPACITY_J: f64 = 467_856.0;
pub const DEFAULT_ENERGY_BOUND_J: f64 = 2000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins over `[min, max]`; the last bin is closed.
    pub fn build(values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0; bins];
        if values.is_empty() {
            return Self {
                min: 0.0,
                max: 0.0,
                counts,
            };
        }
        let width = (max - min) / bins as f64;
        for &v in values {
            let b = if width > 0.0 {
                (((v - min) / width) as usize).min(bins - 1)
            } else {
                0
            };
            counts[b] += 1;
        }
        Self { min, max, counts }
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        (0..=n)
            .map(|i| self.min + (self.max - self.min) * i as f64 / n as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDistribution {
    /// `y - yhat` per sample, in W.
    pub errors: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub within_1_sigma: f64,
    pub within_2_sigma: f64,
    pub histogram: Histogram,
}

/// Fraction of values with `|v - center| <= k * sigma`.
pub fn coverage(values: &[f64], center: f64, sigma: f64, k: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let bound = k * sigma;
    values.iter().filter(|v| (*v - center).abs() <= bound).count() as f64 / values.len() as f64
}

/// Residual statistics. Coverage intervals are centred on the mean
/// residual; with zero spread both fractions are 1.
pub fn error_distribution(y: &[f64], yhat: &[f64], bins: usize) -> Result<ErrorDistribution> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: yhat.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, have: y.len() });
    }
    let errors: Vec<f64> = y.iter().zip(yhat).map(|(a, b)| a - b).collect();
    let (mean, std) = mean_std(&errors);
    let (w1, w2) = if std == 0.0 {
        (1.0, 1.0)
    } else {
        (coverage(&errors, mean, std, 1.0), coverage(&errors, mean, std, 2.0))
    };
    let histogram = Histogram::build(&errors, bins);
    Ok(ErrorDistribution {
        errors,
        mean,
        std,
        within_1_sigma: w1,
        within_2_sigma: w2,
        histogram,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyConfig {
    pub capacity_j: f64,
    pub bound_j: f64,
    pub dt_s: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            capacity_j: REFERENCE_CAPACITY_J,
            bound_j: DEFAULT_ENERGY_BOUND_J,
            dt_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightEnergyError {
    pub flight_id: String,
    pub samples: usize,
    pub predicted_j: f64,
    pub measured_j: f64,
    /// `sum(yhat - y) * dt`.
    pub error_j: f64,
    pub capacity_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    pub config: EnergyConfig,
    pub flights: Vec<FlightEnergyError>,
    /// Fraction of flights with `|error| <= bound`.
    pub within_bound: f64,
    /// Flights with no samples.
    pub skipped: Vec<String>,
}

/// Energy error of one flight from its instantaneous errors.
pub fn energy_error(flight_id: &str, y: &[f64], yhat: &[f64], cfg: &EnergyConfig) -> Result<FlightEnergyError> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: yhat.len(),
        });
    }
    let mut err = 0.0;
    let mut pred = 0.0;
    let mut meas = 0.0;
    for (a, b) in y.iter().zip(yhat) {
        err += b - a;
        pred += b;
        meas += a;
    }
    let error_j = err * cfg.dt_s;
    Ok(FlightEnergyError {
        flight_id: flight_id.into(),
        samples: y.len(),
        predicted_j: pred * cfg.dt_s,
        measured_j: meas * cfg.dt_s,
        error_j,
        capacity_fraction: error_j / cfg.capacity_j,
    })
}

/// Per-flight energy errors of `model` over every flight in `data`.
pub fn flight_energy_errors<P: Predictor + ?Sized>(
    model: &P,
    data: &Dataset,
    extra_empty: &[String],
    cfg: &EnergyConfig,
) -> Result<EnergySummary> {
    let mut flights = Vec::new();
    for (id, rows) in data.flight_groups() {
        let sub = data.select(&rows);
        let yhat = model.predict(sub.x.as_matrix())?;
        flights.push(energy_error(&id, sub.y.as_slice(), &yhat, cfg)?);
    }
    let within = if flights.is_empty() {
        0.0
    } else {
        flights.iter().filter(|f| f.error_j.abs() <= cfg.bound_j).count() as f64 / flights.len() as f64
    };
    Ok(EnergySummary {
        config: *cfg,
        flights,
        within_bound: within,
        skipped: extra_empty.to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceComparison {
    pub flight_id: String,
    pub t: Vec<f64>,
    pub truth: Vec<f64>,
    pub prediction: Vec<f64>,
    pub report: EvalReport,
}

/// Ground truth and prediction for one held-out flight.
pub fn trace_comparison<P: Predictor + ?Sized>(
    model: &P,
    model_id: &str,
    data: &Dataset,
    flight_id: &str,
    training_flights: &BTreeSet<String>,
) -> Result<TraceComparison> {
    if training_flights.contains(flight_id) {
        return Err(Error::FlightSeenInTraining(flight_id.into()));
    }
    let rows: Vec<usize> = (0..data.len()).filter(|&i| data.flight_ids[i] == flight_id).collect();
    if rows.is_empty() {
        return Err(Error::Empty("flight samples"));
    }
    let sub = data.select(&rows);
    let prediction = model.predict(sub.x.as_matrix())?;
    let truth = sub.y.as_slice().to_vec();
    let report = EvalReport::from_predictions(model_id, flight_id, EvalSplit::Testing, &truth, &prediction)?;
    Ok(TraceComparison {
        flight_id: flight_id.into(),
        t: sub.t,
        truth,
        prediction,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_degenerate() {
        let y = [1.0, 2.0, 3.0];
        let d = error_distribution(&y, &y, 10).unwrap();
        assert_eq!((d.std, d.within_1_sigma, d.within_2_sigma), (0.0, 1.0, 1.0));
        assert_eq!(d.histogram.counts.iter().sum::<usize>(), 3);
        assert!(error_distribution(&[1.0], &[1.0], 10).is_err());
    }

    #[test]
    fn energy_examples() {
        let cfg = EnergyConfig::default();
        let y = vec![100.0; 60];
        assert_eq!(energy_error("a", &y, &y, &cfg).unwrap().error_j, 0.0);
        let y = vec![100.0; 100];
        let p = vec![110.0; 100];
        let e = energy_error("b", &y, &p, &cfg).unwrap();
        assert_eq!(e.error_j, 1000.0);
        assert!((e.capacity_fraction - 1000.0 / 467_856.0).abs() < 1e-18);
    }

    #[test]
    fn histogram_counts_sum() {
        let v: Vec<f64> = (0..97).map(|i| (i as f64 * 0.77).sin()).collect();
        let h = Histogram::build(&v, 7);
        assert_eq!(h.counts.iter().sum::<usize>(), 97);
        assert_eq!(h.edges().len(), 8);
    }
}
