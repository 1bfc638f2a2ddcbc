//! Flight samples, the model-ready feature/target pair, dataset splits and
//! the regularized squared-error loss.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::aircraft::AircraftKind;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

pub const N_FEATURES: usize = 15;

/// Feature column order of every feature matrix.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "mass", "v_n", "v_e", "v_d", "a_n", "a_e", "a_d", "roll", "pitch", "yaw", "roll_rate", "pitch_rate", "yaw_rate",
    "w_n", "w_e",
];

/// One time-aligned record. Vectors are earth-fixed NED (down positive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightSample {
    /// Seconds since flight start.
    pub t: f64,
    /// Take-off mass in kg.
    pub mass: f64,
    pub v: [f64; 3],
    pub a: [f64; 3],
    /// Roll, pitch, yaw in rad.
    pub euler: [f64; 3],
    /// Roll, pitch, yaw rates in rad/s.
    pub euler_rate: [f64; 3],
    /// Horizontal wind (north, east) in m/s.
    pub wind: [f64; 2],
    /// Electrical power in W.
    pub power: f64,
    pub flight_id: String,
    pub aircraft: AircraftKind,
}

impl FlightSample {
    pub fn features(&self) -> [f64; N_FEATURES] {
        [
            self.mass,
            self.v[0],
            self.v[1],
            self.v[2],
            self.a[0],
            self.a[1],
            self.a[2],
            self.euler[0],
            self.euler[1],
            self.euler[2],
            self.euler_rate[0],
            self.euler_rate[1],
            self.euler_rate[2],
            self.wind[0],
            self.wind[1],
        ]
    }

    pub fn from_features(
        t: f64,
        f: &[f64],
        power: f64,
        flight_id: impl Into<String>,
        aircraft: AircraftKind,
    ) -> Result<Self> {
        if f.len() != N_FEATURES {
            return Err(Error::ColumnMismatch {
                expected: N_FEATURES,
                got: f.len(),
            });
        }
        Ok(Self {
            t,
            mass: f[0],
            v: [f[1], f[2], f[3]],
            a: [f[4], f[5], f[6]],
            euler: [f[7], f[8], f[9]],
            euler_rate: [f[10], f[11], f[12]],
            wind: [f[13], f[14]],
            power,
            flight_id: flight_id.into(),
            aircraft,
        })
    }

    /// First non-finite field name, if any.
    pub fn non_finite_field(&self) -> Option<&'static str> {
        if !self.t.is_finite() {
            return Some("t");
        }
        if let Some(j) = self.features().iter().position(|v| !v.is_finite()) {
            return Some(FEATURE_NAMES[j]);
        }
        if !self.power.is_finite() {
            return Some("power");
        }
        None
    }
}

/// An `m x 15` matrix in [`FEATURE_NAMES`] order with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct FeatureMatrix(Matrix);

impl FeatureMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.cols() != N_FEATURES {
            return Err(Error::ColumnMismatch {
                expected: N_FEATURES,
                got: m.cols(),
            });
        }
        if let Some(k) = m.as_slice().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: k / N_FEATURES,
                field: FEATURE_NAMES[k % N_FEATURES],
            });
        }
        Ok(Self(m))
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self(self.0.select_rows(idx))
    }
}

impl TryFrom<Matrix> for FeatureMatrix {
    type Error = Error;
    fn try_from(m: Matrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<FeatureMatrix> for Matrix {
    fn from(f: FeatureMatrix) -> Matrix {
        f.0
    }
}

/// Measured power per row, in W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetVector(Vec<f64>);

impl TargetVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: i,
                field: "power",
            });
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Features, targets and per-row bookkeeping (flight, aircraft, time).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: FeatureMatrix,
    pub y: TargetVector,
    pub flight_ids: Vec<String>,
    pub aircraft: Vec<AircraftKind>,
    pub t: Vec<f64>,
}

impl Dataset {
    pub fn from_samples(samples: &[FlightSample]) -> Result<Self> {
        let (x, y) = crate::preprocess::to_feature_matrix(samples)?;
        Ok(Self {
            x,
            y,
            flight_ids: samples.iter().map(|s| s.flight_id.clone()).collect(),
            aircraft: samples.iter().map(|s| s.aircraft).collect(),
            t: samples.iter().map(|s| s.t).collect(),
        })
    }

    pub fn to_samples(&self) -> Vec<FlightSample> {
        (0..self.len())
            .map(|i| {
                FlightSample::from_features(
                    self.t[i],
                    self.x.as_matrix().row(i),
                    self.y.as_slice()[i],
                    self.flight_ids[i].clone(),
                    self.aircraft[i],
                )
                .expect("feature rows have 15 columns")
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(idx),
            y: TargetVector(idx.iter().map(|&i| self.y.0[i]).collect()),
            flight_ids: idx.iter().map(|&i| self.flight_ids[i].clone()).collect(),
            aircraft: idx.iter().map(|&i| self.aircraft[i]).collect(),
            t: idx.iter().map(|&i| self.t[i]).collect(),
        }
    }

    /// Row indices grouped by flight, in order of first appearance.
    pub fn flight_groups(&self) -> Vec<(String, Vec<usize>)> {
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        let mut index: alloc::collections::BTreeMap<&str, usize> = alloc::collections::BTreeMap::new();
        for (i, id) in self.flight_ids.iter().enumerate() {
            match index.get(id.as_str()) {
                Some(&g) => groups[g].1.push(i),
                None => {
                    index.insert(id.as_str(), groups.len());
                    groups.push((id.clone(), alloc::vec![i]));
                }
            }
        }
        groups
    }

    /// One sub-dataset per flight.
    pub fn flights(&self) -> Vec<(String, Dataset)> {
        self.flight_groups()
            .into_iter()
            .map(|(id, idx)| (id, self.select(&idx)))
            .collect()
    }

    pub fn flight_set(&self) -> BTreeSet<String> {
        self.flight_ids.iter().cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    RandomBySample,
    RandomByFlight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub mode: SplitMode,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.7,
            seed: 0,
            mode: SplitMode::RandomBySample,
        }
    }
}

/// Disjoint, exhaustive train/test row indices (each sorted ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits row indices. By-sample mode puts `round(fraction * m)` rows in
/// the training part (clamped so both parts are non-empty). By-flight mode
/// assigns `round(fraction * n_flights)` whole flights to training.
pub fn split_indices(flight_ids: &[String], spec: &SplitSpec) -> Result<SplitIndices> {
    let m = flight_ids.len();
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "train_fraction {} outside (0, 1)",
            spec.train_fraction
        )));
    }
    if m < 2 {
        return Err(Error::InsufficientData { needed: 2, have: m });
    }
    let mut rng = rng::rng_from_seed(rng::derive_seed(spec.seed, &[0x5917]));
    let mut is_train = alloc::vec![false; m];
    match spec.mode {
        SplitMode::RandomBySample => {
            let n_train = ((spec.train_fraction * m as f64).round() as usize).clamp(1, m - 1);
            let mut order: Vec<usize> = (0..m).collect();
            rng::shuffle(&mut rng, &mut order);
            for &i in &order[..n_train] {
                is_train[i] = true;
            }
        }
        SplitMode::RandomByFlight => {
            let mut ids: Vec<&String> = flight_ids.iter().collect::<BTreeSet<_>>().into_iter().collect();
            if ids.len() < 2 {
                return Err(Error::InsufficientData {
                    needed: 2,
                    have: ids.len(),
                });
            }
            let n_train = ((spec.train_fraction * ids.len() as f64).round() as usize).clamp(1, ids.len() - 1);
            rng::shuffle(&mut rng, &mut ids);
            let train_ids: BTreeSet<&String> = ids[..n_train].iter().copied().collect();
            for (i, id) in flight_ids.iter().enumerate() {
                is_train[i] = train_ids.contains(id);
            }
        }
    }
    let train = (0..m).filter(|&i| is_train[i]).collect();
    let test = (0..m).filter(|&i| !is_train[i]).collect();
    Ok(SplitIndices { train, test })
}

pub fn split(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(&data.flight_ids, spec)?;
    Ok((data.select(&idx.train), data.select(&idx.test)))
}

/// L1 (`alpha`) and L2 (`lambda`) penalty weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub alpha: f64,
    pub lambda: f64,
}

impl LossConfig {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha >= 0.0 && lambda >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "loss weights must be non-negative (alpha {alpha}, lambda {lambda})"
            )));
        }
        Ok(Self { alpha, lambda })
    }
}

/// Mean squared error plus `alpha * |theta|_1 + lambda/2 * |theta|_2^2`.
pub fn total_loss(y: &[f64], yhat: &[f64], theta: &[f64], cfg: &LossConfig) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::Empty("targets"));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("non-finite parameter vector".into()));
    }
    let mut sse = 0.0;
    for (a, b) in y.iter().zip(yhat) {
        let d = a - b;
        sse += d * d;
    }
    let data_term = sse / y.len() as f64;
    let l1: f64 = theta.iter().map(|t| t.abs()).sum();
    let l2: f64 = theta.iter().map(|t| t * t).sum();
    Ok(data_term + cfg.alpha * l1 + 0.5 * cfg.lambda * l2)
}
