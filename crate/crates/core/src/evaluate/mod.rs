//! Accuracy metrics, cross-validated grid search, the data-size
//! sensitivity study and benchmark tables.

pub mod benchmark;
pub mod grid;
pub mod sensitivity;

use alloc::string::String;
use serde::{Deserialize, Serialize};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::learners::Predictor;
use crate::sample::Dataset;

fn check(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: yhat.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::Empty("targets"));
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check(y, yhat)?;
    let mut sse = 0.0;
    for (a, b) in y.iter().zip(yhat) {
        let d = a - b;
        sse += d * d;
    }
    Ok(sse / y.len() as f64)
}

/// Mean absolute percentage error as a fraction.
pub fn mape(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check(y, yhat)?;
    if y.contains(&0.0) {
        return Err(Error::Undefined("MAPE with a zero target"));
    }
    let s: f64 = y.iter().zip(yhat).map(|(a, b)| ((a - b) / a).abs()).sum();
    Ok(s / y.len() as f64)
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check(y, yhat)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (a, b) in y.iter().zip(yhat) {
        ss_res += (a - b) * (a - b);
        ss_tot += (a - mean) * (a - mean);
    }
    if ss_tot == 0.0 {
        return Err(Error::Undefined("R2 of a constant target"));
    }
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalSplit {
    Training,
    Testing,
}

impl EvalSplit {
    pub fn tag(self) -> &'static str {
        match self {
            EvalSplit::Training => "training",
            EvalSplit::Testing => "testing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_id: String,
    pub dataset_id: String,
    pub split: EvalSplit,
    pub n: usize,
    pub mse: f64,
    pub mape: f64,
    pub r2: f64,
}

impl EvalReport {
    pub fn from_predictions(
        model_id: &str,
        dataset_id: &str,
        split: EvalSplit,
        y: &[f64],
        yhat: &[f64],
    ) -> Result<Self> {
        Ok(Self {
            model_id: model_id.into(),
            dataset_id: dataset_id.into(),
            split,
            n: y.len(),
            mse: mse(y, yhat)?,
            mape: mape(y, yhat)?,
            r2: r2(y, yhat)?,
        })
    }
}

pub fn evaluate<P: Predictor + ?Sized>(
    model: &P,
    data: &Dataset,
    model_id: &str,
    dataset_id: &str,
    split: EvalSplit,
) -> Result<EvalReport> {
    let yhat = model.predict(data.x.as_matrix())?;
    EvalReport::from_predictions(model_id, dataset_id, split, data.y.as_slice(), &yhat)
}

/// Population mean and standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{total_loss, LossConfig};

    #[test]
    fn hand_values() {
        let y = [100.0, 200.0];
        let p = [110.0, 180.0];
        assert_eq!(mse(&y, &p).unwrap(), 250.0);
        assert!((mape(&y, &p).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(mse(&y, &y).unwrap(), 0.0);
        assert_eq!(mape(&y, &y).unwrap(), 0.0);
        assert_eq!(r2(&y, &y).unwrap(), 1.0);
        assert_eq!(r2(&y, &[150.0, 150.0]).unwrap(), 0.0);
    }

    #[test]
    fn undefined_cases() {
        assert!(matches!(mape(&[0.0, 1.0], &[1.0, 1.0]), Err(Error::Undefined(_))));
        assert!(matches!(r2(&[3.0, 3.0], &[1.0, 1.0]), Err(Error::Undefined(_))));
        assert!(mse(&[], &[]).is_err());
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn total_loss_without_penalty_is_mse() {
        let y = [1.5, -2.0, 7.25, 3.0];
        let p = [1.0, -1.0, 6.0, 3.5];
        let l = total_loss(&y, &p, &[1.0, 2.0], &LossConfig::new(0.0, 0.0).unwrap()).unwrap();
        assert_eq!(l.to_bits(), mse(&y, &p).unwrap().to_bits());
    }
}
