//! Benchmark tables: every model on every dataset, training and testing
//! splits.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{evaluate, EvalReport, EvalSplit};
use crate::aircraft::AircraftKind;
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::sample::{split_indices, Dataset, SplitSpec};
use crate::{par, rng};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkDataset {
    pub name: String,
    pub data: Dataset,
}

/// `per_set` random samples from each aircraft present, plus a combined
/// set of `per_set` samples with an equal share per aircraft.
pub fn benchmark_datasets(data: &Dataset, per_set: usize, seed: u64) -> Result<Vec<BenchmarkDataset>> {
    let kinds: Vec<AircraftKind> = AircraftKind::KNOWN
        .iter()
        .copied()
        .filter(|k| data.aircraft.contains(k))
        .collect();
    if kinds.is_empty() {
        return Err(Error::Empty("aircraft in dataset"));
    }
    let share = per_set / kinds.len();
    let mut out = Vec::new();
    let mut combined = Vec::new();
    for (ki, &k) in kinds.iter().enumerate() {
        let rows: Vec<usize> = (0..data.len()).filter(|&i| data.aircraft[i] == k).collect();
        if rows.len() < per_set {
            return Err(Error::InsufficientData {
                needed: per_set,
                have: rows.len(),
            });
        }
        let mut r = rng::rng_from_seed(rng::derive_seed(seed, &[0xBE4C, ki as u64]));
        let pick: Vec<usize> = rng::sample_indices(&mut r, rows.len(), per_set).into_iter().map(|j| rows[j]).collect();
        let mut r2 = rng::rng_from_seed(rng::derive_seed(seed, &[0xC0B1, ki as u64]));
        combined.extend(rng::sample_indices(&mut r2, rows.len(), share).into_iter().map(|j| rows[j]));
        out.push(BenchmarkDataset {
            name: String::from(k.display_name()),
            data: data.select(&pick),
        });
    }
    combined.sort_unstable();
    out.push(BenchmarkDataset {
        name: String::from("Combined"),
        data: data.select(&combined),
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    pub reports: Vec<EvalReport>,
}

impl BenchmarkTable {
    pub fn get(&self, model: &str, dataset: &str, split: EvalSplit) -> Option<&EvalReport> {
        self.reports
            .iter()
            .find(|r| r.model_id == model && r.dataset_id == dataset && r.split == split)
    }
}

/// Splits each dataset with `split`, fits each model on the training part
/// and reports both parts. Model names must be unique.
pub fn benchmark_table(
    models: &[(String, ModelSpec)],
    datasets: &[BenchmarkDataset],
    split: &SplitSpec,
) -> Result<BenchmarkTable> {
    for (i, (a, _)) in models.iter().enumerate() {
        if models[..i].iter().any(|(b, _)| b == a) {
            return Err(Error::InvalidParameter(format!("duplicate model name `{a}`")));
        }
    }
    let parts: Vec<(Dataset, Dataset)> = datasets
        .iter()
        .map(|d| {
            let s = split_indices(&d.data.flight_ids, split)?;
            Ok((d.data.select(&s.train), d.data.select(&s.test)))
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..models.len()).map(move |m| (d, m)))
        .collect();
    let rows = par::map(jobs, |(d, m)| -> Result<[EvalReport; 2]> {
        let (name, spec) = &models[m];
        let (train, test) = &parts[d];
        let model = spec.fit(train.x.as_matrix(), train.y.as_slice())?;
        let ds = &datasets[d].name;
        Ok([
            evaluate(&model, train, name, ds, EvalSplit::Training)?,
            evaluate(&model, test, name, ds, EvalSplit::Testing)?,
        ])
    });
    let mut reports = Vec::with_capacity(rows.len() * 2);
    for r in rows {
        reports.extend(r?);
    }
    Ok(BenchmarkTable { reports })
}
