//! K-fold cross-validated grid search.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{Hyperparameters, Predictor, RegressorConfig, Variant};
use crate::matrix::Matrix;
use crate::stacking::fold_assignment;
use crate::{par, rng};

pub const DEFAULT_CV_FOLDS: usize = 5;

/// Candidate values per hyperparameter; cells are their Cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum GridSpec {
    #[serde(rename = "EN")]
    ElasticNet { alpha: Vec<f64>, l1_ratio: Vec<f64> },
    #[serde(rename = "RF")]
    RandomForest {
        n_trees: Vec<usize>,
        max_depth: Vec<usize>,
        min_leaf: Vec<usize>,
    },
    #[serde(rename = "GBRT")]
    Gbrt {
        n_trees: Vec<usize>,
        max_depth: Vec<usize>,
        learning_rate: Vec<f64>,
        col_subsample: Vec<f64>,
    },
    #[serde(rename = "MLP")]
    Mlp {
        hidden_layers: Vec<usize>,
        neurons: Vec<usize>,
        batch_size: Vec<usize>,
    },
}

const TREES: [usize; 4] = [100, 300, 500, 1000];
const DEPTHS: [usize; 6] = [2, 3, 4, 5, 6, 7];

impl GridSpec {
    /// Log/linear covers of each tuning domain.
    pub fn default_for(variant: Variant) -> Self {
        match variant {
            Variant::ElasticNet => GridSpec::ElasticNet {
                alpha: vec![0.0, 0.25, 0.5, 0.75, 1.0],
                l1_ratio: vec![1e-3, 1e-2, 1e-1],
            },
            Variant::RandomForest => GridSpec::RandomForest {
                n_trees: TREES.to_vec(),
                max_depth: DEPTHS.to_vec(),
                min_leaf: vec![1, 2, 4, 8, 16, 32, 64],
            },
            Variant::Gbrt => GridSpec::Gbrt {
                n_trees: TREES.to_vec(),
                max_depth: DEPTHS.to_vec(),
                learning_rate: vec![0.1, 0.3, 0.5],
                col_subsample: vec![0.5, 0.8, 1.0],
            },
            Variant::Mlp => GridSpec::Mlp {
                hidden_layers: vec![1, 2, 3],
                neurons: vec![2, 8, 32, 128, 256],
                batch_size: vec![32, 64, 128],
            },
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            GridSpec::ElasticNet { .. } => Variant::ElasticNet,
            GridSpec::RandomForest { .. } => Variant::RandomForest,
            GridSpec::Gbrt { .. } => Variant::Gbrt,
            GridSpec::Mlp { .. } => Variant::Mlp,
        }
    }

    pub fn cells(&self) -> Vec<Hyperparameters> {
        let mut out = Vec::new();
        match self {
            GridSpec::ElasticNet { alpha, l1_ratio } => {
                for &a in alpha {
                    for &b in l1_ratio {
                        out.push(Hyperparameters::ElasticNet { alpha: a, l1_ratio: b });
                    }
                }
            }
            GridSpec::RandomForest {
                n_trees,
                max_depth,
                min_leaf,
            } => {
                for &t in n_trees {
                    for &d in max_depth {
                        for &l in min_leaf {
                            out.push(Hyperparameters::random_forest(t, d, l));
                        }
                    }
                }
            }
            GridSpec::Gbrt {
                n_trees,
                max_depth,
                learning_rate,
                col_subsample,
            } => {
                for &t in n_trees {
                    for &d in max_depth {
                        for &lr in learning_rate {
                            for &c in col_subsample {
                                out.push(Hyperparameters::Gbrt {
                                    n_trees: t,
                                    max_depth: d,
                                    learning_rate: lr,
                                    col_subsample: c,
                                });
                            }
                        }
                    }
                }
            }
            GridSpec::Mlp {
                hidden_layers,
                neurons,
                batch_size,
            } => {
                for &h in hidden_layers {
                    for &n in neurons {
                        for &b in batch_size {
                            out.push(Hyperparameters::Mlp {
                                hidden_layers: h,
                                neurons: n,
                                batch_size: b,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub hyperparameters: Hyperparameters,
    pub cv_mse: f64,
    pub fold_mse: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub variant: Variant,
    pub folds: usize,
    pub seed: u64,
    pub cells: Vec<GridCell>,
    pub best: usize,
}

impl GridSearchResult {
    pub fn best_cell(&self) -> &GridCell {
        &self.cells[self.best]
    }

    pub fn best_config(&self) -> RegressorConfig {
        RegressorConfig::new(self.best_cell().hyperparameters, self.seed)
    }
}

/// Scores within this relative distance count as tied.
const TIE_TOL: f64 = 1e-12;

fn better(a: &GridCell, b: &GridCell) -> bool {
    let scale = a.cv_mse.abs().max(b.cv_mse.abs()).max(f64::MIN_POSITIVE);
    if (a.cv_mse - b.cv_mse).abs() <= TIE_TOL * scale {
        a.hyperparameters.complexity_key().cmp(&b.hyperparameters.complexity_key()) == Ordering::Less
    } else {
        a.cv_mse < b.cv_mse
    }
}

/// Index of the best cell: lowest CV MSE, ties to the simpler model.
pub fn select_best(cells: &[GridCell]) -> Result<usize> {
    if cells.is_empty() {
        return Err(Error::Empty("grid"));
    }
    let mut best = 0;
    for i in 1..cells.len() {
        if better(&cells[i], &cells[best]) {
            best = i;
        }
    }
    Ok(best)
}

/// Scores every cell by mean K-fold MSE on one shared fold partition.
pub fn grid_search(x: &Matrix, y: &[f64], grid: &GridSpec, k: usize, seed: u64) -> Result<GridSearchResult> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(Error::Empty("grid"));
    }
    for c in &cells {
        c.validate()?;
    }
    grid_search_cells(x, y, grid.variant(), &cells, k, seed)
}

/// As [`grid_search`] over explicit cells, without domain checks.
pub fn grid_search_cells(
    x: &Matrix,
    y: &[f64],
    variant: Variant,
    cells: &[Hyperparameters],
    k: usize,
    seed: u64,
) -> Result<GridSearchResult> {
    if cells.is_empty() {
        return Err(Error::Empty("grid"));
    }
    if x.rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.rows(),
            right: y.len(),
        });
    }
    let m = y.len();
    let fold = fold_assignment(m, k, seed)?;
    let parts: Vec<(Matrix, Vec<f64>, Vec<usize>)> = (0..k)
        .map(|f| {
            let train: Vec<usize> = (0..m).filter(|&i| fold[i] != f).collect();
            let held: Vec<usize> = (0..m).filter(|&i| fold[i] == f).collect();
            (x.select_rows(&train), train.iter().map(|&i| y[i]).collect(), held)
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..k).map(move |f| (c, f))).collect();
    let scores = par::map(jobs, |(c, f)| -> Result<f64> {
        let (xt, yt, held) = &parts[f];
        let cfg = RegressorConfig::new(cells[c], rng::derive_seed(seed, &[0x6C1D, f as u64]));
        let model = cfg.fit_unchecked(xt, yt)?;
        let mut sse = 0.0;
        for &i in held {
            let d = y[i] - model.predict_row_unchecked(x.row(i));
            sse += d * d;
        }
        Ok(sse / held.len() as f64)
    });
    let mut out = Vec::with_capacity(cells.len());
    let mut it = scores.into_iter();
    for &h in cells {
        let fold_mse: Vec<f64> = (0..k).map(|_| it.next().expect("one score per job")).collect::<Result<_>>()?;
        let cv_mse = fold_mse.iter().sum::<f64>() / k as f64;
        out.push(GridCell {
            hyperparameters: h,
            cv_mse,
            fold_mse,
        });
    }
    let best = select_best(&out)?;
    Ok(GridSearchResult {
        variant,
        folds: k,
        seed,
        cells: out,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(h: Hyperparameters, s: f64) -> GridCell {
        GridCell {
            hyperparameters: h,
            cv_mse: s,
            fold_mse: vec![s],
        }
    }

    #[test]
    fn ties_go_to_simpler() {
        let cells = [
            cell(Hyperparameters::random_forest(500, 4, 2), 3.0),
            cell(Hyperparameters::random_forest(300, 5, 2), 3.0),
            cell(Hyperparameters::random_forest(300, 4, 1), 3.0),
            cell(Hyperparameters::random_forest(300, 4, 8), 3.0),
            cell(Hyperparameters::random_forest(1000, 7, 1), 3.5),
        ];
        assert_eq!(select_best(&cells).unwrap(), 3);
        assert!(select_best(&[]).is_err());
    }

    #[test]
    fn default_grid_sizes() {
        assert_eq!(GridSpec::default_for(Variant::ElasticNet).cells().len(), 15);
        assert_eq!(GridSpec::default_for(Variant::RandomForest).cells().len(), 4 * 6 * 7);
        assert_eq!(GridSpec::default_for(Variant::Gbrt).cells().len(), 4 * 6 * 9);
        assert_eq!(GridSpec::default_for(Variant::Mlp).cells().len(), 45);
        for v in Variant::ALL {
            assert!(GridSpec::default_for(v).cells().iter().all(|c| c.validate().is_ok()));
        }
    }

    #[test]
    fn singleton_grid() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = (0..40).map(|i| 2.0 * i as f64 + 1.0).collect();
        let g = GridSpec::ElasticNet {
            alpha: vec![0.5],
            l1_ratio: vec![0.01],
        };
        let r = grid_search(&x, &y, &g, 5, 1).unwrap();
        assert_eq!(r.best, 0);
        assert_eq!(r.cells.len(), 1);
        let empty = GridSpec::ElasticNet {
            alpha: vec![],
            l1_ratio: vec![0.01],
        };
        assert!(matches!(grid_search(&x, &y, &empty, 5, 1), Err(Error::Empty(_))));
    }
}
