//! Fully connected ReLU network with a linear output, trained with Adam on
//! mini-batch squared error plus an L2 penalty on the weights.

use alloc::vec;
use alloc::vec::Vec;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::tree::check_xy;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden_layers: usize,
    pub neurons: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub learning_rate: f64,
    pub l2: f64,
}

impl MlpParams {
    pub fn new(hidden_layers: usize, neurons: usize, batch_size: usize) -> Self {
        Self {
            hidden_layers,
            neurons,
            batch_size,
            max_epochs: 500,
            patience: 20,
            validation_fraction: 0.1,
            learning_rate: 1e-3,
            l2: 1e-4,
        }
    }
}

/// Dense layer; `weights` is `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
}

impl Network {
    /// He-initialized network with zero biases.
    pub fn init(inputs: usize, hidden: &[usize], seed: u64) -> Self {
        let mut r = rng::rng_from_seed(seed);
        let mut sizes = vec![inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, out) = (w[0], w[1]);
                let sd = (2.0 / fan_in.max(1) as f64).sqrt();
                let dist = Normal::new(0.0, sd).expect("finite sd");
                let data = (0..out * fan_in).map(|_| dist.sample(&mut r)).collect();
                Layer {
                    weights: Matrix::new(out, fan_in, data).expect("shape"),
                    bias: vec![0.0; out],
                }
            })
            .collect();
        Self { layers }
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].weights.cols()
    }

    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut a = x.to_vec();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let w = &layer.weights;
            let mut next = Vec::with_capacity(w.rows());
            for o in 0..w.rows() {
                let mut s = layer.bias[o];
                for (wv, av) in w.row(o).iter().zip(&a) {
                    s += wv * av;
                }
                next.push(if l < last && s < 0.0 { 0.0 } else { s });
            }
            a = next;
        }
        a[0]
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.as_slice().len() + l.bias.len()).sum()
    }

    /// Flat parameters: per layer, weights row-major then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(Error::LengthMismatch {
                left: p.len(),
                right: self.n_params(),
            });
        }
        let mut k = 0;
        for l in &mut self.layers {
            let (rows, cols) = (l.weights.rows(), l.weights.cols());
            let n = rows * cols;
            l.weights = Matrix::new(rows, cols, p[k..k + n].to_vec())?;
            k += n;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&p[k..k + nb]);
            k += nb;
        }
        Ok(())
    }

    /// `(1/B) sum (yhat - y)^2 + (l2/2) |W|^2` over the given rows and its
    /// gradient in [`Network::params`] layout.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[f64], l2: f64) -> (f64, Vec<f64>) {
        let rows: Vec<usize> = (0..x.rows()).collect();
        let mut grad = vec![0.0; self.n_params()];
        let loss = self.batch_gradient(x, y, &rows, l2, &mut grad);
        (loss, grad)
    }

    fn batch_gradient(&self, x: &Matrix, y: &[f64], rows: &[usize], l2: f64, grad: &mut [f64]) -> f64 {
        let b = rows.len();
        let n_layers = self.layers.len();
        // activations[l] is b x width(l), row-major
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        let mut input = Vec::with_capacity(b * self.inputs());
        for &r in rows {
            input.extend_from_slice(x.row(r));
        }
        acts.push(input);
        for (l, layer) in self.layers.iter().enumerate() {
            let w = &layer.weights;
            let (out, inp) = (w.rows(), w.cols());
            let prev = &acts[l];
            let mut z = vec![0.0; b * out];
            for i in 0..b {
                let a = &prev[i * inp..(i + 1) * inp];
                for o in 0..out {
                    let mut s = layer.bias[o];
                    for (wv, av) in w.row(o).iter().zip(a) {
                        s += wv * av;
                    }
                    z[i * out + o] = if l + 1 < n_layers && s < 0.0 { 0.0 } else { s };
                }
            }
            acts.push(z);
        }
        let pred = &acts[n_layers];
        let mut loss = 0.0;
        let mut delta: Vec<f64> = (0..b)
            .map(|i| {
                let e = pred[i] - y[rows[i]];
                loss += e * e;
                2.0 * e / b as f64
            })
            .collect();
        loss /= b as f64;

        let mut offsets = Vec::with_capacity(n_layers);
        let mut k = 0;
        for l in &self.layers {
            offsets.push(k);
            k += l.weights.as_slice().len() + l.bias.len();
        }
        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            let w = &layer.weights;
            let (out, inp) = (w.rows(), w.cols());
            let prev = &acts[l];
            let off = offsets[l];
            let (gw, gb) = grad[off..off + out * inp + out].split_at_mut(out * inp);
            for i in 0..b {
                let a = &prev[i * inp..(i + 1) * inp];
                for o in 0..out {
                    let d = delta[i * out + o];
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    for (g, av) in gw[o * inp..(o + 1) * inp].iter_mut().zip(a) {
                        *g += d * av;
                    }
                }
            }
            if l > 0 {
                let mut next = vec![0.0; b * inp];
                for i in 0..b {
                    let nd = &mut next[i * inp..(i + 1) * inp];
                    for o in 0..out {
                        let d = delta[i * out + o];
                        if d == 0.0 {
                            continue;
                        }
                        for (n, wv) in nd.iter_mut().zip(w.row(o)) {
                            *n += d * wv;
                        }
                    }
                    // ReLU derivative of the previous layer's output
                    for (n, av) in nd.iter_mut().zip(&prev[i * inp..(i + 1) * inp]) {
                        if *av <= 0.0 {
                            *n = 0.0;
                        }
                    }
                }
                delta = next;
            }
        }
        let mut penalty = 0.0;
        for (l, layer) in self.layers.iter().enumerate() {
            let off = offsets[l];
            for (g, wv) in grad[off..].iter_mut().zip(layer.weights.as_slice()) {
                *g += l2 * wv;
                penalty += wv * wv;
            }
        }
        loss + 0.5 * l2 * penalty
    }

    fn mse(&self, x: &Matrix, y: &[f64], rows: &[usize]) -> f64 {
        let s: f64 = rows
            .iter()
            .map(|&r| {
                let e = self.predict_row(x.row(r)) - y[r];
                e * e
            })
            .sum();
        s / rows.len() as f64
    }
}

/// Network trained on a standardized target; predictions are mapped back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub network: Network,
    pub y_mean: f64,
    pub y_scale: f64,
}

impl MlpModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.y_mean + self.y_scale * self.network.predict_row(x)
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpFit {
    pub model: MlpModel,
    pub epochs_run: usize,
    pub best_epoch: usize,
    /// Per-epoch validation MSE on the standardized target (training MSE
    /// when the training set is too small to hold rows out).
    pub monitor_loss: Vec<f64>,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * g;
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + Self::EPS);
        }
    }
}

/// Trains on already standardized features. The target is standardized
/// internally.
pub fn fit_mlp(x: &Matrix, y: &[f64], params: &MlpParams, seed: u64) -> Result<MlpFit> {
    check_xy(x, y)?;
    if params.hidden_layers == 0 || params.neurons == 0 || params.batch_size == 0 {
        return Err(Error::InvalidParameter(
            "hidden layers, neurons and batch size must be >= 1".into(),
        ));
    }
    let m = y.len();
    let y_mean = y.iter().sum::<f64>() / m as f64;
    let var = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum::<f64>() / m as f64;
    let y_scale = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
    let ys: Vec<f64> = y.iter().map(|v| (v - y_mean) / y_scale).collect();

    let mut order: Vec<usize> = (0..m).collect();
    let mut r = rng::rng_from_seed(rng::derive_seed(seed, &[0x1A]));
    rng::shuffle(&mut r, &mut order);
    let n_val = ((params.validation_fraction * m as f64).round() as usize).min(m.saturating_sub(1));
    let n_val = if m >= 10 { n_val } else { 0 };
    let val: Vec<usize> = order[m - n_val..].to_vec();
    let mut train: Vec<usize> = order[..m - n_val].to_vec();
    train.sort_unstable();

    let hidden = vec![params.neurons; params.hidden_layers];
    let mut net = Network::init(x.cols(), &hidden, rng::derive_seed(seed, &[0x1B]));
    let mut flat = net.params();
    let mut opt = Adam::new(flat.len(), params.learning_rate);
    let mut grad = vec![0.0; flat.len()];
    let mut shuffle_rng = rng::rng_from_seed(rng::derive_seed(seed, &[0x1C]));
    let monitor: Vec<usize> = if val.is_empty() { train.clone() } else { val };

    let mut best = (f64::INFINITY, flat.clone(), 0usize);
    let mut monitor_loss = Vec::new();
    let mut epochs_run = 0;
    for epoch in 0..params.max_epochs {
        epochs_run = epoch + 1;
        rng::shuffle(&mut shuffle_rng, &mut train);
        for batch in train.chunks(params.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = net.batch_gradient(x, &ys, batch, params.l2, &mut grad);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch });
            }
            opt.step(&mut flat, &grad);
            net.set_params(&flat)?;
        }
        let vl = net.mse(x, &ys, &monitor);
        if !vl.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        monitor_loss.push(vl);
        if vl < best.0 {
            best = (vl, flat.clone(), epoch);
        } else if epoch - best.2 >= params.patience {
            break;
        }
    }
    net.set_params(&best.1)?;
    Ok(MlpFit {
        model: MlpModel {
            network: net,
            y_mean,
            y_scale,
        },
        epochs_run,
        best_epoch: best.2,
        monitor_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut r = rng::rng_from_seed(seed);
        let data = (0..rows * cols).map(|_| r.random_range(-1.0..1.0)).collect();
        Matrix::new(rows, cols, data).unwrap()
    }

    #[test]
    fn gradient_matches_central_differences() {
        for seed in 0..4u64 {
            let x = random_matrix(5, 4, seed);
            let y: Vec<f64> = (0..5).map(|i| x.get(i, 0) - 2.0 * x.get(i, 3) + 0.5).collect();
            let mut net = Network::init(4, &[6, 5][..(seed as usize % 2) + 1], seed + 10);
            let (_, g) = net.loss_and_gradient(&x, &y, 1e-2);
            let p0 = net.params();
            let h = 1e-6;
            for k in 0..p0.len() {
                let mut p = p0.clone();
                p[k] += h;
                net.set_params(&p).unwrap();
                let up = net.loss_and_gradient(&x, &y, 1e-2).0;
                p[k] -= 2.0 * h;
                net.set_params(&p).unwrap();
                let down = net.loss_and_gradient(&x, &y, 1e-2).0;
                let fd = (up - down) / (2.0 * h);
                let denom = g[k].abs().max(fd.abs()).max(1e-6);
                assert!((g[k] - fd).abs() / denom < 1e-4, "param {k}: {} vs {fd}", g[k]);
            }
            net.set_params(&p0).unwrap();
        }
    }

    #[test]
    fn learns_linear_target() {
        let x = random_matrix(400, 3, 7);
        let y: Vec<f64> = (0..400).map(|i| 2.0 * x.get(i, 0) - x.get(i, 1) + 0.5 * x.get(i, 2)).collect();
        let xt = random_matrix(200, 3, 8);
        let yt: Vec<f64> = (0..200).map(|i| 2.0 * xt.get(i, 0) - xt.get(i, 1) + 0.5 * xt.get(i, 2)).collect();
        let fit = fit_mlp(&x, &y, &MlpParams::new(1, 32, 32), 3).unwrap();
        let p = fit.model.predict(&xt);
        let mean = yt.iter().sum::<f64>() / 200.0;
        let ss_res: f64 = p.iter().zip(&yt).map(|(a, b)| (a - b) * (a - b)).sum();
        let ss_tot: f64 = yt.iter().map(|b| (b - mean) * (b - mean)).sum();
        assert!(1.0 - ss_res / ss_tot > 0.95);
    }

    #[test]
    fn zero_hidden_layers_rejected() {
        let x = random_matrix(20, 2, 1);
        assert!(fit_mlp(&x, &[0.0; 20], &MlpParams::new(0, 8, 32), 0).is_err());
    }

    #[test]
    fn divergence_reports_epoch() {
        let x = random_matrix(50, 2, 1);
        let y: Vec<f64> = (0..50).map(|i| x.get(i, 0) * 1e3).collect();
        let mut p = MlpParams::new(2, 16, 8);
        p.learning_rate = 1e300;
        assert!(matches!(fit_mlp(&x, &y, &p, 0), Err(Error::Diverged { epoch: 0 })));
    }

    #[test]
    fn deterministic() {
        let x = random_matrix(60, 3, 2);
        let y: Vec<f64> = (0..60).map(|i| x.get(i, 0) * x.get(i, 1)).collect();
        let mut p = MlpParams::new(2, 8, 32);
        p.max_epochs = 30;
        assert_eq!(fit_mlp(&x, &y, &p, 5).unwrap().model, fit_mlp(&x, &y, &p, 5).unwrap().model);
    }
}
