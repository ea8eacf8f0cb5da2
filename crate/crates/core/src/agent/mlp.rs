//! Fully connected ReLU network with a linear head, plus the weighted Huber
//! loss on selected outputs used for Q-learning.

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `outputs x inputs`.
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { w: Array2::zeros((outputs, inputs)), b: Array1::zeros(outputs) }
    }

    pub fn inputs(&self) -> usize {
        self.w.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.w.nrows()
    }

    fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        x.dot(&self.w.t()) + &self.b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.len() < 2 || dims.contains(&0) {
        return Err(Error::config(format!("network dims {dims:?} need at least two positive sizes")));
    }
    Ok(())
}

impl Mlp {
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        check_dims(dims)?;
        Ok(Self { layers: dims.windows(2).map(|d| Dense::zeros(d[0], d[1])).collect() })
    }

    /// Weights and biases uniform in `±1/sqrt(fan_in)`.
    pub fn seeded<R: Rng>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(dims)?;
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.inputs() as f64).sqrt();
            layer.w.mapv_inplace(|_| rng.random_range(-bound..bound));
            layer.b.mapv_inplace(|_| rng.random_range(-bound..bound));
        }
        Ok(net)
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].inputs()];
        d.extend(self.layers.iter().map(Dense::outputs));
        d
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn outputs(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    /// Input followed by every hidden activation (post-ReLU).
    fn hidden(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut acts = vec![x.to_owned()];
        for layer in &self.layers[..self.layers.len() - 1] {
            let mut z = layer.forward(acts.last().expect("non-empty").view());
            z.mapv_inplace(|v| v.max(0.0));
            acts.push(z);
        }
        acts
    }

    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let acts = self.hidden(x);
        self.layers[self.layers.len() - 1].forward(acts[acts.len() - 1].view())
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let x = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        self.forward_batch(x).into_raw_vec_and_offset().0
    }

    pub fn copy_from(&mut self, other: &Mlp) {
        self.layers.clone_from(&other.layers);
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.w.iter().chain(l.b.iter()).all(|v| v.is_finite()))
    }
}

/// Loss value plus per-row TD errors (`q - target`) and parameter gradients.
#[derive(Debug, Clone)]
pub struct LossGrad {
    pub loss: f64,
    pub td: Vec<f64>,
    pub grads: Vec<Dense>,
}

pub const HUBER_DELTA: f64 = 1.0;

pub fn huber(d: f64) -> f64 {
    if d.abs() <= HUBER_DELTA {
        0.5 * d * d
    } else {
        HUBER_DELTA * (d.abs() - 0.5 * HUBER_DELTA)
    }
}

fn huber_grad(d: f64) -> f64 {
    d.clamp(-HUBER_DELTA, HUBER_DELTA)
}

/// Mean of `weights[i] * huber(q(x_i)[actions[i]] - targets[i])` and its
/// gradient. Only the selected head rows are touched, so the cost of the
/// output layer scales with the batch rather than the action count.
pub fn weighted_huber_grad(
    net: &Mlp,
    x: ArrayView2<f64>,
    actions: &[usize],
    targets: &[f64],
    weights: &[f64],
) -> LossGrad {
    let n = x.nrows();
    assert!(actions.len() == n && targets.len() == n && weights.len() == n, "batch lengths differ");
    let acts = net.hidden(x);
    let last = net.layers.len() - 1;
    let head = &net.layers[last];
    let top = &acts[last];

    let mut grads: Vec<Dense> = net.layers.iter().map(|l| Dense::zeros(l.inputs(), l.outputs())).collect();
    let mut d_top = Array2::zeros(top.raw_dim());
    let mut loss = 0.0;
    let mut td = Vec::with_capacity(n);
    for i in 0..n {
        let a = actions[i];
        let q = head.w.row(a).dot(&top.row(i)) + head.b[a];
        let d = q - targets[i];
        td.push(d);
        loss += weights[i] * huber(d);
        let g = weights[i] * huber_grad(d) / n as f64;
        grads[last].w.row_mut(a).scaled_add(g, &top.row(i));
        grads[last].b[a] += g;
        d_top.row_mut(i).scaled_add(g, &head.w.row(a));
    }

    let mut d_act = d_top;
    for l in (0..last).rev() {
        let out = &acts[l + 1];
        Zip::from(&mut d_act).and(out).for_each(|g, &h| {
            if h <= 0.0 {
                *g = 0.0;
            }
        });
        grads[l].w = d_act.t().dot(&acts[l]);
        grads[l].b = d_act.sum_axis(Axis(0));
        if l > 0 {
            d_act = d_act.dot(&net.layers[l].w);
        }
    }
    LossGrad { loss: loss / n as f64, td, grads }
}

/// Gathers rows of `x` into a contiguous batch.
pub fn stack_rows(rows: &[&[f64]], width: usize) -> Array2<f64> {
    let mut m = Array2::zeros((rows.len(), width));
    for (i, r) in rows.iter().enumerate() {
        m.slice_mut(s![i, ..]).assign(&ndarray::ArrayView1::from(*r));
    }
    m
}
