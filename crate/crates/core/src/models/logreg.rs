//! Binary logistic regression task model. Parameters are laid out as
//! `[w_0, ..., w_{d-1}, b]`.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::matrix::{axpy_unchecked, dot_unchecked};
use crate::numkit::{sigmoid, DenseMatrix};

/// Probabilities are clamped to `[EPS, 1 - EPS]` inside logarithms.
pub const PROB_CLAMP: f64 = 1e-12;

/// Flat parameter (or gradient) vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(len: usize) -> Self {
        ParamVector(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        ParamVector(v)
    }
}

fn check_shape(theta: &[f64], x: &DenseMatrix) -> Result<()> {
    if theta.len() != x.cols() + 1 {
        return Err(Error::shape("logistic regression parameters", x.cols() + 1, theta.len()));
    }
    Ok(())
}

fn logits(theta: &[f64], x: &DenseMatrix) -> Vec<f64> {
    let (w, b) = theta.split_at(theta.len() - 1);
    x.iter_rows().map(|row| dot_unchecked(row, w) + b[0]).collect()
}

/// `sigmoid(Xw + b)` per row.
pub fn lr_forward(theta: &[f64], x: &DenseMatrix) -> Result<Vec<f64>> {
    check_shape(theta, x)?;
    Ok(logits(theta, x).into_iter().map(sigmoid).collect())
}

fn bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Mean binary cross-entropy and its gradient `[Xᵀ(p - y)/m, mean(p - y)]`.
pub fn lr_loss_and_grad(theta: &[f64], x: &DenseMatrix, y: &[f64]) -> Result<(f64, ParamVector)> {
    check_shape(theta, x)?;
    if y.len() != x.rows() {
        return Err(Error::shape("logistic regression targets", x.rows(), y.len()));
    }
    if y.is_empty() {
        return Err(Error::invalid("loss over zero samples"));
    }
    let m = y.len() as f64;
    let d = x.cols();
    let mut grad = vec![0.0; d + 1];
    let mut loss = 0.0;
    let mut bias_grad = 0.0;
    for ((row, z), &target) in x.iter_rows().zip(logits(theta, x)).zip(y) {
        let p = sigmoid(z);
        loss += bce(p, target);
        let residual = p - target;
        axpy_unchecked(residual, row, &mut grad[..d]);
        bias_grad += residual;
    }
    grad[..d].iter_mut().for_each(|g| *g /= m);
    grad[d] = bias_grad / m;
    Ok((loss / m, ParamVector(grad)))
}

/// Mean loss without the gradient.
pub fn lr_loss(theta: &[f64], x: &DenseMatrix, y: &[f64]) -> Result<f64> {
    check_shape(theta, x)?;
    if y.len() != x.rows() {
        return Err(Error::shape("logistic regression targets", x.rows(), y.len()));
    }
    if y.is_empty() {
        return Err(Error::invalid("loss over zero samples"));
    }
    let total: f64 = logits(theta, x)
        .into_iter()
        .zip(y)
        .map(|(z, &t)| bce(sigmoid(z), t))
        .sum();
    Ok(total / y.len() as f64)
}

/// Mean loss and 0/1 accuracy at threshold 0.5.
pub fn lr_evaluate(theta: &[f64], x: &DenseMatrix, y: &[f64]) -> Result<(f64, f64)> {
    let p = lr_forward(theta, x)?;
    if y.len() != p.len() {
        return Err(Error::shape("logistic regression targets", p.len(), y.len()));
    }
    if y.is_empty() {
        return Err(Error::invalid("evaluation over zero samples"));
    }
    let m = y.len() as f64;
    let loss = p.iter().zip(y).map(|(&pi, &t)| bce(pi, t)).sum::<f64>() / m;
    let correct = p
        .iter()
        .zip(y)
        .filter(|(&pi, &t)| (pi >= 0.5) == (t >= 0.5))
        .count();
    Ok((loss, correct as f64 / m))
}

/// `theta - lr * grad`.
pub fn sgd_step(theta: &[f64], grad: &[f64], lr: f64) -> Result<ParamVector> {
    if theta.len() != grad.len() {
        return Err(Error::shape("sgd_step", theta.len(), grad.len()));
    }
    Ok(ParamVector(
        theta.iter().zip(grad).map(|(&t, &g)| t - lr * g).collect(),
    ))
}
