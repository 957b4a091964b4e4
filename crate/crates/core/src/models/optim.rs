use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EVALUATOR_LR: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Ascent,
    Descent,
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(n_params: usize, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    /// One update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], direction: Direction) -> Result<()> {
        if params.len() != self.m.len() {
            return Err(Error::shape("adam parameters", self.m.len(), params.len()));
        }
        if grad.len() != self.m.len() {
            return Err(Error::shape("adam gradient", self.m.len(), grad.len()));
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let sign = match direction {
            Direction::Ascent => 1.0,
            Direction::Descent => -1.0,
        };
        for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p += sign * self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}
