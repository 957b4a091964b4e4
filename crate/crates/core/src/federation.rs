//! Round engine: client gradients, plain and selective averaging.
//!
//! Every client uploads one full-batch gradient of its local loss at the
//! current global parameters. Aggregation sums the chosen rows in client
//! order and applies `theta -= (lr / count) * sum`, so selecting every
//! client reproduces plain averaging bit for bit.

use rayon::prelude::*;

use crate::dataset::{Shard, ValidationSet};
use crate::error::{Error, Result};
use crate::models::{lr_evaluate, lr_loss_and_grad, ParamVector};
use crate::numkit::DenseMatrix;

pub const DEFAULT_TASK_LR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalModel {
    pub theta: ParamVector,
    pub round: u64,
}

impl GlobalModel {
    /// Zero-initialized logistic regression over `n_features` inputs.
    pub fn zeros(n_features: usize) -> Self {
        GlobalModel {
            theta: ParamVector::zeros(n_features + 1),
            round: 0,
        }
    }
}

/// Gradients uploaded in one round, one row per client.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub client_ids: Vec<usize>,
    pub grads: DenseMatrix,
    /// Clients whose shard was empty and uploaded a zero gradient.
    pub empty: Vec<bool>,
}

impl GradientBundle {
    pub fn new(client_ids: Vec<usize>, grads: DenseMatrix, empty: Vec<bool>) -> Result<Self> {
        if grads.rows() == 0 {
            return Err(Error::invalid("gradient bundle needs at least one client"));
        }
        if client_ids.len() != grads.rows() || empty.len() != grads.rows() {
            return Err(Error::shape("gradient bundle ids", grads.rows(), client_ids.len()));
        }
        Ok(GradientBundle {
            client_ids,
            grads,
            empty,
        })
    }

    pub fn len(&self) -> usize {
        self.grads.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.grads.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.grads.cols()
    }

    pub fn gradient(&self, i: usize) -> &[f64] {
        self.grads.row(i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionVector(pub Vec<bool>);

impl SelectionVector {
    pub fn all(n: usize) -> Self {
        SelectionVector(vec![true; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&s| s).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }
}

/// One client's upload.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUpdate {
    pub grad: ParamVector,
    /// Set when the shard was empty and the gradient is all zeros.
    pub empty: bool,
}

/// Full-batch gradient of the client's mean loss at `theta`.
pub fn client_local_update(theta: &[f64], shard: &Shard) -> Result<LocalUpdate> {
    if shard.is_empty() {
        return Ok(LocalUpdate {
            grad: ParamVector::zeros(theta.len()),
            empty: true,
        });
    }
    let (_, grad) = lr_loss_and_grad(theta, &shard.x, &shard.y)?;
    Ok(LocalUpdate { grad, empty: false })
}

/// Upload step for every client. With `threads > 1` clients are processed in
/// parallel; the bundle is identical either way.
pub fn collect_gradients(theta: &[f64], shards: &[Shard], threads: usize) -> Result<GradientBundle> {
    if shards.is_empty() {
        return Err(Error::invalid("no clients"));
    }
    let updates: Vec<LocalUpdate> = if threads > 1 {
        shards
            .par_iter()
            .map(|s| client_local_update(theta, s))
            .collect::<Result<_>>()?
    } else {
        shards
            .iter()
            .map(|s| client_local_update(theta, s))
            .collect::<Result<_>>()?
    };
    let dim = theta.len();
    let mut data = Vec::with_capacity(dim * updates.len());
    let mut empty = Vec::with_capacity(updates.len());
    for u in &updates {
        data.extend_from_slice(&u.grad);
        empty.push(u.empty);
    }
    GradientBundle::new(
        shards.iter().map(|s| s.client_id).collect(),
        DenseMatrix::from_vec(updates.len(), dim, data)?,
        empty,
    )
}

fn apply_mean_update(
    theta: &[f64],
    bundle: &GradientBundle,
    selected: impl Fn(usize) -> bool,
    lr: f64,
) -> Result<ParamVector> {
    if bundle.dim() != theta.len() {
        return Err(Error::shape("aggregation", theta.len(), bundle.dim()));
    }
    let mut sum = vec![0.0; theta.len()];
    let mut count = 0usize;
    for i in (0..bundle.len()).filter(|&i| selected(i)) {
        for (acc, &g) in sum.iter_mut().zip(bundle.gradient(i)) {
            *acc += g;
        }
        count += 1;
    }
    if count == 0 {
        return Ok(ParamVector(theta.to_vec()));
    }
    let scale = lr / count as f64;
    Ok(ParamVector(
        theta.iter().zip(&sum).map(|(&t, &s)| t - scale * s).collect(),
    ))
}

/// `theta - (lr / N) · Σ_i g_i`.
pub fn aggregate_fedavg(theta: &[f64], bundle: &GradientBundle, lr: f64) -> Result<ParamVector> {
    apply_mean_update(theta, bundle, |_| true, lr)
}

/// `theta - (lr / Σ s_i) · Σ_i s_i g_i`; an empty selection leaves `theta`
/// unchanged.
pub fn aggregate_selected(
    theta: &[f64],
    bundle: &GradientBundle,
    selection: &SelectionVector,
    lr: f64,
) -> Result<ParamVector> {
    if selection.len() != bundle.len() {
        return Err(Error::shape("selection vector", bundle.len(), selection.len()));
    }
    apply_mean_update(theta, bundle, |i| selection.0[i], lr)
}

/// Validation loss and accuracy of the global model.
pub fn evaluate(theta: &[f64], validation: &ValidationSet) -> Result<(f64, f64)> {
    lr_evaluate(theta, &validation.x, &validation.y)
}

/// Which end of a ranking to drop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Removal {
    Highest,
    Lowest,
}

/// Number of clients dropped at `rate`: `round(rate · n)`.
pub fn removal_count(n: usize, rate: f64) -> usize {
    (rate * n as f64).round() as usize
}

/// Keep everything except the `count` highest- or lowest-valued clients.
/// Ties are broken by position (lower index ranks first on either end), so
/// the removed set is deterministic.
pub fn select_excluding_ranked(values: &[f64], count: usize, which: Removal) -> SelectionVector {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let by_value = match which {
            Removal::Highest => values[b].total_cmp(&values[a]),
            Removal::Lowest => values[a].total_cmp(&values[b]),
        };
        by_value.then(a.cmp(&b))
    });
    let mut keep = vec![true; values.len()];
    for &i in order.iter().take(count) {
        keep[i] = false;
    }
    SelectionVector(keep)
}

/// Plain FedAvg training loop.
#[derive(Debug, Clone)]
pub struct FedAvgRunner {
    pub model: GlobalModel,
    pub lr: f64,
    pub threads: usize,
}

impl FedAvgRunner {
    pub fn new(model: GlobalModel, lr: f64) -> Self {
        FedAvgRunner { model, lr, threads: 1 }
    }

    /// Local updates for all clients, then plain averaging.
    pub fn run_round(&mut self, shards: &[Shard]) -> Result<()> {
        let bundle = collect_gradients(&self.model.theta, shards, self.threads)?;
        self.model.theta = aggregate_fedavg(&self.model.theta, &bundle, self.lr)?;
        self.model.round += 1;
        Ok(())
    }

    /// Train for `rounds` and return validation accuracy before the first
    /// round and after each round (`rounds + 1` entries).
    pub fn train_curve(&mut self, shards: &[Shard], validation: &ValidationSet, rounds: usize) -> Result<Vec<f64>> {
        let mut curve = Vec::with_capacity(rounds + 1);
        curve.push(evaluate(&self.model.theta, validation)?.1);
        for _ in 0..rounds {
            self.run_round(shards)?;
            curve.push(evaluate(&self.model.theta, validation)?.1);
        }
        Ok(curve)
    }
}
