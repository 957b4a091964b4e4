//! Leave-one-out valuation: retrain without each client and measure the
//! drop in validation accuracy.

use std::io::Write;
use std::time::Instant;

use crate::dataset::{Shard, ValidationSet};
use crate::error::{Error, Result};
use crate::federation::{
    aggregate_selected, collect_gradients, evaluate, removal_count, select_excluding_ranked, GlobalModel, Removal,
    SelectionVector,
};
use crate::models::ParamVector;

#[derive(Debug, Clone, PartialEq)]
pub struct LooReport {
    pub client_ids: Vec<usize>,
    pub shard_sizes: Vec<usize>,
    /// `acc(all clients) - acc(without client i)`.
    pub values: Vec<f64>,
    pub full_accuracy: f64,
    pub rounds: usize,
    /// Number of training runs executed (N + 1).
    pub runs: usize,
    pub seconds: f64,
}

impl LooReport {
    pub const CSV_HEADER: &'static str = "client_id,shard_size,loo_value";

    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for ((id, size), v) in self.client_ids.iter().zip(&self.shard_sizes).zip(&self.values) {
            writeln!(out, "{id},{size},{v}")?;
        }
        Ok(())
    }
}

/// FedAvg over the clients marked in `keep`, from `theta0`, for `rounds`.
/// Returns validation accuracy before training and after every round.
pub fn fedavg_curve_on(
    theta0: &ParamVector,
    shards: &[Shard],
    keep: &SelectionVector,
    validation: &ValidationSet,
    rounds: usize,
    lr: f64,
) -> Result<Vec<f64>> {
    if keep.len() != shards.len() {
        return Err(Error::shape("client mask", shards.len(), keep.len()));
    }
    if keep.count() == 0 {
        return Err(Error::invalid("training needs at least one client"));
    }
    let kept: Vec<Shard> = shards
        .iter()
        .zip(keep.bits())
        .filter(|(_, &k)| k)
        .map(|(s, _)| s.clone())
        .collect();
    let everyone = SelectionVector::all(kept.len());
    let mut theta = theta0.clone();
    let mut curve = Vec::with_capacity(rounds + 1);
    curve.push(evaluate(&theta, validation)?.1);
    for _ in 0..rounds {
        let bundle = collect_gradients(&theta, &kept, 1)?;
        theta = aggregate_selected(&theta, &bundle, &everyone, lr)?;
        curve.push(evaluate(&theta, validation)?.1);
    }
    Ok(curve)
}

/// Train on all clients, then once without each client, all from the zero
/// model. Runs serially so the recorded wall-clock is comparable across N.
pub fn loo_contributions(shards: &[Shard], validation: &ValidationSet, rounds: usize, lr: f64) -> Result<LooReport> {
    let n = shards.len();
    if n < 2 {
        return Err(Error::invalid(format!("leave-one-out needs at least 2 clients, got {n}")));
    }
    let theta0 = GlobalModel::zeros(validation.x.cols()).theta;
    let start = Instant::now();
    let full = *fedavg_curve_on(&theta0, shards, &SelectionVector::all(n), validation, rounds, lr)?
        .last()
        .unwrap();
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let mut keep = SelectionVector::all(n);
        keep.0[i] = false;
        let without = *fedavg_curve_on(&theta0, shards, &keep, validation, rounds, lr)?.last().unwrap();
        values.push(full - without);
    }
    Ok(LooReport {
        client_ids: shards.iter().map(|s| s.client_id).collect(),
        shard_sizes: shards.iter().map(|s| s.len()).collect(),
        values,
        full_accuracy: full,
        rounds,
        runs: n + 1,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Drop `round(rate · N)` clients at one end of the LOO ranking and retrain
/// on the rest from the zero model.
pub fn loo_remove_and_retrain(
    report: &LooReport,
    shards: &[Shard],
    validation: &ValidationSet,
    rate: f64,
    which: Removal,
    rounds: usize,
    lr: f64,
) -> Result<Vec<f64>> {
    if report.values.len() != shards.len() {
        return Err(Error::shape("leave-one-out report", shards.len(), report.values.len()));
    }
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::invalid(format!("removal rate {rate} outside [0, 1]")));
    }
    let count = removal_count(shards.len(), rate);
    if count >= shards.len() {
        return Err(Error::invalid(format!(
            "removal rate {rate} removes all {} clients",
            shards.len()
        )));
    }
    let keep = select_excluding_ranked(&report.values, count, which);
    let theta0 = GlobalModel::zeros(validation.x.cols()).theta;
    fedavg_curve_on(&theta0, shards, &keep, validation, rounds, lr)
}
