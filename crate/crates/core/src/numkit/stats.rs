use crate::error::{Error, Result};
use crate::numkit::matrix::DenseMatrix;
use crate::numkit::rng::RngStream;

/// Symmetric Dirichlet(alpha) draw of length `n`, by normalizing `n`
/// independent Gamma(alpha, 1) variates.
pub fn dirichlet_sample(rng: &mut RngStream, alpha: f64, n: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("dirichlet alpha must be > 0, got {alpha}")));
    }
    if n == 0 {
        return Err(Error::invalid("dirichlet dimension must be >= 1"));
    }
    let mut draws = Vec::with_capacity(n);
    for _ in 0..n {
        draws.push(rng.gamma(alpha)?);
    }
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        for d in draws.iter_mut() {
            *d /= total;
        }
        return Ok(draws);
    }
    // Every variate underflowed (tiny alpha). The boost form g * u^(1/a)
    // loses all mass; put it on the largest draw, breaking ties by index.
    let argmax = draws
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > draws[best] { i } else { best });
    let mut out = vec![0.0; n];
    out[argmax] = 1.0;
    Ok(out)
}

pub fn bernoulli_sample(rng: &mut RngStream, p: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("bernoulli probability {p} outside [0, 1]")));
    }
    Ok(rng.next_f64() < p)
}

/// Per-column standardization parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

/// Column means and population standard deviations. Zero-variance columns
/// report a standard deviation of 1 so they map to a constant 0.
pub fn standardize_fit(x: &DenseMatrix) -> Result<Standardizer> {
    if x.rows() < 2 || x.cols() == 0 {
        return Err(Error::invalid(format!(
            "standardize_fit needs at least 2 rows and 1 column, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let m = x.rows() as f64;
    let mut mean = vec![0.0; x.cols()];
    for row in x.iter_rows() {
        for (acc, &v) in mean.iter_mut().zip(row) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= m);

    let mut var = vec![0.0; x.cols()];
    for row in x.iter_rows() {
        for ((acc, &v), &mu) in var.iter_mut().zip(row).zip(&mean) {
            let d = v - mu;
            *acc += d * d;
        }
    }
    let stddev = var
        .into_iter()
        .map(|v| {
            let sd = (v / m).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    Ok(Standardizer { mean, stddev })
}

impl Standardizer {
    pub fn transform(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::shape("Standardizer::transform", self.mean.len(), x.cols()));
        }
        let mut out = x.clone();
        for i in 0..out.rows() {
            for ((v, &mu), &sd) in out.row_mut(i).iter_mut().zip(&self.mean).zip(&self.stddev) {
                *v = (*v - mu) / sd;
            }
        }
        Ok(out)
    }
}
