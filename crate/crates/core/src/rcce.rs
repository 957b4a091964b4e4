//! Reinforcement-learned contribution evaluation.
//!
//! Each round the evaluator maps every uploaded gradient to a selection
//! probability ω_i, a Bernoulli selection S is drawn, the selected gradients
//! are averaged into the global model, and the validation loss relative to a
//! moving-average baseline δ rewards the evaluator through REINFORCE.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Shard, ValidationSet};
use crate::error::{Error, Result};
use crate::federation::{
    aggregate_fedavg, aggregate_selected, collect_gradients, evaluate, select_excluding_ranked, GlobalModel,
    GradientBundle, Removal, SelectionVector, DEFAULT_TASK_LR,
};
use crate::models::{
    AdamState, BaselineSnapshot, Checkpoint, Direction, MlpPolicy, ParamVector, PolicyTrace, DEFAULT_EVALUATOR_LR,
    DEFAULT_HIDDEN, PROB_CLAMP,
};
use crate::numkit::{bernoulli_sample, streams, RngStream};

pub const DEFAULT_BASELINE_WINDOW: u32 = 20;

/// Sign convention of the reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardMode {
    /// `r = δ - L_v`: a loss below the baseline earns a positive reward.
    Flipped,
    /// `r = L_v - δ`.
    Literal,
}

impl fmt::Display for RewardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewardMode::Flipped => "flipped",
            RewardMode::Literal => "literal",
        })
    }
}

impl FromStr for RewardMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flipped" => Ok(RewardMode::Flipped),
            "literal" => Ok(RewardMode::Literal),
            other => Err(Error::Config(format!("unknown reward mode {other:?} (expected flipped or literal)"))),
        }
    }
}

/// Moving average of recent validation losses.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardBaseline {
    pub delta: f64,
    pub window: u32,
    pub initialized: bool,
}

impl RewardBaseline {
    pub fn new(window: u32) -> Result<Self> {
        if window == 0 {
            return Err(Error::invalid("baseline window must be positive"));
        }
        Ok(RewardBaseline {
            delta: 0.0,
            window,
            initialized: false,
        })
    }

    /// `δ ← ((T-1)δ + L_v) / T`; the first observation initializes δ.
    pub fn update(&mut self, loss: f64) {
        if !self.initialized {
            self.delta = loss;
            self.initialized = true;
            return;
        }
        let t = self.window as f64;
        let a = t - 1.0;
        // Numerator as s + err exactly, then one residual-corrected division,
        // so the result stays within an ulp of the exact value.
        let p = a * self.delta;
        let p_err = a.mul_add(self.delta, -p);
        let s = p + loss;
        let back = s - p;
        let s_err = (p - (s - back)) + (loss - back);
        let q = s / t;
        let rem = (-q).mul_add(t, s);
        self.delta = q + (rem + p_err + s_err) / t;
    }

    pub fn snapshot(&self) -> BaselineSnapshot {
        BaselineSnapshot {
            delta: self.delta,
            window: self.window,
            initialized: self.initialized,
        }
    }

    pub fn from_snapshot(s: &BaselineSnapshot) -> Result<Self> {
        let mut b = RewardBaseline::new(s.window)?;
        b.delta = s.delta;
        b.initialized = s.initialized;
        Ok(b)
    }
}

/// Reward for a round with validation loss `loss`. Zero until the baseline
/// has seen its first loss.
pub fn compute_reward(loss: f64, baseline: &RewardBaseline, mode: RewardMode) -> f64 {
    if !baseline.initialized {
        return 0.0;
    }
    match mode {
        RewardMode::Flipped => baseline.delta - loss,
        RewardMode::Literal => loss - baseline.delta,
    }
}

/// Selection probabilities for every gradient in the bundle, plus the trace
/// needed for backpropagation.
pub fn compute_probs(policy: &MlpPolicy, bundle: &GradientBundle) -> Result<(Vec<f64>, PolicyTrace)> {
    let trace = policy.forward_batch(&bundle.grads)?;
    Ok((trace.outputs().to_vec(), trace))
}

/// Independent Bernoulli draw per client.
pub fn sample_selection(rng: &mut RngStream, omega: &[f64]) -> Result<SelectionVector> {
    omega
        .iter()
        .map(|&p| bernoulli_sample(rng, p))
        .collect::<Result<Vec<bool>>>()
        .map(SelectionVector)
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// `log p(S) = Σ_i s_i log ω_i + (1 - s_i) log(1 - ω_i)`.
pub fn log_prob(omega: &[f64], selection: &SelectionVector) -> f64 {
    omega
        .iter()
        .zip(selection.bits())
        .map(|(&w, &s)| {
            let w = clamp_prob(w);
            if s {
                w.ln()
            } else {
                (1.0 - w).ln()
            }
        })
        .sum()
}

/// `∇_φ log p(S) = Σ_i [s_i/ω_i - (1 - s_i)/(1 - ω_i)] ∇_φ ω_i`.
pub fn log_prob_grad(policy: &MlpPolicy, trace: &PolicyTrace, selection: &SelectionVector) -> Result<Vec<f64>> {
    let omega = trace.outputs();
    if selection.len() != omega.len() {
        return Err(Error::shape("selection vector", omega.len(), selection.len()));
    }
    let upstream: Vec<f64> = omega
        .iter()
        .zip(selection.bits())
        .map(|(&w, &s)| {
            let w = clamp_prob(w);
            if s {
                1.0 / w
            } else {
                -1.0 / (1.0 - w)
            }
        })
        .collect();
    policy.backward_batch(trace, &upstream)
}

/// One ascent step along `reward · ∇ log p(S)`. A zero reward carries no
/// information and leaves both the policy and the optimizer untouched.
pub fn evaluator_update(adam: &mut AdamState, policy: &mut MlpPolicy, reward: f64, log_prob_grad: &[f64]) -> Result<()> {
    if reward == 0.0 {
        return Ok(());
    }
    let grad: Vec<f64> = log_prob_grad.iter().map(|g| reward * g).collect();
    adam.step(policy.params_mut(), &grad, Direction::Ascent)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RcceConfig {
    pub task_lr: f64,
    pub evaluator_lr: f64,
    pub window: u32,
    pub reward_mode: RewardMode,
    pub hidden: Vec<usize>,
    /// Replace the evaluator output by this constant probability and skip
    /// its update.
    pub force_omega: Option<f64>,
    pub threads: usize,
}

impl Default for RcceConfig {
    fn default() -> Self {
        RcceConfig {
            task_lr: DEFAULT_TASK_LR,
            evaluator_lr: DEFAULT_EVALUATOR_LR,
            window: DEFAULT_BASELINE_WINDOW,
            reward_mode: RewardMode::Flipped,
            hidden: DEFAULT_HIDDEN.to_vec(),
            force_omega: None,
            threads: 1,
        }
    }
}

/// Everything one round produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionRound {
    pub round: u64,
    pub omega: Vec<f64>,
    pub selection: SelectionVector,
    pub reward: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    /// Baseline the reward was measured against.
    pub delta_before: f64,
    /// Baseline after this round's update.
    pub delta_after: f64,
}

impl SelectionRound {
    pub fn n_selected(&self) -> usize {
        self.selection.count()
    }

    fn omega_summary(&self) -> (f64, f64, f64) {
        let min = self.omega.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self.omega.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = self.omega.iter().sum::<f64>() / self.omega.len() as f64;
        (min, mean, max)
    }
}

pub const ROUND_LOG_HEADER: &str = "round,L_v,val_acc,reward,delta,n_selected,omega_min,omega_mean,omega_max";

/// Write rounds as CSV rows under [`ROUND_LOG_HEADER`].
pub fn write_round_log(out: &mut impl Write, rounds: &[SelectionRound]) -> Result<()> {
    writeln!(out, "{ROUND_LOG_HEADER}")?;
    for r in rounds {
        let (lo, mean, hi) = r.omega_summary();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.round,
            r.val_loss,
            r.val_acc,
            r.reward,
            r.delta_after,
            r.n_selected(),
            lo,
            mean,
            hi
        )?;
    }
    Ok(())
}

/// Co-trains the global model and the evaluator.
#[derive(Debug, Clone)]
pub struct RcceTrainer {
    pub model: GlobalModel,
    pub policy: MlpPolicy,
    pub adam: AdamState,
    pub baseline: RewardBaseline,
    pub config: RcceConfig,
    rng: RngStream,
}

impl RcceTrainer {
    /// Fresh trainer: zero task model, evaluator drawn from the seed's
    /// policy-init stream, selection draws from its selection stream.
    pub fn new(n_features: usize, seed: u64, config: RcceConfig) -> Result<Self> {
        if let Some(w) = config.force_omega {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::invalid(format!("forced probability {w} outside [0, 1]")));
            }
        }
        let mut init_rng = RngStream::new(seed, streams::POLICY_INIT);
        let policy = MlpPolicy::new(n_features + 1, &config.hidden, &mut init_rng)?;
        let adam = AdamState::new(policy.n_params(), config.evaluator_lr);
        Ok(RcceTrainer {
            model: GlobalModel::zeros(n_features),
            policy,
            adam,
            baseline: RewardBaseline::new(config.window)?,
            config,
            rng: RngStream::new(seed, streams::SELECTION),
        })
    }

    /// Resume from a checkpoint. The selection stream restarts from the
    /// seed, offset by the checkpoint's round so resumed runs do not replay
    /// earlier draws.
    pub fn from_checkpoint(ck: Checkpoint, seed: u64, config: RcceConfig) -> Result<Self> {
        if ck.theta.len() != ck.policy.input_dim() {
            return Err(Error::Checkpoint("task model and evaluator input sizes differ".into()));
        }
        Ok(RcceTrainer {
            model: GlobalModel {
                theta: ck.theta,
                round: ck.round,
            },
            baseline: RewardBaseline::from_snapshot(&ck.baseline)?,
            policy: ck.policy,
            adam: ck.adam,
            config,
            rng: RngStream::new(seed, streams::SELECTION).substream(ck.round),
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(
            self.model.round,
            self.policy.clone(),
            self.adam.clone(),
            self.model.theta.clone(),
            self.baseline.snapshot(),
        )
    }

    /// One full round: local updates, probabilities, selection, selective
    /// aggregation, validation, reward, evaluator step, baseline update.
    pub fn run_round(&mut self, shards: &[Shard], validation: &ValidationSet) -> Result<SelectionRound> {
        let bundle = collect_gradients(&self.model.theta, shards, self.config.threads)?;
        let (omega, trace) = match self.config.force_omega {
            Some(w) => (vec![w; bundle.len()], None),
            None => {
                let (omega, trace) = compute_probs(&self.policy, &bundle)?;
                (omega, Some(trace))
            }
        };
        let selection = sample_selection(&mut self.rng, &omega)?;
        self.model.theta = aggregate_selected(&self.model.theta, &bundle, &selection, self.config.task_lr)?;
        self.model.round += 1;

        let (val_loss, val_acc) = evaluate(&self.model.theta, validation)?;
        let delta_before = self.baseline.delta;
        let reward = compute_reward(val_loss, &self.baseline, self.config.reward_mode);
        if let Some(trace) = trace {
            if reward != 0.0 {
                let grad = log_prob_grad(&self.policy, &trace, &selection)?;
                evaluator_update(&mut self.adam, &mut self.policy, reward, &grad)?;
            }
        }
        self.baseline.update(val_loss);
        Ok(SelectionRound {
            round: self.model.round,
            omega,
            selection,
            reward,
            val_loss,
            val_acc,
            delta_before,
            delta_after: self.baseline.delta,
        })
    }

    pub fn train(&mut self, shards: &[Shard], validation: &ValidationSet, rounds: usize) -> Result<Vec<SelectionRound>> {
        (0..rounds).map(|_| self.run_round(shards, validation)).collect()
    }
}

/// Mean selection probability per client under a frozen evaluator, over
/// `rounds` of plain averaging starting from `theta`.
pub fn score_contributions(
    policy: &MlpPolicy,
    theta: &ParamVector,
    shards: &[Shard],
    rounds: usize,
    task_lr: f64,
) -> Result<Vec<f64>> {
    if rounds == 0 {
        return Err(Error::invalid("scoring needs at least one round"));
    }
    let mut theta = theta.clone();
    let mut total = vec![0.0; shards.len()];
    for _ in 0..rounds {
        let bundle = collect_gradients(&theta, shards, 1)?;
        let (omega, _) = compute_probs(policy, &bundle)?;
        for (t, w) in total.iter_mut().zip(&omega) {
            *t += w;
        }
        theta = aggregate_fedavg(&theta, &bundle, task_lr)?;
    }
    Ok(total.into_iter().map(|t| t / rounds as f64).collect())
}

/// Retrain from `theta` for `rounds`, each round dropping the `count`
/// clients the frozen evaluator rates highest or lowest on that round's
/// gradients. Returns validation accuracy before training and after each
/// round.
pub fn retrain_with_removal(
    policy: &MlpPolicy,
    theta: &ParamVector,
    shards: &[Shard],
    validation: &ValidationSet,
    rounds: usize,
    count: usize,
    which: Removal,
    task_lr: f64,
) -> Result<Vec<f64>> {
    if count >= shards.len() {
        return Err(Error::invalid(format!(
            "removing {count} of {} clients leaves nobody to train on",
            shards.len()
        )));
    }
    let mut theta = theta.clone();
    let mut curve = Vec::with_capacity(rounds + 1);
    curve.push(evaluate(&theta, validation)?.1);
    for _ in 0..rounds {
        let bundle = collect_gradients(&theta, shards, 1)?;
        let (omega, _) = compute_probs(policy, &bundle)?;
        let keep = select_excluding_ranked(&omega, count, which);
        theta = aggregate_selected(&theta, &bundle, &keep, task_lr)?;
        curve.push(evaluate(&theta, validation)?.1);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::federation::FedAvgRunner;
    use crate::numkit::DenseMatrix;

    fn randomized_policy(input_dim: usize, hidden: &[usize], rng: &mut RngStream) -> MlpPolicy {
        let mut p = MlpPolicy::new(input_dim, hidden, rng).unwrap();
        for v in p.params_mut() {
            *v = rng.normal() * 0.4;
        }
        p
    }

    fn random_bundle(rng: &mut RngStream, n: usize, dim: usize) -> GradientBundle {
        let data = (0..n * dim).map(|_| rng.normal()).collect();
        GradientBundle::new((0..n).collect(), DenseMatrix::from_vec(n, dim, data).unwrap(), vec![false; n]).unwrap()
    }

    fn toy_shards(rng: &mut RngStream, n: usize, d: usize) -> (Vec<Shard>, ValidationSet) {
        let w: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let mut make = |m: usize| {
            let x: Vec<f64> = (0..m * d).map(|_| rng.normal()).collect();
            let y: Vec<f64> = x
                .chunks(d)
                .map(|row| {
                    let z: f64 = row.iter().zip(&w).map(|(a, b)| a * b).sum();
                    (z + 0.5 * rng.normal() > 0.0) as u8 as f64
                })
                .collect();
            (DenseMatrix::from_vec(m, d, x).unwrap(), y)
        };
        let shards = (0..n)
            .map(|i| {
                let m = 5 + 3 * i;
                let (x, y) = make(m);
                Shard {
                    client_id: i,
                    x,
                    y,
                    source_rows: (0..m).collect(),
                    corrupted: vec![false; m],
                }
            })
            .collect();
        let (x, y) = make(80);
        (
            shards,
            ValidationSet {
                x,
                y,
                source_rows: (0..80).collect(),
            },
        )
    }

    #[test]
    fn reward_examples() {
        let mut b = RewardBaseline::new(20).unwrap();
        assert_eq!(compute_reward(0.9, &b, RewardMode::Flipped), 0.0);
        b.update(0.5);
        assert_eq!(b.delta, 0.5);
        assert_eq!(compute_reward(0.5, &b, RewardMode::Flipped), 0.0);
        assert_eq!(compute_reward(0.5, &b, RewardMode::Literal), 0.0);
        assert!((compute_reward(0.7, &b, RewardMode::Literal) - 0.2).abs() < 1e-15);
        assert!((compute_reward(0.4, &b, RewardMode::Flipped) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn baseline_examples() {
        let mut b = RewardBaseline::new(20).unwrap();
        b.update(0.5);
        b.update(0.7);
        assert!((b.delta - 0.51).abs() < 1e-15);

        let mut one = RewardBaseline::new(1).unwrap();
        one.update(0.3);
        one.update(0.9);
        assert_eq!(one.delta, 0.9);

        let mut c = RewardBaseline::new(4).unwrap();
        c.update(1.0);
        for k in 1..=10 {
            c.update(0.0);
            assert!((c.delta - 0.75f64.powi(k)).abs() < 1e-15);
        }
        assert!(RewardBaseline::new(0).is_err());
    }

    #[test]
    fn reward_mode_round_trips() {
        for m in [RewardMode::Flipped, RewardMode::Literal] {
            assert_eq!(m.to_string().parse::<RewardMode>().unwrap(), m);
        }
        assert!("upside-down".parse::<RewardMode>().is_err());
    }

    #[test]
    fn zero_init_policy_gives_half() {
        let mut rng = RngStream::new(1, 0);
        let policy = MlpPolicy::new(6, &[4, 3], &mut rng).unwrap();
        let bundle = random_bundle(&mut rng, 7, 6);
        let (omega, _) = compute_probs(&policy, &bundle).unwrap();
        assert!(omega.iter().all(|&w| w == 0.5));
        let s = SelectionVector(vec![true, false, true, true, false, false, true]);
        let single = |bits: Vec<bool>| log_prob(&[0.5, 0.5], &SelectionVector(bits)).exp();
        for bits in [[false, false], [true, false], [false, true], [true, true]] {
            assert!((single(bits.to_vec()) - 0.25).abs() < 1e-15);
        }
        assert!((log_prob(&omega, &s) - 7.0 * 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn probabilities_follow_bundle_permutation() {
        let mut rng = RngStream::new(2, 0);
        let policy = randomized_policy(5, &[6, 4], &mut rng);
        let bundle = random_bundle(&mut rng, 8, 5);
        let (omega, _) = compute_probs(&policy, &bundle).unwrap();
        let perm = [3, 0, 7, 1, 6, 2, 5, 4];
        let permuted = GradientBundle::new(
            perm.to_vec(),
            bundle.grads.select_rows(&perm),
            vec![false; 8],
        )
        .unwrap();
        let (omega_p, _) = compute_probs(&policy, &permuted).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert!((omega_p[k] - omega[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn sampler_extremes_and_frequency() {
        let mut rng = RngStream::new(3, 0);
        assert_eq!(sample_selection(&mut rng, &[0.0; 5]).unwrap().count(), 0);
        assert_eq!(sample_selection(&mut rng, &[1.0; 5]).unwrap().count(), 5);
        let hits = (0..10_000)
            .filter(|_| sample_selection(&mut rng, &[0.3]).unwrap().0[0])
            .count();
        let freq = hits as f64 / 10_000.0;
        assert!((0.27..=0.33).contains(&freq), "{freq}");
        assert!(sample_selection(&mut rng, &[1.5]).is_err());
    }

    #[test]
    fn log_prob_grad_matches_finite_differences() {
        let mut rng = RngStream::new(4, 0);
        let h = 1e-6;
        for _ in 0..50 {
            let n = 1 + rng.below(6) as usize;
            let dim = 2 + rng.below(5) as usize;
            let policy = randomized_policy(dim, &[5, 3], &mut rng);
            let bundle = random_bundle(&mut rng, n, dim);
            let (_, trace) = compute_probs(&policy, &bundle).unwrap();
            let s = SelectionVector((0..n).map(|_| rng.next_f64() < 0.5).collect());
            let analytic = log_prob_grad(&policy, &trace, &s).unwrap();
            let mut probe = policy.clone();
            let mut num = 0.0;
            let mut den = 0.0;
            for k in 0..policy.n_params() {
                let base = policy.params()[k];
                probe.params_mut()[k] = base + h;
                let up = log_prob(&compute_probs(&probe, &bundle).unwrap().0, &s);
                probe.params_mut()[k] = base - h;
                let down = log_prob(&compute_probs(&probe, &bundle).unwrap().0, &s);
                probe.params_mut()[k] = base;
                let fd = (up - down) / (2.0 * h);
                num += (analytic[k] - fd).powi(2);
                den += analytic[k].powi(2);
            }
            let rel = num.sqrt() / den.sqrt().max(1e-12);
            assert!(rel <= 1e-4, "relative error {rel}");
        }
    }

    #[test]
    fn output_bias_term_at_zero_init() {
        // One client, ω = 0.5: the output-bias component is ±1/0.5 · 0.25.
        let mut rng = RngStream::new(5, 0);
        let policy = MlpPolicy::new(3, &[4], &mut rng).unwrap();
        let bundle = random_bundle(&mut rng, 1, 3);
        let (_, trace) = compute_probs(&policy, &bundle).unwrap();
        let last = policy.n_params() - 1;
        let g1 = log_prob_grad(&policy, &trace, &SelectionVector(vec![true])).unwrap();
        let g0 = log_prob_grad(&policy, &trace, &SelectionVector(vec![false])).unwrap();
        assert!((g1[last] - 0.5).abs() < 1e-15);
        assert!((g0[last] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn saturated_selection_has_vanishing_gradient() {
        let policy = MlpPolicy::from_parts(vec![1, 1], vec![0.0, 40.0]).unwrap();
        let bundle = GradientBundle::new(vec![0], DenseMatrix::from_vec(1, 1, vec![1.0]).unwrap(), vec![false]).unwrap();
        let (_, trace) = compute_probs(&policy, &bundle).unwrap();
        let g = log_prob_grad(&policy, &trace, &SelectionVector(vec![true])).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn zero_reward_leaves_policy_alone() {
        let mut rng = RngStream::new(6, 0);
        let mut policy = randomized_policy(3, &[4], &mut rng);
        let before = policy.clone();
        let mut adam = AdamState::new(policy.n_params(), 1e-3);
        evaluator_update(&mut adam, &mut policy, 0.0, &vec![1.0; before.n_params()]).unwrap();
        assert_eq!(policy, before);
        assert_eq!(adam.step, 0);
    }

    #[test]
    fn identical_updates_are_deterministic() {
        let mut rng = RngStream::new(7, 0);
        let policy = randomized_policy(4, &[3], &mut rng);
        let grad: Vec<f64> = (0..policy.n_params()).map(|_| rng.normal()).collect();
        let run = || {
            let mut p = policy.clone();
            let mut adam = AdamState::new(p.n_params(), 1e-3);
            evaluator_update(&mut adam, &mut p, 0.3, &grad).unwrap();
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn rewarded_selection_becomes_more_likely() {
        // Two clients; client 0 selected, client 1 not, loss improved.
        let mut rng = RngStream::new(8, 0);
        let mut policy = randomized_policy(3, &[4], &mut rng);
        let bundle = random_bundle(&mut rng, 2, 3);
        let (omega, trace) = compute_probs(&policy, &bundle).unwrap();
        let s = SelectionVector(vec![true, false]);
        let mut baseline = RewardBaseline::new(20).unwrap();
        baseline.update(0.6);
        let r = compute_reward(0.5, &baseline, RewardMode::Flipped);
        assert!(r > 0.0);
        let g = log_prob_grad(&policy, &trace, &s).unwrap();
        let mut adam = AdamState::new(policy.n_params(), 1e-3);
        let before = log_prob(&omega, &s);
        evaluator_update(&mut adam, &mut policy, r, &g).unwrap();
        let after = log_prob(&compute_probs(&policy, &bundle).unwrap().0, &s);
        assert!(after > before);
    }

    #[test]
    fn forced_full_selection_is_fedavg() {
        let mut rng = RngStream::new(9, 0);
        let (shards, validation) = toy_shards(&mut rng, 6, 4);
        let config = RcceConfig {
            force_omega: Some(1.0),
            hidden: vec![3],
            ..RcceConfig::default()
        };
        let mut rcce = RcceTrainer::new(4, 9, config).unwrap();
        let mut fedavg = FedAvgRunner::new(GlobalModel::zeros(4), DEFAULT_TASK_LR);
        for _ in 0..50 {
            rcce.run_round(&shards, &validation).unwrap();
            fedavg.run_round(&shards).unwrap();
            assert_eq!(rcce.model, fedavg.model);
        }
    }

    #[test]
    fn empty_selection_keeps_model_but_trains_evaluator() {
        let mut rng = RngStream::new(10, 0);
        let (shards, validation) = toy_shards(&mut rng, 3, 4);
        let config = RcceConfig {
            force_omega: Some(0.0),
            hidden: vec![3],
            ..RcceConfig::default()
        };
        let mut t = RcceTrainer::new(4, 1, config).unwrap();
        let r = t.run_round(&shards, &validation).unwrap();
        assert_eq!(r.n_selected(), 0);
        assert!(t.model.theta.iter().all(|&v| v == 0.0));
        assert_eq!(t.model.round, 1);
    }

    #[test]
    fn trainer_is_reproducible() {
        let mut rng = RngStream::new(11, 0);
        let (shards, validation) = toy_shards(&mut rng, 5, 4);
        let config = RcceConfig {
            hidden: vec![6, 3],
            evaluator_lr: 1e-2,
            ..RcceConfig::default()
        };
        let run = || {
            let mut t = RcceTrainer::new(4, 21, config.clone()).unwrap();
            let log = t.train(&shards, &validation, 20).unwrap();
            (t.checkpoint(), log)
        };
        let (a, la) = run();
        let (b, lb) = run();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert_eq!(la[0].reward, 0.0);
        assert_eq!(la[0].delta_after, la[0].val_loss);
    }

    #[test]
    fn checkpoint_resume_keeps_state() {
        let mut rng = RngStream::new(12, 0);
        let (shards, validation) = toy_shards(&mut rng, 4, 3);
        let config = RcceConfig {
            hidden: vec![4],
            ..RcceConfig::default()
        };
        let mut t = RcceTrainer::new(3, 2, config.clone()).unwrap();
        t.train(&shards, &validation, 5).unwrap();
        let resumed = RcceTrainer::from_checkpoint(t.checkpoint(), 2, config).unwrap();
        assert_eq!(resumed.model, t.model);
        assert_eq!(resumed.policy, t.policy);
        assert_eq!(resumed.baseline, t.baseline);
    }

    #[test]
    fn constant_policy_scores_half() {
        let mut rng = RngStream::new(13, 0);
        let (shards, _) = toy_shards(&mut rng, 4, 3);
        let policy = MlpPolicy::new(4, &[5], &mut rng).unwrap();
        let scores = score_contributions(&policy, &ParamVector::zeros(4), &shards, 10, 0.1).unwrap();
        assert_eq!(scores, vec![0.5; 4]);
    }

    #[test]
    fn removal_guard_and_zero_removal() {
        let mut rng = RngStream::new(14, 0);
        let (shards, validation) = toy_shards(&mut rng, 4, 3);
        let policy = randomized_policy(4, &[5], &mut rng);
        let theta = ParamVector::zeros(4);
        assert!(retrain_with_removal(&policy, &theta, &shards, &validation, 3, 4, Removal::Highest, 0.1).is_err());
        let curve = retrain_with_removal(&policy, &theta, &shards, &validation, 10, 0, Removal::Lowest, 0.1).unwrap();
        let base = FedAvgRunner::new(GlobalModel::zeros(3), 0.1)
            .train_curve(&shards, &validation, 10)
            .unwrap();
        assert_eq!(curve, base);
    }

    #[test]
    fn round_log_layout() {
        let r = SelectionRound {
            round: 1,
            omega: vec![0.25, 0.75],
            selection: SelectionVector(vec![true, false]),
            reward: 0.0,
            val_loss: 0.5,
            val_acc: 0.75,
            delta_before: 0.0,
            delta_after: 0.5,
        };
        let mut buf = Vec::new();
        write_round_log(&mut buf, &[r]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{ROUND_LOG_HEADER}\n1,0.5,0.75,0,0.5,1,0.25,0.5,0.75\n")
        );
    }
}
