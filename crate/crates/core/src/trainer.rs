//! Training loops that record the rank of the product matrix.
//!
//! One update is `W_i ← W_i − η (∂L/∂W_i + ε_i)`; the noise mode decides
//! whether `ε_i` is drawn, whether the data are perturbed first, or whether
//! dropout masks enter the forward pass. Every mode resamples its noise on
//! every iteration.

use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, DenseMatrix, RankTolerance};
use crate::netcore::{
    backprop_with_masks, check_compatible, network_loss, product_matrix, Activation, Dataset,
    NetworkWeights,
};
use crate::noisekit::{
    dropout_mask, isotropic_noise, perturb_gradient, NoiseMode, NoiseSpec, RngStream,
};

/// Loss above which a run counts as diverged.
pub const DIVERGENCE_LOSS: f64 = 1e12;

const NOISE_STREAM: u64 = 1;
const BATCH_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub iterations: usize,
    /// Mini-batch size; `0` means full batch.
    pub batch_size: usize,
    pub noise: NoiseSpec,
    pub rank_tol: RankTolerance,
    pub record_layer_ranks: bool,
    /// Seeds mini-batch sampling. Noise draws use `noise.seed`.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            iterations: 100,
            batch_size: 0,
            noise: NoiseSpec::none(),
            rank_tol: RankTolerance::DEFAULT,
            record_layer_ranks: false,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub iteration: usize,
    pub loss: f64,
    pub rank_product: usize,
    pub layer_ranks: Option<Vec<usize>>,
}

/// Loss and ranks before the first update and after every update.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RankTrajectory {
    pub records: Vec<TrajectoryRecord>,
}

impl RankTrajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectoryRecord> {
        self.records.last()
    }

    pub fn final_rank(&self) -> Option<usize> {
        self.last().map(|r| r.rank_product)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.rank_product).collect()
    }

    pub fn losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.loss).collect()
    }

    /// First recorded iteration at which the product reaches `rank`.
    pub fn first_reaching(&self, rank: usize) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.rank_product >= rank)
            .map(|r| r.iteration)
    }

    /// Records whose product rank sits below the running maximum.
    pub fn rank_dips(&self) -> Vec<usize> {
        let mut best = 0;
        let mut dips = Vec::new();
        for r in &self.records {
            if r.rank_product < best {
                dips.push(r.iteration);
            }
            best = best.max(r.rank_product);
        }
        dips
    }

    /// Non-decreasing product rank, allowing up to `max_dips` isolated
    /// one-record dips that recover on the next record.
    pub fn is_rank_monotone(&self, max_dips: usize) -> bool {
        let dips = self.rank_dips();
        if dips.len() > max_dips {
            return false;
        }
        // each dip must be a single record: the next one is not a dip
        dips.windows(2).all(|w| w[1] != w[0] + 1)
            && dips
                .last()
                .is_none_or(|&t| self.records.last().map(|r| r.iteration) != Some(t))
    }
}

pub fn record_state(
    w: &NetworkWeights,
    act: Activation,
    d: &Dataset,
    iteration: usize,
    tol: RankTolerance,
    layer_ranks: bool,
) -> Result<TrajectoryRecord> {
    let loss = network_loss(w, act, d)?;
    let rank_product = numerical_rank(&product_matrix(w), tol)?;
    let layer_ranks = if layer_ranks {
        Some(
            w.layers()
                .iter()
                .map(|wi| numerical_rank(wi, tol))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(TrajectoryRecord {
        iteration,
        loss,
        rank_product,
        layer_ranks,
    })
}

/// Uniform mini-batches without replacement; the sample order is
/// reshuffled whenever fewer than a batch of unused samples remain.
struct BatchSampler {
    order: Vec<usize>,
    pos: usize,
    batch: usize,
    rng: RngStream,
}

impl BatchSampler {
    fn new(m: usize, batch: usize, rng: RngStream) -> Self {
        Self {
            order: (0..m).collect(),
            pos: m,
            batch,
            rng,
        }
    }

    fn next_batch(&mut self) -> Vec<usize> {
        if self.pos + self.batch > self.order.len() {
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let cols = self.order[self.pos..self.pos + self.batch].to_vec();
        self.pos += self.batch;
        cols
    }
}

/// Gradient of the loss restricted to `columns`, rescaled by `m / b` so that
/// it is an unbiased estimate of the full-batch gradient.
pub fn minibatch_gradient(
    w: &NetworkWeights,
    act: Activation,
    d: &Dataset,
    columns: &[usize],
) -> Result<Vec<DenseMatrix>> {
    check_compatible(w, d)?;
    if columns.is_empty() {
        return Err(Error::invalid("empty mini-batch"));
    }
    let batch = d.subset(columns);
    let scale = d.samples() as f64 / columns.len() as f64;
    Ok(backprop_with_masks(w, act, &batch.x, &batch.y, None)
        .into_iter()
        .map(|g| g.scale(scale))
        .collect())
}

/// Runs `cfg.iterations` updates from `w0`.
///
/// On divergence (loss above [`DIVERGENCE_LOSS`] or non-finite) the error
/// carries every record collected so far.
pub fn train(
    w0: &NetworkWeights,
    act: Activation,
    d: &Dataset,
    cfg: &TrainConfig,
) -> Result<(NetworkWeights, RankTrajectory)> {
    check_compatible(w0, d)?;
    if cfg.learning_rate.is_nan() || cfg.learning_rate < 0.0 || cfg.learning_rate.is_infinite() {
        return Err(Error::invalid(format!(
            "learning rate must be finite and >= 0, got {}",
            cfg.learning_rate
        )));
    }
    let m = d.samples();
    if cfg.batch_size > m {
        return Err(Error::invalid(format!(
            "batch size {} exceeds sample count {m}",
            cfg.batch_size
        )));
    }
    let mode = cfg.noise.mode.validate()?;

    let mut w = w0.clone();
    let mut trajectory = RankTrajectory::default();
    let mut noise_rng = RngStream::new(cfg.noise.seed, NOISE_STREAM);
    let mut sampler = (cfg.batch_size > 0 && cfg.batch_size < m)
        .then(|| BatchSampler::new(m, cfg.batch_size, RngStream::new(cfg.seed, BATCH_STREAM)));

    trajectory.records.push(record_state(
        &w,
        act,
        d,
        0,
        cfg.rank_tol,
        cfg.record_layer_ranks,
    )?);

    for t in 1..=cfg.iterations {
        let columns = sampler.as_mut().map(BatchSampler::next_batch);
        let batch = match &columns {
            Some(cols) => d.subset(cols),
            None => d.clone(),
        };
        let b = batch.samples();
        let (x, y) = match mode {
            NoiseMode::Input { beta } => {
                let eps = isotropic_noise(batch.x.rows(), b, beta, b, &mut noise_rng);
                (&batch.x + &eps, batch.y)
            }
            NoiseMode::Output { sigma } => {
                let eps = noise_rng.gaussian_matrix(batch.y.rows(), b, sigma);
                (batch.x, &batch.y + &eps)
            }
            _ => (batch.x, batch.y),
        };
        let masks = if mode.is_dropout() {
            let mut masks = vec![None];
            for layer in 1..w.depth() {
                let rows = w.layer(layer).cols();
                masks.push(Some(dropout_mask(rows, b, mode, &mut noise_rng)?));
            }
            Some(masks)
        } else {
            None
        };

        let scale = m as f64 / b as f64;
        let grads = backprop_with_masks(&w, act, &x, &y, masks.as_deref());
        for (layer, grad) in grads.into_iter().enumerate() {
            let grad = match mode {
                NoiseMode::Gradient { sigma } => {
                    perturb_gradient(&grad.scale(scale), sigma, &mut noise_rng)?
                }
                _ if b < m => grad.scale(scale),
                _ => grad,
            };
            w.layers_mut()[layer].axpy(-cfg.learning_rate, &grad);
        }

        let loss = network_loss(&w, act, d)?;
        if !loss.is_finite() || loss > DIVERGENCE_LOSS {
            if loss.is_finite() && w.layers().iter().all(DenseMatrix::is_finite) {
                trajectory.records.push(record_state(
                    &w,
                    act,
                    d,
                    t,
                    cfg.rank_tol,
                    cfg.record_layer_ranks,
                )?);
            }
            return Err(Error::Divergence {
                iteration: t,
                loss,
                trajectory: Box::new(trajectory),
            });
        }
        trajectory.records.push(record_state(
            &w,
            act,
            d,
            t,
            cfg.rank_tol,
            cfg.record_layer_ranks,
        )?);
    }
    Ok((w, trajectory))
}

/// Mini-batch gradient spread around the full-batch gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientStats {
    /// Mean of `‖g − G‖²` over the trials, gradients stacked over all layers.
    pub gamma_hat: f64,
    /// `‖g − G‖` per trial.
    pub samples: Vec<f64>,
}

pub(crate) fn stacked_distance_sq(a: &[DenseMatrix], b: &[DenseMatrix]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).frobenius_norm_sq())
        .sum()
}

/// Estimates `γ` in `E‖g − G‖² ≤ γ` for a linear network by drawing
/// `trials` uniform mini-batches of `batch_size` samples.
pub fn sgd_gradient_stats(
    w: &NetworkWeights,
    d: &Dataset,
    batch_size: usize,
    trials: usize,
    rng: &mut RngStream,
) -> Result<GradientStats> {
    let m = d.samples();
    if batch_size == 0 || batch_size > m {
        return Err(Error::invalid(format!(
            "batch size must lie in 1..={m}, got {batch_size}"
        )));
    }
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    let full = minibatch_gradient(w, Activation::LINEAR, d, &(0..m).collect::<Vec<_>>())?;
    let mut samples = Vec::with_capacity(trials);
    let mut total = 0.0;
    for _ in 0..trials {
        let mut cols = sample_indices(rng, m, batch_size).into_vec();
        cols.sort_unstable();
        let g = minibatch_gradient(w, Activation::LINEAR, d, &cols)?;
        let dist_sq = stacked_distance_sq(&g, &full);
        total += dist_sq;
        samples.push(dist_sq.sqrt());
    }
    Ok(GradientStats {
        gamma_hat: total / trials as f64,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::{squared_loss, ActivationKind};

    fn scalar(v: f64) -> DenseMatrix {
        DenseMatrix::from_vec(1, 1, vec![v]).unwrap()
    }

    fn small_problem(seed: u64) -> (NetworkWeights, Dataset) {
        let mut rng = RngStream::new(seed, 0);
        let w = NetworkWeights::new(vec![
            rng.gaussian_matrix(4, 5, 0.3),
            rng.gaussian_matrix(3, 4, 0.3),
        ])
        .unwrap();
        let d = Dataset::new(
            rng.gaussian_matrix(5, 20, 1.0),
            rng.gaussian_matrix(3, 20, 1.0),
        )
        .unwrap();
        (w, d)
    }

    #[test]
    fn zero_learning_rate_is_constant() {
        let (w, d) = small_problem(1);
        let cfg = TrainConfig {
            learning_rate: 0.0,
            iterations: 3,
            ..TrainConfig::default()
        };
        let (w1, traj) = train(&w, Activation::LINEAR, &d, &cfg).unwrap();
        assert_eq!(w1, w);
        assert_eq!(traj.len(), 4);
        assert!(traj
            .records
            .windows(2)
            .all(|p| p[0].loss == p[1].loss && p[0].rank_product == p[1].rank_product));
    }

    #[test]
    fn scalar_hand_iteration() {
        // grad = (0.5·1 − 1)·1 = −0.5 → w = 0.5 + 0.1·0.5 = 0.55
        let w = NetworkWeights::new(vec![scalar(0.5)]).unwrap();
        let d = Dataset::new(scalar(1.0), scalar(1.0)).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.1,
            iterations: 1,
            ..TrainConfig::default()
        };
        let (w1, traj) = train(&w, Activation::LINEAR, &d, &cfg).unwrap();
        assert!((w1.layer(0).get(0, 0) - 0.55).abs() < 1e-15);
        assert_eq!(traj.records[0].iteration, 0);
        assert_eq!(traj.records[1].iteration, 1);
        assert!((traj.records[1].loss - 0.5 * 0.45f64.powi(2)).abs() < 1e-15);
    }

    #[test]
    fn plain_gd_decreases_loss() {
        let (w, d) = small_problem(2);
        let cfg = TrainConfig {
            learning_rate: 2e-3,
            iterations: 60,
            ..TrainConfig::default()
        };
        let (_, traj) = train(&w, Activation::LINEAR, &d, &cfg).unwrap();
        let losses = traj.losses();
        assert!(losses.windows(2).all(|p| p[1] <= p[0]), "{losses:?}");
    }

    #[test]
    fn training_is_deterministic() {
        let (w, d) = small_problem(3);
        for mode in [
            NoiseMode::Gradient { sigma: 0.1 },
            NoiseMode::Input { beta: 0.1 },
            NoiseMode::Output { sigma: 0.1 },
            NoiseMode::DropoutBernoulli { p: 0.2 },
            NoiseMode::DropoutGaussian { sigma: 0.2 },
        ] {
            let cfg = TrainConfig {
                learning_rate: 1e-3,
                iterations: 10,
                batch_size: 7,
                noise: NoiseSpec::new(mode, 9).unwrap(),
                record_layer_ranks: true,
                seed: 4,
                ..TrainConfig::default()
            };
            let a = train(&w, Activation::hidden(ActivationKind::Tanh), &d, &cfg).unwrap();
            let b = train(&w, Activation::hidden(ActivationKind::Tanh), &d, &cfg).unwrap();
            assert_eq!(a, b, "{mode}");
        }
    }

    #[test]
    fn divergence_keeps_partial_trajectory() {
        let (w, d) = small_problem(4);
        let cfg = TrainConfig {
            learning_rate: 10.0,
            iterations: 50,
            ..TrainConfig::default()
        };
        match train(&w, Activation::LINEAR, &d, &cfg) {
            Err(Error::Divergence {
                iteration,
                trajectory,
                ..
            }) => {
                assert!(iteration < 50);
                assert!(!trajectory.is_empty());
                assert_eq!(trajectory.records[0].iteration, 0);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn batch_larger_than_data_rejected() {
        let (w, d) = small_problem(5);
        let cfg = TrainConfig {
            batch_size: 21,
            ..TrainConfig::default()
        };
        assert!(train(&w, Activation::LINEAR, &d, &cfg).is_err());
    }

    #[test]
    fn sampler_never_repeats_within_a_pass() {
        let mut s = BatchSampler::new(10, 3, RngStream::new(1, 2));
        for _ in 0..5 {
            let mut seen = Vec::new();
            for _ in 0..3 {
                seen.extend(s.next_batch());
            }
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), 9);
        }
    }

    #[test]
    fn full_batch_has_zero_spread() {
        let (w, d) = small_problem(6);
        let stats = sgd_gradient_stats(&w, &d, 20, 5, &mut RngStream::new(1, 0)).unwrap();
        assert!(stats.gamma_hat < 1e-20);
        assert!(stats.samples.iter().all(|&s| s < 1e-10));
    }

    #[test]
    fn bigger_batches_have_less_spread() {
        let (w, d) = small_problem(7);
        let small = sgd_gradient_stats(&w, &d, 4, 2000, &mut RngStream::new(2, 0)).unwrap();
        let large = sgd_gradient_stats(&w, &d, 8, 2000, &mut RngStream::new(2, 0)).unwrap();
        assert!(large.gamma_hat < small.gamma_hat);
    }

    #[test]
    fn minibatch_gradient_is_unbiased_over_partition() {
        let (w, d) = small_problem(8);
        let full =
            minibatch_gradient(&w, Activation::LINEAR, &d, &(0..20).collect::<Vec<_>>()).unwrap();
        let mut avg: Vec<DenseMatrix> = full
            .iter()
            .map(|g| DenseMatrix::zeros(g.rows(), g.cols()))
            .collect();
        for chunk in (0..20).collect::<Vec<_>>().chunks(5) {
            for (a, g) in avg
                .iter_mut()
                .zip(minibatch_gradient(&w, Activation::LINEAR, &d, chunk).unwrap())
            {
                a.axpy(0.25, &g);
            }
        }
        assert!(stacked_distance_sq(&avg, &full) < 1e-20);
        let _ = squared_loss(&w, &d).unwrap();
    }

    #[test]
    fn monotone_with_hysteresis() {
        let mk = |ranks: &[usize]| RankTrajectory {
            records: ranks
                .iter()
                .enumerate()
                .map(|(i, &r)| TrajectoryRecord {
                    iteration: i,
                    loss: 0.0,
                    rank_product: r,
                    layer_ranks: None,
                })
                .collect(),
        };
        assert!(mk(&[1, 2, 2, 3]).is_rank_monotone(0));
        assert!(!mk(&[1, 2, 1, 3]).is_rank_monotone(0));
        assert!(mk(&[1, 2, 1, 3]).is_rank_monotone(1));
        assert!(!mk(&[1, 3, 2, 2, 3]).is_rank_monotone(1));
        assert!(!mk(&[1, 3, 2, 3, 2, 3]).is_rank_monotone(1));
        assert!(!mk(&[1, 3, 2]).is_rank_monotone(1));
        assert_eq!(mk(&[1, 2, 3]).first_reaching(3), Some(2));
    }
}
