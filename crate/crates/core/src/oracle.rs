//! Randomised checks that turn the rank and noise identities into
//! pass/fail reports.
//!
//! Every check is deterministic given its [`RngStream`]. `worst_violation`
//! is the largest deviation seen, divided by the check's tolerance where it
//! has one, so values above 1 mark failing comparisons. Rank checks report
//! the largest rank deficit instead.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::datagen::synth_dataset;
use crate::error::{Error, Result};
use crate::linalg::{
    matrix_cosine, numerical_rank, rank_bump, rank_bump_cosine, relative_error, singular_values,
    DenseMatrix, RankTolerance,
};
use crate::netcore::{
    backprop_gradients, closed_form_gradient, finite_difference_gradient, Activation,
    ActivationKind, Dataset, NetworkWeights,
};
use crate::noisekit::{
    gaussian_dropout_expected_loss, input_noise_expected_loss, input_noise_loss_sample,
    input_noise_phi, output_dropout_loss_sample, output_noise_gradient,
    weight_dropout_expected_loss, weight_dropout_loss_sample, RngStream,
};
use crate::trainer::{minibatch_gradient, sgd_gradient_stats, stacked_distance_sq};

/// Signature of [`rank_bump`]; checks take it as a parameter so a tampered
/// implementation can be fed through the harness.
pub type BumpFn = fn(&DenseMatrix, f64) -> Result<DenseMatrix>;

pub const SPECTRAL_TOL: f64 = 1e-10;
pub const COSINE_TOL: f64 = 1e-12;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const EXACT_TOL: f64 = 1e-12;
pub const GRADIENT_TOL: f64 = 1e-5;
/// Width of the Monte-Carlo acceptance band, in standard errors.
pub const MC_BAND: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub worst_violation: f64,
    pub pass: bool,
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {:.6e} {}",
            self.name, self.trials, self.failures, self.worst_violation, self.pass
        )
    }
}

/// Accumulates trial outcomes for one report.
struct Tally {
    name: &'static str,
    trials: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            trials: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    /// One trial with the given violation score; fails when `!ok`.
    fn record(&mut self, violation: f64, ok: bool) {
        self.trials += 1;
        if violation.is_nan() {
            self.worst = f64::INFINITY;
        } else {
            self.worst = self.worst.max(violation);
        }
        if !ok {
            self.failures += 1;
        }
    }

    fn fail(&mut self) {
        self.record(f64::INFINITY, false);
    }

    fn report(self) -> OracleReport {
        let pass = self.failures == 0;
        self.report_with(pass)
    }

    fn report_with(self, pass: bool) -> OracleReport {
        OracleReport {
            name: self.name.to_string(),
            trials: self.trials,
            failures: self.failures,
            worst_violation: self.worst,
            pass,
        }
    }
}

fn integer_matrix(rows: usize, cols: usize, rng: &mut RngStream) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-3i32..=3) as f64)
}

/// Integer-valued `rows × cols` matrix of rank exactly `rank`, as a product
/// of integer factors, redrawn until the rank is right.
fn integer_matrix_of_rank(
    rows: usize,
    cols: usize,
    rank: usize,
    rng: &mut RngStream,
) -> DenseMatrix {
    if rank == 0 {
        return DenseMatrix::zeros(rows, cols);
    }
    loop {
        let m = integer_matrix(rows, rank, rng).matmul(&integer_matrix(rank, cols, rng));
        if matches!(numerical_rank(&m, RankTolerance::DEFAULT), Ok(r) if r == rank) {
            return m;
        }
    }
}

fn gaussian_of_rank(rows: usize, cols: usize, rank: usize, rng: &mut RngStream) -> DenseMatrix {
    rng.gaussian_matrix(rows, rank, 1.0)
        .matmul(&rng.gaussian_matrix(rank, cols, 1.0))
}

fn rank(m: &DenseMatrix) -> Result<usize> {
    numerical_rank(m, RankTolerance::DEFAULT)
}

/// Applies `bump` `k` times, each with `ε` a random fraction in `[0.1, 0.9]`
/// of the smallest retained singular value (or `1` for a zero matrix).
fn bump_times(m: &DenseMatrix, k: usize, bump: BumpFn, rng: &mut RngStream) -> Result<DenseMatrix> {
    let mut out = m.clone();
    for _ in 0..k {
        let sigma = singular_values(&out)?;
        let r = crate::linalg::rank_from_spectrum(&sigma, RankTolerance::DEFAULT);
        let base = if r == 0 { 1.0 } else { sigma[r - 1] };
        let frac = 0.1 + 0.8 * rng.uniform();
        out = bump(&out, frac * base)?;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
enum RankClaim {
    /// `r_B = n − k`, `r_A ≥ n − k`; bump `B`.
    Right,
    /// `r_A = n − k`; bump `A`.
    Left,
    /// `r_A + r_B = n − 2k`; bump both.
    Both,
}

/// Random instance `(A, B, Â, B̂)` satisfying the claim's preconditions, or
/// `None` when `max_dim` is too small for it.
fn rank_instance(
    claim: RankClaim,
    max_dim: usize,
    bump: BumpFn,
    rng: &mut RngStream,
) -> Result<Option<(DenseMatrix, DenseMatrix, DenseMatrix, DenseMatrix)>> {
    let k = rng.random_range(1..=2usize);
    let min_n = match claim {
        RankClaim::Both => 2 * k + 2,
        _ => k + 1,
    };
    if max_dim < min_n {
        return Ok(None);
    }
    let n = rng.random_range(min_n..=max_dim);
    let (p, q, r_a, r_b) = match claim {
        RankClaim::Right => {
            let p = rng.random_range(n - k..=max_dim);
            let q = rng.random_range(n..=max_dim);
            let r_a = rng.random_range(n - k..=p.min(n));
            (p, q, r_a, n - k)
        }
        RankClaim::Left => {
            let p = rng.random_range(n..=max_dim);
            let q = rng.random_range(1..=max_dim);
            let r_b = rng.random_range(0..=q.min(n));
            (p, q, n - k, r_b)
        }
        RankClaim::Both => {
            let p = rng.random_range(n..=max_dim);
            let q = rng.random_range(n..=max_dim);
            let r_a = rng.random_range(1..=n - 2 * k - 1);
            (p, q, r_a, n - 2 * k - r_a)
        }
    };
    let a = integer_matrix_of_rank(p, n, r_a, rng);
    let b = integer_matrix_of_rank(n, q, r_b, rng);
    // the generator's own contract
    debug_assert_eq!(rank(&a)?, r_a);
    debug_assert_eq!(rank(&b)?, r_b);
    let (ka, kb) = match claim {
        RankClaim::Right => (0, k),
        RankClaim::Left => (k, 0),
        RankClaim::Both => (k, k),
    };
    let a_hat = bump_times(&a, ka, bump, rng)?;
    let b_hat = bump_times(&b, kb, bump, rng)?;
    Ok(Some((a, b, a_hat, b_hat)))
}

/// `r(A·B̂) ≥ r(A·B)`, `r(Â·B) ≥ r(A·B)` and `r(Â·B̂) ≥ r(A·B)` on random
/// integer matrices meeting each claim's rank preconditions.
pub fn check_rank_lemmas(trials: usize, max_dim: usize, rng: &mut RngStream) -> OracleReport {
    check_rank_lemmas_with(trials, max_dim, rng, rank_bump)
}

pub fn check_rank_lemmas_with(
    trials: usize,
    max_dim: usize,
    rng: &mut RngStream,
    bump: BumpFn,
) -> OracleReport {
    let mut tally = Tally::new("rank_lemmas");
    let claims = [RankClaim::Right, RankClaim::Left, RankClaim::Both];
    for t in 0..trials {
        let claim = claims[t % claims.len()];
        let outcome = rank_instance(claim, max_dim, bump, rng).and_then(|inst| {
            inst.map(|(a, b, a_hat, b_hat)| {
                let before = rank(&a.matmul(&b))?;
                let after = rank(&a_hat.matmul(&b_hat))?;
                Ok(before.saturating_sub(after))
            })
            .transpose()
        });
        match outcome {
            Ok(Some(deficit)) => tally.record(deficit as f64, deficit == 0),
            Ok(None) => {}
            Err(_) => tally.fail(),
        }
    }
    tally.report()
}

/// Rank bump on random rank-deficient Gaussian matrices: rank rises by
/// exactly one, `‖A − Â‖₂ = ε`, and the cosine is positive and matches
/// its closed form.
pub fn check_rank_bump_lemmas(trials: usize, rng: &mut RngStream) -> OracleReport {
    check_rank_bump_lemmas_with(trials, rng, rank_bump)
}

pub fn check_rank_bump_lemmas_with(
    trials: usize,
    rng: &mut RngStream,
    bump: BumpFn,
) -> OracleReport {
    let mut tally = Tally::new("rank_bump");

    // a full-rank input must be refused
    let full = rng.gaussian_matrix(4, 3, 1.0);
    match bump(&full, 1e-3) {
        Err(Error::FullRank { .. }) => tally.record(0.0, true),
        _ => tally.fail(),
    }

    for t in 0..trials {
        let rows = rng.random_range(2..=20usize);
        let cols = rng.random_range(2..=20usize);
        let r = rng.random_range(1..rows.min(cols));
        let a = gaussian_of_rank(rows, cols, r, rng);
        // every tenth trial probes the upper end of the allowed range
        let frac = if t % 10 == 0 {
            0.9
        } else {
            0.05 + 0.85 * rng.uniform()
        };
        let outcome = (|| -> Result<(f64, bool)> {
            let sigma = singular_values(&a)?;
            let eps = frac * sigma[r - 1];
            let a_hat = bump(&a, eps)?;
            let rank_ok = rank(&a_hat)? == rank(&a)? + 1;
            let dist = (&a - &a_hat).spectral_norm()?;
            let cos = matrix_cosine(&a, &a_hat)?;
            let closed = rank_bump_cosine(&sigma[..r], eps);
            let v_dist = (dist - eps).abs() / SPECTRAL_TOL;
            let v_cos = (cos - closed).abs() / COSINE_TOL;
            let ok = rank_ok && v_dist <= 1.0 && v_cos <= 1.0 && cos > 0.0;
            let rank_violation = if rank_ok { 0.0 } else { f64::INFINITY };
            Ok((v_dist.max(v_cos).max(rank_violation), ok))
        })();
        match outcome {
            Ok((v, ok)) => tally.record(v, ok),
            Err(_) => tally.fail(),
        }
    }
    tally.report()
}

fn random_linear_net(
    depth: usize,
    max_width: usize,
    rng: &mut RngStream,
) -> (NetworkWeights, usize) {
    let dims: Vec<usize> = (0..=depth)
        .map(|_| rng.random_range(1..=max_width))
        .collect();
    let layers = dims
        .windows(2)
        .map(|p| rng.gaussian_matrix(p[1], p[0], 0.5))
        .collect();
    (NetworkWeights::new(layers).expect("chained dims"), dims[0])
}

fn random_problem(
    depth: usize,
    max_width: usize,
    rng: &mut RngStream,
) -> (NetworkWeights, Dataset) {
    let (w, dx) = random_linear_net(depth, max_width, rng);
    let m = rng.random_range(2..=8usize);
    let d = Dataset::new(
        rng.gaussian_matrix(dx, m, 1.0),
        rng.gaussian_matrix(w.output_dim(), m, 1.0),
    )
    .expect("matching samples");
    (w, d)
}

/// Relative gap `‖lhs − rhs‖ / max(‖lhs‖, ‖rhs‖, ‖scale‖)`.
fn rel_gap(lhs: &DenseMatrix, rhs: &DenseMatrix, scale: &DenseMatrix) -> f64 {
    let denom = lhs
        .frobenius_norm()
        .max(rhs.frobenius_norm())
        .max(scale.frobenius_norm());
    if denom == 0.0 {
        0.0
    } else {
        (lhs - rhs).frobenius_norm() / denom
    }
}

/// `grad(X + ε) − grad(X) = φ` for every layer of random linear networks
/// of depth 2–4. The first trial uses `ε = 0` and demands exact zeros.
pub fn check_input_noise_identity(trials: usize, rng: &mut RngStream) -> OracleReport {
    let mut tally = Tally::new("input_noise_identity");
    for t in 0..trials {
        let depth = rng.random_range(2..=4usize);
        let (w, d) = random_problem(depth, 6, rng);
        let std = if t == 0 { 0.0 } else { 0.05 + rng.uniform() };
        let eps = rng.gaussian_matrix(d.x.rows(), d.x.cols(), std);
        let noisy = Dataset::new(&d.x + &eps, d.y.clone()).expect("same shape");
        let outcome = (0..depth)
            .map(|i| -> Result<f64> {
                let clean = closed_form_gradient(&w, Activation::LINEAR, &d, i)?;
                let shifted = closed_form_gradient(&w, Activation::LINEAR, &noisy, i)?;
                let phi = input_noise_phi(&w, &d, &eps, i)?;
                let diff = &shifted - &clean;
                if std == 0.0 {
                    Ok(if diff.is_zero() && phi.is_zero() {
                        0.0
                    } else {
                        f64::INFINITY
                    })
                } else {
                    Ok(rel_gap(&diff, &phi, &shifted) / IDENTITY_TOL)
                }
            })
            .collect::<Result<Vec<f64>>>();
        match outcome {
            Ok(v) => {
                let worst = v.into_iter().fold(0.0, f64::max);
                tally.record(worst, worst <= 1.0);
            }
            Err(_) => tally.fail(),
        }
    }
    tally.report()
}

/// `grad(Y + ε_y) = grad(Y) − R_ℓ ε_y Xᵀ R_r` for random linear networks.
pub fn check_output_noise_identity(trials: usize, rng: &mut RngStream) -> OracleReport {
    let mut tally = Tally::new("output_noise_identity");
    for _ in 0..trials {
        let depth = rng.random_range(2..=4usize);
        let (w, d) = random_problem(depth, 6, rng);
        let std = 0.05 + rng.uniform();
        let eps = rng.gaussian_matrix(d.y.rows(), d.y.cols(), std);
        let noisy = Dataset::new(d.x.clone(), &d.y + &eps).expect("same shape");
        let outcome = (0..depth)
            .map(|i| -> Result<f64> {
                let direct = closed_form_gradient(&w, Activation::LINEAR, &noisy, i)?;
                let predicted = output_noise_gradient(&w, &d, &eps, i)?;
                Ok(relative_error(&direct, &predicted) / IDENTITY_TOL)
            })
            .collect::<Result<Vec<f64>>>();
        match outcome {
            Ok(v) => {
                let worst = v.into_iter().fold(0.0, f64::max);
                tally.record(worst, worst <= 1.0);
            }
            Err(_) => tally.fail(),
        }
    }
    tally.report()
}

/// Mean and standard error of `n` draws.
fn mean_and_se(n: usize, mut draw: impl FnMut() -> Result<f64>) -> Result<(f64, f64)> {
    // Welford's update keeps the variance accurate for large n
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 1..=n {
        let x = draw()?;
        let delta = x - mean;
        mean += delta / i as f64;
        m2 += delta * (x - mean);
    }
    let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    Ok((mean, (var / n as f64).sqrt()))
}

fn mc_score(mean: f64, se: f64, closed: f64) -> (f64, bool) {
    let dev = (mean - closed).abs();
    if se == 0.0 {
        // noiseless draws: only rounding separates the sample from the closed form
        let v = dev / (EXACT_TOL * closed.abs().max(f64::MIN_POSITIVE));
        (v, v <= 1.0)
    } else {
        let v = dev / (MC_BAND * se);
        (v, v <= 1.0)
    }
}

fn dropout_problem(rng: &mut RngStream) -> (NetworkWeights, Dataset) {
    let (dx, dh, dy, m) = (4, 3, 2, 6);
    let w = NetworkWeights::new(vec![
        rng.gaussian_matrix(dh, dx, 0.5),
        rng.gaussian_matrix(dy, dh, 0.5),
    ])
    .expect("chained dims");
    let d = Dataset::new(
        rng.gaussian_matrix(dx, m, 1.0),
        rng.gaussian_matrix(dy, m, 1.0),
    )
    .expect("matching samples");
    (w, d)
}

/// Gaussian dropout against additive input noise on a random two-layer
/// network: the two closed forms agree exactly at `β = σ²`, and Monte-Carlo
/// means with `mc_samples` draws fall within three standard errors of the
/// closed forms (output-entry mask, weight mask, input noise). A `σ = 0`
/// round checks that everything collapses to the clean loss.
pub fn check_dropout_equivalence(mc_samples: usize, rng: &mut RngStream) -> OracleReport {
    let mut tally = Tally::new("dropout_equivalence");
    let (w, d) = dropout_problem(rng);
    let sigma = 0.2 + 0.4 * rng.uniform();
    let mc_samples = mc_samples.max(2);
    for s in [0.0, sigma] {
        let beta = s * s;
        let outcome = (|| -> Result<Vec<(f64, bool)>> {
            let eq19 = gaussian_dropout_expected_loss(&w, &d, s)?;
            let eq21 = input_noise_expected_loss(&w, &d, beta)?;
            let weight = weight_dropout_expected_loss(&w, &d, s)?;
            let exact = (eq19 - eq21).abs() / eq19.abs().max(f64::MIN_POSITIVE) / EXACT_TOL;
            let mut scores = vec![(exact, exact <= 1.0)];
            let (mo, so) = mean_and_se(mc_samples, || output_dropout_loss_sample(&w, &d, s, rng))?;
            scores.push(mc_score(mo, so, eq19));
            let (mw, sw) = mean_and_se(mc_samples, || weight_dropout_loss_sample(&w, &d, s, rng))?;
            scores.push(mc_score(mw, sw, weight));
            let (mi, si) = mean_and_se(mc_samples, || input_noise_loss_sample(&w, &d, beta, rng))?;
            scores.push(mc_score(mi, si, eq21));
            if s == 0.0 {
                let same = eq19 == eq21 && eq21 == weight;
                scores.push((if same { 0.0 } else { f64::INFINITY }, same));
            }
            Ok(scores)
        })();
        match outcome {
            Ok(scores) => scores.into_iter().for_each(|(v, ok)| tally.record(v, ok)),
            Err(_) => tally.fail(),
        }
    }
    tally.report()
}

/// Markov-type bound `‖ĝ − g‖ ≤ √(dσ² + γ)/δ` between a perturbed
/// full-batch gradient `ĝ = G + N(0, σ²)` and a mini-batch gradient `g`,
/// with `d` the total parameter count and `γ` estimated from `trials`
/// mini-batches. Passes when the fraction of violations stays below
/// `δ + 2√(δ(1−δ)/trials)`.
pub fn check_sgd_bound(
    w: &NetworkWeights,
    d: &Dataset,
    batch_size: usize,
    sigma: f64,
    delta: f64,
    trials: usize,
    rng: &mut RngStream,
) -> Result<OracleReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::invalid(format!("sigma must be >= 0, got {sigma}")));
    }
    let stats = sgd_gradient_stats(w, d, batch_size, trials, rng)?;
    let m = d.samples();
    let full = minibatch_gradient(w, Activation::LINEAR, d, &(0..m).collect::<Vec<_>>())?;
    let dim = w.dims().parameter_count() as f64;
    let bound = (dim * sigma * sigma + stats.gamma_hat).sqrt() / delta;

    let mut tally = Tally::new("sgd_bound");
    let mut violations = 0usize;
    for _ in 0..trials {
        let perturbed: Vec<DenseMatrix> = full
            .iter()
            .map(|g| {
                let mut noisy = rng.gaussian_matrix(g.rows(), g.cols(), sigma);
                noisy.axpy(1.0, g);
                noisy
            })
            .collect();
        let mut cols = rand::seq::index::sample(rng, m, batch_size).into_vec();
        cols.sort_unstable();
        let g = minibatch_gradient(w, Activation::LINEAR, d, &cols)?;
        let dist = stacked_distance_sq(&perturbed, &g).sqrt();
        let ratio = if bound > 0.0 {
            dist / bound
        } else if dist == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        tally.trials += 1;
        tally.worst = tally.worst.max(ratio);
        if ratio > 1.0 {
            violations += 1;
        }
    }
    let fraction = violations as f64 / trials as f64;
    let allowed = delta + 2.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    tally.failures = violations;
    Ok(tally.report_with(fraction <= allowed))
}

/// Backprop (and, for linear networks, the closed form) against central
/// finite differences on `configs` random networks with activation `kind`.
pub fn check_gradients(kind: ActivationKind, configs: usize, rng: &mut RngStream) -> OracleReport {
    let name = match kind {
        ActivationKind::Linear => "grad_linear",
        ActivationKind::Sigmoid => "grad_sigmoid",
        ActivationKind::Tanh => "grad_tanh",
    };
    let mut tally = Tally::new(name);
    for _ in 0..configs {
        let depth = rng.random_range(1..=3usize);
        let (w, d) = random_problem(depth, 5, rng);
        let act = if kind == ActivationKind::Linear {
            Activation::LINEAR
        } else if rng.random_bool(0.5) {
            Activation::hidden_and_output(kind)
        } else {
            Activation::hidden(kind)
        };
        let outcome = (|| -> Result<f64> {
            let bp = backprop_gradients(&w, act, &d)?;
            let mut worst: f64 = 0.0;
            for (i, g) in bp.iter().enumerate() {
                let fd = finite_difference_gradient(&w, act, &d, i)?;
                worst = worst.max(relative_error(g, &fd));
                if act.is_linear() {
                    let cf = closed_form_gradient(&w, act, &d, i)?;
                    worst = worst.max(relative_error(&cf, &fd));
                }
            }
            Ok(worst / GRADIENT_TOL)
        })();
        match outcome {
            Ok(v) => tally.record(v, v <= 1.0),
            Err(_) => tally.fail(),
        }
    }
    tally.report()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Rank,
    Noise,
    Dropout,
    Sgd,
    Grad,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "rank" => Suite::Rank,
            "noise" => Suite::Noise,
            "dropout" => Suite::Dropout,
            "sgd" => Suite::Sgd,
            "grad" => Suite::Grad,
            other => return Err(Error::invalid(format!("unknown suite '{other}'"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::All => "all",
            Suite::Rank => "rank",
            Suite::Noise => "noise",
            Suite::Dropout => "dropout",
            Suite::Sgd => "sgd",
            Suite::Grad => "grad",
        })
    }
}

/// Settings for [`run_suite`]. `trials` overrides every check's default
/// trial count (Monte-Carlo sample count for the dropout check).
#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub trials: Option<usize>,
    pub seed: u64,
    pub bump: BumpFn,
}

impl SuiteConfig {
    pub fn new(suite: Suite, seed: u64) -> Self {
        Self {
            suite,
            trials: None,
            seed,
            bump: rank_bump,
        }
    }
}

pub const DEFAULT_RANK_TRIALS: usize = 500;
pub const DEFAULT_RANK_MAX_DIM: usize = 12;
pub const DEFAULT_BUMP_TRIALS: usize = 200;
pub const DEFAULT_NOISE_TRIALS: usize = 200;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;
pub const DEFAULT_SGD_TRIALS: usize = 10_000;
pub const DEFAULT_GRADIENT_CONFIGS: usize = 20;

/// Network and data used by the bound check in [`run_suite`].
pub fn sgd_bound_problem(seed: u64) -> Result<(NetworkWeights, Dataset)> {
    let d = synth_dataset(6, 3, 40, seed)?;
    let mut rng = RngStream::new(seed, 99);
    let w = NetworkWeights::new(vec![
        rng.gaussian_matrix(4, 6, 0.4),
        rng.gaussian_matrix(3, 4, 0.4),
    ])?;
    Ok((w, d))
}

/// Runs the selected checks. Each check draws from its own stream of
/// `seed`, so a check's report does not depend on which others ran.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<OracleReport>> {
    let n = |default: usize| cfg.trials.unwrap_or(default);
    let want = |s: Suite| cfg.suite == Suite::All || cfg.suite == s;
    let stream = |k: u64| RngStream::new(cfg.seed, k);
    let mut out = Vec::new();
    if want(Suite::Rank) {
        out.push(check_rank_lemmas_with(
            n(DEFAULT_RANK_TRIALS),
            DEFAULT_RANK_MAX_DIM,
            &mut stream(1),
            cfg.bump,
        ));
        out.push(check_rank_bump_lemmas_with(
            n(DEFAULT_BUMP_TRIALS),
            &mut stream(2),
            cfg.bump,
        ));
    }
    if want(Suite::Noise) {
        out.push(check_input_noise_identity(
            n(DEFAULT_NOISE_TRIALS),
            &mut stream(3),
        ));
        out.push(check_output_noise_identity(
            n(DEFAULT_NOISE_TRIALS),
            &mut stream(4),
        ));
    }
    if want(Suite::Dropout) {
        out.push(check_dropout_equivalence(
            n(DEFAULT_MC_SAMPLES),
            &mut stream(5),
        ));
    }
    if want(Suite::Sgd) {
        let (w, d) = sgd_bound_problem(cfg.seed)?;
        for (k, delta) in [(6, 0.1), (7, 0.2)] {
            let mut report = check_sgd_bound(
                &w,
                &d,
                8,
                0.05,
                delta,
                n(DEFAULT_SGD_TRIALS),
                &mut stream(k),
            )?;
            report.name = format!("sgd_bound_delta_{delta}");
            out.push(report);
        }
    }
    if want(Suite::Grad) {
        for (k, kind) in [
            (8, ActivationKind::Linear),
            (9, ActivationKind::Sigmoid),
            (10, ActivationKind::Tanh),
        ] {
            out.push(check_gradients(
                kind,
                n(DEFAULT_GRADIENT_CONFIGS),
                &mut stream(k),
            ));
        }
    }
    Ok(out)
}
