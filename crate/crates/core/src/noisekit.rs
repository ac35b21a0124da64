//! Noise mechanisms: additive gradient noise, input and output noise on the
//! data, and Bernoulli/Gaussian dropout, together with the closed-form
//! effects they have on gradients and expected losses.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::netcore::{
    check_compatible, closed_form_gradient, partial_product, product_matrix, Activation, Dataset,
    NetworkWeights,
};

/// Deterministic random stream: the same `(seed, stream)` pair always
/// yields the same draws.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh stream with the same seed.
    pub fn substream(&self, stream: u64) -> RngStream {
        RngStream::new(self.seed, stream)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Matrix of i.i.d. `N(0, std²)` entries.
    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize, std: f64) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| {
            std * self.rng.sample::<f64, _>(StandardNormal)
        })
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Which noise a training run injects, with its parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseMode {
    None,
    /// `N(0, σ²)` added to every gradient entry.
    Gradient {
        sigma: f64,
    },
    /// Additive input noise with `E[εεᵀ] = β·I`.
    Input {
        beta: f64,
    },
    /// `N(0, σ²)` added to every target entry.
    Output {
        sigma: f64,
    },
    /// Activations kept with probability `1 − p`.
    DropoutBernoulli {
        p: f64,
    },
    /// Activations scaled by `N(1, σ²)`.
    DropoutGaussian {
        sigma: f64,
    },
}

impl NoiseMode {
    pub fn validate(self) -> Result<Self> {
        let ok = match self {
            NoiseMode::None => true,
            NoiseMode::Gradient { sigma }
            | NoiseMode::Output { sigma }
            | NoiseMode::DropoutGaussian { sigma } => sigma >= 0.0 && sigma.is_finite(),
            NoiseMode::Input { beta } => beta > 0.0 && beta.is_finite(),
            NoiseMode::DropoutBernoulli { p } => p > 0.0 && p < 1.0,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::invalid(format!(
                "noise parameter out of range: {self}"
            )))
        }
    }

    pub fn is_dropout(self) -> bool {
        matches!(
            self,
            NoiseMode::DropoutBernoulli { .. } | NoiseMode::DropoutGaussian { .. }
        )
    }
}

impl fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            NoiseMode::None => write!(f, "none"),
            NoiseMode::Gradient { sigma } => write!(f, "grad:{sigma:e}"),
            NoiseMode::Input { beta } => write!(f, "input:{beta:e}"),
            NoiseMode::Output { sigma } => write!(f, "output:{sigma:e}"),
            NoiseMode::DropoutBernoulli { p } => write!(f, "dropout-b:{p}"),
            NoiseMode::DropoutGaussian { sigma } => write!(f, "dropout-g:{sigma:e}"),
        }
    }
}

impl FromStr for NoiseMode {
    type Err = Error;

    /// `none`, `grad:σ`, `input:β`, `output:σ`, `dropout-b:p`, `dropout-g:σ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "none" {
            return Ok(NoiseMode::None);
        }
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("noise {s:?} is not <kind>:<value>")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad noise parameter {value:?}")))?;
        let mode = match kind.trim() {
            "grad" => NoiseMode::Gradient { sigma: v },
            "input" => NoiseMode::Input { beta: v },
            "output" => NoiseMode::Output { sigma: v },
            "dropout-b" => NoiseMode::DropoutBernoulli { p: v },
            "dropout-g" => NoiseMode::DropoutGaussian { sigma: v },
            other => return Err(Error::invalid(format!("unknown noise kind {other:?}"))),
        };
        mode.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(mode: NoiseMode, seed: u64) -> Result<Self> {
        Ok(Self {
            mode: mode.validate()?,
            seed,
        })
    }

    pub fn none() -> Self {
        Self {
            mode: NoiseMode::None,
            seed: 0,
        }
    }
}

/// `grad + E` with `E` i.i.d. `N(0, σ²)`.
pub fn perturb_gradient(
    grad: &DenseMatrix,
    sigma: f64,
    rng: &mut RngStream,
) -> Result<DenseMatrix> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::invalid(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(grad.clone());
    }
    let mut out = rng.gaussian_matrix(grad.rows(), grad.cols(), sigma);
    out.axpy(1.0, grad);
    Ok(out)
}

/// Left and right factors of the layer-`i` gradient: `(W_H⋯W_{i+1})` and
/// `(W_{i-1}⋯W_1)`, `None` standing for the identity.
fn gradient_factors(
    w: &NetworkWeights,
    layer: usize,
) -> Result<(Option<DenseMatrix>, Option<DenseMatrix>)> {
    if layer >= w.depth() {
        return Err(Error::invalid(format!("layer {layer} out of range")));
    }
    let left = partial_product(w, layer + 1, w.depth() - 1);
    let right = layer
        .checked_sub(1)
        .and_then(|hi| partial_product(w, 0, hi));
    Ok((left, right))
}

fn sandwich(
    left: &Option<DenseMatrix>,
    core: DenseMatrix,
    right: &Option<DenseMatrix>,
) -> DenseMatrix {
    let core = match left {
        Some(l) => l.t_matmul(&core),
        None => core,
    };
    match right {
        Some(r) => core.matmul_t(r),
        None => core,
    }
}

/// Gradient change caused by training on `X + ε` instead of `X`:
///
/// `φ = R_ℓ [R·ε·Xᵀ + R·X·εᵀ + R·ε·εᵀ − Y·εᵀ] R_r`
///
/// with `R_ℓ = W_{i+1}ᵀ⋯W_Hᵀ` and `R_r = W_1ᵀ⋯W_{i-1}ᵀ`. The linear-network
/// gradient at `(X + ε, Y)` is exactly the gradient at `(X, Y)` plus `φ`.
pub fn input_noise_phi(
    w: &NetworkWeights,
    d: &Dataset,
    eps: &DenseMatrix,
    layer: usize,
) -> Result<DenseMatrix> {
    check_compatible(w, d)?;
    if eps.shape() != d.x.shape() {
        return Err(Error::invalid(format!(
            "input noise is {:?}, X is {:?}",
            eps.shape(),
            d.x.shape()
        )));
    }
    let (left, right) = gradient_factors(w, layer)?;
    let r = product_matrix(w);
    let r_eps = r.matmul(eps);
    let r_x = r.matmul(&d.x);
    let mut core = r_eps.matmul_t(&d.x);
    core.axpy(1.0, &r_x.matmul_t(eps));
    core.axpy(1.0, &r_eps.matmul_t(eps));
    core.axpy(-1.0, &d.y.matmul_t(eps));
    Ok(sandwich(&left, core, &right))
}

/// Linear-network gradient at `(X, Y + ε_y)`:
/// the clean gradient minus `R_ℓ ε_y Xᵀ R_r`.
pub fn output_noise_gradient(
    w: &NetworkWeights,
    d: &Dataset,
    eps_y: &DenseMatrix,
    layer: usize,
) -> Result<DenseMatrix> {
    if eps_y.shape() != d.y.shape() {
        return Err(Error::invalid(format!(
            "output noise is {:?}, Y is {:?}",
            eps_y.shape(),
            d.y.shape()
        )));
    }
    let base = closed_form_gradient(w, Activation::LINEAR, d, layer)?;
    let (left, right) = gradient_factors(w, layer)?;
    let shift = sandwich(&left, eps_y.matmul_t(&d.x), &right);
    Ok(&base - &shift)
}

/// Multiplicative mask for a dropout mode: Bernoulli entries in `{0, 1}`
/// with `P(1) = 1 − p`, or Gaussian entries `N(1, σ²)`.
pub fn dropout_mask(
    rows: usize,
    cols: usize,
    mode: NoiseMode,
    rng: &mut RngStream,
) -> Result<DenseMatrix> {
    match mode.validate()? {
        NoiseMode::DropoutBernoulli { p } => Ok(DenseMatrix::from_fn(rows, cols, |_, _| {
            if rng.uniform() < p {
                0.0
            } else {
                1.0
            }
        })),
        NoiseMode::DropoutGaussian { sigma } => Ok(DenseMatrix::from_fn(rows, cols, |_, _| {
            1.0 + sigma * rng.standard_normal()
        })),
        other => Err(Error::invalid(format!("{other} is not a dropout mode"))),
    }
}

/// `O = W_k (Z ⊙ B)` with a fresh mask `B` drawn from `rng`.
pub fn dropout_forward(
    w_k: &DenseMatrix,
    z: &DenseMatrix,
    spec: &NoiseSpec,
    rng: &mut RngStream,
) -> Result<DenseMatrix> {
    if w_k.cols() != z.rows() {
        return Err(Error::invalid("dropout_forward shape mismatch"));
    }
    let mask = dropout_mask(z.rows(), z.cols(), spec.mode, rng)?;
    Ok(w_k.matmul(&z.hadamard(&mask)))
}

fn two_layer(w: &NetworkWeights, d: &Dataset) -> Result<()> {
    if w.depth() != 2 {
        return Err(Error::UnsupportedDepth { depth: w.depth() });
    }
    check_compatible(w, d)
}

/// `‖Y − R·X‖_F²` and `‖R·X‖_F²` for a two-layer linear network.
fn residual_and_signal(w: &NetworkWeights, d: &Dataset) -> (f64, f64) {
    let rx = product_matrix(w).matmul(&d.x);
    ((&d.y - &rx).frobenius_norm_sq(), rx.frobenius_norm_sq())
}

/// `‖Y − W₂W₁X‖_F² + σ²‖W₂W₁X‖_F²`: the expected loss under Gaussian
/// dropout `N(1, σ²)` on each entry of the network output `W₂W₁X`.
///
/// A mask on the entries of `W₂` does not give this value in general; see
/// [`weight_dropout_expected_loss`].
pub fn gaussian_dropout_expected_loss(
    w: &NetworkWeights,
    d: &Dataset,
    sigma_d: f64,
) -> Result<f64> {
    two_layer(w, d)?;
    let (residual, signal) = residual_and_signal(w, d);
    Ok(residual + sigma_d * sigma_d * signal)
}

/// `‖Y − W₂W₁X‖_F² + β‖W₂W₁X‖_F²`: the expected loss of
/// `‖Y − W₂W₁X(I + ε)‖_F²` when `E[εεᵀ] = β·I`.
pub fn input_noise_expected_loss(w: &NetworkWeights, d: &Dataset, beta: f64) -> Result<f64> {
    two_layer(w, d)?;
    let (residual, signal) = residual_and_signal(w, d);
    Ok(residual + beta * signal)
}

/// Exact `E_G‖Y − (W₂ ⊙ G)W₁X‖_F²` for `G` i.i.d. `N(1, σ²)`:
/// `‖Y − W₂W₁X‖_F² + σ² Σ_k ‖W₂[:, k]‖² ‖(W₁X)[k, :]‖²`.
pub fn weight_dropout_expected_loss(w: &NetworkWeights, d: &Dataset, sigma_d: f64) -> Result<f64> {
    two_layer(w, d)?;
    let (residual, _) = residual_and_signal(w, d);
    let w2 = w.layer(1);
    let hidden = w.layer(0).matmul(&d.x);
    let mut extra = 0.0;
    for k in 0..w2.cols() {
        let col: f64 = (0..w2.rows()).map(|a| w2.get(a, k).powi(2)).sum();
        let row: f64 = hidden.row(k).iter().map(|v| v * v).sum();
        extra += col * row;
    }
    Ok(residual + sigma_d * sigma_d * extra)
}

/// One draw of `‖Y − (W₂W₁X) ⊙ G‖_F²`, `G` i.i.d. `N(1, σ²)`.
pub fn output_dropout_loss_sample(
    w: &NetworkWeights,
    d: &Dataset,
    sigma_d: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    two_layer(w, d)?;
    let rx = product_matrix(w).matmul(&d.x);
    let mask = dropout_mask(
        rx.rows(),
        rx.cols(),
        NoiseMode::DropoutGaussian { sigma: sigma_d },
        rng,
    )?;
    Ok((&d.y - &rx.hadamard(&mask)).frobenius_norm_sq())
}

/// One draw of `‖Y − (W₂ ⊙ G)W₁X‖_F²`, `G` i.i.d. `N(1, σ²)`.
pub fn weight_dropout_loss_sample(
    w: &NetworkWeights,
    d: &Dataset,
    sigma_d: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    two_layer(w, d)?;
    let w2 = w.layer(1);
    let mask = dropout_mask(
        w2.rows(),
        w2.cols(),
        NoiseMode::DropoutGaussian { sigma: sigma_d },
        rng,
    )?;
    let out = w2.hadamard(&mask).matmul(&w.layer(0).matmul(&d.x));
    Ok((&d.y - &out).frobenius_norm_sq())
}

/// Noise matrix of i.i.d. `N(0, β/n)` entries with `n` rows, so that
/// `E[εεᵀ] = β·I` whatever the column count.
pub fn isotropic_noise(
    rows: usize,
    cols: usize,
    beta: f64,
    normalizer: usize,
    rng: &mut RngStream,
) -> DenseMatrix {
    rng.gaussian_matrix(rows, cols, (beta / normalizer as f64).sqrt())
}

/// One draw of `‖Y − W₂W₁X(I + ε)‖_F²` with `ε` an `m×m` matrix of i.i.d.
/// `N(0, β/m)` entries.
pub fn input_noise_loss_sample(
    w: &NetworkWeights,
    d: &Dataset,
    beta: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    two_layer(w, d)?;
    let m = d.samples();
    let rx = product_matrix(w).matmul(&d.x);
    let eps = isotropic_noise(m, m, beta, m, rng);
    let out = &rx + &rx.matmul(&eps);
    Ok((&d.y - &out).frobenius_norm_sq())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::relative_error;

    fn scalar(v: f64) -> DenseMatrix {
        DenseMatrix::from_vec(1, 1, vec![v]).unwrap()
    }

    fn random_net(dims: &[usize], rng: &mut RngStream) -> NetworkWeights {
        NetworkWeights::new(
            dims.windows(2)
                .map(|p| rng.gaussian_matrix(p[1], p[0], 0.7))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rng_stream_is_reproducible() {
        let a = RngStream::new(7, 3).gaussian_matrix(4, 4, 1.0);
        let b = RngStream::new(7, 3).gaussian_matrix(4, 4, 1.0);
        let c = RngStream::new(7, 4).gaussian_matrix(4, 4, 1.0);
        assert_eq!(a.as_slice(), b.as_slice());
        assert_ne!(a.as_slice(), c.as_slice());
    }

    #[test]
    fn noise_mode_round_trip() {
        for s in [
            "none",
            "grad:1e-3",
            "input:0.5",
            "output:2",
            "dropout-b:0.25",
            "dropout-g:0.1",
        ] {
            let mode: NoiseMode = s.parse().unwrap();
            let again: NoiseMode = mode.to_string().parse().unwrap();
            assert_eq!(mode, again);
        }
        assert!("dropout-b:1.0".parse::<NoiseMode>().is_err());
        assert!("grad:-1".parse::<NoiseMode>().is_err());
        assert!("input:0".parse::<NoiseMode>().is_err());
        assert!("foo:1".parse::<NoiseMode>().is_err());
        assert!("grad".parse::<NoiseMode>().is_err());
    }

    #[test]
    fn zero_sigma_is_identity() {
        let mut rng = RngStream::new(1, 0);
        let g = rng.gaussian_matrix(3, 5, 1.0);
        assert_eq!(perturb_gradient(&g, 0.0, &mut rng).unwrap(), g);
        assert!(perturb_gradient(&g, -1.0, &mut rng).is_err());
    }

    #[test]
    fn perturbation_moments() {
        let sigma = 0.3;
        let n = 100_000;
        let base = DenseMatrix::zeros(1, 1);
        let mut rng = RngStream::new(5, 0);
        let draws: Vec<f64> = (0..n)
            .map(|_| perturb_gradient(&base, sigma, &mut rng).unwrap().get(0, 0))
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 3.0 * sigma / (n as f64).sqrt());
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.05);
    }

    #[test]
    fn phi_scalar_case() {
        // a = b = x = 1, y = 0, ε = 0.1 → φ = a(ab(εx + xε + ε²) − yε) = 0.21
        let w = NetworkWeights::new(vec![scalar(1.0), scalar(1.0)]).unwrap();
        let d = Dataset::new(scalar(1.0), scalar(0.0)).unwrap();
        let phi = input_noise_phi(&w, &d, &scalar(0.1), 0).unwrap();
        assert!((phi.get(0, 0) - 0.21).abs() < 1e-12);
    }

    #[test]
    fn phi_zero_noise() {
        let mut rng = RngStream::new(2, 0);
        let w = random_net(&[3, 4, 2], &mut rng);
        let d = Dataset::new(
            rng.gaussian_matrix(3, 6, 1.0),
            rng.gaussian_matrix(2, 6, 1.0),
        )
        .unwrap();
        let phi = input_noise_phi(&w, &d, &DenseMatrix::zeros(3, 6), 1).unwrap();
        assert!(phi.is_zero());
        assert!(input_noise_phi(&w, &d, &DenseMatrix::zeros(3, 5), 1).is_err());
    }

    #[test]
    fn phi_identity_random() {
        let mut rng = RngStream::new(3, 0);
        let w = random_net(&[4, 3, 2], &mut rng);
        let d = Dataset::new(
            rng.gaussian_matrix(4, 7, 1.0),
            rng.gaussian_matrix(2, 7, 1.0),
        )
        .unwrap();
        let eps = rng.gaussian_matrix(4, 7, 0.1);
        let noisy = Dataset::new(&d.x + &eps, d.y.clone()).unwrap();
        for i in 0..2 {
            let lhs = closed_form_gradient(&w, Activation::LINEAR, &noisy, i).unwrap();
            let mut rhs = closed_form_gradient(&w, Activation::LINEAR, &d, i).unwrap();
            rhs.axpy(1.0, &input_noise_phi(&w, &d, &eps, i).unwrap());
            assert!(relative_error(&lhs, &rhs) < 1e-8);
        }
    }

    #[test]
    fn output_noise_scalar_and_linearity() {
        let w = NetworkWeights::new(vec![scalar(1.0), scalar(1.0)]).unwrap();
        let d = Dataset::new(scalar(1.0), scalar(0.0)).unwrap();
        let base = closed_form_gradient(&w, Activation::LINEAR, &d, 0).unwrap();
        let shifted = output_noise_gradient(&w, &d, &scalar(0.5), 0).unwrap();
        assert!((shifted.get(0, 0) - base.get(0, 0) + 0.5).abs() < 1e-15);
        let zero = output_noise_gradient(&w, &d, &scalar(0.0), 0).unwrap();
        assert_eq!(zero, base);

        let mut rng = RngStream::new(4, 0);
        let w = random_net(&[3, 5, 2], &mut rng);
        let d = Dataset::new(
            rng.gaussian_matrix(3, 6, 1.0),
            rng.gaussian_matrix(2, 6, 1.0),
        )
        .unwrap();
        let e = rng.gaussian_matrix(2, 6, 0.2);
        for i in 0..2 {
            let base = closed_form_gradient(&w, Activation::LINEAR, &d, i).unwrap();
            let once = &output_noise_gradient(&w, &d, &e, i).unwrap() - &base;
            let twice = &output_noise_gradient(&w, &d, &e.scale(2.0), i).unwrap() - &base;
            assert!((&twice - &once.scale(2.0)).max_abs() <= 1e-10 * once.max_abs().max(1.0));
            // same as evaluating the clean formula on the shifted targets
            let direct = closed_form_gradient(
                &w,
                Activation::LINEAR,
                &Dataset::new(d.x.clone(), &d.y + &e).unwrap(),
                i,
            )
            .unwrap();
            assert!(
                relative_error(&direct, &output_noise_gradient(&w, &d, &e, i).unwrap()) < 1e-12
            );
        }
    }

    #[test]
    fn dropout_forward_gaussian_zero_sigma() {
        let mut rng = RngStream::new(6, 0);
        let w = rng.gaussian_matrix(3, 4, 1.0);
        let z = rng.gaussian_matrix(4, 5, 1.0);
        let spec = NoiseSpec::new(NoiseMode::DropoutGaussian { sigma: 0.0 }, 0).unwrap();
        assert_eq!(
            dropout_forward(&w, &z, &spec, &mut rng).unwrap(),
            w.matmul(&z)
        );
        let bad = NoiseSpec::new(NoiseMode::Gradient { sigma: 0.1 }, 0).unwrap();
        assert!(dropout_forward(&w, &z, &bad, &mut rng).is_err());
    }

    #[test]
    fn bernoulli_drop_fraction() {
        let p = 0.3;
        let mut rng = RngStream::new(8, 0);
        let mask = dropout_mask(100, 1000, NoiseMode::DropoutBernoulli { p }, &mut rng).unwrap();
        let n = mask.as_slice().len() as f64;
        let dropped = mask.as_slice().iter().filter(|&&v| v == 0.0).count() as f64;
        assert!(mask.as_slice().iter().all(|&v| v == 0.0 || v == 1.0));
        let se = (p * (1.0 - p) / n).sqrt();
        assert!((dropped / n - p).abs() < 3.0 * se);
    }

    #[test]
    fn bernoulli_forward_mean() {
        let p = 0.4;
        let trials = 10_000;
        let mut rng = RngStream::new(9, 0);
        let w = rng.gaussian_matrix(2, 3, 1.0);
        let z = rng.gaussian_matrix(3, 2, 1.0);
        let spec = NoiseSpec::new(NoiseMode::DropoutBernoulli { p }, 0).unwrap();
        let samples: Vec<DenseMatrix> = (0..trials)
            .map(|_| dropout_forward(&w, &z, &spec, &mut rng).unwrap())
            .collect();
        let target = w.matmul(&z).scale(1.0 - p);
        for i in 0..2 {
            for j in 0..2 {
                let xs: Vec<f64> = samples.iter().map(|s| s.get(i, j)).collect();
                let mean = xs.iter().sum::<f64>() / trials as f64;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
                let se = (var / trials as f64).sqrt();
                assert!((mean - target.get(i, j)).abs() < 3.0 * se + 1e-12);
            }
        }
    }

    #[test]
    fn expected_loss_scalar_case() {
        // W₂ = 2, W₁ = 1, X = 1, Y = 0, σ = 1 → E[(2g)²] = 4(1 + σ²) = 8
        let w = NetworkWeights::new(vec![scalar(1.0), scalar(2.0)]).unwrap();
        let d = Dataset::new(scalar(1.0), scalar(0.0)).unwrap();
        assert_eq!(gaussian_dropout_expected_loss(&w, &d, 1.0).unwrap(), 8.0);
        assert_eq!(weight_dropout_expected_loss(&w, &d, 1.0).unwrap(), 8.0);
        assert_eq!(input_noise_expected_loss(&w, &d, 1.0).unwrap(), 8.0);
    }

    #[test]
    fn expected_losses_agree_at_beta_sigma_squared() {
        let mut rng = RngStream::new(10, 0);
        let w = random_net(&[3, 4, 2], &mut rng);
        let d = Dataset::new(
            rng.gaussian_matrix(3, 5, 1.0),
            rng.gaussian_matrix(2, 5, 1.0),
        )
        .unwrap();
        let plain = 2.0 * crate::netcore::squared_loss(&w, &d).unwrap();
        assert!((gaussian_dropout_expected_loss(&w, &d, 0.0).unwrap() - plain).abs() < 1e-12);
        assert!((input_noise_expected_loss(&w, &d, 1e-300).unwrap() - plain).abs() < 1e-12);
        let sigma = 0.37;
        let a = gaussian_dropout_expected_loss(&w, &d, sigma).unwrap();
        let b = input_noise_expected_loss(&w, &d, sigma * sigma).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn expected_losses_require_two_layers() {
        let w = NetworkWeights::new(vec![scalar(1.0)]).unwrap();
        let d = Dataset::new(scalar(1.0), scalar(0.0)).unwrap();
        assert!(matches!(
            gaussian_dropout_expected_loss(&w, &d, 0.1),
            Err(Error::UnsupportedDepth { depth: 1 })
        ));
        assert!(matches!(
            input_noise_expected_loss(&w, &d, 0.1),
            Err(Error::UnsupportedDepth { depth: 1 })
        ));
    }
}
