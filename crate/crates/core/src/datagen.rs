//! Synthetic datasets that satisfy the full-rank assumptions, low-rank
//! weight initialisation, and the on-disk dataset format.
//!
//! Dataset file layout (all integers and floats little-endian):
//!
//! | offset | size        | content                         |
//! |--------|-------------|---------------------------------|
//! | 0      | 8           | magic `RLABDS01`                |
//! | 8      | 8           | `d_x` as u64                    |
//! | 16     | 8           | `d_y` as u64                    |
//! | 24     | 8           | `m` as u64                      |
//! | 32     | 8·d_x·m     | `X`, column-major f64           |
//! | ...    | 8·d_y·m     | `Y`, column-major f64           |

use std::fmt;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, row_space_basis, singular_values, DenseMatrix, RankTolerance};
use crate::netcore::{Dataset, LayerDims, NetworkWeights};
use crate::noisekit::RngStream;

pub const DATASET_MAGIC: [u8; 8] = *b"RLABDS01";

/// Minimum relative gap `(σ_i − σ_{i+1}) / σ_1` for singular values to
/// count as distinct.
pub const DISTINCT_GAP: f64 = 1e-8;

/// Generation attempts before [`synth_dataset`] gives up.
pub const MAX_ATTEMPTS: u64 = 16;

/// Outcome of checking the four dataset assumptions.
#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionCertificate {
    /// (i) the narrowest layer is no narrower than `min(d_x, d_y)`.
    pub min_dim_ok: bool,
    /// (ii) `d_x ≤ m` and `d_y ≤ m`.
    pub sample_ok: bool,
    /// (iii) `XXᵀ` is invertible.
    pub xx_full_rank: bool,
    /// (iii) `YXᵀ` has rank `min(d_x, d_y)`.
    pub yx_full_rank: bool,
    /// (iv) the singular values of `YXᵀ(XXᵀ)⁻¹X` are pairwise distinct.
    pub distinct_singulars: bool,
    /// Smallest gap between consecutive singular values of
    /// `YXᵀ(XXᵀ)⁻¹X`, relative to the largest. NaN when not computed.
    pub min_singular_gap: f64,
}

impl AssumptionCertificate {
    pub fn certified(&self) -> bool {
        self.min_dim_ok
            && self.sample_ok
            && self.xx_full_rank
            && self.yx_full_rank
            && self.distinct_singulars
    }

    /// Short name of the first assumption that fails.
    pub fn first_violation(&self) -> Option<&'static str> {
        if !self.min_dim_ok {
            Some("(i) min layer width")
        } else if !self.sample_ok {
            Some("(ii) d_x, d_y <= m")
        } else if !self.xx_full_rank {
            Some("(iii) XX^T full rank")
        } else if !self.yx_full_rank {
            Some("(iii) YX^T full rank")
        } else if !self.distinct_singulars {
            Some("(iv) distinct singular values")
        } else {
            None
        }
    }
}

impl fmt::Display for AssumptionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "min_dim_ok {}", self.min_dim_ok)?;
        writeln!(f, "sample_ok {}", self.sample_ok)?;
        writeln!(f, "xx_full_rank {}", self.xx_full_rank)?;
        writeln!(f, "yx_full_rank {}", self.yx_full_rank)?;
        writeln!(f, "distinct_singulars {}", self.distinct_singulars)?;
        writeln!(f, "min_singular_gap {:e}", self.min_singular_gap)?;
        write!(f, "certified {}", self.certified())
    }
}

/// Checks assumptions (i)–(iv) for `d` and a network of widths `dims`.
///
/// Invertibility of `XXᵀ` is judged from the numerical rank of `X` itself,
/// which avoids squaring its condition number.
pub fn verify_assumptions(d: &Dataset, dims: &LayerDims) -> Result<AssumptionCertificate> {
    let (dx, dy, m) = (d.input_dim(), d.output_dim(), d.samples());
    let tol = RankTolerance::DEFAULT;
    let narrowest = dims.as_slice().iter().copied().min().unwrap_or(0);
    let min_dim_ok = dims.input() == dx && dims.output() == dy && narrowest == dx.min(dy);
    let sample_ok = dx <= m && dy <= m;
    let xx_full_rank = numerical_rank(&d.x, tol)? == dx;
    let yx_full_rank = numerical_rank(&d.y.matmul_t(&d.x), tol)? == dx.min(dy);

    let (distinct_singulars, min_singular_gap) = if xx_full_rank {
        // YXᵀ(XXᵀ)⁻¹X = Y·QQᵀ with Q an orthonormal basis of row(X), and
        // YQQᵀ shares its non-zero singular values with YQ.
        let q = row_space_basis(&d.x)?;
        let sigma = singular_values(&d.y.matmul(&q))?;
        let top = sigma.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            (false, 0.0)
        } else {
            let gap = sigma
                .windows(2)
                .map(|p| (p[0] - p[1]) / top)
                .fold(f64::INFINITY, f64::min);
            (gap > DISTINCT_GAP, gap)
        }
    } else {
        (false, f64::NAN)
    };

    Ok(AssumptionCertificate {
        min_dim_ok,
        sample_ok,
        xx_full_rank,
        yx_full_rank,
        distinct_singulars,
        min_singular_gap,
    })
}

/// Standard-Gaussian `X` (`d_x × m`) and `Y` (`d_y × m`), regenerated until
/// the assumptions hold. Returns the dataset with its certificate.
pub fn synth_certified(
    dx: usize,
    dy: usize,
    m: usize,
    seed: u64,
) -> Result<(Dataset, AssumptionCertificate)> {
    if dx == 0 || dy == 0 || m == 0 {
        return Err(Error::invalid("dataset dimensions must be positive"));
    }
    if dx > m || dy > m {
        return Err(Error::AssumptionViolated(format!(
            "(ii) needs d_x <= m and d_y <= m, got d_x={dx}, d_y={dy}, m={m}"
        )));
    }
    let dims = LayerDims::new(vec![dx, dy])?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = RngStream::new(seed, attempt);
        let x = rng.gaussian_matrix(dx, m, 1.0);
        let y = rng.gaussian_matrix(dy, m, 1.0);
        let d = Dataset::new(x, y)?;
        let cert = verify_assumptions(&d, &dims)?;
        if cert.certified() {
            return Ok((d, cert));
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS as usize,
    })
}

pub fn synth_dataset(dx: usize, dy: usize, m: usize, seed: u64) -> Result<Dataset> {
    synth_certified(dx, dy, m, seed).map(|(d, _)| d)
}

/// Per-layer multiplier of the Gaussian factor product in [`low_rank_init`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitScale {
    /// `gain / √(r0 · fan_in)`, giving entries of variance `gain² / fan_in`.
    FanIn { gain: f64 },
    /// The same multiplier for every layer.
    Constant(f64),
}

impl InitScale {
    pub const DEFAULT: InitScale = InitScale::FanIn { gain: 1.0 };

    pub fn for_layer(self, r0: usize, fan_in: usize) -> f64 {
        match self {
            InitScale::FanIn { gain } => gain / ((r0.max(1) * fan_in) as f64).sqrt(),
            InitScale::Constant(c) => c,
        }
    }
}

/// Default target rank `⌊0.4 · min(d_x, d_y)⌋`.
pub fn default_init_rank(dims: &LayerDims) -> usize {
    dims.input().min(dims.output()) * 2 / 5
}

/// Each `W_i = s_i · A_i B_i` with standard-Gaussian `A_i` (`d_i × r0`) and
/// `B_i` (`r0 × d_{i−1}`), so every layer has rank `r0`.
pub fn low_rank_init(
    dims: &LayerDims,
    r0: usize,
    scale: InitScale,
    seed: u64,
) -> Result<NetworkWeights> {
    let widest_allowed = (0..dims.depth())
        .map(|i| {
            let (r, c) = dims.layer_shape(i);
            r.min(c)
        })
        .min()
        .unwrap_or(0);
    if r0 > widest_allowed {
        return Err(Error::invalid(format!(
            "init rank {r0} exceeds the narrowest layer ({widest_allowed})"
        )));
    }
    let mut rng = RngStream::new(seed, 0);
    let layers = (0..dims.depth())
        .map(|i| {
            let (rows, cols) = dims.layer_shape(i);
            if r0 == 0 {
                return DenseMatrix::zeros(rows, cols);
            }
            let a = rng.gaussian_matrix(rows, r0, 1.0);
            let b = rng.gaussian_matrix(r0, cols, 1.0);
            a.matmul(&b).scale(scale.for_layer(r0, cols))
        })
        .collect();
    NetworkWeights::new(layers)
}

fn column_major_bytes(m: &DenseMatrix, out: &mut Vec<u8>) {
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            out.extend_from_slice(&m.get(i, j).to_le_bytes());
        }
    }
}

/// Serialised bytes of `d` in the dataset file format.
pub fn dataset_to_bytes(d: &Dataset) -> Vec<u8> {
    let (dx, dy, m) = (d.input_dim(), d.output_dim(), d.samples());
    let mut out = Vec::with_capacity(32 + 8 * (dx + dy) * m);
    out.extend_from_slice(&DATASET_MAGIC);
    for n in [dx, dy, m] {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    column_major_bytes(&d.x, &mut out);
    column_major_bytes(&d.y, &mut out);
    out
}

pub fn write_dataset<W: Write>(d: &Dataset, mut w: W) -> Result<()> {
    w.write_all(&dataset_to_bytes(d))?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_column_major<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<DenseMatrix> {
    let mut bytes = vec![0u8; 8 * rows * cols];
    r.read_exact(&mut bytes)?;
    let mut data = vec![0.0; rows * cols];
    for (k, chunk) in bytes.chunks_exact(8).enumerate() {
        let (i, j) = (k % rows, k / rows);
        data[i * cols + j] = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
    }
    DenseMatrix::from_vec(rows, cols, data)
}

pub fn read_dataset<R: Read>(mut r: R) -> Result<Dataset> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if magic != DATASET_MAGIC {
        return Err(Error::invalid("not a dataset file (bad magic)"));
    }
    let dims = [read_u64(&mut r)?, read_u64(&mut r)?, read_u64(&mut r)?];
    let [dx, dy, m] = dims.map(|n| usize::try_from(n).unwrap_or(usize::MAX));
    const LIMIT: usize = 1 << 28;
    if dx == 0 || dy == 0 || m == 0 || dx.saturating_mul(m) > LIMIT || dy.saturating_mul(m) > LIMIT
    {
        return Err(Error::invalid(format!(
            "implausible dataset header d_x={dx} d_y={dy} m={m}"
        )));
    }
    let x = read_column_major(&mut r, dx, m)?;
    let y = read_column_major(&mut r, dy, m)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::invalid("trailing bytes after dataset"));
    }
    Dataset::new(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::product_matrix;

    fn dims(v: &[usize]) -> LayerDims {
        LayerDims::new(v.to_vec()).unwrap()
    }

    #[test]
    fn small_dataset_is_certified() {
        let (d, cert) = synth_certified(10, 5, 50, 1).unwrap();
        assert!(cert.certified(), "{cert}");
        assert_eq!(d.x.shape(), (10, 50));
        assert_eq!(d.y.shape(), (5, 50));
        assert!(cert.min_singular_gap > DISTINCT_GAP);
    }

    #[test]
    fn too_few_samples_violates_ii() {
        match synth_dataset(10, 5, 5, 1) {
            Err(Error::AssumptionViolated(msg)) => assert!(msg.contains("(ii)")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(
            synth_dataset(4, 3, 9, 5).unwrap(),
            synth_dataset(4, 3, 9, 5).unwrap()
        );
        assert_ne!(
            synth_dataset(4, 3, 9, 5).unwrap(),
            synth_dataset(4, 3, 9, 6).unwrap()
        );
    }

    #[test]
    fn identity_padded_x_is_full_rank() {
        let x = DenseMatrix::from_fn(4, 8, |i, j| if i == j { 1.0 } else { 0.0 });
        let y = RngStream::new(3, 0).gaussian_matrix(2, 8, 1.0);
        let cert = verify_assumptions(&Dataset::new(x, y).unwrap(), &dims(&[4, 2])).unwrap();
        assert!(cert.xx_full_rank && cert.yx_full_rank);
    }

    #[test]
    fn duplicate_rows_break_xx_rank() {
        let mut x = RngStream::new(4, 0).gaussian_matrix(3, 10, 1.0);
        for j in 0..10 {
            let v = x.get(0, j);
            x.set(1, j, v);
        }
        let y = RngStream::new(5, 0).gaussian_matrix(2, 10, 1.0);
        let cert = verify_assumptions(&Dataset::new(x, y).unwrap(), &dims(&[3, 2])).unwrap();
        assert!(!cert.xx_full_rank);
        assert!(!cert.distinct_singulars);
        assert!(cert.min_singular_gap.is_nan());
        assert!(!cert.certified());
    }

    #[test]
    fn min_dim_check() {
        let d = synth_dataset(6, 3, 12, 2).unwrap();
        assert!(
            verify_assumptions(&d, &dims(&[6, 4, 3]))
                .unwrap()
                .min_dim_ok
        );
        assert!(
            !verify_assumptions(&d, &dims(&[6, 2, 3]))
                .unwrap()
                .min_dim_ok
        );
    }

    #[test]
    fn repeated_singular_values_are_not_distinct() {
        // Y = X restricted to two rows: YQ has equal singular values when X
        // has orthonormal rows.
        let x = DenseMatrix::from_fn(2, 4, |i, j| if i == j { 1.0 } else { 0.0 });
        let y = x.clone();
        let cert = verify_assumptions(&Dataset::new(x, y).unwrap(), &dims(&[2, 2])).unwrap();
        assert!(cert.xx_full_rank && cert.yx_full_rank);
        assert!(!cert.distinct_singulars);
    }

    #[test]
    fn low_rank_init_ranks() {
        let tol = RankTolerance::DEFAULT;
        let w = low_rank_init(&dims(&[6, 5, 4]), 2, InitScale::DEFAULT, 3).unwrap();
        for layer in w.layers() {
            assert_eq!(numerical_rank(layer, tol).unwrap(), 2);
        }
        assert!(numerical_rank(&product_matrix(&w), tol).unwrap() <= 2);

        let full = low_rank_init(&dims(&[6, 5, 4]), 4, InitScale::DEFAULT, 3).unwrap();
        assert_eq!(numerical_rank(&product_matrix(&full), tol).unwrap(), 4);

        let zero = low_rank_init(&dims(&[6, 5, 4]), 0, InitScale::DEFAULT, 3).unwrap();
        assert!(zero.layers().iter().all(DenseMatrix::is_zero));
        assert_eq!(numerical_rank(&product_matrix(&zero), tol).unwrap(), 0);

        assert!(low_rank_init(&dims(&[6, 5, 4]), 5, InitScale::DEFAULT, 3).is_err());
    }

    #[test]
    fn fan_in_scale_sets_variance() {
        let w = low_rank_init(&dims(&[400, 300]), 20, InitScale::DEFAULT, 8).unwrap();
        let var = w.layer(0).frobenius_norm_sq() / (300.0 * 400.0);
        assert!((var * 400.0 - 1.0).abs() < 0.15, "{var}");
    }

    #[test]
    fn default_rank_is_forty_percent() {
        assert_eq!(default_init_rank(&dims(&[1000, 500, 250])), 100);
        assert_eq!(default_init_rank(&dims(&[7, 3, 4])), 1);
    }

    #[test]
    fn dataset_round_trip() {
        let d = synth_dataset(3, 2, 5, 11).unwrap();
        let bytes = dataset_to_bytes(&d);
        assert_eq!(bytes.len(), 32 + 8 * 25);
        assert_eq!(&bytes[..8], b"RLABDS01");
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 3);
        // column-major: second float is X[1, 0]
        assert_eq!(
            f64::from_le_bytes(bytes[40..48].try_into().unwrap()),
            d.x.get(1, 0)
        );
        assert_eq!(read_dataset(bytes.as_slice()).unwrap(), d);
    }

    #[test]
    fn corrupt_files_rejected() {
        let d = synth_dataset(3, 2, 5, 11).unwrap();
        let mut bytes = dataset_to_bytes(&d);
        assert!(read_dataset(&bytes[..bytes.len() - 1]).is_err());
        bytes.push(0);
        assert!(read_dataset(bytes.as_slice()).is_err());
        bytes[0] = b'X';
        assert!(read_dataset(bytes.as_slice()).is_err());
    }
}
