//! Haar-random unitaries and moment verification.
//!
//! Sampling goes through a Ginibre matrix (iid standard complex Gaussian
//! entries) followed by QR with the R-diagonal phase fix; without the fix
//! the Q factor is not Haar-distributed.
//!
//! The checks in this module compare Monte Carlo estimates against the
//! analytic facts for the unitary group: the directional gradient
//! `i <psi0| [U^dag H U, M] |psi0>` has mean zero over Haar `U`, its
//! variance has the closed form
//! `2 ((M^2)_00 - (M_00)^2) / (N^2 - 1) * (Tr H^2 - (Tr H)^2 / N)`,
//! and fourth moments of matrix entries follow the two-permutation
//! Weingarten formula with weights `1/(N^2-1)` and `-1/(N(N^2-1))`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grad::grad_direction_dense;
use crate::linalg::{qr_unitary_factor, ComplexMatrix, ComplexVector};

/// Number of batches used for distribution-free standard errors.
const N_BATCHES: usize = 20;

/// Monte Carlo moment estimate with batch-based standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub variance: f64,
    pub std_error_mean: f64,
    pub std_error_var: f64,
    pub n_samples: usize,
}

/// Matrix with iid standard complex Gaussian entries.
pub fn sample_ginibre(n_dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(n_dim, n_dim, |_, _| {
        Complex64::new(
            scale * rng.sample::<f64, _>(StandardNormal),
            scale * rng.sample::<f64, _>(StandardNormal),
        )
    })
}

/// Haar-distributed unitary of dimension `n_dim`.
pub fn sample_haar(n_dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    assert!(n_dim >= 2, "dimension must be at least 2");
    qr_unitary_factor(&sample_ginibre(n_dim, rng)).expect("Ginibre matrices are full rank")
}

/// Random Hermitian matrix `(G + G^dag) / 2` for a Ginibre `G`.
pub fn random_hermitian(n_dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = sample_ginibre(n_dim, rng);
    g.add(&g.dagger())
        .expect("same shape")
        .scale(Complex64::new(0.5, 0.0))
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

fn batch_ranges(n: usize) -> Vec<std::ops::Range<usize>> {
    (0..N_BATCHES)
        .map(|b| (b * n / N_BATCHES)..((b + 1) * n / N_BATCHES))
        .collect()
}

/// Monte Carlo mean and variance of the directional gradient over Haar
/// unitaries, with 20-batch standard errors.
pub fn grad_moments_mc(
    direction: &ComplexMatrix,
    obs: &ComplexMatrix,
    psi0: &ComplexVector,
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<MomentEstimate> {
    if n_samples < 100 {
        return Err(Error::InvalidSize {
            what: "n_samples",
            value: n_samples,
        });
    }
    let n_dim = direction.rows();
    let mut values = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let u = sample_haar(n_dim, rng);
        values.push(grad_direction_dense(&u, direction, obs, psi0)?);
    }

    let mean = values.iter().sum::<f64>() / n_samples as f64;
    let variance =
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n_samples - 1) as f64;

    let ranges = batch_ranges(n_samples);
    let batch_means: Vec<f64> = ranges
        .iter()
        .map(|r| values[r.clone()].iter().sum::<f64>() / r.len() as f64)
        .collect();
    let batch_vars: Vec<f64> = ranges
        .iter()
        .map(|r| {
            let chunk = &values[r.clone()];
            let m = chunk.iter().sum::<f64>() / chunk.len() as f64;
            chunk.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (chunk.len() - 1) as f64
        })
        .collect();

    Ok(MomentEstimate {
        mean,
        variance,
        std_error_mean: sample_std(&batch_means) / (N_BATCHES as f64).sqrt(),
        std_error_var: sample_std(&batch_vars) / (N_BATCHES as f64).sqrt(),
        n_samples,
    })
}

/// Closed-form Haar variance of the directional gradient:
/// `2 ((M^2)_00 - (M_00)^2) / (N^2 - 1) * (Tr H^2 - (Tr H)^2 / N)`,
/// where the `00` subscripts are expectations in `psi0`.
pub fn variance_closed_form(
    direction: &ComplexMatrix,
    obs: &ComplexMatrix,
    psi0: &ComplexVector,
) -> Result<f64> {
    let n = direction.rows();
    if obs.rows() != n || obs.cols() != n || direction.cols() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, n),
            found: (obs.rows(), obs.cols()),
        });
    }
    if psi0.dim() != n {
        return Err(Error::ShapeMismatch {
            expected: (n, 1),
            found: (psi0.dim(), 1),
        });
    }
    for m in [direction, obs] {
        let dev = m.hermitian_deviation();
        if dev >= crate::linalg::HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
    }

    let m_psi = direction.matvec(psi0)?;
    let m00 = psi0.inner(&m_psi).re;
    let m2_00 = m_psi.inner(&m_psi).re;

    let trace_h = obs.trace()?.re;
    let trace_h2: f64 = obs.data().iter().map(|c| c.norm_sqr()).sum();

    let n_f = n as f64;
    Ok(2.0 * (m2_00 - m00 * m00) / (n_f * n_f - 1.0) * (trace_h2 - trace_h * trace_h / n_f))
}

/// Gradient at an identity-initialized circuit: `i <psi0| [H, M] |psi0>`.
/// Zero exactly when the observable commutes with the direction.
pub fn identity_init_gradient(
    obs: &ComplexMatrix,
    direction: &ComplexMatrix,
    psi0: &ComplexVector,
) -> Result<f64> {
    grad_direction_dense(&ComplexMatrix::identity(direction.rows()), direction, obs, psi0)
}

/// Index tuple `(i1, j1, i2, j2, i1', j1', i2', j2')` for the fourth-moment
/// integrand `U_{i1 j1} U_{i2 j2} U*_{i1' j1'} U*_{i2' j2'}`.
pub type IndexTuple = [usize; 8];

/// Analytic fourth moment of Haar matrix entries for one index tuple.
pub fn fourth_moment_analytic(t: &IndexTuple, n_dim: usize) -> f64 {
    let [i1, j1, i2, j2, i1c, j1c, i2c, j2c] = *t;
    let n = n_dim as f64;
    let denom = n * n - 1.0;
    let mut val = 0.0;
    if i1 == i1c && i2 == i2c && j1 == j1c && j2 == j2c {
        val += 1.0 / denom;
    }
    if i1 == i2c && i2 == i1c && j1 == j2c && j2 == j1c {
        val += 1.0 / denom;
    }
    if i1 == i1c && i2 == i2c && j1 == j2c && j2 == j1c {
        val -= 1.0 / (n * denom);
    }
    if i1 == i2c && i2 == i1c && j1 == j1c && j2 == j2c {
        val -= 1.0 / (n * denom);
    }
    val
}

/// Result of an empirical second-moment (fourth entry moment) check.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondMomentCheck {
    pub n_dim: usize,
    pub n_samples: usize,
    pub n_tuples: usize,
    /// Largest |empirical - analytic| over the covering set.
    pub max_abs_residual: f64,
    /// Largest residual measured in units of its own standard error.
    pub max_se_ratio: f64,
}

/// Compare empirical fourth moments of Haar matrix entries against the
/// Weingarten formula over a fixed covering set of index tuples: all `N^8`
/// tuples for `N = 2`, 200 rng-drawn tuples for `N = 4`.
pub fn second_moment_check(
    n_dim: usize,
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<SecondMomentCheck> {
    if n_dim != 2 && n_dim != 4 {
        return Err(Error::InvalidSize {
            what: "n_dim",
            value: n_dim,
        });
    }
    if n_samples < 10_000 {
        return Err(Error::InvalidSize {
            what: "n_samples",
            value: n_samples,
        });
    }

    let tuples: Vec<IndexTuple> = if n_dim == 2 {
        (0..256usize)
            .map(|code| {
                let mut t = [0usize; 8];
                for (k, slot) in t.iter_mut().enumerate() {
                    *slot = (code >> k) & 1;
                }
                t
            })
            .collect()
    } else {
        (0..200)
            .map(|_| {
                let mut t = [0usize; 8];
                for slot in t.iter_mut() {
                    *slot = rng.gen_range(0..n_dim);
                }
                t
            })
            .collect()
    };

    let n_tuples = tuples.len();
    let mut sums = vec![Complex64::new(0.0, 0.0); n_tuples];
    let mut batch_sums = vec![[Complex64::new(0.0, 0.0); N_BATCHES]; n_tuples];
    let ranges = batch_ranges(n_samples);

    for (sample_idx, batch) in ranges.iter().enumerate().flat_map(|(b, r)| {
        r.clone().map(move |i| (i, b))
    }) {
        let _ = sample_idx;
        let u = sample_haar(n_dim, rng);
        for (k, t) in tuples.iter().enumerate() {
            let w = u[(t[0], t[1])] * u[(t[2], t[3])]
                * u[(t[4], t[5])].conj()
                * u[(t[6], t[7])].conj();
            sums[k] += w;
            batch_sums[k][batch] += w;
        }
    }

    let mut max_abs_residual: f64 = 0.0;
    let mut max_se_ratio: f64 = 0.0;
    for (k, t) in tuples.iter().enumerate() {
        let mean = sums[k] / n_samples as f64;
        let analytic = fourth_moment_analytic(t, n_dim);
        let residual = (mean - Complex64::new(analytic, 0.0)).norm();

        let batch_means: Vec<Complex64> = ranges
            .iter()
            .enumerate()
            .map(|(b, r)| batch_sums[k][b] / r.len() as f64)
            .collect();
        let center: Complex64 =
            batch_means.iter().sum::<Complex64>() / N_BATCHES as f64;
        let se = (batch_means
            .iter()
            .map(|b| (b - center).norm_sqr())
            .sum::<f64>()
            / ((N_BATCHES - 1) as f64 * N_BATCHES as f64))
            .sqrt();

        max_abs_residual = max_abs_residual.max(residual);
        let ratio = if residual == 0.0 {
            0.0
        } else {
            residual / se.max(f64::MIN_POSITIVE)
        };
        max_se_ratio = max_se_ratio.max(ratio);
    }

    Ok(SecondMomentCheck {
        n_dim,
        n_samples,
        n_tuples,
        max_abs_residual,
        max_se_ratio,
    })
}

/// Largest absolute deviation between empirical and analytic fourth moments
/// over the covering set. Thin wrapper over [`second_moment_check`].
pub fn second_moment_residual(n_dim: usize, n_samples: usize, rng: &mut impl Rng) -> Result<f64> {
    Ok(second_moment_check(n_dim, n_samples, rng)?.max_abs_residual)
}
