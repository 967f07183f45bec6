//! Covariance matrices and photon budgets of CV graph states.
//!
//! Quadratures are kept in block order `(q₁..qₙ, p₁..pₙ)` and the vacuum has
//! covariance `½·I`. A graph state with adjacency `A` built from squeezed
//! vacua of squeeze parameter `r` has
//!
//! ```text
//! Σ = ½ [[U⁻¹, U⁻¹A], [A U⁻¹, U + A U⁻¹ A]],   U = e^{-2r} I
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest `|r|` accepted when building states.
pub const SQUEEZE_CAP: f64 = 10.0;

/// Zero-mean or displaced Gaussian state of `n` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    r: f64,
}

impl GaussianState {
    /// Wraps a mean and covariance after checking shape, symmetry and
    /// positive definiteness.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, r: f64) -> Result<Self> {
        let dim = cov.nrows();
        if !cov.is_square() || !dim.is_multiple_of(2) || dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "covariance must be square with even positive size, got {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        if mean.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: mean.len(),
            });
        }
        let scale = cov.amax().max(1.0);
        if (&cov - cov.transpose()).amax() > 1e-12 * scale {
            return Err(Error::NotPositiveDefinite(
                "covariance is not symmetric".into(),
            ));
        }
        if cov.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite(
                "covariance has a non-positive pivot".into(),
            ));
        }
        Ok(GaussianState { mean, cov, r })
    }

    /// Mode count.
    pub fn n(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Squeeze parameter the state was built with.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Rows of the covariance, for JSON export.
    pub fn cov_rows(&self) -> Vec<Vec<f64>> {
        self.cov
            .row_iter()
            .map(|row| row.iter().copied().collect())
            .collect()
    }
}

pub(crate) fn check_squeeze(r: f64) -> Result<()> {
    if !r.is_finite() || r.abs() > SQUEEZE_CAP {
        return Err(Error::SqueezeOutOfRange {
            r,
            cap: SQUEEZE_CAP,
        });
    }
    Ok(())
}

/// Covariance of the canonical graph state on `g` with squeeze `r`.
pub fn graph_state_covariance(g: &Graph, r: f64) -> Result<GaussianState> {
    check_squeeze(r)?;
    let n = g.n();
    let a = g.adjacency();
    let u = (-2.0 * r).exp();
    let u_inv = (2.0 * r).exp();
    let a2 = a * a;

    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            cov[(i, j)] = 0.5 * u_inv * delta;
            cov[(i, n + j)] = 0.5 * u_inv * a[(i, j)];
            cov[(n + i, j)] = 0.5 * u_inv * a[(i, j)];
            cov[(n + i, n + j)] = 0.5 * (u * delta + u_inv * a2[(i, j)]);
        }
    }
    Ok(GaussianState {
        mean: DVector::zeros(2 * n),
        cov,
        r,
    })
}

/// `N̄ = n sinh²r + ¼ e^{2r} Tr A²`.
pub fn mean_photon_number(g: &Graph, r: f64) -> f64 {
    g.n() as f64 * r.sinh().powi(2) + 0.25 * (2.0 * r).exp() * g.trace_a2()
}

/// `N̄ = ½ Tr Σ + ½ |x̄|² − n/2`, the second-moment form of the Wigner
/// integral of `Σ_i ½(q_i² + p_i² − 1)`.
pub fn photon_number_from_covariance(state: &GaussianState) -> f64 {
    0.5 * state.cov().trace() + 0.5 * state.mean().norm_squared() - 0.5 * state.n() as f64
}

/// Smallest `r ≥ 0` with `mean_photon_number(g, r) = target`, by bisection on
/// `[0, SQUEEZE_CAP]`.
pub fn squeeze_for_photon_budget(g: &Graph, target: f64) -> Result<f64> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "photon budget must be positive and finite, got {target}"
        )));
    }
    let max_reachable = mean_photon_number(g, SQUEEZE_CAP);
    if max_reachable < target {
        return Err(Error::UnreachablePhotonBudget {
            target,
            r_max: SQUEEZE_CAP,
            max_reachable,
        });
    }
    let (mut lo, mut hi) = (0.0_f64, SQUEEZE_CAP);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mean_photon_number(g, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (n_lo, n_hi) = (mean_photon_number(g, lo), mean_photon_number(g, hi));
    Ok(if (n_lo - target).abs() <= (n_hi - target).abs() {
        lo
    } else {
        hi
    })
}
