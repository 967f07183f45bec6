//! Quantum Fisher information of graph-state probes.
//!
//! Phase sensing rotates mode `j` by `f_j φ`; displacement sensing shifts the
//! state along `X̂_f = Σ f_i x̂_i` with `x̂` in block order. Each modality has
//! a closed form in terms of `A` and `r` and an independent matrix route
//! evaluated on the covariance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::{check_squeeze, GaussianState};
use crate::graph::Graph;

fn validate_coefficients(f: &[f64], expected: usize) -> Result<()> {
    if f.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: f.len(),
        });
    }
    if f.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidCoefficients("entries must be finite".into()));
    }
    if f.iter().all(|&x| x == 0.0) {
        return Err(Error::InvalidCoefficients(
            "at least one entry must be nonzero".into(),
        ));
    }
    Ok(())
}

/// Per-mode responsivities `f` and the rotation parameter `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseChannel {
    f: Vec<f64>,
    phi: f64,
}

impl PhaseChannel {
    pub fn new(f: Vec<f64>, phi: f64) -> Result<Self> {
        let n = f.len();
        validate_coefficients(&f, n)?;
        if n == 0 {
            return Err(Error::InvalidCoefficients(
                "empty responsivity vector".into(),
            ));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "phi must be finite, got {phi}"
            )));
        }
        Ok(PhaseChannel { f, phi })
    }

    /// Equal responsivity `f` on all `n` modes.
    pub fn uniform(n: usize, f: f64, phi: f64) -> Result<Self> {
        Self::new(vec![f; n], phi)
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    fn check_modes(&self, n: usize) -> Result<()> {
        if self.f.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.f.len(),
            });
        }
        Ok(())
    }
}

/// Quadrature coefficients of the displacement generator: the first `n`
/// entries multiply `q̂`, the last `n` multiply `p̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementChannel {
    f: Vec<f64>,
}

impl DisplacementChannel {
    pub fn new(f: Vec<f64>) -> Result<Self> {
        if f.is_empty() || !f.len().is_multiple_of(2) {
            return Err(Error::InvalidCoefficients(format!(
                "displacement coefficients need even positive length, got {}",
                f.len()
            )));
        }
        validate_coefficients(&f, f.len())?;
        Ok(DisplacementChannel { f })
    }

    /// All `2n` coefficients equal to `f`.
    pub fn uniform(n: usize, f: f64) -> Result<Self> {
        Self::new(vec![f; 2 * n])
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn n(&self) -> usize {
        self.f.len() / 2
    }

    pub fn q_part(&self) -> &[f64] {
        &self.f[..self.n()]
    }

    pub fn p_part(&self) -> &[f64] {
        &self.f[self.n()..]
    }

    fn check_modes(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: self.f.len(),
            });
        }
        Ok(())
    }
}

/// Phase QFI from the adjacency matrix:
///
/// `F = 2 sinh²2r Σf_j² + Σ_jk (f_j² + e^{4r} f_j f_k) A_jk A_kj
///      + ½ e^{4r} Σ_jk f_j f_k [A²]_jk [A²]_kj`
pub fn qfi_phase_closed_form(g: &Graph, r: f64, channel: &PhaseChannel) -> Result<f64> {
    check_squeeze(r)?;
    channel.check_modes(g.n())?;
    let f = channel.f();
    let a = g.adjacency();
    let a2 = a * a;
    let e4 = (4.0 * r).exp();

    let single: f64 = 2.0 * (2.0 * r).sinh().powi(2) * f.iter().map(|x| x * x).sum::<f64>();
    let mut edge_term = 0.0;
    let mut walk_term = 0.0;
    for j in 0..g.n() {
        for k in 0..g.n() {
            edge_term += (f[j] * f[j] + e4 * f[j] * f[k]) * a[(j, k)] * a[(k, j)];
            walk_term += f[j] * f[k] * a2[(j, k)] * a2[(k, j)];
        }
    }
    Ok(single + edge_term + 0.5 * e4 * walk_term)
}

/// Equal-responsivity phase QFI:
/// `2n f² sinh²2r + (1 + e^{4r}) f² Tr A² + ½ e^{4r} f² Tr A⁴`.
pub fn qfi_phase_uniform(g: &Graph, r: f64, f: f64) -> Result<f64> {
    check_squeeze(r)?;
    let n = g.n() as f64;
    let e4 = (4.0 * r).exp();
    let f2 = f * f;
    Ok(2.0 * n * f2 * (2.0 * r).sinh().powi(2)
        + (1.0 + e4) * f2 * g.trace_a2()
        + 0.5 * e4 * f2 * g.trace_a4())
}

/// Heisenberg-action matrix of the phase rotation in block order,
/// `K = [[0, D], [−D, 0]]` with `D = diag(f)`, so that `x ↦ exp(φK) x`.
pub fn phase_rotation_generator(f: &[f64]) -> DMatrix<f64> {
    let n = f.len();
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    for (j, &fj) in f.iter().enumerate() {
        k[(j, n + j)] = fj;
        k[(n + j, j)] = -fj;
    }
    k
}

/// Phase QFI from the covariance via the passive-unitary trace formula
/// `F = ½ Tr(G Σ⁻¹ G Σ − G²)` with the Hermitian generator `G = iK`, which in
/// real arithmetic reads `F = ½ Tr(K² − K Σ⁻¹ K Σ)`.
pub fn qfi_phase_generic(state: &GaussianState, channel: &PhaseChannel) -> Result<f64> {
    channel.check_modes(state.n())?;
    let sigma = state.cov();
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("state covariance".into()))?;
    let k = phase_rotation_generator(channel.f());
    let sigma_inv_k = chol.solve(&k);
    let term = &k * sigma_inv_k * sigma;
    let k2 = &k * &k;
    Ok(0.5 * (k2.trace() - term.trace()))
}

/// Star-graph phase QFI in the large-`n`, large-`r` regime:
/// `(16/9) f² N̄²`. The mode count only enters through `N̄`.
pub fn qfi_phase_star_asymptote(_n: usize, n_bar: f64, f: f64) -> f64 {
    16.0 / 9.0 * f * f * n_bar * n_bar
}

/// Separable-probe phase QFI at large `r`: `8 f² N̄² / n`.
pub fn qfi_phase_separable_asymptote(n: usize, n_bar: f64, f: f64) -> f64 {
    8.0 * f * f * n_bar * n_bar / n as f64
}

/// Displacement QFI as the quadratic form `4 fᵀ Σ f`.
pub fn qfi_displacement(state: &GaussianState, channel: &DisplacementChannel) -> Result<f64> {
    channel.check_modes(state.n())?;
    let f = DVector::from_column_slice(channel.f());
    Ok(4.0 * (state.cov() * &f).dot(&f))
}

/// Displacement QFI from the adjacency matrix:
///
/// `F = Σ 2e^{2r} f_i² + Σ 2e^{−2r} f_{i+n}² + Σ 4e^{2r} f_i f_{j+n} A_ij
///      + Σ 2e^{2r} f_{i+n} f_{j+n} [A²]_ij`
pub fn qfi_displacement_closed_form(
    g: &Graph,
    r: f64,
    channel: &DisplacementChannel,
) -> Result<f64> {
    check_squeeze(r)?;
    channel.check_modes(g.n())?;
    let (fq, fp) = (channel.q_part(), channel.p_part());
    let a = g.adjacency();
    let a2 = a * a;
    let e2 = (2.0 * r).exp();
    let em2 = (-2.0 * r).exp();

    let q_term: f64 = fq.iter().map(|x| 2.0 * e2 * x * x).sum();
    let p_term: f64 = fp.iter().map(|x| 2.0 * em2 * x * x).sum();
    let mut cross = 0.0;
    let mut walks = 0.0;
    for i in 0..g.n() {
        for j in 0..g.n() {
            cross += fq[i] * fp[j] * a[(i, j)];
            walks += fp[i] * fp[j] * a2[(i, j)];
        }
    }
    Ok(q_term + p_term + 4.0 * e2 * cross + 2.0 * e2 * walks)
}

/// Star-graph displacement QFI at large `n` and `r`: `(8/3) f² n N̄`.
pub fn qfi_displacement_star_asymptote(n: usize, n_bar: f64, f: f64) -> f64 {
    8.0 / 3.0 * f * f * n as f64 * n_bar
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{graph_state_covariance, mean_photon_number, squeeze_for_photon_budget};
    use crate::graph::{empty_graph, multipartite_graph, random_graph, star_graph};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ones(n: usize) -> PhaseChannel {
        PhaseChannel::uniform(n, 1.0, 0.0).unwrap()
    }

    #[test]
    fn channel_validation() {
        assert!(PhaseChannel::new(vec![0.0, 0.0], 0.0).is_err());
        assert!(PhaseChannel::new(vec![], 0.0).is_err());
        assert!(PhaseChannel::new(vec![f64::NAN], 0.0).is_err());
        assert!(DisplacementChannel::new(vec![1.0, 0.0, 1.0]).is_err());
        assert!(DisplacementChannel::new(vec![0.0; 4]).is_err());
        let g = star_graph(3).unwrap();
        assert_eq!(
            qfi_phase_closed_form(&g, 0.0, &ones(2)),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        );
        let d = DisplacementChannel::uniform(2, 1.0).unwrap();
        assert_eq!(
            qfi_displacement_closed_form(&g, 0.0, &d),
            Err(Error::DimensionMismatch {
                expected: 6,
                got: 4
            })
        );
    }

    #[test]
    fn phase_single_mode_squeezed() {
        let g = empty_graph(1).unwrap();
        for r in [0.0_f64, 0.3, 1.0, 2.5] {
            let expected = 2.0 * (2.0 * r).sinh().powi(2);
            let closed = qfi_phase_closed_form(&g, r, &ones(1)).unwrap();
            let state = graph_state_covariance(&g, r).unwrap();
            let generic = qfi_phase_generic(&state, &ones(1)).unwrap();
            assert_relative_eq!(closed, expected, max_relative = 1e-14);
            assert_relative_eq!(generic, expected, epsilon = 1e-12, max_relative = 1e-10);
        }
    }

    #[test]
    fn phase_star3_at_r0() {
        let g = star_graph(3).unwrap();
        assert_eq!(qfi_phase_closed_form(&g, 0.0, &ones(3)).unwrap(), 12.0);
        let state = graph_state_covariance(&g, 0.0).unwrap();
        assert_relative_eq!(
            qfi_phase_generic(&state, &ones(3)).unwrap(),
            12.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn phase_vacuum_carries_no_information() {
        let g = empty_graph(3).unwrap();
        let ch = PhaseChannel::new(vec![1.0, 0.0, 0.0], 0.0).unwrap();
        assert_eq!(qfi_phase_closed_form(&g, 0.0, &ch).unwrap(), 0.0);
        let vac = graph_state_covariance(&g, 0.0).unwrap();
        let ch = PhaseChannel::new(vec![0.3, -1.2, 2.0], 0.0).unwrap();
        assert!(qfi_phase_generic(&vac, &ch).unwrap().abs() < 1e-15);
    }

    #[test]
    fn uniform_reduction_matches_general_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..=10);
            let g = random_graph(n, 0.5, &mut rng).unwrap();
            let r = rng.random_range(0.0..3.0);
            let f = rng.random_range(0.1..2.0);
            let general = qfi_phase_closed_form(&g, r, &PhaseChannel::uniform(n, f, 0.0).unwrap());
            assert_relative_eq!(
                general.unwrap(),
                qfi_phase_uniform(&g, r, f).unwrap(),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn asymptote_arithmetic() {
        assert_relative_eq!(
            qfi_phase_star_asymptote(10, 3.0, 1.0),
            16.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            qfi_phase_star_asymptote(10, 30.0, 1.0),
            1600.0,
            max_relative = 1e-15
        );
        assert_eq!(qfi_phase_separable_asymptote(10, 10.0, 1.0), 80.0);
        assert_relative_eq!(
            qfi_displacement_star_asymptote(10, 3.0, 1.0),
            80.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            qfi_displacement_star_asymptote(10, 30.0, 1.0),
            800.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn separable_phase_asymptote_is_approached() {
        // n = 1: 2 sinh²2r against 8 N̄² with N̄ = sinh²r
        let g = empty_graph(1).unwrap();
        let mut last = f64::INFINITY;
        for r in [1.0, 2.0, 4.0, 8.0] {
            let exact = qfi_phase_closed_form(&g, r, &ones(1)).unwrap();
            let approx = qfi_phase_separable_asymptote(1, mean_photon_number(&g, r), 1.0);
            let gap = (exact / approx - 1.0).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-6);
        let g = empty_graph(10).unwrap();
        let exact = qfi_phase_closed_form(&g, 6.0, &ones(10)).unwrap();
        let approx = qfi_phase_separable_asymptote(10, mean_photon_number(&g, 6.0), 1.0);
        assert_relative_eq!(exact / approx, 1.0, max_relative = 1e-4);
    }

    #[test]
    fn star_phase_ratio_converges_in_r_at_fixed_n() {
        // At fixed n the ratio settles to a finite-n constant rather than 1;
        // the leading terms give e^{4r}((n-1)² + 2(n-1) + n/2) over
        // (16/9)(n/4 + (n-1)/2)² e^{4r}.
        let n = 10usize;
        let g = star_graph(n).unwrap();
        let nf = n as f64;
        let limit = ((nf - 1.0).powi(2) + 2.0 * (nf - 1.0) + nf / 2.0)
            / (16.0 / 9.0 * (nf / 4.0 + (nf - 1.0) / 2.0).powi(2));
        let ratios: Vec<f64> = [1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&r| {
                qfi_phase_closed_form(&g, r, &ones(n)).unwrap()
                    / qfi_phase_star_asymptote(n, mean_photon_number(&g, r), 1.0)
            })
            .collect();
        for w in ratios.windows(2) {
            assert!((w[1] - limit).abs() < (w[0] - limit).abs());
        }
        assert_relative_eq!(ratios[3], limit, max_relative = 1e-3);
        // the large-n limit of that constant is 1
        let big = 400.0_f64;
        let limit_big = ((big - 1.0).powi(2) + 2.0 * (big - 1.0) + big / 2.0)
            / (16.0 / 9.0 * (big / 4.0 + (big - 1.0) / 2.0).powi(2));
        assert!((limit_big - 1.0).abs() < 0.01);
    }

    #[test]
    fn displacement_examples() {
        let vac = graph_state_covariance(&empty_graph(1).unwrap(), 0.0).unwrap();
        let ch = DisplacementChannel::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(qfi_displacement(&vac, &ch).unwrap(), 2.0);

        let g = star_graph(3).unwrap();
        let ch = DisplacementChannel::uniform(3, 1.0).unwrap();
        assert_eq!(qfi_displacement_closed_form(&g, 0.0, &ch).unwrap(), 40.0);
        let state = graph_state_covariance(&g, 0.0).unwrap();
        assert_relative_eq!(
            qfi_displacement(&state, &ch).unwrap(),
            40.0,
            max_relative = 1e-15
        );

        let g = empty_graph(1).unwrap();
        let ch = DisplacementChannel::new(vec![0.0, 1.0]).unwrap();
        assert_relative_eq!(
            qfi_displacement_closed_form(&g, 1.0, &ch).unwrap(),
            2.0 * (-2f64).exp(),
            max_relative = 1e-15
        );

        for n in [1, 4, 7] {
            let g = empty_graph(n).unwrap();
            let ch = DisplacementChannel::uniform(n, 1.0).unwrap();
            let r: f64 = 0.8;
            let expected = 2.0 * n as f64 * ((2.0 * r).exp() + (-2.0 * r).exp());
            let state = graph_state_covariance(&g, r).unwrap();
            assert_relative_eq!(
                qfi_displacement(&state, &ch).unwrap(),
                expected,
                max_relative = 1e-14
            );
            assert_relative_eq!(
                qfi_displacement_closed_form(&g, r, &ch).unwrap(),
                expected,
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn displacement_star_large_r() {
        for n in [4usize, 20, 60] {
            let g = star_graph(n).unwrap();
            let r = 5.0;
            let q =
                qfi_displacement_closed_form(&g, r, &DisplacementChannel::uniform(n, 1.0).unwrap())
                    .unwrap();
            // exact: e^{2r}(2n + 8(n-1) + 2n(n-1)) + 2n e^{-2r}
            let nf = n as f64;
            let exact = (2.0 * r).exp() * (2.0 * nf + 8.0 * (nf - 1.0) + 2.0 * nf * (nf - 1.0))
                + 2.0 * nf * (-2.0 * r).exp();
            assert_relative_eq!(q, exact, max_relative = 1e-13);
            // leading behaviour 2n² e^{2r}
            let lead = 2.0 * nf * nf * (2.0 * r).exp();
            assert!((q / lead - 1.0).abs() < 4.0 / nf);
        }
    }

    #[test]
    fn multipartite_phase_uses_traces() {
        let g = multipartite_graph(3, 2).unwrap();
        let closed = qfi_phase_closed_form(&g, 0.7, &ones(6)).unwrap();
        let uniform = qfi_phase_uniform(&g, 0.7, 1.0).unwrap();
        assert_relative_eq!(closed, uniform, max_relative = 1e-13);
        let state = graph_state_covariance(&g, 0.7).unwrap();
        assert_relative_eq!(
            qfi_phase_generic(&state, &ones(6)).unwrap(),
            closed,
            max_relative = 1e-9
        );
    }

    #[test]
    fn equal_budget_star_beats_separable() {
        for n in 2..=12 {
            let star = star_graph(n).unwrap();
            let sep = empty_graph(n).unwrap();
            for exp10 in [-1.0, 0.0, 1.0, 2.0, 3.0] {
                let budget = 10f64.powf(exp10);
                let rs = squeeze_for_photon_budget(&star, budget).unwrap();
                let re = squeeze_for_photon_budget(&sep, budget).unwrap();
                let ps = qfi_phase_uniform(&star, rs, 1.0).unwrap();
                let pe = qfi_phase_uniform(&sep, re, 1.0).unwrap();
                assert!(
                    ps >= pe * (1.0 - 1e-12),
                    "phase n={n} N={budget}: {ps} < {pe}"
                );
                let ch = DisplacementChannel::uniform(n, 1.0).unwrap();
                let ds = qfi_displacement_closed_form(&star, rs, &ch).unwrap();
                let de = qfi_displacement_closed_form(&sep, re, &ch).unwrap();
                assert!(
                    ds >= de * (1.0 - 1e-12),
                    "displacement n={n} N={budget}: {ds} < {de}"
                );
            }
        }
    }
}
