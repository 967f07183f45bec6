//! Classical Fisher information of local homodyne detection.
//!
//! Each mode `j` is measured along a quadrature chosen by the local-oscillator
//! phase `θ_j`. The outcomes are jointly Gaussian with mean `ω` and covariance
//! `σ_M`, so the Fisher information follows from the moments and their
//! `φ`-derivatives alone.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::check_squeeze;
use crate::graph::Graph;
use crate::qfi::{DisplacementChannel, PhaseChannel};
use crate::simplex::{nelder_mead, NelderMeadOptions};

/// Sensing modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Phase,
    Displacement,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Phase => "phase",
            Modality::Displacement => "displacement",
        })
    }
}

/// Local-oscillator phases, one per mode, reduced to `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneSetting {
    theta: Vec<f64>,
}

impl HomodyneSetting {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(
                "homodyne angles must be finite".into(),
            ));
        }
        let theta = theta
            .into_iter()
            .map(|t| {
                let reduced = t.rem_euclid(TAU);
                // rem_euclid can round up to exactly 2π for tiny negative input
                if reduced >= TAU {
                    0.0
                } else {
                    reduced
                }
            })
            .collect();
        Ok(HomodyneSetting { theta })
    }

    /// `θ₁ = α`, `θ_j = β` for every leaf `j ≥ 2`.
    pub fn star_ansatz(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        let mut theta = vec![beta; n];
        if let Some(first) = theta.first_mut() {
            *first = alpha;
        }
        Self::new(theta)
    }

    pub fn uniform(n: usize, theta: f64) -> Result<Self> {
        Self::new(vec![theta; n])
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }
}

/// Mean and covariance of the homodyne outcomes and their `φ`-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMoments {
    omega: DVector<f64>,
    sigma: DMatrix<f64>,
    d_omega: DVector<f64>,
    d_sigma: DMatrix<f64>,
}

impl MeasurementMoments {
    /// Checks shapes, symmetry of `σ_M` and `∂σ_M`, and positive
    /// definiteness of `σ_M`.
    pub fn new(
        omega: DVector<f64>,
        sigma: DMatrix<f64>,
        d_omega: DVector<f64>,
        d_sigma: DMatrix<f64>,
    ) -> Result<Self> {
        let n = sigma.nrows();
        if !sigma.is_square() || n == 0 {
            return Err(Error::InvalidArgument(
                "sigma_M must be square and non-empty".into(),
            ));
        }
        for len in [omega.len(), d_omega.len(), d_sigma.nrows(), d_sigma.ncols()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        let tol = 1e-12 * sigma.amax().max(d_sigma.amax()).max(1.0);
        if (&sigma - sigma.transpose()).amax() > tol
            || (&d_sigma - d_sigma.transpose()).amax() > tol
        {
            return Err(Error::InvalidArgument(
                "moment matrices must be symmetric".into(),
            ));
        }
        check_spd(&sigma)?;
        Ok(MeasurementMoments {
            omega,
            sigma,
            d_omega,
            d_sigma,
        })
    }

    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn d_omega(&self) -> &DVector<f64> {
        &self.d_omega
    }

    pub fn d_sigma(&self) -> &DMatrix<f64> {
        &self.d_sigma
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }
}

/// Reciprocal condition number below which `σ_M` counts as singular.
const SINGULAR_RCOND: f64 = 1e-13;

fn check_spd(sigma: &DMatrix<f64>) -> Result<()> {
    let eig = sigma.clone().symmetric_eigen();
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.amax();
    if min.is_nan() || min <= 0.0 || !max.is_finite() || min < SINGULAR_RCOND * max {
        return Err(Error::SingularMoments);
    }
    Ok(())
}

/// The diagonal trigonometric matrices entering the outcome moments.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigMatrices {
    /// `diag(cos f_j φ)`
    pub g1: DMatrix<f64>,
    /// `diag(sin f_j φ)`
    pub f1: DMatrix<f64>,
    /// `diag(cos θ_j)`
    pub g2: DMatrix<f64>,
    /// `diag(sin θ_j)`
    pub f2: DMatrix<f64>,
}

pub fn diag_trig_matrices(f: &[f64], phi: f64, theta: &[f64]) -> Result<TrigMatrices> {
    if f.len() != theta.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            got: theta.len(),
        });
    }
    let diag = |it: Vec<f64>| DMatrix::from_diagonal(&DVector::from_vec(it));
    Ok(TrigMatrices {
        g1: diag(f.iter().map(|fj| (fj * phi).cos()).collect()),
        f1: diag(f.iter().map(|fj| (fj * phi).sin()).collect()),
        g2: diag(theta.iter().map(|t| t.cos()).collect()),
        f2: diag(theta.iter().map(|t| t.sin()).collect()),
    })
}

/// `U`, `U⁻¹`, `V` and `U + V U⁻¹ V` for squeeze `r` and adjacency `A`.
struct GraphBlocks {
    u: DMatrix<f64>,
    u_inv: DMatrix<f64>,
    v: DMatrix<f64>,
    p_block: DMatrix<f64>,
}

impl GraphBlocks {
    fn new(g: &Graph, r: f64) -> Self {
        let n = g.n();
        let u = DMatrix::identity(n, n) * (-2.0 * r).exp();
        let u_inv = DMatrix::identity(n, n) * (2.0 * r).exp();
        let v = g.adjacency().clone();
        let p_block = &u + &v * &u_inv * &v;
        GraphBlocks {
            u,
            u_inv,
            v,
            p_block,
        }
    }
}

/// Outcome moments for phase sensing. `ω = 0` and
///
/// `σ_M = ½[S U⁻¹ S + C V U⁻¹ S + S U⁻¹ V C + C (U + V U⁻¹ V) C]`
///
/// with `S = F₂G₁ − G₂F₁` and `C = G₁G₂ + F₁F₂`. The derivative uses
/// `∂G₁/∂φ = −D F₁`, `∂F₁/∂φ = D G₁` with `D = diag(f)`.
pub fn phase_measurement_moments(
    g: &Graph,
    r: f64,
    channel: &PhaseChannel,
    setting: &HomodyneSetting,
) -> Result<MeasurementMoments> {
    check_squeeze(r)?;
    let n = g.n();
    for len in [channel.n(), setting.n()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: len,
            });
        }
    }
    let t = diag_trig_matrices(channel.f(), channel.phi(), setting.theta())?;
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(channel.f()));
    let dg1 = -(&d * &t.f1);
    let df1 = &d * &t.g1;

    let s = &t.f2 * &t.g1 - &t.g2 * &t.f1;
    let c = &t.g1 * &t.g2 + &t.f1 * &t.f2;
    let ds = &t.f2 * &dg1 - &t.g2 * &df1;
    let dc = &dg1 * &t.g2 + &df1 * &t.f2;

    let b = GraphBlocks::new(g, r);
    let vu = &b.v * &b.u_inv;
    let uv = &b.u_inv * &b.v;

    let sigma = (&s * &b.u_inv * &s + &c * &vu * &s + &s * &uv * &c + &c * &b.p_block * &c) * 0.5;
    let d_sigma = (&ds * &b.u_inv * &s
        + &s * &b.u_inv * &ds
        + &dc * &vu * &s
        + &c * &vu * &ds
        + &ds * &uv * &c
        + &s * &uv * &dc
        + &dc * &b.p_block * &c
        + &c * &b.p_block * &dc)
        * 0.5;
    check_spd(&sigma)?;
    Ok(MeasurementMoments {
        omega: DVector::zeros(n),
        sigma,
        d_omega: DVector::zeros(n),
        d_sigma,
    })
}

/// Outcome moments for displacement sensing:
///
/// `ω_i = φ([F₂]_ii f_{n+i} − [G₂]_ii f_i)`,
/// `σ_M = ½[F₂U⁻¹F₂ + G₂VU⁻¹F₂ + F₂U⁻¹VG₂ + G₂UG₂ + G₂VU⁻¹VG₂]`.
///
/// `σ_M` does not depend on `φ`, so `∂σ_M/∂φ = 0`.
pub fn displacement_measurement_moments(
    g: &Graph,
    r: f64,
    channel: &DisplacementChannel,
    phi: f64,
    setting: &HomodyneSetting,
) -> Result<MeasurementMoments> {
    check_squeeze(r)?;
    let n = g.n();
    if channel.n() != n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: channel.f().len(),
        });
    }
    if setting.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: setting.n(),
        });
    }
    if !phi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "phi must be finite, got {phi}"
        )));
    }
    let (fq, fp) = (channel.q_part(), channel.p_part());
    let d_omega = DVector::from_fn(n, |i, _| {
        let theta = setting.theta()[i];
        theta.sin() * fp[i] - theta.cos() * fq[i]
    });
    let omega = &d_omega * phi;

    let t = diag_trig_matrices(&vec![0.0; n], 0.0, setting.theta())?;
    let b = GraphBlocks::new(g, r);
    let (f2, g2) = (&t.f2, &t.g2);
    let sigma = (f2 * &b.u_inv * f2
        + g2 * &b.v * &b.u_inv * f2
        + f2 * &b.u_inv * &b.v * g2
        + g2 * &b.u * g2
        + g2 * &b.v * &b.u_inv * &b.v * g2)
        * 0.5;
    check_spd(&sigma)?;
    Ok(MeasurementMoments {
        omega,
        sigma,
        d_omega,
        d_sigma: DMatrix::zeros(n, n),
    })
}

/// Fisher information of a Gaussian outcome distribution:
/// `I = ½ Tr[(∂σ_M σ_M⁻¹)²] + ∂ωᵀ σ_M⁻¹ ∂ω`.
pub fn gaussian_fisher_information(m: &MeasurementMoments) -> Result<f64> {
    let chol = m
        .sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("sigma_M".into()))?;
    let x = chol.solve(&m.d_sigma);
    let scale_term = 0.5 * (&x * &x).trace();
    let location_term = m.d_omega.dot(&chol.solve(&m.d_omega));
    Ok(scale_term + location_term)
}

fn moments_for(
    g: &Graph,
    r: f64,
    f: &[f64],
    phi: f64,
    setting: &HomodyneSetting,
    modality: Modality,
) -> Result<MeasurementMoments> {
    match modality {
        Modality::Phase => {
            phase_measurement_moments(g, r, &PhaseChannel::new(f.to_vec(), phi)?, setting)
        }
        Modality::Displacement => displacement_measurement_moments(
            g,
            r,
            &DisplacementChannel::new(f.to_vec())?,
            phi,
            setting,
        ),
    }
}

fn validate_inputs(g: &Graph, r: f64, f: &[f64], phi: f64, modality: Modality) -> Result<()> {
    check_squeeze(r)?;
    if !phi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "phi must be finite, got {phi}"
        )));
    }
    let n = match modality {
        Modality::Phase => PhaseChannel::new(f.to_vec(), phi)?.n(),
        Modality::Displacement => DisplacementChannel::new(f.to_vec())?.n(),
    };
    if n != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: n,
        });
    }
    Ok(())
}

/// Homodyne FI of a star graph with `θ₁ = α` on the centre and `θ_j = β` on
/// every leaf. `f` has length `n` for phase and `2n` for displacement.
#[allow(clippy::too_many_arguments)]
pub fn fi_star_ansatz(
    g: &Graph,
    r: f64,
    f: &[f64],
    phi: f64,
    alpha: f64,
    beta: f64,
    modality: Modality,
) -> Result<f64> {
    if !g.is_star_centered_on_first() {
        return Err(Error::NotStarGraph);
    }
    let setting = HomodyneSetting::star_ansatz(g.n(), alpha, beta)?;
    gaussian_fisher_information(&moments_for(g, r, f, phi, &setting, modality)?)
}

/// Homodyne FI for an arbitrary per-mode angle vector.
pub fn fi_for_setting(
    g: &Graph,
    r: f64,
    f: &[f64],
    phi: f64,
    setting: &HomodyneSetting,
    modality: Modality,
) -> Result<f64> {
    gaussian_fisher_information(&moments_for(g, r, f, phi, setting, modality)?)
}

/// Best `(α, β)` found for the star-graph ansatz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleOptimum {
    pub alpha: f64,
    pub beta: f64,
    pub fi: f64,
}

/// Points per axis of the coarse search grid over `[0, 2π)²`.
pub const ANGLE_GRID: usize = 64;

/// Log-spaced offsets `10^{-k/4}`, `k = 4..=40`, probed on either side of
/// each quadrature-aligned angle.
const AXIS_OFFSET_STEPS: std::ops::RangeInclusive<i32> = 4..=40;

/// Number of best candidates refined by Nelder–Mead.
const REFINED_CANDIDATES: usize = 6;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    alpha: f64,
    beta: f64,
    fi: f64,
    scale: f64,
}

/// Angles where a local oscillator reads a bare `q` or `p` quadrature of a
/// rotated mode. Near these the FI can peak within `O(e^{-2r})`.
fn axis_angles(f: &[f64], phi: f64, modality: Modality) -> Vec<f64> {
    let mut shifts = vec![0.0];
    if modality == Modality::Phase {
        for &fj in f {
            let s = (fj * phi).rem_euclid(FRAC_PI_2);
            if shifts.iter().all(|&t: &f64| (t - s).abs() > 1e-12) {
                shifts.push(s);
            }
        }
    }
    shifts
        .iter()
        .flat_map(|&s| (0..4).map(move |k| s + k as f64 * FRAC_PI_2))
        .collect()
}

/// Maximises the star-ansatz FI over `(α, β)`.
///
/// A uniform 64×64 grid over `[0, 2π)²` is augmented by log-spaced probes
/// hugging the quadrature-aligned angles in each coordinate, because at
/// large squeezing the maxima sit on ridges far narrower than any uniform
/// grid. The best few candidates are then refined by Nelder–Mead with a
/// starting simplex matched to the scale on which each was found.
pub fn optimize_angles(
    g: &Graph,
    r: f64,
    f: &[f64],
    phi: f64,
    modality: Modality,
) -> Result<AngleOptimum> {
    if !g.is_star_centered_on_first() {
        return Err(Error::NotStarGraph);
    }
    validate_inputs(g, r, f, phi, modality)?;

    let eval = |alpha: f64, beta: f64| fi_star_ansatz(g, r, f, phi, alpha, beta, modality).ok();
    let step = TAU / ANGLE_GRID as f64;
    let mut candidates = Vec::new();
    let mut push = |alpha: f64, beta: f64, scale: f64| {
        if let Some(fi) = eval(alpha, beta) {
            candidates.push(Candidate {
                alpha,
                beta,
                fi,
                scale,
            });
        }
    };
    let grid: Vec<f64> = (0..ANGLE_GRID).map(|i| i as f64 * step).collect();
    for &alpha in &grid {
        for &beta in &grid {
            push(alpha, beta, step / 2.0);
        }
    }
    for axis in axis_angles(f, phi, modality) {
        for k in AXIS_OFFSET_STEPS {
            let delta = 10f64.powf(-k as f64 / 4.0);
            for offset in [axis - delta, axis + delta] {
                for &other in &grid {
                    push(other, offset, delta / 2.0);
                    push(offset, other, delta / 2.0);
                }
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::SingularMoments);
    }
    candidates.sort_by(|a, b| b.fi.total_cmp(&a.fi));

    let objective = |x: &[f64]| eval(x[0], x[1]).map(|v| -v).unwrap_or(f64::INFINITY);
    let mut best = candidates[0];
    for c in candidates.iter().take(REFINED_CANDIDATES) {
        let opts = NelderMeadOptions {
            initial_step: c.scale,
            x_tolerance: 1e-14,
            f_tolerance: 1e-15,
            max_iterations: 5000,
        };
        let refined = nelder_mead(objective, &[c.alpha, c.beta], &opts);
        if -refined.value > best.fi {
            best = Candidate {
                alpha: refined.x[0],
                beta: refined.x[1],
                fi: -refined.value,
                scale: c.scale,
            };
        }
    }
    Ok(AngleOptimum {
        alpha: best.alpha.rem_euclid(TAU),
        beta: best.beta.rem_euclid(TAU),
        fi: best.fi,
    })
}

/// Monte-Carlo estimate of the Fisher information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub const MIN_MONTE_CARLO_SAMPLES: usize = 10_000;

/// Samples outcomes `x ~ N(ω, σ_M)` and averages the squared score
///
/// `∂_φ log p = −½ Tr(σ⁻¹∂σ) + ½ yᵀσ⁻¹∂σσ⁻¹y + ∂ωᵀσ⁻¹y`,  `y = x − ω`.
pub fn fi_monte_carlo(
    m: &MeasurementMoments,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples < MIN_MONTE_CARLO_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "Monte-Carlo FI needs at least {MIN_MONTE_CARLO_SAMPLES} samples, got {samples}"
        )));
    }
    let chol = m
        .sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("sigma_M".into()))?;
    let l = chol.l();
    let inv_ds = chol.solve(&m.d_sigma);
    let w = chol.solve(&inv_ds.transpose());
    let v = chol.solve(&m.d_omega);
    let offset = 0.5 * inv_ds.trace();

    let n = m.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = DVector::zeros(n);
    let (mut sum, mut sum_sq) = (0.0_f64, 0.0_f64);
    for _ in 0..samples {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        let y = &l * &z;
        let score = -offset + 0.5 * y.dot(&(&w * &y)) + v.dot(&y);
        let s2 = score * score;
        sum += s2;
        sum_sq += s2 * s2;
    }
    let count = samples as f64;
    let mean = sum / count;
    let variance = ((sum_sq / count - mean * mean) * count / (count - 1.0)).max(0.0);
    Ok(MonteCarloEstimate {
        estimate: mean,
        std_error: (variance / count).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::graph_state_covariance;
    use crate::graph::{empty_graph, graph_from_edges, random_graph, star_graph};
    use crate::qfi::{qfi_displacement_closed_form, qfi_phase_closed_form};
    use approx::assert_relative_eq;
    use rand::Rng;
    use std::f64::consts::FRAC_PI_2;

    fn scalar(omega: f64, sigma: f64, d_omega: f64, d_sigma: f64) -> MeasurementMoments {
        MeasurementMoments::new(
            DVector::from_element(1, omega),
            DMatrix::from_element(1, 1, sigma),
            DVector::from_element(1, d_omega),
            DMatrix::from_element(1, 1, d_sigma),
        )
        .unwrap()
    }

    #[test]
    fn trig_matrices() {
        let t = diag_trig_matrices(&[1.0, 2.0], 0.0, &[0.0, 0.0]).unwrap();
        assert_eq!(t.g1, DMatrix::identity(2, 2));
        assert_eq!(t.f1, DMatrix::zeros(2, 2));
        let t = diag_trig_matrices(&[1.0, 2.0], 0.1, &[FRAC_PI_2, FRAC_PI_2]).unwrap();
        assert!(t.g2.amax() < 1e-15);
        assert_eq!(t.f2, DMatrix::identity(2, 2));
        assert_eq!(t.f1[(0, 0)], 0.1f64.sin());
        assert_eq!(t.f1[(1, 1)], 0.2f64.sin());
        assert!(diag_trig_matrices(&[1.0], 0.0, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn setting_reduces_angles() {
        let s = HomodyneSetting::new(vec![-0.5, 7.0, TAU]).unwrap();
        assert_relative_eq!(s.theta()[0], TAU - 0.5);
        assert_relative_eq!(s.theta()[1], 7.0 - TAU);
        assert_eq!(s.theta()[2], 0.0);
        assert!(s.theta().iter().all(|&t| (0.0..TAU).contains(&t)));
        assert_eq!(
            HomodyneSetting::star_ansatz(3, 1.0, 2.0).unwrap().theta(),
            &[1.0, 2.0, 2.0]
        );
    }

    #[test]
    fn phase_moments_single_mode_limits() {
        // θ = 0 reads out p, whose variance is ½U = ½e^{-2r}; θ = π/2 reads
        // out q with variance ½U⁻¹ = ½e^{2r}.
        let g = empty_graph(1).unwrap();
        let r = 0.8;
        let ch = PhaseChannel::new(vec![1.0], 0.0).unwrap();
        let m = phase_measurement_moments(&g, r, &ch, &HomodyneSetting::uniform(1, 0.0).unwrap())
            .unwrap();
        assert_relative_eq!(
            m.sigma()[(0, 0)],
            0.5 * (-2.0 * r).exp(),
            max_relative = 1e-15
        );
        assert_eq!(m.omega()[0], 0.0);
        let m =
            phase_measurement_moments(&g, r, &ch, &HomodyneSetting::uniform(1, FRAC_PI_2).unwrap())
                .unwrap();
        assert_relative_eq!(
            m.sigma()[(0, 0)],
            0.5 * (2.0 * r).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn phase_sigma_is_projected_state_covariance() {
        // σ_M = C Σ Cᵀ with C = [diag(S), diag(C)] acting on (q, p)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.random_range(1..=6);
            let g = random_graph(n, 0.5, &mut rng).unwrap();
            let r = rng.random_range(0.0..1.5);
            let f: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let phi = rng.random_range(-1.0..1.0);
            let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
            let Ok(m) = phase_measurement_moments(
                &g,
                r,
                &PhaseChannel::new(f.clone(), phi).unwrap(),
                &HomodyneSetting::new(theta.clone()).unwrap(),
            ) else {
                continue;
            };
            let state = graph_state_covariance(&g, r).unwrap();
            let mut proj = DMatrix::zeros(n, 2 * n);
            for j in 0..n {
                proj[(j, j)] = (theta[j] - f[j] * phi).sin();
                proj[(j, n + j)] = (theta[j] - f[j] * phi).cos();
            }
            let expected = &proj * state.cov() * proj.transpose();
            assert!((&expected - m.sigma()).amax() < 1e-10 * expected.amax());
        }
    }

    #[test]
    fn displacement_moments_examples() {
        let g = empty_graph(1).unwrap();
        let ch = DisplacementChannel::new(vec![1.0, 0.0]).unwrap();
        let m = displacement_measurement_moments(
            &g,
            0.0,
            &ch,
            2.0,
            &HomodyneSetting::uniform(1, 0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(m.omega()[0], -2.0);
        assert_eq!(m.sigma()[(0, 0)], 0.5);

        let ch = DisplacementChannel::new(vec![0.0, 1.0]).unwrap();
        let phi = 0.37;
        let m = displacement_measurement_moments(
            &g,
            1.0,
            &ch,
            phi,
            &HomodyneSetting::uniform(1, FRAC_PI_2).unwrap(),
        )
        .unwrap();
        assert_relative_eq!(m.omega()[0], phi, max_relative = 1e-15);
        assert_relative_eq!(m.sigma()[(0, 0)], 0.5 * 2f64.exp(), max_relative = 1e-15);
        assert_eq!(m.d_sigma(), &DMatrix::zeros(1, 1));

        let g = star_graph(4).unwrap();
        let ch = DisplacementChannel::uniform(4, 1.0).unwrap();
        let setting = HomodyneSetting::new(vec![0.3, 1.1, 2.0, 5.0]).unwrap();
        let m = displacement_measurement_moments(&g, 0.5, &ch, 0.0, &setting).unwrap();
        assert_eq!(m.omega(), &DVector::zeros(4));
    }

    #[test]
    fn gaussian_fi_scalar_models() {
        let s = 0.7;
        assert_relative_eq!(
            gaussian_fisher_information(&scalar(0.0, s * s, 1.0, 0.0)).unwrap(),
            1.0 / (s * s),
            max_relative = 1e-15
        );
        for phi in [-1.0_f64, 0.0, 0.4] {
            let sigma = (2.0 * phi).exp();
            let fi = gaussian_fisher_information(&scalar(0.0, sigma, 0.0, 2.0 * sigma)).unwrap();
            assert_relative_eq!(fi, 2.0, max_relative = 1e-14);
        }
        assert_eq!(
            gaussian_fisher_information(&scalar(0.0, 1.0, 0.0, 0.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn moments_reject_bad_sigma() {
        let r = MeasurementMoments::new(
            DVector::zeros(1),
            DMatrix::from_element(1, 1, -1.0),
            DVector::zeros(1),
            DMatrix::zeros(1, 1),
        );
        assert_eq!(r, Err(Error::SingularMoments));
        let r = MeasurementMoments::new(
            DVector::zeros(2),
            DMatrix::identity(2, 2),
            DVector::zeros(1),
            DMatrix::zeros(2, 2),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ansatz_matches_uniform_setting() {
        let g = star_graph(3).unwrap();
        for modality in [Modality::Phase, Modality::Displacement] {
            let f = match modality {
                Modality::Phase => vec![1.0; 3],
                Modality::Displacement => vec![1.0; 6],
            };
            for theta in [0.2, 1.3, 2.9] {
                let a = fi_star_ansatz(&g, 0.9, &f, 0.0, theta, theta, modality).unwrap();
                let b = fi_for_setting(
                    &g,
                    0.9,
                    &f,
                    0.0,
                    &HomodyneSetting::uniform(3, theta).unwrap(),
                    modality,
                )
                .unwrap();
                assert_eq!(a, b);
            }
        }
        let path = graph_from_edges(3, &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(
            fi_star_ansatz(&path, 1.0, &[1.0; 3], 0.0, 0.0, 0.0, Modality::Phase),
            Err(Error::NotStarGraph)
        );
        assert_eq!(
            optimize_angles(&path, 1.0, &[1.0; 3], 0.0, Modality::Phase),
            Err(Error::NotStarGraph)
        );
    }

    #[test]
    fn single_mode_displacement_optimum_saturates_qfi() {
        // f = (0, 1) shifts q; the q variance is ½e^{2r}, so both FI and QFI
        // equal 2e^{-2r}.
        let g = empty_graph(1).unwrap();
        let r = 0.6;
        let f = [0.0, 1.0];
        let fi = |theta: f64| {
            fi_for_setting(
                &g,
                r,
                &f,
                0.0,
                &HomodyneSetting::uniform(1, theta).unwrap(),
                Modality::Displacement,
            )
            .unwrap()
        };
        let best = fi(FRAC_PI_2);
        assert_relative_eq!(best, 2.0 * (-2.0 * r).exp(), max_relative = 1e-14);
        for k in 0..100 {
            assert!(fi(k as f64 * 0.0314) <= best * (1.0 + 1e-12));
        }
        let qfi =
            qfi_displacement_closed_form(&g, r, &DisplacementChannel::new(f.to_vec()).unwrap())
                .unwrap();
        assert_relative_eq!(best, qfi, max_relative = 1e-14);
    }

    #[test]
    fn optimized_ratios_on_small_stars() {
        for n in [2usize, 4] {
            let g = star_graph(n).unwrap();
            let r = 1.0;
            let disp =
                optimize_angles(&g, r, &vec![1.0; 2 * n], 0.0, Modality::Displacement).unwrap();
            let qd =
                qfi_displacement_closed_form(&g, r, &DisplacementChannel::uniform(n, 1.0).unwrap())
                    .unwrap();
            assert!(disp.fi / qd >= 0.99 && disp.fi <= qd * (1.0 + 1e-9));

            let phase = optimize_angles(&g, r, &vec![1.0; n], 0.0, Modality::Phase).unwrap();
            let qp =
                qfi_phase_closed_form(&g, r, &PhaseChannel::uniform(n, 1.0, 0.0).unwrap()).unwrap();
            let ratio = phase.fi / qp;
            assert!((0.45..=0.55).contains(&ratio), "n={n} ratio={ratio}");
        }
    }

    #[test]
    fn optimizer_is_deterministic() {
        let g = star_graph(3).unwrap();
        let a = optimize_angles(&g, 1.0, &[1.0; 3], 0.0, Modality::Phase).unwrap();
        let b = optimize_angles(&g, 1.0, &[1.0; 3], 0.0, Modality::Phase).unwrap();
        assert_eq!(a, b);
        assert!((0.0..TAU).contains(&a.alpha) && (0.0..TAU).contains(&a.beta));
    }

    #[test]
    fn monte_carlo_scalar_and_zero_models() {
        let s = 0.5;
        let est = fi_monte_carlo(&scalar(0.0, s * s, 1.0, 0.0), 100_000, 9).unwrap();
        assert!((est.estimate - 4.0).abs() < 3.0 * est.std_error, "{est:?}");
        let zero = fi_monte_carlo(&scalar(0.3, 2.0, 0.0, 0.0), 10_000, 1).unwrap();
        assert_eq!(zero.estimate, 0.0);
        assert_eq!(zero.std_error, 0.0);
        assert!(fi_monte_carlo(&scalar(0.0, 1.0, 1.0, 0.0), 100, 1).is_err());
    }

    #[test]
    fn displacement_fi_is_phi_independent() {
        let g = star_graph(5).unwrap();
        let f = vec![1.0; 10];
        let a = fi_star_ansatz(&g, 1.2, &f, 0.0, 0.7, 2.1, Modality::Displacement).unwrap();
        let b = fi_star_ansatz(&g, 1.2, &f, 1.0, 0.7, 2.1, Modality::Displacement).unwrap();
        assert_eq!(a, b);
    }
}
