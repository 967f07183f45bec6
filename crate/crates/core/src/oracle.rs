//! Randomised cross-checks between independent routes to the same quantity.
//!
//! Each suite draws a deterministic list of cases from a seed, evaluates two
//! routes per case and reports the worst relative (or absolute) disagreement.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{graph_state_covariance, mean_photon_number, photon_number_from_covariance};
use crate::graph::{
    empty_graph, multipartite_graph, random_graph, rectangular_graph, star_graph, Graph,
};
use crate::homodyne::{
    displacement_measurement_moments, phase_measurement_moments, HomodyneSetting,
};
use crate::qfi::{
    qfi_displacement, qfi_displacement_closed_form, qfi_phase_closed_form, qfi_phase_generic,
    DisplacementChannel, PhaseChannel,
};

pub const PHASE_TOLERANCE: f64 = 1e-9;
pub const DISPLACEMENT_TOLERANCE: f64 = 1e-9;
pub const PHOTON_TOLERANCE: f64 = 1e-12;
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;
pub const DERIVATIVE_STEP: f64 = 1e-5;

/// `(f(x + h) − f(x − h)) / 2h`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// `|a − b| / max(|a|, |b|, 1e-30)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let diff = (a - b).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / a.abs().max(b.abs()).max(1e-30)
}

/// Outcome of one equivalence suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub suite: String,
    pub case_count: usize,
    pub max_rel_error: f64,
    pub worst_case: String,
    pub tolerance: f64,
    pub passed: bool,
}

impl EquivalenceReport {
    fn from_errors(suite: &str, tolerance: f64, errors: Vec<(f64, String)>) -> Self {
        let case_count = errors.len();
        let (max_rel_error, worst_case) =
            errors
                .into_iter()
                .fold((0.0, String::new()), |(best, desc), (err, d)| {
                    if err > best || (desc.is_empty() && err >= best) {
                        (err, d)
                    } else {
                        (best, desc)
                    }
                });
        EquivalenceReport {
            suite: suite.to_string(),
            case_count,
            max_rel_error,
            worst_case,
            tolerance,
            passed: max_rel_error <= tolerance,
        }
    }
}

/// One randomised input: a graph, a squeeze value and a coefficient vector
/// (length `n` or `2n` depending on the suite).
#[derive(Debug, Clone)]
pub struct OracleCase {
    pub graph: Graph,
    pub r: f64,
    pub f: Vec<f64>,
    pub phi: f64,
    pub theta: Vec<f64>,
}

impl OracleCase {
    fn describe(&self) -> String {
        let mut s = format!(
            "graph={} n={} r={:.6} f=[",
            self.graph.kind(),
            self.graph.n(),
            self.r
        );
        for (i, x) in self.f.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            let _ = write!(s, "{x:.4}");
        }
        let _ = write!(s, "] phi={:.4}", self.phi);
        if self.graph.n() <= 12 {
            let _ = write!(s, " edges={:?}", self.graph.edges());
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CoefficientLength {
    Modes,
    Quadratures,
}

fn structured_graphs(rng: &mut ChaCha8Rng) -> Vec<Graph> {
    vec![
        star_graph(rng.random_range(2..=8)).expect("valid star"),
        multipartite_graph(rng.random_range(2..=4), rng.random_range(1..=2))
            .expect("valid multipartite"),
        rectangular_graph(2).expect("valid rectangular"),
        empty_graph(rng.random_range(1..=8)).expect("valid empty"),
    ]
}

/// Deterministic case list: the structured families first, then
/// Erdős–Rényi graphs with `p = ½`. `n ∈ [1, 8]`, `r ∈ [0, 2]`,
/// `f_i ∈ [−2, 2]`, `φ ∈ [−π, π]`, `θ_j ∈ [0, 2π)`.
fn generate_cases(count: usize, seed: u64, coeffs: CoefficientLength) -> Vec<OracleCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let structured = structured_graphs(&mut rng);
    let mut cases = Vec::with_capacity(count);
    for idx in 0..count {
        let graph = match structured.get(idx) {
            Some(g) => g.clone(),
            None => {
                let n = rng.random_range(1..=8);
                random_graph(n, 0.5, &mut rng).expect("valid random graph")
            }
        };
        let n = graph.n();
        let len = match coeffs {
            CoefficientLength::Modes => n,
            CoefficientLength::Quadratures => 2 * n,
        };
        let r = rng.random_range(0.0..=2.0);
        let mut f: Vec<f64> = (0..len).map(|_| rng.random_range(-2.0..=2.0)).collect();
        if f.iter().all(|&x| x == 0.0) {
            f[0] = 1.0;
        }
        let phi = rng.random_range(-std::f64::consts::PI..=std::f64::consts::PI);
        let theta = (0..n)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        cases.push(OracleCase {
            graph,
            r,
            f,
            phi,
            theta,
        });
    }
    cases
}

fn require_cases(case_count: usize) -> Result<()> {
    if case_count == 0 {
        return Err(Error::InvalidArgument(
            "case_count must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Compares the phase QFI from the adjacency closed form with the trace
/// formula on the covariance, for explicit cases.
pub fn phase_equivalence_on(cases: &[OracleCase]) -> EquivalenceReport {
    let errors = cases
        .iter()
        .map(|c| {
            let err = PhaseChannel::new(c.f.clone(), 0.0)
                .and_then(|ch| {
                    let closed = qfi_phase_closed_form(&c.graph, c.r, &ch)?;
                    let state = graph_state_covariance(&c.graph, c.r)?;
                    let generic = qfi_phase_generic(&state, &ch)?;
                    Ok(relative_error(closed, generic))
                })
                .unwrap_or(f64::INFINITY);
            (err, c.describe())
        })
        .collect();
    EquivalenceReport::from_errors("phase", PHASE_TOLERANCE, errors)
}

pub fn run_phase_equivalence(case_count: usize, seed: u64) -> Result<EquivalenceReport> {
    require_cases(case_count)?;
    Ok(phase_equivalence_on(&generate_cases(
        case_count,
        seed,
        CoefficientLength::Modes,
    )))
}

/// Compares the displacement QFI closed form with `4 fᵀΣf`.
pub fn displacement_equivalence_on(cases: &[OracleCase]) -> EquivalenceReport {
    let errors = cases
        .iter()
        .map(|c| {
            let err = DisplacementChannel::new(c.f.clone())
                .and_then(|ch| {
                    let closed = qfi_displacement_closed_form(&c.graph, c.r, &ch)?;
                    let state = graph_state_covariance(&c.graph, c.r)?;
                    Ok(relative_error(closed, qfi_displacement(&state, &ch)?))
                })
                .unwrap_or(f64::INFINITY);
            (err, c.describe())
        })
        .collect();
    EquivalenceReport::from_errors("displacement", DISPLACEMENT_TOLERANCE, errors)
}

pub fn run_displacement_equivalence(case_count: usize, seed: u64) -> Result<EquivalenceReport> {
    require_cases(case_count)?;
    Ok(displacement_equivalence_on(&generate_cases(
        case_count,
        seed,
        CoefficientLength::Quadratures,
    )))
}

/// Compares the closed-form photon number with the covariance trace.
pub fn photon_identity_on(cases: &[OracleCase]) -> EquivalenceReport {
    let errors = cases
        .iter()
        .map(|c| {
            let err = graph_state_covariance(&c.graph, c.r)
                .map(|state| {
                    relative_error(
                        mean_photon_number(&c.graph, c.r),
                        photon_number_from_covariance(&state),
                    )
                })
                .unwrap_or(f64::INFINITY);
            (err, c.describe())
        })
        .collect();
    EquivalenceReport::from_errors("photon", PHOTON_TOLERANCE, errors)
}

pub fn run_photon_identity(case_count: usize, seed: u64) -> Result<EquivalenceReport> {
    require_cases(case_count)?;
    Ok(photon_identity_on(&generate_cases(
        case_count,
        seed,
        CoefficientLength::Modes,
    )))
}

fn phase_derivative_error(c: &OracleCase) -> Result<f64> {
    let setting = HomodyneSetting::new(c.theta.clone())?;
    let at = |phi: f64| -> Result<_> {
        phase_measurement_moments(
            &c.graph,
            c.r,
            &PhaseChannel::new(c.f.clone(), phi)?,
            &setting,
        )
    };
    let m = at(c.phi)?;
    let plus = at(c.phi + DERIVATIVE_STEP)?;
    let minus = at(c.phi - DERIVATIVE_STEP)?;
    let h2 = 2.0 * DERIVATIVE_STEP;
    let fd_sigma = (plus.sigma() - minus.sigma()) / h2;
    let fd_omega = (plus.omega() - minus.omega()) / h2;
    Ok((m.d_sigma() - fd_sigma)
        .amax()
        .max((m.d_omega() - fd_omega).amax()))
}

fn displacement_derivative_error(c: &OracleCase) -> Result<f64> {
    let setting = HomodyneSetting::new(c.theta.clone())?;
    let n = c.graph.n();
    let mut f = c.f.clone();
    f.resize(2 * n, 0.0);
    if f.iter().all(|&x| x == 0.0) {
        f[0] = 1.0;
    }
    let ch = DisplacementChannel::new(f)?;
    let at = |phi: f64| displacement_measurement_moments(&c.graph, c.r, &ch, phi, &setting);
    let m = at(c.phi)?;
    let plus = at(c.phi + DERIVATIVE_STEP)?;
    let minus = at(c.phi - DERIVATIVE_STEP)?;
    let h2 = 2.0 * DERIVATIVE_STEP;
    let fd_sigma = (plus.sigma() - minus.sigma()) / h2;
    let fd_omega = (plus.omega() - minus.omega()) / h2;
    Ok((m.d_sigma() - fd_sigma)
        .amax()
        .max((m.d_omega() - fd_omega).amax()))
}

/// Analytic moment derivatives against central differences (absolute
/// error). Each case is checked for both modalities; a case whose `σ_M` is
/// singular at its angles is redrawn at a shifted angle vector.
pub fn fi_derivative_check_on(cases: &[OracleCase]) -> EquivalenceReport {
    let errors = cases
        .iter()
        .flat_map(|c| {
            let mut c = c.clone();
            let phase = retry_singular(&mut c, phase_derivative_error);
            let disp = retry_singular(&mut c, displacement_derivative_error);
            let desc = c.describe();
            [
                (phase, format!("phase {desc}")),
                (disp, format!("displacement {desc}")),
            ]
        })
        .collect();
    let mut report = EquivalenceReport::from_errors("derivatives", DERIVATIVE_TOLERANCE, errors);
    report.case_count /= 2;
    report
}

fn retry_singular(c: &mut OracleCase, check: fn(&OracleCase) -> Result<f64>) -> f64 {
    for attempt in 0..8 {
        match check(c) {
            Ok(err) => return err,
            Err(Error::SingularMoments) => {
                for (j, t) in c.theta.iter_mut().enumerate() {
                    *t += 0.1 * (attempt + j + 1) as f64;
                }
            }
            Err(_) => return f64::INFINITY,
        }
    }
    f64::INFINITY
}

pub fn run_fi_derivative_check(case_count: usize, seed: u64) -> Result<EquivalenceReport> {
    require_cases(case_count)?;
    Ok(fi_derivative_check_on(&generate_cases(
        case_count,
        seed,
        CoefficientLength::Modes,
    )))
}

/// Which suites to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Phase,
    Displacement,
    Photon,
    Derivatives,
}

pub fn run_suite(suite: Suite, case_count: usize, seed: u64) -> Result<Vec<EquivalenceReport>> {
    require_cases(case_count)?;
    let mut reports = Vec::new();
    if matches!(suite, Suite::All | Suite::Phase) {
        reports.push(run_phase_equivalence(case_count, seed)?);
    }
    if matches!(suite, Suite::All | Suite::Displacement) {
        reports.push(run_displacement_equivalence(case_count, seed)?);
    }
    if matches!(suite, Suite::All | Suite::Photon) {
        reports.push(run_photon_identity(case_count, seed)?);
    }
    if matches!(suite, Suite::All | Suite::Derivatives) {
        reports.push(run_fi_derivative_check(case_count, seed)?);
    }
    Ok(reports)
}
