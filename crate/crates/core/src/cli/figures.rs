//! Sweep tables behind the scaling and homodyne figures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::squeeze_for_photon_budget;
use crate::graph::{empty_graph, star_graph};
use crate::homodyne::{optimize_angles, Modality};
use crate::qfi::{
    qfi_displacement_closed_form, qfi_phase_closed_form, DisplacementChannel, PhaseChannel,
};

/// Mode count of the fixed-`n` photon sweep.
pub const FIXED_N: usize = 10;
/// Per-mode photon numbers of the mode sweep.
pub const NTILDE_VALUES: [f64; 2] = [1.0, 10.0];
/// Largest `n` of the mode sweep.
pub const MODE_SWEEP_MAX: usize = 50;
/// Squeeze values and mode range of the homodyne tables.
pub const HOMODYNE_R: [f64; 2] = [1.0, 3.0];
pub const HOMODYNE_N_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Figure {
    pub fn modality(self) -> Modality {
        match self {
            Figure::Fig2 | Figure::Fig3 => Modality::Phase,
            Figure::Fig4 | Figure::Fig5 => Modality::Displacement,
        }
    }
}

/// Bounds of the small-`(n, Ñ)` ratio grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBounds {
    pub n_max: usize,
    pub ntilde_max: f64,
}

impl Default for GridBounds {
    fn default() -> Self {
        GridBounds {
            n_max: 10,
            ntilde_max: 2.5,
        }
    }
}

/// One row of the star-versus-separable comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    /// `a`: photon sweep at fixed `n`; `b_ntilde<Ñ>`: mode sweep at fixed
    /// photons per mode; `c`: small-`(n, Ñ)` grid.
    pub panel: String,
    pub n: usize,
    pub n_bar: f64,
    pub qfi_star: f64,
    pub qfi_separable: f64,
    pub ratio: f64,
}

/// One row of the homodyne saturation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomodyneRow {
    pub n: usize,
    pub r: f64,
    pub qfi: f64,
    pub fi_opt: f64,
    pub alpha: f64,
    pub beta: f64,
    pub ratio: f64,
}

/// QFI at equal photon budget for a star graph and the separable state,
/// with `f = 1` on every mode or quadrature.
pub fn equal_budget_qfi(modality: Modality, n: usize, n_bar: f64) -> Result<(f64, f64)> {
    let star = star_graph(n)?;
    let sep = empty_graph(n)?;
    let r_star = squeeze_for_photon_budget(&star, n_bar)?;
    let r_sep = squeeze_for_photon_budget(&sep, n_bar)?;
    match modality {
        Modality::Phase => {
            let ch = PhaseChannel::uniform(n, 1.0, 0.0)?;
            Ok((
                qfi_phase_closed_form(&star, r_star, &ch)?,
                qfi_phase_closed_form(&sep, r_sep, &ch)?,
            ))
        }
        Modality::Displacement => {
            let ch = DisplacementChannel::uniform(n, 1.0)?;
            Ok((
                qfi_displacement_closed_form(&star, r_star, &ch)?,
                qfi_displacement_closed_form(&sep, r_sep, &ch)?,
            ))
        }
    }
}

/// Log-spaced grid of `points` values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|k| {
            if k == points - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

/// Rows plus warnings for omitted (unreachable) grid points.
#[derive(Debug, Clone)]
pub struct Sweep<R> {
    pub rows: Vec<R>,
    pub warnings: Vec<String>,
}

impl<R> Default for Sweep<R> {
    fn default() -> Self {
        Sweep {
            rows: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

fn push_scaling_row(
    sweep: &mut Sweep<ScalingRow>,
    modality: Modality,
    panel: &str,
    n: usize,
    n_bar: f64,
) -> Result<()> {
    match equal_budget_qfi(modality, n, n_bar) {
        Ok((qfi_star, qfi_separable)) => {
            sweep.rows.push(ScalingRow {
                panel: panel.to_string(),
                n,
                n_bar,
                qfi_star,
                qfi_separable,
                ratio: qfi_star / qfi_separable,
            });
            Ok(())
        }
        Err(e @ Error::UnreachablePhotonBudget { .. }) => {
            sweep
                .warnings
                .push(format!("panel {panel}: omitted n={n} N_bar={n_bar}: {e}"));
            Ok(())
        }
        Err(e) => Err(e),
    }
}

/// Star versus separable QFI: photon sweep at `n = 10` over
/// `N̄ ∈ [1, 10³]`, mode sweeps at `Ñ ∈ {1, 10}` for `n ∈ [2, 50]`, and the
/// ratio grid over `n ∈ [2, n_max]`, `Ñ ∈ {0.25, 0.5, …, ntilde_max}`.
pub fn scaling_table(modality: Modality, bounds: GridBounds) -> Result<Sweep<ScalingRow>> {
    if bounds.n_max < 2 {
        return Err(Error::InvalidArgument(format!(
            "--n-max must be at least 2, got {}",
            bounds.n_max
        )));
    }
    if !(bounds.ntilde_max.is_finite() && bounds.ntilde_max >= 0.25) {
        return Err(Error::InvalidArgument(format!(
            "--ntilde-max must be at least 0.25, got {}",
            bounds.ntilde_max
        )));
    }
    let mut sweep = Sweep::default();
    for n_bar in log_grid(1.0, 1e3, 31) {
        push_scaling_row(&mut sweep, modality, "a", FIXED_N, n_bar)?;
    }
    for ntilde in NTILDE_VALUES {
        let panel = format!("b_ntilde{ntilde}");
        for n in 2..=MODE_SWEEP_MAX {
            push_scaling_row(&mut sweep, modality, &panel, n, ntilde * n as f64)?;
        }
    }
    let steps = (bounds.ntilde_max / 0.25).floor() as usize;
    for n in 2..=bounds.n_max {
        for k in 1..=steps {
            let ntilde = 0.25 * k as f64;
            push_scaling_row(&mut sweep, modality, "c", n, ntilde * n as f64)?;
        }
    }
    Ok(sweep)
}

/// Optimised homodyne FI against the QFI for star graphs, `r ∈ {1, 3}`,
/// `n ∈ [2, 8]`, `f = 1`, evaluated at `φ = phi`.
pub fn homodyne_table(modality: Modality, phi: f64) -> Result<Sweep<HomodyneRow>> {
    let mut sweep = Sweep::default();
    for r in HOMODYNE_R {
        for n in 2..=HOMODYNE_N_MAX {
            sweep.rows.push(homodyne_row(modality, n, r, phi)?);
        }
    }
    Ok(sweep)
}

pub fn homodyne_row(modality: Modality, n: usize, r: f64, phi: f64) -> Result<HomodyneRow> {
    let g = star_graph(n)?;
    let (f, qfi) = match modality {
        Modality::Phase => {
            let ch = PhaseChannel::uniform(n, 1.0, phi)?;
            (ch.f().to_vec(), qfi_phase_closed_form(&g, r, &ch)?)
        }
        Modality::Displacement => {
            let ch = DisplacementChannel::uniform(n, 1.0)?;
            (ch.f().to_vec(), qfi_displacement_closed_form(&g, r, &ch)?)
        }
    };
    let opt = optimize_angles(&g, r, &f, phi, modality)?;
    Ok(HomodyneRow {
        n,
        r,
        qfi,
        fi_opt: opt.fi,
        alpha: opt.alpha,
        beta: opt.beta,
        ratio: opt.fi / qfi,
    })
}

/// Formats a float with 12 significant digits in scientific notation.
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from("panel,n,N_bar,qfi_star,qfi_separable,ratio\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.panel,
            row.n,
            fmt_sig12(row.n_bar),
            fmt_sig12(row.qfi_star),
            fmt_sig12(row.qfi_separable),
            fmt_sig12(row.ratio)
        ));
    }
    out
}

pub fn homodyne_csv(rows: &[HomodyneRow]) -> String {
    let mut out = String::from("n,r,qfi,fi_opt,alpha,beta,ratio\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.n,
            fmt_sig12(row.r),
            fmt_sig12(row.qfi),
            fmt_sig12(row.fi_opt),
            fmt_sig12(row.alpha),
            fmt_sig12(row.beta),
            fmt_sig12(row.ratio)
        ));
    }
    out
}
