//! The `cvgraph` command-line surface.
//!
//! Commands return their output as text so they can be driven from tests;
//! `main` only maps the outcome to an exit code.

pub mod figures;
pub mod manifest;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::error::Error;
use crate::gaussian::{graph_state_covariance, mean_photon_number, squeeze_for_photon_budget};
use crate::graph::{
    chi_disp, chi_phase, empty_graph, multipartite_graph, read_edge_list, rectangular_graph,
    star_graph, Graph,
};
use crate::homodyne::{fi_for_setting, fi_star_ansatz, optimize_angles, HomodyneSetting, Modality};
use crate::oracle::{relative_error, run_suite, Suite, PHASE_TOLERANCE};
use crate::qfi::{
    qfi_displacement, qfi_displacement_closed_form, qfi_phase_closed_form, qfi_phase_generic,
    DisplacementChannel, PhaseChannel,
};
use crate::report::FisherReport;

use figures::{
    fmt_sig12, homodyne_csv, homodyne_table, scaling_csv, scaling_table, Figure, GridBounds,
};
pub use manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] Error),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// How a successful command finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::VerificationFailed => 1,
        }
    }
}

pub const USAGE_EXIT_CODE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "cvgraph",
    version,
    about = "Fisher information of CV graph states for phase and displacement sensing",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Replay a saved run manifest
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    /// Record this invocation as a run manifest
    #[arg(long, global = true, value_name = "PATH")]
    pub save_manifest: Option<PathBuf>,

    /// Write the result to a file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Emit JSON
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,

    /// Emit CSV
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Trace statistics and characteristic figures of a graph
    GraphInfo(GraphInfoArgs),
    /// Quantum Fisher information, closed form checked against the matrix route
    Qfi(QfiArgs),
    /// Homodyne Fisher information for given or optimised local-oscillator phases
    Fi(FiArgs),
    /// Sweep tables for the scaling and homodyne figures
    Figure(FigureArgs),
    /// Run the randomised equivalence suites
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, PartialEq, Args)]
#[group(id = "graph", required = true, multiple = false)]
pub struct GraphSpec {
    /// Star graph on N vertices, centre at vertex 1
    #[arg(long, value_name = "N")]
    pub star: Option<usize>,
    /// Complete L-partite graph with M vertices per part
    #[arg(long, num_args = 2, value_names = ["L", "M"])]
    pub multipartite: Option<Vec<usize>>,
    /// 4×M rectangular belt
    #[arg(long, value_name = "M")]
    pub rectangular: Option<usize>,
    /// Edgeless graph on N vertices
    #[arg(long, value_name = "N")]
    pub empty: Option<usize>,
    /// Edge-list file
    #[arg(long, value_name = "FILE")]
    pub edges: Option<PathBuf>,
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph, CliError> {
        let graph = if let Some(n) = self.star {
            star_graph(n)?
        } else if let Some(lm) = &self.multipartite {
            multipartite_graph(lm[0], lm[1])?
        } else if let Some(m) = self.rectangular {
            rectangular_graph(m)?
        } else if let Some(n) = self.empty {
            empty_graph(n)?
        } else if let Some(path) = &self.edges {
            read_edge_list(path)?
        } else {
            return Err(CliError::Usage("a graph is required".into()));
        };
        Ok(graph)
    }

    fn record(&self, m: RunManifest) -> RunManifest {
        if let Some(n) = self.star {
            m.param("star", n)
        } else if let Some(lm) = &self.multipartite {
            m.param("multipartite", format!("{} {}", lm[0], lm[1]))
        } else if let Some(x) = self.rectangular {
            m.param("rectangular", x)
        } else if let Some(n) = self.empty {
            m.param("empty", n)
        } else if let Some(p) = &self.edges {
            m.param("edges", p.display())
        } else {
            m
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModalityArg {
    Phase,
    Displacement,
}

impl From<ModalityArg> for Modality {
    fn from(m: ModalityArg) -> Self {
        match m {
            ModalityArg::Phase => Modality::Phase,
            ModalityArg::Displacement => Modality::Displacement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct GraphInfoArgs {
    #[command(flatten)]
    pub graph: GraphSpec,
}

#[derive(Debug, Clone, PartialEq, Args)]
#[group(id = "squeezing", required = true, multiple = false, args = ["r", "target_n"])]
pub struct QfiArgs {
    pub modality: ModalityArg,
    #[command(flatten)]
    pub graph: GraphSpec,
    /// Squeeze parameter
    #[arg(long, allow_negative_numbers = true)]
    pub r: Option<f64>,
    /// Total mean photon number; r is solved for
    #[arg(
        long = "target-N",
        alias = "target-n",
        value_name = "N_BAR",
        allow_negative_numbers = true
    )]
    pub target_n: Option<f64>,
    /// Responsivities: one value for all modes/quadratures, or a comma list
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub f: String,
}

#[derive(Debug, Clone, PartialEq, Args)]
#[group(id = "angles", required = true, multiple = true, args = ["alpha", "optimize", "theta"])]
pub struct FiArgs {
    pub modality: ModalityArg,
    #[command(flatten)]
    pub graph: GraphSpec,
    /// Squeeze parameter
    #[arg(long, allow_negative_numbers = true)]
    pub r: f64,
    /// Responsivities: one value for all modes/quadratures, or a comma list
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub f: String,
    /// Parameter value at which the FI is evaluated (radians)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
    /// Local-oscillator phase of the star centre
    #[arg(long, allow_negative_numbers = true, requires = "beta", conflicts_with_all = ["optimize", "theta"])]
    pub alpha: Option<f64>,
    /// Local-oscillator phase of every leaf
    #[arg(long, allow_negative_numbers = true, requires = "alpha")]
    pub beta: Option<f64>,
    /// Maximise the FI over (alpha, beta)
    #[arg(long, conflicts_with = "theta")]
    pub optimize: bool,
    /// Comma-separated local-oscillator phases, one per mode
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl From<FigureName> for Figure {
    fn from(f: FigureName) -> Self {
        match f {
            FigureName::Fig2 => Figure::Fig2,
            FigureName::Fig3 => Figure::Fig3,
            FigureName::Fig4 => Figure::Fig4,
            FigureName::Fig5 => Figure::Fig5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct FigureArgs {
    pub name: FigureName,
    /// Largest n of the small-(n, Ñ) ratio grid (fig2, fig4)
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Largest photons-per-mode of the ratio grid (fig2, fig4)
    #[arg(long)]
    pub ntilde_max: Option<f64>,
    /// Evaluation point of the homodyne FI (fig3, fig5)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Phase,
    Displacement,
    Photon,
    Derivatives,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Phase => Suite::Phase,
            SuiteArg::Displacement => Suite::Displacement,
            SuiteArg::Photon => Suite::Photon,
            SuiteArg::Derivatives => Suite::Derivatives,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct VerifyArgs {
    pub suite: SuiteArg,
    /// Randomised cases per suite
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

impl Cli {
    /// Manifest describing this invocation.
    pub fn to_manifest(&self) -> Result<RunManifest, CliError> {
        let command = self
            .command
            .as_ref()
            .ok_or_else(|| CliError::Usage("no command to record".into()))?;
        let mut m = match command {
            Command::GraphInfo(a) => a.graph.record(RunManifest::new("graph-info")),
            Command::Qfi(a) => {
                let mut m = a
                    .graph
                    .record(RunManifest::new(format!("qfi {}", value_name(&a.modality))))
                    .param("f", &a.f);
                if let Some(r) = a.r {
                    m = m.param("r", r);
                }
                if let Some(t) = a.target_n {
                    m = m.param("target-N", t);
                }
                m
            }
            Command::Fi(a) => {
                let mut m = a
                    .graph
                    .record(RunManifest::new(format!("fi {}", value_name(&a.modality))))
                    .param("r", a.r)
                    .param("f", &a.f)
                    .param("phi", a.phi);
                if let (Some(alpha), Some(beta)) = (a.alpha, a.beta) {
                    m = m.param("alpha", alpha).param("beta", beta);
                }
                if a.optimize {
                    m = m.param("optimize", "true");
                }
                if let Some(t) = &a.theta {
                    m = m.param("theta", t);
                }
                m
            }
            Command::Figure(a) => {
                let mut m =
                    RunManifest::new(format!("figure {}", value_name(&a.name))).param("phi", a.phi);
                if let Some(n) = a.n_max {
                    m = m.param("n-max", n);
                }
                if let Some(x) = a.ntilde_max {
                    m = m.param("ntilde-max", x);
                }
                m
            }
            Command::Verify(a) => {
                let mut m = RunManifest::new(format!("verify {}", value_name(&a.suite)))
                    .param("cases", a.cases);
                m.seed = a.seed;
                m
            }
        };
        if self.json {
            m = m.param("json", "true");
        }
        if self.csv {
            m = m.param("csv", "true");
        }
        if let Some(out) = &self.output {
            m.output_path = out.display().to_string();
        }
        Ok(m)
    }

    /// Rebuilds the invocation recorded in a manifest.
    pub fn from_manifest(m: &RunManifest) -> Result<Cli, CliError> {
        let args = std::iter::once("cvgraph".to_string()).chain(m.to_args());
        Cli::try_parse_from(args)
            .map_err(|e| CliError::Usage(format!("manifest does not parse: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

/// Parses `--f`: one number applies to every entry, otherwise a comma list
/// of exactly `len` numbers.
pub fn parse_coefficients(spec: &str, len: usize) -> Result<Vec<f64>, CliError> {
    let values: Vec<f64> = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad number {t:?} in {spec:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    match values.len() {
        1 => Ok(vec![values[0]; len]),
        k if k == len => Ok(values),
        k => Err(CliError::Usage(format!(
            "expected 1 or {len} values, got {k}"
        ))),
    }
}

fn coefficient_len(modality: Modality, n: usize) -> usize {
    match modality {
        Modality::Phase => n,
        Modality::Displacement => 2 * n,
    }
}

fn csv_line(values: &[Value]) -> String {
    values
        .iter()
        .map(|v| match v {
            Value::Number(x) if x.is_f64() => fmt_sig12(x.as_f64().unwrap_or(f64::NAN)),
            Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn record_csv(fields: &[(&str, Value)]) -> String {
    let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
    let values: Vec<Value> = fields.iter().map(|(_, v)| v.clone()).collect();
    format!("{}\n{}\n", header.join(","), csv_line(&values))
}

fn render(fields: Vec<(&str, Value)>, format: Format) -> String {
    match format {
        Format::Csv => record_csv(&fields),
        Format::Json => {
            let map: serde_json::Map<String, Value> = fields
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            serde_json::to_string_pretty(&Value::Object(map)).expect("json") + "\n"
        }
    }
}

fn graph_info(g: &Graph, format: Format) -> String {
    let undefined = |r: crate::Result<f64>| {
        r.map(Value::from)
            .unwrap_or_else(|_| Value::from("undefined"))
    };
    render(
        vec![
            ("graph", Value::from(g.kind().to_string())),
            ("n", Value::from(g.n())),
            ("edge_count", Value::from(g.edge_count())),
            ("trace_a2", Value::from(g.trace_a2())),
            ("trace_a4", Value::from(g.trace_a4())),
            ("sum_a2", Value::from(g.sum_a2_entries())),
            ("chi_p", undefined(chi_phase(g))),
            ("chi_d", undefined(chi_disp(g))),
        ],
        format,
    )
}

fn run_qfi(a: &QfiArgs, format: Format) -> Result<(String, Outcome), CliError> {
    let g = a.graph.build()?;
    let modality: Modality = a.modality.into();
    let r = match (a.r, a.target_n) {
        (Some(r), _) => r,
        (None, Some(target)) => squeeze_for_photon_budget(&g, target)?,
        (None, None) => {
            return Err(CliError::Usage(
                "one of --r or --target-N is required".into(),
            ))
        }
    };
    let f = parse_coefficients(&a.f, coefficient_len(modality, g.n()))?;
    let state = graph_state_covariance(&g, r)?;
    let (closed, oracle) = match modality {
        Modality::Phase => {
            let ch = PhaseChannel::new(f.clone(), 0.0)?;
            (
                qfi_phase_closed_form(&g, r, &ch)?,
                qfi_phase_generic(&state, &ch)?,
            )
        }
        Modality::Displacement => {
            let ch = DisplacementChannel::new(f.clone())?;
            (
                qfi_displacement_closed_form(&g, r, &ch)?,
                qfi_displacement(&state, &ch)?,
            )
        }
    };
    let rel_diff = relative_error(closed, oracle);
    let passed = rel_diff <= PHASE_TOLERANCE;
    let report = FisherReport {
        modality,
        quantity: "qfi".into(),
        value: closed,
        graph: g.kind().clone(),
        n: g.n(),
        r,
        n_bar: mean_photon_number(&g, r),
        angles: None,
        phi: None,
    };
    let text = match format {
        Format::Json => {
            let v = json!({
                "report": report,
                "f": f,
                "closed_form": closed,
                "oracle": oracle,
                "rel_diff": rel_diff,
                "tolerance": PHASE_TOLERANCE,
                "passed": passed,
            });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
        Format::Csv => record_csv(&[
            ("modality", Value::from(modality.to_string())),
            ("graph", Value::from(g.kind().to_string())),
            ("n", Value::from(g.n())),
            ("r", Value::from(r)),
            ("n_bar", Value::from(report.n_bar)),
            ("closed_form", Value::from(closed)),
            ("oracle", Value::from(oracle)),
            ("rel_diff", Value::from(rel_diff)),
            ("passed", Value::from(passed)),
        ]),
    };
    Ok((
        text,
        if passed {
            Outcome::Success
        } else {
            Outcome::VerificationFailed
        },
    ))
}

fn run_fi(a: &FiArgs, format: Format) -> Result<String, CliError> {
    let g = a.graph.build()?;
    let modality: Modality = a.modality.into();
    let f = parse_coefficients(&a.f, coefficient_len(modality, g.n()))?;
    let qfi = match modality {
        Modality::Phase => qfi_phase_closed_form(&g, a.r, &PhaseChannel::new(f.clone(), a.phi)?)?,
        Modality::Displacement => {
            qfi_displacement_closed_form(&g, a.r, &DisplacementChannel::new(f.clone())?)?
        }
    };
    let (fi, alpha, beta, angles) = if a.optimize {
        let opt = optimize_angles(&g, a.r, &f, a.phi, modality)?;
        let angles = HomodyneSetting::star_ansatz(g.n(), opt.alpha, opt.beta)?;
        (
            opt.fi,
            Some(opt.alpha),
            Some(opt.beta),
            angles.theta().to_vec(),
        )
    } else if let (Some(alpha), Some(beta)) = (a.alpha, a.beta) {
        let fi = fi_star_ansatz(&g, a.r, &f, a.phi, alpha, beta, modality)?;
        let angles = HomodyneSetting::star_ansatz(g.n(), alpha, beta)?;
        (fi, Some(alpha), Some(beta), angles.theta().to_vec())
    } else if let Some(spec) = &a.theta {
        let theta = parse_coefficients(spec, g.n())?;
        let setting = HomodyneSetting::new(theta)?;
        let fi = fi_for_setting(&g, a.r, &f, a.phi, &setting, modality)?;
        (fi, None, None, setting.theta().to_vec())
    } else {
        return Err(CliError::Usage(
            "one of --optimize, --alpha/--beta or --theta is required".into(),
        ));
    };
    let ratio = fi / qfi;
    let report = FisherReport {
        modality,
        quantity: "homodyne_fi".into(),
        value: fi,
        graph: g.kind().clone(),
        n: g.n(),
        r: a.r,
        n_bar: mean_photon_number(&g, a.r),
        angles: Some(angles),
        phi: Some(a.phi),
    };
    Ok(match format {
        Format::Json => {
            let v = json!({
                "report": report,
                "fi": fi,
                "qfi": qfi,
                "ratio": ratio,
                "alpha": alpha,
                "beta": beta,
                "optimized": a.optimize,
            });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
        Format::Csv => record_csv(&[
            ("modality", Value::from(modality.to_string())),
            ("graph", Value::from(g.kind().to_string())),
            ("n", Value::from(g.n())),
            ("r", Value::from(a.r)),
            ("phi", Value::from(a.phi)),
            ("alpha", alpha.map(Value::from).unwrap_or(Value::Null)),
            ("beta", beta.map(Value::from).unwrap_or(Value::Null)),
            ("fi", Value::from(fi)),
            ("qfi", Value::from(qfi)),
            ("ratio", Value::from(ratio)),
        ]),
    })
}

fn run_figure(a: &FigureArgs, format: Format, warn: &mut dyn Write) -> Result<String, CliError> {
    let figure: Figure = a.name.into();
    let defaults = GridBounds::default();
    let bounds = GridBounds {
        n_max: a.n_max.unwrap_or(defaults.n_max),
        ntilde_max: a.ntilde_max.unwrap_or(defaults.ntilde_max),
    };
    match figure {
        Figure::Fig2 | Figure::Fig4 => {
            let sweep = scaling_table(figure.modality(), bounds)?;
            for w in &sweep.warnings {
                writeln!(warn, "warning: {w}")?;
            }
            Ok(match format {
                Format::Csv => scaling_csv(&sweep.rows),
                Format::Json => serde_json::to_string_pretty(&sweep.rows).expect("json") + "\n",
            })
        }
        Figure::Fig3 | Figure::Fig5 => {
            let sweep = homodyne_table(figure.modality(), a.phi)?;
            Ok(match format {
                Format::Csv => homodyne_csv(&sweep.rows),
                Format::Json => serde_json::to_string_pretty(&sweep.rows).expect("json") + "\n",
            })
        }
    }
}

fn run_verify(a: &VerifyArgs, format: Format) -> Result<(String, Outcome), CliError> {
    if a.cases == 0 {
        return Err(CliError::Usage("--cases must be at least 1".into()));
    }
    let reports = run_suite(a.suite.into(), a.cases, a.seed)?;
    let passed = reports.iter().all(|r| r.passed);
    let text = match format {
        Format::Json => {
            let v = json!({ "seed": a.seed, "passed": passed, "reports": reports });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
        Format::Csv => {
            let mut out = String::from("suite,case_count,max_rel_error,tolerance,passed\n");
            for r in &reports {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.suite,
                    r.case_count,
                    fmt_sig12(r.max_rel_error),
                    fmt_sig12(r.tolerance),
                    r.passed
                ));
            }
            out
        }
    };
    Ok((
        text,
        if passed {
            Outcome::Success
        } else {
            Outcome::VerificationFailed
        },
    ))
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Executes a parsed invocation. Output goes to `--output` or `stdout`;
/// warnings go to `stderr`.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Outcome, CliError> {
    if let Some(path) = &cli.manifest {
        let manifest = RunManifest::load(path)?;
        let mut replay = Cli::from_manifest(&manifest)?;
        if cli.output.is_some() {
            replay.output = cli.output.clone();
        }
        if replay.manifest.is_some() {
            return Err(CliError::Usage(
                "manifests cannot chain other manifests".into(),
            ));
        }
        return run(&replay, stdout, stderr);
    }
    let Some(command) = &cli.command else {
        return Err(CliError::Usage(
            "a command or --manifest is required".into(),
        ));
    };
    if let Some(path) = &cli.save_manifest {
        cli.to_manifest()?.save(path)?;
    }
    let default_format = match command {
        Command::Figure(_) => Format::Csv,
        _ => Format::Json,
    };
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        default_format
    };
    let (text, outcome) = match command {
        Command::GraphInfo(a) => (graph_info(&a.graph.build()?, format), Outcome::Success),
        Command::Qfi(a) => run_qfi(a, format)?,
        Command::Fi(a) => (run_fi(a, format)?, Outcome::Success),
        Command::Figure(a) => (run_figure(a, format, stderr)?, Outcome::Success),
        Command::Verify(a) => run_verify(a, format)?,
    };
    write_output(cli.output.as_deref(), &text, stdout)?;
    Ok(outcome)
}
