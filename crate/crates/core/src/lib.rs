//! Quantum and homodyne Fisher information of continuous-variable graph
//! states used as probes for phase and displacement sensing.
//!
//! - [`graph`]: graph families and the trace figures `χ_p`, `χ_d`.
//! - [`gaussian`]: graph-state covariance matrices and photon budgets.
//! - [`qfi`]: quantum Fisher information, closed form and matrix route.
//! - [`homodyne`]: homodyne outcome moments, Fisher information and
//!   local-oscillator angle optimisation.
//! - [`oracle`]: randomised equivalence suites between independent routes.
//! - [`cli`]: command implementations behind the `cvgraph` binary.

pub mod cli;
pub mod error;
pub mod gaussian;
pub mod graph;
pub mod homodyne;
pub mod oracle;
pub mod qfi;
pub mod report;
pub mod simplex;

pub use error::{Error, Result};
pub use gaussian::GaussianState;
pub use graph::Graph;
pub use homodyne::{HomodyneSetting, MeasurementMoments, Modality};
pub use qfi::{DisplacementChannel, PhaseChannel};
pub use report::FisherReport;
