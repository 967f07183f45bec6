use serde::{Deserialize, Serialize};

use crate::graph::GraphKind;
use crate::homodyne::Modality;

/// An information value together with the inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherReport {
    pub modality: Modality,
    /// `"qfi"` or `"homodyne_fi"`.
    pub quantity: String,
    pub value: f64,
    pub graph: GraphKind,
    pub n: usize,
    pub r: f64,
    pub n_bar: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub angles: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub phi: Option<f64>,
}
