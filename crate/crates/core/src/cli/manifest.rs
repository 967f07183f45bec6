use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A recorded invocation that can be replayed with `--manifest`.
///
/// `command` holds the subcommand and its positional arguments separated by
/// spaces; `parameters` maps flag names (without the leading `--`) to their
/// values, with multi-valued flags space-separated and switches stored as
/// `"true"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub output_path: String,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        RunManifest {
            command: command.into(),
            parameters: BTreeMap::new(),
            output_path: String::new(),
            seed: 0,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Command-line arguments (without the program name) that reproduce the
    /// run.
    pub fn to_args(&self) -> Vec<String> {
        let mut args: Vec<String> = self
            .command
            .split_whitespace()
            .map(str::to_string)
            .collect();
        for (key, value) in &self.parameters {
            args.push(format!("--{key}"));
            if value != "true" {
                args.extend(value.split_whitespace().map(str::to_string));
            }
        }
        if !self.output_path.is_empty() {
            args.push("--output".into());
            args.push(self.output_path.clone());
        }
        if self.command.starts_with("verify") {
            args.push("--seed".into());
            args.push(self.seed.to_string());
        }
        args
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("bad manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn args_for_figure() {
        let mut m = RunManifest::new("figure fig2").param("n-max", 6);
        m.output_path = "out.csv".into();
        assert_eq!(
            m.to_args(),
            ["figure", "fig2", "--n-max", "6", "--output", "out.csv"]
        );
    }

    #[test]
    fn args_for_verify_carry_seed() {
        let mut m = RunManifest::new("verify all").param("cases", 10);
        m.seed = 7;
        assert_eq!(
            m.to_args(),
            ["verify", "all", "--cases", "10", "--seed", "7"]
        );
        let m = RunManifest::new("fi phase")
            .param("optimize", "true")
            .param("multipartite", "2 3");
        assert_eq!(
            m.to_args(),
            ["fi", "phase", "--multipartite", "2", "3", "--optimize"]
        );
    }

    proptest! {
        #[test]
        fn json_round_trip(
            command in "[a-z]{1,8}( [a-z0-9]{1,6}){0,2}",
            params in proptest::collection::btree_map("[a-z-]{1,10}", "[ -~]{0,12}", 0..6),
            output in "[ -~]{0,20}",
            seed in any::<u64>(),
        ) {
            let m = RunManifest { command, parameters: params, output_path: output, seed };
            prop_assert_eq!(RunManifest::from_json(&m.to_json()).unwrap(), m);
        }
    }
}
