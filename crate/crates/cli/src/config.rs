//! The JSON run configuration.

use std::path::Path;

use depeg_core::cit::CitParams;
use depeg_core::dispersal::{OracleParams, ValidityMode};
use depeg_core::sim::{VotePolicy, WithholdPolicy};
use depeg_core::PegParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Peg,
    DePeg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Construction {
    pub algorithm: Algorithm,
    pub vn_degree: usize,
    pub emd_threshold: usize,
    /// Per layer, top first. Defaults to 6 for layers 1-2 and 8 below.
    pub g_max: Option<Vec<usize>>,
    /// Full per-layer parameters; overrides everything above when given.
    pub layers: Option<Vec<PegParams>>,
}

impl Default for Construction {
    fn default() -> Self {
        Construction { algorithm: Algorithm::DePeg, vn_degree: 4, emd_threshold: 5, g_max: None, layers: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Analysis {
    pub budget: u64,
    pub minimal_only: bool,
    /// Let the planner use non-exhaustive reports.
    pub allow_partial: bool,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis { budget: depeg_core::stopping::DEFAULT_BUDGET, minimal_only: false, allow_partial: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exhaustive,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Validity {
    pub mode: Mode,
    pub budget: u64,
    pub trials: u64,
}

impl Default for Validity {
    fn default() -> Self {
        Validity { mode: Mode::Exhaustive, budget: 100_000_000, trials: 100_000 }
    }
}

impl Validity {
    pub fn mode(&self, seed: u64) -> ValidityMode {
        match self.mode {
            Mode::Exhaustive => ValidityMode::Exhaustive { budget: self.budget },
            Mode::MonteCarlo => ValidityMode::MonteCarlo { trials: self.trials, seed },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AdversarySpec {
    Honest,
    Nodes { malicious: Vec<usize>, vote: VotePolicy, withhold: WithholdPolicy },
    /// Search for `f` nodes that break availability, then attack with them.
    WorstCase { budget: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Simulation {
    pub rounds: u64,
    pub adversary: AdversarySpec,
    pub transcript: bool,
}

impl Default for Simulation {
    fn default() -> Self {
        Simulation { rounds: 1, adversary: AdversarySpec::WorstCase { budget: 1000 }, transcript: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cit: CitParams,
    pub oracle: OracleParams,
    pub mu: u64,
    /// Chunks per node in the valid phase; `k*(mu)` when absent.
    #[serde(default)]
    pub k: Option<u64>,
    #[serde(default = "yes")]
    pub secure_phase: bool,
    /// Greedy-cover sizes for `cost`; read from the analysis when absent.
    #[serde(default)]
    pub cover_sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub construction: Construction,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default)]
    pub validity: Validity,
    #[serde(default)]
    pub simulation: Simulation,
}

fn yes() -> bool {
    true
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let c: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Cross-field checks, run before any work.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.cit.validate()?;
        self.oracle.validate()?;
        let m = self.cit.base_size;
        if self.mu == 0 || self.mu > m {
            return bad(format!("mu = {} outside 1..={m}", self.mu));
        }
        if self.k.is_some_and(|k| k > m) {
            return bad(format!("k exceeds M = {m}"));
        }
        let l = self.cit.layers;
        if self.cover_sizes.as_ref().is_some_and(|v| v.len() != l) {
            return bad(format!("cover_sizes needs {l} entries"));
        }
        if self.construction.g_max.as_ref().is_some_and(|v| v.len() != l) {
            return bad(format!("construction.g_max needs {l} entries"));
        }
        let shapes = self.cit.shapes()?;
        for (j, p) in self.layer_params().iter().enumerate() {
            p.validate()?;
            if p.num_vns != shapes[j].n || p.num_cns != shapes[j].p {
                return bad(format!(
                    "layer {}: code is {}x{}, the tree needs {} VNs and {} checks",
                    j + 1,
                    p.num_vns,
                    p.num_cns,
                    shapes[j].n,
                    shapes[j].p
                ));
            }
        }
        if let AdversarySpec::Nodes { malicious, .. } = &self.simulation.adversary {
            if malicious.len() as u64 > self.oracle.max_faulty() || malicious.iter().any(|&x| x as u64 >= self.oracle.num_nodes) {
                return bad(format!("malicious set must name at most f = {} valid nodes", self.oracle.max_faulty()));
            }
        }
        Ok(())
    }

    /// Construction parameters per layer, top first.
    pub fn layer_params(&self) -> Vec<PegParams> {
        if let Some(l) = &self.construction.layers {
            return l.clone();
        }
        let c = &self.construction;
        let (num, den) = (self.cit.rate.numer() as usize, self.cit.rate.denom() as usize);
        let shapes = self.cit.shapes().unwrap_or_default();
        shapes
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let mut p = PegParams::for_layer(j + 1, s.n, num, den, self.seed.wrapping_add(j as u64));
                p.num_cns = s.p;
                p.vn_degree = c.vn_degree;
                p.emd_threshold = c.emd_threshold;
                if let Some(g) = &c.g_max {
                    p.g_max = g[j];
                }
                p
            })
            .collect()
    }
}

/// SHA-256 over the canonical JSON form of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}
