//! Experiment configuration: a versioned TOML schema resolved into validated
//! run parameters.
//!
//! ```toml
//! schema_version = 1
//!
//! [problem]
//! kind = "cpar"        # add | sub | cpar | cmaj | cmux | file
//! n = 7                # generator size parameter
//! # path = "data.txt"  # dataset file for kind = "file"
//! # pool_size = 1024   # uniform subsample of the example pool
//! # pool_seed = 0
//!
//! [experiment]
//! train_sizes = [48, 64, 80]
//! replicates = 50
//! losses = ["l1", "lgh"]          # default: all four
//! curriculum = "identity"         # identity | auto | given:2,0,1
//! base_seed = 1
//! output = "records.jsonl"
//! # known_order = [0, 1, 2]       # defaults to identity
//!
//! [lahc]                           # optional; defaults shown
//! # history = 250                  # default 250, 1000 for cpar
//! # max_iterations = 200000
//! # restarts = 9
//! # gates = "21m"                  # "21m" or a gate count
//!
//! [tau_sweep]                      # only read by the tau-sweep runner
//! # permutations = 10              # per τ stratum
//! # taus = [1.0, -1.0]             # default: every achievable stratum
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::optimizer::{DEFAULT_ITERATION_LIMIT, DEFAULT_RESTART_LIMIT};
use crate::problems::{ProblemKind, ProblemSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// History length default: 250 everywhere except cascaded parity's 1000.
pub fn default_history_for(kind: ProblemKind) -> usize {
    match kind {
        ProblemKind::Cpar => 1000,
        _ => 250,
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub problem: ProblemSection,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub lahc: LahcSection,
    #[serde(default)]
    pub tau_sweep: TauSweepSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub kind: String,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub pool_size: Option<usize>,
    #[serde(default)]
    pub pool_seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub train_sizes: Vec<usize>,
    pub replicates: usize,
    #[serde(default = "all_losses")]
    pub losses: Vec<String>,
    #[serde(default = "identity_curriculum")]
    pub curriculum: String,
    pub base_seed: u64,
    pub output: PathBuf,
    #[serde(default)]
    pub known_order: Option<Vec<usize>>,
}

fn all_losses() -> Vec<String> {
    LossKind::ALL.iter().map(|l| l.to_string()).collect()
}

fn identity_curriculum() -> String {
    "identity".into()
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LahcSection {
    #[serde(default)]
    pub history: Option<usize>,
    #[serde(default)]
    pub max_iterations: Option<u64>,
    #[serde(default)]
    pub restarts: Option<u64>,
    #[serde(default)]
    pub gates: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauSweepSection {
    #[serde(default = "default_permutations")]
    pub permutations: usize,
    #[serde(default)]
    pub taus: Option<Vec<f64>>,
}

impl Default for TauSweepSection {
    fn default() -> Self {
        TauSweepSection {
            permutations: default_permutations(),
            taus: None,
        }
    }
}

fn default_permutations() -> usize {
    10
}

/// How the target order is chosen per replicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CurriculumMode {
    /// The identity order (targets as generated).
    Identity,
    /// An explicit order, easiest target first.
    Given(Vec<usize>),
    /// Shuffle targets, then estimate the order per replicate from the
    /// training split via exact minimum feature sets.
    Auto,
}

impl CurriculumMode {
    /// Parse `identity` | `auto` | `given:2,0,1`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(CurriculumMode::Identity),
            "auto" => Ok(CurriculumMode::Auto),
            other => match other.strip_prefix("given:") {
                Some(list) => {
                    let order: Vec<usize> = list
                        .split(',')
                        .map(|t| {
                            t.trim().parse::<usize>().map_err(|_| {
                                Error::InvalidArgument(format!(
                                    "bad curriculum entry {t:?} in {s:?}"
                                ))
                            })
                        })
                        .collect::<Result<_>>()?;
                    Ok(CurriculumMode::Given(order))
                }
                None => Err(Error::InvalidArgument(format!(
                    "unknown curriculum {s:?}, expected identity|auto|given:<order>"
                ))),
            },
        }
    }
}

/// Gate budget: the paper's `21m` sizing or an explicit count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateBudget {
    TwentyOnePerTarget,
    Fixed(usize),
}

impl GateBudget {
    /// Parse `21m` or an integer.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "21m" {
            return Ok(GateBudget::TwentyOnePerTarget);
        }
        s.parse::<usize>()
            .map(GateBudget::Fixed)
            .map_err(|_| Error::InvalidArgument(format!("gates must be \"21m\" or a count, got {s:?}")))
    }

    pub fn resolve(self, n_targets: usize) -> usize {
        match self {
            GateBudget::TwentyOnePerTarget => 21 * n_targets,
            GateBudget::Fixed(n) => n,
        }
    }
}

/// Validated, ready-to-run configuration.
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    pub problem: ProblemSpec,
    pub train_sizes: Vec<usize>,
    pub replicates: usize,
    pub losses: Vec<LossKind>,
    pub curriculum_mode: CurriculumMode,
    pub known_order: Option<Vec<usize>>,
    pub history_length: usize,
    pub iteration_limit: u64,
    pub restart_limit: u64,
    pub gates: GateBudget,
    pub base_seed: u64,
    pub output: PathBuf,
    pub tau_permutations: usize,
    pub taus: Option<Vec<f64>>,
}

pub fn parse_config(text: &str) -> Result<ResolvedConfig> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "schema_version {} unsupported; this build reads version {SCHEMA_VERSION}",
            file.schema_version
        )));
    }
    let kind = ProblemKind::parse(&file.problem.kind)?;
    let problem = ProblemSpec {
        kind,
        n: file.problem.n,
        path: file.problem.path.clone(),
        pool_size: file.problem.pool_size,
        pool_seed: file.problem.pool_seed,
    };
    if kind == ProblemKind::File && problem.path.is_none() {
        return Err(Error::Config("problem.kind = \"file\" needs problem.path".into()));
    }

    let exp = &file.experiment;
    if exp.train_sizes.is_empty() {
        return Err(Error::Config("experiment.train_sizes is empty".into()));
    }
    if exp.replicates == 0 {
        return Err(Error::Config("experiment.replicates must be at least 1".into()));
    }
    let losses: Vec<LossKind> = exp
        .losses
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    if losses.is_empty() {
        return Err(Error::Config("experiment.losses is empty".into()));
    }
    let curriculum_mode = CurriculumMode::parse(&exp.curriculum)?;
    let gates = match &file.lahc.gates {
        None => GateBudget::TwentyOnePerTarget,
        Some(s) => GateBudget::parse(s)?,
    };
    let history_length = file
        .lahc
        .history
        .unwrap_or_else(|| default_history_for(kind));
    if history_length == 0 {
        return Err(Error::Config("lahc.history must be positive".into()));
    }

    Ok(ResolvedConfig {
        problem,
        train_sizes: exp.train_sizes.clone(),
        replicates: exp.replicates,
        losses,
        curriculum_mode,
        known_order: exp.known_order.clone(),
        history_length,
        iteration_limit: file.lahc.max_iterations.unwrap_or(DEFAULT_ITERATION_LIMIT),
        restart_limit: file.lahc.restarts.unwrap_or(DEFAULT_RESTART_LIMIT),
        gates,
        base_seed: exp.base_seed,
        output: exp.output.clone(),
        tau_permutations: file.tau_sweep.permutations,
        taus: file.tau_sweep.taus.clone(),
    })
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ResolvedConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1

[problem]
kind = "cpar"
n = 3

[experiment]
train_sizes = [4, 6]
replicates = 2
base_seed = 7
output = "records.jsonl"
"#;

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.problem.id(), "cpar3");
        assert_eq!(cfg.losses, LossKind::ALL.to_vec());
        assert_eq!(cfg.curriculum_mode, CurriculumMode::Identity);
        // Parity gets the long history by default.
        assert_eq!(cfg.history_length, 1000);
        assert_eq!(cfg.iteration_limit, DEFAULT_ITERATION_LIMIT);
        assert_eq!(cfg.restart_limit, DEFAULT_RESTART_LIMIT);
        assert_eq!(cfg.gates.resolve(3), 63);
        assert_eq!(cfg.tau_permutations, 10);
    }

    #[test]
    fn schema_version_is_enforced() {
        let bad = MINIMAL.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(parse_config(&bad), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = MINIMAL.replace("[experiment]", "[experiment]\nbogus = 1");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn curriculum_and_gates_parsers() {
        assert_eq!(
            CurriculumMode::parse("given:2,0,1").unwrap(),
            CurriculumMode::Given(vec![2, 0, 1])
        );
        assert_eq!(CurriculumMode::parse("auto").unwrap(), CurriculumMode::Auto);
        assert!(CurriculumMode::parse("given:x").is_err());
        assert!(CurriculumMode::parse("other").is_err());
        assert_eq!(GateBudget::parse("21m").unwrap().resolve(7), 147);
        assert_eq!(GateBudget::parse("42").unwrap().resolve(7), 42);
        assert!(GateBudget::parse("21x").is_err());
    }

    #[test]
    fn non_parity_gets_short_history() {
        let cfg = parse_config(&MINIMAL.replace("\"cpar\"", "\"add\"")).unwrap();
        assert_eq!(cfg.history_length, 250);
    }
}
