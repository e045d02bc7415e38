//! The `explain` command, separated from argument parsing so it can be
//! driven directly.

use std::path::PathBuf;

use bnx_core::{parse_network, Scenario, ScenarioKind, Settings, TargetQuery};

use crate::bundle::{explain, Mode};

/// A `NODE=STATE` pair from the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub node: String,
    pub state: String,
}

impl std::str::FromStr for Assignment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('=') {
            Some((node, state)) if !node.is_empty() && !state.is_empty() => Ok(Assignment {
                node: node.to_string(),
                state: state.to_string(),
            }),
            _ => Err(format!("expected NODE=STATE, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExplainArgs {
    pub network: PathBuf,
    pub target: Assignment,
    pub findings: Vec<Assignment>,
    pub mode: Mode,
    pub whatif: Vec<Assignment>,
    pub json: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input of any kind: unreadable or invalid network, unknown
    /// nodes or states, impossible evidence.
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

fn scenario(kind: ScenarioKind, pairs: &[Assignment], flag: &str) -> Result<Scenario, CliError> {
    let mut s = Scenario {
        findings: Default::default(),
        kind,
    };
    for a in pairs {
        if s.findings.insert(a.node.clone(), a.state.clone()).is_some() {
            return Err(CliError::Invalid(format!("{flag} given twice for node {}", a.node)));
        }
    }
    Ok(s)
}

/// Runs `explain` and returns what goes to stdout.
pub fn run_explain(args: &ExplainArgs) -> Result<String, CliError> {
    let text = std::fs::read_to_string(&args.network)
        .map_err(|e| CliError::Invalid(format!("reading {}: {e}", args.network.display())))?;
    let net = parse_network(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", args.network.display())))?;
    let target = TargetQuery::new(args.target.node.clone(), args.target.state.clone());
    let actual = scenario(ScenarioKind::Actual, &args.findings, "--finding")?;
    let hypothetical = if args.whatif.is_empty() {
        None
    } else {
        Some(scenario(ScenarioKind::Hypothetical, &args.whatif, "--whatif")?)
    };

    let bundle = explain(
        &net,
        &target,
        &actual,
        args.mode,
        hypothetical.as_ref(),
        &Settings::default(),
    )
    .map_err(|e| CliError::Invalid(e.to_string()))?;

    if args.json {
        return pretty(&bundle);
    }
    match (&bundle.verbal, &bundle.markup) {
        (Some(verbal), _) => Ok(verbal.render()),
        (None, Some(markup)) => pretty(markup),
        (None, None) => unreachable!("every mode carries verbal or markup"),
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut out = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    out.push('\n');
    Ok(out)
}
