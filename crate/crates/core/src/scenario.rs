//! Target queries and evidence scenarios.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;

/// The node state whose probability an explanation is about.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TargetQuery {
    pub node: String,
    pub state: String,
}

impl TargetQuery {
    pub fn new(node: impl Into<String>, state: impl Into<String>) -> Self {
        TargetQuery {
            node: node.into(),
            state: state.into(),
        }
    }

    /// Resolves to (node index, state index).
    pub fn resolve(&self, net: &Network) -> Result<(usize, usize)> {
        resolve_pair(net, &self.node, &self.state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    #[default]
    Actual,
    Hypothetical,
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioKind::Actual => f.write_str("actual"),
            ScenarioKind::Hypothetical => f.write_str("hypothetical"),
        }
    }
}

/// A set of findings. Keyed by node id, so equality and iteration order do
/// not depend on the order findings were added.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Scenario {
    pub findings: BTreeMap<String, String>,
    #[serde(default)]
    pub kind: ScenarioKind,
}

/// Per-node observed state index, indexed by declaration order.
pub type Evidence = Vec<Option<usize>>;

impl Scenario {
    pub fn actual() -> Self {
        Scenario::default()
    }

    pub fn hypothetical() -> Self {
        Scenario {
            findings: BTreeMap::new(),
            kind: ScenarioKind::Hypothetical,
        }
    }

    pub fn with(mut self, node: impl Into<String>, state: impl Into<String>) -> Self {
        self.findings.insert(node.into(), state.into());
        self
    }

    pub fn from_pairs<I, K, V>(kind: ScenarioKind, pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Scenario {
            findings: pairs.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.findings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn contains(&self, node: &str) -> bool {
        self.findings.contains_key(node)
    }

    pub fn state_of(&self, node: &str) -> Option<&str> {
        self.findings.get(node).map(String::as_str)
    }

    /// The same scenario without the finding on `node`.
    pub fn without(&self, node: &str) -> Scenario {
        let mut s = self.clone();
        s.findings.remove(node);
        s
    }

    /// Checks nodes and states and returns the evidence vector.
    pub fn resolve(&self, net: &Network) -> Result<Evidence> {
        let mut evidence = vec![None; net.len()];
        for (node, state) in &self.findings {
            let (i, s) = resolve_pair(net, node, state)?;
            evidence[i] = Some(s);
        }
        Ok(evidence)
    }

    /// Full validity check including the "target never observed" rule.
    pub fn validate_for(&self, net: &Network, target: Option<&TargetQuery>) -> Result<Evidence> {
        let evidence = self.resolve(net)?;
        if let Some(t) = target {
            t.resolve(net)?;
            if self.contains(&t.node) {
                return Err(Error::TargetObserved(t.node.clone()));
            }
        }
        Ok(evidence)
    }

    /// Finding node indices in declaration order.
    pub fn finding_indices(&self, net: &Network) -> Result<Vec<usize>> {
        let mut idx = self
            .findings
            .keys()
            .map(|n| net.index_of(n).ok_or_else(|| Error::UnknownNode(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        Ok(idx)
    }
}

fn resolve_pair(net: &Network, node: &str, state: &str) -> Result<(usize, usize)> {
    let i = net.index_of(node).ok_or_else(|| Error::UnknownNode(node.to_string()))?;
    let s = net.node(i).state_index(state).ok_or_else(|| Error::UnknownState {
        node: node.to_string(),
        state: state.to_string(),
    })?;
    Ok((i, s))
}
