//! Discrete Bayesian-network model: parsing, validation and structural queries.
//!
//! A [`NetworkDoc`] is the raw serialized form and may violate any invariant.
//! A [`Network`] can only be obtained through validation and is immutable
//! afterwards; evidence lives in [`Scenario`](crate::Scenario), never here.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on CPT row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}", .violations.first().map(String::as_str).unwrap_or("invalid network"))]
    Invalid { violations: Vec<String> },
    #[error("cycle detected among nodes {}", .nodes.join(", "))]
    Cycle { nodes: Vec<String> },
}

/// Conditional probability table. Rows are indexed by the parent-state
/// combination, row-major over the parents list with the first parent
/// varying slowest; each row holds one probability per node state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cpt {
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    /// Display label; an empty label displays as the id.
    #[serde(default)]
    pub label: String,
    pub states: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Cpt,
}

impl Node {
    pub fn display_label(&self) -> &str {
        if self.label.is_empty() {
            &self.id
        } else {
            &self.label
        }
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }
}

/// Serialized network document, unvalidated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub id: String,
    pub nodes: Vec<Node>,
}

/// A validated, immutable discrete Bayesian network.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc", into = "NetworkDoc")]
pub struct Network {
    doc: NetworkDoc,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    descendants: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.doc == other.doc
    }
}

impl TryFrom<NetworkDoc> for Network {
    type Error = NetworkError;

    fn try_from(doc: NetworkDoc) -> Result<Self, Self::Error> {
        Network::from_doc(doc)
    }
}

impl From<Network> for NetworkDoc {
    fn from(net: Network) -> Self {
        net.doc
    }
}

/// Parses and validates a JSON network document.
pub fn parse_network(text: &str) -> Result<Network, NetworkError> {
    let doc: NetworkDoc = serde_json::from_str(text).map_err(|e| NetworkError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Network::from_doc(doc)
}

/// Checks every network invariant and returns one description per violation.
/// An empty list means the document is a valid network.
pub fn validate(doc: &NetworkDoc) -> Vec<String> {
    let mut out = Vec::new();
    if doc.nodes.is_empty() {
        out.push("network has no nodes".to_string());
    }

    let mut seen = HashSet::new();
    for node in &doc.nodes {
        if !seen.insert(node.id.as_str()) {
            out.push(format!("duplicate node id {}", node.id));
        }
    }
    let by_id: HashMap<&str, &Node> = doc.nodes.iter().map(|n| (n.id.as_str(), n)).collect();

    for node in &doc.nodes {
        if node.states.len() < 2 {
            out.push(format!("node {} has fewer than 2 states", node.id));
        }
        let mut states = HashSet::new();
        for s in &node.states {
            if !states.insert(s.as_str()) {
                out.push(format!("duplicate state {} in node {}", s, node.id));
            }
        }

        let mut parents_ok = true;
        let mut listed = HashSet::new();
        for p in &node.parents {
            if !listed.insert(p.as_str()) {
                out.push(format!("duplicate parent {} of {}", p, node.id));
            }
            if !by_id.contains_key(p.as_str()) {
                out.push(format!("unknown parent {} of {}", p, node.id));
                parents_ok = false;
            }
        }

        if parents_ok {
            let expected: usize = node.parents.iter().map(|p| by_id[p.as_str()].states.len()).product();
            if node.cpt.rows.len() != expected {
                out.push(format!(
                    "node {}: cpt has {} rows, expected {}",
                    node.id,
                    node.cpt.rows.len(),
                    expected
                ));
            }
        }

        for (r, row) in node.cpt.rows.iter().enumerate() {
            if row.len() != node.states.len() {
                out.push(format!(
                    "node {} row {}: {} entries, expected {}",
                    node.id,
                    r,
                    row.len(),
                    node.states.len()
                ));
                continue;
            }
            if let Some(bad) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                out.push(format!(
                    "node {} row {}: entry {} outside [0,1]",
                    node.id,
                    r,
                    fmt_num(*bad)
                ));
                continue;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                out.push(format!("node {} row {}: row sum {} ≠ 1", node.id, r, fmt_num(sum)));
            }
        }
    }

    if let Err(NetworkError::Cycle { nodes }) = topological_order(doc) {
        out.push(format!("cycle detected among nodes {}", nodes.join(", ")));
    }
    out
}

/// Kahn's algorithm; among ready nodes the earliest declared goes first.
/// Unknown parent references are ignored here (they are reported by [`validate`]).
pub fn topological_order(doc: &NetworkDoc) -> Result<Vec<String>, NetworkError> {
    let index: HashMap<&str, usize> = doc.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let n = doc.nodes.len();
    let mut indegree = vec![0usize; n];
    let mut children = vec![Vec::new(); n];
    for (i, node) in doc.nodes.iter().enumerate() {
        let parents: BTreeSet<usize> = node
            .parents
            .iter()
            .filter_map(|p| index.get(p.as_str()).copied())
            .collect();
        for p in parents {
            indegree[i] += 1;
            children[p].push(i);
        }
    }

    let mut ready: BinaryHeap<Reverse<usize>> = (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }

    if order.len() < n {
        let nodes = (0..n)
            .filter(|&i| indegree[i] > 0)
            .map(|i| doc.nodes[i].id.clone())
            .collect();
        return Err(NetworkError::Cycle { nodes });
    }
    Ok(order.into_iter().map(|i| doc.nodes[i].id.clone()).collect())
}

fn fmt_num(v: f64) -> String {
    let s = format!("{:.10}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

impl Network {
    pub fn from_doc(doc: NetworkDoc) -> Result<Self, NetworkError> {
        let violations = validate(&doc);
        if !violations.is_empty() {
            return Err(NetworkError::Invalid { violations });
        }

        let index: HashMap<String, usize> = doc.nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        let n = doc.nodes.len();
        let parents: Vec<Vec<usize>> = doc
            .nodes
            .iter()
            .map(|node| node.parents.iter().map(|p| index[p]).collect())
            .collect();
        let mut children = vec![Vec::new(); n];
        for (i, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(i);
            }
        }
        let topo = topological_order(&doc)?.iter().map(|id| index[id]).collect::<Vec<_>>();

        // Reverse topological sweep: a node's descendants are its children
        // plus their descendants.
        let mut desc_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &v in topo.iter().rev() {
            let mut set = BTreeSet::new();
            for &c in &children[v] {
                set.insert(c);
                set.extend(desc_sets[c].iter().copied());
            }
            desc_sets[v] = set;
        }
        let descendants = desc_sets.into_iter().map(|s| s.into_iter().collect()).collect();

        Ok(Network {
            doc,
            index,
            parents,
            children,
            descendants,
            topo,
        })
    }

    pub fn id(&self) -> &str {
        &self.doc.id
    }

    pub fn nodes(&self) -> &[Node] {
        &self.doc.nodes
    }

    pub fn len(&self) -> usize {
        self.doc.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc.nodes.is_empty()
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.doc.nodes[idx]
    }

    pub fn node_by_id(&self, id: &str) -> Option<&Node> {
        self.index_of(id).map(|i| &self.doc.nodes[i])
    }

    /// Declaration index of a node id.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn cardinality(&self, idx: usize) -> usize {
        self.doc.nodes[idx].states.len()
    }

    pub fn parents_of(&self, idx: usize) -> &[usize] {
        &self.parents[idx]
    }

    pub fn children_of(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    /// Strict descendants, ascending by declaration index.
    pub fn descendants_of(&self, idx: usize) -> &[usize] {
        &self.descendants[idx]
    }

    pub fn is_parent(&self, parent: usize, child: usize) -> bool {
        self.parents[child].contains(&parent)
    }

    /// Node ids in topological order, ties broken by declaration order.
    pub fn topological_order(&self) -> Vec<String> {
        self.topo.iter().map(|&i| self.doc.nodes[i].id.clone()).collect()
    }

    pub fn topological_indices(&self) -> &[usize] {
        &self.topo
    }

    /// Row of `idx`'s CPT selected by a full assignment of network states.
    pub fn cpt_row_index(&self, idx: usize, assignment: &[usize]) -> usize {
        self.parents[idx]
            .iter()
            .fold(0, |row, &p| row * self.cardinality(p) + assignment[p])
    }

    pub fn to_doc(&self) -> NetworkDoc {
        self.doc.clone()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("network document serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN3: &str = include_str!("../../../fixtures/chain3.json");
    const COLLIDER3: &str = include_str!("../../../fixtures/collider3.json");

    fn chain_doc() -> NetworkDoc {
        serde_json::from_str(CHAIN3).unwrap()
    }

    #[test]
    fn parses_chain3() {
        let net = parse_network(CHAIN3).unwrap();
        assert_eq!(net.id(), "chain3");
        let ids: Vec<_> = net.nodes().iter().map(|n| n.id.as_str()).collect();
        assert_eq!(ids, ["A", "B", "C"]);
        assert!(net.is_parent(0, 1));
        assert!(net.is_parent(1, 2));
        assert!(!net.is_parent(0, 2));
        assert_eq!(net.descendants_of(0), &[1, 2]);
    }

    #[test]
    fn row_sum_violation_is_reported() {
        let mut doc = chain_doc();
        doc.nodes[0].cpt.rows[0] = vec![0.7, 0.7];
        let err = Network::from_doc(doc).unwrap_err();
        assert_eq!(err.to_string(), "node A row 0: row sum 1.4 ≠ 1");
        assert!(err.to_string().contains("row sum 1.4 ≠ 1"));
    }

    #[test]
    fn two_cycle_is_rejected() {
        let text = r#"{"id":"cyc","nodes":[
            {"id":"A","label":"A","states":["t","f"],"parents":["B"],"cpt":[[0.5,0.5],[0.5,0.5]]},
            {"id":"B","label":"B","states":["t","f"],"parents":["A"],"cpt":[[0.5,0.5],[0.5,0.5]]}]}"#;
        let err = parse_network(text).unwrap_err();
        assert!(err.to_string().contains("cycle detected"), "{err}");
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_network("{\"id\": \"x\",\n  \"nodes\": [ oops ]}").unwrap_err();
        match err {
            NetworkError::Syntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn validate_valid_and_tolerance_boundary() {
        assert!(validate(&chain_doc()).is_empty());
        let mut doc = chain_doc();
        // sum 0.9999999999, off by 1e-10
        doc.nodes[1].cpt.rows[0] = vec![0.9, 0.0999999999];
        assert!(validate(&doc).is_empty());
        // sum 0.99999999, off by 1e-8
        doc.nodes[1].cpt.rows[0] = vec![0.9, 0.09999999];
        assert_eq!(validate(&doc).len(), 1);
    }

    #[test]
    fn validate_unknown_parent() {
        let mut doc = chain_doc();
        doc.nodes[2].parents = vec!["Z".into()];
        assert_eq!(validate(&doc), vec!["unknown parent Z of C".to_string()]);
    }

    #[test]
    fn validate_shape_errors() {
        let mut doc = chain_doc();
        doc.nodes[1].cpt.rows.pop();
        doc.nodes[2].cpt.rows[1] = vec![1.0];
        doc.nodes[0].states = vec!["t".into(), "t".into()];
        let v = validate(&doc);
        assert!(v.contains(&"node B: cpt has 1 rows, expected 2".to_string()), "{v:?}");
        assert!(v.contains(&"node C row 1: 1 entries, expected 2".to_string()), "{v:?}");
        assert!(v.contains(&"duplicate state t in node A".to_string()), "{v:?}");
    }

    #[test]
    fn validate_negative_entry() {
        let mut doc = chain_doc();
        doc.nodes[0].cpt.rows[0] = vec![1.5, -0.5];
        assert_eq!(
            validate(&doc),
            vec!["node A row 0: entry 1.5 outside [0,1]".to_string()]
        );
    }

    #[test]
    fn topological_orders() {
        assert_eq!(parse_network(CHAIN3).unwrap().topological_order(), ["A", "B", "C"]);
        assert_eq!(parse_network(COLLIDER3).unwrap().topological_order(), ["A", "B", "E"]);
        let single = r#"{"id":"one","nodes":[{"id":"X","states":["a","b"],"cpt":[[0.2,0.8]]}]}"#;
        let net = parse_network(single).unwrap();
        assert_eq!(net.topological_order(), ["X"]);
        assert_eq!(net.node(0).display_label(), "X");
    }

    #[test]
    fn declaration_order_breaks_ties_after_children() {
        // C declared first but depends on B; A and B are both roots.
        let text = r#"{"id":"t","nodes":[
            {"id":"C","states":["a","b"],"parents":["B"],"cpt":[[0.5,0.5],[0.5,0.5]]},
            {"id":"B","states":["a","b"],"cpt":[[0.5,0.5]]},
            {"id":"A","states":["a","b"],"cpt":[[0.5,0.5]]}]}"#;
        let net = parse_network(text).unwrap();
        assert_eq!(net.topological_order(), ["B", "C", "A"]);
    }

    #[test]
    fn reserialize_round_trip() {
        let net = parse_network(COLLIDER3).unwrap();
        let again = parse_network(&net.to_json()).unwrap();
        assert_eq!(net, again);
        assert_eq!(net.nodes()[2].parents, ["A", "B"]);
    }
}
