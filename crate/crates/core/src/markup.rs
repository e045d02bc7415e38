//! Structured visual markup: node roles, badges and trail overlays.
//!
//! Pure data. Layout, colours and animation belong to whoever renders it.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::Analysis;
use crate::contribution::Band;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::trails::{Blocker, EdgeDirection, TrailStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Target,
    Finding,
    Intermediate,
    Irrelevant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Badge {
    /// Posterior probability of the target state.
    Posterior { state: String, probability: f64 },
    /// The observed state of a finding.
    Finding { state: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMark {
    pub node: String,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub badge: Option<Badge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrailMark {
    /// Node ids joined with `|`.
    pub key: String,
    pub finding: String,
    pub nodes: Vec<String>,
    pub edge_directions: Vec<EdgeDirection>,
    pub status: TrailStatus,
    /// Magnitude band of the owning finding's contribution.
    pub strength: Band,
    pub blockers: Vec<Blocker>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Legend {
    pub strength_classes: Vec<Band>,
    pub statuses: Vec<TrailStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualMarkup {
    pub network_id: String,
    /// Every network node, in declaration order.
    pub node_marks: Vec<NodeMark>,
    /// Grouped by finding in contribution order, trails in enumeration order.
    pub trail_marks: Vec<TrailMark>,
    pub legend: Legend,
}

impl VisualMarkup {
    pub fn node(&self, id: &str) -> Option<&NodeMark> {
        self.node_marks.iter().find(|m| m.node == id)
    }

    pub fn trail(&self, key: &str) -> Option<&TrailMark> {
        self.trail_marks.iter().find(|m| m.key == key)
    }
}

pub fn build_markup(net: &Network, analysis: &Analysis) -> VisualMarkup {
    let mut trail_marks = Vec::new();
    let mut on_trail = BTreeSet::new();
    for c in &analysis.contributions {
        for trail in analysis.trails_for(&c.finding.node) {
            on_trail.extend(trail.nodes[1..trail.nodes.len() - 1].iter().cloned());
            trail_marks.push(TrailMark {
                key: trail.key(),
                finding: c.finding.node.clone(),
                nodes: trail.nodes.clone(),
                edge_directions: trail.edge_directions.clone(),
                status: trail.status.unwrap_or(TrailStatus::Blocked),
                strength: c.magnitude_band,
                blockers: trail.blockers.clone(),
            });
        }
    }

    let node_marks = net
        .nodes()
        .iter()
        .map(|node| {
            let id = node.id.clone();
            if id == analysis.target.node {
                NodeMark {
                    node: id,
                    role: Role::Target,
                    badge: Some(Badge::Posterior {
                        state: analysis.target.state.clone(),
                        probability: analysis.target_probability,
                    }),
                }
            } else if let Some(state) = analysis.scenario.state_of(&id) {
                NodeMark {
                    node: id,
                    role: Role::Finding,
                    badge: Some(Badge::Finding {
                        state: state.to_string(),
                    }),
                }
            } else {
                let role = if on_trail.contains(&id) {
                    Role::Intermediate
                } else {
                    Role::Irrelevant
                };
                NodeMark {
                    node: id,
                    role,
                    badge: None,
                }
            }
        })
        .collect();

    let strengths: BTreeSet<Band> = trail_marks.iter().map(|t| t.strength).collect();
    let statuses: Vec<TrailStatus> = [TrailStatus::Active, TrailStatus::Blocked]
        .into_iter()
        .filter(|s| trail_marks.iter().any(|t| t.status == *s))
        .collect();

    VisualMarkup {
        network_id: net.id().to_string(),
        node_marks,
        trail_marks,
        legend: Legend {
            strength_classes: strengths.into_iter().collect(),
            statuses,
        },
    }
}

/// One differing field between two markups. Absent values are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkupChange {
    /// `node:<id>`, `trail:<key>` or `legend`.
    pub element: String,
    pub field: String,
    pub old: Value,
    pub new: Value,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("markup values serialize")
}

/// Field-level differences: nodes in declaration order, then trails by key,
/// then the legend.
pub fn diff_markup(before: &VisualMarkup, after: &VisualMarkup) -> Result<Vec<MarkupChange>> {
    if before.network_id != after.network_id {
        return Err(Error::NetworkMismatch(
            before.network_id.clone(),
            after.network_id.clone(),
        ));
    }
    let mut changes = Vec::new();
    let mut push = |element: String, field: &str, old: Value, new: Value| {
        if old != new {
            changes.push(MarkupChange {
                element,
                field: field.to_string(),
                old,
                new,
            });
        }
    };

    let after_nodes: BTreeMap<&str, &NodeMark> = after.node_marks.iter().map(|m| (m.node.as_str(), m)).collect();
    let mut seen = BTreeSet::new();
    for old in &before.node_marks {
        seen.insert(old.node.as_str());
        let element = format!("node:{}", old.node);
        match after_nodes.get(old.node.as_str()) {
            Some(new) => {
                push(element.clone(), "role", to_value(&old.role), to_value(&new.role));
                push(element, "badge", to_value(&old.badge), to_value(&new.badge));
            }
            None => push(element, "presence", Value::from("present"), Value::Null),
        }
    }
    for new in after.node_marks.iter().filter(|m| !seen.contains(m.node.as_str())) {
        push(
            format!("node:{}", new.node),
            "presence",
            Value::Null,
            Value::from("present"),
        );
    }

    let before_trails: BTreeMap<&str, &TrailMark> = before.trail_marks.iter().map(|t| (t.key.as_str(), t)).collect();
    let after_trails: BTreeMap<&str, &TrailMark> = after.trail_marks.iter().map(|t| (t.key.as_str(), t)).collect();
    let keys: BTreeSet<&str> = before_trails.keys().chain(after_trails.keys()).copied().collect();
    for key in keys {
        let element = format!("trail:{key}");
        match (before_trails.get(key), after_trails.get(key)) {
            (Some(old), Some(new)) => {
                push(element.clone(), "status", to_value(&old.status), to_value(&new.status));
                push(
                    element.clone(),
                    "strength",
                    to_value(&old.strength),
                    to_value(&new.strength),
                );
                push(element, "blockers", to_value(&old.blockers), to_value(&new.blockers));
            }
            (Some(_), None) => push(element, "presence", Value::from("present"), Value::Null),
            (None, Some(_)) => push(element, "presence", Value::Null, Value::from("present")),
            (None, None) => unreachable!(),
        }
    }

    push(
        "legend".to_string(),
        "strength_classes",
        to_value(&before.legend.strength_classes),
        to_value(&after.legend.strength_classes),
    );
    push(
        "legend".to_string(),
        "statuses",
        to_value(&before.legend.statuses),
        to_value(&after.legend.statuses),
    );
    Ok(changes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analyze, Settings};
    use crate::network::parse_network;
    use crate::scenario::{Scenario, TargetQuery};

    fn fixture(name: &str) -> Network {
        let text = match name {
            "chain3" => include_str!("../../../fixtures/chain3.json"),
            "collider3" => include_str!("../../../fixtures/collider3.json"),
            _ => unreachable!(),
        };
        parse_network(text).unwrap()
    }

    fn markup(net: &Network, target: (&str, &str), findings: &[(&str, &str)]) -> VisualMarkup {
        let scenario = Scenario::from_pairs(Default::default(), findings.iter().copied());
        let a = analyze(
            net,
            &TargetQuery::new(target.0, target.1),
            &scenario,
            &Settings::default(),
        )
        .unwrap();
        build_markup(net, &a)
    }

    fn roles(m: &VisualMarkup) -> Vec<(&str, Role)> {
        m.node_marks.iter().map(|n| (n.node.as_str(), n.role)).collect()
    }

    #[test]
    fn chain3_markup() {
        let m = markup(&fixture("chain3"), ("C", "t"), &[("A", "t")]);
        assert_eq!(
            roles(&m),
            [("A", Role::Finding), ("B", Role::Intermediate), ("C", Role::Target)]
        );
        assert_eq!(m.trail_marks.len(), 1);
        assert_eq!(m.trail_marks[0].key, "A|B|C");
        assert_eq!(m.trail_marks[0].status, TrailStatus::Active);
        assert_eq!(m.trail_marks[0].strength, Band::Strong);
        assert_eq!(m.legend.strength_classes, [Band::Strong]);
        assert_eq!(m.legend.statuses, [TrailStatus::Active]);
        match &m.node("C").unwrap().badge {
            Some(Badge::Posterior { probability, .. }) => assert!((probability - 0.74).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn collider3_no_findings() {
        let m = markup(&fixture("collider3"), ("A", "t"), &[]);
        assert_eq!(
            roles(&m),
            [("A", Role::Target), ("B", Role::Irrelevant), ("E", Role::Irrelevant)]
        );
        assert!(m.trail_marks.is_empty());
    }

    #[test]
    fn collider3_explaining_away() {
        let m = markup(&fixture("collider3"), ("A", "t"), &[("E", "t"), ("B", "t")]);
        assert_eq!(
            roles(&m),
            [("A", Role::Target), ("B", Role::Finding), ("E", Role::Finding)]
        );
        let t = m.trail("B|E|A").unwrap();
        assert_eq!(t.status, TrailStatus::Active);
        assert_eq!(t.strength, Band::Moderate);
        assert_eq!(m.trail("E|A").unwrap().strength, Band::Weak);
    }

    #[test]
    fn diff_identical_is_empty() {
        let m = markup(&fixture("chain3"), ("C", "t"), &[("A", "t")]);
        assert!(diff_markup(&m, &m.clone()).unwrap().is_empty());
    }

    #[test]
    fn diff_chain3_what_if() {
        let net = fixture("chain3");
        let before = markup(&net, ("C", "t"), &[("A", "t")]);
        let after = markup(&net, ("C", "t"), &[("A", "t"), ("B", "t")]);
        let changes = diff_markup(&before, &after).unwrap();
        let find = |element: &str, field: &str| {
            changes
                .iter()
                .find(|c| c.element == element && c.field == field)
                .unwrap_or_else(|| panic!("no change {element}.{field} in {changes:?}"))
        };
        let role = find("node:B", "role");
        assert_eq!(
            (role.old.as_str(), role.new.as_str()),
            (Some("intermediate"), Some("finding"))
        );
        let status = find("trail:A|B|C", "status");
        assert_eq!(
            (status.old.as_str(), status.new.as_str()),
            (Some("active"), Some("blocked"))
        );
        let badges: Vec<_> = changes.iter().filter(|c| c.element == "node:C").collect();
        assert_eq!(badges.len(), 1);
        assert_eq!(badges[0].field, "badge");
        let old_p = badges[0].old["probability"].as_f64().unwrap();
        let new_p = badges[0].new["probability"].as_f64().unwrap();
        assert!((old_p - 0.74).abs() < 1e-12 && (new_p - 0.8).abs() < 1e-12);
        assert_eq!(find("trail:B|C", "presence").new, Value::from("present"));
    }

    #[test]
    fn diff_rejects_other_network() {
        let a = markup(&fixture("chain3"), ("C", "t"), &[]);
        let b = markup(&fixture("collider3"), ("A", "t"), &[]);
        assert!(matches!(diff_markup(&a, &b), Err(Error::NetworkMismatch(..))));
    }

    #[test]
    fn json_round_trip() {
        let m = markup(&fixture("collider3"), ("A", "t"), &[("E", "t"), ("B", "t")]);
        let text = serde_json::to_string(&m).unwrap();
        let back: VisualMarkup = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
    }
}
