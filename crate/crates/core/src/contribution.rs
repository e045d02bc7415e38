//! Finding contributions, what-if scenarios and common-effect analysis.
//!
//! A finding's contribution is the change in the target probability caused
//! by learning it on top of all the other findings (leave-one-out).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::posterior;
use crate::network::Network;
use crate::scenario::{Scenario, ScenarioKind, TargetQuery};
use crate::trails::{trail_diff_with, TrailDiff, TrailOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increase,
    Decrease,
    Negligible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Negligible,
    Weak,
    Moderate,
    Strong,
}

impl Band {
    pub const ALL: [Band; 4] = [Band::Negligible, Band::Weak, Band::Moderate, Band::Strong];

    pub fn as_str(self) -> &'static str {
        match self {
            Band::Negligible => "negligible",
            Band::Weak => "weak",
            Band::Moderate => "moderate",
            Band::Strong => "strong",
        }
    }
}

/// Direction threshold and magnitude-band lower bounds on `|delta|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bands {
    pub epsilon: f64,
    pub weak: f64,
    pub moderate: f64,
    pub strong: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Bands {
            epsilon: 1e-6,
            weak: 1e-6,
            moderate: 0.05,
            strong: 0.20,
        }
    }
}

impl Bands {
    pub fn direction(&self, delta: f64) -> Direction {
        if delta > self.epsilon {
            Direction::Increase
        } else if delta < -self.epsilon {
            Direction::Decrease
        } else {
            Direction::Negligible
        }
    }

    pub fn band(&self, delta: f64) -> Band {
        let m = delta.abs();
        if m >= self.strong {
            Band::Strong
        } else if m >= self.moderate {
            Band::Moderate
        } else if m >= self.weak {
            Band::Weak
        } else {
            Band::Negligible
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub node: String,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub finding: Finding,
    pub p_with: f64,
    pub p_without: f64,
    pub delta: f64,
    pub direction: Direction,
    pub magnitude_band: Band,
}

/// Probability of the target state under a scenario.
pub fn target_probability(net: &Network, target: &TargetQuery, scenario: &Scenario) -> Result<f64> {
    let (_, state) = target.resolve(net)?;
    Ok(posterior(net, scenario, &target.node)?.prob(state))
}

pub fn finding_contribution(
    net: &Network,
    target: &TargetQuery,
    scenario: &Scenario,
    finding: &str,
    bands: &Bands,
) -> Result<Contribution> {
    scenario.validate_for(net, Some(target))?;
    let state = scenario
        .state_of(finding)
        .ok_or_else(|| Error::FindingNotInScenario(finding.to_string()))?
        .to_string();
    let p_with = target_probability(net, target, scenario)?;
    let p_without = target_probability(net, target, &scenario.without(finding))?;
    let delta = p_with - p_without;
    Ok(Contribution {
        finding: Finding {
            node: finding.to_string(),
            state,
        },
        p_with,
        p_without,
        delta,
        direction: bands.direction(delta),
        magnitude_band: bands.band(delta),
    })
}

/// Orders magnitudes on a 1e-12 grid so round-off between two
/// constructed-equal deltas does not decide their order.
fn magnitude_key(delta: f64) -> i64 {
    (delta.abs() * 1e12).round() as i64
}

/// Every finding's contribution, largest `|delta|` first, ties by node
/// declaration order.
pub fn all_contributions(
    net: &Network,
    target: &TargetQuery,
    scenario: &Scenario,
    bands: &Bands,
) -> Result<Vec<Contribution>> {
    scenario.validate_for(net, Some(target))?;
    let mut out = scenario
        .finding_indices(net)?
        .into_iter()
        .map(|i| {
            let c = finding_contribution(net, target, scenario, &net.node(i).id, bands)?;
            Ok((i, c))
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|(ia, a), (ib, b)| magnitude_key(b.delta).cmp(&magnitude_key(a.delta)).then(ia.cmp(ib)));
    Ok(out.into_iter().map(|(_, c)| c).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResult {
    /// The hypothetical findings this result describes.
    pub hypothetical: BTreeMap<String, String>,
    pub base_p: f64,
    pub hyp_p: f64,
    pub delta: f64,
    /// One report per node carrying a finding in either scenario, in
    /// declaration order.
    pub trail_changes: Vec<TrailDiff>,
}

impl WhatIfResult {
    pub fn flipped_trails(&self) -> impl Iterator<Item = &str> {
        self.trail_changes
            .iter()
            .flat_map(|d| d.flipped.iter().map(String::as_str))
    }
}

pub fn what_if(
    net: &Network,
    target: &TargetQuery,
    actual: &Scenario,
    hypothetical: &Scenario,
    options: &TrailOptions,
) -> Result<WhatIfResult> {
    actual.validate_for(net, Some(target))?;
    hypothetical.validate_for(net, Some(target))?;
    let scenario_prob = |s: &Scenario, kind: ScenarioKind| {
        target_probability(net, target, s).map_err(|e| match e {
            Error::ImpossibleEvidence => Error::ImpossibleScenario(kind),
            other => other,
        })
    };
    let base_p = scenario_prob(actual, ScenarioKind::Actual)?;
    let hyp_p = scenario_prob(hypothetical, ScenarioKind::Hypothetical)?;

    let mut nodes: Vec<usize> = actual.finding_indices(net)?;
    nodes.extend(hypothetical.finding_indices(net)?);
    nodes.sort_unstable();
    nodes.dedup();
    let trail_changes = nodes
        .into_iter()
        .map(|i| trail_diff_with(net, &net.node(i).id, &target.node, actual, hypothetical, options))
        .collect::<Result<Vec<_>>>()?;

    Ok(WhatIfResult {
        hypothetical: hypothetical.findings.clone(),
        base_p,
        hyp_p,
        delta: hyp_p - base_p,
        trail_changes,
    })
}

/// One what-if inside a common-effect analysis, with the quantity it tracks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonEffectCase {
    pub label: String,
    pub tracked: TargetQuery,
    pub result: WhatIfResult,
}

/// The three common-effect questions for a target that is one cause of an
/// effect with another cause:
/// (a) how observing each cause, or both, moves the effect;
/// (b) how observing the other cause alone moves the target;
/// (c) how observing the effect alone moves the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommonEffectAnalysis {
    /// Target cause, other cause, both causes.
    pub a: Vec<CommonEffectCase>,
    pub b: CommonEffectCase,
    pub c: CommonEffectCase,
}

/// States come from `scenario` when it has a finding for the node and fall
/// back to the node's first state; the target cause is always set to the
/// target state.
pub fn common_effect_analysis(
    net: &Network,
    target: &TargetQuery,
    effect: &str,
    other_cause: &str,
    scenario: &Scenario,
    options: &TrailOptions,
) -> Result<CommonEffectAnalysis> {
    let (t, _) = target.resolve(net)?;
    let e = net
        .index_of(effect)
        .ok_or_else(|| Error::UnknownNode(effect.to_string()))?;
    let o = net
        .index_of(other_cause)
        .ok_or_else(|| Error::UnknownNode(other_cause.to_string()))?;
    scenario.resolve(net)?;
    if t == o || t == e || o == e {
        return Err(Error::StructureMismatch(
            "target, effect and other cause must be distinct".into(),
        ));
    }
    if !net.is_parent(t, e) || !net.is_parent(o, e) {
        return Err(Error::StructureMismatch(format!(
            "{} and {} are not both parents of {}",
            target.node, other_cause, effect
        )));
    }

    let state_for = |idx: usize| -> String {
        let node = net.node(idx);
        scenario
            .state_of(&node.id)
            .map(str::to_string)
            .unwrap_or_else(|| node.states[0].clone())
    };
    let effect_query = TargetQuery::new(effect, state_for(e));
    let other_state = state_for(o);
    let empty = Scenario::actual();
    let hyp =
        |pairs: &[(&str, &str)]| Scenario::from_pairs(ScenarioKind::Hypothetical, pairs.iter().map(|(n, s)| (*n, *s)));

    let case = |label: &str, tracked: &TargetQuery, hypothetical: Scenario| -> Result<CommonEffectCase> {
        Ok(CommonEffectCase {
            label: label.to_string(),
            tracked: tracked.clone(),
            result: what_if(net, tracked, &empty, &hypothetical, options)?,
        })
    };

    let a = vec![
        case("a:target-cause", &effect_query, hyp(&[(&target.node, &target.state)]))?,
        case("a:other-cause", &effect_query, hyp(&[(other_cause, &other_state)]))?,
        case(
            "a:both-causes",
            &effect_query,
            hyp(&[(&target.node, &target.state), (other_cause, &other_state)]),
        )?,
    ];
    let b = case("b", target, hyp(&[(other_cause, &other_state)]))?;
    let c = case("c", target, hyp(&[(effect, &effect_query.state)]))?;
    Ok(CommonEffectAnalysis { a, b, c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;

    fn chain() -> Network {
        parse_network(include_str!("../../../fixtures/chain3.json")).unwrap()
    }

    fn collider() -> Network {
        parse_network(include_str!("../../../fixtures/collider3.json")).unwrap()
    }

    #[test]
    fn bands_and_directions() {
        let b = Bands::default();
        assert_eq!(b.band(0.24), Band::Strong);
        assert_eq!(b.band(-0.1302), Band::Moderate);
        assert_eq!(b.band(0.0429), Band::Weak);
        assert_eq!(b.band(5e-7), Band::Negligible);
        assert_eq!(b.band(0.20), Band::Strong);
        assert_eq!(b.band(0.05), Band::Moderate);
        assert_eq!(b.direction(2e-6), Direction::Increase);
        assert_eq!(b.direction(-2e-6), Direction::Decrease);
        assert_eq!(b.direction(1e-6), Direction::Negligible);
    }

    #[test]
    fn chain3_contribution() {
        let net = chain();
        let c = finding_contribution(
            &net,
            &TargetQuery::new("C", "t"),
            &Scenario::actual().with("A", "t"),
            "A",
            &Bands::default(),
        )
        .unwrap();
        assert!((c.p_with - 0.74).abs() < 1e-12);
        assert!((c.p_without - 0.5).abs() < 1e-12);
        assert!((c.delta - 0.24).abs() < 1e-12);
        assert_eq!(c.delta, c.p_with - c.p_without);
        assert_eq!(c.direction, Direction::Increase);
        assert_eq!(c.magnitude_band, Band::Strong);
    }

    #[test]
    fn explaining_away_contribution() {
        let net = collider();
        let c = finding_contribution(
            &net,
            &TargetQuery::new("A", "t"),
            &Scenario::actual().with("E", "t").with("B", "t"),
            "B",
            &Bands::default(),
        )
        .unwrap();
        assert!((c.p_with - 0.95 / 1.75).abs() < 1e-12);
        assert!((c.p_without - 0.4375 / 0.65).abs() < 1e-12);
        assert_eq!(c.direction, Direction::Decrease);
        assert_eq!(c.magnitude_band, Band::Moderate);
    }

    #[test]
    fn separated_finding_is_negligible() {
        // B ⟂ A with E unobserved: learning B changes nothing.
        let net = collider();
        let c = finding_contribution(
            &net,
            &TargetQuery::new("A", "t"),
            &Scenario::actual().with("B", "f"),
            "B",
            &Bands::default(),
        )
        .unwrap();
        assert!(c.delta.abs() < 1e-12);
        assert_eq!(c.direction, Direction::Negligible);
        assert_eq!(c.magnitude_band, Band::Negligible);
    }

    #[test]
    fn contribution_errors() {
        let net = chain();
        let t = TargetQuery::new("C", "t");
        let s = Scenario::actual().with("A", "t");
        assert_eq!(
            finding_contribution(&net, &t, &s, "B", &Bands::default()),
            Err(Error::FindingNotInScenario("B".into()))
        );
        let observed_target = s.clone().with("C", "t");
        assert_eq!(
            finding_contribution(&net, &t, &observed_target, "A", &Bands::default()),
            Err(Error::TargetObserved("C".into()))
        );
    }

    #[test]
    fn ranking_and_empty() {
        let net = collider();
        let t = TargetQuery::new("A", "t");
        let all = all_contributions(
            &net,
            &t,
            &Scenario::actual().with("E", "t").with("B", "t"),
            &Bands::default(),
        )
        .unwrap();
        let nodes: Vec<_> = all.iter().map(|c| c.finding.node.as_str()).collect();
        assert_eq!(nodes, ["B", "E"]);
        assert!(all_contributions(&net, &t, &Scenario::actual(), &Bands::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn equal_magnitudes_tie_by_declaration_order() {
        // Target T with two identical children; findings on both are
        // symmetric so their contributions are equal by construction.
        let text = r#"{"id":"twins","nodes":[
            {"id":"Y","states":["t","f"],"parents":["T"],"cpt":[[0.7,0.3],[0.2,0.8]]},
            {"id":"T","states":["t","f"],"cpt":[[0.4,0.6]]},
            {"id":"X","states":["t","f"],"parents":["T"],"cpt":[[0.7,0.3],[0.2,0.8]]}]}"#;
        let net = parse_network(text).unwrap();
        let all = all_contributions(
            &net,
            &TargetQuery::new("T", "t"),
            &Scenario::actual().with("X", "t").with("Y", "t"),
            &Bands::default(),
        )
        .unwrap();
        assert!((all[0].delta - all[1].delta).abs() < 1e-12);
        assert_eq!(all[0].finding.node, "Y");
        assert_eq!(all[1].finding.node, "X");
    }

    #[test]
    fn what_if_chain3() {
        let net = chain();
        let t = TargetQuery::new("C", "t");
        let actual = Scenario::actual().with("A", "t");
        let hyp = Scenario::hypothetical().with("A", "t").with("B", "t");
        let r = what_if(&net, &t, &actual, &hyp, &TrailOptions::default()).unwrap();
        assert!((r.base_p - 0.74).abs() < 1e-12);
        assert!((r.hyp_p - 0.8).abs() < 1e-12);
        assert!((r.delta - 0.06).abs() < 1e-12);
        assert_eq!(r.flipped_trails().collect::<Vec<_>>(), ["A|B|C"]);

        let same = what_if(&net, &t, &actual, &actual, &TrailOptions::default()).unwrap();
        assert_eq!(same.delta, 0.0);
        assert_eq!(same.flipped_trails().count(), 0);
    }

    #[test]
    fn what_if_removing_cause() {
        let net = collider();
        let t = TargetQuery::new("A", "t");
        let actual = Scenario::actual().with("E", "t").with("B", "t");
        let hyp = Scenario::hypothetical().with("E", "t");
        let r = what_if(&net, &t, &actual, &hyp, &TrailOptions::default()).unwrap();
        assert!((r.base_p - 0.95 / 1.75).abs() < 1e-12);
        assert!((r.hyp_p - 0.4375 / 0.65).abs() < 1e-12);
        assert!((r.delta - (0.4375 / 0.65 - 0.95 / 1.75)).abs() < 1e-12);
    }

    #[test]
    fn what_if_flags_impossible_scenario() {
        let net = parse_network(include_str!("../../../fixtures/deterministic3.json")).unwrap();
        let t = TargetQuery::new("C", "t");
        let hyp = Scenario::hypothetical().with("A", "t").with("B", "f");
        assert_eq!(
            what_if(&net, &t, &Scenario::actual(), &hyp, &TrailOptions::default()),
            Err(Error::ImpossibleScenario(ScenarioKind::Hypothetical))
        );
    }

    #[test]
    fn common_effect_cases() {
        let net = collider();
        let t = TargetQuery::new("A", "t");
        let s = Scenario::actual().with("E", "t").with("B", "t");
        let r = common_effect_analysis(&net, &t, "E", "B", &s, &TrailOptions::default()).unwrap();
        // (a) P(E=t): 0.65 -> 0.875 when A=t
        assert!((r.a[0].result.base_p - 0.65).abs() < 1e-12);
        assert!((r.a[0].result.hyp_p - 0.875).abs() < 1e-12);
        assert!((r.a[0].result.delta - 0.225).abs() < 1e-12);
        assert!((r.a[2].result.hyp_p - 0.95).abs() < 1e-12);
        // (b) marginal independence of the causes
        assert!(r.b.result.delta.abs() < 1e-12);
        // (c) 0.5 -> 0.4375/0.65
        assert!((r.c.result.delta - (0.4375 / 0.65 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn common_effect_structure_checked() {
        let net = chain();
        let err = common_effect_analysis(
            &net,
            &TargetQuery::new("A", "t"),
            "C",
            "B",
            &Scenario::actual(),
            &TrailOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::StructureMismatch(_)));
    }
}
