//! Undirected trails between two nodes and their d-separation status.
//!
//! Findings on a trail's own endpoints are ignored when judging it: a trail
//! from a finding to the target is evaluated against the *other* findings,
//! which is the evidence the finding's contribution is measured against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Network;
use crate::scenario::Scenario;

/// Default ceiling on the number of trails enumerated between two nodes.
pub const DEFAULT_MAX_TRAILS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeDirection {
    /// Arrow points along the trail (`a → b`).
    Forward,
    /// Arrow points back toward the trail start (`a ← b`).
    Backward,
}

impl EdgeDirection {
    pub fn arrow(self) -> &'static str {
        match self {
            EdgeDirection::Forward => "→",
            EdgeDirection::Backward => "←",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Chain,
    CommonCause,
    CommonEffect,
}

impl Link {
    pub fn classify(incoming: EdgeDirection, outgoing: EdgeDirection) -> Link {
        use EdgeDirection::*;
        match (incoming, outgoing) {
            (Forward, Forward) | (Backward, Backward) => Link::Chain,
            (Backward, Forward) => Link::CommonCause,
            (Forward, Backward) => Link::CommonEffect,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrailStatus {
    Active,
    Blocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockReason {
    ChainObserved,
    ForkObserved,
    ColliderUnobserved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blocker {
    pub node: String,
    pub reason: BlockReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trail {
    pub nodes: Vec<String>,
    pub edge_directions: Vec<EdgeDirection>,
    /// One entry per internal node.
    pub links: Vec<Link>,
    pub status: Option<TrailStatus>,
    pub blockers: Vec<Blocker>,
}

impl Trail {
    /// Node ids joined with `|`; unique per trail.
    pub fn key(&self) -> String {
        self.nodes.join("|")
    }

    pub fn is_active(&self) -> bool {
        self.status == Some(TrailStatus::Active)
    }

    fn from_indices(net: &Network, path: &[usize]) -> Trail {
        let edge_directions: Vec<EdgeDirection> = path.windows(2).map(|w| direction(net, w[0], w[1])).collect();
        let links = edge_directions.windows(2).map(|d| Link::classify(d[0], d[1])).collect();
        Trail {
            nodes: path.iter().map(|&i| net.node(i).id.clone()).collect(),
            edge_directions,
            links,
            status: None,
            blockers: Vec::new(),
        }
    }
}

fn direction(net: &Network, a: usize, b: usize) -> EdgeDirection {
    if net.is_parent(a, b) {
        EdgeDirection::Forward
    } else {
        EdgeDirection::Backward
    }
}

/// Undirected neighbours of every node, sorted by node id.
fn neighbours(net: &Network) -> Vec<Vec<usize>> {
    (0..net.len())
        .map(|i| {
            let mut n: Vec<usize> = net.parents_of(i).iter().chain(net.children_of(i)).copied().collect();
            n.sort_by(|a, b| net.node(*a).id.cmp(&net.node(*b).id));
            n.dedup();
            n
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailOptions {
    pub max_trails: usize,
}

impl Default for TrailOptions {
    fn default() -> Self {
        TrailOptions {
            max_trails: DEFAULT_MAX_TRAILS,
        }
    }
}

/// All simple undirected paths from `from` to `to`, ordered
/// lexicographically by node-id sequence. Status is left unset.
pub fn enumerate_trails(net: &Network, from: &str, to: &str) -> Result<Vec<Trail>> {
    enumerate_trails_with(net, from, to, &TrailOptions::default())
}

pub fn enumerate_trails_with(net: &Network, from: &str, to: &str, options: &TrailOptions) -> Result<Vec<Trail>> {
    let (start, goal) = endpoints(net, from, to)?;
    let adj = neighbours(net);
    let mut found: Vec<Vec<usize>> = Vec::new();
    let mut path = vec![start];
    let mut on_path = vec![false; net.len()];
    on_path[start] = true;

    // Depth-first with id-sorted neighbours yields lexicographic order, since
    // no trail is a prefix of another (the goal only appears last).
    fn walk(
        adj: &[Vec<usize>],
        goal: usize,
        cap: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        found: &mut Vec<Vec<usize>>,
    ) -> bool {
        let last = *path.last().expect("path starts non-empty");
        for &next in &adj[last] {
            if on_path[next] {
                continue;
            }
            if next == goal {
                path.push(next);
                found.push(path.clone());
                path.pop();
                if found.len() > cap {
                    return false;
                }
                continue;
            }
            path.push(next);
            on_path[next] = true;
            let ok = walk(adj, goal, cap, path, on_path, found);
            on_path[next] = false;
            path.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    if !walk(&adj, goal, options.max_trails, &mut path, &mut on_path, &mut found) {
        return Err(Error::TooManyTrails {
            from: from.to_string(),
            to: to.to_string(),
            cap: options.max_trails,
        });
    }
    Ok(found.iter().map(|p| Trail::from_indices(net, p)).collect())
}

fn endpoints(net: &Network, from: &str, to: &str) -> Result<(usize, usize)> {
    let a = net.index_of(from).ok_or_else(|| Error::UnknownNode(from.to_string()))?;
    let b = net.index_of(to).ok_or_else(|| Error::UnknownNode(to.to_string()))?;
    if a == b {
        return Err(Error::SameEndpoints(from.to_string()));
    }
    Ok((a, b))
}

/// Evidence mask with the two endpoints cleared.
fn observed_mask(net: &Network, scenario: &Scenario, a: usize, b: usize) -> Result<Vec<bool>> {
    let mut mask: Vec<bool> = scenario.resolve(net)?.iter().map(Option::is_some).collect();
    mask[a] = false;
    mask[b] = false;
    Ok(mask)
}

fn judge(net: &Network, node: usize, link: Link, observed: &[bool]) -> Option<BlockReason> {
    match link {
        Link::Chain if observed[node] => Some(BlockReason::ChainObserved),
        Link::CommonCause if observed[node] => Some(BlockReason::ForkObserved),
        Link::CommonEffect => {
            let opened = observed[node] || net.descendants_of(node).iter().any(|&d| observed[d]);
            (!opened).then_some(BlockReason::ColliderUnobserved)
        }
        _ => None,
    }
}

/// Rebuilds an unjudged trail from its node ids.
pub fn trail_from_nodes(net: &Network, nodes: &[String]) -> Result<Trail> {
    let idx = nodes
        .iter()
        .map(|n| net.index_of(n).ok_or_else(|| Error::UnknownNode(n.clone())))
        .collect::<Result<Vec<_>>>()?;
    let key = || nodes.join("|");
    if idx.len() < 2 {
        return Err(Error::MalformedTrail(key()));
    }
    for (i, w) in idx.windows(2).enumerate() {
        let adjacent = net.is_parent(w[0], w[1]) || net.is_parent(w[1], w[0]);
        if !adjacent || idx[..=i].contains(&w[1]) {
            return Err(Error::MalformedTrail(key()));
        }
    }
    Ok(Trail::from_indices(net, &idx))
}

/// Applies the d-separation rules to every internal node of `trail`.
pub fn trail_status(net: &Network, trail: &Trail, scenario: &Scenario) -> Result<Trail> {
    let mut out = trail_from_nodes(net, &trail.nodes)?;
    let idx: Vec<usize> = out.nodes.iter().filter_map(|n| net.index_of(n)).collect();
    let observed = observed_mask(net, scenario, idx[0], idx[idx.len() - 1])?;
    out.blockers = idx[1..idx.len() - 1]
        .iter()
        .zip(&out.links)
        .filter_map(|(&node, &link)| {
            judge(net, node, link, &observed).map(|reason| Blocker {
                node: net.node(node).id.clone(),
                reason,
            })
        })
        .collect();
    out.status = Some(if out.blockers.is_empty() {
        TrailStatus::Active
    } else {
        TrailStatus::Blocked
    });
    Ok(out)
}

/// Enumerates and judges every trail in one go.
pub fn trails_with_status(
    net: &Network,
    from: &str,
    to: &str,
    scenario: &Scenario,
    options: &TrailOptions,
) -> Result<Vec<Trail>> {
    enumerate_trails_with(net, from, to, options)?
        .iter()
        .map(|t| trail_status(net, t, scenario))
        .collect()
}

/// True iff some trail between `x` and `y` is active under the scenario.
///
/// Searches simple trails depth-first, extending only through internal
/// nodes that do not block, and stops at the first trail that reaches `y`.
/// Unlike [`enumerate_trails`] this has no trail cap.
pub fn d_connected(net: &Network, x: &str, y: &str, scenario: &Scenario) -> Result<bool> {
    let (start, goal) = endpoints(net, x, y)?;
    let observed = observed_mask(net, scenario, start, goal)?;
    let adj = neighbours(net);
    let mut on_path = vec![false; net.len()];
    on_path[start] = true;

    fn search(
        net: &Network,
        adj: &[Vec<usize>],
        observed: &[bool],
        goal: usize,
        at: usize,
        arrived: EdgeDirection,
        on_path: &mut [bool],
    ) -> bool {
        for &next in &adj[at] {
            if on_path[next] {
                continue;
            }
            let leaving = direction(net, at, next);
            if judge(net, at, Link::classify(arrived, leaving), observed).is_some() {
                continue;
            }
            if next == goal {
                return true;
            }
            on_path[next] = true;
            let hit = search(net, adj, observed, goal, next, leaving, on_path);
            on_path[next] = false;
            if hit {
                return true;
            }
        }
        false
    }

    for &next in &adj[start] {
        if next == goal {
            return Ok(true);
        }
        on_path[next] = true;
        let hit = search(
            net,
            &adj,
            &observed,
            goal,
            next,
            direction(net, start, next),
            &mut on_path,
        );
        on_path[next] = false;
        if hit {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailDiffEntry {
    pub trail: String,
    pub nodes: Vec<String>,
    pub actual: TrailStatus,
    pub hypothetical: TrailStatus,
}

impl TrailDiffEntry {
    pub fn flipped(&self) -> bool {
        self.actual != self.hypothetical
    }
}

/// Status of every trail between a finding node and the target under two
/// scenarios.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrailDiff {
    pub finding: String,
    pub target: String,
    pub entries: Vec<TrailDiffEntry>,
    /// Keys of the trails whose status differs, in enumeration order.
    pub flipped: Vec<String>,
}

pub fn trail_diff(
    net: &Network,
    finding: &str,
    target: &str,
    actual: &Scenario,
    hypothetical: &Scenario,
) -> Result<TrailDiff> {
    trail_diff_with(net, finding, target, actual, hypothetical, &TrailOptions::default())
}

pub fn trail_diff_with(
    net: &Network,
    finding: &str,
    target: &str,
    actual: &Scenario,
    hypothetical: &Scenario,
    options: &TrailOptions,
) -> Result<TrailDiff> {
    actual.resolve(net)?;
    hypothetical.resolve(net)?;
    let mut entries = Vec::new();
    for trail in enumerate_trails_with(net, finding, target, options)? {
        let before = trail_status(net, &trail, actual)?;
        let after = trail_status(net, &trail, hypothetical)?;
        entries.push(TrailDiffEntry {
            trail: trail.key(),
            nodes: trail.nodes.clone(),
            actual: before.status.expect("judged"),
            hypothetical: after.status.expect("judged"),
        });
    }
    let flipped = entries
        .iter()
        .filter(|e| e.flipped())
        .map(|e| e.trail.clone())
        .collect();
    Ok(TrailDiff {
        finding: finding.to_string(),
        target: target.to_string(),
        entries,
        flipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_network;

    fn fixture(name: &str) -> Network {
        let text = match name {
            "chain3" => include_str!("../../../fixtures/chain3.json"),
            "collider3" => include_str!("../../../fixtures/collider3.json"),
            "diamond" => include_str!("../../../fixtures/diamond.json"),
            _ => unreachable!(),
        };
        parse_network(text).unwrap()
    }

    fn keys(trails: &[Trail]) -> Vec<String> {
        trails.iter().map(Trail::key).collect()
    }

    #[test]
    fn chain_has_one_trail() {
        let trails = enumerate_trails(&fixture("chain3"), "A", "C").unwrap();
        assert_eq!(keys(&trails), ["A|B|C"]);
        assert_eq!(
            trails[0].edge_directions,
            [EdgeDirection::Forward, EdgeDirection::Forward]
        );
        assert_eq!(trails[0].links, [Link::Chain]);
        assert_eq!(trails[0].status, None);
    }

    #[test]
    fn collider_trail_classified() {
        let trails = enumerate_trails(&fixture("collider3"), "A", "B").unwrap();
        assert_eq!(keys(&trails), ["A|E|B"]);
        assert_eq!(
            trails[0].edge_directions,
            [EdgeDirection::Forward, EdgeDirection::Backward]
        );
        assert_eq!(trails[0].links, [Link::CommonEffect]);
    }

    #[test]
    fn diamond_has_two_trails_in_order() {
        let net = fixture("diamond");
        assert_eq!(keys(&enumerate_trails(&net, "A", "D").unwrap()), ["A|B|D", "A|C|D"]);
        let back = enumerate_trails(&net, "B", "C").unwrap();
        assert_eq!(keys(&back), ["B|A|C", "B|D|C"]);
        assert_eq!(back[0].links, [Link::CommonCause]);
        assert_eq!(back[1].links, [Link::CommonEffect]);
    }

    #[test]
    fn cap_is_enforced() {
        let net = fixture("diamond");
        let tight = TrailOptions { max_trails: 1 };
        assert!(matches!(
            enumerate_trails_with(&net, "A", "D", &tight),
            Err(Error::TooManyTrails { cap: 1, .. })
        ));
        assert_eq!(
            enumerate_trails_with(&net, "A", "D", &TrailOptions { max_trails: 2 })
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn same_endpoint_rejected() {
        assert_eq!(
            enumerate_trails(&fixture("chain3"), "A", "A"),
            Err(Error::SameEndpoints("A".into()))
        );
    }

    #[test]
    fn chain_blocked_by_observation() {
        let net = fixture("chain3");
        let t = &enumerate_trails(&net, "A", "C").unwrap()[0];
        let judged = trail_status(&net, t, &Scenario::actual().with("B", "t")).unwrap();
        assert_eq!(judged.status, Some(TrailStatus::Blocked));
        assert_eq!(
            judged.blockers,
            [Blocker {
                node: "B".into(),
                reason: BlockReason::ChainObserved
            }]
        );
        let open = trail_status(&net, t, &Scenario::actual().with("A", "t")).unwrap();
        assert!(open.is_active());
    }

    #[test]
    fn collider_rules() {
        let net = fixture("collider3");
        let t = &enumerate_trails(&net, "A", "B").unwrap()[0];
        let closed = trail_status(&net, t, &Scenario::actual()).unwrap();
        assert_eq!(closed.status, Some(TrailStatus::Blocked));
        assert_eq!(closed.blockers[0].reason, BlockReason::ColliderUnobserved);
        let open = trail_status(&net, t, &Scenario::actual().with("E", "t")).unwrap();
        assert!(open.is_active());
        assert!(open.blockers.is_empty());
    }

    #[test]
    fn collider_opened_by_descendant() {
        let net = fixture("diamond");
        // B–D–C through collider D is closed; B–A–C fork is open.
        let trails = trails_with_status(&net, "B", "C", &Scenario::actual(), &TrailOptions::default()).unwrap();
        assert!(trails[0].is_active());
        assert!(!trails[1].is_active());
        // Observing A blocks the fork, observing D opens the collider.
        let s = Scenario::actual().with("A", "t").with("D", "f");
        let trails = trails_with_status(&net, "B", "C", &s, &TrailOptions::default()).unwrap();
        assert_eq!(trails[0].blockers[0].reason, BlockReason::ForkObserved);
        assert!(trails[1].is_active());
    }

    #[test]
    fn d_connected_examples() {
        let chain = fixture("chain3");
        assert!(d_connected(&chain, "A", "C", &Scenario::actual()).unwrap());
        assert!(!d_connected(&chain, "A", "C", &Scenario::actual().with("B", "f")).unwrap());
        let collider = fixture("collider3");
        assert!(d_connected(&collider, "A", "B", &Scenario::actual().with("E", "t")).unwrap());
        assert!(!d_connected(&collider, "A", "B", &Scenario::actual()).unwrap());
    }

    #[test]
    fn trail_diff_examples() {
        let chain = fixture("chain3");
        let actual = Scenario::actual().with("A", "t");
        let hyp = actual.clone().with("B", "t");
        let diff = trail_diff(&chain, "A", "C", &actual, &hyp).unwrap();
        assert_eq!(diff.flipped, ["A|B|C"]);
        assert_eq!(diff.entries[0].actual, TrailStatus::Active);
        assert_eq!(diff.entries[0].hypothetical, TrailStatus::Blocked);

        let collider = fixture("collider3");
        let diff = trail_diff(
            &collider,
            "A",
            "B",
            &Scenario::actual().with("E", "t"),
            &Scenario::hypothetical(),
        )
        .unwrap();
        assert_eq!(diff.flipped, ["A|E|B"]);
        assert_eq!(diff.entries[0].actual, TrailStatus::Active);

        let same = trail_diff(&chain, "A", "C", &actual, &actual).unwrap();
        assert!(same.flipped.is_empty());
        assert_eq!(same.entries.len(), 1);
    }

    #[test]
    fn malformed_trail_rejected() {
        let net = fixture("chain3");
        let bogus = Trail {
            nodes: vec!["A".into(), "C".into()],
            edge_directions: vec![EdgeDirection::Forward],
            links: vec![],
            status: None,
            blockers: vec![],
        };
        assert!(matches!(
            trail_status(&net, &bogus, &Scenario::actual()),
            Err(Error::MalformedTrail(_))
        ));
    }
}
