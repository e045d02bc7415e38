//! Test support: fixtures, random networks and reference algorithms that
//! share no code with the engine paths they check.

use std::path::PathBuf;

use bnx_core::{parse_network, Cpt, Network, NetworkDoc, Node, Scenario, ScenarioKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as TestRng;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_text(name: &str) -> String {
    let path = fixtures_dir().join(format!("{name}.json"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

pub fn fixture(name: &str) -> Network {
    parse_network(&fixture_text(name)).expect("fixture is valid")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of randomly generated networks.
#[derive(Debug, Clone, Copy)]
pub struct RandomSpec {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub edge_prob: f64,
    pub max_parents: usize,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            min_nodes: 2,
            max_nodes: 12,
            edge_prob: 0.3,
            max_parents: 4,
        }
    }
}

/// A random DAG of binary nodes. Nodes are declared in a shuffled order so
/// declaration order and topological order differ; CPT entries are drawn
/// from [0.05, 0.95] so no evidence is ever impossible.
pub fn random_network(rng: &mut impl Rng, spec: &RandomSpec) -> Network {
    let n = rng.random_range(spec.min_nodes..=spec.max_nodes);
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (child, ps) in parents.iter_mut().enumerate().skip(1) {
        for parent in 0..child {
            if ps.len() < spec.max_parents && rng.random_bool(spec.edge_prob) {
                ps.push(parent);
            }
        }
    }
    let mut declared: Vec<usize> = (0..n).collect();
    declared.shuffle(rng);

    let nodes = declared
        .iter()
        .map(|&v| {
            let rows = (0..1usize << parents[v].len())
                .map(|_| {
                    let p: f64 = rng.random_range(0.05..0.95);
                    vec![p, 1.0 - p]
                })
                .collect();
            Node {
                id: format!("N{v:02}"),
                label: String::new(),
                states: vec!["t".into(), "f".into()],
                parents: parents[v].iter().map(|p| format!("N{p:02}")).collect(),
                cpt: Cpt { rows },
            }
        })
        .collect();
    Network::from_doc(NetworkDoc {
        id: "random".into(),
        nodes,
    })
    .expect("generated network is valid")
}

/// Observes each node with probability `p_observe`, skipping `exclude`.
pub fn random_scenario(rng: &mut impl Rng, net: &Network, p_observe: f64, exclude: &[&str]) -> Scenario {
    let mut s = Scenario {
        findings: Default::default(),
        kind: ScenarioKind::Actual,
    };
    for node in net.nodes() {
        if exclude.contains(&node.id.as_str()) || !rng.random_bool(p_observe) {
            continue;
        }
        let state = node.states[rng.random_range(0..node.states.len())].clone();
        s.findings.insert(node.id.clone(), state);
    }
    s
}

/// Two distinct node ids.
pub fn random_pair(rng: &mut impl Rng, net: &Network) -> (String, String) {
    let n = net.len();
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (net.node(a).id.clone(), net.node(b).id.clone())
}

/// d-connection by reachability over (node, direction-of-arrival) pairs,
/// the "Bayes ball" traversal. Findings on `x` and `y` are ignored.
pub fn bayes_ball_connected(net: &Network, x: &str, y: &str, scenario: &Scenario) -> bool {
    let n = net.len();
    let xi = net.index_of(x).expect("x exists");
    let yi = net.index_of(y).expect("y exists");
    let mut observed = vec![false; n];
    for node in scenario.findings.keys() {
        observed[net.index_of(node).expect("finding exists")] = true;
    }
    observed[xi] = false;
    observed[yi] = false;

    // Ancestors of the observed set, observed nodes included.
    let mut anc = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| observed[v]).collect();
    while let Some(v) = stack.pop() {
        if anc[v] {
            continue;
        }
        anc[v] = true;
        stack.extend(net.parents_of(v).iter().copied());
    }

    const FROM_CHILD: usize = 0;
    const FROM_PARENT: usize = 1;
    let mut visited = vec![[false; 2]; n];
    let mut queue = vec![(xi, FROM_CHILD)];
    while let Some((v, dir)) = queue.pop() {
        if visited[v][dir] {
            continue;
        }
        visited[v][dir] = true;
        if v == yi {
            return true;
        }
        if dir == FROM_CHILD && !observed[v] {
            queue.extend(net.parents_of(v).iter().map(|&p| (p, FROM_CHILD)));
            queue.extend(net.children_of(v).iter().map(|&c| (c, FROM_PARENT)));
        } else if dir == FROM_PARENT {
            if !observed[v] {
                queue.extend(net.children_of(v).iter().map(|&c| (c, FROM_PARENT)));
            }
            if anc[v] {
                queue.extend(net.parents_of(v).iter().map(|&p| (p, FROM_CHILD)));
            }
        }
    }
    false
}

/// Number of simple undirected paths between two nodes, counted with an
/// explicit stack of (node, visited-bitmask) states.
pub fn count_simple_paths(net: &Network, from: &str, to: &str) -> usize {
    let n = net.len();
    assert!(n <= 64, "bitmask counter supports at most 64 nodes");
    let adj: Vec<u64> = (0..n)
        .map(|v| {
            net.parents_of(v)
                .iter()
                .chain(net.children_of(v))
                .fold(0u64, |m, &u| m | (1 << u))
        })
        .collect();
    let start = net.index_of(from).expect("from exists");
    let goal = net.index_of(to).expect("to exists");
    let mut count = 0;
    let mut stack = vec![(start, 1u64 << start)];
    while let Some((v, seen)) = stack.pop() {
        let mut next = adj[v] & !seen;
        while next != 0 {
            let u = next.trailing_zeros() as usize;
            next &= next - 1;
            if u == goal {
                count += 1;
            } else {
                stack.push((u, seen | (1 << u)));
            }
        }
    }
    count
}
