//! Exact posteriors.
//!
//! [`posterior`] runs variable elimination; [`enumerate_joint`] sums the full
//! joint table directly and serves as a reference for checking it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::network::Network;
use crate::scenario::{Evidence, Scenario};

/// Largest joint table [`enumerate_joint`] will walk.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub node: String,
    /// One probability per state, in state order.
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn prob(&self, state: usize) -> f64 {
        self.probs[state]
    }

    /// Probability of a state given by label.
    pub fn prob_of(&self, net: &Network, state: &str) -> Result<f64> {
        let node = net
            .node_by_id(&self.node)
            .ok_or_else(|| Error::UnknownNode(self.node.clone()))?;
        let s = node.state_index(state).ok_or_else(|| Error::UnknownState {
            node: self.node.clone(),
            state: state.to_string(),
        })?;
        Ok(self.probs[s])
    }
}

/// The CPT of `idx` as a factor over `parents ++ [idx]`.
pub fn cpt_factor(net: &Network, idx: usize) -> Factor {
    let mut scope = net.parents_of(idx).to_vec();
    scope.push(idx);
    let cards = scope.iter().map(|&v| net.cardinality(v)).collect();
    let values = net.node(idx).cpt.rows.iter().flatten().copied().collect();
    Factor::new(scope, cards, values).expect("validated CPT forms a factor")
}

/// Posterior over `node` given the scenario's findings, by variable
/// elimination with a min-degree order (ties to the earliest declared node).
pub fn posterior(net: &Network, scenario: &Scenario, node: &str) -> Result<Distribution> {
    let evidence = scenario.resolve(net)?;
    let query = net.index_of(node).ok_or_else(|| Error::UnknownNode(node.to_string()))?;
    let probs = eliminate(net, &evidence, query)?;
    Ok(Distribution {
        node: node.to_string(),
        probs,
    })
}

pub(crate) fn eliminate(net: &Network, evidence: &Evidence, query: usize) -> Result<Vec<f64>> {
    let mut factors: Vec<Factor> = (0..net.len())
        .map(|i| {
            let mut f = cpt_factor(net, i);
            for v in f.scope().to_vec() {
                if v == query {
                    continue;
                }
                if let Some(s) = evidence[v] {
                    f = f.restrict(v, s).expect("evidence variable in scope");
                }
            }
            f
        })
        .collect();

    let mut remaining: BTreeSet<usize> = (0..net.len())
        .filter(|&v| v != query && evidence[v].is_none())
        .collect();

    while !remaining.is_empty() {
        let var = *remaining
            .iter()
            .min_by_key(|&&v| (degree(&factors, v), v))
            .expect("non-empty");
        remaining.remove(&var);

        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.contains(var));
        factors = rest;
        if let Some(product) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(product.marginalize(var).expect("eliminated variable in scope"));
        }
    }

    let card = net.cardinality(query);
    let joint = factors
        .iter()
        .fold(Factor::ones(vec![query], vec![card]), |acc, f| acc.product(f));
    debug_assert_eq!(joint.scope(), &[query]);
    normalize(joint.values(), evidence[query])
}

fn degree(factors: &[Factor], var: usize) -> usize {
    factors
        .iter()
        .filter(|f| f.contains(var))
        .flat_map(|f| f.scope().iter().copied())
        .filter(|&u| u != var)
        .collect::<BTreeSet<_>>()
        .len()
}

fn normalize(unnormalized: &[f64], observed: Option<usize>) -> Result<Vec<f64>> {
    match observed {
        Some(s) => {
            if unnormalized[s] <= 0.0 {
                return Err(Error::ImpossibleEvidence);
            }
            let mut probs = vec![0.0; unnormalized.len()];
            probs[s] = 1.0;
            Ok(probs)
        }
        None => {
            let z: f64 = unnormalized.iter().sum();
            if z <= 0.0 || !z.is_finite() {
                return Err(Error::ImpossibleEvidence);
            }
            Ok(unnormalized.iter().map(|v| v / z).collect())
        }
    }
}

/// Posterior over `node` by brute-force summation over every joint
/// assignment of the network. Refuses tables larger than
/// [`ENUMERATION_LIMIT`].
pub fn enumerate_joint(net: &Network, scenario: &Scenario, node: &str) -> Result<Distribution> {
    let evidence = scenario.resolve(net)?;
    let query = net.index_of(node).ok_or_else(|| Error::UnknownNode(node.to_string()))?;

    let cards: Vec<usize> = (0..net.len()).map(|i| net.cardinality(i)).collect();
    let assignments = cards.iter().try_fold(1u128, |acc, &c| acc.checked_mul(c as u128));
    match assignments {
        Some(a) if a <= ENUMERATION_LIMIT => {}
        other => {
            return Err(Error::TooLarge {
                assignments: other.unwrap_or(u128::MAX),
                limit: ENUMERATION_LIMIT,
            })
        }
    }

    let mut sums = vec![0.0; cards[query]];
    let mut assignment = vec![0usize; net.len()];
    loop {
        let consistent = evidence.iter().zip(&assignment).all(|(e, a)| e.is_none_or(|s| s == *a));
        if consistent {
            let mut p = 1.0;
            for (i, &state) in assignment.iter().enumerate() {
                p *= net.node(i).cpt.rows[net.cpt_row_index(i, &assignment)][state];
            }
            sums[assignment[query]] += p;
        }

        // next assignment, last node fastest
        let mut pos = net.len();
        loop {
            if pos == 0 {
                let z: f64 = sums.iter().sum();
                if z <= 0.0 {
                    return Err(Error::ImpossibleEvidence);
                }
                return Ok(Distribution {
                    node: node.to_string(),
                    probs: sums.iter().map(|s| s / z).collect(),
                });
            }
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < cards[pos] {
                break;
            }
            assignment[pos] = 0;
        }
    }
}
