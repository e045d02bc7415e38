//! One-shot analysis of a (network, target, scenario) triple: the inputs
//! both the verbal and the visual renderers work from.

use serde::{Deserialize, Serialize};

use crate::contribution::{all_contributions, Bands, Contribution};
use crate::error::Result;
use crate::inference::{posterior, Distribution};
use crate::network::Network;
use crate::scenario::{Scenario, TargetQuery};
use crate::trails::{trails_with_status, Trail, TrailOptions};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Settings {
    pub bands: Bands,
    pub trails: TrailOptions,
}

/// Judged trails from one finding node to the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindingTrails {
    pub finding: String,
    pub trails: Vec<Trail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub network_id: String,
    pub target: TargetQuery,
    pub scenario: Scenario,
    pub target_probability: f64,
    pub target_distribution: Distribution,
    /// Largest `|delta|` first.
    pub contributions: Vec<Contribution>,
    /// Same order as `contributions`.
    pub trails: Vec<FindingTrails>,
}

impl Analysis {
    pub fn trails_for(&self, finding: &str) -> &[Trail] {
        self.trails
            .iter()
            .find(|f| f.finding == finding)
            .map(|f| f.trails.as_slice())
            .unwrap_or(&[])
    }

    pub fn contribution_for(&self, finding: &str) -> Option<&Contribution> {
        self.contributions.iter().find(|c| c.finding.node == finding)
    }
}

pub fn analyze(net: &Network, target: &TargetQuery, scenario: &Scenario, settings: &Settings) -> Result<Analysis> {
    let (_, state) = target.resolve(net)?;
    scenario.validate_for(net, Some(target))?;
    let target_distribution = posterior(net, scenario, &target.node)?;
    let contributions = all_contributions(net, target, scenario, &settings.bands)?;
    let trails = contributions
        .iter()
        .map(|c| {
            Ok(FindingTrails {
                finding: c.finding.node.clone(),
                trails: trails_with_status(net, &c.finding.node, &target.node, scenario, &settings.trails)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Analysis {
        network_id: net.id().to_string(),
        target: target.clone(),
        scenario: scenario.clone(),
        target_probability: target_distribution.prob(state),
        target_distribution,
        contributions,
        trails,
    })
}
