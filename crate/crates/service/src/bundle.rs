//! Explanation bundles and what-if reports, computed from one snapshot of
//! (network, target, findings).

use std::fmt;
use std::str::FromStr;

use bnx_core::{
    analyze, build_markup, diff_markup, what_if, Contribution, Distribution, FindingTrails, MarkupChange, Network,
    Result, Scenario, Settings, TargetQuery, VerbalExplanation, Verbalizer, VisualMarkup, WhatIfResult,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Verbal,
    Visual,
    #[default]
    Combined,
}

impl Mode {
    pub fn wants_verbal(self) -> bool {
        self != Mode::Visual
    }

    pub fn wants_markup(self) -> bool {
        self != Mode::Verbal
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Verbal => "verbal",
            Mode::Visual => "visual",
            Mode::Combined => "combined",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown mode {0:?}, expected verbal, visual or combined")]
pub struct UnknownMode(pub String);

impl FromStr for Mode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "verbal" => Ok(Mode::Verbal),
            "visual" => Ok(Mode::Visual),
            "combined" => Ok(Mode::Combined),
            other => Err(UnknownMode(other.to_string())),
        }
    }
}

/// A what-if result with the markup changes it implies and its sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfReport {
    pub result: WhatIfResult,
    pub markup_diff: Vec<MarkupChange>,
    pub verbal: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationBundle {
    pub mode: Mode,
    pub network_id: String,
    pub target: TargetQuery,
    pub scenario: Scenario,
    pub target_probability: f64,
    pub target_distribution: Distribution,
    pub contributions: Vec<Contribution>,
    pub trails: Vec<FindingTrails>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbal: Option<VerbalExplanation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markup: Option<VisualMarkup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub whatif: Option<WhatIfReport>,
}

/// Builds the bundle for `mode`. With `hypothetical`, the what-if report is
/// attached and its sentence appended to the verbal part.
pub fn explain(
    net: &Network,
    target: &TargetQuery,
    scenario: &Scenario,
    mode: Mode,
    hypothetical: Option<&Scenario>,
    settings: &Settings,
) -> Result<ExplanationBundle> {
    let analysis = analyze(net, target, scenario, settings)?;
    let report = hypothetical
        .map(|h| whatif(net, target, scenario, h, settings))
        .transpose()?;
    let whatifs: Vec<WhatIfResult> = report.iter().map(|r| r.result.clone()).collect();
    let verbal = mode
        .wants_verbal()
        .then(|| Verbalizer::default().assemble(net, &analysis, &whatifs));
    let markup = mode.wants_markup().then(|| build_markup(net, &analysis));
    Ok(ExplanationBundle {
        mode,
        network_id: analysis.network_id,
        target: analysis.target,
        scenario: analysis.scenario,
        target_probability: analysis.target_probability,
        target_distribution: analysis.target_distribution,
        contributions: analysis.contributions,
        trails: analysis.trails,
        verbal,
        markup,
        whatif: report,
    })
}

pub fn whatif(
    net: &Network,
    target: &TargetQuery,
    actual: &Scenario,
    hypothetical: &Scenario,
    settings: &Settings,
) -> Result<WhatIfReport> {
    let result = what_if(net, target, actual, hypothetical, &settings.trails)?;
    let before = build_markup(net, &analyze(net, target, actual, settings)?);
    let after = build_markup(net, &analyze(net, target, hypothetical, settings)?);
    let markup_diff = diff_markup(&before, &after)?;
    let verbal = Verbalizer::default().verbalize_whatif(net, target, &result);
    Ok(WhatIfReport {
        result,
        markup_diff,
        verbal,
    })
}
