//! Exact inference and explanation engine for discrete Bayesian networks.
//!
//! For a target state and a set of findings the engine computes each
//! finding's contribution to the target probability, the trails that carry
//! it, what-if comparisons against hypothetical findings, and renders the
//! result as templated text ([`verbal`]) and as structured markup
//! ([`markup`]).

pub mod analysis;
pub mod contribution;
mod error;
pub mod factor;
pub mod inference;
pub mod markup;
pub mod network;
pub mod scenario;
pub mod trails;
pub mod verbal;

pub use analysis::{analyze, Analysis, FindingTrails, Settings};
pub use contribution::{
    all_contributions, common_effect_analysis, finding_contribution, target_probability, what_if, Band, Bands,
    CommonEffectAnalysis, CommonEffectCase, Contribution, Direction, Finding, WhatIfResult,
};
pub use error::{Error, Result};
pub use factor::{Factor, FactorError};
pub use inference::{enumerate_joint, posterior, Distribution};
pub use markup::{build_markup, diff_markup, MarkupChange, Role, VisualMarkup};
pub use network::{parse_network, topological_order, validate, Cpt, Network, NetworkDoc, NetworkError, Node};
pub use scenario::{Evidence, Scenario, ScenarioKind, TargetQuery};
pub use trails::{
    d_connected, enumerate_trails, trail_diff, trail_status, BlockReason, Blocker, EdgeDirection, Link, Trail,
    TrailDiff, TrailOptions, TrailStatus,
};
pub use verbal::{assemble_verbal, verbalize_probability, VerbalExplanation, VerbalScale, Verbalizer};
