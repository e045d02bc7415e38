//! Template-driven verbal explanations.
//!
//! Wording lives in a template file (`templates/en.txt` ships as the
//! default); code only decides which template to use and fills its slots.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::Analysis;
use crate::contribution::{Band, Contribution, Direction, WhatIfResult};
use crate::network::Network;
use crate::scenario::TargetQuery;
use crate::trails::{trail_from_nodes, BlockReason, Trail, TrailStatus};

pub const DEFAULT_TEMPLATES: &str = include_str!("../templates/en.txt");

/// Every template name with the slots it may use.
const INVENTORY: &[(&str, &[&str])] = &[
    ("target_sentence", &["target", "phrase", "pct"]),
    (
        "finding_sentence",
        &["finding", "adverb", "verb", "target", "before_phrase", "after_phrase"],
    ),
    ("paths_header", &["target", "count", "noun"]),
    ("path_active", &["seq"]),
    ("path_blocked", &["seq", "reason"]),
    ("reason_chain", &["node"]),
    ("reason_fork", &["node"]),
    ("reason_collider", &["node"]),
    (
        "whatif_sentence",
        &["findings", "target", "after_pct", "after_phrase", "before_pct"],
    ),
    ("whatif_trail", &["seq", "status"]),
    ("findings_none", &[]),
    ("adverb_strong", &[]),
    ("adverb_moderate", &[]),
    ("adverb_weak", &[]),
    ("adverb_negligible", &[]),
    ("verb_increase", &[]),
    ("verb_decrease", &[]),
    ("verb_negligible", &[]),
    ("noun_one", &[]),
    ("noun_many", &[]),
    ("status_active", &[]),
    ("status_blocked", &[]),
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TemplateError {
    #[error("line {line}: expected `name = text`")]
    Malformed { line: usize },
    #[error("line {line}: unknown template {name}")]
    UnknownTemplate { line: usize, name: String },
    #[error("line {line}: template {name} defined twice")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: template {name} uses unknown slot {{{slot}}}")]
    UnknownSlot { line: usize, name: String, slot: String },
    #[error("line {line}: unbalanced brace in template {name}")]
    Unbalanced { line: usize, name: String },
    #[error("missing template {0}")]
    Missing(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScaleError {
    #[error("scale has no buckets")]
    Empty,
    #[error("bucket bounds must be strictly increasing and within [0,1]")]
    Bounds,
    #[error("last bucket bound must be 1")]
    LastBound,
    #[error("bucket phrases must be non-empty and unique")]
    Phrases,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Templates {
    entries: BTreeMap<String, Vec<Segment>>,
}

impl Templates {
    pub fn parse(text: &str) -> Result<Self, TemplateError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (name, body) = trimmed.split_once('=').ok_or(TemplateError::Malformed { line })?;
            let name = name.trim();
            let allowed = INVENTORY
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, slots)| *slots)
                .ok_or_else(|| TemplateError::UnknownTemplate {
                    line,
                    name: name.to_string(),
                })?;
            let segments = split_segments(body.trim(), line, name, allowed)?;
            if entries.insert(name.to_string(), segments).is_some() {
                return Err(TemplateError::Duplicate {
                    line,
                    name: name.to_string(),
                });
            }
        }
        for (name, _) in INVENTORY {
            if !entries.contains_key(*name) {
                return Err(TemplateError::Missing(name.to_string()));
            }
        }
        Ok(Templates { entries })
    }

    /// Fills a template. Slots without a value render empty.
    pub fn render(&self, name: &str, slots: &[(&str, &str)]) -> String {
        let segments = self
            .entries
            .get(name)
            .unwrap_or_else(|| panic!("template {name} not loaded"));
        let mut out = String::new();
        for seg in segments {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Slot(s) => {
                    if let Some((_, v)) = slots.iter().find(|(k, _)| k == s) {
                        out.push_str(v);
                    }
                }
            }
        }
        out
    }

    pub fn word(&self, name: &str) -> String {
        self.render(name, &[])
    }
}

fn split_segments(body: &str, line: usize, name: &str, allowed: &[&str]) -> Result<Vec<Segment>, TemplateError> {
    let unbalanced = || TemplateError::Unbalanced {
        line,
        name: name.to_string(),
    };
    let mut segments = Vec::new();
    let mut rest = body;
    while let Some(open) = rest.find(['{', '}']) {
        if rest.as_bytes()[open] == b'}' {
            return Err(unbalanced());
        }
        let close = rest[open..].find('}').ok_or_else(unbalanced)? + open;
        let slot = &rest[open + 1..close];
        if slot.contains('{') {
            return Err(unbalanced());
        }
        if !allowed.contains(&slot) {
            return Err(TemplateError::UnknownSlot {
                line,
                name: name.to_string(),
                slot: slot.to_string(),
            });
        }
        if open > 0 {
            segments.push(Segment::Text(rest[..open].to_string()));
        }
        segments.push(Segment::Slot(slot.to_string()));
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        segments.push(Segment::Text(rest.to_string()));
    }
    Ok(segments)
}

/// Qualitative probability buckets: each entry is an inclusive upper bound
/// and its phrase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, String)>", into = "Vec<(f64, String)>")]
pub struct VerbalScale {
    buckets: Vec<(f64, String)>,
}

impl TryFrom<Vec<(f64, String)>> for VerbalScale {
    type Error = ScaleError;

    fn try_from(buckets: Vec<(f64, String)>) -> Result<Self, ScaleError> {
        VerbalScale::new(buckets)
    }
}

impl From<VerbalScale> for Vec<(f64, String)> {
    fn from(s: VerbalScale) -> Self {
        s.buckets
    }
}

impl VerbalScale {
    pub fn new(buckets: Vec<(f64, String)>) -> Result<Self, ScaleError> {
        let last = buckets.last().ok_or(ScaleError::Empty)?;
        if last.0 != 1.0 {
            return Err(ScaleError::LastBound);
        }
        if buckets[0].0 < 0.0 || buckets.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(ScaleError::Bounds);
        }
        for (i, (_, phrase)) in buckets.iter().enumerate() {
            if phrase.is_empty() || buckets[..i].iter().any(|(_, p)| p == phrase) {
                return Err(ScaleError::Phrases);
            }
        }
        Ok(VerbalScale { buckets })
    }

    pub fn buckets(&self) -> &[(f64, String)] {
        &self.buckets
    }

    /// Bucket index for `p`; values outside [0,1] clamp to the end buckets.
    pub fn bucket(&self, p: f64) -> usize {
        self.buckets
            .iter()
            .position(|(upper, _)| p <= *upper)
            .unwrap_or(self.buckets.len() - 1)
    }
}

impl Default for VerbalScale {
    fn default() -> Self {
        let buckets = [
            (0.05, "almost certainly not"),
            (0.20, "very probably not"),
            (0.45, "probably not"),
            (0.55, "about as likely as not"),
            (0.80, "probably"),
            (0.95, "very probably"),
            (1.0, "almost certainly"),
        ];
        VerbalScale {
            buckets: buckets.iter().map(|(b, p)| (*b, p.to_string())).collect(),
        }
    }
}

/// Phrase of the first bucket whose upper bound is at least `p`.
pub fn verbalize_probability(p: f64, scale: &VerbalScale) -> &str {
    &scale.buckets[scale.bucket(p)].1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerbalExplanation {
    pub target_sentence: String,
    /// One per finding, in contribution order.
    pub finding_sentences: Vec<String>,
    /// One per finding, aligned with `finding_sentences`.
    pub path_paragraphs: Vec<String>,
    pub whatif_sentences: Vec<String>,
}

impl VerbalExplanation {
    /// Plain-text rendering, one sentence or paragraph per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.target_sentence);
        out.push('\n');
        for (finding, paths) in self.finding_sentences.iter().zip(&self.path_paragraphs) {
            out.push_str(finding);
            out.push('\n');
            out.push_str(paths);
            out.push('\n');
        }
        for w in &self.whatif_sentences {
            out.push_str(w);
            out.push('\n');
        }
        out
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn pct(p: f64) -> String {
    format!("{:.1}", p * 100.0)
}

/// Renders explanations with a given scale and template set.
#[derive(Debug, Clone, PartialEq)]
pub struct Verbalizer {
    pub scale: VerbalScale,
    pub templates: Templates,
}

impl Default for Verbalizer {
    fn default() -> Self {
        Verbalizer {
            scale: VerbalScale::default(),
            templates: Templates::parse(DEFAULT_TEMPLATES).expect("shipped templates are valid"),
        }
    }
}

impl Verbalizer {
    pub fn new(scale: VerbalScale, templates: Templates) -> Self {
        Verbalizer { scale, templates }
    }

    pub fn phrase(&self, p: f64) -> &str {
        verbalize_probability(p, &self.scale)
    }

    fn assignment(net: &Network, node: &str, state: &str) -> String {
        let label = net.node_by_id(node).map_or(node, |n| n.display_label());
        format!("{label} = {state}")
    }

    fn node_label<'a>(net: &'a Network, node: &'a str) -> &'a str {
        net.node_by_id(node).map_or(node, |n| n.display_label())
    }

    /// Node labels joined by the arrows of the trail's edges.
    pub fn sequence(&self, net: &Network, trail: &Trail) -> String {
        let mut out = Self::node_label(net, &trail.nodes[0]).to_string();
        for (node, dir) in trail.nodes[1..].iter().zip(&trail.edge_directions) {
            out.push(' ');
            out.push_str(dir.arrow());
            out.push(' ');
            out.push_str(Self::node_label(net, node));
        }
        out
    }

    pub fn target_sentence(&self, net: &Network, target: &TargetQuery, p: f64) -> String {
        self.templates.render(
            "target_sentence",
            &[
                ("target", &Self::assignment(net, &target.node, &target.state)),
                ("phrase", self.phrase(p)),
                ("pct", &pct(p)),
            ],
        )
    }

    pub fn verbalize_contribution(&self, net: &Network, c: &Contribution, target: &TargetQuery) -> String {
        let (adverb, verb) = match c.direction {
            Direction::Negligible => ("adverb_negligible", "verb_negligible"),
            dir => {
                let adverb = match c.magnitude_band {
                    Band::Strong => "adverb_strong",
                    Band::Moderate => "adverb_moderate",
                    Band::Weak => "adverb_weak",
                    Band::Negligible => "adverb_negligible",
                };
                let verb = if dir == Direction::Increase {
                    "verb_increase"
                } else {
                    "verb_decrease"
                };
                (adverb, verb)
            }
        };
        self.templates.render(
            "finding_sentence",
            &[
                ("finding", &Self::assignment(net, &c.finding.node, &c.finding.state)),
                ("adverb", &self.templates.word(adverb)),
                ("verb", &self.templates.word(verb)),
                ("target", &Self::assignment(net, &target.node, &target.state)),
                ("before_phrase", self.phrase(c.p_without)),
                ("after_phrase", self.phrase(c.p_with)),
            ],
        )
    }

    fn reason(&self, net: &Network, trail: &Trail) -> String {
        trail
            .blockers
            .iter()
            .map(|b| {
                let name = match b.reason {
                    BlockReason::ChainObserved => "reason_chain",
                    BlockReason::ForkObserved => "reason_fork",
                    BlockReason::ColliderUnobserved => "reason_collider",
                };
                self.templates.render(name, &[("node", Self::node_label(net, &b.node))])
            })
            .collect::<Vec<_>>()
            .join(" and ")
    }

    /// Paragraph describing how the finding reaches the target: the number
    /// of active trails, then one clause per trail in enumeration order.
    pub fn verbalize_paths(&self, net: &Network, target: &TargetQuery, trails: &[Trail]) -> String {
        let active = trails.iter().filter(|t| t.is_active()).count();
        let noun = if active == 1 { "noun_one" } else { "noun_many" };
        let mut out = self.templates.render(
            "paths_header",
            &[
                ("target", &Self::assignment(net, &target.node, &target.state)),
                ("count", &active.to_string()),
                ("noun", &self.templates.word(noun)),
            ],
        );
        if trails.is_empty() {
            out.push('.');
            return out;
        }
        for (i, trail) in trails.iter().enumerate() {
            let seq = self.sequence(net, trail);
            let clause = if trail.is_active() {
                self.templates.render("path_active", &[("seq", &seq)])
            } else {
                self.templates
                    .render("path_blocked", &[("seq", &seq), ("reason", &self.reason(net, trail))])
            };
            if i == 0 {
                out.push_str(if trail.is_active() { ": " } else { "; " });
                out.push_str(&clause);
            } else {
                out.push(' ');
                out.push_str(&capitalize(&clause));
            }
        }
        out
    }

    pub fn verbalize_whatif(&self, net: &Network, target: &TargetQuery, w: &WhatIfResult) -> String {
        let findings: Vec<String> = w
            .hypothetical
            .iter()
            .map(|(n, s)| Self::assignment(net, n, s))
            .collect();
        let findings = match findings.len() {
            0 => self.templates.word("findings_none"),
            1 => findings[0].clone(),
            n => format!("{} and {}", findings[..n - 1].join(", "), findings[n - 1]),
        };
        let mut out = self.templates.render(
            "whatif_sentence",
            &[
                ("findings", &findings),
                ("target", &Self::assignment(net, &target.node, &target.state)),
                ("after_pct", &pct(w.hyp_p)),
                ("after_phrase", self.phrase(w.hyp_p)),
                ("before_pct", &pct(w.base_p)),
            ],
        );
        for entry in w.trail_changes.iter().flat_map(|d| &d.entries).filter(|e| e.flipped()) {
            let seq = match trail_from_nodes(net, &entry.nodes) {
                Ok(t) => self.sequence(net, &t),
                Err(_) => entry.nodes.join(" - "),
            };
            let status = match entry.hypothetical {
                TrailStatus::Active => "status_active",
                TrailStatus::Blocked => "status_blocked",
            };
            out.push(' ');
            out.push_str(&self.templates.render(
                "whatif_trail",
                &[("seq", &seq), ("status", &self.templates.word(status))],
            ));
        }
        out
    }

    /// Target sentence, then a sentence and a path paragraph per finding in
    /// contribution order, then one entry per what-if.
    pub fn assemble(&self, net: &Network, analysis: &Analysis, whatifs: &[WhatIfResult]) -> VerbalExplanation {
        let target = &analysis.target;
        VerbalExplanation {
            target_sentence: self.target_sentence(net, target, analysis.target_probability),
            finding_sentences: analysis
                .contributions
                .iter()
                .map(|c| self.verbalize_contribution(net, c, target))
                .collect(),
            path_paragraphs: analysis
                .contributions
                .iter()
                .map(|c| self.verbalize_paths(net, target, analysis.trails_for(&c.finding.node)))
                .collect(),
            whatif_sentences: whatifs.iter().map(|w| self.verbalize_whatif(net, target, w)).collect(),
        }
    }
}

/// [`Verbalizer::assemble`] with the default scale and templates.
pub fn assemble_verbal(net: &Network, analysis: &Analysis, whatifs: &[WhatIfResult]) -> VerbalExplanation {
    Verbalizer::default().assemble(net, analysis, whatifs)
}
