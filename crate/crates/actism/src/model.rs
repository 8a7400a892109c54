//! The system-under-assessment model: assets, data flows, trust boundaries,
//! STRIDE-categorised threats, attacker personas and attack trees, all held
//! in a versioned, immutable container with referential-integrity checks.

use crate::cvss::{MetricSet, Severity};
use crate::impact::{ImpactVector, ImpactWeights};
use crate::risk::RiskMatrix;
use crate::tree::{validate_tree, AttackTree, Node};
use crate::update::DisclosureEvent;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssetKind {
    Module,
    Datastore,
    ExternalEntity,
}

/// A system component or data store under assessment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Asset {
    pub id: String,
    pub name: String,
    pub kind: AssetKind,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    InternalBus,
    Usb,
    Bluetooth,
    Wifi,
    GpsRf,
    Cellular,
    Physical,
}

impl Channel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Channel::InternalBus => "internal-bus",
            Channel::Usb => "usb",
            Channel::Bluetooth => "bluetooth",
            Channel::Wifi => "wifi",
            Channel::GpsRf => "gps-rf",
            Channel::Cellular => "cellular",
            Channel::Physical => "physical",
        }
    }
}

/// A directed data flow between two assets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFlow {
    pub id: String,
    pub source: String,
    pub target: String,
    pub channel: Channel,
    pub crosses_trust_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrustBoundary {
    pub id: String,
    pub name: String,
    pub members: Vec<String>,
}

/// The six STRIDE threat categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrideCategory {
    Spoofing,
    Tampering,
    Repudiation,
    InformationDisclosure,
    DenialOfService,
    ElevationOfPrivilege,
}

impl StrideCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            StrideCategory::Spoofing => "Spoofing",
            StrideCategory::Tampering => "Tampering",
            StrideCategory::Repudiation => "Repudiation",
            StrideCategory::InformationDisclosure => "InformationDisclosure",
            StrideCategory::DenialOfService => "DenialOfService",
            StrideCategory::ElevationOfPrivilege => "ElevationOfPrivilege",
        }
    }
}

impl fmt::Display for StrideCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A threat against an asset. Ids are positive integers to mirror
/// tool-generated catalogues; `metrics` holds the CVSS v3.1 vector and
/// `impact` the four HEAVENS objective levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Threat {
    pub id: u32,
    pub details: String,
    pub category: StrideCategory,
    pub source: String,
    #[serde(default)]
    pub attack_method: String,
    #[serde(rename = "cvss")]
    pub metrics: MetricSet,
    pub impact: ImpactVector,
    #[serde(default)]
    pub physical: bool,
    /// Feasibility as recorded in the source material, if any. When it
    /// disagrees with the recomputed rating the register carries a warning
    /// instead of silently resolving the conflict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recorded_feasibility: Option<Severity>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackerPersona {
    pub id: String,
    pub name: String,
    pub goal: String,
    pub tree: String,
}

/// Versioned container for the whole security model. Immutable once built;
/// applying a disclosure event produces a new value with `model_version`
/// incremented and the event appended to the log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecurityModel {
    pub schema_version: u32,
    pub model_version: u32,
    #[serde(default)]
    pub weights: ImpactWeights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_override: Option<RiskMatrix>,
    #[serde(default)]
    pub assets: Vec<Asset>,
    #[serde(default)]
    pub flows: Vec<DataFlow>,
    #[serde(default)]
    pub boundaries: Vec<TrustBoundary>,
    #[serde(default)]
    pub threats: Vec<Threat>,
    #[serde(default)]
    pub personas: Vec<AttackerPersona>,
    #[serde(default)]
    pub trees: Vec<AttackTree>,
    #[serde(default)]
    pub events: Vec<DisclosureEvent>,
}

impl SecurityModel {
    pub fn empty() -> Self {
        SecurityModel {
            schema_version: SCHEMA_VERSION,
            model_version: 1,
            weights: ImpactWeights::default(),
            matrix_override: None,
            assets: Vec::new(),
            flows: Vec::new(),
            boundaries: Vec::new(),
            threats: Vec::new(),
            personas: Vec::new(),
            trees: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn threat_by_id(&self, id: u32) -> Result<&Threat, ModelError> {
        self.threats
            .iter()
            .find(|t| t.id == id)
            .ok_or(ModelError::ThreatNotFound { id })
    }

    pub fn asset_by_id(&self, id: &str) -> Option<&Asset> {
        self.assets.iter().find(|a| a.id == id)
    }

    pub fn tree_by_id(&self, id: &str) -> Option<&AttackTree> {
        self.trees.iter().find(|t| t.id == id)
    }

    pub fn persona_by_id(&self, id: &str) -> Option<&AttackerPersona> {
        self.personas.iter().find(|p| p.id == id)
    }

    /// The risk matrix in force: the override if present, else the default.
    pub fn matrix(&self) -> RiskMatrix {
        self.matrix_override.clone().unwrap_or_default()
    }

    /// Sorts every collection by id so serialisation is canonical.
    pub fn canonicalize(&mut self) {
        self.assets.sort_by(|a, b| a.id.cmp(&b.id));
        self.flows.sort_by(|a, b| a.id.cmp(&b.id));
        self.boundaries.sort_by(|a, b| a.id.cmp(&b.id));
        self.threats.sort_by_key(|t| t.id);
        self.personas.sort_by(|a, b| a.id.cmp(&b.id));
        self.trees.sort_by(|a, b| a.id.cmp(&b.id));
        // events keep application order
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("threat {id} not found")]
    ThreatNotFound { id: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IssueSeverity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub severity: IssueSeverity,
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn error(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: IssueSeverity::Error,
            path: path.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: IssueSeverity::Warning,
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == IssueSeverity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == IssueSeverity::Warning)
    }

    pub fn is_clean(&self) -> bool {
        self.errors().next().is_none()
    }
}

/// Checks every model invariant. Problems are reported, not thrown: the
/// result carries errors (invariant violations) and warnings (gaps such as
/// threats not covered by any attack tree).
pub fn validate(model: &SecurityModel) -> ValidationReport {
    let mut report = ValidationReport::default();

    if model.schema_version != SCHEMA_VERSION {
        report.error(
            "schema_version",
            format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                model.schema_version
            ),
        );
    }
    if model.model_version == 0 {
        report.error("model_version", "model_version must start at 1");
    } else if model.model_version as usize != 1 + model.events.len() {
        report.error(
            "model_version",
            format!(
                "model_version {} does not equal 1 + {} applied events",
                model.model_version,
                model.events.len()
            ),
        );
    }
    if !model.weights.all_positive() {
        report.error("weights", "impact weights must be strictly positive");
    }
    if let Some(matrix) = &model.matrix_override {
        if let Err(e) = matrix.check_monotone() {
            report.error("matrix_override", e.to_string());
        }
    }

    let mut asset_ids: HashSet<&str> = HashSet::new();
    for (i, asset) in model.assets.iter().enumerate() {
        if !asset_ids.insert(asset.id.as_str()) {
            report.error(format!("assets[{i}]"), format!("duplicate asset id {:?}", asset.id));
        }
    }

    let mut flow_ids: HashSet<&str> = HashSet::new();
    for (i, flow) in model.flows.iter().enumerate() {
        let path = format!("flows[{i}]");
        if !flow_ids.insert(flow.id.as_str()) {
            report.error(&path, format!("duplicate flow id {:?}", flow.id));
        }
        if flow.source == flow.target {
            report.error(&path, "flow source and target must differ");
        }
        for endpoint in [&flow.source, &flow.target] {
            if model.asset_by_id(endpoint).is_none() {
                report.error(&path, format!("unresolved asset reference {endpoint:?}"));
            }
        }
    }

    let mut boundary_ids: HashSet<&str> = HashSet::new();
    for (i, boundary) in model.boundaries.iter().enumerate() {
        let path = format!("boundaries[{i}]");
        if !boundary_ids.insert(boundary.id.as_str()) {
            report.error(&path, format!("duplicate boundary id {:?}", boundary.id));
        }
        for member in &boundary.members {
            if model.asset_by_id(member).is_none() {
                report.error(&path, format!("unresolved asset reference {member:?}"));
            }
        }
    }

    let mut threat_ids: HashSet<u32> = HashSet::new();
    for (i, threat) in model.threats.iter().enumerate() {
        let path = format!("threats[{i}]");
        if threat.id == 0 {
            report.error(&path, "threat id must be a positive integer");
        }
        if !threat_ids.insert(threat.id) {
            report.error(&path, format!("duplicate threat id {}", threat.id));
        }
        if model.asset_by_id(&threat.source).is_none() {
            report.error(&path, format!("unresolved asset reference {:?}", threat.source));
        }
    }

    let mut tree_ids: HashSet<&str> = HashSet::new();
    let mut referenced_threats: HashSet<u32> = HashSet::new();
    for (i, tree) in model.trees.iter().enumerate() {
        let path = format!("trees[{i}]");
        if !tree_ids.insert(tree.id.as_str()) {
            report.error(&path, format!("duplicate tree id {:?}", tree.id));
        }
        if let Err(e) = validate_tree(tree) {
            report.error(&path, e.to_string());
        }
        for (node_id, node) in &tree.nodes {
            if let Node::Leaf { threat, .. } = node {
                match threat {
                    Some(tid) => {
                        referenced_threats.insert(*tid);
                        if !threat_ids.contains(tid) {
                            report.error(
                                format!("{path}.nodes.{node_id}"),
                                format!("unresolved threat reference {tid}"),
                            );
                        }
                    }
                    None => report.warning(
                        format!("{path}.nodes.{node_id}"),
                        "leaf carries no threat reference and blocks feasibility scoring",
                    ),
                }
            }
        }
    }

    let mut persona_ids: HashSet<&str> = HashSet::new();
    for (i, persona) in model.personas.iter().enumerate() {
        let path = format!("personas[{i}]");
        if !persona_ids.insert(persona.id.as_str()) {
            report.error(&path, format!("duplicate persona id {:?}", persona.id));
        }
        if model.tree_by_id(&persona.tree).is_none() {
            report.error(&path, format!("unresolved tree reference {:?}", persona.tree));
        }
    }

    for (i, event) in model.events.iter().enumerate() {
        let path = format!("events[{i}]");
        if event.targets.is_empty() {
            report.error(&path, "event has no targets");
        }
        if event.is_empty() {
            report.error(&path, "event carries no overrides");
        }
        for target in &event.targets {
            if !threat_ids.contains(target) {
                report.error(&path, format!("unresolved threat reference {target}"));
            }
        }
    }

    for threat in &model.threats {
        if !referenced_threats.contains(&threat.id) {
            report.warning(
                format!("threats[{}]", threat.id),
                format!("threat {} is not referenced by any attack-tree leaf", threat.id),
            );
        }
    }

    report
}
