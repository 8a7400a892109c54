//! Disclosure-driven dynamics: apply vulnerability-disclosure events as
//! partial overrides producing a new model version, diff two model
//! versions, and turn CVE feed files into candidate events for review.

use crate::cvss::{self, MetricSet};
use crate::impact::ImpactLevel;
use crate::model::SecurityModel;
use crate::risk::{assess, AssessError, RiskMatrix, RiskRegister};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Partial CVSS overrides: only the metrics an event changes are present.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricOverrides {
    #[serde(rename = "AV", default, skip_serializing_if = "Option::is_none")]
    pub av: Option<cvss::AttackVector>,
    #[serde(rename = "AC", default, skip_serializing_if = "Option::is_none")]
    pub ac: Option<cvss::AttackComplexity>,
    #[serde(rename = "PR", default, skip_serializing_if = "Option::is_none")]
    pub pr: Option<cvss::PrivilegesRequired>,
    #[serde(rename = "UI", default, skip_serializing_if = "Option::is_none")]
    pub ui: Option<cvss::UserInteraction>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<cvss::Scope>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<cvss::ImpactMetric>,
    #[serde(rename = "I", default, skip_serializing_if = "Option::is_none")]
    pub i: Option<cvss::ImpactMetric>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<cvss::ImpactMetric>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<cvss::ExploitMaturity>,
    #[serde(rename = "RL", default, skip_serializing_if = "Option::is_none")]
    pub rl: Option<cvss::RemediationLevel>,
    #[serde(rename = "RC", default, skip_serializing_if = "Option::is_none")]
    pub rc: Option<cvss::ReportConfidence>,
}

impl MetricOverrides {
    pub fn is_empty(&self) -> bool {
        self.av.is_none()
            && self.ac.is_none()
            && self.pr.is_none()
            && self.ui.is_none()
            && self.s.is_none()
            && self.c.is_none()
            && self.i.is_none()
            && self.a.is_none()
            && self.e.is_none()
            && self.rl.is_none()
            && self.rc.is_none()
    }

    pub fn apply(&self, m: &mut MetricSet) {
        if let Some(v) = self.av {
            m.av = v;
        }
        if let Some(v) = self.ac {
            m.ac = v;
        }
        if let Some(v) = self.pr {
            m.pr = v;
        }
        if let Some(v) = self.ui {
            m.ui = v;
        }
        if let Some(v) = self.s {
            m.s = v;
        }
        if let Some(v) = self.c {
            m.c = v;
        }
        if let Some(v) = self.i {
            m.i = v;
        }
        if let Some(v) = self.a {
            m.a = v;
        }
        if let Some(v) = self.e {
            m.e = v;
        }
        if let Some(v) = self.rl {
            m.rl = v;
        }
        if let Some(v) = self.rc {
            m.rc = v;
        }
    }

    /// The overrides that turn `from` into `to`, metric by metric.
    pub fn delta(from: &MetricSet, to: &MetricSet) -> MetricOverrides {
        MetricOverrides {
            av: (from.av != to.av).then_some(to.av),
            ac: (from.ac != to.ac).then_some(to.ac),
            pr: (from.pr != to.pr).then_some(to.pr),
            ui: (from.ui != to.ui).then_some(to.ui),
            s: (from.s != to.s).then_some(to.s),
            c: (from.c != to.c).then_some(to.c),
            i: (from.i != to.i).then_some(to.i),
            a: (from.a != to.a).then_some(to.a),
            e: (from.e != to.e).then_some(to.e),
            rl: (from.rl != to.rl).then_some(to.rl),
            rc: (from.rc != to.rc).then_some(to.rc),
        }
    }
}

/// Partial HEAVENS impact overrides.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub safety: Option<ImpactLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operational: Option<ImpactLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub financial: Option<ImpactLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub privacy: Option<ImpactLevel>,
}

impl ImpactOverrides {
    pub fn is_empty(&self) -> bool {
        self.safety.is_none()
            && self.operational.is_none()
            && self.financial.is_none()
            && self.privacy.is_none()
    }

    pub fn apply(&self, v: &mut crate::impact::ImpactVector) {
        if let Some(l) = self.safety {
            v.safety = l;
        }
        if let Some(l) = self.operational {
            v.operational = l;
        }
        if let Some(l) = self.financial {
            v.financial = l;
        }
        if let Some(l) = self.privacy {
            v.privacy = l;
        }
    }
}

/// A vulnerability-disclosure record: partial metric and impact overrides
/// for the targeted threats, with per-override rationale. Timestamps are
/// informational and never affect scoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisclosureEvent {
    pub id: String,
    pub reference: String,
    pub timestamp: String,
    pub targets: Vec<u32>,
    #[serde(default, skip_serializing_if = "MetricOverrides::is_empty")]
    pub metric_overrides: MetricOverrides,
    #[serde(default, skip_serializing_if = "ImpactOverrides::is_empty")]
    pub impact_overrides: ImpactOverrides,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub rationale: BTreeMap<String, String>,
}

impl DisclosureEvent {
    pub fn is_empty(&self) -> bool {
        self.metric_overrides.is_empty() && self.impact_overrides.is_empty()
    }
}

/// One changed value between two model versions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChangeRow {
    pub threat_id: u32,
    pub field: String,
    pub before: String,
    pub after: String,
}

/// Field-wise comparison of two model versions: threat metrics, impact
/// levels, and the derived register values. Contains a row for every value
/// that changed and none that didn't.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChangeReport {
    pub model_versions: (u32, u32),
    pub rows: Vec<ChangeRow>,
}

impl ChangeReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum UpdateError {
    #[error("event {event}: unknown target threat {threat}")]
    UnknownTarget { event: String, threat: u32 },
    #[error("event {event}: no targets")]
    NoTargets { event: String },
    #[error("event {event}: empty override set")]
    EmptyOverrides { event: String },
    #[error(transparent)]
    Assess(#[from] AssessError),
    #[error("malformed feed: {0}")]
    MalformedFeed(String),
    #[error("malformed feed record {index}: {message}")]
    MalformedRecord { index: usize, message: String },
}

/// Applies a disclosure event: returns the successor model (version + 1,
/// event appended, targeted threats overridden) and the before/after
/// change report.
pub fn apply_event(
    model: &SecurityModel,
    matrix: &RiskMatrix,
    event: &DisclosureEvent,
) -> Result<(SecurityModel, ChangeReport), UpdateError> {
    if event.targets.is_empty() {
        return Err(UpdateError::NoTargets { event: event.id.clone() });
    }
    if event.is_empty() {
        return Err(UpdateError::EmptyOverrides { event: event.id.clone() });
    }
    for target in &event.targets {
        if model.threat_by_id(*target).is_err() {
            return Err(UpdateError::UnknownTarget {
                event: event.id.clone(),
                threat: *target,
            });
        }
    }
    // Refuse to build on an invalid model.
    let before_register = assess(model, matrix)?;

    let mut next = model.clone();
    next.model_version += 1;
    for threat in &mut next.threats {
        if event.targets.contains(&threat.id) {
            event.metric_overrides.apply(&mut threat.metrics);
            event.impact_overrides.apply(&mut threat.impact);
        }
    }
    next.events.push(event.clone());

    let after_register = assess(&next, matrix)?;
    let rows = diff_rows(model, &next, &before_register, &after_register);
    let report = ChangeReport {
        model_versions: (model.model_version, next.model_version),
        rows,
    };
    Ok((next, report))
}

/// Symmetric field-wise comparison of two models and their registers.
/// `diff(m, m)` is empty.
pub fn diff(
    a: &SecurityModel,
    b: &SecurityModel,
    matrix: &RiskMatrix,
) -> Result<ChangeReport, UpdateError> {
    let ra = assess(a, matrix)?;
    let rb = assess(b, matrix)?;
    Ok(ChangeReport {
        model_versions: (a.model_version, b.model_version),
        rows: diff_rows(a, b, &ra, &rb),
    })
}

fn diff_rows(
    a: &SecurityModel,
    b: &SecurityModel,
    ra: &RiskRegister,
    rb: &RiskRegister,
) -> Vec<ChangeRow> {
    let mut rows: Vec<ChangeRow> = Vec::new();
    let mut ids: Vec<u32> = a.threats.iter().map(|t| t.id).collect();
    for t in &b.threats {
        if !ids.contains(&t.id) {
            ids.push(t.id);
        }
    }
    ids.sort_unstable();

    for id in ids {
        let ta = a.threat_by_id(id).ok();
        let tb = b.threat_by_id(id).ok();
        match (ta, tb) {
            (None, Some(_)) => rows.push(ChangeRow {
                threat_id: id,
                field: "presence".into(),
                before: "absent".into(),
                after: "added".into(),
            }),
            (Some(_), None) => rows.push(ChangeRow {
                threat_id: id,
                field: "presence".into(),
                before: "present".into(),
                after: "removed".into(),
            }),
            (Some(ta), Some(tb)) => {
                let mut push = |field: &str, before: String, after: String| {
                    if before != after {
                        rows.push(ChangeRow {
                            threat_id: id,
                            field: field.to_string(),
                            before,
                            after,
                        });
                    }
                };
                push("details", ta.details.clone(), tb.details.clone());
                push("category", ta.category.to_string(), tb.category.to_string());
                push("source", ta.source.clone(), tb.source.clone());
                push("attack_method", ta.attack_method.clone(), tb.attack_method.clone());
                push("physical", ta.physical.to_string(), tb.physical.to_string());
                let ma = &ta.metrics;
                let mb = &tb.metrics;
                push("AV", ma.av.letter().into(), mb.av.letter().into());
                push("AC", ma.ac.letter().into(), mb.ac.letter().into());
                push("PR", ma.pr.letter().into(), mb.pr.letter().into());
                push("UI", ma.ui.letter().into(), mb.ui.letter().into());
                push("S", ma.s.letter().into(), mb.s.letter().into());
                push("C", ma.c.letter().into(), mb.c.letter().into());
                push("I", ma.i.letter().into(), mb.i.letter().into());
                push("A", ma.a.letter().into(), mb.a.letter().into());
                push("E", ma.e.letter().into(), mb.e.letter().into());
                push("RL", ma.rl.letter().into(), mb.rl.letter().into());
                push("RC", ma.rc.letter().into(), mb.rc.letter().into());
                push(
                    "impact.safety",
                    ta.impact.safety.to_string(),
                    tb.impact.safety.to_string(),
                );
                push(
                    "impact.operational",
                    ta.impact.operational.to_string(),
                    tb.impact.operational.to_string(),
                );
                push(
                    "impact.financial",
                    ta.impact.financial.to_string(),
                    tb.impact.financial.to_string(),
                );
                push(
                    "impact.privacy",
                    ta.impact.privacy.to_string(),
                    tb.impact.privacy.to_string(),
                );
                if let (Some(rowa), Some(rowb)) = (ra.row(id), rb.row(id)) {
                    push(
                        "temporal_score",
                        rowa.cvss_temporal.to_string(),
                        rowb.cvss_temporal.to_string(),
                    );
                    push(
                        "feasibility",
                        rowa.feasibility.to_string(),
                        rowb.feasibility.to_string(),
                    );
                    push(
                        "impact_score",
                        rowa.impact_score.to_string(),
                        rowb.impact_score.to_string(),
                    );
                    push("impact_rating", rowa.impact.to_string(), rowb.impact.to_string());
                    push("risk_rating", rowa.risk.to_string(), rowb.risk.to_string());
                }
            }
            (None, None) => unreachable!(),
        }
    }
    rows
}

/// A CVE record in the declared feed subset. Unknown fields are ignored.
#[derive(Debug, Clone, Deserialize)]
pub struct CveRecord {
    pub cve_id: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub affected: Vec<String>,
    #[serde(default)]
    pub cvss31_vector: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
struct CveFeed {
    records: Vec<serde_json::Value>,
}

/// Candidate events from a CVE feed plus per-record warnings.
#[derive(Debug, Clone, Default)]
pub struct IngestOutcome {
    pub candidates: Vec<DisclosureEvent>,
    pub warnings: Vec<String>,
}

/// Parses a CVE feed document and proposes one candidate event per
/// (record, matching threat) pair. A record matches a threat when one of
/// the threat's component tags — derived from its source asset's name and
/// the channels of flows touching that asset — appears case-insensitively
/// in the record's description or affected-product text. Overrides are the
/// metrics where the CVE vector differs from the threat's current metrics.
/// Candidates are proposals, never auto-applied; they are ranked by match
/// count, then CVE id, then threat id.
pub fn ingest_cve(feed_json: &str, model: &SecurityModel) -> Result<IngestOutcome, UpdateError> {
    let feed: CveFeed =
        serde_json::from_str(feed_json).map_err(|e| UpdateError::MalformedFeed(e.to_string()))?;
    let mut outcome = IngestOutcome::default();
    // (match_count desc, cve_id, threat_id) ranking keys
    let mut ranked: Vec<(usize, String, u32, DisclosureEvent)> = Vec::new();

    for (index, raw) in feed.records.iter().enumerate() {
        let record: CveRecord = serde_json::from_value(raw.clone())
            .map_err(|e| UpdateError::MalformedRecord { index, message: e.to_string() })?;
        let vector = match &record.cvss31_vector {
            Some(v) => v,
            None => {
                outcome
                    .warnings
                    .push(format!("record {index} ({}): no CVSS 3.1 vector, skipped", record.cve_id));
                continue;
            }
        };
        let cve_metrics = match cvss::parse_vector(vector) {
            Ok(m) => m,
            Err(e) => {
                outcome.warnings.push(format!(
                    "record {index} ({}): unusable CVSS 3.1 vector ({e}), skipped",
                    record.cve_id
                ));
                continue;
            }
        };

        let haystack = {
            let mut text = record.description.to_lowercase();
            for product in &record.affected {
                text.push('\n');
                text.push_str(&product.to_lowercase());
            }
            text
        };

        for threat in &model.threats {
            let tags = component_tags(model, &threat.source);
            let hits = tags.iter().filter(|tag| haystack.contains(tag.as_str())).count();
            if hits == 0 {
                continue;
            }
            let overrides = MetricOverrides::delta(&threat.metrics, &cve_metrics);
            if overrides.is_empty() {
                outcome.warnings.push(format!(
                    "record {index} ({}): matches threat {} but proposes no metric changes",
                    record.cve_id, threat.id
                ));
                continue;
            }
            let mut rationale = BTreeMap::new();
            for row in override_descriptions(&threat.metrics, &overrides) {
                rationale.insert(
                    row.0,
                    format!("proposed from {}: {}", record.cve_id, row.1),
                );
            }
            let event = DisclosureEvent {
                id: format!("{}-{}", record.cve_id.to_lowercase(), threat.id),
                reference: record.cve_id.clone(),
                // candidates carry no publication time in the feed subset
                timestamp: "1970-01-01T00:00:00Z".to_string(),
                targets: vec![threat.id],
                metric_overrides: overrides,
                impact_overrides: ImpactOverrides::default(),
                rationale,
            };
            ranked.push((hits, record.cve_id.clone(), threat.id, event));
        }
    }

    ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    outcome.candidates = ranked.into_iter().map(|(_, _, _, e)| e).collect();
    Ok(outcome)
}

fn override_descriptions(from: &MetricSet, o: &MetricOverrides) -> Vec<(String, String)> {
    let mut out = Vec::new();
    macro_rules! describe {
        ($field:ident, $key:literal) => {
            if let Some(v) = o.$field {
                out.push(($key.to_string(), format!("{} -> {}", from.$field.letter(), v.letter())));
            }
        };
    }
    describe!(av, "AV");
    describe!(ac, "AC");
    describe!(pr, "PR");
    describe!(ui, "UI");
    describe!(s, "S");
    describe!(c, "C");
    describe!(i, "I");
    describe!(a, "A");
    describe!(e, "E");
    describe!(rl, "RL");
    describe!(rc, "RC");
    out
}

/// Keyword tags for a threat's source asset: significant words of the
/// asset name (all-caps abbreviations kept whole, generic words dropped)
/// plus the channel tokens of flows touching the asset.
fn component_tags(model: &SecurityModel, asset_id: &str) -> Vec<String> {
    const STOPWORDS: [&str; 5] = ["system", "store", "data", "local", "the"];
    let mut tags: Vec<String> = Vec::new();
    if let Some(asset) = model.asset_by_id(asset_id) {
        for word in asset.name.split(|c: char| c.is_whitespace() || c == '(' || c == ')') {
            if word.is_empty() {
                continue;
            }
            let lower = word.to_lowercase();
            let all_caps = word.len() >= 2 && word.chars().all(|c| c.is_ascii_uppercase());
            if (all_caps || lower.len() >= 5) && !STOPWORDS.contains(&lower.as_str()) {
                tags.push(lower);
            }
        }
    }
    for flow in &model.flows {
        if flow.source == asset_id || flow.target == asset_id {
            tags.push(flow.channel.as_str().to_string());
        }
    }
    tags.sort();
    tags.dedup();
    tags
}
