//! Model persistence and report rendering. Model files are canonical JSON:
//! fixed key order, collections sorted by id, so identical models produce
//! byte-identical files.

use crate::impact::{describe_level, Objective};
use crate::model::{validate, SecurityModel, ValidationReport, SCHEMA_VERSION};
use crate::risk::RiskRegister;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: schema_version {found} not supported, expected {expected}")]
    SchemaVersion {
        path: String,
        found: u32,
        expected: u32,
    },
    #[error("{path}: model failed validation with {count} error(s); first: {first}")]
    Invalid {
        path: String,
        count: usize,
        first: String,
        report: ValidationReport,
    },
}

/// Loads and parses a model file without validating cross-references.
/// Used by the `validate` subcommand, which wants to report the issues.
pub fn load_model_lenient(path: &Path) -> Result<SecurityModel, IoError> {
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: display.clone(),
        source,
    })?;
    let model: SecurityModel =
        serde_json::from_str(&text).map_err(|e| IoError::Parse {
            path: display.clone(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    if model.schema_version != SCHEMA_VERSION {
        return Err(IoError::SchemaVersion {
            path: display,
            found: model.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(model)
}

/// Loads a model file and requires it to validate with zero errors.
pub fn load_model(path: &Path) -> Result<SecurityModel, IoError> {
    let model = load_model_lenient(path)?;
    let report = validate(&model);
    if !report.is_clean() {
        let count = report.errors().count();
        let first = report
            .errors()
            .next()
            .map(|i| format!("{}: {}", i.path, i.message))
            .unwrap_or_default();
        return Err(IoError::Invalid {
            path: path.display().to_string(),
            count,
            first,
            report,
        });
    }
    Ok(model)
}

/// Renders the canonical byte form of a model.
pub fn model_to_canonical_json(model: &SecurityModel) -> String {
    let mut canonical = model.clone();
    canonical.canonicalize();
    let mut text = serde_json::to_string_pretty(&canonical).expect("model serialises");
    text.push('\n');
    text
}

/// Saves a model in canonical form: stable field order, collections sorted
/// by id, trailing newline.
pub fn save_model(model: &SecurityModel, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, model_to_canonical_json(model)).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Output format for rendered registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    #[value(name = "markdown-table")]
    MarkdownTable,
    #[value(name = "csv")]
    Csv,
    #[value(name = "json")]
    Json,
    #[value(name = "ascii-matrix")]
    AsciiMatrix,
}

/// Renders a risk register. Output is deterministic for a given register.
pub fn render_register(register: &RiskRegister, fmt: ReportFormat) -> String {
    match fmt {
        ReportFormat::MarkdownTable => render_markdown(register),
        ReportFormat::Csv => render_csv(register),
        ReportFormat::Json => render_json(register),
        ReportFormat::AsciiMatrix => render_ascii_matrix(register),
    }
}

fn render_markdown(register: &RiskRegister) -> String {
    let mut out = String::new();
    out.push_str("| Threat ID | CVSS Temporal | Attack Feasibility | Impact Rating | Risk Rating |\n");
    out.push_str("| --- | --- | --- | --- | --- |\n");
    for row in &register.rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            row.threat_id, row.cvss_temporal, row.feasibility, row.impact, row.risk
        );
    }
    out
}

fn render_csv(register: &RiskRegister) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "threat_id",
            "cvss_temporal",
            "feasibility",
            "impact_score",
            "impact_rating",
            "risk_rating",
        ])
        .expect("csv header");
    for row in &register.rows {
        writer
            .write_record([
                row.threat_id.to_string(),
                row.cvss_temporal.to_string(),
                row.feasibility.to_string(),
                row.impact_score.to_string(),
                row.impact.to_string(),
                row.risk.to_string(),
            ])
            .expect("csv row");
    }
    String::from_utf8(writer.into_inner().expect("csv flush")).expect("csv utf-8")
}

fn render_json(register: &RiskRegister) -> String {
    #[derive(Serialize)]
    struct JsonRow<'a> {
        threat_id: u32,
        cvss_temporal: String,
        feasibility: &'a str,
        impact_score: String,
        impact_rating: &'a str,
        risk_rating: &'a str,
    }
    #[derive(Serialize)]
    struct JsonRegister<'a> {
        model_version: u32,
        rows: Vec<JsonRow<'a>>,
        warnings: &'a [String],
    }
    let doc = JsonRegister {
        model_version: register.model_version,
        rows: register
            .rows
            .iter()
            .map(|r| JsonRow {
                threat_id: r.threat_id,
                cvss_temporal: r.cvss_temporal.to_string(),
                feasibility: r.feasibility.as_str(),
                impact_score: r.impact_score.to_string(),
                impact_rating: r.impact.as_str(),
                risk_rating: r.risk.as_str(),
            })
            .collect(),
        warnings: &register.warnings,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("register serialises");
    text.push('\n');
    text
}

fn render_ascii_matrix(register: &RiskRegister) -> String {
    use crate::cvss::Severity;
    use crate::impact::ImpactRating;

    // threat ids per (feasibility, impact) cell
    let mut cells: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); 5]; 5];
    for row in &register.rows {
        cells[row.feasibility as usize][row.impact as usize].push(row.threat_id);
    }
    let mut text_cells: Vec<Vec<String>> = Vec::new();
    for feas_row in &cells {
        text_cells.push(
            feas_row
                .iter()
                .map(|ids| {
                    ids.iter()
                        .map(|id| id.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect(),
        );
    }
    let mut widths = [0usize; 6];
    widths[0] = "feasibility \\ impact".len();
    for (c, rating) in ImpactRating::ALL.iter().enumerate() {
        widths[c + 1] = rating.as_str().len();
    }
    for (r, severity) in Severity::ALL.iter().enumerate() {
        widths[0] = widths[0].max(severity.as_str().len());
        for c in 0..5 {
            widths[c + 1] = widths[c + 1].max(text_cells[r][c].len());
        }
    }
    let mut out = String::new();
    let _ = write!(out, "{:<w$}", "feasibility \\ impact", w = widths[0]);
    for (c, rating) in ImpactRating::ALL.iter().enumerate() {
        let _ = write!(out, " | {:<w$}", rating.as_str(), w = widths[c + 1]);
    }
    out.push('\n');
    // rows printed Critical first so risk grows toward the top-right
    for r in (0..5).rev() {
        let _ = write!(out, "{:<w$}", Severity::ALL[r].as_str(), w = widths[0]);
        for c in 0..5 {
            let _ = write!(out, " | {:<w$}", text_cells[r][c], w = widths[c + 1]);
        }
        out.push('\n');
    }
    out
}

/// The full analyst report: register table, per-threat impact assessment
/// with the level definitions, per-persona goal feasibility and warnings.
pub fn render_full_report(model: &SecurityModel, register: &RiskRegister) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Risk assessment report (model version {})\n", model.model_version);

    out.push_str("## Risk register\n\n");
    out.push_str(&render_markdown(register));

    out.push_str("\n## Impact assessment\n");
    for row in &register.rows {
        let threat = model.threat_by_id(row.threat_id).expect("register row");
        let _ = writeln!(out, "\n### Threat {} ({})", threat.id, threat.category);
        let _ = writeln!(out, "{}", threat.details);
        let _ = writeln!(
            out,
            "\n- CVSS vector: {}\n- Temporal score: {} ({})\n- Impact score: {} ({})",
            crate::cvss::format_vector(&threat.metrics),
            row.cvss_temporal,
            row.feasibility,
            row.impact_score,
            row.impact,
        );
        let levels = [
            (Objective::Safety, threat.impact.safety),
            (Objective::Operational, threat.impact.operational),
            (Objective::Financial, threat.impact.financial),
            (Objective::Privacy, threat.impact.privacy),
        ];
        for (objective, level) in levels {
            let _ = writeln!(
                out,
                "- {} {}: {}",
                objective.as_str(),
                level,
                describe_level(objective, level)
            );
        }
        let _ = writeln!(out, "- Risk rating: {}", row.risk);
    }

    if !register.goals.is_empty() {
        out.push_str("\n## Attack-tree goal feasibility\n\n");
        for goal in &register.goals {
            match (&goal.score, &goal.best_path) {
                (Some(score), Some(path)) => {
                    let leaves: Vec<&str> = path.leaves.iter().map(String::as_str).collect();
                    let _ = writeln!(
                        out,
                        "- {} ({}): {} via [{}] — {}",
                        goal.persona_name,
                        goal.persona_id,
                        score,
                        leaves.join(", "),
                        goal.goal
                    );
                }
                _ => {
                    let _ = writeln!(
                        out,
                        "- {} ({}): unscored — {}",
                        goal.persona_name,
                        goal.persona_id,
                        goal.note.as_deref().unwrap_or("unknown")
                    );
                }
            }
        }
    }

    if !register.warnings.is_empty() {
        out.push_str("\n## Warnings\n\n");
        for warning in &register.warnings {
            let _ = writeln!(out, "- {warning}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::{assess, RiskMatrix};

    #[test]
    fn empty_register_csv_is_header_only() {
        let model = SecurityModel::empty();
        let register = assess(&model, &RiskMatrix::default()).unwrap();
        let csv = render_register(&register, ReportFormat::Csv);
        assert_eq!(
            csv,
            "threat_id,cvss_temporal,feasibility,impact_score,impact_rating,risk_rating\n"
        );
    }

    #[test]
    fn save_load_round_trip_is_byte_stable() {
        let model = SecurityModel::empty();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        let first = std::fs::read(&path).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded, model);
        save_model(&loaded, &path).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn unknown_top_level_field_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, r#"{"schema_version":1,"model_version":1,"foo":3}"#).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
    }

    #[test]
    fn schema_version_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, r#"{"schema_version":2,"model_version":1}"#).unwrap();
        assert!(matches!(
            load_model(&path).unwrap_err(),
            IoError::SchemaVersion { found: 2, .. }
        ));
    }

    #[test]
    fn parse_error_carries_line_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, "{\n  \"schema_version\": oops\n}").unwrap();
        match load_model(&path).unwrap_err() {
            IoError::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("expected parse error, got {other}"),
        }
    }
}
