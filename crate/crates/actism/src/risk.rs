//! The 5x5 risk matrix and the model-wide risk register: attack feasibility
//! (CVSS temporal severity) crossed with the HEAVENS impact rating.

use crate::cvss::{self, Score, Severity, VectorError};
use crate::impact::{impact_score, ImpactRating, ImpactScore};
use crate::model::{validate, SecurityModel, ValidationReport};
use crate::tree::{goal_feasibility, AttackPath};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RiskRating {
    Low,
    Medium,
    High,
    Extreme,
}

impl RiskRating {
    pub fn as_str(&self) -> &'static str {
        match self {
            RiskRating::Low => "Low",
            RiskRating::Medium => "Medium",
            RiskRating::High => "High",
            RiskRating::Extreme => "Extreme",
        }
    }
}

impl fmt::Display for RiskRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Total 5x5 lookup: rows are feasibility None..Critical, columns impact
/// None..Critical. Must be monotone nondecreasing along both axes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RiskMatrix {
    pub cells: [[RiskRating; 5]; 5],
}

impl Default for RiskMatrix {
    fn default() -> Self {
        use RiskRating::*;
        RiskMatrix {
            cells: [
                [Low, Low, Low, Medium, Medium],
                [Low, Medium, Medium, High, High],
                [Low, Medium, Medium, High, Extreme],
                [Medium, Medium, High, Extreme, Extreme],
                [Medium, High, High, Extreme, Extreme],
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("risk matrix not monotone at feasibility {row}, impact {col}")]
    NotMonotone { row: &'static str, col: &'static str },
}

impl RiskMatrix {
    pub fn check_monotone(&self) -> Result<(), MatrixError> {
        for r in 0..5 {
            for c in 0..5 {
                let here = self.cells[r][c];
                if c + 1 < 5 && self.cells[r][c + 1] < here {
                    return Err(MatrixError::NotMonotone {
                        row: Severity::ALL[r].as_str(),
                        col: ImpactRating::ALL[c + 1].as_str(),
                    });
                }
                if r + 1 < 5 && self.cells[r + 1][c] < here {
                    return Err(MatrixError::NotMonotone {
                        row: Severity::ALL[r + 1].as_str(),
                        col: ImpactRating::ALL[c].as_str(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn rating(&self, feasibility: Severity, impact: ImpactRating) -> RiskRating {
        self.cells[feasibility as usize][impact as usize]
    }
}

/// Table lookup combining attack feasibility and impact rating.
pub fn risk_rating(matrix: &RiskMatrix, feasibility: Severity, impact: ImpactRating) -> RiskRating {
    matrix.rating(feasibility, impact)
}

/// One register row per threat, ordered by threat id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegisterRow {
    pub threat_id: u32,
    pub cvss_temporal: Score,
    pub feasibility: Severity,
    pub impact_score: ImpactScore,
    pub impact: ImpactRating,
    pub risk: RiskRating,
}

/// Informational goal-feasibility summary for one persona's tree. Never
/// feeds the matrix; the register is per-threat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoalSummary {
    pub persona_id: String,
    pub persona_name: String,
    pub goal: String,
    pub score: Option<Score>,
    pub best_path: Option<AttackPath>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RiskRegister {
    pub model_version: u32,
    pub rows: Vec<RegisterRow>,
    pub goals: Vec<GoalSummary>,
    pub warnings: Vec<String>,
}

impl RiskRegister {
    pub fn row(&self, threat_id: u32) -> Option<&RegisterRow> {
        self.rows.iter().find(|r| r.threat_id == threat_id)
    }
}

#[derive(Debug, Error)]
pub enum AssessError {
    #[error("model failed validation with {count} error(s); first: {first}")]
    InvalidModel { count: usize, first: String, report: ValidationReport },
    #[error("threat {threat}: {source}")]
    UnscorableThreat { threat: u32, source: VectorError },
}

/// Assesses every threat: temporal score -> feasibility, impact score ->
/// impact rating, matrix lookup -> risk. Pure function of (model, matrix);
/// the model must validate with zero errors.
pub fn assess(model: &SecurityModel, matrix: &RiskMatrix) -> Result<RiskRegister, AssessError> {
    let report = validate(model);
    if !report.is_clean() {
        let count = report.errors().count();
        let first = report
            .errors()
            .next()
            .map(|i| format!("{}: {}", i.path, i.message))
            .unwrap_or_default();
        return Err(AssessError::InvalidModel { count, first, report });
    }

    let mut warnings: Vec<String> = Vec::new();
    let mut rows: Vec<RegisterRow> = Vec::with_capacity(model.threats.len());
    let mut threats: Vec<&_> = model.threats.iter().collect();
    threats.sort_by_key(|t| t.id);
    for threat in threats {
        threat
            .metrics
            .reject_environmental()
            .map_err(|source| AssessError::UnscorableThreat { threat: threat.id, source })?;
        let temporal = cvss::temporal_score(&threat.metrics);
        let feasibility = temporal.severity();
        let score = impact_score(&threat.impact, &model.weights);
        let impact = score.rating();
        let risk = matrix.rating(feasibility, impact);
        if let Some(recorded) = threat.recorded_feasibility {
            if recorded != feasibility {
                warnings.push(format!(
                    "threat {}: recorded feasibility {} differs from computed {}",
                    threat.id, recorded, feasibility
                ));
            }
        }
        rows.push(RegisterRow {
            threat_id: threat.id,
            cvss_temporal: temporal,
            feasibility,
            impact_score: score,
            impact,
            risk,
        });
    }

    let mut goals: Vec<GoalSummary> = Vec::new();
    let mut personas: Vec<&_> = model.personas.iter().collect();
    personas.sort_by(|a, b| a.id.cmp(&b.id));
    for persona in personas {
        // persona.tree resolves: validation was clean
        let tree = model.tree_by_id(&persona.tree).expect("validated");
        match goal_feasibility(tree, model) {
            Ok(g) => goals.push(GoalSummary {
                persona_id: persona.id.clone(),
                persona_name: persona.name.clone(),
                goal: persona.goal.clone(),
                score: Some(g.score),
                best_path: Some(g.best_path),
                note: None,
            }),
            Err(e) => {
                goals.push(GoalSummary {
                    persona_id: persona.id.clone(),
                    persona_name: persona.name.clone(),
                    goal: persona.goal.clone(),
                    score: None,
                    best_path: None,
                    note: Some(e.to_string()),
                });
                warnings.push(format!("persona {}: {}", persona.id, e));
            }
        }
    }

    Ok(RiskRegister {
        model_version: model.model_version,
        rows,
        goals,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matrix_is_total_and_monotone() {
        let m = RiskMatrix::default();
        m.check_monotone().unwrap();
    }

    #[test]
    fn observed_rating_points() {
        let m = RiskMatrix::default();
        assert_eq!(m.rating(Severity::Medium, ImpactRating::High), RiskRating::High);
        assert_eq!(m.rating(Severity::Low, ImpactRating::Low), RiskRating::Medium);
        assert_eq!(m.rating(Severity::High, ImpactRating::Critical), RiskRating::Extreme);
        assert_eq!(m.rating(Severity::Medium, ImpactRating::Low), RiskRating::Medium);
        assert_eq!(m.rating(Severity::None, ImpactRating::None), RiskRating::Low);
        assert_eq!(m.rating(Severity::Medium, ImpactRating::Critical), RiskRating::Extreme);
    }

    #[test]
    fn non_monotone_matrix_is_rejected() {
        let mut m = RiskMatrix::default();
        m.cells[4][4] = RiskRating::Low;
        assert!(m.check_monotone().is_err());
    }

    #[test]
    fn empty_model_assesses_to_empty_register() {
        let model = crate::model::SecurityModel::empty();
        let register = assess(&model, &RiskMatrix::default()).unwrap();
        assert!(register.rows.is_empty());
        assert!(register.goals.is_empty());
        assert!(register.warnings.is_empty());
    }

    #[test]
    fn invalid_model_is_refused() {
        let mut model = crate::model::SecurityModel::empty();
        model.model_version = 9;
        assert!(matches!(
            assess(&model, &RiskMatrix::default()),
            Err(AssessError::InvalidModel { .. })
        ));
    }
}
