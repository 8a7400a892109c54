//! HEAVENS 2.0 impact estimation: per-objective impact levels on a
//! logarithmic parameter scale, weighted sum, normalisation and the
//! impact-rating thresholds. All arithmetic is exact (integer fractions);
//! decimal output rounds half-up to four places.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Impact level for one security objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ImpactLevel {
    None,
    Low,
    Medium,
    High,
}

impl ImpactLevel {
    /// The numeric parameter value fed into the weighted sum. Low and
    /// Medium share the value 10: the reference assessments score a Low
    /// objective as 10 (e.g. a post-disclosure (Low, Low, Low, High)
    /// vector totals 220 under default weights, printing 0.1692), and the
    /// worked Medium example also uses 10 (privacy Medium -> 0.0077). The
    /// levels still differ qualitatively in their analyst-facing
    /// definitions; see [`describe_level`].
    pub fn numeric(self) -> u64 {
        match self {
            ImpactLevel::None => 0,
            ImpactLevel::Low => 10,
            ImpactLevel::Medium => 10,
            ImpactLevel::High => 100,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ImpactLevel::None => "None",
            ImpactLevel::Low => "Low",
            ImpactLevel::Medium => "Medium",
            ImpactLevel::High => "High",
        }
    }

    pub const ALL: [ImpactLevel; 4] = [
        ImpactLevel::None,
        ImpactLevel::Low,
        ImpactLevel::Medium,
        ImpactLevel::High,
    ];
}

impl fmt::Display for ImpactLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Impact levels over the four security objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactVector {
    pub safety: ImpactLevel,
    pub operational: ImpactLevel,
    pub financial: ImpactLevel,
    pub privacy: ImpactLevel,
}

impl ImpactVector {
    pub fn new(
        safety: ImpactLevel,
        operational: ImpactLevel,
        financial: ImpactLevel,
        privacy: ImpactLevel,
    ) -> Self {
        ImpactVector { safety, operational, financial, privacy }
    }

    pub const NONE: ImpactVector = ImpactVector {
        safety: ImpactLevel::None,
        operational: ImpactLevel::None,
        financial: ImpactLevel::None,
        privacy: ImpactLevel::None,
    };
}

/// Per-objective weights. Safety dominates by default: (10, 1, 1, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactWeights {
    pub safety: u32,
    pub operational: u32,
    pub financial: u32,
    pub privacy: u32,
}

impl Default for ImpactWeights {
    fn default() -> Self {
        ImpactWeights { safety: 10, operational: 1, financial: 1, privacy: 1 }
    }
}

impl ImpactWeights {
    pub fn all_positive(&self) -> bool {
        self.safety > 0 && self.operational > 0 && self.financial > 0 && self.privacy > 0
    }
}

/// Normalised impact score as an exact fraction.
///
/// `num` is the weighted sum of the objective values (the raw score) and
/// `den` is `100 * (sum of weights)`, so `num/den` is in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImpactScore {
    pub num: u64,
    pub den: u64,
}

impl ImpactScore {
    /// The raw, unnormalised weighted sum.
    pub fn raw(&self) -> u64 {
        self.num
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn rating(&self) -> ImpactRating {
        impact_rating(self)
    }

    fn cmp_fraction(&self, num: u64, den: u64) -> std::cmp::Ordering {
        // self.num/self.den vs num/den, cross-multiplied in u128.
        let lhs = u128::from(self.num) * u128::from(den);
        let rhs = u128::from(num) * u128::from(self.den);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for ImpactScore {
    /// Four decimal places, rounding half away from zero; 10/1300 prints
    /// as "0.0077" and 220/1300 as "0.1692".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scaled = u128::from(self.num) * 10_000;
        let den = u128::from(self.den);
        let rounded = (2 * scaled + den) / (2 * den);
        write!(f, "{}.{:04}", rounded / 10_000, rounded % 10_000)
    }
}

impl Serialize for ImpactScore {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Weighted, normalised impact score:
/// `(w_s*i_s + w_o*i_o + w_f*i_f + w_p*i_p) / (100 * (w_s + w_o + w_f + w_p))`.
pub fn impact_score(v: &ImpactVector, w: &ImpactWeights) -> ImpactScore {
    debug_assert!(w.all_positive(), "impact weights must be strictly positive");
    let num = u64::from(w.safety) * v.safety.numeric()
        + u64::from(w.operational) * v.operational.numeric()
        + u64::from(w.financial) * v.financial.numeric()
        + u64::from(w.privacy) * v.privacy.numeric();
    let den = 100
        * (u64::from(w.safety)
            + u64::from(w.operational)
            + u64::from(w.financial)
            + u64::from(w.privacy));
    ImpactScore { num, den }
}

/// Qualitative impact rating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ImpactRating {
    None,
    Low,
    Medium,
    High,
    Critical,
}

impl ImpactRating {
    pub fn as_str(&self) -> &'static str {
        match self {
            ImpactRating::None => "None",
            ImpactRating::Low => "Low",
            ImpactRating::Medium => "Medium",
            ImpactRating::High => "High",
            ImpactRating::Critical => "Critical",
        }
    }

    pub const ALL: [ImpactRating; 5] = [
        ImpactRating::None,
        ImpactRating::Low,
        ImpactRating::Medium,
        ImpactRating::High,
        ImpactRating::Critical,
    ];
}

impl fmt::Display for ImpactRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Threshold map for the normalised score. Compared exactly on the
/// fraction: 0 -> None, (0, 0.01) -> Low, [0.01, 0.05) -> Medium,
/// [0.05, 0.45) -> High, [0.45, 1] -> Critical.
pub fn impact_rating(s: &ImpactScore) -> ImpactRating {
    use std::cmp::Ordering::Less;
    if s.num == 0 {
        ImpactRating::None
    } else if s.cmp_fraction(1, 100) == Less {
        ImpactRating::Low
    } else if s.cmp_fraction(5, 100) == Less {
        ImpactRating::Medium
    } else if s.cmp_fraction(45, 100) == Less {
        ImpactRating::High
    } else {
        ImpactRating::Critical
    }
}

/// A security objective of the impact assessment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Safety,
    Operational,
    Financial,
    Privacy,
}

impl Objective {
    pub const ALL: [Objective; 4] = [
        Objective::Safety,
        Objective::Operational,
        Objective::Financial,
        Objective::Privacy,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Objective::Safety => "safety",
            Objective::Operational => "operational",
            Objective::Financial => "financial",
            Objective::Privacy => "privacy",
        }
    }
}

/// Analyst-facing level definition for an objective, as used in reports.
pub fn describe_level(objective: Objective, level: ImpactLevel) -> &'static str {
    use ImpactLevel::*;
    use Objective::*;
    match (objective, level) {
        (Safety, None) => "No injury",
        (Safety, Low) => "Light and moderate injuries",
        (Safety, Medium) => "Severe and life-threatening injuries (survival probable)",
        (Safety, High) => "Life-threatening injuries (survival uncertain), fatal injuries",
        (Operational, None) => "No discernible effect",
        (Operational, Low) => {
            "Appearance item or audible noise (vehicle still operates, but does not conform, \
             annoys more than 75% of customers)"
        }
        (Operational, Medium) => {
            "Degradation of primary function (vehicle still operates, but at a reduced level \
             of performance)"
        }
        (Operational, High) => {
            "Potential failure mode affects safe vehicle operation without warning or involves \
             non-compliance with government regulations"
        }
        (Financial, None) => "No discernible effect. No appreciable consequences",
        (Financial, Low) => "The financial damage remains tolerable to the organisation",
        (Financial, Medium) => {
            "The resulting damage leads to substantial financial losses, but does not threaten \
             the existence of the organisation"
        }
        (Financial, High) => "The financial damage threatens the existence of the organisation",
        (Privacy, None) => "No discernible effects in relation to violations of privacy",
        (Privacy, Low) => {
            "Privacy violations of a particular stakeholder (e.g., vehicle owner, driver) which \
             may not lead to abuses (e.g., impersonation of a victim to perform actions with \
             stolen identities). Violation of legislations without appreciable consequences for \
             business operations and finance (e.g., warning without any significant financial \
             penalty, limited media coverage) for any stakeholder (e.g., OEM, fleet owner, driver)"
        }
        (Privacy, Medium) => {
            "Privacy violations of a particular stakeholder (e.g., vehicle owner, driver) \
             leading to abuses (e.g., impersonation of a victim to perform actions with stolen \
             identities) and media coverage. Violation of legislations with potential \
             consequences for business operations and finance (e.g., financial penalties, loss \
             of market share, media coverage)"
        }
        (Privacy, High) => {
            "Privacy violation of multiple stakeholders (e.g., fleet owners, multiple vehicle \
             owners and multiple drivers) leading to abuses (e.g., impersonation of a victim to \
             perform actions with stolen identities). Such a level of privacy violation may lead \
             to extensive media coverage as well as severe consequences in terms of loss of \
             market share, business operations, trust, reputation, and finance for OEMs and \
             fleet owners. Violation of legislations (e.g., environmental, driver) causing \
             significant consequences for business operations and finance (e.g., huge financial \
             penalties, loss of market share) as well as extensive media coverage"
        }
    }
}
