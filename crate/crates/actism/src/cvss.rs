//! CVSS v3.1 metric vectors, base and temporal scoring, and severity mapping.
//!
//! Scoring follows the official v3.1 equations with the specification's
//! integer-guarded `Roundup`, so results match the public calculator digit
//! for digit. Scores are carried as tenths in an integer newtype; no
//! floating-point value ever leaves this module.

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

macro_rules! metric_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $letter:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub fn letter(&self) -> &'static str {
                match self {
                    $(Self::$variant => $letter),+
                }
            }

            pub fn from_letter(s: &str) -> Option<Self> {
                match s {
                    $($letter => Some(Self::$variant),)+
                    _ => None,
                }
            }

            pub const ALL: &'static [Self] = &[$(Self::$variant),+];
        }

        // On disk metrics are their single-letter vector codes.
        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.letter())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = String::deserialize(deserializer)?;
                Self::from_letter(&text).ok_or_else(|| {
                    de::Error::custom(format!(
                        concat!("unknown value {:?} for ", stringify!($name)),
                        text
                    ))
                })
            }
        }
    };
}

metric_enum!(AttackVector { Network => "N", Adjacent => "A", Local => "L", Physical => "P" });
metric_enum!(AttackComplexity { Low => "L", High => "H" });
metric_enum!(PrivilegesRequired { None => "N", Low => "L", High => "H" });
metric_enum!(UserInteraction { None => "N", Required => "R" });
metric_enum!(Scope { Unchanged => "U", Changed => "C" });
metric_enum!(
    /// Confidentiality, integrity or availability impact. Ordered N < L < H.
    ImpactMetric { None => "N", Low => "L", High => "H" }
);
metric_enum!(ExploitMaturity { NotDefined => "X", Unproven => "U", ProofOfConcept => "P", Functional => "F", High => "H" });
metric_enum!(RemediationLevel { NotDefined => "X", OfficialFix => "O", TemporaryFix => "T", Workaround => "W", Unavailable => "U" });
metric_enum!(ReportConfidence { NotDefined => "X", Unknown => "U", Reasonable => "R", Confirmed => "C" });

impl AttackVector {
    fn weight(self) -> f64 {
        match self {
            Self::Network => 0.85,
            Self::Adjacent => 0.62,
            Self::Local => 0.55,
            Self::Physical => 0.2,
        }
    }
}

impl AttackComplexity {
    fn weight(self) -> f64 {
        match self {
            Self::Low => 0.77,
            Self::High => 0.44,
        }
    }
}

impl PrivilegesRequired {
    // The PR weight depends on scope per the official constant table.
    fn weight(self, scope: Scope) -> f64 {
        match (self, scope) {
            (Self::None, _) => 0.85,
            (Self::Low, Scope::Unchanged) => 0.62,
            (Self::Low, Scope::Changed) => 0.68,
            (Self::High, Scope::Unchanged) => 0.27,
            (Self::High, Scope::Changed) => 0.50,
        }
    }
}

impl UserInteraction {
    fn weight(self) -> f64 {
        match self {
            Self::None => 0.85,
            Self::Required => 0.62,
        }
    }
}

impl ImpactMetric {
    fn weight(self) -> f64 {
        match self {
            Self::None => 0.0,
            Self::Low => 0.22,
            Self::High => 0.56,
        }
    }
}

impl ExploitMaturity {
    fn weight(self) -> f64 {
        match self {
            Self::NotDefined | Self::High => 1.0,
            Self::Unproven => 0.91,
            Self::ProofOfConcept => 0.94,
            Self::Functional => 0.97,
        }
    }
}

impl RemediationLevel {
    fn weight(self) -> f64 {
        match self {
            Self::NotDefined | Self::Unavailable => 1.0,
            Self::OfficialFix => 0.95,
            Self::TemporaryFix => 0.96,
            Self::Workaround => 0.97,
        }
    }
}

impl ReportConfidence {
    fn weight(self) -> f64 {
        match self {
            Self::NotDefined | Self::Confirmed => 1.0,
            Self::Unknown => 0.92,
            Self::Reasonable => 0.96,
        }
    }
}

/// One threat's CVSS v3.1 metric values: the eight base metrics plus the
/// three temporal metrics (defaulting to Not Defined).
///
/// Environmental metrics are accepted by the parser and preserved verbatim
/// so a vector round-trips, but any attempt to score a set carrying them is
/// rejected — see [`MetricSet::reject_environmental`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MetricSet {
    pub av: AttackVector,
    pub ac: AttackComplexity,
    pub pr: PrivilegesRequired,
    pub ui: UserInteraction,
    pub s: Scope,
    pub c: ImpactMetric,
    pub i: ImpactMetric,
    pub a: ImpactMetric,
    pub e: ExploitMaturity,
    pub rl: RemediationLevel,
    pub rc: ReportConfidence,
    /// Environmental metric tokens in input order, e.g. `("CR", "H")`.
    pub environmental: Vec<(String, String)>,
}

impl MetricSet {
    /// Errors if the set carries environmental metrics, which this scorer
    /// deliberately does not compute.
    pub fn reject_environmental(&self) -> Result<(), VectorError> {
        match self.environmental.first() {
            Some((key, _)) => Err(VectorError::EnvironmentalNotScorable { key: key.clone() }),
            None => Ok(()),
        }
    }
}

const ENVIRONMENTAL_KEYS: [&str; 11] = [
    "CR", "IR", "AR", "MAV", "MAC", "MPR", "MUI", "MS", "MC", "MI", "MA",
];

/// Vector parse or scoring-eligibility failure. `pos` is the 1-based index
/// of the offending `/`-separated token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VectorError {
    #[error("token {pos}: malformed token {token:?}, expected KEY:VALUE")]
    MalformedToken { pos: usize, token: String },
    #[error("token {pos}: unknown metric key {key:?}")]
    UnknownKey { pos: usize, key: String },
    #[error("token {pos}: unknown value {value} for {key}")]
    UnknownValue { pos: usize, key: String, value: String },
    #[error("token {pos}: duplicate metric {key}")]
    DuplicateMetric { pos: usize, key: String },
    #[error("missing base metric {key}")]
    MissingBaseMetric { key: String },
    #[error("unsupported CVSS version prefix {prefix:?}, only CVSS:3.1 is supported")]
    UnsupportedVersion { prefix: String },
    #[error("empty vector string")]
    Empty,
    #[error("environmental metric {key} present; environmental scoring is not supported")]
    EnvironmentalNotScorable { key: String },
}

/// Parses a v3.1 vector string. The `CVSS:3.1/` prefix is optional and
/// metrics may appear in any order; absent temporal metrics come back as
/// Not Defined.
pub fn parse_vector(text: &str) -> Result<MetricSet, VectorError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(VectorError::Empty);
    }

    let mut av = None;
    let mut ac = None;
    let mut pr = None;
    let mut ui = None;
    let mut s = None;
    let mut c = None;
    let mut i = None;
    let mut a = None;
    let mut e = None;
    let mut rl = None;
    let mut rc = None;
    let mut environmental: Vec<(String, String)> = Vec::new();

    for (idx, token) in text.split('/').enumerate() {
        let pos = idx + 1;
        if idx == 0 && token.starts_with("CVSS:") {
            if token != "CVSS:3.1" {
                return Err(VectorError::UnsupportedVersion {
                    prefix: token.to_string(),
                });
            }
            continue;
        }
        let (key, value) = token.split_once(':').ok_or_else(|| VectorError::MalformedToken {
            pos,
            token: token.to_string(),
        })?;
        if key.is_empty() || value.is_empty() {
            return Err(VectorError::MalformedToken {
                pos,
                token: token.to_string(),
            });
        }

        macro_rules! set {
            ($slot:ident, $ty:ty) => {{
                if $slot.is_some() {
                    return Err(VectorError::DuplicateMetric {
                        pos,
                        key: key.to_string(),
                    });
                }
                let parsed = <$ty>::from_letter(value).ok_or_else(|| VectorError::UnknownValue {
                    pos,
                    key: key.to_string(),
                    value: value.to_string(),
                })?;
                $slot = Some(parsed);
            }};
        }

        match key {
            "AV" => set!(av, AttackVector),
            "AC" => set!(ac, AttackComplexity),
            "PR" => set!(pr, PrivilegesRequired),
            "UI" => set!(ui, UserInteraction),
            "S" => set!(s, Scope),
            "C" => set!(c, ImpactMetric),
            "I" => set!(i, ImpactMetric),
            "A" => set!(a, ImpactMetric),
            "E" => set!(e, ExploitMaturity),
            "RL" => set!(rl, RemediationLevel),
            "RC" => set!(rc, ReportConfidence),
            k if ENVIRONMENTAL_KEYS.contains(&k) => {
                if environmental.iter().any(|(seen, _)| seen == k) {
                    return Err(VectorError::DuplicateMetric {
                        pos,
                        key: key.to_string(),
                    });
                }
                environmental.push((key.to_string(), value.to_string()));
            }
            _ => {
                return Err(VectorError::UnknownKey {
                    pos,
                    key: key.to_string(),
                })
            }
        }
    }

    macro_rules! require {
        ($slot:ident, $key:literal) => {
            $slot.ok_or(VectorError::MissingBaseMetric {
                key: $key.to_string(),
            })?
        };
    }

    Ok(MetricSet {
        av: require!(av, "AV"),
        ac: require!(ac, "AC"),
        pr: require!(pr, "PR"),
        ui: require!(ui, "UI"),
        s: require!(s, "S"),
        c: require!(c, "C"),
        i: require!(i, "I"),
        a: require!(a, "A"),
        e: e.unwrap_or(ExploitMaturity::NotDefined),
        rl: rl.unwrap_or(RemediationLevel::NotDefined),
        rc: rc.unwrap_or(ReportConfidence::NotDefined),
        environmental,
    })
}

/// Renders the canonical vector string: `CVSS:3.1/` prefix, metrics in
/// AV,AC,PR,UI,S,C,I,A,E,RL,RC order, Not Defined temporal metrics omitted.
pub fn format_vector(m: &MetricSet) -> String {
    let mut out = format!(
        "CVSS:3.1/AV:{}/AC:{}/PR:{}/UI:{}/S:{}/C:{}/I:{}/A:{}",
        m.av.letter(),
        m.ac.letter(),
        m.pr.letter(),
        m.ui.letter(),
        m.s.letter(),
        m.c.letter(),
        m.i.letter(),
        m.a.letter()
    );
    if m.e != ExploitMaturity::NotDefined {
        out.push_str("/E:");
        out.push_str(m.e.letter());
    }
    if m.rl != RemediationLevel::NotDefined {
        out.push_str("/RL:");
        out.push_str(m.rl.letter());
    }
    if m.rc != ReportConfidence::NotDefined {
        out.push_str("/RC:");
        out.push_str(m.rc.letter());
    }
    for (key, value) in &m.environmental {
        out.push('/');
        out.push_str(key);
        out.push(':');
        out.push_str(value);
    }
    out
}

impl fmt::Display for MetricSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_vector(self))
    }
}

// Model files carry metric sets as vector strings.
impl Serialize for MetricSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_vector(self))
    }
}

impl<'de> Deserialize<'de> for MetricSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_vector(&text).map_err(de::Error::custom)
    }
}

/// A CVSS score: one fractional digit in [0.0, 10.0], stored as tenths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score(u16);

impl Score {
    pub fn from_tenths(tenths: u16) -> Self {
        assert!(tenths <= 100, "score out of range: {tenths} tenths");
        Score(tenths)
    }

    pub fn tenths(self) -> u16 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 10.0
    }

    pub fn severity(self) -> Severity {
        severity(self)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 10, self.0 % 10)
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// The specification's `Roundup`: smallest one-decimal value >= x, with the
/// product first snapped to an integer at 10^-5 so equal-looking inputs
/// cannot straddle a tenth boundary across platforms.
pub fn roundup(x: f64) -> Score {
    assert!((0.0..=10.0).contains(&x), "roundup input out of range: {x}");
    let scaled = (x * 100_000.0).round() as i64;
    let tenths = if scaled % 10_000 == 0 {
        scaled / 10_000
    } else {
        scaled / 10_000 + 1
    };
    Score::from_tenths(tenths as u16)
}

/// CVSS v3.1 base score per the official equations.
pub fn base_score(m: &MetricSet) -> Score {
    let iss = 1.0 - (1.0 - m.c.weight()) * (1.0 - m.i.weight()) * (1.0 - m.a.weight());
    let impact = match m.s {
        Scope::Unchanged => 6.42 * iss,
        Scope::Changed => 7.52 * (iss - 0.029) - 3.25 * (iss - 0.02).powi(15),
    };
    if impact <= 0.0 {
        return Score::from_tenths(0);
    }
    let exploitability =
        8.22 * m.av.weight() * m.ac.weight() * m.pr.weight(m.s) * m.ui.weight();
    let raw = match m.s {
        Scope::Unchanged => (impact + exploitability).min(10.0),
        Scope::Changed => (1.08 * (impact + exploitability)).min(10.0),
    };
    roundup(raw)
}

/// CVSS v3.1 temporal score: base adjusted by exploit code maturity,
/// remediation level and report confidence. Equals the base score when all
/// three are Not Defined.
pub fn temporal_score(m: &MetricSet) -> Score {
    let base = base_score(m);
    roundup(base.as_f64() * m.e.weight() * m.rl.weight() * m.rc.weight())
}

/// Qualitative severity rating; in this pipeline, attack feasibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    None,
    Low,
    Medium,
    High,
    Critical,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::None => "None",
            Severity::Low => "Low",
            Severity::Medium => "Medium",
            Severity::High => "High",
            Severity::Critical => "Critical",
        }
    }

    pub const ALL: [Severity; 5] = [
        Severity::None,
        Severity::Low,
        Severity::Medium,
        Severity::High,
        Severity::Critical,
    ];
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Maps a score to its severity band. Exactly 0.0 is None; the Low band is
/// (0.0, 3.9] so the rating scale has a genuine fifth level.
pub fn severity(score: Score) -> Severity {
    match score.tenths() {
        0 => Severity::None,
        1..=39 => Severity::Low,
        40..=69 => Severity::Medium,
        70..=89 => Severity::High,
        _ => Severity::Critical,
    }
}

/// Iterator over all 2,592 base-metric combinations (temporal all X).
pub fn all_base_combinations() -> impl Iterator<Item = MetricSet> {
    AttackVector::ALL.iter().flat_map(|&av| {
        AttackComplexity::ALL.iter().flat_map(move |&ac| {
            PrivilegesRequired::ALL.iter().flat_map(move |&pr| {
                UserInteraction::ALL.iter().flat_map(move |&ui| {
                    Scope::ALL.iter().flat_map(move |&s| {
                        ImpactMetric::ALL.iter().flat_map(move |&c| {
                            ImpactMetric::ALL.iter().flat_map(move |&i| {
                                ImpactMetric::ALL.iter().map(move |&a| MetricSet {
                                    av,
                                    ac,
                                    pr,
                                    ui,
                                    s,
                                    c,
                                    i,
                                    a,
                                    e: ExploitMaturity::NotDefined,
                                    rl: RemediationLevel::NotDefined,
                                    rc: ReportConfidence::NotDefined,
                                    environmental: Vec::new(),
                                })
                            })
                        })
                    })
                })
            })
        })
    })
}
