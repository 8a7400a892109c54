//! Dynamic security modelling for automotive systems.
//!
//! The pipeline: STRIDE-categorised threats over the assets of a system
//! under assessment, CVSS v3.1 temporal scoring for attack feasibility,
//! weighted four-objective impact scoring, AND/OR attack trees with
//! minimal-cut-set enumeration, a 5x5 risk matrix, and disclosure events
//! that re-score threats into new, versioned model states.
//!
//! The `book/` directory of the repository walks through each stage with
//! runnable snippets; those snippets are compiled and run as doc-tests of
//! this crate.

pub mod cli;
pub mod cvss;
pub mod impact;
pub mod io;
pub mod model;
pub mod risk;
pub mod tree;
pub mod update;

pub use cvss::{base_score, parse_vector, temporal_score, MetricSet, Score, Severity};
pub use impact::{impact_rating, impact_score, ImpactRating, ImpactScore, ImpactVector, ImpactWeights};
pub use model::{validate, SecurityModel, Threat, ValidationReport};
pub use risk::{assess, risk_rating, RiskMatrix, RiskRating, RiskRegister};
pub use tree::{enumerate_paths, goal_feasibility, path_feasibility, AttackPath, AttackTree};
pub use update::{apply_event, diff, ingest_cve, ChangeReport, DisclosureEvent};

// The guide's code snippets double as doc-tests so the book cannot drift
// from the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/cvss.md")]
    pub struct CvssChapter;
    #[doc = include_str!("../../../book/src/impact.md")]
    pub struct ImpactChapter;
    #[doc = include_str!("../../../book/src/attack-trees.md")]
    pub struct AttackTreesChapter;
    #[doc = include_str!("../../../book/src/risk-matrix.md")]
    pub struct RiskMatrixChapter;
    #[doc = include_str!("../../../book/src/updates.md")]
    pub struct UpdatesChapter;
    #[doc = include_str!("../../../book/src/model.md")]
    pub struct ModelChapter;
}
