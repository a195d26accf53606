//! Cybersecurity capability maturity assessment engine.
//!
//! - [`catalog`]: domains, tiers, practices and metrics, plus validation.
//! - [`assessment`]: an organisation's ratings and evaluations.
//! - [`scoring`]: PIS, MAS, domain scores, weights, OMS and maturity levels,
//!   with a replayable trace.
//! - [`reporting`]: gaps, chart data, CSV and JSON export.
//! - [`store`]: flat-file persistence.

pub mod assessment;
pub mod catalog;
pub mod reporting;
pub mod scoring;
pub mod store;

pub use assessment::{Assessment, AssessmentError, Rating, RatingValue};
pub use catalog::{builtin_catalog, parse_catalog, validate_catalog, Catalog, TierLevel};
pub use scoring::{score_assessment, MaturityLevel, ScoreOptions, ScoreReport, ScoringError};
pub use store::{Store, StoreError};
