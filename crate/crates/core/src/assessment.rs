//! One organisation's assessment session against a pinned catalog.
//!
//! Ratings and evaluations are scoped cumulatively: a domain targeting
//! Intermediate accepts entries for Basic and Intermediate items only.
//! Lowering the target keeps entries above it in storage; they simply
//! fall out of scope until the target is raised again.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, Domain, DomainKind, MetricKind, TierLevel};
use crate::scoring::WeightProfile;

pub const ASSESSMENT_FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssessmentError {
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("domain `{0}` is a core domain; core domains are always included")]
    NotElective(String),
    #[error("elective `{0}` listed more than once")]
    DuplicateElective(String),
    #[error("domain `{0}` is not selected in this assessment")]
    DomainNotSelected(String),
    #[error("unknown practice `{practice_id}` in domain `{domain_id}`")]
    UnknownPractice {
        domain_id: String,
        practice_id: String,
    },
    #[error("unknown metric `{metric_id}` in domain `{domain_id}`")]
    UnknownMetric {
        domain_id: String,
        metric_id: String,
    },
    #[error(
        "`{item_id}` belongs to the {tier} tier, above the {target} target of domain `{domain_id}`"
    )]
    OutOfScope {
        domain_id: String,
        item_id: String,
        tier: TierLevel,
        target: TierLevel,
    },
    #[error("metric `{metric_id}` is {actual}, not {expected}")]
    WrongKind {
        metric_id: String,
        expected: MetricKind,
        actual: MetricKind,
    },
    #[error("points {0} outside 0..3")]
    InvalidPoints(u8),
    #[error("rating {0} outside 0..2")]
    InvalidRating(u8),
    #[error("measurement {value} for metric `{metric_id}` falls in no band")]
    UnmappedMeasurement { metric_id: String, value: f64 },
    #[error("assessment pins catalog {expected}, got {found}")]
    CatalogMismatch { expected: String, found: String },
    #[error("weight factor `{factor}` for domain `{domain_id}` is {value}, outside 1..3")]
    FactorOutOfRange {
        domain_id: String,
        factor: &'static str,
        value: u8,
    },
    #[error("invalid assessment: {0}")]
    Invalid(String),
}

/// Likert implementation level of a practice, worth 0, 1 or 2 points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum RatingValue {
    NotImplemented = 0,
    PartiallyImplemented = 1,
    FullyImplemented = 2,
}

impl RatingValue {
    pub const MAX_POINTS: u8 = 2;

    pub fn points(self) -> u8 {
        self as u8
    }

    pub fn label(self) -> &'static str {
        match self {
            RatingValue::NotImplemented => "Not Implemented",
            RatingValue::PartiallyImplemented => "Partially Implemented",
            RatingValue::FullyImplemented => "Fully Implemented",
        }
    }
}

impl TryFrom<u8> for RatingValue {
    type Error = AssessmentError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            0 => Ok(RatingValue::NotImplemented),
            1 => Ok(RatingValue::PartiallyImplemented),
            2 => Ok(RatingValue::FullyImplemented),
            other => Err(AssessmentError::InvalidRating(other)),
        }
    }
}

impl From<RatingValue> for u8 {
    fn from(value: RatingValue) -> Self {
        value.points()
    }
}

impl fmt::Display for RatingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rating {
    pub value: RatingValue,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Rating {
    pub fn new(value: RatingValue) -> Self {
        Rating { value, note: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Evaluation {
    pub points: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Evaluation {
    pub const MAX_POINTS: u8 = 3;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSelection {
    pub domain_id: String,
    pub target_tier: TierLevel,
    #[serde(default)]
    pub ratings: BTreeMap<String, Rating>,
    #[serde(default)]
    pub evaluations: BTreeMap<String, Evaluation>,
}

impl DomainSelection {
    fn new(domain_id: &str) -> Self {
        DomainSelection {
            domain_id: domain_id.to_owned(),
            target_tier: TierLevel::Basic,
            ratings: BTreeMap::new(),
            evaluations: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assessment {
    pub format_version: String,
    pub assessment_id: String,
    pub organisation: String,
    pub catalog_id: String,
    pub catalog_version: String,
    pub created: DateTime<Utc>,
    pub updated: DateTime<Utc>,
    /// Bumped by the store on every save; used for optimistic concurrency.
    #[serde(default)]
    pub entity_version: u64,
    pub selections: Vec<DomainSelection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_profile: Option<WeightProfile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainCompleteness {
    pub domain_id: String,
    pub target_tier: TierLevel,
    pub required_practices: usize,
    pub rated_practices: usize,
    pub required_metrics: usize,
    pub evaluated_metrics: usize,
    pub missing_practices: Vec<String>,
    pub missing_metrics: Vec<String>,
}

impl DomainCompleteness {
    pub fn is_complete(&self) -> bool {
        self.missing_practices.is_empty() && self.missing_metrics.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletenessSummary {
    pub domains: Vec<DomainCompleteness>,
    pub overall_complete: bool,
}

impl Assessment {
    /// Starts an assessment covering every core domain plus the named
    /// electives, all targeting Basic.
    pub fn create<S: AsRef<str>>(
        organisation: &str,
        catalog: &Catalog,
        elective_ids: &[S],
    ) -> Result<Self, AssessmentError> {
        if organisation.trim().is_empty() {
            return Err(AssessmentError::Invalid("organisation is empty".into()));
        }
        let mut chosen = HashSet::new();
        for id in elective_ids {
            let id = id.as_ref();
            let domain = catalog
                .domain(id)
                .ok_or_else(|| AssessmentError::UnknownDomain(id.to_owned()))?;
            if domain.kind == DomainKind::Core {
                return Err(AssessmentError::NotElective(id.to_owned()));
            }
            if !chosen.insert(id) {
                return Err(AssessmentError::DuplicateElective(id.to_owned()));
            }
        }
        let selections = catalog
            .domains
            .iter()
            .filter(|d| d.kind == DomainKind::Core || chosen.contains(d.domain_id.as_str()))
            .map(|d| DomainSelection::new(&d.domain_id))
            .collect();
        let now = Utc::now();
        Ok(Assessment {
            format_version: ASSESSMENT_FORMAT_VERSION.to_owned(),
            assessment_id: uuid::Uuid::new_v4().simple().to_string(),
            organisation: organisation.trim().to_owned(),
            catalog_id: catalog.catalog_id.clone(),
            catalog_version: catalog.version.clone(),
            created: now,
            updated: now,
            entity_version: 0,
            selections,
            weight_profile: None,
        })
    }

    pub fn catalog_ref(&self) -> String {
        format!("{}@{}", self.catalog_id, self.catalog_version)
    }

    pub fn ensure_catalog(&self, catalog: &Catalog) -> Result<(), AssessmentError> {
        if self.catalog_id == catalog.catalog_id && self.catalog_version == catalog.version {
            Ok(())
        } else {
            Err(AssessmentError::CatalogMismatch {
                expected: self.catalog_ref(),
                found: format!("{}@{}", catalog.catalog_id, catalog.version),
            })
        }
    }

    pub fn selection(&self, domain_id: &str) -> Option<&DomainSelection> {
        self.selections.iter().find(|s| s.domain_id == domain_id)
    }

    pub fn selected_domain_ids(&self) -> impl Iterator<Item = &str> {
        self.selections.iter().map(|s| s.domain_id.as_str())
    }

    fn touch(&mut self) {
        self.updated = Utc::now();
    }

    fn locate<'c>(
        &mut self,
        catalog: &'c Catalog,
        domain_id: &str,
    ) -> Result<(&'c Domain, &mut DomainSelection), AssessmentError> {
        self.ensure_catalog(catalog)?;
        let domain = catalog
            .domain(domain_id)
            .ok_or_else(|| AssessmentError::UnknownDomain(domain_id.to_owned()))?;
        let selection = self
            .selections
            .iter_mut()
            .find(|s| s.domain_id == domain_id)
            .ok_or_else(|| AssessmentError::DomainNotSelected(domain_id.to_owned()))?;
        Ok((domain, selection))
    }

    /// Returns whether the target changed. Setting the current target is a
    /// no-op and leaves `updated` untouched.
    pub fn set_target_tier(
        &mut self,
        catalog: &Catalog,
        domain_id: &str,
        tier: TierLevel,
    ) -> Result<bool, AssessmentError> {
        let (_, selection) = self.locate(catalog, domain_id)?;
        if selection.target_tier == tier {
            return Ok(false);
        }
        selection.target_tier = tier;
        self.touch();
        Ok(true)
    }

    pub fn rate_practice(
        &mut self,
        catalog: &Catalog,
        domain_id: &str,
        practice_id: &str,
        rating: Rating,
    ) -> Result<(), AssessmentError> {
        let (domain, selection) = self.locate(catalog, domain_id)?;
        let (tier, _) =
            domain
                .practice(practice_id)
                .ok_or_else(|| AssessmentError::UnknownPractice {
                    domain_id: domain_id.to_owned(),
                    practice_id: practice_id.to_owned(),
                })?;
        check_scope(selection, practice_id, tier)?;
        selection.ratings.insert(practice_id.to_owned(), rating);
        self.touch();
        Ok(())
    }

    /// Records a raw measurement and the points its band awards.
    pub fn evaluate_quantitative(
        &mut self,
        catalog: &Catalog,
        domain_id: &str,
        metric_id: &str,
        measured_value: f64,
        note: Option<String>,
    ) -> Result<u8, AssessmentError> {
        let (domain, selection) = self.locate(catalog, domain_id)?;
        let (tier, metric) = find_metric(domain, metric_id)?;
        if metric.kind != MetricKind::Quantitative {
            return Err(AssessmentError::WrongKind {
                metric_id: metric_id.to_owned(),
                expected: MetricKind::Quantitative,
                actual: metric.kind,
            });
        }
        check_scope(selection, metric_id, tier)?;
        let points = metric.points_for(measured_value).ok_or_else(|| {
            AssessmentError::UnmappedMeasurement {
                metric_id: metric_id.to_owned(),
                value: measured_value,
            }
        })?;
        selection.evaluations.insert(
            metric_id.to_owned(),
            Evaluation {
                points,
                measured_value: Some(measured_value),
                note,
            },
        );
        self.touch();
        Ok(points)
    }

    /// Records the rubric level chosen for a qualitative metric.
    pub fn evaluate_qualitative(
        &mut self,
        catalog: &Catalog,
        domain_id: &str,
        metric_id: &str,
        points: u8,
        note: Option<String>,
    ) -> Result<(), AssessmentError> {
        let (domain, selection) = self.locate(catalog, domain_id)?;
        let (tier, metric) = find_metric(domain, metric_id)?;
        if metric.kind != MetricKind::Qualitative {
            return Err(AssessmentError::WrongKind {
                metric_id: metric_id.to_owned(),
                expected: MetricKind::Qualitative,
                actual: metric.kind,
            });
        }
        check_scope(selection, metric_id, tier)?;
        if points > Evaluation::MAX_POINTS {
            return Err(AssessmentError::InvalidPoints(points));
        }
        selection.evaluations.insert(
            metric_id.to_owned(),
            Evaluation {
                points,
                measured_value: None,
                note,
            },
        );
        self.touch();
        Ok(())
    }

    /// Replaces the weight profile. A profile may be partial while the
    /// assessor fills it in; scoring requires it to cover every selection.
    pub fn set_weight_profile(
        &mut self,
        profile: Option<WeightProfile>,
    ) -> Result<(), AssessmentError> {
        if let Some(profile) = &profile {
            self.check_profile(profile)?;
        }
        self.weight_profile = profile;
        self.touch();
        Ok(())
    }

    fn check_profile(&self, profile: &WeightProfile) -> Result<(), AssessmentError> {
        for (domain_id, factors) in profile.iter() {
            if self.selection(domain_id).is_none() {
                return Err(AssessmentError::DomainNotSelected(domain_id.clone()));
            }
            if let Some((factor, value)) = factors.out_of_range() {
                return Err(AssessmentError::FactorOutOfRange {
                    domain_id: domain_id.clone(),
                    factor,
                    value,
                });
            }
        }
        Ok(())
    }

    /// Rated/evaluated counts over each domain's cumulative scope.
    pub fn completeness(&self, catalog: &Catalog) -> Result<CompletenessSummary, AssessmentError> {
        self.ensure_catalog(catalog)?;
        let mut domains = Vec::with_capacity(self.selections.len());
        for selection in &self.selections {
            let domain = catalog
                .domain(&selection.domain_id)
                .ok_or_else(|| AssessmentError::UnknownDomain(selection.domain_id.clone()))?;
            let mut entry = DomainCompleteness {
                domain_id: selection.domain_id.clone(),
                target_tier: selection.target_tier,
                required_practices: 0,
                rated_practices: 0,
                required_metrics: 0,
                evaluated_metrics: 0,
                missing_practices: Vec::new(),
                missing_metrics: Vec::new(),
            };
            for tier in domain.tiers_up_to(selection.target_tier) {
                for practice in &tier.practices {
                    entry.required_practices += 1;
                    if selection.ratings.contains_key(&practice.practice_id) {
                        entry.rated_practices += 1;
                    } else {
                        entry.missing_practices.push(practice.practice_id.clone());
                    }
                }
                for metric in &tier.metrics {
                    entry.required_metrics += 1;
                    if selection.evaluations.contains_key(&metric.metric_id) {
                        entry.evaluated_metrics += 1;
                    } else {
                        entry.missing_metrics.push(metric.metric_id.clone());
                    }
                }
            }
            domains.push(entry);
        }
        let overall_complete = domains.iter().all(DomainCompleteness::is_complete);
        Ok(CompletenessSummary {
            domains,
            overall_complete,
        })
    }

    /// Checks every stored-document invariant against the pinned catalog.
    pub fn check_invariants(&self, catalog: &Catalog) -> Result<(), AssessmentError> {
        self.ensure_catalog(catalog)?;
        if self.format_version != ASSESSMENT_FORMAT_VERSION {
            return Err(AssessmentError::Invalid(format!(
                "unsupported format_version `{}`",
                self.format_version
            )));
        }
        let mut seen = HashSet::new();
        for selection in &self.selections {
            let domain = catalog
                .domain(&selection.domain_id)
                .ok_or_else(|| AssessmentError::UnknownDomain(selection.domain_id.clone()))?;
            if !seen.insert(selection.domain_id.as_str()) {
                return Err(AssessmentError::Invalid(format!(
                    "domain `{}` selected twice",
                    selection.domain_id
                )));
            }
            for practice_id in selection.ratings.keys() {
                if domain.practice(practice_id).is_none() {
                    return Err(AssessmentError::UnknownPractice {
                        domain_id: domain.domain_id.clone(),
                        practice_id: practice_id.clone(),
                    });
                }
            }
            for (metric_id, evaluation) in &selection.evaluations {
                let (_, metric) = find_metric(domain, metric_id)?;
                if evaluation.points > Evaluation::MAX_POINTS {
                    return Err(AssessmentError::InvalidPoints(evaluation.points));
                }
                match (metric.kind, evaluation.measured_value) {
                    (MetricKind::Quantitative, Some(value)) => {
                        if metric.points_for(value) != Some(evaluation.points) {
                            return Err(AssessmentError::Invalid(format!(
                                "metric `{metric_id}` stores {} points but {value} maps to {:?}",
                                evaluation.points,
                                metric.points_for(value)
                            )));
                        }
                    }
                    (MetricKind::Quantitative, None) => {
                        return Err(AssessmentError::Invalid(format!(
                            "quantitative metric `{metric_id}` has no measured value"
                        )))
                    }
                    (MetricKind::Qualitative, Some(_)) => {
                        return Err(AssessmentError::Invalid(format!(
                            "qualitative metric `{metric_id}` carries a measured value"
                        )))
                    }
                    (MetricKind::Qualitative, None) => {}
                }
            }
        }
        if let Some(core) = catalog
            .core_domains()
            .find(|d| !seen.contains(d.domain_id.as_str()))
        {
            return Err(AssessmentError::Invalid(format!(
                "core domain `{}` is not selected",
                core.domain_id
            )));
        }
        if let Some(profile) = &self.weight_profile {
            self.check_profile(profile)?;
        }
        Ok(())
    }
}

fn find_metric<'c>(
    domain: &'c Domain,
    metric_id: &str,
) -> Result<(TierLevel, &'c crate::catalog::Metric), AssessmentError> {
    domain
        .metric(metric_id)
        .ok_or_else(|| AssessmentError::UnknownMetric {
            domain_id: domain.domain_id.clone(),
            metric_id: metric_id.to_owned(),
        })
}

fn check_scope(
    selection: &DomainSelection,
    item_id: &str,
    tier: TierLevel,
) -> Result<(), AssessmentError> {
    if tier > selection.target_tier {
        return Err(AssessmentError::OutOfScope {
            domain_id: selection.domain_id.clone(),
            item_id: item_id.to_owned(),
            tier,
            target: selection.target_tier,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin_catalog;
    use crate::scoring::FactorScores;

    fn fresh(electives: &[&str]) -> (Catalog, Assessment) {
        let catalog = builtin_catalog();
        let assessment = Assessment::create("Acme", &catalog, electives).unwrap();
        (catalog, assessment)
    }

    #[test]
    fn cores_only_by_default() {
        let (_, a) = fresh(&[]);
        assert_eq!(a.selections.len(), 7);
        assert!(a
            .selections
            .iter()
            .all(|s| s.target_tier == TierLevel::Basic));
        assert!(a
            .selections
            .iter()
            .all(|s| s.ratings.is_empty() && s.evaluations.is_empty()));
    }

    #[test]
    fn electives_are_added_in_catalog_order() {
        let (catalog, a) = fresh(&["cloud-security"]);
        assert_eq!(a.selections.len(), 8);
        let positions: Vec<usize> = a
            .selected_domain_ids()
            .map(|id| catalog.position(id).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn create_rejects_bad_electives() {
        let catalog = builtin_catalog();
        assert_eq!(
            Assessment::create("Acme", &catalog, &["risk-management"]).unwrap_err(),
            AssessmentError::NotElective("risk-management".into())
        );
        assert_eq!(
            Assessment::create("Acme", &catalog, &["nope"]).unwrap_err(),
            AssessmentError::UnknownDomain("nope".into())
        );
        assert_eq!(
            Assessment::create("Acme", &catalog, &["cloud-security", "cloud-security"])
                .unwrap_err(),
            AssessmentError::DuplicateElective("cloud-security".into())
        );
    }

    #[test]
    fn target_tier_widens_scope() {
        let (catalog, mut a) = fresh(&[]);
        let domain = catalog.domain("data-security").unwrap();
        let expected: usize = domain.tiers.iter().map(|t| t.practices.len()).sum();
        assert!(a
            .set_target_tier(&catalog, "data-security", TierLevel::Advanced)
            .unwrap());
        let summary = a.completeness(&catalog).unwrap();
        let ds = summary
            .domains
            .iter()
            .find(|d| d.domain_id == "data-security")
            .unwrap();
        assert_eq!(ds.required_practices, expected);
    }

    #[test]
    fn same_tier_is_a_noop() {
        let (catalog, mut a) = fresh(&[]);
        let before = a.updated;
        assert!(!a
            .set_target_tier(&catalog, "data-security", TierLevel::Basic)
            .unwrap());
        assert_eq!(a.updated, before);
    }

    #[test]
    fn lowering_tier_retains_ratings_outside_scope() {
        let (catalog, mut a) = fresh(&[]);
        a.set_target_tier(&catalog, "data-security", TierLevel::Advanced)
            .unwrap();
        a.rate_practice(
            &catalog,
            "data-security",
            "ds-advanced-1",
            Rating::new(RatingValue::FullyImplemented),
        )
        .unwrap();
        a.set_target_tier(&catalog, "data-security", TierLevel::Basic)
            .unwrap();
        let sel = a.selection("data-security").unwrap();
        assert!(sel.ratings.contains_key("ds-advanced-1"));
        let summary = a.completeness(&catalog).unwrap();
        let ds = summary
            .domains
            .iter()
            .find(|d| d.domain_id == "data-security")
            .unwrap();
        assert_eq!(ds.rated_practices, 0);
        assert_eq!(ds.required_practices, 3);
        assert!(a.check_invariants(&catalog).is_ok());
    }

    #[test]
    fn rating_rules() {
        let (catalog, mut a) = fresh(&[]);
        a.rate_practice(
            &catalog,
            "data-security",
            "ds-basic-1",
            Rating::new(RatingValue::PartiallyImplemented),
        )
        .unwrap();
        a.rate_practice(
            &catalog,
            "data-security",
            "ds-basic-1",
            Rating::new(RatingValue::FullyImplemented),
        )
        .unwrap();
        let sel = a.selection("data-security").unwrap();
        assert_eq!(sel.ratings.len(), 1);
        assert_eq!(sel.ratings["ds-basic-1"].value.points(), 2);

        let err = a
            .rate_practice(
                &catalog,
                "data-security",
                "ds-advanced-1",
                Rating::new(RatingValue::FullyImplemented),
            )
            .unwrap_err();
        assert!(matches!(
            err,
            AssessmentError::OutOfScope {
                tier: TierLevel::Advanced,
                ..
            }
        ));
        let err = a
            .rate_practice(
                &catalog,
                "data-security",
                "nope",
                Rating::new(RatingValue::FullyImplemented),
            )
            .unwrap_err();
        assert!(matches!(err, AssessmentError::UnknownPractice { .. }));
        let err = a
            .rate_practice(
                &catalog,
                "cloud-security",
                "cs-basic-1",
                Rating::new(RatingValue::FullyImplemented),
            )
            .unwrap_err();
        assert_eq!(
            err,
            AssessmentError::DomainNotSelected("cloud-security".into())
        );
        assert_eq!(
            RatingValue::try_from(3),
            Err(AssessmentError::InvalidRating(3))
        );
    }

    #[test]
    fn quantitative_evaluation_uses_bands() {
        let (catalog, mut a) = fresh(&[]);
        for (value, points) in [
            (92.0, 3),
            (75.0, 2),
            (90.0, 3),
            (89.0, 2),
            (70.0, 2),
            (55.0, 1),
            (10.0, 0),
        ] {
            let got = a
                .evaluate_quantitative(
                    &catalog,
                    "data-security",
                    "encryption-coverage",
                    value,
                    None,
                )
                .unwrap();
            assert_eq!(got, points, "measured {value}");
        }
        let eval = &a.selection("data-security").unwrap().evaluations["encryption-coverage"];
        assert_eq!(eval.measured_value, Some(10.0));
        let err = a
            .evaluate_quantitative(
                &catalog,
                "data-security",
                "encryption-coverage",
                f64::NAN,
                None,
            )
            .unwrap_err();
        assert!(matches!(err, AssessmentError::UnmappedMeasurement { .. }));
        let err = a
            .evaluate_quantitative(
                &catalog,
                "cybersecurity-culture-awareness-training",
                "employee-understanding",
                3.0,
                None,
            )
            .unwrap_err();
        assert!(matches!(err, AssessmentError::WrongKind { .. }));
    }

    #[test]
    fn qualitative_evaluation_rules() {
        let (catalog, mut a) = fresh(&[]);
        let domain = "cybersecurity-culture-awareness-training";
        a.evaluate_qualitative(&catalog, domain, "employee-understanding", 3, None)
            .unwrap();
        assert_eq!(
            a.selection(domain).unwrap().evaluations["employee-understanding"].points,
            3
        );
        a.evaluate_qualitative(&catalog, domain, "employee-understanding", 2, None)
            .unwrap();
        assert_eq!(
            a.selection(domain).unwrap().evaluations["employee-understanding"].points,
            2
        );
        assert_eq!(
            a.evaluate_qualitative(&catalog, domain, "employee-understanding", 4, None)
                .unwrap_err(),
            AssessmentError::InvalidPoints(4)
        );
        let err = a
            .evaluate_qualitative(&catalog, "data-security", "encryption-coverage", 3, None)
            .unwrap_err();
        assert!(matches!(err, AssessmentError::WrongKind { .. }));
        let err = a
            .evaluate_qualitative(&catalog, domain, "culture-measurement", 3, None)
            .unwrap_err();
        assert!(matches!(err, AssessmentError::OutOfScope { .. }));
    }

    #[test]
    fn completeness_tracks_every_item() {
        let (catalog, mut a) = fresh(&[]);
        let summary = a.completeness(&catalog).unwrap();
        assert!(!summary.overall_complete);
        assert!(summary
            .domains
            .iter()
            .all(|d| d.rated_practices == 0 && d.required_practices > 0));

        let ids: Vec<String> = a.selected_domain_ids().map(str::to_owned).collect();
        for id in &ids {
            let domain = catalog.domain(id).unwrap();
            for p in &domain.tiers[0].practices {
                a.rate_practice(
                    &catalog,
                    id,
                    &p.practice_id,
                    Rating::new(RatingValue::FullyImplemented),
                )
                .unwrap();
            }
        }
        let summary = a.completeness(&catalog).unwrap();
        assert!(!summary.overall_complete);
        assert!(summary
            .domains
            .iter()
            .all(|d| d.missing_practices.is_empty()));

        for id in &ids {
            let domain = catalog.domain(id).unwrap();
            for m in &domain.tiers[0].metrics {
                match m.kind {
                    MetricKind::Qualitative => a
                        .evaluate_qualitative(&catalog, id, &m.metric_id, 1, None)
                        .unwrap(),
                    MetricKind::Quantitative => {
                        a.evaluate_quantitative(&catalog, id, &m.metric_id, 50.0, None)
                            .unwrap();
                    }
                }
            }
        }
        assert!(a.completeness(&catalog).unwrap().overall_complete);
    }

    #[test]
    fn catalog_mismatch_is_detected() {
        let (mut catalog, a) = fresh(&[]);
        catalog.version = "9.9.9".into();
        assert!(matches!(
            a.completeness(&catalog),
            Err(AssessmentError::CatalogMismatch { .. })
        ));
    }

    #[test]
    fn weight_profile_checks() {
        let (catalog, mut a) = fresh(&[]);
        let mut profile = WeightProfile::default();
        profile.insert("cloud-security", FactorScores::new(1, 1, 1, 1));
        assert!(matches!(
            a.set_weight_profile(Some(profile)),
            Err(AssessmentError::DomainNotSelected(_))
        ));
        let mut profile = WeightProfile::default();
        profile.insert("data-security", FactorScores::new(1, 4, 1, 1));
        assert!(matches!(
            a.set_weight_profile(Some(profile)),
            Err(AssessmentError::FactorOutOfRange {
                factor: "compliance_requirement",
                ..
            })
        ));
        let mut profile = WeightProfile::default();
        profile.insert("data-security", FactorScores::new(3, 3, 3, 3));
        a.set_weight_profile(Some(profile)).unwrap();
        assert!(a.check_invariants(&catalog).is_ok());
    }

    #[test]
    fn invariant_check_catches_tampering() {
        let (catalog, mut a) = fresh(&[]);
        a.evaluate_quantitative(&catalog, "data-security", "encryption-coverage", 92.0, None)
            .unwrap();
        let mut tampered = a.clone();
        tampered
            .selections
            .iter_mut()
            .find(|s| s.domain_id == "data-security")
            .unwrap()
            .evaluations
            .get_mut("encryption-coverage")
            .unwrap()
            .points = 1;
        assert!(tampered.check_invariants(&catalog).is_err());

        let mut missing_core = a.clone();
        missing_core.selections.remove(0);
        assert!(missing_core.check_invariants(&catalog).is_err());
        assert!(a.check_invariants(&catalog).is_ok());
    }

    #[test]
    fn rating_values_serialise_as_integers() {
        let rating = Rating::new(RatingValue::PartiallyImplemented);
        assert_eq!(serde_json::to_string(&rating).unwrap(), r#"{"value":1}"#);
        assert!(serde_json::from_str::<Rating>(r#"{"value":5}"#).is_err());
    }
}
