//! Maturity scoring.
//!
//! Per domain, the practice implementation score (PIS) normalises the Likert
//! points of every practice up to the target tier by their maximum, the
//! metric achievement score (MAS) does the same for metric points, and the
//! domain score (DS) is their mean. Domain scores are combined into the
//! overall maturity score (OMS) with Weighted Sum Model weights. Scores are
//! compared against level thresholds unrounded; rounding happens only in
//! display strings.
//!
//! Every figure in a [`ScoreReport`] is also recorded as a step in its
//! [`ScoreTrace`], which can be replayed independently.

mod trace;
mod weights;

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::assessment::{Assessment, DomainSelection, Evaluation, RatingValue};
use crate::catalog::{Catalog, Domain, TierLevel};

pub use trace::{ItemPoints, ScoreTrace, TierPoints, TraceError, TraceStep, WeightedTerm};
pub use weights::{derive_weights, normalise_totals, DomainWeight, FactorScores, WeightProfile};

/// Highest score still classed as Initial.
pub const INITIAL_MAX: f64 = 33.0;
/// Highest score still classed as Managed.
pub const MANAGED_MAX: f64 = 66.0;

/// Tolerance on the sum of weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("assessment pins catalog {expected}, got {found}")]
    CatalogMismatch { expected: String, found: String },
    #[error("assessment incomplete: {} item(s) unrated or unevaluated", missing.len())]
    Incomplete { missing: Vec<MissingItem> },
    #[error("unrated practices: {}", .0.join(", "))]
    MissingRatings(Vec<String>),
    #[error("unevaluated metrics: {}", .0.join(", "))]
    MissingEvaluations(Vec<String>),
    #[error("domain `{0}` has no practices or metrics in scope")]
    EmptyScope(String),
    #[error("stored points {points} for `{item_id}` exceed the maximum")]
    InvalidPoints { item_id: String, points: u8 },
    #[error("score {0} outside 0..100")]
    OutOfRange(f64),
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("weight profile is missing domain `{0}`")]
    MissingDomain(String),
    #[error("weight profile names unselected domain `{0}`")]
    ExtraDomain(String),
    #[error("weight factor `{factor}` for domain `{domain_id}` is {value}, outside 1..3")]
    FactorOutOfRange {
        domain_id: String,
        factor: &'static str,
        value: u8,
    },
    #[error("weights sum to {0}, not 1")]
    WeightSumInvalid(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Practice,
    Metric,
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ItemKind::Practice => "practice",
            ItemKind::Metric => "metric",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissingItem {
    pub domain_id: String,
    pub kind: ItemKind,
    pub item_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MaturityLevel {
    Initial,
    Managed,
    Optimized,
}

impl fmt::Display for MaturityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MaturityLevel::Initial => "Initial",
            MaturityLevel::Managed => "Managed",
            MaturityLevel::Optimized => "Optimized",
        })
    }
}

/// A full-precision score that serialises alongside its two-decimal
/// display string: `{"value": 68.33333333333333, "display": "68.33"}`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Score(pub f64);

impl Score {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn display(self) -> String {
        round_half_up_2dp(self.0)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

#[derive(Serialize, Deserialize)]
struct ScoreRepr {
    value: f64,
    display: String,
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ScoreRepr {
            value: self.0,
            display: self.display(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        ScoreRepr::deserialize(deserializer).map(|r| Score(r.value))
    }
}

/// Rounds half-up to two decimals on the shortest decimal form of `x`, so
/// 0.285 displays as "0.29" even though its binary value sits just below.
pub fn round_half_up_2dp(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let negative = x < 0.0;
    let text = format!("{}", x.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes().chain(std::iter::repeat(b'0')).take(2))
        .map(|b| b - b'0')
        .collect();
    if frac_part.as_bytes().get(2).is_some_and(|&d| d >= b'5') {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 2;
    let int_digits: String = digits[..split]
        .iter()
        .map(|d| char::from(b'0' + d))
        .collect();
    let frac_digits: String = digits[split..]
        .iter()
        .map(|d| char::from(b'0' + d))
        .collect();
    let is_zero = digits.iter().all(|&d| d == 0);
    format!(
        "{}{}.{}",
        if negative && !is_zero { "-" } else { "" },
        int_digits,
        frac_digits
    )
}

/// Points earned by one scored component (practices or metrics) of a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentScore {
    pub score: f64,
    pub numerator: u32,
    pub denominator: u32,
    pub tiers: Vec<TierPoints>,
}

impl ComponentScore {
    pub fn imputed(&self) -> impl Iterator<Item = &str> {
        self.tiers
            .iter()
            .flat_map(|t| t.items.iter())
            .filter(|i| i.imputed)
            .map(|i| i.item_id.as_str())
    }
}

/// `100 × earned / (max_points × item_count)`. The product is formed in
/// integers so the only rounding is the final division.
pub fn normalised_percentage(numerator: u32, denominator: u32) -> f64 {
    f64::from(100 * numerator) / f64::from(denominator)
}

fn component_score(
    tiers: Vec<TierPoints>,
    max_points: u8,
    domain_id: &str,
) -> Result<ComponentScore, ScoringError> {
    let numerator: u32 = tiers.iter().map(|t| t.subtotal).sum();
    let count: u32 = tiers.iter().map(|t| t.count).sum();
    if count == 0 {
        return Err(ScoringError::EmptyScope(domain_id.to_owned()));
    }
    let denominator = u32::from(max_points) * count;
    Ok(ComponentScore {
        score: normalised_percentage(numerator, denominator),
        numerator,
        denominator,
        tiers,
    })
}

/// Practice implementation score over Basic..target tiers. Without
/// `missing_as_zero`, every in-scope practice must be rated.
pub fn practice_implementation_score(
    selection: &DomainSelection,
    domain: &Domain,
    missing_as_zero: bool,
) -> Result<ComponentScore, ScoringError> {
    let mut missing = Vec::new();
    let mut tiers = Vec::new();
    for tier in domain.tiers_up_to(selection.target_tier) {
        let items: Vec<ItemPoints> = tier
            .practices
            .iter()
            .map(|p| match selection.ratings.get(&p.practice_id) {
                Some(r) => ItemPoints::scored(&p.practice_id, r.value.points()),
                None => {
                    missing.push(p.practice_id.clone());
                    ItemPoints::imputed(&p.practice_id)
                }
            })
            .collect();
        tiers.push(TierPoints::new(tier.level, items));
    }
    if !missing.is_empty() && !missing_as_zero {
        return Err(ScoringError::MissingRatings(missing));
    }
    component_score(
        tiers,
        RatingValue::FullyImplemented.points(),
        &domain.domain_id,
    )
}

/// Metric achievement score over Basic..target tiers. Without
/// `missing_as_zero`, every in-scope metric must be evaluated.
pub fn metric_achievement_score(
    selection: &DomainSelection,
    domain: &Domain,
    missing_as_zero: bool,
) -> Result<ComponentScore, ScoringError> {
    let mut missing = Vec::new();
    let mut tiers = Vec::new();
    for tier in domain.tiers_up_to(selection.target_tier) {
        let mut items = Vec::with_capacity(tier.metrics.len());
        for m in &tier.metrics {
            match selection.evaluations.get(&m.metric_id) {
                Some(e) if e.points > Evaluation::MAX_POINTS => {
                    return Err(ScoringError::InvalidPoints {
                        item_id: m.metric_id.clone(),
                        points: e.points,
                    })
                }
                Some(e) => items.push(ItemPoints::scored(&m.metric_id, e.points)),
                None => {
                    missing.push(m.metric_id.clone());
                    items.push(ItemPoints::imputed(&m.metric_id));
                }
            }
        }
        tiers.push(TierPoints::new(tier.level, items));
    }
    if !missing.is_empty() && !missing_as_zero {
        return Err(ScoringError::MissingEvaluations(missing));
    }
    component_score(tiers, Evaluation::MAX_POINTS, &domain.domain_id)
}

pub fn domain_score(pis: f64, mas: f64) -> f64 {
    (pis + mas) / 2.0
}

/// Level thresholds: Initial up to and including 33, Managed up to and
/// including 66, Optimized above.
pub fn maturity_level(score: f64) -> Result<MaturityLevel, ScoringError> {
    if !(0.0..=100.0).contains(&score) {
        return Err(ScoringError::OutOfRange(score));
    }
    Ok(if score <= INITIAL_MAX {
        MaturityLevel::Initial
    } else if score <= MANAGED_MAX {
        MaturityLevel::Managed
    } else {
        MaturityLevel::Optimized
    })
}

/// Weighted sum of domain scores, clamped into `[min ds, max ds]`.
///
/// The clamp only absorbs floating-point rounding (weights that sum to
/// 1 ± a few ulps); it never moves the sum by more than that.
pub fn weighted_sum(terms: &[(f64, f64)]) -> Result<WeightedSum, ScoringError> {
    let weight_sum = terms.iter().fold(0.0, |acc, (w, _)| acc + w);
    if terms.is_empty() || (weight_sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(ScoringError::WeightSumInvalid(weight_sum));
    }
    for &(_, ds) in terms {
        if !(0.0..=100.0).contains(&ds) {
            return Err(ScoringError::OutOfRange(ds));
        }
    }
    let products: Vec<f64> = terms.iter().map(|(w, ds)| w * ds).collect();
    let sum = products.iter().fold(0.0, |acc, p| acc + p);
    let min_ds = terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let max_ds = terms.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(WeightedSum {
        products,
        sum,
        min_ds,
        max_ds,
        result: sum.clamp(min_ds, max_ds),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSum {
    pub products: Vec<f64>,
    pub sum: f64,
    pub min_ds: f64,
    pub max_ds: f64,
    pub result: f64,
}

/// OMS and its level from `(weight, domain score)` pairs.
pub fn overall_maturity_score(terms: &[(f64, f64)]) -> Result<(f64, MaturityLevel), ScoringError> {
    let oms = weighted_sum(terms)?.result;
    Ok((oms, maturity_level(oms)?))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOptions {
    /// Score unrated practices and unevaluated metrics as 0 points instead
    /// of refusing. Imputed items are flagged in the trace.
    pub missing_as_zero: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    Profile,
    DefaultEqualWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainScoreBreakdown {
    pub domain_id: String,
    pub name: String,
    pub target_tier: TierLevel,
    pub pis: Score,
    pub pis_numerator: u32,
    pub pis_denominator: u32,
    pub mas: Score,
    pub mas_numerator: u32,
    pub mas_denominator: u32,
    pub ds: Score,
    pub level: MaturityLevel,
    pub weight: Score,
    /// `weight × 100`, for percentage display.
    pub weight_percent: Score,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub imputed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub assessment_id: String,
    pub organisation: String,
    pub catalog_id: String,
    pub catalog_version: String,
    pub generated_at: DateTime<Utc>,
    pub options: ScoreOptions,
    pub weight_source: WeightSource,
    pub domains: Vec<DomainScoreBreakdown>,
    pub oms: Score,
    pub overall_level: MaturityLevel,
    pub trace: ScoreTrace,
}

impl ScoreReport {
    /// Canonical JSON shared by the CLI and the HTTP API.
    pub fn to_canonical_json(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("report serialises");
        bytes.push(b'\n');
        bytes
    }

    pub fn domain(&self, domain_id: &str) -> Option<&DomainScoreBreakdown> {
        self.domains.iter().find(|d| d.domain_id == domain_id)
    }
}

/// Scores every selected domain and the organisation as a whole.
pub fn score_assessment(
    assessment: &Assessment,
    catalog: &Catalog,
    options: ScoreOptions,
) -> Result<ScoreReport, ScoringError> {
    if assessment.catalog_id != catalog.catalog_id || assessment.catalog_version != catalog.version
    {
        return Err(ScoringError::CatalogMismatch {
            expected: assessment.catalog_ref(),
            found: format!("{}@{}", catalog.catalog_id, catalog.version),
        });
    }

    let mut ordered: Vec<(&DomainSelection, &Domain, usize)> = Vec::new();
    for selection in &assessment.selections {
        let position = catalog
            .position(&selection.domain_id)
            .ok_or_else(|| ScoringError::UnknownDomain(selection.domain_id.clone()))?;
        ordered.push((selection, &catalog.domains[position], position));
    }
    ordered.sort_by_key(|(_, _, position)| *position);

    if !options.missing_as_zero {
        let missing = missing_items(&ordered);
        if !missing.is_empty() {
            return Err(ScoringError::Incomplete { missing });
        }
    }

    let mut steps = Vec::new();
    let mut partial = Vec::with_capacity(ordered.len());
    for (selection, domain, _) in &ordered {
        let pis = practice_implementation_score(selection, domain, options.missing_as_zero)?;
        let mas = metric_achievement_score(selection, domain, options.missing_as_zero)?;
        let ds = domain_score(pis.score, mas.score);
        let level = maturity_level(ds)?;
        let imputed: Vec<String> = pis
            .imputed()
            .chain(mas.imputed())
            .map(str::to_owned)
            .collect();

        steps.push(TraceStep::PracticeImplementation {
            domain_id: domain.domain_id.clone(),
            target_tier: selection.target_tier,
            tiers: pis.tiers.clone(),
            numerator: pis.numerator,
            denominator: pis.denominator,
            result: pis.score,
        });
        steps.push(TraceStep::MetricAchievement {
            domain_id: domain.domain_id.clone(),
            target_tier: selection.target_tier,
            tiers: mas.tiers.clone(),
            numerator: mas.numerator,
            denominator: mas.denominator,
            result: mas.score,
        });
        steps.push(TraceStep::DomainScore {
            domain_id: domain.domain_id.clone(),
            pis: pis.score,
            mas: mas.score,
            result: ds,
        });
        steps.push(TraceStep::DomainLevel {
            domain_id: domain.domain_id.clone(),
            score: ds,
            level,
        });
        partial.push((selection, domain, pis, mas, ds, level, imputed));
    }

    let domain_ids: Vec<&str> = ordered
        .iter()
        .map(|(_, d, _)| d.domain_id.as_str())
        .collect();
    let (weights, weight_source) = match &assessment.weight_profile {
        Some(profile) => {
            let weights = derive_weights(profile, &domain_ids)?;
            let grand_total: u32 = weights.iter().map(|w| w.total).sum();
            for w in &weights {
                steps.push(TraceStep::FactorTotal {
                    domain_id: w.domain_id.clone(),
                    factors: *profile
                        .get(&w.domain_id)
                        .expect("derive_weights checked coverage"),
                    total: w.total,
                });
            }
            for w in &weights {
                steps.push(TraceStep::Weight {
                    domain_id: w.domain_id.clone(),
                    total: w.total,
                    grand_total,
                    result: w.weight,
                });
            }
            (
                weights.into_iter().map(|w| w.weight).collect::<Vec<_>>(),
                WeightSource::Profile,
            )
        }
        None => {
            let count = u32::try_from(domain_ids.len()).expect("domain count fits u32");
            let weight = 1.0 / f64::from(count);
            steps.push(TraceStep::DefaultEqualWeights {
                domain_count: count,
                result: weight,
            });
            (
                vec![weight; domain_ids.len()],
                WeightSource::DefaultEqualWeights,
            )
        }
    };

    let terms: Vec<(f64, f64)> = weights
        .iter()
        .zip(&partial)
        .map(|(w, p)| (*w, p.4))
        .collect();
    let sum = weighted_sum(&terms)?;
    let overall_level = maturity_level(sum.result)?;
    steps.push(TraceStep::WeightedSum {
        terms: partial
            .iter()
            .zip(&terms)
            .zip(&sum.products)
            .map(|((p, (w, ds)), product)| WeightedTerm {
                domain_id: p.1.domain_id.clone(),
                weight: *w,
                ds: *ds,
                product: *product,
            })
            .collect(),
        sum: sum.sum,
        min_ds: sum.min_ds,
        max_ds: sum.max_ds,
        result: sum.result,
    });
    steps.push(TraceStep::OverallLevel {
        score: sum.result,
        level: overall_level,
    });

    let domains = partial
        .into_iter()
        .zip(&weights)
        .map(
            |((selection, domain, pis, mas, ds, level, imputed), weight)| DomainScoreBreakdown {
                domain_id: domain.domain_id.clone(),
                name: domain.name.clone(),
                target_tier: selection.target_tier,
                pis: Score(pis.score),
                pis_numerator: pis.numerator,
                pis_denominator: pis.denominator,
                mas: Score(mas.score),
                mas_numerator: mas.numerator,
                mas_denominator: mas.denominator,
                ds: Score(ds),
                level,
                weight: Score(*weight),
                weight_percent: Score(weight * 100.0),
                imputed,
            },
        )
        .collect();

    Ok(ScoreReport {
        assessment_id: assessment.assessment_id.clone(),
        organisation: assessment.organisation.clone(),
        catalog_id: catalog.catalog_id.clone(),
        catalog_version: catalog.version.clone(),
        generated_at: Utc::now(),
        options,
        weight_source,
        domains,
        oms: Score(sum.result),
        overall_level,
        trace: ScoreTrace { steps },
    })
}

fn missing_items(ordered: &[(&DomainSelection, &Domain, usize)]) -> Vec<MissingItem> {
    let mut missing = Vec::new();
    for (selection, domain, _) in ordered {
        for tier in domain.tiers_up_to(selection.target_tier) {
            for p in &tier.practices {
                if !selection.ratings.contains_key(&p.practice_id) {
                    missing.push(MissingItem {
                        domain_id: domain.domain_id.clone(),
                        kind: ItemKind::Practice,
                        item_id: p.practice_id.clone(),
                    });
                }
            }
        }
        for tier in domain.tiers_up_to(selection.target_tier) {
            for m in &tier.metrics {
                if !selection.evaluations.contains_key(&m.metric_id) {
                    missing.push(MissingItem {
                        domain_id: domain.domain_id.clone(),
                        kind: ItemKind::Metric,
                        item_id: m.metric_id.clone(),
                    });
                }
            }
        }
    }
    missing
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assessment::{Rating, RatingValue};
    use crate::catalog::{builtin_catalog, Metric, MetricKind, Practice, Rubric, Tier};

    fn practice(id: &str) -> Practice {
        Practice {
            practice_id: id.into(),
            statement: format!("practice {id}"),
        }
    }

    fn metric(id: &str) -> Metric {
        Metric {
            metric_id: id.into(),
            description: format!("metric {id}"),
            kind: MetricKind::Qualitative,
            unit: None,
            direction: None,
            bands: None,
            rubric: Some(Rubric {
                three: "a".into(),
                two: "b".into(),
                one: "c".into(),
                zero: "d".into(),
            }),
        }
    }

    fn domain(practices: [&[&str]; 3], metrics: [&[&str]; 3]) -> Domain {
        Domain {
            domain_id: "d".into(),
            name: "D".into(),
            kind: crate::catalog::DomainKind::Core,
            description: String::new(),
            tiers: TierLevel::ALL
                .iter()
                .enumerate()
                .map(|(i, &level)| Tier {
                    level,
                    practices: practices[i].iter().map(|id| practice(id)).collect(),
                    metrics: metrics[i].iter().map(|id| metric(id)).collect(),
                })
                .collect(),
        }
    }

    fn selection(
        target: TierLevel,
        ratings: &[(&str, u8)],
        evals: &[(&str, u8)],
    ) -> DomainSelection {
        DomainSelection {
            domain_id: "d".into(),
            target_tier: target,
            ratings: ratings
                .iter()
                .map(|(id, v)| {
                    (
                        id.to_string(),
                        Rating::new(RatingValue::try_from(*v).unwrap()),
                    )
                })
                .collect(),
            evaluations: evals
                .iter()
                .map(|(id, p)| {
                    (
                        id.to_string(),
                        Evaluation {
                            points: *p,
                            measured_value: None,
                            note: None,
                        },
                    )
                })
                .collect(),
        }
    }

    #[test]
    fn pis_over_cumulative_tiers() {
        let d = domain(
            [&["b1", "b2", "b3"], &["i1", "i2"], &["a1"]],
            [&["m1"], &["m2"], &["m3"]],
        );
        let s = selection(
            TierLevel::Intermediate,
            &[
                ("b1", 2),
                ("b2", 1),
                ("b3", 0),
                ("i1", 2),
                ("i2", 2),
                ("a1", 0),
            ],
            &[],
        );
        let pis = practice_implementation_score(&s, &d, false).unwrap();
        assert_eq!((pis.numerator, pis.denominator), (7, 10));
        assert_eq!(pis.score, 70.0);
        assert_eq!(pis.tiers.len(), 2);
    }

    #[test]
    fn pis_extremes() {
        let d = domain(
            [&["b1", "b2"], &["i1"], &["a1"]],
            [&["m1"], &["m2"], &["m3"]],
        );
        let zeros = selection(TierLevel::Basic, &[("b1", 0), ("b2", 0)], &[]);
        assert_eq!(
            practice_implementation_score(&zeros, &d, false)
                .unwrap()
                .score,
            0.0
        );
        let full = selection(TierLevel::Basic, &[("b1", 2), ("b2", 2)], &[]);
        assert_eq!(
            practice_implementation_score(&full, &d, false)
                .unwrap()
                .score,
            100.0
        );
    }

    #[test]
    fn pis_strict_lists_unrated() {
        let d = domain(
            [&["b1", "b2"], &["i1"], &["a1"]],
            [&["m1"], &["m2"], &["m3"]],
        );
        let s = selection(TierLevel::Intermediate, &[("b1", 2)], &[]);
        assert_eq!(
            practice_implementation_score(&s, &d, false).unwrap_err(),
            ScoringError::MissingRatings(vec!["b2".into(), "i1".into()])
        );
        let lenient = practice_implementation_score(&s, &d, true).unwrap();
        assert_eq!((lenient.numerator, lenient.denominator), (2, 6));
        assert_eq!(lenient.imputed().collect::<Vec<_>>(), vec!["b2", "i1"]);
    }

    #[test]
    fn mas_over_cumulative_tiers() {
        let d = domain(
            [&["b1"], &["i1"], &["a1"]],
            [&["m1", "m2", "m3"], &["m4"], &["m5"]],
        );
        let s = selection(TierLevel::Basic, &[], &[("m1", 3), ("m2", 2), ("m3", 1)]);
        let mas = metric_achievement_score(&s, &d, false).unwrap();
        assert_eq!((mas.numerator, mas.denominator), (6, 9));
        assert!((mas.score - 200.0 / 3.0).abs() < 1e-12);
        let all3 = selection(TierLevel::Basic, &[], &[("m1", 3), ("m2", 3), ("m3", 3)]);
        assert_eq!(
            metric_achievement_score(&all3, &d, false).unwrap().score,
            100.0
        );
        let all0 = selection(TierLevel::Basic, &[], &[("m1", 0), ("m2", 0), ("m3", 0)]);
        assert_eq!(
            metric_achievement_score(&all0, &d, false).unwrap().score,
            0.0
        );
        let missing = selection(TierLevel::Basic, &[], &[("m1", 0)]);
        assert_eq!(
            metric_achievement_score(&missing, &d, false).unwrap_err(),
            ScoringError::MissingEvaluations(vec!["m2".into(), "m3".into()])
        );
    }

    #[test]
    fn domain_score_is_the_mean() {
        assert!((domain_score(70.0, 200.0 / 3.0) - 205.0 / 3.0).abs() < 1e-12);
        assert_eq!(domain_score(0.0, 0.0), 0.0);
        assert_eq!(domain_score(100.0, 100.0), 100.0);
    }

    #[test]
    fn level_thresholds_are_inclusive_upper() {
        assert_eq!(maturity_level(0.0), Ok(MaturityLevel::Initial));
        assert_eq!(maturity_level(33.0), Ok(MaturityLevel::Initial));
        assert_eq!(maturity_level(33.000001), Ok(MaturityLevel::Managed));
        assert_eq!(maturity_level(66.0), Ok(MaturityLevel::Managed));
        assert_eq!(maturity_level(66.000001), Ok(MaturityLevel::Optimized));
        assert_eq!(maturity_level(100.0), Ok(MaturityLevel::Optimized));
        assert_eq!(maturity_level(205.0 / 3.0), Ok(MaturityLevel::Optimized));
        assert!(matches!(
            maturity_level(-0.1),
            Err(ScoringError::OutOfRange(_))
        ));
        assert!(matches!(
            maturity_level(100.1),
            Err(ScoringError::OutOfRange(_))
        ));
        assert!(matches!(
            maturity_level(f64::NAN),
            Err(ScoringError::OutOfRange(_))
        ));
    }

    #[test]
    fn overall_score_examples() {
        let (oms, level) =
            overall_maturity_score(&[(0.5, 205.0 / 3.0), (0.2, 40.0), (0.3, 50.0)]).unwrap();
        assert!((oms - 57.166_666_666_666_67).abs() < 1e-9);
        assert_eq!(level, MaturityLevel::Managed);
        let third = 1.0 / 3.0;
        assert_eq!(
            overall_maturity_score(&[(third, 80.0), (third, 80.0), (third, 80.0)]).unwrap(),
            (80.0, MaturityLevel::Optimized)
        );
        assert_eq!(
            overall_maturity_score(&[(1.0, 12.0)]).unwrap(),
            (12.0, MaturityLevel::Initial)
        );
        assert!(matches!(
            overall_maturity_score(&[(0.5, 10.0), (0.6, 10.0)]),
            Err(ScoringError::WeightSumInvalid(_))
        ));
    }

    #[test]
    fn display_rounding_is_half_up() {
        assert_eq!(round_half_up_2dp(205.0 / 3.0), "68.33");
        assert_eq!(round_half_up_2dp(57.166_666_666_666_67), "57.17");
        assert_eq!(round_half_up_2dp(70.0), "70.00");
        assert_eq!(round_half_up_2dp(0.285), "0.29");
        assert_eq!(round_half_up_2dp(0.125), "0.13");
        assert_eq!(round_half_up_2dp(99.995), "100.00");
        assert_eq!(round_half_up_2dp(100.0 / 7.0), "14.29");
        assert_eq!(round_half_up_2dp(0.0), "0.00");
        assert_eq!(round_half_up_2dp(1e-7), "0.00");
    }

    #[test]
    fn score_serialises_with_display() {
        let json = serde_json::to_string(&Score(205.0 / 3.0)).unwrap();
        assert_eq!(json, r#"{"value":68.33333333333333,"display":"68.33"}"#);
        let back: Score = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Score(205.0 / 3.0));
    }

    #[test]
    fn fresh_builtin_assessment() {
        let catalog = builtin_catalog();
        let assessment = Assessment::create("Acme", &catalog, &[] as &[&str]).unwrap();
        let err = score_assessment(&assessment, &catalog, ScoreOptions::default()).unwrap_err();
        let ScoringError::Incomplete { missing } = err else {
            panic!("expected Incomplete")
        };
        let expected: usize = catalog
            .core_domains()
            .map(|d| d.practice_count(TierLevel::Basic) + d.metric_count(TierLevel::Basic))
            .sum();
        assert_eq!(missing.len(), expected);

        let report = score_assessment(
            &assessment,
            &catalog,
            ScoreOptions {
                missing_as_zero: true,
            },
        )
        .unwrap();
        assert_eq!(report.domains.len(), 7);
        for d in &report.domains {
            assert_eq!((d.pis.0, d.mas.0, d.ds.0), (0.0, 0.0, 0.0));
            assert_eq!(d.level, MaturityLevel::Initial);
            assert!(!d.imputed.is_empty());
        }
        assert_eq!(report.oms.0, 0.0);
        assert_eq!(report.overall_level, MaturityLevel::Initial);
        assert_eq!(report.weight_source, WeightSource::DefaultEqualWeights);
        assert_eq!(report.domains[0].weight_percent.display(), "14.29");
        report.trace.verify(&report).unwrap();
    }
}
