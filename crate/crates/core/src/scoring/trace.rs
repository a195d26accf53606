//! Replayable calculation trace.
//!
//! Each step records the raw inputs of one calculation and its result.
//! [`ScoreTrace::replay`] recomputes every step from its recorded inputs and
//! [`ScoreTrace::verify`] additionally cross-checks the report's figures, so
//! an auditor can confirm a stored report without the assessment.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    domain_score, maturity_level, normalised_percentage, round_half_up_2dp, FactorScores,
    MaturityLevel, ScoreReport,
};
use crate::assessment::{Evaluation, RatingValue};
use crate::catalog::TierLevel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemPoints {
    pub item_id: String,
    pub points: u8,
    /// True when the item had no entry and was scored as 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub imputed: bool,
}

impl ItemPoints {
    pub fn scored(item_id: &str, points: u8) -> Self {
        ItemPoints {
            item_id: item_id.to_owned(),
            points,
            imputed: false,
        }
    }

    pub fn imputed(item_id: &str) -> Self {
        ItemPoints {
            item_id: item_id.to_owned(),
            points: 0,
            imputed: true,
        }
    }
}

/// Points earned within one tier, and the tier's item count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierPoints {
    pub tier: TierLevel,
    pub items: Vec<ItemPoints>,
    pub count: u32,
    pub subtotal: u32,
}

impl TierPoints {
    pub fn new(tier: TierLevel, items: Vec<ItemPoints>) -> Self {
        let count = u32::try_from(items.len()).expect("tier size fits u32");
        let subtotal = items.iter().map(|i| u32::from(i.points)).sum();
        TierPoints {
            tier,
            items,
            count,
            subtotal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedTerm {
    pub domain_id: String,
    pub weight: f64,
    pub ds: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TraceStep {
    PracticeImplementation {
        domain_id: String,
        target_tier: TierLevel,
        tiers: Vec<TierPoints>,
        numerator: u32,
        denominator: u32,
        result: f64,
    },
    MetricAchievement {
        domain_id: String,
        target_tier: TierLevel,
        tiers: Vec<TierPoints>,
        numerator: u32,
        denominator: u32,
        result: f64,
    },
    DomainScore {
        domain_id: String,
        pis: f64,
        mas: f64,
        result: f64,
    },
    DomainLevel {
        domain_id: String,
        score: f64,
        level: MaturityLevel,
    },
    FactorTotal {
        domain_id: String,
        factors: FactorScores,
        total: u32,
    },
    Weight {
        domain_id: String,
        total: u32,
        grand_total: u32,
        result: f64,
    },
    DefaultEqualWeights {
        domain_count: u32,
        result: f64,
    },
    WeightedSum {
        terms: Vec<WeightedTerm>,
        sum: f64,
        min_ds: f64,
        max_ds: f64,
        result: f64,
    },
    OverallLevel {
        score: f64,
        level: MaturityLevel,
    },
}

impl TraceStep {
    /// One human-readable line, numbers rounded for display.
    pub fn describe(&self) -> String {
        let d = round_half_up_2dp;
        match self {
            TraceStep::PracticeImplementation {
                domain_id,
                target_tier,
                tiers,
                numerator,
                denominator,
                result,
            } => format!(
                "PIS[{domain_id}] up to {target_tier}: points {} = {numerator}; max 2 x {} practices = {denominator}; 100 x {numerator} / {denominator} = {}",
                sums(tiers),
                tiers.iter().map(|t| t.count).sum::<u32>(),
                d(*result)
            ),
            TraceStep::MetricAchievement {
                domain_id,
                target_tier,
                tiers,
                numerator,
                denominator,
                result,
            } => format!(
                "MAS[{domain_id}] up to {target_tier}: points {} = {numerator}; max 3 x {} metrics = {denominator}; 100 x {numerator} / {denominator} = {}",
                sums(tiers),
                tiers.iter().map(|t| t.count).sum::<u32>(),
                d(*result)
            ),
            TraceStep::DomainScore {
                domain_id,
                pis,
                mas,
                result,
            } => format!(
                "DS[{domain_id}] = ({} + {}) / 2 = {}",
                d(*pis),
                d(*mas),
                d(*result)
            ),
            TraceStep::DomainLevel {
                domain_id,
                score,
                level,
            } => format!("level[{domain_id}]: {} -> {level}", d(*score)),
            TraceStep::FactorTotal {
                domain_id,
                factors,
                total,
            } => format!(
                "factors[{domain_id}] = {} + {} + {} + {} = {total}",
                factors.risk_impact,
                factors.compliance_requirement,
                factors.business_impact,
                factors.interdependency
            ),
            TraceStep::Weight {
                domain_id,
                total,
                grand_total,
                result,
            } => format!(
                "w[{domain_id}] = {total} / {grand_total} = {}",
                format_weight(*result)
            ),
            TraceStep::DefaultEqualWeights {
                domain_count,
                result,
            } => format!(
                "default equal weights: 1 / {domain_count} = {}",
                format_weight(*result)
            ),
            TraceStep::WeightedSum { terms, result, .. } => {
                let parts: Vec<String> = terms
                    .iter()
                    .map(|t| format!("{} x {}", format_weight(t.weight), d(t.ds)))
                    .collect();
                format!("OMS = {} = {}", parts.join(" + "), d(*result))
            }
            TraceStep::OverallLevel { score, level } => {
                format!("overall level: {} -> {level}", d(*score))
            }
        }
    }
}

fn sums(tiers: &[TierPoints]) -> String {
    tiers
        .iter()
        .map(|t| {
            let pts: Vec<String> = t.items.iter().map(|i| i.points.to_string()).collect();
            format!("{}[{}]", t.tier, pts.join(","))
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn format_weight(w: f64) -> String {
    format!("{w:.4}")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("step {index} ({name}): {message}")]
    Step {
        index: usize,
        name: &'static str,
        message: String,
    },
    #[error("report field {field} disagrees with trace: report {report}, trace {trace}")]
    ReportMismatch {
        field: String,
        report: String,
        trace: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTrace {
    pub steps: Vec<TraceStep>,
}

/// Figures reproduced by replaying a trace.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Replayed {
    pub pis: HashMap<String, f64>,
    pub mas: HashMap<String, f64>,
    pub ds: HashMap<String, f64>,
    pub levels: HashMap<String, MaturityLevel>,
    pub weights: HashMap<String, f64>,
    pub oms: Option<f64>,
    pub overall_level: Option<MaturityLevel>,
}

fn bits_eq(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}

impl ScoreTrace {
    /// Recomputes every step from its recorded inputs and checks the
    /// recorded results bit for bit.
    pub fn replay(&self) -> Result<Replayed, TraceError> {
        let mut out = Replayed::default();
        let mut totals: Vec<u32> = Vec::new();
        for (index, step) in self.steps.iter().enumerate() {
            let fail = |name: &'static str, message: String| TraceError::Step {
                index,
                name,
                message,
            };
            match step {
                TraceStep::PracticeImplementation {
                    domain_id,
                    target_tier,
                    tiers,
                    numerator,
                    denominator,
                    result,
                } => {
                    let name = "practice_implementation";
                    let value = replay_component(
                        tiers,
                        *target_tier,
                        RatingValue::FullyImplemented.points(),
                        *numerator,
                        *denominator,
                        *result,
                    )
                    .map_err(|m| fail(name, m))?;
                    out.pis.insert(domain_id.clone(), value);
                }
                TraceStep::MetricAchievement {
                    domain_id,
                    target_tier,
                    tiers,
                    numerator,
                    denominator,
                    result,
                } => {
                    let name = "metric_achievement";
                    let value = replay_component(
                        tiers,
                        *target_tier,
                        Evaluation::MAX_POINTS,
                        *numerator,
                        *denominator,
                        *result,
                    )
                    .map_err(|m| fail(name, m))?;
                    out.mas.insert(domain_id.clone(), value);
                }
                TraceStep::DomainScore {
                    domain_id,
                    pis,
                    mas,
                    result,
                } => {
                    let name = "domain_score";
                    if out.pis.get(domain_id).is_none_or(|v| !bits_eq(*v, *pis))
                        || out.mas.get(domain_id).is_none_or(|v| !bits_eq(*v, *mas))
                    {
                        return Err(fail(
                            name,
                            "inputs differ from earlier PIS/MAS steps".into(),
                        ));
                    }
                    let ds = domain_score(*pis, *mas);
                    if !bits_eq(ds, *result) {
                        return Err(fail(name, format!("recomputed {ds}, recorded {result}")));
                    }
                    out.ds.insert(domain_id.clone(), ds);
                }
                TraceStep::DomainLevel {
                    domain_id,
                    score,
                    level,
                } => {
                    let name = "domain_level";
                    if out.ds.get(domain_id).is_none_or(|v| !bits_eq(*v, *score)) {
                        return Err(fail(
                            name,
                            "score differs from the domain score step".into(),
                        ));
                    }
                    let recomputed =
                        maturity_level(*score).map_err(|e| fail(name, e.to_string()))?;
                    if recomputed != *level {
                        return Err(fail(
                            name,
                            format!("recomputed {recomputed}, recorded {level}"),
                        ));
                    }
                    out.levels.insert(domain_id.clone(), *level);
                }
                TraceStep::FactorTotal { factors, total, .. } => {
                    if factors.total() != *total {
                        return Err(fail(
                            "factor_total",
                            format!("factors sum to {}, recorded {total}", factors.total()),
                        ));
                    }
                    totals.push(*total);
                }
                TraceStep::Weight {
                    domain_id,
                    total,
                    grand_total,
                    result,
                } => {
                    let name = "weight";
                    let expected_grand: u32 = totals.iter().sum();
                    if expected_grand != *grand_total {
                        return Err(fail(
                            name,
                            format!(
                                "factor totals sum to {expected_grand}, recorded {grand_total}"
                            ),
                        ));
                    }
                    let w = f64::from(*total) / f64::from(*grand_total);
                    if !bits_eq(w, *result) {
                        return Err(fail(name, format!("recomputed {w}, recorded {result}")));
                    }
                    out.weights.insert(domain_id.clone(), w);
                }
                TraceStep::DefaultEqualWeights {
                    domain_count,
                    result,
                } => {
                    let w = 1.0 / f64::from(*domain_count);
                    if !bits_eq(w, *result) {
                        return Err(fail(
                            "default_equal_weights",
                            format!("recomputed {w}, recorded {result}"),
                        ));
                    }
                    for domain_id in out.ds.keys() {
                        out.weights.insert(domain_id.clone(), w);
                    }
                }
                TraceStep::WeightedSum {
                    terms,
                    sum,
                    min_ds,
                    max_ds,
                    result,
                } => {
                    let name = "weighted_sum";
                    let mut acc = 0.0;
                    let mut lo = f64::INFINITY;
                    let mut hi = f64::NEG_INFINITY;
                    for t in terms {
                        let known_w = out.weights.get(&t.domain_id);
                        let known_ds = out.ds.get(&t.domain_id);
                        if known_w.is_none_or(|w| !bits_eq(*w, t.weight))
                            || known_ds.is_none_or(|d| !bits_eq(*d, t.ds))
                        {
                            return Err(fail(
                                name,
                                format!("term for `{}` differs from earlier steps", t.domain_id),
                            ));
                        }
                        let product = t.weight * t.ds;
                        if !bits_eq(product, t.product) {
                            return Err(fail(
                                name,
                                format!("product for `{}` recomputed {product}", t.domain_id),
                            ));
                        }
                        acc += product;
                        lo = lo.min(t.ds);
                        hi = hi.max(t.ds);
                    }
                    if terms.len() != out.ds.len() {
                        return Err(fail(name, "terms do not cover every scored domain".into()));
                    }
                    if !bits_eq(acc, *sum) || !bits_eq(lo, *min_ds) || !bits_eq(hi, *max_ds) {
                        return Err(fail(name, format!("recomputed sum {acc} in [{lo}, {hi}]")));
                    }
                    let clamped = acc.clamp(lo, hi);
                    if !bits_eq(clamped, *result) {
                        return Err(fail(
                            name,
                            format!("recomputed {clamped}, recorded {result}"),
                        ));
                    }
                    out.oms = Some(clamped);
                }
                TraceStep::OverallLevel { score, level } => {
                    let name = "overall_level";
                    if out.oms.is_none_or(|v| !bits_eq(v, *score)) {
                        return Err(fail(
                            name,
                            "score differs from the weighted sum step".into(),
                        ));
                    }
                    let recomputed =
                        maturity_level(*score).map_err(|e| fail(name, e.to_string()))?;
                    if recomputed != *level {
                        return Err(fail(
                            name,
                            format!("recomputed {recomputed}, recorded {level}"),
                        ));
                    }
                    out.overall_level = Some(*level);
                }
            }
        }
        Ok(out)
    }

    /// Replays the trace and checks every figure in `report` against it.
    pub fn verify(&self, report: &ScoreReport) -> Result<Replayed, TraceError> {
        let replayed = self.replay()?;
        let mismatch = |field: String, report: String, trace: String| TraceError::ReportMismatch {
            field,
            report,
            trace,
        };
        for d in &report.domains {
            let id = &d.domain_id;
            for (field, value, map) in [
                ("pis", d.pis.0, &replayed.pis),
                ("mas", d.mas.0, &replayed.mas),
                ("ds", d.ds.0, &replayed.ds),
                ("weight", d.weight.0, &replayed.weights),
            ] {
                match map.get(id) {
                    Some(v) if bits_eq(*v, value) => {}
                    other => {
                        return Err(mismatch(
                            format!("domains[{id}].{field}"),
                            value.to_string(),
                            format!("{other:?}"),
                        ))
                    }
                }
            }
            if replayed.levels.get(id) != Some(&d.level) {
                return Err(mismatch(
                    format!("domains[{id}].level"),
                    d.level.to_string(),
                    format!("{:?}", replayed.levels.get(id)),
                ));
            }
            let (pn, pd, mn, md) = self.fractions(id);
            if (pn, pd, mn, md)
                != (
                    Some(d.pis_numerator),
                    Some(d.pis_denominator),
                    Some(d.mas_numerator),
                    Some(d.mas_denominator),
                )
            {
                return Err(mismatch(
                    format!("domains[{id}].fractions"),
                    format!(
                        "{}/{} {}/{}",
                        d.pis_numerator, d.pis_denominator, d.mas_numerator, d.mas_denominator
                    ),
                    format!("{pn:?}/{pd:?} {mn:?}/{md:?}"),
                ));
            }
        }
        if replayed.ds.len() != report.domains.len() {
            return Err(mismatch(
                "domains".into(),
                report.domains.len().to_string(),
                replayed.ds.len().to_string(),
            ));
        }
        if replayed.oms.is_none_or(|v| !bits_eq(v, report.oms.0)) {
            return Err(mismatch(
                "oms".into(),
                report.oms.0.to_string(),
                format!("{:?}", replayed.oms),
            ));
        }
        if replayed.overall_level != Some(report.overall_level) {
            return Err(mismatch(
                "overall_level".into(),
                report.overall_level.to_string(),
                format!("{:?}", replayed.overall_level),
            ));
        }
        Ok(replayed)
    }

    fn fractions(&self, domain_id: &str) -> (Option<u32>, Option<u32>, Option<u32>, Option<u32>) {
        let mut out = (None, None, None, None);
        for step in &self.steps {
            match step {
                TraceStep::PracticeImplementation {
                    domain_id: id,
                    numerator,
                    denominator,
                    ..
                } if id == domain_id => {
                    out.0 = Some(*numerator);
                    out.1 = Some(*denominator);
                }
                TraceStep::MetricAchievement {
                    domain_id: id,
                    numerator,
                    denominator,
                    ..
                } if id == domain_id => {
                    out.2 = Some(*numerator);
                    out.3 = Some(*denominator);
                }
                _ => {}
            }
        }
        out
    }

    /// Steps concerning one domain, in order.
    pub fn for_domain<'a>(&'a self, domain_id: &'a str) -> impl Iterator<Item = &'a TraceStep> {
        self.steps.iter().filter(move |s| match s {
            TraceStep::PracticeImplementation { domain_id: id, .. }
            | TraceStep::MetricAchievement { domain_id: id, .. }
            | TraceStep::DomainScore { domain_id: id, .. }
            | TraceStep::DomainLevel { domain_id: id, .. }
            | TraceStep::FactorTotal { domain_id: id, .. }
            | TraceStep::Weight { domain_id: id, .. } => id == domain_id,
            _ => false,
        })
    }
}

fn replay_component(
    tiers: &[TierPoints],
    target: TierLevel,
    max_points: u8,
    numerator: u32,
    denominator: u32,
    result: f64,
) -> Result<f64, String> {
    let expected_tiers: Vec<TierLevel> = TierLevel::ALL
        .into_iter()
        .filter(|t| *t <= target)
        .collect();
    let recorded_tiers: Vec<TierLevel> = tiers.iter().map(|t| t.tier).collect();
    if expected_tiers != recorded_tiers {
        return Err(format!(
            "tiers {recorded_tiers:?} do not match cumulative scope up to {target}"
        ));
    }
    let mut earned = 0u32;
    let mut count = 0u32;
    for t in tiers {
        if t.items.iter().any(|i| i.points > max_points) {
            return Err(format!("{} tier holds points above {max_points}", t.tier));
        }
        let subtotal: u32 = t.items.iter().map(|i| u32::from(i.points)).sum();
        if subtotal != t.subtotal || t.items.len() != t.count as usize {
            return Err(format!(
                "{} tier subtotal or count disagrees with its items",
                t.tier
            ));
        }
        earned += subtotal;
        count += t.count;
    }
    let max_total = u32::from(max_points) * count;
    if earned != numerator || max_total != denominator {
        return Err(format!(
            "recomputed {earned}/{max_total}, recorded {numerator}/{denominator}"
        ));
    }
    let value = normalised_percentage(numerator, denominator);
    if !bits_eq(value, result) {
        return Err(format!("recomputed {value}, recorded {result}"));
    }
    Ok(value)
}
