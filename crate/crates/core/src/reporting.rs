//! Gap analysis, chart datasets and exports derived from a score report.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessment::{Assessment, Evaluation, RatingValue};
use crate::catalog::{Catalog, TierLevel};
use crate::scoring::{round_half_up_2dp, ItemKind, MaturityLevel, ScoreReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportingError {
    #[error("score report does not belong to this assessment and catalog: {0}")]
    ReportMismatch(String),
    #[error("unsupported export format `{0}` (expected json or csv)")]
    UnsupportedFormat(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapItem {
    pub kind: ItemKind,
    pub id: String,
    pub tier: TierLevel,
    pub current: u8,
    pub maximum: u8,
    pub shortfall: u8,
    /// The item had no rating or evaluation and counts as 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unassessed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainGaps {
    pub domain_id: String,
    pub name: String,
    pub target_tier: TierLevel,
    pub items: Vec<GapItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    pub assessment_id: String,
    pub domains: Vec<DomainGaps>,
}

impl GapReport {
    pub fn total_items(&self) -> usize {
        self.domains.iter().map(|d| d.items.len()).sum()
    }
}

/// Every in-scope practice below Fully Implemented and every in-scope
/// metric below 3 points, ordered by tier, then largest shortfall, then id.
pub fn gap_analysis(
    assessment: &Assessment,
    catalog: &Catalog,
    report: &ScoreReport,
) -> Result<GapReport, ReportingError> {
    if report.assessment_id != assessment.assessment_id
        || report.catalog_id != catalog.catalog_id
        || report.catalog_version != catalog.version
        || assessment.catalog_id != catalog.catalog_id
        || assessment.catalog_version != catalog.version
    {
        return Err(ReportingError::ReportMismatch(format!(
            "report {} for {}@{}, assessment {} for {}",
            report.assessment_id,
            report.catalog_id,
            report.catalog_version,
            assessment.assessment_id,
            assessment.catalog_ref()
        )));
    }

    let mut domains = Vec::with_capacity(report.domains.len());
    for breakdown in &report.domains {
        let selection = assessment.selection(&breakdown.domain_id).ok_or_else(|| {
            ReportingError::ReportMismatch(format!("domain `{}` not selected", breakdown.domain_id))
        })?;
        if selection.target_tier != breakdown.target_tier {
            return Err(ReportingError::ReportMismatch(format!(
                "domain `{}` targets {} but the report was scored at {}",
                breakdown.domain_id, selection.target_tier, breakdown.target_tier
            )));
        }
        let domain = catalog.domain(&breakdown.domain_id).ok_or_else(|| {
            ReportingError::ReportMismatch(format!("unknown domain `{}`", breakdown.domain_id))
        })?;

        let mut items = Vec::new();
        for tier in domain.tiers_up_to(selection.target_tier) {
            for p in &tier.practices {
                let rating = selection.ratings.get(&p.practice_id);
                let current = rating.map_or(0, |r| r.value.points());
                let maximum = RatingValue::FullyImplemented.points();
                if current < maximum {
                    items.push(GapItem {
                        kind: ItemKind::Practice,
                        id: p.practice_id.clone(),
                        tier: tier.level,
                        current,
                        maximum,
                        shortfall: maximum - current,
                        unassessed: rating.is_none(),
                    });
                }
            }
            for m in &tier.metrics {
                let evaluation = selection.evaluations.get(&m.metric_id);
                let current = evaluation.map_or(0, |e| e.points.min(Evaluation::MAX_POINTS));
                let maximum = Evaluation::MAX_POINTS;
                if current < maximum {
                    items.push(GapItem {
                        kind: ItemKind::Metric,
                        id: m.metric_id.clone(),
                        tier: tier.level,
                        current,
                        maximum,
                        shortfall: maximum - current,
                        unassessed: evaluation.is_none(),
                    });
                }
            }
        }
        items.sort_by(|a, b| {
            a.tier
                .cmp(&b.tier)
                .then(b.shortfall.cmp(&a.shortfall))
                .then_with(|| a.id.cmp(&b.id))
                .then(a.kind.cmp(&b.kind))
        });
        domains.push(DomainGaps {
            domain_id: breakdown.domain_id.clone(),
            name: breakdown.name.clone(),
            target_tier: breakdown.target_tier,
            items,
        });
    }
    Ok(GapReport {
        assessment_id: assessment.assessment_id.clone(),
        domains,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub ds: Vec<f64>,
    pub pis: Vec<f64>,
    pub mas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartOverall {
    pub oms: f64,
    pub level: MaturityLevel,
}

/// Chart-type-agnostic projection of a report: parallel lists in report
/// (catalog) order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDataset {
    pub labels: Vec<String>,
    pub domain_ids: Vec<String>,
    pub levels: Vec<MaturityLevel>,
    pub series: ChartSeries,
    pub overall: ChartOverall,
}

pub fn chart_data(report: &ScoreReport) -> ChartDataset {
    ChartDataset {
        labels: report.domains.iter().map(|d| d.name.clone()).collect(),
        domain_ids: report.domains.iter().map(|d| d.domain_id.clone()).collect(),
        levels: report.domains.iter().map(|d| d.level).collect(),
        series: ChartSeries {
            ds: report.domains.iter().map(|d| d.ds.0).collect(),
            pis: report.domains.iter().map(|d| d.pis.0).collect(),
            mas: report.domains.iter().map(|d| d.mas.0).collect(),
        },
        overall: ChartOverall {
            oms: report.oms.0,
            level: report.overall_level,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

impl FromStr for ExportFormat {
    type Err = ReportingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ExportFormat::Json),
            "csv" => Ok(ExportFormat::Csv),
            other => Err(ReportingError::UnsupportedFormat(other.to_owned())),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Json => "json",
            ExportFormat::Csv => "csv",
        })
    }
}

/// The JSON export: the score report with an embedded gap section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    #[serde(flatten)]
    pub report: ScoreReport,
    pub gaps: GapReport,
}

pub const CSV_HEADER: [&str; 8] = [
    "domain_id",
    "name",
    "target_tier",
    "pis",
    "mas",
    "ds",
    "level",
    "weight",
];

pub fn export(
    report: &ScoreReport,
    gaps: &GapReport,
    format: ExportFormat,
) -> Result<Vec<u8>, ReportingError> {
    match format {
        ExportFormat::Json => {
            let doc = ReportDocument {
                report: report.clone(),
                gaps: gaps.clone(),
            };
            let mut bytes = serde_json::to_vec_pretty(&doc).expect("report serialises");
            bytes.push(b'\n');
            Ok(bytes)
        }
        ExportFormat::Csv => Ok(export_csv(report)),
    }
}

fn export_csv(report: &ScoreReport) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    writer
        .write_record(CSV_HEADER)
        .expect("in-memory csv write");
    for d in &report.domains {
        writer
            .write_record([
                d.domain_id.as_str(),
                d.name.as_str(),
                d.target_tier.name(),
                &round_half_up_2dp(d.pis.0),
                &round_half_up_2dp(d.mas.0),
                &round_half_up_2dp(d.ds.0),
                &d.level.to_string(),
                &round_half_up_2dp(d.weight.0),
            ])
            .expect("in-memory csv write");
    }
    let total_weight: f64 = report.domains.iter().map(|d| d.weight.0).sum();
    writer
        .write_record([
            "OVERALL",
            report.organisation.as_str(),
            "",
            "",
            "",
            &round_half_up_2dp(report.oms.0),
            &report.overall_level.to_string(),
            &round_half_up_2dp(total_weight),
        ])
        .expect("in-memory csv write");
    writer.into_inner().expect("in-memory csv flush")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assessment::Rating;
    use crate::catalog::builtin_catalog;
    use crate::scoring::{score_assessment, ScoreOptions};

    fn scored(ratings: &[(&str, u8)], evals: &[(&str, f64)]) -> (Catalog, Assessment, ScoreReport) {
        let catalog = builtin_catalog();
        let mut a = Assessment::create("Acme, Inc.", &catalog, &[] as &[&str]).unwrap();
        for (p, v) in ratings {
            a.rate_practice(
                &catalog,
                "data-security",
                p,
                Rating::new(RatingValue::try_from(*v).unwrap()),
            )
            .unwrap();
        }
        for (m, v) in evals {
            a.evaluate_quantitative(&catalog, "data-security", m, *v, None)
                .unwrap();
        }
        let report = score_assessment(
            &a,
            &catalog,
            ScoreOptions {
                missing_as_zero: true,
            },
        )
        .unwrap();
        (catalog, a, report)
    }

    #[test]
    fn gap_ordering_puts_larger_shortfall_first() {
        let (catalog, a, report) = scored(
            &[("ds-basic-1", 2), ("ds-basic-2", 1), ("ds-basic-3", 0)],
            &[("encryption-coverage", 95.0)],
        );
        let gaps = gap_analysis(&a, &catalog, &report).unwrap();
        let ds = gaps
            .domains
            .iter()
            .find(|d| d.domain_id == "data-security")
            .unwrap();
        let summary: Vec<(&str, u8)> = ds
            .items
            .iter()
            .map(|i| (i.id.as_str(), i.shortfall))
            .collect();
        assert_eq!(summary, vec![("ds-basic-3", 2), ("ds-basic-2", 1)]);
    }

    #[test]
    fn complete_domain_has_no_gaps_and_metric_gap_shortfall() {
        let (catalog, a, report) = scored(
            &[("ds-basic-1", 2), ("ds-basic-2", 2), ("ds-basic-3", 2)],
            &[("encryption-coverage", 95.0)],
        );
        let gaps = gap_analysis(&a, &catalog, &report).unwrap();
        let ds = gaps
            .domains
            .iter()
            .find(|d| d.domain_id == "data-security")
            .unwrap();
        assert!(ds.items.is_empty());

        let (catalog, a, report) = scored(
            &[("ds-basic-1", 2), ("ds-basic-2", 2), ("ds-basic-3", 2)],
            &[("encryption-coverage", 75.0)],
        );
        let gaps = gap_analysis(&a, &catalog, &report).unwrap();
        let ds = gaps
            .domains
            .iter()
            .find(|d| d.domain_id == "data-security")
            .unwrap();
        assert_eq!(ds.items.len(), 1);
        assert_eq!(
            (ds.items[0].kind, ds.items[0].shortfall),
            (ItemKind::Metric, 1)
        );
    }

    #[test]
    fn unassessed_items_are_flagged() {
        let (catalog, a, report) = scored(&[], &[]);
        let gaps = gap_analysis(&a, &catalog, &report).unwrap();
        assert!(gaps
            .domains
            .iter()
            .flat_map(|d| &d.items)
            .all(|i| i.unassessed && i.current == 0));
    }

    #[test]
    fn mismatched_report_is_rejected() {
        let (catalog, a, mut report) = scored(&[], &[]);
        report.assessment_id = "other".into();
        assert!(matches!(
            gap_analysis(&a, &catalog, &report),
            Err(ReportingError::ReportMismatch(_))
        ));
    }

    #[test]
    fn chart_projection_is_lossless() {
        let (_, _, report) = scored(&[("ds-basic-1", 2)], &[]);
        let chart = chart_data(&report);
        assert_eq!(chart.labels.len(), 7);
        assert_eq!(chart.series.ds.len(), 7);
        for (i, d) in report.domains.iter().enumerate() {
            assert_eq!(chart.series.pis[i], d.pis.0);
            assert_eq!(chart.labels[i], d.name);
        }
        assert_eq!(chart.overall.oms, report.oms.0);
    }

    #[test]
    fn csv_quotes_and_counts_rows() {
        let (catalog, a, report) = scored(&[("ds-basic-1", 2)], &[]);
        let gaps = gap_analysis(&a, &catalog, &report).unwrap();
        let bytes = export(&report, &gaps, ExportFormat::Csv).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("domain_id,name,target_tier,pis,mas,ds,level,weight\r\n"));
        // Names containing commas are quoted.
        assert!(text.contains("\"Cybersecurity Culture, Awareness & Training\""));
        assert!(text.contains("OVERALL,\"Acme, Inc.\""));
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        assert_eq!(reader.records().count(), 8);
    }

    #[test]
    fn unsupported_format() {
        assert_eq!(
            "xlsx".parse::<ExportFormat>(),
            Err(ReportingError::UnsupportedFormat("xlsx".into()))
        );
        assert_eq!("JSON".parse::<ExportFormat>(), Ok(ExportFormat::Json));
    }
}
