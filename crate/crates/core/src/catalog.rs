//! Capability catalog: domains (core or elective), each stratified into
//! Basic, Intermediate and Advanced tiers of practices and metrics.
//!
//! Parsing only checks document shape. Structural rules (three ordered
//! tiers, non-empty tiers, band coverage, rubric completeness) are reported
//! by [`validate_catalog`] as findings rather than errors, so an editor can
//! surface every problem at once.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_CATALOG: &str = include_str!("../catalogs/builtin.json");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("shape error at line {line}, column {column}: {message}")]
    Shape {
        line: usize,
        column: usize,
        message: String,
    },
}

impl From<serde_json::Error> for CatalogError {
    fn from(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        let (line, column) = (err.line(), err.column());
        let message = err.to_string();
        match err.classify() {
            Category::Data => CatalogError::Shape {
                line,
                column,
                message,
            },
            Category::Syntax | Category::Eof | Category::Io => CatalogError::Syntax {
                line,
                column,
                message,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    /// Present on documents written by the store; absent in hand-authored files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format_version: Option<String>,
    pub catalog_id: String,
    pub version: String,
    pub title: String,
    #[serde(default)]
    pub illustrative: bool,
    pub domains: Vec<Domain>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Core,
    Elective,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::Core => "core",
            DomainKind::Elective => "elective",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub domain_id: String,
    pub name: String,
    pub kind: DomainKind,
    pub description: String,
    pub tiers: Vec<Tier>,
}

/// Tier of a practice or metric. Ordering follows the progression
/// Basic < Intermediate < Advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TierLevel {
    Basic = 1,
    Intermediate = 2,
    Advanced = 3,
}

impl TierLevel {
    pub const ALL: [TierLevel; 3] = [
        TierLevel::Basic,
        TierLevel::Intermediate,
        TierLevel::Advanced,
    ];

    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            TierLevel::Basic => "Basic",
            TierLevel::Intermediate => "Intermediate",
            TierLevel::Advanced => "Advanced",
        }
    }
}

impl fmt::Display for TierLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TierLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "basic" | "1" => Ok(TierLevel::Basic),
            "intermediate" | "2" => Ok(TierLevel::Intermediate),
            "advanced" | "3" => Ok(TierLevel::Advanced),
            other => Err(format!(
                "unknown tier `{other}` (expected basic, intermediate or advanced)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tier {
    pub level: TierLevel,
    pub practices: Vec<Practice>,
    pub metrics: Vec<Metric>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Practice {
    pub practice_id: String,
    pub statement: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Quantitative,
    Qualitative,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Quantitative => "quantitative",
            MetricKind::Qualitative => "qualitative",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metric {
    pub metric_id: String,
    pub description: String,
    pub kind: MetricKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bands: Option<Vec<Band>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rubric: Option<Rubric>,
}

impl Metric {
    /// Points awarded for a raw measurement. Bands are lower-inclusive and
    /// upper-exclusive; a missing bound is unbounded. Returns `None` for
    /// qualitative metrics and for measurements no band contains (NaN, or a
    /// catalog that failed validation).
    pub fn points_for(&self, measured: f64) -> Option<u8> {
        if self.kind != MetricKind::Quantitative || measured.is_nan() {
            return None;
        }
        self.bands
            .as_ref()?
            .iter()
            .find(|band| band.contains(measured))
            .map(|band| band.points)
    }

    /// Rubric text for a qualitative level.
    pub fn rubric_text(&self, points: u8) -> Option<&str> {
        self.rubric.as_ref().and_then(|r| r.level(points))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub points: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl Band {
    pub fn contains(&self, value: f64) -> bool {
        self.lower.is_none_or(|lo| value >= lo) && self.upper.is_none_or(|hi| value < hi)
    }
}

/// Rubric texts for qualitative metrics, keyed by awarded points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rubric {
    #[serde(rename = "3")]
    pub three: String,
    #[serde(rename = "2")]
    pub two: String,
    #[serde(rename = "1")]
    pub one: String,
    #[serde(rename = "0")]
    pub zero: String,
}

impl Rubric {
    pub fn level(&self, points: u8) -> Option<&str> {
        match points {
            3 => Some(&self.three),
            2 => Some(&self.two),
            1 => Some(&self.one),
            0 => Some(&self.zero),
            _ => None,
        }
    }

    /// Levels in descending points order.
    pub fn levels(&self) -> [(u8, &str); 4] {
        [
            (3, &self.three),
            (2, &self.two),
            (1, &self.one),
            (0, &self.zero),
        ]
    }
}

impl Catalog {
    pub fn domain(&self, domain_id: &str) -> Option<&Domain> {
        self.domains.iter().find(|d| d.domain_id == domain_id)
    }

    pub fn core_domains(&self) -> impl Iterator<Item = &Domain> {
        self.domains.iter().filter(|d| d.kind == DomainKind::Core)
    }

    pub fn elective_domains(&self) -> impl Iterator<Item = &Domain> {
        self.domains
            .iter()
            .filter(|d| d.kind == DomainKind::Elective)
    }

    /// Position of a domain in catalog order.
    pub fn position(&self, domain_id: &str) -> Option<usize> {
        self.domains.iter().position(|d| d.domain_id == domain_id)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serialises")
    }
}

impl Domain {
    pub fn tier(&self, level: TierLevel) -> Option<&Tier> {
        self.tiers.iter().find(|t| t.level == level)
    }

    /// Tiers from Basic up to and including `target`.
    pub fn tiers_up_to(&self, target: TierLevel) -> impl Iterator<Item = &Tier> {
        self.tiers.iter().filter(move |t| t.level <= target)
    }

    pub fn practice(&self, practice_id: &str) -> Option<(TierLevel, &Practice)> {
        self.tiers.iter().find_map(|t| {
            t.practices
                .iter()
                .find(|p| p.practice_id == practice_id)
                .map(|p| (t.level, p))
        })
    }

    pub fn metric(&self, metric_id: &str) -> Option<(TierLevel, &Metric)> {
        self.tiers.iter().find_map(|t| {
            t.metrics
                .iter()
                .find(|m| m.metric_id == metric_id)
                .map(|m| (t.level, m))
        })
    }

    pub fn practice_count(&self, target: TierLevel) -> usize {
        self.tiers_up_to(target).map(|t| t.practices.len()).sum()
    }

    pub fn metric_count(&self, target: TierLevel) -> usize {
        self.tiers_up_to(target).map(|t| t.metrics.len()).sum()
    }
}

pub fn parse_catalog(document: &[u8]) -> Result<Catalog, CatalogError> {
    Ok(serde_json::from_slice(document)?)
}

/// The embedded catalog. Its practice and metric content is illustrative.
pub fn builtin_catalog() -> Catalog {
    parse_catalog(BUILTIN_CATALOG.as_bytes()).expect("embedded catalog parses")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }
}

/// Lowercase alphanumerics separated by single hyphens.
pub fn is_slug(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with('-')
        && !s.ends_with('-')
        && !s.contains("--")
        && s.bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
}

#[derive(Default)]
struct Findings(Vec<Finding>);

impl Findings {
    fn error(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Finding {
            severity: Severity::Error,
            path: path.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Finding {
            severity: Severity::Warning,
            path: path.into(),
            message: message.into(),
        });
    }
}

pub fn validate_catalog(catalog: &Catalog) -> ValidationReport {
    let mut out = Findings::default();

    if !is_slug(&catalog.catalog_id) {
        out.error(
            "catalog_id",
            format!("`{}` is not a slug", catalog.catalog_id),
        );
    }
    if catalog.version.trim().is_empty() {
        out.error("version", "version is empty");
    } else if !catalog
        .version
        .bytes()
        .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'-' | b'_'))
        || catalog.version.contains("..")
    {
        out.error(
            "version",
            format!(
                "`{}` contains characters unsafe for file names",
                catalog.version
            ),
        );
    }
    if catalog.title.trim().is_empty() {
        out.warning("title", "title is empty");
    }
    if catalog.domains.is_empty() {
        out.error("domains", "catalog has no domains");
    } else if !catalog.domains.iter().any(|d| d.kind == DomainKind::Core) {
        out.error("domains", "catalog has no core domain");
    }

    let mut seen = HashSet::new();
    for (i, domain) in catalog.domains.iter().enumerate() {
        let path = format!("domains[{i}]");
        if !is_slug(&domain.domain_id) {
            out.error(
                format!("{path}.domain_id"),
                format!("`{}` is not a slug", domain.domain_id),
            );
        }
        if !seen.insert(domain.domain_id.as_str()) {
            out.error(
                format!("{path}.domain_id"),
                format!("duplicate domain id `{}`", domain.domain_id),
            );
        }
        validate_domain(domain, &path, &mut out);
    }

    let valid = !out.0.iter().any(|f| f.severity == Severity::Error);
    ValidationReport {
        valid,
        findings: out.0,
    }
}

fn validate_domain(domain: &Domain, path: &str, out: &mut Findings) {
    if domain.name.trim().is_empty() {
        out.error(format!("{path}.name"), "domain name is empty");
    }
    if domain.description.trim().is_empty() {
        out.warning(format!("{path}.description"), "description is empty");
    }

    let levels: Vec<TierLevel> = domain.tiers.iter().map(|t| t.level).collect();
    if levels != TierLevel::ALL {
        let listed: Vec<&str> = levels.iter().map(|l| l.name()).collect();
        out.error(
            format!("{path}.tiers"),
            format!(
                "expected tiers [Basic, Intermediate, Advanced] in order, found [{}]",
                listed.join(", ")
            ),
        );
    }

    let mut practice_ids = HashSet::new();
    let mut metric_ids = HashSet::new();
    for (ti, tier) in domain.tiers.iter().enumerate() {
        // Duplicate levels make a level-named locator ambiguous.
        let tier_path = if levels.iter().filter(|l| **l == tier.level).count() == 1 {
            format!("{path}.tiers[{}]", tier.level)
        } else {
            format!("{path}.tiers[{ti}]")
        };
        if tier.practices.is_empty() {
            out.error(format!("{tier_path}.practices"), "tier has no practices");
        }
        if tier.metrics.is_empty() {
            out.error(format!("{tier_path}.metrics"), "tier has no metrics");
        }
        for (pi, practice) in tier.practices.iter().enumerate() {
            let p_path = format!("{tier_path}.practices[{pi}]");
            if !is_slug(&practice.practice_id) {
                out.error(
                    format!("{p_path}.practice_id"),
                    format!("`{}` is not a slug", practice.practice_id),
                );
            }
            if !practice_ids.insert(practice.practice_id.as_str()) {
                out.error(
                    format!("{p_path}.practice_id"),
                    format!("duplicate practice id `{}` in domain", practice.practice_id),
                );
            }
            if practice.statement.trim().is_empty() {
                out.error(format!("{p_path}.statement"), "practice statement is empty");
            }
        }
        for (mi, metric) in tier.metrics.iter().enumerate() {
            let m_path = format!("{tier_path}.metrics[{mi}]");
            if !is_slug(&metric.metric_id) {
                out.error(
                    format!("{m_path}.metric_id"),
                    format!("`{}` is not a slug", metric.metric_id),
                );
            }
            if !metric_ids.insert(metric.metric_id.as_str()) {
                out.error(
                    format!("{m_path}.metric_id"),
                    format!("duplicate metric id `{}` in domain", metric.metric_id),
                );
            }
            validate_metric(metric, &m_path, out);
        }
    }
}

fn validate_metric(metric: &Metric, path: &str, out: &mut Findings) {
    if metric.description.trim().is_empty() {
        out.warning(format!("{path}.description"), "description is empty");
    }
    match metric.kind {
        MetricKind::Quantitative => {
            if metric.rubric.is_some() {
                out.error(
                    format!("{path}.rubric"),
                    "quantitative metric must not carry a rubric",
                );
            }
            let Some(direction) = metric.direction else {
                out.error(
                    format!("{path}.direction"),
                    "quantitative metric requires a direction",
                );
                return;
            };
            match &metric.bands {
                None => out.error(
                    format!("{path}.bands"),
                    "quantitative metric requires four bands",
                ),
                Some(bands) => validate_bands(bands, direction, &format!("{path}.bands"), out),
            }
        }
        MetricKind::Qualitative => {
            for (field, present) in [
                ("unit", metric.unit.is_some()),
                ("direction", metric.direction.is_some()),
                ("bands", metric.bands.is_some()),
            ] {
                if present {
                    out.error(
                        format!("{path}.{field}"),
                        format!("qualitative metric must not carry `{field}`"),
                    );
                }
            }
            let Some(rubric) = &metric.rubric else {
                out.error(
                    format!("{path}.rubric"),
                    "qualitative metric requires a rubric for points 3, 2, 1 and 0",
                );
                return;
            };
            let mut texts = HashSet::new();
            for (points, text) in rubric.levels() {
                if text.trim().is_empty() {
                    out.error(format!("{path}.rubric.{points}"), "rubric text is empty");
                } else if !texts.insert(text.trim()) {
                    out.error(
                        format!("{path}.rubric.{points}"),
                        "rubric text duplicates another level",
                    );
                }
            }
        }
    }
}

fn validate_bands(bands: &[Band], direction: Direction, path: &str, out: &mut Findings) {
    if bands.len() != 4 {
        out.error(
            path,
            format!("expected exactly 4 bands, found {}", bands.len()),
        );
        return;
    }
    let mut well_formed = true;
    for (i, band) in bands.iter().enumerate() {
        if band.points > 3 {
            out.error(
                format!("{path}[{i}].points"),
                format!("points {} outside 0..3", band.points),
            );
            well_formed = false;
        }
        if band.lower.is_some_and(|v| !v.is_finite()) || band.upper.is_some_and(|v| !v.is_finite())
        {
            out.error(format!("{path}[{i}]"), "band bounds must be finite");
            well_formed = false;
        } else if let (Some(lo), Some(hi)) = (band.lower, band.upper) {
            if lo >= hi {
                out.error(
                    format!("{path}[{i}]"),
                    format!("lower bound {lo} must be below upper bound {hi}"),
                );
                well_formed = false;
            }
        }
    }
    let mut points: Vec<u8> = bands.iter().map(|b| b.points).collect();
    points.sort_unstable();
    if points != [0, 1, 2, 3] {
        out.error(
            path,
            "bands must award points 3, 2, 1 and 0 exactly once each",
        );
        well_formed = false;
    }
    if !well_formed {
        return;
    }

    // Order bands along the measurement axis; an absent lower bound is -inf.
    let mut order: Vec<usize> = (0..bands.len()).collect();
    order.sort_by(|&a, &b| {
        let key = |i: usize| bands[i].lower.unwrap_or(f64::NEG_INFINITY);
        key(a).total_cmp(&key(b))
    });

    let first = &bands[order[0]];
    if first.lower.is_some() {
        out.error(
            path,
            "lowest band must be unbounded below so every measurement maps to a band",
        );
    }
    let last = &bands[order[order.len() - 1]];
    if last.upper.is_some() {
        out.error(
            path,
            "highest band must be unbounded above so every measurement maps to a band",
        );
    }
    for pair in order.windows(2) {
        let (a, b) = (&bands[pair[0]], &bands[pair[1]]);
        match (a.upper, b.lower) {
            (Some(hi), Some(lo)) if hi > lo => out.error(
                path,
                format!(
                    "band overlap: the {}-point band reaches {hi} but the {}-point band starts at {lo}",
                    a.points, b.points
                ),
            ),
            (Some(hi), Some(lo)) if hi < lo => out.error(
                path,
                format!(
                    "band gap: no band covers [{hi}, {lo}) between the {}-point and {}-point bands",
                    a.points, b.points
                ),
            ),
            (None, _) => out.error(
                path,
                format!(
                    "band overlap: the {}-point band is unbounded above but another band follows it",
                    a.points
                ),
            ),
            _ => {}
        }
    }

    let along_axis: Vec<u8> = order.iter().map(|&i| bands[i].points).collect();
    let expected: [u8; 4] = match direction {
        Direction::HigherIsBetter => [0, 1, 2, 3],
        Direction::LowerIsBetter => [3, 2, 1, 0],
    };
    if along_axis != expected {
        out.error(
            path,
            format!(
                "band points along increasing measurement are {along_axis:?}, which is not monotone for {}",
                match direction {
                    Direction::HigherIsBetter => "higher_is_better",
                    Direction::LowerIsBetter => "lower_is_better",
                }
            ),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qualitative(id: &str) -> Metric {
        Metric {
            metric_id: id.into(),
            description: "staff understand their responsibilities".into(),
            kind: MetricKind::Qualitative,
            unit: None,
            direction: None,
            bands: None,
            rubric: Some(Rubric {
                three: "clear understanding".into(),
                two: "partial understanding".into(),
                one: "minimal understanding".into(),
                zero: "no understanding".into(),
            }),
        }
    }

    fn band(points: u8, lower: Option<f64>, upper: Option<f64>) -> Band {
        Band {
            points,
            lower,
            upper,
        }
    }

    fn coverage_metric(bands: Vec<Band>) -> Metric {
        Metric {
            metric_id: "encryption-coverage".into(),
            description: "share of assets encrypted".into(),
            kind: MetricKind::Quantitative,
            unit: Some("percent".into()),
            direction: Some(Direction::HigherIsBetter),
            bands: Some(bands),
            rubric: None,
        }
    }

    fn standard_bands() -> Vec<Band> {
        vec![
            band(3, Some(90.0), None),
            band(2, Some(70.0), Some(90.0)),
            band(1, Some(50.0), Some(70.0)),
            band(0, None, Some(50.0)),
        ]
    }

    fn minimal() -> Catalog {
        let tiers = TierLevel::ALL
            .iter()
            .map(|&level| Tier {
                level,
                practices: vec![Practice {
                    practice_id: format!("p{}", level.rank()),
                    statement: "Do the thing".into(),
                }],
                metrics: vec![qualitative(&format!("m{}", level.rank()))],
            })
            .collect();
        Catalog {
            format_version: None,
            catalog_id: "mini".into(),
            version: "1".into(),
            title: "Minimal".into(),
            illustrative: false,
            domains: vec![Domain {
                domain_id: "risk-management".into(),
                name: "Risk Management".into(),
                kind: DomainKind::Core,
                description: "risk".into(),
                tiers,
            }],
        }
    }

    #[test]
    fn minimal_document_parses_and_validates() {
        let json = minimal().to_json_pretty();
        let parsed = parse_catalog(json.as_bytes()).unwrap();
        assert_eq!(parsed.domains.len(), 1);
        let practices: usize = parsed.domains[0]
            .tiers
            .iter()
            .map(|t| t.practices.len())
            .sum();
        let metrics: usize = parsed.domains[0]
            .tiers
            .iter()
            .map(|t| t.metrics.len())
            .sum();
        assert_eq!((practices, metrics), (3, 3));
        let report = validate_catalog(&parsed);
        assert!(report.valid);
        assert!(report.findings.is_empty(), "{:?}", report.findings);
    }

    #[test]
    fn duplicate_version_field_is_rejected() {
        let doc = br#"{"catalog_id":"x","version":"1","version":"2","title":"t","domains":[]}"#;
        let err = parse_catalog(doc).unwrap_err();
        assert!(matches!(err, CatalogError::Shape { .. }), "{err}");
        assert!(err.to_string().contains("duplicate field"));
    }

    #[test]
    fn malformed_json_is_a_syntax_error_with_position() {
        let err = parse_catalog(b"{\n  \"catalog_id\": \"x\",\n  oops\n}").unwrap_err();
        match err {
            CatalogError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn unknown_fields_and_wrong_types_are_shape_errors() {
        let doc = br#"{"catalog_id":"x","version":"1","title":"t","domains":[],"extra":1}"#;
        assert!(matches!(
            parse_catalog(doc),
            Err(CatalogError::Shape { .. })
        ));
        let doc = br#"{"catalog_id":"x","version":1,"title":"t","domains":[]}"#;
        assert!(matches!(
            parse_catalog(doc),
            Err(CatalogError::Shape { .. })
        ));
        let doc = br#"{"catalog_id":"x","title":"t","domains":[]}"#;
        assert!(matches!(
            parse_catalog(doc),
            Err(CatalogError::Shape { .. })
        ));
    }

    #[test]
    fn empty_intermediate_practices_is_the_single_finding() {
        let mut catalog = minimal();
        catalog.domains[0].tiers[1].practices.clear();
        let report = validate_catalog(&catalog);
        assert!(!report.valid);
        assert_eq!(
            report.findings,
            vec![Finding {
                severity: Severity::Error,
                path: "domains[0].tiers[Intermediate].practices".into(),
                message: "tier has no practices".into(),
            }]
        );
    }

    #[test]
    fn overlapping_bands_are_reported() {
        let mut catalog = minimal();
        catalog.domains[0].tiers[0].metrics[0] = coverage_metric(vec![
            band(3, Some(90.0), None),
            band(2, Some(70.0), Some(95.0)),
            band(1, Some(50.0), Some(70.0)),
            band(0, None, Some(50.0)),
        ]);
        let report = validate_catalog(&catalog);
        assert!(!report.valid);
        let errors: Vec<_> = report.errors().collect();
        assert_eq!(errors.len(), 1, "{errors:?}");
        assert_eq!(errors[0].path, "domains[0].tiers[Basic].metrics[0].bands");
        assert!(errors[0].message.contains("overlap"));
    }

    #[test]
    fn band_gaps_direction_and_count_are_reported() {
        let gap = coverage_metric(vec![
            band(3, Some(90.0), None),
            band(2, Some(75.0), Some(90.0)),
            band(1, Some(50.0), Some(70.0)),
            band(0, None, Some(50.0)),
        ]);
        let mut catalog = minimal();
        catalog.domains[0].tiers[0].metrics[0] = gap;
        let report = validate_catalog(&catalog);
        assert!(report.errors().any(|f| f.message.contains("gap")));

        let mut reversed = coverage_metric(standard_bands());
        reversed.direction = Some(Direction::LowerIsBetter);
        catalog.domains[0].tiers[0].metrics[0] = reversed;
        let report = validate_catalog(&catalog);
        assert!(report.errors().any(|f| f.message.contains("not monotone")));

        let mut three = standard_bands();
        three.pop();
        catalog.domains[0].tiers[0].metrics[0] = coverage_metric(three);
        let report = validate_catalog(&catalog);
        assert!(report
            .errors()
            .any(|f| f.message.contains("exactly 4 bands")));

        catalog.domains[0].tiers[0].metrics[0] = coverage_metric(vec![
            band(3, Some(90.0), Some(90.0)),
            band(2, Some(70.0), Some(90.0)),
            band(1, Some(50.0), Some(70.0)),
            band(0, None, Some(50.0)),
        ]);
        let report = validate_catalog(&catalog);
        assert!(report.errors().any(|f| f.message.contains("must be below")));
    }

    #[test]
    fn structural_rules_are_enforced() {
        let mut catalog = minimal();
        catalog.domains[0].kind = DomainKind::Elective;
        catalog.domains[0].tiers.swap(0, 1);
        catalog.domains[0].tiers[2].metrics[0]
            .rubric
            .as_mut()
            .unwrap()
            .two = "clear understanding".into();
        catalog.domains[0].description.clear();
        let report = validate_catalog(&catalog);
        let paths: Vec<&str> = report.findings.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(
            paths,
            vec![
                "domains",
                "domains[0].description",
                "domains[0].tiers",
                "domains[0].tiers[Advanced].metrics[0].rubric.2",
            ]
        );
        assert_eq!(report.findings[1].severity, Severity::Warning);
    }

    #[test]
    fn duplicate_ids_and_bad_slugs() {
        let mut catalog = minimal();
        let mut second = catalog.domains[0].clone();
        second.domain_id = "Risk_Management".into();
        catalog.domains.push(second.clone());
        second.domain_id = "risk-management".into();
        catalog.domains.push(second);
        catalog.domains[0].tiers[1].practices[0].practice_id = "p1".into();
        let report = validate_catalog(&catalog);
        let messages: Vec<&str> = report.errors().map(|f| f.message.as_str()).collect();
        assert!(messages
            .iter()
            .any(|m| m.contains("duplicate practice id `p1`")));
        assert!(messages.iter().any(|m| m.contains("is not a slug")));
        assert!(messages.iter().any(|m| m.contains("duplicate domain id")));
    }

    #[test]
    fn band_lookup_is_lower_inclusive() {
        let metric = coverage_metric(standard_bands());
        assert_eq!(metric.points_for(90.0), Some(3));
        assert_eq!(metric.points_for(89.999), Some(2));
        assert_eq!(metric.points_for(70.0), Some(2));
        assert_eq!(metric.points_for(-5.0), Some(0));
        assert_eq!(metric.points_for(f64::INFINITY), Some(3));
        assert_eq!(metric.points_for(f64::NAN), None);
        assert_eq!(qualitative("q").points_for(50.0), None);
    }

    #[test]
    fn slugs() {
        assert!(is_slug("data-security"));
        assert!(is_slug("p1"));
        assert!(!is_slug(""));
        assert!(!is_slug("Data"));
        assert!(!is_slug("-a"));
        assert!(!is_slug("a--b"));
        assert!(!is_slug("a/b"));
    }

    #[test]
    fn tier_parsing() {
        assert_eq!("Advanced".parse::<TierLevel>(), Ok(TierLevel::Advanced));
        assert_eq!("2".parse::<TierLevel>(), Ok(TierLevel::Intermediate));
        assert!("expert".parse::<TierLevel>().is_err());
        assert!(TierLevel::Basic < TierLevel::Advanced);
    }
}
