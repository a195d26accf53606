use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ScoringError;

/// Importance factors a practitioner assigns to one domain, each 1..3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorScores {
    pub risk_impact: u8,
    pub compliance_requirement: u8,
    pub business_impact: u8,
    pub interdependency: u8,
}

impl FactorScores {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 3;

    pub fn new(
        risk_impact: u8,
        compliance_requirement: u8,
        business_impact: u8,
        interdependency: u8,
    ) -> Self {
        FactorScores {
            risk_impact,
            compliance_requirement,
            business_impact,
            interdependency,
        }
    }

    pub fn named(&self) -> [(&'static str, u8); 4] {
        [
            ("risk_impact", self.risk_impact),
            ("compliance_requirement", self.compliance_requirement),
            ("business_impact", self.business_impact),
            ("interdependency", self.interdependency),
        ]
    }

    /// First factor outside 1..3, if any.
    pub fn out_of_range(&self) -> Option<(&'static str, u8)> {
        self.named()
            .into_iter()
            .find(|(_, v)| !(Self::MIN..=Self::MAX).contains(v))
    }

    /// Sum of the four factors, 4..12 for valid scores.
    pub fn total(&self) -> u32 {
        self.named().iter().map(|(_, v)| u32::from(*v)).sum()
    }
}

/// Per-domain factor scores, keyed by domain id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightProfile(BTreeMap<String, FactorScores>);

impl WeightProfile {
    pub fn insert(&mut self, domain_id: impl Into<String>, factors: FactorScores) {
        self.0.insert(domain_id.into(), factors);
    }

    pub fn get(&self, domain_id: &str) -> Option<&FactorScores> {
        self.0.get(domain_id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &FactorScores)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn merge(&mut self, other: WeightProfile) {
        self.0.extend(other.0);
    }
}

impl FromIterator<(String, FactorScores)> for WeightProfile {
    fn from_iter<I: IntoIterator<Item = (String, FactorScores)>>(iter: I) -> Self {
        WeightProfile(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainWeight {
    pub domain_id: String,
    pub total: u32,
    pub weight: f64,
}

/// Divides each total by the sum of all totals.
pub fn normalise_totals(totals: &[f64]) -> Vec<f64> {
    let sum = totals.iter().fold(0.0, |acc, t| acc + t);
    totals.iter().map(|t| t / sum).collect()
}

/// Weighted Sum Model weights for `domain_ids`, in the given order. The
/// profile must cover exactly those domains.
pub fn derive_weights(
    profile: &WeightProfile,
    domain_ids: &[&str],
) -> Result<Vec<DomainWeight>, ScoringError> {
    if let Some(extra) = profile
        .iter()
        .map(|(id, _)| id)
        .find(|id| !domain_ids.contains(&id.as_str()))
    {
        return Err(ScoringError::ExtraDomain(extra.clone()));
    }
    let mut totals = Vec::with_capacity(domain_ids.len());
    for &id in domain_ids {
        let factors = profile
            .get(id)
            .ok_or_else(|| ScoringError::MissingDomain(id.to_owned()))?;
        if let Some((factor, value)) = factors.out_of_range() {
            return Err(ScoringError::FactorOutOfRange {
                domain_id: id.to_owned(),
                factor,
                value,
            });
        }
        totals.push(factors.total());
    }
    let as_real: Vec<f64> = totals.iter().map(|&t| f64::from(t)).collect();
    let weights = normalise_totals(&as_real);
    Ok(domain_ids
        .iter()
        .zip(totals)
        .zip(weights)
        .map(|((id, total), weight)| DomainWeight {
            domain_id: (*id).to_owned(),
            total,
            weight,
        })
        .collect())
}
