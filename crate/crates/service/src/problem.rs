//! Structured error bodies: `{status, code, message, details}`.

use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use ccmf_core::reporting::ReportingError;
use ccmf_core::{AssessmentError, ScoringError, StoreError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const PROBLEM_CONTENT_TYPE: &str = "application/problem+json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub status: u16,
    pub code: String,
    pub message: String,
    #[serde(default)]
    pub details: Value,
}

impl Problem {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Problem {
            status: status.as_u16(),
            code: code.to_owned(),
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Problem::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }
}

impl IntoResponse for Problem {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        let body = serde_json::to_vec(&self).expect("problem serialises");
        let mut response = (status, body).into_response();
        response.headers_mut().insert(
            header::CONTENT_TYPE,
            HeaderValue::from_static(PROBLEM_CONTENT_TYPE),
        );
        response
    }
}

fn unprocessable(code: &str, err: &impl std::fmt::Display) -> Problem {
    Problem::new(StatusCode::UNPROCESSABLE_ENTITY, code, err.to_string())
}

impl From<AssessmentError> for Problem {
    fn from(err: AssessmentError) -> Self {
        let code = match &err {
            AssessmentError::UnknownDomain(_) => "UnknownDomain",
            AssessmentError::NotElective(_) => "NotElective",
            AssessmentError::DuplicateElective(_) => "DuplicateElective",
            AssessmentError::DomainNotSelected(_) => "DomainNotSelected",
            AssessmentError::UnknownPractice { .. } => "UnknownPractice",
            AssessmentError::UnknownMetric { .. } => "UnknownMetric",
            AssessmentError::OutOfScope { .. } => "OutOfScope",
            AssessmentError::WrongKind { .. } => "WrongKind",
            AssessmentError::InvalidPoints(_) => "InvalidPoints",
            AssessmentError::InvalidRating(_) => "InvalidRating",
            AssessmentError::UnmappedMeasurement { .. } => "UnmappedMeasurement",
            AssessmentError::CatalogMismatch { .. } => "CatalogMismatch",
            AssessmentError::FactorOutOfRange { .. } => "FactorOutOfRange",
            AssessmentError::Invalid(_) => "InvalidAssessment",
        };
        unprocessable(code, &err)
    }
}

impl From<ScoringError> for Problem {
    fn from(err: ScoringError) -> Self {
        match &err {
            ScoringError::Incomplete { missing } => {
                Problem::new(StatusCode::CONFLICT, "Incomplete", err.to_string())
                    .with_details(json!({ "missing": missing }))
            }
            ScoringError::CatalogMismatch { .. } => unprocessable("CatalogMismatch", &err),
            ScoringError::MissingRatings(_) => unprocessable("MissingRatings", &err),
            ScoringError::MissingEvaluations(_) => unprocessable("MissingEvaluations", &err),
            ScoringError::EmptyScope(_) => unprocessable("EmptyScope", &err),
            ScoringError::InvalidPoints { .. } => unprocessable("InvalidPoints", &err),
            ScoringError::OutOfRange(_) => unprocessable("OutOfRange", &err),
            ScoringError::UnknownDomain(_) => unprocessable("UnknownDomain", &err),
            ScoringError::MissingDomain(_) => unprocessable("MissingDomain", &err),
            ScoringError::ExtraDomain(_) => unprocessable("ExtraDomain", &err),
            ScoringError::FactorOutOfRange { .. } => unprocessable("FactorOutOfRange", &err),
            ScoringError::WeightSumInvalid(_) => unprocessable("WeightSumInvalid", &err),
        }
    }
}

impl From<StoreError> for Problem {
    fn from(err: StoreError) -> Self {
        let (status, code) = match &err {
            StoreError::NotFound { .. } => (StatusCode::NOT_FOUND, "NotFound"),
            StoreError::InvalidId(_) => (StatusCode::BAD_REQUEST, "InvalidId"),
            StoreError::CatalogImmutable(_) => (StatusCode::CONFLICT, "CatalogImmutable"),
            StoreError::InvalidCatalog { .. } => {
                (StatusCode::UNPROCESSABLE_ENTITY, "InvalidCatalog")
            }
            StoreError::FormatVersionUnsupported { .. } => (
                StatusCode::INTERNAL_SERVER_ERROR,
                "FormatVersionUnsupported",
            ),
            StoreError::CorruptDocument { .. } => {
                (StatusCode::INTERNAL_SERVER_ERROR, "CorruptDocument")
            }
            StoreError::InvalidAssessment { .. } => {
                (StatusCode::INTERNAL_SERVER_ERROR, "InvalidAssessment")
            }
            StoreError::Io { .. } => (StatusCode::INTERNAL_SERVER_ERROR, "StoreError"),
            StoreError::Serialisation(_) => (StatusCode::INTERNAL_SERVER_ERROR, "StoreError"),
        };
        Problem::new(status, code, err.to_string())
    }
}

impl From<ReportingError> for Problem {
    fn from(err: ReportingError) -> Self {
        match &err {
            ReportingError::UnsupportedFormat(_) => Problem::new(
                StatusCode::BAD_REQUEST,
                "UnsupportedFormat",
                err.to_string(),
            ),
            ReportingError::ReportMismatch(_) => Problem::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                "ReportMismatch",
                err.to_string(),
            ),
        }
    }
}
