//! Flat-file store for catalogs and assessments.
//!
//! Layout under the root:
//!
//! ```text
//! catalogs/<catalog_id>@<version>.json
//! assessments/<assessment_id>.json
//! ```
//!
//! Writes go to a temporary file in the same directory and are renamed into
//! place. Callers serialise mutations per assessment id; there is no
//! cross-process locking.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assessment::{Assessment, AssessmentError, ASSESSMENT_FORMAT_VERSION};
use crate::catalog::{builtin_catalog, parse_catalog, validate_catalog, Catalog};

pub const CATALOG_FORMAT_VERSION: &str = "1";
pub const HOME_ENV: &str = "CCMF_HOME";
pub const DEFAULT_ROOT: &str = ".ccmf";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("`{0}` is not a valid identifier for a stored document")]
    InvalidId(String),
    #[error("{kind} `{id}` not found")]
    NotFound { kind: &'static str, id: String },
    #[error("{path}: unsupported format_version `{found}`")]
    FormatVersionUnsupported { path: PathBuf, found: String },
    #[error("{path}: corrupt document: {message}")]
    CorruptDocument { path: PathBuf, message: String },
    #[error("serialisation failed: {0}")]
    Serialisation(String),
    #[error("catalog {0} already stored with different content; bump its version")]
    CatalogImmutable(String),
    #[error("catalog {id} failed validation: {findings}")]
    InvalidCatalog { id: String, findings: String },
    #[error("assessment `{id}` is invalid against its catalog: {source}")]
    InvalidAssessment {
        id: String,
        #[source]
        source: AssessmentError,
    },
}

impl StoreError {
    fn io(path: &Path, source: io::Error) -> Self {
        StoreError::Io {
            path: path.to_owned(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentSummary {
    pub assessment_id: String,
    pub organisation: String,
    pub updated: DateTime<Utc>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Listing {
    pub assessments: Vec<AssessmentSummary>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogSummary {
    pub catalog_id: String,
    pub version: String,
    pub title: String,
    pub builtin: bool,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

/// Characters allowed in ids that become file names.
fn is_safe_component(s: &str) -> bool {
    !s.is_empty()
        && s != "."
        && !s.contains("..")
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.'))
}

impl Store {
    /// Opens (creating if needed) a store rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let store = Store { root: root.into() };
        for dir in [store.catalog_dir(), store.assessment_dir()] {
            fs::create_dir_all(&dir).map_err(|e| StoreError::io(&dir, e))?;
        }
        Ok(store)
    }

    /// Root from an explicit flag, else `CCMF_HOME`, else `./.ccmf`.
    pub fn resolve_root(explicit: Option<&Path>) -> PathBuf {
        explicit
            .map(Path::to_path_buf)
            .or_else(|| std::env::var_os(HOME_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_ROOT))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn catalog_dir(&self) -> PathBuf {
        self.root.join("catalogs")
    }

    fn assessment_dir(&self) -> PathBuf {
        self.root.join("assessments")
    }

    pub fn catalog_path(&self, catalog_id: &str, version: &str) -> Result<PathBuf, StoreError> {
        for part in [catalog_id, version] {
            if !is_safe_component(part) || part.contains('@') {
                return Err(StoreError::InvalidId(part.to_owned()));
            }
        }
        Ok(self
            .catalog_dir()
            .join(format!("{catalog_id}@{version}.json")))
    }

    pub fn assessment_path(&self, assessment_id: &str) -> Result<PathBuf, StoreError> {
        if !is_safe_component(assessment_id) || assessment_id.contains('.') {
            return Err(StoreError::InvalidId(assessment_id.to_owned()));
        }
        Ok(self.assessment_dir().join(format!("{assessment_id}.json")))
    }

    /// Stores a validated catalog. A stored catalog version is immutable:
    /// saving different content under the same id and version fails.
    pub fn save_catalog(&self, catalog: &Catalog) -> Result<PathBuf, StoreError> {
        let report = validate_catalog(catalog);
        if !report.valid {
            let findings: Vec<String> = report.errors().map(ToString::to_string).collect();
            return Err(StoreError::InvalidCatalog {
                id: format!("{}@{}", catalog.catalog_id, catalog.version),
                findings: findings.join("; "),
            });
        }
        let path = self.catalog_path(&catalog.catalog_id, &catalog.version)?;
        let mut stamped = catalog.clone();
        stamped.format_version = Some(CATALOG_FORMAT_VERSION.to_owned());
        if path.exists() {
            let existing = self.read_catalog_file(&path)?;
            let mut compare = existing.clone();
            compare.format_version = stamped.format_version.clone();
            if compare == stamped {
                return Ok(path);
            }
            return Err(StoreError::CatalogImmutable(format!(
                "{}@{}",
                catalog.catalog_id, catalog.version
            )));
        }
        let bytes = serde_json::to_vec_pretty(&stamped)
            .map_err(|e| StoreError::Serialisation(e.to_string()))?;
        write_atomic(&path, &bytes, |from, to| fs::rename(from, to))?;
        Ok(path)
    }

    fn read_catalog_file(&self, path: &Path) -> Result<Catalog, StoreError> {
        let bytes = fs::read(path).map_err(|e| StoreError::io(path, e))?;
        let catalog = parse_catalog(&bytes).map_err(|e| StoreError::CorruptDocument {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        if let Some(found) = &catalog.format_version {
            if found != CATALOG_FORMAT_VERSION {
                return Err(StoreError::FormatVersionUnsupported {
                    path: path.to_owned(),
                    found: found.clone(),
                });
            }
        }
        Ok(catalog)
    }

    /// Built-in catalog first, then stored catalogs.
    pub fn load_catalog(&self, catalog_id: &str, version: &str) -> Result<Catalog, StoreError> {
        let builtin = builtin_catalog();
        if builtin.catalog_id == catalog_id && builtin.version == version {
            return Ok(builtin);
        }
        let path = self.catalog_path(catalog_id, version)?;
        if !path.exists() {
            return Err(StoreError::NotFound {
                kind: "catalog",
                id: format!("{catalog_id}@{version}"),
            });
        }
        let mut catalog = self.read_catalog_file(&path)?;
        catalog.format_version = None;
        Ok(catalog)
    }

    /// The built-in catalog plus every stored catalog, sorted by id and version.
    pub fn list_catalogs(&self) -> Result<Vec<CatalogSummary>, StoreError> {
        let builtin = builtin_catalog();
        let mut out = vec![CatalogSummary {
            catalog_id: builtin.catalog_id.clone(),
            version: builtin.version.clone(),
            title: builtin.title.clone(),
            builtin: true,
        }];
        let dir = self.catalog_dir();
        let mut stored = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| StoreError::io(&dir, e))? {
            let path = entry.map_err(|e| StoreError::io(&dir, e))?.path();
            if path.extension().is_some_and(|e| e == "json") {
                // Unreadable catalogs are skipped; load_catalog reports them.
                if let Ok(c) = self.read_catalog_file(&path) {
                    stored.push(CatalogSummary {
                        catalog_id: c.catalog_id,
                        version: c.version,
                        title: c.title,
                        builtin: false,
                    });
                }
            }
        }
        stored.sort_by(|a, b| (&a.catalog_id, &a.version).cmp(&(&b.catalog_id, &b.version)));
        out.extend(stored);
        Ok(out)
    }

    /// Refreshes `updated`, bumps `entity_version` and writes atomically.
    pub fn save_assessment(&self, assessment: &mut Assessment) -> Result<PathBuf, StoreError> {
        self.save_assessment_with(assessment, |from, to| fs::rename(from, to))
    }

    pub(crate) fn save_assessment_with(
        &self,
        assessment: &mut Assessment,
        rename: impl FnOnce(&Path, &Path) -> io::Result<()>,
    ) -> Result<PathBuf, StoreError> {
        let path = self.assessment_path(&assessment.assessment_id)?;
        let mut next = assessment.clone();
        next.updated = Utc::now().max(assessment.updated);
        next.entity_version = assessment.entity_version + 1;
        let bytes = serde_json::to_vec_pretty(&next)
            .map_err(|e| StoreError::Serialisation(e.to_string()))?;
        write_atomic(&path, &bytes, rename)?;
        *assessment = next;
        Ok(path)
    }

    fn read_assessment_file(&self, path: &Path) -> Result<Assessment, StoreError> {
        let bytes = fs::read(path).map_err(|e| StoreError::io(path, e))?;
        let corrupt = |message: String| StoreError::CorruptDocument {
            path: path.to_owned(),
            message,
        };
        let value: serde_json::Value =
            serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))?;
        match value.get("format_version").and_then(|v| v.as_str()) {
            Some(ASSESSMENT_FORMAT_VERSION) => {}
            Some(other) => {
                return Err(StoreError::FormatVersionUnsupported {
                    path: path.to_owned(),
                    found: other.to_owned(),
                })
            }
            None => return Err(corrupt("missing format_version".into())),
        }
        serde_json::from_slice(&bytes).map_err(|e| corrupt(e.to_string()))
    }

    /// Loads an assessment and checks it against its pinned catalog.
    pub fn load_assessment(&self, assessment_id: &str) -> Result<Assessment, StoreError> {
        Ok(self.load_assessment_with_catalog(assessment_id)?.0)
    }

    pub fn load_assessment_with_catalog(
        &self,
        assessment_id: &str,
    ) -> Result<(Assessment, Catalog), StoreError> {
        let path = self.assessment_path(assessment_id)?;
        if !path.exists() {
            return Err(StoreError::NotFound {
                kind: "assessment",
                id: assessment_id.to_owned(),
            });
        }
        let assessment = self.read_assessment_file(&path)?;
        if assessment.assessment_id != assessment_id {
            return Err(StoreError::CorruptDocument {
                path,
                message: format!("file holds assessment `{}`", assessment.assessment_id),
            });
        }
        let catalog = self.load_catalog(&assessment.catalog_id, &assessment.catalog_version)?;
        assessment
            .check_invariants(&catalog)
            .map_err(|source| StoreError::InvalidAssessment {
                id: assessment_id.to_owned(),
                source,
            })?;
        Ok((assessment, catalog))
    }

    pub fn delete_assessment(&self, assessment_id: &str) -> Result<(), StoreError> {
        let path = self.assessment_path(assessment_id)?;
        match fs::remove_file(&path) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::NotFound {
                kind: "assessment",
                id: assessment_id.to_owned(),
            }),
            Err(e) => Err(StoreError::io(&path, e)),
        }
    }

    /// Newest first. Unreadable files become warnings.
    pub fn list_assessments(&self) -> Result<Listing, StoreError> {
        let dir = self.assessment_dir();
        let mut listing = Listing::default();
        let mut paths: Vec<PathBuf> = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| StoreError::io(&dir, e))? {
            let path = entry.map_err(|e| StoreError::io(&dir, e))?.path();
            let is_json = path.extension().is_some_and(|e| e == "json");
            let hidden = path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with('.'));
            if is_json && !hidden {
                paths.push(path);
            }
        }
        paths.sort();
        for path in paths {
            match self.read_assessment_file(&path) {
                Ok(a) => listing.assessments.push(AssessmentSummary {
                    assessment_id: a.assessment_id,
                    organisation: a.organisation,
                    updated: a.updated,
                }),
                Err(e) => listing.warnings.push(e.to_string()),
            }
        }
        listing.assessments.sort_by(|a, b| {
            b.updated
                .cmp(&a.updated)
                .then_with(|| a.assessment_id.cmp(&b.assessment_id))
        });
        Ok(listing)
    }
}

fn write_atomic(
    path: &Path,
    bytes: &[u8],
    rename: impl FnOnce(&Path, &Path) -> io::Result<()>,
) -> Result<(), StoreError> {
    let dir = path.parent().expect("store paths have a parent");
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .expect("store paths have a utf-8 file name");
    let tmp = dir.join(format!(
        ".{file_name}.{}.tmp",
        uuid::Uuid::new_v4().simple()
    ));
    let result = (|| {
        let mut file = fs::File::create(&tmp).map_err(|e| StoreError::io(&tmp, e))?;
        file.write_all(bytes).map_err(|e| StoreError::io(&tmp, e))?;
        file.sync_all().map_err(|e| StoreError::io(&tmp, e))?;
        drop(file);
        rename(&tmp, path).map_err(|e| StoreError::io(path, e))
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
