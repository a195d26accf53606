//! The `ccmf` command line. [`run`] is the whole program minus process exit,
//! so tests can drive it with in-memory streams.

pub mod args;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use ccmf_core::catalog::{builtin_catalog, parse_catalog, validate_catalog, Catalog};
use ccmf_core::reporting::{export, gap_analysis, ExportFormat};
use ccmf_core::scoring::{FactorScores, WeightProfile, WeightSource};
use ccmf_core::{
    score_assessment, Assessment, Rating, RatingValue, ScoreOptions, ScoreReport, Store,
};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::{AssessCommand, CatalogCommand, Command, ScoringFlags};
pub use args::{Cli, OutputFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// A failed command: a message and its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn domain(message: impl fmt::Display) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: message.to_string(),
        }
    }

    fn usage(message: impl fmt::Display) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

macro_rules! domain_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(err: $t) -> Self {
                Failure::domain(err)
            }
        }
    )*};
}

domain_errors!(
    ccmf_core::AssessmentError,
    ccmf_core::ScoringError,
    ccmf_core::StoreError,
    ccmf_core::catalog::CatalogError,
    ccmf_core::reporting::ReportingError
);

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::domain(err)
    }
}

type Outcome = Result<(), Failure>;

/// Parses `args` (program name first) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            let _ = write!(err, "{rendered}");
            if !rendered.contains("Usage:") {
                let _ = writeln!(err, "\n{}", Cli::command().render_usage());
            }
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let store = || Store::open(Store::resolve_root(cli.store.as_deref()));
    match &cli.command {
        Command::Catalog(cmd) => catalog(cli, cmd, out, err),
        Command::Assess(cmd) => assess(cli, &store()?, cmd, out),
        Command::Score {
            assessment,
            scoring,
            trace,
        } => score(cli, &store()?, assessment, *scoring, *trace, out),
        Command::Report {
            assessment,
            scoring,
            out: file,
        } => report(cli, &store()?, assessment, *scoring, file.as_deref(), out),
        Command::Gaps {
            assessment,
            scoring,
        } => gaps(cli, &store()?, assessment, *scoring, out),
        Command::Serve {
            bind,
            port,
            static_dir,
        } => {
            let mut config =
                ccmf_service::ServiceConfig::new(Store::resolve_root(cli.store.as_deref()));
            config.bind = *bind;
            config.port = *port;
            config.static_dir = static_dir.clone();
            if !cli.quiet {
                writeln!(out, "serving on http://{}", config.addr())?;
                out.flush()?;
            }
            let runtime = tokio::runtime::Runtime::new()?;
            runtime
                .block_on(ccmf_service::serve(config))
                .map_err(Failure::domain)
        }
    }
}

fn wants(cli: &Cli, format: OutputFormat) -> bool {
    cli.format == Some(format)
}

fn print_json<T: serde::Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(Failure::domain)?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn reject_csv(cli: &Cli, what: &str) -> Outcome {
    if wants(cli, OutputFormat::Csv) {
        return Err(Failure::usage(format!(
            "--format csv is not available for {what}"
        )));
    }
    Ok(())
}

/// Resolves `--catalog`: `id@version`, a bare id (newest stored version), or the built-in.
fn selected_catalog(cli: &Cli, store: &Store) -> Result<Catalog, Failure> {
    let Some(wanted) = cli.catalog.as_deref() else {
        return Ok(builtin_catalog());
    };
    if let Some((id, version)) = wanted.split_once('@') {
        return Ok(store.load_catalog(id, version)?);
    }
    let version = store
        .list_catalogs()?
        .into_iter()
        .filter(|c| c.catalog_id == wanted)
        .map(|c| c.version)
        .next_back()
        .ok_or_else(|| Failure::domain(format!("catalog `{wanted}` not found")))?;
    Ok(store.load_catalog(wanted, &version)?)
}

fn catalog(cli: &Cli, cmd: &CatalogCommand, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    reject_csv(cli, "catalogs")?;
    match cmd {
        CatalogCommand::Validate { file } => {
            let catalog = read_catalog(file)?;
            let report = validate_catalog(&catalog);
            if wants(cli, OutputFormat::Json) {
                print_json(out, &report)?;
            } else {
                for finding in &report.findings {
                    writeln!(out, "{finding}")?;
                }
                if !cli.quiet {
                    let errors = report.errors().count();
                    let warnings = report.findings.len() - errors;
                    writeln!(
                        out,
                        "{}: {errors} error(s), {warnings} warning(s)",
                        file.display()
                    )?;
                }
            }
            if report.valid {
                Ok(())
            } else {
                Err(Failure::domain(format!(
                    "{} is not a valid catalog",
                    file.display()
                )))
            }
        }
        CatalogCommand::Show => {
            let store = Store::open(Store::resolve_root(cli.store.as_deref()))?;
            let catalog = selected_catalog(cli, &store)?;
            if wants(cli, OutputFormat::Json) {
                writeln!(out, "{}", catalog.to_json_pretty())?;
                return Ok(());
            }
            writeln!(
                out,
                "{} {} ({})",
                catalog.catalog_id, catalog.version, catalog.title
            )?;
            writeln!(
                out,
                "{:<52} {:<9} {:>9} {:>9} {:>9}",
                "DOMAIN", "KIND", "BASIC", "INTERMED", "ADVANCED"
            )?;
            for d in &catalog.domains {
                let counts: Vec<String> = d
                    .tiers
                    .iter()
                    .map(|t| format!("{}p/{}m", t.practices.len(), t.metrics.len()))
                    .collect();
                let kind = format!("{:?}", d.kind).to_lowercase();
                writeln!(
                    out,
                    "{:<52} {:<9} {:>9} {:>9} {:>9}",
                    d.domain_id,
                    kind,
                    counts.first().map_or("", String::as_str),
                    counts.get(1).map_or("", String::as_str),
                    counts.get(2).map_or("", String::as_str),
                )?;
            }
            Ok(())
        }
        CatalogCommand::Import { file } => {
            let store = Store::open(Store::resolve_root(cli.store.as_deref()))?;
            let catalog = read_catalog(file)?;
            for warning in validate_catalog(&catalog).findings {
                writeln!(err, "{warning}")?;
            }
            let path = store.save_catalog(&catalog)?;
            if !cli.quiet {
                writeln!(
                    out,
                    "stored {}@{} at {}",
                    catalog.catalog_id,
                    catalog.version,
                    path.display()
                )?;
            }
            Ok(())
        }
        CatalogCommand::List => {
            let store = Store::open(Store::resolve_root(cli.store.as_deref()))?;
            let catalogs = store.list_catalogs()?;
            if wants(cli, OutputFormat::Json) {
                return print_json(out, &catalogs);
            }
            for c in catalogs {
                let tag = if c.builtin { " (built-in)" } else { "" };
                writeln!(out, "{}@{}  {}{tag}", c.catalog_id, c.version, c.title)?;
            }
            Ok(())
        }
    }
}

fn read_catalog(file: &Path) -> Result<Catalog, Failure> {
    let bytes = fs::read(file).map_err(|e| Failure::domain(format!("{}: {e}", file.display())))?;
    parse_catalog(&bytes).map_err(|e| Failure::domain(format!("{}: {e}", file.display())))
}

fn assess(cli: &Cli, store: &Store, cmd: &AssessCommand, out: &mut dyn Write) -> Outcome {
    reject_csv(cli, "assessments")?;
    match cmd {
        AssessCommand::New { org, electives } => {
            let catalog = selected_catalog(cli, store)?;
            let mut assessment = Assessment::create(org, &catalog, electives)?;
            store.save_assessment(&mut assessment)?;
            if wants(cli, OutputFormat::Json) {
                return print_json(out, &assessment);
            }
            if cli.quiet {
                writeln!(out, "{}", assessment.assessment_id)?;
            } else {
                writeln!(
                    out,
                    "created {} for {} ({} domains, catalog {})",
                    assessment.assessment_id,
                    assessment.organisation,
                    assessment.selections.len(),
                    assessment.catalog_ref()
                )?;
            }
            Ok(())
        }
        AssessCommand::Tier {
            assessment,
            domain,
            tier,
        } => edit(cli, store, assessment, out, |a, c| {
            a.set_target_tier(c, domain, *tier)?;
            Ok(format!("{domain}: target tier {tier}"))
        }),
        AssessCommand::Rate {
            assessment,
            domain,
            practice,
            value,
            note,
        } => edit(cli, store, assessment, out, |a, c| {
            let value = RatingValue::try_from(*value)?;
            let rating = Rating {
                value,
                note: note.clone(),
            };
            a.rate_practice(c, domain, practice, rating)?;
            Ok(format!("{domain}/{practice}: {value}"))
        }),
        AssessCommand::Eval {
            assessment,
            domain,
            metric,
            value,
            points,
            note,
        } => edit(cli, store, assessment, out, |a, c| match (value, points) {
            (Some(v), _) => {
                let awarded = a.evaluate_quantitative(c, domain, metric, *v, note.clone())?;
                Ok(format!("{domain}/{metric}: {v} -> {awarded} point(s)"))
            }
            (None, Some(p)) => {
                a.evaluate_qualitative(c, domain, metric, *p, note.clone())?;
                Ok(format!("{domain}/{metric}: {p} point(s)"))
            }
            (None, None) => Err(Failure::usage("give --value or --points")),
        }),
        AssessCommand::Weights {
            assessment,
            entries,
            clear,
        } => {
            let update = if *clear {
                None
            } else {
                Some(parse_weights(entries)?)
            };
            edit(cli, store, assessment, out, |a, _| match update {
                None => {
                    a.set_weight_profile(None)?;
                    Ok("weight profile cleared".to_owned())
                }
                Some(update) => {
                    let mut profile = a.weight_profile.clone().unwrap_or_default();
                    profile.merge(update);
                    let n = profile.len();
                    a.set_weight_profile(Some(profile))?;
                    Ok(format!("weight profile covers {n} domain(s)"))
                }
            })
        }
        AssessCommand::Show { assessment } => {
            let (a, catalog) = store.load_assessment_with_catalog(assessment)?;
            if wants(cli, OutputFormat::Json) {
                return print_json(out, &a);
            }
            let summary = a.completeness(&catalog)?;
            writeln!(
                out,
                "{} {} (catalog {}, version {})",
                a.assessment_id,
                a.organisation,
                a.catalog_ref(),
                a.entity_version
            )?;
            writeln!(
                out,
                "{:<52} {:<13} {:>9} {:>9}",
                "DOMAIN", "TARGET", "PRACTICES", "METRICS"
            )?;
            for d in &summary.domains {
                writeln!(
                    out,
                    "{:<52} {:<13} {:>9} {:>9}",
                    d.domain_id,
                    d.target_tier.to_string(),
                    format!("{}/{}", d.rated_practices, d.required_practices),
                    format!("{}/{}", d.evaluated_metrics, d.required_metrics),
                )?;
                if !cli.quiet {
                    for id in &d.missing_practices {
                        writeln!(out, "    unrated practice {id}")?;
                    }
                    for id in &d.missing_metrics {
                        writeln!(out, "    unevaluated metric {id}")?;
                    }
                }
            }
            let state = if summary.overall_complete {
                "complete"
            } else {
                "incomplete"
            };
            writeln!(out, "{state}")?;
            Ok(())
        }
        AssessCommand::List => {
            let listing = store.list_assessments()?;
            if wants(cli, OutputFormat::Json) {
                return print_json(out, &listing);
            }
            for s in &listing.assessments {
                if cli.quiet {
                    writeln!(out, "{}", s.assessment_id)?;
                } else {
                    writeln!(
                        out,
                        "{}  {}  {}",
                        s.assessment_id,
                        s.updated.to_rfc3339(),
                        s.organisation
                    )?;
                }
            }
            for w in &listing.warnings {
                writeln!(out, "warning: {w}")?;
            }
            Ok(())
        }
        AssessCommand::Delete { assessment } => {
            store.delete_assessment(assessment)?;
            if !cli.quiet {
                writeln!(out, "deleted {assessment}")?;
            }
            Ok(())
        }
    }
}

/// Loads, edits and saves one assessment, then reports what changed.
fn edit<F>(cli: &Cli, store: &Store, id: &str, out: &mut dyn Write, apply: F) -> Outcome
where
    F: FnOnce(&mut Assessment, &Catalog) -> Result<String, Failure>,
{
    let (mut a, catalog) = store.load_assessment_with_catalog(id)?;
    let summary = apply(&mut a, &catalog)?;
    store.save_assessment(&mut a)?;
    if wants(cli, OutputFormat::Json) {
        print_json(out, &a)
    } else {
        if !cli.quiet {
            writeln!(out, "{summary}")?;
        }
        Ok(())
    }
}

fn parse_weights(entries: &[String]) -> Result<WeightProfile, Failure> {
    if entries.is_empty() || entries.len() % 5 != 0 {
        return Err(Failure::usage(
            "weights take groups of five: <domain> <risk> <compliance> <business> <interdependency>",
        ));
    }
    let mut profile = WeightProfile::default();
    for group in entries.chunks(5) {
        let mut factors = [0u8; 4];
        for (slot, text) in factors.iter_mut().zip(&group[1..]) {
            *slot = text
                .parse()
                .map_err(|_| Failure::usage(format!("weight factor `{text}` is not a number")))?;
        }
        let [r, c, b, i] = factors;
        profile.insert(group[0].clone(), FactorScores::new(r, c, b, i));
    }
    Ok(profile)
}

fn scored(
    store: &Store,
    id: &str,
    flags: ScoringFlags,
) -> Result<(Assessment, Catalog, ScoreReport), Failure> {
    let (a, catalog) = store.load_assessment_with_catalog(id)?;
    let options = ScoreOptions {
        missing_as_zero: flags.missing_as_zero,
    };
    match score_assessment(&a, &catalog, options) {
        Ok(report) => Ok((a, catalog, report)),
        Err(ccmf_core::ScoringError::Incomplete { missing }) => {
            let mut message = format!(
                "assessment incomplete: {} item(s) missing (use --missing-as-zero to score anyway)",
                missing.len()
            );
            for m in &missing {
                message.push_str(
                    &format!("\n  {} {:?} {}", m.domain_id, m.kind, m.item_id).to_lowercase(),
                );
            }
            Err(Failure::domain(message))
        }
        Err(e) => Err(e.into()),
    }
}

fn score(
    cli: &Cli,
    store: &Store,
    id: &str,
    flags: ScoringFlags,
    trace: bool,
    out: &mut dyn Write,
) -> Outcome {
    let (a, catalog, report) = scored(store, id, flags)?;
    match cli.format {
        Some(OutputFormat::Json) => {
            out.write_all(&report.to_canonical_json())?;
            Ok(())
        }
        Some(OutputFormat::Csv) => {
            let gaps = gap_analysis(&a, &catalog, &report)?;
            out.write_all(&export(&report, &gaps, ExportFormat::Csv)?)?;
            Ok(())
        }
        Some(OutputFormat::Table) | None => {
            if cli.quiet {
                writeln!(out, "{} {}", report.oms.display(), report.overall_level)?;
                return Ok(());
            }
            writeln!(out, "{} ({})", report.organisation, report.assessment_id)?;
            writeln!(
                out,
                "{:<52} {:<13} {:>7} {:>7} {:>7} {:<10} {:>7}",
                "DOMAIN", "TARGET", "PIS", "MAS", "DS", "LEVEL", "WEIGHT"
            )?;
            for d in &report.domains {
                writeln!(
                    out,
                    "{:<52} {:<13} {:>7} {:>7} {:>7} {:<10} {:>6}%",
                    d.domain_id,
                    d.target_tier.to_string(),
                    d.pis.display(),
                    d.mas.display(),
                    d.ds.display(),
                    d.level.to_string(),
                    d.weight_percent.display(),
                )?;
            }
            let source = match report.weight_source {
                WeightSource::Profile => "weight profile",
                WeightSource::DefaultEqualWeights => "equal weights",
            };
            writeln!(
                out,
                "OMS {} {} ({source})",
                report.oms.display(),
                report.overall_level
            )?;
            if trace {
                writeln!(out)?;
                writeln!(out, "trace:")?;
                for step in &report.trace.steps {
                    writeln!(out, "  {}", step.describe())?;
                }
            }
            Ok(())
        }
    }
}

fn report(
    cli: &Cli,
    store: &Store,
    id: &str,
    flags: ScoringFlags,
    file: Option<&Path>,
    out: &mut dyn Write,
) -> Outcome {
    let format = match cli.format {
        Some(OutputFormat::Csv) => ExportFormat::Csv,
        Some(OutputFormat::Json) | None => ExportFormat::Json,
        Some(OutputFormat::Table) => {
            return Err(Failure::usage("report needs --format json or --format csv"))
        }
    };
    let (a, catalog, report) = scored(store, id, flags)?;
    let gaps = gap_analysis(&a, &catalog, &report)?;
    let bytes = export(&report, &gaps, format)?;
    match file {
        Some(path) => {
            fs::write(path, &bytes)
                .map_err(|e| Failure::domain(format!("{}: {e}", path.display())))?;
            if !cli.quiet {
                writeln!(out, "wrote {format} report to {}", path.display())?;
            }
        }
        None => out.write_all(&bytes)?,
    }
    Ok(())
}

fn gaps(cli: &Cli, store: &Store, id: &str, flags: ScoringFlags, out: &mut dyn Write) -> Outcome {
    reject_csv(cli, "gaps")?;
    let (a, catalog, report) = scored(store, id, flags)?;
    let gaps = gap_analysis(&a, &catalog, &report)?;
    if wants(cli, OutputFormat::Json) {
        return print_json(out, &gaps);
    }
    for d in &gaps.domains {
        if d.items.is_empty() {
            continue;
        }
        writeln!(out, "{} (target {})", d.domain_id, d.target_tier)?;
        for g in &d.items {
            let kind = format!("{:?}", g.kind).to_lowercase();
            let note = if g.unassessed { "  unassessed" } else { "" };
            writeln!(
                out,
                "  {:<13} {:<8} {:<32} {}/{}  short {}{note}",
                g.tier.to_string(),
                kind,
                g.id,
                g.current,
                g.maximum,
                g.shortfall
            )?;
        }
    }
    if !cli.quiet {
        writeln!(out, "{} gap(s)", gaps.total_items())?;
    }
    Ok(())
}
