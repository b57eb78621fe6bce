//! `rocrate`: create, inspect, validate, package and preview RO-Crates from
//! the command line.
//!
//! Exit codes are stable for scripting: 0 success or valid, 1 validation
//! failure, 2 usage error, 3 I/O or format error. Reports go to standard
//! output, diagnostics to standard error, and nothing touches the network.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rocrate_core::jsonld::{parse_metadata, serialize_entity, serialize_metadata, ParseReport};
use rocrate_core::oracle::check_equivalence_with;
use rocrate_core::package::{verify_bag, write_bagit, write_directory, write_zip, PayloadEntry};
use rocrate_core::preview::render_preview;
use rocrate_core::validate::{
    load_profile, reachability_findings, validate_minimal, validate_profile, workflow_profile,
    Finding, ValidationReport,
};
use rocrate_core::{
    CrateGraph, Entity, EntityId, Equivalence, GraphError, PropertyValue, TermContext,
    LEGACY_METADATA_FILE_NAME, METADATA_FILE_NAME, PREVIEW_FILE_NAME, SPEC_CONFORMANCE_IRI,
};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rocrate",
    version,
    about = "Create, validate, package and preview RO-Crates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a minimal valid crate in a directory.
    Init {
        /// Crate directory (created if absent; must be empty).
        dir: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        description: String,
        /// ISO 8601 publication date, e.g. 2017 or 2021-03-01.
        #[arg(long = "date-published")]
        date_published: String,
        /// License IRI or local id.
        #[arg(long)]
        license: String,
    },
    /// Add a data entity (and its hasPart link) to a crate.
    Add {
        dir: PathBuf,
        /// Path under the crate, or an absolute IRI for web resources.
        path: String,
        /// Entity class; repeat for extra classes (exactly one of
        /// File/Dataset must be present).
        #[arg(long = "type", value_name = "CLASS", required = true)]
        types: Vec<String>,
        /// Extra property as term=value; repeatable.
        #[arg(long = "prop", value_name = "TERM=VALUE")]
        props: Vec<String>,
    },
    /// Check a crate against the minimal rules or a profile.
    Validate {
        dir: PathBuf,
        /// Profile document, or the word "workflow" for the built-in one.
        #[arg(long)]
        profile: Option<String>,
        /// Machine-readable report on standard output.
        #[arg(long)]
        json: bool,
    },
    /// Materialize a crate to a directory, BagIt bag, or ZIP archive.
    Package {
        dir: PathBuf,
        #[arg(long, value_enum)]
        format: PackageFormat,
        dest: PathBuf,
    },
    /// Write the static HTML preview next to the metadata file.
    Preview { dir: PathBuf },
    /// Print one entity as canonical JSON.
    Inspect { dir: PathBuf, id: String },
    /// Cross-check the serializer against the rule-based pipeline.
    OracleCheck { dir: PathBuf },
    /// Verify the checksums and completeness of a bag.
    VerifyBag { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum PackageFormat {
    Dir,
    Bagit,
    Zip,
}

/// Error carrying its exit code; the message goes to standard error.
struct CmdError {
    code: u8,
    message: String,
}

impl CmdError {
    fn usage(message: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        CmdError {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

type CmdResult = Result<u8, CmdError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("rocrate: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Init {
            dir,
            name,
            description,
            date_published,
            license,
        } => cmd_init(&dir, &name, &description, &date_published, &license),
        Command::Add {
            dir,
            path,
            types,
            props,
        } => cmd_add(&dir, &path, &types, &props),
        Command::Validate { dir, profile, json } => cmd_validate(&dir, profile.as_deref(), json),
        Command::Package { dir, format, dest } => cmd_package(&dir, format, &dest),
        Command::Preview { dir } => cmd_preview(&dir),
        Command::Inspect { dir, id } => cmd_inspect(&dir, &id),
        Command::OracleCheck { dir } => cmd_oracle_check(&dir),
        Command::VerifyBag { dir } => cmd_verify_bag(&dir),
    }
}

/// Conformance IRI, honoring ROCRATE_SPEC_VERSION ("1.1" or the full IRI).
fn conformance_iri() -> Result<String, CmdError> {
    match std::env::var("ROCRATE_SPEC_VERSION") {
        Err(_) => Ok(SPEC_CONFORMANCE_IRI.to_string()),
        Ok(v) if v == "1.1" || v == SPEC_CONFORMANCE_IRI => Ok(SPEC_CONFORMANCE_IRI.to_string()),
        Ok(v) => Err(CmdError::usage(format!(
            "unsupported ROCRATE_SPEC_VERSION {v:?}; this build supports 1.1"
        ))),
    }
}

fn metadata_path(dir: &Path) -> Result<PathBuf, CmdError> {
    let canonical = dir.join(METADATA_FILE_NAME);
    if canonical.exists() {
        return Ok(canonical);
    }
    let legacy = dir.join(LEGACY_METADATA_FILE_NAME);
    if legacy.exists() {
        eprintln!("rocrate: reading legacy metadata file name {LEGACY_METADATA_FILE_NAME}");
        return Ok(legacy);
    }
    Err(CmdError::io(format!(
        "no {METADATA_FILE_NAME} in {}",
        dir.display()
    )))
}

fn load_crate(dir: &Path) -> Result<ParseReport, CmdError> {
    let path = metadata_path(dir)?;
    let bytes = std::fs::read(&path)
        .map_err(|e| CmdError::io(format!("cannot read {}: {e}", path.display())))?;
    let report = parse_metadata(&bytes)
        .map_err(|e| CmdError::io(format!("cannot parse {}: {e}", path.display())))?;
    for warning in &report.warnings {
        eprintln!("rocrate: warning: {}", warning.message);
    }
    Ok(report)
}

fn save_crate(dir: &Path, graph: &CrateGraph, ctx: &TermContext) -> Result<PathBuf, CmdError> {
    let doc = serialize_metadata(graph, ctx).map_err(|e| CmdError::io(e.to_string()))?;
    let path = dir.join(METADATA_FILE_NAME);
    std::fs::write(&path, doc)
        .map_err(|e| CmdError::io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn entity_id(raw: &str) -> Result<EntityId, CmdError> {
    EntityId::new(raw).ok_or_else(|| CmdError::usage(format!("invalid entity id {raw:?}")))
}

fn cmd_init(
    dir: &Path,
    name: &str,
    description: &str,
    date_published: &str,
    license: &str,
) -> CmdResult {
    let conformance = conformance_iri()?;
    let license = entity_id(license)?;
    let graph =
        CrateGraph::new_with_version(name, description, date_published, license, &conformance)
            .map_err(|e| match e {
                GraphError::InvalidDate(_) | GraphError::EmptyField { .. } => {
                    CmdError::usage(e.to_string())
                }
                other => CmdError::io(other.to_string()),
            })?;
    let ctx = TermContext::builtin("1.1").expect("bundled context");
    write_directory(&graph, &ctx, &[], dir).map_err(|e| CmdError::io(e.to_string()))?;
    println!("{}", dir.join(METADATA_FILE_NAME).display());
    Ok(EXIT_OK)
}

fn cmd_add(dir: &Path, path: &str, types: &[String], props: &[String]) -> CmdResult {
    let report = load_crate(dir)?;
    let id = entity_id(path)?;
    if !id.is_absolute() {
        let payload = dir.join(id.normalized());
        if !payload.exists() {
            return Err(CmdError::io(format!(
                "payload {} does not exist under {}",
                id.normalized(),
                dir.display()
            )));
        }
    }

    let mut entity = Entity::new(id, types.iter().map(String::as_str));
    for prop in props {
        let (term, value) = prop
            .split_once('=')
            .ok_or_else(|| CmdError::usage(format!("--prop wants term=value, got {prop:?}")))?;
        if term.is_empty() {
            return Err(CmdError::usage("--prop has an empty term".to_string()));
        }
        entity.set(term, PropertyValue::text(value));
    }

    let graph = report.graph.add_data_entity(entity).map_err(|e| match e {
        GraphError::NotADataEntity(_) | GraphError::DuplicateId(_) => {
            CmdError::invalid(e.to_string())
        }
        other => CmdError::io(other.to_string()),
    })?;
    let path = save_crate(dir, &graph, &report.context)?;
    println!("{}", path.display());
    Ok(EXIT_OK)
}

fn print_report(report: &ValidationReport, json: bool) {
    if json {
        println!("{}", report_to_json(report));
        return;
    }
    for finding in &report.findings {
        let entity = finding
            .entity
            .as_ref()
            .map(|e| format!(" [{e}]"))
            .unwrap_or_default();
        println!(
            "{:7} {}{entity}: {}",
            finding.severity.as_str(),
            finding.rule,
            finding.message
        );
    }
    match report.verdict {
        rocrate_core::Verdict::Pass => println!("valid"),
        rocrate_core::Verdict::Fail => println!("invalid"),
    }
}

fn report_to_json(report: &ValidationReport) -> String {
    let violations: Vec<serde_json::Value> = report
        .findings
        .iter()
        .map(|f: &Finding| {
            serde_json::json!({
                "rule": f.rule,
                "severity": f.severity.as_str(),
                "entity": f.entity.as_ref().map(|e| e.as_str()),
                "message": f.message,
            })
        })
        .collect();
    let value = serde_json::json!({
        "verdict": if report.passed() { "pass" } else { "fail" },
        "profile": report.profile,
        "violations": violations,
    });
    serde_json::to_string_pretty(&value).expect("report serializes")
}

fn cmd_validate(dir: &Path, profile: Option<&str>, json: bool) -> CmdResult {
    let report = load_crate(dir)?;
    let mut validation = match profile {
        None => validate_minimal(&report.graph),
        Some("workflow") => validate_profile(&report.graph, &workflow_profile()),
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| CmdError::io(format!("cannot read profile {path}: {e}")))?;
            let (profile, notices) =
                load_profile(&bytes).map_err(|e| CmdError::io(e.to_string()))?;
            for notice in &notices {
                eprintln!("rocrate: {}", notice.message);
            }
            validate_profile(&report.graph, &profile)
        }
    };
    validation
        .findings
        .extend(reachability_findings(&report.graph));
    let validation = ValidationReport::from_findings(validation.findings, validation.profile);

    print_report(&validation, json);
    Ok(if validation.passed() {
        EXIT_OK
    } else {
        EXIT_INVALID
    })
}

/// Every file under the crate directory except the metadata file itself.
fn collect_payload(dir: &Path) -> Result<Vec<PayloadEntry>, CmdError> {
    let mut files = Vec::new();
    walk(dir, dir, &mut files)?;
    Ok(files)
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<PayloadEntry>) -> Result<(), CmdError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CmdError::io(format!("cannot list {}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    paths.sort();
    for path in paths {
        if path.is_dir() {
            walk(root, &path, out)?;
            continue;
        }
        let rel = path
            .strip_prefix(root)
            .expect("under root")
            .to_string_lossy()
            .replace(std::path::MAIN_SEPARATOR, "/");
        if rel == METADATA_FILE_NAME || rel == LEGACY_METADATA_FILE_NAME {
            continue;
        }
        out.push(PayloadEntry::from_path(rel, path));
    }
    Ok(())
}

fn cmd_package(dir: &Path, format: PackageFormat, dest: &Path) -> CmdResult {
    let report = load_crate(dir)?;
    if dest.starts_with(dir) {
        return Err(CmdError::usage(format!(
            "destination {} lies inside the crate directory",
            dest.display()
        )));
    }
    let payload = collect_payload(dir)?;
    let result = match format {
        PackageFormat::Dir => {
            write_directory(&report.graph, &report.context, &payload, dest).map(|_| ())
        }
        PackageFormat::Bagit => {
            write_bagit(&report.graph, &report.context, &payload, dest).map(|_| ())
        }
        PackageFormat::Zip => write_zip(&report.graph, &report.context, &payload, dest).map(|_| ()),
    };
    result.map_err(|e| CmdError::io(e.to_string()))?;
    println!("{}", dest.display());
    Ok(EXIT_OK)
}

fn cmd_preview(dir: &Path) -> CmdResult {
    let report = load_crate(dir)?;
    let preview = render_preview(&report.graph);
    let path = dir.join(PREVIEW_FILE_NAME);
    std::fs::write(&path, preview.bytes())
        .map_err(|e| CmdError::io(format!("cannot write {}: {e}", path.display())))?;
    println!("{}", path.display());
    Ok(EXIT_OK)
}

fn cmd_inspect(dir: &Path, raw: &str) -> CmdResult {
    let report = load_crate(dir)?;
    let id = entity_id(raw)?;
    match report.graph.get(&id) {
        Some(entity) => {
            print!("{}", serialize_entity(entity));
            Ok(EXIT_OK)
        }
        None => Err(CmdError::invalid(format!("no entity {raw:?} in the crate"))),
    }
}

fn cmd_oracle_check(dir: &Path) -> CmdResult {
    let report = load_crate(dir)?;
    let validation = validate_minimal(&report.graph);
    if !validation.passed() {
        print_report(&validation, false);
        return Err(CmdError::invalid(
            "crate fails minimal validation; fix it before the oracle check".to_string(),
        ));
    }
    match check_equivalence_with(&report.graph, &report.context) {
        Equivalence::Equivalent => {
            println!("equivalent");
            Ok(EXIT_OK)
        }
        Equivalence::Divergent(diff) => {
            print!("{diff}");
            println!("divergent");
            Ok(EXIT_INVALID)
        }
    }
}

fn cmd_verify_bag(dir: &Path) -> CmdResult {
    if !dir.is_dir() {
        return Err(CmdError::io(format!(
            "{} is not a directory",
            dir.display()
        )));
    }
    let report = verify_bag(dir);
    print_report(&report, false);
    Ok(if report.passed() {
        EXIT_OK
    } else {
        EXIT_INVALID
    })
}
