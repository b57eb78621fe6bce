//! Materializing a crate to storage: plain directory, BagIt bag or ZIP
//! archive, with checksum manifests and verification.
//!
//! All writers are deterministic: fixed entry order, fixed timestamps, LF
//! line endings, so identical inputs yield byte-identical trees and
//! archives.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Component, Path, PathBuf};

use sha2::{Digest, Sha256, Sha512};
use thiserror::Error;
use zip::write::FileOptions;
use zip::{CompressionMethod, DateTime, ZipWriter};

use crate::context::TermContext;
use crate::entity::{PropertyValue, Scalar};
use crate::graph::CrateGraph;
use crate::id::EntityId;
use crate::jsonld::serialize_metadata;
use crate::validate::{Finding, Severity, ValidationReport};
use crate::METADATA_FILE_NAME;

#[derive(Debug, Error)]
pub enum PackageError {
    #[error("no payload provided for data entity {0}")]
    MissingPayload(EntityId),
    #[error("destination {0} exists and is not empty")]
    DestNotEmpty(PathBuf),
    #[error("payload path escapes the crate root: {0}")]
    PathEscape(String),
    #[error("payload path contains unsupported characters: {0}")]
    InvalidPath(String),
    #[error("cannot serialize metadata: {0}")]
    Serialize(#[from] crate::jsonld::SerializeError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> PackageError {
    let path = path.into();
    move |source| PackageError::Io { path, source }
}

/// Where a payload file's bytes come from.
#[derive(Debug, Clone)]
pub enum PayloadSource {
    Bytes(Vec<u8>),
    FilesystemPath(PathBuf),
}

/// One file to be placed inside the crate.
#[derive(Debug, Clone)]
pub struct PayloadEntry {
    /// Crate-relative path with `/` separators; no `..` segments.
    pub crate_relative_path: String,
    pub source: PayloadSource,
}

impl PayloadEntry {
    pub fn from_bytes(path: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        PayloadEntry {
            crate_relative_path: path.into(),
            source: PayloadSource::Bytes(bytes.into()),
        }
    }

    pub fn from_path(path: impl Into<String>, source: impl Into<PathBuf>) -> Self {
        PayloadEntry {
            crate_relative_path: path.into(),
            source: PayloadSource::FilesystemPath(source.into()),
        }
    }

    fn read(&self) -> Result<Vec<u8>, PackageError> {
        match &self.source {
            PayloadSource::Bytes(b) => Ok(b.clone()),
            PayloadSource::FilesystemPath(p) => fs::read(p).map_err(io_err(p.clone())),
        }
    }
}

/// Manifest algorithm; sha256 is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BagAlgorithm {
    Sha256,
    Sha512,
}

impl BagAlgorithm {
    fn name(&self) -> &'static str {
        match self {
            BagAlgorithm::Sha256 => "sha256",
            BagAlgorithm::Sha512 => "sha512",
        }
    }

    fn digest(&self, bytes: &[u8]) -> String {
        match self {
            BagAlgorithm::Sha256 => hex::encode(Sha256::digest(bytes)),
            BagAlgorithm::Sha512 => hex::encode(Sha512::digest(bytes)),
        }
    }
}

/// A written payload manifest: algorithm plus (digest, bag-relative path)
/// rows, every path under `data/`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BagManifest {
    pub algorithm: BagAlgorithm,
    pub entries: Vec<(String, String)>,
}

/// Checks a payload path: relative, slash-separated, no `..`, no control
/// characters.
fn check_path(path: &str) -> Result<(), PackageError> {
    if path.is_empty() || path.starts_with('/') || path.contains('\\') {
        return Err(PackageError::InvalidPath(path.to_string()));
    }
    if path.bytes().any(|b| b.is_ascii_control() || b == b'%') {
        return Err(PackageError::InvalidPath(path.to_string()));
    }
    if path.split('/').any(|seg| seg == ".." || seg == ".") {
        return Err(PackageError::PathEscape(path.to_string()));
    }
    Ok(())
}

/// Prepares the destination directory: it must be absent or empty.
fn prepare_dest(dest: &Path) -> Result<(), PackageError> {
    if dest.exists() {
        let mut entries = fs::read_dir(dest).map_err(io_err(dest))?;
        if entries.next().is_some() {
            return Err(PackageError::DestNotEmpty(dest.to_path_buf()));
        }
    } else {
        fs::create_dir_all(dest).map_err(io_err(dest))?;
    }
    Ok(())
}

/// The crate's storage plan: canonical metadata bytes, payload files sorted
/// by path, and the directories demanded by Dataset data entities.
struct Plan {
    metadata: Vec<u8>,
    files: Vec<(String, PayloadEntry)>,
    directories: Vec<String>,
}

fn plan(
    graph: &CrateGraph,
    ctx: &TermContext,
    payload: &[PayloadEntry],
) -> Result<Plan, PackageError> {
    let metadata = serialize_metadata(graph, ctx)?.into_bytes();

    let mut files: BTreeMap<String, PayloadEntry> = BTreeMap::new();
    for entry in payload {
        check_path(&entry.crate_relative_path)?;
        files.insert(entry.crate_relative_path.clone(), entry.clone());
    }

    let mut directories = Vec::new();
    for id in graph.data_entity_ids() {
        let entity = graph.get(&id).expect("data entity present");
        if id.is_absolute() {
            // Referenced via PID/IRI; no local bytes required.
            continue;
        }
        let path = id.normalized().to_string();
        if entity.has_class("Dataset") {
            directories.push(path.trim_end_matches('/').to_string());
        } else if !files.contains_key(&path) && !files.contains_key(id.as_str()) {
            return Err(PackageError::MissingPayload(id.clone()));
        }
    }
    directories.sort();
    directories.dedup();
    directories.retain(|d| !d.is_empty());

    Ok(Plan {
        metadata,
        files: files.into_iter().collect(),
        directories,
    })
}

/// Writes the crate as a plain directory: the canonical metadata file plus
/// payload files at their ids. Returns the written paths, metadata first.
pub fn write_directory(
    graph: &CrateGraph,
    ctx: &TermContext,
    payload: &[PayloadEntry],
    dest: &Path,
) -> Result<Vec<PathBuf>, PackageError> {
    let plan = plan(graph, ctx, payload)?;
    prepare_dest(dest)?;
    let mut written = Vec::new();

    let metadata_path = dest.join(METADATA_FILE_NAME);
    fs::write(&metadata_path, &plan.metadata).map_err(io_err(&metadata_path))?;
    written.push(metadata_path);

    for dir in &plan.directories {
        let path = dest.join(dir);
        fs::create_dir_all(&path).map_err(io_err(&path))?;
    }
    for (rel, entry) in &plan.files {
        let path = dest.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, entry.read()?).map_err(io_err(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes the crate as a BagIt bag: payload under `data/` (making the bag
/// payload itself a valid crate root), `bagit.txt`, a payload manifest and a
/// tag manifest over `bagit.txt` and the payload manifest.
///
/// File data entities with absolute IRIs and a known `contentSize` are
/// listed in `fetch.txt` instead of the payload.
pub fn write_bagit(
    graph: &CrateGraph,
    ctx: &TermContext,
    payload: &[PayloadEntry],
    dest: &Path,
) -> Result<BagManifest, PackageError> {
    write_bagit_with(graph, ctx, payload, dest, BagAlgorithm::Sha256)
}

/// As [`write_bagit`] with an explicit manifest algorithm.
pub fn write_bagit_with(
    graph: &CrateGraph,
    ctx: &TermContext,
    payload: &[PayloadEntry],
    dest: &Path,
    algorithm: BagAlgorithm,
) -> Result<BagManifest, PackageError> {
    let plan = plan(graph, ctx, payload)?;
    prepare_dest(dest)?;

    let data = dest.join("data");
    fs::create_dir_all(&data).map_err(io_err(&data))?;

    let mut entries: Vec<(String, String)> = Vec::new();
    let metadata_rel = format!("data/{METADATA_FILE_NAME}");
    let metadata_path = dest.join(&metadata_rel);
    fs::write(&metadata_path, &plan.metadata).map_err(io_err(&metadata_path))?;
    entries.push((algorithm.digest(&plan.metadata), metadata_rel));

    for dir in &plan.directories {
        let path = data.join(dir);
        fs::create_dir_all(&path).map_err(io_err(&path))?;
    }
    for (rel, entry) in &plan.files {
        let bytes = entry.read()?;
        let path = data.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        fs::write(&path, &bytes).map_err(io_err(&path))?;
        entries.push((algorithm.digest(&bytes), format!("data/{rel}")));
    }
    entries.sort_by(|a, b| a.1.cmp(&b.1));

    let bagit = b"BagIt-Version: 1.0\nTag-File-Character-Encoding: UTF-8\n";
    let bagit_path = dest.join("bagit.txt");
    fs::write(&bagit_path, bagit).map_err(io_err(&bagit_path))?;

    let manifest_name = format!("manifest-{}.txt", algorithm.name());
    let mut manifest = String::new();
    for (digest, path) in &entries {
        manifest.push_str(digest);
        manifest.push_str("  ");
        manifest.push_str(path);
        manifest.push('\n');
    }
    let manifest_path = dest.join(&manifest_name);
    fs::write(&manifest_path, &manifest).map_err(io_err(&manifest_path))?;

    if let Some(fetch) = fetch_lines(graph) {
        let fetch_path = dest.join("fetch.txt");
        fs::write(&fetch_path, fetch).map_err(io_err(&fetch_path))?;
    }

    let mut tagmanifest = String::new();
    tagmanifest.push_str(&algorithm.digest(bagit));
    tagmanifest.push_str("  bagit.txt\n");
    tagmanifest.push_str(&algorithm.digest(manifest.as_bytes()));
    tagmanifest.push_str("  ");
    tagmanifest.push_str(&manifest_name);
    tagmanifest.push('\n');
    let tagmanifest_path = dest.join(format!("tagmanifest-{}.txt", algorithm.name()));
    fs::write(&tagmanifest_path, tagmanifest).map_err(io_err(&tagmanifest_path))?;

    Ok(BagManifest { algorithm, entries })
}

/// `fetch.txt` rows for web-only File entities: `IRI length data/path`, one
/// per absolute-IRI File data entity with an integer `contentSize`.
fn fetch_lines(graph: &CrateGraph) -> Option<String> {
    let mut lines: Vec<String> = Vec::new();
    for id in graph.data_entity_ids() {
        if !id.is_absolute() {
            continue;
        }
        let entity = graph.get(&id).expect("data entity present");
        if !entity.has_class("File") {
            continue;
        }
        let Some(size) = content_size(entity.get("contentSize")) else {
            continue;
        };
        let local = id
            .as_str()
            .split("://")
            .nth(1)
            .and_then(|rest| rest.split_once('/'))
            .map(|(_, path)| path.to_string())
            .filter(|p| !p.is_empty() && check_path(p).is_ok())
            .unwrap_or_else(|| format!("fetched-{}", hex::encode(Sha256::digest(id.as_str()))));
        lines.push(format!("{} {size} data/{local}", id.as_str()));
    }
    if lines.is_empty() {
        return None;
    }
    lines.sort();
    let mut out = lines.join("\n");
    out.push('\n');
    Some(out)
}

fn content_size(value: Option<&PropertyValue>) -> Option<u64> {
    match value?.scalars().first()? {
        Scalar::Number(crate::entity::Number::Integer(i)) if *i >= 0 => Some(*i as u64),
        Scalar::Text(s) => s.parse().ok(),
        _ => None,
    }
}

/// Writes the crate as a ZIP archive mirroring the directory layout.
/// Metadata entry first, then payload lexicographically; fixed timestamps;
/// already-compressed payload types are stored, the rest deflated. Returns
/// the archive size in bytes.
pub fn write_zip(
    graph: &CrateGraph,
    ctx: &TermContext,
    payload: &[PayloadEntry],
    dest: &Path,
) -> Result<u64, PackageError> {
    let plan = plan(graph, ctx, payload)?;
    if dest.exists() {
        return Err(PackageError::DestNotEmpty(dest.to_path_buf()));
    }
    if let Some(parent) = dest.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
    }

    let file = fs::File::create(dest).map_err(io_err(dest))?;
    let mut writer = ZipWriter::new(file);
    let stamp = DateTime::from_date_and_time(1980, 1, 1, 0, 0, 0).expect("fixed DOS time");
    let options = |method: CompressionMethod| -> FileOptions {
        FileOptions::default()
            .compression_method(method)
            .last_modified_time(stamp)
            .unix_permissions(0o644)
    };

    writer
        .start_file(METADATA_FILE_NAME, options(CompressionMethod::Deflated))
        .map_err(|e| zip_err(dest, e))?;
    writer.write_all(&plan.metadata).map_err(io_err(dest))?;

    for dir in &plan.directories {
        writer
            .add_directory(dir.as_str(), options(CompressionMethod::Stored))
            .map_err(|e| zip_err(dest, e))?;
    }
    for (rel, entry) in &plan.files {
        let bytes = entry.read()?;
        let method = if stored_suffix(rel) {
            CompressionMethod::Stored
        } else {
            CompressionMethod::Deflated
        };
        writer
            .start_file(rel.as_str(), options(method))
            .map_err(|e| zip_err(dest, e))?;
        writer.write_all(&bytes).map_err(io_err(dest))?;
    }
    let file = writer.finish().map_err(|e| zip_err(dest, e))?;
    let len = file.metadata().map_err(io_err(dest))?.len();
    Ok(len)
}

fn zip_err(dest: &Path, e: zip::result::ZipError) -> PackageError {
    PackageError::Io {
        path: dest.to_path_buf(),
        source: std::io::Error::other(e),
    }
}

/// Payload types that are already compressed and gain nothing from deflate.
fn stored_suffix(path: &str) -> bool {
    let lower = path.to_ascii_lowercase();
    [
        ".zip", ".gz", ".bz2", ".xz", ".zst", ".jpg", ".jpeg", ".png", ".webp", ".mp3", ".mp4",
        ".ogg",
    ]
    .iter()
    .any(|ext| lower.ends_with(ext))
}

/// Verifies a bag on disk: `bagit.txt` shape, manifest digests, tag
/// manifest digests, and payload completeness (no file under `data/`
/// missing from a payload manifest). All findings go in the report.
pub fn verify_bag(dir: &Path) -> ValidationReport {
    let mut findings = Vec::new();
    check_bagit_txt(dir, &mut findings);

    let mut manifests = Vec::new();
    for algorithm in [BagAlgorithm::Sha256, BagAlgorithm::Sha512] {
        let name = format!("manifest-{}.txt", algorithm.name());
        if dir.join(&name).exists() {
            manifests.push((algorithm, name));
        }
    }
    if manifests.is_empty() {
        findings.push(finding(
            "bag.manifest.missing",
            Severity::Error,
            "no payload manifest (manifest-sha256.txt or manifest-sha512.txt)",
        ));
    }

    let mut manifested: Vec<String> = Vec::new();
    for (algorithm, name) in &manifests {
        match read_manifest(&dir.join(name)) {
            Err(message) => {
                findings.push(finding("bag.manifest.malformed", Severity::Error, message))
            }
            Ok(rows) => {
                for (digest, path) in rows {
                    manifested.push(path.clone());
                    verify_row(dir, *algorithm, &digest, &path, &mut findings);
                }
            }
        }
        let tag_name = format!("tagmanifest-{}.txt", algorithm.name());
        if dir.join(&tag_name).exists() {
            match read_manifest(&dir.join(tag_name)) {
                Err(message) => {
                    findings.push(finding("bag.manifest.malformed", Severity::Error, message))
                }
                Ok(rows) => {
                    for (digest, path) in rows {
                        verify_row(dir, *algorithm, &digest, &path, &mut findings);
                    }
                }
            }
        }
    }

    // Completeness: every payload file on disk must be manifested.
    let mut on_disk = Vec::new();
    walk_files(&dir.join("data"), &mut on_disk);
    for path in on_disk {
        let rel = path
            .strip_prefix(dir)
            .expect("under bag root")
            .components()
            .filter_map(|c| match c {
                Component::Normal(part) => part.to_str(),
                _ => None,
            })
            .collect::<Vec<_>>()
            .join("/");
        if !manifested.contains(&rel) {
            findings.push(finding(
                "bag.payload.unmanifested",
                Severity::Error,
                format!("payload file {rel} is not listed in any manifest"),
            ));
        }
    }

    ValidationReport::from_findings(findings, None)
}

fn finding(rule: &str, severity: Severity, message: impl Into<String>) -> Finding {
    Finding {
        rule: rule.to_string(),
        severity,
        entity: None,
        message: message.into(),
    }
}

fn check_bagit_txt(dir: &Path, findings: &mut Vec<Finding>) {
    let path = dir.join("bagit.txt");
    let Ok(contents) = fs::read_to_string(&path) else {
        findings.push(finding(
            "bag.declaration.missing",
            Severity::Error,
            "bagit.txt is missing or unreadable",
        ));
        return;
    };
    let lines: Vec<&str> = contents.lines().collect();
    let version_ok = lines
        .first()
        .map(|l| {
            l.strip_prefix("BagIt-Version: ")
                .map(|v| {
                    let mut parts = v.split('.');
                    matches!(
                        (parts.next(), parts.next(), parts.next()),
                        (Some(major), Some(minor), None)
                            if !major.is_empty()
                                && !minor.is_empty()
                                && major.bytes().all(|b| b.is_ascii_digit())
                                && minor.bytes().all(|b| b.is_ascii_digit())
                    )
                })
                .unwrap_or(false)
        })
        .unwrap_or(false);
    let encoding_ok = lines.get(1) == Some(&"Tag-File-Character-Encoding: UTF-8");
    if !version_ok || !encoding_ok || lines.len() != 2 {
        findings.push(finding(
            "bag.declaration.malformed",
            Severity::Error,
            "bagit.txt must hold exactly a BagIt-Version line and a UTF-8 encoding line",
        ));
    }
}

fn read_manifest(path: &Path) -> Result<Vec<(String, String)>, String> {
    let contents =
        fs::read_to_string(path).map_err(|e| format!("{} is unreadable: {e}", path.display()))?;
    let mut rows = Vec::new();
    for (number, line) in contents.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((digest, rest)) = line.split_once(char::is_whitespace) else {
            return Err(format!(
                "{} line {}: expected digest and path",
                path.display(),
                number + 1
            ));
        };
        let file = rest.trim_start();
        if digest.is_empty()
            || file.is_empty()
            || !digest.bytes().all(|b| b.is_ascii_hexdigit())
            || (digest.len() != 64 && digest.len() != 128)
        {
            return Err(format!(
                "{} line {}: malformed digest",
                path.display(),
                number + 1
            ));
        }
        rows.push((digest.to_ascii_lowercase(), file.to_string()));
    }
    Ok(rows)
}

fn verify_row(
    dir: &Path,
    algorithm: BagAlgorithm,
    digest: &str,
    rel: &str,
    findings: &mut Vec<Finding>,
) {
    let path = dir.join(rel);
    let Ok(bytes) = fs::read(&path) else {
        findings.push(finding(
            "bag.payload.missing",
            Severity::Error,
            format!("manifested file {rel} is missing"),
        ));
        return;
    };
    let actual = algorithm.digest(&bytes);
    if actual != digest {
        findings.push(finding(
            "bag.digest.mismatch",
            Severity::Error,
            format!("{rel}: manifest says {digest}, content hashes to {actual}"),
        ));
    }
}

fn walk_files(dir: &Path, out: &mut Vec<PathBuf>) {
    let Ok(entries) = fs::read_dir(dir) else {
        return;
    };
    let mut entries: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            walk_files(&path, out);
        } else {
            out.push(path);
        }
    }
}
