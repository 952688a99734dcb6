//! Command-level wiring: configuration, corpus ingestion, the analysis
//! and structuring runs, diff gating, and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::annotation::Document;
use crate::diff::{diff_report, DiffReport};
use crate::inline_xml::{nestable_subset, parse_inline_xml, serialize_inline_xml_ids};
use crate::jape::{load_multiphase, parse_rule_file, run_pipeline, Phase};
use crate::pipeline::Gazetteer;
use crate::structurer::{
    build_unified_pattern, emit_pattern_xml, extract_sections, strip_annotations,
    validate_pattern, FacetMapping, UnifiedPattern, DEFAULT_STRIP_TYPES,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config file not found: {0}")]
    ConfigNotFound(PathBuf),
    #[error("missing resource: {0}")]
    MissingResource(PathBuf),
    #[error("malformed config line {line}: {text:?}")]
    MalformedConfigLine { line: usize, text: String },
    #[error("corpus directory {0} contains no .txt/.html/.xml files")]
    EmptyCorpus(PathBuf),
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Gazetteer(#[from] crate::pipeline::GazetteerError),
    #[error(transparent)]
    Rules(#[from] crate::jape::ParseError),
    #[error(transparent)]
    Mapping(#[from] crate::structurer::MappingError),
    #[error(transparent)]
    Xml(#[from] crate::inline_xml::XmlError),
    #[error(transparent)]
    Diff(#[from] crate::diff::DiffError),
}

#[derive(Debug, Clone)]
pub struct Config {
    pub gazetteer_index: PathBuf,
    pub rule_files: Vec<PathBuf>,
    pub facet_mapping: PathBuf,
    pub strip_types: Vec<String>,
    pub beta: f64,
    pub output_dir: PathBuf,
    pub html_strip: bool,
    pub digest: String,
}

/// Parses the flat `key = value` config format. Paths are resolved
/// relative to the config file and checked for existence.
pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text =
        fs::read_to_string(path).map_err(|_| CliError::ConfigNotFound(path.to_path_buf()))?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let digest = hex_digest(text.as_bytes());

    let mut values: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::MalformedConfigLine {
                line: lineno + 1,
                text: raw.to_string(),
            });
        };
        values.insert(key.trim().to_string(), value.trim().to_string());
    }

    let resolve = |p: &str| -> PathBuf { dir.join(p) };
    let gazetteer_index = resolve(values.get("gazetteer_index").map(String::as_str).unwrap_or(
        "gazetteer/lists.def",
    ));
    let rule_files: Vec<PathBuf> = values
        .get("rule_files")
        .map(String::as_str)
        .unwrap_or("rules/main.mph")
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(resolve)
        .collect();
    let facet_mapping = resolve(
        values
            .get("facet_mapping")
            .map(String::as_str)
            .unwrap_or("mapping/facets.map"),
    );
    for p in std::iter::once(&gazetteer_index)
        .chain(rule_files.iter())
        .chain(std::iter::once(&facet_mapping))
    {
        if !p.exists() {
            return Err(CliError::MissingResource(p.clone()));
        }
    }

    let strip_types = values
        .get("strip_types")
        .map(|s| {
            s.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_else(|| DEFAULT_STRIP_TYPES.iter().map(|s| s.to_string()).collect());
    let beta = values
        .get("beta")
        .and_then(|b| b.parse().ok())
        .unwrap_or(1.0);
    let output_dir = resolve(values.get("output_dir").map(String::as_str).unwrap_or("out"));
    let html_strip = values
        .get("html_strip")
        .map(|v| v != "false" && v != "0")
        .unwrap_or(true);

    Ok(Config {
        gazetteer_index,
        rule_files,
        facet_mapping,
        strip_types,
        beta,
        output_dir,
        html_strip,
        digest,
    })
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub input: String,
    pub outputs: Vec<String>,
    pub annotation_counts: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub valid: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub config_digest: String,
    pub generated_at: u64,
    pub documents: Vec<DocumentRecord>,
}

impl RunManifest {
    fn new(config: &Config) -> RunManifest {
        RunManifest {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: config.digest.clone(),
            generated_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            documents: Vec::new(),
        }
    }

    pub fn has_errors(&self) -> bool {
        self.documents.iter().any(|d| d.error.is_some())
    }

    fn write(&self, dir: &Path) -> Result<(), CliError> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        atomic_write(&dir.join("manifest.json"), json.as_bytes())
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let io = |e: std::io::Error| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// Strips markup from HTML/XML input, decoding the basic entities.
/// Offset fidelity to the original markup is not preserved.
pub fn strip_markup(input: &str) -> String {
    let mut out = String::with_capacity(input.len());
    let mut chars = input.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '<' => {
                for t in chars.by_ref() {
                    if t == '>' {
                        break;
                    }
                }
            }
            '&' => {
                let mut entity = String::new();
                let mut terminated = false;
                while let Some(&n) = chars.peek() {
                    if n == ';' {
                        chars.next();
                        terminated = true;
                        break;
                    }
                    if n.is_whitespace() || entity.len() > 8 {
                        break;
                    }
                    entity.push(n);
                    chars.next();
                }
                if !terminated {
                    out.push('&');
                    out.push_str(&entity);
                    continue;
                }
                match entity.as_str() {
                    "amp" => out.push('&'),
                    "lt" => out.push('<'),
                    "gt" => out.push('>'),
                    "quot" => out.push('"'),
                    "apos" => out.push('\''),
                    "nbsp" => out.push(' '),
                    other => {
                        let code = if let Some(h) = other.strip_prefix("#x") {
                            u32::from_str_radix(h, 16).ok()
                        } else if let Some(d) = other.strip_prefix('#') {
                            d.parse().ok()
                        } else {
                            None
                        };
                        if let Some(ch) = code.and_then(char::from_u32) {
                            out.push(ch);
                        }
                    }
                }
            }
            _ => out.push(c),
        }
    }
    out
}

fn corpus_files(dir: &Path, extensions: &[&str]) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| extensions.contains(&e))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Loaded analysis resources, shared across documents.
pub struct Resources {
    pub gazetteer: Gazetteer,
    pub phases: Vec<Phase>,
    pub mapping: FacetMapping,
}

pub fn load_resources(config: &Config) -> Result<Resources, CliError> {
    let gazetteer = Gazetteer::load(&config.gazetteer_index)?;
    let mut phases = Vec::new();
    for file in &config.rule_files {
        let text = fs::read_to_string(file).map_err(|e| CliError::Io {
            path: file.clone(),
            message: e.to_string(),
        })?;
        let is_multiphase = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with("//"))
            .is_some_and(|l| l.starts_with("MultiPhase:"));
        if is_multiphase {
            phases.extend(load_multiphase(file)?);
        } else {
            phases.extend(parse_rule_file(&text)?);
        }
    }
    let mapping = FacetMapping::load(&config.facet_mapping)?;
    Ok(Resources { gazetteer, phases, mapping })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("document")
        .to_string()
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("document")
        .to_string()
}

/// Analysis phase: run the annotation pipeline over every corpus document
/// and write one inline-XML annotated file each, plus the run manifest.
pub fn cmd_analyze(
    corpus_dir: &Path,
    config: &Config,
    out_dir: &Path,
) -> Result<RunManifest, CliError> {
    let files = corpus_files(corpus_dir, &["txt", "html", "xml"])?;
    if files.is_empty() {
        return Err(CliError::EmptyCorpus(corpus_dir.to_path_buf()));
    }
    let resources = load_resources(config)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.to_path_buf(),
        message: e.to_string(),
    })?;

    let mut manifest = RunManifest::new(config);
    for file in files {
        let mut record = DocumentRecord {
            input: file_name(&file),
            outputs: Vec::new(),
            annotation_counts: BTreeMap::new(),
            warnings: Vec::new(),
            valid: None,
            error: None,
        };
        match analyze_one(&file, config, &resources, out_dir, &mut record) {
            Ok(()) => {}
            Err(e) => record.error = Some(e.to_string()),
        }
        manifest.documents.push(record);
    }
    manifest.write(out_dir)?;
    Ok(manifest)
}

fn analyze_one(
    file: &Path,
    config: &Config,
    resources: &Resources,
    out_dir: &Path,
    record: &mut DocumentRecord,
) -> Result<(), CliError> {
    let raw = fs::read_to_string(file).map_err(|e| CliError::Io {
        path: file.to_path_buf(),
        message: e.to_string(),
    })?;
    let is_markup = file
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e == "html" || e == "xml");
    let text = if is_markup && config.html_strip {
        strip_markup(&raw)
    } else {
        raw
    };
    let stem = file_stem(file);
    let mut doc = Document::new(&stem, text);
    run_pipeline(&mut doc, &resources.gazetteer, &resources.phases)
        .map_err(|e| CliError::Io { path: file.to_path_buf(), message: e.to_string() })?;
    record.annotation_counts = doc.counts_by_type();

    let (kept, dropped) = nestable_subset(&doc, crate::annotation::DEFAULT_SET);
    for d in dropped {
        record
            .warnings
            .push(format!("annotation {d} not nestable in inline XML; omitted"));
    }
    let xml = serialize_inline_xml_ids(&doc, crate::annotation::DEFAULT_SET, &kept)?;
    let out_name = format!("{stem}.xml");
    atomic_write(&out_dir.join(&out_name), xml.as_bytes())?;
    // file name only: keeps the manifest byte-identical across output dirs
    record.outputs.push(out_name);
    Ok(())
}

/// Structuring phase: parse each annotated file, strip pipeline
/// annotations, carve facet sections, assemble the unified pattern and
/// write its XML plus a validation-flagged manifest.
pub fn cmd_structure(
    annotated_dir: &Path,
    config: &Config,
    out_dir: &Path,
) -> Result<RunManifest, CliError> {
    let files = corpus_files(annotated_dir, &["xml"])?;
    if files.is_empty() {
        return Err(CliError::EmptyCorpus(annotated_dir.to_path_buf()));
    }
    let mapping = FacetMapping::load(&config.facet_mapping)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.to_path_buf(),
        message: e.to_string(),
    })?;

    let mut manifest = RunManifest::new(config);
    for file in files {
        let mut record = DocumentRecord {
            input: file_name(&file),
            outputs: Vec::new(),
            annotation_counts: BTreeMap::new(),
            warnings: Vec::new(),
            valid: None,
            error: None,
        };
        match structure_one(&file, config, &mapping, out_dir, &mut record) {
            Ok(()) => {}
            Err(e) => record.error = Some(e.to_string()),
        }
        manifest.documents.push(record);
    }
    manifest.write(out_dir)?;
    Ok(manifest)
}

fn structure_one(
    file: &Path,
    config: &Config,
    mapping: &FacetMapping,
    out_dir: &Path,
    record: &mut DocumentRecord,
) -> Result<(), CliError> {
    let raw = fs::read_to_string(file).map_err(|e| CliError::Io {
        path: file.to_path_buf(),
        message: e.to_string(),
    })?;
    let stem = file_stem(file);
    let mut doc = parse_inline_xml(&raw, &stem)?;
    let strip: Vec<&str> = config.strip_types.iter().map(String::as_str).collect();
    strip_annotations(&mut doc, &strip);
    record.annotation_counts = doc.counts_by_type();

    let pattern = match extract_sections(&doc) {
        Ok((sections, warnings)) => {
            record.warnings.extend(warnings);
            match build_unified_pattern(&sections, mapping) {
                Ok((pattern, warnings)) => {
                    record.warnings.extend(warnings);
                    pattern
                }
                Err(e) => {
                    record.warnings.push(e.to_string());
                    UnifiedPattern::default()
                }
            }
        }
        Err(e) => {
            record.warnings.push(e.to_string());
            UnifiedPattern::default()
        }
    };
    let report = validate_pattern(&pattern);
    record.valid = Some(report.valid());
    for line in report.render().lines() {
        record.warnings.push(line.to_string());
    }
    let xml = emit_pattern_xml(&pattern);
    let out_name = format!("{stem}.pattern.xml");
    atomic_write(&out_dir.join(&out_name), xml.as_bytes())?;
    record.outputs.push(out_name);
    Ok(())
}

pub struct DiffOutcome {
    pub reports: Vec<DiffReport>,
    pub rendered: String,
    pub records: String,
    /// True when every requested type scores strict F-measure 1.0.
    pub passed: bool,
}

/// Compares a key document against a response document for the requested
/// types. Exit-code gating is the caller's job; `passed` carries the
/// verdict.
pub fn cmd_diff(
    key_path: &Path,
    response_path: &Path,
    types: &[&str],
    beta: f64,
) -> Result<DiffOutcome, CliError> {
    let read = |p: &Path| -> Result<Document, CliError> {
        let raw = fs::read_to_string(p).map_err(|e| CliError::Io {
            path: p.to_path_buf(),
            message: e.to_string(),
        })?;
        Ok(parse_inline_xml(&raw, &file_stem(p))?)
    };
    let key_doc = read(key_path)?;
    let response_doc = read(response_path)?;
    let reports = diff_report(&key_doc, &response_doc, types, beta)?;
    let mut rendered = String::new();
    let mut records = String::new();
    let mut passed = true;
    for report in &reports {
        rendered.push_str(&report.render(&key_doc, &response_doc));
        rendered.push('\n');
        records.push_str(&report.render_records(&key_doc, &response_doc));
        let (_, _, f_strict) = report.metrics.strict;
        if (f_strict - 1.0).abs() > f64::EPSILON {
            passed = false;
        }
    }
    Ok(DiffOutcome { reports, rendered, records, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markup_stripping() {
        assert_eq!(strip_markup("<p>Intent:</p> reuse &amp; share"), "Intent: reuse & share");
        assert_eq!(strip_markup("a &#65; b"), "a A b");
        assert_eq!(strip_markup("no entities & markup"), "no entities & markup");
    }
}
