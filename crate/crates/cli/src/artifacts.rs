//! Serialization of command outputs: deterministic JSON, dictionary
//! CSV, artifact detection for `export`, and the text renderings.
//!
//! All JSON leaves this process with sorted keys and a trailing
//! newline, so identical inputs give byte-identical files — reports are
//! meant to be diffed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sparkdict_core::{
    DemoReport, FieldSpec, ScaledDictionary, SparkCertificate, SparkConclusion, SparkOutcome,
    SparkSearchReport,
};

/// Serializes with sorted keys (via the value tree) and a trailing
/// newline. Never floats: every number in our artifacts is an integer.
pub fn stable_json<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value).context("serializing artifact")?;
    let mut text = serde_json::to_string_pretty(&tree).context("rendering artifact JSON")?;
    text.push('\n');
    Ok(text)
}

/// Writes to the path when given, stdout otherwise.
pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Companion manifest for a dictionary CSV.
#[derive(Serialize, Deserialize)]
pub struct Manifest {
    pub spec: FieldSpec,
    pub scale_log2: u32,
    pub column_labels: Vec<String>,
}

pub fn manifest(d: &ScaledDictionary) -> Manifest {
    Manifest {
        spec: *d.spec(),
        scale_log2: d.scale_log2(),
        column_labels: d.column_labels(),
    }
}

/// Dictionary as CSV: a header row of column labels, then one row of
/// integer entries per coordinate. Labels contain commas, so they come
/// out quoted — standard CSV.
pub fn write_dictionary_csv(d: &ScaledDictionary, path: &Path) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    writer.write_record(d.column_labels())?;
    for row in 0..d.rows() {
        let record: Vec<String> = (0..d.num_columns())
            .map(|c| d.column(c).entries[row].to_string())
            .collect();
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// The artifact kinds `export` understands, detected by deserializing.
pub enum Artifact {
    Certificate(SparkCertificate),
    SparkReport(SparkSearchReport),
    Demo(DemoReport),
    Manifest(Manifest),
}

impl Artifact {
    pub fn detect(value: &serde_json::Value) -> Result<Artifact> {
        if let Ok(cert) = serde_json::from_value::<SparkCertificate>(value.clone()) {
            return Ok(Artifact::Certificate(cert));
        }
        if let Ok(report) = serde_json::from_value::<SparkSearchReport>(value.clone()) {
            return Ok(Artifact::SparkReport(report));
        }
        if let Ok(demo) = serde_json::from_value::<DemoReport>(value.clone()) {
            return Ok(Artifact::Demo(demo));
        }
        if let Ok(manifest) = serde_json::from_value::<Manifest>(value.clone()) {
            return Ok(Artifact::Manifest(manifest));
        }
        bail!(
            "unrecognized artifact: expected a certificate, spark report, demo report, or manifest"
        );
    }

    /// Canonical JSON re-emission.
    pub fn to_json(&self) -> Result<String> {
        match self {
            Artifact::Certificate(c) => stable_json(c),
            Artifact::SparkReport(r) => stable_json(r),
            Artifact::Demo(d) => stable_json(d),
            Artifact::Manifest(m) => stable_json(m),
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            Artifact::Certificate(c) => certificate_text(c),
            Artifact::SparkReport(r) => spark_report_text(r, None),
            Artifact::Demo(d) => demo_text(d),
            Artifact::Manifest(m) => {
                format!(
                    "dictionary {}: {} columns of dimension 2^{}, entries scaled by 2^{}\n",
                    spec_line(&m.spec),
                    m.column_labels.len(),
                    m.spec.n(),
                    m.scale_log2
                )
            }
        }
    }

    /// CSV rendering: the checks table for certificates, label list for
    /// manifests, key/value rows for the flat report kinds.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        match self {
            Artifact::Certificate(c) => {
                writer.write_record(["name", "pass", "detail"])?;
                for check in &c.checks {
                    writer.write_record([
                        check.name.as_str(),
                        if check.pass { "true" } else { "false" },
                        check.detail.as_str(),
                    ])?;
                }
            }
            Artifact::Manifest(m) => {
                writer.write_record(["index", "label"])?;
                for (i, label) in m.column_labels.iter().enumerate() {
                    writer.write_record([i.to_string(), label.clone()])?;
                }
            }
            Artifact::SparkReport(r) => {
                writer.write_record(["key", "value"])?;
                match r.outcome {
                    SparkOutcome::Exact(k) => writer.write_record(["spark", &k.to_string()])?,
                    SparkOutcome::AtLeast(k) => {
                        writer.write_record(["lower_bound", &k.to_string()])?
                    }
                }
                writer.write_record(["subsets_examined", &r.subsets_examined.to_string()])?;
            }
            Artifact::Demo(d) => {
                writer.write_record(["key", "value"])?;
                writer.write_record(["k", &d.k.to_string()])?;
                writer.write_record(["trials", &d.trials.to_string()])?;
                writer.write_record(["successes", &d.successes.to_string()])?;
                writer.write_record(["seed", &d.seed.to_string()])?;
            }
        }
        let bytes = writer.into_inner().context("flushing CSV")?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }

    /// Whether the artifact records a fully passing run — exports of
    /// failing artifacts propagate failure to the exit code.
    pub fn records_success(&self) -> bool {
        match self {
            Artifact::Certificate(c) => {
                c.all_checks_pass() && matches!(c.concluded_spark, SparkConclusion::Exact(_))
            }
            Artifact::Demo(d) => d.successes == d.trials,
            Artifact::SparkReport(_) | Artifact::Manifest(_) => true,
        }
    }
}

fn spec_line(spec: &FieldSpec) -> String {
    format!(
        "r={} t={} (n={}, modulus {})",
        spec.r(),
        spec.t(),
        spec.n(),
        spec.modulus_hex()
    )
}

pub fn certificate_text(cert: &SparkCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "field: {}", spec_line(&cert.field));
    let _ = writeln!(s, "coherence: {}", cert.coherence);
    let _ = writeln!(
        s,
        "lower bounds: de={} eb={} gn={}",
        cert.bounds.de, cert.bounds.eb, cert.bounds.gn
    );
    let _ = writeln!(
        s,
        "witness: {} columns, exact zero sum",
        cert.witness.size()
    );
    match cert.concluded_spark {
        SparkConclusion::Exact(k) => {
            let _ = writeln!(s, "concluded spark: {k}");
        }
        SparkConclusion::Interval { lower, upper } => {
            let _ = writeln!(s, "concluded spark: interval [{lower}, {upper}]");
        }
    }
    let passed = cert.checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(s, "checks: {passed}/{} pass", cert.checks.len());
    for check in cert.checks.iter().filter(|c| !c.pass) {
        let _ = writeln!(s, "  FAIL {}: {}", check.name, check.detail);
    }
    s
}

pub fn spark_report_text(report: &SparkSearchReport, measured_ms: Option<u128>) -> String {
    let mut s = String::new();
    match report.outcome {
        SparkOutcome::Exact(k) => {
            let _ = writeln!(s, "spark: {k}");
        }
        SparkOutcome::AtLeast(k) => {
            let _ = writeln!(s, "spark: >= {k} (no dependent subset within the cap)");
        }
    }
    if let Some(w) = &report.witness {
        let _ = writeln!(s, "witness columns: {:?}", w.column_indices);
        let _ = writeln!(s, "witness coefficients: {:?}", w.coefficients);
    }
    let _ = writeln!(s, "subsets examined: {}", report.subsets_examined);
    if let Some(ms) = measured_ms {
        let _ = writeln!(s, "elapsed: {ms} ms");
    }
    s
}

pub fn demo_text(report: &DemoReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "field: {}", spec_line(&report.spec));
    let _ = writeln!(
        s,
        "planted sparsity {}: {}/{} exact unique recoveries (seed {})",
        report.k, report.successes, report.trials, report.seed
    );
    let _ = writeln!(
        s,
        "collision exhibit: sizes {} and {} synthesize equal: {}",
        report.collision_exhibit.left.sparsity(),
        report.collision_exhibit.right.sparsity(),
        report.collision_exhibit.synthesized_equal
    );
    s
}
