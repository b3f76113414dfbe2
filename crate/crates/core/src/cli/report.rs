//! Plain-text summary of whatever a directory of earlier runs contains.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use super::commands::{MANIFEST_FILE, RETRIEVABILITY_DIR, STATS_FILE, USEFULNESS_DIR};
use crate::manifest::Manifest;

pub const REPORT_FILE: &str = "report.txt";

/// Builds the report, writes it to `<out>/report.txt` and returns it.
pub fn report_cmd(out: &Path) -> Result<String> {
    let stats = out.join(RETRIEVABILITY_DIR).join(STATS_FILE);
    let useful = out.join(USEFULNESS_DIR).join(MANIFEST_FILE);
    if !stats.exists() && !useful.exists() {
        bail!(
            "{} holds no retrievability or usefulness results",
            out.display()
        );
    }

    let mut text = String::new();
    if stats.exists() {
        retrievability_section(&stats, &mut text)?;
    }
    if useful.exists() {
        if !text.is_empty() {
            text.push('\n');
        }
        usefulness_section(&useful, &mut text)?;
    }
    let path = out.join(REPORT_FILE);
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    Ok(text)
}

fn retrievability_section(stats: &Path, text: &mut String) -> Result<()> {
    let manifest = Manifest::load(&stats.with_file_name(MANIFEST_FILE))?;
    let mut reader =
        csv::Reader::from_path(stats).with_context(|| format!("reading {}", stats.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{} lacks column `{name}`", stats.display()))
    };
    let (ty, cutoff, n, zeros, mean, gm, gini, frac) = (
        col("type")?,
        col("cutoff")?,
        col("n")?,
        col("zero_count")?,
        col("mean")?,
        col("geometric_mean_positive")?,
        col("gini")?,
        col("retrieved_fraction")?,
    );

    writeln!(text, "Retrievability")?;
    for key in [
        "query_source",
        "query_count",
        "weighting",
        "cutoffs",
        "k1",
        "b",
    ] {
        if let Some(v) = manifest.get(key) {
            writeln!(text, "  {key}: {v}")?;
        }
    }
    writeln!(
        text,
        "  {:<16} {:>6} {:>8} {:>8} {:>12} {:>12} {:>10} {:>10}",
        "type", "cutoff", "docs", "zero", "mean", "geo_mean", "gini", "retrieved"
    )?;
    for record in reader.records() {
        let r = record?;
        writeln!(
            text,
            "  {:<16} {:>6} {:>8} {:>8} {:>12} {:>12} {:>10} {:>10}",
            &r[ty],
            &r[cutoff],
            &r[n],
            &r[zeros],
            short(&r[mean]),
            short(&r[gm]),
            short(&r[gini]),
            percent(&r[frac]),
        )?;
    }
    Ok(())
}

fn usefulness_section(path: &Path, text: &mut String) -> Result<()> {
    let manifest = Manifest::load(path)?;
    writeln!(text, "Usefulness")?;
    for key in ["cutoff", "events", "exports", "unknown_document_events"] {
        if let Some(v) = manifest.get(key) {
            writeln!(text, "  {key}: {v}")?;
        }
    }
    writeln!(
        text,
        "  {:<16} {:>8} {:>8} {:>8} {:>8} {:>10}",
        "type", "docs", "exports", "consumed", "useful", "gini"
    )?;
    for (key, label) in manifest.entries() {
        let Some(stem) = key
            .strip_prefix("partition.")
            .and_then(|k| k.strip_suffix(".type"))
        else {
            continue;
        };
        let get = |field: &str| {
            manifest
                .get(&format!("partition.{stem}.{field}"))
                .unwrap_or_default()
        };
        writeln!(
            text,
            "  {:<16} {:>8} {:>8} {:>8} {:>8} {:>10}",
            label,
            get("documents"),
            get("exports"),
            get("consumed"),
            get("useful_documents"),
            short(&get("gini")),
        )?;
    }
    Ok(())
}

fn short(v: &str) -> String {
    match v.parse::<f64>() {
        Ok(x) => format!("{x:.4}"),
        Err(_) => v.to_owned(),
    }
}

fn percent(v: &str) -> String {
    match v.parse::<f64>() {
        Ok(x) => format!("{:.1}%", 100.0 * x),
        Err(_) => v.to_owned(),
    }
}
