//! Parameter sweeps: Cartesian products of dotted-key overrides applied to a
//! base scenario, one output directory per cell, with a summary CSV.
//!
//! Overrides go through the same strict parser as the base config, so a typo
//! in an axis key fails the whole sweep instead of silently running the
//! default.

use crate::config::ScenarioConfig;
use crate::runner::{run_scenario, RunReport};
use anyhow::{bail, Context};
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// One sweep axis: a dotted config key and its values (raw TOML scalars).
#[derive(Debug, Clone)]
pub struct Axis {
    pub key: String,
    pub values: Vec<String>,
}

impl Axis {
    /// Parse `key=v1,v2,...`.
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let (key, rest) = text
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("axis '{text}' must look like key=v1,v2,..."))?;
        let values: Vec<String> = rest.split(',').map(|s| s.trim().to_string()).collect();
        if key.trim().is_empty() || values.is_empty() || values.iter().any(|v| v.is_empty()) {
            bail!("axis '{text}' must list at least one non-empty value");
        }
        Ok(Self {
            key: key.trim().to_string(),
            values,
        })
    }
}

/// Result row of one sweep cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub index: usize,
    pub overrides: Vec<(String, String)>,
    pub outcome: Result<RunReport, String>,
}

/// Run the Cartesian product of `axes` over `base`; cells execute in
/// parallel and per-cell failures do not stop the sweep.
pub fn run_sweep(
    base: &ScenarioConfig,
    axes: &[Axis],
    out_dir: &Path,
) -> anyhow::Result<Vec<CellResult>> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let cells = cartesian(axes);
    // Validate every cell's config before running anything, so schema errors
    // surface immediately.
    let configs: Vec<anyhow::Result<ScenarioConfig>> = cells
        .iter()
        .map(|overrides| apply_overrides(base, overrides))
        .collect();
    for (i, c) in configs.iter().enumerate() {
        if let Err(e) = c {
            bail!("cell {i} has an invalid configuration: {e:#}");
        }
    }
    let configs: Vec<ScenarioConfig> = configs.into_iter().map(|c| c.unwrap()).collect();

    let mut results: Vec<CellResult> = cells
        .par_iter()
        .zip(configs.par_iter())
        .enumerate()
        .map(|(index, (overrides, cfg))| {
            let cell_dir = out_dir.join(format!("cell_{index:03}"));
            let outcome = run_scenario(cfg, &cell_dir).map_err(|e| format!("{e:#}"));
            CellResult {
                index,
                overrides: overrides.clone(),
                outcome,
            }
        })
        .collect();
    results.sort_by_key(|r| r.index);
    write_summary(out_dir, axes, &results)?;
    Ok(results)
}

fn cartesian(axes: &[Axis]) -> Vec<Vec<(String, String)>> {
    let mut cells: Vec<Vec<(String, String)>> = vec![vec![]];
    for axis in axes {
        let mut next = Vec::with_capacity(cells.len() * axis.values.len());
        for cell in &cells {
            for v in &axis.values {
                let mut c = cell.clone();
                c.push((axis.key.clone(), v.clone()));
                next.push(c);
            }
        }
        cells = next;
    }
    cells
}

/// Apply dotted-key overrides to the TOML form of the base config and
/// re-parse strictly.
pub fn apply_overrides(
    base: &ScenarioConfig,
    overrides: &[(String, String)],
) -> anyhow::Result<ScenarioConfig> {
    let mut table: toml::Table = toml::from_str(&base.to_toml()?)?;
    for (key, raw) in overrides {
        let value = parse_scalar(raw);
        set_dotted(&mut table, key, value)
            .with_context(|| format!("setting sweep key '{key}'"))?;
    }
    ScenarioConfig::from_toml(&toml::to_string(&table)?)
}

fn parse_scalar(raw: &str) -> toml::Value {
    if let Ok(i) = raw.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = raw.parse::<f64>() {
        return toml::Value::Float(f);
    }
    if let Ok(b) = raw.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    toml::Value::String(raw.to_string())
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> anyhow::Result<()> {
    let mut parts = key.split('.').peekable();
    let mut current = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            current.insert(part.to_string(), value);
            return Ok(());
        }
        current = current
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| anyhow::anyhow!("'{part}' is not a table"))?;
    }
    bail!("empty key")
}

fn write_summary(out_dir: &Path, axes: &[Axis], results: &[CellResult]) -> anyhow::Result<()> {
    let path = out_dir.join("summary.csv");
    let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
    let axis_names: Vec<&str> = axes.iter().map(|a| a.key.as_str()).collect();
    writeln!(
        f,
        "cell,{}{}status,gain_factor,fine_delay_points,analog_depth_db,digital_depth_db,total_depth_db,soi_delta_total_db",
        axis_names.join(","),
        if axis_names.is_empty() { "" } else { "," }
    )?;
    for r in results {
        let overrides: Vec<&str> = r.overrides.iter().map(|(_, v)| v.as_str()).collect();
        match &r.outcome {
            Ok(rep) => writeln!(
                f,
                "{},{}{}ok,{:.4},{},{:.4},{:.4},{:.4},{}",
                r.index,
                overrides.join(","),
                if overrides.is_empty() { "" } else { "," },
                rep.prematch.gain_factor,
                rep.prematch.fine_delay_points,
                rep.analog_depth_db,
                rep.digital_depth_db,
                rep.total_depth_db,
                rep.soi_delta_total_db
                    .map(|v| format!("{v:.4}"))
                    .unwrap_or_else(|| "-".into()),
            )?,
            Err(e) => writeln!(
                f,
                "{},{}{}error,{},,,,,",
                r.index,
                overrides.join(","),
                if overrides.is_empty() { "" } else { "," },
                e.replace(',', ";").replace('\n', " "),
            )?,
        }
    }
    Ok(())
}
