//! Cross-experiment table joined from verified manifests.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::experiments::EXPERIMENT_HEADER;
use crate::manifest::VerifiedManifest;

pub const COLUMNS: [&str; 9] = [
    "image",
    "system",
    "n",
    "beta_shearlet",
    "beta_wavelet",
    "delta_beta",
    "frame_A",
    "frame_B",
    "count_exponent",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row {
    pub image: String,
    pub system: String,
    pub n: String,
    pub beta_shearlet: Option<f64>,
    pub beta_wavelet: Option<f64>,
    pub frame: Option<(f64, f64)>,
    pub count_exponent: Option<f64>,
}

impl Row {
    pub fn delta_beta(&self) -> Option<f64> {
        Some(self.beta_shearlet? - self.beta_wavelet?)
    }

    fn cells(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        let e = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_default();
        vec![
            self.image.clone(),
            self.system.clone(),
            self.n.clone(),
            f(self.beta_shearlet),
            f(self.beta_wavelet),
            f(self.delta_beta()),
            e(self.frame.map(|b| b.0)),
            e(self.frame.map(|b| b.1)),
            f(self.count_exponent),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    pub rows: Vec<Row>,
}

struct Record {
    kind: String,
    image: String,
    system: String,
    n: String,
}

/// Value of `column` in the first data row whose first field is `model`
/// (or the first data row when `model` is `None`).
fn csv_value(m: &VerifiedManifest, file: &str, column: &str, model: Option<&str>) -> Result<Option<f64>> {
    let text = m
        .read(file)
        .ok_or_else(|| CliError::corrupt(&m.path, format!("missing artifact {file}")))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let col = header
        .iter()
        .position(|h| *h == column)
        .ok_or_else(|| CliError::corrupt(&m.path, format!("{file} has no column {column}")))?;
    let mcol = header.iter().position(|h| *h == "model");
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if let (Some(want), Some(i)) = (model, mcol) {
            if f.get(i) != Some(&want) {
                continue;
            }
        }
        let cell = f.get(col).copied().unwrap_or("");
        if cell.is_empty() {
            return Ok(None);
        }
        return cell
            .parse()
            .map(Some)
            .map_err(|_| CliError::corrupt(&m.path, format!("{file}: bad number {cell:?}")));
    }
    Ok(None)
}

fn record(m: &VerifiedManifest) -> Result<Record> {
    let text = m
        .read("experiment.csv")
        .ok_or_else(|| CliError::corrupt(&m.path, "missing artifact experiment.csv"))?;
    let mut lines = text.lines();
    if lines.next() != Some(EXPERIMENT_HEADER) {
        return Err(CliError::corrupt(&m.path, "experiment.csv has an unexpected header"));
    }
    let f: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    if f.len() != EXPERIMENT_HEADER.split(',').count() {
        return Err(CliError::corrupt(&m.path, "experiment.csv has a malformed row"));
    }
    Ok(Record {
        kind: f[0].into(),
        image: f[1].into(),
        system: f[2].into(),
        n: f[3].into(),
    })
}

fn row_for<'a>(rows: &'a mut BTreeMap<(String, String), Row>, r: &Record) -> &'a mut Row {
    rows.entry((r.image.clone(), r.n.clone())).or_insert_with(|| Row {
        image: r.image.clone(),
        n: r.n.clone(),
        ..Row::default()
    })
}

/// Joins N-term, baseline and counting runs on `(image, n)`; frame bounds
/// join rows with the same shearlet system, or get a row of their own.
pub fn summarize(paths: &[impl AsRef<Path>]) -> Result<Summary> {
    let mut rows: BTreeMap<(String, String), Row> = BTreeMap::new();
    let mut bounds: Vec<(Record, (f64, f64))> = vec![];
    for p in paths {
        let m = VerifiedManifest::open(p.as_ref())?;
        let r = record(&m)?;
        match r.kind.as_str() {
            "nterm" => {
                let beta = csv_value(&m, "rate_report.csv", "beta", Some("pure-power"))?;
                let row = row_for(&mut rows, &r);
                row.beta_shearlet = beta;
                row.system = r.system.clone();
            }
            "baseline-compare" => {
                let beta = csv_value(&m, "rate_report.csv", "beta", Some("pure-power"))?;
                row_for(&mut rows, &r).beta_wavelet = beta;
            }
            "counting" => {
                let e = csv_value(&m, "count_fit.csv", "exponent", None)?;
                let row = row_for(&mut rows, &r);
                row.count_exponent = e;
                if row.system.is_empty() {
                    row.system = r.system.clone();
                }
            }
            "frame-bounds" => {
                let a = csv_value(&m, "frame_bounds.csv", "lower", None)?;
                let b = csv_value(&m, "frame_bounds.csv", "upper", None)?;
                if let (Some(a), Some(b)) = (a, b) {
                    bounds.push((r, (a, b)));
                }
            }
            "edge-decay" | "bessel" => {}
            k => return Err(CliError::corrupt(&m.path, format!("unknown experiment kind {k:?}"))),
        }
    }
    for (r, ab) in bounds {
        let mut hit = false;
        for row in rows.values_mut().filter(|row| row.system == r.system) {
            row.frame = Some(ab);
            hit = true;
        }
        if !hit {
            let e = rows.entry((format!("~{}", r.system), r.n.clone())).or_insert_with(|| Row {
                image: r.image.clone(),
                system: r.system.clone(),
                n: r.n.clone(),
                ..Row::default()
            });
            e.frame = Some(ab);
        }
    }
    Ok(Summary {
        rows: rows.into_values().collect(),
    })
}

impl Summary {
    pub fn to_csv(&self) -> String {
        let mut s = COLUMNS.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.cells().join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = std::iter::once(COLUMNS.iter().map(|c| c.to_string()).collect())
            .chain(self.rows.iter().map(|r| r.cells()))
            .collect();
        let widths: Vec<usize> = (0..COLUMNS.len())
            .map(|i| cells.iter().map(|r| r[i].len()).max().unwrap_or(0))
            .collect();
        let mut s = String::new();
        for r in &cells {
            let line: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            s.push_str(line.join("  ").trim_end());
            s.push('\n');
        }
        s
    }
}
