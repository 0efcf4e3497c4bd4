//! On-disk artifacts: labelled matrices, model files, CSV tables and SVG
//! plots.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use qpga::dataio::{load_matrix, save_matrix};
use qpga::kernelmap::FeatureMapper;
use qpga::qml::{SvmModel, TrainConfig, VqcModel};
use qpga::qpga::QpgaModel;
use qpga::qsim::KernelBackend;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Rows of a matrix file together with the labels and manifest stored in
/// its sidecar.
pub struct Dataset {
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<u8>>,
    pub manifest: Value,
}

impl Dataset {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let (rows, manifest) = load_matrix(path).with_context(|| format!("reading {}", path.display()))?;
        let labels = match manifest.get("labels") {
            None | Some(Value::Null) => None,
            Some(v) => {
                let labels: Vec<u8> = serde_json::from_value(v.clone())
                    .with_context(|| format!("labels in the manifest of {}", path.display()))?;
                if labels.len() != rows.len() {
                    bail!("{}: {} labels for {} rows", path.display(), labels.len(), rows.len());
                }
                Some(labels)
            }
        };
        Ok(Self { rows, labels, manifest })
    }

    pub fn labels(&self, path: &Path) -> anyhow::Result<&[u8]> {
        self.labels.as_deref().with_context(|| format!("{} carries no labels", path.display()))
    }
}

/// Writes `rows` with a manifest; `labels` are stored alongside when given.
pub fn write_dataset(path: &Path, rows: &[Vec<f64>], labels: Option<&[u8]>, mut manifest: Value) -> anyhow::Result<()> {
    if let Some(l) = labels {
        manifest["labels"] = json!(l);
    }
    save_matrix(path, rows, &manifest)?;
    Ok(())
}

/// A fitted feature map and qPGA model, with the provenance fields needed to
/// reproduce it.
#[derive(Debug, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub format: String,
    pub mapper: FeatureMapper,
    pub model: QpgaModel,
    pub manifest: Value,
}

pub const EMBEDDING_FORMAT: &str = "qpga-embedding/1";

/// A trained classifier.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "format")]
pub enum ClassifierFile {
    #[serde(rename = "qsvm/1")]
    Qsvm { svm: SvmModel, backend: KernelBackend, train_rows: Vec<Vec<f64>> },
    #[serde(rename = "vqc/1")]
    Vqc { model: VqcModel, config: TrainConfig },
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Writes a CSV table; floats use the shortest round-tripping form.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn matrix_csv<T: ToString>(path: &Path, m: &[Vec<T>]) -> anyhow::Result<()> {
    let mut out = String::new();
    for r in m {
        out.push_str(&r.iter().map(ToString::to_string).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Heat map of a square count matrix, pooled into at most `max_cells` bins
/// per side with a logarithmic colour scale.
pub fn heatmap_svg(counts: &[Vec<u64>], max_cells: usize, title: &str) -> String {
    let n = counts.len();
    let bins = n.clamp(1, max_cells);
    let mut pooled = vec![vec![0u64; bins]; bins];
    for (i, row) in counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            pooled[i * bins / n.max(1)][j * bins / n.max(1)] += c;
        }
    }
    let peak = pooled.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    let (cell, margin) = (6usize, 30usize);
    let side = bins * cell + 2 * margin;
    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}">"#
    );
    let _ = write!(svg, r#"<text x="{margin}" y="20" font-family="sans-serif" font-size="12">{title}</text>"#);
    for (i, row) in pooled.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let shade = 255 - (255.0 * (1.0 + c as f64).ln() / (1.0 + peak).ln()).round() as u8;
            let _ = write!(
                svg,
                r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="rgb({shade},{shade},255)"/>"#,
                margin + j * cell,
                margin + i * cell
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Line plot of several series over a shared x axis, values in `[lo, 1]`.
pub fn curves_svg(xs: &[f64], series: &[(&str, Vec<f64>)], title: &str) -> String {
    let (w, h, m) = (480.0, 320.0, 40.0);
    let lo = series.iter().flat_map(|(_, v)| v.iter().copied()).fold(1.0f64, f64::min).min(0.9);
    let (x0, x1) = (xs.first().copied().unwrap_or(0.0), xs.last().copied().unwrap_or(1.0));
    let px = |x: f64| m + (w - 2.0 * m) * if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    let py = |y: f64| h - m - (h - 2.0 * m) * (y - lo) / (1.0 - lo).max(1e-12);
    let colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let mut svg = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = write!(svg, r#"<text x="{m}" y="20" font-family="sans-serif" font-size="12">{title}</text>"#);
    let _ = write!(
        svg,
        r#"<path d="M{m} {m} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        b = h - m,
        r = w - m
    );
    let _ = write!(svg, r#"<text x="4" y="{}" font-size="10">{lo:.3}</text>"#, h - m);
    let _ = write!(svg, r#"<text x="4" y="{m}" font-size="10">1.000</text>"#);
    for (s, (name, ys)) in series.iter().enumerate() {
        let colour = colours[s % colours.len()];
        let pts: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = write!(svg, r#"<polyline points="{}" stroke="{colour}" fill="none"/>"#, pts.join(" "));
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" fill="{colour}">{name}</text>"#,
            w - m - 80.0,
            m + 14.0 * (s as f64 + 1.0)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
