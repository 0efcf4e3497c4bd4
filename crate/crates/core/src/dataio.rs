//! Dataset ingestion (IDX and CIFAR-10 binary), preprocessing, stratified
//! folds, and a plain matrix container with a JSON manifest sidecar.
//!
//! Resizing uses a bilinear (triangle) filter whose support widens with the
//! downscale factor, so every source pixel contributes when shrinking
//! 28×28 images to 8×8. Colour images are reduced to grayscale with BT.601
//! luma weights.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
pub const CIFAR_SIDE: usize = 32;
pub const CIFAR_RECORD: usize = 1 + 3 * CIFAR_SIDE * CIFAR_SIDE;
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];
pub const RESIZE_FILTER: &str = "bilinear-antialiased";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Mnist,
    Fmnist,
    Cifar10,
}

impl DatasetKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Mnist => "mnist",
            Self::Fmnist => "fmnist",
            Self::Cifar10 => "cifar10",
        }
    }

    fn class_count(&self) -> u8 {
        10
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mnist" => Ok(Self::Mnist),
            "fmnist" | "fashion-mnist" | "fashion_mnist" => Ok(Self::Fmnist),
            "cifar10" | "cifar-10" => Ok(Self::Cifar10),
            other => Err(Error::InvalidConfig(format!("unknown dataset '{other}'"))),
        }
    }
}

/// Single-channel image with values in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub height: usize,
    pub width: usize,
    pub pixels: Vec<f64>,
}

/// Where an [`ImageBatch`] came from and how it was preprocessed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset: DatasetKind,
    pub classes: [u8; 2],
    pub samples_per_class: usize,
    pub resize: Option<usize>,
    pub resize_filter: Option<String>,
    pub grayscale: Option<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageBatch {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub source: Provenance,
}

impl ImageBatch {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn features(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Labels as 0/1 with `classes[1]` mapped to 1.
    pub fn binary_labels(&self) -> Vec<u8> {
        self.labels.iter().map(|&l| u8::from(l == self.source.classes[1])).collect()
    }
}

/// Inputs for [`ingest`]. IDX datasets take `[images, labels]` paths;
/// CIFAR-10 takes one or more batch files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSpec {
    pub dataset: DatasetKind,
    pub paths: Vec<PathBuf>,
    pub classes: [u8; 2],
    pub samples_per_class: usize,
    pub resize: Option<usize>,
    pub seed: u64,
}

fn read_u32_be(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::TruncatedFile(format!("{what}: header ends early")))
}

/// Parses an IDX3 image file into `(rows, cols, images)` with raw bytes.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<Vec<u8>>)> {
    let magic = read_u32_be(bytes, 0, "idx images")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic { found: magic, expected: IDX_IMAGES_MAGIC });
    }
    let n = read_u32_be(bytes, 4, "idx images")? as usize;
    let rows = read_u32_be(bytes, 8, "idx images")? as usize;
    let cols = read_u32_be(bytes, 12, "idx images")? as usize;
    let size = rows * cols;
    let body = &bytes[16..];
    if body.len() < n * size {
        return Err(Error::TruncatedFile(format!(
            "idx images: {} payload bytes, {} declared",
            body.len(),
            n * size
        )));
    }
    Ok((rows, cols, body[..n * size].chunks(size.max(1)).take(n).map(<[u8]>::to_vec).collect()))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32_be(bytes, 0, "idx labels")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic { found: magic, expected: IDX_LABELS_MAGIC });
    }
    let n = read_u32_be(bytes, 4, "idx labels")? as usize;
    let body = &bytes[8..];
    if body.len() < n {
        return Err(Error::TruncatedFile(format!("idx labels: {} payload bytes, {n} declared", body.len())));
    }
    Ok(body[..n].to_vec())
}

/// Parses CIFAR-10 binary records into `(label, rgb planes)`.
pub fn parse_cifar(bytes: &[u8]) -> Result<Vec<(u8, Vec<u8>)>> {
    if !bytes.len().is_multiple_of(CIFAR_RECORD) {
        return Err(Error::TruncatedFile(format!(
            "cifar batch of {} bytes is not a multiple of the {CIFAR_RECORD}-byte record",
            bytes.len()
        )));
    }
    bytes
        .chunks(CIFAR_RECORD)
        .map(|r| {
            if r[0] >= 10 {
                return Err(Error::UnknownClass(r[0]));
            }
            Ok((r[0], r[1..].to_vec()))
        })
        .collect()
}

/// Luma grayscale of planar RGB bytes (all R, then G, then B).
pub fn rgb_planes_to_gray(planes: &[u8], height: usize, width: usize) -> Result<GrayImage> {
    let n = height * width;
    if planes.len() != 3 * n {
        return Err(Error::DimensionMismatch { expected: 3 * n, actual: planes.len() });
    }
    let pixels = (0..n)
        .map(|i| (LUMA[0] * planes[i] as f64 + LUMA[1] * planes[n + i] as f64 + LUMA[2] * planes[2 * n + i] as f64) / 255.0)
        .collect();
    Ok(GrayImage { height, width, pixels })
}

pub fn bytes_to_gray(bytes: &[u8], height: usize, width: usize) -> GrayImage {
    GrayImage { height, width, pixels: bytes.iter().map(|&b| b as f64 / 255.0).collect() }
}

/// Per-output-sample `(first input index, weights)` for one axis.
fn axis_weights(input: usize, output: usize) -> Vec<(usize, Vec<f64>)> {
    let scale = input as f64 / output as f64;
    let filter_scale = scale.max(1.0);
    let support = filter_scale;
    (0..output)
        .map(|i| {
            let center = (i as f64 + 0.5) * scale;
            let lo = ((center - support + 0.5).floor().max(0.0)) as usize;
            let hi = ((center + support + 0.5).floor() as usize).min(input);
            let mut w: Vec<f64> = (lo..hi)
                .map(|j| (1.0 - ((j as f64 - center + 0.5) / filter_scale).abs()).max(0.0))
                .collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= total);
            (lo, w)
        })
        .collect()
}

/// Separable bilinear resize to `side × side`, widening the filter when
/// shrinking so the result is an area-weighted average.
pub fn resize_bilinear(img: &GrayImage, side: usize) -> Result<GrayImage> {
    if side == 0 {
        return Err(Error::InvalidConfig("resize side must be positive".into()));
    }
    let wx = axis_weights(img.width, side);
    let wy = axis_weights(img.height, side);
    let mut tmp = vec![0.0; img.height * side];
    for r in 0..img.height {
        let row = &img.pixels[r * img.width..(r + 1) * img.width];
        for (c, (lo, w)) in wx.iter().enumerate() {
            tmp[r * side + c] = w.iter().enumerate().map(|(k, wk)| wk * row[lo + k]).sum();
        }
    }
    let mut pixels = vec![0.0; side * side];
    for (r, (lo, w)) in wy.iter().enumerate() {
        for c in 0..side {
            pixels[r * side + c] = w.iter().enumerate().map(|(k, wk)| wk * tmp[(lo + k) * side + c]).sum::<f64>().clamp(0.0, 1.0);
        }
    }
    Ok(GrayImage { height: side, width: side, pixels })
}

fn load_raw(spec: &IngestSpec) -> Result<Vec<(u8, GrayImage)>> {
    match spec.dataset {
        DatasetKind::Mnist | DatasetKind::Fmnist => {
            let [images, labels] = spec.paths.as_slice() else {
                return Err(Error::InvalidConfig("IDX datasets need exactly [images, labels] paths".into()));
            };
            let (h, w, imgs) = parse_idx_images(&fs::read(images)?)?;
            let labs = parse_idx_labels(&fs::read(labels)?)?;
            if labs.len() != imgs.len() {
                return Err(Error::DimensionMismatch { expected: imgs.len(), actual: labs.len() });
            }
            Ok(labs.into_iter().zip(imgs).map(|(l, px)| (l, bytes_to_gray(&px, h, w))).collect())
        }
        DatasetKind::Cifar10 => {
            if spec.paths.is_empty() {
                return Err(Error::InvalidConfig("CIFAR-10 needs at least one batch file".into()));
            }
            let mut out = Vec::new();
            for p in &spec.paths {
                for (l, planes) in parse_cifar(&fs::read(p)?)? {
                    out.push((l, rgb_planes_to_gray(&planes, CIFAR_SIDE, CIFAR_SIDE)?));
                }
            }
            Ok(out)
        }
    }
}

/// Reads, filters, shuffles and preprocesses a two-class subset.
///
/// Samples are shuffled under `seed`, then the first `samples_per_class`
/// of each class are kept in that order; rows alternate classes.
pub fn ingest(spec: &IngestSpec) -> Result<ImageBatch> {
    let [a, b] = spec.classes;
    for c in [a, b] {
        if c >= spec.dataset.class_count() {
            return Err(Error::UnknownClass(c));
        }
    }
    if a == b {
        return Err(Error::InvalidConfig("classes must be distinct".into()));
    }
    if spec.samples_per_class == 0 {
        return Err(Error::InvalidConfig("samples_per_class must be positive".into()));
    }
    let mut raw = load_raw(spec)?;
    raw.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let mut picked: [Vec<GrayImage>; 2] = [Vec::new(), Vec::new()];
    for (label, img) in raw {
        for (slot, &c) in spec.classes.iter().enumerate() {
            if label == c && picked[slot].len() < spec.samples_per_class {
                picked[slot].push(img.clone());
            }
        }
    }
    for (slot, &c) in spec.classes.iter().enumerate() {
        if picked[slot].len() < spec.samples_per_class {
            return Err(Error::NotEnoughSamples {
                class: c,
                available: picked[slot].len(),
                requested: spec.samples_per_class,
            });
        }
    }
    let mut rows = Vec::with_capacity(2 * spec.samples_per_class);
    let mut labels = Vec::with_capacity(rows.capacity());
    let [first, second] = picked;
    for (x, y) in first.into_iter().zip(second) {
        for (img, label) in [(x, a), (y, b)] {
            let img = match spec.resize {
                Some(side) => resize_bilinear(&img, side)?,
                None => img,
            };
            rows.push(img.pixels);
            labels.push(label);
        }
    }
    Ok(ImageBatch {
        rows,
        labels,
        source: Provenance {
            dataset: spec.dataset,
            classes: spec.classes,
            samples_per_class: spec.samples_per_class,
            resize: spec.resize,
            resize_filter: spec.resize.map(|_| RESIZE_FILTER.to_string()),
            grayscale: (spec.dataset == DatasetKind::Cifar10).then(|| "bt601-luma".to_string()),
            seed: spec.seed,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldedDataset {
    pub k: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub folds: Vec<Fold>,
}

/// Stratified k-fold split over `labels`.
///
/// Each class is shuffled under `seed` and dealt round-robin into `k` test
/// sets, so per-fold class counts differ by at most one and the test sets
/// partition the data. A fold's training set is every other index, reduced
/// (stratified) when `train_fraction` is below `1 - 1/k`.
pub fn make_folds(labels: &[u8], k: usize, train_fraction: f64, seed: u64) -> Result<FoldedDataset> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    let max_train = 1.0 - 1.0 / k as f64;
    if !(train_fraction > 0.0 && train_fraction <= max_train + 1e-9) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction {train_fraction} must lie in (0, {max_train}] for {k} folds"
        )));
    }
    let mut classes: Vec<u8> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (offset, &c) in classes.iter().enumerate() {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if idx.len() < k {
            return Err(Error::TooFewSamples(format!("class {c} has {} samples for {k} folds", idx.len())));
        }
        idx.shuffle(&mut rng);
        for (j, i) in idx.into_iter().enumerate() {
            tests[(j + offset) % k].push(i);
        }
    }
    let n = labels.len();
    let target = (train_fraction * n as f64).round() as usize;
    let folds = tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; n];
            test.iter().for_each(|&i| in_test[i] = true);
            let mut train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
            if train.len() > target {
                train = stratified_subsample(&train, labels, target, &mut rng);
            }
            Fold { train, test }
        })
        .collect();
    Ok(FoldedDataset { k, train_fraction, seed, folds })
}

fn stratified_subsample(pool: &[usize], labels: &[u8], target: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut shuffled = pool.to_vec();
    shuffled.shuffle(rng);
    // Stable sort by class keeps the shuffled order within each class; then
    // dealing round-robin by class keeps proportions.
    let mut by_class: std::collections::BTreeMap<u8, Vec<usize>> = Default::default();
    for i in shuffled {
        by_class.entry(labels[i]).or_default().push(i);
    }
    let mut out = Vec::with_capacity(target);
    let mut cursors = vec![0usize; by_class.len()];
    'outer: loop {
        let mut progressed = false;
        for (slot, list) in by_class.values().enumerate() {
            if out.len() == target {
                break 'outer;
            }
            if cursors[slot] < list.len() {
                out.push(list[cursors[slot]]);
                cursors[slot] += 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    out.sort_unstable();
    out
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `rows` as little-endian f64 after a header of two little-endian
/// u32 values (rows, cols), and `manifest` plus the shape to `<path>.json`.
pub fn save_matrix<R: AsRef<[f64]>>(path: &Path, rows: &[R], manifest: &Value) -> Result<()> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.as_ref().len());
    let mut buf = Vec::with_capacity(8 + 8 * r * c);
    buf.extend_from_slice(&(r as u32).to_le_bytes());
    buf.extend_from_slice(&(c as u32).to_le_bytes());
    for row in rows {
        let row = row.as_ref();
        if row.len() != c {
            return Err(Error::DimensionMismatch { expected: c, actual: row.len() });
        }
        for v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::File::create(path)?.write_all(&buf)?;
    let mut meta = match manifest {
        Value::Object(m) => m.clone(),
        Value::Null => Default::default(),
        other => {
            let mut m = serde_json::Map::new();
            m.insert("meta".into(), other.clone());
            m
        }
    };
    meta.insert("shape".into(), serde_json::json!([r, c]));
    fs::write(sidecar(path), serde_json::to_string_pretty(&Value::Object(meta))? + "\n")?;
    Ok(())
}

/// Reads a matrix written by [`save_matrix`] and checks its manifest shape.
pub fn load_matrix(path: &Path) -> Result<(Vec<Vec<f64>>, Value)> {
    let bytes = fs::read(path)?;
    if bytes.len() < 8 {
        return Err(Error::TruncatedFile(format!("{}: missing header", path.display())));
    }
    let r = u32::from_le_bytes(bytes[0..4].try_into().expect("4 bytes")) as usize;
    let c = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let body = &bytes[8..];
    if body.len() != 8 * r * c {
        return Err(Error::TruncatedFile(format!(
            "{}: header declares {r}x{c} but payload holds {} bytes",
            path.display(),
            body.len()
        )));
    }
    let manifest: Value = serde_json::from_slice(&fs::read(sidecar(path))?)?;
    let shape = manifest
        .get("shape")
        .and_then(Value::as_array)
        .and_then(|a| Some((a.first()?.as_u64()? as usize, a.get(1)?.as_u64()? as usize)));
    match shape {
        Some(s) if s == (r, c) => {}
        Some((mr, mc)) => {
            return Err(Error::ManifestMismatch(format!("manifest shape {mr}x{mc}, payload {r}x{c}")));
        }
        None => return Err(Error::ManifestMismatch("manifest lacks a [rows, cols] shape".into())),
    }
    let rows = body
        .chunks(8 * c.max(1))
        .take(r)
        .map(|row| row.chunks(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect())
        .collect();
    Ok((rows, manifest))
}

/// Writes `records` CIFAR-10-format records of seeded synthetic images.
///
/// Each class has its own smooth colour pattern (oriented sinusoid plus a
/// class-positioned blob); samples add a random phase shift, brightness and
/// pixel noise. Labels cycle through `0..10`. Useful where the real batches
/// are unavailable; the byte layout matches the published format.
pub fn write_synthetic_cifar(path: &Path, records: usize, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = CIFAR_SIDE;
    let mut out = Vec::with_capacity(records * CIFAR_RECORD);
    for r in 0..records {
        let label = (r % 10) as u8;
        let cls = label as f64;
        let angle = cls * std::f64::consts::PI / 10.0;
        let freq = 1.0 + (label % 3) as f64;
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let bright: f64 = rng.gen_range(0.8..1.2);
        let (bx, by) = (8.0 + 1.6 * cls, 24.0 - 1.6 * cls);
        out.push(label);
        for ch in 0..3 {
            let tint = 0.6 + 0.4 * ((cls + ch as f64 * 3.0) / 12.0).sin().abs();
            for y in 0..n {
                for x in 0..n {
                    let (u, v) = (x as f64 / n as f64, y as f64 / n as f64);
                    let wave = (std::f64::consts::TAU * freq * (u * angle.cos() + v * angle.sin()) + phase).sin();
                    let d2 = (x as f64 - bx).powi(2) + (y as f64 - by).powi(2);
                    let blob = (-d2 / 40.0).exp();
                    let noise: f64 = rng.gen_range(-0.08..0.08);
                    let val = (0.35 + 0.25 * wave * tint + 0.35 * blob + noise) * bright;
                    out.push((val.clamp(0.0, 1.0) * 255.0).round() as u8);
                }
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes IDX3 images and IDX1 labels (used by tests and tooling).
pub fn write_idx(images_path: &Path, labels_path: &Path, side: usize, images: &[Vec<u8>], labels: &[u8]) -> Result<()> {
    if images.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: images.len(), actual: labels.len() });
    }
    let mut buf = Vec::new();
    for v in [IDX_IMAGES_MAGIC, images.len() as u32, side as u32, side as u32] {
        buf.extend_from_slice(&v.to_be_bytes());
    }
    for img in images {
        if img.len() != side * side {
            return Err(Error::DimensionMismatch { expected: side * side, actual: img.len() });
        }
        buf.extend_from_slice(img);
    }
    fs::write(images_path, buf)?;
    let mut buf = Vec::new();
    for v in [IDX_LABELS_MAGIC, labels.len() as u32] {
        buf.extend_from_slice(&v.to_be_bytes());
    }
    buf.extend_from_slice(labels);
    fs::write(labels_path, buf)?;
    Ok(())
}
