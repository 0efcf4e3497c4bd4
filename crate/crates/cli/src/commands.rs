//! Subcommand arguments and implementations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use qpga::bounds::{budget_for_components, feasible_qubit_range, min_qubits, NoiseBudget};
use qpga::dataio::{ingest, make_folds, DatasetKind, IngestSpec};
use qpga::drmetrics::{coranking_matrix, reconstruction_error, trust_continuity_curve, DistanceKind};
use qpga::kernelmap::{apply_feature_map, fit_feature_map, KernelKind, KernelSpec, DEFAULT_LANDMARKS};
use qpga::manifold::{FrechetConfig, SpherePoint};
use qpga::qml::{
    evaluate_fold, kernel_matrix, signed_labels, summarize, svm_predict, svm_train, vqc_predict, vqc_train,
    BinaryMetrics, ClassifierSpec, PipelineSpec, SvmConfig, TrainConfig, VqcModel, DEFAULT_LAYERS,
};
use qpga::qpga::{fit, inverse_transform, transform, LatentPoint, ProjectionMode};
use qpga::qsim::{qubits_for, KernelBackend, NoiseSpec};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::artifacts::{
    curves_svg, heatmap_svg, matrix_csv, read_json, write_csv, write_dataset, write_json, ClassifierFile, Dataset,
    EmbeddingFile, EMBEDDING_FORMAT,
};
use crate::config::{required, usage};
use crate::manifest::{sha256_file, Outcome};

/// Environment variable naming the dataset root directory.
pub const DATA_ENV: &str = "QPGA_DATA";

const DEFAULT_COMPONENTS: usize = 4;
const DEFAULT_K_MAX: usize = 50;
const DEFAULT_NOISE_LEVELS: [f64; 3] = [0.01, 0.15, 0.2];

fn seeds(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn sphere_rows(rows: &[Vec<f64>]) -> anyhow::Result<Vec<SpherePoint>> {
    Ok(rows.iter().map(|r| SpherePoint::normalize(r.clone())).collect::<qpga::Result<_>>()?)
}

fn latent_points(rows: &[Vec<f64>]) -> anyhow::Result<Vec<LatentPoint>> {
    Ok(rows.iter().map(|r| LatentPoint::new(r.clone())).collect::<qpga::Result<_>>()?)
}

fn metrics_json(m: &BinaryMetrics) -> Value {
    json!({ "accuracy": m.accuracy, "f1": m.f1, "confusion": m.confusion })
}

// ---------------------------------------------------------------- ingest

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct IngestArgs {
    /// mnist, fmnist or cifar10
    #[arg(long)]
    pub dataset: Option<DatasetKind>,
    /// The two class labels to keep, e.g. 0,1
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<u8>>,
    #[arg(long)]
    pub per_class: Option<usize>,
    /// Output side length; 0 keeps the native resolution
    #[arg(long)]
    pub resize: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Explicit input files (IDX: images,labels; CIFAR-10: batch files)
    #[arg(long, value_delimiter = ',')]
    pub paths: Option<Vec<PathBuf>>,
    /// Dataset root; defaults to $QPGA_DATA, then ./data
    #[arg(long)]
    pub data_root: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn default_paths(dataset: DatasetKind, root: &Path) -> Vec<PathBuf> {
    match dataset {
        DatasetKind::Mnist | DatasetKind::Fmnist => {
            let dir = root.join(dataset.as_str());
            vec![dir.join("images-idx3-ubyte"), dir.join("labels-idx1-ubyte")]
        }
        DatasetKind::Cifar10 => (1..=5)
            .map(|i| root.join("cifar10").join(format!("data_batch_{i}.bin")))
            .filter(|p| p.is_file())
            .collect(),
    }
}

pub fn run_ingest(a: IngestArgs) -> anyhow::Result<Outcome> {
    let dataset = required(a.dataset, "dataset")?;
    let out = required(a.out, "out")?;
    let classes: [u8; 2] = a
        .classes
        .unwrap_or_else(|| vec![0, 1])
        .try_into()
        .map_err(|c: Vec<u8>| usage(format!("--classes needs exactly two labels, got {}", c.len())))?;
    let per_class = a.per_class.unwrap_or(600);
    let native = dataset == DatasetKind::Cifar10;
    let resize = match a.resize.unwrap_or(if native { 0 } else { 8 }) {
        0 => None,
        s => Some(s),
    };
    let seed = a.seed.unwrap_or(0);
    let root = a
        .data_root
        .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"));
    let paths = a.paths.unwrap_or_else(|| default_paths(dataset, &root));
    if paths.is_empty() {
        bail!("no {} batch files found under {}", dataset.as_str(), root.display());
    }
    let spec = IngestSpec { dataset, paths: paths.clone(), classes, samples_per_class: per_class, resize, seed };
    let batch = ingest(&spec)?;
    let labels = batch.binary_labels();
    let manifest = json!({ "kind": "images", "provenance": batch.source, "features": batch.features() });
    write_dataset(&out, &batch.rows, Some(&labels), manifest)?;
    Ok(Outcome {
        params: json!({
            "dataset": dataset, "classes": classes, "per-class": per_class, "resize": resize, "seed": seed,
            "paths": paths,
        }),
        seeds: seeds(&[("shuffle", seed)]),
        inputs: paths,
        outputs: vec![out],
        result: json!({ "rows": batch.rows.len(), "features": batch.features() }),
    })
}

// ---------------------------------------------------------------- shared embedding flags

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EmbedArgs {
    /// Feature-map kernel: linear, polynomial, rbf or sigmoid
    #[arg(long)]
    pub kernel: Option<KernelKind>,
    #[arg(long)]
    pub degree: Option<u32>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub coef0: Option<f64>,
    /// Nyström landmark count
    #[arg(long)]
    pub landmarks: Option<usize>,
    /// renormalize or exp_basepoint
    #[arg(long)]
    pub mode: Option<ProjectionMode>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl EmbedArgs {
    fn kernel_spec(&self) -> KernelSpec {
        let mut spec = KernelSpec::defaults(self.kernel.unwrap_or(KernelKind::Linear));
        if let Some(d) = self.degree {
            spec.degree = d;
        }
        if self.gamma.is_some() {
            spec.gamma = self.gamma;
        }
        if let Some(c) = self.coef0 {
            spec.coef0 = c;
        }
        spec
    }

    fn mode(&self) -> ProjectionMode {
        self.mode.unwrap_or(ProjectionMode::Renormalize)
    }

    fn landmarks(&self) -> usize {
        self.landmarks.unwrap_or(DEFAULT_LANDMARKS)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn resolved(&self) -> Value {
        json!({
            "kernel": self.kernel_spec(), "landmarks": self.landmarks(), "mode": self.mode(), "seed": self.seed(),
            "frechet": FrechetConfig::default(),
        })
    }
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    a
}

// ---------------------------------------------------------------- fit / transform / invert

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FitArgs {
    /// Matrix file of input rows
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Number of principal geodesic components
    #[arg(long = "D")]
    #[serde(rename = "D")]
    pub d: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub embed: EmbedArgs,
    /// Output model file (JSON)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_fit(a: FitArgs) -> anyhow::Result<Outcome> {
    let input = required(a.input, "input")?;
    let out = required(a.out, "out")?;
    let d = a.d.unwrap_or(DEFAULT_COMPONENTS);
    let data = Dataset::read(&input)?;
    let spec = a.embed.kernel_spec();
    let m = a.embed.landmarks().min(data.rows.len());
    let mapper = fit_feature_map(&data.rows, spec, m, a.embed.seed())?;
    let points = apply_feature_map(&mapper, &data.rows)?;
    let frechet = FrechetConfig::default();
    let model = fit(&points, d, &frechet, a.embed.mode())?;
    let explained = model.cumulative_explained_variance();
    let manifest = json!({
        "N": model.ambient_dim(), "D": d, "mode": model.mode, "kernel": mapper.spec, "landmarks": m,
        "seed": a.embed.seed(), "frechet": frechet, "spectrum": model.spectrum,
        "explained_variance": explained, "input_sha256": sha256_file(&input)?,
    });
    let n = model.ambient_dim();
    let rank_deficient = model.rank_deficient;
    write_json(&out, &EmbeddingFile { format: EMBEDDING_FORMAT.into(), mapper, model, manifest })?;
    Ok(Outcome {
        params: merge(json!({ "D": d }), a.embed.resolved()),
        seeds: seeds(&[("landmarks", a.embed.seed())]),
        inputs: vec![input],
        outputs: vec![out],
        result: json!({
            "N": n, "D": d, "explained_variance": explained, "q_min": min_qubits(d),
            "rank_deficient": rank_deficient,
        }),
    })
}

fn read_embedding(path: &Path) -> anyhow::Result<EmbeddingFile> {
    let file: EmbeddingFile = read_json(path)?;
    if file.format != EMBEDDING_FORMAT {
        bail!("{}: unsupported model format `{}`", path.display(), file.format);
    }
    Ok(file)
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TransformArgs {
    /// Model file written by `fit`
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_transform(a: TransformArgs) -> anyhow::Result<Outcome> {
    let model_path = required(a.model, "model")?;
    let input = required(a.input, "input")?;
    let out = required(a.out, "out")?;
    let emb = read_embedding(&model_path)?;
    let data = Dataset::read(&input)?;
    let points = apply_feature_map(&emb.mapper, &data.rows)?;
    let latent: Vec<Vec<f64>> = transform(&emb.model, &points)?.into_iter().map(LatentPoint::into_coords).collect();
    let manifest = json!({
        "kind": "latent", "D": emb.model.latent_dim(), "mode": emb.model.mode,
        "model_sha256": sha256_file(&model_path)?, "provenance": data.manifest.get("provenance"),
    });
    write_dataset(&out, &latent, data.labels.as_deref(), manifest)?;
    Ok(Outcome {
        params: json!({}),
        seeds: BTreeMap::new(),
        inputs: vec![model_path, input],
        outputs: vec![out],
        result: json!({ "rows": latent.len(), "D": emb.model.latent_dim() }),
    })
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct InvertArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Latent matrix file written by `transform`
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Original rows; when given, the geodesic reconstruction error is reported
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_invert(a: InvertArgs) -> anyhow::Result<Outcome> {
    let model_path = required(a.model, "model")?;
    let input = required(a.input, "input")?;
    let out = required(a.out, "out")?;
    let emb = read_embedding(&model_path)?;
    let data = Dataset::read(&input)?;
    let rec = inverse_transform(&emb.model, &latent_points(&data.rows)?)?;
    let mut result = json!({ "rows": rec.len(), "N": emb.model.ambient_dim() });
    let mut inputs = vec![model_path.clone(), input];
    if let Some(reference) = a.reference {
        let original = apply_feature_map(&emb.mapper, &Dataset::read(&reference)?.rows)?;
        result["reconstruction_mse"] = json!(reconstruction_error(&original, &rec)?);
        inputs.push(reference);
    }
    let rows: Vec<Vec<f64>> = rec.into_iter().map(SpherePoint::into_coords).collect();
    let manifest = json!({ "kind": "reconstruction", "model_sha256": sha256_file(&model_path)? });
    write_dataset(&out, &rows, data.labels.as_deref(), manifest)?;
    Ok(Outcome { params: json!({}), seeds: BTreeMap::new(), inputs, outputs: vec![out], result })
}

// ---------------------------------------------------------------- metrics

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct MetricsArgs {
    /// High-dimensional rows
    #[arg(long)]
    pub high: Option<PathBuf>,
    /// Embedded rows, in the same order
    #[arg(long)]
    pub low: Option<PathBuf>,
    /// Model whose feature map is applied to the high rows (default: normalize)
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// geodesic or euclidean, used in both spaces
    #[arg(long)]
    pub distance: Option<DistanceKind>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

fn high_points(rows: &[Vec<f64>], model: Option<&Path>) -> anyhow::Result<Vec<SpherePoint>> {
    match model {
        Some(p) => Ok(apply_feature_map(&read_embedding(p)?.mapper, rows)?),
        None => sphere_rows(rows),
    }
}

pub fn run_metrics(a: MetricsArgs) -> anyhow::Result<Outcome> {
    let high_path = required(a.high, "high")?;
    let low_path = required(a.low, "low")?;
    let out_dir = required(a.out_dir, "out-dir")?;
    let k_max = a.k_max.unwrap_or(DEFAULT_K_MAX);
    let kind = a.distance.unwrap_or(DistanceKind::Geodesic);
    let high: Vec<Vec<f64>> = high_points(&Dataset::read(&high_path)?.rows, a.model.as_deref())?
        .into_iter()
        .map(SpherePoint::into_coords)
        .collect();
    let low = Dataset::read(&low_path)?.rows;
    if high.len() != low.len() {
        bail!("{} has {} rows but {} has {}", high_path.display(), high.len(), low_path.display(), low.len());
    }
    let curve = trust_continuity_curve(&high, &low, k_max, kind, kind)?;
    let coranking = coranking_matrix(&high, &low, kind, kind)?;
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let files = ["trust_continuity.csv", "trust_continuity.svg", "coranking.csv", "coranking.svg"]
        .map(|f| out_dir.join(f));
    let table: Vec<Vec<String>> = curve.iter().map(|(k, t, c)| vec![k.to_string(), t.to_string(), c.to_string()]).collect();
    write_csv(&files[0], &["k", "trustworthiness", "continuity"], &table)?;
    let ks: Vec<f64> = curve.iter().map(|c| c.0 as f64).collect();
    let trust: Vec<f64> = curve.iter().map(|c| c.1).collect();
    let cont: Vec<f64> = curve.iter().map(|c| c.2).collect();
    let svg = curves_svg(&ks, &[("T(k)", trust.clone()), ("C(k)", cont.clone())], "trustworthiness / continuity");
    std::fs::write(&files[1], svg)?;
    matrix_csv(&files[2], &coranking.counts)?;
    std::fs::write(&files[3], heatmap_svg(&coranking.counts, 120, "co-ranking matrix (log scale)"))?;
    let mut inputs = vec![high_path, low_path];
    inputs.extend(a.model);
    Ok(Outcome {
        params: json!({ "k-max": k_max, "distance": kind }),
        seeds: BTreeMap::new(),
        inputs,
        outputs: files.to_vec(),
        result: json!({
            "n": high.len(), "k_max": k_max, "trustworthiness": trust, "continuity": cont,
            "coranking_total": coranking.total(),
        }),
    })
}

// ---------------------------------------------------------------- bounds

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BoundsArgs {
    /// Number of components to encode
    #[arg(long = "D")]
    #[serde(rename = "D")]
    pub d: Option<usize>,
    /// Take the component count from a fitted model's spectrum instead
    #[arg(long, conflicts_with = "d")]
    pub model: Option<PathBuf>,
    /// Variance fraction for --model
    #[arg(long)]
    pub beta: Option<f64>,
    /// Per-qubit error probability
    #[arg(long)]
    pub p: Option<f64>,
    /// Maximum acceptable system error
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Also write the record to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_bounds(a: BoundsArgs) -> anyhow::Result<Outcome> {
    let p = required(a.p, "p")?;
    let p_max = required(a.p_max, "p-max")?;
    let budget = NoiseBudget::new(p, p_max).map_err(|e| usage(e.to_string()))?;
    let mut inputs = Vec::new();
    let record = match (a.d, &a.model) {
        (Some(0), _) => return Err(usage("--D must be at least 1")),
        (Some(d), None) => budget_for_components(d, &budget),
        (None, Some(path)) => {
            let emb = read_embedding(path)?;
            inputs.push(path.clone());
            feasible_qubit_range(&emb.model.spectrum, a.beta.unwrap_or(0.75), &budget)?
        }
        _ => return Err(usage("give exactly one of --D or --model")),
    };
    let mut outputs = Vec::new();
    if let Some(out) = a.out {
        write_json(&out, &record)?;
        outputs.push(out);
    }
    Ok(Outcome {
        params: json!({ "D": a.d, "beta": a.model.as_ref().map(|_| a.beta.unwrap_or(0.75)), "p": p, "p-max": p_max }),
        seeds: BTreeMap::new(),
        inputs,
        outputs,
        result: serde_json::to_value(&record)?,
    })
}

// ---------------------------------------------------------------- kernel

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct KernelArgs {
    /// Latent rows (rows of the matrix)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Latent rows for the columns; defaults to --input
    #[arg(long)]
    pub other: Option<PathBuf>,
    /// analytic or circuit
    #[arg(long)]
    pub backend: Option<KernelBackend>,
    /// Output CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_kernel(a: KernelArgs) -> anyhow::Result<Outcome> {
    let input = required(a.input, "input")?;
    let out = required(a.out, "out")?;
    let backend = a.backend.unwrap_or_default();
    let rows = Dataset::read(&input)?.rows;
    let mut inputs = vec![input];
    let cols = match a.other {
        Some(p) => {
            let r = Dataset::read(&p)?.rows;
            inputs.push(p);
            r
        }
        None => rows.clone(),
    };
    let k = kernel_matrix(&rows, &cols, backend)?;
    matrix_csv(&out, &k)?;
    let flat = k.iter().flatten();
    let (lo, hi) = flat.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    Ok(Outcome {
        params: json!({ "backend": backend }),
        seeds: BTreeMap::new(),
        inputs,
        outputs: vec![out],
        result: json!({ "rows": k.len(), "cols": cols.len(), "min": lo, "max": hi, "qubits": qubits_for(rows[0].len()) }),
    })
}

// ---------------------------------------------------------------- classifiers

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SvmArgs {
    /// Box constraint
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_updates: Option<usize>,
    /// analytic or circuit
    #[arg(long)]
    pub backend: Option<KernelBackend>,
}

impl SvmArgs {
    fn config(&self) -> SvmConfig {
        let d = SvmConfig::default();
        SvmConfig {
            c: self.c.unwrap_or(d.c),
            tol: self.tol.unwrap_or(d.tol),
            max_updates: self.max_updates.unwrap_or(d.max_updates),
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct VqcArgs {
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Samples per Adam step; 0 trains on the full set per step
    #[arg(long)]
    pub batch_size: Option<usize>,
}

impl VqcArgs {
    fn layers(&self) -> usize {
        self.layers.unwrap_or(DEFAULT_LAYERS)
    }

    fn config(&self, seed: u64, noise: Option<NoiseSpec>) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            epochs: self.epochs.unwrap_or(d.epochs),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            batch_size: match self.batch_size {
                Some(0) => None,
                Some(b) => Some(b),
                None => d.batch_size,
            },
            seed,
            noise,
            ..d
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainQsvmArgs {
    /// Labelled latent rows
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Optional labelled latent rows to score
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub svm: SvmArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn score_classifier(file: &ClassifierFile, rows: &[Vec<f64>], noise: Option<&NoiseSpec>) -> anyhow::Result<Vec<u8>> {
    match file {
        ClassifierFile::Qsvm { svm, backend, train_rows } => {
            let kt = kernel_matrix(rows, train_rows, *backend)?;
            Ok(svm_predict(svm, &kt)?.into_iter().map(|l| u8::from(l > 0)).collect())
        }
        ClassifierFile::Vqc { model, .. } => {
            Ok(rows.iter().map(|x| vqc_predict(model, x, noise).map(|(_, l)| l)).collect::<qpga::Result<_>>()?)
        }
    }
}

fn test_metrics(
    file: &ClassifierFile,
    test: Option<PathBuf>,
    inputs: &mut Vec<PathBuf>,
    result: &mut Value,
) -> anyhow::Result<()> {
    if let Some(path) = test {
        let data = Dataset::read(&path)?;
        let pred = score_classifier(file, &data.rows, None)?;
        result["test"] = metrics_json(&BinaryMetrics::from_predictions(data.labels(&path)?, &pred)?);
        inputs.push(path);
    }
    Ok(())
}

pub fn run_train_qsvm(a: TrainQsvmArgs) -> anyhow::Result<Outcome> {
    let train = required(a.train, "train")?;
    let out = required(a.out, "out")?;
    let cfg = a.svm.config();
    let backend = a.svm.backend.unwrap_or_default();
    let data = Dataset::read(&train)?;
    let y = signed_labels(data.labels(&train)?);
    let k = kernel_matrix(&data.rows, &data.rows, backend)?;
    let svm = svm_train(&k, &y, &cfg)?;
    let mut result = json!({
        "support_vectors": svm.support_indices.len(), "bias": svm.bias, "updates": svm.updates,
        "dual_objective": svm.dual_objective(&k),
    });
    let file = ClassifierFile::Qsvm { svm, backend, train_rows: data.rows };
    let mut inputs = vec![train];
    test_metrics(&file, a.test, &mut inputs, &mut result)?;
    write_json(&out, &file)?;
    Ok(Outcome {
        params: json!({ "svm": cfg, "backend": backend }),
        seeds: BTreeMap::new(),
        inputs,
        outputs: vec![out],
        result,
    })
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainVqcArgs {
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub vqc: VqcArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Depolarizing probability applied after every gate during training
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn train_vqc_model(rows: &[Vec<f64>], y: &[u8], vqc: &VqcArgs, cfg: &TrainConfig) -> anyhow::Result<(VqcModel, Vec<f64>)> {
    let dim = rows.first().map_or(1, Vec::len);
    let init = VqcModel::random(qubits_for(dim), vqc.layers(), cfg.seed);
    let outcome = vqc_train(rows, y, &init, cfg)?;
    Ok((outcome.model, outcome.loss_history))
}

fn loss_csv_path(out: &Path) -> PathBuf {
    out.with_extension("loss.csv")
}

pub fn run_train_vqc(a: TrainVqcArgs) -> anyhow::Result<Outcome> {
    let train = required(a.train, "train")?;
    let out = required(a.out, "out")?;
    let seed = a.seed.unwrap_or(0);
    let noise = a.noise.map(NoiseSpec::uniform).transpose().map_err(|e| usage(e.to_string()))?;
    let cfg = a.vqc.config(seed, noise);
    let data = Dataset::read(&train)?;
    let (model, losses) = train_vqc_model(&data.rows, data.labels(&train)?, &a.vqc, &cfg)?;
    let train_pred = score_classifier(&ClassifierFile::Vqc { model: model.clone(), config: cfg }, &data.rows, None)?;
    let mut result = json!({
        "final_loss": losses.last(), "qubits": model.qubits,
        "train": metrics_json(&BinaryMetrics::from_predictions(data.labels(&train)?, &train_pred)?),
    });
    let file = ClassifierFile::Vqc { model, config: cfg };
    let mut inputs = vec![train];
    test_metrics(&file, a.test, &mut inputs, &mut result)?;
    write_json(&out, &file)?;
    let loss_path = loss_csv_path(&out);
    let table: Vec<Vec<String>> =
        losses.iter().enumerate().map(|(e, l)| vec![(e + 1).to_string(), l.to_string()]).collect();
    write_csv(&loss_path, &["epoch", "loss"], &table)?;
    Ok(Outcome {
        params: json!({ "layers": a.vqc.layers(), "train": cfg }),
        seeds: seeds(&[("init_and_shuffle", seed)]),
        inputs,
        outputs: vec![out, loss_path],
        result,
    })
}

// ---------------------------------------------------------------- evaluate

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvaluateArgs {
    /// Labelled input rows (before embedding)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// qsvm or vqc
    #[arg(long)]
    pub classifier: Option<String>,
    #[arg(long = "D")]
    #[serde(rename = "D")]
    pub d: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub embed: EmbedArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub svm: SvmArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub vqc: VqcArgs,
    #[arg(long)]
    pub folds: Option<usize>,
    /// Fraction of rows used for training in each fold
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Folds evaluated concurrently; results do not depend on it
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Report file (JSON)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_evaluate(a: EvaluateArgs) -> anyhow::Result<Outcome> {
    let input = required(a.input, "input")?;
    let out = required(a.out, "out")?;
    let k = a.folds.unwrap_or(5);
    if k < 2 {
        return Err(usage("--folds must be at least 2"));
    }
    let train_fraction = a.train_fraction.unwrap_or(1.0 - 1.0 / k as f64);
    let jobs = a.jobs.unwrap_or(1).max(1);
    let seed = a.embed.seed();
    let classifier = match a.classifier.as_deref().unwrap_or("qsvm") {
        "qsvm" => ClassifierSpec::Qsvm { svm: a.svm.config(), backend: a.svm.backend.unwrap_or_default() },
        "vqc" => ClassifierSpec::Vqc { layers: a.vqc.layers(), train: a.vqc.config(seed, None) },
        other => return Err(usage(format!("unknown classifier `{other}` (expected qsvm or vqc)"))),
    };
    let spec = PipelineSpec {
        kernel: a.embed.kernel_spec(),
        landmarks: a.embed.landmarks(),
        components: a.d.unwrap_or(DEFAULT_COMPONENTS),
        mode: a.embed.mode(),
        frechet: FrechetConfig::default(),
        classifier,
        seed,
    };
    let data = Dataset::read(&input)?;
    let labels = data.labels(&input)?;
    let folds = make_folds(labels, k, train_fraction, seed)?;
    let mut per_fold: Vec<Option<qpga::Result<BinaryMetrics>>> = (0..k).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let (spec, rows, folds) = (&spec, &data.rows, &folds);
                scope.spawn(move || {
                    (j..k).step_by(jobs).map(|f| (f, evaluate_fold(spec, rows, labels, folds, f))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (f, r) in h.join().expect("fold worker panicked") {
                per_fold[f] = Some(r);
            }
        }
    });
    let per_fold = per_fold.into_iter().map(|r| r.expect("every fold evaluated")).collect::<qpga::Result<Vec<_>>>()?;
    let report = summarize(per_fold);
    write_json(&out, &json!({ "spec": spec, "folds": k, "train_fraction": train_fraction, "report": report }))?;
    Ok(Outcome {
        params: json!({ "pipeline": spec, "folds": k, "train-fraction": train_fraction, "jobs": jobs }),
        seeds: seeds(&[("pipeline", seed), ("folds", seed)]),
        inputs: vec![input],
        outputs: vec![out],
        result: serde_json::to_value(&report)?,
    })
}

// ---------------------------------------------------------------- noise sweep

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct NoiseSweepArgs {
    /// Trained VQC file; alternatively give --train
    #[arg(long, conflicts_with = "train")]
    pub model: Option<PathBuf>,
    /// Labelled latent rows to train a noiseless VQC on first
    #[arg(long)]
    pub train: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Depolarizing probabilities (p1 = p2)
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub vqc: VqcArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_noise_sweep(a: NoiseSweepArgs) -> anyhow::Result<Outcome> {
    let test = required(a.test, "test")?;
    let out = required(a.out, "out")?;
    let levels = a.p.unwrap_or_else(|| DEFAULT_NOISE_LEVELS.to_vec());
    let noises = levels
        .iter()
        .map(|&p| NoiseSpec::uniform(p))
        .collect::<qpga::Result<Vec<_>>>()
        .map_err(|e| usage(e.to_string()))?;
    let seed = a.seed.unwrap_or(0);
    let mut inputs = Vec::new();
    let model = match (a.model, a.train) {
        (Some(path), None) => {
            let file: ClassifierFile = read_json(&path)?;
            inputs.push(path.clone());
            match file {
                ClassifierFile::Vqc { model, .. } => model,
                ClassifierFile::Qsvm { .. } => bail!("{}: noise sweeps need a VQC model", path.display()),
            }
        }
        (None, Some(path)) => {
            let data = Dataset::read(&path)?;
            let cfg = a.vqc.config(seed, None);
            let (model, _) = train_vqc_model(&data.rows, data.labels(&path)?, &a.vqc, &cfg)?;
            inputs.push(path);
            model
        }
        _ => return Err(usage("give exactly one of --model or --train")),
    };
    let data = Dataset::read(&test)?;
    let truth = data.labels(&test)?;
    inputs.push(test.clone());
    let file = ClassifierFile::Vqc { model, config: TrainConfig::default() };
    let mut table = Vec::new();
    let mut rows_json = Vec::new();
    for (p, noise) in std::iter::once((0.0, None)).chain(levels.iter().copied().zip(noises.iter().map(Some))) {
        let pred = score_classifier(&file, &data.rows, noise)?;
        let m = BinaryMetrics::from_predictions(truth, &pred)?;
        let c = m.confusion;
        table.push(
            [p, p, m.accuracy, m.f1].iter().map(f64::to_string).chain([c.tp, c.fp, c.fn_, c.tn].map(|v| v.to_string())).collect(),
        );
        rows_json.push(json!({ "p1": p, "p2": p, "accuracy": m.accuracy, "f1": m.f1 }));
    }
    write_csv(&out, &["p1", "p2", "accuracy", "f1", "tp", "fp", "fn", "tn"], &table)?;
    Ok(Outcome {
        params: json!({ "p": levels, "seed": seed }),
        seeds: seeds(&[("vqc", seed)]),
        inputs,
        outputs: vec![out],
        result: json!({ "levels": rows_json }),
    })
}

// ---------------------------------------------------------------- D-sweep

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct DsweepArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Component counts to evaluate
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub embed: EmbedArgs,
    /// Neighbourhood size for trustworthiness and continuity
    #[arg(long)]
    pub k: Option<usize>,
    /// Also write one co-ranking CSV and SVG per D here
    #[arg(long)]
    pub coranking_dir: Option<PathBuf>,
    /// Output CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run_dsweep(a: DsweepArgs) -> anyhow::Result<Outcome> {
    let input = required(a.input, "input")?;
    let out = required(a.out, "out")?;
    let mut dims = a.dims.unwrap_or_else(|| vec![2, 4, 8, 16, 32]);
    dims.sort_unstable();
    dims.dedup();
    if dims.first() == Some(&0) || dims.is_empty() {
        return Err(usage("--dims needs positive component counts"));
    }
    let k = a.k.unwrap_or(10);
    let data = Dataset::read(&input)?;
    let m = a.embed.landmarks().min(data.rows.len());
    let mapper = fit_feature_map(&data.rows, a.embed.kernel_spec(), m, a.embed.seed())?;
    let points = apply_feature_map(&mapper, &data.rows)?;
    let n = mapper.output_dim();
    let d_max = *dims.last().expect("non-empty");
    if d_max > n {
        return Err(usage(format!("--dims reaches {d_max} but the feature space has dimension {n}")));
    }
    let full = fit(&points, d_max, &FrechetConfig::default(), a.embed.mode())?;
    let high: Vec<&[f64]> = points.iter().map(SpherePoint::coords).collect();
    let g = DistanceKind::Geodesic;
    if let Some(dir) = &a.coranking_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut table = Vec::new();
    let mut rows_json = Vec::new();
    let mut outputs = vec![out.clone()];
    for &d in &dims {
        let model = full.truncated(d)?;
        let latent = transform(&model, &points)?;
        let mse = reconstruction_error(&points, &inverse_transform(&model, &latent)?)?;
        let low: Vec<&[f64]> = latent.iter().map(LatentPoint::coords).collect();
        let (_, t, c) = trust_continuity_curve(&high, &low, k, g, g)?[k - 1];
        let gamma = model.cumulative_explained_variance();
        if let Some(dir) = &a.coranking_dir {
            let q = coranking_matrix(&high, &low, g, g)?;
            let (csv, svg) = (dir.join(format!("coranking_D{d}.csv")), dir.join(format!("coranking_D{d}.svg")));
            matrix_csv(&csv, &q.counts)?;
            std::fs::write(&svg, heatmap_svg(&q.counts, 120, &format!("co-ranking, D = {d}")))?;
            outputs.extend([csv, svg]);
        }
        table.push(vec![
            d.to_string(),
            min_qubits(d).to_string(),
            gamma.to_string(),
            mse.to_string(),
            t.to_string(),
            c.to_string(),
        ]);
        rows_json.push(json!({
            "D": d, "q_min": min_qubits(d), "explained_variance": gamma, "reconstruction_mse": mse,
            "trustworthiness": t, "continuity": c,
        }));
    }
    write_csv(&out, &["D", "q_min", "explained_variance", "reconstruction_mse", "trustworthiness", "continuity"], &table)?;
    Ok(Outcome {
        params: merge(json!({ "dims": dims, "k": k }), a.embed.resolved()),
        seeds: seeds(&[("landmarks", a.embed.seed())]),
        inputs: vec![input],
        outputs,
        result: json!({ "N": n, "sweep": rows_json }),
    })
}

// ---------------------------------------------------------------- report

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ReportArgs {
    /// Run manifests (*.run.json) to summarize
    #[arg(long, value_delimiter = ',')]
    pub runs: Option<Vec<PathBuf>>,
    /// Output Markdown file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn scalar_lines(prefix: &str, v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                scalar_lines(&key, x, out);
            }
        }
        Value::Number(_) | Value::Bool(_) | Value::String(_) => out.push(format!("| {prefix} | {v} |")),
        _ => {}
    }
}

pub fn run_report(a: ReportArgs) -> anyhow::Result<Outcome> {
    let runs = a.runs.filter(|r| !r.is_empty()).ok_or_else(|| usage("missing required parameter --runs"))?;
    let out = required(a.out, "out")?;
    let mut md = String::from("# qpga run report\n");
    for path in &runs {
        let m: Value = read_json(path)?;
        let command = m["command"].as_str().unwrap_or("?");
        md.push_str(&format!("\n## {command} — `{}`\n\n", path.display()));
        md.push_str(&format!("Wall time: {:.3} s\n\n", m["wall_time_seconds"].as_f64().unwrap_or(f64::NAN)));
        let mut lines = Vec::new();
        scalar_lines("", &m["result"], &mut lines);
        if !lines.is_empty() {
            md.push_str("| result | value |\n|---|---|\n");
            md.push_str(&lines.join("\n"));
            md.push_str("\n\n");
        }
        if let Some(outputs) = m["outputs"].as_object() {
            md.push_str("| output | sha256 |\n|---|---|\n");
            for (file, hash) in outputs {
                md.push_str(&format!("| {file} | {} |\n", hash.as_str().unwrap_or("")));
            }
        }
    }
    std::fs::write(&out, md).with_context(|| format!("writing {}", out.display()))?;
    Ok(Outcome {
        params: json!({}),
        seeds: BTreeMap::new(),
        inputs: runs.clone(),
        outputs: vec![out],
        result: json!({ "runs": runs.len() }),
    })
}
