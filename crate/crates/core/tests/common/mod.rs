#![allow(dead_code)]

use std::path::PathBuf;

use qpga::dataio::{ingest, DatasetKind, ImageBatch, IngestSpec};
use qpga::manifold::SpherePoint;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dataset root: `QPGA_DATA` if set, else the repository's `data/`.
pub fn data_root() -> PathBuf {
    std::env::var_os("QPGA_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

pub fn load_idx(dataset: DatasetKind, classes: [u8; 2], per_class: usize, seed: u64) -> ImageBatch {
    let dir = data_root().join(dataset.as_str());
    let spec = IngestSpec {
        dataset,
        paths: vec![dir.join("images-idx3-ubyte"), dir.join("labels-idx1-ubyte")],
        classes,
        samples_per_class: per_class,
        resize: Some(8),
        seed,
    };
    ingest(&spec).expect("dataset present under the data root")
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> SpherePoint {
    SpherePoint::new(random_unit(rng, dim)).unwrap()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn arc(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

/// Prints one status line for an acceptance criterion and returns `ok`.
/// Prints one criterion line. It goes straight to the process stderr, past
/// the test harness's output capture, so a plain `cargo test` log carries
/// every PASS and FAIL line.
pub fn report(id: &str, ok: bool, detail: &str) -> bool {
    use std::io::Write;
    let line = format!("criterion {id}: {} — {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    ok
}
