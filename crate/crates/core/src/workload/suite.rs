//! The bundled twenty-case suite: loads from 0.60 upward in steps of 0.04,
//! 15 to 40 tasks, seeds 1 to 20. Committed copies live in `suite/` at the
//! crate root.

use std::fs;
use std::path::{Path, PathBuf};

use crate::model::Workload;
use crate::scalar::Scalar;
use crate::time::TimeDelta;
use crate::workload::{generate, parse, serialize, GenError, GenSpec, ValueMode, WorkloadIoError};

pub const CASES: usize = 20;
pub const MANIFEST: &str = "manifest.txt";

/// Directory of the committed suite files.
pub fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("suite")
}

/// Case `k` (0-based) of the suite.
pub fn case_spec<V: Scalar>(k: usize) -> GenSpec<V> {
    assert!(k < CASES);
    let load = V::from_u64(60 + 4 * k as u64) / V::from_u64(100);
    GenSpec {
        name: format!("case{:02}", k + 1),
        n_tasks: 15 + (25 * k) / (CASES - 1),
        target_load: load,
        span: TimeDelta(100_000),
        burst_range: (200, 12_000),
        deadline_tightness: (V::from_u64(3) / V::from_u64(2), V::from_u64(4)),
        value_mode: ValueMode::Unit,
        seed: k as u64 + 1,
    }
}

pub fn specs<V: Scalar>() -> Vec<GenSpec<V>> {
    (0..CASES).map(case_spec).collect()
}

pub fn generate_suite<V: Scalar>() -> Result<Vec<Workload<V>>, GenError> {
    specs::<V>().iter().map(generate).collect()
}

/// One line per case: `name seed tasks load`.
pub fn manifest<V: Scalar>(specs: &[GenSpec<V>]) -> String {
    let mut out = String::from("# name seed tasks load\n");
    for g in specs {
        out.push_str(&format!("{} {} {} {}\n", g.name, g.seed, g.n_tasks, g.target_load.to_plain_string()));
    }
    out
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Workload(#[from] WorkloadIoError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SuiteError + '_ {
    move |source| SuiteError::Io { path: path.display().to_string(), source }
}

/// Writes every case as `<name>.csv` plus the manifest into `dir`.
pub fn write_suite<V: Scalar>(dir: &Path) -> Result<Vec<PathBuf>, SuiteError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let specs = specs::<V>();
    let mut written = Vec::with_capacity(specs.len() + 1);
    for g in &specs {
        let path = dir.join(format!("{}.csv", g.name));
        serialize(&generate(g)?, &path)?;
        written.push(path);
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest(&specs)).map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}

/// Case names listed in a manifest, in order.
pub fn read_manifest(text: &str) -> Result<Vec<String>, SuiteError> {
    let mut names = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let name = line.split_whitespace().next().expect("non-empty line");
        if names.iter().any(|n| n == name) {
            return Err(SuiteError::Manifest { line: i + 1, message: format!("duplicate case `{name}`") });
        }
        names.push(name.to_string());
    }
    if names.is_empty() {
        return Err(SuiteError::Manifest { line: 0, message: "no cases".into() });
    }
    Ok(names)
}

/// Loads the cases listed in `dir/manifest.txt`.
pub fn load_suite<V: Scalar>(dir: &Path) -> Result<Vec<Workload<V>>, SuiteError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    read_manifest(&text)?.iter().map(|name| parse(&dir.join(format!("{name}.csv"))).map_err(SuiteError::from)).collect()
}
