//! On-disk formats: instance files, policy files, manifests, episode dumps.
//!
//! Everything is JSON. Non-finite floats are written as the strings
//! `"inf"`, `"-inf"` and `"nan"`.

use std::fs;
use std::path::{Path, PathBuf};

use branchlearn_core::float;
use branchlearn_core::gen::GenConfig;
use branchlearn_core::milp::MilpInstance;
use branchlearn_core::policy::PolicyParams;
use branchlearn_core::sparse::SparseMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const INSTANCE_FORMAT: u32 = 1;
pub const POLICY_FORMAT: u32 = 1;
pub const MANIFEST_FORMAT: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: format version {found}, expected {expected}")]
    VersionMismatch { path: PathBuf, found: u32, expected: u32 },
    #[error("{path}: invalid content: {reason}")]
    Invalid { path: PathBuf, reason: String },
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| IoError::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Parses JSON, reporting failures against `path`.
pub fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|source| IoError::Parse {
        path: path.to_owned(),
        source,
    })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    parse_json(path, &read(path)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).expect("serialisable");
    write(path, &text)
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    format: u32,
    name: String,
    n_vars: usize,
    n_rows: usize,
    obj: Vec<f64>,
    row_triplets: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
    #[serde(with = "float::vec")]
    lower: Vec<f64>,
    #[serde(with = "float::vec")]
    upper: Vec<f64>,
    int_set: Vec<usize>,
}

pub fn instance_to_json(inst: &MilpInstance) -> String {
    let file = InstanceFile {
        format: INSTANCE_FORMAT,
        name: inst.name.clone(),
        n_vars: inst.n_vars(),
        n_rows: inst.n_rows(),
        obj: inst.obj.clone(),
        row_triplets: inst.rows.triplets().collect(),
        rhs: inst.rhs.clone(),
        lower: inst.lower.clone(),
        upper: inst.upper.clone(),
        int_set: inst.int_set.clone(),
    };
    serde_json::to_string(&file).expect("serialisable")
}

pub fn instance_from_json(path: &Path, text: &str) -> Result<MilpInstance, IoError> {
    #[derive(Deserialize)]
    struct Version {
        format: u32,
    }
    let v: Version = parse_json(path, text)?;
    if v.format != INSTANCE_FORMAT {
        return Err(IoError::VersionMismatch {
            path: path.to_owned(),
            found: v.format,
            expected: INSTANCE_FORMAT,
        });
    }
    let f: InstanceFile = parse_json(path, text)?;
    let invalid = |reason: String| IoError::Invalid {
        path: path.to_owned(),
        reason,
    };
    let rows = SparseMatrix::from_triplets(f.n_rows, f.n_vars, &f.row_triplets)
        .ok_or_else(|| invalid("row triplet index out of range".into()))?;
    let inst = MilpInstance {
        name: f.name,
        obj: f.obj,
        rows,
        rhs: f.rhs,
        lower: f.lower,
        upper: f.upper,
        int_set: f.int_set,
    };
    inst.validate().map_err(|e| invalid(e.to_string()))?;
    Ok(inst)
}

pub fn read_instance(path: &Path) -> Result<MilpInstance, IoError> {
    instance_from_json(path, &read(path)?)
}

pub fn write_instance(path: &Path, inst: &MilpInstance) -> Result<(), IoError> {
    write(path, &instance_to_json(inst))
}

/// Instance files (`*.json`, excluding the manifest) in `dir`, sorted by
/// file name.
pub fn list_instances(dir: &Path) -> Result<Vec<PathBuf>, IoError> {
    let entries = fs::read_dir(dir).map_err(|source| IoError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json") && p.file_name().is_some_and(|n| n != MANIFEST_NAME))
        .collect();
    paths.sort();
    Ok(paths)
}

pub fn read_instance_dir(dir: &Path) -> Result<Vec<MilpInstance>, IoError> {
    list_instances(dir)?.iter().map(|p| read_instance(p)).collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct PolicyFile {
    format: u32,
    hidden: usize,
    theta: Vec<f64>,
}

pub fn policy_to_json(params: &PolicyParams) -> String {
    serde_json::to_string(&PolicyFile {
        format: POLICY_FORMAT,
        hidden: params.hidden(),
        theta: params.as_slice().to_vec(),
    })
    .expect("serialisable")
}

pub fn save_policy(path: &Path, params: &PolicyParams) -> Result<(), IoError> {
    write(path, &policy_to_json(params))
}

pub fn load_policy(path: &Path) -> Result<PolicyParams, IoError> {
    let text = read(path)?;
    let f: PolicyFile = parse_json(path, &text)?;
    if f.format != POLICY_FORMAT {
        return Err(IoError::VersionMismatch {
            path: path.to_owned(),
            found: f.format,
            expected: POLICY_FORMAT,
        });
    }
    let params = PolicyParams::from_flat(f.hidden, f.theta).ok_or_else(|| IoError::Invalid {
        path: path.to_owned(),
        reason: "parameter count does not match hidden size".into(),
    })?;
    if !params.is_finite() {
        return Err(IoError::Invalid {
            path: path.to_owned(),
            reason: "non-finite parameter".into(),
        });
    }
    Ok(params)
}

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
    /// Filled in by `presolve-optima`.
    #[serde(default, with = "float::option", skip_serializing_if = "Option::is_none")]
    pub optimum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub generator: GenConfig,
    pub instances: Vec<ManifestEntry>,
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, IoError> {
    let path = dir.join(MANIFEST_NAME);
    let m: Manifest = read_json(&path)?;
    if m.format != MANIFEST_FORMAT {
        return Err(IoError::VersionMismatch {
            path,
            found: m.format,
            expected: MANIFEST_FORMAT,
        });
    }
    Ok(m)
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), IoError> {
    write_json(&dir.join(MANIFEST_NAME), manifest)
}
