//! Instance corpus on disk: generation, labeling and dataset export.
//!
//! Layout: `<corpus>/manifest.json` plus one `<corpus>/instances/<id>/`
//! directory per instance.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vqls_core::driver::{self, Label};
use vqls_core::graphenc::{self, RecordMeta};
use vqls_core::problem::{self, DatasetSplit, RhsPolicy};
use vqls_core::{DatasetRecord, LinearSystem};

use crate::config::Settings;
use crate::{version, Outcome, UsageError};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub generated_with: Settings,
    pub labeled_with: Option<Settings>,
    pub split: DatasetSplit,
    /// Sorted by id.
    pub instances: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub id: String,
    pub qubits: usize,
    pub split: String,
    pub label: Option<Label>,
}

impl Manifest {
    pub fn read(corpus: &Path) -> Result<Self> {
        let path = corpus.join(MANIFEST);
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading {}; is this a corpus directory?", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Write via a temporary file so an interrupted run keeps the old manifest.
    pub fn write(&self, corpus: &Path) -> Result<()> {
        let path = corpus.join(MANIFEST);
        let tmp = corpus.join(format!("{MANIFEST}.tmp"));
        fs::write(&tmp, serde_json::to_string_pretty(self)? + "\n")
            .with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, &path).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

pub fn instance_dir(corpus: &Path, id: &str) -> PathBuf {
    corpus.join("instances").join(id)
}

pub fn load(corpus: &Path, id: &str) -> Result<LinearSystem> {
    let dir = instance_dir(corpus, id);
    problem::load_instance(&dir).with_context(|| format!("loading instance {}", dir.display()))
}

/// 64-bit FNV-1a, used to derive per-instance seeds from ids.
pub fn id_hash(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Inclusive qubit range written as `4..7`, `4..=7` or `5`.
pub fn parse_qubit_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let q = parse(s)?;
            (q, q)
        }
    };
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok((lo, hi))
}

/// Split ids 8:1:1; corpora under ten instances go entirely to training.
fn split_ids(ids: &[String], seed: u64) -> Result<DatasetSplit> {
    if ids.len() < 10 {
        return Ok(DatasetSplit {
            train: ids.to_vec(),
            val: vec![],
            test: vec![],
        });
    }
    Ok(problem::split_dataset(ids, seed)?)
}

pub struct GenRequest<'a> {
    pub qubits: (usize, usize),
    pub count: usize,
    pub mtx: &'a [PathBuf],
    pub out: &'a Path,
}

pub fn gen_data(req: GenRequest<'_>, settings: &Settings) -> Result<Outcome> {
    let (lo, hi) = req.qubits;
    if lo < 2 || hi > vqls_core::MAX_QUBITS {
        return Err(UsageError(format!(
            "qubits must lie in 2..={}",
            vqls_core::MAX_QUBITS
        ))
        .into());
    }
    let jobs: Vec<(usize, u64)> = (lo..=hi)
        .flat_map(|q| (0..req.count as u64).map(move |k| (q, settings.gen_seed + k)))
        .collect();
    let mut systems: Vec<LinearSystem> = jobs
        .par_iter()
        .map(|&(q, seed)| Ok(problem::gen_random_system(q, settings.density, seed)?))
        .collect::<Result<_>>()?;
    for path in req.mtx {
        let sys = problem::load_matrix_market(path, &RhsPolicy::Ones)
            .with_context(|| format!("ingesting {}", path.display()))?;
        systems.push(problem::normalize_system(&sys)?);
    }
    systems.sort_by(|a, b| a.id().cmp(b.id()));
    if let Some(w) = systems.windows(2).find(|w| w[0].id() == w[1].id()) {
        bail!("duplicate instance id {}", w[0].id());
    }
    if systems.is_empty() {
        return Err(UsageError("nothing to generate: --count is 0 and no --mtx given".into()).into());
    }

    fs::create_dir_all(req.out).with_context(|| format!("creating {}", req.out.display()))?;
    systems
        .par_iter()
        .try_for_each(|sys| problem::save_instance(sys, &instance_dir(req.out, sys.id())))?;

    let ids: Vec<String> = systems.iter().map(|s| s.id().to_string()).collect();
    let split = split_ids(&ids, settings.gen_seed)?;
    let instances = systems
        .iter()
        .map(|s| Entry {
            id: s.id().to_string(),
            qubits: s.qubits(),
            split: split.split_of(s.id()).expect("every id is split").to_string(),
            label: None,
        })
        .collect();
    Manifest {
        version: version().to_string(),
        generated_with: settings.clone(),
        labeled_with: None,
        split,
        instances,
    }
    .write(req.out)?;
    eprintln!("wrote {} instances to {}", ids.len(), req.out.display());
    Ok(Outcome::Success)
}

/// Label train and validation instances that do not have a label yet.
pub fn label(corpus: &Path, settings: &Settings) -> Result<Outcome> {
    let mut manifest = Manifest::read(corpus)?;
    let todo: Vec<usize> = manifest
        .instances
        .iter()
        .enumerate()
        .filter(|(_, e)| e.label.is_none() && e.split != "test")
        .map(|(i, _)| i)
        .collect();
    if todo.is_empty() {
        eprintln!("nothing to label");
        return Ok(Outcome::Success);
    }
    let results: Vec<(usize, Result<Label>)> = todo
        .par_iter()
        .map(|&i| {
            let id = &manifest.instances[i].id;
            let seed = vqls_core::seed::derive(settings.run.seed, &[id_hash(id)]);
            let res = load(corpus, id).and_then(|sys| {
                Ok(driver::label_instance(&sys, &settings.run, settings.restarts, seed)?)
            });
            (i, res)
        })
        .collect();

    let mut failed = Vec::new();
    let mut unconverged = 0;
    for (i, res) in results {
        let entry = &mut manifest.instances[i];
        match res {
            Ok(label) => {
                unconverged += usize::from(!label.converged);
                entry.label = Some(label);
            }
            Err(e) => failed.push(format!("{}: {e:#}", entry.id)),
        }
    }
    manifest.labeled_with = Some(settings.clone());
    manifest.version = version().to_string();
    manifest.write(corpus)?;
    eprintln!(
        "labeled {} instances ({unconverged} did not reach the threshold)",
        todo.len() - failed.len()
    );
    if failed.is_empty() {
        Ok(Outcome::Success)
    } else {
        for f in &failed {
            eprintln!("failed: {f}");
        }
        Ok(Outcome::Partial)
    }
}

#[derive(Serialize)]
struct ExportMeta<'a> {
    version: &'a str,
    corpus: String,
    records: usize,
    generated_with: &'a Settings,
    labeled_with: Option<&'a Settings>,
}

pub fn export_graphs(corpus: &Path, out: &Path) -> Result<Outcome> {
    let manifest = Manifest::read(corpus)?;
    let records: Vec<DatasetRecord> = manifest
        .instances
        .par_iter()
        .map(|e| {
            let sys = load(corpus, &e.id)?;
            let meta = RecordMeta {
                split: Some(e.split.clone()),
                source: Some(sys.meta().source.clone()),
                init_cost: e.label.as_ref().map(|l| l.init_cost),
                final_cost: e.label.as_ref().map(|l| l.final_cost),
                steps: e.label.as_ref().and_then(|l| l.steps),
                converged: e.label.as_ref().map(|l| l.converged),
                restarts: e.label.as_ref().map(|l| l.restarts),
            };
            Ok(DatasetRecord::new(&sys, e.label.as_ref().map(|l| l.params.clone()), meta))
        })
        .collect::<Result<_>>()?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    graphenc::export_dataset(&records, out)?;
    let meta = ExportMeta {
        version: version(),
        corpus: corpus.display().to_string(),
        records: records.len(),
        generated_with: &manifest.generated_with,
        labeled_with: manifest.labeled_with.as_ref(),
    };
    let meta_path = sidecar(out);
    fs::write(&meta_path, serde_json::to_string_pretty(&meta)? + "\n")
        .with_context(|| format!("writing {}", meta_path.display()))?;
    eprintln!("exported {} records to {}", records.len(), out.display());
    Ok(Outcome::Success)
}

/// `<file>.meta.json` next to an output file.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}
