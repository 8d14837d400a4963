//! High-resolution d-DP reference solutions with an on-disk cache.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cdp::{value_iteration, Algorithm, ValueIterationResult};
use crate::grid::io::GridFnDoc;
use crate::grid::GridFn;
use crate::problem::{ControlProblem, DiscretizationPlan, Policy};
use crate::Result;

#[derive(Serialize, Deserialize)]
struct CachedReference {
    key: String,
    fingerprint: String,
    n: usize,
    costs: Vec<GridFnDoc>,
    policies: Vec<Vec<GridFnDoc>>,
    step_times: Vec<f64>,
    setup_time: f64,
}

/// Cache key: hex SHA-256 of the problem fingerprint and the grid size.
pub fn reference_key(problem: &ControlProblem, n_ref: usize) -> String {
    let mut h = Sha256::new();
    h.update(problem.fingerprint().as_bytes());
    h.update(format!("|N={n_ref}").as_bytes());
    hex::encode(h.finalize())
}

fn to_docs(fs: &[GridFn]) -> Vec<GridFnDoc> {
    fs.iter().map(GridFnDoc::from).collect()
}

fn from_docs(docs: Vec<GridFnDoc>) -> Result<Vec<GridFn>> {
    docs.into_iter().map(GridFn::try_from).collect()
}

fn load(path: &Path, key: &str) -> Result<Option<ValueIterationResult>> {
    let doc: CachedReference = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if doc.key != key {
        return Ok(None);
    }
    let costs = from_docs(doc.costs)?;
    let policies = doc
        .policies
        .into_iter()
        .map(|c| Ok(Policy { components: from_docs(c)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(ValueIterationResult {
        algorithm: Algorithm::Ddp,
        costs,
        policies: Some(policies),
        step_times: doc.step_times,
        setup_time: doc.setup_time,
    }))
}

fn store(path: &Path, key: &str, problem: &ControlProblem, n_ref: usize, r: &ValueIterationResult) -> Result<()> {
    let doc = CachedReference {
        key: key.to_string(),
        fingerprint: problem.fingerprint(),
        n: n_ref,
        costs: to_docs(&r.costs),
        policies: r.policies.iter().flatten().map(|p| to_docs(&p.components)).collect(),
        step_times: r.step_times.clone(),
        setup_time: r.setup_time,
    };
    let tmp = path.with_extension("json.tmp");
    serde_json::to_writer(BufWriter::new(File::create(&tmp)?), &doc)?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

/// d-DP solution with `n_ref` points per state and input dimension.
///
/// With a cache directory, the result is read from or written to
/// `<dir>/ref-<key>.json`; an unreadable cache entry is recomputed.
pub fn make_reference(problem: &ControlProblem, n_ref: usize, cache_dir: Option<&Path>) -> Result<ValueIterationResult> {
    let key = reference_key(problem, n_ref);
    let path = cache_dir.map(|d| d.join(format!("ref-{key}.json")));
    if let Some(p) = path.as_deref().filter(|p| p.exists()) {
        match load(p, &key) {
            Ok(Some(r)) => {
                info!("reference {} at N={n_ref} loaded from {}", problem.name(), p.display());
                return Ok(r);
            }
            Ok(None) => warn!("cache entry {} has a different key, recomputing", p.display()),
            Err(e) => warn!("cache entry {} unreadable ({e}), recomputing", p.display()),
        }
    }
    let plan = DiscretizationPlan::uniform(problem, n_ref, n_ref)?;
    let r = value_iteration(problem, &plan, Algorithm::Ddp)?;
    if let (Some(dir), Some(p)) = (cache_dir, path.as_deref()) {
        std::fs::create_dir_all(dir)?;
        store(p, &key, problem, n_ref, &r)?;
    }
    Ok(r)
}
