//! On-disk cache of exact distributions.
//!
//! One JSON file per (sorted sizes, statistic), under a directory named after
//! the format version. Counts are stored as decimal strings.

use std::fs;
use std::path::{Path, PathBuf};

use concordance::{
    enumerate_distribution, Atom, EnumerationConfig, ExactDistribution, GroupSizes, Statistic,
};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    version: u32,
    sizes: Vec<u32>,
    statistic: Statistic,
    total: String,
    /// (key, count) pairs.
    atoms: Vec<(String, String)>,
}

pub fn cache_path(dir: &Path, sizes: &GroupSizes, statistic: Statistic) -> PathBuf {
    let key: Vec<String> = sizes
        .canonical()
        .sizes()
        .iter()
        .map(u32::to_string)
        .collect();
    dir.join(format!("v{CACHE_VERSION}"))
        .join(format!("{statistic}-{}.json", key.join("-")))
}

/// Exact distribution for `sizes`, read from or written to `dir` when given.
pub fn distribution(
    sizes: &GroupSizes,
    statistic: Statistic,
    config: &EnumerationConfig,
    dir: Option<&Path>,
) -> Result<ExactDistribution> {
    let Some(dir) = dir else {
        return Ok(enumerate_distribution(sizes, statistic, config)?);
    };
    let path = cache_path(dir, sizes, statistic);
    if path.exists() {
        return read(&path, statistic)?.with_sizes(sizes.clone()).map_err(Into::into);
    }
    let canonical = sizes.canonical();
    let dist = enumerate_distribution(&canonical, statistic, config)?;
    write(&path, &dist)?;
    Ok(dist.with_sizes(sizes.clone())?)
}

fn read(path: &Path, statistic: Statistic) -> Result<ExactDistribution> {
    let bad = |message: String| CliError::Cache {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let file: CacheFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if file.version != CACHE_VERSION || file.statistic != statistic {
        return Err(bad(format!(
            "holds version {} {} data, expected version {CACHE_VERSION} {statistic}",
            file.version, file.statistic
        )));
    }
    let atoms = file
        .atoms
        .iter()
        .map(|(key, count)| {
            Ok(Atom {
                key: key.parse().map_err(|_| bad(format!("bad key {key}")))?,
                count: count.parse::<BigUint>().map_err(|_| bad(format!("bad count {count}")))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sizes = GroupSizes::new(file.sizes).map_err(|e| bad(e.to_string()))?;
    let dist = ExactDistribution::from_parts(sizes, statistic, atoms)
        .map_err(|e| bad(e.to_string()))?;
    if dist.total().to_string() != file.total {
        return Err(bad("total does not match the counts".into()));
    }
    Ok(dist)
}

fn write(path: &Path, dist: &ExactDistribution) -> Result<()> {
    let file = CacheFile {
        version: CACHE_VERSION,
        sizes: dist.sizes().sizes().to_vec(),
        statistic: dist.statistic(),
        total: dist.total().to_string(),
        atoms: dist
            .atoms()
            .iter()
            .map(|a| (a.key.to_string(), a.count.to_string()))
            .collect(),
    };
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io)?;
    }
    // Write then rename so a concurrent reader never sees a partial file.
    let tmp = path.with_extension(format!("json.{}.tmp", std::process::id()));
    fs::write(&tmp, serde_json::to_vec(&file)?).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}
