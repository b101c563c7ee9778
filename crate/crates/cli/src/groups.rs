use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Label given to authors missing from the groups file.
pub const UNASSIGNED: &str = "unassigned";

/// Reads a CSV with header `author_id,group`.
pub fn read_groups(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .with_context(|| format!("{} is missing column `{name}`", path.display()))
    };
    let (id_col, group_col) = (col("author_id")?, col("group")?);
    let mut out = BTreeMap::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let id = rec.get(id_col).unwrap_or("").trim().to_string();
        let group = rec.get(group_col).unwrap_or("").trim().to_string();
        if id.is_empty() {
            bail!("{} row {}: empty author_id", path.display(), i + 2);
        }
        if out.insert(id.clone(), group).is_some() {
            bail!("{} row {}: duplicate author_id `{id}`", path.display(), i + 2);
        }
    }
    Ok(out)
}

/// Group label of each id, in order.
pub fn labels_for(ids: &[String], groups: &BTreeMap<String, String>) -> Vec<String> {
    ids.iter()
        .map(|id| groups.get(id).cloned().unwrap_or_else(|| UNASSIGNED.to_string()))
        .collect()
}
