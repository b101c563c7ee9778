use std::io::Write;

use anyhow::{bail, Result};
use atlas_core::stats::{spearman, SpearmanResult};
use atlas_core::DistanceMatrix;
use serde::Serialize;

/// One author pair under both distances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRow {
    pub author: String,
    pub other: String,
    pub wasserstein: f64,
    pub direct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceComparison {
    pub spearman: SpearmanResult,
    /// Each unordered pair twice, once per author, grouped by author.
    #[serde(skip)]
    pub rows: Vec<PairRow>,
}

/// Rank correlation of the two upper triangles plus per-author rows for
/// trend plots. Both matrices must list the same authors in the same order.
pub fn compare_distances(wasserstein: &DistanceMatrix, direct: &DistanceMatrix) -> Result<DistanceComparison> {
    if wasserstein.ids() != direct.ids() {
        bail!("author order differs between the two distance matrices");
    }
    let result = spearman(&wasserstein.upper_triangle(), &direct.upper_triangle())?;
    let ids = wasserstein.ids();
    let mut rows = Vec::new();
    for i in 0..ids.len() {
        for j in 0..ids.len() {
            if i != j {
                rows.push(PairRow {
                    author: ids[i].clone(),
                    other: ids[j].clone(),
                    wasserstein: wasserstein.get(i, j),
                    direct: direct.get(i, j),
                });
            }
        }
    }
    Ok(DistanceComparison { spearman: result, rows })
}

pub fn write_comparison_csv<W: Write>(w: W, rows: &[PairRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
