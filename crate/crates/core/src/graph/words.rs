use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::AuthorProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredWord {
    pub term: String,
    /// `(f_cluster - f_global) / f_global` on relative frequencies.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterWords {
    pub cluster: usize,
    pub members: Vec<String>,
    pub words: Vec<ScoredWord>,
}

/// Relative error of pooled cluster frequencies against global frequencies,
/// for words with at least `min_global_count` occurrences. Returns the
/// `top_m` highest-scoring words per cluster (ties by term).
pub fn characteristic_words(
    profiles: &[AuthorProfile],
    assignment: &[usize],
    top_m: usize,
    min_global_count: u64,
) -> Result<Vec<ClusterWords>> {
    if profiles.len() != assignment.len() {
        return Err(Error::LengthMismatch {
            left: profiles.len(),
            right: assignment.len(),
        });
    }
    let n_clusters = assignment.iter().copied().max().map_or(0, |m| m + 1);
    let mut global: BTreeMap<&str, u64> = BTreeMap::new();
    let mut pooled: Vec<BTreeMap<&str, u64>> = vec![BTreeMap::new(); n_clusters];
    let mut members: Vec<Vec<String>> = vec![Vec::new(); n_clusters];
    for (p, &c) in profiles.iter().zip(assignment) {
        members[c].push(p.author_id.clone());
        for (t, &k) in &p.term_counts {
            *global.entry(t).or_insert(0) += k;
            *pooled[c].entry(t).or_insert(0) += k;
        }
    }
    let global_total: u64 = global.values().sum();
    let mut out = Vec::with_capacity(n_clusters);
    for c in 0..n_clusters {
        let total: u64 = pooled[c].values().sum();
        if members[c].is_empty() || total == 0 {
            return Err(Error::EmptyCluster(c));
        }
        let mut words: Vec<ScoredWord> = global
            .iter()
            .filter(|(_, &g)| g >= min_global_count && g > 0)
            .map(|(&t, &g)| {
                let f = g as f64 / global_total as f64;
                let fi = pooled[c].get(t).copied().unwrap_or(0) as f64 / total as f64;
                ScoredWord {
                    term: t.to_string(),
                    score: (fi - f) / f,
                }
            })
            .collect();
        words.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.term.cmp(&b.term)));
        words.truncate(top_m);
        out.push(ClusterWords {
            cluster: c,
            members: members[c].clone(),
            words,
        });
    }
    Ok(out)
}

/// Writes `cluster,size,members,words` with `;`-joined lists.
pub fn write_cluster_csv<W: std::io::Write>(w: W, clusters: &[ClusterWords]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["cluster", "size", "members", "words"])?;
    for c in clusters {
        let words: Vec<&str> = c.words.iter().map(|w| w.term.as_str()).collect();
        out.write_record([
            c.cluster.to_string(),
            c.members.len().to_string(),
            c.members.join(";"),
            words.join(";"),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<cluster csv>", e))?;
    Ok(())
}
