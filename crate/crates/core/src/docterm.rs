//! Binarized sparse document-term matrix and checksum-based duplicate removal.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{TermList, Vocabulary};

/// Present term ranks (1-based, sorted, unique) of one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRow {
    pub doc_index: usize,
    pub terms: Vec<u32>,
}

/// Document x term presence matrix; every stored entry has value 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseDocTermMatrix {
    n_docs: usize,
    n_terms: usize,
    rows: Vec<DocRow>,
    doc_author: BTreeMap<usize, String>,
}

impl SparseDocTermMatrix {
    /// Assembles a matrix from rows, checking ranks and indices.
    pub fn from_rows(n_docs: usize, n_terms: usize, mut rows: Vec<DocRow>) -> Result<Self> {
        rows.sort_by_key(|r| r.doc_index);
        for w in rows.windows(2) {
            if w[0].doc_index == w[1].doc_index {
                return Err(Error::InvalidParameter(format!(
                    "document {} appears twice",
                    w[0].doc_index
                )));
            }
        }
        for r in &mut rows {
            if r.doc_index >= n_docs {
                return Err(Error::InvalidParameter(format!(
                    "doc_index {} out of range for {n_docs} documents",
                    r.doc_index
                )));
            }
            r.terms.sort_unstable();
            r.terms.dedup();
            if r.terms.first() == Some(&0) || r.terms.last().is_some_and(|&t| t as usize > n_terms) {
                return Err(Error::InvalidParameter(format!(
                    "term rank out of range in document {}",
                    r.doc_index
                )));
            }
        }
        Ok(SparseDocTermMatrix {
            n_docs,
            n_terms,
            rows,
            doc_author: BTreeMap::new(),
        })
    }

    pub fn with_doc_authors(mut self, doc_author: BTreeMap<usize, String>) -> Self {
        self.doc_author = doc_author;
        self
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn rows(&self) -> &[DocRow] {
        &self.rows
    }

    pub fn doc_author(&self) -> &BTreeMap<usize, String> {
        &self.doc_author
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }

    /// `(doc_index, term_rank, 1)` triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, u32, u8)> + '_ {
        self.rows
            .iter()
            .flat_map(|r| r.terms.iter().map(move |&t| (r.doc_index, t, 1u8)))
    }

    /// For each term rank `1..=n_terms` (index `rank - 1`), the sorted row
    /// positions where it is present.
    pub fn column_supports(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n_terms];
        for (pos, r) in self.rows.iter().enumerate() {
            for &t in &r.terms {
                cols[t as usize - 1].push(pos as u32);
            }
        }
        cols
    }

    /// Writes `doc,term_rank,value` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["doc", "term_rank", "value"])?;
        for (d, t, v) in self.triplets() {
            out.write_record([d.to_string(), t.to_string(), v.to_string()])?;
        }
        out.flush().map_err(|e| Error::io("<matrix csv>", e))?;
        Ok(())
    }

    /// Reads triplet CSV; dimensions come from the sidecar.
    pub fn read_csv<R: Read>(r: R, n_docs: usize, n_terms: usize) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let mut rows: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let parse = |k: usize| rec.get(k).and_then(|s| s.parse::<usize>().ok());
            match (parse(0), parse(1), parse(2)) {
                (Some(d), Some(t), Some(1)) => rows.entry(d).or_default().push(t as u32),
                _ => {
                    return Err(Error::InvalidRow {
                        row: i + 2,
                        message: "expected `doc,term_rank,1`".into(),
                    })
                }
            }
        }
        Self::from_rows(
            n_docs,
            n_terms,
            rows.into_iter()
                .map(|(doc_index, terms)| DocRow { doc_index, terms })
                .collect(),
        )
    }
}

/// Binarizes documents over the truncated vocabulary. Returns the matrix and
/// the indices of documents dropped for having no retained terms.
pub fn build_matrix(
    docs: &[TermList],
    vocab: &Vocabulary,
) -> Result<(SparseDocTermMatrix, Vec<usize>)> {
    if vocab.is_empty() {
        return Err(Error::InvalidParameter("empty truncated vocabulary".into()));
    }
    let mut rows = Vec::with_capacity(docs.len());
    let mut dropped = Vec::new();
    for d in docs {
        let mut terms: Vec<u32> = d
            .terms
            .iter()
            .filter_map(|t| vocab.rank(t))
            .map(|r| r as u32)
            .collect();
        terms.sort_unstable();
        terms.dedup();
        if terms.is_empty() {
            dropped.push(d.doc_index);
        } else {
            rows.push(DocRow {
                doc_index: d.doc_index,
                terms,
            });
        }
    }
    if !dropped.is_empty() {
        log::warn!("{} documents have no terms in the vocabulary and were dropped", dropped.len());
    }
    let n_docs = docs.iter().map(|d| d.doc_index + 1).max().unwrap_or(0);
    Ok((SparseDocTermMatrix::from_rows(n_docs, vocab.len(), rows)?, dropped))
}

/// Sum of the 1-based ranks of the present terms.
pub fn row_checksum(ranks: &[u32]) -> u64 {
    ranks.iter().map(|&r| r as u64).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DedupReport {
    pub dropped_rows: Vec<usize>,
    /// dropped doc_index -> kept doc_index
    pub kept_representative: BTreeMap<usize, usize>,
    pub fraction_dropped: f64,
}

/// Removes rows whose term set equals an earlier row's. Candidates are found
/// by checksum and then compared exactly, so colliding but distinct rows stay.
/// The lowest doc_index of each duplicate group is kept.
pub fn dedupe_rows(x: &SparseDocTermMatrix) -> (SparseDocTermMatrix, DedupReport) {
    let checksums: Vec<u64> = x.rows.par_iter().map(|r| row_checksum(&r.terms)).collect();
    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut kept = Vec::with_capacity(x.rows.len());
    let mut report = DedupReport {
        dropped_rows: Vec::new(),
        kept_representative: BTreeMap::new(),
        fraction_dropped: 0.0,
    };
    // rows are sorted by doc_index, so the first occurrence is the lowest index
    for (pos, row) in x.rows.iter().enumerate() {
        let bucket = buckets.entry(checksums[pos]).or_default();
        match bucket.iter().find(|&&k| x.rows[k].terms == row.terms) {
            Some(&rep) => {
                report.dropped_rows.push(row.doc_index);
                report
                    .kept_representative
                    .insert(row.doc_index, x.rows[rep].doc_index);
            }
            None => {
                bucket.push(pos);
                kept.push(row.clone());
            }
        }
    }
    if !x.rows.is_empty() {
        report.fraction_dropped = report.dropped_rows.len() as f64 / x.rows.len() as f64;
    }
    let doc_author = x
        .doc_author
        .iter()
        .filter(|(d, _)| !report.kept_representative.contains_key(d))
        .map(|(&d, a)| (d, a.clone()))
        .collect();
    let out = SparseDocTermMatrix {
        n_docs: x.n_docs,
        n_terms: x.n_terms,
        rows: kept,
        doc_author,
    };
    (out, report)
}
