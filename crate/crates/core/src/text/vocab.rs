use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::tokenize::TermList;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Terms ranked by decreasing global count, ties broken lexicographically.
/// A term's rank (1-based position) is its identity in every later stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds from `(term, count)` pairs, sorting them into rank order.
    pub fn from_counts(pairs: impl IntoIterator<Item = (String, u64)>) -> Self {
        let mut pairs: Vec<(String, u64)> = pairs.into_iter().collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let index = pairs
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), i))
            .collect();
        let (terms, counts) = pairs.into_iter().unzip();
        Vocabulary {
            terms,
            counts,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// 1-based rank of `term`.
    pub fn rank(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|i| i + 1)
    }

    /// Term at 1-based `rank`.
    pub fn term(&self, rank: usize) -> Option<&str> {
        rank.checked_sub(1)
            .and_then(|i| self.terms.get(i))
            .map(String::as_str)
    }

    pub fn count(&self, term: &str) -> Option<u64> {
        self.index.get(term).map(|&i| self.counts[i])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Keeps exactly the first `n` ranks.
    pub fn truncate(&self, n: usize) -> Vocabulary {
        let n = n.min(self.len());
        Vocabulary {
            terms: self.terms[..n].to_vec(),
            counts: self.counts[..n].to_vec(),
            index: self.terms[..n]
                .iter()
                .enumerate()
                .map(|(i, t)| (t.clone(), i))
                .collect(),
        }
    }

    /// Writes `rank,term,count` CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["rank", "term", "count"])?;
        for (i, (t, c)) in self.terms.iter().zip(&self.counts).enumerate() {
            out.write_record([(i + 1).to_string(), t.clone(), c.to_string()])?;
        }
        out.flush().map_err(|e| Error::io("<vocabulary csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vocabulary> {
        let mut reader = csv::Reader::from_reader(r);
        let mut pairs = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let count = rec
                .get(2)
                .and_then(|c| c.parse::<u64>().ok())
                .ok_or_else(|| Error::InvalidRow {
                    row: i + 2,
                    message: "bad count".into(),
                })?;
            pairs.push((rec.get(1).unwrap_or("").to_string(), count));
        }
        Ok(Vocabulary::from_counts(pairs))
    }
}

/// Aggregates global term counts (with multiplicity) and ranks them.
/// Terms seen fewer than `min_count` times are dropped.
pub fn build_vocabulary(docs: &[TermList], min_count: u64) -> Result<Vocabulary> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for d in docs {
        for t in &d.terms {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    if counts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let vocab = Vocabulary::from_counts(
        counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count)
            .map(|(t, c)| (t.to_string(), c)),
    );
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary { min_count });
    }
    Ok(vocab)
}

/// Term counts of one author, summed over that author's documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub author_id: String,
    pub term_counts: BTreeMap<String, u64>,
}

impl AuthorProfile {
    pub fn total(&self) -> u64 {
        self.term_counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.term_counts.is_empty()
    }

    /// Drops terms absent from `vocab`.
    pub fn restrict_to(&self, vocab: &Vocabulary) -> AuthorProfile {
        AuthorProfile {
            author_id: self.author_id.clone(),
            term_counts: self
                .term_counts
                .iter()
                .filter(|(t, _)| vocab.rank(t).is_some())
                .map(|(t, &c)| (t.clone(), c))
                .collect(),
        }
    }
}

/// Per-author term counts, in the corpus author order. `docs[i]` must be the
/// term list of `corpus.records[i]`. A document shared by two authors appears
/// as one record per author and so counts towards both. Terms missing from
/// `vocab` are skipped; authors left with no terms get an empty profile and a
/// warning.
pub fn author_profiles(
    corpus: &Corpus,
    docs: &[TermList],
    vocab: &Vocabulary,
) -> Result<Vec<AuthorProfile>> {
    if docs.len() != corpus.records.len() {
        return Err(Error::LengthMismatch {
            left: corpus.records.len(),
            right: docs.len(),
        });
    }
    let slot: HashMap<&str, usize> = corpus
        .authors
        .iter()
        .enumerate()
        .map(|(i, a)| (a.author_id.as_str(), i))
        .collect();
    let mut profiles: Vec<AuthorProfile> = corpus
        .authors
        .iter()
        .map(|a| AuthorProfile {
            author_id: a.author_id.clone(),
            term_counts: BTreeMap::new(),
        })
        .collect();
    for (record, doc) in corpus.records.iter().zip(docs) {
        let p = &mut profiles[slot[record.author_id.as_str()]];
        for t in doc.terms.iter().filter(|t| vocab.rank(t).is_some()) {
            *p.term_counts.entry(t.clone()).or_default() += 1;
        }
    }
    for p in profiles.iter().filter(|p| p.is_empty()) {
        log::warn!("author `{}` has no retained terms", p.author_id);
    }
    Ok(profiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AuthorQuery, PublicationRecord};
    use chrono::Utc;
    use proptest::prelude::*;

    fn docs(lists: &[&[&str]]) -> Vec<TermList> {
        lists
            .iter()
            .enumerate()
            .map(|(i, l)| TermList {
                doc_index: i,
                terms: l.iter().map(|s| s.to_string()).collect(),
            })
            .collect()
    }

    #[test]
    fn counts_and_lexicographic_ties() {
        let v = build_vocabulary(&docs(&[&["a", "b", "a"], &["b", "c"]]), 1).unwrap();
        assert_eq!(v.terms(), ["a", "b", "c"]);
        assert_eq!(v.counts(), [2, 2, 1]);
        assert_eq!(v.rank("b"), Some(2));
        assert_eq!(v.term(3), Some("c"));
        assert_eq!(v.term(0), None);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(build_vocabulary(&docs(&[&[], &[]]), 1), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn min_count_boundary() {
        assert!(matches!(
            build_vocabulary(&docs(&[&["x"]]), 2),
            Err(Error::EmptyVocabulary { min_count: 2 })
        ));
    }

    #[test]
    fn truncation_keeps_prefix() {
        let v = build_vocabulary(&docs(&[&["a", "a", "a", "b", "b", "c"]]), 1).unwrap();
        let t = v.truncate(2);
        assert_eq!(t.terms(), ["a", "b"]);
        assert_eq!(t.rank("c"), None);
        assert_eq!(v.truncate(10).len(), 3);
    }

    #[test]
    fn csv_round_trip() {
        let v = build_vocabulary(&docs(&[&["a", "b", "a"], &["b", "c"]]), 1).unwrap();
        let mut buf = Vec::new();
        v.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("rank,term,count\n1,a,2\n"));
        assert_eq!(Vocabulary::read_csv(buf.as_slice()).unwrap(), v);
    }

    fn corpus(records: &[(&str, &str)], authors: &[&str]) -> Corpus {
        Corpus::new(
            authors
                .iter()
                .map(|a| AuthorQuery {
                    author_id: a.to_string(),
                    display_name: a.to_string(),
                    query: a.to_string(),
                })
                .collect(),
            records
                .iter()
                .map(|(id, a)| PublicationRecord {
                    record_id: id.to_string(),
                    title: String::new(),
                    abstract_text: String::new(),
                    keywords: vec![],
                    authors: vec![],
                    author_id: a.to_string(),
                })
                .collect(),
            Utc::now(),
        )
        .unwrap()
    }

    #[test]
    fn single_author_profile() {
        let d = docs(&[&["a", "a", "b"]]);
        let v = build_vocabulary(&d, 1).unwrap();
        let p = author_profiles(&corpus(&[("1", "x")], &["x"]), &d, &v).unwrap();
        assert_eq!(p[0].term_counts, BTreeMap::from([("a".into(), 2), ("b".into(), 1)]));
    }

    #[test]
    fn shared_document_counts_for_both() {
        let d = docs(&[&["a", "b"], &["a", "b"]]);
        let v = build_vocabulary(&d, 1).unwrap();
        let p = author_profiles(&corpus(&[("7", "x"), ("7", "y")], &["x", "y"]), &d, &v).unwrap();
        assert_eq!(p[0].term_counts, p[1].term_counts);
        assert_eq!(p[0].total(), 2);
    }

    #[test]
    fn author_without_terms_gets_empty_profile() {
        let d = docs(&[&["a"], &[]]);
        let v = build_vocabulary(&d, 1).unwrap();
        let p = author_profiles(&corpus(&[("1", "x"), ("2", "y")], &["x", "y"]), &d, &v).unwrap();
        assert!(p[1].is_empty());
    }

    proptest! {
        #[test]
        fn ranks_are_non_increasing(lists in prop::collection::vec(prop::collection::vec("[a-e]{1,2}", 0..8), 1..6)) {
            let d: Vec<TermList> = lists.into_iter().enumerate().map(|(i, terms)| TermList { doc_index: i, terms }).collect();
            if let Ok(v) = build_vocabulary(&d, 1) {
                prop_assert!(v.counts().windows(2).all(|w| w[0] >= w[1]));
            }
        }

        #[test]
        fn single_author_docs_partition_global_counts(lists in prop::collection::vec(prop::collection::vec("[a-d]", 1..6), 1..8)) {
            let d: Vec<TermList> = lists.into_iter().enumerate().map(|(i, terms)| TermList { doc_index: i, terms }).collect();
            let ids: Vec<String> = (0..d.len()).map(|i| i.to_string()).collect();
            let recs: Vec<(&str, &str)> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), if i % 2 == 0 { "x" } else { "y" })).collect();
            let c = corpus(&recs, &["x", "y"]);
            let v = build_vocabulary(&d, 1).unwrap();
            let p = author_profiles(&c, &d, &v).unwrap();
            for (t, &n) in v.terms().iter().zip(v.counts()) {
                let sum: u64 = p.iter().map(|p| p.term_counts.get(t).copied().unwrap_or(0)).sum();
                prop_assert_eq!(sum, n);
            }
        }
    }
}
