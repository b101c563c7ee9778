//! Author queries, publication records and the on-disk corpus format.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Corpus schema version written by [`persist_corpus`].
pub const CORPUS_SCHEMA_VERSION: u64 = 1;

/// Column names of the query file header, in order.
pub const QUERY_COLUMNS: [&str; 3] = ["author_id", "display_name", "query"];

/// One researcher and the verbatim search expression that retrieves their work.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorQuery {
    pub author_id: String,
    pub display_name: String,
    pub query: String,
}

/// One retrieved publication. An empty abstract is legal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub record_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub keywords: Vec<String>,
    pub authors: Vec<String>,
    pub author_id: String,
}

impl PublicationRecord {
    /// Title, abstract and keywords joined into one text for tokenization.
    pub fn text(&self) -> String {
        let mut parts = Vec::with_capacity(2 + self.keywords.len());
        parts.push(self.title.as_str());
        parts.push(self.abstract_text.as_str());
        parts.extend(self.keywords.iter().map(String::as_str));
        parts.join(" ")
    }
}

/// The document collection: every record is one document, owned by one author.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub records: Vec<PublicationRecord>,
    pub authors: Vec<AuthorQuery>,
    pub retrieved_at: DateTime<Utc>,
}

impl Corpus {
    /// Builds a corpus, checking that every record belongs to a listed author.
    pub fn new(
        authors: Vec<AuthorQuery>,
        records: Vec<PublicationRecord>,
        retrieved_at: DateTime<Utc>,
    ) -> Result<Self> {
        let corpus = Corpus {
            records,
            authors,
            retrieved_at,
        };
        corpus.validate()?;
        Ok(corpus)
    }

    fn validate(&self) -> Result<()> {
        let known: HashSet<&str> = self.authors.iter().map(|a| a.author_id.as_str()).collect();
        for r in &self.records {
            if !known.contains(r.author_id.as_str()) {
                return Err(Error::UnknownAuthor {
                    record_id: r.record_id.clone(),
                    author_id: r.author_id.clone(),
                });
            }
            if r.record_id.is_empty() {
                return Err(Error::InvalidRow {
                    row: 0,
                    message: format!("record of author `{}` has an empty record_id", r.author_id),
                });
            }
        }
        Ok(())
    }

    /// Number of records with an empty abstract.
    pub fn empty_abstracts(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.abstract_text.trim().is_empty())
            .count()
    }
}

#[derive(Serialize, Deserialize)]
struct CorpusFile {
    version: u64,
    retrieved_at: DateTime<Utc>,
    authors: Vec<AuthorQuery>,
    records: Vec<PublicationRecord>,
}

/// Reads a query file with header `author_id,display_name,query`.
pub fn parse_query_file(path: impl AsRef<Path>) -> Result<Vec<AuthorQuery>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_queries(&text)
}

/// Parses query-file contents; see [`parse_query_file`].
pub fn parse_queries(text: &str) -> Result<Vec<AuthorQuery>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::Headers)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let mut columns = [0usize; 3];
    for (slot, name) in columns.iter_mut().zip(QUERY_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_string(),
            })?;
    }

    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // header is row 1
        let row = i + 2;
        let record = record?;
        let field = |c: usize| record.get(c).unwrap_or("").to_string();
        let q = AuthorQuery {
            author_id: field(columns[0]).trim().to_string(),
            display_name: field(columns[1]).trim().to_string(),
            query: field(columns[2]),
        };
        if q.author_id.is_empty() {
            return Err(Error::InvalidRow {
                row,
                message: "empty author_id".into(),
            });
        }
        if q.query.trim().is_empty() {
            return Err(Error::InvalidRow {
                row,
                message: format!("empty query for `{}`", q.author_id),
            });
        }
        if let Some(&first_row) = seen.get(&q.author_id) {
            return Err(Error::DuplicateAuthor {
                author_id: q.author_id,
                first_row,
                second_row: row,
            });
        }
        seen.insert(q.author_id.clone(), row);
        out.push(q);
    }
    Ok(out)
}

/// Serializes a corpus to JSON.
pub fn corpus_to_json(corpus: &Corpus) -> String {
    let file = CorpusFile {
        version: CORPUS_SCHEMA_VERSION,
        retrieved_at: corpus.retrieved_at,
        authors: corpus.authors.clone(),
        records: corpus.records.clone(),
    };
    serde_json::to_string_pretty(&file).expect("corpus serializes")
}

/// Parses corpus JSON, reporting syntax errors with a byte offset.
pub fn corpus_from_json(text: &str) -> Result<Corpus> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::CorpusParse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let version = value
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::CorpusParse {
            offset: 0,
            message: "missing or non-integer `version`".into(),
        })?;
    if version != CORPUS_SCHEMA_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let file: CorpusFile = serde_json::from_value(value).map_err(|e| Error::CorpusParse {
        offset: 0,
        message: e.to_string(),
    })?;
    Corpus::new(file.authors, file.records, file.retrieved_at)
}

pub fn persist_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, corpus_to_json(corpus)).map_err(|e| Error::io(path, e))
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    corpus_from_json(&text)
}

// serde_json reports 1-based line and byte column.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}
