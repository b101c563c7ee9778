use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lemma::lemmatize;
use crate::corpus::PublicationRecord;
use crate::error::{Error, Result};

const DEFAULT_EXCLUSIONS: &str = include_str!("default_exclusions.txt");

/// The filtered, lemmatized terms of one document. Duplicates are kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermList {
    pub doc_index: usize,
    pub terms: Vec<String>,
}

/// Parses an exclusion list: one term per line, `#` starts a comment.
pub fn parse_exclusions(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// The shipped default exclusion list.
pub fn default_exclusions() -> HashSet<String> {
    parse_exclusions(DEFAULT_EXCLUSIONS)
}

pub fn load_exclusions(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_exclusions(&text))
}

/// Matches `^[+-]?[0-9]+([.][0-9]+)?$` and bare decimals such as `.5`.
pub fn is_numeric(token: &str) -> bool {
    let body = token
        .strip_prefix(['+', '-'])
        .unwrap_or(token);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    match frac {
        None => digits(int),
        Some(f) => (int.is_empty() || digits(int)) && digits(f),
    }
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '-' | '+' | '.' | '\u{2212}')
}

fn is_edge_punct(c: char) -> bool {
    matches!(c, '-' | '+' | '.')
}

/// Splits text into raw tokens, keeping internal hyphens (`hiv-1`) and the
/// sign and decimal point of numbers so the numeric filter can see them.
pub fn split_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !is_token_char(c))
        .filter(|t| !t.is_empty())
        .filter_map(|raw| {
            let t: String = raw.chars().map(|c| if c == '\u{2212}' { '-' } else { c }).collect();
            if is_numeric(&t) {
                return Some(t);
            }
            let trimmed = t.trim_matches(is_edge_punct);
            (!trimmed.is_empty()).then(|| trimmed.to_string())
        })
        .collect()
}

type KeepFn = dyn Fn(&str) -> bool + Send + Sync;

/// Tokenize + lower-case + lemmatize + filter.
#[derive(Clone)]
pub struct Tokenizer {
    exclusions: HashSet<String>,
    keep: Option<Arc<KeepFn>>,
}

impl std::fmt::Debug for Tokenizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tokenizer")
            .field("exclusions", &self.exclusions.len())
            .field("keep", &self.keep.is_some())
            .finish()
    }
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::new(default_exclusions())
    }
}

impl Tokenizer {
    pub fn new(exclusions: HashSet<String>) -> Self {
        Tokenizer {
            exclusions,
            keep: None,
        }
    }

    /// Installs a user predicate; terms for which it returns `false` are dropped.
    pub fn with_keep<F>(mut self, keep: F) -> Self
    where
        F: Fn(&str) -> bool + Send + Sync + 'static,
    {
        self.keep = Some(Arc::new(keep));
        self
    }

    pub fn exclusions(&self) -> &HashSet<String> {
        &self.exclusions
    }

    fn accept(&self, raw: &str, lemma: &str) -> bool {
        !is_numeric(lemma)
            && lemma.chars().count() > 1
            && !self.exclusions.contains(raw)
            && !self.exclusions.contains(lemma)
            && self.keep.as_ref().map_or(true, |k| k(lemma))
    }

    pub fn terms(&self, text: &str) -> Vec<String> {
        split_tokens(text)
            .into_iter()
            .filter_map(|t| {
                let lower = t.to_lowercase();
                let lemma = settle(&lower);
                self.accept(&lower, &lemma).then_some(lemma)
            })
            .collect()
    }

    pub fn tokenize(&self, doc_index: usize, record: &PublicationRecord) -> TermList {
        TermList {
            doc_index,
            terms: self.terms(&record.text()),
        }
    }

    /// Tokenizes every record in parallel; `doc_index` is the record position.
    pub fn tokenize_all(&self, records: &[PublicationRecord]) -> Vec<TermList> {
        records
            .par_iter()
            .enumerate()
            .map(|(i, r)| self.tokenize(i, r))
            .collect()
    }
}

/// Lemmatizes, re-trimming edge punctuation exposed by suffix removal
/// (`aa-s` -> `aa-` -> `aa`) until the form is stable.
fn settle(token: &str) -> String {
    let mut cur = lemmatize(token);
    loop {
        let trimmed = cur.trim_matches(is_edge_punct);
        if trimmed.len() == cur.len() || trimmed.is_empty() {
            return cur;
        }
        cur = lemmatize(trimmed);
    }
}

/// Convenience wrapper around [`Tokenizer`] with a fixed exclusion set.
pub fn tokenize_and_filter(
    doc_index: usize,
    record: &PublicationRecord,
    exclusions: &HashSet<String>,
) -> TermList {
    Tokenizer::new(exclusions.clone()).tokenize(doc_index, record)
}
