use std::sync::Arc;
use std::time::Duration;

use atlas_core::corpus::{AuthorQuery, Corpus, PublicationRecord};
use chrono::{DateTime, Utc};
use roxmltree::{Document, Node};

use crate::clock::{Clock, SystemClock};
use crate::error::{BiblioError, Result};
use crate::http::{HttpGet, HttpResponse, UreqHttp};
use crate::rate::RateLimiter;

pub const DEFAULT_BASE_URL: &str = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/";
/// Environment variable consulted for the API key.
pub const API_KEY_ENV: &str = "NCBI_API_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct ClientConfig {
    pub base_url: String,
    pub database: String,
    pub api_key: Option<String>,
    /// Requests per second; `None` picks 3 without a key and 10 with one.
    pub rate: Option<usize>,
    pub page_size: usize,
    /// Extra attempts after the first failure.
    pub retries: u32,
    pub backoff_base: Duration,
    pub backoff_max: Duration,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            base_url: DEFAULT_BASE_URL.to_string(),
            database: "pubmed".to_string(),
            api_key: None,
            rate: None,
            page_size: 100,
            retries: 4,
            backoff_base: Duration::from_millis(500),
            backoff_max: Duration::from_secs(30),
        }
    }
}

impl ClientConfig {
    /// Default configuration with the API key taken from the environment.
    pub fn from_env() -> Self {
        ClientConfig {
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            ..Default::default()
        }
    }

    pub fn effective_rate(&self) -> usize {
        self.rate.unwrap_or(if self.api_key.is_some() { 10 } else { 3 })
    }

    fn endpoint(&self, name: &str) -> String {
        format!("{}/{name}.fcgi", self.base_url.trim_end_matches('/'))
    }
}

/// Search-then-fetch client for E-utilities style endpoints.
pub struct EutilsClient {
    config: ClientConfig,
    http: Arc<dyn HttpGet>,
    clock: Arc<dyn Clock>,
    limiter: RateLimiter,
}

impl EutilsClient {
    pub fn new(config: ClientConfig, http: Arc<dyn HttpGet>, clock: Arc<dyn Clock>) -> Self {
        let limiter = RateLimiter::new(config.effective_rate(), clock.clone());
        EutilsClient {
            config,
            http,
            clock,
            limiter,
        }
    }

    /// Live client over HTTPS with the wall clock.
    pub fn live(config: ClientConfig) -> Self {
        Self::new(config, Arc::new(UreqHttp::default()), Arc::new(SystemClock::default()))
    }

    pub fn config(&self) -> &ClientConfig {
        &self.config
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt.min(20));
        self.config.backoff_base.saturating_mul(factor).min(self.config.backoff_max)
    }

    /// GET with rate limiting; retries transport failures, 429 and 5xx.
    fn request(&self, q: &AuthorQuery, endpoint: &str, params: &[(&str, &str)]) -> Result<String> {
        let mut all: Vec<(&str, &str)> = params.to_vec();
        if let Some(key) = &self.config.api_key {
            all.push(("api_key", key));
        }
        let url = self.config.endpoint(endpoint);
        let mut last_status = None;
        let mut last_message = String::new();
        let attempts = self.config.retries + 1;
        for attempt in 0..attempts {
            if attempt > 0 {
                self.clock.sleep(self.backoff(attempt - 1));
            }
            self.limiter.acquire();
            match self.http.get(&url, &all) {
                Ok(HttpResponse { status, body }) if (200..300).contains(&status) => return Ok(body),
                Ok(HttpResponse { status, body }) => {
                    last_status = Some(status);
                    last_message = body.chars().take(200).collect();
                    let transient = status == 429 || status >= 500;
                    if !transient {
                        return Err(BiblioError::Fetch {
                            query: q.query.clone(),
                            status: last_status,
                            attempts: attempt + 1,
                            message: last_message,
                        });
                    }
                    log::warn!("{endpoint} returned {status} for `{}`; retrying", q.author_id);
                }
                Err(e) => {
                    log::warn!("{endpoint} failed for `{}`: {e}; retrying", q.author_id);
                    last_message = e;
                }
            }
        }
        Err(BiblioError::Fetch {
            query: q.query.clone(),
            status: last_status,
            attempts,
            message: last_message,
        })
    }

    /// All records matching the author's query, tagged with the author id.
    pub fn fetch_author_records(&self, q: &AuthorQuery) -> Result<Vec<PublicationRecord>> {
        let page = self.config.page_size.max(1).to_string();
        let mut records = Vec::new();
        let mut start = 0usize;
        loop {
            let retstart = start.to_string();
            let body = self.request(
                q,
                "esearch",
                &[
                    ("db", &self.config.database),
                    ("term", &q.query),
                    ("retstart", &retstart),
                    ("retmax", &page),
                ],
            )?;
            let search = parse_search(&body).map_err(|message| BiblioError::Response {
                query: q.query.clone(),
                message,
            })?;
            if search.ids.is_empty() {
                break;
            }
            let ids = search.ids.join(",");
            let body = self.request(
                q,
                "efetch",
                &[("db", &self.config.database), ("id", &ids), ("retmode", "xml")],
            )?;
            let fetched = parse_articles(&body, &q.author_id).map_err(|message| BiblioError::Response {
                query: q.query.clone(),
                message,
            })?;
            records.extend(fetched);
            start += search.ids.len();
            if start >= search.count {
                break;
            }
        }
        if records.is_empty() {
            log::warn!("query for `{}` matched no records", q.author_id);
        }
        Ok(records)
    }

    /// Fetches every author in order and assembles a corpus.
    pub fn fetch_corpus(&self, queries: &[AuthorQuery], retrieved_at: DateTime<Utc>) -> Result<Corpus> {
        let mut records = Vec::new();
        for q in queries {
            let got = self.fetch_author_records(q)?;
            log::info!("{}: {} records", q.author_id, got.len());
            records.extend(got);
        }
        Ok(Corpus::new(queries.to_vec(), records, retrieved_at)?)
    }
}

/// One page of search results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchPage {
    pub count: usize,
    pub ids: Vec<String>,
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name(name))
}

fn text_of(node: Node<'_, '_>) -> String {
    let mut out = String::new();
    for d in node.descendants().filter(|d| d.is_text()) {
        out.push_str(d.text().unwrap_or(""));
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses an `eSearchResult` document.
pub fn parse_search(xml: &str) -> std::result::Result<SearchPage, String> {
    let doc = Document::parse(xml).map_err(|e| e.to_string())?;
    let root = doc.root_element();
    if let Some(err) = child(root, "ERROR") {
        return Err(text_of(err));
    }
    let count = child(root, "Count")
        .map(text_of)
        .ok_or("missing Count")?
        .parse()
        .map_err(|e| format!("bad Count: {e}"))?;
    let ids = child(root, "IdList")
        .map(|l| l.children().filter(|n| n.has_tag_name("Id")).map(text_of).collect())
        .unwrap_or_default();
    Ok(SearchPage { count, ids })
}

/// Parses a `PubmedArticleSet` document into records owned by `author_id`.
pub fn parse_articles(xml: &str, author_id: &str) -> std::result::Result<Vec<PublicationRecord>, String> {
    let doc = Document::parse(xml).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for art in doc.descendants().filter(|n| n.has_tag_name("PubmedArticle")) {
        let citation = child(art, "MedlineCitation").ok_or("article without MedlineCitation")?;
        let record_id = child(citation, "PMID").map(text_of).unwrap_or_default();
        if record_id.is_empty() {
            return Err("article without PMID".into());
        }
        let article = child(citation, "Article");
        let title = article.and_then(|a| child(a, "ArticleTitle")).map(text_of).unwrap_or_default();
        let abstract_text = article
            .and_then(|a| child(a, "Abstract"))
            .map(|abs| {
                abs.children()
                    .filter(|n| n.has_tag_name("AbstractText"))
                    .map(text_of)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .unwrap_or_default();
        let authors = article
            .and_then(|a| child(a, "AuthorList"))
            .map(|list| {
                list.children()
                    .filter(|n| n.has_tag_name("Author"))
                    .filter_map(|au| {
                        if let Some(c) = child(au, "CollectiveName") {
                            return Some(text_of(c));
                        }
                        let last = child(au, "LastName").map(text_of)?;
                        match child(au, "Initials").map(text_of) {
                            Some(i) if !i.is_empty() => Some(format!("{last} {i}")),
                            _ => Some(last),
                        }
                    })
                    .collect()
            })
            .unwrap_or_default();
        let keywords = citation
            .descendants()
            .filter(|n| n.has_tag_name("Keyword"))
            .map(text_of)
            .filter(|k| !k.is_empty())
            .collect();
        out.push(PublicationRecord {
            record_id,
            title,
            abstract_text,
            keywords,
            authors,
            author_id: author_id.to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn search_page() {
        let xml = "<eSearchResult><Count>237</Count><RetMax>2</RetMax>\
                   <IdList><Id>11</Id><Id>12</Id></IdList></eSearchResult>";
        let p = parse_search(xml).unwrap();
        assert_eq!(p.count, 237);
        assert_eq!(p.ids, ["11", "12"]);
        assert!(parse_search("<eSearchResult><ERROR>bad term</ERROR></eSearchResult>").is_err());
    }

    #[test]
    fn article_fields() {
        let xml = r#"<PubmedArticleSet><PubmedArticle><MedlineCitation>
            <PMID Version="1">123</PMID>
            <Article><ArticleTitle>HIV-1 <i>env</i> evolution</ArticleTitle>
              <Abstract><AbstractText Label="A">First ±.</AbstractText><AbstractText>Second.</AbstractText></Abstract>
              <AuthorList><Author><LastName>Poon</LastName><Initials>AF</Initials></Author>
                <Author><CollectiveName>Study Group</CollectiveName></Author></AuthorList>
            </Article>
            <KeywordList><Keyword>phylogenetics</Keyword></KeywordList>
          </MedlineCitation></PubmedArticle></PubmedArticleSet>"#;
        let r = &parse_articles(xml, "ap").unwrap()[0];
        assert_eq!(r.record_id, "123");
        assert_eq!(r.title, "HIV-1 env evolution");
        assert_eq!(r.abstract_text, "First ±. Second.");
        assert_eq!(r.authors, ["Poon AF", "Study Group"]);
        assert_eq!(r.keywords, ["phylogenetics"]);
        assert_eq!(r.author_id, "ap");
    }

    #[test]
    fn missing_abstract_is_empty() {
        let xml = "<PubmedArticleSet><PubmedArticle><MedlineCitation><PMID>9</PMID>\
                   <Article><ArticleTitle>T</ArticleTitle></Article></MedlineCitation></PubmedArticle></PubmedArticleSet>";
        assert_eq!(parse_articles(xml, "x").unwrap()[0].abstract_text, "");
    }

    #[test]
    fn default_rate_depends_on_key() {
        let mut c = ClientConfig::default();
        assert_eq!(c.effective_rate(), 3);
        c.api_key = Some("k".into());
        assert_eq!(c.effective_rate(), 10);
        c.rate = Some(1);
        assert_eq!(c.effective_rate(), 1);
    }
}
