//! Article co-mention records, alias resolution and clique expansion.
//!
//! Articles arrive as JSON lines:
//!
//! ```text
//! {"id":"a1","title":"...","date":"2016-03-01","persons":["Meshalkin V.","Patrushev Jr."]}
//! ```
//!
//! `title` and `date` are optional metadata. Every pair of persons named in
//! one article becomes an (unweighted) edge.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::{BufRead, Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::graph::{BuildStats, Graph};

/// NFC, then collapse every whitespace run to a single space and trim.
pub fn normalize_name(raw: &str) -> String {
    let nfc: String = raw.nfc().collect();
    let mut out = String::with_capacity(nfc.len());
    for word in nfc.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    pub persons: Vec<String>,
}

impl ArticleRecord {
    /// Normalizes person names, drops empty ones and removes repeats while
    /// keeping first-mention order.
    pub fn new(id: impl Into<String>, persons: impl IntoIterator<Item = impl AsRef<str>>) -> Self {
        let mut rec = ArticleRecord {
            id: id.into(),
            title: None,
            date: None,
            persons: persons.into_iter().map(|p| p.as_ref().to_owned()).collect(),
        };
        rec.normalize_persons();
        rec
    }

    fn normalize_persons(&mut self) {
        let mut seen = HashSet::with_capacity(self.persons.len());
        let persons = std::mem::take(&mut self.persons);
        self.persons = persons
            .into_iter()
            .map(|p| normalize_name(&p))
            .filter(|p| !p.is_empty() && seen.insert(p.clone()))
            .collect();
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedArticles {
    pub records: Vec<ArticleRecord>,
    /// 1-based line numbers of records skipped for naming no person.
    pub skipped_lines: Vec<usize>,
}

/// Parses line-delimited JSON article records. Blank lines are ignored.
pub fn parse_articles(input: impl BufRead) -> Result<ParsedArticles> {
    let mut out = ParsedArticles::default();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut rec: ArticleRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if rec.id.trim().is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "record id is empty".into(),
            });
        }
        rec.normalize_persons();
        if rec.persons.is_empty() {
            log::warn!("line {line_no}: article {:?} names no person; skipped", rec.id);
            out.skipped_lines.push(line_no);
            continue;
        }
        out.records.push(rec);
    }
    Ok(out)
}

pub fn write_articles(records: &[ArticleRecord], mut out: impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Alias → canonical name. No canonical name may itself be an alias, so
/// resolution is a single lookup and applying the map twice changes nothing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AliasMap {
    map: BTreeMap<String, String>,
}

impl AliasMap {
    pub fn new<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (alias, canonical) in pairs {
            let alias = normalize_name(alias.as_ref());
            let canonical = normalize_name(canonical.as_ref());
            if alias.is_empty() || canonical.is_empty() {
                return Err(Error::EmptyName);
            }
            if alias == canonical {
                continue;
            }
            if let Some(prev) = map.get(&alias) {
                if *prev != canonical {
                    return Err(Error::ConflictingAlias {
                        alias,
                        first: prev.clone(),
                        second: canonical,
                    });
                }
                continue;
            }
            map.insert(alias, canonical);
        }
        if let Some(c) = map.values().find(|c| map.contains_key(*c)) {
            return Err(Error::AliasCycle(c.clone()));
        }
        Ok(AliasMap { map })
    }

    /// Reads a two-column CSV with header `alias,canonical`.
    pub fn from_csv(input: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        expect_header(&mut rdr, &["alias", "canonical"])?;
        let mut pairs = Vec::new();
        for row in rdr.records() {
            let row = row?;
            if row.len() != 2 {
                return Err(Error::Parse {
                    line: row_line(&row),
                    message: format!("expected 2 fields, found {}", row.len()),
                });
            }
            pairs.push((row[0].to_owned(), row[1].to_owned()));
        }
        AliasMap::new(pairs)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_alias(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn resolve<'a>(&'a self, name: &'a str) -> &'a str {
        self.map.get(name).map_or(name, String::as_str)
    }
}

/// Replaces every alias by its canonical form, then re-deduplicates persons.
pub fn apply_aliases(mut records: Vec<ArticleRecord>, aliases: &AliasMap) -> Vec<ArticleRecord> {
    if aliases.is_empty() {
        return records;
    }
    for rec in &mut records {
        for p in &mut rec.persons {
            if let Some(c) = aliases.map.get(p.as_str()) {
                *p = c.clone();
            }
        }
        rec.normalize_persons();
    }
    records
}

/// Every unordered pair of co-mentioned persons, article by article. The
/// output may repeat pairs across articles.
pub fn clique_expand(records: &[ArticleRecord]) -> Vec<(&str, &str)> {
    let total: usize = records
        .iter()
        .map(|r| r.persons.len() * r.persons.len().saturating_sub(1) / 2)
        .sum();
    let mut pairs = Vec::with_capacity(total);
    for rec in records {
        for (i, a) in rec.persons.iter().enumerate() {
            for b in &rec.persons[i + 1..] {
                pairs.push((a.as_str(), b.as_str()));
            }
        }
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records: usize,
    /// Distinct canonical persons named anywhere in the corpus.
    pub persons: usize,
    /// Persons only ever mentioned alone; they never become nodes.
    pub solo_persons: usize,
    /// Co-mention pairs before collapsing (edge multiplicity total).
    pub co_mentions: usize,
    pub nodes: usize,
    pub edges: usize,
    pub self_pairs_dropped: usize,
    pub duplicate_edges_collapsed: usize,
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
}

pub fn ingest_stats(records: &[ArticleRecord], build: &BuildStats, g: &Graph) -> IngestStats {
    let persons: BTreeSet<&str> = records
        .iter()
        .flat_map(|r| r.persons.iter().map(String::as_str))
        .collect();
    let solo_persons = persons.iter().filter(|p| g.node_id(p).is_none()).count();
    let dates = records.iter().filter_map(|r| r.date);
    IngestStats {
        records: records.len(),
        persons: persons.len(),
        solo_persons,
        co_mentions: build.input_pairs,
        nodes: g.node_count(),
        edges: g.edge_count(),
        self_pairs_dropped: build.self_pairs_dropped,
        duplicate_edges_collapsed: build.duplicate_pairs_collapsed,
        first_date: dates.clone().min(),
        last_date: dates.max(),
    }
}

/// Reads an edge-list CSV with header `source,target`.
pub fn read_edge_csv(input: impl Read) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    expect_header(&mut rdr, &["source", "target"])?;
    let mut edges = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if row.len() != 2 {
            return Err(Error::Parse {
                line: row_line(&row),
                message: format!("expected 2 fields, found {}", row.len()),
            });
        }
        edges.push((row[0].to_owned(), row[1].to_owned()));
    }
    Ok(edges)
}

pub fn write_edge_csv<S: AsRef<str>>(edges: &[(S, S)], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target"])?;
    for (a, b) in edges {
        w.write_record([a.as_ref(), b.as_ref()])?;
    }
    w.flush().map_err(|e| Error::io("<edge csv>", e))?;
    Ok(())
}

pub(crate) fn expect_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = rdr.headers()?;
    let found: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    if found != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {:?}, found {:?}", expected.join(","), found.join(",")),
        });
    }
    Ok(())
}

pub(crate) fn row_line(row: &csv::StringRecord) -> usize {
    row.position().map_or(0, |p| p.line() as usize)
}
