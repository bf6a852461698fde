//! Affiliation profiles of communities and their k-means typology.
//!
//! Each retained community is described by how many of its top members fall
//! into each of eight affiliation categories. Those count vectors are
//! clustered with k-means, and each cluster ("type") is named after the
//! category that dominates its summed profile.

mod kmeans;

pub use kmeans::{kmeans, wcss, KMeansOptions, KMeansResult};

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{expect_header, normalize_name, row_line};

pub const CATEGORY_COUNT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffiliationCategory {
    Business,
    Politics,
    LawEnforcement,
    Banking,
    Government,
    Criminal,
    Press,
    Other,
}

impl AffiliationCategory {
    /// Profile vector order.
    pub const ALL: [AffiliationCategory; CATEGORY_COUNT] = [
        AffiliationCategory::Business,
        AffiliationCategory::Politics,
        AffiliationCategory::LawEnforcement,
        AffiliationCategory::Banking,
        AffiliationCategory::Government,
        AffiliationCategory::Criminal,
        AffiliationCategory::Press,
        AffiliationCategory::Other,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AffiliationCategory::Business => "business",
            AffiliationCategory::Politics => "politics",
            AffiliationCategory::LawEnforcement => "law_enforcement",
            AffiliationCategory::Banking => "banking",
            AffiliationCategory::Government => "government",
            AffiliationCategory::Criminal => "criminal",
            AffiliationCategory::Press => "press",
            AffiliationCategory::Other => "other",
        }
    }
}

impl fmt::Display for AffiliationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AffiliationCategory {
    type Err = Error;

    /// Case-insensitive; spaces and hyphens count as underscores.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .map(|c| match c {
                ' ' | '-' => '_',
                c => c.to_ascii_lowercase(),
            })
            .collect();
        AffiliationCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == key)
            .ok_or_else(|| Error::UnknownCategory(s.to_owned()))
    }
}

/// Person → single most notable affiliation. Supplied by hand, never
/// inferred.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AffiliationTable {
    map: BTreeMap<String, AffiliationCategory>,
}

impl AffiliationTable {
    pub fn new<I, S>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, AffiliationCategory)>,
        S: AsRef<str>,
    {
        let mut map: BTreeMap<String, AffiliationCategory> = BTreeMap::new();
        for (name, cat) in rows {
            let name = normalize_name(name.as_ref());
            if name.is_empty() {
                return Err(Error::EmptyName);
            }
            match map.get(&name) {
                Some(&prev) if prev != cat => {
                    return Err(Error::ConflictingAffiliation {
                        name,
                        first: prev.to_string(),
                        second: cat.to_string(),
                    })
                }
                _ => {
                    map.insert(name, cat);
                }
            }
        }
        Ok(AffiliationTable { map })
    }

    /// Reads CSV with header `name,category`.
    pub fn from_csv(input: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        expect_header(&mut rdr, &["name", "category"])?;
        let mut rows = Vec::new();
        for row in rdr.records() {
            let row = row?;
            if row.len() != 2 {
                return Err(Error::Parse {
                    line: row_line(&row),
                    message: format!("expected 2 fields, found {}", row.len()),
                });
            }
            let cat = row[1].parse().map_err(|e: Error| Error::Parse {
                line: row_line(&row),
                message: e.to_string(),
            })?;
            rows.push((row[0].to_owned(), cat));
        }
        AffiliationTable::new(rows)
    }

    pub fn get(&self, name: &str) -> Option<AffiliationCategory> {
        self.map.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityProfile {
    pub community: usize,
    /// Member counts in [`AffiliationCategory::ALL`] order.
    pub counts: [u32; CATEGORY_COUNT],
    /// Top members missing from the affiliation table.
    pub unlabeled: Vec<String>,
}

impl CommunityProfile {
    pub fn point(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| f64::from(c)).collect()
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// Counts the affiliations of each community's top members.
pub fn build_profiles(top_members: &[(usize, Vec<String>)], table: &AffiliationTable) -> Result<Vec<CommunityProfile>> {
    if table.is_empty() {
        return Err(Error::EmptyAffiliations);
    }
    Ok(top_members
        .iter()
        .map(|(community, names)| {
            let mut counts = [0u32; CATEGORY_COUNT];
            let mut unlabeled = Vec::new();
            for name in names {
                match table.get(name) {
                    Some(c) => counts[c.index()] += 1,
                    None => unlabeled.push(name.clone()),
                }
            }
            if !unlabeled.is_empty() {
                log::warn!(
                    "community {community}: {} top member(s) have no affiliation: {}",
                    unlabeled.len(),
                    unlabeled.join("; ")
                );
            }
            CommunityProfile {
                community: *community,
                counts,
                unlabeled,
            }
        })
        .collect())
}

/// Raw k-means cluster of each profile, in profile order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeAssignment {
    pub communities: Vec<usize>,
    pub clusters: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub objective: f64,
}

pub fn assign_types(profiles: &[CommunityProfile], opts: &KMeansOptions) -> Result<TypeAssignment> {
    let points: Vec<Vec<f64>> = profiles.iter().map(CommunityProfile::point).collect();
    let r = kmeans(&points, opts)?;
    Ok(TypeAssignment {
        communities: profiles.iter().map(|p| p.community).collect(),
        clusters: r.assignments,
        centroids: r.centroids,
        objective: r.objective,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeColumn {
    pub cluster: usize,
    /// Dominant category of the summed profile (enumeration order on ties).
    pub name: AffiliationCategory,
    pub counts: [u32; CATEGORY_COUNT],
    pub communities: usize,
}

/// Category × type count matrix. Column `i` is type `T{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeTable {
    pub columns: Vec<TypeColumn>,
}

impl TypeTable {
    /// 1-based type number of a raw k-means cluster.
    pub fn type_number(&self, cluster: usize) -> Option<usize> {
        self.columns.iter().position(|c| c.cluster == cluster).map(|i| i + 1)
    }

    pub fn cell(&self, category: AffiliationCategory, type_number: usize) -> u32 {
        self.columns[type_number - 1].counts[category.index()]
    }

    pub fn total(&self) -> u64 {
        self.columns
            .iter()
            .flat_map(|c| c.counts.iter())
            .map(|&x| u64::from(x))
            .sum()
    }
}

/// Sums profiles per type. Types are ordered by how many members their
/// dominant category holds, descending; then by community count and
/// cluster index.
pub fn type_table(assignment: &TypeAssignment, profiles: &[CommunityProfile]) -> TypeTable {
    let k = assignment.centroids.len();
    let mut columns: Vec<TypeColumn> = (0..k)
        .map(|cluster| TypeColumn {
            cluster,
            name: AffiliationCategory::Business,
            counts: [0; CATEGORY_COUNT],
            communities: 0,
        })
        .collect();
    let by_community: BTreeMap<usize, &CommunityProfile> = profiles.iter().map(|p| (p.community, p)).collect();
    for (community, &cluster) in assignment.communities.iter().zip(&assignment.clusters) {
        let col = &mut columns[cluster];
        col.communities += 1;
        if let Some(p) = by_community.get(community) {
            for (acc, x) in col.counts.iter_mut().zip(p.counts) {
                *acc += x;
            }
        }
    }
    for col in &mut columns {
        let mut best = 0;
        for i in 1..CATEGORY_COUNT {
            if col.counts[i] > col.counts[best] {
                best = i;
            }
        }
        col.name = AffiliationCategory::ALL[best];
    }
    columns.sort_by(|a, b| {
        b.counts[b.name.index()]
            .cmp(&a.counts[a.name.index()])
            .then(b.communities.cmp(&a.communities))
            .then(a.cluster.cmp(&b.cluster))
    });
    TypeTable { columns }
}
