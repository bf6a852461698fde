//! Seeded synthetic inputs: planted-partition graphs, a co-mention article
//! corpus with aliases and affiliations, and sparse graphs of a given size.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ingest::{write_articles, ArticleRecord};
use crate::typology::AffiliationCategory;

/// Edge list of a planted-partition graph plus the ground-truth block of
/// every generated node.
#[derive(Debug, Clone)]
pub struct PlantedPartition {
    pub edges: Vec<(String, String)>,
    pub block_of: BTreeMap<String, usize>,
}

impl PlantedPartition {
    /// Ground-truth block for each node of `g`, in node-id order.
    pub fn truth_for(&self, g: &Graph) -> Vec<usize> {
        g.nodes().map(|v| self.block_of[g.name(v)]).collect()
    }
}

/// `blocks` groups of `block_size` nodes; each within-block pair is linked
/// with probability `p_in`, each cross-block pair with `p_out`. Nodes that
/// end up isolated are absent from the edge list.
pub fn planted_partition(blocks: usize, block_size: usize, p_in: f64, p_out: f64, seed: u64) -> PlantedPartition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = blocks * block_size;
    let name = |i: usize| format!("b{}_{}", i / block_size, i % block_size);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = if i / block_size == j / block_size { p_in } else { p_out };
            if rng.gen_bool(p) {
                edges.push((name(i), name(j)));
            }
        }
    }
    PlantedPartition {
        edges,
        block_of: (0..n).map(|i| (name(i), i / block_size)).collect(),
    }
}

/// Exactly `nodes` nodes and `edges` distinct edges. A degree-biased random
/// tree connects everything; the remaining edges mostly stay inside groups
/// of about 100 consecutive nodes.
pub fn sparse_graph_edges(nodes: usize, edges: usize, seed: u64) -> Result<Vec<(String, String)>> {
    if nodes < 2 {
        return Err(Error::TooFewNodes(nodes));
    }
    let max_edges = nodes * (nodes - 1) / 2;
    if edges < nodes - 1 || edges > max_edges {
        return Err(Error::Config(format!(
            "{edges} edges cannot connect {nodes} nodes as a simple graph"
        )));
    }
    const GROUP: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut set: HashSet<(usize, usize)> = HashSet::with_capacity(edges);
    let mut list = Vec::with_capacity(edges);
    // endpoint list: sampling from it is sampling proportional to degree
    let mut ends: Vec<usize> = vec![0];
    for v in 1..nodes {
        let u = ends[rng.gen_range(0..ends.len())];
        set.insert((u.min(v), u.max(v)));
        list.push((u.min(v), u.max(v)));
        ends.push(u);
        ends.push(v);
    }
    while list.len() < edges {
        let u = rng.gen_range(0..nodes);
        let v = if rng.gen_bool(0.8) {
            let lo = u / GROUP * GROUP;
            let hi = (lo + GROUP).min(nodes);
            rng.gen_range(lo..hi)
        } else {
            ends[rng.gen_range(0..ends.len())]
        };
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if set.insert(key) {
            list.push(key);
        }
    }
    Ok(list
        .into_iter()
        .map(|(u, v)| (format!("p{u}"), format!("p{v}")))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusOptions {
    pub articles: usize,
    pub persons: usize,
    pub groups: usize,
    /// Persons that also appear under a second spelling.
    pub aliased: usize,
    pub seed: u64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions {
            articles: 6_000,
            persons: 10_500,
            groups: 40,
            aliased: 25,
            seed: 1,
        }
    }
}

/// A generated article corpus with its alias and affiliation tables.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub articles: Vec<ArticleRecord>,
    /// `(alias, canonical)`.
    pub aliases: Vec<(String, String)>,
    pub affiliations: Vec<(String, AffiliationCategory)>,
    /// Generating group of each canonical person.
    pub group_of: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct CorpusFiles {
    pub articles: PathBuf,
    pub aliases: PathBuf,
    pub affiliations: PathBuf,
}

impl Corpus {
    /// Writes `articles.jsonl`, `aliases.csv` and `affiliations.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<CorpusFiles> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = CorpusFiles {
            articles: dir.join("articles.jsonl"),
            aliases: dir.join("aliases.csv"),
            affiliations: dir.join("affiliations.csv"),
        };
        let create = |p: &Path| {
            std::fs::File::create(p)
                .map(std::io::BufWriter::new)
                .map_err(|e| Error::io(p, e))
        };
        let mut out = create(&files.articles)?;
        write_articles(&self.articles, &mut out).map_err(|e| Error::io(&files.articles, e))?;
        out.flush().map_err(|e| Error::io(&files.articles, e))?;

        let mut w = csv::Writer::from_writer(create(&files.aliases)?);
        w.write_record(["alias", "canonical"])?;
        for (a, c) in &self.aliases {
            w.write_record([a, c])?;
        }
        w.flush().map_err(|e| Error::io(&files.aliases, e))?;

        let mut w = csv::Writer::from_writer(create(&files.affiliations)?);
        w.write_record(["name", "category"])?;
        for (n, c) in &self.affiliations {
            w.write_record([n.as_str(), c.as_str()])?;
        }
        w.flush().map_err(|e| Error::io(&files.affiliations, e))?;
        Ok(files)
    }
}

const THEMES: [AffiliationCategory; 4] = [
    AffiliationCategory::Business,
    AffiliationCategory::Politics,
    AffiliationCategory::Banking,
    AffiliationCategory::LawEnforcement,
];

/// Generates a corpus in which every person is co-mentioned at least once.
///
/// Group sizes decay roughly as `1/(g+1)^0.7`; within a group, mention
/// probability decays with member rank so a few members dominate. About one
/// article in twelve pulls in a member of another group. Each group has a
/// theme category held by 60% of its members.
pub fn article_corpus(opts: &CorpusOptions) -> Result<Corpus> {
    if opts.groups == 0 || opts.persons < 3 * opts.groups {
        return Err(Error::Config("need at least three persons per group".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let weights: Vec<f64> = (0..opts.groups).map(|g| 1.0 / ((g + 1) as f64).powf(0.7)).collect();
    let wsum: f64 = weights.iter().sum();
    let mut sizes: Vec<usize> = weights
        .iter()
        .map(|w| ((w / wsum * opts.persons as f64) as usize).max(3))
        .collect();
    let assigned: usize = sizes.iter().sum();
    sizes[0] = (sizes[0] + opts.persons).saturating_sub(assigned).max(3);

    let members: Vec<Vec<String>> = sizes
        .iter()
        .enumerate()
        .map(|(g, &s)| (0..s).map(|i| format!("Person {g:02}-{i:04}")).collect())
        .collect();
    let popularity: Vec<WeightedIndex<f64>> = sizes
        .iter()
        .map(|&s| WeightedIndex::new((0..s).map(|i| 1.0 / (i + 1) as f64)).unwrap())
        .collect();
    let group_pick = WeightedIndex::new(&sizes).unwrap();

    let mut persons_in: Vec<Vec<String>> = Vec::new();
    // coverage: walk each group in chunks of 2-4 unseen members
    for (g, list) in members.iter().enumerate() {
        let mut i = 0;
        while i < list.len() {
            let take = rng.gen_range(2..=4).min(list.len() - i);
            let mut names: Vec<String> = list[i..i + take].to_vec();
            // tie the chunk to the group's most popular member
            if i > 0 {
                names.push(list[0].clone());
            }
            names.push(list[popularity[g].sample(&mut rng)].clone());
            persons_in.push(names);
            i += take;
        }
    }
    while persons_in.len() < opts.articles {
        let g = group_pick.sample(&mut rng);
        let k = rng.gen_range(2..=5);
        let mut names: Vec<String> = (0..k)
            .map(|_| members[g][popularity[g].sample(&mut rng)].clone())
            .collect();
        if rng.gen_bool(1.0 / 12.0) {
            let h = group_pick.sample(&mut rng);
            names.push(members[h][popularity[h].sample(&mut rng)].clone());
        }
        persons_in.push(names);
    }
    persons_in.shuffle(&mut rng);

    // aliased persons: a deterministic pick of popular members
    let mut canonical_aliased: Vec<String> = Vec::new();
    for i in 0..opts.aliased {
        let g = i % opts.groups;
        let rank = i / opts.groups;
        if let Some(name) = members[g].get(rank) {
            canonical_aliased.push(name.clone());
        }
    }
    let alias_of: BTreeMap<String, String> = canonical_aliased
        .iter()
        .map(|c| (c.clone(), c.replace("Person", "P.")))
        .collect();

    let start = NaiveDate::from_ymd_opt(2013, 1, 1).unwrap();
    let span_days = 2_830;
    let articles = persons_in
        .into_iter()
        .enumerate()
        .map(|(i, names)| {
            let names: Vec<String> = names
                .into_iter()
                .map(|n| match alias_of.get(&n) {
                    Some(a) if rng.gen_bool(0.3) => a.clone(),
                    _ => n,
                })
                .collect();
            let mut rec = ArticleRecord::new(format!("a{i:05}"), names);
            rec.title = Some(format!("Article {i}"));
            rec.date = start.checked_add_days(chrono::Days::new(rng.gen_range(0..span_days)));
            rec
        })
        .collect();

    let mut affiliations = Vec::new();
    let mut group_of = BTreeMap::new();
    for (g, list) in members.iter().enumerate() {
        let theme = THEMES[g % THEMES.len()];
        for name in list {
            let cat = if rng.gen_bool(0.6) {
                theme
            } else {
                *AffiliationCategory::ALL.choose(&mut rng).unwrap()
            };
            affiliations.push((name.clone(), cat));
            group_of.insert(name.clone(), g);
        }
    }

    Ok(Corpus {
        articles,
        aliases: alias_of.into_iter().map(|(c, a)| (a, c)).collect(),
        affiliations,
        group_of,
    })
}
