//! End-to-end report pipeline: reads an input corpus, runs the requested
//! analysis stages, writes the report files and a digest manifest, and
//! audits an existing report directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::centrality::{pearson_correlation, top_table, CentralityBundle, EigenvectorOptions, Measure};
use crate::community::{
    community_summary, filter_communities, induced_graph, label_communities, louvain, modularity, top_members,
    InducedGraph, InducedOptions, LouvainOptions, Partition,
};
use crate::error::{Error, Result};
use crate::export::{read_graphml, write_graphml, write_induced_dot, write_induced_graphml};
use crate::graph::{build_graph_with_stats, density_of, Graph, NodeId};
use crate::ingest::{
    apply_aliases, clique_expand, ingest_stats, parse_articles, read_edge_csv, write_edge_csv, AliasMap, IngestStats,
};
use crate::powerlaw::{fit_loglog, fit_mle, DegreeDistribution, FitMethod, PowerLawFit};
use crate::typology::{
    assign_types, build_profiles, type_table, AffiliationCategory, AffiliationTable, CommunityProfile, KMeansOptions,
    TypeTable,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    /// JSON lines, one article per line.
    #[default]
    Articles,
    /// CSV with header `source,target`.
    Edges,
    Graphml,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "articles" | "jsonl" => Ok(InputFormat::Articles),
            "edges" | "csv" => Ok(InputFormat::Edges),
            "graphml" => Ok(InputFormat::Graphml),
            other => Err(Error::Config(format!("unknown input format {other:?}"))),
        }
    }
}

/// Run parameters. Every field has a default, so a TOML file only needs the
/// keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub input_format: InputFormat,
    pub aliases: Option<PathBuf>,
    pub affiliations: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Required by the community and typology stages.
    pub seed: Option<u64>,
    pub resolution: f64,
    pub min_community_size: usize,
    pub dmin: usize,
    pub fit_method: FitMethod,
    pub k: usize,
    pub kmeans_restarts: usize,
    pub top_k_persons: usize,
    pub top_k_members: usize,
    /// Adds a degree column to the top-persons table.
    pub include_degree: bool,
    pub other_bucket: bool,
    pub eigen_mixing: Option<f64>,
    pub eigen_tolerance: f64,
    pub eigen_max_iter: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            input_format: InputFormat::Articles,
            aliases: None,
            affiliations: None,
            out_dir: PathBuf::from("report"),
            seed: None,
            resolution: 1.0,
            min_community_size: 100,
            dmin: 3,
            fit_method: FitMethod::LogLog,
            k: 4,
            kmeans_restarts: 1,
            top_k_persons: 10,
            top_k_members: 5,
            include_degree: false,
            other_bucket: false,
            eigen_mixing: None,
            eigen_tolerance: 1e-10,
            eigen_max_iter: 10_000,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn validate(&self) -> Result<()> {
        if self.top_k_persons == 0 || self.top_k_members == 0 {
            return Err(Error::Config("top-k values must be at least 1".into()));
        }
        if self.dmin == 0 {
            return Err(Error::Config("dmin must be at least 1".into()));
        }
        if self.resolution.is_nan() || self.resolution <= 0.0 {
            return Err(Error::Config("resolution must be positive".into()));
        }
        if self.eigen_max_iter == 0 || self.eigen_tolerance.is_nan() || self.eigen_tolerance <= 0.0 {
            return Err(Error::Config(
                "eigenvector tolerance and iteration cap must be positive".into(),
            ));
        }
        if let Some(m) = self.eigen_mixing {
            if !(m > 0.0 && m <= 1.0) {
                return Err(Error::Config("eigen mixing must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }

    fn seed(&self, stage: Stage) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config(format!("the {stage} stage needs a seed (--seed)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Stats,
    Centrality,
    Communities,
    Induced,
    PowerLaw,
    Typology,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Stats,
        Stage::Centrality,
        Stage::Communities,
        Stage::Induced,
        Stage::PowerLaw,
        Stage::Typology,
    ];

    fn prerequisites(self) -> &'static [Stage] {
        match self {
            Stage::Communities => &[Stage::Centrality],
            Stage::Induced | Stage::Typology => &[Stage::Centrality, Stage::Communities],
            _ => &[],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Stats => "stats",
            Stage::Centrality => "centrality",
            Stage::Communities => "communities",
            Stage::Induced => "induced",
            Stage::PowerLaw => "power_law",
            Stage::Typology => "typology",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub ran: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped_because: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub components: usize,
    pub largest_component: usize,
    /// Over the largest component.
    pub diameter: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralitySummary {
    /// Pearson r between degree and closeness over the largest component.
    pub degree_closeness_r: Option<f64>,
    pub measures: Vec<Measure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityStats {
    pub total: usize,
    pub retained: usize,
    pub retained_members: usize,
    pub min_size: usize,
    pub modularity: f64,
    pub level_modularity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InducedStats {
    pub nodes: usize,
    pub edges: usize,
    pub inter_weight: usize,
    pub intra_edges: usize,
    pub dropped_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypologyStats {
    pub communities: usize,
    pub k: usize,
    pub objective: f64,
    /// Name and community count of each type, `T1` first.
    pub types: Vec<(AffiliationCategory, usize)>,
    pub unlabeled_members: usize,
}

/// Parameters echoed into the summary. Paths are left out so reports do not
/// depend on where inputs live.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub input_format: InputFormat,
    pub aliases: bool,
    pub affiliations: bool,
    pub seed: Option<u64>,
    pub resolution: f64,
    pub min_community_size: usize,
    pub dmin: usize,
    pub fit_method: FitMethod,
    pub k: usize,
    pub kmeans_restarts: usize,
    pub top_k_persons: usize,
    pub top_k_members: usize,
    pub include_degree: bool,
    pub other_bucket: bool,
    pub eigen_mixing: Option<f64>,
    pub eigen_tolerance: f64,
    pub eigen_max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub parameters: Parameters,
    pub stages: Vec<StageRecord>,
    pub warnings: Vec<String>,
    pub ingest: Option<IngestStats>,
    pub graph: GraphSummary,
    pub centrality: Option<CentralitySummary>,
    pub communities: Option<CommunityStats>,
    pub induced: Option<InducedStats>,
    pub power_law: Option<PowerLawFit>,
    pub typology: Option<TypologyStats>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: Summary,
    pub manifest: Manifest,
    pub out_dir: PathBuf,
}

/// Loads the input into a graph, applying aliases. Returns ingest
/// statistics for article input.
pub fn load_graph(config: &PipelineConfig) -> Result<(Graph, Option<IngestStats>)> {
    let input = config
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("no input file given (--input)".into()))?;
    let aliases = match &config.aliases {
        Some(p) => AliasMap::from_csv(fs::File::open(p).map_err(|e| Error::io(p, e))?)?,
        None => AliasMap::default(),
    };
    let file = fs::File::open(input).map_err(|e| Error::io(input, e))?;
    match config.input_format {
        InputFormat::Articles => {
            let parsed = parse_articles(BufReader::new(file))?;
            let records = apply_aliases(parsed.records, &aliases);
            let (g, build) = build_graph_with_stats(clique_expand(&records))?;
            let stats = ingest_stats(&records, &build, &g);
            Ok((g, Some(stats)))
        }
        InputFormat::Edges | InputFormat::Graphml => {
            let edges = if config.input_format == InputFormat::Edges {
                read_edge_csv(file)?
            } else {
                read_graphml(BufReader::new(file))?.edges
            };
            let resolved = edges.iter().map(|(a, b)| (aliases.resolve(a), aliases.resolve(b)));
            let (g, _) = build_graph_with_stats(resolved)?;
            Ok((g, None))
        }
    }
}

/// Buffers report files before they are written so a failing stage leaves
/// no partial report.
struct Outputs {
    files: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.insert(name.to_owned(), bytes);
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))?;
        self.add(name, bytes);
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn with_prerequisites(stages: &[Stage]) -> BTreeSet<Stage> {
    let mut set: BTreeSet<Stage> = stages.iter().copied().collect();
    for s in stages {
        set.extend(s.prerequisites());
    }
    set.insert(Stage::Ingest);
    set
}

/// Degree–closeness correlation over the largest component.
fn degree_closeness_r(g: &Graph, degree: &[usize], closeness: &[f64]) -> Result<f64> {
    let comps = g.connected_components();
    let members = comps.members(0);
    let d: Vec<f64> = members.iter().map(|v| degree[v.index()] as f64).collect();
    let c: Vec<f64> = members.iter().map(|v| closeness[v.index()]).collect();
    pearson_correlation(&d, &c)
}

fn fit_power_law(method: FitMethod, degrees: &[usize], dmin: usize) -> Result<PowerLawFit> {
    match method {
        FitMethod::LogLog => fit_loglog(&DegreeDistribution::from_degrees(degrees), dmin),
        FitMethod::Mle => fit_mle(degrees, dmin),
    }
}

fn centrality_rows(g: &Graph, b: &CentralityBundle) -> Vec<Vec<String>> {
    let mut nodes: Vec<NodeId> = g.nodes().collect();
    nodes.sort_by(|&x, &y| {
        b.betweenness[y.index()]
            .total_cmp(&b.betweenness[x.index()])
            .then_with(|| g.name(x).cmp(g.name(y)))
    });
    nodes
        .into_iter()
        .map(|v| {
            let i = v.index();
            vec![
                g.name(v).to_owned(),
                b.degree[i].to_string(),
                num(b.closeness[i]),
                num(b.betweenness[i]),
                num(b.eigenvector[i]),
                num(b.clustering[i]),
            ]
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[derive(Serialize)]
struct CommunityRowJson<'a> {
    rank: usize,
    community: usize,
    label: &'a str,
    size: usize,
    betweenness: f64,
    closeness: f64,
    eigenvector: f64,
    eigenvector_x1000: f64,
    clustering: f64,
    density: f64,
    internal_edges: usize,
}

struct CommunityState {
    partition: Partition,
    retained: Vec<usize>,
    labels: Vec<String>,
}

/// Runs `stages` (plus whatever they depend on) and writes the report into
/// `config.out_dir`.
pub fn run_pipeline(config: &PipelineConfig, stages: &[Stage]) -> Result<RunReport> {
    config.validate()?;
    let plan = with_prerequisites(stages);
    if plan.contains(&Stage::Communities) {
        config.seed(Stage::Communities)?;
    }
    let affiliations = match (&config.affiliations, plan.contains(&Stage::Typology)) {
        (Some(p), true) => Some(AffiliationTable::from_csv(
            fs::File::open(p).map_err(|e| Error::io(p, e))?,
        )?),
        (None, true) if stages == [Stage::Typology] => {
            return Err(Error::Config(
                "the typology stage needs an affiliation table (--affiliations)".into(),
            ))
        }
        _ => None,
    };

    let mut out = Outputs { files: BTreeMap::new() };
    let mut warnings: Vec<String> = Vec::new();
    let mut records = Vec::new();
    let skip = |stage: Stage, why: &str, records: &mut Vec<StageRecord>| {
        log::warn!("{stage} skipped: {why}");
        records.push(StageRecord {
            stage,
            ran: false,
            skipped_because: Some(why.to_owned()),
        });
    };
    let ran = |stage: Stage, records: &mut Vec<StageRecord>| {
        records.push(StageRecord {
            stage,
            ran: true,
            skipped_because: None,
        })
    };

    // ingest
    log::info!("loading input");
    let (g, ingest) = load_graph(config)?;
    out.add("edges.csv", {
        let mut buf = Vec::new();
        write_edge_csv(&g.edge_names(), &mut buf)?;
        buf
    });
    out.add("network.graphml", {
        let mut buf = Vec::new();
        write_graphml(&g, &mut buf)?;
        buf
    });
    if let Some(stats) = &ingest {
        out.json("ingest_stats.json", stats)?;
    }
    ran(Stage::Ingest, &mut records);
    log::info!("graph: {} nodes, {} edges", g.node_count(), g.edge_count());

    let comps = g.connected_components();
    let mut graph_summary = GraphSummary {
        nodes: g.node_count(),
        edges: g.edge_count(),
        density: g.density()?,
        components: comps.count(),
        largest_component: comps.sizes[0],
        diameter: None,
    };
    if comps.count() > 1 {
        warnings.push(format!(
            "graph has {} components; path-based measures are per component",
            comps.count()
        ));
    }

    if plan.contains(&Stage::Stats) {
        graph_summary.diameter = Some(g.diameter());
        ran(Stage::Stats, &mut records);
    }

    let mut bundle = None;
    let mut centrality = None;
    if plan.contains(&Stage::Centrality) {
        log::info!("computing centralities");
        let eigen = EigenvectorOptions {
            tol: config.eigen_tolerance,
            max_iter: config.eigen_max_iter,
            mixing: config.eigen_mixing,
        };
        let b = CentralityBundle::compute(&g, &eigen)?;
        out.csv(
            "centrality.csv",
            &[
                "name",
                "degree",
                "closeness",
                "betweenness",
                "eigenvector",
                "clustering",
            ],
            centrality_rows(&g, &b),
        )?;
        let mut measures = vec![Measure::Betweenness, Measure::Closeness, Measure::Eigenvector];
        if config.include_degree {
            measures.push(Measure::Degree);
        }
        let table = top_table(&g, &b, &measures, config.top_k_persons);
        let mut header = vec!["rank".to_owned()];
        for m in &measures {
            header.push(m.as_str().to_owned());
            header.push(format!("{}_score", m.as_str()));
        }
        let depth = table.columns.iter().map(|c| c.1.len()).max().unwrap_or(0);
        let rows = (0..depth)
            .map(|r| {
                let mut row = vec![(r + 1).to_string()];
                for (_, col) in &table.columns {
                    row.push(col[r].name.clone());
                    row.push(num(col[r].score));
                }
                row
            })
            .collect();
        let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
        out.csv("top10.csv", &header_refs, rows)?;
        out.json("top10.json", &table)?;
        let r = match degree_closeness_r(&g, &b.degree, &b.closeness) {
            Ok(r) => Some(r),
            Err(e) => {
                warnings.push(format!("degree-closeness correlation undefined: {e}"));
                None
            }
        };
        centrality = Some(CentralitySummary {
            degree_closeness_r: r,
            measures,
        });
        bundle = Some(b);
        ran(Stage::Centrality, &mut records);
    }

    let mut community_stats = None;
    let mut community_state = None;
    if plan.contains(&Stage::Communities) {
        let b = bundle.as_ref().expect("centrality runs first");
        log::info!("detecting communities");
        let opts = LouvainOptions {
            seed: config.seed(Stage::Communities)?,
            resolution: config.resolution,
        };
        let result = louvain(&g, &opts);
        let p = result.partition.clone();
        let labels = label_communities(&g, &p, b);
        out.csv(
            "partition.csv",
            &["name", "community"],
            g.nodes()
                .map(|v| vec![g.name(v).to_owned(), p.community_of(v).to_string()])
                .collect(),
        )?;
        let retained = filter_communities(&p, config.min_community_size)?;
        let rows = community_summary(&g, &p, b, &retained);
        out.csv(
            "communities.csv",
            &["rank", "label", "B", "S", "C", "E", "CC", "D"],
            rows.iter()
                .enumerate()
                .map(|(i, r)| {
                    vec![
                        (i + 1).to_string(),
                        r.label.clone(),
                        num(r.betweenness),
                        r.size.to_string(),
                        num(r.closeness),
                        num(r.eigenvector),
                        num(r.clustering),
                        num(r.density),
                    ]
                })
                .collect(),
        )?;
        let json_rows: Vec<CommunityRowJson> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| CommunityRowJson {
                rank: i + 1,
                community: r.community,
                label: &r.label,
                size: r.size,
                betweenness: r.betweenness,
                closeness: r.closeness,
                eigenvector: r.eigenvector,
                eigenvector_x1000: r.eigenvector * 1000.0,
                clustering: r.clustering,
                density: r.density,
                internal_edges: r.internal_edges,
            })
            .collect();
        let overall = CommunityRowJson {
            rank: 0,
            community: usize::MAX,
            label: "overall",
            size: g.node_count(),
            betweenness: mean(&b.betweenness),
            closeness: mean(&b.closeness),
            eigenvector: mean(&b.eigenvector),
            eigenvector_x1000: mean(&b.eigenvector) * 1000.0,
            clustering: mean(&b.clustering),
            density: g.density()?,
            internal_edges: g.edge_count(),
        };
        out.json(
            "communities.json",
            &serde_json::json!({
                "communities_total": p.count(),
                "communities_retained": retained.len(),
                "rows": json_rows,
                "overall": overall,
            }),
        )?;
        let ordered: Vec<usize> = rows.iter().map(|r| r.community).collect();
        let members = top_members(&g, &p, b, &ordered, config.top_k_members)?;
        let mut member_rows = Vec::new();
        for (rank, cm) in members.iter().enumerate() {
            for (pos, m) in cm.members.iter().enumerate() {
                member_rows.push(vec![
                    (rank + 1).to_string(),
                    labels[cm.community].clone(),
                    (pos + 1).to_string(),
                    m.name.clone(),
                    num(m.score),
                ]);
            }
        }
        out.csv(
            "top_members.csv",
            &["rank", "label", "position", "name", "betweenness"],
            member_rows,
        )?;
        community_stats = Some(CommunityStats {
            total: p.count(),
            retained: retained.len(),
            retained_members: retained.iter().map(|&c| p.sizes()[c]).sum(),
            min_size: config.min_community_size,
            modularity: modularity(&g, &p),
            level_modularity: result.level_modularity.clone(),
        });
        community_state = Some((
            CommunityState {
                partition: p,
                retained: ordered,
                labels,
            },
            members,
        ));
        ran(Stage::Communities, &mut records);
    }

    let mut induced_stats = None;
    if plan.contains(&Stage::Induced) {
        let (cs, _) = community_state.as_ref().expect("communities run first");
        let b = bundle.as_ref().expect("centrality runs first");
        let ig: InducedGraph = induced_graph(
            &g,
            &cs.partition,
            &cs.retained,
            b,
            InducedOptions {
                other_bucket: config.other_bucket,
            },
        );
        debug_assert_eq!(ig.accounted_edges(), g.edge_count());
        let mut dot = Vec::new();
        write_induced_dot(&ig, &mut dot)?;
        out.add("induced.dot", dot);
        let mut gml = Vec::new();
        write_induced_graphml(&ig, &mut gml)?;
        out.add("induced.graphml", gml);
        out.json("induced.json", &ig)?;
        induced_stats = Some(InducedStats {
            nodes: ig.nodes.len(),
            edges: ig.edges.len(),
            inter_weight: ig.edge_weight_total(),
            intra_edges: ig.intra_total(),
            dropped_edges: ig.dropped_edges,
        });
        ran(Stage::Induced, &mut records);
    }

    let mut power_law = None;
    if plan.contains(&Stage::PowerLaw) {
        let degrees: Vec<usize> = g.nodes().map(|v| g.neighbors(v).len()).collect();
        let dist = DegreeDistribution::from_degrees(&degrees);
        out.csv(
            "degree_dist.csv",
            &["d", "count", "f_d"],
            dist.iter()
                .map(|(d, c, f)| vec![d.to_string(), c.to_string(), num(f)])
                .collect(),
        )?;
        let fit = match fit_power_law(config.fit_method, &degrees, config.dmin) {
            Ok(fit) => Some(fit),
            Err(e @ (Error::InsufficientTail { .. } | Error::DegenerateTail(_))) => {
                warnings.push(format!("no power-law fit: {e}"));
                None
            }
            Err(e) => return Err(e),
        };
        out.csv(
            "degree_plot.csv",
            &["d", "f_d", "fit"],
            dist.iter()
                .map(|(d, _, f)| {
                    let fitted = match &fit {
                        Some(fit) if d >= fit.dmin => num(fit.predict(d)),
                        _ => String::new(),
                    };
                    vec![d.to_string(), num(f), fitted]
                })
                .collect(),
        )?;
        out.json("power_law.json", &fit)?;
        power_law = fit;
        ran(Stage::PowerLaw, &mut records);
    }

    let mut typology = None;
    if plan.contains(&Stage::Typology) {
        match &affiliations {
            None => skip(Stage::Typology, "no affiliation table", &mut records),
            Some(table) => {
                let (cs, members) = community_state.as_ref().expect("communities run first");
                let names: Vec<(usize, Vec<String>)> = members
                    .iter()
                    .map(|cm| (cm.community, cm.members.iter().map(|m| m.name.clone()).collect()))
                    .collect();
                let profiles = build_profiles(&names, table)?;
                let opts = KMeansOptions {
                    restarts: config.kmeans_restarts.max(1),
                    ..KMeansOptions::new(config.k, config.seed(Stage::Typology)?)
                };
                let assignment = assign_types(&profiles, &opts)?;
                let tt = type_table(&assignment, &profiles);
                write_typology(&mut out, cs, &profiles, &assignment.clusters, &tt)?;
                let unlabeled: usize = profiles.iter().map(|p| p.unlabeled.len()).sum();
                if unlabeled > 0 {
                    warnings.push(format!("{unlabeled} top member(s) have no affiliation"));
                }
                typology = Some(TypologyStats {
                    communities: profiles.len(),
                    k: config.k,
                    objective: assignment.objective,
                    types: tt.columns.iter().map(|c| (c.name, c.communities)).collect(),
                    unlabeled_members: unlabeled,
                });
                out.json(
                    "typology.json",
                    &serde_json::json!({
                        "table": tt,
                        "profiles": profiles,
                        "centroids": assignment.centroids,
                        "objective": assignment.objective,
                    }),
                )?;
                ran(Stage::Typology, &mut records);
            }
        }
    }

    let summary = Summary {
        parameters: Parameters {
            input_format: config.input_format,
            aliases: config.aliases.is_some(),
            affiliations: config.affiliations.is_some(),
            seed: config.seed,
            resolution: config.resolution,
            min_community_size: config.min_community_size,
            dmin: config.dmin,
            fit_method: config.fit_method,
            k: config.k,
            kmeans_restarts: config.kmeans_restarts,
            top_k_persons: config.top_k_persons,
            top_k_members: config.top_k_members,
            include_degree: config.include_degree,
            other_bucket: config.other_bucket,
            eigen_mixing: config.eigen_mixing,
            eigen_tolerance: config.eigen_tolerance,
            eigen_max_iter: config.eigen_max_iter,
        },
        stages: records,
        warnings,
        ingest,
        graph: graph_summary,
        centrality,
        communities: community_stats,
        induced: induced_stats,
        power_law,
        typology,
    };
    out.json("summary.json", &summary)?;

    let manifest = Manifest {
        files: out
            .files
            .iter()
            .map(|(name, bytes)| ManifestEntry {
                path: name.clone(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(bytes),
            })
            .collect(),
    };
    out.json("manifest.json", &manifest)?;

    let dir = &config.out_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, bytes) in &out.files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    log::info!("wrote {} files to {}", out.files.len(), dir.display());
    Ok(RunReport {
        summary,
        manifest,
        out_dir: dir.clone(),
    })
}

fn write_typology(
    out: &mut Outputs,
    cs: &CommunityState,
    profiles: &[CommunityProfile],
    clusters: &[usize],
    tt: &TypeTable,
) -> Result<()> {
    let mut header = vec!["community".to_owned(), "label".to_owned()];
    header.extend(AffiliationCategory::ALL.iter().map(|c| c.as_str().to_owned()));
    header.push("unlabeled".to_owned());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv(
        "profiles.csv",
        &header_refs,
        profiles
            .iter()
            .map(|p| {
                let mut row = vec![p.community.to_string(), cs.labels[p.community].clone()];
                row.extend(p.counts.iter().map(u32::to_string));
                row.push(p.unlabeled.len().to_string());
                row
            })
            .collect(),
    )?;

    let mut header = vec!["category".to_owned()];
    header.extend((1..=tt.columns.len()).map(|t| format!("T{t}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows: Vec<Vec<String>> = AffiliationCategory::ALL
        .iter()
        .map(|&c| {
            let mut row = vec![c.as_str().to_owned()];
            row.extend(tt.columns.iter().map(|col| col.counts[c.index()].to_string()));
            row
        })
        .collect();
    let mut last = vec!["communities".to_owned()];
    last.extend(tt.columns.iter().map(|col| col.communities.to_string()));
    rows.push(last);
    out.csv("typology.csv", &header_refs, rows)?;

    out.csv(
        "community_types.csv",
        &["community", "label", "type", "type_name"],
        profiles
            .iter()
            .zip(clusters)
            .map(|(p, &cl)| {
                let t = tt.type_number(cl).expect("every cluster has a column");
                vec![
                    p.community.to_string(),
                    cs.labels[p.community].clone(),
                    format!("T{t}"),
                    tt.columns[t - 1].name.as_str().to_owned(),
                ]
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<AuditCheck>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(AuditCheck {
            name: name.to_owned(),
            passed,
            detail,
        });
    }

    fn close(&mut self, name: &str, reported: f64, recomputed: f64, tol: f64) {
        let scale = reported.abs().max(recomputed.abs()).max(1.0);
        self.check(
            name,
            (reported - recomputed).abs() <= tol * scale,
            format!("reported {reported}, recomputed {recomputed}"),
        );
    }
}

fn read_csv_rows(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr.headers()?.iter().map(str::to_owned).collect();
    let rows = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

fn parse_field<T: FromStr>(row: &csv::StringRecord, i: usize, file: &str) -> Result<T> {
    row.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Parse {
        line: row.position().map_or(0, |p| p.line() as usize),
        message: format!("{file}: bad value in column {}", i + 1),
    })
}

/// Re-derives the summary numbers from the emitted files and checks the
/// manifest digests.
pub fn audit(dir: &Path) -> Result<AuditReport> {
    let read = |name: &str| -> Result<Vec<u8>> {
        let p = dir.join(name);
        fs::read(&p).map_err(|e| Error::io(&p, e))
    };
    let manifest: Manifest = serde_json::from_slice(&read("manifest.json")?)?;
    let summary: Summary = serde_json::from_slice(&read("summary.json")?)?;
    let listed: BTreeSet<&str> = manifest.files.iter().map(|f| f.path.as_str()).collect();
    let mut report = AuditReport::default();

    for entry in &manifest.files {
        let detail;
        let ok = match read(&entry.path) {
            Ok(bytes) => {
                let digest = sha256_hex(&bytes);
                detail = format!("{} {}", entry.path, digest);
                digest == entry.sha256 && bytes.len() as u64 == entry.bytes
            }
            Err(e) => {
                detail = e.to_string();
                false
            }
        };
        report.check(&format!("digest {}", entry.path), ok, detail);
    }

    let edges = read_edge_csv(fs::File::open(dir.join("edges.csv")).map_err(|e| Error::io(dir, e))?)?;
    let (g, _) = build_graph_with_stats(edges.iter().map(|(a, b)| (a.as_str(), b.as_str())))?;
    let gs = &summary.graph;
    report.check(
        "node and edge counts",
        g.node_count() == gs.nodes && g.edge_count() == gs.edges,
        format!("{} nodes, {} edges", g.node_count(), g.edge_count()),
    );
    report.close(
        "density",
        gs.density,
        density_of(g.node_count(), g.edge_count())?,
        1e-12,
    );
    let comps = g.connected_components();
    report.check(
        "components",
        comps.count() == gs.components && comps.sizes[0] == gs.largest_component,
        format!("{} components, largest {}", comps.count(), comps.sizes[0]),
    );
    if let Some(d) = gs.diameter {
        let recomputed = g.diameter();
        report.check(
            "diameter",
            recomputed == d,
            format!("reported {d}, recomputed {recomputed}"),
        );
    }

    let mut closeness_by_name: BTreeMap<String, [f64; 5]> = BTreeMap::new();
    if listed.contains("centrality.csv") {
        let (_, rows) = read_csv_rows(&dir.join("centrality.csv"))?;
        for row in &rows {
            let vals = [
                parse_field::<f64>(row, 1, "centrality.csv")?,
                parse_field::<f64>(row, 2, "centrality.csv")?,
                parse_field::<f64>(row, 3, "centrality.csv")?,
                parse_field::<f64>(row, 4, "centrality.csv")?,
                parse_field::<f64>(row, 5, "centrality.csv")?,
            ];
            closeness_by_name.insert(row[0].to_owned(), vals);
        }
        let degrees_match = g.nodes().all(|v| {
            closeness_by_name
                .get(g.name(v))
                .is_some_and(|r| r[0] == g.neighbors(v).len() as f64)
        });
        let rows_ok = degrees_match && closeness_by_name.len() == g.node_count();
        report.check("centrality rows", rows_ok, format!("{} rows", closeness_by_name.len()));
        if !rows_ok {
            // later checks look rows up by name
            closeness_by_name.clear();
        }
        if let (Some(r), true) = (summary.centrality.as_ref().and_then(|c| c.degree_closeness_r), rows_ok) {
            let row = |v: NodeId| closeness_by_name[g.name(v)];
            let members = comps.members(0);
            let d: Vec<f64> = members.iter().map(|&v| row(v)[0]).collect();
            let c: Vec<f64> = members.iter().map(|&v| row(v)[1]).collect();
            report.close("degree-closeness r", r, pearson_correlation(&d, &c)?, 1e-9);
        }
    }

    if let (Some(cs), true) = (&summary.communities, listed.contains("partition.csv")) {
        let (_, rows) = read_csv_rows(&dir.join("partition.csv"))?;
        let mut labels = vec![u32::MAX; g.node_count()];
        for row in &rows {
            let v = g.node_id(&row[0]).ok_or_else(|| Error::Parse {
                line: row.position().map_or(0, |p| p.line() as usize),
                message: format!("partition.csv: unknown person {:?}", &row[0]),
            })?;
            labels[v.index()] = parse_field(row, 1, "partition.csv")?;
        }
        let complete = labels.iter().all(|&l| l != u32::MAX);
        report.check("partition covers graph", complete, format!("{} rows", rows.len()));
        if complete {
            let p = Partition::from_labels(&labels);
            report.close("modularity", cs.modularity, modularity(&g, &p), 1e-9);
            let retained = p.sizes().iter().filter(|&&s| s >= cs.min_size).count();
            report.check(
                "community counts",
                p.count() == cs.total && retained == cs.retained,
                format!("{} communities, {} retained", p.count(), retained),
            );
            if listed.contains("communities.csv") && !closeness_by_name.is_empty() {
                let (_, rows) = read_csv_rows(&dir.join("communities.csv"))?;
                let mut ok = rows.len() == cs.retained;
                for row in &rows {
                    let Some(label) = g.node_id(&row[1]) else {
                        ok = false;
                        continue;
                    };
                    let members = p.members(p.community_of(label));
                    let size: usize = parse_field(row, 3, "communities.csv")?;
                    let col = |k: usize| {
                        mean(
                            &members
                                .iter()
                                .map(|&v| closeness_by_name[g.name(v)][k])
                                .collect::<Vec<_>>(),
                        )
                    };
                    let near = |x: f64, y: f64| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0);
                    ok &= size == members.len()
                        && near(parse_field(row, 2, "communities.csv")?, col(2))
                        && near(parse_field(row, 4, "communities.csv")?, col(1))
                        && near(parse_field(row, 5, "communities.csv")?, col(3))
                        && near(parse_field(row, 6, "communities.csv")?, col(4));
                }
                report.check("community means", ok, format!("{} rows", rows.len()));
            }
        }
    }

    if let Some(ind) = &summary.induced {
        let accounted = ind.inter_weight + ind.intra_edges + ind.dropped_edges;
        report.check(
            "induced edge conservation",
            accounted == g.edge_count(),
            format!("{accounted} accounted of {}", g.edge_count()),
        );
    }

    if listed.contains("degree_dist.csv") {
        let (_, rows) = read_csv_rows(&dir.join("degree_dist.csv"))?;
        let hist = g.degree_histogram();
        let mut ok = rows.len() == hist.len();
        for row in &rows {
            let d: usize = parse_field(row, 0, "degree_dist.csv")?;
            let c: usize = parse_field(row, 1, "degree_dist.csv")?;
            ok &= hist.get(&d) == Some(&c);
        }
        report.check("degree distribution", ok, format!("{} degrees", rows.len()));
        if let Some(fit) = &summary.power_law {
            let degrees: Vec<usize> = g.nodes().map(|v| g.neighbors(v).len()).collect();
            let refit = fit_power_law(fit.method, &degrees, fit.dmin)?;
            report.close("power-law exponent", fit.alpha, refit.alpha, 1e-12);
        }
    }

    if listed.contains("typology.csv") && listed.contains("profiles.csv") {
        let (_, trows) = read_csv_rows(&dir.join("typology.csv"))?;
        let (_, prows) = read_csv_rows(&dir.join("profiles.csv"))?;
        let table_total: u64 = trows[..trows.len().saturating_sub(1)]
            .iter()
            .flat_map(|r| r.iter().skip(1).map(|x| x.parse::<u64>().unwrap_or(0)))
            .collect::<Vec<_>>()
            .iter()
            .sum();
        let profile_total: u64 = prows
            .iter()
            .flat_map(|r| {
                r.iter()
                    .skip(2)
                    .take(AffiliationCategory::ALL.len())
                    .map(|x| x.parse::<u64>().unwrap_or(0))
            })
            .collect::<Vec<_>>()
            .iter()
            .sum();
        let community_total: usize = trows
            .last()
            .map(|r| r.iter().skip(1).map(|x| x.parse::<usize>().unwrap_or(0)).sum())
            .unwrap_or(0);
        report.check(
            "typology conservation",
            table_total == profile_total && community_total == prows.len(),
            format!("{table_total} labeled members over {community_total} communities"),
        );
    }
    Ok(report)
}
