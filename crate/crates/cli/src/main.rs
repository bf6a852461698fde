use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sna_core::pipeline::{audit, run_pipeline, InputFormat, PipelineConfig, Stage};
use sna_core::powerlaw::FitMethod;
use sna_core::synth::{article_corpus, CorpusOptions};
use sna_core::{Error, ErrorClass};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Co-mention network analysis.
#[derive(Parser, Debug)]
#[command(name = "sna", version)]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the person graph and write the edge list.
    Ingest(RunArgs),
    /// Size, density, components and diameter.
    Stats(RunArgs),
    /// Per-person centralities and the top-persons table.
    Centrality(RunArgs),
    /// Louvain communities and the community summary table.
    Communities(RunArgs),
    /// Community-level network (DOT, GraphML, JSON).
    Induced(RunArgs),
    /// Degree distribution and its power-law fit.
    FitPowerlaw(RunArgs),
    /// Affiliation profiles and k-means community types.
    Typology(RunArgs),
    /// Every stage.
    Run(RunArgs),
    /// Recompute a report's numbers from its own files.
    Audit {
        /// Report directory.
        dir: PathBuf,
    },
    /// Write a synthetic article corpus with aliases and affiliations.
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 6000)]
        articles: usize,
        #[arg(long, default_value_t = 10500)]
        persons: usize,
        #[arg(long, default_value_t = 40)]
        groups: usize,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML file with run parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// articles (JSON lines), edges (CSV) or graphml.
    #[arg(long, value_parser = parse_format)]
    input_format: Option<InputFormat>,
    /// CSV with header alias,canonical.
    #[arg(long)]
    aliases: Option<PathBuf>,
    /// CSV with header name,category.
    #[arg(long)]
    affiliations: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    min_community_size: Option<usize>,
    #[arg(long)]
    dmin: Option<usize>,
    /// loglog or mle.
    #[arg(long, value_parser = parse_fit)]
    fit_method: Option<FitMethod>,
    /// Number of community types.
    #[arg(long)]
    k: Option<usize>,
    /// k-means runs with consecutive seeds; the lowest objective wins.
    #[arg(long)]
    kmeans_restarts: Option<usize>,
    #[arg(long)]
    top_k_persons: Option<usize>,
    #[arg(long)]
    top_k_members: Option<usize>,
    /// Add a degree column to the top-persons table.
    #[arg(long)]
    include_degree: bool,
    /// Collect communities below the size threshold into one "other" node.
    #[arg(long)]
    other_bucket: bool,
    /// Damping for the eigenvector iteration, e.g. 0.999.
    #[arg(long)]
    eigen_mixing: Option<f64>,
}

fn parse_format(s: &str) -> Result<InputFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_fit(s: &str) -> Result<FitMethod, String> {
    match s.to_ascii_lowercase().as_str() {
        "loglog" | "log-log" | "ols" => Ok(FitMethod::LogLog),
        "mle" => Ok(FitMethod::Mle),
        other => Err(format!("unknown fit method {other:?}")),
    }
}

impl RunArgs {
    fn into_config(self) -> Result<PipelineConfig, Error> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::from_toml_file(p)?,
            None => PipelineConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    c.$field = v.into();
                }
            )*};
        }
        set!(
            input_format,
            out_dir,
            resolution,
            min_community_size,
            dmin,
            fit_method,
            k,
            kmeans_restarts,
            top_k_persons,
            top_k_members
        );
        if self.input.is_some() {
            c.input = self.input;
        }
        if self.aliases.is_some() {
            c.aliases = self.aliases;
        }
        if self.affiliations.is_some() {
            c.affiliations = self.affiliations;
        }
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if self.eigen_mixing.is_some() {
            c.eigen_mixing = self.eigen_mixing;
        }
        c.include_degree |= self.include_degree;
        c.other_bucket |= self.other_bucket;
        Ok(c)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Usage => EXIT_USAGE,
        ErrorClass::Data => EXIT_DATA,
        ErrorClass::Numerical => EXIT_NUMERICAL,
    }
}

fn run_stage(args: RunArgs, stages: &[Stage]) -> Result<(), Error> {
    let config = args.into_config()?;
    let report = run_pipeline(&config, stages)?;
    let s = &report.summary;
    println!(
        "{} nodes, {} edges, density {}",
        s.graph.nodes, s.graph.edges, s.graph.density
    );
    if let Some(c) = &s.communities {
        println!(
            "{} communities ({} with at least {} members), modularity {:.4}",
            c.total, c.retained, c.min_size, c.modularity
        );
    }
    if let Some(f) = &s.power_law {
        println!("power-law exponent {:.4} (dmin {})", f.alpha, f.dmin);
    }
    for w in &s.warnings {
        eprintln!("warning: {w}");
    }
    println!("report written to {}", report.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }

    let result = match cli.command {
        Command::Ingest(a) => run_stage(a, &[Stage::Ingest]),
        Command::Stats(a) => run_stage(a, &[Stage::Stats]),
        Command::Centrality(a) => run_stage(a, &[Stage::Centrality]),
        Command::Communities(a) => run_stage(a, &[Stage::Communities]),
        Command::Induced(a) => run_stage(a, &[Stage::Induced]),
        Command::FitPowerlaw(a) => run_stage(a, &[Stage::PowerLaw]),
        Command::Typology(a) => run_stage(a, &[Stage::Typology]),
        Command::Run(a) => run_stage(a, &Stage::ALL),
        Command::Audit { dir } => audit(&dir).map(|report| {
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
            }
            if !report.passed() {
                eprintln!("error: audit failed");
                std::process::exit(i32::from(EXIT_DATA));
            }
        }),
        Command::Synth {
            out_dir,
            seed,
            articles,
            persons,
            groups,
        } => article_corpus(&CorpusOptions {
            articles,
            persons,
            groups,
            seed,
            ..CorpusOptions::default()
        })
        .and_then(|c| c.write_to(&out_dir))
        .map(|files| {
            println!("{}", files.articles.display());
            println!("{}", files.aliases.display());
            println!("{}", files.affiliations.display());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
