//! Co-mention social network analysis.
//!
//! Builds a person network from article co-mentions and runs the standard
//! analysis stack over it: structural statistics, four centralities plus the
//! clustering coefficient, Louvain communities and their induced network,
//! a power-law fit of the degree tail, and a k-means typology of communities
//! from hand-labeled member affiliations.

pub mod centrality;
pub mod community;
pub mod error;
pub mod export;
pub mod graph;
pub mod ingest;
pub mod pipeline;
pub mod powerlaw;
pub mod synth;
pub mod typology;

pub use error::{Error, ErrorClass, Result};
pub use graph::{build_graph, build_graph_with_stats, Graph, NodeId};
