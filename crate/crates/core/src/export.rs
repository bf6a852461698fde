//! GraphML and DOT serialization for person graphs and induced community
//! graphs. Output order follows node ids, so files are byte-stable.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use quick_xml::escape::escape;
use quick_xml::events::Event;

use crate::community::InducedGraph;
use crate::error::{Error, Result};
use crate::graph::Graph;

const GRAPHML_HEADER: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<graphml xmlns="http://graphml.graphdrawing.org/xmlns" xmlns:xsi="http://www.w3.org/2001/XMLSchema-instance" xsi:schemaLocation="http://graphml.graphdrawing.org/xmlns http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd">
"#;

fn io_err(e: std::io::Error) -> Error {
    Error::io("<output>", e)
}

pub fn write_graphml(g: &Graph, mut out: impl Write) -> Result<()> {
    let mut s = String::from(GRAPHML_HEADER);
    s.push_str("  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n");
    s.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for v in g.nodes() {
        let _ = writeln!(
            s,
            "    <node id=\"n{v}\"><data key=\"name\">{}</data></node>",
            escape(g.name(v))
        );
    }
    for (u, v) in g.edges() {
        let _ = writeln!(s, "    <edge source=\"n{u}\" target=\"n{v}\"/>");
    }
    s.push_str("  </graph>\n</graphml>\n");
    out.write_all(s.as_bytes()).map_err(io_err)
}

pub fn write_induced_graphml(ig: &InducedGraph, mut out: impl Write) -> Result<()> {
    let mut s = String::from(GRAPHML_HEADER);
    for (id, target, ty) in [
        ("name", "node", "string"),
        ("community", "node", "int"),
        ("size", "node", "int"),
        ("mean_betweenness", "node", "double"),
        ("intra_edges", "node", "int"),
        ("weight", "edge", "int"),
    ] {
        let _ = writeln!(
            s,
            "  <key id=\"{id}\" for=\"{target}\" attr.name=\"{id}\" attr.type=\"{ty}\"/>"
        );
    }
    s.push_str("  <graph id=\"induced\" edgedefault=\"undirected\">\n");
    for (i, n) in ig.nodes.iter().enumerate() {
        let _ = write!(
            s,
            "    <node id=\"c{i}\"><data key=\"name\">{}</data>",
            escape(&n.label)
        );
        if let Some(c) = n.community {
            let _ = write!(s, "<data key=\"community\">{c}</data>");
        }
        let _ = writeln!(
            s,
            "<data key=\"size\">{}</data><data key=\"mean_betweenness\">{}</data>\
             <data key=\"intra_edges\">{}</data></node>",
            n.size, n.mean_betweenness, n.intra_edges
        );
    }
    for e in &ig.edges {
        let _ = writeln!(
            s,
            "    <edge source=\"c{}\" target=\"c{}\"><data key=\"weight\">{}</data></edge>",
            e.source, e.target, e.weight
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    out.write_all(s.as_bytes()).map_err(io_err)
}

/// Node names (document order) and edges by name, as read from GraphML.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphMlData {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
}

/// Reads node `name` data and edge endpoints. Nodes without a `name` fall
/// back to their GraphML id.
pub fn read_graphml(input: impl BufRead) -> Result<GraphMlData> {
    let mut reader = quick_xml::Reader::from_reader(input);
    reader.config_mut().trim_text(true);
    let mut buf = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    let mut names: HashMap<String, String> = HashMap::new();
    let mut raw_edges: Vec<(String, String)> = Vec::new();
    let mut name_key = "name".to_string();
    let mut current_node: Option<String> = None;
    let mut in_name_data = false;

    let attr = |e: &quick_xml::events::BytesStart, key: &[u8]| -> Result<Option<String>> {
        for a in e.attributes() {
            let a = a.map_err(|e| Error::GraphMl(e.to_string()))?;
            if a.key.as_ref() == key {
                let v = a.unescape_value().map_err(|e| Error::GraphMl(e.to_string()))?;
                return Ok(Some(v.into_owned()));
            }
        }
        Ok(None)
    };

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| Error::GraphMl(e.to_string()))?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_start = matches!(event, Event::Start(_));
                match e.local_name().as_ref() {
                    b"key" => {
                        if attr(e, b"attr.name")?.as_deref() == Some("name")
                            && attr(e, b"for")?.as_deref() != Some("edge")
                        {
                            if let Some(id) = attr(e, b"id")? {
                                name_key = id;
                            }
                        }
                    }
                    b"node" => {
                        let id = attr(e, b"id")?.ok_or_else(|| Error::GraphMl("node without id".into()))?;
                        ids.push(id.clone());
                        if is_start {
                            current_node = Some(id);
                        }
                    }
                    b"edge" => {
                        let s = attr(e, b"source")?.ok_or_else(|| Error::GraphMl("edge without source".into()))?;
                        let t = attr(e, b"target")?.ok_or_else(|| Error::GraphMl("edge without target".into()))?;
                        raw_edges.push((s, t));
                    }
                    b"data" if is_start && current_node.is_some() => {
                        in_name_data = attr(e, b"key")?.as_deref() == Some(name_key.as_str());
                    }
                    _ => {}
                }
            }
            Event::Text(t) if in_name_data => {
                let text = t.unescape().map_err(|e| Error::GraphMl(e.to_string()))?;
                if let Some(id) = &current_node {
                    names.insert(id.clone(), text.into_owned());
                }
            }
            Event::End(ref e) => match e.local_name().as_ref() {
                b"node" => current_node = None,
                b"data" => in_name_data = false,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    let resolve = |id: &str| names.get(id).cloned().unwrap_or_else(|| id.to_owned());
    Ok(GraphMlData {
        nodes: ids.iter().map(|id| resolve(id)).collect(),
        edges: raw_edges.iter().map(|(s, t)| (resolve(s), resolve(t))).collect(),
    })
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn write_dot(g: &Graph, mut out: impl Write) -> Result<()> {
    let mut s = String::from("graph G {\n");
    for v in g.nodes() {
        let _ = writeln!(s, "  n{v} [label={}];", dot_quote(g.name(v)));
    }
    for (u, v) in g.edges() {
        let _ = writeln!(s, "  n{u} -- n{v};");
    }
    s.push_str("}\n");
    out.write_all(s.as_bytes()).map_err(io_err)
}

/// Largest node width in inches and largest pen width.
const MAX_WIDTH: f64 = 3.0;
const MAX_PENWIDTH: f64 = 10.0;

/// Gray level (X11 `grayN`, 0 = black) for a betweenness value: the highest
/// mean betweenness maps to gray10, zero maps to white.
fn shade(b: f64, max_b: f64) -> u32 {
    if max_b <= 0.0 {
        100
    } else {
        100 - (90.0 * b / max_b).round() as u32
    }
}

/// DOT rendering of the induced graph: node width proportional to
/// community size, darker fill for higher mean betweenness, pen width
/// proportional to edge weight.
pub fn write_induced_dot(ig: &InducedGraph, mut out: impl Write) -> Result<()> {
    let max_size = ig.nodes.iter().map(|n| n.size).max().unwrap_or(1).max(1) as f64;
    let max_b = ig.nodes.iter().map(|n| n.mean_betweenness).fold(0.0, f64::max);
    let max_w = ig.edges.iter().map(|e| e.weight).max().unwrap_or(1).max(1) as f64;

    let mut s = String::from("graph induced {\n");
    s.push_str("  node [shape=circle, style=filled, fixedsize=true];\n");
    for (i, n) in ig.nodes.iter().enumerate() {
        let gray = shade(n.mean_betweenness, max_b);
        let font = if gray < 50 { "white" } else { "black" };
        let _ = writeln!(
            s,
            "  c{i} [label={}, width={:.3}, fillcolor=\"gray{gray}\", fontcolor={font}, size={}, mean_betweenness={}];",
            dot_quote(&n.label),
            MAX_WIDTH * n.size as f64 / max_size,
            n.size,
            n.mean_betweenness
        );
    }
    for e in &ig.edges {
        let _ = writeln!(
            s,
            "  c{} -- c{} [penwidth={:.3}, weight={}];",
            e.source,
            e.target,
            MAX_PENWIDTH * e.weight as f64 / max_w,
            e.weight
        );
    }
    s.push_str("}\n");
    out.write_all(s.as_bytes()).map_err(io_err)
}
