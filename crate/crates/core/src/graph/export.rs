//! GraphML and DOT serialization with per-vertex attributes.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::build::UndirectedGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexAttributes {
    pub author_id: String,
    pub display_name: String,
    pub group: Option<String>,
    pub cluster: Option<usize>,
    pub abstract_count: usize,
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn check(g: &UndirectedGraph, attrs: &[VertexAttributes]) -> Result<()> {
    if g.n_vertices() != attrs.len() {
        return Err(Error::LengthMismatch {
            left: g.n_vertices(),
            right: attrs.len(),
        });
    }
    Ok(())
}

/// GraphML document; vertices keyed by author id.
pub fn to_graphml(g: &UndirectedGraph, attrs: &[VertexAttributes]) -> Result<String> {
    check(g, attrs)?;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
         http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
    );
    for (id, ty) in [
        ("author_id", "string"),
        ("display_name", "string"),
        ("group", "string"),
        ("cluster", "int"),
        ("abstract_count", "int"),
    ] {
        let _ = writeln!(s, "  <key id=\"{id}\" for=\"node\" attr.name=\"{id}\" attr.type=\"{ty}\"/>");
    }
    s.push_str("  <graph id=\"authors\" edgedefault=\"undirected\">\n");
    for a in attrs {
        let _ = writeln!(s, "    <node id=\"{}\">", xml_escape(&a.author_id));
        let _ = writeln!(s, "      <data key=\"author_id\">{}</data>", xml_escape(&a.author_id));
        let _ = writeln!(s, "      <data key=\"display_name\">{}</data>", xml_escape(&a.display_name));
        if let Some(gr) = &a.group {
            let _ = writeln!(s, "      <data key=\"group\">{}</data>", xml_escape(gr));
        }
        if let Some(c) = a.cluster {
            let _ = writeln!(s, "      <data key=\"cluster\">{c}</data>");
        }
        let _ = writeln!(s, "      <data key=\"abstract_count\">{}</data>", a.abstract_count);
        s.push_str("    </node>\n");
    }
    for (k, (u, v)) in g.edges().enumerate() {
        let _ = writeln!(
            s,
            "    <edge id=\"e{k}\" source=\"{}\" target=\"{}\"/>",
            xml_escape(&attrs[u].author_id),
            xml_escape(&attrs[v].author_id)
        );
    }
    s.push_str("  </graph>\n</graphml>\n");
    Ok(s)
}

/// Undirected DOT graph with the same vertex attributes.
pub fn to_dot(g: &UndirectedGraph, attrs: &[VertexAttributes]) -> Result<String> {
    check(g, attrs)?;
    let mut s = String::from("graph authors {\n");
    for a in attrs {
        let _ = write!(
            s,
            "  \"{}\" [label=\"{}\", abstract_count={}",
            dot_escape(&a.author_id),
            dot_escape(&a.display_name),
            a.abstract_count
        );
        if let Some(gr) = &a.group {
            let _ = write!(s, ", group=\"{}\"", dot_escape(gr));
        }
        if let Some(c) = a.cluster {
            let _ = write!(s, ", cluster={c}");
        }
        s.push_str("];\n");
    }
    for (u, v) in g.edges() {
        let _ = writeln!(
            s,
            "  \"{}\" -- \"{}\";",
            dot_escape(&attrs[u].author_id),
            dot_escape(&attrs[v].author_id)
        );
    }
    s.push_str("}\n");
    Ok(s)
}
