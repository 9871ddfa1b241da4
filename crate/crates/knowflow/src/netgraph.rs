//! Keyword networks: nodes are per-cluster top keywords sized by their
//! tf-idf weight, edges are document-level co-occurrences at or above a
//! threshold. Networks can span one corpus slice or compare two slices;
//! node identity is `token@slice`, so shared vocabulary never merges across
//! slices.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::{KeywordWeight, TokenDoc};

#[derive(Debug, Error)]
pub enum NetgraphError {
    #[error("no keywords with positive weight to build a network from")]
    EmptyKeywordSet,
    #[error("doc {0} appears in both slices")]
    OverlappingSlices(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("graphml parse: {0}")]
    Parse(String),
}

/// Corpus slice a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slice {
    Art,
    AiArt,
    Other,
}

impl Slice {
    pub fn as_str(self) -> &'static str {
        match self {
            Slice::Art => "art",
            Slice::AiArt => "ai_art",
            Slice::Other => "other",
        }
    }

    fn parse(s: &str) -> Option<Slice> {
        match s {
            "art" => Some(Slice::Art),
            "ai_art" => Some(Slice::AiArt),
            "other" => Some(Slice::Other),
            _ => None,
        }
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One keyword node. `weight` is the keyword's tf-idf value and is always
/// positive; zero-weight keywords are dropped at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub token: String,
    pub cluster: usize,
    pub weight: f64,
    pub slice: Slice,
}

impl GraphNode {
    /// Node identity: `token@slice`. Tokens are punctuation-free, so `@`
    /// cannot occur inside them.
    pub fn id(&self) -> String {
        format!("{}@{}", self.token, self.slice.as_str())
    }
}

/// One undirected edge; `u` and `v` are node ids with `u < v` in node order
/// and `weight` is the exact co-occurrence document count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub u: String,
    pub v: String,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct KeywordGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl KeywordGraph {
    /// Total number of edges.
    pub fn connection_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of edges whose endpoints share a slice.
    pub fn intra_slice_connections(&self) -> usize {
        self.edges.len() - self.inter_slice_connections()
    }

    /// Number of edges spanning two slices.
    pub fn inter_slice_connections(&self) -> usize {
        let slice_of: HashMap<String, Slice> =
            self.nodes.iter().map(|n| (n.id(), n.slice)).collect();
        self.edges
            .iter()
            .filter(|e| slice_of.get(&e.u) != slice_of.get(&e.v))
            .count()
    }
}

/// Everything needed to contribute one slice to a network: its documents and
/// the per-cluster keyword lists computed for it.
#[derive(Debug, Clone, Copy)]
pub struct SliceInput<'a> {
    pub slice: Slice,
    pub docs: &'a [TokenDoc],
    pub keywords: &'a BTreeMap<usize, Vec<KeywordWeight>>,
}

/// Build the keyword network for one slice: nodes are the union of
/// per-cluster top keywords (positive weight only), and an edge joins two
/// keywords co-occurring in at least `min_cooccur` documents.
pub fn build_network(
    input: &SliceInput<'_>,
    min_cooccur: u64,
) -> Result<KeywordGraph, NetgraphError> {
    let nodes = collect_nodes(&[input])?;
    let edges = count_edges(&nodes, &[input], min_cooccur);
    Ok(KeywordGraph { nodes, edges })
}

/// Build a two-slice comparison network. Slices must be disjoint by doc id.
/// Nodes keep their slice tag; edges are counted over the pooled document
/// set, so an edge may join nodes of different slices when one slice's
/// document contains the other slice's keyword token.
pub fn build_cross_network(
    a: &SliceInput<'_>,
    b: &SliceInput<'_>,
    min_cooccur: u64,
) -> Result<KeywordGraph, NetgraphError> {
    let ids_a: HashSet<&str> = a.docs.iter().map(|d| d.doc_id.as_str()).collect();
    if let Some(dup) = b.docs.iter().find(|d| ids_a.contains(d.doc_id.as_str())) {
        return Err(NetgraphError::OverlappingSlices(dup.doc_id.clone()));
    }
    let nodes = collect_nodes(&[a, b])?;
    let edges = count_edges(&nodes, &[a, b], min_cooccur);
    Ok(KeywordGraph { nodes, edges })
}

/// Collect slice-tagged nodes from keyword lists. A token appearing in
/// several clusters of one slice keeps the highest-weight occurrence (ties
/// break toward the lower cluster index). Nodes are ordered by slice,
/// cluster, then token.
fn collect_nodes(inputs: &[&SliceInput<'_>]) -> Result<Vec<GraphNode>, NetgraphError> {
    let mut best: BTreeMap<(Slice, String), GraphNode> = BTreeMap::new();
    for input in inputs {
        for (&cluster, kws) in input.keywords {
            for kw in kws {
                if kw.weight <= 0.0 {
                    continue;
                }
                let key = (input.slice, kw.token.clone());
                let candidate = GraphNode {
                    token: kw.token.clone(),
                    cluster,
                    weight: kw.weight,
                    slice: input.slice,
                };
                match best.get(&key) {
                    Some(existing)
                        if existing.weight > candidate.weight
                            || (existing.weight == candidate.weight
                                && existing.cluster <= candidate.cluster) => {}
                    _ => {
                        best.insert(key, candidate);
                    }
                }
            }
        }
    }
    if best.is_empty() {
        return Err(NetgraphError::EmptyKeywordSet);
    }
    let mut nodes: Vec<GraphNode> = best.into_values().collect();
    nodes.sort_by(|a, b| {
        a.slice
            .cmp(&b.slice)
            .then(a.cluster.cmp(&b.cluster))
            .then(a.token.cmp(&b.token))
    });
    Ok(nodes)
}

/// Count document-level co-occurrences of node tokens over all documents of
/// the given inputs and keep pairs at or above the threshold. Edges are
/// ordered by their endpoints' node order.
fn count_edges(
    nodes: &[GraphNode],
    inputs: &[&SliceInput<'_>],
    min_cooccur: u64,
) -> Vec<GraphEdge> {
    let mut nodes_of_token: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        nodes_of_token.entry(n.token.as_str()).or_default().push(i);
    }

    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for input in inputs {
        for doc in input.docs {
            let token_set: HashSet<&str> = doc.tokens.iter().map(String::as_str).collect();
            let mut present: Vec<usize> = token_set
                .iter()
                .filter_map(|t| nodes_of_token.get(t))
                .flatten()
                .copied()
                .collect();
            present.sort_unstable();
            for (a, &i) in present.iter().enumerate() {
                for &j in &present[a + 1..] {
                    *counts.entry((i, j)).or_insert(0) += 1;
                }
            }
        }
    }

    counts
        .into_iter()
        .filter(|(_, c)| *c >= min_cooccur)
        .map(|((i, j), weight)| GraphEdge {
            u: nodes[i].id(),
            v: nodes[j].id(),
            weight,
        })
        .collect()
}

/// Export formats understood by [`export`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Graphml,
    Json,
    Dot,
}

/// Write the graph to `path`. Output is byte-deterministic.
pub fn export(
    graph: &KeywordGraph,
    format: ExportFormat,
    path: &Path,
) -> Result<(), NetgraphError> {
    let text = match format {
        ExportFormat::Graphml => to_graphml(graph),
        ExportFormat::Json => to_json(graph),
        ExportFormat::Dot => to_dot(graph),
    };
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn xml_unescape(s: &str) -> String {
    s.replace("&quot;", "\"")
        .replace("&gt;", ">")
        .replace("&lt;", "<")
        .replace("&amp;", "&")
}

/// GraphML with declared keys: node attributes `token` (string), `cluster`
/// (int), `weight` (double), `slice` (string) and edge attribute `weight`
/// (int).
pub fn to_graphml(graph: &KeywordGraph) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"token\" for=\"node\" attr.name=\"token\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"cluster\" for=\"node\" attr.name=\"cluster\" attr.type=\"int\"/>\n");
    out.push_str("  <key id=\"weight\" for=\"node\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    out.push_str("  <key id=\"slice\" for=\"node\" attr.name=\"slice\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"eweight\" for=\"edge\" attr.name=\"weight\" attr.type=\"int\"/>\n");
    out.push_str("  <graph id=\"keywords\" edgedefault=\"undirected\">\n");
    for n in &graph.nodes {
        out.push_str(&format!("    <node id=\"{}\">\n", xml_escape(&n.id())));
        out.push_str(&format!(
            "      <data key=\"token\">{}</data>\n",
            xml_escape(&n.token)
        ));
        out.push_str(&format!("      <data key=\"cluster\">{}</data>\n", n.cluster));
        out.push_str(&format!("      <data key=\"weight\">{}</data>\n", n.weight));
        out.push_str(&format!("      <data key=\"slice\">{}</data>\n", n.slice));
        out.push_str("    </node>\n");
    }
    for e in &graph.edges {
        out.push_str(&format!(
            "    <edge source=\"{}\" target=\"{}\">\n",
            xml_escape(&e.u),
            xml_escape(&e.v)
        ));
        out.push_str(&format!("      <data key=\"eweight\">{}</data>\n", e.weight));
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n");
    out.push_str("</graphml>\n");
    out
}

/// JSON export: `{"nodes": [{token, cluster, weight, slice}], "edges":
/// [{u, v, weight}]}`.
pub fn to_json(graph: &KeywordGraph) -> String {
    let mut text = serde_json::to_string_pretty(graph).expect("graph serializes");
    text.push('\n');
    text
}

/// DOT export with the edge weight doubling as `penwidth`.
pub fn to_dot(graph: &KeywordGraph) -> String {
    let mut out = String::from("graph keywords {\n");
    for n in &graph.nodes {
        out.push_str(&format!(
            "  \"{}\" [cluster={} weight={} slice=\"{}\"];\n",
            n.id(),
            n.cluster,
            n.weight,
            n.slice
        ));
    }
    for e in &graph.edges {
        out.push_str(&format!(
            "  \"{}\" -- \"{}\" [weight={w} penwidth={w}];\n",
            e.u,
            e.v,
            w = e.weight
        ));
    }
    out.push_str("}\n");
    out
}

/// Parse a GraphML document produced by [`to_graphml`]. This reader supports
/// exactly the subset that writer emits.
pub fn from_graphml(text: &str) -> Result<KeywordGraph, NetgraphError> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut lines = text.lines().peekable();

    fn attr(line: &str, name: &str) -> Option<String> {
        let pat = format!("{name}=\"");
        let start = line.find(&pat)? + pat.len();
        let end = start + line[start..].find('"')?;
        Some(xml_unescape(&line[start..end]))
    }
    fn data_value(line: &str, key: &str) -> Option<String> {
        let pat = format!("<data key=\"{key}\">");
        let start = line.find(&pat)? + pat.len();
        let end = start + line[start..].find("</data>")?;
        Some(xml_unescape(&line[start..end]))
    }
    let parse_err = |what: &str, line: &str| {
        NetgraphError::Parse(format!("expected {what} in {line:?}"))
    };

    while let Some(line) = lines.next() {
        let trimmed = line.trim_start();
        if trimmed.starts_with("<node ") {
            let mut token = None;
            let mut cluster = None;
            let mut weight = None;
            let mut slice = None;
            for data in lines.by_ref() {
                let data = data.trim_start();
                if data.starts_with("</node>") {
                    break;
                }
                if let Some(v) = data_value(data, "token") {
                    token = Some(v);
                } else if let Some(v) = data_value(data, "cluster") {
                    cluster =
                        Some(v.parse::<usize>().map_err(|e| {
                            NetgraphError::Parse(format!("cluster: {e}"))
                        })?);
                } else if let Some(v) = data_value(data, "weight") {
                    weight = Some(
                        v.parse::<f64>()
                            .map_err(|e| NetgraphError::Parse(format!("weight: {e}")))?,
                    );
                } else if let Some(v) = data_value(data, "slice") {
                    slice = Some(
                        Slice::parse(&v)
                            .ok_or_else(|| NetgraphError::Parse(format!("slice {v:?}")))?,
                    );
                }
            }
            nodes.push(GraphNode {
                token: token.ok_or_else(|| parse_err("token", line))?,
                cluster: cluster.ok_or_else(|| parse_err("cluster", line))?,
                weight: weight.ok_or_else(|| parse_err("weight", line))?,
                slice: slice.ok_or_else(|| parse_err("slice", line))?,
            });
        } else if trimmed.starts_with("<edge ") {
            let u = attr(trimmed, "source").ok_or_else(|| parse_err("source", line))?;
            let v = attr(trimmed, "target").ok_or_else(|| parse_err("target", line))?;
            let mut weight = None;
            for data in lines.by_ref() {
                let data = data.trim_start();
                if data.starts_with("</edge>") {
                    break;
                }
                if let Some(w) = data_value(data, "eweight") {
                    weight = Some(
                        w.parse::<u64>()
                            .map_err(|e| NetgraphError::Parse(format!("eweight: {e}")))?,
                    );
                }
            }
            edges.push(GraphEdge {
                u,
                v,
                weight: weight.ok_or_else(|| parse_err("eweight", line))?,
            });
        }
    }
    Ok(KeywordGraph { nodes, edges })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, tokens: &[&str]) -> TokenDoc {
        TokenDoc {
            doc_id: id.to_string(),
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn keywords(entries: &[(usize, &[(&str, f64)])]) -> BTreeMap<usize, Vec<KeywordWeight>> {
        entries
            .iter()
            .map(|(c, kws)| {
                (
                    *c,
                    kws.iter()
                        .map(|(t, w)| KeywordWeight {
                            token: t.to_string(),
                            weight: *w,
                        })
                        .collect(),
                )
            })
            .collect()
    }

    #[test]
    fn direct_cooccurrence_count() {
        let docs = vec![
            doc("d0", &["art", "design", "studio"]),
            doc("d1", &["art", "design"]),
        ];
        let kws = keywords(&[(0, &[("art", 1.5), ("design", 1.0)])]);
        let input = SliceInput {
            slice: Slice::Art,
            docs: &docs,
            keywords: &kws,
        };
        let graph = build_network(&input, 2).unwrap();
        assert_eq!(graph.nodes.len(), 2);
        assert_eq!(graph.edges.len(), 1);
        assert_eq!(
            graph.edges[0],
            GraphEdge {
                u: "art@art".into(),
                v: "design@art".into(),
                weight: 2
            }
        );
    }

    #[test]
    fn disjoint_documents_give_isolated_nodes() {
        let docs = vec![doc("d0", &["art"]), doc("d1", &["design"])];
        let kws = keywords(&[(0, &[("art", 1.0), ("design", 1.0)])]);
        let input = SliceInput {
            slice: Slice::Art,
            docs: &docs,
            keywords: &kws,
        };
        let graph = build_network(&input, 1).unwrap();
        assert_eq!(graph.nodes.len(), 2);
        assert!(graph.edges.is_empty());
        assert_eq!(graph.connection_count(), 0);
    }

    #[test]
    fn eight_doc_fixture_matches_brute_force() {
        let docs = vec![
            doc("d0", &["art", "design", "color"]),
            doc("d1", &["art", "color"]),
            doc("d2", &["design", "studio"]),
            doc("d3", &["art", "design", "studio", "color"]),
            doc("d4", &["studio"]),
            doc("d5", &["color", "studio"]),
            doc("d6", &["art"]),
            doc("d7", &["design", "color", "art"]),
        ];
        let kws = keywords(&[
            (0, &[("art", 2.0), ("color", 1.2)]),
            (1, &[("design", 1.8), ("studio", 0.9)]),
        ]);
        let input = SliceInput {
            slice: Slice::Art,
            docs: &docs,
            keywords: &kws,
        };
        let graph = build_network(&input, 1).unwrap();

        // Brute-force double loop over token pairs and documents.
        let tokens = ["art", "color", "design", "studio"];
        let mut expected = Vec::new();
        for a in 0..tokens.len() {
            for b in (a + 1)..tokens.len() {
                let count = docs
                    .iter()
                    .filter(|d| {
                        d.tokens.iter().any(|t| t == tokens[a])
                            && d.tokens.iter().any(|t| t == tokens[b])
                    })
                    .count() as u64;
                if count >= 1 {
                    expected.push((tokens[a], tokens[b], count));
                }
            }
        }
        assert_eq!(graph.edges.len(), expected.len());
        for (u, v, w) in expected {
            let found = graph.edges.iter().find(|e| {
                (e.u == format!("{u}@art") && e.v == format!("{v}@art"))
                    || (e.u == format!("{v}@art") && e.v == format!("{u}@art"))
            });
            assert_eq!(found.map(|e| e.weight), Some(w), "pair {u},{v}");
        }
    }

    #[test]
    fn zero_weight_keywords_are_dropped_and_empty_set_errors() {
        let docs = vec![doc("d0", &["art"])];
        let kws = keywords(&[(0, &[("art", 0.0)])]);
        let input = SliceInput {
            slice: Slice::Art,
            docs: &docs,
            keywords: &kws,
        };
        assert!(matches!(
            build_network(&input, 1),
            Err(NetgraphError::EmptyKeywordSet)
        ));
    }

    #[test]
    fn duplicate_token_across_clusters_keeps_best_weight() {
        let docs = vec![doc("d0", &["art"])];
        let kws = keywords(&[(0, &[("art", 1.0)]), (1, &[("art", 2.5)])]);
        let input = SliceInput {
            slice: Slice::Art,
            docs: &docs,
            keywords: &kws,
        };
        let graph = build_network(&input, 1).unwrap();
        assert_eq!(graph.nodes.len(), 1);
        assert_eq!(graph.nodes[0].cluster, 1);
        assert_eq!(graph.nodes[0].weight, 2.5);
    }

    #[test]
    fn cross_network_keeps_slices_distinct() {
        let docs_a = vec![doc("a0", &["art", "data"])];
        let docs_b = vec![doc("b0", &["data", "model"])];
        let kws_a = keywords(&[(0, &[("art", 1.0), ("data", 0.5)])]);
        let kws_b = keywords(&[(0, &[("data", 0.8), ("model", 1.1)])]);
        let a = SliceInput {
            slice: Slice::AiArt,
            docs: &docs_a,
            keywords: &kws_a,
        };
        let b = SliceInput {
            slice: Slice::Other,
            docs: &docs_b,
            keywords: &kws_b,
        };
        let graph = build_cross_network(&a, &b, 1).unwrap();
        // "data" is a keyword of both slices: two distinct nodes.
        let data_nodes: Vec<_> = graph.nodes.iter().filter(|n| n.token == "data").collect();
        assert_eq!(data_nodes.len(), 2);
        assert!(data_nodes.iter().any(|n| n.slice == Slice::AiArt));
        assert!(data_nodes.iter().any(|n| n.slice == Slice::Other));
        // Doc a0 contains data -> both data@ai_art and data@other present in
        // it, along with art@ai_art; doc b0 likewise.
        assert!(graph
            .edges
            .iter()
            .any(|e| e.u == "data@ai_art" && e.v == "data@other"));
    }

    #[test]
    fn cross_network_inter_slice_count_on_crafted_fixture() {
        // Exactly 3 inter-slice pairs co-occur:
        //   a0 contains art (a-keyword) and robot (b-keyword)
        //   a1 contains art and sensor (b-keyword)
        //   b0 contains robot and paint (a-keyword)
        let docs_a = vec![
            doc("a0", &["art", "robot"]),
            doc("a1", &["art", "sensor"]),
        ];
        let docs_b = vec![doc("b0", &["robot", "paint"]), doc("b1", &["sensor"])];
        let kws_a = keywords(&[(0, &[("art", 1.0), ("paint", 0.7)])]);
        let kws_b = keywords(&[(0, &[("robot", 1.3), ("sensor", 0.6)])]);
        let a = SliceInput {
            slice: Slice::Art,
            docs: &docs_a,
            keywords: &kws_a,
        };
        let b = SliceInput {
            slice: Slice::Other,
            docs: &docs_b,
            keywords: &kws_b,
        };
        let graph = build_cross_network(&a, &b, 1).unwrap();
        assert_eq!(graph.inter_slice_connections(), 3);
        assert_eq!(
            graph.connection_count(),
            graph.inter_slice_connections() + graph.intra_slice_connections()
        );
    }

    #[test]
    fn cross_network_with_empty_second_slice_equals_single_network() {
        let docs_a = vec![doc("a0", &["art", "design"]), doc("a1", &["art", "design"])];
        let kws_a = keywords(&[(0, &[("art", 1.0), ("design", 0.9)])]);
        let empty_docs: Vec<TokenDoc> = Vec::new();
        let empty_kws = BTreeMap::new();
        let a = SliceInput {
            slice: Slice::Art,
            docs: &docs_a,
            keywords: &kws_a,
        };
        let b = SliceInput {
            slice: Slice::Other,
            docs: &empty_docs,
            keywords: &empty_kws,
        };
        assert_eq!(
            build_cross_network(&a, &b, 1).unwrap(),
            build_network(&a, 1).unwrap()
        );
    }

    #[test]
    fn overlapping_slices_rejected() {
        let docs = vec![doc("shared", &["art"])];
        let kws = keywords(&[(0, &[("art", 1.0)])]);
        let a = SliceInput {
            slice: Slice::Art,
            docs: &docs,
            keywords: &kws,
        };
        let b = SliceInput {
            slice: Slice::Other,
            docs: &docs,
            keywords: &kws,
        };
        assert!(matches!(
            build_cross_network(&a, &b, 1),
            Err(NetgraphError::OverlappingSlices(id)) if id == "shared"
        ));
    }

    #[test]
    fn graph_construction_invariant_to_document_order() {
        let mut docs = vec![
            doc("d0", &["art", "design"]),
            doc("d1", &["design", "studio"]),
            doc("d2", &["art", "studio"]),
        ];
        let kws = keywords(&[(0, &[("art", 1.0), ("design", 0.9), ("studio", 0.8)])]);
        let forward = build_network(
            &SliceInput {
                slice: Slice::Art,
                docs: &docs,
                keywords: &kws,
            },
            1,
        )
        .unwrap();
        docs.reverse();
        let backward = build_network(
            &SliceInput {
                slice: Slice::Art,
                docs: &docs,
                keywords: &kws,
            },
            1,
        )
        .unwrap();
        assert_eq!(forward, backward);
    }

    fn sample_graph() -> KeywordGraph {
        let docs = vec![
            doc("d0", &["art", "design", "color"]),
            doc("d1", &["art", "design"]),
            doc("d2", &["color", "design"]),
        ];
        let kws = keywords(&[
            (0, &[("art", 2.1972245773362196), ("color", 1.5)]),
            (1, &[("design", 0.75)]),
        ]);
        build_network(
            &SliceInput {
                slice: Slice::AiArt,
                docs: &docs,
                keywords: &kws,
            },
            1,
        )
        .unwrap()
    }

    #[test]
    fn empty_graph_exports_valid_graphml() {
        let graph = KeywordGraph::default();
        let xml = to_graphml(&graph);
        assert!(xml.contains("<graphml"));
        assert!(!xml.contains("<node"));
        let parsed = from_graphml(&xml).unwrap();
        assert_eq!(parsed, graph);
    }

    #[test]
    fn export_is_byte_deterministic() {
        let graph = sample_graph();
        assert_eq!(to_graphml(&graph), to_graphml(&graph));
        assert_eq!(to_json(&graph), to_json(&graph));
        assert_eq!(to_dot(&graph), to_dot(&graph));
    }

    #[test]
    fn graphml_round_trip_is_exact_and_a_fixed_point() {
        let graph = sample_graph();
        let xml = to_graphml(&graph);
        let parsed = from_graphml(&xml).unwrap();
        assert_eq!(parsed, graph);
        assert_eq!(to_graphml(&parsed), xml);
    }

    #[test]
    fn export_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let graph = sample_graph();
        for (format, name) in [
            (ExportFormat::Graphml, "g.graphml"),
            (ExportFormat::Json, "g.json"),
            (ExportFormat::Dot, "g.dot"),
        ] {
            let path = dir.path().join(name);
            export(&graph, format, &path).unwrap();
            assert!(std::fs::metadata(&path).unwrap().len() > 0);
        }
        let json = std::fs::read_to_string(dir.path().join("g.json")).unwrap();
        let parsed: KeywordGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, graph);
    }
}
