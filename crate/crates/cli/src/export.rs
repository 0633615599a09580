//! On-disk graph schema and the JSON/DOT/CSV writers.
//!
//! Every float that leaves the process is first rounded to 12 significant
//! digits, so repeated runs produce byte-identical files and JSON survives
//! a parse round trip bit for bit. Edges refer to nodes by index into the
//! `nodes` array. Files are written to a temporary sibling and renamed
//! into place, never partially.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use cvcluster_core::{ClusterGraph, EdgeWeights, Lattice, ModeId};

use crate::config::CliError;

/// 12 significant digits, scientific: the export precision everywhere.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// Nearest f64 to the 12-digit decimal form of `x`.
pub fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().expect("formatted float parses back")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRec {
    pub spatial: String,
    pub freq: i32,
    pub time: i32,
}

impl NodeRec {
    fn from_mode(m: ModeId) -> Self {
        NodeRec { spatial: m.spatial.to_string(), freq: m.freq, time: m.time }
    }

    /// Short unique name, matching the in-crate mode display.
    pub fn name(&self) -> String {
        if self.time == 0 {
            format!("{}{}", self.spatial, self.freq)
        } else {
            format!("{}{}k{}", self.spatial, self.freq, self.time)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRec {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacronodeRec {
    pub members: [usize; 2],
}

/// A value that is one number under a fixed pump and one number per bin
/// under a schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrPerBin {
    Scalar(f64),
    PerBin(Vec<f64>),
}

impl ScalarOrPerBin {
    fn collapse(values: Vec<f64>) -> Self {
        match values.split_first() {
            Some((first, rest)) if rest.iter().all(|v| v == first) => ScalarOrPerBin::Scalar(*first),
            _ => ScalarOrPerBin::PerBin(values),
        }
    }
}

/// Edge-weight palette: scalars for a fixed pump, aligned per-bin arrays
/// for a scheduled one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsMeta {
    Scalar { a: f64, b: f64, c: f64, d: f64, r: f64 },
    PerBin { bins: Vec<i32>, a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, d: Vec<f64>, r: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub theta1: ScalarOrPerBin,
    pub theta2: ScalarOrPerBin,
    pub p1: i32,
    pub p2: i32,
    pub weights: WeightsMeta,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window: Option<[i32; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bins: Option<[i32; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bulk_components: Option<usize>,
}

/// The one graph schema both wire and lattice commands emit; lattice
/// output adds the macronode grouping and range/component metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub nodes: Vec<NodeRec>,
    pub edges: Vec<EdgeRec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub macronodes: Option<Vec<MacronodeRec>>,
    pub meta: Meta,
}

fn node_records(graph: &ClusterGraph) -> (Vec<NodeRec>, Vec<EdgeRec>) {
    let modes = graph.nodes();
    let nodes = modes.iter().map(|&m| NodeRec::from_mode(m)).collect();
    let edges = graph
        .edges()
        .iter()
        .map(|e| EdgeRec {
            u: modes.binary_search(&e.u).expect("edge endpoint is a node"),
            v: modes.binary_search(&e.v).expect("edge endpoint is a node"),
            weight: round_sig(e.weight),
        })
        .collect();
    (nodes, edges)
}

pub fn wire_graph_file(graph: &ClusterGraph, weights: &EdgeWeights, p1: i32, p2: i32) -> GraphFile {
    let (nodes, edges) = node_records(graph);
    GraphFile {
        nodes,
        edges,
        macronodes: None,
        meta: Meta {
            theta1: ScalarOrPerBin::Scalar(round_sig(weights.theta1)),
            theta2: ScalarOrPerBin::Scalar(round_sig(weights.theta2)),
            p1,
            p2,
            weights: WeightsMeta::Scalar {
                a: round_sig(weights.a),
                b: round_sig(weights.b),
                c: round_sig(weights.c),
                d: round_sig(weights.d),
                r: round_sig(weights.r),
            },
            window: None,
            bins: None,
            bulk_components: None,
        },
    }
}

pub fn lattice_graph_file(lat: &Lattice, p1: i32, p2: i32) -> GraphFile {
    let (nodes, edges) = node_records(&lat.graph);
    let modes = lat.graph.nodes();
    let macronodes = lat
        .macronodes
        .iter()
        .map(|mn| MacronodeRec {
            members: mn.members().map(|m| modes.binary_search(&m).expect("member is a node")),
        })
        .collect();

    let per_bin: Vec<i32> = lat.bin_weights.iter().map(|bw| bw.bin).collect();
    let pick = |f: fn(&EdgeWeights) -> f64| -> Vec<f64> {
        lat.bin_weights.iter().map(|bw| round_sig(f(&bw.weights))).collect()
    };
    let theta1 = ScalarOrPerBin::collapse(pick(|w| w.theta1));
    let theta2 = ScalarOrPerBin::collapse(pick(|w| w.theta2));
    let a = pick(|w| w.a);
    let b = pick(|w| w.b);
    let c = pick(|w| w.c);
    let d = pick(|w| w.d);
    let r = pick(|w| w.r);
    let constant = [&a, &b, &c, &d, &r]
        .iter()
        .all(|vals| vals.windows(2).all(|pair| pair[0] == pair[1]));
    let weights = if constant && !a.is_empty() {
        WeightsMeta::Scalar { a: a[0], b: b[0], c: c[0], d: d[0], r: r[0] }
    } else {
        WeightsMeta::PerBin { bins: per_bin, a, b, c, d, r }
    };

    GraphFile {
        nodes,
        edges,
        macronodes: Some(macronodes),
        meta: Meta {
            theta1,
            theta2,
            p1,
            p2,
            weights,
            window: Some([lat.window.n_min(), lat.window.n_max()]),
            bins: Some([lat.bins.lo(), lat.bins.hi()]),
            bulk_components: Some(lat.bulk_graph().connected_components().len()),
        },
    }
}

pub fn to_json(g: &GraphFile) -> String {
    let mut s = serde_json::to_string_pretty(g).expect("graph schema serializes");
    s.push('\n');
    s
}

/// Undirected DOT mirror of the JSON schema: one quoted node statement
/// per line, macronodes as cluster subgraphs, weights as 4-decimal edge
/// labels.
pub fn to_dot(g: &GraphFile) -> String {
    let mut out = String::from("graph cluster {\n");
    let grouped: Vec<usize> = g
        .macronodes
        .iter()
        .flatten()
        .flat_map(|m| m.members)
        .collect();
    for (i, node) in g.nodes.iter().enumerate() {
        if !grouped.contains(&i) {
            out.push_str(&format!("  \"{}\";\n", node.name()));
        }
    }
    for (j, mac) in g.macronodes.iter().flatten().enumerate() {
        let lead = &g.nodes[mac.members[0]];
        out.push_str(&format!("  subgraph cluster_{j} {{\n"));
        out.push_str(&format!("    label=\"n={} k={}\";\n", lead.freq, lead.time));
        for &i in &mac.members {
            out.push_str(&format!("    \"{}\";\n", g.nodes[i].name()));
        }
        out.push_str("  }\n");
    }
    for edge in &g.edges {
        out.push_str(&format!(
            "  \"{}\" -- \"{}\" [label=\"{:.4}\"];\n",
            g.nodes[edge.u].name(),
            g.nodes[edge.v].name(),
            edge.weight,
        ));
    }
    out.push_str("}\n");
    out
}

/// Write to `path`, or stdout when there is none. File writes go through
/// a temp file in the destination directory plus an atomic rename.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        print!("{content}");
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path.display(), e))?;
    tmp.write_all(content.as_bytes()).map_err(|e| CliError::io(path.display(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path.display(), e))?;
    Ok(())
}
