//! Transport network model: directed graph, latency functions, OD demands,
//! explicit path sets, path flows, path costs `G(x)` and the congestion
//! potential `Ψ(x) = Σ_e ∫_0^{f_e(x)} τ_e(z) dz` whose gradient in path
//! coordinates is exactly `G(x)`.
//!
//! Networks are immutable after load; every operation here is a pure
//! function of `(network, x)` and safe to call from any thread.

use crate::simplex::ProductSimplex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on OD block sums of a path flow.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("malformed document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("duplicate edge id {0:?}")]
    DuplicateEdge(String),
    #[error("edge {edge:?} references unknown node {node:?}")]
    UnknownNode { edge: String, node: String },
    #[error("edge {0:?} is a self-loop")]
    SelfLoop(String),
    #[error("edge {edge:?}: {reason}")]
    BadCost { edge: String, reason: String },
    #[error("od pair {index}: demand must be positive (got {demand})")]
    NonpositiveDemand { index: usize, demand: f64 },
    #[error("od pair {index}: origin and destination coincide")]
    DegenerateOd { index: usize },
    #[error("od pair {index} references unknown node {node:?}")]
    UnknownOdNode { index: usize, node: String },
    #[error("path {index}: od index {od} out of range")]
    PathOdOutOfRange { index: usize, od: usize },
    #[error("path {index} references unknown edge {edge:?}")]
    UnknownPathEdge { index: usize, edge: String },
    #[error("path {index} is empty")]
    EmptyPath { index: usize },
    #[error("path {index} is not connected tail-to-head or does not join its od pair")]
    BrokenPath { index: usize },
    #[error("path {index} has {len} edges, exceeding max_path_edges = {max}")]
    PathTooLong { index: usize, len: usize, max: usize },
    #[error("od pair {od} has duplicate paths")]
    DuplicatePath { od: usize },
    #[error("od pair {od} has no path (within {max} edges)")]
    NoPath { od: usize, max: usize },
    #[error("max_path_edges must be at least 1")]
    BadPathBound,
    #[error("flow has {got} entries, network has {expected} paths")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("flow coordinate {index} is negative ({value})")]
    NegativeFlow { index: usize, value: f64 },
    #[error("od block {od} carries {sum}, demand is {demand} (tolerance {tol})")]
    InfeasibleFlow {
        od: usize,
        sum: f64,
        demand: f64,
        tol: f64,
    },
}

/// Edge latency as a function of edge flow. All kinds are nondecreasing and
/// bounded on `[0, f_max]` because their parameters are nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CostFunction {
    /// `τ(f) = c`
    Constant { c: f64 },
    /// `τ(f) = a + b f`
    Affine { a: f64, b: f64 },
    /// `τ(f) = t0 (1 + coeff (f / cap)^power)`
    Bpr {
        t0: f64,
        cap: f64,
        coeff: f64,
        power: f64,
    },
}

impl CostFunction {
    pub fn value(&self, f: f64) -> f64 {
        match *self {
            CostFunction::Constant { c } => c,
            CostFunction::Affine { a, b } => a + b * f,
            CostFunction::Bpr {
                t0,
                cap,
                coeff,
                power,
            } => t0 * (1.0 + coeff * (f / cap).powf(power)),
        }
    }

    /// Antiderivative `∫_0^f τ(z) dz` in closed form.
    pub fn integral(&self, f: f64) -> f64 {
        match *self {
            CostFunction::Constant { c } => c * f,
            CostFunction::Affine { a, b } => a * f + 0.5 * b * f * f,
            CostFunction::Bpr {
                t0,
                cap,
                coeff,
                power,
            } => t0 * f + t0 * coeff * f.powf(power + 1.0) / ((power + 1.0) * cap.powf(power)),
        }
    }

    fn validate(&self) -> Result<(), String> {
        let bad = |name: &str, v: f64| format!("{name} = {v} is out of range");
        match *self {
            CostFunction::Constant { c } => {
                if !(c >= 0.0) {
                    return Err(bad("c", c));
                }
            }
            CostFunction::Affine { a, b } => {
                if !(a >= 0.0) {
                    return Err(bad("a", a));
                }
                if !(b >= 0.0) {
                    return Err(bad("b", b));
                }
            }
            CostFunction::Bpr {
                t0,
                cap,
                coeff,
                power,
            } => {
                if !(t0 > 0.0) {
                    return Err(bad("t0", t0));
                }
                if !(cap > 0.0) {
                    return Err(bad("cap", cap));
                }
                if !(coeff >= 0.0) {
                    return Err(bad("coeff", coeff));
                }
                if !(power >= 1.0) {
                    return Err(bad("power", power));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub cost: CostFunction,
}

#[derive(Debug, Clone)]
pub struct OdPair {
    pub origin: usize,
    pub destination: usize,
    pub demand: f64,
}

/// One route: the OD block it belongs to and its edge index sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub od: usize,
    pub edges: Vec<usize>,
}

/// Worst-case constants derived from the loaded network.
#[derive(Debug, Clone, Serialize)]
pub struct DerivedBounds {
    /// `max_e τ_e(f_max)` with `f_max` the total demand.
    pub edge_cost_bound: f64,
    /// `edge_cost_bound · L` with `L` the longest path length.
    pub path_cost_bound: f64,
    /// `path_cost_bound · √m` — bound on the dual norm of `G(x)`.
    pub gradient_bound: f64,
    /// `Σ_j d_j² ln n_j`.
    pub entropy_radius_sq: f64,
    /// True when every OD pair has a single path, making the geometry trivial.
    pub degenerate: bool,
}

/// Nonnegative path flow, block-partitioned by OD pair, each block summing
/// to its demand. Construct through [`Network::feasible_flow`] (which
/// renormalises block sums within tolerance) or [`Network::feasible_uniform`].
#[derive(Debug, Clone, PartialEq)]
pub struct PathFlow {
    values: Vec<f64>,
}

impl PathFlow {
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Index<usize> for PathFlow {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    nodes: Vec<String>,
    edges: Vec<EdgeDoc>,
    od_pairs: Vec<OdDoc>,
    #[serde(default)]
    paths: Option<Vec<PathDoc>>,
    #[serde(default)]
    max_path_edges: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: String,
    tail: String,
    head: String,
    cost: CostFunction,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OdDoc {
    origin: String,
    destination: String,
    demand: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PathDoc {
    od: usize,
    edges: Vec<String>,
}

/// Immutable transport network with explicit, block-partitioned path sets.
#[derive(Debug, Clone)]
pub struct Network {
    node_names: Vec<String>,
    edges: Vec<Edge>,
    od_pairs: Vec<OdPair>,
    paths: Vec<Path>,
    /// `block_offsets[j] .. block_offsets[j+1]` indexes the paths of OD pair j.
    block_offsets: Vec<usize>,
    /// Longest path length actually present (the constant `L`).
    max_path_edges: usize,
}

impl Network {
    /// Parses and validates a JSON network document. Paths are taken from the
    /// document when present (explicit lists win) and enumerated by bounded
    /// simple-path DFS otherwise.
    pub fn from_json(doc: &str) -> Result<Self, NetworkError> {
        let doc: NetworkDoc = serde_json::from_str(doc)?;
        Self::build(doc)
    }

    fn build(doc: NetworkDoc) -> Result<Self, NetworkError> {
        let mut node_index = std::collections::HashMap::new();
        for (i, name) in doc.nodes.iter().enumerate() {
            if node_index.insert(name.clone(), i).is_some() {
                return Err(NetworkError::DuplicateNode(name.clone()));
            }
        }
        let lookup = |edge: &str, node: &str| -> Result<usize, NetworkError> {
            node_index
                .get(node)
                .copied()
                .ok_or_else(|| NetworkError::UnknownNode {
                    edge: edge.to_string(),
                    node: node.to_string(),
                })
        };

        let mut edges = Vec::with_capacity(doc.edges.len());
        let mut edge_index = std::collections::HashMap::new();
        for e in &doc.edges {
            if edge_index.insert(e.id.clone(), edges.len()).is_some() {
                return Err(NetworkError::DuplicateEdge(e.id.clone()));
            }
            let tail = lookup(&e.id, &e.tail)?;
            let head = lookup(&e.id, &e.head)?;
            if tail == head {
                return Err(NetworkError::SelfLoop(e.id.clone()));
            }
            e.cost.validate().map_err(|reason| NetworkError::BadCost {
                edge: e.id.clone(),
                reason,
            })?;
            edges.push(Edge {
                id: e.id.clone(),
                tail,
                head,
                cost: e.cost.clone(),
            });
        }

        let mut od_pairs = Vec::with_capacity(doc.od_pairs.len());
        for (index, od) in doc.od_pairs.iter().enumerate() {
            if !(od.demand > 0.0) {
                return Err(NetworkError::NonpositiveDemand {
                    index,
                    demand: od.demand,
                });
            }
            let origin = node_index.get(&od.origin).copied().ok_or_else(|| {
                NetworkError::UnknownOdNode {
                    index,
                    node: od.origin.clone(),
                }
            })?;
            let destination = node_index.get(&od.destination).copied().ok_or_else(|| {
                NetworkError::UnknownOdNode {
                    index,
                    node: od.destination.clone(),
                }
            })?;
            if origin == destination {
                return Err(NetworkError::DegenerateOd { index });
            }
            od_pairs.push(OdPair {
                origin,
                destination,
                demand: od.demand,
            });
        }

        if doc.max_path_edges == Some(0) {
            return Err(NetworkError::BadPathBound);
        }

        let paths = match doc.paths {
            Some(list) => {
                let mut blocks: Vec<Vec<Path>> = vec![Vec::new(); od_pairs.len()];
                for (index, p) in list.iter().enumerate() {
                    if p.od >= od_pairs.len() {
                        return Err(NetworkError::PathOdOutOfRange {
                            index,
                            od: p.od,
                        });
                    }
                    if p.edges.is_empty() {
                        return Err(NetworkError::EmptyPath { index });
                    }
                    if let Some(max) = doc.max_path_edges {
                        if p.edges.len() > max {
                            return Err(NetworkError::PathTooLong {
                                index,
                                len: p.edges.len(),
                                max,
                            });
                        }
                    }
                    let mut ids = Vec::with_capacity(p.edges.len());
                    for id in &p.edges {
                        let ei = edge_index.get(id).copied().ok_or_else(|| {
                            NetworkError::UnknownPathEdge {
                                index,
                                edge: id.clone(),
                            }
                        })?;
                        ids.push(ei);
                    }
                    let od = &od_pairs[p.od];
                    let connected = edges[ids[0]].tail == od.origin
                        && edges[*ids.last().unwrap()].head == od.destination
                        && ids.windows(2).all(|w| edges[w[0]].head == edges[w[1]].tail);
                    if !connected {
                        return Err(NetworkError::BrokenPath { index });
                    }
                    blocks[p.od].push(Path {
                        od: p.od,
                        edges: ids,
                    });
                }
                for (od, block) in blocks.iter().enumerate() {
                    if block.is_empty() {
                        return Err(NetworkError::NoPath { od, max: usize::MAX });
                    }
                    for (a, pa) in block.iter().enumerate() {
                        if block[..a].iter().any(|pb| pb.edges == pa.edges) {
                            return Err(NetworkError::DuplicatePath { od });
                        }
                    }
                }
                blocks.into_iter().flatten().collect()
            }
            None => {
                let max = match doc.max_path_edges {
                    Some(m) => m,
                    None => doc.nodes.len().saturating_sub(1).max(1),
                };
                enumerate_all_paths(&edges, &od_pairs, doc.nodes.len(), max)?
            }
        };

        let mut block_offsets = vec![0; od_pairs.len() + 1];
        for p in &paths {
            block_offsets[p.od + 1] += 1;
        }
        for j in 0..od_pairs.len() {
            block_offsets[j + 1] += block_offsets[j];
        }
        let max_path_edges = paths.iter().map(|p| p.edges.len()).max().unwrap_or(1);

        Ok(Network {
            node_names: doc.nodes,
            edges,
            od_pairs,
            paths,
            block_offsets,
            max_path_edges,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn node_name(&self, i: usize) -> &str {
        &self.node_names[i]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn od_pairs(&self) -> &[OdPair] {
        &self.od_pairs
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn num_od_pairs(&self) -> usize {
        self.od_pairs.len()
    }

    /// Paths of OD pair `j` as an index range into [`Network::paths`].
    pub fn block_range(&self, j: usize) -> std::ops::Range<usize> {
        self.block_offsets[j]..self.block_offsets[j + 1]
    }

    /// Longest path length present — the constant `L`.
    pub fn max_path_edges(&self) -> usize {
        self.max_path_edges
    }

    pub fn total_demand(&self) -> f64 {
        self.od_pairs.iter().map(|od| od.demand).sum()
    }

    /// The feasible set of path flows as a product of scaled simplexes.
    pub fn simplex(&self) -> ProductSimplex {
        let blocks: Vec<(usize, f64)> = (0..self.num_od_pairs())
            .map(|j| (self.block_range(j).len(), self.od_pairs[j].demand))
            .collect();
        ProductSimplex::new(&blocks).expect("validated network yields a valid product")
    }

    /// Worst-case cost and geometry constants for this network.
    pub fn derived_bounds(&self) -> DerivedBounds {
        let f_max = self.total_demand();
        let edge_cost_bound = self
            .edges
            .iter()
            .map(|e| e.cost.value(f_max))
            .fold(0.0, f64::max);
        let path_cost_bound = edge_cost_bound * self.max_path_edges as f64;
        let m = self.num_od_pairs() as f64;
        let q = self.simplex();
        DerivedBounds {
            edge_cost_bound,
            path_cost_bound,
            gradient_bound: path_cost_bound * m.sqrt(),
            entropy_radius_sq: q.entropy_radius_sq(),
            degenerate: q.is_degenerate(),
        }
    }

    /// Validates a raw vector as a path flow and renormalises each block sum
    /// onto its demand exactly.
    pub fn feasible_flow(&self, values: Vec<f64>) -> Result<PathFlow, NetworkError> {
        let mut values = values;
        self.check_feasible(&values)?;
        for j in 0..self.num_od_pairs() {
            let range = self.block_range(j);
            let sum: f64 = values[range.clone()].iter().sum();
            let scale = self.od_pairs[j].demand / sum;
            for i in range {
                values[i] *= scale;
            }
        }
        Ok(PathFlow { values })
    }

    /// Checks nonnegativity and block sums within [`FEASIBILITY_TOL`].
    pub fn check_feasible(&self, values: &[f64]) -> Result<(), NetworkError> {
        if values.len() != self.num_paths() {
            return Err(NetworkError::DimensionMismatch {
                expected: self.num_paths(),
                got: values.len(),
            });
        }
        for (index, &v) in values.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(NetworkError::NegativeFlow { index, value: v });
            }
        }
        for j in 0..self.num_od_pairs() {
            let sum: f64 = values[self.block_range(j)].iter().sum();
            let demand = self.od_pairs[j].demand;
            if (sum - demand).abs() > FEASIBILITY_TOL {
                return Err(NetworkError::InfeasibleFlow {
                    od: j,
                    sum,
                    demand,
                    tol: FEASIBILITY_TOL,
                });
            }
        }
        Ok(())
    }

    /// The interior starting point: block `j` uniform at `d_j / n_j`.
    pub fn feasible_uniform(&self) -> PathFlow {
        PathFlow {
            values: self.simplex().uniform(),
        }
    }

    /// Edge loads `f_e(x) = Σ_p δ_ep x_p`. Panics on dimension mismatch.
    pub fn edge_flows(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.num_paths(), "flow dimension mismatch");
        let mut f = vec![0.0; self.edges.len()];
        for (p, path) in self.paths.iter().enumerate() {
            for &e in &path.edges {
                f[e] += x[p];
            }
        }
        f
    }

    /// Path costs `G_p(x) = Σ_e τ_e(f_e(x)) δ_ep`.
    pub fn path_costs(&self, x: &[f64]) -> Vec<f64> {
        let f = self.edge_flows(x);
        let tau: Vec<f64> = self
            .edges
            .iter()
            .zip(&f)
            .map(|(e, &fe)| e.cost.value(fe))
            .collect();
        self.paths
            .iter()
            .map(|path| path.edges.iter().map(|&e| tau[e]).sum())
            .collect()
    }

    /// The congestion potential `Ψ(x) = Σ_e ∫_0^{f_e(x)} τ_e`.
    pub fn potential(&self, x: &[f64]) -> f64 {
        let f = self.edge_flows(x);
        self.edges
            .iter()
            .zip(&f)
            .map(|(e, &fe)| e.cost.integral(fe))
            .sum()
    }

    /// `∇Ψ(x)`, which coincides with [`Network::path_costs`]. Kept as a named
    /// operation so the identity is independently testable against finite
    /// differences of the potential.
    pub fn potential_gradient(&self, x: &[f64]) -> Vec<f64> {
        self.path_costs(x)
    }
}

/// All simple directed paths (no repeated node) of at most `max_edges` edges
/// for every OD pair, emitted in lexicographic edge-id order.
fn enumerate_all_paths(
    edges: &[Edge],
    od_pairs: &[OdPair],
    num_nodes: usize,
    max_edges: usize,
) -> Result<Vec<Path>, NetworkError> {
    if max_edges == 0 {
        return Err(NetworkError::BadPathBound);
    }
    // outgoing edge indices per node, sorted by edge id
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&a, &b| edges[a].id.cmp(&edges[b].id));
    for &e in &order {
        adjacency[edges[e].tail].push(e);
    }

    let mut all = Vec::new();
    for (od, pair) in od_pairs.iter().enumerate() {
        let mut visited = vec![false; num_nodes];
        let mut stack = Vec::new();
        let mut block = Vec::new();
        visited[pair.origin] = true;
        dfs(
            edges,
            &adjacency,
            pair.destination,
            max_edges,
            pair.origin,
            &mut visited,
            &mut stack,
            &mut |path: &[usize]| {
                block.push(Path {
                    od,
                    edges: path.to_vec(),
                })
            },
        );
        if block.is_empty() {
            return Err(NetworkError::NoPath { od, max: max_edges });
        }
        all.extend(block);
    }
    Ok(all)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    edges: &[Edge],
    adjacency: &[Vec<usize>],
    destination: usize,
    budget: usize,
    node: usize,
    visited: &mut Vec<bool>,
    stack: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if budget == 0 {
        return;
    }
    for &e in &adjacency[node] {
        let head = edges[e].head;
        if visited[head] {
            continue;
        }
        stack.push(e);
        if head == destination {
            emit(stack);
        } else {
            visited[head] = true;
            dfs(
                edges, adjacency, destination, budget - 1, head, visited, stack, emit,
            );
            visited[head] = false;
        }
        stack.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PIGOU: &str = include_str!("../../../fixtures/pigou.json");
    const BRAESS: &str = include_str!("../../../fixtures/braess.json");

    #[test]
    fn pigou_loads_with_two_single_edge_paths() {
        let net = Network::from_json(PIGOU).unwrap();
        assert_eq!(net.num_od_pairs(), 1);
        assert_eq!(net.num_paths(), 2);
        assert_eq!(net.max_path_edges(), 1);
        // lexicographic edge-id order puts the constant edge first
        assert_eq!(net.paths()[0].edges, vec![0]);
        assert_eq!(net.paths()[1].edges, vec![1]);
        let b = net.derived_bounds();
        assert_eq!(b.edge_cost_bound, 1.0);
        assert_eq!(b.path_cost_bound, 1.0);
        assert_eq!(b.gradient_bound, 1.0);
        assert!((b.entropy_radius_sq - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(!b.degenerate);
    }

    #[test]
    fn negative_demand_is_rejected() {
        let doc = PIGOU.replace("\"demand\": 1.0", "\"demand\": -1.0");
        let err = Network::from_json(&doc).unwrap_err();
        assert!(err.to_string().contains("demand must be positive"));
    }

    #[test]
    fn braess_enumerates_three_paths() {
        let net = Network::from_json(BRAESS).unwrap();
        assert_eq!(net.num_paths(), 3);
        assert_eq!(net.max_path_edges(), 3);
        let ids: Vec<Vec<&str>> = net
            .paths()
            .iter()
            .map(|p| p.edges.iter().map(|&e| net.edges()[e].id.as_str()).collect())
            .collect();
        // lexicographic order over edge-id sequences: zigzag, top, bottom
        assert_eq!(ids, vec![vec!["sa", "ab", "bt"], vec!["sa", "at"], vec!["sb", "bt"]]);
        let b = net.derived_bounds();
        assert_eq!(b.path_cost_bound, 3.0);
    }

    #[test]
    fn braess_with_two_edge_bound_drops_the_zigzag() {
        let doc = BRAESS.replace("\"max_path_edges\": 3", "\"max_path_edges\": 2");
        let net = Network::from_json(&doc).unwrap();
        assert_eq!(net.num_paths(), 2);
        assert_eq!(net.max_path_edges(), 2);
    }

    #[test]
    fn explicit_paths_win_over_enumeration() {
        let doc = PIGOU.replace(
            "\"od_pairs\"",
            "\"paths\": [{\"od\": 0, \"edges\": [\"e2\"]}], \"od_pairs\"",
        );
        let net = Network::from_json(&doc).unwrap();
        assert_eq!(net.num_paths(), 1);
        assert_eq!(net.paths()[0].edges, vec![1]);
        assert!(net.derived_bounds().degenerate);
    }

    #[test]
    fn broken_and_duplicate_paths_are_rejected() {
        let broken = PIGOU
            .replace("\"max_path_edges\": 1", "\"max_path_edges\": 3")
            .replace(
                "\"od_pairs\"",
                "\"paths\": [{\"od\": 0, \"edges\": [\"e1\", \"e2\"]}], \"od_pairs\"",
            );
        assert!(matches!(
            Network::from_json(&broken),
            Err(NetworkError::BrokenPath { .. })
        ));
        let long = PIGOU.replace(
            "\"od_pairs\"",
            "\"paths\": [{\"od\": 0, \"edges\": [\"e1\", \"e2\"]}], \"od_pairs\"",
        );
        assert!(matches!(
            Network::from_json(&long),
            Err(NetworkError::PathTooLong { len: 2, max: 1, .. })
        ));
        let dup = PIGOU.replace(
            "\"od_pairs\"",
            "\"paths\": [{\"od\": 0, \"edges\": [\"e1\"]}, {\"od\": 0, \"edges\": [\"e1\"]}], \"od_pairs\"",
        );
        assert!(matches!(
            Network::from_json(&dup),
            Err(NetworkError::DuplicatePath { od: 0 })
        ));
    }

    #[test]
    fn unknown_node_and_self_loop_are_rejected() {
        let unknown = PIGOU.replace("\"head\": \"t\"", "\"head\": \"x\"");
        assert!(matches!(
            Network::from_json(&unknown),
            Err(NetworkError::UnknownNode { .. })
        ));
        let self_loop = PIGOU.replace(
            "{ \"id\": \"e1\", \"tail\": \"s\", \"head\": \"t\"",
            "{ \"id\": \"e1\", \"tail\": \"s\", \"head\": \"s\"",
        );
        assert!(matches!(
            Network::from_json(&self_loop),
            Err(NetworkError::SelfLoop(_))
        ));
    }

    #[test]
    fn bad_cost_parameters_are_rejected() {
        let doc = PIGOU.replace("\"b\": 1.0", "\"b\": -1.0");
        assert!(matches!(
            Network::from_json(&doc),
            Err(NetworkError::BadCost { .. })
        ));
    }

    #[test]
    fn pigou_edge_flows_are_the_identity() {
        let net = Network::from_json(PIGOU).unwrap();
        assert_eq!(net.edge_flows(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(net.edge_flows(&[0.0, 1.0]), vec![0.0, 1.0]);
    }

    #[test]
    fn braess_shared_edges_accumulate() {
        let net = Network::from_json(BRAESS).unwrap();
        // x = (zigzag, top, bottom) = (1/3, 1/3, 1/3)
        let f = net.edge_flows(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        let by_id: std::collections::HashMap<&str, f64> = net
            .edges()
            .iter()
            .zip(&f)
            .map(|(e, &v)| (e.id.as_str(), v))
            .collect();
        assert!((by_id["sa"] - 2.0 / 3.0).abs() < 1e-15);
        assert!((by_id["bt"] - 2.0 / 3.0).abs() < 1e-15);
        assert!((by_id["ab"] - 1.0 / 3.0).abs() < 1e-15);
        assert!((by_id["at"] - 1.0 / 3.0).abs() < 1e-15);
        assert!((by_id["sb"] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    #[should_panic(expected = "flow dimension mismatch")]
    fn edge_flows_panics_on_dimension_mismatch() {
        let net = Network::from_json(PIGOU).unwrap();
        net.edge_flows(&[1.0]);
    }

    #[test]
    fn pigou_path_costs_match_hand_values() {
        let net = Network::from_json(PIGOU).unwrap();
        let g = net.path_costs(&[0.5, 0.5]);
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert!((g[1] - 0.5).abs() < 1e-15);
        let g = net.path_costs(&[0.0, 1.0]);
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert!((g[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_costs_charge_edge_counts() {
        let doc = r#"{
            "nodes": ["s", "m", "t"],
            "edges": [
                {"id": "a", "tail": "s", "head": "m", "cost": {"kind": "constant", "c": 0.25}},
                {"id": "b", "tail": "m", "head": "t", "cost": {"kind": "constant", "c": 0.25}},
                {"id": "c", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 0.25}}
            ],
            "od_pairs": [{"origin": "s", "destination": "t", "demand": 2.0}]
        }"#;
        let net = Network::from_json(doc).unwrap();
        let x = net.feasible_uniform();
        let g = net.path_costs(x.as_slice());
        let lens: Vec<usize> = net.paths().iter().map(|p| p.edges.len()).collect();
        for (gp, len) in g.iter().zip(lens) {
            assert!((gp - 0.25 * len as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn pigou_potential_closed_forms() {
        let net = Network::from_json(PIGOU).unwrap();
        assert!((net.potential(&[0.5, 0.5]) - 0.625).abs() < 1e-15);
        assert!((net.potential(&[0.0, 1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_od_list_gives_zero_potential() {
        let doc = r#"{
            "nodes": ["s", "t"],
            "edges": [{"id": "e", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 1.0}}],
            "od_pairs": []
        }"#;
        let net = Network::from_json(doc).unwrap();
        assert_eq!(net.num_paths(), 0);
        assert_eq!(net.potential(&[]), 0.0);
    }

    #[test]
    fn gradient_is_path_costs() {
        let net = Network::from_json(BRAESS).unwrap();
        let x = net.feasible_uniform();
        assert_eq!(net.potential_gradient(x.as_slice()), net.path_costs(x.as_slice()));
    }

    #[test]
    fn uniform_start_values() {
        let net = Network::from_json(PIGOU).unwrap();
        assert_eq!(net.feasible_uniform().as_slice(), &[0.5, 0.5]);
        let net = Network::from_json(BRAESS).unwrap();
        let u = net.feasible_uniform();
        for &v in u.as_slice() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_path_block_gets_full_demand() {
        let doc = r#"{
            "nodes": ["s", "t"],
            "edges": [{"id": "e", "tail": "s", "head": "t", "cost": {"kind": "constant", "c": 1.0}}],
            "od_pairs": [{"origin": "s", "destination": "t", "demand": 3.5}]
        }"#;
        let net = Network::from_json(doc).unwrap();
        assert_eq!(net.feasible_uniform().as_slice(), &[3.5]);
    }

    #[test]
    fn feasible_flow_renormalises_within_tolerance() {
        let net = Network::from_json(PIGOU).unwrap();
        let x = net.feasible_flow(vec![0.25, 0.75 + 4e-10]).unwrap();
        let sum: f64 = x.as_slice().iter().sum();
        assert_eq!(sum, 1.0);
        assert!(matches!(
            net.feasible_flow(vec![0.25, 0.80]),
            Err(NetworkError::InfeasibleFlow { .. })
        ));
        assert!(matches!(
            net.feasible_flow(vec![-0.1, 1.1]),
            Err(NetworkError::NegativeFlow { .. })
        ));
    }

    #[test]
    fn bpr_cost_value_and_integral() {
        let cost = CostFunction::Bpr {
            t0: 2.0,
            cap: 4.0,
            coeff: 0.15,
            power: 4.0,
        };
        let f = 3.0;
        let v = 2.0 * (1.0 + 0.15 * (3.0f64 / 4.0).powi(4));
        assert!((cost.value(f) - v).abs() < 1e-14);
        let integral = 2.0 * 3.0 + 2.0 * 0.15 * 3.0f64.powi(5) / (5.0 * 4.0f64.powi(4));
        assert!((cost.integral(f) - integral).abs() < 1e-14);
    }
}
