//! Toy tensor-network accounting: two-site contraction, bond capacity,
//! collapse propagation over bonds and the geometric entanglement-flux laws.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use thiserror::Error;

use crate::units::C;

pub const DEFAULT_D_PHYS: usize = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BondError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("unknown node '{0}'")]
    UnknownNode(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub d_phys: usize,
    pub position: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bond {
    pub a: String,
    pub b: String,
    pub chi: u64,
}

/// Immutable network of nodes joined by bonds of dimension `chi`.
#[derive(Debug, Clone)]
pub struct BondNetwork {
    nodes: Vec<Node>,
    bonds: Vec<Bond>,
    index: HashMap<String, usize>,
}

impl BondNetwork {
    pub fn new(nodes: Vec<Node>, bonds: Vec<Bond>) -> Result<Self, BondError> {
        if nodes.is_empty() {
            return Err(BondError::Invalid("at least one node required".into()));
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if n.d_phys < 2 {
                return Err(BondError::Invalid(format!("node '{}' has d_phys {} < 2", n.id, n.d_phys)));
            }
            if let Some(p) = n.position {
                if p.iter().any(|x| !x.is_finite()) {
                    return Err(BondError::Invalid(format!("node '{}' has a non-finite position", n.id)));
                }
            }
            if index.insert(n.id.clone(), i).is_some() {
                return Err(BondError::Invalid(format!("duplicate node '{}'", n.id)));
            }
        }
        for b in &bonds {
            for end in [&b.a, &b.b] {
                if !index.contains_key(end) {
                    return Err(BondError::UnknownNode(end.clone()));
                }
            }
            if b.a == b.b {
                return Err(BondError::Invalid(format!("self-loop on '{}'", b.a)));
            }
            if b.chi < 1 {
                return Err(BondError::Invalid(format!("bond {}-{} has chi 0", b.a, b.b)));
            }
        }
        Ok(Self { nodes, bonds, index })
    }

    /// Nodes `0..n` with the default physical dimension and no positions.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u64)]) -> Result<Self, BondError> {
        let nodes = (0..n)
            .map(|i| Node {
                id: i.to_string(),
                d_phys: DEFAULT_D_PHYS,
                position: None,
            })
            .collect();
        let bonds = edges
            .iter()
            .map(|&(a, b, chi)| Bond {
                a: a.to_string(),
                b: b.to_string(),
                chi,
            })
            .collect();
        Self::new(nodes, bonds)
    }

    /// Line format: `node <id> [x y z]` and `bond <id1> <id2> <chi>`.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, BondError> {
        let mut nodes = Vec::new();
        let mut bonds = Vec::new();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| BondError::Parse { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            match toks[0] {
                "node" => {
                    let position = match toks.len() {
                        2 => None,
                        5 => {
                            let mut p = [0.0; 3];
                            for (k, t) in toks[2..].iter().enumerate() {
                                p[k] = t
                                    .parse::<f64>()
                                    .ok()
                                    .filter(|x| x.is_finite())
                                    .ok_or_else(|| err(format!("bad coordinate '{t}'")))?;
                            }
                            Some(p)
                        }
                        _ => return Err(err("expected `node <id> [x y z]`".into())),
                    };
                    if let Some(prev) = seen.insert(toks[1].to_string(), line) {
                        return Err(err(format!("node '{}' already declared on line {prev}", toks[1])));
                    }
                    nodes.push(Node {
                        id: toks[1].to_string(),
                        d_phys: DEFAULT_D_PHYS,
                        position,
                    });
                }
                "bond" => {
                    if toks.len() != 4 {
                        return Err(err("expected `bond <id1> <id2> <chi>`".into()));
                    }
                    let chi: u64 = toks[3]
                        .parse()
                        .ok()
                        .filter(|&c| c >= 1)
                        .ok_or_else(|| err(format!("chi must be an integer >= 1, got '{}'", toks[3])))?;
                    for id in &toks[1..3] {
                        if !seen.contains_key(*id) {
                            return Err(err(format!("bond references undeclared node '{id}'")));
                        }
                    }
                    if toks[1] == toks[2] {
                        return Err(err(format!("self-loop on '{}'", toks[1])));
                    }
                    bonds.push(Bond {
                        a: toks[1].to_string(),
                        b: toks[2].to_string(),
                        chi,
                    });
                }
                other => return Err(err(format!("unknown directive '{other}'"))),
            }
        }
        if nodes.is_empty() {
            return Err(BondError::Parse {
                line: text.lines().count().max(1),
                message: "no nodes declared".into(),
            });
        }
        Self::new(nodes, bonds)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    /// Disjoint union; ids of `other` are prefixed to stay unique.
    pub fn disjoint_union(&self, other: &BondNetwork, prefix: &str) -> Result<Self, BondError> {
        let rename = |id: &str| format!("{prefix}{id}");
        let mut nodes = self.nodes.clone();
        nodes.extend(other.nodes.iter().map(|n| Node {
            id: rename(&n.id),
            ..n.clone()
        }));
        let mut bonds = self.bonds.clone();
        bonds.extend(other.bonds.iter().map(|b| Bond {
            a: rename(&b.a),
            b: rename(&b.b),
            chi: b.chi,
        }));
        Self::new(nodes, bonds)
    }

    fn graph(&self, weight: impl Fn(u64) -> f64) -> UnGraph<(), f64> {
        let mut g = UnGraph::with_capacity(self.nodes.len(), self.bonds.len());
        for _ in &self.nodes {
            g.add_node(());
        }
        for b in &self.bonds {
            g.add_edge(
                NodeIndex::new(self.index[&b.a]),
                NodeIndex::new(self.index[&b.b]),
                weight(b.chi),
            );
        }
        g
    }
}

impl fmt::Display for BondNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nodes {
            match n.position {
                Some([x, y, z]) => writeln!(f, "node {} {x} {y} {z}", n.id)?,
                None => writeln!(f, "node {}", n.id)?,
            }
        }
        for b in &self.bonds {
            writeln!(f, "bond {} {} {}", b.a, b.b, b.chi)?;
        }
        Ok(())
    }
}

/// Two site tensors `X[alpha][j]`, `Y[beta][j]` sharing an internal leg.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteState {
    pub x: Vec<Vec<Complex64>>,
    pub y: Vec<Vec<Complex64>>,
}

impl TwoSiteState {
    pub fn chi(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }
}

/// `amp[alpha][beta] = sum_j X[alpha][j] Y[beta][j]`, optionally scaled to
/// unit 2-norm.
pub fn contract_two_site(state: &TwoSiteState, normalize: bool) -> Result<Vec<Vec<Complex64>>, BondError> {
    let chi = state.chi();
    if chi == 0 || state.y.is_empty() {
        return Err(BondError::Shape("empty tensor".into()));
    }
    if let Some(row) = state.x.iter().chain(&state.y).find(|r| r.len() != chi) {
        return Err(BondError::Shape(format!("internal leg length {} != {chi}", row.len())));
    }
    let mut amp: Vec<Vec<Complex64>> = state
        .x
        .iter()
        .map(|xa| {
            state
                .y
                .iter()
                .map(|yb| xa.iter().zip(yb).map(|(p, q)| p * q).sum())
                .collect()
        })
        .collect();
    if normalize {
        let norm = amp.iter().flatten().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(BondError::Shape("amplitude table has zero norm".into()));
        }
        amp.iter_mut().flatten().for_each(|a| *a /= norm);
    }
    Ok(amp)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity {
    pub bond_count: usize,
    pub total_log2_chi: f64,
}

impl Capacity {
    /// Model mass-energy `k * total_log2_chi`.
    pub fn model_energy(&self, k: f64) -> f64 {
        k * self.total_log2_chi
    }
}

pub fn entanglement_capacity(net: &BondNetwork) -> Capacity {
    Capacity {
        bond_count: net.bonds.len(),
        total_log2_chi: net.bonds.iter().map(|b| (b.chi as f64).log2()).sum(),
    }
}

/// Per-bond update delay as a function of `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DelayPolicy {
    /// `tau_b * log2(max(chi, 2))`
    #[default]
    Log2Chi,
    /// `tau_b * chi`
    LinearChi,
    /// `tau_b`
    Constant,
}

impl DelayPolicy {
    pub fn delay(self, tau_b: f64, chi: u64) -> f64 {
        match self {
            DelayPolicy::Log2Chi => tau_b * (chi.max(2) as f64).log2(),
            DelayPolicy::LinearChi => tau_b * chi as f64,
            DelayPolicy::Constant => tau_b,
        }
    }
}

pub fn collapse_propagation_time(net: &BondNetwork, source: &str, tau_b: f64) -> Result<f64, BondError> {
    collapse_propagation_time_with(net, source, tau_b, DelayPolicy::default())
}

/// Weighted eccentricity of `source`: the longest shortest-path delay to any
/// reachable node. Unreachable components are ignored.
pub fn collapse_propagation_time_with(
    net: &BondNetwork,
    source: &str,
    tau_b: f64,
    policy: DelayPolicy,
) -> Result<f64, BondError> {
    if !(tau_b > 0.0 && tau_b.is_finite()) {
        return Err(BondError::Domain(format!("tau_b must be positive, got {tau_b}")));
    }
    let &src = net
        .index
        .get(source)
        .ok_or_else(|| BondError::UnknownNode(source.to_string()))?;
    let g = net.graph(|chi| policy.delay(tau_b, chi));
    let dist = dijkstra(&g, NodeIndex::new(src), None, |e| *e.weight());
    Ok(dist.values().copied().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxGeometry {
    AreaLaw2d,
    Volume3d,
}

/// Bond flux density through a circle (`B / 2 pi r`) or sphere (`B / 4 pi r^2`).
pub fn entanglement_flux(bonds: f64, r: f64, geometry: FluxGeometry) -> Result<f64, BondError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(BondError::Domain(format!("radius must be positive, got {r}")));
    }
    if !(bonds >= 0.0 && bonds.is_finite()) {
        return Err(BondError::Domain(format!("bond count must be >= 0, got {bonds}")));
    }
    Ok(match geometry {
        FluxGeometry::AreaLaw2d => bonds / (2.0 * PI * r),
        FluxGeometry::Volume3d => bonds / (4.0 * PI * r * r),
    })
}

/// `V(r) = b M c^2 / r`, joules.
pub fn effective_potential(b: f64, mass: f64, r: f64) -> Result<f64, BondError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(BondError::Domain(format!("radius must be positive, got {r}")));
    }
    Ok(b * mass * C * C / r)
}
