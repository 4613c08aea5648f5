//! Resistive networks with fixed-voltage and floating nodes, solved by
//! nodal analysis.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_finite, Error, Result};

pub type NodeId = usize;
pub type BranchId = usize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    /// Driven by an ideal voltage source.
    Fixed(f64),
    /// Unknown potential; no external current injected.
    Floating,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub a: NodeId,
    pub b: NodeId,
    pub resistance: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResistiveNetwork {
    nodes: Vec<Node>,
    branches: Vec<Branch>,
}

impl ResistiveNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_fixed(&mut self, name: impl Into<String>, voltage: f64) -> NodeId {
        self.push_node(name.into(), NodeKind::Fixed(voltage))
    }

    pub fn add_floating(&mut self, name: impl Into<String>) -> NodeId {
        self.push_node(name.into(), NodeKind::Floating)
    }

    fn push_node(&mut self, name: String, kind: NodeKind) -> NodeId {
        self.nodes.push(Node { name, kind });
        self.nodes.len() - 1
    }

    pub fn add_branch(&mut self, a: NodeId, b: NodeId, resistance: f64) -> Result<BranchId> {
        if a >= self.nodes.len() || b >= self.nodes.len() {
            return Err(Error::InvalidInput(format!("branch {a}-{b} references a missing node")));
        }
        if a == b {
            return Err(Error::InvalidInput(format!("self-loop on node {}", self.nodes[a].name)));
        }
        ensure_finite("resistance", resistance)?;
        if resistance <= 0.0 {
            return Err(Error::InvalidInput(format!("resistance must be positive, got {resistance}")));
        }
        self.branches.push(Branch { a, b, resistance });
        Ok(self.branches.len() - 1)
    }

    /// Chain of `segments` equal resistors from `a` to `b` totalling `resistance`.
    pub fn add_segmented(
        &mut self,
        a: NodeId,
        b: NodeId,
        resistance: f64,
        segments: usize,
        prefix: &str,
    ) -> Result<()> {
        if segments == 0 {
            return Err(Error::InvalidInput("segment count must be positive".into()));
        }
        let r = resistance / segments as f64;
        let mut prev = a;
        for k in 1..segments {
            let n = self.add_floating(format!("{prefix}{k}"));
            self.add_branch(prev, n, r)?;
            prev = n;
        }
        self.add_branch(prev, b, r)?;
        Ok(())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// One branch per line: `node_a node_b resistance`.
    pub fn netlist(&self) -> String {
        let mut out = String::new();
        for b in &self.branches {
            let _ = writeln!(out, "{} {} {:.6e}", self.nodes[b.a].name, self.nodes[b.b].name, b.resistance);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    pub voltages: Vec<f64>,
    /// Branch currents, positive from `a` to `b`.
    pub currents: Vec<f64>,
}

impl NetworkSolution {
    /// Net current leaving `node` through its branches.
    pub fn outflow(&self, net: &ResistiveNetwork, node: NodeId) -> f64 {
        net.branches
            .iter()
            .zip(&self.currents)
            .map(|(b, &i)| {
                if b.a == node {
                    i
                } else if b.b == node {
                    -i
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Total current delivered by all sources.
    pub fn driven_current(&self, net: &ResistiveNetwork) -> f64 {
        let total: f64 = net
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| matches!(n.kind, NodeKind::Fixed(_)))
            .map(|(k, _)| self.outflow(net, k).abs())
            .sum();
        total / 2.0
    }

    /// Worst current imbalance over floating nodes relative to the driven current.
    pub fn max_relative_residual(&self, net: &ResistiveNetwork) -> f64 {
        let scale = self.driven_current(net);
        let worst = net
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == NodeKind::Floating)
            .map(|(k, _)| self.outflow(net, k).abs())
            .fold(0.0, f64::max);
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

fn check_connectivity(net: &ResistiveNetwork) -> Result<()> {
    let n = net.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for b in &net.branches {
        adj[b.a].push(b.b);
        adj[b.b].push(b.a);
    }
    let mut seen = vec![false; n];
    let mut queue: VecDeque<NodeId> = net
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, node)| matches!(node.kind, NodeKind::Fixed(_)))
        .map(|(k, _)| k)
        .collect();
    if queue.is_empty() {
        return Err(Error::SingularNetwork("no fixed-voltage node".into()));
    }
    for &k in &queue {
        seen[k] = true;
    }
    while let Some(k) = queue.pop_front() {
        for &j in &adj[k] {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::SingularNetwork(format!(
            "node {} has no path to a driven node",
            net.nodes[k].name
        )));
    }
    Ok(())
}

/// Nodal analysis over the floating nodes: G·v = b, dense LU plus one step of
/// iterative refinement. Potentials are solved relative to the first fixed
/// node so that equal source voltages give exactly zero current.
pub fn solve_network(net: &ResistiveNetwork) -> Result<NetworkSolution> {
    check_connectivity(net)?;
    let v_ref = net
        .nodes
        .iter()
        .find_map(|n| match n.kind {
            NodeKind::Fixed(v) => Some(v),
            NodeKind::Floating => None,
        })
        .unwrap_or(0.0);
    let mut index = vec![usize::MAX; net.nodes.len()];
    let mut voltages = vec![0.0; net.nodes.len()];
    let mut unknowns = 0;
    for (k, node) in net.nodes.iter().enumerate() {
        match node.kind {
            NodeKind::Fixed(v) => {
                ensure_finite("node voltage", v)?;
                voltages[k] = v - v_ref;
            }
            NodeKind::Floating => {
                index[k] = unknowns;
                unknowns += 1;
            }
        }
    }
    if unknowns > 0 {
        let mut g = DMatrix::<f64>::zeros(unknowns, unknowns);
        let mut rhs = DVector::<f64>::zeros(unknowns);
        for b in &net.branches {
            let y = 1.0 / b.resistance;
            let (ia, ib) = (index[b.a], index[b.b]);
            match (ia != usize::MAX, ib != usize::MAX) {
                (true, true) => {
                    g[(ia, ia)] += y;
                    g[(ib, ib)] += y;
                    g[(ia, ib)] -= y;
                    g[(ib, ia)] -= y;
                }
                (true, false) => {
                    g[(ia, ia)] += y;
                    rhs[ia] += y * voltages[b.b];
                }
                (false, true) => {
                    g[(ib, ib)] += y;
                    rhs[ib] += y * voltages[b.a];
                }
                (false, false) => {}
            }
        }
        let lu = g.clone().lu();
        let mut x =
            lu.solve(&rhs).ok_or_else(|| Error::SingularNetwork("singular conductance matrix".into()))?;
        let r = &rhs - &g * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularNetwork("non-finite node voltage".into()));
        }
        for (k, &i) in index.iter().enumerate() {
            if i != usize::MAX {
                voltages[k] = x[i];
            }
        }
    }
    let currents = net.branches.iter().map(|b| (voltages[b.a] - voltages[b.b]) / b.resistance).collect();
    for (v, node) in voltages.iter_mut().zip(&net.nodes) {
        *v = match node.kind {
            NodeKind::Fixed(fixed) => fixed,
            NodeKind::Floating => *v + v_ref,
        };
    }
    Ok(NetworkSolution { voltages, currents })
}
