//! Dependency graph over items and the `Qed` gate.
//!
//! An item depends on every other item (or allowed axiom) whose name occurs
//! as an identifier in its statement or proof, comments excluded. A `Qed`
//! proof only counts as fully proved when everything it transitively
//! depends on is proved or whitelisted in the axiom index.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::devfile::{DevFile, Item, ItemKind, ProofStatus, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DepGraphError {
    #[error("dependency cycle through {}", .0.join(" -> "))]
    DependencyCycle(Vec<String>),
    #[error("axiom index line {line}: {reason}")]
    BadIndexEntry { line: usize, reason: String },
}

/// Whitelist of statements treated as proved, by name or by the SHA-256 of
/// their canonical statement.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomIndex {
    names: BTreeSet<String>,
    hashes: BTreeSet<String>,
}

impl AxiomIndex {
    /// One entry per line: `<name>` or `sha256:<hex>`. Blank lines and
    /// `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self, DepGraphError> {
        let mut index = AxiomIndex::default();
        for (n, raw) in text.lines().enumerate() {
            let entry = raw.split('#').next().unwrap_or("").trim();
            if entry.is_empty() {
                continue;
            }
            let bad = |reason: &str| DepGraphError::BadIndexEntry { line: n + 1, reason: reason.to_string() };
            if let Some(hex) = entry.strip_prefix("sha256:") {
                if hex.len() != 64 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
                    return Err(bad("expected 64 hex digits after `sha256:`"));
                }
                index.hashes.insert(hex.to_ascii_lowercase());
            } else if entry.contains(char::is_whitespace) {
                return Err(bad("names cannot contain whitespace"));
            } else {
                index.names.insert(entry.to_string());
            }
        }
        Ok(index)
    }

    pub fn from_names<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        AxiomIndex { names: names.into_iter().map(Into::into).collect(), hashes: BTreeSet::new() }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    pub fn add_name(&mut self, name: &str) {
        self.names.insert(name.to_string());
    }

    pub fn add_hash(&mut self, hex: &str) {
        self.hashes.insert(hex.to_ascii_lowercase());
    }

    pub fn allows_name(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    pub fn allows(&self, item: &Item) -> bool {
        self.allows_name(&item.name) || (!self.hashes.is_empty() && self.hashes.contains(&statement_hash(item)))
    }
}

/// Hex SHA-256 of an item's canonical statement.
pub fn statement_hash(item: &Item) -> String {
    hex::encode(Sha256::digest(item.statement_text.as_bytes()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProofClass {
    /// `Qed` with every transitive dependency proved or allowed.
    FullyProved,
    /// `Qed`-shaped proof whose closure still contains an unproved node;
    /// the checker requires it to be stored as `Admitted`.
    AdmittedClosure,
    Admitted,
    Open,
}

impl fmt::Display for ProofClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProofClass::FullyProved => "FullyProved",
            ProofClass::AdmittedClosure => "AdmittedClosure",
            ProofClass::Admitted => "Admitted",
            ProofClass::Open => "Open",
        })
    }
}

/// What the gate needs to know about one node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Qed,
    Admitted,
    Open,
    /// Definitions carry no proof and never block.
    Definition,
    /// Listed in the axiom index.
    Allowed,
    /// An axiom missing from the index.
    Axiom,
}

impl NodeStatus {
    fn is_sound(self) -> bool {
        matches!(self, NodeStatus::Qed | NodeStatus::Definition | NodeStatus::Allowed)
    }

    pub fn of(item: &Item, index: &AxiomIndex) -> Self {
        if index.allows(item) {
            return NodeStatus::Allowed;
        }
        match (item.kind, item.proof_status) {
            (ItemKind::Definition, _) => NodeStatus::Definition,
            (ItemKind::Axiom, _) => NodeStatus::Axiom,
            (_, ProofStatus::Qed) => NodeStatus::Qed,
            (_, ProofStatus::Admitted) => NodeStatus::Admitted,
            (_, ProofStatus::Open) => NodeStatus::Open,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepGraph {
    /// Item names in file order, followed by index-only axiom names.
    pub nodes: Vec<String>,
    /// `deps[u]` lists the nodes `u` uses, sorted and deduplicated.
    pub deps: Vec<Vec<usize>>,
    pub status: Vec<NodeStatus>,
    index: HashMap<String, usize>,
}

impl DepGraph {
    /// Build from explicit nodes and `(user, used)` edges.
    pub fn from_edges(nodes: Vec<(String, NodeStatus)>, edges: &[(usize, usize)]) -> Self {
        let index = nodes.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();
        let mut deps = vec![Vec::new(); nodes.len()];
        for &(u, v) in edges {
            if u != v {
                deps[u].push(v);
            }
        }
        for d in &mut deps {
            d.sort_unstable();
            d.dedup();
        }
        let (nodes, status) = nodes.into_iter().unzip();
        DepGraph { nodes, deps, status, index }
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.deps
            .iter()
            .enumerate()
            .flat_map(move |(u, vs)| vs.iter().map(move |&v| (self.nodes[u].as_str(), self.nodes[v].as_str())))
    }

    pub fn dependencies(&self, name: &str) -> Vec<&str> {
        self.node(name)
            .map(|u| self.deps[u].iter().map(|&v| self.nodes[v].as_str()).collect())
            .unwrap_or_default()
    }

    /// Nodes in dependency-first order, or the first cycle found.
    fn topo_order(&self) -> Result<Vec<usize>, DepGraphError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let n = self.nodes.len();
        let mut mark = vec![Mark::New; n];
        let mut order = Vec::with_capacity(n);
        for root in 0..n {
            if mark[root] != Mark::New {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
            mark[root] = Mark::Active;
            while let Some(&mut (u, ref mut next)) = stack.last_mut() {
                if let Some(&v) = self.deps[u].get(*next) {
                    *next += 1;
                    match mark[v] {
                        Mark::New => {
                            mark[v] = Mark::Active;
                            stack.push((v, 0));
                        }
                        Mark::Active => {
                            let from = stack.iter().position(|&(w, _)| w == v).expect("active node is on the stack");
                            let mut cycle: Vec<String> = stack[from..].iter().map(|&(w, _)| self.nodes[w].clone()).collect();
                            cycle.push(self.nodes[v].clone());
                            return Err(DepGraphError::DependencyCycle(cycle));
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[u] = Mark::Done;
                    order.push(u);
                    stack.pop();
                }
            }
        }
        Ok(order)
    }

    /// Classify every node.
    pub fn classify(&self) -> Result<BTreeMap<String, ProofClass>, DepGraphError> {
        let order = self.topo_order()?;
        // tainted[u]: some node strictly below u is unsound.
        let mut tainted = vec![false; self.nodes.len()];
        for &u in &order {
            tainted[u] = self.deps[u].iter().any(|&v| tainted[v] || !self.status[v].is_sound());
        }
        Ok(self
            .nodes
            .iter()
            .enumerate()
            .map(|(u, name)| {
                let class = match self.status[u] {
                    NodeStatus::Qed | NodeStatus::Definition if tainted[u] => ProofClass::AdmittedClosure,
                    NodeStatus::Qed | NodeStatus::Definition | NodeStatus::Allowed => ProofClass::FullyProved,
                    NodeStatus::Admitted | NodeStatus::Axiom => ProofClass::Admitted,
                    NodeStatus::Open => ProofClass::Open,
                };
                (name.clone(), class)
            })
            .collect())
    }
}

/// Build the dependency graph of a development.
pub fn build_graph(file: &DevFile, allowed: &AxiomIndex) -> DepGraph {
    let mut nodes: Vec<(String, NodeStatus)> =
        file.items.iter().map(|i| (i.name.clone(), NodeStatus::of(i, allowed))).collect();
    let item_names: BTreeSet<&str> = file.items.iter().map(|i| i.name.as_str()).collect();
    for extra in allowed.names().filter(|n| !item_names.contains(n)) {
        nodes.push((extra.to_string(), NodeStatus::Allowed));
    }
    let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, (n, _))| (n.as_str(), i)).collect();
    let mut edges = Vec::new();
    for (u, item) in file.items.iter().enumerate() {
        for t in item.statement_tokens.iter().chain(&item.proof_tokens) {
            if t.kind != TokenKind::Identifier {
                continue;
            }
            if let Some(&v) = index.get(t.text.as_str()) {
                edges.push((u, v));
            }
        }
    }
    DepGraph::from_edges(nodes, &edges)
}

/// Classify every item of a development.
pub fn classify(graph: &DepGraph) -> Result<BTreeMap<String, ProofClass>, DepGraphError> {
    graph.classify()
}

/// Items stored with `Qed` whose closure is not fully proved.
pub fn gate_violations(classes: &BTreeMap<String, ProofClass>) -> Vec<&str> {
    classes
        .iter()
        .filter(|(_, c)| **c == ProofClass::AdmittedClosure)
        .map(|(n, _)| n.as_str())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    pub name: String,
    pub length: usize,
    pub class: ProofClass,
}

/// One row per theorem or lemma, longest normalized proof first.
pub fn report_table(file: &DevFile, graph: &DepGraph) -> Result<Vec<TableRow>, DepGraphError> {
    let classes = graph.classify()?;
    let mut rows: Vec<TableRow> = file
        .items
        .iter()
        .filter(|i| i.kind.has_proof())
        .map(|i| TableRow { name: i.name.clone(), length: i.normalized_proof_length(), class: classes[&i.name] })
        .collect();
    rows.sort_by(|a, b| b.length.cmp(&a.length).then_with(|| a.name.cmp(&b.name)));
    Ok(rows)
}

/// Keep rows strictly longer than `min_length`, optionally of one class.
pub fn select_rows(rows: Vec<TableRow>, min_length: usize, class: Option<ProofClass>) -> Vec<TableRow> {
    rows.into_iter()
        .filter(|r| r.length > min_length && class.is_none_or(|c| r.class == c))
        .collect()
}

/// `name,length,class` CSV with header.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["name", "length", "class"]).expect("in-memory write");
    for r in rows {
        w.write_record([r.name.as_str(), &r.length.to_string(), &r.class.to_string()]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}
