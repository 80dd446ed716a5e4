//! Structure dependence graph: one vertex per statement, control edges from a
//! statement's direct control parent and data edges from the last definition
//! of every used variable.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{GraphError, IrError};
use crate::ir::{validate, ControlClass, IrProgram};

pub type VertexId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexKind {
    PrimaryControl,
    SecondaryControl,
    Plain,
}

impl VertexKind {
    fn name(self) -> &'static str {
        match self {
            VertexKind::PrimaryControl => "primary",
            VertexKind::SecondaryControl => "secondary",
            VertexKind::Plain => "plain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    /// Seg id.
    pub label: VertexId,
    pub members: BTreeSet<usize>,
    pub kind: VertexKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Control,
    Data,
}

/// Why a contraction kept the label it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegIdRule {
    ControlEdge,
    Source,
    Chain,
    Default,
    Explicit,
}

impl SegIdRule {
    pub fn name(self) -> &'static str {
        match self {
            SegIdRule::ControlEdge => "control-edge",
            SegIdRule::Source => "source",
            SegIdRule::Chain => "chain",
            SegIdRule::Default => "default",
            SegIdRule::Explicit => "explicit",
        }
    }
}

/// Record of one edge contraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contraction {
    pub edge: (VertexId, VertexId),
    pub kind: EdgeKind,
    pub rule: SegIdRule,
    pub label: VertexId,
}

/// A data-edge path `path[0] -> ... -> path[k]`, `k >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chain {
    pub path: Vec<VertexId>,
}

impl Chain {
    pub fn head(&self) -> VertexId {
        self.path[0]
    }

    pub fn tail(&self) -> VertexId {
        *self.path.last().expect("chain is non-empty")
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.path.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.path.windows(2).map(|w| (w[0], w[1]))
    }
}

static EMPTY: BTreeSet<VertexId> = BTreeSet::new();

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sdg {
    vertices: BTreeMap<VertexId, Vertex>,
    ctrl_out: BTreeMap<VertexId, BTreeSet<VertexId>>,
    ctrl_in: BTreeMap<VertexId, VertexId>,
    data_out: BTreeMap<VertexId, BTreeSet<VertexId>>,
    data_in: BTreeMap<VertexId, BTreeSet<VertexId>>,
    data_vars: BTreeMap<(VertexId, VertexId), BTreeSet<String>>,
}

/// Builds the SDG of a structurally valid program.
pub fn build_sdg(p: &IrProgram) -> Result<Sdg, IrError> {
    let diagnostics = validate(p);
    if !diagnostics.is_empty() {
        return Err(IrError::Invalid(diagnostics));
    }
    let mut g = Sdg::default();
    for stmt in p.statements() {
        let kind = match stmt.kind.control_class() {
            ControlClass::Primary => VertexKind::PrimaryControl,
            ControlClass::Secondary => VertexKind::SecondaryControl,
            ControlClass::None => VertexKind::Plain,
        };
        g.add_vertex(stmt.index, kind);
    }
    for stmt in p.statements() {
        let v = stmt.index;
        if let Some(parent) = p.control_parent(v) {
            g.add_control_edge(parent, v);
        }
        for var in &stmt.used {
            if let Some(def) = p.last_defined(var, v) {
                g.add_data_edge(def, v, var);
            }
        }
    }
    Ok(g)
}

impl Sdg {
    /// Adds an isolated single-member vertex.
    pub fn add_vertex(&mut self, id: VertexId, kind: VertexKind) {
        self.vertices.insert(id, Vertex { label: id, members: BTreeSet::from([id]), kind });
        self.ctrl_out.entry(id).or_default();
        self.data_out.entry(id).or_default();
        self.data_in.entry(id).or_default();
    }

    /// Adds a control edge, replacing any previous control parent of `v`.
    pub fn add_control_edge(&mut self, u: VertexId, v: VertexId) {
        if let Some(old) = self.ctrl_in.insert(v, u) {
            self.ctrl_out.entry(old).or_default().remove(&v);
        }
        self.ctrl_out.entry(u).or_default().insert(v);
    }

    pub fn add_data_edge(&mut self, u: VertexId, v: VertexId, var: &str) {
        self.data_out.entry(u).or_default().insert(v);
        self.data_in.entry(v).or_default().insert(u);
        self.data_vars.entry((u, v)).or_default().insert(var.to_owned());
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.vertices.get(&id)
    }

    pub fn contains(&self, id: VertexId) -> bool {
        self.vertices.contains_key(&id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.values()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn kind(&self, id: VertexId) -> Option<VertexKind> {
        self.vertices.get(&id).map(|v| v.kind)
    }

    pub fn members(&self, id: VertexId) -> &BTreeSet<usize> {
        self.vertices.get(&id).map_or(&EMPTY, |v| &v.members)
    }

    /// Vertex currently holding IR statement `index`.
    pub fn vertex_of(&self, index: usize) -> Option<VertexId> {
        self.vertices.values().find(|v| v.members.contains(&index)).map(|v| v.label)
    }

    pub fn data_successors(&self, v: VertexId) -> &BTreeSet<VertexId> {
        self.data_out.get(&v).unwrap_or(&EMPTY)
    }

    pub fn data_predecessors(&self, v: VertexId) -> &BTreeSet<VertexId> {
        self.data_in.get(&v).unwrap_or(&EMPTY)
    }

    pub fn control_children(&self, v: VertexId) -> &BTreeSet<VertexId> {
        self.ctrl_out.get(&v).unwrap_or(&EMPTY)
    }

    pub fn control_parent(&self, v: VertexId) -> Option<VertexId> {
        self.ctrl_in.get(&v).copied()
    }

    pub fn data_in_degree(&self, v: VertexId) -> usize {
        self.data_predecessors(v).len()
    }

    pub fn data_out_degree(&self, v: VertexId) -> usize {
        self.data_successors(v).len()
    }

    pub fn has_data_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.data_successors(u).contains(&v)
    }

    pub fn has_control_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.control_parent(v) == Some(u)
    }

    /// Variables carried by data edge `(u, v)`.
    pub fn edge_vars(&self, u: VertexId, v: VertexId) -> &BTreeSet<String> {
        static NONE: BTreeSet<String> = BTreeSet::new();
        self.data_vars.get(&(u, v)).unwrap_or(&NONE)
    }

    pub fn data_edges(&self) -> Vec<(VertexId, VertexId)> {
        self.data_out.iter().flat_map(|(&u, vs)| vs.iter().map(move |&v| (u, v))).collect()
    }

    pub fn control_edges(&self) -> Vec<(VertexId, VertexId)> {
        self.ctrl_out.iter().flat_map(|(&u, vs)| vs.iter().map(move |&v| (u, v))).collect()
    }

    /// No incoming and at least one outgoing data edge.
    pub fn is_source_vertex(&self, v: VertexId) -> bool {
        self.data_in_degree(v) == 0 && self.data_out_degree(v) > 0
    }

    /// Label of `v`'s control parent; `None` at top level (printed as -1).
    pub fn control_region(&self, v: VertexId) -> Option<VertexId> {
        self.control_parent(v)
    }

    /// Minimum number of control edges on any path from `u` to `v`.
    pub fn control_depth(&self, u: VertexId, v: VertexId) -> Option<usize> {
        if !self.contains(u) || !self.contains(v) {
            return None;
        }
        let mut best: BTreeMap<VertexId, usize> = BTreeMap::from([(u, 0)]);
        let mut queue = VecDeque::from([(u, 0usize)]);
        while let Some((x, d)) = queue.pop_front() {
            if best.get(&x).is_some_and(|&b| b < d) {
                continue;
            }
            let data = self.data_successors(x).iter().map(|&y| (y, d));
            let ctrl = self.control_children(x).iter().map(|&y| (y, d + 1));
            for (y, dy) in data.chain(ctrl) {
                if best.get(&y).is_none_or(|&b| dy < b) {
                    best.insert(y, dy);
                    if dy == d {
                        queue.push_front((y, dy));
                    } else {
                        queue.push_back((y, dy));
                    }
                }
            }
        }
        best.get(&v).copied()
    }

    /// Primary control vertices in ascending order.
    pub fn primary_control_vertices(&self) -> Vec<VertexId> {
        self.vertices.values().filter(|v| v.kind == VertexKind::PrimaryControl).map(|v| v.label).collect()
    }

    /// `v` plus its transitive control descendants.
    pub fn control_block(&self, v: VertexId) -> BTreeSet<VertexId> {
        let mut block = BTreeSet::new();
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            if block.insert(x) {
                stack.extend(self.control_children(x).iter().copied());
            }
        }
        block
    }

    /// Proper control ancestors of `v`, nearest first.
    pub fn control_ancestors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut cur = self.control_parent(v);
        while let Some(p) = cur {
            if out.contains(&p) {
                break;
            }
            out.push(p);
            cur = self.control_parent(p);
        }
        out
    }

    /// No control edge leaves `s`, and control edges entering `s` only target
    /// primary control or plain vertices (never an `else`/`case`/`break`
    /// severed from its owner).
    pub fn is_control_independent(&self, s: &BTreeSet<VertexId>) -> bool {
        self.control_edges().into_iter().all(|(u, v)| match (s.contains(&u), s.contains(&v)) {
            (true, false) => false,
            (false, true) => self.kind(v) != Some(VertexKind::SecondaryControl),
            _ => true,
        })
    }

    /// Every data edge crossing the border of `s` joins different control
    /// regions.
    pub fn is_data_independent(&self, s: &BTreeSet<VertexId>) -> bool {
        self.data_edges()
            .into_iter()
            .filter(|(u, v)| s.contains(u) != s.contains(v))
            .all(|(u, v)| self.control_region(u) != self.control_region(v))
    }

    /// Weak connectivity over both edge kinds.
    pub fn is_weakly_connected(&self, s: &BTreeSet<VertexId>) -> bool {
        let Some(&start) = s.iter().next() else { return false };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            let parent = self.control_parent(x);
            let neighbours = self
                .data_successors(x)
                .iter()
                .chain(self.data_predecessors(x))
                .chain(self.control_children(x))
                .chain(parent.as_ref());
            for &y in neighbours {
                if s.contains(&y) && seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen.len() == s.len()
    }

    /// Weakly connected, control independent and data independent.
    pub fn is_segment(&self, s: &BTreeSet<VertexId>) -> bool {
        s.iter().all(|v| self.contains(*v))
            && self.is_weakly_connected(s)
            && self.is_control_independent(s)
            && self.is_data_independent(s)
    }

    fn is_chain_edge(&self, a: VertexId, b: VertexId) -> bool {
        a != b
            && self.data_out_degree(a) == 1
            && self.data_in_degree(b) == 1
            && self.has_data_edge(a, b)
            && self.control_region(a) == self.control_region(b)
    }

    /// Maximal chains of the whole graph.
    pub fn find_chains(&self) -> Vec<Chain> {
        let next = |a: VertexId| self.data_successors(a).iter().next().copied().filter(|&b| self.is_chain_edge(a, b));
        let has_chain_pred =
            |b: VertexId| self.data_predecessors(b).iter().next().is_some_and(|&a| self.is_chain_edge(a, b));
        let mut chains = Vec::new();
        for a in self.vertex_ids() {
            if has_chain_pred(a) || next(a).is_none() {
                continue;
            }
            let mut path = vec![a];
            let mut cur = a;
            while let Some(b) = next(cur) {
                if path.contains(&b) {
                    break;
                }
                path.push(b);
                cur = b;
            }
            chains.push(Chain { path });
        }
        chains
    }

    /// Chains ending in `v`. The final hop only needs its tail `p` to feed
    /// nothing but `v`; `v` itself may have other predecessors.
    pub fn chains_into(&self, v: VertexId) -> Vec<Chain> {
        let region = self.control_region(v);
        let mut chains = Vec::new();
        for &p in self.data_predecessors(v) {
            if p == v || self.data_out_degree(p) != 1 || self.control_region(p) != region {
                continue;
            }
            let mut path = VecDeque::from([p, v]);
            let mut cur = p;
            while self.data_in_degree(cur) == 1 {
                let q = *self.data_predecessors(cur).iter().next().unwrap();
                if path.contains(&q) || self.data_out_degree(q) != 1 || self.control_region(q) != region {
                    break;
                }
                path.push_front(q);
                cur = q;
            }
            chains.push(Chain { path: path.into() });
        }
        chains
    }

    /// Chains starting at `v`. The first hop only needs its head `s` to be
    /// fed by nothing but `v`; `v` itself may have other successors.
    pub fn chain_from(&self, v: VertexId) -> Vec<Chain> {
        let region = self.control_region(v);
        let mut chains = Vec::new();
        for &s in self.data_successors(v) {
            if s == v || self.data_in_degree(s) != 1 || self.control_region(s) != region {
                continue;
            }
            let mut path = vec![v, s];
            let mut cur = s;
            while self.data_out_degree(cur) == 1 {
                let n = *self.data_successors(cur).iter().next().unwrap();
                if path.contains(&n) || self.data_in_degree(n) != 1 || self.control_region(n) != region {
                    break;
                }
                path.push(n);
                cur = n;
            }
            chains.push(Chain { path });
        }
        chains
    }

    /// Contracts edge `(u, v)`, choosing the surviving label by the seg-id
    /// rule: control edge keeps `u`, a source `u` yields `v`, a chain edge
    /// keeps `u`, otherwise `v`.
    pub fn contract_edge(&mut self, u: VertexId, v: VertexId) -> Result<Contraction, GraphError> {
        let (kind, rule, label) = if self.has_control_edge(u, v) {
            (EdgeKind::Control, SegIdRule::ControlEdge, u)
        } else if self.has_data_edge(u, v) {
            if self.is_source_vertex(u) {
                (EdgeKind::Data, SegIdRule::Source, v)
            } else if self.is_chain_edge(u, v) {
                (EdgeKind::Data, SegIdRule::Chain, u)
            } else {
                (EdgeKind::Data, SegIdRule::Default, v)
            }
        } else {
            return Err(GraphError::NoSuchEdge(u, v));
        };
        self.merge(u, v, label)?;
        Ok(Contraction { edge: (u, v), kind, rule, label })
    }

    /// Contracts edge `(u, v)` keeping `label`, which must be `u` or `v`.
    pub fn contract_edge_as(
        &mut self,
        u: VertexId,
        v: VertexId,
        label: VertexId,
    ) -> Result<Contraction, GraphError> {
        let kind = if self.has_control_edge(u, v) {
            EdgeKind::Control
        } else if self.has_data_edge(u, v) {
            EdgeKind::Data
        } else {
            return Err(GraphError::NoSuchEdge(u, v));
        };
        if label != u && label != v {
            return Err(GraphError::BadLabel { edge: (u, v), label });
        }
        self.merge(u, v, label)?;
        Ok(Contraction { edge: (u, v), kind, rule: SegIdRule::Explicit, label })
    }

    fn merge(&mut self, u: VertexId, v: VertexId, keep: VertexId) -> Result<(), GraphError> {
        let gone = if keep == u { v } else { u };
        let parents: BTreeSet<VertexId> =
            [self.control_parent(u), self.control_parent(v)].into_iter().flatten().filter(|p| *p != u && *p != v).collect();
        if parents.len() > 1 {
            return Err(GraphError::TwoControlParents(u, v));
        }

        let removed = self.vertices.remove(&gone).ok_or(GraphError::NoSuchVertex(gone))?;
        self.vertices.get_mut(&keep).ok_or(GraphError::NoSuchVertex(keep))?.members.extend(removed.members);

        let retarget = |x: VertexId| if x == gone { keep } else { x };

        // control edges
        let gone_children = self.ctrl_out.remove(&gone).unwrap_or_default();
        let gone_parent = self.ctrl_in.remove(&gone);
        if let Some(p) = gone_parent {
            self.ctrl_out.entry(p).or_default().remove(&gone);
        }
        for c in gone_children {
            self.ctrl_in.remove(&c);
            if c != keep {
                self.add_control_edge(keep, c);
            }
        }
        if let Some(p) = gone_parent.map(retarget) {
            if p != keep && self.control_parent(keep).is_none() {
                self.add_control_edge(p, keep);
            }
        }
        if self.ctrl_in.get(&keep) == Some(&keep) {
            self.ctrl_in.remove(&keep);
            self.ctrl_out.entry(keep).or_default().remove(&keep);
        }

        // data edges
        let outs = self.data_out.remove(&gone).unwrap_or_default();
        let ins = self.data_in.remove(&gone).unwrap_or_default();
        for w in outs {
            self.data_in.entry(w).or_default().remove(&gone);
            let vars = self.data_vars.remove(&(gone, w)).unwrap_or_default();
            let w = retarget(w);
            if w != keep {
                for var in vars {
                    self.add_data_edge(keep, w, &var);
                }
            }
        }
        for w in ins {
            self.data_out.entry(w).or_default().remove(&gone);
            let vars = self.data_vars.remove(&(w, gone)).unwrap_or_default();
            let w = retarget(w);
            if w != keep {
                for var in vars {
                    self.add_data_edge(w, keep, &var);
                }
            }
        }
        // the contracted edge itself, if it ran keep -> gone or gone -> keep,
        // has been dropped above; remove any stale entries
        self.data_vars.remove(&(keep, keep));
        if let Some(s) = self.data_out.get_mut(&keep) {
            s.remove(&keep);
        }
        if let Some(s) = self.data_in.get_mut(&keep) {
            s.remove(&keep);
        }
        Ok(())
    }

    /// Deterministic Graphviz text.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph sdg {\n  node [shape=box];\n");
        for v in self.vertices.values() {
            let text = if v.members.len() == 1 && v.members.contains(&v.label) {
                v.label.to_string()
            } else {
                format!("{} ({})", v.label, format_members(&v.members))
            };
            let _ = writeln!(out, "  {} [label=\"{}\"];", v.label, text);
        }
        let mut edges: Vec<(VertexId, VertexId, EdgeKind)> = self
            .control_edges()
            .into_iter()
            .map(|(u, v)| (u, v, EdgeKind::Control))
            .chain(self.data_edges().into_iter().map(|(u, v)| (u, v, EdgeKind::Data)))
            .collect();
        edges.sort();
        for (u, v, kind) in edges {
            match kind {
                EdgeKind::Control => {
                    let _ = writeln!(out, "  {u} -> {v} [label=\"C\", style=dashed];");
                }
                EdgeKind::Data => {
                    let _ = writeln!(out, "  {u} -> {v} [label=\"D\"];");
                }
            }
        }
        out.push_str("}\n");
        out
    }

    /// Line-oriented dump for diffing.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for v in self.vertices.values() {
            let region = self.control_region(v.label).map_or("-1".to_string(), |r| r.to_string());
            let _ = writeln!(
                out,
                "vertex {} {} region {} members {}",
                v.label,
                v.kind.name(),
                region,
                format_members(&v.members)
            );
        }
        for (u, v) in self.control_edges() {
            let _ = writeln!(out, "control {u} -> {v}");
        }
        for (u, v) in self.data_edges() {
            let vars: Vec<&str> = self.edge_vars(u, v).iter().map(String::as_str).collect();
            let _ = writeln!(out, "data {u} -> {v} {}", vars.join(","));
        }
        out
    }
}

/// Compact run notation: `{1,2,3,7}` becomes `1-3, 7`.
pub fn format_members(members: &BTreeSet<usize>) -> String {
    let mut parts = Vec::new();
    let mut iter = members.iter().copied().peekable();
    while let Some(start) = iter.next() {
        let mut end = start;
        while iter.peek() == Some(&(end + 1)) {
            end = iter.next().unwrap();
        }
        parts.push(if start == end { start.to_string() } else { format!("{start}-{end}") });
    }
    parts.join(", ")
}
