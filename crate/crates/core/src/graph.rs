//! Named well-boxed graphs.
//!
//! Edges run from premise to conclusion. Every node keeps its incoming edges
//! (`ins`, premises) and outgoing edges (`outs`, conclusions) in port order:
//!
//! | kind      | ins            | outs          |
//! |-----------|----------------|---------------|
//! | `Ax`      | –              | two           |
//! | `Cut`     | two            | –             |
//! | `Tensor`  | left, right    | one           |
//! | `Par`     | left, right    | one           |
//! | `Bang`    | box root       | one           |
//! | `WhyNot`  | one            | one           |
//! | `Der`     | one            | one           |
//! | `Con(n)`  | `n`            | one           |
//!
//! An edge without a target is an open (outgoing) edge. An edge without a
//! source only appears in context translations, where it marks the hole.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{NameSupply, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Ax,
    Cut,
    Tensor,
    Par,
    Bang,
    WhyNot,
    Der,
    /// Contraction with its in-degree; `Con(0)` is weakening.
    Con(usize),
}

impl NodeKind {
    pub fn in_arity(self) -> usize {
        match self {
            NodeKind::Ax => 0,
            NodeKind::Cut | NodeKind::Tensor | NodeKind::Par => 2,
            NodeKind::Bang | NodeKind::WhyNot | NodeKind::Der => 1,
            NodeKind::Con(n) => n,
        }
    }

    pub fn out_arity(self) -> usize {
        match self {
            NodeKind::Ax => 2,
            NodeKind::Cut => 0,
            _ => 1,
        }
    }

    pub fn tag(self) -> String {
        match self {
            NodeKind::Ax => "Ax".into(),
            NodeKind::Cut => "Cut".into(),
            NodeKind::Tensor => "Tensor".into(),
            NodeKind::Par => "Par".into(),
            NodeKind::Bang => "!".into(),
            NodeKind::WhyNot => "?".into(),
            NodeKind::Der => "D".into(),
            NodeKind::Con(n) => format!("C{n}"),
        }
    }
}

/// Token direction: `Up` runs against edge orientation, `Down` along it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Clone, Debug)]
pub struct Node {
    pub kind: NodeKind,
    pub ins: Vec<EdgeId>,
    pub outs: Vec<EdgeId>,
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub src: Option<NodeId>,
    pub dst: Option<NodeId>,
    /// Variable annotation on free-variable edges; debug metadata only.
    pub label: Option<Var>,
}

/// A !-box: principal door, auxiliary doors and contents. `members` holds
/// every node inside the box, nested boxes and their doors included, but
/// not the box's own doors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxInfo {
    pub principal: NodeId,
    pub auxiliaries: Vec<NodeId>,
    pub members: BTreeSet<NodeId>,
    /// Principal door of the box in the initial graph this one was copied
    /// from (itself for original boxes).
    pub origin: NodeId,
}

impl BoxInfo {
    /// Nodes copied along with the box: contents plus doors.
    pub fn size(&self) -> usize {
        self.members.len() + self.door_count()
    }

    pub fn door_count(&self) -> usize {
        1 + self.auxiliaries.len()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown box {0}")]
    UnknownBox(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
}

#[derive(Clone, Debug)]
pub struct Graph {
    nodes: BTreeMap<NodeId, Node>,
    edges: BTreeMap<EdgeId, Edge>,
    boxes: BTreeMap<NodeId, BoxInfo>,
    door_of: BTreeMap<NodeId, NodeId>,
    /// Innermost box (by principal) whose contents include a node.
    owner: HashMap<NodeId, NodeId>,
    names: NameSupply,
    next_edge: u64,
    /// The designated conclusion; kept up to date by [`Graph::merge`].
    pub root: Option<EdgeId>,
}

impl Default for Graph {
    fn default() -> Self {
        Graph::new(NameSupply::new())
    }
}

impl Graph {
    pub fn new(names: NameSupply) -> Self {
        Graph {
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
            boxes: BTreeMap::new(),
            door_of: BTreeMap::new(),
            owner: HashMap::new(),
            names,
            next_edge: 0,
            root: None,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes.iter().map(|(id, n)| (*id, n))
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.edges.iter().map(|(id, e)| (*id, e))
    }

    pub fn boxes(&self) -> impl Iterator<Item = &BoxInfo> {
        self.boxes.values()
    }

    pub fn box_count(&self) -> usize {
        self.boxes.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn kind(&self, id: NodeId) -> Option<NodeKind> {
        self.nodes.get(&id).map(|n| n.kind)
    }

    pub fn box_of(&self, principal: NodeId) -> Option<&BoxInfo> {
        self.boxes.get(&principal)
    }

    /// Principal door of the box a `WhyNot` node belongs to.
    pub fn door_owner(&self, aux: NodeId) -> Option<NodeId> {
        self.door_of.get(&aux).copied()
    }

    pub fn names(&self) -> &NameSupply {
        &self.names
    }

    pub fn names_mut(&mut self) -> &mut NameSupply {
        &mut self.names
    }

    /// Open outgoing edges.
    pub fn open_edges(&self) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, e)| e.dst.is_none())
            .map(|(id, _)| *id)
            .collect()
    }

    pub fn add_node(&mut self, kind: NodeKind) -> NodeId {
        let id = NodeId(self.names.fresh_id());
        let kind = match kind {
            NodeKind::Con(_) => NodeKind::Con(0),
            k => k,
        };
        self.nodes.insert(
            id,
            Node {
                kind,
                ins: Vec::new(),
                outs: Vec::new(),
            },
        );
        id
    }

    /// New edge leaving `src` (appended to its conclusions), target unset.
    pub fn new_edge(&mut self, src: Option<NodeId>) -> EdgeId {
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        if let Some(s) = src {
            self.nodes.get_mut(&s).expect("source exists").outs.push(id);
        }
        self.edges.insert(
            id,
            Edge {
                src,
                dst: None,
                label: None,
            },
        );
        id
    }

    pub fn set_label(&mut self, e: EdgeId, label: Option<Var>) {
        if let Some(edge) = self.edges.get_mut(&e) {
            edge.label = label;
        }
    }

    /// Point `e` at `dst`, appending it to `dst`'s premises. `e` must not
    /// have a target yet.
    pub fn attach(&mut self, e: EdgeId, dst: NodeId) {
        let edge = self.edges.get_mut(&e).expect("edge exists");
        debug_assert!(edge.dst.is_none(), "edge {e} already has a target");
        edge.dst = Some(dst);
        let node = self.nodes.get_mut(&dst).expect("target exists");
        node.ins.push(e);
        if let NodeKind::Con(n) = &mut node.kind {
            *n += 1;
        }
    }

    /// Remove `e` from the premises of its target, leaving it open.
    pub fn detach(&mut self, e: EdgeId) {
        let Some(dst) = self.edges.get_mut(&e).and_then(|edge| edge.dst.take()) else {
            return;
        };
        let node = self.nodes.get_mut(&dst).expect("target exists");
        node.ins.retain(|x| *x != e);
        if let NodeKind::Con(n) = &mut node.kind {
            *n -= 1;
        }
    }

    /// Splice two edges: `upper` takes over the target (and port) of
    /// `lower`, which disappears. Whatever sat between them is the caller's
    /// to delete.
    pub fn merge(&mut self, upper: EdgeId, lower: EdgeId) {
        assert_ne!(upper, lower, "cannot merge an edge with itself");
        self.detach(upper);
        let gone = self.edges.remove(&lower).expect("lower edge exists");
        if let Some(s) = gone.src {
            if let Some(node) = self.nodes.get_mut(&s) {
                node.outs.retain(|x| *x != lower);
            }
        }
        if let Some(d) = gone.dst {
            let node = self.nodes.get_mut(&d).expect("target exists");
            for slot in node.ins.iter_mut().filter(|x| **x == lower) {
                *slot = upper;
            }
        }
        let edge = self.edges.get_mut(&upper).expect("upper edge exists");
        edge.dst = gone.dst;
        if edge.label.is_none() {
            edge.label = gone.label;
        }
        if self.root == Some(lower) {
            self.root = Some(upper);
        }
    }

    pub fn delete_edge(&mut self, e: EdgeId) {
        let Some(edge) = self.edges.remove(&e) else {
            return;
        };
        if let Some(s) = edge.src {
            if let Some(node) = self.nodes.get_mut(&s) {
                node.outs.retain(|x| *x != e);
            }
        }
        if let Some(d) = edge.dst {
            if let Some(node) = self.nodes.get_mut(&d) {
                node.ins.retain(|x| *x != e);
                if let NodeKind::Con(n) = &mut node.kind {
                    *n -= 1;
                }
            }
        }
        if self.root == Some(e) {
            self.root = None;
        }
    }

    /// Remove a node whose edges have all been deleted or re-pointed.
    pub fn delete_node(&mut self, id: NodeId) {
        let node = self.nodes.remove(&id).expect("node exists");
        debug_assert!(
            node.ins.iter().chain(&node.outs).all(|e| self
                .edges
                .get(e)
                .is_none_or(|edge| edge.src != Some(id) && edge.dst != Some(id))),
            "deleting {id} with live edges"
        );
        for b in self.enclosing_boxes(id) {
            if let Some(info) = self.boxes.get_mut(&b) {
                info.members.remove(&id);
            }
        }
        self.owner.remove(&id);
    }

    /// Register a box. Boxes may be added in any order; each member ends up
    /// owned by the innermost registered box containing it.
    pub fn add_box(&mut self, info: BoxInfo) {
        for aux in &info.auxiliaries {
            self.door_of.insert(*aux, info.principal);
        }
        for m in &info.members {
            let replace = match self.owner.get(m) {
                None => true,
                Some(current) => self
                    .boxes
                    .get(current)
                    .is_some_and(|c| c.members.contains(&info.principal)),
            };
            if replace {
                self.owner.insert(*m, info.principal);
            }
        }
        self.boxes.insert(info.principal, info);
    }

    /// Put `node` in exactly the boxes that contain `like`.
    pub fn place_like(&mut self, node: NodeId, like: NodeId) {
        let chain = self.enclosing_boxes(like);
        for b in &chain {
            if let Some(info) = self.boxes.get_mut(b) {
                info.members.insert(node);
            }
        }
        match chain.first() {
            Some(b) => self.owner.insert(node, *b),
            None => self.owner.remove(&node),
        };
    }

    /// Boxes whose contents include `node`, innermost first.
    pub fn enclosing_boxes(&self, node: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut at = self.owner.get(&node).copied();
        while let Some(b) = at {
            out.push(b);
            at = self.owner.get(&b).copied();
        }
        out
    }

    /// Copy every node and edge of `other` into `self` under fresh names.
    pub fn absorb(&mut self, other: &Graph) -> (HashMap<NodeId, NodeId>, HashMap<EdgeId, EdgeId>) {
        let mut nmap = HashMap::new();
        let mut emap = HashMap::new();
        for (id, node) in &other.nodes {
            let new = NodeId(self.names.fresh_id());
            self.nodes.insert(
                new,
                Node {
                    kind: node.kind,
                    ins: Vec::new(),
                    outs: Vec::new(),
                },
            );
            nmap.insert(*id, new);
        }
        for (id, edge) in &other.edges {
            let new = EdgeId(self.next_edge);
            self.next_edge += 1;
            self.edges.insert(
                new,
                Edge {
                    src: edge.src.map(|s| nmap[&s]),
                    dst: edge.dst.map(|d| nmap[&d]),
                    label: edge.label.clone(),
                },
            );
            emap.insert(*id, new);
        }
        for (id, node) in &other.nodes {
            let target = self.nodes.get_mut(&nmap[id]).expect("just inserted");
            target.ins = node.ins.iter().map(|e| emap[e]).collect();
            target.outs = node.outs.iter().map(|e| emap[e]).collect();
        }
        for b in other.boxes.values() {
            self.add_box(BoxInfo {
                principal: nmap[&b.principal],
                auxiliaries: b.auxiliaries.iter().map(|a| nmap[a]).collect(),
                members: b.members.iter().map(|m| nmap[m]).collect(),
                origin: nmap[&b.origin],
            });
        }
        (nmap, emap)
    }

    pub fn to_dot(&self, token: Option<(EdgeId, Direction)>) -> String {
        dot(self, token)
    }
}

/// Which clause of the well-boxedness definition a graph breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    /// Port arities and edge/node cross references.
    Structure,
    /// No incoming open edges.
    NoIncoming,
    /// Box contents, principal and auxiliary doors.
    BoxDoors,
    /// Each `WhyNot` node is the auxiliary door of exactly one box.
    AuxiliaryOwner,
    /// Distinct boxes are disjoint or nested.
    Nesting,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{clause:?} violated at {node:?}: {detail}")]
pub struct Violation {
    pub clause: Clause,
    pub node: Option<NodeId>,
    pub detail: String,
}

fn violation(clause: Clause, node: Option<NodeId>, detail: impl Into<String>) -> Violation {
    Violation {
        clause,
        node,
        detail: detail.into(),
    }
}

/// Check every well-boxedness clause plus port and name consistency.
/// Reports the first failure found.
pub fn well_boxed_check(g: &Graph) -> Result<(), Violation> {
    for (id, node) in &g.nodes {
        let kind = node.kind;
        if node.ins.len() != kind.in_arity() || node.outs.len() != kind.out_arity() {
            return Err(violation(
                Clause::Structure,
                Some(*id),
                format!(
                    "{} has {} premises and {} conclusions",
                    kind.tag(),
                    node.ins.len(),
                    node.outs.len()
                ),
            ));
        }
        for e in &node.ins {
            match g.edges.get(e) {
                Some(edge) if edge.dst == Some(*id) => {}
                _ => {
                    return Err(violation(
                        Clause::Structure,
                        Some(*id),
                        format!("premise {e} does not point here"),
                    ))
                }
            }
        }
        for e in &node.outs {
            match g.edges.get(e) {
                Some(edge) if edge.src == Some(*id) => {}
                _ => {
                    return Err(violation(
                        Clause::Structure,
                        Some(*id),
                        format!("conclusion {e} does not start here"),
                    ))
                }
            }
        }
    }
    for (id, edge) in &g.edges {
        match edge.src {
            None => {
                return Err(violation(
                    Clause::NoIncoming,
                    edge.dst,
                    format!("edge {id} has no source"),
                ))
            }
            Some(s) => {
                let ok = g
                    .nodes
                    .get(&s)
                    .is_some_and(|n| n.outs.iter().filter(|x| *x == id).count() == 1);
                if !ok {
                    return Err(violation(
                        Clause::Structure,
                        Some(s),
                        format!("edge {id} not listed at its source"),
                    ));
                }
            }
        }
        if let Some(d) = edge.dst {
            let ok = g
                .nodes
                .get(&d)
                .is_some_and(|n| n.ins.iter().filter(|x| *x == id).count() == 1);
            if !ok {
                return Err(violation(
                    Clause::Structure,
                    Some(d),
                    format!("edge {id} not listed at its target"),
                ));
            }
        }
    }
    if g.edges.len() > 2 * g.nodes.len() {
        return Err(violation(
            Clause::Structure,
            None,
            "more edges than conclusion ports",
        ));
    }

    for (id, node) in &g.nodes {
        if node.kind == NodeKind::Bang && !g.boxes.contains_key(id) {
            return Err(violation(
                Clause::BoxDoors,
                Some(*id),
                "principal door without a box",
            ));
        }
    }
    let mut owners: BTreeMap<NodeId, usize> = BTreeMap::new();
    for b in g.boxes.values() {
        check_box(g, b)?;
        for a in &b.auxiliaries {
            *owners.entry(*a).or_insert(0) += 1;
        }
    }
    for (id, node) in &g.nodes {
        if node.kind == NodeKind::WhyNot && owners.get(id).copied().unwrap_or(0) != 1 {
            return Err(violation(
                Clause::AuxiliaryOwner,
                Some(*id),
                "not the auxiliary door of exactly one box",
            ));
        }
    }

    // Boxes sharing no node are disjoint. Otherwise, sorting the boxes
    // around each node by size and checking neighbours suffices, as
    // nesting is transitive.
    let mut around: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for (p, b) in &g.boxes {
        for n in extent(b) {
            around.entry(n).or_default().push(*p);
        }
    }
    let mut pairs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for chain in around.values_mut() {
        chain.sort_by_key(|p| (g.boxes[p].size(), *p));
        pairs.extend(chain.windows(2).map(|w| (w[0], w[1])));
    }
    for (a, b) in pairs {
        check_pair(&g.boxes[&a], &g.boxes[&b])?;
    }
    Ok(())
}

fn extent(b: &BoxInfo) -> impl Iterator<Item = NodeId> + '_ {
    b.members
        .iter()
        .copied()
        .chain(std::iter::once(b.principal))
        .chain(b.auxiliaries.iter().copied())
}

fn check_pair(a: &BoxInfo, b: &BoxInfo) -> Result<(), Violation> {
    let nested_in =
        |inner: &BoxInfo, outer: &BoxInfo| extent(inner).all(|n| outer.members.contains(&n));
    if a.members.contains(&b.principal) {
        if nested_in(b, a) {
            return Ok(());
        }
    } else if b.members.contains(&a.principal) {
        if nested_in(a, b) {
            return Ok(());
        }
    } else {
        let ea: BTreeSet<NodeId> = extent(a).collect();
        if extent(b).all(|n| !ea.contains(&n)) {
            return Ok(());
        }
    }
    Err(violation(
        Clause::Nesting,
        Some(b.principal),
        format!(
            "boxes {} and {} overlap without nesting",
            a.principal, b.principal
        ),
    ))
}

fn check_box(g: &Graph, b: &BoxInfo) -> Result<(), Violation> {
    let here = Some(b.principal);
    if g.kind(b.principal) != Some(NodeKind::Bang) {
        return Err(violation(
            Clause::BoxDoors,
            here,
            "principal door is not a ! node",
        ));
    }
    for a in &b.auxiliaries {
        if g.kind(*a) != Some(NodeKind::WhyNot) {
            return Err(violation(
                Clause::BoxDoors,
                Some(*a),
                "auxiliary door is not a ? node",
            ));
        }
        if b.members.contains(a) {
            return Err(violation(
                Clause::BoxDoors,
                Some(*a),
                "door listed among the contents",
            ));
        }
    }
    if b.members.contains(&b.principal) {
        return Err(violation(
            Clause::BoxDoors,
            here,
            "door listed among the contents",
        ));
    }
    for m in &b.members {
        if !g.nodes.contains_key(m) {
            return Err(violation(
                Clause::BoxDoors,
                Some(*m),
                "box member does not exist",
            ));
        }
    }
    let mut leaving = 0usize;
    let mut principal_hits = 0usize;
    let mut aux_hits: BTreeMap<NodeId, usize> = BTreeMap::new();
    // Only edges touching a member can cross the box boundary.
    for m in &b.members {
        let node = &g.nodes[m];
        for id in &node.ins {
            let edge = &g.edges[id];
            if !edge.src.is_some_and(|s| b.members.contains(&s)) {
                return Err(violation(
                    Clause::BoxDoors,
                    edge.dst,
                    format!("edge {id} enters the box from outside"),
                ));
            }
        }
        for id in &node.outs {
            let edge = &g.edges[id];
            if edge.dst.is_some_and(|d| b.members.contains(&d)) {
                continue;
            }
            leaving += 1;
            match edge.dst {
                Some(d) if d == b.principal => principal_hits += 1,
                Some(d) if b.auxiliaries.contains(&d) => *aux_hits.entry(d).or_insert(0) += 1,
                _ => {
                    return Err(violation(
                        Clause::BoxDoors,
                        edge.src,
                        format!("edge {id} leaves the box but not through a door"),
                    ))
                }
            }
        }
    }
    if leaving == 0 {
        return Err(violation(
            Clause::BoxDoors,
            here,
            "box contents have no outgoing edge",
        ));
    }
    if principal_hits != 1 {
        return Err(violation(
            Clause::BoxDoors,
            here,
            "principal door is not the target of exactly one edge of the box",
        ));
    }
    for a in &b.auxiliaries {
        if aux_hits.get(a).copied() != Some(1) {
            return Err(violation(
                Clause::BoxDoors,
                Some(*a),
                "auxiliary door not fed from the box",
            ));
        }
    }
    Ok(())
}

/// Result of [`copy_box`].
#[derive(Clone, Debug)]
pub struct BoxCopy {
    pub principal: NodeId,
    /// The copy's principal conclusion; open.
    pub conclusion: EdgeId,
    /// Original auxiliary door, its copy, and the copy's open conclusion.
    pub doors: Vec<(NodeId, NodeId, EdgeId)>,
    pub members_copied: usize,
    pub doors_copied: usize,
}

/// Duplicate a box, nested boxes included, under fresh names. The copy's
/// door conclusions are left open for the caller to connect.
pub fn copy_box(g: &mut Graph, principal: NodeId) -> Result<BoxCopy, GraphError> {
    let original = g
        .boxes
        .get(&principal)
        .cloned()
        .ok_or(GraphError::UnknownBox(principal))?;
    let mut order: Vec<NodeId> = original.members.iter().copied().collect();
    order.push(principal);
    order.extend(original.auxiliaries.iter().copied());

    let mut nmap: HashMap<NodeId, NodeId> = HashMap::with_capacity(order.len());
    for n in &order {
        let kind = g.nodes[n].kind;
        let new = NodeId(g.names.fresh_id());
        g.nodes.insert(
            new,
            Node {
                kind,
                ins: Vec::new(),
                outs: Vec::new(),
            },
        );
        nmap.insert(*n, new);
    }
    let mut emap: HashMap<EdgeId, EdgeId> = HashMap::new();
    for n in &order {
        let outs = g.nodes[n].outs.clone();
        let new_src = nmap[n];
        for e in outs {
            let old = g.edges[&e].clone();
            let id = EdgeId(g.next_edge);
            g.next_edge += 1;
            let dst = old.dst.and_then(|d| nmap.get(&d).copied());
            g.edges.insert(
                id,
                Edge {
                    src: Some(new_src),
                    dst,
                    label: old.label,
                },
            );
            g.nodes.get_mut(&new_src).expect("copied").outs.push(id);
            emap.insert(e, id);
        }
    }
    for n in &order {
        let ins: Vec<EdgeId> = g.nodes[n].ins.iter().map(|e| emap[e]).collect();
        g.nodes.get_mut(&nmap[n]).expect("copied").ins = ins;
    }

    let nested: Vec<BoxInfo> = original
        .members
        .iter()
        .filter_map(|m| g.boxes.get(m))
        .cloned()
        .collect();
    for b in nested.iter().chain(std::iter::once(&original)) {
        g.add_box(BoxInfo {
            principal: nmap[&b.principal],
            auxiliaries: b.auxiliaries.iter().map(|a| nmap[a]).collect(),
            members: b.members.iter().map(|m| nmap[m]).collect(),
            origin: b.origin,
        });
    }
    let copied: Vec<NodeId> = order.iter().map(|n| nmap[n]).collect();
    let chain = g.enclosing_boxes(principal);
    for b in &chain {
        g.boxes
            .get_mut(b)
            .expect("enclosing box exists")
            .members
            .extend(copied.iter().copied());
    }
    if let Some(parent) = chain.first() {
        for n in &copied {
            g.owner.entry(*n).or_insert(*parent);
        }
    }

    let conclusion = emap[&g.nodes[&principal].outs[0]];
    let doors = original
        .auxiliaries
        .iter()
        .map(|a| {
            let out = g.nodes[a].outs[0];
            (*a, nmap[a], emap[&out])
        })
        .collect();
    Ok(BoxCopy {
        principal: nmap[&principal],
        conclusion,
        doors,
        members_copied: original.members.len(),
        doors_copied: original.door_count(),
    })
}

/// Result of [`open_box`].
#[derive(Clone, Debug)]
pub struct OpenedBox {
    /// The former box root, now wired to where the principal door pointed.
    pub root: EdgeId,
    pub doors_deleted: usize,
}

/// Delete a box's doors, splicing each door's premise onto its conclusion.
pub fn open_box(g: &mut Graph, principal: NodeId) -> Result<OpenedBox, GraphError> {
    let info = g
        .boxes
        .remove(&principal)
        .ok_or(GraphError::UnknownBox(principal))?;
    let parent = g.owner.get(&principal).copied();
    for m in &info.members {
        if g.owner.get(m) == Some(&principal) {
            match parent {
                Some(p) => g.owner.insert(*m, p),
                None => g.owner.remove(m),
            };
        }
    }
    let root = g.nodes[&principal].ins[0];
    let out = g.nodes[&principal].outs[0];
    g.merge(root, out);
    g.delete_node(principal);
    for a in &info.auxiliaries {
        let prem = g.nodes[a].ins[0];
        let concl = g.nodes[a].outs[0];
        g.merge(prem, concl);
        g.delete_node(*a);
        g.door_of.remove(a);
    }
    Ok(OpenedBox {
        root,
        doors_deleted: info.door_count(),
    })
}

// ---------------------------------------------------------------------------
// Canonical form

#[derive(Clone, Copy)]
enum Arrival {
    Via(EdgeId),
    Start(Option<EdgeId>),
}

fn port_group(g: &Graph, node: NodeId, e: EdgeId) -> &'static str {
    let n = &g.nodes[&node];
    match n.kind {
        NodeKind::Ax => "c",
        NodeKind::Cut => "p",
        NodeKind::Con(_) => {
            if n.outs.contains(&e) {
                "c"
            } else {
                "p"
            }
        }
        NodeKind::Tensor | NodeKind::Par => {
            if n.outs.contains(&e) {
                "c"
            } else if n.ins[0] == e {
                "l"
            } else {
                "r"
            }
        }
        NodeKind::Bang | NodeKind::WhyNot | NodeKind::Der => {
            if n.outs.contains(&e) {
                "c"
            } else {
                "p"
            }
        }
    }
}

/// Edges to follow out of `node`, in canonical order.
fn next_edges(g: &Graph, node: NodeId, arrival: Arrival) -> Vec<EdgeId> {
    let n = &g.nodes[&node];
    let all: Vec<EdgeId> = match n.kind {
        NodeKind::Ax => n.outs.clone(),
        NodeKind::Cut => n.ins.clone(),
        NodeKind::Con(_) => {
            // Never walk from a contraction into its premises.
            return match arrival {
                Arrival::Via(e) if n.outs.contains(&e) => Vec::new(),
                _ => n.outs.clone(),
            };
        }
        _ => n.outs.iter().chain(n.ins.iter()).copied().collect(),
    };
    match arrival {
        Arrival::Via(e) => all.into_iter().filter(|x| *x != e).collect(),
        Arrival::Start(first) => {
            let mut v = all;
            if let Some(f) = first {
                if let Some(i) = v.iter().position(|x| *x == f) {
                    let x = v.remove(i);
                    v.insert(0, x);
                }
            }
            v
        }
    }
}

fn other_end(edge: &Edge, from: NodeId) -> Option<NodeId> {
    if edge.src == Some(from) {
        edge.dst
    } else {
        edge.src
    }
}

struct Numbering {
    num: HashMap<NodeId, usize>,
    order: Vec<NodeId>,
}

impl Numbering {
    fn visit(
        &mut self,
        g: &Graph,
        start: NodeId,
        arrival: Arrival,
        allowed: &dyn Fn(NodeId) -> bool,
    ) {
        if self.num.contains_key(&start) {
            return;
        }
        let mut stack = vec![(start, arrival)];
        while let Some((node, arrival)) = stack.pop() {
            if self.num.contains_key(&node) {
                continue;
            }
            self.num.insert(node, self.order.len());
            self.order.push(node);
            let next = next_edges(g, node, arrival);
            for e in next.into_iter().rev() {
                if let Some(m) = other_end(&g.edges[&e], node) {
                    if !self.num.contains_key(&m) && allowed(m) {
                        stack.push((m, Arrival::Via(e)));
                    }
                }
            }
        }
    }
}

struct Describer<'a> {
    g: &'a Graph,
    root: EdgeId,
    marks: &'a HashMap<EdgeId, String>,
}

impl Describer<'_> {
    /// The far end of `e` seen from `from`.
    fn far(&self, e: EdgeId, from: NodeId, num: &dyn Fn(NodeId) -> Option<usize>) -> String {
        let edge = &self.g.edges[&e];
        let mark = self
            .marks
            .get(&e)
            .map(|m| format!("#{m}"))
            .unwrap_or_default();
        let end = if edge.src == Some(from) && edge.dst != Some(from) {
            match edge.dst {
                Some(d) => format!("{}.{}", num_str(num(d)), port_group(self.g, d, e)),
                None if e == self.root => "root".into(),
                None => "free".into(),
            }
        } else if edge.dst == Some(from) && edge.src != Some(from) {
            match edge.src {
                Some(s) => format!("{}.{}", num_str(num(s)), port_group(self.g, s, e)),
                None => "hole".into(),
            }
        } else {
            // A node wired to itself.
            "self".into()
        };
        format!("{end}{mark}")
    }

    fn node(&self, id: NodeId, num: &dyn Fn(NodeId) -> Option<usize>) -> String {
        let n = &self.g.nodes[&id];
        let far = |e: &EdgeId| self.far(*e, id, num);
        let mut out = n.kind.tag();
        out.push('(');
        match n.kind {
            NodeKind::Ax => out.push_str(&sorted(n.outs.iter().map(far)).join(",")),
            NodeKind::Cut => out.push_str(&sorted(n.ins.iter().map(far)).join(",")),
            NodeKind::Con(_) => {
                out.push_str(&far(&n.outs[0]));
                out.push('|');
                out.push_str(&sorted(n.ins.iter().map(far)).join(","));
            }
            _ => {
                let ports: Vec<String> = n.outs.iter().chain(n.ins.iter()).map(far).collect();
                out.push_str(&ports.join(","));
            }
        }
        out.push(')');
        out
    }
}

fn num_str(n: Option<usize>) -> String {
    n.map(|n| n.to_string()).unwrap_or_else(|| "?".into())
}

fn sorted(it: impl Iterator<Item = String>) -> Vec<String> {
    let mut v: Vec<String> = it.collect();
    v.sort();
    v
}

/// Serialize `g` so that two graphs get the same string iff they are
/// isomorphic respecting node kinds, premise/conclusion ports, box
/// structure, the designated root and any marked edges. Node names and
/// variable annotations are ignored. Contraction premises, cut premises,
/// axiom conclusions and auxiliary door sets are unordered.
pub fn canonical_form(g: &Graph, root: EdgeId) -> Result<String, GraphError> {
    canonical_form_marked(g, root, &HashMap::new())
}

/// [`canonical_form`] with the token position recorded.
pub fn canonical_form_with_token(
    g: &Graph,
    root: EdgeId,
    token: (EdgeId, Direction),
) -> Result<String, GraphError> {
    let mut marks = HashMap::new();
    marks.insert(token.0, format!("token{:?}", token.1));
    canonical_form_marked(g, root, &marks)
}

pub fn canonical_form_marked(
    g: &Graph,
    root: EdgeId,
    marks: &HashMap<EdgeId, String>,
) -> Result<String, GraphError> {
    let root_edge = g.edges.get(&root).ok_or(GraphError::UnknownEdge(root))?;
    for e in marks.keys() {
        if !g.edges.contains_key(e) {
            return Err(GraphError::UnknownEdge(*e));
        }
    }
    let d = Describer { g, root, marks };
    let mut numbering = Numbering {
        num: HashMap::new(),
        order: Vec::new(),
    };
    if let Some(s) = root_edge.src {
        numbering.visit(g, s, Arrival::Via(root), &|_| true);
    }

    // Everything the root does not reach, one undirected component at a time.
    let leftover: BTreeSet<NodeId> = g
        .nodes
        .keys()
        .filter(|n| !numbering.num.contains_key(n))
        .copied()
        .collect();
    let mut components: Vec<(String, Vec<NodeId>)> = Vec::new();
    let mut seen: BTreeSet<NodeId> = BTreeSet::new();
    for start in &leftover {
        if seen.contains(start) {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![*start];
        seen.insert(*start);
        while let Some(n) = stack.pop() {
            comp.push(n);
            let node = &g.nodes[&n];
            for e in node.ins.iter().chain(node.outs.iter()) {
                if let Some(m) = other_end(&g.edges[e], n) {
                    if leftover.contains(&m) && seen.insert(m) {
                        stack.push(m);
                    }
                }
            }
        }
        components.push(canonical_component(g, &d, &numbering.num, &comp));
    }
    components.sort();
    for (_, order) in components {
        for n in order {
            numbering.num.insert(n, numbering.order.len());
            numbering.order.push(n);
        }
    }

    let num = |n: NodeId| numbering.num.get(&n).copied();
    let mut out = String::new();
    for (i, id) in numbering.order.iter().enumerate() {
        let _ = writeln!(out, "{i}:{}", d.node(*id, &num));
    }
    let mut boxes: Vec<String> = g
        .boxes
        .values()
        .map(|b| {
            let members: Vec<usize> = sorted_nums(b.members.iter().map(|m| numbering.num[m]));
            let aux: Vec<usize> = sorted_nums(b.auxiliaries.iter().map(|a| numbering.num[a]));
            format!(
                "box {}: {:?} aux {:?}",
                numbering.num[&b.principal], members, aux
            )
        })
        .collect();
    boxes.sort();
    for b in boxes {
        out.push_str(&b);
        out.push('\n');
    }
    let free_floating = g
        .edges
        .values()
        .filter(|e| e.src.is_none() && e.dst.is_none())
        .count();
    let _ = writeln!(out, "root:{}", root_desc(&d, root, &num));
    let _ = writeln!(out, "unattached:{free_floating}");
    let mut marked: Vec<String> = marks
        .iter()
        .map(|(e, m)| format!("mark {m}: {}", root_desc(&d, *e, &num)))
        .collect();
    marked.sort();
    for m in marked {
        out.push_str(&m);
        out.push('\n');
    }
    Ok(out)
}

fn sorted_nums(it: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = it.collect();
    v.sort_unstable();
    v
}

/// Both ends of an edge.
fn root_desc(d: &Describer<'_>, e: EdgeId, num: &dyn Fn(NodeId) -> Option<usize>) -> String {
    let edge = &d.g.edges[&e];
    let src = match edge.src {
        Some(s) => format!("{}.{}", num_str(num(s)), port_group(d.g, s, e)),
        None => "hole".into(),
    };
    let dst = match edge.dst {
        Some(t) => format!("{}.{}", num_str(num(t)), port_group(d.g, t, e)),
        None => "open".into(),
    };
    format!("{src}->{dst}")
}

/// Canonical numbering of one component not reached from the root: the
/// lexicographically smallest description over all starting points, taken
/// greedily until every node is numbered.
fn canonical_component(
    g: &Graph,
    d: &Describer<'_>,
    fixed: &HashMap<NodeId, usize>,
    comp: &[NodeId],
) -> (String, Vec<NodeId>) {
    let members: BTreeSet<NodeId> = comp.iter().copied().collect();
    let mut local = Numbering {
        num: HashMap::new(),
        order: Vec::new(),
    };
    let mut description = String::new();
    while local.order.len() < comp.len() {
        let mut best: Option<(String, Numbering)> = None;
        for &n in comp.iter().filter(|n| !local.num.contains_key(n)) {
            let starts: Vec<Option<EdgeId>> = match g.nodes[&n].kind {
                NodeKind::Ax => g.nodes[&n].outs.iter().map(|e| Some(*e)).collect(),
                NodeKind::Cut => g.nodes[&n].ins.iter().map(|e| Some(*e)).collect(),
                _ => vec![None],
            };
            for first in starts {
                let mut trial = Numbering {
                    num: local.num.clone(),
                    order: local.order.clone(),
                };
                let before = trial.order.len();
                trial.visit(g, n, Arrival::Start(first), &|m| members.contains(&m));
                let num = |m: NodeId| {
                    trial
                        .num
                        .get(&m)
                        .map(|i| i + 1_000_000)
                        .or_else(|| fixed.get(&m).copied())
                };
                let text: String = trial.order[before..]
                    .iter()
                    .map(|m| d.node(*m, &num))
                    .collect::<Vec<_>>()
                    .join(";");
                if best.as_ref().is_none_or(|(b, _)| text < *b) {
                    best = Some((text, trial));
                }
            }
        }
        let (text, chosen) = best.expect("component has an unnumbered node");
        description.push_str(&text);
        description.push('/');
        local = chosen;
    }
    (description, local.order)
}

// ---------------------------------------------------------------------------
// DOT export

fn dot(g: &Graph, token: Option<(EdgeId, Direction)>) -> String {
    let mut out = String::from("digraph G {\n  node [shape=box, fontname=\"monospace\"];\n");
    // Innermost enclosing box of every boxed node, doors included.
    let mut parent_of_box: BTreeMap<NodeId, Option<NodeId>> = BTreeMap::new();
    for b in g.boxes.values() {
        let parent = g
            .boxes
            .values()
            .filter(|o| o.members.contains(&b.principal))
            .min_by_key(|o| o.members.len())
            .map(|o| o.principal);
        parent_of_box.insert(b.principal, parent);
    }
    let mut home: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for id in g.nodes.keys() {
        let owner = if let Some(b) = g.boxes.get(id) {
            Some(b.principal)
        } else if let Some(p) = g.door_of.get(id) {
            Some(*p)
        } else {
            g.boxes
                .values()
                .filter(|b| b.members.contains(id))
                .min_by_key(|b| b.members.len())
                .map(|b| b.principal)
        };
        if let Some(o) = owner {
            home.insert(*id, o);
        }
    }

    fn emit(
        g: &Graph,
        out: &mut String,
        owner: Option<NodeId>,
        home: &BTreeMap<NodeId, NodeId>,
        parent_of_box: &BTreeMap<NodeId, Option<NodeId>>,
        indent: usize,
    ) {
        let pad = "  ".repeat(indent);
        for (id, n) in &g.nodes {
            if home.get(id).copied() == owner {
                let _ = writeln!(out, "{pad}{} [label=\"{} {}\"];", id, n.kind.tag(), id);
            }
        }
        for (b, parent) in parent_of_box {
            if *parent == owner {
                let _ = writeln!(
                    out,
                    "{pad}subgraph cluster_{} {{\n{pad}  style=dashed;",
                    b.0
                );
                emit(g, out, Some(*b), home, parent_of_box, indent + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
    emit(g, &mut out, None, &home, &parent_of_box, 1);

    for (id, e) in &g.edges {
        let src = match e.src {
            Some(s) => s.to_string(),
            None => {
                let _ = writeln!(out, "  in_{} [shape=point];", id.0);
                format!("in_{}", id.0)
            }
        };
        let dst = match e.dst {
            Some(d) => d.to_string(),
            None => {
                let _ = writeln!(out, "  out_{} [shape=point];", id.0);
                format!("out_{}", id.0)
            }
        };
        let mut attrs = Vec::new();
        if let Some(l) = &e.label {
            attrs.push(format!("label=\"{l}\""));
        }
        if let Some((t, dir)) = token {
            if t == *id {
                attrs.push(format!("color=red, penwidth=3, xlabel=\"token {dir:?}\""));
            }
        }
        let _ = writeln!(out, "  {src} -> {dst} [{}];", attrs.join(", "));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axiom() -> (Graph, EdgeId) {
        let mut g = Graph::default();
        let ax = g.add_node(NodeKind::Ax);
        let a = g.new_edge(Some(ax));
        g.new_edge(Some(ax));
        g.root = Some(a);
        (g, a)
    }

    /// `!{ Ax }` with one auxiliary door: the axiom's second conclusion
    /// leaves through a `?` node.
    fn boxed_axiom(g: &mut Graph) -> (NodeId, EdgeId, EdgeId) {
        let ax = g.add_node(NodeKind::Ax);
        let a = g.new_edge(Some(ax));
        let b = g.new_edge(Some(ax));
        let bang = g.add_node(NodeKind::Bang);
        g.attach(a, bang);
        let concl = g.new_edge(Some(bang));
        let w = g.add_node(NodeKind::WhyNot);
        g.attach(b, w);
        let wout = g.new_edge(Some(w));
        g.add_box(BoxInfo {
            principal: bang,
            auxiliaries: vec![w],
            members: [ax].into(),
            origin: bang,
        });
        (bang, concl, wout)
    }

    #[test]
    fn single_axiom_is_well_boxed() {
        let (g, _) = axiom();
        assert_eq!(well_boxed_check(&g), Ok(()));
        assert_eq!(well_boxed_check(&Graph::default()), Ok(()));
    }

    #[test]
    fn orphan_why_not_is_rejected() {
        let (mut g, _) = axiom();
        let free = g.open_edges()[1];
        let w = g.add_node(NodeKind::WhyNot);
        g.attach(free, w);
        g.new_edge(Some(w));
        let err = well_boxed_check(&g).unwrap_err();
        assert_eq!(err.clause, Clause::AuxiliaryOwner);
        assert_eq!(err.node, Some(w));
    }

    #[test]
    fn incoming_edge_is_rejected() {
        let mut g = Graph::default();
        let d = g.add_node(NodeKind::Der);
        let e = g.new_edge(None);
        g.attach(e, d);
        g.new_edge(Some(d));
        assert_eq!(well_boxed_check(&g).unwrap_err().clause, Clause::NoIncoming);
    }

    #[test]
    fn leaking_box_is_rejected() {
        let mut g = Graph::default();
        let (bang, _, _) = boxed_axiom(&mut g);
        let info = g.box_of(bang).unwrap().clone();
        let mut broken = info.clone();
        broken.auxiliaries.clear();
        g.boxes.insert(bang, broken);
        g.door_of.clear();
        assert!(well_boxed_check(&g).is_err());
    }

    #[test]
    fn copy_preserves_shape_and_freshness() {
        let mut g = Graph::default();
        let (bang, concl, wout) = boxed_axiom(&mut g);
        let before = canonical_form(&g, concl).unwrap();
        let copy = copy_box(&mut g, bang).unwrap();
        assert_eq!(copy.members_copied, 1);
        assert_eq!(copy.doors_copied, 2);
        assert_eq!(g.node_count(), 6);
        let b = g.box_of(copy.principal).unwrap();
        assert_eq!(b.members.len(), 1);
        assert_eq!(b.auxiliaries.len(), 1);
        assert!(b.members.is_disjoint(&g.box_of(bang).unwrap().members));
        assert_eq!(b.origin, bang);
        assert_eq!(well_boxed_check(&g), Ok(()));
        // The copy sits in its own component, so the original still reads the
        // same from its root once the copy is accounted for separately.
        let mut alone = Graph::default();
        let (_, c2, _) = boxed_axiom(&mut alone);
        assert_eq!(canonical_form(&alone, c2).unwrap(), before);
        let _ = wout;
    }

    #[test]
    fn copy_preserves_nesting() {
        let mut g = Graph::default();
        let (inner, inner_concl, inner_w) = boxed_axiom(&mut g);
        // Outer box: Par(l = inner's door edge, r = inner box) under a !.
        let par = g.add_node(NodeKind::Par);
        g.attach(inner_w, par);
        g.attach(inner_concl, par);
        let pout = g.new_edge(Some(par));
        let outer = g.add_node(NodeKind::Bang);
        g.attach(pout, outer);
        let root = g.new_edge(Some(outer));
        let mut members: BTreeSet<NodeId> = g.box_of(inner).unwrap().members.clone();
        members.insert(inner);
        members.extend(g.box_of(inner).unwrap().auxiliaries.iter().copied());
        members.insert(par);
        g.add_box(BoxInfo {
            principal: outer,
            auxiliaries: vec![],
            members,
            origin: outer,
        });
        g.root = Some(root);
        assert_eq!(well_boxed_check(&g), Ok(()));

        let copy = copy_box(&mut g, outer).unwrap();
        assert_eq!(g.box_count(), 4);
        assert_eq!(well_boxed_check(&g), Ok(()));
        let nested: Vec<_> = g
            .boxes()
            .filter(|b| {
                g.box_of(copy.principal)
                    .unwrap()
                    .members
                    .contains(&b.principal)
            })
            .collect();
        assert_eq!(nested.len(), 1);
        assert_eq!(nested[0].origin, inner);
    }

    #[test]
    fn open_box_deletes_doors() {
        let mut g = Graph::default();
        let (bang, concl, _) = boxed_axiom(&mut g);
        g.root = Some(concl);
        let opened = open_box(&mut g, bang).unwrap();
        assert_eq!(opened.doors_deleted, 2);
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.box_count(), 0);
        assert_eq!(g.root, Some(opened.root));
        assert_eq!(well_boxed_check(&g), Ok(()));
    }

    #[test]
    fn open_box_with_many_doors() {
        let mut g = Graph::default();
        let tensor = g.add_node(NodeKind::Tensor);
        let mut auxiliaries = Vec::new();
        let mut members = BTreeSet::from([tensor]);
        for _ in 0..3 {
            let ax = g.add_node(NodeKind::Ax);
            members.insert(ax);
            let a = g.new_edge(Some(ax));
            let b = g.new_edge(Some(ax));
            if g.node(tensor).unwrap().ins.len() < 2 {
                g.attach(a, tensor);
            } else {
                let w = g.add_node(NodeKind::WhyNot);
                g.attach(a, w);
                g.new_edge(Some(w));
                auxiliaries.push(w);
            }
            let w = g.add_node(NodeKind::WhyNot);
            g.attach(b, w);
            g.new_edge(Some(w));
            auxiliaries.push(w);
        }
        let t = g.new_edge(Some(tensor));
        let bang = g.add_node(NodeKind::Bang);
        g.attach(t, bang);
        g.root = Some(g.new_edge(Some(bang)));
        g.add_box(BoxInfo {
            principal: bang,
            auxiliaries,
            members,
            origin: bang,
        });
        assert_eq!(well_boxed_check(&g), Ok(()));
        let before = g.node_count();
        let opened = open_box(&mut g, bang).unwrap();
        assert_eq!(opened.doors_deleted, 5);
        assert_eq!(before - g.node_count(), 5);
        assert_eq!(well_boxed_check(&g), Ok(()));
    }

    #[test]
    fn canonical_form_ignores_names() {
        let mut g1 = Graph::new(NameSupply::starting_at(0, 1));
        let (_, c1, _) = boxed_axiom(&mut g1);
        let mut g2 = Graph::new(NameSupply::starting_at(500, 7));
        let (_, c2, _) = boxed_axiom(&mut g2);
        assert_eq!(
            canonical_form(&g1, c1).unwrap(),
            canonical_form(&g2, c2).unwrap()
        );
        let (g3, a3) = axiom();
        assert_ne!(
            canonical_form(&g1, c1).unwrap(),
            canonical_form(&g3, a3).unwrap()
        );
    }

    #[test]
    fn canonical_form_sees_the_token() {
        let mut g = Graph::default();
        let (_, concl, wout) = boxed_axiom(&mut g);
        let up = canonical_form_with_token(&g, concl, (concl, Direction::Up)).unwrap();
        let down = canonical_form_with_token(&g, concl, (concl, Direction::Down)).unwrap();
        let elsewhere = canonical_form_with_token(&g, concl, (wout, Direction::Up)).unwrap();
        assert_ne!(up, down);
        assert_ne!(up, elsewhere);
        assert_eq!(
            canonical_form(&g, EdgeId(999)),
            Err(GraphError::UnknownEdge(EdgeId(999)))
        );
    }

    #[test]
    fn contraction_premise_order_is_irrelevant() {
        let build = |swap: bool| {
            let mut g = Graph::default();
            let t = g.add_node(NodeKind::Tensor);
            let ax1 = g.add_node(NodeKind::Ax);
            let ax2 = g.add_node(NodeKind::Der);
            let a1 = g.new_edge(Some(ax1));
            let b1 = g.new_edge(Some(ax1));
            let pre = g.add_node(NodeKind::Ax);
            let p0 = g.new_edge(Some(pre));
            let p1 = g.new_edge(Some(pre));
            g.attach(p0, ax2);
            let b2 = g.new_edge(Some(ax2));
            g.attach(a1, t);
            g.attach(p1, t);
            let root = g.new_edge(Some(t));
            let con = g.add_node(NodeKind::Con(0));
            if swap {
                g.attach(b2, con);
                g.attach(b1, con);
            } else {
                g.attach(b1, con);
                g.attach(b2, con);
            }
            g.new_edge(Some(con));
            g.root = Some(root);
            (g, root)
        };
        let (g1, r1) = build(false);
        let (g2, r2) = build(true);
        assert_eq!(
            canonical_form(&g1, r1).unwrap(),
            canonical_form(&g2, r2).unwrap()
        );
    }

    #[test]
    fn dot_export_has_clusters_and_token() {
        let mut g = Graph::default();
        let (_, concl, _) = boxed_axiom(&mut g);
        let dot = g.to_dot(Some((concl, Direction::Up)));
        assert!(dot.contains("subgraph cluster_"));
        assert!(dot.contains("style=dashed"));
        assert!(dot.contains("color=red"));
        assert!(dot.starts_with("digraph"));
    }
}
