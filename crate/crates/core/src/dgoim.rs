//! The Dynamic GoI Machine with the rewrites-first strategy.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{copy_box, open_box, Direction, EdgeId, Graph, NodeId, NodeKind};
use crate::sam::{validate_initial, SamError};
use crate::stats::{Label, RunStats};
use crate::term::{NameSupply, Term};
use crate::translate::translate_term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Position {
    pub edge: EdgeId,
    pub dir: Direction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HistoryEntry {
    Ax(NodeId),
    Cut(NodeId),
    Tensor(NodeId),
    Par(NodeId),
    Bang(NodeId),
    Der(NodeId),
    /// Contraction of the given arity, entered through `premise`.
    Con {
        node: NodeId,
        arity: usize,
        premise: EdgeId,
    },
}

impl HistoryEntry {
    pub fn node(&self) -> NodeId {
        match *self {
            HistoryEntry::Ax(n)
            | HistoryEntry::Cut(n)
            | HistoryEntry::Tensor(n)
            | HistoryEntry::Par(n)
            | HistoryEntry::Bang(n)
            | HistoryEntry::Der(n) => n,
            HistoryEntry::Con { node, .. } => node,
        }
    }

    fn same_kind(&self, other: &HistoryEntry) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MultEntry {
    L,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PassKind {
    Ax,
    Cut,
    Tensor,
    Par,
    Bang,
    Der,
    Con,
}

/// Rewrite rules; `R2`/`R3` are the two β variants, by which premise pair
/// the token's path threads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
}

impl Rule {
    pub fn label(self) -> Label {
        match self {
            Rule::R2 | Rule::R3 => Label::B,
            Rule::R6 | Rule::R7 => Label::S,
            _ => Label::O,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Rule::R1 => 1,
            Rule::R2 => 2,
            Rule::R3 => 3,
            Rule::R4 => 4,
            Rule::R5 => 5,
            Rule::R6 => 6,
            Rule::R7 => 7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Transition {
    Pass(PassKind),
    Rewrite(Rule),
}

impl Transition {
    pub fn label(self) -> Label {
        match self {
            Transition::Pass(_) => Label::O,
            Transition::Rewrite(r) => r.label(),
        }
    }

    pub fn is_pass(self) -> bool {
        matches!(self, Transition::Pass(_))
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transition::Pass(k) => write!(f, "pass:{k:?}"),
            Transition::Rewrite(r) => write!(f, "rewrite:{}", r.number()),
        }
    }
}

/// What a transition did, with the box metrics its cost depends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepInfo {
    pub transition: Transition,
    pub label: Label,
    pub doors_deleted: usize,
    pub nodes_copied: usize,
    pub doors_copied: usize,
}

impl StepInfo {
    fn plain(transition: Transition) -> Self {
        StepInfo {
            transition,
            label: transition.label(),
            doors_deleted: 0,
            nodes_copied: 0,
            doors_copied: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DgoimError {
    #[error("invalid initial term: {0}")]
    Invalid(#[from] SamError),
    #[error("corrupted machine state: {0}")]
    Corrupted(String),
}

fn corrupted<T>(msg: impl Into<String>) -> Result<T, DgoimError> {
    Err(DgoimError::Corrupted(msg.into()))
}

/// Contents and door counts of the boxes of the initial graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxShape {
    pub members: usize,
    pub auxiliaries: usize,
}

#[derive(Clone, Debug)]
pub struct MachineState {
    pub graph: Graph,
    pub position: Position,
    /// Top of stack last.
    pub history: Vec<HistoryEntry>,
    /// Top of stack last.
    pub mult: Vec<MultEntry>,
    origins: Arc<BTreeMap<NodeId, BoxShape>>,
}

/// Token on the root of `t0†`, both stacks empty.
pub fn initial_state(t0: &Term, names: NameSupply) -> MachineState {
    let og = translate_term(t0, names);
    MachineState::new(
        og.graph,
        Position {
            edge: og.conclusion,
            dir: Direction::Up,
        },
    )
}

impl MachineState {
    /// A state with empty stacks; the current boxes become the reference
    /// shapes for provenance checks.
    pub fn new(graph: Graph, position: Position) -> Self {
        let origins = graph
            .boxes()
            .map(|b| {
                (
                    b.principal,
                    BoxShape {
                        members: b.members.len(),
                        auxiliaries: b.auxiliaries.len(),
                    },
                )
            })
            .collect();
        MachineState {
            graph,
            position,
            history: Vec::new(),
            mult: Vec::new(),
            origins: Arc::new(origins),
        }
    }

    /// Independent deep copy.
    pub fn snapshot(&self) -> MachineState {
        self.clone()
    }

    /// The initial box a box descends from, if tracked.
    pub fn origin_shape(&self, origin: NodeId) -> Option<BoxShape> {
        self.origins.get(&origin).copied()
    }

    pub fn max_initial_box_size(&self) -> usize {
        self.origins
            .values()
            .map(|s| s.members + 1 + s.auxiliaries)
            .max()
            .unwrap_or(0)
    }

    fn edge_src(&self, e: EdgeId) -> Result<Option<NodeId>, DgoimError> {
        match self.graph.edge(e) {
            Some(edge) => Ok(edge.src),
            None => corrupted(format!("token on missing edge {e}")),
        }
    }

    fn edge_dst(&self, e: EdgeId) -> Result<Option<NodeId>, DgoimError> {
        match self.graph.edge(e) {
            Some(edge) => Ok(edge.dst),
            None => corrupted(format!("missing edge {e}")),
        }
    }

    /// One pass transition, if a schema matches. The graph is not touched.
    pub fn pass_step(&mut self) -> Result<Option<StepInfo>, DgoimError> {
        let Some((entry, pos, mult_op)) = pass_target(&self.graph, self.position, &self.mult)?
        else {
            return Ok(None);
        };
        match mult_op {
            MultOp::Push(m) => self.mult.push(m),
            MultOp::Pop => {
                self.mult.pop();
            }
            MultOp::Keep => {}
        }
        self.history.push(entry);
        self.position = pos;
        let kind = match entry {
            HistoryEntry::Ax(_) => PassKind::Ax,
            HistoryEntry::Cut(_) => PassKind::Cut,
            HistoryEntry::Tensor(_) => PassKind::Tensor,
            HistoryEntry::Par(_) => PassKind::Par,
            HistoryEntry::Bang(_) => PassKind::Bang,
            HistoryEntry::Der(_) => PassKind::Der,
            HistoryEntry::Con { .. } => PassKind::Con,
        };
        Ok(Some(StepInfo::plain(Transition::Pass(kind))))
    }

    /// One rewrite transition, chosen by the top of the history stack.
    pub fn rewrite_step(&mut self) -> Result<Option<StepInfo>, DgoimError> {
        use HistoryEntry as H;
        let h = &self.history;
        let n = h.len();
        let top = |i: usize| if i < n { Some(h[n - 1 - i]) } else { None };
        match (top(0), top(1), top(2), top(3)) {
            (
                Some(H::Bang(a)),
                Some(H::Cut(b)),
                Some(H::Con {
                    node,
                    arity,
                    premise,
                }),
                Some(_),
            ) => {
                if arity > 1 {
                    self.rule6(a, b, node, premise).map(Some)
                } else {
                    self.rule7(b, node, premise).map(Some)
                }
            }
            (Some(H::Bang(a)), Some(H::Cut(b)), Some(H::Der(d)), _) => {
                self.rule4(a, b, d).map(Some)
            }
            (Some(H::Bang(a)), Some(H::Cut(b)), Some(H::Ax(x)), _) => self.rule5(a, b, x).map(Some),
            (Some(H::Par(p)), Some(H::Cut(b)), Some(H::Tensor(t)), _) => {
                self.rule23(p, b, t).map(Some)
            }
            (Some(H::Cut(b)), Some(H::Ax(x)), _, _) => self.rule1(b, x).map(Some),
            _ => Ok(None),
        }
    }

    /// Rewrite if possible, else pass.
    pub fn step(&mut self) -> Result<Option<StepInfo>, DgoimError> {
        if let Some(info) = self.rewrite_step()? {
            return Ok(Some(info));
        }
        self.pass_step()
    }

    fn expect_kind(
        &self,
        n: NodeId,
        want: fn(NodeKind) -> bool,
        what: &str,
    ) -> Result<(), DgoimError> {
        match self.graph.kind(n) {
            Some(k) if want(k) => Ok(()),
            other => corrupted(format!("expected {what} at {n}, found {other:?}")),
        }
    }

    /// The premise of `cut` other than `e`.
    fn other_premise(&self, cut: NodeId, e: EdgeId) -> Result<EdgeId, DgoimError> {
        let node = self.graph.node(cut).expect("checked");
        match node.ins.as_slice() {
            [a, b] if *a == e => Ok(*b),
            [a, b] if *b == e => Ok(*a),
            _ => corrupted(format!("edge {e} is not a premise of {cut}")),
        }
    }

    fn pop(&mut self, k: usize) {
        let n = self.history.len();
        self.history.truncate(n - k);
    }

    /// Cut:Ax: splice out an axiom/cut pair.
    fn rule1(&mut self, cut: NodeId, ax: NodeId) -> Result<StepInfo, DgoimError> {
        self.expect_kind(cut, |k| k == NodeKind::Cut, "Cut")?;
        self.expect_kind(ax, |k| k == NodeKind::Ax, "Ax")?;
        let e = self.position.edge;
        let from_ax = self.other_premise(cut, e)?;
        if self.edge_src(from_ax)? != Some(ax) {
            return corrupted("cut is not fed by the axiom");
        }
        let outs = self.graph.node(ax).expect("checked").outs.clone();
        let far = if outs[0] == from_ax { outs[1] } else { outs[0] };
        self.graph.merge(e, far);
        self.graph.delete_edge(from_ax);
        self.graph.delete_node(ax);
        self.graph.delete_node(cut);
        self.pop(2);
        Ok(StepInfo::plain(Transition::Rewrite(Rule::R1)))
    }

    /// Par:Cut:Tensor: β.
    fn rule23(&mut self, par: NodeId, cut: NodeId, tensor: NodeId) -> Result<StepInfo, DgoimError> {
        self.expect_kind(par, |k| k == NodeKind::Par, "Par")?;
        self.expect_kind(cut, |k| k == NodeKind::Cut, "Cut")?;
        self.expect_kind(tensor, |k| k == NodeKind::Tensor, "Tensor")?;
        let e = self.position.edge;
        let p = self.graph.node(par).expect("checked").clone();
        let t = self.graph.node(tensor).expect("checked").clone();
        let side = match p.ins.iter().position(|x| *x == e) {
            Some(i) => i,
            None => return corrupted("token is not on a premise of the Par node"),
        };
        let cut_ins = &self.graph.node(cut).expect("checked").ins;
        if !(cut_ins.contains(&p.outs[0]) && cut_ins.contains(&t.outs[0])) {
            return corrupted("Par and Tensor do not meet at the cut");
        }
        self.graph.delete_edge(p.outs[0]);
        self.graph.delete_edge(t.outs[0]);
        for x in p.ins.iter().chain(t.ins.iter()) {
            self.graph.detach(*x);
        }
        self.graph.attach(t.ins[side], cut);
        self.graph.attach(p.ins[side], cut);
        let other = self.graph.add_node(NodeKind::Cut);
        self.graph.attach(t.ins[1 - side], other);
        self.graph.attach(p.ins[1 - side], other);
        self.graph.place_like(other, par);
        self.graph.delete_node(par);
        self.graph.delete_node(tensor);
        self.pop(3);
        self.history.push(HistoryEntry::Cut(cut));
        let rule = if side == 0 { Rule::R2 } else { Rule::R3 };
        Ok(StepInfo::plain(Transition::Rewrite(rule)))
    }

    fn check_provenance(&self, principal: NodeId) -> Result<(), DgoimError> {
        let b = self.graph.box_of(principal).expect("box exists");
        match self.origins.get(&b.origin) {
            Some(shape)
                if shape.members == b.members.len() && shape.auxiliaries == b.auxiliaries.len() =>
            {
                Ok(())
            }
            _ => corrupted(format!("box {principal} is not a copy of an initial box")),
        }
    }

    /// Bang:Cut:Der: open the box.
    fn rule4(&mut self, bang: NodeId, cut: NodeId, der: NodeId) -> Result<StepInfo, DgoimError> {
        self.expect_kind(bang, |k| k == NodeKind::Bang, "Bang")?;
        self.expect_kind(cut, |k| k == NodeKind::Cut, "Cut")?;
        self.expect_kind(der, |k| k == NodeKind::Der, "Der")?;
        if self.edge_dst(self.position.edge)? != Some(cut) {
            return corrupted("box conclusion is not cut");
        }
        self.check_provenance(bang)?;
        let der_node = self.graph.node(der).expect("checked").clone();
        if self.edge_dst(der_node.outs[0])? != Some(cut) {
            return corrupted("dereliction is not cut against the box");
        }
        let opened =
            open_box(&mut self.graph, bang).map_err(|e| DgoimError::Corrupted(e.to_string()))?;
        self.graph.merge(der_node.ins[0], der_node.outs[0]);
        self.graph.delete_node(der);
        self.position = Position {
            edge: opened.root,
            dir: Direction::Up,
        };
        self.pop(3);
        self.history.push(HistoryEntry::Cut(cut));
        Ok(StepInfo {
            doors_deleted: opened.doors_deleted,
            ..StepInfo::plain(Transition::Rewrite(Rule::R4))
        })
    }

    /// Bang:Cut:Ax: move the box past an axiom.
    fn rule5(&mut self, bang: NodeId, cut: NodeId, ax: NodeId) -> Result<StepInfo, DgoimError> {
        self.expect_kind(bang, |k| k == NodeKind::Bang, "Bang")?;
        self.expect_kind(cut, |k| k == NodeKind::Cut, "Cut")?;
        self.expect_kind(ax, |k| k == NodeKind::Ax, "Ax")?;
        let e = self.position.edge;
        let from_ax = self.other_premise(cut, e)?;
        if self.edge_src(from_ax)? != Some(ax) {
            return corrupted("cut is not fed by the axiom");
        }
        let outs = self.graph.node(ax).expect("checked").outs.clone();
        let far = if outs[0] == from_ax { outs[1] } else { outs[0] };
        self.graph.merge(e, far);
        self.graph.delete_edge(from_ax);
        self.graph.delete_node(ax);
        self.graph.delete_node(cut);
        self.pop(3);
        self.history.push(HistoryEntry::Bang(bang));
        Ok(StepInfo::plain(Transition::Rewrite(Rule::R5)))
    }

    /// Bang:Cut:Con(n+1), n > 0: copy the box for the traversed premise.
    fn rule6(
        &mut self,
        bang: NodeId,
        cut: NodeId,
        con: NodeId,
        premise: EdgeId,
    ) -> Result<StepInfo, DgoimError> {
        self.expect_kind(bang, |k| k == NodeKind::Bang, "Bang")?;
        self.expect_kind(cut, |k| k == NodeKind::Cut, "Cut")?;
        self.expect_kind(
            con,
            |k| matches!(k, NodeKind::Con(n) if n > 1),
            "Con(n > 1)",
        )?;
        if self.edge_dst(premise)? != Some(con) {
            return corrupted("recorded premise no longer enters the contraction");
        }
        self.check_provenance(bang)?;
        let copy =
            copy_box(&mut self.graph, bang).map_err(|e| DgoimError::Corrupted(e.to_string()))?;
        self.graph.detach(premise);
        let eta = self.graph.add_node(NodeKind::Cut);
        self.graph.attach(premise, eta);
        self.graph.attach(copy.conclusion, eta);
        self.graph.place_like(eta, con);
        for (orig, _, copy_out) in &copy.doors {
            let orig_out = self.graph.node(*orig).expect("door exists").outs[0];
            let phi = match self.edge_dst(orig_out)? {
                Some(phi) if matches!(self.graph.kind(phi), Some(NodeKind::Con(_))) => phi,
                other => {
                    return corrupted(format!(
                        "auxiliary door {orig} feeds {other:?}, not a contraction"
                    ))
                }
            };
            self.graph.attach(*copy_out, phi);
        }
        let sharp = self.history[self.history.len() - 4];
        self.pop(4);
        self.history.push(sharp);
        self.history.push(HistoryEntry::Cut(eta));
        self.history.push(HistoryEntry::Bang(copy.principal));
        self.position = Position {
            edge: copy.conclusion,
            dir: self.position.dir,
        };
        Ok(StepInfo {
            nodes_copied: copy.members_copied,
            doors_copied: copy.doors_copied,
            ..StepInfo::plain(Transition::Rewrite(Rule::R6))
        })
    }

    /// Bang:Cut:Con(1): drop a unary contraction.
    fn rule7(&mut self, cut: NodeId, con: NodeId, premise: EdgeId) -> Result<StepInfo, DgoimError> {
        self.expect_kind(con, |k| k == NodeKind::Con(1), "Con(1)")?;
        let node = self.graph.node(con).expect("checked").clone();
        if node.ins != [premise] || self.edge_dst(node.outs[0])? != Some(cut) {
            return corrupted("unary contraction is not between the premise and the cut");
        }
        self.graph.merge(premise, node.outs[0]);
        self.graph.delete_node(con);
        let n = self.history.len();
        self.history.remove(n - 3);
        Ok(StepInfo::plain(Transition::Rewrite(Rule::R7)))
    }

    /// Replay the history from the root and check that it leads to the
    /// current position with the current multiplicative stack, visiting
    /// the current position only at the end.
    pub fn rooted_check(&self) -> bool {
        let Some(root) = self.graph.root else {
            return false;
        };
        if self.graph.edge(root).is_none_or(|e| e.dst.is_some()) {
            return false;
        }
        let mut pos = Position {
            edge: root,
            dir: Direction::Up,
        };
        let mut mult: Vec<MultEntry> = Vec::new();
        let mut seen = HashSet::new();
        for entry in &self.history {
            seen.insert(pos);
            let Ok(Some((got, next, op))) = pass_target(&self.graph, pos, &mult) else {
                return false;
            };
            if got.node() != entry.node() || !got.same_kind(entry) {
                return false;
            }
            match op {
                MultOp::Push(m) => mult.push(m),
                MultOp::Pop => {
                    mult.pop();
                }
                MultOp::Keep => {}
            }
            pos = next;
        }
        pos == self.position && mult == self.mult && !seen.contains(&self.position)
    }

    /// No transition applies.
    pub fn is_final(&self) -> bool {
        let mut probe = self.clone();
        matches!(probe.rewrite_step(), Ok(None)) && matches!(probe.pass_step(), Ok(None))
    }
}

enum MultOp {
    Push(MultEntry),
    Pop,
    Keep,
}

/// The pass schema matching `pos`, if any.
fn pass_target(
    g: &Graph,
    pos: Position,
    mult: &[MultEntry],
) -> Result<Option<(HistoryEntry, Position, MultOp)>, DgoimError> {
    let Some(edge) = g.edge(pos.edge) else {
        return corrupted(format!("token on missing edge {}", pos.edge));
    };
    let e = pos.edge;
    match pos.dir {
        Direction::Up => {
            let Some(n) = edge.src else { return Ok(None) };
            let node = g.node(n).expect("edge source exists");
            match node.kind {
                NodeKind::Ax => {
                    let other = if node.outs[0] == e {
                        node.outs[1]
                    } else {
                        node.outs[0]
                    };
                    Ok(Some((
                        HistoryEntry::Ax(n),
                        Position {
                            edge: other,
                            dir: Direction::Down,
                        },
                        MultOp::Keep,
                    )))
                }
                NodeKind::Tensor | NodeKind::Par => {
                    let Some(m) = mult.last() else {
                        return corrupted(format!("multiplicative stack empty at {n}"));
                    };
                    let exit = node.ins[if *m == MultEntry::L { 0 } else { 1 }];
                    let entry = if node.kind == NodeKind::Tensor {
                        HistoryEntry::Tensor(n)
                    } else {
                        HistoryEntry::Par(n)
                    };
                    Ok(Some((
                        entry,
                        Position {
                            edge: exit,
                            dir: Direction::Up,
                        },
                        MultOp::Pop,
                    )))
                }
                NodeKind::Bang => Ok(Some((
                    HistoryEntry::Bang(n),
                    Position {
                        edge: e,
                        dir: Direction::Down,
                    },
                    MultOp::Keep,
                ))),
                NodeKind::WhyNot => corrupted(format!("token reached auxiliary door {n}")),
                _ => Ok(None),
            }
        }
        Direction::Down => {
            let Some(n) = edge.dst else { return Ok(None) };
            let node = g.node(n).expect("edge target exists");
            let down = |out: EdgeId| Position {
                edge: out,
                dir: Direction::Down,
            };
            match node.kind {
                NodeKind::Cut => {
                    let other = if node.ins[0] == e {
                        node.ins[1]
                    } else {
                        node.ins[0]
                    };
                    Ok(Some((
                        HistoryEntry::Cut(n),
                        Position {
                            edge: other,
                            dir: Direction::Up,
                        },
                        MultOp::Keep,
                    )))
                }
                NodeKind::Tensor | NodeKind::Par => {
                    let m = if node.ins[0] == e {
                        MultEntry::L
                    } else {
                        MultEntry::R
                    };
                    let entry = if node.kind == NodeKind::Tensor {
                        HistoryEntry::Tensor(n)
                    } else {
                        HistoryEntry::Par(n)
                    };
                    Ok(Some((entry, down(node.outs[0]), MultOp::Push(m))))
                }
                NodeKind::Der => Ok(Some((
                    HistoryEntry::Der(n),
                    down(node.outs[0]),
                    MultOp::Keep,
                ))),
                NodeKind::Con(arity) if arity > 0 => Ok(Some((
                    HistoryEntry::Con {
                        node: n,
                        arity,
                        premise: e,
                    },
                    down(node.outs[0]),
                    MultOp::Keep,
                ))),
                NodeKind::WhyNot => corrupted(format!("token reached auxiliary door {n}")),
                _ => Ok(None),
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceFrame {
    pub index: usize,
    pub label: Label,
    pub rule: String,
    pub node_count: usize,
    pub history_depth: usize,
    pub mult_depth: usize,
}

#[derive(Clone, Debug)]
pub enum DgoimOutcome {
    Halted(MachineState),
    FuelExhausted(MachineState),
}

impl DgoimOutcome {
    pub fn state(&self) -> &MachineState {
        match self {
            DgoimOutcome::Halted(s) | DgoimOutcome::FuelExhausted(s) => s,
        }
    }

    pub fn halted(&self) -> bool {
        matches!(self, DgoimOutcome::Halted(_))
    }
}

#[derive(Clone, Debug)]
pub struct DgoimRun {
    pub outcome: DgoimOutcome,
    pub stats: RunStats,
    pub steps: Vec<StepInfo>,
    pub trace: Vec<TraceFrame>,
}

/// Called with the step index and the state after each transition.
pub type Observer<'a> = &'a mut dyn FnMut(usize, &MachineState, &StepInfo);

/// Options for [`dgoim_run_with`].
pub struct RunOptions<'a> {
    pub fuel: usize,
    pub keep_trace: bool,
    pub names: NameSupply,
    pub observer: Option<Observer<'a>>,
}

pub fn dgoim_run(t0: &Term, fuel: usize, keep_trace: bool) -> Result<DgoimRun, DgoimError> {
    dgoim_run_with(
        t0,
        RunOptions {
            fuel,
            keep_trace,
            names: NameSupply::new(),
            observer: None,
        },
    )
}

pub fn dgoim_run_with(t0: &Term, mut opts: RunOptions<'_>) -> Result<DgoimRun, DgoimError> {
    validate_initial(t0)?;
    let mut state = initial_state(t0, opts.names);
    let mut stats = RunStats::default();
    let mut steps = Vec::new();
    let mut trace = Vec::new();
    for index in 0..opts.fuel {
        let Some(info) = state.step()? else {
            return Ok(DgoimRun {
                outcome: DgoimOutcome::Halted(state),
                stats,
                steps,
                trace,
            });
        };
        stats.record(info.label, &info.transition.to_string());
        if opts.keep_trace {
            trace.push(TraceFrame {
                index,
                label: info.label,
                rule: info.transition.to_string(),
                node_count: state.graph.node_count(),
                history_depth: state.history.len(),
                mult_depth: state.mult.len(),
            });
        }
        if let Some(obs) = opts.observer.as_mut() {
            obs(index, &state, &info);
        }
        steps.push(info);
    }
    let outcome = if state.is_final() {
        DgoimOutcome::Halted(state)
    } else {
        DgoimOutcome::FuelExhausted(state)
    };
    Ok(DgoimRun {
        outcome,
        stats,
        steps,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{canonical_form, well_boxed_check};
    use crate::parse::parse;

    fn run(src: &str) -> DgoimRun {
        dgoim_run(&parse(src).unwrap(), 10_000, true).unwrap()
    }

    fn labels(r: &DgoimRun) -> String {
        r.steps.iter().map(|s| s.label.to_string()).collect()
    }

    #[test]
    fn identity_applied_to_identity() {
        let r = run("(\\x. x) (\\z. z)");
        assert!(r.outcome.halted());
        assert_eq!((r.stats.b, r.stats.s, r.stats.o), (1, 1, 13));
        assert_eq!(
            labels(&r),
            "oooo".to_string() + "o" + "oobo" + "ooo" + "o" + "so"
        );
        let end = r.outcome.state();
        assert_eq!(end.graph.node_count(), 4);
        assert_eq!(end.position.dir, Direction::Down);
        assert_eq!(Some(end.position.edge), end.graph.root);
    }

    #[test]
    fn value_halts_after_one_pass() {
        let r = run("\\z. z");
        assert!(r.outcome.halted());
        assert_eq!(r.steps.len(), 1);
        assert_eq!(r.steps[0].transition, Transition::Pass(PassKind::Bang));
    }

    #[test]
    fn omega_runs_out_of_fuel() {
        let r = dgoim_run(&parse("(\\x. x x) (\\y. y y)").unwrap(), 2_000, false).unwrap();
        assert!(!r.outcome.halted());
        assert_eq!(r.steps.len(), 2_000);
    }

    #[test]
    fn rejects_open_terms() {
        assert!(matches!(
            dgoim_run(&parse("x").unwrap(), 10, false),
            Err(DgoimError::Invalid(_))
        ));
    }

    #[test]
    fn first_step_is_a_pass() {
        let mut s = initial_state(&parse("(\\x. x) (\\z. z)").unwrap(), NameSupply::new());
        assert!(s.rooted_check());
        assert_eq!(s.rewrite_step(), Ok(None));
        assert!(s.pass_step().unwrap().is_some());
    }

    #[test]
    fn invariants_hold_after_every_step() {
        for src in [
            "(\\x. x x) (\\z. z)",
            "(\\f. \\x. f (f x)) (\\y. y) (\\z. z)",
            "(\\x. \\y. y) (\\z. z)",
            "(\\a. (\\b. b a) (\\c. c)) (\\d. d)",
        ] {
            let t = parse(src).unwrap();
            let mut s = initial_state(&t, NameSupply::new());
            while s.step().unwrap().is_some() {
                well_boxed_check(&s.graph).unwrap_or_else(|v| panic!("{src}: {v}"));
                assert!(s.rooted_check(), "{src}");
            }
        }
    }

    #[test]
    fn rule_six_grows_by_box_size_plus_one() {
        let t = parse("(\\x. x x) (\\z. z)").unwrap();
        let mut s = initial_state(&t, NameSupply::new());
        loop {
            let before = s.graph.node_count();
            let original = s.graph.boxes().map(|b| b.principal).collect::<Vec<_>>();
            let info = s.step().unwrap().expect("rule 6 occurs");
            if info.transition == Transition::Rewrite(Rule::R6) {
                let grown = s.graph.node_count() - before;
                assert_eq!(grown, info.nodes_copied + info.doors_copied + 1);
                assert!(original.iter().all(|p| s.graph.box_of(*p).is_some()));
                break;
            }
        }
    }

    #[test]
    fn rule_seven_removes_one_node() {
        let mut s = initial_state(&parse("(\\x. x) (\\z. z)").unwrap(), NameSupply::new());
        loop {
            let before = s.graph.node_count();
            let info = s.step().unwrap().unwrap();
            if info.transition == Transition::Rewrite(Rule::R7) {
                assert_eq!(before - s.graph.node_count(), 1);
                break;
            }
        }
    }

    #[test]
    fn rule_one_removes_two_nodes() {
        let mut s = initial_state(&parse("(\\x. x) (\\z. z)").unwrap(), NameSupply::new());
        loop {
            let before = s.graph.node_count();
            let depth = s.history.len();
            let info = s.step().unwrap().unwrap();
            if info.transition == Transition::Rewrite(Rule::R1) {
                assert_eq!(before - s.graph.node_count(), 2);
                assert_eq!(depth - s.history.len(), 2);
                break;
            }
        }
    }

    #[test]
    fn tensor_up_pops_left() {
        let mut s = initial_state(&parse("(\\x. x) (\\z. z)").unwrap(), NameSupply::new());
        // Walk to the tensor's conclusion, then turn around by hand.
        for _ in 0..2 {
            s.pass_step().unwrap();
        }
        let tensor_out = s.position.edge;
        let tensor = s.graph.edge(tensor_out).unwrap().src.unwrap();
        s.position.dir = Direction::Up;
        s.mult = vec![MultEntry::L];
        let info = s.pass_step().unwrap().unwrap();
        assert_eq!(info.transition, Transition::Pass(PassKind::Tensor));
        assert_eq!(s.position.edge, s.graph.node(tensor).unwrap().ins[0]);
        assert!(s.mult.is_empty());
        assert_eq!(*s.history.last().unwrap(), HistoryEntry::Tensor(tensor));
    }

    #[test]
    fn rooted_check_detects_deleted_nodes() {
        let mut s = initial_state(&parse("(\\x. x) (\\z. z)").unwrap(), NameSupply::new());
        for _ in 0..4 {
            s.pass_step().unwrap();
        }
        assert!(s.rooted_check());
        s.history[0] = HistoryEntry::Ax(NodeId(9_999));
        assert!(!s.rooted_check());
    }

    #[test]
    fn runs_agree_up_to_naming() {
        let t = parse("(\\x. x x) (\\y. y)").unwrap();
        let mut a = initial_state(&t, NameSupply::new());
        let mut b = initial_state(&t, NameSupply::starting_at(10_000, 3));
        loop {
            let sa = a.step().unwrap();
            let sb = b.step().unwrap();
            assert_eq!(sa.map(|s| s.transition), sb.map(|s| s.transition));
            let Some(_) = sa else { break };
            assert_eq!(
                canonical_form(&a.graph, a.graph.root.unwrap()).unwrap(),
                canonical_form(&b.graph, b.graph.root.unwrap()).unwrap()
            );
        }
    }
}
