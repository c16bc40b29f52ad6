//! Call-by-value translation of terms and evaluation contexts into graphs.
//!
//! * `x` becomes an axiom: one conclusion is the result, the other the free
//!   occurrence of `x`.
//! * `λx.t` becomes a box around `t`, with the occurrences of `x` contracted
//!   and paired with the body by a `Par` node. Every other free occurrence
//!   leaves the box through its own auxiliary door.
//! * `t u` cuts `t` against a dereliction of `u ⊗ a`, where `a` is an
//!   axiom whose other conclusion is the result.
//! * `t[x ← u]` cuts the contracted occurrences of `x` in `t` against `u`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{BoxInfo, EdgeId, Graph, NodeId, NodeKind};
use crate::term::{fv, plug_term, EvalContext, Frame, NameSupply, Term, Var, VarMultiset};

/// Open edges standing for free variable occurrences, grouped by variable.
pub type FreeEdges = BTreeMap<Var, Vec<EdgeId>>;

/// Translation of a term: a graph with a conclusion and one open edge per
/// free occurrence.
#[derive(Clone, Debug)]
pub struct OpenGraph {
    pub graph: Graph,
    pub conclusion: EdgeId,
    pub free: FreeEdges,
}

/// Translation of a context: like [`OpenGraph`], plus the incoming hole
/// edge and the incoming edges for the free variables of whatever fills it.
#[derive(Clone, Debug)]
pub struct CtxGraph {
    pub graph: Graph,
    pub conclusion: EdgeId,
    pub hole: EdgeId,
    pub hole_vars: FreeEdges,
    pub free: FreeEdges,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("variable {var} has {expected} hole edges but the term has {found} occurrences")]
    InterfaceMismatch {
        var: String,
        expected: usize,
        found: usize,
    },
}

fn append(into: &mut FreeEdges, from: FreeEdges) {
    for (x, es) in from {
        into.entry(x).or_default().extend(es);
    }
}

struct Builder<'g> {
    g: &'g mut Graph,
    created: Vec<NodeId>,
}

impl Builder<'_> {
    fn node(&mut self, kind: NodeKind) -> NodeId {
        let n = self.g.add_node(kind);
        self.created.push(n);
        n
    }

    fn out(&mut self, n: NodeId) -> EdgeId {
        self.g.new_edge(Some(n))
    }

    /// Con over `edges`, returning its conclusion.
    fn contract(&mut self, edges: Vec<EdgeId>) -> EdgeId {
        let con = self.node(NodeKind::Con(0));
        for e in edges {
            self.g.attach(e, con);
        }
        self.out(con)
    }

    fn cut(&mut self, a: EdgeId, b: EdgeId) {
        let cut = self.node(NodeKind::Cut);
        self.g.attach(a, cut);
        self.g.attach(b, cut);
    }

    /// Application node cluster for a function conclusion `f` and argument
    /// conclusion `u`; returns the result edge.
    fn apply(&mut self, f: EdgeId, u: EdgeId) -> EdgeId {
        let ax = self.node(NodeKind::Ax);
        let result = self.out(ax);
        let back = self.out(ax);
        let tensor = self.node(NodeKind::Tensor);
        self.g.attach(u, tensor);
        self.g.attach(back, tensor);
        let t = self.out(tensor);
        let der = self.node(NodeKind::Der);
        self.g.attach(t, der);
        let d = self.out(der);
        self.cut(d, f);
        result
    }

    fn term(&mut self, t: &Term) -> (EdgeId, FreeEdges) {
        match t {
            Term::Var(x) => {
                let ax = self.node(NodeKind::Ax);
                let c = self.out(ax);
                let occ = self.out(ax);
                self.g.set_label(occ, Some(x.clone()));
                (c, BTreeMap::from([(x.clone(), vec![occ])]))
            }
            Term::Lam(x, body) => {
                let start = self.created.len();
                let (bc, mut free) = self.term(body);
                let xs = free.remove(x).unwrap_or_default();
                let cc = self.contract(xs);
                let par = self.node(NodeKind::Par);
                self.g.attach(cc, par);
                self.g.attach(bc, par);
                let pc = self.out(par);
                let members = self.created[start..].iter().copied().collect();
                let bang = self.node(NodeKind::Bang);
                self.g.attach(pc, bang);
                let conclusion = self.out(bang);
                let mut auxiliaries = Vec::new();
                let mut outside = FreeEdges::new();
                for (y, es) in free {
                    for e in es {
                        let w = self.node(NodeKind::WhyNot);
                        self.g.attach(e, w);
                        let o = self.out(w);
                        self.g.set_label(o, Some(y.clone()));
                        auxiliaries.push(w);
                        outside.entry(y.clone()).or_default().push(o);
                    }
                }
                self.g.add_box(BoxInfo {
                    principal: bang,
                    auxiliaries,
                    members,
                    origin: bang,
                });
                (conclusion, outside)
            }
            Term::App(f, u) => {
                let (fc, mut free) = self.term(f);
                let (uc, ufree) = self.term(u);
                append(&mut free, ufree);
                (self.apply(fc, uc), free)
            }
            Term::Sub(body, x, u) => {
                let (bc, mut free) = self.term(body);
                let xs = free.remove(x).unwrap_or_default();
                let cc = self.contract(xs);
                let (uc, ufree) = self.term(u);
                self.cut(cc, uc);
                append(&mut free, ufree);
                (bc, free)
            }
        }
    }

    /// Wrap the partial context translation `(conclusion, free)` in `frame`.
    fn frame(
        &mut self,
        frame: &Frame,
        conclusion: EdgeId,
        mut free: FreeEdges,
    ) -> (EdgeId, FreeEdges) {
        match frame {
            Frame::AppLeft(u) => {
                let (uc, ufree) = self.term(u);
                append(&mut free, ufree);
                (self.apply(conclusion, uc), free)
            }
            Frame::SubOuter(x, u) => {
                let xs = free.remove(x).unwrap_or_default();
                let cc = self.contract(xs);
                let (uc, ufree) = self.term(u);
                self.cut(cc, uc);
                append(&mut free, ufree);
                (conclusion, free)
            }
            Frame::Hereditary(x, around) => {
                let body = plug_term(around, &Term::var(x));
                let (bc, mut bfree) = self.term(&body);
                let xs = bfree.remove(x).unwrap_or_default();
                let cc = self.contract(xs);
                self.cut(cc, conclusion);
                append(&mut bfree, free);
                (bc, bfree)
            }
        }
    }
}

/// Translate `t` into `g`, returning the conclusion and free edges.
pub fn translate_term_into(g: &mut Graph, t: &Term) -> (EdgeId, FreeEdges) {
    Builder {
        g,
        created: Vec::new(),
    }
    .term(t)
}

/// `t†`, with node names drawn from `names`.
pub fn translate_term(t: &Term, names: NameSupply) -> OpenGraph {
    let mut graph = Graph::new(names);
    let (conclusion, free) = translate_term_into(&mut graph, t);
    graph.root = Some(conclusion);
    OpenGraph {
        graph,
        conclusion,
        free,
    }
}

/// `E†_M`: the hole expects a term with free variables `m`.
pub fn translate_ctx(e: &EvalContext, m: &VarMultiset, names: NameSupply) -> CtxGraph {
    let mut graph = Graph::new(names);
    let hole = graph.new_edge(None);
    let mut hole_vars = FreeEdges::new();
    for (x, k) in m.iter() {
        for _ in 0..k {
            let e = graph.new_edge(None);
            graph.set_label(e, Some(x.clone()));
            hole_vars.entry(x.clone()).or_default().push(e);
        }
    }
    let mut b = Builder {
        g: &mut graph,
        created: Vec::new(),
    };
    let mut conclusion = hole;
    let mut free = hole_vars.clone();
    for frame in e.frames().iter().rev() {
        (conclusion, free) = b.frame(frame, conclusion, free);
    }
    graph.root = Some(conclusion);
    CtxGraph {
        graph,
        conclusion,
        hole,
        hole_vars,
        free,
    }
}

fn replace(free: &mut FreeEdges, old: EdgeId, new: EdgeId) {
    for es in free.values_mut() {
        for e in es.iter_mut().filter(|e| **e == old) {
            *e = new;
        }
    }
}

/// Join `inner`'s free edges to `hole_vars`, pairing occurrences in order.
fn join_vars(
    g: &mut Graph,
    inner: &FreeEdges,
    hole_vars: &FreeEdges,
    free: &mut FreeEdges,
) -> Result<(), TranslateError> {
    let keys: std::collections::BTreeSet<&Var> = inner.keys().chain(hole_vars.keys()).collect();
    for x in keys {
        let ins = inner.get(x).map(Vec::as_slice).unwrap_or(&[]);
        let holes = hole_vars.get(x).map(Vec::as_slice).unwrap_or(&[]);
        if ins.len() != holes.len() {
            return Err(TranslateError::InterfaceMismatch {
                var: x.to_string(),
                expected: holes.len(),
                found: ins.len(),
            });
        }
        for (i, h) in ins.iter().zip(holes) {
            g.merge(*i, *h);
            replace(free, *h, *i);
        }
    }
    Ok(())
}

impl CtxGraph {
    /// `E† ∘ t†`: plug a term translation into the hole.
    pub fn compose(self, t: &OpenGraph) -> Result<OpenGraph, TranslateError> {
        self.compose_focus(t).map(|(g, _)| g)
    }

    /// [`CtxGraph::compose`], also returning the edge that was `t`'s
    /// conclusion.
    pub fn compose_focus(mut self, t: &OpenGraph) -> Result<(OpenGraph, EdgeId), TranslateError> {
        let (_, emap) = self.graph.absorb(&t.graph);
        let focus = emap[&t.conclusion];
        let inner: FreeEdges = t
            .free
            .iter()
            .map(|(x, es)| (x.clone(), es.iter().map(|e| emap[e]).collect()))
            .collect();
        join_vars(&mut self.graph, &inner, &self.hole_vars, &mut self.free)?;
        let conclusion = if self.hole == self.conclusion {
            focus
        } else {
            self.conclusion
        };
        self.graph.merge(focus, self.hole);
        self.graph.root = Some(conclusion);
        Ok((
            OpenGraph {
                graph: self.graph,
                conclusion,
                free: self.free,
            },
            focus,
        ))
    }

    /// `E† ∘ E′†`: plug a context translation into the hole.
    pub fn compose_ctx(mut self, inner: &CtxGraph) -> Result<CtxGraph, TranslateError> {
        let (_, emap) = self.graph.absorb(&inner.graph);
        let map = |f: &FreeEdges| -> FreeEdges {
            f.iter()
                .map(|(x, es)| (x.clone(), es.iter().map(|e| emap[e]).collect()))
                .collect()
        };
        let inner_free = map(&inner.free);
        let inner_hole_vars = map(&inner.hole_vars);
        let inner_conclusion = emap[&inner.conclusion];
        let inner_hole = emap[&inner.hole];
        join_vars(
            &mut self.graph,
            &inner_free,
            &self.hole_vars,
            &mut self.free,
        )?;
        let conclusion = if self.hole == self.conclusion {
            inner_conclusion
        } else {
            self.conclusion
        };
        self.graph.merge(inner_conclusion, self.hole);
        self.graph.root = Some(conclusion);
        Ok(CtxGraph {
            graph: self.graph,
            conclusion,
            hole: inner_hole,
            hole_vars: inner_hole_vars,
            free: self.free,
        })
    }
}

/// `(E⟨t⟩)†` assembled from the separate translations.
pub fn translate_plugged(
    e: &EvalContext,
    t: &Term,
    names: NameSupply,
) -> Result<OpenGraph, TranslateError> {
    translate_plugged_focus(e, t, names).map(|(g, _)| g)
}

/// [`translate_plugged`], also returning the edge of `t`'s conclusion.
pub fn translate_plugged_focus(
    e: &EvalContext,
    t: &Term,
    names: NameSupply,
) -> Result<(OpenGraph, EdgeId), TranslateError> {
    // `absorb` renames the term's nodes, so its own supply is irrelevant.
    translate_ctx(e, &fv(t), names).compose_focus(&translate_term(t, NameSupply::new()))
}
