//! λ-terms with explicit substitutions, free-variable multisets and
//! evaluation contexts.
//!
//! Variables are interned integers. Equality, ordering and hashing look at the
//! id only; the label is for printing. Fresh names come from an explicit
//! [`NameSupply`] so that every run is reproducible.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

/// A variable name.
#[derive(Clone, Debug)]
pub struct Var {
    id: u64,
    label: Arc<str>,
    fresh: bool,
}

impl Var {
    /// A variable with an explicit id. Callers must keep ids distinct for
    /// distinct names; the parser does this through its interner.
    pub fn new(id: u64, label: &str) -> Self {
        Var {
            id,
            label: Arc::from(label),
            fresh: false,
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Placeholder used when printing the hole of a context.
    pub(crate) fn hole_marker() -> Self {
        Var {
            id: u64::MAX,
            label: Arc::from("<.>"),
            fresh: false,
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Var {}

impl std::hash::Hash for Var {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}

impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Var {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.fresh {
            write!(f, "{}_{}", self.label, self.id)
        } else {
            f.write_str(&self.label)
        }
    }
}

/// Monotone supply of fresh identifiers, shared by variable and node names.
///
/// `stride` lets two supplies over the same starting point hand out disjoint
/// or simply different names, which the determinism checks rely on.
#[derive(Clone, Debug)]
pub struct NameSupply {
    next: u64,
    stride: u64,
}

impl Default for NameSupply {
    fn default() -> Self {
        NameSupply::new()
    }
}

impl NameSupply {
    pub fn new() -> Self {
        NameSupply { next: 0, stride: 1 }
    }

    pub fn starting_at(start: u64, stride: u64) -> Self {
        NameSupply {
            next: start,
            stride: stride.max(1),
        }
    }

    /// A supply that never issues an id already used in `t`.
    pub fn above(t: &Term) -> Self {
        let mut supply = NameSupply::new();
        supply.exclude_term(t);
        supply
    }

    pub fn fresh_id(&mut self) -> u64 {
        let id = self.next;
        self.next += self.stride;
        id
    }

    pub fn fresh_var(&mut self, hint: &Var) -> Var {
        Var {
            id: self.fresh_id(),
            label: hint.label.clone(),
            fresh: true,
        }
    }

    /// Make sure `id` is never issued.
    pub fn exclude(&mut self, id: u64) {
        if id >= self.next && id != u64::MAX {
            self.next = id + 1;
        }
    }

    pub fn exclude_term(&mut self, t: &Term) {
        t.visit_vars(&mut |v| self.exclude(v.id));
    }

    pub fn peek(&self) -> u64 {
        self.next
    }
}

/// Terms `x | λx.t | t t | t[x ← t]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Lam(Var, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
    Sub(Arc<Term>, Var, Arc<Term>),
}

impl Term {
    pub fn var(x: &Var) -> Term {
        Term::Var(x.clone())
    }

    pub fn lam(x: &Var, body: Term) -> Term {
        Term::Lam(x.clone(), Arc::new(body))
    }

    pub fn app(t: Term, u: Term) -> Term {
        Term::App(Arc::new(t), Arc::new(u))
    }

    pub fn sub(t: Term, x: &Var, u: Term) -> Term {
        Term::Sub(Arc::new(t), x.clone(), Arc::new(u))
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Term::Lam(..))
    }

    /// No explicit substitution occurs anywhere in the term.
    pub fn is_pure(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Lam(_, t) => t.is_pure(),
            Term::App(t, u) => t.is_pure() && u.is_pure(),
            Term::Sub(..) => false,
        }
    }

    fn visit_vars(&self, f: &mut impl FnMut(&Var)) {
        match self {
            Term::Var(x) => f(x),
            Term::Lam(x, t) => {
                f(x);
                t.visit_vars(f)
            }
            Term::App(t, u) => {
                t.visit_vars(f);
                u.visit_vars(f)
            }
            Term::Sub(t, x, u) => {
                f(x);
                t.visit_vars(f);
                u.visit_vars(f)
            }
        }
    }

    /// Binders in left-to-right order, with repetitions.
    pub fn binders(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(_) => {}
            Term::Lam(x, t) => {
                out.push(x.clone());
                t.collect_binders(out)
            }
            Term::App(t, u) => {
                t.collect_binders(out);
                u.collect_binders(out)
            }
            Term::Sub(t, x, u) => {
                out.push(x.clone());
                t.collect_binders(out);
                u.collect_binders(out)
            }
        }
    }

    /// Number of abstraction sub-terms.
    pub fn abstraction_count(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Lam(_, t) => 1 + t.abstraction_count(),
            Term::App(t, u) | Term::Sub(t, _, u) => t.abstraction_count() + u.abstraction_count(),
        }
    }
}

/// Multiset of variables, kept sorted by variable id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VarMultiset(BTreeMap<Var, usize>);

impl VarMultiset {
    pub fn new() -> Self {
        VarMultiset::default()
    }

    pub fn singleton(x: &Var) -> Self {
        let mut m = VarMultiset::new();
        m.insert(x, 1);
        m
    }

    pub fn from_vars<'a>(xs: impl IntoIterator<Item = &'a Var>) -> Self {
        let mut m = VarMultiset::new();
        for x in xs {
            m.insert(x, 1);
        }
        m
    }

    pub fn insert(&mut self, x: &Var, k: usize) {
        if k > 0 {
            *self.0.entry(x.clone()).or_insert(0) += k;
        }
    }

    /// Multiplicity `M(x)`.
    pub fn count(&self, x: &Var) -> usize {
        self.0.get(x).copied().unwrap_or(0)
    }

    pub fn contains(&self, x: &Var) -> bool {
        self.count(x) > 0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total number of elements, counting multiplicity.
    pub fn len(&self) -> usize {
        self.0.values().sum()
    }

    pub fn support(&self) -> BTreeSet<Var> {
        self.0.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, usize)> {
        self.0.iter().map(|(x, k)| (x, *k))
    }

    /// `M + M′`.
    pub fn sum(&self, other: &VarMultiset) -> VarMultiset {
        let mut out = self.clone();
        for (x, k) in other.iter() {
            out.insert(x, k);
        }
        out
    }

    /// `M − M′`, truncated at zero.
    pub fn difference(&self, other: &VarMultiset) -> VarMultiset {
        let mut out = VarMultiset::new();
        for (x, k) in self.iter() {
            let left = k.saturating_sub(other.count(x));
            out.insert(x, left);
        }
        out
    }

    /// `M \ x`: every copy of `x` removed.
    pub fn remove_all(&self, x: &Var) -> VarMultiset {
        let mut out = self.clone();
        out.0.remove(x);
        out
    }
}

impl fmt::Display for VarMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        let mut first = true;
        for (x, k) in self.iter() {
            for _ in 0..k {
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                write!(f, "{x}")?;
            }
        }
        f.write_str("]")
    }
}

pub fn fv(t: &Term) -> VarMultiset {
    match t {
        Term::Var(x) => VarMultiset::singleton(x),
        Term::Lam(x, t) => fv(t).remove_all(x),
        Term::App(t, u) => fv(t).sum(&fv(u)),
        Term::Sub(t, x, u) => fv(t).remove_all(x).sum(&fv(u)),
    }
}

/// One layer of an evaluation context, read from the hole outwards.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    /// `⟨·⟩ u`
    AppLeft(Term),
    /// `⟨·⟩[x ← u]`
    SubOuter(Var, Term),
    /// `E′⟨x⟩[x ← ⟨·⟩]`; the context stored here is `E′`, whose hole is
    /// filled with `x`.
    Hereditary(Var, Arc<EvalContext>),
}

/// Evaluation context `E ::= ⟨·⟩ | E t̄ | E[x ← t̄] | E′⟨x⟩[x ← E]`.
///
/// Stored as a list of frames, outermost first; the hole sits inside the
/// last frame. Plugging `E⟨E′⟩` is concatenation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EvalContext {
    frames: Vec<Frame>,
}

impl EvalContext {
    pub fn hole() -> Self {
        EvalContext::default()
    }

    pub fn from_frames(frames: Vec<Frame>) -> Self {
        EvalContext { frames }
    }

    /// `E u`
    pub fn app_left(inner: EvalContext, u: Term) -> Self {
        inner.wrap(Frame::AppLeft(u))
    }

    /// `E[x ← u]`
    pub fn sub_outer(inner: EvalContext, x: &Var, u: Term) -> Self {
        inner.wrap(Frame::SubOuter(x.clone(), u))
    }

    /// `E′⟨x⟩[x ← E]`
    pub fn hereditary(around: EvalContext, x: &Var, inner: EvalContext) -> Self {
        inner.wrap(Frame::Hereditary(x.clone(), Arc::new(around)))
    }

    fn wrap(mut self, outer: Frame) -> Self {
        self.frames.insert(0, outer);
        self
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }

    pub fn is_hole(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    /// Add a frame directly around the hole.
    pub fn push_inner(&mut self, frame: Frame) {
        self.frames.push(frame);
    }

    pub fn pop_inner(&mut self) -> Option<Frame> {
        self.frames.pop()
    }

    /// True for substitution contexts `A ::= ⟨·⟩ | A[x ← t̄]`.
    pub fn is_subst_context(&self) -> bool {
        self.frames.iter().all(|f| matches!(f, Frame::SubOuter(..)))
    }

    pub fn is_pure(&self) -> bool {
        self.frames.iter().all(|f| match f {
            Frame::AppLeft(u) | Frame::SubOuter(_, u) => u.is_pure(),
            Frame::Hereditary(_, around) => around.is_pure(),
        })
    }

    /// Structural check against the alpha-equivalence of the pluggings with
    /// a reserved hole variable.
    pub fn alpha_eq(&self, other: &EvalContext) -> bool {
        let hole = Term::var(&Var::hole_marker());
        alpha_eq(&plug_term(self, &hole), &plug_term(other, &hole))
    }
}

impl fmt::Display for EvalContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", plug_term(self, &Term::var(&Var::hole_marker())))
    }
}

/// Substitution context `A`, as a list of `(x, t̄)` layers, outermost first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SubstContext(pub Vec<(Var, Term)>);

impl SubstContext {
    pub fn from_context(e: &EvalContext) -> Option<Self> {
        e.frames
            .iter()
            .map(|f| match f {
                Frame::SubOuter(x, u) => Some((x.clone(), u.clone())),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(SubstContext)
    }
}

impl From<SubstContext> for EvalContext {
    fn from(a: SubstContext) -> Self {
        EvalContext::from_frames(
            a.0.into_iter()
                .map(|(x, u)| Frame::SubOuter(x, u))
                .collect(),
        )
    }
}

/// `FV_M(E)`.
pub fn fv_ctx(e: &EvalContext, m: &VarMultiset) -> VarMultiset {
    let mut acc = m.clone();
    for frame in e.frames.iter().rev() {
        acc = match frame {
            Frame::AppLeft(u) => acc.sum(&fv(u)),
            Frame::SubOuter(x, u) => acc.remove_all(x).sum(&fv(u)),
            Frame::Hereditary(x, around) => fv_ctx(around, &VarMultiset::singleton(x))
                .remove_all(x)
                .sum(&acc),
        };
    }
    acc
}

/// `E⟨t⟩`.
pub fn plug_term(e: &EvalContext, t: &Term) -> Term {
    let mut acc = t.clone();
    for frame in e.frames.iter().rev() {
        acc = match frame {
            Frame::AppLeft(u) => Term::app(acc, u.clone()),
            Frame::SubOuter(x, u) => Term::sub(acc, x, u.clone()),
            Frame::Hereditary(x, around) => Term::sub(plug_term(around, &Term::var(x)), x, acc),
        };
    }
    acc
}

/// `E⟨E′⟩`.
pub fn plug_ctx(e: &EvalContext, inner: &EvalContext) -> EvalContext {
    let mut frames = e.frames.clone();
    frames.extend(inner.frames.iter().cloned());
    EvalContext { frames }
}

/// `|t|`.
pub fn size(t: &Term) -> usize {
    match t {
        Term::Var(_) => 1,
        Term::Lam(_, t) => size(t) + 1,
        Term::App(t, u) | Term::Sub(t, _, u) => size(t) + size(u) + 1,
    }
}

/// Closed, every variable bound at most once, and no bound variable free.
pub fn is_closed_well_named(t: &Term) -> bool {
    if !fv(t).is_empty() {
        return false;
    }
    is_well_named(t)
}

pub fn is_well_named(t: &Term) -> bool {
    let free = fv(t);
    let mut seen = BTreeSet::new();
    t.binders()
        .into_iter()
        .all(|x| !free.contains(&x) && seen.insert(x))
}

/// α-equivalent copy of `t` whose bound variables are all fresh.
pub fn rename_fresh(t: &Term, supply: &mut NameSupply) -> Term {
    fn go(t: &Term, env: &mut HashMap<Var, Var>, supply: &mut NameSupply) -> Term {
        match t {
            Term::Var(x) => Term::Var(env.get(x).cloned().unwrap_or_else(|| x.clone())),
            Term::Lam(x, body) => {
                let y = supply.fresh_var(x);
                let shadowed = env.insert(x.clone(), y.clone());
                let body = go(body, env, supply);
                restore(env, x, shadowed);
                Term::lam(&y, body)
            }
            Term::App(t, u) => Term::app(go(t, env, supply), go(u, env, supply)),
            Term::Sub(body, x, arg) => {
                let arg = go(arg, env, supply);
                let y = supply.fresh_var(x);
                let shadowed = env.insert(x.clone(), y.clone());
                let body = go(body, env, supply);
                restore(env, x, shadowed);
                Term::sub(body, &y, arg)
            }
        }
    }
    fn restore(env: &mut HashMap<Var, Var>, x: &Var, shadowed: Option<Var>) {
        match shadowed {
            Some(prev) => env.insert(x.clone(), prev),
            None => env.remove(x),
        };
    }
    go(t, &mut HashMap::new(), supply)
}

#[derive(Debug, PartialEq, Eq)]
enum Nameless {
    Free(u64),
    Bound(usize),
    Lam(Box<Nameless>),
    App(Box<Nameless>, Box<Nameless>),
    Sub(Box<Nameless>, Box<Nameless>),
}

fn nameless(t: &Term, scope: &mut Vec<Var>) -> Nameless {
    match t {
        Term::Var(x) => match scope.iter().rev().position(|y| y == x) {
            Some(i) => Nameless::Bound(i),
            None => Nameless::Free(x.id),
        },
        Term::Lam(x, body) => {
            scope.push(x.clone());
            let body = nameless(body, scope);
            scope.pop();
            Nameless::Lam(Box::new(body))
        }
        Term::App(t, u) => {
            Nameless::App(Box::new(nameless(t, scope)), Box::new(nameless(u, scope)))
        }
        Term::Sub(body, x, arg) => {
            let arg = nameless(arg, scope);
            scope.push(x.clone());
            let body = nameless(body, scope);
            scope.pop();
            Nameless::Sub(Box::new(body), Box::new(arg))
        }
    }
}

/// α-equivalence via de Bruijn indices. Used for checking only; the machines
/// never compare terms up to renaming.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    nameless(t, &mut Vec::new()) == nameless(u, &mut Vec::new())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Lam(x, body) => write!(f, "\\{x}. {body}"),
            Term::App(t, u) => {
                match **t {
                    Term::Lam(..) => write!(f, "({t})")?,
                    _ => write!(f, "{t}")?,
                }
                match **u {
                    Term::Var(_) => write!(f, " {u}"),
                    _ => write!(f, " ({u})"),
                }
            }
            Term::Sub(t, x, u) => {
                match **t {
                    Term::Var(_) | Term::Sub(..) => write!(f, "{t}")?,
                    _ => write!(f, "({t})")?,
                }
                write!(f, "[{x} <- {u}]")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars() -> (Var, Var, Var, Var) {
        (
            Var::new(0, "x"),
            Var::new(1, "y"),
            Var::new(2, "z"),
            Var::new(3, "u"),
        )
    }

    #[test]
    fn fv_examples() {
        let (x, y, _, _) = vars();
        assert_eq!(fv(&Term::var(&x)), VarMultiset::singleton(&x));
        assert!(fv(&Term::lam(&x, Term::var(&x))).is_empty());
        let t = Term::app(Term::app(Term::var(&x), Term::var(&x)), Term::var(&y));
        let m = fv(&t);
        assert_eq!(m.count(&x), 2);
        assert_eq!(m.count(&y), 1);
        assert_eq!(m.to_string(), "[x,x,y]");
    }

    #[test]
    fn multiset_notation() {
        let (x, y, _, _) = vars();
        let m = VarMultiset::from_vars([&x, &x, &y]);
        assert_eq!(m.remove_all(&x), VarMultiset::singleton(&y));
        assert_eq!(m.difference(&VarMultiset::singleton(&x)).count(&x), 1);
        assert_eq!(m.sum(&m).len(), 6);
        assert_eq!(m.support().len(), 2);
    }

    #[test]
    fn fv_ctx_examples() {
        let (x, y, z, _) = vars();
        assert_eq!(
            fv_ctx(&EvalContext::hole(), &VarMultiset::singleton(&y)),
            VarMultiset::singleton(&y)
        );
        let app = EvalContext::app_left(EvalContext::hole(), Term::var(&x));
        assert_eq!(
            fv_ctx(&app, &VarMultiset::new()),
            VarMultiset::singleton(&x)
        );
        let sub = EvalContext::sub_outer(app, &x, Term::lam(&z, Term::var(&z)));
        assert!(fv_ctx(&sub, &VarMultiset::new()).is_empty());
    }

    #[test]
    fn hereditary_plugging() {
        let (x, _, z, _) = vars();
        let v = Term::lam(&z, Term::var(&z));
        let e = EvalContext::hereditary(EvalContext::hole(), &x, EvalContext::hole());
        assert_eq!(plug_term(&e, &v), Term::sub(Term::var(&x), &x, v.clone()));
        // FV_M(E′⟨x⟩[x ← E]) drops the x filling E′ but keeps M.
        let m = VarMultiset::singleton(&z);
        assert_eq!(fv_ctx(&e, &m), m);
    }

    #[test]
    fn plug_examples() {
        let (x, _, z, u) = vars();
        let id = Term::lam(&x, Term::var(&x));
        assert_eq!(
            plug_term(&EvalContext::hole(), &Term::var(&x)),
            Term::var(&x)
        );
        let e = EvalContext::app_left(EvalContext::hole(), Term::var(&u));
        assert_eq!(plug_term(&e, &id), Term::app(id.clone(), Term::var(&u)));

        assert_eq!(plug_ctx(&EvalContext::hole(), &e), e);
        assert_eq!(plug_ctx(&e, &EvalContext::hole()), e);
        let inner = EvalContext::sub_outer(EvalContext::hole(), &x, Term::lam(&z, Term::var(&z)));
        let expected = EvalContext::app_left(inner.clone(), Term::var(&u));
        assert_eq!(plug_ctx(&e, &inner), expected);
    }

    #[test]
    fn size_examples() {
        let (x, _, z, _) = vars();
        assert_eq!(size(&Term::var(&x)), 1);
        assert_eq!(size(&Term::lam(&x, Term::var(&x))), 2);
        let t = Term::app(Term::lam(&x, Term::var(&x)), Term::lam(&z, Term::var(&z)));
        assert_eq!(size(&t), 5);
    }

    #[test]
    fn closed_well_named_examples() {
        let (x, _, _, _) = vars();
        assert!(is_closed_well_named(&Term::lam(&x, Term::var(&x))));
        assert!(!is_closed_well_named(&Term::lam(
            &x,
            Term::lam(&x, Term::var(&x))
        )));
        assert!(!is_closed_well_named(&Term::var(&x)));
    }

    #[test]
    fn rename_fresh_examples() {
        let (x, y, z, _) = vars();
        let mut supply = NameSupply::starting_at(10, 1);
        let id = Term::lam(&z, Term::var(&z));
        let copy = rename_fresh(&id, &mut supply);
        assert!(alpha_eq(&copy, &id));
        assert!(copy.binders().iter().all(|b| b.id() >= 10));

        let k = Term::lam(&x, Term::lam(&y, Term::app(Term::var(&x), Term::var(&y))));
        let copy = rename_fresh(&k, &mut supply);
        assert!(alpha_eq(&copy, &k));
        let bs = copy.binders();
        assert_eq!(bs.len(), 2);
        assert_ne!(bs[0], bs[1]);
        assert!(bs.iter().all(|b| *b != x && *b != y));
    }

    #[test]
    fn rename_keeps_free_variables() {
        let (x, y, _, _) = vars();
        let t = Term::lam(&x, Term::app(Term::var(&x), Term::var(&y)));
        let mut supply = NameSupply::starting_at(100, 1);
        let copy = rename_fresh(&t, &mut supply);
        assert_eq!(fv(&copy), VarMultiset::singleton(&y));
    }

    #[test]
    fn alpha_eq_distinguishes_binding_structure() {
        let (x, y, _, _) = vars();
        let k = Term::lam(&x, Term::lam(&y, Term::var(&x)));
        let k2 = Term::lam(&x, Term::lam(&y, Term::var(&y)));
        assert!(!alpha_eq(&k, &k2));
        assert!(alpha_eq(&k, &Term::lam(&y, Term::lam(&x, Term::var(&y)))));
    }

    #[test]
    fn subst_context_round_trip() {
        let (x, _, z, _) = vars();
        let a = EvalContext::sub_outer(EvalContext::hole(), &x, Term::lam(&z, Term::var(&z)));
        assert!(a.is_subst_context());
        let s = SubstContext::from_context(&a).unwrap();
        assert_eq!(EvalContext::from(s), a);
        let e = EvalContext::app_left(EvalContext::hole(), Term::var(&x));
        assert!(SubstContext::from_context(&e).is_none());
    }

    #[test]
    fn display_forms() {
        let (x, _, z, _) = vars();
        let t = Term::app(Term::lam(&x, Term::var(&x)), Term::lam(&z, Term::var(&z)));
        assert_eq!(t.to_string(), "(\\x. x) (\\z. z)");
        let a = EvalContext::sub_outer(EvalContext::hole(), &x, Term::lam(&z, Term::var(&z)));
        assert_eq!(a.to_string(), "<.>[x <- \\z. z]");
    }
}
