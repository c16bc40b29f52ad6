//! The acceptance suite, shared by the test harness and the `check`
//! command. Each criterion reports pass/fail with a short summary.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    church_app, random_context, random_open_term, standard_corpus, variable_pool, Namer,
};
use crate::cost::{dgoim_check_bounds, efficiency_fit, CostReport, FamilyPoint};
use crate::dgoim::{dgoim_run, dgoim_run_with, initial_state, DgoimRun, MachineState, RunOptions};
use crate::graph::{canonical_form_marked, well_boxed_check, NodeKind};
use crate::parse::parse;
use crate::sam::{sam_check_bounds, sam_run, Configuration, Phase, SamRun};
use crate::sim::{lockstep, related};
use crate::term::{
    alpha_eq, fv, fv_ctx, plug_ctx, plug_term, size, EvalContext, Frame, NameSupply, SubstContext,
    Term, Var, VarMultiset,
};
use crate::translate::{translate_ctx, translate_term, CtxGraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "criterion {} [{verdict}] {}: {}",
            self.id, self.title, self.detail
        )
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub seed: u64,
    pub sam_fuel: usize,
    /// Generated instances per decomposition property.
    pub decomposition_instances: usize,
    pub determinism_terms: usize,
    pub church_range: (usize, usize),
    pub spread_threshold: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 2024,
            sam_fuel: 100_000,
            decomposition_instances: 250,
            determinism_terms: 50,
            church_range: (2, 64),
            spread_threshold: 3.0,
        }
    }
}

impl Config {
    /// DGoIM fuel matching the SAM fuel: at most four transitions per
    /// storeless step, plus slack.
    pub fn dgoim_fuel(&self) -> usize {
        self.sam_fuel * 4 + 16
    }
}

/// The corpus with each program's storeless run.
pub struct Prepared {
    pub terms: Vec<Term>,
    pub sam: Vec<SamRun>,
}

impl Prepared {
    pub fn new(cfg: &Config) -> Self {
        let terms = standard_corpus(cfg.seed);
        let sam = terms
            .iter()
            .map(|t| sam_run(t, cfg.sam_fuel, false).expect("corpus terms are valid"))
            .collect();
        Prepared { terms, sam }
    }

    pub fn halting(&self) -> impl Iterator<Item = (usize, &Term)> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(i, _)| self.sam[*i].outcome.halted())
    }
}

fn result(id: u8, title: &'static str, failures: &[String], summary: String) -> CriterionResult {
    let mut detail = summary;
    if !failures.is_empty() {
        detail.push_str(&format!(
            "; {} failure(s), first: {}",
            failures.len(),
            failures[0]
        ));
    }
    CriterionResult {
        id,
        title,
        passed: failures.is_empty(),
        detail,
    }
}

/// Both garbage-collection examples end in the expected context
/// configurations.
pub fn criterion1() -> CriterionResult {
    let cases = [
        ("(\\x. x) (\\z. z)", "\\z. z", EvalContext::hole()),
        ("(\\x. \\y. y) (\\z. z)", "\\y. y", {
            let t = crate::parse::parse_term("w[x <- \\z. z]").expect("valid");
            match t {
                Term::Sub(_, x, u) => {
                    EvalContext::from_frames(vec![Frame::SubOuter(x, (*u).clone())])
                }
                _ => unreachable!("parsed an explicit substitution"),
            }
        }),
    ];
    let mut failures = Vec::new();
    for (src, focus, ctx) in cases {
        let run = sam_run(&parse(src).expect("valid"), 1_000, false).expect("valid");
        let end = run.outcome.configuration();
        let expected = Configuration {
            focus: parse(focus).expect("valid"),
            context: ctx,
            phase: Phase::Ctxt,
        };
        let same = run.outcome.halted()
            && end.phase == Phase::Ctxt
            && alpha_eq(&end.focus, &expected.focus)
            && alpha_eq(&end.plugged(), &expected.plugged())
            && end.context.depth() == expected.context.depth();
        if !same {
            failures.push(format!("{src} ended at {end}, expected {expected}"));
        }
    }
    result(1, "example executions", &failures, "2 examples".into())
}

/// Every program that halts on the SAM halts on the DGoIM, with related
/// final states.
pub fn criterion2(p: &Prepared, cfg: &Config) -> CriterionResult {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (i, t) in p.halting() {
        checked += 1;
        let dg = dgoim_run(t, cfg.dgoim_fuel(), false).expect("valid");
        if !dg.outcome.halted() {
            failures.push(format!("#{i} {t}: DGoIM did not halt"));
        } else if !related(p.sam[i].outcome.configuration(), dg.outcome.state()) {
            failures.push(format!("#{i} {t}: final states not related"));
        }
    }
    result(
        2,
        "oracle equivalence",
        &failures,
        format!("{checked} halting of {} programs", p.terms.len()),
    )
}

/// Lockstep simulation with the prescribed step shapes.
pub fn criterion3(p: &Prepared, cfg: &Config) -> CriterionResult {
    let mut failures = Vec::new();
    let mut steps = 0;
    for (i, t) in p.halting() {
        let r = lockstep(t, cfg.sam_fuel, true).expect("valid");
        steps += r.sam_steps;
        if !r.passed() {
            failures.push(format!("#{i} {t}: {:?}", r.verdict));
        }
    }
    result(
        3,
        "lockstep step shapes",
        &failures,
        format!("{steps} synchronised steps"),
    )
}

/// The counting bounds on every SAM execution and every DGoIM run.
pub fn criterion4(p: &Prepared, cfg: &Config) -> CriterionResult {
    let mut failures = Vec::new();
    let (mut sam_bad, mut dg_bad, mut o_bad) = (0, 0, 0);
    let mut worst = (0usize, 0usize);
    for (i, t) in p.terms.iter().enumerate() {
        let n = size(t);
        let sam = &p.sam[i].stats;
        let dg = dgoim_run(t, cfg.dgoim_fuel(), false).expect("valid").stats;
        for (machine, stats, ok) in [
            ("SAM", sam, sam_check_bounds(sam, n)),
            ("DGoIM", &dg, dgoim_check_bounds(&dg, n)),
        ] {
            if ok {
                continue;
            }
            if machine == "SAM" {
                sam_bad += 1
            } else {
                dg_bad += 1
            }
            if stats.s <= stats.b {
                o_bad += 1;
            }
            failures.push(format!(
                "{machine} #{i} {t}: b={} s={} o={}",
                stats.b, stats.s, stats.o
            ));
        }
        if sam.s * worst.0.max(1) > worst.1 * sam.b.max(1) {
            worst = (sam.b, sam.s);
        }
    }
    result(
        4,
        "quantitative bounds",
        &failures,
        format!(
            "{} runs per machine, {sam_bad} SAM and {dg_bad} DGoIM violating ({o_bad} on the o bound alone); \
             largest s/b seen: s={} b={}",
            p.terms.len(),
            worst.1,
            worst.0
        ),
    )
}

/// Church application family fits `T = O((|t₀| + C)(b + D))` with a small
/// ratio spread.
pub fn criterion5(cfg: &Config) -> CriterionResult {
    let (from, to) = cfg.church_range;
    let family: Vec<FamilyPoint> = (from..=to)
        .map(|n| {
            let t = church_app(n);
            let run = dgoim_run(&t, cfg.dgoim_fuel(), false).expect("valid");
            let report = CostReport::from_run(&run, size(&t));
            FamilyPoint {
                input_size: size(&t),
                stats: run.stats,
                total_cost: report.total,
            }
        })
        .collect();
    let mut failures = Vec::new();
    match efficiency_fit(&family) {
        Ok(fit) => {
            if fit.spread > cfg.spread_threshold {
                failures.push(format!(
                    "spread {:.3} exceeds {}",
                    fit.spread, cfg.spread_threshold
                ));
            }
            result(
                5,
                "efficiency fit",
                &failures,
                format!(
                    "n = {from}..={to}, C = {}, D = {}, spread = {:.3}",
                    fit.c, fit.d, fit.spread
                ),
            )
        }
        Err(e) => result(5, "efficiency fit", &[e.to_string()], String::new()),
    }
}

/// Check the per-step structural invariants along a whole run.
pub fn check_run_invariants(t: &Term, fuel: usize) -> Result<usize, String> {
    let mut state = initial_state(t, NameSupply::new());
    let n0 = state.graph.node_count();
    let c = state.max_initial_box_size();
    let mut i = 0;
    loop {
        let (h, m) = (state.history.len(), state.mult.len());
        let Some(info) = state.step().map_err(|e| e.to_string())? else {
            return Ok(i);
        };
        i += 1;
        if let Err(v) = well_boxed_check(&state.graph) {
            return Err(format!("step {i} ({}): {v}", info.transition));
        }
        if !state.rooted_check() {
            return Err(format!("step {i} ({}): not rooted", info.transition));
        }
        if state.graph.node_count() > n0 + c * i {
            return Err(format!(
                "step {i}: {} nodes exceeds {n0} + {c}·{i}",
                state.graph.node_count()
            ));
        }
        if state.history.len() > h + 1 || state.mult.len() > m + 1 {
            return Err(format!(
                "step {i} ({}): a stack grew by more than one",
                info.transition
            ));
        }
        if info.transition.is_pass() && state.history.len() != h + 1 {
            return Err(format!(
                "step {i}: pass did not push exactly one history entry"
            ));
        }
        if i >= fuel {
            return Ok(i);
        }
    }
}

pub fn criterion6(p: &Prepared, cfg: &Config) -> CriterionResult {
    let mut failures = Vec::new();
    let mut steps = 0;
    for (i, t) in p.halting() {
        match check_run_invariants(t, cfg.dgoim_fuel()) {
            Ok(n) => steps += n,
            Err(e) => failures.push(format!("#{i} {t}: {e}")),
        }
    }
    result(
        6,
        "structural invariants",
        &failures,
        format!("{steps} transitions checked"),
    )
}

/// One generated decomposition instance: a context, a term, a multiset.
#[derive(Clone, Debug)]
pub struct Instance {
    pub ctx: EvalContext,
    pub inner: EvalContext,
    pub term: Term,
    pub m: VarMultiset,
}

pub fn gen_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = variable_pool(4);
    let mut names = Namer::default();
    let ctx = random_context(&mut rng, 4, &pool, &mut names);
    let inner = random_context(&mut rng, 3, &pool, &mut names);
    let term_size = rng.gen_range(1..=10);
    let term = random_open_term(&mut rng, term_size, &pool, &mut names);
    let mut m = VarMultiset::new();
    for x in &pool {
        let k = rng.gen_range(0..=2);
        if k > 0 {
            m.insert(x, k);
        }
    }
    Instance {
        ctx,
        inner,
        term,
        m,
    }
}

pub fn check_fv_decomposition(inst: &Instance) -> Result<(), String> {
    let Instance {
        ctx,
        inner,
        term,
        m,
    } = inst;
    if fv(&plug_term(ctx, term)) != fv_ctx(ctx, &fv(term)) {
        return Err(format!("FV(E<t>) differs for E = {ctx}, t = {term}"));
    }
    if fv_ctx(&plug_ctx(ctx, inner), m) != fv_ctx(ctx, &fv_ctx(inner, m)) {
        return Err(format!(
            "FV_M(E<E'>) differs for E = {ctx}, E' = {inner}, M = {m}"
        ));
    }
    Ok(())
}

fn ctx_form(c: &CtxGraph) -> String {
    let marks = HashMap::from([(c.hole, "hole".to_string())]);
    canonical_form_marked(&c.graph, c.conclusion, &marks).expect("conclusion exists")
}

pub fn check_translation_decomposition(inst: &Instance) -> Result<(), String> {
    let Instance {
        ctx,
        inner,
        term,
        m,
    } = inst;
    let direct = translate_term(&plug_term(ctx, term), NameSupply::new());
    let composed = translate_ctx(ctx, &fv(term), NameSupply::new())
        .compose(&translate_term(term, NameSupply::new()))
        .map_err(|e| e.to_string())?;
    let f1 = crate::graph::canonical_form(&direct.graph, direct.conclusion).expect("exists");
    let f2 = crate::graph::canonical_form(&composed.graph, composed.conclusion).expect("exists");
    if f1 != f2 {
        return Err(format!("(E<t>)† differs for E = {ctx}, t = {term}"));
    }
    let whole = translate_ctx(&plug_ctx(ctx, inner), m, NameSupply::new());
    let parts = translate_ctx(ctx, &fv_ctx(inner, m), NameSupply::new())
        .compose_ctx(&translate_ctx(inner, m, NameSupply::new()))
        .map_err(|e| e.to_string())?;
    if ctx_form(&whole) != ctx_form(&parts) {
        return Err(format!(
            "(E<E'>)† differs for E = {ctx}, E' = {inner}, M = {m}"
        ));
    }
    Ok(())
}

/// How often each variable is captured by a substitution frame of `e`.
fn captures(e: &EvalContext) -> HashMap<Var, usize> {
    let mut out = HashMap::new();
    for f in e.frames() {
        if let Frame::SubOuter(x, _) = f {
            *out.entry(x.clone()).or_insert(0) += 1;
        }
    }
    out
}

/// Substitution contexts: the hole wire runs straight to the conclusion,
/// uncaptured variables pass through, captured ones end in contractions.
pub fn check_subst_decomposition(inst: &Instance) -> Result<(), String> {
    let frames: Vec<(Var, Term)> = inst
        .ctx
        .frames()
        .iter()
        .filter_map(|f| match f {
            Frame::SubOuter(x, u) => Some((x.clone(), u.clone())),
            _ => None,
        })
        .collect();
    let a: EvalContext = SubstContext(frames).into();
    let c = translate_ctx(&a, &inst.m, NameSupply::new());
    let hole = c.graph.edge(c.hole).expect("hole edge");
    if c.conclusion != c.hole || hole.src.is_some() || hole.dst.is_some() {
        return Err(format!("hole of {a} is not a bare wire"));
    }
    let captured = captures(&a);
    for (x, edges) in &c.hole_vars {
        for e in edges {
            let edge = c.graph.edge(*e).expect("hole edge");
            let ok = if captured.contains_key(x) {
                edge.dst
                    .is_some_and(|d| matches!(c.graph.kind(d), Some(NodeKind::Con(_))))
            } else {
                edge.dst.is_none() && c.free.get(x).is_some_and(|f| f.contains(e))
            };
            if !ok {
                return Err(format!("variable {x} of {a} is wired wrongly"));
            }
        }
    }
    // The remaining graph is the substitutions alone.
    let mut rest = c.graph.clone();
    for edges in c.hole_vars.values() {
        for e in edges {
            rest.delete_edge(*e);
        }
    }
    rest.delete_edge(c.hole);
    for (_, node) in rest.nodes() {
        if node
            .ins
            .iter()
            .chain(node.outs.iter())
            .any(|e| rest.edge(*e).is_none())
        {
            return Err(format!("substitutions of {a} touch the hole interface"));
        }
    }
    Ok(())
}

/// Split `inst.m` into variables captured exactly once and the rest.
fn split_captured(inst: &Instance) -> (VarMultiset, VarMultiset, VarMultiset) {
    let captured = captures(&inst.ctx);
    let mut once = VarMultiset::new();
    let mut never = VarMultiset::new();
    let mut more = VarMultiset::new();
    for (x, k) in inst.m.iter() {
        match captured.get(x).copied().unwrap_or(0) {
            0 => never.insert(x, k),
            1 => once.insert(x, k),
            _ => more.insert(x, k),
        }
    }
    (once, never, more)
}

/// Uncaptured variables factor out as plain wires.
pub fn check_uncaptured_decomposition(inst: &Instance) -> Result<(), String> {
    let (once, m0, more) = split_captured(inst);
    let rest = once.sum(&more);
    let big = translate_ctx(&inst.ctx, &m0.sum(&rest), NameSupply::new());
    let small = translate_ctx(&inst.ctx, &rest, NameSupply::new());
    let mut stripped = big.clone();
    for (x, _) in m0.iter() {
        for e in &big.hole_vars[x] {
            let edge = big.graph.edge(*e).expect("hole edge");
            if edge.dst.is_some() || !big.free.get(x).is_some_and(|f| f.contains(e)) {
                return Err(format!("uncaptured {x} in {} is not a wire", inst.ctx));
            }
            stripped.graph.delete_edge(*e);
        }
    }
    if ctx_form(&stripped) != ctx_form(&small) {
        return Err(format!(
            "E†_(M0+M) is not E†_M plus wires for E = {}",
            inst.ctx
        ));
    }
    Ok(())
}

/// Variables captured exactly once enter their binder's contraction.
pub fn check_captured_decomposition(inst: &Instance) -> Result<(), String> {
    let (m0, never, more) = split_captured(inst);
    let rest = never.sum(&more);
    let big = translate_ctx(&inst.ctx, &m0.sum(&rest), NameSupply::new());
    let small = translate_ctx(&inst.ctx, &rest, NameSupply::new());
    let mut stripped = big.clone();
    for (x, k) in m0.iter() {
        let targets: Vec<_> = big.hole_vars[x]
            .iter()
            .map(|e| big.graph.edge(*e).expect("edge").dst)
            .collect();
        let con = targets[0];
        let arity = con.and_then(|c| big.graph.kind(c));
        if targets.iter().any(|t| *t != con) || !matches!(arity, Some(NodeKind::Con(n)) if n >= k) {
            return Err(format!(
                "captured {x} in {} does not enter a single contraction",
                inst.ctx
            ));
        }
        for e in &big.hole_vars[x] {
            stripped.graph.delete_edge(*e);
        }
    }
    if ctx_form(&stripped) != ctx_form(&small) {
        return Err(format!(
            "E†_(M0+M) does not factor through E†_M for E = {}",
            inst.ctx
        ));
    }
    Ok(())
}

pub type InstanceCheck = fn(&Instance) -> Result<(), String>;

/// The five decomposition properties, by name.
pub const DECOMPOSITIONS: [(&str, InstanceCheck); 5] = [
    ("free variables", check_fv_decomposition),
    ("translation", check_translation_decomposition),
    ("substitution contexts", check_subst_decomposition),
    ("uncaptured variables", check_uncaptured_decomposition),
    ("captured variables", check_captured_decomposition),
];

pub fn criterion7(cfg: &Config) -> CriterionResult {
    let mut failures = Vec::new();
    for k in 0..cfg.decomposition_instances as u64 {
        let inst = gen_instance(cfg.seed ^ (k << 16));
        for (name, check) in DECOMPOSITIONS {
            if let Err(e) = check(&inst) {
                failures.push(format!("{name}: {e}"));
            }
        }
    }
    result(
        7,
        "decomposition properties",
        &failures,
        format!(
            "{} instances × {} properties",
            cfg.decomposition_instances,
            DECOMPOSITIONS.len()
        ),
    )
}

fn state_form(s: &MachineState) -> String {
    crate::sim::state_form(s).expect("machine graphs have a root and a token edge")
}

/// Run `t` twice with unrelated name supplies, comparing every step.
pub fn check_determinism(t: &Term, fuel: usize) -> Result<usize, String> {
    let mut forms = Vec::new();
    let mut record =
        |_: usize, s: &MachineState, _: &crate::dgoim::StepInfo| forms.push(state_form(s));
    let a = dgoim_run_with(
        t,
        RunOptions {
            fuel,
            keep_trace: false,
            names: NameSupply::new(),
            observer: Some(&mut record),
        },
    )
    .map_err(|e| e.to_string())?;
    let mut index = 0;
    let mut mismatch = None;
    let mut compare = |i: usize, s: &MachineState, _: &crate::dgoim::StepInfo| {
        if mismatch.is_none() && forms.get(i) != Some(&state_form(s)) {
            mismatch = Some(i);
        }
        index = i + 1;
    };
    let b: DgoimRun = dgoim_run_with(
        t,
        RunOptions {
            fuel,
            keep_trace: false,
            names: NameSupply::starting_at(1 << 32, 7),
            observer: Some(&mut compare),
        },
    )
    .map_err(|e| e.to_string())?;
    if let Some(i) = mismatch {
        return Err(format!("graphs differ after step {i}"));
    }
    let la: Vec<_> = a.steps.iter().map(|s| s.label).collect();
    let lb: Vec<_> = b.steps.iter().map(|s| s.label).collect();
    if la != lb {
        return Err("label sequences differ".into());
    }
    Ok(index)
}

pub fn criterion8(p: &Prepared, cfg: &Config) -> CriterionResult {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (i, t) in p.halting().take(cfg.determinism_terms) {
        checked += 1;
        if let Err(e) = check_determinism(t, cfg.dgoim_fuel()) {
            failures.push(format!("#{i} {t}: {e}"));
        }
    }
    result(
        8,
        "determinism up to naming",
        &failures,
        format!("{checked} programs"),
    )
}

/// Run every criterion, calling `report` as each finishes.
pub fn run_all(cfg: &Config, mut report: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let mut out = Vec::new();
    let mut push = |r: CriterionResult| {
        report(&r);
        out.push(r);
    };
    push(criterion1());
    let p = Prepared::new(cfg);
    push(criterion2(&p, cfg));
    push(criterion3(&p, cfg));
    push(criterion4(&p, cfg));
    push(criterion5(cfg));
    push(criterion6(&p, cfg));
    push(criterion7(cfg));
    push(criterion8(&p, cfg));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_criterion_passes() {
        let r = criterion1();
        assert!(r.passed, "{r}");
    }

    #[test]
    fn decomposition_checks_pass_on_a_few_instances() {
        for k in 0..40 {
            let inst = gen_instance(k);
            for (name, check) in DECOMPOSITIONS {
                check(&inst).unwrap_or_else(|e| panic!("{name} #{k}: {e}"));
            }
        }
    }

    #[test]
    fn invariants_on_small_programs() {
        for src in [
            "(\\x. x x) (\\z. z)",
            "(\\f. \\x. f (f x)) (\\y. y) (\\z. z)",
        ] {
            assert!(check_run_invariants(&parse(src).unwrap(), 10_000).is_ok());
            assert!(check_determinism(&parse(src).unwrap(), 10_000).is_ok());
        }
    }

    #[test]
    fn result_lines_read_well() {
        let r = CriterionResult {
            id: 4,
            title: "bounds",
            passed: false,
            detail: "x".into(),
        };
        assert_eq!(r.to_string(), "criterion 4 [FAIL] bounds: x");
    }
}
