//! The call-by-need storeless abstract machine.
//!
//! Configurations pair a focused pure term with an evaluation context and a
//! phase. Six rules, three of them overhead (`O1`–`O3`), one β rule with a
//! delayed substitution, and two substitution rules; `SOne` drops the
//! binding once its last occurrence has been substituted.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::stats::{Label, RunStats};
use crate::term::{
    fv_ctx, is_closed_well_named, plug_term, rename_fresh, EvalContext, Frame, NameSupply, Term,
    VarMultiset,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    Term,
    Ctxt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub focus: Term,
    pub context: EvalContext,
    pub phase: Phase,
}

impl Configuration {
    pub fn initial(t0: Term) -> Self {
        Configuration {
            focus: t0,
            context: EvalContext::hole(),
            phase: Phase::Term,
        }
    }

    /// `E⟨t̄⟩`.
    pub fn plugged(&self) -> Term {
        plug_term(&self.context, &self.focus)
    }

    /// `(v̄, A)_ctxt`.
    pub fn is_final(&self) -> bool {
        self.phase == Phase::Ctxt && self.focus.is_value() && self.context.is_subst_context()
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phase = match self.phase {
            Phase::Term => "term",
            Phase::Ctxt => "ctxt",
        };
        write!(f, "({}, {})_{}", self.focus, self.context, phase)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SamRule {
    O1,
    O2,
    O3,
    B,
    SPos,
    SOne,
}

impl SamRule {
    pub const ALL: [SamRule; 6] = [
        SamRule::O1,
        SamRule::O2,
        SamRule::O3,
        SamRule::B,
        SamRule::SPos,
        SamRule::SOne,
    ];

    pub fn label(self) -> Label {
        match self {
            SamRule::O1 | SamRule::O2 | SamRule::O3 => Label::O,
            SamRule::B => Label::B,
            SamRule::SPos | SamRule::SOne => Label::S,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            SamRule::O1 => "O1",
            SamRule::O2 => "O2",
            SamRule::O3 => "O3",
            SamRule::B => "B",
            SamRule::SPos => "SPos",
            SamRule::SOne => "SOne",
        }
    }
}

impl fmt::Display for SamRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamError {
    #[error("malformed configuration: {0}")]
    Malformed(String),
    #[error("initial term must be closed and well-named")]
    NotClosedWellNamed,
    #[error("initial term must be pure")]
    NotPure,
}

/// Apply the unique enabled rule in place. `Ok(None)` iff the configuration
/// is final.
pub fn step_in_place(
    c: &mut Configuration,
    supply: &mut NameSupply,
) -> Result<Option<SamRule>, SamError> {
    match c.phase {
        Phase::Term => match c.focus.clone() {
            Term::App(t, u) => {
                c.context.push_inner(Frame::AppLeft((*u).clone()));
                c.focus = (*t).clone();
                Ok(Some(SamRule::O1))
            }
            Term::Var(x) => {
                // E = E1⟨E2[x ← t̄]⟩ with the binder of x nearest to the hole.
                let frames = c.context.frames();
                let at = frames
                    .iter()
                    .rposition(|f| matches!(f, Frame::SubOuter(y, _) if *y == x))
                    .ok_or_else(|| {
                        SamError::Malformed(format!("variable {x} is not bound by the context"))
                    })?;
                let mut outer = std::mem::take(&mut c.context).into_frames();
                let inner = outer.split_off(at + 1);
                let arg = match outer.pop() {
                    Some(Frame::SubOuter(_, arg)) => arg,
                    _ => unreachable!("position found above"),
                };
                outer.push(Frame::Hereditary(
                    x,
                    Arc::new(EvalContext::from_frames(inner)),
                ));
                c.context = EvalContext::from_frames(outer);
                c.focus = arg;
                Ok(Some(SamRule::O2))
            }
            Term::Lam(..) => {
                c.phase = Phase::Ctxt;
                Ok(Some(SamRule::O3))
            }
            Term::Sub(..) => Err(SamError::Malformed(
                "focused term carries an explicit substitution".into(),
            )),
        },
        Phase::Ctxt => {
            let Term::Lam(x, body) = c.focus.clone() else {
                return Err(SamError::Malformed(
                    "context configuration without a value in focus".into(),
                ));
            };
            let frames = c.context.frames();
            let Some(at) = frames
                .iter()
                .rposition(|f| !matches!(f, Frame::SubOuter(..)))
            else {
                return Ok(None);
            };
            let mut outer = std::mem::take(&mut c.context).into_frames();
            let subst = outer.split_off(at + 1);
            let frame = outer.pop().expect("position found above");
            match frame {
                Frame::AppLeft(u) => {
                    // E⟨A⟨⟨·⟩[x ← u]⟩⟩
                    outer.extend(subst);
                    outer.push(Frame::SubOuter(x, u));
                    c.context = EvalContext::from_frames(outer);
                    c.focus = (*body).clone();
                    c.phase = Phase::Term;
                    Ok(Some(SamRule::B))
                }
                Frame::Hereditary(y, around) => {
                    let keep = fv_ctx(&around, &VarMultiset::new()).contains(&y);
                    outer.extend(subst);
                    let rule = if keep {
                        // E1⟨A⟨E2[y ← v̄]⟩⟩ with a renamed copy in focus.
                        outer.push(Frame::SubOuter(y, c.focus.clone()));
                        c.focus = rename_fresh(&c.focus, supply);
                        SamRule::SPos
                    } else {
                        SamRule::SOne
                    };
                    outer.extend(Arc::unwrap_or_clone(around).into_frames());
                    c.context = EvalContext::from_frames(outer);
                    Ok(Some(rule))
                }
                Frame::SubOuter(..) => unreachable!("skipped above"),
            }
        }
    }
}

/// One transition: the successor, its label, and the rule that fired.
pub fn sam_step(
    c: &Configuration,
    supply: &mut NameSupply,
) -> Result<Option<(Configuration, Label, SamRule)>, SamError> {
    let mut next = c.clone();
    Ok(step_in_place(&mut next, supply)?.map(|rule| (next, rule.label(), rule)))
}

#[derive(Clone, Debug)]
pub enum SamOutcome {
    Halted(Configuration),
    FuelExhausted(Configuration),
}

impl SamOutcome {
    pub fn configuration(&self) -> &Configuration {
        match self {
            SamOutcome::Halted(c) | SamOutcome::FuelExhausted(c) => c,
        }
    }

    pub fn halted(&self) -> bool {
        matches!(self, SamOutcome::Halted(_))
    }
}

/// A trace entry: the configuration a rule fired from.
#[derive(Clone, Debug)]
pub struct SamTraceStep {
    pub before: Configuration,
    pub label: Label,
    pub rule: SamRule,
}

impl SamTraceStep {
    /// `index<TAB>rule<TAB>label<TAB>plugging`
    pub fn to_line(&self, index: usize) -> String {
        format!(
            "{index}\t{}\t{}\t{}",
            self.rule,
            self.label,
            self.before.plugged()
        )
    }
}

#[derive(Clone, Debug)]
pub struct SamRun {
    pub outcome: SamOutcome,
    pub stats: RunStats,
    pub trace: Vec<SamTraceStep>,
}

pub fn validate_initial(t0: &Term) -> Result<(), SamError> {
    if !t0.is_pure() {
        return Err(SamError::NotPure);
    }
    if !is_closed_well_named(t0) {
        return Err(SamError::NotClosedWellNamed);
    }
    Ok(())
}

/// Run from `(t̄₀, ⟨·⟩)_term` for at most `fuel` transitions.
pub fn sam_run(t0: &Term, fuel: usize, keep_trace: bool) -> Result<SamRun, SamError> {
    sam_run_with(t0, fuel, keep_trace, &mut NameSupply::above(t0))
}

pub fn sam_run_with(
    t0: &Term,
    fuel: usize,
    keep_trace: bool,
    supply: &mut NameSupply,
) -> Result<SamRun, SamError> {
    validate_initial(t0)?;
    supply.exclude_term(t0);
    let mut c = Configuration::initial(t0.clone());
    let mut stats = RunStats::default();
    let mut trace = Vec::new();
    for _ in 0..fuel {
        let before = keep_trace.then(|| c.clone());
        match step_in_place(&mut c, supply)? {
            Some(rule) => {
                stats.record(rule.label(), rule.id());
                if let Some(before) = before {
                    trace.push(SamTraceStep {
                        before,
                        label: rule.label(),
                        rule,
                    });
                }
            }
            None => {
                return Ok(SamRun {
                    outcome: SamOutcome::Halted(c),
                    stats,
                    trace,
                })
            }
        }
    }
    let outcome = if c.is_final() {
        SamOutcome::Halted(c)
    } else {
        SamOutcome::FuelExhausted(c)
    };
    Ok(SamRun {
        outcome,
        stats,
        trace,
    })
}

/// `|e|_s ≤ |e|_b` and `|e|_o ≤ |t̄₀|·(5|e|_b + 2) + (3|e|_b + 1)`.
pub fn sam_check_bounds(stats: &RunStats, input_size: usize) -> bool {
    let b = stats.b;
    stats.s <= b && stats.o <= input_size * (5 * b + 2) + (3 * b + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;
    use crate::term::{alpha_eq, size};

    fn run(src: &str) -> SamRun {
        sam_run(&parse(src).unwrap(), 10_000, true).unwrap()
    }

    #[test]
    fn first_step_decomposes_application() {
        let t = parse("(\\x. x) (\\z. z)").unwrap();
        let mut supply = NameSupply::above(&t);
        let (next, label, rule) = sam_step(&Configuration::initial(t.clone()), &mut supply)
            .unwrap()
            .unwrap();
        assert_eq!((label, rule), (Label::O, SamRule::O1));
        let Term::App(f, a) = &t else { unreachable!() };
        assert_eq!(next.focus, **f);
        assert_eq!(
            next.context,
            EvalContext::app_left(EvalContext::hole(), (**a).clone())
        );
        assert_eq!(next.phase, Phase::Term);
    }

    #[test]
    fn value_flips_phase_then_stops() {
        let v = parse("\\z. z").unwrap();
        let mut supply = NameSupply::above(&v);
        let (next, label, rule) = sam_step(&Configuration::initial(v.clone()), &mut supply)
            .unwrap()
            .unwrap();
        assert_eq!(
            (label, rule, next.phase),
            (Label::O, SamRule::O3, Phase::Ctxt)
        );
        assert!(sam_step(&next, &mut supply).unwrap().is_none());
    }

    #[test]
    fn identity_applied_to_identity() {
        let r = run("(\\x. x) (\\z. z)");
        let end = r.outcome.configuration();
        assert!(r.outcome.halted());
        assert!(alpha_eq(&end.focus, &parse("\\z. z").unwrap()));
        assert!(end.context.is_hole());
        assert_eq!(end.phase, Phase::Ctxt);
        assert_eq!((r.stats.b, r.stats.s, r.stats.o), (1, 1, 4));
        let rules: Vec<_> = r.trace.iter().map(|s| s.rule).collect();
        use SamRule::*;
        assert_eq!(rules, vec![O1, O3, B, O2, O3, SOne]);
    }

    #[test]
    fn unused_binding_survives() {
        let t = parse("(\\x. \\y. y) (\\z. z)").unwrap();
        let r = sam_run(&t, 100, false).unwrap();
        let end = r.outcome.configuration();
        assert!(alpha_eq(&end.focus, &parse("\\y. y").unwrap()));
        let Term::App(_, arg) = &t else {
            unreachable!()
        };
        let Term::App(f, _) = &t else { unreachable!() };
        let Term::Lam(x, _) = &**f else {
            unreachable!()
        };
        let expected = EvalContext::sub_outer(EvalContext::hole(), x, (**arg).clone());
        assert!(end.context.alpha_eq(&expected));
        assert!(end.is_final());
    }

    #[test]
    fn shared_argument_is_copied() {
        let r = run("(\\x. x x) (\\z. z)");
        assert!(r.outcome.halted());
        assert_eq!(r.stats.rule("SPos"), 1);
        assert_eq!(r.stats.rule("SOne"), 2);
    }

    #[test]
    fn substitutions_can_outnumber_betas() {
        // x is substituted twice (SPos, SOne) and the variable argument of the
        // second β once more, while only two β steps fire.
        let t = parse("(\\x. x x) (\\z. z)").unwrap();
        let r = run("(\\x. x x) (\\z. z)");
        assert_eq!((r.stats.b, r.stats.s), (2, 3));
        assert!(!sam_check_bounds(&r.stats, size(&t)));
        assert!(r.stats.o <= size(&t) * (5 * r.stats.b + 2) + 3 * r.stats.b + 1);
    }

    #[test]
    fn omega_exhausts_fuel() {
        let r = sam_run(&parse("(\\x. x x) (\\y. y y)").unwrap(), 500, false).unwrap();
        assert!(!r.outcome.halted());
        assert_eq!(r.stats.total(), 500);
    }

    #[test]
    fn rejects_open_or_ill_named_input() {
        assert_eq!(
            sam_run(&parse("x").unwrap(), 10, false).unwrap_err(),
            SamError::NotClosedWellNamed
        );
        assert_eq!(
            sam_run(&parse("\\x. \\x. x").unwrap(), 10, false).unwrap_err(),
            SamError::NotClosedWellNamed
        );
    }

    #[test]
    fn malformed_configurations_are_reported() {
        let c = Configuration {
            focus: parse("\\x. x").unwrap(),
            context: EvalContext::hole(),
            phase: Phase::Term,
        };
        let mut bad = c.clone();
        bad.focus = parse("y").unwrap();
        assert!(matches!(
            sam_step(&bad, &mut NameSupply::new()),
            Err(SamError::Malformed(_))
        ));
        bad = c;
        bad.phase = Phase::Ctxt;
        bad.focus = parse("(\\x. x) (\\y. y)").unwrap();
        assert!(matches!(
            sam_step(&bad, &mut NameSupply::new()),
            Err(SamError::Malformed(_))
        ));
    }

    #[test]
    fn bound_check_examples() {
        assert!(sam_check_bounds(&RunStats::new(1, 1, 4), 5));
        assert!(!sam_check_bounds(&RunStats::new(0, 1, 0), 100));
        assert!(sam_check_bounds(&RunStats::new(0, 0, 0), 2));
        // 5·7 + 4 = 39 is the ceiling for b = 1 at size 5.
        assert!(sam_check_bounds(&RunStats::new(1, 0, 39), 5));
        assert!(!sam_check_bounds(&RunStats::new(1, 0, 40), 5));
    }

    #[test]
    fn o_steps_preserve_the_plugging() {
        let r = run("(\\f. \\a. f (f a)) (\\y. y) (\\w. w)");
        for pair in r.trace.windows(2) {
            if pair[0].label == Label::O {
                assert_eq!(pair[0].before.plugged(), pair[1].before.plugged());
            }
        }
    }

    #[test]
    fn trace_line_format() {
        let r = run("(\\x. x) (\\z. z)");
        assert_eq!(r.trace[0].to_line(0), "0\tO1\to\t(\\x. x) (\\z. z)");
    }
}
