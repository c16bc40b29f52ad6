//! Simulation of the storeless machine by the DGoIM, checked step by step.

use serde::Serialize;

use crate::dgoim::{dgoim_run, initial_state, DgoimError, MachineState};
use crate::graph::{canonical_form_with_token, Direction};
use crate::sam::{sam_run, step_in_place, Configuration, Phase, SamError, SamRule};
use crate::stats::Label;
use crate::term::NameSupply;
use crate::translate::translate_plugged_focus;
use crate::Term;

/// Canonical form of the graph a configuration should correspond to, with
/// the token on the focus: upwards while evaluating, downwards once the
/// focus is a value being returned.
pub fn configuration_form(c: &Configuration) -> Option<String> {
    let (og, focus) = translate_plugged_focus(&c.context, &c.focus, NameSupply::new()).ok()?;
    let dir = match c.phase {
        Phase::Term => Direction::Up,
        Phase::Ctxt => Direction::Down,
    };
    canonical_form_with_token(&og.graph, og.conclusion, (focus, dir)).ok()
}

pub fn state_form(s: &MachineState) -> Option<String> {
    let root = s.graph.root?;
    canonical_form_with_token(&s.graph, root, (s.position.edge, s.position.dir)).ok()
}

/// The simulation relation: same graph and token up to naming, and the
/// state is rooted.
pub fn related(c: &Configuration, s: &MachineState) -> bool {
    s.rooted_check() && configuration_form(c).is_some_and(|f| Some(f) == state_form(s))
}

/// DGoIM labels that simulate one storeless step.
pub fn expected_labels(rule: SamRule) -> &'static [Label] {
    use Label::*;
    match rule {
        SamRule::O1 => &[O, O, O, O],
        SamRule::O2 => &[O, O, O],
        SamRule::O3 => &[O],
        SamRule::B => &[O, O, B, O],
        SamRule::SPos | SamRule::SOne => &[S, O],
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SyncStep {
    pub rule: String,
    pub labels: String,
    pub transitions: Vec<String>,
    pub related: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail { step: usize, reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct SyncReport {
    pub sam_steps: usize,
    pub dgoim_steps: usize,
    pub sam_halted: bool,
    pub initially_related: bool,
    pub per_sam_step: Vec<SyncStep>,
    pub verdict: Verdict,
}

impl SyncReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Sam(#[from] SamError),
    #[error(transparent)]
    Dgoim(#[from] DgoimError),
}

/// Drive both machines together: one storeless step, then the DGoIM
/// transitions that simulate it, checking labels and the relation after
/// each pair. A label mismatch always ends the run; a failed relation
/// check ends it only when `stop_at_first_divergence` is set.
pub fn lockstep(
    t0: &Term,
    fuel: usize,
    stop_at_first_divergence: bool,
) -> Result<SyncReport, SimError> {
    crate::sam::validate_initial(t0)?;
    let mut supply = NameSupply::above(t0);
    let mut c = Configuration::initial(t0.clone());
    let mut s = initial_state(t0, NameSupply::new());
    let initially_related = related(&c, &s);
    let mut report = SyncReport {
        sam_steps: 0,
        dgoim_steps: 0,
        sam_halted: false,
        initially_related,
        per_sam_step: Vec::new(),
        verdict: Verdict::Pass,
    };
    let mut first_failure: Option<(usize, String)> =
        (!initially_related).then(|| (0, "initial states are not related".to_string()));
    if first_failure.is_some() && stop_at_first_divergence {
        report.verdict = fail(first_failure);
        return Ok(report);
    }

    for index in 0..fuel {
        let Some(rule) = step_in_place(&mut c, &mut supply)? else {
            report.sam_halted = true;
            break;
        };
        report.sam_steps += 1;
        let want = expected_labels(rule);
        let mut labels = String::new();
        let mut transitions = Vec::new();
        let mut mismatch = None;
        for expected in want {
            match s.step()? {
                Some(info) => {
                    report.dgoim_steps += 1;
                    labels.push_str(&info.label.to_string());
                    transitions.push(info.transition.to_string());
                    if info.label != *expected {
                        mismatch = Some(format!("{rule}: expected {expected}, got {}", info.label));
                        break;
                    }
                }
                None => {
                    mismatch = Some(format!("{rule}: DGoIM halted early"));
                    break;
                }
            }
        }
        let ok = mismatch.is_none() && related(&c, &s);
        report.per_sam_step.push(SyncStep {
            rule: rule.to_string(),
            labels,
            transitions,
            related: ok,
        });
        if let Some(reason) = mismatch {
            first_failure.get_or_insert((index + 1, reason));
            report.verdict = fail(first_failure);
            return Ok(report);
        }
        if !ok {
            first_failure.get_or_insert((index + 1, format!("{rule}: states not related")));
            if stop_at_first_divergence {
                report.verdict = fail(first_failure);
                return Ok(report);
            }
        }
    }
    if report.sam_halted && !s.is_final() {
        first_failure.get_or_insert((
            report.sam_steps,
            "SAM is final but the DGoIM can still move".into(),
        ));
    }
    report.verdict = fail(first_failure);
    Ok(report)
}

fn fail(f: Option<(usize, String)>) -> Verdict {
    match f {
        None => Verdict::Pass,
        Some((step, reason)) => Verdict::Fail { step, reason },
    }
}

/// Result of running both machines independently.
#[derive(Clone, Debug, Serialize)]
pub struct EndpointReport {
    pub sam_halted: bool,
    pub dgoim_halted: bool,
    pub related: bool,
}

/// Run each machine on its own and compare final states. The DGoIM gets
/// four transitions per storeless step of fuel.
pub fn compare_endpoints(t0: &Term, fuel: usize) -> Result<EndpointReport, SimError> {
    let sam = sam_run(t0, fuel, false)?;
    let dg = dgoim_run(t0, fuel.saturating_mul(4).saturating_add(16), false)?;
    let related = sam.outcome.halted()
        && dg.outcome.halted()
        && related(sam.outcome.configuration(), dg.outcome.state());
    Ok(EndpointReport {
        sam_halted: sam.outcome.halted(),
        dgoim_halted: dg.outcome.halted(),
        related,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse;

    fn shapes(r: &SyncReport) -> Vec<&str> {
        r.per_sam_step.iter().map(|s| s.labels.as_str()).collect()
    }

    #[test]
    fn identity_lockstep() {
        let r = lockstep(&parse("(\\x. x) (\\z. z)").unwrap(), 100, true).unwrap();
        assert!(r.passed(), "{:?}", r.verdict);
        assert_eq!(shapes(&r), ["oooo", "o", "oobo", "ooo", "o", "so"]);
        assert!(r.sam_halted);
    }

    #[test]
    fn garbage_lockstep() {
        let r = lockstep(&parse("(\\x. \\y. y) (\\z. z)").unwrap(), 100, true).unwrap();
        assert!(r.passed(), "{:?}", r.verdict);
        assert!(r.sam_halted);
    }

    #[test]
    fn sharing_lockstep() {
        for src in [
            "(\\x. x x) (\\z. z)",
            "(\\f. \\x. f (f x)) (\\y. y) (\\z. z)",
            "(\\a. (\\b. b a) (\\c. c)) (\\d. d)",
        ] {
            let r = lockstep(&parse(src).unwrap(), 1000, true).unwrap();
            assert!(r.passed(), "{src}: {:?}", r.verdict);
        }
    }

    #[test]
    fn endpoints_related() {
        let r = compare_endpoints(&parse("(\\x. \\y. y) (\\z. z)").unwrap(), 100).unwrap();
        assert!(r.sam_halted && r.dgoim_halted && r.related);
    }

    #[test]
    fn different_box_counts_are_unrelated() {
        let c = Configuration::initial(parse("(\\x. x) (\\z. z)").unwrap());
        let s = initial_state(&parse("(\\x. x) (\\z. \\w. w)").unwrap(), NameSupply::new());
        assert!(!related(&c, &s));
        let s = initial_state(
            &parse("(\\x. x) (\\z. z)").unwrap(),
            NameSupply::starting_at(40, 3),
        );
        assert!(related(&c, &s));
    }
}
