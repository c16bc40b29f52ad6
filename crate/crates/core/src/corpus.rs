//! Seeded generators for test programs: closed well-named programs, plus
//! open terms and evaluation contexts over a pool of free variables.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::term::{EvalContext, Frame, Term, Var};
use std::sync::Arc;

/// Hands out variables with distinct ids.
#[derive(Debug, Default)]
pub struct Namer {
    next: u64,
}

impl Namer {
    pub fn var(&mut self, base: &str) -> Var {
        let v = Var::new(self.next, &format!("{base}{}", self.next));
        self.next += 1;
        v
    }
}

/// `λf.λx. fⁿ x`.
pub fn church(n: usize, names: &mut Namer) -> Term {
    let f = names.var("f");
    let x = names.var("x");
    let mut body = Term::var(&x);
    for _ in 0..n {
        body = Term::app(Term::var(&f), body);
    }
    Term::lam(&f, Term::lam(&x, body))
}

pub fn identity(names: &mut Namer) -> Term {
    let y = names.var("y");
    Term::lam(&y, Term::var(&y))
}

/// `cₙ I I`.
pub fn church_app(n: usize) -> Term {
    let mut names = Namer::default();
    let c = church(n, &mut names);
    let i1 = identity(&mut names);
    let i2 = identity(&mut names);
    Term::app(Term::app(c, i1), i2)
}

/// `cₙ cₘ I I`: composition of numerals, `mⁿ` applications of `I`.
pub fn church_compose(n: usize, m: usize) -> Term {
    let mut names = Namer::default();
    let cn = church(n, &mut names);
    let cm = church(m, &mut names);
    let i1 = identity(&mut names);
    let i2 = identity(&mut names);
    Term::app(Term::app(Term::app(cn, cm), i1), i2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combinator {
    S,
    K,
    I,
}

pub fn combinator(c: Combinator, names: &mut Namer) -> Term {
    match c {
        Combinator::S => {
            let (a, b, x) = (names.var("a"), names.var("b"), names.var("c"));
            let ax = Term::app(
                Term::app(Term::var(&a), Term::var(&x)),
                Term::app(Term::var(&b), Term::var(&x)),
            );
            Term::lam(&a, Term::lam(&b, Term::lam(&x, ax)))
        }
        Combinator::K => {
            let (a, b) = (names.var("a"), names.var("b"));
            Term::lam(&a, Term::lam(&b, Term::var(&a)))
        }
        Combinator::I => identity(names),
    }
}

/// Random application tree over S, K and I with `leaves` leaves.
pub fn ski_term(rng: &mut impl Rng, leaves: usize, names: &mut Namer) -> Term {
    if leaves <= 1 {
        let c = *[Combinator::S, Combinator::K, Combinator::I]
            .choose(rng)
            .expect("non-empty");
        return combinator(c, names);
    }
    let left = rng.gen_range(1..leaves);
    let l = ski_term(rng, left, names);
    let r = ski_term(rng, leaves - left, names);
    Term::app(l, r)
}

/// Random closed well-named term of exactly `size` nodes (`size ≥ 2`).
pub fn random_term(rng: &mut impl Rng, size: usize, names: &mut Namer) -> Term {
    fn go(rng: &mut impl Rng, size: usize, scope: &mut Vec<Var>, names: &mut Namer) -> Term {
        if size == 1 {
            return Term::var(scope.choose(rng).expect("scope is non-empty for leaves"));
        }
        let min_part = if scope.is_empty() { 2 } else { 1 };
        let can_apply = size > 2 * min_part;
        if !can_apply || rng.gen_bool(0.35) {
            let x = names.var("v");
            scope.push(x.clone());
            let body = go(rng, size - 1, scope, names);
            scope.pop();
            return Term::lam(&x, body);
        }
        let left = rng.gen_range(min_part..=size - 1 - min_part);
        let l = go(rng, left, scope, names);
        let r = go(rng, size - 1 - left, scope, names);
        Term::app(l, r)
    }
    go(rng, size.max(2), &mut Vec::new(), names)
}

/// Random pure term of exactly `size` nodes whose free variables are drawn
/// from `pool`. Binders are fresh.
pub fn random_open_term(rng: &mut impl Rng, size: usize, pool: &[Var], names: &mut Namer) -> Term {
    fn go(rng: &mut impl Rng, size: usize, scope: &mut Vec<Var>, names: &mut Namer) -> Term {
        if size == 1 && !scope.is_empty() {
            return Term::var(scope.choose(rng).expect("non-empty"));
        }
        if size <= 2 || rng.gen_bool(0.4) {
            let x = names.var("v");
            scope.push(x.clone());
            let body = go(rng, size.saturating_sub(1).max(1), scope, names);
            scope.pop();
            return Term::lam(&x, body);
        }
        let left = rng.gen_range(1..=size - 2);
        let l = go(rng, left, scope, names);
        let r = go(rng, size - 1 - left, scope, names);
        Term::app(l, r)
    }
    go(rng, size.max(1), &mut pool.to_vec(), names)
}

/// Random evaluation context with up to `depth` frames. Substitution
/// frames bind either a pool variable (so that it is captured) or a fresh
/// one; hereditary frames always bind a fresh variable.
pub fn random_context(
    rng: &mut impl Rng,
    depth: usize,
    pool: &[Var],
    names: &mut Namer,
) -> EvalContext {
    let mut frames = Vec::new();
    for _ in 0..rng.gen_range(0..=depth) {
        let u_size = rng.gen_range(1..=6);
        let frame = match rng.gen_range(0..3) {
            0 => Frame::AppLeft(random_open_term(rng, u_size, pool, names)),
            1 => {
                let x = if !pool.is_empty() && rng.gen_bool(0.5) {
                    pool.choose(rng).expect("non-empty").clone()
                } else {
                    names.var("s")
                };
                Frame::SubOuter(x, random_open_term(rng, u_size, pool, names))
            }
            _ => {
                let x = names.var("h");
                let mut scope = pool.to_vec();
                scope.push(x.clone());
                let around = random_context(rng, 1, &scope, names);
                Frame::Hereditary(x, Arc::new(around))
            }
        };
        frames.push(frame);
    }
    EvalContext::from_frames(frames)
}

/// A fixed pool of free variables, with ids clear of any [`Namer`].
pub fn variable_pool(n: usize) -> Vec<Var> {
    (0..n)
        .map(|i| Var::new(1 << 40 | i as u64, &format!("p{i}")))
        .collect()
}

/// Corpus families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `count` random terms with sizes drawn from `min_size..=max_size`.
    Random {
        count: usize,
        min_size: usize,
        max_size: usize,
    },
    /// `cₙ I I` for each `n` in the range.
    ChurchApp { from: usize, to: usize },
    /// `cₙ cₘ I I` for `n, m` in `1..=max`.
    ChurchCompose { max: usize },
    /// `count` S/K/I trees with up to `max_leaves` leaves.
    Ski { count: usize, max_leaves: usize },
}

pub fn gen_corpus(family: &Family, seed: u64) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *family {
        Family::Random {
            count,
            min_size,
            max_size,
        } => (0..count)
            .map(|_| {
                let size = rng.gen_range(min_size..=max_size);
                random_term(&mut rng, size, &mut Namer::default())
            })
            .collect(),
        Family::ChurchApp { from, to } => (from..=to).map(church_app).collect(),
        Family::ChurchCompose { max } => (1..=max)
            .flat_map(|n| (1..=max).map(move |m| church_compose(n, m)))
            .collect(),
        Family::Ski { count, max_leaves } => (0..count)
            .map(|_| {
                let leaves = rng.gen_range(2..=max_leaves);
                ski_term(&mut rng, leaves, &mut Namer::default())
            })
            .collect(),
    }
}

/// The default test corpus: 500 random terms of size at most 40, Church
/// numeral applications and compositions, and S/K/I trees.
pub fn standard_corpus(seed: u64) -> Vec<Term> {
    let mut out = gen_corpus(
        &Family::Random {
            count: 500,
            min_size: 4,
            max_size: 40,
        },
        seed,
    );
    out.extend(gen_corpus(&Family::ChurchApp { from: 0, to: 12 }, seed));
    out.extend(gen_corpus(&Family::ChurchCompose { max: 3 }, seed));
    out.extend(gen_corpus(
        &Family::Ski {
            count: 60,
            max_leaves: 6,
        },
        seed.wrapping_add(1),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{is_closed_well_named, size};

    #[test]
    fn church_three_applied_is_closed() {
        let t = church_app(3);
        assert!(is_closed_well_named(&t));
        assert_eq!(t.to_string().matches("\\").count(), 4);
    }

    #[test]
    fn same_seed_same_corpus() {
        let f = Family::Random {
            count: 50,
            min_size: 4,
            max_size: 40,
        };
        assert_eq!(gen_corpus(&f, 7), gen_corpus(&f, 7));
        assert_ne!(gen_corpus(&f, 7), gen_corpus(&f, 8));
    }

    #[test]
    fn everything_generated_is_closed_and_well_named() {
        let corpus = standard_corpus(11);
        assert!(corpus.len() >= 500);
        for t in &corpus {
            assert!(is_closed_well_named(t), "{t}");
            assert!(t.is_pure());
        }
    }

    #[test]
    fn random_terms_have_the_requested_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for want in 2..=40 {
            let t = random_term(&mut rng, want, &mut Namer::default());
            assert_eq!(size(&t), want);
        }
    }
}
