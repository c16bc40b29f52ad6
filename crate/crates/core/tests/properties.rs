use dgoim::conformance::{check_determinism, check_run_invariants, gen_instance, DECOMPOSITIONS};
use dgoim::corpus::{random_open_term, random_term, variable_pool, Namer};
use dgoim::dgoim::dgoim_run;
use dgoim::graph::well_boxed_check;
use dgoim::sam::{sam_run, step_in_place, Configuration, Phase};
use dgoim::sim::lockstep;
use dgoim::term::{fv, is_closed_well_named, size, NameSupply, Term};
use dgoim::translate::translate_term;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn closed_term(seed: u64, n: usize) -> Term {
    random_term(
        &mut ChaCha8Rng::seed_from_u64(seed),
        n,
        &mut Namer::default(),
    )
}

/// Fixed seed: same cases, same runtime on every run.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x5eed), ..ProptestConfig::default() }
}

// Runs are cut off by fuel; divergent terms grow the graph at every step.
const FUEL: usize = 1_500;
const SAM_FUEL: usize = 200;

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn decompositions_hold(seed in any::<u64>()) {
        let inst = gen_instance(seed);
        for (name, check) in DECOMPOSITIONS {
            prop_assert!(check(&inst).is_ok(), "{}: {:?}", name, check(&inst));
        }
    }

    #[test]
    fn reachable_configurations_are_well_formed(seed in any::<u64>(), n in 2usize..=30) {
        let t0 = closed_term(seed, n);
        let mut supply = NameSupply::above(&t0);
        let mut c = Configuration::initial(t0);
        for _ in 0..500 {
            prop_assert!(is_closed_well_named(&c.plugged()), "{}", c);
            prop_assert!(c.focus.is_pure());
            if c.phase == Phase::Ctxt {
                prop_assert!(c.focus.is_value());
            }
            if step_in_place(&mut c, &mut supply).unwrap().is_none() {
                prop_assert!(c.is_final());
                break;
            }
        }
    }

    #[test]
    fn overhead_bounds(seed in any::<u64>(), n in 2usize..=30) {
        let t0 = closed_term(seed, n);
        let k = size(&t0);
        let sam = sam_run(&t0, 2_000, false).unwrap();
        let st = &sam.stats;
        prop_assert_eq!(st.total(), st.b + st.s + st.o);
        prop_assert!(st.o <= k * (5 * st.b + 2) + 3 * st.b + 1);
        let dg = dgoim_run(&t0, 8_016, false).unwrap();
        let dt = &dg.stats;
        prop_assert!(dt.o <= 4 * k * (5 * dt.b + 2) + 16 * dt.b + 4);
    }

    #[test]
    fn translation_realises_free_variables(seed in any::<u64>(), n in 1usize..=20) {
        let pool = variable_pool(3);
        let t = random_open_term(&mut ChaCha8Rng::seed_from_u64(seed), n, &pool, &mut Namer::default());
        let og = translate_term(&t, NameSupply::new());
        prop_assert!(well_boxed_check(&og.graph).is_ok());
        for (x, k) in fv(&t).iter() {
            prop_assert_eq!(og.free.get(x).map_or(0, Vec::len), k);
        }
        prop_assert_eq!(og.free.values().map(Vec::len).sum::<usize>(), fv(&t).len());
        prop_assert_eq!(og.graph.open_edges().len(), 1 + fv(&t).len());
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn machine_invariants_hold_along_runs(seed in any::<u64>(), n in 2usize..=24) {
        let t0 = closed_term(seed, n);
        prop_assert!(check_run_invariants(&t0, FUEL).is_ok(), "{:?}", check_run_invariants(&t0, FUEL));
    }

    #[test]
    fn runs_do_not_depend_on_names(seed in any::<u64>(), n in 2usize..=24) {
        let t0 = closed_term(seed, n);
        prop_assert!(check_determinism(&t0, FUEL).is_ok());
    }

    #[test]
    fn lockstep_conforms(seed in any::<u64>(), n in 2usize..=24) {
        let t0 = closed_term(seed, n);
        let r = lockstep(&t0, SAM_FUEL, true).unwrap();
        prop_assert!(r.passed(), "{}: {:?}", t0, r.verdict);
    }
}
