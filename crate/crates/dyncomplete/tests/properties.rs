//! Property tests for the interval algebra, the perpendicular calculus and
//! the decomposition machinery.

use dyncomplete::dercat::{DerIndec, DerObject, HomTable};
use dyncomplete::quiver::{standard, Quiver};
use dyncomplete::subcat::{
    left_perp, right_perp, thick_closure, ShiftSet, Subcategory,
};
use proptest::prelude::*;

fn a2_table() -> HomTable {
    HomTable::build(
        Quiver::parse(r#"{"vertices":["1","2"],"arrows":[["2","1"]]}"#).unwrap(),
        0,
    )
    .unwrap()
}

// --- strategies ---

fn arb_shiftset() -> impl Strategy<Value = ShiftSet> {
    let interval = (-20i64..=20, 0i64..=8).prop_map(|(a, w)| ShiftSet::range(a, a + w));
    let ray = prop_oneof![
        (-20i64..=20).prop_map(ShiftSet::ray_ge),
        (-20i64..=20).prop_map(ShiftSet::ray_le),
    ];
    prop_oneof![
        Just(ShiftSet::empty()),
        Just(ShiftSet::all()),
        proptest::collection::vec(prop_oneof![interval, ray], 0..4).prop_map(|parts| {
            parts
                .into_iter()
                .fold(ShiftSet::empty(), |acc, s| acc.union(&s))
        }),
    ]
}

fn arb_subcat(n_roots: usize) -> impl Strategy<Value = Subcategory> {
    proptest::collection::vec(arb_shiftset(), n_roots).prop_map(move |sets| {
        let mut s = Subcategory::zero();
        for (r, set) in sets.into_iter().enumerate() {
            s.insert(r, set);
        }
        s
    })
}

/// Finite-window model of a shift set, for oracle comparisons.
fn window_model(s: &ShiftSet, lo: i64, hi: i64) -> Vec<bool> {
    (lo..=hi).map(|x| s.contains(x)).collect()
}

const W_LO: i64 = -64;
const W_HI: i64 = 64;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn shiftset_union_matches_model(a in arb_shiftset(), b in arb_shiftset()) {
        let u = a.union(&b);
        let model: Vec<bool> = window_model(&a, W_LO, W_HI)
            .iter()
            .zip(window_model(&b, W_LO, W_HI))
            .map(|(&x, y)| x || y)
            .collect();
        prop_assert_eq!(window_model(&u, W_LO, W_HI), model);
    }

    #[test]
    fn shiftset_intersect_matches_model(a in arb_shiftset(), b in arb_shiftset()) {
        let i = a.intersect(&b);
        let model: Vec<bool> = window_model(&a, W_LO, W_HI)
            .iter()
            .zip(window_model(&b, W_LO, W_HI))
            .map(|(&x, y)| x && y)
            .collect();
        prop_assert_eq!(window_model(&i, W_LO, W_HI), model);
    }

    #[test]
    fn shiftset_complement_matches_model(a in arb_shiftset()) {
        let c = a.complement();
        let model: Vec<bool> = window_model(&a, W_LO, W_HI).iter().map(|&x| !x).collect();
        prop_assert_eq!(window_model(&c, W_LO, W_HI), model);
        // double complement is the identity
        prop_assert_eq!(c.complement(), a);
    }

    #[test]
    fn shiftset_normal_form_is_canonical(a in arb_shiftset(), b in arb_shiftset()) {
        // set equality on a window plus matching behaviour at infinity
        // implies representation equality
        let u1 = a.union(&b);
        let u2 = b.union(&a);
        prop_assert_eq!(u1, u2);
        let i1 = a.intersect(&b);
        let i2 = b.intersect(&a);
        prop_assert_eq!(i1, i2);
    }

    #[test]
    fn limit_intersect_matches_bounded_oracle(a in arb_shiftset(), d in 1i64..4) {
        // ∩_{j>=0} (a + j*d) agrees with a deep finite intersection on a
        // window well inside the scanned range
        if let Ok(lim) = a.limit_intersect(d) {
            let deep = 200 / d + 2;
            let mut acc = a.clone();
            for j in 1..=deep {
                acc = acc.intersect(&a.translate(j * d));
            }
            prop_assert_eq!(
                window_model(&lim, -40, 40),
                window_model(&acc, -40, 40)
            );
        }
    }

    #[test]
    fn subset_of_limit_matches_bounded_oracle(
        a in arb_shiftset(),
        b in arb_shiftset(),
        d in 1i64..4,
    ) {
        let got = a.subset_of_limit(&b, d);
        // oracle: a must sit inside every translate within a deep window
        let deep = 200 / d + 2;
        let mut oracle = true;
        for j in 0..=deep {
            if !a.is_subset(&b.translate(j * d)) {
                oracle = false;
                break;
            }
        }
        // beyond the window the sets repeat their ray behaviour, which the
        // window already witnesses for these bounded strategies
        prop_assert_eq!(got, oracle);
    }

    #[test]
    fn eventual_subset_witness_is_sound(
        a in arb_shiftset(),
        b in arb_shiftset(),
        d in prop_oneof![1i64..4, -3i64..0],
    ) {
        match a.eventual_subset(d, &b) {
            Ok(Some(j)) => prop_assert!(a.translate(j * d).is_subset(&b)),
            Ok(None) => {
                for j in 0..=80 {
                    prop_assert!(!a.translate(j * d).is_subset(&b));
                }
            }
            Err(_) => prop_assert!(false, "ray bound exceeded on bounded data"),
        }
    }

    #[test]
    fn perps_are_antitone_and_galois(s in arb_subcat(3), extra in arb_subcat(3)) {
        let t = a2_table();
        let bigger = s.union(&extra);
        // antitone
        prop_assert!(right_perp(&t, &bigger).is_subset(&right_perp(&t, &s)));
        prop_assert!(left_perp(&t, &bigger).is_subset(&left_perp(&t, &s)));
        // Galois: S ⊆ ⊥(S⊥) and S⊥ = ((⊥(S⊥))⊥)
        let rp = right_perp(&t, &s);
        let lp_rp = left_perp(&t, &rp);
        prop_assert!(s.is_subset(&lp_rp));
        prop_assert_eq!(right_perp(&t, &lp_rp), rp);
    }

    #[test]
    fn thick_closure_is_a_closure_operator(s in arb_subcat(3), extra in arb_subcat(3)) {
        let t = a2_table();
        let c = thick_closure(&t, &s);
        prop_assert!(s.is_subset(&c), "extensive");
        prop_assert_eq!(thick_closure(&t, &c), c.clone(), "idempotent");
        let bigger = s.union(&extra);
        prop_assert!(c.is_subset(&thick_closure(&t, &bigger)), "monotone");
        prop_assert!(c.is_shift_closed());
    }

    #[test]
    fn perp_vanishing_is_additive(s in arb_subcat(3), shifts in proptest::collection::vec((-3i64..=3, 0usize..3), 1..4)) {
        // Hom(X, Y) = 0 for every sum X of generators of S and every Y in
        // the right perp: perps only see the additive closure
        let t = a2_table();
        let rp = right_perp(&t, &s);
        let summands: Vec<DerIndec> = shifts
            .into_iter()
            .filter_map(|(sh, r)| {
                let set = s.shifts(r);
                set.contains(sh).then_some(DerIndec::new(r, sh))
            })
            .collect();
        let x = DerObject::from_summands(summands);
        for (yr, yset) in rp.modules() {
            for ys in -6i64..=6 {
                if yset.contains(ys) {
                    prop_assert_eq!(
                        t.hom_dim_objects(&x, &DerObject::single(DerIndec::new(yr, ys))),
                        0
                    );
                }
            }
        }
    }
}

#[test]
fn a2_thicks_exchange_under_perps() {
    // the five thick subcategories of A_2 are exchanged by the perps as an
    // order-reversing bijection pairing 0 with the whole category
    let t = a2_table();
    let thicks = dyncomplete::complete::enumerate_thick(&t, 1000).unwrap();
    assert_eq!(thicks.len(), 5);
    for s in &thicks {
        let rp = right_perp(&t, s);
        assert!(thicks.contains(&rp), "perp left the lattice");
        let back = left_perp(&t, &rp);
        assert_eq!(&back, s, "double perp must fix every thick subcategory");
    }
    let zero = Subcategory::zero();
    assert!(right_perp(&t, &zero).is_everything(&t));
    assert!(right_perp(&t, &Subcategory::everything(&t)).is_zero());
}

#[test]
fn decompose_random_block_sums() {
    use rand::{Rng, SeedableRng};
    let t = HomTable::build(standard::a_n(3), 0).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..24 {
        let count = rng.gen_range(1..=4);
        let mut expected: Vec<(usize, usize)> = Vec::new();
        let mut rep = dyncomplete::replin::Representation::zero(t.quiver());
        for _ in 0..count {
            let r = rng.gen_range(0..t.root_count());
            rep = rep.direct_sum(t.witness(r));
            match expected.iter_mut().find(|(x, _)| *x == r) {
                Some((_, c)) => *c += 1,
                None => expected.push((r, 1)),
            }
        }
        expected.sort();
        let got = t.decompose(&rep).unwrap();
        assert_eq!(got, expected);
    }
}

#[test]
fn metric_chains_decrease_on_a_window() {
    use dyncomplete::metric::{make_cohomology_metric, make_slowdown};
    let t = a2_table();
    let coh = make_cohomology_metric(&t);
    let slow = make_slowdown(3, coh.clone()).unwrap();
    for m in [coh, slow] {
        for n in 1..=64 {
            assert!(m.ball(n + 1).is_subset(&m.ball(n)), "chain broke at {n}");
        }
    }
}
