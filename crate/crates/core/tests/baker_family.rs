use proptest::prelude::*;

use unialg::baker::{baker_instance, Signature, UP};
use unialg::relation::{is_admissible, is_congruence, is_tolerance, symmetric_square, Counterexample, Structure};
use unialg::BinRel;

#[test]
fn instances_for_every_size() {
    for n in 2..=6 {
        for sig in Signature::all() {
            let inst = baker_instance(n, sig, false).unwrap();
            let all: Vec<u32> = (0..inst.size() as u32).collect();
            let closure = inst.algebra.subuniverse_closure(&all).unwrap();
            assert_eq!(closure.elements, all);
            for r in [&inst.alpha, &inst.beta, &inst.gamma] {
                assert!(is_congruence(&inst.algebra, r).unwrap().holds(), "{n}{sig}");
            }
            assert!(is_tolerance(&inst.algebra, &inst.psi_tolerance()).unwrap().holds(), "{n}{sig}");
            assert_eq!(inst.up.len(), 2 * n + 1);
            let top = inst.element([0, 0, UP]).unwrap();
            assert_eq!(inst.e[n], top);
            assert_eq!(inst.f[0], top);
            assert_eq!(inst.beta, inst.beta_from_projections());
        }
    }
}

#[test]
fn lambda_per_signature() {
    for n in 2..=5 {
        let b = baker_instance(n, Signature::B, false).unwrap();
        assert!(is_tolerance(&b.algebra, &b.lambda_tolerance().unwrap()).unwrap().holds());
        let u = baker_instance(n, Signature::U, false).unwrap();
        assert!(u.lambda_tolerance().is_err());
        let check = is_admissible(&u.algebra, &u.lambda_relation()).unwrap();
        assert!(matches!(check.counterexample, Some(Counterexample::NotCompatible(_))), "n = {n}");
    }
}

#[test]
fn reduced_instances_drop_the_two_lower_corners() {
    for n in 2..=4 {
        for sig in Signature::all() {
            let full = baker_instance(n, sig, false).unwrap();
            let minus = baker_instance(n, sig, true).unwrap();
            let corners = [[n as u32, 0, 0], [0, n as u32, 0]];
            assert_eq!(minus.size() + 2, full.size());
            for t in corners {
                assert!(full.element(t).is_some());
                assert!(minus.element(t).is_none());
            }
            for r in [&minus.alpha, &minus.beta, &minus.gamma] {
                assert!(is_congruence(&minus.algebra, r).unwrap().holds());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // every reflexive admissible R whose square links c0 to c1 and c(n-1)
    // to cn also links e(n-1) to f1
    #[test]
    fn squares_of_admissible_relations_force_the_pair(
        n in 2usize..=4,
        g in any::<prop::sample::Index>(),
        h in any::<prop::sample::Index>(),
        extra in proptest::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 0..3),
    ) {
        let inst = baker_instance(n, Signature::B, false).unwrap();
        let size = inst.size();
        let c = |i: usize| inst.c[i] as usize;
        let (g, h) = (g.index(size), h.index(size));
        let mut seed = vec![(c(0), g), (c(1), g), (c(n - 1), h), (c(n), h)];
        seed.extend(extra.iter().map(|(x, y)| (x.index(size), y.index(size))));
        let r = inst.algebra.admissible_closure(&BinRel::from_pairs(size, seed).unwrap()).unwrap();
        let sq = symmetric_square(&r);
        prop_assert!(sq.contains(c(0), c(1)) && sq.contains(c(n - 1), c(n)));
        prop_assert!(sq.contains(inst.e[n - 1] as usize, inst.f[1] as usize));
    }
}
