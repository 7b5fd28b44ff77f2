//! Algebraic laws of the kernel engine, exercised with exact equality over
//! seeded random kernels. Spaces stay small (≤ 4 elements) so the checks
//! are exhaustive per trial.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use reasoner_core::finstoch::{
    random_deterministic_kernel, random_dist, random_kernel, random_space, run_axiom_suite, Dist,
    FinSpace, Kernel,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #[test]
    fn compose_is_associative_and_unital(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let a = random_space(&mut rng, "A", 4);
        let b = random_space(&mut rng, "B", 4);
        let c = random_space(&mut rng, "C", 4);
        let d = random_space(&mut rng, "D", 4);
        let f = random_kernel(&mut rng, &a, &b);
        let g = random_kernel(&mut rng, &b, &c);
        let h = random_kernel(&mut rng, &c, &d);
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        prop_assert_eq!(Kernel::identity(&a).compose(&f).unwrap(), f.clone());
        prop_assert_eq!(f.compose(&Kernel::identity(&b)).unwrap(), f);
    }

    #[test]
    fn swap_is_natural(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let a = random_space(&mut rng, "A", 3);
        let b = random_space(&mut rng, "B", 3);
        let c = random_space(&mut rng, "C", 3);
        let d = random_space(&mut rng, "D", 3);
        let f = random_kernel(&mut rng, &a, &b);
        let g = random_kernel(&mut rng, &c, &d);
        let left = f.tensor(&g).compose(&Kernel::swap(&b, &d)).unwrap();
        let right = Kernel::swap(&a, &c).compose(&g.tensor(&f)).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn tensor_marginals_recover_the_factors(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let a = random_space(&mut rng, "A", 4);
        let b = random_space(&mut rng, "B", 4);
        let p = random_dist(&mut rng, &a);
        let q = random_dist(&mut rng, &b);
        let joint = p.kernel().tensor(q.kernel());
        prop_assert_eq!(joint.marginalize(0).unwrap(), p.kernel().clone());
        prop_assert_eq!(joint.marginalize(1).unwrap(), q.kernel().clone());
    }

    #[test]
    fn disintegrate_then_recompose_is_exact(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let z = random_space(&mut rng, "Z", 3);
        let a = random_space(&mut rng, "A", 3);
        let b = random_space(&mut rng, "B", 3);
        let ab = a.tensor(&b);
        let joint = random_kernel(&mut rng, &z, &ab);
        let (marginal, conditional) = joint.disintegrate(a.factor_count()).unwrap();
        for zi in z.elements() {
            for idx in ab.elements() {
                let parts = ab.decode(idx);
                let reassembled = marginal.prob(zi, parts[0])
                    * conditional.prob(zi * a.len() + parts[0], parts[1]);
                prop_assert_eq!(reassembled, joint.prob(zi, idx).clone());
            }
        }
    }

    #[test]
    fn bayes_inverse_satisfies_its_defining_equation(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let z = random_space(&mut rng, "Z", 3);
        let a = random_space(&mut rng, "A", 4);
        let b = random_space(&mut rng, "B", 4);
        let prior = random_kernel(&mut rng, &z, &a);
        let f = random_kernel(&mut rng, &a, &b);
        let inverse = Kernel::bayes_invert(&prior, &f).unwrap();
        let predictive = prior.compose(&f).unwrap();
        // prior(a ∥ z)·f(b ∥ a) = predictive(b ∥ z)·f†(a ∥ (z,b)) exactly.
        for zi in z.elements() {
            for ai in a.elements() {
                for bi in b.elements() {
                    let lhs = prior.prob(zi, ai) * f.prob(ai, bi);
                    let rhs = predictive.prob(zi, bi) * inverse.prob(zi * b.len() + bi, ai);
                    prop_assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn determinism_equation_matches_point_mass_test(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let a = random_space(&mut rng, "A", 4);
        let b = random_space(&mut rng, "B", 4);
        let f = random_kernel(&mut rng, &a, &b);
        prop_assert_eq!(f.satisfies_determinism_equation(), f.is_deterministic());
        let det = random_deterministic_kernel(&mut rng, &a, &b);
        prop_assert!(det.is_deterministic());
        prop_assert!(det.satisfies_determinism_equation());
    }

    #[test]
    fn pushing_a_dist_preserves_total_mass(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let a = random_space(&mut rng, "A", 4);
        let b = random_space(&mut rng, "B", 4);
        let p = random_dist(&mut rng, &a);
        let f = random_kernel(&mut rng, &a, &b);
        let pushed = p.push_through(&f).unwrap();
        let total: reasoner_core::rational::Rat = pushed.weights().iter().sum();
        prop_assert_eq!(total, reasoner_core::rational::rat(1, 1));
    }
}

#[test]
fn axiom_suite_passes_at_acceptance_scale() {
    let report = run_axiom_suite(2024, 500);
    assert!(report.all_passed());
    assert_eq!(report.families.len(), 6);
    for family in &report.families {
        assert_eq!(family.cases, 500, "family {}", family.name);
        assert_eq!(family.failures, 0, "family {}", family.name);
    }
}

#[test]
fn unit_space_dists_are_single_column_kernels() {
    let a = FinSpace::new("A", ["x", "y"]).unwrap();
    let d = Dist::uniform(a);
    assert!(d.kernel().src().is_unit());
    assert_eq!(d.kernel().src().len(), 1);
}
