//! Randomized check of the copy/delete axioms that make finite kernels a
//! Markov category, plus the copy-equation characterization of determinism.
//!
//! Every axiom is checked with exact equality over seeded random kernels,
//! so a run is reproducible from its seed. The same suite backs both the
//! `axioms` CLI subcommand and the test suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dist, FinSpace, Kernel};
use crate::rational::Rat;

/// One axiom family with its outcome over all trials.
#[derive(Clone, Debug)]
pub struct AxiomFamily {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
}

impl AxiomFamily {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Outcome of a full suite run.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub seed: u64,
    pub trials: usize,
    pub families: Vec<AxiomFamily>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.families.iter().all(AxiomFamily::passed)
    }
}

/// Random atomic space with 1..=max_size elements.
pub fn random_space(rng: &mut impl Rng, name: &str, max_size: usize) -> FinSpace {
    let size = rng.gen_range(1..=max_size);
    let prefix = name.to_lowercase();
    FinSpace::new(name, (0..size).map(|i| format!("{prefix}{i}")))
        .expect("generated labels are distinct")
}

/// Random kernel with small-denominator rational rows.
pub fn random_kernel(rng: &mut impl Rng, src: &FinSpace, dst: &FinSpace) -> Kernel {
    let rows = src
        .elements()
        .map(|_| random_weights(rng, dst.len()))
        .collect();
    Kernel::from_rows(src.clone(), dst.clone(), rows).expect("rows normalized to 1")
}

/// Random distribution over a space.
pub fn random_dist(rng: &mut impl Rng, space: &FinSpace) -> Dist {
    Dist::from_weights(space.clone(), random_weights(rng, space.len()))
        .expect("weights normalized to 1")
}

/// Random distribution with full support (every weight positive).
pub fn random_positive_dist(rng: &mut impl Rng, space: &FinSpace) -> Dist {
    let weights = positive_weights(rng, space.len());
    Dist::from_weights(space.clone(), weights).expect("weights normalized to 1")
}

/// Random kernel whose entries are all positive.
pub fn random_positive_kernel(rng: &mut impl Rng, src: &FinSpace, dst: &FinSpace) -> Kernel {
    let rows = src
        .elements()
        .map(|_| positive_weights(rng, dst.len()))
        .collect();
    Kernel::from_rows(src.clone(), dst.clone(), rows).expect("rows normalized to 1")
}

/// Random deterministic kernel (a random function table).
pub fn random_deterministic_kernel(
    rng: &mut impl Rng,
    src: &FinSpace,
    dst: &FinSpace,
) -> Kernel {
    let images: Vec<usize> = src.elements().map(|_| rng.gen_range(0..dst.len())).collect();
    Kernel::deterministic(src.clone(), dst.clone(), |a| images[a])
        .expect("images lie in dst")
}

fn random_weights(rng: &mut impl Rng, len: usize) -> Vec<Rat> {
    loop {
        let raw: Vec<u32> = (0..len).map(|_| rng.gen_range(0..=6)).collect();
        let total: u32 = raw.iter().sum();
        if total == 0 {
            continue;
        }
        return raw
            .into_iter()
            .map(|w| Rat::new(w.into(), total.into()))
            .collect();
    }
}

fn positive_weights(rng: &mut impl Rng, len: usize) -> Vec<Rat> {
    let raw: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=6)).collect();
    let total: u32 = raw.iter().sum();
    raw.into_iter()
        .map(|w| Rat::new(w.into(), total.into()))
        .collect()
}

/// Runs all six axiom families over `trials` random kernels on spaces of
/// size at most 4. Exact equality throughout.
pub fn run_axiom_suite(seed: u64, trials: usize) -> AxiomReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut families = vec![
        AxiomFamily { name: "naturality of delete", cases: 0, failures: 0 },
        AxiomFamily { name: "copy coassociativity", cases: 0, failures: 0 },
        AxiomFamily { name: "copy-delete cancellation", cases: 0, failures: 0 },
        AxiomFamily { name: "copy cocommutativity", cases: 0, failures: 0 },
        AxiomFamily { name: "tensor compatibility of copy and delete", cases: 0, failures: 0 },
        AxiomFamily { name: "determinism characterization", cases: 0, failures: 0 },
    ];

    for _ in 0..trials {
        let a = random_space(&mut rng, "A", 4);
        let b = random_space(&mut rng, "B", 4);
        let f = random_kernel(&mut rng, &a, &b);

        // delete after f equals delete.
        families[0].cases += 1;
        let lhs = f.compose(&Kernel::delete(&b)).unwrap();
        if lhs != Kernel::delete(&a) {
            families[0].failures += 1;
        }

        // copy ⨟ (copy ⊗ id) = copy ⨟ (id ⊗ copy); flattening makes both
        // sides kernels A → A⊗A⊗A.
        families[1].cases += 1;
        let copy_a = Kernel::copy(&a);
        let id_a = Kernel::identity(&a);
        let left = copy_a.compose(&copy_a.tensor(&id_a)).unwrap();
        let right = copy_a.compose(&id_a.tensor(&copy_a)).unwrap();
        if left != right {
            families[1].failures += 1;
        }

        // copy then delete either branch is the identity.
        families[2].cases += 1;
        let del_first = copy_a.compose(&Kernel::delete(&a).tensor(&id_a)).unwrap();
        let del_second = copy_a.compose(&id_a.tensor(&Kernel::delete(&a))).unwrap();
        if del_first != id_a || del_second != id_a {
            families[2].failures += 1;
        }

        // copy then swap is copy.
        families[3].cases += 1;
        if copy_a.compose(&Kernel::swap(&a, &a)).unwrap() != copy_a {
            families[3].failures += 1;
        }

        // delete and copy on A⊗B factor through the components.
        families[4].cases += 1;
        let ab = a.tensor(&b);
        let delete_ok =
            Kernel::delete(&ab) == Kernel::delete(&a).tensor(&Kernel::delete(&b));
        // (copy_A ⊗ copy_B) lands in A⊗A⊗B⊗B; reorder to A⊗B⊗A⊗B.
        let componentwise = Kernel::copy(&a)
            .tensor(&Kernel::copy(&b))
            .project_dst(&[0, 2, 1, 3])
            .unwrap();
        let copy_ok = Kernel::copy(&ab) == componentwise;
        if !(delete_ok && copy_ok) {
            families[4].failures += 1;
        }

        // Copy equation holds exactly for point-mass kernels and is
        // equivalent to the point-mass test on arbitrary kernels.
        families[5].cases += 1;
        let det = random_deterministic_kernel(&mut rng, &a, &b);
        let equivalence_on_f = f.satisfies_determinism_equation() == f.is_deterministic();
        let det_ok = det.is_deterministic() && det.satisfies_determinism_equation();
        if !(equivalence_on_f && det_ok) {
            families[5].failures += 1;
        }
    }

    AxiomReport { seed, trials, families }
}
