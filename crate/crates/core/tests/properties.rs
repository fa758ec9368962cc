use proptest::prelude::*;

use gapcert::certify::{recursion_bound, DeltaModel, RecursionOptions, Schedule};
use gapcert::delta::{delta_exact, random_projector, verify_projector_inequality};
use gapcert::lattice::{classify_region, level_length, s_decompose, verify_decomposition, Region};
use gapcert::linalg::seeded_rng;
use gapcert::model::{Builtin, LocalHamiltonian};
use gapcert::pvbs::pvbs_delta;
use gapcert::space::DEFAULT_BUDGET;
use gapcert::spectral::{diagonalize, AssembledOperator};

fn chain(model: Builtin) -> LocalHamiltonian {
    LocalHamiltonian::builtin(model, 1).unwrap()
}

fn gap(h: &LocalHamiltonian, r: &Region) -> f64 {
    let op = AssembledOperator::assemble(h, r, DEFAULT_BUDGET).unwrap();
    diagonalize(&op, None).unwrap().gap()
}

fn ff_model() -> impl Strategy<Value = Builtin> {
    prop_oneof![Just(Builtin::HeisenbergFm), Just(Builtin::Aklt)]
}

/// `(n, a_hi, b_lo)` with `A = [0, a_hi]`, `B = [b_lo, n)` overlapping and neither nested.
fn chain_split(max_n: i64) -> impl Strategy<Value = (i64, i64, i64)> {
    (3..=max_n)
        .prop_flat_map(|n| (Just(n), 1..n - 1))
        .prop_flat_map(|(n, a_hi)| (Just(n), Just(a_hi), 1..=a_hi))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn delta_is_symmetric_and_in_unit_interval(model in ff_model(), (n, a_hi, b_lo) in chain_split(6)) {
        let h = chain(model);
        let a = Region::interval(0, a_hi);
        let b = Region::interval(b_lo, n - 1);
        let ab = delta_exact(&h, &a, &b, DEFAULT_BUDGET).unwrap().value;
        let ba = delta_exact(&h, &b, &a, DEFAULT_BUDGET).unwrap().value;
        prop_assert!((ab - ba).abs() <= 1e-9);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn two_set_step_inequality(model in ff_model(), (n, a_hi, b_lo) in chain_split(6)) {
        // s = 1: λ_U >= (1 - 2δ)/2 · min(λ_A, λ_B)
        let h = chain(model);
        let a = Region::interval(0, a_hi);
        let b = Region::interval(b_lo, n - 1);
        let u = Region::interval(0, n - 1);
        let d = delta_exact(&h, &a, &b, DEFAULT_BUDGET).unwrap().value;
        let bound = (1.0 - 2.0 * d) / 2.0 * gap(&h, &a).min(gap(&h, &b));
        prop_assert!(gap(&h, &u) >= bound - 1e-9);
    }
}

proptest! {
    #[test]
    fn decomposition_invariant_under_translation_and_axis_permutation(
        k in 6usize..=14,
        s_frac in 0.0f64..1.0,
        shift in proptest::collection::vec(-50i64..50, 2),
        swap in any::<bool>(),
    ) {
        let dim = if k >= 11 && swap { 2 } else { 1 };
        let lk = level_length(k as i64, dim);
        let s_max = (lk / 8.0).floor() as usize;
        prop_assume!(s_max >= 1);
        let s = 1 + ((s_max - 1) as f64 * s_frac) as usize;
        let hi: Vec<i64> = (0..dim)
            .map(|i| level_length(k as i64 + 1 + i as i64, dim).floor() as i64)
            .collect();
        let region = Region::cuboid(&vec![0; dim], &hi).unwrap();
        prop_assume!(classify_region(&region).unwrap() == k);
        let base = s_decompose(&region, k, s).unwrap();
        let mut moved = region.translate(&shift[..dim]).unwrap();
        if dim == 2 {
            moved = moved.permute_axes(&[1, 0]).unwrap();
        }
        let other = s_decompose(&moved, k, s).unwrap();
        prop_assert!(verify_decomposition(&base).all());
        prop_assert!(verify_decomposition(&other).all());
        prop_assert_eq!(base.pairs.len(), other.pairs.len());
        let sizes = |d: &gapcert::lattice::SDecomposition| {
            let mut v: Vec<(usize, usize)> = d.pairs.iter().map(|(a, b)| (a.len(), b.len())).collect();
            v.sort();
            v
        };
        prop_assert_eq!(sizes(&base), sizes(&other));
    }

    #[test]
    fn pvbs_at_lambda_one_is_cardinality(la in 1i64..40, lb in 1i64..40, shift in 0i64..40) {
        let a = Region::interval(0, la - 1);
        let b = Region::interval(shift.min(la - 1), shift.min(la - 1) + lb - 1);
        let inter = a.intersection(&b).unwrap().len() as f64;
        let (na, nb) = (la as f64, lb as f64);
        let expect = ((na - inter) * (nb - inter) / (na * nb)).sqrt();
        let d = pvbs_delta(&a, &b, &[1.0]).unwrap().value;
        prop_assert!((d - expect).abs() <= 1e-12);
    }

    #[test]
    fn recursion_bound_decreases_with_delta(c1 in 0.0f64..2.0, dc in 0.0f64..2.0, alpha in 0.2f64..1.0) {
        let opts = RecursionOptions { k0: Some(30), ..RecursionOptions::default() };
        let run = |c: f64| {
            recursion_bound(1.0, &Schedule::Square, &DeltaModel::Exponential { c, alpha }, &opts).unwrap()
        };
        let lo = run(c1);
        let hi = run(c1 + dc);
        prop_assume!(lo.valid && hi.valid);
        prop_assert!(hi.lower_bound <= lo.lower_bound);
    }

    #[test]
    fn partial_products_stay_below_the_limit(levels in 1usize..400) {
        let opts = RecursionOptions { k0: Some(0), explicit_levels: levels, ..RecursionOptions::default() };
        let r = recursion_bound(1.0, &Schedule::Square, &DeltaModel::Constant { value: 0.0 }, &opts).unwrap();
        let exact = std::f64::consts::PI / std::f64::consts::PI.sinh();
        prop_assert!(r.valid);
        prop_assert!(r.lower_bound <= exact && r.lower_bound > exact - 1e-4);
    }

    #[test]
    fn projector_inequality_on_random_pairs(n in 1usize..16, kp in 0usize..16, kq in 0usize..16, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let p = random_projector(n, kp.min(n), &mut rng);
        let q = random_projector(n, kq.min(n), &mut rng);
        prop_assert!(verify_projector_inequality(&p, &q).unwrap().passed);
    }
}
