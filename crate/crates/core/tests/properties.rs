//! Property tests for the algebraic invariants of the transform stack and
//! the proximal/objective primitives.

use num_complex::Complex64;
use proptest::prelude::*;

use corrsense::cvec;
use corrsense::index_set::IndexSet;
use corrsense::solver::{objective, soft_threshold};
use corrsense::spectral::{unitary_dft, unitary_idft, PartialFourierOperator};

fn complex_vec(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..max_len)
        .prop_map(|pairs| pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dft_preserves_l2_norm(v in complex_vec(128)) {
        let fv = unitary_dft(&v);
        let lhs = cvec::norm_l2(&fv);
        let rhs = cvec::norm_l2(&v);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
    }

    #[test]
    fn dft_roundtrips(v in complex_vec(96)) {
        let back = unitary_idft(&unitary_dft(&v));
        prop_assert!(cvec::rel_err(&back, &v) <= 1e-10);
    }

    #[test]
    fn adjoint_pairing_holds(
        v in complex_vec(48),
        seed in 0u64..1000,
        m_frac in 0.2f64..1.0,
    ) {
        use rand::SeedableRng;
        let n = v.len();
        let m = ((n as f64 * m_frac).ceil() as usize).clamp(1, n);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let rows = IndexSet::sample_uniform(n, m, &mut rng).unwrap();
        let op = PartialFourierOperator::new(n, rows).unwrap();
        let y: Vec<Complex64> = (0..m).map(|i| Complex64::new(i as f64 - 1.0, 0.5)).collect();
        let lhs = cvec::inner(&op.apply(&v).unwrap(), &y);
        let rhs = cvec::inner(&v, &op.adjoint(&y).unwrap());
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn soft_threshold_is_nonexpansive_and_phase_preserving(
        v in complex_vec(64),
        tau in 0.01f64..5.0,
    ) {
        let out = soft_threshold(&v, tau);
        for (before, after) in v.iter().zip(&out) {
            // modulus shrinks by at most tau, never grows
            prop_assert!(after.norm() <= before.norm() + 1e-12);
            prop_assert!(before.norm() - after.norm() <= tau + 1e-12);
            // phase is preserved on surviving entries
            if after.norm() > 0.0 {
                let phase_diff = (after / before).arg().abs();
                prop_assert!(phase_diff <= 1e-10);
            }
        }
    }

    #[test]
    fn objective_is_absolutely_homogeneous(
        x in complex_vec(32),
        f in complex_vec(32),
        lambda in 0.05f64..4.0,
        scale in 0.1f64..10.0,
    ) {
        let base = objective(&x, &f, lambda);
        let sx: Vec<Complex64> = x.iter().map(|z| z * scale).collect();
        let sf: Vec<Complex64> = f.iter().map(|z| z * scale).collect();
        let scaled = objective(&sx, &sf, lambda);
        prop_assert!((scaled - scale * base).abs() <= 1e-9 * (1.0 + scaled));
    }

    #[test]
    fn support_shrinks_as_tolerance_grows(v in complex_vec(64)) {
        use corrsense::spectral::numerical_support;
        let t1 = 0.1;
        let t2 = 1.0;
        let s1 = numerical_support(&v, t1);
        let s2 = numerical_support(&v, t2);
        prop_assert!(s2.is_subset_of(&s1));
    }

    #[test]
    fn gather_scatter_roundtrip(
        v in complex_vec(64),
        seed in 0u64..1000,
    ) {
        use rand::SeedableRng;
        let n = v.len();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let set = IndexSet::sample_uniform(n, n / 2, &mut rng).unwrap();
        let gathered = cvec::gather(&v, &set);
        let spread = cvec::scatter(&gathered, &set, n);
        for i in 0..n {
            if set.contains(i) {
                prop_assert_eq!(spread[i], v[i]);
            } else {
                prop_assert_eq!(spread[i], Complex64::new(0.0, 0.0));
            }
        }
    }
}
