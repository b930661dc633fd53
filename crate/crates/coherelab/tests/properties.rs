//! Randomized invariants over states, channels, and patterns.

use num_complex::Complex64;
use proptest::prelude::*;

use coherelab::measures::{c_l1, c_rel_ent};
use coherelab::numerics::{eig_hermitian, trace_norm, ComplexMatrix};
use coherelab::quantum::{
    born_distribution, random_density, random_sio, DensityMatrix, PhaseVector, Povm,
};

fn arb_density(d: usize) -> impl Strategy<Value = DensityMatrix> {
    (0u64..1_000_000).prop_map(move |seed| random_density(d, d, seed).unwrap())
}

fn arb_hermitian(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |raw| {
        let g = ComplexMatrix::from_fn(d, |j, k| {
            let (re, im) = raw[j * d + k];
            Complex64::new(re, im)
        });
        g.add(&g.adjoint()).scale_re(0.5)
    })
}

fn arb_phases(d: usize) -> impl Strategy<Value = PhaseVector> {
    prop::collection::vec(0.0f64..(2.0 * std::f64::consts::PI), d)
        .prop_map(|v| PhaseVector::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn trace_norm_dominates_trace(a in arb_hermitian(4)) {
        let tn = trace_norm(&a).unwrap();
        prop_assert!(tn >= a.trace().re.abs() - 1e-10);
    }

    #[test]
    fn eigenvalues_sum_to_trace(a in arb_hermitian(4)) {
        let eig = eig_hermitian(&a).unwrap();
        let sum: f64 = eig.eigenvalues.iter().sum();
        prop_assert!((sum - a.trace().re).abs() < 1e-9);
    }

    #[test]
    fn eigendecomposition_reconstructs(a in arb_hermitian(3)) {
        let eig = eig_hermitian(&a).unwrap();
        let rebuilt = eig.apply_fn(|x| x);
        prop_assert!(rebuilt.sub(&a).max_abs() < 1e-9);
    }

    #[test]
    fn born_distribution_is_a_distribution(
        rho in arb_density(3),
        alpha in arb_phases(3),
    ) {
        let p = born_distribution(&rho, &alpha, &Povm::fourier(3)).unwrap();
        let total: f64 = p.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
        prop_assert!(p.iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn global_phase_shift_leaves_pattern_unchanged(
        rho in arb_density(3),
        alpha in arb_phases(3),
        shift in 0.0f64..(2.0 * std::f64::consts::PI),
    ) {
        let povm = Povm::fourier(3);
        let p = born_distribution(&rho, &alpha, &povm).unwrap();
        let q = born_distribution(&rho, &alpha.shifted(shift), &povm).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn diagonal_states_give_flat_response(
        probs in prop::collection::vec(0.01f64..1.0, 3),
        alpha in arb_phases(3),
        beta in arb_phases(3),
    ) {
        let total: f64 = probs.iter().sum();
        let normed: Vec<f64> = probs.iter().map(|x| x / total).collect();
        let rho = DensityMatrix::from_diagonal(&normed).unwrap();
        let povm = Povm::fourier(3);
        let p = born_distribution(&rho, &alpha, &povm).unwrap();
        let q = born_distribution(&rho, &beta, &povm).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn c_l1_invariant_under_phases(rho in arb_density(4), alpha in arb_phases(4)) {
        let rotated = rho.apply_phases(&alpha).unwrap();
        prop_assert!((c_l1(&rho) - c_l1(&rotated)).abs() < 1e-10);
    }

    #[test]
    fn measure_upper_bounds(rho in arb_density(3)) {
        prop_assert!(c_l1(&rho) <= 2.0 + 1e-9);
        prop_assert!(c_rel_ent(&rho).unwrap() <= 3f64.log2() + 1e-9);
    }

    #[test]
    fn dephasing_kills_c_l1(rho in arb_density(4)) {
        prop_assert!(c_l1(&rho.dephase()) == 0.0);
    }

    #[test]
    fn sio_branch_probabilities_sum_to_one(
        rho in arb_density(3),
        seed in 0u64..1_000_000,
        n_kraus in 1usize..5,
    ) {
        let channel = random_sio(3, n_kraus, seed).unwrap();
        let branches = channel.apply(&rho).unwrap();
        let total: f64 = branches.iter().map(|(q, _)| q).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for (_, state) in &branches {
            prop_assert!((state.matrix().trace().re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sio_preserves_diagonal_states(
        probs in prop::collection::vec(0.01f64..1.0, 3),
        seed in 0u64..1_000_000,
    ) {
        let total: f64 = probs.iter().sum();
        let normed: Vec<f64> = probs.iter().map(|x| x / total).collect();
        let rho = DensityMatrix::from_diagonal(&normed).unwrap();
        let channel = random_sio(3, 3, seed).unwrap();
        for (_, state) in channel.apply(&rho).unwrap() {
            prop_assert!(state.is_diagonal(1e-10));
        }
    }

    #[test]
    fn state_json_round_trip(rho in arb_density(3)) {
        let text = rho.to_json_string();
        let back = DensityMatrix::from_json_str(&text).unwrap();
        prop_assert!(rho.matrix().sub(back.matrix()).max_abs() < 1e-10);
    }
}
