//! Property tests for the cross-module invariants: algebraic identities of
//! the matrix substrate, stationarity of assembled histories, picture
//! agreement of conditional expectations, product detection against an
//! independent alternating-least-squares fit, and re-verification of every
//! intertwiner's stored residuals.

use proptest::prelude::*;

use pwlab_core::ambiguity::{
    ai_retarget, build_intertwiner_finite, completed_basis_map, controlled_power_trivializer,
    history_intertwiner_same_law, records_experiment, spectral_washing_report, RecordsScenario,
};
use pwlab_core::clock::DiscreteClock;
use pwlab_core::linalg::{
    singular_values, spectra_equal, spectrum_unitary, unitary_eigen, Complex64, ComplexMatrix,
    Keep,
};
use pwlab_core::pw::{
    assemble_timeless, check_stationarity, conditional_expectation, evolve_history,
    haar_unit_vector, haar_unitary, sample_cyclic_unitary, sample_unit_vector, seeded_rng,
    PWSystem, RestLaw, TimelessState,
};
use pwlab_core::tps::{extract_wavefunction, pullback_tps, tps_equivalent, Tps, TpsEquivalence};

fn entry_strategy() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec(entry_strategy(), rows * cols)
        .prop_map(move |entries| ComplexMatrix::new(rows, cols, entries).unwrap())
}

fn cyclic_system(n: usize, d: usize, seed: u64) -> PWSystem {
    PWSystem::new(
        DiscreteClock::new(n).unwrap(),
        d,
        RestLaw::Fixed(sample_cyclic_unitary(n, d, seed)),
    )
    .unwrap()
}

fn hermitian_from_seed(d: usize, seed: u64) -> ComplexMatrix {
    let m = haar_unitary(d, &mut seeded_rng(seed));
    (&m + &m.dagger()).scale(Complex64::new(0.5, 0.0))
}

/// Independent nearest-product fit: alternating least squares on
/// ‖Q − A⊗B‖_F from a few deterministic starts, no SVD involved.
fn nearest_product_fit_residual(q: &ComplexMatrix, dim_c: usize, dim_r: usize) -> f64 {
    let starts = [
        ComplexMatrix::identity(dim_c),
        ComplexMatrix::from_fn(dim_c, dim_c, |_, _| Complex64::new(1.0, 0.0)),
        ComplexMatrix::from_fn(dim_c, dim_c, |i, j| {
            Complex64::new((1 + i) as f64, (i * dim_c + j) as f64)
        }),
    ];
    let mut best = f64::INFINITY;
    for start in starts {
        let mut a = start;
        let mut b = ComplexMatrix::identity(dim_r);
        let mut degenerate = false;
        for _ in 0..80 {
            let na = a.norm_fro().powi(2);
            if na < 1e-30 {
                degenerate = true;
                break;
            }
            b = ComplexMatrix::from_fn(dim_r, dim_r, |j, j2| {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..dim_c {
                    for i2 in 0..dim_c {
                        acc += a[(i, i2)].conj() * q[(i * dim_r + j, i2 * dim_r + j2)];
                    }
                }
                acc / na
            });
            let nb = b.norm_fro().powi(2);
            if nb < 1e-30 {
                degenerate = true;
                break;
            }
            a = ComplexMatrix::from_fn(dim_c, dim_c, |i, i2| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..dim_r {
                    for j2 in 0..dim_r {
                        acc += b[(j, j2)].conj() * q[(i * dim_r + j, i2 * dim_r + j2)];
                    }
                }
                acc / nb
            });
        }
        if !degenerate {
            best = best.min((q - &a.kron(&b)).norm_fro());
        }
    }
    best
}

fn controlled_not() -> ComplexMatrix {
    ComplexMatrix::from_real(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 1.0, 0.0,
        ],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kron_mixed_product_rule(
        a in matrix_strategy(2, 2),
        b in matrix_strategy(3, 3),
        c in matrix_strategy(2, 2),
        d in matrix_strategy(3, 3),
    ) {
        let lhs = &a.kron(&b) * &c.kron(&d);
        let rhs = (&a * &c).kron(&(&b * &d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn kron_is_associative(
        a in matrix_strategy(2, 2),
        b in matrix_strategy(2, 3),
        c in matrix_strategy(3, 2),
    ) {
        let lhs = a.kron(&b).kron(&c);
        let rhs = a.kron(&b.kron(&c));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn dagger_is_an_involution(m in matrix_strategy(3, 5)) {
        let twice = m.dagger().dagger();
        prop_assert_eq!(twice.entries(), m.entries());
    }

    #[test]
    fn realign_involution_recovers_the_matrix(m in matrix_strategy(6, 6)) {
        let back = m
            .realign(2, 3)
            .unwrap()
            .realign_blocks((2, 2), (3, 3))
            .unwrap();
        prop_assert_eq!(back.entries(), m.entries());
    }

    #[test]
    fn partial_trace_preserves_the_trace(m in matrix_strategy(6, 6)) {
        let full = m.trace();
        for keep in [Keep::Clock, Keep::Rest] {
            let reduced = m.partial_trace(2, 3, keep).unwrap().trace();
            prop_assert!((reduced - full).norm() < 1e-12);
        }
    }

    #[test]
    fn unitary_eigendecomposition_reconstructs(seed in any::<u64>(), dim in 2usize..=8) {
        let u = haar_unitary(dim, &mut seeded_rng(seed));
        let (values, vectors) = unitary_eigen(&u).unwrap();
        let diag = ComplexMatrix::diagonal(&values);
        let rebuilt = &(&vectors * &diag) * &vectors.dagger();
        prop_assert!(rebuilt.max_abs_diff(&u) < 1e-9);
        for v in &values {
            prop_assert!((v.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn shift_spectrum_is_washed_for_any_cyclic_law(seed in any::<u64>()) {
        let (n, d) = (4usize, 2usize);
        let u_r = sample_cyclic_unitary(n, d, seed);
        let total = DiscreteClock::new(n).unwrap().shift_op().kron(&u_r);
        let roots: Vec<Complex64> = DiscreteClock::new(n)
            .unwrap()
            .root_of_unity_spectrum()
            .iter()
            .flat_map(|z| std::iter::repeat_n(*z, d))
            .collect();
        let expected = pwlab_core::SpectrumMultiset::from_eigenvalues(&roots, 1e-8);
        prop_assert!(spectra_equal(&spectrum_unitary(&total).unwrap(), &expected, 1e-8));
    }

    #[test]
    fn assembled_histories_are_stationary(seed in any::<u64>(), n in 1usize..=16, d in 1usize..=8) {
        let sys = cyclic_system(n, d, seed);
        let psi0 = sample_unit_vector(d, seed.wrapping_add(1));
        let psi = assemble_timeless(&evolve_history(&sys, &psi0).unwrap());
        prop_assert!(check_stationarity(&sys, &psi).unwrap() <= 1e-9);
    }

    #[test]
    fn relative_states_recover_the_history(seed in any::<u64>(), n in 1usize..=8, d in 1usize..=6) {
        let sys = cyclic_system(n, d, seed);
        let h = evolve_history(&sys, &sample_unit_vector(d, seed.wrapping_add(1))).unwrap();
        let psi = assemble_timeless(&h);
        for tau in 0..n {
            let rel = psi.relative_state(tau).unwrap();
            // Up to a global phase.
            prop_assert!((rel.inner(h.state(tau)).norm() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn conditional_expectations_agree_across_pictures(
        seed in any::<u64>(),
        n in 2usize..=6,
        d in 2usize..=6,
    ) {
        let sys = cyclic_system(n, d, seed);
        let psi = assemble_timeless(
            &evolve_history(&sys, &sample_unit_vector(d, seed.wrapping_add(1))).unwrap(),
        );
        let a = hermitian_from_seed(d, seed.wrapping_add(2));
        for tau in 0..n {
            // The three-way agreement within 1e-9 is asserted inside.
            let value = conditional_expectation(&sys, &psi, &a, tau).unwrap();
            prop_assert!(value.is_finite());
        }
    }

    #[test]
    fn pullback_composes_and_equivalence_is_symmetric(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let reference = Tps::identity(2, 3);
        let m1 = haar_unitary(6, &mut rng);
        let m2 = haar_unitary(6, &mut rng);
        let twice = pullback_tps(&pullback_tps(&reference, &m1).unwrap(), &m2).unwrap();
        let once = pullback_tps(&reference, &(&m1 * &m2)).unwrap();
        prop_assert!(twice.iso().max_abs_diff(once.iso()) < 1e-10);

        let local = haar_unitary(2, &mut rng).kron(&haar_unitary(3, &mut rng));
        let other = pullback_tps(&reference, &local).unwrap();
        let ab = tps_equivalent(&reference, &other, 1e-8).unwrap().is_equivalent();
        let ba = tps_equivalent(&other, &reference, 1e-8).unwrap().is_equivalent();
        prop_assert!(ab && ba);
        prop_assert!(tps_equivalent(&other, &other, 1e-8).unwrap().is_equivalent());
    }

    #[test]
    fn realignment_rank_one_iff_nearest_product_fit_vanishes(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let a = haar_unitary(2, &mut rng);
        let b = haar_unitary(2, &mut rng);
        let c = haar_unitary(2, &mut rng);
        let d = haar_unitary(2, &mut rng);

        let product = a.kron(&b);
        let s = singular_values(&product.realign(2, 2).unwrap());
        prop_assert!(s[1] / s[0] < 1e-10);
        prop_assert!(nearest_product_fit_residual(&product, 2, 2) < 1e-8);

        // Local dressing never changes the operator-Schmidt profile, so the
        // dressed controlled-not stays exactly rank two.
        let dressed = &(&a.kron(&b) * &controlled_not()) * &c.kron(&d);
        let s = singular_values(&dressed.realign(2, 2).unwrap());
        prop_assert!((s[1] / s[0] - 1.0).abs() < 1e-10);
        let fit = nearest_product_fit_residual(&dressed, 2, 2);
        prop_assert!((fit - 2.0_f64.sqrt()).abs() < 0.2, "fit {fit}");
    }

    #[test]
    fn passive_pullback_matches_active_transformation(seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let m = haar_unitary(6, &mut rng);
        let reference = Tps::identity(2, 3);
        let psi = TimelessState::new(2, 3, haar_unit_vector(6, &mut rng)).unwrap();
        let passive = extract_wavefunction(&psi, &pullback_tps(&reference, &m).unwrap()).unwrap();
        let active = extract_wavefunction(
            &TimelessState::new(2, 3, &m * psi.vector()).unwrap(),
            &reference,
        )
        .unwrap();
        prop_assert!(passive.max_abs_diff(&active) < 1e-10);
    }

    #[test]
    fn intertwiners_satisfy_their_stored_residuals(
        seed in any::<u64>(),
        n in 2usize..=6,
        d in 2usize..=4,
    ) {
        let source = cyclic_system(n, d, seed);
        let target = cyclic_system(n, d, seed.wrapping_add(1));
        let psi0 = sample_unit_vector(d, seed.wrapping_add(2));
        let psi0t = sample_unit_vector(d, seed.wrapping_add(3));
        let it = build_intertwiner_finite(&source, &psi0, &target, &psi0t).unwrap();
        let (law, hist) = it.verify().unwrap();
        prop_assert!(law <= 1e-9 && hist <= 1e-9);
        prop_assert!((law - it.law_residual()).abs() < 1e-12);
        prop_assert!((hist - it.history_residual()).abs() < 1e-12);

        let triv = controlled_power_trivializer(&source).unwrap();
        let (law, hist) = triv.verify().unwrap();
        prop_assert!(law <= 1e-9 && hist <= 1e-9);

        let h1 = evolve_history(&source, &psi0).unwrap();
        let h2 = evolve_history(&source, &psi0t).unwrap();
        let same_law = history_intertwiner_same_law(&source, &h1, &h2).unwrap();
        let (law, hist) = same_law.verify().unwrap();
        prop_assert!(law <= 1e-9 && hist <= 1e-9);
    }

    #[test]
    fn direct_intertwiner_factors_through_the_trivializers(
        seed in any::<u64>(),
        n in 2usize..=5,
        d in 2usize..=4,
    ) {
        let source = cyclic_system(n, d, seed);
        let target = cyclic_system(n, d, seed.wrapping_add(1));
        let psi0 = sample_unit_vector(d, seed.wrapping_add(2));
        let psi0t = sample_unit_vector(d, seed.wrapping_add(3));
        let direct = build_intertwiner_finite(&source, &psi0, &target, &psi0t).unwrap();
        let w_src = controlled_power_trivializer(&source).unwrap();
        let w_tgt = controlled_power_trivializer(&target).unwrap();
        // Trivialize, retarget locally in the trivial frame, untrivialize.
        let local = ComplexMatrix::identity(n).kron(&completed_basis_map(&psi0, &psi0t).unwrap());
        let composed = &(&w_tgt.s().dagger() * &local) * w_src.s();
        // The composed route agrees with the direct construction up to a
        // local unitary on the factors.
        let eq = tps_equivalent(
            &Tps::new(n, d, composed).unwrap(),
            &Tps::new(n, d, direct.s().clone()).unwrap(),
            1e-8,
        )
        .unwrap();
        match eq {
            TpsEquivalence::Equivalent { clock_factor, rest_factor, .. } => {
                let connecting = clock_factor.kron(&rest_factor);
                prop_assert!(connecting.max_abs_diff(&ComplexMatrix::identity(n * d)) < 1e-9);
            }
            TpsEquivalence::Inequivalent { second_singular_ratio } => {
                prop_assert!(false, "composition is nonlocal, ratio {second_singular_ratio}");
            }
        }
    }

    #[test]
    fn retargeting_identity_holds_for_random_targets(
        seed in any::<u64>(),
        n in 2usize..=6,
        d in 2usize..=6,
    ) {
        let sys = cyclic_system(n, d, seed);
        let psi = assemble_timeless(
            &evolve_history(&sys, &sample_unit_vector(d, seed.wrapping_add(1))).unwrap(),
        );
        let mut rng = seeded_rng(seed.wrapping_add(2));
        let states: Vec<ComplexMatrix> = (0..n).map(|_| haar_unit_vector(d, &mut rng)).collect();
        let target = pwlab_core::pw::History::from_states(d, states).unwrap();
        let out = ai_retarget(&psi, &target).unwrap();
        prop_assert!(out.component_residual <= 1e-10);
        prop_assert!(out.m.check_unitary(1e-10).is_ok());
    }

    #[test]
    fn rest_spectra_vary_while_totals_do_not(seed in any::<u64>()) {
        let report = spectral_washing_report(4, 3, 8, seed).unwrap();
        prop_assert!(report.pass);
        prop_assert!(report.rest_spectra_differ);
    }

    #[test]
    fn record_validity_is_exactly_binary(
        seed in any::<u64>(),
        dim in 2usize..=4,
        n in 1usize..=4,
    ) {
        let record_value = (seed % dim as u64) as usize;
        let scenario =
            RecordsScenario::with_identity_labeling(DiscreteClock::new(n).unwrap(), dim).unwrap();
        let report = records_experiment(&scenario, record_value, record_value).unwrap();
        prop_assert!((report.validity_before - 1.0).abs() < 1e-12);
        prop_assert!(report.validity_after.abs() < 1e-12);
        prop_assert!(report.recorder_block_residual < 1e-12);
    }
}
