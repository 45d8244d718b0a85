//! End-to-end checks behind `pwlab suite` and the acceptance tests.
//!
//! Each criterion pins its tolerances in code and reports one pass/fail
//! outcome with a detail line. The constructions are exact, so every
//! criterion holds for any base seed; seeds only move the sampled
//! instances around.

use std::time::Instant;

use crate::ambiguity::{
    ai_retarget, build_intertwiner_finite, controlled_power_trivializer,
    history_intertwiner_same_law, records_experiment, spectral_washing_report,
    windowed_shift_intertwiner, RecordsScenario,
};
use crate::clock::DiscreteClock;
use crate::error::Result;
use crate::linalg::{
    singular_values, spectra_equal, spectrum_hermitian, spectrum_unitary, Complex64,
    ComplexMatrix, SpectrumMultiset,
};
use crate::pw::{
    assemble_timeless, evolve_history, haar_unit_vector, haar_unitary, sample_cyclic_unitary,
    sample_unit_vector, seeded_rng, History, PWSystem, RestLaw, TimelessState,
};
use crate::tps::{extract_wavefunction, pullback_tps, tps_from_generating_observables,
    tps_equivalent, Tps};

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub details: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} [{}] {} — {}",
            self.id,
            if self.pass { "pass" } else { "FAIL" },
            self.name,
            self.details
        )
    }
}

fn outcome(id: usize, name: &str, pass: bool, details: String) -> CriterionResult {
    CriterionResult {
        id,
        name: name.to_string(),
        pass,
        details,
    }
}

fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut h = base ^ 0x9e37_79b9_7f4a_7c15;
    for &t in tags {
        h = h
            .wrapping_mul(0x0000_0100_0000_01b3)
            .wrapping_add(t)
            .rotate_left(17);
    }
    h
}

fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
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

fn cyclic_system(n: usize, d: usize, seed: u64) -> Result<PWSystem> {
    PWSystem::new(
        DiscreteClock::new(n)?,
        d,
        RestLaw::Fixed(sample_cyclic_unitary(n, d, seed)),
    )
}

/// Largest entry deviation between two matrices after the optimal global
/// phase alignment.
fn max_diff_up_to_phase(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let overlap = (&a.dagger() * b).trace();
    let phase = if overlap.norm() > 1e-150 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.scale(phase).max_abs_diff(b)
}

/// Per-column phase canonicalization: the largest-magnitude entry of every
/// column becomes real-positive. This is the gauge in which a commuting
/// observable pair determines its TPS, so ground-truth conjugators for the
/// recovery check are put in this gauge.
fn canonicalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let cols: Vec<ComplexMatrix> = (0..m.cols())
        .map(|j| {
            let v = m.column(j);
            let lead = v
                .entries()
                .iter()
                .copied()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .expect("nonempty column");
            v.scale(lead.conj() / lead.norm())
        })
        .collect();
    ComplexMatrix::from_columns(&cols).expect("columns agree")
}

fn criterion_01(_seed: u64) -> Result<CriterionResult> {
    let started = Instant::now();
    let i2 = ComplexMatrix::identity(2);
    let h = &sigma_x().kron(&i2) + &i2.kron(&sigma_x());
    let h_prime = sigma_x().kron(&i2);
    let u = sigma_x().kron(&sigma_x());
    let u_prime = sigma_x().kron(&i2);

    let reals = |xs: &[f64]| -> SpectrumMultiset {
        SpectrumMultiset::from_eigenvalues(
            &xs.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(),
            1e-12,
        )
    };
    let tol = 1e-10;
    let mut pass = spectra_equal(&spectrum_hermitian(&h)?, &reals(&[-2.0, 0.0, 0.0, 2.0]), tol);
    pass &= spectra_equal(
        &spectrum_hermitian(&h_prime)?,
        &reals(&[-1.0, -1.0, 1.0, 1.0]),
        tol,
    );
    let washed = reals(&[-1.0, -1.0, 1.0, 1.0]);
    pass &= spectra_equal(&spectrum_unitary(&u)?, &washed, tol);
    pass &= spectra_equal(&spectrum_unitary(&u_prime)?, &washed, tol);

    let clock = DiscreteClock::new(2)?;
    let source = PWSystem::new(clock, 2, RestLaw::Fixed(sigma_x()))?;
    let target = PWSystem::new(clock, 2, RestLaw::Fixed(i2.clone()))?;
    let ket1 = ComplexMatrix::basis_vector(2, 1);
    let it = build_intertwiner_finite(&source, &ket1, &target, &ket1)?;
    let s_dev = it.s().max_abs_diff(&controlled_not());
    let conj_dev = (&(it.s() * &u) * &it.s().dagger()).max_abs_diff(&u_prime);
    let psi = assemble_timeless(&evolve_history(&source, &ket1)?);
    let psi_prime = assemble_timeless(&evolve_history(&target, &ket1)?);
    let state_dev = (&(it.s() * psi.vector()) - psi_prime.vector()).norm_fro();
    pass &= s_dev <= 1e-12 && conj_dev <= 1e-12 && state_dev <= 1e-12;

    let within_bound = started.elapsed().as_secs_f64() < 1.0;
    pass &= within_bound;
    Ok(outcome(
        1,
        "two-qubit example reproduction",
        pass,
        format!(
            "spectra exact; S dev {s_dev:.1e}, conjugation dev {conj_dev:.1e}, state dev {state_dev:.1e}, runtime bound (1 s) {}",
            if within_bound { "met" } else { "exceeded" }
        ),
    ))
}

fn criterion_02(seed: u64) -> Result<CriterionResult> {
    let started = Instant::now();
    let bound = 1e-9;
    let mut worst_law: f64 = 0.0;
    let mut worst_hist: f64 = 0.0;
    let mut count = 0usize;
    for &n in &[2usize, 3, 4, 8] {
        for &d in &[2usize, 3, 6] {
            for trial in 0..10u64 {
                let tags = [n as u64, d as u64, trial];
                let source = cyclic_system(n, d, derive_seed(seed, &[1, tags[0], tags[1], tags[2]]))?;
                let target = cyclic_system(n, d, derive_seed(seed, &[2, tags[0], tags[1], tags[2]]))?;
                let psi0 = sample_unit_vector(d, derive_seed(seed, &[3, tags[0], tags[1], tags[2]]));
                let psi0t = sample_unit_vector(d, derive_seed(seed, &[4, tags[0], tags[1], tags[2]]));
                let it = build_intertwiner_finite(&source, &psi0, &target, &psi0t)?;
                worst_law = worst_law.max(it.law_residual());
                worst_hist = worst_hist.max(it.history_residual());
                count += 1;
            }
        }
    }
    let within_bound = started.elapsed().as_secs_f64() < 10.0;
    let pass = worst_law <= bound && worst_hist <= bound && within_bound;
    Ok(outcome(
        2,
        "finite maximal-ambiguity intertwiner grid",
        pass,
        format!(
            "{count} builds, worst law {worst_law:.1e}, worst history {worst_hist:.1e}, runtime bound (10 s) {}",
            if within_bound { "met" } else { "exceeded" }
        ),
    ))
}

fn criterion_03(seed: u64) -> Result<CriterionResult> {
    let bound = 1e-10;
    let mut worst: f64 = 0.0;
    for &n in &[2usize, 3, 4, 8] {
        for &d in &[2usize, 3, 6] {
            let sys = cyclic_system(n, d, derive_seed(seed, &[5, n as u64, d as u64]))?;
            let it = controlled_power_trivializer(&sys)?;
            let u = sys.total_step()?;
            let bare_shift = DiscreteClock::new(n)?
                .shift_op()
                .kron(&ComplexMatrix::identity(d));
            let dev = (&(it.s() * &u) * &it.s().dagger()).max_abs_diff(&bare_shift);
            worst = worst.max(dev).max(it.law_residual());
        }
    }
    // The two-qubit trivializer is the controlled-not up to a global phase.
    let qubit_sys = PWSystem::new(DiscreteClock::new(2)?, 2, RestLaw::Fixed(sigma_x()))?;
    let w = controlled_power_trivializer(&qubit_sys)?;
    let cnot_dev = max_diff_up_to_phase(w.s(), &controlled_not());
    let pass = worst <= bound && cnot_dev <= 1e-12;
    Ok(outcome(
        3,
        "controlled-power trivializer",
        pass,
        format!("worst conjugation dev {worst:.1e}, two-qubit vs controlled-not {cnot_dev:.1e}"),
    ))
}

fn criterion_04(seed: u64) -> Result<CriterionResult> {
    let (n, d) = (4usize, 3usize);
    let mut worst_comm: f64 = 0.0;
    let mut worst_map: f64 = 0.0;
    for trial in 0..10u64 {
        let sys = cyclic_system(n, d, derive_seed(seed, &[6, trial]))?;
        let h1 = evolve_history(&sys, &sample_unit_vector(d, derive_seed(seed, &[7, trial])))?;
        let h2 = evolve_history(&sys, &sample_unit_vector(d, derive_seed(seed, &[8, trial])))?;
        let it = history_intertwiner_same_law(&sys, &h1, &h2)?;
        let u = sys.total_step()?;
        worst_comm = worst_comm.max((&(it.s() * &u) - &(&u * it.s())).norm_max());
        for tau in 0..n {
            let src = ComplexMatrix::basis_vector(n, tau).kron(h1.state(tau));
            let tgt = ComplexMatrix::basis_vector(n, tau).kron(h2.state(tau));
            worst_map = worst_map.max((&(it.s() * &src) - &tgt).norm_max());
        }
    }
    let pass = worst_comm <= 1e-9 && worst_map <= 1e-9;
    Ok(outcome(
        4,
        "same-law history intertwiner",
        pass,
        format!("worst commutator {worst_comm:.1e}, worst history map {worst_map:.1e}"),
    ))
}

fn criterion_05(seed: u64) -> Result<CriterionResult> {
    let shapes = [
        (2usize, 2usize),
        (3, 3),
        (4, 2),
        (2, 4),
        (5, 3),
        (6, 6),
        (3, 5),
        (4, 4),
        (6, 2),
        (2, 6),
    ];
    let mut worst: f64 = 0.0;
    for trial in 0..20u64 {
        let (n, d) = shapes[(trial as usize) % shapes.len()];
        let sys = cyclic_system(n, d, derive_seed(seed, &[9, trial]))?;
        let psi = assemble_timeless(&evolve_history(
            &sys,
            &sample_unit_vector(d, derive_seed(seed, &[10, trial])),
        )?);
        let mut rng = seeded_rng(derive_seed(seed, &[11, trial]));
        let states: Vec<ComplexMatrix> = if trial % 2 == 0 {
            // Fully random history: independent states, no law at all.
            (0..n).map(|_| haar_unit_vector(d, &mut rng)).collect()
        } else {
            // Random walk: arbitrary unitary steps.
            let mut acc = vec![haar_unit_vector(d, &mut rng)];
            for tau in 0..n - 1 {
                let step = haar_unitary(d, &mut rng);
                acc.push(&step * &acc[tau]);
            }
            acc
        };
        let target = History::from_states(d, states)?;
        let out = ai_retarget(&psi, &target)?;
        worst = worst.max(out.component_residual);
    }
    let pass = worst <= 1e-10;
    Ok(outcome(
        5,
        "arbitrary-history retargeting identity",
        pass,
        format!("20 trials, worst component deviation {worst:.1e}"),
    ))
}

fn criterion_06(seed: u64) -> Result<CriterionResult> {
    let report = spectral_washing_report(4, 3, 20, derive_seed(seed, &[12]))?;
    let quarter_roots: Vec<Complex64> = (0..4)
        .flat_map(|j| {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / 4.0);
            std::iter::repeat_n(z, 3)
        })
        .collect();
    let expected = SpectrumMultiset::from_eigenvalues(&quarter_roots, 1e-12);
    let expected_ok = spectra_equal(&report.expected_total, &expected, 1e-8);
    let pass = report.pass && report.rest_spectra_differ && expected_ok;
    Ok(outcome(
        6,
        "spectral washing",
        pass,
        format!(
            "20 trials all washed to the quarter roots ×3: {}, rest spectra vary: {}",
            report.pass, report.rest_spectra_differ
        ),
    ))
}

fn criterion_07(_seed: u64) -> Result<CriterionResult> {
    let i2 = ComplexMatrix::identity(2);
    let clock = DiscreteClock::new(2)?;
    let source = PWSystem::new(clock, 2, RestLaw::Fixed(sigma_x()))?;
    let target = PWSystem::new(clock, 2, RestLaw::Fixed(i2.clone()))?;
    let ket1 = ComplexMatrix::basis_vector(2, 1);
    let s = build_intertwiner_finite(&source, &ket1, &target, &ket1)?
        .s()
        .clone();

    // The intertwiner is certified nonlocal ...
    let s_singulars = singular_values(&s.realign(2, 2)?);
    let nonlocal = s_singulars.len() > 1 && s_singulars[1] > 0.5;

    // ... while both conjugated laws stay of product form X ⊗ U_r.
    let u = sigma_x().kron(&sigma_x());
    let u_conj = &(&s * &u) * &s.dagger();
    let product_dev = u_conj.max_abs_diff(&sigma_x().kron(&i2));
    let ratio = |m: &ComplexMatrix| -> Result<f64> {
        let sv = singular_values(&m.realign(2, 2)?);
        Ok(if sv.len() > 1 { sv[1] / sv[0] } else { 0.0 })
    };
    let source_ratio = ratio(&u)?;
    let conj_ratio = ratio(&u_conj)?;
    let pass = nonlocal && product_dev <= 1e-12 && source_ratio <= 1e-8 && conj_ratio <= 1e-8;
    Ok(outcome(
        7,
        "nonlocal split change preserving noninteraction",
        pass,
        format!(
            "second operator-Schmidt value of S {:.3}, conjugated law product defect {conj_ratio:.1e}",
            s_singulars.get(1).copied().unwrap_or(0.0)
        ),
    ))
}

fn criterion_08(_seed: u64) -> Result<CriterionResult> {
    let scenario = RecordsScenario::with_identity_labeling(DiscreteClock::new(3)?, 2)?;
    let report = records_experiment(&scenario, 0, 0)?;
    let before_dev = (report.validity_before - 1.0).abs();
    let after_dev = report.validity_after.abs();
    let pass = before_dev <= 1e-12 && after_dev <= 1e-12 && report.recorder_block_residual <= 1e-12;
    Ok(outcome(
        8,
        "record decorrelation no-go",
        pass,
        format!(
            "validity before 1∓{before_dev:.1e}, after 0+{after_dev:.1e}, recorder block dev {:.1e}",
            report.recorder_block_residual
        ),
    ))
}

fn criterion_09(seed: u64) -> Result<CriterionResult> {
    let window = 8usize;
    let mut worst_interior: f64 = 0.0;
    for &d in &[2usize, 3] {
        let mut rng = seeded_rng(derive_seed(seed, &[13, d as u64]));
        let source: Vec<ComplexMatrix> =
            (0..window - 1).map(|_| haar_unitary(d, &mut rng)).collect();
        let target: Vec<ComplexMatrix> =
            (0..window - 1).map(|_| haar_unitary(d, &mut rng)).collect();
        let out = windowed_shift_intertwiner(
            &source,
            &target,
            window,
            &sample_unit_vector(d, derive_seed(seed, &[14, d as u64])),
            &sample_unit_vector(d, derive_seed(seed, &[15, d as u64])),
        )?;
        worst_interior = worst_interior.max(out.interior_residual());
    }

    // Consistency with the cyclic construction on τ-independent cyclic input.
    let mut worst_match: f64 = 0.0;
    for &d in &[2usize, 3] {
        let u_r = sample_cyclic_unitary(window, d, derive_seed(seed, &[16, d as u64]));
        let psi0 = sample_unit_vector(d, derive_seed(seed, &[17, d as u64]));
        let psi0t = sample_unit_vector(d, derive_seed(seed, &[18, d as u64]));
        let steps = vec![u_r.clone(); window - 1];
        let windowed = windowed_shift_intertwiner(&steps, &steps, window, &psi0, &psi0t)?;
        let sys = PWSystem::new(DiscreteClock::new(window)?, d, RestLaw::Fixed(u_r))?;
        let finite = build_intertwiner_finite(&sys, &psi0, &sys, &psi0t)?;
        worst_match = worst_match.max(windowed.s().max_abs_diff(finite.s()));
    }
    let pass = worst_interior <= 1e-10 && worst_match <= 1e-12;
    Ok(outcome(
        9,
        "windowed tau-dependent construction",
        pass,
        format!(
            "worst interior residual {worst_interior:.1e}, cyclic-input agreement {worst_match:.1e}"
        ),
    ))
}

fn criterion_10(seed: u64) -> Result<CriterionResult> {
    let shapes = [
        (2usize, 2usize),
        (2, 3),
        (3, 2),
        (2, 4),
        (4, 2),
        (2, 5),
        (5, 2),
        (3, 3),
        (2, 8),
        (4, 4),
    ];
    let mut all_equivalent = true;
    let mut nonlocal_checked = 0usize;
    for (trial, &(n, d)) in shapes.iter().enumerate() {
        let dim = n * d;
        let t0 = DiscreteClock::new(n)?.time_op().kron(&ComplexMatrix::identity(d));
        let x0 = ComplexMatrix::identity(n).kron(&DiscreteClock::new(d)?.time_op());
        let mut rng = seeded_rng(derive_seed(seed, &[19, trial as u64]));
        let conjugator = if trial % 2 == 0 {
            // Local conjugation.
            haar_unitary(n, &mut rng).kron(&haar_unitary(d, &mut rng))
        } else {
            // Nonlocal conjugation in the canonical column gauge.
            let m = canonicalize_columns(&haar_unitary(dim, &mut rng));
            let sv = singular_values(&m.realign(n, d)?);
            if sv.len() > 1 && sv[1] / sv[0] > 1e-3 {
                nonlocal_checked += 1;
            }
            m
        };
        let t = &(&conjugator * &t0) * &conjugator.dagger();
        let x = &(&conjugator * &x0) * &conjugator.dagger();
        let recovered = tps_from_generating_observables(&t, &x)?;
        let truth = Tps::new(n, d, conjugator)?;
        all_equivalent &= tps_equivalent(&recovered, &truth, 1e-8)?.is_equivalent();
    }

    // Explicit controlled-not conjugation.
    let t0 = DiscreteClock::new(2)?.time_op().kron(&ComplexMatrix::identity(2));
    let x0 = ComplexMatrix::identity(2).kron(&DiscreteClock::new(2)?.time_op());
    let s = controlled_not();
    let recovered = tps_from_generating_observables(
        &(&(&s * &t0) * &s.dagger()),
        &(&(&s * &x0) * &s.dagger()),
    )?;
    all_equivalent &= tps_equivalent(&recovered, &Tps::new(2, 2, s)?, 1e-8)?.is_equivalent();

    // Passive/active equality of the extracted wavefunction.
    let mut worst_passive: f64 = 0.0;
    for trial in 0..3u64 {
        let (n, d) = (2usize, 3usize);
        let mut rng = seeded_rng(derive_seed(seed, &[20, trial]));
        let m = haar_unitary(n * d, &mut rng);
        let reference = Tps::identity(n, d);
        let psi = TimelessState::new(n, d, haar_unit_vector(n * d, &mut rng))?;
        let passive = extract_wavefunction(&psi, &pullback_tps(&reference, &m)?)?;
        let active = extract_wavefunction(&TimelessState::new(n, d, &m * psi.vector())?, &reference)?;
        worst_passive = worst_passive.max(passive.max_abs_diff(&active));
    }
    let pass = all_equivalent && nonlocal_checked == shapes.len() / 2 && worst_passive <= 1e-10;
    Ok(outcome(
        10,
        "generating-observables TPS recovery",
        pass,
        format!(
            "11 recoveries equivalent to ground truth ({nonlocal_checked} nonlocal), passive/active dev {worst_passive:.1e}"
        ),
    ))
}

type Criterion = fn(u64) -> Result<CriterionResult>;

const CRITERIA: [(usize, &str, Criterion); 10] = [
    (1, "two-qubit example reproduction", criterion_01),
    (2, "finite maximal-ambiguity intertwiner grid", criterion_02),
    (3, "controlled-power trivializer", criterion_03),
    (4, "same-law history intertwiner", criterion_04),
    (5, "arbitrary-history retargeting identity", criterion_05),
    (6, "spectral washing", criterion_06),
    (7, "nonlocal split change preserving noninteraction", criterion_07),
    (8, "record decorrelation no-go", criterion_08),
    (9, "windowed tau-dependent construction", criterion_09),
    (10, "generating-observables TPS recovery", criterion_10),
];

/// Runs one criterion by id (1-based). Errors are folded into a failing
/// outcome so a suite run always yields ten lines.
pub fn run_criterion(id: usize, seed: u64) -> CriterionResult {
    let (_, name, f) = CRITERIA[id - 1];
    match f(seed) {
        Ok(result) => result,
        Err(err) => outcome(id, name, false, format!("error: {err}")),
    }
}

/// Runs all criteria in order.
pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|&(id, _, _)| run_criterion(id, seed))
        .collect()
}

pub fn criterion_count() -> usize {
    CRITERIA.len()
}
