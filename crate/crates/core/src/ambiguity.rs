//! Unitary intertwiners between ideal-clock systems.
//!
//! Every construction here produces a unitary S together with certified
//! residuals for the two defining identities: the law identity
//! S·U = U′·S and the history identity S|Ψ(τ)⟩ = |Ψ′(τ)⟩ on the temporal
//! states. Together they realize, in finite dimension, the statement that
//! any two ideal-clock systems of equal dimensions are unitarily equivalent
//! as laws and histories — the clock spectrum washes out the rest law's
//! spectrum, so no spectral obstruction remains.
//!
//! The constructions:
//!
//! - [`ai_retarget`] — a global basis change making a fixed timeless state
//!   carry the components of an arbitrary target history.
//! - [`build_intertwiner_finite`] — the cyclic |τ,k⟩-basis construction
//!   mapping one fixed law and history onto another.
//! - [`controlled_power_trivializer`] — the clock-controlled power
//!   W = Σ_τ |τ⟩⟨τ| ⊗ U_r^{−τ} conjugating X_n ⊗ U_r into X_n ⊗ I.
//! - [`history_intertwiner_same_law`] — S = Σ_τ |τ⟩⟨τ| ⊗ U_r^τ S₀ U_r^{−τ}
//!   commuting with the law and mapping one history onto another.
//! - [`windowed_shift_intertwiner`] — the wandering-subspace construction
//!   on a finite window with τ-dependent laws; the interior intertwining is
//!   checked and the boundary column is reported separately.
//! - [`spectral_washing_report`] — per-trial evidence that σ(X_n ⊗ U_r) is
//!   the n-th roots of unity with uniform multiplicity, independent of U_r.
//! - [`records_experiment`] — the record-decorrelation no-go: a record that
//!   is perfectly valid in one split is invalid in an equivalent one.

use serde::{Deserialize, Serialize};

use crate::clock::DiscreteClock;
use crate::error::{Error, Result};
use crate::linalg::{spectra_equal, spectrum_unitary, Complex64, ComplexMatrix, Keep, SpectrumMultiset};
use crate::pw::{
    assemble_timeless, evolve_history, sample_cyclic_unitary, History, PWSystem, RestLaw,
    TimelessState,
};
use crate::tol;
use crate::tps::{pullback_tps, Tps};

/// A unitary that maps a vector `a` to a vector `b`: a phase rotor when the
/// vectors are parallel, otherwise the composition of the reflection
/// through `a` and the reflection through the normalized bisector, with the
/// relative phase restored afterwards.
pub fn unit_vector_rotation(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_column() || !b.is_column() || a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rotation from {}x{} to {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    a.check_unit_column()?;
    b.check_unit_column()?;
    let dim = a.rows();
    let overlap = a.inner(b);
    let beta = if overlap.norm() > 1e-150 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    // Align the phase so ⟨a|b̃⟩ is real and nonnegative.
    let b_aligned = b.scale(beta.conj());
    let id = ComplexMatrix::identity(dim);
    let reflect = |v: &ComplexMatrix| &id - &v.projector().scale(Complex64::new(2.0, 0.0));
    let bisector_raw = a + &b_aligned;
    let bisector = bisector_raw.scale(Complex64::new(1.0 / bisector_raw.norm_fro(), 0.0));
    let mapped = &reflect(&bisector) * &reflect(a);
    // Restore the phase on the image ray.
    let rotor = &id + &b_aligned.projector().scale(beta - Complex64::new(1.0, 0.0));
    Ok(&rotor * &mapped)
}

/// Completes a unit vector to an orthonormal basis with that vector first,
/// by deterministic Gram–Schmidt against the standard basis in index order;
/// candidates whose residual falls below the drop threshold are skipped.
pub fn complete_orthonormal_basis(first: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    first.check_unit_column()?;
    let dim = first.rows();
    let mut basis = vec![first.clone()];
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut candidate = ComplexMatrix::basis_vector(dim, k);
        for prev in &basis {
            let coeff = prev.inner(&candidate);
            candidate = &candidate - &prev.scale(coeff);
        }
        let norm = candidate.norm_fro();
        if norm > tol::GRAM_SCHMIDT_DROP {
            basis.push(candidate.scale(Complex64::new(1.0 / norm, 0.0)));
        }
    }
    if basis.len() != dim {
        return Err(Error::BadDimension(
            "basis completion ran out of candidates".into(),
        ));
    }
    Ok(basis)
}

/// The local unitary mapping the completed basis of `psi0` onto the
/// completed basis of `psi0_target`, i.e. V·B† with B and V the
/// deterministic completions. Its first column action sends ψ(0) to ψ′(0).
pub fn completed_basis_map(
    psi0: &ComplexMatrix,
    psi0_target: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if psi0.rows() != psi0_target.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} vs {}",
            psi0.rows(),
            psi0_target.rows()
        )));
    }
    let b = ComplexMatrix::from_columns(&complete_orthonormal_basis(psi0)?)?;
    let v = ComplexMatrix::from_columns(&complete_orthonormal_basis(psi0_target)?)?;
    Ok(&v * &b.dagger())
}

/// Σ_τ |τ⟩⟨τ| ⊗ blocks[τ].
fn clock_block_diag(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n = blocks.len();
    let d = blocks[0].rows();
    ComplexMatrix::from_fn(n * d, n * d, |p, q| {
        let (tp, ip) = (p / d, p % d);
        let (tq, iq) = (q / d, q % d);
        if tp == tq {
            blocks[tp][(ip, iq)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Distance up to a global phase between unit vectors: 1 − |⟨a|b⟩|.
fn phase_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    1.0 - a.inner(b).norm()
}

/// A certified unitary equivalence between two systems: S intertwines the
/// laws (S·U = U′·S) and maps each certified source history onto its target
/// counterpart, temporal state by temporal state.
#[derive(Clone, Debug)]
pub struct Intertwiner {
    s: ComplexMatrix,
    source: PWSystem,
    target: PWSystem,
    source_histories: Vec<History>,
    target_histories: Vec<History>,
    law_residual: f64,
    history_residual: f64,
}

impl Intertwiner {
    fn certify(
        s: ComplexMatrix,
        source: PWSystem,
        target: PWSystem,
        source_histories: Vec<History>,
        target_histories: Vec<History>,
    ) -> Result<Self> {
        if source_histories.len() != target_histories.len() {
            return Err(Error::LengthMismatch(
                "history families of different sizes".into(),
            ));
        }
        let (law_residual, history_residual) = residuals(
            &s,
            &source,
            &target,
            &source_histories,
            &target_histories,
        )?;
        Ok(Intertwiner {
            s,
            source,
            target,
            source_histories,
            target_histories,
            law_residual,
            history_residual,
        })
    }

    pub fn s(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn source(&self) -> &PWSystem {
        &self.source
    }

    pub fn target(&self) -> &PWSystem {
        &self.target
    }

    pub fn law_residual(&self) -> f64 {
        self.law_residual
    }

    pub fn history_residual(&self) -> f64 {
        self.history_residual
    }

    /// Recomputes both residuals from scratch, independent of the stored
    /// values.
    pub fn verify(&self) -> Result<(f64, f64)> {
        residuals(
            &self.s,
            &self.source,
            &self.target,
            &self.source_histories,
            &self.target_histories,
        )
    }
}

fn residuals(
    s: &ComplexMatrix,
    source: &PWSystem,
    target: &PWSystem,
    source_histories: &[History],
    target_histories: &[History],
) -> Result<(f64, f64)> {
    let u_src = source.total_step()?;
    let u_tgt = target.total_step()?;
    let law = (&(s * &u_src) - &(&u_tgt * s)).norm_max();
    let n = source.n();
    let mut hist: f64 = 0.0;
    for (hs, ht) in source_histories.iter().zip(target_histories) {
        for tau in 0..n {
            let temporal_src = ComplexMatrix::basis_vector(n, tau).kron(hs.state(tau));
            let temporal_tgt = ComplexMatrix::basis_vector(n, tau).kron(ht.state(tau));
            hist = hist.max(phase_distance(&(s * &temporal_src), &temporal_tgt));
        }
    }
    Ok((law, hist))
}

/// Outcome of the arbitrary-history retargeting: a global unitary M with
/// M|Ψ⟩ = |Ψ′⟩⟩, and the basis η_{j,k} = M†(|τ_j⟩|k⟩) in which |Ψ⟩ carries
/// exactly the components ⟨k|ψ′(τ_j)⟩ of the target history.
#[derive(Clone, Debug)]
pub struct AiRetarget {
    pub m: ComplexMatrix,
    pub eta_basis: Vec<ComplexMatrix>,
    /// Largest deviation of ⟨η_{j,k}|Ψ⟩ from the target component.
    pub component_residual: f64,
}

/// Retargets a timeless state onto an arbitrary history: any history —
/// lawful, or a pure random walk — can be read out of the same state in a
/// suitable basis.
pub fn ai_retarget(source_psi: &TimelessState, target_history: &History) -> Result<AiRetarget> {
    if target_history.n() != source_psi.n() || target_history.dim_r() != source_psi.dim_r() {
        return Err(Error::DimensionMismatch(format!(
            "state of shape {}·{} against a history of shape {}·{}",
            source_psi.n(),
            source_psi.dim_r(),
            target_history.n(),
            target_history.dim_r()
        )));
    }
    let target_psi = assemble_timeless(target_history);
    let m = unit_vector_rotation(source_psi.vector(), target_psi.vector())?;
    let n = source_psi.n();
    let d = source_psi.dim_r();
    let m_dag = m.dagger();
    let mut eta_basis = Vec::with_capacity(n * d);
    let mut component_residual: f64 = 0.0;
    for j in 0..n {
        for k in 0..d {
            let eta = m_dag.column(j * d + k);
            let component = eta.inner(source_psi.vector());
            let want = target_psi.vector()[(j * d + k, 0)];
            component_residual = component_residual.max((component - want).norm());
            eta_basis.push(eta);
        }
    }
    Ok(AiRetarget {
        m,
        eta_basis,
        component_residual,
    })
}

/// The cyclic equivalence of two fixed-law systems with the same clock and
/// rest dimensions: bases |τ,k⟩ = |τ⟩ U_r^τ|e_k⟩ and |τ,k⟩′ built on the
/// given initial states (completed deterministically), and S defined by
/// S|τ,k⟩ = |τ,k⟩′. The conjugation chain S·U = U′·S holds by construction
/// and is re-verified numerically, as is the mapping of the two selected
/// histories.
pub fn build_intertwiner_finite(
    source: &PWSystem,
    psi0: &ComplexMatrix,
    target: &PWSystem,
    psi0_target: &ComplexMatrix,
) -> Result<Intertwiner> {
    if source.n() != target.n() || source.dim_r() != target.dim_r() {
        return Err(Error::IncompatibleDimensions(format!(
            "{}·{} vs {}·{}",
            source.n(),
            source.dim_r(),
            target.n(),
            target.dim_r()
        )));
    }
    let u_r = source.fixed_rest_step()?.clone();
    let u_rp = target.fixed_rest_step()?.clone();
    let basis_map = completed_basis_map(psi0, psi0_target)?;
    let n = source.n();
    let blocks: Vec<ComplexMatrix> = (0..n)
        .map(|tau| {
            let forward = u_rp.unitary_power(tau as i64);
            let backward = u_r.unitary_power(-(tau as i64));
            &(&forward * &basis_map) * &backward
        })
        .collect();
    let s = clock_block_diag(&blocks);
    let h_src = evolve_history(source, psi0)?;
    let h_tgt = evolve_history(target, psi0_target)?;
    Intertwiner::certify(s, source.clone(), target.clone(), vec![h_src], vec![h_tgt])
}

/// The clock-controlled trivializer W = Σ_τ |τ⟩⟨τ| ⊗ U_r^{−τ}: a
/// controlled-shift (for a qubit rest system, a controlled-not) conjugating
/// X_n ⊗ U_r into X_n ⊗ I, so the target system has the trivial rest law.
/// Cyclicity U_r^n = I makes the wrap-around column consistent. Every
/// lawful history maps to the constant history at its initial state; the
/// certificate records this for the full standard-basis family.
pub fn controlled_power_trivializer(sys: &PWSystem) -> Result<Intertwiner> {
    let u_r = sys.fixed_rest_step()?.clone();
    let n = sys.n();
    let d = sys.dim_r();
    let blocks: Vec<ComplexMatrix> = (0..n)
        .map(|tau| u_r.unitary_power(-(tau as i64)))
        .collect();
    let w = clock_block_diag(&blocks);
    let target = PWSystem::new(*sys.clock(), d, RestLaw::Fixed(ComplexMatrix::identity(d)))?;
    let mut source_histories = Vec::with_capacity(d);
    let mut target_histories = Vec::with_capacity(d);
    for k in 0..d {
        let e_k = ComplexMatrix::basis_vector(d, k);
        source_histories.push(evolve_history(sys, &e_k)?);
        target_histories.push(evolve_history(&target, &e_k)?);
    }
    Intertwiner::certify(w, sys.clone(), target, source_histories, target_histories)
}

fn validate_history(sys: &PWSystem, h: &History) -> Result<()> {
    if h.n() != sys.n() || h.dim_r() != sys.dim_r() {
        return Err(Error::InvalidHistory(format!(
            "history of shape {}·{} for a system of shape {}·{}",
            h.n(),
            h.dim_r(),
            sys.n(),
            sys.dim_r()
        )));
    }
    let u_r = sys
        .fixed_rest_step()
        .map_err(|_| Error::InvalidHistory("system has no fixed law".into()))?;
    for tau in 0..h.n() {
        let next = (tau + 1) % h.n();
        let stepped = u_r * h.state(tau);
        let dev = stepped.max_abs_diff(h.state(next));
        if dev > tol::INTERTWINER {
            return Err(Error::InvalidHistory(format!(
                "state at tick {next} deviates from the law by {dev:.3e}"
            )));
        }
    }
    Ok(())
}

/// An intertwiner between two histories of the same law:
/// S = Σ_τ |τ⟩⟨τ| ⊗ U_r^τ S₀ U_r^{−τ} with S₀ mapping ψ(0) to ψ′(0).
/// S commutes with the total evolution and carries the first history onto
/// the second, so any two histories following the same law are equivalent.
pub fn history_intertwiner_same_law(
    sys: &PWSystem,
    h1: &History,
    h2: &History,
) -> Result<Intertwiner> {
    validate_history(sys, h1)?;
    validate_history(sys, h2)?;
    let u_r = sys.fixed_rest_step()?.clone();
    let s0 = unit_vector_rotation(h1.state(0), h2.state(0))?;
    let n = sys.n();
    let blocks: Vec<ComplexMatrix> = (0..n)
        .map(|tau| {
            let forward = u_r.unitary_power(tau as i64);
            let backward = u_r.unitary_power(-(tau as i64));
            &(&forward * &s0) * &backward
        })
        .collect();
    let s = clock_block_diag(&blocks);
    Intertwiner::certify(
        s,
        sys.clone(),
        sys.clone(),
        vec![h1.clone()],
        vec![h2.clone()],
    )
}

/// The windowed construction for τ-dependent laws, reported with the
/// boundary column separated from the interior.
#[derive(Clone, Debug)]
pub struct WindowedIntertwiner {
    s: ComplexMatrix,
    window: usize,
    dim_r: usize,
    /// Max-norm of (S·U − U′·S) restricted to columns with clock index
    /// 0..window−2.
    interior_residual: f64,
    /// Same restricted to the wrap column at clock index window−1, which
    /// the finite window cannot constrain.
    boundary_residual: f64,
    /// Phase distance of the mapped ψ0-history across the window.
    history_residual: f64,
}

impl WindowedIntertwiner {
    pub fn s(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn dim_r(&self) -> usize {
        self.dim_r
    }

    pub fn interior_residual(&self) -> f64 {
        self.interior_residual
    }

    pub fn boundary_residual(&self) -> f64 {
        self.boundary_residual
    }

    pub fn history_residual(&self) -> f64 {
        self.history_residual
    }
}

/// Total one-step operator of a windowed τ-dependent law, closed with an
/// identity wrap so it stays unitary; the wrap column is exactly what the
/// boundary residual excludes.
fn windowed_total(steps: &[ComplexMatrix], window: usize, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(window * d, window * d, |p, q| {
        let (tp, ip) = (p / d, p % d);
        let (tq, iq) = (q / d, q % d);
        if tq + 1 == window {
            // wrap column
            if tp == 0 && ip == iq {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else if tp == tq + 1 {
            steps[tq][(ip, iq)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn max_abs_over_columns(m: &ComplexMatrix, c0: usize, c1: usize) -> f64 {
    let mut out: f64 = 0.0;
    for i in 0..m.rows() {
        for j in c0..c1 {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

/// The wandering-subspace construction on a finite window: with
/// |τ,k⟩ = |τ⟩ U(τ,0)|e_k⟩ built from τ-dependent steps on both sides, S is
/// defined exactly as in the cyclic case but without cyclicity. The
/// intertwining identity is verified on the interior clock indices
/// 0..window−2; the boundary column is reported separately instead of
/// imposing periodicity.
pub fn windowed_shift_intertwiner(
    source_steps: &[ComplexMatrix],
    target_steps: &[ComplexMatrix],
    window: usize,
    psi0: &ComplexMatrix,
    psi0_target: &ComplexMatrix,
) -> Result<WindowedIntertwiner> {
    if window < 2 {
        return Err(Error::BadDimension("window must cover at least two ticks".into()));
    }
    if source_steps.len() != window - 1 || target_steps.len() != window - 1 {
        return Err(Error::LengthMismatch(format!(
            "{} source and {} target steps for a window of {window} (need {})",
            source_steps.len(),
            target_steps.len(),
            window - 1
        )));
    }
    let d = psi0.rows();
    for step in source_steps.iter().chain(target_steps) {
        if step.rows() != d || step.cols() != d {
            return Err(Error::IncompatibleDimensions(format!(
                "step is {}x{}, rest dimension is {d}",
                step.rows(),
                step.cols()
            )));
        }
        step.check_unitary(tol::UNITARY_GATE)?;
    }
    let basis_map = completed_basis_map(psi0, psi0_target)?;

    // Cumulative propagators U(τ,0) on both sides.
    let mut prop_src = vec![ComplexMatrix::identity(d)];
    let mut prop_tgt = vec![ComplexMatrix::identity(d)];
    for tau in 0..window - 1 {
        prop_src.push(&source_steps[tau] * &prop_src[tau]);
        prop_tgt.push(&target_steps[tau] * &prop_tgt[tau]);
    }
    let blocks: Vec<ComplexMatrix> = (0..window)
        .map(|tau| &(&prop_tgt[tau] * &basis_map) * &prop_src[tau].dagger())
        .collect();
    let s = clock_block_diag(&blocks);

    let u_src = windowed_total(source_steps, window, d);
    let u_tgt = windowed_total(target_steps, window, d);
    let defect = &(&s * &u_src) - &(&u_tgt * &s);
    let interior_residual = max_abs_over_columns(&defect, 0, (window - 1) * d);
    let boundary_residual = max_abs_over_columns(&defect, (window - 1) * d, window * d);

    let mut history_residual: f64 = 0.0;
    for tau in 0..window {
        let src = ComplexMatrix::basis_vector(window, tau).kron(&(&prop_src[tau] * psi0));
        let tgt = ComplexMatrix::basis_vector(window, tau).kron(&(&prop_tgt[tau] * psi0_target));
        history_residual = history_residual.max(phase_distance(&(&s * &src), &tgt));
    }

    Ok(WindowedIntertwiner {
        s,
        window,
        dim_r: d,
        interior_residual,
        boundary_residual,
        history_residual,
    })
}

/// Per-trial spectra demonstrating spectral washing: the total spectrum
/// σ(X_n ⊗ U_r) is the n-th roots of unity with multiplicity d for every
/// cyclic U_r, while the rest spectra σ(U_r) vary from trial to trial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralWashingReport {
    pub n: usize,
    pub dim_r: usize,
    pub trials: usize,
    pub seed: u64,
    /// The washed spectrum every trial must reproduce.
    pub expected_total: SpectrumMultiset,
    /// Per-trial agreement of σ(X_n ⊗ U_r) with the expected multiset.
    pub trial_matches: Vec<bool>,
    /// Per-trial rest spectra σ(U_r), exhibiting the variation the total
    /// spectrum erases.
    pub rest_spectra: Vec<SpectrumMultiset>,
    /// Whether at least one pair of trials had different rest spectra.
    pub rest_spectra_differ: bool,
    pub pass: bool,
}

pub fn spectral_washing_report(
    n: usize,
    dim_r: usize,
    trials: usize,
    seed: u64,
) -> Result<SpectralWashingReport> {
    if trials == 0 {
        return Err(Error::BadDimension("at least one trial".into()));
    }
    let clock = DiscreteClock::new(n)?;
    let roots = clock.root_of_unity_spectrum();
    let expected_values: Vec<Complex64> = roots
        .iter()
        .flat_map(|z| std::iter::repeat_n(*z, dim_r))
        .collect();
    let expected_total = SpectrumMultiset::from_eigenvalues(&expected_values, tol::EIG_CLUSTER);

    let shift = clock.shift_op();
    let mut trial_matches = Vec::with_capacity(trials);
    let mut rest_spectra = Vec::with_capacity(trials);
    for trial in 0..trials {
        let u_r = sample_cyclic_unitary(n, dim_r, seed.wrapping_add(trial as u64));
        let total = shift.kron(&u_r);
        let sigma_total = spectrum_unitary(&total)?;
        trial_matches.push(spectra_equal(&sigma_total, &expected_total, tol::UNIT_CIRCLE));
        rest_spectra.push(spectrum_unitary(&u_r)?);
    }
    let mut rest_spectra_differ = false;
    'outer: for i in 0..rest_spectra.len() {
        for j in (i + 1)..rest_spectra.len() {
            if !spectra_equal(&rest_spectra[i], &rest_spectra[j], tol::UNIT_CIRCLE) {
                rest_spectra_differ = true;
                break 'outer;
            }
        }
    }
    let pass = trial_matches.iter().all(|&m| m);
    Ok(SpectralWashingReport {
        n,
        dim_r,
        trials,
        seed,
        expected_total,
        trial_matches,
        rest_spectra,
        rest_spectra_differ,
        pass,
    })
}

/// A recorder ⊗ environment split of the rest system, with a labeling that
/// says which environment value each record value names.
#[derive(Clone, Debug)]
pub struct RecordsScenario {
    clock: DiscreteClock,
    record_dim: usize,
    env_dim: usize,
    labeling: Vec<usize>,
}

impl RecordsScenario {
    pub fn new(
        clock: DiscreteClock,
        record_dim: usize,
        env_dim: usize,
        labeling: Vec<usize>,
    ) -> Result<Self> {
        if record_dim != env_dim {
            return Err(Error::IncompatibleDimensions(format!(
                "each record value must name one environment value: {record_dim} vs {env_dim}"
            )));
        }
        if labeling.len() != record_dim {
            return Err(Error::LengthMismatch(format!(
                "labeling of {} entries for {record_dim} record values",
                labeling.len()
            )));
        }
        let mut seen = vec![false; env_dim];
        for &l in &labeling {
            if l >= env_dim || seen[l] {
                return Err(Error::IndexOutOfRange(format!(
                    "labeling is not a bijection onto 0..{env_dim}"
                )));
            }
            seen[l] = true;
        }
        Ok(RecordsScenario {
            clock,
            record_dim,
            env_dim,
            labeling,
        })
    }

    pub fn with_identity_labeling(clock: DiscreteClock, dim: usize) -> Result<Self> {
        Self::new(clock, dim, dim, (0..dim).collect())
    }

    pub fn record_dim(&self) -> usize {
        self.record_dim
    }

    pub fn env_dim(&self) -> usize {
        self.env_dim
    }
}

/// Outcome of the record-decorrelation experiment.
#[derive(Clone, Debug)]
pub struct RecordsReport {
    /// Probability that the environment carries the value the record names,
    /// decoded in the reference split.
    pub validity_before: f64,
    /// The same quantity, decoded from the same global state in the split
    /// pulled back through the retargeting intertwiner.
    pub validity_after: f64,
    /// The intertwiner, acting as the identity on the recorder factor.
    pub intertwiner: Intertwiner,
    /// Deviation of the rest block of S from I_recorder ⊗ R.
    pub recorder_block_residual: f64,
    /// The environment value the retargeted split decodes.
    pub retargeted_env_value: usize,
}

fn env_validity(
    rest_state: &ComplexMatrix,
    record_dim: usize,
    env_dim: usize,
    env_index: usize,
) -> Result<f64> {
    let rho_env = rest_state
        .projector()
        .partial_trace(record_dim, env_dim, Keep::Rest)?;
    Ok(rho_env[(env_index, env_index)].re)
}

/// Builds the constant record/environment history, decodes the record's
/// validity in the reference split, then retargets the environment to a
/// different value with an intertwiner that leaves the recorder factor
/// untouched, pulls the split back through it, and decodes the validity of
/// the same record from the same global state again.
///
/// A perfectly valid record in one split is perfectly invalid in the other,
/// even though both splits are legitimate relational readings of the state:
/// the record is uncorrelated with the environment it describes unless the
/// split is fixed by the observables' meanings.
pub fn records_experiment(
    scenario: &RecordsScenario,
    record_value: usize,
    true_env_value: usize,
) -> Result<RecordsReport> {
    if record_value >= scenario.record_dim {
        return Err(Error::IndexOutOfRange(format!(
            "record value {record_value} of {}",
            scenario.record_dim
        )));
    }
    if true_env_value >= scenario.env_dim {
        return Err(Error::IndexOutOfRange(format!(
            "environment value {true_env_value} of {}",
            scenario.env_dim
        )));
    }
    if scenario.env_dim < 2 {
        return Err(Error::IndexOutOfRange(
            "retargeting needs at least two environment values".into(),
        ));
    }
    let d_m = scenario.record_dim;
    let d_e = scenario.env_dim;
    let d_r = d_m * d_e;
    let n = scenario.clock.n();
    let sys = PWSystem::new(
        scenario.clock,
        d_r,
        RestLaw::Fixed(ComplexMatrix::identity(d_r)),
    )?;

    let record_state = ComplexMatrix::basis_vector(d_m, record_value);
    let env_state = ComplexMatrix::basis_vector(d_e, true_env_value);
    let rest0 = record_state.kron(&env_state);
    let h1 = evolve_history(&sys, &rest0)?;
    let psi = assemble_timeless(&h1);

    let named_env = scenario.labeling[record_value];
    let validity_before = env_validity(&psi.relative_state(0)?, d_m, d_e, named_env)?;

    // Retarget the environment to a different value, recorder untouched.
    let retargeted_env_value = (true_env_value + 1) % d_e;
    let env_rotation = unit_vector_rotation(
        &env_state,
        &ComplexMatrix::basis_vector(d_e, retargeted_env_value),
    )?;
    let s0 = ComplexMatrix::identity(d_m).kron(&env_rotation);
    let s = ComplexMatrix::identity(n).kron(&s0);
    let rest1 = record_state.kron(&ComplexMatrix::basis_vector(d_e, retargeted_env_value));
    let h2 = evolve_history(&sys, &rest1)?;
    let intertwiner = Intertwiner::certify(
        s.clone(),
        sys.clone(),
        sys.clone(),
        vec![h1],
        vec![h2],
    )?;

    // The rest block must have the form I_m ⊗ R: no recorder mixing, and
    // the same environment action for every recorder value.
    let mut recorder_block_residual: f64 = 0.0;
    for a in 0..d_m {
        for b in 0..d_m {
            for v in 0..d_e {
                for w in 0..d_e {
                    let got = s0[(a * d_e + v, b * d_e + w)];
                    let want = if a == b {
                        s0[(v, w)]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    recorder_block_residual = recorder_block_residual.max((got - want).norm());
                }
            }
        }
    }

    // Decode the same global state in the pulled-back split.
    let pulled = pullback_tps(&Tps::identity(n, d_r), &s)?;
    let amps = &pulled.iso().dagger() * psi.vector();
    let after_state = TimelessState::new(n, d_r, amps)?;
    let validity_after = env_validity(&after_state.relative_state(0)?, d_m, d_e, named_env)?;

    Ok(RecordsReport {
        validity_before,
        validity_after,
        intertwiner,
        recorder_block_residual,
        retargeted_env_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pw::{sample_unit_vector, seeded_rng};

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

    fn ket(dim: usize, k: usize) -> ComplexMatrix {
        ComplexMatrix::basis_vector(dim, k)
    }

    fn system(n: usize, u_r: ComplexMatrix) -> PWSystem {
        let d = u_r.rows();
        PWSystem::new(DiscreteClock::new(n).unwrap(), d, RestLaw::Fixed(u_r)).unwrap()
    }

    fn two_qubit_system() -> PWSystem {
        system(2, sigma_x())
    }

    fn seeded_cyclic_system(n: usize, d: usize, seed: u64) -> PWSystem {
        system(n, sample_cyclic_unitary(n, d, seed))
    }

    #[test]
    fn rotation_maps_vectors_exactly() {
        let mut rng = seeded_rng(3);
        for dim in [1usize, 2, 5] {
            let a = crate::pw::haar_unit_vector(dim, &mut rng);
            let b = crate::pw::haar_unit_vector(dim, &mut rng);
            let m = unit_vector_rotation(&a, &b).unwrap();
            assert!(m.check_unitary(1e-12).is_ok());
            assert!((&m * &a).max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn rotation_of_a_vector_to_itself_is_identity() {
        let a = sample_unit_vector(4, 17);
        let m = unit_vector_rotation(&a, &a).unwrap();
        assert!(m.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn rotation_handles_orthogonal_and_phased_pairs() {
        let a = ket(3, 0);
        let b = ket(3, 2);
        let m = unit_vector_rotation(&a, &b).unwrap();
        assert!((&m * &a).max_abs_diff(&b) < 1e-14);

        let phased = a.scale(Complex64::from_polar(1.0, 1.1));
        let m = unit_vector_rotation(&a, &phased).unwrap();
        assert!((&m * &a).max_abs_diff(&phased) < 1e-14);
    }

    #[test]
    fn basis_completion_is_deterministic_and_orthonormal() {
        let first = sample_unit_vector(4, 23);
        let basis = complete_orthonormal_basis(&first).unwrap();
        assert_eq!(basis.len(), 4);
        assert!(basis[0].max_abs_diff(&first) < 1e-15);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((basis[i].inner(&basis[j]).norm() - want).abs() < 1e-12);
            }
        }
        let again = complete_orthonormal_basis(&first).unwrap();
        for (u, v) in basis.iter().zip(&again) {
            assert_eq!(u.entries(), v.entries());
        }
    }

    #[test]
    fn ai_retarget_onto_own_history_is_trivial() {
        let sys = two_qubit_system();
        let h = evolve_history(&sys, &ket(2, 1)).unwrap();
        let psi = assemble_timeless(&h);
        let out = ai_retarget(&psi, &h).unwrap();
        assert!(out.m.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
        assert!(out.component_residual < 1e-12);
        for (idx, eta) in out.eta_basis.iter().enumerate() {
            assert!(eta.max_abs_diff(&ket(4, idx)) < 1e-12);
        }
    }

    #[test]
    fn ai_retarget_onto_constant_history_reads_the_primed_components() {
        let sys = two_qubit_system();
        let psi = assemble_timeless(&evolve_history(&sys, &ket(2, 1)).unwrap());
        let constant = History::from_states(2, vec![ket(2, 1), ket(2, 1)]).unwrap();
        let out = ai_retarget(&psi, &constant).unwrap();
        assert!(out.component_residual < 1e-12);
        let s = 1.0 / 2.0_f64.sqrt();
        let want = [0.0, s, 0.0, s];
        for (eta, w) in out.eta_basis.iter().zip(want) {
            let comp = eta.inner(psi.vector());
            assert!((comp - Complex64::new(w, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ai_retarget_handles_random_walk_targets() {
        let sys = seeded_cyclic_system(3, 2, 40);
        let psi = assemble_timeless(&evolve_history(&sys, &sample_unit_vector(2, 41)).unwrap());
        // A random walk: arbitrary unitary steps, no cyclicity.
        let mut rng = seeded_rng(42);
        let mut states = vec![crate::pw::haar_unit_vector(2, &mut rng)];
        for tau in 0..2 {
            let step = crate::pw::haar_unitary(2, &mut rng);
            states.push(&step * &states[tau]);
        }
        let walk = History::from_states(2, states).unwrap();
        let out = ai_retarget(&psi, &walk).unwrap();
        assert!(out.component_residual < 1e-10);
    }

    #[test]
    fn two_qubit_intertwiner_is_the_controlled_not() {
        let source = two_qubit_system();
        let target = system(2, ComplexMatrix::identity(2));
        let it =
            build_intertwiner_finite(&source, &ket(2, 1), &target, &ket(2, 1)).unwrap();
        assert!(it.s().max_abs_diff(&controlled_not()) < 1e-12);
        assert!(it.law_residual() < 1e-12);
        assert!(it.history_residual() < 1e-12);
        // Conjugation identity S(σx⊗σx)S⁻¹ = σx⊗I.
        let u = sigma_x().kron(&sigma_x());
        let conj = &(it.s() * &u) * &it.s().dagger();
        let want = sigma_x().kron(&ComplexMatrix::identity(2));
        assert!(conj.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn intertwiner_of_a_system_with_itself_is_identity() {
        let sys = seeded_cyclic_system(3, 2, 50);
        let psi0 = sample_unit_vector(2, 51);
        let it = build_intertwiner_finite(&sys, &psi0, &sys, &psi0).unwrap();
        assert!(it.s().max_abs_diff(&ComplexMatrix::identity(6)) < 1e-12);
    }

    #[test]
    fn seeded_intertwiner_residuals_are_tiny() {
        let source = seeded_cyclic_system(4, 3, 60);
        let target = seeded_cyclic_system(4, 3, 61);
        let it = build_intertwiner_finite(
            &source,
            &sample_unit_vector(3, 62),
            &target,
            &sample_unit_vector(3, 63),
        )
        .unwrap();
        assert!(it.law_residual() < 1e-10, "law {}", it.law_residual());
        assert!(it.history_residual() < 1e-10);
        assert!(it.s().check_unitary(1e-10).is_ok());
        let (law, hist) = it.verify().unwrap();
        assert!(law < 1e-10 && hist < 1e-10);
    }

    #[test]
    fn intertwiner_rejects_mismatched_systems() {
        let a = seeded_cyclic_system(2, 2, 1);
        let b = seeded_cyclic_system(3, 2, 2);
        assert!(matches!(
            build_intertwiner_finite(&a, &ket(2, 0), &b, &ket(2, 0)),
            Err(Error::IncompatibleDimensions(_))
        ));
    }

    #[test]
    fn trivializer_of_the_two_qubit_example_is_the_controlled_not() {
        let it = controlled_power_trivializer(&two_qubit_system()).unwrap();
        assert!(it.s().max_abs_diff(&controlled_not()) < 1e-12);
        let u = sigma_x().kron(&sigma_x());
        let conj = &(it.s() * &u) * &it.s().dagger();
        assert!(conj.max_abs_diff(&sigma_x().kron(&ComplexMatrix::identity(2))) < 1e-12);
    }

    #[test]
    fn trivializer_of_trivial_law_is_identity() {
        let sys = system(3, ComplexMatrix::identity(2));
        let it = controlled_power_trivializer(&sys).unwrap();
        assert!(it.s().max_abs_diff(&ComplexMatrix::identity(6)) < 1e-12);
    }

    #[test]
    fn trivializer_conjugates_to_a_bare_shift() {
        let sys = seeded_cyclic_system(6, 2, 70);
        let it = controlled_power_trivializer(&sys).unwrap();
        let u = sys.total_step().unwrap();
        let conj = &(it.s() * &u) * &it.s().dagger();
        let want = DiscreteClock::new(6)
            .unwrap()
            .shift_op()
            .kron(&ComplexMatrix::identity(2));
        assert!(conj.max_abs_diff(&want) < 1e-10);
        assert!(it.law_residual() < 1e-10);
        assert!(it.history_residual() < 1e-10);
    }

    #[test]
    fn same_history_intertwiner_is_identity() {
        let sys = seeded_cyclic_system(3, 3, 80);
        let h = evolve_history(&sys, &sample_unit_vector(3, 81)).unwrap();
        let it = history_intertwiner_same_law(&sys, &h, &h).unwrap();
        assert!(it.s().max_abs_diff(&ComplexMatrix::identity(9)) < 1e-12);
    }

    #[test]
    fn two_qubit_histories_are_connected_by_a_commuting_unitary() {
        let sys = two_qubit_system();
        let h1 = evolve_history(&sys, &ket(2, 1)).unwrap();
        let h2 = evolve_history(&sys, &ket(2, 0)).unwrap();
        let it = history_intertwiner_same_law(&sys, &h1, &h2).unwrap();
        let u = sys.total_step().unwrap();
        let commutator = &(it.s() * &u) - &(&u * it.s());
        assert!(commutator.norm_max() < 1e-12);
        assert!(it.history_residual() < 1e-12);
    }

    #[test]
    fn seeded_history_intertwiner_residuals_are_tiny() {
        let sys = seeded_cyclic_system(3, 3, 90);
        let h1 = evolve_history(&sys, &sample_unit_vector(3, 91)).unwrap();
        let h2 = evolve_history(&sys, &sample_unit_vector(3, 92)).unwrap();
        let it = history_intertwiner_same_law(&sys, &h1, &h2).unwrap();
        assert!(it.law_residual() < 1e-10);
        assert!(it.history_residual() < 1e-10);
    }

    #[test]
    fn invalid_histories_are_rejected() {
        let sys = two_qubit_system();
        let lawless =
            History::from_states(2, vec![ket(2, 0), ket(2, 0)]).unwrap();
        assert!(matches!(
            history_intertwiner_same_law(&sys, &lawless, &lawless),
            Err(Error::InvalidHistory(_))
        ));
    }

    #[test]
    fn windowed_with_identity_steps_is_a_pure_relabeling() {
        let steps = vec![ComplexMatrix::identity(2); 3];
        let psi0 = sample_unit_vector(2, 100);
        let psi0t = sample_unit_vector(2, 101);
        let out = windowed_shift_intertwiner(&steps, &steps, 4, &psi0, &psi0t).unwrap();
        assert!(out.interior_residual() < 1e-12);
        // Identity steps make every block equal, so even the wrap column holds.
        assert!(out.boundary_residual() < 1e-12);
        assert!(out.history_residual() < 1e-12);
    }

    #[test]
    fn windowed_matches_the_cyclic_construction_on_cyclic_input() {
        let n = 4;
        let u_r = sample_cyclic_unitary(n, 2, 110);
        let psi0 = sample_unit_vector(2, 111);
        let psi0t = sample_unit_vector(2, 112);
        let steps = vec![u_r.clone(); n - 1];
        let windowed = windowed_shift_intertwiner(&steps, &steps, n, &psi0, &psi0t).unwrap();
        let sys = system(n, u_r);
        let finite = build_intertwiner_finite(&sys, &psi0, &sys, &psi0t).unwrap();
        assert!(windowed.s().max_abs_diff(finite.s()) < 1e-12);
    }

    #[test]
    fn windowed_interior_residual_is_tiny_for_random_laws() {
        let mut rng = seeded_rng(120);
        let window = 8;
        let d = 2;
        let source: Vec<ComplexMatrix> =
            (0..window - 1).map(|_| crate::pw::haar_unitary(d, &mut rng)).collect();
        let target: Vec<ComplexMatrix> =
            (0..window - 1).map(|_| crate::pw::haar_unitary(d, &mut rng)).collect();
        let out = windowed_shift_intertwiner(
            &source,
            &target,
            window,
            &sample_unit_vector(d, 121),
            &sample_unit_vector(d, 122),
        )
        .unwrap();
        assert!(out.interior_residual() < 1e-10, "{}", out.interior_residual());
        assert!(out.history_residual() < 1e-10);
        // The wrap column is unconstrained for generic laws.
        assert!(out.boundary_residual() > 1e-3);
    }

    #[test]
    fn windowed_rejects_wrong_step_counts() {
        let steps = vec![ComplexMatrix::identity(2); 3];
        let short = vec![ComplexMatrix::identity(2); 2];
        let psi0 = ket(2, 0);
        assert!(matches!(
            windowed_shift_intertwiner(&steps, &short, 4, &psi0, &psi0),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn washing_on_the_two_qubit_example_spectra() {
        let su = spectrum_unitary(&sigma_x().kron(&sigma_x())).unwrap();
        let sup = spectrum_unitary(&sigma_x().kron(&ComplexMatrix::identity(2))).unwrap();
        assert!(spectra_equal(&su, &sup, 1e-10));
    }

    #[test]
    fn washing_with_scalar_rest_gives_bare_roots_of_unity() {
        let report = spectral_washing_report(5, 1, 3, 0).unwrap();
        assert!(report.pass);
        assert_eq!(report.expected_total.dimension(), 5);
    }

    #[test]
    fn washing_report_matches_while_rest_spectra_vary() {
        let report = spectral_washing_report(4, 3, 20, 7).unwrap();
        assert!(report.pass);
        assert!(report.trial_matches.iter().all(|&m| m));
        assert!(report.rest_spectra_differ);
    }

    #[test]
    fn records_decorrelate_under_retargeting() {
        let scenario =
            RecordsScenario::with_identity_labeling(DiscreteClock::new(3).unwrap(), 2).unwrap();
        let report = records_experiment(&scenario, 0, 0).unwrap();
        assert!((report.validity_before - 1.0).abs() < 1e-12);
        assert!(report.validity_after.abs() < 1e-12);
        assert!(report.recorder_block_residual < 1e-12);
        assert!(report.intertwiner.law_residual() < 1e-12);
        assert!(report.intertwiner.history_residual() < 1e-12);
    }

    #[test]
    fn mismatched_record_is_invalid_from_the_start() {
        let scenario =
            RecordsScenario::with_identity_labeling(DiscreteClock::new(2).unwrap(), 2).unwrap();
        let report = records_experiment(&scenario, 0, 1).unwrap();
        assert!(report.validity_before.abs() < 1e-12);
    }

    #[test]
    fn records_reject_out_of_range_values() {
        let scenario =
            RecordsScenario::with_identity_labeling(DiscreteClock::new(2).unwrap(), 2).unwrap();
        assert!(matches!(
            records_experiment(&scenario, 5, 0),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(matches!(
            RecordsScenario::new(DiscreteClock::new(2).unwrap(), 2, 2, vec![0, 0]),
            Err(Error::IndexOutOfRange(_))
        ));
        assert!(matches!(
            RecordsScenario::new(DiscreteClock::new(2).unwrap(), 2, 3, vec![0, 1]),
            Err(Error::IncompatibleDimensions(_))
        ));
    }
}
