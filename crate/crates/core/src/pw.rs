//! Clock ⊗ rest systems with discrete time: histories, timeless states,
//! relative states, and conditional expectations.
//!
//! An ideal discrete system pairs a cyclic clock of n ticks with a rest
//! system of dimension d evolving one step per tick. A history is the
//! sequence of rest states |ψ(τ)⟩; its entangled assembly
//! |Ψ⟩⟩ = (1/√n) Σ_τ |τ⟩|ψ(τ)⟩ is stationary under the total step
//! U = X_n ⊗ U_r, the discrete constraint U|Ψ⟩⟩ = |Ψ⟩⟩. Stationarity at
//! finite n forces the rest law to be cyclic, U_r^n = I.
//!
//! Timeless states here are normalized with the 1/√n prefactor, and
//! relative states are defined up to a global phase; comparisons use
//! |⟨a|b⟩| rather than entrywise equality.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clock::DiscreteClock;
use crate::error::{Error, Result};
use crate::linalg::{qr_unitary_factor, Complex64, ComplexMatrix};
use crate::tol;

/// One-step rest evolution law.
///
/// `Fixed` is a single cyclic unitary applied every tick. `Sequence` is a
/// τ-dependent list of step unitaries, `steps[τ]` mapping the state at τ to
/// the state at τ+1; a list of w−1 steps covers a window of w ticks.
/// Sequence laws carry no cyclicity requirement and never build timeless
/// states; they exist for the windowed constructions.
#[derive(Clone, Debug)]
pub enum RestLaw {
    Fixed(ComplexMatrix),
    Sequence(Vec<ComplexMatrix>),
}

/// An ideal discrete clock ⊗ rest system.
#[derive(Clone, Debug)]
pub struct PWSystem {
    clock: DiscreteClock,
    dim_r: usize,
    law: RestLaw,
}

impl PWSystem {
    /// Validates the law against the clock: fixed laws must be unitary and
    /// cyclic (U_r^n = I), sequence laws must supply one unitary step per
    /// tick transition.
    pub fn new(clock: DiscreteClock, dim_r: usize, law: RestLaw) -> Result<Self> {
        if dim_r == 0 {
            return Err(Error::BadDimension("rest dimension must be positive".into()));
        }
        let n = clock.n();
        match &law {
            RestLaw::Fixed(u) => {
                if u.rows() != dim_r || u.cols() != dim_r {
                    return Err(Error::BadDimension(format!(
                        "fixed law is {}x{}, rest dimension is {dim_r}",
                        u.rows(),
                        u.cols()
                    )));
                }
                u.check_unitary(tol::UNITARY_GATE)?;
                let dev = u
                    .unitary_power(n as i64)
                    .max_abs_diff(&ComplexMatrix::identity(dim_r));
                if dev > tol::UNITARY_GATE {
                    return Err(Error::NotCyclic(format!(
                        "U_r^{n} deviates from the identity by {dev:.3e}"
                    )));
                }
            }
            RestLaw::Sequence(steps) => {
                if steps.len() + 1 != n {
                    return Err(Error::LengthMismatch(format!(
                        "{} steps for a window of {n} ticks (need {})",
                        steps.len(),
                        n - 1
                    )));
                }
                for (tau, step) in steps.iter().enumerate() {
                    if step.rows() != dim_r || step.cols() != dim_r {
                        return Err(Error::BadDimension(format!(
                            "step {tau} is {}x{}, rest dimension is {dim_r}",
                            step.rows(),
                            step.cols()
                        )));
                    }
                    step.check_unitary(tol::UNITARY_GATE)?;
                }
            }
        }
        Ok(PWSystem { clock, dim_r, law })
    }

    pub fn clock(&self) -> &DiscreteClock {
        &self.clock
    }

    pub fn n(&self) -> usize {
        self.clock.n()
    }

    pub fn dim_r(&self) -> usize {
        self.dim_r
    }

    pub fn law(&self) -> &RestLaw {
        &self.law
    }

    /// Total dimension n·d of the joint space.
    pub fn dim_total(&self) -> usize {
        self.n() * self.dim_r
    }

    /// The fixed one-step rest unitary; sequence laws have none.
    pub fn fixed_rest_step(&self) -> Result<&ComplexMatrix> {
        match &self.law {
            RestLaw::Fixed(u) => Ok(u),
            RestLaw::Sequence(_) => Err(Error::NotCyclic(
                "τ-dependent law has no fixed one-step unitary".into(),
            )),
        }
    }

    /// Propagator from tick 0 to tick `tau`: U_r^τ, or the ordered product
    /// of sequence steps.
    pub fn rest_propagator(&self, tau: usize) -> ComplexMatrix {
        match &self.law {
            RestLaw::Fixed(u) => u.unitary_power(tau as i64),
            RestLaw::Sequence(steps) => {
                let mut acc = ComplexMatrix::identity(self.dim_r);
                for step in steps.iter().take(tau) {
                    acc = step * &acc;
                }
                acc
            }
        }
    }

    /// Total one-step evolution U = X_n ⊗ U_r (fixed laws only).
    pub fn total_step(&self) -> Result<ComplexMatrix> {
        let u_r = self.fixed_rest_step()?;
        Ok(self.clock.shift_op().kron(u_r))
    }
}

/// The sequence of rest states |ψ(τ)⟩ for τ = 0..n−1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HistoryJson", into = "HistoryJson")]
pub struct History {
    dim_r: usize,
    states: Vec<ComplexMatrix>,
}

/// Wire format: `{"n":…,"dim_r":…,"states":[[[re,im],…],…]}`.
#[derive(Serialize, Deserialize)]
struct HistoryJson {
    n: usize,
    dim_r: usize,
    states: Vec<Vec<[f64; 2]>>,
}

impl From<History> for HistoryJson {
    fn from(h: History) -> Self {
        HistoryJson {
            n: h.states.len(),
            dim_r: h.dim_r,
            states: h
                .states
                .iter()
                .map(|s| s.entries().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<HistoryJson> for History {
    type Error = Error;

    fn try_from(j: HistoryJson) -> Result<Self> {
        if j.states.len() != j.n {
            return Err(Error::LengthMismatch(format!(
                "{} states for n={}",
                j.states.len(),
                j.n
            )));
        }
        let states = j
            .states
            .iter()
            .map(|s| {
                ComplexMatrix::new(
                    j.dim_r,
                    1,
                    s.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        History::from_states(j.dim_r, states)
    }
}

impl History {
    /// Builds a history from explicit unit states; no law is imposed, so
    /// arbitrary (even random) histories are representable.
    pub fn from_states(dim_r: usize, states: Vec<ComplexMatrix>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::BadDimension("history needs at least one state".into()));
        }
        for s in &states {
            if s.rows() != dim_r || !s.is_column() {
                return Err(Error::BadDimension(format!(
                    "state is {}x{}, rest dimension is {dim_r}",
                    s.rows(),
                    s.cols()
                )));
            }
            s.check_unit_column()?;
        }
        Ok(History { dim_r, states })
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn dim_r(&self) -> usize {
        self.dim_r
    }

    pub fn state(&self, tau: usize) -> &ComplexMatrix {
        &self.states[tau]
    }

    pub fn states(&self) -> &[ComplexMatrix] {
        &self.states
    }
}

/// A stationary global state |Ψ⟩⟩ on the joint space, stored normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct TimelessState {
    n: usize,
    dim_r: usize,
    vector: ComplexMatrix,
}

impl TimelessState {
    pub fn new(n: usize, dim_r: usize, vector: ComplexMatrix) -> Result<Self> {
        if vector.rows() != n * dim_r || !vector.is_column() {
            return Err(Error::BadDimension(format!(
                "vector is {}x{}, expected {}x1",
                vector.rows(),
                vector.cols(),
                n * dim_r
            )));
        }
        vector.check_unit_column()?;
        Ok(TimelessState { n, dim_r, vector })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim_r(&self) -> usize {
        self.dim_r
    }

    pub fn vector(&self) -> &ComplexMatrix {
        &self.vector
    }

    /// The rest block at clock reading `tau`, unnormalized.
    pub fn block(&self, tau: usize) -> Result<ComplexMatrix> {
        if tau >= self.n {
            return Err(Error::IndexOutOfRange(format!(
                "clock reading {tau} of {}",
                self.n
            )));
        }
        Ok(ComplexMatrix::from_fn(self.dim_r, 1, |i, _| {
            self.vector[(tau * self.dim_r + i, 0)]
        }))
    }

    /// The rest state relative to the clock reading `tau`, renormalized.
    /// A block below the zero-block tolerance means this reading never
    /// occurs in the state.
    pub fn relative_state(&self, tau: usize) -> Result<ComplexMatrix> {
        let block = self.block(tau)?;
        let norm = block.norm_fro();
        if norm < tol::ZERO_BLOCK {
            return Err(Error::ZeroConditionalBlock { tau, norm });
        }
        Ok(block.scale(Complex64::new(1.0 / norm, 0.0)))
    }
}

/// Runs the law forward from `psi0`: states[τ] = U_r^τ|ψ(0)⟩ (ordered
/// product for sequence laws).
pub fn evolve_history(sys: &PWSystem, psi0: &ComplexMatrix) -> Result<History> {
    if psi0.rows() != sys.dim_r() || !psi0.is_column() {
        return Err(Error::BadDimension(format!(
            "initial state is {}x{}, rest dimension is {}",
            psi0.rows(),
            psi0.cols(),
            sys.dim_r()
        )));
    }
    psi0.check_unit_column()?;
    let mut states = Vec::with_capacity(sys.n());
    let mut current = psi0.clone();
    for tau in 0..sys.n() {
        if tau > 0 {
            let step = match sys.law() {
                RestLaw::Fixed(u) => u.clone(),
                RestLaw::Sequence(steps) => steps[tau - 1].clone(),
            };
            current = &step * &current;
        }
        states.push(current.clone());
    }
    History::from_states(sys.dim_r(), states)
}

/// Entangles a history with the clock: |Ψ⟩⟩ = (1/√n) Σ_τ |τ⟩|ψ(τ)⟩.
pub fn assemble_timeless(history: &History) -> TimelessState {
    let n = history.n();
    let d = history.dim_r();
    let scale = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    let vector = ComplexMatrix::from_fn(n * d, 1, |i, _| {
        history.state(i / d)[(i % d, 0)] * scale
    });
    TimelessState {
        n,
        dim_r: d,
        vector,
    }
}

/// Residual of the discrete stationarity constraint, ‖U|Ψ⟩⟩ − |Ψ⟩⟩‖₂.
pub fn check_stationarity(sys: &PWSystem, psi: &TimelessState) -> Result<f64> {
    if psi.n() != sys.n() || psi.dim_r() != sys.dim_r() {
        return Err(Error::BadDimension(format!(
            "state is {}·{}, system is {}·{}",
            psi.n(),
            psi.dim_r(),
            sys.n(),
            sys.dim_r()
        )));
    }
    let u = sys.total_step()?;
    Ok((&(&u * psi.vector()) - psi.vector()).norm_fro())
}

/// Conditional expectation of a stationary rest observable given the clock
/// reads `tau`, from a timeless state vector. Delegates to the density
/// operator form.
pub fn conditional_expectation(
    sys: &PWSystem,
    psi: &TimelessState,
    a_r: &ComplexMatrix,
    tau: usize,
) -> Result<f64> {
    if psi.n() != sys.n() || psi.dim_r() != sys.dim_r() {
        return Err(Error::BadDimension(format!(
            "state of shape {}·{} on a system of shape {}·{}",
            psi.n(),
            psi.dim_r(),
            sys.n(),
            sys.dim_r()
        )));
    }
    conditional_expectation_density(sys, &psi.vector().projector(), a_r, tau)
}

/// Conditional expectation of a stationary rest observable given the clock
/// reads `tau`: E(A|τ) = tr(A P_τ ρ)/tr(P_τ ρ) with P_τ = |τ⟩⟨τ| ⊗ I.
///
/// The value is also computed in the Heisenberg form
/// tr(U_r^{−τ} A U_r^{τ} ρ_r(0)) and the Schrödinger form
/// tr(A U_r^{τ} ρ_r(0) U_r^{−τ}), with ρ_r(0) = tr_c(P_0 ρ)/tr(P_0 ρ) the
/// conditional state at reading 0; the three must agree, which holds
/// exactly when ρ is stationary for the system's law.
pub fn conditional_expectation_density(
    sys: &PWSystem,
    rho: &ComplexMatrix,
    a_r: &ComplexMatrix,
    tau: usize,
) -> Result<f64> {
    a_r.check_hermitian(tol::HERMITIAN_GATE)?;
    let n = sys.n();
    let d = sys.dim_r();
    if a_r.rows() != d {
        return Err(Error::BadDimension(format!(
            "observable is {}x{} on a system with rest dimension {d}",
            a_r.rows(),
            a_r.cols()
        )));
    }
    if rho.rows() != n * d || !rho.is_square() {
        return Err(Error::BadDimension(format!(
            "density operator is {}x{}, expected {}x{}",
            rho.rows(),
            rho.cols(),
            n * d,
            n * d
        )));
    }
    if tau >= n {
        return Err(Error::IndexOutOfRange(format!("clock reading {tau} of {n}")));
    }

    // Direct form on the global density operator.
    let projector_at = |reading: usize| {
        let mut sel = ComplexMatrix::zeros(n, n);
        sel[(reading, reading)] = Complex64::new(1.0, 0.0);
        sel.kron(&ComplexMatrix::identity(d))
    };
    let p_tau = projector_at(tau);
    let a_full = ComplexMatrix::identity(n).kron(a_r);
    let weight = (&p_tau * rho).trace();
    if weight.norm() < tol::ZERO_BLOCK {
        return Err(Error::ZeroConditionalBlock {
            tau,
            norm: weight.norm().sqrt(),
        });
    }
    let direct = ((&(&a_full * &p_tau) * rho).trace() / weight).re;

    // Picture forms from the conditional state at reading 0.
    let u_r = sys.fixed_rest_step()?;
    let p0 = projector_at(0);
    let weight0 = (&p0 * rho).trace();
    if weight0.norm() < tol::ZERO_BLOCK {
        return Err(Error::ZeroConditionalBlock {
            tau: 0,
            norm: weight0.norm().sqrt(),
        });
    }
    let rho0 = (&p0 * rho)
        .partial_trace(n, d, crate::linalg::Keep::Rest)?
        .scale(Complex64::new(1.0, 0.0) / weight0);
    let forward = u_r.unitary_power(tau as i64);
    let backward = u_r.unitary_power(-(tau as i64));
    let heisenberg = (&(&(&backward * a_r) * &forward) * &rho0).trace().re;
    let schroedinger = (a_r * &(&(&forward * &rho0) * &backward)).trace().re;

    let spread = (direct - heisenberg)
        .abs()
        .max((direct - schroedinger).abs());
    if spread > 1e-9 {
        return Err(Error::InvalidHistory(format!(
            "conditional expectations disagree across pictures by {spread:.3e}; \
             the state is not stationary for this law"
        )));
    }
    Ok(direct)
}

/// Deterministic rng for a given seed.
pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    use rand::SeedableRng;
    ChaCha12Rng::seed_from_u64(seed)
}

/// Haar-distributed unitary: QR of a complex gaussian matrix with the
/// diagonal phase fix.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) / 2.0_f64.sqrt()
    });
    qr_unitary_factor(&g)
}

/// Random unit vector, uniform on the sphere.
pub fn haar_unit_vector(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    loop {
        let v = ComplexMatrix::from_fn(dim, 1, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        });
        let norm = v.norm_fro();
        if norm > 1e-6 {
            return v.scale(Complex64::new(1.0 / norm, 0.0));
        }
    }
}

/// Seeded random cyclic unitary U_r = V D V† with V Haar and D a diagonal
/// of independent uniform n-th roots of unity, so U_r^n = I by construction.
pub fn sample_cyclic_unitary(n: usize, d: usize, seed: u64) -> ComplexMatrix {
    assert!(n >= 1 && d >= 1);
    let mut rng = seeded_rng(seed);
    let v = haar_unitary(d, &mut rng);
    let omega = std::f64::consts::TAU / n as f64;
    let diag: Vec<Complex64> = (0..d)
        .map(|_| {
            let k = rng.random_range(0..n);
            Complex64::from_polar(1.0, omega * k as f64)
        })
        .collect();
    &(&v * &ComplexMatrix::diagonal(&diag)) * &v.dagger()
}

/// Seeded unit vector, for reproducible initial states.
pub fn sample_unit_vector(d: usize, seed: u64) -> ComplexMatrix {
    haar_unit_vector(d, &mut seeded_rng(seed))
}
