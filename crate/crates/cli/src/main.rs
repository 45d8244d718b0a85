//! `pwlab` — scenario runner for the relational-time laboratory.
//!
//! Every command executes one construction, embeds its assertions in a
//! report, and exits 0 only when all of them hold. Reports are
//! deterministic for a given configuration: same flags, same bytes.
//! `PWLAB_SEED` overrides the default seed; an explicit `--seed` wins.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pwlab_core::ambiguity::{
    ai_retarget, build_intertwiner_finite, controlled_power_trivializer, records_experiment,
    spectral_washing_report, windowed_shift_intertwiner, RecordsScenario,
};
use pwlab_core::clock::DiscreteClock;
use pwlab_core::linalg::{
    spectrum_deviation, spectrum_hermitian, spectrum_unitary, Complex64, ComplexMatrix,
    SpectrumMultiset,
};
use pwlab_core::pw::{
    assemble_timeless, evolve_history, haar_unit_vector, haar_unitary, sample_cyclic_unitary,
    sample_unit_vector, seeded_rng, History, PWSystem, RestLaw,
};
use pwlab_core::report::Report;
use pwlab_core::{suite, Error};

#[derive(Parser)]
#[command(name = "pwlab", version, about = "Relational-time laboratory scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the two-qubit example end to end: both laws, the
    /// controlled-not intertwiner, and all four spectra.
    TwoQubitDemo(CommonOpts),
    /// Build the cyclic intertwiner between two seeded systems.
    Intertwine(CommonOpts),
    /// Conjugate a seeded law into the trivial one with the
    /// clock-controlled power unitary.
    Trivialize(CommonOpts),
    /// Retarget a seeded timeless state onto a random-walk history.
    Retarget(CommonOpts),
    /// Run the windowed tau-dependent construction (--n is the window).
    Windowed(CommonOpts),
    /// Sample cyclic laws and report the washed total spectra.
    Spectra(CommonOpts),
    /// Run the record-decorrelation experiment (--dim-r is the number of
    /// record/environment values).
    Records(CommonOpts),
    /// Run every acceptance criterion.
    Suite(CommonOpts),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct CommonOpts {
    /// Clock ticks (window length for `windowed`).
    #[arg(long)]
    n: Option<usize>,
    /// Rest-system dimension.
    #[arg(long = "dim-r")]
    dim_r: Option<usize>,
    /// Number of seeded trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; defaults to PWLAB_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

struct RunConfig {
    n: usize,
    dim_r: usize,
    trials: usize,
    seed: u64,
}

fn resolve_config(opts: &CommonOpts, n: usize, dim_r: usize, trials: usize) -> Result<RunConfig, String> {
    let seed = match opts.seed {
        Some(s) => s,
        None => match std::env::var("PWLAB_SEED") {
            Ok(text) => text
                .parse::<u64>()
                .map_err(|_| format!("PWLAB_SEED is not a u64: {text:?}"))?,
            Err(_) => 0,
        },
    };
    let config = RunConfig {
        n: opts.n.unwrap_or(n),
        dim_r: opts.dim_r.unwrap_or(dim_r),
        trials: opts.trials.unwrap_or(trials),
        seed,
    };
    if config.n < 1 || config.dim_r < 1 || config.trials < 1 {
        return Err("n, dim-r, and trials must all be at least 1".into());
    }
    Ok(config)
}

fn sigma_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

fn exact_reals(xs: &[f64]) -> SpectrumMultiset {
    let values: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    SpectrumMultiset::from_eigenvalues(&values, 1e-12)
}

fn cyclic_system(n: usize, d: usize, seed: u64) -> Result<PWSystem, Error> {
    PWSystem::new(
        DiscreteClock::new(n)?,
        d,
        RestLaw::Fixed(sample_cyclic_unitary(n, d, seed)),
    )
}

fn two_qubit_demo(config: &RunConfig) -> Result<Report, Error> {
    let i2 = ComplexMatrix::identity(2);
    let h = &sigma_x().kron(&i2) + &i2.kron(&sigma_x());
    let h_prime = sigma_x().kron(&i2);
    let u = sigma_x().kron(&sigma_x());
    let u_prime = sigma_x().kron(&i2);

    let mut report = Report::new("two-qubit-demo", config.seed)
        .with_params(serde_json::json!({"n": 2, "dim_r": 2}));

    let sigma_h = spectrum_hermitian(&h)?;
    let sigma_hp = spectrum_hermitian(&h_prime)?;
    let sigma_u = spectrum_unitary(&u)?;
    let sigma_up = spectrum_unitary(&u_prime)?;
    report.check(
        "spectrum_h_vs_(-2,0,0,2)",
        spectrum_deviation(&sigma_h, &exact_reals(&[-2.0, 0.0, 0.0, 2.0])),
        1e-10,
    );
    let washed = exact_reals(&[-1.0, -1.0, 1.0, 1.0]);
    report.check(
        "spectrum_h_prime_vs_(-1,-1,1,1)",
        spectrum_deviation(&sigma_hp, &washed),
        1e-10,
    );
    report.check("spectrum_u_vs_washed", spectrum_deviation(&sigma_u, &washed), 1e-10);
    report.check(
        "spectrum_u_prime_vs_washed",
        spectrum_deviation(&sigma_up, &washed),
        1e-10,
    );
    report.spectrum("H", sigma_h);
    report.spectrum("H'", sigma_hp);
    report.spectrum("U", sigma_u);
    report.spectrum("U'", sigma_up);

    let clock = DiscreteClock::new(2)?;
    let source = PWSystem::new(clock, 2, RestLaw::Fixed(sigma_x()))?;
    let target = PWSystem::new(clock, 2, RestLaw::Fixed(i2))?;
    let ket1 = ComplexMatrix::basis_vector(2, 1);
    let it = build_intertwiner_finite(&source, &ket1, &target, &ket1)?;
    report.params["intertwiner"] = serde_json::to_value(it.s()).expect("matrix serializes");
    let conj_dev = (&(it.s() * &u) * &it.s().dagger()).max_abs_diff(&u_prime);
    let psi = assemble_timeless(&evolve_history(&source, &ket1)?);
    let psi_prime = assemble_timeless(&evolve_history(&target, &ket1)?);
    let state_dev = (&(it.s() * psi.vector()) - psi_prime.vector()).norm_fro();
    report.check("s_conjugates_law", conj_dev, 1e-12);
    report.check("s_maps_timeless_state", state_dev, 1e-12);
    report.check("law_residual", it.law_residual(), 1e-12);
    report.check("history_residual", it.history_residual(), 1e-12);
    Ok(report)
}

fn intertwine(config: &RunConfig) -> Result<Report, Error> {
    let mut report = Report::new("intertwine", config.seed).with_params(serde_json::json!({
        "n": config.n, "dim_r": config.dim_r, "trials": config.trials,
    }));
    let mut worst_law: f64 = 0.0;
    let mut worst_hist: f64 = 0.0;
    for trial in 0..config.trials as u64 {
        let base = config.seed.wrapping_add(trial.wrapping_mul(1000));
        let source = cyclic_system(config.n, config.dim_r, base.wrapping_add(1))?;
        let target = cyclic_system(config.n, config.dim_r, base.wrapping_add(2))?;
        let psi0 = sample_unit_vector(config.dim_r, base.wrapping_add(3));
        let psi0t = sample_unit_vector(config.dim_r, base.wrapping_add(4));
        let it = build_intertwiner_finite(&source, &psi0, &target, &psi0t)?;
        worst_law = worst_law.max(it.law_residual());
        worst_hist = worst_hist.max(it.history_residual());
    }
    report.check("law_residual", worst_law, 1e-10);
    report.check("history_residual", worst_hist, 1e-10);
    Ok(report)
}

fn trivialize(config: &RunConfig) -> Result<Report, Error> {
    let mut report = Report::new("trivialize", config.seed).with_params(serde_json::json!({
        "n": config.n, "dim_r": config.dim_r,
    }));
    let sys = cyclic_system(config.n, config.dim_r, config.seed)?;
    let it = controlled_power_trivializer(&sys)?;
    let conj = &(it.s() * &sys.total_step()?) * &it.s().dagger();
    let bare = DiscreteClock::new(config.n)?
        .shift_op()
        .kron(&ComplexMatrix::identity(config.dim_r));
    report.check("conjugation_to_bare_shift", conj.max_abs_diff(&bare), 1e-10);
    report.check("law_residual", it.law_residual(), 1e-10);
    report.check("history_residual", it.history_residual(), 1e-10);
    Ok(report)
}

fn retarget(config: &RunConfig) -> Result<Report, Error> {
    let mut report = Report::new("retarget", config.seed).with_params(serde_json::json!({
        "n": config.n, "dim_r": config.dim_r, "trials": config.trials,
    }));
    let mut worst: f64 = 0.0;
    for trial in 0..config.trials as u64 {
        let base = config.seed.wrapping_add(trial.wrapping_mul(1000));
        let sys = cyclic_system(config.n, config.dim_r, base.wrapping_add(1))?;
        let psi = assemble_timeless(&evolve_history(
            &sys,
            &sample_unit_vector(config.dim_r, base.wrapping_add(2)),
        )?);
        let mut rng = seeded_rng(base.wrapping_add(3));
        let mut states = vec![haar_unit_vector(config.dim_r, &mut rng)];
        for tau in 0..config.n - 1 {
            let step = haar_unitary(config.dim_r, &mut rng);
            states.push(&step * &states[tau]);
        }
        let walk = History::from_states(config.dim_r, states)?;
        let out = ai_retarget(&psi, &walk)?;
        worst = worst.max(out.component_residual);
    }
    report.check("component_identity", worst, 1e-10);
    Ok(report)
}

fn windowed(config: &RunConfig) -> Result<Report, Error> {
    let window = config.n.max(2);
    let mut report = Report::new("windowed", config.seed).with_params(serde_json::json!({
        "window": window, "dim_r": config.dim_r,
    }));
    let mut rng = seeded_rng(config.seed);
    let source: Vec<ComplexMatrix> = (0..window - 1)
        .map(|_| haar_unitary(config.dim_r, &mut rng))
        .collect();
    let target: Vec<ComplexMatrix> = (0..window - 1)
        .map(|_| haar_unitary(config.dim_r, &mut rng))
        .collect();
    let out = windowed_shift_intertwiner(
        &source,
        &target,
        window,
        &sample_unit_vector(config.dim_r, config.seed.wrapping_add(1)),
        &sample_unit_vector(config.dim_r, config.seed.wrapping_add(2)),
    )?;
    report.check("interior_residual", out.interior_residual(), 1e-10);
    report.check("history_residual", out.history_residual(), 1e-10);
    report.residual("boundary_residual", out.boundary_residual());
    Ok(report)
}

fn spectra(config: &RunConfig) -> Result<Report, Error> {
    let washing = spectral_washing_report(config.n, config.dim_r, config.trials, config.seed)?;
    let mut report = Report::new("spectra", config.seed).with_params(serde_json::json!({
        "n": config.n, "dim_r": config.dim_r, "trials": config.trials,
        "rest_spectra_differ": washing.rest_spectra_differ,
        "trial_matches": washing.trial_matches,
    }));
    report.spectrum("total (every trial)", washing.expected_total.clone());
    for (k, rest) in washing.rest_spectra.iter().enumerate() {
        report.spectrum(format!("rest trial {k}"), rest.clone());
    }
    if !washing.pass {
        report.check("total_spectrum_washed", 1.0, 0.5);
    } else {
        report.residual("total_spectrum_washed", 0.0);
    }
    Ok(report)
}

fn records(config: &RunConfig) -> Result<Report, Error> {
    let scenario =
        RecordsScenario::with_identity_labeling(DiscreteClock::new(config.n)?, config.dim_r)?;
    let out = records_experiment(&scenario, 0, 0)?;
    let mut report = Report::new("records", config.seed).with_params(serde_json::json!({
        "n": config.n,
        "record_dim": scenario.record_dim(),
        "env_dim": scenario.env_dim(),
        "record_value": 0,
        "true_env_value": 0,
        "retargeted_env_value": out.retargeted_env_value,
    }));
    report.check("validity_before_vs_one", (out.validity_before - 1.0).abs(), 1e-12);
    report.check("validity_after_vs_zero", out.validity_after.abs(), 1e-12);
    report.check("recorder_block_identity", out.recorder_block_residual, 1e-12);
    report.check("law_residual", out.intertwiner.law_residual(), 1e-12);
    report.check("history_residual", out.intertwiner.history_residual(), 1e-12);
    Ok(report)
}

fn run_suite(config: &RunConfig) -> Result<Report, Error> {
    let results = suite::run_all(config.seed);
    let mut report = Report::new("suite", config.seed);
    let criteria: Vec<serde_json::Value> = results
        .iter()
        .map(|r| {
            serde_json::json!({
                "id": r.id, "name": r.name, "pass": r.pass, "details": r.details,
            })
        })
        .collect();
    report = report.with_params(serde_json::json!({ "criteria": criteria }));
    for r in &results {
        report.check(
            format!("criterion_{:02}", r.id),
            if r.pass { 0.0 } else { 1.0 },
            0.5,
        );
    }
    Ok(report)
}

fn run(cli: &Cli) -> Result<(Report, Format, Option<PathBuf>), String> {
    let (opts, report) = match &cli.command {
        Command::TwoQubitDemo(opts) => {
            let config = resolve_config(opts, 2, 2, 1)?;
            (opts, two_qubit_demo(&config))
        }
        Command::Intertwine(opts) => {
            let config = resolve_config(opts, 4, 3, 1)?;
            (opts, intertwine(&config))
        }
        Command::Trivialize(opts) => {
            let config = resolve_config(opts, 4, 3, 1)?;
            (opts, trivialize(&config))
        }
        Command::Retarget(opts) => {
            let config = resolve_config(opts, 3, 2, 1)?;
            (opts, retarget(&config))
        }
        Command::Windowed(opts) => {
            let config = resolve_config(opts, 8, 2, 1)?;
            (opts, windowed(&config))
        }
        Command::Spectra(opts) => {
            let config = resolve_config(opts, 4, 3, 20)?;
            (opts, spectra(&config))
        }
        Command::Records(opts) => {
            let config = resolve_config(opts, 3, 2, 1)?;
            (opts, records(&config))
        }
        Command::Suite(opts) => {
            let config = resolve_config(opts, 2, 2, 1)?;
            (opts, run_suite(&config))
        }
    };
    let report = report.map_err(|err| err.to_string())?;
    Ok((report, opts.format, opts.out.clone()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, format, out)) => {
            let rendered = match format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
            };
            if let Some(path) = out {
                if let Err(err) = std::fs::write(&path, &rendered) {
                    eprintln!("error: cannot write {}: {err}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{rendered}");
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
