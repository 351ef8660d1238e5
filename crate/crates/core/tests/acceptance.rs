//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `GKP_ACCEPTANCE_ONLY=1,5,9` restricts the run to the listed criteria.
//! `GKP_LONG=1` adds the small-epsilon error-rate runs, which are reported
//! but never change the exit status.

use std::process::ExitCode;
use std::time::Instant;

use gkp_core::analysis::{
    build_t_matrix, error_rate_experiment, lyapunov_derivative_identity, lyapunov_decay_experiment,
    operator_inequality, verify_lambda_closed_form, verify_t_spectrum, Check, ErrorRateConfig,
    LyapunovConfig,
};
use gkp_core::code::{default_dim, kappa, kappa_asymptote, GkpCode, GkpParameters, ETA_SENSOR, ETA_SQUARE};
use gkp_core::fock::{make_ladder, InteriorBlock, TruncatedOperator};
use gkp_core::lindblad::{
    adjoint_rhs, bloch_coordinates, evolve, lindblad_rhs, logical_operators, DensityMatrix,
    LindbladModel, LogicalOptions, NoiseKind, ObservableSpec, SolverOptions,
};
use gkp_core::random::{random_density_matrix, random_hermitian, rng_for, GinibreSpec};
use gkp_core::spectral::HermitianEigen;
use gkp_core::{Result, C64};

type Criterion = fn() -> Result<Vec<Check>>;

fn c1_kappa() -> Result<Vec<Check>> {
    let eps = 1e-3;
    let ratio = kappa(eps, ETA_SQUARE).value / kappa_asymptote(eps, ETA_SQUARE);
    let end = 1.0 / (4.0 * std::f64::consts::PI.sqrt());
    let nonpositive = (1..=100)
        .filter(|&k| kappa(end * k as f64 / 100.0, ETA_SQUARE).value <= 0.0)
        .count();
    Ok(vec![
        Check::within("kappa / asymptote at eps=1e-3", ratio, Some(0.95), Some(1.05)),
        Check::at_most("grid points on (0, 1/(4 sqrt(pi))] with kappa <= 0", nonpositive as f64, 0.0),
    ])
}

fn kernel_checks(label: &str, eta: f64, expected: usize) -> Result<Vec<Check>> {
    let code = GkpCode::build(GkpParameters::with_dim(0.1, eta, 200)?)?;
    let eig = HermitianEigen::new(&code.lyapunov)?;
    let count = eig.values.iter().filter(|&&v| v <= 1e-8).count();
    Ok(vec![
        Check::within(
            format!("{label}: eigenvalues <= 1e-8"),
            count as f64,
            Some(expected as f64),
            Some(expected as f64),
        ),
        Check::at_least(format!("{label}: next eigenvalue"), eig.values[count], 1e-4),
    ])
}

fn c2_kernel() -> Result<Vec<Check>> {
    let mut out = kernel_checks("square lattice", ETA_SQUARE, 2)?;
    out.extend(kernel_checks("sensor lattice", ETA_SENSOR, 1)?);
    Ok(out)
}

fn c3_codewords() -> Result<Vec<Check>> {
    let code = GkpCode::build(GkpParameters::with_dim(0.1, ETA_SQUARE, 200)?)?;
    let d = code.diagnostics()?;
    Ok(vec![
        Check::at_most("projector distance to kernel", d.eigen_kernel_distance, 1e-5),
        Check::at_most("max ||V_k psi||", d.max_dissipator_residual(), 1e-6),
    ])
}

fn c4_lyapunov() -> Result<Vec<Check>> {
    let cfg = LyapunovConfig {
        dim: Some(200),
        ..LyapunovConfig::default()
    };
    let report = lyapunov_decay_experiment(&cfg)?;
    let mut out = Vec::new();
    for t in &report.trials {
        let name = format!("trial {} fitted rate", t.index);
        match t.fitted_rate {
            Some(r) if !t.degenerate => out.push(Check::at_least(name, r, 0.95 * report.kappa)),
            _ => out.push(Check::failed(name)),
        }
    }
    Ok(out)
}

fn c5_identities() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for eps in [0.025, 0.05, 0.1] {
        let r = verify_t_spectrum(&build_t_matrix(eps, ETA_SQUARE), 1e-10)?;
        out.push(Check::at_most(format!("T eigenvalues eps={eps}"), r.eigenvalue_error, 1e-10));
        out.push(Check::at_most(format!("T eigenvectors eps={eps}"), r.residual, 1e-10));
        out.push(Check::at_most(format!("T eigenprojectors eps={eps}"), r.projector_error, 1e-10));
    }
    let dim = 300;
    let code = GkpCode::build(GkpParameters::with_dim(0.05, ETA_SQUARE, dim)?)?;
    let w = lyapunov_derivative_identity(&code, InteriorBlock::half_for(dim))?;
    out.push(Check::at_most("dW/dt commutator form", w.commutator_form, 1e-5));
    out.push(Check::at_most("dW/dt circulant form", w.circulant_form, 1e-5));
    Ok(out)
}

fn c6_lemma() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for eps in [0.025, 0.05, 0.1] {
        let dim = default_dim(eps);
        let block = InteriorBlock::wide_for(dim);
        let r = operator_inequality(eps, ETA_SQUARE, dim, block)?;
        let min = r.min_eigenvalue[0].min(r.min_eigenvalue[1]);
        out.push(Check::at_least(format!("min eigenvalue eps={eps}"), min, -1e-6));
        let l = verify_lambda_closed_form(eps, ETA_SQUARE, dim, block)?;
        out.push(Check::at_most(format!("Lambda closed form eps={eps}"), l.max_deviation(), 1e-5));
    }
    Ok(out)
}

fn error_rate_checks(epsilon: f64, ratio_range: (f64, f64)) -> Result<Vec<Check>> {
    let r = error_rate_experiment(&ErrorRateConfig {
        epsilon,
        ..ErrorRateConfig::default()
    })?;
    let ratio = r.suppression_ratio.unwrap_or(f64::INFINITY);
    Ok(vec![
        Check::within(
            format!("off/on ratio eps={epsilon:.4}"),
            ratio,
            Some(ratio_range.0),
            Some(ratio_range.1),
        ),
        Check::at_most(
            format!("|off - kappa1| / kappa1 eps={epsilon:.4}"),
            (r.off_rate - r.kappa1).abs() / r.kappa1,
            0.1,
        ),
    ])
}

fn c7_error_rates() -> Result<Vec<Check>> {
    error_rate_checks(0.1, (3.5, 14.0))
}

fn c7_long_tier() -> Result<Vec<Check>> {
    let mut out = error_rate_checks(1.0 / 20.0, (27.0, 240.0))?;
    out.extend(error_rate_checks(1.0 / 30.0, (300.0, 3000.0))?);
    Ok(out)
}

fn c8_logical() -> Result<Vec<Check>> {
    let dim = 200;
    let code = GkpCode::build(GkpParameters::with_dim(0.1, ETA_SQUARE, dim)?)?;
    let model = LindbladModel::gkp(&code)?;
    let j = logical_operators(&model, &code, &LogicalOptions::default())?;
    let mut out = Vec::new();
    for (name, op) in ["J_x", "J_y", "J_z"].iter().zip(j.components()) {
        let eig = HermitianEigen::new(op)?;
        out.push(Check::within(
            format!("{name} spectrum"),
            eig.max().abs().max(eig.min().abs()),
            None,
            Some(1.0 + 1e-6),
        ));
    }
    let full = GinibreSpec {
        dim,
        levels: dim,
        rank: dim,
        max_photon_number: dim as f64,
    };
    let mut worst = 0.0f64;
    for k in 0..100 {
        let spec = if k % 2 == 0 { full } else { GinibreSpec::truncation_safe(dim) };
        let rho = random_density_matrix(&spec, &mut rng_for(8, k))?;
        let b = bloch_coordinates(&j, &rho)?;
        worst = worst.max(b.iter().map(|x| x * x).sum::<f64>());
    }
    out.push(Check::at_most("max |Bloch|^2 over 100 states", worst, 1.0 + 1e-6));
    let zero = bloch_coordinates(&j, &DensityMatrix::pure(&code.codewords[0])?)?;
    out.push(Check::at_most("|z(|0>) - 1|", (zero[2] - 1.0).abs(), 1e-6));
    Ok(out)
}

fn c9_engine() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let dim = 40;
    let code = GkpCode::build(GkpParameters::with_dim(0.1, ETA_SQUARE, dim)?)?;
    let model = LindbladModel::gkp(&code)?.with_noise(NoiseKind::PhotonLoss, 0.02)?;
    let mut worst = 0.0f64;
    for k in 0..10 {
        let x = random_hermitian(dim, &mut rng_for(9, 2 * k))?;
        let rho = random_hermitian(dim, &mut rng_for(9, 2 * k + 1))?;
        let lhs = x.trace_product(&lindblad_rhs(&model, &rho)?)?;
        let rhs = adjoint_rhs(&model, &x)?.trace_product(&rho)?;
        worst = worst.max((lhs - rhs).norm());
    }
    out.push(Check::at_most("generator duality at dim 40", worst, 1e-10));

    let dim = 200;
    let code = GkpCode::build(GkpParameters::with_dim(0.1, ETA_SQUARE, dim)?)?;
    let model = LindbladModel::gkp(&code)?;
    let rho0 = random_density_matrix(&GinibreSpec::truncation_safe(dim), &mut rng_for(9, 100))?;
    let spec = ObservableSpec::uniform(1.0, 10);
    let traj = evolve(&model, &rho0, &SolverOptions::default(), &spec)?;
    out.push(Check::at_most("trace error along trajectory", traj.max_trace_error(), 1e-8));

    let a = make_ladder(2)?;
    let loss = LindbladModel::new(2)?.with_channel("a", a, 1.0)?;
    let one = TruncatedOperator::from_diagonal(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)])?;
    let expected = TruncatedOperator::from_diagonal(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)])?;
    let d = lindblad_rhs(&loss, &one)?.max_abs_diff(&expected)?;
    out.push(Check::at_most("D_a(|1><1|) = |0><0| - |1><1|", d, 1e-12));
    Ok(out)
}

fn selected() -> Option<Vec<usize>> {
    let raw = std::env::var("GKP_ACCEPTANCE_ONLY").ok()?;
    Some(raw.split(',').filter_map(|s| s.trim().parse().ok()).collect())
}

fn run(id: &str, title: &str, f: Criterion) -> bool {
    let start = Instant::now();
    let checks = f();
    let secs = start.elapsed().as_secs_f64();
    match checks {
        Ok(checks) => {
            let passed = checks.iter().all(|c| c.passed);
            let tag = if passed { "PASS" } else { "FAIL" };
            println!("{tag} [{id}] {title} ({} checks, {secs:.1} s)", checks.len());
            for c in &checks {
                println!("    {c}");
            }
            passed
        }
        Err(e) => {
            println!("FAIL [{id}] {title} ({secs:.1} s): {e}");
            false
        }
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Criterion); 9] = [
        ("1", "kappa formula and asymptotics", c1_kappa),
        ("2", "kernel structure of W", c2_kernel),
        ("3", "codeword consistency", c3_codewords),
        ("4", "Lyapunov decay at eps=0.1", c4_lyapunov),
        ("5", "T matrix and dW/dt identities", c5_identities),
        ("6", "operator inequality and Lambda closed forms", c6_lemma),
        ("7", "photon-loss suppression at eps=0.1", c7_error_rates),
        ("8", "logical operators and Bloch ball", c8_logical),
        ("9", "engine correctness", c9_engine),
    ];
    let only = selected();
    let mut all = true;
    for (k, (id, title, f)) in criteria.iter().enumerate() {
        if only.as_ref().is_some_and(|o| !o.contains(&(k + 1))) {
            continue;
        }
        all &= run(id, title, *f);
    }
    if std::env::var("GKP_LONG").is_ok_and(|v| v == "1") {
        run("7L", "photon-loss suppression at eps=1/20, 1/30 (not gating)", c7_long_tier);
    } else {
        println!("SKIP [7L] small-epsilon tier (set GKP_LONG=1)");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
