//! Subcommand implementations. Each writes one envelope under
//! `<out_dir>/<command>/` plus its CSV files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::Utc;
use gkp_core::analysis::{
    error_rate_experiment, lyapunov_decay_experiment, truncation_convergence, verification_suite,
    Check, ErrorRateConfig, ExperimentReport, LyapunovConfig, LyapunovReport, TruncationReport,
    VerificationConfig,
};
use gkp_core::code::{default_dim, kappa, kappa_asymptote, CodewordDiagnostics, GkpCode, GkpParameters, Kappa};
use gkp_core::lindblad::{bloch_coordinates, logical_operators, DensityMatrix, LindbladModel};
use gkp_core::random::{random_density_matrix, rng_for, GinibreSpec};
use gkp_core::spectral::HermitianEigen;
use gkp_core::{StateVector, C64};
use serde::{Deserialize, Serialize};

use crate::config::{gate_long_running, require_dim, require_positive, validate_epsilons, CodewordConfig, KappaConfig, LogicalConfig};
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, series_csv, series_rows_csv, write_atomic, write_json, Failure, ResultEnvelope, ARTIFACT_VERSION};

pub struct Context {
    pub out_dir: PathBuf,
    pub long_running: bool,
}

/// Files produced by one run, named `<stem><suffix>` inside the command directory.
pub struct Artifacts {
    dir: PathBuf,
    stem: String,
    files: Vec<String>,
}

impl Artifacts {
    pub fn write(&mut self, suffix: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let name = format!("{}{suffix}", self.stem);
        let path = self.dir.join(&name);
        write_atomic(&path, bytes)?;
        self.files.push(name);
        Ok(path)
    }
}

/// Runs `body`, then writes the envelope. A payload with a trailing error
/// (for example a failed verification) is still written before the error is
/// returned.
fn execute<C, P, F>(ctx: &Context, command: &str, stem: &str, config: &C, body: F) -> CliResult<PathBuf>
where
    C: Serialize + Clone,
    P: Serialize,
    F: FnOnce(&mut Artifacts) -> CliResult<(P, Option<CliError>)>,
{
    let dir = ctx.out_dir.join(command);
    let mut artifacts = Artifacts {
        dir: dir.clone(),
        stem: stem.to_string(),
        files: Vec::new(),
    };
    let started_at = Utc::now();
    let clock = Instant::now();
    let (payload, error) = match body(&mut artifacts) {
        Ok((p, e)) => (Some(p), e),
        Err(e) => (None, Some(e)),
    };
    let envelope = ResultEnvelope {
        artifact_version: ARTIFACT_VERSION.to_string(),
        command: command.to_string(),
        config: config.clone(),
        started_at,
        finished_at: Utc::now(),
        runtime_seconds: clock.elapsed().as_secs_f64(),
        payload,
        failure: error.as_ref().map(Failure::from_error),
        files: artifacts.files,
    };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &envelope)?;
    match error {
        Some(e) => Err(e),
        None => Ok(path),
    }
}

fn stem(epsilon: f64, dim: usize) -> String {
    format!("eps{epsilon}_dim{dim}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaRow {
    pub epsilon: f64,
    pub kappa: f64,
    pub certified: bool,
    pub asymptote: f64,
}

pub fn kappa_table(cfg: &KappaConfig) -> CliResult<Vec<KappaRow>> {
    validate_epsilons(&cfg.epsilons)?;
    require_positive("eta", cfg.eta)?;
    Ok(cfg
        .epsilons
        .iter()
        .map(|&e| {
            let Kappa { value, certified } = kappa(e, cfg.eta);
            KappaRow {
                epsilon: e,
                kappa: value,
                certified,
                asymptote: kappa_asymptote(e, cfg.eta),
            }
        })
        .collect())
}

pub fn cmd_kappa(ctx: &Context, cfg: &KappaConfig) -> CliResult<PathBuf> {
    execute(ctx, "kappa", &format!("eta{:.6}", cfg.eta), cfg, |art| {
        let rows = kappa_table(cfg)?;
        println!("{:>24} {:>24} {:>9} {:>24}", "epsilon", "kappa", "certified", "2 eta^4 eps^2");
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Config(format!("cannot format CSV: {e}"));
        w.write_record(["epsilon", "kappa", "certified", "asymptote"]).map_err(csv_err)?;
        for r in &rows {
            println!(
                "{:>24} {:>24} {:>9} {:>24}",
                fmt_f64(r.epsilon),
                fmt_f64(r.kappa),
                r.certified,
                fmt_f64(r.asymptote)
            );
            w.write_record([fmt_f64(r.epsilon), fmt_f64(r.kappa), r.certified.to_string(), fmt_f64(r.asymptote)])
                .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
        art.write(".csv", &bytes)?;
        Ok((rows, None))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodewordPayload {
    pub params: GkpParameters,
    pub kappa: Kappa,
    pub diagnostics: CodewordDiagnostics,
    /// The coefficient file parsed back to identical bits.
    pub roundtrip_exact: bool,
}

fn coefficient_csv(codewords: &[StateVector]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Config(format!("cannot format CSV: {e}"));
    let mut header = vec!["n".to_string()];
    for c in 0..codewords.len() {
        header.push(format!("re{c}"));
        header.push(format!("im{c}"));
    }
    w.write_record(&header).map_err(csv_err)?;
    let dim = codewords.first().map_or(0, |c| c.len());
    for n in 0..dim {
        let mut row = vec![n.to_string()];
        for c in codewords {
            row.push(fmt_f64(c[n].re));
            row.push(fmt_f64(c[n].im));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Config(e.to_string()))
}

/// Reads a coefficient file back into one vector per codeword.
pub fn read_coefficients(path: &Path) -> CliResult<Vec<Vec<C64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let width = r.headers().map_err(|e| CliError::Config(e.to_string()))?.len();
    let count = (width - 1) / 2;
    let mut out = vec![Vec::new(); count];
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::Config(e.to_string()))?;
        let num = |k: usize| -> CliResult<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Config(format!("bad coefficient in {}", path.display())))
        };
        for (c, v) in out.iter_mut().enumerate() {
            v.push(C64::new(num(1 + 2 * c)?, num(2 + 2 * c)?));
        }
    }
    Ok(out)
}

pub fn cmd_codewords(ctx: &Context, cfg: &CodewordConfig) -> CliResult<PathBuf> {
    require_dim(cfg.dim)?;
    let dim = cfg.dim.unwrap_or_else(|| default_dim(cfg.epsilon));
    execute(ctx, "codewords", &stem(cfg.epsilon, dim), cfg, |art| {
        let params = GkpParameters::with_dim(cfg.epsilon, cfg.eta, dim)?;
        let code = GkpCode::build(params)?;
        let diagnostics = code.diagnostics()?;
        let path = art.write("_coefficients.csv", &coefficient_csv(&code.codewords)?)?;
        let back = read_coefficients(&path)?;
        let roundtrip_exact = back.len() == code.codewords.len()
            && back.iter().zip(&code.codewords).all(|(b, c)| {
                b.len() == c.len()
                    && b.iter().zip(c.iter()).all(|(x, y)| {
                        x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
                    })
            });
        for (k, n) in diagnostics.mean_photon_number.iter().enumerate() {
            println!(
                "codeword {k}: <n> = {n:.6}, odd weight = {:.3e}, max ||V_k psi|| = {:.3e}",
                diagnostics.odd_fock_weight[k],
                diagnostics.dissipator_residuals[k].iter().fold(0.0f64, |m, x| m.max(*x))
            );
        }
        println!("distance to kernel of W: {:.3e}", diagnostics.eigen_kernel_distance);
        let error = (!roundtrip_exact).then(|| CliError::Verification("coefficient file did not round-trip".into()));
        let payload = CodewordPayload {
            params,
            kappa: code.kappa(),
            diagnostics,
            roundtrip_exact,
        };
        Ok((payload, error))
    })
}

fn lyapunov_rows(series: &[(f64, f64)]) -> Vec<[Option<f64>; 7]> {
    series
        .iter()
        .map(|&(t, w)| [Some(t), None, Some(w), None, None, None, None])
        .collect()
}

pub fn cmd_lyapunov(ctx: &Context, cfg: &LyapunovConfig) -> CliResult<PathBuf> {
    require_dim(cfg.dim)?;
    gate_long_running(cfg.epsilon, ctx.long_running)?;
    let dim = cfg.dim.unwrap_or_else(|| default_dim(cfg.epsilon));
    let name = format!("{}_seed{}", stem(cfg.epsilon, dim), cfg.seed);
    execute(ctx, "lyapunov", &name, cfg, |art| -> CliResult<(LyapunovReport, Option<CliError>)> {
        let report = lyapunov_decay_experiment(cfg)?;
        for t in &report.trials {
            if t.degenerate {
                eprintln!(
                    "notice: trial {} starts in the kernel of W (Tr(W rho0) = {:.3e}); skipped as degenerate",
                    t.index, t.initial_lyapunov
                );
                continue;
            }
            if let Some(e) = &t.error {
                eprintln!("trial {}: {e}", t.index);
            }
            art.write(&format!("_trial{}.csv", t.index), &series_rows_csv(&lyapunov_rows(&t.series))?)?;
            println!(
                "trial {}: Tr(W rho0) = {:.4e}, fitted rate = {}, kappa = {:.6}",
                t.index,
                t.initial_lyapunov,
                t.fitted_rate.map_or("n/a".into(), |r| format!("{r:.6}")),
                report.kappa
            );
        }
        let error = (!report.passed).then(|| {
            CliError::Verification(format!(
                "a fitted decay rate fell below {:.6}",
                report.kappa * (1.0 - cfg.rate_tolerance)
            ))
        });
        Ok((report, error))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QecPayload {
    pub report: ExperimentReport,
    pub truncation: Option<TruncationReport>,
}

pub fn cmd_qec_sim(ctx: &Context, cfg: &ErrorRateConfig, truncation_check: bool) -> CliResult<PathBuf> {
    require_dim(cfg.dim)?;
    gate_long_running(cfg.epsilon, ctx.long_running)?;
    let name = stem(cfg.epsilon, cfg.resolved_dim());
    execute(ctx, "qec-sim", &name, cfg, |art| {
        let report = error_rate_experiment(cfg)?;
        art.write("_on.csv", &series_csv(&report.on_records)?)?;
        art.write("_off.csv", &series_csv(&report.off_records)?)?;
        println!(
            "on rate = {:.6e}, off rate = {:.6e}, kappa1 = {:.6e}, off/on = {}",
            report.on_rate,
            report.off_rate,
            report.kappa1,
            report.suppression_ratio.map_or("n/a".into(), |r| format!("{r:.4}"))
        );
        let truncation = if truncation_check {
            let t = truncation_convergence(cfg)?;
            println!("on rate change from dim {} to {}: {:.3e}", t.dims[0], t.dims[1], t.relative_change);
            Some(t)
        } else {
            None
        };
        Ok((QecPayload { report, truncation }, None))
    })
}

pub fn cmd_check(ctx: &Context, cfg: &VerificationConfig) -> CliResult<PathBuf> {
    require_dim(cfg.dim)?;
    let name = stem(cfg.epsilon, cfg.resolved_dim());
    execute(ctx, "check", &name, cfg, |_| -> CliResult<(Vec<Check>, Option<CliError>)> {
        let checks = verification_suite(cfg)?;
        for c in &checks {
            println!("{c}");
        }
        let failed = checks.iter().filter(|c| !c.passed).count();
        let error = (failed > 0).then(|| CliError::Verification(format!("{failed} of {} checks failed", checks.len())));
        Ok((checks, error))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalPayload {
    pub dim: usize,
    pub convergence_residual: f64,
    pub iterations: usize,
    /// `[min, max]` eigenvalue of `J_x, J_y, J_z`.
    pub spectra: [[f64; 2]; 3],
    pub codeword_bloch: Vec<[f64; 3]>,
    pub max_bloch_norm_squared: f64,
}

pub fn cmd_logical_ops(ctx: &Context, cfg: &LogicalConfig) -> CliResult<PathBuf> {
    require_dim(cfg.dim)?;
    let dim = cfg.dim.unwrap_or_else(|| default_dim(cfg.epsilon));
    let name = format!("{}_seed{}", stem(cfg.epsilon, dim), cfg.seed);
    execute(ctx, "logical-ops", &name, cfg, |_| {
        let code = GkpCode::build(GkpParameters::with_dim(cfg.epsilon, gkp_core::code::ETA_SQUARE, dim)?)?;
        let model = LindbladModel::gkp(&code)?;
        let j = logical_operators(&model, &code, &cfg.options)?;
        let mut spectra = [[0.0; 2]; 3];
        for (k, op) in j.components().iter().enumerate() {
            let eig = HermitianEigen::new(op)?;
            spectra[k] = [eig.min(), eig.max()];
        }
        let codeword_bloch = code
            .codewords
            .iter()
            .map(|c| bloch_coordinates(&j, &DensityMatrix::pure(c)?))
            .collect::<gkp_core::Result<Vec<_>>>()?;
        let spec = GinibreSpec::truncation_safe(dim);
        let mut max_bloch_norm_squared = 0.0f64;
        for k in 0..cfg.random_states {
            let rho = random_density_matrix(&spec, &mut rng_for(cfg.seed, k as u64))?;
            let b = bloch_coordinates(&j, &rho)?;
            max_bloch_norm_squared = max_bloch_norm_squared.max(b.iter().map(|x| x * x).sum());
        }
        for (label, s) in ["J_x", "J_y", "J_z"].iter().zip(spectra.iter()) {
            println!("{label}: spectrum in [{:.9}, {:.9}]", s[0], s[1]);
        }
        println!(
            "residual {:.3e} after {} sweeps; max |Bloch|^2 over {} states = {:.9}",
            j.convergence_residual, j.iterations, cfg.random_states, max_bloch_norm_squared
        );
        Ok((
            LogicalPayload {
                dim,
                convergence_residual: j.convergence_residual,
                iterations: j.iterations,
                spectra,
                codeword_bloch,
                max_bloch_norm_squared,
            },
            None,
        ))
    })
}
