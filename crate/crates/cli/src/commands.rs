//! The five subcommands. Each writes its files plus `meta.txt` (the full
//! configuration echo) into the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use relaxlab::convergence_lab::{emit_report, fmt_num, render_meta, sweep_entropy};
use relaxlab::entropy::{
    build_kinetic_entropy_with, construction_residual, equilibrium_residual, perturbed_derivative_residual,
    second_derivative_residual, symmetrizer_bundle, Mat2,
};
use relaxlab::parabolic_reference::{analytic_linear_solution, Mode};
use relaxlab::{
    dissipation_functional, kinetic_entropy_total, maxwellian, minimum_principle_check, run_reference, run_sweep,
    Complex, Field64, FluxFunction64, KineticEntropy64, KineticState64, KineticStepper, ModelParams64,
    QuadraticEntropy, ReferenceConfig, SolveConfig, SweepConfig, Velocity,
};

use crate::config::{CommandKind, Prepared, RunConfig};
use crate::error::CliError;

/// Tolerance of the table construction and equilibrium identities.
const TABLE_TOLERANCE: f64 = 1e-8;
/// Tolerance of the reference solver against the closed-form linear solution.
const ANALYTIC_TOLERANCE: f64 = 1e-8;
/// Relative tolerance of the symmetrizer identities.
const ALGEBRA_TOLERANCE: f64 = 1e-12;
/// Sample counts of the entropy audit: `u` values × offsets = 1000 states.
const AUDIT_U_SAMPLES: usize = 40;
const AUDIT_OFFSETS: usize = 25;

/// Files written and a human-readable summary.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

impl Outcome {
    fn write(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }
}

/// Creates the output directory and writes `meta.txt`.
fn start(config: &RunConfig) -> Result<(PathBuf, Outcome), CliError> {
    let dir = config.output.dir.clone();
    fs::create_dir_all(&dir)?;
    let mut out = Outcome::default();
    out.write(&dir, "meta.txt", &render_meta(&config.to_meta()))?;
    Ok((dir, out))
}

fn validation(e: relaxlab::Error) -> CliError {
    CliError::Validation(e.to_string())
}

/// `ceil(n_steps / samples)`, at least 1.
fn cadence(n_steps: usize, samples: usize) -> usize {
    n_steps.div_ceil(samples.max(1)).max(1)
}

fn push_snapshot(csv: &mut String, time: f64, u: &Field64, v: &Field64) {
    for ((x, ui), vi) in u.grid().points().zip(u.values()).zip(v.values()) {
        let _ = writeln!(csv, "{},{},{},{}", fmt_num(time), fmt_num(x), fmt_num(*ui), fmt_num(*vi));
    }
}

/// Runs the kinetic solver at `model.eps`, writing `snapshots.csv`
/// (`time,x,u,v`) and `timeseries.csv` (mass, entropy, dissipation, max|u|).
pub fn simulate(config: &RunConfig) -> Result<Outcome, CliError> {
    let prep = config.prepare(CommandKind::Simulate)?;
    let params = config.params(config.model.eps, &prep.flux)?;
    let entropy = sweep_entropy(&params, prep.u_limit, prep.table).map_err(validation)?;
    let mut solve = SolveConfig::new(params.clone(), prep.grid.clone(), config.time.t_end);
    solve.dt_rule = prep.dt_rule;
    solve.u_limit = Some(prep.u_limit);
    let mut stepper = KineticStepper::new(&solve, &prep.u0).map_err(validation)?;
    let every = cadence(stepper.n_steps(), config.time.samples);

    let (dir, mut out) = start(config)?;
    let mut snapshots = String::from("time,x,u,v\n");
    let mut series = String::from("time,mass,entropy,dissipation,max_abs_u\n");
    let mut record = |s: &KineticState64| -> Result<(), relaxlab::Error> {
        let entropy_total = kinetic_entropy_total(&entropy, s)?;
        let u = s.density();
        let _ = writeln!(
            series,
            "{},{},{},{},{}",
            fmt_num(s.time),
            fmt_num(s.mass()),
            fmt_num(entropy_total),
            fmt_num(dissipation_functional(&params, s)),
            fmt_num(u.max_abs())
        );
        push_snapshot(&mut snapshots, s.time, &u, &s.flux_variable(&params));
        Ok(())
    };

    let mut abort = record(stepper.state()).err();
    while abort.is_none() {
        match stepper.advance() {
            Ok(true) => {
                if stepper.steps_taken() % every == 0 || stepper.is_done() {
                    abort = record(stepper.state()).err();
                }
            }
            Ok(false) => break,
            Err(e) => abort = Some(e),
        }
    }
    out.write(&dir, "snapshots.csv", &snapshots)?;
    out.write(&dir, "timeseries.csv", &series)?;
    let t = stepper.state().time;
    out.summary.push(format!(
        "simulate: eps = {}, dt = {}, {} of {} steps, t = {}",
        config.model.eps,
        stepper.dt(),
        stepper.steps_taken(),
        stepper.n_steps(),
        t
    ));
    match abort {
        Some(e) => Err(CliError::Aborted(format!("kinetic run stopped at step {}: {e}", stepper.steps_taken()))),
        None => Ok(out),
    }
}

fn reference_config(config: &RunConfig, prep: &Prepared) -> Result<ReferenceConfig<f64>, CliError> {
    Ok(ReferenceConfig {
        params: ModelParams64::limit(config.model.lambda, prep.flux.clone()).map_err(validation)?,
        grid: prep.grid.clone(),
        t_end: config.time.t_end,
        dt: config.sweep.reference_dt,
    })
}

/// Runs the limit solver, writing `samples + 1` snapshots to `snapshots.csv`.
pub fn reference(config: &RunConfig) -> Result<Outcome, CliError> {
    let prep = config.prepare(CommandKind::Reference)?;
    let cfg = reference_config(config, &prep)?;
    let t_end = config.time.t_end;
    let samples = if t_end > 0.0 { config.time.samples } else { 0 };
    let times: Vec<f64> =
        (0..=samples).map(|j| if j == samples { t_end } else { t_end * j as f64 / samples as f64 }).collect();
    let snaps = run_reference(&cfg, &prep.u0, &times)?;

    let (dir, mut out) = start(config)?;
    let mut csv = String::from("time,x,u,v\n");
    for s in &snaps {
        push_snapshot(&mut csv, s.time, &s.u, &s.v);
    }
    out.write(&dir, "snapshots.csv", &csv)?;
    out.summary.push(format!("reference: {} snapshots up to t = {t_end}, dt = {}", snaps.len(), cfg.dt));
    Ok(out)
}

/// Runs the ε-ladder and writes `sweep.csv`, `rates.csv` and `meta.txt`
/// (and `aborts.txt`). Aborted rows are reported after the files are written.
pub fn sweep(config: &RunConfig) -> Result<Outcome, CliError> {
    let prep = config.prepare(CommandKind::Sweep)?;
    let params = config.params(config.model.eps_ladder[0], &prep.flux)?;
    let mut cfg = SweepConfig::new(params, prep.grid.clone(), config.time.t_end);
    cfg.dt_rule = prep.dt_rule;
    cfg.samples = config.time.samples;
    cfg.reference_dt = config.sweep.reference_dt;
    cfg.s = config.sweep.s;
    cfg.s_prime = config.sweep.s_prime;
    cfg.norms = prep.norms.clone();
    cfg.table = prep.table;
    cfg.u_limit = Some(prep.u_limit);
    let mut report = run_sweep(&cfg, &config.model.eps_ladder, &prep.u0).map_err(validation)?;
    report.meta = config.to_meta();

    let dir = config.output.dir.clone();
    emit_report(&report, &dir)?;
    let mut out = Outcome::default();
    for name in ["sweep.csv", "rates.csv", "meta.txt", "aborts.txt"] {
        let path = dir.join(name);
        if path.exists() {
            out.files.push(path);
        }
    }
    for rate in &report.fitted_rates {
        out.summary.push(format!("rate {}: {:.4}", rate.norm, rate.fit.slope));
    }
    out.summary.push(format!(
        "reference error estimate {:.3e} ({})",
        report.reference_error,
        if report.reference_certified() { "certified" } else { "NOT below a tenth of the smallest error" }
    ));
    let aborted: Vec<String> =
        report.rows.iter().filter_map(|r| r.abort.as_ref().map(|why| format!("eps = {}: {why}", r.eps))).collect();
    if aborted.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Aborted(aborted.join("; ")))
    }
}

/// Deterministic non-equilibrium states `(M_1(u) + δ, M_2(u) - δ)` that stay
/// inside both tables.
fn audit_states(entropy: &KineticEntropy64, params: &ModelParams64, limit: f64) -> Vec<(f64, f64)> {
    let range = |i| entropy.table(i).map(|t| t.xi_range()).unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let (r1, r2) = (range(Velocity::Plus), range(Velocity::Minus));
    let mut states = Vec::with_capacity(AUDIT_U_SAMPLES * AUDIT_OFFSETS);
    for j in 0..AUDIT_U_SAMPLES {
        let u = limit * (-0.5 + j as f64 / (AUDIT_U_SAMPLES - 1) as f64);
        let (m1, m2) = (maxwellian(params, Velocity::Plus, u), maxwellian(params, Velocity::Minus, u));
        let room = [m1 - r1.0, r1.1 - m1, m2 - r2.0, r2.1 - m2].into_iter().fold(f64::INFINITY, f64::min);
        let width = 0.9 * room.max(0.0);
        for k in 0..AUDIT_OFFSETS {
            let d = width * (-1.0 + 2.0 * k as f64 / (AUDIT_OFFSETS - 1) as f64);
            states.push((m1 + d, m2 - d));
        }
    }
    states
}

/// Builds the tabulated entropy at `model.eps` and checks the construction
/// identities, convexity and the minimum principle.
pub fn entropy_audit(config: &RunConfig) -> Result<Outcome, CliError> {
    let prep = config.prepare(CommandKind::EntropyAudit)?;
    let params = config.params(config.model.eps, &prep.flux)?;
    let limit = prep.u_limit;
    let entropy = build_kinetic_entropy_with(&params, QuadraticEntropy::canonical(), (-limit, limit), prep.table)
        .map_err(validation)?;
    let us: Vec<f64> = (0..=1000).map(|j| limit * (-1.0 + 2.0 * j as f64 / 1000.0)).collect();
    let inner: Vec<f64> = us.iter().map(|u| 0.5 * u).collect();
    let construction = construction_residual(&entropy, &params, &us)?;
    let equilibrium = equilibrium_residual(&entropy, &params, &us)?;
    let floor = entropy.convexity_floor();
    let minimum = minimum_principle_check(&entropy, &params, &audit_states(&entropy, &params, limit))?;
    let second = second_derivative_residual(&entropy, &params, &inner)?;
    let du0 = prep.u0.derivative();
    let perturbed = perturbed_derivative_residual(&entropy, &params, &prep.u0, &du0);

    let (dir, mut out) = start(config)?;
    for (i, name) in [(Velocity::Plus, "entropy_table_1.csv"), (Velocity::Minus, "entropy_table_2.csv")] {
        if let Some(table) = entropy.table(i) {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            out.write(&dir, name, &String::from_utf8_lossy(&buf))?;
        }
    }

    let mut failures = Vec::new();
    let mut audit = String::new();
    let mut line = |key: &str, value: String, ok: bool| {
        let _ = writeln!(audit, "{key} = {value}");
        if !ok {
            failures.push(key.to_string());
        }
    };
    line("eps", fmt_num(params.eps()), true);
    line("u_limit", fmt_num(limit), true);
    line("table_size", prep.table.nodes.to_string(), true);
    line("construction_residual", fmt_num(construction), construction <= TABLE_TOLERANCE);
    line("equilibrium_residual", fmt_num(equilibrium), equilibrium <= TABLE_TOLERANCE);
    line("convexity_floor", fmt_num(floor), floor > 0.0);
    line("minimum_principle_samples", minimum.samples.to_string(), true);
    line("minimum_principle_worst_margin", fmt_num(minimum.worst_margin), true);
    line("minimum_principle_violations", minimum.violations.to_string(), minimum.holds());
    line("second_derivative_residual", format!("[{}, {}]", fmt_num(second[0]), fmt_num(second[1])), true);
    match perturbed {
        Ok(r) => line("perturbed_derivative_residual", format!("[{}, {}]", fmt_num(r[0]), fmt_num(r[1])), true),
        Err(e) => line("perturbed_derivative_residual", format!("\"unavailable: {e}\""), true),
    }
    let _ = writeln!(audit, "passed = {}", failures.is_empty());
    out.write(&dir, "audit.txt", &audit)?;
    out.summary.push(format!(
        "entropy-audit: construction {construction:.3e}, equilibrium {equilibrium:.3e}, convexity floor {floor:.3e}, \
         {} minimum-principle violations",
        minimum.violations
    ));
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Check(format!("entropy audit failed: {}", failures.join(", "))))
    }
}

/// Compact rendering, e.g. `[[1, 4], [4, 0.04]]`.
pub fn fmt_mat(m: &Mat2<f64>) -> String {
    let r = |row: &[f64; 2]| format!("[{}, {}]", fmt_short(row[0]), fmt_short(row[1]));
    format!("[{}, {}]", r(&m.0[0]), r(&m.0[1]))
}

/// Shortest form at 12 significant digits (rounding noise removed).
fn fmt_short(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".into()
    } else if rounded.abs() < 1e-4 || rounded.abs() >= 1e16 {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

/// Nonzero Fourier modes of `u` (Nyquist excluded) for the closed-form solution.
fn modes_of(u: &Field64) -> (Vec<Mode<f64>>, f64) {
    let spec = u.spectrum();
    let n = spec.len();
    let scale = spec.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let modes = spec
        .iter()
        .enumerate()
        .filter(|&(j, c)| j != n / 2 && c.norm() > 1e-15 * scale)
        .map(|(j, &c)| Mode { k: if j <= n / 2 { j as i64 } else { j as i64 - n as i64 }, c: Complex::new(c.re, c.im) })
        .collect();
    (modes, spec[n / 2].norm())
}

/// Linear-flux diagnostics: symmetrizer algebra and the reference solver
/// against the closed-form solution.
pub fn linear_check(config: &RunConfig) -> Result<Outcome, CliError> {
    if !config.model.h.iter().all(|&(_, c)| c == 0.0) {
        return Err(CliError::Validation("linear-check needs a linear flux (h = [])".into()));
    }
    let prep = config.prepare(CommandKind::LinearCheck)?;
    let flux = FluxFunction64::linear(config.model.a);
    let params = config.params(config.model.eps, &flux)?;
    let (a, lam, eps) = (config.model.a, config.model.lambda, config.model.eps);
    let bundle = symmetrizer_bundle(&params).map_err(validation)?;

    let (e2, l2) = (eps * eps, lam * lam);
    let expected_a = Mat2([[a, l2], [l2, a * e2 * l2]]);
    let expected_b = Mat2([[0.0, 0.0], [0.0, l2 - a * a * e2]]);
    let scale = |m: &Mat2<f64>| m.0.iter().flatten().fold(1.0f64, |acc, x| acc.max(x.abs()));
    let product = bundle.sigma.mul(&bundle.sigma_inv);
    let a_err = bundle.a_tilde.max_abs_diff(&expected_a) / scale(&expected_a);
    let b_err = bundle.b_tilde.max_abs_diff(&expected_b) / scale(&expected_b);
    let inv_err = product.max_abs_diff(&Mat2::identity());
    let symmetric = bundle.a_tilde.is_symmetric(ALGEBRA_TOLERANCE * scale(&bundle.a_tilde));

    let cfg = reference_config(config, &prep)?;
    let (modes, nyquist) = modes_of(&prep.u0);
    let t_end = config.time.t_end;
    let reference = run_reference(&cfg, &prep.u0, &[])?
        .pop()
        .map(|s| s.u)
        .ok_or_else(|| CliError::Aborted("reference solver produced no snapshot".into()))?;
    let exact = analytic_linear_solution(&flux, lam, &modes, t_end, &prep.grid)?;
    let analytic_err = reference.values().iter().zip(exact.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);

    let mut failures = Vec::new();
    let mut report = String::new();
    let mut line = |key: &str, value: String, ok: bool| {
        let _ = writeln!(report, "{key} = {value}");
        if !ok {
            failures.push(key.to_string());
        }
    };
    line("A", fmt_mat(&bundle.a), true);
    line("B", fmt_mat(&bundle.b), true);
    line("Sigma", fmt_mat(&bundle.sigma), true);
    line("Sigma_inv", fmt_mat(&bundle.sigma_inv), true);
    line("A_sigma", fmt_mat(&bundle.a_tilde), symmetric);
    line("B_sigma", fmt_mat(&bundle.b_tilde), true);
    line("A_sigma_error", fmt_num(a_err), a_err <= ALGEBRA_TOLERANCE);
    line("B_sigma_error", fmt_num(b_err), b_err <= ALGEBRA_TOLERANCE);
    line("sigma_inverse_error", fmt_num(inv_err), inv_err <= ALGEBRA_TOLERANCE);
    line("positive_definite", bundle.positive_definite.to_string(), true);
    line("analytic_modes", modes.len().to_string(), true);
    line("nyquist_amplitude", fmt_num(nyquist), true);
    line("reference_vs_analytic_max_error", fmt_num(analytic_err), analytic_err <= ANALYTIC_TOLERANCE);
    let _ = writeln!(report, "passed = {}", failures.is_empty());

    let (dir, mut out) = start(config)?;
    out.write(&dir, "linear_check.txt", &report)?;
    out.summary.push(format!("A_sigma = {}", fmt_mat(&bundle.a_tilde)));
    out.summary.push(format!("reference vs analytic at t = {t_end}: {analytic_err:.3e}"));
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(CliError::Check(format!("linear check failed: {}", failures.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_matrices() {
        assert_eq!(fmt_mat(&Mat2([[1.0, 4.0], [4.0, 0.04000000000000001]])), "[[1, 4], [4, 0.04]]");
        assert_eq!(fmt_mat(&Mat2([[-0.0, 0.5], [1e-20, -2.0]])), "[[0, 0.5], [1e-20, -2]]");
    }

    #[test]
    fn cadence_covers_the_run() {
        assert_eq!(cadence(0, 50), 1);
        assert_eq!(cadence(100, 50), 2);
        assert_eq!(cadence(101, 50), 3);
        assert_eq!(cadence(10, 50), 1);
    }
}
