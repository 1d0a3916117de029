//! ε-sweeps of the kinetic solver against the parabolic reference: error
//! norms, entropy diagnostics, convergence-rate fits and report files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::entropy::{
    build_kinetic_entropy_with, build_linear_kinetic_entropy, kinetic_entropy_total, quadratic_distance,
    relative_entropy_total, KineticEntropy, QuadraticEntropy, TableSpec,
};
use crate::error::{Error, Result};
use crate::kinetic_solver::{default_u_limit, DtRule, KineticStepper, SolveConfig};
use crate::model::ModelParams;
use crate::parabolic_reference::{run_reference, ReferenceConfig, ReferenceSnapshot};
use crate::scalar::Scalar;
use crate::spectral_grid::{Field, NormKind, PeriodicGrid};

/// Shared settings of a sweep; `params.eps()` is replaced by each ladder entry.
#[derive(Clone, Debug)]
pub struct SweepConfig<S: Scalar> {
    pub params: ModelParams<S>,
    pub grid: Arc<PeriodicGrid<S>>,
    pub t_end: S,
    pub dt_rule: DtRule<S>,
    /// Number of comparison samples over `[0, t_end]`.
    pub samples: usize,
    pub reference_dt: S,
    /// Sobolev indices of the interpolation check, `0 < s' < s`.
    pub s: S,
    pub s_prime: S,
    /// Error norms, in report column order.
    pub norms: Vec<NormKind<S>>,
    pub table: TableSpec,
    pub u_limit: Option<S>,
}

impl<S: Scalar> SweepConfig<S> {
    /// Defaults: 50 samples, reference `dt = 1e-4`, `s = 2`, `s' = 1`,
    /// norms `L2, Linf, H1`.
    pub fn new(params: ModelParams<S>, grid: Arc<PeriodicGrid<S>>, t_end: S) -> Self {
        let s_prime = S::one();
        Self {
            params,
            grid,
            t_end,
            dt_rule: DtRule::default(),
            samples: 50,
            reference_dt: S::lit(1e-4),
            s: S::lit(2.0),
            s_prime,
            norms: vec![NormKind::L2, NormKind::Linf, NormKind::Hs(s_prime)],
            table: TableSpec::default(),
            u_limit: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(S::zero() < self.s_prime && self.s_prime < self.s) {
            return Err(Error::InvalidExponent { s: self.s.as_f64(), s_prime: self.s_prime.as_f64() });
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        if !(self.reference_dt > S::zero()) {
            return Err(Error::InvalidParameter(format!("reference dt = {} must be positive", self.reference_dt)));
        }
        if self.norms.is_empty() {
            return Err(Error::InvalidParameter("at least one error norm is required".into()));
        }
        Ok(())
    }
}

/// One ε of a sweep. Error entries are sups over the sample times.
#[derive(Clone, Debug)]
pub struct SweepRow<S> {
    pub eps: S,
    /// One entry per [`SweepConfig::norms`].
    pub errors: Vec<S>,
    pub final_relative_entropy: S,
    /// `min_k (E_k - E_{k+1}) / |E_k|` over all steps; negative means growth.
    pub min_entropy_decrement: S,
    /// `max_t |∫u(t) - ∫u(0)| / ∫|u_0|`.
    pub mass_drift: S,
    pub initial_relative_entropy: S,
    /// `max_t |∫H̃ - ∫η''(ū)(u - ū)²|`.
    pub max_entropy_gap: S,
    /// Sup of the `H^s` error (upper index of the interpolation check).
    pub sup_hs_error: S,
    pub interpolation_ok: bool,
    pub dt: S,
    pub steps: usize,
    /// Reason the kinetic run stopped early; the row is excluded from fits.
    pub abort: Option<String>,
}

impl<S> SweepRow<S> {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }
}

/// Least-squares line `log err = slope·log eps + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit<S> {
    pub slope: S,
    pub intercept: S,
}

#[derive(Clone, Debug)]
pub struct FittedRate<S> {
    pub norm: String,
    pub fit: RateFit<S>,
}

/// `[section]` followed by `key = value` lines.
#[derive(Clone, Debug, PartialEq)]
pub struct MetaSection {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl MetaSection {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), entries: Vec::new() }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.entries.push((key.into(), value.into()));
        self
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport<S> {
    /// Sorted by decreasing ε.
    pub rows: Vec<SweepRow<S>>,
    pub norm_labels: Vec<String>,
    /// Fits over non-aborted rows (absent when fewer than two remain).
    pub fitted_rates: Vec<FittedRate<S>>,
    /// Richardson estimate of the reference solver's `L2` error at `t_end`.
    pub reference_error: S,
    pub meta: Vec<MetaSection>,
}

impl<S: Scalar> SweepReport<S> {
    pub fn rate(&self, norm: &str) -> Option<RateFit<S>> {
        self.fitted_rates.iter().find(|r| r.norm == norm).map(|r| r.fit)
    }

    pub fn any_aborted(&self) -> bool {
        self.rows.iter().any(SweepRow::aborted)
    }

    /// The reference error is at least ten times below the smallest
    /// recorded `L2` error.
    pub fn reference_certified(&self) -> bool {
        let smallest = self.rows.iter().filter(|r| !r.aborted()).map(|r| r.errors[0]).fold(S::infinity(), S::min);
        S::lit(10.0) * self.reference_error <= smallest
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt_num<S: Scalar>(x: S) -> String {
    format!("{:.16e}", x)
}

/// `‖e‖_{s'}` against `‖e‖_0^{1-θ}‖e‖_s^θ`, `θ = s'/s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpolationCheck<S> {
    pub lhs: S,
    pub rhs: S,
    pub holds: bool,
}

pub fn interpolation_check<S: Scalar>(err: &Field<S>, s: S, s_prime: S) -> Result<InterpolationCheck<S>> {
    if !(S::zero() < s_prime && s_prime < s) {
        return Err(Error::InvalidExponent { s: s.as_f64(), s_prime: s_prime.as_f64() });
    }
    let theta = s_prime / s;
    let lhs = err.sobolev_norm(s_prime)?;
    let rhs = err.sobolev_norm(S::zero())?.powf(S::one() - theta) * err.sobolev_norm(s)?.powf(theta);
    Ok(InterpolationCheck { lhs, rhs, holds: lhs <= rhs * (S::one() + S::lit(1e-10)) })
}

/// Least-squares slope of `log err` against `log eps`.
pub fn fit_rate<S: Scalar>(points: &[(S, S)]) -> Result<RateFit<S>> {
    if points.len() < 2 {
        return Err(Error::InvalidRateInput(format!("{} point(s)", points.len())));
    }
    if let Some(&(e, r)) =
        points.iter().find(|&&(e, r)| !(e > S::zero() && r > S::zero() && e.is_finite() && r.is_finite()))
    {
        return Err(Error::InvalidRateInput(format!("({e}, {r})")));
    }
    let n = S::from_count(points.len());
    let logs: Vec<(S, S)> = points.iter().map(|&(e, r)| (e.ln(), r.ln())).collect();
    let mx = logs.iter().fold(S::zero(), |a, p| a + p.0) / n;
    let my = logs.iter().fold(S::zero(), |a, p| a + p.1) / n;
    let sxx = logs.iter().fold(S::zero(), |a, p| a + (p.0 - mx) * (p.0 - mx));
    let sxy = logs.iter().fold(S::zero(), |a, p| a + (p.0 - mx) * (p.1 - my));
    if sxx == S::zero() {
        return Err(Error::InvalidRateInput("all eps values coincide".into()));
    }
    let slope = sxy / sxx;
    Ok(RateFit { slope, intercept: my - slope * mx })
}

/// Entropy used for the diagnostics: the explicit one for linear fluxes, the
/// tabulated one with `η = u²/2` otherwise.
pub fn sweep_entropy<S: Scalar>(params: &ModelParams<S>, limit: S, table: TableSpec) -> Result<KineticEntropy<S>> {
    if params.flux().is_linear() {
        build_linear_kinetic_entropy(params)
    } else {
        build_kinetic_entropy_with(params, QuadraticEntropy::canonical(), (-limit, limit), table)
    }
}

/// Runs every ε of `ladder` (strictly decreasing, positive) against one
/// shared reference solution.
pub fn run_sweep<S: Scalar>(config: &SweepConfig<S>, ladder: &[S], u0: &Field<S>) -> Result<SweepReport<S>> {
    config.validate()?;
    if ladder.is_empty() {
        return Err(Error::EmptyLadder);
    }
    if ladder.iter().any(|&e| !(e > S::zero())) {
        return Err(Error::InvalidParameter("eps values must be positive".into()));
    }
    if ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("eps ladder must be strictly decreasing".into()));
    }
    if !config.grid.same_as(u0.grid()) {
        return Err(Error::GridMismatch);
    }
    let ref_config = ReferenceConfig {
        params: config.params.clone(),
        grid: config.grid.clone(),
        t_end: config.t_end,
        dt: config.reference_dt,
    };
    let reference_error = reference_error_estimate(&ref_config, u0)?;

    let mut rows = ladder.par_iter().map(|&eps| run_row(config, &ref_config, eps, u0)).collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.eps.partial_cmp(&a.eps).expect("finite eps"));

    let norm_labels: Vec<String> = config.norms.iter().map(NormKind::label).collect();
    let fitted_rates = fit_rows(&rows, &norm_labels);
    Ok(SweepReport { rows, norm_labels, fitted_rates, reference_error, meta: sweep_meta(config, ladder) })
}

fn fit_rows<S: Scalar>(rows: &[SweepRow<S>], labels: &[String]) -> Vec<FittedRate<S>> {
    let live: Vec<&SweepRow<S>> = rows.iter().filter(|r| !r.aborted()).collect();
    labels
        .iter()
        .enumerate()
        .filter_map(|(j, label)| {
            let points: Vec<(S, S)> = live.iter().map(|r| (r.eps, r.errors[j])).collect();
            fit_rate(&points).ok().map(|fit| FittedRate { norm: label.clone(), fit })
        })
        .collect()
}

/// `‖u_{dt} - u_{2dt}‖ / 3` at `t_end` (second-order Richardson estimate).
fn reference_error_estimate<S: Scalar>(config: &ReferenceConfig<S>, u0: &Field<S>) -> Result<S> {
    let fine = run_reference(config, u0, &[])?;
    let coarse_cfg = ReferenceConfig { dt: S::lit(2.0) * config.dt, ..config.clone() };
    let coarse = run_reference(&coarse_cfg, u0, &[])?;
    Ok(fine[0].u.sub(&coarse[0].u)?.l2_norm() / S::lit(3.0))
}

/// Steps at which the kinetic solution is compared with the reference.
fn sample_steps(n_steps: usize, samples: usize) -> Vec<usize> {
    let every = n_steps.div_ceil(samples).max(1);
    let mut steps: Vec<usize> = (0..=n_steps).step_by(every).collect();
    if *steps.last().expect("nonempty") != n_steps {
        steps.push(n_steps);
    }
    steps
}

struct RowAccumulator<S> {
    errors: Vec<S>,
    sup_hs: S,
    interpolation_ok: bool,
    final_rel: S,
    initial_rel: S,
    gap: S,
}

fn run_row<S: Scalar>(
    config: &SweepConfig<S>,
    ref_config: &ReferenceConfig<S>,
    eps: S,
    u0: &Field<S>,
) -> Result<SweepRow<S>> {
    let params = config.params.with_eps(eps)?;
    let mut solve = SolveConfig::new(params.clone(), config.grid.clone(), config.t_end);
    solve.dt_rule = config.dt_rule;
    solve.u_limit = config.u_limit;
    let limit = config.u_limit.unwrap_or_else(|| default_u_limit(u0));
    let dt = solve.dt();
    let n_steps = solve.n_steps();

    let mut row = SweepRow {
        eps,
        errors: vec![S::zero(); config.norms.len()],
        final_relative_entropy: S::nan(),
        min_entropy_decrement: S::infinity(),
        mass_drift: S::zero(),
        initial_relative_entropy: S::nan(),
        max_entropy_gap: S::zero(),
        sup_hs_error: S::zero(),
        interpolation_ok: true,
        dt,
        steps: 0,
        abort: None,
    };
    // setup failures (monotonicity, resolution, entropy tables) abort the row
    let setup = (|| -> Result<_> {
        let stepper = KineticStepper::new(&solve, u0)?;
        let entropy = sweep_entropy(&params, limit, config.table)?;
        Ok((stepper, entropy))
    })();
    let (mut stepper, entropy) = match setup {
        Ok(v) => v,
        Err(e) => {
            row.abort = Some(e.to_string());
            return Ok(row);
        }
    };

    let steps = sample_steps(n_steps, config.samples);
    let times: Vec<S> = steps.iter().map(|&k| stepper.time_after(k)).collect();
    // the reference is a fixed oracle; its failure is fatal for the whole sweep
    let snapshots = run_reference(ref_config, u0, &times)?;

    let mass0 = stepper.state().mass();
    let mass_scale = u0.map(|x| x.abs()).integrate().max(S::min_positive_value());
    let mut acc = RowAccumulator {
        errors: vec![S::zero(); config.norms.len()],
        sup_hs: S::zero(),
        interpolation_ok: true,
        final_rel: S::nan(),
        initial_rel: S::nan(),
        gap: S::zero(),
    };
    let mut min_dec = S::infinity();
    let mut drift = S::zero();

    let outcome = (|| -> Result<()> {
        let mut entropy_prev = kinetic_entropy_total(&entropy, stepper.state())?;
        let mut next_sample = 0;
        loop {
            if next_sample < steps.len() && stepper.steps_taken() == steps[next_sample] {
                compare(config, &params, &entropy, &stepper, &snapshots[next_sample], &mut acc)?;
                if next_sample == 0 {
                    acc.initial_rel = acc.final_rel;
                }
                next_sample += 1;
            }
            if !stepper.advance()? {
                break;
            }
            let e = kinetic_entropy_total(&entropy, stepper.state())?;
            let scale = entropy_prev.abs().max(S::min_positive_value());
            min_dec = min_dec.min((entropy_prev - e) / scale);
            entropy_prev = e;
            drift = drift.max((stepper.state().mass() - mass0).abs() / mass_scale);
        }
        Ok(())
    })();

    row.errors = acc.errors;
    row.sup_hs_error = acc.sup_hs;
    row.interpolation_ok = acc.interpolation_ok;
    row.final_relative_entropy = acc.final_rel;
    row.initial_relative_entropy = acc.initial_rel;
    row.max_entropy_gap = acc.gap;
    row.min_entropy_decrement = if min_dec.is_finite() { min_dec } else { S::zero() };
    row.mass_drift = drift;
    row.steps = stepper.steps_taken();
    if let Err(e) = outcome {
        row.abort = Some(e.to_string());
    }
    Ok(row)
}

fn compare<S: Scalar>(
    config: &SweepConfig<S>,
    params: &ModelParams<S>,
    entropy: &KineticEntropy<S>,
    stepper: &KineticStepper<S>,
    snap: &ReferenceSnapshot<S>,
    acc: &mut RowAccumulator<S>,
) -> Result<()> {
    let state = stepper.state();
    let u = state.density();
    let err = u.sub(&snap.u)?;
    for (slot, &norm) in acc.errors.iter_mut().zip(&config.norms) {
        *slot = slot.max(err.norm(norm)?);
    }
    acc.sup_hs = acc.sup_hs.max(err.sobolev_norm(config.s)?);
    acc.interpolation_ok &= interpolation_check(&err, config.s, config.s_prime)?.holds;
    let dx = snap.u.derivative();
    let rel = relative_entropy_total(entropy, params, state, &snap.u, &dx)?;
    let quad = quadratic_distance(entropy.eta(), &u, &snap.u)?;
    acc.gap = acc.gap.max((rel - quad).abs());
    acc.final_rel = rel;
    Ok(())
}

/// TOML-compatible echo of the sweep settings.
fn sweep_meta<S: Scalar>(config: &SweepConfig<S>, ladder: &[S]) -> Vec<MetaSection> {
    let list = |xs: &[S]| format!("[{}]", xs.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(", "));
    let flux = config.params.flux();
    let h_terms: Vec<String> = flux
        .h_coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != S::zero())
        .map(|(j, &c)| format!("[{}, {}]", j + 2, fmt_num(c)))
        .collect();
    let norms: Vec<String> = config.norms.iter().map(|n| format!("\"{}\"", n.label())).collect();
    let mut model = MetaSection::new("model")
        .with("a", fmt_num(flux.a()))
        .with("h", format!("[{}]", h_terms.join(", ")))
        .with("lambda", fmt_num(config.params.lambda()))
        .with("eps_ladder", list(ladder));
    if let Some(limit) = config.u_limit {
        model = model.with("u_limit", fmt_num(limit));
    }
    vec![
        model,
        MetaSection::new("grid").with("n", config.grid.n().to_string()).with("length", fmt_num(config.grid.length())),
        MetaSection::new("time")
            .with("t_end", fmt_num(config.t_end))
            .with("dt_c1", fmt_num(config.dt_rule.c1))
            .with("dt_cap", fmt_num(config.dt_rule.cap))
            .with("samples", config.samples.to_string()),
        MetaSection::new("sweep")
            .with("reference_dt", fmt_num(config.reference_dt))
            .with("s", fmt_num(config.s))
            .with("s_prime", fmt_num(config.s_prime))
            .with("norms", format!("[{}]", norms.join(", ")))
            .with("table_size", config.table.nodes.to_string()),
    ]
}

/// Renders `meta.txt`.
pub fn render_meta(sections: &[MetaSection]) -> String {
    let mut out = String::new();
    for (k, section) in sections.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "[{}]", section.name);
        for (key, value) in &section.entries {
            let _ = writeln!(out, "{key} = {value}");
        }
    }
    out
}

pub fn render_sweep_csv<S: Scalar>(report: &SweepReport<S>) -> String {
    let mut out = String::from("eps");
    for label in &report.norm_labels {
        let _ = write!(out, ",sup_err_{label}");
    }
    out.push_str(
        ",final_rel_entropy,min_entropy_decrement,mass_drift,initial_rel_entropy,max_entropy_gap,sup_err_Hs,\
         interpolation_ok,aborted,dt,steps\n",
    );
    for r in &report.rows {
        out.push_str(&fmt_num(r.eps));
        for &e in &r.errors {
            let _ = write!(out, ",{}", fmt_num(e));
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{},{},{},{},{}",
            fmt_num(r.final_relative_entropy),
            fmt_num(r.min_entropy_decrement),
            fmt_num(r.mass_drift),
            fmt_num(r.initial_relative_entropy),
            fmt_num(r.max_entropy_gap),
            fmt_num(r.sup_hs_error),
            u8::from(r.interpolation_ok),
            u8::from(r.aborted()),
            fmt_num(r.dt),
            r.steps
        );
    }
    out
}

pub fn render_rates_csv<S: Scalar>(report: &SweepReport<S>) -> String {
    let mut out = String::from("norm,slope,intercept\n");
    for r in &report.fitted_rates {
        let _ = writeln!(out, "{},{},{}", r.norm, fmt_num(r.fit.slope), fmt_num(r.fit.intercept));
    }
    out
}

/// Writes `sweep.csv`, `rates.csv` and `meta.txt` (plus `aborts.txt` when a
/// row stopped early) into `dir`, creating it if needed.
pub fn emit_report<S: Scalar>(report: &SweepReport<S>, dir: &Path) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::EmptyLadder);
    }
    let sweep = render_sweep_csv(report);
    let rates = render_rates_csv(report);
    let meta = render_meta(&report.meta);
    fs::create_dir_all(dir)?;
    fs::write(dir.join("sweep.csv"), sweep)?;
    fs::write(dir.join("rates.csv"), rates)?;
    fs::write(dir.join("meta.txt"), meta)?;
    let aborts: String =
        report.rows.iter().filter_map(|r| r.abort.as_ref().map(|why| format!("{}: {why}\n", fmt_num(r.eps)))).collect();
    if !aborts.is_empty() {
        fs::write(dir.join("aborts.txt"), aborts)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FluxFunction;
    use crate::spectral_grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn fit_rate_examples() {
        let pts: Vec<(f64, f64)> = [0.08, 0.04, 0.02].iter().map(|&e: &f64| (e, e.sqrt())).collect();
        assert!((fit_rate(&pts).unwrap().slope - 0.5).abs() < 1e-12);
        let pts: Vec<(f64, f64)> = [0.08, 0.04, 0.02].iter().map(|&e| (e, e)).collect();
        assert!((fit_rate(&pts).unwrap().slope - 1.0).abs() < 1e-12);
        let two = fit_rate::<f64>(&[(0.04, 0.2), (0.01, 0.1)]).unwrap();
        assert!((two.slope - 0.5).abs() < 1e-14);
        assert!(fit_rate(&[(0.1, 1.0)]).is_err());
        assert!(fit_rate(&[(0.1, 1.0), (0.05, 0.0)]).is_err());
        assert!(fit_rate(&[(0.1, 1.0), (0.1, 2.0)]).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        let zero = Field::zeros(&g);
        let c = interpolation_check(&zero, 2.0, 1.0).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (0.0, 0.0, true));

        let k = 3.0;
        let mode = Field::from_fn(&g, |x| (k * x).sin());
        let c = interpolation_check(&mode, 2.0, 1.0).unwrap();
        // sin = (e^{ikx} - e^{-ikx})/2i: two coefficients of modulus 1/2
        let expected = (1.0f64 + k * k).sqrt() * (2.0 * 0.25 * 2.0 * PI).sqrt();
        assert!((c.lhs - expected).abs() < 1e-12 && (c.rhs - expected).abs() < 1e-12 && c.holds);

        let two = Field::from_fn(&g, |x| x.sin() + 0.5 * (2.0 * x).sin());
        let c = interpolation_check(&two, 2.0, 1.0).unwrap();
        assert!(c.lhs < c.rhs * (1.0 - 1e-6));
        assert!(interpolation_check(&two, 1.0, 1.0).is_err());
        assert!(interpolation_check(&two, 1.0, 0.0).is_err());
    }

    #[test]
    fn sample_steps_cover_both_ends() {
        assert_eq!(sample_steps(10, 5), vec![0, 2, 4, 6, 8, 10]);
        assert_eq!(sample_steps(7, 50), (0..=7).collect::<Vec<_>>());
        assert_eq!(sample_steps(0, 50), vec![0]);
        assert_eq!(
            sample_steps(101, 50),
            vec![
                0, 3, 6, 9, 12, 15, 18, 21, 24, 27, 30, 33, 36, 39, 42, 45, 48, 51, 54, 57, 60, 63, 66, 69, 72, 75, 78,
                81, 84, 87, 90, 93, 96, 99, 101
            ]
        );
    }

    #[test]
    fn ladder_validation() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let p = ModelParams::new(0.1, 2.0, FluxFunction::linear(1.0)).unwrap();
        let cfg = SweepConfig::new(p, g.clone(), 0.01);
        let u0 = Field::from_fn(&g, f64::sin);
        assert!(matches!(run_sweep(&cfg, &[], &u0), Err(Error::EmptyLadder)));
        assert!(run_sweep(&cfg, &[0.1, 0.2], &u0).is_err());
        assert!(run_sweep(&cfg, &[0.1, -0.2], &u0).is_err());
    }

    #[test]
    fn aborted_rows_are_flagged_and_excluded() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let p = ModelParams::new(0.1, 2.0, FluxFunction::new(1.0, vec![0.1])).unwrap();
        let mut cfg = SweepConfig::new(p, g.clone(), 0.01);
        cfg.table = TableSpec { nodes: 256, gauss_nodes: 8 };
        cfg.reference_dt = 1e-3;
        let u0 = Field::from_fn(&g, f64::sin);
        // eps = 1.5: λ/ε too small for the Maxwellians to stay monotone
        let report = run_sweep(&cfg, &[1.5, 0.1, 0.05], &u0).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows[0].aborted());
        assert!(!report.rows[1].aborted() && !report.rows[2].aborted());
        assert!(report.rate("L2").is_some());
        let csv = render_sweep_csv(&report);
        let first = csv.lines().nth(1).unwrap();
        assert!(first.contains(",1,"), "{first}");
    }
}
