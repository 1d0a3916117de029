//! Pseudo-spectral solver for the limit equation `∂ₜū + ∂ₓf(ū) = λ²∂ₓₓū`
//! and closed-form solutions of its linear case.
//!
//! Time stepping is integrating-factor RK2: diffusion is integrated exactly
//! per mode, the dealiased nonlinear term explicitly.

use std::sync::Arc;

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{flux_field, FluxFunction, ModelParams};
use crate::scalar::Scalar;
use crate::spectral_grid::{Field, PeriodicGrid};

#[derive(Clone, Debug)]
pub struct ReferenceConfig<S: Scalar> {
    /// `eps` is ignored.
    pub params: ModelParams<S>,
    pub grid: Arc<PeriodicGrid<S>>,
    pub t_end: S,
    pub dt: S,
}

/// Limit solution `ū` and its companion flux `v̄ = f(ū) - λ²∂ₓū` at `time`.
#[derive(Clone, Debug)]
pub struct ReferenceSnapshot<S: Scalar> {
    pub time: S,
    pub u: Field<S>,
    pub v: Field<S>,
}

/// `-∂ₓ f(u)` in spectral space.
fn nonlinear_term<S: Scalar>(params: &ModelParams<S>, u: &Field<S>) -> Vec<Complex<S>> {
    let n = u.grid().n();
    let mut coeffs = flux_field(params, u).spectrum();
    for (j, c) in coeffs.iter_mut().enumerate() {
        if j == n / 2 {
            *c = Complex::new(S::zero(), S::zero());
        } else {
            let k = u.grid().wavenumbers()[j];
            // -(ik) c
            *c = Complex::new(k * c.im, -k * c.re);
        }
    }
    coeffs
}

/// One integrating-factor RK2 step of length `dt`.
pub fn step_reference<S: Scalar>(u: &Field<S>, params: &ModelParams<S>, dt: S) -> Result<Field<S>> {
    let grid = u.grid();
    let lam2 = params.lambda() * params.lambda();
    let factors: Vec<S> = grid.wavenumbers().iter().map(|&k| (-lam2 * k * k * dt).exp()).collect();
    let half_dt = S::lit(0.5) * dt;

    let u_hat = u.spectrum();
    let n0 = nonlinear_term(params, u);
    let predictor: Vec<Complex<S>> =
        u_hat.iter().zip(&n0).zip(&factors).map(|((&c, &nl), &e)| (c + nl * dt) * e).collect();
    let u_star = Field::from_spectrum(grid, predictor)?;
    let n1 = nonlinear_term(params, &u_star);
    let next: Vec<Complex<S>> = u_hat
        .iter()
        .zip(n0.iter().zip(&n1))
        .zip(&factors)
        .map(|((&c, (&a, &b)), &e)| c * e + (a * e + b) * half_dt)
        .collect();
    let out = Field::from_spectrum(grid, next)?;
    if !out.is_finite() {
        return Err(Error::NonFinite { time: f64::NAN });
    }
    Ok(out)
}

/// `v̄ = f(ū) - λ²∂ₓū`.
pub fn companion_flux<S: Scalar>(params: &ModelParams<S>, u: &Field<S>) -> Field<S> {
    let lam2 = params.lambda() * params.lambda();
    flux_field(params, u).zip_map(&u.derivative(), |f, d| f - lam2 * d).expect("same grid")
}

/// Advances `u0` to `config.t_end`, recording snapshots at `times` (ascending,
/// inside `[0, t_end]`). With no requested times the final state alone is recorded.
pub fn run_reference<S: Scalar>(
    config: &ReferenceConfig<S>,
    u0: &Field<S>,
    times: &[S],
) -> Result<Vec<ReferenceSnapshot<S>>> {
    if !(config.dt > S::zero()) {
        return Err(Error::InvalidParameter(format!("reference dt = {} must be positive", config.dt)));
    }
    if !(config.t_end >= S::zero()) {
        return Err(Error::InvalidParameter(format!("t_end = {} must be nonnegative", config.t_end)));
    }
    if !config.grid.same_as(u0.grid()) {
        return Err(Error::GridMismatch);
    }
    let default_times = [config.t_end];
    let targets = if times.is_empty() { &default_times[..] } else { times };
    if targets.windows(2).any(|w| w[1] < w[0]) || targets.iter().any(|&t| t < S::zero() || t > config.t_end) {
        return Err(Error::InvalidParameter("snapshot times must be ascending within [0, t_end]".into()));
    }

    let mut out = Vec::with_capacity(targets.len());
    let mut u = u0.clone();
    let mut t = S::zero();
    for &target in targets {
        // fixed steps from the current time, last one shortened onto the target
        let span = target - t;
        let n = crate::kinetic_solver::step_count(span, config.dt);
        for k in 0..n {
            let t_next = if k + 1 == n { target } else { t + config.dt };
            u = step_reference(&u, &config.params, t_next - t).map_err(|e| match e {
                Error::NonFinite { .. } => Error::NonFinite { time: t_next.as_f64() },
                other => other,
            })?;
            t = t_next;
        }
        t = target;
        let v = companion_flux(&config.params, &u);
        out.push(ReferenceSnapshot { time: target, u: u.clone(), v });
    }
    Ok(out)
}

/// One Fourier component `c·e^{ikx}` (integer `k` in units of `2π/L`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode<S> {
    pub k: i64,
    pub c: Complex<S>,
}

impl<S: Scalar> Mode<S> {
    /// `amp·sin(k·2πx/L)` is the real part of `-i·amp·e^{ik·2πx/L}`.
    pub fn sine(k: i64, amp: S) -> Self {
        Self { k, c: Complex::new(S::zero(), -amp) }
    }

    pub fn cosine(k: i64, amp: S) -> Self {
        Self { k, c: Complex::new(amp, S::zero()) }
    }
}

/// Closed-form solution of `∂ₜū + a∂ₓū = λ²∂ₓₓū`:
/// `Re Σ c_k e^{iκ(x - a t)} e^{-λ²κ²t}` with `κ = 2πk/L`.
pub fn analytic_linear_solution<S: Scalar>(
    flux: &FluxFunction<S>,
    lambda: S,
    modes: &[Mode<S>],
    t: S,
    grid: &Arc<PeriodicGrid<S>>,
) -> Result<Field<S>> {
    if !flux.is_linear() {
        return Err(Error::NonlinearFlux);
    }
    let a = flux.a();
    let base = S::lit(2.0) * S::PI() / grid.length();
    let evolved: Vec<(S, Complex<S>)> = modes
        .iter()
        .map(|m| {
            let kappa = S::lit(m.k as f64) * base;
            let decay = (-lambda * lambda * kappa * kappa * t).exp();
            (kappa, m.c * decay)
        })
        .collect();
    Ok(Field::from_fn(grid, |x| {
        evolved.iter().fold(S::zero(), |acc, &(kappa, c)| {
            let phase = kappa * (x - a * t);
            acc + c.re * phase.cos() - c.im * phase.sin()
        })
    }))
}

/// `v̄ = a ū - λ²∂ₓū` for the closed-form linear solution.
pub fn analytic_linear_flux<S: Scalar>(
    flux: &FluxFunction<S>,
    lambda: S,
    modes: &[Mode<S>],
    t: S,
    grid: &Arc<PeriodicGrid<S>>,
) -> Result<Field<S>> {
    let u = analytic_linear_solution(flux, lambda, modes, t, grid)?;
    let a = flux.a();
    let lam2 = lambda * lambda;
    u.zip_map(&u.derivative(), |ui, di| a * ui - lam2 * di)
}
