//! Strang splitting of the two exact sub-flows of the diffusive BGK system:
//! free transport at `±λ/ε` (Fourier phase shift) and relaxation toward the
//! Maxwellians (closed-form exponential decay, `u` frozen).

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{certify_monotonicity, maxwellian_fields, perturbed_maxwellians, ModelParams};
use crate::scalar::Scalar;
use crate::spectral_grid::{Field, PeriodicGrid};

/// Densities `(f_1, f_2)` at time `time`.
#[derive(Clone, Debug)]
pub struct KineticState<S: Scalar> {
    pub f1: Field<S>,
    pub f2: Field<S>,
    pub time: S,
}

impl<S: Scalar> KineticState<S> {
    pub fn new(f1: Field<S>, f2: Field<S>, time: S) -> Result<Self> {
        f1.check_same_grid(&f2)?;
        Ok(Self { f1, f2, time })
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid<S>> {
        self.f1.grid()
    }

    /// `u = f_1 + f_2`.
    pub fn density(&self) -> Field<S> {
        self.f1.add(&self.f2).expect("state fields share a grid")
    }

    /// `v = (λ/ε)(f_1 - f_2)`.
    pub fn flux_variable(&self, params: &ModelParams<S>) -> Field<S> {
        let r = params.lambda() / params.eps();
        self.f1.zip_map(&self.f2, |a, b| r * (a - b)).expect("state fields share a grid")
    }

    pub fn mass(&self) -> S {
        self.f1.integrate() + self.f2.integrate()
    }

    pub fn is_finite(&self) -> bool {
        self.f1.is_finite() && self.f2.is_finite()
    }
}

/// `Δt = min(c1·ε², cap)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DtRule<S> {
    pub c1: S,
    pub cap: S,
}

impl<S: Scalar> DtRule<S> {
    pub fn new(c1: S, cap: S) -> Result<Self> {
        if !(c1 > S::zero() && c1 <= S::one()) {
            return Err(Error::InvalidParameter(format!("dt coefficient c1 = {c1} must lie in (0, 1]")));
        }
        if !(cap > S::zero()) {
            return Err(Error::InvalidParameter(format!("dt cap = {cap} must be positive")));
        }
        Ok(Self { c1, cap })
    }

    pub fn dt(&self, eps: S) -> S {
        (self.c1 * eps * eps).min(self.cap)
    }
}

impl<S: Scalar> Default for DtRule<S> {
    /// `c1 = 0.02`, `cap = 1e-3`.
    fn default() -> Self {
        Self { c1: S::lit(0.02), cap: S::lit(1e-3) }
    }
}

#[derive(Clone, Debug)]
pub struct SolveConfig<S: Scalar> {
    pub params: ModelParams<S>,
    pub grid: Arc<PeriodicGrid<S>>,
    pub t_end: S,
    pub dt_rule: DtRule<S>,
    /// Observer cadence in steps.
    pub sample_every: usize,
    /// Certified bound on `|u|`; defaults to `2·max|u_0|`.
    pub u_limit: Option<S>,
}

impl<S: Scalar> SolveConfig<S> {
    pub fn new(params: ModelParams<S>, grid: Arc<PeriodicGrid<S>>, t_end: S) -> Self {
        Self { params, grid, t_end, dt_rule: DtRule::default(), sample_every: 1, u_limit: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= S::zero()) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!("t_end = {} must be nonnegative", self.t_end)));
        }
        DtRule::new(self.dt_rule.c1, self.dt_rule.cap)?;
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter("sample_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> S {
        self.dt_rule.dt(self.params.eps())
    }

    /// Number of steps needed to reach `t_end`; the last one may be shortened.
    pub fn n_steps(&self) -> usize {
        step_count(self.t_end, self.dt())
    }

    /// `|u|` bound for a given initial datum.
    pub fn limit_for(&self, u0: &Field<S>) -> S {
        self.u_limit.unwrap_or_else(|| default_u_limit(u0))
    }
}

/// `2·max|u_0|`, never below machine epsilon.
pub fn default_u_limit<S: Scalar>(u0: &Field<S>) -> S {
    (S::lit(2.0) * u0.max_abs()).max(S::epsilon())
}

pub(crate) fn step_count<S: Scalar>(t_end: S, dt: S) -> usize {
    if t_end <= S::zero() {
        return 0;
    }
    let raw = t_end / dt;
    let n = raw.ceil();
    // a ratio that is an integer up to rounding should not produce a sliver step
    let n = if n - raw > S::one() - S::lit(1e-9) { n - S::one() } else { n };
    n.to_usize().unwrap_or(usize::MAX).max(1)
}

/// Spectral-tail threshold above which an initial datum counts as unresolved.
pub fn resolution_tolerance<S: Scalar>() -> S {
    let roundoff = S::lit(1e4) * S::epsilon();
    S::lit(1e-20).max(roundoff * roundoff)
}

/// Places the densities on the perturbed-Maxwellian manifold of `u0`:
/// `f_1 = M_1(u_0) - (ελ/2)∂ₓu_0`, `f_2 = M_2(u_0) + (ελ/2)∂ₓu_0`.
///
/// Monotonicity is certified on `[-2·max|u_0|, 2·max|u_0|]`.
pub fn init_well_prepared<S: Scalar>(params: &ModelParams<S>, u0: &Field<S>) -> Result<KineticState<S>> {
    init_well_prepared_within(params, u0, default_u_limit(u0))
}

/// [`init_well_prepared`] with monotonicity certified on `[-limit, limit]`.
pub fn init_well_prepared_within<S: Scalar>(
    params: &ModelParams<S>,
    u0: &Field<S>,
    limit: S,
) -> Result<KineticState<S>> {
    let tail = u0.tail_fraction();
    if tail > resolution_tolerance::<S>() || !u0.is_finite() {
        return Err(Error::Unresolved { tail: tail.as_f64() });
    }
    let max_abs = u0.max_abs();
    if max_abs > limit {
        return Err(Error::RangeEscape { time: 0.0, max_abs: max_abs.as_f64(), limit: limit.as_f64() });
    }
    certify_monotonicity(params, -limit, limit)?;
    let du = u0.derivative();
    let (f1, f2) = perturbed_maxwellians(params, u0, &du)?;
    Ok(KineticState { f1, f2, time: S::zero() })
}

/// Exact solution of `∂ₜf_i = (M_i(u) - f_i)/ε²` over `dt`. `u` is invariant,
/// so `f_i ← M_i(u) + e^{-dt/ε²}(f_i - M_i(u))`.
pub fn relaxation_step<S: Scalar>(state: &KineticState<S>, params: &ModelParams<S>, dt: S) -> KineticState<S> {
    let u = state.density();
    let (m1, m2) = maxwellian_fields(params, &u);
    let decay = (-dt / (params.eps() * params.eps())).exp();
    let relax = |f: &Field<S>, m: &Field<S>| f.zip_map(m, |fi, mi| mi + decay * (fi - mi)).expect("same grid");
    KineticState { f1: relax(&state.f1, &m1), f2: relax(&state.f2, &m2), time: state.time }
}

/// Exact free transport: `f_1(x) ← f_1(x - λdt/ε)`, `f_2(x) ← f_2(x + λdt/ε)`.
pub fn transport_step<S: Scalar>(state: &KineticState<S>, params: &ModelParams<S>, dt: S) -> KineticState<S> {
    let d = params.lambda() * dt / params.eps();
    KineticState { f1: state.f1.shift(d), f2: state.f2.shift(-d), time: state.time + dt }
}

/// relaxation(dt/2) ∘ transport(dt) ∘ relaxation(dt/2).
pub fn strang_step<S: Scalar>(state: &KineticState<S>, params: &ModelParams<S>, dt: S) -> KineticState<S> {
    let half = S::lit(0.5) * dt;
    let a = relaxation_step(state, params, half);
    let b = transport_step(&a, params, dt);
    relaxation_step(&b, params, half)
}

/// Step-by-step driver used by [`run_kinetic`] and the convergence sweeps.
pub struct KineticStepper<S: Scalar> {
    params: ModelParams<S>,
    t_end: S,
    dt: S,
    n_steps: usize,
    step: usize,
    limit: S,
    state: KineticState<S>,
}

impl<S: Scalar> KineticStepper<S> {
    /// Validates the configuration, certifies monotonicity on `[-limit, limit]`
    /// and prepares the well-prepared initial state.
    pub fn new(config: &SolveConfig<S>, u0: &Field<S>) -> Result<Self> {
        config.validate()?;
        if !config.grid.same_as(u0.grid()) {
            return Err(Error::GridMismatch);
        }
        let limit = config.limit_for(u0);
        let state = init_well_prepared_within(&config.params, u0, limit)?;
        Self::from_state(config, state, limit)
    }

    /// Starts from an arbitrary state (no well-prepared projection).
    pub fn from_state(config: &SolveConfig<S>, state: KineticState<S>, limit: S) -> Result<Self> {
        config.validate()?;
        let dt = config.dt();
        Ok(Self {
            params: config.params.clone(),
            t_end: config.t_end,
            dt,
            n_steps: step_count(config.t_end, dt),
            step: 0,
            limit,
            state,
        })
    }

    pub fn state(&self) -> &KineticState<S> {
        &self.state
    }

    pub fn into_state(self) -> KineticState<S> {
        self.state
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> S {
        self.dt
    }

    pub fn limit(&self) -> S {
        self.limit
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.n_steps
    }

    /// Time reached after `k` steps.
    pub fn time_after(&self, k: usize) -> S {
        if k >= self.n_steps {
            self.t_end
        } else {
            (S::from_count(k) * self.dt).min(self.t_end)
        }
    }

    /// Advances one step. Returns `Ok(false)` once `t_end` has been reached.
    pub fn advance(&mut self) -> Result<bool> {
        if self.is_done() {
            return Ok(false);
        }
        let t0 = self.time_after(self.step);
        let t1 = self.time_after(self.step + 1);
        let mut next = strang_step(&self.state, &self.params, t1 - t0);
        next.time = t1;
        self.step += 1;
        if !next.is_finite() {
            return Err(Error::NonFinite { time: t1.as_f64() });
        }
        let max_abs = next.density().max_abs();
        if max_abs > self.limit {
            return Err(Error::RangeEscape {
                time: t1.as_f64(),
                max_abs: max_abs.as_f64(),
                limit: self.limit.as_f64(),
            });
        }
        self.state = next;
        Ok(true)
    }
}

/// Runs the kinetic solver from well-prepared data built on `u0`.
///
/// The observer sees the initial state, every `sample_every`-th state and the
/// final state at `t_end` (each at most once).
pub fn run_kinetic<S: Scalar>(
    config: &SolveConfig<S>,
    u0: &Field<S>,
    mut observer: impl FnMut(&KineticState<S>),
) -> Result<KineticState<S>> {
    let mut stepper = KineticStepper::new(config, u0)?;
    observer(stepper.state());
    while stepper.advance()? {
        if stepper.steps_taken() % config.sample_every == 0 || stepper.is_done() {
            observer(stepper.state());
        }
    }
    Ok(stepper.into_state())
}
