//! Kinetic entropies of the two-velocity model.
//!
//! Two representations are provided:
//!
//! * the explicit quadratic entropy of the linear model,
//!   `H_1(ξ) = (λ² - aλε)ξ²`, `H_2(ξ) = (λ² + aλε)ξ²`, paired with
//!   `η(u) = ½(λ² - a²ε²)u²`;
//! * a constructive entropy for any monotone Maxwellians, built from a
//!   quadratic macroscopic entropy `η` through `H_i'(ξ) = η'(M_i^{-1}(ξ))`
//!   and tabulated on a uniform ξ-grid.
//!
//! Both satisfy `H_i'(M_i(u)) = η'(u)` and `H_1(M_1(u)) + H_2(M_2(u)) = η(u)`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::kinetic_solver::KineticState;
use crate::model::{
    certify_monotonicity, maxwellian, maxwellian_deriv, maxwellian_fields, perturbed_maxwellians, ModelParams, Velocity,
};
use crate::quadrature::gauss_legendre;
use crate::scalar::Scalar;
use crate::spectral_grid::Field;

/// Nodes per ξ-table.
pub const DEFAULT_TABLE_SIZE: usize = 4096;
/// Gauss–Legendre nodes per table cell when integrating `H_i'`.
pub const DEFAULT_GAUSS_NODES: usize = 64;

const NEWTON_MAX_ITER: usize = 50;

/// `η(u) = q·u²/2`, `q > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticEntropy<S> {
    q: S,
}

impl<S: Scalar> QuadraticEntropy<S> {
    pub fn new(q: S) -> Result<Self> {
        if !(q > S::zero()) {
            return Err(Error::InvalidParameter(format!("entropy curvature q = {q} must be positive")));
        }
        Ok(Self { q })
    }

    /// `η(u) = u²/2`.
    pub fn canonical() -> Self {
        Self { q: S::one() }
    }

    pub fn curvature(&self) -> S {
        self.q
    }

    pub fn value(&self, u: S) -> S {
        S::lit(0.5) * self.q * u * u
    }

    pub fn prime(&self, u: S) -> S {
        self.q * u
    }

    pub fn second(&self, _u: S) -> S {
        self.q
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyKind {
    ExplicitLinear,
    Tabulated,
}

/// Monotone piecewise-cubic table of `H_i`, `H_i'` and `H_i''` on a uniform ξ-grid.
#[derive(Clone, Debug)]
pub struct EntropyTable<S> {
    xi_lo: S,
    xi_hi: S,
    step: S,
    h: Vec<S>,
    hp: Vec<S>,
    /// Node slopes of the `H'` interpolant (exact `H''`, Fritsch–Carlson limited).
    hpp: Vec<S>,
}

impl<S: Scalar> EntropyTable<S> {
    pub fn xi_range(&self) -> (S, S) {
        (self.xi_lo, self.xi_hi)
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn node(&self, j: usize) -> S {
        if j + 1 == self.h.len() {
            self.xi_hi
        } else {
            self.xi_lo + S::from_count(j) * self.step
        }
    }

    fn locate(&self, xi: S) -> Result<(usize, S)> {
        let slack = S::lit(1e-12) * (self.xi_hi - self.xi_lo);
        if !(xi >= self.xi_lo - slack && xi <= self.xi_hi + slack) {
            return Err(Error::OutOfTable { xi: xi.as_f64(), lo: self.xi_lo.as_f64(), hi: self.xi_hi.as_f64() });
        }
        let cells = self.h.len() - 1;
        let pos = (xi - self.xi_lo) / self.step;
        let j = pos.floor().to_usize().unwrap_or(0).min(cells - 1);
        Ok((j, pos - S::from_count(j)))
    }

    pub fn value(&self, xi: S) -> Result<S> {
        let (j, t) = self.locate(xi)?;
        Ok(hermite(t, self.step, self.h[j], self.hp[j], self.h[j + 1], self.hp[j + 1]))
    }

    pub fn prime(&self, xi: S) -> Result<S> {
        let (j, t) = self.locate(xi)?;
        Ok(hermite(t, self.step, self.hp[j], self.hpp[j], self.hp[j + 1], self.hpp[j + 1]))
    }

    pub fn second(&self, xi: S) -> Result<S> {
        let (j, t) = self.locate(xi)?;
        Ok(hermite_slope(t, self.step, self.hp[j], self.hpp[j], self.hp[j + 1], self.hpp[j + 1]))
    }

    /// Smallest `H''` of the interpolant: per cell the derivative is quadratic
    /// in `t`, so endpoints and the interior vertex suffice.
    pub fn min_second(&self) -> S {
        let mut lo = S::infinity();
        for j in 0..self.h.len() - 1 {
            let (y0, m0, y1, m1) = (self.hp[j], self.hpp[j], self.hp[j + 1], self.hpp[j + 1]);
            lo = lo.min(m0).min(m1);
            // d/dt of the slope polynomial: a t + b
            let d = (y1 - y0) / self.step;
            let a = S::lit(6.0) * (m0 + m1 - S::lit(2.0) * d);
            let b = S::lit(6.0) * d - S::lit(4.0) * m0 - S::lit(2.0) * m1;
            if a != S::zero() {
                let t = -b / a;
                if t > S::zero() && t < S::one() {
                    lo = lo.min(hermite_slope(t, self.step, y0, m0, y1, m1));
                }
            }
        }
        lo
    }

    /// Writes `xi,H,H',H''` rows for every node.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "xi,H,H',H''")?;
        for j in 0..self.h.len() {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", self.node(j), self.h[j], self.hp[j], self.hpp[j])?;
        }
        Ok(())
    }
}

/// Cubic Hermite interpolant on a cell of width `h`, local coordinate `t ∈ [0, 1]`.
fn hermite<S: Scalar>(t: S, h: S, y0: S, m0: S, y1: S, m1: S) -> S {
    let t2 = t * t;
    let t3 = t2 * t;
    let two = S::lit(2.0);
    let three = S::lit(3.0);
    (two * t3 - three * t2 + S::one()) * y0
        + (t3 - two * t2 + t) * h * m0
        + (three * t2 - two * t3) * y1
        + (t3 - t2) * h * m1
}

fn hermite_slope<S: Scalar>(t: S, h: S, y0: S, m0: S, y1: S, m1: S) -> S {
    let t2 = t * t;
    let six = S::lit(6.0);
    ((six * t2 - six * t) * y0
        + (S::lit(3.0) * t2 - S::lit(4.0) * t + S::one()) * h * m0
        + (six * t - six * t2) * y1
        + (S::lit(3.0) * t2 - S::lit(2.0) * t) * h * m1)
        / h
}

#[derive(Clone, Debug)]
enum Repr<S> {
    Explicit { coeff: [S; 2] },
    Tabulated { tables: Box<[EntropyTable<S>; 2]> },
}

/// `H(f) = H_1(f_1) + H_2(f_2)` with its macroscopic counterpart `η`.
#[derive(Clone, Debug)]
pub struct KineticEntropy<S> {
    eta: QuadraticEntropy<S>,
    repr: Repr<S>,
    u_range: Option<(S, S)>,
}

fn slot(i: Velocity) -> usize {
    i.index() - 1
}

impl<S: Scalar> KineticEntropy<S> {
    pub fn kind(&self) -> EntropyKind {
        match self.repr {
            Repr::Explicit { .. } => EntropyKind::ExplicitLinear,
            Repr::Tabulated { .. } => EntropyKind::Tabulated,
        }
    }

    pub fn eta(&self) -> &QuadraticEntropy<S> {
        &self.eta
    }

    /// Certified `u`-range of a tabulated entropy.
    pub fn u_range(&self) -> Option<(S, S)> {
        self.u_range
    }

    pub fn table(&self, i: Velocity) -> Option<&EntropyTable<S>> {
        match &self.repr {
            Repr::Explicit { .. } => None,
            Repr::Tabulated { tables } => Some(&tables[slot(i)]),
        }
    }

    pub fn h(&self, i: Velocity, xi: S) -> Result<S> {
        match &self.repr {
            Repr::Explicit { coeff } => Ok(coeff[slot(i)] * xi * xi),
            Repr::Tabulated { tables } => tables[slot(i)].value(xi),
        }
    }

    pub fn h_prime(&self, i: Velocity, xi: S) -> Result<S> {
        match &self.repr {
            Repr::Explicit { coeff } => Ok(S::lit(2.0) * coeff[slot(i)] * xi),
            Repr::Tabulated { tables } => tables[slot(i)].prime(xi),
        }
    }

    pub fn h_second(&self, i: Velocity, xi: S) -> Result<S> {
        match &self.repr {
            Repr::Explicit { coeff } => Ok(S::lit(2.0) * coeff[slot(i)]),
            Repr::Tabulated { tables } => tables[slot(i)].second(xi),
        }
    }

    /// `H_1(f_1) + H_2(f_2)`.
    pub fn total(&self, f1: S, f2: S) -> Result<S> {
        Ok(self.h(Velocity::Plus, f1)? + self.h(Velocity::Minus, f2)?)
    }

    /// Lower bound of `H_i''` over the representable range.
    pub fn convexity_floor(&self) -> S {
        match &self.repr {
            Repr::Explicit { coeff } => S::lit(2.0) * coeff[0].min(coeff[1]),
            Repr::Tabulated { tables } => tables[0].min_second().min(tables[1].min_second()),
        }
    }
}

/// Explicit entropy of the linear model (`h = 0`, `ε < λ/|a|`).
pub fn build_linear_kinetic_entropy<S: Scalar>(params: &ModelParams<S>) -> Result<KineticEntropy<S>> {
    let flux = params.flux();
    if !flux.is_linear() {
        return Err(Error::NonlinearFlux);
    }
    let (a, lam, eps) = (flux.a(), params.lambda(), params.eps());
    let coeff = [lam * lam - a * lam * eps, lam * lam + a * lam * eps];
    if coeff.iter().any(|&c| !(c > S::zero())) {
        return Err(Error::InvalidParameter(format!(
            "linear entropy needs eps < lambda/|a| (eps = {eps}, lambda = {lam}, a = {a})"
        )));
    }
    Ok(KineticEntropy {
        eta: QuadraticEntropy::new(lam * lam - a * a * eps * eps)?,
        repr: Repr::Explicit { coeff },
        u_range: None,
    })
}

/// Solves `M_i(u) = xi` on `range` by Newton's method with a bisection safeguard.
pub fn invert_maxwellian<S: Scalar>(params: &ModelParams<S>, i: Velocity, xi: S, range: (S, S)) -> Result<S> {
    let (lo, hi) = range;
    let guess = lo + (hi - lo) * S::lit(0.5);
    invert_from(params, i, xi, range, guess)
}

fn invert_from<S: Scalar>(params: &ModelParams<S>, i: Velocity, xi: S, range: (S, S), guess: S) -> Result<S> {
    let (mut lo, mut hi) = range;
    let residual = |u: S| maxwellian(params, i, u) - xi;
    let (r_lo, r_hi) = (residual(lo), residual(hi));
    let tol = S::lit(1e-12).max(S::lit(8.0) * S::epsilon() * (xi.abs() + S::one()));
    if r_lo.abs() <= tol {
        return Ok(lo);
    }
    if r_hi.abs() <= tol {
        return Ok(hi);
    }
    if r_lo > S::zero() || r_hi < S::zero() {
        return Err(Error::Inversion {
            xi: xi.as_f64(),
            reason: format!("outside the Maxwellian image of [{lo}, {hi}]"),
        });
    }
    let mut u = guess.max(lo).min(hi);
    for _ in 0..NEWTON_MAX_ITER {
        let r = residual(u);
        if r.abs() <= tol {
            return Ok(u);
        }
        if r < S::zero() {
            lo = u;
        } else {
            hi = u;
        }
        let d = maxwellian_deriv(params, i, u);
        let newton = u - r / d;
        u = if d > S::zero() && newton > lo && newton < hi { newton } else { S::lit(0.5) * (lo + hi) };
    }
    // bisection fallback on the shrunken bracket
    for _ in 0..200 {
        let mid = S::lit(0.5) * (lo + hi);
        let r = residual(mid);
        if r.abs() <= tol || hi - lo <= S::epsilon() * (mid.abs() + S::one()) {
            return Ok(mid);
        }
        if r < S::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Inversion { xi: xi.as_f64(), reason: "no convergence".into() })
}

/// Table resolution used by [`build_kinetic_entropy_with`].
#[derive(Clone, Copy, Debug)]
pub struct TableSpec {
    pub nodes: usize,
    pub gauss_nodes: usize,
}

impl Default for TableSpec {
    fn default() -> Self {
        Self { nodes: DEFAULT_TABLE_SIZE, gauss_nodes: DEFAULT_GAUSS_NODES }
    }
}

/// Constructive kinetic entropy on the certified `u_range` (must contain 0).
pub fn build_kinetic_entropy<S: Scalar>(
    params: &ModelParams<S>,
    eta: QuadraticEntropy<S>,
    u_range: (S, S),
) -> Result<KineticEntropy<S>> {
    build_kinetic_entropy_with(params, eta, u_range, TableSpec::default())
}

pub fn build_kinetic_entropy_with<S: Scalar>(
    params: &ModelParams<S>,
    eta: QuadraticEntropy<S>,
    u_range: (S, S),
    spec: TableSpec,
) -> Result<KineticEntropy<S>> {
    let (u_lo, u_hi) = u_range;
    if !(u_lo < S::zero() && u_hi > S::zero()) {
        return Err(Error::InvalidParameter(format!("entropy range [{u_lo}, {u_hi}] must contain 0 in its interior")));
    }
    if spec.nodes < 4 || spec.gauss_nodes < 1 {
        return Err(Error::InvalidParameter("entropy table needs at least 4 nodes".into()));
    }
    certify_monotonicity(params, u_lo, u_hi)?;
    let (gx, gw) = gauss_legendre(spec.gauss_nodes);
    let gx: Vec<S> = gx.into_iter().map(S::lit).collect();
    let gw: Vec<S> = gw.into_iter().map(S::lit).collect();
    let tables = [
        build_table(params, &eta, Velocity::Plus, u_range, spec.nodes, &gx, &gw)?,
        build_table(params, &eta, Velocity::Minus, u_range, spec.nodes, &gx, &gw)?,
    ];
    Ok(KineticEntropy { eta, repr: Repr::Tabulated { tables: Box::new(tables) }, u_range: Some(u_range) })
}

fn build_table<S: Scalar>(
    params: &ModelParams<S>,
    eta: &QuadraticEntropy<S>,
    i: Velocity,
    u_range: (S, S),
    nodes: usize,
    gx: &[S],
    gw: &[S],
) -> Result<EntropyTable<S>> {
    let (u_lo, u_hi) = u_range;
    let xi_lo = maxwellian(params, i, u_lo);
    let xi_hi = maxwellian(params, i, u_hi);
    let step = (xi_hi - xi_lo) / S::from_count(nodes - 1);
    let xi_at = |j: usize| if j + 1 == nodes { xi_hi } else { xi_lo + S::from_count(j) * step };

    let mut u_nodes = Vec::with_capacity(nodes);
    let mut guess = u_lo;
    for j in 0..nodes {
        let u = invert_from(params, i, xi_at(j), u_range, guess)?;
        u_nodes.push(u);
        guess = u;
    }
    let hp: Vec<S> = u_nodes.iter().map(|&u| eta.prime(u)).collect();
    let mut hpp: Vec<S> = u_nodes.iter().map(|&u| eta.second(u) / maxwellian_deriv(params, i, u)).collect();

    // ∫ H' over [a, b] ⊂ cell with bracketing u-values for warm starts
    let integrate = |a: S, b: S, ua: S, ub: S| -> Result<S> {
        let half = S::lit(0.5) * (b - a);
        let mid = S::lit(0.5) * (a + b);
        let mut acc = S::zero();
        for (&x, &w) in gx.iter().zip(gw) {
            let guess = S::lit(0.5) * (ua + ub) + S::lit(0.5) * (ub - ua) * x;
            let u = invert_from(params, i, mid + half * x, u_range, guess)?;
            acc = acc + w * eta.prime(u);
        }
        Ok(acc * half)
    };

    let mut cumulative = Vec::with_capacity(nodes);
    cumulative.push(S::zero());
    for j in 0..nodes - 1 {
        let cell = integrate(xi_at(j), xi_at(j + 1), u_nodes[j], u_nodes[j + 1])?;
        cumulative.push(cumulative[j] + cell);
    }
    // anchor H_i(0) = 0; M_i(0) = 0 lies inside the table
    let pos = (-xi_lo / step).floor().to_usize().unwrap_or(0).min(nodes - 2);
    let u_zero = S::zero();
    let offset = cumulative[pos] + integrate(xi_at(pos), S::zero(), u_nodes[pos], u_zero)?;
    let h: Vec<S> = cumulative.iter().map(|&c| c - offset).collect();

    // Fritsch–Carlson limiter on the H' interpolant
    for j in 0..nodes - 1 {
        let delta = (hp[j + 1] - hp[j]) / step;
        if delta == S::zero() {
            hpp[j] = S::zero();
            hpp[j + 1] = S::zero();
            continue;
        }
        let alpha = hpp[j] / delta;
        let beta = hpp[j + 1] / delta;
        let r2 = alpha * alpha + beta * beta;
        if r2 > S::lit(9.0) {
            let tau = S::lit(3.0) / r2.sqrt();
            hpp[j] = tau * alpha * delta;
            hpp[j + 1] = tau * beta * delta;
        }
    }

    Ok(EntropyTable { xi_lo, xi_hi, step, h, hp, hpp })
}

fn apply<S: Scalar>(f: &Field<S>, g: impl Fn(S) -> Result<S>) -> Result<Field<S>> {
    let values = f.values().iter().map(|&x| g(x)).collect::<Result<Vec<S>>>()?;
    Field::from_values(f.grid(), values)
}

/// `∫ (H_1(f_1) + H_2(f_2)) dx`.
pub fn kinetic_entropy_total<S: Scalar>(entropy: &KineticEntropy<S>, state: &KineticState<S>) -> Result<S> {
    let h1 = apply(&state.f1, |x| entropy.h(Velocity::Plus, x))?;
    let h2 = apply(&state.f2, |x| entropy.h(Velocity::Minus, x))?;
    Ok(h1.integrate() + h2.integrate())
}

/// `(1/ε²) ∫ (|f_1 - M_1(u)|² + |f_2 - M_2(u)|²) dx`.
pub fn dissipation_functional<S: Scalar>(params: &ModelParams<S>, state: &KineticState<S>) -> S {
    let (m1, m2) = maxwellian_fields(params, &state.density());
    let sq = |f: &Field<S>, m: &Field<S>| f.zip_map(m, |a, b| (a - b) * (a - b)).expect("same grid").integrate();
    (sq(&state.f1, &m1) + sq(&state.f2, &m2)) / (params.eps() * params.eps())
}

/// Pointwise relative entropy `H(f) - H(𝓜) - H'(𝓜)·(f - 𝓜)` against the
/// perturbed Maxwellians of `u_bar`.
pub fn relative_entropy_density<S: Scalar>(
    entropy: &KineticEntropy<S>,
    params: &ModelParams<S>,
    state: &KineticState<S>,
    u_bar: &Field<S>,
    dx_u_bar: &Field<S>,
) -> Result<Field<S>> {
    let (parts1, parts2) = relative_parts(entropy, params, state, u_bar, dx_u_bar)?;
    parts1.add(&parts2)
}

/// Per-velocity relative entropy densities.
fn relative_parts<S: Scalar>(
    entropy: &KineticEntropy<S>,
    params: &ModelParams<S>,
    state: &KineticState<S>,
    u_bar: &Field<S>,
    dx_u_bar: &Field<S>,
) -> Result<(Field<S>, Field<S>)> {
    state.f1.check_same_grid(u_bar)?;
    let (pm1, pm2) = perturbed_maxwellians(params, u_bar, dx_u_bar)?;
    let part = |i: Velocity, f: &Field<S>, m: &Field<S>| -> Result<Field<S>> {
        let values = f
            .values()
            .iter()
            .zip(m.values())
            .map(|(&fi, &mi)| Ok(entropy.h(i, fi)? - entropy.h(i, mi)? - entropy.h_prime(i, mi)? * (fi - mi)))
            .collect::<Result<Vec<S>>>()?;
        Field::from_values(f.grid(), values)
    };
    Ok((part(Velocity::Plus, &state.f1, &pm1)?, part(Velocity::Minus, &state.f2, &pm2)?))
}

pub fn relative_entropy_total<S: Scalar>(
    entropy: &KineticEntropy<S>,
    params: &ModelParams<S>,
    state: &KineticState<S>,
    u_bar: &Field<S>,
    dx_u_bar: &Field<S>,
) -> Result<S> {
    Ok(relative_entropy_density(entropy, params, state, u_bar, dx_u_bar)?.integrate())
}

/// Relative entropy flux field
/// `Q̃ = (λ/ε)[(H_1(f_1) - H_1(𝓜_1) - H_1'(𝓜_1)(f_1 - 𝓜_1)) - (same for i = 2)]`.
pub fn relative_entropy_flux<S: Scalar>(
    entropy: &KineticEntropy<S>,
    params: &ModelParams<S>,
    state: &KineticState<S>,
    u_bar: &Field<S>,
    dx_u_bar: &Field<S>,
) -> Result<Field<S>> {
    let (p1, p2) = relative_parts(entropy, params, state, u_bar, dx_u_bar)?;
    let r = params.lambda() / params.eps();
    p1.zip_map(&p2, |a, b| r * (a - b))
}

/// `∫ ∂ₓQ̃ dx`, zero on the torus up to rounding.
pub fn relative_entropy_flux_total<S: Scalar>(
    entropy: &KineticEntropy<S>,
    params: &ModelParams<S>,
    state: &KineticState<S>,
    u_bar: &Field<S>,
    dx_u_bar: &Field<S>,
) -> Result<S> {
    Ok(relative_entropy_flux(entropy, params, state, u_bar, dx_u_bar)?.derivative().integrate())
}

/// `∫ η''(ū)(u - ū)² dx`.
pub fn quadratic_distance<S: Scalar>(eta: &QuadraticEntropy<S>, u: &Field<S>, u_bar: &Field<S>) -> Result<S> {
    Ok(u.zip_map(u_bar, |a, b| eta.second(b) * (a - b) * (a - b))?.integrate())
}

#[derive(Clone, Debug)]
pub struct MinimumPrincipleReport<S> {
    pub samples: usize,
    /// `min (H(f) - H(M(f_1 + f_2)))`.
    pub worst_margin: S,
    /// Samples with margin below `-tolerance`.
    pub violations: usize,
    pub tolerance: S,
    /// `max |H(M(u)) - η(u)|` over the samples.
    pub equilibrium_residual: S,
}

impl<S: Scalar> MinimumPrincipleReport<S> {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks `H(f) ≥ H(M(u)) = η(u)`, `u = f_1 + f_2`, on each sample (tolerance 1e-12).
pub fn minimum_principle_check<S: Scalar>(
    entropy: &KineticEntropy<S>,
    params: &ModelParams<S>,
    samples: &[(S, S)],
) -> Result<MinimumPrincipleReport<S>> {
    let tolerance = S::lit(1e-12);
    let mut worst = S::infinity();
    let mut violations = 0;
    let mut eq_res = S::zero();
    for &(f1, f2) in samples {
        let u = f1 + f2;
        let at_eq = entropy.total(maxwellian(params, Velocity::Plus, u), maxwellian(params, Velocity::Minus, u))?;
        let margin = entropy.total(f1, f2)? - at_eq;
        eq_res = eq_res.max((at_eq - entropy.eta().value(u)).abs());
        if margin < -tolerance {
            violations += 1;
        }
        worst = worst.min(margin);
    }
    Ok(MinimumPrincipleReport {
        samples: samples.len(),
        worst_margin: worst,
        violations,
        tolerance,
        equilibrium_residual: eq_res,
    })
}

/// `max_u max_i |H_i'(M_i(u)) - η'(u)|`.
pub fn construction_residual<S: Scalar>(entropy: &KineticEntropy<S>, params: &ModelParams<S>, us: &[S]) -> Result<S> {
    let mut worst = S::zero();
    for &u in us {
        for i in Velocity::BOTH {
            let r = entropy.h_prime(i, maxwellian(params, i, u))? - entropy.eta().prime(u);
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// `max_u |H_1(M_1(u)) + H_2(M_2(u)) - η(u)|`.
pub fn equilibrium_residual<S: Scalar>(entropy: &KineticEntropy<S>, params: &ModelParams<S>, us: &[S]) -> Result<S> {
    let mut worst = S::zero();
    for &u in us {
        let h = entropy.total(maxwellian(params, Velocity::Plus, u), maxwellian(params, Velocity::Minus, u))?;
        worst = worst.max((h - entropy.eta().value(u)).abs());
    }
    Ok(worst)
}

/// `max_u |H_i''(M_i(u)) - 2η''(u)|` for `i = 1, 2`.
pub fn second_derivative_residual<S: Scalar>(
    entropy: &KineticEntropy<S>,
    params: &ModelParams<S>,
    us: &[S],
) -> Result<[S; 2]> {
    let mut out = [S::zero(); 2];
    for &u in us {
        for i in Velocity::BOTH {
            let r = entropy.h_second(i, maxwellian(params, i, u))? - S::lit(2.0) * entropy.eta().second(u);
            out[slot(i)] = out[slot(i)].max(r.abs());
        }
    }
    Ok(out)
}

/// `max_x |H_i'(𝓜_i(ū)) - η'(ū) ± ελη''(ū)∂ₓū|` for `i = 1, 2`
/// (`+` for `i = 1`, `-` for `i = 2`).
pub fn perturbed_derivative_residual<S: Scalar>(
    entropy: &KineticEntropy<S>,
    params: &ModelParams<S>,
    u_bar: &Field<S>,
    dx_u_bar: &Field<S>,
) -> Result<[S; 2]> {
    let (pm1, pm2) = perturbed_maxwellians(params, u_bar, dx_u_bar)?;
    let el = params.eps() * params.lambda();
    let eta = entropy.eta();
    let mut out = [S::zero(); 2];
    for (i, pm) in [(Velocity::Plus, &pm1), (Velocity::Minus, &pm2)] {
        for ((&m, &u), &d) in pm.values().iter().zip(u_bar.values()).zip(dx_u_bar.values()) {
            let r = entropy.h_prime(i, m)? - eta.prime(u) + i.sign::<S>() * el * eta.second(u) * d;
            out[slot(i)] = out[slot(i)].max(r.abs());
        }
    }
    Ok(out)
}

/// Dense 2×2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2<S>(pub [[S; 2]; 2]);

impl<S: Scalar> Mat2<S> {
    pub fn identity() -> Self {
        Mat2([[S::one(), S::zero()], [S::zero(), S::one()]])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[S::zero(); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        let mut d = S::zero();
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).abs());
            }
        }
        d
    }

    pub fn is_symmetric(&self, tol: S) -> bool {
        (self.0[0][1] - self.0[1][0]).abs() <= tol
    }

    pub fn det(&self) -> S {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
}

/// Symmetrizer algebra of the linear model in the variables `(u, ε²v)`:
/// `∂ₜU + A∂ₓU = -BU` with `A = [[0, 1/ε²], [λ², 0]]`, `B = [[0, 0], [-a, 1/ε²]]`.
#[derive(Clone, Debug)]
pub struct SymmetrizerBundle<S> {
    pub a: Mat2<S>,
    pub b: Mat2<S>,
    /// `Σ = [[1, aε²], [aε², λ²ε²]]`.
    pub sigma: Mat2<S>,
    /// `Σ⁻¹ = (λ² - a²ε²)⁻¹ [[λ², -a], [-a, 1/ε²]]`.
    pub sigma_inv: Mat2<S>,
    /// `AΣ`, symmetric.
    pub a_tilde: Mat2<S>,
    /// `BΣ = diag(0, λ² - a²ε²)`.
    pub b_tilde: Mat2<S>,
    /// `λ² - 2a²ε² > 0`, the sufficient condition for positive definiteness.
    pub positive_definite: bool,
}

pub fn symmetrizer_bundle<S: Scalar>(params: &ModelParams<S>) -> Result<SymmetrizerBundle<S>> {
    let (a, lam, eps) = (params.flux().a(), params.lambda(), params.eps());
    let e2 = eps * eps;
    let l2 = lam * lam;
    let gap = l2 - a * a * e2;
    if gap == S::zero() {
        return Err(Error::DegenerateSymmetrizer { det: gap.as_f64() });
    }
    let z = S::zero();
    let a_mat = Mat2([[z, S::one() / e2], [l2, z]]);
    let b_mat = Mat2([[z, z], [-a, S::one() / e2]]);
    let sigma = Mat2([[S::one(), a * e2], [a * e2, l2 * e2]]);
    let sigma_inv = Mat2([[l2 / gap, -a / gap], [-a / gap, S::one() / (e2 * gap)]]);
    let certificate = l2 - S::lit(2.0) * a * a * e2 > S::zero();
    let actual = sigma.0[0][0] > z && sigma.det() > z;
    Ok(SymmetrizerBundle {
        a_tilde: a_mat.mul(&sigma),
        b_tilde: b_mat.mul(&sigma),
        a: a_mat,
        b: b_mat,
        sigma,
        sigma_inv,
        positive_definite: certificate && actual,
    })
}
