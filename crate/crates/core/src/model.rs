//! The continuous two-velocity model: flux, Maxwellians, perturbed
//! Maxwellians, the kinetic/macroscopic change of variables and the
//! monotonicity (subcharacteristic) check.

use crate::error::{Error, Result};
use crate::kinetic_solver::KineticState;
use crate::scalar::Scalar;
use crate::spectral_grid::Field;

/// Default number of samples used to certify monotonicity of the Maxwellians.
pub const MONOTONICITY_SAMPLES: usize = 10_001;

/// `f(u) = a·u + h(u)` with `h(u) = Σ_{j≥2} c_j u^j`.
///
/// `h_coeffs[0]` multiplies `u²`, so `f(0) = 0` and `f'(0) = a` hold by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxFunction<S> {
    a: S,
    h_coeffs: Vec<S>,
}

impl<S: Scalar> FluxFunction<S> {
    pub fn new(a: S, h_coeffs: Vec<S>) -> Self {
        Self { a, h_coeffs }
    }

    pub fn linear(a: S) -> Self {
        Self { a, h_coeffs: Vec::new() }
    }

    /// Builds `h` from `(degree, coefficient)` pairs. Nonzero terms of degree
    /// 0 or 1 are rejected: they would break `f(0) = 0` or `f'(0) = a`.
    pub fn from_terms(a: S, terms: &[(usize, S)]) -> Result<Self> {
        let mut h_coeffs = Vec::new();
        for &(degree, c) in terms {
            if degree < 2 {
                if c != S::zero() {
                    return Err(Error::InvalidParameter(format!(
                        "h has a term of degree {degree}; h must only contain terms of degree >= 2"
                    )));
                }
                continue;
            }
            if h_coeffs.len() < degree - 1 {
                h_coeffs.resize(degree - 1, S::zero());
            }
            h_coeffs[degree - 2] = h_coeffs[degree - 2] + c;
        }
        Ok(Self { a, h_coeffs })
    }

    pub fn a(&self) -> S {
        self.a
    }

    pub fn h_coeffs(&self) -> &[S] {
        &self.h_coeffs
    }

    pub fn is_linear(&self) -> bool {
        self.h_coeffs.iter().all(|&c| c == S::zero())
    }

    pub fn eval(&self, u: S) -> S {
        // Horner on h(u)/u², then f = a u + u² (...)
        let tail = self.h_coeffs.iter().rev().fold(S::zero(), |acc, &c| acc * u + c);
        self.a * u + u * u * tail
    }

    pub fn deriv(&self, u: S) -> S {
        let tail =
            self.h_coeffs.iter().enumerate().rev().fold(S::zero(), |acc, (j, &c)| acc * u + S::from_count(j + 2) * c);
        self.a + u * tail
    }
}

/// Relaxation parameter `eps`, kinetic speed `lambda` and the flux.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<S> {
    eps: S,
    lambda: S,
    flux: FluxFunction<S>,
}

impl<S: Scalar> ModelParams<S> {
    pub fn new(eps: S, lambda: S, flux: FluxFunction<S>) -> Result<Self> {
        if !(eps > S::zero()) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
        }
        if !(lambda > S::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
        }
        Ok(Self { eps, lambda, flux })
    }

    /// Parameters used only for limit computations, where `eps` is irrelevant.
    /// `eps = 0` is allowed here and nowhere else.
    pub fn limit(lambda: S, flux: FluxFunction<S>) -> Result<Self> {
        let mut p = Self::new(S::one(), lambda, flux)?;
        p.eps = S::zero();
        Ok(p)
    }

    pub fn with_eps(&self, eps: S) -> Result<Self> {
        Self::new(eps, self.lambda, self.flux.clone())
    }

    pub fn eps(&self) -> S {
        self.eps
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }

    pub fn flux(&self) -> &FluxFunction<S> {
        &self.flux
    }
}

/// Discrete velocity index: `Plus` (i = 1) moves at `+λ/ε`, `Minus` (i = 2) at `-λ/ε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Velocity {
    Plus,
    Minus,
}

impl Velocity {
    pub const BOTH: [Velocity; 2] = [Velocity::Plus, Velocity::Minus];

    /// 1 or 2.
    pub fn index(self) -> usize {
        match self {
            Velocity::Plus => 1,
            Velocity::Minus => 2,
        }
    }

    pub fn sign<S: Scalar>(self) -> S {
        match self {
            Velocity::Plus => S::one(),
            Velocity::Minus => -S::one(),
        }
    }
}

/// Conserved density `u` and flux variable `v`.
#[derive(Clone, Debug)]
pub struct MacroPair<S: Scalar> {
    pub u: Field<S>,
    pub v: Field<S>,
}

pub fn eval_flux<S: Scalar>(flux: &FluxFunction<S>, u: S) -> S {
    flux.eval(u)
}

pub fn eval_flux_deriv<S: Scalar>(flux: &FluxFunction<S>, u: S) -> S {
    flux.deriv(u)
}

/// `M_i(u) = u/2 ± ε f(u)/(2λ)`.
pub fn maxwellian<S: Scalar>(params: &ModelParams<S>, i: Velocity, u: S) -> S {
    let half = S::lit(0.5);
    half * u + i.sign::<S>() * params.eps * params.flux.eval(u) / (S::lit(2.0) * params.lambda)
}

/// `M_i'(u) = 1/2 ± ε f'(u)/(2λ)`.
pub fn maxwellian_deriv<S: Scalar>(params: &ModelParams<S>, i: Velocity, u: S) -> S {
    let half = S::lit(0.5);
    half + i.sign::<S>() * params.eps * params.flux.deriv(u) / (S::lit(2.0) * params.lambda)
}

/// `f(u)` sampled on the grid and filtered by the 2/3 rule.
pub fn flux_field<S: Scalar>(params: &ModelParams<S>, u: &Field<S>) -> Field<S> {
    let f = u.map(|x| params.flux.eval(x));
    if params.flux.is_linear() {
        f
    } else {
        f.dealias()
    }
}

/// Maxwellian fields `(M_1(u), M_2(u))` with a dealiased flux.
///
/// `M_1 + M_2 = u` holds sample by sample.
pub fn maxwellian_fields<S: Scalar>(params: &ModelParams<S>, u: &Field<S>) -> (Field<S>, Field<S>) {
    let f = flux_field(params, u);
    let c = params.eps / (S::lit(2.0) * params.lambda);
    let half = S::lit(0.5);
    let m1 = u.zip_map(&f, |ui, fi| half * ui + c * fi).expect("same grid");
    let m2 = u.zip_map(&f, |ui, fi| half * ui - c * fi).expect("same grid");
    (m1, m2)
}

/// `𝓜_i(u) = M_i(u) ∓ (ελ/2) ∂ₓu`, the equilibrium densities of the diffusive regime.
pub fn perturbed_maxwellian<S: Scalar>(
    params: &ModelParams<S>,
    i: Velocity,
    u: &Field<S>,
    dx_u: &Field<S>,
) -> Result<Field<S>> {
    let (m1, m2) = perturbed_maxwellians(params, u, dx_u)?;
    Ok(match i {
        Velocity::Plus => m1,
        Velocity::Minus => m2,
    })
}

/// Both perturbed Maxwellians at once.
pub fn perturbed_maxwellians<S: Scalar>(
    params: &ModelParams<S>,
    u: &Field<S>,
    dx_u: &Field<S>,
) -> Result<(Field<S>, Field<S>)> {
    u.check_same_grid(dx_u)?;
    let (m1, m2) = maxwellian_fields(params, u);
    let c = params.eps * params.lambda / S::lit(2.0);
    Ok((m1.zip_map(dx_u, |m, d| m - c * d)?, m2.zip_map(dx_u, |m, d| m + c * d)?))
}

/// `min_u (1 - ε|f'(u)|/λ)` over `n_samples` equispaced points of `[u_lo, u_hi]`.
///
/// A positive value certifies `M_1' > 0` and `M_2' > 0` on the samples.
pub fn monotonicity_margin<S: Scalar>(params: &ModelParams<S>, u_lo: S, u_hi: S, n_samples: usize) -> S {
    let n = n_samples.max(2);
    let step = (u_hi - u_lo) / S::from_count(n - 1);
    (0..n)
        .map(|j| {
            let u = if j == n - 1 { u_hi } else { u_lo + S::from_count(j) * step };
            S::one() - params.eps * params.flux.deriv(u).abs() / params.lambda
        })
        .fold(S::infinity(), S::min)
}

/// Certifies monotonicity on `[u_lo, u_hi]` and returns the margin shrunk by 10%.
pub fn certify_monotonicity<S: Scalar>(params: &ModelParams<S>, u_lo: S, u_hi: S) -> Result<S> {
    if !(u_lo < u_hi) {
        return Err(Error::InvalidParameter(format!("empty range [{u_lo}, {u_hi}]")));
    }
    let margin = monotonicity_margin(params, u_lo, u_hi, MONOTONICITY_SAMPLES);
    if margin > S::zero() {
        Ok(S::lit(0.9) * margin)
    } else {
        Err(Error::MonotonicityViolation { lo: u_lo.as_f64(), hi: u_hi.as_f64(), margin: margin.as_f64() })
    }
}

/// `u = f_1 + f_2`, `v = (λ/ε)(f_1 - f_2)`.
pub fn kinetic_to_macro<S: Scalar>(params: &ModelParams<S>, f1: &Field<S>, f2: &Field<S>) -> Result<MacroPair<S>> {
    let r = params.lambda / params.eps;
    Ok(MacroPair { u: f1.add(f2)?, v: f1.zip_map(f2, |a, b| r * (a - b))? })
}

/// `f_1 = u/2 + εv/(2λ)`, `f_2 = u/2 - εv/(2λ)`, returned at time zero.
pub fn macro_to_kinetic<S: Scalar>(params: &ModelParams<S>, u: &Field<S>, v: &Field<S>) -> Result<KineticState<S>> {
    let c = params.eps / (S::lit(2.0) * params.lambda);
    let half = S::lit(0.5);
    Ok(KineticState {
        f1: u.zip_map(v, |ui, vi| half * ui + c * vi)?,
        f2: u.zip_map(v, |ui, vi| half * ui - c * vi)?,
        time: S::zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_grid::make_grid;
    use std::f64::consts::PI;

    fn quad_flux(a: f64, c2: f64) -> FluxFunction<f64> {
        FluxFunction::new(a, vec![c2])
    }

    fn params(eps: f64, lambda: f64, flux: FluxFunction<f64>) -> ModelParams<f64> {
        ModelParams::new(eps, lambda, flux).unwrap()
    }

    #[test]
    fn flux_examples() {
        assert_eq!(eval_flux(&FluxFunction::linear(1.0), 2.0), 2.0);
        let f = FluxFunction::new(0.7, vec![0.3, -1.2, 4.0]);
        assert_eq!(eval_flux(&f, 0.0), 0.0);
        assert_eq!(eval_flux_deriv(&f, 0.0), 0.7);
        assert_eq!(eval_flux(&quad_flux(1.0, 1.0), 2.0), 6.0);
        assert_eq!(eval_flux_deriv(&quad_flux(1.0, 1.0), 2.0), 5.0);
        assert_eq!(eval_flux_deriv(&FluxFunction::linear(1.0), -3.5), 1.0);
    }

    #[test]
    fn from_terms_rejects_low_degree() {
        assert!(FluxFunction::from_terms(1.0, &[(1, 0.3)]).is_err());
        assert!(FluxFunction::from_terms(1.0, &[(0, 0.3)]).is_err());
        let f = FluxFunction::from_terms(1.0, &[(3, 2.0), (2, 0.5), (1, 0.0)]).unwrap();
        assert_eq!(f.h_coeffs(), &[0.5, 2.0]);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0, FluxFunction::linear(1.0)).is_err());
        assert!(ModelParams::new(0.1, -1.0, FluxFunction::linear(1.0)).is_err());
    }

    #[test]
    fn maxwellian_examples() {
        let p = params(0.1, 2.0, FluxFunction::linear(1.0));
        assert!((maxwellian(&p, Velocity::Plus, 1.0) - 0.525).abs() < 1e-15);
        assert!((maxwellian(&p, Velocity::Minus, 1.0) - 0.475).abs() < 1e-15);
        assert_eq!(maxwellian(&p, Velocity::Plus, 0.0), 0.0);
        assert_eq!(maxwellian(&p, Velocity::Minus, 0.0), 0.0);
        let q = params(0.3, 1.7, FluxFunction::new(0.4, vec![1.3, -0.2]));
        assert_eq!(maxwellian(&q, Velocity::Plus, 3.0) + maxwellian(&q, Velocity::Minus, 3.0), 3.0);
    }

    #[test]
    fn maxwellian_deriv_examples() {
        let limit = ModelParams::limit(2.0, FluxFunction::new(1.0, vec![0.5])).unwrap();
        assert_eq!(maxwellian_deriv(&limit, Velocity::Plus, 1.3), 0.5);
        assert_eq!(maxwellian_deriv(&limit, Velocity::Minus, 1.3), 0.5);
        let p = params(0.1, 2.0, FluxFunction::linear(1.0));
        assert!((maxwellian_deriv(&p, Velocity::Plus, 4.0) - 0.525).abs() < 1e-15);
        let broken = params(1.0, 2.0, quad_flux(0.0, 1.0));
        assert!((maxwellian_deriv(&broken, Velocity::Minus, 3.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn perturbed_maxwellian_examples() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let p = params(0.1, 2.0, FluxFunction::linear(1.0));
        let u = Field::from_fn(&g, f64::sin);
        let du = u.derivative();
        let m1 = perturbed_maxwellian(&p, Velocity::Plus, &u, &du).unwrap();
        let m2 = perturbed_maxwellian(&p, Velocity::Minus, &u, &du).unwrap();
        assert!((m1.values()[0] + 0.1).abs() < 1e-14);
        assert!((m2.values()[0] - 0.1).abs() < 1e-14);
        for ((a, b), c) in m1.values().iter().zip(m2.values()).zip(u.values()) {
            assert!((a + b - c).abs() <= 2.0 * f64::EPSILON);
        }
        let c = Field::constant(&g, 0.8);
        let dc = c.derivative();
        let q = params(0.2, 1.5, quad_flux(1.0, 0.3));
        let mc = perturbed_maxwellian(&q, Velocity::Plus, &c, &dc).unwrap();
        let expected = maxwellian(&q, Velocity::Plus, 0.8);
        assert!(mc.values().iter().all(|v| (v - expected).abs() < 1e-14));
        let other = make_grid(16, 2.0 * PI).unwrap();
        assert!(perturbed_maxwellian(&p, Velocity::Plus, &u, &Field::zeros(&other)).is_err());
    }

    #[test]
    fn margin_examples() {
        let p = params(0.1, 2.0, FluxFunction::linear(1.0));
        assert!((monotonicity_margin(&p, -5.0, 5.0, 101) - 0.95).abs() < 1e-15);
        let limit = ModelParams::limit(2.0, quad_flux(1.0, 3.0)).unwrap();
        assert_eq!(monotonicity_margin(&limit, -5.0, 5.0, 11), 1.0);
        let broken = params(1.0, 1.0, quad_flux(0.0, 1.0));
        assert!((monotonicity_margin(&broken, -3.0, 3.0, 101) + 5.0).abs() < 1e-12);
        assert!(certify_monotonicity(&broken, -3.0, 3.0).is_err());
        assert!((certify_monotonicity(&p, -1.0, 1.0).unwrap() - 0.855).abs() < 1e-14);
    }

    #[test]
    fn change_of_variables_examples() {
        let g = make_grid(8, 1.0).unwrap();
        let p = params(0.1, 2.0, FluxFunction::linear(1.0));
        let m = kinetic_to_macro(&p, &Field::constant(&g, 0.525), &Field::constant(&g, 0.475)).unwrap();
        assert!(m.u.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert!(m.v.values().iter().all(|v| (v - 1.0).abs() < 1e-13));
        let k = macro_to_kinetic(&p, &Field::constant(&g, 1.0), &Field::constant(&g, 1.0)).unwrap();
        assert!(k.f1.values().iter().all(|v| (v - 0.525).abs() < 1e-15));
        assert!(k.f2.values().iter().all(|v| (v - 0.475).abs() < 1e-15));
        let eq = kinetic_to_macro(&p, &Field::constant(&g, 0.3), &Field::constant(&g, 0.3)).unwrap();
        assert!(eq.v.values().iter().all(|&v| v == 0.0));
        let k0 = macro_to_kinetic(&p, &Field::constant(&g, 0.6), &Field::zeros(&g)).unwrap();
        assert!(k0.f1.values().iter().chain(k0.f2.values()).all(|&v| v == 0.3));
    }
}
