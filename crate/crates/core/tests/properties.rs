//! Property tests for the spectral calculus, the model algebra, the entropy
//! construction and the rate fits.

use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use relaxlab::entropy::{build_kinetic_entropy_with, relative_entropy_total, TableSpec};
use relaxlab::model::{kinetic_to_macro, macro_to_kinetic, maxwellian_deriv};
use relaxlab::*;

fn grid(n: usize) -> Arc<Grid64> {
    make_grid(n, 2.0 * PI).unwrap()
}

/// Real trigonometric polynomial with modes `1..=coeffs.len()`.
fn trig(g: &Arc<Grid64>, mean: f64, coeffs: &[(f64, f64)]) -> Field64 {
    Field::from_fn(g, |x| {
        mean + coeffs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let k = (k + 1) as f64;
                a * (k * x).cos() + b * (k * x).sin()
            })
            .sum::<f64>()
    })
}

fn coeffs(max_modes: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max_modes)
}

fn max_diff(a: &Field64, b: &Field64) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shifts_compose(c in coeffs(6), d1 in -10.0..10.0f64, d2 in -10.0..10.0f64) {
        let g = grid(32);
        let u = trig(&g, 0.3, &c);
        let two = u.shift(d1).shift(d2);
        let one = u.shift(d1 + d2);
        prop_assert!(max_diff(&two, &one) < 1e-12);
    }

    #[test]
    fn shift_matches_translation(c in coeffs(6), d in -5.0..5.0f64) {
        let g = grid(32);
        let u = trig(&g, 0.0, &c);
        let expected = Field::from_fn(&g, |x| {
            c.iter().enumerate().map(|(k, &(a, b))| {
                let k = (k + 1) as f64;
                a * (k * (x - d)).cos() + b * (k * (x - d)).sin()
            }).sum::<f64>()
        });
        prop_assert!(max_diff(&u.shift(d), &expected) < 1e-12);
    }

    #[test]
    fn integral_is_shift_invariant(c in coeffs(8), mean in -2.0..2.0f64, d in -5.0..5.0f64) {
        let g = grid(64);
        let u = trig(&g, mean, &c);
        prop_assert!((u.integrate() - 2.0 * PI * mean).abs() < 1e-12);
        prop_assert!((u.shift(d).integrate() - u.integrate()).abs() < 1e-12);
    }

    #[test]
    fn sobolev_norm_is_monotone_in_s(c in coeffs(8), s1 in 0.0..3.0f64, ds in 0.0..2.0f64) {
        let g = grid(64);
        let u = trig(&g, 0.1, &c);
        let lo = u.sobolev_norm(s1).unwrap();
        let hi = u.sobolev_norm(s1 + ds).unwrap();
        prop_assert!(lo <= hi * (1.0 + 1e-14));
    }

    #[test]
    fn parseval(c in coeffs(8), mean in -1.0..1.0f64) {
        let g = grid(64);
        let u = trig(&g, mean, &c);
        let l2 = u.l2_norm();
        prop_assert!((u.sobolev_norm(0.0).unwrap() - l2).abs() <= 1e-12 * (1.0 + l2));
    }

    #[test]
    fn interpolation_inequality_holds(c in coeffs(10), s in 0.6..3.0f64, frac in 0.05..0.95f64) {
        let g = grid(64);
        let u = trig(&g, 0.2, &c);
        let check = interpolation_check(&u, s, s * frac).unwrap();
        prop_assert!(check.holds, "{check:?}");
    }

    #[test]
    fn maxwellian_derivative_matches_finite_differences(
        u in -1.5..1.5f64,
        eps in 0.01..0.3f64,
        h2 in -0.3..0.3f64,
        h3 in -0.2..0.2f64,
    ) {
        let p = ModelParams::new(eps, 2.0, FluxFunction::new(1.0, vec![h2, h3])).unwrap();
        let step = 1e-5;
        for i in Velocity::BOTH {
            let fd = (maxwellian(&p, i, u + step) - maxwellian(&p, i, u - step)) / (2.0 * step);
            prop_assert!((fd - maxwellian_deriv(&p, i, u)).abs() < 1e-9);
        }
        let sum = maxwellian(&p, Velocity::Plus, u) + maxwellian(&p, Velocity::Minus, u);
        prop_assert!((sum - u).abs() <= 4.0 * f64::EPSILON * (1.0 + u.abs()));
    }

    #[test]
    fn change_of_variables_round_trips(c in coeffs(4), d in coeffs(4), eps in 0.001..1.0f64) {
        let g = grid(16);
        let p = ModelParams::new(eps, 2.0, FluxFunction::linear(1.0)).unwrap();
        let u = trig(&g, 0.0, &c);
        let v = trig(&g, 0.0, &d);
        let k = macro_to_kinetic(&p, &u, &v).unwrap();
        let back = kinetic_to_macro(&p, &k.f1, &k.f2).unwrap();
        for j in 0..g.n() {
            let (u0, v0) = (u.values()[j], v.values()[j]);
            let scale_u = u0.abs().max(eps * v0.abs() / 2.0);
            let scale_v = v0.abs().max(2.0 * u0.abs() / eps);
            prop_assert!((back.u.values()[j] - u0).abs() <= 4.0 * f64::EPSILON * scale_u);
            prop_assert!((back.v.values()[j] - v0).abs() <= 4.0 * f64::EPSILON * scale_v);
        }
    }

    #[test]
    fn rate_fit_recovers_power_laws(c in 1e-3..1e3f64, p in 0.1..2.0f64) {
        let pts: Vec<(f64, f64)> = [0.08, 0.04, 0.02, 0.01].iter().map(|&e: &f64| (e, c * e.powf(p))).collect();
        let fit = fit_rate(&pts).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-12);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-10);
    }

    #[test]
    fn maxwellian_inversion_round_trips(u in -1.9..1.9f64, eps in 0.01..0.2f64) {
        let p = ModelParams::new(eps, 2.0, FluxFunction::new(1.0, vec![0.1])).unwrap();
        for i in Velocity::BOTH {
            let back = invert_maxwellian(&p, i, maxwellian(&p, i, u), (-2.0, 2.0)).unwrap();
            prop_assert!((back - u).abs() < 1e-11);
        }
    }
}

/// Tabulated entropy shared by the entropy properties below.
fn tabulated() -> (ModelParams64, KineticEntropy64) {
    let p = ModelParams::new(0.05, 2.0, FluxFunction::new(1.0, vec![0.1])).unwrap();
    let spec = TableSpec { nodes: 1024, gauss_nodes: 16 };
    let e = build_kinetic_entropy_with(&p, QuadraticEntropy::canonical(), (-2.0, 2.0), spec).unwrap();
    (p, e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tabulated_entropy_obeys_minimum_principle(
        samples in prop::collection::vec((-1.0..1.0f64, -0.2..0.2f64), 1..40)
    ) {
        let (p, e) = tabulated();
        let states: Vec<(f64, f64)> = samples
            .iter()
            .map(|&(u, d)| (maxwellian(&p, Velocity::Plus, u) + d, maxwellian(&p, Velocity::Minus, u) - d))
            .collect();
        let report = minimum_principle_check(&e, &p, &states).unwrap();
        prop_assert!(report.holds(), "{report:?}");
    }

    #[test]
    fn relative_entropy_is_nonnegative(c in coeffs(3), d in coeffs(3), amp in 0.0..0.05f64) {
        let (p, e) = tabulated();
        let g = grid(32);
        let ubar = trig(&g, 0.0, &c).scale(0.3);
        let du = ubar.derivative();
        let (m1, m2) = perturbed_maxwellians(&p, &ubar, &du).unwrap();
        let pert = trig(&g, 0.0, &d).scale(amp);
        let state = KineticState::new(m1.add(&pert).unwrap(), m2.sub(&pert.scale(0.5)).unwrap(), 0.0).unwrap();
        let rel = relative_entropy_total(&e, &p, &state, &ubar, &du).unwrap();
        prop_assert!(rel >= -1e-14, "{rel}");
    }
}
