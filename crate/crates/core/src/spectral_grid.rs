//! Uniform periodic grid with Fourier differentiation, exact translation,
//! quadrature and Sobolev norms.
//!
//! Fourier coefficients use the continuous normalization
//! `û_k = (1/L) ∫ u e^{-ikx} dx`, approximated exactly (for trigonometric
//! polynomials below the Nyquist mode) by `FFT(u)/n`. With this convention
//! `‖u‖_{H^s}² = L Σ_k (1 + k²)^s |û_k|²`, so `H^0` and `L²` coincide.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Periodic grid `x_j = j·L/n`, `j = 0..n`, with FFT plans attached.
pub struct PeriodicGrid<S: Scalar> {
    n: usize,
    length: S,
    spacing: S,
    /// Angular wavenumbers `2πk/L` in FFT storage order (0, 1, .., n/2, -n/2+1, .., -1).
    wavenumbers: Vec<S>,
    forward: Arc<dyn Fft<S>>,
    inverse: Arc<dyn Fft<S>>,
}

impl<S: Scalar> fmt::Debug for PeriodicGrid<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("n", &self.n)
            .field("length", &self.length)
            .field("spacing", &self.spacing)
            .finish()
    }
}

/// Builds a grid of `n` points (power of two, at least 8) on a period of `length`.
pub fn make_grid<S: Scalar>(n: usize, length: S) -> Result<Arc<PeriodicGrid<S>>> {
    PeriodicGrid::new(n, length)
}

impl<S: Scalar> PeriodicGrid<S> {
    pub fn new(n: usize, length: S) -> Result<Arc<Self>> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two and at least 8")));
        }
        if !(length > S::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("length = {length} must be positive")));
        }
        let two_pi_over_l = S::lit(2.0) * S::PI() / length;
        let wavenumbers = (0..n).map(|j| S::lit(signed_index(j, n) as f64) * two_pi_over_l).collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n,
            length,
            spacing: length / S::from_count(n),
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> S {
        self.length
    }

    pub fn spacing(&self) -> S {
        self.spacing
    }

    /// Wavenumbers in FFT storage order.
    pub fn wavenumbers(&self) -> &[S] {
        &self.wavenumbers
    }

    /// Sample locations `x_j = j·spacing`.
    pub fn points(&self) -> impl Iterator<Item = S> + '_ {
        (0..self.n).map(move |j| S::from_count(j) * self.spacing)
    }

    /// Highest retained integer mode under the 2/3 dealiasing rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    /// Two grids are interchangeable when they share `n` and `length`.
    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }

    fn forward(&self, values: &[S]) -> Vec<Complex<S>> {
        let mut buf: Vec<Complex<S>> = values.iter().map(|&v| Complex::new(v, S::zero())).collect();
        self.forward.process(&mut buf);
        let inv_n = S::one() / S::from_count(self.n);
        for c in &mut buf {
            *c = *c * inv_n;
        }
        buf
    }

    fn inverse_real(&self, mut coeffs: Vec<Complex<S>>) -> Vec<S> {
        self.inverse.process(&mut coeffs);
        coeffs.into_iter().map(|c| c.re).collect()
    }
}

/// Integer mode number of FFT slot `j`.
fn signed_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Norms used by the diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind<S> {
    L2,
    Linf,
    /// Sobolev `H^s` norm, `s ≥ 0`.
    Hs(S),
}

impl<S: Scalar> NormKind<S> {
    pub fn label(&self) -> String {
        match self {
            NormKind::L2 => "L2".to_string(),
            NormKind::Linf => "Linf".to_string(),
            NormKind::Hs(s) => format!("H{}", s),
        }
    }
}

impl<S: Scalar> fmt::Display for NormKind<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Accepts `L2`, `Linf`, `H1`, `H1.5`, `Hs(1.5)` (case-insensitive).
impl<S: Scalar> FromStr for NormKind<S> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "l2" => return Ok(NormKind::L2),
            "linf" | "inf" => return Ok(NormKind::Linf),
            _ => {}
        }
        let body = if let Some(inner) = t.strip_prefix("hs(").and_then(|r| r.strip_suffix(')')) {
            inner
        } else if let Some(rest) = t.strip_prefix('h') {
            rest
        } else {
            return Err(Error::InvalidParameter(format!("unknown norm '{s}'")));
        };
        let exponent: f64 = body.parse().map_err(|_| Error::InvalidParameter(format!("unknown norm '{s}'")))?;
        if !(exponent >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative Sobolev index in '{s}'")));
        }
        Ok(NormKind::Hs(S::lit(exponent)))
    }
}

/// Samples of a periodic function on a [`PeriodicGrid`].
#[derive(Clone, Debug)]
pub struct Field<S: Scalar> {
    grid: Arc<PeriodicGrid<S>>,
    values: Vec<S>,
}

impl<S: Scalar> Field<S> {
    pub fn from_values(grid: &Arc<PeriodicGrid<S>>, values: Vec<S>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidGrid(format!("expected {} samples, got {}", grid.n, values.len())));
        }
        Ok(Self { grid: Arc::clone(grid), values })
    }

    pub fn from_fn(grid: &Arc<PeriodicGrid<S>>, f: impl Fn(S) -> S) -> Self {
        let values = grid.points().map(f).collect();
        Self { grid: Arc::clone(grid), values }
    }

    pub fn constant(grid: &Arc<PeriodicGrid<S>>, c: S) -> Self {
        Self { grid: Arc::clone(grid), values: vec![c; grid.n] }
    }

    pub fn zeros(grid: &Arc<PeriodicGrid<S>>) -> Self {
        Self::constant(grid, S::zero())
    }

    /// Inverse of [`Field::spectrum`]; the imaginary part of the synthesis is dropped.
    pub fn from_spectrum(grid: &Arc<PeriodicGrid<S>>, coeffs: Vec<Complex<S>>) -> Result<Self> {
        if coeffs.len() != grid.n {
            return Err(Error::InvalidGrid(format!("expected {} coefficients, got {}", grid.n, coeffs.len())));
        }
        Ok(Self { grid: Arc::clone(grid), values: grid.inverse_real(coeffs) })
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid<S>> {
        &self.grid
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> S {
        self.values.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        Self { grid: Arc::clone(&self.grid), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(S, S) -> S) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: Arc::clone(&self.grid), values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: S) -> Self {
        self.map(|v| c * v)
    }

    /// Continuous-normalization Fourier coefficients in FFT order.
    pub fn spectrum(&self) -> Vec<Complex<S>> {
        self.grid.forward(&self.values)
    }

    /// Spectral derivative; the Nyquist mode is dropped.
    pub fn derivative(&self) -> Self {
        let n = self.grid.n;
        let mut coeffs = self.spectrum();
        for (j, c) in coeffs.iter_mut().enumerate() {
            if j == n / 2 {
                *c = Complex::new(S::zero(), S::zero());
            } else {
                let k = self.grid.wavenumbers[j];
                *c = Complex::new(-k * c.im, k * c.re);
            }
        }
        self.with_values(self.grid.inverse_real(coeffs))
    }

    /// Returns `x ↦ u(x - delta)` by phase rotation of every Fourier mode.
    ///
    /// The Nyquist mode is multiplied by `cos(k δ)` so the result stays real.
    pub fn shift(&self, delta: S) -> Self {
        let n = self.grid.n;
        let mut coeffs = self.spectrum();
        for (j, c) in coeffs.iter_mut().enumerate() {
            let phase = self.grid.wavenumbers[j] * delta;
            if j == n / 2 {
                *c = *c * phase.cos();
            } else {
                *c = *c * Complex::new(phase.cos(), -phase.sin());
            }
        }
        self.with_values(self.grid.inverse_real(coeffs))
    }

    /// Zeroes every mode above the 2/3-rule cutoff.
    pub fn dealias(&self) -> Self {
        let n = self.grid.n;
        let cutoff = self.grid.dealias_cutoff() as i64;
        let mut coeffs = self.spectrum();
        for (j, c) in coeffs.iter_mut().enumerate() {
            if signed_index(j, n).abs() > cutoff {
                *c = Complex::new(S::zero(), S::zero());
            }
        }
        self.with_values(self.grid.inverse_real(coeffs))
    }

    /// Fraction of the spectral energy carried by modes above the 2/3 cutoff.
    pub fn tail_fraction(&self) -> S {
        let n = self.grid.n;
        let cutoff = self.grid.dealias_cutoff() as i64;
        let (mut tail, mut total) = (S::zero(), S::zero());
        for (j, c) in self.spectrum().iter().enumerate() {
            let e = c.norm_sqr();
            total = total + e;
            if signed_index(j, n).abs() > cutoff {
                tail = tail + e;
            }
        }
        if total > S::zero() {
            tail / total
        } else {
            S::zero()
        }
    }

    /// `spacing · Σ u_j`: exact for trigonometric polynomials below Nyquist.
    pub fn integrate(&self) -> S {
        self.grid.spacing * self.values.iter().fold(S::zero(), |acc, &v| acc + v)
    }

    pub fn norm(&self, kind: NormKind<S>) -> Result<S> {
        match kind {
            NormKind::L2 => Ok(self.l2_norm()),
            NormKind::Linf => Ok(self.max_abs()),
            NormKind::Hs(s) => self.sobolev_norm(s),
        }
    }

    pub fn l2_norm(&self) -> S {
        (self.grid.spacing * self.values.iter().fold(S::zero(), |acc, &v| acc + v * v)).sqrt()
    }

    pub fn sobolev_norm(&self, s: S) -> Result<S> {
        if !(s >= S::zero()) {
            return Err(Error::InvalidParameter(format!("Sobolev index {s} must be nonnegative")));
        }
        let sum = self
            .spectrum()
            .iter()
            .zip(&self.grid.wavenumbers)
            .fold(S::zero(), |acc, (c, &k)| acc + (S::one() + k * k).powf(s) * c.norm_sqr());
        Ok((sum * self.grid.length).sqrt())
    }

    fn with_values(&self, values: Vec<S>) -> Self {
        Self { grid: Arc::clone(&self.grid), values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Arc<PeriodicGrid<f64>> {
        make_grid(n, 2.0 * PI).unwrap()
    }

    fn max_diff(a: &Field<f64>, b: &Field<f64>) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn grid_layout() {
        let g = grid(8);
        assert!((g.spacing() - PI / 4.0).abs() < 1e-15);
        let mut ks: Vec<i64> = g.wavenumbers().iter().map(|k| k.round() as i64).collect();
        ks.sort();
        assert_eq!(ks, vec![-3, -2, -1, 0, 1, 2, 3, 4]);
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(make_grid::<f64>(7, 1.0).is_err());
        assert!(make_grid::<f64>(4, 1.0).is_err());
        assert!(make_grid::<f64>(12, 1.0).is_err());
        assert!(make_grid::<f64>(16, 0.0).is_err());
        assert!(make_grid::<f64>(16, -1.0).is_err());
    }

    #[test]
    fn derivative_of_resolved_modes() {
        let g = grid(32);
        let d = Field::from_fn(&g, f64::sin).derivative();
        assert!(max_diff(&d, &Field::from_fn(&g, f64::cos)) < 1e-12);
        let d3 = Field::from_fn(&g, |x| (3.0 * x).sin()).derivative();
        assert!(max_diff(&d3, &Field::from_fn(&g, |x| 3.0 * (3.0 * x).cos())) < 1e-11);
        assert!(Field::constant(&g, 2.5).derivative().max_abs() < 1e-14);
    }

    #[test]
    fn shift_examples() {
        let g = grid(32);
        let u = Field::from_fn(&g, f64::sin);
        assert!(max_diff(&u.shift(PI), &u.scale(-1.0)) < 1e-14);
        let c = Field::constant(&g, 1.25);
        assert!(max_diff(&c.shift(0.37), &c) < 1e-15);
        let bump = Field::from_fn(&g, |x| (x.cos()).exp());
        assert!(max_diff(&bump.shift(2.0 * PI), &bump) < 1e-13);
        // non-grid-aligned shift of a mode is exact
        assert!(max_diff(&u.shift(0.1), &Field::from_fn(&g, |x| (x - 0.1).sin())) < 1e-14);
    }

    #[test]
    fn norm_examples() {
        let g = grid(64);
        let u = Field::from_fn(&g, f64::sin);
        assert!((u.norm(NormKind::L2).unwrap() - PI.sqrt()).abs() < 1e-13);
        assert!((u.norm(NormKind::Hs(1.0)).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-13);
        assert!((u.norm(NormKind::Linf).unwrap() - 1.0).abs() < 1e-2);
        let z = Field::zeros(&g);
        for kind in [NormKind::L2, NormKind::Linf, NormKind::Hs(2.0)] {
            assert_eq!(z.norm(kind).unwrap(), 0.0);
        }
        assert!(u.norm(NormKind::Hs(-1.0)).is_err());
    }

    #[test]
    fn integrate_examples() {
        let g = grid(64);
        assert!(Field::from_fn(&g, f64::sin).integrate().abs() < 1e-14);
        assert!((Field::constant(&g, 1.0).integrate() - 2.0 * PI).abs() < 1e-14);
        assert!((Field::from_fn(&g, |x| x.sin().powi(2)).integrate() - PI).abs() < 1e-12);
    }

    #[test]
    fn dealias_removes_top_third() {
        let g = grid(32);
        let u = Field::from_fn(&g, |x| x.sin() + (14.0 * x).cos());
        let d = u.dealias();
        assert!(max_diff(&d, &Field::from_fn(&g, f64::sin)) < 1e-14);
        assert!(u.tail_fraction() > 0.4);
        assert!(d.tail_fraction() < 1e-28);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = Field::zeros(&grid(16));
        let b = Field::zeros(&grid(32));
        assert!(matches!(a.add(&b), Err(Error::GridMismatch)));
    }

    #[test]
    fn norm_kind_parsing() {
        assert_eq!("L2".parse::<NormKind<f64>>().unwrap(), NormKind::L2);
        assert_eq!("linf".parse::<NormKind<f64>>().unwrap(), NormKind::Linf);
        assert_eq!("H1".parse::<NormKind<f64>>().unwrap(), NormKind::Hs(1.0));
        assert_eq!("Hs(1.5)".parse::<NormKind<f64>>().unwrap(), NormKind::Hs(1.5));
        assert!("W2".parse::<NormKind<f64>>().is_err());
    }

    #[test]
    fn single_precision_grid_works() {
        let g = make_grid::<f32>(32, 2.0 * std::f32::consts::PI).unwrap();
        let d = Field::from_fn(&g, f32::sin).derivative();
        let err = d.values().iter().zip(g.points()).map(|(v, x)| (v - x.cos()).abs()).fold(0.0, f32::max);
        assert!(err < 1e-5);
    }
}
