//! Initial data `u_0` for the `[init]` section.

use std::f64::consts::PI;
use std::sync::Arc;

use relaxlab::{Field64, Grid64};
use serde::{Deserialize, Serialize};

/// Periodic images summed for the Gaussian bump.
const GAUSS_IMAGES: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    /// `mean + amplitude·sin(2πx/L)`.
    Sin,
    /// `mean + amplitude·Σ_m exp(-(x - center - mL)²/(2·width²))`.
    GaussBump,
    /// `mean + amplitude·Σ_k coeffs[k-1]·sin(2πkx/L)`.
    Series,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSection {
    pub kind: InitKind,
    pub amplitude: f64,
    pub mean: f64,
    /// Bump center; defaults to `L/2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    pub width: f64,
    /// Sine coefficients of the `series` datum.
    pub coeffs: Vec<f64>,
}

impl Default for InitSection {
    fn default() -> Self {
        Self { kind: InitKind::Sin, amplitude: 1.0, mean: 0.0, center: None, width: 0.5, coeffs: Vec::new() }
    }
}

impl InitSection {
    pub fn build(&self, grid: &Arc<Grid64>) -> Result<Field64, String> {
        if !self.amplitude.is_finite() || !self.mean.is_finite() {
            return Err("init amplitude and mean must be finite".into());
        }
        let length = grid.length();
        let base = 2.0 * PI / length;
        let (amp, mean) = (self.amplitude, self.mean);
        let u0 = match self.kind {
            InitKind::Sin => Field64::from_fn(grid, |x| mean + amp * (base * x).sin()),
            InitKind::GaussBump => {
                if !(self.width > 0.0) {
                    return Err(format!("init width = {} must be positive", self.width));
                }
                let c = self.center.unwrap_or(0.5 * length);
                let w2 = 2.0 * self.width * self.width;
                Field64::from_fn(grid, |x| {
                    let bump: f64 = (-GAUSS_IMAGES..=GAUSS_IMAGES)
                        .map(|m| {
                            let d = x - c - f64::from(m) * length;
                            (-d * d / w2).exp()
                        })
                        .sum();
                    mean + amp * bump
                })
            }
            InitKind::Series => {
                if self.coeffs.is_empty() {
                    return Err("init kind 'series' needs a nonempty coeffs list".into());
                }
                Field64::from_fn(grid, |x| {
                    let s: f64 =
                        self.coeffs.iter().enumerate().map(|(k, b)| b * ((k + 1) as f64 * base * x).sin()).sum();
                    mean + amp * s
                })
            }
        };
        if !u0.is_finite() {
            return Err("initial datum is not finite".into());
        }
        Ok(u0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use relaxlab::make_grid;

    #[test]
    fn sin_and_series_agree() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let a = InitSection::default().build(&g).unwrap();
        let b = InitSection { kind: InitKind::Series, coeffs: vec![1.0], ..Default::default() }.build(&g).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() < 1e-15));
        assert!(a.integrate().abs() < 1e-12);
    }

    #[test]
    fn gaussian_bump_is_periodic_and_peaks_at_center() {
        let g = make_grid(64, 2.0 * PI).unwrap();
        let init = InitSection { kind: InitKind::GaussBump, center: Some(0.0), ..Default::default() };
        let u = init.build(&g).unwrap();
        let v = u.values();
        assert!(v[0] >= 1.0 && v.iter().all(|&y| y <= v[0]));
        assert!((v[1] - v[63]).abs() < 1e-14);
    }

    #[test]
    fn bad_data_is_rejected() {
        let g = make_grid(16, 1.0).unwrap();
        assert!(InitSection { kind: InitKind::Series, ..Default::default() }.build(&g).is_err());
        assert!(InitSection { kind: InitKind::GaussBump, width: 0.0, ..Default::default() }.build(&g).is_err());
    }
}
