//! Numerical laboratory for the diffusive limit of the two-velocity BGK
//! (Jin–Xin type) relaxation model on a periodic domain.
//!
//! The kinetic densities `f_1, f_2` move at `±λ/ε` and relax toward the
//! Maxwellians `M_{1,2}(u) = u/2 ± ε f(u)/(2λ)` at rate `1/ε²`. As `ε → 0`
//! the density `u = f_1 + f_2` approaches the solution `ū` of the viscous
//! conservation law `∂ₜū + ∂ₓf(ū) = λ²∂ₓₓū`.
//!
//! Modules:
//! - [`spectral_grid`]: periodic grid, spectral calculus and norms;
//! - [`model`]: flux, Maxwellians and the monotonicity certificate;
//! - [`kinetic_solver`]: Strang splitting of exact transport and exact relaxation;
//! - [`parabolic_reference`]: reference solver and closed-form linear solutions;
//! - [`entropy`]: kinetic entropies, relative entropy, dissipation, symmetrizer;
//! - [`convergence_lab`]: ε-sweeps, rate fits and report files.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below fix the precision.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convergence_lab;
pub mod entropy;
pub mod error;
pub mod kinetic_solver;
pub mod model;
pub mod parabolic_reference;
pub mod quadrature;
pub mod scalar;
pub mod spectral_grid;

pub use convergence_lab::{
    emit_report, fit_rate, interpolation_check, run_sweep, InterpolationCheck, MetaSection, RateFit, SweepConfig,
    SweepReport, SweepRow,
};
pub use entropy::{
    build_kinetic_entropy, build_linear_kinetic_entropy, dissipation_functional, invert_maxwellian,
    kinetic_entropy_total, minimum_principle_check, relative_entropy_flux_total, relative_entropy_total,
    symmetrizer_bundle, EntropyKind, KineticEntropy, Mat2, QuadraticEntropy, SymmetrizerBundle, TableSpec,
};
pub use error::{Error, Result};
pub use kinetic_solver::{
    init_well_prepared, run_kinetic, strang_step, DtRule, KineticState, KineticStepper, SolveConfig,
};
pub use model::{
    certify_monotonicity, maxwellian, monotonicity_margin, perturbed_maxwellians, FluxFunction, ModelParams, Velocity,
};
pub use parabolic_reference::{analytic_linear_solution, run_reference, Mode, ReferenceConfig, ReferenceSnapshot};
pub use rustfft::num_complex::Complex;
pub use scalar::Scalar;
pub use spectral_grid::{make_grid, Field, NormKind, PeriodicGrid};

pub type Grid64 = PeriodicGrid<f64>;
pub type Field64 = Field<f64>;
pub type FluxFunction64 = FluxFunction<f64>;
pub type ModelParams64 = ModelParams<f64>;
pub type KineticState64 = KineticState<f64>;
pub type SolveConfig64 = SolveConfig<f64>;
pub type KineticEntropy64 = KineticEntropy<f64>;
pub type SweepConfig64 = SweepConfig<f64>;
pub type SweepReport64 = SweepReport<f64>;

pub type Grid32 = PeriodicGrid<f32>;
pub type Field32 = Field<f32>;
pub type FluxFunction32 = FluxFunction<f32>;
pub type ModelParams32 = ModelParams<f32>;
pub type KineticState32 = KineticState<f32>;
pub type SolveConfig32 = SolveConfig<f32>;
pub type KineticEntropy32 = KineticEntropy<f32>;
pub type SweepConfig32 = SweepConfig<f32>;
pub type SweepReport32 = SweepReport<f32>;
