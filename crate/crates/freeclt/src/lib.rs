//! Numerics for free additive convolution powers and the free central
//! limit theorem.
//!
//! For a compactly supported probability measure `mu` with mean 0 and
//! variance 1, the free convolution power `mu^{boxplus n}` rescaled by
//! `1/sqrt(n)` converges to the standard semicircle law. This crate
//! computes the rescaled power `mu_n` through analytic subordination of
//! Cauchy transforms, recovers its density by Stieltjes inversion,
//! evaluates free entropy and free Fisher information functionals, and
//! measures how fast everything converges.
//!
//! The main layers, bottom up:
//!
//! * [`quad`]: Gauss-Legendre panel quadrature, including graded panels
//!   for endpoint log singularities.
//! * [`measure`]: measure model (atomic, sampled density, semicircle,
//!   arcsine, free Meixner), moments, standardization, JSON literals.
//! * [`cauchy`]: Cauchy/reciprocal transforms, Stieltjes inversion with
//!   Richardson extrapolation, and the `tau` finite-measure
//!   representation of the reciprocal transform.
//! * [`subordination`]: the subordination fixed point for convolution
//!   powers, density recovery for `mu_n`, and the tail truncation that
//!   controls the error analysis.
//! * [`edgeworth`]: the first-order correction to the semicircle
//!   density, free Meixner approximants, and the quintic certificate
//!   for the subordination solution.
//! * [`functionals`]: logarithmic energy, free entropy, free Fisher
//!   information, L1 distances.
//! * [`harness`]: experiment configs, rate experiments, slope fits, CSV
//!   and JSON reports, and the self-check suite behind the CLI.
//!
//! The `freeclt` binary exposes the experiment harness; the `examples/`
//! directory shows the library API for each capability.
//!
//! Worker threads for the column-parallel density solves are capped by
//! the `FREECLT_THREADS` environment variable. All outputs are
//! deterministic for a fixed config, independent of thread count.

pub mod cauchy;
pub mod edgeworth;
pub mod functionals;
pub mod harness;
pub mod measure;
pub mod quad;
pub mod subordination;

use num_complex::Complex64;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("point {0} is not in the open upper half plane")]
    NotUpperHalfPlane(Complex64),
    #[error("zero variance: {0}")]
    ZeroVariance(String),
    #[error("operation requires an atomic measure, got {0}")]
    NotAtomic(String),
    #[error("tau representation is degenerate: {0}")]
    DegenerateTau(String),
    #[error("subordination solve failed at z = {z}: residual {residual:.3e} after {iterations} iterations")]
    SolveFailed {
        z: Complex64,
        residual: f64,
        iterations: u32,
    },
    #[error("density recovery flagged {flagged} of {total} grid points (budget {budget})")]
    FlagBudgetExceeded {
        flagged: usize,
        total: usize,
        budget: usize,
    },
    #[error("branch tracking failed: {0}")]
    BranchJump(String),
    #[error("functional not defined: {0}")]
    FunctionalUndefined(String),
    #[error("normalization violated: {0}")]
    NormalizationViolated(String),
    #[error("not enough data: {0}")]
    NotEnoughData(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use cauchy::{cauchy_g, reciprocal_f, stieltjes_density, TauMeasure, TauRepresentation};
pub use edgeworth::{certified_window, meixner_gap, quintic_residual, EdgeworthParams};
pub use functionals::{
    first_moment_log_kernel, fisher, free_entropy, l1_distance, log_energy, log_potential,
    relative_entropy, relative_fisher, FunctionalOptions, FunctionalReport,
};
pub use harness::{
    fit_slope, format_float17, gap_grid, init_threads, rate_row, rate_rows, render_report,
    run_check, run_density, run_rates, semicircle_reference, CheckResult, ExperimentConfig,
    RateFocus, RateRow, RunSummary, SlopeFit,
};
pub use measure::{GridDensity, Measure};
pub use subordination::{
    build_truncated, density_pn, eta_and_delta, solve_t, solve_z, transform_of_power,
    DensityOptions, SolverOptions, TruncationContext,
};
