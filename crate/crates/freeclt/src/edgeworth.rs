//! First-order correction to the semicircle density in the free
//! central limit theorem, and the free Meixner comparison transform.
//!
//! For a standardized measure with third and fourth moments `m3, m4`
//! set, at convolution order `n`,
//!
//! ```text
//! a = m3 / sqrt(n),   d = (m4 - m3^2) / n,   b = d - 1/n,
//! e = (1 - b) / sqrt(1 - d).
//! ```
//!
//! The corrected approximant to the density of `mu_n` near `x + a` is
//!
//! ```text
//! v(x) = (c0 - a x - c2 x^2) p_w(e x),
//! c0 = 1 + d/2 - a^2 - 1/n,   c2 = b - a^2 - 1/n,
//! ```
//!
//! with `p_w` the standard semicircle density. Its total mass has the
//! closed form `c0/e - c2/e^3` and deviates from 1 at order `n^{-2}`.
//! The free Meixner law with parameters `(a, b, d)` has a reciprocal
//! transform in closed form that approximates the subordination map of
//! `mu_n`; the quintic certificate below bounds that approximation
//! through an exact polynomial identity.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cauchy::meixner_m_with_deriv;
use crate::measure::{mu_moments_from_tau, semicircle_density, Measure};
use crate::subordination::{solve_t, SolverOptions, TruncationContext};
use crate::{Error, Result};

/// Correction parameters at convolution order `n`.
#[derive(Debug, Clone, Copy)]
pub struct EdgeworthParams {
    /// Rescaled skewness `m3 / sqrt(n)`, also the recentering shift:
    /// `v(x)` approximates the power density at `x + a`.
    pub a: f64,
    /// `d - 1/n`.
    pub b: f64,
    /// `(m4 - m3^2) / n`.
    pub d: f64,
    /// `1/n`.
    pub inv_n: f64,
    /// Support rescaling `(1 - b) / sqrt(1 - d)`; the correction
    /// density lives on `[-2/e, 2/e]`.
    pub e: f64,
}

impl EdgeworthParams {
    /// Builds the parameters from raw third and fourth moments.
    ///
    /// The moments need not come from a unit-variance law (truncated
    /// moments are passed here too), but `d < 1` and `b < 1` must hold
    /// for the square roots involved.
    pub fn from_moments(m3: f64, m4: f64, n: u32) -> Result<EdgeworthParams> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "convolution order must be at least 2, got {n}"
            )));
        }
        let inv_n = 1.0 / n as f64;
        let d = (m4 - m3 * m3) * inv_n;
        let b = d - inv_n;
        if !(d < 1.0 && b < 1.0 && m3.is_finite() && m4.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "correction parameters out of range: d = {d}, b = {b}"
            )));
        }
        Ok(EdgeworthParams {
            a: m3 * inv_n.sqrt(),
            b,
            d,
            inv_n,
            e: (1.0 - b) / (1.0 - d).sqrt(),
        })
    }

    /// Parameters of the correction to `mu_n` for a standardized `mu`.
    pub fn from_measure(mu: &Measure, n: u32) -> Result<EdgeworthParams> {
        mu.validate()?;
        let mean = mu.mean();
        let var = mu.variance();
        if mean.abs() > 1e-9 || (var - 1.0).abs() > 1e-6 {
            return Err(Error::NormalizationViolated(format!(
                "need mean 0 and variance 1, got mean {mean:.3e}, variance {var}"
            )));
        }
        EdgeworthParams::from_moments(mu.moment(3), mu.moment(4), n)
    }

    /// Parameters of the input measure as recorded in a context. The
    /// comparison transform and the correction density always use the
    /// full measure's moments; only the solver sees the truncation.
    pub fn from_context(ctx: &TruncationContext) -> Result<EdgeworthParams> {
        let m = mu_moments_from_tau(&ctx.tau.moments, 4);
        EdgeworthParams::from_moments(m[3], m[4], ctx.n)
    }

    fn poly_coeffs(&self) -> (f64, f64) {
        let s = self.a * self.a + self.inv_n;
        (1.0 + 0.5 * self.d - s, self.b - s)
    }

    /// The signed corrected density `v(x)`. It approximates the
    /// density of the rescaled power at `x + a` and may dip slightly
    /// below zero near the support edges.
    pub fn correction_density(&self, x: f64) -> f64 {
        let (c0, c2) = self.poly_coeffs();
        (c0 - self.a * x - c2 * x * x) * semicircle_density(1.0, self.e * x)
    }

    /// Total mass of the correction density: `c0/e - c2/e^3`.
    pub fn correction_mass(&self) -> f64 {
        let (c0, c2) = self.poly_coeffs();
        c0 / self.e - c2 / (self.e * self.e * self.e)
    }

    /// Edge weight `(4 - (e x)^2)_+^{3/2}` multiplying the windowed
    /// density residual; it suppresses the square-root edge layers
    /// where the expansion is not pointwise accurate.
    pub fn edge_weight(&self, x: f64) -> f64 {
        let v = 4.0 - (self.e * x) * (self.e * x);
        if v > 0.0 {
            v * v.sqrt()
        } else {
            0.0
        }
    }

    /// The Meixner comparison transform `M(z)` on the upper half
    /// plane, with its derivative.
    pub fn subordinate_with_deriv(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        if !(z.im > 0.0) {
            return Err(Error::NotUpperHalfPlane(z));
        }
        Ok(meixner_m_with_deriv(self.a, self.b, self.d, z))
    }

    /// The Meixner comparison transform `M(z)`.
    pub fn subordinate(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.subordinate_with_deriv(z)?.0)
    }

    /// The free Meixner law with these parameters, when they define a
    /// purely absolutely continuous one.
    pub fn meixner_measure(&self) -> Result<Measure> {
        let m = Measure::FreeMeixner {
            a: self.a,
            b: self.b,
            d: self.d,
        };
        m.validate()?;
        Ok(m)
    }
}

/// Symmetric window `[-half, half]` in the correction variable on
/// which the expansion is compared pointwise. Empty when the truncation
/// scale `eta` is too large for the order `n` at hand.
#[derive(Debug, Clone, Copy)]
pub struct SupportWindow {
    pub half: f64,
    /// The scale `eps1 = eps1_scale * (eta + 1/sqrt(n))` that set the
    /// edge inset `sqrt(eps1 / n)`.
    pub eps1: f64,
}

impl SupportWindow {
    pub fn is_empty(&self) -> bool {
        !(self.half > 0.0)
    }

    /// `count` uniform nodes across the window; empty when the window
    /// is empty or `count < 2`.
    pub fn nodes(&self, count: usize) -> Vec<f64> {
        if self.is_empty() || count < 2 {
            return Vec::new();
        }
        let h = 2.0 * self.half / (count - 1) as f64;
        (0..count).map(|i| -self.half + h * i as f64).collect()
    }
}

/// Window with half-width `2/e - sqrt(eps1 / n)`.
pub fn certified_window(params: &EdgeworthParams, eta: f64, eps1_scale: f64) -> SupportWindow {
    let eps1 = eps1_scale * (eta + params.inv_n.sqrt());
    SupportWindow {
        half: 2.0 / params.e - (eps1 * params.inv_n).sqrt(),
        eps1,
    }
}

/// Exact quintic certificate for the truncated subordinate.
///
/// For the exact solution `t = T_n(z)` of the truncated subordination
/// equation, the identity
///
/// ```text
/// t^5 - z t^4 + m2 t^3 + (z2/sqrt n) t^2 + (z3/n) t - z4 z / n^2 = 0,
/// z2 = m3 - z m2 / sqrt(n),
/// z3 = m4 + r - z m3 / sqrt(n),
/// z4 = m4 + r,
/// ```
///
/// holds with `m_k` the raw moments of the truncated measure and
/// `r = int x^5 / (v - x)` against it at `v = sqrt(n) t`. A solver
/// output therefore certifies itself: the residual of this polynomial
/// vanishes up to the solve error and detects wrong square-root
/// branches, which inflate it to order one.
pub fn quintic_residual(ctx: &TruncationContext, z: Complex64, t: Complex64) -> Complex64 {
    let n = ctx.n as f64;
    let sqn = n.sqrt();
    let m = &ctx.mu_star_moments;
    let v = sqn * t;
    let rho = match ctx.mu_star.as_ref().and_then(|m| m.atoms()) {
        Some(atoms) => atoms
            .iter()
            .map(|&(x, w)| w * x.powi(5) / (v - x))
            .sum::<Complex64>(),
        None => {
            let (f, _) = ctx.tau_star.tau.f_and_deriv(v);
            v.powi(5) / f - v.powi(4) - m[2] * v * v - m[3] * v - m[4]
        }
    };
    let z2 = m[3] - z * m[2] / sqn;
    let z3 = m[4] + rho - z * m[3] / sqn;
    let z4 = m[4] + rho;
    t.powi(5) - z * t.powi(4) + m[2] * t.powi(3) + z2 / sqn * t * t + z3 / n * t - z4 * z / (n * n)
}

/// Supremum of `|T_n(z) - M(z)| sqrt|(e(z - a))^2 - 4|` over a grid.
#[derive(Debug, Clone, Copy)]
pub struct GapReport {
    pub sup: f64,
    /// Grid point attaining the supremum.
    pub at: Complex64,
    pub points: usize,
}

/// Measures the gap between the solved truncated subordinate and the
/// closed-form Meixner transform of the input measure, weighted by the
/// square-root edge factor `sqrt|(e(z - a))^2 - 4|`.
///
/// Each vertical grid line is walked downward in `Im z` with warm
/// starts. Consecutive values are checked against the a priori bound
/// `|T(z') - T(z)| <= |z' - z| + (1 - 1/n) m2 (1/Im z' + 1/Im z)`;
/// a violation means the square-root branch slipped and the whole run
/// is rejected rather than reported as a large gap.
pub fn meixner_gap(
    ctx: &TruncationContext,
    re: &[f64],
    im: &[f64],
    opts: &SolverOptions,
) -> Result<GapReport> {
    let params = EdgeworthParams::from_context(ctx)?;
    if re.is_empty() || im.is_empty() {
        return Err(Error::InvalidConfig("empty gap grid".into()));
    }
    for &y in im {
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::NotUpperHalfPlane(Complex64::new(re[0], y)));
        }
    }
    if re.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig("non-finite gap grid".into()));
    }
    let mut ims = im.to_vec();
    ims.sort_by(|p, q| q.partial_cmp(p).unwrap());
    let drift = (1.0 - 1.0 / ctx.n as f64) * ctx.mu_star_moments[2];

    let cols = re
        .par_iter()
        .map(|&x| {
            let mut warm = None;
            let mut prev: Option<Complex64> = None;
            let mut best = (f64::NEG_INFINITY, Complex64::new(x, ims[0]));
            for &y in &ims {
                let z = Complex64::new(x, y);
                let sp = solve_t(ctx, z, warm, opts)?;
                if !sp.converged {
                    return Err(Error::SolveFailed {
                        z,
                        residual: sp.residual,
                        iterations: sp.iterations,
                    });
                }
                if let Some(zp) = prev {
                    let bound = (zp - z).norm() + drift * (1.0 / zp.im + 1.0 / z.im);
                    if (sp.value - warm.unwrap()).norm() > 1.0001 * bound + 1e-9 {
                        return Err(Error::BranchJump(format!(
                            "subordinate moved {} between {} and {}, bound {}",
                            (sp.value - warm.unwrap()).norm(),
                            zp,
                            z,
                            bound
                        )));
                    }
                }
                let w2 = (params.e * (z - params.a)).powu(2) - 4.0;
                let gap = (sp.value - params.subordinate(z)?).norm() * w2.norm().sqrt();
                if gap > best.0 {
                    best = (gap, z);
                }
                prev = Some(z);
                warm = Some(sp.value);
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sup = (f64::NEG_INFINITY, Complex64::new(re[0], ims[0]));
    for b in &cols {
        if b.0 > sup.0 {
            sup = *b;
        }
    }
    Ok(GapReport {
        sup: sup.0,
        at: sup.1,
        points: re.len() * ims.len(),
    })
}
