//! Subordination for free additive convolution powers.
//!
//! For a centered probability measure `mu` and integer `n >= 2`, the
//! reciprocal transform of the n-fold free additive convolution
//! `mu^{boxplus n}` is `F_mu` composed with a subordinator `Z`: the
//! unique self-map of the upper half plane solving
//!
//! ```text
//! n Z(zeta) - (n - 1) F_mu(Z(zeta)) = zeta .
//! ```
//!
//! Everything about the rescaled power `mu_n` (the law of the
//! normalized sum in the free central limit theorem) follows from `Z`
//! by rescaling with `sqrt(n)`:
//!
//! ```text
//! S_n(z) = Z(sqrt(n) z) / sqrt(n),
//! G_{mu_n}(z) = sqrt(n) G_mu(sqrt(n) S_n(z)) .
//! ```
//!
//! The fixed-point map `w -> (zeta + (n-1) F_mu(w)) / n` is a contraction
//! deep inside the half plane but turns parabolic (multiplier -> 1) at
//! the density edges, where plain iteration stalls. [`solve_z`] therefore
//! runs a hybrid: monotone damped fixed-point steps to enter the basin,
//! then a damped Newton iteration on the residual, which converges
//! quadratically everywhere including the edge-adjacent strip.
//!
//! The tail truncation behind the quantitative error analysis also
//! lives here: [`eta_and_delta`] minimizes the truncation functional
//! `g_n(eps) = eps + (m_2(tau) eps^2)^{-1} int_{|u| > eps sqrt(n-1)} u^2 tau(du)`
//! over `eps in (0, 10^{-1/2}]`, and [`build_truncated`] assembles the
//! truncated representer `tau*`, the associated measure `mu*`, and the
//! quantities that the rate experiments consume.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cauchy::{
    extract_tau, g_deriv_unchecked, g_unchecked, measure_from_tau, neville_at_zero, TauMeasure,
    TauRepresentation,
};
use crate::measure::{mu_moments_from_tau, GridDensity, Measure};
use crate::{Error, Result};

/// Largest admissible truncation parameter, `10^{-1/2}`.
pub const DELTA_MAX: f64 = 0.316_227_766_016_837_94;
const DELTA_MIN: f64 = 1e-6;

/// Tuning knobs for the subordination solver.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Accept `w` once the equation residual is below
    /// `tol_factor * (1 + |zeta|)`.
    pub tol_factor: f64,
    /// Total iteration budget across both phases.
    pub max_iter: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_factor: 1e-12,
            max_iter: 500,
        }
    }
}

/// One solved subordination point.
#[derive(Debug, Clone, Copy)]
pub struct SolvedPoint {
    /// The equation's right-hand side (or the `mu_n`-plane point for
    /// [`solve_t`]; see its docs).
    pub z: Complex64,
    /// The solution value.
    pub value: Complex64,
    /// Final equation residual `|n w - (n-1) F(w) - zeta|`.
    pub residual: f64,
    pub iterations: u32,
    pub converged: bool,
}

trait HalfPlaneMap {
    /// `F(w)` and `F'(w)` for `w` in the upper half plane.
    fn f_fp(&self, w: Complex64) -> (Complex64, Complex64);
}

struct MeasureMap<'a>(&'a Measure);

impl HalfPlaneMap for MeasureMap<'_> {
    fn f_fp(&self, w: Complex64) -> (Complex64, Complex64) {
        let (g, gp) = g_deriv_unchecked(self.0, w);
        let f = 1.0 / g;
        (f, -gp * f * f)
    }
}

struct TauMap<'a>(&'a TauMeasure);

impl HalfPlaneMap for TauMap<'_> {
    fn f_fp(&self, w: Complex64) -> (Complex64, Complex64) {
        self.0.f_and_deriv(w)
    }
}

fn solve_power_equation(
    map: &dyn HalfPlaneMap,
    n: f64,
    zeta: Complex64,
    warm: Option<Complex64>,
    opts: &SolverOptions,
) -> SolvedPoint {
    let residual = |w: Complex64, f: Complex64| n * w - (n - 1.0) * f - zeta;
    // Rounding in n*w - (n-1)*F(w) caps the attainable residual at a
    // multiple of eps times the term magnitudes (the solution can sit
    // far above zeta, e.g. outside the support at large n), so the
    // tolerance carries a scale-aware floor.
    let tol_at = |w: Complex64, f: Complex64| {
        let floor = 8.0 * f64::EPSILON * (n * w.norm() + (n - 1.0) * f.norm() + zeta.norm());
        (opts.tol_factor * (1.0 + zeta.norm())).max(floor)
    };

    let mut w = match warm {
        Some(w0) if w0.im > 0.0 => w0,
        _ => zeta,
    };
    let (mut fw, mut fpw) = map.f_fp(w);
    let mut h = residual(w, fw);
    let mut tol = tol_at(w, fw);
    let mut best = (w, h.norm(), tol);
    let mut iterations = 0u32;

    // Alternate two phases until the residual meets the tolerance or
    // the budget runs out.
    //
    // * Plain fixed-point blocks iterate w <- (zeta + (n-1) F(w)) / n.
    //   The map self-maps the half plane (Im F >= Im w), and by the
    //   Denjoy-Wolff theorem plain iteration is globally attracted to
    //   the unique solution, although slowly where the multiplier
    //   approaches 1 (near density edges).
    // * Damped Newton on H(w) = n w - (n-1) F(w) - zeta converges
    //   quadratically inside its basin but can park at a local minimum
    //   of |H| from a poor start; when it stalls, the next fixed-point
    //   block makes global progress again.
    'outer: while h.norm() > tol && iterations < opts.max_iter {
        for _ in 0..40 {
            if h.norm() <= tol || iterations >= opts.max_iter {
                break;
            }
            w = (zeta + (n - 1.0) * fw) / n;
            let (fc, fpc) = map.f_fp(w);
            fw = fc;
            fpw = fpc;
            h = residual(w, fw);
            tol = tol_at(w, fw);
            iterations += 1;
            if h.norm() < best.1 {
                best = (w, h.norm(), tol);
            }
        }
        while h.norm() > tol && iterations < opts.max_iter {
            let hp = n - (n - 1.0) * fpw;
            if hp.norm() < 1e-14 {
                continue 'outer;
            }
            let dw = -h / hp;
            let mut lambda = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let cand = w + dw * lambda;
                if cand.im > 0.0 {
                    let (fc, fpc) = map.f_fp(cand);
                    let hc = residual(cand, fc);
                    if hc.norm() < h.norm() {
                        w = cand;
                        fw = fc;
                        fpw = fpc;
                        h = hc;
                        tol = tol_at(w, fw);
                        moved = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            iterations += 1;
            if !moved {
                continue 'outer;
            }
            if h.norm() < best.1 {
                best = (w, h.norm(), tol);
            }
        }
    }

    if best.1 < h.norm() {
        w = best.0;
    } else {
        best = (w, h.norm(), tol);
    }
    SolvedPoint {
        z: zeta,
        value: w,
        residual: best.1,
        iterations,
        converged: best.1 <= best.2,
    }
}

fn check_power_inputs(n: u32, zeta: Complex64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "convolution power needs n >= 2, got {n}"
        )));
    }
    if !(zeta.im > 0.0) {
        return Err(Error::NotUpperHalfPlane(zeta));
    }
    Ok(())
}

/// Solves the subordination equation
/// `n w - (n-1) F_mu(w) = zeta` for `zeta` in the upper half plane.
///
/// `warm` seeds the iteration (pass the solution at a nearby `zeta`
/// when marching along a grid); the solver falls back to `zeta` itself.
/// A returned point with `converged == false` carries the best residual
/// found; callers decide whether that is fatal.
pub fn solve_z(
    mu: &Measure,
    n: u32,
    zeta: Complex64,
    warm: Option<Complex64>,
    opts: &SolverOptions,
) -> Result<SolvedPoint> {
    check_power_inputs(n, zeta)?;
    Ok(solve_power_equation(
        &MeasureMap(mu),
        n as f64,
        zeta,
        warm,
        opts,
    ))
}

/// Transforms of the rescaled convolution power at one point.
#[derive(Debug, Clone, Copy)]
pub struct PowerPoint {
    /// Point in the `mu_n` plane.
    pub z: Complex64,
    /// `sqrt(n) z`, the subordination equation's right-hand side.
    pub zeta: Complex64,
    /// Subordinated point `Z(zeta)`.
    pub w: Complex64,
    /// `S_n(z) = Z(sqrt(n) z)/sqrt(n)`.
    pub s: Complex64,
    /// `G_{mu_n}(z)`.
    pub g: Complex64,
    /// `F_{mu_n}(z) = 1/g`.
    pub f: Complex64,
    pub residual: f64,
    pub iterations: u32,
}

/// Evaluates `G_{mu_n}` and friends at `z` in the upper half plane,
/// where `mu_n` is `mu^{boxplus n}` rescaled by `1/sqrt(n)`.
pub fn transform_of_power(
    mu: &Measure,
    n: u32,
    z: Complex64,
    warm: Option<Complex64>,
    opts: &SolverOptions,
) -> Result<PowerPoint> {
    let sqn = (n as f64).sqrt();
    let zeta = sqn * z;
    let sp = solve_z(mu, n, zeta, warm, opts)?;
    if !sp.converged {
        return Err(Error::SolveFailed {
            z: zeta,
            residual: sp.residual,
            iterations: sp.iterations,
        });
    }
    let g = sqn * g_unchecked(mu, sp.value);
    Ok(PowerPoint {
        z,
        zeta,
        w: sp.value,
        s: sp.value / sqn,
        g,
        f: 1.0 / g,
        residual: sp.residual,
        iterations: sp.iterations,
    })
}

/// Options for [`density_pn`].
#[derive(Debug, Clone)]
pub struct DensityOptions {
    /// Decreasing smoothing heights for Stieltjes inversion.
    pub ladder: Vec<f64>,
    pub solver: SolverOptions,
    /// A point is flagged when the extrapolation residual exceeds
    /// `flag_tol * (1 + |value|)`.
    pub flag_tol: f64,
    /// Allowed fraction of flagged points before the whole recovery
    /// fails.
    pub flag_budget: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            ladder: vec![1e-3, 5e-4, 2.5e-4],
            solver: SolverOptions::default(),
            flag_tol: 1e-6,
            flag_budget: 0.05,
        }
    }
}

/// A density recovered by Stieltjes inversion.
#[derive(Debug, Clone)]
pub struct RecoveredDensity {
    pub density: GridDensity,
    /// Indices where extrapolation did not settle; their values fall
    /// back to the smallest-height evaluation.
    pub flagged: Vec<usize>,
    /// Worst relative equation residual seen across all solves.
    pub max_equation_residual: f64,
}

/// Recovers the density of the rescaled convolution power `mu_n` on the
/// nodes `xs`.
///
/// Each column solves the subordination equation down the smoothing
/// ladder (warm-started from the previous height) and extrapolates
/// `-Im G_{mu_n}(x + i eps)/pi` to `eps = 0`. Columns are independent
/// and run in parallel; results are deterministic regardless of thread
/// count. Fails if more than `flag_budget` of the columns are flagged,
/// or if the recovered mass strays from 1 by more than the grid
/// tolerance.
pub fn density_pn(
    mu: &Measure,
    n: u32,
    xs: &[f64],
    opts: &DensityOptions,
) -> Result<RecoveredDensity> {
    if xs.len() < 2 {
        return Err(Error::NotEnoughData("density grid needs >= 2 nodes".into()));
    }
    if opts.ladder.is_empty() {
        return Err(Error::InvalidConfig("empty smoothing ladder".into()));
    }
    check_power_inputs(n, Complex64::new(0.0, opts.ladder[0]))?;
    let sqn = (n as f64).sqrt();
    let nf = n as f64;
    let columns: Vec<(f64, bool, f64)> = xs
        .par_iter()
        .map(|&x| {
            let map = MeasureMap(mu);
            let mut warm = None;
            let mut heights = Vec::with_capacity(opts.ladder.len());
            let mut solved_ok = true;
            let mut max_resid = 0.0f64;
            for &eps in &opts.ladder {
                let zeta = sqn * Complex64::new(x, eps);
                let sp = solve_power_equation(&map, nf, zeta, warm, &opts.solver);
                warm = Some(sp.value);
                solved_ok &= sp.converged;
                max_resid = max_resid.max(sp.residual / (1.0 + zeta.norm()));
                let g = sqn * g_unchecked(mu, sp.value);
                heights.push(-g.im / std::f64::consts::PI);
            }
            let est = neville_at_zero(&opts.ladder, &heights);
            let flagged = !solved_ok
                || est.residual > opts.flag_tol * (1.0 + est.value.abs())
                || est.value < -1e-6;
            let value = if flagged {
                heights.last().copied().unwrap_or(0.0).max(0.0)
            } else {
                est.value.max(0.0)
            };
            (value, flagged, max_resid)
        })
        .collect();
    let flagged: Vec<usize> = columns
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.1.then_some(i))
        .collect();
    let budget = (opts.flag_budget * xs.len() as f64).floor() as usize;
    if flagged.len() > budget {
        return Err(Error::FlagBudgetExceeded {
            flagged: flagged.len(),
            total: xs.len(),
            budget,
        });
    }
    let max_equation_residual = columns.iter().map(|c| c.2).fold(0.0, f64::max);
    let density = GridDensity::new(xs.to_vec(), columns.iter().map(|c| c.0).collect())?;
    Ok(RecoveredDensity {
        density,
        flagged,
        max_equation_residual,
    })
}

/// The minimizer of the truncation functional at level `n`.
#[derive(Debug, Clone, Copy)]
pub struct EtaDelta {
    /// Minimal value of the functional.
    pub eta: f64,
    /// Argmin over `(0, 10^{-1/2}]`.
    pub delta: f64,
    /// Truncation radius `delta * sqrt(n - 1)`.
    pub cut: f64,
    /// Second moment of the representer beyond the cut.
    pub tail_second_moment: f64,
}

/// Minimizes
/// `g_n(eps) = eps + (m_2(tau) eps^2)^{-1} int_{|u| > eps sqrt(n-1)} u^2 tau(du)`
/// over `eps in (0, 10^{-1/2}]`.
///
/// Errors with [`Error::DegenerateTau`] when `m_2(tau) = 0` (representer
/// concentrated at the origin, e.g. the symmetric two-point law), where
/// the functional is undefined.
///
/// The tail is piecewise constant in `eps` for atomic representers, so
/// the minimum sits either at a jump (an atom radius divided by
/// `sqrt(n-1)`), at a stationary point of `eps + C/eps^2`, or at the
/// right endpoint; all are tried as candidates on top of a log-spaced
/// scan with golden-section refinement.
pub fn eta_and_delta(rep: &TauRepresentation, n: u32) -> Result<EtaDelta> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "truncation level needs n >= 2, got {n}"
        )));
    }
    let m2 = rep.moments[2];
    // Relative threshold: representer extraction leaves ~1e-12 position
    // noise on atoms that are exactly at the origin, so an absolute
    // `m2 > 0` test would miss genuinely degenerate inputs.
    if !(m2 > 1e-18 * rep.total_mass.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateTau(format!(
            "second moment of the representer is {m2}"
        )));
    }
    let root = ((n - 1) as f64).sqrt();
    // Snapped cut so that a jump candidate r/root evaluates its tail at
    // exactly r despite the round trip (r/root)*root.
    let g = |eps: f64| -> f64 {
        let cut = snap_cut(&rep.tau, eps * root);
        eps + rep.tau.tail_second_moment(cut) / (m2 * eps * eps)
    };

    let mut candidates: Vec<f64> = Vec::with_capacity(1100);
    let log_lo = DELTA_MIN.ln();
    let log_hi = DELTA_MAX.ln();
    for i in 0..1024 {
        let t = i as f64 / 1023.0;
        candidates.push((log_lo + t * (log_hi - log_lo)).exp());
    }
    let mut radii: Vec<f64> = match &rep.tau {
        TauMeasure::Atoms(atoms) => atoms.iter().map(|&(u, _)| u.abs()).collect(),
        TauMeasure::SemicircleBody { t, cut } => vec![cut.min(2.0 * t.sqrt())],
    };
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    for &r in &radii {
        let eps_jump = r / root;
        if (DELTA_MIN..=DELTA_MAX).contains(&eps_jump) {
            candidates.push(eps_jump);
        }
        // Stationary point of eps + C/(m2 eps^2) on the flat segment
        // above this jump.
        let c_seg = rep.tau.tail_second_moment(r) / m2;
        if c_seg > 0.0 {
            let eps_st = (2.0 * c_seg).cbrt();
            if (DELTA_MIN..=DELTA_MAX).contains(&eps_st) {
                candidates.push(eps_st);
            }
        }
    }
    let c_full = rep.tau.tail_second_moment(0.0) / m2;
    let eps_st = (2.0 * c_full).cbrt();
    if (DELTA_MIN..=DELTA_MAX).contains(&eps_st) {
        candidates.push(eps_st);
    }
    candidates.push(DELTA_MAX);

    let mut best = (f64::INFINITY, DELTA_MAX);
    for &eps in &candidates {
        let val = g(eps);
        if val < best.0 || (val == best.0 && eps > best.1) {
            best = (val, eps);
        }
    }
    // Golden-section refinement in a window around the best candidate.
    let phi = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (best.1 * 0.8, (best.1 * 1.25).min(DELTA_MAX));
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        }
    }
    let refined = 0.5 * (a + b);
    let val = g(refined);
    if val < best.0 {
        best = (val, refined);
    }

    let (eta, delta) = best;
    let cut = snap_cut(&rep.tau, delta * root);
    Ok(EtaDelta {
        eta,
        delta,
        cut,
        tail_second_moment: rep.tau.tail_second_moment(cut),
    })
}

/// When the optimal cut lands within rounding of a support radius, the
/// minimizer is the jump candidate `r / sqrt(n-1)` and the round trip
/// `(r / root) * root` may fall an ulp short of `r`. Snapping up keeps
/// the boundary point inside the truncation, matching the strict-tail
/// convention of the functional.
fn snap_cut(tau: &TauMeasure, cut: f64) -> f64 {
    let near = |r: f64| r > cut && (r - cut) <= 1e-9 * r.max(1.0);
    match tau {
        TauMeasure::Atoms(atoms) => atoms
            .iter()
            .map(|&(u, _)| u.abs())
            .filter(|&r| near(r))
            .fold(cut, f64::max),
        TauMeasure::SemicircleBody { t, cut: c0 } => {
            let edge = c0.min(2.0 * t.sqrt());
            if near(edge) {
                edge
            } else {
                cut
            }
        }
    }
}

/// Everything the rate experiments need about the truncation of `mu`
/// at level `n`.
#[derive(Debug, Clone)]
pub struct TruncationContext {
    pub n: u32,
    pub eta: f64,
    pub delta: f64,
    /// Truncation radius `delta * sqrt(n-1)` in the representer plane.
    pub cut: f64,
    /// True when the representer's second moment vanishes and the
    /// truncation functional is undefined; `delta` is then pinned at
    /// `10^{-1/2}` and `eta` set to `1/sqrt(n)` (the generic scale for
    /// measures with all moments finite), and the truncation is a
    /// no-op.
    pub degenerate: bool,
    /// Representer of the input measure.
    pub tau: TauRepresentation,
    /// Truncated representer.
    pub tau_star: TauRepresentation,
    /// Representer mass removed by the cut.
    pub tail_mass: f64,
    /// The measure represented by `tau*`, when it is expressible in
    /// the measure model (always for atomic input; `None` when cutting
    /// a continuous representer, whose recovered measure is a density
    /// plus boundary atoms).
    pub mu_star: Option<Measure>,
    /// Raw moments `m_0 .. m_4` of `mu*`, exact via the Laurent
    /// recursion from `tau*` whether or not `mu_star` materializes.
    pub mu_star_moments: Vec<f64>,
    /// Radius of the support of `mu*`.
    pub mu_star_radius: f64,
    /// Whether that radius is within `sqrt(n-1)/3`, the containment the
    /// asymptotic analysis predicts for large `n`. Small `n` may
    /// legitimately violate it; recorded as a diagnostic, not enforced.
    pub support_within_bound: bool,
}

/// Builds the truncation context for `mu` at level `n`.
///
/// Requires a standardized measure (mean 0, variance 1 within
/// tolerances): the truncation scales are calibrated to unit variance.
pub fn build_truncated(mu: &Measure, n: u32) -> Result<TruncationContext> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "truncation level needs n >= 2, got {n}"
        )));
    }
    if mu.mean().abs() > 1e-9 || (mu.variance() - 1.0).abs() > 1e-6 {
        return Err(Error::NormalizationViolated(format!(
            "truncation needs a standardized measure (mean {}, variance {})",
            mu.mean(),
            mu.variance()
        )));
    }
    let rep = extract_tau(mu)?;
    let (eta, delta, cut, degenerate) = match eta_and_delta(&rep, n) {
        Ok(ed) => (ed.eta, ed.delta, ed.cut, false),
        Err(Error::DegenerateTau(_)) => {
            let delta = DELTA_MAX;
            (
                1.0 / (n as f64).sqrt(),
                delta,
                delta * ((n - 1) as f64).sqrt(),
                true,
            )
        }
        Err(e) => return Err(e),
    };
    let tau_star = TauRepresentation::from_tau(rep.tau.restrict(cut));
    let tail_mass = (rep.total_mass - tau_star.total_mass).max(0.0);
    let mu_star = measure_from_tau(&tau_star.tau).ok();
    let mu_star_moments = mu_moments_from_tau(&tau_star.moments, 4);
    let mu_star_radius = match (&mu_star, &tau_star.tau) {
        (Some(m), _) => {
            let (lo, hi) = m.support();
            lo.abs().max(hi.abs())
        }
        (None, tau) => hybrid_support_radius(tau),
    };
    let bound = ((n - 1) as f64).sqrt() / 3.0;
    Ok(TruncationContext {
        n,
        eta,
        delta,
        cut,
        degenerate,
        tau: rep,
        tau_star,
        tail_mass,
        mu_star,
        mu_star_moments,
        mu_star_radius,
        support_within_bound: mu_star_radius <= bound,
    })
}

/// Outermost real zeros of `F(x) = x + int tau(du)/(u-x)` for a
/// truncated continuous representer; they bound the support of the
/// recovered hybrid measure.
fn hybrid_support_radius(tau: &TauMeasure) -> f64 {
    let edge = tau.max_abs();
    let mass = tau.total_mass();
    let f = |x: f64| (tau.f_and_deriv(Complex64::new(x, 0.0)).0).re;
    let mut radius = edge;
    for side in [1.0f64, -1.0] {
        // F runs from -inf (right of the cut) or to +inf (left of it);
        // push the outer bracket until the linear term dominates.
        let mut inner = side * (edge + 1e-9 * (edge + 1.0));
        let mut outer = side * (edge + mass.sqrt() + 1.0);
        while f(outer) * side <= 0.0 {
            outer += side * (mass.sqrt() + 1.0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (inner + outer);
            if f(mid) * side <= 0.0 {
                inner = mid;
            } else {
                outer = mid;
            }
            if (outer - inner).abs() < 1e-12 * outer.abs().max(1.0) {
                break;
            }
        }
        radius = radius.max(inner.abs().max(outer.abs()));
    }
    radius
}

/// Solves the truncated subordination problem and returns
/// `T_n(z) = W(sqrt(n) z)/sqrt(n)`, where `W` solves
/// `n w - (n-1) F_{mu*}(w) = zeta` with `F_{mu*}` given by the
/// truncated representer.
///
/// In the returned point, `z` is the `mu_n`-plane input, `value` is
/// `T_n(z)`, and the residual is reported for the `zeta`-plane
/// equation.
pub fn solve_t(
    ctx: &TruncationContext,
    z: Complex64,
    warm: Option<Complex64>,
    opts: &SolverOptions,
) -> Result<SolvedPoint> {
    let sqn = (ctx.n as f64).sqrt();
    let zeta = sqn * z;
    check_power_inputs(ctx.n, zeta)?;
    let warm_w = warm.map(|t| t * sqn);
    let sp = solve_power_equation(&TauMap(&ctx.tau_star.tau), ctx.n as f64, zeta, warm_w, opts);
    Ok(SolvedPoint {
        z,
        value: sp.value / sqn,
        residual: sp.residual,
        iterations: sp.iterations,
        converged: sp.converged,
    })
}
