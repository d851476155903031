//! Gauss-Legendre panel quadrature.
//!
//! Everything downstream integrates smooth functions on panels, so a
//! single cached Legendre rule plus two panel strategies covers the
//! crate: uniform panels for smooth integrands and geometrically graded
//! panels toward an endpoint singularity (log or square-root type).
//! Panel sums are accumulated pairwise so results are reproducible and
//! stable for long panel lists.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Scalar values the integrators can accumulate: `f64` and `Complex64`.
pub trait Scalar:
    Copy + std::ops::Add<Output = Self> + std::ops::Mul<f64, Output = Self> + num_traits::Zero
{
}

impl<T> Scalar for T where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + num_traits::Zero
{
}

/// A Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Applies the rule to `f` on `[a, b]`.
    pub fn integrate<T: Scalar>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * w;
        }
        acc * half
    }
}

/// Legendre polynomial value and derivative at `x`.
fn legendre_pair(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let deriv = order as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, deriv)
}

/// Returns the cached `order`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Nodes are the roots of the Legendre polynomial, found by Newton
/// iteration from the Chebyshev-like initial guesses; weights are
/// `2 / ((1 - x^2) P'(x)^2)`. Rules are computed once per order and
/// shared.
pub fn gauss_legendre(order: usize) -> Arc<GaussRule> {
    assert!(order >= 2, "rule order must be at least 2");
    static CACHE: OnceLock<Mutex<BTreeMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    let mut guard = cache.lock().expect("rule cache poisoned");
    if let Some(rule) = guard.get(&order) {
        return rule.clone();
    }
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dpdx = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_pair(order, x);
            dpdx = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (p, dp) = legendre_pair(order, x);
        dpdx = if p.abs() > 0.0 { dp } else { dpdx };
        let w = 2.0 / ((1.0 - x * x) * dpdx * dpdx);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    let rule = Arc::new(GaussRule { nodes, weights });
    guard.insert(order, rule.clone());
    rule
}

/// Integrates `f` over `[a, b]` with `panels` uniform Gauss-Legendre
/// panels of the given order.
pub fn integrate_panels<T: Scalar>(
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
    mut f: impl FnMut(f64) -> T,
) -> T {
    assert!(panels >= 1);
    let rule = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let parts: Vec<T> = (0..panels)
        .map(|k| rule.integrate(a + k as f64 * h, a + (k + 1) as f64 * h, &mut f))
        .collect();
    pairwise_sum_of(&parts)
}

const GRADED_LEVELS: i32 = 100;

/// Integrates `f` over `[a, b]` when `f` has an integrable singularity
/// at the endpoint `a` (log or inverse square-root type).
///
/// Panels shrink geometrically toward `a` by factors of 2. Panels whose
/// width falls below roughly `1e-18` of the interval scale are dropped:
/// their exact contribution is negligible for integrable singularities,
/// and skipping them keeps evaluation points strictly inside `(a, b)`.
pub fn integrate_graded<T: Scalar>(a: f64, b: f64, order: usize, mut f: impl FnMut(f64) -> T) -> T {
    let len = b - a;
    if !(len > 0.0) {
        return T::zero();
    }
    let rule = gauss_legendre(order);
    // Stop while evaluation points are still distinguishable from the
    // singular endpoint; the skipped sliver is negligible for log and
    // inverse square-root singularities.
    let floor = (a.abs() * 1e-15).max(len * 1e-24).min(len * 0.25);
    let mut parts = Vec::with_capacity(GRADED_LEVELS as usize);
    let mut hi = b;
    for k in 1..=GRADED_LEVELS {
        let lo = a + len * 0.5f64.powi(k);
        if !(lo < hi) || hi - lo < floor {
            break;
        }
        parts.push(rule.integrate(lo, hi, &mut f));
        hi = lo;
    }
    pairwise_sum_of(&parts)
}

/// Integrates `f` over `[a, b]` with panels graded toward both
/// endpoints, for integrands singular (or nearly singular) at either
/// end.
pub fn integrate_graded_both<T: Scalar>(
    a: f64,
    b: f64,
    order: usize,
    mut f: impl FnMut(f64) -> T,
) -> T {
    let m = 0.5 * (a + b);
    let lower = integrate_graded(a, m, order, &mut f);
    let upper = integrate_graded_upper(m, b, order, &mut f);
    lower + upper
}

/// Like [`integrate_graded`] but with the singularity at `b`.
pub fn integrate_graded_upper<T: Scalar>(
    a: f64,
    b: f64,
    order: usize,
    mut f: impl FnMut(f64) -> T,
) -> T {
    let len = b - a;
    if !(len > 0.0) {
        return T::zero();
    }
    let rule = gauss_legendre(order);
    let floor = (b.abs() * 1e-15).max(len * 1e-24).min(len * 0.25);
    let mut parts = Vec::with_capacity(GRADED_LEVELS as usize);
    let mut lo = a;
    for k in 1..=GRADED_LEVELS {
        let hi = b - len * 0.5f64.powi(k);
        if !(hi > lo) || hi - lo < floor {
            break;
        }
        parts.push(rule.integrate(lo, hi, &mut f));
        lo = hi;
    }
    pairwise_sum_of(&parts)
}

/// Pairwise (cascade) summation of `f64` slices.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_sum_of(xs)
}

/// Pairwise summation for any accumulator scalar.
pub fn pairwise_sum_of<T: Scalar>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum_of(&xs[..mid]) + pairwise_sum_of(&xs[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rule_weights_sum_to_two() {
        for order in [2, 5, 8, 16, 33, 64] {
            let rule = gauss_legendre(order);
            assert_abs_diff_eq!(pairwise_sum(&rule.weights), 2.0, epsilon = 1e-13);
            for pair in rule.nodes.windows(2) {
                assert!(pair[0] < pair[1]);
            }
        }
    }

    #[test]
    fn exact_for_polynomials() {
        // An order-n rule integrates degree 2n-1 exactly.
        let rule = gauss_legendre(8);
        for deg in 0..=15 {
            let val: f64 = rule.integrate(-1.0, 3.0, |x| x.powi(deg));
            let exact = (3.0f64.powi(deg + 1) - (-1.0f64).powi(deg + 1)) / (deg as f64 + 1.0);
            assert_abs_diff_eq!(val, exact, epsilon = 1e-11 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn smooth_panel_integral() {
        let val = integrate_panels(0.0, std::f64::consts::PI, 16, 8, f64::sin);
        assert_abs_diff_eq!(val, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn graded_handles_log_singularity() {
        let val = integrate_graded(0.0, 1.0, 16, |x: f64| x.ln());
        assert_abs_diff_eq!(val, -1.0, epsilon = 1e-13);
        let upper = integrate_graded_upper(0.0, 1.0, 16, |x: f64| (1.0 - x).ln());
        assert_abs_diff_eq!(upper, -1.0, epsilon = 1e-13);
    }

    #[test]
    fn graded_handles_inverse_sqrt() {
        let val = integrate_graded(0.0, 4.0, 16, |x: f64| 1.0 / x.sqrt());
        assert_abs_diff_eq!(val, 4.0, epsilon = 5e-11);
    }

    #[test]
    fn complex_accumulation() {
        use num_complex::Complex64;
        let z = Complex64::new(0.3, 1.4);
        // integral of 1/(x - z) over [-1, 1] has a closed form.
        let val = integrate_panels(-1.0, 1.0, 8, 16, |x| 1.0 / (Complex64::new(x, 0.0) - z));
        let exact = ((1.0 - z) / (-1.0 - z)).ln();
        assert!((val - exact).norm() < 1e-13);
    }

    #[test]
    fn pairwise_matches_exact_sum() {
        let xs: Vec<f64> = (1..=1000).map(|k| 1.0 / k as f64).collect();
        let mut exact = 0.0f64;
        for &x in xs.iter().rev() {
            exact += x;
        }
        assert_abs_diff_eq!(pairwise_sum(&xs), exact, epsilon = 1e-12);
    }
}
