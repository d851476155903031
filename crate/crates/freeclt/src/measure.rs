//! Probability measures on the real line.
//!
//! The crate works with compactly supported probability measures in a
//! handful of concrete shapes: finitely many atoms, a piecewise-linear
//! sampled density, and three analytic families (semicircle, arcsine,
//! free Meixner). The JSON literal format is the tagged form used in
//! experiment configs, e.g.
//!
//! ```json
//! {"type": "atomic", "atoms": [[-2.0, 0.2], [0.5, 0.8]]}
//! {"type": "semicircle", "t": 1.0}
//! {"type": "two_atom", "p": 0.8}
//! {"type": "grid", "lo": -2.0, "hi": 2.0, "nodes": [...], "values": [...]}
//! ```

use serde::{Deserialize, Serialize};

use crate::quad;
use crate::{Error, Result};

/// Sum of atomic weights must match 1 this tightly.
pub const ATOMIC_MASS_TOL: f64 = 1e-9;
/// Sampled densities may lose this much mass (clamping, finite grids).
pub const GRID_MASS_TOL: f64 = 1e-3;

/// A sampled density, piecewise linear between strictly increasing
/// nodes and zero outside `[lo, hi]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridDensity {
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let (lo, hi) = match (nodes.first(), nodes.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(Error::InvalidMeasure("empty grid".into())),
        };
        let g = GridDensity {
            lo,
            hi,
            nodes,
            values,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.len() < 2 {
            return Err(Error::InvalidMeasure("grid needs at least 2 nodes".into()));
        }
        if self.nodes.len() != self.values.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} nodes vs {} values",
                self.nodes.len(),
                self.values.len()
            )));
        }
        for pair in self.nodes.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::InvalidMeasure(format!(
                    "grid nodes not strictly increasing near {}",
                    pair[0]
                )));
            }
        }
        if !self.nodes.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite grid node".into()));
        }
        for &v in &self.values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "grid density value {v} is negative or non-finite"
                )));
            }
        }
        if self.lo > self.nodes[0] || self.hi < *self.nodes.last().unwrap() {
            return Err(Error::InvalidMeasure(
                "grid nodes fall outside declared support".into(),
            ));
        }
        let mass = self.mass();
        if (mass - 1.0).abs() > GRID_MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "grid mass {mass} deviates from 1 by more than {GRID_MASS_TOL}"
            )));
        }
        Ok(())
    }

    /// Total mass; the trapezoid sum is exact for a piecewise-linear
    /// density.
    pub fn mass(&self) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| 0.5 * (v[0] + v[1]) * (x[1] - x[0]))
            .collect();
        quad::pairwise_sum(&terms)
    }

    /// Density value at `x` (zero outside the node range).
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x < self.nodes[0] || x > self.nodes[n - 1] {
            return 0.0;
        }
        let i = match self.nodes.partition_point(|&u| u <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let s = (x - x0) / (x1 - x0);
        self.values[i] * (1.0 - s) + self.values[i + 1] * s
    }

    /// k-th raw moment, exact per cell (Gauss rule of ample order on a
    /// linear density).
    pub fn moment(&self, k: u32) -> f64 {
        let order = (k as usize / 2 + 2).max(4);
        let rule = quad::gauss_legendre(order);
        let terms: Vec<f64> = self
            .nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| {
                let h = x[1] - x[0];
                rule.integrate(x[0], x[1], |u| {
                    let s = (u - x[0]) / h;
                    u.powi(k as i32) * (v[0] * (1.0 - s) + v[1] * s)
                })
            })
            .collect();
        quad::pairwise_sum(&terms)
    }
}

/// A compactly supported probability measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Measure {
    /// Finitely many atoms, sorted by position, positive weights
    /// summing to 1.
    Atomic { atoms: Vec<(f64, f64)> },
    /// Piecewise-linear sampled density.
    Grid(GridDensity),
    /// Semicircle law of variance `t`, support `[-2 sqrt t, 2 sqrt t]`.
    Semicircle { t: f64 },
    /// Arcsine law on `[-r, r]`.
    Arcsine { r: f64 },
    /// Free Meixner law with density
    /// `sqrt(4(1-d) - (1-b)^2 (x-a)^2) / (2 pi f(x))`,
    /// `f(x) = b x^2 + a (1-b) x + (1-d)`, on the interval where the
    /// root is real. Parameters must keep `f` positive there, so the
    /// law is purely absolutely continuous.
    FreeMeixner { a: f64, b: f64, d: f64 },
    /// The standardized two-point law with weight `p` on the positive
    /// atom: atoms at `-sqrt(p/(1-p))` and `sqrt((1-p)/p)`.
    TwoAtom { p: f64 },
}

impl Measure {
    /// The standardized skewed two-point law; `two_atom(0.5)` is the
    /// symmetric Bernoulli.
    pub fn two_atom_skewed(p: f64) -> Measure {
        Measure::TwoAtom { p }
    }

    pub fn semicircle(t: f64) -> Measure {
        Measure::Semicircle { t }
    }

    /// Parses a JSON literal and validates it.
    pub fn from_json_str(s: &str) -> Result<Measure> {
        let m: Measure = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Measure::Atomic { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidMeasure("no atoms".into()));
                }
                for pair in atoms.windows(2) {
                    if !(pair[0].0 < pair[1].0) {
                        return Err(Error::InvalidMeasure(format!(
                            "atoms not strictly increasing near x = {}",
                            pair[0].0
                        )));
                    }
                }
                let mut sum = 0.0;
                for &(x, w) in atoms {
                    if !x.is_finite() || !w.is_finite() || w <= 0.0 {
                        return Err(Error::InvalidMeasure(format!("bad atom ({x}, {w})")));
                    }
                    sum += w;
                }
                if (sum - 1.0).abs() > ATOMIC_MASS_TOL {
                    return Err(Error::InvalidMeasure(format!("atom weights sum to {sum}")));
                }
                Ok(())
            }
            Measure::Grid(g) => g.validate(),
            Measure::Semicircle { t } => {
                if *t > 0.0 && t.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidMeasure(format!("semicircle variance {t}")))
                }
            }
            Measure::Arcsine { r } => {
                if *r > 0.0 && r.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidMeasure(format!("arcsine radius {r}")))
                }
            }
            Measure::FreeMeixner { a, b, d } => validate_meixner(*a, *b, *d),
            Measure::TwoAtom { p } => {
                if *p > 0.0 && *p < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidMeasure(format!("two_atom weight {p}")))
                }
            }
        }
    }

    /// Closed support `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Measure::Atomic { atoms } => (atoms[0].0, atoms[atoms.len() - 1].0),
            Measure::Grid(g) => (g.nodes[0], *g.nodes.last().unwrap()),
            Measure::Semicircle { t } => {
                let r = 2.0 * t.sqrt();
                (-r, r)
            }
            Measure::Arcsine { r } => (-r, *r),
            Measure::FreeMeixner { a, b, d } => {
                let r = 2.0 * (1.0 - d).sqrt() / (1.0 - b);
                (a - r, a + r)
            }
            Measure::TwoAtom { p } => {
                let atoms = two_atom_atoms(*p);
                (atoms[0].0, atoms[1].0)
            }
        }
    }

    /// Density at `x` for absolutely continuous measures; `None` for
    /// atomic ones.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            Measure::Atomic { .. } | Measure::TwoAtom { .. } => None,
            Measure::Grid(g) => Some(g.eval(x)),
            Measure::Semicircle { t } => Some(semicircle_density(*t, x)),
            Measure::Arcsine { r } => {
                let v = r * r - x * x;
                Some(if v > 0.0 {
                    1.0 / (std::f64::consts::PI * v.sqrt())
                } else {
                    0.0
                })
            }
            Measure::FreeMeixner { a, b, d } => Some(meixner_density(*a, *b, *d, x)),
        }
    }

    /// Atom list for purely atomic measures.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Measure::Atomic { atoms } => Some(atoms.clone()),
            Measure::TwoAtom { p } => Some(two_atom_atoms(*p).to_vec()),
            _ => None,
        }
    }

    /// k-th raw moment.
    pub fn moment(&self, k: u32) -> f64 {
        match self {
            Measure::Atomic { atoms } => atomic_moment(atoms, k),
            Measure::TwoAtom { p } => atomic_moment(&two_atom_atoms(*p), k),
            Measure::Grid(g) => g.moment(k),
            Measure::Semicircle { t } => semicircle_moment(*t, k),
            Measure::Arcsine { r } => arcsine_moment(*r, k),
            Measure::FreeMeixner { a, b, d } => {
                let tau = meixner_tau_moments(*a, *b, *d, k.saturating_sub(2));
                mu_moments_from_tau(&tau, k)[k as usize]
            }
        }
    }

    /// Raw moments `m_0 .. m_kmax` as a vector.
    pub fn moments(&self, kmax: u32) -> Vec<f64> {
        (0..=kmax).map(|k| self.moment(k)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m1 = self.moment(1);
        self.moment(2) - m1 * m1
    }

    /// Pushforward under `x -> s x`, `s != 0`.
    pub fn scale(&self, s: f64) -> Result<Measure> {
        if s == 0.0 || !s.is_finite() {
            return Err(Error::InvalidMeasure(format!("scale factor {s}")));
        }
        let m = match self {
            Measure::Atomic { atoms } => {
                let mut atoms: Vec<(f64, f64)> = atoms.iter().map(|&(x, w)| (s * x, w)).collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                Measure::Atomic { atoms }
            }
            Measure::TwoAtom { p } => {
                let mut atoms: Vec<(f64, f64)> = two_atom_atoms(*p)
                    .iter()
                    .map(|&(x, w)| (s * x, w))
                    .collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                Measure::Atomic { atoms }
            }
            Measure::Grid(g) => {
                let sa = s.abs();
                let mut nodes: Vec<f64> = g.nodes.iter().map(|&x| s * x).collect();
                let mut values: Vec<f64> = g.values.iter().map(|&v| v / sa).collect();
                if s < 0.0 {
                    nodes.reverse();
                    values.reverse();
                }
                Measure::Grid(GridDensity::new(nodes, values)?)
            }
            Measure::Semicircle { t } => Measure::Semicircle { t: t * s * s },
            Measure::Arcsine { r } => Measure::Arcsine { r: r * s.abs() },
            Measure::FreeMeixner { a, b, d } => Measure::FreeMeixner {
                a: s * a,
                b: *b,
                d: 1.0 - s * s * (1.0 - d),
            },
        };
        m.validate()?;
        Ok(m)
    }

    /// Pushforward under `x -> x + c` (atomic and grid measures only;
    /// the analytic families stay centered by construction).
    pub fn shift(&self, c: f64) -> Result<Measure> {
        match self {
            Measure::Atomic { atoms } => Ok(Measure::Atomic {
                atoms: atoms.iter().map(|&(x, w)| (x + c, w)).collect(),
            }),
            Measure::TwoAtom { p } => Ok(Measure::Atomic {
                atoms: two_atom_atoms(*p)
                    .iter()
                    .map(|&(x, w)| (x + c, w))
                    .collect(),
            }),
            Measure::Grid(g) => Ok(Measure::Grid(GridDensity::new(
                g.nodes.iter().map(|&x| x + c).collect(),
                g.values.clone(),
            )?)),
            _ => Err(Error::InvalidMeasure(
                "shift is only defined for atomic and grid measures".into(),
            )),
        }
    }

    /// Affine map to mean 0, variance 1. Returns the standardized
    /// measure and the map `y = (x - shift) / scale` that was applied.
    pub fn standardize(&self) -> Result<(Measure, Affine)> {
        let mean = self.mean();
        let centered = match self {
            Measure::Atomic { .. } | Measure::Grid(_) | Measure::TwoAtom { .. } => {
                self.shift(-mean)?
            }
            _ => self.clone(),
        };
        // The second moment of the centered measure avoids the
        // cancellation in `m2 - mean^2` for far off-center inputs.
        let var = centered.moment(2);
        if !(var > 1e-14) {
            return Err(Error::ZeroVariance(format!(
                "variance {var} too small to standardize"
            )));
        }
        let sd = var.sqrt();
        let standardized = centered.scale(1.0 / sd)?;
        Ok((
            standardized,
            Affine {
                shift: mean,
                scale: sd,
            },
        ))
    }
}

/// The affine change of variables `y = (x - shift) / scale` recorded by
/// [`Measure::standardize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub shift: f64,
    pub scale: f64,
}

fn atomic_moment(atoms: &[(f64, f64)], k: u32) -> f64 {
    let terms: Vec<f64> = atoms.iter().map(|&(x, w)| w * x.powi(k as i32)).collect();
    quad::pairwise_sum(&terms)
}

/// Atoms of the standardized two-point law with weight `p` at the
/// positive point.
pub fn two_atom_atoms(p: f64) -> [(f64, f64); 2] {
    let q = 1.0 - p;
    [(-(p / q).sqrt(), q), ((q / p).sqrt(), p)]
}

/// Semicircle density of variance `t` at `x`.
pub fn semicircle_density(t: f64, x: f64) -> f64 {
    let v = 4.0 * t - x * x;
    if v > 0.0 {
        v.sqrt() / (2.0 * std::f64::consts::PI * t)
    } else {
        0.0
    }
}

/// Raw moments of the semicircle law: Catalan numbers times powers of
/// the variance.
pub fn semicircle_moment(t: f64, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    catalan(k / 2) * t.powi((k / 2) as i32)
}

fn arcsine_moment(r: f64, k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    // m_{2j} = binom(2j, j) (r/2)^{2j}
    let j = k / 2;
    central_binomial(j) * (0.5 * r).powi(k as i32)
}

fn catalan(j: u32) -> f64 {
    let mut c = 1.0f64;
    for i in 0..j {
        c = c * 2.0 * (2.0 * i as f64 + 1.0) / (i as f64 + 2.0);
    }
    c
}

fn central_binomial(j: u32) -> f64 {
    catalan(j) * (j as f64 + 1.0)
}

/// Moments of a measure from the moments of its reciprocal-transform
/// representer.
///
/// If `F_mu(z) = z + int tau(du) / (u - z)` then expanding
/// `G_mu = 1/F_mu` as a Laurent series at infinity gives the recursion
/// `m_l(mu) = sum_{j=0}^{l-2} m_j(tau) m_{l-2-j}(mu)` with
/// `m_0(mu) = 1`, `m_1(mu) = 0`. In particular `m_2(mu) = m_0(tau)`,
/// `m_3(mu) = m_1(tau)`, `m_4(mu) = m_2(tau) + m_0(tau)^2`.
///
/// `tau_moments[j]` must hold `m_j(tau)` for `j = 0 ..= kmax - 2`
/// (unused entries may be absent when `kmax < 2`).
pub fn mu_moments_from_tau(tau_moments: &[f64], kmax: u32) -> Vec<f64> {
    let kmax = kmax as usize;
    let mut m = vec![0.0; kmax + 1];
    m[0] = 1.0;
    for l in 2..=kmax {
        let mut acc = 0.0;
        for j in 0..=(l - 2) {
            acc += tau_moments[j] * m[l - 2 - j];
        }
        m[l] = acc;
    }
    m
}

/// Free Meixner density at `x` (zero outside the support interval).
pub fn meixner_density(a: f64, b: f64, d: f64, x: f64) -> f64 {
    let u = x - a;
    let disc = 4.0 * (1.0 - d) - (1.0 - b) * (1.0 - b) * u * u;
    if disc <= 0.0 {
        return 0.0;
    }
    let f = b * x * x + a * (1.0 - b) * x + (1.0 - d);
    disc.sqrt() / (2.0 * std::f64::consts::PI * f)
}

fn validate_meixner(a: f64, b: f64, d: f64) -> Result<()> {
    if !(b < 1.0 && d < 1.0 && a.is_finite()) {
        return Err(Error::InvalidMeasure(format!(
            "free Meixner parameters a={a} b={b} d={d} (need b < 1, d < 1)"
        )));
    }
    // f(x) = b x^2 + a(1-b) x + (1-d) must stay positive on the
    // support, else the law has atoms or the density degenerates.
    let r = 2.0 * (1.0 - d).sqrt() / (1.0 - b);
    let f = |x: f64| b * x * x + a * (1.0 - b) * x + (1.0 - d);
    let mut min_f = f(a - r).min(f(a + r));
    if b.abs() > 0.0 {
        let vertex = -a * (1.0 - b) / (2.0 * b);
        if (vertex - a).abs() < r {
            min_f = min_f.min(f(vertex));
        }
    }
    if min_f <= 1e-12 {
        return Err(Error::InvalidMeasure(format!(
            "free Meixner parameters a={a} b={b} d={d} give a vanishing denominator on the support"
        )));
    }
    Ok(())
}

/// Moments `m_0 .. m_jmax` of the representer of the free Meixner law:
/// a semicircle of variance `(1-d)/(1-b)^2` shifted by `a`, carrying
/// total mass `(1-d)/(1-b)`.
pub fn meixner_tau_moments(a: f64, b: f64, d: f64, jmax: u32) -> Vec<f64> {
    let mass = (1.0 - d) / (1.0 - b);
    let t = (1.0 - d) / ((1.0 - b) * (1.0 - b));
    (0..=jmax)
        .map(|j| {
            let mut acc = 0.0;
            let mut binom = 1.0f64;
            for i in 0..=j {
                if i > 0 {
                    binom = binom * (j - i + 1) as f64 / i as f64;
                }
                acc += binom * a.powi((j - i) as i32) * semicircle_moment(t, i);
            }
            mass * acc
        })
        .collect()
}
