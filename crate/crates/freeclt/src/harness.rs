//! Experiment harness: JSON-configured density, rate, and self-check
//! runs with deterministic file artifacts.
//!
//! A run is described by an [`ExperimentConfig`] — a measure literal,
//! the convolution orders to visit, grid resolution, the smoothing
//! ladder for Stieltjes inversion, and quadrature settings. Runs write
//! into an output directory:
//!
//! - `density_n<k>.csv` — recovered density of the rescaled power
//!   `mu_n` next to the corrected semicircle approximant and the
//!   edge-weighted residual,
//! - `rates.csv` — per-`n` convergence observables (entropy gap,
//!   Fisher gap, L1 distance, subordinate/Meixner gap),
//! - `summary.json` — machine-readable report with slope fits,
//!   warnings, and pass/fail checks.
//!
//! Everything is deterministic: no randomness, fixed float formatting
//! with 17 significant digits, and results independent of the thread
//! count (set `FREECLT_THREADS` to cap the worker pool).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy::{cauchy_g, reciprocal_f};
use crate::edgeworth::{certified_window, meixner_gap, quintic_residual, EdgeworthParams};
use crate::functionals::{
    fisher, free_entropy, l1_distance, log_energy, relative_entropy, relative_fisher,
    FunctionalOptions,
};
use crate::measure::{semicircle_density, GridDensity, Measure};
use crate::quad;
use crate::subordination::{
    build_truncated, density_pn, solve_t, DensityOptions, SolverOptions, DELTA_MAX,
};
use crate::{Error, Result};

/// Slope band accepted for the entropy gap `D(mu_n)`.
pub const SLOPE_BAND_D: (f64, f64) = (-1.25, -0.75);
/// Slope band accepted for the relative Fisher gap.
pub const SLOPE_BAND_PHI: (f64, f64) = (-1.25, -0.75);
/// Slope band accepted for the L1 distance to the semicircle.
pub const SLOPE_BAND_L1: (f64, f64) = (-0.65, -0.35);
/// Accepted ratio of the rescaled last observable to its predicted
/// limit (skewed inputs only, where the limit is nonzero).
pub const RATIO_BAND: (f64, f64) = (0.65, 1.35);
/// Observables whose magnitude never exceeds this are reported as
/// degenerate (indistinguishable from recovery noise) and their slope
/// fits are skipped.
pub const DEGENERATE_FLOOR: f64 = 1e-3;

fn default_resolution() -> usize {
    2001
}

fn default_ladder() -> Vec<f64> {
    vec![1e-3, 5e-4, 2.5e-4]
}

fn default_panels() -> usize {
    48
}

fn default_eps1_scale() -> f64 {
    1.0
}

/// A JSON-loadable description of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Input measure literal; must be standardized (mean 0, variance 1).
    pub measure: Measure,
    /// Convolution orders, strictly increasing, each at least 2.
    pub n_list: Vec<u32>,
    /// Node count of the density recovery grid.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    /// Decreasing smoothing heights for Stieltjes inversion.
    #[serde(default = "default_ladder")]
    pub eps_ladder: Vec<f64>,
    /// Panel count for the analytic-density quadratures.
    #[serde(default = "default_panels")]
    pub quadrature_panels: usize,
    /// Scale on the certified-window margin; must be positive.
    #[serde(default = "default_eps1_scale")]
    pub eps1_scale: f64,
    /// Default output directory; the CLI `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// A config with default knobs for the given measure and orders.
    pub fn new(measure: Measure, n_list: Vec<u32>) -> ExperimentConfig {
        ExperimentConfig {
            measure,
            n_list,
            resolution: default_resolution(),
            eps_ladder: default_ladder(),
            quadrature_panels: default_panels(),
            eps1_scale: default_eps1_scale(),
            out_dir: None,
        }
    }

    /// Reads and validates a config file.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.measure.validate()?;
        let mean = self.measure.mean();
        let var = self.measure.variance();
        if mean.abs() > 1e-9 || (var - 1.0).abs() > 1e-6 {
            return Err(Error::NormalizationViolated(format!(
                "config measure must be standardized; got mean {mean:.3e}, variance {var}"
            )));
        }
        if self.n_list.is_empty() {
            return Err(Error::InvalidConfig("n_list is empty".into()));
        }
        if self.n_list[0] < 2 {
            return Err(Error::InvalidConfig("convolution orders start at 2".into()));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "n_list must be strictly increasing".into(),
            ));
        }
        if self.resolution < 64 {
            return Err(Error::InvalidConfig(format!(
                "resolution {} below the minimum of 64",
                self.resolution
            )));
        }
        if self.eps_ladder.is_empty()
            || self.eps_ladder.iter().any(|&e| !(e.is_finite() && e > 0.0))
            || self.eps_ladder.windows(2).any(|w| w[0] <= w[1])
        {
            return Err(Error::InvalidConfig(
                "eps_ladder must be positive and strictly decreasing".into(),
            ));
        }
        if self.quadrature_panels < 8 {
            return Err(Error::InvalidConfig(
                "quadrature_panels must be at least 8".into(),
            ));
        }
        if !(self.eps1_scale > 0.0 && self.eps1_scale.is_finite()) {
            return Err(Error::InvalidConfig(
                "eps1_scale must be positive; zero collapses the certified window's \
                 safety margin onto the support edge"
                    .into(),
            ));
        }
        Ok(())
    }

    fn density_options(&self) -> DensityOptions {
        DensityOptions {
            ladder: self.eps_ladder.clone(),
            ..DensityOptions::default()
        }
    }

    fn functional_options(&self) -> FunctionalOptions {
        FunctionalOptions {
            panels: self.quadrature_panels,
        }
    }
}

/// Caps the global worker pool from the `FREECLT_THREADS` environment
/// variable. Silently keeps the current pool when already initialized.
pub fn init_threads() {
    if let Ok(raw) = std::env::var("FREECLT_THREADS") {
        if let Ok(k) = raw.trim().parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global();
            }
        }
    }
}

/// Formats a float with 17 significant digits; parsing the result
/// recovers the original bit pattern.
pub fn format_float17(x: f64) -> String {
    format!("{x:.16e}")
}

fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    let step = (b - a) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                b
            } else {
                a + step * i as f64
            }
        })
        .collect()
}

/// The standard semicircle sampled on a cosine-spaced grid; reference
/// for L1 distances.
pub fn semicircle_reference(count: usize) -> GridDensity {
    let nodes: Vec<f64> = (0..count)
        .map(|j| -2.0 * (std::f64::consts::PI * j as f64 / (count - 1) as f64).cos())
        .collect();
    let values = nodes.iter().map(|&x| semicircle_density(1.0, x)).collect();
    GridDensity::new(nodes, values).expect("cosine-spaced semicircle grid is admissible")
}

/// A least-squares power-law fit on log-log axes.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub quantity: String,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Points entering the fit.
    pub points: usize,
    /// Nonpositive observations dropped before taking logs.
    pub dropped: usize,
}

/// Fits `log y = slope * log x + intercept` by least squares.
///
/// Nonpositive or non-finite observations are dropped (counted in
/// `dropped`); at least four points must survive.
pub fn fit_slope(quantity: &str, xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidConfig(format!(
            "fit needs matching abscissas and values, got {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let kept: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|&(&x, &y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    let dropped = xs.len() - kept.len();
    if kept.len() < 4 {
        return Err(Error::NotEnoughData(format!(
            "slope fit for {quantity} needs at least 4 positive points, has {}",
            kept.len()
        )));
    }
    let m = kept.len() as f64;
    let sx: f64 = kept.iter().map(|p| p.0).sum();
    let sy: f64 = kept.iter().map(|p| p.1).sum();
    let mx = sx / m;
    let my = sy / m;
    let sxx: f64 = kept.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = kept.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::NotEnoughData(format!(
            "slope fit for {quantity} needs distinct abscissas"
        )));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = kept
        .iter()
        .map(|p| {
            let e = p.1 - (slope * p.0 + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = kept.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        1.0
    };
    Ok(SlopeFit {
        quantity: quantity.to_string(),
        slope,
        intercept,
        r2,
        points: kept.len(),
        dropped,
    })
}

/// One line of the rate table.
#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub n: u32,
    /// Entropy gap `D(mu_n)`.
    pub d: f64,
    pub n_d: f64,
    /// Relative Fisher gap.
    pub phi_rel: f64,
    pub n_phi_rel: f64,
    /// L1 distance to the standard semicircle.
    pub l1: f64,
    pub sqrt_n_l1: f64,
    /// Weighted subordinate/Meixner gap.
    pub meixner_gap: f64,
    pub eta_n: f64,
    pub tail_mass: f64,
}

/// The evaluation rectangle for the subordinate/Meixner gap.
pub fn gap_grid() -> (Vec<f64>, Vec<f64>) {
    (
        linspace(-3.0, 3.0, 25),
        vec![3.0, 2.0, 1.0, 0.5, 0.25, 0.1, 0.05],
    )
}

/// Recovers the density of `mu_n` on a uniform bracket around the
/// limiting support, widening and refining on a mass shortfall.
fn recover_grid(
    mu: &Measure,
    n: u32,
    cfg: &ExperimentConfig,
) -> Result<crate::subordination::RecoveredDensity> {
    let mut pad = 0.35 + mu.moment(3).abs() / (n as f64).sqrt() + 3.0 / n as f64;
    let mut resolution = cfg.resolution;
    let opts = cfg.density_options();
    let mut attempt = 0;
    loop {
        let xs = linspace(-2.0 - pad, 2.0 + pad, resolution);
        match density_pn(mu, n, &xs, &opts) {
            Ok(rec) => return Ok(rec),
            Err(Error::InvalidMeasure(_)) if attempt < 3 => {
                pad *= 1.4;
                resolution += resolution / 2;
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn standardized_grid(rec: &GridDensity) -> Result<GridDensity> {
    let (std, _) = Measure::Grid(rec.clone()).standardize()?;
    match std {
        Measure::Grid(g) => Ok(g),
        _ => unreachable!("standardizing a grid yields a grid"),
    }
}

/// Computes one rate-table row. Requires a measure with an extractable
/// representer (atomic families or the semicircle).
pub fn rate_row(cfg: &ExperimentConfig, n: u32) -> Result<RateRow> {
    let ctx = build_truncated(&cfg.measure, n)?;
    let rec = recover_grid(&cfg.measure, n, cfg)?;
    let std_grid = standardized_grid(&rec.density)?;
    let fopts = cfg.functional_options();
    let std_measure = Measure::Grid(std_grid.clone());
    let d = relative_entropy(&std_measure, &fopts)?.value;
    let phi_rel = relative_fisher(&std_measure, &fopts)?.value;
    let reference = semicircle_reference(cfg.resolution);
    let l1 = l1_distance(&std_grid, &reference).value;
    let (re, im) = gap_grid();
    let gap = meixner_gap(&ctx, &re, &im, &SolverOptions::default())?;
    let nf = n as f64;
    Ok(RateRow {
        n,
        d,
        n_d: nf * d,
        phi_rel,
        n_phi_rel: nf * phi_rel,
        l1,
        sqrt_n_l1: nf.sqrt() * l1,
        meixner_gap: gap.sup,
        eta_n: ctx.eta,
        tail_mass: ctx.tail_mass,
    })
}

/// Computes the full rate table, one row per configured order, in
/// parallel across orders.
pub fn rate_rows(cfg: &ExperimentConfig) -> Result<Vec<RateRow>> {
    cfg.n_list.par_iter().map(|&n| rate_row(cfg, n)).collect()
}

/// Which observables a rate run reports and gates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateFocus {
    /// Entropy, Fisher, L1, and the Meixner gap.
    Full,
    /// Entropy gap only.
    Entropy,
    /// Fisher gap only.
    Fisher,
}

/// One reduced table line for a focused entropy or Fisher run.
#[derive(Debug, Clone, Serialize)]
pub struct FocusRow {
    pub n: u32,
    pub value: f64,
    pub scaled: f64,
}

/// A named pass/fail observation with its measured value and bound.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub measured: String,
    pub bound: String,
}

impl CheckResult {
    fn new(name: &str, pass: bool, measured: String, bound: &str) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            pass,
            measured,
            bound: bound.to_string(),
        }
    }
}

/// Per-order bookkeeping of a density run.
#[derive(Debug, Clone, Serialize)]
pub struct DensityFileSummary {
    pub n: u32,
    pub file: String,
    pub points: usize,
    pub flagged: usize,
    pub max_equation_residual: f64,
    pub mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_half: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Everything a run reports; serialized as `summary.json`.
///
/// `pass` reflects the hard checks only; `warnings` (for example a low
/// fit quality) fail the run only under `--strict`.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub pass: bool,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<RateRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub focus_rows: Option<Vec<FocusRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fits: Option<Vec<SlopeFit>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_checks: Option<Vec<CheckResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<DensityFileSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checks: Option<Vec<CheckResult>>,
}

impl RunSummary {
    fn empty(command: &str) -> RunSummary {
        RunSummary {
            command: command.to_string(),
            pass: true,
            warnings: Vec::new(),
            rows: None,
            focus_rows: None,
            fits: None,
            degenerate: None,
            band_checks: None,
            density: None,
            checks: None,
        }
    }
}

/// Renders a summary as one line per check, fit, and warning.
pub fn render_report(summary: &RunSummary) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };
    for checks in [&summary.checks, &summary.band_checks]
        .into_iter()
        .flatten()
    {
        for c in checks {
            line(format!(
                "[{}] {}: {} (bound {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.bound
            ));
        }
    }
    if let Some(fits) = &summary.fits {
        for f in fits {
            line(format!(
                "fit {}: slope {:.4}, intercept {:.4}, r2 {:.4} over {} points ({} dropped)",
                f.quantity, f.slope, f.intercept, f.r2, f.points, f.dropped
            ));
        }
    }
    if let Some(deg) = &summary.degenerate {
        if !deg.is_empty() {
            line(format!("degenerate (no fit): {}", deg.join(", ")));
        }
    }
    if let Some(files) = &summary.density {
        for d in files {
            match &d.error {
                None => line(format!(
                    "[PASS] n={}: {} ({} points, {} flagged, mass {:.6})",
                    d.n, d.file, d.points, d.flagged, d.mass
                )),
                Some(e) => line(format!("[FAIL] n={}: {}", d.n, e)),
            }
        }
    }
    for w in &summary.warnings {
        line(format!("warning: {w}"));
    }
    line(format!(
        "RESULT: {}",
        if summary.pass { "PASS" } else { "FAIL" }
    ));
    out
}

fn write_text(dir: &Path, file: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(file), text)?;
    Ok(())
}

fn write_summary(dir: &Path, summary: &RunSummary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    write_text(dir, "summary.json", &text)
}

/// Builds the CSV table for one order of a density run.
fn density_table(
    mu: &Measure,
    n: u32,
    cfg: &ExperimentConfig,
) -> Result<(String, DensityFileSummary)> {
    let params = EdgeworthParams::from_measure(mu, n)?;
    let window_half = match build_truncated(mu, n) {
        Ok(ctx) => {
            let w = certified_window(&params, ctx.eta, cfg.eps1_scale);
            (!w.is_empty()).then_some(w.half)
        }
        Err(Error::NotAtomic(_)) => None,
        Err(e) => return Err(e),
    };
    let rec = recover_grid(mu, n, cfg)?;
    let mut csv = String::from("x,p_n,v_n,weighted_residual\n");
    for (&x, &p) in rec.density.nodes.iter().zip(&rec.density.values) {
        let s = x - params.a;
        let v = params.correction_density(s);
        let weighted = (p - v) * params.edge_weight(s);
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            format_float17(x),
            format_float17(p),
            format_float17(v),
            format_float17(weighted)
        );
    }
    let summary = DensityFileSummary {
        n,
        file: format!("density_n{n}.csv"),
        points: rec.density.nodes.len(),
        flagged: rec.flagged.len(),
        max_equation_residual: rec.max_equation_residual,
        mass: rec.density.mass(),
        window_half,
        error: None,
    };
    Ok((csv, summary))
}

/// Writes `density_n<k>.csv` per configured order plus `summary.json`.
///
/// A failed order (for example, too many flagged solver columns) is
/// recorded in the summary and fails the run, but the other orders
/// still produce their files.
pub fn run_density(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let mut summary = RunSummary::empty("density");
    let mut files = Vec::new();
    for &n in &cfg.n_list {
        match density_table(&cfg.measure, n, cfg) {
            Ok((csv, entry)) => {
                write_text(out, &entry.file, &csv)?;
                files.push(entry);
            }
            Err(e) => {
                summary.pass = false;
                files.push(DensityFileSummary {
                    n,
                    file: String::new(),
                    points: 0,
                    flagged: 0,
                    max_equation_residual: f64::NAN,
                    mass: f64::NAN,
                    window_half: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    summary.density = Some(files);
    write_summary(out, &summary)?;
    Ok(summary)
}

struct QuantitySpec<'a> {
    name: &'a str,
    values: Vec<f64>,
    scaled_last: f64,
    limit: f64,
    band: Option<(f64, f64)>,
}

fn assess_quantity(spec: &QuantitySpec, ns: &[f64], skewed: bool, summary: &mut RunSummary) {
    let max_abs = spec.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs < DEGENERATE_FLOOR {
        summary
            .degenerate
            .get_or_insert_with(Vec::new)
            .push(spec.name.to_string());
        if let Some(checks) = summary.band_checks.as_mut() {
            checks.push(CheckResult::new(
                &format!("{} degenerate", spec.name),
                true,
                format!("max magnitude {max_abs:.3e}"),
                &format!("< {DEGENERATE_FLOOR:.0e}"),
            ));
        }
        return;
    }
    let fit = match fit_slope(spec.name, ns, &spec.values) {
        Ok(f) => f,
        Err(e) => {
            summary.warnings.push(format!("{}: {e}", spec.name));
            return;
        }
    };
    if let (Some((lo, hi)), Some(checks)) = (spec.band, summary.band_checks.as_mut()) {
        let slope_pass = if skewed {
            (lo..=hi).contains(&fit.slope)
        } else {
            fit.slope <= hi
        };
        let slope_bound = if skewed {
            format!("[{lo}, {hi}]")
        } else {
            format!("<= {hi}")
        };
        checks.push(CheckResult::new(
            &format!("{} slope", spec.name),
            slope_pass,
            format!("{:.4}", fit.slope),
            &slope_bound,
        ));
        if skewed && spec.limit > 0.0 {
            let ratio = spec.scaled_last / spec.limit;
            checks.push(CheckResult::new(
                &format!("{} rescaled tail", spec.name),
                (RATIO_BAND.0..=RATIO_BAND.1).contains(&ratio),
                format!("{ratio:.4} of limit {:.6}", spec.limit),
                &format!("[{}, {}]", RATIO_BAND.0, RATIO_BAND.1),
            ));
        }
    }
    if fit.r2 < 0.9 {
        summary.warnings.push(format!(
            "{} fit has low explanatory power: r2 = {:.4}",
            spec.name, fit.r2
        ));
    }
    summary.fits.get_or_insert_with(Vec::new).push(fit);
}

fn rates_csv_full(rows: &[RateRow]) -> String {
    let mut csv = String::from("n,D,nD,Phi_rel,nPhi_rel,L1,sqrtn_L1,meixner_gap,eta_n,tail_mass\n");
    for r in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            format_float17(r.d),
            format_float17(r.n_d),
            format_float17(r.phi_rel),
            format_float17(r.n_phi_rel),
            format_float17(r.l1),
            format_float17(r.sqrt_n_l1),
            format_float17(r.meixner_gap),
            format_float17(r.eta_n),
            format_float17(r.tail_mass)
        );
    }
    csv
}

fn rates_csv_focus(name: &str, rows: &[FocusRow]) -> String {
    let mut csv = format!("n,{name},n_scaled_{name}\n");
    for r in rows {
        let _ = writeln!(
            csv,
            "{},{},{}",
            r.n,
            format_float17(r.value),
            format_float17(r.scaled)
        );
    }
    csv
}

/// Runs the rate experiment and writes `rates.csv` plus
/// `summary.json`.
///
/// With [`RateFocus::Full`] the input must have an extractable
/// representer (atomic families or the semicircle); focused entropy or
/// Fisher runs accept any standardized measure. Hard checks compare
/// slope fits against the acceptance bands; a low `r2` is a warning.
pub fn run_rates(cfg: &ExperimentConfig, out: &Path, focus: RateFocus) -> Result<RunSummary> {
    cfg.validate()?;
    let m3 = cfg.measure.moment(3);
    let skewed = m3.abs() > 1e-9;
    let ns: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
    let mut summary = RunSummary::empty(match focus {
        RateFocus::Full => "rates",
        RateFocus::Entropy => "entropy",
        RateFocus::Fisher => "fisher",
    });
    summary.band_checks = Some(Vec::new());
    if cfg.n_list.len() < 4 {
        summary
            .warnings
            .push("fewer than 4 orders: slope fits skipped".into());
    }

    match focus {
        RateFocus::Full => {
            let rows = rate_rows(cfg)?;
            write_text(out, "rates.csv", &rates_csv_full(&rows))?;
            let last = rows.last().expect("validated n_list is nonempty");
            let quantities = [
                QuantitySpec {
                    name: "D",
                    values: rows.iter().map(|r| r.d).collect(),
                    scaled_last: last.n_d,
                    limit: m3 * m3 / 6.0,
                    band: Some(SLOPE_BAND_D),
                },
                QuantitySpec {
                    name: "Phi_rel",
                    values: rows.iter().map(|r| r.phi_rel).collect(),
                    scaled_last: last.n_phi_rel,
                    limit: m3 * m3,
                    band: Some(SLOPE_BAND_PHI),
                },
                QuantitySpec {
                    name: "L1",
                    values: rows.iter().map(|r| r.l1).collect(),
                    scaled_last: last.sqrt_n_l1,
                    limit: 2.0 * m3.abs() / std::f64::consts::PI,
                    band: Some(SLOPE_BAND_L1),
                },
                QuantitySpec {
                    name: "meixner_gap",
                    values: rows.iter().map(|r| r.meixner_gap).collect(),
                    scaled_last: 0.0,
                    limit: 0.0,
                    band: None,
                },
            ];
            if cfg.n_list.len() >= 4 {
                for q in &quantities {
                    assess_quantity(q, &ns, skewed, &mut summary);
                }
            }
            summary.rows = Some(rows);
        }
        RateFocus::Entropy | RateFocus::Fisher => {
            let fopts = cfg.functional_options();
            let rows: Vec<FocusRow> = cfg
                .n_list
                .par_iter()
                .map(|&n| {
                    let rec = recover_grid(&cfg.measure, n, cfg)?;
                    let std_measure = Measure::Grid(standardized_grid(&rec.density)?);
                    let value = match focus {
                        RateFocus::Entropy => relative_entropy(&std_measure, &fopts)?.value,
                        _ => relative_fisher(&std_measure, &fopts)?.value,
                    };
                    let scaled = n as f64 * value;
                    Ok(FocusRow { n, value, scaled })
                })
                .collect::<Result<Vec<_>>>()?;
            let (name, band, limit) = match focus {
                RateFocus::Entropy => ("D", SLOPE_BAND_D, m3 * m3 / 6.0),
                _ => ("Phi_rel", SLOPE_BAND_PHI, m3 * m3),
            };
            write_text(out, "rates.csv", &rates_csv_focus(name, &rows))?;
            let spec = QuantitySpec {
                name,
                values: rows.iter().map(|r| r.value).collect(),
                scaled_last: rows.last().expect("nonempty").scaled,
                limit,
                band: Some(band),
            };
            if cfg.n_list.len() >= 4 {
                assess_quantity(&spec, &ns, skewed, &mut summary);
            }
            summary.focus_rows = Some(rows);
        }
    }
    summary.pass = summary
        .band_checks
        .as_ref()
        .is_none_or(|cs| cs.iter().all(|c| c.pass));
    write_summary(out, &summary)?;
    Ok(summary)
}

fn push_check(checks: &mut Vec<CheckResult>, name: &str, measured: f64, bound: f64) {
    checks.push(CheckResult::new(
        name,
        measured.is_finite() && measured <= bound,
        format!("{measured:.3e}"),
        &format!("<= {bound:.0e}"),
    ));
}

fn check_sample_points() -> Vec<Complex64> {
    let mut pts = Vec::new();
    for &re in &[-2.5, -1.0, 0.0, 1.3, 2.5] {
        for &im in &[2.0, 0.5, 0.08] {
            pts.push(Complex64::new(re, im));
        }
    }
    pts
}

/// Runs the invariant suite and writes `summary.json`.
///
/// Checks cover transform half-plane mapping, representer moment
/// identities, subordination residuals and height gain, the quintic
/// certificate, truncation-functional minimality, correction-mass
/// closed forms, window margins, functional oracles, sign constraints
/// of the gaps, and byte-level determinism across thread pools.
pub fn run_check(cfg: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    let mut summary = RunSummary::empty("check");
    let mut checks = Vec::new();

    if let Err(e) = cfg.validate() {
        checks.push(CheckResult::new(
            "config_valid",
            false,
            e.to_string(),
            "well-formed, standardized configuration",
        ));
        summary.pass = false;
        summary.checks = Some(checks);
        write_summary(out, &summary)?;
        return Ok(summary);
    }
    checks.push(CheckResult::new(
        "config_valid",
        true,
        "ok".into(),
        "well-formed, standardized configuration",
    ));

    let mu = &cfg.measure;
    let pts = check_sample_points();

    // Transform mapping: G into the lower half plane, F gaining height,
    // and F*G = 1.
    let mut worst = 0.0f64;
    for &z in &pts {
        let g = cauchy_g(mu, z)?;
        let f = reciprocal_f(mu, z)?;
        worst = worst.max(g.im.max(0.0));
        worst = worst.max(z.im - f.im);
        worst = worst.max((f * g - 1.0).norm() / (1.0 + (f * g).norm()));
    }
    push_check(&mut checks, "transform_half_plane", worst, 1e-10);

    // Representer round trip: moments of the measure reproduced by the
    // Laurent recursion from tau.
    let tau_ok = match crate::cauchy::extract_tau(mu) {
        Ok(rep) => {
            let from_tau = crate::measure::mu_moments_from_tau(&rep.moments, 4);
            let direct = mu.moments(4);
            let diff = from_tau
                .iter()
                .zip(&direct)
                .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
                .fold(0.0f64, f64::max);
            push_check(&mut checks, "representer_moments", diff, 1e-9);
            true
        }
        Err(Error::NotAtomic(_)) => {
            checks.push(CheckResult::new(
                "representer_moments",
                true,
                "skipped: no representer for this family".into(),
                "<= 1e-9",
            ));
            false
        }
        Err(e) => return Err(e),
    };

    if tau_ok {
        let mut resid = 0.0f64;
        let mut height = 0.0f64;
        let mut quintic = 0.0f64;
        let mut eta_gap = 0.0f64;
        let mut min_margin = f64::INFINITY;
        let mut mass_gap = 0.0f64;
        for &n in &cfg.n_list {
            let ctx = build_truncated(mu, n)?;
            let sqn = (n as f64).sqrt();
            let mut warm = None;
            for &z in &pts {
                let sp = solve_t(&ctx, z, warm, &SolverOptions::default())?;
                warm = Some(sp.value);
                resid = resid.max(sp.residual / (sqn * (1.0 + z.norm())));
                height = height.max(z.im - sp.value.im);
                quintic = quintic
                    .max(quintic_residual(&ctx, z, sp.value).norm() / (1.0 + z.norm().powi(5)));
            }

            // The minimized truncation functional: its value is
            // reproduced at the reported minimizer and not beaten on a
            // sample of admissible levels.
            if !ctx.degenerate {
                let m2t = ctx.tau.moments[2];
                let g_at = |cut: f64, delta: f64| {
                    delta + ctx.tau.tau.tail_second_moment(cut) / (m2t * delta * delta)
                };
                // Reproduce the minimum at the reported (snapped) cut,
                // then confirm no sampled admissible level beats it.
                eta_gap = eta_gap.max((g_at(ctx.cut, ctx.delta) - ctx.eta).abs());
                for k in 1..=24 {
                    let delta = DELTA_MAX * k as f64 / 24.0;
                    let g = g_at(delta * (n as f64 - 1.0).sqrt(), delta);
                    eta_gap = eta_gap.max((ctx.eta - g).max(0.0));
                }
            }

            let params = EdgeworthParams::from_context(&ctx)?;
            let w = certified_window(&params, ctx.eta, cfg.eps1_scale);
            if !w.is_empty() {
                min_margin = min_margin.min(2.0 / params.e - w.half);
            }
            let closed = params.correction_mass();
            let s = 2.0 / params.e;
            let quad_mass = quad::integrate_panels(
                -std::f64::consts::FRAC_PI_2,
                std::f64::consts::FRAC_PI_2,
                16,
                16,
                |theta| params.correction_density(s * theta.sin()) * s * theta.cos(),
            );
            mass_gap = mass_gap.max((closed - quad_mass).abs());
        }
        push_check(&mut checks, "subordination_residual", resid, 1e-10);
        push_check(&mut checks, "subordinate_gains_height", height, 1e-12);
        push_check(&mut checks, "quintic_certificate", quintic, 1e-8);
        push_check(&mut checks, "truncation_minimality", eta_gap, 1e-10);
        checks.push(CheckResult::new(
            "window_margin",
            min_margin > 0.0,
            format!("{min_margin:.3e}"),
            "> 0",
        ));
        push_check(&mut checks, "correction_mass_closed_form", mass_gap, 1e-9);
    }

    // Functional oracles on closed-form laws.
    let fopts = cfg.functional_options();
    let w1 = Measure::semicircle(1.0);
    let mut oracle = 0.0f64;
    oracle = oracle.max((log_energy(&w1, &fopts)?.value - 0.25).abs());
    let chi_w = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    oracle = oracle.max((free_entropy(&w1, &fopts)?.value - chi_w).abs());
    oracle = oracle.max((fisher(&w1, &fopts)?.value - 1.0).abs());
    let arc = Measure::Arcsine { r: 1.0 };
    oracle = oracle.max((log_energy(&arc, &fopts)?.value - 2.0f64.ln()).abs());
    let arc_big = Measure::Arcsine { r: 1.3 };
    let scaled = arc_big.scale(2.0)?;
    oracle = oracle.max(
        (log_energy(&scaled, &fopts)?.value - (log_energy(&arc_big, &fopts)?.value - 2.0f64.ln()))
            .abs(),
    );
    push_check(&mut checks, "functional_oracles", oracle, 3e-8);

    // Sign constraints at the smallest order: both gaps are
    // nonnegative up to recovery noise.
    let n0 = cfg.n_list[0];
    let small = ExperimentConfig {
        resolution: cfg.resolution.min(801),
        ..cfg.clone()
    };
    let rec = recover_grid(mu, n0, &small)?;
    let std_measure = Measure::Grid(standardized_grid(&rec.density)?);
    let d0 = relative_entropy(&std_measure, &fopts)?.value;
    let phi0 = relative_fisher(&std_measure, &fopts)?.value;
    push_check(&mut checks, "entropy_gap_nonnegative", -d0, 1e-6);
    push_check(&mut checks, "fisher_gap_nonnegative", -phi0, 1e-6);

    // Byte-level determinism: the same table from the global pool and
    // from a fresh two-thread pool.
    let det_cfg = ExperimentConfig {
        resolution: cfg.resolution.min(301),
        ..cfg.clone()
    };
    let first = density_table(mu, n0, &det_cfg)?.0;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let second = pool.install(|| density_table(mu, n0, &det_cfg))?.0;
    checks.push(CheckResult::new(
        "deterministic_output",
        first == second,
        if first == second {
            "identical bytes across thread pools".into()
        } else {
            "outputs differ between thread pools".into()
        },
        "byte-identical",
    ));

    summary.pass = checks.iter().all(|c| c.pass);
    summary.checks = Some(checks);
    write_summary(out, &summary)?;
    Ok(summary)
}
