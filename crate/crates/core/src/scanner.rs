//! Certified brackets on anti-periodicity and periodicity defects.
//!
//! For a trigonometric polynomial `f` and a shift `τ`, the defect function
//! `D_τ(t) = f(t+τ) ± f(t)` is itself a trigonometric polynomial with
//! coefficients `c_j (e^{iλ_j τ} ± 1)`. Its sup norm over the whole line is
//! bracketed from below by grid evaluation (every grid value is attained, so
//! refutations are unconditional) and from above by
//!
//! * the triangle bound `Σ ‖c_j‖ |e^{iλ_j τ} ± 1|`, valid on all of ℝ, and
//! * the Lipschitz-grid bound `max_grid ‖D_τ‖ + Λ_τ h`, valid only on the
//!   scanned window. Certificates that rest on it carry `recurrence_caveat`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::signals::{NormKind, TrigPolynomial, TrigTerm};

/// Grid sizes above this are coarsened to keep one bracket bounded in cost.
pub const MAX_GRID_POINTS: usize = 4_000_000;
/// Default window length in units of the slowest period.
pub const DEFAULT_WINDOW_PERIODS: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectMode {
    /// `sup_t ‖f(t+τ) + f(t)‖`
    Anti,
    /// `sup_t ‖f(t+τ) − f(t)‖`
    Plain,
}

impl DefectMode {
    fn sign(self) -> f64 {
        match self {
            DefectMode::Anti => 1.0,
            DefectMode::Plain => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectBracket {
    pub lower: f64,
    pub upper: f64,
    /// Time at which `lower` is attained.
    pub witness_t: f64,
    pub triangle_bound: f64,
    /// `+∞` when no grid was evaluated.
    pub grid_bound: f64,
    /// Set when `upper` comes from the window-local grid bound.
    pub recurrence_caveat: bool,
}

impl DefectBracket {
    fn combine(lower: f64, witness_t: f64, triangle_bound: f64, grid_bound: f64) -> Self {
        let caveat = grid_bound < triangle_bound;
        DefectBracket {
            lower,
            upper: triangle_bound.min(grid_bound).max(lower),
            witness_t,
            triangle_bound,
            grid_bound,
            recurrence_caveat: caveat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertStatus {
    Certified,
    Refuted,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodCertificate {
    pub tau: f64,
    pub eps: f64,
    pub mode: DefectMode,
    pub bracket: DefectBracket,
    pub status: CertStatus,
    pub witness_t: Option<f64>,
    pub recurrence_caveat: bool,
}

/// Evaluation grid on `[0, t_window]`; `None` selects the defaults
/// (window of 200 slowest periods, step with `Λ_τ h ≤ ε/10`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GridParams {
    pub t_window: Option<f64>,
    pub t_step: Option<f64>,
}

impl GridParams {
    pub fn new(t_window: f64, t_step: f64) -> Self {
        GridParams {
            t_window: Some(t_window),
            t_step: Some(t_step),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(w) = self.t_window {
            require_positive("t_window", w)?;
        }
        if let Some(h) = self.t_step {
            require_positive("t_step", h)?;
        }
        if let (Some(w), Some(h)) = (self.t_window, self.t_step) {
            if w < h {
                return Err(Error::param(
                    "t_window",
                    format!("window {w} is shorter than step {h}"),
                ));
            }
        }
        Ok(())
    }
}

pub fn default_window(f: &TrigPolynomial) -> f64 {
    match f.min_nonzero_frequency() {
        Some(lambda) => DEFAULT_WINDOW_PERIODS * std::f64::consts::TAU / lambda,
        None => 1.0,
    }
}

/// `D_τ` in flattened form for fast repeated evaluation.
struct DefectFunction {
    dim: usize,
    kind: NormKind,
    freqs: Vec<f64>,
    coeffs: Vec<Complex64>,
    triangle: f64,
    lipschitz: f64,
}

impl DefectFunction {
    fn new(f: &TrigPolynomial, mode: DefectMode, tau: f64) -> Self {
        let dim = f.dim();
        let kind = f.norm_kind();
        let sign = mode.sign();
        let mut freqs = Vec::with_capacity(f.terms().len());
        let mut coeffs = Vec::with_capacity(f.terms().len() * dim);
        let mut triangle = 0.0;
        let mut lipschitz = 0.0;
        for term in f.terms() {
            let factor = Complex64::cis(term.freq * tau) + sign;
            let d = term.coeff.scaled(factor);
            let n = d.norm(kind);
            if n == 0.0 {
                continue;
            }
            triangle += n;
            lipschitz += n * term.freq.abs();
            freqs.push(term.freq);
            coeffs.extend_from_slice(d.components());
        }
        DefectFunction {
            dim,
            kind,
            freqs,
            coeffs,
            triangle,
            lipschitz,
        }
    }

    fn norm_at(&self, t: f64, buf: &mut [Complex64]) -> f64 {
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (j, &freq) in self.freqs.iter().enumerate() {
            let phase = Complex64::cis(freq * t);
            let c = &self.coeffs[j * self.dim..(j + 1) * self.dim];
            for (acc, cj) in buf.iter_mut().zip(c) {
                *acc += cj * phase;
            }
        }
        match self.kind {
            NormKind::Euclidean => buf.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            NormKind::Max => buf.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    /// Walks the grid `0, h, …, n h` (`n h ≥ window`). Returns the running
    /// maximum and its location, stopping early once a value exceeds
    /// `stop_above`.
    fn grid_max(&self, window: f64, step: f64, stop_above: f64) -> (f64, f64) {
        let n = (window / step).ceil() as usize;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut best = (f64::NEG_INFINITY, 0.0);
        for k in 0..=n {
            let t = k as f64 * step;
            let v = self.norm_at(t, &mut buf);
            if v > best.0 {
                best = (v, t);
                if v > stop_above {
                    break;
                }
            }
        }
        best
    }
}

fn coarsened(window: f64, step: f64) -> f64 {
    step.max(window / MAX_GRID_POINTS as f64)
}

/// Full-grid bracket of `sup_t ‖f(t+τ) ± f(t)‖` on `[0, t_window]`.
pub fn defect_bracket(
    f: &TrigPolynomial,
    mode: DefectMode,
    tau: f64,
    t_window: f64,
    t_step: f64,
) -> Result<DefectBracket> {
    if !tau.is_finite() {
        return Err(Error::NonFinite("tau".into()));
    }
    GridParams::new(t_window, t_step).validate()?;
    let d = DefectFunction::new(f, mode, tau);
    if d.freqs.is_empty() {
        return Ok(DefectBracket::combine(0.0, 0.0, 0.0, 0.0));
    }
    let (lower, witness) = d.grid_max(t_window, t_step, f64::INFINITY);
    Ok(DefectBracket::combine(
        lower,
        witness,
        d.triangle,
        lower + d.lipschitz * t_step,
    ))
}

/// Classifies `τ` as a certified or refuted ε-(anti)period, or leaves it undecided.
pub fn classify(
    f: &TrigPolynomial,
    mode: DefectMode,
    tau: f64,
    eps: f64,
    grid: &GridParams,
) -> Result<PeriodCertificate> {
    require_positive("tau", tau)?;
    require_positive("eps", eps)?;
    grid.validate()?;

    let d = DefectFunction::new(f, mode, tau);
    let certificate = |bracket: DefectBracket, status: CertStatus| PeriodCertificate {
        tau,
        eps,
        mode,
        bracket,
        status,
        witness_t: Some(bracket.witness_t),
        recurrence_caveat: status == CertStatus::Certified && bracket.recurrence_caveat,
    };

    let mut buf = vec![Complex64::new(0.0, 0.0); f.dim()];
    let at_origin = if d.freqs.is_empty() {
        0.0
    } else {
        d.norm_at(0.0, &mut buf)
    };
    if d.triangle <= eps {
        let bracket = DefectBracket::combine(at_origin, 0.0, d.triangle, f64::INFINITY);
        return Ok(certificate(bracket, CertStatus::Certified));
    }
    if at_origin > eps {
        let bracket = DefectBracket::combine(at_origin, 0.0, d.triangle, f64::INFINITY);
        return Ok(certificate(bracket, CertStatus::Refuted));
    }

    let window = grid.t_window.unwrap_or_else(|| default_window(f));
    let mut step = match grid.t_step {
        Some(h) => h.min(window),
        // d.lipschitz > 0 here: a nonzero constant defect is settled above
        None => coarsened(window, (eps / (10.0 * d.lipschitz)).min(window)),
    };
    let mut last = None;
    for _ in 0..2 {
        let (lower, witness) = d.grid_max(window, step, eps);
        let bracket =
            DefectBracket::combine(lower, witness, d.triangle, lower + d.lipschitz * step);
        if lower > eps {
            return Ok(certificate(bracket, CertStatus::Refuted));
        }
        if bracket.upper <= eps {
            return Ok(certificate(bracket, CertStatus::Certified));
        }
        last = Some(bracket);
        step /= 2.0;
    }
    Ok(certificate(
        last.expect("two rounds ran"),
        CertStatus::Unknown,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub mode: DefectMode,
    pub eps: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    pub grid: GridParams,
}

impl ScanConfig {
    pub fn new(mode: DefectMode, eps: f64, tau_max: f64, tau_step: f64) -> Self {
        ScanConfig {
            mode,
            eps,
            tau_max,
            tau_step,
            grid: GridParams::default(),
        }
    }

    /// The half-open grid `(0, τ_max]`: `τ_k = k · τ_step`, `k ≥ 1`.
    pub fn tau_grid(&self) -> impl IndexedParallelIterator<Item = f64> {
        let n = (self.tau_max / self.tau_step * (1.0 + 1e-12)).floor() as usize;
        let step = self.tau_step;
        (1..n + 1).into_par_iter().map(move |k| k as f64 * step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub mode: DefectMode,
    pub eps: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    pub certificates: Vec<PeriodCertificate>,
    pub certified_taus: Vec<f64>,
    /// Largest gap between consecutive certified τ, counting the window
    /// edges `0` and `τ_max`; `+∞` when nothing was certified.
    pub max_gap: f64,
    pub unknown_count: usize,
    pub recurrence_caveat: bool,
}

pub fn scan(f: &TrigPolynomial, config: &ScanConfig) -> Result<ScanReport> {
    require_positive("eps", config.eps)?;
    require_positive("tau_max", config.tau_max)?;
    require_positive("tau_step", config.tau_step)?;
    config.grid.validate()?;

    let certificates = config
        .tau_grid()
        .map(|tau| classify(f, config.mode, tau, config.eps, &config.grid))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanReport::assemble(config, certificates))
}

impl ScanReport {
    pub fn assemble(config: &ScanConfig, certificates: Vec<PeriodCertificate>) -> Self {
        let mut certified_taus: Vec<f64> = certificates
            .iter()
            .filter(|c| c.status == CertStatus::Certified)
            .map(|c| c.tau)
            .collect();
        certified_taus.sort_by(f64::total_cmp);
        let unknown_count = certificates
            .iter()
            .filter(|c| c.status == CertStatus::Unknown)
            .count();
        let recurrence_caveat = certificates.iter().any(|c| c.recurrence_caveat);
        let max_gap = max_gap(&certified_taus, config.tau_max);
        ScanReport {
            mode: config.mode,
            eps: config.eps,
            tau_max: config.tau_max,
            tau_step: config.tau_step,
            certificates,
            certified_taus,
            max_gap,
            unknown_count,
            recurrence_caveat,
        }
    }

    pub fn config(&self) -> ScanConfig {
        ScanConfig::new(self.mode, self.eps, self.tau_max, self.tau_step)
    }

    pub fn count(&self, status: CertStatus) -> usize {
        self.certificates
            .iter()
            .filter(|c| c.status == status)
            .count()
    }

    /// Plot data: header `tau,lower,upper,status`, one row per grid τ.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,lower,upper,status\n");
        for c in &self.certificates {
            let status = match c.status {
                CertStatus::Certified => "certified",
                CertStatus::Refuted => "refuted",
                CertStatus::Unknown => "unknown",
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                c.tau, c.bracket.lower, c.bracket.upper, status
            ));
        }
        out
    }
}

fn max_gap(sorted_taus: &[f64], tau_max: f64) -> f64 {
    if sorted_taus.is_empty() {
        return f64::INFINITY;
    }
    let first = sorted_taus[0];
    let last = tau_max - sorted_taus[sorted_taus.len() - 1];
    sorted_taus
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(first.max(last), f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Relative-density evidence from one scan. `l_estimate` is the empirical
/// inclusion length on `(0, τ_max]` only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySummary {
    #[serde(serialize_with = "crate::files::serialize_extended_f64")]
    pub l_estimate: f64,
    pub certified_count: usize,
    pub tau_max: f64,
    pub histogram: Vec<GapBin>,
    pub window_local: bool,
}

pub const HISTOGRAM_BINS: usize = 10;

pub fn density_summary(report: &ScanReport) -> DensitySummary {
    let gaps: Vec<f64> = report
        .certified_taus
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let mut histogram = Vec::new();
    if let Some(top) = gaps.iter().copied().reduce(f64::max) {
        let width = if top > 0.0 {
            top / HISTOGRAM_BINS as f64
        } else {
            1.0
        };
        histogram = (0..HISTOGRAM_BINS)
            .map(|b| GapBin {
                lo: b as f64 * width,
                hi: (b + 1) as f64 * width,
                count: 0,
            })
            .collect();
        for g in &gaps {
            let b = ((g / width) as usize).min(HISTOGRAM_BINS - 1);
            histogram[b].count += 1;
        }
    }
    DensitySummary {
        l_estimate: report.max_gap,
        certified_count: report.certified_taus.len(),
        tau_max: report.tau_max,
        histogram,
        window_local: true,
    }
}

/// Plain-mode certificate at `2τ`, `2ε` derived from an anti-period
/// certificate via `f(t+2τ) − f(t) = [f(t+2τ)+f(t+τ)] − [f(t+τ)+f(t)]`.
pub fn doubling_check(
    f: &TrigPolynomial,
    cert: &PeriodCertificate,
    grid: &GridParams,
) -> Result<PeriodCertificate> {
    if cert.mode != DefectMode::Anti || cert.status != CertStatus::Certified {
        return Err(Error::Precondition(format!(
            "doubling needs a certified anti-period, got {:?} {:?}",
            cert.mode, cert.status
        )));
    }
    classify(f, DefectMode::Plain, 2.0 * cert.tau, 2.0 * cert.eps, grid)
}

/// `f(t+τ) ± f(t)` as a polynomial.
pub fn defect_polynomial(f: &TrigPolynomial, mode: DefectMode, tau: f64) -> TrigPolynomial {
    let sign = Complex64::new(mode.sign(), 0.0);
    let terms = f
        .terms()
        .iter()
        .map(|t| TrigTerm::new(t.freq, t.coeff.scaled(Complex64::cis(t.freq * tau) + sign)))
        .collect();
    TrigPolynomial::from_terms(f.dim(), f.norm_kind(), terms).expect("finite defect coefficients")
}

/// Largest `‖f(t)‖` over the grid `a, a+h, …` up to `b`.
pub fn grid_sup<S: crate::signals::Signal + ?Sized>(f: &S, a: f64, b: f64, step: f64) -> f64 {
    let n = ((b - a) / step).ceil() as usize;
    (0..=n)
        .map(|k| f.eval((a + k as f64 * step).min(b)).norm(f.norm_kind()))
        .fold(0.0, f64::max)
}
