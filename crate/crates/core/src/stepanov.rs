//! Stepanov `S^p` defects and asymptotic decompositions `f = g + q`.
//!
//! The `S^p` defect of `f` at `τ` measures the unit-window lift
//! `t ↦ f(t + ·)` in `L^p([0,1])`. The sup-norm defect dominates it, so every
//! sup-norm bracket upper bound also bounds the `S^p` defect.

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::quadrature::simpson_weight;
use crate::scanner::{defect_bracket, scan, DefectBracket, DefectMode, GridParams, ScanConfig};
use crate::signals::{ClosedForm, ComplexVec, NormKind, SampledFunction, Signal, TrigPolynomial};

pub const DEFAULT_S_QUAD_POINTS: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepanovParams {
    pub p: f64,
    pub s_quad_points: usize,
}

impl StepanovParams {
    pub fn new(p: f64) -> Result<Self> {
        Self::with_points(p, DEFAULT_S_QUAD_POINTS)
    }

    pub fn with_points(p: f64, s_quad_points: usize) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::param(
                "p",
                format!("must satisfy 1 <= p < inf, got {p}"),
            ));
        }
        if s_quad_points < 3 || s_quad_points.is_multiple_of(2) {
            return Err(Error::param(
                "s_quad_points",
                format!("Simpson needs an odd count >= 3, got {s_quad_points}"),
            ));
        }
        Ok(StepanovParams { p, s_quad_points })
    }

    /// Normalized Simpson weights on `[0, 1]` (they sum to 1).
    fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.s_quad_points - 1;
        let h = 1.0 / n as f64;
        (0..=n).map(move |k| (k as f64 * h, simpson_weight(k, n) * h / 3.0))
    }

    /// `(∫_0^1 g(s)^p ds)^{1/p}` for a nonnegative integrand.
    pub fn unit_window_norm<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        let sum: f64 = self.nodes().map(|(s, w)| w * g(s).powf(self.p)).sum();
        sum.max(0.0).powf(1.0 / self.p)
    }
}

/// `‖f(t + ·)‖_{L^p[0,1]}`
pub fn window_norm<S: Signal + ?Sized>(f: &S, t: f64, params: &StepanovParams) -> f64 {
    let kind = f.norm_kind();
    params.unit_window_norm(|s| f.eval(t + s).norm(kind))
}

/// Grid maximum of `(∫_0^1 ‖f(t+s+τ) + f(t+s)‖^p ds)^{1/p}` over
/// `t ∈ {0, h, …} ⊂ [0, t_window]`, with its location.
pub fn sp_defect_lower<S: Signal + ?Sized>(
    f: &S,
    params: &StepanovParams,
    tau: f64,
    t_window: f64,
    t_step: f64,
) -> Result<(f64, f64)> {
    require_positive("t_window", t_window)?;
    require_positive("t_step", t_step)?;
    let kind = f.norm_kind();
    let n = (t_window / t_step).ceil() as usize;
    let mut best = (0.0, 0.0);
    for k in 0..=n {
        let t = k as f64 * t_step;
        let v = params.unit_window_norm(|s| (&f.eval(t + s + tau) + &f.eval(t + s)).norm(kind));
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

/// `S^p` anti-periodicity bracket: grid lower bound from unit-window
/// quadrature, upper bound from the sup-norm bracket on `[0, t_window + 1]`.
pub fn sp_defect(
    f: &TrigPolynomial,
    params: &StepanovParams,
    tau: f64,
    t_window: f64,
    t_step: f64,
) -> Result<DefectBracket> {
    let (lower, witness_t) = sp_defect_lower(f, params, tau, t_window, t_step)?;
    let sup = defect_bracket(f, DefectMode::Anti, tau, t_window + 1.0, t_step)?;
    Ok(DefectBracket {
        lower,
        upper: sup.upper.max(lower),
        witness_t,
        ..sup
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepanovReport {
    pub p: f64,
    pub tau: f64,
    pub lower: f64,
    pub upper: f64,
    pub quad_points: usize,
}

impl StepanovReport {
    pub fn new(params: &StepanovParams, tau: f64, bracket: &DefectBracket) -> Self {
        StepanovReport {
            p: params.p,
            tau,
            lower: bracket.lower,
            upper: bracket.upper,
            quad_points: params.s_quad_points,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum C0Variant {
    /// running sup of `‖q(t)‖`
    Sup,
    /// running sup of the unit-window `S^p` seminorm
    Stepanov(StepanovParams),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C0Report {
    pub ok: bool,
    pub horizon: f64,
    pub window_sup: f64,
    /// `(checkpoint c, sup over [0.9c, c])` at `c = horizon / 2^k`.
    pub profile: Vec<(f64, f64)>,
}

const C0_CHECKPOINTS: usize = 6;
const C0_WINDOW_POINTS: usize = 1000;

/// Finite-horizon stand-in for `q ∈ C_0([0,∞))`: the sup over
/// `[0.9·horizon, horizon]` must be at most `tol`.
pub fn c0_check<S: Signal + ?Sized>(
    q: &S,
    tol: f64,
    horizon: f64,
    variant: C0Variant,
) -> Result<C0Report> {
    require_positive("horizon", horizon)?;
    require_positive("tol", tol)?;
    let reach = match variant {
        C0Variant::Sup => horizon,
        C0Variant::Stepanov(_) => horizon + 1.0,
    };
    let (start, end) = q.domain();
    if end < reach || start > 0.9 * horizon {
        return Err(Error::DomainTooShort {
            needed: reach,
            available: end,
        });
    }
    let kind = q.norm_kind();
    let window_sup = |c: f64| {
        let a = 0.9 * c;
        let h = (c - a) / C0_WINDOW_POINTS as f64;
        (0..=C0_WINDOW_POINTS)
            .map(|k| {
                let t = a + k as f64 * h;
                match variant {
                    C0Variant::Sup => q.eval(t).norm(kind),
                    C0Variant::Stepanov(params) => window_norm(q, t, &params),
                }
            })
            .fold(0.0, f64::max)
    };
    let mut profile: Vec<(f64, f64)> = (0..C0_CHECKPOINTS)
        .rev()
        .map(|k| horizon / f64::powi(2.0, k as i32))
        .filter(|&c| 0.9 * c >= start)
        .map(|c| (c, window_sup(c)))
        .collect();
    if profile.is_empty() {
        profile.push((horizon, window_sup(horizon)));
    }
    let last = profile[profile.len() - 1].1;
    Ok(C0Report {
        ok: last <= tol,
        horizon,
        window_sup: last,
        profile,
    })
}

/// Corrector part `q` of an asymptotic decomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum Corrector {
    Sampled(SampledFunction),
    Closed(ClosedForm),
}

impl Signal for Corrector {
    fn dim(&self) -> usize {
        match self {
            Corrector::Sampled(s) => s.dim(),
            Corrector::Closed(c) => c.dim(),
        }
    }
    fn norm_kind(&self) -> NormKind {
        match self {
            Corrector::Sampled(s) => s.norm_kind(),
            Corrector::Closed(c) => c.norm_kind(),
        }
    }
    fn eval(&self, t: f64) -> ComplexVec {
        match self {
            Corrector::Sampled(s) => s.eval(t),
            Corrector::Closed(c) => c.eval(t),
        }
    }
    fn domain(&self) -> (f64, f64) {
        match self {
            Corrector::Sampled(s) => s.domain(),
            Corrector::Closed(c) => c.domain(),
        }
    }
}

/// `f = g + q` on `[0, ∞)` with `g` almost anti-periodic and `q → 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticDecomposition {
    pub principal: TrigPolynomial,
    pub corrector: Corrector,
}

impl AsymptoticDecomposition {
    pub fn new(principal: TrigPolynomial, corrector: Corrector) -> Result<Self> {
        if principal.dim() != corrector.dim() {
            return Err(Error::DimensionMismatch {
                expected: principal.dim(),
                found: corrector.dim(),
            });
        }
        Ok(AsymptoticDecomposition {
            principal,
            corrector,
        })
    }
}

/// Evaluates `g + q` in the principal part's norm.
impl Signal for AsymptoticDecomposition {
    fn dim(&self) -> usize {
        self.principal.dim()
    }
    fn norm_kind(&self) -> NormKind {
        self.principal.norm_kind()
    }
    fn eval(&self, t: f64) -> ComplexVec {
        &self.principal.evaluate(t) + &self.corrector.eval(t)
    }
    fn domain(&self) -> (f64, f64) {
        let (_, end) = self.corrector.domain();
        (0.0, end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionCheck {
    /// pointwise tolerance for `f = g + q`
    pub identity_tol: f64,
    pub identity_step: f64,
    pub c0_tol: f64,
    pub horizon: f64,
    pub variant: C0Variant,
    /// ε for the antiperiod scan of `g`
    pub eps: f64,
    /// every window of this length must contain a certified ε-antiperiod
    pub window_len: f64,
    pub windows: usize,
    pub tau_step: f64,
}

impl Default for DecompositionCheck {
    fn default() -> Self {
        DecompositionCheck {
            identity_tol: 1e-10,
            identity_step: 0.01,
            c0_tol: 1e-3,
            horizon: 20.0,
            variant: C0Variant::Sup,
            eps: 0.1,
            window_len: 10.0,
            windows: 4,
            tau_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionVerdict {
    pub identity_ok: bool,
    pub c0_ok: bool,
    pub antiperiodic_ok: bool,
    pub horizon: f64,
    pub identity_error: f64,
    #[serde(serialize_with = "crate::files::serialize_extended_f64")]
    pub antiperiod_max_gap: f64,
    pub decay_profile: Vec<(f64, f64)>,
}

impl DecompositionVerdict {
    pub fn all_ok(&self) -> bool {
        self.identity_ok && self.c0_ok && self.antiperiodic_ok
    }
}

pub fn verify_decomposition<S: Signal + ?Sized>(
    f: &S,
    d: &AsymptoticDecomposition,
    check: &DecompositionCheck,
) -> Result<DecompositionVerdict> {
    require_positive("identity_step", check.identity_step)?;
    require_positive("window_len", check.window_len)?;
    if f.dim() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: d.dim(),
        });
    }
    let kind = f.norm_kind();
    let n = (check.horizon / check.identity_step).ceil() as usize;
    let identity_error = (0..=n)
        .map(|k| {
            let t = (k as f64 * check.identity_step).min(check.horizon);
            f.eval(t).distance(&d.eval(t), kind)
        })
        .fold(0.0, f64::max);

    let c0 = c0_check(&d.corrector, check.c0_tol, check.horizon, check.variant)?;

    let mut scan_config = ScanConfig::new(
        DefectMode::Anti,
        check.eps,
        check.window_len * check.windows.max(1) as f64,
        check.tau_step,
    );
    scan_config.grid = GridParams::default();
    let report = scan(&d.principal, &scan_config)?;

    Ok(DecompositionVerdict {
        identity_ok: identity_error <= check.identity_tol,
        c0_ok: c0.ok,
        antiperiodic_ok: report.max_gap <= check.window_len,
        horizon: check.horizon,
        identity_error,
        antiperiod_max_gap: report.max_gap,
        decay_profile: c0.profile,
    })
}
