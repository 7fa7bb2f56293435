//! Operator kernels `R(t) = t^{γ-1} e^{-bt} A` and their convolutions.
//!
//! * `G(t) = ∫_{-∞}^t R(t-s) g(s) ds = ∫_0^∞ R(s) g(t-s) ds` (infinite)
//! * `H(t) = ∫_0^t R(t-s) f(s) ds` (finite)
//!
//! An ε-antiperiod `τ` of `g` is an `Mε`-antiperiod of `G`, with
//! `M = Σ_k ‖R‖_{L^q[k,k+1]}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::quadrature::{panels, simpson, simpson_complex_with_estimate, simpson_weight};
use crate::scanner::{CertStatus, DefectMode, PeriodCertificate};
use crate::signals::{ComplexVec, NormKind, Signal, TrigPolynomial, TrigTerm};
use crate::stepanov::{AsymptoticDecomposition, DecompositionVerdict};

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    b: f64,
    gamma: f64,
    matrix: DMatrix<Complex64>,
}

impl Kernel {
    pub fn new(b: f64, gamma: f64, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        require_positive("b", b)?;
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::param(
                "gamma",
                format!("must lie in (0, 1], got {gamma}"),
            ));
        }
        let d = rows.len();
        if d == 0 {
            return Err(Error::param("matrix", "must have at least one row"));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::param(
                "matrix",
                format!("must be square: {d} rows but a row of length {}", bad.len()),
            ));
        }
        if rows
            .iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("matrix".into()));
        }
        let matrix = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Ok(Kernel { b, gamma, matrix })
    }

    /// `e^{-bt} I` on ℂ^d.
    pub fn exponential(b: f64, dim: usize) -> Result<Self> {
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        Self::new(b, 1.0, rows)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Kernel {
            matrix: self.matrix.map(|z| z * c),
            ..self.clone()
        }
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    /// Scalar profile `t^{γ-1} e^{-bt}`.
    pub fn weight(&self, t: f64) -> f64 {
        t.powf(self.gamma - 1.0) * (-self.b * t).exp()
    }

    /// Induced norm of `A`: spectral norm for Euclidean, max row sum for Max.
    pub fn operator_norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Euclidean => self.matrix.clone().singular_values().max(),
            NormKind::Max => (0..self.dim())
                .map(|i| self.matrix.row(i).iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }

    pub fn apply(&self, v: &ComplexVec) -> ComplexVec {
        let x = nalgebra::DVector::from_column_slice(v.components());
        ComplexVec::new((&self.matrix * x).iter().copied().collect())
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }

    /// `∫_S^∞ t^{γ-1} e^{-bt} dt ≤ e^{-bS}/b` for `S ≥ 1`.
    fn l1_tail(&self, s: f64) -> f64 {
        debug_assert!(s >= 1.0);
        (-self.b * s).exp() / self.b
    }
}

fn check_exponent(q: f64) -> Result<()> {
    if q >= 1.0 {
        Ok(())
    } else {
        Err(Error::param(
            "q",
            format!("must satisfy q >= 1 (or inf), got {q}"),
        ))
    }
}

/// Lower incomplete gamma function `γ(a, x)` by its positive series.
fn lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 1.0;
    while term > sum * 1e-17 && n < 100_000.0 {
        term *= x / (a + n);
        sum += term;
        n += 1.0;
    }
    sum * (a * x.ln() - x).exp()
}

const CELL_PANELS: usize = 2048;
const SERIES_LIMIT: f64 = 600.0;

/// `∫_a^{a+1} w(t)^q dt` for finite `q`.
fn cell_power_integral(kernel: &Kernel, q: f64, a: f64) -> Result<f64> {
    let beta = q * (kernel.gamma - 1.0);
    let rate = q * kernel.b;
    if a < 1.0 && kernel.gamma < 1.0 {
        if a == 0.0 && beta <= -1.0 {
            return Err(Error::NonIntegrable {
                q,
                gamma: kernel.gamma,
            });
        }
        // ∫_a^{a+1} t^β e^{-rt} dt = [γ(β+1, r(a+1)) − γ(β+1, ra)] / r^{β+1}
        if rate * (a + 1.0) <= SERIES_LIMIT {
            let s = beta + 1.0;
            return Ok(
                (lower_gamma(s, rate * (a + 1.0)) - lower_gamma(s, rate * a)) / rate.powf(s),
            );
        }
        // u = t^{β+1} removes the singularity on the first cell
        let s = beta + 1.0;
        let lo = a.powf(s);
        let hi = (a + 1.0).powf(s);
        return Ok(simpson(|u| (-rate * u.powf(1.0 / s)).exp(), lo, hi, CELL_PANELS) / s);
    }
    Ok(simpson(
        |t| kernel.weight(t).powf(q),
        a,
        a + 1.0,
        CELL_PANELS,
    ))
}

/// `‖R‖_{L^q[a, a+1]}`; `q = f64::INFINITY` gives the essential sup.
pub fn lq_norm(kernel: &Kernel, q: f64, a: f64, kind: NormKind) -> Result<f64> {
    check_exponent(q)?;
    if !(a.is_finite() && a >= 0.0) {
        return Err(Error::param(
            "a",
            format!("cell start must be finite and >= 0, got {a}"),
        ));
    }
    let op = kernel.operator_norm(kind);
    if q.is_infinite() {
        if a == 0.0 && kernel.gamma < 1.0 {
            return Err(Error::NonIntegrable {
                q,
                gamma: kernel.gamma,
            });
        }
        // the profile is nonincreasing, so its sup sits at the left end
        return Ok(op * kernel.weight(a));
    }
    Ok(op * cell_power_integral(kernel, q, a)?.powf(1.0 / q))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub q: f64,
    pub shift: f64,
    pub per_k_norms: Vec<f64>,
    pub partial_sum: f64,
    pub tail_bound: f64,
    /// `partial_sum + tail_bound`, an upper bound on the full series
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "truncation_K")]
    pub truncation_k: usize,
    pub operator_norm: f64,
    pub norm_kind: NormKind,
}

const MAX_CELLS: usize = 10_000_000;

/// `M = Σ_k ‖R‖_{L^q[k,k+1]}`, truncated once the exponential tail bound
/// drops below `tol`.
pub fn summability(kernel: &Kernel, q: f64, tol: f64, kind: NormKind) -> Result<SummabilityReport> {
    summability_shifted(kernel, q, 0.0, tol, kind)
}

/// `m_s = Σ_k ‖R‖_{L^q[s+k,s+k+1]}`.
pub fn summability_shifted(
    kernel: &Kernel,
    q: f64,
    s: f64,
    tol: f64,
    kind: NormKind,
) -> Result<SummabilityReport> {
    check_exponent(q)?;
    require_positive("tol", tol)?;
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::param(
            "s",
            format!("shift must be finite and >= 0, got {s}"),
        ));
    }
    let op = kernel.operator_norm(kind);
    let decay = (-kernel.b).exp();
    // for s + k ≥ 1: ‖R‖_{L^q[s+k, s+k+1]} ≤ ‖A‖ e^{-b(s+k)}
    let tail = |k: usize| op * (-kernel.b * (s + k as f64)).exp() / (1.0 - decay);
    let mut k = 0usize;
    while s + (k as f64) < 1.0 || tail(k) > tol {
        k += 1;
        if k > MAX_CELLS {
            return Err(Error::ToleranceUnreachable(format!(
                "summability tail still above {tol} after {MAX_CELLS} cells"
            )));
        }
    }
    let per_k_norms = (0..k)
        .map(|j| lq_norm(kernel, q, s + j as f64, kind))
        .collect::<Result<Vec<_>>>()?;
    let partial_sum: f64 = per_k_norms.iter().sum();
    let tail_bound = tail(k);
    Ok(SummabilityReport {
        q,
        shift: s,
        per_k_norms,
        partial_sum,
        tail_bound,
        m: partial_sum + tail_bound,
        truncation_k: k,
        operator_norm: op,
        norm_kind: kind,
    })
}

/// Conjugate exponent `q` of `p` (`p = 1` gives `q = ∞`).
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvolutionKind {
    Infinite,
    Finite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionConfig {
    /// Simpson step
    pub quad_step: f64,
    /// truncation tolerance for the kernel tail beyond `S`
    pub tol: f64,
    /// declared quadrature tolerance; exceeded estimates are errors
    pub quad_tol: f64,
    /// largest admissible truncation point
    pub s_cap: f64,
}

impl Default for ConvolutionConfig {
    fn default() -> Self {
        ConvolutionConfig {
            quad_step: 1e-3,
            tol: 1e-10,
            quad_tol: 1e-8,
            s_cap: 1e4,
        }
    }
}

impl ConvolutionConfig {
    fn validate(&self) -> Result<()> {
        require_positive("quad_step", self.quad_step)?;
        require_positive("tol", self.tol)?;
        require_positive("quad_tol", self.quad_tol)?;
        require_positive("s_cap", self.s_cap)?;
        Ok(())
    }

    /// Declared per-evaluation error budget (quadrature plus truncation).
    pub fn declared_tolerance(&self) -> f64 {
        self.quad_tol + self.tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionResult {
    pub kind: ConvolutionKind,
    pub t_grid: Vec<f64>,
    pub values: Vec<ComplexVec>,
    pub truncation_s: f64,
    pub tail_error_bound: f64,
    pub quad_error_estimate: f64,
    /// `G` itself, for the infinite product of a polynomial.
    pub polynomial: Option<TrigPolynomial>,
}

fn multiple_of_four(n: usize) -> usize {
    n.div_ceil(4) * 4
}

/// Truncation point `S ≥ 1` with `‖A‖ · sup‖g‖ · e^{-bS}/b ≤ tol`.
fn truncation_point(kernel: &Kernel, scale: f64, config: &ConvolutionConfig) -> Result<(f64, f64)> {
    if scale == 0.0 {
        return Ok((1.0, 0.0));
    }
    let s = ((scale / (kernel.b * config.tol)).ln() / kernel.b).max(1.0);
    if s > config.s_cap {
        return Err(Error::ToleranceUnreachable(format!(
            "kernel tail needs S = {s:.3e} > cap {:.3e} for tolerance {:.3e}",
            config.s_cap, config.tol
        )));
    }
    Ok((s, scale * kernel.l1_tail(s)))
}

/// `∫_0^1 s^{γ-1} e^{-bs} φ(s) ds`, using `u = s^γ` when `γ < 1`.
fn first_cell<F: FnMut(f64) -> Complex64>(
    kernel: &Kernel,
    mut phi: F,
    upper: f64,
    step: f64,
) -> (Complex64, f64) {
    let g = kernel.gamma;
    let b = kernel.b;
    if g < 1.0 {
        let u_max = upper.powf(g);
        let n = multiple_of_four(panels(u_max, step));
        let (v, e) = simpson_complex_with_estimate(
            |u| {
                let s = u.powf(1.0 / g);
                phi(s) * ((-b * s).exp() / g)
            },
            0.0,
            u_max,
            n,
        );
        (v, e)
    } else {
        let n = multiple_of_four(panels(upper, step));
        simpson_complex_with_estimate(|s| phi(s) * (-b * s).exp(), 0.0, upper, n)
    }
}

/// `∫_0^S w(s) e^{-iλs} ds` with its Richardson error estimate.
fn transfer_weight(kernel: &Kernel, freq: f64, s_max: f64, step: f64) -> (Complex64, f64) {
    let (head, e1) = first_cell(
        kernel,
        |s| Complex64::cis(-freq * s),
        1.0f64.min(s_max),
        step,
    );
    if s_max <= 1.0 {
        return (head, e1);
    }
    let n = multiple_of_four(panels(s_max - 1.0, step));
    let (tail, e2) = simpson_complex_with_estimate(
        |s| Complex64::cis(-freq * s) * kernel.weight(s),
        1.0,
        s_max,
        n,
    );
    (head + tail, e1 + e2)
}

/// Infinite convolution of a polynomial. Each term `c e^{iλt}` maps to
/// `A c Ĵ(λ) e^{iλt}` with `Ĵ(λ) = ∫_0^S w(s) e^{-iλs} ds` by quadrature.
pub fn convolve_infinite(
    kernel: &Kernel,
    g: &TrigPolynomial,
    t_grid: &[f64],
    config: &ConvolutionConfig,
) -> Result<ConvolutionResult> {
    config.validate()?;
    kernel.check_dim(g.dim())?;
    let op = kernel.operator_norm(g.norm_kind());
    let (s_max, tail_error_bound) = truncation_point(kernel, op * g.coefficient_sum(), config)?;

    let weights: Vec<(Complex64, f64)> = g
        .terms()
        .par_iter()
        .map(|t| transfer_weight(kernel, t.freq, s_max, config.quad_step))
        .collect();
    let mut quad_error_estimate = 0.0;
    let mut terms = Vec::with_capacity(weights.len());
    for (term, (w, err)) in g.terms().iter().zip(weights) {
        let image = kernel.apply(&term.coeff);
        quad_error_estimate += image.norm(g.norm_kind()) * err;
        terms.push(TrigTerm::new(term.freq, image.scaled(w)));
    }
    check_quadrature(quad_error_estimate, config)?;
    let polynomial = TrigPolynomial::from_terms(g.dim(), g.norm_kind(), terms)?;
    let values = t_grid.par_iter().map(|&t| polynomial.evaluate(t)).collect();
    Ok(ConvolutionResult {
        kind: ConvolutionKind::Infinite,
        t_grid: t_grid.to_vec(),
        values,
        truncation_s: s_max,
        tail_error_bound,
        quad_error_estimate,
        polynomial: Some(polynomial),
    })
}

fn check_quadrature(estimate: f64, config: &ConvolutionConfig) -> Result<()> {
    if estimate > config.quad_tol {
        return Err(Error::ToleranceUnreachable(format!(
            "quadrature error estimate {estimate:.3e} exceeds declared {:.3e}; reduce quad_step",
            config.quad_tol
        )));
    }
    Ok(())
}

/// Vector Simpson rule with Richardson estimate (`n` divisible by 4).
fn simpson_vec_estimate<F: FnMut(f64) -> ComplexVec>(
    mut f: F,
    a: f64,
    b: f64,
    n: usize,
    dim: usize,
    kind: NormKind,
) -> (ComplexVec, f64) {
    let h = (b - a) / n as f64;
    let mut fine = ComplexVec::zeros(dim);
    let mut coarse = ComplexVec::zeros(dim);
    for k in 0..=n {
        let v = f(a + k as f64 * h);
        fine.add_scaled(Complex64::new(simpson_weight(k, n), 0.0), &v);
        if k % 2 == 0 {
            coarse.add_scaled(Complex64::new(simpson_weight(k / 2, n / 2), 0.0), &v);
        }
    }
    let fine = fine.scaled(Complex64::new(h / 3.0, 0.0));
    let coarse = coarse.scaled(Complex64::new(2.0 * h / 3.0, 0.0));
    let err = fine.distance(&coarse, kind) / 15.0;
    (fine, err)
}

/// `A ∫_0^L w(r) f(t - r) dr` with the singular first cell handled by
/// substitution. Returns the value and its quadrature error estimate.
fn lagged_integral<S: Signal + ?Sized>(
    kernel: &Kernel,
    f: &S,
    t: f64,
    len: f64,
    step: f64,
) -> (ComplexVec, f64) {
    let dim = f.dim();
    let kind = f.norm_kind();
    if len <= 0.0 {
        return (ComplexVec::zeros(dim), 0.0);
    }
    let g = kernel.gamma;
    let b = kernel.b;
    let head_len = len.min(1.0);
    let (head, e1) = if g < 1.0 {
        let u_max = head_len.powf(g);
        let n = multiple_of_four(panels(u_max, step));
        simpson_vec_estimate(
            |u| {
                let r = u.powf(1.0 / g);
                f.eval(t - r)
                    .scaled(Complex64::new((-b * r).exp() / g, 0.0))
            },
            0.0,
            u_max,
            n,
            dim,
            kind,
        )
    } else {
        let n = multiple_of_four(panels(head_len, step));
        simpson_vec_estimate(
            |r| f.eval(t - r).scaled(Complex64::new((-b * r).exp(), 0.0)),
            0.0,
            head_len,
            n,
            dim,
            kind,
        )
    };
    let mut total = head;
    let mut err = e1;
    if len > 1.0 {
        let n = multiple_of_four(panels(len - 1.0, step));
        let (tail, e2) = simpson_vec_estimate(
            |r| f.eval(t - r).scaled(Complex64::new(kernel.weight(r), 0.0)),
            1.0,
            len,
            n,
            dim,
            kind,
        );
        total += &tail;
        err += e2;
    }
    (kernel.apply(&total), kernel.operator_norm(kind) * err)
}

/// `G(t) = ∫_{t-S}^t R(t-s) g(s) ds`, integrated pointwise in the original
/// variable. Independent of the per-frequency route in [`convolve_infinite`].
pub fn convolve_infinite_direct(
    kernel: &Kernel,
    g: &TrigPolynomial,
    t_grid: &[f64],
    config: &ConvolutionConfig,
) -> Result<ConvolutionResult> {
    config.validate()?;
    kernel.check_dim(g.dim())?;
    let kind = g.norm_kind();
    let op = kernel.operator_norm(kind);
    let (s_max, tail_error_bound) = truncation_point(kernel, op * g.coefficient_sum(), config)?;
    let gam = kernel.gamma;
    let b = kernel.b;
    let step = config.quad_step;

    let pointwise: Vec<(ComplexVec, f64)> = t_grid
        .par_iter()
        .map(|&t| {
            // s ∈ [t-1, t] with v = (t-s)^γ
            let n = multiple_of_four(panels(1.0, step));
            let (near, e1) = simpson_vec_estimate(
                |v| {
                    let lag = v.powf(1.0 / gam);
                    g.evaluate(t - lag)
                        .scaled(Complex64::new((-b * lag).exp() / gam, 0.0))
                },
                0.0,
                1.0,
                n,
                g.dim(),
                kind,
            );
            let m = multiple_of_four(panels(s_max - 1.0, step));
            let (far, e2) = if s_max > 1.0 {
                simpson_vec_estimate(
                    |s| {
                        g.evaluate(s)
                            .scaled(Complex64::new(kernel.weight(t - s), 0.0))
                    },
                    t - s_max,
                    t - 1.0,
                    m,
                    g.dim(),
                    kind,
                )
            } else {
                (ComplexVec::zeros(g.dim()), 0.0)
            };
            (kernel.apply(&(&near + &far)), op * (e1 + e2))
        })
        .collect();
    let quad_error_estimate = pointwise.iter().map(|p| p.1).fold(0.0, f64::max);
    check_quadrature(quad_error_estimate, config)?;
    Ok(ConvolutionResult {
        kind: ConvolutionKind::Infinite,
        t_grid: t_grid.to_vec(),
        values: pointwise.into_iter().map(|p| p.0).collect(),
        truncation_s: s_max,
        tail_error_bound,
        quad_error_estimate,
        polynomial: None,
    })
}

/// `H(t) = ∫_0^t R(t-s) f(s) ds` for `t ≥ 0`.
pub fn convolve_finite<S: Signal + ?Sized>(
    kernel: &Kernel,
    f: &S,
    t_grid: &[f64],
    config: &ConvolutionConfig,
) -> Result<ConvolutionResult> {
    config.validate()?;
    kernel.check_dim(f.dim())?;
    if let Some(t) = t_grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::param(
            "t_grid",
            format!("finite convolution needs finite t >= 0, got {t}"),
        ));
    }
    let t_end = t_grid.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = f.domain();
    if lo > 0.0 || hi < t_end {
        return Err(Error::DomainTooShort {
            needed: t_end,
            available: hi,
        });
    }
    let pointwise: Vec<(ComplexVec, f64)> = t_grid
        .par_iter()
        .map(|&t| lagged_integral(kernel, f, t, t, config.quad_step))
        .collect();
    let quad_error_estimate = pointwise.iter().map(|p| p.1).fold(0.0, f64::max);
    check_quadrature(quad_error_estimate, config)?;
    Ok(ConvolutionResult {
        kind: ConvolutionKind::Finite,
        t_grid: t_grid.to_vec(),
        values: pointwise.into_iter().map(|p| p.0).collect(),
        truncation_s: t_end,
        tail_error_bound: 0.0,
        quad_error_estimate,
        polynomial: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferVerdict {
    pub tau: f64,
    pub eps: f64,
    pub measured_defect: f64,
    pub bound: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub margin: f64,
    pub holds: bool,
}

/// Reusable check of `sup_t ‖G(t+τ) + G(t)‖ ≤ M ε + 2 · (declared tolerances)`
/// for many certificates of the same `g`.
pub struct TransferChecker {
    g_conv: TrigPolynomial,
    m: f64,
    slack: f64,
    t_span: f64,
    t_points: usize,
}

impl TransferChecker {
    pub fn new(
        kernel: &Kernel,
        g: &TrigPolynomial,
        q: f64,
        config: &ConvolutionConfig,
    ) -> Result<Self> {
        let result = convolve_infinite(kernel, g, &[], config)?;
        let summ = summability(kernel, q, config.tol, g.norm_kind())?;
        Ok(TransferChecker {
            g_conv: result
                .polynomial
                .expect("infinite convolution of a polynomial"),
            m: summ.m,
            slack: 2.0 * config.declared_tolerance(),
            t_span: 20.0,
            t_points: 401,
        })
    }

    /// Grid `t ∈ [0, span]` on which the defect of `G` is measured.
    pub fn with_grid(mut self, span: f64, points: usize) -> Self {
        self.t_span = span;
        self.t_points = points.max(2);
        self
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn convolved(&self) -> &TrigPolynomial {
        &self.g_conv
    }

    pub fn check(&self, cert: &PeriodCertificate) -> Result<TransferVerdict> {
        if cert.mode != DefectMode::Anti || cert.status != CertStatus::Certified {
            return Err(Error::Precondition(format!(
                "transfer needs a certified anti-period, got {:?} {:?}",
                cert.mode, cert.status
            )));
        }
        let kind = self.g_conv.norm_kind();
        let h = self.t_span / (self.t_points - 1) as f64;
        let measured_defect = (0..self.t_points)
            .map(|k| {
                let t = k as f64 * h;
                (&self.g_conv.evaluate(t + cert.tau) + &self.g_conv.evaluate(t)).norm(kind)
            })
            .fold(0.0, f64::max);
        let bound = self.m * cert.eps + self.slack;
        Ok(TransferVerdict {
            tau: cert.tau,
            eps: cert.eps,
            measured_defect,
            bound,
            m: self.m,
            margin: bound - measured_defect,
            holds: measured_defect <= bound,
        })
    }
}

pub fn transfer_check(
    kernel: &Kernel,
    g: &TrigPolynomial,
    cert: &PeriodCertificate,
    q: f64,
    config: &ConvolutionConfig,
) -> Result<TransferVerdict> {
    TransferChecker::new(kernel, g, q, config)?.check(cert)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCheckConfig {
    pub checkpoints: Vec<f64>,
    pub cond_tol: f64,
    pub outer_points: usize,
    pub late_window_start: f64,
    pub late_points: usize,
    pub late_tol: f64,
    pub conv: ConvolutionConfig,
}

impl Default for DecayCheckConfig {
    fn default() -> Self {
        DecayCheckConfig {
            checkpoints: vec![5.0, 10.0, 20.0, 30.0],
            cond_tol: 1e-9,
            outer_points: 33,
            late_window_start: 20.0,
            late_points: 21,
            late_tol: 1e-4,
            conv: ConvolutionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayVerdict {
    /// `(t, ∫_t^{t+1} [∫_M^s ‖R(r)‖ ‖q(s-r)‖ dr]^p ds)`
    pub condition_i: Vec<(f64, f64)>,
    /// `(t, ∫_t^{t+1} m_s^p ds)`
    pub condition_ii: Vec<(f64, f64)>,
    pub condition_i_ok: bool,
    pub condition_ii_ok: bool,
    /// `max ‖H(t) − G_g(t)‖` over the late window
    pub late_gap: f64,
    pub late_ok: bool,
}

fn decays_below(values: &[(f64, f64)], tol: f64) -> bool {
    values.windows(2).all(|w| w[1].1 <= w[0].1) && values.last().is_some_and(|v| v.1 <= tol)
}

/// Window integrals of both decay conditions at the configured checkpoints,
/// then the late-time agreement of `H` (for `f = g + q`) with `G_g`.
pub fn decay_conditions_check(
    kernel: &Kernel,
    decomposition: &AsymptoticDecomposition,
    verdict: &DecompositionVerdict,
    p: f64,
    m_split: f64,
    config: &DecayCheckConfig,
) -> Result<DecayVerdict> {
    if !verdict.all_ok() {
        return Err(Error::Precondition(format!(
            "unverified decomposition: {verdict:?}"
        )));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::param(
            "p",
            format!("must satisfy 1 <= p < inf, got {p}"),
        ));
    }
    require_positive("m_split", m_split)?;
    config.conv.validate()?;
    if config.outer_points < 3 || config.outer_points.is_multiple_of(2) {
        return Err(Error::param(
            "outer_points",
            "Simpson needs an odd count >= 3",
        ));
    }
    let g = &decomposition.principal;
    let q_part = &decomposition.corrector;
    kernel.check_dim(g.dim())?;
    let kind = g.norm_kind();
    let op = kernel.operator_norm(kind);
    let q_exp = conjugate_exponent(p);
    let outer_n = config.outer_points - 1;
    let step = config.conv.quad_step;

    let inner = |s: f64| -> f64 {
        if s <= m_split {
            return 0.0;
        }
        let n = panels(s - m_split, step);
        op * simpson(
            |r| kernel.weight(r) * q_part.eval(s - r).norm(kind),
            m_split,
            s,
            n,
        )
    };
    let condition_i: Vec<(f64, f64)> = config
        .checkpoints
        .par_iter()
        .map(|&t| (t, simpson(|s| inner(s).powf(p), t, t + 1.0, outer_n)))
        .collect();

    let m_at = |s: f64| -> Result<f64> {
        let scale = op * (-kernel.b * s).exp();
        let tol = (scale * 1e-12).max(f64::MIN_POSITIVE);
        Ok(summability_shifted(kernel, q_exp, s, tol, kind)?.m)
    };
    let condition_ii = config
        .checkpoints
        .par_iter()
        .map(|&t| {
            let h = 1.0 / outer_n as f64;
            let mut acc = 0.0;
            for k in 0..=outer_n {
                acc += simpson_weight(k, outer_n) * m_at(t + k as f64 * h)?.powf(p);
            }
            Ok((t, acc * h / 3.0))
        })
        .collect::<Result<Vec<_>>>()?;

    let h = 1.0 / (config.late_points.max(2) - 1) as f64;
    let late_grid: Vec<f64> = (0..config.late_points.max(2))
        .map(|k| config.late_window_start + k as f64 * h)
        .collect();
    let hh = convolve_finite(kernel, decomposition, &late_grid, &config.conv)?;
    let gg = convolve_infinite(kernel, g, &late_grid, &config.conv)?;
    let late_gap = hh
        .values
        .iter()
        .zip(&gg.values)
        .map(|(a, b)| a.distance(b, kind))
        .fold(0.0, f64::max);

    Ok(DecayVerdict {
        condition_i_ok: decays_below(&condition_i, config.cond_tol),
        condition_ii_ok: decays_below(&condition_ii, config.cond_tol),
        condition_i,
        condition_ii,
        late_gap,
        late_ok: late_gap <= config.late_tol,
    })
}
