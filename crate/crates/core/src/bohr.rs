//! Bohr transform and membership in the closed span of almost
//! anti-periodic functions.
//!
//! For an almost periodic `f`, `P_r(f) = lim (1/T) ∫_0^T e^{-irs} f(s) ds`.
//! The closed linear span of almost anti-periodic functions consists of
//! exactly the almost periodic functions whose spectrum avoids `0`, so
//! membership reduces to `P_0(f) = 0` and the sup-norm distance to the span
//! is `‖P_0(f)‖`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::quadrature::{panels, simpson_weight};
use crate::signals::{ComplexVec, Signal, TrigPolynomial, TrigTerm, DEFAULT_FREQ_TOL};

/// Default `‖P_0(f)‖` threshold for membership.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-10;
/// Fixed shift used for the shifted-average consistency check.
pub const SHIFT_ALPHA: f64 = 17.3;
/// Simpson nodes per period of the fastest integrand component.
pub const NODES_PER_PERIOD: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BohrMethod {
    Exact,
    Numeric { horizon: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BohrCoefficient {
    pub freq: f64,
    pub value: ComplexVec,
    pub method: BohrMethod,
}

/// Stored coefficient at the term closest to `r` within `freq_tol`, or zero.
pub fn bohr_exact(f: &TrigPolynomial, r: f64, freq_tol: f64) -> BohrCoefficient {
    let value = f
        .terms()
        .iter()
        .filter(|t| (t.freq - r).abs() <= freq_tol)
        .min_by(|a, b| (a.freq - r).abs().total_cmp(&(b.freq - r).abs()))
        .map(|t| t.coeff.clone())
        .unwrap_or_else(|| ComplexVec::zeros(f.dim()));
    BohrCoefficient {
        freq: r,
        value,
        method: BohrMethod::Exact,
    }
}

/// Finite-horizon average over `[0, T]` and the same average shifted to
/// `[α, α + T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericAverage {
    pub coefficient: BohrCoefficient,
    pub shifted: ComplexVec,
    pub shift: f64,
}

/// Largest Simpson step resolving `e^{-irs} f(s)` with
/// [`NODES_PER_PERIOD`] nodes per period.
pub fn default_quad_step(f: &TrigPolynomial, r: f64) -> f64 {
    let fastest = f.frequencies().map(|l| (l - r).abs()).fold(1.0, f64::max);
    std::f64::consts::TAU / fastest / NODES_PER_PERIOD
}

fn samples<S: Signal + ?Sized>(f: &S, start: f64, h: f64, n: usize) -> Vec<ComplexVec> {
    (0..=n)
        .into_par_iter()
        .map(|k| f.eval(start + k as f64 * h))
        .collect()
}

fn weighted_average(values: &[ComplexVec], start: f64, h: f64, r: f64, horizon: f64) -> ComplexVec {
    let n = values.len() - 1;
    let dim = values[0].dim();
    let mut acc = ComplexVec::zeros(dim);
    for (k, v) in values.iter().enumerate() {
        let s = start + k as f64 * h;
        let w = Complex64::cis(-r * s) * simpson_weight(k, n);
        acc.add_scaled(w, v);
    }
    acc.scaled(Complex64::new(h / 3.0 / horizon, 0.0))
}

/// `(1/T) ∫_0^T e^{-irs} f(s) ds` by composite Simpson.
pub fn bohr_numeric<S: Signal + ?Sized>(
    f: &S,
    r: f64,
    horizon: f64,
    quad_step: f64,
) -> Result<NumericAverage> {
    Ok(bohr_numeric_many(f, &[r], horizon, quad_step)?.remove(0))
}

/// [`bohr_numeric`] for several frequencies, sampling `f` once.
pub fn bohr_numeric_many<S: Signal + ?Sized>(
    f: &S,
    freqs: &[f64],
    horizon: f64,
    quad_step: f64,
) -> Result<Vec<NumericAverage>> {
    require_positive("T", horizon)?;
    require_positive("quad_step", quad_step)?;
    if let Some(r) = freqs.iter().find(|r| !r.is_finite()) {
        return Err(Error::NonFinite(format!("frequency {r}")));
    }
    let (lo, hi) = f.domain();
    if lo > 0.0 || hi < horizon + SHIFT_ALPHA {
        return Err(Error::DomainTooShort {
            needed: horizon + SHIFT_ALPHA,
            available: hi,
        });
    }
    let n = panels(horizon, quad_step);
    let h = horizon / n as f64;
    let base = samples(f, 0.0, h, n);
    let shifted = samples(f, SHIFT_ALPHA, h, n);
    Ok(freqs
        .par_iter()
        .map(|&r| NumericAverage {
            coefficient: BohrCoefficient {
                freq: r,
                value: weighted_average(&base, 0.0, h, r, horizon),
                method: BohrMethod::Numeric { horizon },
            },
            shifted: weighted_average(&shifted, SHIFT_ALPHA, h, r, horizon),
            shift: SHIFT_ALPHA,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub freq: f64,
    pub coeff: ComplexVec,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumReport {
    pub entries: Vec<SpectrumEntry>,
}

pub fn spectrum(f: &TrigPolynomial) -> SpectrumReport {
    SpectrumReport {
        entries: f
            .terms()
            .iter()
            .map(|t| SpectrumEntry {
                freq: t.freq,
                coeff: t.coeff.clone(),
                norm: t.coeff.norm(f.norm_kind()),
            })
            .collect(),
    }
}

impl SpectrumReport {
    /// Rebuilds `Σ P_λ(f) e^{iλt}` over the spectrum.
    pub fn synthesize(&self, template: &TrigPolynomial) -> Result<TrigPolynomial> {
        let terms = self
            .entries
            .iter()
            .map(|e| TrigTerm::new(e.freq, e.coeff.clone()))
            .collect();
        TrigPolynomial::from_terms(template.dim(), template.norm_kind(), terms)
    }
}

pub const ANP_NOTE: &str =
    "membership in the closed span does not imply the function itself is almost anti-periodic";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnpVerdict {
    pub is_member: bool,
    pub distance: f64,
    #[serde(serialize_with = "crate::files::serialize_complex_vec")]
    pub mean: ComplexVec,
    pub membership_tol: f64,
    pub note: &'static str,
}

pub fn anp_membership(f: &TrigPolynomial, membership_tol: f64) -> Result<AnpVerdict> {
    if membership_tol.is_nan() || membership_tol < 0.0 {
        return Err(Error::param(
            "membership_tol",
            format!("must be >= 0, got {membership_tol}"),
        ));
    }
    let mean = bohr_exact(f, 0.0, DEFAULT_FREQ_TOL).value;
    let distance = mean.norm(f.norm_kind());
    Ok(AnpVerdict {
        is_member: distance <= membership_tol,
        distance,
        mean,
        membership_tol,
        note: ANP_NOTE,
    })
}

/// `f = (f − P_0 f) + P_0 f` with the first part in the closed span.
#[derive(Debug, Clone, PartialEq)]
pub struct AnpDistance {
    pub distance: f64,
    pub anp_part: TrigPolynomial,
    pub mean: ComplexVec,
}

pub fn anp_distance(f: &TrigPolynomial) -> AnpDistance {
    let mean = bohr_exact(f, 0.0, DEFAULT_FREQ_TOL).value;
    let anp_part = TrigPolynomial::from_terms(
        f.dim(),
        f.norm_kind(),
        f.terms()
            .iter()
            .filter(|t| t.freq.abs() > DEFAULT_FREQ_TOL)
            .cloned()
            .collect(),
    )
    .expect("subset of a canonical polynomial");
    AnpDistance {
        distance: mean.norm(f.norm_kind()),
        anp_part,
        mean,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyEvidence {
    pub freq: f64,
    /// `‖P_0(e^{-ir·} f)‖`, i.e. `‖P_r(f)‖`.
    pub modulated_mean_norm: f64,
    pub in_lambda: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaTest {
    pub holds: bool,
    pub evidence: Vec<FrequencyEvidence>,
    pub note: &'static str,
}

pub const LAMBDA_NOTE: &str =
    "only r in the spectrum are tested: for any other r the modulated function has zero mean";

/// Is `σ(f) ⊆ Λ`? Tested as: `e^{-ir·} f` has nonzero mean only for `r ∈ Λ`.
pub fn ap_lambda_test<P: Fn(f64) -> bool>(
    f: &TrigPolynomial,
    in_lambda: P,
    freq_tol: f64,
) -> LambdaTest {
    let evidence: Vec<FrequencyEvidence> = f
        .frequencies()
        .map(|r| {
            let modulated = f.modulate(r);
            let mean = bohr_exact(&modulated, 0.0, freq_tol).value;
            FrequencyEvidence {
                freq: r,
                modulated_mean_norm: mean.norm(f.norm_kind()),
                in_lambda: in_lambda(r),
            }
        })
        .collect();
    let holds = evidence
        .iter()
        .all(|e| e.in_lambda || e.modulated_mean_norm <= DEFAULT_MEMBERSHIP_TOL);
    LambdaTest {
        holds,
        evidence,
        note: LAMBDA_NOTE,
    }
}

/// Averages over one doubled antiperiod window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowAverage {
    /// `(1/2ω) ∫_0^{2ω} f`
    pub average: ComplexVec,
    /// `(1/2ω) ∫_0^ω ‖f(s) + f(s+ω)‖ ds`, which dominates `‖average‖`.
    pub folded_bound: f64,
}

pub fn antiperiod_window_average<S: Signal + ?Sized>(
    f: &S,
    omega: f64,
    quad_step: f64,
) -> Result<WindowAverage> {
    require_positive("omega", omega)?;
    require_positive("quad_step", quad_step)?;
    let kind = f.norm_kind();
    let n = panels(2.0 * omega, quad_step);
    let h = 2.0 * omega / n as f64;
    let values = samples(f, 0.0, h, n);
    let average = weighted_average(&values, 0.0, h, 0.0, 2.0 * omega);
    let m = panels(omega, quad_step);
    let folded = crate::quadrature::simpson(
        |s| (&f.eval(s) + &f.eval(s + omega)).norm(kind),
        0.0,
        omega,
        m,
    );
    Ok(WindowAverage {
        average,
        folded_bound: folded / (2.0 * omega),
    })
}
