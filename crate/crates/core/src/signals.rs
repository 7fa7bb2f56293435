//! Vector-valued trigonometric polynomials and sampled signals.
//!
//! A [`TrigPolynomial`] is the finite sum `f(t) = Σ c_j e^{iλ_j t}` with
//! coefficients `c_j ∈ ℂ^d`. It is held in canonical form: frequencies
//! strictly increasing, near-equal frequencies merged, vanishing
//! coefficients dropped. Every linear operation returns a canonical value.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Coefficients with norm at or below this are treated as zero.
pub const COEFF_TOL: f64 = 1e-14;
/// Default merge distance for frequencies.
pub const DEFAULT_FREQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    #[default]
    Euclidean,
    Max,
}

/// An element of ℂ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    pub fn new(components: Vec<Complex64>) -> Self {
        ComplexVec(components)
    }

    pub fn zeros(dim: usize) -> Self {
        ComplexVec(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn real(values: &[f64]) -> Self {
        ComplexVec(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn scalar(z: Complex64) -> Self {
        ComplexVec(vec![z])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::Euclidean => self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
            NormKind::Max => self.0.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        ComplexVec(self.0.iter().map(|z| z * c).collect())
    }

    /// `self += c · other`
    pub fn add_scaled(&mut self, c: Complex64, other: &ComplexVec) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += c * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn distance(&self, other: &ComplexVec, kind: NormKind) -> f64 {
        (self - other).norm(kind)
    }
}

impl Index<usize> for ComplexVec {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl AddAssign<&ComplexVec> for ComplexVec {
    fn add_assign(&mut self, rhs: &ComplexVec) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl Add for &ComplexVec {
    type Output = ComplexVec;
    fn add(self, rhs: &ComplexVec) -> ComplexVec {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &ComplexVec {
    type Output = ComplexVec;
    fn sub(self, rhs: &ComplexVec) -> ComplexVec {
        debug_assert_eq!(self.dim(), rhs.dim());
        ComplexVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &ComplexVec {
    type Output = ComplexVec;
    fn neg(self) -> ComplexVec {
        ComplexVec(self.0.iter().map(|z| -z).collect())
    }
}

impl Mul<Complex64> for &ComplexVec {
    type Output = ComplexVec;
    fn mul(self, c: Complex64) -> ComplexVec {
        self.scaled(c)
    }
}

/// Anything that can be evaluated pointwise as a ℂ^d-valued function of time.
pub trait Signal: Sync {
    fn dim(&self) -> usize;
    fn norm_kind(&self) -> NormKind;
    fn eval(&self, t: f64) -> ComplexVec;

    /// Interval on which the signal is represented.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigTerm {
    pub freq: f64,
    pub coeff: ComplexVec,
}

impl TrigTerm {
    pub fn new(freq: f64, coeff: ComplexVec) -> Self {
        TrigTerm { freq, coeff }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    dim: usize,
    norm_kind: NormKind,
    terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn zero(dim: usize, norm_kind: NormKind) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        TrigPolynomial {
            dim,
            norm_kind,
            terms: Vec::new(),
        }
    }

    /// Merges frequencies closer than `freq_tol` and drops terms whose
    /// coefficient norm is at most [`COEFF_TOL`].
    pub fn canonicalize(
        dim: usize,
        norm_kind: NormKind,
        terms: Vec<TrigTerm>,
        freq_tol: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        if !(freq_tol.is_finite() && freq_tol >= 0.0) {
            return Err(Error::param(
                "freq_tol",
                format!("must be finite and >= 0, got {freq_tol}"),
            ));
        }
        for (j, term) in terms.iter().enumerate() {
            if !term.freq.is_finite() {
                return Err(Error::NonFinite(format!("terms[{j}].freq")));
            }
            if term.coeff.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: term.coeff.dim(),
                });
            }
            if !term.coeff.is_finite() {
                return Err(Error::NonFinite(format!("terms[{j}].coeff")));
            }
        }

        let mut sorted = terms;
        sorted.sort_by(|a, b| a.freq.total_cmp(&b.freq));

        let mut merged: Vec<TrigTerm> = Vec::with_capacity(sorted.len());
        let mut last_freq = f64::NAN;
        for term in sorted {
            match merged.last_mut() {
                Some(head) if term.freq - last_freq <= freq_tol => {
                    head.coeff += &term.coeff;
                }
                _ => merged.push(TrigTerm {
                    // fold -0.0 into 0.0 so files stay byte-stable
                    freq: if term.freq == 0.0 { 0.0 } else { term.freq },
                    coeff: term.coeff.clone(),
                }),
            }
            last_freq = term.freq;
        }
        merged.retain(|t| t.coeff.norm(norm_kind) > COEFF_TOL);

        Ok(TrigPolynomial {
            dim,
            norm_kind,
            terms: merged,
        })
    }

    pub fn from_terms(dim: usize, norm_kind: NormKind, terms: Vec<TrigTerm>) -> Result<Self> {
        Self::canonicalize(dim, norm_kind, terms, DEFAULT_FREQ_TOL)
    }

    /// Scalar polynomial from `(frequency, coefficient)` pairs.
    pub fn scalar(pairs: &[(f64, Complex64)]) -> Result<Self> {
        let terms = pairs
            .iter()
            .map(|&(freq, c)| TrigTerm::new(freq, ComplexVec::scalar(c)))
            .collect();
        Self::from_terms(1, NormKind::Euclidean, terms)
    }

    pub fn constant(value: ComplexVec, norm_kind: NormKind) -> Result<Self> {
        let dim = value.dim();
        Self::from_terms(dim, norm_kind, vec![TrigTerm::new(0.0, value)])
    }

    /// `amplitude · cos(freq · t)` as a scalar polynomial.
    pub fn cosine(amplitude: f64, freq: f64) -> Self {
        let half = Complex64::new(amplitude / 2.0, 0.0);
        Self::scalar(&[(freq, half), (-freq, half)]).expect("finite cosine")
    }

    /// `amplitude · sin(freq · t)` as a scalar polynomial.
    pub fn sine(amplitude: f64, freq: f64) -> Self {
        let c = Complex64::new(0.0, -amplitude / 2.0);
        Self::scalar(&[(freq, c), (-freq, -c)]).expect("finite sine")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|t| t.freq)
    }

    pub fn with_norm_kind(mut self, norm_kind: NormKind) -> Self {
        self.norm_kind = norm_kind;
        self.terms.retain(|t| t.coeff.norm(norm_kind) > COEFF_TOL);
        self
    }

    pub fn evaluate(&self, t: f64) -> ComplexVec {
        let mut out = ComplexVec::zeros(self.dim);
        for term in &self.terms {
            out.add_scaled(Complex64::cis(term.freq * t), &term.coeff);
        }
        out
    }

    fn check_compatible(&self, other: &TrigPolynomial) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        if self.norm_kind != other.norm_kind {
            return Err(Error::NormMismatch);
        }
        Ok(())
    }

    fn rebuild(&self, terms: Vec<TrigTerm>) -> Self {
        Self::canonicalize(self.dim, self.norm_kind, terms, DEFAULT_FREQ_TOL)
            .expect("operation on a canonical polynomial stays finite")
    }

    pub fn add(&self, other: &TrigPolynomial) -> Result<Self> {
        self.check_compatible(other)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Ok(self.rebuild(terms))
    }

    pub fn sub(&self, other: &TrigPolynomial) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| TrigTerm::new(t.freq, t.coeff.scaled(c)))
            .collect();
        self.rebuild(terms)
    }

    /// `t ↦ e^{-irt} f(t)`: every frequency shifts down by `r`.
    pub fn modulate(&self, r: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| TrigTerm::new(t.freq - r, t.coeff.clone()))
            .collect();
        self.rebuild(terms)
    }

    /// `t ↦ f(t + a)`
    pub fn translate(&self, a: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| TrigTerm::new(t.freq, t.coeff.scaled(Complex64::cis(t.freq * a))))
            .collect();
        self.rebuild(terms)
    }

    /// `t ↦ f(b t)`
    pub fn dilate(&self, b: f64) -> Result<Self> {
        if b == 0.0 || !b.is_finite() {
            return Err(Error::param(
                "b",
                format!("dilation factor must be finite and nonzero, got {b}"),
            ));
        }
        let terms = self
            .terms
            .iter()
            .map(|t| TrigTerm::new(t.freq * b, t.coeff.clone()))
            .collect();
        Ok(self.rebuild(terms))
    }

    /// Global Lipschitz constant `Σ ‖c_j‖ |λ_j|`.
    pub fn lipschitz_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.norm(self.norm_kind) * t.freq.abs())
            .sum()
    }

    /// `Σ ‖c_j‖`, an upper bound on the sup norm.
    pub fn coefficient_sum(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.norm(self.norm_kind))
            .sum()
    }

    pub fn max_abs_frequency(&self) -> f64 {
        self.terms.iter().map(|t| t.freq.abs()).fold(0.0, f64::max)
    }

    /// Smallest nonzero `|λ_j|`, if any.
    pub fn min_nonzero_frequency(&self) -> Option<f64> {
        self.terms
            .iter()
            .map(|t| t.freq.abs())
            .filter(|&f| f > 0.0)
            .min_by(f64::total_cmp)
    }
}

impl Signal for TrigPolynomial {
    fn dim(&self) -> usize {
        self.dim
    }
    fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }
    fn eval(&self, t: f64) -> ComplexVec {
        self.evaluate(t)
    }
}

/// Odd harmonics of `π/ω`; every realization is exactly ω-anti-periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiPeriodicSpec {
    pub omega: f64,
    pub harmonics: Vec<(i64, ComplexVec)>,
}

pub fn generate_antiperiodic(
    spec: &AntiPeriodicSpec,
    norm_kind: NormKind,
) -> Result<TrigPolynomial> {
    require_positive("omega", spec.omega)?;
    let dim = match spec.harmonics.first() {
        Some((_, c)) => c.dim(),
        None => {
            return Err(Error::param(
                "harmonics",
                "at least one harmonic is required",
            ))
        }
    };
    let mut terms = Vec::with_capacity(spec.harmonics.len());
    for (index, coeff) in &spec.harmonics {
        if index.rem_euclid(2) != 1 {
            return Err(Error::param(
                "harmonics",
                format!("harmonic index {index} is even"),
            ));
        }
        terms.push(TrigTerm::new(
            *index as f64 * PI / spec.omega,
            coeff.clone(),
        ));
    }
    TrigPolynomial::from_terms(dim, norm_kind, terms)
}

/// Seeded random anti-periodic polynomial: harmonics `2k+1` with `k`
/// uniform in `0..=7`, coefficient components uniform in the unit disc.
pub fn random_antiperiodic(
    omega: f64,
    terms: usize,
    dim: usize,
    seed: u64,
    norm_kind: NormKind,
) -> Result<TrigPolynomial> {
    if terms == 0 {
        return Err(Error::param("terms", "must be at least 1"));
    }
    if dim == 0 {
        return Err(Error::param("dim", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let harmonics = (0..terms)
        .map(|_| {
            let k: i64 = rng.gen_range(0..=7);
            let coeff = (0..dim).map(|_| unit_disc_sample(&mut rng)).collect();
            (2 * k + 1, ComplexVec::new(coeff))
        })
        .collect();
    generate_antiperiodic(&AntiPeriodicSpec { omega, harmonics }, norm_kind)
}

fn unit_disc_sample<R: Rng>(rng: &mut R) -> Complex64 {
    let radius = rng.gen::<f64>().sqrt();
    let angle = rng.gen_range(0.0..2.0 * PI);
    Complex64::from_polar(radius, angle)
}

/// Uniformly sampled signal with linear interpolation between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    t0: f64,
    dt: f64,
    values: Vec<ComplexVec>,
    lipschitz: Option<f64>,
    norm_kind: NormKind,
}

impl SampledFunction {
    pub fn new(
        t0: f64,
        dt: f64,
        values: Vec<ComplexVec>,
        lipschitz: Option<f64>,
        norm_kind: NormKind,
    ) -> Result<Self> {
        if !t0.is_finite() {
            return Err(Error::NonFinite("t0".into()));
        }
        require_positive("dt", dt)?;
        let dim = match values.first() {
            Some(v) => v.dim(),
            None => return Err(Error::param("values", "must be nonempty")),
        };
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        for (k, v) in values.iter().enumerate() {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("values[{k}]")));
            }
        }
        if let Some(l) = lipschitz {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::param(
                    "lipschitz",
                    format!("must be finite and >= 0, got {l}"),
                ));
            }
            // relative slack for values written in decimal
            let limit = l * dt * (1.0 + 1e-9) + 1e-12;
            for (k, pair) in values.windows(2).enumerate() {
                let step = pair[1].distance(&pair[0], norm_kind);
                if step > limit {
                    return Err(Error::param(
                        "lipschitz",
                        format!(
                            "samples {k} and {} differ by {step}, more than lipschitz * dt = {}",
                            k + 1,
                            l * dt
                        ),
                    ));
                }
            }
        }
        Ok(SampledFunction {
            t0,
            dt,
            values,
            lipschitz,
            norm_kind,
        })
    }

    /// Samples `signal` on `t0, t0 + dt, …` (`n` points).
    pub fn sample<S: Signal + ?Sized>(
        signal: &S,
        t0: f64,
        dt: f64,
        n: usize,
        lipschitz: Option<f64>,
    ) -> Result<Self> {
        let values = (0..n).map(|k| signal.eval(t0 + k as f64 * dt)).collect();
        Self::new(t0, dt, values, lipschitz, signal.norm_kind())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[ComplexVec] {
        &self.values
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + (self.values.len() - 1) as f64 * self.dt
    }

    /// Linear interpolation; clamps to the end samples outside the domain.
    pub fn evaluate(&self, t: f64) -> ComplexVec {
        let n = self.values.len();
        let x = (t - self.t0) / self.dt;
        if x.is_nan() || x <= 0.0 || n == 1 {
            return self.values[0].clone();
        }
        let k = x.floor() as usize;
        if k >= n - 1 {
            return self.values[n - 1].clone();
        }
        let w = x - k as f64;
        let mut out = self.values[k].scaled(Complex64::new(1.0 - w, 0.0));
        out.add_scaled(Complex64::new(w, 0.0), &self.values[k + 1]);
        out
    }
}

impl Signal for SampledFunction {
    fn dim(&self) -> usize {
        self.values[0].dim()
    }
    fn norm_kind(&self) -> NormKind {
        self.norm_kind
    }
    fn eval(&self, t: f64) -> ComplexVec {
        self.evaluate(t)
    }
    fn domain(&self) -> (f64, f64) {
        (self.t0, self.t_end())
    }
}

/// Closed-form signals used as decomposition correctors.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedForm {
    /// `c e^{-rate t}`
    Exponential { rate: f64, coeff: ComplexVec },
    /// `c / (1 + t)`
    Reciprocal { coeff: ComplexVec },
    /// `c`
    Constant { coeff: ComplexVec },
}

impl ClosedForm {
    fn coeff(&self) -> &ComplexVec {
        match self {
            ClosedForm::Exponential { coeff, .. }
            | ClosedForm::Reciprocal { coeff }
            | ClosedForm::Constant { coeff } => coeff,
        }
    }
}

impl Signal for ClosedForm {
    fn dim(&self) -> usize {
        self.coeff().dim()
    }
    fn norm_kind(&self) -> NormKind {
        NormKind::Euclidean
    }
    fn eval(&self, t: f64) -> ComplexVec {
        let w = match self {
            ClosedForm::Exponential { rate, .. } => (-rate * t).exp(),
            ClosedForm::Reciprocal { .. } => 1.0 / (1.0 + t),
            ClosedForm::Constant { .. } => 1.0,
        };
        self.coeff().scaled(Complex64::new(w, 0.0))
    }
    fn domain(&self) -> (f64, f64) {
        match self {
            ClosedForm::Reciprocal { .. } => (0.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// Pointwise sum of two signals of equal dimension.
pub struct SumSignal<'a> {
    parts: Vec<&'a dyn Signal>,
}

impl<'a> SumSignal<'a> {
    pub fn new(parts: Vec<&'a dyn Signal>) -> Result<Self> {
        let dim = match parts.first() {
            Some(p) => p.dim(),
            None => return Err(Error::param("parts", "must be nonempty")),
        };
        if let Some(bad) = parts.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(SumSignal { parts })
    }
}

impl Signal for SumSignal<'_> {
    fn dim(&self) -> usize {
        self.parts[0].dim()
    }
    fn norm_kind(&self) -> NormKind {
        self.parts[0].norm_kind()
    }
    fn eval(&self, t: f64) -> ComplexVec {
        let mut out = self.parts[0].eval(t);
        for p in &self.parts[1..] {
            out += &p.eval(t);
        }
        out
    }
    fn domain(&self) -> (f64, f64) {
        self.parts
            .iter()
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), p| {
                let (a, b) = p.domain();
                (lo.max(a), hi.min(b))
            })
    }
}
