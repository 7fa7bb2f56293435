use std::path::Path;

use serde::Serialize;

use apl_core::bohr::{
    anp_membership, bohr_exact, bohr_numeric_many, default_quad_step, spectrum,
    DEFAULT_MEMBERSHIP_TOL,
};
use apl_core::convolution::{
    convolve_finite, convolve_infinite, summability, ConvolutionConfig, ConvolutionKind,
};
use apl_core::files::{
    function_json, parse_scan_report, read_function, read_kernel, read_text, scan_report_json,
    serialize_complex_vec, serialize_extended_f64, to_json, trig_json, write_text, LoadedFunction,
};
use apl_core::scanner::{default_window, density_summary, scan, CertStatus, ScanConfig};
use apl_core::signals::random_antiperiodic;
use apl_core::stepanov::{sp_defect, StepanovParams, StepanovReport};
use apl_core::{ComplexVec, Error, NormKind, Result, TrigPolynomial};

use crate::{Command, GenKind};

/// Longest `t` window scanned by `stepanov`.
const STEPANOV_WINDOW_CAP: f64 = 200.0;
const STEPANOV_T_STEP: f64 = 0.05;

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be a positive finite number, got {value}"),
        })
    }
}

fn load_trig(path: &Path) -> Result<TrigPolynomial> {
    read_function(path)?.into_trig(&path.display().to_string())
}

fn emit<T: Serialize>(report: &T) {
    print!("{}", to_json(report));
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Analyze {
            function,
            freqs,
            numeric_t,
        } => analyze(&function, &freqs, numeric_t),
        Command::Scan {
            function,
            eps,
            tau_max,
            tau_step,
            mode,
            out,
            csv,
        } => {
            positive("eps", eps)?;
            positive("tau-max", tau_max)?;
            positive("tau-step", tau_step)?;
            let f = load_trig(&function)?;
            let report = scan(&f, &ScanConfig::new(mode.into(), eps, tau_max, tau_step))?;
            let json = scan_report_json(&report);
            if let Some(csv) = csv {
                write_text(&csv, &report.to_csv())?;
            }
            match out {
                Some(out) => {
                    write_text(&out, &json)?;
                    println!(
                        "{} certified, {} refuted, {} unknown; max_gap {}",
                        report.count(CertStatus::Certified),
                        report.count(CertStatus::Refuted),
                        report.count(CertStatus::Unknown),
                        report.max_gap
                    );
                }
                None => print!("{json}"),
            }
            Ok(())
        }
        Command::Density { report } => {
            let origin = report.display().to_string();
            let report = parse_scan_report(&read_text(&report)?, &origin)?;
            emit(&density_summary(&report));
            Ok(())
        }
        Command::Anp { function } => {
            let f = load_trig(&function)?;
            emit(&anp_membership(&f, DEFAULT_MEMBERSHIP_TOL)?);
            Ok(())
        }
        Command::Modulate {
            function,
            freq,
            out,
        } => {
            if !freq.is_finite() {
                return Err(Error::NonFinite("freq".into()));
            }
            let f = load_trig(&function)?;
            write_text(&out, &trig_json(&f.modulate(freq)))
        }
        Command::Convolve {
            kernel,
            signal,
            t0,
            t1,
            step,
            finite,
            q,
        } => convolve(&kernel, &signal, t0, t1, step, finite, q),
        Command::Stepanov { function, p, tau } => {
            positive("tau", tau)?;
            let params = StepanovParams::new(p)?;
            let f = load_trig(&function)?;
            let window = default_window(&f).min(STEPANOV_WINDOW_CAP);
            let bracket = sp_defect(&f, &params, tau, window, STEPANOV_T_STEP)?;
            emit(&StepanovReport::new(&params, tau, &bracket));
            Ok(())
        }
        Command::Gen {
            kind:
                GenKind::Anti {
                    omega,
                    terms,
                    dim,
                    seed,
                    out,
                },
        } => {
            positive("omega", omega)?;
            let f = random_antiperiodic(omega, terms, dim, seed, NormKind::Euclidean)?;
            write_text(&out, &function_json(&LoadedFunction::Trig(f)))
        }
    }
}

#[derive(Serialize)]
struct SpectrumLine {
    freq: f64,
    #[serde(serialize_with = "serialize_complex_vec")]
    coeff: ComplexVec,
    norm: f64,
}

#[derive(Serialize)]
struct CoefficientLine {
    freq: f64,
    method: &'static str,
    #[serde(serialize_with = "serialize_complex_vec")]
    value: ComplexVec,
}

#[derive(Serialize)]
struct NumericLine {
    freq: f64,
    #[serde(rename = "T")]
    horizon: f64,
    quad_step: f64,
    #[serde(serialize_with = "serialize_complex_vec")]
    value: ComplexVec,
    shift: f64,
    #[serde(serialize_with = "serialize_complex_vec")]
    shifted: ComplexVec,
}

#[derive(Serialize)]
struct AnalyzeReport {
    dim: usize,
    norm: NormKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<Vec<SpectrumLine>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    anp: Option<apl_core::bohr::AnpVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lipschitz_bound: Option<f64>,
    coefficients: Vec<CoefficientLine>,
    numeric: Vec<NumericLine>,
}

fn analyze(path: &Path, freqs: &[f64], numeric_t: Option<f64>) -> Result<()> {
    if let Some(t) = numeric_t {
        positive("numeric-T", t)?;
    }
    if let Some(r) = freqs.iter().find(|r| !r.is_finite()) {
        return Err(Error::NonFinite(format!("freqs entry {r}")));
    }
    let loaded = read_function(path)?;
    let signal = loaded.as_signal();
    let mut report = AnalyzeReport {
        dim: signal.dim(),
        norm: signal.norm_kind(),
        spectrum: None,
        anp: None,
        lipschitz_bound: None,
        coefficients: Vec::new(),
        numeric: Vec::new(),
    };
    let (probe, quad_step) = match &loaded {
        LoadedFunction::Trig(f) => {
            report.spectrum = Some(
                spectrum(f)
                    .entries
                    .into_iter()
                    .map(|e| SpectrumLine {
                        freq: e.freq,
                        coeff: e.coeff,
                        norm: e.norm,
                    })
                    .collect(),
            );
            report.anp = Some(anp_membership(f, DEFAULT_MEMBERSHIP_TOL)?);
            report.lipschitz_bound = Some(f.lipschitz_bound());
            let probe: Vec<f64> = if freqs.is_empty() {
                f.frequencies().collect()
            } else {
                freqs.to_vec()
            };
            report.coefficients = probe
                .iter()
                .map(|&r| CoefficientLine {
                    freq: r,
                    method: "exact",
                    value: bohr_exact(f, r, apl_core::signals::DEFAULT_FREQ_TOL).value,
                })
                .collect();
            let step = probe
                .iter()
                .map(|&r| default_quad_step(f, r))
                .fold(f64::INFINITY, f64::min);
            (probe, step)
        }
        LoadedFunction::Sampled(s) => {
            if numeric_t.is_none() || freqs.is_empty() {
                return Err(Error::Precondition(
                    "sampled functions need --freqs and --numeric-T for numeric coefficients"
                        .into(),
                ));
            }
            (freqs.to_vec(), s.dt())
        }
    };
    if let Some(horizon) = numeric_t {
        if !probe.is_empty() {
            let step = quad_step;
            report.numeric = bohr_numeric_many(signal, &probe, horizon, step)?
                .into_iter()
                .map(|a| NumericLine {
                    freq: a.coefficient.freq,
                    horizon,
                    quad_step: step,
                    value: a.coefficient.value,
                    shift: a.shift,
                    shifted: a.shifted,
                })
                .collect();
        }
    }
    emit(&report);
    Ok(())
}

#[derive(Serialize)]
struct ConvolveReport {
    kind: ConvolutionKind,
    t_grid: Vec<f64>,
    values: Vec<ValueLine>,
    #[serde(rename = "truncation_S")]
    truncation_s: f64,
    tail_error_bound: f64,
    quad_error_estimate: f64,
    #[serde(serialize_with = "serialize_extended_f64")]
    q: f64,
    #[serde(rename = "M")]
    m: f64,
}

#[derive(Serialize)]
#[serde(transparent)]
struct ValueLine(#[serde(serialize_with = "serialize_complex_vec")] ComplexVec);

fn time_grid(t0: f64, t1: f64, step: f64) -> Result<Vec<f64>> {
    positive("step", step)?;
    if !t0.is_finite() || !t1.is_finite() || t1 < t0 {
        return Err(Error::InvalidParameter {
            name: "t1",
            reason: format!("need finite t0 <= t1, got t0 = {t0}, t1 = {t1}"),
        });
    }
    let n = ((t1 - t0) / step * (1.0 + 1e-12)).floor() as usize;
    Ok((0..=n).map(|k| t0 + k as f64 * step).collect())
}

fn convolve(
    kernel: &Path,
    signal: &Path,
    t0: f64,
    t1: f64,
    step: f64,
    finite: bool,
    q: f64,
) -> Result<()> {
    let grid = time_grid(t0, t1, step)?;
    let kernel = read_kernel(kernel)?;
    let loaded = read_function(signal)?;
    let config = ConvolutionConfig::default();
    let kind = loaded.as_signal().norm_kind();
    let result = if finite {
        convolve_finite(&kernel, loaded.as_signal(), &grid, &config)?
    } else {
        let g = loaded.into_trig(&signal.display().to_string())?;
        convolve_infinite(&kernel, &g, &grid, &config)?
    };
    let m = summability(&kernel, q, config.tol, kind)?.m;
    emit(&ConvolveReport {
        kind: result.kind,
        t_grid: result.t_grid,
        values: result.values.into_iter().map(ValueLine).collect(),
        truncation_s: result.truncation_s,
        tail_error_bound: result.tail_error_bound,
        quad_error_estimate: result.quad_error_estimate,
        q,
        m,
    });
    Ok(())
}
