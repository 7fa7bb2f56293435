//! JSON file formats.
//!
//! Complex numbers are always `[re, im]`. Writers emit pretty JSON with a
//! trailing newline; reading a written file and writing it again yields the
//! same bytes.

use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize, Serializer};

use crate::convolution::Kernel;
use crate::error::{Error, Result};
use crate::scanner::{
    CertStatus, DefectBracket, DefectMode, PeriodCertificate, ScanConfig, ScanReport,
};
use crate::signals::{ComplexVec, NormKind, SampledFunction, Signal, TrigPolynomial, TrigTerm};

type Pair = [f64; 2];

/// Writes `+∞`/NaN as `null`.
pub fn serialize_extended_f64<S: Serializer>(
    value: &f64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    if value.is_finite() {
        s.serialize_f64(*value)
    } else {
        s.serialize_none()
    }
}

pub fn serialize_complex_vec<S: Serializer>(
    value: &ComplexVec,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(pairs(value))
}

fn pairs(v: &ComplexVec) -> Vec<Pair> {
    v.components().iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(p: &[Pair]) -> ComplexVec {
    ComplexVec::new(p.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
}

fn is_default_norm(kind: &NormKind) -> bool {
    *kind == NormKind::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub freq: f64,
    pub coeff: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionRecord {
    TrigPoly {
        dim: usize,
        #[serde(default)]
        norm: NormKind,
        terms: Vec<TermRecord>,
    },
    Sampled {
        dim: usize,
        #[serde(default, skip_serializing_if = "is_default_norm")]
        norm: NormKind,
        t0: f64,
        dt: f64,
        values: Vec<Vec<Pair>>,
        #[serde(default)]
        lipschitz: Option<f64>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrigPolyBody {
    dim: usize,
    #[serde(default)]
    norm: NormKind,
    terms: Vec<TermRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampledBody {
    dim: usize,
    #[serde(default)]
    norm: NormKind,
    t0: f64,
    dt: f64,
    values: Vec<Vec<Pair>>,
    #[serde(default)]
    lipschitz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedFunction {
    Trig(TrigPolynomial),
    Sampled(SampledFunction),
}

impl LoadedFunction {
    pub fn as_signal(&self) -> &dyn Signal {
        match self {
            LoadedFunction::Trig(p) => p,
            LoadedFunction::Sampled(s) => s,
        }
    }

    /// The polynomial, or an error naming `origin` for sampled input.
    pub fn into_trig(self, origin: &str) -> Result<TrigPolynomial> {
        match self {
            LoadedFunction::Trig(p) => Ok(p),
            LoadedFunction::Sampled(_) => Err(Error::format(
                origin,
                "type: this operation needs a \"trig_poly\" function, got \"sampled\"",
            )),
        }
    }

    pub fn to_record(&self) -> FunctionRecord {
        match self {
            LoadedFunction::Trig(p) => trig_record(p),
            LoadedFunction::Sampled(s) => FunctionRecord::Sampled {
                dim: s.dim(),
                norm: s.norm_kind(),
                t0: s.t0(),
                dt: s.dt(),
                values: s.values().iter().map(pairs).collect(),
                lipschitz: s.lipschitz(),
            },
        }
    }
}

pub fn trig_record(p: &TrigPolynomial) -> FunctionRecord {
    FunctionRecord::TrigPoly {
        dim: p.dim(),
        norm: p.norm_kind(),
        terms: p
            .terms()
            .iter()
            .map(|t| TermRecord {
                freq: t.freq,
                coeff: pairs(&t.coeff),
            })
            .collect(),
    }
}

fn check_dim(origin: &str, field: String, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::format(
            origin,
            format!("{field}: expected {expected} complex components, found {found}"),
        ));
    }
    Ok(())
}

impl FunctionRecord {
    pub fn into_function(self, origin: &str) -> Result<LoadedFunction> {
        let wrap = |e: Error| Error::format(origin, e.to_string());
        match self {
            FunctionRecord::TrigPoly { dim, norm, terms } => {
                if dim == 0 {
                    return Err(Error::format(origin, "dim: must be at least 1"));
                }
                let mut out = Vec::with_capacity(terms.len());
                for (i, t) in terms.into_iter().enumerate() {
                    check_dim(origin, format!("terms[{i}].coeff"), dim, t.coeff.len())?;
                    if !t.freq.is_finite() {
                        return Err(Error::format(
                            origin,
                            format!("terms[{i}].freq: must be finite"),
                        ));
                    }
                    out.push(TrigTerm::new(t.freq, from_pairs(&t.coeff)));
                }
                TrigPolynomial::from_terms(dim, norm, out)
                    .map(LoadedFunction::Trig)
                    .map_err(wrap)
            }
            FunctionRecord::Sampled {
                dim,
                norm,
                t0,
                dt,
                values,
                lipschitz,
            } => {
                for (i, v) in values.iter().enumerate() {
                    check_dim(origin, format!("values[{i}]"), dim, v.len())?;
                }
                let values = values.iter().map(|v| from_pairs(v)).collect();
                SampledFunction::new(t0, dt, values, lipschitz, norm)
                    .map(LoadedFunction::Sampled)
                    .map_err(wrap)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelForm {
    ExpMatrix,
}

/// `R(t) = t^{gamma-1} e^{-bt} A` with `A` given row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelRecord {
    #[serde(rename = "type")]
    pub form: KernelForm,
    pub b: f64,
    pub gamma: f64,
    pub matrix: Vec<Vec<Pair>>,
}

impl KernelRecord {
    pub fn from_kernel(k: &Kernel) -> Self {
        KernelRecord {
            form: KernelForm::ExpMatrix,
            b: k.b(),
            gamma: k.gamma(),
            matrix: k
                .rows()
                .iter()
                .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn into_kernel(self, origin: &str) -> Result<Kernel> {
        let KernelRecord {
            b, gamma, matrix, ..
        } = self;
        let rows = matrix
            .iter()
            .map(|r| r.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
            .collect();
        Kernel::new(b, gamma, rows).map_err(|e| Error::format(origin, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub tau: f64,
    pub status: CertStatus,
    pub lower: f64,
    pub upper: f64,
    pub witness_t: Option<f64>,
}

/// On-disk scan report; `max_gap` is `null` when nothing was certified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReportRecord {
    pub mode: DefectMode,
    pub eps: f64,
    pub tau_step: f64,
    pub tau_max: f64,
    pub certificates: Vec<CertificateRecord>,
    pub certified_taus: Vec<f64>,
    pub max_gap: Option<f64>,
    pub unknown_count: usize,
    pub recurrence_caveat: bool,
}

impl From<&ScanReport> for ScanReportRecord {
    fn from(r: &ScanReport) -> Self {
        ScanReportRecord {
            mode: r.mode,
            eps: r.eps,
            tau_step: r.tau_step,
            tau_max: r.tau_max,
            certificates: r
                .certificates
                .iter()
                .map(|c| CertificateRecord {
                    tau: c.tau,
                    status: c.status,
                    lower: c.bracket.lower,
                    upper: c.bracket.upper,
                    witness_t: c.witness_t,
                })
                .collect(),
            certified_taus: r.certified_taus.clone(),
            max_gap: r.max_gap.is_finite().then_some(r.max_gap),
            unknown_count: r.unknown_count,
            recurrence_caveat: r.recurrence_caveat,
        }
    }
}

impl ScanReportRecord {
    /// Rebuilds the report. Per-certificate bound provenance is not stored,
    /// so both bounds are set to `upper`.
    pub fn into_report(self, origin: &str) -> Result<ScanReport> {
        let config = ScanConfig::new(self.mode, self.eps, self.tau_max, self.tau_step);
        let certificates = self
            .certificates
            .iter()
            .map(|c| PeriodCertificate {
                tau: c.tau,
                eps: self.eps,
                mode: self.mode,
                bracket: DefectBracket {
                    lower: c.lower,
                    upper: c.upper,
                    witness_t: c.witness_t.unwrap_or(f64::NAN),
                    triangle_bound: c.upper,
                    grid_bound: c.upper,
                    recurrence_caveat: false,
                },
                status: c.status,
                witness_t: c.witness_t,
                recurrence_caveat: false,
            })
            .collect();
        let mut report = ScanReport::assemble(&config, certificates);
        if report.certified_taus != self.certified_taus {
            return Err(Error::format(
                origin,
                "certified_taus: does not match the certificates marked certified",
            ));
        }
        if report.unknown_count != self.unknown_count {
            return Err(Error::format(
                origin,
                "unknown_count: does not match the certificates",
            ));
        }
        report.recurrence_caveat = self.recurrence_caveat;
        Ok(report)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Parses `text`: syntax errors carry `origin:line:column`, schema errors
/// the path of the offending field.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| {
        Error::format(
            format!("{origin}:{}:{}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    from_value(value, origin)
}

fn from_value<T: DeserializeOwned>(value: serde_json::Value, origin: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." {
            String::from("(root)")
        } else {
            path
        };
        Error::format(origin, format!("{field}: {}", e.into_inner()))
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::format(path.display().to_string(), e.to_string()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::format(path.display().to_string(), e.to_string()))
}

pub fn parse_function(text: &str, origin: &str) -> Result<LoadedFunction> {
    let mut value: serde_json::Value = parse_json(text, origin)?;
    let tag = match value.as_object_mut().map(|o| o.remove("type")) {
        Some(Some(serde_json::Value::String(tag))) => tag,
        Some(_) => return Err(Error::format(origin, "type: missing or not a string")),
        None => return Err(Error::format(origin, "(root): expected an object")),
    };
    let record = match tag.as_str() {
        "trig_poly" => {
            let body: TrigPolyBody = from_value(value, origin)?;
            FunctionRecord::TrigPoly {
                dim: body.dim,
                norm: body.norm,
                terms: body.terms,
            }
        }
        "sampled" => {
            let body: SampledBody = from_value(value, origin)?;
            FunctionRecord::Sampled {
                dim: body.dim,
                norm: body.norm,
                t0: body.t0,
                dt: body.dt,
                values: body.values,
                lipschitz: body.lipschitz,
            }
        }
        other => {
            return Err(Error::format(
                origin,
                format!(
                "type: unknown function type \"{other}\" (expected \"trig_poly\" or \"sampled\")"
            ),
            ))
        }
    };
    record.into_function(origin)
}

pub fn read_function(path: &Path) -> Result<LoadedFunction> {
    parse_function(&read_text(path)?, &path.display().to_string())
}

pub fn function_json(f: &LoadedFunction) -> String {
    to_json(&f.to_record())
}

pub fn trig_json(p: &TrigPolynomial) -> String {
    to_json(&trig_record(p))
}

pub fn read_kernel(path: &Path) -> Result<Kernel> {
    let origin = path.display().to_string();
    parse_json::<KernelRecord>(&read_text(path)?, &origin)?.into_kernel(&origin)
}

pub fn kernel_json(k: &Kernel) -> String {
    to_json(&KernelRecord::from_kernel(k))
}

pub fn scan_report_json(r: &ScanReport) -> String {
    to_json(&ScanReportRecord::from(r))
}

pub fn parse_scan_report(text: &str, origin: &str) -> Result<ScanReport> {
    parse_json::<ScanReportRecord>(text, origin)?.into_report(origin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scanner::scan;
    use crate::signals::random_antiperiodic;

    #[test]
    fn function_round_trip_is_byte_identical() {
        let p = random_antiperiodic(1.7, 5, 3, 11, NormKind::Max).unwrap();
        let text = trig_json(&p);
        let back = parse_function(&text, "mem").unwrap();
        assert_eq!(back, LoadedFunction::Trig(p));
        assert_eq!(function_json(&back), text);

        let s = SampledFunction::sample(&TrigPolynomial::cosine(1.0, 1.0), 0.0, 0.1, 50, Some(1.0))
            .unwrap();
        let loaded = LoadedFunction::Sampled(s);
        let text = function_json(&loaded);
        assert!(!text.contains("norm"));
        let back = parse_function(&text, "mem").unwrap();
        assert_eq!(back, loaded);
        assert_eq!(function_json(&back), text);
    }

    #[test]
    fn documented_function_layout() {
        let text = r#"{ "type": "trig_poly", "dim": 1, "norm": "euclidean",
            "terms": [ { "freq": 1.0, "coeff": [[0.5, 0.0]] }, { "freq": -1.0, "coeff": [[0.5, 0.0]] } ] }"#;
        let f = parse_function(text, "cos.json")
            .unwrap()
            .into_trig("cos.json")
            .unwrap();
        assert_eq!(f, TrigPolynomial::cosine(1.0, 1.0));
        let sampled = r#"{ "type": "sampled", "dim": 1, "t0": 0.0, "dt": 0.5,
            "values": [ [[1.0, 0.0]], [[0.5, 0.0]] ], "lipschitz": null }"#;
        assert!(matches!(
            parse_function(sampled, "s").unwrap(),
            LoadedFunction::Sampled(_)
        ));
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let text = "{\n  \"type\": \"trig_poly\",\n  \"dim\": 1,\n  \"terms\": [ { \"freq\": \"x\", \"coeff\": [] } ]\n}";
        let err = parse_function(text, "bad.json").unwrap_err().to_string();
        assert!(err.contains("terms[0].freq"), "{err}");
        let err = parse_function(
            "{\n  \"type\": \"trig_poly\",\n  \"dim\": 1\n  \"terms\": []\n}",
            "syntax.json",
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("syntax.json:4:"), "{err}");

        let text = r#"{ "type": "trig_poly", "dim": 2, "terms": [ { "freq": 1.0, "coeff": [[1.0, 0.0]] } ] }"#;
        let err = parse_function(text, "dim.json").unwrap_err().to_string();
        assert!(err.contains("terms[0].coeff"), "{err}");

        let err = parse_function(r#"{ "type": "wavelet" }"#, "t.json").unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
    }

    #[test]
    fn kernel_round_trip() {
        let k = Kernel::new(0.5, 0.75, vec![vec![Complex64::new(1.0, -2.0)]]).unwrap();
        let text = kernel_json(&k);
        assert!(text.contains("\"exp_matrix\""));
        let origin = "k.json";
        let back = parse_json::<KernelRecord>(&text, origin)
            .unwrap()
            .into_kernel(origin)
            .unwrap();
        assert_eq!(back, k);
        let bad = r#"{ "type": "exp_matrix", "b": 1.0, "gamma": 2.0, "matrix": [[[1.0, 0.0]]] }"#;
        assert!(parse_json::<KernelRecord>(bad, origin)
            .unwrap()
            .into_kernel(origin)
            .is_err());
    }

    #[test]
    fn scan_report_round_trip() {
        let f = TrigPolynomial::cosine(1.0, 1.0);
        let r = scan(&f, &ScanConfig::new(DefectMode::Anti, 0.3, 10.0, 0.05)).unwrap();
        let text = scan_report_json(&r);
        let back = parse_scan_report(&text, "r.json").unwrap();
        assert_eq!(scan_report_json(&back), text);
        assert_eq!(back.max_gap, r.max_gap);

        let empty = scan(&f, &ScanConfig::new(DefectMode::Anti, 0.3, 2.0, 0.5)).unwrap();
        let text = scan_report_json(&empty);
        assert!(text.contains("\"max_gap\": null"));
        assert!(parse_scan_report(&text, "e.json")
            .unwrap()
            .max_gap
            .is_infinite());
        let keys: Vec<usize> = [
            "\"mode\"",
            "\"eps\"",
            "\"tau_step\"",
            "\"tau_max\"",
            "\"certificates\"",
            "\"certified_taus\"",
            "\"max_gap\"",
            "\"unknown_count\"",
            "\"recurrence_caveat\"",
        ]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }
}
