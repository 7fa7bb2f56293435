//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runtimes are measured per criterion and checked against limits.

use std::f64::consts::{PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use apl_core::bohr::{
    anp_membership, bohr_exact, bohr_numeric_many, default_quad_step, DEFAULT_MEMBERSHIP_TOL,
};
use apl_core::convolution::{
    convolve_finite, convolve_infinite, convolve_infinite_direct, decay_conditions_check,
    summability, ConvolutionConfig, DecayCheckConfig, Kernel, TransferChecker,
};
use apl_core::files::{parse_function, parse_scan_report, scan_report_json, trig_json};
use apl_core::scanner::{
    default_window, defect_bracket, doubling_check, scan, CertStatus, DefectMode, GridParams,
    ScanConfig, ScanReport,
};
use apl_core::signals::{random_antiperiodic, ClosedForm, DEFAULT_FREQ_TOL};
use apl_core::stepanov::{
    sp_defect, verify_decomposition, AsymptoticDecomposition, Corrector, DecompositionCheck,
    StepanovParams,
};
use apl_core::{Complex64, ComplexVec, NormKind, TrigPolynomial, TrigTerm};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run<F: FnOnce() -> Outcome>(id: u32, title: &str, limit: Option<Duration>, body: F) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let (mut pass, mut detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    let timing = match limit {
        Some(l) => {
            if elapsed > l {
                pass = false;
                detail.push_str("; over time limit");
            }
            format!("{:.1}s / {}s", elapsed.as_secs_f64(), l.as_secs())
        }
        None => format!("{:.1}s", elapsed.as_secs_f64()),
    };
    println!(
        "criterion {id:>2}: {}  {title}: {detail} [{timing}]",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn two_tone() -> TrigPolynomial {
    TrigPolynomial::sine(1.0, PI)
        .add(&TrigPolynomial::sine(1.0, SQRT_2 * PI))
        .unwrap()
}

fn unit_kernel() -> Kernel {
    Kernel::exponential(1.0, 1).unwrap()
}

fn certified(report: &ScanReport) -> impl Iterator<Item = &apl_core::scanner::PeriodCertificate> {
    report
        .certificates
        .iter()
        .filter(|c| c.status == CertStatus::Certified)
}

fn exact_antiperiods() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let omega = rng.gen_range(0.1..=10.0);
        let terms = rng.gen_range(1..=8);
        let dim = rng.gen_range(1..=4);
        let f = random_antiperiodic(omega, terms, dim, seed, NormKind::Euclidean).unwrap();
        let window = default_window(&f);
        for k in 0..4 {
            let tau = (2 * k + 1) as f64 * omega;
            let b = defect_bracket(&f, DefectMode::Anti, tau, window, window / 2000.0).unwrap();
            worst = worst.max(b.upper);
        }
    }
    outcome(
        worst <= 1e-10,
        format!("worst upper bound {worst:.2e} over 400 (f, τ)"),
    )
}

fn doubling(report: &ScanReport, f: &TrigPolynomial) -> Outcome {
    let grid = GridParams::default();
    let mut total = 0;
    let mut failures = Vec::new();
    for c in certified(report) {
        total += 1;
        let d = doubling_check(f, c, &grid).unwrap();
        if d.status != CertStatus::Certified {
            failures.push(c.tau);
        }
    }
    outcome(
        total > 0 && failures.is_empty(),
        format!(
            "{total} certified anti-periods, {} doubled certificates not certified {failures:?}",
            failures.len()
        ),
    )
}

fn squared_cosine() -> Outcome {
    let c = Complex64::new(0.25, 0.0);
    let f =
        TrigPolynomial::scalar(&[(-2.0, c), (0.0, Complex64::new(0.5, 0.0)), (2.0, c)]).unwrap();
    let r = scan(&f, &ScanConfig::new(DefectMode::Anti, 0.9, 100.0, 1e-3)).unwrap();
    let at_zero = r
        .certificates
        .iter()
        .all(|c| c.status == CertStatus::Refuted && c.witness_t == Some(0.0));
    outcome(
        r.certificates.len() == 100_000
            && r.count(CertStatus::Certified) == 0
            && r.unknown_count == 0
            && at_zero,
        format!(
            "{} τ: {} certified, {} unknown, all refuted at t = 0: {at_zero}",
            r.certificates.len(),
            r.count(CertStatus::Certified),
            r.unknown_count
        ),
    )
}

fn relative_density(coarse: &ScanReport, fine: &ScanReport) -> Outcome {
    let (a, b) = (coarse.max_gap, fine.max_gap);
    let ratio = a.max(b) / a.min(b);
    outcome(
        !coarse.certified_taus.is_empty() && a.is_finite() && b.is_finite() && ratio < 2.0,
        format!(
            "{} / {} certified τ, max_gap {a:.3} at step 0.01 and {b:.3} at 0.005 (ratio {ratio:.3}), unknown {} / {}",
            coarse.certified_taus.len(),
            fine.certified_taus.len(),
            coarse.unknown_count,
            fine.unknown_count
        ),
    )
}

fn shifted_and_two_cosines() -> Outcome {
    let shifted = two_tone()
        .add(&TrigPolynomial::constant(ComplexVec::real(&[5.0]), NormKind::Euclidean).unwrap())
        .unwrap();
    let anp = anp_membership(&shifted, DEFAULT_MEMBERSHIP_TOL).unwrap();
    let scan_shifted = scan(
        &shifted,
        &ScanConfig::new(DefectMode::Anti, 1.0, 100.0, 0.01),
    )
    .unwrap();
    let two = TrigPolynomial::cosine(1.0, 1.0)
        .add(&TrigPolynomial::cosine(1.0, 2.0))
        .unwrap();
    let anp_two = anp_membership(&two, DEFAULT_MEMBERSHIP_TOL).unwrap();
    let scan_two = scan(&two, &ScanConfig::new(DefectMode::Anti, 0.5, 100.0, 0.01)).unwrap();
    let all_refuted = scan_two.count(CertStatus::Refuted) == scan_two.certificates.len();
    outcome(
        (anp.distance - 5.0).abs() <= 1e-12
            && !anp.is_member
            && scan_shifted.certified_taus.is_empty()
            && anp_two.is_member
            && all_refuted,
        format!(
            "f+5: distance {}, {} certified; cos t + cos 2t: member {}, fully refuted {all_refuted}",
            anp.distance,
            scan_shifted.certified_taus.len(),
            anp_two.is_member
        ),
    )
}

fn random_separated(rng: &mut ChaCha8Rng) -> TrigPolynomial {
    let n = rng.gen_range(1..=6);
    let dim = rng.gen_range(1..=3);
    let mut freqs: Vec<f64> = Vec::new();
    while freqs.len() < n {
        let l = rng.gen_range(-5.0..=5.0);
        if freqs.iter().all(|f: &f64| (f - l).abs() >= 0.1) {
            freqs.push(l);
        }
    }
    let terms = freqs
        .into_iter()
        .map(|l| {
            let c = (0..dim)
                .map(|_| {
                    Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI))
                })
                .collect();
            TrigTerm::new(l, ComplexVec::new(c))
        })
        .collect();
    TrigPolynomial::from_terms(dim, NormKind::Euclidean, terms).unwrap()
}

fn bohr_numerics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = [0.0f64; 2];
    let mut worst_shifted: f64 = 0.0;
    let mut aggregate = [0.0f64; 2];
    for _ in 0..50 {
        let f = random_separated(&mut rng);
        let freqs: Vec<f64> = f.frequencies().collect();
        let scale = f.coefficient_sum();
        let step = freqs
            .iter()
            .map(|&r| default_quad_step(&f, r))
            .fold(f64::INFINITY, f64::min);
        for (i, horizon) in [2000.0, 4000.0].into_iter().enumerate() {
            let avgs = bohr_numeric_many(&f, &freqs, horizon, step).unwrap();
            let mut err: f64 = 0.0;
            for a in &avgs {
                let exact = bohr_exact(&f, a.coefficient.freq, DEFAULT_FREQ_TOL).value;
                err = err.max(a.coefficient.value.distance(&exact, NormKind::Euclidean) / scale);
                worst_shifted =
                    worst_shifted.max(a.shifted.distance(&exact, NormKind::Euclidean) / scale);
            }
            worst[i] = worst[i].max(err);
            aggregate[i] += err;
        }
    }
    let shrink = aggregate[0] / aggregate[1];
    outcome(
        worst[0] <= 0.02 && worst_shifted <= 0.02 && shrink >= 1.5,
        format!(
            "normalized max error {:.2e} (T=2000), {:.2e} (T=4000), shifted {worst_shifted:.2e}, aggregate shrink {shrink:.2}",
            worst[0], worst[1]
        ),
    )
}

fn transfer(reports: &[&ScanReport], f: &TrigPolynomial) -> Outcome {
    let kernel = unit_kernel();
    let m = summability(&kernel, f64::INFINITY, 1e-12, NormKind::Euclidean)
        .unwrap()
        .m;
    let exact = 1.0 / (1.0 - (-1.0f64).exp());
    let checker =
        TransferChecker::new(&kernel, f, f64::INFINITY, &ConvolutionConfig::default()).unwrap();
    let mut total = 0;
    let mut worst_margin = f64::INFINITY;
    let mut violations = 0;
    for r in reports {
        for c in certified(r) {
            let v = checker.check(c).unwrap();
            total += 1;
            worst_margin = worst_margin.min(v.margin);
            if !v.holds {
                violations += 1;
            }
        }
    }
    outcome(
        (m - exact).abs() <= 1e-8 && total > 0 && violations == 0,
        format!(
            "M = {m:.10} (|M - 1/(1-e^-1)| = {:.1e}); {total} certificates, {violations} violations, smallest margin {worst_margin:.3e}",
            (m - exact).abs()
        ),
    )
}

fn convolution_oracle() -> Outcome {
    let kernel = unit_kernel();
    let config = ConvolutionConfig::default();
    let cos = TrigPolynomial::cosine(1.0, 1.0);
    let grid: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.01).collect();
    let sup_err = |values: &[ComplexVec], exact: &dyn Fn(f64) -> f64| {
        grid.iter()
            .zip(values)
            .map(|(&t, v)| (v[0] - Complex64::new(exact(t), 0.0)).norm())
            .fold(0.0, f64::max)
    };
    let g_exact = |t: f64| (t.cos() + t.sin()) / 2.0;
    let h_exact = |t: f64| (t.cos() + t.sin() - (-t).exp()) / 2.0;
    let g = convolve_infinite(&kernel, &cos, &grid, &config).unwrap();
    let g_direct = convolve_infinite_direct(&kernel, &cos, &grid, &config).unwrap();
    let h = convolve_finite(&kernel, &cos, &grid, &config).unwrap();
    let eg = sup_err(&g.values, &g_exact).max(sup_err(&g_direct.values, &g_exact));
    let eh = sup_err(&h.values, &h_exact);
    let late: Vec<f64> = (0..=100).map(|k| 20.0 + k as f64 * 0.01).collect();
    let gl = convolve_infinite(&kernel, &cos, &late, &config).unwrap();
    let hl = convolve_finite(&kernel, &cos, &late, &config).unwrap();
    let gap = gl
        .values
        .iter()
        .zip(&hl.values)
        .map(|(a, b)| a.distance(b, NormKind::Euclidean))
        .fold(0.0, f64::max);
    outcome(
        eg <= 1e-6 && eh <= 1e-6 && gap <= 1e-4,
        format!("sup |G - oracle| {eg:.1e}, sup |H - oracle| {eh:.1e} on [0, 10]; sup |H - G| {gap:.1e} on [20, 21]"),
    )
}

fn stepanov_domination() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..50u64 {
        let omega = rng.gen_range(0.5..=5.0);
        let terms = rng.gen_range(1..=8);
        let dim = rng.gen_range(1..=4);
        let f = random_antiperiodic(omega, terms, dim, 100 + i, NormKind::Euclidean).unwrap();
        let tau = rng.gen_range(0.01..=10.0);
        let p = if i % 2 == 0 { 1.0 } else { 2.0 };
        let sp = sp_defect(&f, &StepanovParams::new(p).unwrap(), tau, 20.0, 0.05).unwrap();
        let window = default_window(&f).max(21.0);
        let sup = defect_bracket(&f, DefectMode::Anti, tau, window, window / 20_000.0).unwrap();
        worst = worst.max(sp.lower - sup.upper);
    }
    outcome(
        worst <= 1e-9,
        format!("max (S^p lower - sup upper) = {worst:.3e} over 50 triples"),
    )
}

fn decay_conditions() -> Outcome {
    let corrector = Corrector::Closed(ClosedForm::Exponential {
        rate: 1.0,
        coeff: ComplexVec::real(&[1.0]),
    });
    let d = AsymptoticDecomposition::new(TrigPolynomial::cosine(1.0, 1.0), corrector).unwrap();
    let verdict = verify_decomposition(&d, &d, &DecompositionCheck::default()).unwrap();
    let v = decay_conditions_check(
        &unit_kernel(),
        &d,
        &verdict,
        1.0,
        1.0,
        &DecayCheckConfig::default(),
    )
    .unwrap();
    let last_i = v.condition_i.last().unwrap().1;
    let last_ii = v.condition_ii.last().unwrap().1;
    let fmt = |c: &[(f64, f64)]| {
        c.iter()
            .map(|(t, x)| format!("{t}:{x:.1e}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    outcome(
        v.condition_i_ok && v.condition_ii_ok && last_i <= 1e-9 && last_ii <= 1e-9,
        format!("(i) {}; (ii) {}", fmt(&v.condition_i), fmt(&v.condition_ii)),
    )
}

fn apl(dir: &Path, threads: Option<&str>, args: &[&str]) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_apl"));
    cmd.current_dir(dir).args(args);
    match threads {
        Some(n) => cmd.env("APL_THREADS", n),
        None => cmd.env_remove("APL_THREADS"),
    };
    let out = cmd.output().expect("run apl");
    assert!(
        out.status.success(),
        "apl {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let f = two_tone();
    let canonical = trig_json(&f);
    std::fs::write(d.join("f.json"), &canonical).unwrap();
    let kernel = r#"{ "type": "exp_matrix", "b": 1.0, "gamma": 0.5, "matrix": [[[1.0, 0.0]]] }"#;
    std::fs::write(d.join("k.json"), kernel).unwrap();

    let mut outputs = Vec::new();
    for (tag, threads) in [
        ("a", None),
        ("b", None),
        ("one", Some("1")),
        ("four", Some("4")),
    ] {
        let json = format!("r_{tag}.json");
        let csv = format!("r_{tag}.csv");
        apl(
            d,
            threads,
            &[
                "scan",
                "f.json",
                "--eps",
                "0.05",
                "--tau-max",
                "300",
                "--tau-step",
                "0.01",
                "--out",
                &json,
                "--csv",
                &csv,
            ],
        );
        let conv = apl(
            d,
            threads,
            &[
                "convolve", "--kernel", "k.json", "--signal", "f.json", "--t0", "0", "--t1", "5",
                "--step", "0.25", "--q", "1",
            ],
        );
        let density = apl(d, threads, &["density", &json]);
        outputs.push((
            std::fs::read(d.join(&json)).unwrap(),
            std::fs::read(d.join(&csv)).unwrap(),
            conv,
            density,
        ));
    }
    let reports_equal = outputs.windows(2).all(|w| w[0] == w[1]);

    apl(
        d,
        None,
        &[
            "gen", "anti", "--omega", "1.0", "--terms", "3", "--dim", "2", "--seed", "7", "--out",
            "g1.json",
        ],
    );
    apl(
        d,
        Some("4"),
        &[
            "gen", "anti", "--omega", "1.0", "--terms", "3", "--dim", "2", "--seed", "7", "--out",
            "g2.json",
        ],
    );
    let gen_equal =
        std::fs::read(d.join("g1.json")).unwrap() == std::fs::read(d.join("g2.json")).unwrap();

    apl(
        d,
        None,
        &["modulate", "f.json", "--freq", "0", "--out", "f2.json"],
    );
    let file_round_trip = std::fs::read_to_string(d.join("f2.json")).unwrap() == canonical;
    let g1 = std::fs::read_to_string(d.join("g1.json")).unwrap();
    let parsed = parse_function(&g1, "g1.json")
        .unwrap()
        .into_trig("g1.json")
        .unwrap();
    let gen_round_trip = trig_json(&parsed) == g1;
    let report = String::from_utf8(outputs[0].0.clone()).unwrap();
    let report_round_trip =
        scan_report_json(&parse_scan_report(&report, "r.json").unwrap()) == report;

    outcome(
        reports_equal && gen_equal && file_round_trip && gen_round_trip && report_round_trip,
        format!(
            "reports identical across runs and APL_THREADS 1/4: {reports_equal}; gen: {gen_equal}; \
             round trips function/generated/report: {file_round_trip}/{gen_round_trip}/{report_round_trip}"
        ),
    )
}

fn main() {
    // panics are reported on the criterion line
    std::panic::set_hook(Box::new(|_| {}));
    let f = two_tone();
    let mut results = Vec::new();

    results.push(run(
        1,
        "exact anti-periodicity of generated polynomials",
        secs(10),
        exact_antiperiods,
    ));

    let mut scans: Option<(ScanReport, ScanReport)> = None;
    let scan_start = Instant::now();
    let scanned = catch_unwind(AssertUnwindSafe(|| {
        let coarse = scan(&f, &ScanConfig::new(DefectMode::Anti, 0.05, 2000.0, 0.01)).unwrap();
        let fine = scan(&f, &ScanConfig::new(DefectMode::Anti, 0.05, 2000.0, 0.005)).unwrap();
        (coarse, fine)
    }));
    let scan_time = scan_start.elapsed();
    if let Ok(s) = scanned {
        scans = Some(s);
    }

    results.push(match &scans {
        Some((coarse, _)) => run(2, "doubling of certified anti-periods", secs(30), || {
            doubling(coarse, &f)
        }),
        None => run(2, "doubling of certified anti-periods", None, || {
            outcome(false, "scan failed")
        }),
    });
    results.push(run(
        3,
        "cos^2 t has no 0.9-antiperiods",
        secs(30),
        squared_cosine,
    ));
    results.push(match &scans {
        Some((coarse, fine)) => run(
            4,
            "relative density for sin(pi t) + sin(sqrt2 pi t)",
            secs(120),
            || {
                let mut o = relative_density(coarse, fine);
                o.detail
                    .push_str(&format!("; scans took {:.1}s", scan_time.as_secs_f64()));
                o.pass &= scan_time <= Duration::from_secs(120);
                o
            },
        ),
        None => run(
            4,
            "relative density for sin(pi t) + sin(sqrt2 pi t)",
            None,
            || outcome(false, "scan failed"),
        ),
    });
    results.push(run(
        5,
        "mean shift and pointwise refutation vs closure membership",
        None,
        shifted_and_two_cosines,
    ));
    results.push(run(6, "numeric Bohr coefficients", secs(60), bohr_numerics));
    results.push(match &scans {
        Some((coarse, fine)) => run(
            7,
            "anti-period transfer through convolution",
            secs(120),
            || transfer(&[coarse, fine], &f),
        ),
        None => run(7, "anti-period transfer through convolution", None, || {
            outcome(false, "scan failed")
        }),
    });
    results.push(run(8, "convolution closed forms", None, convolution_oracle));
    results.push(run(
        9,
        "Stepanov seminorm dominated by sup norm",
        None,
        stepanov_domination,
    ));
    results.push(run(
        10,
        "decay conditions for the finite convolution",
        None,
        decay_conditions,
    ));
    results.push(run(
        11,
        "determinism and canonical round trip",
        None,
        determinism,
    ));

    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
