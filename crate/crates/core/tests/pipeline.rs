use apl_core::bohr::{anp_membership, bohr_exact, spectrum};
use apl_core::files::{parse_function, parse_scan_report, scan_report_json, trig_json};
use apl_core::scanner::{scan, CertStatus, DefectMode, ScanConfig};
use apl_core::signals::random_antiperiodic;
use apl_core::NormKind;

#[test]
fn generated_polynomial_through_scan_bohr_and_files() {
    let f = random_antiperiodic(2.0, 4, 2, 11, NormKind::Euclidean).unwrap();

    let report = scan(&f, &ScanConfig::new(DefectMode::Anti, 1e-6, 6.0, 0.5)).unwrap();
    let certified: Vec<f64> = report
        .certificates
        .iter()
        .filter(|c| c.status == CertStatus::Certified)
        .map(|c| c.tau)
        .collect();
    // odd multiples of ω
    assert_eq!(certified, vec![2.0, 6.0]);
    assert_eq!(report.unknown_count, 0);

    let verdict = anp_membership(&f, 1e-10).unwrap();
    assert!(verdict.is_member);
    for entry in spectrum(&f).entries {
        let back = bohr_exact(&f, entry.freq, 1e-9).value;
        assert!(back.distance(&entry.coeff, NormKind::Euclidean) < 1e-15);
    }

    let text = trig_json(&f);
    let reloaded = parse_function(&text, "mem")
        .unwrap()
        .into_trig("mem")
        .unwrap();
    assert_eq!(trig_json(&reloaded), text);

    let report_text = scan_report_json(&report);
    let back = parse_scan_report(&report_text, "mem").unwrap();
    assert_eq!(back.certified_taus, report.certified_taus);
    assert_eq!(scan_report_json(&back), report_text);
}
