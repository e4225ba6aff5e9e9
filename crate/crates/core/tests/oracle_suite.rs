use cliqueweight::oracle::run_suite;

#[test]
fn suite_passes_with_reduced_replications() {
    let report = run_suite(20_000, 17).unwrap();
    let failures: Vec<_> = report.failures().collect();
    assert!(failures.is_empty(), "{failures:#?}");
    assert!(report.checks.iter().any(|c| c.informational));
    assert!(report.checks.len() > 50);
}
