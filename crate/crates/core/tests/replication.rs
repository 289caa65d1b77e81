use unialg::replicate::{all_jobs, run_all, Status, DEFAULT_MAX_N, DEFAULT_VARIETY_MAX_N};

#[test]
fn default_suite_has_no_failures() {
    let reports = run_all(DEFAULT_MAX_N).unwrap();
    assert_eq!(reports.len(), all_jobs(DEFAULT_MAX_N).len());
    for r in &reports {
        assert_ne!(r.status, Status::Fail, "{} {:?}: {:?}", r.id, r.params, r.first_failure());
        for row in r.details.table.iter().filter(|row| row.status == Status::Skipped) {
            // only the variety-level gate may skip rows by default
            let n = r.params.n.unwrap_or(0);
            assert!(n > DEFAULT_VARIETY_MAX_N, "{} {:?}: {}", r.id, r.params, row.name);
        }
        if r.params.n.is_none_or(|n| n <= DEFAULT_VARIETY_MAX_N) {
            assert_eq!(r.status, Status::Pass, "{} {:?}", r.id, r.params);
        }
    }
    let ids: Vec<&str> = reports.iter().map(|r| r.id.as_str()).collect();
    let mut sorted = ids.clone();
    sorted.dedup();
    assert_eq!(sorted.len(), 17);
}
