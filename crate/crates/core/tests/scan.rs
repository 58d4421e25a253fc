use rotorkick::pulse::TimeGrid;
use rotorkick::scan::{
    emit_population_report, run_cd_scan, run_delay_scan, run_ld_scan, write_scan, OutputFormat, PropagationMode,
    RunConfig, TauRange,
};
use rotorkick::Error;

fn short_range(cfg: &mut RunConfig, start: f64, stop: f64, step: f64) {
    cfg.excitation.tau_range = TauRange {
        start_fs: start,
        stop_fs: stop,
        step_fs: step,
    };
}

#[test]
fn canonical_form_is_idempotent() {
    for cfg in [RunConfig::ld_default(), RunConfig::cd_default()] {
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.canonical_json(), cfg.canonical_json());
        let again = RunConfig::from_json(&back.canonical_json()).unwrap();
        assert_eq!(again.canonical_json(), cfg.canonical_json());
        assert_eq!(again.config_hash(), cfg.config_hash());
    }
    assert_ne!(RunConfig::ld_default().config_hash(), RunConfig::cd_default().config_hash());
}

#[test]
fn unknown_and_inconsistent_configs_are_rejected() {
    let mut v = serde_json::to_value(RunConfig::ld_default()).unwrap();
    v["colour"] = serde_json::json!("blue");
    assert!(matches!(RunConfig::from_json(&v.to_string()), Err(Error::Config(_))));

    let mut cfg = RunConfig::ld_default();
    cfg.probe.delays.start_fs = 100.0;
    assert!(cfg.validate().unwrap_err().is_config_error());

    let mut cfg = RunConfig::ld_default();
    short_range(&mut cfg, 400.0, 300.0, 5.0);
    assert!(cfg.validate().is_err());

    let mut cfg = RunConfig::cd_default();
    cfg.probe.pair = rotorkick::scan::ProbePair::Linear;
    assert!(cfg.validate().is_err());

    assert!(matches!(run_ld_scan(&RunConfig::cd_default(), 1), Err(Error::Config(_))));
    assert!(matches!(run_cd_scan(&RunConfig::ld_default(), 1), Err(Error::Config(_))));
}

#[test]
fn half_period_double_kick_gives_a_flat_trace() {
    let mut cfg = RunConfig::ld_default();
    let amp = |cfg: &RunConfig| run_delay_scan(cfg).unwrap().summary.magnitude;
    let on = amp(&cfg);
    cfg.excitation.tau_fs = 220.0;
    let off = amp(&cfg);
    assert!(off < 0.05 * on, "{off} vs {on}");
}

#[test]
fn rows_are_sorted_and_independent_of_workers() {
    let mut cfg = RunConfig::ld_default();
    short_range(&mut cfg, 400.0, 480.0, 10.0);
    let a = run_ld_scan(&cfg, 1).unwrap();
    let b = run_ld_scan(&cfg, 3).unwrap();
    assert_eq!(a, b);
    let taus: Vec<f64> = a.series[0].rows.iter().map(|r| r.tau_fs).collect();
    assert!(taus.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(taus.len(), 9);
    assert!(a.timestamp_unix_s.is_none());
}

#[test]
fn row_failures_do_not_abort_the_scan() {
    let mut cfg = RunConfig::cd_default();
    cfg.excitation.propagation = PropagationMode::Field;
    cfg.excitation.grid = TimeGrid::new(8192, 0.5).unwrap();
    short_range(&mut cfg, 400.0, 480.0, 80.0);
    cfg.excitation.tau_fs = 400.0;
    let r = run_cd_scan(&cfg, 2).unwrap();
    let rows = &r.series[0].rows;
    assert_eq!(rows.len(), 2);
    assert!(rows[0].error.is_none(), "{:?}", rows[0].error);
    assert!(rows[1].error.is_some());
    assert!(rows[1].magnitude.is_nan());
    assert_eq!(r.failed_rows(), 2);

    let dir = tempfile::tempdir().unwrap();
    let paths = write_scan(dir.path(), &r, OutputFormat::Csv).unwrap();
    let csv = std::fs::read_to_string(&paths[0]).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn population_tables_are_normalized() {
    let r = emit_population_report(&RunConfig::cd_default(), &[330.0, 550.0]).unwrap();
    assert_eq!(r.tables.len(), 4);
    for t in &r.tables {
        assert!((t.total - 1.0).abs() < 1e-9);
    }
    let plus = r.table(330.0, "plus").unwrap();
    assert!(plus.entries.iter().all(|e| e.population >= 0.0));
}
