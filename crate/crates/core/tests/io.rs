use cox_grenander::study::{lookup, read_rows, run_study, StudyConfig};
use cox_grenander::*;

#[test]
fn dataset_file_round_trip() {
    let reg = lookup(&Baseline::AltB { c: 3.0 }).unwrap();
    let data = reg.scenario(250).sample(12).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    data.save_csv(&path).unwrap();
    assert_eq!(Dataset::load_csv(&path).unwrap().observations(), data.observations());
    assert!(Dataset::load_csv(dir.path().join("missing.csv")).unwrap_err().is_validation());
}

#[test]
fn estimator_csvs_have_expected_shape() {
    let reg = lookup(&Baseline::Weibull { mu: 1.0, nu: 0.9 }).unwrap();
    let data = reg.scenario(300).sample(1).unwrap();
    let lam = breslow(&data, &[0.5]).unwrap();
    let mut buf = Vec::new();
    lam.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("time,value"));
    assert_eq!(text.lines().count(), lam.jump_times().len() + 1);

    let est = grenander(&lam, reg.window()).unwrap();
    let mut buf = Vec::new();
    est.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), est.slopes().len() + 1);
}

#[test]
fn study_rows_survive_a_file() {
    let reg = lookup(&Baseline::Weibull { mu: 1.0, nu: 0.5 }).unwrap();
    let mut cfg = TestConfig::new(reg.window());
    cfg.b = 20;
    let study = StudyConfig {
        scenario: reg.scenario(120),
        cfg,
        n_list: vec![120, 160],
        outer_reps: 3,
        master_seed: 5,
        stats: Stat::ALL.to_vec(),
    };
    let rows = run_study(&study, Exec::default()).unwrap();
    assert_eq!(rows.len(), 6);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    cox_grenander::study::write_rows(&rows, std::fs::File::create(&path).unwrap()).unwrap();
    assert_eq!(read_rows(std::fs::File::open(&path).unwrap()).unwrap(), rows);
}
