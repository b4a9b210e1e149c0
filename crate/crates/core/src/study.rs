//! Monte Carlo level and power studies of the bootstrap tests.
//!
//! Outer replication `r` samples its dataset with seed
//! `derive_seed(master_seed, r)`, independently of `n`. Because sampling is
//! prefix-stable, the dataset at a smaller `n` is a prefix of the one at a
//! larger `n`, which makes comparisons across sample sizes paired.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_test, MAX_FAILURE_FRACTION, MIN_REPLICATES};
use crate::error::{Error, Result};
use crate::gof::{Stat, TestConfig};
use crate::nonparam::Window;
use crate::par::{derive_seed, Exec};
use crate::scenario::{Baseline, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenario: Scenario,
    pub cfg: TestConfig,
    pub n_list: Vec<usize>,
    /// Outer replications `N`.
    pub outer_reps: usize,
    pub master_seed: u64,
    pub stats: Vec<Stat>,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.cfg.validate()?;
        if self.outer_reps == 0 {
            return Err(Error::invalid("outer_reps must be at least 1"));
        }
        if self.cfg.b < MIN_REPLICATES {
            return Err(Error::invalid(format!("B must be at least {MIN_REPLICATES}, got {}", self.cfg.b)));
        }
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n < 4) {
            return Err(Error::invalid("n_list must be non-empty with every n >= 4"));
        }
        if self.stats.is_empty() {
            return Err(Error::invalid("no statistic requested"));
        }
        Ok(())
    }

    /// Seed of the dataset used by outer replication `r`.
    pub fn dataset_seed(&self, r: usize) -> u64 {
        derive_seed(self.master_seed, r as u64)
    }

    /// Seed handed to the bootstrap test of outer replication `r`.
    pub fn test_seed(&self, r: usize) -> u64 {
        derive_seed(self.dataset_seed(r), 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Split,
    NoSplit,
}

impl Variant {
    pub fn of(cfg: &TestConfig) -> Self {
        if cfg.is_split() {
            Variant::Split
        } else {
            Variant::NoSplit
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Split => "split",
            Variant::NoSplit => "no_split",
        })
    }
}

/// One rejection rate. `rejection_rate` and `stderr` are NaN when more than
/// 5% of the outer replications failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub scenario: String,
    pub n: usize,
    pub variant: Variant,
    pub statistic: Stat,
    pub rejection_rate: f64,
    pub stderr: f64,
    #[serde(rename = "N")]
    pub outer_reps: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub master_seed: u64,
    /// Outer replications whose test could not be computed.
    pub failed: usize,
}

impl StudyRow {
    /// Binomial standard error `sqrt(r(1-r)/N)` of a rate.
    pub fn binomial_stderr(rate: f64, count: usize) -> f64 {
        (rate * (1.0 - rate) / count as f64).sqrt()
    }
}

pub fn write_rows<W: std::io::Write>(rows: &[StudyRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: std::io::Read>(reader: R) -> Result<Vec<StudyRow>> {
    let mut r = csv::Reader::from_reader(reader);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Rows ordered by `n`, then statistic in `study.stats` order.
pub fn run_study(study: &StudyConfig, exec: Exec) -> Result<Vec<StudyRow>> {
    study.validate()?;
    let label = study.scenario.baseline.to_string();
    let variant = Variant::of(&study.cfg);
    let mut rows = Vec::new();
    for &n in &study.n_list {
        let sc = study.scenario.with_n(n);
        let outcomes: Vec<Option<Vec<bool>>> = exec.map(study.outer_reps, |r| {
            let data = sc.sample_with(study.dataset_seed(r), Exec::Sequential).ok()?;
            let reports = bootstrap_test(&data, &study.cfg, &study.stats, study.test_seed(r), exec).ok()?;
            Some(reports.iter().map(|rep| rep.reject).collect())
        });
        let ok: Vec<&Vec<bool>> = outcomes.iter().flatten().collect();
        let failed = study.outer_reps - ok.len();
        let aborted = failed as f64 > MAX_FAILURE_FRACTION * study.outer_reps as f64;
        for (k, &stat) in study.stats.iter().enumerate() {
            let (rate, se) = if aborted || ok.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                let rate = ok.iter().filter(|v| v[k]).count() as f64 / ok.len() as f64;
                (rate, StudyRow::binomial_stderr(rate, ok.len()))
            };
            rows.push(StudyRow {
                scenario: label.clone(),
                n,
                variant,
                statistic: stat,
                rejection_rate: rate,
                stderr: se,
                outer_reps: study.outer_reps,
                b: study.cfg.b,
                master_seed: study.master_seed,
                failed,
            });
        }
    }
    Ok(rows)
}

/// A scenario column of the published level and power tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisteredScenario {
    pub baseline: Baseline,
    pub eps: f64,
    pub m: f64,
    pub tau: f64,
}

impl RegisteredScenario {
    pub fn is_null(&self) -> bool {
        matches!(self.baseline, Baseline::Weibull { .. })
    }

    pub fn window(&self) -> Window {
        Window { eps: self.eps, m: self.m }
    }

    /// One uniform covariate with `β₀ = 0.5`.
    pub fn scenario(&self, n: usize) -> Scenario {
        Scenario {
            baseline: self.baseline,
            beta: vec![0.5],
            censor_tau: self.tau,
            window: self.window(),
            n,
        }
    }
}

/// Null scenarios first (in table order), then the alternatives.
pub fn registry() -> Vec<RegisteredScenario> {
    let w = |mu, nu| Baseline::Weibull { mu, nu };
    let rows = [
        (w(5.0, 0.5), 0.1, 0.5, 0.7),
        (w(1.0, 0.1), 0.5, 4.5, 7.0),
        (w(1.0, 0.9), 0.5, 2.5, 3.5),
        (w(1.0, 0.5), 0.5, 2.5, 3.5),
        (w(0.1, 0.5), 1.0, 30.0, 35.0),
        (Baseline::AltA { c: 1.0 }, 0.1, 5.0, 6.0),
        (Baseline::AltA { c: 6.0 }, 1.0, 30.0, 35.0),
        (Baseline::AltB { c: 1.0 }, 0.1, 1.1, 1.3),
        (Baseline::AltB { c: 3.0 }, 0.1, 0.5, 0.6),
    ];
    rows.into_iter()
        .map(|(baseline, eps, m, tau)| RegisteredScenario { baseline, eps, m, tau })
        .collect()
}

pub fn lookup(baseline: &Baseline) -> Option<RegisteredScenario> {
    registry().into_iter().find(|r| &r.baseline == baseline)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Desk,
    Full,
}

impl Scale {
    pub fn n_list(self) -> Vec<usize> {
        match self {
            Scale::Desk => vec![500, 1000],
            Scale::Full => vec![2000, 4000],
        }
    }

    pub fn outer_reps(self) -> usize {
        match self {
            Scale::Desk => 200,
            Scale::Full => 1000,
        }
    }

    pub fn b(self) -> usize {
        match self {
            Scale::Desk => 199,
            Scale::Full => 1000,
        }
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "full" => Ok(Scale::Full),
            _ => Err(Error::invalid(format!("unknown scale `{s}` (expected desk or full)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TablesConfig {
    pub scale: Scale,
    pub n_list: Vec<usize>,
    pub outer_reps: usize,
    pub b: usize,
    pub alpha: f64,
    pub p: f64,
    pub split_ratio: f64,
    pub master_seed: u64,
}

impl TablesConfig {
    pub fn new(scale: Scale, master_seed: u64) -> Self {
        Self {
            scale,
            n_list: scale.n_list(),
            outer_reps: scale.outer_reps(),
            b: scale.b(),
            alpha: 0.05,
            p: 1.0,
            split_ratio: 0.5,
            master_seed,
        }
    }
}

/// File names of the four tables, in order: null split, null no-split,
/// alternatives split, alternatives no-split.
pub const TABLE_FILES: [&str; 4] = [
    "table1_level_split.csv",
    "table2_level_no_split.csv",
    "table3_power_split.csv",
    "table4_power_no_split.csv",
];

/// All four tables as row sets. Scenario `i` of the registry uses master seed
/// `derive_seed(master_seed, i)` in both variants, so split and no-split see
/// the same datasets.
pub fn table_rows(tc: &TablesConfig, exec: Exec) -> Result<[Vec<StudyRow>; 4]> {
    let mut tables: [Vec<StudyRow>; 4] = Default::default();
    for (i, reg) in registry().into_iter().enumerate() {
        for split in [true, false] {
            let mut cfg = TestConfig::new(reg.window());
            cfg.p = tc.p;
            cfg.alpha = tc.alpha;
            cfg.b = tc.b;
            cfg.split_ratio = if split { tc.split_ratio } else { 1.0 };
            let study = StudyConfig {
                scenario: reg.scenario(tc.n_list[0]),
                cfg,
                n_list: tc.n_list.clone(),
                outer_reps: tc.outer_reps,
                master_seed: derive_seed(tc.master_seed, i as u64),
                stats: Stat::ALL.to_vec(),
            };
            let table = match (reg.is_null(), split) {
                (true, true) => 0,
                (true, false) => 1,
                (false, true) => 2,
                (false, false) => 3,
            };
            tables[table].extend(run_study(&study, exec)?);
        }
    }
    Ok(tables)
}

/// Runs the table grid and writes one CSV per table into `out`.
pub fn paper_tables(tc: &TablesConfig, out: &Path, exec: Exec) -> Result<Vec<PathBuf>> {
    let tables = table_rows(tc, exec)?;
    std::fs::create_dir_all(out)?;
    let mut paths = Vec::new();
    for (rows, name) in tables.iter().zip(TABLE_FILES) {
        let path = out.join(name);
        write_rows(rows, std::fs::File::create(&path)?)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(outer_reps: usize) -> StudyConfig {
        let reg = lookup(&Baseline::Weibull { mu: 1.0, nu: 0.5 }).unwrap();
        let mut cfg = TestConfig::new(reg.window());
        cfg.b = 20;
        StudyConfig {
            scenario: reg.scenario(100),
            cfg,
            n_list: vec![100],
            outer_reps,
            master_seed: 11,
            stats: vec![Stat::T],
        }
    }

    #[test]
    fn single_replication_gives_zero_or_one() {
        let rows = run_study(&tiny(1), Exec::default()).unwrap();
        assert_eq!(rows.len(), 1);
        let r = rows[0].rejection_rate;
        assert!(r == 0.0 || r == 1.0);
    }

    #[test]
    fn registry_matches_table_headers() {
        let reg = registry();
        assert_eq!(reg.len(), 9);
        assert_eq!(reg.iter().filter(|r| r.is_null()).count(), 5);
        let b = lookup(&Baseline::AltB { c: 1.0 }).unwrap();
        assert_eq!((b.eps, b.m, b.tau), (0.1, 1.1, 1.3));
    }

    #[test]
    fn rows_round_trip_through_csv() {
        let rows = run_study(&tiny(3), Exec::Sequential).unwrap();
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let header = String::from_utf8(buf.clone()).unwrap();
        assert!(header.starts_with("scenario,n,variant,statistic,rejection_rate,stderr,N,B,master_seed"));
        assert_eq!(read_rows(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn invalid_studies_are_rejected() {
        let mut s = tiny(0);
        assert!(run_study(&s, Exec::Sequential).is_err());
        s.outer_reps = 1;
        s.cfg.b = 5;
        assert!(run_study(&s, Exec::Sequential).is_err());
    }
}
