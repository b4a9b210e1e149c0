//! Right-censored survival data with covariates.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// One subject: follow-up time `T = min(X, C)`, event indicator `Δ = 1{X <= C}`
/// and covariate vector `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub time: f64,
    pub status: bool,
    pub covariates: Vec<f64>,
}

impl Observation {
    pub fn new(time: f64, status: bool, covariates: Vec<f64>) -> Self {
        Self { time, status, covariates }
    }

    /// `β'Z`
    #[inline]
    pub fn linear_predictor(&self, beta: &[f64]) -> f64 {
        self.covariates.iter().zip(beta).map(|(z, b)| z * b).sum()
    }
}

/// A validated sample of `n >= 2` observations sharing one covariate dimension.
///
/// `sorted_index` orders observations by ascending time; ties put events
/// before censorings and then fall back to input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
    dim: usize,
    sorted_index: Vec<usize>,
}

impl Dataset {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        if observations.len() < 2 {
            return Err(Error::invalid(format!(
                "a dataset needs at least 2 observations, got {}",
                observations.len()
            )));
        }
        let dim = observations[0].covariates.len();
        if dim == 0 {
            return Err(Error::invalid("covariate dimension must be at least 1"));
        }
        for (i, obs) in observations.iter().enumerate() {
            if !(obs.time.is_finite() && obs.time >= 0.0) {
                return Err(Error::invalid(format!("observation {i}: time must be finite and >= 0")));
            }
            if obs.covariates.len() != dim {
                return Err(Error::invalid(format!(
                    "observation {i}: expected {dim} covariates, got {}",
                    obs.covariates.len()
                )));
            }
            if obs.covariates.iter().any(|z| !z.is_finite()) {
                return Err(Error::invalid(format!("observation {i}: non-finite covariate")));
            }
        }
        let mut sorted_index: Vec<usize> = (0..observations.len()).collect();
        sorted_index.sort_by(|&a, &b| {
            let (oa, ob) = (&observations[a], &observations[b]);
            oa.time
                .total_cmp(&ob.time)
                .then(ob.status.cmp(&oa.status))
                .then(a.cmp(&b))
        });
        Ok(Self { observations, dim, sorted_index })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn sorted_index(&self) -> &[usize] {
        &self.sorted_index
    }

    /// Observations in ascending time order.
    pub fn sorted(&self) -> impl DoubleEndedIterator<Item = &Observation> + ExactSizeIterator + '_ {
        self.sorted_index.iter().map(move |&i| &self.observations[i])
    }

    pub fn events(&self) -> usize {
        self.observations.iter().filter(|o| o.status).count()
    }

    pub fn max_time(&self) -> f64 {
        self.observations[*self.sorted_index.last().expect("n >= 2")].time
    }

    /// Sub-sample with the given observation indices, in the order given.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(indices.iter().map(|&i| self.observations[i].clone()).collect())
    }

    /// Deterministic random partition into sizes `⌊ratio·n⌋` and the remainder.
    /// Each part keeps the input order of its members.
    pub fn split(&self, ratio: f64, seed: u64) -> Result<(Self, Self)> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::invalid(format!("split ratio must lie in (0,1), got {ratio}")));
        }
        let n = self.len();
        let n1 = (ratio * n as f64 + 1e-9).floor() as usize;
        if n1 < 2 || n - n1 < 2 {
            return Err(Error::invalid(format!(
                "split of n={n} at ratio {ratio} gives sub-samples ({n1}, {}) smaller than 2",
                n - n1
            )));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut par::stream(seed, 0));
        let (a, b) = perm.split_at_mut(n1);
        a.sort_unstable();
        b.sort_unstable();
        Ok((self.subset(a)?, self.subset(b)?))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.len() < 3 || &header[0] != "time" || &header[1] != "status" {
            return Err(Error::Parse {
                line: 1,
                message: "header must be `time,status,z1,...,zd`".into(),
            });
        }
        let dim = header.len() - 2;
        let mut observations = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let fail = |message: String| Error::Parse { line, message };
            if record.len() != dim + 2 {
                return Err(fail(format!("expected {} fields, found {}", dim + 2, record.len())));
            }
            let num = |k: usize| -> Result<f64> {
                record[k]
                    .parse::<f64>()
                    .map_err(|_| fail(format!("non-numeric value `{}`", &record[k])))
            };
            let time = num(0)?;
            if time.is_nan() || time.is_infinite() {
                return Err(fail("non-finite time".into()));
            }
            if time < 0.0 {
                return Err(fail("negative time".into()));
            }
            let status = match num(1)? {
                s if s == 0.0 => false,
                s if s == 1.0 => true,
                _ => return Err(fail("status must be 0 or 1".into())),
            };
            let covariates = (2..dim + 2).map(num).collect::<Result<Vec<_>>>()?;
            if covariates.iter().any(|z| !z.is_finite()) {
                return Err(fail("non-finite covariate".into()));
            }
            observations.push(Observation { time, status, covariates });
        }
        Self::new(observations)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Writes `time,status,z1..zd` with shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["time".to_string(), "status".to_string()];
        header.extend((1..=self.dim).map(|k| format!("z{k}")));
        w.write_record(&header)?;
        for obs in &self.observations {
            let mut row = vec![format!("{:?}", obs.time), (obs.status as u8).to_string()];
            row.extend(obs.covariates.iter().map(|z| format!("{z:?}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}
