//! Monte Carlo study of the estimators against exact index values.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{estimate_indices, rank_transform};
use crate::exact::summarize;
use crate::lattice::{LatticePoint, Region};
use crate::model::M4Spec;
use crate::rng::substream_seed;
use crate::scalar::NeumaierSum;
use crate::simulate::simulate_m4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IndexKind {
    #[serde(rename = "CI")]
    Contagion,
    #[serde(rename = "SI")]
    Stability,
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexKind::Contagion => "CI",
            IndexKind::Stability => "SI",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResult {
    pub index: IndexKind,
    pub true_value: f64,
    pub mean_estimate: f64,
    /// `(1/R) Σ_r (estimate_r - true_value)²`.
    pub mse: f64,
    pub replications: usize,
    pub sample_size: usize,
    pub seed: u64,
    /// Per-replication estimates in replication order.
    #[serde(skip)]
    pub estimates: Vec<f64>,
}

impl StudyResult {
    fn from_estimates(index: IndexKind, true_value: f64, estimates: Vec<f64>, sample_size: usize, seed: u64) -> Self {
        let r = estimates.len() as f64;
        let mut mean = NeumaierSum::default();
        let mut sq = NeumaierSum::default();
        for &e in &estimates {
            mean.add(e);
            sq.add((e - true_value).powi(2));
        }
        Self {
            index,
            true_value,
            mean_estimate: mean.value() / r,
            mse: sq.value() / r,
            replications: estimates.len(),
            sample_size,
            seed,
            estimates,
        }
    }

    pub fn bias(&self) -> f64 {
        self.mean_estimate - self.true_value
    }

    pub fn mean_absolute_error(&self) -> f64 {
        self.estimates.iter().map(|e| (e - self.true_value).abs()).sum::<f64>() / self.estimates.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Study {
    pub contagion: StudyResult,
    pub stability: StudyResult,
}

/// Replication `r` simulates `sample_size` fields on `region ∪ {site}` from
/// seed `substream_seed(seed, r)`, rank-transforms them and estimates both
/// indices. Replications run in parallel; the reduction is in replication
/// order.
pub fn monte_carlo_study(
    spec: &M4Spec,
    region: &Region,
    site: LatticePoint,
    replications: usize,
    sample_size: usize,
    seed: u64,
) -> Result<Study> {
    if replications < 2 {
        return Err(Error::Argument(format!(
            "a study needs at least 2 replications, got {replications}"
        )));
    }
    if sample_size < 2 {
        return Err(Error::Argument(format!(
            "sample size must be at least 2, got {sample_size}"
        )));
    }
    let truth = summarize::<f64>(spec, region, site)?;
    let locations = region.with(site);
    let pairs = (0..replications)
        .into_par_iter()
        .map(|r| {
            let sample = simulate_m4(spec, &locations, sample_size, substream_seed(seed, r as u64))?;
            let est = estimate_indices(&rank_transform(&sample), region, site)?;
            Ok((est.ci, est.si))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ci, si): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(Study {
        contagion: StudyResult::from_estimates(IndexKind::Contagion, truth.ci, ci, sample_size, seed),
        stability: StudyResult::from_estimates(IndexKind::Stability, truth.si, si, sample_size, seed),
    })
}
