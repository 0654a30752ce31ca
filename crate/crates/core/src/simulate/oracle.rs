//! Finite-threshold estimates of the conditional expectations whose limits
//! define the dependence indices. Exceedances are judged on modified-ECDF
//! scores, `score > u`.

use crate::error::{Error, Result};
use crate::estimate::{rank_transform, UniformScores};
use crate::lattice::{LatticePoint, Region};
use crate::simulate::FieldSample;

/// Rank-transforms a sample once and answers threshold queries on it.
#[derive(Debug, Clone)]
pub struct ThresholdOracle {
    scores: UniformScores,
}

/// Conditional mean `Σ counts / #events` from integer tallies.
fn ratio(total: u64, events: u64, what: &str, u: f64) -> Result<f64> {
    if events == 0 {
        Err(Error::UndefinedConditional(format!(
            "no replicate with {what} at u = {u}"
        )))
    } else {
        Ok(total as f64 / events as f64)
    }
}

impl ThresholdOracle {
    pub fn new(sample: &FieldSample) -> Self {
        Self {
            scores: rank_transform(sample),
        }
    }

    pub fn from_scores(scores: UniformScores) -> Self {
        Self { scores }
    }

    pub fn scores(&self) -> &UniformScores {
        &self.scores
    }

    fn check_level(u: f64) -> Result<()> {
        if u > 0.0 && u < 1.0 {
            Ok(())
        } else {
            Err(Error::Argument(format!("threshold must lie in (0, 1), got {u}")))
        }
    }

    /// `(row, col) -> score > u`.
    fn exceeds(&self, u: f64) -> impl Fn(usize, usize) -> bool + '_ {
        // count / (n+1) > u  <=>  count > u (n+1)
        let cut = u * (self.scores.n() + 1) as f64;
        move |row, col| self.scores.count(row, col) as f64 > cut
    }

    /// Mean number of exceedances in `region` over replicates where `site`
    /// exceeds `u`.
    pub fn contagion(&self, region: &Region, site: LatticePoint, u: f64) -> Result<f64> {
        Self::check_level(u)?;
        let i = self.scores.column_of(site)?;
        let cols = self.scores.columns_of(region)?;
        let ex = self.exceeds(u);
        let (mut total, mut events) = (0u64, 0u64);
        for r in 0..self.scores.n() {
            if ex(r, i) {
                events += 1;
                total += cols.iter().filter(|&&c| ex(r, c)).count() as u64;
            }
        }
        ratio(total, events, "an exceedance at the conditioning site", u)
    }

    fn crossings(&self, row: usize, i: usize, cols: &[usize], ex: &impl Fn(usize, usize) -> bool) -> u64 {
        if ex(row, i) {
            0
        } else {
            cols.iter().filter(|&&c| ex(row, c)).count() as u64
        }
    }

    /// Mean number of crossings `score_i <= u < score_j` (`j ∈ region`) over
    /// replicates with at least one crossing.
    pub fn stability(&self, region: &Region, site: LatticePoint, u: f64) -> Result<f64> {
        Self::check_level(u)?;
        let i = self.scores.column_of(site)?;
        let cols = self.scores.columns_of(region)?;
        let ex = self.exceeds(u);
        let (mut total, mut events) = (0u64, 0u64);
        for r in 0..self.scores.n() {
            let c = self.crossings(r, i, &cols, &ex);
            if c > 0 {
                events += 1;
                total += c;
            }
        }
        ratio(total, events, "a crossing", u)
    }

    /// Mean number of crossings over replicates with an exceedance anywhere
    /// in `{site} ∪ region`, the event whose probability normalises the
    /// closed-form stability index.
    pub fn stability_given_exceedance(&self, region: &Region, site: LatticePoint, u: f64) -> Result<f64> {
        Self::check_level(u)?;
        let i = self.scores.column_of(site)?;
        let cols = self.scores.columns_of(region)?;
        let ex = self.exceeds(u);
        let (mut total, mut events) = (0u64, 0u64);
        for r in 0..self.scores.n() {
            if ex(r, i) || cols.iter().any(|&c| ex(r, c)) {
                events += 1;
                total += self.crossings(r, i, &cols, &ex);
            }
        }
        ratio(total, events, "an exceedance in the site or region", u)
    }

    /// Fraction of replicates with all of `target` exceeding among those with
    /// all of `given` exceeding.
    pub fn tail_dependence(&self, target: &Region, given: &Region, u: f64) -> Result<f64> {
        Self::check_level(u)?;
        let t = self.scores.columns_of(target)?;
        let g = self.scores.columns_of(given)?;
        let ex = self.exceeds(u);
        let (mut hits, mut events) = (0u64, 0u64);
        for r in 0..self.scores.n() {
            if g.iter().all(|&c| ex(r, c)) {
                events += 1;
                hits += t.iter().all(|&c| ex(r, c)) as u64;
            }
        }
        ratio(hits, events, "a joint exceedance of the conditioning set", u)
    }

    /// Mean number of exceedances in `region` over replicates with at least
    /// one exceedance in `source`.
    pub fn region_contagion(&self, region: &Region, source: &Region, u: f64) -> Result<f64> {
        Self::check_level(u)?;
        let a = self.scores.columns_of(region)?;
        let b = self.scores.columns_of(source)?;
        let ex = self.exceeds(u);
        let (mut total, mut events) = (0u64, 0u64);
        for r in 0..self.scores.n() {
            if b.iter().any(|&c| ex(r, c)) {
                events += 1;
                total += a.iter().filter(|&&c| ex(r, c)).count() as u64;
            }
        }
        ratio(total, events, "an exceedance in the source region", u)
    }
}

pub fn empirical_contagion(sample: &FieldSample, region: &Region, site: LatticePoint, u: f64) -> Result<f64> {
    ThresholdOracle::new(sample).contagion(region, site, u)
}

pub fn empirical_stability(sample: &FieldSample, region: &Region, site: LatticePoint, u: f64) -> Result<f64> {
    ThresholdOracle::new(sample).stability(region, site, u)
}
