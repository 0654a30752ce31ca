//! Rank-based estimators of extremal coefficients, contagion and stability.
//!
//! Scores come from the modified empirical CDF
//! `F̂(u) = #{r : X_r <= u} / (n + 1)`, and
//! `ε̂_A = M̄ / (1 - M̄)` where `M̄` is the sample mean of
//! `max_{i∈A} F̂_i(X_i)`. The contagion and stability estimators substitute
//! `ε̂` into the closed forms.

mod study;

pub use study::{monte_carlo_study, IndexKind, Study, StudyResult};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{alternating_sums_all, submasks_by_size, SUBSET_LIMIT};
use crate::lattice::{LatticePoint, Region};
use crate::simulate::FieldSample;

/// Column-wise modified-ECDF scores of a sample.
///
/// Scores are held as the integer `≤`-counts `k`, the score itself being
/// `k / (n + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformScores {
    locations: Vec<LatticePoint>,
    /// `counts[column][row]`.
    counts: Vec<Vec<u32>>,
    n: usize,
}

impl UniformScores {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn locations(&self) -> &[LatticePoint] {
        &self.locations
    }

    pub fn score(&self, row: usize, col: usize) -> f64 {
        self.counts[col][row] as f64 / (self.n + 1) as f64
    }

    pub fn count(&self, row: usize, col: usize) -> u32 {
        self.counts[col][row]
    }

    pub fn column_of(&self, p: LatticePoint) -> Result<usize> {
        self.locations
            .iter()
            .position(|q| *q == p)
            .ok_or_else(|| Error::Argument(format!("location {p} is not part of the sample")))
    }

    pub(crate) fn columns_of<'a, I: IntoIterator<Item = &'a LatticePoint>>(&self, points: I) -> Result<Vec<usize>> {
        points.into_iter().map(|p| self.column_of(*p)).collect()
    }
}

/// Modified empirical CDF per column. Ties share the largest count, as the
/// `≤` in `F̂` dictates.
pub fn rank_transform(sample: &FieldSample) -> UniformScores {
    let n = sample.n();
    let counts = (0..sample.width())
        .map(|col| {
            let values: Vec<f64> = sample.column(col).collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            let mut counts = vec![0u32; n];
            let mut start = 0;
            while start < n {
                let mut end = start + 1;
                while end < n && values[order[end]] == values[order[start]] {
                    end += 1;
                }
                for &r in &order[start..end] {
                    counts[r] = end as u32;
                }
                start = end;
            }
            counts
        })
        .collect();
    UniformScores {
        locations: sample.locations().to_vec(),
        counts,
        n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalEstimate {
    /// `ε̂_A`, unclamped.
    pub value: f64,
    /// `M̄`.
    pub mean_max: f64,
    /// Set when `ε̂_A` falls outside `[1, |A|]`.
    pub out_of_range: bool,
}

impl ExtremalEstimate {
    /// `ε̂` clamped to `[1, size]`, for display.
    pub fn clamped(&self, size: usize) -> f64 {
        self.value.clamp(1.0, size as f64)
    }

    fn from_count_sum(total: u64, n: usize, size: usize) -> Result<Self> {
        // M̄ = total / (n (n+1)); ε̂ = total / (n (n+1) - total), formed from
        // exact integers so degenerate inputs give exact answers.
        let denom = n as u64 * (n as u64 + 1);
        if total >= denom {
            return Err(Error::Internal(format!(
                "mean maximum score {total}/{denom} is not below 1"
            )));
        }
        let value = total as f64 / (denom - total) as f64;
        Ok(Self {
            value,
            mean_max: total as f64 / denom as f64,
            out_of_range: !(1.0..=size as f64).contains(&value),
        })
    }
}

fn require_replicates(scores: &UniformScores) -> Result<()> {
    if scores.n < 2 {
        Err(Error::Argument(format!(
            "estimation needs at least 2 replicates, got {}",
            scores.n
        )))
    } else {
        Ok(())
    }
}

fn max_count_sum(scores: &UniformScores, cols: &[usize]) -> u64 {
    (0..scores.n)
        .map(|r| cols.iter().map(|&c| scores.counts[c][r]).max().unwrap_or(0) as u64)
        .sum()
}

fn extremal_by_columns(scores: &UniformScores, cols: &[usize]) -> Result<ExtremalEstimate> {
    let mut distinct = cols.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    ExtremalEstimate::from_count_sum(max_count_sum(scores, &distinct), scores.n, distinct.len())
}

pub fn estimate_extremal_coefficient(scores: &UniformScores, region: &Region) -> Result<ExtremalEstimate> {
    require_replicates(scores)?;
    region.require_nonempty("region")?;
    let cols = scores.columns_of(region)?;
    extremal_by_columns(scores, &cols)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatedIndices {
    pub ci: f64,
    pub si: f64,
    /// `ε̂_{{i,j}}` for `j` in region order.
    pub pairwise: Vec<(LatticePoint, ExtremalEstimate)>,
    /// `ε̂_{{i} ∪ A}`.
    pub joint: ExtremalEstimate,
    /// Set when `ε̂_{{i} ∪ A} < 1 - 1e-9`.
    pub joint_below_one: bool,
    pub n: usize,
}

/// `ĈI` and `ŜI` sharing one set of `ε̂` values.
pub fn estimate_indices(scores: &UniformScores, region: &Region, site: LatticePoint) -> Result<EstimatedIndices> {
    require_replicates(scores)?;
    region.require_nonempty("region")?;
    let i_col = scores.column_of(site)?;
    let pairwise = region
        .iter()
        .map(|&j| Ok((j, extremal_by_columns(scores, &[i_col, scores.column_of(j)?])?)))
        .collect::<Result<Vec<_>>>()?;
    let mut joint_cols = scores.columns_of(region)?;
    joint_cols.push(i_col);
    let joint = extremal_by_columns(scores, &joint_cols)?;
    let size = region.len() as f64;
    let total: f64 = pairwise.iter().map(|(_, e)| e.value).sum();
    Ok(EstimatedIndices {
        ci: 2.0 * size - total,
        si: (total - size) / joint.value,
        joint_below_one: joint.value < 1.0 - 1e-9,
        pairwise,
        joint,
        n: scores.n,
    })
}

pub fn estimate_contagion(scores: &UniformScores, region: &Region, site: LatticePoint) -> Result<f64> {
    Ok(estimate_indices(scores, region, site)?.ci)
}

pub fn estimate_stability(scores: &UniformScores, region: &Region, site: LatticePoint) -> Result<f64> {
    Ok(estimate_indices(scores, region, site)?.si)
}

/// Plug-in estimate of the region-to-region contagion index: `ε̂` over every
/// subset of `source ∪ {j}` fed through the same alternating sums as the
/// closed form. No published benchmark exists for this estimator.
pub fn estimate_contagion_region(scores: &UniformScores, region: &Region, source: &Region) -> Result<f64> {
    require_replicates(scores)?;
    region.require_nonempty("region")?;
    source.require_nonempty("source region")?;
    if source.len() > SUBSET_LIMIT {
        return Err(Error::Capacity {
            size: source.len(),
            limit: SUBSET_LIMIT,
        });
    }
    let source_cols = scores.columns_of(source)?;
    let eps_source = extremal_by_columns(scores, &source_cols)?.value;
    let source_mask = (1usize << source_cols.len()) - 1;

    let mut total = 0.0;
    for &j in region {
        let j_col = scores.column_of(j)?;
        let mut cols = source_cols.clone();
        let j_bit = match cols.iter().position(|&c| c == j_col) {
            Some(b) => b,
            None => {
                cols.push(j_col);
                cols.len() - 1
            }
        };
        let eps = subset_estimates(scores, &cols)?;
        let tau = alternating_sums_all(&eps, cols.len());
        let j_mask = 1usize << j_bit;
        let tau_j = tau[j_mask];
        if tau_j.abs() <= 1e-12 {
            return Err(Error::DegenerateConditioning(tau_j));
        }
        let terms = submasks_by_size(source_mask).into_iter().map(|sub| {
            let lambda = tau[sub | j_mask] / tau_j;
            if sub.count_ones() % 2 == 1 {
                lambda
            } else {
                -lambda
            }
        });
        total += <f64 as crate::scalar::Scalar>::sum_ordered(terms);
    }
    Ok(total / eps_source)
}

/// `ε̂_T` for every subset of `cols`, indexed by bitmask.
fn subset_estimates(scores: &UniformScores, cols: &[usize]) -> Result<Vec<f64>> {
    let full = 1usize << cols.len();
    let mut sums = vec![0u64; full];
    let mut running = vec![0u32; full];
    for r in 0..scores.n {
        for mask in 1..full {
            let low = mask.trailing_zeros() as usize;
            let c = scores.counts[cols[low]][r];
            let rest = mask & (mask - 1);
            running[mask] = if rest == 0 { c } else { running[rest].max(c) };
            sums[mask] += running[mask] as u64;
        }
    }
    let mut eps = vec![0.0; full];
    for mask in 1..full {
        eps[mask] = ExtremalEstimate::from_count_sum(sums[mask], scores.n, mask.count_ones() as usize)?.value;
    }
    Ok(eps)
}
