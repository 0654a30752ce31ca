//! Closed-form extremal dependence measures of a finite M4 field.
//!
//! For sites `A = {i_1, .., i_k}` the exponent function is
//! `V_A(x) = Σ_{l,m} max_j a_{l,m,i_j} / x_j`, and the extremal coefficient
//! is `ε_A = V_A(1, .., 1)`. Everything else here reduces to extremal
//! coefficients:
//!
//! * pairwise tail dependence `λ_{i,j} = 2 - ε_{i,j}`;
//! * multivariate tail dependence `λ_{J,K} = τ(J ∪ K) / τ(K)` with the
//!   alternating sum `τ(S) = Σ_{∅≠T⊆S} (-1)^{|T|+1} ε_T`, which is the
//!   first-order coefficient of `P(all of S exceed u)` as `u → 1`;
//! * contagion `CI(A, i) = 2|A| - Σ_j ε_{i,j}`;
//! * stability `SI(A, i) = (Σ_j ε_{i,j} - |A|) / ε_{{i} ∪ A}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{neighbor_points, LatticePoint, Region};
use crate::model::M4Spec;
use crate::scalar::Scalar;

/// Largest site set enumerated subset-by-subset.
pub const SUBSET_LIMIT: usize = 20;

fn site_coefficients<S: Scalar>(spec: &M4Spec, sites: &[LatticePoint]) -> Result<Vec<Vec<S>>> {
    sites.iter().map(|&p| spec.coefficients_at::<S>(p)).collect()
}

/// `Σ_{l,m} max_j coeffs[j][lm]`.
fn max_sum<S: Scalar>(coeffs: &[&[S]]) -> S {
    let width = coeffs[0].len();
    S::sum_ordered((0..width).map(|k| {
        coeffs[1..]
            .iter()
            .fold(coeffs[0][k].clone(), |acc, c| S::max_of(acc, c[k].clone()))
    }))
}

pub fn exponent_value<S: Scalar>(spec: &M4Spec, region: &Region, x: &[S]) -> Result<S> {
    spec.ensure_valid()?;
    region.require_nonempty("region")?;
    if x.len() != region.len() {
        return Err(Error::Argument(format!(
            "expected {} arguments, got {}",
            region.len(),
            x.len()
        )));
    }
    if let Some(bad) = x
        .iter()
        .find(|v| (*v).partial_cmp(&S::zero()) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::Argument(format!(
            "exponent arguments must be positive, got {bad}"
        )));
    }
    let coeffs = site_coefficients::<S>(spec, &region.to_vec())?;
    let scaled: Vec<Vec<S>> = coeffs
        .iter()
        .zip(x)
        .map(|(c, xj)| c.iter().map(|a| a.clone() / xj.clone()).collect())
        .collect();
    let refs: Vec<&[S]> = scaled.iter().map(Vec::as_slice).collect();
    Ok(max_sum(&refs))
}

pub fn extremal_coefficient<S: Scalar>(spec: &M4Spec, region: &Region) -> Result<S> {
    spec.ensure_valid()?;
    region.require_nonempty("region")?;
    let coeffs = site_coefficients::<S>(spec, &region.to_vec())?;
    let refs: Vec<&[S]> = coeffs.iter().map(Vec::as_slice).collect();
    Ok(max_sum(&refs))
}

fn pair_coefficient<S: Scalar>(spec: &M4Spec, i: LatticePoint, j: LatticePoint) -> Result<S> {
    let a = spec.coefficients_at::<S>(i)?;
    let b = spec.coefficients_at::<S>(j)?;
    Ok(max_sum(&[&a, &b]))
}

/// `ε_{{s_j(i), i}}` laid out as
///
/// ```text
/// s4 s3 s2
/// s5 i  s1
/// s6 s7 s8
/// ```
pub fn extremal_coefficient_matrix<S: Scalar>(spec: &M4Spec, site: LatticePoint) -> Result<[[S; 3]; 3]> {
    spec.ensure_valid()?;
    let s = neighbor_points(site);
    spec.require_in_domain(s.iter().chain([&site]))?;
    let e = |p: LatticePoint| pair_coefficient::<S>(spec, site, p);
    Ok([
        [e(s[3])?, e(s[2])?, e(s[1])?],
        [e(s[4])?, e(site)?, e(s[0])?],
        [e(s[5])?, e(s[6])?, e(s[7])?],
    ])
}

pub fn pairwise_tail_dependence<S: Scalar>(spec: &M4Spec, i: LatticePoint, j: LatticePoint) -> Result<S> {
    spec.ensure_valid()?;
    Ok(S::from_count(2) - pair_coefficient::<S>(spec, i, j)?)
}

// ---------------------------------------------------------------------------
// Subset enumeration
// ---------------------------------------------------------------------------

fn check_capacity(size: usize) -> Result<()> {
    if size > SUBSET_LIMIT {
        Err(Error::Capacity {
            size,
            limit: SUBSET_LIMIT,
        })
    } else {
        Ok(())
    }
}

/// `ε_T` for every subset `T` of the given sites, indexed by bitmask
/// (entry 0, the empty set, is zero).
#[allow(clippy::needless_range_loop)]
fn subset_extremal_coefficients<S: Scalar>(coeffs: &[Vec<S>]) -> Vec<S> {
    let k = coeffs.len();
    let width = coeffs.first().map_or(0, Vec::len);
    let full = 1usize << k;
    let mut eps = vec![S::zero(); full];
    let mut running = vec![S::zero(); full];
    for lm in 0..width {
        for mask in 1..full {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let a = coeffs[low][lm].clone();
            running[mask] = if rest == 0 {
                a
            } else {
                S::max_of(running[rest].clone(), a)
            };
        }
        for mask in 1..full {
            eps[mask] = eps[mask].clone() + running[mask].clone();
        }
    }
    eps
}

/// Nonempty submasks of `of`, by increasing size then increasing value.
pub(crate) fn submasks_by_size(of: usize) -> Vec<usize> {
    let mut masks = Vec::with_capacity(1 << of.count_ones());
    let mut sub = of;
    while sub != 0 {
        masks.push(sub);
        sub = (sub - 1) & of;
    }
    masks.sort_unstable_by_key(|&m| (m.count_ones(), m));
    masks
}

/// `τ(T) = Σ_{∅≠U⊆T} (-1)^{|U|+1} ε_U` over the submasks of `of`, summed
/// in fixed subset-size order.
fn alternating_sum<S: Scalar>(eps: &[S], of: usize) -> S {
    S::sum_ordered(submasks_by_size(of).into_iter().map(|m| {
        if m.count_ones() % 2 == 1 {
            eps[m].clone()
        } else {
            -eps[m].clone()
        }
    }))
}

/// `τ(T)` for every subset `T` at once via the subset-sum (zeta) transform.
pub(crate) fn alternating_sums_all<S: Scalar>(eps: &[S], k: usize) -> Vec<S> {
    let mut tau: Vec<S> = eps
        .iter()
        .enumerate()
        .map(|(m, e)| {
            if m == 0 {
                S::zero()
            } else if m.count_ones() % 2 == 1 {
                e.clone()
            } else {
                -e.clone()
            }
        })
        .collect();
    for bit in 0..k {
        let b = 1usize << bit;
        for mask in 0..tau.len() {
            if mask & b != 0 {
                tau[mask] = tau[mask].clone() + tau[mask ^ b].clone();
            }
        }
    }
    tau
}

fn check_conditioning<S: Scalar>(denominator: &S) -> Result<()> {
    if denominator.is_negligible() || *denominator < S::zero() {
        Err(Error::DegenerateConditioning(denominator.to_f64()))
    } else {
        Ok(())
    }
}

/// `λ_{J,K}`: limit of `P(all of J exceed u | all of K exceed u)` as `u → 1`.
pub fn multivariate_tail_dependence<S: Scalar>(spec: &M4Spec, target: &Region, given: &Region) -> Result<S> {
    spec.ensure_valid()?;
    target.require_nonempty("target set")?;
    given.require_nonempty("conditioning set")?;
    let sites = target.union(given);
    check_capacity(sites.len())?;
    let list = sites.to_vec();
    let coeffs = site_coefficients::<S>(spec, &list)?;
    let eps = subset_extremal_coefficients(&coeffs);
    let full = (1usize << list.len()) - 1;
    let given_mask = list
        .iter()
        .enumerate()
        .filter(|(_, p)| given.contains(p))
        .fold(0usize, |m, (b, _)| m | (1 << b));
    let denominator = alternating_sum(&eps, given_mask);
    check_conditioning(&denominator)?;
    Ok(alternating_sum(&eps, full) / denominator)
}

pub fn contagion_index<S: Scalar>(spec: &M4Spec, region: &Region, site: LatticePoint) -> Result<S> {
    spec.ensure_valid()?;
    region.require_nonempty("region")?;
    let eps = pairwise_epsilons::<S>(spec, region, site)?;
    Ok(S::from_count(2 * region.len()) - S::sum_ordered(eps.into_iter().map(|(_, e)| e)))
}

/// Contagion from a region: the limiting expected number of exceedances in
/// `region` given at least one exceedance in `source`,
/// `Σ_{j∈A} [Σ_{∅≠J⊆B} (-1)^{|J|+1} λ_{J,{j}}] / ε_B`.
pub fn contagion_index_region<S: Scalar>(spec: &M4Spec, region: &Region, source: &Region) -> Result<S> {
    spec.ensure_valid()?;
    region.require_nonempty("region")?;
    source.require_nonempty("source region")?;
    check_capacity(source.len())?;
    let source_list = source.to_vec();
    spec.require_in_domain(region.iter().chain(source.iter()))?;
    let eps_source = extremal_coefficient::<S>(spec, source)?;

    let mut per_site = Vec::with_capacity(region.len());
    for &j in region {
        // Bits 0..|B| index the source sites; `j` gets its own top bit unless
        // it already belongs to the source.
        let mut sites = source_list.clone();
        let j_bit = match source_list.iter().position(|p| *p == j) {
            Some(b) => b,
            None => {
                sites.push(j);
                sites.len() - 1
            }
        };
        let coeffs = site_coefficients::<S>(spec, &sites)?;
        let eps = subset_extremal_coefficients(&coeffs);
        let tau = alternating_sums_all(&eps, sites.len());
        let j_mask = 1usize << j_bit;
        let tau_j = tau[j_mask].clone();
        check_conditioning(&tau_j)?;
        let source_mask = (1usize << source_list.len()) - 1;
        let terms = submasks_by_size(source_mask).into_iter().map(|sub| {
            let lambda = tau[sub | j_mask].clone() / tau_j.clone();
            if sub.count_ones() % 2 == 1 {
                lambda
            } else {
                -lambda
            }
        });
        per_site.push(S::sum_ordered(terms));
    }
    check_conditioning(&eps_source)?;
    Ok(S::sum_ordered(per_site) / eps_source)
}

/// `CI(A, A)`; 1 means stable, larger values fragile.
pub fn fragility_index<S: Scalar>(spec: &M4Spec, region: &Region) -> Result<S> {
    contagion_index_region(spec, region, region)
}

pub fn stability_index<S: Scalar>(spec: &M4Spec, region: &Region, site: LatticePoint) -> Result<S> {
    Ok(summarize::<S>(spec, region, site)?.si)
}

/// `((Σ_j ε_{i,j} - |A|) / (|A| + 1), (Σ_j ε_{i,j} - |A|) / max_j ε_{i,j})`.
pub fn stability_bounds<S: Scalar>(spec: &M4Spec, region: &Region, site: LatticePoint) -> Result<(S, S)> {
    let s = summarize::<S>(spec, region, site)?;
    Ok((s.si_lower, s.si_upper))
}

/// Limit of the expected crossing count given at least one crossing,
/// `(Σ_j ε_{i,j} - |A|) / (ε_{{i}∪A} - 1)`.
///
/// This conditions on the crossing event itself, whereas
/// [`stability_index`] normalises by `ε_{{i}∪A}`, i.e. conditions on any
/// exceedance in `{i} ∪ A`. The threshold oracles converge to this value
/// when they condition on crossings.
pub fn crossing_conditional_limit<S: Scalar>(spec: &M4Spec, region: &Region, site: LatticePoint) -> Result<S> {
    let s = summarize::<S>(spec, region, site)?;
    let excess = S::sum_ordered(s.pairwise_epsilons.iter().map(|(_, e)| e.clone())) - S::from_count(region.len());
    let denominator = s.epsilon_joint - S::one();
    if denominator.is_negligible() {
        return Err(Error::UndefinedConditional(
            "the site and region are totally dependent, crossings never occur".into(),
        ));
    }
    Ok(excess / denominator)
}

fn pairwise_epsilons<S: Scalar>(spec: &M4Spec, region: &Region, site: LatticePoint) -> Result<Vec<(LatticePoint, S)>> {
    let base = spec.coefficients_at::<S>(site)?;
    region
        .iter()
        .map(|&j| {
            let other = spec.coefficients_at::<S>(j)?;
            Ok((j, max_sum(&[&base, &other])))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceSummary<S> {
    pub region: Region,
    pub site: LatticePoint,
    /// `ε_{{i,j}}` for `j` in region order.
    pub pairwise_epsilons: Vec<(LatticePoint, S)>,
    /// `ε_{{i} ∪ A}`.
    pub epsilon_joint: S,
    pub ci: S,
    pub si: S,
    pub si_lower: S,
    pub si_upper: S,
}

pub fn summarize<S: Scalar>(spec: &M4Spec, region: &Region, site: LatticePoint) -> Result<DependenceSummary<S>> {
    spec.ensure_valid()?;
    region.require_nonempty("region")?;
    let pairwise = pairwise_epsilons::<S>(spec, region, site)?;
    let epsilon_joint = extremal_coefficient::<S>(spec, &region.with(site))?;
    let size = S::from_count(region.len());
    let total = S::sum_ordered(pairwise.iter().map(|(_, e)| e.clone()));
    let excess = total.clone() - size.clone();
    let ci = S::from_count(2 * region.len()) - total;
    let si = excess.clone() / epsilon_joint.clone();
    let largest = pairwise
        .iter()
        .map(|(_, e)| e.clone())
        .reduce(S::max_of)
        .expect("nonempty region");
    let si_lower = excess.clone() / (size + S::one());
    let si_upper = excess / largest;
    Ok(DependenceSummary {
        region: region.clone(),
        site,
        pairwise_epsilons: pairwise,
        epsilon_joint,
        ci,
        si,
        si_lower,
        si_upper,
    })
}

impl DependenceSummary<crate::scalar::Rational> {
    pub fn to_f64(&self) -> DependenceSummary<f64> {
        DependenceSummary {
            region: self.region.clone(),
            site: self.site,
            pairwise_epsilons: self.pairwise_epsilons.iter().map(|(p, e)| (*p, e.to_f64())).collect(),
            epsilon_joint: self.epsilon_joint.to_f64(),
            ci: self.ci.to_f64(),
            si: self.si.to_f64(),
            si_lower: self.si_lower.to_f64(),
            si_upper: self.si_upper.to_f64(),
        }
    }
}
