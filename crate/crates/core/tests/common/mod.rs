//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use m4_indices::lattice::{neighbor_points, LatticePoint, Region};
use m4_indices::model::{Domain, M4Spec, Pattern, PatternRule, Predicate, Weight};
use m4_indices::Rational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn pt(x: i64, y: i64) -> LatticePoint {
    LatticePoint::new(x, y)
}

pub fn region(text: &str) -> Region {
    text.parse().unwrap()
}

pub const RANDOM_DOMAIN: Domain = Domain {
    x_min: 0,
    x_max: 6,
    y_min: 0,
    y_max: 6,
};

const PREDICATES: [Predicate; 6] = [
    Predicate::AbscissaEven,
    Predicate::AbscissaOdd,
    Predicate::OrdinateEven,
    Predicate::OrdinateOdd,
    Predicate::BothOdd,
    Predicate::BothEven,
];

/// Nonnegative integer weights normalised to sum to one, as exact fractions.
fn random_pattern(rng: &mut impl Rng, patterns: usize, lags: usize) -> Pattern {
    loop {
        let raw: Vec<Vec<i64>> = (0..patterns)
            .map(|_| {
                (0..lags)
                    .map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=9) })
                    .collect()
            })
            .collect();
        let total: i64 = raw.iter().flatten().sum();
        if total == 0 {
            continue;
        }
        return Pattern::new(
            raw.iter()
                .map(|row| row.iter().map(|&w| Weight::frac(w, total)).collect())
                .collect(),
        );
    }
}

/// A valid rule-based spec on [`RANDOM_DOMAIN`] with random parity rules.
pub fn random_spec(rng: &mut impl Rng) -> M4Spec {
    let patterns = rng.gen_range(1..=3);
    let lag_min = rng.gen_range(-1..=1);
    let lags = rng.gen_range(1..=3);
    let mut preds = PREDICATES.to_vec();
    preds.shuffle(rng);
    let mut rules: Vec<_> = preds[..rng.gen_range(0..=3)]
        .iter()
        .map(|&p| PatternRule::new(p, random_pattern(rng, patterns, lags)))
        .collect();
    rules.push(PatternRule::new(Predicate::Always, random_pattern(rng, patterns, lags)));
    let spec = M4Spec::from_rules(patterns, lag_min, lag_min + lags as i64 - 1, RANDOM_DOMAIN, rules).unwrap();
    spec.ensure_valid().unwrap();
    spec
}

/// An interior site and a random nonempty subset of its neighbours.
pub fn random_site_region(rng: &mut impl Rng) -> (LatticePoint, Region) {
    let site = pt(rng.gen_range(1..=5), rng.gen_range(1..=5));
    let mut nb = neighbor_points(site).to_vec();
    nb.shuffle(rng);
    let k = rng.gen_range(1..=8);
    (site, Region::new(nb[..k].iter().copied()))
}

/// `ε_T = Σ_k max_{j∈T} a_{k,j}` straight from the coefficient tables.
pub fn brute_epsilon(spec: &M4Spec, sites: &[LatticePoint]) -> Rational {
    let cols: Vec<Vec<Rational>> = sites
        .iter()
        .map(|&p| spec.coefficients_at::<Rational>(p).unwrap())
        .collect();
    (0..cols[0].len())
        .map(|k| cols.iter().map(|c| c[k].clone()).max().unwrap())
        .fold(Rational::zero(), |a, b| a + b)
}

/// `Σ_k min_{j∈S} a_{k,j}`, equal to the alternating sum of `ε_T` over
/// nonempty `T ⊆ S` by the max-min identity.
pub fn brute_tau(spec: &M4Spec, sites: &[LatticePoint]) -> Rational {
    let cols: Vec<Vec<Rational>> = sites
        .iter()
        .map(|&p| spec.coefficients_at::<Rational>(p).unwrap())
        .collect();
    (0..cols[0].len())
        .map(|k| cols.iter().map(|c| c[k].clone()).min().unwrap())
        .fold(Rational::zero(), |a, b| a + b)
}

/// Prints and returns a pass/fail line for one checked quantity.
pub fn check(label: &str, ok: bool, detail: impl std::fmt::Display) -> bool {
    println!("    [{}] {label}: {detail}", if ok { "ok" } else { "MISS" });
    ok
}
