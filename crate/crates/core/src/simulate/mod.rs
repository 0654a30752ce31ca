//! Simulation of i.i.d. replicates of an M4 field,
//! `X_i = max_{l,m} a_{l,m,i} Z_{l,1-m}` with independent unit Fréchet `Z`.

mod export;
mod oracle;

pub use export::{read_sample_csv, write_sample_csv, SampleLayout, SampleMetadata};
pub use oracle::{empirical_contagion, empirical_stability, ThresholdOracle};

use rand::distributions::Open01;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, Region};
use crate::model::M4Spec;
use crate::rng::row_rng;

/// Threshold and replicate count used by default for oracle runs.
pub const DEFAULT_ORACLE_THRESHOLD: f64 = 0.99;
pub const DEFAULT_ORACLE_REPLICATES: usize = 200_000;

/// Replicates of a field on an ordered list of sites; one row per replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    locations: Vec<LatticePoint>,
    /// Row-major `n x locations.len()`.
    values: Vec<f64>,
    n: usize,
    pub seed: u64,
    pub spec_fingerprint: String,
}

impl FieldSample {
    /// Wraps an existing matrix. Values must be finite and positive.
    pub fn from_rows(
        locations: Vec<LatticePoint>,
        values: Vec<f64>,
        seed: u64,
        spec_fingerprint: String,
    ) -> Result<Self> {
        let width = locations.len();
        if width == 0 {
            return Err(Error::Argument("sample needs at least one location".into()));
        }
        if values.is_empty() || !values.len().is_multiple_of(width) {
            return Err(Error::Argument(format!(
                "{} values do not fill rows of width {width}",
                values.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        if let Some(dup) = locations.iter().find(|p| !seen.insert(**p)) {
            return Err(Error::Argument(format!("duplicate location {dup}")));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Argument(format!(
                "sample values must be finite and positive, got {bad}"
            )));
        }
        let n = values.len() / width;
        Ok(Self {
            locations,
            values,
            n,
            seed,
            spec_fingerprint,
        })
    }

    pub fn locations(&self) -> &[LatticePoint] {
        &self.locations
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> usize {
        self.locations.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let w = self.width();
        &self.values[r * w..(r + 1) * w]
    }

    pub fn value(&self, r: usize, col: usize) -> f64 {
        self.values[r * self.width() + col]
    }

    pub fn column(&self, col: usize) -> impl ExactSizeIterator<Item = f64> + '_ {
        let w = self.width();
        (0..self.n).map(move |r| self.values[r * w + col])
    }

    pub fn column_of(&self, p: LatticePoint) -> Option<usize> {
        self.locations.iter().position(|q| *q == p)
    }

    /// Applies `f` to every value of every column, keeping metadata.
    pub fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let w = self.width();
        let values = self.values.iter().enumerate().map(|(k, &v)| f(k % w, v)).collect();
        Self::from_rows(self.locations.clone(), values, self.seed, self.spec_fingerprint.clone())
    }
}

/// Inverse of the unit Fréchet law `F(x) = exp(-1/x)`.
pub fn unit_frechet_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Argument(format!("quantile level must lie in (0, 1), got {u}")));
    }
    Ok(-1.0 / u.ln())
}

/// `n` independent replicates of the field on `locations` (iterated in
/// region order). The output is a pure function of the arguments.
pub fn simulate_m4(spec: &M4Spec, locations: &Region, n: usize, seed: u64) -> Result<FieldSample> {
    spec.ensure_valid()?;
    locations.require_nonempty("locations")?;
    if n == 0 {
        return Err(Error::Argument("replicate count must be at least 1".into()));
    }
    let sites = locations.to_vec();
    let coeffs: Vec<Vec<f64>> = sites
        .iter()
        .map(|&p| spec.coefficients_at::<f64>(p))
        .collect::<Result<_>>()?;
    let factors = spec.pattern_count() * spec.lag_count();
    let width = sites.len();

    let mut values = vec![0.0; n * width];
    values.par_chunks_mut(width).enumerate().for_each_init(
        || vec![0.0; factors],
        |latent, (row, out)| {
            // Latent factors Z_{l,1-m}, flattened pattern-major like the
            // coefficient tables; they are dropped after the row.
            let mut rng = row_rng(seed, row as u64);
            for z in latent.iter_mut() {
                let u: f64 = rng.sample(Open01);
                *z = -1.0 / u.ln();
            }
            for (slot, a) in out.iter_mut().zip(&coeffs) {
                *slot = a.iter().zip(latent.iter()).map(|(w, z)| w * z).fold(0.0, f64::max);
            }
        },
    );

    FieldSample::from_rows(sites, values, seed, spec.fingerprint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_example_4_1, build_example_4_2};

    fn pt(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    #[test]
    fn frechet_quantile_values() {
        assert!((unit_frechet_quantile((-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-15);
        assert!((unit_frechet_quantile((-0.5f64).exp()).unwrap() - 2.0).abs() < 1e-14);
        assert!((unit_frechet_quantile(0.5).unwrap() - std::f64::consts::LOG2_E).abs() < 1e-15);
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(unit_frechet_quantile(bad).is_err());
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let s = build_example_4_2();
        let r: Region = "3,3;2,4;4,4".parse().unwrap();
        let a = simulate_m4(&s, &r, 500, 11).unwrap();
        let b = simulate_m4(&s, &r, 500, 11).unwrap();
        assert_eq!(a, b);
        let c = simulate_m4(&s, &r, 500, 12).unwrap();
        assert_ne!(a.row(0), c.row(0));
    }

    #[test]
    fn prefix_rows_do_not_depend_on_n() {
        let s = build_example_4_1();
        let r: Region = "3,3;4,3".parse().unwrap();
        let small = simulate_m4(&s, &r, 10, 3).unwrap();
        let large = simulate_m4(&s, &r, 1000, 3).unwrap();
        for row in 0..10 {
            assert_eq!(small.row(row), large.row(row));
        }
    }

    #[test]
    fn sites_with_identical_patterns_give_identical_columns() {
        let s = build_example_4_1();
        let r: Region = "3,3;3,4;5,1".parse().unwrap();
        let sample = simulate_m4(&s, &r, 2000, 5).unwrap();
        for row in 0..sample.n() {
            let v = sample.row(row);
            assert_eq!(v[0], v[1]);
            assert_eq!(v[1], v[2]);
        }
    }

    #[test]
    fn margins_are_unit_frechet() {
        // Kolmogorov-Smirnov against exp(-1/x); α = 0.01 critical value
        // 1.628 / sqrt(n).
        let s = build_example_4_2();
        let r: Region = "3,3;2,4".parse().unwrap();
        let n = 100_000;
        let sample = simulate_m4(&s, &r, n, 2024).unwrap();
        let critical = 1.628 / (n as f64).sqrt();
        for col in 0..sample.width() {
            let mut xs: Vec<f64> = sample.column(col).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let d = xs
                .iter()
                .enumerate()
                .map(|(k, &x)| {
                    let f = (-1.0 / x).exp();
                    let above = (k + 1) as f64 / n as f64 - f;
                    let below = f - k as f64 / n as f64;
                    above.max(below)
                })
                .fold(0.0, f64::max);
            assert!(d < critical, "column {col}: KS distance {d} >= {critical}");
        }
    }

    #[test]
    fn stray_location_is_domain_error() {
        let s = build_example_4_1();
        let r = Region::singleton(pt(-3, 0));
        assert!(matches!(simulate_m4(&s, &r, 5, 1), Err(Error::Domain(_))));
        assert!(simulate_m4(&s, &Region::singleton(pt(1, 1)), 0, 1).is_err());
    }

    #[test]
    fn values_are_positive() {
        let s = build_example_4_2();
        let r: Region = "0,0;1,1;2,2".parse().unwrap();
        let sample = simulate_m4(&s, &r, 1000, 9).unwrap();
        assert!((0..sample.n()).all(|k| sample.row(k).iter().all(|v| *v > 0.0)));
    }
}
