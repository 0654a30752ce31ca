//! M4 coefficient specifications.
//!
//! An [`M4Spec`] assigns every site of a finite lattice rectangle a weight
//! table `a[l][m]` over `L` signature patterns and the lag range
//! `m_min..=m_max`. Tables come either from an ordered list of
//! [`PatternRule`]s (first matching predicate wins) or from an explicit
//! per-site table.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::scalar::{parse_rational, rational, NeumaierSum, Rational, Scalar};

pub const SUM_TOLERANCE: f64 = 1e-12;

/// A non-negative coefficient, kept as an exact rational when it was written
/// as one.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    value: f64,
    exact: Option<Rational>,
}

impl Weight {
    pub fn from_rational(r: Rational) -> Self {
        Self {
            value: Scalar::to_f64(&r),
            exact: Some(r),
        }
    }

    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::from_rational(rational(numer, denom))
    }

    pub fn from_f64(value: f64) -> Self {
        Self { value, exact: None }
    }

    pub fn zero() -> Self {
        Self::frac(0, 1)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&Rational> {
        self.exact.as_ref()
    }

    fn is_negative(&self) -> bool {
        match &self.exact {
            Some(r) => *r < <Rational as Zero>::zero(),
            None => self.value < 0.0 || self.value.is_nan(),
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "{}", self.value),
        }
    }
}

/// Weight table of one site: `weights[l - 1][m - m_min]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    weights: Vec<Vec<Weight>>,
}

impl Pattern {
    pub fn new(weights: Vec<Vec<Weight>>) -> Self {
        Self { weights }
    }

    /// Shorthand for all-rational patterns: `Pattern::fracs(&[&[(4, 5), (1, 5)]])`.
    pub fn fracs(rows: &[&[(i64, i64)]]) -> Self {
        Self::new(
            rows.iter()
                .map(|row| row.iter().map(|&(p, q)| Weight::frac(p, q)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<Weight>] {
        &self.weights
    }

    fn flat(&self) -> impl Iterator<Item = &Weight> + '_ {
        self.weights.iter().flatten()
    }

    fn is_exact(&self) -> bool {
        self.flat().all(|w| w.exact.is_some())
    }

    fn check_shape(&self, patterns: usize, lags: usize) -> Result<()> {
        if self.weights.len() != patterns || self.weights.iter().any(|r| r.len() != lags) {
            return Err(Error::Spec(format!(
                "pattern table must be {patterns} x {lags}, got {} rows of lengths {:?}",
                self.weights.len(),
                self.weights.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        Ok(())
    }

    /// `None` when the pattern is a valid probability table, otherwise the
    /// problems found.
    fn defect(&self, lag_min: i64) -> Option<PatternDefect> {
        let negative: Vec<_> = self
            .weights
            .iter()
            .enumerate()
            .flat_map(|(l, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, w)| w.is_negative())
                    .map(move |(k, w)| (l + 1, lag_min + k as i64, w.clone()))
            })
            .collect();
        let (sum, sum_ok) = if self.is_exact() {
            let s: Rational = self.flat().map(|w| w.exact.clone().unwrap()).sum();
            let ok = s == <Rational as One>::one();
            (s.to_string(), ok)
        } else {
            let mut acc = NeumaierSum::default();
            self.flat().for_each(|w| acc.add(w.value));
            let s = acc.value();
            ((s).to_string(), (s - 1.0).abs() <= SUM_TOLERANCE)
        };
        if negative.is_empty() && sum_ok {
            None
        } else {
            Some(PatternDefect { negative, sum, sum_ok })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct PatternDefect {
    negative: Vec<(usize, i64, Weight)>,
    sum: String,
    sum_ok: bool,
}

/// Coordinate predicate selecting which pattern applies at a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    AbscissaEven,
    AbscissaOdd,
    OrdinateEven,
    OrdinateOdd,
    BothOdd,
    BothEven,
    Always,
}

impl Predicate {
    pub fn matches(self, p: LatticePoint) -> bool {
        let even = |v: i64| v.rem_euclid(2) == 0;
        match self {
            Predicate::AbscissaEven => even(p.x),
            Predicate::AbscissaOdd => !even(p.x),
            Predicate::OrdinateEven => even(p.y),
            Predicate::OrdinateOdd => !even(p.y),
            Predicate::BothOdd => !even(p.x) && !even(p.y),
            Predicate::BothEven => even(p.x) && even(p.y),
            Predicate::Always => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternRule {
    pub predicate: Predicate,
    pub pattern: Pattern,
}

impl PatternRule {
    pub fn new(predicate: Predicate, pattern: Pattern) -> Self {
        Self { predicate, pattern }
    }

    /// The two-branch rule "`predicate` ? `if_true` : `if_false`".
    pub fn branch(predicate: Predicate, if_true: Pattern, if_false: Pattern) -> Vec<PatternRule> {
        vec![
            PatternRule::new(predicate, if_true),
            PatternRule::new(Predicate::Always, if_false),
        ]
    }
}

/// Inclusive lattice rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Domain {
    pub x_min: i64,
    pub x_max: i64,
    pub y_min: i64,
    pub y_max: i64,
}

impl Domain {
    pub fn new(x_min: i64, x_max: i64, y_min: i64, y_max: i64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn contains(&self, p: LatticePoint) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (self.x_min..=self.x_max).flat_map(move |x| (self.y_min..=self.y_max).map(move |y| LatticePoint::new(x, y)))
    }

    pub fn size(&self) -> usize {
        if self.x_min > self.x_max || self.y_min > self.y_max {
            0
        } else {
            ((self.x_max - self.x_min + 1) * (self.y_max - self.y_min + 1)) as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Rules(Vec<PatternRule>),
    Table(BTreeMap<LatticePoint, Pattern>),
}

/// A finite M4 field: `L` signature patterns over lags `m_min..=m_max` on a
/// lattice rectangle.
///
/// Construction checks structure (table shapes, rule coverage, domain);
/// [`M4Spec::validate`] checks the probabilistic constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct M4Spec {
    patterns: usize,
    lag_min: i64,
    lag_max: i64,
    domain: Domain,
    coefficients: Coefficients,
}

impl M4Spec {
    pub fn from_rules(
        patterns: usize,
        lag_min: i64,
        lag_max: i64,
        domain: Domain,
        rules: Vec<PatternRule>,
    ) -> Result<Self> {
        let spec = Self {
            patterns,
            lag_min,
            lag_max,
            domain,
            coefficients: Coefficients::Rules(rules),
        };
        spec.check_structure()?;
        Ok(spec)
    }

    /// Every site of `domain` must have an entry.
    pub fn from_table(
        patterns: usize,
        lag_min: i64,
        lag_max: i64,
        domain: Domain,
        table: BTreeMap<LatticePoint, Pattern>,
    ) -> Result<Self> {
        let spec = Self {
            patterns,
            lag_min,
            lag_max,
            domain,
            coefficients: Coefficients::Table(table),
        };
        spec.check_structure()?;
        Ok(spec)
    }

    fn check_structure(&self) -> Result<()> {
        if self.patterns == 0 {
            return Err(Error::Spec("L must be at least 1".into()));
        }
        if self.lag_min > self.lag_max {
            return Err(Error::Spec(format!(
                "empty lag range [{}, {}]",
                self.lag_min, self.lag_max
            )));
        }
        if self.domain.size() == 0 {
            return Err(Error::Spec("domain rectangle is empty".into()));
        }
        let lags = self.lag_count();
        match &self.coefficients {
            Coefficients::Rules(rules) => {
                match rules.last() {
                    Some(r) if r.predicate == Predicate::Always => {}
                    _ => return Err(Error::Spec("the last rule must use predicate `always`".into())),
                }
                for r in rules {
                    r.pattern.check_shape(self.patterns, lags)?;
                }
            }
            Coefficients::Table(table) => {
                for (p, pat) in table {
                    if !self.domain.contains(*p) {
                        return Err(Error::Spec(format!("table entry {p} lies outside the domain")));
                    }
                    pat.check_shape(self.patterns, lags)?;
                }
                if let Some(p) = self.domain.points().find(|p| !table.contains_key(p)) {
                    return Err(Error::Spec(format!("table has no entry for domain site {p}")));
                }
            }
        }
        Ok(())
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns
    }

    pub fn lag_range(&self) -> (i64, i64) {
        (self.lag_min, self.lag_max)
    }

    pub fn lag_count(&self) -> usize {
        (self.lag_max - self.lag_min + 1) as usize
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    /// True when every weight is an exact rational.
    pub fn is_exact(&self) -> bool {
        match &self.coefficients {
            Coefficients::Rules(rules) => rules.iter().all(|r| r.pattern.is_exact()),
            Coefficients::Table(t) => t.values().all(Pattern::is_exact),
        }
    }

    pub fn pattern_at(&self, p: LatticePoint) -> Result<&Pattern> {
        if !self.domain.contains(p) {
            return Err(Error::Domain(p));
        }
        match &self.coefficients {
            Coefficients::Rules(rules) => Ok(&rules
                .iter()
                .find(|r| r.predicate.matches(p))
                .expect("structure check guarantees a trailing `always` rule")
                .pattern),
            Coefficients::Table(t) => t.get(&p).ok_or(Error::Domain(p)),
        }
    }

    /// `a_{l,m,p}`; zero for `(l, m)` outside `[1, L] x [m_min, m_max]`.
    pub fn coefficient(&self, l: usize, m: i64, p: LatticePoint) -> Result<Weight> {
        let pattern = self.pattern_at(p)?;
        if l == 0 || l > self.patterns || m < self.lag_min || m > self.lag_max {
            return Ok(Weight::zero());
        }
        Ok(pattern.weights[l - 1][(m - self.lag_min) as usize].clone())
    }

    /// All coefficients of a site flattened pattern-major, converted to `S`.
    pub fn coefficients_at<S: Scalar>(&self, p: LatticePoint) -> Result<Vec<S>> {
        self.pattern_at(p)?.flat().map(S::from_weight).collect()
    }

    /// Every violating site with its offending entries and actual sum.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let rule_defects: Vec<Option<PatternDefect>> = match &self.coefficients {
            Coefficients::Rules(rules) => rules.iter().map(|r| r.pattern.defect(self.lag_min)).collect(),
            Coefficients::Table(_) => Vec::new(),
        };
        for p in self.domain.points() {
            let defect = match &self.coefficients {
                Coefficients::Rules(rules) => {
                    let k = rules
                        .iter()
                        .position(|r| r.predicate.matches(p))
                        .expect("trailing `always` rule");
                    rule_defects[k].clone()
                }
                Coefficients::Table(t) => t[&p].defect(self.lag_min),
            };
            if let Some(d) = defect {
                violations.push(Violation {
                    location: p,
                    negative_entries: d
                        .negative
                        .iter()
                        .map(|(l, m, w)| NegativeEntry {
                            l: *l,
                            m: *m,
                            weight: w.to_string(),
                        })
                        .collect(),
                    sum: d.sum,
                    sum_ok: d.sum_ok,
                });
            }
        }
        ValidationReport { violations }
    }

    /// Fast path of [`validate`](Self::validate): only patterns in use are
    /// checked, the full report is built on failure.
    pub fn ensure_valid(&self) -> Result<()> {
        let any_bad = match &self.coefficients {
            Coefficients::Rules(rules) => rules.iter().any(|r| r.pattern.defect(self.lag_min).is_some()),
            Coefficients::Table(t) => t.values().any(|p| p.defect(self.lag_min).is_some()),
        };
        if !any_bad {
            return Ok(());
        }
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(report))
        }
    }

    pub fn require_in_domain<'a, I: IntoIterator<Item = &'a LatticePoint>>(&self, points: I) -> Result<()> {
        for p in points {
            if !self.domain.contains(*p) {
                return Err(Error::Domain(*p));
            }
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_vec(&self.to_file()).expect("spec serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(text)?;
        file.into_spec()
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&crate::error::read_input(path)?)
    }

    fn to_file(&self) -> SpecFile {
        let (rules, sites) = match &self.coefficients {
            Coefficients::Rules(rules) => (
                Some(
                    rules
                        .iter()
                        .map(|r| RuleFile {
                            predicate: r.predicate,
                            patterns: pattern_to_file(&r.pattern),
                        })
                        .collect(),
                ),
                None,
            ),
            Coefficients::Table(t) => (
                None,
                Some(
                    t.iter()
                        .map(|(p, pat)| SiteFile {
                            x: p.x,
                            y: p.y,
                            patterns: pattern_to_file(pat),
                        })
                        .collect(),
                ),
            ),
        };
        SpecFile {
            patterns: self.patterns,
            m_min: self.lag_min,
            m_max: self.lag_max,
            domain: self.domain,
            rules,
            sites,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeEntry {
    pub l: usize,
    pub m: i64,
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub location: LatticePoint,
    pub negative_entries: Vec<NegativeEntry>,
    /// Actual total weight at the site (exact when the pattern is rational).
    pub sum: String,
    pub sum_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        write!(f, "{} violating site(s)", self.violations.len())?;
        for v in self.violations.iter().take(5) {
            write!(f, "; {} sum={}", v.location, v.sum)?;
            for n in &v.negative_entries {
                write!(f, " a[{},{}]={}", n.l, n.m, n.weight)?;
            }
        }
        if self.violations.len() > 5 {
            f.write_str("; ...")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum WeightRepr {
    Text(String),
    Number(f64),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    predicate: Predicate,
    patterns: Vec<Vec<WeightRepr>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteFile {
    x: i64,
    y: i64,
    patterns: Vec<Vec<WeightRepr>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[serde(rename = "L")]
    patterns: usize,
    m_min: i64,
    m_max: i64,
    domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rules: Option<Vec<RuleFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sites: Option<Vec<SiteFile>>,
}

fn pattern_to_file(p: &Pattern) -> Vec<Vec<WeightRepr>> {
    p.weights
        .iter()
        .map(|row| {
            row.iter()
                .map(|w| match &w.exact {
                    Some(r) => WeightRepr::Text(r.to_string()),
                    None => WeightRepr::Number(w.value),
                })
                .collect()
        })
        .collect()
}

fn pattern_from_file(rows: Vec<Vec<WeightRepr>>) -> Result<Pattern> {
    let weights = rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|w| match w {
                    WeightRepr::Number(v) => Ok(Weight::from_f64(v)),
                    WeightRepr::Text(t) => parse_rational(&t)
                        .map(Weight::from_rational)
                        .ok_or_else(|| Error::Spec(format!("unparseable weight `{t}`"))),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Pattern::new(weights))
}

impl SpecFile {
    fn into_spec(self) -> Result<M4Spec> {
        match (self.rules, self.sites) {
            (Some(rules), None) => {
                let rules = rules
                    .into_iter()
                    .map(|r| Ok(PatternRule::new(r.predicate, pattern_from_file(r.patterns)?)))
                    .collect::<Result<Vec<_>>>()?;
                M4Spec::from_rules(self.patterns, self.m_min, self.m_max, self.domain, rules)
            }
            (None, Some(sites)) => {
                let mut table = BTreeMap::new();
                for s in sites {
                    let p = LatticePoint::new(s.x, s.y);
                    if table.insert(p, pattern_from_file(s.patterns)?).is_some() {
                        return Err(Error::Spec(format!("duplicate table entry for {p}")));
                    }
                }
                M4Spec::from_table(self.patterns, self.m_min, self.m_max, self.domain, table)
            }
            _ => Err(Error::Spec("exactly one of `rules` or `sites` must be given".into())),
        }
    }
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Rectangle used by the presets unless another one is requested.
pub const DEFAULT_PRESET_DOMAIN: Domain = Domain {
    x_min: 0,
    x_max: 10,
    y_min: 0,
    y_max: 10,
};

/// One pattern, lags 1..=2: `(4/5, 1/5)` at even abscissa, `(1/4, 3/4)`
/// elsewhere.
pub fn example_4_1_on(domain: Domain) -> M4Spec {
    let rules = PatternRule::branch(
        Predicate::AbscissaEven,
        Pattern::fracs(&[&[(4, 5), (1, 5)]]),
        Pattern::fracs(&[&[(1, 4), (3, 4)]]),
    );
    M4Spec::from_rules(1, 1, 2, domain, rules).expect("preset is well formed")
}

/// Two patterns, lags 1..=3: `(1/5, 1/5, 1/5 | 1/10, 1/10, 1/5)` where both
/// coordinates are odd, `(1/4, 1/8, 1/8 | 1/6, 1/6, 1/6)` elsewhere.
pub fn example_4_2_on(domain: Domain) -> M4Spec {
    let rules = PatternRule::branch(
        Predicate::BothOdd,
        Pattern::fracs(&[&[(1, 5), (1, 5), (1, 5)], &[(1, 10), (1, 10), (1, 5)]]),
        Pattern::fracs(&[&[(1, 4), (1, 8), (1, 8)], &[(1, 6), (1, 6), (1, 6)]]),
    );
    M4Spec::from_rules(2, 1, 3, domain, rules).expect("preset is well formed")
}

pub fn build_example_4_1() -> M4Spec {
    example_4_1_on(DEFAULT_PRESET_DOMAIN)
}

pub fn build_example_4_2() -> M4Spec {
    example_4_2_on(DEFAULT_PRESET_DOMAIN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    fn exact(w: Weight) -> Rational {
        w.exact().cloned().unwrap()
    }

    #[test]
    fn example_4_1_coefficients() {
        let s = build_example_4_1();
        assert_eq!(exact(s.coefficient(1, 1, pt(4, 3)).unwrap()), rational(4, 5));
        assert_eq!(exact(s.coefficient(1, 2, pt(3, 3)).unwrap()), rational(3, 4));
        assert_eq!(exact(s.coefficient(1, 3, pt(4, 3)).unwrap()), rational(0, 1));
        assert_eq!(exact(s.coefficient(2, 1, pt(4, 3)).unwrap()), rational(0, 1));
        assert!(s.validate().is_valid());
        assert!(s.is_exact());
    }

    #[test]
    fn example_4_2_coefficients() {
        let s = build_example_4_2();
        assert_eq!(exact(s.coefficient(2, 3, pt(3, 3)).unwrap()), rational(1, 5));
        assert_eq!(exact(s.coefficient(1, 1, pt(2, 4)).unwrap()), rational(1, 4));
        assert_eq!(exact(s.coefficient(2, 2, pt(3, 3)).unwrap()), rational(1, 10));
        assert!(s.validate().is_valid());
        for p in [pt(3, 3), pt(2, 4), pt(5, 4)] {
            let total: Rational = s.coefficients_at::<Rational>(p).unwrap().into_iter().sum();
            assert_eq!(total, rational(1, 1));
        }
    }

    #[test]
    fn coefficient_outside_domain_is_error() {
        let s = build_example_4_1();
        assert!(matches!(s.coefficient(1, 1, pt(11, 0)), Err(Error::Domain(_))));
        assert!(matches!(s.coefficient(1, 1, pt(-1, 0)), Err(Error::Domain(_))));
    }

    #[test]
    fn perturbed_sum_is_reported_per_location() {
        let rules = PatternRule::branch(
            Predicate::AbscissaEven,
            Pattern::fracs(&[&[(4, 5), (1, 10)]]),
            Pattern::fracs(&[&[(1, 4), (3, 4)]]),
        );
        let s = M4Spec::from_rules(1, 1, 2, Domain::new(0, 1, 0, 1), rules).unwrap();
        let report = s.validate();
        assert!(!report.is_valid());
        let locs: Vec<_> = report.violations.iter().map(|v| v.location).collect();
        assert_eq!(locs, vec![pt(0, 0), pt(0, 1)]);
        assert_eq!(report.violations[0].sum, "9/10");
        assert!(s.ensure_valid().is_err());
    }

    #[test]
    fn negative_weight_is_reported() {
        let pat = Pattern::new(vec![vec![Weight::from_f64(1.1), Weight::from_f64(-0.1)]]);
        let s = M4Spec::from_rules(
            1,
            1,
            2,
            Domain::new(0, 0, 0, 0),
            vec![PatternRule::new(Predicate::Always, pat)],
        )
        .unwrap();
        let report = s.validate();
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert!(v.sum_ok);
        assert_eq!(v.negative_entries.len(), 1);
        assert_eq!((v.negative_entries[0].l, v.negative_entries[0].m), (1, 2));
    }

    #[test]
    fn float_sums_use_tolerance() {
        let pat = Pattern::new(vec![vec![
            Weight::from_f64(0.1),
            Weight::from_f64(0.2),
            Weight::from_f64(0.7),
        ]]);
        let s = M4Spec::from_rules(
            1,
            0,
            2,
            Domain::new(0, 0, 0, 0),
            vec![PatternRule::new(Predicate::Always, pat)],
        )
        .unwrap();
        assert!(s.validate().is_valid());
        assert!(!s.is_exact());
    }

    #[test]
    fn structure_errors() {
        let good = Pattern::fracs(&[&[(1, 2), (1, 2)]]);
        let no_always = vec![PatternRule::new(Predicate::BothOdd, good.clone())];
        assert!(M4Spec::from_rules(1, 1, 2, DEFAULT_PRESET_DOMAIN, no_always).is_err());
        let wrong_shape = vec![PatternRule::new(Predicate::Always, good.clone())];
        assert!(M4Spec::from_rules(1, 1, 3, DEFAULT_PRESET_DOMAIN, wrong_shape).is_err());
        let mut table = BTreeMap::new();
        table.insert(pt(0, 0), good);
        assert!(M4Spec::from_table(1, 1, 2, Domain::new(0, 1, 0, 0), table).is_err());
    }

    #[test]
    fn json_round_trip_is_idempotent() {
        for spec in [build_example_4_1(), build_example_4_2()] {
            let once = M4Spec::from_json(&spec.to_json()).unwrap();
            assert_eq!(once, spec);
            let twice = M4Spec::from_json(&once.to_json()).unwrap();
            assert_eq!(twice, once);
            assert_eq!(spec.fingerprint(), twice.fingerprint());
        }
        assert_ne!(build_example_4_1().fingerprint(), build_example_4_2().fingerprint());
    }

    #[test]
    fn json_accepts_decimals_and_fraction_strings() {
        let text = r#"{
            "L": 1, "m_min": 1, "m_max": 2,
            "domain": {"x_min": 0, "x_max": 3, "y_min": 0, "y_max": 3},
            "rules": [
                {"predicate": "abscissa_even", "patterns": [["4/5", 0.2]]},
                {"predicate": "always", "patterns": [["0.25", "3/4"]]}
            ]
        }"#;
        let s = M4Spec::from_json(text).unwrap();
        assert!(!s.is_exact());
        assert!(s.validate().is_valid());
        assert_eq!(s.coefficient(1, 1, pt(1, 0)).unwrap().exact(), Some(&rational(1, 4)));
    }

    #[test]
    fn json_table_form() {
        let text = r#"{
            "L": 1, "m_min": 1, "m_max": 2,
            "domain": {"x_min": 0, "x_max": 1, "y_min": 0, "y_max": 0},
            "sites": [
                {"x": 0, "y": 0, "patterns": [["1", "0"]]},
                {"x": 1, "y": 0, "patterns": [["0", "1"]]}
            ]
        }"#;
        let s = M4Spec::from_json(text).unwrap();
        assert_eq!(M4Spec::from_json(&s.to_json()).unwrap(), s);
        assert!(s.validate().is_valid());
    }

    #[test]
    fn json_rejects_missing_always_rule() {
        let text = r#"{
            "L": 1, "m_min": 1, "m_max": 1,
            "domain": {"x_min": 0, "x_max": 1, "y_min": 0, "y_max": 1},
            "rules": [{"predicate": "both_odd", "patterns": [["1"]]}]
        }"#;
        assert!(M4Spec::from_json(text).is_err());
    }

    #[test]
    fn predicates_handle_negative_coordinates() {
        assert!(Predicate::AbscissaEven.matches(pt(-2, 0)));
        assert!(Predicate::BothOdd.matches(pt(-1, -3)));
        assert!(!Predicate::BothOdd.matches(pt(-1, 2)));
    }
}
