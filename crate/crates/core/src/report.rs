//! JSON and CSV reports. Every report carries a [`Provenance`] block (JSON)
//! or a leading `#` line (CSV) with the tool version, seed and fingerprint.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{EstimatedIndices, Study, StudyResult};
use crate::exact::{
    contagion_index_region, extremal_coefficient_matrix, fragility_index, summarize, DependenceSummary,
};
use crate::lattice::{LatticePoint, Region};
use crate::model::M4Spec;
use crate::scalar::{Rational, Scalar};
use crate::simulate::ThresholdOracle;
use crate::stations::{StationDataset, StationIndices};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    /// `None` for deterministic commands.
    pub seed: Option<u64>,
    pub spec_fingerprint: Option<String>,
    /// Station data fingerprint, for reports computed from a data file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_fingerprint: Option<String>,
}

impl Provenance {
    pub fn new(seed: Option<u64>, spec_fingerprint: Option<String>) -> Self {
        Self {
            tool_version: crate::VERSION.to_string(),
            seed,
            spec_fingerprint,
            data_fingerprint: None,
        }
    }

    pub fn for_data(dataset: &StationDataset) -> Self {
        Self {
            data_fingerprint: Some(dataset.fingerprint()),
            ..Self::new(None, None)
        }
    }

    /// The single-line form used in CSV comment headers.
    pub fn comment_line(&self) -> String {
        let mut s = format!("m4idx {}", self.tool_version);
        match self.seed {
            Some(seed) => s += &format!(" seed={seed}"),
            None => s += " seed=none",
        }
        s += &format!(
            " spec_fingerprint={}",
            self.spec_fingerprint.as_deref().unwrap_or("none")
        );
        if let Some(d) = &self.data_fingerprint {
            s += &format!(" data_fingerprint={d}");
        }
        s
    }
}

/// A float, with its exact rational form when one is known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Number {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl From<f64> for Number {
    fn from(value: f64) -> Self {
        Self { value, exact: None }
    }
}

impl From<&Rational> for Number {
    fn from(r: &Rational) -> Self {
        Self {
            value: r.to_f64(),
            exact: Some(r.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEntry {
    pub site: LatticePoint,
    pub epsilon: Number,
    pub tail_dependence: Number,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactReport {
    pub provenance: Provenance,
    pub mode: &'static str,
    pub site: LatticePoint,
    pub region: Region,
    pub pairwise: Vec<PairEntry>,
    pub epsilon_joint: Number,
    pub ci: Number,
    pub si: Number,
    pub si_lower: Number,
    pub si_upper: Number,
    /// `ε_{{i,j}}` over the 3x3 window centred on the site, rows north to
    /// south; present when the whole window lies in the domain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_matrix: Option<[[Number; 3]; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceEntry>,
}

/// Contagion from a source region into the report's region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceEntry {
    pub source: Region,
    pub ci: Number,
    pub fragility: Number,
}

fn exact_report_from<S: Scalar>(
    spec: &M4Spec,
    summary: DependenceSummary<S>,
    source: Option<&Region>,
    mode: &'static str,
    num: impl Fn(&S) -> Number,
) -> Result<ExactReport> {
    let source = match source {
        Some(b) => Some(SourceEntry {
            source: b.clone(),
            ci: num(&contagion_index_region::<S>(spec, &summary.region, b)?),
            fragility: num(&fragility_index::<S>(spec, b)?),
        }),
        None => None,
    };
    let matrix = extremal_coefficient_matrix::<S>(spec, summary.site)
        .ok()
        .map(|m| m.map(|row| row.map(|e| num(&e))));
    let pairwise = summary
        .pairwise_epsilons
        .iter()
        .map(|(p, e)| PairEntry {
            site: *p,
            epsilon: num(e),
            tail_dependence: num(&(S::from_count(2) - e.clone())),
        })
        .collect();
    Ok(ExactReport {
        provenance: Provenance::new(None, Some(spec.fingerprint())),
        mode,
        site: summary.site,
        region: summary.region.clone(),
        pairwise,
        epsilon_joint: num(&summary.epsilon_joint),
        ci: num(&summary.ci),
        si: num(&summary.si),
        si_lower: num(&summary.si_lower),
        si_upper: num(&summary.si_upper),
        epsilon_matrix: matrix,
        source,
    })
}

/// Closed-form report, in rational arithmetic when the spec allows it.
pub fn exact_report(
    spec: &M4Spec,
    region: &Region,
    site: LatticePoint,
    source: Option<&Region>,
    force_float: bool,
) -> Result<ExactReport> {
    if spec.is_exact() && !force_float {
        let s = summarize::<Rational>(spec, region, site)?;
        exact_report_from(spec, s, source, "rational", |r| r.into())
    } else {
        let s = summarize::<f64>(spec, region, site)?;
        exact_report_from(spec, s, source, "float", |v| (*v).into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub provenance: Provenance,
    pub site: LatticePoint,
    pub region: Region,
    pub rows: Vec<StudyResult>,
}

impl StudyReport {
    pub fn new(spec: &M4Spec, region: &Region, site: LatticePoint, study: Study) -> Self {
        Self {
            provenance: Provenance::new(Some(study.contagion.seed), Some(spec.fingerprint())),
            site,
            region: region.clone(),
            rows: vec![study.contagion, study.stability],
        }
    }

    /// `index,true_value,mean_estimate,mse,replications,sample_size,seed`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", self.provenance.comment_line())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "index",
            "true_value",
            "mean_estimate",
            "mse",
            "replications",
            "sample_size",
            "seed",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.index.to_string(),
                r.true_value.to_string(),
                r.mean_estimate.to_string(),
                r.mse.to_string(),
                r.replications.to_string(),
                r.sample_size.to_string(),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub provenance: Provenance,
    pub site: LatticePoint,
    pub region: Region,
    pub estimate: EstimatedIndices,
    pub oracle: OracleEstimates,
}

/// Finite-threshold conditional means; `None` where the conditioning event
/// never occurs in the sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleEstimates {
    pub threshold: f64,
    pub contagion: Option<f64>,
    /// Conditioned on at least one crossing.
    pub stability: Option<f64>,
    /// Conditioned on an exceedance anywhere in the site or region.
    pub stability_given_exceedance: Option<f64>,
}

impl OracleEstimates {
    pub fn compute(oracle: &ThresholdOracle, region: &Region, site: LatticePoint, u: f64) -> Result<Self> {
        let defined = |r: Result<f64>| match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::UndefinedConditional(_)) => Ok(None),
            Err(e) => Err(e),
        };
        Ok(Self {
            threshold: u,
            contagion: defined(oracle.contagion(region, site, u))?,
            stability: defined(oracle.stability(region, site, u))?,
            stability_given_exceedance: defined(oracle.stability_given_exceedance(region, site, u))?,
        })
    }
}

/// Estimated indices from one conditioning station to several regions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationReport {
    pub provenance: Provenance,
    pub conditioning: String,
    pub n: usize,
    pub rows: Vec<StationIndices>,
}

impl StationReport {
    pub fn new(dataset: &StationDataset, conditioning: &str, rows: Vec<StationIndices>) -> Self {
        Self {
            provenance: Provenance::for_data(dataset),
            conditioning: conditioning.to_string(),
            n: dataset.n(),
            rows,
        }
    }

    /// `region,ci,si,epsilon_joint,n`, stations in a region joined by `;`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# {} conditioning={}",
            self.provenance.comment_line(),
            self.conditioning
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["region", "ci", "si", "epsilon_joint", "n"])?;
        for r in &self.rows {
            w.write_record([
                r.region.join(";"),
                r.ci.to_string(),
                r.si.to_string(),
                r.epsilon_joint.to_string(),
                r.n.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}
