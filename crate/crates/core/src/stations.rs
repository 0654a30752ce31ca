//! Station data: annual maxima in a `year,<station>,...` CSV, optional
//! `station,x,y` coordinates, and index estimation over named stations.
//!
//! Years are treated as i.i.d. replicates. No marginal transform is applied
//! on ingestion; the estimators only see ranks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimate::{estimate_indices, rank_transform};
use crate::lattice::{LatticePoint, Region};
use crate::simulate::FieldSample;

/// What to do with an empty or `NA` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    #[default]
    Error,
    DropYear,
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(Self::Error),
            "drop-year" => Ok(Self::DropYear),
            other => Err(Error::Argument(format!(
                "unknown missing-value policy `{other}` (expected error or drop-year)"
            ))),
        }
    }
}

impl fmt::Display for MissingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Error => "error",
            Self::DropYear => "drop-year",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub missing: MissingPolicy,
    pub metadata: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Station {
    pub name: String,
    /// Planar coordinates, display only.
    pub x: Option<f64>,
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissingCell {
    pub year: i64,
    pub station: String,
}

/// Validated `years x stations` maxima. Every retained cell is finite and
/// positive; cells found missing (and the years dropped for them) are kept
/// in `missing`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationDataset {
    pub stations: Vec<Station>,
    pub years: Vec<i64>,
    /// `maxima[year][station]`.
    pub maxima: Vec<Vec<f64>>,
    pub missing: Vec<MissingCell>,
}

fn parse_error(path: &Path, row: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        row: row as usize,
        column: column.to_string(),
        message: message.into(),
    }
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Read {
        path: path.display().to_string(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na")
}

/// Reads and validates a station CSV.
pub fn ingest_stations(path: &Path, options: &IngestOptions) -> Result<StationDataset> {
    let mut rdr = reader(path)?;
    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec?,
        None => return Err(parse_error(path, 1, "year", "file has no header row")),
    };
    let header_line = header.position().map_or(1, |p| p.line());
    if header.get(0) != Some("year") {
        return Err(parse_error(
            path,
            header_line,
            header.get(0).unwrap_or(""),
            "first header cell must be `year`",
        ));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if names.is_empty() {
        return Err(parse_error(path, header_line, "year", "header names no stations"));
    }
    let mut seen = BTreeSet::new();
    for name in &names {
        if name.is_empty() {
            return Err(parse_error(path, header_line, "", "empty station name"));
        }
        if !seen.insert(name.as_str()) {
            return Err(parse_error(path, header_line, name, "duplicate station name"));
        }
    }

    let mut years = Vec::new();
    let mut maxima = Vec::new();
    let mut missing = Vec::new();
    let mut year_set = BTreeSet::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != names.len() + 1 {
            return Err(parse_error(
                path,
                line,
                "year",
                format!("expected {} cells, found {}", names.len() + 1, rec.len()),
            ));
        }
        let year: i64 = rec[0]
            .parse()
            .map_err(|_| parse_error(path, line, "year", format!("`{}` is not an integer year", &rec[0])))?;
        if !year_set.insert(year) {
            return Err(parse_error(path, line, "year", format!("year {year} appears twice")));
        }
        let mut row = Vec::with_capacity(names.len());
        let mut row_missing = false;
        for (cell, name) in rec.iter().skip(1).zip(&names) {
            if is_missing(cell) {
                if options.missing == MissingPolicy::Error {
                    return Err(parse_error(
                        path,
                        line,
                        name,
                        "missing value (use the drop-year policy to skip such years)",
                    ));
                }
                missing.push(MissingCell {
                    year,
                    station: name.clone(),
                });
                row_missing = true;
                continue;
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_error(path, line, name, format!("`{cell}` is not a number")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(parse_error(
                    path,
                    line,
                    name,
                    format!("maxima must be finite and positive, got {cell}"),
                ));
            }
            row.push(v);
        }
        if !row_missing {
            years.push(year);
            maxima.push(row);
        }
    }
    if maxima.is_empty() {
        return Err(parse_error(path, header_line, "year", "no complete years"));
    }

    let mut stations: Vec<Station> = names
        .into_iter()
        .map(|name| Station { name, x: None, y: None })
        .collect();
    if let Some(meta) = &options.metadata {
        apply_metadata(meta, &mut stations)?;
    }
    Ok(StationDataset {
        stations,
        years,
        maxima,
        missing,
    })
}

fn apply_metadata(path: &Path, stations: &mut [Station]) -> Result<()> {
    let mut rdr = reader(path)?;
    let mut records = rdr.records();
    let header = match records.next() {
        Some(rec) => rec?,
        None => return Err(parse_error(path, 1, "station", "file has no header row")),
    };
    if header.iter().collect::<Vec<_>>() != ["station", "x", "y"] {
        return Err(parse_error(
            path,
            1,
            header.get(0).unwrap_or(""),
            "header must be `station,x,y`",
        ));
    }
    let mut seen = BTreeSet::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(parse_error(
                path,
                line,
                "station",
                format!("expected 3 cells, found {}", rec.len()),
            ));
        }
        let name = &rec[0];
        if !seen.insert(name.to_string()) {
            return Err(parse_error(
                path,
                line,
                "station",
                format!("duplicate station `{name}`"),
            ));
        }
        let coord = |k: usize, col: &str| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_error(path, line, col, format!("`{}` is not a coordinate", &rec[k])))
        };
        let (x, y) = (coord(1, "x")?, coord(2, "y")?);
        let station = stations
            .iter_mut()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Lookup(name.to_string()))?;
        station.x = Some(x);
        station.y = Some(y);
    }
    Ok(())
}

impl StationDataset {
    /// Wraps a simulated sample, one station per location named `x:y` and
    /// years numbered from 1.
    pub fn from_sample(sample: &FieldSample) -> Self {
        Self {
            stations: sample
                .locations()
                .iter()
                .map(|p| Station {
                    name: format!("{}:{}", p.x, p.y),
                    x: Some(p.x as f64),
                    y: Some(p.y as f64),
                })
                .collect(),
            years: (1..=sample.n() as i64).collect(),
            maxima: (0..sample.n()).map(|r| sample.row(r).to_vec()).collect(),
            missing: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.years.len()
    }

    pub fn station_names(&self) -> impl Iterator<Item = &str> {
        self.stations.iter().map(|s| s.name.as_str())
    }

    pub fn column_of(&self, name: &str) -> Result<usize> {
        self.stations
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::Lookup(name.to_string()))
    }

    /// The maxima as a sample on synthetic locations `(k, 0)`, `k` the
    /// station column.
    pub fn to_sample(&self) -> Result<FieldSample> {
        let locations = (0..self.stations.len() as i64)
            .map(|k| LatticePoint::new(k, 0))
            .collect();
        let values = self.maxima.iter().flatten().copied().collect();
        FieldSample::from_rows(locations, values, 0, String::new())
    }

    /// SHA-256 of the station names, years and maxima.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for name in self.station_names() {
            h.update(name.as_bytes());
            h.update([0]);
        }
        for (year, row) in self.years.iter().zip(&self.maxima) {
            h.update(year.to_le_bytes());
            for v in row {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    /// Writes the station CSV schema, preceded by a `#` provenance line.
    pub fn write_csv(&self, path: &Path, provenance: &str) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# {provenance}")?;
        {
            let mut w = csv::Writer::from_writer(&mut out);
            let mut header = vec!["year".to_string()];
            header.extend(self.station_names().map(str::to_string));
            w.write_record(&header)?;
            for (year, row) in self.years.iter().zip(&self.maxima) {
                let mut rec = vec![year.to_string()];
                rec.extend(row.iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationPair {
    pub station: String,
    pub epsilon: f64,
}

/// Estimated indices from one conditioning station to a region of stations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationIndices {
    pub conditioning: String,
    pub region: Vec<String>,
    pub ci: f64,
    pub si: f64,
    pub pairwise: Vec<StationPair>,
    pub epsilon_joint: f64,
    pub n: usize,
}

pub fn station_indices(dataset: &StationDataset, conditioning: &str, region: &[String]) -> Result<StationIndices> {
    if region.is_empty() {
        return Err(Error::Argument("station region must name at least one station".into()));
    }
    let mut names = BTreeMap::new();
    for name in region {
        let col = dataset.column_of(name)?;
        if names.insert(col, name.clone()).is_some() {
            return Err(Error::Argument(format!("station `{name}` listed twice in the region")));
        }
    }
    let site = LatticePoint::new(dataset.column_of(conditioning)? as i64, 0);
    let points = Region::new(names.keys().map(|&k| LatticePoint::new(k as i64, 0)));
    let est = estimate_indices(&rank_transform(&dataset.to_sample()?), &points, site)?;
    Ok(StationIndices {
        conditioning: conditioning.to_string(),
        region: region.to_vec(),
        ci: est.ci,
        si: est.si,
        pairwise: est
            .pairwise
            .iter()
            .map(|(p, e)| StationPair {
                station: names[&(p.x as usize)].clone(),
                epsilon: e.value,
            })
            .collect(),
        epsilon_joint: est.joint.value,
        n: est.n,
    })
}
