//! CSV export and import of simulated samples.
//!
//! Two layouts are supported: long (`replicate,x,y,value`, one line per
//! replicate and site) and wide (`replicate,<x:y>,<x:y>,...`, one line per
//! replicate). Files open with a `#` comment line carrying the tool version,
//! seed, replicate count and spec fingerprint; the same data is written to a
//! JSON sidecar `<file>.meta.json`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::simulate::FieldSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SampleLayout {
    #[default]
    Long,
    Wide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub tool_version: String,
    pub seed: u64,
    pub n: usize,
    pub spec_fingerprint: String,
    pub layout: SampleLayout,
    pub locations: Vec<LatticePoint>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn location_label(p: LatticePoint) -> String {
    format!("{}:{}", p.x, p.y)
}

/// Writes the sample and its sidecar; returns the metadata written.
pub fn write_sample_csv(sample: &FieldSample, path: &Path, layout: SampleLayout) -> Result<SampleMetadata> {
    let meta = SampleMetadata {
        tool_version: crate::VERSION.to_string(),
        seed: sample.seed,
        n: sample.n(),
        spec_fingerprint: sample.spec_fingerprint.clone(),
        layout,
        locations: sample.locations().to_vec(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "# m4idx {} seed={} n={} spec_fingerprint={}",
        meta.tool_version, meta.seed, meta.n, meta.spec_fingerprint
    )?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        match layout {
            SampleLayout::Long => {
                w.write_record(["replicate", "x", "y", "value"])?;
                for r in 0..sample.n() {
                    for (p, v) in sample.locations().iter().zip(sample.row(r)) {
                        w.write_record([r.to_string(), p.x.to_string(), p.y.to_string(), v.to_string()])?;
                    }
                }
            }
            SampleLayout::Wide => {
                let mut header = vec!["replicate".to_string()];
                header.extend(sample.locations().iter().map(|&p| location_label(p)));
                w.write_record(&header)?;
                for r in 0..sample.n() {
                    let mut rec = vec![r.to_string()];
                    rec.extend(sample.row(r).iter().map(f64::to_string));
                    w.write_record(&rec)?;
                }
            }
        }
        w.flush()?;
    }
    out.flush()?;
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(meta)
}

fn parse_comment(line: &str) -> (u64, String) {
    let mut seed = 0;
    let mut fingerprint = String::new();
    for tok in line.trim_start_matches('#').split_whitespace() {
        if let Some(v) = tok.strip_prefix("seed=") {
            seed = v.parse().unwrap_or(0);
        } else if let Some(v) = tok.strip_prefix("spec_fingerprint=") {
            fingerprint = v.to_string();
        }
    }
    (seed, fingerprint)
}

/// Reads either layout back into a sample.
pub fn read_sample_csv(path: &Path) -> Result<FieldSample> {
    let text = crate::error::read_input(path)?;
    let (seed, fingerprint) = text
        .lines()
        .next()
        .filter(|l| l.starts_with('#'))
        .map(parse_comment)
        .unwrap_or((0, String::new()));
    let name = path.display().to_string();
    let parse_err = |row: usize, column: &str, message: String| Error::Parse {
        path: name.clone(),
        row,
        column: column.to_string(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let number = |row: usize, column: &str, field: &str| -> Result<f64> {
        field
            .trim()
            .parse::<f64>()
            .map_err(|_| parse_err(row, column, format!("not a number: `{field}`")))
    };

    if header == ["replicate", "x", "y", "value"] {
        let mut locations: Vec<LatticePoint> = Vec::new();
        let mut rows: BTreeMap<u64, Vec<(LatticePoint, f64)>> = BTreeMap::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = k + 1;
            let rep = number(line, "replicate", &rec[0])? as u64;
            let p = LatticePoint::new(number(line, "x", &rec[1])? as i64, number(line, "y", &rec[2])? as i64);
            let v = number(line, "value", &rec[3])?;
            if !locations.contains(&p) {
                locations.push(p);
            }
            rows.entry(rep).or_default().push((p, v));
        }
        let mut values = Vec::with_capacity(rows.len() * locations.len());
        for (rep, entries) in rows {
            if entries.len() != locations.len() {
                return Err(parse_err(
                    0,
                    "replicate",
                    format!("replicate {rep} has {} of {} sites", entries.len(), locations.len()),
                ));
            }
            for p in &locations {
                let v = entries
                    .iter()
                    .find(|(q, _)| q == p)
                    .ok_or_else(|| parse_err(0, "replicate", format!("replicate {rep} lacks site {p}")))?;
                values.push(v.1);
            }
        }
        return FieldSample::from_rows(locations, values, seed, fingerprint);
    }

    if header.first().map(String::as_str) != Some("replicate") || header.len() < 2 {
        return Err(parse_err(0, "header", format!("unrecognised sample header {header:?}")));
    }
    let locations = header[1..]
        .iter()
        .map(|h| {
            h.parse::<LatticePoint>()
                .map_err(|_| parse_err(0, h, "bad location label".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (col, field) in rec.iter().enumerate().skip(1) {
            values.push(number(k + 1, &header[col], field)?);
        }
    }
    FieldSample::from_rows(locations, values, seed, fingerprint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_example_4_1;
    use crate::simulate::simulate_m4;

    #[test]
    fn both_layouts_round_trip() {
        let spec = build_example_4_1();
        let region: crate::lattice::Region = "3,3;4,3;-0,2".parse().unwrap();
        let sample = simulate_m4(&spec, &region, 25, 99).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for layout in [SampleLayout::Long, SampleLayout::Wide] {
            let path = dir.path().join(format!("{layout:?}.csv"));
            let meta = write_sample_csv(&sample, &path, layout).unwrap();
            assert_eq!(meta.seed, 99);
            let back = read_sample_csv(&path).unwrap();
            assert_eq!(back, sample);
            let side: SampleMetadata =
                serde_json::from_str(&std::fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
            assert_eq!(side, meta);
        }
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "replicate,0:0\n0,abc\n").unwrap();
        assert!(matches!(read_sample_csv(&path), Err(Error::Parse { row: 1, .. })));
        std::fs::write(&path, "foo,bar\n1,2\n").unwrap();
        assert!(read_sample_csv(&path).is_err());
    }
}
