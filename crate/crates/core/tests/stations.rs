//! Station ingestion: bundled data, policies, and agreement with direct
//! in-memory estimation.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use common::{pt, region};
use m4_indices::estimate::{estimate_indices, rank_transform};
use m4_indices::lattice::LatticePoint;
use m4_indices::model::{build_example_4_1, Domain, M4Spec, Pattern};
use m4_indices::report::StationReport;
use m4_indices::simulate::{simulate_m4, FieldSample};
use m4_indices::stations::{ingest_stations, station_indices, IngestOptions, MissingPolicy, StationDataset};
use m4_indices::{neighbors, Error, Region};
use proptest::prelude::*;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

const NEAR: [&str; 3] = ["Gouveia", "Oliveira do Hospital", "Seia"];
const FAR: [&str; 2] = ["Penamacor", "Barragem Cabeço Monteiro"];

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn bundled() -> StationDataset {
    ingest_stations(
        &data("stations.csv"),
        &IngestOptions {
            missing: MissingPolicy::Error,
            metadata: Some(data("stations_meta.csv")),
        },
    )
    .unwrap()
}

#[test]
fn bundled_dataset_dimensions() {
    let ds = bundled();
    assert_eq!(ds.n(), 32);
    assert_eq!(ds.stations.len(), 6);
    assert!(ds.stations.iter().all(|s| s.x.is_some() && s.y.is_some()));
    assert_eq!(ds.years.first(), Some(&1960));
}

#[test]
fn table_shaped_report() {
    let ds = bundled();
    let rows = [&NEAR[..], &FAR[..]]
        .iter()
        .map(|r| station_indices(&ds, "Lagoa Comprida", &names(r)).unwrap())
        .collect::<Vec<_>>();
    let report = StationReport::new(&ds, "Lagoa Comprida", rows);
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].contains("data_fingerprint="));
    assert_eq!(lines[1], "region,ci,si,epsilon_joint,n");
    assert!(lines[2].starts_with("Gouveia;Oliveira do Hospital;Seia,"));
    assert!(lines[3].starts_with("Penamacor;Barragem Cabeço Monteiro,"));
    assert_eq!(lines.len(), 4);
    for r in &report.rows {
        assert!(r.ci.is_finite() && r.si.is_finite());
        assert!(r.ci <= r.region.len() as f64 + 1e-12 && r.ci >= -(r.region.len() as f64));
        assert_eq!(r.n, 32);
    }
    // The synthetic near region shares most of the conditioning station's
    // weight; the far region shares none of it.
    assert!(report.rows[0].ci > report.rows[1].ci);
}

#[test]
fn one_empty_cell_and_drop_year_leaves_31_years() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("stations.csv")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    // Line index 2 is the first data row, after the comment and header.
    let mut cells: Vec<&str> = lines[5].split(',').collect();
    cells[3] = "";
    lines[5] = cells.join(",");
    let p = dir.path().join("gap.csv");
    std::fs::write(&p, lines.join("\n") + "\n").unwrap();
    let err = ingest_stations(&p, &IngestOptions::default()).unwrap_err();
    assert!(
        matches!(&err, Error::Parse { row: 6, column, .. } if column == "Oliveira do Hospital"),
        "{err}"
    );
    let ds = ingest_stations(
        &p,
        &IngestOptions {
            missing: MissingPolicy::DropYear,
            metadata: None,
        },
    )
    .unwrap();
    assert_eq!(ds.n(), 31);
    assert_eq!(ds.missing[0].station, "Oliveira do Hospital");
}

#[test]
fn negative_value_names_the_cell() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("neg.csv");
    std::fs::write(&p, "year,A,B\n1990,12.5,3\n1991,4,-0.5\n").unwrap();
    let err = ingest_stations(&p, &IngestOptions::default()).unwrap_err();
    let msg = err.to_string();
    assert!(
        matches!(&err, Error::Parse { row: 3, column, .. } if column == "B"),
        "{msg}"
    );
    assert!(msg.contains("row 3") && msg.contains("column B"), "{msg}");
}

/// Stations `x:y` after [`StationDataset::from_sample`].
fn label(p: LatticePoint) -> String {
    format!("{}:{}", p.x, p.y)
}

#[test]
fn example_4_1_export_and_reingest_matches_direct_pipeline() {
    let spec = build_example_4_1();
    let i = pt(3, 3);
    let a = neighbors(i);
    let sample = simulate_m4(&spec, &a.with(i), 1000, 4101).unwrap();
    let direct = estimate_indices(&rank_transform(&sample), &a, i).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ex41.csv");
    StationDataset::from_sample(&sample)
        .write_csv(&p, "m4idx seed=4101")
        .unwrap();
    let ds = ingest_stations(&p, &IngestOptions::default()).unwrap();
    let region: Vec<String> = a.iter().map(|&q| label(q)).collect();
    let via_csv = station_indices(&ds, &label(i), &region).unwrap();
    assert_eq!(via_csv.ci, direct.ci);
    assert_eq!(via_csv.si, direct.si);
    assert_eq!(via_csv.epsilon_joint, direct.joint.value);
    assert_eq!(ds.maxima, StationDataset::from_sample(&sample).maxima);
}

#[test]
fn bundled_file_matches_an_independent_parse() {
    // Parse the CSV by hand, without the ingester, and estimate directly.
    let text = std::fs::read_to_string(data("stations.csv")).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').skip(1).map(|c| c.parse().unwrap()).collect())
        .collect();
    let locations: Vec<LatticePoint> = (0..header.len() as i64 - 1).map(|k| pt(k, 0)).collect();
    let sample = FieldSample::from_rows(locations, rows.concat(), 0, String::new()).unwrap();
    let direct = estimate_indices(&rank_transform(&sample), &region("1,0;2,0;3,0"), pt(0, 0)).unwrap();
    let via = station_indices(&bundled(), "Lagoa Comprida", &names(&NEAR)).unwrap();
    assert_eq!(header[1], "Lagoa Comprida");
    assert_eq!((via.ci, via.si), (direct.ci, direct.si));
}

/// Each site loads on its own lag, so all sites are independent.
fn independent_spec(sites: usize) -> M4Spec {
    let table: BTreeMap<_, _> = (0..sites)
        .map(|k| {
            let row: Vec<(i64, i64)> = (0..sites).map(|m| (i64::from(m == k), 1)).collect();
            (pt(k as i64, 0), Pattern::fracs(&[&row]))
        })
        .collect();
    M4Spec::from_table(1, 0, sites as i64 - 1, Domain::new(0, sites as i64 - 1, 0, 0), table).unwrap()
}

#[test]
fn independent_columns_give_contagion_near_zero() {
    let spec = independent_spec(4);
    let sample = simulate_m4(&spec, &Region::new(spec.domain().points()), 1000, 5150).unwrap();
    let ds = StationDataset::from_sample(&sample);
    let r = station_indices(&ds, "0:0", &names(&["1:0", "2:0", "3:0"])).unwrap();
    assert!(r.ci.abs() < 0.15, "ĈI = {}", r.ci);
}

fn transform(kind: u8, x: f64) -> f64 {
    match kind {
        0 => x.ln() + 50.0,
        1 => x.powi(3),
        2 => (-1.0 / x).exp(),
        _ => 10.0 * x.sqrt() + 0.25,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rank_invariance(seed in 0u64..1000, kinds in proptest::collection::vec(0u8..4, 9)) {
        let spec = build_example_4_1();
        let i = pt(3, 3);
        let a = neighbors(i);
        let sample = simulate_m4(&spec, &a.with(i), 300, seed).unwrap();
        let warped = sample.map_values(|col, x| transform(kinds[col], x)).unwrap();
        let before = estimate_indices(&rank_transform(&sample), &a, i).unwrap();
        let after = estimate_indices(&rank_transform(&warped), &a, i).unwrap();
        prop_assert_eq!(before.ci, after.ci);
        prop_assert_eq!(before.si, after.si);
    }
}
