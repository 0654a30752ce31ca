//! Regenerates the files under `data/`: the two preset specs and a synthetic
//! six-station, 32-year annual-maxima table with coordinates.
//!
//! `cargo run --example generate_data [-- <dir>]`

use std::collections::BTreeMap;
use std::path::PathBuf;

use m4_indices::lattice::LatticePoint;
use m4_indices::model::{build_example_4_1, build_example_4_2, Domain, M4Spec, Pattern};
use m4_indices::simulate::simulate_m4;
use m4_indices::stations::StationDataset;
use m4_indices::Region;

const SEED: u64 = 1932;
const YEARS: usize = 32;
const FIRST_YEAR: i64 = 1960;

/// Name, planar coordinates, and pattern weights as fractions.
type StationDef = (&'static str, f64, f64, &'static [(i64, i64)]);

const STATIONS: [StationDef; 6] = [
    ("Lagoa Comprida", 209.4, 389.2, &[(1, 2), (1, 2), (0, 1), (0, 1)]),
    ("Gouveia", 203.1, 399.8, &[(2, 5), (2, 5), (1, 5), (0, 1)]),
    ("Oliveira do Hospital", 188.6, 382.0, &[(1, 2), (1, 4), (1, 4), (0, 1)]),
    ("Seia", 197.5, 387.3, &[(1, 3), (1, 3), (1, 3), (0, 1)]),
    ("Penamacor", 273.9, 369.5, &[(0, 1), (0, 1), (1, 4), (3, 4)]),
    (
        "Barragem Cabeço Monteiro",
        262.2,
        355.7,
        &[(0, 1), (0, 1), (1, 2), (1, 2)],
    ),
];

/// One pattern over four lags, one site per station at `(k, 0)`.
fn station_spec() -> M4Spec {
    let table: BTreeMap<_, _> = STATIONS
        .iter()
        .enumerate()
        .map(|(k, s)| (LatticePoint::new(k as i64, 0), Pattern::fracs(&[s.3])))
        .collect();
    M4Spec::from_table(1, 1, 4, Domain::new(0, 5, 0, 0), table).expect("station spec is well formed")
}

fn main() -> m4_indices::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("crates/core/data"));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("example4_1.json"), build_example_4_1().to_json() + "\n")?;
    std::fs::write(dir.join("example4_2.json"), build_example_4_2().to_json() + "\n")?;

    let spec = station_spec();
    let sites = Region::new(spec.domain().points());
    let sample = simulate_m4(&spec, &sites, YEARS, SEED)?;
    // Unit Fréchet draws mapped to millimetre-like maxima, kept to 0.1 mm.
    let mm = sample.map_values(|_, x| ((30.0 + 25.0 * x.powf(0.35)) * 10.0).round() / 10.0)?;
    let mut ds = StationDataset::from_sample(&mm);
    for (st, (name, x, y, _)) in ds.stations.iter_mut().zip(STATIONS) {
        st.name = name.to_string();
        st.x = Some(x);
        st.y = Some(y);
    }
    ds.years = (FIRST_YEAR..FIRST_YEAR + YEARS as i64).collect();
    ds.write_csv(
        &dir.join("stations.csv"),
        &format!(
            "synthetic annual maxima (mm), m4idx {} seed={SEED} spec_fingerprint={}",
            m4_indices::VERSION,
            spec.fingerprint()
        ),
    )?;

    let mut meta = csv::Writer::from_path(dir.join("stations_meta.csv"))?;
    meta.write_record(["station", "x", "y"])?;
    for (name, x, y, _) in STATIONS {
        meta.write_record([name.to_string(), x.to_string(), y.to_string()])?;
    }
    meta.flush()?;
    Ok(())
}
