//! Generates a city and writes `units.geojson` and `od.csv`.
//!
//! Usage: `cargo run --example synth_city -- [out_dir] [seed]`

use std::path::PathBuf;

use taz::io::{od_csv, units_geojson, write_file};
use taz::synth::{generate_city, CityConfig};

fn main() -> taz::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "synth_city".into()));
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let mut config = CityConfig::with_grid(4, 4, seed);
    config.od_exponent = 1.5;
    let study = generate_city(&config)?;
    write_file(&out.join("units.geojson"), &units_geojson(&study))?;
    write_file(&out.join("od.csv"), &od_csv(&study.od))?;

    let pop = study.field("population")?;
    let densest = (0..study.units.len())
        .max_by(|&a, &b| (pop.values[a] / study.units[a].area).total_cmp(&(pop.values[b] / study.units[b].area)))
        .expect("units");
    println!(
        "{} units, {} blocks, {} OD pairs",
        study.units.len(),
        study.blocks.len(),
        study.od.len()
    );
    println!(
        "population {:.0}, densest unit {}",
        pop.total(),
        study.units[densest].id
    );
    let mut counts = vec![0; study.semantics.n_categories()];
    for &c in &study.semantics.assignment {
        counts[c] += 1;
    }
    for (name, n) in study.semantics.categories.iter().zip(counts) {
        println!("  {name}: {n}");
    }
    println!("wrote {}", out.display());
    Ok(())
}
