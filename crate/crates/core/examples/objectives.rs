use taz::multilevel::multilevel_method2;
use taz::regionalize::{DetectParams, PrepareOptions, Prepared};
use taz::synth::{generate_city, CityConfig};

fn main() -> taz::Result<()> {
    let study = generate_city(&CityConfig::with_grid(3, 3, 5))?;
    let p = Prepared::new(&study, PrepareOptions::default())?;
    let detected = p
        .regionalize(
            &DetectParams {
                resolution: 4.0,
                ..Default::default()
            },
            0,
        )?
        .scheme;
    let blocks = multilevel_method2(&study)?.pop().expect("block level");

    println!(
        "{:<10} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "scheme", "regions", "f_sem", "f_pop", "f_traf", "f_od", "f_prox"
    );
    for (name, scheme) in [("detected", &detected), ("blocks", &blocks)] {
        let v = p.evaluate(scheme)?;
        println!(
            "{name:<10} {:>7} {:>7.3} {:>7.3} {:>7.3} {:>7.3} {:>7.3}",
            v.n_regions, v.f_sem, v.f_pop, v.f_traffic, v.f_od, v.f_prox
        );
        for d in &v.diagnostics {
            println!("  note: {d}");
        }
    }
    Ok(())
}
