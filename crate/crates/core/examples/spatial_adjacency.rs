//! Road-separated squares: which pairs count as adjacent, and what the size
//! filter does with units that are too small or too large.

use taz::geometry::Shape;
use taz::spatial::{
    apply_size_constraint, compute_adjacency, AttributeField, BasicSpatialUnit, SizeBounds, UndersizedPolicy,
};

fn main() -> taz::Result<()> {
    // 3x3 squares of 100 m separated by 20 m roads; the center one is small.
    let mut units = Vec::new();
    for r in 0..3 {
        for c in 0..3 {
            let (x, y) = (c as f64 * 120.0, r as f64 * 120.0);
            let side = if (r, c) == (1, 1) { 40.0 } else { 100.0 };
            units.push(BasicSpatialUnit::new(
                format!("u{r}{c}"),
                Shape::rect(x, y, x + side, y + side),
                "b0",
                0,
            ));
        }
    }

    for threshold in [10.0, 25.0, 90.0] {
        let adj = compute_adjacency(&units, threshold)?;
        println!("gap threshold {threshold:>4} m: {} adjacent pairs", adj.len());
    }

    let adj = compute_adjacency(&units, 90.0)?;
    let population = AttributeField::new("population", (1..=9).map(|i| i as f64 * 10.0).collect())?;
    let bounds = SizeBounds::new(5_000.0, 20_000.0)?;
    let filtered = apply_size_constraint(
        &units,
        std::slice::from_ref(&population),
        &adj,
        bounds,
        UndersizedPolicy::Absorb,
    )?;
    for (unit, host) in &filtered.absorbed {
        let h = &filtered.eligible[*host];
        println!(
            "{} absorbed into {} (combined area {:.0} m2, population {})",
            units[*unit].id, units[h.host].id, h.area, h.values[0]
        );
    }
    println!("{} eligible units remain", filtered.eligible.len());
    Ok(())
}
