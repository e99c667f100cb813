//! The general bound engine: term decomposition for the built-in models.

use mle_bounds::bounds_general::{assemble, McSettings};
use mle_bounds::models::{NormalModel, StraightLineModel};
use mle_bounds::testfun;

fn main() -> mle_bounds::Result<()> {
    let mc = McSettings::new(4_000, 7);
    let h = testfun::by_id(2, "sine_sum").unwrap();

    let normal = NormalModel;
    let report = assemble(&normal, &[0.0, 1.0], 500, None, &h, &mc)?;
    println!("normal(0,1), n = 500, h = sine_sum:");
    println!("  k1   = {:.6}", report.k1_contrib.value);
    println!("  k2   = {:.6}", report.k2_contrib.value);
    println!("  k3   = {:.6}", report.k3_contrib.value);
    println!("  tail = {:.6}", report.tail_contrib.value);
    println!("  total = {:.6}", report.total);

    let line = StraightLineModel::new(vec![-3.0, -1.0, 1.0, 3.0], 1.0)?;
    let report = assemble(&line, &[1.0, -0.5], 200, None, &h, &mc)?;
    println!("straight line (x tiled), n = 200, h = sine_sum:");
    println!("  k2   = {:.6}", report.k2_contrib.value);
    println!("  k3   = {:.6}", report.k3_contrib.value);
    println!("  total = {:.6} (linearization and tail vanish)", report.total);
    println!("  as JSON: {}", serde_json::to_string(&report).unwrap());
    Ok(())
}
