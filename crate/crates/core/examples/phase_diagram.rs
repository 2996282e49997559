//! Scan the (alpha, tau) plane for V(x) = x^2/2 and compare the detected phase boundaries
//! with the curves tau = sqrt(alpha + 2) and tau = sqrt(-1/alpha).
//!
//!     cargo run --release --example phase_diagram [steps]

use std::time::Instant;
use veq::classify::{compare_phase_boundaries, phase_scan};
use veq::equilibrium::EquilibriumConfig;
use veq::ModelParams;

fn main() -> veq::Result<()> {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(9);
    let template = ModelParams::gaussian(0.0, 1.0)?;
    let t0 = Instant::now();
    let map = phase_scan((-3.0, 3.0), (0.2, 3.0), steps, &template, &EquilibriumConfig::default(), 1)?;
    println!("scan of {} points in {:.1} s", steps * steps, t0.elapsed().as_secs_f64());
    for j in (0..map.tau_grid.len()).rev() {
        let row: Vec<String> = (0..map.alpha_grid.len()).map(|i| format!("{:>8}", map.cases[i][j].case.to_string())).collect();
        println!("tau {:5.2} {}", map.tau_grid[j], row.join(""));
    }
    let alphas: Vec<String> = map.alpha_grid.iter().map(|a| format!("{a:>8.2}")).collect();
    println!("alpha     {}", alphas.join(""));
    let report = compare_phase_boundaries(&map)?;
    for d in &report.deviations {
        println!(
            "  {} -> {} at ({:.3}, {:.3}): {:.3} from {}",
            d.point.from, d.point.to, d.point.alpha, d.point.tau, d.deviation, d.nearest
        );
    }
    println!("max deviation {:.3}, mean {:.3}", report.max, report.mean);
    Ok(())
}
