//! Classify one parameter point and list the singularity flags.
//!
//!     cargo run --release --example classify_point -- alpha tau

use veq::classify::classify_point;
use veq::equilibrium::{extract_supports, EquilibriumConfig};
use veq::ModelParams;

fn main() -> veq::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (alpha, tau) = match args[..] {
        [a, t] => (a, t),
        _ => (-1.0, 1.0),
    };
    let p = ModelParams::gaussian(alpha, tau)?;
    let (pc, sol) = classify_point(&p, &EquilibriumConfig::default())?;
    let sup = extract_supports(&sol)?;
    println!("alpha = {alpha}, tau = {tau}: case {}", pc.case);
    println!("  flags {}", pc.flags_string());
    println!("  S(mu1) {:?}", sup.intervals);
    println!("  c2 {:.6}  c3 {:.6}  origin gaps {:?}", sup.c2, sup.c3, sup.origin_gap_cells);
    Ok(())
}
