//! Biorthogonal polynomials at n = 3, 6, 9, 12 and the diagonal of the correlation kernel
//! against the equilibrium density of mu1.
//!
//!     cargo run --release --example finite_n_kernel [alpha tau]

use std::time::Instant;
use veq::equilibrium::{solve_equilibrium, EquilibriumConfig};
use veq::finite_n::{compare_density, zero_report, BiorthogonalSystem};
use veq::ModelParams;

fn main() -> veq::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (alpha, tau) = if args.len() == 2 { (args[0], args[1]) } else { (0.0, 1.0) };
    let p = ModelParams::gaussian(alpha, tau)?;
    let sol = solve_equilibrium(&p, &EquilibriumConfig::default())?;
    for n in [3, 6, 9, 12] {
        let t = Instant::now();
        let sys = match BiorthogonalSystem::new(n, &p) {
            Ok(s) => s,
            Err(e) => {
                println!("n = {n:2}: {e}");
                continue;
            }
        };
        let z = zero_report(&sys)?;
        let c = compare_density(&sys, &sol)?;
        println!(
            "n = {n:2}: cond {:.2e}, bio residual {:.2e}, zeros ok {}, mass {:.8}, L1 {:.4}, sup {:.4} ({:.1?})",
            sys.moments.condition,
            sys.bio_residual,
            z.ok(),
            c.mass,
            c.l1,
            c.sup,
            t.elapsed()
        );
    }
    Ok(())
}
