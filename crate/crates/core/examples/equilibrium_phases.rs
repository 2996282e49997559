//! Solve the equilibrium problem for V(x) = x^2/2 at one point of each regular phase and
//! print supports, Euler-Lagrange residuals, edge exponents and tail laws.
//!
//!     cargo run --release --example equilibrium_phases [alpha tau]

use std::time::Instant;
use veq::equilibrium::{extract_supports, fit_edge_exponent, solve_equilibrium, tail_law, Edge, EquilibriumConfig};
use veq::ModelParams;

fn main() -> veq::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let points = if args.len() == 2 {
        vec![(args[0], args[1])]
    } else {
        vec![(2.0, 0.8), (1.0, 3.0), (-2.0, 2.0), (-2.5, 0.2)]
    };
    let cfg = EquilibriumConfig::default();
    for (alpha, tau) in points {
        let p = ModelParams::gaussian(alpha, tau)?;
        let t0 = Instant::now();
        let sol = solve_equilibrium(&p, &cfg)?;
        println!("alpha = {alpha}, tau = {tau}: {:.1} s, {} ipm iterations", t0.elapsed().as_secs_f64(), sol.iterations);
        println!("  cells {} {} {}", sol.grids.len(0), sol.grids.len(1), sol.grids.len(2));
        println!("  masses {:.15} {:.15} {:.15}", sol.mu1.mass(), sol.mu2.mass(), sol.mu3.mass());
        println!("  energy {:.12}  ell1 {:.12}", sol.energy, sol.ell1);
        println!("  {:?}", sol.el_report);
        let sup = extract_supports(&sol)?;
        println!("  supports {:?}", sup);
        let n = sup.intervals.len();
        let mut edges = vec![("b_N", Edge::Right(n - 1))];
        if sup.intervals[n - 1].0 > 0.0 {
            edges.push(("a_N", Edge::Left(n - 1)));
        }
        if sup.c2 > 0.0 {
            edges.push(("c2", Edge::C2));
        }
        if sup.c3 > 0.0 {
            edges.push(("c3", Edge::C3));
        }
        for (name, e) in edges {
            match fit_edge_exponent(&sol, e) {
                Ok(f) => println!("  edge {name}: at {:.6}, exponent {:.4} ({} cells)", f.location, f.exponent, f.cells),
                Err(err) => println!("  edge {name}: {err}"),
            }
        }
        let m2 = sol.grids.mids(1);
        let m3 = sol.grids.mids(2);
        let d2 = sol.density_half(1);
        let d3 = sol.density_half(2);
        for (name, m, d) in [("mu2", &m2, &d2), ("mu3", &m3, &d3)] {
            let (s, c) = tail_law(m, d, 1e4, 1e7)?;
            println!("  tail {name}: slope {s:.4}, C {c:.4}");
        }
    }
    Ok(())
}
