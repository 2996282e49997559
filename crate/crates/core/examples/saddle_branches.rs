//! Saddle points of `W(s) - tau z s`, the functions `theta_j`, the critical abscissae and
//! the density of `sigma_2`.
//!
//!     cargo run --release --example saddle_branches [alpha tau]

use veq::saddle::{critical_abscissae, saddle_triple, sigma2_density, sigma2_integral_checks, sigma3_density, theta};
use veq::{ModelParams, C64};

fn main() -> veq::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (alpha, tau) = if args.len() == 2 { (args[0], args[1]) } else { (-1.0, 1.5) };
    let p = ModelParams::gaussian(alpha, tau)?;
    let c = critical_abscissae(&p);
    println!("alpha = {alpha}, tau = {tau}: x* = {:.6}, y* = {:.6}", c.x_star, c.y_star);

    for z in [C64::new(2.0, 1.0), C64::new(-0.5, 3.0), C64::new(4.0, -0.2)] {
        let t = saddle_triple(z, &p)?;
        let th: Vec<C64> = (1..=3).map(|j| theta(j, z, &p)).collect::<veq::Result<_>>()?;
        let sum: C64 = th.iter().sum();
        println!("z = {z:.2}: s = [{:.5}, {:.5}, {:.5}]", t.s[0], t.s[1], t.s[2]);
        println!("          theta sum - alpha^2/2 = {:.2e}", (sum - alpha * alpha / 2.0).norm());
    }

    println!("\n   y     sigma2 density        x    sigma3 density");
    for k in 0..6 {
        let y = c.y_star + 0.5 * k as f64;
        let x = c.x_star + 0.5 * k as f64;
        println!("{y:6.3}  {:14.8}    {x:6.3}  {:14.8}", sigma2_density(y, &p), sigma3_density(x, &p));
    }

    println!();
    for x in [0.5, 1.0, 2.0, 5.0] {
        let (r1, r2) = sigma2_integral_checks(x, &p)?;
        println!("special integrals at x = {x}: residuals {r1:.2e}, {r2:.2e}");
    }
    Ok(())
}
