//! Pearcey-type integrals `p_{j,n}` on the six contours: values, the third-order ODE
//! residual, the weights `w_{j,n}` and the saddle-point approximation of `p_{0,n}`.
//!
//!     cargo run --release --example pearcey_integrals [alpha tau]

use veq::pearcey::{asym_check, ode_residual, pearcey_eval, weight_w};
use veq::{ModelParams, C64};

fn main() -> veq::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (alpha, tau) = if args.len() == 2 { (args[0], args[1]) } else { (-0.5, 1.0) };
    let p = ModelParams::gaussian(alpha, tau)?;
    let n = 6;
    let z = C64::new(0.8, 0.3);
    for j in 0..6 {
        let e = pearcey_eval(j, n, z, &p)?;
        let (res, scale) = ode_residual(j, n, z, &p)?;
        println!("p_{j},{n}({z}) = {:.10} (ODE residual / scale {:.1e})", e.value(), res / scale);
    }
    println!("\n    x        w_0          w_1          w_2");
    for x in [-2.0, -1.0, 0.0, 0.5, 1.5] {
        let w: Vec<f64> = (0..3).map(|j| weight_w(j, n, x, &p)).collect::<veq::Result<_>>()?;
        println!("{x:5.1}  {:11.4e}  {:11.4e}  {:11.4e}", w[0], w[1], w[2]);
    }
    println!("\nrelative error of the saddle-point approximation of p_0,3 on the real axis");
    for x in [10.0, 30.0, 100.0, 300.0] {
        println!("  x = {x:5}: {:.3e}", asym_check(3, C64::new(x, 0.0), &p)?);
    }
    match asym_check(3, C64::from_polar(100.0, 0.4), &p) {
        Ok(e) => println!("  z = 100 e^(0.4i): {e:.3e}"),
        Err(e) => println!("  z = 100 e^(0.4i): {e}"),
    }
    Ok(())
}
