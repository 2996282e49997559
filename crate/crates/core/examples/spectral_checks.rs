//! Expansion constants, tail law, sheet gluing and the quartic spectral curve of a solved
//! equilibrium.
//!
//!     cargo run --release --example spectral_checks [alpha tau]

use veq::classify::classify_case;
use veq::equilibrium::{extract_supports, solve_equilibrium, EquilibriumConfig};
use veq::spectral::{genus, ExpansionConstants, SpectralData};
use veq::{ModelParams, C64};

fn main() -> veq::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let points = if args.len() == 2 {
        vec![(args[0], args[1])]
    } else {
        vec![(2.0, 0.8), (1.0, 3.0), (-2.0, 2.0), (-2.5, 0.2)]
    };
    for (alpha, tau) in points {
        let p = ModelParams::gaussian(alpha, tau)?;
        let sol = solve_equilibrium(&p, &EquilibriumConfig::default())?;
        let sup = extract_supports(&sol)?;
        let case = classify_case(&sup).case;
        let sd = SpectralData::new(&sol);
        println!("alpha = {alpha}, tau = {tau}: case {case}, genus {}", genus(&sup, case)?);

        let k = sd.fit_expansion_constants()?;
        let (em1, e1, _) = ExpansionConstants::expected(&p);
        println!("  e_-1 {:.6} (expect {:.6})  e_1 {:.6} (expect {:.6})  e_3 {:.6}", k.e_m1, em1, k.e1, e1, k.e3);
        println!("  e_5 {:.6}  C {:.6}  fit residual {:.2e}", k.e5, k.c, k.residual);
        for which in [2, 3] {
            let t = sd.tail_fit(which)?;
            let ratio = t.prefactor / (3f64.sqrt() / (2.0 * std::f64::consts::PI) * k.c);
            println!("  tail mu{which}: slope {:.4}, prefactor ratio {:.4}", t.slope, ratio);
        }
        for (j, m) in [(1, 1.0), (2, 2.0 / 3.0), (3, 1.0 / 3.0)] {
            let z = C64::from_polar(1e3, 0.7);
            let zf = C64::from_polar(1e6, 0.7);
            println!(
                "  z F{j}(z) - {m:.4}: {:.2e} at |z| = 1e3, {:.2e} at 1e6",
                (z * sd.cauchy_f(j, z)? - m).norm(),
                (zf * sd.cauchy_f(j, zf)? - m).norm()
            );
        }
        let g = sd.check_gluing(&sup)?;
        println!("  gluing {:?}  relative {:.2e}", g.cuts.map(|c| c.map(|c| c.mismatch)), g.relative());
        let r = sup.intervals.last().unwrap().1.max(1.0);
        let fit = sd.fit_spectral_curve(&SpectralData::curve_samples(r))?;
        println!(
            "  curve residual {:.2e}, p3 error {:.2e}, imaginary parts {:.2e}",
            fit.residual, fit.p3_error, fit.imag_discarded
        );
        println!("  p_3 {:?}\n  p_2 {:?}\n  p_1 {:?}\n  p_0 {:?}", fit.coeffs[3], fit.coeffs[2], fit.coeffs[1], fit.coeffs[0]);
        let z = C64::new(1.3, 0.9);
        let sum: C64 = (1..=4).map(|j| sd.xi(j, z).unwrap()).sum();
        println!("  telescoping defect {:.2e}", (sum - p.dv_c(z)).norm());
    }
    Ok(())
}
