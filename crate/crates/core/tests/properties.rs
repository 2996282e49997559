use proptest::prelude::*;
use std::sync::OnceLock;
use veq::cli::config::RunConfig;
use veq::cli::output::fmt_f64;
use veq::finite_n::BiorthogonalSystem;
use veq::params::ModelParams;
use veq::pearcey::{contour_moments, ode_residual, pearcey_p};
use veq::quad::gauss_legendre_unit;
use veq::saddle::{
    branch_saddle, critical_abscissae, cubic_roots, field_v1, field_v3, real_saddles, sigma2_density, theta, theta_at,
};
use veq::C64;

fn params(a: f64, t: f64) -> ModelParams {
    ModelParams::gaussian(a, t).unwrap()
}

/// Points off both axes, where every branch is defined.
fn off_axis() -> impl Strategy<Value = C64> {
    (0.05f64..30.0, 0.02f64..1.55, 0usize..4).prop_map(|(r, a, q)| C64::from_polar(r, a + q as f64 * std::f64::consts::FRAC_PI_2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn roots_solve_the_saddle_equation(a in -3.0f64..3.0, t in 0.2f64..3.0, z in off_axis()) {
        let p = params(a, t);
        let q = z * t;
        let r = cubic_roots(z, &p);
        for s in r {
            prop_assert!((s * s * s + s * a - q).norm() <= 1e-12 * q.norm().max(1.0) * 10.0);
        }
        prop_assert!((r[0] + r[1] + r[2]).norm() <= 1e-12 * q.norm().max(1.0) * 10.0);
    }

    #[test]
    fn branches_are_odd_and_real(a in -3.0f64..3.0, t in 0.2f64..3.0, z in off_axis()) {
        let p = params(a, t);
        for j in 1..=3 {
            let s = branch_saddle(j, z, &p).unwrap();
            let tol = 1e-12 * s.norm().max(1.0);
            prop_assert!((branch_saddle(j, -z, &p).unwrap() + s).norm() <= tol);
            prop_assert!((branch_saddle(j, z.conj(), &p).unwrap() - s.conj()).norm() <= tol);
        }
    }

    #[test]
    fn theta_sum_on_the_real_line(a in -3.0f64..3.0, t in 0.2f64..3.0, x in -50.0f64..50.0) {
        let p = params(a, t);
        let z = C64::new(x, 0.0);
        let sum: C64 = cubic_roots(z, &p).iter().map(|&s| theta_at(s, z, &p)).sum();
        prop_assert!((sum - a * a / 2.0).norm() < 1e-10 * (1.0 + (t * x).abs().powf(4.0 / 3.0)));
    }

    #[test]
    fn theta_derivative_is_tau_s(a in -3.0f64..3.0, t in 0.2f64..3.0, z in off_axis()) {
        let p = params(a, t);
        let h = 1e-4 * z.norm().max(1.0);
        for j in 1..=3 {
            let d = (theta(j, z + h, &p).unwrap() - theta(j, z - h, &p).unwrap()) / (2.0 * h);
            let s = branch_saddle(j, z, &p).unwrap();
            prop_assert!((d - s * t).norm() < 1e-6 * (1.0 + s.norm() * t));
        }
    }

    #[test]
    fn sigma2_is_even_and_vanishes_inside_y_star(a in -3.0f64..3.0, t in 0.2f64..3.0, y in 0.0f64..40.0) {
        let p = params(a, t);
        let d = sigma2_density(y, &p);
        prop_assert_eq!(d, sigma2_density(-y, &p));
        prop_assert!(d >= 0.0);
        if y < critical_abscissae(&p).y_star {
            prop_assert_eq!(d, 0.0);
        }
        prop_assert!(sigma2_density(y * 1.1 + 0.01, &p) >= d - 1e-12);
    }

    #[test]
    fn external_fields_match_the_theta_identities(a in -3.0f64..3.0, t in 0.2f64..3.0, x in -10.0f64..10.0) {
        let p = params(a, t);
        let z = C64::new(x, 0.0);
        let th1 = theta(1, z, &p).unwrap();
        prop_assert!((field_v1(x, &p) - (p.v(x) - th1.re)).abs() < 1e-10 * (1.0 + p.v(x).abs() + th1.re.abs()));
        let v3 = field_v3(x, &p);
        if x.abs() < critical_abscissae(&p).x_star {
            if let [_, Some(s2), Some(s3)] = real_saddles(x, &p) {
                let d = theta_at(C64::new(s2, 0.0), z, &p) - theta_at(C64::new(s3, 0.0), z, &p);
                prop_assert!((v3 - d.re).abs() < 1e-10);
            }
        } else {
            prop_assert_eq!(v3, 0.0);
        }
    }

    #[test]
    fn floats_survive_csv_formatting(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn config_round_trips(
        a in -3.0f64..3.0,
        t in 0.05f64..5.0,
        v4 in 0.0f64..2.0,
        n1 in 8usize..2000,
        dens in proptest::collection::vec(1usize..=4, 1..4),
        workers in proptest::option::of(1usize..64),
    ) {
        let text = format!(
            "model.alpha = {a:?}\nmodel.tau = {t:?}\nmodel.v = 0, 0, 0.5, 0, {v4:?}\ngrid.n1 = {n1}\ndensity.n = {}\n{}",
            dens.iter().map(|d| (3 * d).to_string()).collect::<Vec<_>>().join(", "),
            workers.map_or(String::new(), |w| format!("run.workers = {w}\n")),
        );
        let cfg = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(cfg.params.alpha, a);
        prop_assert_eq!(cfg.workers, workers);
        prop_assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected(key in "[a-z]{1,8}\\.[a-z_]{1,10}") {
        prop_assume!(!veq::cli::config::KEYS.contains(&key.as_str()));
        let text = format!("{} = 1", key);
        prop_assert!(RunConfig::parse(&text).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn pearcey_ode_holds(a in -2.0f64..2.0, t in 0.3f64..2.0, j in 0usize..6, n in 1usize..13, r in 0.0f64..5.0, arg in 0.0f64..6.283) {
        let p = params(a, t);
        let (res, scale) = ode_residual(j, n, C64::from_polar(r, arg), &p).unwrap();
        prop_assert!(res <= 1e-8 * scale);
    }

    #[test]
    fn pearcey_mean_value_property(a in -2.0f64..2.0, j in 0usize..6, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let p = params(a, 1.0);
        let z = C64::new(x, y);
        let center = pearcey_p(j, 3, z, 0, &p).unwrap();
        let m = 16;
        let ring: C64 = (0..m)
            .map(|k| pearcey_p(j, 3, z + C64::from_polar(0.3, 2.0 * std::f64::consts::PI * k as f64 / m as f64), 0, &p).unwrap())
            .sum::<C64>() / m as f64;
        let scale = contour_moments(j, 3, z, 1, 1, &p).unwrap();
        let scale = scale.abs_mant[0] * scale.log_scale.exp();
        prop_assert!((ring - center).norm() <= 1e-9 * scale.max(center.norm()));
    }

    #[test]
    fn real_axis_integral_is_positive(a in -3.0f64..3.0, t in 0.2f64..3.0, x in -6.0f64..6.0, n in 1usize..20) {
        let v = pearcey_p(0, n, C64::new(x, 0.0), 0, &params(a, t)).unwrap();
        prop_assert!(v.re > 0.0 && v.im.abs() <= 1e-12 * v.re);
    }
}

/// One small system shared by the finite-n properties.
fn system() -> &'static BiorthogonalSystem {
    static SYS: OnceLock<BiorthogonalSystem> = OnceLock::new();
    SYS.get_or_init(|| BiorthogonalSystem::new(6, &params(-0.5, 1.2)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn biorthogonal_families_have_parity(x in -3.0f64..3.0, k in 0usize..6) {
        let sys = system();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let (p, pm) = (sys.p(k, x), sys.p(k, -x));
        prop_assert!((pm - sign * p).abs() <= 1e-10 * (1.0 + p.abs()));
        let (q, qm) = (sys.transformed_q(k, x).unwrap(), sys.transformed_q(k, -x).unwrap());
        let qs = sys.transformed_q_all(0.0).unwrap().iter().chain(&[q]).fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((qm - sign * q).abs() <= 1e-10 * qs);
        prop_assert!(sys.transformed_q(0, x).unwrap() > 0.0);
    }

    #[test]
    fn kernel_diagonal_is_nonnegative_and_even(x in -4.0f64..4.0) {
        let sys = system();
        let d = sys.kernel(x, x).unwrap();
        prop_assert!(d >= -1e-8);
        prop_assert!((sys.kernel(-x, -x).unwrap() - d).abs() <= 1e-6 * (1.0 + d));
    }
}

#[test]
fn monic_with_positive_norms() {
    let sys = system();
    for k in 0..sys.n {
        let c = sys.p_monomial(k);
        assert!((c[k] - 1.0).abs() < 1e-10, "p_{k} leading coefficient {}", c[k]);
        assert!(sys.h_sq[k] > 0.0);
    }
}

#[test]
fn kernel_reproduces_itself() {
    let sys = system();
    let x_max = sys.moments.x_max;
    let rule = gauss_legendre_unit(20);
    let panels = 60;
    let h = 2.0 * x_max / panels as f64;
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|i| rule.iter().map(move |&(u, w)| (-x_max + h * (i as f64 + u), h * w)))
        .collect();
    for (x, y) in [(0.0, 0.3), (0.7, -0.4), (-1.1, 1.5)] {
        let lhs: f64 = nodes.iter().map(|&(s, w)| w * sys.kernel(x, s).unwrap() * sys.kernel(s, y).unwrap()).sum();
        let rhs = sys.kernel(x, y).unwrap();
        let scale = sys.kernel(x, x).unwrap().max(sys.kernel(y, y).unwrap());
        assert!((lhs - rhs).abs() < 1e-6 * scale, "({x}, {y}): {lhs} vs {rhs}");
    }
}
