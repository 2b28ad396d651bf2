use mgc::curve::CurveSpec;
use mgc::family::{abbrevs_at, pqr_at, Abbrevs};
use mgc::frenet::{Case, FrenetTol};
use mgc::mannheim::{alpha_pointwise, check_condition, mate_speed, mate_speed_direct, Thresholds};
use mgc::report::{fmt_f64, Json, Verdict};
use mgc::{classify, inner, Expr, Vec4};
use proptest::prelude::*;

fn vec4() -> impl Strategy<Value = Vec4> {
    prop::array::uniform4(-100.0f64..100.0).prop_map(Vec4::from_array)
}

/// Random expression text over `u`, kept away from domain edges.
fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("u".to_string()),
        (-9.0f64..9.0).prop_map(|c| format!("{c:.3}")),
        Just("pi".to_string()),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(({a})/10)")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            inner.prop_map(|a| format!("-({a})^3")),
        ]
    })
}

proptest! {
    #[test]
    fn inner_is_symmetric_and_bilinear(a in vec4(), b in vec4(), c in vec4(), x in -5.0f64..5.0) {
        prop_assert_eq!(inner(a, b), inner(b, a));
        let lhs = inner(x * a + c, b);
        let rhs = x * inner(a, b) + inner(c, b);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs() + (x * inner(a, b)).abs() + inner(c, b).abs()));
    }

    #[test]
    fn classify_is_scale_invariant(v in vec4(), lam in 1e-3f64..1e3) {
        prop_assert_eq!(classify(v, 1e-9).kind, classify(lam * v, 1e-9).kind);
        prop_assert_eq!(classify(v, 1e-9).kind, classify(-v, 1e-9).kind);
    }

    #[test]
    fn vectors_round_trip_through_text(v in vec4()) {
        let s = format!("{:?},{:?},{:?},{:?}", v[0], v[1], v[2], v[3]);
        let w: Vec4 = s.parse().unwrap();
        prop_assert_eq!(v, w);
    }

    #[test]
    fn polynomial_jets_match_symbolic_derivatives(
        coeffs in prop::collection::vec(-5.0f64..5.0, 1..7),
        u in -2.0f64..2.0,
    ) {
        let text = coeffs.iter().enumerate().map(|(k, c)| format!("({c:?})*u^{k}")).collect::<Vec<_>>().join(" + ");
        let j = Expr::parse(&text).unwrap().eval_jet(u, 5).unwrap();
        for d in 0..=5usize {
            // d-th derivative of sum c_k u^k
            let want: f64 = coeffs.iter().enumerate().filter(|(k, _)| *k >= d).map(|(k, c)| {
                let falling: f64 = (0..d).map(|i| (k - i) as f64).product();
                c * falling * u.powi((k - d) as i32)
            }).sum();
            let scale: f64 = coeffs.iter().map(|c| c.abs()).sum::<f64>() * 200.0 * 3f64.powi(6);
            prop_assert!((j.derivative(d) - want).abs() <= 1e-12 * scale, "d={} {} vs {}", d, j.derivative(d), want);
        }
    }

    #[test]
    fn parse_print_parse_is_stable(text in expr_text()) {
        let e = Expr::parse(&text).unwrap();
        let printed = e.to_string();
        let again = Expr::parse(&printed).unwrap();
        prop_assert_eq!(&again, &e);
        prop_assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn jets_agree_with_finite_differences(text in expr_text(), u in -1.0f64..1.0) {
        let e = Expr::parse(&text).unwrap();
        let (Ok(j), Ok(p), Ok(m)) = (e.eval_jet(u, 2), e.eval(u + 1e-5), e.eval(u - 1e-5)) else {
            return Ok(());
        };
        prop_assume!(j.is_finite() && j.value().abs() < 1e6);
        let fd = (p - m) / 2e-5;
        let tol = 1e-5 * (1.0 + j.derivative(1).abs() + j.derivative(2).abs() + j.value().abs());
        prop_assert!((fd - j.derivative(1)).abs() <= tol, "{} vs {}", fd, j.derivative(1));
        prop_assert_eq!(j.value(), e.eval(u).unwrap());
    }

    #[test]
    fn p_simplifies(a in 1.0f64..20.0, b in -20.0f64..20.0, c in 0.0f64..20.0, d in -20.0f64..20.0, e in -20.0f64..20.0) {
        let ab = Abbrevs { a, b, c, d, e, f: 0.0 };
        let x = pqr_at(&ab);
        let rhs = a * a * (1.0 - c + b * e + d - c * d);
        prop_assert!((x.p - rhs).abs() <= 1e-9 * (1.0 + x.p.abs()), "{} vs {}", x.p, rhs);
        prop_assert!((x.p - a * a * x.p_tilde).abs() <= 1e-9 * (1.0 + x.p.abs()));
    }

    #[test]
    fn abbreviation_derivatives(
        g in prop::array::uniform3(-2.0f64..2.0),
        h in prop::array::uniform3(-2.0f64..2.0),
        u in -1.0f64..1.0,
    ) {
        let ge = Expr::parse(&format!("{:?} + {:?}*u + {:?}*sin(u)", g[0], g[1], g[2])).unwrap();
        let he = Expr::parse(&format!("{:?} + {:?}*u^2 + {:?}*exp(u/2)", h[0], h[1], h[2])).unwrap();
        let hh = 1e-5;
        let p = abbrevs_at(&ge, &he, u + hh).unwrap();
        let m = abbrevs_at(&ge, &he, u - hh).unwrap();
        let x = abbrevs_at(&ge, &he, u).unwrap();
        let tol = 1e-6 * (1.0 + x.a + x.c.abs() + x.f);
        prop_assert!(((p.a - m.a) / (2.0 * hh) - 2.0 * x.b).abs() <= tol);
        prop_assert!(((p.b - m.b) / (2.0 * hh) - (x.c + x.d)).abs() <= tol);
        prop_assert!(((p.c - m.c) / (2.0 * hh) - 2.0 * x.e).abs() <= tol);
    }

    #[test]
    fn pointwise_alpha_zeroes_the_condition(k1 in 0.01f64..10.0, k2 in 0.01f64..10.0, which in 0usize..3) {
        let case = [Case::Case1, Case::Case2, Case::Case3][which];
        if let Ok(a) = alpha_pointwise(k1, k2, case) {
            let [mu1, mu2, _] = case.mu();
            let r = k1 + a * (mu1 * k1 * k1 + mu2 * k2 * k2);
            prop_assert!(r.abs() <= 8.0 * f64::EPSILON * k1, "{}", r);
        }
    }

    #[test]
    fn floats_round_trip_through_reports(x in any::<f64>()) {
        let j = Json::obj().with("x", x).to_string();
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        match fmt_f64(x) {
            Some(text) => {
                prop_assert!(v["x"].is_number());
                prop_assert_eq!(text.parse::<f64>().unwrap(), if x == 0.0 { 0.0 } else { x });
            }
            None => prop_assert!(v["x"].is_null()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_curvature_curves_satisfy_the_condition(
        a in 0.3f64..2.0, w in 0.3f64..1.5, b in 0.5f64..3.0, v in 0.3f64..1.5,
    ) {
        prop_assume!(b * v > 1.2 * a * w);
        let x = [
            format!("{a:?}*sinh({w:?}*u)"),
            format!("{a:?}*cosh({w:?}*u)"),
            format!("{b:?}*cos({v:?}*u)"),
            format!("{b:?}*sin({v:?}*u)"),
        ];
        let c = CurveSpec::parse([&x[0], &x[1], &x[2], &x[3]], (0.0, 1.0), "u").unwrap();
        let app = mgc::frenet::frenet_at_u(&c, 0.5, &FrenetTol::default()).unwrap();
        prop_assume!(alpha_pointwise(app.k[0], app.k[1], app.case).is_ok());
        let r = check_condition(&c, 12, &Thresholds::default(), &FrenetTol::default()).unwrap();
        prop_assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn mate_speed_matches_brute_force(
        a in 0.3f64..2.0, w in 0.3f64..1.5, b in 0.5f64..3.0, v in 0.3f64..1.5,
        alpha in -4.0f64..4.0, u in 0.0f64..1.0,
    ) {
        prop_assume!(b * v > 1.2 * a * w);
        let x = [
            format!("{a:?}*sinh({w:?}*u)"),
            format!("{a:?}*cosh({w:?}*u)"),
            format!("{b:?}*cos({v:?}*u)"),
            format!("{b:?}*sin({v:?}*u)"),
        ];
        let c = CurveSpec::parse([&x[0], &x[1], &x[2], &x[3]], (0.0, 1.0), "u").unwrap();
        let tol = FrenetTol::default();
        let Ok(app) = mgc::frenet::frenet_at_u(&c, u, &tol) else { return Ok(()) };
        let direct = mate_speed_direct(&c, u, alpha, &tol).unwrap();
        prop_assert!((mate_speed(&app, alpha, 0.0) - direct).abs() <= 1e-9 * direct.max(1.0));
    }
}
