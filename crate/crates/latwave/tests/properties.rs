use latwave::decay::{fit_decay, geomspace, DecaySeries};
use latwave::evolution::{BoxState, Layout};
use latwave::green::{green_wave, TorusGrid};
use latwave::newton::DecayIndex;
use latwave::poly::Poly;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn green_is_even_and_symmetric(x in -6i64..7, y in -6i64..7, t in 0.0f64..8.0) {
        let grid = TorusGrid::for_point(2, t, 6).unwrap();
        let g = green_wave(&[x, y], t, &grid).unwrap().value;
        for p in [[-x, y], [x, -y], [y, x], [-y, -x]] {
            prop_assert!((green_wave(&p, t, &grid).unwrap().value - g).abs() < 1e-14);
        }
    }

    #[test]
    fn fit_recovers_exact_laws(beta in -2.5f64..-0.2, p in 0u32..2, c in 0.1f64..10.0) {
        let s = DecaySeries::from_fn("law", geomspace(10.0, 1e4, 12), |t| c * t.powf(beta) * t.ln().powi(p as i32)).unwrap();
        let f = fit_decay(&s).unwrap();
        prop_assert_eq!(f.p, p);
        prop_assert!((f.beta - beta).abs() < 1e-9);
    }

    #[test]
    fn index_round_trips(n in -30i64..0, d in 1i64..13, p in 0u32..3) {
        let i = DecayIndex::frac(n, d, p);
        prop_assert_eq!(i.to_string().parse::<DecayIndex>().unwrap(), i);
    }

    #[test]
    fn poly_display_round_trips(c in prop::collection::vec(-5i64..6, 6)) {
        let expr = format!("{}*z1^3 + {}*z1*z2 + {}*z2^2 + {}*z3 + {}*z1^2*z3 + {}", c[0], c[1], c[2], c[3], c[4], c[5]);
        let p = Poly::parse(&expr, Some(3)).unwrap();
        prop_assert_eq!(Poly::parse(&p.to_string(), Some(3)).unwrap(), p);
    }

    #[test]
    fn linear_flow_is_a_group(a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let s = BoxState::delta(3, 8, Layout::Even, 0.3, 1.0).unwrap();
        let u1 = s.linear_propagate(a).linear_propagate(b).physical_u();
        let u2 = s.linear_propagate(a + b).physical_u();
        prop_assert!(u1.iter().zip(&u2).all(|(x, y)| (x - y).abs() < 1e-12));
    }
}
