use nc_orlicz::counterexample::LogScalar;
use nc_orlicz::orlicz::{luxemburg_norm, lp_norm};
use nc_orlicz::{BlockElement, BlockShape, NFunction, TraceSpec};
use proptest::prelude::*;

fn diag_trace(n: usize) -> TraceSpec {
    TraceSpec::standard(&BlockShape::commutative(n).unwrap())
}

proptest! {
    #[test]
    fn power_inverse_round_trips(p in 1.05f64..6.0, t in 1e-4f64..1e4) {
        let nf = NFunction::power(p).unwrap();
        let back = nf.inverse(nf.phi(t)).unwrap();
        prop_assert!((back - t).abs() <= 1e-12 * t);
    }

    #[test]
    fn log_power_is_convex(beta in 1.05f64..4.0, a in 0.0f64..50.0, b in 0.0f64..50.0, lam in 0.0f64..=1.0) {
        let nf = NFunction::log_power(beta).unwrap();
        let lhs = nf.phi(lam * a + (1.0 - lam) * b);
        let rhs = lam * nf.phi(a) + (1.0 - lam) * nf.phi(b);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn conjugate_satisfies_young(p in 1.1f64..5.0, t in 1e-3f64..1e3, s in 1e-3f64..1e3) {
        let nf = NFunction::power(p).unwrap();
        let gap = nf.young_gap(t, s);
        prop_assert!(gap >= -1e-10 * (nf.phi(t) + nf.conjugate().phi(s)).max(1.0));
    }

    #[test]
    fn luxemburg_of_power_is_scaled_lp(p in 1.1f64..4.0, xs in prop::collection::vec(-10.0f64..10.0, 1..6)) {
        // ∫Φ_p(|x|/λ) = 1  ⟺  λ = p^{-1/p} ‖x‖_p
        let tau = diag_trace(xs.len());
        let x = BlockElement::real_diagonal(&xs).unwrap();
        let lux = luxemburg_norm(&NFunction::power(p).unwrap(), &tau, &x).unwrap().value;
        let closed = p.powf(-1.0 / p) * lp_norm(&tau, &x, p).unwrap();
        prop_assert!((lux - closed).abs() <= 1e-10 * closed.max(1e-300));
    }

    #[test]
    fn log_scalar_matches_f64(a in -1e3f64..1e3, b in -1e3f64..1e3) {
        let (la, lb) = (LogScalar::from_f64(a), LogScalar::from_f64(b));
        let sum = (la + lb).to_f64();
        prop_assert!((sum - (a + b)).abs() <= 1e-12 * (a.abs() + b.abs()).max(1e-300));
        let prod = (la * lb).to_f64();
        prop_assert!((prod - a * b).abs() <= 1e-12 * (a * b).abs());
    }
}
