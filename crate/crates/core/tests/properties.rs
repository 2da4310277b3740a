//! Property suites over random smooth problems. Each test runs on its own,
//! e.g. `cargo test --test properties bound_compliance`.

mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cases(20))]

    #[test]
    fn bound_compliance(spec in system_spec()) {
        let ratio = bound_ratio(&spec.system(501), 40);
        prop_assert!(ratio <= 1.0, "ratio {ratio}");
    }

    #[test]
    fn particular_solution_identity(spec in system_spec()) {
        let ratio = particular_ratio(&spec.system(1001));
        prop_assert!(ratio <= 1.0, "ratio {ratio}");
    }
}

proptest! {
    #![proptest_config(cases(10))]

    #[test]
    fn lemmas_match_rk4(spec in system_spec(), hu in wave(1.0), hv in wave(1.0)) {
        let ratio = lemma_ratio(&spec.system(1001), (hu, hv));
        prop_assert!(ratio <= 1.0, "ratio {ratio}");
    }

    #[test]
    fn spps_residual(spec in system_spec(), lambdas in prop::collection::vec((-5.0..5.0f64, -2.0..2.0f64), 5)) {
        let lambdas: Vec<Complex64> = lambdas.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
        let ratio = spps_residual_ratio(&spec.system(1001), &lambdas);
        prop_assert!(ratio <= 1.0, "ratio {ratio}");
    }

    #[test]
    fn expansion_center_independence(spec in system_spec(), re in -4.0..4.0f64, im in -1.0..1.0f64) {
        let ratio = center_independence_ratio(&spec.system(1001), Complex64::new(re, im));
        prop_assert!(ratio <= 1.0, "ratio {ratio}");
    }
}

proptest! {
    #![proptest_config(cases(5))]

    #[test]
    fn sturm_liouville_parity_identities(spec in sl_spec()) {
        let ratio = sl_identity_ratio(&spec.problem(1001), 12);
        prop_assert!(ratio <= 1.0, "ratio {ratio}");
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn quintics_integrate_exactly(k in prop::array::uniform6(-3.0..3.0f64), anchor in 0usize..301) {
        let ratio = quintic_ratio(k, anchor);
        prop_assert!(ratio <= 1.0, "ratio {ratio}");
    }

    #[test]
    fn integration_is_linear(a in -5.0..5.0f64, b in -5.0..5.0f64, f in wave(2.0), g in wave(2.0)) {
        let mesh = dirac_spps::Mesh::new(0.0, 1.0, 201).unwrap();
        let (f, g) = (f.sample(mesh), g.sample(mesh));
        let combined = &f.scale(c(a)) + &g.scale(c(b));
        let lhs = combined.integrate_cumulative(100);
        let rhs = &f.integrate_cumulative(100).scale(c(a)) + &g.integrate_cumulative(100).scale(c(b));
        prop_assert!((&lhs - &rhs).abs_max() <= 1e-13 * (1.0 + lhs.abs_max()));
    }
}

proptest! {
    #![proptest_config(cases(16))]

    #[test]
    fn sixth_order_convergence(k in 10.0..30.0f64) {
        let order = observed_order(k);
        prop_assert!(order >= 5.5, "observed order {order}");
    }
}
