//! Property tests for the invariants of each module.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;

use common::{qfi_kron_solve, qfi_purity_formula, rel_err};
use diffest::csl::{
    delta_lambda_csl, lambda_from_csl, min_detectable_rate, shape_factor_direct, shape_factor_series, CslPoint,
    SphereSpec, SHAPE_SERIES_CROSSOVER,
};
use diffest::dynamics::{
    dcov_dlambda, evolve_covariance, initial_covariance, FreeExpansion, SqueezedThermalSpec, AMU_KG,
};
use diffest::fisher::{
    gaussian_cfi, gaussian_cfi_1d, heterodyne_covariance, heterodyne_crb, homodyne_crb, momentum_crb,
    optimal_homodyne_angle, optimal_homodyne_crb, optimal_homodyne_squeeze_angle, position_crb,
    posmom_squeezing_homodyne_optimum, qcrb_branch_select, qcrb_closed_form, qfi_free_expansion, qfi_numeric,
};
use diffest::sld::{sld_spectrum, SldQuadraticForm};

fn mixed_spec() -> impl Strategy<Value = SqueezedThermalSpec> {
    (1.05f64..8.0, -1.3f64..1.3, 0.0f64..PI).prop_map(|(t, r, phi)| SqueezedThermalSpec::new(t, r, phi).unwrap())
}

fn log_range(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.log10()..hi.log10()).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn determinant_never_decreases(spec in mixed_spec(), tau in log_range(1e-3, 1e3), l in log_range(1e-8, 1e2)) {
        let s0 = initial_covariance(&spec);
        let ex = FreeExpansion::new(&spec, tau, l).unwrap();
        prop_assert!(ex.determinant() > s0.det());
        let free = FreeExpansion::new(&spec, tau, 0.0).unwrap();
        prop_assert!(rel_err(free.determinant(), s0.det()) < 1e-12);
    }

    #[test]
    fn semigroup_without_diffusion(spec in mixed_spec(), t1 in 0.0f64..5.0, t2 in 0.0f64..5.0) {
        let s0 = initial_covariance(&spec);
        let two = evolve_covariance(evolve_covariance(s0, t1, 0.0).unwrap(), t2, 0.0).unwrap();
        let one = evolve_covariance(s0, t1 + t2, 0.0).unwrap();
        let scale = one.max_abs();
        for (a, b) in [(two.xx, one.xx), (two.xp, one.xp), (two.pp, one.pp)] {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn diffusion_adds_linearly(spec in mixed_spec(), tau in 0.0f64..50.0, l in 0.0f64..10.0) {
        let s0 = initial_covariance(&spec);
        let with = evolve_covariance(s0, tau, l).unwrap();
        let without = evolve_covariance(s0, tau, 0.0).unwrap();
        let d = dcov_dlambda(tau).unwrap();
        let scale = with.max_abs();
        for (a, b) in [(with.xx - without.xx, l * d.xx), (with.xp - without.xp, l * d.xp), (with.pp - without.pp, l * d.pp)] {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn squeezing_preserves_determinant(t in 1.0f64..10.0, r in -2.0f64..2.0, phi in -PI..PI) {
        let s = initial_covariance(&SqueezedThermalSpec::new(t, r, phi).unwrap());
        prop_assert!(rel_err(s.det(), t * t) < 1e-12);
    }

    #[test]
    fn qfi_agrees_with_independent_oracles(spec in mixed_spec(), tau in log_range(1e-2, 30.0), l in log_range(1e-4, 10.0)) {
        let ex = FreeExpansion::new(&spec, tau, l).unwrap();
        let h = qfi_free_expansion(&ex).unwrap();
        let (s, ds) = (ex.release_frame_covariance(), ex.release_frame_derivative());
        prop_assert!(rel_err(h, qfi_purity_formula(&s, &ds)) < 1e-8);
        prop_assert!(rel_err(h, qfi_kron_solve(&s, &ds)) < 1e-8);
        let closed = 1.0 / qcrb_closed_form(&spec, tau, l, 1.0).unwrap().dimensionless_bound;
        prop_assert!(rel_err(h, closed) < 1e-9);
    }

    #[test]
    fn classical_never_beats_quantum(spec in mixed_spec(), tau in log_range(1e-2, 1e3), l in log_range(1e-6, 10.0), theta in -FRAC_PI_2..FRAC_PI_2) {
        let h = qfi_free_expansion(&FreeExpansion::new(&spec, tau, l).unwrap()).unwrap();
        for f in [homodyne_crb(theta, &spec, tau, l, 1.0).unwrap().fisher_info, heterodyne_crb(&spec, tau, l, 1.0).unwrap().fisher_info] {
            prop_assert!(f <= h * (1.0 + 1e-9), "cfi {f} > qfi {h}");
        }
        // the optimal-homodyne bound picks its own squeezing angle
        let best = qcrb_branch_select(&spec, tau, l).unwrap().apply(&spec);
        let h_best = qfi_free_expansion(&FreeExpansion::new(&best, tau, l).unwrap()).unwrap();
        let f = optimal_homodyne_crb(&spec, tau, l, 1.0).unwrap().fisher_info;
        prop_assert!(f <= h_best * (1.0 + 1e-9), "cfi {f} > qfi {h_best}");
    }

    #[test]
    fn homodyne_specialises_to_position_and_momentum(spec in mixed_spec(), tau in log_range(1e-2, 1e6), l in log_range(1e-10, 1e2)) {
        prop_assert_eq!(homodyne_crb(0.0, &spec, tau, l, 1.0).unwrap(), position_crb(&spec, tau, l, 1.0).unwrap());
        prop_assert_eq!(homodyne_crb(FRAC_PI_2, &spec, tau, l, 1.0).unwrap(), momentum_crb(&spec, tau, l, 1.0).unwrap());
    }

    #[test]
    fn closed_forms_match_generic_gaussian_pipeline(spec in mixed_spec(), tau in log_range(1e-2, 1e2), l in log_range(1e-4, 1e2), theta in -FRAC_PI_2..FRAC_PI_2) {
        let s = evolve_covariance(initial_covariance(&spec), tau, l).unwrap();
        let d = dcov_dlambda(tau).unwrap();
        let u = [theta.cos(), theta.sin()];
        let hom = gaussian_cfi_1d(s.quadratic_form(u), d.quadratic_form(u)).unwrap();
        prop_assert!(rel_err(1.0 / homodyne_crb(theta, &spec, tau, l, 1.0).unwrap().dimensionless_bound, hom) < 1e-10);
        let het = gaussian_cfi(&heterodyne_covariance(&s), &d).unwrap();
        prop_assert!(rel_err(1.0 / heterodyne_crb(&spec, tau, l, 1.0).unwrap().dimensionless_bound, het) < 1e-10);
    }

    #[test]
    fn analytic_angles_beat_perturbations(t in 1.0f64..5.0, r in 0.1f64..1.5, tau in log_range(0.1, 1e2), l in log_range(1e-4, 10.0), theta in -1.5f64..1.5) {
        const H: f64 = 1e-3;
        let base = SqueezedThermalSpec::new(t, r, 0.0).unwrap();
        let not_beaten = |f: &dyn Fn(f64) -> f64, x: f64| {
            let v = f(x);
            f(x + H) >= v * (1.0 - 1e-14) && f(x - H) >= v * (1.0 - 1e-14)
        };
        let q = |phi: f64| qcrb_closed_form(&base.with_angle(phi), tau, l, 1.0).unwrap().dimensionless_bound;
        prop_assert!(not_beaten(&q, qcrb_branch_select(&base, tau, l).unwrap().angle));
        let m = |phi: f64| homodyne_crb(theta, &base.with_angle(phi), tau, l, 1.0).unwrap().dimensionless_bound;
        prop_assert!(not_beaten(&m, optimal_homodyne_squeeze_angle(theta, tau)));
        let o = |th: f64| {
            homodyne_crb(th, &base.with_angle(optimal_homodyne_squeeze_angle(th, tau)), tau, l, 1.0).unwrap().dimensionless_bound
        };
        prop_assert!(not_beaten(&o, optimal_homodyne_angle(tau).unwrap()));
        let p = |th: f64| homodyne_crb(th, &base, tau, l, 1.0).unwrap().dimensionless_bound;
        prop_assert!(not_beaten(&p, posmom_squeezing_homodyne_optimum(r, tau).unwrap().theta));
    }

    #[test]
    fn squeezing_trades_against_time(r in 0.0f64..1.0, tau in log_range(1e3, 1e7), l in prop_oneof![Just(0.0), log_range(1e-14, 1e-4)]) {
        let a = SqueezedThermalSpec::new(1.6, r, 0.0).unwrap();
        let b = SqueezedThermalSpec::new(1.6, r + 0.5, 0.0).unwrap();
        for f in [position_crb, momentum_crb] {
            let x = f(&a, tau, l, 1.0).unwrap().dimensionless_bound;
            let y = f(&b, tau * (-1.0f64).exp(), l, 1.0).unwrap().dimensionless_bound;
            prop_assert!(rel_err(y, x) < 0.01);
        }
    }

    #[test]
    fn optimal_homodyne_depends_on_effective_temperature(t in 1.0f64..5.0, r in 0.0f64..1.5, shift in -0.5f64..0.5, tau in log_range(1e-2, 1e4), l in log_range(1e-8, 10.0)) {
        prop_assume!(t * (2.0 * shift).exp() >= 1.0 && r + shift >= 0.0);
        // (T, r) and (T e^{2 shift}, r + shift) share T e^{-2r}
        let a = SqueezedThermalSpec::new(t, r, 0.0).unwrap();
        let b = SqueezedThermalSpec::new(t * (2.0 * shift).exp(), r + shift, 0.0).unwrap();
        let x = optimal_homodyne_crb(&a, tau, l, 1.0).unwrap().dimensionless_bound;
        let y = optimal_homodyne_crb(&b, tau, l, 1.0).unwrap().dimensionless_bound;
        prop_assert!(rel_err(y, x) < 1e-10);
    }

    #[test]
    fn sld_carries_the_qfi(spec in mixed_spec(), tau in log_range(1e-2, 1e2), l in log_range(1e-6, 10.0)) {
        let ex = FreeExpansion::new(&spec, tau, l).unwrap();
        let form = SldQuadraticForm::for_expansion(&ex).unwrap();
        let h = qfi_numeric(&ex.release_frame_covariance(), &ex.release_frame_derivative()).unwrap();
        prop_assert!(rel_err(form.information(&ex.derivative()), h) < 1e-9);
    }

    #[test]
    fn sld_normal_form_is_isotropic(spec in mixed_spec(), tau in log_range(1e-2, 1e2), l in log_range(1e-6, 10.0)) {
        let ex = FreeExpansion::new(&spec, tau, l).unwrap();
        let form = SldQuadraticForm::for_expansion(&ex).unwrap();
        let dec = sld_spectrum(&form, &ex.covariance(), tau).unwrap();
        let n = dec.normal_form(&form);
        let diag = 0.5 * (n.xx + n.pp);
        prop_assert!((n.xp / diag).abs() < 1e-9);
        // the diagonal mixes eigenvalues up to 1e10 apart, so it is looser
        prop_assert!(rel_err(n.xx, n.pp) < 1e-6);
    }

    #[test]
    fn detection_threshold_roundtrips(r_c in log_range(1e-9, 1e-4), nu in log_range(1.0, 1e8), r in 0.0f64..1.5) {
        let sphere = SphereSpec::new(5.5e9 * AMU_KG, 1e-7).unwrap();
        let spec = SqueezedThermalSpec::new(1.6, r, 0.0).unwrap();
        let bound = momentum_crb(&spec, 1e6, 0.0, 1e20).unwrap();
        let lmin = min_detectable_rate(&bound, r_c, &sphere, nu).unwrap();
        let lambda = lambda_from_csl(&CslPoint::new(lmin, r_c).unwrap(), &sphere).unwrap();
        prop_assert!(rel_err(lambda, 2.0 / nu.sqrt() * bound.variance_bound.sqrt()) < 1e-9);
        let single = delta_lambda_csl(bound.variance_bound.sqrt(), r_c, &sphere).unwrap();
        prop_assert!(rel_err(lmin, 2.0 / nu.sqrt() * single) < 1e-9);
    }

    #[test]
    fn detection_threshold_falls_with_shots_and_squeezing(r_c in log_range(1e-9, 1e-4), nu in log_range(1.0, 1e7), r in 0.0f64..1.4) {
        let sphere = SphereSpec::new(5.5e9 * AMU_KG, 1e-7).unwrap();
        let at = |r: f64, nu: f64| {
            let b = momentum_crb(&SqueezedThermalSpec::new(1.6, r, 0.0).unwrap(), 1e6, 0.0, 1e20).unwrap();
            min_detectable_rate(&b, r_c, &sphere, nu).unwrap()
        };
        prop_assert!(at(r, 2.0 * nu) < at(r, nu));
        prop_assert!(at(r + 0.1, nu) < at(r, nu));
    }
}

#[test]
fn shape_factor_branches_meet() {
    let c = SHAPE_SERIES_CROSSOVER;
    for x in [c * (1.0 - 1e-9), c, c * (1.0 + 1e-9)] {
        assert!(rel_err(shape_factor_series(x), shape_factor_direct(x)) < 1e-12);
    }
}
