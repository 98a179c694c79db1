mod common;

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qkl::estimation::{build_problem, evaluate, quadratic_cost, HomodyneConfig};
use qkl::linalg::{c, max_abs, CMat};
use qkl::model::{build_squeezer_plant, conjugation_asymmetry, conjugation_swap, DoubledMatrix};
use qkl::{classical_problem, cost, solve_care, Scheme, SqueezerParams};

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn block(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    proptest::collection::vec(complex(), rows * cols)
        .prop_map(move |v| CMat::from_vec(rows, cols, v))
}

fn doubled(rows: usize, cols: usize) -> impl Strategy<Value = DoubledMatrix> {
    (block(rows, cols), block(rows, cols)).prop_map(|(a, b)| DoubledMatrix::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_stay_doubled(a in doubled(2, 3), b in doubled(3, 2)) {
        let prod = a.mul(&b).unwrap();
        let direct = a.realized() * b.realized();
        prop_assert!(max_abs(&(prod.realized() - &direct)) < 1e-12);
        prop_assert!(conjugation_asymmetry(&direct, &[2], &[2]) < 1e-12);
    }

    #[test]
    fn adjoint_stays_doubled(a in doubled(2, 3)) {
        let adj = a.adjoint();
        prop_assert_eq!(adj.realized(), &a.realized().adjoint());
    }

    #[test]
    fn cost_is_pi_periodic(theta in 0.0..PI, idx in 0usize..9) {
        let cfg = &common::configurations()[idx];
        for scheme in [Scheme::Classical, cfg.scheme] {
            let at = |t: f64| {
                let hd = HomodyneConfig::single(t);
                cost(&build_problem(scheme, &cfg.plant, cfg.controller.as_ref(), &hd).unwrap()).unwrap()
            };
            prop_assert!((at(theta) - at(theta + PI)).abs() <= 1e-10);
        }
    }

    #[test]
    fn cost_ignores_global_phase_of_estimand(phi in 0.0..2.0 * PI, theta in 0.0..PI, chi in -1.0..1.0f64) {
        let params = SqueezerParams::real(4.0, &[4.0], chi);
        let base = [c(0.2), c(-0.2)];
        let rot = Complex64::from_polar(1.0, phi);
        let plant = build_squeezer_plant(&params, &base).unwrap();
        let rotated = build_squeezer_plant(&params, &[base[0] * rot, base[1] * rot]).unwrap();
        let hd = HomodyneConfig::single(theta);
        let a = cost(&classical_problem(&plant, &hd).unwrap()).unwrap();
        let b = cost(&classical_problem(&rotated, &hd).unwrap()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn costs_are_real_and_nonnegative(theta in 0.0..PI, idx in 0usize..9) {
        let cfg = &common::configurations()[idx];
        let hd = HomodyneConfig::single(theta);
        let eval = evaluate(&build_problem(cfg.scheme, &cfg.plant, cfg.controller.as_ref(), &hd).unwrap()).unwrap();
        prop_assert!(eval.imaginary_part.abs() <= 1e-12);
        prop_assert!(eval.cost >= 0.0);
    }

    #[test]
    fn solutions_are_covariant_under_conjugation(theta in 0.0..PI, idx in 0usize..9) {
        // Σ conj(P(θ)) Σ = P(π/2 - θ): the quadrature swap reflects the angle.
        let cfg = &common::configurations()[idx];
        let solve = |t: f64| {
            let hd = HomodyneConfig::single(t);
            let problem = build_problem(cfg.scheme, &cfg.plant, cfg.controller.as_ref(), &hd).unwrap();
            (solve_care(&problem.filter).unwrap().covariance, problem.mode_groups)
        };
        let (p, groups) = solve(theta);
        let (reflected, _) = solve(PI / 2.0 - theta);
        let swap = conjugation_swap(&groups);
        prop_assert!(max_abs(&(&swap * p.conjugate() * &swap - reflected)) <= 1e-9);
    }
}

#[test]
fn augmented_matrices_are_doubled() {
    for cfg in common::configurations() {
        let hd = HomodyneConfig::single(0.7);
        let problem = build_problem(cfg.scheme, &cfg.plant, cfg.controller.as_ref(), &hd).unwrap();
        let fd = &problem.filter;
        let state = &problem.mode_groups;
        let noise = match cfg.scheme {
            // [A | A~] in the feedback loop, each its own doubled group
            Scheme::CoherentFeedback => vec![1, 1],
            _ => vec![fd.noise_input.ncols() / 2],
        };
        let out = vec![fd.output.nrows() / 2];
        assert!(
            conjugation_asymmetry(&fd.drift, state, state) == 0.0,
            "{}",
            cfg.name
        );
        assert!(
            conjugation_asymmetry(&fd.noise_input, state, &noise) == 0.0,
            "{}",
            cfg.name
        );
        assert!(
            conjugation_asymmetry(&fd.output, &out, state) == 0.0,
            "{}",
            cfg.name
        );
        assert!(
            conjugation_asymmetry(&fd.feedthrough, &out, &noise) == 0.0,
            "{}",
            cfg.name
        );
    }
}

#[test]
fn solutions_are_symmetric_on_the_diagonal_quadrature() {
    for cfg in common::configurations() {
        let hd = HomodyneConfig::single(PI / 4.0);
        let problem = build_problem(cfg.scheme, &cfg.plant, cfg.controller.as_ref(), &hd).unwrap();
        let p = solve_care(&problem.filter).unwrap().covariance;
        let groups = &problem.mode_groups;
        assert!(
            conjugation_asymmetry(&p, groups, groups) <= 1e-9,
            "{}",
            cfg.name
        );
        let value = quadratic_cost(&problem.estimand, &p);
        assert!(value.im.abs() <= 1e-12);
    }
}
