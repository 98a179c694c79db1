mod common;

use common::config;
use qkl::estimation::{build_problem, default_grid, evaluate, HomodyneConfig};
use qkl::linalg::{max_abs, CMat};
use qkl::realizability::{doubled_commutation, solve_commutation};
use qkl::{classical_problem, cost, sweep, QuantumSystem};

fn commutation(sys: &QuantumSystem) -> CMat {
    let theta = solve_commutation(sys.drift().block1(), sys.input().block1()).unwrap();
    doubled_commutation(&theta.theta)
}

#[test]
fn coherent_without_feedback_cannot_beat_classical_for_passive_plant() {
    let cfg = config("fig3");
    let ctrl = cfg.controller.as_ref().unwrap();
    let curve = sweep("fig3", &cfg.plant, Some(ctrl), cfg.scheme, &default_grid()).unwrap();
    assert!(curve.diagnostics.is_empty());
    assert!(curve.max_abs_difference().unwrap() <= 1e-8);
    for (_, classical, coherent) in curve.paired() {
        assert!((classical - 0.08).abs() <= 1e-8);
        assert!((coherent - 0.08).abs() <= 1e-8);
    }
}

#[test]
fn augmented_covariance_is_block_diagonal_for_passive_plant() {
    let cfg = config("fig3");
    let ctrl = cfg.controller.as_ref().unwrap();
    for deg in [0.0, 30.0, 90.0, 150.0] {
        let hd = HomodyneConfig::single(f64::to_radians(deg));
        let eval =
            evaluate(&build_problem(cfg.scheme, &cfg.plant, Some(ctrl), &hd).unwrap()).unwrap();
        let p = &eval.solution.covariance;
        let p2 = p.view((0, 2), (2, 2)).into_owned();
        assert!(max_abs(&p2) <= 1e-8, "{deg}: {p2}");
        let p1 = p.view((0, 0), (2, 2)).into_owned();
        assert!(max_abs(&(p1 - commutation(&cfg.plant))) <= 1e-8);
    }
}

#[test]
fn passive_feedback_pair_recovers_both_commutation_matrices() {
    let cfg = config("thm4");
    let ctrl = cfg.controller.as_ref().unwrap();
    let (theta, theta_c) = (commutation(&cfg.plant), commutation(ctrl));
    for deg in [0.0, 45.0, 90.0, 170.0] {
        let hd = HomodyneConfig::single(f64::to_radians(deg));
        let eval =
            evaluate(&build_problem(cfg.scheme, &cfg.plant, Some(ctrl), &hd).unwrap()).unwrap();
        let p = &eval.solution.covariance;
        assert!(max_abs(&(p.view((0, 0), (2, 2)) - &theta)) <= 1e-8);
        assert!(max_abs(&(p.view((2, 2), (2, 2)) - &theta_c)) <= 1e-8);
        assert!((eval.cost - 1.0).abs() <= 1e-8);
        assert!((cost(&classical_problem(&cfg.plant, &hd).unwrap()).unwrap() - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn squeezed_plant_classical_cost_depends_on_angle() {
    let cfg = config("fig5");
    let curve = sweep(
        "fig5",
        &cfg.plant,
        None,
        qkl::Scheme::Classical,
        &default_grid(),
    )
    .unwrap();
    let values: Vec<f64> = curve.classical_costs.iter().map(|v| v.unwrap()).collect();
    let spread = values.iter().cloned().fold(f64::MIN, f64::max)
        - values.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread > 1e-3);
}

#[test]
fn figure_orderings() {
    let run = |name: &str| {
        let cfg = config(name);
        sweep(
            name,
            &cfg.plant,
            cfg.controller.as_ref(),
            cfg.scheme,
            &default_grid(),
        )
        .unwrap()
    };
    let fig4 = run("fig4");
    assert!(fig4.paired().iter().all(|(_, a, b)| *b >= a - 1e-9));

    let fig5 = run("fig5");
    let at30 = fig5.paired()[30];
    assert!(at30.2 < at30.1);
    let min = |v: &[Option<f64>]| v.iter().map(|x| x.unwrap()).fold(f64::MAX, f64::min);
    assert!(min(&fig5.classical_costs) <= min(fig5.coherent_costs.as_ref().unwrap()) + 1e-9);

    for name in ["fig6", "fig7", "fig8"] {
        assert!(run(name).paired().iter().all(|(_, a, b)| b < a), "{name}");
    }

    let fig9 = run("fig9");
    let pairs = fig9.paired();
    assert!(pairs.iter().any(|(_, a, b)| b < a));
    assert!(pairs.iter().any(|(_, a, b)| b > a));
    let best = fig9.coherent_argmin().unwrap();
    assert!(pairs[best].2 <= pairs[best].1);
}

#[test]
fn estimator_is_stable_for_squeezed_pair() {
    let cfg = config("fig5");
    let hd = HomodyneConfig::single(f64::to_radians(30.0));
    let problem = build_problem(cfg.scheme, &cfg.plant, cfg.controller.as_ref(), &hd).unwrap();
    let est = qkl::estimator_realization(&problem).unwrap();
    assert_eq!(est.drift.shape(), (4, 4));
    let abscissa = qkl::linalg::spectral_abscissa(&est.drift).unwrap();
    assert!(abscissa < -1e-6, "{abscissa}");
    assert_eq!(est.readout, problem.estimand);
}
