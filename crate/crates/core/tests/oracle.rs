mod common;

use common::configurations;
use qkl::estimation::{build_problem, HomodyneConfig};
use qkl::linalg::{hermitian_eigenvalues, max_abs, op_norm};
use qkl::riccati::default_oracle_horizon;
use qkl::{care_residual, integrate_care_oracle, solve_care, Scheme};

#[test]
fn solver_matches_integrated_riccati_flow() {
    for cfg in configurations() {
        for deg in [0.0, 30.0, 90.0, 150.0] {
            let hd = HomodyneConfig::single(f64::to_radians(deg));
            let schemes = match cfg.scheme {
                Scheme::Classical => vec![Scheme::Classical],
                s => vec![Scheme::Classical, s],
            };
            for scheme in schemes {
                let problem =
                    build_problem(scheme, &cfg.plant, cfg.controller.as_ref(), &hd).unwrap();
                let fd = &problem.filter;
                let sol = solve_care(fd).unwrap();
                let p = &sol.covariance;
                let tag = format!("{} {:?} {deg}", cfg.name, scheme);
                assert!(care_residual(fd, p).unwrap() <= 1e-9, "{tag}");
                assert!(max_abs(&(p - p.adjoint())) <= 1e-12, "{tag}");
                assert!(hermitian_eigenvalues(p)[0] >= -1e-10, "{tag}");
                assert!(sol.closed_loop_abscissa() < 0.0, "{tag}");
                let oracle =
                    integrate_care_oracle(fd, default_oracle_horizon(fd).unwrap(), 1e-3).unwrap();
                assert!(op_norm(&(&oracle - p)) <= 1e-6, "{tag}");
            }
        }
    }
}
