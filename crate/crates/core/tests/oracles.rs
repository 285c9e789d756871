//! Values checked against closed forms worked out by hand.

use sppm_core::linalg::{dist, norm};
use sppm_core::theory::{
    bound_curve, estimate_sigma_star, BoundKind, BoundParams, MeanTrajectory,
};
use sppm_core::{prox_exact_radial, sppm, InnerSolverConfig, ProblemInstance, ProxQuery, RunConfig};

#[test]
fn quartic_prox_in_one_dimension() {
    // y + 4y³ = 1 at y = 1/2.
    let p = ProblemInstance::power_norm_with_coefficients(1, 2, vec![1.0]).unwrap();
    let r = prox_exact_radial(&ProxQuery::new(&p, 0, &[1.0], 1.0).unwrap()).unwrap();
    assert!((r.point[0] - 0.5).abs() < 1e-14);
}

#[test]
fn quartic_prox_is_radial_in_higher_dimension() {
    // ‖x‖ = 5 with direction (3, 4)/5; the radius solves y + 2·2·0.5·y³ = 5.
    let p = ProblemInstance::power_norm_with_coefficients(2, 2, vec![0.5]).unwrap();
    let x = [3.0, 4.0];
    let r = prox_exact_radial(&ProxQuery::new(&p, 0, &x, 1.0).unwrap()).unwrap();
    let rho = norm(&r.point);
    assert!((rho + 2.0 * rho.powi(3) - 5.0).abs() < 1e-12);
    assert!((r.point[0] / r.point[1] - 0.75).abs() < 1e-14);
}

#[test]
fn quadratic_prox_is_a_convex_combination() {
    let p = ProblemInstance::shifted_quadratic_with_shifts(2, vec![vec![1.0, -1.0]]).unwrap();
    let r = prox_exact_radial(&ProxQuery::new(&p, 0, &[3.0, 3.0], 3.0).unwrap()).unwrap();
    // (x + γb)/(1 + γ) = ((3+3)/4, (3−3)/4)
    assert!(dist(&r.point, &[1.5, 0.0]) < 1e-15);
}

#[test]
fn sigma_star_matches_closed_form() {
    let p = ProblemInstance::shifted_quadratic(30, 5, 2.0, 11).unwrap();
    let expected = p.known_constants().sigma_star_sq.unwrap();
    assert_eq!(estimate_sigma_star(&p, p.minimizer()), expected);
}

#[test]
fn strong_convexity_bound_examples() {
    let params = BoundParams { gamma: 1.0, mu: 0.02, phi_value: 10.0, r0_sq: 1.0, ..Default::default() };
    let b = bound_curve(BoundKind::StronglyConvexExact, params).unwrap();
    assert!((b.contraction_factor().unwrap() - (1.0 - 0.02 / 12.0)).abs() < 1e-15);

    let params = BoundParams { gamma: 4.0, mu: 1.0, r0_sq: 1.0, ..Default::default() };
    let b = bound_curve(BoundKind::SimilarityExact, params).unwrap();
    assert_eq!(b.contraction_factor(), Some(0.5));

    let params = BoundParams { gamma: 0.1, mu: 1.0, sigma_star_sq: 1.0, ..Default::default() };
    let b = bound_curve(BoundKind::NeighborhoodExact, params).unwrap();
    assert!((b.floor() - 0.8).abs() < 1e-12);
}

#[test]
fn runs_started_at_the_solution_trivially_satisfy_the_bounds() {
    let p = ProblemInstance::power_norm(5, 3, 2, 1).unwrap();
    let runs: Vec<_> = (0..3)
        .map(|seed| {
            let cfg = RunConfig::new(1.0, p.minimizer().to_vec(), 20, seed)
                .with_inner(InnerSolverConfig::exact());
            sppm(&p, &cfg).unwrap()
        })
        .collect();
    let mean = MeanTrajectory::from_runs(&runs).unwrap();
    assert!(mean.dist_sq.iter().all(|&v| v == 0.0));
    let curve = bound_curve(
        BoundKind::ConvexExact,
        BoundParams { gamma: 1.0, phi_value: 4.0, ..Default::default() },
    )
    .unwrap();
    let report = sppm_core::theory::check_bound_dominance(&mean, &curve, 1.0).unwrap();
    assert!(report.holds());
    let infinite = sppm_core::theory::check_bound_dominance(&mean, &curve, f64::INFINITY);
    assert!(infinite.unwrap().holds());
}

#[test]
fn horizon_mismatch_is_reported() {
    let p = ProblemInstance::shifted_quadratic(4, 2, 1.0, 1).unwrap();
    let run = |k| sppm(&p, &RunConfig::new(0.5, vec![1.0, 1.0], k, 0)).unwrap();
    let err = MeanTrajectory::from_runs(&[run(5), run(6)]).unwrap_err();
    assert_eq!(err, sppm_core::theory::TheoryError::HorizonMismatch { expected: 6, got: 7 });
}
