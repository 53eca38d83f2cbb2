mod common;

use common::*;
use handrecon::estimators::{
    estimate_map_noiseless, estimate_map_nullspace, estimate_mve, estimate_mve_information, estimate_pinv,
    general_solution, null_space_basis, posterior_covariance,
};
use handrecon::hand_model::HandModel;
use handrecon::{DMatrix, DVector, MeasurementModel, PriorModel};
use rand::Rng;
use rand_distr::StandardNormal;

fn two_dof_prior() -> PriorModel {
    let model = HandModel::from_names([("A".into(), String::new()), ("B".into(), String::new())]).unwrap();
    PriorModel::new(model, DVector::zeros(2), DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]), 0, 0.0).unwrap()
}

#[test]
fn constrained_optimum_matches_grid_search() {
    // minimise the Mahalanobis cost along the line x₁ = 2 by scanning x₂
    let prior = two_dof_prior();
    let inv = prior.cov().clone().try_inverse().unwrap();
    let cost = |x2: f64| {
        let d = DVector::from_vec(vec![2.0, x2]);
        (d.transpose() * &inv * &d)[(0, 0)]
    };
    let mut best = (f64::INFINITY, 0.0);
    let mut x2 = -10.0;
    while x2 <= 10.0 {
        let c = cost(x2);
        if c < best.0 {
            best = (c, x2);
        }
        x2 += 1e-4;
    }
    assert!((best.1 - 1.0).abs() < 2e-4, "grid optimum at {}", best.1);

    let h = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
    let y = DVector::from_vec(vec![2.0]);
    for est in [
        estimate_map_noiseless(&prior, &h, &y).unwrap(),
        estimate_map_nullspace(&prior, &h, &y).unwrap(),
    ] {
        assert!((est.x_hat[0] - 2.0).abs() < 1e-12);
        assert!((est.x_hat[1] - best.1).abs() < 2e-4);
        assert!((est.x_hat[1] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn noisy_posterior_mean_matches_monte_carlo() {
    // E[x | y = 2] by importance weighting prior draws with the likelihood
    let prior = two_dof_prior();
    let l = prior.cov().clone().cholesky().unwrap().l();
    let mut rng = rng(2024);
    let (mut wsum, mut acc) = (0.0, DVector::zeros(2));
    for _ in 0..400_000 {
        let x = &l * DVector::from_fn(2, |_, _| rng.sample::<f64, _>(StandardNormal));
        let w = (-0.5 * (2.0 - x[0]).powi(2)).exp();
        wsum += w;
        acc += x * w;
    }
    let mc = acc / wsum;
    assert!((mc[0] - 4.0 / 3.0).abs() < 0.02 && (mc[1] - 2.0 / 3.0).abs() < 0.02, "{mc}");

    let model = MeasurementModel::new(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]), DMatrix::from_element(1, 1, 1.0))
        .unwrap();
    let y = DVector::from_vec(vec![2.0]);
    let smw = estimate_mve(&prior, &model, &y).unwrap().x_hat;
    let info = estimate_mve_information(&prior, &model, &y).unwrap().x_hat;
    for x in [&smw, &info] {
        assert!((x - &mc).amax() < 0.02);
        assert!((x - DVector::from_vec(vec![4.0 / 3.0, 2.0 / 3.0])).amax() < 1e-12);
    }
}

#[test]
fn general_solution_satisfies_constraint() {
    let mut rng = rng(31);
    for _ in 0..50 {
        let h = gaussian_matrix(5, 15, &mut rng);
        let y = gaussian_vector(5, &mut rng) * 30.0;
        let xi = gaussian_vector(10, &mut rng) * 30.0;
        let x = general_solution(&h, &y, &xi).unwrap();
        assert!((&h * &x - &y).norm() < 1e-10);
        // the pseudo-inverse solution has the smallest norm of the family
        let x0 = estimate_pinv(&h, &y).unwrap().x_hat;
        assert!(x0.norm() <= x.norm() + 1e-12);
        assert!((general_solution(&h, &y, &DVector::zeros(10)).unwrap() - x0).amax() < 1e-12);
        let nb = null_space_basis(&h).unwrap();
        assert!((nb.transpose() * &nb - DMatrix::identity(10, 10)).amax() < 1e-12);
    }
}

#[test]
fn nullspace_and_lagrangian_forms_agree() {
    let model = hand();
    let mut rng = rng(100);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let prior = random_prior(&model, &mut rng);
        let h = gaussian_matrix(5, 15, &mut rng);
        let y = gaussian_vector(5, &mut rng) * 30.0;
        let a = estimate_map_noiseless(&prior, &h, &y).unwrap().x_hat;
        let b = estimate_map_nullspace(&prior, &h, &y).unwrap().x_hat;
        worst = worst.max(rel_dev(&b, &a));
        let y_mean = &h * prior.mu();
        assert!(rel_dev(&estimate_map_nullspace(&prior, &h, &y_mean).unwrap().x_hat, prior.mu()) < 1e-8);
    }
    assert!(worst < 1e-8, "worst deviation {worst:e}");
}

#[test]
fn information_and_gain_forms_agree() {
    let model = hand();
    let mut rng = rng(200);
    for _ in 0..100 {
        let prior = random_prior(&model, &mut rng);
        let h = gaussian_matrix(5, 15, &mut rng);
        let r = random_spd(5, 1.0, 50.0, &mut rng);
        let mm = MeasurementModel::new(h, r).unwrap();
        let y = gaussian_vector(5, &mut rng) * 30.0;
        let a = estimate_mve(&prior, &mm, &y).unwrap();
        let b = estimate_mve_information(&prior, &mm, &y).unwrap();
        assert!(rel_dev(&b.x_hat, &a.x_hat) < 1e-6);
        let pa = a.posterior_cov.unwrap();
        let pb = b.posterior_cov.unwrap();
        assert!((&pa - &pb).amax() / pa.amax() < 1e-6);
    }
}

#[test]
fn optimality_certificate() {
    let model = hand();
    let mut rng = rng(300);
    for _ in 0..20 {
        let prior = random_prior(&model, &mut rng);
        let h = gaussian_matrix(5, 15, &mut rng);
        let y = gaussian_vector(5, &mut rng) * 30.0;
        let x = estimate_map_noiseless(&prior, &h, &y).unwrap().x_hat;
        let base = mahalanobis_cost(&prior, &x);
        let nb = null_space_basis(&h).unwrap();
        for _ in 0..20 {
            let dir = &nb * gaussian_vector(10, &mut rng);
            let dir = &dir / dir.norm();
            for step in [1e-4, -1e-4] {
                assert!(mahalanobis_cost(&prior, &(&x + &dir * step)) > base);
            }
        }
    }
}

#[test]
fn posterior_trace_never_grows() {
    let model = hand();
    let mut rng = rng(400);
    for k in 0..100 {
        let prior = random_prior(&model, &mut rng);
        let m = 1 + k % 15;
        let h = gaussian_matrix(m, 15, &mut rng);
        let r = if k % 2 == 0 { DMatrix::zeros(m, m) } else { random_spd(m, 0.1, 10.0, &mut rng) };
        let mm = MeasurementModel::new(h, r).unwrap();
        let post = posterior_covariance(&prior, &mm).unwrap();
        assert!(post.trace() <= prior.cov().trace() * (1.0 + 1e-12));
    }
}

#[test]
fn identity_prior_at_origin_is_pinv() {
    let model = hand();
    let mut rng = rng(500);
    let prior = PriorModel::new(model, DVector::zeros(15), DMatrix::identity(15, 15), 0, 0.0).unwrap();
    for _ in 0..20 {
        let h = gaussian_matrix(5, 15, &mut rng);
        let y = gaussian_vector(5, &mut rng);
        let a = estimate_map_noiseless(&prior, &h, &y).unwrap().x_hat;
        let b = estimate_pinv(&h, &y).unwrap().x_hat;
        assert!((a - b).amax() < 1e-12);
    }
}
