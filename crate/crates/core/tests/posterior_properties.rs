//! Derivative identities for the posterior: the analytic gradient against
//! central finite differences, the metric against the finite-difference
//! Hessian, positive semidefiniteness, and mode consistency.

use mfising::model::Theta;
use mfising::posterior::{Posterior, PriorSpec};
use mfising::rng::RngSpec;
use mfising::simulate::Dataset;
use nalgebra::{Matrix3, Vector3};
use rand::Rng;

fn fd_gradient(post: &Posterior, theta: Theta, step: f64) -> Vector3<f64> {
    let mut grad = Vector3::zeros();
    for c in 0..3 {
        let mut up = theta.as_array();
        let mut dn = theta.as_array();
        up[c] += step;
        dn[c] -= step;
        grad[c] = (post.log_posterior(Theta::from_array(up)).unwrap()
            - post.log_posterior(Theta::from_array(dn)).unwrap())
            / (2.0 * step);
    }
    grad
}

fn fd_hessian_loglik(post: &Posterior, theta: Theta, step: f64) -> Matrix3<f64> {
    let mut hess = Matrix3::zeros();
    for c in 0..3 {
        let mut up = theta.as_array();
        let mut dn = theta.as_array();
        up[c] += step;
        dn[c] -= step;
        let diff = (post.grad_log_likelihood(Theta::from_array(up)).unwrap()
            - post.grad_log_likelihood(Theta::from_array(dn)).unwrap())
            / (2.0 * step);
        hess.set_column(c, &diff);
    }
    (hess + hess.transpose()) * 0.5
}

#[test]
fn gradient_and_metric_match_finite_differences() {
    let mut rng = RngSpec::new(200, 0).rng();
    for case in 0..100 {
        let gen = Theta::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-0.5..0.5),
        );
        let data = Dataset::sample(gen, 50, 20, RngSpec::new(200, 1 + case as u64)).unwrap();
        let post = Posterior::new(&data, PriorSpec::default()).unwrap();
        let theta = Theta::new(
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
        );

        let analytic = post.grad_log_posterior(theta).unwrap();
        let numeric = fd_gradient(&post, theta, 1e-5);
        for c in 0..3 {
            let denom = analytic[c].abs().max(numeric[c].abs()).max(1.0);
            assert!(
                (analytic[c] - numeric[c]).abs() / denom < 1e-6,
                "case {case}: gradient[{c}] {} vs {}",
                analytic[c],
                numeric[c]
            );
        }

        let metric = post.metric(theta, 0.0).unwrap();
        let hessian = fd_hessian_loglik(&post, theta, 1e-5);
        let err = (metric + hessian).norm() / metric.norm().max(1e-12);
        assert!(
            err < 1e-4,
            "case {case}: metric vs -Hessian relative error {err}"
        );
    }
}

#[test]
fn metric_is_positive_semidefinite() {
    let mut rng = RngSpec::new(201, 0).rng();
    let data = Dataset::sample(Theta::new(0.3, 0.2, 0.1), 50, 20, RngSpec::new(201, 1)).unwrap();
    let post = Posterior::new(&data, PriorSpec::default()).unwrap();
    for _ in 0..100 {
        let theta = Theta::new(
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
            rng.random_range(-1.5..1.5),
        );
        let g = post.metric(theta, 0.0).unwrap();
        let eigen = nalgebra::SymmetricEigen::new(g);
        let floor = -1e-8 * g.trace();
        for ev in eigen.eigenvalues.iter() {
            assert!(*ev >= floor, "eigenvalue {ev} below {floor} at {theta}");
        }
    }
}

#[test]
fn newton_refinement_drives_gradient_to_zero() {
    // Fisher scoring is exact Newton here (the metric is the negative
    // likelihood Hessian), so a handful of steps from a coarse start pins
    // the mode to machine scale.
    let truth = Theta::new(0.0, 0.0, 0.5);
    let data = Dataset::sample(truth, 300, 10_000, RngSpec::new(202, 0)).unwrap();
    let post = Posterior::new(&data, PriorSpec::default()).unwrap();

    let reference = post
        .grad_log_likelihood(Theta::new(0.0, 0.0, 0.0))
        .unwrap()
        .norm();
    let mut theta = Theta::new(0.2, -0.2, 0.4);
    for _ in 0..200 {
        let grad = post.grad_log_likelihood(theta).unwrap();
        let metric = post.metric(theta, 0.0).unwrap();
        let jitter = Matrix3::identity() * (1e-12 * metric.trace());
        let Some(step) = (metric + jitter).lu().solve(&grad) else {
            break;
        };
        let capped = if step.norm() > 0.5 {
            step * (0.5 / step.norm())
        } else {
            step
        };
        theta = Theta::new(
            theta.k + capped[0],
            theta.j + capped[1],
            theta.h + capped[2],
        );
    }
    let at_mode = post.grad_log_likelihood(theta).unwrap().norm();
    assert!(
        at_mode < 1e-3 * reference,
        "gradient norm {at_mode} at refined mode vs {reference} at origin"
    );
}

#[test]
fn permuting_observations_changes_nothing() {
    let data = Dataset::sample(Theta::new(0.5, 0.3, 0.1), 40, 200, RngSpec::new(203, 0)).unwrap();
    let mut reversed_values = data.values().to_vec();
    reversed_values.reverse();
    let reversed = Dataset::from_values(40, reversed_values, data.meta()).unwrap();
    let a = Posterior::new(&data, PriorSpec::default()).unwrap();
    let b = Posterior::new(&reversed, PriorSpec::default()).unwrap();
    for theta in [Theta::new(0.5, 0.3, 0.1), Theta::new(-1.0, 0.7, 0.2)] {
        assert_eq!(
            a.log_likelihood(theta).unwrap(),
            b.log_likelihood(theta).unwrap()
        );
        assert_eq!(
            a.grad_log_posterior(theta).unwrap(),
            b.grad_log_posterior(theta).unwrap()
        );
    }
}
