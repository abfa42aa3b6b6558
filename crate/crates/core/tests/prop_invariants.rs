//! Property tests over randomized inputs.

use mfising::model::{entropy, ModelSummary, Spectrum, Theta};
use mfising::posterior::{Posterior, PriorSpec};
use mfising::simulate::{Dataset, DatasetMeta};
use proptest::prelude::*;

proptest! {
    #[test]
    fn entropy_range_and_symmetry(m in -1.0f64..=1.0) {
        let i = entropy(m).unwrap();
        prop_assert!((-std::f64::consts::LN_2 - 1e-15..=0.0).contains(&i));
        prop_assert!((i - entropy(-m).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn pmf_is_a_distribution(
        k in -2.0f64..2.0,
        j in -2.0f64..2.0,
        h in -2.0f64..2.0,
        n in 1usize..200,
    ) {
        let s = ModelSummary::new(Theta::new(k, j, h), n).unwrap();
        let total: f64 = s.pmf.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(s.pmf.iter().all(|&p| (0.0..=1.0).contains(&p)));
        prop_assert!(s.log_z.is_finite());
    }

    #[test]
    fn spectrum_roundtrip(n in 1usize..500, k in 0usize..500) {
        let k = k % (n + 1);
        let spectrum = Spectrum::new(n).unwrap();
        prop_assert_eq!(spectrum.index_of(spectrum.atom(k)).unwrap(), k);
    }

    #[test]
    fn suffstats_match_any_value_multiset(indices in prop::collection::vec(0usize..=30, 1..40)) {
        let spectrum = Spectrum::new(30).unwrap();
        let values: Vec<f64> = indices.iter().map(|&k| spectrum.atom(k)).collect();
        let meta = DatasetMeta { theta_true: None, seed: 0, stream: 0 };
        let data = Dataset::from_values(30, values.clone(), meta).unwrap();
        let s = data.suffstats();
        let s1: f64 = values.iter().sum();
        let s2: f64 = values.iter().map(|m| m * m).sum();
        let s3: f64 = values.iter().map(|m| m * m * m).sum();
        prop_assert!((s.s1 - s1).abs() < 1e-10);
        prop_assert!((s.s2 - s2).abs() < 1e-10);
        prop_assert!((s.s3 - s3).abs() < 1e-10);
    }

    #[test]
    fn log_posterior_is_finite_on_sane_parameters(
        k in -3.0f64..3.0,
        j in -3.0f64..3.0,
        h in -3.0f64..3.0,
        seed in 0u64..32,
    ) {
        let data = Dataset::sample(
            Theta::new(0.2, 0.4, -0.1),
            25,
            15,
            mfising::RngSpec::new(seed, 0),
        ).unwrap();
        let post = Posterior::new(&data, PriorSpec::default()).unwrap();
        let lp = post.log_posterior(Theta::new(k, j, h)).unwrap();
        prop_assert!(lp.is_finite());
        let grad = post.grad_log_posterior(Theta::new(k, j, h)).unwrap();
        prop_assert!(grad.iter().all(|g| g.is_finite()));
    }
}
