//! Distributional checks on the forward sampler: exact spectrum support and
//! a chi-square goodness-of-fit against the model pmf.

use mfising::model::{ModelSummary, Theta};
use mfising::rng::RngSpec;
use mfising::simulate::Dataset;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn samples_live_exactly_on_the_spectrum() {
    let data =
        Dataset::sample(Theta::new(0.5, 0.3, 0.1), 20, 10_000, RngSpec::new(400, 0)).unwrap();
    let spectrum = data.spectrum();
    for &m in data.values() {
        let k = spectrum.index_of(m).expect("value off spectrum");
        assert_eq!(m, spectrum.atom(k), "value not bit-identical to its atom");
    }
}

#[test]
fn chi_square_goodness_of_fit() {
    let theta = Theta::new(0.5, 0.3, 0.1);
    let n = 20usize;
    let m_count = 1_000_000usize;
    let data = Dataset::sample(theta, n, m_count, RngSpec::new(401, 0)).unwrap();
    let summary = ModelSummary::new(theta, n).unwrap();
    let counts = data.atom_counts();

    // Merge atoms until each bin expects at least 5 observations.
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    let mut obs_acc = 0.0;
    let mut exp_acc = 0.0;
    for k in 0..=n {
        obs_acc += counts[k] as f64;
        exp_acc += summary.pmf[k] * m_count as f64;
        if exp_acc >= 5.0 {
            observed.push(obs_acc);
            expected.push(exp_acc);
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if exp_acc > 0.0 {
        *observed.last_mut().unwrap() += obs_acc;
        *expected.last_mut().unwrap() += exp_acc;
    }

    let statistic: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let dof = (observed.len() - 1) as f64;
    let critical = ChiSquared::new(dof).unwrap().inverse_cdf(0.999);
    assert!(
        statistic < critical,
        "chi-square {statistic} above the 0.1% critical value {critical} (dof {dof})"
    );
}

#[test]
fn stream_splitting_gives_fresh_datasets() {
    let theta = Theta::new(0.0, 1.2, 0.0);
    let a = Dataset::sample(theta, 300, 1000, RngSpec::new(402, 0)).unwrap();
    let b = Dataset::sample(theta, 300, 1000, RngSpec::new(402, 1)).unwrap();
    assert_ne!(a.values(), b.values());
    // Positionwise collisions should be no more frequent than chance: the
    // collision probability sum(p^2) for this pmf is well under 10%.
    let matches = a
        .values()
        .iter()
        .zip(b.values())
        .filter(|(x, y)| x == y)
        .count();
    assert!(matches < 150, "{matches}/1000 positions collide");
}
