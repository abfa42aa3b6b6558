//! Whole-model properties: normalization, closed forms, symmetry, the
//! configuration-count bracket, and the pressure sandwich. Expected values
//! come from independent oracles (exact big-integer binomials, bisection
//! root finding, closed-form identities), not from the code under test.

use mfising::model::{
    entropy, lemma1_gap, log_count, pressure_limit, solve_consistency, LogCountTable, ModelSummary,
    Spectrum, Theta,
};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::Rng;

const LN_2: f64 = std::f64::consts::LN_2;
const PI: f64 = std::f64::consts::PI;

/// Exact ln C(n, k) through big-integer arithmetic.
fn ln_binomial_exact(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c *= n - i;
        c /= i + 1;
    }
    let bits = c.bits();
    if bits <= 1000 {
        c.to_f64().expect("fits f64 range").ln()
    } else {
        let shift = bits - 900;
        let top = (c >> shift).to_f64().expect("900 bits fit");
        top.ln() + shift as f64 * LN_2
    }
}

fn random_theta(rng: &mut impl Rng, scale: f64) -> Theta {
    Theta::new(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

#[test]
fn pmf_normalizes_for_random_parameters() {
    let mut rng = mfising::RngSpec::new(100, 0).rng();
    let tables: Vec<LogCountTable> = [1usize, 2, 17, 300]
        .iter()
        .map(|&n| LogCountTable::new(n).unwrap())
        .collect();
    for _ in 0..1000 {
        let theta = random_theta(&mut rng, 2.0);
        for table in &tables {
            let s = ModelSummary::compute(theta, table).unwrap();
            let total: f64 = s.pmf.iter().sum();
            assert!(
                (total - 1.0).abs() < 1e-12,
                "pmf sum {total} at n={} theta={theta}",
                table.n()
            );
            assert!(s.pmf.iter().all(|&p| p >= 0.0));
        }
    }
}

#[test]
fn moment_bounds_and_cauchy_schwarz() {
    let mut rng = mfising::RngSpec::new(101, 0).rng();
    for _ in 0..200 {
        let theta = random_theta(&mut rng, 2.0);
        let s = ModelSummary::new(theta, 61).unwrap();
        let [m1, m2, m3, m4, m5, m6] = s.mu;
        for odd in [m1, m3, m5] {
            assert!((-1.0..=1.0).contains(&odd));
        }
        for even in [m2, m4, m6] {
            assert!((0.0..=1.0).contains(&even));
        }
        assert!(m2 >= m1 * m1 - 1e-15);
        assert!(m4 >= m2 * m2 - 1e-15);
        assert!(m6 >= m3 * m3 - 1e-15);
    }
}

#[test]
fn closed_form_free_and_biased_spins() {
    for n in [1usize, 10, 300, 1000] {
        for h in [-1.0f64, -0.5, 0.0, 0.5, 1.0] {
            let s = ModelSummary::new(Theta::new(0.0, 0.0, h), n).unwrap();
            let expected_log_z = n as f64 * (2.0 * h.cosh()).ln();
            assert!(
                (s.log_z - expected_log_z).abs() < 1e-10,
                "log Z at n={n} h={h}: {} vs {expected_log_z}",
                s.log_z
            );
            assert!(
                (s.mean() - h.tanh()).abs() < 1e-12,
                "mean at n={n} h={h}: {} vs {}",
                s.mean(),
                h.tanh()
            );
        }
    }
}

#[test]
fn spin_flip_symmetry_is_exact() {
    let mut rng = mfising::RngSpec::new(102, 0).rng();
    for _ in 0..100 {
        let j = rng.random_range(-2.0..2.0);
        let s = ModelSummary::new(Theta::new(0.0, j, 0.0), 300).unwrap();
        assert!(s.mu[0].abs() + s.mu[2].abs() + s.mu[4].abs() < 1e-12);
        for k in 0..=300 {
            assert!(
                (s.pmf[k] - s.pmf[300 - k]).abs() < 1e-14,
                "pmf asymmetry at j={j} k={k}"
            );
        }
    }
}

#[test]
fn log_count_matches_big_integer_binomials() {
    let table = LogCountTable::new(300).unwrap();
    for k in [0usize, 1, 2, 7, 75, 150, 299] {
        let exact = ln_binomial_exact(300, k as u64);
        let got = table.log_count_at(k);
        assert!(
            (got - exact).abs() <= 1e-9 * exact.abs().max(1.0),
            "log C(300, {k}): {got} vs {exact}"
        );
    }
    let spectrum = Spectrum::new(300).unwrap();
    assert_eq!(
        log_count(300, spectrum.atom(150)).unwrap(),
        table.log_count_at(150)
    );
}

#[test]
fn log_count_accuracy_at_a_million() {
    let n = 1_000_000usize;
    let table = LogCountTable::new(n).unwrap();
    // Small k: exact values are representable directly.
    let exact_k2 = (n as f64 * (n as f64 - 1.0) / 2.0).ln();
    assert!((table.log_count_at(2) - exact_k2).abs() < 1e-9 * exact_k2);
    // Central k: Robbins' factorial bounds pin the value far more tightly
    // than the 1e-9 relative contract; their own evaluation carries a few
    // ulps of rounding at this magnitude, so compare relative to the
    // midpoint.
    let k = n / 2;
    let stirling = |m: f64| 0.5 * (2.0 * PI * m).ln() + m * m.ln() - m;
    let base = stirling(n as f64) - 2.0 * stirling(k as f64);
    let mid = base + 1.0 / (12.0 * n as f64) - 2.0 / (12.0 * k as f64);
    let got = table.log_count_at(k);
    assert!(
        (got - mid).abs() <= 1e-9 * mid.abs(),
        "log C(1e6, 5e5) = {got} vs certified {mid}"
    );
}

#[test]
fn lemma1_gap_brackets_every_interior_atom() {
    // Upper bound: gap <= 0. Lower bound: the Stirling prefactor plus the
    // Robbins correction, which depends on how close the atom is to the
    // boundary; at the central atom it reduces to about -1/(4n).
    for n in [10usize, 100, 300] {
        let spectrum = Spectrum::new(n).unwrap();
        for k in 1..n {
            let m = spectrum.atom(k);
            let gap = lemma1_gap(n, m).unwrap();
            assert!(gap <= 0.0, "gap {gap} > 0 at n={n} k={k}");
            let prefactor = 0.5 * (2.0 / (PI * n as f64 * (1.0 - m * m))).ln();
            let robbins = 1.0 / (12.0 * n as f64 + 1.0)
                - 1.0 / (12.0 * k as f64)
                - 1.0 / (12.0 * (n - k) as f64);
            assert!(
                gap >= prefactor + robbins,
                "gap {gap} below bound {} at n={n} k={k}",
                prefactor + robbins
            );
            // Independent verification against exact binomials.
            let exact_gap = ln_binomial_exact(n as u64, k as u64) + n as f64 * entropy(m).unwrap();
            assert!((gap - exact_gap).abs() < 1e-9);
        }
        // At the central atom the -1/(4n) form of the correction holds.
        if n % 2 == 0 {
            let gap = lemma1_gap(n, 0.0).unwrap();
            let prefactor = 0.5 * (2.0 / (PI * n as f64)).ln();
            assert!(gap >= prefactor - 1.0 / (4.0 * n as f64));
        }
    }
}

#[test]
fn pressure_sandwich_for_random_parameters() {
    let mut rng = mfising::RngSpec::new(103, 0).rng();
    for _ in 0..50 {
        let theta = random_theta(&mut rng, 2.0);
        let (p, _) = pressure_limit(theta, 1e-9).unwrap();
        for n in [100usize, 300, 1000] {
            let s = ModelSummary::new(theta, n).unwrap();
            let nf = n as f64;
            let diff = s.log_z / nf - p;
            let lower = -(3.0 + 0.5 * nf.ln()) / nf;
            let upper = ((nf + 1.0).ln()) / nf;
            assert!(
                diff >= lower && diff <= upper,
                "pressure gap {diff} outside [{lower}, {upper}] at n={n} theta={theta}"
            );
        }
    }
}

#[test]
fn pressure_argmax_satisfies_consistency_equation() {
    let mut rng = mfising::RngSpec::new(104, 0).rng();
    for _ in 0..50 {
        let theta = random_theta(&mut rng, 2.0);
        let (_, argmax) = pressure_limit(theta, 1e-9).unwrap();
        assert!(!argmax.is_empty());
        for m in argmax {
            let residual = (m - theta.consistency_map(m)).abs();
            assert!(
                residual < 1e-8,
                "maximizer {m} violates consistency by {residual} at theta={theta}"
            );
        }
    }
}

#[test]
fn pmf_mean_tracks_consistency_root_with_refinement() {
    let theta = Theta::new(0.0, 0.0, 0.5);
    let target = 0.5f64.tanh();
    let root = solve_consistency(theta, 0.0, 1e-14, 1000).unwrap();
    let mut previous = f64::INFINITY;
    for n in [50usize, 300, 3000] {
        let mean = ModelSummary::new(theta, n).unwrap().mean();
        assert!(
            (mean - target).abs() <= 2.0 / n as f64,
            "mean {mean} further than 2/{n} from tanh(0.5)"
        );
        let gap = (mean - root).abs();
        assert!(gap <= previous + 1e-12, "gap {gap} grew at n={n}");
        previous = gap;
    }
}

#[test]
fn divergent_fixed_point_iteration_reports_last_iterate() {
    // At the critical point from a poor start with too few iterations the
    // solver must hand back its last state instead of a bogus root.
    match solve_consistency(Theta::new(0.0, 1.2, 0.0), 0.9, 1e-15, 3) {
        Err(mfising::Error::NonConvergence { last, residual, .. }) => {
            assert!(last.abs() <= 1.0);
            assert!(residual.abs() > 0.0);
        }
        other => panic!("expected NonConvergence, got {other:?}"),
    }
}
