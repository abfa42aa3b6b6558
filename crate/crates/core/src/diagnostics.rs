//! Convergence diagnostics, posterior summaries, model-density comparison,
//! and the interval-coverage simulation study.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSummary, Theta};
use crate::posterior::{Posterior, PriorSpec};
use crate::rng::RngSpec;
use crate::samplers::{grid_init, run_chain, Chain, GridSpec, SamplerConfig};
use crate::simulate::Dataset;

/// Classic Gelman-Rubin potential scale reduction factor per parameter.
///
/// With `c` chains of post-burn-in length `n`: `B/n` is the variance of the
/// chain means, `W` the mean within-chain variance,
/// `V = (n-1)/n W + B/n`, and `PSRF = sqrt(V/W)`, floored at 1. Constant
/// chains (`W = 0`) report `+inf` for the affected parameter.
pub fn gelman_rubin(chains: &[Chain], burn_in: usize) -> Result<[f64; 3]> {
    if chains.len() < 2 {
        return Err(Error::InvalidChains("need at least 2 chains".into()));
    }
    let len = chains[0].len();
    if chains.iter().any(|c| c.len() != len) {
        return Err(Error::InvalidChains("chains have unequal lengths".into()));
    }
    if len < burn_in + 2 {
        return Err(Error::InvalidChains(format!(
            "chains of length {len} leave fewer than 2 draws after burn-in {burn_in}"
        )));
    }

    let mut psrf = [0.0f64; 3];
    for (c, slot) in psrf.iter_mut().enumerate() {
        let per_chain: Vec<Vec<f64>> = chains.iter().map(|ch| ch.component(c, burn_in)).collect();
        let n = per_chain[0].len() as f64;
        let means: Vec<f64> = per_chain.iter().map(|d| mean(d)).collect();
        // A chain that never moved has zero variance by definition; computing
        // it through the mean would leave rounding dust instead of zero.
        let within = mean(
            &per_chain
                .iter()
                .map(|d| {
                    if d.iter().all(|&x| x == d[0]) {
                        0.0
                    } else {
                        sample_variance(d)
                    }
                })
                .collect::<Vec<_>>(),
        );
        let between_over_n = sample_variance(&means);
        *slot = if within == 0.0 {
            f64::INFINITY
        } else {
            let v_hat = (n - 1.0) / n * within + between_over_n;
            (v_hat / within).sqrt().max(1.0)
        };
    }
    Ok(psrf)
}

/// Split-halves variant: each chain is cut in two and the classic statistic
/// is applied to the 2c half-chains.
pub fn gelman_rubin_split(chains: &[Chain], burn_in: usize) -> Result<[f64; 3]> {
    if chains.is_empty() {
        return Err(Error::InvalidChains("need at least 1 chain".into()));
    }
    let len = chains[0].len();
    if chains.iter().any(|c| c.len() != len) {
        return Err(Error::InvalidChains("chains have unequal lengths".into()));
    }
    let kept = len.saturating_sub(burn_in);
    if kept < 4 {
        return Err(Error::InvalidChains(
            "need at least 4 post-burn-in draws to split".into(),
        ));
    }
    let half = kept / 2;
    let mut halves: Vec<Chain> = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        let kept_draws = chain.kept(burn_in);
        for part in [&kept_draws[..half], &kept_draws[kept - half..]] {
            let n = part.len();
            halves.push(Chain::new(
                part.to_vec(),
                vec![crate::samplers::KernelTag::Amh; n],
                vec![true; n],
                vec![0.0; n],
            )?);
        }
    }
    gelman_rubin(&halves, 0)
}

/// Posterior summary over pooled post-burn-in draws.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub psrf: [f64; 3],
    #[serde(rename = "mean")]
    pub post_mean: [f64; 3],
    pub ci: [[f64; 2]; 3],
    #[serde(rename = "level")]
    pub ci_level: f64,
    pub n_chains: usize,
    pub draws_used: usize,
}

impl DiagnosticsReport {
    pub fn covers(&self, theta: &Theta) -> [bool; 3] {
        let t = theta.as_array();
        std::array::from_fn(|c| self.ci[c][0] <= t[c] && t[c] <= self.ci[c][1])
    }

    pub fn widths(&self) -> [f64; 3] {
        std::array::from_fn(|c| self.ci[c][1] - self.ci[c][0])
    }

    pub fn max_psrf(&self) -> f64 {
        self.psrf.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Pools post-burn-in draws across chains; returns means, equal-tailed
/// quantile intervals at `level`, and the PSRF (NaN with fewer than two
/// chains).
pub fn summarize(chains: &[Chain], burn_in: usize, level: f64) -> Result<DiagnosticsReport> {
    if chains.is_empty() {
        return Err(Error::InvalidChains("need at least 1 chain".into()));
    }
    if !(0.0 < level && level < 1.0) {
        return Err(Error::InvalidConfig(
            "interval level must lie in (0, 1)".into(),
        ));
    }
    let psrf = if chains.len() >= 2 {
        gelman_rubin(chains, burn_in)?
    } else {
        [f64::NAN; 3]
    };

    let mut post_mean = [0.0f64; 3];
    let mut ci = [[0.0f64; 2]; 3];
    let mut draws_used = 0;
    for c in 0..3 {
        let mut pooled: Vec<f64> = chains
            .iter()
            .flat_map(|ch| ch.component(c, burn_in))
            .collect();
        if pooled.is_empty() {
            return Err(Error::InvalidChains("burn-in leaves no draws".into()));
        }
        draws_used = pooled.len();
        // Sorting first makes the summary exactly invariant to chain and
        // draw order: quantiles and the mean both see one multiset.
        pooled.sort_by(f64::total_cmp);
        post_mean[c] = mean(&pooled);
        let alpha = 1.0 - level;
        ci[c] = [
            quantile(&pooled, alpha / 2.0),
            quantile(&pooled, 1.0 - alpha / 2.0),
        ];
    }

    Ok(DiagnosticsReport {
        psrf,
        post_mean,
        ci,
        ci_level: level,
        n_chains: chains.len(),
        draws_used,
    })
}

/// Model mean magnetization `mu_1(theta, n)`: the scalar traced to expose
/// what a poorly identified parameter triple still pins down.
pub fn theoretical_mean(theta: Theta, n: usize) -> Result<f64> {
    Ok(ModelSummary::new(theta, n)?.mean())
}

/// Total variation distance between the two magnetization pmfs on the
/// size-`n` spectrum.
pub fn density_compare(theta_a: Theta, theta_b: Theta, n: usize) -> Result<f64> {
    let a = ModelSummary::new(theta_a, n)?;
    let b = ModelSummary::new(theta_b, n)?;
    Ok(0.5
        * a.pmf
            .iter()
            .zip(&b.pmf)
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>())
}

/// Interval-coverage study: simulate replicated datasets at a fixed truth,
/// fit each with one chain, and tally how often the equal-tailed intervals
/// contain the truth.
#[derive(Debug, Clone)]
pub struct CoverageStudy {
    pub theta_true: Theta,
    pub n: usize,
    pub m_count: usize,
    pub n_reps: usize,
    pub level: f64,
    pub sampler: SamplerConfig,
    pub grid: GridSpec,
    pub prior: PriorSpec,
    /// Seed source for the replicated datasets; replication `r` uses
    /// `stream + r`. Chains use the sampler config's own seed with stream
    /// offsets, so keep the two seeds or stream windows apart.
    pub rng: RngSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageResult {
    pub theta_true: Theta,
    pub n_replications: usize,
    pub coverage: [f64; 3],
    pub mean_width: [f64; 3],
    /// Replication indices whose chain failed; they count in
    /// `n_replications` but contribute no hits.
    pub failed_reps: Vec<usize>,
}

impl CoverageStudy {
    pub fn run(&self) -> Result<CoverageResult> {
        if self.n_reps == 0 {
            return Err(Error::InvalidConfig(
                "coverage study needs n_reps >= 1".into(),
            ));
        }
        let outcomes: Vec<Result<DiagnosticsReport>> = (0..self.n_reps)
            .into_par_iter()
            .map(|r| self.replication(r))
            .collect();
        let mut hits = [0usize; 3];
        let mut width_sum = [0.0f64; 3];
        let mut completed = 0usize;
        let mut failed = Vec::new();
        for (r, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(report) => {
                    let cover = report.covers(&self.theta_true);
                    let widths = report.widths();
                    for c in 0..3 {
                        hits[c] += cover[c] as usize;
                        width_sum[c] += widths[c];
                    }
                    completed += 1;
                }
                Err(_) => failed.push(r),
            }
        }
        if completed == 0 {
            return Err(Error::InvalidChains(
                "every coverage replication failed".into(),
            ));
        }
        Ok(CoverageResult {
            theta_true: self.theta_true,
            n_replications: self.n_reps,
            coverage: std::array::from_fn(|c| hits[c] as f64 / self.n_reps as f64),
            mean_width: std::array::from_fn(|c| width_sum[c] / completed as f64),
            failed_reps: failed,
        })
    }

    pub fn replication(&self, r: usize) -> Result<DiagnosticsReport> {
        let data_rng = self.rng.with_stream(self.rng.stream + r as u64);
        let data = Dataset::sample(self.theta_true, self.n, self.m_count, data_rng)?;
        let posterior = Posterior::new(&data, self.prior)?;
        let start = grid_init(&posterior, &self.grid)?;
        let mut cfg = self.sampler;
        cfg.rng = cfg.rng.with_stream(cfg.rng.stream + r as u64);
        let chain = run_chain(&posterior, &cfg, start)?;
        summarize(&[chain], cfg.burn_in, self.level)
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::KernelTag;
    use rand::Rng;

    fn chain_from(values: Vec<[f64; 3]>) -> Chain {
        let n = values.len();
        Chain::new(
            values.into_iter().map(Theta::from_array).collect(),
            vec![KernelTag::Amh; n],
            vec![true; n],
            vec![0.0; n],
        )
        .unwrap()
    }

    fn gaussian_chain(seed: u64, n: usize, shift: f64, sd: f64) -> Chain {
        let mut rng = RngSpec::new(seed, 0).rng();
        let values: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                std::array::from_fn(|_| {
                    shift + sd * rng.sample::<f64, _>(rand_distr::StandardNormal)
                })
            })
            .collect();
        chain_from(values)
    }

    #[test]
    fn identical_chains_floor_at_one() {
        let a = gaussian_chain(1, 500, 0.0, 1.0);
        let psrf = gelman_rubin(&[a.clone(), a], 0).unwrap();
        assert_eq!(psrf, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn iid_chains_near_one() {
        let chains = [
            gaussian_chain(1, 10_000, 0.0, 1.0),
            gaussian_chain(2, 10_000, 0.0, 1.0),
        ];
        let psrf = gelman_rubin(&chains, 0).unwrap();
        for v in psrf {
            assert!(v < 1.01, "psrf {v}");
        }
    }

    #[test]
    fn separated_chains_blow_up() {
        let chains = [
            gaussian_chain(1, 2000, 10.0, 0.1),
            gaussian_chain(2, 2000, -10.0, 0.1),
        ];
        let psrf = gelman_rubin(&chains, 0).unwrap();
        for v in psrf {
            assert!(v > 10.0, "psrf {v}");
        }
    }

    #[test]
    fn constant_chains_report_infinity() {
        let a = chain_from(vec![[1.0, 2.0, 3.0]; 50]);
        let b = chain_from(vec![[1.5, 2.0, 3.0]; 50]);
        let psrf = gelman_rubin(&[a, b], 0).unwrap();
        assert!(psrf.iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = gaussian_chain(1, 100, 0.0, 1.0);
        assert!(gelman_rubin(&[a.clone()], 0).is_err());
        let short = gaussian_chain(2, 50, 0.0, 1.0);
        assert!(gelman_rubin(&[a.clone(), short], 0).is_err());
        assert!(gelman_rubin(&[a.clone(), a], 99).is_err());
    }

    #[test]
    fn split_variant_runs() {
        let chains = [
            gaussian_chain(1, 4000, 0.0, 1.0),
            gaussian_chain(2, 4000, 0.0, 1.0),
        ];
        let split = gelman_rubin_split(&chains, 0).unwrap();
        for v in split {
            assert!(v < 1.02, "split psrf {v}");
        }
    }

    #[test]
    fn summarize_constant_chain() {
        let chain = chain_from(vec![[0.4, -0.2, 0.9]; 20]);
        let report = summarize(&[chain], 0, 0.95).unwrap();
        for (got, want) in report.post_mean.iter().zip([0.4, -0.2, 0.9]) {
            assert!((got - want).abs() < 1e-12);
        }
        for c in 0..3 {
            assert_eq!(report.ci[c][0], report.ci[c][1]);
        }
        assert!(report.psrf[0].is_nan());
        assert_eq!(report.draws_used, 20);
    }

    #[test]
    fn summarize_uniform_quantiles() {
        let mut rng = RngSpec::new(8, 0).rng();
        let values: Vec<[f64; 3]> = (0..10_000)
            .map(|_| std::array::from_fn(|_| rng.random()))
            .collect();
        let report = summarize(&[chain_from(values)], 0, 0.95).unwrap();
        for c in 0..3 {
            assert!((report.ci[c][0] - 0.025).abs() < 0.01);
            assert!((report.ci[c][1] - 0.975).abs() < 0.01);
        }
    }

    #[test]
    fn summarize_is_permutation_invariant() {
        let mut rng = RngSpec::new(9, 0).rng();
        let values: Vec<[f64; 3]> = (0..500)
            .map(|_| std::array::from_fn(|_| rng.random()))
            .collect();
        let mut reversed = values.clone();
        reversed.reverse();
        let a = summarize(
            &[chain_from(values.clone()), chain_from(reversed.clone())],
            0,
            0.9,
        )
        .unwrap();
        let b = summarize(&[chain_from(reversed), chain_from(values)], 0, 0.9).unwrap();
        assert_eq!(a.post_mean, b.post_mean);
        assert_eq!(a.ci, b.ci);
    }

    #[test]
    fn theoretical_mean_cases() {
        assert!(
            (theoretical_mean(Theta::new(0.0, 0.0, 0.5), 300).unwrap() - 0.5f64.tanh()).abs()
                < 1e-12
        );
        assert_eq!(
            theoretical_mean(Theta::new(0.0, 1.2, 0.0), 300).unwrap(),
            0.0
        );
    }

    #[test]
    fn theoretical_mean_near_consistency_root() {
        let theta = Theta::new(0.5, 0.3, 0.9);
        let b = theoretical_mean(theta, 300).unwrap();
        let root = crate::model::solve_consistency(theta, 0.9, 1e-12, 10_000).unwrap();
        assert!((b - root).abs() < 0.01, "b {b} vs root {root}");
    }

    #[test]
    fn density_compare_basic() {
        let a = Theta::new(0.5, 0.3, 0.1);
        assert_eq!(density_compare(a, a, 300).unwrap(), 0.0);
        let far =
            density_compare(Theta::new(0.0, 0.0, 0.0), Theta::new(0.0, 0.0, 10.0), 300).unwrap();
        assert!(far > 0.99, "tv {far}");
    }

    #[test]
    fn density_compare_is_a_metric_on_samples() {
        let mut rng = RngSpec::new(10, 0).rng();
        for _ in 0..10 {
            let rand_theta = |rng: &mut rand_chacha::ChaCha8Rng| {
                Theta::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            };
            let (a, b, c) = (
                rand_theta(&mut rng),
                rand_theta(&mut rng),
                rand_theta(&mut rng),
            );
            let ab = density_compare(a, b, 50).unwrap();
            let ba = density_compare(b, a, 50).unwrap();
            let ac = density_compare(a, c, 50).unwrap();
            let cb = density_compare(c, b, 50).unwrap();
            assert_eq!(ab, ba);
            assert!(ab <= ac + cb + 1e-15);
        }
    }

    #[test]
    fn coverage_single_degenerate_rep() {
        let study = CoverageStudy {
            theta_true: Theta::new(0.0, 0.0, 0.5),
            n: 20,
            m_count: 50,
            n_reps: 1,
            level: 0.95,
            sampler: SamplerConfig {
                n_iter: 6,
                burn_in: 4,
                step_size: 0.2,
                rng: RngSpec::new(77, 1000),
                ..SamplerConfig::default()
            },
            grid: GridSpec {
                lo: [-1.0; 3],
                hi: [1.0; 3],
                step: 0.5,
            },
            prior: PriorSpec::default(),
            rng: RngSpec::new(77, 0),
        };
        let result = study.run().unwrap();
        assert_eq!(result.n_replications, 1);
        for c in 0..3 {
            assert!(result.coverage[c] == 0.0 || result.coverage[c] == 1.0);
        }
    }
}
