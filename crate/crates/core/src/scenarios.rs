//! The five benchmark estimation scenarios and the end-to-end runner behind
//! `reproduce`: simulate at a known truth, fit with the configured kernels,
//! run diagnostics and density comparison, and grade the outcome against
//! fixed reference targets into a machine-readable manifest.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{summarize, theoretical_mean, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::model::{ModelSummary, Theta};
use crate::posterior::{Posterior, PriorSpec};
use crate::rng::RngSpec;
use crate::samplers::{grid_search, run_chain, Chain, GridSpec, Kernel, KernelTag, SamplerConfig};
use crate::simulate::Dataset;

/// Benchmark scenario: a named data-generating parameter triple whose
/// recovery is known to be challenging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// (1.67, 0.01, 0.1): two pmf peaks, the larger one metastable.
    Bimodal1,
    /// (0, 1.2, 0): two symmetric global modes.
    Bimodal2,
    /// (0.5, 0.3, 0.1): single well-behaved mode.
    Unimodal1,
    /// (0, 1, 0): the critical point, maximally flat mode.
    Critical,
    /// (0.5, 0.3, 0.9): nearly flat likelihood, poorly identified triple.
    Nonident,
}

pub const SCENARIOS: [Scenario; 5] = [
    Scenario::Bimodal1,
    Scenario::Bimodal2,
    Scenario::Unimodal1,
    Scenario::Critical,
    Scenario::Nonident,
];

impl Scenario {
    pub fn theta(&self) -> Theta {
        match self {
            Scenario::Bimodal1 => Theta::new(1.67, 0.01, 0.1),
            Scenario::Bimodal2 => Theta::new(0.0, 1.2, 0.0),
            Scenario::Unimodal1 => Theta::new(0.5, 0.3, 0.1),
            Scenario::Critical => Theta::new(0.0, 1.0, 0.0),
            Scenario::Nonident => Theta::new(0.5, 0.3, 0.9),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Bimodal1 => "bimodal1",
            Scenario::Bimodal2 => "bimodal2",
            Scenario::Unimodal1 => "unimodal1",
            Scenario::Critical => "critical",
            Scenario::Nonident => "nonident",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        SCENARIOS
            .iter()
            .copied()
            .find(|s| s.name() == name)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown scenario `{name}` (valid: {})",
                    SCENARIOS.map(|s| s.name()).join(", ")
                ))
            })
    }

    /// Chain starting points. Where the truth lies on the default search
    /// lattice (bimodal2, critical) the grid argmax would hand the sampler
    /// the answer, so fixed off-truth starts are used instead; elsewhere the
    /// ranked grid points are used.
    fn start_rule(&self) -> StartRule {
        match self {
            Scenario::Bimodal2 | Scenario::Critical => StartRule::Fixed(vec![
                Theta::new(1.1, 0.8, -0.4),
                Theta::new(-1.1, 0.8, 0.4),
                Theta::new(0.8, 1.0, -0.3),
                Theta::new(-0.8, 1.0, 0.3),
            ]),
            _ => StartRule::GridRanked,
        }
    }

    /// Reference interval widths the full-scale runs are graded against.
    fn reference_widths(&self) -> [f64; 3] {
        match self {
            Scenario::Bimodal1 => [0.224, 0.284, 0.077],
            Scenario::Bimodal2 => [0.042, 0.019, 0.006],
            Scenario::Unimodal1 => [0.990, 0.373, 0.033],
            Scenario::Critical => [0.055, 0.014, 0.003],
            Scenario::Nonident => [1.610, 2.813, 1.367],
        }
    }
}

#[derive(Debug, Clone)]
enum StartRule {
    GridRanked,
    Fixed(Vec<Theta>),
}

/// Full configuration of one scenario run.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub seed: u64,
    pub n: usize,
    pub m_count: usize,
    pub n_chains: usize,
    pub kernels: Vec<Kernel>,
    pub sampler: SamplerConfig,
    pub grid: GridSpec,
    pub prior: PriorSpec,
    pub level: f64,
}

impl ScenarioRun {
    /// Benchmark defaults: N = 300, M = 1000, 4 chains of 5000 iterations
    /// with 2500 burn-in. The random-walk kernel adapts its covariance from
    /// the first draws on (`amh_warmup = 2`): the benchmark measures the
    /// plain adaptive random walk, not the warmup crutch, which would
    /// otherwise mask its characteristic way of getting stuck.
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        ScenarioRun {
            scenario,
            seed,
            n: 300,
            m_count: 1000,
            n_chains: 4,
            kernels: vec![Kernel::Amh, Kernel::Rmahmc, Kernel::Hybrid],
            sampler: SamplerConfig {
                n_iter: 5000,
                burn_in: 2500,
                step_size: 0.25,
                amh_warmup: 2,
                rng: RngSpec::new(seed, 0),
                ..SamplerConfig::default()
            },
            grid: GridSpec::default(),
            prior: PriorSpec::default(),
            level: 0.95,
        }
    }

    pub fn with_kernels(mut self, kernels: Vec<Kernel>) -> Self {
        self.kernels = kernels;
        self
    }

    fn stream_base(kernel: Kernel) -> u64 {
        match kernel {
            Kernel::Amh => 10,
            Kernel::Rmahmc => 20,
            Kernel::Hybrid => 30,
        }
    }

    pub fn run(&self) -> Result<ScenarioOutcome> {
        let truth = self.scenario.theta();
        let data = Dataset::sample(truth, self.n, self.m_count, RngSpec::new(self.seed, 0))?;
        let posterior = Posterior::new(&data, self.prior)?;

        let starts: Vec<Theta> = match self.scenario.start_rule() {
            StartRule::GridRanked => grid_search(&posterior, &self.grid, self.n_chains)?,
            StartRule::Fixed(points) => points,
        };
        if starts.len() < self.n_chains {
            return Err(Error::InvalidConfig(format!(
                "{} starting points for {} chains",
                starts.len(),
                self.n_chains
            )));
        }

        let mut kernels = BTreeMap::new();
        for &kernel in &self.kernels {
            let chains: Vec<Chain> = (0..self.n_chains)
                .into_par_iter()
                .map(|c| {
                    let cfg = SamplerConfig {
                        kernel,
                        rng: RngSpec::new(self.seed, Self::stream_base(kernel) + c as u64),
                        ..self.sampler
                    };
                    run_chain(&posterior, &cfg, starts[c])
                })
                .collect::<Result<_>>()?;
            let report = summarize(&chains, self.sampler.burn_in, self.level)?;
            kernels.insert(
                kernel,
                KernelResult {
                    kernel,
                    chains,
                    report,
                },
            );
        }

        let hybrid_extras = match kernels.get(&Kernel::Hybrid) {
            Some(result) => {
                let mean = Theta::from_array(result.report.post_mean);
                let density_tv = crate::diagnostics::density_compare(truth, mean, self.n)?;
                let mean_pmf = ModelSummary::new(mean, self.n)?.pmf;
                let pmf_local_maxima = count_local_maxima(&mean_pmf);
                let b_trace = self.b_trace_summary(result)?;
                Some((mean, density_tv, pmf_local_maxima, b_trace))
            }
            None => None,
        };

        let mut outcome = ScenarioOutcome {
            scenario: self.scenario,
            theta_true: truth,
            starts,
            dataset: data,
            kernels,
            posterior_mean: hybrid_extras.as_ref().map(|x| x.0),
            density_tv: hybrid_extras.as_ref().map(|x| x.1),
            pmf_local_maxima: hybrid_extras.as_ref().map(|x| x.2),
            b_trace: hybrid_extras.and_then(|x| x.3),
            checks: Vec::new(),
        };
        outcome.checks = self.grade(&outcome);
        Ok(outcome)
    }

    /// Model-mean trace over the kept hybrid draws, with its equal-tailed
    /// interval and the true model mean. Only meaningful bookkeeping for the
    /// nonidentifiable scenario, where the triple is diffuse but this scalar
    /// is not.
    fn b_trace_summary(&self, hybrid: &KernelResult) -> Result<Option<BTraceSummary>> {
        if self.scenario != Scenario::Nonident {
            return Ok(None);
        }
        let truth_b = theoretical_mean(self.scenario.theta(), self.n)?;
        let mut trace: Vec<f64> = hybrid
            .chains
            .par_iter()
            .flat_map_iter(|c| c.kept(self.sampler.burn_in).iter().copied())
            .map(|t| theoretical_mean(t, self.n))
            .collect::<Result<_>>()?;
        trace.sort_by(f64::total_cmp);
        let alpha = 1.0 - self.level;
        let lo = quantile_sorted(&trace, alpha / 2.0);
        let hi = quantile_sorted(&trace, 1.0 - alpha / 2.0);
        Ok(Some(BTraceSummary {
            lo,
            hi,
            truth: truth_b,
            contains_truth: lo <= truth_b && truth_b <= hi,
        }))
    }

    /// Scenario-specific pass/fail targets.
    fn grade(&self, outcome: &ScenarioOutcome) -> Vec<Check> {
        let mut checks = Vec::new();
        let hybrid = outcome.kernels.get(&Kernel::Hybrid);
        let amh = outcome.kernels.get(&Kernel::Amh);

        if let Some(h) = hybrid {
            checks.push(Check::le("hybrid_psrf_max", h.report.max_psrf(), 1.05));
            let covered = h.report.covers(&outcome.theta_true);
            checks.push(Check::ge(
                "hybrid_ci_covers_truth",
                covered.iter().filter(|&&c| c).count() as f64,
                3.0,
            ));
        }

        match self.scenario {
            Scenario::Unimodal1 | Scenario::Bimodal2 => {
                if let Some(h) = hybrid {
                    let reference = self.scenario.reference_widths();
                    let widths = h.report.widths();
                    for (c, label) in ["k", "j", "h"].iter().enumerate() {
                        let ratio = widths[c] / reference[c];
                        let factor = ratio.max(1.0 / ratio);
                        checks.push(Check::le(format!("width_factor_{label}"), factor, 2.0));
                    }
                }
                match self.scenario {
                    Scenario::Bimodal2 => {
                        if let Some(a) = amh {
                            checks.push(Check::ge("amh_psrf_k", a.report.psrf[0], 1.5));
                        }
                    }
                    _ => {
                        if let Some(tv) = outcome.density_tv {
                            checks.push(Check::le("density_tv", tv, 0.05));
                        }
                    }
                }
            }
            Scenario::Critical => {
                if let Some(a) = amh {
                    checks.push(Check::ge("amh_psrf_k", a.report.psrf[0], 2.0));
                }
                if let Some(tv) = outcome.density_tv {
                    checks.push(Check::le("density_tv", tv, 0.05));
                }
            }
            Scenario::Bimodal1 => {
                if let Some(n_peaks) = outcome.pmf_local_maxima {
                    checks.push(Check::ge("pmf_local_maxima", n_peaks as f64, 2.0));
                }
            }
            Scenario::Nonident => {
                if let Some(h) = hybrid {
                    let widths = h.report.widths();
                    checks.push(Check::ge("width_k", widths[0], 0.5));
                    checks.push(Check::ge("width_j", widths[1], 0.5));
                }
                if let Some(b) = &outcome.b_trace {
                    checks.push(Check::ge(
                        "b_interval_contains_truth",
                        b.contains_truth as u8 as f64,
                        1.0,
                    ));
                }
            }
        }
        checks
    }
}

fn count_local_maxima(pmf: &[f64]) -> usize {
    (0..pmf.len())
        .filter(|&k| {
            let left_ok = k == 0 || pmf[k] > pmf[k - 1];
            let right_ok = k + 1 == pmf.len() || pmf[k] > pmf[k + 1];
            left_ok && right_ok
        })
        .count()
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Chains and diagnostics for one kernel.
#[derive(Debug, Clone)]
pub struct KernelResult {
    pub kernel: Kernel,
    pub chains: Vec<Chain>,
    pub report: DiagnosticsReport,
}

impl KernelResult {
    pub fn acceptance_rates(&self) -> BTreeMap<String, f64> {
        let mut rates = BTreeMap::new();
        for tag in [KernelTag::Rmahmc, KernelTag::Amh] {
            let per_chain: Vec<f64> = self
                .chains
                .iter()
                .map(|c| c.acceptance_rate(Some(tag)))
                .filter(|r| r.is_finite())
                .collect();
            if !per_chain.is_empty() {
                let mean = per_chain.iter().sum::<f64>() / per_chain.len() as f64;
                rates.insert(tag.to_string(), mean);
            }
        }
        rates
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BTraceSummary {
    pub lo: f64,
    pub hi: f64,
    pub truth: f64,
    pub contains_truth: bool,
}

/// One graded quantity: `value` compared against `target` under `op`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub op: CheckOp,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckOp {
    Le,
    Ge,
}

impl Check {
    fn le(name: impl Into<String>, value: f64, target: f64) -> Self {
        Check {
            name: name.into(),
            value,
            target,
            op: CheckOp::Le,
            pass: value <= target,
        }
    }

    fn ge(name: impl Into<String>, value: f64, target: f64) -> Self {
        Check {
            name: name.into(),
            value,
            target,
            op: CheckOp::Ge,
            pass: value >= target,
        }
    }
}

/// Everything a scenario run produced.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub scenario: Scenario,
    pub theta_true: Theta,
    pub starts: Vec<Theta>,
    pub dataset: Dataset,
    pub kernels: BTreeMap<Kernel, KernelResult>,
    pub posterior_mean: Option<Theta>,
    pub density_tv: Option<f64>,
    pub pmf_local_maxima: Option<usize>,
    pub b_trace: Option<BTraceSummary>,
    pub checks: Vec<Check>,
}

impl ScenarioOutcome {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn manifest(&self, run: &ScenarioRun) -> Manifest {
        let kernels = self
            .kernels
            .values()
            .map(|k| {
                (
                    k.kernel.to_string(),
                    KernelSection {
                        report: k.report.clone(),
                        acceptance: k.acceptance_rates(),
                    },
                )
            })
            .collect();
        Manifest {
            scenario: self.scenario,
            theta_true: self.theta_true,
            n: run.n,
            m_count: run.m_count,
            seed: run.seed,
            level: run.level,
            n_chains: run.n_chains,
            sampler: run.sampler,
            grid: run.grid,
            prior: run.prior,
            starts: self.starts.clone(),
            kernels,
            posterior_mean: self.posterior_mean,
            density_tv: self.density_tv,
            pmf_local_maxima: self.pmf_local_maxima,
            b_trace: self.b_trace,
            checks: self.checks.clone(),
            pass: self.all_pass(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSection {
    pub report: DiagnosticsReport,
    pub acceptance: BTreeMap<String, f64>,
}

/// Machine-readable results manifest: the resolved configuration, per-kernel
/// diagnostics, and the graded checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: Scenario,
    pub theta_true: Theta,
    pub n: usize,
    pub m_count: usize,
    pub seed: u64,
    pub level: f64,
    pub n_chains: usize,
    pub sampler: SamplerConfig,
    pub grid: GridSpec,
    pub prior: PriorSpec,
    pub starts: Vec<Theta>,
    pub kernels: BTreeMap<String, KernelSection>,
    pub posterior_mean: Option<Theta>,
    pub density_tv: Option<f64>,
    pub pmf_local_maxima: Option<usize>,
    pub b_trace: Option<BTraceSummary>,
    pub checks: Vec<Check>,
    pub pass: bool,
}
