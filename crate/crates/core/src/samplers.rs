//! MCMC kernels: adaptive Metropolis-Hastings, Riemannian-metric HMC with a
//! per-trajectory frozen mass, and the hybrid sampler that strictly
//! alternates them (metric steps on odd iterations, adaptive random-walk
//! steps on even ones). Also the grid-search initializer.

use nalgebra::{Cholesky, Matrix3, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Theta;
use crate::posterior::Posterior;
use crate::rng::RngSpec;

/// A log-density with the derivative information the kernels need.
/// Invalid or non-finite states report `-inf` density and a zero gradient;
/// kernels then reject the move.
pub trait Target {
    fn log_density(&self, theta: &Theta) -> f64;
    fn grad_log_density(&self, theta: &Theta) -> Vector3<f64>;
    /// Mass-matrix candidate at `theta` with off-diagonal shrinkage `chi`.
    fn metric(&self, theta: &Theta, chi: f64) -> Matrix3<f64>;
}

impl Target for Posterior {
    fn log_density(&self, theta: &Theta) -> f64 {
        self.log_posterior(*theta).unwrap_or(f64::NEG_INFINITY)
    }

    fn grad_log_density(&self, theta: &Theta) -> Vector3<f64> {
        match self.gradient_source() {
            crate::posterior::GradientSource::Posterior => self.grad_log_posterior(*theta),
            crate::posterior::GradientSource::Likelihood => self.grad_log_likelihood(*theta),
        }
        .unwrap_or_else(|_| Vector3::zeros())
    }

    fn metric(&self, theta: &Theta, chi: f64) -> Matrix3<f64> {
        Posterior::metric(self, *theta, chi).unwrap_or_else(|_| Matrix3::identity())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Amh,
    Rmahmc,
    Hybrid,
}

impl std::fmt::Display for Kernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kernel::Amh => "amh",
            Kernel::Rmahmc => "rmahmc",
            Kernel::Hybrid => "hybrid",
        })
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "amh" => Ok(Kernel::Amh),
            "rmahmc" => Ok(Kernel::Rmahmc),
            "hybrid" => Ok(Kernel::Hybrid),
            other => Err(Error::InvalidConfig(format!(
                "unknown kernel `{other}` (expected amh, rmahmc, or hybrid)"
            ))),
        }
    }
}

/// Which kernel produced a given iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelTag {
    Amh,
    Rmahmc,
}

impl std::fmt::Display for KernelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelTag::Amh => "AMH",
            KernelTag::Rmahmc => "RMAHMC",
        })
    }
}

/// Off-diagonal shrinkage schedule for the metric: a small positive value
/// during burn-in keeps near-singular metrics decomposable, then shrinkage
/// is switched off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSchedule {
    pub burnin: f64,
    pub after: f64,
}

impl Default for ChiSchedule {
    fn default() -> Self {
        ChiSchedule {
            burnin: 1e-4,
            after: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub kernel: Kernel,
    pub n_iter: usize,
    pub burn_in: usize,
    /// Leapfrog steps per metric-HMC proposal.
    pub leapfrog_steps: usize,
    /// Leapfrog step size.
    pub step_size: f64,
    pub chi: ChiSchedule,
    /// Random-walk proposal covariance is `amh_scale` times the sample
    /// covariance of all previous draws.
    pub amh_scale: f64,
    /// Draw count below which the random walk uses the diagonal fallback.
    pub amh_warmup: usize,
    /// Fallback proposal standard deviation per component.
    pub amh_fallback_sd: f64,
    pub jitter: f64,
    /// Dual-averaging step-size adaptation during burn-in (off by default so
    /// runs are exactly reproducible from the configured step size).
    pub adapt_step_size: bool,
    pub target_accept: f64,
    pub rng: RngSpec,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            kernel: Kernel::Hybrid,
            n_iter: 5000,
            burn_in: 2500,
            leapfrog_steps: 10,
            step_size: 0.01,
            chi: ChiSchedule::default(),
            amh_scale: 1.0 / 3.0,
            amh_warmup: 100,
            amh_fallback_sd: 0.05,
            jitter: 1e-10,
            adapt_step_size: false,
            target_accept: 0.7,
            rng: RngSpec::default(),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.n_iter == 0 {
            return bad("n_iter must be >= 1");
        }
        if self.burn_in >= self.n_iter {
            return bad("burn_in must be < n_iter");
        }
        if !(self.step_size > 0.0) {
            return bad("step_size must be > 0");
        }
        if self.leapfrog_steps == 0 {
            return bad("leapfrog_steps must be >= 1");
        }
        if !(self.amh_scale > 0.0) {
            return bad("amh_scale must be > 0");
        }
        if !(self.amh_fallback_sd > 0.0) {
            return bad("amh_fallback_sd must be > 0");
        }
        if !(self.jitter > 0.0) {
            return bad("jitter must be > 0");
        }
        for chi in [self.chi.burnin, self.chi.after] {
            if !(0.0..=1.0).contains(&chi) {
                return bad("chi values must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

/// Ordered posterior draws with per-iteration kernel and acceptance
/// bookkeeping. Row `i` repeats row `i - 1` whenever the move was rejected.
#[derive(Debug, Clone)]
pub struct Chain {
    draws: Vec<Theta>,
    tags: Vec<KernelTag>,
    accepted: Vec<bool>,
    log_post: Vec<f64>,
}

impl Chain {
    pub fn new(
        draws: Vec<Theta>,
        tags: Vec<KernelTag>,
        accepted: Vec<bool>,
        log_post: Vec<f64>,
    ) -> Result<Self> {
        let n = draws.len();
        if tags.len() != n || accepted.len() != n || log_post.len() != n {
            return Err(Error::InvalidChains("chain column lengths differ".into()));
        }
        Ok(Chain {
            draws,
            tags,
            accepted,
            log_post,
        })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn draws(&self) -> &[Theta] {
        &self.draws
    }

    pub fn tags(&self) -> &[KernelTag] {
        &self.tags
    }

    pub fn accepted(&self) -> &[bool] {
        &self.accepted
    }

    pub fn log_post(&self) -> &[f64] {
        &self.log_post
    }

    /// Draws after discarding the first `burn_in`.
    pub fn kept(&self, burn_in: usize) -> &[Theta] {
        &self.draws[burn_in.min(self.draws.len())..]
    }

    /// One component of the kept draws, `c` indexing (K, J, h).
    pub fn component(&self, c: usize, burn_in: usize) -> Vec<f64> {
        self.kept(burn_in).iter().map(|t| t.as_array()[c]).collect()
    }

    /// Acceptance rate over all iterations or over one kernel's iterations.
    pub fn acceptance_rate(&self, tag: Option<KernelTag>) -> f64 {
        let (hits, total) = self
            .tags
            .iter()
            .zip(&self.accepted)
            .filter(|(t, _)| tag.map_or(true, |want| **t == want))
            .fold((0usize, 0usize), |(h, n), (_, &a)| (h + a as usize, n + 1));
        if total == 0 {
            f64::NAN
        } else {
            hits as f64 / total as f64
        }
    }
}

/// Running mean and scatter of every draw so far (Welford update); the AMH
/// proposal covariance comes from here.
#[derive(Debug, Clone)]
pub struct DrawHistory {
    count: usize,
    mean: Vector3<f64>,
    scatter: Matrix3<f64>,
}

impl DrawHistory {
    pub fn new() -> Self {
        DrawHistory {
            count: 0,
            mean: Vector3::zeros(),
            scatter: Matrix3::zeros(),
        }
    }

    pub fn push(&mut self, theta: &Theta) {
        let x = Vector3::from(theta.as_array());
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        let delta2 = x - self.mean;
        self.scatter += delta * delta2.transpose();
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Sample covariance of the recorded draws (`None` below two draws).
    pub fn covariance(&self) -> Option<Matrix3<f64>> {
        if self.count < 2 {
            return None;
        }
        let c = self.scatter / (self.count - 1) as f64;
        Some((c + c.transpose()) * 0.5)
    }
}

impl Default for DrawHistory {
    fn default() -> Self {
        Self::new()
    }
}

/// Result of one kernel step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub theta: Theta,
    pub accepted: bool,
    pub log_density: f64,
    /// Metropolis acceptance probability of the attempted move.
    pub accept_prob: f64,
}

fn standard_normal3(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    Vector3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// One adaptive random-walk Metropolis step. The proposal is
/// `N(state, amh_scale * C + jitter * I)` with `C` the sample covariance of
/// all previous draws; while fewer than `amh_warmup` draws exist or `C` is
/// numerically singular, a diagonal fallback proposal is used instead.
pub fn amh_step<T: Target>(
    state: &Theta,
    state_log_density: f64,
    history: &DrawHistory,
    target: &T,
    cfg: &SamplerConfig,
    rng: &mut ChaCha8Rng,
) -> StepOutcome {
    let adapted = if history.len() >= cfg.amh_warmup {
        history
            .covariance()
            .and_then(|c| Cholesky::new(c * cfg.amh_scale).map(|_| c))
            .map(|c| c * cfg.amh_scale + Matrix3::identity() * cfg.jitter)
            .and_then(Cholesky::new)
    } else {
        None
    };
    let chol = adapted.unwrap_or_else(|| {
        let var = cfg.amh_fallback_sd * cfg.amh_fallback_sd + cfg.jitter;
        Cholesky::new(Matrix3::identity() * var).expect("diagonal fallback is PD")
    });

    let z = standard_normal3(rng);
    let step = chol.l() * z;
    let proposal = Theta::new(state.k + step[0], state.j + step[1], state.h + step[2]);
    let proposal_log_density = target.log_density(&proposal);

    let log_alpha = proposal_log_density - state_log_density;
    let accept_prob = if proposal_log_density.is_finite() {
        log_alpha.min(0.0).exp()
    } else {
        0.0
    };
    let u: f64 = rng.random();
    if proposal_log_density.is_finite() && (log_alpha >= 0.0 || u.ln() < log_alpha) {
        StepOutcome {
            theta: proposal,
            accepted: true,
            log_density: proposal_log_density,
            accept_prob,
        }
    } else {
        StepOutcome {
            theta: *state,
            accepted: false,
            log_density: state_log_density,
            accept_prob,
        }
    }
}

/// One metric-HMC step with the mass frozen at the trajectory start:
/// momentum is drawn from `N(0, mass)` with
/// `mass = metric(state, chi) + jitter * trace * I`, the leapfrog runs
/// `leapfrog_steps` steps of `step_size`, and the same frozen mass enters
/// the Hamiltonian at both endpoints. Non-finite energies reject the move;
/// a mass that fails to decompose even after jitter is an error.
pub fn rmahmc_step<T: Target>(
    state: &Theta,
    state_log_density: f64,
    target: &T,
    cfg: &SamplerConfig,
    chi: f64,
    rng: &mut ChaCha8Rng,
) -> Result<StepOutcome> {
    rmahmc_step_sized(
        state,
        state_log_density,
        target,
        cfg,
        chi,
        cfg.step_size,
        rng,
    )
}

fn rmahmc_step_sized<T: Target>(
    state: &Theta,
    state_log_density: f64,
    target: &T,
    cfg: &SamplerConfig,
    chi: f64,
    step_size: f64,
    rng: &mut ChaCha8Rng,
) -> Result<StepOutcome> {
    let metric = target.metric(state, chi);
    let trace = metric.trace();
    let diag_boost = if trace > 0.0 {
        cfg.jitter * trace
    } else {
        cfg.jitter
    };
    let mass = metric + Matrix3::identity() * diag_boost;
    let chol = Cholesky::new(mass).ok_or(Error::SingularMass)?;

    let z = standard_normal3(rng);
    let mut momentum = chol.l() * z;
    let kinetic_start = 0.5 * z.dot(&z);
    let h_start = -state_log_density + kinetic_start;

    let mut position = Vector3::from(state.as_array());
    let mut grad = target.grad_log_density(state);
    let half = 0.5 * step_size;
    let mut finite = true;
    for _ in 0..cfg.leapfrog_steps {
        momentum += half * grad;
        position += step_size * chol.solve(&momentum);
        if !(position[0].is_finite() && position[1].is_finite() && position[2].is_finite()) {
            finite = false;
            break;
        }
        grad = target.grad_log_density(&Theta::new(position[0], position[1], position[2]));
        momentum += half * grad;
    }

    // Draw the acceptance uniform unconditionally so the RNG stream does not
    // depend on trajectory health.
    let u: f64 = rng.random();

    let rejected = StepOutcome {
        theta: *state,
        accepted: false,
        log_density: state_log_density,
        accept_prob: 0.0,
    };
    if !finite {
        return Ok(rejected);
    }
    let proposal = Theta::new(position[0], position[1], position[2]);
    let proposal_log_density = target.log_density(&proposal);
    let kinetic_end = 0.5 * momentum.dot(&chol.solve(&momentum));
    let h_end = -proposal_log_density + kinetic_end;
    if !h_end.is_finite() {
        return Ok(rejected);
    }

    let log_alpha = h_start - h_end;
    let accept_prob = log_alpha.min(0.0).exp();
    if log_alpha >= 0.0 || u.ln() < log_alpha {
        Ok(StepOutcome {
            theta: proposal,
            accepted: true,
            log_density: proposal_log_density,
            accept_prob,
        })
    } else {
        Ok(StepOutcome {
            accept_prob,
            ..rejected
        })
    }
}

/// Dual-averaging state for optional burn-in step-size adaptation.
struct DualAveraging {
    mu: f64,
    h_bar: f64,
    log_eps_bar: f64,
    m: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(eps0: f64) -> Self {
        DualAveraging {
            mu: (10.0 * eps0).ln(),
            h_bar: 0.0,
            log_eps_bar: eps0.ln(),
            m: 0.0,
        }
    }

    fn update(&mut self, accept_prob: f64, target: f64) -> f64 {
        self.m += 1.0;
        let frac = 1.0 / (self.m + Self::T0);
        self.h_bar = (1.0 - frac) * self.h_bar + frac * (target - accept_prob);
        let log_eps = self.mu - self.m.sqrt() / Self::GAMMA * self.h_bar;
        let eta = self.m.powf(-Self::KAPPA);
        self.log_eps_bar = eta * log_eps + (1.0 - eta) * self.log_eps_bar;
        log_eps.exp()
    }

    fn frozen(&self) -> f64 {
        self.log_eps_bar.exp()
    }
}

/// Runs one chain of `cfg.n_iter` iterations from `theta0`. The hybrid
/// kernel alternates strictly: metric HMC on odd iterations (with the
/// burn-in chi while `i <= burn_in`), adaptive random walk on even ones.
/// Deterministic given `(cfg, theta0)` and the target.
pub fn run_chain<T: Target>(target: &T, cfg: &SamplerConfig, theta0: Theta) -> Result<Chain> {
    cfg.validate()?;
    if !theta0.is_finite() {
        return Err(Error::NonFinite { what: "theta0" });
    }
    let mut rng = cfg.rng.rng();
    let mut history = DrawHistory::new();
    history.push(&theta0);

    let mut state = theta0;
    let mut state_lp = target.log_density(&theta0);
    let mut adapter = cfg
        .adapt_step_size
        .then(|| DualAveraging::new(cfg.step_size));
    let mut step_size = cfg.step_size;

    let mut draws = Vec::with_capacity(cfg.n_iter);
    let mut tags = Vec::with_capacity(cfg.n_iter);
    let mut accepted = Vec::with_capacity(cfg.n_iter);
    let mut log_post = Vec::with_capacity(cfg.n_iter);

    for i in 1..=cfg.n_iter {
        let tag = match cfg.kernel {
            Kernel::Amh => KernelTag::Amh,
            Kernel::Rmahmc => KernelTag::Rmahmc,
            Kernel::Hybrid => {
                if i % 2 == 1 {
                    KernelTag::Rmahmc
                } else {
                    KernelTag::Amh
                }
            }
        };
        let outcome = match tag {
            KernelTag::Amh => amh_step(&state, state_lp, &history, target, cfg, &mut rng),
            KernelTag::Rmahmc => {
                let chi = if i <= cfg.burn_in {
                    cfg.chi.burnin
                } else {
                    cfg.chi.after
                };
                let out =
                    rmahmc_step_sized(&state, state_lp, target, cfg, chi, step_size, &mut rng)?;
                if let Some(adapter) = adapter.as_mut() {
                    if i <= cfg.burn_in {
                        step_size = adapter.update(out.accept_prob, cfg.target_accept);
                    } else {
                        step_size = adapter.frozen();
                    }
                }
                out
            }
        };
        state = outcome.theta;
        state_lp = outcome.log_density;
        draws.push(state);
        tags.push(tag);
        accepted.push(outcome.accepted);
        log_post.push(state_lp);
        history.push(&state);
    }

    Chain::new(draws, tags, accepted, log_post)
}

/// Rectangular search lattice for the initializer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            lo: [-2.0; 3],
            hi: [2.0; 3],
            step: 0.2,
        }
    }
}

fn axis_values(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidConfig("grid step must be > 0".into()));
    }
    if hi < lo {
        return Err(Error::EmptyGrid);
    }
    let count = ((hi - lo) / step + 1e-6).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

/// Evaluates the target on the lattice and returns the `top` best points,
/// ordered by log-density, with ties broken by smaller norm and then
/// lexicographically in (K, J, h).
pub fn grid_search<T: Target>(target: &T, grid: &GridSpec, top: usize) -> Result<Vec<Theta>> {
    let ks = axis_values(grid.lo[0], grid.hi[0], grid.step)?;
    let js = axis_values(grid.lo[1], grid.hi[1], grid.step)?;
    let hs = axis_values(grid.lo[2], grid.hi[2], grid.step)?;
    let mut scored: Vec<(f64, Theta)> = Vec::with_capacity(ks.len() * js.len() * hs.len());
    for &k in &ks {
        for &j in &js {
            for &h in &hs {
                let theta = Theta::new(k, j, h);
                scored.push((target.log_density(&theta), theta));
            }
        }
    }
    if scored.is_empty() {
        return Err(Error::EmptyGrid);
    }
    scored.sort_by(|(lp_a, a), (lp_b, b)| {
        lp_b.total_cmp(lp_a)
            .then_with(|| a.norm().total_cmp(&b.norm()))
            .then_with(|| a.k.total_cmp(&b.k))
            .then_with(|| a.j.total_cmp(&b.j))
            .then_with(|| a.h.total_cmp(&b.h))
    });
    scored.truncate(top.max(1));
    Ok(scored.into_iter().map(|(_, t)| t).collect())
}

/// Best lattice point under the target; the sampler's starting value.
pub fn grid_init<T: Target>(target: &T, grid: &GridSpec) -> Result<Theta> {
    Ok(grid_search(target, grid, 1)?[0])
}
