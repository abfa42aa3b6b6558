//! Log-posterior, gradient, and Fisher metric as functions of theta for a
//! fixed dataset — the computational substrate shared by all samplers.
//!
//! With sufficient statistics `(S1, S2, S3)` and replica count `M`, the
//! log-likelihood is
//!
//! `sum_i log A(m_i) + N (K/3 S3 + J/2 S2 + h S1) - M log Z(theta)`,
//!
//! so each evaluation costs one sweep over the spectrum. The gradient and
//! the metric come from the model moments of the same sweep: this is a
//! three-parameter exponential family with natural statistic
//! `v(m) = (m^3/3, m^2/2, m)`, so the Fisher information equals the negative
//! log-likelihood Hessian and is `M N^2 Cov(v)`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LogCountTable, ModelSummary, Theta};
use crate::simulate::Dataset;

/// Independent zero-mean normal priors on (K, J, h), parameterized by
/// standard deviation. The default is variance 2 per component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub sd: [f64; 3],
}

impl PriorSpec {
    pub fn new(sd: [f64; 3]) -> Result<Self> {
        if sd.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidConfig("prior sd must be positive".into()));
        }
        Ok(PriorSpec { sd })
    }

    pub fn isotropic(sd: f64) -> Result<Self> {
        Self::new([sd; 3])
    }

    /// Log-density up to a constant: `-sum_c theta_c^2 / (2 sd_c^2)`.
    pub fn log_density(&self, theta: &Theta) -> f64 {
        let t = theta.as_array();
        -(0..3)
            .map(|c| t[c] * t[c] / (2.0 * self.sd[c] * self.sd[c]))
            .sum::<f64>()
    }

    pub fn grad_log_density(&self, theta: &Theta) -> Vector3<f64> {
        let t = theta.as_array();
        Vector3::new(
            -t[0] / (self.sd[0] * self.sd[0]),
            -t[1] / (self.sd[1] * self.sd[1]),
            -t[2] / (self.sd[2] * self.sd[2]),
        )
    }
}

impl Default for PriorSpec {
    fn default() -> Self {
        PriorSpec {
            sd: [std::f64::consts::SQRT_2; 3],
        }
    }
}

/// Which gradient drives the Hamiltonian dynamics. The acceptance test is
/// always on the full posterior; this switch only changes the drift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientSource {
    #[default]
    Posterior,
    Likelihood,
}

/// Everything a sampler wants at one point of parameter space.
#[derive(Debug, Clone)]
pub struct PosteriorEval {
    pub log_post: f64,
    pub log_lik: f64,
    pub grad: Vector3<f64>,
    pub metric: Matrix3<f64>,
    pub summary: ModelSummary,
}

/// Immutable per-dataset cache plus prior: evaluates the posterior and its
/// derivatives at any theta. Cheap to share read-only across chains.
#[derive(Debug, Clone)]
pub struct Posterior {
    table: LogCountTable,
    n: f64,
    m_count: f64,
    s1: f64,
    s2: f64,
    s3: f64,
    log_a_sum: f64,
    prior: PriorSpec,
    grad_source: GradientSource,
}

impl Posterior {
    pub fn new(data: &Dataset, prior: PriorSpec) -> Result<Self> {
        let table = LogCountTable::new(data.n())?;
        let log_a_sum = data.log_count_sum(&table);
        let s = data.suffstats();
        Ok(Posterior {
            table,
            n: data.n() as f64,
            m_count: data.len() as f64,
            s1: s.s1,
            s2: s.s2,
            s3: s.s3,
            log_a_sum,
            prior,
            grad_source: GradientSource::default(),
        })
    }

    pub fn with_gradient_source(mut self, source: GradientSource) -> Self {
        self.grad_source = source;
        self
    }

    pub fn prior(&self) -> PriorSpec {
        self.prior
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn summary(&self, theta: Theta) -> Result<ModelSummary> {
        ModelSummary::compute(theta, &self.table)
    }

    fn log_lik_from_summary(&self, s: &ModelSummary) -> f64 {
        let t = s.theta;
        self.log_a_sum + self.n * (t.k / 3.0 * self.s3 + t.j / 2.0 * self.s2 + t.h * self.s1)
            - self.m_count * s.log_z
    }

    fn grad_lik_from_summary(&self, s: &ModelSummary) -> Vector3<f64> {
        Vector3::new(
            self.n / 3.0 * (self.s3 - self.m_count * s.mu[2]),
            self.n / 2.0 * (self.s2 - self.m_count * s.mu[1]),
            self.n * (self.s1 - self.m_count * s.mu[0]),
        )
    }

    fn metric_from_summary(&self, s: &ModelSummary, chi: f64) -> Matrix3<f64> {
        let [m1, m2, m3, m4, m5, m6] = s.mu;
        let scale = self.m_count * self.n * self.n;
        let shrink = 1.0 - chi;
        let g_kk = (m6 - m3 * m3) / 9.0;
        let g_kj = (m5 - m3 * m2) / 6.0 * shrink;
        let g_kh = (m4 - m3 * m1) / 3.0 * shrink;
        let g_jj = (m4 - m2 * m2) / 4.0;
        let g_jh = (m3 - m2 * m1) / 2.0 * shrink;
        let g_hh = m2 - m1 * m1;
        scale * Matrix3::new(g_kk, g_kj, g_kh, g_kj, g_jj, g_jh, g_kh, g_jh, g_hh)
    }

    /// Exact log-likelihood of the dataset at `theta`.
    pub fn log_likelihood(&self, theta: Theta) -> Result<f64> {
        Ok(self.log_lik_from_summary(&self.summary(theta)?))
    }

    /// Log-likelihood plus log-prior (up to a constant).
    pub fn log_posterior(&self, theta: Theta) -> Result<f64> {
        Ok(self.log_likelihood(theta)? + self.prior.log_density(&theta))
    }

    /// Gradient of the log-likelihood, in (K, J, h) order.
    pub fn grad_log_likelihood(&self, theta: Theta) -> Result<Vector3<f64>> {
        Ok(self.grad_lik_from_summary(&self.summary(theta)?))
    }

    /// Gradient of the log-posterior, in (K, J, h) order.
    pub fn grad_log_posterior(&self, theta: Theta) -> Result<Vector3<f64>> {
        Ok(self.grad_log_likelihood(theta)? + self.prior.grad_log_density(&theta))
    }

    /// Fisher metric `G = M N^2 Cov(v)` with off-diagonals shrunk by
    /// `(1 - chi)`. At `chi = 0` this equals the negative Hessian of the
    /// log-likelihood; a degenerate G is returned as-is and consumers add
    /// jitter.
    pub fn metric(&self, theta: Theta, chi: f64) -> Result<Matrix3<f64>> {
        Ok(self.metric_from_summary(&self.summary(theta)?, chi))
    }

    /// All quantities from a single spectrum sweep.
    pub fn evaluate(&self, theta: Theta, chi: f64) -> Result<PosteriorEval> {
        let summary = self.summary(theta)?;
        let log_lik = self.log_lik_from_summary(&summary);
        let log_post = log_lik + self.prior.log_density(&theta);
        let grad_lik = self.grad_lik_from_summary(&summary);
        let grad = match self.grad_source {
            GradientSource::Posterior => grad_lik + self.prior.grad_log_density(&theta),
            GradientSource::Likelihood => grad_lik,
        };
        let metric = self.metric_from_summary(&summary, chi);
        Ok(PosteriorEval {
            log_post,
            log_lik,
            grad,
            metric,
            summary,
        })
    }

    pub fn gradient_source(&self) -> GradientSource {
        self.grad_source
    }
}
