//! Exact forward sampling of magnetization datasets.
//!
//! Draws are exact inverse-CDF samples from the categorical magnetization
//! pmf, not spin-level dynamics, so there is no simulation bias: a dataset
//! is `M` i.i.d. values on the size-`N` spectrum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LogCountTable, ModelSummary, Spectrum, Theta};
use crate::rng::RngSpec;

/// Sums of the first three powers of the observed magnetizations; together
/// with the count they are sufficient for the likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuffStats {
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl SuffStats {
    /// Accumulates over the atom histogram in index order, so any two
    /// datasets with the same value multiset produce bit-identical sums.
    fn from_counts(spectrum: Spectrum, counts: &[u64]) -> Self {
        let mut s = SuffStats {
            s1: 0.0,
            s2: 0.0,
            s3: 0.0,
        };
        for (k, &count) in counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let c = count as f64;
            let m = spectrum.atom(k);
            s.s1 += c * m;
            s.s2 += c * (m * m);
            s.s3 += c * (m * m * m);
        }
        s
    }
}

/// Provenance recorded with a dataset: the generating parameters when known,
/// and the RNG coordinates that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub theta_true: Option<Theta>,
    pub seed: u64,
    pub stream: u64,
}

/// `M` magnetization observations on the size-`N` spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    values: Vec<f64>,
    suffstats: SuffStats,
    meta: DatasetMeta,
}

impl Dataset {
    /// Draws `m_count` i.i.d. magnetizations from the model pmf at `theta`.
    pub fn sample(theta: Theta, n: usize, m_count: usize, rng_spec: RngSpec) -> Result<Dataset> {
        if !theta.is_finite() {
            return Err(Error::NonFinite { what: "theta" });
        }
        if m_count == 0 {
            return Err(Error::EmptyDataset);
        }
        let summary = ModelSummary::new(theta, n)?;
        let spectrum = summary.spectrum();

        let mut cdf = summary.pmf.clone();
        let mut acc = 0.0f64;
        for c in cdf.iter_mut() {
            acc += *c;
            *c = acc;
        }

        let mut rng = rng_spec.rng();
        let mut counts = vec![0u64; spectrum.len()];
        let values: Vec<f64> = (0..m_count)
            .map(|_| {
                let u: f64 = rng.random();
                let k = cdf.partition_point(|&c| c <= u).min(n);
                counts[k] += 1;
                spectrum.atom(k)
            })
            .collect();

        let suffstats = SuffStats::from_counts(spectrum, &counts);
        Ok(Dataset {
            n,
            values,
            suffstats,
            meta: DatasetMeta {
                theta_true: Some(theta),
                seed: rng_spec.seed,
                stream: rng_spec.stream,
            },
        })
    }

    /// Builds a dataset from externally supplied values, checking that every
    /// value sits exactly on the size-`n` spectrum.
    pub fn from_values(n: usize, values: Vec<f64>, meta: DatasetMeta) -> Result<Dataset> {
        if values.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let spectrum = Spectrum::new(n)?;
        let mut counts = vec![0u64; spectrum.len()];
        for (row, &m) in values.iter().enumerate() {
            let k = spectrum.index_of(m).map_err(|e| Error::DataRow {
                row,
                detail: e.to_string(),
            })?;
            counts[k] += 1;
        }
        let suffstats = SuffStats::from_counts(spectrum, &counts);
        Ok(Dataset {
            n,
            values,
            suffstats,
            meta,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of replicas `M`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn suffstats(&self) -> SuffStats {
        self.suffstats
    }

    pub fn meta(&self) -> DatasetMeta {
        self.meta
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::new(self.n).expect("n >= 1 by construction")
    }

    /// Sample moments `(S1/M, S2/M, S3/M)`.
    pub fn empirical_moments(&self) -> [f64; 3] {
        let m = self.values.len() as f64;
        [
            self.suffstats.s1 / m,
            self.suffstats.s2 / m,
            self.suffstats.s3 / m,
        ]
    }

    /// Per-atom observation counts on the spectrum.
    pub fn atom_counts(&self) -> Vec<u64> {
        let spectrum = self.spectrum();
        let mut counts = vec![0u64; spectrum.len()];
        for &m in &self.values {
            let k = spectrum.index_of(m).expect("validated at construction");
            counts[k] += 1;
        }
        counts
    }

    /// Sum of log configuration counts over the observations; the
    /// theta-independent part of the log-likelihood.
    pub fn log_count_sum(&self, table: &LogCountTable) -> f64 {
        debug_assert_eq!(table.n(), self.n);
        self.atom_counts()
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 * table.log_count_at(k))
            .sum()
    }
}
