//! Exact evaluation of the mean-field Ising model with three-body interactions.
//!
//! The model lives on the magnetization spectrum: for `N` spins the sample
//! mean takes the `N + 1` values `m_k = -1 + 2k/N`. Every quantity here —
//! partition function, magnetization pmf, moments, free-energy functional —
//! is an exact finite sum over that spectrum, evaluated in log space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coupling parameters, in canonical order (K, J, h): three-body coupling,
/// two-body coupling, external field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta {
    pub k: f64,
    pub j: f64,
    pub h: f64,
}

impl Theta {
    pub const fn new(k: f64, j: f64, h: f64) -> Self {
        Theta { k, j, h }
    }

    pub fn is_finite(&self) -> bool {
        self.k.is_finite() && self.j.is_finite() && self.h.is_finite()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.k, self.j, self.h]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Theta::new(a[0], a[1], a[2])
    }

    pub fn norm(&self) -> f64 {
        (self.k * self.k + self.j * self.j + self.h * self.h).sqrt()
    }

    /// Per-spin interaction strength `U(m) = K/3 m^3 + J/2 m^2 + h m`.
    ///
    /// The Gibbs weight of a magnetization-`m` macrostate is
    /// `A_N(m) * exp(N * U(m))`; the factor `N` is applied by callers.
    pub fn energy_density(&self, m: f64) -> f64 {
        m * (self.h + m * (self.j / 2.0 + m * self.k / 3.0))
    }

    /// Derivative `U'(m) = K m^2 + J m + h`.
    pub fn energy_density_slope(&self, m: f64) -> f64 {
        self.h + m * (self.j + m * self.k)
    }

    /// Free-energy density `f(m) = U(m) - I(m)`; its maximum over `[-1, 1]`
    /// is the large-`N` limit of `log(Z)/N`.
    pub fn free_energy_density(&self, m: f64) -> Result<f64> {
        Ok(self.energy_density(m) - entropy(m)?)
    }

    /// One application of the consistency map `m -> tanh(K m^2 + J m + h)`;
    /// its fixed points are the stationary points of `f`.
    pub fn consistency_map(&self, m: f64) -> f64 {
        self.energy_density_slope(m).tanh()
    }
}

impl std::fmt::Display for Theta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.k, self.j, self.h)
    }
}

/// Two-point entropy `I(m) = (1-m)/2 log((1-m)/2) + (1+m)/2 log((1+m)/2)`,
/// with the convention `0 log 0 = 0` at the boundary. Nonpositive, with
/// minimum `-log 2` at `m = 0` and value `0` at `m = ±1`.
pub fn entropy(m: f64) -> Result<f64> {
    if !(m.abs() <= 1.0) {
        return Err(Error::MagnetizationRange { m });
    }
    let lo = (1.0 - m) / 2.0;
    let hi = (1.0 + m) / 2.0;
    let term = |p: f64| if p > 0.0 { p * p.ln() } else { 0.0 };
    Ok(term(lo) + term(hi))
}

/// The set of magnetization values attainable with `n` spins:
/// `m_k = (2k - n)/n` for `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spectrum {
    n: usize,
}

impl Spectrum {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("spectrum needs n >= 1".into()));
        }
        Ok(Spectrum { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of atoms, `n + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The k-th atom, computed as an exact integer ratio `(2k - n)/n` so that
    /// `atom(n - k) == -atom(k)` bit for bit.
    pub fn atom(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n);
        (2 * k as i64 - self.n as i64) as f64 / self.n as f64
    }

    pub fn atoms(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |k| self.atom(k))
    }

    /// Maps a magnetization value to its atom index. Values must match an
    /// atom to within one representable float; anything else is rejected
    /// with the two nearest atoms attached.
    pub fn index_of(&self, m: f64) -> Result<usize> {
        let guess = (self.n as f64 * (1.0 + m) / 2.0).round();
        let k = guess.clamp(0.0, self.n as f64) as usize;
        if ulp_eq(m, self.atom(k)) {
            return Ok(k);
        }
        let (below, above) = if m < self.atom(k) {
            (self.atom(k.saturating_sub(1)), self.atom(k))
        } else {
            (self.atom(k), self.atom((k + 1).min(self.n)))
        };
        Err(Error::OffSpectrum {
            value: m,
            n: self.n,
            below,
            above,
        })
    }
}

fn ulp_eq(a: f64, b: f64) -> bool {
    a == b || a == b.next_up() || a == b.next_down()
}

/// Table of log configuration counts `log C(n, k)` over a size-`n` spectrum,
/// built from compensated prefix sums of `log i` and mirrored so that
/// `log_count(k) == log_count(n - k)` exactly.
#[derive(Debug, Clone)]
pub struct LogCountTable {
    spectrum: Spectrum,
    log_binom: Vec<f64>,
}

impl LogCountTable {
    pub fn new(n: usize) -> Result<Self> {
        let spectrum = Spectrum::new(n)?;
        // Neumaier-compensated prefix sums keep the table accurate to a few
        // ulps even at n ~ 1e6, where log n! is ~1e7.
        let mut log_fact = vec![0.0f64; n + 1];
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (i, slot) in log_fact.iter_mut().enumerate().skip(1) {
            let term = (i as f64).ln();
            let t = sum + term;
            comp += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
            *slot = sum + comp;
        }
        let mut log_binom = vec![0.0f64; n + 1];
        for k in 0..=n / 2 {
            log_binom[k] = log_fact[n] - log_fact[k] - log_fact[n - k];
            log_binom[n - k] = log_binom[k];
        }
        Ok(LogCountTable {
            spectrum,
            log_binom,
        })
    }

    pub fn n(&self) -> usize {
        self.spectrum.n()
    }

    pub fn spectrum(&self) -> Spectrum {
        self.spectrum
    }

    /// `log C(n, k)` by atom index.
    pub fn log_count_at(&self, k: usize) -> f64 {
        self.log_binom[k]
    }

    /// `log C(n, n(1+m)/2)` for an on-spectrum magnetization `m`.
    pub fn log_count(&self, m: f64) -> Result<f64> {
        Ok(self.log_binom[self.spectrum.index_of(m)?])
    }
}

/// Log configuration count `log C(n, n(1+m)/2)` without keeping the table.
pub fn log_count(n: usize, m: f64) -> Result<f64> {
    LogCountTable::new(n)?.log_count(m)
}

/// All per-(theta, n) derived quantities from one sweep over the spectrum:
/// log partition function, magnetization pmf, and raw moments `mu_1..mu_6`.
#[derive(Debug, Clone)]
pub struct ModelSummary {
    pub theta: Theta,
    pub n: usize,
    pub log_z: f64,
    pub pmf: Vec<f64>,
    pub mu: [f64; 6],
}

impl ModelSummary {
    pub fn new(theta: Theta, n: usize) -> Result<Self> {
        Self::compute(theta, &LogCountTable::new(n)?)
    }

    pub fn compute(theta: Theta, table: &LogCountTable) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite { what: "theta" });
        }
        let spectrum = table.spectrum();
        let n = spectrum.n();
        let nf = n as f64;

        let mut weights = vec![0.0f64; n + 1];
        let mut max_w = f64::NEG_INFINITY;
        for (k, w) in weights.iter_mut().enumerate() {
            *w = table.log_count_at(k) + nf * theta.energy_density(spectrum.atom(k));
            if *w > max_w {
                max_w = *w;
            }
        }

        let mut total = 0.0f64;
        let mut pmf = weights;
        for w in pmf.iter_mut() {
            *w = (*w - max_w).exp();
            total += *w;
        }
        let log_z = max_w + total.ln();
        for p in pmf.iter_mut() {
            *p /= total;
        }

        // Moments are accumulated over (k, n-k) pairs so that exact pmf
        // symmetry (K = h = 0) cancels the odd moments to exactly zero.
        let mut mu = [0.0f64; 6];
        for k in 0..=n / 2 {
            let k_mirror = n - k;
            let m = spectrum.atom(k);
            let mut power = 1.0;
            if k == k_mirror {
                for mu_j in mu.iter_mut() {
                    power *= m;
                    *mu_j += pmf[k] * power;
                }
            } else {
                let m_mirror = spectrum.atom(k_mirror);
                let mut power_mirror = 1.0;
                for mu_j in mu.iter_mut() {
                    power *= m;
                    power_mirror *= m_mirror;
                    *mu_j += pmf[k] * power + pmf[k_mirror] * power_mirror;
                }
            }
        }

        Ok(ModelSummary {
            theta,
            n,
            log_z,
            pmf,
            mu,
        })
    }

    /// Mean magnetization `mu_1`.
    pub fn mean(&self) -> f64 {
        self.mu[0]
    }

    /// Magnetization variance `mu_2 - mu_1^2`.
    pub fn variance(&self) -> f64 {
        self.mu[1] - self.mu[0] * self.mu[0]
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum { n: self.n }
    }
}

/// Large-`N` limit of the pressure per spin: the maximum of the free-energy
/// density `f` over `[-1, 1]`, together with every maximizer whose `f`-value
/// ties the maximum to within `tol`.
///
/// A dense grid (step 1e-3) locates candidate maxima; golden-section
/// refinement pins each one down to near machine precision, so interior
/// maximizers satisfy the consistency equation to high accuracy.
pub fn pressure_limit(theta: Theta, tol: f64) -> Result<(f64, Vec<f64>)> {
    if !theta.is_finite() {
        return Err(Error::NonFinite { what: "theta" });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(
            "pressure tolerance must be > 0".into(),
        ));
    }
    let f = |m: f64| theta.free_energy_density(m).expect("m within [-1, 1]");

    const GRID_POINTS: usize = 2001; // step 1e-3 over [-1, 1]
    let grid_m: Vec<f64> = (0..GRID_POINTS)
        .map(|i| -1.0 + 2.0 * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let grid_f: Vec<f64> = grid_m.iter().map(|&m| f(m)).collect();

    let mut maximizers: Vec<(f64, f64)> = Vec::new();
    for i in 0..GRID_POINTS {
        let left_ok = i == 0 || grid_f[i] >= grid_f[i - 1];
        let right_ok = i + 1 == GRID_POINTS || grid_f[i] >= grid_f[i + 1];
        if left_ok && right_ok {
            let lo = grid_m[i.saturating_sub(1)];
            let hi = grid_m[(i + 1).min(GRID_POINTS - 1)];
            let (m, _) = golden_section_max(&f, lo, hi);
            // Value comparisons can only place the maximizer to about
            // sqrt(eps); polishing the stationarity condition f' = 0
            // recovers full precision where curvature allows.
            let polished = polish_stationary_point(theta, m, lo, hi);
            maximizers.push((polished, f(polished)));
        }
    }

    // Merge refinements that collapsed onto the same point.
    maximizers.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (m, fm) in maximizers {
        match merged.last_mut() {
            Some(last) if (m - last.0).abs() < 1e-6 => {
                if fm > last.1 {
                    *last = (m, fm);
                }
            }
            _ => merged.push((m, fm)),
        }
    }

    let p = merged
        .iter()
        .map(|&(_, fm)| fm)
        .fold(f64::NEG_INFINITY, f64::max);
    let argmax: Vec<f64> = merged
        .into_iter()
        .filter(|&(_, fm)| fm >= p - tol)
        .map(|(m, _)| m)
        .collect();
    Ok((p, argmax))
}

/// Bisects `f'(m) = U'(m) - atanh(m)` on a small window around `m` when the
/// window brackets its sign change; otherwise returns `m` unchanged (flat
/// maxima, where the residual is tiny anyway).
fn polish_stationary_point(theta: Theta, m: f64, lo: f64, hi: f64) -> f64 {
    let slope = |x: f64| theta.energy_density_slope(x) - x.atanh();
    let mut a = (m - 1e-5).max(lo).max(-1.0 + 1e-12);
    let mut b = (m + 1e-5).min(hi).min(1.0 - 1e-12);
    if !(slope(a) > 0.0 && slope(b) < 0.0) {
        return m;
    }
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if slope(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Golden-section maximization on [lo, hi]; returns (argmax, max).
fn golden_section_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while hi - lo > 1e-13 {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Damped fixed-point iteration for the consistency equation
/// `m = tanh(K m^2 + J m + h)`, starting from `m0`. The step is halved
/// whenever the residual changes sign (oscillation), which tames the
/// oscillatory divergence near unstable roots.
pub fn solve_consistency(theta: Theta, m0: f64, tol: f64, max_iter: usize) -> Result<f64> {
    if !(m0.abs() <= 1.0) {
        return Err(Error::MagnetizationRange { m: m0 });
    }
    let mut m = m0;
    let mut damping = 1.0f64;
    let mut prev_residual = f64::NAN;
    for _ in 0..max_iter {
        let residual = theta.consistency_map(m) - m;
        if residual.abs() < tol {
            return Ok(m);
        }
        if prev_residual.is_finite() && residual * prev_residual < 0.0 {
            damping *= 0.5;
        }
        prev_residual = residual;
        m += damping * residual;
    }
    let residual = theta.consistency_map(m) - m;
    if residual.abs() < tol {
        Ok(m)
    } else {
        Err(Error::NonConvergence {
            last: m,
            residual,
            max_iter,
        })
    }
}

/// Gap between the exact log configuration count and its entropy scaling:
/// `log C(n, k) + n I(m)`. Always `<= 0`; bounded below by the explicit
/// Stirling prefactor `0.5 log(2/(pi n (1 - m^2)))` plus a correction no
/// worse than `-(1/(12k) + 1/(12(n-k)) - 1/(12n+1))`.
pub fn lemma1_gap(n: usize, m: f64) -> Result<f64> {
    let table = LogCountTable::new(n)?;
    let k = table.spectrum().index_of(m)?;
    if k == 0 || k == n {
        return Err(Error::BoundaryAtom { m });
    }
    Ok(table.log_count_at(k) + n as f64 * entropy(m)?)
}
