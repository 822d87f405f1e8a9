//! Linear structural equation models and their closure counterpart.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::closure::ClosureOperator;
use crate::dag::WeightedDag;
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::spectral::{Signal, Spectrum};

/// Entries of `I - W^-1` at most this large (relative to the largest one)
/// are treated as roundoff and dropped.
pub const SEM_DROP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SignPolicy {
    #[default]
    Positive,
    /// Each nonzero cause is negated with probability 1/2.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemSignalConfig {
    pub cause_density: f64,
    pub cause_range: (f64, f64),
    pub sigma_c: f64,
    pub sigma_x: f64,
    #[serde(default)]
    pub sign: SignPolicy,
    pub seed: u64,
}

impl Default for SemSignalConfig {
    fn default() -> Self {
        Self { cause_density: 0.1, cause_range: (1.0, 10.0), sigma_c: 0.1, sigma_x: 0.1, sign: SignPolicy::Positive, seed: 0 }
    }
}

impl SemSignalConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.cause_range;
        if !(self.cause_density > 0.0 && self.cause_density <= 1.0) {
            return Err(Error::Config(format!("cause density {} is outside (0, 1]", self.cause_density)));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Config(format!("cause range [{lo}, {hi}] is empty")));
        }
        if !(self.sigma_c >= 0.0 && self.sigma_x >= 0.0) {
            return Err(Error::Config("noise standard deviations must be non-negative".into()));
        }
        Ok(())
    }

    /// `⌈density · n⌉`, ignoring float noise just above an integer.
    pub fn support_size(&self, n: usize) -> usize {
        ((self.cause_density * n as f64 - 1e-9).ceil().max(0.0) as usize).min(n)
    }
}

fn add_noise(values: &mut [f64], sigma: f64, rng: &mut impl Rng) {
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
        for v in values {
            *v += normal.sample(rng);
        }
    }
}

/// `X = W (C + N_c) + N_x` with a sparse cause vector `C`.
///
/// Returns the signal and the noise-free ground truth `C`.
pub fn generate_sem_signal(w: &ClosureOperator, cfg: &SemSignalConfig) -> Result<(Signal, Spectrum)> {
    cfg.validate()?;
    let n = w.n();
    let mut support_rng = rng::stream(cfg.seed, &[tag::CAUSE_SUPPORT]);
    let mut magnitude_rng = rng::stream(cfg.seed, &[tag::CAUSE_MAGNITUDE]);
    let mut support: Vec<usize> = index::sample(&mut support_rng, n, cfg.support_size(n)).into_vec();
    support.sort_unstable();

    let (lo, hi) = cfg.cause_range;
    let mut causes = vec![0.0; n];
    for y in support {
        let mut v = if lo < hi { magnitude_rng.random_range(lo..hi) } else { lo };
        if cfg.sign == SignPolicy::Random && magnitude_rng.random_bool(0.5) {
            v = -v;
        }
        causes[y] = v;
    }

    let mut noisy = causes.clone();
    add_noise(&mut noisy, cfg.sigma_c, &mut rng::stream(cfg.seed, &[tag::CAUSE_NOISE]));
    let mut x = w.matrix().mul_vec(&noisy);
    add_noise(&mut x, cfg.sigma_x, &mut rng::stream(cfg.seed, &[tag::SIGNAL_NOISE]));
    Ok((Signal::new(x), Spectrum::new(causes)))
}

/// The DAG with adjacency `A' = I - W^-1`, whose linear SEM `X = A'X + N`
/// is solved by `X = W N`.
pub fn sem_from_closure(w: &ClosureOperator) -> WeightedDag {
    let n = w.n();
    let mut entries = Vec::new();
    let mut e = vec![0.0; n];
    for y in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[y] = 1.0;
        let column = w.matrix().solve(&e);
        for (x, &v) in column.iter().enumerate().skip(y + 1) {
            if v != 0.0 {
                entries.push((y, x, -v));
            }
        }
    }
    let scale = entries.iter().fold(1.0f64, |m, &(_, _, v)| m.max(v.abs()));
    entries.retain(|&(_, _, v)| v.abs() > SEM_DROP_TOL * scale);
    WeightedDag::new(n, &entries, Some(w.labels().to_vec())).expect("edges point forward in topological order")
}
