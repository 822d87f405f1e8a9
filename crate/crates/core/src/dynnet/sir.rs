use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DynNetError, DynamicNetwork};
use crate::rng::{self, tag};
use crate::spectral::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SirConfig {
    /// Characteristic distance `ρ` in meters.
    pub rho: f64,
    /// Cutoff distance `ε` in meters.
    pub eps: f64,
    /// Time steps from infection to recovery.
    pub recovery_delay: usize,
    pub initial_infected: usize,
    pub seed: u64,
}

impl Default for SirConfig {
    fn default() -> Self {
        Self { rho: 10.0, eps: 20.0, recovery_delay: 5, initial_infected: 5, seed: 0 }
    }
}

impl SirConfig {
    pub fn validate(&self) -> Result<(), DynNetError> {
        if !(self.rho > 0.0) {
            return Err(DynNetError::InvalidConfig("rho must be positive"));
        }
        if !(self.eps > 0.0) {
            return Err(DynNetError::InvalidConfig("eps must be positive"));
        }
        if self.recovery_delay == 0 {
            return Err(DynNetError::InvalidConfig("recovery delay must be at least 1"));
        }
        Ok(())
    }

    /// `λ_{u,v} = e^{-d/ρ}` within the cutoff, else 0.
    pub fn force(&self, distance: f64) -> f64 {
        if distance <= self.eps {
            (-distance / self.rho).exp()
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SirState {
    Susceptible,
    Infected,
    Recovered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SirTrace {
    individuals: usize,
    /// `states[t][v]` for `t` in `0..=m`.
    states: Vec<Vec<SirState>>,
}

impl SirTrace {
    pub fn state(&self, v: usize, t: usize) -> SirState {
        self.states[t][v]
    }

    pub fn layers(&self) -> usize {
        self.states.len()
    }

    /// 1 at `(v, t)` iff `v` is infected at `t`, in unrolled node order.
    pub fn signal(&self) -> Signal {
        Signal::new(
            self.states
                .iter()
                .flat_map(|layer| layer.iter().map(|&s| if s == SirState::Infected { 1.0 } else { 0.0 }))
                .collect(),
        )
    }

    pub fn infected_count(&self) -> usize {
        self.states.iter().flatten().filter(|&&s| s == SirState::Infected).count()
    }

    pub fn individuals(&self) -> usize {
        self.individuals
    }
}

/// Runs the epidemic over the observed time points.
///
/// Contacts at `t` can infect at `t + 1`. An individual infected at `t`
/// recovers at `t + recovery_delay`. Layer `m` of the trace repeats layer
/// `m - 1`.
pub fn sir_simulate(net: &DynamicNetwork, cfg: &SirConfig) -> Result<SirTrace, DynNetError> {
    cfg.validate()?;
    let n = net.individuals();
    let m = net.time_points();
    if cfg.initial_infected > n {
        return Err(DynNetError::InitialExceedsPopulation { initial: cfg.initial_infected, population: n });
    }
    let mut states = Vec::with_capacity(m + 1);
    if m == 0 {
        states.push(vec![SirState::Susceptible; n]);
        return Ok(SirTrace { individuals: n, states });
    }

    let mut rng = rng::stream(cfg.seed, &[tag::SIR]);
    let mut layer = vec![SirState::Susceptible; n];
    let mut infected_at = vec![usize::MAX; n];
    let mut initial = index::sample(&mut rng, n, cfg.initial_infected).into_vec();
    initial.sort_unstable();
    for v in initial {
        layer[v] = SirState::Infected;
        infected_at[v] = 0;
    }
    states.push(layer);

    for t in 0..m - 1 {
        let current = &states[t];
        let mut force = vec![0.0; n];
        for c in net.contacts_at(t) {
            let f = cfg.force(c.distance);
            match (current[c.u], current[c.v]) {
                (SirState::Infected, SirState::Susceptible) => force[c.v] += f,
                (SirState::Susceptible, SirState::Infected) => force[c.u] += f,
                _ => {}
            }
        }
        let mut next = current.clone();
        for v in 0..n {
            match current[v] {
                SirState::Infected if t + 1 >= infected_at[v] + cfg.recovery_delay => next[v] = SirState::Recovered,
                SirState::Susceptible if force[v] > 0.0 => {
                    if rng.random::<f64>() < 1.0 - (-force[v]).exp() {
                        next[v] = SirState::Infected;
                        infected_at[v] = t + 1;
                    }
                }
                _ => {}
            }
        }
        states.push(next);
    }
    states.push(states[m - 1].clone());
    Ok(SirTrace { individuals: n, states })
}
