use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};

/// Counts of canonical invariant encodings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EmpiricalDistribution {
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
}

impl EmpiricalDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, class: String) {
        *self.counts.entry(class).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &EmpiricalDistribution) {
        for (k, &v) in &other.counts {
            *self.counts.entry(k.clone()).or_insert(0) += v;
        }
        self.total += other.total;
    }

    pub fn count(&self, class: &str) -> u64 {
        self.counts.get(class).copied().unwrap_or(0)
    }

    pub fn prob(&self, class: &str) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(class) as f64 / self.total as f64
        }
    }

    /// Binomial standard error of `prob(class)`.
    pub fn std_error(&self, class: &str) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let p = self.prob(class);
        (p * (1.0 - p) / self.total as f64).sqrt()
    }

    pub fn classes(&self) -> impl Iterator<Item = &String> {
        self.counts.keys()
    }
}

/// Plug-in total variation distance `1/2 sum |p - q|` between two empirical laws.
pub fn plug_in_tv(p: &EmpiricalDistribution, q: &EmpiricalDistribution) -> Result<f64> {
    if p.total == 0 || q.total == 0 {
        return Err(Error::usage("total variation of an empty sample"));
    }
    let keys: BTreeSet<&String> = p.classes().chain(q.classes()).collect();
    Ok(keys.into_iter().map(|k| (p.prob(k) - q.prob(k)).abs()).sum::<f64>() / 2.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TvEstimate {
    pub tv: f64,
    /// Percentile bootstrap interval at 95%.
    pub ci: [f64; 2],
    pub resamples: usize,
}

fn resample<R: Rng + ?Sized>(d: &EmpiricalDistribution, rng: &mut R) -> EmpiricalDistribution {
    // multinomial draw by sequential conditional binomials
    let mut out = EmpiricalDistribution::new();
    let mut remaining = d.total;
    let mut mass_left = d.total;
    for (k, &c) in &d.counts {
        if remaining == 0 {
            break;
        }
        let draw = if c >= mass_left {
            remaining
        } else {
            Binomial::new(remaining, c as f64 / mass_left as f64).expect("valid binomial").sample(rng)
        };
        mass_left -= c;
        remaining -= draw;
        if draw > 0 {
            out.counts.insert(k.clone(), draw);
        }
    }
    out.total = d.total;
    out
}

/// Plug-in TV with a nonparametric bootstrap interval from `resamples` multinomial resamples of each side.
pub fn tv_estimate<R: Rng + ?Sized>(
    p: &EmpiricalDistribution,
    q: &EmpiricalDistribution,
    resamples: usize,
    rng: &mut R,
) -> Result<TvEstimate> {
    let tv = plug_in_tv(p, q)?;
    if resamples == 0 {
        return Ok(TvEstimate { tv, ci: [tv, tv], resamples });
    }
    let mut boot: Vec<f64> = (0..resamples)
        .map(|_| plug_in_tv(&resample(p, rng), &resample(q, rng)))
        .collect::<Result<_>>()?;
    boot.sort_by(|a, b| a.total_cmp(b));
    let at = |f: f64| boot[((f * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Ok(TvEstimate { tv, ci: [at(0.025), at(0.975)], resamples })
}

/// Self-distance between two half-samples of one model: the TV level that sampling noise alone produces.
pub fn noise_floor(first_half: &EmpiricalDistribution, second_half: &EmpiricalDistribution) -> Result<f64> {
    plug_in_tv(first_half, second_half)
}
