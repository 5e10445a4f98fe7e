//! Reproducible sampling of random matrices over finite chain rings and
//! empirical comparison of their invariants.

mod fit;
mod sampling;
mod swap;
mod tv;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

pub use fit::{fit_rate, RateFit, RatePoint};
pub use sampling::{sample_matrix, substream, EntrySampler, StreamTag, BLOCK, STREAM_VERSION};
pub use swap::{column_swap_exact, swap_distance, SwapReport, SWAP_BUDGET};
pub use tv::{noise_floor, plug_in_tv, tv_estimate, EmpiricalDistribution, TvEstimate};

use crate::equidist::{norms_and_theta, EntryDistribution};
use crate::error::{Error, Result};
use crate::matrix::{cokernel, determinant, howell_form, MatrixOverR};
use crate::ring::Ring;

/// Default number of bootstrap resamples for TV intervals.
pub const DEFAULT_RESAMPLES: usize = 200;

/// Largest number of matrices visited by exact enumeration.
pub const EXACT_BUDGET: u64 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    Coker,
    Det,
    Span,
    CokerDet,
    SpanDet,
}

impl Invariant {
    pub fn needs_square(self) -> bool {
        matches!(self, Invariant::Det | Invariant::CokerDet | Invariant::SpanDet)
    }

    /// Canonical encoding of the invariant of `m`: the partition of the cokernel, the
    /// determinant code, the Howell encoding of the column span, or a pair of these.
    pub fn encode(self, m: &MatrixOverR) -> Result<String> {
        let coker = || cokernel(m).shorthand();
        let det = || determinant(m).map(|d| d.code().to_string());
        let span = || howell_form(m).encoding();
        Ok(match self {
            Invariant::Coker => coker(),
            Invariant::Det => det()?,
            Invariant::Span => span(),
            Invariant::CokerDet => format!("({},{})", coker(), det()?),
            Invariant::SpanDet => format!("({},{})", span(), det()?),
        })
    }
}

impl FromStr for Invariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['_', 'x', '×', '+'], "-").as_str() {
            "coker" => Ok(Invariant::Coker),
            "det" => Ok(Invariant::Det),
            "span" => Ok(Invariant::Span),
            "coker-det" => Ok(Invariant::CokerDet),
            "span-det" => Ok(Invariant::SpanDet),
            _ => Err(Error::parse(format!("unknown invariant {s:?}"))),
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Invariant::Coker => "coker",
            Invariant::Det => "det",
            Invariant::Span => "span",
            Invariant::CokerDet => "coker-det",
            Invariant::SpanDet => "span-det",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Iid,
    Haar,
}

impl Model {
    fn tag(self) -> StreamTag {
        match self {
            Model::Iid => StreamTag::Iid,
            Model::Haar => StreamTag::Haar,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentPlan {
    pub entry: EntryDistribution,
    pub u: i32,
    pub n_values: Vec<u32>,
    pub samples: u64,
    pub invariant: Invariant,
    pub seed: u64,
    pub workers: usize,
    pub resamples: usize,
}

impl ExperimentPlan {
    pub fn ring(&self) -> &Ring {
        self.entry.ring()
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::usage("samples must be at least 1"));
        }
        if self.workers < 1 {
            return Err(Error::usage("workers must be at least 1"));
        }
        if self.n_values.is_empty() {
            return Err(Error::usage("empty range of n"));
        }
        for &n in &self.n_values {
            sampling::columns(n, self.u)?;
        }
        if self.invariant.needs_square() && self.u != 0 {
            return Err(Error::usage(format!("invariant {} needs square matrices (u = 0)", self.invariant)));
        }
        Ok(())
    }
}

/// Counts for one `(n, model)`, with the two interleaved half-samples kept for the noise floor.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSample {
    pub full: EmpiricalDistribution,
    pub halves: [EmpiricalDistribution; 2],
}

/// Samples `count` invariants of `n x (n + u)` matrices. Samples are generated in blocks
/// of [`BLOCK`], each from its own substream, and merged in block order.
pub fn sample_invariants(
    entry: &EntryDistribution,
    model: Model,
    n: u32,
    u: i32,
    count: u64,
    invariant: Invariant,
    seed: u64,
) -> Result<ModelSample> {
    let ring = entry.ring();
    let sampler = match model {
        Model::Iid => EntrySampler::new(entry)?,
        Model::Haar => EntrySampler::haar(ring),
    };
    let blocks = count.div_ceil(BLOCK);
    let parts: Vec<[EmpiricalDistribution; 2]> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, n, model.tag(), b);
            let mut halves = [EmpiricalDistribution::new(), EmpiricalDistribution::new()];
            for i in 0..(count - b * BLOCK).min(BLOCK) {
                let m = sample_matrix(ring, n, u, &sampler, &mut rng)?;
                halves[(i % 2) as usize].record(invariant.encode(&m)?);
            }
            Ok(halves)
        })
        .collect::<Result<_>>()?;
    let mut halves = [EmpiricalDistribution::new(), EmpiricalDistribution::new()];
    for p in &parts {
        halves[0].merge(&p[0]);
        halves[1].merge(&p[1]);
    }
    let mut full = halves[0].clone();
    full.merge(&halves[1]);
    Ok(ModelSample { full, halves })
}

#[derive(Clone, Debug)]
pub struct NResult {
    pub n: u32,
    pub iid: ModelSample,
    pub haar: ModelSample,
    pub tv: TvEstimate,
    /// Larger of the two half-sample self-distances.
    pub noise_floor: f64,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub plan: ExperimentPlan,
    pub per_n: Vec<NResult>,
    pub rate_fit: std::result::Result<RateFit, String>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::resource(format!("cannot start worker pool: {e}")))
}

/// Runs both models at every `n` and compares them.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    pool(plan.workers)?.install(|| {
        let mut per_n = Vec::new();
        for &n in &plan.n_values {
            let iid = sample_invariants(&plan.entry, Model::Iid, n, plan.u, plan.samples, plan.invariant, plan.seed)?;
            let haar = sample_invariants(&plan.entry, Model::Haar, n, plan.u, plan.samples, plan.invariant, plan.seed)?;
            let mut rng = substream(plan.seed, n, StreamTag::Bootstrap, 0);
            let tv = tv_estimate(&iid.full, &haar.full, plan.resamples, &mut rng)?;
            let floor = |s: &ModelSample| {
                if s.halves[1].total == 0 {
                    Ok(0.0)
                } else {
                    noise_floor(&s.halves[0], &s.halves[1])
                }
            };
            let noise_floor = floor(&iid)?.max(floor(&haar)?);
            per_n.push(NResult { n, iid, haar, tv, noise_floor });
        }
        let points = per_n.iter().map(|r| RatePoint::new(r.n, r.tv.tv, r.tv.ci, r.noise_floor)).collect();
        let bound = norms_and_theta(&plan.entry, None).theta_lower;
        let rate_fit = fit_rate(points, Some(bound), 1.0).map_err(|e| e.to_string());
        Ok(ExperimentResult { plan: plan.clone(), per_n, rate_fit })
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HistogramEntry {
    pub class: String,
    pub count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanEcho {
    pub ring: String,
    pub entry: String,
    pub u: i32,
    pub n: Vec<u32>,
    pub samples: u64,
    pub invariant: Invariant,
    pub seed: u64,
    pub workers: usize,
    pub resamples: usize,
    pub stream: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerNEntry {
    pub n: u32,
    pub model: Model,
    pub total: u64,
    pub histogram: Vec<HistogramEntry>,
    pub tv_vs_haar: Option<f64>,
    pub ci: Option<[f64; 2]>,
    pub noise_floor: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema: &'static str,
    pub plan: PlanEcho,
    pub per_n: Vec<PerNEntry>,
    pub rate_fit: Option<RateFit>,
    pub rate_fit_error: Option<String>,
}

fn histogram(d: &EmpiricalDistribution) -> Vec<HistogramEntry> {
    d.counts.iter().map(|(k, &v)| HistogramEntry { class: k.clone(), count: v }).collect()
}

impl ExperimentResult {
    /// The versioned report layout; worker count is echoed but never affects the counts.
    pub fn report(&self) -> ExperimentReport {
        let p = &self.plan;
        let mut per_n = Vec::new();
        for r in &self.per_n {
            per_n.push(PerNEntry {
                n: r.n,
                model: Model::Iid,
                total: r.iid.full.total,
                histogram: histogram(&r.iid.full),
                tv_vs_haar: Some(r.tv.tv),
                ci: Some(r.tv.ci),
                noise_floor: Some(r.noise_floor),
            });
            per_n.push(PerNEntry {
                n: r.n,
                model: Model::Haar,
                total: r.haar.full.total,
                histogram: histogram(&r.haar.full),
                tv_vs_haar: None,
                ci: None,
                noise_floor: None,
            });
        }
        ExperimentReport {
            schema: "v1",
            plan: PlanEcho {
                ring: p.ring().spec().to_string(),
                entry: p.entry.to_string(),
                u: p.u,
                n: p.n_values.clone(),
                samples: p.samples,
                invariant: p.invariant,
                seed: p.seed,
                workers: p.workers,
                resamples: p.resamples,
                stream: STREAM_VERSION,
            },
            per_n,
            rate_fit: self.rate_fit.clone().ok(),
            rate_fit_error: self.rate_fit.clone().err(),
        }
    }
}

/// Exact law of the invariant, by enumerating every matrix with entries in the support.
pub fn exact_distribution(
    entry: &EntryDistribution,
    n: u32,
    u: i32,
    invariant: Invariant,
) -> Result<BTreeMap<String, BigRational>> {
    let cols = sampling::columns(n, u)?;
    if invariant.needs_square() && u != 0 {
        return Err(Error::usage("determinants need square matrices"));
    }
    let cells = n as usize * cols;
    let support = entry.support();
    let total = (support.len() as u64)
        .checked_pow(cells as u32)
        .filter(|&t| t <= EXACT_BUDGET)
        .ok_or_else(|| Error::resource(format!("{}^{cells} matrices exceed the budget {EXACT_BUDGET}", support.len())))?;
    let ring = entry.ring();
    let weights: Vec<BigRational> = support
        .iter()
        .map(|(_, w)| BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom())))
        .collect();
    let parts: Vec<BTreeMap<String, BigRational>> = (0..total)
        .into_par_iter()
        .fold(BTreeMap::new, |mut acc, index| {
            let mut idx = index;
            let mut data = Vec::with_capacity(cells);
            let mut w = BigRational::one();
            for _ in 0..cells {
                let d = (idx % support.len() as u64) as usize;
                idx /= support.len() as u64;
                data.push(support[d].0);
                w *= &weights[d];
            }
            let m = MatrixOverR::new(ring, n as usize, cols, data).expect("shape checked");
            let class = invariant.encode(&m).expect("square checked");
            *acc.entry(class).or_insert_with(BigRational::zero) += w;
            acc
        })
        .collect();
    let mut out = BTreeMap::new();
    for part in parts {
        for (k, v) in part {
            *out.entry(k).or_insert_with(BigRational::zero) += v;
        }
    }
    Ok(out)
}
