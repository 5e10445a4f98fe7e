use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::decompose::Decomposer;
use crate::measures::inequalities::{main_inequality_from_components, verify_l1_bound};
use crate::measures::SignedMeasure;
use crate::modules::{ConcreteModule, ModuleType};
use crate::montecarlo::{substream, StreamTag};
use crate::ring::{Ideal, Ring};

/// Largest numerator magnitude of a random test measure.
const WEIGHT_RANGE: i128 = 24;

/// Checks on one module across all random trials.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ModuleSweep {
    pub module: String,
    pub order: u32,
    pub submodules: usize,
    /// Constructed dimensions sum to `|M|`, match the closed form, and vanish exactly off cyclic quotients.
    pub dimensions_ok: bool,
    pub trials: usize,
    pub reconstruction_failures: usize,
    pub orthogonality_failures: usize,
    pub inequality_checks: usize,
    pub inequality_violations: usize,
    pub l1_checks: usize,
    pub l1_violations: usize,
}

impl ModuleSweep {
    pub fn passed(&self) -> bool {
        self.dimensions_ok
            && self.reconstruction_failures == 0
            && self.orthogonality_failures == 0
            && self.inequality_violations == 0
            && self.l1_violations == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureSweep {
    pub ring: String,
    pub max_module: u32,
    pub trials: usize,
    pub seed: u64,
    pub modules: Vec<ModuleSweep>,
    pub passed: bool,
}

/// Nonzero module types over `ring` of order at most `max_module`.
pub fn sweep_modules(ring: &Ring, max_module: u32) -> Vec<ModuleType> {
    let max_length = (max_module as f64).log(ring.q() as f64).floor() as u32;
    ModuleType::enumerate(ring.spec(), max_length)
        .into_iter()
        .filter(|t| !t.is_trivial() && t.cardinality_u64().is_some_and(|c| c <= max_module as u64))
        .collect()
}

fn random_signed<R: Rng>(module: &Arc<ConcreteModule>, rng: &mut R) -> Result<SignedMeasure> {
    let num = (0..module.size()).map(|_| rng.random_range(-WEIGHT_RANGE..=WEIGHT_RANGE)).collect();
    SignedMeasure::from_integers(module.clone(), num, rng.random_range(1..=60))
}

/// Random probability measure; about half the trials get a sparse support.
fn random_probability<R: Rng>(module: &Arc<ConcreteModule>, rng: &mut R) -> Result<SignedMeasure> {
    let keep = if rng.random_bool(0.5) { 1.0 } else { rng.random_range(0.05..0.5) };
    let mut num: Vec<i128> = (0..module.size())
        .map(|_| if rng.random_bool(keep) { rng.random_range(1..=WEIGHT_RANGE) } else { 0 })
        .collect();
    if num.iter().all(|&w| w == 0) {
        let x = rng.random_range(0..num.len());
        num[x] = 1;
    }
    let total = num.iter().sum();
    SignedMeasure::from_integers(module.clone(), num, total)
}

#[derive(Default)]
struct TrialTally {
    reconstruction_failures: usize,
    orthogonality_failures: usize,
    inequality_checks: usize,
    inequality_violations: usize,
    l1_checks: usize,
    l1_violations: usize,
}

impl TrialTally {
    fn merge(mut self, o: TrialTally) -> Self {
        self.reconstruction_failures += o.reconstruction_failures;
        self.orthogonality_failures += o.orthogonality_failures;
        self.inequality_checks += o.inequality_checks;
        self.inequality_violations += o.inequality_violations;
        self.l1_checks += o.l1_checks;
        self.l1_violations += o.l1_violations;
        self
    }
}

fn check_measure(dec: &Decomposer, nu: &SignedMeasure, tally: &mut TrialTally) -> Result<()> {
    let comps = dec.decompose(nu)?;
    let mut sum = SignedMeasure::zero(dec.module().clone());
    for c in &comps {
        sum = sum.add(&c.component)?;
    }
    if sum.weights() != nu.weights() {
        tally.reconstruction_failures += 1;
    }
    // components off cyclic quotients must vanish; the rest must be pairwise orthogonal
    let live: Vec<&SignedMeasure> = comps.iter().filter(|c| c.chi_class.is_some()).map(|c| &c.component).collect();
    let dead_nonzero = comps.iter().any(|c| c.chi_class.is_none() && !c.component.is_zero());
    let mut orthogonal = !dead_nonzero;
    for (i, a) in live.iter().enumerate() {
        for b in &live[i + 1..] {
            orthogonal &= a.inner_product(b)?.numer() == &0;
        }
    }
    if !orthogonal {
        tally.orthogonality_failures += 1;
    }
    for j in 1..=dec.module().ring().e() {
        tally.inequality_checks += 1;
        if !main_inequality_from_components(dec, nu, &comps, Ideal { exponent: j })?.holds {
            tally.inequality_violations += 1;
        }
    }
    Ok(())
}

fn sweep_module(ring: &Ring, index: u32, t: &ModuleType, trials: usize, seed: u64) -> Result<ModuleSweep> {
    let module = Arc::new(ConcreteModule::new(ring, t.clone())?);
    let dec = Decomposer::new(module.clone())?;
    let lattice = dec.lattice();
    let mut total_dim = 0;
    let mut dimensions_ok = true;
    for i in 0..lattice.len() {
        let d = dec.constructed_dimension(i)?;
        dimensions_ok &= d == dec.dimension_formula(i) && (d > 0) == lattice.quotient_is_cyclic(i);
        total_dim += d;
    }
    dimensions_ok &= total_dim == module.size() as u64;
    let tally = (0..trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<TrialTally> {
            let mut rng = substream(seed, index, StreamTag::Sweep, trial);
            let mut tally = TrialTally::default();
            check_measure(&dec, &random_signed(&module, &mut rng)?, &mut tally)?;
            let p = random_probability(&module, &mut rng)?;
            check_measure(&dec, &p, &mut tally)?;
            for r in verify_l1_bound(&dec, &p)? {
                tally.l1_checks += 1;
                if !r.holds {
                    tally.l1_violations += 1;
                }
            }
            Ok(tally)
        })
        .try_reduce(TrialTally::default, |a, b| Ok(a.merge(b)))?;
    Ok(ModuleSweep {
        module: t.shorthand(),
        order: module.size(),
        submodules: lattice.len(),
        dimensions_ok,
        trials,
        reconstruction_failures: tally.reconstruction_failures,
        orthogonality_failures: tally.orthogonality_failures,
        inequality_checks: tally.inequality_checks,
        inequality_violations: tally.inequality_violations,
        l1_checks: tally.l1_checks,
        l1_violations: tally.l1_violations,
    })
}

/// Decomposition and inequality checks on every module of order at most `max_module`, with
/// `trials` random signed measures and `trials` random probability measures per module.
pub fn sweep_measures(ring: &Ring, max_module: u32, trials: usize, seed: u64) -> Result<MeasureSweep> {
    if trials == 0 {
        return Err(Error::usage("trials must be at least 1"));
    }
    let types = sweep_modules(ring, max_module);
    if types.is_empty() {
        return Err(Error::usage(format!("no nonzero module over {} has order <= {max_module}", ring.spec())));
    }
    let modules = types
        .iter()
        .enumerate()
        .map(|(i, t)| sweep_module(ring, i as u32, t, trials, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasureSweep {
        ring: ring.spec().to_string(),
        max_module,
        trials,
        seed,
        passed: modules.iter().all(ModuleSweep::passed),
        modules,
    })
}
