//! Two-way relaying on top of the MAC pipeline. The relay decodes `T₁`
//! and forwards it over an ideal downlink; each terminal strips its own
//! contribution to recover the other codeword.
//!
//! Node 1 uses `V̂₂ = (1/α₁)·[T₁ − V₁] mod α₁Λ₂`, which is exact whenever
//! `Λ₁ ⊆ α₁Λ₂`. Node 2 knows `V₂` and `D₂` and undoes the definition of
//! `T₁` directly modulo Λ₁.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::NestedChain;
use crate::error::{check_dim, Error, Result};
use crate::format::sig9;
use crate::lattice::{approx_eq, Lattice};
use crate::mac::{MacConfig, Pipeline, Target};
use crate::parallel::{map_chunks, trial_rng};

fn require_nested(chain: &NestedChain) -> Result<Lattice> {
    let lambda3 = chain.alpha_lambda2()?;
    if !chain.lambda1().is_sublattice_of(&lambda3) {
        return Err(Error::NotNested(
            "recovery needs lambda1 inside alpha1*lambda2".into(),
        ));
    }
    Ok(lambda3)
}

/// Node 1: `V̂₂ = (1/α₁)·[t₁ − v₁] mod α₁Λ₂`.
pub fn node_recover_v2(chain: &NestedChain, t1: &[f64], v1: &[f64]) -> Result<Vec<f64>> {
    let lambda3 = require_nested(chain)?;
    check_dim(chain.dim(), t1.len())?;
    check_dim(chain.dim(), v1.len())?;
    Ok(recover_with(&lambda3, chain.alpha().value(), t1, v1))
}

/// [`node_recover_v2`] without the nesting check, for demonstrating what
/// goes wrong on chains that lack it.
pub fn node_recover_v2_unchecked(chain: &NestedChain, t1: &[f64], v1: &[f64]) -> Result<Vec<f64>> {
    check_dim(chain.dim(), t1.len())?;
    check_dim(chain.dim(), v1.len())?;
    Ok(recover_with(&chain.alpha_lambda2()?, chain.alpha().value(), t1, v1))
}

fn recover_with(lambda3: &Lattice, alpha: f64, t: &[f64], known: &[f64]) -> Vec<f64> {
    let mut r: Vec<f64> = t.iter().zip(known).map(|(a, b)| a - b).collect();
    lambda3.reduce_in_place(&mut r);
    r.iter_mut().for_each(|v| *v /= alpha);
    r
}

/// Node 2 from `T₂`: mirror of [`node_recover_v2`], with the chain's
/// coefficient read as α₂.
pub fn node_recover_v1(chain: &NestedChain, t2: &[f64], v2: &[f64]) -> Result<Vec<f64>> {
    node_recover_v2(&chain.swapped(), t2, v2)
}

/// Node 2 from `T₁`: `V̂₁ = [t₁ − α₁v₂ + α₁·Q_{Λ₂}(v₂ − d₂)] mod Λ₁`.
pub fn node_recover_v1_from_t1(chain: &NestedChain, t1: &[f64], v2: &[f64], d2: &[f64]) -> Result<Vec<f64>> {
    let n = chain.dim();
    check_dim(n, t1.len())?;
    check_dim(n, v2.len())?;
    check_dim(n, d2.len())?;
    Ok(undo_t1(chain, t1, v2, d2))
}

fn undo_t1(chain: &NestedChain, t1: &[f64], v2: &[f64], d2: &[f64]) -> Vec<f64> {
    let a = chain.alpha().value();
    let diff: Vec<f64> = v2.iter().zip(d2).map(|(v, d)| v - d).collect();
    let q = chain.lambda2().nearest_point(&diff).expect("dimensions checked");
    let mut r: Vec<f64> = (0..t1.len()).map(|i| t1[i] - a * v2[i] + a * q[i]).collect();
    chain.lambda1().reduce_in_place(&mut r);
    r
}

/// Node 1 from `T₂`: mirror of [`node_recover_v1_from_t1`].
pub fn node_recover_v2_from_t2(chain: &NestedChain, t2: &[f64], v1: &[f64], d1: &[f64]) -> Result<Vec<f64>> {
    node_recover_v1_from_t1(&chain.swapped(), t2, v1, d1)
}

/// One uplink/downlink round, user indices as in the real network.
#[derive(Debug, Clone, PartialEq)]
pub struct GtwrcTrial {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub relay_estimate: Vec<f64>,
    pub recovered_v2_at_node1: Vec<f64>,
    pub recovered_v1_at_node2: Vec<f64>,
    pub uplink_error: bool,
}

impl GtwrcTrial {
    pub fn end_to_end_error(&self, unit: f64) -> bool {
        !approx_eq(&self.recovered_v2_at_node1, &self.v2, unit)
            || !approx_eq(&self.recovered_v1_at_node2, &self.v1, unit)
    }
}

/// Pipeline plus the precomputed `α·Λ` used by the terminal that only
/// knows its own codeword.
#[derive(Debug, Clone)]
pub struct Relay {
    pipeline: Pipeline,
    lambda3: Lattice,
}

impl Relay {
    pub fn new(config: &MacConfig) -> Result<Self> {
        let pipeline = Pipeline::new(&config.chain, config.target)?;
        let lambda3 = require_nested(pipeline.oriented_chain())?;
        Ok(Self { pipeline, lambda3 })
    }

    pub fn trial<R: Rng + ?Sized>(&self, noise_var: f64, rng: &mut R) -> GtwrcTrial {
        let t = self.pipeline.trial(noise_var, rng);
        let c = self.pipeline.oriented_chain();
        // primary knows its codeword; secondary also uses its dither
        let (vp, vs, ds) = match self.pipeline.target() {
            Target::T1 => (&t.v1, &t.v2, &t.d2),
            Target::T2 => (&t.v2, &t.v1, &t.d1),
        };
        let at_primary = recover_with(&self.lambda3, c.alpha().value(), &t.estimate, vp);
        let at_secondary = undo_t1(c, &t.estimate, vs, ds);
        let (recovered_v2_at_node1, recovered_v1_at_node2) = match self.pipeline.target() {
            Target::T1 => (at_primary, at_secondary),
            Target::T2 => (at_secondary, at_primary),
        };
        GtwrcTrial {
            relay_estimate: t.estimate,
            recovered_v2_at_node1,
            recovered_v1_at_node2,
            uplink_error: !t.correct,
            v1: t.v1,
            v2: t.v2,
            d1: t.d1,
            d2: t.d2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtwrcReport {
    pub snr: f64,
    pub alpha1: f64,
    pub trials: u64,
    pub uplink_errors: u64,
    pub e2e_errors: u64,
    /// Trials where exactly one of uplink and end-to-end failed; zero
    /// when recovery is exact.
    pub mismatched_trials: u64,
    pub master_seed: u64,
}

pub const GTWRC_CSV_HEADER: &str = "snr,alpha1,trials,uplink_errors,e2e_errors,seed";

impl GtwrcReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            sig9(self.snr),
            sig9(self.alpha1),
            self.trials,
            self.uplink_errors,
            self.e2e_errors,
            self.master_seed
        )
    }
}

/// Runs the uplink pipeline and both terminals' recovery for every trial.
/// Same per-trial streams as [`crate::mac::run_monte_carlo`], so the
/// uplink errors match its error count for the same config.
pub fn run_gtwrc(config: &MacConfig) -> Result<GtwrcReport> {
    config.validate()?;
    let relay = Relay::new(config)?;
    let unit = config.chain.lambda_c().unit();
    let partials = map_chunks(config.trials, |range| {
        let (mut up, mut e2e, mut mismatch) = (0u64, 0u64, 0u64);
        for t in range {
            let mut rng = trial_rng(config.master_seed, t);
            let trial = relay.trial(config.noise_var, &mut rng);
            let e = trial.end_to_end_error(unit);
            up += u64::from(trial.uplink_error);
            e2e += u64::from(e);
            mismatch += u64::from(e != trial.uplink_error);
        }
        (up, e2e, mismatch)
    });
    let (up, e2e, mismatch) = partials
        .into_iter()
        .fold((0, 0, 0), |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2));
    Ok(GtwrcReport {
        snr: config.snr(),
        alpha1: config.chain.alpha().value(),
        trials: config.trials,
        uplink_errors: up,
        e2e_errors: e2e,
        mismatched_trials: mismatch,
        master_seed: config.master_seed,
    })
}
