//! Monte Carlo simulation of the two-user Gaussian MAC scheme: dithered
//! nested-lattice encoding, `Y = X₁ + X₂ + Z`, and recovery of
//!
//! `T₁ = [V₁ + α₁V₂ − α₁·Q_{Λ₂}(V₂ − D₂)] mod Λ₁`
//!
//! from `Y_d = [α₁Y + D₁ + α₁D₂] mod Λ₁` by decoding onto Λ_c. The T₂
//! variants exchange the users' roles.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::chain::{CosetSpace, NestedChain, User};
use crate::error::{check_dim, Error, Result};
use crate::format::sig9;
use crate::lattice::Lattice;
use crate::parallel::{map_chunks, trial_rng, CompensatedSum};
use crate::stats::{wilson_interval, Z_95};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    T1,
    T2,
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" | "1" => Ok(Target::T1),
            "T2" | "2" => Ok(Target::T2),
            _ => Err(Error::InvalidParameter(format!("target must be T1 or T2, got '{s}'"))),
        }
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Target::T1 => "T1",
            Target::T2 => "T2",
        })
    }
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `X = [v − d] mod Λ_user`. `v` must be a codeword of `user`; `d` may be
/// any vector (the reduction makes the result independent of its cell).
pub fn encode(chain: &NestedChain, user: User, v: &[f64], d: &[f64]) -> Result<Vec<f64>> {
    check_dim(chain.dim(), v.len())?;
    check_dim(chain.dim(), d.len())?;
    if !chain.coset_space(user)?.is_representative(v)? {
        return Err(Error::ContractViolation(format!("{v:?} is not a codeword of user {user:?}")));
    }
    chain.shaping(user).mod_lattice(&sub(v, d))
}

/// `Y = x₁ + x₂ + Z` with `Z ~ N(0, noise_var·I)`.
pub fn channel<R: Rng + ?Sized>(x1: &[f64], x2: &[f64], noise_var: f64, rng: &mut R) -> Result<Vec<f64>> {
    check_dim(x1.len(), x2.len())?;
    check_noise(noise_var)?;
    let sd = noise_var.sqrt();
    Ok(x1
        .iter()
        .zip(x2)
        .map(|(a, b)| a + b + sd * rng.sample::<f64, _>(StandardNormal))
        .collect())
}

fn check_noise(noise_var: f64) -> Result<()> {
    if noise_var >= 0.0 && noise_var.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("noise variance must be non-negative, got {noise_var}")))
    }
}

/// `T₁ = [v₁ + α₁v₂ − α₁·Q_{Λ₂}(v₂ − d₂)] mod Λ₁`.
pub fn target_t1(chain: &NestedChain, v1: &[f64], v2: &[f64], d2: &[f64]) -> Result<Vec<f64>> {
    let n = chain.dim();
    check_dim(n, v1.len())?;
    check_dim(n, v2.len())?;
    check_dim(n, d2.len())?;
    Ok(target_unchecked(chain, v1, v2, d2))
}

fn target_unchecked(chain: &NestedChain, v1: &[f64], v2: &[f64], d2: &[f64]) -> Vec<f64> {
    let a = chain.alpha().value();
    let mut q = vec![0.0; v2.len()];
    chain.lambda2().quantize_into(&sub(v2, d2), &mut q);
    let mut t = v1.to_vec();
    axpy(a, v2, &mut t);
    axpy(-a, &q, &mut t);
    chain.lambda1().reduce_in_place(&mut t);
    t
}

/// `T₂ = [v₂ + α₂v₁ − α₂·Q_{Λ₁}(v₁ − d₁)] mod Λ₂`, where the chain's
/// coefficient is read as α₂ (`Λ₂ ⊆ α₂Λ₁ ⊆ Λ_c`).
pub fn target_t2(chain: &NestedChain, v1: &[f64], v2: &[f64], d1: &[f64]) -> Result<Vec<f64>> {
    target_t1(&chain.swapped(), v2, v1, d1)
}

/// Decoder statistic `Y_d = [α₁y + d₁ + α₁d₂] mod Λ₁`.
pub fn decoder_statistic(chain: &NestedChain, y: &[f64], d1: &[f64], d2: &[f64]) -> Result<Vec<f64>> {
    let n = chain.dim();
    check_dim(n, y.len())?;
    check_dim(n, d1.len())?;
    check_dim(n, d2.len())?;
    Ok(statistic_unchecked(chain, y, d1, d2))
}

fn statistic_unchecked(chain: &NestedChain, y: &[f64], d1: &[f64], d2: &[f64]) -> Vec<f64> {
    let a = chain.alpha().value();
    let mut yd: Vec<f64> = y.iter().map(|v| a * v).collect();
    axpy(1.0, d1, &mut yd);
    axpy(a, d2, &mut yd);
    chain.lambda1().reduce_in_place(&mut yd);
    yd
}

/// `T̂₁ = Q_{Λ_c}(Y_d)`, reduced modulo Λ₁ to its canonical representative.
pub fn decode_t1(chain: &NestedChain, y: &[f64], d1: &[f64], d2: &[f64]) -> Result<Vec<f64>> {
    let yd = decoder_statistic(chain, y, d1, d2)?;
    Ok(decode_statistic(chain, &yd))
}

fn decode_statistic(chain: &NestedChain, yd: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; yd.len()];
    chain.lambda_c().quantize_into(yd, &mut t);
    chain.lambda1().reduce_in_place(&mut t);
    t
}

/// Role-exchanged twin of [`decode_t1`] for a chain in T₂ orientation.
pub fn decode_t2(chain: &NestedChain, y: &[f64], d1: &[f64], d2: &[f64]) -> Result<Vec<f64>> {
    decode_t1(&chain.swapped(), y, d2, d1)
}

/// `Z_eff = [(α₁ − 1)x₁ + α₁z] mod Λ₁`.
pub fn effective_noise(chain: &NestedChain, x1: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    check_dim(chain.dim(), x1.len())?;
    check_dim(chain.dim(), z.len())?;
    Ok(effective_unchecked(chain, x1, z))
}

fn effective_unchecked(chain: &NestedChain, x1: &[f64], z: &[f64]) -> Vec<f64> {
    let a = chain.alpha().value();
    let mut e: Vec<f64> = x1.iter().map(|v| (a - 1.0) * v).collect();
    axpy(a, z, &mut e);
    chain.lambda1().reduce_in_place(&mut e);
    e
}

/// Per-dimension effective noise of the integer-sum (compute-and-forward)
/// receiver in units of N: `(α − 1)²·2·snr + α²`.
pub fn cf_effective_noise_var(alpha: f64, snr: f64) -> f64 {
    (alpha - 1.0).powi(2) * 2.0 * snr + alpha * alpha
}

/// Unwrapped per-dimension effective noise `(α − 1)²P + α²N`.
pub fn predicted_effective_noise(alpha: f64, power: f64, noise_var: f64) -> f64 {
    (alpha - 1.0).powi(2) * power + alpha * alpha * noise_var
}

#[derive(Debug, Clone)]
pub struct MacConfig {
    pub chain: NestedChain,
    /// Noise variance N per dimension; zero gives a noiseless channel.
    pub noise_var: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub target: Target,
}

impl MacConfig {
    pub fn validate(&self) -> Result<()> {
        check_noise(self.noise_var)?;
        if self.trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        Ok(())
    }

    pub fn snr(&self) -> f64 {
        self.chain.power() / self.noise_var
    }
}

/// Everything drawn and computed in a single channel use, indexed by the
/// real user numbers regardless of the decoding target.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    /// Decoder statistic `Y_d`.
    pub y_d: Vec<f64>,
    /// True target (T₁ or T₂).
    pub target: Vec<f64>,
    pub estimate: Vec<f64>,
    pub z_eff: Vec<f64>,
    pub correct: bool,
}

/// Precomputed per-run state: the chain in the orientation of the decoding
/// target and both users' codebook samplers.
#[derive(Debug, Clone)]
pub struct Pipeline {
    target: Target,
    oriented: NestedChain,
    primary: CosetSpace,
    secondary: CosetSpace,
}

impl Pipeline {
    pub fn new(chain: &NestedChain, target: Target) -> Result<Self> {
        let oriented = match target {
            Target::T1 => chain.clone(),
            Target::T2 => chain.swapped(),
        };
        Ok(Self {
            target,
            primary: oriented.coset_space(User::One)?,
            secondary: oriented.coset_space(User::Two)?,
            oriented,
        })
    }

    /// Chain in the orientation of the target (Λ₁ is the primary user's).
    pub fn oriented_chain(&self) -> &NestedChain {
        &self.oriented
    }

    pub fn target(&self) -> Target {
        self.target
    }

    /// One channel use. Draw order: primary codeword, secondary codeword,
    /// primary dither, secondary dither, noise.
    pub fn trial<R: Rng + ?Sized>(&self, noise_var: f64, rng: &mut R) -> Trial {
        let c = &self.oriented;
        let n = c.dim();
        let vp = self.primary.sample(rng);
        let vs = self.secondary.sample(rng);
        let dp = c.lambda1().sample_dither(rng);
        let ds = c.lambda2().sample_dither(rng);
        let sd = noise_var.sqrt();
        let z: Vec<f64> = (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();

        let xp = c.lambda1().mod_lattice(&sub(&vp, &dp)).expect("dimensions match");
        let xs = c.lambda2().mod_lattice(&sub(&vs, &ds)).expect("dimensions match");
        let y: Vec<f64> = xp.iter().zip(&xs).zip(&z).map(|((a, b), e)| a + b + e).collect();

        let target = target_unchecked(c, &vp, &vs, &ds);
        let y_d = statistic_unchecked(c, &y, &dp, &ds);
        let estimate = decode_statistic(c, &y_d);
        let z_eff = effective_unchecked(c, &xp, &z);
        let correct = same_coset(c.lambda1(), &estimate, &target);

        let (v1, v2, d1, d2, x1, x2) = match self.target {
            Target::T1 => (vp, vs, dp, ds, xp, xs),
            Target::T2 => (vs, vp, ds, dp, xs, xp),
        };
        Trial {
            v1,
            v2,
            d1,
            d2,
            x1,
            x2,
            z,
            y,
            y_d,
            target,
            estimate,
            z_eff,
            correct,
        }
    }
}

/// Whether `a − b` is a lattice point, i.e. `a` and `b` have the same
/// canonical representative.
pub fn same_coset(lat: &Lattice, a: &[f64], b: &[f64]) -> bool {
    lat.contains(&sub(a, b)).unwrap_or(false)
}

/// Outcome of [`run_monte_carlo`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub target: Target,
    pub snr: f64,
    pub alpha1: f64,
    pub n: usize,
    pub family: String,
    pub k: Option<u32>,
    pub f: Option<u32>,
    pub error_count: u64,
    pub trials: u64,
    pub p_e_hat: f64,
    pub wilson_95_interval: (f64, f64),
    pub measured_zeff_var_per_dim: f64,
    pub predicted_zeff_var_per_dim: f64,
    pub vnr_at_predicted_var: f64,
    pub master_seed: u64,
}

pub const SIM_CSV_HEADER: &str =
    "snr,alpha1,n,family,k,f,trials,errors,p_e,ci_lo,ci_hi,zeff_var_meas,zeff_var_pred,vnr,seed";

impl SimReport {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<u32>| v.map(|v| v.to_string()).unwrap_or_default();
        [
            sig9(self.snr),
            sig9(self.alpha1),
            self.n.to_string(),
            self.family.clone(),
            opt(self.k),
            opt(self.f),
            self.trials.to_string(),
            self.error_count.to_string(),
            sig9(self.p_e_hat),
            sig9(self.wilson_95_interval.0),
            sig9(self.wilson_95_interval.1),
            sig9(self.measured_zeff_var_per_dim),
            sig9(self.predicted_zeff_var_per_dim),
            sig9(self.vnr_at_predicted_var),
            self.master_seed.to_string(),
        ]
        .join(",")
    }
}

/// Runs `config.trials` independent channel uses. Trial `t` draws from the
/// stream `(master_seed, t)` and chunk partials merge in order, so the
/// report is identical for any thread count.
pub fn run_monte_carlo(config: &MacConfig) -> Result<SimReport> {
    config.validate()?;
    let pipeline = Pipeline::new(&config.chain, config.target)?;
    let n = config.chain.dim() as f64;
    let partials = map_chunks(config.trials, |range| {
        let mut errors = 0u64;
        let mut zeff = CompensatedSum::default();
        for t in range {
            let mut rng = trial_rng(config.master_seed, t);
            let trial = pipeline.trial(config.noise_var, &mut rng);
            if !trial.correct {
                errors += 1;
            }
            zeff.add(trial.z_eff.iter().map(|v| v * v).sum::<f64>() / n);
        }
        (errors, zeff)
    });
    let mut errors = 0;
    let mut zeff = CompensatedSum::default();
    for (e, z) in &partials {
        errors += e;
        zeff.merge(z);
    }
    Ok(report(config, errors, zeff.value() / config.trials as f64))
}

pub(crate) fn report(config: &MacConfig, errors: u64, measured: f64) -> SimReport {
    let chain = &config.chain;
    let alpha = chain.alpha().value();
    let predicted = predicted_effective_noise(alpha, chain.power(), config.noise_var);
    let vnr = if predicted > 0.0 {
        chain.lambda_c().vnr(predicted).unwrap_or(f64::NAN)
    } else {
        f64::INFINITY
    };
    let desc = chain.descriptor(None);
    SimReport {
        target: config.target,
        snr: config.snr(),
        alpha1: alpha,
        n: chain.dim(),
        family: desc.family.to_string(),
        k: desc.k,
        f: desc.f,
        error_count: errors,
        trials: config.trials,
        p_e_hat: errors as f64 / config.trials as f64,
        wilson_95_interval: wilson_interval(errors, config.trials, Z_95),
        measured_zeff_var_per_dim: measured,
        predicted_zeff_var_per_dim: predicted,
        vnr_at_predicted_var: vnr,
        master_seed: config.master_seed,
    }
}
