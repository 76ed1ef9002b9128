//! The lattice chain `Λ₁ ⊆ α₁Λ₂ ⊆ Λ_c` and the two users' codebooks
//! `C₁ = Λ_c ∩ V(Λ₁)` and `C₂ = (Λ_c/α₁) ∩ V(Λ₂)`.

mod cosets;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use cosets::CosetSpace;

use crate::error::{check_dim, Error, Result};
use crate::lattice::{Family, Lattice, REL_TOL};

/// Samples used to normalize non-integer base lattices to the target power.
pub const NORMALIZATION_SAMPLES: u64 = 1_000_000;
pub const NORMALIZATION_SEED: u64 = 0x6e65_7374_6c61_7474;
/// Samples and seed for the power check in [`NestedChain::validate`]; the
/// seed differs from the normalization one so the check is independent.
pub const VALIDATION_SAMPLES: u64 = 200_000;
pub const VALIDATION_SEED: u64 = 0x7661_6c69_6461_7465;
/// Largest codebook [`NestedChain::enumerate_codebook`] will materialize.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Exact rational scaling coefficient in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alpha {
    num: u32,
    den: u32,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Alpha {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 || num > den {
            return Err(Error::InvalidParameter(format!(
                "alpha must be a fraction in (0, 1], got {num}/{den}"
            )));
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    /// α = 1/k.
    pub fn reciprocal(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        Self::new(1, k)
    }

    pub fn numer(self) -> u32 {
        self.num
    }

    pub fn denom(self) -> u32 {
        self.den
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `Some(k)` when α = 1/k.
    pub fn reciprocal_integer(self) -> Option<u32> {
        (self.num == 1).then_some(self.den)
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse alpha '{s}', expected p/q"));
        match s.split_once('/') {
            Some((p, q)) => Self::new(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?),
            None => Self::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum User {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl User {
    pub fn other(self) -> User {
        match self {
            User::One => User::Two,
            User::Two => User::One,
        }
    }
}

impl TryFrom<u8> for User {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(User::One),
            2 => Ok(User::Two),
            _ => Err(Error::InvalidParameter(format!("user index must be 1 or 2, got {v}"))),
        }
    }
}

/// How a chain was obtained from a base lattice, when it was.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub family: Family,
    pub n: usize,
    pub f: u32,
    /// σ² of the unscaled base lattice used for normalization.
    pub base_sigma2: f64,
    /// Scale `s` with Λ₁ = Λ₂ = s·Λ₀.
    pub s: f64,
}

/// The triple (Λ₁, Λ₂, Λ_c) with α₁ and the per-dimension power P.
///
/// Functions in [`crate::mac`] read the chain in "T₁ orientation": user 1
/// owns the fine lattice Λ_c directly and user 2 owns Λ_c/α₁.
#[derive(Debug, Clone)]
pub struct NestedChain {
    lambda1: Lattice,
    lambda2: Lattice,
    lambda_c: Lattice,
    alpha: Alpha,
    power: f64,
    construction: Option<Construction>,
}

/// One invariant check from [`NestedChain::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub expected: f64,
    pub detail: String,
}

pub fn all_passed(checks: &[CheckResult]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn base_sigma2(family: Family, n: usize) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<(Family, usize), f64>>> = OnceLock::new();
    if family == Family::Integer {
        return Ok(1.0 / 12.0);
    }
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(family, n)) {
        return Ok(*v);
    }
    // deterministic (fixed seed), so racing threads compute the same value
    let v = Lattice::canonical(family, n)?
        .second_moment_mc(NORMALIZATION_SAMPLES, NORMALIZATION_SEED)?
        .sigma2;
    cache.lock().unwrap().insert((family, n), v);
    Ok(v)
}

/// Self-similar chain with α₁ = 1/k: Λ₁ = Λ₂ = s·Λ₀ with σ²(Λ₁) = P,
/// α₁Λ₂ = (s/k)·Λ₀ and Λ_c = (s/(k·f))·Λ₀.
pub fn build_chain(family: Family, n: usize, k: u32, f: u32, power: f64) -> Result<NestedChain> {
    build_chain_with_alpha(family, n, Alpha::reciprocal(k)?, f, power)
}

/// Same construction for an arbitrary rational α₁, with Λ_c = (α₁·s/f)·Λ₀.
///
/// Only α₁ = 1/k yields Λ₁ ⊆ α₁Λ₂; other values build but fail
/// [`NestedChain::validate`].
pub fn build_chain_with_alpha(
    family: Family,
    n: usize,
    alpha: Alpha,
    f: u32,
    power: f64,
) -> Result<NestedChain> {
    if f == 0 {
        return Err(Error::InvalidParameter("f must be at least 1".into()));
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidParameter(format!("power must be positive, got {power}")));
    }
    if !family.has_fast_quantizer() {
        return Err(Error::InvalidParameter(format!(
            "chains need a base family with a fast quantizer, got {family}"
        )));
    }
    let base = Lattice::canonical(family, n)?;
    let sigma2 = base_sigma2(family, n)?;
    let s = (power / sigma2).sqrt();
    let shaping = base.scale(s)?;
    let fine = base.scale(s * alpha.value() / f as f64)?;
    Ok(NestedChain {
        lambda1: shaping.clone(),
        lambda2: shaping,
        lambda_c: fine,
        alpha,
        power,
        construction: Some(Construction {
            family,
            n,
            f,
            base_sigma2: sigma2,
            s,
        }),
    })
}

impl NestedChain {
    /// Chain from explicit lattices. Nothing beyond matching dimensions is
    /// checked here; see [`validate`](Self::validate).
    pub fn from_parts(
        lambda1: Lattice,
        lambda2: Lattice,
        lambda_c: Lattice,
        alpha: Alpha,
        power: f64,
    ) -> Result<Self> {
        check_dim(lambda1.dim(), lambda2.dim())?;
        check_dim(lambda1.dim(), lambda_c.dim())?;
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::InvalidParameter(format!("power must be positive, got {power}")));
        }
        Ok(Self {
            lambda1,
            lambda2,
            lambda_c,
            alpha,
            power,
            construction: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.lambda1.dim()
    }

    pub fn lambda1(&self) -> &Lattice {
        &self.lambda1
    }

    pub fn lambda2(&self) -> &Lattice {
        &self.lambda2
    }

    pub fn lambda_c(&self) -> &Lattice {
        &self.lambda_c
    }

    pub fn shaping(&self, user: User) -> &Lattice {
        match user {
            User::One => &self.lambda1,
            User::Two => &self.lambda2,
        }
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn construction(&self) -> Option<&Construction> {
        self.construction.as_ref()
    }

    /// α₁Λ₂, the middle lattice of the chain.
    pub fn alpha_lambda2(&self) -> Result<Lattice> {
        self.lambda2.scale(self.alpha.value())
    }

    /// Fine lattice a user's codewords live on: Λ_c for user 1, Λ_c/α₁ for user 2.
    pub fn codeword_lattice(&self, user: User) -> Result<Lattice> {
        match user {
            User::One => Ok(self.lambda_c.clone()),
            User::Two => self.lambda_c.scale(1.0 / self.alpha.value()),
        }
    }

    /// The same chain with the users' roles exchanged (Λ₁ ↔ Λ₂). Reading the
    /// result in T₁ orientation is reading `self` in T₂ orientation.
    pub fn swapped(&self) -> NestedChain {
        NestedChain {
            lambda1: self.lambda2.clone(),
            lambda2: self.lambda1.clone(),
            ..self.clone()
        }
    }

    /// Code rate in bits per dimension from Voronoi volume ratios:
    /// R₁ = (1/n)·log₂(V₁/V_c), R₂ = (1/n)·log₂(α₁ⁿ·V₂/V_c).
    pub fn code_rate(&self, user: User) -> f64 {
        let n = self.dim() as f64;
        match user {
            User::One => (self.lambda1.volume() / self.lambda_c.volume()).log2() / n,
            User::Two => {
                self.alpha.value().log2() + (self.lambda2.volume() / self.lambda_c.volume()).log2() / n
            }
        }
    }

    pub fn coset_space(&self, user: User) -> Result<CosetSpace> {
        CosetSpace::new(&self.codeword_lattice(user)?, self.shaping(user))
    }

    /// Every codeword of `user`, sorted lexicographically; the position in
    /// the list is the message index.
    pub fn enumerate_codebook(&self, user: User) -> Result<Codebook> {
        let space = self.coset_space(user)?;
        let codewords = space.enumerate(ENUMERATION_LIMIT)?;
        Ok(Codebook { user, codewords })
    }

    /// Uniform codeword of `user` without materializing the codebook.
    pub fn sample_codeword<R: Rng + ?Sized>(&self, user: User, rng: &mut R) -> Result<Vec<f64>> {
        Ok(self.coset_space(user)?.sample(rng))
    }

    /// Runs every chain invariant and reports measured values.
    pub fn validate(&self) -> Vec<CheckResult> {
        let mut checks = Vec::new();
        let alpha_l2 = self.alpha_lambda2();

        let mut nesting = |name: &str, coarse: Result<Lattice>, fine: Result<Lattice>| {
            let res = match (coarse, fine) {
                (Ok(c), Ok(f)) => c.index_matrix(&f).map(|_| ()),
                (Err(e), _) | (_, Err(e)) => Err(e),
            };
            checks.push(CheckResult {
                name: name.to_string(),
                passed: res.is_ok(),
                measured: if res.is_ok() { 1.0 } else { 0.0 },
                expected: 1.0,
                detail: match res {
                    Ok(()) => "integer index matrix".to_string(),
                    Err(e) => e.to_string(),
                },
            });
        };
        nesting("lambda1 in lambda_c", Ok(self.lambda1.clone()), Ok(self.lambda_c.clone()));
        nesting("alpha1*lambda2 in lambda_c", alpha_l2.clone(), Ok(self.lambda_c.clone()));
        nesting("lambda1 in alpha1*lambda2", Ok(self.lambda1.clone()), alpha_l2);

        for (name, lat) in [("sigma2(lambda1) = P", &self.lambda1), ("sigma2(lambda2) = P", &self.lambda2)] {
            let check = match lat.second_moment_mc(VALIDATION_SAMPLES, VALIDATION_SEED) {
                Ok(est) => {
                    let rel = (est.sigma2 - self.power).abs() / self.power;
                    CheckResult {
                        name: name.to_string(),
                        passed: rel <= 0.01,
                        measured: est.sigma2,
                        expected: self.power,
                        detail: format!("relative error {rel:.3e} (std err {:.3e})", est.std_err),
                    }
                }
                Err(e) => CheckResult {
                    name: name.to_string(),
                    passed: false,
                    measured: f64::NAN,
                    expected: self.power,
                    detail: e.to_string(),
                },
            };
            checks.push(check);
        }

        let r1 = self.code_rate(User::One);
        let r2 = self.code_rate(User::Two);
        let expected = r1 + self.alpha.value().log2();
        let dev = (r2 - expected).abs();
        checks.push(CheckResult {
            name: "R2 = R1 + log2(alpha1)".to_string(),
            passed: dev <= REL_TOL * expected.abs().max(1.0),
            measured: r2,
            expected,
            detail: format!("deviation {dev:.3e}"),
        });
        checks
    }

    /// Serializable summary used by the command-line front end.
    pub fn descriptor(&self, measured_sigma2: Option<f64>) -> ChainDescriptor {
        let c = self.construction;
        ChainDescriptor {
            family: c.map(|c| c.family).unwrap_or(self.lambda1.family()),
            n: self.dim(),
            k: self.alpha.reciprocal_integer(),
            alpha1: self.alpha.to_string(),
            f: c.map(|c| c.f),
            power: self.power,
            s: c.map(|c| c.s),
            base_sigma2: c.map(|c| c.base_sigma2),
            measured_sigma2,
            r1: self.code_rate(User::One),
            r2: self.code_rate(User::Two),
        }
    }
}

/// JSON form of a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDescriptor {
    pub family: Family,
    pub n: usize,
    pub k: Option<u32>,
    pub alpha1: String,
    pub f: Option<u32>,
    #[serde(rename = "P")]
    pub power: f64,
    pub s: Option<f64>,
    pub base_sigma2: Option<f64>,
    pub measured_sigma2: Option<f64>,
    pub r1: f64,
    pub r2: f64,
}

/// A user's codebook; message `w` maps to `codewords[w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub user: User,
    pub codewords: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    /// Message index of `v`, if it is a codeword.
    pub fn index_of(&self, v: &[f64], unit: f64) -> Option<usize> {
        self.codewords
            .iter()
            .position(|c| crate::lattice::approx_eq(c, v, unit))
    }
}
