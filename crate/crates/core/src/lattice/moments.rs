use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Family, Lattice};
use crate::error::{Error, Result};
use crate::parallel::{map_chunks, trial_rng, CompensatedSum};

pub const MIN_MOMENT_SAMPLES: u64 = 1000;

/// Monte Carlo estimate of the per-dimension second moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub sigma2: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl Lattice {
    /// σ²(Λ) = E‖U‖²/n for U uniform on the Voronoi cell.
    ///
    /// Sample `i` is drawn from the stream `(seed, i)`, so the estimate is a
    /// pure function of `(self, samples, seed)`.
    pub fn second_moment_mc(&self, samples: u64, seed: u64) -> Result<MomentEstimate> {
        if samples < MIN_MOMENT_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "second moment needs at least {MIN_MOMENT_SAMPLES} samples, got {samples}"
            )));
        }
        let n = self.dim();
        let partials = map_chunks(samples, |range| {
            let mut sum = CompensatedSum::default();
            let mut sum_sq = CompensatedSum::default();
            let mut u = vec![0.0; n];
            for i in range {
                let mut rng = trial_rng(seed, i);
                self.sample_dither_into(&mut rng, &mut u);
                let v = u.iter().map(|x| x * x).sum::<f64>() / n as f64;
                sum.add(v);
                sum_sq.add(v * v);
            }
            (sum, sum_sq)
        });
        let (mut sum, mut sum_sq) = (CompensatedSum::default(), CompensatedSum::default());
        for (s, q) in &partials {
            sum.merge(s);
            sum_sq.merge(q);
        }
        let m = samples as f64;
        let mean = sum.value() / m;
        let var = ((sum_sq.value() - m * mean * mean) / (m - 1.0)).max(0.0);
        Ok(MomentEstimate {
            sigma2: mean,
            std_err: (var / m).sqrt(),
            samples,
        })
    }

    /// Closed-form σ² for the family lattices: `1/12` for ℤⁿ,
    /// `1/12 + 1/(2n(n+1))` for Dₙ and `929/12960` for E₈, times the
    /// squared scale. `None` for general lattices.
    pub fn second_moment_exact(&self) -> Option<f64> {
        let n = self.dim() as f64;
        let unit = match self.family {
            Family::Integer => 1.0 / 12.0,
            Family::Checkerboard => 1.0 / 12.0 + 1.0 / (2.0 * n * (n + 1.0)),
            Family::E8 => 929.0 / 12960.0,
            Family::General => return None,
        };
        Some(unit * self.scale * self.scale)
    }

    /// G(Λ) = σ²(Λ)/V^{2/n}, with the standard error scaled alike.
    pub fn normalized_second_moment(&self, samples: u64, seed: u64) -> Result<MomentEstimate> {
        let est = self.second_moment_mc(samples, seed)?;
        let norm = self.volume().powf(2.0 / self.dim() as f64);
        Ok(MomentEstimate {
            sigma2: est.sigma2 / norm,
            std_err: est.std_err / norm,
            samples,
        })
    }
}

/// Uniform draw from the fundamental parallelepiped, exposed for tests that
/// need raw samples.
pub fn parallelepiped_point<R: Rng + ?Sized>(lat: &Lattice, rng: &mut R) -> Vec<f64> {
    let u: Vec<f64> = (0..lat.dim()).map(|_| rng.random::<f64>()).collect();
    let mut out = vec![0.0; lat.dim()];
    lat.combine(&u, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_lattice_is_one_twelfth() {
        let z4 = Lattice::integer(4).unwrap();
        let est = z4.second_moment_mc(200_000, 11).unwrap();
        assert!((est.sigma2 - 1.0 / 12.0).abs() < 3.0 * est.std_err, "{est:?}");
    }

    #[test]
    fn deterministic_given_seed() {
        let d4 = Lattice::checkerboard(4).unwrap();
        assert_eq!(d4.second_moment_mc(5000, 3).unwrap(), d4.second_moment_mc(5000, 3).unwrap());
        assert_ne!(d4.second_moment_mc(5000, 3).unwrap(), d4.second_moment_mc(5000, 4).unwrap());
    }

    #[test]
    fn closed_forms_agree_with_sampling() {
        // D₂ is a rotated √2·ℤ², D₃ the fcc lattice with G = 0.0787
        assert!((Lattice::checkerboard(2).unwrap().second_moment_exact().unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let d3 = Lattice::checkerboard(3).unwrap();
        let g = d3.second_moment_exact().unwrap() / 2f64.powf(2.0 / 3.0);
        assert!((g - 0.078745).abs() < 1e-6);
        for lat in [Lattice::checkerboard(5).unwrap(), Lattice::e8().scale(0.5).unwrap()] {
            let est = lat.second_moment_mc(100_000, 9).unwrap();
            let exact = lat.second_moment_exact().unwrap();
            assert!((est.sigma2 - exact).abs() < 4.0 * est.std_err, "{est:?} vs {exact}");
        }
    }

    #[test]
    fn too_few_samples() {
        let z1 = Lattice::integer(1).unwrap();
        assert!(z1.second_moment_mc(999, 0).is_err());
    }

    #[test]
    fn normalized_moment_is_scale_invariant() {
        let z3 = Lattice::integer(3).unwrap();
        let a = z3.normalized_second_moment(100_000, 5).unwrap();
        let b = z3.scale(5.0).unwrap().normalized_second_moment(100_000, 5).unwrap();
        assert!((a.sigma2 - b.sigma2).abs() < 3.0 * (a.std_err + b.std_err));
        assert!((a.sigma2 - 1.0 / 12.0).abs() < 3.0 * a.std_err);
    }
}
