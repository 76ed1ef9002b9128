use super::{dist2, lex_cmp, Lattice};
use crate::error::{check_dim, Error, Result};

/// Depth-first enumeration of every integer vector `z` with
/// `‖z·G − x‖² ≤ bound`, using the triangular factor of `Gᵀ = Q·R` so that
/// coordinates can be fixed from the last to the first.
struct Enumerator<'a> {
    r: &'a nalgebra::DMatrix<f64>,
    target: Vec<f64>,
    bound: f64,
    z: Vec<f64>,
    found: Vec<Vec<f64>>,
}

impl Enumerator<'_> {
    fn descend(&mut self, i: usize, acc: f64) {
        let n = self.z.len();
        let mut s = self.target[i];
        for j in i + 1..n {
            s -= self.r[(i, j)] * self.z[j];
        }
        let rii = self.r[(i, i)];
        let rem = self.bound - acc;
        if rem < 0.0 {
            return;
        }
        let center = s / rii;
        let width = rem.sqrt() / rii.abs();
        let lo = (center - width).ceil() as i64;
        let hi = (center + width).floor() as i64;
        for zi in lo..=hi {
            let zi = zi as f64;
            let d = rii * zi - s;
            let total = acc + d * d;
            if total > self.bound {
                continue;
            }
            self.z[i] = zi;
            if i == 0 {
                self.found.push(self.z.clone());
            } else {
                self.descend(i - 1, total);
            }
        }
    }
}

impl Lattice {
    /// Integer coefficient vectors of every lattice point within `radius` of `x`.
    pub fn points_within(&self, x: &[f64], radius: f64) -> Result<Vec<Vec<f64>>> {
        check_dim(self.dim(), x.len())?;
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!("radius must be non-negative, got {radius}")));
        }
        let n = self.dim();
        let mut target = vec![0.0; n];
        for (i, t) in target.iter_mut().enumerate() {
            *t = (0..n).map(|j| self.q_t[(i, j)] * x[j]).sum();
        }
        let mut e = Enumerator {
            r: &self.r,
            target,
            // slack so that points exactly on the sphere survive rounding
            bound: radius * radius * (1.0 + 1e-9) + self.tie_tol(),
            z: vec![0.0; n],
            found: Vec::new(),
        };
        e.descend(n - 1, 0.0);
        Ok(e.found)
    }

    /// Exhaustive closest-point search over every lattice point within
    /// `radius_bound` of `x`, with the same tie-break as
    /// [`nearest_point`](Lattice::nearest_point). Independent of the fast
    /// family decoders, so it serves as their oracle.
    pub fn brute_force_cvp(&self, x: &[f64], radius_bound: f64) -> Result<Vec<f64>> {
        let coeffs = self.points_within(x, radius_bound)?;
        let n = self.dim();
        let points: Vec<(f64, Vec<f64>)> = coeffs
            .iter()
            .map(|z| {
                let mut p = vec![0.0; n];
                self.combine(z, &mut p);
                (dist2(x, &p), p)
            })
            .collect();
        let best = points
            .iter()
            .map(|(d, _)| *d)
            .fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            return Err(Error::BoundTooSmall { radius: radius_bound });
        }
        let ctol = self.coord_tol();
        points
            .into_iter()
            .filter(|(d, _)| *d <= best + self.tie_tol())
            .map(|(_, p)| p)
            .min_by(|a, b| lex_cmp(a, b, ctol))
            .ok_or(Error::BoundTooSmall { radius: radius_bound })
    }
}
