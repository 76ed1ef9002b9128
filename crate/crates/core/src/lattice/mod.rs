//! Exact lattice primitives for small dimensions: nearest-point
//! quantization, modulo reduction, volumes and dither sampling.
//!
//! Generators follow the row convention: a lattice point is `z·G` for an
//! integer row vector `z`.

mod enumerate;
mod moments;
pub(crate) mod quantize;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub use moments::{parallelepiped_point, MomentEstimate, MIN_MOMENT_SAMPLES};

/// Relative tolerance used for every floating-point comparison.
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Scaled integer lattice ℤⁿ.
    #[serde(rename = "Z")]
    Integer,
    /// Checkerboard lattice Dₙ (integer vectors with even coordinate sum).
    #[serde(rename = "D")]
    Checkerboard,
    #[serde(rename = "E8")]
    E8,
    #[serde(rename = "general")]
    General,
}

impl Family {
    /// Whether a dedicated nearest-point decoder exists.
    pub fn has_fast_quantizer(self) -> bool {
        !matches!(self, Family::General)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Integer => "Z",
            Family::Checkerboard => "D",
            Family::E8 => "E8",
            Family::General => "general",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z" | "zn" | "integer" => Ok(Family::Integer),
            "d" | "dn" | "checkerboard" => Ok(Family::Checkerboard),
            "e8" => Ok(Family::E8),
            "general" => Ok(Family::General),
            other => Err(Error::InvalidParameter(format!("unknown lattice family '{other}'"))),
        }
    }
}

/// A full-rank lattice in ℝⁿ.
///
/// Family-tagged lattices are stored as a positive multiple of the canonical
/// family generator, which lets the fast decoders work in canonical
/// coordinates. Values are immutable once built.
#[derive(Debug, Clone)]
pub struct Lattice {
    family: Family,
    scale: f64,
    generator: DMatrix<f64>,
    inverse: DMatrix<f64>,
    // QR factors of Gᵀ, used by the exhaustive search
    q_t: DMatrix<f64>,
    r: DMatrix<f64>,
    volume: f64,
}

fn canonical_generator(family: Family, n: usize) -> Result<DMatrix<f64>> {
    match family {
        Family::Integer => {
            if n == 0 {
                return Err(Error::InvalidParameter("dimension must be positive".into()));
            }
            Ok(DMatrix::identity(n, n))
        }
        Family::Checkerboard => {
            if n < 2 {
                return Err(Error::InvalidParameter("Dn requires n >= 2".into()));
            }
            let mut g = DMatrix::zeros(n, n);
            g[(0, 0)] = -1.0;
            g[(0, 1)] = -1.0;
            for i in 1..n {
                g[(i, i - 1)] = 1.0;
                g[(i, i)] = -1.0;
            }
            Ok(g)
        }
        Family::E8 => {
            if n != 8 {
                return Err(Error::InvalidParameter(format!("E8 has dimension 8, not {n}")));
            }
            let mut g = DMatrix::zeros(8, 8);
            g[(0, 0)] = 2.0;
            for i in 1..7 {
                g[(i, i - 1)] = -1.0;
                g[(i, i)] = 1.0;
            }
            for j in 0..8 {
                g[(7, j)] = 0.5;
            }
            Ok(g)
        }
        Family::General => Err(Error::InvalidParameter(
            "general lattices need an explicit generator".into(),
        )),
    }
}

impl Lattice {
    fn build(family: Family, scale: f64, generator: DMatrix<f64>) -> Result<Self> {
        let n = generator.nrows();
        if n == 0 || generator.ncols() != n {
            return Err(Error::InvalidParameter("generator must be square and non-empty".into()));
        }
        if generator.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("generator has non-finite entries".into()));
        }
        let det = generator.determinant();
        let row_scale = generator
            .row_iter()
            .map(|r| r.norm())
            .fold(0.0_f64, f64::max);
        if det.abs() <= 1e-12 * row_scale.powi(n as i32) || det == 0.0 {
            return Err(Error::Singular(det));
        }
        let inverse = generator
            .clone()
            .try_inverse()
            .ok_or(Error::Singular(det))?;
        let qr = generator.transpose().qr();
        Ok(Self {
            family,
            scale,
            q_t: qr.q().transpose(),
            r: qr.r(),
            generator,
            inverse,
            volume: det.abs(),
        })
    }

    /// Canonical generator of `family` in dimension `n`.
    pub fn canonical(family: Family, n: usize) -> Result<Self> {
        Self::build(family, 1.0, canonical_generator(family, n)?)
    }

    pub fn integer(n: usize) -> Result<Self> {
        Self::canonical(Family::Integer, n)
    }

    pub fn checkerboard(n: usize) -> Result<Self> {
        Self::canonical(Family::Checkerboard, n)
    }

    pub fn e8() -> Self {
        Self::canonical(Family::E8, 8).expect("E8 generator is valid")
    }

    /// Lattice generated by the rows of `rows`, decoded by exhaustive search.
    pub fn from_generator(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("generator must be square".into()));
        }
        let g = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::build(Family::General, 1.0, g)
    }

    /// `c·Λ`. A family lattice is symmetric under negation, so for those
    /// only `|c|` is recorded and the tag is preserved.
    pub fn scale(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("scale factor must be nonzero, got {c}")));
        }
        match self.family {
            Family::General => Self::build(Family::General, 1.0, &self.generator * c),
            family => {
                let scale = self.scale * c.abs();
                let g = canonical_generator(family, self.dim())? * scale;
                Self::build(family, scale, g)
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Multiple of the canonical generator (1 for general lattices).
    pub fn scale_factor(&self) -> f64 {
        self.scale
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn generator_rows(&self) -> Vec<Vec<f64>> {
        self.generator
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// Voronoi cell volume, `|det G|`.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Characteristic length used to turn relative tolerances into absolute ones.
    pub fn unit(&self) -> f64 {
        match self.family {
            Family::General => self.volume.powf(1.0 / self.dim() as f64),
            _ => self.scale,
        }
    }

    pub(crate) fn tie_tol(&self) -> f64 {
        REL_TOL * self.unit() * self.unit()
    }

    pub(crate) fn coord_tol(&self) -> f64 {
        REL_TOL * self.unit()
    }

    /// Upper bound on the covering radius.
    pub fn covering_radius_bound(&self) -> f64 {
        let n = self.dim() as f64;
        match self.family {
            Family::Integer => self.scale * n.sqrt() / 2.0,
            Family::Checkerboard => self.scale * (n.sqrt() / 2.0).max(1.0),
            Family::E8 => self.scale,
            // Babai rounding moves each coefficient by at most one half
            Family::General => 0.5 * self.generator.row_iter().map(|r| r.norm()).sum::<f64>(),
        }
    }

    /// Volume-to-noise ratio `V^{2/n} / (2πe·σ²)`.
    pub fn vnr(&self, noise_var: f64) -> Result<f64> {
        if noise_var <= 0.0 || !noise_var.is_finite() {
            return Err(Error::InvalidParameter(format!("noise variance must be positive, got {noise_var}")));
        }
        let n = self.dim() as f64;
        Ok(self.volume.powf(2.0 / n) / (2.0 * std::f64::consts::PI * std::f64::consts::E * noise_var))
    }

    /// Row vector `x·G`.
    pub(crate) fn combine(&self, coeffs: &[f64], out: &mut [f64]) {
        row_times(coeffs, &self.generator, out);
    }

    /// Real coefficients `x·G⁻¹`.
    pub fn coefficients(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut out = vec![0.0; x.len()];
        row_times(x, &self.inverse, &mut out);
        Ok(out)
    }

    /// Whether `x` is a lattice point (coefficients integral to 1e-9 relative).
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self
            .coefficients(x)?
            .iter()
            .all(|c| (c - c.round()).abs() <= REL_TOL * c.abs().max(1.0)))
    }

    /// Integer matrix `B` with `G_self = B·G_fine`, i.e. the proof that
    /// `self ⊆ fine`.
    pub fn index_matrix(&self, fine: &Lattice) -> Result<Vec<Vec<i64>>> {
        check_dim(fine.dim(), self.dim())?;
        let b = &self.generator * &fine.inverse;
        let mut worst = 0.0_f64;
        let rows = b
            .row_iter()
            .map(|r| {
                r.iter()
                    .map(|&v| {
                        let dev = (v - v.round()).abs() / v.abs().max(1.0);
                        worst = worst.max(dev);
                        v.round() as i64
                    })
                    .collect()
            })
            .collect();
        if worst > REL_TOL {
            return Err(Error::NotNested(format!(
                "coarse·fine⁻¹ deviates from an integer matrix by {worst:.3e}"
            )));
        }
        Ok(rows)
    }

    pub fn is_sublattice_of(&self, fine: &Lattice) -> bool {
        self.index_matrix(fine).is_ok()
    }

    /// Nearest lattice point, ties resolved towards the lexicographically
    /// smallest point.
    pub fn nearest_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut out = vec![0.0; x.len()];
        self.quantize_into(x, &mut out);
        Ok(out)
    }

    /// `x mod Λ = x − Q(x)`; the result lies in the half-open Voronoi cell.
    pub fn mod_lattice(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut out = vec![0.0; x.len()];
        self.reduce_into(x, &mut out);
        Ok(out)
    }

    pub(crate) fn quantize_into(&self, x: &[f64], out: &mut [f64]) {
        let tol = REL_TOL;
        match self.family {
            Family::Integer | Family::Checkerboard | Family::E8 => {
                let y: Vec<f64> = x.iter().map(|v| v / self.scale).collect();
                match self.family {
                    Family::Integer => quantize::integer_lattice(&y, false, tol, out),
                    Family::Checkerboard => quantize::integer_lattice(&y, true, tol, out),
                    _ => quantize::e8(&y, tol, out),
                };
                for v in out.iter_mut() {
                    *v *= self.scale;
                }
            }
            Family::General => {
                let p = self
                    .brute_force_cvp(x, self.babai_distance(x) + self.coord_tol())
                    .expect("Babai point lies within its own distance");
                out.copy_from_slice(&p);
            }
        }
    }

    pub(crate) fn reduce_into(&self, x: &[f64], out: &mut [f64]) {
        self.quantize_into(x, out);
        for (o, v) in out.iter_mut().zip(x) {
            *o = v - *o;
        }
    }

    /// Reduces `x` in place.
    pub(crate) fn reduce_in_place(&self, x: &mut [f64]) {
        let mut q = vec![0.0; x.len()];
        self.quantize_into(x, &mut q);
        for (v, q) in x.iter_mut().zip(&q) {
            *v -= q;
        }
    }

    fn babai_distance(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        let mut c = vec![0.0; n];
        row_times(x, &self.inverse, &mut c);
        for v in c.iter_mut() {
            *v = v.round();
        }
        let mut p = vec![0.0; n];
        self.combine(&c, &mut p);
        dist2(x, &p).sqrt()
    }

    /// Uniform sample over the fundamental Voronoi cell: a uniform point of
    /// the fundamental parallelepiped reduced modulo the lattice.
    pub fn sample_dither<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.sample_dither_into(rng, &mut out);
        out
    }

    pub(crate) fn sample_dither_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let u: Vec<f64> = (0..self.dim()).map(|_| rng.random::<f64>()).collect();
        self.combine(&u, out);
        self.reduce_in_place(out);
    }
}

pub(crate) fn row_times(x: &[f64], m: &DMatrix<f64>, out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        *o = x.iter().enumerate().map(|(i, v)| v * m[(i, j)]).sum();
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lexicographic comparison treating coordinates within `tol` as equal.
pub(crate) fn lex_cmp(a: &[f64], b: &[f64], tol: f64) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if x < &(y - tol) {
            return Ordering::Less;
        }
        if x > &(y + tol) {
            return Ordering::Greater;
        }
    }
    Ordering::Equal
}

/// Equality of two vectors up to `REL_TOL` relative to `unit`.
pub fn approx_eq(a: &[f64], b: &[f64], unit: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= REL_TOL * unit)
}
