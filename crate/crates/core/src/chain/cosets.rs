use std::cmp::Ordering;

use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{lex_cmp, Lattice};

/// Upper-triangular basis of the row lattice of `b` (row Hermite form
/// without the off-diagonal reduction). Diagonal entries are positive.
pub(crate) fn triangularize(b: &[Vec<i64>]) -> Vec<Vec<i128>> {
    let n = b.len();
    let mut m: Vec<Vec<i128>> = b
        .iter()
        .map(|r| r.iter().map(|&v| v as i128).collect())
        .collect();
    for j in 0..n {
        for i in j + 1..n {
            while m[i][j] != 0 {
                let q = m[j][j] / m[i][j];
                for c in 0..n {
                    let v = m[i][c];
                    m[j][c] -= q * v;
                }
                m.swap(i, j);
            }
        }
        if m[j][j] < 0 {
            for v in m[j].iter_mut() {
                *v = -*v;
            }
        }
    }
    m
}

/// The quotient `fine / coarse` of a nested pair, with a box of coset
/// representatives in fine-lattice coefficients.
#[derive(Debug, Clone)]
pub struct CosetSpace {
    fine: Lattice,
    coarse: Lattice,
    radices: Vec<u64>,
}

impl CosetSpace {
    pub fn new(fine: &Lattice, coarse: &Lattice) -> Result<Self> {
        let b = coarse.index_matrix(fine)?;
        let h = triangularize(&b);
        let radices = (0..h.len())
            .map(|i| {
                u64::try_from(h[i][i]).map_err(|_| {
                    Error::NotNested("index of the sublattice is not representable".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if radices.contains(&0) {
            return Err(Error::NotNested("coarse lattice is rank deficient in the fine one".into()));
        }
        Ok(Self {
            fine: fine.clone(),
            coarse: coarse.clone(),
            radices,
        })
    }

    /// Number of cosets, `Vol(coarse)/Vol(fine)`.
    pub fn size(&self) -> u128 {
        self.radices.iter().map(|&r| r as u128).product()
    }

    pub fn fine(&self) -> &Lattice {
        &self.fine
    }

    pub fn coarse(&self) -> &Lattice {
        &self.coarse
    }

    fn representative(&self, coeffs: &[f64], out: &mut [f64]) {
        self.fine.combine(coeffs, out);
        self.coarse.reduce_in_place(out);
    }

    /// Uniform coset representative inside the coarse Voronoi cell.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.radices.len()];
        self.sample_into(rng, &mut out);
        out
    }

    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let z: Vec<f64> = self
            .radices
            .iter()
            .map(|&r| rng.random_range(0..r) as f64)
            .collect();
        self.representative(&z, out);
    }

    /// Every representative, sorted lexicographically.
    pub fn enumerate(&self, limit: u128) -> Result<Vec<Vec<f64>>> {
        let size = self.size();
        if size > limit {
            return Err(Error::EnumerationTooLarge { size, limit });
        }
        let n = self.radices.len();
        let mut z = vec![0u64; n];
        let mut out = Vec::with_capacity(size as usize);
        for _ in 0..size {
            let coeffs: Vec<f64> = z.iter().map(|&v| v as f64).collect();
            let mut p = vec![0.0; n];
            self.representative(&coeffs, &mut p);
            out.push(p);
            // mixed-radix increment
            for (d, r) in z.iter_mut().zip(&self.radices) {
                *d += 1;
                if *d < *r {
                    break;
                }
                *d = 0;
            }
        }
        let tol = self.fine.coord_tol();
        out.sort_by(|a, b| lex_cmp(a, b, tol).then(Ordering::Equal));
        Ok(out)
    }

    /// Whether `v` is a fine-lattice point in the coarse cell.
    pub fn is_representative(&self, v: &[f64]) -> Result<bool> {
        if !self.fine.contains(v)? {
            return Ok(false);
        }
        let r = self.coarse.mod_lattice(v)?;
        Ok(crate::lattice::approx_eq(&r, v, self.coarse.unit()))
    }
}
