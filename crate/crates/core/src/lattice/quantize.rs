//! Fast nearest-point decoders for the canonical embeddings of ℤⁿ, Dₙ and E₈.
//!
//! All decoders implement the same tie-break as the exhaustive search: among
//! the lattice points whose squared distance is within the tie tolerance of
//! the minimum, the lexicographically smallest point (in coordinates) wins.
//! For ℤⁿ that is round-half-down on every coordinate.
//!
//! Integer-coordinate lattices (ℤⁿ and Dₙ) are decoded with a two-state
//! dynamic program over the parity of the coordinate sum. Tracking the
//! suffix minima lets a greedy left-to-right pass pick the smallest feasible
//! value at every coordinate without giving up optimality, which is exactly
//! the lexicographic rule.

/// Suffix-minimum table for "nearest integer vector, optionally with even
/// coordinate sum".
pub(crate) struct ParityDecoder<'a> {
    y: &'a [f64],
    even: bool,
    // best[i][p]: minimal cost of coordinates i.. whose values sum to parity p
    best: Vec<[f64; 2]>,
}

#[inline]
fn candidates(y: f64) -> [f64; 4] {
    let f = y.floor();
    [f - 1.0, f, f + 1.0, f + 2.0]
}

#[inline]
fn parity(v: f64) -> usize {
    (v as i64).rem_euclid(2) as usize
}

impl<'a> ParityDecoder<'a> {
    pub(crate) fn new(y: &'a [f64], even: bool) -> Self {
        let n = y.len();
        let mut best = vec![[f64::INFINITY; 2]; n + 1];
        best[n] = [0.0, f64::INFINITY];
        for i in (0..n).rev() {
            for v in candidates(y[i]) {
                let cost = (y[i] - v) * (y[i] - v);
                let pv = parity(v);
                for q in 0..2 {
                    let total = cost + best[i + 1][q];
                    let p = (q + pv) % 2;
                    if total < best[i][p] {
                        best[i][p] = total;
                    }
                }
            }
        }
        Self { y, even, best }
    }

    /// Minimal squared distance.
    pub(crate) fn min(&self) -> f64 {
        if self.even {
            self.best[0][0]
        } else {
            self.best[0][0].min(self.best[0][1])
        }
    }

    /// Writes the lexicographically smallest admissible vector whose squared
    /// distance does not exceed `budget`; returns that distance, or `None`
    /// when no such vector exists.
    pub(crate) fn lex_min_within(&self, budget: f64, out: &mut [f64]) -> Option<f64> {
        let n = self.y.len();
        let mut allowed = [true, !self.even];
        let mut remaining = budget;
        let mut spent = 0.0;
        for i in 0..n {
            let mut chosen = None;
            for v in candidates(self.y[i]) {
                let cost = (self.y[i] - v) * (self.y[i] - v);
                let pv = parity(v);
                let mut next = [false; 2];
                for (q, slot) in next.iter_mut().enumerate() {
                    *slot = allowed[(q + pv) % 2] && cost + self.best[i + 1][q] <= remaining;
                }
                if next[0] || next[1] {
                    chosen = Some((v, cost, next));
                    break;
                }
            }
            let (v, cost, next) = chosen?;
            out[i] = v;
            remaining -= cost;
            spent += cost;
            allowed = next;
        }
        // only the empty suffix with parity 0 remains
        allowed[0].then_some(spent)
    }
}

/// Nearest point of ℤⁿ (`even == false`) or Dₙ (`even == true`).
pub(crate) fn integer_lattice(y: &[f64], even: bool, tol: f64, out: &mut [f64]) -> f64 {
    let dp = ParityDecoder::new(y, even);
    dp.lex_min_within(dp.min() + tol, out)
        .expect("minimum is always feasible")
}

/// Nearest point of E₈ = D₈ ∪ (D₈ + ½·1).
pub(crate) fn e8(y: &[f64], tol: f64, out: &mut [f64]) -> f64 {
    debug_assert_eq!(y.len(), 8);
    let mut shifted = [0.0; 8];
    for (s, v) in shifted.iter_mut().zip(y) {
        *s = v - 0.5;
    }
    let even = ParityDecoder::new(y, true);
    let odd = ParityDecoder::new(&shifted, true);
    let budget = even.min().min(odd.min()) + tol;

    let mut a = [0.0; 8];
    let mut b = [0.0; 8];
    let da = even.lex_min_within(budget, &mut a);
    let db = odd.lex_min_within(budget, &mut b);
    for v in b.iter_mut() {
        *v += 0.5;
    }
    // The two cosets never share a coordinate value, so the first coordinate
    // settles the lexicographic order.
    match (da, db) {
        (Some(da), Some(db)) => {
            if a[0] < b[0] {
                out.copy_from_slice(&a);
                da
            } else {
                out.copy_from_slice(&b);
                db
            }
        }
        (Some(da), None) => {
            out.copy_from_slice(&a);
            da
        }
        (None, Some(db)) => {
            out.copy_from_slice(&b);
            db
        }
        (None, None) => unreachable!("budget covers the global minimum"),
    }
}
