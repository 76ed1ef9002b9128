use nestcode::{Family, Lattice};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < &(y - TOL) {
            return true;
        }
        if x > &(y + TOL) {
            return false;
        }
    }
    false
}

fn pick(cands: impl Iterator<Item = Vec<f64>>, x: &[f64]) -> Vec<f64> {
    let cands: Vec<(f64, Vec<f64>)> = cands.map(|p| (dist2(&p, x), p)).collect();
    let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let mut out: Option<Vec<f64>> = None;
    for (d, p) in cands {
        if d <= best + TOL && out.as_ref().is_none_or(|o| lex_less(&p, o)) {
            out = Some(p);
        }
    }
    out.unwrap()
}

/// Integer vectors within one of `round(x)` in each coordinate, optionally
/// restricted to even coordinate sum. The nearest point of ℤⁿ or Dₙ always
/// has coordinates in `{⌊x⌋, ⌈x⌉}`, so the box is enough.
fn box_points(x: &[f64], even: bool) -> Vec<Vec<f64>> {
    let n = x.len();
    let base: Vec<i64> = x.iter().map(|v| v.round() as i64).collect();
    let mut out = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let p: Vec<i64> = base
            .iter()
            .map(|b| {
                let d = (c % 3) as i64 - 1;
                c /= 3;
                b + d
            })
            .collect();
        if !even || p.iter().sum::<i64>() % 2 == 0 {
            out.push(p.into_iter().map(|v| v as f64).collect());
        }
    }
    out
}

/// Box-search oracle for unit-scale ℤⁿ, Dₙ and E₈ = D₈ ∪ (D₈ + ½).
fn oracle(family: Family, x: &[f64]) -> Vec<f64> {
    match family {
        Family::Integer => pick(box_points(x, false).into_iter(), x),
        Family::Checkerboard => pick(box_points(x, true).into_iter(), x),
        Family::E8 => {
            let shifted: Vec<f64> = x.iter().map(|v| v - 0.5).collect();
            let coset = box_points(&shifted, true)
                .into_iter()
                .map(|p| p.into_iter().map(|v| v + 0.5).collect());
            pick(box_points(x, true).into_iter().chain(coset), x)
        }
        Family::General => unreachable!(),
    }
}

fn family_dims() -> impl Strategy<Value = (Family, usize)> {
    prop_oneof![
        (1usize..=8).prop_map(|n| (Family::Integer, n)),
        (2usize..=8).prop_map(|n| (Family::Checkerboard, n)),
        Just((Family::E8, 8)),
    ]
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-6.0f64..6.0, n)
}

/// Points on a quarter-integer grid: many exact ties for all three families.
fn grid_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-12i32..12).prop_map(|v| v as f64 / 4.0), n)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn fast_quantizer_matches_box_oracle(
        (fam, x) in family_dims().prop_flat_map(|(f, n)| (Just(f), point(n)))
    ) {
        let lat = Lattice::canonical(fam, x.len()).unwrap();
        prop_assert_eq!(lat.nearest_point(&x).unwrap(), oracle(fam, &x));
    }

    #[test]
    fn fast_quantizer_matches_box_oracle_on_ties(
        (fam, x) in family_dims().prop_flat_map(|(f, n)| (Just(f), grid_point(n)))
    ) {
        let lat = Lattice::canonical(fam, x.len()).unwrap();
        prop_assert_eq!(lat.nearest_point(&x).unwrap(), oracle(fam, &x));
    }

    #[test]
    fn fast_quantizer_matches_enumeration(
        (fam, x) in family_dims().prop_flat_map(|(f, n)| (Just(f), grid_point(n))),
        c in 0.2f64..4.0,
    ) {
        let lat = Lattice::canonical(fam, x.len()).unwrap().scale(c).unwrap();
        let y: Vec<f64> = x.iter().map(|v| v * c).collect();
        let brute = lat.brute_force_cvp(&y, lat.covering_radius_bound()).unwrap();
        prop_assert!(close(&lat.nearest_point(&y).unwrap(), &brute, 1e-9 * c));
    }

    #[test]
    fn general_lattice_matches_its_family(
        (fam, x) in family_dims().prop_flat_map(|(f, n)| (Just(f), point(n)))
    ) {
        let lat = Lattice::canonical(fam, x.len()).unwrap();
        let general = Lattice::from_generator(&lat.generator_rows()).unwrap();
        prop_assert!(close(&general.nearest_point(&x).unwrap(), &lat.nearest_point(&x).unwrap(), 1e-9));
    }

    #[test]
    fn mod_is_idempotent(
        (fam, x) in family_dims().prop_flat_map(|(f, n)| (Just(f), point(n))),
        c in 0.1f64..5.0,
    ) {
        let lat = Lattice::canonical(fam, x.len()).unwrap().scale(c).unwrap();
        let r = lat.mod_lattice(&x).unwrap();
        prop_assert!(close(&lat.mod_lattice(&r).unwrap(), &r, 1e-9 * c));
        prop_assert!(lat.contains(&x.iter().zip(&r).map(|(a, b)| a - b).collect::<Vec<_>>()).unwrap());
    }

    #[test]
    fn mod_result_is_no_farther_than_any_neighbour(
        (fam, x) in family_dims().prop_flat_map(|(f, n)| (Just(f), point(n)))
    ) {
        let lat = Lattice::canonical(fam, x.len()).unwrap();
        let r = lat.mod_lattice(&x).unwrap();
        let norm: f64 = r.iter().map(|v| v * v).sum();
        for row in lat.generator_rows() {
            for sign in [1.0, -1.0] {
                let shifted: Vec<f64> = r.iter().zip(&row).map(|(a, b)| a - sign * b).collect();
                prop_assert!(norm <= shifted.iter().map(|v| v * v).sum::<f64>() + 1e-9);
            }
        }
    }

    #[test]
    fn distributive_law(
        (fam, x, y) in family_dims().prop_flat_map(|(f, n)| (Just(f), point(n), point(n))),
        c in 0.1f64..5.0,
    ) {
        let lat = Lattice::canonical(fam, x.len()).unwrap().scale(c).unwrap();
        let rx = lat.mod_lattice(&x).unwrap();
        let lhs: Vec<f64> = rx.iter().zip(&y).map(|(a, b)| a + b).collect();
        let rhs: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(close(&lat.mod_lattice(&lhs).unwrap(), &lat.mod_lattice(&rhs).unwrap(), 1e-9 * c));
    }

    #[test]
    fn nested_reduction_law(
        (fam, x) in family_dims().prop_flat_map(|(f, n)| (Just(f), point(n))),
        k in 2u32..5,
    ) {
        // [x mod Λ₁] mod Λ = x mod Λ for Λ₁ = kΛ ⊆ Λ
        let fine = Lattice::canonical(fam, x.len()).unwrap();
        let coarse = fine.scale(k as f64).unwrap();
        let inner = coarse.mod_lattice(&x).unwrap();
        prop_assert!(close(&fine.mod_lattice(&inner).unwrap(), &fine.mod_lattice(&x).unwrap(), 1e-9));
    }

    #[test]
    fn scaling_law(
        (fam, x) in family_dims().prop_flat_map(|(f, n)| (Just(f), point(n))),
        c in 0.1f64..5.0,
    ) {
        let lat = Lattice::canonical(fam, x.len()).unwrap();
        let scaled = lat.scale(c).unwrap();
        let cx: Vec<f64> = x.iter().map(|v| v * c).collect();
        let lhs = scaled.nearest_point(&cx).unwrap();
        let rhs: Vec<f64> = lat.nearest_point(&x).unwrap().iter().map(|v| v * c).collect();
        prop_assert!(close(&lhs, &rhs, 1e-9 * c));
        let m = scaled.mod_lattice(&cx).unwrap();
        let m1: Vec<f64> = lat.mod_lattice(&x).unwrap().iter().map(|v| v * c).collect();
        prop_assert!(close(&m, &m1, 1e-9 * c));
    }

    #[test]
    fn translation_by_lattice_point(
        (fam, x, z) in family_dims().prop_flat_map(|(f, n)| (Just(f), point(n), prop::collection::vec(-3i32..3, n))),
    ) {
        let lat = Lattice::canonical(fam, x.len()).unwrap();
        let rows = lat.generator_rows();
        let mut lambda = vec![0.0; x.len()];
        for (zi, row) in z.iter().zip(&rows) {
            for (l, r) in lambda.iter_mut().zip(row) {
                *l += *zi as f64 * r;
            }
        }
        let shifted: Vec<f64> = x.iter().zip(&lambda).map(|(a, b)| a + b).collect();
        let q: Vec<f64> = lat.nearest_point(&x).unwrap().iter().zip(&lambda).map(|(a, b)| a + b).collect();
        prop_assert!(close(&lat.nearest_point(&shifted).unwrap(), &q, 1e-9));
    }
}

#[test]
fn integer_lattice_up_to_sixteen_dims_matches_enumeration() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for n in [9, 12, 16] {
        let lat = Lattice::integer(n).unwrap();
        for _ in 0..200 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let brute = lat.brute_force_cvp(&x, lat.covering_radius_bound()).unwrap();
            assert_eq!(lat.nearest_point(&x).unwrap(), brute);
        }
    }
}

#[test]
fn e8_second_moment_matches_literature() {
    // G(E₈) = 929/12960 at unit volume
    let est = Lattice::e8().second_moment_mc(400_000, 3).unwrap();
    let exact = 929.0 / 12960.0;
    assert!((est.sigma2 - exact).abs() < 4.0 * est.std_err, "{est:?} vs {exact}");
}

#[test]
fn second_moment_scales_quadratically() {
    let base = Lattice::checkerboard(4).unwrap();
    let s0 = base.second_moment_mc(200_000, 11).unwrap();
    for c in [0.5, 2.0, 3.0] {
        let s = base.scale(c).unwrap().second_moment_mc(200_000, 11).unwrap();
        // same seed: the samples are the scaled samples
        assert!((s.sigma2 - c * c * s0.sigma2).abs() < 1e-9 * c * c);
    }
}
