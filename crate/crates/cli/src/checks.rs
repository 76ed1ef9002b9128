//! Checks behind `validate-lattice`.

use nestcode::chain::CheckResult;
use nestcode::format::sig9;
use nestcode::parallel::trial_rng;
use nestcode::{Family, Lattice, Result};
use rand::Rng;

pub const CSV_HEADER: &str = "check,passed,measured,expected,detail";

pub fn csv_row(c: &CheckResult) -> String {
    format!(
        "{},{},{},{},{}",
        c.name,
        u8::from(c.passed),
        sig9(c.measured),
        sig9(c.expected),
        c.detail.replace(',', ";")
    )
}

fn check(name: &str, passed: bool, measured: f64, expected: f64, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        measured,
        expected,
        detail,
    }
}

/// Distance to the coefficient-rounding point, an upper bound on the
/// distance to the nearest point.
fn babai_radius(lat: &Lattice, rows: &[Vec<f64>], x: &[f64]) -> Result<f64> {
    let mut p = vec![0.0; x.len()];
    for (c, row) in lat.coefficients(x)?.iter().zip(rows) {
        for (pj, r) in p.iter_mut().zip(row) {
            *pj += c.round() * r;
        }
    }
    let d = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok(d.min(lat.covering_radius_bound()))
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn run(family: Family, n: usize, samples: u64, moment_samples: u64, seed: u64) -> Result<Vec<CheckResult>> {
    let lat = Lattice::canonical(family, n)?;
    let rows = lat.generator_rows();
    let mut mismatches = 0u64;
    let (mut idem, mut dist) = (0.0f64, 0.0f64);
    for t in 0..samples {
        let mut rng = trial_rng(seed, t);
        // one point in ten lies on a quarter-integer grid to exercise ties
        let x: Vec<f64> = if t % 10 == 9 {
            (0..n).map(|_| rng.random_range(-16i32..16) as f64 / 4.0).collect()
        } else {
            (0..n).map(|_| rng.random_range(-4.0..4.0)).collect()
        };
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        if lat.nearest_point(&x)? != lat.brute_force_cvp(&x, babai_radius(&lat, &rows, &x)?)? {
            mismatches += 1;
        }
        let r = lat.mod_lattice(&x)?;
        idem = idem.max(max_dev(&lat.mod_lattice(&r)?, &r));
        let lhs: Vec<f64> = r.iter().zip(&y).map(|(a, b)| a + b).collect();
        let rhs: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        dist = dist.max(max_dev(&lat.mod_lattice(&lhs)?, &lat.mod_lattice(&rhs)?));
    }
    let mut out = vec![
        check(
            "cvp oracle equivalence",
            mismatches == 0,
            mismatches as f64,
            0.0,
            format!("{mismatches} of {samples} points differ from exhaustive search"),
        ),
        check(
            "mod idempotence",
            idem <= 1e-9,
            idem,
            0.0,
            format!("max |mod(mod x) - mod x| over {samples} points"),
        ),
        check(
            "distributive law",
            dist <= 1e-9,
            dist,
            0.0,
            format!("max |mod(mod x + y) - mod(x + y)| over {samples} pairs"),
        ),
    ];

    let est = lat.second_moment_mc(moment_samples, seed)?;
    let exact = lat.second_moment_exact().expect("family lattices have closed forms");
    let z = (est.sigma2 - exact).abs() / est.std_err;
    out.push(check(
        "second moment",
        z <= 4.0,
        est.sigma2,
        exact,
        format!("{z:.2} standard errors from the closed form"),
    ));

    let doubled = lat.scale(2.0)?.second_moment_mc(moment_samples, seed.wrapping_add(1))?;
    let err = (doubled.sigma2 - 4.0 * est.sigma2).abs();
    let tol = 4.0 * (doubled.std_err.powi(2) + 16.0 * est.std_err.powi(2)).sqrt();
    out.push(check(
        "scale law",
        err <= tol,
        doubled.sigma2 / est.sigma2,
        4.0,
        format!("sigma2(2L)/sigma2(L) with independent samples; tolerance {}", sig9(tol)),
    ));
    Ok(out)
}
