use nestcode::region::{
    alpha_grid, alpha_mmse, cf_rate, convex_hull, gtwrc_region, outer_bound, r1_region, r1_region_raw,
    r2_region, region_boundary, RegionReport,
};
use proptest::prelude::*;

fn log_snr() -> impl Strategy<Value = f64> {
    (-2.0f64..3.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #[test]
    fn tangency_at_mmse(snr in log_snr()) {
        let a = alpha_mmse(snr);
        let (r1, _) = r1_region_raw(a, snr);
        prop_assert!((r1 - outer_bound(snr)).abs() < 1e-9);
        for m in [7usize, 64, 513] {
            for i in 1..=m {
                let (r, _) = r1_region_raw(i as f64 / m as f64, snr);
                prop_assert!(r <= outer_bound(snr) + 1e-12);
            }
        }
        // derivative of (α−1)²snr + α² vanishes at α_MMSE
        prop_assert!((2.0 * (a - 1.0) * snr + 2.0 * a).abs() < 1e-9 * (1.0 + snr));
    }

    #[test]
    fn second_rate_is_first_plus_log_alpha(alpha in 0.001f64..=1.0, snr in log_snr()) {
        let (r1, r2) = r1_region_raw(alpha, snr);
        prop_assert!((r2 - (r1 + alpha.log2())).abs() < 1e-9);
    }

    #[test]
    fn cf_gap_is_below_half_a_bit(snr in log_snr()) {
        let gap = outer_bound(snr) - cf_rate(snr);
        prop_assert!(gap > 0.0 && gap < 0.5);
    }

    #[test]
    fn regions_are_mirror_images(alpha in 0.0f64..=1.0, snr in log_snr()) {
        let a = r1_region(alpha, snr).unwrap();
        let b = r2_region(alpha, snr).unwrap();
        prop_assert_eq!((a.r1, a.r2, a.clamped), (b.r2, b.r1, b.clamped));
        prop_assert!(a.r1 >= 0.0 && a.r2 >= 0.0);
    }

    #[test]
    fn hull_is_convex_and_covers_its_input(
        pts in prop::collection::vec((0.0f64..3.0, 0.0f64..3.0), 1..40)
    ) {
        let h = convex_hull(&pts).unwrap();
        for w in h.windows(2) {
            prop_assert!(w[0].0 <= w[1].0 && w[0].1 >= w[1].1);
        }
        for w in h.windows(3) {
            let (o, a, b) = (w[0], w[1], w[2]);
            let cross = (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
            prop_assert!(cross < 0.0);
        }
        // every input lies weakly below some hull edge
        for &(x, y) in &pts {
            let covered = h.windows(2).any(|w| {
                let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                x >= x0 - 1e-12 && x <= x1 + 1e-12 && {
                    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
                    let top = if x1 > x0 { y0 + t * (y1 - y0) } else { y0.max(y1) };
                    y <= top + 1e-9
                }
            }) || h.len() == 1;
            prop_assert!(covered, "({x}, {y}) outside {h:?}");
        }
    }

    #[test]
    fn gtwrc_hull_is_symmetric(snr in log_snr(), m in 1usize..64) {
        let grid = alpha_grid(m, snr).unwrap();
        for cf in [false, true] {
            let h = gtwrc_region(snr, &grid, cf).unwrap();
            let fwd: Vec<(f64, f64)> = h.iter().map(|p| (p.r1, p.r2)).collect();
            let mut back: Vec<(f64, f64)> = h.iter().map(|p| (p.r2, p.r1)).collect();
            back.reverse();
            prop_assert_eq!(fwd.len(), back.len());
            for (a, b) in fwd.iter().zip(&back) {
                prop_assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn boundary_inside_outer_square() {
    for snr in [2.0, 5.0, 6.0] {
        let grid = alpha_grid(512, snr).unwrap();
        let ob = outer_bound(snr);
        for p in region_boundary(snr, &grid).unwrap() {
            assert!(p.r1 <= ob + 1e-9 && p.r2 <= ob + 1e-9);
        }
    }
}

#[test]
fn finer_grids_keep_coarser_fronts() {
    let snr = 5.0;
    let coarse = region_boundary(snr, &alpha_grid(16, snr).unwrap()).unwrap();
    let fine = region_boundary(snr, &alpha_grid(64, snr).unwrap()).unwrap();
    for p in &coarse {
        assert!(
            fine.iter().any(|q| (q.r1 - p.r1).abs() < 1e-12 && (q.r2 - p.r2).abs() < 1e-12),
            "{p:?} lost"
        );
    }
}

#[test]
fn symmetric_rates_of_the_figure_hulls() {
    for snr in [2.0f64, 6.0] {
        let r = RegionReport::compute(snr, &alpha_grid(512, snr).unwrap()).unwrap();
        let s = r.summary;
        // time sharing A and B meets the diagonal at ½log₂snr; the curve
        // between them bulges a little beyond
        assert!(s.hull_symmetric_rate >= 0.5 * snr.log2() - 1e-12);
        assert!(s.hull_symmetric_rate < s.outer_bound);
        assert!((s.hull_cf_symmetric_rate - s.hull_symmetric_rate.max(cf_rate(snr))).abs() < 1e-12);
    }
}
