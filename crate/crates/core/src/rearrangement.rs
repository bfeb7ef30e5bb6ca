//! The rearrangement operator Q -> Q* and the pre-rearrangement operator
//! Q -> F. Rearrangement on the grid is sorting: the sorted values are the
//! quantiles of the random variable Q(U), U uniform on [0,1].

use crate::curves::{GridCurve, StepCdf};
use crate::error::{Error, Result};

/// Monotone rearrangement: same grid, values sorted nondecreasing.
/// The value multiset is preserved exactly.
pub fn rearrange(q: &GridCurve) -> GridCurve {
    let mut values = q.values().to_vec();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    q.with_values(values).expect("sorting preserves validity")
}

/// Distribution function induced by sampling the curve:
/// F(y) = (1/k) #{j : q(u_j) <= y}, evaluated on the supplied y grid.
pub fn pre_cdf(q: &GridCurve, y_grid: &[f64]) -> Result<StepCdf> {
    if y_grid.is_empty() {
        return Err(Error::InvalidArgument("empty y grid".into()));
    }
    if y_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "y grid must be strictly increasing".into(),
        ));
    }
    let (lo, hi) = (q.min_value(), q.max_value());
    if y_grid[0] > lo || y_grid[y_grid.len() - 1] < hi {
        return Err(Error::RangeNotCovered);
    }
    let mut sorted = q.values().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = sorted.len() as f64;
    let probs = y_grid
        .iter()
        .map(|&y| sorted.partition_point(|&v| v <= y) as f64 / k)
        .collect();
    StepCdf::new(y_grid.to_vec(), probs)
}

/// [`pre_cdf`] on the curve's own sorted distinct values, which makes the
/// round trip with [`invert_cdf`] exact on the grid.
pub fn pre_cdf_default(q: &GridCurve) -> StepCdf {
    let mut y_grid = q.values().to_vec();
    y_grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    y_grid.dedup();
    pre_cdf(q, &y_grid).expect("own values always cover the range")
}

/// Left-continuous generalized inverse: the smallest grid y with F(y) >= u.
pub fn invert_cdf(f: &StepCdf, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "u must lie in (0,1], got {u}"
        )));
    }
    let probs = f.probs();
    let i = probs.partition_point(|&p| p < u);
    // probs end at 1 >= u, so i is in range
    Ok(f.y_grid()[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::make_grid;
    use proptest::prelude::*;

    fn curve(values: Vec<f64>) -> GridCurve {
        let k = values.len();
        GridCurve::new(make_grid(k).unwrap(), values).unwrap()
    }

    #[test]
    fn rearrange_sorts() {
        let q = curve(vec![3.0, 1.0, 2.0]);
        assert_eq!(rearrange(&q).values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn rearrange_fixes_monotone_input() {
        let q = curve(vec![1.0, 2.0, 3.0]);
        assert_eq!(rearrange(&q), q);
    }

    #[test]
    fn rearrange_coincides_on_increasing_unique_segments() {
        // Sine curve Q(u) = 5{u + sin(2 pi u)/pi}: the rearranged curve equals
        // the original exactly where the original is increasing and its value
        // has a unique preimage. Locate that set by brute force.
        let k = 999;
        let f = |u: f64| 5.0 * (u + (2.0 * std::f64::consts::PI * u).sin() / std::f64::consts::PI);
        let q = GridCurve::from_fn(k, f).unwrap();
        let qs = rearrange(&q);
        let values = q.values();
        let n = values.len();
        for j in 0..n {
            let increasing_at = (j == 0 || values[j] > values[j - 1])
                && (j + 1 == n || values[j + 1] > values[j]);
            let unique_preimage = values.iter().filter(|&&v| v == values[j]).count() == 1;
            if increasing_at && unique_preimage {
                // only claim coincidence on segments that are globally in order:
                // count how many values are below; if it equals j the sorted
                // position is unchanged
                let below = values.iter().filter(|&&v| v < values[j]).count();
                if below == j {
                    assert_eq!(qs.values()[j], values[j]);
                }
            }
        }
        // and the coincidence set is non-trivial for this curve
        let coincide = q
            .values()
            .iter()
            .zip(qs.values())
            .filter(|(a, b)| a == b)
            .count();
        assert!(coincide > 100, "coincide = {coincide}");
    }

    #[test]
    fn pre_cdf_counts() {
        let q = curve(vec![1.0, 2.0, 3.0]);
        let f = pre_cdf(&q, &[1.0, 2.0, 3.0]).unwrap();
        assert!((f.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
        // rearrangement invariance: same multiset, same F
        let q2 = curve(vec![3.0, 1.0, 2.0]);
        let f2 = pre_cdf(&q2, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.probs(), f2.probs());
    }

    #[test]
    fn pre_cdf_range_error() {
        let q = curve(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            pre_cdf(&q, &[1.0, 2.0]),
            Err(Error::RangeNotCovered)
        ));
    }

    #[test]
    fn pre_cdf_matches_fine_grid_integration_for_sine() {
        // Oracle: integrate 1{Q(u) <= y} du over a 10^6-point net.
        let f = |u: f64| 5.0 * (u + (2.0 * std::f64::consts::PI * u).sin() / std::f64::consts::PI);
        let y = 2.5;
        let m = 1_000_000usize;
        let oracle = (0..m)
            .filter(|&i| f((i as f64 + 0.5) / m as f64) <= y)
            .count() as f64
            / m as f64;
        let q = GridCurve::from_fn(9_999, f).unwrap();
        let mut grid = q.values().to_vec();
        grid.push(y);
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        let cdf = pre_cdf(&q, &grid).unwrap();
        assert!((cdf.eval(y) - oracle).abs() < 1e-3, "{} vs {}", cdf.eval(y), oracle);
    }

    #[test]
    fn invert_cdf_counting_inverse() {
        let f = StepCdf::new(vec![1.0, 2.0, 3.0], vec![1.0 / 3.0, 2.0 / 3.0, 1.0]).unwrap();
        assert_eq!(invert_cdf(&f, 0.5).unwrap(), 2.0);
        assert_eq!(invert_cdf(&f, 1.0).unwrap(), 3.0);
        assert!(invert_cdf(&f, 0.0).is_err());
        assert!(invert_cdf(&f, 1.5).is_err());
    }

    #[test]
    fn sorting_and_inversion_routes_agree() {
        let q = curve(vec![5.0, -1.0, 3.0, 3.0, 0.0, 7.0, 2.0]);
        let f = pre_cdf_default(&q);
        let qs = rearrange(&q);
        for (j, &u) in q.u_grid().iter().enumerate() {
            assert_eq!(invert_cdf(&f, u).unwrap(), qs.values()[j]);
        }
    }

    proptest! {
        #[test]
        fn idempotent_and_measure_preserving(values in proptest::collection::vec(-100.0f64..100.0, 2..60)) {
            let q = curve(values.clone());
            let qs = rearrange(&q);
            prop_assert!(qs.is_nondecreasing());
            prop_assert_eq!(rearrange(&qs), qs.clone());
            let mut sorted_in = values;
            sorted_in.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assert_eq!(qs.values(), &sorted_in[..]);
        }

        #[test]
        fn routes_agree_on_random_curves(values in proptest::collection::vec(-50.0f64..50.0, 2..40)) {
            let q = curve(values);
            let f = pre_cdf_default(&q);
            let qs = rearrange(&q);
            for (j, &u) in q.u_grid().iter().enumerate() {
                prop_assert_eq!(invert_cdf(&f, u).unwrap(), qs.values()[j]);
            }
        }

        #[test]
        fn affine_equivariance(
            values in proptest::collection::vec(-50.0f64..50.0, 2..40),
            a in 0.01f64..10.0,
            b in -20.0f64..20.0,
        ) {
            let q = curve(values);
            let lhs = rearrange(&q.map_values(|v| a * v + b).unwrap());
            let rhs = rearrange(&q).map_values(|v| a * v + b).unwrap();
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn piecewise_linear_equivariance(
            values in proptest::collection::vec(-1.0f64..1.0, 4..30),
            knots in proptest::collection::vec(0.01f64..1.0, 4),
        ) {
            // random increasing piecewise-linear transform on [-1,1]
            let mut cum = vec![0.0];
            for k in &knots { cum.push(cum.last().unwrap() + k); }
            let m = move |v: f64| {
                let t = (v + 1.0) / 2.0 * 4.0; // in [0,4]
                let i = (t.floor() as usize).min(3);
                cum[i] + (t - i as f64) * (cum[i + 1] - cum[i])
            };
            let q = curve(values);
            let lhs = rearrange(&q.map_values(&m).unwrap());
            let rhs = rearrange(&q).map_values(&m).unwrap();
            for (x, y) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn sup_norm_one_lipschitz(
            base in proptest::collection::vec(-50.0f64..50.0, 2..40),
            bump in proptest::collection::vec(-5.0f64..5.0, 40),
        ) {
            let k = base.len();
            let q1 = curve(base.clone());
            let q2 = curve(base.iter().zip(&bump).map(|(a, b)| a + b).collect());
            let lhs = crate::curves::lp_distance(&rearrange(&q1), &rearrange(&q2), crate::curves::Norm::Sup).unwrap();
            let rhs = crate::curves::lp_distance(&q1, &q2, crate::curves::Norm::Sup).unwrap();
            prop_assert!(lhs <= rhs + 1e-12, "k={k} lhs={lhs} rhs={rhs}");
        }

        #[test]
        fn lp_contraction_toward_monotone_targets(
            values in proptest::collection::vec(-50.0f64..50.0, 3..40),
            steps in proptest::collection::vec(0.0f64..5.0, 40),
        ) {
            let k = values.len();
            let q = curve(values);
            let mut target = vec![steps[0] - 40.0];
            for s in steps.iter().take(k).skip(1) {
                let last = *target.last().unwrap();
                target.push(last + s);
            }
            let q0 = curve(target);
            let qs = rearrange(&q);
            for p in crate::curves::Norm::ALL {
                let after = crate::curves::lp_distance(&qs, &q0, p).unwrap();
                let before = crate::curves::lp_distance(&q, &q0, p).unwrap();
                prop_assert!(after <= before + 1e-12, "{:?}: {} > {}", p, after, before);
            }
        }
    }

    #[test]
    fn strict_l2_contraction_for_decreasing_segment() {
        // q has a strictly decreasing segment, target strictly increasing
        let q = curve(vec![0.0, 3.0, 1.0, 4.0]);
        let q0 = curve(vec![0.0, 1.0, 2.0, 3.0]);
        let qs = rearrange(&q);
        let after = crate::curves::lp_distance(&qs, &q0, crate::curves::Norm::Two).unwrap();
        let before = crate::curves::lp_distance(&q, &q0, crate::curves::Norm::Two).unwrap();
        assert!(after < before - 1e-9, "{after} vs {before}");
    }
}
