//! Pool-adjacent-violators isotonization, the benchmark monotonization.
//! Weighted least-squares projection onto the nondecreasing cone.

use crate::curves::GridCurve;
use crate::error::{Error, Result};

/// Up-and-down stack PAVA. Violating adjacent blocks are pooled into their
/// weighted mean until the block means are nondecreasing. O(k).
pub fn pava(values: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if values.len() != weights.len() {
        return Err(Error::InvalidArgument(
            "values and weights must have equal length".into(),
        ));
    }
    if weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    struct Block {
        sum: f64,
        weight: f64,
        len: usize,
    }
    impl Block {
        fn mean(&self) -> f64 {
            self.sum / self.weight
        }
    }
    let mut stack: Vec<Block> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let mut block = Block { sum: v * w, weight: w, len: 1 };
        while let Some(top) = stack.last() {
            if top.mean() > block.mean() {
                let top = stack.pop().unwrap();
                block.sum += top.sum;
                block.weight += top.weight;
                block.len += top.len;
            } else {
                break;
            }
        }
        stack.push(block);
    }
    let mut out = Vec::with_capacity(values.len());
    for block in &stack {
        let m = block.mean();
        out.extend(std::iter::repeat(m).take(block.len));
    }
    Ok(out)
}

/// Unit-weight PAVA on the curve's value sequence.
pub fn isotonize(q: &GridCurve) -> GridCurve {
    let fitted = pava(q.values(), &vec![1.0; q.len()]).expect("unit weights are valid");
    q.with_values(fitted).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{lp_distance, make_grid, Norm};
    use proptest::prelude::*;

    /// Brute-force projection oracle: minimize squared error over all
    /// nondecreasing candidates on a discretized value lattice.
    fn brute_force_projection(values: &[f64], grid_points: usize) -> (Vec<f64>, f64) {
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lattice: Vec<f64> = (0..=grid_points)
            .map(|i| lo + (hi - lo) * i as f64 / grid_points as f64)
            .collect();
        let n = values.len();
        let mut best = (vec![], f64::INFINITY);
        let mut candidate = vec![0usize; n];
        // enumerate nondecreasing index sequences
        fn rec(
            pos: usize,
            min_idx: usize,
            candidate: &mut Vec<usize>,
            lattice: &[f64],
            values: &[f64],
            best: &mut (Vec<f64>, f64),
        ) {
            if pos == values.len() {
                let cost: f64 = candidate
                    .iter()
                    .zip(values)
                    .map(|(&i, &v)| (lattice[i] - v).powi(2))
                    .sum();
                if cost < best.1 {
                    *best = (candidate.iter().map(|&i| lattice[i]).collect(), cost);
                }
                return;
            }
            for i in min_idx..lattice.len() {
                candidate[pos] = i;
                rec(pos + 1, i, candidate, lattice, values, best);
            }
        }
        rec(0, 0, &mut candidate, &lattice, values, &mut best);
        best
    }

    #[test]
    fn already_monotone_unchanged() {
        assert_eq!(pava(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pooled_examples_match_brute_force() {
        let out = pava(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(out, vec![2.0, 2.0, 2.0]);
        let (oracle, _) = brute_force_projection(&[3.0, 1.0, 2.0], 40);
        for (a, b) in out.iter().zip(&oracle) {
            assert!((a - b).abs() < 0.06);
        }

        let out = pava(&[1.0, 3.0, 2.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(out, vec![1.0, 2.5, 2.5]);
        let (oracle, _) = brute_force_projection(&[1.0, 3.0, 2.0], 40);
        for (a, b) in out.iter().zip(&oracle) {
            assert!((a - b).abs() < 0.06);
        }
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(pava(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(pava(&[1.0, 2.0], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn decreasing_input_becomes_constant_mean() {
        let k = 5;
        let q = GridCurve::new(make_grid(k).unwrap(), vec![5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let iso = isotonize(&q);
        for &v in iso.values() {
            assert!((v - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sine_isotonization_has_flat_segments_where_rearrangement_is_steep() {
        let f = |u: f64| 5.0 * (u + (2.0 * std::f64::consts::PI * u).sin() / std::f64::consts::PI);
        let q = GridCurve::from_fn(499, f).unwrap();
        let iso = isotonize(&q);
        let rea = crate::rearrangement::rearrange(&q);
        // find the widest flat block of the isotonized fit
        let mut max_flat = 0usize;
        let mut run = 1usize;
        for w in iso.values().windows(2) {
            if (w[1] - w[0]).abs() < 1e-12 {
                run += 1;
                max_flat = max_flat.max(run);
            } else {
                run = 1;
            }
        }
        assert!(max_flat > 50, "max flat block = {max_flat}");
        // rearranged curve is strictly increasing on most of the grid
        let strict = rea.values().windows(2).filter(|w| w[1] > w[0]).count();
        assert!(strict > 400);
    }

    #[test]
    fn l2_optimality_small_instances() {
        // all sequences of length <= 6 over a small integer value set would be
        // 5^6 instances; sample the space deterministically instead
        let vals = [0.0, 1.0, 2.0, 3.0, 4.0];
        let mut checked = 0usize;
        for len in 2..=4usize {
            let total = vals.len().pow(len as u32);
            for code in 0..total {
                let mut c = code;
                let seq: Vec<f64> = (0..len)
                    .map(|_| {
                        let v = vals[c % vals.len()];
                        c /= vals.len();
                        v
                    })
                    .collect();
                let fitted = pava(&seq, &vec![1.0; len]).unwrap();
                let cost: f64 = fitted.iter().zip(&seq).map(|(a, b)| (a - b).powi(2)).sum();
                let (_, best) = brute_force_projection(&seq, 16);
                assert!(cost <= best + 1e-9, "seq {seq:?}: {cost} > {best}");
                checked += 1;
            }
        }
        assert!(checked > 600);
    }

    proptest! {
        #[test]
        fn output_nondecreasing_idempotent_mean_preserving(
            values in proptest::collection::vec(-50.0f64..50.0, 2..40)
        ) {
            let w = vec![1.0; values.len()];
            let out = pava(&values, &w).unwrap();
            prop_assert!(out.windows(2).all(|p| p[1] >= p[0] - 1e-12));
            let again = pava(&out, &w).unwrap();
            for (a, b) in out.iter().zip(&again) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let mean_in: f64 = values.iter().sum::<f64>() / values.len() as f64;
            let mean_out: f64 = out.iter().sum::<f64>() / out.len() as f64;
            prop_assert!((mean_in - mean_out).abs() < 1e-12 * (1.0 + mean_in.abs()));
        }

        #[test]
        fn projection_contraction(
            values in proptest::collection::vec(-50.0f64..50.0, 3..30),
            steps in proptest::collection::vec(0.0f64..5.0, 30),
        ) {
            let k = values.len();
            let grid = make_grid(k).unwrap();
            let q = GridCurve::new(grid.clone(), values).unwrap();
            let mut target = vec![-30.0];
            for s in steps.iter().take(k).skip(1) {
                let last = *target.last().unwrap();
                target.push(last + s);
            }
            let q0 = GridCurve::new(grid, target).unwrap();
            let iso = isotonize(&q);
            let after = lp_distance(&iso, &q0, Norm::Two).unwrap();
            let before = lp_distance(&q, &q0, Norm::Two).unwrap();
            prop_assert!(after <= before + 1e-12);
        }
    }
}
