//! Bootstrap ensembles, studentized sup-t uniform confidence bands, the
//! rearrangement-based monotonicity test, and Lp estimation-error scoring
//! against a known target curve.

use rayon::prelude::*;

use crate::curves::{lp_distance, GridCurve, Norm};
use crate::error::{Error, Result};
use crate::estimators::Sample;
use crate::isotonic::isotonize;
use crate::rearrangement::rearrange;

/// Share of failed replicates tolerated before the ensemble is rejected.
const MAX_FAILED_SHARE: f64 = 0.05;

/// A point estimate plus B curves from resampled data, all on one grid.
#[derive(Debug, Clone)]
pub struct BootstrapEnsemble {
    pub point: GridCurve,
    pub replicates: Vec<GridCurve>,
    pub seed: u64,
}

impl BootstrapEnsemble {
    pub fn b(&self) -> usize {
        self.replicates.len()
    }
}

/// Deterministic per-replicate seed derivation (splitmix64 over (seed, r)).
pub fn derive_seed(seed: u64, replicate: u64) -> u64 {
    let mut x = seed ^ replicate.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Nonparametric pairs bootstrap of (Y, X, Z) rows. Replicate r draws its
/// rows with a generator seeded from (seed, r), so results do not depend on
/// evaluation order. Failed replicates are dropped; more than 5% failing is
/// an error.
pub fn bootstrap(
    sample: &Sample,
    estimator: &(dyn Fn(&Sample) -> Result<GridCurve> + Sync),
    b: usize,
    seed: u64,
) -> Result<BootstrapEnsemble> {
    if b < 2 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least 2 replicates".into(),
        ));
    }
    let point = estimator(sample)?;
    let results: Vec<Result<GridCurve>> = (0..b as u64)
        .into_par_iter()
        .map(|r| {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, r));
            estimator(&sample.resample(&mut rng))
        })
        .collect();
    let total = results.len();
    let replicates: Vec<GridCurve> = results.into_iter().filter_map(|r| r.ok()).collect();
    let failed = total - replicates.len();
    if (failed as f64) > MAX_FAILED_SHARE * total as f64 {
        return Err(Error::TooManyFailedReplicates { failed, total });
    }
    for r in &replicates {
        if !r.same_grid(&point) {
            return Err(Error::GridMismatch);
        }
    }
    Ok(BootstrapEnsemble { point, replicates, seed })
}

/// A simultaneous confidence band around a point estimate.
#[derive(Debug, Clone)]
pub struct Band {
    pub point: GridCurve,
    pub lower: GridCurve,
    pub upper: GridCurve,
    pub level: f64,
    pub studentized: bool,
}

impl Band {
    pub fn contains(&self, curve: &GridCurve) -> bool {
        self.max_violation(curve).0 <= 0.0
    }

    /// Largest signed exceedance of the band and the index u where it occurs.
    pub fn max_violation(&self, curve: &GridCurve) -> (f64, f64) {
        let mut worst = f64::NEG_INFINITY;
        let mut at = self.point.u_grid()[0];
        for (((&v, &lo), &hi), &u) in curve
            .values()
            .iter()
            .zip(self.lower.values())
            .zip(self.upper.values())
            .zip(self.point.u_grid())
        {
            let exceed = (lo - v).max(v - hi);
            if exceed > worst {
                worst = exceed;
                at = u;
            }
        }
        (worst, at)
    }
}

fn sorted_copy(values: &mut Vec<f64>) {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
}

fn quantile_of_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let idx = ((n as f64 * q).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

/// Studentized sup-t band: pointwise scale from the bootstrap interquartile
/// range, critical value from the level-quantile of studentized sup
/// deviations across replicates.
pub fn uniform_band(ens: &BootstrapEnsemble, level: f64) -> Result<Band> {
    if !(level > 0.5 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "level must lie in (0.5, 1), got {level}"
        )));
    }
    let b = ens.b();
    if (b as f64) * (1.0 - level) < 1.0 {
        return Err(Error::InsufficientReplicates { b, level });
    }
    let k = ens.point.len();
    let data_range = (ens.point.max_value() - ens.point.min_value()).max(1.0);
    let floor = 1e-12 * data_range;

    let mut scale = Vec::with_capacity(k);
    let mut col = Vec::with_capacity(b);
    for j in 0..k {
        col.clear();
        col.extend(ens.replicates.iter().map(|r| r.values()[j]));
        sorted_copy(&mut col);
        let iqr = quantile_of_sorted(&col, 0.75) - quantile_of_sorted(&col, 0.25);
        scale.push((iqr / 1.349).max(floor));
    }

    let mut sups: Vec<f64> = ens
        .replicates
        .iter()
        .map(|r| {
            r.values()
                .iter()
                .zip(ens.point.values())
                .zip(&scale)
                .map(|((&rv, &pv), &s)| (rv - pv).abs() / s)
                .fold(0.0f64, f64::max)
        })
        .collect();
    sorted_copy(&mut sups);
    let c = quantile_of_sorted(&sups, level);

    let lower = ens
        .point
        .with_values(
            ens.point
                .values()
                .iter()
                .zip(&scale)
                .map(|(&p, &s)| p - c * s)
                .collect(),
        )
        .expect("same grid");
    let upper = ens
        .point
        .with_values(
            ens.point
                .values()
                .iter()
                .zip(&scale)
                .map(|(&p, &s)| p + c * s)
                .collect(),
        )
        .expect("same grid");
    Ok(Band { point: ens.point.clone(), lower, upper, level, studentized: true })
}

/// Intersect a band with the class of monotone functions: the lower envelope
/// becomes its running maximum, the upper its running minimum from the
/// right. Errors if the monotone intersection is empty.
pub fn monotone_intersect(band: &Band) -> Result<Band> {
    let mut lower = band.lower.values().to_vec();
    for i in 1..lower.len() {
        lower[i] = lower[i].max(lower[i - 1]);
    }
    let mut upper = band.upper.values().to_vec();
    for i in (0..upper.len() - 1).rev() {
        upper[i] = upper[i].min(upper[i + 1]);
    }
    if lower.iter().zip(&upper).any(|(lo, hi)| lo > hi) {
        return Err(Error::InfeasibleBand);
    }
    Ok(Band {
        point: band.point.clone(),
        lower: band.lower.with_values(lower)?,
        upper: band.upper.with_values(upper)?,
        level: band.level,
        studentized: band.studentized,
    })
}

/// Outcome of the monotonicity specification test.
#[derive(Debug, Clone)]
pub struct MonotonicityTest {
    pub reject: bool,
    pub max_violation: f64,
    pub at_u: f64,
    pub level: f64,
}

/// Reject monotonicity of the population curve if the rearranged point
/// estimate leaves the uniform band for the original estimate anywhere.
pub fn monotonicity_test(ens: &BootstrapEnsemble, level: f64) -> Result<MonotonicityTest> {
    let band = uniform_band(ens, level)?;
    let rearranged = rearrange(&ens.point);
    let (violation, at_u) = band.max_violation(&rearranged);
    Ok(MonotonicityTest {
        reject: violation > 0.0,
        max_violation: violation.max(0.0),
        at_u,
        level,
    })
}

/// Lp errors of a curve estimate and its two monotonizations against a
/// known target.
#[derive(Debug, Clone, Copy, Default)]
pub struct ErrorScores {
    /// Indexed L1, L2, Linf.
    pub original: [f64; 3],
    pub rearranged: [f64; 3],
    pub isotonized: [f64; 3],
}

pub fn score_errors(estimate: &GridCurve, truth: &GridCurve) -> Result<ErrorScores> {
    let rearranged = rearrange(estimate);
    let isotonized = isotonize(estimate);
    let mut out = ErrorScores::default();
    for (i, p) in Norm::ALL.iter().enumerate() {
        out.original[i] = lp_distance(estimate, truth, *p)?;
        out.rearranged[i] = lp_distance(&rearranged, truth, *p)?;
        out.isotonized[i] = lp_distance(&isotonized, truth, *p)?;
    }
    Ok(out)
}

impl ErrorScores {
    pub fn accumulate(&mut self, other: &ErrorScores) {
        for i in 0..3 {
            self.original[i] += other.original[i];
            self.rearranged[i] += other.rearranged[i];
            self.isotonized[i] += other.isotonized[i];
        }
    }

    /// Percent ratios of monotonized to original error. A zero original
    /// error reports 100 by convention.
    pub fn ratios(&self) -> ([f64; 3], [f64; 3]) {
        let mut rearranged = [100.0; 3];
        let mut isotonized = [100.0; 3];
        for i in 0..3 {
            if self.original[i] > 0.0 {
                rearranged[i] = 100.0 * self.rearranged[i] / self.original[i];
                isotonized[i] = 100.0 * self.isotonized[i] / self.original[i];
            }
        }
        (rearranged, isotonized)
    }
}
