//! Desk-scale estimators for the binary-treatment, binary-instrument
//! pipeline: the location-model data generating process, check-loss quantile
//! regression, the Wald-type instrumental distribution estimator, and the
//! grid-search instrumental quantile estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::curves::SampledCurve;
use crate::error::{Error, Result};

/// Observations (Y, X, Z) with binary treatment and binary instrument.
#[derive(Debug, Clone)]
pub struct Sample {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

impl Sample {
    pub fn new(y: Vec<f64>, x: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if y.len() != x.len() || y.len() != z.len() {
            return Err(Error::InvalidArgument(
                "y, x, z must have equal length".into(),
            ));
        }
        if x.iter().chain(&z).any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidArgument("x and z must be binary".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("y must be finite".into()));
        }
        Ok(Sample { y, x, z })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Resample rows with replacement.
    pub fn resample(&self, rng: &mut impl Rng) -> Sample {
        let n = self.len();
        let mut y = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            y.push(self.y[i]);
            x.push(self.x[i]);
            z.push(self.z[i]);
        }
        Sample { y, x, z }
    }
}

/// Location-model DGP: Y = a0 + a1 X + eps, X = 1{p0 + p1 Z + v >= 0},
/// (eps, v) jointly normal with v standardized to unit variance.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DgpParams {
    pub pi: [f64; 2],
    pub alpha: [f64; 2],
    pub sigma_eps: f64,
    pub cov_eps_v: f64,
    /// Marginal probability of Z = 1; defaulted from the application's
    /// eligibility share.
    pub z_share: f64,
}

impl Default for DgpParams {
    fn default() -> Self {
        DgpParams {
            pi: [-0.92, 0.40],
            alpha: [11_753.0, -911.0],
            sigma_eps: 8_100.0,
            cov_eps_v: 379.0,
            z_share: 3_234.0 / 11_637.0,
        }
    }
}

impl DgpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_eps > 0.0) {
            return Err(Error::InvalidArgument("sigma_eps must be positive".into()));
        }
        if self.cov_eps_v.abs() >= self.sigma_eps {
            return Err(Error::InvalidArgument(
                "|cov_eps_v| must be below sigma_eps for a positive-definite joint covariance"
                    .into(),
            ));
        }
        if !(self.z_share > 0.0 && self.z_share < 1.0) {
            return Err(Error::InvalidArgument("z_share must lie in (0,1)".into()));
        }
        Ok(())
    }

    /// A variant with exogenous treatment (eps independent of v).
    pub fn exogenous() -> Self {
        DgpParams { cov_eps_v: 0.0, ..DgpParams::default() }
    }
}

/// Deterministic sample draw for a given seed.
pub fn gen_sample(params: &DgpParams, n: usize, seed: u64) -> Result<Sample> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps_resid = (params.sigma_eps.powi(2) - params.cov_eps_v.powi(2)).sqrt();
    let mut y = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        let zi = if rng.gen::<f64>() < params.z_share { 1.0 } else { 0.0 };
        let v: f64 = rng.sample(StandardNormal);
        let w: f64 = rng.sample(StandardNormal);
        let eps = params.cov_eps_v * v + eps_resid * w;
        let xi = if params.pi[0] + params.pi[1] * zi + v >= 0.0 { 1.0 } else { 0.0 };
        y.push(params.alpha[0] + params.alpha[1] * xi + eps);
        x.push(xi);
        z.push(zi);
    }
    Sample::new(y, x, z)
}

/// Q0(u|x) = a0 + a1 x + sigma_eps * PhiInverse(u).
pub fn true_structural_quantile(params: &DgpParams, u: f64, x: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "u must lie in (0,1), got {u}"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(params.alpha[0] + params.alpha[1] * x + params.sigma_eps * normal.inverse_cdf(u))
}

/// F0(y|x) = Phi((y - a0 - a1 x)/sigma_eps).
pub fn true_structural_cdf(params: &DgpParams, y: f64, x: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.cdf((y - params.alpha[0] - params.alpha[1] * x) / params.sigma_eps)
}

/// Check loss rho_tau(r) = r (tau - 1{r < 0}).
pub fn check_loss(residuals: impl Iterator<Item = f64>, tau: f64) -> f64 {
    residuals
        .map(|r| r * (tau - if r < 0.0 { 1.0 } else { 0.0 }))
        .sum()
}

/// Smallest minimizer of the intercept-only check loss: the tau-th sample
/// quantile under the left-continuous convention, order statistic ceil(n tau).
pub fn check_quantile(values: &[f64], tau: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tau must lie in (0,1), got {tau}"
        )));
    }
    let n = values.len();
    let idx = ((n as f64 * tau).ceil() as usize).clamp(1, n) - 1;
    let mut work = values.to_vec();
    let (_, q, _) = work.select_nth_unstable_by(idx, |a, b| a.partial_cmp(b).unwrap());
    Ok(*q)
}

/// Per-tau quantile regression output.
#[derive(Debug, Clone)]
pub struct QuantileFit {
    pub taus: Vec<f64>,
    /// One coefficient vector per tau.
    pub coefficients: Vec<Vec<f64>>,
    pub loss: Vec<f64>,
}

/// Intercept-only quantile regression.
pub fn qr_fit_intercept(y: &[f64], tau: f64) -> Result<(f64, f64)> {
    let b = check_quantile(y, tau)?;
    Ok((b, check_loss(y.iter().map(|v| v - b), tau)))
}

/// Quantile regression of y on [1, d] with a binary regressor d. The check
/// loss separates over the two cells, so each coefficient is an exact
/// order-statistic solution.
pub fn qr_fit_binary(y: &[f64], d: &[f64], tau: f64) -> Result<(Vec<f64>, f64)> {
    if y.len() != d.len() {
        return Err(Error::InvalidArgument("length mismatch".into()));
    }
    let g0: Vec<f64> = y.iter().zip(d).filter(|(_, &x)| x == 0.0).map(|(&v, _)| v).collect();
    let g1: Vec<f64> = y.iter().zip(d).filter(|(_, &x)| x == 1.0).map(|(&v, _)| v).collect();
    if g0.is_empty() || g1.is_empty() {
        return Err(Error::SingularDesign(
            "binary regressor takes a single value".into(),
        ));
    }
    let b0 = check_quantile(&g0, tau)?;
    let q1 = check_quantile(&g1, tau)?;
    let loss = check_loss(g0.iter().map(|v| v - b0), tau)
        + check_loss(g1.iter().map(|v| v - q1), tau);
    Ok((vec![b0, q1 - b0], loss))
}

/// Fitted quantile curve over a tau grid for both treatment cells.
pub fn qr_fit(sample: &Sample, taus: &[f64]) -> Result<QuantileFit> {
    let mut coefficients = Vec::with_capacity(taus.len());
    let mut loss = Vec::with_capacity(taus.len());
    for &tau in taus {
        let (beta, l) = qr_fit_binary(&sample.y, &sample.x, tau)?;
        coefficients.push(beta);
        loss.push(l);
    }
    Ok(QuantileFit { taus: taus.to_vec(), coefficients, loss })
}

fn conditional_mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        sum += v;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Wald-type instrumental distribution estimator for the two treatment
/// cells, evaluated on the supplied y grid. Raw values may be non-monotone
/// and can leave [0,1]; they are meant to feed the rearrangement operator.
pub fn abadie_structural_cdf(
    sample: &Sample,
    y_grid: &[f64],
) -> Result<(SampledCurve, SampledCurve)> {
    let first_stage = |xi: &dyn Fn(usize) -> f64| -> Result<f64> {
        let m1 = conditional_mean(
            (0..sample.len()).filter(|&i| sample.z[i] == 1.0).map(xi),
        )
        .ok_or_else(|| Error::SingularDesign("no observations with z = 1".into()))?;
        let m0 = conditional_mean(
            (0..sample.len()).filter(|&i| sample.z[i] == 0.0).map(xi),
        )
        .ok_or_else(|| Error::SingularDesign("no observations with z = 0".into()))?;
        Ok(m1 - m0)
    };
    let denom1 = first_stage(&|i| sample.x[i])?;
    if denom1.abs() <= 0.01 {
        return Err(Error::WeakInstrument(denom1));
    }
    let denom0 = -denom1; // E(1-X|Z=1) - E(1-X|Z=0)

    let mut f1 = Vec::with_capacity(y_grid.len());
    let mut f0 = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        let num1 = first_stage(&|i| if sample.y[i] <= y { sample.x[i] } else { 0.0 })?;
        let num0 =
            first_stage(&|i| if sample.y[i] <= y { 1.0 - sample.x[i] } else { 0.0 })?;
        f1.push(num1 / denom1);
        f0.push(num0 / denom0);
    }
    Ok((
        SampledCurve::new(y_grid.to_vec(), f1)?,
        SampledCurve::new(y_grid.to_vec(), f0)?,
    ))
}

/// One structural quantile fit from the grid-search instrumental estimator.
#[derive(Debug, Clone, Copy)]
pub struct IvqrFit {
    pub tau: f64,
    /// Treatment effect coefficient a* minimizing the absolute instrument
    /// coefficient.
    pub effect: f64,
    pub intercept: f64,
    /// |instrument coefficient| attained at a*.
    pub z_coef_abs: f64,
}

impl IvqrFit {
    /// Fitted structural quantile at treatment status x.
    pub fn quantile(&self, x: f64) -> f64 {
        self.intercept + self.effect * x
    }
}

/// Default effect grid: 201 points spanning +-4 interquartile ranges of Y.
pub fn default_effect_grid(sample: &Sample) -> Result<Vec<f64>> {
    let q25 = check_quantile(&sample.y, 0.25)?;
    let q75 = check_quantile(&sample.y, 0.75)?;
    let half = 4.0 * (q75 - q25).max(f64::MIN_POSITIVE);
    Ok((0..201).map(|i| -half + 2.0 * half * i as f64 / 200.0).collect())
}

/// Grid-search instrumental quantile regression at several tau levels: for
/// each candidate effect a, run quantile regression of Y - aX on [1, Z] and
/// keep the a that makes the instrument coefficient closest to zero.
pub fn ivqr_fit_taus(
    sample: &Sample,
    taus: &[f64],
    effect_grid: &[f64],
) -> Result<Vec<IvqrFit>> {
    if effect_grid.len() < 3 {
        return Err(Error::InvalidArgument(
            "effect grid must have at least 3 points".into(),
        ));
    }
    let n = sample.len();
    let idx0: Vec<usize> = (0..n).filter(|&i| sample.z[i] == 0.0).collect();
    let idx1: Vec<usize> = (0..n).filter(|&i| sample.z[i] == 1.0).collect();
    if idx0.is_empty() || idx1.is_empty() {
        return Err(Error::SingularDesign("instrument takes a single value".into()));
    }

    let mut best: Vec<(usize, f64, f64)> = vec![(0, f64::INFINITY, 0.0); taus.len()];
    let mut r0: Vec<f64> = Vec::with_capacity(idx0.len());
    let mut r1: Vec<f64> = Vec::with_capacity(idx1.len());
    for (gi, &a) in effect_grid.iter().enumerate() {
        r0.clear();
        r0.extend(idx0.iter().map(|&i| sample.y[i] - a * sample.x[i]));
        r1.clear();
        r1.extend(idx1.iter().map(|&i| sample.y[i] - a * sample.x[i]));
        r0.sort_by(|p, q| p.partial_cmp(q).unwrap());
        r1.sort_by(|p, q| p.partial_cmp(q).unwrap());
        for (ti, &tau) in taus.iter().enumerate() {
            let q0 = sorted_quantile(&r0, tau);
            let q1 = sorted_quantile(&r1, tau);
            let z_coef = (q1 - q0).abs();
            // for extreme candidates both group quantiles can stop depending
            // on a, making the objective exactly flat; break those ties
            // toward the smallest-magnitude effect so a flat stretch touching
            // the grid edge is not mistaken for a boundary argmin
            let tie_to_inner = z_coef == best[ti].1 && a.abs() < effect_grid[best[ti].0].abs();
            if z_coef < best[ti].1 || tie_to_inner {
                best[ti] = (gi, z_coef, q0);
            }
        }
    }

    let last = effect_grid.len() - 1;
    best.iter()
        .zip(taus)
        .map(|(&(gi, z_coef_abs, intercept), &tau)| {
            if gi == 0 || gi == last {
                return Err(Error::GridBoundary);
            }
            Ok(IvqrFit { tau, effect: effect_grid[gi], intercept, z_coef_abs })
        })
        .collect()
}

pub fn ivqr_fit(sample: &Sample, tau: f64, effect_grid: &[f64]) -> Result<IvqrFit> {
    Ok(ivqr_fit_taus(sample, &[tau], effect_grid)?[0])
}

/// Left-continuous sample quantile of an already-sorted slice.
fn sorted_quantile(sorted: &[f64], tau: f64) -> f64 {
    let n = sorted.len();
    let idx = ((n as f64 * tau).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

/// Subgradient condition for a fitted quantile regression on design columns:
/// per coordinate, |sum (tau - 1{r_i < 0}) x_i| bounded by the number of
/// exactly-interpolated points times the max design magnitude.
pub fn subgradient_ok(residuals: &[f64], design_col: &[f64], tau: f64) -> bool {
    let s: f64 = residuals
        .iter()
        .zip(design_col)
        .map(|(&r, &x)| (tau - if r < 0.0 { 1.0 } else { 0.0 }) * x)
        .sum();
    let interpolated = residuals.iter().filter(|r| r.abs() < 1e-9).count().max(1);
    let max_x = design_col.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    s.abs() <= interpolated as f64 * max_x + 1e-9
}
