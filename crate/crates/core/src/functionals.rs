//! Box-kernel smoothing, linear functionals by Riemann sums, and the Lorenz
//! curve functional of a rearranged quantile curve.

use crate::curves::{GridCurve, StepCdf};
use crate::error::{Error, Result};

/// Box-kernel smoothing spec: k_delta(v) = 1{|v| <= delta}/(2 delta).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingSpec {
    delta: f64,
}

impl SmoothingSpec {
    pub const DELTA_MIN: f64 = 0.02;
    pub const DELTA_MAX: f64 = 0.2;

    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "smoothing bandwidth must lie in (0, 0.5), got {delta}"
            )));
        }
        Ok(SmoothingSpec { delta })
    }

    /// Bandwidth restricted to the default fixed positive bounds.
    pub fn bounded(delta: f64) -> Result<Self> {
        if !(Self::DELTA_MIN..=Self::DELTA_MAX).contains(&delta) {
            return Err(Error::InvalidArgument(format!(
                "smoothing bandwidth must lie in [{}, {}], got {delta}",
                Self::DELTA_MIN,
                Self::DELTA_MAX
            )));
        }
        SmoothingSpec::new(delta)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

fn box_average(positions: &[f64], values: &[f64], at: f64, delta: f64) -> f64 {
    // truncate the kernel window to the sampled domain and renormalize
    let mut sum = 0.0;
    let mut n = 0usize;
    for (p, v) in positions.iter().zip(values) {
        if (p - at).abs() <= delta {
            sum += v;
            n += 1;
        }
    }
    sum / n as f64
}

/// Moving box average of a grid curve. Near the boundary the kernel is
/// truncated to the domain and renormalized to unit mass.
pub fn smooth_curve(curve: &GridCurve, spec: &SmoothingSpec) -> GridCurve {
    let g = curve.u_grid();
    let v = curve.values();
    let out: Vec<f64> = g.iter().map(|&u| box_average(g, v, u, spec.delta)).collect();
    curve.with_values(out).expect("same grid")
}

/// Moving box average of a step CDF's values over its y grid. Returned as
/// raw (y, value) pairs: the smoothed values need not reach 1 at the top of
/// the grid, so they no longer satisfy the step-CDF contract.
pub fn smooth_cdf(cdf: &StepCdf, spec: &SmoothingSpec) -> (Vec<f64>, Vec<f64>) {
    let y = cdf.y_grid();
    let p = cdf.probs();
    let out = y.iter().map(|&at| box_average(y, p, at, spec.delta)).collect();
    (y.to_vec(), out)
}

/// Riemann sum of g(u) * curve(u) over the grid.
pub fn linear_functional(curve: &GridCurve, g: &dyn Fn(f64) -> f64) -> f64 {
    let w = curve.cell_width();
    curve
        .u_grid()
        .iter()
        .zip(curve.values())
        .map(|(&u, &v)| g(u) * v)
        .sum::<f64>()
        * w
}

/// Lorenz curve L(u') of a nonnegative nondecreasing quantile curve:
/// the ratio of the partial mean up to u' to the overall mean.
pub fn lorenz(q_star: &GridCurve, u_prime: f64) -> Result<f64> {
    let denom = linear_functional(q_star, &|_| 1.0);
    if denom <= 0.0 {
        return Err(Error::DegenerateCurve(
            "Lorenz denominator is not positive".into(),
        ));
    }
    let num = linear_functional(q_star, &|u| if u <= u_prime { 1.0 } else { 0.0 });
    Ok(num / denom)
}

/// The full Lorenz curve sampled on the curve's own grid.
pub fn lorenz_curve(q_star: &GridCurve) -> Result<GridCurve> {
    let w = q_star.cell_width();
    let denom: f64 = q_star.values().iter().sum::<f64>() * w;
    if denom <= 0.0 {
        return Err(Error::DegenerateCurve(
            "Lorenz denominator is not positive".into(),
        ));
    }
    let mut running = 0.0;
    let values: Vec<f64> = q_star
        .values()
        .iter()
        .map(|&v| {
            running += v * w;
            running / denom
        })
        .collect();
    q_star.with_values(values)
}
