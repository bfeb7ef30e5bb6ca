//! Closed-form curve analytics: root finding for level sets, the induced
//! distribution and density by the alternating-sign root formulas, sparsity,
//! and the Hadamard derivatives of the rearrangement-related operators with
//! a finite-difference checker.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::curves::GridCurve;
use crate::error::{Error, Result};

/// Slope tolerance below which a root is flagged as critical.
pub const CRITICAL_SLOPE_TOL: f64 = 1e-6;

/// Distance from a critical value of the curve below which a level is
/// rejected: the curve is tangent there and sign bracketing cannot see the
/// flat root.
pub const CRITICAL_VALUE_TOL: f64 = 1e-9;

/// Default bracketing net for root location.
pub const DEFAULT_BRACKET_NET: usize = 10_000;

/// Net used by the independent finite-difference integrator.
pub const INTEGRATOR_NET: usize = 1_000_000;

type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A continuously differentiable u -> Q(u) on [0,1] with derivative access.
#[derive(Clone)]
pub struct AnalyticCurve {
    eval: CurveFn,
    deriv: CurveFn,
}

impl AnalyticCurve {
    pub fn new(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        AnalyticCurve { eval: Arc::new(eval), deriv: Arc::new(deriv) }
    }

    /// The demo curve Q(u) = 5{u + sin(2 pi u)/pi}, highly non-monotone on
    /// [0,1] with critical points at u = 1/3 and 2/3.
    pub fn sine_demo() -> Self {
        AnalyticCurve::new(
            |u| 5.0 * (u + (2.0 * PI * u).sin() / PI),
            |u| 5.0 * (1.0 + 2.0 * (2.0 * PI * u).cos()),
        )
    }

    pub fn linear(slope: f64, intercept: f64) -> Self {
        AnalyticCurve::new(move |u| intercept + slope * u, move |_| slope)
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.eval)(u)
    }

    pub fn deriv(&self, u: f64) -> f64 {
        (self.deriv)(u)
    }

    /// Check that the supplied derivative matches central differences of the
    /// evaluator away from the endpoints.
    pub fn check_derivative(&self, tol: f64) -> bool {
        let h = 1e-6;
        (1..100).all(|i| {
            let u = i as f64 / 100.0;
            let fd = (self.eval(u + h) - self.eval(u - h)) / (2.0 * h);
            (fd - self.deriv(u)).abs() <= tol * (1.0 + self.deriv(u).abs())
        })
    }

    pub fn sample(&self, k: usize) -> Result<GridCurve> {
        GridCurve::from_fn(k, |u| self.eval(u))
    }

    pub fn range(&self, net: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=net {
            let v = self.eval(i as f64 / net as f64);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

impl std::fmt::Debug for AnalyticCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnalyticCurve").finish_non_exhaustive()
    }
}

/// Roots of Q(u) = y in increasing order with the slope signs at each root.
#[derive(Debug, Clone)]
pub struct RootSet {
    pub y: f64,
    pub roots: Vec<f64>,
    pub signs: Vec<f64>,
}

/// Locate all crossings of Q(u) = y by sign bracketing on a fine net and
/// bisection refinement to 1e-12. Errors if any root is (nearly) critical.
pub fn find_roots(q: &AnalyticCurve, y: f64) -> Result<RootSet> {
    find_roots_with_net(q, y, DEFAULT_BRACKET_NET)
}

pub fn find_roots_with_net(q: &AnalyticCurve, y: f64, net: usize) -> Result<RootSet> {
    // a level at (or within float noise of) a critical value has a tangent
    // root that sign bracketing never produces; reject it explicitly
    for c in critical_points(q, net) {
        if (q.eval(c) - y).abs() <= CRITICAL_VALUE_TOL {
            return Err(Error::CriticalValue { y, tol: CRITICAL_VALUE_TOL });
        }
    }
    let roots = locate_roots(q, y, net);
    let mut signs = Vec::with_capacity(roots.len());
    for &r in &roots {
        let d = q.deriv(r);
        if d.abs() < CRITICAL_SLOPE_TOL {
            return Err(Error::CriticalValue { y, tol: CRITICAL_SLOPE_TOL });
        }
        signs.push(d.signum());
    }
    Ok(RootSet { y, roots, signs })
}

fn locate_roots(q: &AnalyticCurve, y: f64, net: usize) -> Vec<f64> {
    let g = |u: f64| q.eval(u) - y;
    let mut roots = Vec::new();
    let mut prev_u = 0.0;
    let mut prev_g = g(0.0);
    if prev_g == 0.0 {
        roots.push(0.0);
    }
    for i in 1..=net {
        let u = i as f64 / net as f64;
        let gu = g(u);
        if gu == 0.0 {
            roots.push(u);
        } else if prev_g != 0.0 && prev_g.signum() != gu.signum() {
            roots.push(bisect(&g, prev_u, u));
        }
        prev_u = u;
        prev_g = gu;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    roots
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut glo = g(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-13 {
            return mid;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if glo.signum() == gm.signum() {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// F(y) by the alternating-sign root formula:
/// F(y) = sum_k sign{dQ(u_k)} u_k + 1{dQ(u_K) < 0}.
pub fn analytic_cdf(q: &AnalyticCurve, y: f64) -> Result<f64> {
    let rs = find_roots(q, y)?;
    Ok(cdf_from_roots(q, y, &rs.roots))
}

/// The same formula without the critical-value guard; used internally where
/// the evaluation point is generic (e.g. during monotone inversion).
fn cdf_unchecked(q: &AnalyticCurve, y: f64, net: usize) -> f64 {
    let roots = locate_roots(q, y, net);
    cdf_from_roots(q, y, &roots)
}

fn cdf_from_roots(q: &AnalyticCurve, y: f64, roots: &[f64]) -> f64 {
    if roots.is_empty() {
        return if q.eval(0.0) <= y { 1.0 } else { 0.0 };
    }
    let mut f = 0.0;
    for &r in roots {
        f += q.deriv(r).signum() * r;
    }
    if q.deriv(roots[roots.len() - 1]) < 0.0 {
        f += 1.0;
    }
    f.clamp(0.0, 1.0)
}

/// f(y) = sum_k 1/|dQ(u_k)| at the roots of Q(u) = y.
pub fn analytic_density(q: &AnalyticCurve, y: f64) -> Result<f64> {
    let rs = find_roots(q, y)?;
    if rs.roots.is_empty() {
        return Ok(0.0);
    }
    Ok(rs.roots.iter().map(|&r| 1.0 / q.deriv(r).abs()).sum())
}

/// Q*(u) = F^{-1}(u), by monotone bisection of the analytic CDF.
pub fn rearranged_quantile(q: &AnalyticCurve, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "u must lie in (0,1), got {u}"
        )));
    }
    let (mut lo, mut hi) = q.range(DEFAULT_BRACKET_NET);
    let pad = 1e-9 * (hi - lo).max(1.0);
    lo -= pad;
    hi += pad;
    // F is continuous and strictly increasing on the support
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-12 * (1.0 + mid.abs()) {
            return Ok(mid);
        }
        if cdf_unchecked(q, mid, 2_000) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sparsity dQ*/du = 1/f(Q*(u)).
pub fn sparsity(q: &AnalyticCurve, u: f64) -> Result<f64> {
    let y = rearranged_quantile(q, u)?;
    let f = analytic_density(q, y)?;
    if f <= 0.0 {
        return Err(Error::DegenerateCurve(format!(
            "zero density at the image of u = {u}"
        )));
    }
    Ok(1.0 / f)
}

/// Hadamard derivative of the pre-rearrangement operator Q -> F in direction
/// h, at level y: D_h(y) = -sum_k h(u_k)/|dQ(u_k)|.
pub fn hadamard_d(q: &AnalyticCurve, h: &dyn Fn(f64) -> f64, y: f64) -> Result<f64> {
    let rs = find_roots(q, y)?;
    Ok(-rs
        .roots
        .iter()
        .map(|&r| h(r) / q.deriv(r).abs())
        .sum::<f64>())
}

/// Hadamard derivative of the rearrangement operator Q -> Q* in direction h,
/// at index u: Dtilde_h(u) = -D_h(Q*(u)) / f(Q*(u)). Reduces to h(u) when Q
/// is strictly increasing.
pub fn hadamard_dtilde(q: &AnalyticCurve, h: &dyn Fn(f64) -> f64, u: f64) -> Result<f64> {
    let y = rearranged_quantile(q, u)?;
    let f = analytic_density(q, y)?;
    if f <= 0.0 {
        return Err(Error::DegenerateCurve(format!(
            "zero density at the image of u = {u}"
        )));
    }
    let d = hadamard_d(q, h, y)?;
    Ok(-d / f)
}

/// Finite-difference quotient [F(y; Q + t h) - F(y; Q)]/t, with both CDFs
/// computed by high-resolution numerical integration of the indicator over a
/// net independent of the root machinery.
pub fn finite_diff_d(q: &AnalyticCurve, h: &dyn Fn(f64) -> f64, t: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("step t must be positive".into()));
    }
    let m = INTEGRATOR_NET;
    let base = measure_below(&|u| q.eval(u) - y, m);
    let pert = measure_below(&|u| q.eval(u) + t * h(u) - y, m);
    Ok((pert - base) / t)
}

/// Lebesgue measure of {u in [0,1]: g(u) <= 0}, by cell counting with the
/// boundary cells refined by bisection. Dividing by a small t amplifies any
/// integration error, so plain counting is not accurate enough here.
fn measure_below(g: &dyn Fn(f64) -> f64, net: usize) -> f64 {
    let mut total = 0.0;
    let mut prev_u = 0.0;
    let mut prev_g = g(0.0);
    for i in 1..=net {
        let u = i as f64 / net as f64;
        let gu = g(u);
        if prev_g <= 0.0 && gu <= 0.0 {
            total += u - prev_u;
        } else if prev_g <= 0.0 || gu <= 0.0 {
            let c = bisect(&g, prev_u, u);
            total += if prev_g <= 0.0 { c - prev_u } else { u - c };
        }
        prev_u = u;
        prev_g = gu;
    }
    total
}

/// Upper bound Delta(y,t) = (1/t) int 1{|Q(u)-y| <= t sup|h|} du on the
/// finite-difference quotient, computed with the same integrator.
pub fn finite_diff_bound(q: &AnalyticCurve, h_sup: f64, t: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("step t must be positive".into()));
    }
    let m = INTEGRATOR_NET;
    // the band {|Q - y| <= t h_sup} has measure F(y + t h_sup) - F(y - t h_sup)
    let upper = measure_below(&|u| q.eval(u) - (y + t * h_sup), m);
    let lower = measure_below(&|u| q.eval(u) - (y - t * h_sup), m);
    Ok((upper - lower) / t)
}

/// Maximal u-intervals where |dQ/du| exceeds the threshold. The complement
/// is the nonregular neighborhood to exclude from band construction.
pub fn regular_region(q: &AnalyticCurve, threshold: f64, net: usize) -> Result<Vec<(f64, f64)>> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument("threshold must be positive".into()));
    }
    let slopes: Vec<f64> = (0..=net).map(|i| q.deriv(i as f64 / net as f64)).collect();
    Ok(intervals_above(&slopes, threshold, |i| i as f64 / net as f64))
}

/// Same detector driven by finite-difference slopes of a grid curve.
pub fn regular_region_grid(q: &GridCurve, threshold: f64) -> Result<Vec<(f64, f64)>> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument("threshold must be positive".into()));
    }
    let g = q.u_grid();
    let v = q.values();
    let w = q.cell_width();
    let slopes: Vec<f64> = (0..v.len())
        .map(|j| {
            if j == 0 {
                (v[1] - v[0]) / w
            } else if j + 1 == v.len() {
                (v[j] - v[j - 1]) / w
            } else {
                (v[j + 1] - v[j - 1]) / (2.0 * w)
            }
        })
        .collect();
    Ok(intervals_above(&slopes, threshold, |i| g[i]))
}

fn intervals_above(
    slopes: &[f64],
    threshold: f64,
    pos: impl Fn(usize) -> f64,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, s) in slopes.iter().enumerate() {
        if s.abs() > threshold {
            start.get_or_insert(i);
        } else if let Some(s0) = start.take() {
            out.push((pos(s0), pos(i - 1)));
        }
    }
    if let Some(s0) = start {
        out.push((pos(s0), pos(slopes.len() - 1)));
    }
    out
}

/// Critical points of the curve: zeros of dQ/du, by bracketing the derivative.
pub fn critical_points(q: &AnalyticCurve, net: usize) -> Vec<f64> {
    let d = |u: f64| q.deriv(u);
    let mut pts = Vec::new();
    let mut prev_u = 0.0;
    let mut prev = d(0.0);
    if prev == 0.0 {
        pts.push(0.0);
    }
    for i in 1..=net {
        let u = i as f64 / net as f64;
        let du = d(u);
        if du == 0.0 {
            pts.push(u);
        } else if prev != 0.0 && prev.signum() != du.signum() {
            pts.push(bisect(&d, prev_u, u));
        }
        prev_u = u;
        prev = du;
    }
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-10);
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine() -> AnalyticCurve {
        AnalyticCurve::sine_demo()
    }

    #[test]
    fn derivative_consistency() {
        assert!(sine().check_derivative(1e-6));
        assert!(AnalyticCurve::linear(2.0, -1.0).check_derivative(1e-6));
    }

    #[test]
    fn sine_critical_points_and_values() {
        let q = sine();
        let pts = critical_points(&q, DEFAULT_BRACKET_NET);
        assert_eq!(pts.len(), 2);
        assert!((pts[0] - 1.0 / 3.0).abs() < 1e-9);
        assert!((pts[1] - 2.0 / 3.0).abs() < 1e-9);
        let v1 = q.eval(pts[0]);
        let v2 = q.eval(pts[1]);
        assert!((v1 - 3.04).abs() < 1e-2, "v1 = {v1}");
        assert!((v2 - 1.96).abs() < 1e-2, "v2 = {v2}");
    }

    #[test]
    fn find_roots_sine_three_roots() {
        let q = sine();
        let rs = find_roots(&q, 2.5).unwrap();
        assert_eq!(rs.roots.len(), 3, "roots: {:?}", rs.roots);
        for &r in &rs.roots {
            assert!((q.eval(r) - 2.5).abs() < 1e-9);
        }
        // brute-force oracle: count sign changes of Q - y on a 10^6 net
        let m = 1_000_000usize;
        let mut changes = 0;
        let mut prev = q.eval(0.0) - 2.5;
        for i in 1..=m {
            let g = q.eval(i as f64 / m as f64) - 2.5;
            if prev.signum() != g.signum() {
                changes += 1;
            }
            prev = g;
        }
        assert_eq!(changes, 3);
    }

    #[test]
    fn find_roots_identity() {
        let q = AnalyticCurve::linear(1.0, 0.0);
        let rs = find_roots(&q, 0.3).unwrap();
        assert_eq!(rs.roots.len(), 1);
        assert!((rs.roots[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn critical_value_is_an_error() {
        let q = sine();
        // 3.045 is within root-slope tolerance of the upper critical value
        let crit = q.eval(1.0 / 3.0);
        assert!(matches!(
            find_roots(&q, crit),
            Err(Error::CriticalValue { .. })
        ));
        assert!(analytic_cdf(&q, crit).is_err());
        assert!(analytic_density(&q, crit).is_err());
    }

    #[test]
    fn cdf_identity_curve() {
        let q = AnalyticCurve::linear(1.0, 0.0);
        assert!((analytic_cdf(&q, 0.3).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn cdf_matches_brute_force_on_sine() {
        let q = sine();
        let y = 2.5;
        let m = 1_000_000usize;
        let oracle = (0..m)
            .filter(|&i| q.eval((i as f64 + 0.5) / m as f64) <= y)
            .count() as f64
            / m as f64;
        assert!((analytic_cdf(&q, y).unwrap() - oracle).abs() < 1e-6);
    }

    #[test]
    fn cdf_continuous_across_critical_value() {
        let q = sine();
        let crit = q.eval(2.0 / 3.0); // ~1.955
        let below = analytic_cdf(&q, crit - 1e-5).unwrap();
        let above = analytic_cdf(&q, crit + 1e-5).unwrap();
        // the modulus of continuity at a critical value is of square-root
        // order: a pair of merging roots contributes ~2 sqrt(2 dy / |Q''|)
        assert!((below - above).abs() < 2e-3, "{below} vs {above}");
    }

    #[test]
    fn density_constant_slopes() {
        let q = AnalyticCurve::linear(1.0, 0.0);
        assert!((analytic_density(&q, 0.4).unwrap() - 1.0).abs() < 1e-12);
        let q2 = AnalyticCurve::linear(2.0, 0.0);
        assert!((analytic_density(&q2, 0.8).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn density_is_derivative_of_cdf() {
        let q = sine();
        let h = 1e-5;
        for &y in &[0.5, 2.5, 4.0, 5.5] {
            let fd = (analytic_cdf(&q, y + h).unwrap() - analytic_cdf(&q, y - h).unwrap())
                / (2.0 * h);
            let f = analytic_density(&q, y).unwrap();
            assert!((fd - f).abs() < 1e-3, "y={y}: {fd} vs {f}");
        }
    }

    #[test]
    fn density_jumps_at_critical_values() {
        let q = sine();
        let crit = q.eval(1.0 / 3.0);
        let left = analytic_density(&q, crit - 1e-3).unwrap();
        let right = analytic_density(&q, crit + 1e-3).unwrap();
        assert!((left - right).abs() > 0.05, "left={left} right={right}");
    }

    #[test]
    fn sparsity_constant_slopes() {
        let q = AnalyticCurve::linear(1.0, 0.0);
        assert!((sparsity(&q, 0.3).unwrap() - 1.0).abs() < 1e-6);
        let q2 = AnalyticCurve::linear(2.0, 0.0);
        assert!((sparsity(&q2, 0.3).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn sparsity_matches_finite_difference_of_rearranged_curve() {
        let q = sine();
        for &u in &[0.1, 0.25, 0.55, 0.9] {
            let h = 1e-5;
            let fd = (rearranged_quantile(&q, u + h).unwrap()
                - rearranged_quantile(&q, u - h).unwrap())
                / (2.0 * h);
            let s = sparsity(&q, u).unwrap();
            assert!((fd - s).abs() < 1e-3, "u={u}: fd={fd} s={s}");
        }
    }

    #[test]
    fn hadamard_d_single_root() {
        let q = AnalyticCurve::linear(1.0, 0.0);
        for &y in &[0.2, 0.5, 0.8] {
            assert!((hadamard_d(&q, &|_| 3.0, y).unwrap() + 3.0).abs() < 1e-10);
            assert!((hadamard_d(&q, &|u| u, y).unwrap() + y).abs() < 1e-10);
        }
    }

    #[test]
    fn hadamard_d_linearity_in_h() {
        let q = sine();
        let y = 2.5;
        let h1 = |u: f64| (3.0 * u).sin();
        let h2 = |u: f64| u * u;
        let a = 2.0;
        let b = -0.7;
        let lhs = hadamard_d(&q, &|u| a * h1(u) + b * h2(u), y).unwrap();
        let rhs = a * hadamard_d(&q, &h1, y).unwrap() + b * hadamard_d(&q, &h2, y).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn hadamard_dtilde_identity_for_increasing_curves() {
        let q = AnalyticCurve::linear(1.0, 0.0);
        let q2 = AnalyticCurve::linear(2.0, 1.0);
        for &u in &[0.2, 0.5, 0.8] {
            let got = hadamard_dtilde(&q, &|v| (3.0 * v).sin(), u).unwrap();
            assert!((got - (3.0 * u).sin()).abs() < 1e-9, "u={u}: {got}");
            let got2 = hadamard_dtilde(&q2, &|_| 1.0, u).unwrap();
            assert!((got2 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn finite_diff_d_zero_direction() {
        let q = sine();
        for &t in &[1e-2, 1e-4] {
            assert_eq!(finite_diff_d(&q, &|_| 0.0, t, 2.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn finite_diff_d_bounded_by_delta() {
        let q = sine();
        let h = |u: f64| (3.0 * u).sin();
        let h_sup = 1.0f64; // sup |sin(3u)| on [0,1] is sin(1.5*...) <= 1
        for &y in &[1.0, 2.5, 4.2] {
            for &t in &[1e-2, 1e-3] {
                let d = finite_diff_d(&q, &h, t, y).unwrap();
                let bound = finite_diff_bound(&q, h_sup, t, y).unwrap();
                assert!(d.abs() <= bound + 1e-9, "y={y} t={t}: |{d}| > {bound}");
            }
        }
    }

    #[test]
    fn finite_diff_converges_to_hadamard_d() {
        let q = sine();
        let h = |u: f64| (3.0 * u).sin();
        let y = 2.5;
        let exact = hadamard_d(&q, &h, y).unwrap();
        let mut prev_gap = f64::INFINITY;
        for &t in &[1e-2, 1e-3, 1e-4] {
            let gap = (finite_diff_d(&q, &h, t, y).unwrap() - exact).abs();
            assert!(gap <= prev_gap + 1e-9, "gap not decreasing at t={t}");
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-2, "final gap {prev_gap}");
    }

    #[test]
    fn regular_region_detectors() {
        let q = AnalyticCurve::linear(1.0, 0.0);
        let r = regular_region(&q, 0.5, 1000).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0], (0.0, 1.0));

        let flat = AnalyticCurve::linear(0.0, 2.0);
        assert!(regular_region(&flat, 0.1, 1000).unwrap().is_empty());

        let s = sine();
        let r = regular_region(&s, 0.5, 10_000).unwrap();
        // excludes neighborhoods of 1/3 and 2/3: three intervals remain
        assert_eq!(r.len(), 3, "{r:?}");
        assert!(r[0].1 < 1.0 / 3.0 && r[1].0 > 1.0 / 3.0);
        assert!(r[1].1 < 2.0 / 3.0 && r[2].0 > 2.0 / 3.0);
    }

    #[test]
    fn regular_region_grid_matches_analytic() {
        let s = sine();
        let g = s.sample(999).unwrap();
        let r = regular_region_grid(&g, 0.5).unwrap();
        assert_eq!(r.len(), 3, "{r:?}");
    }
}
