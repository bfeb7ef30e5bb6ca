//! Seeded Monte Carlo experiments: the estimation-error ratio table
//! comparing rearrangement against isotonization, and bootstrap band
//! coverage with the monotonicity-test rejection rate.

use rayon::prelude::*;

use crate::curves::{domain_transform, make_grid, DomainMap, GridCurve};
use crate::error::Result;
use crate::estimators::{
    abadie_structural_cdf, gen_sample, ivqr_fit_taus, qr_fit_binary, true_structural_cdf,
    true_structural_quantile, DgpParams, Sample,
};
use crate::inference::{
    bootstrap, derive_seed, monotonicity_test, score_errors, uniform_band, ErrorScores,
};
use crate::isotonic::isotonize;
use crate::rearrangement::rearrange;

/// Configuration for the ratio-table experiment.
#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Net size for the tau grid and the level grid.
    pub net: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig { n: 2_000, reps: 200, seed: 1, net: 99 }
    }
}

/// One panel cell: MC-accumulated errors for a target function.
#[derive(Debug, Clone, Copy, Default)]
pub struct PanelCell {
    pub scores: ErrorScores,
}

/// MC-averaged error ratios: two target panels (distribution and
/// quantile), three columns each (treated cell, control cell, effect).
#[derive(Debug, Clone, Default)]
pub struct RatioTable {
    pub distribution: [PanelCell; 3],
    pub quantile: [PanelCell; 3],
    /// Per-replicate contraction violations of the rearranged estimate for
    /// the four per-cell curves (effect curves excluded: the finite-sample
    /// contraction guarantee is per cell).
    pub cell_contraction_violations: usize,
    pub reps: usize,
}

pub const CELL_LABELS: [&str; 3] = ["treated", "control", "effect"];

struct RepOutcome {
    distribution: [ErrorScores; 3],
    quantile: [ErrorScores; 3],
    violations: usize,
}

fn effect_scores(
    est1: &GridCurve,
    est0: &GridCurve,
    truth: &GridCurve,
) -> Result<ErrorScores> {
    use crate::curves::{lp_distance, Norm};
    let diff = |a: &GridCurve, b: &GridCurve| -> Result<GridCurve> {
        a.with_values(
            a.values()
                .iter()
                .zip(b.values())
                .map(|(x, y)| x - y)
                .collect(),
        )
    };
    let orig = diff(est1, est0)?;
    let rear = diff(&rearrange(est1), &rearrange(est0))?;
    let iso = diff(&isotonize(est1), &isotonize(est0))?;
    let mut out = ErrorScores::default();
    for (i, p) in Norm::ALL.iter().enumerate() {
        out.original[i] = lp_distance(&orig, truth, *p)?;
        out.rearranged[i] = lp_distance(&rear, truth, *p)?;
        out.isotonized[i] = lp_distance(&iso, truth, *p)?;
    }
    Ok(out)
}

/// Structural quantile curves for both treatment cells from the grid-search
/// instrumental estimator. Extreme tau levels flatten the search objective
/// far from the true effect, so this uses a wide candidate grid and widens
/// it further on a boundary hit before giving up.
pub fn ivqr_quantile_curves(sample: &Sample, taus: &[f64]) -> Result<(GridCurve, GridCurve)> {
    let q25 = crate::estimators::check_quantile(&sample.y, 0.25)?;
    let q75 = crate::estimators::check_quantile(&sample.y, 0.75)?;
    let iqr = (q75 - q25).max(f64::MIN_POSITIVE);
    let mut result = Err(crate::error::Error::GridBoundary);
    for widen in [8.0, 16.0, 32.0] {
        let half = widen * iqr;
        let grid: Vec<f64> = (0..401).map(|i| -half + 2.0 * half * i as f64 / 400.0).collect();
        result = ivqr_fit_taus(sample, taus, &grid);
        match result {
            Err(crate::error::Error::GridBoundary) => continue,
            _ => break,
        }
    }
    let fits = result?;
    Ok((
        GridCurve::new(taus.to_vec(), fits.iter().map(|f| f.quantile(1.0)).collect())?,
        GridCurve::new(taus.to_vec(), fits.iter().map(|f| f.quantile(0.0)).collect())?,
    ))
}

fn run_rep(params: &DgpParams, cfg: &MonteCarloConfig, rep: u64) -> Result<RepOutcome> {
    let sample = gen_sample(params, cfg.n, derive_seed(cfg.seed, rep))?;
    let taus = make_grid(cfg.net)?;

    let (q1, q0) = ivqr_quantile_curves(&sample, &taus)?;
    let q1_truth = GridCurve::new(
        taus.clone(),
        taus.iter()
            .map(|&u| true_structural_quantile(params, u, 1.0))
            .collect::<Result<Vec<f64>>>()?,
    )?;
    let q0_truth = GridCurve::new(
        taus.clone(),
        taus.iter()
            .map(|&u| true_structural_quantile(params, u, 0.0))
            .collect::<Result<Vec<f64>>>()?,
    )?;
    let qe_truth = GridCurve::new(taus.clone(), vec![params.alpha[1]; taus.len()])?;

    // distribution panel: Wald-type instrumental estimator on a common
    // equidistant level grid spanning both cells
    let y_lo = true_structural_quantile(params, 0.01, 1.0)?
        .min(true_structural_quantile(params, 0.01, 0.0)?);
    let y_hi = true_structural_quantile(params, 0.99, 1.0)?
        .max(true_structural_quantile(params, 0.99, 0.0)?);
    let y_grid: Vec<f64> = (0..cfg.net)
        .map(|i| y_lo + (y_hi - y_lo) * i as f64 / (cfg.net - 1) as f64)
        .collect();
    let (f1_raw, f0_raw) = abadie_structural_cdf(&sample, &y_grid)?;
    let map = DomainMap::new(y_lo, y_hi)?;
    let f1 = domain_transform(&f1_raw, &map)?;
    let f0 = domain_transform(&f0_raw, &map)?;
    let f1_truth = f1.with_values(
        y_grid
            .iter()
            .map(|&y| true_structural_cdf(params, y, 1.0))
            .collect(),
    )?;
    let f0_truth = f0.with_values(
        y_grid
            .iter()
            .map(|&y| true_structural_cdf(params, y, 0.0))
            .collect(),
    )?;
    let fe_truth = f1_truth.with_values(
        f1_truth
            .values()
            .iter()
            .zip(f0_truth.values())
            .map(|(a, b)| a - b)
            .collect(),
    )?;

    let cells = [
        (score_errors(&f1, &f1_truth)?, score_errors(&f0, &f0_truth)?),
        (score_errors(&q1, &q1_truth)?, score_errors(&q0, &q0_truth)?),
    ];
    let mut violations = 0usize;
    for (a, b) in &cells {
        for s in [a, b] {
            for i in 0..3 {
                if s.rearranged[i] > s.original[i] + 1e-12 {
                    violations += 1;
                }
            }
        }
    }

    Ok(RepOutcome {
        distribution: [
            cells[0].0,
            cells[0].1,
            effect_scores(&f1, &f0, &fe_truth)?,
        ],
        quantile: [
            cells[1].0,
            cells[1].1,
            effect_scores(&q1, &q0, &qe_truth)?,
        ],
        violations,
    })
}

/// The ratio-table experiment: `reps` independent samples, each fitted with
/// both estimators, monotonized both ways, and scored against the truth.
pub fn ratio_table(params: &DgpParams, cfg: &MonteCarloConfig) -> Result<RatioTable> {
    let outcomes: Vec<Result<RepOutcome>> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| run_rep(params, cfg, rep))
        .collect();
    let mut table = RatioTable { reps: cfg.reps, ..Default::default() };
    for o in outcomes {
        let o = o?;
        for i in 0..3 {
            table.distribution[i].scores.accumulate(&o.distribution[i]);
            table.quantile[i].scores.accumulate(&o.quantile[i]);
        }
        table.cell_contraction_violations += o.violations;
    }
    Ok(table)
}

impl RatioTable {
    /// CSV rendering: panel, cell, norm, rearranged and isotonized percent.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("panel,cell,norm,rearranged_pct,isotonized_pct\n");
        for (panel, cells) in [("distribution", &self.distribution), ("quantile", &self.quantile)] {
            for (cell, label) in cells.iter().zip(CELL_LABELS) {
                let (r, i) = cell.scores.ratios();
                for (ni, norm) in ["L1", "L2", "Linf"].iter().enumerate() {
                    out.push_str(&format!(
                        "{panel},{label},{norm},{:.2},{:.2}\n",
                        r[ni], i[ni]
                    ));
                }
            }
        }
        out
    }
}

/// Configuration for the coverage experiment.
#[derive(Debug, Clone)]
pub struct CoverageConfig {
    pub n: usize,
    pub mc_runs: usize,
    pub b: usize,
    pub level: f64,
    pub seed: u64,
    pub net: usize,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        CoverageConfig { n: 2_000, mc_runs: 200, b: 200, level: 0.9, seed: 1, net: 99 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CoverageResult {
    pub coverage: f64,
    pub rejection_rate: f64,
    pub mc_runs: usize,
}

/// Simulated uniform-band coverage of the true structural quantile function
/// of the control cell under the exogenous (monotone-population) DGP, with
/// the monotonicity-test rejection rate alongside.
pub fn coverage_simulation(params: &DgpParams, cfg: &CoverageConfig) -> Result<CoverageResult> {
    let taus = make_grid(cfg.net)?;
    let truth = GridCurve::new(
        taus.clone(),
        taus.iter()
            .map(|&u| true_structural_quantile(params, u, 0.0))
            .collect::<Result<Vec<f64>>>()?,
    )?;
    let outcomes: Vec<Result<(bool, bool)>> = (0..cfg.mc_runs as u64)
        .into_par_iter()
        .map(|run| {
            let sample = gen_sample(params, cfg.n, derive_seed(cfg.seed, run))?;
            let taus = taus.clone();
            let estimator = move |s: &Sample| -> Result<GridCurve> {
                let mut values = Vec::with_capacity(taus.len());
                for &tau in &taus {
                    let (beta, _) = qr_fit_binary(&s.y, &s.x, tau)?;
                    values.push(beta[0]);
                }
                GridCurve::new(taus.clone(), values)
            };
            let ens = bootstrap(&sample, &estimator, cfg.b, derive_seed(cfg.seed ^ 0xC0FE, run))?;
            let band = uniform_band(&ens, cfg.level)?;
            let covered = band.contains(&truth);
            let test = monotonicity_test(&ens, cfg.level)?;
            Ok((covered, test.reject))
        })
        .collect();
    let mut covered = 0usize;
    let mut rejected = 0usize;
    for o in outcomes {
        let (c, r) = o?;
        covered += c as usize;
        rejected += r as usize;
    }
    Ok(CoverageResult {
        coverage: covered as f64 / cfg.mc_runs as f64,
        rejection_rate: rejected as f64 / cfg.mc_runs as f64,
        mc_runs: cfg.mc_runs,
    })
}

/// Power check for the monotonicity test: a handcrafted non-monotone
/// population curve, estimated by sample quantiles of a transformed
/// outcome, should be rejected with growing frequency as n grows.
pub fn monotonicity_power(n: usize, mc_runs: usize, b: usize, level: f64, seed: u64) -> Result<f64> {
    use crate::estimators::check_quantile;
    let k = 49usize;
    let taus = make_grid(k)?;
    let outcomes: Vec<Result<bool>> = (0..mc_runs as u64)
        .into_par_iter()
        .map(|run| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, run));
            // population "quantile curve" is the non-monotone map
            // u -> u + 0.8 sin(2 pi u), estimated pointwise with noise
            let shape = |u: f64| u + 0.8 * (2.0 * std::f64::consts::PI * u).sin();
            let noise: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let y = noise;
            let x = vec![0.0; n];
            let z = vec![0.0; n];
            let sample = Sample::new(y, x, z)?;
            let taus = taus.clone();
            let estimator = move |s: &Sample| -> Result<GridCurve> {
                let values = taus
                    .iter()
                    .map(|&t| Ok(shape(t) + check_quantile(&s.y, t)?))
                    .collect::<Result<Vec<f64>>>()?;
                GridCurve::new(taus.clone(), values)
            };
            let ens = bootstrap(&sample, &estimator, b, derive_seed(seed ^ 0xBEEF, run))?;
            Ok(monotonicity_test(&ens, level)?.reject)
        })
        .collect();
    let rejected: usize = outcomes.into_iter().map(|o| o.map(|r| r as usize)).sum::<Result<usize>>()?;
    Ok(rejected as f64 / mc_runs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_table_small_run() {
        let params = DgpParams::default();
        let cfg = MonteCarloConfig { n: 500, reps: 8, seed: 3, net: 25 };
        let table = ratio_table(&params, &cfg).unwrap();
        assert_eq!(table.cell_contraction_violations, 0);
        for panel in [&table.distribution, &table.quantile] {
            for cell in panel.iter().take(2) {
                let (r, _) = cell.scores.ratios();
                for v in r {
                    assert!(v <= 100.0 + 1e-9, "ratio {v}");
                }
            }
        }
        let csv = table.to_csv();
        assert!(csv.lines().count() == 19);
    }

    #[test]
    fn ratio_table_is_deterministic() {
        let params = DgpParams::default();
        let cfg = MonteCarloConfig { n: 300, reps: 4, seed: 9, net: 19 };
        let a = ratio_table(&params, &cfg).unwrap().to_csv();
        let b = ratio_table(&params, &cfg).unwrap().to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn coverage_smoke() {
        let params = DgpParams::exogenous();
        let cfg = CoverageConfig { n: 600, mc_runs: 20, b: 60, level: 0.9, seed: 5, net: 25 };
        let r = coverage_simulation(&params, &cfg).unwrap();
        assert!(r.coverage > 0.5, "coverage = {}", r.coverage);
        assert!(r.rejection_rate <= 0.4);
    }

    #[test]
    fn monotonicity_test_has_power() {
        let small = monotonicity_power(60, 30, 60, 0.9, 2).unwrap();
        let large = monotonicity_power(4_000, 30, 60, 0.9, 2).unwrap();
        assert!(large > 0.9, "large-n rejection rate {large}");
        assert!(large >= small);
    }
}
