//! Subcommand implementations. Each writes plot-ready CSVs and, when it
//! emits more than one artifact, a manifest with content hashes.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rearrange::analytic::{
    analytic_cdf, analytic_density, critical_points, sparsity, AnalyticCurve,
    DEFAULT_BRACKET_NET,
};
use rearrange::curves::{domain_transform, make_grid, DomainMap, GridCurve};
use rearrange::estimators::{
    abadie_structural_cdf, check_quantile, gen_sample, qr_fit, qr_fit_binary, DgpParams, Sample,
};
use rearrange::experiments::{ivqr_quantile_curves, ratio_table, MonteCarloConfig};
use rearrange::functionals::{lorenz_curve, smooth_curve, SmoothingSpec};
use rearrange::inference::{
    bootstrap, monotone_intersect, monotonicity_test, score_errors, uniform_band, Band,
    BootstrapEnsemble, ErrorScores,
};
use rearrange::isotonic::isotonize;
use rearrange::rearrangement::rearrange;
use rearrange::{Error, Result};

use crate::io::{read_sample, write_columns, write_sample};
use crate::manifest::ManifestBuilder;

pub fn cmd_rearrange(input: &Path, output: &Path) -> Result<()> {
    let curve = GridCurve::load(input)?;
    rearrange(&curve).save(output)
}

pub fn cmd_isotonize(input: &Path, output: &Path) -> Result<()> {
    let curve = GridCurve::load(input)?;
    isotonize(&curve).save(output)
}

pub fn cmd_demo_sine(out_dir: &Path, net: usize) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = ManifestBuilder::new(out_dir, None);
    let q = AnalyticCurve::sine_demo();
    let grid = make_grid(net)?;

    let sampled = q.sample(net)?;
    let sorted = rearrange(&sampled);
    let path = out_dir.join("quantile.csv");
    write_columns(&path, "u,q,q_star", &[&grid, sampled.values(), sorted.values()])?;
    manifest.record(path);

    // distribution and density over the value range, skipping a small
    // neighborhood of each critical value where the density jumps
    let crits: Vec<f64> = critical_points(&q, DEFAULT_BRACKET_NET)
        .iter()
        .map(|&u| q.eval(u))
        .collect();
    let (lo, hi) = q.range(DEFAULT_BRACKET_NET);
    let mut ys = Vec::new();
    let mut cdf = Vec::new();
    let mut dens = Vec::new();
    for i in 1..400 {
        let y = lo + (hi - lo) * i as f64 / 400.0;
        if crits.iter().any(|c| (c - y).abs() < 5e-3) {
            continue;
        }
        ys.push(y);
        cdf.push(analytic_cdf(&q, y)?);
        dens.push(analytic_density(&q, y)?);
    }
    let path = out_dir.join("cdf.csv");
    write_columns(&path, "y,f", &[&ys, &cdf])?;
    manifest.record(path);
    let path = out_dir.join("density.csv");
    write_columns(&path, "y,density", &[&ys, &dens])?;
    manifest.record(path);

    let spars: Vec<f64> = grid
        .iter()
        .map(|&u| sparsity(&q, u))
        .collect::<Result<Vec<f64>>>()?;
    let path = out_dir.join("sparsity.csv");
    write_columns(&path, "u,sparsity", &[&grid, &spars])?;
    manifest.record(path);

    manifest.write()?;
    Ok(())
}

pub fn cmd_simulate(
    params_path: Option<&Path>,
    n: usize,
    seed: u64,
    output: &Path,
) -> Result<()> {
    let params = match params_path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str::<DgpParams>(&text).map_err(|e| Error::Parse(e.to_string()))?
        }
        None => DgpParams::default(),
    };
    let sample = gen_sample(&params, n, seed)?;
    write_sample(&sample, output)
}

pub fn cmd_fit(input: &Path, method: &str, taus: &[f64], output: &Path) -> Result<()> {
    let sample = read_sample(input)?;
    match method {
        "qr" => {
            let fit = qr_fit(&sample, taus)?;
            let intercepts: Vec<f64> = fit.coefficients.iter().map(|c| c[0]).collect();
            let slopes: Vec<f64> = fit.coefficients.iter().map(|c| c[1]).collect();
            write_columns(output, "tau,intercept,slope", &[&fit.taus, &intercepts, &slopes])
        }
        "ivqr" => {
            let (q1, q0) = ivqr_quantile_curves(&sample, taus)?;
            write_columns(
                output,
                "tau,q_treated,q_control",
                &[taus, q1.values(), q0.values()],
            )
        }
        "abadie" => {
            let y_grid = abadie_level_grid(&sample, taus.len().max(2))?;
            let (f1, f0) = abadie_structural_cdf(&sample, &y_grid)?;
            write_columns(output, "y,f_treated,f_control", &[&y_grid, &f1.values, &f0.values])
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown method '{other}' (expected qr, ivqr, or abadie)"
        ))),
    }
}

/// Equidistant outcome levels spanning the central 98% of the sample.
fn abadie_level_grid(sample: &Sample, points: usize) -> Result<Vec<f64>> {
    let lo = check_quantile(&sample.y, 0.01)?;
    let hi = check_quantile(&sample.y, 0.99)?;
    if !(hi > lo) {
        return Err(Error::DegenerateCurve("outcome has no spread".into()));
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

/// Per-cell structural quantile curve from cell-separated quantile
/// regression; the bootstrap estimator used by bands and the test.
fn cell_quantile_estimator(
    taus: Vec<f64>,
    treated: bool,
) -> impl Fn(&Sample) -> Result<GridCurve> + Sync {
    move |s: &Sample| {
        let mut values = Vec::with_capacity(taus.len());
        for &tau in &taus {
            let (beta, _) = qr_fit_binary(&s.y, &s.x, tau)?;
            values.push(if treated { beta[0] + beta[1] } else { beta[0] });
        }
        GridCurve::new(taus.clone(), values)
    }
}

fn band_ensemble(
    sample: &Sample,
    net: usize,
    b: usize,
    seed: u64,
    treated: bool,
) -> Result<BootstrapEnsemble> {
    let taus = make_grid(net)?;
    let est = cell_quantile_estimator(taus, treated);
    bootstrap(sample, &est, b, seed)
}

fn write_band(path: &Path, band: &Band) -> Result<()> {
    write_columns(
        path,
        "u,point,lower,upper",
        &[
            band.point.u_grid(),
            band.point.values(),
            band.lower.values(),
            band.upper.values(),
        ],
    )
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_bands(
    input: &Path,
    out_dir: &Path,
    cell: &str,
    net: usize,
    b: usize,
    level: f64,
    seed: u64,
) -> Result<()> {
    let treated = match cell {
        "treated" => true,
        "control" => false,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown cell '{other}' (expected treated or control)"
            )))
        }
    };
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = ManifestBuilder::new(out_dir, Some(seed));
    let sample = read_sample(input)?;
    let ens = band_ensemble(&sample, net, b, seed, treated)?;
    let band = uniform_band(&ens, level)?;
    let path = out_dir.join("band.csv");
    write_band(&path, &band)?;
    manifest.record(path);
    let monotone = monotone_intersect(&band)?;
    let path = out_dir.join("band_monotone.csv");
    write_band(&path, &monotone)?;
    manifest.record(path);
    manifest.write()?;
    Ok(())
}

#[derive(Serialize)]
struct TestReport {
    reject: bool,
    max_violation: f64,
    at_u: f64,
    level: f64,
}

pub fn cmd_test_monotone(
    input: &Path,
    net: usize,
    b: usize,
    level: f64,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<()> {
    let sample = read_sample(input)?;
    let ens = band_ensemble(&sample, net, b, seed, false)?;
    let t = monotonicity_test(&ens, level)?;
    let report = TestReport {
        reject: t.reject,
        max_violation: t.max_violation,
        at_u: t.at_u,
        level: t.level,
    };
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?;
    println!("{json}");
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let mut manifest = ManifestBuilder::new(dir, Some(seed));
        let path = dir.join("test_monotone.json");
        std::fs::write(&path, &json)?;
        manifest.record(path);
        manifest.write()?;
    }
    Ok(())
}

pub fn cmd_montecarlo(n: usize, reps: usize, seed: u64, net: usize, output: &Path) -> Result<()> {
    let cfg = MonteCarloConfig { n, reps, seed, net };
    let table = ratio_table(&DgpParams::default(), &cfg)?;
    std::fs::write(output, table.to_csv())?;
    Ok(())
}

pub fn cmd_functionals(
    curve_path: &Path,
    lorenz: bool,
    smooth: Option<f64>,
    out_dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = ManifestBuilder::new(out_dir, None);
    let curve = GridCurve::load(curve_path)?;
    if lorenz {
        let l = lorenz_curve(&rearrange(&curve))?;
        let path = out_dir.join("lorenz.csv");
        write_columns(&path, "u,lorenz", &[l.u_grid(), l.values()])?;
        manifest.record(path);
    }
    if let Some(delta) = smooth {
        let spec = SmoothingSpec::new(delta)?;
        let s = smooth_curve(&curve, &spec);
        let path = out_dir.join("smoothed.csv");
        write_columns(&path, "u,value", &[s.u_grid(), s.values()])?;
        manifest.record(path);
    }
    if !lorenz && smooth.is_none() {
        return Err(Error::InvalidArgument(
            "nothing to do: pass --lorenz and/or --smooth".into(),
        ));
    }
    manifest.write()?;
    Ok(())
}

/// Full reproducible pipeline configuration; round-trips through JSON.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub n: usize,
    pub net_size: usize,
    pub b: usize,
    pub level: f64,
    pub mc_reps: usize,
    pub dgp: DgpParams,
    pub output_dir: PathBuf,
}

#[derive(Serialize)]
struct ScoreRecord {
    original: [f64; 3],
    rearranged: [f64; 3],
    isotonized: [f64; 3],
}

impl From<ErrorScores> for ScoreRecord {
    fn from(s: ErrorScores) -> Self {
        ScoreRecord {
            original: s.original,
            rearranged: s.rearranged,
            isotonized: s.isotonized,
        }
    }
}

pub fn cmd_pipeline(config_path: &Path, out_dir_override: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(config_path)?;
    let config: RunConfig =
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    // the config must survive its own serialization unchanged
    let round: RunConfig = serde_json::from_str(
        &serde_json::to_string(&config).map_err(|e| Error::Parse(e.to_string()))?,
    )
    .map_err(|e| Error::Parse(e.to_string()))?;
    if round != config {
        return Err(Error::Parse("config does not round-trip through JSON".into()));
    }
    config.dgp.validate()?;
    let out_dir = out_dir_override.unwrap_or(&config.output_dir);
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = ManifestBuilder::new(out_dir, Some(config.seed));

    let sample = gen_sample(&config.dgp, config.n, config.seed)?;
    let path = out_dir.join("sample.csv");
    write_sample(&sample, &path)?;
    manifest.record(path);

    // structural quantile curves, raw and monotonized both ways
    let taus = make_grid(config.net_size)?;
    let (q1, q0) = ivqr_quantile_curves(&sample, &taus)?;
    let mut scores = serde_json::Map::new();
    for (cell, curve, x) in [("treated", &q1, 1.0), ("control", &q0, 0.0)] {
        let star = rearrange(curve);
        let iso = isotonize(curve);
        let path = out_dir.join(format!("quantile_{cell}.csv"));
        write_columns(
            &path,
            "tau,raw,rearranged,isotonized",
            &[&taus, curve.values(), star.values(), iso.values()],
        )?;
        manifest.record(path);
        let truth = curve.with_values(
            taus.iter()
                .map(|&u| rearrange::estimators::true_structural_quantile(&config.dgp, u, x))
                .collect::<Result<Vec<f64>>>()?,
        )?;
        let record: ScoreRecord = score_errors(curve, &truth)?.into();
        scores.insert(
            format!("quantile_{cell}"),
            serde_json::to_value(record).map_err(|e| Error::Parse(e.to_string()))?,
        );
    }

    // structural distribution curves from the Wald-type estimator
    let y_grid = abadie_level_grid(&sample, config.net_size)?;
    let (f1, f0) = abadie_structural_cdf(&sample, &y_grid)?;
    let map = DomainMap::new(y_grid[0], y_grid[y_grid.len() - 1])?;
    for (cell, raw) in [("treated", &f1), ("control", &f0)] {
        let unit = domain_transform(raw, &map)?;
        let star = rearrange(&unit);
        let path = out_dir.join(format!("cdf_{cell}.csv"));
        write_columns(&path, "y,raw,rearranged", &[&y_grid, unit.values(), star.values()])?;
        manifest.record(path);
    }

    // uniform band for the control-cell quantile curve, plus the test
    let ens = band_ensemble(&sample, config.net_size, config.b, config.seed, false)?;
    let band = uniform_band(&ens, config.level)?;
    let path = out_dir.join("band.csv");
    write_band(&path, &band)?;
    manifest.record(path);
    let monotone = monotone_intersect(&band)?;
    let path = out_dir.join("band_monotone.csv");
    write_band(&path, &monotone)?;
    manifest.record(path);

    let t = monotonicity_test(&ens, config.level)?;
    scores.insert(
        "test_monotone".into(),
        serde_json::to_value(TestReport {
            reject: t.reject,
            max_violation: t.max_violation,
            at_u: t.at_u,
            level: t.level,
        })
        .map_err(|e| Error::Parse(e.to_string()))?,
    );

    let path = out_dir.join("scores.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&serde_json::Value::Object(scores))
            .map_err(|e| Error::Parse(e.to_string()))?,
    )?;
    manifest.record(path);

    if config.mc_reps > 0 {
        let cfg = MonteCarloConfig {
            n: config.n,
            reps: config.mc_reps,
            seed: config.seed,
            net: config.net_size,
        };
        let table = ratio_table(&config.dgp, &cfg)?;
        let path = out_dir.join("ratio_table.csv");
        std::fs::write(&path, table.to_csv())?;
        manifest.record(path);
    }

    manifest.write()?;
    Ok(())
}
