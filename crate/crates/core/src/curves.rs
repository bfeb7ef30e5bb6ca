//! Core curve representations: grid curves on [0,1], step CDFs, domain
//! transforms, and Lp distances. Every other module works in terms of these.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const EQUIDISTANT_RTOL: f64 = 1e-12;

/// A function u -> Q(u) sampled on an equidistant net of probability
/// indices in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct GridCurve {
    u_grid: Vec<f64>,
    values: Vec<f64>,
}

impl GridCurve {
    pub fn new(u_grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if u_grid.len() < 2 {
            return Err(Error::InvalidArgument(
                "grid must have at least 2 points".into(),
            ));
        }
        if u_grid.len() != values.len() {
            return Err(Error::InvalidArgument(
                "grid and values must have equal length".into(),
            ));
        }
        if u_grid.iter().any(|u| !u.is_finite() || *u < 0.0 || *u > 1.0) {
            return Err(Error::InvalidArgument(
                "grid indices must lie in [0,1]".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("values must be finite".into()));
        }
        let step = u_grid[1] - u_grid[0];
        if step <= 0.0 {
            return Err(Error::InvalidArgument(
                "grid must be strictly increasing".into(),
            ));
        }
        for w in u_grid.windows(2) {
            let d = w[1] - w[0];
            if d <= 0.0 || (d - step).abs() > EQUIDISTANT_RTOL * step.max(1.0) {
                return Err(Error::InvalidArgument(
                    "grid must be equidistant and strictly increasing".into(),
                ));
            }
        }
        Ok(GridCurve { u_grid, values })
    }

    /// Equidistant interior net {1/(k+1), ..., k/(k+1)} with constant values.
    pub fn on_interior_net(k: usize, values: Vec<f64>) -> Result<Self> {
        let grid = make_grid(k)?;
        GridCurve::new(grid, values)
    }

    /// Sample a function on the interior net of size k.
    pub fn from_fn(k: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = make_grid(k)?;
        let values = grid.iter().map(|&u| f(u)).collect();
        GridCurve::new(grid, values)
    }

    pub fn u_grid(&self) -> &[f64] {
        &self.u_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.u_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integration cell width, 1/(k+1) on the interior net.
    pub fn cell_width(&self) -> f64 {
        self.u_grid[1] - self.u_grid[0]
    }

    pub fn same_grid(&self, other: &GridCurve) -> bool {
        self.u_grid.len() == other.u_grid.len()
            && self
                .u_grid
                .iter()
                .zip(&other.u_grid)
                .all(|(a, b)| (a - b).abs() <= EQUIDISTANT_RTOL)
    }

    /// Replace the values, keeping the grid.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        GridCurve::new(self.u_grid.clone(), values)
    }

    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Piecewise-linear interpolation at u, constant beyond the net endpoints.
    pub fn interp(&self, u: f64) -> f64 {
        let g = &self.u_grid;
        let v = &self.values;
        if u <= g[0] {
            return v[0];
        }
        if u >= g[g.len() - 1] {
            return v[v.len() - 1];
        }
        let i = match g.partition_point(|&x| x <= u) {
            0 => 1,
            i => i,
        };
        let (u0, u1) = (g[i - 1], g[i]);
        let t = (u - u0) / (u1 - u0);
        v[i - 1] + t * (v[i] - v[i - 1])
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }

    /// Two-column CSV with a `u,value` header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["u", "value"])?;
        for (u, v) in self.u_grid.iter().zip(&self.values) {
            wtr.write_record([format!("{u:.17}"), format!("{v:.17}")])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Parse("expected two columns (u,value)".into()));
            }
            grid.push(parse_f64(&record[0])?);
            values.push(parse_f64(&record[1])?);
        }
        GridCurve::new(grid, values)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// A right-continuous nondecreasing step function y -> F(y).
#[derive(Debug, Clone, PartialEq)]
pub struct StepCdf {
    y_grid: Vec<f64>,
    probs: Vec<f64>,
}

impl StepCdf {
    pub fn new(y_grid: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if y_grid.is_empty() || y_grid.len() != probs.len() {
            return Err(Error::InvalidArgument(
                "y grid and probs must be nonempty and of equal length".into(),
            ));
        }
        if y_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "y grid must be strictly increasing".into(),
            ));
        }
        if probs.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("probs must be nondecreasing".into()));
        }
        if probs[0] < 0.0 || (probs[probs.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "probs must start at >= 0 and end at 1".into(),
            ));
        }
        Ok(StepCdf { y_grid, probs })
    }

    pub fn y_grid(&self) -> &[f64] {
        &self.y_grid
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// F(y) under the right-continuous step convention.
    pub fn eval(&self, y: f64) -> f64 {
        let i = self.y_grid.partition_point(|&g| g <= y);
        if i == 0 {
            0.0
        } else {
            self.probs[i - 1]
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["y", "prob"])?;
        for (y, p) in self.y_grid.iter().zip(&self.probs) {
            wtr.write_record([format!("{y:.17}"), format!("{p:.17}")])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut y = Vec::new();
        let mut p = Vec::new();
        for record in rdr.records() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Parse("expected two columns (y,prob)".into()));
            }
            y.push(parse_f64(&record[0])?);
            p.push(parse_f64(&record[1])?);
        }
        StepCdf::new(y, p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// A curve sampled on an equidistant grid over an arbitrary interval [a,b].
/// Bridges non-unit domains (e.g. CDF estimates over earnings levels) to
/// [`GridCurve`] via [`DomainMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub positions: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledCurve {
    pub fn new(positions: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if positions.len() < 2 || positions.len() != values.len() {
            return Err(Error::InvalidArgument(
                "positions and values must have equal length >= 2".into(),
            ));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "positions must be strictly increasing".into(),
            ));
        }
        Ok(SampledCurve { positions, values })
    }
}

/// Increasing affine bijection between [a,b] and [0,1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainMap {
    a: f64,
    b: f64,
}

impl DomainMap {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(Error::InvalidArgument(
                "domain endpoints must be finite with a < b".into(),
            ));
        }
        Ok(DomainMap { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// [a,b] -> [0,1]
    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.a) / (self.b - self.a)
    }

    /// [0,1] -> [a,b]
    pub fn from_unit(&self, u: f64) -> f64 {
        self.a + u * (self.b - self.a)
    }
}

/// Lp norm index over the probability domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    One,
    Two,
    Sup,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::One, Norm::Two, Norm::Sup];

    pub fn label(&self) -> &'static str {
        match self {
            Norm::One => "L1",
            Norm::Two => "L2",
            Norm::Sup => "Linf",
        }
    }
}

/// Equidistant interior net {1/(k+1), ..., k/(k+1)}, avoiding the endpoints
/// 0 and 1 where tail quantile estimates are unstable.
pub fn make_grid(k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidArgument("net size k must be >= 2".into()));
    }
    let denom = (k + 1) as f64;
    Ok((1..=k).map(|j| j as f64 / denom).collect())
}

/// Riemann-sum Lp distance between two curves on a shared grid, left rule
/// with cell width 1/(k+1). `Norm::Sup` is the max absolute gap.
pub fn lp_distance(f: &GridCurve, g: &GridCurve, p: Norm) -> Result<f64> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch);
    }
    let w = f.cell_width();
    let gaps = f.values().iter().zip(g.values()).map(|(a, b)| (a - b).abs());
    Ok(match p {
        Norm::One => gaps.sum::<f64>() * w,
        Norm::Two => (gaps.map(|d| d * d).sum::<f64>() * w).sqrt(),
        Norm::Sup => gaps.fold(0.0, f64::max),
    })
}

/// Transform a curve on [a,b] to a [`GridCurve`] on [0,1].
pub fn domain_transform(curve: &SampledCurve, map: &DomainMap) -> Result<GridCurve> {
    let grid = curve.positions.iter().map(|&x| map.to_unit(x)).collect();
    GridCurve::new(grid, curve.values.clone())
}

/// Inverse of [`domain_transform`]: back to the original domain [a,b].
pub fn domain_transform_inverse(curve: &GridCurve, map: &DomainMap) -> Result<SampledCurve> {
    let positions = curve.u_grid().iter().map(|&u| map.from_unit(u)).collect();
    SampledCurve::new(positions, curve.values().to_vec())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
}
