//! Sample CSV round trip and small argument parsers shared by subcommands.

use std::io::Write;
use std::path::Path;

use rearrange::estimators::Sample;
use rearrange::{Error, Result};

pub fn write_sample(sample: &Sample, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "y,x,z")?;
    for i in 0..sample.len() {
        writeln!(
            out,
            "{:.17},{},{}",
            sample.y[i], sample.x[i] as u8, sample.z[i] as u8
        )?;
    }
    Ok(())
}

pub fn read_sample(path: &Path) -> Result<Sample> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "y,x,z" => {}
        _ => return Err(Error::Parse("sample file must start with 'y,x,z'".into())),
    }
    let mut y = Vec::new();
    let mut x = Vec::new();
    let mut z = Vec::new();
    for (ln, line) in lines.enumerate() {
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected 3 fields", ln + 2)));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}: bad number '{s}'", ln + 2)))
        };
        y.push(parse(fields[0])?);
        x.push(parse(fields[1])?);
        z.push(parse(fields[2])?);
    }
    Sample::new(y, x, z)
}

/// Parse a tau range of the form `start:end:step`, endpoints inclusive.
pub fn parse_taus(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!(
            "tau spec '{spec}' must be start:end:step"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{p}' in tau spec")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (start, end, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0 && start <= end) {
        return Err(Error::Parse("tau spec needs start <= end and step > 0".into()));
    }
    let mut taus = Vec::new();
    let mut i = 0usize;
    loop {
        let t = start + i as f64 * step;
        if t > end + step * 1e-9 {
            break;
        }
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Parse(format!("tau {t} outside (0,1)")));
        }
        taus.push(t);
        i += 1;
    }
    if taus.is_empty() {
        return Err(Error::Parse("tau spec produced no levels".into()));
    }
    Ok(taus)
}

/// Parse a smoothing spec of the form `delta=0.05`.
pub fn parse_smooth(spec: &str) -> Result<f64> {
    match spec.split_once('=') {
        Some(("delta", v)) => v
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad bandwidth '{v}'"))),
        _ => Err(Error::Parse(format!(
            "smoothing spec '{spec}' must be delta=VALUE"
        ))),
    }
}

/// Write aligned columns as CSV with full float precision.
pub fn write_columns(path: &Path, header: &str, cols: &[&[f64]]) -> Result<()> {
    let rows = cols.first().map_or(0, |c| c.len());
    if cols.iter().any(|c| c.len() != rows) {
        return Err(Error::InvalidArgument("ragged columns".into()));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{header}")?;
    for r in 0..rows {
        let line: Vec<String> = cols.iter().map(|c| format!("{:.17}", c[r])).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
