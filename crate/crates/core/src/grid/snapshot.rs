//! SHSF1 field snapshot format.
//!
//! Text header `SHSF1 d N L Nz Xmax ncomp layout` followed by one `re im`
//! row per `(component, xi' lexicographic, node)` sample, node fastest.
//! Tangential modes are ordered lexicographically by signed integer
//! frequency per axis; only the uniform vertical rule is serialised.

use super::field::{Layout, SpectralField};
use super::{TangentialGrid, VerticalGrid};
use crate::error::{Result, ShsError};
use crate::C64;
use std::io::{BufRead, Write};
use std::sync::Arc;

/// Lexicographic (signed frequency) enumeration of flat mode indices.
fn lex_modes(grid: &TangentialGrid) -> Vec<usize> {
    let n = grid.n() as i64;
    let signed: Vec<i64> = (-(n / 2)..n / 2).collect();
    let to_fft = |m: i64| -> usize { if m >= 0 { m as usize } else { (m + n) as usize } };
    match grid.dim_tangential() {
        1 => signed.iter().map(|&m| to_fft(m)).collect(),
        _ => {
            let n = n as usize;
            let mut out = Vec::with_capacity(n * n);
            for &m0 in &signed {
                for &m1 in &signed {
                    out.push(to_fft(m0) * n + to_fft(m1));
                }
            }
            out
        }
    }
}

pub fn write_snapshot(field: &SpectralField, w: &mut dyn Write) -> Result<()> {
    let g = &field.grid;
    writeln!(
        w,
        "SHSF1 {} {} {:.17e} {} {:.17e} {} {}",
        g.dim(),
        g.n(),
        g.period(),
        field.nz(),
        field.vgrid.x_max(),
        field.ncomp(),
        field.layout().name()
    )?;
    for c in 0..field.ncomp() {
        for &p in &lex_modes(g) {
            for iz in 0..field.nz() {
                let v = field.at(c, p, iz);
                writeln!(w, "{:.17e} {:.17e}", v.re, v.im)?;
            }
        }
    }
    Ok(())
}

pub fn read_snapshot(r: &mut dyn BufRead) -> Result<SpectralField> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 8 || parts[0] != "SHSF1" {
        return Err(ShsError::InvalidParam("bad SHSF1 header".into()));
    }
    let d: usize = parse(parts[1], "d")?;
    let n: usize = parse(parts[2], "N")?;
    let l: f64 = parse(parts[3], "L")?;
    let nz: usize = parse(parts[4], "Nz")?;
    let xmax: f64 = parse(parts[5], "Xmax")?;
    let ncomp: usize = parse(parts[6], "ncomp")?;
    let layout = match parts[7] {
        "physical" => Layout::PhysicalTangential,
        "spectral" => Layout::SpectralTangential,
        other => return Err(ShsError::InvalidParam(format!("bad layout {other}"))),
    };
    let grid = Arc::new(TangentialGrid::new(d - 1, n, l)?);
    let vgrid = Arc::new(VerticalGrid::uniform(nz, xmax)?);
    let mut field = SpectralField::zeros(grid.clone(), vgrid, ncomp, layout);
    let order = lex_modes(&grid);
    let mut line = String::new();
    for c in 0..ncomp {
        for &p in &order {
            for iz in 0..nz {
                line.clear();
                if r.read_line(&mut line)? == 0 {
                    return Err(ShsError::InvalidParam("truncated snapshot".into()));
                }
                let mut it = line.split_whitespace();
                let re: f64 = parse(it.next().unwrap_or(""), "re")?;
                let im: f64 = parse(it.next().unwrap_or(""), "im")?;
                *field.at_mut(c, p, iz) = C64::new(re, im);
            }
        }
    }
    Ok(field)
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| ShsError::InvalidParam(format!("cannot parse {what}: {s:?}")))
}

pub fn save(field: &SpectralField, path: &std::path::Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_snapshot(field, &mut f)
}

pub fn load(path: &std::path::Path) -> Result<SpectralField> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_snapshot(&mut f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn snapshot_round_trip_is_lossless() {
        let g = Arc::new(TangentialGrid::new(1, 8, 2.0 * std::f64::consts::PI).unwrap());
        let v = Arc::new(VerticalGrid::uniform(6, 3.0).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut field = SpectralField::zeros(g, v, 2, Layout::SpectralTangential);
        for val in field.values_mut() {
            *val = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        let mut buf = Vec::new();
        write_snapshot(&field, &mut buf).unwrap();
        let back = read_snapshot(&mut std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(field.values(), back.values());
        assert_eq!(back.layout(), Layout::SpectralTangential);
    }
}
