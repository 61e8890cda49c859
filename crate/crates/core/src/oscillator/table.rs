use std::f64::consts::TAU;
use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;

use crate::oscillator::{Potential, ENERGY_TOLERANCE};
use crate::{Error, Result};

/// Sampled action-angle maps `X1(phi, rho)`, `X2(phi, rho)` and `nu(rho)`.
///
/// Rows are indexed by radius, columns by the uniform phase grid
/// `phi_j = 2π j / phi_count`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTable {
    potential: Potential,
    rho_grid: Vec<f64>,
    phi_count: usize,
    x1: Vec<Vec<f64>>,
    x2: Vec<Vec<f64>>,
    nu: Vec<f64>,
    rho0: f64,
}

const HEADER_TAG: &str = "#orbit-table";

impl OrbitTable {
    pub fn build(potential: &Potential, rho_grid: &[f64], phi_count: usize) -> Result<Self> {
        if rho_grid.is_empty() {
            return Err(Error::Validation("radius grid is empty".into()));
        }
        if rho_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation("radius grid must be strictly increasing".into()));
        }
        if phi_count < 4 {
            return Err(Error::Validation("phase grid needs at least 4 points".into()));
        }
        for &rho in rho_grid {
            potential.check_level(rho)?;
        }
        let rows: Vec<(Vec<f64>, Vec<f64>, f64)> = rho_grid
            .par_iter()
            .map(|&rho| {
                let level = potential.level(rho)?;
                let (x1, x2, drift) = level.sample_orbit(phi_count)?;
                if drift > ENERGY_TOLERANCE {
                    return Err(Error::Accuracy { drift });
                }
                Ok((x1, x2, level.frequency()))
            })
            .collect::<Result<_>>()?;
        let mut x1 = Vec::with_capacity(rows.len());
        let mut x2 = Vec::with_capacity(rows.len());
        let mut nu = Vec::with_capacity(rows.len());
        for (a, b, n) in rows {
            x1.push(a);
            x2.push(b);
            nu.push(n);
        }
        Ok(Self {
            potential: potential.clone(),
            rho_grid: rho_grid.to_vec(),
            phi_count,
            x1,
            x2,
            nu,
            rho0: potential.rho0(),
        })
    }

    /// `per_decade` points per factor of ten from `rho_min` up to and
    /// including `rho_max`.
    pub fn geometric_grid(rho_min: f64, rho_max: f64, per_decade: usize) -> Vec<f64> {
        assert!(rho_min > 0.0 && rho_max >= rho_min && per_decade > 0);
        let ratio = 10f64.powf(1.0 / per_decade as f64);
        let n = ((rho_max / rho_min).log10() * per_decade as f64).ceil() as usize;
        (0..=n).map(|i| rho_min * ratio.powi(i as i32)).collect()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn rho_grid(&self) -> &[f64] {
        &self.rho_grid
    }

    pub fn phi_count(&self) -> usize {
        self.phi_count
    }

    pub fn phi(&self, j: usize) -> f64 {
        TAU * j as f64 / self.phi_count as f64
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn x1(&self, i: usize, j: usize) -> f64 {
        self.x1[i][j]
    }

    pub fn x2(&self, i: usize, j: usize) -> f64 {
        self.x2[i][j]
    }

    /// Largest relative violation of `H(X1, X2) = rho^(2h+2)` over the table.
    pub fn max_energy_error(&self) -> f64 {
        let p = self.potential.level_power();
        let mut worst: f64 = 0.0;
        for (i, &rho) in self.rho_grid.iter().enumerate() {
            let e = rho.powi(p);
            for j in 0..self.phi_count {
                let h = self.potential.energy(self.x1[i][j], self.x2[i][j]);
                worst = worst.max((h - e).abs() / e);
            }
        }
        worst
    }

    /// Bilinear interpolation in `(phi, log rho)` of the scaled maps
    /// `X1/rho` and `X2/rho^(h+1)`.
    pub fn sample(&self, phi: f64, rho: f64) -> Result<[f64; 2]> {
        let (i, w) = self.locate(rho)?;
        let u = phi.rem_euclid(TAU) / TAU * self.phi_count as f64;
        let j0 = (u.floor() as usize) % self.phi_count;
        let j1 = (j0 + 1) % self.phi_count;
        let v = u - u.floor();
        let hp = self.potential.h() as i32 + 1;
        let row = |k: usize| {
            let r = self.rho_grid[k];
            let a = ((1.0 - v) * self.x1[k][j0] + v * self.x1[k][j1]) / r;
            let b = ((1.0 - v) * self.x2[k][j0] + v * self.x2[k][j1]) / r.powi(hp);
            (a, b)
        };
        let (a0, b0) = row(i);
        let (a1, b1) = if w > 0.0 { row(i + 1) } else { (a0, b0) };
        let a = (1.0 - w) * a0 + w * a1;
        let b = (1.0 - w) * b0 + w * b1;
        Ok([a * rho, b * rho.powi(hp)])
    }

    /// Interpolated frequency (linear in `log nu` against `log rho`).
    pub fn frequency(&self, rho: f64) -> Result<f64> {
        let (i, w) = self.locate(rho)?;
        if w == 0.0 {
            return Ok(self.nu[i]);
        }
        Ok((self.nu[i].ln() * (1.0 - w) + self.nu[i + 1].ln() * w).exp())
    }

    /// Adjacent grid radii whose frequencies straddle `target`.
    pub fn frequency_bracket(&self, target: f64) -> Option<(f64, f64)> {
        self.nu
            .windows(2)
            .position(|w| (w[0] - target) * (w[1] - target) <= 0.0)
            .map(|i| (self.rho_grid[i], self.rho_grid[i + 1]))
    }

    pub fn invert(&self, x1: f64, x2: f64) -> Result<(f64, f64)> {
        self.potential.invert(x1, x2)
    }

    fn locate(&self, rho: f64) -> Result<(usize, f64)> {
        let g = &self.rho_grid;
        let last = g.len() - 1;
        if rho < g[0] || rho > g[last] {
            return Err(Error::Validation(format!(
                "rho = {rho} outside the table range [{}, {}]",
                g[0], g[last]
            )));
        }
        if last == 0 || rho == g[last] {
            return Ok((last, 0.0));
        }
        let i = g.partition_point(|&r| r <= rho) - 1;
        let w = (rho / g[i]).ln() / (g[i + 1] / g[i]).ln();
        Ok((i, w))
    }

    /// Writes the portable text form: one header line, then CSV rows
    /// `rho,phi,X1,X2,nu`.
    pub fn write_text<W: Write>(&self, out: W) -> Result<()> {
        let mut out = std::io::BufWriter::new(out);
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";");
        writeln!(
            out,
            "{HEADER_TAG} h={} u={} rho0={:e} phi_count={} rho_grid={}",
            self.potential.h(),
            join(self.potential.coefficients()),
            self.rho0,
            self.phi_count,
            join(&self.rho_grid)
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rho", "phi", "X1", "X2", "nu"])?;
        for (i, &rho) in self.rho_grid.iter().enumerate() {
            for j in 0..self.phi_count {
                w.write_record(&[
                    format!("{rho:e}"),
                    format!("{:e}", self.phi(j)),
                    format!("{:e}", self.x1[i][j]),
                    format!("{:e}", self.x2[i][j]),
                    format!("{:e}", self.nu[i]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: Read>(input: R) -> Result<Self> {
        let mut input = BufReader::new(input);
        let mut header = String::new();
        input.read_line(&mut header)?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some(HEADER_TAG) {
            return Err(Error::TableFormat("missing header line".into()));
        }
        let (mut h, mut u, mut rho0, mut phi_count, mut grid) = (None, None, None, None, None);
        let parse_list = |s: &str| -> Result<Vec<f64>> {
            s.split(';')
                .map(|v| v.parse::<f64>().map_err(|e| Error::TableFormat(format!("bad number {v:?}: {e}"))))
                .collect()
        };
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::TableFormat(format!("bad header field {field:?}")))?;
            let bad = |e: &dyn std::fmt::Display| Error::TableFormat(format!("{key}: {e}"));
            match key {
                "h" => h = Some(value.parse::<u32>().map_err(|e| bad(&e))?),
                "u" => u = Some(parse_list(value)?),
                "rho0" => rho0 = Some(value.parse::<f64>().map_err(|e| bad(&e))?),
                "phi_count" => phi_count = Some(value.parse::<usize>().map_err(|e| bad(&e))?),
                "rho_grid" => grid = Some(parse_list(value)?),
                _ => return Err(Error::TableFormat(format!("unknown header field {key:?}"))),
            }
        }
        let missing = |k: &str| Error::TableFormat(format!("header lacks {k}"));
        let h = h.ok_or_else(|| missing("h"))?;
        let u = u.ok_or_else(|| missing("u"))?;
        let rho0 = rho0.ok_or_else(|| missing("rho0"))?;
        let phi_count = phi_count.ok_or_else(|| missing("phi_count"))?;
        let rho_grid = grid.ok_or_else(|| missing("rho_grid"))?;
        let mut potential = Potential::new(h, u)?;
        if (potential.rho0() - rho0).abs() > 1e-12 * rho0.max(1.0) {
            potential = potential.with_rho0(rho0)?;
        }

        let n = rho_grid.len();
        let mut x1 = vec![vec![0.0; phi_count]; n];
        let mut x2 = vec![vec![0.0; phi_count]; n];
        let mut nu = vec![0.0; n];
        let mut reader = csv::Reader::from_reader(input);
        let mut count = 0usize;
        for record in reader.records() {
            let record = record?;
            if record.len() != 5 {
                return Err(Error::TableFormat(format!("row {count} has {} columns", record.len())));
            }
            let vals: Vec<f64> = record
                .iter()
                .map(|v| v.parse::<f64>().map_err(|e| Error::TableFormat(format!("row {count}: {e}"))))
                .collect::<Result<_>>()?;
            let (i, j) = (count / phi_count, count % phi_count);
            if i >= n {
                return Err(Error::TableFormat("more rows than the header grid".into()));
            }
            if vals[0] != rho_grid[i] {
                return Err(Error::TableFormat(format!("row {count}: rho {} does not match grid", vals[0])));
            }
            x1[i][j] = vals[2];
            x2[i][j] = vals[3];
            nu[i] = vals[4];
            count += 1;
        }
        if count != n * phi_count {
            return Err(Error::TableFormat(format!("expected {} rows, found {count}", n * phi_count)));
        }
        Ok(Self { potential, rho_grid, phi_count, x1, x2, nu, rho0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn frequency_approaches_leading_power_law() {
        // nu(rho) = nu0 rho^h (1 + O(rho^-2)) for the Duffing potential.
        let u = Potential::duffing();
        let grid = OrbitTable::geometric_grid(5.0, 50.0, 30);
        let table = OrbitTable::build(&u, &grid, 64).unwrap();
        let nu0 = 1.198140234735592;
        let dev: Vec<f64> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&r| (table.frequency(r).unwrap() / (nu0 * r) - 1.0).abs())
            .collect();
        for w in dev.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.5 && ratio < 4.5, "{dev:?}");
        }
        assert!(dev[2] < 1e-3);
    }

    #[test]
    fn harmonic_table_matches_closed_form() {
        let u = Potential::harmonic();
        let grid = OrbitTable::geometric_grid(0.5, 5.0, 8);
        let t = OrbitTable::build(&u, &grid, 64).unwrap();
        for (i, &rho) in grid.iter().enumerate() {
            assert!((t.nu()[i] - 1.0).abs() < 1e-12);
            for j in 0..64 {
                let phi = t.phi(j);
                assert!((t.x1(i, j) - SQRT_2 * rho * phi.cos()).abs() < 1e-8 * rho);
                assert!((t.x2(i, j) + SQRT_2 * rho * phi.sin()).abs() < 1e-8 * rho);
            }
        }
    }

    #[test]
    fn duffing_table_invariants() {
        let u = Potential::duffing();
        let grid = [2.0, 5.0];
        let t = OrbitTable::build(&u, &grid, 512).unwrap();
        assert!((t.x1(0, 0) - (1.0 + 65f64.sqrt()).sqrt()).abs() < 1e-13);
        assert_eq!(t.x2(0, 0), 0.0);
        assert!(t.max_energy_error() < 1e-8);
    }

    #[test]
    fn interpolation_is_close() {
        let u = Potential::duffing();
        let grid = OrbitTable::geometric_grid(2.0, 4.0, 64);
        let t = OrbitTable::build(&u, &grid, 512).unwrap();
        let [a, b] = t.sample(1.3, 2.5).unwrap();
        let [x1, x2] = u.orbit_point(1.3, 2.5).unwrap();
        assert!((a - x1).abs() < 1e-3 * 2.5 && (b - x2).abs() < 1e-3 * 6.25);
        let nu = t.frequency(2.5).unwrap();
        assert!((nu - u.frequency(2.5).unwrap()).abs() < 1e-4);
        assert!(t.sample(0.0, 10.0).is_err());
    }

    #[test]
    fn text_round_trip() {
        let u = Potential::duffing();
        let t = OrbitTable::build(&u, &[1.0, 1.5, 2.0], 16).unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let back = OrbitTable::read_text(buf.as_slice()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn malformed_text_rejected() {
        assert!(OrbitTable::read_text("rho,phi\n".as_bytes()).is_err());
        let u = Potential::duffing();
        let t = OrbitTable::build(&u, &[1.0, 2.0], 8).unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(6).map(|l| format!("{l}\n")).collect();
        assert!(matches!(OrbitTable::read_text(truncated.as_bytes()), Err(Error::TableFormat(_))));
    }

    #[test]
    fn grid_rejections() {
        let u = Potential::duffing();
        assert!(OrbitTable::build(&u, &[2.0, 1.0], 16).is_err());
        assert!(matches!(OrbitTable::build(&u, &[0.1], 16), Err(Error::BelowSeparatrix { .. })));
    }
}
