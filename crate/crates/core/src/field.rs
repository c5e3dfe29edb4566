//! Sampled functions on the truncated plane `[-L, L)^2`.
//!
//! A [`Field`] stores `n x n` samples at the grid points
//! `x_ij = (-L + i h, -L + j h)`, `h = 2L/n`, in row-major order by the
//! second coordinate (`values[j * n + i]`). Outside the box every field is
//! zero; all discrete operators use that extension.
//!
//! The discrete gradient lives on cell edges. Along each axis the edge
//! difference is the fourth-order staggered stencil
//! `(u[i-1] - 27 u[i] + 27 u[i+1] - u[i+2]) / (24 h)`, evaluated on every
//! edge whose stencil touches the box. Its adjoint [`Field::neg_laplacian`]
//! is the matching 7-point operator, so `h^2 sum v (-Lap u)` equals the edge
//! sum of `Du . Dv` up to rounding.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Magic bytes of the binary field dump.
pub const DUMP_MAGIC: &[u8; 4] = b"CHQ1";

/// Autocorrelation of the staggered stencil `[1, -27, 27, -1]`, lags 0..=3.
const LAPLACE_TAPS: [f64; 4] = [1460.0, -783.0, 54.0, -1.0];
const STENCIL_NORM: f64 = 576.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width {half_width} must be positive")));
        }
        if n < 16 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n = {n} must be even and >= 16")));
        }
        Ok(Self { half_width, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of grid index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.coord(i), self.coord(j)]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Continuous (fractional) index of a coordinate.
    pub fn fractional_index(&self, x: f64) -> f64 {
        (x + self.half_width) / self.spacing()
    }

    /// Index of the grid point at the origin.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Squared norms of one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub h1_sq: f64,
    pub star_sq: f64,
    pub x_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut([f64; 2]) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..n {
            for i in 0..n {
                values.push(f(grid.point(i, j)));
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values })
    }

    /// Construction for values produced by internal arithmetic on finite inputs.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Sample with zero extension outside the box.
    pub fn get_or_zero(&self, i: isize, j: isize) -> f64 {
        let n = self.grid.n() as isize;
        if i < 0 || j < 0 || i >= n || j >= n {
            0.0
        } else {
            self.values[(j * n + i) as usize]
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, t: f64) -> Field {
        self.map(|v| t * v)
    }

    pub fn square(&self) -> Field {
        self.map(|v| v * v)
    }

    pub fn abs(&self) -> Field {
        self.map(f64::abs)
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Field::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Quadrature `h^2 sum u`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_area() * self.values.iter().sum::<f64>()
    }

    pub fn l2_inner(&self, other: &Field) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.grid.cell_area() * dot(&self.values, &other.values))
    }

    pub fn l2_sq(&self) -> f64 {
        self.grid.cell_area() * dot(&self.values, &self.values)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_sq().sqrt()
    }

    /// `(h^2 sum |u|^p)^(1/p)`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidGrid(format!("L^p exponent {p} must be finite and >= 1")));
        }
        let s: f64 = self.values.iter().map(|v| v.abs().powf(p)).sum();
        Ok((self.grid.cell_area() * s).powf(1.0 / p))
    }

    pub fn grad_inner(&self, other: &Field) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(grad_pairing(&self.grid, &self.values, &other.values))
    }

    pub fn grad_sq(&self) -> f64 {
        grad_pairing(&self.grid, &self.values, &self.values)
    }

    /// `h^2 sum log(1 + |x|) u v`.
    pub fn star_inner(&self, other: &Field) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let g = &self.grid;
        let n = g.n();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                let [x1, x2] = g.point(i, j);
                let k = g.index(i, j);
                s += x1.hypot(x2).ln_1p() * self.values[k] * other.values[k];
            }
        }
        Ok(g.cell_area() * s)
    }

    pub fn star_sq(&self) -> f64 {
        self.star_inner(self).expect("same grid")
    }

    /// `<u, v>_H = <Du, Dv> + <u, v>`.
    pub fn h_inner(&self, other: &Field) -> Result<f64> {
        Ok(self.grad_inner(other)? + self.l2_inner(other)?)
    }

    /// `<u, v>_X = <u, v>_H + <u, v>_*`.
    pub fn x_inner(&self, other: &Field) -> Result<f64> {
        Ok(self.h_inner(other)? + self.star_inner(other)?)
    }

    pub fn norms(&self) -> NormReport {
        let l2_sq = self.l2_sq();
        let grad_sq = self.grad_sq();
        let star_sq = self.star_sq();
        let h1_sq = l2_sq + grad_sq;
        NormReport { l2_sq, grad_sq, h1_sq, star_sq, x_sq: h1_sq + star_sq }
    }

    /// The adjoint of the edge gradient: `h^2 sum v (-Lap u) = <Du, Dv>`.
    pub fn neg_laplacian(&self) -> Field {
        let g = &self.grid;
        let n = g.n();
        let h = g.spacing();
        let c = 1.0 / (STENCIL_NORM * h * h);
        let u = &self.values;
        let mut out = vec![0.0; g.len()];
        laplace_axis(n, u, &mut out, 1, n);
        laplace_axis(n, u, &mut out, n, 1);
        for v in &mut out {
            *v *= c;
        }
        Field::from_raw(*g, out)
    }

    /// One-axis Fourier symbol of [`Field::neg_laplacian`] at frequency `theta`.
    pub fn neg_laplacian_symbol(grid: &Grid, theta: f64) -> f64 {
        let h = grid.spacing();
        let mut s = LAPLACE_TAPS[0];
        for (lag, &c) in LAPLACE_TAPS.iter().enumerate().skip(1) {
            s += 2.0 * c * (lag as f64 * theta).cos();
        }
        s / (STENCIL_NORM * h * h)
    }


    /// Integer-cell translation `u(. - b)` with `b = (di h, dj h)`, zero fill.
    pub fn shift(&self, di: isize, dj: isize) -> Field {
        let n = self.grid.n() as isize;
        let mut out = vec![0.0; self.grid.len()];
        for j in 0..n {
            let sj = j - dj;
            if sj < 0 || sj >= n {
                continue;
            }
            for i in 0..n {
                let si = i - di;
                if si < 0 || si >= n {
                    continue;
                }
                out[(j * n + i) as usize] = self.values[(sj * n + si) as usize];
            }
        }
        Field::from_raw(self.grid, out)
    }

    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(self.grid.n() as u32).to_le_bytes())?;
        w.write_all(&self.grid.half_width().to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Field> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::BadDump(format!("magic {magic:?} is not CHQ1")));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let half_width = f64::from_le_bytes(b8);
        let grid = Grid::new(half_width, n).map_err(|e| Error::BadDump(e.to_string()))?;
        let mut raw = vec![0u8; 8 * grid.len()];
        r.read_exact(&mut raw)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Field::from_values(grid, values)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_dump(std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Field> {
        let file = std::fs::File::open(path)?;
        Field::read_dump(std::io::BufReader::new(file))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Edge differences of one line (without the `1/(24h)` factor), for every
/// edge `i + 1/2`, `i = -2..=n`, whose stencil touches the box.
fn line_edges(line: impl Fn(isize) -> f64, n: usize, out: &mut Vec<f64>) {
    out.clear();
    for i in -2..=(n as isize) {
        out.push(line(i - 1) - 27.0 * line(i) + 27.0 * line(i + 1) - line(i + 2));
    }
}

fn grad_pairing(grid: &Grid, u: &[f64], v: &[f64]) -> f64 {
    let n = grid.n();
    let ni = n as isize;
    let read = |data: &[f64], base: usize, stride: usize, i: isize| -> f64 {
        if i < 0 || i >= ni {
            0.0
        } else {
            data[base + i as usize * stride]
        }
    };
    let same = std::ptr::eq(u, v);
    let mut du = Vec::with_capacity(n + 3);
    let mut dv = Vec::with_capacity(n + 3);
    let mut total = 0.0;
    for (base_of, stride) in [(n, 1usize), (1, n)] {
        for line in 0..n {
            let base = line * base_of;
            line_edges(|i| read(u, base, stride, i), n, &mut du);
            if same {
                total += dot(&du, &du);
            } else {
                line_edges(|i| read(v, base, stride, i), n, &mut dv);
                total += dot(&du, &dv);
            }
        }
    }
    // h^2 * (1/(24h))^2 = 1/576
    total / STENCIL_NORM
}

fn laplace_axis(n: usize, u: &[f64], out: &mut [f64], stride: usize, line_step: usize) {
    let ni = n as isize;
    for line in 0..n {
        let base = line * line_step;
        for i in 0..ni {
            let mut acc = LAPLACE_TAPS[0] * u[base + i as usize * stride];
            for (lag, &c) in LAPLACE_TAPS.iter().enumerate().skip(1) {
                let lag = lag as isize;
                if i - lag >= 0 {
                    acc += c * u[base + (i - lag) as usize * stride];
                }
                if i + lag < ni {
                    acc += c * u[base + (i + lag) as usize * stride];
                }
            }
            out[base + i as usize * stride] += acc;
        }
    }
}
