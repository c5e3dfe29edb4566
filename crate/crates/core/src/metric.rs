//! The state-dependent inner product
//! `<v, w>_u = <v, w>_H + h^2 sum log(1 + |x - beta(u)|) v w`
//! and the Riesz representative of `Phi'(u)` with respect to it.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::barycenter::BarycenterMap;
use crate::error::{Error, Result};
use crate::field::{dot, Field, Grid};
use crate::functionals::{self, Potential};
use crate::logkernel::KernelTable;

/// Barycenter moves below this do not require a new context.
pub const REBUILD_TOL: f64 = 1e-12;

/// Inverse of `-Lap + s` with the Laplacian replaced by its sine-transform
/// diagonalization, used to precondition [`MetricContext::solve`].
struct SinePreconditioner {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    symbol: Vec<f64>,
}

impl SinePreconditioner {
    fn new(grid: &Grid) -> Self {
        let n = grid.n();
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        let symbol = (1..=n)
            .map(|m| Field::neg_laplacian_symbol(grid, std::f64::consts::PI * m as f64 / (n + 1) as f64))
            .collect();
        Self { n, fft, symbol }
    }

    /// Unnormalized DST-I along every line of stride `stride`.
    fn dst_lines(&self, x: &mut [f64], stride: usize, line_step: usize, buf: &mut [Complex<f64>], scratch: &mut [Complex<f64>]) {
        let n = self.n;
        for line in 0..n {
            let base = line * line_step;
            buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
            for k in 0..n {
                let v = x[base + k * stride];
                buf[k + 1].re = v;
                buf[2 * n + 1 - k].re = -v;
            }
            self.fft.process_with_scratch(buf, scratch);
            for k in 0..n {
                x[base + k * stride] = -0.5 * buf[k + 1].im;
            }
        }
    }

    fn apply(&self, r: &[f64], shift: f64, out: &mut [f64]) {
        let n = self.n;
        out.copy_from_slice(r);
        let mut buf = vec![Complex::new(0.0, 0.0); 2 * (n + 1)];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        self.dst_lines(out, 1, n, &mut buf, &mut scratch);
        self.dst_lines(out, n, 1, &mut buf, &mut scratch);
        let norm = (2.0 / (n + 1) as f64).powi(2);
        for j in 0..n {
            for i in 0..n {
                out[j * n + i] *= norm / (self.symbol[i] + self.symbol[j] + shift);
            }
        }
        self.dst_lines(out, 1, n, &mut buf, &mut scratch);
        self.dst_lines(out, n, 1, &mut buf, &mut scratch);
    }
}

#[derive(Clone)]
pub struct MetricContext {
    center: [f64; 2],
    weight: Field,
    shift: f64,
    pre: Arc<SinePreconditioner>,
}

impl std::fmt::Debug for MetricContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricContext").field("center", &self.center).field("grid", self.weight.grid()).finish()
    }
}

impl MetricContext {
    pub fn new(grid: Grid, center: [f64; 2]) -> Self {
        Self::with_preconditioner(Arc::new(SinePreconditioner::new(&grid)), grid, center)
    }

    fn with_preconditioner(pre: Arc<SinePreconditioner>, grid: Grid, center: [f64; 2]) -> Self {
        let weight = Field::from_fn(grid, |[x, y]| (x - center[0]).hypot(y - center[1]).ln_1p());
        let shift = 1.0 + weight.values().iter().sum::<f64>() / grid.len() as f64;
        Self { center, weight, shift, pre }
    }

    /// The same grid recentered at `center`, sharing the transform plan.
    pub fn recentered(&self, center: [f64; 2]) -> Self {
        Self::with_preconditioner(Arc::clone(&self.pre), *self.grid(), center)
    }

    /// Context centered at `beta(u)`.
    pub fn for_state(u: &Field, bary: &BarycenterMap) -> Result<Self> {
        Ok(Self::new(*u.grid(), bary.beta(u)?))
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn weight(&self) -> &Field {
        &self.weight
    }

    pub fn grid(&self) -> &Grid {
        self.weight.grid()
    }

    pub fn needs_rebuild(&self, beta: [f64; 2]) -> bool {
        (beta[0] - self.center[0]).hypot(beta[1] - self.center[1]) > REBUILD_TOL
    }

    pub fn inner(&self, v: &Field, w: &Field) -> Result<f64> {
        let g = self.grid();
        g.ensure_same(v.grid())?;
        g.ensure_same(w.grid())?;
        let mut s = 0.0;
        for ((&a, &b), &k) in v.values().iter().zip(w.values()).zip(self.weight.values()) {
            s += (1.0 + k) * a * b;
        }
        Ok(v.grad_inner(w)? + g.cell_area() * s)
    }

    pub fn norm(&self, v: &Field) -> Result<f64> {
        Ok(self.inner(v, v)?.max(0.0).sqrt())
    }

    /// `A_u v = -Lap v + (1 + weight) v`, so that `h^2 sum (A_u v) w = <v, w>_u`.
    pub fn apply(&self, v: &Field) -> Result<Field> {
        self.grid().ensure_same(v.grid())?;
        let mut out = v.neg_laplacian().into_values();
        for ((o, &x), &k) in out.iter_mut().zip(v.values()).zip(self.weight.values()) {
            *o += (1.0 + k) * x;
        }
        Ok(Field::from_raw(*v.grid(), out))
    }

    /// Solves `A_u x = rhs` by preconditioned conjugate gradients to
    /// relative residual `tol`; at most `10 n` iterations.
    pub fn solve(&self, rhs: &Field, tol: f64, warm: Option<&Field>) -> Result<(Field, usize)> {
        let g = *self.grid();
        g.ensure_same(rhs.grid())?;
        let b = rhs.values();
        let bnorm = dot(b, b).sqrt();
        if bnorm == 0.0 {
            return Ok((Field::zeros(g), 0));
        }
        let cap = 10 * g.n();
        let mut x = match warm {
            Some(w) => {
                g.ensure_same(w.grid())?;
                w.values().to_vec()
            }
            None => vec![0.0; g.len()],
        };
        let mut r: Vec<f64> = if warm.is_some() {
            let ax = self.apply(&Field::from_raw(g, x.clone()))?;
            b.iter().zip(ax.values()).map(|(bi, ai)| bi - ai).collect()
        } else {
            b.to_vec()
        };
        let mut z = vec![0.0; r.len()];
        self.pre.apply(&r, self.shift, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut rel = dot(&r, &r).sqrt() / bnorm;
        for it in 0..cap {
            if rel <= tol {
                return Ok((Field::from_raw(g, x), it));
            }
            let ap = self.apply(&Field::from_raw(g, p.clone()))?.into_values();
            let alpha = rz / dot(&p, &ap);
            for q in 0..x.len() {
                x[q] += alpha * p[q];
                r[q] -= alpha * ap[q];
            }
            rel = dot(&r, &r).sqrt() / bnorm;
            self.pre.apply(&r, self.shift, &mut z);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for q in 0..p.len() {
                p[q] = z[q] + beta * p[q];
            }
        }
        if rel <= tol {
            return Ok((Field::from_raw(g, x), cap));
        }
        Err(Error::RieszNotConverged { residual: rel, iterations: cap })
    }

    /// Riesz representative of the functional `v -> h^2 sum r v` and its `u`-norm.
    pub fn riesz(&self, r: &Field, tol: f64, warm: Option<&Field>) -> Result<(Field, f64)> {
        let (g, _) = self.solve(r, tol, warm)?;
        let norm = self.norm(&g)?;
        Ok((g, norm))
    }

    /// Uniform equivalence constant squared, `1 + log(1 + |center|)`, of
    /// `||.||_u` against `||.||_X`.
    pub fn equivalence_bound_sq(&self) -> f64 {
        1.0 + self.center[0].hypot(self.center[1]).ln_1p()
    }
}

/// `grad_u Phi(u)` and `||grad_u Phi(u)||_u`.
pub fn riesz_gradient(
    u: &Field,
    pot: &Potential,
    table: &KernelTable,
    bary: &BarycenterMap,
    tol: f64,
) -> Result<(Field, f64)> {
    let ctx = MetricContext::for_state(u, bary)?;
    let r = functionals::residual_field(u, pot, table)?;
    ctx.riesz(&r, tol, None)
}

/// `|u|_2`, the lower bound of the geodesic functional `N`.
pub fn n_lower_bound(u: &Field) -> f64 {
    u.l2_norm()
}

/// `|<v, w>_{u1} - <v, w>_{u2}|` is at most this.
pub fn continuity_bound(c1: [f64; 2], c2: [f64; 2], v: &Field, w: &Field) -> Result<f64> {
    v.grid().ensure_same(w.grid())?;
    let s: f64 = v.values().iter().zip(w.values()).map(|(a, b)| (a * b).abs()).sum();
    Ok((c1[0] - c2[0]).hypot(c1[1] - c2[1]) * v.grid().cell_area() * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn probe(g: Grid, seed: u64) -> Field {
        let mut s = seed;
        Field::from_fn(g, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn centered_context_is_the_x_product() {
        let g = Grid::new(3.0, 24).unwrap();
        let ctx = MetricContext::new(g, [0.0, 0.0]);
        let (v, w) = (probe(g, 1), probe(g, 2));
        let a = ctx.inner(&v, &w).unwrap();
        let b = v.x_inner(&w).unwrap();
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn operator_matches_the_form() {
        let g = Grid::new(3.0, 24).unwrap();
        let ctx = MetricContext::new(g, [0.3, -0.4]);
        let (v, w) = (probe(g, 3), probe(g, 4));
        let lhs = ctx.apply(&v).unwrap().l2_inner(&w).unwrap();
        let rhs = ctx.inner(&v, &w).unwrap();
        assert!((lhs - rhs).abs() <= 1e-11 * rhs.abs().max(1.0));
    }

    #[test]
    fn solve_inverts_the_operator() {
        let g = Grid::new(3.0, 24).unwrap();
        let ctx = MetricContext::new(g, [0.5, 0.1]);
        let x = probe(g, 5);
        let b = ctx.apply(&x).unwrap();
        let (y, _) = ctx.solve(&b, 1e-12, None).unwrap();
        assert!(y.sub(&x).unwrap().max_abs() < 1e-9);
        let (z, iters) = ctx.solve(&b, 1e-12, Some(&y)).unwrap();
        assert!(iters <= 2);
        assert!(z.sub(&x).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn preconditioner_inverts_sine_modes() {
        let g = Grid::new(2.0, 16).unwrap();
        let pre = SinePreconditioner::new(&g);
        let (p, q) = (3usize, 5usize);
        let th = |m: usize| std::f64::consts::PI * m as f64 / 17.0;
        let mut x = vec![0.0; g.len()];
        for j in 0..16 {
            for i in 0..16 {
                x[j * 16 + i] = (th(p) * (i + 1) as f64).sin() * (th(q) * (j + 1) as f64).sin();
            }
        }
        let mut out = vec![0.0; x.len()];
        pre.apply(&x, 2.0, &mut out);
        let lam = Field::neg_laplacian_symbol(&g, th(p)) + Field::neg_laplacian_symbol(&g, th(q)) + 2.0;
        for (o, v) in out.iter().zip(&x) {
            assert!((o * lam - v).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_bound_is_the_l2_norm() {
        let g = Grid::new(1.0, 16).unwrap();
        assert_eq!(n_lower_bound(&Field::zeros(g)), 0.0);
        assert!((n_lower_bound(&Field::constant(g, 0.5)) - 1.0).abs() < 1e-15);
    }
}
