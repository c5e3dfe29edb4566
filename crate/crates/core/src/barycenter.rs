//! The generalized barycenter `beta(u) = beta0(u) / beta1(u)`.
//!
//! `u_hat(x)` is the `|u|^p` mass of the unit disc around `x`, `Omega` the
//! strict half-maximum superlevel set of `u_hat`, and
//! `beta0 = int_Omega x (u_hat - peak/2)`, `beta1 = int_Omega (u_hat - peak/2)`.

use crate::convolution::{PaddedConvolver, Spectrum};
use crate::error::{Error, Result};
use crate::field::{Field, Grid};

/// Largest spacing for which the unit disc still spans two cells.
pub const MAX_SPACING: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct BarycenterWork {
    pub uhat: Field,
    pub peak: f64,
    pub omega_mask: Vec<bool>,
    pub beta0: [f64; 2],
    pub beta1: f64,
}

impl BarycenterWork {
    pub fn beta(&self) -> [f64; 2] {
        [self.beta0[0] / self.beta1, self.beta0[1] / self.beta1]
    }
}

/// Barycenter evaluator with the disc spectrum cached for one grid.
pub struct BarycenterMap {
    grid: Grid,
    conv: PaddedConvolver,
    disc: Spectrum,
}

impl std::fmt::Debug for BarycenterMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BarycenterMap").field("grid", &self.grid).finish()
    }
}

impl BarycenterMap {
    pub fn new(grid: Grid) -> Result<Self> {
        let h = grid.spacing();
        if h > MAX_SPACING {
            return Err(Error::GridTooCoarse { spacing: h });
        }
        let conv = PaddedConvolver::new(grid.n());
        let table = conv.tabulate(|di, dj| if h * (di as f64).hypot(dj as f64) < 1.0 { 1.0 } else { 0.0 });
        let disc = conv.kernel_spectrum(&table);
        Ok(Self { grid, conv, disc })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `u_hat(x) = h^2 sum_{|x - y| < 1} |u(y)|^p`.
    pub fn local_mass(&self, u: &Field, p: f64) -> Result<Field> {
        self.grid.ensure_same(u.grid())?;
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidGrid(format!("barycenter exponent {p} must be >= 1")));
        }
        let powered: Vec<f64> = if p == 2.0 {
            u.values().iter().map(|v| v * v).collect()
        } else {
            u.values().iter().map(|v| v.abs().powf(p)).collect()
        };
        let s = self.conv.input_spectrum(&powered);
        let h2 = self.grid.cell_area();
        // the disc mass of a nonnegative density is nonnegative; clear FFT noise
        let out = self.conv.apply(&s, &self.disc).into_iter().map(|v| (h2 * v).max(0.0)).collect();
        Ok(Field::from_raw(self.grid, out))
    }

    pub fn work(&self, u: &Field, p: f64) -> Result<BarycenterWork> {
        if u.l2_norm() <= 1e-14 {
            return Err(Error::ZeroField("barycenter"));
        }
        let uhat = self.local_mass(u, p)?;
        let peak = uhat.max_value();
        let half = 0.5 * peak;
        let n = self.grid.n();
        let mut omega_mask = vec![false; self.grid.len()];
        let (mut b0x, mut b0y, mut b1) = (0.0, 0.0, 0.0);
        for j in 0..n {
            let y = self.grid.coord(j);
            for i in 0..n {
                let q = self.grid.index(i, j);
                let excess = uhat.values()[q] - half;
                if excess > 0.0 {
                    omega_mask[q] = true;
                    b0x += self.grid.coord(i) * excess;
                    b0y += y * excess;
                    b1 += excess;
                }
            }
        }
        let h2 = self.grid.cell_area();
        Ok(BarycenterWork { uhat, peak, omega_mask, beta0: [h2 * b0x, h2 * b0y], beta1: h2 * b1 })
    }

    /// `beta` with exponent `p`.
    pub fn beta_p(&self, u: &Field, p: f64) -> Result<[f64; 2]> {
        Ok(self.work(u, p)?.beta())
    }

    /// `beta` with the default exponent 2.
    pub fn beta(&self, u: &Field) -> Result<[f64; 2]> {
        self.beta_p(u, 2.0)
    }
}

/// One-shot `u_hat`; builds the disc spectrum on every call.
pub fn local_mass(u: &Field, p: f64) -> Result<Field> {
    BarycenterMap::new(*u.grid())?.local_mass(u, p)
}

/// One-shot `beta(u)` with `p = 2`.
pub fn beta(u: &Field) -> Result<[f64; 2]> {
    BarycenterMap::new(*u.grid())?.beta(u)
}
