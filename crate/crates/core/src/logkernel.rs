//! The logarithmic convolution and the bilinear forms
//! `B0 = log r`, `B1 = log(e^tau + r)`, `B2 = log(1 + e^tau / r)`.
//!
//! Kernels are sampled at lattice offsets on the doubled grid. The smooth
//! `k1` is sampled at the origin too; the singular `k0` gets the corrected
//! origin weight [`origin_log`] and `k2 = k1 - k0` there, so the identity
//! `k1 - k2 = k0` holds on the whole lattice.

use crate::convolution::{PaddedConvolver, Spectrum};
use crate::error::{Error, Result};
use crate::field::{Field, Grid};

/// Selects one of the three kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    B0,
    B1,
    B2,
}

impl Kernel {
    pub const ALL: [Kernel; 3] = [Kernel::B0, Kernel::B1, Kernel::B2];

    /// Pointwise kernel at distance `r > 0`.
    pub fn eval(self, r: f64, tau: f64) -> f64 {
        match self {
            Kernel::B0 => r.ln(),
            Kernel::B1 => (tau.exp() + r).ln(),
            Kernel::B2 => (tau.exp() / r).ln_1p(),
        }
    }

    fn idx(self) -> usize {
        match self {
            Kernel::B0 => 0,
            Kernel::B1 => 1,
            Kernel::B2 => 2,
        }
    }
}

/// Largest grid accepted by [`KernelTable::direct_oracle`].
pub const ORACLE_MAX_N: usize = 64;

/// `log h + LATTICE_LOG_CONSTANT` is the origin weight that makes the
/// punctured lattice sum `h^2 sum_{j != 0} log|jh| f(jh)` plus that weight
/// times `h^2 f(0)` exact up to `O(h^4 log h)` for smooth decaying `f`.
///
/// It is `Z'(0)/2` for the Epstein zeta function `Z(s) = sum' |j|^{-2s}` of
/// the square lattice, `(ln 4pi)/2 - 2 ln Gamma(1/4)`.
pub const LATTICE_LOG_CONSTANT: f64 = -1.310_532_925_911_509_4;

/// Origin weight of the `log r` table.
pub fn origin_log(h: f64) -> f64 {
    h.ln() + LATTICE_LOG_CONSTANT
}

/// Kernel tables and their spectra for one grid and one `tau`.
pub struct KernelTable {
    grid: Grid,
    tau: f64,
    conv: PaddedConvolver,
    tables: [Vec<f64>; 3],
    spectra: [Spectrum; 3],
}

impl std::fmt::Debug for KernelTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelTable").field("grid", &self.grid).field("tau", &self.tau).finish()
    }
}

impl KernelTable {
    pub fn new(grid: Grid, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::InvalidGrid(format!("tau = {tau} must be finite and >= 0")));
        }
        let h = grid.spacing();
        let conv = PaddedConvolver::new(grid.n());
        let origin0 = origin_log(h);
        let origin1 = tau;
        let origin2 = origin1 - origin0;
        let origins = [origin0, origin1, origin2];
        let tables = Kernel::ALL.map(|k| {
            conv.tabulate(|di, dj| {
                if di == 0 && dj == 0 {
                    origins[k.idx()]
                } else {
                    k.eval(h * (di as f64).hypot(dj as f64), tau)
                }
            })
        });
        let spectra = [
            conv.kernel_spectrum(&tables[0]),
            conv.kernel_spectrum(&tables[1]),
            conv.kernel_spectrum(&tables[2]),
        ];
        Ok(Self { grid, tau, conv, tables, spectra })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Tabulated value at lattice offset `(di, dj)`, `|di|, |dj| <= n - 1`.
    pub fn value(&self, which: Kernel, di: isize, dj: isize) -> f64 {
        self.tables[which.idx()][self.conv.offset_slot(di, dj)]
    }

    pub fn origin_value(&self, which: Kernel) -> f64 {
        self.value(which, 0, 0)
    }

    /// Overwrites the `k0` origin cell and its spectrum. Used to check that
    /// the invariant battery detects a corrupted table.
    #[doc(hidden)]
    pub fn corrupt_origin(&mut self, delta: f64) {
        let slot = self.conv.offset_slot(0, 0);
        self.tables[0][slot] += delta;
        self.spectra[0] = self.conv.kernel_spectrum(&self.tables[0]);
    }

    pub(crate) fn spectrum_of(&self, g: &Field) -> Result<Spectrum> {
        self.grid.ensure_same(g.grid())?;
        Ok(self.conv.input_spectrum(g.values()))
    }

    pub(crate) fn potential_from(&self, spectrum: &Spectrum, which: Kernel) -> Field {
        let h2 = self.grid.cell_area();
        let mut w = self.conv.apply(spectrum, &self.spectra[which.idx()]);
        w.iter_mut().for_each(|v| *v *= h2);
        Field::from_raw(self.grid, w)
    }

    /// `(K1 * g, K2 * g)` from one inverse transform.
    pub(crate) fn split_potentials_from(&self, spectrum: &Spectrum) -> (Field, Field) {
        let h2 = self.grid.cell_area();
        let (mut a, mut b) = self.conv.apply_pair(spectrum, &self.spectra[1], &self.spectra[2]);
        a.iter_mut().chain(b.iter_mut()).for_each(|v| *v *= h2);
        (Field::from_raw(self.grid, a), Field::from_raw(self.grid, b))
    }

    /// `h^2 sum_y K(x - y) g(y)` for any real `g`.
    pub fn convolve(&self, g: &Field, which: Kernel) -> Result<Field> {
        let s = self.spectrum_of(g)?;
        Ok(self.potential_from(&s, which))
    }

    /// The convolution factor `log|.| * u^2` of the equation.
    pub fn log_potential(&self, u_sq: &Field) -> Result<Field> {
        let floor = -1e-14 * u_sq.max_abs().max(1.0);
        if let Some(&bad) = u_sq.values().iter().find(|&&v| v < floor) {
            return Err(Error::NegativeDensity(bad));
        }
        self.convolve(u_sq, Kernel::B0)
    }

    /// `B(f, g) = h^2 sum f (K * g)`.
    pub fn b_form(&self, f: &Field, g: &Field, which: Kernel) -> Result<f64> {
        self.grid.ensure_same(f.grid())?;
        let w = self.convolve(g, which)?;
        f.l2_inner(&w)
    }

    /// Explicit double sum `h^4 sum_x sum_y K(x - y) f(x) g(y)`; kernels are
    /// evaluated from their formulas, the origin from the table.
    pub fn direct_oracle(&self, f: &Field, g: &Field, which: Kernel) -> Result<f64> {
        self.grid.ensure_same(f.grid())?;
        self.grid.ensure_same(g.grid())?;
        let n = self.grid.n();
        if n > ORACLE_MAX_N {
            return Err(Error::GridTooLarge { n, limit: ORACLE_MAX_N });
        }
        let h = self.grid.spacing();
        let origin = self.origin_value(which);
        let mut total = 0.0;
        for xj in 0..n {
            for xi in 0..n {
                let fx = f.get(xi, xj);
                if fx == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for yj in 0..n {
                    for yi in 0..n {
                        let k = if xi == yi && xj == yj {
                            origin
                        } else {
                            let r = h * ((xi as f64 - yi as f64).hypot(xj as f64 - yj as f64));
                            which.eval(r, self.tau)
                        };
                        inner += k * g.get(yi, yj);
                    }
                }
                total += fx * inner;
            }
        }
        Ok(self.grid.cell_area().powi(2) * total)
    }
}
