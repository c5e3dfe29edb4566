//! The energy `Phi(u) = q_a(u)/2 + V0(u)/4`, its derivative, the Nehari
//! constraint and the scalings acting on it.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::logkernel::{Kernel, KernelTable};
use crate::resample::sample_index;
use crate::symmetry::GroupAction;

/// Relative Nehari tolerance for on-manifold classification.
pub const NEHARI_TOL: f64 = 1e-10;
/// `|V0| <= NZERO_TOL * |u|_2^4` classifies a state as lying on `N0`.
pub const NZERO_TOL: f64 = 1e-8;
/// Largest `|t|` accepted by [`scale_tt`].
pub const SCALE_GUARD: f64 = 2.0;
/// Relative size of `|u|` tolerated in the strip that a dilation clips.
pub const CLIP_TOL: f64 = 1e-10;

/// A bounded potential `a(x)` sampled on the grid.
#[derive(Debug, Clone)]
pub struct Potential {
    a: Field,
    sup_norm: f64,
    ess_inf: f64,
    symmetry_tag: Option<GroupAction>,
}

impl Potential {
    pub fn new(a: Field) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { sup_norm: a.max_abs(), ess_inf: a.min_value(), a, symmetry_tag: None })
    }

    pub fn constant(grid: crate::field::Grid, value: f64) -> Result<Self> {
        Self::new(Field::constant(grid, value))
    }

    /// Records a symmetry the potential is known to have.
    pub fn with_symmetry(mut self, action: GroupAction) -> Self {
        self.symmetry_tag = Some(action);
        self
    }

    pub fn a(&self) -> &Field {
        &self.a
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn ess_inf(&self) -> f64 {
        self.ess_inf
    }

    pub fn symmetry_tag(&self) -> Option<&GroupAction> {
        self.symmetry_tag.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub q_a: f64,
    pub v0: f64,
    pub v1_tau: f64,
    pub v2_tau: f64,
    pub phi: f64,
    pub nehari_j: f64,
    pub tau: f64,
}

impl EnergyBreakdown {
    pub fn new(q_a: f64, v0: f64, v1_tau: f64, v2_tau: f64, tau: f64) -> Self {
        Self { q_a, v0, v1_tau, v2_tau, phi: 0.5 * q_a + 0.25 * v0, nehari_j: q_a + v0, tau }
    }

    /// Breakdown of `t u` from the breakdown of `u`.
    pub fn scaled(&self, t: f64) -> Self {
        let (t2, t4) = (t * t, t * t * t * t);
        Self::new(t2 * self.q_a, t4 * self.v0, t4 * self.v1_tau, t4 * self.v2_tau, self.tau)
    }

    /// `|J| / max(|q_a|, |V0|, 1)`.
    pub fn nehari_violation(&self) -> f64 {
        self.nehari_j.abs() / self.q_a.abs().max(self.v0.abs()).max(1.0)
    }

    /// The state lies in `O = {q_a V0 < 0}`, the domain of the projection.
    pub fn in_o(&self) -> bool {
        self.q_a * self.v0 < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NehariKind {
    Nminus,
    Nplus,
    Nzero,
    OffNehari,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NehariClass {
    pub class: NehariKind,
    pub violation: f64,
}

/// Classifies a state from its breakdown and `|u|_2^2`.
pub fn classify(b: &EnergyBreakdown, l2_sq: f64) -> NehariClass {
    let violation = b.nehari_violation();
    let class = if b.v0.abs() <= NZERO_TOL * l2_sq * l2_sq {
        NehariKind::Nzero
    } else if violation > NEHARI_TOL {
        NehariKind::OffNehari
    } else if b.v0 < 0.0 {
        NehariKind::Nminus
    } else {
        NehariKind::Nplus
    };
    NehariClass { class, violation }
}

/// `q_a(u, v) = <Du, Dv> + h^2 sum a u v`.
pub fn q_a_bilinear(u: &Field, v: &Field, pot: &Potential) -> Result<f64> {
    let g = u.grad_inner(v)?;
    u.grid().ensure_same(pot.a.grid())?;
    let h2 = u.grid().cell_area();
    let mut s = 0.0;
    for ((&x, &y), &a) in u.values().iter().zip(v.values()).zip(pot.a.values()) {
        s += a * x * y;
    }
    Ok(g + h2 * s)
}

pub fn q_a(u: &Field, pot: &Potential) -> Result<f64> {
    q_a_bilinear(u, u, pot)
}

/// `V0(u) = B0(u^2, u^2)`.
pub fn v0(u: &Field, table: &KernelTable) -> Result<f64> {
    let sq = u.square();
    table.b_form(&sq, &sq, Kernel::B0)
}

/// Energy, log potential and strong residual of one state, sharing a
/// single forward transform of `u^2`.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub breakdown: EnergyBreakdown,
    /// `log|.| * u^2`.
    pub potential: Field,
    residual: Option<Field>,
}

impl Evaluation {
    pub fn residual(&self) -> Option<&Field> {
        self.residual.as_ref()
    }

    /// Evaluation of `t u` without a new convolution. The residual is dropped.
    pub fn rescaled(&self, t: f64) -> Evaluation {
        Evaluation { breakdown: self.breakdown.scaled(t), potential: self.potential.scale(t * t), residual: None }
    }
}

/// `-Lap u + a u + w u` for a precomputed `w = log|.| * u^2`.
pub fn residual_from_potential(u: &Field, pot: &Potential, w: &Field) -> Result<Field> {
    u.grid().ensure_same(pot.a.grid())?;
    u.grid().ensure_same(w.grid())?;
    let lap = u.neg_laplacian();
    let values = lap
        .values()
        .iter()
        .zip(u.values())
        .zip(pot.a.values().iter().zip(w.values()))
        .map(|((&l, &x), (&a, &w))| l + (a + w) * x)
        .collect();
    Ok(Field::from_raw(*u.grid(), values))
}

fn evaluate_inner(u: &Field, pot: &Potential, table: &KernelTable, with_residual: bool) -> Result<Evaluation> {
    u.grid().ensure_same(table.grid())?;
    let sq = u.square();
    let spectrum = table.spectrum_of(&sq)?;
    let w0 = table.potential_from(&spectrum, Kernel::B0);
    let (w1, w2) = table.split_potentials_from(&spectrum);
    let q = q_a(u, pot)?;
    let v0 = sq.l2_inner(&w0)?;
    let v1 = sq.l2_inner(&w1)?;
    let v2 = sq.l2_inner(&w2)?;
    let breakdown = EnergyBreakdown::new(q, v0, v1, v2, table.tau());
    let residual = if with_residual { Some(residual_from_potential(u, pot, &w0)?) } else { None };
    Ok(Evaluation { breakdown, potential: w0, residual })
}

pub fn energy(u: &Field, pot: &Potential, table: &KernelTable) -> Result<EnergyBreakdown> {
    Ok(evaluate_inner(u, pot, table, false)?.breakdown)
}

/// Energy and log potential, without the residual.
pub fn evaluate_energy(u: &Field, pot: &Potential, table: &KernelTable) -> Result<Evaluation> {
    evaluate_inner(u, pot, table, false)
}

/// Energy together with the strong residual.
pub fn evaluate(u: &Field, pot: &Potential, table: &KernelTable) -> Result<Evaluation> {
    evaluate_inner(u, pot, table, true)
}

/// `Phi'(u) v = q_a(u, v) + B0(u^2, u v)`.
pub fn phi_prime(u: &Field, v: &Field, pot: &Potential, table: &KernelTable) -> Result<f64> {
    let w = table.log_potential(&u.square())?;
    let uv = u.mul(v)?;
    Ok(q_a_bilinear(u, v, pot)? + uv.l2_inner(&w)?)
}

/// `r = -Lap u + a u + (log|.| * u^2) u`, so that `h^2 sum r v = Phi'(u) v`.
pub fn residual_field(u: &Field, pot: &Potential, table: &KernelTable) -> Result<Field> {
    Ok(evaluate(u, pot, table)?.residual.expect("residual requested"))
}

/// Fiber map `f_u(t) = Phi(t u)` from a cached breakdown.
pub fn fiber(t: f64, cached: &EnergyBreakdown) -> f64 {
    let t2 = t * t;
    0.5 * t2 * cached.q_a + 0.25 * t2 * t2 * cached.v0
}

/// `t_u = sqrt(-q_a / V0)`.
pub fn nehari_scale(cached: &EnergyBreakdown) -> Result<f64> {
    if !cached.in_o() {
        return Err(Error::OutsideO { product: cached.q_a * cached.v0 });
    }
    Ok((-cached.q_a / cached.v0).sqrt())
}

/// `sigma(u) = t_u u`.
pub fn nehari_project(u: &Field, cached: &EnergyBreakdown) -> Result<Field> {
    Ok(u.scale(nehari_scale(cached)?))
}

/// `T_t(u)(x) = e^{-t} u(e^{-t} x)` by 6-point Lagrange resampling.
pub fn scale_tt(u: &Field, t: f64) -> Result<Field> {
    if !(t.is_finite() && t.abs() <= SCALE_GUARD) {
        return Err(Error::ScaleOutOfRange(t));
    }
    if t == 0.0 {
        return Ok(u.clone());
    }
    check_clip_margin(u, t)?;
    let g = *u.grid();
    let n = g.n();
    let c = g.origin_index() as f64;
    let s = (-t).exp();
    let mut values = Vec::with_capacity(g.len());
    for j in 0..n {
        let cj = c + s * (j as f64 - c);
        for i in 0..n {
            let ci = c + s * (i as f64 - c);
            values.push(s * sample_index(u, ci, cj));
        }
    }
    Ok(Field::from_raw(g, values))
}

fn check_clip_margin(u: &Field, t: f64) -> Result<()> {
    let g = u.grid();
    let inner = g.half_width() * (-t.abs()).exp();
    let limit = CLIP_TOL * u.max_abs();
    let n = g.n();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        let y = g.coord(j).abs();
        for i in 0..n {
            if y.max(g.coord(i).abs()) > inner {
                worst = worst.max(u.get(i, j).abs());
            }
        }
    }
    if worst > limit {
        return Err(Error::ClipGuard { value: worst });
    }
    Ok(())
}

/// `f(u) = T_{-V0(u_hat)} u_hat` with `u_hat = u / |u|_2`, renormalized to unit `L^2` norm.
pub fn lambda_map(u: &Field, table: &KernelTable) -> Result<Field> {
    let norm = u.l2_norm();
    if norm == 0.0 {
        return Err(Error::ZeroField("the normalization map"));
    }
    let uhat = u.scale(1.0 / norm);
    let t = -v0(&uhat, table)?;
    let out = scale_tt(&uhat, t)?;
    let m = out.l2_norm();
    if m == 0.0 {
        return Err(Error::ZeroField("the normalization map"));
    }
    Ok(out.scale(1.0 / m))
}

/// `||grad_u Phi(u)||_u (1 + |u|_2)`.
pub fn cerami_weight(u: &Field, grad_norm_u: f64) -> f64 {
    grad_norm_u * (1.0 + u.l2_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn gaussian(g: Grid, amp: f64, width: f64) -> Field {
        Field::from_fn(g, |[x, y]| amp * (-(x * x + y * y) / (2.0 * width * width)).exp())
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let g = Grid::new(4.0, 32).unwrap();
        let t = KernelTable::new(g, 0.0).unwrap();
        let p = Potential::constant(g, 1.0).unwrap();
        let e = energy(&Field::zeros(g), &p, &t).unwrap();
        assert_eq!(e, EnergyBreakdown::new(0.0, 0.0, 0.0, 0.0, 0.0));
        let r = residual_field(&Field::zeros(g), &p, &t).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn fiber_arithmetic() {
        let b = EnergyBreakdown::new(2.0, -8.0, 0.0, 8.0, 0.0);
        assert_eq!(fiber(0.0, &b), 0.0);
        assert_eq!(fiber(1.0, &b), b.phi);
        assert!((fiber(0.5, &b) - 0.125).abs() < 1e-15);
        assert!((nehari_scale(&b).unwrap() - 0.5).abs() < 1e-15);
        let outside = EnergyBreakdown::new(2.0, 8.0, 8.0, 0.0, 0.0);
        assert!(matches!(nehari_scale(&outside), Err(Error::OutsideO { .. })));
    }

    #[test]
    fn classification() {
        let on = EnergyBreakdown::new(3.0, -3.0, 0.0, 3.0, 0.0);
        assert_eq!(classify(&on, 1.0).class, NehariKind::Nminus);
        let plus = EnergyBreakdown::new(-3.0, 3.0, 3.0, 0.0, 0.0);
        assert_eq!(classify(&plus, 1.0).class, NehariKind::Nplus);
        let off = EnergyBreakdown::new(3.0, -2.0, 0.0, 2.0, 0.0);
        assert_eq!(classify(&off, 1.0).class, NehariKind::OffNehari);
        let zero = EnergyBreakdown::new(1e-12, 1e-12, 0.0, 0.0, 0.0);
        assert_eq!(classify(&zero, 1.0).class, NehariKind::Nzero);
    }

    #[test]
    fn scaling_identity_and_guards() {
        let g = Grid::new(6.0, 48).unwrap();
        let u = gaussian(g, 1.0, 0.8);
        assert_eq!(scale_tt(&u, 0.0).unwrap(), u);
        assert!(matches!(scale_tt(&u, 2.5), Err(Error::ScaleOutOfRange(_))));
        let wide = Field::constant(g, 1.0);
        assert!(matches!(scale_tt(&wide, 0.1), Err(Error::ClipGuard { .. })));
    }

    #[test]
    fn lambda_map_is_odd() {
        let g = Grid::new(10.0, 64).unwrap();
        let t = KernelTable::new(g, 0.0).unwrap();
        let u = gaussian(g, 2.0, 0.7);
        let a = lambda_map(&u, &t).unwrap();
        let b = lambda_map(&u.scale(-1.0), &t).unwrap();
        assert_eq!(a.scale(-1.0), b);
        assert!((a.l2_norm() - 1.0).abs() < 1e-12);
        assert!(matches!(lambda_map(&Field::zeros(g), &t), Err(Error::ZeroField(_))));
    }

    #[test]
    fn cerami_arithmetic() {
        let g = Grid::new(1.0, 16).unwrap();
        // |u|_2 = 3 on the box of area 4
        let u = Field::constant(g, 1.5);
        assert!((cerami_weight(&u, 1e-8) - 4e-8).abs() < 1e-20);
        assert_eq!(cerami_weight(&u, 0.0), 0.0);
    }
}
