//! Nehari-constrained descent in the state-dependent metric, start families
//! of disjoint bumps, multi-start search and the ground state.
//!
//! One descent step: project onto the invariant subspace, take the Riesz
//! gradient `g` of `Phi'(u)`, remove its component along the Riesz
//! representative of `J'(u)` to get `d`, turn `d` into a limited-memory
//! quasi-Newton direction `p` in the same product, backtrack with an Armijo
//! test on `Phi(sigma(u + alpha p))`, and land back on the Nehari set with
//! `sigma`.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::barycenter::BarycenterMap;
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::functionals::{
    self, cerami_weight, classify, nehari_scale, residual_from_potential, EnergyBreakdown, Evaluation, NehariClass,
    NehariKind, Potential, NZERO_TOL,
};
use crate::logkernel::KernelTable;
use crate::metric::MetricContext;
use crate::symmetry::{self, ActionKind, GroupAction, InvarianceCertificate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub max_iters: usize,
    pub cerami_tol: f64,
    pub riesz_tol: f64,
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    pub tau_split: f64,
    pub seed: u64,
    /// Random simplex points added to vertices and edge midpoints.
    pub random_samples: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iters: 3000,
            cerami_tol: 1e-6,
            riesz_tol: 1e-10,
            step_init: 1.0,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            tau_split: 0.0,
            seed: 0,
            random_samples: 2,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iters >= 1
            && self.cerami_tol > 0.0
            && self.riesz_tol > 0.0
            && self.step_init > 0.0
            && self.backtrack_factor > 0.0
            && self.backtrack_factor < 1.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0
            && self.tau_split >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGrid(format!("invalid solver configuration {self:?}")))
        }
    }
}

/// Most halvings tried by the line search.
pub const MAX_HALVINGS: usize = 60;
/// Curvature pairs kept by the quasi-Newton direction.
pub const LBFGS_MEMORY: usize = 8;

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub phi: f64,
    pub q_a: f64,
    pub v0: f64,
    pub nehari_j: f64,
    pub cerami_weight: f64,
    pub residual_l2: f64,
}

pub const TRACE_HEADER: &str = "iter,phi,q_a,v0,nehari_j,cerami_weight,residual_l2";

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut w: W) -> Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.iter, r.phi, r.q_a, r.v0, r.nehari_j, r.cerami_weight, r.residual_l2
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: Field,
    pub breakdown: EnergyBreakdown,
    pub cerami: f64,
    pub nehari: NehariClass,
    pub certificate: InvarianceCertificate,
    pub iters: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct StartFamily {
    pub bumps: Vec<Field>,
    pub simplex_samples: Vec<Vec<f64>>,
}

impl StartFamily {
    /// `sum_j s_j phi_j`.
    pub fn combine(&self, s: &[f64]) -> Field {
        let grid = *self.bumps[0].grid();
        let mut acc = vec![0.0; grid.len()];
        for (b, &c) in self.bumps.iter().zip(s) {
            if c != 0.0 {
                for (a, v) in acc.iter_mut().zip(b.values()) {
                    *a += c * v;
                }
            }
        }
        Field::from_values(grid, acc).expect("finite combination")
    }
}

/// A start that could not be run.
#[derive(Debug, Clone)]
pub struct StartFailure {
    pub start: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct MultistartOutcome {
    /// Converged, orbit-distinct results by ascending energy.
    pub solutions: Vec<SolveResult>,
    /// Runs that stopped at the iteration cap.
    pub unconverged: Vec<SolveResult>,
    pub failures: Vec<StartFailure>,
    /// Total number of starts tried.
    pub starts: usize,
}

/// Relative orbit distance under which two results count as one.
pub const DEDUP_TOL: f64 = 1e-4;

/// Smooth compactly supported profile, 1 at 0 and 0 for `rho >= 1`.
pub fn bump_profile(rho: f64) -> f64 {
    if rho >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - rho * rho)).exp()
    }
}

fn disc_bump(grid: Grid, center: [f64; 2], radius: f64) -> Field {
    Field::from_fn(grid, |[x, y]| bump_profile((x - center[0]).hypot(y - center[1]) / radius))
}

/// Shared inputs of a solve.
pub struct Problem<'a> {
    pub pot: &'a Potential,
    pub table: &'a KernelTable,
    pub action: GroupAction,
    pub bary: BarycenterMap,
}

impl<'a> Problem<'a> {
    pub fn new(pot: &'a Potential, table: &'a KernelTable, action: GroupAction) -> Result<Self> {
        table.grid().ensure_same(pot.a().grid())?;
        Ok(Self { pot, table, action, bary: BarycenterMap::new(*table.grid())? })
    }

    pub fn grid(&self) -> &Grid {
        self.table.grid()
    }

    fn evaluate_energy(&self, u: &Field) -> Result<Evaluation> {
        functionals::evaluate_energy(u, self.pot, self.table)
    }

    /// `sigma(u)` and its evaluation, for states in `N_-` direction (`q_a > 0 > V0`).
    fn to_nehari(&self, u: &Field, ev: &Evaluation) -> Result<(Field, Evaluation)> {
        let b = &ev.breakdown;
        if !(b.q_a > 0.0 && b.v0 < 0.0) {
            return Err(Error::OutsideO { product: b.q_a * b.v0 });
        }
        let t = nehari_scale(b)?;
        Ok((u.scale(t), ev.rescaled(t)))
    }

    fn project(&self, u: &Field) -> Field {
        if self.action.has_trivial_g0() {
            return u.clone();
        }
        if self.action.is_grid_exact(self.grid()) {
            return symmetry::project_invariant(u, &self.action);
        }
        let defect = symmetry::invariance_defect(u, &self.action);
        if defect > 0.1 * self.action.defect_tolerance(self.grid()) {
            symmetry::project_invariant(u, &self.action)
        } else {
            u.clone()
        }
    }

    fn certificate(&self, u: &Field) -> InvarianceCertificate {
        symmetry::is_invariant(u, &self.action, self.action.defect_tolerance(self.grid()))
    }

    /// Riesz representative of `J'(u)`, `A_u^{-1} (2 (-Lap + a) u + 4 w u)`.
    fn constraint_gradient(
        &self,
        u: &Field,
        w: &Field,
        residual: &Field,
        ctx: &MetricContext,
        tol: f64,
        warm: Option<&Field>,
    ) -> Result<Field> {
        let rhs: Vec<f64> = residual
            .values()
            .iter()
            .zip(u.values().iter().zip(w.values()))
            .map(|(&r, (&x, &wv))| 2.0 * r + 2.0 * wv * x)
            .collect();
        let (c, _) = ctx.solve(&Field::from_values(*u.grid(), rhs)?, tol, warm)?;
        Ok(c)
    }

    /// `-H d` by the two-loop recursion in the `<., .>_u` product.
    fn lbfgs_direction(&self, d: &Field, memory: &[(Field, Field, f64)], ctx: &MetricContext) -> Result<Field> {
        let mut q = d.clone();
        let mut coef = Vec::with_capacity(memory.len());
        for (sk, yk, sy) in memory.iter().rev() {
            let a = ctx.inner(sk, &q)? / sy;
            q = q.axpy(-a, yk)?;
            coef.push(a);
        }
        if let Some((_, yk, sy)) = memory.last() {
            q = q.scale(sy / ctx.inner(yk, yk)?);
        }
        for ((sk, yk, sy), a) in memory.iter().zip(coef.into_iter().rev()) {
            let b = ctx.inner(yk, &q)? / sy;
            q = q.axpy(a - b, sk)?;
        }
        Ok(q.scale(-1.0))
    }

    /// Removes from `g` its `<., .>_u` component along `c`.
    pub fn tangent_project(&self, g: &Field, c: &Field, ctx: &MetricContext) -> Result<Field> {
        let cc = ctx.inner(c, c)?;
        if cc.sqrt() <= 1e-14 {
            return Err(Error::DegenerateConstraint(cc.sqrt()));
        }
        let mu = ctx.inner(g, c)? / cc;
        g.axpy(-mu, c)
    }

    /// `Phi(v) - Phi(u)` without the cancellation of two large energies.
    fn energy_difference(&self, u: &Field, eu: &Evaluation, v: &Field, ev: &Evaluation) -> Result<f64> {
        let delta = v.sub(u)?;
        let sum = v.add(u)?;
        let dq = functionals::q_a_bilinear(&delta, &sum, self.pot)?;
        let h2 = self.grid().cell_area();
        let mut dv = 0.0;
        for q in 0..delta.values().len() {
            dv += delta.values()[q] * sum.values()[q] * (eu.potential.values()[q] + ev.potential.values()[q]);
        }
        Ok(0.5 * dq + 0.25 * h2 * dv)
    }

    fn finish(&self, u: Field, ev: &Evaluation, cerami: f64, iters: usize, converged: bool, trace: Vec<TraceRow>) -> SolveResult {
        let nehari = classify(&ev.breakdown, u.l2_sq());
        let certificate = self.certificate(&u);
        let converged = converged && nehari.class == NehariKind::Nminus;
        SolveResult { u, breakdown: ev.breakdown, cerami, nehari, certificate, iters, converged, trace }
    }

    /// Constrained descent from `u0`, which must have `q_a > 0 > V0`.
    pub fn descend(&self, u0: &Field, cfg: &SolveConfig) -> Result<SolveResult> {
        cfg.validate()?;
        self.grid().ensure_same(u0.grid())?;
        let mut u = self.project(u0);
        let ev0 = self.evaluate_energy(&u)?;
        let (un, mut ev) = self.to_nehari(&u, &ev0)?;
        u = un;
        let mut trace = Vec::new();
        let mut warm_g: Option<Field> = None;
        let mut warm_c: Option<Field> = None;
        let mut prev: Option<(Field, Field)> = None;
        let mut memory: Vec<(Field, Field, f64)> = Vec::new();
        let mut ctx = MetricContext::for_state(&u, &self.bary)?;
        for iter in 0..=cfg.max_iters {
            let projected = self.project(&u);
            if projected != u {
                let e = self.evaluate_energy(&projected)?;
                let (p, e) = self.to_nehari(&projected, &e)?;
                u = p;
                ev = e;
            }
            let l2_sq = u.l2_sq();
            if ev.breakdown.v0.abs() <= NZERO_TOL * l2_sq * l2_sq {
                return Err(Error::DegenerateNehari { v0: ev.breakdown.v0 });
            }
            let residual = residual_from_potential(&u, self.pot, &ev.potential)?;
            let beta = self.bary.beta(&u)?;
            if ctx.needs_rebuild(beta) {
                ctx = ctx.recentered(beta);
            }
            let (g, _) = ctx.solve(&residual, cfg.riesz_tol, warm_g.as_ref())?;
            let gnorm = ctx.norm(&g)?;
            let cerami = cerami_weight(&u, gnorm);
            let b = ev.breakdown;
            trace.push(TraceRow {
                iter,
                phi: b.phi,
                q_a: b.q_a,
                v0: b.v0,
                nehari_j: b.nehari_j,
                cerami_weight: cerami,
                residual_l2: residual.l2_norm(),
            });
            if cerami <= cfg.cerami_tol {
                return Ok(self.finish(u, &ev, cerami, iter, true, trace));
            }
            if iter == cfg.max_iters {
                return Ok(self.finish(u, &ev, cerami, iter, false, trace));
            }
            let c = self.constraint_gradient(&u, &ev.potential, &residual, &ctx, cfg.riesz_tol, warm_c.as_ref())?;
            let d = self.tangent_project(&g, &c, &ctx)?;
            let dd = ctx.inner(&d, &d)?;
            if let Some((pu, pd)) = &prev {
                let sk = u.sub(pu)?;
                let yk = d.sub(pd)?;
                let sy = ctx.inner(&sk, &yk)?;
                if sy > 1e-12 * ctx.norm(&sk)? * ctx.norm(&yk)? && sy > 0.0 {
                    if memory.len() == LBFGS_MEMORY {
                        memory.remove(0);
                    }
                    memory.push((sk, yk, sy));
                }
            }
            let mut p = if memory.is_empty() {
                d.scale(-cfg.step_init)
            } else {
                self.tangent_project(&self.lbfgs_direction(&d, &memory, &ctx)?, &c, &ctx)?
            };
            let mut slope = -ctx.inner(&p, &d)?;
            if slope.is_nan() || slope <= 0.0 {
                memory.clear();
                p = d.scale(-cfg.step_init);
                slope = cfg.step_init * dd;
            }
            let mut accepted = None;
            let mut step = 1.0;
            for _ in 0..MAX_HALVINGS {
                let trial = u.axpy(step, &p)?;
                let et = self.evaluate_energy(&trial)?;
                if let Ok((v, evv)) = self.to_nehari(&trial, &et) {
                    let diff = self.energy_difference(&u, &ev, &v, &evv)?;
                    if diff <= -cfg.armijo_c * step * slope {
                        accepted = Some((v, evv));
                        break;
                    }
                }
                step *= cfg.backtrack_factor;
            }
            let (v, evv) = accepted.ok_or(Error::LineSearchFailed(MAX_HALVINGS))?;
            prev = Some((u, d));
            warm_g = Some(g);
            warm_c = Some(c);
            u = v;
            ev = evv;
        }
        unreachable!("loop returns at the iteration cap")
    }

    /// Start family of `k + 1` disjoint `(G0, zeta)`-invariant bumps.
    pub fn make_bump_family(&self, k: usize, seed: u64, random_samples: usize) -> Result<StartFamily> {
        let grid = *self.grid();
        let count = k + 1;
        let bumps = match self.action.kind {
            ActionKind::LatticeTranslation { b1, b2 } => self.lattice_bumps(count, b1, b2)?,
            ActionKind::Trivial => self.trivial_bumps(count)?,
            ActionKind::RotationZeta { m } => {
                let families = (0..count)
                    .map(|j| {
                        let ring = 1.0 + 1.2 * j as f64;
                        let lobe = (0.45 * ring * (PI / (2.0 * m as f64)).sin()).min(0.5);
                        let mut lobes = vec![0.0; grid.len()];
                        for l in 0..2 * m {
                            let th = l as f64 * PI / m as f64;
                            let sign = if self.action.zeta_nontrivial && l % 2 == 1 { -1.0 } else { 1.0 };
                            let c = [ring * th.cos(), ring * th.sin()];
                            for (a, v) in lobes.iter_mut().zip(disc_bump(grid, c, lobe).values()) {
                                *a += sign * v;
                            }
                        }
                        Field::from_values(grid, lobes)
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.contract_family(families)?
            }
            ActionKind::Radial => {
                let families = (0..count)
                    .map(|j| {
                        if j == 0 {
                            disc_bump(grid, [0.0, 0.0], 0.8)
                        } else {
                            let r0 = 1.2 * j as f64;
                            Field::from_fn(grid, |[x, y]| bump_profile((x.hypot(y) - r0).abs() / 0.4))
                        }
                    })
                    .collect();
                self.contract_family(families)?
            }
            ActionKind::GlideReflection { shift } => {
                let spacing = shift.abs().max(1.0);
                let centers: Vec<[f64; 2]> =
                    (0..count).map(|j| [spacing * (j as f64 - 0.5 * k as f64), 0.0]).collect();
                self.shrink_discs(&centers, (0.45 * spacing).min(0.45))?
            }
        };
        let simplex_samples = simplex_samples(count, seed, random_samples);
        Ok(StartFamily { bumps, simplex_samples })
    }

    fn lattice_bumps(&self, count: usize, b1: [f64; 2], b2: [f64; 2]) -> Result<Vec<Field>> {
        let comb = |p: f64, q: f64| [p * b1[0] + q * b2[0], p * b1[1] + q * b2[1]];
        let points = [comb(0.0, 0.0), comb(0.5, 0.0), comb(0.0, 0.5), comb(0.5, 0.5), comb(0.25, 0.25)];
        let offsets = [(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)];
        let mut centers = Vec::with_capacity(count);
        for j in 0..count {
            let p = points[j % points.len()];
            let (oi, oj) = offsets[j % offsets.len()];
            let o = comb(2.0 * oi as f64, 2.0 * oj as f64);
            let c = [p[0] + o[0], p[1] + o[1]];
            let (snapped, _) = symmetry::snap_to_grid(c, self.grid());
            centers.push(snapped);
        }
        let mut gap = f64::INFINITY;
        for a in 0..count {
            for b in a + 1..count {
                gap = gap.min((centers[a][0] - centers[b][0]).hypot(centers[a][1] - centers[b][1]));
            }
        }
        let h = self.grid().spacing();
        let radius = if count == 1 { 0.45 } else { (0.5 * gap - 1.5 * h).min(0.45) };
        self.shrink_discs(&centers, radius)
    }

    fn trivial_bumps(&self, count: usize) -> Result<Vec<Field>> {
        if count == 1 {
            return self.shrink_discs(&[[0.0, 0.0]], 0.45);
        }
        let ring = 0.3;
        let centers: Vec<[f64; 2]> = (0..count)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / count as f64;
                [ring * th.cos(), ring * th.sin()]
            })
            .collect();
        let chord = 2.0 * ring * (PI / count as f64).sin();
        let h = self.grid().spacing();
        self.shrink_discs(&centers, (0.5 * chord - 1.5 * h).min(0.2))
    }

    /// Disc bumps at `centers`, radius shrunk until each has `q_a > 0 > V0`.
    fn shrink_discs(&self, centers: &[[f64; 2]], radius: f64) -> Result<Vec<Field>> {
        let grid = *self.grid();
        let h = grid.spacing();
        let l = grid.half_width();
        if centers.iter().any(|c| c[0].abs().max(c[1].abs()) + radius >= l - 2.0 * h) {
            return Err(Error::BumpFamily("bumps do not fit in the box; use a larger box".into()));
        }
        let mut r = radius;
        while r >= 2.0 * h {
            let bumps: Vec<Field> = centers.iter().map(|&c| disc_bump(grid, c, r)).collect();
            let mut ok = true;
            for b in &bumps {
                let e = self.evaluate_energy(b)?.breakdown;
                if !(e.q_a > 0.0 && e.v0 < 0.0) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(bumps);
            }
            r *= 0.85;
        }
        Err(Error::BumpFamily("no radius >= 2h gives q_a > 0 > V0; use a larger box or finer grid".into()))
    }

    /// Applies `T_t`, `t < 0`, to the whole family until each bump has `q_a > 0 > V0`.
    fn contract_family(&self, bumps: Vec<Field>) -> Result<Vec<Field>> {
        let mut t = 0.0;
        loop {
            let scaled = bumps.iter().map(|b| functionals::scale_tt(b, t)).collect::<Result<Vec<_>>>()?;
            let mut ok = true;
            for b in &scaled {
                let e = self.evaluate_energy(b)?.breakdown;
                if !(e.q_a > 0.0 && e.v0 < 0.0) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(scaled);
            }
            t -= 0.1;
            if t < -functionals::SCALE_GUARD {
                return Err(Error::BumpFamily("contraction beyond the scaling guard; use a larger box".into()));
            }
        }
    }

    /// Maps a start into `O` (with `q_a > 0 > V0`), contracting with `T_t` if needed.
    pub fn admit_start(&self, u: &Field) -> Result<Field> {
        let mut t = 0.0;
        loop {
            let v = functionals::scale_tt(u, t)?;
            let e = self.evaluate_energy(&v)?.breakdown;
            if e.q_a > 0.0 && e.v0 < 0.0 {
                return Ok(v);
            }
            t -= 0.25;
            if t < -functionals::SCALE_GUARD {
                return Err(Error::OutsideO { product: e.q_a * e.v0 });
            }
        }
    }

    /// Descent from every simplex sample of the `k`-family, deduplicated by orbit.
    pub fn multistart(&self, k: usize, cfg: &SolveConfig) -> Result<MultistartOutcome> {
        let adm = symmetry::check_admissible(&self.action);
        if !adm.admissible {
            return Err(Error::Inadmissible(adm.reason));
        }
        let family = self.make_bump_family(k, cfg.seed, cfg.random_samples)?;
        let starts: Vec<Field> = family.simplex_samples.iter().map(|s| family.combine(s)).collect();
        Ok(self.run_starts(starts, cfg))
    }

    /// Descends from each start, then sorts and deduplicates.
    pub fn run_starts(&self, starts: Vec<Field>, cfg: &SolveConfig) -> MultistartOutcome {
        let count = starts.len();
        let runs: Vec<(usize, Result<SolveResult>)> = starts
            .into_par_iter()
            .enumerate()
            .map(|(i, s)| (i, self.admit_start(&s).and_then(|s| self.descend(&s, cfg))))
            .collect();
        let mut converged = Vec::new();
        let mut unconverged = Vec::new();
        let mut failures = Vec::new();
        for (start, r) in runs {
            match r {
                Ok(res) if res.converged => converged.push(res),
                Ok(res) => unconverged.push(res),
                Err(e) => failures.push(StartFailure { start, reason: e.to_string() }),
            }
        }
        converged.sort_by(|a, b| a.breakdown.phi.total_cmp(&b.breakdown.phi));
        let mut solutions: Vec<SolveResult> = Vec::new();
        for r in converged {
            let norm = r.u.l2_norm();
            let duplicate = solutions.iter().any(|s| {
                symmetry::orbit_distance(&r.u, &s.u, &self.bary).map(|d| d <= DEDUP_TOL * norm).unwrap_or(false)
            });
            if !duplicate {
                solutions.push(r);
            }
        }
        MultistartOutcome { solutions, unconverged, failures, starts: count }
    }

    /// Lowest-energy converged state over the `k = 2` family and a radial Gaussian start.
    pub fn ground_state(&self, cfg: &SolveConfig) -> Result<SolveResult> {
        if self.pot.ess_inf() <= 0.0 {
            return Err(Error::IndefinitePotential);
        }
        let mut starts = Vec::new();
        let gauss = Field::from_fn(*self.grid(), |[x, y]| (-0.5 * (x * x + y * y)).exp());
        let gauss = symmetry::project_invariant(&gauss, &self.action);
        if gauss.l2_norm() > 1e-8 {
            starts.push(gauss);
        }
        if let Ok(family) = self.make_bump_family(2, cfg.seed, cfg.random_samples) {
            starts.extend(family.simplex_samples.iter().map(|s| family.combine(s)));
        }
        let outcome = self.run_starts(starts, cfg);
        let best = outcome
            .solutions
            .into_iter()
            .next()
            .ok_or_else(|| Error::NotConverged(format!("none of {} ground-state starts converged", outcome.starts)))?;
        debug_assert!(best.breakdown.phi > 0.0);
        Ok(best)
    }
}

/// Vertices, edge midpoints and `random` seeded points of `sum |s_j| = 1`.
pub fn simplex_samples(count: usize, seed: u64, random: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for j in 0..count {
        let mut s = vec![0.0; count];
        s[j] = 1.0;
        out.push(s);
    }
    for i in 0..count {
        for j in i + 1..count {
            let mut s = vec![0.0; count];
            s[i] = 0.5;
            s[j] = 0.5;
            out.push(s);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        let mut s: Vec<f64> = (0..count).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
        let total: f64 = s.iter().sum();
        for v in &mut s {
            *v /= total;
            if rng.gen::<bool>() {
                *v = -*v;
            }
        }
        out.push(s);
    }
    out
}

/// Descent with a fresh [`Problem`].
pub fn descend(
    u0: &Field,
    action: GroupAction,
    pot: &Potential,
    table: &KernelTable,
    cfg: &SolveConfig,
) -> Result<SolveResult> {
    Problem::new(pot, table, action)?.descend(u0, cfg)
}

pub fn multistart_search(
    k: usize,
    action: GroupAction,
    pot: &Potential,
    table: &KernelTable,
    cfg: &SolveConfig,
) -> Result<MultistartOutcome> {
    Problem::new(pot, table, action)?.multistart(k, cfg)
}

pub fn ground_state(action: GroupAction, pot: &Potential, table: &KernelTable, cfg: &SolveConfig) -> Result<SolveResult> {
    Problem::new(pot, table, action)?.ground_state(cfg)
}

pub fn make_bump_family(
    k: usize,
    action: GroupAction,
    pot: &Potential,
    table: &KernelTable,
    cfg: &SolveConfig,
) -> Result<StartFamily> {
    Problem::new(pot, table, action)?.make_bump_family(k, cfg.seed, cfg.random_samples)
}
