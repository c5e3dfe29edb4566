//! The property battery behind `chq check`.

use chq_core::functionals::{self, nehari_project, nehari_scale, phi_prime, scale_tt};
use chq_core::metric::{continuity_bound, riesz_gradient};
use chq_core::{BarycenterMap, Field, Grid, Kernel, KernelTable, MetricContext, Potential, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CheckOptions {
    /// Added to the `log|x|` origin cell of every kernel table built by the
    /// battery. Only for demonstrating that the battery notices.
    pub corrupt_origin: Option<f64>,
    pub seed: u64,
}

type Check = fn(&CheckOptions) -> Result<(bool, String)>;

pub const CHECKS: &[(&str, Check)] = &[
    ("B0-oracle", b0_oracle),
    ("B0-splitting", b0_splitting),
    ("V1-lower-bound", v1_lower_bound),
    ("gradient-fd", gradient_fd),
    ("riesz-definition", riesz_definition),
    ("barycenter-equivariance", barycenter_equivariance),
    ("barycenter-scaling", barycenter_scaling),
    ("metric-M1", metric_m1),
    ("metric-M3", metric_m3),
    ("metric-M4", metric_m4),
    ("scaling-grad", scaling_grad),
    ("scaling-V0", scaling_v0),
    ("nehari-identity", nehari_identity),
    ("fiber-maximum", fiber_maximum),
];

pub fn run_battery(opts: &CheckOptions) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|(name, check)| match check(opts) {
            Ok((passed, detail)) => CheckOutcome { name, passed, detail },
            Err(e) => CheckOutcome { name, passed: false, detail: format!("error: {e}") },
        })
        .collect()
}

pub fn render_table(outcomes: &[CheckOutcome]) -> String {
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for o in outcomes {
        let mark = if o.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!("{mark}  {:width$}  {}\n", o.name, o.detail));
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    s.push_str(&format!("{} checks, {failed} failed\n", outcomes.len()));
    s
}

fn table(grid: Grid, tau: f64, opts: &CheckOptions) -> Result<KernelTable> {
    let mut t = KernelTable::new(grid, tau)?;
    if let Some(delta) = opts.corrupt_origin {
        t.corrupt_origin(delta);
    }
    Ok(t)
}

fn rng(opts: &CheckOptions, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed.wrapping_mul(0x9e37_79b9).wrapping_add(salt))
}

fn random_field(grid: Grid, rng: &mut ChaCha8Rng, nonnegative: bool) -> Field {
    Field::from_fn(grid, |_| if nonnegative { rng.gen::<f64>() } else { rng.gen_range(-1.0..1.0) })
}

/// Random values inside the disc of radius `r` about `c`, zero outside.
fn random_blob(grid: Grid, rng: &mut ChaCha8Rng, c: [f64; 2], r: f64) -> Field {
    Field::from_fn(grid, |[x, y]| {
        let v = rng.gen_range(-1.0..1.0);
        if (x - c[0]).hypot(y - c[1]) < r {
            v
        } else {
            0.0
        }
    })
}

fn gaussian(grid: Grid, c: [f64; 2], width: f64) -> Field {
    Field::from_fn(grid, |[x, y]| (-((x - c[0]).powi(2) + (y - c[1]).powi(2)) / (2.0 * width * width)).exp())
}

fn worst(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

fn b0_oracle(opts: &CheckOptions) -> Result<(bool, String)> {
    let grid = Grid::new(2.0, 16)?;
    let t = table(grid, 0.0, opts)?;
    let mut r = rng(opts, 1);
    let mut errs = Vec::new();
    for _ in 0..3 {
        let (f, g) = (random_field(grid, &mut r, true), random_field(grid, &mut r, true));
        let fast = t.b_form(&f, &g, Kernel::B0)?;
        let slow = t.direct_oracle(&f, &g, Kernel::B0)?;
        errs.push((fast - slow).abs() / slow.abs().max(1e-300));
    }
    let e = worst(errs);
    Ok((e <= 1e-10, format!("max relative error {e:.2e} (tol 1e-10)")))
}

fn b0_splitting(opts: &CheckOptions) -> Result<(bool, String)> {
    let grid = Grid::new(2.0, 16)?;
    let mut r = rng(opts, 2);
    let mut errs = Vec::new();
    for tau in [0.0, 0.5, 1.0, 2.0] {
        let t = table(grid, tau, opts)?;
        let (f, g) = (random_field(grid, &mut r, false), random_field(grid, &mut r, false));
        let b0 = t.b_form(&f, &g, Kernel::B0)?;
        let b1 = t.b_form(&f, &g, Kernel::B1)?;
        let b2 = t.b_form(&f, &g, Kernel::B2)?;
        errs.push((b1 - b2 - b0).abs() / (1.0 + b0.abs()));
    }
    let e = worst(errs);
    Ok((e <= 1e-12, format!("max |B1 - B2 - B0| / (1 + |B0|) = {e:.2e} (tol 1e-12)")))
}

fn v1_lower_bound(opts: &CheckOptions) -> Result<(bool, String)> {
    let grid = Grid::new(2.0, 16)?;
    let mut r = rng(opts, 3);
    let mut margin = f64::INFINITY;
    for tau in [0.5, 1.0, 2.0] {
        let t = table(grid, tau, opts)?;
        for _ in 0..3 {
            let u = random_field(grid, &mut r, true);
            let u2 = u.square();
            let v1 = t.b_form(&u2, &u2, Kernel::B1)?;
            let bound = tau * u.l2_sq().powi(2);
            margin = margin.min(v1 / bound);
        }
    }
    Ok((margin >= 1.0 - 1e-12, format!("min V1 / (tau |u|_2^4) = {margin:.6}")))
}

fn gradient_fd(opts: &CheckOptions) -> Result<(bool, String)> {
    let grid = Grid::new(6.0, 32)?;
    let t = table(grid, 0.0, opts)?;
    let pot = Potential::constant(grid, 1.0)?;
    let u = gaussian(grid, [0.2, -0.1], 1.0);
    let mut r = rng(opts, 4);
    let mut order = f64::INFINITY;
    for _ in 0..3 {
        let v = random_blob(grid, &mut r, [0.0, 0.0], 4.0);
        let exact = phi_prime(&u, &v, &pot, &t)?;
        let err = |s: f64| -> Result<f64> {
            let plus = functionals::energy(&u.axpy(s, &v)?, &pot, &t)?.phi;
            let minus = functionals::energy(&u.axpy(-s, &v)?, &pot, &t)?.phi;
            Ok(((plus - minus) / (2.0 * s) - exact).abs())
        };
        let (e1, e2) = (err(1e-2)?, err(1e-3)?);
        order = order.min((e1 / e2).log10());
    }
    Ok((order >= 1.9, format!("min observed order {order:.3} (need >= 1.9)")))
}

fn riesz_definition(opts: &CheckOptions) -> Result<(bool, String)> {
    let grid = Grid::new(6.0, 32)?;
    let t = table(grid, 0.0, opts)?;
    let pot = Potential::constant(grid, 1.0)?;
    let u = gaussian(grid, [0.3, 0.1], 0.8);
    let bary = BarycenterMap::new(grid)?;
    let (g, _) = riesz_gradient(&u, &pot, &t, &bary, 1e-10)?;
    let ctx = MetricContext::for_state(&u, &bary)?;
    let mut r = rng(opts, 5);
    let mut errs = Vec::new();
    for _ in 0..5 {
        let v = random_field(grid, &mut r, false);
        let pv = phi_prime(&u, &v, &pot, &t)?;
        errs.push((ctx.inner(&g, &v)? - pv).abs() / (1.0 + pv.abs()));
    }
    let e = worst(errs);
    Ok((e <= 1e-8, format!("max |<g, v>_u - Phi'(u)v| / (1 + |Phi'(u)v|) = {e:.2e} (tol 1e-8)")))
}

fn two_bumps(grid: Grid) -> Field {
    let a = gaussian(grid, [0.6, -0.4], 0.5);
    let b = gaussian(grid, [-0.7, 0.5], 0.4).scale(0.7);
    a.add(&b).expect("same grid")
}

fn barycenter_equivariance(_: &CheckOptions) -> Result<(bool, String)> {
    let grid = Grid::new(6.0, 48)?;
    let bary = BarycenterMap::new(grid)?;
    let u = two_bumps(grid);
    let b = bary.beta(&u)?;
    let h = grid.spacing();
    let mut e: f64 = 0.0;
    for (di, dj) in [(3, -2), (-5, 4), (7, 0)] {
        let s = bary.beta(&u.shift(di, dj))?;
        e = e.max((s[0] - b[0] - di as f64 * h).abs()).max((s[1] - b[1] - dj as f64 * h).abs());
    }
    Ok((e <= 1e-12, format!("max |beta(u(. - b)) - beta(u) - b| = {e:.2e} (tol 1e-12)")))
}

fn barycenter_scaling(_: &CheckOptions) -> Result<(bool, String)> {
    let grid = Grid::new(6.0, 48)?;
    let bary = BarycenterMap::new(grid)?;
    let u = two_bumps(grid).sub(&gaussian(grid, [0.0, 1.5], 0.3))?;
    let b = bary.beta(&u)?;
    let mut e: f64 = 0.0;
    for v in [u.scale(-1.0), u.scale(3.0), u.abs()] {
        let c = bary.beta(&v)?;
        e = e.max((c[0] - b[0]).abs()).max((c[1] - b[1]).abs());
    }
    Ok((e <= 1e-12, format!("max |beta(tu) - beta(u)|, |beta(|u|) - beta(u)| = {e:.2e} (tol 1e-12)")))
}

fn metric_m1(opts: &CheckOptions) -> Result<(bool, String)> {
    let grid = Grid::new(6.0, 32)?;
    let mut r = rng(opts, 6);
    let mut ok = true;
    let mut spread: f64 = 1.0;
    for kappa in [0.0, 2.0, 5.0] {
        let ctx = MetricContext::new(grid, [kappa, 0.0]);
        let c2 = ctx.equivalence_bound_sq();
        for _ in 0..4 {
            let v = random_field(grid, &mut r, false);
            let ratio = ctx.inner(&v, &v)? / v.x_inner(&v)?;
            spread = spread.max(ratio).max(1.0 / ratio);
            ok &= ratio <= c2 * (1.0 + 1e-12) && ratio >= 1.0 / c2 * (1.0 - 1e-12);
            let nu = ctx.norm(&v)?;
            let nh = v.h_inner(&v)?.sqrt();
            ok &= nu >= nh * (1.0 - 1e-14) && nh >= v.l2_norm() * (1.0 - 1e-14);
        }
    }
    Ok((ok, format!("largest ||v||_u^2 / ||v||_X^2 distortion {spread:.3}, within 1 + log(1 + kappa)")))
}

fn metric_m3(opts: &CheckOptions) -> Result<(bool, String)> {
    let grid = Grid::new(6.0, 48)?;
    let bary = BarycenterMap::new(grid)?;
    let u = gaussian(grid, [0.5, 0.25], 0.6);
    let mut r = rng(opts, 7);
    let v = random_blob(grid, &mut r, [0.0, 0.0], 2.5);
    let ctx = MetricContext::for_state(&u, &bary)?;
    let base = ctx.norm(&v)?;
    let mut e: f64 = 0.0;
    for (di, dj) in [(4, -3), (-6, 5)] {
        let moved = MetricContext::for_state(&u.shift(di, dj), &bary)?;
        e = e.max((moved.norm(&v.shift(di, dj))? - base).abs() / base);
    }
    Ok((e <= 1e-12, format!("max relative change of ||v||_u under shifts {e:.2e} (tol 1e-12)")))
}

fn metric_m4(opts: &CheckOptions) -> Result<(bool, String)> {
    let grid = Grid::new(4.0, 16)?;
    let mut r = rng(opts, 8);
    let mut ok = true;
    let mut tightest: f64 = 0.0;
    for _ in 0..20 {
        let c1 = [r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)];
        let c2 = [r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)];
        let (v, w) = (random_field(grid, &mut r, false), random_field(grid, &mut r, false));
        let lhs = (MetricContext::new(grid, c1).inner(&v, &w)? - MetricContext::new(grid, c2).inner(&v, &w)?).abs();
        let rhs = continuity_bound(c1, c2, &v, &w)?;
        ok &= lhs <= rhs * (1.0 + 1e-12) + 1e-13;
        tightest = tightest.max(lhs / rhs);
    }
    Ok((ok, format!("largest |<v,w>_u1 - <v,w>_u2| / bound = {tightest:.3} over 20 quadruples")))
}

fn scaling_grid() -> Result<(Grid, Field)> {
    let grid = Grid::new(12.0, 256)?;
    Ok((grid, gaussian(grid, [0.0, 0.0], 1.0)))
}

fn scaling_grad(_: &CheckOptions) -> Result<(bool, String)> {
    let (_, u) = scaling_grid()?;
    let g = u.grad_sq();
    let mut e: f64 = 0.0;
    for t in [0.25, -0.25] {
        let s = scale_tt(&u, t)?;
        let predicted = (-2.0 * t).exp() * g;
        e = e.max((s.grad_sq() - predicted).abs() / predicted);
    }
    Ok((e <= 1e-4, format!("max relative error of |grad T_t u|^2 = e^(-2t) |grad u|^2: {e:.2e} (tol 1e-4)")))
}

fn scaling_v0(opts: &CheckOptions) -> Result<(bool, String)> {
    let (grid, u) = scaling_grid()?;
    let t0 = table(grid, 0.0, opts)?;
    let v = functionals::v0(&u, &t0)?;
    let l4 = u.l2_sq().powi(2);
    let mut e: f64 = 0.0;
    for t in [0.25, -0.25] {
        let vs = functionals::v0(&scale_tt(&u, t)?, &t0)?;
        e = e.max((vs - v - t * l4).abs() / vs.abs().max(v.abs()));
    }
    Ok((e <= 1e-3, format!("max relative error of V0(T_t u) = V0(u) + t |u|_2^4: {e:.2e} (tol 1e-3)")))
}

fn nehari_state(opts: &CheckOptions) -> Result<(Field, Potential, KernelTable)> {
    let grid = Grid::new(6.0, 48)?;
    let t = table(grid, 0.0, opts)?;
    let pot = Potential::new(Field::from_fn(grid, |[x, y]| 1.0 + 0.2 * (x * y).sin()))?;
    Ok((gaussian(grid, [0.1, 0.2], 0.6).scale(1.7), pot, t))
}

fn nehari_identity(opts: &CheckOptions) -> Result<(bool, String)> {
    let (u, pot, t) = nehari_state(opts)?;
    let b = functionals::energy(&u, &pot, &t)?;
    let s = nehari_project(&u, &b)?;
    let e = functionals::energy(&s, &pot, &t)?;
    let scale = e.q_a.abs().max(e.v0.abs());
    let j = e.nehari_j.abs() / scale;
    let id = (e.phi - e.q_a / 4.0).abs().max((e.phi + e.v0 / 4.0).abs()) / e.phi.abs();
    Ok((j <= 1e-10 && id <= 1e-10, format!("|J| rel {j:.2e}, |Phi - q_a/4|, |Phi + V0/4| rel {id:.2e} (tol 1e-10)")))
}

fn fiber_maximum(opts: &CheckOptions) -> Result<(bool, String)> {
    let (u, pot, t) = nehari_state(opts)?;
    let b = functionals::energy(&u, &pot, &t)?;
    let tu = nehari_scale(&b)?;
    let cell = tu / 50.0;
    let (mut best_t, mut best) = (0.0, f64::NEG_INFINITY);
    for i in 0..=150 {
        let s = i as f64 * cell * (1.0 + 1e-3);
        let f = functionals::fiber(s, &b);
        if f > best {
            best = f;
            best_t = s;
        }
    }
    let off = (best_t - tu).abs();
    Ok((off <= cell, format!("sampled maximum at {best_t:.5}, t_u = {tu:.5}, cell {cell:.2e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_lists_every_check() {
        let outcomes = vec![
            CheckOutcome { name: "x", passed: true, detail: "fine".into() },
            CheckOutcome { name: "longer", passed: false, detail: "bad".into() },
        ];
        let s = render_table(&outcomes);
        assert!(s.contains("PASS  x       fine"));
        assert!(s.contains("FAIL  longer  bad"));
        assert!(s.ends_with("2 checks, 1 failed\n"));
    }
}
