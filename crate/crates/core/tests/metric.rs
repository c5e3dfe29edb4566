use chq_core::functionals::{phi_prime, residual_field};
use chq_core::metric::{continuity_bound, riesz_gradient};
use chq_core::{BarycenterMap, Field, Grid, KernelTable, MetricContext, Potential};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(grid: Grid, c: [f64; 2], w: f64) -> Field {
    Field::from_fn(grid, |[x, y]| (-((x - c[0]).powi(2) + (y - c[1]).powi(2)) / (2.0 * w * w)).exp())
}

fn noise(grid: Grid, r: &mut ChaCha8Rng) -> Field {
    Field::from_fn(grid, |_| r.gen_range(-1.0..1.0))
}

fn dense_operator(ctx: &MetricContext) -> DMatrix<f64> {
    let grid = *ctx.grid();
    let m = grid.len();
    let mut a = DMatrix::zeros(m, m);
    for k in 0..m {
        let mut e = vec![0.0; m];
        e[k] = 1.0;
        let col = ctx.apply(&Field::from_values(grid, e).unwrap()).unwrap();
        a.set_column(k, &DVector::from_column_slice(col.values()));
    }
    a
}

#[test]
fn riesz_solve_agrees_with_a_dense_factorization() {
    let grid = Grid::new(6.0, 24).unwrap();
    let t = KernelTable::new(grid, 0.0).unwrap();
    let pot = Potential::new(Field::from_fn(grid, |[x, _]| 1.0 + 0.3 * x.cos())).unwrap();
    let u = gaussian(grid, [0.8, -0.5], 1.0);
    let bary = BarycenterMap::new(grid).unwrap();
    let ctx = MetricContext::for_state(&u, &bary).unwrap();
    let a = dense_operator(&ctx);
    assert!((&a - a.transpose()).abs().max() < 1e-10 * a.abs().max());
    let chol = a.clone().cholesky().expect("metric operator is positive definite");
    let r = residual_field(&u, &pot, &t).unwrap();
    let dense = chol.solve(&DVector::from_column_slice(r.values()));
    let (g, _) = riesz_gradient(&u, &pot, &t, &bary, 1e-12).unwrap();
    let g = DVector::from_column_slice(g.values());
    assert!((&g - &dense).norm() <= 1e-8 * dense.norm());
}

#[test]
fn riesz_gradient_represents_the_derivative() {
    let grid = Grid::new(6.0, 32).unwrap();
    let t = KernelTable::new(grid, 0.0).unwrap();
    let pot = Potential::constant(grid, 1.0).unwrap();
    let u = gaussian(grid, [0.3, 0.1], 0.8);
    let bary = BarycenterMap::new(grid).unwrap();
    let (g, norm) = riesz_gradient(&u, &pot, &t, &bary, 1e-10).unwrap();
    let ctx = MetricContext::for_state(&u, &bary).unwrap();
    assert!((ctx.norm(&g).unwrap() - norm).abs() < 1e-12 * norm);
    let mut r = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..10 {
        let v = noise(grid, &mut r);
        let pv = phi_prime(&u, &v, &pot, &t).unwrap();
        assert!((ctx.inner(&g, &v).unwrap() - pv).abs() <= 1e-8 * (1.0 + pv.abs()));
    }
}

#[test]
fn metric_is_equivalent_to_x_with_the_stated_constant() {
    let grid = Grid::new(6.0, 32).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(42);
    for kappa in [0.0, 1.0, 3.0, 5.5] {
        let ctx = MetricContext::new(grid, [kappa, -0.5 * kappa]);
        let c2 = ctx.equivalence_bound_sq();
        for _ in 0..5 {
            let v = noise(grid, &mut r);
            let ratio = ctx.inner(&v, &v).unwrap() / v.x_inner(&v).unwrap();
            assert!(ratio <= c2 * (1.0 + 1e-12) && ratio * c2 >= 1.0 - 1e-12);
            assert!(ctx.norm(&v).unwrap() >= v.h_inner(&v).unwrap().sqrt() * (1.0 - 1e-14));
        }
    }
}

#[test]
fn metric_moves_with_the_state() {
    let grid = Grid::new(6.0, 48).unwrap();
    let bary = BarycenterMap::new(grid).unwrap();
    let u = gaussian(grid, [0.5, 0.25], 0.6);
    let v = gaussian(grid, [-0.4, 0.6], 0.5).sub(&gaussian(grid, [0.2, 0.0], 0.3)).unwrap();
    let base = MetricContext::for_state(&u, &bary).unwrap().norm(&v).unwrap();
    for (di, dj) in [(4, -3), (-3, 2), (0, 5)] {
        let moved = MetricContext::for_state(&u.shift(di, dj), &bary).unwrap();
        let n = moved.norm(&v.shift(di, dj)).unwrap();
        assert!((n - base).abs() <= 1e-12 * base, "{di},{dj}: {}", (n - base) / base);
    }
}

#[test]
fn metric_depends_continuously_on_the_center() {
    let grid = Grid::new(4.0, 16).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..20 {
        let c1 = [r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)];
        let c2 = [r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)];
        let (v, w) = (noise(grid, &mut r), noise(grid, &mut r));
        let lhs = (MetricContext::new(grid, c1).inner(&v, &w).unwrap()
            - MetricContext::new(grid, c2).inner(&v, &w).unwrap())
        .abs();
        assert!(lhs <= continuity_bound(c1, c2, &v, &w).unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn recentered_context_matches_a_fresh_one() {
    let grid = Grid::new(6.0, 32).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(44);
    let rhs = noise(grid, &mut r);
    let a = MetricContext::new(grid, [0.0, 0.0]).recentered([1.25, -0.5]);
    let b = MetricContext::new(grid, [1.25, -0.5]);
    let (xa, _) = a.solve(&rhs, 1e-12, None).unwrap();
    let (xb, _) = b.solve(&rhs, 1e-12, None).unwrap();
    assert!(xa.sub(&xb).unwrap().max_abs() <= 1e-10 * xb.max_abs());
    let back = a.apply(&xa).unwrap().sub(&rhs).unwrap().l2_norm();
    assert!(back <= 1e-10 * rhs.l2_norm());
}
