use chq_core::functionals::{energy, fiber, nehari_project, nehari_scale};
use chq_core::{BarycenterMap, Field, Grid, Kernel, KernelTable, MetricContext, Motion, Potential};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise(grid: Grid, seed: u64, lo: f64) -> Field {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    Field::from_fn(grid, |_| r.gen_range(lo..1.0))
}

fn gaussian(grid: Grid, c: [f64; 2], w: f64) -> Field {
    Field::from_fn(grid, |[x, y]| (-((x - c[0]).powi(2) + (y - c[1]).powi(2)) / (2.0 * w * w)).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn splitting_is_exact_for_any_tau(tau in 0.0f64..4.0, seed in any::<u64>()) {
        let grid = Grid::new(2.0, 16).unwrap();
        let t = KernelTable::new(grid, tau).unwrap();
        let (f, g) = (noise(grid, seed, -1.0), noise(grid, seed ^ 1, -1.0));
        let b0 = t.b_form(&f, &g, Kernel::B0).unwrap();
        let b1 = t.b_form(&f, &g, Kernel::B1).unwrap();
        let b2 = t.b_form(&f, &g, Kernel::B2).unwrap();
        prop_assert!((b1 - b2 - b0).abs() <= 1e-12 * (1.0 + b0.abs()));
    }

    #[test]
    fn v1_bounds_hold_for_nonnegative_fields(tau in 0.1f64..3.0, seed in any::<u64>()) {
        let grid = Grid::new(2.0, 16).unwrap();
        let t = KernelTable::new(grid, tau).unwrap();
        let u = noise(grid, seed, 0.0);
        let u2 = u.square();
        let v1 = t.b_form(&u2, &u2, Kernel::B1).unwrap();
        prop_assert!(v1 >= tau * u.l2_sq().powi(2) * (1.0 - 1e-12));
    }

    #[test]
    fn nehari_projection_is_exact(amp in 0.05f64..20.0, w in 0.3f64..0.8, cx in -1.0f64..1.0) {
        let grid = Grid::new(6.0, 32).unwrap();
        let t = KernelTable::new(grid, 0.0).unwrap();
        let pot = Potential::new(Field::from_fn(grid, |[x, _]| 1.0 + 0.5 * x.sin())).unwrap();
        let u = gaussian(grid, [cx, 0.0], w).scale(amp);
        let b = energy(&u, &pot, &t).unwrap();
        prop_assume!(b.in_o());
        let p = nehari_project(&u, &b).unwrap();
        let e = energy(&p, &pot, &t).unwrap();
        prop_assert!(e.nehari_j.abs() <= 1e-10 * e.q_a.abs().max(e.v0.abs()));
        let tu = nehari_scale(&b).unwrap();
        prop_assert!(fiber(tu, &b) >= fiber(0.97 * tu, &b) && fiber(tu, &b) >= fiber(1.03 * tu, &b));
    }

    #[test]
    fn barycenter_is_translation_equivariant(di in -8isize..8, dj in -8isize..8, s in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
        let grid = Grid::new(6.0, 48).unwrap();
        let h = grid.spacing();
        let m = BarycenterMap::new(grid).unwrap();
        let u = gaussian(grid, [0.3, -0.2], 0.6).add(&gaussian(grid, [-0.9, 0.8], 0.4).scale(0.5)).unwrap();
        let b = m.beta(&u).unwrap();
        let c = m.beta(&u.shift(di, dj).scale(s)).unwrap();
        prop_assert!((c[0] - b[0] - di as f64 * h).abs() < 1e-12);
        prop_assert!((c[1] - b[1] - dj as f64 * h).abs() < 1e-12);
    }

    #[test]
    fn metric_norm_is_shift_invariant(di in -6isize..6, dj in -6isize..6, seed in any::<u64>()) {
        let grid = Grid::new(6.0, 48).unwrap();
        let bary = BarycenterMap::new(grid).unwrap();
        let u = gaussian(grid, [0.2, 0.4], 0.7);
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let v = Field::from_fn(grid, |[x, y]| if x.hypot(y) < 2.0 { r.gen_range(-1.0..1.0) } else { 0.0 });
        let a = MetricContext::for_state(&u, &bary).unwrap().norm(&v).unwrap();
        let b = MetricContext::for_state(&u.shift(di, dj), &bary).unwrap().norm(&v.shift(di, dj)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn motion_inverse_undoes_the_motion(angle in -3.2f64..3.2, bx in -3.0f64..3.0, by in -3.0f64..3.0, px in -5.0f64..5.0, py in -5.0f64..5.0) {
        let g = Motion::rotation(angle).compose(&Motion::translation([bx, by]));
        let q = g.inverse().apply_point(g.apply_point([px, py]));
        prop_assert!((q[0] - px).abs() < 1e-12 && (q[1] - py).abs() < 1e-12);
    }

    #[test]
    fn dumps_round_trip(seed in any::<u64>()) {
        let grid = Grid::new(1.5, 16).unwrap();
        let u = noise(grid, seed, -1e3);
        let mut bytes = Vec::new();
        u.write_dump(&mut bytes).unwrap();
        let back = Field::read_dump(bytes.as_slice()).unwrap();
        prop_assert_eq!(back, u);
    }
}
