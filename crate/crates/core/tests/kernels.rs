use chq_core::logkernel::{origin_log, LATTICE_LOG_CONSTANT};
use chq_core::{Field, Grid, Kernel, KernelTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: Grid, r: &mut ChaCha8Rng, lo: f64) -> Field {
    Field::from_fn(grid, |_| r.gen_range(lo..1.0))
}

#[test]
fn fft_forms_match_the_direct_double_sum_for_every_kernel() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for (n, tau) in [(16, 0.0), (16, 1.0), (32, 0.5)] {
        let grid = Grid::new(2.5, n).unwrap();
        let t = KernelTable::new(grid, tau).unwrap();
        for which in Kernel::ALL {
            let (f, g) = (random_field(grid, &mut r, 0.0), random_field(grid, &mut r, 0.0));
            let fast = t.b_form(&f, &g, which).unwrap();
            let slow = t.direct_oracle(&f, &g, which).unwrap();
            assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1e-12), "{which:?} n {n}: {fast} vs {slow}");
        }
    }
}

#[test]
fn b_form_is_symmetric() {
    let mut r = ChaCha8Rng::seed_from_u64(12);
    let grid = Grid::new(3.0, 32).unwrap();
    let t = KernelTable::new(grid, 0.7).unwrap();
    let (f, g) = (random_field(grid, &mut r, -1.0), random_field(grid, &mut r, -1.0));
    for which in Kernel::ALL {
        let a = t.b_form(&f, &g, which).unwrap();
        let b = t.b_form(&g, &f, which).unwrap();
        assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}

#[test]
fn splitting_holds_for_signed_fields() {
    let mut r = ChaCha8Rng::seed_from_u64(13);
    let grid = Grid::new(4.0, 32).unwrap();
    for tau in [0.0, 0.5, 1.0, 2.0] {
        let t = KernelTable::new(grid, tau).unwrap();
        let (f, g) = (random_field(grid, &mut r, -1.0), random_field(grid, &mut r, -1.0));
        let b0 = t.b_form(&f, &g, Kernel::B0).unwrap();
        let b1 = t.b_form(&f, &g, Kernel::B1).unwrap();
        let b2 = t.b_form(&f, &g, Kernel::B2).unwrap();
        assert!((b1 - b2 - b0).abs() <= 1e-12 * (1.0 + b0.abs()));
    }
}

#[test]
fn kernel_pieces_are_nonnegative() {
    let grid = Grid::new(4.0, 32).unwrap();
    let t = KernelTable::new(grid, 0.0).unwrap();
    for dj in -31..=31 {
        for di in -31..=31 {
            assert!(t.value(Kernel::B1, di, dj) >= 0.0);
            if (di, dj) != (0, 0) {
                assert!(t.value(Kernel::B2, di, dj) >= 0.0);
            }
        }
    }
}

#[test]
fn v1_dominates_tau_times_mass_squared() {
    let mut r = ChaCha8Rng::seed_from_u64(14);
    let grid = Grid::new(3.0, 32).unwrap();
    for tau in [0.5, 1.0, 2.0] {
        let t = KernelTable::new(grid, tau).unwrap();
        for _ in 0..4 {
            let u = random_field(grid, &mut r, 0.0);
            let u2 = u.square();
            let v1 = t.b_form(&u2, &u2, Kernel::B1).unwrap();
            assert!(v1 >= tau * u.l2_sq().powi(2) * (1.0 - 1e-12));
        }
    }
}

#[test]
fn far_field_of_a_point_mass_is_mass_times_log() {
    let grid = Grid::new(8.0, 64).unwrap();
    let t = KernelTable::new(grid, 0.0).unwrap();
    let u = Field::from_fn(grid, |[x, y]| (-(x * x + y * y) / 0.18).exp());
    let mass = u.integral();
    let w = t.convolve(&u, Kernel::B0).unwrap();
    for &(i, j) in &[(60usize, 32usize), (32, 4), (58, 58)] {
        let [x, y] = grid.point(i, j);
        let expect = mass * x.hypot(y).ln();
        assert!((w.get(i, j) - expect).abs() < 1e-8 * expect.abs().max(1.0), "{} vs {expect}", w.get(i, j));
    }
}

#[test]
fn gaussian_self_energy_matches_the_closed_form() {
    // u^2 = exp(-r^2 / w^2): V0 = M^2 (ln w + (ln 2 - gamma) / 2), M = pi w^2
    let gamma = 0.577_215_664_901_532_9;
    for (n, tol) in [(128usize, 4e-4), (256, 3e-5)] {
        let grid = Grid::new(12.0, n).unwrap();
        let t = KernelTable::new(grid, 0.0).unwrap();
        for w in [0.8, 1.0, 1.3] {
            let u2 = Field::from_fn(grid, |[x, y]| (-(x * x + y * y) / (w * w)).exp());
            let m = std::f64::consts::PI * w * w;
            let exact = m * m * (f64::ln(w) + 0.5 * (std::f64::consts::LN_2 - gamma));
            let v0 = t.b_form(&u2, &u2, Kernel::B0).unwrap();
            assert!((v0 - exact).abs() <= tol * m * m, "n {n} w {w}: {v0} vs {exact}");
        }
    }
}

#[test]
fn origin_weight_is_log_spacing_plus_the_lattice_constant() {
    let grid = Grid::new(6.0, 48).unwrap();
    let t = KernelTable::new(grid, 1.5).unwrap();
    let h = grid.spacing();
    assert!((t.origin_value(Kernel::B0) - (h.ln() + LATTICE_LOG_CONSTANT)).abs() < 1e-14);
    assert!((t.origin_value(Kernel::B0) - origin_log(h)).abs() < 1e-14);
    assert!((t.origin_value(Kernel::B1) - 1.5).abs() < 1e-14);
}

#[test]
fn corrupted_origin_breaks_the_splitting() {
    let mut r = ChaCha8Rng::seed_from_u64(15);
    let grid = Grid::new(2.0, 16).unwrap();
    let mut t = KernelTable::new(grid, 0.5).unwrap();
    t.corrupt_origin(0.01);
    let f = random_field(grid, &mut r, 0.0);
    let b0 = t.b_form(&f, &f, Kernel::B0).unwrap();
    let b1 = t.b_form(&f, &f, Kernel::B1).unwrap();
    let b2 = t.b_form(&f, &f, Kernel::B2).unwrap();
    assert!((b1 - b2 - b0).abs() > 1e-6 * (1.0 + b0.abs()));
}
