use chq_core::{BarycenterMap, Field, Grid};

fn gaussian(grid: Grid, c: [f64; 2], w: f64) -> Field {
    Field::from_fn(grid, |[x, y]| (-((x - c[0]).powi(2) + (y - c[1]).powi(2)) / (2.0 * w * w)).exp())
}

/// Direct evaluation of the definition with quadratic cost.
fn brute_force_beta(u: &Field) -> [f64; 2] {
    let g = *u.grid();
    let n = g.n();
    let h2 = g.cell_area();
    let mut uhat = vec![0.0; g.len()];
    for j in 0..n {
        for i in 0..n {
            let x = g.point(i, j);
            let mut s = 0.0;
            for l in 0..n {
                for k in 0..n {
                    let y = g.point(k, l);
                    if (x[0] - y[0]).hypot(x[1] - y[1]) < 1.0 {
                        s += u.get(k, l).powi(2);
                    }
                }
            }
            uhat[g.index(i, j)] = h2 * s;
        }
    }
    let half = 0.5 * uhat.iter().cloned().fold(0.0, f64::max);
    let (mut bx, mut by, mut b1) = (0.0, 0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let e = uhat[g.index(i, j)] - half;
            if e > 0.0 {
                let x = g.point(i, j);
                bx += x[0] * e;
                by += x[1] * e;
                b1 += e;
            }
        }
    }
    [bx / b1, by / b1]
}

#[test]
fn two_bump_barycenter_matches_brute_force() {
    let grid = Grid::new(4.0, 32).unwrap();
    let u = gaussian(grid, [1.1, -0.6], 0.5).add(&gaussian(grid, [-1.3, 0.9], 0.45).scale(0.9)).unwrap();
    let fast = BarycenterMap::new(grid).unwrap().beta(&u).unwrap();
    let slow = brute_force_beta(&u);
    assert!((fast[0] - slow[0]).abs() < 1e-10 && (fast[1] - slow[1]).abs() < 1e-10, "{fast:?} vs {slow:?}");
}

#[test]
fn barycenter_follows_the_heavier_bump() {
    let grid = Grid::new(6.0, 48).unwrap();
    let u = gaussian(grid, [2.0, 1.0], 0.5).add(&gaussian(grid, [-2.5, -1.0], 0.5).scale(0.3)).unwrap();
    let b = BarycenterMap::new(grid).unwrap().beta(&u).unwrap();
    assert!((b[0] - 2.0).abs() < 0.25 && (b[1] - 1.0).abs() < 0.25, "{b:?}");
}

#[test]
fn integer_shifts_move_the_barycenter_exactly() {
    let grid = Grid::new(6.0, 48).unwrap();
    let h = grid.spacing();
    let m = BarycenterMap::new(grid).unwrap();
    let u = gaussian(grid, [0.4, -0.7], 0.6).sub(&gaussian(grid, [-0.8, 0.3], 0.4)).unwrap();
    let b = m.beta(&u).unwrap();
    for (di, dj) in [(5, 0), (-3, 7), (6, -6)] {
        let s = m.beta(&u.shift(di, dj)).unwrap();
        assert!((s[0] - b[0] - di as f64 * h).abs() < 1e-12);
        assert!((s[1] - b[1] - dj as f64 * h).abs() < 1e-12);
    }
}

#[test]
fn centered_radial_state_sits_at_the_origin() {
    let grid = Grid::new(6.0, 48).unwrap();
    let b = BarycenterMap::new(grid).unwrap().beta(&gaussian(grid, [0.0, 0.0], 0.8)).unwrap();
    assert!(b[0].abs() <= grid.spacing() / 2.0 && b[1].abs() <= grid.spacing() / 2.0);
}

#[test]
fn barycenter_ignores_sign_and_scale() {
    let grid = Grid::new(6.0, 48).unwrap();
    let m = BarycenterMap::new(grid).unwrap();
    let u = gaussian(grid, [0.9, 0.2], 0.5).sub(&gaussian(grid, [-0.4, -1.0], 0.7).scale(0.6)).unwrap();
    let b = m.beta(&u).unwrap();
    for v in [u.scale(-1.0), u.scale(3.0), u.abs()] {
        let c = m.beta(&v).unwrap();
        assert!((c[0] - b[0]).abs() < 1e-12 && (c[1] - b[1]).abs() < 1e-12);
    }
}

#[test]
fn degenerate_inputs_are_errors() {
    let grid = Grid::new(6.0, 48).unwrap();
    let m = BarycenterMap::new(grid).unwrap();
    assert!(m.beta(&Field::zeros(grid)).is_err());
    assert!(BarycenterMap::new(Grid::new(12.0, 16).unwrap()).is_err());
    assert!(m.beta_p(&gaussian(grid, [0.0, 0.0], 1.0), 0.5).is_err());
}
