//! Point evaluation of a field between grid nodes.
//!
//! Tensor-product 6-point Lagrange interpolation (local quintic), with the
//! field taken as zero outside the box. Exact at grid nodes.

use crate::field::Field;

const OFFSETS: [f64; 6] = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
const SNAP: f64 = 1e-12;

fn weights(f: f64) -> [f64; 6] {
    let mut w = [0.0; 6];
    for (a, &oa) in OFFSETS.iter().enumerate() {
        let mut t = 1.0;
        for &ob in OFFSETS.iter() {
            if ob != oa {
                t *= (f - ob) / (oa - ob);
            }
        }
        w[a] = t;
    }
    w
}

fn split(c: f64) -> (isize, f64) {
    let r = c.round();
    if (c - r).abs() < SNAP {
        (r as isize, 0.0)
    } else {
        let fl = c.floor();
        (fl as isize, c - fl)
    }
}

/// Interpolated value of `u` at fractional index coordinates `(ci, cj)`.
pub fn sample_index(u: &Field, ci: f64, cj: f64) -> f64 {
    let n = u.grid().n() as isize;
    let (i0, fi) = split(ci);
    let (j0, fj) = split(cj);
    if i0 + 3 < 0 || j0 + 3 < 0 || i0 - 2 >= n || j0 - 2 >= n {
        return 0.0;
    }
    if fi == 0.0 && fj == 0.0 {
        return u.get_or_zero(i0, j0);
    }
    let wi = weights(fi);
    let wj = weights(fj);
    let mut acc = 0.0;
    for (b, &wb) in wj.iter().enumerate() {
        if fj == 0.0 && b != 2 {
            continue;
        }
        let jj = j0 + b as isize - 2;
        if jj < 0 || jj >= n {
            continue;
        }
        let mut row = 0.0;
        for (a, &wa) in wi.iter().enumerate() {
            let ii = i0 + a as isize - 2;
            if ii < 0 || ii >= n {
                continue;
            }
            row += wa * u.get_or_zero(ii, jj);
        }
        acc += wb * row;
    }
    acc
}

/// Interpolated value of `u` at the point `y`.
pub fn sample(u: &Field, y: [f64; 2]) -> f64 {
    let g = u.grid();
    sample_index(u, g.fractional_index(y[0]), g.fractional_index(y[1]))
}

/// 1-D interpolation of a uniformly sampled profile `p(k dr)`, zero beyond the table.
pub(crate) fn sample_profile(profile: &[f64], dr: f64, r: f64) -> f64 {
    let c = r / dr;
    let (k0, f) = split(c);
    let len = profile.len() as isize;
    let read = |k: isize| -> f64 {
        // even extension across r = 0
        let k = k.abs();
        if k < len {
            profile[k as usize]
        } else {
            0.0
        }
    };
    if f == 0.0 {
        return read(k0);
    }
    weights(f).iter().enumerate().map(|(a, w)| w * read(k0 + a as isize - 2)).sum()
}
