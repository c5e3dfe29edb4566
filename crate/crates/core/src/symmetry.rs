//! Group actions `(g *_zeta u)(x) = zeta(g) u(g^{-1} x)` for the admissible
//! symmetry pairs, projection onto the invariant subspace, invariance
//! certificates and orbit-aware distances.
//!
//! Elements whose linear part is a signed permutation and whose shift is a
//! whole number of cells act by index maps and are exact. Everything else is
//! resampled with [`crate::resample`].

use std::f64::consts::PI;
use std::fmt;

use crate::barycenter::BarycenterMap;
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::resample::{sample_index, sample_profile};

/// Angular samples per ring of the radial projection.
pub const RADIAL_ANGLES: usize = 512;
/// Default invariance tolerance for grid-exact actions.
pub const EXACT_TOL: f64 = 1e-8;
/// Invariance tolerance for actions that resample.
pub const RESAMPLED_TOL: f64 = 1e-6;
/// Invariance tolerance for the ring-averaged radial action.
pub const RADIAL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionKind {
    Trivial,
    Radial,
    /// Generated by the rotation by `pi / m`.
    RotationZeta { m: u32 },
    LatticeTranslation { b1: [f64; 2], b2: [f64; 2] },
    /// `(x1, x2) -> (x1 + shift, -x2)` together with the reflection `x2 -> -x2`.
    GlideReflection { shift: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupAction {
    pub kind: ActionKind,
    pub zeta_nontrivial: bool,
}

/// An affine motion `x -> A x + b` with a sign character value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    pub linear: [[f64; 2]; 2],
    pub shift: [f64; 2],
    pub zeta: f64,
}

impl Motion {
    pub fn identity() -> Self {
        Self { linear: [[1.0, 0.0], [0.0, 1.0]], shift: [0.0, 0.0], zeta: 1.0 }
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self { linear: [[c, -s], [s, c]], ..Self::identity() }
    }

    pub fn translation(b: [f64; 2]) -> Self {
        Self { shift: b, ..Self::identity() }
    }

    /// `x2 -> -x2`.
    pub fn reflection_x2() -> Self {
        Self { linear: [[1.0, 0.0], [0.0, -1.0]], ..Self::identity() }
    }

    pub fn glide(shift: f64) -> Self {
        Self { shift: [shift, 0.0], ..Self::reflection_x2() }
    }

    pub fn with_zeta(mut self, zeta: f64) -> Self {
        self.zeta = zeta;
        self
    }

    pub fn apply_point(&self, x: [f64; 2]) -> [f64; 2] {
        let a = &self.linear;
        [a[0][0] * x[0] + a[0][1] * x[1] + self.shift[0], a[1][0] * x[0] + a[1][1] * x[1] + self.shift[1]]
    }

    /// `self o other`.
    pub fn compose(&self, other: &Motion) -> Motion {
        let (a, b) = (&self.linear, &other.linear);
        let mut linear = [[0.0; 2]; 2];
        for (r, row) in linear.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        let s = self.apply_point(other.shift);
        Motion { linear, shift: s, zeta: self.zeta * other.zeta }
    }

    pub fn inverse(&self) -> Motion {
        let a = &self.linear;
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let inv = [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]];
        let b = self.shift;
        let shift = [-(inv[0][0] * b[0] + inv[0][1] * b[1]), -(inv[1][0] * b[0] + inv[1][1] * b[1])];
        Motion { linear: inv, shift, zeta: self.zeta }
    }

    /// Signed-permutation linear part and whole-cell shift, as integers.
    fn index_map(&self, h: f64) -> Option<([[i64; 2]; 2], [i64; 2])> {
        let mut lin = [[0i64; 2]; 2];
        for (row, src) in lin.iter_mut().zip(&self.linear) {
            for (k, &v) in row.iter_mut().zip(src) {
                let r = v.round();
                if (v - r).abs() > 1e-12 || r.abs() > 1.0 {
                    return None;
                }
                *k = r as i64;
            }
        }
        let mut sh = [0i64; 2];
        for (s, &b) in sh.iter_mut().zip(&self.shift) {
            let k = (b / h).round();
            if (b / h - k).abs() > 1e-9 {
                return None;
            }
            *s = k as i64;
        }
        Some((lin, sh))
    }

    pub fn is_grid_exact(&self, grid: &Grid) -> bool {
        self.index_map(grid.spacing()).is_some()
    }
}

/// `(g *_zeta u)(x) = zeta u(g^{-1} x)`, zero outside the box.
pub fn act(g: &Motion, u: &Field) -> Field {
    let grid = *u.grid();
    let n = grid.n();
    let inv = g.inverse();
    let mut out = Vec::with_capacity(grid.len());
    if let Some((lin, sh)) = inv.index_map(grid.spacing()) {
        let ci = grid.origin_index() as i64;
        for j in 0..n as i64 {
            for i in 0..n as i64 {
                let (x, y) = (i - ci, j - ci);
                let si = lin[0][0] * x + lin[0][1] * y + sh[0] + ci;
                let sj = lin[1][0] * x + lin[1][1] * y + sh[1] + ci;
                out.push(g.zeta * u.get_or_zero(si as isize, sj as isize));
            }
        }
    } else {
        for j in 0..n {
            for i in 0..n {
                let y = inv.apply_point(grid.point(i, j));
                let (fi, fj) = (grid.fractional_index(y[0]), grid.fractional_index(y[1]));
                out.push(g.zeta * sample_index(u, fi, fj));
            }
        }
    }
    Field::from_values(grid, out).expect("finite resampling of a finite field")
}

impl GroupAction {
    pub fn trivial() -> Self {
        Self { kind: ActionKind::Trivial, zeta_nontrivial: false }
    }

    pub fn radial() -> Self {
        Self { kind: ActionKind::Radial, zeta_nontrivial: false }
    }

    pub fn rotation_zeta(m: u32, zeta_nontrivial: bool) -> Self {
        Self { kind: ActionKind::RotationZeta { m }, zeta_nontrivial }
    }

    pub fn lattice(b1: [f64; 2], b2: [f64; 2]) -> Self {
        Self { kind: ActionKind::LatticeTranslation { b1, b2 }, zeta_nontrivial: false }
    }

    pub fn glide(shift: f64) -> Self {
        Self { kind: ActionKind::GlideReflection { shift }, zeta_nontrivial: false }
    }

    /// Elements of the finite point group `G0` with their `zeta` values.
    /// Empty for the radial case, which is handled by ring averages.
    pub fn g0_elements(&self) -> Vec<Motion> {
        match self.kind {
            ActionKind::Trivial | ActionKind::LatticeTranslation { .. } => vec![Motion::identity()],
            ActionKind::Radial => Vec::new(),
            ActionKind::RotationZeta { m } => (0..2 * m)
                .map(|j| {
                    let zeta = if self.zeta_nontrivial && j % 2 == 1 { -1.0 } else { 1.0 };
                    Motion::rotation(j as f64 * PI / m as f64).with_zeta(zeta)
                })
                .collect(),
            ActionKind::GlideReflection { .. } => vec![Motion::identity(), Motion::reflection_x2()],
        }
    }

    /// Generators of `G0` used by the invariance defect.
    pub fn g0_generators(&self) -> Vec<Motion> {
        match self.kind {
            ActionKind::RotationZeta { .. } => self.g0_elements().into_iter().skip(1).take(1).collect(),
            ActionKind::GlideReflection { .. } => vec![Motion::reflection_x2()],
            _ => Vec::new(),
        }
    }

    /// Generators of `G`. For the radial case only grid-exact elements are listed.
    pub fn g_generators(&self) -> Vec<Motion> {
        match self.kind {
            ActionKind::Trivial => Vec::new(),
            ActionKind::Radial => vec![Motion::rotation(PI / 2.0), Motion::reflection_x2()],
            ActionKind::RotationZeta { .. } => self.g0_generators(),
            ActionKind::LatticeTranslation { b1, b2 } => vec![Motion::translation(b1), Motion::translation(b2)],
            ActionKind::GlideReflection { shift } => vec![Motion::glide(shift), Motion::reflection_x2()],
        }
    }

    /// Whether every element of `G0` acts by an exact index map.
    pub fn is_grid_exact(&self, grid: &Grid) -> bool {
        match self.kind {
            ActionKind::Radial => false,
            _ => self.g0_elements().iter().all(|g| g.is_grid_exact(grid)),
        }
    }

    /// Invariance defect accepted for states of this action.
    pub fn defect_tolerance(&self, grid: &Grid) -> f64 {
        if self.kind == ActionKind::Radial {
            RADIAL_TOL
        } else if self.is_grid_exact(grid) {
            EXACT_TOL
        } else {
            RESAMPLED_TOL
        }
    }

    /// Whether `G0` is the trivial group.
    pub fn has_trivial_g0(&self) -> bool {
        matches!(self.kind, ActionKind::Trivial | ActionKind::LatticeTranslation { .. })
    }
}

impl fmt::Display for GroupAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ActionKind::Trivial => write!(f, "trivial"),
            ActionKind::Radial => write!(f, "radial"),
            ActionKind::RotationZeta { m } if self.zeta_nontrivial => write!(f, "rot-zeta:{m}"),
            ActionKind::RotationZeta { m } => write!(f, "rot:{m}"),
            ActionKind::LatticeTranslation { b1, b2 } => write!(f, "lattice:{},{};{},{}", b1[0], b1[1], b2[0], b2[1]),
            ActionKind::GlideReflection { shift } => write!(f, "glide:{shift}"),
        }
    }
}

/// Verdict of [`check_admissible`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Admissibility {
    pub admissible: bool,
    pub reason: String,
}

pub fn check_admissible(action: &GroupAction) -> Admissibility {
    let (admissible, reason) = match action.kind {
        ActionKind::Trivial => (false, "G = {id} is contained in {id, g} for a reflection g".to_string()),
        ActionKind::Radial => (true, "G = G0 = O(2) (compact rotation group)".to_string()),
        ActionKind::RotationZeta { m: 0 } => (false, "rotation order m must be >= 1".to_string()),
        ActionKind::RotationZeta { m } => (true, format!("G = G0 generated by the rotation by pi/{m}")),
        ActionKind::LatticeTranslation { b1, b2 } => {
            let det = b1[0] * b2[1] - b1[1] * b2[0];
            let scale = b1[0].hypot(b1[1]) * b2[0].hypot(b2[1]);
            if det.abs() > 1e-12 * scale && scale > 0.0 {
                (true, "rank-2 translation lattice, G0 = {id}".to_string())
            } else {
                (false, "lattice vectors are linearly dependent".to_string())
            }
        }
        ActionKind::GlideReflection { shift } if shift != 0.0 && shift.is_finite() => {
            (true, "glide reflection along x1, G0 = {id, x2 -> -x2}".to_string())
        }
        ActionKind::GlideReflection { .. } => (false, "glide shift must be nonzero".to_string()),
    };
    Admissibility { admissible, reason }
}

/// Snaps a vector to whole cells; the flag is set when it moved by more than `h/2`.
pub fn snap_to_grid(b: [f64; 2], grid: &Grid) -> ([f64; 2], bool) {
    let h = grid.spacing();
    let s = [(b[0] / h).round() * h, (b[1] / h).round() * h];
    let moved = (s[0] - b[0]).hypot(s[1] - b[1]);
    (s, moved > 0.5 * h)
}

/// Ring-averaged profile of `u` about `center` at radial spacing `h/4`.
pub fn radial_profile(u: &Field, center: [f64; 2]) -> (Vec<f64>, f64) {
    let g = u.grid();
    let dr = 0.25 * g.spacing();
    let l = g.half_width();
    let reach = (l + center[0].abs()).hypot(l + center[1].abs());
    let rings = (reach / dr).ceil() as usize + 6;
    let trig: Vec<(f64, f64)> =
        (0..RADIAL_ANGLES).map(|k| (2.0 * PI * k as f64 / RADIAL_ANGLES as f64).sin_cos()).collect();
    let mut profile = Vec::with_capacity(rings);
    let (c0, c1) = (g.fractional_index(center[0]), g.fractional_index(center[1]));
    let inv_h = 1.0 / g.spacing();
    for k in 0..rings {
        let r = k as f64 * dr * inv_h;
        if k == 0 {
            profile.push(sample_index(u, c0, c1));
            continue;
        }
        let s: f64 = trig.iter().map(|&(sn, cs)| sample_index(u, c0 + r * cs, c1 + r * sn)).sum();
        profile.push(s / RADIAL_ANGLES as f64);
    }
    (profile, dr)
}

/// Radially symmetric field about `center` with the ring averages of `u`.
pub fn radial_project(u: &Field, center: [f64; 2]) -> Field {
    let (profile, dr) = radial_profile(u, center);
    Field::from_fn(*u.grid(), |[x, y]| sample_profile(&profile, dr, (x - center[0]).hypot(y - center[1])))
}

/// `|P_rad u - u|_2 / |u|_2` about `center`.
pub fn radial_defect(u: &Field, center: [f64; 2]) -> f64 {
    let norm = u.l2_norm();
    if norm == 0.0 {
        return 0.0;
    }
    radial_project(u, center).sub(u).expect("same grid").l2_norm() / norm
}

/// Group average `(1/|G0|) sum_g zeta(g) u(g^{-1} x)`; ring average for the radial case.
pub fn project_invariant(u: &Field, action: &GroupAction) -> Field {
    if action.kind == ActionKind::Radial {
        return radial_project(u, [0.0, 0.0]);
    }
    let elements = action.g0_elements();
    if elements.len() == 1 {
        return u.clone();
    }
    let mut acc = vec![0.0; u.grid().len()];
    for g in &elements {
        for (a, v) in acc.iter_mut().zip(act(g, u).values()) {
            *a += v;
        }
    }
    let k = 1.0 / elements.len() as f64;
    Field::from_values(*u.grid(), acc.into_iter().map(|v| k * v).collect()).expect("finite average")
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceCertificate {
    pub action: GroupAction,
    pub defect: f64,
    pub within_tol: bool,
    pub sign_changing: bool,
    pub nonradial: bool,
}

/// Radial defects above this mark a state as nonradial.
pub const NONRADIAL_TOL: f64 = 1e-4;

fn sign_changing(u: &Field) -> bool {
    let floor = 1e-8 * u.max_abs();
    u.min_value() < -floor && u.max_value() > floor
}

/// `max_g |g *_zeta u - u|_2 / |u|_2` over the generators of `G0`.
pub fn invariance_defect(u: &Field, action: &GroupAction) -> f64 {
    let norm = u.l2_norm();
    if norm == 0.0 {
        return 0.0;
    }
    if action.kind == ActionKind::Radial {
        return radial_defect(u, [0.0, 0.0]);
    }
    action
        .g0_generators()
        .iter()
        .map(|g| act(g, u).sub(u).expect("same grid").l2_norm() / norm)
        .fold(0.0, f64::max)
}

pub fn is_invariant(u: &Field, action: &GroupAction, tol: f64) -> InvarianceCertificate {
    let defect = invariance_defect(u, action);
    InvarianceCertificate {
        action: *action,
        defect,
        within_tol: defect <= tol,
        sign_changing: sign_changing(u),
        nonradial: radial_defect(u, [0.0, 0.0]) > NONRADIAL_TOL,
    }
}

fn recenter(u: &Field, bary: &BarycenterMap) -> Result<Field> {
    let b = bary.beta(u)?;
    let h = u.grid().spacing();
    Ok(u.shift(-(b[0] / h).round() as isize, -(b[1] / h).round() as isize))
}

/// `min_s |s u(. + beta(u)) - v(. + beta(v))|_2` over `s = +-1`, recentering by whole cells.
pub fn orbit_distance(u: &Field, v: &Field, bary: &BarycenterMap) -> Result<f64> {
    u.grid().ensure_same(v.grid())?;
    if u.l2_norm() == 0.0 || v.l2_norm() == 0.0 {
        return Err(Error::ZeroField("orbit distance"));
    }
    let (ru, rv) = (recenter(u, bary)?, recenter(v, bary)?);
    let plus = ru.sub(&rv)?.l2_norm();
    let minus = ru.add(&rv)?.l2_norm();
    Ok(plus.min(minus))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(g: Grid, c: [f64; 2], w: f64) -> Field {
        Field::from_fn(g, |[x, y]| {
            let r2 = ((x - c[0]).powi(2) + (y - c[1]).powi(2)) / (w * w);
            if r2 < 1.0 {
                (1.0 - r2).powi(3)
            } else {
                0.0
            }
        })
    }

    #[test]
    fn motion_algebra() {
        let g = Motion::glide(0.5);
        let sq = g.compose(&g);
        assert_eq!(sq.linear, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(sq.shift, [1.0, 0.0]);
        let r = Motion::rotation(0.7).compose(&Motion::translation([1.0, 2.0]));
        let back = r.compose(&r.inverse());
        let p = back.apply_point([0.3, -0.2]);
        assert!((p[0] - 0.3).abs() < 1e-14 && (p[1] + 0.2).abs() < 1e-14);
    }

    #[test]
    fn identity_and_exact_rotation() {
        let grid = Grid::new(4.0, 32).unwrap();
        let u = bump(grid, [0.5, -0.25], 0.6);
        assert_eq!(act(&Motion::identity(), &u), u);
        let q = Motion::rotation(PI / 2.0);
        assert!(q.is_grid_exact(&grid));
        let four = (0..4).fold(u.clone(), |acc, _| act(&q, &acc));
        assert_eq!(four, u);
        // rotating about the origin moves (0.5, -0.25) to (0.25, 0.5)
        let rotated = act(&q, &u);
        let expect = bump(grid, [0.25, 0.5], 0.6);
        assert!(rotated.sub(&expect).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn admissibility_verdicts() {
        assert!(check_admissible(&GroupAction::radial()).admissible);
        assert!(check_admissible(&GroupAction::glide(0.5)).admissible);
        assert!(check_admissible(&GroupAction::rotation_zeta(3, true)).admissible);
        let dep = check_admissible(&GroupAction::lattice([1.0, 0.0], [2.0, 0.0]));
        assert!(!dep.admissible);
        assert!(dep.reason.contains("linearly dependent"));
        assert!(!check_admissible(&GroupAction::trivial()).admissible);
    }

    #[test]
    fn snapping_warns_on_large_moves() {
        let grid = Grid::new(4.0, 32).unwrap();
        let (s, warn) = snap_to_grid([1.0, 0.26], &grid);
        assert_eq!(s, [1.0, 0.25]);
        assert!(!warn);
        let (_, warn) = snap_to_grid([1.2, 1.2], &Grid::new(40.0, 32).unwrap());
        assert!(warn);
    }

    #[test]
    fn display_round_trips_config_syntax() {
        assert_eq!(GroupAction::rotation_zeta(2, true).to_string(), "rot-zeta:2");
        assert_eq!(GroupAction::lattice([1.0, 0.0], [0.0, 1.0]).to_string(), "lattice:1,0;0,1");
        assert_eq!(GroupAction::glide(0.5).to_string(), "glide:0.5");
    }
}
