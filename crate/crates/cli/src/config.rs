//! `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored, keys may appear once, and
//! unknown keys are rejected. The canonical form lists the given entries
//! sorted by key, one `key = value` per line; it is what the run hash covers.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::path::PathBuf;

use chq_core::{Field, GroupAction, Grid, Potential, SolveConfig};
use sha2::{Digest, Sha256};

pub const KEYS: &[&str] = &[
    "a",
    "armijo_c",
    "backtrack_factor",
    "box",
    "cerami_tol",
    "k",
    "max_iters",
    "n",
    "random_samples",
    "riesz_tol",
    "seed",
    "step_init",
    "symmetry",
    "tau",
];

pub const DEFAULT_BOX: f64 = 12.0;
pub const DEFAULT_N: usize = 128;
pub const DEFAULT_K: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}{key}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn at(line: Option<usize>, key: &str, message: impl Into<String>) -> Self {
        Self { line, key: key.to_string(), message: message.into() }
    }
}

/// How `a(x)` is produced on the grid.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Const(f64),
    /// `base + amp cos(2 pi k1 x1) cos(2 pi k2 x2)`.
    Cos2d { base: f64, amp: f64, k1: f64, k2: f64 },
    /// `1 - depth exp(-|x|^2 / radius^2)`.
    RadialWell { depth: f64, radius: f64 },
    File(PathBuf),
}

fn numbers(s: &str, count: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", p.trim())))
        .collect::<Result<_, _>>()?;
    if v.len() != count {
        return Err(format!("expected {count} comma-separated numbers, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(v)
}

impl PotentialSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        let (kind, args) = s.split_once(':').ok_or("expected <kind>:<arguments>")?;
        match kind.trim() {
            "const" => Ok(Self::Const(numbers(args, 1)?[0])),
            "cos2d" => {
                let v = numbers(args, 4)?;
                Ok(Self::Cos2d { base: v[0], amp: v[1], k1: v[2], k2: v[3] })
            }
            "radial-well" => {
                let v = numbers(args, 2)?;
                if v[1] <= 0.0 {
                    return Err("radius must be positive".into());
                }
                Ok(Self::RadialWell { depth: v[0], radius: v[1] })
            }
            "file" if !args.trim().is_empty() => Ok(Self::File(PathBuf::from(args.trim()))),
            other => Err(format!("unknown potential kind '{other}' (const, cos2d, radial-well, file)")),
        }
    }

    pub fn build(&self, grid: Grid) -> chq_core::Result<Potential> {
        match self {
            Self::Const(v) => Potential::constant(grid, *v),
            &Self::Cos2d { base, amp, k1, k2 } => {
                Potential::new(Field::from_fn(grid, |[x, y]| base + amp * (TAU * k1 * x).cos() * (TAU * k2 * y).cos()))
            }
            &Self::RadialWell { depth, radius } => {
                Potential::new(Field::from_fn(grid, |[x, y]| 1.0 - depth * (-(x * x + y * y) / (radius * radius)).exp()))
            }
            Self::File(path) => {
                let a = Field::load(path)?;
                grid.ensure_same(a.grid())?;
                Potential::new(a)
            }
        }
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(v) => write!(f, "const:{v}"),
            Self::Cos2d { base, amp, k1, k2 } => write!(f, "cos2d:{base},{amp},{k1},{k2}"),
            Self::RadialWell { depth, radius } => write!(f, "radial-well:{depth},{radius}"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

pub fn parse_symmetry(s: &str) -> Result<GroupAction, String> {
    let s = s.trim();
    let (kind, args) = s.split_once(':').unwrap_or((s, ""));
    let order = |a: &str| a.trim().parse::<u32>().map_err(|_| format!("'{a}' is not a rotation order"));
    match kind {
        "trivial" => Ok(GroupAction::trivial()),
        "radial" => Ok(GroupAction::radial()),
        "rot" => Ok(GroupAction::rotation_zeta(order(args)?, false)),
        "rot-zeta" => Ok(GroupAction::rotation_zeta(order(args)?, true)),
        "lattice" => {
            let (a, b) = args.split_once(';').ok_or("expected lattice:b1x,b1y;b2x,b2y")?;
            let (a, b) = (numbers(a, 2)?, numbers(b, 2)?);
            Ok(GroupAction::lattice([a[0], a[1]], [b[0], b[1]]))
        }
        "glide" => Ok(GroupAction::glide(numbers(args, 1)?[0])),
        other => Err(format!("unknown symmetry '{other}' (trivial, radial, rot:m, rot-zeta:m, lattice, glide:s)")),
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub grid: Grid,
    pub potential: PotentialSpec,
    pub action: GroupAction,
    pub solve: SolveConfig,
    pub k: usize,
    pub warnings: Vec<String>,
    entries: BTreeMap<String, (String, Option<usize>)>,
}

impl Default for Config {
    fn default() -> Self {
        Self::from_entries(BTreeMap::new()).expect("defaults are valid")
    }
}

fn value<T: std::str::FromStr>(
    entries: &BTreeMap<String, (String, Option<usize>)>,
    key: &str,
    default: T,
) -> Result<T, ConfigError> {
    match entries.get(key) {
        None => Ok(default),
        Some((v, line)) => v.parse::<T>().map_err(|_| ConfigError::at(*line, key, format!("cannot parse '{v}'"))),
    }
}

impl Config {
    fn from_entries(entries: BTreeMap<String, (String, Option<usize>)>) -> Result<Self, ConfigError> {
        let line = |k: &str| entries.get(k).and_then(|e| e.1);
        let half_width: f64 = value(&entries, "box", DEFAULT_BOX)?;
        let n: usize = value(&entries, "n", DEFAULT_N)?;
        let grid = Grid::new(half_width, n).map_err(|e| ConfigError::at(line("box").or(line("n")), "box/n", e.to_string()))?;
        let potential = match entries.get("a") {
            None => PotentialSpec::Const(1.0),
            Some((v, l)) => PotentialSpec::parse(v).map_err(|m| ConfigError::at(*l, "a", m))?,
        };
        let action = match entries.get("symmetry") {
            None => GroupAction::radial(),
            Some((v, l)) => parse_symmetry(v).map_err(|m| ConfigError::at(*l, "symmetry", m))?,
        };
        let d = SolveConfig::default();
        let solve = SolveConfig {
            max_iters: value(&entries, "max_iters", d.max_iters)?,
            cerami_tol: value(&entries, "cerami_tol", d.cerami_tol)?,
            riesz_tol: value(&entries, "riesz_tol", d.riesz_tol)?,
            step_init: value(&entries, "step_init", d.step_init)?,
            backtrack_factor: value(&entries, "backtrack_factor", d.backtrack_factor)?,
            armijo_c: value(&entries, "armijo_c", d.armijo_c)?,
            tau_split: value(&entries, "tau", d.tau_split)?,
            seed: value(&entries, "seed", d.seed)?,
            random_samples: value(&entries, "random_samples", d.random_samples)?,
        };
        solve.validate().map_err(|e| ConfigError::at(None, "solver", e.to_string()))?;
        let k = value(&entries, "k", DEFAULT_K)?;
        let mut warnings = Vec::new();
        if let chq_core::ActionKind::LatticeTranslation { b1, b2 } = action.kind {
            let h = grid.spacing();
            for b in [b1, b2] {
                let (s, far) = chq_core::symmetry::snap_to_grid(b, &grid);
                if (s[0] - b[0]).abs().max((s[1] - b[1]).abs()) > 1e-9 * h {
                    let how = if far { "more than h/2" } else { "less than h/2" };
                    warnings.push(format!(
                        "line {}: lattice vector ({}, {}) is not a whole number of cells; bump centers snap {how} to ({}, {})",
                        line("symmetry").unwrap_or(0),
                        b[0],
                        b[1],
                        s[0],
                        s[1]
                    ));
                }
            }
        }
        Ok(Self { grid, potential, action, solve, k, warnings, entries })
    }

    /// Replaces (or adds) one entry and revalidates; used for command line flags.
    pub fn with_override(&self, key: &str, value: &str) -> Result<Self, ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::at(None, key, "unknown key"));
        }
        let mut entries = self.entries.clone();
        entries.insert(key.to_string(), (value.trim().to_string(), None));
        Self::from_entries(entries)
    }

    /// Canonical text: given entries sorted by key.
    pub fn serialize(&self) -> String {
        self.entries.iter().map(|(k, (v, _))| format!("{k} = {v}\n")).collect()
    }

    /// Hex SHA-256 of [`Config::serialize`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.serialize().as_bytes()))
    }

    pub fn potential(&self) -> chq_core::Result<Potential> {
        self.potential.build(self.grid)
    }
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = Some(i + 1);
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, val) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, content, "expected key = value"))?;
        let (key, val) = (key.trim(), val.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::at(line, key, "unknown key"));
        }
        if val.is_empty() {
            return Err(ConfigError::at(line, key, "missing value"));
        }
        if entries.insert(key.to_string(), (val.to_string(), line)).is_some() {
            return Err(ConfigError::at(line, key, "duplicate key"));
        }
    }
    Config::from_entries(entries)
}

pub fn canonical(text: &str) -> Result<String, ConfigError> {
    Ok(parse_config(text)?.serialize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chq_core::ActionKind;

    #[test]
    fn constant_potential_and_defaults() {
        let c = parse_config("a = const:1\n").unwrap();
        assert_eq!(c.potential().unwrap().ess_inf(), 1.0);
        let d = parse_config("").unwrap();
        assert_eq!(d.grid, Grid::new(DEFAULT_BOX, DEFAULT_N).unwrap());
        assert_eq!(d.solve, SolveConfig::default());
        assert_eq!(d.k, DEFAULT_K);
    }

    #[test]
    fn rot_zeta_symmetry() {
        let c = parse_config("symmetry = rot-zeta:2").unwrap();
        assert_eq!(c.action.kind, ActionKind::RotationZeta { m: 2 });
        assert!(c.action.zeta_nontrivial);
    }

    #[test]
    fn round_trip_is_canonical() {
        let text = "# periodic\nsymmetry = lattice:1,0;0,1\n  a=cos2d:1,0.5,1,1  \nn = 128\nbox = 8\n";
        let c = parse_config(text).unwrap();
        let s = c.serialize();
        assert_eq!(s, canonical(text).unwrap());
        assert_eq!(parse_config(&s).unwrap().serialize(), s);
        assert_eq!(s.lines().next(), Some("a = cos2d:1,0.5,1,1"));
        assert_eq!(c.hash(), parse_config(&s).unwrap().hash());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_config("n = 64\nfoo = 1\n").unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (Some(2), "foo"));
        let e = parse_config("n = 64\n\nn = 32").unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = parse_config("a = cos2d:1,2\n").unwrap_err();
        assert_eq!(e.line, Some(1));
        assert!(parse_config("n = 15").is_err());
        assert!(parse_config("symmetry = spiral").is_err());
        assert!(parse_config("backtrack_factor = 1.5").is_err());
    }

    #[test]
    fn lattice_snap_warning() {
        let c = parse_config("box = 12\nn = 128\nsymmetry = lattice:1,0;0,1").unwrap();
        assert_eq!(c.warnings.len(), 2);
        let c = parse_config("box = 8\nn = 128\nsymmetry = lattice:1,0;0,1").unwrap();
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn overrides_revalidate() {
        let c = Config::default().with_override("n", "64").unwrap();
        assert_eq!(c.grid.n(), 64);
        assert!(c.serialize().contains("n = 64"));
        assert!(c.with_override("n", "7").is_err());
        assert!(c.with_override("colour", "red").is_err());
    }
}
