//! Command implementations. Each returns an exit code; outputs go to the
//! `--out` directory after its manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chq_core::solver::{write_trace_csv, MultistartOutcome};
use chq_core::symmetry::check_admissible;
use chq_core::{BarycenterMap, Error, Field, Kernel, KernelTable, Potential, Problem, SolveResult};
use serde_json::{json, Value};

use crate::check::{render_table, run_battery, CheckOptions};
use crate::config::{Config, ConfigError};
use crate::manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

/// A failure with its exit code and a short machine-readable tag.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub tag: &'static str,
    pub message: String,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error[{}]: {}", self.tag, self.message)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self { code: EXIT_CONFIG, tag: "config", message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: EXIT_CONFIG, tag: "io", message: e.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, tag) = match &e {
            Error::Io(_) | Error::BadDump(_) => (EXIT_CONFIG, "io"),
            Error::InvalidGrid(_)
            | Error::GridMismatch
            | Error::GridTooCoarse { .. }
            | Error::GridTooLarge { .. }
            | Error::Inadmissible(_)
            | Error::IndefinitePotential
            | Error::BumpFamily(_) => (EXIT_CONFIG, "config"),
            Error::NotConverged(_) | Error::LineSearchFailed(_) | Error::RieszNotConverged { .. } => {
                (EXIT_NOT_CONVERGED, "not-converged")
            }
            _ => (EXIT_INVARIANT, "numerical"),
        };
        Self { code, tag, message: e.to_string() }
    }
}

pub type CmdResult = std::result::Result<i32, Failure>;

struct Setup {
    pot: Potential,
    table: KernelTable,
}

fn setup(cfg: &Config) -> std::result::Result<Setup, Failure> {
    let pot = cfg.potential()?;
    let table = KernelTable::new(cfg.grid, cfg.solve.tau_split)?;
    Ok(Setup { pot, table })
}

fn trace_file(path: &Path, r: &SolveResult) -> std::result::Result<(), Failure> {
    let w = BufWriter::new(File::create(path)?);
    write_trace_csv(&r.trace, w)?;
    Ok(())
}

fn write_json(path: &Path, v: &Value) -> std::result::Result<(), Failure> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, v).map_err(std::io::Error::other)?;
    writeln!(f)?;
    Ok(())
}

fn summary(r: &SolveResult, bary: &BarycenterMap) -> Value {
    let b = r.breakdown;
    let beta = bary.beta(&r.u).ok();
    json!({
        "phi": b.phi,
        "q_a": b.q_a,
        "v0": b.v0,
        "nehari_j": b.nehari_j,
        "nehari_violation": r.nehari.violation,
        "nehari_class": format!("{:?}", r.nehari.class),
        "cerami": r.cerami,
        "iters": r.iters,
        "converged": r.converged,
        "min_u": r.u.min_value(),
        "max_u": r.u.max_value(),
        "barycenter": beta,
        "invariance_defect": r.certificate.defect,
        "invariant_within_tol": r.certificate.within_tol,
        "sign_changing": r.certificate.sign_changing,
    })
}

fn print_result(label: &str, r: &SolveResult) {
    println!(
        "{label}: phi {:.10} q_a {:.6} v0 {:.6} cerami {:.2e} |J| rel {:.2e} iters {} converged {}",
        r.breakdown.phi, r.breakdown.q_a, r.breakdown.v0, r.cerami, r.nehari.violation, r.iters, r.converged
    );
}

fn single_run(cfg: &Config, out: &Path, command: &str, stem: &str, r: &SolveResult) -> CmdResult {
    let names = [format!("{stem}.chq"), format!("{stem}_trace.csv"), "summary.json".to_string()];
    RunManifest::new(cfg, command, names.to_vec()).write(out)?;
    r.u.save(out.join(&names[0]))?;
    trace_file(&out.join(&names[1]), r)?;
    let bary = BarycenterMap::new(cfg.grid)?;
    write_json(&out.join(&names[2]), &summary(r, &bary))?;
    print_result(stem, r);
    Ok(if r.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn cmd_check(opts: &CheckOptions) -> CmdResult {
    let outcomes = run_battery(opts);
    print!("{}", render_table(&outcomes));
    match outcomes.iter().find(|o| !o.passed) {
        None => Ok(EXIT_OK),
        Some(o) => {
            eprintln!("error[invariant]: {} failed: {}", o.name, o.detail);
            Ok(EXIT_INVARIANT)
        }
    }
}

/// Descent from the first bump of the one-member family.
pub fn cmd_solve(cfg: &Config, out: &Path) -> CmdResult {
    let s = setup(cfg)?;
    let problem = Problem::new(&s.pot, &s.table, cfg.action)?;
    let family = problem.make_bump_family(0, cfg.solve.seed, 0)?;
    let start = problem.admit_start(&family.bumps[0])?;
    let r = problem.descend(&start, &cfg.solve)?;
    single_run(cfg, out, "solve", "solution", &r)
}

pub fn cmd_ground_state(cfg: &Config, out: &Path) -> CmdResult {
    let s = setup(cfg)?;
    let problem = Problem::new(&s.pot, &s.table, cfg.action)?;
    let r = problem.ground_state(&cfg.solve)?;
    single_run(cfg, out, "ground-state", "ground_state", &r)
}

pub fn cmd_multistart(cfg: &Config, out: &Path) -> CmdResult {
    let s = setup(cfg)?;
    let problem = Problem::new(&s.pot, &s.table, cfg.action)?;
    let outcome = problem.multistart(cfg.k, &cfg.solve)?;
    write_multistart(cfg, out, &outcome)?;
    Ok(if outcome.solutions.is_empty() { EXIT_NOT_CONVERGED } else { EXIT_OK })
}

fn write_multistart(cfg: &Config, out: &Path, outcome: &MultistartOutcome) -> std::result::Result<(), Failure> {
    let mut names = Vec::new();
    for i in 0..outcome.solutions.len() {
        names.push(format!("solution_{i:02}.chq"));
        names.push(format!("solution_{i:02}_trace.csv"));
    }
    names.push("summary.json".to_string());
    RunManifest::new(cfg, "multistart", names).write(out)?;
    let bary = BarycenterMap::new(cfg.grid)?;
    let mut sols = Vec::new();
    for (i, r) in outcome.solutions.iter().enumerate() {
        r.u.save(out.join(format!("solution_{i:02}.chq")))?;
        trace_file(&out.join(format!("solution_{i:02}_trace.csv")), r)?;
        sols.push(summary(r, &bary));
        print_result(&format!("solution {i}"), r);
    }
    let unconverged: Vec<Value> = outcome.unconverged.iter().map(|r| summary(r, &bary)).collect();
    let failures: Vec<Value> =
        outcome.failures.iter().map(|f| json!({"start": f.start, "reason": f.reason})).collect();
    println!(
        "{} starts: {} distinct converged, {} unconverged, {} failed",
        outcome.starts,
        outcome.solutions.len(),
        outcome.unconverged.len(),
        outcome.failures.len()
    );
    write_json(
        &out.join("summary.json"),
        &json!({
            "k": cfg.k,
            "starts": outcome.starts,
            "solutions": sols,
            "unconverged": unconverged,
            "failures": failures,
        }),
    )
}

pub fn parse_kernel(s: &str) -> std::result::Result<Kernel, Failure> {
    match s {
        "b0" => Ok(Kernel::B0),
        "b1" => Ok(Kernel::B1),
        "b2" => Ok(Kernel::B2),
        other => Err(Failure { code: EXIT_CONFIG, tag: "config", message: format!("unknown kernel '{other}' (b0, b1, b2)") }),
    }
}

/// `h^2 sum_y K(x - y) g(y)` of a dumped density `g`.
pub fn cmd_convolve(cfg: &Config, out: &Path, input: &Path, kernel: Kernel) -> CmdResult {
    let g = Field::load(input)?;
    g.grid().ensure_same(&cfg.grid).map_err(|_| Failure {
        code: EXIT_CONFIG,
        tag: "config",
        message: format!("{} is on a {:?}, the config grid is {:?}", input.display(), g.grid(), cfg.grid),
    })?;
    let table = KernelTable::new(cfg.grid, cfg.solve.tau_split)?;
    let name = "potential.chq".to_string();
    RunManifest::new(cfg, "convolve", vec![name.clone()]).write(out)?;
    let w = table.convolve(&g, kernel)?;
    w.save(out.join(&name))?;
    println!("wrote {} ({:?}, max |w| {:.6e})", out.join(&name).display(), kernel, w.max_abs());
    Ok(EXIT_OK)
}

pub fn cmd_info(cfg: &Config) -> CmdResult {
    let g = cfg.grid;
    let pot = cfg.potential()?;
    let adm = check_admissible(&cfg.action);
    println!("grid: box [-{0}, {0})^2, n = {1}, h = {2}", g.half_width(), g.n(), g.spacing());
    println!("potential: {} (ess inf {}, sup |a| {})", cfg.potential, pot.ess_inf(), pot.sup_norm());
    println!("symmetry: {}", cfg.action);
    println!("admissible: {} ({})", if adm.admissible { "yes" } else { "no" }, adm.reason);
    println!("ground state certified: {}", if pot.ess_inf() > 0.0 { "yes (ess inf a > 0)" } else { "no" });
    println!("config hash: {}", cfg.hash());
    for w in &cfg.warnings {
        println!("warning: {w}");
    }
    Ok(EXIT_OK)
}

pub fn default_out() -> PathBuf {
    PathBuf::from("chq-out")
}
