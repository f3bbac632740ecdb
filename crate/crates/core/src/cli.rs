//! Command-line driver: convergence studies, single solves and verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
//! 3 numerical failure.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::study::{convergence_study_with, sci, solve_level, validate_levels, StudyOptions};
use crate::analysis::verify::run_suite;
use crate::analysis::ManufacturedCase;
use crate::element::ElementFamily;
use crate::error::{Error, Result};
use crate::solver::SolverKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable consulted for the thread count when `--threads` is absent.
pub const THREADS_ENV: &str = "H3RECT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "h3rect", version, about = "H³-nonconforming n-rectangle elements for the tri-harmonic equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve on a sequence of meshes and report errors and observed orders.
    Convergence(RunArgs),
    /// Solve on a single mesh.
    Solve(RunArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Element family: adini or morley.
    #[arg(long)]
    pub element: Option<String>,
    /// Manufactured case: smooth2d, lshape2d or smooth3d.
    #[arg(long)]
    pub case: Option<String>,
    /// Comma-separated mesh levels N, each double the previous.
    #[arg(long)]
    pub levels: Option<String>,
    /// Single mesh level for `solve`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Gauss points per axis for the stiffness matrix.
    #[arg(long)]
    pub stiffness_q: Option<usize>,
    /// Gauss points per axis for the load vector.
    #[arg(long)]
    pub load_q: Option<usize>,
    /// Gauss points per axis for error norms.
    #[arg(long)]
    pub error_q: Option<usize>,
    /// Graded error quadrature levels on cells at the L-shape corner.
    #[arg(long)]
    pub corner_levels: Option<usize>,
    /// direct or cg.
    #[arg(long)]
    pub solver: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub maxiter: Option<usize>,
    /// Write the report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Report format for `--output`: csv or markdown.
    #[arg(long)]
    pub format: Option<String>,
    /// Write `index value` lines of the solution coefficients (solve only).
    #[arg(long)]
    pub dump_coeffs: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Serial assembly and error integration.
    #[arg(long)]
    pub deterministic: bool,
    /// `key=value` file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// unisolvence, continuity, local-interp, patch or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Comma-separated dimensions.
    #[arg(long, default_value = "2,3")]
    pub dims: String,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

/// Fully resolved settings for `convergence` and `solve`.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub family: ElementFamily,
    pub case: String,
    pub levels: Vec<usize>,
    pub study: StudyOptions,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub dump_coeffs: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub fn parse_family(s: &str) -> Result<ElementFamily> {
    match s.to_ascii_lowercase().as_str() {
        "adini" | "adini-type" | "adinitype" => Ok(ElementFamily::AdiniType),
        "morley" | "morley-type" | "morleytype" => Ok(ElementFamily::MorleyType),
        _ => Err(Error::Config(format!("unknown element '{s}' (expected adini or morley)"))),
    }
}

pub fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Config(format!("'{t}' is not a non-negative integer"))))
        .collect()
}

fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{}:{}: expected key=value", path.display(), k + 1)))?;
        out.insert(key.trim().replace('_', "-"), value.trim().to_string());
    }
    Ok(out)
}

fn lookup<T: std::str::FromStr>(flag: Option<T>, file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
        .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("invalid value '{v}' for {key}"))))
        .transpose()
}

const CONFIG_KEYS: &[&str] = &[
    "element", "case", "levels", "n", "stiffness-q", "load-q", "error-q", "corner-levels", "solver", "tol", "maxiter", "output",
    "format", "dump-coeffs", "threads", "deterministic",
];

impl RunConfig {
    /// Merges flags over the optional config file. `single` selects `--n`
    /// instead of `--levels`.
    pub fn resolve(args: &RunArgs, single: bool) -> Result<RunConfig> {
        let file = match &args.config {
            Some(p) => parse_config_file(p)?,
            None => BTreeMap::new(),
        };
        if let Some(k) = file.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown config key '{k}'")));
        }
        let family = parse_family(&lookup(args.element.clone(), &file, "element")?.unwrap_or_else(|| "adini".into()))?;
        let case = lookup(args.case.clone(), &file, "case")?.unwrap_or_else(|| "smooth2d".into());
        let levels = if single {
            let n = lookup(args.n, &file, "n")?.ok_or_else(|| Error::Config("--n is required".into()))?;
            if n == 0 {
                return Err(Error::Config("N must be positive".into()));
            }
            vec![n]
        } else {
            let l = lookup(args.levels.clone(), &file, "levels")?.ok_or_else(|| Error::Config("--levels is required".into()))?;
            let l = parse_list(&l)?;
            validate_levels(&l)?;
            l
        };
        let mut study = StudyOptions::default();
        if let Some(q) = lookup(args.stiffness_q, &file, "stiffness-q")? {
            study.assembly.stiffness_q = q;
        }
        if let Some(q) = lookup(args.load_q, &file, "load-q")? {
            study.assembly.load_q = q;
        }
        if let Some(q) = lookup(args.error_q, &file, "error-q")? {
            study.error_q = q;
        }
        for (name, q) in [("load", study.assembly.load_q), ("error", study.error_q)] {
            if q == 0 {
                return Err(Error::Config(format!("{name} quadrature needs at least one point")));
            }
        }
        if let Some(l) = lookup(args.corner_levels, &file, "corner-levels")? {
            study.corner_levels = l;
        }
        if let Some(s) = lookup(args.solver.clone(), &file, "solver")? {
            study.solver.kind = s.parse::<SolverKind>()?;
        }
        if let Some(t) = lookup(args.tol, &file, "tol")? {
            if !(t > 0.0) {
                return Err(Error::Config("tolerance must be positive".into()));
            }
            study.solver.tol = t;
        }
        if let Some(m) = lookup(args.maxiter, &file, "maxiter")? {
            study.solver.max_iter = m;
        }
        let deterministic = args.deterministic || lookup(None, &file, "deterministic")?.unwrap_or(false);
        study.assembly.parallel = !deterministic;
        let format = match lookup(args.format.clone(), &file, "format")?.as_deref() {
            None | Some("csv") => OutputFormat::Csv,
            Some("markdown") | Some("md") => OutputFormat::Markdown,
            Some(f) => return Err(Error::Config(format!("unknown format '{f}' (expected csv or markdown)"))),
        };
        let threads = match lookup(args.threads, &file, "threads")? {
            Some(t) => Some(t),
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => Some(v.trim().parse().map_err(|_| Error::Config(format!("{THREADS_ENV}='{v}' is not an integer")))?),
                Err(_) => None,
            },
        };
        if threads == Some(0) {
            return Err(Error::Config("thread count must be positive".into()));
        }
        let output = lookup(args.output.clone(), &file, "output")?;
        let dump_coeffs = lookup(args.dump_coeffs.clone(), &file, "dump-coeffs")?;

        // Reject unsupported combinations before any work.
        let c = ManufacturedCase::by_name(&case)?;
        family.validate(c.dim()).map_err(|e| Error::Config(e.to_string()))?;
        Ok(RunConfig { family, case, levels, study, output, format, dump_coeffs, threads })
    }
}

fn init_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        // A pool may already exist when called from tests; the first one wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_convergence(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    init_threads(cfg.threads);
    let case = ManufacturedCase::by_name(&cfg.case)?;
    let report = convergence_study_with(&case, cfg.family, &cfg.levels, &cfg.study, |lvl| {
        eprintln!(
            "N={} dofs={} free={} e3={} solve {:.2}s",
            lvl.n,
            lvl.num_dofs,
            lvl.num_free,
            sci(lvl.errors[3]),
            lvl.solve.seconds
        );
    })?;
    writeln!(out, "{} on {}", cfg.family, case.name)?;
    write!(out, "{}", report.to_markdown())?;
    if let Some(o) = report.final_orders() {
        writeln!(out, "final orders: L2 {:.2}, H1 {:.2}, H2 {:.2}, H3 {:.2}", o[0], o[1], o[2], o[3])?;
    }
    if let Some(path) = &cfg.output {
        let text = match cfg.format {
            OutputFormat::Csv => report.to_csv(),
            OutputFormat::Markdown => report.to_markdown(),
        };
        write_file(path, &text)?;
    }
    Ok(())
}

pub fn cmd_solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    init_threads(cfg.threads);
    let case = ManufacturedCase::by_name(&cfg.case)?;
    let n = cfg.levels[0];
    let sol = solve_level(&case, cfg.family, n, &cfg.study).map_err(|e| Error::Level { level: n, source: Box::new(e) })?;
    let r = &sol.result;
    writeln!(out, "{} on {} with N={} ({} DoFs, {} free)", cfg.family, case.name, n, r.num_dofs, r.num_free)?;
    for (label, v) in ["L2", "H1", "H2", "H3"].iter().zip(r.errors) {
        writeln!(out, "{label} error: {}", sci(v))?;
    }
    writeln!(
        out,
        "solver: {} iterations={} relative residual={} time={:.3}s",
        r.solve.method,
        r.solve.iterations,
        sci(r.solve.relative_residual),
        r.solve.seconds
    )?;
    if let Some(path) = &cfg.output {
        let lines = ["N,e0,e1,e2,e3".to_string(), format!("{},{},{},{},{}", n, sci(r.errors[0]), sci(r.errors[1]), sci(r.errors[2]), sci(r.errors[3]))];
        write_file(path, &(lines.join("\n") + "\n"))?;
    }
    if let Some(path) = &cfg.dump_coeffs {
        let text: String = sol.coefficients.iter().enumerate().map(|(i, v)| format!("{i} {v:.17e}\n")).collect();
        write_file(path, &text)?;
    }
    Ok(())
}

/// Runs the suites; `Ok(false)` means some item failed.
pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<bool> {
    init_threads(args.threads);
    let dims = parse_list(&args.dims)?;
    if let Some(&d) = dims.iter().find(|&&d| !(1..=4).contains(&d)) {
        return Err(Error::Config(format!("dimension {d} outside 1..=4")));
    }
    let report = run_suite(&args.suite, &dims)?;
    write!(out, "{report}")?;
    let failed = report.failures().count();
    writeln!(out, "{} checks, {} failed", report.items.len(), failed)?;
    Ok(failed == 0)
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Convergence(a) => RunConfig::resolve(a, false).and_then(|c| cmd_convergence(&c, out)).map(|_| true),
        Command::Solve(a) => RunConfig::resolve(a, true).and_then(|c| cmd_solve(&c, out)).map(|_| true),
        Command::Verify(a) => cmd_verify(a, out),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_VERIFY,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let c = run(std::iter::once("h3rect").chain(args.iter().copied()), &mut buf);
        (c, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn config_errors_exit_two() {
        assert_eq!(code(&["convergence", "--levels", "4"]).0, EXIT_CONFIG);
        assert_eq!(code(&["convergence", "--levels", "4,6"]).0, EXIT_CONFIG);
        assert_eq!(code(&["solve", "--n", "0"]).0, EXIT_CONFIG);
        assert_eq!(code(&["solve", "--n", "2", "--element", "hermite"]).0, EXIT_CONFIG);
        assert_eq!(code(&["solve", "--n", "2", "--case", "smooth4d"]).0, EXIT_CONFIG);
        assert_eq!(code(&["solve", "--n", "2", "--stiffness-q", "4"]).0, EXIT_CONFIG);
        assert_eq!(code(&["verify", "--suite", "nothing"]).0, EXIT_CONFIG);
        assert_eq!(code(&["frobnicate"]).0, EXIT_CONFIG);
    }

    #[test]
    fn cg_non_convergence_exits_three() {
        let (c, _) = code(&["solve", "--n", "8", "--solver", "cg", "--maxiter", "2"]);
        assert_eq!(c, EXIT_NUMERICAL);
    }

    #[test]
    fn solve_prints_norms() {
        let (c, out) = code(&["solve", "--n", "4", "--element", "morley"]);
        assert_eq!(c, EXIT_OK);
        assert!(out.contains("H3 error: "));
    }

    #[test]
    fn config_file_and_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "# study\nelement = morley\nlevels=2,4\nsolver=bogus\n").unwrap();
        let args = RunArgs { config: Some(cfg.clone()), solver: Some("cg".into()), ..Default::default() };
        let rc = RunConfig::resolve(&args, false).unwrap();
        assert_eq!(rc.family, ElementFamily::MorleyType);
        assert_eq!(rc.levels, vec![2, 4]);
        assert_eq!(rc.study.solver.kind, SolverKind::Cg);

        fs::write(&cfg, "colour=blue\n").unwrap();
        assert!(RunConfig::resolve(&RunArgs { config: Some(cfg), n: Some(2), ..Default::default() }, true).is_err());
    }
}
