//! `ppbench` argument parsing and subcommands.
//!
//! Exit codes: 0 on success, 1 when a solver or input file fails, 2 for usage
//! and configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use proxproj::apps::bp::BpProblem;
use proxproj::gen::{gen_bp, gen_emd_pair, gen_smc, gen_spcp, EmdKind, EMD_EPS};
use proxproj::instance::ProblemInstance;
use proxproj::projection::ConstraintSpec;
use proxproj::apps::emd::EmdProblem;
use proxproj::apps::smc::SmcProblem;
use proxproj::apps::spcp::SpcpProblem;
use proxproj::{Error, Result};

use crate::io;
use crate::run::{content_hash, execute, parse_key_values, problem_bytes, summary_line, with_suffix, write_artifacts, Manifest, MethodTag, RunSettings};
use crate::table::{table_csv, table_smc, TableConfig};

#[derive(Parser, Debug)]
#[command(name = "ppbench", version, about = "Proximal projection solvers and comparison methods", args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Basis pursuit: min ||x||_1 s.t. Ax = b.
    Bp {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 500)]
        m: usize,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Fraction of nonzeros in the planted vector.
        #[arg(long, default_value_t = 0.05)]
        p: f64,
        /// Load A instead of generating it (PPMAT1 or .csv); needs --b.
        #[arg(long, requires = "b")]
        matrix: Option<PathBuf>,
        #[arg(long, requires = "matrix")]
        b: Option<PathBuf>,
    },
    /// Stable principal component pursuit.
    Spcp {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 100)]
        n1: usize,
        #[arg(long, default_value_t = 100)]
        n2: usize,
        #[arg(long, default_value_t = 5)]
        rank: usize,
        #[arg(long, default_value_t = 0.05)]
        sparse_frac: f64,
        #[arg(long, default_value_t = 1e-3)]
        noise: f64,
        /// Weight of ||S||_1; defaults to 1/sqrt(max(n1, n2)).
        #[arg(long)]
        weight: Option<f64>,
    },
    /// Earth mover's distance on an n x n grid.
    Emd {
        #[command(flatten)]
        run: RunArgs,
        /// Grid side; defaults to 16, or the image side for `--kind pgm`.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = EmdSource::Points)]
        kind: EmdSource,
        /// Source cell `row,col` for point masses.
        #[arg(long, default_value = "0,0")]
        from: String,
        /// Target cell `row,col`; defaults to the opposite corner.
        #[arg(long)]
        to: Option<String>,
        #[arg(long, default_value_t = 3)]
        blobs: usize,
        #[arg(long)]
        rho0: Option<PathBuf>,
        #[arg(long)]
        rho1: Option<PathBuf>,
        /// Use 1 - intensity, so dark pixels carry mass.
        #[arg(long)]
        invert: bool,
        /// Grid spacing.
        #[arg(long)]
        h: Option<f64>,
    },
    /// Stable matrix completion.
    Smc {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        rank: usize,
        #[arg(long, default_value_t = 5.0)]
        oversample: f64,
        /// Noise standard deviation on observed entries.
        #[arg(long)]
        noise: Option<f64>,
    },
    /// Projects x onto {u : ||Au - b|| <= eps}.
    Project {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Where to write the projected vector (PPVEC1, or .csv).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        tau_tol: f64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Writes a generated instance as PPMAT1/PPVEC1 files under the `--out` prefix.
    Gen {
        #[arg(long, value_enum)]
        problem: GenProblem,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        p: f64,
        #[arg(long, default_value_t = 5)]
        rank: usize,
        #[arg(long, default_value_t = 5.0)]
        oversample: f64,
        #[arg(long, default_value_t = 0.05)]
        sparse_frac: f64,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 3)]
        blobs: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Runs SMC methods over (rank, oversample) rows and seeds, writing one CSV row per configuration.
    TableSmc {
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Comma-separated `rank:oversample` pairs.
        #[arg(long, default_value = "5:5,10:4")]
        rows: String,
        #[arg(long, default_value = "1,2,3,4,5")]
        seeds: String,
        #[arg(long, default_value = "pp,vasalm,spg")]
        methods: String,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// `pp` or a comparison method (lb, lmm, pdhg, vasalm, pspg, pg, gprox, spg).
    #[arg(long, default_value = "pp")]
    method: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    alpha: Option<f64>,
    /// Overrides the instance's eps.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Stopping threshold on the relative update; 0 runs all iterations.
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Output prefix for `<out>.csv` and `<out>.manifest`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    log_every: usize,
    #[arg(long)]
    tau_tol: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum EmdSource {
    Points,
    Blobs,
    Pgm,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum GenProblem {
    Bp,
    Spcp,
    Emd,
    Smc,
}

enum Failure {
    Usage(String),
    Solver(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Usage(msg),
            other => Failure::Solver(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match splice_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(stdout, "{}", e.render())
            } else {
                write!(stderr, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.cmd, stdout) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Solver(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// Inserts `--key value` pairs from a `--config` file right after the subcommand,
/// so later command-line flags override them.
fn splice_config(argv: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = Some(strs.get(i + 1).ok_or("--config needs a path")?.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let pairs = parse_key_values(&text).map_err(|e| format!("{path}: {e}"))?;
    let Some(sub) = strs.iter().skip(1).position(|a| !a.starts_with('-')) else {
        return Ok(argv);
    };
    let at = sub + 2;
    let mut out: Vec<OsString> = argv[..at].to_vec();
    for (k, v) in pairs {
        let key = k.replace('_', "-");
        if key == "config" {
            return Err(format!("{path}: config files cannot nest"));
        }
        if matches!(v.as_str(), "true" | "yes") {
            out.push(format!("--{key}").into());
        } else if !matches!(v.as_str(), "false" | "no") {
            out.push(format!("--{key}").into());
            out.push(v.into());
        }
    }
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

fn dispatch(cmd: Cmd, stdout: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Cmd::Bp { run, m, n, p, matrix, b } => {
            let mut man = Manifest::default();
            man.set("app", "bp");
            let problem = match (matrix, b) {
                (Some(mp), Some(bp)) => {
                    let a = io::read_matrix(&mp)?;
                    let bv = io::read_vector_any(&bp)?;
                    man.set("input_matrix", mp.display());
                    man.set("input_b", bp.display());
                    BpProblem::new(a, bv)?
                }
                _ => {
                    man.set("m", m);
                    man.set("n", n);
                    man.set("p", p);
                    man.set("seed", run.seed);
                    gen_bp(m, n, p, run.seed)?.problem
                }
            };
            if run.eps.is_some_and(|e| e != 0.0) {
                return Err(Failure::Usage("basis pursuit is equality constrained; --eps must be 0".into()));
            }
            solve(ProblemInstance::Bp(problem), &run, man, stdout)
        }
        Cmd::Spcp { run, n1, n2, rank, sparse_frac, noise, weight } => {
            let mut man = Manifest::default();
            man.set("app", "spcp");
            man.set("n1", n1);
            man.set("n2", n2);
            man.set("rank", rank);
            man.set("sparse_frac", sparse_frac);
            man.set("noise", noise);
            man.set("seed", run.seed);
            let inst = gen_spcp(n1, n2, rank, sparse_frac, noise, run.seed)?;
            let eps = run.eps.unwrap_or(inst.problem.eps());
            let lambda = weight.or(Some(inst.problem.lambda()));
            let problem = SpcpProblem::new(inst.problem.m().clone(), lambda, eps)?;
            solve(ProblemInstance::Spcp(problem), &run, man, stdout)
        }
        Cmd::Emd { run, n, kind, from, to, blobs, rho0, rho1, invert, h } => {
            let mut man = Manifest::default();
            man.set("app", "emd");
            man.set("kind", format!("{kind:?}").to_lowercase());
            let eps = run.eps.unwrap_or(EMD_EPS);
            let mut n = n.unwrap_or(16);
            let gen_kind = match kind {
                EmdSource::Points => {
                    let from = parse_cell(&from)?;
                    let to = match to {
                        Some(t) => parse_cell(&t)?,
                        None => (n.saturating_sub(1), n.saturating_sub(1)),
                    };
                    man.set("from", format!("{},{}", from.0, from.1));
                    man.set("to", format!("{},{}", to.0, to.1));
                    EmdKind::PointMasses { from, to }
                }
                EmdSource::Blobs => {
                    man.set("blobs", blobs);
                    EmdKind::Blobs { count: blobs }
                }
                EmdSource::Pgm => {
                    let (Some(p0), Some(p1)) = (rho0, rho1) else {
                        return Err(Failure::Usage("--kind pgm needs --rho0 and --rho1".into()));
                    };
                    let load = |p: &Path| -> Result<_> {
                        let img = io::read_pgm(p)?;
                        Ok(if invert { img.map(|v| 1.0 - v) } else { img })
                    };
                    let (r0, r1) = (load(&p0)?, load(&p1)?);
                    n = r0.nrows();
                    man.set("input_rho0", p0.display());
                    man.set("input_rho1", p1.display());
                    man.set("invert", invert);
                    EmdKind::Loaded { rho0: r0, rho1: r1 }
                }
            };
            man.set("n", n);
            man.set("seed", run.seed);
            let base = gen_emd_pair(&gen_kind, n, run.seed)?;
            if let Some(h) = h {
                man.set("h", h);
            }
            let problem = EmdProblem::new(base.rho0().clone(), base.rho1().clone(), h, eps)?;
            solve(ProblemInstance::Emd(problem), &run, man, stdout)
        }
        Cmd::Smc { run, n, rank, oversample, noise } => {
            let mut man = Manifest::default();
            man.set("app", "smc");
            man.set("n", n);
            man.set("rank", rank);
            man.set("oversample", oversample);
            man.set("seed", run.seed);
            if let Some(s) = noise {
                man.set("noise", s);
            }
            let inst = gen_smc(n, rank, oversample, noise, run.seed)?;
            let problem = match run.eps {
                Some(eps) => SmcProblem::new(
                    inst.problem.m_obs().clone(),
                    inst.problem.omega().clone(),
                    eps,
                    Some(inst.problem.residual_scale()),
                )?,
                None => inst.problem,
            };
            solve(ProblemInstance::Smc(problem), &run, man, stdout)
        }
        Cmd::Project { matrix, b, x, eps, out, tau_tol, config: _ } => {
            let a = io::read_matrix(&matrix)?;
            let bv = io::read_vector_any(&b)?;
            let xv = io::read_vector_any(&x)?;
            if xv.len() != a.ncols() {
                return Err(Error::Shape(format!("x has length {} but A has {} columns", xv.len(), a.ncols())).into());
            }
            let spec = ConstraintSpec::new(a, bv, eps)?;
            let u = spec.project(&xv, tau_tol)?;
            if let Some(path) = &out {
                if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                    let col = proxproj::linalg::DenseMatrix::from_column_slice(u.len(), 1, u.as_slice());
                    io::write_matrix_any(path, &col)?;
                } else {
                    io::write_vector(path, &u)?;
                }
            }
            out_line(stdout, format!("residual_norm {:.17e}", spec.residual(&u).norm()))?;
            if out.is_none() {
                let vals: Vec<String> = u.iter().map(|v| format!("{v:e}")).collect();
                out_line(stdout, vals.join(" "))?;
            }
            Ok(())
        }
        Cmd::Gen { problem, seed, out, m, n, p, rank, oversample, sparse_frac, noise, blobs, config: _ } => {
            let mut man = Manifest::default();
            man.set("seed", seed);
            let written = match problem {
                GenProblem::Bp => {
                    let inst = gen_bp(m, n, p, seed)?;
                    man.set("app", "bp");
                    man.set("m", m);
                    man.set("n", n);
                    man.set("p", p);
                    let a = with_suffix(&out, ".A.ppmat");
                    let bp = with_suffix(&out, ".b.ppvec");
                    let xs = with_suffix(&out, ".xstar.ppvec");
                    io::write_matrix(&a, inst.problem.a())?;
                    io::write_vector(&bp, inst.problem.b())?;
                    io::write_vector(&xs, &inst.x_star)?;
                    vec![a, bp, xs]
                }
                GenProblem::Smc => {
                    let inst = gen_smc(n, rank, oversample, noise, seed)?;
                    man.set("app", "smc");
                    man.set("n", n);
                    man.set("rank", rank);
                    man.set("oversample", oversample);
                    man.set("eps", inst.problem.eps());
                    let omega = inst.problem.omega();
                    let mask = proxproj::linalg::DenseMatrix::from_fn(n, n, |i, j| if omega.contains(i, j) { 1.0 } else { 0.0 });
                    let files = [
                        (with_suffix(&out, ".obs.ppmat"), inst.problem.m_obs().clone()),
                        (with_suffix(&out, ".mask.ppmat"), mask),
                        (with_suffix(&out, ".planted.ppmat"), inst.m),
                    ];
                    for (path, mat) in &files {
                        io::write_matrix(path, mat)?;
                    }
                    files.into_iter().map(|(p, _)| p).collect()
                }
                GenProblem::Spcp => {
                    let sigma = noise.unwrap_or(1e-3);
                    let inst = gen_spcp(m, n, rank, sparse_frac, sigma, seed)?;
                    man.set("app", "spcp");
                    man.set("n1", m);
                    man.set("n2", n);
                    man.set("rank", rank);
                    man.set("sparse_frac", sparse_frac);
                    man.set("eps", inst.problem.eps());
                    let files = [
                        (with_suffix(&out, ".M.ppmat"), inst.problem.m().clone()),
                        (with_suffix(&out, ".L.ppmat"), inst.l_star),
                        (with_suffix(&out, ".S.ppmat"), inst.s_star),
                    ];
                    for (path, mat) in &files {
                        io::write_matrix(path, mat)?;
                    }
                    files.into_iter().map(|(p, _)| p).collect()
                }
                GenProblem::Emd => {
                    let inst = gen_emd_pair(&EmdKind::Blobs { count: blobs }, n, seed)?;
                    man.set("app", "emd");
                    man.set("n", n);
                    man.set("blobs", blobs);
                    let files = [
                        (with_suffix(&out, ".rho0.ppmat"), inst.rho0().clone()),
                        (with_suffix(&out, ".rho1.ppmat"), inst.rho1().clone()),
                    ];
                    for (path, mat) in &files {
                        io::write_matrix(path, mat)?;
                    }
                    files.into_iter().map(|(p, _)| p).collect()
                }
            };
            let mut bytes = Vec::new();
            for (i, path) in written.iter().enumerate() {
                man.set(&format!("output_{i}"), path.display());
                bytes.extend(fs::read(path).map_err(Error::from)?);
            }
            man.set("content_hash", content_hash(&bytes));
            fs::write(with_suffix(&out, ".manifest"), man.render()).map_err(Error::from)?;
            for path in &written {
                out_line(stdout, path.display().to_string())?;
            }
            Ok(())
        }
        Cmd::TableSmc { n, rows, seeds, methods, tol, max_iters, alpha, noise, out, config: _ } => {
            let configs = parse_list(&rows, |item| {
                let (r, o) = item.split_once(':')?;
                Some(TableConfig {
                    n,
                    rank: r.trim().parse().ok()?,
                    oversample: o.trim().parse().ok()?,
                })
            })
            .ok_or_else(|| Failure::Usage(format!("bad --rows '{rows}', expected rank:oversample,...")))?;
            let seeds: Vec<u64> = parse_list(&seeds, |s| s.trim().parse().ok())
                .ok_or_else(|| Failure::Usage(format!("bad --seeds '{seeds}'")))?;
            let methods: Vec<MethodTag> = methods.split(',').map(|m| m.trim().parse()).collect::<Result<_>>()?;
            let base = RunSettings {
                alpha,
                max_iters,
                tol,
                ..RunSettings::new(MethodTag::Pp)
            };
            let table = table_smc(&configs, &seeds, &methods, &base, noise)?;
            let csv = table_csv(&table)?;
            match out {
                Some(path) => fs::write(with_suffix(&path, ".csv"), &csv).map_err(Error::from)?,
                None => stdout.write_all(&csv).map_err(Error::from)?,
            }
            Ok(())
        }
    }
}

fn solve(p: ProblemInstance, run: &RunArgs, mut man: Manifest, stdout: &mut dyn Write) -> CliResult<()> {
    let settings = RunSettings {
        method: run.method.parse()?,
        alpha: run.alpha,
        max_iters: run.max_iters,
        tol: run.tol,
        log_every: run.log_every,
        tau_tol: run.tau_tol,
        lambda: run.lambda,
        mu: run.mu,
        eta: run.eta,
        sigma: run.sigma,
        tau: run.tau,
    };
    settings.record(&mut man);
    man.set("eps", p.eps());
    man.set("input_hash", content_hash(&problem_bytes(&p)));
    if let Some(c) = &run.config {
        man.set("config", c.display());
    }
    let outcome = execute(&p, &settings)?;
    if let Some(out) = &run.out {
        write_artifacts(out, &outcome.log, &mut man)?;
    }
    if let Some(r) = outcome.log.last() {
        log::info!("final objective {:e}, violation {:e}", r.objective, r.violation);
    }
    out_line(stdout, summary_line(outcome.method, &outcome.log))
}

fn out_line(stdout: &mut dyn Write, s: String) -> CliResult<()> {
    writeln!(stdout, "{s}").map_err(|e| Failure::Solver(e.into()))
}

fn parse_cell(s: &str) -> CliResult<(usize, usize)> {
    s.split_once(',')
        .and_then(|(r, c)| Some((r.trim().parse().ok()?, c.trim().parse().ok()?)))
        .ok_or_else(|| Failure::Usage(format!("bad cell '{s}', expected row,col")))
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    let v: Option<Vec<T>> = s.split(',').filter(|t| !t.trim().is_empty()).map(f).collect();
    v.filter(|v| !v.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ppbench").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_str(&["bp", "--bogus"]).0, 2);
        assert_eq!(run_str(&["nope"]).0, 2);
        assert_eq!(run_str(&["bp", "--method", "zzz", "--m", "2", "--n", "4"]).0, 2);
        assert_eq!(run_str(&["emd", "--from", "1;2"]).0, 2);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("table-smc"));
    }

    #[test]
    fn small_bp_run_prints_summary() {
        let (code, out, err) = run_str(&["bp", "--m", "5", "--n", "20", "--p", "0.1", "--max-iters", "3", "--tol", "0"]);
        assert_eq!(code, 0, "{err}");
        let fields: Vec<&str> = out.split_whitespace().collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(&fields[..2], &["pp", "3"]);
    }

    #[test]
    fn config_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.cfg");
        fs::write(&cfg, "max_iters = 4\nm = 5\nn = 20\ntol = 0\n").unwrap();
        let c = cfg.to_str().unwrap();
        let (code, out, err) = run_str(&["bp", "--config", c]);
        assert_eq!(code, 0, "{err}");
        assert!(out.starts_with("pp 4 "));
        let (_, out, _) = run_str(&["bp", "--config", c, "--max-iters", "2"]);
        assert!(out.starts_with("pp 2 "));
        fs::write(&cfg, "no_such_key = 1\n").unwrap();
        assert_eq!(run_str(&["bp", "--config", c]).0, 2);
        assert_eq!(run_str(&["bp", "--config", dir.path().join("missing").to_str().unwrap()]).0, 2);
    }
}
