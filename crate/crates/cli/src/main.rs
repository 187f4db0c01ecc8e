use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use saddle_core::bench::{emit_report, emit_sweep, parse_config, run_bench, sweep, ReportFormat};
use saddle_core::linalg::{mtx, ORACLE_CAP};
use saddle_core::params::{convergence_check_with_margin, optimal};
use saddle_core::problem::{build_q, stokes_problem};
use saddle_core::solvers::{solve_gmres, solve_stationary, GmresPreconditioner};
use saddle_core::spectral::{j_bounds, j_spectrum, schur_complement};
use saddle_core::{
    MethodId, MethodParams, QCase, QMatrix, QSign, RegionVerdict, SaddlePointSystem, SolveOptions, SpectralBounds,
};

#[derive(Parser)]
#[command(name = "saddle", version, about = "SOR/PSD-type stationary solvers for saddle-point systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a Stokes test system (A, B, Q, b1, b2) to a directory.
    Generate {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value = "tridiag")]
        q_case: QCase,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extreme (or all) eigenvalues of J = Q⁻¹BᵀA⁻¹B.
    Spectrum {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        full: bool,
    },
    /// Closed-form optimal parameters.
    Optimal {
        #[arg(long)]
        method: MethodId,
        #[command(flatten)]
        bounds: BoundsArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        omega2: Option<f64>,
    },
    /// Test parameters against the sufficient convergence regions.
    Check {
        #[arg(long)]
        method: MethodId,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        bounds: BoundsArgs,
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
    },
    /// Run a stationary method, or GMRES with `--method gmres|pgmres`.
    Solve {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        method: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, conflicts_with_all = ["params", "free"])]
        optimal: bool,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        omega2: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 1200)]
        max_iter: usize,
        /// GMRES restart length.
        #[arg(long, default_value_t = 100)]
        restart: usize,
        #[arg(long)]
        history: Option<PathBuf>,
    },
    /// Run a benchmark config; exits nonzero if any row errored.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predicted spectral radius over a parameter grid.
    Sweep {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        method: MethodId,
        /// `name=start:stop:count` for each free parameter, or `name=v1,v2,...`.
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Input {
    /// Directory written by `generate`.
    #[arg(long = "in", conflicts_with = "p")]
    dir: Option<PathBuf>,
    /// Generate the Stokes system of this size instead of reading one.
    #[arg(long)]
    p: Option<usize>,
    /// Rebuild Q for this case instead of reading Q.mtx.
    #[arg(long)]
    q_case: Option<QCase>,
    #[arg(long, value_enum, default_value_t = Sign::Pos)]
    q_sign: Sign,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, allow_hyphen_values = true)]
    mu_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    mu_max: f64,
    #[arg(long, value_enum, default_value_t = Sign::Pos)]
    q_sign: Sign,
}

#[derive(Args)]
struct ParamArgs {
    /// Full tuple `tau1,tau2,omega1,omega2,a`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 5)]
    params: Option<Vec<f64>>,
    /// The method's free parameters in order (see `optimal` output).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "params")]
    free: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sign {
    Pos,
    Neg,
}

impl From<Sign> for QSign {
    fn from(s: Sign) -> Self {
        match s {
            Sign::Pos => QSign::PositiveDefinite,
            Sign::Neg => QSign::NegativeDefinite,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

impl BoundsArgs {
    fn bounds(&self) -> Result<SpectralBounds> {
        Ok(SpectralBounds::new(self.mu_min, self.mu_max, self.q_sign.into())?)
    }
}

impl ParamArgs {
    fn resolve(&self, method: MethodId) -> Result<Option<MethodParams>> {
        Ok(match (&self.params, &self.free) {
            (Some(v), _) => Some(MethodParams::new(method, v[0], v[1], v[2], v[3], v[4])),
            (None, Some(v)) => Some(MethodParams::from_free(method, v)?),
            (None, None) => None,
        })
    }
}

fn load(input: &Input) -> Result<(SaddlePointSystem, QMatrix)> {
    let sign: QSign = input.q_sign.into();
    let (system, q_dir) = match (&input.dir, input.p) {
        (Some(dir), _) => (read_system(dir)?, Some(dir.clone())),
        (None, Some(p)) => (stokes_problem(p)?, None),
        (None, None) => bail!("one of --in or --p is required"),
    };
    let q = match (input.q_case, q_dir) {
        (None, Some(dir)) => {
            let dense = mtx::read(dir.join("Q.mtx")).context("reading Q.mtx")?.into_dense();
            QMatrix::new(dense, sign)?
        }
        (case, _) => {
            let q = build_q(&system, case.unwrap_or(QCase::TridiagA))?;
            if sign == QSign::NegativeDefinite { q.negated() } else { q }
        }
    };
    Ok((system, q))
}

fn read_system(dir: &Path) -> Result<SaddlePointSystem> {
    let ctx = |f: &str| format!("reading {}", dir.join(f).display());
    let a = mtx::read(dir.join("A.mtx")).with_context(|| ctx("A.mtx"))?.into_sparse();
    let b = mtx::read(dir.join("B.mtx")).with_context(|| ctx("B.mtx"))?.into_sparse();
    let b1 = mtx::read_vector(dir.join("b1.txt")).with_context(|| ctx("b1.txt"))?;
    let b2 = mtx::read_vector(dir.join("b2.txt")).with_context(|| ctx("b2.txt"))?;
    Ok(SaddlePointSystem::new(a, b, b1, b2)?)
}

fn bounds_of(system: &SaddlePointSystem, q: &QMatrix) -> Result<SpectralBounds> {
    if system.n() <= ORACLE_CAP {
        let s = schur_complement(system)?;
        Ok(j_spectrum(&s, q.dense(), q.sign())?.1)
    } else {
        Ok(j_bounds(system, q, 1e-12)?)
    }
}

fn print_params(p: &MethodParams) {
    println!("tau1,tau2,omega1,omega2,a");
    println!("{},{},{},{},{}", p.tau1, p.tau2, p.omega1, p.omega2, p.a);
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

/// `start:stop:count` or a comma list.
fn grid_values(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if let [start, stop, count] = parts[..] {
        let (start, stop): (f64, f64) = (start.parse()?, stop.parse()?);
        let count: usize = count.parse()?;
        if count < 2 {
            return Ok(vec![start]);
        }
        return Ok((0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect());
    }
    spec.split(',').map(|v| Ok(v.trim().parse()?)).collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { p, q_case, out } => {
            let system = stokes_problem(p)?;
            let q = build_q(&system, q_case)?;
            fs::create_dir_all(&out)?;
            mtx::write_sparse(out.join("A.mtx"), &system.a)?;
            mtx::write_sparse(out.join("B.mtx"), &system.b)?;
            mtx::write_dense(out.join("Q.mtx"), q.dense())?;
            mtx::write_vector(out.join("b1.txt"), &system.b1)?;
            mtx::write_vector(out.join("b2.txt"), &system.b2)?;
            println!("m,n\n{},{}", system.m(), system.n());
        }
        Command::Spectrum { input, full } => {
            let (system, q) = load(&input)?;
            let s = schur_complement(&system)?;
            let (mu, bounds) = j_spectrum(&s, q.dense(), q.sign())?;
            println!("mu_min,mu_max\n{},{}", bounds.mu_min, bounds.mu_max);
            if full {
                println!("index,mu");
                for (i, v) in mu.iter().enumerate() {
                    println!("{i},{v}");
                }
            }
        }
        Command::Optimal { method, bounds, a, omega2 } => {
            let r = optimal(method, &bounds.bounds()?, a, omega2)?;
            print_params(&r.params);
            println!("rho_opt\n{}", r.rho_opt);
            for n in &r.notes {
                eprintln!("note: {n}");
            }
            if let Some(alt) = r.alternate {
                eprintln!("alternate: {alt}");
            }
        }
        Command::Check { method, params, bounds, margin } => {
            let p = params.resolve(method)?.context("--params or --free is required")?;
            let verdict = convergence_check_with_margin(&p, &bounds.bounds()?, margin)?;
            match &verdict {
                RegionVerdict::GuaranteedConvergent => println!("guaranteed convergent"),
                RegionVerdict::NotGuaranteed(v) => {
                    println!("not guaranteed");
                    for c in v {
                        println!("violated: {c}");
                    }
                }
            }
            if !verdict.is_guaranteed() {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Solve { input, method, params, optimal: use_opt, a, omega2, tol, max_iter, restart, history } => {
            let (system, q) = load(&input)?;
            let opts = SolveOptions { tol, max_iter, record_history: history.is_some() };
            let name = method.to_ascii_lowercase();
            let (label, r) = if name == "gmres" || name == "pgmres" {
                let pre = if name == "pgmres" {
                    GmresPreconditioner::block_diag_band(&system, 1)?
                } else {
                    GmresPreconditioner::None
                };
                (format!("{}({restart})", name.to_uppercase()), solve_gmres(&system, &opts, Some(restart), &pre)?)
            } else {
                let id: MethodId = method.parse()?;
                let p = if use_opt {
                    optimal(id, &bounds_of(&system, &q)?, a, omega2)?.params
                } else {
                    params.resolve(id)?.context("one of --params, --free or --optimal is required")?
                };
                let fa = system.factor_a()?;
                (id.to_string(), solve_stationary(&system, &fa, &q, &p, &opts)?)
            };
            if let (Some(path), Some(h)) = (&history, &r.res_history) {
                let mut text = String::from("iteration,res\n");
                for (k, v) in h.iter().enumerate() {
                    text.push_str(&format!("{k},{v:e}\n"));
                }
                fs::write(path, text)?;
            }
            println!("method,iter,res,converged,wall_seconds");
            println!("{label},{},{:e},{},{}", r.iterations, r.final_res, r.converged, r.wall_seconds);
            if !r.converged {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Bench { config, format, out } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = parse_config(&text)?;
            let report = run_bench(&cfg)?;
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Markdown => ReportFormat::Markdown,
            };
            write_out(out.as_deref().or(cfg.output.as_deref()), &emit_report(&report, format))?;
            if report.has_errors() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Sweep { input, method, grid, out } => {
            let (system, q) = load(&input)?;
            let s = schur_complement(&system)?;
            let (mu, _) = j_spectrum(&s, q.dense(), q.sign())?;
            let names = method.free_params();
            let mut axes = vec![None; names.len()];
            for g in &grid {
                let (name, spec) = g.split_once('=').context("--grid expects name=values")?;
                let idx = names
                    .iter()
                    .position(|n| *n == name)
                    .with_context(|| format!("{method} has no free parameter '{name}' (free: {})", names.join(", ")))?;
                axes[idx] = Some(grid_values(spec).with_context(|| format!("parsing grid for {name}"))?);
            }
            let axes: Vec<Vec<f64>> = axes
                .into_iter()
                .zip(names)
                .map(|(v, n)| v.with_context(|| format!("missing --grid for {n}")))
                .collect::<Result<_>>()?;
            let points = sweep(method, &axes, &mu, system.m() > system.n())?;
            write_out(out.as_deref(), &emit_sweep(method, &points))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
