//! Benchmark orchestration: optimal-parameter runs over problem sizes, Q
//! cases and methods, plus cheap parameter sweeps.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{spectral_radius_dense, ORACLE_CAP};
use crate::method::{MethodId, MethodParams};
use crate::params::optimal;
use crate::problem::{build_q, stokes_problem, QCase, QMatrix, SaddlePointSystem};
use crate::solvers::{solve_stationary, SolveOptions};
use crate::spectral::{iteration_matrix_dense, j_bounds, j_spectrum_capped, predicted_rho, schur_complement, SpectralBounds};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub p_list: Vec<usize>,
    pub q_cases: Vec<QCase>,
    pub methods: Vec<MethodId>,
    pub a_list: Vec<f64>,
    /// Free `ω₂` for the variants that take one.
    pub omega2: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub output: Option<PathBuf>,
    /// Dense verification of ρ; skipped per row above `oracle_cap`.
    pub oracle: bool,
    pub oracle_cap: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            p_list: vec![8],
            q_cases: vec![QCase::TridiagA],
            methods: vec![MethodId::Gsor],
            a_list: vec![0.0],
            omega2: 0.0,
            tol: 1e-9,
            max_iter: 1200,
            output: None,
            oracle: false,
            oracle_cap: ORACLE_CAP,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Parse { line: 0, msg: msg.into() });
        if self.p_list.is_empty() || self.p_list.contains(&0) {
            return bad("p: need at least one positive size");
        }
        if self.q_cases.is_empty() || self.methods.is_empty() || self.a_list.is_empty() {
            return bad("q, methods and a must be nonempty");
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return bad("tol must be positive and max_iter at least 1");
        }
        Ok(())
    }

    /// Requested combinations in report order.
    pub fn jobs(&self) -> Vec<(usize, QCase, MethodId, f64)> {
        let mut jobs = Vec::new();
        for &p in &self.p_list {
            for &case in &self.q_cases {
                for &m in &self.methods {
                    for &a in &self.a_list {
                        jobs.push((p, case, m, a));
                    }
                }
            }
        }
        jobs.sort_by(|x, y| {
            (x.0, x.1 as u8, x.2 as u8).cmp(&(y.0, y.1 as u8, y.2 as u8)).then(x.3.total_cmp(&y.3))
        });
        jobs.dedup();
        jobs
    }
}

fn list<T>(key: &str, value: &str, line: usize, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| f(s.trim()).ok_or_else(|| Error::Parse { line, msg: format!("{key}: cannot parse '{}'", s.trim()) }))
        .collect()
}

fn single<T>(key: &str, value: &str, line: usize, f: impl Fn(&str) -> Option<T>) -> Result<T> {
    f(value).ok_or_else(|| Error::Parse { line, msg: format!("{key}: cannot parse '{value}'") })
}

/// Parses whitespace-separated `key=value` pairs; `#` starts a comment.
/// Lists are comma-separated. `p` also accepts `start:stop:step`.
pub fn parse_config(text: &str) -> Result<BenchConfig> {
    let mut cfg = BenchConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse { line, msg: format!("expected key=value, got '{token}'") })?;
            match key {
                "p" => {
                    cfg.p_list = match value.split(':').collect::<Vec<_>>()[..] {
                        [a, b, c] => {
                            let r = list(key, &format!("{a},{b},{c}"), line, |s| s.parse::<usize>().ok())?;
                            if r[2] == 0 {
                                return Err(Error::Parse { line, msg: "p: step must be positive".into() });
                            }
                            (r[0]..=r[1]).step_by(r[2]).collect()
                        }
                        _ => list(key, value, line, |s| s.parse().ok())?,
                    }
                }
                "q" | "q_cases" => cfg.q_cases = list(key, value, line, |s| s.parse().ok())?,
                "methods" | "method" => cfg.methods = list(key, value, line, |s| s.parse().ok())?,
                "a" => cfg.a_list = list(key, value, line, |s| s.parse().ok())?,
                "omega2" => cfg.omega2 = single(key, value, line, |s| s.parse().ok())?,
                "tol" => cfg.tol = single(key, value, line, |s| s.parse().ok())?,
                "max_iter" => cfg.max_iter = single(key, value, line, |s| s.parse().ok())?,
                "output" | "out" => cfg.output = Some(PathBuf::from(value)),
                "oracle" => {
                    cfg.oracle = single(key, value, line, |s| match s {
                        "on" | "true" | "yes" | "1" => Some(true),
                        "off" | "false" | "no" | "0" => Some(false),
                        _ => None,
                    })?
                }
                "oracle_cap" => cfg.oracle_cap = single(key, value, line, |s| s.parse().ok())?,
                _ => return Err(Error::Parse { line, msg: format!("unknown key '{key}'") }),
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub p: usize,
    pub case: QCase,
    pub method: MethodId,
    pub a: f64,
    pub mu_min: Option<f64>,
    pub mu_max: Option<f64>,
    pub params: Option<MethodParams>,
    pub rho_formula: Option<f64>,
    pub rho_oracle: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub final_res: Option<f64>,
    pub wall_seconds: Option<f64>,
    pub note: String,
    pub error: bool,
}

impl BenchRow {
    fn empty(p: usize, case: QCase, method: MethodId, a: f64) -> Self {
        Self {
            p,
            case,
            method,
            a,
            mu_min: None,
            mu_max: None,
            params: None,
            rho_formula: None,
            rho_oracle: None,
            iterations: None,
            converged: None,
            final_res: None,
            wall_seconds: None,
            note: String::new(),
            error: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn has_errors(&self) -> bool {
        self.rows.iter().any(|r| r.error)
    }
}

struct Instance {
    system: SaddlePointSystem,
    q: QMatrix,
    bounds: SpectralBounds,
}

fn prepare(p: usize, case: QCase, cap: usize) -> Result<Instance> {
    let system = stokes_problem(p)?;
    let q = build_q(&system, case)?;
    let bounds = if system.n() <= cap {
        let s = schur_complement(&system)?;
        j_spectrum_capped(&s, q.dense(), q.sign(), cap)?.1
    } else {
        j_bounds(&system, &q, 1e-12)?
    };
    Ok(Instance { system, q, bounds })
}

fn run_row(inst: &Instance, cfg: &BenchConfig, method: MethodId, a: f64, mut row: BenchRow) -> BenchRow {
    row.mu_min = Some(inst.bounds.mu_min);
    row.mu_max = Some(inst.bounds.mu_max);
    // GESOR fixes its own a
    let pinned = (method != MethodId::Gesor).then_some(a);
    let opt = match optimal(method, &inst.bounds, pinned, Some(cfg.omega2)) {
        Ok(o) => o,
        Err(e) => {
            row.note = e.to_string();
            row.error = true;
            return row;
        }
    };
    if pinned.is_none() {
        row.note = format!("a_opt = {}", opt.params.a);
    }
    row.params = Some(opt.params);
    row.rho_formula = Some(opt.rho_opt);
    let dim = inst.system.m() + inst.system.n();
    if cfg.oracle && dim <= cfg.oracle_cap {
        match iteration_matrix_dense(&inst.system, inst.q.dense(), &opt.params).and_then(|h| spectral_radius_dense(&h)) {
            Ok(r) => row.rho_oracle = Some(r),
            Err(e) => {
                row.note = format!("oracle: {e}");
                row.error = true;
            }
        }
    }
    let opts = SolveOptions { tol: cfg.tol, max_iter: cfg.max_iter, record_history: false };
    let solved = inst.system.factor_a().and_then(|fa| solve_stationary(&inst.system, &fa, &inst.q, &opt.params, &opts));
    match solved {
        Ok(r) => {
            row.iterations = Some(r.iterations);
            row.converged = Some(r.converged);
            row.final_res = Some(r.final_res);
            row.wall_seconds = Some(r.wall_seconds);
        }
        Err(e) => {
            row.note = e.to_string();
            row.error = true;
        }
    }
    row
}

/// Runs every combination of the config. Per-row failures are recorded in
/// the row; the report is sorted by `(p, case, method, a)`.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let jobs = cfg.jobs();
    let mut keys: Vec<(usize, QCase)> = jobs.iter().map(|j| (j.0, j.1)).collect();
    keys.dedup();
    let instances: Vec<((usize, QCase), Result<Instance>)> =
        keys.into_par_iter().map(|(p, c)| ((p, c), prepare(p, c, cfg.oracle_cap))).collect();
    let rows = jobs
        .into_par_iter()
        .map(|(p, case, method, a)| {
            let row = BenchRow::empty(p, case, method, a);
            let inst = &instances.iter().find(|(k, _)| *k == (p, case)).expect("prepared").1;
            match inst {
                Ok(inst) => run_row(inst, cfg, method, a, row),
                Err(e) => BenchRow { note: e.to_string(), error: true, ..row },
            }
        })
        .collect();
    Ok(BenchReport { rows })
}

/// Six significant digits, fixed notation where it stays readable.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{v:.prec$}", prec = (5 - mag) as usize)
    } else {
        format!("{v:.5e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err(Error::Parse { line: 0, msg: format!("unknown report format '{s}'") }),
        }
    }
}

pub const REPORT_COLUMNS: [&str; 18] = [
    "p", "case", "method", "a", "mu_min", "mu_max", "tau1", "tau2", "omega1", "omega2", "a_used", "rho_formula",
    "rho_oracle", "iter", "converged", "res", "wall_seconds", "note",
];

fn cells(r: &BenchRow) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    let par = |f: fn(&MethodParams) -> f64| opt(r.params.as_ref().map(f));
    let note = if r.error { format!("error: {}", r.note) } else { r.note.clone() };
    vec![
        r.p.to_string(),
        r.case.name().to_string(),
        r.method.name().to_string(),
        fmt_sig(r.a),
        opt(r.mu_min),
        opt(r.mu_max),
        par(|p| p.tau1),
        par(|p| p.tau2),
        par(|p| p.omega1),
        par(|p| p.omega2),
        par(|p| p.a),
        opt(r.rho_formula),
        opt(r.rho_oracle),
        r.iterations.map(|v| v.to_string()).unwrap_or_default(),
        r.converged.map(|v| v.to_string()).unwrap_or_default(),
        opt(r.final_res),
        opt(r.wall_seconds),
        note.replace('\n', " "),
    ]
}

pub fn emit_report(report: &BenchReport, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(REPORT_COLUMNS).expect("in-memory write");
            for r in &report.rows {
                w.write_record(cells(r)).expect("in-memory write");
            }
            out = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
        }
        ReportFormat::Markdown => {
            let _ = writeln!(out, "| {} |", REPORT_COLUMNS.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(REPORT_COLUMNS.len()));
            for r in &report.rows {
                let row: Vec<String> = cells(r).into_iter().map(|c| c.replace('|', "/")).collect();
                let _ = writeln!(out, "| {} |", row.join(" | "));
            }
        }
    }
    out
}

/// Reads a CSV written by [`emit_report`].
pub fn parse_report_csv(text: &str) -> Result<BenchReport> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header_ok = reader.headers().map(|h| h.iter().eq(REPORT_COLUMNS)).unwrap_or(false);
    if !header_ok {
        return Err(Error::Parse { line: 1, msg: "missing or unexpected header".into() });
    }
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let f = record.map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let err = |i: usize| Error::Parse { line, msg: format!("bad {} '{}'", REPORT_COLUMNS[i], &f[i]) };
        let num = |i: usize| -> Result<Option<f64>> {
            if f[i].is_empty() {
                Ok(None)
            } else {
                f[i].parse().map(Some).map_err(|_| err(i))
            }
        };
        let method: MethodId = f[2].parse().map_err(|_| err(2))?;
        let params = match (num(6)?, num(7)?, num(8)?, num(9)?, num(10)?) {
            (Some(t1), Some(t2), Some(w1), Some(w2), Some(a)) => Some(MethodParams::new(method, t1, t2, w1, w2, a)),
            _ => None,
        };
        let (error, note) = match f[17].strip_prefix("error: ") {
            Some(n) => (true, n.to_string()),
            None => (false, f[17].to_string()),
        };
        rows.push(BenchRow {
            p: f[0].parse().map_err(|_| err(0))?,
            case: f[1].parse().map_err(|_| err(1))?,
            method,
            a: f[3].parse().map_err(|_| err(3))?,
            mu_min: num(4)?,
            mu_max: num(5)?,
            params,
            rho_formula: num(11)?,
            rho_oracle: num(12)?,
            iterations: if f[13].is_empty() { None } else { Some(f[13].parse().map_err(|_| err(13))?) },
            converged: if f[14].is_empty() { None } else { Some(f[14].parse().map_err(|_| err(14))?) },
            final_res: num(15)?,
            wall_seconds: num(16)?,
            note,
            error,
        });
    }
    Ok(BenchReport { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub params: MethodParams,
    /// Predicted spectral radius, or why it is unavailable.
    pub rho: std::result::Result<f64, String>,
}

/// Predicted ρ over the Cartesian product of `grid`, one value list per free
/// parameter of `method`. No solves are run.
pub fn sweep(method: MethodId, grid: &[Vec<f64>], mu: &[f64], m_gt_n: bool) -> Result<Vec<SweepPoint>> {
    let names = method.free_params();
    if grid.len() != names.len() {
        return Err(Error::DimensionMismatch { expected: names.len(), got: grid.len() });
    }
    let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
    for values in grid {
        combos = combos
            .into_iter()
            .flat_map(|c| values.iter().map(move |v| c.iter().copied().chain([*v]).collect()))
            .collect();
    }
    combos
        .into_par_iter()
        .map(|free| {
            let params = MethodParams::from_free(method, &free)?;
            let rho = predicted_rho(&params, mu, m_gt_n).map_err(|e| e.to_string());
            Ok(SweepPoint { params, rho })
        })
        .collect()
}

pub fn emit_sweep(method: MethodId, points: &[SweepPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = method.free_params().iter().copied().chain(["rho"]).collect();
    w.write_record(&header).expect("in-memory write");
    for pt in points {
        let mut rec: Vec<String> = free_values(&pt.params).into_iter().map(fmt_sig).collect();
        rec.push(match &pt.rho {
            Ok(r) => fmt_sig(*r),
            Err(e) => format!("error: {e}"),
        });
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn free_values(p: &MethodParams) -> Vec<f64> {
    p.method
        .free_params()
        .iter()
        .map(|name| match *name {
            "tau" | "tau1" => p.tau1,
            "tau2" => p.tau2,
            "omega" | "omega1" => p.omega1,
            "omega2" => p.omega2,
            _ => p.a,
        })
        .collect()
}
