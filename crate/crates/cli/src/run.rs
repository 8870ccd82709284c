//! Executes a parsed job and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use qlitho::deposition::{
    diagonal_rate_1d, fixed_m_superposition_rate, fixed_n_superposition_rate, superposition_2d_rate,
};
use qlitho::fit::{fit_superposition_1d, fit_superposition_2d, FitOptions};
use qlitho::fock::{deposition_bilinear, fixed_n_ket, proto_ket_1d, superposition_2d_ket, MODES_1D, MODES_2D};
use qlitho::optimize::FitResult;
use qlitho::states::{Superposition2D, Validate};
use qlitho::synth::fourier::{approximation_ok, distance_dn, fourier_coefficients, to_fourier_program};
use qlitho::synth::quadrature::{DEFAULT_POINTS_1D, DEFAULT_POINTS_2D};
use qlitho::synth::{
    classical_intensity, noon_resolution, rayleigh_resolution, FourierCoefficients, FourierSeries2D, PeriodicGrid,
    ProductGrid, SampledTarget1D, SampledTarget2D, SquareRegion, TargetPattern1D, TargetPattern2D, Trench,
};
use qlitho::verify::{verify_oracle, ORACLE_TOLERANCE};
use qlitho::{Error, Violation, NORMALIZATION};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::job::{Command, JobSpec, Resolved1D, Target1D, Target2D};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    InvalidJob { message: String, violations: Vec<Violation> },
    Numeric(String),
    OracleMismatch(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::InvalidJob { .. } => 2,
            CliError::Numeric(_) => 3,
            CliError::OracleMismatch(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let (kind, message, violations) = match self {
            CliError::InvalidJob { message, violations } => ("invalid-job", message.clone(), violations.clone()),
            CliError::Numeric(m) => ("numeric-failure", m.clone(), vec![]),
            CliError::OracleMismatch(m) => ("oracle-mismatch", m.clone(), vec![]),
            CliError::Io(m) => ("io", m.clone(), vec![]),
        };
        json!({ "error": { "kind": kind, "message": message, "violations": violations, "exit_code": self.exit_code() } })
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        CliError::InvalidJob { message: message.into(), violations: vec![] }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numeric(m) => CliError::Numeric(m),
            Error::Validation(v) => CliError::InvalidJob { message: "invalid state".into(), violations: v },
            other => CliError::invalid(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Settings from the command line that override the job file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub oracle: bool,
    pub out: Option<PathBuf>,
}

/// Paths of the artifacts a run produced.
#[derive(Debug, Clone, Serialize)]
pub struct Artifacts {
    pub grid: Option<PathBuf>,
    pub manifest: PathBuf,
    pub trace: Option<PathBuf>,
}

pub fn load_job(path: &Path) -> CliResult<(JobSpec, Value)> {
    let text = fs::read_to_string(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let raw: Value = serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("job is not valid JSON: {e}")))?;
    let job: JobSpec =
        serde_json::from_value(raw.clone()).map_err(|e| CliError::invalid(format!("job does not match the schema: {e}")))?;
    Ok((job, raw))
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(headers: Vec<&'static str>) -> Self {
        Self { headers, rows: Vec::new() }
    }

    fn write(&self, path: &Path) -> CliResult<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(CliError::Numeric(format!("non-finite {} in row {i}", self.headers[j])));
            }
        }
        let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
        w.write_record(&self.headers).map_err(|e| io_err(path, e))?;
        for row in &self.rows {
            let fields = row.iter().zip(&self.headers).map(|(v, h)| {
                if *h == "generation" {
                    format!("{v}")
                } else {
                    format!("{v:e}")
                }
            });
            w.write_record(fields).map_err(|e| io_err(path, e))?;
        }
        w.flush().map_err(|e| io_err(path, e))
    }
}

struct Context {
    base: PathBuf,
    seed: u64,
    threads: Option<usize>,
    oracle: bool,
}

struct Output {
    grid: Option<Table>,
    trace: Option<Table>,
    derived: Value,
}

pub fn run(job_path: &Path, overrides: &Overrides) -> CliResult<Artifacts> {
    let (job, raw) = load_job(job_path)?;
    let base = job_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let violations = job.validate(&base);
    if !violations.is_empty() {
        return Err(CliError::InvalidJob { message: "job failed validation".into(), violations });
    }
    let out_dir = match (&overrides.out, &job.out_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(d)) => base.join(d),
        (None, None) => base.clone(),
    };
    if let Some(0) = overrides.threads {
        return Err(CliError::invalid("--threads must be at least 1"));
    }
    let ctx = Context {
        base,
        seed: overrides.seed.or(job.seed).unwrap_or(0),
        threads: overrides.threads,
        oracle: overrides.oracle,
    };
    let work = || execute(&job.command, &ctx);
    let output = match ctx.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;
    let stem = job.name.clone().unwrap_or_else(|| job.command.name().to_owned());
    let mut artifacts = Artifacts { grid: None, manifest: out_dir.join(format!("{stem}.manifest.json")), trace: None };
    if let Some(t) = &output.grid {
        let p = out_dir.join(format!("{stem}.csv"));
        t.write(&p)?;
        artifacts.grid = Some(p);
    }
    if let Some(t) = &output.trace {
        let p = out_dir.join(format!("{stem}.trace.csv"));
        t.write(&p)?;
        artifacts.trace = Some(p);
    }
    let manifest = json!({
        "schema_version": crate::job::SCHEMA_VERSION,
        "command": job.command.name(),
        "job": raw,
        "seed": ctx.seed,
        "threads": ctx.threads,
        "oracle_check": ctx.oracle,
        "versions": { "qlitho": qlitho::VERSION, "qlitho-cli": env!("CARGO_PKG_VERSION") },
        "normalization": NORMALIZATION,
        "derived": output.derived,
        "outputs": { "grid": artifacts.grid, "trace": artifacts.trace },
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(&artifacts.manifest, text + "\n").map_err(|e| io_err(&artifacts.manifest, e))?;
    Ok(artifacts)
}

fn execute(command: &Command, ctx: &Context) -> CliResult<Output> {
    match command {
        Command::Eval1d(e) => {
            let state = e.state.resolve()?;
            let points = e.grid_points.unwrap_or(DEFAULT_POINTS_1D);
            eval_1d(&state, points, e.exposure_time, ctx)
        }
        Command::Eval2d(e) => {
            let state = e.state.resolve()?;
            eval_2d(&state, e.grid_points.unwrap_or(DEFAULT_POINTS_2D), e.exposure_time, ctx)
        }
        Command::FitFourier(f) => fit_fourier(f, ctx),
        Command::FitSuperposition1d(f) => {
            let target = load_target_1d(&f.target, &ctx.base)?;
            let opts = fit_options(&f.optimizer, ctx);
            let fit = fit_superposition_1d(f.n, target.as_ref(), &opts)?;
            let points = opts.grid_points.unwrap_or(DEFAULT_POINTS_1D);
            let grid = PeriodicGrid::new(points)?;
            let mut table = Table::new(vec!["phi_rad", "target_normalized", "delta_normalized", "exposure_normalized"]);
            let t = fit.exposure_time;
            table.rows = grid
                .nodes()
                .into_par_iter()
                .map(|phi| {
                    let d = fixed_n_superposition_rate(&fit.state, phi)?;
                    Ok(vec![phi, target.value(phi), d, d * t])
                })
                .collect::<qlitho::Result<_>>()?;
            if ctx.oracle {
                oracle_1d(&Resolved1D::FixedN(fit.state.clone()), &grid)?;
            }
            let truncation = distance_dn(target.as_ref(), f.n).ok();
            Ok(Output {
                grid: Some(table),
                trace: Some(trace_table(&fit.result)),
                derived: json!({
                    "state": fit.state,
                    "exposure_time": fit.exposure_time,
                    "d_N": fit.distance,
                    "D_N": truncation,
                    "target": target.descriptor(),
                    "optimizer": fit.config,
                    "evaluations": fit.result.evaluations,
                    "rejected": fit.result.rejected,
                    "best_params": fit.result.best_params,
                }),
            })
        }
        Command::FitSuperposition2d(f) => {
            let target = load_target_2d(&f.target, &ctx.base)?;
            let opts = fit_options(&f.optimizer, ctx);
            let fit = fit_superposition_2d(f.n, target.as_ref(), &opts)?;
            let points = opts.grid_points.unwrap_or(DEFAULT_POINTS_2D);
            let mut out = eval_2d(&fit.state, points, Some(fit.exposure_time), ctx)?;
            if let Some(table) = &mut out.grid {
                table.headers.insert(2, "target_normalized");
                for row in &mut table.rows {
                    row.insert(2, target.value(row[0], row[1]));
                }
            }
            out.trace = Some(trace_table(&fit.result));
            out.derived = json!({
                "state": fit.state,
                "exposure_time": fit.exposure_time,
                "d_N": fit.distance,
                "target": target.descriptor(),
                "optimizer": fit.config,
                "evaluations": fit.result.evaluations,
                "rejected": fit.result.rejected,
                "best_params": fit.result.best_params,
            });
            Ok(out)
        }
        Command::Classical(c) => {
            let points = c.points.unwrap_or(DEFAULT_POINTS_1D);
            let x_max = c.x_max.unwrap_or(2.0 * c.wavelength);
            let mut table = Table::new(vec!["x_length", "phi_rad", "intensity_normalized"]);
            for j in 0..points {
                let x = x_max * j as f64 / points.max(2).saturating_sub(1) as f64;
                table.rows.push(vec![x, qlitho::synth::phase_from_position(x, c.wavelength), classical_intensity(x, c.wavelength, c.theta)?]);
            }
            let noon: Vec<Value> = c
                .photon_numbers
                .iter()
                .map(|&n| Ok(json!({ "n": n, "resolution": noon_resolution(c.wavelength, n)? })))
                .collect::<qlitho::Result<_>>()?;
            Ok(Output {
                grid: Some(table),
                trace: None,
                derived: json!({
                    "rayleigh_resolution": rayleigh_resolution(c.wavelength, c.theta)?,
                    "noon_resolutions": noon,
                }),
            })
        }
        Command::VerifyOracle(o) => {
            let report = verify_oracle(o.max_n_1d, o.max_n_2d, o.draws, ctx.seed)?;
            if !report.passed() {
                return Err(CliError::OracleMismatch(format!(
                    "max relative deviation {:.3e} exceeds {:.0e} at {}",
                    report.max_relative_deviation, report.tolerance, report.worst_case
                )));
            }
            Ok(Output { grid: None, trace: None, derived: json!({ "report": report }) })
        }
    }
}

fn fit_options(base: &FitOptions, ctx: &Context) -> FitOptions {
    let mut opts = base.clone();
    opts.seed = ctx.seed;
    opts.threads = ctx.threads.or(opts.threads);
    opts
}

fn trace_table(result: &FitResult) -> Table {
    let mut t = Table::new(vec!["generation", "best_objective", "mean_objective"]);
    t.rows = result.trace().iter().map(|r| vec![r.generation as f64, r.best, r.mean]).collect();
    t
}

fn rate_1d(state: &Resolved1D, phi: f64) -> qlitho::Result<f64> {
    match state {
        Resolved1D::Proto(p) => diagonal_rate_1d(p.n, p.m, p.theta, phi),
        Resolved1D::FixedN(s) => fixed_n_superposition_rate(s, phi),
        Resolved1D::FixedM(s) => fixed_m_superposition_rate(s, phi),
    }
}

/// Oracle rate of a 1D state; fixed-m states sum the per-order responses.
fn oracle_rate_1d(state: &Resolved1D, phi: f64) -> qlitho::Result<f64> {
    match state {
        Resolved1D::Proto(p) => {
            let ket = proto_ket_1d(p, phi)?;
            Ok(deposition_bilinear(&ket, &ket, &MODES_1D, p.n)?.re)
        }
        Resolved1D::FixedN(s) => {
            let ket = fixed_n_ket(s, phi)?;
            Ok(deposition_bilinear(&ket, &ket, &MODES_1D, s.n)?.re)
        }
        Resolved1D::FixedM(s) => (0..s.terms.len()).try_fold(0.0, |acc, i| {
            let ket = proto_ket_1d(&s.proto(i), phi)?;
            Ok(acc + s.terms[i].amplitude.norm_sqr() * deposition_bilinear(&ket, &ket, &MODES_1D, s.terms[i].n)?.re)
        }),
    }
}

/// Compares closed forms to the oracle at up to 64 evenly spaced nodes.
fn oracle_check(count: usize, closed: impl Fn(usize) -> qlitho::Result<(f64, f64)>, scale: f64) -> CliResult<f64> {
    let stride = count.div_ceil(64).max(1);
    let mut worst = 0.0f64;
    for j in (0..count).step_by(stride) {
        let (c, o) = closed(j)?;
        worst = worst.max((c - o).abs() / o.abs().max(scale));
    }
    if worst > ORACLE_TOLERANCE {
        return Err(CliError::OracleMismatch(format!(
            "closed form deviates from the Fock-space oracle by {worst:.3e} (limit {ORACLE_TOLERANCE:.0e})"
        )));
    }
    log::info!("oracle cross-check passed, max relative deviation {worst:.3e}");
    Ok(worst)
}

fn oracle_1d(state: &Resolved1D, grid: &PeriodicGrid<f64>) -> CliResult<f64> {
    let scale = 2f64.powi(-(state.photons() as i32));
    oracle_check(
        grid.points(),
        |j| {
            let phi = grid.node(j);
            Ok((rate_1d(state, phi)?, oracle_rate_1d(state, phi)?))
        },
        scale,
    )
}

fn eval_1d(state: &Resolved1D, points: usize, exposure: Option<f64>, ctx: &Context) -> CliResult<Output> {
    let grid = PeriodicGrid::new(points)?;
    let mut headers = vec!["phi_rad", "delta_normalized"];
    if exposure.is_some() {
        headers.push("exposure_normalized");
    }
    let mut table = Table::new(headers);
    table.rows = grid
        .nodes()
        .into_par_iter()
        .map(|phi| {
            let d = rate_1d(state, phi)?;
            let mut row = vec![phi, d];
            if let Some(t) = exposure {
                row.push(d * t);
            }
            Ok(row)
        })
        .collect::<qlitho::Result<_>>()?;
    let deviation = if ctx.oracle { Some(oracle_1d(state, &grid)?) } else { None };
    let (max, min) = table.rows.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(a, b), r| (a.max(r[1]), b.min(r[1])));
    Ok(Output {
        grid: Some(table),
        trace: None,
        derived: json!({
            "photons": state.photons(),
            "max_rate": max,
            "min_rate": min,
            "oracle_max_relative_deviation": deviation,
        }),
    })
}

fn eval_2d(state: &Superposition2D<f64>, points: usize, exposure: Option<f64>, ctx: &Context) -> CliResult<Output> {
    state.check()?;
    let grid = ProductGrid::square(points)?;
    let mut headers = vec!["phi_rad", "chi_rad", "delta_normalized"];
    if exposure.is_some() {
        headers.push("exposure_normalized");
    }
    let mut table = Table::new(headers);
    let rows: Vec<Vec<Vec<f64>>> = (0..points)
        .into_par_iter()
        .map(|i| {
            let phi = grid.phi.node(i);
            (0..points)
                .map(|j| {
                    let chi = grid.chi.node(j);
                    let d = superposition_2d_rate(state, phi, chi)?;
                    let mut row = vec![phi, chi, d];
                    if let Some(t) = exposure {
                        row.push(d * t);
                    }
                    Ok(row)
                })
                .collect()
        })
        .collect::<qlitho::Result<_>>()?;
    table.rows = rows.into_iter().flatten().collect();
    let deviation = if ctx.oracle {
        let scale = 4f64.powi(-(state.n as i32));
        Some(oracle_check(
            points * points,
            |idx| {
                let (phi, chi) = (grid.phi.node(idx / points), grid.chi.node(idx % points));
                let ket = superposition_2d_ket(state, phi, chi)?;
                let oracle = deposition_bilinear(&ket, &ket, &MODES_2D, state.n)?.re;
                Ok((superposition_2d_rate(state, phi, chi)?, oracle))
            },
            scale,
        )?)
    } else {
        None
    };
    Ok(Output {
        grid: Some(table),
        trace: None,
        derived: json!({ "photons": state.n, "oracle_max_relative_deviation": deviation }),
    })
}

fn fit_fourier(f: &crate::job::FitFourier, ctx: &Context) -> CliResult<Output> {
    let target = load_target_1d(&f.target, &ctx.base)?;
    let coeffs = fourier_coefficients(target.as_ref(), f.n_max)?;
    let program = match &f.program {
        Some(p) => {
            p.check()?;
            p.clone()
        }
        None => to_fourier_program(&coeffs, f.exposure_time)?,
    };
    let d_n = distance_dn(target.as_ref(), f.n_max)?;
    let grid = PeriodicGrid::new(f.grid_points.unwrap_or(DEFAULT_POINTS_1D))?;
    let mut table = Table::new(vec!["phi_rad", "target_normalized", "fourier_normalized", "exposure_normalized"]);
    for phi in grid.nodes() {
        table.rows.push(vec![phi, target.value(phi), coeffs.evaluate(phi), program.exposure(phi)]);
    }
    let q = program.penalty_rate();
    let min = table.rows.iter().map(|r| r[3]).fold(f64::INFINITY, f64::min);
    let report = match f.epsilon {
        Some(eps) => Some(approximation_ok(target.as_ref(), &|phi| program.exposure(phi), f.n_max, eps)?),
        None => None,
    };
    let realization = program.to_fixed_m_state().ok().map(|(s, t)| json!({ "state": s, "exposure_time": t }));
    Ok(Output {
        grid: Some(table),
        trace: None,
        derived: json!({
            "target": target.descriptor(),
            "coefficients": coeffs,
            "program": program,
            "harmonics": program.terms.len(),
            "penalty_rate_Q": q,
            "penalty_exposure_Qt": q * program.exposure_time,
            "penalty_convention": "Q = sum of c_n, with c_n = sqrt(a_n^2 + b_n^2) of the target's own Fourier series (a_n = (1/pi) int F cos n phi); the constant term is not realized",
            "min_exposure": min,
            "D_N": d_n,
            "approximation": report,
            "fixed_m_realization": realization,
        }),
    })
}

fn read_csv(path: &Path, columns: usize) -> CliResult<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        if rec.len() != columns {
            return Err(CliError::invalid(format!("{} row {}: expected {columns} columns", path.display(), i + 1)));
        }
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::invalid(format!("{} row {}: {e}", path.display(), i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

fn load_target_1d(t: &Target1D, base: &Path) -> CliResult<Box<dyn TargetPattern1D<f64>>> {
    Ok(match t {
        Target1D::Trench { h } => Box::new(Trench::new(*h)?),
        Target1D::Series { a, b } => {
            if a.is_empty() || b.len() > a.len() {
                return Err(CliError::invalid("series needs a_0 and at most as many b as a coefficients"));
            }
            let mut b = b.clone();
            b.resize(a.len(), 0.0);
            if let Some(first) = b.first_mut() {
                *first = 0.0;
            }
            Box::new(FourierCoefficients { a: a.clone(), b })
        }
        Target1D::Csv { path } => {
            let rows = read_csv(&base.join(path), 2)?;
            Box::new(SampledTarget1D::new(rows.into_iter().map(|r| (r[0], r[1])).collect())?)
        }
    })
}

fn load_target_2d(t: &Target2D, base: &Path) -> CliResult<Box<dyn TargetPattern2D<f64>>> {
    Ok(match t {
        Target2D::Square { h, half_width } => Box::new(SquareRegion::new(*h, *half_width)?),
        Target2D::FourierSeries { terms } => Box::new(FourierSeries2D { terms: terms.clone() }),
        Target2D::Csv { path } => {
            let rows = read_csv(&base.join(path), 3)?;
            Box::new(SampledTarget2D::from_triples(rows.into_iter().map(|r| (r[0], r[1], r[2])).collect())?)
        }
    })
}
