//! Job file schema (JSON).

use std::path::{Path, PathBuf};

use qlitho::fit::FitOptions;
use qlitho::states::{FixedMTerm, ProtoState1D, ProtoState2D, Superposition2D, SuperpositionFixedM, SuperpositionFixedN, Term1D, Term2D};
use qlitho::synth::{Fourier2DTerm, FourierProgram};
use qlitho::Violation;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobSpec {
    pub schema_version: u32,
    /// Base name for output files; defaults to the command name.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Output directory, relative to the job file.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(flatten)]
    pub command: Command,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    #[serde(rename = "eval-1d")]
    Eval1d(Eval1d),
    #[serde(rename = "eval-2d")]
    Eval2d(Eval2d),
    FitFourier(FitFourier),
    #[serde(rename = "fit-superposition-1d")]
    FitSuperposition1d(FitSuperposition1d),
    #[serde(rename = "fit-superposition-2d")]
    FitSuperposition2d(FitSuperposition2d),
    Classical(Classical),
    VerifyOracle(VerifyOracle),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval1d(_) => "eval-1d",
            Command::Eval2d(_) => "eval-2d",
            Command::FitFourier(_) => "fit-fourier",
            Command::FitSuperposition1d(_) => "fit-superposition-1d",
            Command::FitSuperposition2d(_) => "fit-superposition-2d",
            Command::Classical(_) => "classical",
            Command::VerifyOracle(_) => "verify-oracle",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum State1D {
    Noon { n: u32 },
    Proto(ProtoState1D<f64>),
    FixedN { n: u32, terms: Vec<Term1D<f64>> },
    FixedM { m: u32, terms: Vec<FixedMTerm<f64>> },
}

/// A 1D state after amplitude normalization.
#[derive(Debug, Clone)]
pub enum Resolved1D {
    Proto(ProtoState1D<f64>),
    FixedN(SuperpositionFixedN<f64>),
    FixedM(SuperpositionFixedM<f64>),
}

impl State1D {
    pub fn resolve(&self) -> qlitho::Result<Resolved1D> {
        Ok(match self {
            State1D::Noon { n } => Resolved1D::Proto(ProtoState1D::noon(*n)?),
            State1D::Proto(p) => Resolved1D::Proto(ProtoState1D::new(p.n, p.m, p.theta)?),
            State1D::FixedN { n, terms } => Resolved1D::FixedN(SuperpositionFixedN::normalized(*n, terms.clone())?),
            State1D::FixedM { m, terms } => Resolved1D::FixedM(SuperpositionFixedM::normalized(*m, terms.clone())?),
        })
    }
}

impl Resolved1D {
    /// Largest photon number present.
    pub fn photons(&self) -> u32 {
        match self {
            Resolved1D::Proto(p) => p.n,
            Resolved1D::FixedN(s) => s.n,
            Resolved1D::FixedM(s) => s.max_photons(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum State2D {
    Proto(ProtoState2D<f64>),
    Superposition { n: u32, terms: Vec<Term2D<f64>> },
}

impl State2D {
    pub fn resolve(&self) -> qlitho::Result<Superposition2D<f64>> {
        match self {
            State2D::Proto(p) => Ok(Superposition2D::single(ProtoState2D::new(p.n, p.m, p.k, p.zeta, p.zeta_bar)?)),
            State2D::Superposition { n, terms } => Superposition2D::normalized(*n, terms.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Target1D {
    Trench { h: f64 },
    /// `a_0 + Σ a_n cos nφ + b_n sin nφ`.
    Series { a: Vec<f64>, #[serde(default)] b: Vec<f64> },
    /// CSV with columns `phi,value`.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Target2D {
    Square { h: f64, half_width: f64 },
    FourierSeries { terms: Vec<Fourier2DTerm<f64>> },
    /// CSV with columns `phi,chi,value` on a uniform lattice.
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Eval1d {
    pub state: State1D,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub exposure_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Eval2d {
    pub state: State2D,
    #[serde(default)]
    pub grid_points: Option<usize>,
    #[serde(default)]
    pub exposure_time: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitFourier {
    pub target: Target1D,
    pub n_max: u32,
    #[serde(default = "one")]
    pub exposure_time: f64,
    /// Tolerance for the approximation criterion; no default is endorsed.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub grid_points: Option<usize>,
    /// Evaluate this program instead of deriving one from the target.
    #[serde(default)]
    pub program: Option<FourierProgram<f64>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSuperposition1d {
    pub n: u32,
    pub target: Target1D,
    #[serde(default)]
    pub optimizer: FitOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSuperposition2d {
    pub n: u32,
    pub target: Target2D,
    #[serde(default)]
    pub optimizer: FitOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Classical {
    pub wavelength: f64,
    pub theta: f64,
    /// Sampled span `[0, x_max]` in the wavelength's unit; defaults to two wavelengths.
    #[serde(default)]
    pub x_max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    /// Photon numbers whose N00N resolution is reported alongside.
    #[serde(default)]
    pub photon_numbers: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOracle {
    #[serde(default = "max_n_1d")]
    pub max_n_1d: u32,
    #[serde(default = "max_n_2d")]
    pub max_n_2d: u32,
    #[serde(default = "draws")]
    pub draws: usize,
}

fn max_n_1d() -> u32 {
    8
}

fn max_n_2d() -> u32 {
    6
}

fn draws() -> usize {
    20
}

fn resolution(path: &str, points: Option<usize>, n: u32, out: &mut Vec<Violation>) {
    if let Some(p) = points {
        let need = 4 * n as usize + 1;
        if p < need {
            out.push(Violation::new(path, format!("{p} points is below 4N+1 = {need}")));
        }
    }
}

fn file_exists(path: &str, file: &Path, base: &Path, out: &mut Vec<Violation>) {
    if !base.join(file).is_file() {
        out.push(Violation::new(path, format!("file {} does not exist", base.join(file).display())));
    }
}

impl JobSpec {
    /// Structural checks that need no numerics; `base` resolves relative paths.
    pub fn validate(&self, base: &Path) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            v.push(Violation::new(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                v.push(Violation::new("name", "must be a plain file stem"));
            }
        }
        let target_1d = |t: &Target1D, v: &mut Vec<Violation>| {
            if let Target1D::Csv { path } = t {
                file_exists("target.path", path, base, v);
            }
        };
        let exposure = |t: Option<f64>, v: &mut Vec<Violation>| {
            if t.is_some_and(|t| !(t > 0.0 && t.is_finite())) {
                v.push(Violation::new("exposure_time", "must be positive and finite"));
            }
        };
        match &self.command {
            Command::Eval1d(e) => {
                exposure(e.exposure_time, &mut v);
                if let Ok(s) = e.state.resolve() {
                    resolution("grid_points", e.grid_points, s.photons(), &mut v);
                }
            }
            Command::Eval2d(e) => {
                exposure(e.exposure_time, &mut v);
                if let Ok(s) = e.state.resolve() {
                    resolution("grid_points", e.grid_points, s.n, &mut v);
                }
            }
            Command::FitFourier(f) => {
                exposure(Some(f.exposure_time), &mut v);
                target_1d(&f.target, &mut v);
                resolution("grid_points", f.grid_points, f.n_max, &mut v);
            }
            Command::FitSuperposition1d(f) => {
                target_1d(&f.target, &mut v);
                resolution("optimizer.grid_points", f.optimizer.grid_points, f.n, &mut v);
            }
            Command::FitSuperposition2d(f) => {
                if let Target2D::Csv { path } = &f.target {
                    file_exists("target.path", path, base, &mut v);
                }
                resolution("optimizer.grid_points", f.optimizer.grid_points, f.n, &mut v);
            }
            Command::Classical(c) => {
                if c.points == Some(0) {
                    v.push(Violation::new("points", "must be positive"));
                }
            }
            Command::VerifyOracle(o) => {
                if o.draws == 0 {
                    v.push(Violation::new("draws", "must be positive"));
                }
            }
        }
        v
    }
}
