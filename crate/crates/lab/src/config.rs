//! Per-command parameters. Every field is optional at the input layer so a
//! JSON file and command-line flags can be overlaid (flags win); `resolve`
//! fills in the documented defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::LabError;

/// Reads a JSON object of parameters, rejecting unknown keys.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, LabError> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| LabError::Config(format!("config {}: {e}", path.display())))
}

macro_rules! overlay {
    ($cli:expr, $file:expr; $($f:ident),+ $(,)?) => {
        Self { $($f: $cli.$f.or($file.$f)),+ }
    };
}

fn positive(name: &str, v: f64) -> Result<f64, LabError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(LabError::Config(format!("{name} = {v} must be positive")))
    }
}

#[derive(Args, Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct PointArgs {
    /// Wavenumber k [default: 0.8]
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Wavenumber l [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<f64>,
    /// Characteristic branch, plus or minus [default: plus]
    #[arg(long)]
    pub branch: Option<String>,
}

#[derive(Serialize, Debug, Clone)]
pub struct Point {
    pub k: f64,
    pub l: f64,
    pub branch: String,
}

impl PointArgs {
    pub fn overlay(self, file: Self) -> Self {
        overlay!(self, file; k, l, branch)
    }

    pub fn resolve(self) -> Point {
        point(self.k, self.l, self.branch)
    }
}

fn point(k: Option<f64>, l: Option<f64>, branch: Option<String>) -> Point {
    Point { k: k.unwrap_or(0.8), l: l.unwrap_or(0.0), branch: branch.unwrap_or_else(|| "plus".into()) }
}

#[derive(Args, Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct RegionsArgs {
    /// Cells per side of the [-1.05, 1.05]^2 grid [default: 512]
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Directory for regions.csv and regions_summary.json [default: .]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Serialize, Debug, Clone)]
pub struct Regions {
    pub resolution: usize,
    pub out_dir: PathBuf,
}

impl RegionsArgs {
    pub fn overlay(self, file: Self) -> Self {
        overlay!(self, file; resolution, out_dir)
    }

    pub fn resolve(self) -> Regions {
        Regions { resolution: self.resolution.unwrap_or(512), out_dir: self.out_dir.unwrap_or_else(|| ".".into()) }
    }
}

#[derive(Args, Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct SolitonArgs {
    /// Wavenumber k [default: 0.8]
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Wavenumber l [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<f64>,
    /// Characteristic branch, plus or minus [default: plus]
    #[arg(long)]
    pub branch: Option<String>,
    /// KdV speed c3 > 0 [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub c3: Option<f64>,
    /// Profile samples, also the side of the mapped grid [default: 512]
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-width of the profile window [default: 120/sqrt(c3)]
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Directory for soliton_profile.csv and soliton_phi.ccnf [default: .]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Serialize, Debug, Clone)]
pub struct Soliton {
    #[serde(flatten)]
    pub point: Point,
    pub c3: f64,
    pub n: usize,
    pub half_width: f64,
    pub out_dir: PathBuf,
}

impl SolitonArgs {
    pub fn overlay(self, file: Self) -> Self {
        Self {
            k: self.k.or(file.k),
            l: self.l.or(file.l),
            branch: self.branch.or(file.branch),
            c3: self.c3.or(file.c3),
            n: self.n.or(file.n),
            half_width: self.half_width.or(file.half_width),
            out_dir: self.out_dir.or(file.out_dir),
        }
    }

    /// `c3` is validated by the solver so that a bad value is a parameter
    /// error rather than a configuration error.
    pub fn resolve(self) -> Soliton {
        let c3 = self.c3.unwrap_or(1.0);
        let half_width = self.half_width.unwrap_or_else(|| {
            if c3 > 0.0 {
                ccn_core::kdv::DEFAULT_HALF_WIDTH / c3.sqrt()
            } else {
                ccn_core::kdv::DEFAULT_HALF_WIDTH
            }
        });
        Soliton {
            point: point(self.k, self.l, self.branch),
            c3,
            n: self.n.unwrap_or(512),
            half_width,
            out_dir: self.out_dir.unwrap_or_else(|| ".".into()),
        }
    }
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SimKind {
    Rgl,
    Ccn,
}

#[derive(Args, Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// Which equation to evolve
    #[arg(value_enum)]
    pub kind: Option<SimKind>,
    /// Wavenumber k [default: 0.8]
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Wavenumber l [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<f64>,
    /// Characteristic branch, plus or minus [default: plus]
    #[arg(long)]
    pub branch: Option<String>,
    /// Time step [default: rgl 0.1, ccn 0.01]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time, a whole multiple of dt [default: rgl 200, ccn 10]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Grid modes in x [default: rgl 128, ccn 64]
    #[arg(long)]
    pub nx: Option<usize>,
    /// Grid modes in y [default: rgl 8, ccn 16]
    #[arg(long)]
    pub ny: Option<usize>,
    /// Size of the initial perturbation [default: rgl 1e-5, ccn 1e-3]
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Steps between diagnostic samples [default: 10]
    #[arg(long)]
    pub sample_every: Option<usize>,
    /// Steps between checkpoints, a multiple of sample_every; 0 writes only the final state [default: 0]
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Directory for diagnostics and checkpoints [default: .]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// rgl: sideband wavevector that sets the box, "mx,my" [default: 0.05,0]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub sideband: Option<Vec<f64>>,
    /// rgl: retained sideband family width, negative keeps every mode [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub family_width: Option<i64>,
    /// rgl: noise seed [default: 7]
    #[arg(long)]
    pub seed: Option<u64>,
    /// ccn: domain length in X [default: 16 pi]
    #[arg(long)]
    pub lx: Option<f64>,
    /// ccn: domain length in Y [default: 8 pi]
    #[arg(long)]
    pub ly: Option<f64>,
    /// ccn: largest retained |m2| [default: 4]
    #[arg(long)]
    pub m2_band: Option<usize>,
    /// ccn: tracked Fourier mode numbers "mx,my" [default: 1,1]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub track: Option<Vec<i64>>,
}

#[derive(Serialize, Debug, Clone)]
pub struct RglRun {
    #[serde(flatten)]
    pub point: Point,
    pub dt: f64,
    pub t_end: f64,
    pub nx: usize,
    pub ny: usize,
    pub amplitude: f64,
    pub sample_every: usize,
    pub checkpoint_every: usize,
    pub out_dir: PathBuf,
    pub sideband: [f64; 2],
    pub family_width: Option<i64>,
    pub seed: u64,
}

#[derive(Serialize, Debug, Clone)]
pub struct CcnRun {
    #[serde(flatten)]
    pub point: Point,
    pub dt: f64,
    pub t_end: f64,
    pub nx: usize,
    pub ny: usize,
    pub amplitude: f64,
    pub sample_every: usize,
    pub checkpoint_every: usize,
    pub out_dir: PathBuf,
    pub lx: f64,
    pub ly: f64,
    pub m2_band: usize,
    pub track: [i64; 2],
}

#[derive(Serialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Simulation {
    Rgl(RglRun),
    Ccn(CcnRun),
}

impl SimulateArgs {
    pub fn overlay(self, file: Self) -> Self {
        Self {
            kind: self.kind.or(file.kind),
            k: self.k.or(file.k),
            l: self.l.or(file.l),
            branch: self.branch.or(file.branch),
            dt: self.dt.or(file.dt),
            t_end: self.t_end.or(file.t_end),
            nx: self.nx.or(file.nx),
            ny: self.ny.or(file.ny),
            amplitude: self.amplitude.or(file.amplitude),
            sample_every: self.sample_every.or(file.sample_every),
            checkpoint_every: self.checkpoint_every.or(file.checkpoint_every),
            out_dir: self.out_dir.or(file.out_dir),
            sideband: self.sideband.or(file.sideband),
            family_width: self.family_width.or(file.family_width),
            seed: self.seed.or(file.seed),
            lx: self.lx.or(file.lx),
            ly: self.ly.or(file.ly),
            m2_band: self.m2_band.or(file.m2_band),
            track: self.track.or(file.track),
        }
    }

    pub fn resolve(self) -> Result<Simulation, LabError> {
        let kind = self.kind.ok_or_else(|| LabError::Config("simulate needs a kind (rgl or ccn)".into()))?;
        let sample_every = self.sample_every.unwrap_or(10);
        let checkpoint_every = self.checkpoint_every.unwrap_or(0);
        if sample_every == 0 {
            return Err(LabError::Config("sample_every must be at least 1".into()));
        }
        if !checkpoint_every.is_multiple_of(sample_every) {
            return Err(LabError::Config(format!(
                "checkpoint_every = {checkpoint_every} is not a multiple of sample_every = {sample_every}"
            )));
        }
        let point = point(self.k, self.l, self.branch);
        let out_dir = self.out_dir.unwrap_or_else(|| ".".into());
        let pair = |name: &str, v: Option<Vec<f64>>, d: [f64; 2]| -> Result<[f64; 2], LabError> {
            match v {
                None => Ok(d),
                Some(v) => v.try_into().map_err(|_| LabError::Config(format!("{name} needs two components"))),
            }
        };
        let tau = std::f64::consts::TAU;
        Ok(match kind {
            SimKind::Rgl => {
                let sideband = pair("sideband", self.sideband, [0.05, 0.0])?;
                if self.lx.is_some() || self.ly.is_some() || self.m2_band.is_some() || self.track.is_some() {
                    return Err(LabError::Config("lx, ly, m2_band and track apply to ccn runs only".into()));
                }
                Simulation::Rgl(RglRun {
                    point,
                    dt: positive("dt", self.dt.unwrap_or(0.1))?,
                    t_end: self.t_end.unwrap_or(200.0),
                    nx: self.nx.unwrap_or(128),
                    ny: self.ny.unwrap_or(8),
                    amplitude: self.amplitude.unwrap_or(1e-5),
                    sample_every,
                    checkpoint_every,
                    out_dir,
                    sideband,
                    family_width: match self.family_width {
                        None => Some(1),
                        Some(w) if w < 0 => None,
                        Some(w) => Some(w),
                    },
                    seed: self.seed.unwrap_or(7),
                })
            }
            SimKind::Ccn => {
                if self.sideband.is_some() || self.family_width.is_some() || self.seed.is_some() {
                    return Err(LabError::Config("sideband, family_width and seed apply to rgl runs only".into()));
                }
                let track = match self.track {
                    None => [1, 1],
                    Some(v) => v.try_into().map_err(|_| LabError::Config("track needs two components".into()))?,
                };
                Simulation::Ccn(CcnRun {
                    point,
                    dt: positive("dt", self.dt.unwrap_or(0.01))?,
                    t_end: self.t_end.unwrap_or(10.0),
                    nx: self.nx.unwrap_or(64),
                    ny: self.ny.unwrap_or(16),
                    amplitude: self.amplitude.unwrap_or(1e-3),
                    sample_every,
                    checkpoint_every,
                    out_dir,
                    lx: positive("lx", self.lx.unwrap_or(8.0 * tau))?,
                    ly: positive("ly", self.ly.unwrap_or(4.0 * tau))?,
                    m2_band: self.m2_band.unwrap_or(4),
                    track,
                })
            }
        })
    }
}

#[derive(Args, Deserialize, Default, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct ValidateArgs {
    /// quick or full [default: quick]
    #[arg(long)]
    pub level: Option<String>,
    /// Directory for junit.xml and summary.txt [default: .]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Replace the quartic coefficient of S (negative control)
    #[arg(long, hide = true)]
    pub quartic: Option<f64>,
}

#[derive(Serialize, Debug, Clone)]
pub struct Validate {
    pub level: String,
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quartic: Option<f64>,
}

impl ValidateArgs {
    pub fn overlay(self, file: Self) -> Self {
        overlay!(self, file; level, out_dir, quartic)
    }

    pub fn resolve(self) -> Validate {
        Validate {
            level: self.level.unwrap_or_else(|| "quick".into()),
            out_dir: self.out_dir.unwrap_or_else(|| ".".into()),
            quartic: self.quartic,
        }
    }
}
