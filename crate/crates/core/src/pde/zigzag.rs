use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::io::DiagnosticRow;
use super::phase::{fit_exponential, GrowthFit};
use super::rgl::{RglSolver, CUBIC_DEALIAS};
use super::sideband::sideband_growth;
use super::{Snapshot, StepperConfig};
use crate::coeffs::{cn_quadratic, fluxes_closed};
use crate::error::{CcnError, Result};
use crate::field::{Field2D, FieldKind};
use crate::roll::Wavenumber;
use crate::spectral::{mode_index, mode_number, PeriodicGrid2D};

/// Roll stability run in full RGL.
#[derive(Debug, Clone, PartialEq)]
pub struct ZigzagConfig {
    pub kl: Wavenumber<f64>,
    /// Size of the seeded phase perturbation.
    pub amplitude: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Long-wave sideband that sets the box: `L = 2π/|m|` per nonzero component.
    pub sideband: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Keep only modes within this many sideband steps of the roll; `None`
    /// evolves every dealiased mode. With `Some(1)` the run is RGL restricted
    /// to the roll and its seeded sideband pair; wider families let faster
    /// Eckhaus sidebands, seeded by the nonlinearity, overtake the tracked one.
    pub family_width: Option<i64>,
    pub seed: u64,
    pub sample_every: usize,
}

impl ZigzagConfig {
    pub fn new(kl: Wavenumber<f64>, amplitude: f64, t_end: f64) -> Self {
        Self {
            kl,
            amplitude,
            t_end,
            dt: 0.1,
            sideband: (0.05, 0.0),
            nx: 128,
            ny: 8,
            family_width: Some(1),
            seed: 7,
            sample_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Unstable,
    Stable,
    /// Nothing was seeded, so nothing can grow.
    StableDegenerate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Unstable => "unstable",
            Verdict::Stable => "stable",
            Verdict::StableDegenerate => "stable-degenerate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZigzagReport {
    pub kl_snapped: Wavenumber<f64>,
    pub snap: (f64, f64),
    pub lx: f64,
    pub ly: f64,
    /// Tracked sideband wavevector (the seeded mode with the largest
    /// predicted rate).
    pub tracked: (f64, f64),
    /// Largest sideband-matrix rate over the seeded modes.
    pub predicted_rate: f64,
    /// Largest `−Q(m)/τ` over the seeded modes.
    pub cn_rate: f64,
    pub fit: Option<GrowthFit<f64>>,
    pub verdict: Verdict,
    pub series: Vec<DiagnosticRow>,
    pub final_psi: Field2D<f64>,
}

impl ZigzagReport {
    /// `|measured − predicted| / |predicted|`.
    pub fn rate_rel_err(&self) -> Option<f64> {
        self.fit.map(|f| (f.rate - self.predicted_rate).abs() / self.predicted_rate.abs())
    }

    /// Whether the verdict agrees in sign with the CN dispersion.
    pub fn sign_agrees(&self) -> bool {
        match self.verdict {
            Verdict::Unstable => self.cn_rate > 0.0,
            Verdict::Stable => self.cn_rate <= 0.0,
            Verdict::StableDegenerate => true,
        }
    }
}

/// Lower end of the growth-fit window, relative to the initial modulus.
pub const FIT_START_FACTOR: f64 = 10.0;
/// Upper end of the growth-fit window.
pub const FIT_END_LEVEL: f64 = 1e-2;

fn box_length(m: f64) -> f64 {
    std::f64::consts::TAU / if m != 0.0 { m.abs() } else { 0.05 }
}

/// Seeds the roll at `cfg.kl` with long-wave phase noise, evolves it under
/// RGL and fits the growth of the dominant seeded sideband.
pub fn zigzag_experiment(cfg: &ZigzagConfig) -> Result<ZigzagReport> {
    zigzag_run(cfg, |_| Ok(()))
}

/// [`zigzag_experiment`] that also hands every sampled state to `on_sample`.
pub fn zigzag_run(
    cfg: &ZigzagConfig,
    mut on_sample: impl FnMut(&Snapshot<'_, f64>) -> Result<()>,
) -> Result<ZigzagReport> {
    if !(cfg.amplitude >= 0.0 && cfg.amplitude.is_finite()) {
        return Err(CcnError::Parameter(format!("amplitude {} must be non-negative", cfg.amplitude)));
    }
    if cfg.sideband == (0.0, 0.0) {
        return Err(CcnError::Parameter("sideband wavevector must be nonzero".into()));
    }
    let (lx, ly) = (box_length(cfg.sideband.0), box_length(cfg.sideband.1));
    let grid = PeriodicGrid2D::new(cfg.nx, cfg.ny, lx, ly)?;
    let (k, dk) = grid.snap_kx(cfg.kl.k);
    let (l, dl) = grid.snap_ky(cfg.kl.l);
    let kl = Wavenumber::new(k, l);
    let a = kl.amp2()?.sqrt();

    let roll = (
        (k * lx / std::f64::consts::TAU).round() as i64,
        (l * ly / std::f64::consts::TAU).round() as i64,
    );
    let step = (i64::from(cfg.sideband.0 != 0.0), i64::from(cfg.sideband.1 != 0.0));
    let width = cfg.family_width.unwrap_or(0);
    let cap = |n: usize| (CUBIC_DEALIAS * n as f64 / 2.0).ceil() as i64;
    if roll.0.abs() + width * step.0 >= cap(cfg.nx) || roll.1.abs() + width * step.1 >= cap(cfg.ny) {
        return Err(CcnError::Config("roll and its sidebands do not fit inside the dealiased band".into()));
    }

    // seeded lattice offsets, one of each ± pair
    let mut seeds = Vec::new();
    for p in -step.0..=step.0 {
        for q in -step.1..=step.1 {
            if (p, q) > (0, 0) {
                seeds.push((p, q));
            }
        }
    }
    let wavevector = |s: (i64, i64)| {
        (s.0 as f64 * std::f64::consts::TAU / lx, s.1 as f64 * std::f64::consts::TAU / ly)
    };
    let mut tracked = seeds[0];
    let mut predicted_rate = f64::NEG_INFINITY;
    let mut cn_rate = f64::NEG_INFINITY;
    let fd = fluxes_closed(kl)?;
    for &s in &seeds {
        let m = wavevector(s);
        let g = sideband_growth(kl, m)?;
        if g > predicted_rate {
            predicted_rate = g;
            tracked = s;
        }
        cn_rate = cn_rate.max(-cn_quadratic(&fd, m.0, m.1) / (a * a));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise: Vec<((f64, f64), f64, f64)> = seeds
        .iter()
        .map(|&s| (wavevector(s), cfg.amplitude * rng.gen_range(0.5..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let psi0 = Field2D::from_fn(grid, FieldKind::RglPsi, |x, y| {
        let phase: f64 = noise.iter().map(|((mx, my), amp, ph)| amp * (mx * x + my * y + ph).cos()).sum();
        // linear in the phase so no faster harmonics of the seed are planted
        Complex::from_polar(a, k * x + l * y) * Complex::new(1.0, phase)
    });

    let mut solver = RglSolver::new(grid);
    if let Some(w) = cfg.family_width {
        let mut filter = vec![false; grid.len()];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let di = mode_number(i, grid.nx) - roll.0;
                let dj = mode_number(j, grid.ny) - roll.1;
                filter[j * grid.nx + i] = di.abs() <= w * step.0 && dj.abs() <= w * step.1;
            }
        }
        solver = solver.with_filter(&filter)?;
    }

    let plus = (roll.0 + tracked.0, roll.1 + tracked.1);
    let minus = (roll.0 - tracked.0, roll.1 - tracked.1);
    let idx = |m: (i64, i64)| mode_index(m.1, grid.ny) * grid.nx + mode_index(m.0, grid.nx);
    let norm = 1.0 / grid.len() as f64;
    let mut series = Vec::new();
    let stepper = StepperConfig::new(cfg.dt, cfg.t_end);
    let final_psi = solver.run(&psi0, &stepper, cfg.sample_every, |snap| {
        let cp = snap.hat[idx(plus)] * norm;
        let cm = snap.hat[idx(minus)] * norm;
        series.push(DiagnosticRow {
            t: snap.t,
            mode_re: cp.re,
            mode_im: cp.im,
            amplitude: (cp.norm_sqr() + cm.norm_sqr()).sqrt(),
            fitted_rate: None,
        });
        on_sample(snap)
    })?;

    let amp0 = series[0].amplitude;
    let (fit, verdict) = if cfg.amplitude == 0.0 {
        (None, Verdict::StableDegenerate)
    } else {
        let start = series.iter().position(|r| r.amplitude >= FIT_START_FACTOR * amp0);
        let window: Vec<&DiagnosticRow> = match start {
            Some(s) => series[s..].iter().take_while(|r| r.amplitude <= FIT_END_LEVEL).collect(),
            None => series.iter().filter(|r| r.t >= 0.25 * cfg.t_end).collect(),
        };
        let t: Vec<f64> = window.iter().map(|r| r.t).collect();
        let amp: Vec<f64> = window.iter().map(|r| r.amplitude).collect();
        let fit = fit_exponential(&t, &amp).ok();
        let grew = start.is_some() && fit.is_some_and(|f| f.rate > 0.0);
        (fit, if grew { Verdict::Unstable } else { Verdict::Stable })
    };
    if let Some(f) = fit {
        for r in series.iter_mut() {
            r.fitted_rate = Some(f.rate);
        }
    }

    Ok(ZigzagReport {
        kl_snapped: kl,
        snap: (dk, dl),
        lx,
        ly,
        tracked: wavevector(tracked),
        predicted_rate,
        cn_rate,
        fit,
        verdict,
        series,
        final_psi,
    })
}
