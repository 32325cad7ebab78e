//! Pseudospectral evolution of the RGL and CCN equations and the
//! diagnostics that connect them to the modulation coefficients.

mod ccn;
mod cn;
mod io;
mod phase;
mod rgl;
mod sideband;
mod zigzag;

pub use ccn::{ccn_evolve, CcnCoefficients, CcnSolver};
pub use cn::{cn_rhs, CnRhs};
pub use io::{read_checkpoint, read_diagnostics_csv, write_checkpoint, write_diagnostics_csv, DiagnosticRow};
pub use phase::{fit_exponential, phase_extract, GrowthFit, PhaseDiagnostics};
pub use rgl::{rgl_evolve, roll_field, RglSolver};
pub use sideband::{sideband_growth, sideband_matrix, sideband_richardson};
pub use zigzag::{zigzag_experiment, zigzag_run, Verdict, ZigzagConfig, ZigzagReport};

use num_complex::Complex;

use crate::error::{CcnError, Result};
use crate::field::Field2D;
use crate::scalar::Real;
use crate::spectral::Spectral2D;

/// Time-stepping scheme. Only the integrating-factor RK4 is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    LawsonRk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig<T> {
    pub dt: T,
    pub t_end: T,
    pub scheme: Scheme,
    /// Largest retained `|m₂|` mode number (CCN only).
    pub m2_band: Option<usize>,
}

impl<T: Real> StepperConfig<T> {
    pub fn new(dt: T, t_end: T) -> Self {
        Self { dt, t_end, scheme: Scheme::LawsonRk4, m2_band: None }
    }

    pub fn with_band(mut self, band: usize) -> Self {
        self.m2_band = Some(band);
        self
    }

    /// Number of steps; `t_end` must be a whole multiple of `dt`.
    pub fn n_steps(&self) -> Result<usize> {
        if !(self.dt > T::zero() && self.dt.is_finite()) {
            return Err(CcnError::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= T::zero() && self.t_end.is_finite()) {
            return Err(CcnError::Config(format!("t_end = {} must be non-negative", self.t_end)));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > T::of(1e-9) * self.t_end.max(T::one()) {
            return Err(CcnError::Config(format!(
                "t_end = {} is not a whole multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n.as_f64() as usize)
    }
}

/// Largest admissible `dt · max(Re L)`.
pub const CFL_MARGIN: f64 = 0.5;

/// State handed to evolution observers.
pub struct Snapshot<'a, T: Real> {
    pub step: usize,
    pub t: T,
    pub hat: &'a [Complex<T>],
    pub spectral: &'a Spectral2D<T>,
    pub kind: crate::field::FieldKind,
}

impl<T: Real> Snapshot<'_, T> {
    /// Physical-space field at this instant.
    pub fn field(&self) -> Field2D<T> {
        let mut v = self.hat.to_vec();
        self.spectral.inverse(&mut v);
        if self.kind == crate::field::FieldKind::CcnPhi {
            for c in v.iter_mut() {
                c.im = T::zero();
            }
        }
        let mut f = Field2D::new(self.spectral.grid, self.kind, v).expect("grid-sized spectrum");
        f.t = self.t;
        f
    }

    /// Normalized Fourier coefficient of signed mode `(mx, my)`.
    pub fn mode(&self, mx: i64, my: i64) -> Complex<T> {
        let g = &self.spectral.grid;
        let idx = crate::spectral::mode_index(my, g.ny) * g.nx + crate::spectral::mode_index(mx, g.nx);
        self.hat[idx] / T::of_usize(g.len())
    }
}

/// Integrating-factor RK4 for `v' = L v + N(v)` with a real diagonal `L`.
pub(crate) struct Lawson<T> {
    e_full: Vec<T>,
    e_half: Vec<T>,
    dt: T,
}

impl<T: Real> Lawson<T> {
    pub(crate) fn new(multiplier: &[T], dt: T) -> Result<Self> {
        let max_growth = multiplier.iter().copied().fold(T::zero(), T::max);
        if dt * max_growth >= T::of(CFL_MARGIN) {
            return Err(CcnError::Config(format!(
                "dt * max linear growth = {} exceeds {CFL_MARGIN}",
                dt * max_growth
            )));
        }
        let half = dt / T::two();
        Ok(Self {
            e_full: multiplier.iter().map(|&l| (l * dt).exp()).collect(),
            e_half: multiplier.iter().map(|&l| (l * half).exp()).collect(),
            dt,
        })
    }

    pub(crate) fn step(&self, v: &mut [Complex<T>], n: &mut impl FnMut(&[Complex<T>], &mut [Complex<T>])) {
        let len = v.len();
        let h = self.dt;
        let h2 = h / T::two();
        let zero = Complex::new(T::zero(), T::zero());
        let mut k1 = vec![zero; len];
        let mut k2 = vec![zero; len];
        let mut k3 = vec![zero; len];
        let mut k4 = vec![zero; len];
        let mut stage = vec![zero; len];

        n(v, &mut k1);
        for i in 0..len {
            stage[i] = (v[i] + k1[i] * h2) * self.e_half[i];
        }
        n(&stage, &mut k2);
        for i in 0..len {
            stage[i] = v[i] * self.e_half[i] + k2[i] * h2;
        }
        n(&stage, &mut k3);
        for i in 0..len {
            stage[i] = v[i] * self.e_full[i] + k3[i] * (h * self.e_half[i]);
        }
        n(&stage, &mut k4);
        let sixth = h / T::of(6.0);
        for i in 0..len {
            let acc = k1[i] * self.e_full[i] + (k2[i] + k3[i]) * (T::two() * self.e_half[i]) + k4[i];
            v[i] = v[i] * self.e_full[i] + acc * sixth;
        }
    }
}

pub(crate) fn all_finite<T: Real>(v: &[Complex<T>]) -> bool {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Measured convergence order from three runs at `dt`, `dt/2`, `dt/4`.
pub fn self_convergence_order<T: Real>(coarse: &Field2D<T>, mid: &Field2D<T>, fine: &Field2D<T>) -> T {
    (coarse.max_diff(mid) / mid.max_diff(fine)).log2()
}
