use num_complex::Complex;

use super::{all_finite, Lawson, Snapshot, StepperConfig};
use crate::error::{CcnError, Result};
use crate::field::{Field2D, FieldKind};
use crate::roll::Wavenumber;
use crate::scalar::Real;
use crate::spectral::{PeriodicGrid2D, Spectral2D};

/// Retained fraction for the cubic RGL nonlinearity.
pub const CUBIC_DEALIAS: f64 = 0.5;

/// Integrator for `Ψ_t = ΔΨ + Ψ − |Ψ|²Ψ` on a periodic grid.
///
/// The linear part `1 − |m|²` is integrated exactly; the cubic term is
/// evaluated pseudospectrally and truncated to `|m| < n/4`. An optional mode
/// filter restricts the dynamics further to a chosen set of Fourier modes.
pub struct RglSolver<T: Real> {
    spectral: Spectral2D<T>,
    multiplier: Vec<T>,
    keep: Vec<bool>,
}

impl<T: Real> RglSolver<T> {
    pub fn new(grid: PeriodicGrid2D<T>) -> Self {
        let spectral = Spectral2D::new(grid);
        let mut multiplier = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (kx, ky) = (spectral.kx()[i], spectral.ky()[j]);
                multiplier.push(T::one() - kx * kx - ky * ky);
            }
        }
        let keep = spectral.dealias_mask(T::of(CUBIC_DEALIAS));
        Self { spectral, multiplier, keep }
    }

    /// Additionally zeroes every mode where `filter` is false.
    pub fn with_filter(mut self, filter: &[bool]) -> Result<Self> {
        if filter.len() != self.keep.len() {
            return Err(CcnError::Dimension("mode filter does not match the grid".into()));
        }
        for (k, &f) in self.keep.iter_mut().zip(filter) {
            *k = *k && f;
        }
        Ok(self)
    }

    pub fn spectral(&self) -> &Spectral2D<T> {
        &self.spectral
    }

    pub fn retained(&self) -> &[bool] {
        &self.keep
    }

    /// Evolves `psi0` to `cfg.t_end`, calling `observe` at step 0 and every
    /// `every` steps (and at the last step).
    pub fn run(
        &self,
        psi0: &Field2D<T>,
        cfg: &StepperConfig<T>,
        every: usize,
        mut observe: impl FnMut(&Snapshot<'_, T>) -> Result<()>,
    ) -> Result<Field2D<T>> {
        if psi0.kind != FieldKind::RglPsi {
            return Err(CcnError::Config("rgl_evolve needs an rgl_psi field".into()));
        }
        if psi0.grid != self.spectral.grid {
            return Err(CcnError::Dimension("initial field lives on a different grid".into()));
        }
        let steps = cfg.n_steps()?;
        let lawson = Lawson::new(&self.multiplier, cfg.dt)?;
        let mut hat = psi0.values().to_vec();
        self.spectral.forward(&mut hat);
        self.project(&mut hat);

        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; hat.len()];
        let mut nonlinear = |v: &[Complex<T>], out: &mut [Complex<T>]| {
            buf.copy_from_slice(v);
            self.spectral.inverse(&mut buf);
            for (o, p) in out.iter_mut().zip(&buf) {
                *o = -*p * p.norm_sqr();
            }
            self.spectral.forward(out);
            self.project(out);
        };

        let t0 = psi0.t;
        let every = every.max(1);
        observe(&Snapshot { step: 0, t: t0, hat: &hat, spectral: &self.spectral, kind: FieldKind::RglPsi })?;
        for step in 1..=steps {
            lawson.step(&mut hat, &mut nonlinear);
            let t = t0 + T::of_usize(step) * cfg.dt;
            if !all_finite(&hat) {
                return Err(CcnError::Divergence { t: t.as_f64() });
            }
            if step % every == 0 || step == steps {
                observe(&Snapshot { step, t, hat: &hat, spectral: &self.spectral, kind: FieldKind::RglPsi })?;
            }
        }
        let snap = Snapshot {
            step: steps,
            t: t0 + T::of_usize(steps) * cfg.dt,
            hat: &hat,
            spectral: &self.spectral,
            kind: FieldKind::RglPsi,
        };
        Ok(snap.field())
    }

    fn project(&self, hat: &mut [Complex<T>]) {
        for (h, &k) in hat.iter_mut().zip(&self.keep) {
            if !k {
                *h = Complex::new(T::zero(), T::zero());
            }
        }
    }
}

/// Evolves `Ψ` under RGL. Modes outside `|m| < n/4` are discarded from the
/// initial data.
pub fn rgl_evolve<T: Real>(psi0: &Field2D<T>, cfg: &StepperConfig<T>) -> Result<Field2D<T>> {
    RglSolver::new(psi0.grid).run(psi0, cfg, usize::MAX, |_| Ok(()))
}

/// `Ψ = √(1 − k² − ℓ²) e^{i(kx + ℓy)}`.
pub fn roll_field<T: Real>(grid: PeriodicGrid2D<T>, kl: Wavenumber<T>) -> Result<Field2D<T>> {
    let a = kl.amp2()?.sqrt();
    Ok(Field2D::from_fn(grid, FieldKind::RglPsi, |x, y| Complex::from_polar(a, kl.k * x + kl.l * y)))
}
