use num_complex::Complex;

use super::{all_finite, Lawson, Snapshot, StepperConfig};
use crate::coeffs::CoeffBundle;
use crate::error::{CcnError, Result};
use crate::field::{Field2D, FieldKind};
use crate::scalar::Real;
use crate::spectral::{mode_number, Spectral2D};

/// Scalars of `τφ_T = φ_xy·φ_XY + κφ_Xφ_XX + 𝒦φ_XXXX`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcnCoefficients<T> {
    pub tau: T,
    pub phi_xy: T,
    pub kappa: T,
    pub curly_k: T,
}

impl<T: Real> CcnCoefficients<T> {
    pub fn from_bundle(b: &CoeffBundle<T>) -> Self {
        Self { tau: b.tau, phi_xy: b.phi_xy(), kappa: b.kappa, curly_k: b.curly_k }
    }

    /// Linear growth rate of `e^{i(m₁X + m₂Y)}`.
    pub fn multiplier(&self, m1: T, m2: T) -> T {
        let m1sq = m1 * m1;
        (-self.phi_xy * m1 * m2 + self.curly_k * m1sq * m1sq) / self.tau
    }
}

/// Integrator for the CCN phase equation.
///
/// The linear part is exact through the integrating factor; the quadratic
/// term is evaluated as `(κ/2)(φ_X²)_X` with the grid's dealiasing fraction.
/// `Y`-modes with `|m₂| > m2_band` are removed.
pub struct CcnSolver<T: Real> {
    spectral: Spectral2D<T>,
    coeffs: CcnCoefficients<T>,
    multiplier: Vec<T>,
    keep: Vec<bool>,
}

impl<T: Real> CcnSolver<T> {
    pub fn new(grid: crate::spectral::PeriodicGrid2D<T>, coeffs: CcnCoefficients<T>, m2_band: Option<usize>) -> Result<Self> {
        if !(coeffs.tau > T::zero()) {
            return Err(CcnError::Parameter(format!("tau = {} must be positive", coeffs.tau)));
        }
        if coeffs.curly_k >= T::zero() && m2_band.is_none() {
            return Err(CcnError::IllPosed(format!(
                "fourth-derivative coefficient {} is not negative and no m2_band limits the Y-modes",
                coeffs.curly_k
            )));
        }
        let spectral = Spectral2D::new(grid);
        let mut keep = spectral.dealias_mask(grid.dealias);
        let mut multiplier = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let band_ok = m2_band.is_none_or(|b| mode_number(j, grid.ny).unsigned_abs() as usize <= b);
            for i in 0..grid.nx {
                multiplier.push(coeffs.multiplier(spectral.kx()[i], spectral.ky()[j]));
                keep[j * grid.nx + i] &= band_ok;
            }
        }
        // dropped modes never grow, so they do not constrain the step
        for (m, &k) in multiplier.iter_mut().zip(&keep) {
            if !k {
                *m = T::zero();
            }
        }
        Ok(Self { spectral, coeffs, multiplier, keep })
    }

    pub fn spectral(&self) -> &Spectral2D<T> {
        &self.spectral
    }

    pub fn retained(&self) -> &[bool] {
        &self.keep
    }

    pub fn multiplier(&self) -> &[T] {
        &self.multiplier
    }

    pub fn run(
        &self,
        phi0: &Field2D<T>,
        cfg: &StepperConfig<T>,
        every: usize,
        mut observe: impl FnMut(&Snapshot<'_, T>) -> Result<()>,
    ) -> Result<Field2D<T>> {
        if phi0.kind != FieldKind::CcnPhi {
            return Err(CcnError::Config("ccn_evolve needs a ccn_phi field".into()));
        }
        if phi0.grid != self.spectral.grid {
            return Err(CcnError::Dimension("initial field lives on a different grid".into()));
        }
        let steps = cfg.n_steps()?;
        let lawson = Lawson::new(&self.multiplier, cfg.dt)?;
        let mut hat: Vec<Complex<T>> = phi0.values().iter().map(|c| Complex::new(c.re, T::zero())).collect();
        self.spectral.forward(&mut hat);
        self.project(&mut hat);

        let zero = Complex::new(T::zero(), T::zero());
        let mut buf = vec![zero; hat.len()];
        let half_kappa = self.coeffs.kappa / (T::two() * self.coeffs.tau);
        let nx = self.spectral.grid.nx;
        let kx = self.spectral.kx().to_vec();
        let mut nonlinear = |v: &[Complex<T>], out: &mut [Complex<T>]| {
            if half_kappa == T::zero() {
                out.fill(zero);
                return;
            }
            buf.copy_from_slice(v);
            self.spectral.differentiate_hat(&mut buf, 1, 0);
            self.spectral.inverse(&mut buf);
            for (o, p) in out.iter_mut().zip(&buf) {
                *o = Complex::new(p.re * p.re * half_kappa, T::zero());
            }
            self.spectral.forward(out);
            for (idx, o) in out.iter_mut().enumerate() {
                *o = if self.keep[idx] { *o * Complex::new(T::zero(), kx[idx % nx]) } else { zero };
            }
        };

        let t0 = phi0.t;
        let every = every.max(1);
        observe(&Snapshot { step: 0, t: t0, hat: &hat, spectral: &self.spectral, kind: FieldKind::CcnPhi })?;
        for step in 1..=steps {
            lawson.step(&mut hat, &mut nonlinear);
            let t = t0 + T::of_usize(step) * cfg.dt;
            if !all_finite(&hat) {
                return Err(CcnError::Divergence { t: t.as_f64() });
            }
            if step % every == 0 || step == steps {
                observe(&Snapshot { step, t, hat: &hat, spectral: &self.spectral, kind: FieldKind::CcnPhi })?;
            }
        }
        Ok(Snapshot {
            step: steps,
            t: t0 + T::of_usize(steps) * cfg.dt,
            hat: &hat,
            spectral: &self.spectral,
            kind: FieldKind::CcnPhi,
        }
        .field())
    }

    fn project(&self, hat: &mut [Complex<T>]) {
        for (h, &k) in hat.iter_mut().zip(&self.keep) {
            if !k {
                *h = Complex::new(T::zero(), T::zero());
            }
        }
    }
}

/// Evolves the slow phase under the CCN equation with the bundle's
/// coefficients.
pub fn ccn_evolve<T: Real>(phi0: &Field2D<T>, bundle: &CoeffBundle<T>, cfg: &StepperConfig<T>) -> Result<Field2D<T>> {
    CcnSolver::new(phi0.grid, CcnCoefficients::from_bundle(bundle), cfg.m2_band)?.run(phi0, cfg, usize::MAX, |_| Ok(()))
}
