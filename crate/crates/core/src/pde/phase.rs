use num_complex::Complex;

use crate::error::{CcnError, Result};
use crate::field::{Field2D, FieldKind};
use crate::roll::Wavenumber;
use crate::scalar::Real;
use crate::spectral::Spectral2D;

/// Below this modulus the phase of `Ψ` is treated as singular.
pub const MIN_AMPLITUDE: f64 = 0.05;

/// Exponential fit `amplitude ≈ exp(intercept + rate·t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit<T> {
    pub rate: T,
    pub intercept: T,
    /// Coefficient of determination of the log-linear fit, in `[0, 1]`.
    pub r2: T,
    pub t_start: T,
    pub t_end: T,
    pub n_points: usize,
}

/// Least-squares line through `(t, ln amplitude)`.
pub fn fit_exponential<T: Real>(t: &[T], amplitude: &[T]) -> Result<GrowthFit<T>> {
    if t.len() != amplitude.len() || t.len() < 3 {
        return Err(CcnError::Parameter("growth fit needs at least three matching samples".into()));
    }
    if amplitude.iter().any(|a| !(*a > T::zero())) {
        return Err(CcnError::Parameter("growth fit needs positive amplitudes".into()));
    }
    let n = T::of_usize(t.len());
    let y: Vec<T> = amplitude.iter().map(|a| a.ln()).collect();
    let tm = t.iter().copied().sum::<T>() / n;
    let ym = y.iter().copied().sum::<T>() / n;
    let mut stt = T::zero();
    let mut sty = T::zero();
    let mut syy = T::zero();
    for (ti, yi) in t.iter().zip(&y) {
        let (dt, dy) = (*ti - tm, *yi - ym);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == T::zero() {
        return Err(CcnError::Parameter("growth fit needs distinct times".into()));
    }
    let rate = sty / stt;
    let r2 = if syy == T::zero() { T::one() } else { (sty * sty / (stt * syy)).min(T::one()).max(T::zero()) };
    Ok(GrowthFit {
        rate,
        intercept: ym - rate * tm,
        r2,
        t_start: t[0],
        t_end: t[t.len() - 1],
        n_points: t.len(),
    })
}

/// Slow phase and amplitude defect of a modulated roll.
#[derive(Debug, Clone)]
pub struct PhaseDiagnostics<T> {
    pub phi_field: Field2D<T>,
    pub amp_defect: T,
    pub growth_fit: Option<GrowthFit<T>>,
}

fn wrap<T: Real>(d: T) -> T {
    let pi = T::PI();
    let tau = T::TAU();
    let mut w = d % tau;
    if w > pi {
        w -= tau;
    } else if w <= -pi {
        w += tau;
    }
    w
}

/// Extracts the slow phase `φ` from `Ψ ≈ a e^{i(kx + ℓy + φ)}`.
///
/// The demodulated argument is unwrapped along the first column and then
/// along every row, and shifted to zero mean. The amplitude defect compares
/// `|Ψ|` with the roll amplitude at the local wavenumber `(k, ℓ) + ∇φ`.
pub fn phase_extract<T: Real>(psi: &Field2D<T>, kl: Wavenumber<T>) -> Result<PhaseDiagnostics<T>> {
    if psi.kind != FieldKind::RglPsi {
        return Err(CcnError::Config("phase extraction needs an rgl_psi field".into()));
    }
    let g = psi.grid;
    let min_amp = psi.values().iter().map(|c| c.norm()).fold(T::infinity(), T::min);
    if !(min_amp > T::of(MIN_AMPLITUDE)) {
        return Err(CcnError::DefectPresent { min_amplitude: min_amp.as_f64() });
    }
    let mut wrapped = vec![T::zero(); g.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let carrier = Complex::from_polar(T::one(), -(kl.k * g.x(i) + kl.l * g.y(j)));
            wrapped[j * g.nx + i] = (psi.at(i, j) * carrier).arg();
        }
    }
    let mut phi = vec![T::zero(); g.len()];
    phi[0] = wrapped[0];
    for j in 1..g.ny {
        let (prev, cur) = ((j - 1) * g.nx, j * g.nx);
        phi[cur] = phi[prev] + wrap(wrapped[cur] - wrapped[prev]);
    }
    for j in 0..g.ny {
        let row = j * g.nx;
        for i in 1..g.nx {
            phi[row + i] = phi[row + i - 1] + wrap(wrapped[row + i] - wrapped[row + i - 1]);
        }
    }
    let mean = phi.iter().copied().sum::<T>() / T::of_usize(phi.len());
    for p in phi.iter_mut() {
        *p -= mean;
    }

    let sp = Spectral2D::new(g);
    let qx = sp.derivative_real(&phi, 1, 0);
    let qy = sp.derivative_real(&phi, 0, 1);
    let mut amp_defect = T::zero();
    for idx in 0..g.len() {
        let (kk, ll) = (kl.k + qx[idx], kl.l + qy[idx]);
        let local = (T::one() - kk * kk - ll * ll).max(T::zero()).sqrt();
        amp_defect = amp_defect.max((psi.values()[idx].norm() - local).abs());
    }
    let mut phi_field = Field2D::new(g, FieldKind::CcnPhi, phi.into_iter().map(|p| Complex::new(p, T::zero())).collect())?;
    phi_field.t = psi.t;
    Ok(PhaseDiagnostics { phi_field, amp_defect, growth_fit: None })
}
