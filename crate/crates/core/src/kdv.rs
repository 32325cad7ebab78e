//! Reduction of the steady CCN equation to KdV, the rescaling to standard
//! form, the `sech²` solitary wave and its image in the slow `(X, Y)` plane.

use num_complex::Complex;

use crate::coeffs::CoeffBundle;
use crate::error::{CcnError, Result};
use crate::field::{Field2D, FieldKind};
use crate::scalar::Real;
use crate::spectral::{PeriodicGrid2D, Spectral1D, Spectral2D};

/// `|cxy|` below which the reduction is refused.
pub const CXY_TOL: f64 = 1e-9;

/// Steady equation `q_Y + a_nl q q_X + a_disp q_XXX = 0` for `q = φ_X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyReduction<T> {
    pub a_nl: T,
    pub a_disp: T,
    /// No nonlinearity: the reduction is of Airy type and has no solitary wave.
    pub airy: bool,
}

/// Divides the steady CCN equation by the `φ_XY` coefficient `−cxy`.
pub fn steady_reduction<T: Real>(bundle: &CoeffBundle<T>) -> Result<SteadyReduction<T>> {
    if !(bundle.cxy.abs() >= T::of(CXY_TOL)) {
        return Err(CcnError::CoalescingCharacteristics { delta_zz_abs: bundle.cxy.abs().as_f64() });
    }
    let d = bundle.phi_xy();
    let a_nl = bundle.kappa / d;
    Ok(SteadyReduction { a_nl, a_disp: bundle.curly_k / d, airy: a_nl == T::zero() })
}

/// `X = αX̃`, `Y = βỸ`, `q = γq̃` taking the steady equation to
/// `q̃_Ỹ + q̃q̃_X̃ + q̃_X̃X̃X̃ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdvScaling<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub a_nl: T,
    pub a_disp: T,
}

impl<T: Real> KdvScaling<T> {
    /// Largest relative mismatch among `γ/β`, `γ²a_nl/α` and `γa_disp/α³`.
    pub fn matching_defect(&self) -> T {
        let r1 = self.gamma / self.beta;
        let r2 = self.gamma * self.gamma * self.a_nl / self.alpha;
        let r3 = self.gamma * self.a_disp / self.alpha.powi(3);
        let scale = r1.abs().max(r2.abs()).max(r3.abs());
        ((r1 - r2).abs().max((r1 - r3).abs())) / scale
    }

    /// Slope `dY/dX = β/(αc₃)` of the solitary-wave crest line.
    pub fn crest_slope(&self, c3: T) -> T {
        self.beta / (self.alpha * c3)
    }
}

/// `α = √|a_disp|`, `β = α³/a_disp`, `γ = a_disp/(a_nl α²)`. The sign of
/// `a_disp` is carried by `β` (and `γ`); `α` is always positive.
pub fn solve_scaling<T: Real>(a_nl: T, a_disp: T) -> Result<KdvScaling<T>> {
    if a_nl == T::zero() || a_disp == T::zero() || !a_nl.is_finite() || !a_disp.is_finite() {
        return Err(CcnError::DegenerateReduction(format!(
            "need nonzero finite coefficients, got a_nl = {a_nl}, a_disp = {a_disp}"
        )));
    }
    let alpha = a_disp.abs().sqrt();
    let beta = alpha.powi(3) / a_disp;
    let gamma = a_disp / (a_nl * alpha * alpha);
    Ok(KdvScaling { alpha, beta, gamma, a_nl, a_disp })
}

/// Half-width of the `ζ` window in units of `1/√c₃`.
pub const DEFAULT_HALF_WIDTH: f64 = 120.0;
/// Narrowest admissible half-width in units of `1/√c₃`.
pub const MIN_HALF_WIDTH: f64 = 30.0;

/// `q̃(ζ) = 3c₃ sech²(√c₃ ζ / 2)` sampled at `ζ_i = −H + 2Hi/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonProfile<T> {
    pub c3: T,
    pub half_width: T,
    pub zeta: Vec<T>,
    pub samples: Vec<T>,
}

/// `3c₃ sech²(√c₃ ζ / 2)`.
pub fn soliton_value<T: Real>(c3: T, zeta: T) -> T {
    let s = (c3.sqrt() * zeta / T::two()).cosh().recip();
    T::of(3.0) * c3 * s * s
}

pub fn soliton<T: Real>(c3: T, n: usize, half_width: T) -> Result<SolitonProfile<T>> {
    if !(c3 > T::zero() && c3.is_finite()) {
        return Err(CcnError::Parameter(format!("c3 = {c3} must be positive")));
    }
    if n < 8 || !n.is_power_of_two() {
        return Err(CcnError::Parameter(format!("profile size {n} must be a power of two >= 8")));
    }
    if !(half_width * c3.sqrt() >= T::of(MIN_HALF_WIDTH)) {
        return Err(CcnError::Parameter(format!(
            "half-width {half_width} is below {MIN_HALF_WIDTH}/sqrt(c3)"
        )));
    }
    let dz = T::two() * half_width / T::of_usize(n);
    let zeta: Vec<T> = (0..n).map(|i| -half_width + T::of_usize(i) * dz).collect();
    let samples = zeta.iter().map(|&z| soliton_value(c3, z)).collect();
    Ok(SolitonProfile { c3, half_width, zeta, samples })
}

impl<T: Real> SolitonProfile<T> {
    /// Max-norm of `−c₃q̃′ + q̃q̃′ + q̃‴` with spectral derivatives.
    pub fn ode_residual(&self) -> T {
        let sp = Spectral1D::new(self.samples.len(), T::two() * self.half_width);
        let d1 = sp.derivative(&self.samples, 1);
        let d3 = sp.derivative(&self.samples, 3);
        self.samples
            .iter()
            .zip(d1.iter().zip(&d3))
            .map(|(q, (q1, q3))| (-self.c3 * *q1 + *q * *q1 + *q3).abs())
            .fold(T::zero(), T::max)
    }

    pub fn peak(&self) -> T {
        self.samples.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Larger of the two end values.
    pub fn tail(&self) -> T {
        let last = *self.samples.last().expect("non-empty profile");
        self.samples[0].abs().max(last.abs())
    }
}

/// Solitary wave mapped to the slow plane on a doubly periodic box.
#[derive(Debug, Clone)]
pub struct MappedSoliton<T> {
    /// Periodic part of `φ`; the full phase is `slope·X + φ_per`.
    pub phi: Field2D<T>,
    pub q: Field2D<T>,
    /// Mean of `q = φ_X`, the linear part of `φ`.
    pub slope: T,
    /// `dY/dX` of the crest line.
    pub crest_slope: T,
    /// Angle of the crest line against the `X` axis, radians.
    pub crest_angle: T,
}

/// Samples `q(X, Y) = γq̃(X/α − c₃Y/β − H + shift)` on an `nx × ny` box of
/// size `Lx = 2Hα`, `Ly = 2H|β|/c₃` (one crest per period in both
/// directions) and integrates in `X` for `φ`.
pub fn map_back<T: Real>(
    profile: &SolitonProfile<T>,
    scaling: &KdvScaling<T>,
    nx: usize,
    ny: usize,
    shift: T,
) -> Result<MappedSoliton<T>> {
    let h = profile.half_width;
    let c3 = profile.c3;
    let lz = T::two() * h;
    let lx = lz * scaling.alpha;
    let ly = lz * scaling.beta.abs() / c3;
    let grid = PeriodicGrid2D::new(nx, ny, lx, ly)?;
    let wrap = |z: T| {
        let w = (z + h) % lz;
        if w < T::zero() { w + lz - h } else { w - h }
    };
    let q = Field2D::from_real_fn(grid, |x, y| {
        let z = wrap(x / scaling.alpha - c3 * y / scaling.beta - h + shift);
        scaling.gamma * soliton_value(c3, z)
    });
    let sx = Spectral1D::new(nx, lx);
    let mut phi_vals = Vec::with_capacity(grid.len());
    let mut slope = T::zero();
    for j in 0..ny {
        let row: Vec<T> = (0..nx).map(|i| q.at(i, j).re).collect();
        let (anti, mean) = sx.antiderivative(&row);
        slope += mean;
        phi_vals.extend(anti.into_iter().map(|v| Complex::new(v, T::zero())));
    }
    let slope = slope / T::of_usize(ny);
    let phi = Field2D::new(grid, FieldKind::CcnPhi, phi_vals)?;
    let crest_slope = scaling.crest_slope(c3);
    Ok(MappedSoliton { phi, q, slope, crest_slope, crest_angle: crest_slope.atan() })
}

/// Max-norm of `φ_xy·φ_XY + κφ_Xφ_XX + 𝒦φ_XXXX` for `φ = slope·X + φ_per`.
pub fn steady_ccn_residual<T: Real>(m: &MappedSoliton<T>, phi_xy: T, kappa: T, curly_k: T) -> T {
    let sp = Spectral2D::new(m.phi.grid);
    let p = m.phi.real_values();
    let px = sp.derivative_real(&p, 1, 0);
    let pxx = sp.derivative_real(&p, 2, 0);
    let pxy = sp.derivative_real(&p, 1, 1);
    let pxxxx = sp.derivative_real(&p, 4, 0);
    (0..p.len())
        .map(|i| (phi_xy * pxy[i] + kappa * (m.slope + px[i]) * pxx[i] + curly_k * pxxxx[i]).abs())
        .fold(T::zero(), T::max)
}

/// Residual of the mapped solitary wave for a coefficient bundle.
pub fn bundle_residual<T: Real>(m: &MappedSoliton<T>, b: &CoeffBundle<T>) -> T {
    steady_ccn_residual(m, b.phi_xy(), b.kappa, b.curly_k)
}
