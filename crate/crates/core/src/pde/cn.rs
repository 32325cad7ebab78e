use num_complex::Complex;

use crate::error::{CcnError, Result};
use crate::field::{Field2D, FieldKind};
use crate::roll::Wavenumber;
use crate::scalar::Real;
use crate::spectral::Spectral2D;

/// Nonlinear CN right-hand side `∂_Xℬ(k+q, ℓ+r) + ∂_Y𝒜(k+q, ℓ+r)`.
#[derive(Debug, Clone)]
pub struct CnRhs<T> {
    pub field: Field2D<T>,
    /// Set when the local wavenumber leaves the existence disc somewhere.
    pub out_of_range: bool,
    /// Largest local `|k + q|² + |ℓ + r|²`.
    pub max_q2: T,
}

/// Evaluates the CN right-hand side for the phase `φ` modulating the roll
/// at `kl`. `slope` is a uniform phase gradient added to `∇φ`, for phases
/// that are periodic only up to a linear part.
pub fn cn_rhs<T: Real>(phi: &Field2D<T>, kl: Wavenumber<T>, slope: (T, T)) -> Result<CnRhs<T>> {
    if phi.kind != FieldKind::CcnPhi {
        return Err(CcnError::Config("cn_rhs needs a real phase field".into()));
    }
    let sp = Spectral2D::new(phi.grid);
    let re = phi.real_values();
    let q = sp.derivative_real(&re, 1, 0);
    let r = sp.derivative_real(&re, 0, 1);
    let mut max_q2 = T::zero();
    let mut b = Vec::with_capacity(re.len());
    let mut a = Vec::with_capacity(re.len());
    for (qi, ri) in q.iter().zip(&r) {
        let kk = kl.k + slope.0 + *qi;
        let ll = kl.l + slope.1 + *ri;
        let q2 = kk * kk + ll * ll;
        max_q2 = max_q2.max(q2);
        let amp2 = T::one() - q2;
        b.push(kk * amp2);
        a.push(ll * amp2);
    }
    let bx = sp.derivative_real(&b, 1, 0);
    let ay = sp.derivative_real(&a, 0, 1);
    let values = bx.iter().zip(&ay).map(|(x, y)| Complex::new(*x + *y, T::zero())).collect();
    let mut field = Field2D::new(phi.grid, FieldKind::CcnPhi, values)?;
    field.t = phi.t;
    Ok(CnRhs { field, out_of_range: max_q2 >= T::one(), max_q2 })
}
