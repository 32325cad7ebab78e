use crate::error::Result;
use crate::roll::Wavenumber;
use crate::scalar::Real;

/// Linearization of RGL about the roll at `kl` for Bloch sidebands `±m`,
/// in the basis `(w_m, w̄_{−m})` of the co-rotating perturbation
/// `Ψ = e^{iθ}(a + w)`. The matrix is real and symmetric.
pub fn sideband_matrix<T: Real>(kl: Wavenumber<T>, m: (T, T)) -> Result<[[T; 2]; 2]> {
    let a2 = kl.amp2()?;
    let m2 = m.0 * m.0 + m.1 * m.1;
    let km = kl.k * m.0 + kl.l * m.1;
    let two = T::two();
    Ok([[-m2 - two * km - a2, -a2], [-a2, -m2 + two * km - a2]])
}

/// Leading eigenvalue `−|m|² − a² + √(a⁴ + 4(K·m)²)` of
/// [`sideband_matrix`], evaluated without cancellation.
pub fn sideband_growth<T: Real>(kl: Wavenumber<T>, m: (T, T)) -> Result<T> {
    let a2 = kl.amp2()?;
    let m2 = m.0 * m.0 + m.1 * m.1;
    let km = kl.k * m.0 + kl.l * m.1;
    let y = T::of(4.0) * km * km;
    Ok(-m2 + y / ((a2 * a2 + y).sqrt() + a2))
}

/// Richardson-extrapolated `lim_{h→0} λ(h·dir)/h²` from steps `h` and `h/2`.
pub fn sideband_richardson<T: Real>(kl: Wavenumber<T>, dir: (T, T), h: T) -> Result<T> {
    let f = |s: T| -> Result<T> { Ok(sideband_growth(kl, (dir.0 * s, dir.1 * s))? / (s * s)) };
    let coarse = f(h)?;
    let fine = f(h / T::two())?;
    Ok((T::of(4.0) * fine - coarse) / T::of(3.0))
}
