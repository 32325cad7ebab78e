//! Roll family of the RGL system: closed-form construction at each
//! wavenumber, wavenumber derivatives, loop sampling and region
//! classification.

use crate::coeffs::delta_zz_closed;
use crate::error::{CcnError, Result};
use crate::linalg::{self, State};
use crate::msys::{block_rotation, LoopFunction};
use crate::scalar::Real;

/// Wavenumber vector `(k, ℓ)` of a roll.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumber<T> {
    pub k: T,
    pub l: T,
}

impl<T: Real> Wavenumber<T> {
    pub fn new(k: T, l: T) -> Self {
        Self { k, l }
    }

    pub fn q2(&self) -> T {
        self.k * self.k + self.l * self.l
    }

    pub fn q_norm(&self) -> T {
        self.q2().sqrt()
    }

    /// Polar angle of `(k, ℓ)`.
    pub fn angle(&self) -> T {
        self.l.atan2(self.k)
    }

    pub fn from_polar(q: T, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self { k: q * c, l: q * s }
    }

    pub fn neg(&self) -> Self {
        Self { k: -self.k, l: -self.l }
    }

    fn outside_error(&self) -> CcnError {
        CcnError::OutsideExistence { k: self.k.as_f64(), l: self.l.as_f64(), q2: self.q2().as_f64() }
    }

    /// Squared roll amplitude `1 − k² − ℓ²`, refusing outside the open disc.
    pub fn amp2(&self) -> Result<T> {
        let a2 = T::one() - self.q2();
        if a2 > T::zero() && self.k.is_finite() && self.l.is_finite() {
            Ok(a2)
        } else {
            Err(self.outside_error())
        }
    }
}

/// Roll at one wavenumber in the reduced representation (phase `θ = 0`,
/// amplitude along the first axis).
#[derive(Debug, Clone, PartialEq)]
pub struct RollState<T> {
    pub kl: Wavenumber<T>,
    pub u_hat: [T; 2],
    pub amp2: T,
    pub zhat0: State<T>,
    pub ztheta0: State<T>,
    pub zk0: State<T>,
    pub zl0: State<T>,
    pub zkk0: State<T>,
    pub zkl0: State<T>,
    pub zll0: State<T>,
    /// Largest componentwise gap between the analytic second derivatives
    /// and central differences of the first derivatives.
    pub fd_second_gap: T,
}

/// Central-difference step used for the second-derivative cross-check.
pub const FD_SECOND_STEP: f64 = 1e-5;

fn zhat0_at<T: Real>(kl: &Wavenumber<T>, a: T) -> State<T> {
    let z = T::zero();
    [a, z, z, kl.k * a, z, kl.l * a, z, z]
}

fn first_derivatives<T: Real>(k: T, l: T, a: T) -> (State<T>, State<T>) {
    let z = T::zero();
    let a2 = a * a;
    let zk = [-k / a, z, z, (a2 - k * k) / a, z, -k * l / a, z, z];
    let zl = [-l / a, z, z, -k * l / a, z, (a2 - l * l) / a, z, z];
    (zk, zl)
}

fn second_derivatives<T: Real>(k: T, l: T, a: T) -> (State<T>, State<T>, State<T>) {
    let z = T::zero();
    let a2 = a * a;
    let a3 = a2 * a;
    let (ak, al) = (-k / a, -l / a);
    let akk = -(a2 + k * k) / a3;
    let akl = -k * l / a3;
    let all = -(a2 + l * l) / a3;
    let two = T::two();
    let zkk = [akk, z, z, two * ak + k * akk, z, l * akk, z, z];
    let zkl = [akl, z, z, al + k * akl, z, ak + l * akl, z, z];
    let zll = [all, z, z, k * all, z, two * al + l * all, z, z];
    (zkk, zkl, zll)
}

/// Constructs the roll at `kl` from the closed form.
pub fn solve_roll<T: Real>(kl: Wavenumber<T>) -> Result<RollState<T>> {
    let amp2 = kl.amp2()?;
    let a = amp2.sqrt();
    let (k, l) = (kl.k, kl.l);
    let zhat0 = zhat0_at(&kl, a);
    let z = T::zero();
    let ztheta0 = [z, a, -k * a, z, -l * a, z, z, z];
    let (zk0, zl0) = first_derivatives(k, l, a);
    let (zkk0, zkl0, zll0) = second_derivatives(k, l, a);

    // cross-check against differences of the first derivatives
    let h = T::of(FD_SECOND_STEP);
    let fd = |dk: T, dl: T| -> Result<(State<T>, State<T>)> {
        let p = Wavenumber::new(k + dk, l + dl);
        let m = Wavenumber::new(k - dk, l - dl);
        let (pk, pl) = first_derivatives(p.k, p.l, p.amp2()?.sqrt());
        let (mk, ml) = first_derivatives(m.k, m.l, m.amp2()?.sqrt());
        let d = T::two() * h;
        Ok((
            std::array::from_fn(|i| (pk[i] - mk[i]) / d),
            std::array::from_fn(|i| (pl[i] - ml[i]) / d),
        ))
    };
    let fd_second_gap = match (fd(h, z), fd(z, h)) {
        (Ok((fkk, flk)), Ok((fkl, fll))) => [
            linalg::max_abs(&linalg::sub(&fkk, &zkk0)),
            linalg::max_abs(&linalg::sub(&flk, &zkl0)),
            linalg::max_abs(&linalg::sub(&fkl, &zkl0)),
            linalg::max_abs(&linalg::sub(&fll, &zll0)),
        ]
        .into_iter()
        .fold(z, T::max),
        // stencil leaves the disc: no cross-check available this close to the rim
        _ => T::nan(),
    };

    Ok(RollState { kl, u_hat: [a, z], amp2, zhat0, ztheta0, zk0, zl0, zkk0, zkl0, zll0, fd_second_gap })
}

/// Samples `G_θ v` on `n_theta` points; with `v = Ẑ(0)` this is the roll loop.
pub fn rotate_loop<T: Real>(v: &State<T>, n_theta: usize) -> Result<LoopFunction<T>> {
    LoopFunction::from_fn(n_theta, |t| linalg::mat_vec(&block_rotation(t), v))
}

pub fn roll_loop<T: Real>(state: &RollState<T>, n_theta: usize) -> Result<LoopFunction<T>> {
    rotate_loop(&state.zhat0, n_theta)
}

/// Region of the wavenumber plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainClass {
    OutsideD,
    DPlus,
    DMinus,
    BoundaryExistence,
    BoundaryZz,
}

impl DomainClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainClass::OutsideD => "outside_D",
            DomainClass::DPlus => "D_plus",
            DomainClass::DMinus => "D_minus",
            DomainClass::BoundaryExistence => "boundary_existence",
            DomainClass::BoundaryZz => "boundary_zz",
        }
    }
}

impl std::fmt::Display for DomainClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Default width of the boundary bands.
pub const CLASSIFY_TOL: f64 = 1e-9;

pub fn classify<T: Real>(kl: Wavenumber<T>, tol: T) -> DomainClass {
    let q2 = kl.q2();
    if !q2.is_finite() || q2 > T::one() + tol {
        return DomainClass::OutsideD;
    }
    if q2 >= T::one() - tol {
        return DomainClass::BoundaryExistence;
    }
    let d = delta_zz_closed(kl);
    if d < -tol {
        DomainClass::DMinus
    } else if d > tol {
        DomainClass::DPlus
    } else {
        DomainClass::BoundaryZz
    }
}
