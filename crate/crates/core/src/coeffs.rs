//! Conservation-law fluxes, characteristics, the twisted Jordan chain and
//! the scalar coefficients of the linear and characteristic Cross-Newell
//! equations. Most quantities are computed along two independent routes.

use crate::error::{CcnError, Result};
use crate::linalg::{self, Mat, State};
use crate::msys::{loop_average_inner, RglSystem, SystemModel, DEFAULT_N_THETA};
use crate::roll::{rotate_loop, solve_roll, RollState, Wavenumber};
use crate::scalar::Real;

/// Below this `|Δ_zz|` the two characteristics are treated as coalesced.
pub const COALESCE_TOL: f64 = 1e-9;
/// Leading coefficients smaller than this make the characteristic
/// quadratic degenerate.
pub const LEADING_TOL: f64 = 1e-12;
/// Largest admissible solvability obstruction of the `ξ₃` system.
pub const OBSTRUCTION_TOL: f64 = 1e-8;
/// Step of the directional difference in [`kappa_flux`].
pub const KAPPA_FD_STEP: f64 = 1e-4;

/// `Δ_zz = (1 − 3q²)(1 − q²)` for RGL rolls.
pub fn delta_zz_closed<T: Real>(kl: Wavenumber<T>) -> T {
    let q2 = kl.q2();
    (T::one() - T::of(3.0) * q2) * (T::one() - q2)
}

/// Fluxes `ℬ`, `𝒜`, their Jacobian and discriminant at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxData<T> {
    pub b: T,
    pub a: T,
    pub bk: T,
    pub bl: T,
    pub ak: T,
    pub al: T,
    pub delta_zz: T,
}

impl<T: Real> FluxData<T> {
    fn from_parts(b: T, a: T, bk: T, bl: T, ak: T, al: T) -> Self {
        Self { b, a, bk, bl, ak, al, delta_zz: al * bk - ak * bl }
    }

    /// Characteristic quadratic `𝒜_ℓC² + (ℬ_ℓ+𝒜_k)C + ℬ_k` at `c`.
    pub fn char_poly(&self, c: T) -> T {
        (self.al * c + (self.bl + self.ak)) * c + self.bk
    }
}

/// Closed-form RGL fluxes `ℬ = k(1−q²)`, `𝒜 = ℓ(1−q²)`.
pub fn fluxes_closed<T: Real>(kl: Wavenumber<T>) -> Result<FluxData<T>> {
    let a2 = kl.amp2()?;
    let (k, l) = (kl.k, kl.l);
    let two = T::two();
    let cross = -two * k * l;
    Ok(FluxData::from_parts(
        k * a2,
        l * a2,
        a2 - two * k * k,
        cross,
        cross,
        a2 - two * l * l,
    ))
}

/// Fluxes from loop averages of the symplectic forms against the roll,
/// `ℬ = ⟨⟨½𝐉Ẑ_θ, Ẑ⟩⟩`, `ℬ_k = ⟨⟨𝐉Ẑ_θ, Ẑ_k⟩⟩` and so on.
pub fn fluxes_quadrature<T: Real, S: SystemModel<T> + ?Sized>(
    sys: &S,
    state: &RollState<T>,
    n_theta: usize,
) -> Result<FluxData<T>> {
    let z = rotate_loop(&state.zhat0, n_theta)?;
    let zt = rotate_loop(&state.ztheta0, n_theta)?;
    let zk = rotate_loop(&state.zk0, n_theta)?;
    let zl = rotate_loop(&state.zl0, n_theta)?;
    let jzt = zt.map(|v| linalg::mat_vec(sys.j(), v));
    let kzt = zt.map(|v| linalg::mat_vec(sys.k(), v));
    let half = T::of(0.5);
    Ok(FluxData::from_parts(
        half * loop_average_inner(&jzt, &z)?,
        half * loop_average_inner(&kzt, &z)?,
        loop_average_inner(&jzt, &zk)?,
        loop_average_inner(&jzt, &zl)?,
        loop_average_inner(&kzt, &zk)?,
        loop_average_inner(&kzt, &zl)?,
    ))
}

/// Characteristic branch: the sign in front of the square root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Branch::Plus => T::one(),
            Branch::Minus => -T::one(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }

    pub fn other(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = CcnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            _ => Err(CcnError::Parameter(format!("unknown branch {s:?} (expected plus or minus)"))),
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Roots `(C⁺, C⁻) = (−(ℬ_ℓ+𝒜_k) ± 2√(−Δ_zz)) / (2𝒜_ℓ)`, labelled by the
/// sign in front of the root and never re-sorted.
pub fn characteristics<T: Real>(fd: &FluxData<T>) -> Result<(T, T)> {
    if !(fd.delta_zz < T::zero()) {
        return Err(CcnError::ComplexCharacteristics { delta_zz: fd.delta_zz.as_f64() });
    }
    if fd.al.abs() < T::of(LEADING_TOL) {
        return Err(CcnError::DegenerateLeading { a_l: fd.al.as_f64() });
    }
    let mid = -(fd.bl + fd.ak) / (T::two() * fd.al);
    let half_gap = (-fd.delta_zz).sqrt() / fd.al;
    Ok((mid + half_gap, mid - half_gap))
}

pub fn characteristic<T: Real>(fd: &FluxData<T>, branch: Branch) -> Result<T> {
    let (p, m) = characteristics(fd)?;
    Ok(match branch {
        Branch::Plus => p,
        Branch::Minus => m,
    })
}

/// `𝐋 = D²S(Ẑ) − (k𝐉 + ℓ𝐊)Σ`, the linearization of the steady equation
/// about the roll at `θ = 0`; `Σ` generates the phase rotation.
pub fn assemble_l<T: Real, S: SystemModel<T> + ?Sized>(sys: &S, state: &RollState<T>) -> Mat<T> {
    let sigma = sys.symmetry_generator();
    let kjl = linalg::mat_add_scaled(
        &linalg::mat_add_scaled(&linalg::zero_mat(), state.kl.k, sys.j()),
        state.kl.l,
        sys.k(),
    );
    linalg::mat_add_scaled(&sys.hess_s(&state.zhat0), -T::one(), &linalg::mat_mul(&kjl, &sigma))
}

/// Fredholm obstruction `⟨Ẑ_θ, F⟩ / ‖Ẑ_θ‖` of `𝐋V = F`.
pub fn solvability<T: Real>(state: &RollState<T>, f: &State<T>) -> T {
    linalg::dot(&state.ztheta0, f) / linalg::norm(&state.ztheta0)
}

/// `𝐉 + C𝐊`.
pub fn pencil<T: Real, S: SystemModel<T> + ?Sized>(sys: &S, c: T) -> Mat<T> {
    linalg::mat_add_scaled(sys.j(), c, sys.k())
}

/// Twisted Jordan chain `ξ₁ … ξ₄` at `θ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainVectors<T> {
    pub branch: Branch,
    pub c: T,
    pub xi1: State<T>,
    pub xi2: State<T>,
    pub xi3: State<T>,
    pub xi4: State<T>,
    /// Solvability obstruction of the `ξ₃` system.
    pub obstruction3: T,
}

/// Builds the chain for the characteristic `branch` of `state`.
pub fn twisted_chain<T: Real, S: SystemModel<T> + ?Sized>(
    sys: &S,
    state: &RollState<T>,
    branch: Branch,
) -> Result<ChainVectors<T>> {
    let fd = fluxes_closed(state.kl)?;
    if fd.delta_zz.abs() < T::of(COALESCE_TOL) {
        return Err(CcnError::CoalescingCharacteristics { delta_zz_abs: fd.delta_zz.abs().as_f64() });
    }
    let c = characteristic(&fd, branch)?;
    twisted_chain_at(sys, state, c, branch)
}

/// Same as [`twisted_chain`] for an arbitrary slope `c`; fails unless `c`
/// is a characteristic.
pub fn twisted_chain_at<T: Real, S: SystemModel<T> + ?Sized>(
    sys: &S,
    state: &RollState<T>,
    c: T,
    branch: Branch,
) -> Result<ChainVectors<T>> {
    let l = assemble_l(sys, state);
    let p = pencil(sys, c);
    let xi1 = state.ztheta0;
    let xi2 = linalg::axpy(&state.zk0, c, &state.zl0);
    let f3 = linalg::mat_vec(&p, &xi2);
    let obstruction3 = solvability(state, &f3);
    if !(obstruction3.abs() <= T::of(OBSTRUCTION_TOL)) {
        return Err(CcnError::NotCharacteristic { obstruction: obstruction3.as_f64() });
    }
    let (xi3, _) = linalg::bordered_solve(&l, &xi1, &f3)?;
    let (xi4, _) = linalg::bordered_solve(&l, &xi1, &linalg::mat_vec(&p, &xi3))?;
    Ok(ChainVectors { branch, c, xi1, xi2, xi3, xi4, obstruction3 })
}

/// `‖𝐋ξ₃ − (𝐉+C𝐊)ξ₂‖_∞` and `‖𝐋ξ₄ − (𝐉+C𝐊)ξ₃‖_∞`.
pub fn chain_residuals<T: Real, S: SystemModel<T> + ?Sized>(
    sys: &S,
    state: &RollState<T>,
    cv: &ChainVectors<T>,
) -> (T, T) {
    let l = assemble_l(sys, state);
    let p = pencil(sys, cv.c);
    let r = |hi: &State<T>, lo: &State<T>| {
        linalg::max_abs(&linalg::sub(&linalg::mat_vec(&l, hi), &linalg::mat_vec(&p, lo)))
    };
    (r(&cv.xi3, &cv.xi2), r(&cv.xi4, &cv.xi3))
}

/// Printed closed form of `ξ₃`: `(0, αû, Cαû, 0)` with `α = −(k+Cℓ)/‖û‖²`.
pub fn xi3_closed<T: Real>(state: &RollState<T>, c: T) -> State<T> {
    let alpha = -(state.kl.k + c * state.kl.l) / state.amp2;
    let [u1, u2] = state.u_hat;
    let z = T::zero();
    [z, z, alpha * u1, alpha * u2, c * alpha * u1, c * alpha * u2, z, z]
}

/// Removes the `ξ₁` component of `v`.
pub fn project_off_kernel<T: Real>(v: &State<T>, xi1: &State<T>) -> State<T> {
    let s = linalg::dot(v, xi1) / linalg::dot(xi1, xi1);
    linalg::axpy(v, -s, xi1)
}

/// `𝒦 = ⟨ξ₂, (𝐉+C𝐊)ξ₃⟩`.
pub fn curly_k_chain<T: Real, S: SystemModel<T> + ?Sized>(sys: &S, cv: &ChainVectors<T>) -> T {
    linalg::dot(&cv.xi2, &linalg::mat_vec(&pencil(sys, cv.c), &cv.xi3))
}

/// Termination scalar `−⟨ξ₁, (𝐉+C𝐊)ξ₄⟩`, an independent route to `𝒦`.
pub fn curly_k_termination<T: Real, S: SystemModel<T> + ?Sized>(sys: &S, cv: &ChainVectors<T>) -> T {
    -linalg::dot(&cv.xi1, &linalg::mat_vec(&pencil(sys, cv.c), &cv.xi4))
}

/// `𝒦 = −(1 + C²)(k + Cℓ)² / ‖û‖²`.
pub fn curly_k_closed<T: Real>(kl: Wavenumber<T>, c: T) -> Result<T> {
    let a2 = kl.amp2()?;
    let s = kl.k + c * kl.l;
    Ok(-(T::one() + c * c) * s * s / a2)
}

/// `κ` from the solvability condition of the `qq_X` order,
/// `κ = −⟨ξ₁, (𝐉+C𝐊)(Ẑ_kk + 2CẐ_kℓ + C²Ẑ_ℓℓ + Σξ₃) − D³S(Ẑ)[ξ₂, ξ₃]⟩`.
pub fn kappa_solvability<T: Real, S: SystemModel<T> + ?Sized>(
    sys: &S,
    state: &RollState<T>,
    cv: &ChainVectors<T>,
) -> T {
    let c = cv.c;
    let two_c = T::two() * c;
    let mut w = state.zkk0;
    for i in 0..w.len() {
        w[i] += two_c * state.zkl0[i] + c * c * state.zll0[i];
    }
    let rot_xi3 = linalg::mat_vec(&sys.symmetry_generator(), &cv.xi3);
    let w = linalg::add(&w, &rot_xi3);
    let f = linalg::sub(&linalg::mat_vec(&pencil(sys, c), &w), &sys.d3s(&state.zhat0, &cv.xi2, &cv.xi3));
    -linalg::dot(&cv.xi1, &f)
}

/// `(ℬ + C𝒜)` for RGL with `C` frozen.
fn flux_combination<T: Real>(k: T, l: T, c: T) -> T {
    (k + c * l) * (T::one() - k * k - l * l)
}

/// `κ = (∂_k + C∂_ℓ)²(ℬ + C𝒜)` by a fourth-order central difference along
/// `(1, C)` with step [`KAPPA_FD_STEP`].
pub fn kappa_flux<T: Real>(kl: Wavenumber<T>, c: T) -> T {
    let h = T::of(KAPPA_FD_STEP);
    let f = |s: T| flux_combination(kl.k + s, kl.l + c * s, c);
    let two = T::two();
    let num = -f(two * h) + T::of(16.0) * f(h) - T::of(30.0) * f(T::zero()) + T::of(16.0) * f(-h) - f(-two * h);
    num / (T::of(12.0) * h * h)
}

/// Exact value of the same directional second derivative,
/// `−6(1 + C²)(k + Cℓ)`.
pub fn kappa_exact<T: Real>(kl: Wavenumber<T>, c: T) -> T {
    -T::of(6.0) * (T::one() + c * c) * (kl.k + c * kl.l)
}

/// Polynomial `−6k − 6Cℓ − (2k + 4ℓ)C² − 6C³ℓ` as it appears in print.
/// Reported next to the computed `κ`; not used in any calculation.
pub fn kappa_printed<T: Real>(kl: Wavenumber<T>, c: T) -> T {
    let (k, l) = (kl.k, kl.l);
    let six = T::of(6.0);
    -six * k - six * c * l - (T::two() * k + T::of(4.0) * l) * c * c - six * c * c * c * l
}

/// Linear CN quadratic form `Q(m) = ℬ_k m₁² + (ℬ_ℓ+𝒜_k)m₁m₂ + 𝒜_ℓ m₂²`;
/// a phase mode `e^{i m·X}` grows at rate `−Q(m)/τ`.
pub fn cn_quadratic<T: Real>(fd: &FluxData<T>, m1: T, m2: T) -> T {
    fd.bk * m1 * m1 + (fd.bl + fd.ak) * m1 * m2 + fd.al * m2 * m2
}

/// `Q(m)` from the form diagonalized about the `X` derivative.
pub fn cn_quadratic_diag_x<T: Real>(fd: &FluxData<T>, m1: T, m2: T) -> T {
    let g = (fd.bl + fd.ak) / (T::two() * fd.bk);
    let s = m1 + g * m2;
    fd.bk * s * s + fd.delta_zz / fd.bk * m2 * m2
}

/// `Q(m)` from the form diagonalized about the `Y` derivative.
pub fn cn_quadratic_diag_y<T: Real>(fd: &FluxData<T>, m1: T, m2: T) -> T {
    let g = (fd.bl + fd.ak) / (T::two() * fd.al);
    let s = m2 + g * m1;
    fd.al * s * s + fd.delta_zz / fd.al * m1 * m1
}

/// `τ = ⟨⟨Ẑ_θ, 𝐌Ẑ_θ⟩⟩`.
pub fn tau_quadrature<T: Real, S: SystemModel<T> + ?Sized>(
    sys: &S,
    state: &RollState<T>,
    n_theta: usize,
) -> Result<T> {
    let zt = rotate_loop(&state.ztheta0, n_theta)?;
    let mzt = zt.map(|v| linalg::mat_vec(sys.m(), v));
    loop_average_inner(&zt, &mzt)
}

/// Every scalar of the characteristic CN equation
/// `τφ_T = φ_xy·φ_XY + κφ_Xφ_XX + 𝒦φ_XXXX` at one wavenumber and branch,
/// plus the cross-check values computed along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffBundle<T> {
    pub kl: Wavenumber<T>,
    pub branch: Branch,
    pub c: T,
    /// The other root, kept for reporting.
    pub c_other: T,
    pub tau: T,
    pub delta_zz: T,
    pub sigma: T,
    pub kappa: T,
    pub curly_k: T,
    /// `−(𝒜_k + ℬ_ℓ + 2C𝒜_ℓ)`, equal to `∓σ` on the `±` branch.
    pub cxy: T,
    pub fluxes: FluxData<T>,
    pub checks: BundleChecks<T>,
}

impl<T: Real> CoeffBundle<T> {
    /// Coefficient of `φ_XY` in the evolution equation, `−cxy = ±σ`.
    pub fn phi_xy(&self) -> T {
        -self.cxy
    }
}

/// Cross-check values carried by a [`CoeffBundle`].
#[derive(Debug, Clone, PartialEq)]
pub struct BundleChecks<T> {
    pub kappa_flux: T,
    pub kappa_exact: T,
    pub kappa_printed: T,
    pub curly_k_closed: T,
    pub curly_k_termination: T,
    pub tau_closed: T,
    pub char_residual: T,
    /// `|𝒜_k + ℬ_ℓ + 2C𝒜_ℓ − (±σ)|`.
    pub phi_xy_identity_residual: T,
    /// `|cxy − (4kℓ − 2C(1 − 3ℓ² − k²))|`.
    pub phi_xy_closed_residual: T,
    pub chain_residual3: T,
    pub chain_residual4: T,
    pub obstruction3: T,
}

pub fn ccn_bundle<T: Real>(kl: Wavenumber<T>, branch: Branch) -> Result<CoeffBundle<T>> {
    ccn_bundle_with(&RglSystem::new(), kl, branch)
}

/// Assembles the coefficient bundle for an arbitrary model carrying the RGL
/// roll family.
pub fn ccn_bundle_with<T: Real, S: SystemModel<T> + ?Sized>(
    sys: &S,
    kl: Wavenumber<T>,
    branch: Branch,
) -> Result<CoeffBundle<T>> {
    let state = solve_roll(kl)?;
    let fd = fluxes_closed(kl)?;
    if fd.delta_zz.abs() < T::of(COALESCE_TOL) {
        return Err(CcnError::CoalescingCharacteristics { delta_zz_abs: fd.delta_zz.abs().as_f64() });
    }
    let (cp, cm) = characteristics(&fd)?;
    let (c, c_other) = match branch {
        Branch::Plus => (cp, cm),
        Branch::Minus => (cm, cp),
    };
    let cv = twisted_chain_at(sys, &state, c, branch)?;
    let (r3, r4) = chain_residuals(sys, &state, &cv);
    let sigma = T::two() * (-fd.delta_zz).sqrt();
    let lead = fd.ak + fd.bl + T::two() * c * fd.al;
    let cxy = -lead;
    let (k, l) = (kl.k, kl.l);
    let cxy_closed = T::of(4.0) * k * l - T::two() * c * (T::one() - T::of(3.0) * l * l - k * k);
    let tau = tau_quadrature(sys, &state, DEFAULT_N_THETA)?;

    let checks = BundleChecks {
        kappa_flux: kappa_flux(kl, c),
        kappa_exact: kappa_exact(kl, c),
        kappa_printed: kappa_printed(kl, c),
        curly_k_closed: curly_k_closed(kl, c)?,
        curly_k_termination: curly_k_termination(sys, &cv),
        tau_closed: state.amp2,
        char_residual: fd.char_poly(c).abs(),
        phi_xy_identity_residual: (lead - branch.sign::<T>() * sigma).abs(),
        phi_xy_closed_residual: (cxy - cxy_closed).abs(),
        chain_residual3: r3,
        chain_residual4: r4,
        obstruction3: cv.obstruction3,
    };
    Ok(CoeffBundle {
        kl,
        branch,
        c,
        c_other,
        tau,
        delta_zz: fd.delta_zz,
        sigma,
        kappa: kappa_solvability(sys, &state, &cv),
        curly_k: curly_k_chain(sys, &cv),
        cxy,
        fluxes: fd,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Sys = RglSystem<f64>;

    fn wn(k: f64, l: f64) -> Wavenumber<f64> {
        Wavenumber::new(k, l)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// L written out block by block.
    fn printed_l(s: &RollState<f64>) -> Mat<f64> {
        let (k, l) = (s.kl.k, s.kl.l);
        let u = s.u_hat;
        let mut m = [[0.0; 8]; 8];
        let j2 = [[0.0, -1.0], [1.0, 0.0]];
        let put = |m: &mut Mat<f64>, bi: usize, bj: usize, f: f64, b: [[f64; 2]; 2]| {
            for i in 0..2 {
                for j in 0..2 {
                    m[2 * bi + i][2 * bj + j] += f * b[i][j];
                }
            }
        };
        let q2 = k * k + l * l;
        let a = [
            [q2 - 2.0 * u[0] * u[0], -2.0 * u[0] * u[1]],
            [-2.0 * u[1] * u[0], q2 - 2.0 * u[1] * u[1]],
        ];
        let id = [[1.0, 0.0], [0.0, 1.0]];
        put(&mut m, 0, 0, 1.0, a);
        put(&mut m, 0, 1, k, j2);
        put(&mut m, 0, 2, l, j2);
        put(&mut m, 1, 0, -k, j2);
        put(&mut m, 1, 1, 1.0, id);
        put(&mut m, 1, 3, l, j2);
        put(&mut m, 2, 0, -l, j2);
        put(&mut m, 2, 2, 1.0, id);
        put(&mut m, 2, 3, -k, j2);
        put(&mut m, 3, 1, -l, j2);
        put(&mut m, 3, 2, k, j2);
        m
    }

    #[test]
    fn closed_flux_examples() {
        let f = fluxes_closed(wn(0.0, 0.0)).unwrap();
        assert_eq!((f.b, f.a, f.bk, f.al, f.bl, f.ak, f.delta_zz), (0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0));
        let f = fluxes_closed(wn(0.8, 0.0)).unwrap();
        assert!(close(f.b, 0.288, 1e-15) && close(f.bk, -0.92, 1e-15) && close(f.al, 0.36, 1e-15));
        assert!(close(f.delta_zz, -0.3312, 1e-15));
        let f = fluxes_closed(wn(0.6, 0.5)).unwrap();
        assert!(close(f.delta_zz, -0.3237, 1e-15));
        assert!(fluxes_closed(wn(1.0, 0.1)).is_err());
    }

    #[test]
    fn quadrature_flux_examples() {
        let sys = Sys::new();
        let s = solve_roll(wn(0.0, 0.7)).unwrap();
        assert!(fluxes_quadrature(&sys, &s, 32).unwrap().b.abs() < 1e-16);
        let s = solve_roll(wn(0.8, 0.0)).unwrap();
        assert!(close(fluxes_quadrature(&sys, &s, 32).unwrap().bk, -0.92, 1e-14));
        let s = solve_roll(wn(0.5, 0.5)).unwrap();
        let f = fluxes_quadrature(&sys, &s, 32).unwrap();
        assert!(close(f.bl, -0.5, 1e-14) && close(f.ak, -0.5, 1e-14));
    }

    #[test]
    fn characteristic_examples() {
        let (p, m) = characteristics(&fluxes_closed(wn(0.8, 0.0)).unwrap()).unwrap();
        let r = 23f64.sqrt() / 3.0;
        assert!(close(p, r, 1e-14) && close(m, -r, 1e-14));
        let f = fluxes_closed(wn(0.6, 0.5)).unwrap();
        let (p, m) = characteristics(&f).unwrap();
        // the product with C⁺ pins the second root at −0.282306 (Vieta)
        assert!(close(p, -10.6267, 1e-4) && close(m, -0.282306, 1e-6), "{p} {m}");
        assert!(close(p * m, 3.0, 1e-12) && close(p * m, f.bk / f.al, 1e-12));
        assert!(f.char_poly(p).abs() < 1e-12 && f.char_poly(m).abs() < 1e-12);
        assert!(matches!(
            characteristics(&fluxes_closed(wn(0.3, 0.3)).unwrap()),
            Err(CcnError::ComplexCharacteristics { .. })
        ));
        let degenerate = FluxData::from_parts(0.0, 0.0, -1.0, 1.0, 1.0, 0.0);
        assert!(matches!(characteristics(&degenerate), Err(CcnError::DegenerateLeading { .. })));
    }

    #[test]
    fn l_matches_block_form_and_has_one_dimensional_kernel() {
        let sys = Sys::new();
        for &(k, l) in &[(0.0, 0.0), (0.8, 0.0), (0.6, 0.5), (-0.3, 0.7)] {
            let s = solve_roll(wn(k, l)).unwrap();
            let lm = assemble_l(&sys, &s);
            assert!(linalg::mat_max_diff(&lm, &printed_l(&s)) < 1e-15);
            assert_eq!(linalg::mat_max_diff(&lm, &linalg::transpose(&lm)), 0.0);
            assert!(linalg::max_abs(&linalg::mat_vec(&lm, &s.ztheta0)) < 1e-13);
            // at k = ℓ = 0 the w-block decouples and the kernel grows
            let expected_rank = if k == 0.0 && l == 0.0 { 5 } else { 7 };
            assert_eq!(linalg::rank(&lm, 1e-10), expected_rank);
            let ljk = linalg::sub(&linalg::mat_vec(&lm, &s.zk0), &linalg::mat_vec(sys.j(), &s.ztheta0));
            let llk = linalg::sub(&linalg::mat_vec(&lm, &s.zl0), &linalg::mat_vec(sys.k(), &s.ztheta0));
            assert!(linalg::max_abs(&ljk) < 1e-12 && linalg::max_abs(&llk) < 1e-12);
        }
        let s = solve_roll(wn(0.0, 0.0)).unwrap();
        let lm = assemble_l(&sys, &s);
        assert!(close(lm[0][0], -2.0, 0.0) && lm[1][1] == 0.0);
        assert_eq!(s.ztheta0, [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn solvability_examples() {
        let sys = Sys::new();
        let s = solve_roll(wn(0.8, 0.0)).unwrap();
        let lm = assemble_l(&sys, &s);
        let v = [0.3, -1.2, 0.7, 0.1, 2.0, -0.4, 0.9, 1.1];
        assert!(solvability(&s, &linalg::mat_vec(&lm, &v)).abs() < 1e-12);
        let f = fluxes_closed(s.kl).unwrap();
        let (cp, _) = characteristics(&f).unwrap();
        for (c, expect_zero) in [(cp, true), (cp + 0.1, false), (cp - 0.1, false)] {
            let xi2 = linalg::axpy(&s.zk0, c, &s.zl0);
            let obs = solvability(&s, &linalg::mat_vec(&pencil(&sys, c), &xi2));
            let predicted = -f.char_poly(c) / linalg::norm(&s.ztheta0);
            assert!(close(obs, predicted, 1e-14));
            if expect_zero {
                assert!(obs.abs() < 1e-10);
            } else {
                assert!(obs.abs() > 1e-3);
            }
        }
    }

    #[test]
    fn chain_at_point_eight() {
        let sys = Sys::new();
        let s = solve_roll(wn(0.8, 0.0)).unwrap();
        let cv = twisted_chain(&sys, &s, Branch::Plus).unwrap();
        let (r3, r4) = chain_residuals(&sys, &s, &cv);
        assert!(r3 < 1e-10 && r4 < 1e-10);
        assert!(linalg::dot(&cv.xi3, &cv.xi1).abs() < 1e-13);
        assert!(linalg::dot(&cv.xi4, &cv.xi1).abs() < 1e-13);
        let closed = project_off_kernel(&xi3_closed(&s, cv.c), &cv.xi1);
        assert!(linalg::max_abs(&linalg::sub(&cv.xi3, &closed)) < 1e-10);
        assert!(cv.xi3[0].abs() < 1e-14 && cv.xi3[6].abs() < 1e-14 && cv.xi3[7].abs() < 1e-14);
        let target = -512.0 / 81.0;
        assert!(close(curly_k_chain(&sys, &cv), target, 1e-12));
        assert!(close(curly_k_termination(&sys, &cv), target, 1e-12));
        assert!(close(curly_k_closed(s.kl, cv.c).unwrap(), target, 1e-12));
    }

    #[test]
    fn printed_xi3_solves_chain_exactly() {
        let sys = Sys::new();
        for &(k, l) in &[(0.8, 0.0), (0.6, 0.5), (-0.45, 0.6)] {
            let s = solve_roll(wn(k, l)).unwrap();
            for b in [Branch::Plus, Branch::Minus] {
                let cv = twisted_chain(&sys, &s, b).unwrap();
                let x = xi3_closed(&s, cv.c);
                let lhs = linalg::mat_vec(&assemble_l(&sys, &s), &x);
                let rhs = linalg::mat_vec(&pencil(&sys, cv.c), &cv.xi2);
                assert!(linalg::max_abs(&linalg::sub(&lhs, &rhs)) < 1e-12);
            }
        }
    }

    #[test]
    fn non_characteristic_slope_is_refused() {
        let sys = Sys::new();
        let s = solve_roll(wn(0.8, 0.0)).unwrap();
        let c = characteristic(&fluxes_closed(s.kl).unwrap(), Branch::Plus).unwrap();
        assert!(matches!(
            twisted_chain_at(&sys, &s, c + 0.1, Branch::Plus),
            Err(CcnError::NotCharacteristic { .. })
        ));
    }

    #[test]
    fn gauge_invariance_of_scalars() {
        let sys = Sys::new();
        let s = solve_roll(wn(0.6, 0.5)).unwrap();
        for b in [Branch::Plus, Branch::Minus] {
            let cv = twisted_chain(&sys, &s, b).unwrap();
            let k0 = curly_k_chain(&sys, &cv);
            let q0 = kappa_solvability(&sys, &s, &cv);
            for c in -10..=10 {
                let mut shifted = cv.clone();
                shifted.xi3 = linalg::axpy(&cv.xi3, c as f64, &cv.xi1);
                assert!((curly_k_chain(&sys, &shifted) - k0).abs() < 1e-10 * k0.abs().max(1.0));
                assert!((kappa_solvability(&sys, &s, &shifted) - q0).abs() < 1e-10 * q0.abs().max(1.0));
            }
        }
    }

    #[test]
    fn kappa_routes_agree() {
        let sys = Sys::new();
        for &(k, l) in &[(0.8, 0.0), (0.6, 0.5), (0.45, 0.45), (-0.1, -0.75)] {
            let s = solve_roll(wn(k, l)).unwrap();
            for b in [Branch::Plus, Branch::Minus] {
                let cv = twisted_chain(&sys, &s, b).unwrap();
                let ks = kappa_solvability(&sys, &s, &cv);
                let kf = kappa_flux(s.kl, cv.c);
                let ke = kappa_exact(s.kl, cv.c);
                assert!((ks - kf).abs() < 1e-6 * ks.abs(), "({k},{l}) {b}: {ks} vs {kf}");
                assert!((ks - ke).abs() < 1e-10 * ks.abs(), "({k},{l}) {b}: {ks} vs {ke}");
            }
        }
        let c = 23f64.sqrt() / 3.0;
        assert!(close(kappa_flux(wn(0.8, 0.0), c), -153.6 / 9.0, 1e-7));
        assert!(kappa_flux(wn(0.0, 0.0), 1.7).abs() < 1e-8);
    }

    #[test]
    fn kappa_is_odd_in_wavenumber() {
        let sys = Sys::new();
        let s = solve_roll(wn(0.6, 0.5)).unwrap();
        let sn = solve_roll(wn(-0.6, -0.5)).unwrap();
        let cv = twisted_chain(&sys, &s, Branch::Plus).unwrap();
        let c = cv.c;
        // the flux Jacobian is even in (k, ℓ), so C is shared
        let cvn = twisted_chain_at(&sys, &sn, c, Branch::Plus).unwrap();
        let a = kappa_solvability(&sys, &s, &cv);
        let b = kappa_solvability(&sys, &sn, &cvn);
        assert!((a + b).abs() < 1e-10 * a.abs());
    }

    #[test]
    fn printed_kappa_polynomial_differs() {
        let c = 23f64.sqrt() / 3.0;
        let kl = wn(0.8, 0.0);
        let gap = kappa_printed(kl, c) - kappa_exact(kl, c);
        assert!(close(gap, 6.0 * 0.8 * c * c - 2.0 * 0.8 * c * c, 1e-12));
    }

    #[test]
    fn quadratic_form_examples() {
        let f = fluxes_closed(wn(0.8, 0.0)).unwrap();
        assert!(close(cn_quadratic(&f, 1.0, 0.0), -0.92, 1e-15));
        assert!(close(cn_quadratic(&f, 0.0, 1.0), 0.36, 1e-15));
    }

    #[test]
    fn bundle_at_point_eight() {
        let p = ccn_bundle(wn(0.8, 0.0), Branch::Plus).unwrap();
        let m = ccn_bundle(wn(0.8, 0.0), Branch::Minus).unwrap();
        let sigma = 2.0 * 0.3312f64.sqrt();
        assert!(close(p.tau, 0.36, 1e-14));
        assert!(close(p.sigma, sigma, 1e-15) && close(p.sigma, 1.151, 1e-3));
        assert!(close(p.cxy, -sigma, 1e-12) && close(m.cxy, sigma, 1e-12));
        assert!(close(p.cxy + m.cxy, 0.0, 1e-12));
        assert!(close(p.phi_xy(), sigma, 1e-12));
        assert!(close(p.curly_k, -512.0 / 81.0, 1e-12));
        assert!(close(p.curly_k, m.curly_k, 1e-12));
        for b in [&p, &m] {
            assert!(b.checks.phi_xy_identity_residual < 1e-12);
            assert!(b.checks.phi_xy_closed_residual < 1e-12);
            assert!(b.checks.char_residual < 1e-12);
        }
    }

    #[test]
    fn bundle_inside_annulus() {
        let b = ccn_bundle(wn(0.45, 0.45), Branch::Plus).unwrap();
        let c = &b.checks;
        assert!(c.char_residual < 1e-10 && c.phi_xy_identity_residual < 1e-10 && c.phi_xy_closed_residual < 1e-10);
        assert!(c.chain_residual3 < 1e-10 && c.chain_residual4 < 1e-10);
        assert!((b.curly_k - c.curly_k_closed).abs() < 1e-10 * c.curly_k_closed.abs());
        assert!((b.curly_k - c.curly_k_termination).abs() < 1e-10 * c.curly_k_closed.abs());
        assert!((b.tau - c.tau_closed).abs() < 1e-12);
    }

    #[test]
    fn bundle_refusals() {
        assert!(matches!(ccn_bundle(wn(2.0, 0.0), Branch::Plus), Err(CcnError::OutsideExistence { .. })));
        assert!(matches!(ccn_bundle(wn(0.2, 0.2), Branch::Plus), Err(CcnError::ComplexCharacteristics { .. })));
        let edge = (1.0f64 / 3.0).sqrt() + 1e-12;
        assert!(matches!(ccn_bundle(wn(edge, 0.0), Branch::Plus), Err(CcnError::CoalescingCharacteristics { .. })));
    }

    #[test]
    fn rotated_scalars() {
        let q = 0.75;
        let base = fluxes_closed(wn(q, 0.0)).unwrap();
        for &ang in &[0.3, 1.1, 2.5] {
            let kl = Wavenumber::from_polar(q, ang);
            let f = fluxes_closed(kl).unwrap();
            assert!(close(f.delta_zz, base.delta_zz, 1e-13));
            let s = solve_roll(kl).unwrap();
            let tau = tau_quadrature(&Sys::new(), &s, 32).unwrap();
            assert!(close(tau, 1.0 - q * q, 1e-13));
            // characteristic directions rotate with the Jacobian
            let (cp, cm) = characteristics(&f).unwrap();
            let fq = fluxes_quadrature(&Sys::new(), &s, 32).unwrap();
            let (qp, qm) = characteristics(&fq).unwrap();
            assert!(close(cp, qp, 1e-9 * cp.abs().max(1.0)) && close(cm, qm, 1e-9 * cm.abs().max(1.0)));
        }
    }

    proptest! {
        #[test]
        fn vieta_and_factorization(q in 0.58f64..0.99, ang in -3.1f64..3.1) {
            let kl = Wavenumber::from_polar(q, ang);
            let f = fluxes_closed(kl).unwrap();
            prop_assert!((f.delta_zz - delta_zz_closed(kl)).abs() < 1e-13);
            prop_assume!(f.al.abs() > 1e-3 && f.delta_zz.abs() > 1e-6);
            let (p, m) = characteristics(&f).unwrap();
            let scale = 1.0f64.max((p * m).abs()).max((p + m).abs());
            prop_assert!((p + m + (f.bl + f.ak) / f.al).abs() < 1e-12 * scale);
            prop_assert!((p * m - f.bk / f.al).abs() < 1e-12 * scale);
        }

        #[test]
        fn diagonal_forms(k in -0.9f64..0.9, l in -0.4f64..0.4, m1 in -2.0f64..2.0, m2 in -2.0f64..2.0) {
            prop_assume!(k * k + l * l < 0.98);
            let f = fluxes_closed(Wavenumber::new(k, l)).unwrap();
            prop_assume!(f.bk.abs() > 1e-2 && f.al.abs() > 1e-2);
            let q = cn_quadratic(&f, m1, m2);
            let scale = 1.0 / f.bk.abs().min(f.al.abs());
            prop_assert!((cn_quadratic_diag_x(&f, m1, m2) - q).abs() < 1e-12 * scale * 8.0);
            prop_assert!((cn_quadratic_diag_y(&f, m1, m2) - q).abs() < 1e-12 * scale * 8.0);
        }

        #[test]
        fn quadrature_matches_closed(q in 0.0f64..0.99, ang in -3.1f64..3.1) {
            let kl = Wavenumber::from_polar(q, ang);
            let s = solve_roll(kl).unwrap();
            let a = fluxes_quadrature(&RglSystem::new(), &s, 32).unwrap();
            let b = fluxes_closed(kl).unwrap();
            for (x, y) in [(a.b, b.b), (a.a, b.a), (a.bk, b.bk), (a.bl, b.bl), (a.ak, b.ak), (a.al, b.al)] {
                prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0));
            }
            prop_assert!((a.bl - a.ak).abs() < 1e-12);
        }
    }
}
