//! Multisymplectic structure `M Z_t + J Z_x + K Z_y = ∇S(Z)`, loop functions
//! and their averaged inner product, and structural self-checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CcnError, Result};
use crate::linalg::{self, Mat, State, DIM};
use crate::scalar::Real;
use crate::spectral::Spectral1D;

/// Default number of θ samples on a loop.
pub const DEFAULT_N_THETA: usize = 32;

/// A first-order multisymplectic system on `R^8`.
///
/// Implementations must be immutable; every method is a pure function of
/// its arguments.
pub trait SystemModel<T: Real>: Send + Sync {
    fn m(&self) -> &Mat<T>;
    fn j(&self) -> &Mat<T>;
    fn k(&self) -> &Mat<T>;
    /// Generalized Hamiltonian.
    fn s(&self, z: &State<T>) -> T;
    fn grad_s(&self, z: &State<T>) -> State<T>;
    fn hess_s(&self, z: &State<T>) -> Mat<T>;
    /// Third derivative contracted twice: `D³S(z)[a, b]`.
    fn d3s(&self, z: &State<T>, a: &State<T>, b: &State<T>) -> State<T>;
    /// Infinitesimal generator of the phase symmetry acting on states.
    fn symmetry_generator(&self) -> Mat<T>;
    /// Finite symmetry action at angle `theta`.
    fn symmetry_action(&self, theta: T) -> Mat<T>;
}

/// 2x2 rotation repeated on the four blocks of `Z = (u, p, r, w)`.
pub fn block_rotation<T: Real>(theta: T) -> Mat<T> {
    let (s, c) = theta.sin_cos();
    let mut g = linalg::zero_mat();
    for b in 0..4 {
        let o = 2 * b;
        g[o][o] = c;
        g[o][o + 1] = -s;
        g[o + 1][o] = s;
        g[o + 1][o + 1] = c;
    }
    g
}

/// `J2 = [[0, -1], [1, 0]]` on each block.
pub fn block_generator<T: Real>() -> Mat<T> {
    let mut g = linalg::zero_mat();
    for b in 0..4 {
        let o = 2 * b;
        g[o][o + 1] = -T::one();
        g[o + 1][o] = T::one();
    }
    g
}

/// Real Ginzburg-Landau equation in eight-dimensional multisymplectic form,
/// `Z = (u, p, r, w)` with `u1 + i u2 = Ψ`, `p = u_x`, `r = u_y`.
#[derive(Debug, Clone)]
pub struct RglSystem<T> {
    m: Mat<T>,
    j: Mat<T>,
    k: Mat<T>,
    quartic: T,
}

impl<T: Real> RglSystem<T> {
    /// `S = ½|u|² + ½|p|² + ½|r|² − ¼|u|⁴`.
    pub fn new() -> Self {
        Self::with_quartic(T::of(0.25))
    }

    /// Same structure matrices with `S = … − c|u|⁴`. Only `c = ¼` reproduces
    /// the RGL nonlinearity; other values exist to exercise the checks.
    pub fn with_quartic(quartic: T) -> Self {
        let one = T::one();
        let mut m = linalg::zero_mat();
        m[0][0] = one;
        m[1][1] = one;

        let mut j = linalg::zero_mat();
        let mut k = linalg::zero_mat();
        for c in 0..2 {
            let (u, p, r, w) = (c, 2 + c, 4 + c, 6 + c);
            // J: rows (u, p, r, w) = (-p, u, w, -r)
            j[u][p] = -one;
            j[p][u] = one;
            j[r][w] = one;
            j[w][r] = -one;
            // K: rows (u, p, r, w) = (-r, -w, u, p)
            k[u][r] = -one;
            k[p][w] = -one;
            k[r][u] = one;
            k[w][p] = one;
        }
        Self { m, j, k, quartic }
    }

    pub fn quartic(&self) -> T {
        self.quartic
    }
}

impl<T: Real> Default for RglSystem<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn u_norm2<T: Real>(z: &State<T>) -> T {
    z[0] * z[0] + z[1] * z[1]
}

impl<T: Real> SystemModel<T> for RglSystem<T> {
    fn m(&self) -> &Mat<T> {
        &self.m
    }

    fn j(&self) -> &Mat<T> {
        &self.j
    }

    fn k(&self) -> &Mat<T> {
        &self.k
    }

    fn s(&self, z: &State<T>) -> T {
        let half = T::of(0.5);
        let u2 = u_norm2(z);
        let rest: T = z[2..6].iter().map(|&x| x * x).sum();
        half * (u2 + rest) - self.quartic * u2 * u2
    }

    fn grad_s(&self, z: &State<T>) -> State<T> {
        let f = T::one() - T::of(4.0) * self.quartic * u_norm2(z);
        let mut g = *z;
        g[0] = f * z[0];
        g[1] = f * z[1];
        g[6] = T::zero();
        g[7] = T::zero();
        g
    }

    fn hess_s(&self, z: &State<T>) -> Mat<T> {
        let c4 = T::of(4.0) * self.quartic;
        let u2 = u_norm2(z);
        let mut h = linalg::zero_mat();
        for a in 0..2 {
            for b in 0..2 {
                let delta = if a == b { T::one() - c4 * u2 } else { T::zero() };
                h[a][b] = delta - T::two() * c4 * z[a] * z[b];
            }
        }
        for (d, row) in h.iter_mut().enumerate().take(6).skip(2) {
            row[d] = T::one();
        }
        h
    }

    fn d3s(&self, z: &State<T>, a: &State<T>, b: &State<T>) -> State<T> {
        // only the quartic u-block has a nonvanishing third derivative
        let c8 = T::of(8.0) * self.quartic;
        let ab = a[0] * b[0] + a[1] * b[1];
        let ub = z[0] * b[0] + z[1] * b[1];
        let ua = z[0] * a[0] + z[1] * a[1];
        let mut out = linalg::zero_state();
        for c in 0..2 {
            out[c] = -c8 * (ab * z[c] + ub * a[c] + ua * b[c]);
        }
        out
    }

    fn symmetry_generator(&self) -> Mat<T> {
        block_generator()
    }

    fn symmetry_action(&self, theta: T) -> Mat<T> {
        block_rotation(theta)
    }
}

/// State vectors sampled at `n_theta` equispaced points of `[0, 2π)`; the
/// endpoint is not duplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopFunction<T> {
    samples: Vec<State<T>>,
}

impl<T: Real> LoopFunction<T> {
    pub fn new(samples: Vec<State<T>>) -> Result<Self> {
        let n = samples.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(CcnError::Dimension(format!(
                "loop sample count {n} must be a power of two >= 2"
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(n_theta: usize, f: impl Fn(T) -> State<T>) -> Result<Self> {
        let samples = (0..n_theta).map(|i| f(Self::theta_at(i, n_theta))).collect();
        Self::new(samples)
    }

    pub fn theta_at(i: usize, n: usize) -> T {
        T::TAU() * T::of_usize(i) / T::of_usize(n)
    }

    pub fn n_theta(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[State<T>] {
        &self.samples
    }

    pub fn map(&self, f: impl Fn(&State<T>) -> State<T>) -> Self {
        Self { samples: self.samples.iter().map(f).collect() }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(&State<T>, &State<T>) -> State<T>) -> Result<Self> {
        if other.n_theta() != self.n_theta() {
            return Err(CcnError::Dimension("loop sample counts differ".into()));
        }
        Ok(Self {
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| f(a, b)).collect(),
        })
    }

    /// Spectral θ-derivative, componentwise.
    pub fn derivative(&self) -> Self {
        let n = self.n_theta();
        let sp = Spectral1D::new(n, T::TAU());
        let mut out = vec![linalg::zero_state(); n];
        for c in 0..DIM {
            let comp: Vec<T> = self.samples.iter().map(|s| s[c]).collect();
            for (o, d) in out.iter_mut().zip(sp.derivative(&comp, 1)) {
                o[c] = d;
            }
        }
        Self { samples: out }
    }
}

/// `(1/2π) ∮ <a, b> dθ` by the periodic trapezoidal rule.
pub fn loop_average_inner<T: Real>(a: &LoopFunction<T>, b: &LoopFunction<T>) -> Result<T> {
    if a.n_theta() != b.n_theta() {
        return Err(CcnError::Dimension(format!(
            "loop sample counts differ: {} vs {}",
            a.n_theta(),
            b.n_theta()
        )));
    }
    let sum: T = a.samples.iter().zip(&b.samples).map(|(x, y)| linalg::dot(x, y)).sum();
    Ok(sum / T::of_usize(a.n_theta()))
}

/// Max over θ of `|(kJ + ℓK) Z_θ − ∇S(Z)|_∞`.
pub fn steady_residual<T: Real, S: SystemModel<T> + ?Sized>(
    sys: &S,
    z: &LoopFunction<T>,
    k: T,
    l: T,
) -> T {
    let zt = z.derivative();
    let op = linalg::mat_add_scaled(&linalg::mat_add_scaled(&linalg::zero_mat(), k, sys.j()), l, sys.k());
    z.samples
        .iter()
        .zip(zt.samples())
        .map(|(zz, dz)| {
            let lhs = linalg::mat_vec(&op, dz);
            linalg::max_abs(&linalg::sub(&lhs, &sys.grad_s(zz)))
        })
        .fold(T::zero(), T::max)
}

/// One structural check with its measured error.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub checks: Vec<CheckResult>,
}

impl StructureReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const GRAD_TOL: f64 = 1e-6;
pub const HESS_TOL: f64 = 1e-6;
pub const D3_TOL: f64 = 1e-5;

fn random_states<T: Real>(count: usize, seed: u64) -> Vec<State<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let dir: [f64; DIM] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let r = rng.gen_range(0.0..2.0);
            std::array::from_fn(|i| T::of(r * dir[i] / n))
        })
        .collect()
}

fn max_err<T: Real>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (*x - *y).abs()).fold(T::zero(), T::max).as_f64()
}

/// Runs every structural invariant of a system and reports per-check errors.
pub fn check_structure<T: Real, S: SystemModel<T> + ?Sized>(sys: &S) -> StructureReport {
    let mut checks = Vec::new();
    let j = sys.j();
    let k = sys.k();
    let m = sys.m();

    let skew = |a: &Mat<T>| {
        let at = linalg::transpose(a);
        linalg::mat_max_diff(&at, &linalg::mat_add_scaled(&linalg::zero_mat(), -T::one(), a)).as_f64()
    };
    let sj = skew(j);
    checks.push(CheckResult { name: "J skew-symmetric", passed: sj == 0.0, measured: sj, tolerance: 0.0 });
    let sk = skew(k);
    checks.push(CheckResult { name: "K skew-symmetric", passed: sk == 0.0, measured: sk, tolerance: 0.0 });
    let sm = linalg::mat_max_diff(m, &linalg::transpose(m)).as_f64();
    checks.push(CheckResult { name: "M symmetric", passed: sm == 0.0, measured: sm, tolerance: 0.0 });
    let min_ev = linalg::symmetric_eigenvalues(m).iter().fold(T::infinity(), |a, &b| a.min(b)).as_f64();
    let psd_tol = 1e-14;
    checks.push(CheckResult {
        name: "M positive semidefinite",
        passed: min_ev >= -psd_tol,
        measured: min_ev,
        tolerance: psd_tol,
    });

    let states = random_states::<T>(24, 0x5eed);
    let h = T::of(1e-5);
    let two_h = T::two() * h;
    let unit = |i: usize| -> State<T> {
        let mut e = linalg::zero_state();
        e[i] = T::one();
        e
    };

    let mut grad_err = 0.0f64;
    let mut hess_err = 0.0f64;
    let mut hess_sym = 0.0f64;
    let mut d3_err = 0.0f64;
    for z in &states {
        let g = sys.grad_s(z);
        let fd: State<T> = std::array::from_fn(|i| {
            let e = unit(i);
            (sys.s(&linalg::axpy(z, h, &e)) - sys.s(&linalg::axpy(z, -h, &e))) / two_h
        });
        grad_err = grad_err.max(max_err(&g, &fd));

        let hs = sys.hess_s(z);
        hess_sym = hess_sym.max(linalg::mat_max_diff(&hs, &linalg::transpose(&hs)).as_f64());
        for i in 0..DIM {
            let e = unit(i);
            let col: State<T> = std::array::from_fn(|r| {
                (sys.grad_s(&linalg::axpy(z, h, &e))[r] - sys.grad_s(&linalg::axpy(z, -h, &e))[r]) / two_h
            });
            let exact: State<T> = std::array::from_fn(|r| hs[r][i]);
            hess_err = hess_err.max(max_err(&exact, &col));

            // D³S[e_i, b] against the derivative of the Hessian along e_i
            for b_idx in 0..DIM {
                let b = unit(b_idx);
                let hp = linalg::mat_vec(&sys.hess_s(&linalg::axpy(z, h, &e)), &b);
                let hm = linalg::mat_vec(&sys.hess_s(&linalg::axpy(z, -h, &e)), &b);
                let fd3: State<T> = std::array::from_fn(|r| (hp[r] - hm[r]) / two_h);
                d3_err = d3_err.max(max_err(&sys.d3s(z, &e, &b), &fd3));
            }
        }
    }
    checks.push(CheckResult { name: "gradS vs finite differences", passed: grad_err < GRAD_TOL, measured: grad_err, tolerance: GRAD_TOL });
    checks.push(CheckResult { name: "hessS symmetric", passed: hess_sym == 0.0, measured: hess_sym, tolerance: 0.0 });
    checks.push(CheckResult { name: "hessS vs finite differences", passed: hess_err < HESS_TOL, measured: hess_err, tolerance: HESS_TOL });
    checks.push(CheckResult { name: "d3S vs finite differences", passed: d3_err < D3_TOL, measured: d3_err, tolerance: D3_TOL });
    StructureReport { checks }
}
