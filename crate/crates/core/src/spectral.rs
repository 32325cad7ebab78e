//! Fourier machinery on periodic grids: transforms, wavenumbers, dealiasing
//! masks and spectral derivatives.
//!
//! Storage is row-major with `x` fastest: sample `(i, j)` (x-index `i`,
//! y-index `j`) lives at `j * nx + i`. Transforms are unnormalized forward,
//! `1/N`-normalized inverse.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{CcnError, Result};
use crate::scalar::Real;

/// Signed mode number of FFT bin `idx` for a transform of length `n`.
#[inline]
pub fn mode_number(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// FFT bin holding signed mode `m` (wrapped modulo `n`).
#[inline]
pub fn mode_index(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

/// Periodic rectangular grid with power-of-two mode counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid2D<T> {
    pub nx: usize,
    pub ny: usize,
    pub lx: T,
    pub ly: T,
    /// Retained fraction of each half-spectrum in pointwise products.
    pub dealias: T,
}

impl<T: Real> PeriodicGrid2D<T> {
    pub fn new(nx: usize, ny: usize, lx: T, ly: T) -> Result<Self> {
        Self::with_dealias(nx, ny, lx, ly, T::of(2.0 / 3.0))
    }

    pub fn with_dealias(nx: usize, ny: usize, lx: T, ly: T, dealias: T) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 8 || !n.is_power_of_two() {
                return Err(CcnError::Config(format!(
                    "{name} = {n} must be a power of two >= 8"
                )));
            }
        }
        if !(lx > T::zero() && ly > T::zero() && lx.is_finite() && ly.is_finite()) {
            return Err(CcnError::Config("domain lengths must be positive and finite".into()));
        }
        if !(dealias > T::zero() && dealias <= T::one()) {
            return Err(CcnError::Config("dealias fraction must lie in (0, 1]".into()));
        }
        Ok(Self { nx, ny, lx, ly, dealias })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> T {
        self.lx / T::of_usize(self.nx)
    }

    pub fn dy(&self) -> T {
        self.ly / T::of_usize(self.ny)
    }

    pub fn x(&self, i: usize) -> T {
        T::of_usize(i) * self.dx()
    }

    pub fn y(&self, j: usize) -> T {
        T::of_usize(j) * self.dy()
    }

    /// Angular wavenumber of x-bin `i`.
    pub fn kx(&self, i: usize) -> T {
        T::of(mode_number(i, self.nx) as f64) * T::TAU() / self.lx
    }

    pub fn ky(&self, j: usize) -> T {
        T::of(mode_number(j, self.ny) as f64) * T::TAU() / self.ly
    }

    /// Nearest grid-representable x-wavenumber and the snap amount.
    pub fn snap_kx(&self, k: T) -> (T, T) {
        let base = T::TAU() / self.lx;
        let snapped = (k / base).round() * base;
        (snapped, snapped - k)
    }

    pub fn snap_ky(&self, l: T) -> (T, T) {
        let base = T::TAU() / self.ly;
        let snapped = (l / base).round() * base;
        (snapped, snapped - l)
    }
}

/// Shared FFT plans for one grid. Plans are read-only after construction.
#[derive(Clone)]
pub struct Spectral2D<T: Real> {
    pub grid: PeriodicGrid2D<T>,
    fx: Arc<dyn Fft<T>>,
    ix: Arc<dyn Fft<T>>,
    fy: Arc<dyn Fft<T>>,
    iy: Arc<dyn Fft<T>>,
    kx: Vec<T>,
    ky: Vec<T>,
}

impl<T: Real> std::fmt::Debug for Spectral2D<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral2D").field("grid", &self.grid).finish()
    }
}

impl<T: Real> Spectral2D<T> {
    pub fn new(grid: PeriodicGrid2D<T>) -> Self {
        let mut planner = FftPlanner::new();
        let kx = (0..grid.nx).map(|i| grid.kx(i)).collect();
        let ky = (0..grid.ny).map(|j| grid.ky(j)).collect();
        Self {
            fx: planner.plan_fft_forward(grid.nx),
            ix: planner.plan_fft_inverse(grid.nx),
            fy: planner.plan_fft_forward(grid.ny),
            iy: planner.plan_fft_inverse(grid.ny),
            grid,
            kx,
            ky,
        }
    }

    pub fn kx(&self) -> &[T] {
        &self.kx
    }

    pub fn ky(&self) -> &[T] {
        &self.ky
    }

    fn columns(&self, data: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut col = vec![Complex::new(T::zero(), T::zero()); ny];
        for i in 0..nx {
            for j in 0..ny {
                col[j] = data[j * nx + i];
            }
            plan.process(&mut col);
            for j in 0..ny {
                data[j * nx + i] = col[j];
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex<T>]) {
        assert_eq!(data.len(), self.grid.len());
        self.fx.process(data);
        self.columns(data, &self.fy);
    }

    pub fn inverse(&self, data: &mut [Complex<T>]) {
        assert_eq!(data.len(), self.grid.len());
        self.ix.process(data);
        self.columns(data, &self.iy);
        let norm = T::one() / T::of_usize(self.grid.len());
        for v in data.iter_mut() {
            *v = *v * norm;
        }
    }

    /// Mask that keeps modes with `|m| < frac * n / 2` in both directions.
    /// `frac = 2/3` removes quadratic aliasing, `frac = 1/2` cubic aliasing.
    pub fn dealias_mask(&self, frac: T) -> Vec<bool> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let cx = frac * T::of_usize(nx) / T::two();
        let cy = frac * T::of_usize(ny) / T::two();
        let mut mask = vec![false; nx * ny];
        for j in 0..ny {
            let my = T::of(mode_number(j, ny).unsigned_abs() as f64);
            for i in 0..nx {
                let mx = T::of(mode_number(i, nx).unsigned_abs() as f64);
                mask[j * nx + i] = mx < cx && my < cy;
            }
        }
        mask
    }

    /// Multiplies a spectrum by `(i kx)^px (i ky)^py`, zeroing Nyquist bins
    /// for odd orders.
    pub fn differentiate_hat(&self, hat: &mut [Complex<T>], px: u32, py: u32) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        for j in 0..ny {
            let yfac = ipow(self.ky[j], py);
            let ynyq = py % 2 == 1 && j == ny / 2;
            for i in 0..nx {
                let xnyq = px % 2 == 1 && i == nx / 2;
                let idx = j * nx + i;
                if xnyq || ynyq {
                    hat[idx] = Complex::new(T::zero(), T::zero());
                } else {
                    hat[idx] = hat[idx] * ipow(self.kx[i], px) * yfac;
                }
            }
        }
    }

    /// Spectral derivative of real samples.
    pub fn derivative_real(&self, values: &[T], px: u32, py: u32) -> Vec<T> {
        let mut hat: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.forward(&mut hat);
        self.differentiate_hat(&mut hat, px, py);
        self.inverse(&mut hat);
        hat.into_iter().map(|c| c.re).collect()
    }

    pub fn derivative_complex(&self, values: &[Complex<T>], px: u32, py: u32) -> Vec<Complex<T>> {
        let mut hat = values.to_vec();
        self.forward(&mut hat);
        self.differentiate_hat(&mut hat, px, py);
        self.inverse(&mut hat);
        hat
    }
}

/// `(i k)^p` as a complex factor.
pub fn ipow<T: Real>(k: T, p: u32) -> Complex<T> {
    let mag = k.powi(p as i32);
    match p % 4 {
        0 => Complex::new(mag, T::zero()),
        1 => Complex::new(T::zero(), mag),
        2 => Complex::new(-mag, T::zero()),
        _ => Complex::new(T::zero(), -mag),
    }
}

/// One-dimensional periodic transform used for θ-loops and soliton profiles.
#[derive(Clone)]
pub struct Spectral1D<T: Real> {
    n: usize,
    length: T,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> Spectral1D<T> {
    pub fn new(n: usize, length: T) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            length,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn wavenumber(&self, idx: usize) -> T {
        T::of(mode_number(idx, self.n) as f64) * T::TAU() / self.length
    }

    pub fn forward(&self, v: &[T]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.n);
        let mut hat: Vec<Complex<T>> = v.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.fwd.process(&mut hat);
        hat
    }

    pub fn inverse_real(&self, mut hat: Vec<Complex<T>>) -> Vec<T> {
        self.inv.process(&mut hat);
        let norm = T::one() / T::of_usize(self.n);
        hat.into_iter().map(|c| c.re * norm).collect()
    }

    /// `p`-th derivative of a real periodic sample vector.
    pub fn derivative(&self, v: &[T], p: u32) -> Vec<T> {
        let mut hat = self.forward(v);
        for (idx, h) in hat.iter_mut().enumerate() {
            if p % 2 == 1 && idx == self.n / 2 {
                *h = Complex::new(T::zero(), T::zero());
            } else {
                *h = *h * ipow(self.wavenumber(idx), p);
            }
        }
        self.inverse_real(hat)
    }

    /// Zero-mean antiderivative; the mean of `v` is returned separately.
    pub fn antiderivative(&self, v: &[T]) -> (Vec<T>, T) {
        let mut hat = self.forward(v);
        let mean = hat[0].re / T::of_usize(self.n);
        hat[0] = Complex::new(T::zero(), T::zero());
        for (idx, h) in hat.iter_mut().enumerate().skip(1) {
            if idx == self.n / 2 {
                *h = Complex::new(T::zero(), T::zero());
            } else {
                *h = *h / ipow(self.wavenumber(idx), 1);
            }
        }
        (self.inverse_real(hat), mean)
    }
}
