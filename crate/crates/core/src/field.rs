//! Scalar fields on a periodic rectangle.

use num_complex::Complex;

use crate::error::{CcnError, Result};
use crate::scalar::Real;
use crate::spectral::PeriodicGrid2D;

/// What a field represents; decides how it is evolved and serialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// Complex RGL amplitude `Ψ`.
    RglPsi,
    /// Real slow phase `φ`; imaginary parts are kept at zero.
    CcnPhi,
}

impl FieldKind {
    pub fn code(self) -> u8 {
        match self {
            FieldKind::RglPsi => 0,
            FieldKind::CcnPhi => 1,
        }
    }

    pub fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(FieldKind::RglPsi),
            1 => Ok(FieldKind::CcnPhi),
            _ => Err(CcnError::Format(format!("unknown field kind code {c}"))),
        }
    }
}

/// Samples on a [`PeriodicGrid2D`], row-major with `x` fastest, at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D<T> {
    pub grid: PeriodicGrid2D<T>,
    pub kind: FieldKind,
    pub t: T,
    values: Vec<Complex<T>>,
}

impl<T: Real> Field2D<T> {
    pub fn new(grid: PeriodicGrid2D<T>, kind: FieldKind, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CcnError::Dimension(format!(
                "field has {} samples, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, kind, t: T::zero(), values })
    }

    pub fn zeros(grid: PeriodicGrid2D<T>, kind: FieldKind) -> Self {
        Self { grid, kind, t: T::zero(), values: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    /// Complex field from `f(x, y)`.
    pub fn from_fn(grid: PeriodicGrid2D<T>, kind: FieldKind, f: impl Fn(T, T) -> Complex<T>) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self { grid, kind, t: T::zero(), values }
    }

    /// Real phase field from `f(x, y)`.
    pub fn from_real_fn(grid: PeriodicGrid2D<T>, f: impl Fn(T, T) -> T) -> Self {
        Self::from_fn(grid, FieldKind::CcnPhi, |x, y| Complex::new(f(x, y), T::zero()))
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn real_values(&self) -> Vec<T> {
        self.values.iter().map(|c| c.re).collect()
    }

    pub fn at(&self, i: usize, j: usize) -> Complex<T> {
        self.values[j * self.grid.nx + i]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Largest pointwise modulus of the difference to `other`.
    pub fn max_diff(&self, other: &Self) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }
}
