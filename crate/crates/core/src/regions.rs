//! Classification of a square wavenumber window into existence and
//! characteristic regions.

use rayon::prelude::*;

use crate::coeffs::delta_zz_closed;
use crate::error::{CcnError, Result};
use crate::roll::{classify, DomainClass, Wavenumber, CLASSIFY_TOL};

/// Half-width of the sampled window `[−E, E]²`.
pub const REGION_EXTENT: f64 = 1.05;
pub const MIN_RESOLUTION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCell {
    pub k: f64,
    pub l: f64,
    pub delta_zz: f64,
    pub class: DomainClass,
}

/// Cell-centred classification on a `resolution²` grid, row-major in `ℓ`.
#[derive(Debug, Clone)]
pub struct RegionMap {
    pub resolution: usize,
    pub cells: Vec<RegionCell>,
}

/// Radii of the disc and inner circle recovered from cell areas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSummary {
    pub cell_size: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Area of `𝒟⁻` over the area of `𝒟`.
    pub minus_fraction: f64,
    pub n_outside: usize,
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_boundary: usize,
}

pub fn region_map(resolution: usize) -> Result<RegionMap> {
    if resolution < MIN_RESOLUTION {
        return Err(CcnError::Parameter(format!("resolution {resolution} is below {MIN_RESOLUTION}")));
    }
    let h = 2.0 * REGION_EXTENT / resolution as f64;
    let centre = |i: usize| -REGION_EXTENT + (i as f64 + 0.5) * h;
    let cells = (0..resolution)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..resolution).map(move |i| {
                let kl = Wavenumber::new(centre(i), centre(j));
                RegionCell { k: kl.k, l: kl.l, delta_zz: delta_zz_closed(kl), class: classify(kl, CLASSIFY_TOL) }
            })
        })
        .collect();
    Ok(RegionMap { resolution, cells })
}

impl RegionMap {
    pub fn cell_size(&self) -> f64 {
        2.0 * REGION_EXTENT / self.resolution as f64
    }

    pub fn summary(&self) -> RegionSummary {
        let count = |c: DomainClass| self.cells.iter().filter(|x| x.class == c).count();
        let n_plus = count(DomainClass::DPlus);
        let n_minus = count(DomainClass::DMinus);
        let n_outside = count(DomainClass::OutsideD);
        let n_boundary = self.cells.len() - n_plus - n_minus - n_outside;
        let h = self.cell_size();
        let cell_area = h * h;
        let pi = std::f64::consts::PI;
        RegionSummary {
            cell_size: h,
            inner_radius: (n_plus as f64 * cell_area / pi).sqrt(),
            outer_radius: ((n_plus + n_minus) as f64 * cell_area / pi).sqrt(),
            minus_fraction: n_minus as f64 / (n_plus + n_minus) as f64,
            n_outside,
            n_plus,
            n_minus,
            n_boundary,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_and_area_fraction() {
        let inner = 1.0 / 3f64.sqrt();
        for (res, tol) in [(512, 0.005), (64, 0.02)] {
            let s = region_map(res).unwrap().summary();
            assert!((s.inner_radius - inner).abs() < tol, "{res}: {}", s.inner_radius);
            assert!((s.outer_radius - 1.0).abs() < tol, "{res}: {}", s.outer_radius);
            assert!((s.minus_fraction - 2.0 / 3.0).abs() < 0.01 + tol, "{res}: {}", s.minus_fraction);
        }
        let s = region_map(512).unwrap().summary();
        assert!((s.inner_radius - inner).abs() < s.cell_size);
        assert!((s.minus_fraction - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn rejects_coarse_grids() {
        assert!(matches!(region_map(32), Err(CcnError::Parameter(_))));
    }

    #[test]
    fn cells_are_centred_and_ordered() {
        let m = region_map(64).unwrap();
        assert_eq!(m.cells.len(), 64 * 64);
        let h = m.cell_size();
        assert!((m.cells[0].k + REGION_EXTENT - 0.5 * h).abs() < 1e-15);
        assert!((m.cells[64].l - m.cells[0].l - h).abs() < 1e-15);
        assert_eq!(m.cells[0].class, DomainClass::OutsideD);
    }
}
