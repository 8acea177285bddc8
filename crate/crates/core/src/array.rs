//! Uniform linear array geometry, steering vectors and their derivatives,
//! and the Kronecker-structured position matrices of the sub-connected
//! hybrid architecture.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::{Complex, Error, Result};

/// Sub-connected ULA geometry: `m_total` antennas split into `m_sub`
/// disjoint subarrays of `m_per` antennas each.
///
/// The first (endpoint) element is the phase reference; antenna `m`
/// (1-based) sits at `(m - 1) * spacing` wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    m_total: usize,
    m_sub: usize,
    m_per: usize,
    spacing: f64,
}

impl ArrayGeometry {
    /// Half-wavelength spacing, the default throughout.
    pub const DEFAULT_SPACING: f64 = 0.5;

    pub fn new(m_total: usize, m_per: usize, spacing: f64) -> Result<Self> {
        if m_total == 0 || m_per == 0 {
            return Err(Error::InvalidGeometry(
                "antenna and subarray counts must be positive".into(),
            ));
        }
        if m_total % m_per != 0 {
            return Err(Error::InvalidGeometry(format!(
                "{m_total} antennas do not split into subarrays of {m_per}"
            )));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::InvalidGeometry(format!("spacing {spacing} must be positive")));
        }
        Ok(Self { m_total, m_sub: m_total / m_per, m_per, spacing })
    }

    /// Geometry with the default half-wavelength spacing.
    pub fn with_default_spacing(m_total: usize, m_per: usize) -> Result<Self> {
        Self::new(m_total, m_per, Self::DEFAULT_SPACING)
    }

    /// Total antenna count M.
    pub fn m_total(&self) -> usize {
        self.m_total
    }

    /// Subarray (RF chain) count M_s.
    pub fn m_sub(&self) -> usize {
        self.m_sub
    }

    /// Antennas per subarray M_a.
    pub fn m_per(&self) -> usize {
        self.m_per
    }

    /// Antenna spacing in wavelengths.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Position of antenna `m` (0-based) in wavelengths.
    pub fn position(&self, m: usize) -> f64 {
        m as f64 * self.spacing
    }

    /// Spacing of the virtual array formed by the subarray references.
    pub fn virtual_spacing(&self) -> f64 {
        self.m_per as f64 * self.spacing
    }

    /// Reject directions outside the open interval (-pi/2, pi/2).
    pub fn check_direction(theta: f64) -> Result<()> {
        if !theta.is_finite() || theta <= -PI / 2.0 || theta >= PI / 2.0 {
            return Err(Error::InvalidDirection(theta));
        }
        Ok(())
    }

    /// Array manifold a(θ): entry m is `exp(j 2π sinθ d_m / λ)`.
    pub fn steering_vector(&self, theta: f64) -> Result<DVector<Complex>> {
        Self::check_direction(theta)?;
        let s = theta.sin();
        Ok(DVector::from_fn(self.m_total, |m, _| {
            Complex::from_polar(1.0, 2.0 * PI * s * self.position(m))
        }))
    }

    /// Derivative of the manifold, `j (2π/λ) cosθ D a(θ)`.
    pub fn steering_derivative(&self, theta: f64) -> Result<DVector<Complex>> {
        let a = self.steering_vector(theta)?;
        let c = theta.cos();
        Ok(DVector::from_fn(self.m_total, |m, _| {
            Complex::new(0.0, 2.0 * PI * c * self.position(m)) * a[m]
        }))
    }

    /// Diagonal position matrices (D, D_s, D_a) with
    /// `I ⊗ D_a + D_s ⊗ I = D`.
    pub fn position_matrices(&self) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let d = DMatrix::from_fn(self.m_total, self.m_total, |i, j| {
            if i == j { self.position(i) } else { 0.0 }
        });
        let ds = DMatrix::from_fn(self.m_sub, self.m_sub, |i, j| {
            if i == j { (i * self.m_per) as f64 * self.spacing } else { 0.0 }
        });
        let da = DMatrix::from_fn(self.m_per, self.m_per, |i, j| {
            if i == j { self.position(i) } else { 0.0 }
        });
        (d, ds, da)
    }

    /// Subarray factors (a_s, a_a) with `a_s ⊗ a_a = a(θ)`.
    pub fn subarray_factors(&self, theta: f64) -> Result<(DVector<Complex>, DVector<Complex>)> {
        Self::check_direction(theta)?;
        let s = theta.sin();
        let a_s = DVector::from_fn(self.m_sub, |ms, _| {
            Complex::from_polar(1.0, 2.0 * PI * (ms * self.m_per) as f64 * self.spacing * s)
        });
        let a_a = DVector::from_fn(self.m_per, |ma, _| {
            Complex::from_polar(1.0, 2.0 * PI * ma as f64 * self.spacing * s)
        });
        Ok((a_s, a_a))
    }
}
