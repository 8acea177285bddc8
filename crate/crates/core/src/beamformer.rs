//! Phase-only analog beamforming per subarray, the diagonal digital
//! compensation stage, and energy normalization of the chain outputs.
//!
//! Each subarray applies a unit-norm steering weight toward its beam
//! direction, so a chain output carries unit-variance thermal noise and a
//! Dirichlet-kernel gain toward the source.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::{ArrayGeometry, Complex, Error, Result};

/// Approximate 3 dB beamwidth of a uniform subarray, in degrees.
pub fn beamwidth_3db_deg(m_per: usize, spacing: f64) -> f64 {
    50.8 / (m_per as f64 * spacing)
}

/// One beam direction per subarray; subarray `ms` applies weights
/// `exp(j 2π m_a d sin θ_ms) / √M_a` across its elements.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBeamformer {
    geometry: ArrayGeometry,
    beams: Vec<f64>,
}

impl AnalogBeamformer {
    /// All subarrays steered to broadside (all weights `1/√M_a`).
    pub fn broadside(geometry: ArrayGeometry) -> Self {
        Self { geometry, beams: vec![0.0; geometry.m_sub()] }
    }

    /// Equally spaced beams tiling (-π/2, π/2):
    /// `θ_ms = m_s π / M_s − π/2 − π/(2 M_s)` for m_s = 1..M_s.
    ///
    /// Fails unless the M_s half-power beamwidths cover the field of view.
    pub fn coverage(geometry: ArrayGeometry) -> Result<Self> {
        let needed =
            (180.0 / beamwidth_3db_deg(geometry.m_per(), geometry.spacing())).ceil() as usize;
        if geometry.m_sub() < needed {
            return Err(Error::InsufficientSubarrays { needed, got: geometry.m_sub() });
        }
        let m_sub = geometry.m_sub() as f64;
        let beams = (1..=geometry.m_sub())
            .map(|ms| ms as f64 * PI / m_sub - PI / 2.0 - PI / (2.0 * m_sub))
            .collect();
        Ok(Self { geometry, beams })
    }

    /// Arbitrary beam set; one direction per subarray.
    pub fn from_beams(geometry: ArrayGeometry, beams: Vec<f64>) -> Result<Self> {
        if beams.len() != geometry.m_sub() {
            return Err(Error::DimensionMismatch {
                expected: geometry.m_sub(),
                got: beams.len(),
            });
        }
        Ok(Self { geometry, beams })
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geometry
    }

    /// Beam directions in radians, one per subarray.
    pub fn beams(&self) -> &[f64] {
        &self.beams
    }

    fn weight(&self, ms: usize, ma: usize) -> Complex {
        let d = self.geometry.spacing();
        let scale = 1.0 / (self.geometry.m_per() as f64).sqrt();
        Complex::from_polar(scale, 2.0 * PI * ma as f64 * d * self.beams[ms].sin())
    }

    /// Block-diagonal M x M_s beamforming matrix V_A.
    pub fn matrix(&self) -> DMatrix<Complex> {
        let (m, ms_n, ma_n) =
            (self.geometry.m_total(), self.geometry.m_sub(), self.geometry.m_per());
        let mut v = DMatrix::zeros(m, ms_n);
        for ms in 0..ms_n {
            for ma in 0..ma_n {
                v[(ms * ma_n + ma, ms)] = self.weight(ms, ma);
            }
        }
        v
    }

    /// Chain outputs `V_Aᴴ x` for one antenna-domain snapshot.
    pub fn apply(&self, x: &DVector<Complex>) -> Result<DVector<Complex>> {
        if x.len() != self.geometry.m_total() {
            return Err(Error::DimensionMismatch {
                expected: self.geometry.m_total(),
                got: x.len(),
            });
        }
        let ma_n = self.geometry.m_per();
        Ok(DVector::from_fn(self.geometry.m_sub(), |ms, _| {
            (0..ma_n).map(|ma| self.weight(ms, ma).conj() * x[ms * ma_n + ma]).sum()
        }))
    }

    /// Per-chain complex gains `V_Aᴴ a(θ)` toward a source at θ.
    pub fn chain_gains(&self, theta: f64) -> Result<DVector<Complex>> {
        self.apply(&self.geometry.steering_vector(theta)?)
    }

    /// Gain of subarray `ms` toward θ via the Dirichlet kernel:
    /// `wᴴ a_sub(θ) = e^{j(M_a−1)x/2} sin(M_a x/2) / (√M_a sin(x/2))`
    /// with `x = 2π d (sinθ − sinθ_ms)`.
    pub fn subarray_gain(&self, ms: usize, theta: f64) -> Result<Complex> {
        if ms >= self.geometry.m_sub() {
            return Err(Error::InvalidParameter(format!("subarray index {ms} out of range")));
        }
        ArrayGeometry::check_direction(theta)?;
        let ma = self.geometry.m_per() as f64;
        let x = 2.0 * PI * self.geometry.spacing() * (theta.sin() - self.beams[ms].sin());
        let ratio = if (x / 2.0).sin().abs() < 1e-12 {
            // limit of sin(Ma x / 2) / sin(x / 2) at a grating point
            ma * (ma * x / 2.0).cos() / (x / 2.0).cos()
        } else {
            (ma * x / 2.0).sin() / (x / 2.0).sin()
        };
        Ok(Complex::from_polar(1.0, (ma - 1.0) * x / 2.0) * ratio / ma.sqrt())
    }
}

/// Diagonal digital stage aligning the subarray phase centers: entry
/// `e^{j π (M_a − 1) d sin θ_ms}` per chain.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalCombiner {
    diag: DVector<Complex>,
}

impl DigitalCombiner {
    pub fn for_beamformer(ab: &AnalogBeamformer) -> Self {
        let ma = ab.geometry().m_per() as f64;
        let d = ab.geometry().spacing();
        let diag = DVector::from_iterator(
            ab.beams().len(),
            ab.beams()
                .iter()
                .map(|&b| Complex::from_polar(1.0, PI * (ma - 1.0) * d * b.sin())),
        );
        Self { diag }
    }

    pub fn diagonal(&self) -> &DVector<Complex> {
        &self.diag
    }

    /// Elementwise product with one chain-domain snapshot.
    pub fn apply(&self, y: &DVector<Complex>) -> Result<DVector<Complex>> {
        if y.len() != self.diag.len() {
            return Err(Error::DimensionMismatch { expected: self.diag.len(), got: y.len() });
        }
        Ok(y.component_mul(&self.diag))
    }
}

/// Scale each chain (row) of a snapshot block to unit empirical power.
/// Returns the normalized block and the per-chain mean powers.
pub fn energy_normalize(snapshots: &DMatrix<Complex>) -> Result<(DMatrix<Complex>, Vec<f64>)> {
    let n = snapshots.ncols();
    if n == 0 {
        return Err(Error::InvalidParameter("empty snapshot block".into()));
    }
    let mut out = snapshots.clone();
    let mut powers = Vec::with_capacity(snapshots.nrows());
    for ms in 0..snapshots.nrows() {
        let p = snapshots.row(ms).iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::ZeroChainPower(ms));
        }
        let scale = Complex::new(1.0 / p.sqrt(), 0.0);
        out.row_mut(ms).iter_mut().for_each(|v| *v *= scale);
        powers.push(p);
    }
    Ok((out, powers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn geom(m: usize, ma: usize) -> ArrayGeometry {
        ArrayGeometry::with_default_spacing(m, ma).unwrap()
    }

    #[test]
    fn broadside_weights_are_uniform() {
        let ab = AnalogBeamformer::broadside(geom(8, 4));
        let v = ab.matrix();
        let w = 1.0 / 2.0; // 1/sqrt(4)
        assert_relative_eq!(v[(0, 0)].re, w, epsilon = 1e-15);
        assert_relative_eq!(v[(3, 0)].re, w, epsilon = 1e-15);
        assert_eq!(v[(4, 0)], Complex::new(0.0, 0.0));
        assert_relative_eq!(v[(4, 1)].re, w, epsilon = 1e-15);
    }

    #[test]
    fn columns_have_unit_norm() {
        let ab = AnalogBeamformer::coverage(geom(32, 4)).unwrap();
        let v = ab.matrix();
        for c in 0..v.ncols() {
            assert_relative_eq!(v.column(c).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn coverage_beams_tile_the_field_of_view() {
        let ab = AnalogBeamformer::coverage(geom(16, 2)).unwrap();
        let beams = ab.beams();
        assert_eq!(beams.len(), 8);
        // symmetric about broadside, strictly increasing, inside (-pi/2, pi/2)
        for w in beams.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert_relative_eq!(beams[0], -beams[7], epsilon = 1e-12);
        assert!(beams[0] > -PI / 2.0 && beams[7] < PI / 2.0);
        assert_relative_eq!(beams[0], PI / 8.0 - PI / 2.0 - PI / 16.0, epsilon = 1e-12);
    }

    #[test]
    fn coverage_rejects_sparse_arrays() {
        // M_a = 8 gives a 12.7 degree beamwidth; 2 subarrays cannot cover
        let err = AnalogBeamformer::coverage(geom(16, 8)).unwrap_err();
        match err {
            Error::InsufficientSubarrays { needed, got } => {
                assert_eq!(got, 2);
                assert!(needed > 2);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn chain_gain_peaks_on_its_own_beam() {
        let ab = AnalogBeamformer::coverage(geom(32, 4)).unwrap();
        let beams: Vec<f64> = ab.beams().to_vec();
        for (ms, &b) in beams.iter().enumerate() {
            let g = ab.chain_gains(b).unwrap();
            let best = (0..g.len()).max_by(|&i, &j| g[i].norm().total_cmp(&g[j].norm())).unwrap();
            assert_eq!(best, ms);
            // on-beam gain is sqrt(M_a)
            assert_relative_eq!(g[ms].norm(), 2.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn dirichlet_gain_matches_direct_sum() {
        let ab = AnalogBeamformer::coverage(geom(32, 4)).unwrap();
        for ms in [0, 3, 7] {
            for theta in [-1.2, -0.3, 0.0, 0.7, ab.beams()[ms]] {
                let direct: Complex = {
                    let (_, a_a) = ab.geometry().subarray_factors(theta).unwrap();
                    (0..4).map(|ma| ab.weight(ms, ma).conj() * a_a[ma]).sum()
                };
                let closed = ab.subarray_gain(ms, theta).unwrap();
                assert!((direct - closed).norm() < 1e-10, "ms={ms} theta={theta}");
            }
        }
    }

    #[test]
    fn apply_matches_matrix_product() {
        let ab = AnalogBeamformer::coverage(geom(16, 2)).unwrap();
        let x = ab.geometry().steering_vector(0.4).unwrap();
        let fast = ab.apply(&x).unwrap();
        let slow = ab.matrix().adjoint() * &x;
        assert!((fast - slow).norm() < 1e-12);
        assert!(ab.apply(&DVector::zeros(5)).is_err());
    }

    #[test]
    fn combiner_leaves_only_the_virtual_array_phase() {
        // after compensation, each chain's response is the virtual-array
        // phasor times a real gain with a phase common to all chains
        let ab = AnalogBeamformer::coverage(geom(32, 4)).unwrap();
        let vd = DigitalCombiner::for_beamformer(&ab);
        let theta = 0.3f64;
        let g = ab.chain_gains(theta).unwrap();
        let y = vd.apply(&g).unwrap();
        let vs = ab.geometry().virtual_spacing();
        let residuals: Vec<f64> = (0..y.len())
            .map(|ms| {
                let virt = Complex::from_polar(1.0, 2.0 * PI * ms as f64 * vs * theta.sin());
                (y[ms] / virt).arg()
            })
            .collect();
        for r in &residuals {
            // common phase up to the Dirichlet sign ambiguity
            let diff = (r - residuals[0]).rem_euclid(PI);
            assert!(diff < 1e-9 || diff > PI - 1e-9, "residual phases {residuals:?}");
        }
    }

    #[test]
    fn energy_normalize_unit_rows() {
        let ab = AnalogBeamformer::coverage(geom(16, 2)).unwrap();
        let g = ab.chain_gains(0.3).unwrap();
        let block = DMatrix::from_columns(&[g.clone(), g.map(|v| v * Complex::new(2.0, 0.0))]);
        let (norm, powers) = energy_normalize(&block).unwrap();
        for ms in 0..norm.nrows() {
            let p = norm.row(ms).iter().map(|v| v.norm_sqr()).sum::<f64>() / 2.0;
            assert_relative_eq!(p, 1.0, epsilon = 1e-12);
            assert!(powers[ms] > 0.0);
        }
        let zero = DMatrix::zeros(3, 4);
        assert!(matches!(energy_normalize(&zero), Err(Error::ZeroChainPower(0))));
    }
}
