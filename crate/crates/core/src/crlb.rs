//! Fisher information and Cramer-Rao bounds for the single-source
//! direction under the AQNM-linearized mixed-ADC receive model, in
//! closed form for the broadside (all-ones) analog beamformer and via a
//! direct matrix-calculus oracle for arbitrary beamformers.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::{AdcProfile, AnalogBeamformer, ArrayGeometry, Complex, Error, Result};

/// Per-snapshot Fisher information for (γ, θ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherReport {
    pub f_gamma_gamma: f64,
    pub f_gamma_theta: f64,
    pub f_theta_theta: f64,
}

impl FisherReport {
    /// Direction CRLB over `n` snapshots, in rad², from the diagonal
    /// information term.
    pub fn crlb_theta(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidParameter("snapshot count must be positive".into()));
        }
        if !(self.f_theta_theta > 0.0) {
            return Err(Error::NonPositiveInformation);
        }
        Ok(1.0 / (n as f64 * self.f_theta_theta))
    }

    /// Direction CRLB over `n` snapshots, in squared degrees.
    pub fn crlb_theta_deg2(&self, n: usize) -> Result<f64> {
        Ok(self.crlb_theta(n)? * (180.0 / PI).powi(2))
    }
}

/// Scalar ingredients of the closed-form information for the broadside
/// analog beamformer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormIngredients {
    /// Subarray coherence ζ = Σ_ma exp(j 2π d_ma sinθ0).
    pub zeta: Complex,
    /// Derivative-weighted coherence Γ = Σ_ma d_ma exp(j 2π d_ma sinθ0).
    pub gamma_factor: Complex,
    /// Quantization-noise variance on the low-resolution chains.
    pub sigma_q2: f64,
    /// Low-resolution chain weight α² / (α² + σ_q²).
    pub weight: f64,
    /// Effective chain count ξ = M_0 + weight M_1.
    pub xi: f64,
    /// Weighted subarray-position sum μ.
    pub mu: f64,
    /// Weighted squared subarray-position sum ν.
    pub nu: f64,
}

pub fn closed_form_ingredients(
    geom: &ArrayGeometry,
    profile: &AdcProfile,
    gamma: f64,
    theta0: f64,
) -> Result<ClosedFormIngredients> {
    check_inputs(geom, profile, gamma, theta0)?;
    let s = theta0.sin();
    let mut zeta = Complex::new(0.0, 0.0);
    let mut gamma_factor = Complex::new(0.0, 0.0);
    for ma in 0..geom.m_per() {
        let d = geom.position(ma);
        let e = Complex::from_polar(1.0, 2.0 * PI * d * s);
        zeta += e;
        gamma_factor += d * e;
    }
    let alpha = profile.alpha();
    let sigma_q2 = alpha
        * profile.beta()
        * (gamma * zeta.norm_sqr() / geom.m_per() as f64 + 1.0);
    let weight = alpha * alpha / (alpha * alpha + sigma_q2);
    let xi = profile.m_high() as f64 + weight * profile.m_low() as f64;
    let (mut mu, mut nu) = (0.0, 0.0);
    for ms in 0..geom.m_sub() {
        let d = ms as f64 * geom.virtual_spacing();
        let w = if ms < profile.m_high() { 1.0 } else { weight };
        mu += w * d;
        nu += w * d * d;
    }
    Ok(ClosedFormIngredients { zeta, gamma_factor, sigma_q2, weight, xi, mu, nu })
}

fn check_inputs(
    geom: &ArrayGeometry,
    profile: &AdcProfile,
    gamma: f64,
    theta0: f64,
) -> Result<()> {
    ArrayGeometry::check_direction(theta0)?;
    if profile.m_high() + profile.m_low() != geom.m_sub() {
        return Err(Error::DimensionMismatch {
            expected: geom.m_sub(),
            got: profile.m_high() + profile.m_low(),
        });
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!("snr {gamma} must be positive")));
    }
    Ok(())
}

/// Closed-form per-snapshot Fisher information for the broadside analog
/// beamformer. The cross term is identically zero in this model.
pub fn fim_closed_form(
    geom: &ArrayGeometry,
    profile: &AdcProfile,
    gamma: f64,
    theta0: f64,
) -> Result<FisherReport> {
    let ing = closed_form_ingredients(geom, profile, gamma, theta0)?;
    let ma = geom.m_per() as f64;
    let z2 = ing.zeta.norm_sqr();
    let den = gamma * ing.xi * z2 + ma;
    let f_gamma_gamma = (ing.xi * z2 / den).powi(2);
    let cross = (ing.gamma_factor.conj() * ing.zeta).powi(2).re;
    let phi = z2 * z2 * (ing.xi * ing.nu - ing.mu * ing.mu) * den
        + ma * ing.xi * ing.xi * (z2 * ing.gamma_factor.norm_sqr() - cross);
    let f_theta_theta =
        8.0 * PI * PI * gamma * gamma * theta0.cos().powi(2) / (ma * den * den) * phi;
    Ok(FisherReport { f_gamma_gamma, f_gamma_theta: 0.0, f_theta_theta })
}

/// Direction CRLB over `n` snapshots (rad²) for the broadside beamformer.
pub fn crlb_theta(
    geom: &ArrayGeometry,
    profile: &AdcProfile,
    gamma: f64,
    theta0: f64,
    n: usize,
) -> Result<f64> {
    fim_closed_form(geom, profile, gamma, theta0)?.crlb_theta(n)
}

/// CRLB of the fully digital full-resolution reference array (rad²):
/// `3 (γM + 1) / (2 N π² γ² cos²θ0 d² M² (M² − 1))`.
pub fn crlb_ideal(m_total: usize, spacing: f64, gamma: f64, theta0: f64, n: usize) -> Result<f64> {
    ArrayGeometry::check_direction(theta0)?;
    if m_total < 2 {
        return Err(Error::InvalidGeometry("reference array needs at least 2 antennas".into()));
    }
    if n == 0 || !(gamma > 0.0) {
        return Err(Error::InvalidParameter("need positive snapshots and snr".into()));
    }
    let m = m_total as f64;
    Ok(3.0 * (gamma * m + 1.0)
        / (2.0
            * n as f64
            * PI
            * PI
            * gamma
            * gamma
            * theta0.cos().powi(2)
            * spacing
            * spacing
            * m
            * m
            * (m * m - 1.0)))
}

/// Performance-loss factor η_PL >= 1: the ratio of the hybrid mixed-ADC
/// direction CRLB to the fully digital full-resolution one, in closed
/// form.
pub fn performance_loss(
    geom: &ArrayGeometry,
    profile: &AdcProfile,
    gamma: f64,
    theta0: f64,
) -> Result<f64> {
    let ing = closed_form_ingredients(geom, profile, gamma, theta0)?;
    let m = geom.m_total() as f64;
    let ma = geom.m_per() as f64;
    let d = geom.spacing();
    let z2 = ing.zeta.norm_sqr();
    let den = gamma * ing.xi * z2 + ma;
    let cross = (ing.gamma_factor.conj() * ing.zeta).powi(2).re;
    let phi = z2 * z2 * (ing.xi * ing.nu - ing.mu * ing.mu) * den
        + ma * ing.xi * ing.xi * (z2 * ing.gamma_factor.norm_sqr() - cross);
    if !(phi > 0.0) {
        return Err(Error::NonPositiveInformation);
    }
    Ok(ma * m * m * d * d * (m * m - 1.0) * den * den
        / (12.0 * (gamma * m + 1.0) * phi))
}

/// Per-snapshot Fisher information computed directly from the chain-
/// domain covariance of the AQNM model, for an arbitrary analog
/// beamformer. Derivatives follow the linearized-gain model, holding the
/// quantization-noise covariance fixed.
pub fn fim_numerical_oracle(
    ab: &AnalogBeamformer,
    profile: &AdcProfile,
    gamma: f64,
    theta0: f64,
) -> Result<FisherReport> {
    let geom = ab.geometry();
    check_inputs(geom, profile, gamma, theta0)?;
    let m_sub = geom.m_sub();
    let alpha = profile.alpha();
    let g = ab.chain_gains(theta0)?;
    let dg = ab.apply(&geom.steering_derivative(theta0)?)?;

    // T scales low-resolution chains by alpha; Q holds thermal plus
    // quantization noise per chain
    let mut h = DVector::zeros(m_sub);
    let mut dh = DVector::zeros(m_sub);
    let mut q = DMatrix::zeros(m_sub, m_sub);
    for ms in 0..m_sub {
        let low = ms >= profile.m_high();
        let t = if low { alpha } else { 1.0 };
        h[ms] = g[ms] * t;
        dh[ms] = dg[ms] * t;
        q[(ms, ms)] = Complex::new(
            if low {
                let sq = alpha * profile.beta() * (gamma * g[ms].norm_sqr() + 1.0);
                alpha * alpha + sq
            } else {
                1.0
            },
            0.0,
        );
    }
    let ry = &h * h.adjoint() * Complex::new(gamma, 0.0) + &q;
    let ri = ry.try_inverse().ok_or(Error::NonPositiveInformation)?;
    let dr_gamma = &h * h.adjoint();
    let dr_theta = (&dh * h.adjoint() + &h * dh.adjoint()) * Complex::new(gamma, 0.0);
    let trace2 = |a: &DMatrix<Complex>, b: &DMatrix<Complex>| -> f64 {
        (&ri * a * &ri * b).trace().re
    };
    Ok(FisherReport {
        f_gamma_gamma: trace2(&dr_gamma, &dr_gamma),
        f_gamma_theta: trace2(&dr_gamma, &dr_theta),
        f_theta_theta: trace2(&dr_theta, &dr_theta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn setup(m: usize, ma: usize, m_high: usize, bits: u32) -> (ArrayGeometry, AdcProfile) {
        let geom = ArrayGeometry::with_default_spacing(m, ma).unwrap();
        let profile = AdcProfile::new(geom.m_sub(), m_high, bits).unwrap();
        (geom, profile)
    }

    fn floored_rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
    }

    #[test]
    fn closed_form_matches_oracle_on_a_grid() {
        for (m, ma) in [(16, 2), (32, 4), (64, 1)] {
            for m_high in [0, 2] {
                for bits in [1, 3] {
                    for gamma in [0.1, 1.0, 10.0] {
                        for deg in [-45.0, 0.0, 15.0, 60.0] {
                            let (geom, profile) = setup(m, ma, m_high, bits);
                            let ab = AnalogBeamformer::broadside(geom);
                            let closed =
                                fim_closed_form(&geom, &profile, gamma, (deg as f64).to_radians())
                                    .unwrap();
                            let oracle = fim_numerical_oracle(
                                &ab,
                                &profile,
                                gamma,
                                (deg as f64).to_radians(),
                            )
                            .unwrap();
                            assert!(
                                floored_rel(closed.f_theta_theta, oracle.f_theta_theta) < 1e-10,
                                "Ftt mismatch at M={m} Ma={ma} M0={m_high} b={bits} g={gamma} t={deg}"
                            );
                            assert!(
                                floored_rel(closed.f_gamma_gamma, oracle.f_gamma_gamma) < 1e-10,
                                "Fgg mismatch at M={m} Ma={ma} M0={m_high} b={bits} g={gamma} t={deg}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ideal_configuration_has_unit_performance_loss() {
        let (geom, profile) = setup(64, 1, 64, 12);
        let profile = profile.with_beta(0.0);
        let pl = performance_loss(&geom, &profile, 1.0, 0.3).unwrap();
        assert_relative_eq!(pl, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn performance_loss_matches_crlb_ratio() {
        let (geom, profile) = setup(32, 4, 2, 2);
        let gamma = 0.5;
        let theta0 = 0.25;
        let pl = performance_loss(&geom, &profile, gamma, theta0).unwrap();
        let hybrid = crlb_theta(&geom, &profile, gamma, theta0, 32).unwrap();
        let ideal = crlb_ideal(32, 0.5, gamma, theta0, 32).unwrap();
        assert_relative_eq!(pl, hybrid / ideal, max_relative = 1e-12);
        assert!(pl > 1.0);
    }

    #[test]
    fn ideal_crlb_matches_closed_form_information() {
        let (geom, profile) = setup(16, 1, 16, 12);
        let profile = profile.with_beta(0.0);
        let via_fim = crlb_theta(&geom, &profile, 2.0, 0.4, 10).unwrap();
        let direct = crlb_ideal(16, 0.5, 2.0, 0.4, 10).unwrap();
        assert_relative_eq!(via_fim, direct, max_relative = 1e-12);
    }

    #[test]
    fn crlb_improves_with_snr_antennas_and_resolution() {
        let (geom, profile) = setup(32, 2, 0, 2);
        let base = crlb_theta(&geom, &profile, 1.0, 0.2, 32).unwrap();
        let high_snr = crlb_theta(&geom, &profile, 10.0, 0.2, 32).unwrap();
        assert!(high_snr < base);
        let (geom2, profile2) = setup(64, 2, 0, 2);
        assert!(crlb_theta(&geom2, &profile2, 1.0, 0.2, 32).unwrap() < base);
        let (_, profile3) = setup(32, 2, 0, 5);
        assert!(crlb_theta(&geom, &profile3, 1.0, 0.2, 32).unwrap() < base);
    }

    #[test]
    fn cross_information_is_small_but_nonzero_for_subarrays() {
        let (geom, profile) = setup(32, 4, 2, 2);
        let ab = AnalogBeamformer::broadside(geom);
        let f = fim_numerical_oracle(&ab, &profile, 1.0, 0.3).unwrap();
        let scale = f.f_gamma_gamma.abs().max(f.f_theta_theta.abs());
        let rel = f.f_gamma_theta.abs() / scale;
        assert!(rel > 1e-12, "cross term unexpectedly zero");
        assert!(rel < 0.05, "cross term unexpectedly large: {rel}");
    }

    #[test]
    fn input_validation() {
        let (geom, profile) = setup(16, 2, 0, 2);
        assert!(fim_closed_form(&geom, &profile, -1.0, 0.1).is_err());
        assert!(fim_closed_form(&geom, &profile, 1.0, 2.0).is_err());
        let bad = AdcProfile::new(4, 0, 2).unwrap();
        assert!(fim_closed_form(&geom, &bad, 1.0, 0.1).is_err());
        assert!(crlb_ideal(1, 0.5, 1.0, 0.1, 10).is_err());
        assert!(FisherReport { f_gamma_gamma: 1.0, f_gamma_theta: 0.0, f_theta_theta: 0.0 }
            .crlb_theta(10)
            .is_err());
    }

    #[test]
    fn degenerate_coherence_point_stays_finite() {
        // M_a = 4 at 30 degrees zeroes the subarray coherence
        let (geom, profile) = setup(32, 4, 2, 3);
        let f = fim_closed_form(&geom, &profile, 1.0, 30f64.to_radians()).unwrap();
        assert!(f.f_theta_theta.is_finite());
        assert!(f.f_gamma_gamma.abs() < 1e-20);
    }
}
