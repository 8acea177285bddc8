//! Receiver power consumption and the energy-efficiency figure of merit.
//!
//! All powers are carried in watts. The ADC power follows the standard
//! CMOS scaling law in resolution and sampling bandwidth; one-bit chains
//! drop the automatic gain control since a sign quantizer needs none.

use crate::{AdcProfile, ArrayGeometry, Error, Result};

/// Component power draws and ADC process parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    /// Analog phase shifter, per antenna (W).
    pub p_phase_shifter: f64,
    /// Low-noise amplifier, per chain (W).
    pub p_lna: f64,
    /// Mixer, per chain (W).
    pub p_mixer: f64,
    /// Filter, per chain (W).
    pub p_filter: f64,
    /// IF amplifier, per chain (W).
    pub p_if_amp: f64,
    /// Frequency synthesizer, shared (W).
    pub p_synthesizer: f64,
    /// Automatic gain control, per multi-bit ADC pair (W).
    pub p_agc: f64,
    /// ADC supply voltage (V).
    pub v_dd: f64,
    /// Minimum channel length (m).
    pub l_min: f64,
    /// Corner frequency of the 1/f noise (Hz).
    pub f_cor: f64,
    /// Sampling bandwidth (Hz).
    pub bandwidth: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            p_phase_shifter: 1.0e-3,
            p_lna: 20.0e-3,
            p_mixer: 30.3e-3,
            p_filter: 2.5e-3,
            p_if_amp: 3.0e-3,
            p_synthesizer: 50.5e-3,
            p_agc: 2.0e-3,
            v_dd: 3.0,
            l_min: 0.5e-6,
            f_cor: 1.0e6,
            bandwidth: 20.0e6,
        }
    }
}

impl PowerModel {
    /// Power of one `bits`-resolution ADC (W):
    /// `3 V_dd² L_min (f_cor + 2B) / 10^(−0.1525 b + 4.838)`.
    pub fn adc_power(&self, bits: u32) -> Result<f64> {
        if bits == 0 {
            return Err(Error::InvalidAdcProfile("ADC needs at least 1 bit".into()));
        }
        let numer = 3.0 * self.v_dd * self.v_dd * self.l_min * (self.f_cor + 2.0 * self.bandwidth);
        Ok(numer / 10f64.powf(-0.1525 * bits as f64 + 4.838))
    }

    /// Full receiver budget for a geometry and ADC profile. The profile's
    /// chain split must match the geometry.
    pub fn budget(&self, geom: &ArrayGeometry, profile: &AdcProfile) -> Result<PowerBudget> {
        if profile.m_high() + profile.m_low() != geom.m_sub() {
            return Err(Error::DimensionMismatch {
                expected: geom.m_sub(),
                got: profile.m_high() + profile.m_low(),
            });
        }
        let per_chain = self.p_lna + self.p_mixer + self.p_filter + self.p_if_amp;
        // I and Q each need an ADC; a 1-bit chain skips the AGC
        let agc_low = if profile.bits_low() == 1 { 0.0 } else { self.p_agc };
        Ok(PowerBudget {
            phase_shifters: geom.m_total() as f64 * self.p_phase_shifter,
            rf_chains: geom.m_sub() as f64 * per_chain + self.p_synthesizer,
            agc: profile.m_high() as f64 * self.p_agc + profile.m_low() as f64 * agc_low,
            adc_high: profile.m_high() as f64 * self.adc_power(profile.bits_high())?,
            adc_low: profile.m_low() as f64 * self.adc_power(profile.bits_low())?,
        })
    }

    /// Total receiver power (W).
    pub fn total_power(&self, geom: &ArrayGeometry, profile: &AdcProfile) -> Result<f64> {
        Ok(self.budget(geom, profile)?.total())
    }
}

/// Breakdown of the receiver power draw (W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub phase_shifters: f64,
    pub rf_chains: f64,
    pub agc: f64,
    pub adc_high: f64,
    pub adc_low: f64,
}

impl PowerBudget {
    pub fn total(&self) -> f64 {
        self.phase_shifters + self.rf_chains + self.agc + self.adc_high + self.adc_low
    }
}

/// Energy efficiency: inverse root of the direction CRLB (deg²) per watt.
pub fn energy_efficiency(crlb_deg2: f64, total_power_w: f64) -> Result<f64> {
    if !(crlb_deg2 > 0.0) || !crlb_deg2.is_finite() {
        return Err(Error::InvalidParameter(format!("crlb {crlb_deg2} must be positive")));
    }
    if !(total_power_w > 0.0) || !total_power_w.is_finite() {
        return Err(Error::InvalidParameter(format!("power {total_power_w} must be positive")));
    }
    Ok(1.0 / (crlb_deg2.sqrt() * total_power_w))
}
