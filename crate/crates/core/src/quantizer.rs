//! Scalar quantization of the low-resolution ADC chains and the AQNM
//! linearization constants built on top of it.
//!
//! The quantizer is per-component (I and Q separately) Lloyd-Max for a
//! Gaussian input: the tabulated distortion factors for b = 1..5 are
//! exactly the Lloyd-Max Gaussian distortions, so no other codebook
//! reproduces them. For b >= 6 a uniform mid-rise quantizer with
//! MSE-optimal Gaussian loading is used.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::{Complex, Error, Result};

/// Tabulated distortion factors β for b = 1..5.
pub const BETA_TABLE: [f64; 5] = [0.3634, 0.1175, 0.03454, 0.009497, 0.002499];

/// Distortion factor β of the optimal scalar quantizer for Gaussian input:
/// table values for b <= 5, `(√3 π / 2) 2^(-2b)` beyond.
pub fn distortion_factor(bits: u32) -> Result<f64> {
    match bits {
        0 => Err(Error::InvalidAdcProfile("quantizer needs at least 1 bit".into())),
        1..=5 => Ok(BETA_TABLE[bits as usize - 1]),
        _ => Ok(3f64.sqrt() * std::f64::consts::PI / 2.0 * 2f64.powi(-2 * bits as i32)),
    }
}

/// Resolution split of the M_s RF chains: the first `m_high` chains use
/// high-resolution ADCs (modeled distortion-free), the remaining `m_low`
/// use `bits_low`-bit ADCs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcProfile {
    bits_low: u32,
    bits_high: u32,
    m_high: usize,
    m_low: usize,
    beta: f64,
    alpha: f64,
}

impl AdcProfile {
    /// Default resolution of the high-resolution ADCs (power model only).
    pub const DEFAULT_BITS_HIGH: u32 = 12;

    pub fn new(m_sub: usize, m_high: usize, bits_low: u32) -> Result<Self> {
        if m_high > m_sub {
            return Err(Error::InvalidAdcProfile(format!(
                "{m_high} high-resolution chains exceed {m_sub} RF chains"
            )));
        }
        let beta = distortion_factor(bits_low)?;
        Ok(Self {
            bits_low,
            bits_high: Self::DEFAULT_BITS_HIGH,
            m_high,
            m_low: m_sub - m_high,
            beta,
            alpha: 1.0 - beta,
        })
    }

    /// Profile from the high-resolution proportion κ = M_0 / M_s.
    /// `kappa * m_sub` must land on an integer chain count.
    pub fn from_kappa(m_sub: usize, kappa: f64, bits_low: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::InvalidAdcProfile(format!("kappa {kappa} outside [0, 1]")));
        }
        let m_high = kappa * m_sub as f64;
        if (m_high - m_high.round()).abs() > 1e-9 {
            return Err(Error::InvalidAdcProfile(format!(
                "kappa {kappa} does not split {m_sub} chains integrally"
            )));
        }
        Self::new(m_sub, m_high.round() as usize, bits_low)
    }

    pub fn bits_low(&self) -> u32 {
        self.bits_low
    }

    pub fn bits_high(&self) -> u32 {
        self.bits_high
    }

    pub fn with_bits_high(mut self, bits: u32) -> Self {
        self.bits_high = bits;
        self
    }

    /// High-resolution chain count M_0.
    pub fn m_high(&self) -> usize {
        self.m_high
    }

    /// Low-resolution chain count M_1.
    pub fn m_low(&self) -> usize {
        self.m_low
    }

    /// Proportion of high-resolution chains κ.
    pub fn kappa(&self) -> f64 {
        self.m_high as f64 / (self.m_high + self.m_low) as f64
    }

    /// Distortion factor β of the low-resolution chains.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// AQNM linear gain α = 1 − β.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Variant with β forced to a given value (α follows). Used to probe
    /// the quantization-free limit.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self.alpha = 1.0 - beta;
        self
    }
}

/// Quantization-noise variance per low-resolution chain,
/// `σ_q² = α β (γ |ζ|² / M_a + 1)`.
pub fn quant_noise_variance(profile: &AdcProfile, gamma: f64, zeta_abs_sq: f64, m_per: usize) -> f64 {
    profile.alpha() * profile.beta() * (gamma * zeta_abs_sq / m_per as f64 + 1.0)
}

/// Symmetric scalar codebook for unit-variance Gaussian input.
///
/// `levels` holds the positive half in ascending order; the negative half
/// mirrors it. `thresholds` are the positive decision boundaries between
/// consecutive positive levels (the zero boundary is implicit).
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub levels: Vec<f64>,
    pub thresholds: Vec<f64>,
}

impl Codebook {
    /// Reconstruction level for a scalar drawn from the unit-variance
    /// Gaussian the codebook was designed for.
    pub fn quantize(&self, x: f64) -> f64 {
        let mag = x.abs();
        let idx = self.thresholds.partition_point(|&t| t < mag);
        let level = self.levels[idx.min(self.levels.len() - 1)];
        if x < 0.0 {
            -level
        } else {
            level
        }
    }
}

/// Lloyd-Max codebooks for b = 1..5 (positive halves), frozen from the
/// converged fixed point of Lloyd's algorithm for unit-variance Gaussian
/// input. `generate_gaussian_lloyd_max` regenerates them.
const LLOYD_MAX_LEVELS: [&[f64]; 5] = [
    &[0.797884560802865],
    &[0.452780034602416, 1.510417608258950],
    &[0.245094178911501, 0.756005281099103, 1.343909278011753, 2.151945703999607],
    &[
        0.128395029774980,
        0.388048299256644,
        0.656759118124471,
        0.942340455224138,
        1.256231195762436,
        1.618046384266514,
        2.069017225336392,
        2.732589570218499,
    ],
    &[
        0.065889659649377,
        0.198051829302975,
        0.331378305142126,
        0.466699522095804,
        0.604933622848598,
        0.747135702222866,
        0.894565114197865,
        1.048783315295562,
        1.211804375325118,
        1.386340333792161,
        1.576228072455343,
        1.787233211341621,
        2.028728394115834,
        2.317739399853751,
        2.691119573844394,
        3.260732490590531,
    ],
];

fn midpoints(levels: &[f64]) -> Vec<f64> {
    levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Run Lloyd's algorithm for a `bits`-bit symmetric quantizer of the
/// unit-variance Gaussian, to fixed-point tolerance `tol`. Returns the
/// converged codebook; the embedded constants must reproduce it.
pub fn generate_gaussian_lloyd_max(bits: u32, tol: f64) -> Codebook {
    let n_half = 1usize << (bits - 1);
    let normal = Normal::new(0.0, 1.0).unwrap();
    // centroid of the standard normal over (lo, hi)
    let centroid = |lo: f64, hi: f64| -> f64 {
        let plo = if lo.is_finite() { normal.pdf(lo) } else { 0.0 };
        let phi = if hi.is_finite() { normal.pdf(hi) } else { 0.0 };
        let mass = normal.cdf(hi) - normal.cdf(lo);
        (plo - phi) / mass
    };
    // start from the equal-probability partition
    let mut levels: Vec<f64> = (0..n_half)
        .map(|i| normal.inverse_cdf(0.5 + (i as f64 + 0.5) / (2.0 * n_half as f64)))
        .collect();
    for _ in 0..100_000 {
        let th = midpoints(&levels);
        let mut next = Vec::with_capacity(n_half);
        for i in 0..n_half {
            let lo = if i == 0 { 0.0 } else { th[i - 1] };
            let hi = if i == n_half - 1 { f64::INFINITY } else { th[i] };
            next.push(centroid(lo, hi));
        }
        let delta = levels
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        levels = next;
        if delta < tol {
            break;
        }
    }
    let thresholds = midpoints(&levels);
    Codebook { levels, thresholds }
}

/// Mean-squared error of a symmetric codebook against the unit-variance
/// Gaussian, by exact per-cell integration.
pub fn codebook_distortion(cb: &Codebook) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let cell = |lo: f64, hi: f64, level: f64| -> f64 {
        let (plo, clo) = if lo.is_finite() {
            (normal.pdf(lo), normal.cdf(lo))
        } else {
            (0.0, 0.0)
        };
        let (phi, chi) = if hi.is_finite() {
            (normal.pdf(hi), normal.cdf(hi))
        } else {
            (0.0, 1.0)
        };
        let lo0 = if lo.is_finite() { lo } else { 0.0 };
        let hi0 = if hi.is_finite() { hi } else { 0.0 };
        (1.0 + level * level) * (chi - clo) + lo0 * plo - hi0 * phi - 2.0 * level * (plo - phi)
    };
    let n = cb.levels.len();
    let mut d = 0.0;
    for i in 0..n {
        let lo = if i == 0 { 0.0 } else { cb.thresholds[i - 1] };
        let hi = if i == n - 1 { f64::INFINITY } else { cb.thresholds[i] };
        d += cell(lo, hi, cb.levels[i]);
    }
    2.0 * d // mirror the negative half
}

/// Uniform mid-rise codebook with the MSE-optimal step for Gaussian input,
/// found by golden-section search on the exact distortion.
fn optimal_uniform_midrise(bits: u32) -> Codebook {
    let n_half = 1usize << (bits - 1);
    let build = |step: f64| -> Codebook {
        let levels = (0..n_half).map(|i| (i as f64 + 0.5) * step).collect();
        let thresholds = (1..n_half).map(|i| i as f64 * step).collect();
        Codebook { levels, thresholds }
    };
    let f = |step: f64| codebook_distortion(&build(step));
    // bracket: the optimal loading keeps the top level within a few sigma
    let (mut a, mut b) = (1e-6, 10.0 / n_half as f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    build(0.5 * (a + b))
}

/// Codebook for a given resolution: embedded Lloyd-Max tables for
/// b = 1..5, optimally loaded uniform mid-rise beyond (cached).
pub fn codebook(bits: u32) -> Result<&'static Codebook> {
    if bits == 0 {
        return Err(Error::InvalidAdcProfile("quantizer needs at least 1 bit".into()));
    }
    static CACHE: OnceLock<Mutex<HashMap<u32, &'static Codebook>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    Ok(*guard.entry(bits).or_insert_with(|| {
        let cb = if bits <= 5 {
            let levels = LLOYD_MAX_LEVELS[bits as usize - 1].to_vec();
            let thresholds = midpoints(&levels);
            Codebook { levels, thresholds }
        } else {
            optimal_uniform_midrise(bits)
        };
        Box::leak(Box::new(cb))
    }))
}

/// Quantize a complex sample stream: real and imaginary parts are scaled
/// by `1 / rms`, quantized independently, and rescaled. `rms` is the known
/// per-component standard deviation (ideal AGC).
pub fn lloyd_max_quantize(samples: &[Complex], bits: u32, rms: f64) -> Result<Vec<Complex>> {
    if !(rms > 0.0) || !rms.is_finite() {
        return Err(Error::InvalidParameter(format!("rms {rms} must be positive")));
    }
    let cb = codebook(bits)?;
    samples
        .iter()
        .map(|s| {
            if !s.re.is_finite() || !s.im.is_finite() {
                return Err(Error::NonFiniteSample);
            }
            Ok(Complex::new(
                cb.quantize(s.re / rms) * rms,
                cb.quantize(s.im / rms) * rms,
            ))
        })
        .collect()
}

/// Apply the mixed-ADC front end to one snapshot of ideal RF-chain
/// outputs: the first M_0 chains pass through, the rest are quantized
/// with their per-chain RMS.
pub fn mixed_adc_apply(
    ideal: &[Complex],
    profile: &AdcProfile,
    per_chain_rms: &[f64],
) -> Result<Vec<Complex>> {
    let m_sub = profile.m_high() + profile.m_low();
    if ideal.len() != m_sub {
        return Err(Error::DimensionMismatch { expected: m_sub, got: ideal.len() });
    }
    if per_chain_rms.len() != m_sub {
        return Err(Error::DimensionMismatch { expected: m_sub, got: per_chain_rms.len() });
    }
    let mut out = Vec::with_capacity(m_sub);
    out.extend_from_slice(&ideal[..profile.m_high()]);
    for (s, &rms) in ideal[profile.m_high()..].iter().zip(&per_chain_rms[profile.m_high()..]) {
        out.extend(lloyd_max_quantize(std::slice::from_ref(s), profile.bits_low(), rms)?);
    }
    Ok(out)
}
