//! Snapshot synthesis for a single narrowband source, including the
//! analog front end and the mixed-ADC quantization stage, plus the
//! deterministic substream scheme used for reproducible Monte Carlo runs.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quantizer::mixed_adc_apply;
use crate::{AdcProfile, AnalogBeamformer, ArrayGeometry, Complex, Error, Result};

/// Ground truth for one synthetic source: direction in radians and
/// per-antenna SNR γ (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceTruth {
    pub theta: f64,
    pub gamma: f64,
}

impl SourceTruth {
    pub fn new(theta: f64, gamma: f64) -> Result<Self> {
        ArrayGeometry::check_direction(theta)?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("snr {gamma} must be nonnegative")));
        }
        Ok(Self { theta, gamma })
    }

    pub fn from_snr_db(theta: f64, snr_db: f64) -> Result<Self> {
        Self::new(theta, 10f64.powf(snr_db / 10.0))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Independent RNG for `(master seed, stream, index)`. Streams and
/// indices can be consumed in any order or in parallel; the draw for a
/// given triple never changes.
pub fn substream_rng(master: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    let mut state = splitmix64(master ^ 0x6a09e667f3bcc908);
    state = splitmix64(state ^ stream.wrapping_mul(0xbb67ae8584caa73b));
    state = splitmix64(state ^ index.wrapping_mul(0x3c6ef372fe94f82b));
    for chunk in seed.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

fn complex_normal<R: RngCore>(rng: &mut R, per_component_sd: f64) -> Complex {
    // Box-Muller, one pair per call
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let r = per_component_sd * (-2.0 * u1.ln()).sqrt();
    let phase = 2.0 * std::f64::consts::PI * u2;
    Complex::new(r * phase.cos(), r * phase.sin())
}

/// A block of chain-domain snapshots, one column per time sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBlock {
    data: DMatrix<Complex>,
}

impl SnapshotBlock {
    pub fn new(data: DMatrix<Complex>) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(Error::InvalidParameter("empty snapshot block".into()));
        }
        Ok(Self { data })
    }

    /// Chain count (rows).
    pub fn m_sub(&self) -> usize {
        self.data.nrows()
    }

    /// Snapshot count (columns).
    pub fn n_snapshots(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<Complex> {
        &self.data
    }

    /// Sample covariance `(1/N) Σ y yᴴ`.
    pub fn sample_covariance(&self) -> DMatrix<Complex> {
        let n = self.n_snapshots() as f64;
        (&self.data * self.data.adjoint()) / Complex::new(n, 0.0)
    }
}

/// Draw `n` snapshots of the full receive chain: source symbol
/// `s ~ CN(0, γ)`, unit-variance antenna noise, analog beamforming, then
/// the mixed-ADC stage with ideal per-chain AGC.
pub fn generate_snapshots(
    ab: &AnalogBeamformer,
    profile: &AdcProfile,
    truth: &SourceTruth,
    n: usize,
    rng: &mut impl RngCore,
) -> Result<SnapshotBlock> {
    if n == 0 {
        return Err(Error::InvalidParameter("snapshot count must be positive".into()));
    }
    let geom = ab.geometry();
    if profile.m_high() + profile.m_low() != geom.m_sub() {
        return Err(Error::DimensionMismatch {
            expected: geom.m_sub(),
            got: profile.m_high() + profile.m_low(),
        });
    }
    let a = geom.steering_vector(truth.theta)?;
    let g = ab.chain_gains(truth.theta)?;
    // ideal AGC: each component of chain ms has variance (γ|g_ms|² + 1)/2
    let rms: Vec<f64> = g.iter().map(|gm| ((truth.gamma * gm.norm_sqr() + 1.0) / 2.0).sqrt()).collect();
    let mut out = DMatrix::zeros(geom.m_sub(), n);
    for t in 0..n {
        let s = complex_normal(rng, (truth.gamma / 2.0).sqrt());
        let x = DVector::from_fn(geom.m_total(), |m, _| {
            a[m] * s + complex_normal(rng, (0.5f64).sqrt())
        });
        let ideal = ab.apply(&x)?;
        let quantized = mixed_adc_apply(ideal.as_slice(), profile, &rms)?;
        for (ms, v) in quantized.into_iter().enumerate() {
            out[(ms, t)] = v;
        }
    }
    SnapshotBlock::new(out)
}
