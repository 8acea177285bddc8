//! Browser bindings for a small interactive explorer: performance-loss
//! and energy-efficiency curves against ADC resolution, and a one-shot
//! estimation run on synthetic snapshots.

use wasm_bindgen::prelude::*;

use hadoa::crlb::{fim_closed_form, performance_loss};
use hadoa::energy::{energy_efficiency, PowerModel};
use hadoa::synth::{generate_snapshots, substream_rng, SourceTruth};
use hadoa::{AdcProfile, AnalogBeamformer, ArrayGeometry, StbRootMusic};

fn setup(m: usize, ma: usize, kappa: f64, bits: u32) -> Result<(ArrayGeometry, AdcProfile), String> {
    let geom = ArrayGeometry::with_default_spacing(m, ma).map_err(|e| e.to_string())?;
    let profile =
        AdcProfile::from_kappa(geom.m_sub(), kappa, bits).map_err(|e| e.to_string())?;
    Ok((geom, profile))
}

/// Performance-loss factor for b = 1..=max_bits.
#[wasm_bindgen]
pub fn ploss_curve(
    m: usize,
    ma: usize,
    kappa: f64,
    snr_db: f64,
    theta0_deg: f64,
    max_bits: u32,
) -> Result<Vec<f64>, String> {
    let gamma = 10f64.powf(snr_db / 10.0);
    let theta = theta0_deg.to_radians();
    (1..=max_bits)
        .map(|bits| {
            let (geom, profile) = setup(m, ma, kappa, bits)?;
            performance_loss(&geom, &profile, gamma, theta).map_err(|e| e.to_string())
        })
        .collect()
}

/// Energy efficiency for b = 1..=max_bits with the default power model.
#[wasm_bindgen]
pub fn ee_curve(
    m: usize,
    ma: usize,
    kappa: f64,
    snr_db: f64,
    theta0_deg: f64,
    snapshots: usize,
    max_bits: u32,
) -> Result<Vec<f64>, String> {
    let gamma = 10f64.powf(snr_db / 10.0);
    let theta = theta0_deg.to_radians();
    let pm = PowerModel::default();
    (1..=max_bits)
        .map(|bits| {
            let (geom, profile) = setup(m, ma, kappa, bits)?;
            let crlb_deg2 = fim_closed_form(&geom, &profile, gamma, theta)
                .and_then(|f| f.crlb_theta_deg2(snapshots))
                .map_err(|e| e.to_string())?;
            let p = pm.total_power(&geom, &profile).map_err(|e| e.to_string())?;
            energy_efficiency(crlb_deg2, p).map_err(|e| e.to_string())
        })
        .collect()
}

/// One synthetic estimation run; returns the estimate in degrees.
#[wasm_bindgen]
pub fn estimate_once(
    m: usize,
    ma: usize,
    kappa: f64,
    bits: u32,
    snr_db: f64,
    theta0_deg: f64,
    snapshots: usize,
    seed: u64,
) -> Result<f64, String> {
    let (geom, profile) = setup(m, ma, kappa, bits)?;
    let ab = AnalogBeamformer::coverage(geom).map_err(|e| e.to_string())?;
    let truth =
        SourceTruth::from_snr_db(theta0_deg.to_radians(), snr_db).map_err(|e| e.to_string())?;
    let mut rng = substream_rng(seed, 0, 0);
    let block = generate_snapshots(&ab, &profile, &truth, snapshots, &mut rng)
        .map_err(|e| e.to_string())?;
    let est = StbRootMusic::new(ab).estimate(&block).map_err(|e| e.to_string())?;
    Ok(est.to_degrees())
}
