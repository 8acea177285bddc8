//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line. Criterion 5 checks a published zero-cross-term claim
//! that the model does not actually satisfy; it is kept faithful and is
//! expected to fail (see the criterion comment).

use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use hadoa::crlb::{fim_closed_form, fim_numerical_oracle, performance_loss};
use hadoa::energy::{energy_efficiency, PowerModel};
use hadoa::quantizer::{codebook, distortion_factor};
use hadoa::synth::{generate_snapshots, substream_rng, SourceTruth};
use hadoa::{AdcProfile, AnalogBeamformer, ArrayGeometry, StbRootMusic};

fn report(n: u32, pass: bool, detail: &str) {
    println!("criterion {n}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn floored_rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

fn grid_profiles() -> Vec<(usize, usize, f64, u32)> {
    let mut out = Vec::new();
    for &m in &[16usize, 32, 128] {
        for &ma in &[1usize, 2, 4] {
            for &kappa in &[0.0, 0.25, 0.5, 1.0] {
                for bits in 1..=5u32 {
                    let m_sub = m / ma;
                    if (kappa * m_sub as f64).fract() <= 1e-9 {
                        out.push((m, ma, kappa, bits));
                    }
                }
            }
        }
    }
    out
}

#[test]
fn criterion_01_fim_closed_form_matches_oracle() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (m, ma, kappa, bits) in grid_profiles() {
        for &gamma in &[0.1, 1.0, 10.0] {
            for &t0 in &[-60.0, -30.0, 0.0, 15.0, 45.0, 60.0] {
                let geom = ArrayGeometry::with_default_spacing(m, ma).unwrap();
                let profile = AdcProfile::from_kappa(geom.m_sub(), kappa, bits).unwrap();
                let theta = (t0 as f64).to_radians();
                let closed = fim_closed_form(&geom, &profile, gamma, theta).unwrap();
                let ab = AnalogBeamformer::broadside(geom);
                let oracle = fim_numerical_oracle(&ab, &profile, gamma, theta).unwrap();
                worst = worst
                    .max(floored_rel(closed.f_theta_theta, oracle.f_theta_theta))
                    .max(floored_rel(closed.f_gamma_gamma, oracle.f_gamma_gamma));
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        worst < 1e-8 && elapsed < 60.0,
        &format!("max relative discrepancy {worst:.3e}, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_02_ideal_limit_unit_performance_loss() {
    let mut worst = 0.0f64;
    for &m in &[16usize, 32, 128] {
        for bits in 1..=5u32 {
            for &gamma in &[0.1, 1.0, 10.0] {
                for &t0 in &[-60.0, -30.0, 0.0, 15.0, 45.0, 60.0] {
                    let geom = ArrayGeometry::with_default_spacing(m, 1).unwrap();
                    let profile = AdcProfile::from_kappa(m, 1.0, bits).unwrap();
                    let pl =
                        performance_loss(&geom, &profile, gamma, (t0 as f64).to_radians()).unwrap();
                    worst = worst.max((pl - 1.0).abs());
                }
            }
        }
    }
    report(2, worst < 1e-10, &format!("max |eta_pl - 1| = {worst:.3e}"));
}

#[test]
fn criterion_03_beta_zero_matches_all_high_resolution() {
    let mut worst = 0.0f64;
    for &ma in &[1usize, 2, 4] {
        for bits in 1..=5u32 {
            for &gamma in &[0.1, 1.0, 10.0] {
                for &t0 in &[-30.0, 0.0, 15.0, 60.0] {
                    let m = 32;
                    let geom = ArrayGeometry::with_default_spacing(m, ma).unwrap();
                    let theta = (t0 as f64).to_radians();
                    let forced = AdcProfile::from_kappa(geom.m_sub(), 0.0, bits)
                        .unwrap()
                        .with_beta(0.0);
                    let all_high = AdcProfile::from_kappa(geom.m_sub(), 1.0, bits).unwrap();
                    let fa = fim_closed_form(&geom, &forced, gamma, theta).unwrap();
                    let fb = fim_closed_form(&geom, &all_high, gamma, theta).unwrap();
                    worst = worst
                        .max(floored_rel(fa.f_theta_theta, fb.f_theta_theta))
                        .max(floored_rel(fa.f_gamma_gamma, fb.f_gamma_gamma));
                }
            }
        }
    }
    report(3, worst < 1e-10, &format!("max relative difference {worst:.3e}"));
}

#[test]
fn criterion_04_tabulated_distortion_factors() {
    let n = 1_000_000usize;
    let mut rng = substream_rng(404, 0, 0);
    let mut pass = true;
    let mut detail = String::new();
    for bits in 1..=5u32 {
        let cb = codebook(bits).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for _ in 0..n {
            let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            let u2: f64 = rng.gen();
            let x = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            let q = cb.quantize(x);
            num += (x - q) * (x - q);
            den += x * x;
        }
        let measured = num / den;
        let table = distortion_factor(bits).unwrap();
        let rel = (measured - table).abs() / table;
        if rel > 0.02 {
            pass = false;
        }
        if bits == 1 {
            let analytic = 1.0 - 2.0 / std::f64::consts::PI;
            let rel1 = (measured - analytic).abs() / analytic;
            if rel1 > 0.002 {
                pass = false;
            }
            detail = format!("b=1 vs 1-2/pi rel {rel1:.2e}");
        }
    }
    report(4, pass, &detail);
}

#[test]
fn criterion_05_cross_information_vanishes() {
    // The closed-form derivation treats two diagonal matrices as
    // commuting with the position matrix, which only holds when each
    // subarray has a single antenna. The cross term F_{gamma,theta} is
    // proportional to Im(zeta* Gamma) and is measurably nonzero for
    // M_a > 1, so this criterion fails for the faithful oracle. Kept
    // red deliberately rather than weakening the check.
    let mut rng = substream_rng(505, 0, 0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = [16usize, 32, 64, 128][rng.gen_range(0..4)];
        let ma = [1usize, 2, 4][rng.gen_range(0..3)];
        let m_sub = m / ma;
        let m_high = rng.gen_range(0..=m_sub);
        let bits = rng.gen_range(1..=5u32);
        let gamma = 10f64.powf(rng.gen_range(-1.0..1.0));
        let theta = rng.gen_range(-80f64..80.0).to_radians();
        let geom = ArrayGeometry::with_default_spacing(m, ma).unwrap();
        let profile = AdcProfile::new(m_sub, m_high, bits).unwrap();
        let ab = AnalogBeamformer::broadside(geom);
        let f = fim_numerical_oracle(&ab, &profile, gamma, theta).unwrap();
        let norm = (f.f_gamma_gamma.powi(2)
            + 2.0 * f.f_gamma_theta.powi(2)
            + f.f_theta_theta.powi(2))
        .sqrt();
        worst = worst.max(f.f_gamma_theta.abs() / norm);
    }
    report(5, worst < 1e-10, &format!("max normalized |F_gamma_theta| = {worst:.3e}"));
}

#[test]
fn criterion_06_performance_loss_monotone_in_resolution() {
    let mut pass = true;
    let mut worst_tail = 0.0f64;
    for &ma in &[1usize, 4] {
        for &gamma in &[0.1, 1.0, 10.0] {
            let geom = ArrayGeometry::with_default_spacing(128, ma).unwrap();
            let theta = 15f64.to_radians();
            let pl: Vec<f64> = (1..=8u32)
                .map(|b| {
                    let profile = AdcProfile::from_kappa(geom.m_sub(), 0.25, b).unwrap();
                    performance_loss(&geom, &profile, gamma, theta).unwrap()
                })
                .collect();
            if !pl.windows(2).all(|w| w[1] < w[0]) {
                pass = false;
            }
            let tail = (pl[4] - pl[7]) / pl[0];
            worst_tail = worst_tail.max(tail);
            if tail >= 0.05 {
                pass = false;
            }
        }
    }
    report(6, pass, &format!("worst b=5..8 tail fraction {worst_tail:.4}"));
}

#[test]
fn criterion_07_performance_loss_flattens_at_high_snr() {
    let ms: Vec<usize> = (5..=10).map(|p| 1usize << p).collect(); // 32..1024
    let mut pass = true;
    let mut detail = String::new();
    for &bits in &[2u32, 3] {
        let mut drops = Vec::new();
        for &gamma in &[0.1, 10.0] {
            let pl: Vec<f64> = ms
                .iter()
                .map(|&m| {
                    let geom = ArrayGeometry::with_default_spacing(m, 4).unwrap();
                    let profile = AdcProfile::from_kappa(geom.m_sub(), 0.25, bits).unwrap();
                    performance_loss(&geom, &profile, gamma, 15f64.to_radians()).unwrap()
                })
                .collect();
            if !pl.windows(2).all(|w| w[1] < w[0]) {
                pass = false;
            }
            drops.push((pl[0] - pl[pl.len() - 1]) / pl[0]);
        }
        // relative drop across the M range must be smaller at 10 dB
        if drops[1] >= drops[0] {
            pass = false;
        }
        detail = format!("b={bits}: drop {:.4} at gamma=0.1 vs {:.4} at 10", drops[0], drops[1]);
    }
    report(7, pass, &detail);
}

#[test]
fn criterion_08_energy_efficiency_has_interior_peak() {
    let pm = PowerModel::default();
    let geom = ArrayGeometry::with_default_spacing(128, 4).unwrap();
    let theta = 15f64.to_radians();
    let mut pass = true;
    let mut peaks = Vec::new();
    for &m_high in &[0usize, 8, 16] {
        let ee: Vec<f64> = (1..=12u32)
            .map(|b| {
                let profile = AdcProfile::new(geom.m_sub(), m_high, b).unwrap();
                let crlb_deg2 = fim_closed_form(&geom, &profile, 1.0, theta)
                    .unwrap()
                    .crlb_theta_deg2(32)
                    .unwrap();
                energy_efficiency(crlb_deg2, pm.total_power(&geom, &profile).unwrap()).unwrap()
            })
            .collect();
        let argmax = (0..ee.len()).max_by(|&i, &j| ee[i].total_cmp(&ee[j])).unwrap();
        if argmax == 0 || argmax == ee.len() - 1 {
            pass = false;
        }
        peaks.push(ee[argmax]);
    }
    if !(peaks[0] > peaks[1] && peaks[1] > peaks[2]) {
        pass = false;
    }
    report(8, pass, &format!("peak eta_ee by M_0: {peaks:?}"));
}

#[test]
fn criterion_09_noiseless_estimator_recovery() {
    let start = Instant::now();
    let geom = ArrayGeometry::with_default_spacing(16, 2).unwrap();
    let est = StbRootMusic::new(AnalogBeamformer::coverage(geom).unwrap());
    let mut worst = 0.0f64;
    for i in 0..33 {
        let deg = -80.0 + 160.0 * i as f64 / 32.0;
        let theta = deg.to_radians();
        let got = est.noiseless_estimate(theta).unwrap();
        worst = worst.max((got - theta).abs().to_degrees());
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        9,
        worst < 1e-6 && elapsed < 10.0,
        &format!("max error {worst:.3e} deg, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_10_rmse_sits_between_one_and_two_crlb_roots() {
    let start = Instant::now();
    let geom = ArrayGeometry::with_default_spacing(16, 2).unwrap();
    let ab = AnalogBeamformer::coverage(geom).unwrap();
    let est = StbRootMusic::new(ab.clone());
    let profile = AdcProfile::from_kappa(8, 1.0, 3).unwrap();
    let n = 32;
    let trials = 2000u64;
    let mut pass = true;
    let mut detail = String::new();
    for (idx, &snr_db) in [10.0, 20.0].iter().enumerate() {
        let truth = SourceTruth::from_snr_db(23f64.to_radians(), snr_db).unwrap();
        let sq: f64 = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = substream_rng(1010, idx as u64, t);
                let block = generate_snapshots(&ab, &profile, &truth, n, &mut rng).unwrap();
                let got = est.estimate(&block).unwrap();
                (got - truth.theta).to_degrees().powi(2)
            })
            .sum();
        let rmse = (sq / trials as f64).sqrt();
        let crlb_root = fim_numerical_oracle(&ab, &profile, truth.gamma, truth.theta)
            .unwrap()
            .crlb_theta_deg2(n)
            .unwrap()
            .sqrt();
        let ratio = rmse / crlb_root;
        if ratio < 1.0 || (snr_db == 20.0 && ratio > 2.0) {
            pass = false;
        }
        detail.push_str(&format!("{snr_db} dB ratio {ratio:.3}; "));
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 300.0 {
        pass = false;
    }
    report(10, pass, &format!("{detail}{elapsed:.0}s"));
}

#[test]
fn criterion_11_monte_carlo_output_is_deterministic() {
    let bin = env!("CARGO_BIN_EXE_hadoa");
    let run = |threads: &str| -> String {
        let out = Command::new(bin)
            .args([
                "mc", "--m", "16", "--ma", "2", "--kappa", "1", "--bits", "3", "--sweep",
                "snr_db=0:20:10", "--trials", "200", "--seed", "7", "--theta0-deg", "23",
            ])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .expect("running mc");
        assert!(out.status.success(), "mc exited with {:?}", out.status);
        String::from_utf8(out.stdout)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# generated"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let single = run("1");
    let single_again = run("1");
    let eight = run("8");
    report(
        11,
        single == single_again && single == eight,
        "bodies identical across reruns and 1 vs 8 threads",
    );
}
