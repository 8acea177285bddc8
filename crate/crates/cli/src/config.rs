//! Flag parsing, the flat key-value config file, and resolution into a
//! validated experiment configuration. Precedence: built-in defaults,
//! then the config file, then explicit flags.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;

#[derive(Args, Debug, Clone)]
pub struct Cli {
    /// Total antenna count M
    #[arg(long)]
    pub m: Option<usize>,
    /// Antennas per subarray M_a
    #[arg(long)]
    pub ma: Option<usize>,
    /// Proportion of high-resolution RF chains, in [0, 1]
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Resolution of the low-resolution ADCs in bits
    #[arg(long)]
    pub bits: Option<u32>,
    /// Resolution of the high-resolution ADCs in bits
    #[arg(long)]
    pub bits_high: Option<u32>,
    /// Per-antenna SNR in dB
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Source direction in degrees
    #[arg(long)]
    pub theta0_deg: Option<f64>,
    /// Snapshots per trial N
    #[arg(long)]
    pub snapshots: Option<usize>,
    /// Monte Carlo trials per axis point
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master RNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sweep axis, e.g. snr_db=-10:20:5 or bits=1:8:1
    #[arg(long, value_name = "AXIS=START:STOP:STEP")]
    pub sweep: Option<String>,
    /// Flat key-value config file; flags override it
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Resolve the estimator's grating ambiguity toward the farthest
    /// candidate from the strongest beam instead of the nearest
    #[arg(long = "literal-eq27")]
    pub literal_eq27: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    SnrDb,
    Bits,
    MTotal,
    Kappa,
    Theta0,
}

impl Axis {
    pub fn key(&self) -> &'static str {
        match self {
            Axis::SnrDb => "snr_db",
            Axis::Bits => "bits",
            Axis::MTotal => "m",
            Axis::Kappa => "kappa",
            Axis::Theta0 => "theta0_deg",
        }
    }
}

impl FromStr for Axis {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "snr_db" => Axis::SnrDb,
            "bits" => Axis::Bits,
            "m" | "m_total" => Axis::MTotal,
            "kappa" => Axis::Kappa,
            "theta0" | "theta0_deg" => Axis::Theta0,
            other => bail!("unknown sweep axis '{other}'"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        let (axis, range) =
            s.split_once('=').ok_or_else(|| anyhow!("sweep must look like axis=start:stop:step"))?;
        let axis: Axis = axis.trim().parse()?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            bail!("sweep range must be start:stop:step");
        }
        let start: f64 = parts[0].trim().parse().context("bad sweep start")?;
        let stop: f64 = parts[1].trim().parse().context("bad sweep stop")?;
        let step: f64 = parts[2].trim().parse().context("bad sweep step")?;
        if !(step > 0.0) || stop < start {
            bail!("sweep needs stop >= start and step > 0");
        }
        let mut values = Vec::new();
        let mut k = 0usize;
        loop {
            let v = start + k as f64 * step;
            if v > stop + 1e-9 * step.abs() {
                break;
            }
            values.push(v);
            k += 1;
        }
        if values.is_empty() {
            bail!("sweep produced no axis values");
        }
        Ok(Sweep { axis, values })
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub m: usize,
    pub ma: usize,
    pub kappa: f64,
    pub bits: u32,
    pub bits_high: u32,
    pub snr_db: f64,
    pub theta0_deg: f64,
    pub snapshots: usize,
    pub trials: usize,
    pub seed: u64,
    pub sweep: Option<Sweep>,
    pub out: Option<PathBuf>,
    pub literal_eq27: bool,
}

impl ResolvedConfig {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(path) => parse_config_file(
                &std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?,
            )?,
            None => HashMap::new(),
        };
        let get = |key: &str| file.get(key).map(String::as_str);
        let parse_opt = |key: &str| -> Result<Option<f64>> {
            get(key)
                .map(|v| v.parse::<f64>().with_context(|| format!("config key {key}={v}")))
                .transpose()
        };
        let cfg = ResolvedConfig {
            m: cli.m.or(parse_opt("m")?.map(|v| v as usize)).unwrap_or(128),
            ma: cli.ma.or(parse_opt("ma")?.map(|v| v as usize)).unwrap_or(4),
            kappa: cli.kappa.or(parse_opt("kappa")?).unwrap_or(0.25),
            bits: cli.bits.or(parse_opt("bits")?.map(|v| v as u32)).unwrap_or(3),
            bits_high: cli.bits_high.or(parse_opt("bits_high")?.map(|v| v as u32)).unwrap_or(12),
            snr_db: cli.snr_db.or(parse_opt("snr_db")?).unwrap_or(0.0),
            theta0_deg: cli.theta0_deg.or(parse_opt("theta0_deg")?).unwrap_or(15.0),
            snapshots: cli.snapshots.or(parse_opt("snapshots")?.map(|v| v as usize)).unwrap_or(32),
            trials: cli.trials.or(parse_opt("trials")?.map(|v| v as usize)).unwrap_or(2000),
            seed: cli.seed.or(parse_opt("seed")?.map(|v| v as u64)).unwrap_or(1),
            sweep: match (&cli.sweep, get("sweep")) {
                (Some(s), _) => Some(s.parse()?),
                (None, Some(s)) => Some(s.parse()?),
                (None, None) => None,
            },
            out: cli.out.clone().or_else(|| get("out").map(PathBuf::from)),
            literal_eq27: cli.literal_eq27
                || get("literal_eq27").map(|v| v == "true" || v == "1").unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.ma == 0 || self.m % self.ma != 0 {
            bail!("m={} must be a positive multiple of ma={}", self.m, self.ma);
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            bail!("kappa={} outside [0, 1]", self.kappa);
        }
        if self.bits == 0 || self.bits_high == 0 {
            bail!("ADC resolutions must be at least 1 bit");
        }
        if self.snapshots == 0 || self.trials == 0 {
            bail!("snapshots and trials must be positive");
        }
        if !(-90.0..=90.0).contains(&self.theta0_deg) {
            bail!("theta0_deg={} outside [-90, 90]", self.theta0_deg);
        }
        Ok(())
    }

    /// Scalar configuration at one sweep point; with no sweep, yields the
    /// base configuration once.
    pub fn axis_points(&self) -> Vec<(f64, ResolvedConfig)> {
        match &self.sweep {
            None => {
                let axis_val = f64::NAN;
                vec![(axis_val, self.clone())]
            }
            Some(sweep) => sweep
                .values
                .iter()
                .map(|&v| {
                    let mut c = self.clone();
                    match sweep.axis {
                        Axis::SnrDb => c.snr_db = v,
                        Axis::Bits => c.bits = v.round() as u32,
                        Axis::MTotal => c.m = v.round() as usize,
                        Axis::Kappa => c.kappa = v,
                        Axis::Theta0 => c.theta0_deg = v,
                    }
                    (v, c)
                })
                .collect(),
        }
    }

    pub fn gamma(&self) -> f64 {
        10f64.powf(self.snr_db / 10.0)
    }

    pub fn theta0_rad(&self) -> f64 {
        self.theta0_deg.to_radians()
    }
}

impl fmt::Display for ResolvedConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "m={} ma={} kappa={} bits={} bits_high={} snr_db={} theta0_deg={} \
             snapshots={} trials={} seed={} sweep={} literal_eq27={}",
            self.m,
            self.ma,
            self.kappa,
            self.bits,
            self.bits_high,
            self.snr_db,
            self.theta0_deg,
            self.snapshots,
            self.trials,
            self.seed,
            self.sweep
                .as_ref()
                .map(|s| {
                    format!(
                        "{}={}..{} ({} points)",
                        s.axis.key(),
                        s.values.first().unwrap(),
                        s.values.last().unwrap(),
                        s.values.len()
                    )
                })
                .unwrap_or_else(|| "none".into()),
            self.literal_eq27,
        )
    }
}

fn parse_config_file(text: &str) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {} is not key=value: '{raw}'", lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
