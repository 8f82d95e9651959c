//! Synthetic time-varying MIMO-OFDM channels built from a fixed set of rays.
//!
//! Each ray contributes the rank-1 term
//! `gain * a_rx(aoa) (x) a_tx(aod) (x) d(delay)` rotated in time by its
//! Doppler shift, so every snapshot has multilinear rank at most `n_paths`
//! and the vectorized sequence evolves linearly with eigenvalues
//! `exp(2 pi i f_D T_p)`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::predictors::ChannelSequence;
use crate::synthetic::complex_normal;
use crate::tensor::{ChannelTensor, Dims};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// RMS delay spread of the exponential power-delay profile.
pub const DELAY_SPREAD_S: f64 = 300e-9;
/// Stream used for observation noise; path geometry uses stream 0.
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_sc: usize,
    pub n_paths: usize,
    pub carrier_ghz: f64,
    pub bandwidth_mhz: f64,
    pub subcarrier_khz: f64,
    pub ue_speed_kmh: f64,
    pub period_ms: f64,
    pub n_snapshots: usize,
    /// `None` means noiseless.
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_rx: 2,
            n_tx: 8,
            n_sc: 64,
            n_paths: 20,
            carrier_ghz: 3.5,
            bandwidth_mhz: 100.0,
            subcarrier_khz: 30.0,
            ue_speed_kmh: 5.0,
            period_ms: 5.0,
            n_snapshots: 20,
            snr_db: None,
            seed: 0,
        }
    }
}

/// Config file keys, in the order they are written.
pub const SCENARIO_KEYS: [&str; 12] = [
    "n_rx",
    "n_tx",
    "n_sc",
    "n_paths",
    "carrier_ghz",
    "bandwidth_mhz",
    "subcarrier_khz",
    "ue_speed_kmh",
    "period_ms",
    "n_snapshots",
    "snr_db",
    "seed",
];

impl ScenarioConfig {
    /// Full-size array and pilot dimensions: 4 x 64 antennas, 1632 subcarriers.
    pub fn full_scale() -> Self {
        Self {
            n_rx: 4,
            n_tx: 64,
            n_sc: 1632,
            ..Self::default()
        }
    }

    pub fn dims(&self) -> Dims {
        [self.n_rx, self.n_tx, self.n_sc]
    }

    /// Largest Doppler shift `v f_c / c` in Hz.
    pub fn max_doppler_hz(&self) -> f64 {
        self.ue_speed_kmh / 3.6 * self.carrier_ghz * 1e9 / SPEED_OF_LIGHT
    }

    /// Number of subcarriers that fit in the bandwidth.
    pub fn subcarriers_in_band(&self) -> usize {
        (self.bandwidth_mhz * 1e3 / self.subcarrier_khz).floor() as usize
    }

    /// Baseband frequency offset of every modeled subcarrier, spread evenly
    /// over the band as a comb.
    pub fn subcarrier_offsets_hz(&self) -> Vec<f64> {
        let stride = (self.subcarriers_in_band() / self.n_sc).max(1);
        let spacing = self.subcarrier_khz * 1e3;
        (0..self.n_sc).map(|k| (k * stride) as f64 * spacing).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        for (name, n) in [
            ("n_rx", self.n_rx),
            ("n_tx", self.n_tx),
            ("n_sc", self.n_sc),
            ("n_paths", self.n_paths),
            ("n_snapshots", self.n_snapshots),
        ] {
            if n == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        for (name, v) in [
            ("carrier_ghz", self.carrier_ghz),
            ("bandwidth_mhz", self.bandwidth_mhz),
            ("subcarrier_khz", self.subcarrier_khz),
            ("period_ms", self.period_ms),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.ue_speed_kmh.is_finite() && self.ue_speed_kmh >= 0.0) {
            return bad(format!("ue_speed_kmh must be nonnegative, got {}", self.ue_speed_kmh));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return bad(format!("snr_db must be finite or none, got {snr}"));
            }
        }
        if self.n_sc > self.subcarriers_in_band() {
            return bad(format!(
                "n_sc = {} exceeds the {} subcarriers in the band",
                self.n_sc,
                self.subcarriers_in_band()
            ));
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Format(format!("{key}: cannot parse {value:?}")))
        }
        match key {
            "n_rx" => self.n_rx = num(key, value)?,
            "n_tx" => self.n_tx = num(key, value)?,
            "n_sc" => self.n_sc = num(key, value)?,
            "n_paths" => self.n_paths = num(key, value)?,
            "carrier_ghz" => self.carrier_ghz = num(key, value)?,
            "bandwidth_mhz" => self.bandwidth_mhz = num(key, value)?,
            "subcarrier_khz" => self.subcarrier_khz = num(key, value)?,
            "ue_speed_kmh" => self.ue_speed_kmh = num(key, value)?,
            "period_ms" => self.period_ms = num(key, value)?,
            "n_snapshots" => self.n_snapshots = num(key, value)?,
            "snr_db" => {
                self.snr_db = match value {
                    "none" => None,
                    v => Some(num(key, v)?),
                }
            }
            "seed" => self.seed = num(key, value)?,
            other => return Err(Error::Format(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }
}

/// `key = value` lines in a fixed order; reads back to an equal config.
impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let snr = self.snr_db.map_or_else(|| "none".to_owned(), |v| v.to_string());
        let values = [
            self.n_rx.to_string(),
            self.n_tx.to_string(),
            self.n_sc.to_string(),
            self.n_paths.to_string(),
            self.carrier_ghz.to_string(),
            self.bandwidth_mhz.to_string(),
            self.subcarrier_khz.to_string(),
            self.ue_speed_kmh.to_string(),
            self.period_ms.to_string(),
            self.n_snapshots.to_string(),
            snr,
            self.seed.to_string(),
        ];
        for (k, v) in SCENARIO_KEYS.iter().zip(values) {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Parses `key = value` lines over the defaults. Blank lines and `#` comments
/// are ignored; unknown or repeated keys are errors. The result is validated.
impl FromStr for ScenarioConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected key = value", n + 1)))?;
            let key = key.trim();
            if seen.contains(&key) {
                return Err(Error::Format(format!("line {}: repeated key {key:?}", n + 1)));
            }
            cfg.set(key, value.trim())?;
            seen.push(key);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    pub delay_s: f64,
    /// Angle of departure, radians from broadside.
    pub aod: f64,
    /// Angle of arrival, radians from broadside.
    pub aoa: f64,
    pub doppler_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

impl PathSet {
    /// Draws `cfg.n_paths` rays: exponential delays, exponentially decaying
    /// complex Gaussian gains normalized to unit total power, uniform angles,
    /// and Dopplers `f_max cos(psi)` for a uniform motion angle `psi`.
    pub fn draw<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Self {
        let f_max = cfg.max_doppler_hz();
        let mut paths: Vec<Path> = (0..cfg.n_paths)
            .map(|_| {
                let u: f64 = rng.random();
                let delay_s = -DELAY_SPREAD_S * (1.0 - u).ln();
                let amplitude = (-delay_s / DELAY_SPREAD_S).exp().sqrt();
                let gain = complex_normal(rng) * amplitude;
                let aod = rng.random_range(-PI / 2.0..=PI / 2.0);
                let aoa = rng.random_range(-PI / 2.0..=PI / 2.0);
                let psi: f64 = rng.random_range(0.0..TAU);
                Path {
                    gain,
                    delay_s,
                    aod,
                    aoa,
                    doppler_hz: f_max * psi.cos(),
                }
            })
            .collect();
        let power: f64 = paths.iter().map(|p| p.gain.norm_sqr()).sum();
        if power > 0.0 {
            for p in &mut paths {
                p.gain /= power.sqrt();
            }
        }
        Self { paths }
    }
}

/// Half-wavelength uniform linear array response `exp(i pi n sin(theta))`.
pub fn steering_vector(n: usize, theta: f64) -> Vec<Complex64> {
    let phase = PI * theta.sin();
    (0..n).map(|k| Complex64::from_polar(1.0, phase * k as f64)).collect()
}

/// Renders `paths` over `cfg.n_snapshots` periods without noise.
pub fn render(cfg: &ScenarioConfig, paths: &PathSet) -> Result<ChannelSequence> {
    cfg.validate()?;
    let dims = cfg.dims();
    let freqs = cfg.subcarrier_offsets_hz();
    let period_s = cfg.period_ms * 1e-3;

    // per-path static rank-1 term
    let statics: Vec<ChannelTensor> = paths
        .paths
        .iter()
        .map(|p| {
            let a_rx = steering_vector(cfg.n_rx, p.aoa);
            let a_tx = steering_vector(cfg.n_tx, p.aod);
            let d: Vec<Complex64> = freqs
                .iter()
                .map(|f| Complex64::from_polar(1.0, -TAU * f * p.delay_s))
                .collect();
            ChannelTensor::from_fn(dims, |i, j, k| p.gain * a_rx[i] * a_tx[j] * d[k])
        })
        .collect::<Result<_>>()?;

    let snapshots = (0..cfg.n_snapshots)
        .map(|t| {
            let mut data = vec![Complex64::new(0.0, 0.0); dims.iter().product()];
            for (p, term) in paths.paths.iter().zip(&statics) {
                let rot = Complex64::from_polar(1.0, TAU * p.doppler_hz * t as f64 * period_s);
                for (acc, v) in data.iter_mut().zip(term.as_slice()) {
                    *acc += v * rot;
                }
            }
            ChannelTensor::new(dims, data)
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelSequence::new(snapshots, cfg.period_ms)
}

/// Draws a path set from `cfg.seed` and renders it without noise.
pub fn generate_sequence(cfg: &ScenarioConfig) -> Result<ChannelSequence> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let paths = PathSet::draw(cfg, &mut rng);
    render(cfg, &paths)
}

/// Adds circularly-symmetric complex Gaussian noise with per-snapshot variance
/// `|H_t|_F^2 / (N 10^(snr_db / 10))`. `None` returns the input unchanged.
pub fn add_noise(seq: &ChannelSequence, snr_db: Option<f64>, seed: u64) -> Result<ChannelSequence> {
    let Some(snr) = snr_db else {
        return Ok(seq.clone());
    };
    if !snr.is_finite() {
        return Err(Error::InvalidArgument(format!("snr_db must be finite, got {snr}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NOISE_STREAM);
    let linear = 10f64.powf(snr / 10.0);
    let snapshots = seq
        .snapshots()
        .iter()
        .map(|h| {
            let n = h.len() as f64;
            let sigma = (h.frobenius_norm().powi(2) / (n * linear)).sqrt();
            let data = h.as_slice().iter().map(|v| v + complex_normal(&mut rng) * sigma).collect();
            ChannelTensor::new(h.dims(), data)
        })
        .collect::<Result<Vec<_>>>()?;
    ChannelSequence::new(snapshots, seq.period_ms())
}

/// Clean sequence and the observation at `cfg.snr_db`, both from `cfg.seed`.
pub fn generate_observed(cfg: &ScenarioConfig) -> Result<(ChannelSequence, ChannelSequence)> {
    let clean = generate_sequence(cfg)?;
    let noisy = add_noise(&clean, cfg.snr_db, cfg.seed)?;
    Ok((clean, noisy))
}
