//! NMSE metric and the Monte-Carlo harness behind the horizon, SNR and
//! measurement-period sweeps.
//!
//! Every cell averages per-trial NMSE values in dB, each floored at
//! [`NMSE_FLOOR_DB`]. Predictors see the noisy observation; truth is the
//! noiseless channel.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::channel_sim::{add_noise, generate_sequence, ScenarioConfig};
use crate::error::{Error, Result};
use crate::predictors::{forecast, Method, PredictorConfig};
use crate::tensor::{ChannelTensor, Dims};
use crate::tucker::compression_ratio;

pub const NMSE_FLOOR_DB: f64 = -120.0;
pub const DEFAULT_TRIALS: usize = 100;
pub const CSV_HEADER: &str = "method,tau,snr_db,period_ms,r_rx,r_tx,r_sc,compression,nmse_db,trials,failures";

/// `|H - H^|_F / |H|_F`, an unsquared ratio of norms.
pub fn nmse(truth: &ChannelTensor, pred: &ChannelTensor) -> Result<f64> {
    if truth.dims() != pred.dims() {
        return Err(Error::DimensionMismatch(format!(
            "truth {:?} vs prediction {:?}",
            truth.dims(),
            pred.dims()
        )));
    }
    let denom = truth.frobenius_norm();
    if denom == 0.0 {
        return Err(Error::Degenerate("NMSE against an all-zero truth".into()));
    }
    Ok(truth.sub(pred)?.frobenius_norm() / denom)
}

/// `20 log10(nmse)`, floored at [`NMSE_FLOOR_DB`].
pub fn nmse_db(truth: &ChannelTensor, pred: &ChannelTensor) -> Result<f64> {
    Ok(ratio_to_db(nmse(truth, pred)?))
}

pub fn ratio_to_db(ratio: f64) -> f64 {
    if ratio > 0.0 {
        (20.0 * ratio.log10()).max(NMSE_FLOOR_DB)
    } else {
        NMSE_FLOOR_DB
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: ScenarioConfig,
    pub predictors: Vec<PredictorConfig>,
    pub horizons: Vec<usize>,
    /// `None` entries are noiseless.
    pub snrs_db: Vec<Option<f64>>,
    pub periods_ms: Vec<f64>,
    pub n_trials: usize,
    pub base_seed: u64,
}

impl ExperimentSpec {
    /// All five methods with default settings, one cell per axis taken from
    /// `scenario`, horizon 1.
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self {
            snrs_db: vec![scenario.snr_db],
            periods_ms: vec![scenario.period_ms],
            base_seed: scenario.seed,
            scenario,
            predictors: Method::ALL.iter().map(|&m| PredictorConfig::new(m)).collect(),
            horizons: vec![1],
            n_trials: DEFAULT_TRIALS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |msg: &str| Err(Error::InvalidArgument(msg.to_owned()));
        if self.predictors.is_empty() {
            return usage("no predictors configured");
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return usage("horizons must be nonempty and at least 1");
        }
        if self.snrs_db.is_empty() || self.periods_ms.is_empty() {
            return usage("SNR and period axes must be nonempty");
        }
        if self.n_trials == 0 {
            return usage("n_trials must be at least 1");
        }
        if self.periods_ms.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return usage("periods must be positive");
        }
        if self.snrs_db.iter().flatten().any(|s| !s.is_finite()) {
            return usage("SNR values must be finite");
        }
        for p in &self.predictors {
            p.validate()?;
        }
        self.scenario.validate()
    }

    fn max_history(&self) -> usize {
        self.predictors.iter().map(|p| p.history).max().unwrap_or(0)
    }

    fn max_horizon(&self) -> usize {
        self.horizons.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmseRow {
    pub method: Method,
    pub tau: usize,
    pub snr_db: Option<f64>,
    pub period_ms: f64,
    /// Mean multilinear ranks over completed trials.
    pub ranks: [f64; 3],
    /// Mean compression ratio over completed trials.
    pub compression: f64,
    /// `None` when every trial failed.
    pub nmse_db: Option<f64>,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NmseReport {
    pub rows: Vec<NmseRow>,
}

impl NmseReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let snr = r.snr_db.map_or_else(|| "none".to_owned(), |v| format!("{v}"));
            let nmse = r.nmse_db.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.6}"));
            let _ = writeln!(
                out,
                "{},{},{},{},{:.2},{:.2},{:.2},{:.4},{},{},{}",
                r.method.name(),
                r.tau,
                snr,
                r.period_ms,
                r.ranks[0],
                r.ranks[1],
                r.ranks[2],
                r.compression,
                nmse,
                r.trials,
                r.failures
            );
        }
        out
    }

    /// Row for one cell, if present.
    pub fn find(&self, method: Method, tau: usize, snr_db: Option<f64>, period_ms: f64) -> Option<&NmseRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.tau == tau && r.snr_db == snr_db && r.period_ms == period_ms)
    }
}

/// Outcome of one predictor on one trial: per-horizon dB values plus ranks.
type TrialResult = Option<(Vec<f64>, Dims)>;

fn run_trial(spec: &ExperimentSpec, snr_db: Option<f64>, period_ms: f64, trial: usize) -> Result<Vec<TrialResult>> {
    let seed = spec.base_seed.wrapping_add(trial as u64);
    let history = spec.max_history();
    let scenario = ScenarioConfig {
        period_ms,
        seed,
        snr_db,
        n_snapshots: history + spec.max_horizon(),
        ..spec.scenario.clone()
    };
    let clean = generate_sequence(&scenario)?;
    let observed = add_noise(&clean, snr_db, seed)?.prefix(history)?;
    let dims = clean.dims();

    Ok(spec
        .predictors
        .iter()
        .map(|cfg| {
            let fc = forecast(&observed, cfg, &spec.horizons).ok()?;
            let values = spec
                .horizons
                .iter()
                .zip(&fc.predictions)
                .map(|(&tau, pred)| nmse_db(&clean.snapshots()[history - 1 + tau], pred))
                .collect::<Result<Vec<f64>>>()
                .ok()?;
            Some((values, fc.ranks(dims)))
        })
        .collect())
}

/// Runs every (predictor, horizon, SNR, period) cell over `n_trials` trials.
///
/// Trial `i` uses seed `base_seed + i` for both geometry and noise. Trials run
/// in parallel; the reduction is in trial order, so reports are
/// bit-reproducible.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<NmseReport> {
    spec.validate()?;
    let full = spec.scenario.dims();
    let mut rows = Vec::new();
    for &period_ms in &spec.periods_ms {
        for &snr_db in &spec.snrs_db {
            let trials = (0..spec.n_trials)
                .into_par_iter()
                .map(|i| run_trial(spec, snr_db, period_ms, i))
                .collect::<Result<Vec<_>>>()?;
            for (p, cfg) in spec.predictors.iter().enumerate() {
                let done: Vec<&(Vec<f64>, Dims)> = trials.iter().filter_map(|t| t[p].as_ref()).collect();
                let n = done.len();
                let mut ranks = [0.0; 3];
                let mut compression = 0.0;
                for (_, r) in &done {
                    for m in 0..3 {
                        ranks[m] += r[m] as f64 / n as f64;
                    }
                    compression += compression_ratio(full, *r) / n as f64;
                }
                for (h, &tau) in spec.horizons.iter().enumerate() {
                    let nmse_db = (n > 0).then(|| done.iter().map(|(v, _)| v[h]).sum::<f64>() / n as f64);
                    rows.push(NmseRow {
                        method: cfg.method,
                        tau,
                        snr_db,
                        period_ms,
                        ranks,
                        compression,
                        nmse_db,
                        trials: n,
                        failures: spec.n_trials - n,
                    });
                }
            }
        }
    }
    Ok(NmseReport { rows })
}

/// Pinned axes for the three sweep experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Horizons 1..=10 at `T_p` = 5 ms and 30 dB SNR.
    Horizon,
    /// SNR -5..=30 dB in 5 dB steps at horizon 5 and `T_p` = 5 ms.
    Snr,
    /// `T_p` 5..=20 ms in 5 ms steps at horizon 5, noiseless.
    Period,
}

impl Figure {
    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Figure::Horizon),
            2 => Ok(Figure::Snr),
            3 => Ok(Figure::Period),
            _ => Err(Error::InvalidArgument(format!("figure must be 1, 2 or 3, got {n}"))),
        }
    }

    /// Overwrites every axis of `spec` with this sweep's grid.
    pub fn preset(self, mut spec: ExperimentSpec) -> ExperimentSpec {
        match self {
            Figure::Horizon => {
                spec.horizons = (1..=10).collect();
                spec.snrs_db = vec![Some(30.0)];
                spec.periods_ms = vec![5.0];
            }
            Figure::Snr => {
                spec.horizons = vec![5];
                spec.snrs_db = (-1..=6).map(|k| Some(5.0 * k as f64)).collect();
                spec.periods_ms = vec![5.0];
            }
            Figure::Period => {
                spec.horizons = vec![5];
                spec.snrs_db = vec![None];
                spec.periods_ms = vec![5.0, 10.0, 15.0, 20.0];
            }
        }
        spec
    }
}

/// Sweeps `spec.horizons` with `T_p` = 5 ms and 30 dB SNR pinned.
pub fn sweep_horizon(spec: &ExperimentSpec) -> Result<NmseReport> {
    run_experiment(&ExperimentSpec {
        snrs_db: vec![Some(30.0)],
        periods_ms: vec![5.0],
        ..spec.clone()
    })
}

/// Sweeps `spec.snrs_db` with horizon 5 and `T_p` = 5 ms pinned.
pub fn sweep_snr(spec: &ExperimentSpec) -> Result<NmseReport> {
    run_experiment(&ExperimentSpec {
        horizons: vec![5],
        periods_ms: vec![5.0],
        ..spec.clone()
    })
}

/// Sweeps `spec.periods_ms` with horizon 5 pinned, noiseless.
pub fn sweep_period(spec: &ExperimentSpec) -> Result<NmseReport> {
    run_experiment(&ExperimentSpec {
        horizons: vec![5],
        snrs_db: vec![None],
        ..spec.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::predict;
    use crate::synthetic::random_tensor;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_scenario() -> ScenarioConfig {
        ScenarioConfig {
            n_rx: 2,
            n_tx: 4,
            n_sc: 8,
            n_paths: 3,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn nmse_trivial_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_tensor([2, 3, 4], &mut rng);
        let zero = ChannelTensor::zeros([2, 3, 4]).unwrap();
        assert_eq!(nmse(&h, &h).unwrap(), 0.0);
        assert!((nmse(&h, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!((nmse(&h, &h.scale(Complex64::new(2.0, 0.0))).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(nmse_db(&h, &h).unwrap(), NMSE_FLOOR_DB);
        assert!(nmse_db(&h, &zero).unwrap().abs() < 1e-12);
        assert!(matches!(nmse(&zero, &h), Err(Error::Degenerate(_))));
        assert!(nmse(&h, &ChannelTensor::zeros([2, 3, 5]).unwrap()).is_err());
    }

    #[test]
    fn nmse_is_unsquared() {
        let h = ChannelTensor::new([1, 1, 2], vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]).unwrap();
        let p = ChannelTensor::new([1, 1, 2], vec![Complex64::new(3.0, 0.0), Complex64::new(0.0, 3.0)]).unwrap();
        // |H - P| = 1, |H| = 5
        assert!((nmse(&h, &p).unwrap() - 0.2).abs() < 1e-15);
        assert!((nmse_db(&h, &p).unwrap() - 20.0 * 0.2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn nmse_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_tensor([2, 2, 3], &mut rng);
        let p = random_tensor([2, 2, 3], &mut rng);
        let c = Complex64::new(-0.3, 2.2);
        let a = nmse(&h, &p).unwrap();
        let b = nmse(&h.scale(c), &p.scale(c)).unwrap();
        assert!((a - b).abs() < 1e-14 * a);
    }

    #[test]
    fn zoh_on_static_scenario_hits_floor() {
        let spec = ExperimentSpec {
            horizons: (1..=4).collect(),
            n_trials: 5,
            predictors: vec![PredictorConfig::new(Method::Zoh)],
            ..ExperimentSpec::new(ScenarioConfig {
                ue_speed_kmh: 0.0,
                ..small_scenario()
            })
        };
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.rows.len(), 4);
        for row in &report.rows {
            assert_eq!(row.nmse_db, Some(NMSE_FLOOR_DB));
            assert_eq!(row.trials + row.failures, 5);
        }
    }

    #[test]
    fn single_trial_matches_direct_call() {
        let scenario = ScenarioConfig {
            snr_db: Some(20.0),
            seed: 17,
            ..small_scenario()
        };
        let cfg = PredictorConfig::new(Method::TuckerDmd);
        let spec = ExperimentSpec {
            horizons: vec![3],
            n_trials: 1,
            predictors: vec![cfg.clone()],
            ..ExperimentSpec::new(scenario.clone())
        };
        let report = run_experiment(&spec).unwrap();

        let full = ScenarioConfig {
            n_snapshots: 13,
            ..scenario
        };
        let clean = generate_sequence(&full).unwrap();
        let noisy = add_noise(&clean, Some(20.0), 17).unwrap().prefix(10).unwrap();
        let direct = nmse_db(&clean.snapshots()[12], &predict(&noisy, &cfg, 3).unwrap()).unwrap();
        assert_eq!(report.rows[0].nmse_db, Some(direct));
    }

    #[test]
    fn full_and_tucker_dmd_agree_on_two_paths() {
        let spec = ExperimentSpec {
            horizons: vec![1, 5],
            n_trials: 4,
            predictors: vec![
                PredictorConfig::new(Method::FullDmd),
                // keep every path so the Tucker representation is exact
                PredictorConfig::new(Method::TuckerDmd).with_threshold(1e-10),
            ],
            ..ExperimentSpec::new(ScenarioConfig {
                n_paths: 2,
                ..small_scenario()
            })
        };
        let report = run_experiment(&spec).unwrap();
        for tau in [1, 5] {
            let a = report.find(Method::FullDmd, tau, None, 5.0).unwrap().nmse_db.unwrap();
            let b = report.find(Method::TuckerDmd, tau, None, 5.0).unwrap().nmse_db.unwrap();
            assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn report_is_reproducible_and_csv_shaped() {
        let spec = Figure::Horizon.preset(ExperimentSpec {
            n_trials: 3,
            ..ExperimentSpec::new(small_scenario())
        });
        let a = run_experiment(&spec).unwrap().to_csv();
        let b = run_experiment(&spec).unwrap().to_csv();
        assert_eq!(a, b);
        let lines: Vec<&str> = a.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 5 * 10);
        assert!(lines.iter().all(|l| l.split(',').count() == 11));
        assert!(!a.contains('\r'));
    }

    #[test]
    fn sweeps_pin_their_axes() {
        let spec = ExperimentSpec {
            n_trials: 2,
            horizons: vec![2],
            snrs_db: vec![Some(0.0), Some(10.0)],
            periods_ms: vec![10.0],
            predictors: vec![PredictorConfig::new(Method::Zoh)],
            ..ExperimentSpec::new(small_scenario())
        };
        let h = sweep_horizon(&spec).unwrap();
        assert!(h.rows.iter().all(|r| r.snr_db == Some(30.0) && r.period_ms == 5.0 && r.tau == 2));
        let s = sweep_snr(&spec).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert!(s.rows.iter().all(|r| r.tau == 5 && r.period_ms == 5.0));
        let p = sweep_period(&spec).unwrap();
        assert!(p.rows.iter().all(|r| r.snr_db.is_none() && r.tau == 5 && r.period_ms == 10.0));

        // a single horizon reduces to run_experiment
        let pinned = ExperimentSpec {
            snrs_db: vec![Some(30.0)],
            periods_ms: vec![5.0],
            ..spec.clone()
        };
        assert_eq!(h, run_experiment(&pinned).unwrap());
    }

    #[test]
    fn presets_match_sweep_grids() {
        let base = ExperimentSpec::new(small_scenario());
        let f2 = Figure::Snr.preset(base.clone());
        assert_eq!(f2.snrs_db.first(), Some(&Some(-5.0)));
        assert_eq!(f2.snrs_db.last(), Some(&Some(30.0)));
        assert_eq!(f2.horizons, vec![5]);
        let f3 = Figure::Period.preset(base);
        assert_eq!(f3.snrs_db, vec![None]);
        assert_eq!(f3.periods_ms, vec![5.0, 10.0, 15.0, 20.0]);
        assert!(Figure::from_number(4).is_err());
    }

    #[test]
    fn invalid_specs_are_usage_errors() {
        let base = ExperimentSpec::new(small_scenario());
        for bad in [
            ExperimentSpec { predictors: vec![], ..base.clone() },
            ExperimentSpec { horizons: vec![], ..base.clone() },
            ExperimentSpec { horizons: vec![0], ..base.clone() },
            ExperimentSpec { n_trials: 0, ..base.clone() },
        ] {
            assert!(matches!(run_experiment(&bad), Err(Error::InvalidArgument(_))));
        }
    }
}
