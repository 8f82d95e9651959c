//! Channel predictors over a sequence of CSI snapshots.
//!
//! Every predictor looks only at the last `history` snapshots of a
//! [`ChannelSequence`]. Tucker-based methods compute their factors once, from
//! the first snapshot of that window, and keep them fixed.

mod ar;
mod equivalence;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

pub use ar::{fit_ar, forecast_ar, zoh_coefficients, AR_RCOND};
pub use equivalence::{verify_operator_equivalence, EquivalenceReport};

use crate::dmd::{self, DmdModel, DmdRank};
use crate::error::{Error, Result};
use crate::tensor::{ChannelTensor, ComplexVector, Dims};
use crate::tucker::{hosvd, TuckerModel};

/// Time-ordered CSI snapshots sharing one shape, sampled every `period_ms`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSequence {
    snapshots: Vec<ChannelTensor>,
    period_ms: f64,
}

impl ChannelSequence {
    pub fn new(snapshots: Vec<ChannelTensor>, period_ms: f64) -> Result<Self> {
        let first = snapshots
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty channel sequence".into()))?;
        let dims = first.dims();
        if let Some(bad) = snapshots.iter().find(|s| s.dims() != dims) {
            return Err(Error::DimensionMismatch(format!(
                "snapshot dims {:?} differ from {:?}",
                bad.dims(),
                dims
            )));
        }
        if !(period_ms > 0.0 && period_ms.is_finite()) {
            return Err(Error::InvalidArgument(format!("measurement period {period_ms} ms")));
        }
        Ok(Self { snapshots, period_ms })
    }

    pub fn snapshots(&self) -> &[ChannelTensor] {
        &self.snapshots
    }

    pub fn into_snapshots(self) -> Vec<ChannelTensor> {
        self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn dims(&self) -> Dims {
        self.snapshots[0].dims()
    }

    pub fn period_ms(&self) -> f64 {
        self.period_ms
    }

    pub fn last(&self) -> &ChannelTensor {
        self.snapshots.last().expect("non-empty by construction")
    }

    /// The `history` most recent snapshots.
    pub fn window(&self, history: usize) -> Result<&[ChannelTensor]> {
        if history == 0 || history > self.len() {
            return Err(Error::InvalidArgument(format!(
                "history {history} outside 1..={}",
                self.len()
            )));
        }
        Ok(&self.snapshots[self.len() - history..])
    }

    /// First `count` snapshots as a new sequence.
    pub fn prefix(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.len() {
            return Err(Error::InvalidArgument(format!("prefix {count} of {}", self.len())));
        }
        Self::new(self.snapshots[..count].to_vec(), self.period_ms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Zoh,
    Ar,
    TuckerAr,
    FullDmd,
    TuckerDmd,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Zoh, Method::Ar, Method::TuckerAr, Method::FullDmd, Method::TuckerDmd];

    pub fn name(self) -> &'static str {
        match self {
            Method::Zoh => "zoh",
            Method::Ar => "ar",
            Method::TuckerAr => "t_ar",
            Method::FullDmd => "full_dmd",
            Method::TuckerDmd => "t_dmd",
        }
    }

    pub fn uses_tucker(self) -> bool {
        matches!(self, Method::TuckerAr | Method::TuckerDmd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "zoh" => Ok(Method::Zoh),
            "ar" => Ok(Method::Ar),
            "t_ar" | "tar" | "tucker_ar" => Ok(Method::TuckerAr),
            "full_dmd" | "dmd" => Ok(Method::FullDmd),
            "t_dmd" | "tdmd" | "tucker_dmd" => Ok(Method::TuckerDmd),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

pub const DEFAULT_HISTORY: usize = 10;
pub const DEFAULT_AR_ORDER: usize = 3;
pub const DEFAULT_TUCKER_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorConfig {
    pub method: Method,
    pub history: usize,
    pub ar_order: usize,
    pub tucker_threshold: f64,
    pub dmd_rank: DmdRank,
}

impl PredictorConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            history: DEFAULT_HISTORY,
            ar_order: DEFAULT_AR_ORDER,
            tucker_threshold: DEFAULT_TUCKER_THRESHOLD,
            dmd_rank: DmdRank::default(),
        }
    }

    pub fn with_history(mut self, history: usize) -> Self {
        self.history = history;
        self
    }

    pub fn with_ar_order(mut self, order: usize) -> Self {
        self.ar_order = order;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.tucker_threshold = threshold;
        self
    }

    pub fn with_dmd_rank(mut self, rank: DmdRank) -> Self {
        self.dmd_rank = rank;
        self
    }

    /// Checks the knobs that matter for this method.
    pub fn validate(&self) -> Result<()> {
        if self.history == 0 {
            return Err(Error::InvalidArgument("history must be at least 1".into()));
        }
        match self.method {
            Method::Zoh => {}
            Method::Ar | Method::TuckerAr => {
                if self.ar_order == 0 || self.ar_order >= self.history {
                    return Err(Error::InvalidArgument(format!(
                        "AR order {} must be in 1..{}",
                        self.ar_order, self.history
                    )));
                }
            }
            Method::FullDmd | Method::TuckerDmd => {
                if self.history < 3 {
                    return Err(Error::InvalidArgument(format!(
                        "DMD needs history >= 3, got {}",
                        self.history
                    )));
                }
            }
        }
        if self.method.uses_tucker() && !(self.tucker_threshold > 0.0 && self.tucker_threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "Tucker threshold {} outside (0, 1]",
                self.tucker_threshold
            )));
        }
        Ok(())
    }
}

/// Predictions for a list of horizons plus whatever was learned on the way.
#[derive(Debug, Clone)]
pub struct Forecast {
    pub horizons: Vec<usize>,
    pub predictions: Vec<ChannelTensor>,
    pub tucker: Option<TuckerModel>,
    pub dmd: Option<DmdModel>,
}

impl Forecast {
    /// Multilinear ranks actually used (full dims for non-Tucker methods).
    pub fn ranks(&self, full: Dims) -> Dims {
        self.tucker.as_ref().map_or(full, TuckerModel::ranks)
    }

    pub fn at(&self, tau: usize) -> Option<&ChannelTensor> {
        self.horizons.iter().position(|&h| h == tau).map(|i| &self.predictions[i])
    }
}

/// Predicts `seq` at every horizon in `horizons` (each at least 1), fitting
/// the model once.
pub fn forecast(seq: &ChannelSequence, cfg: &PredictorConfig, horizons: &[usize]) -> Result<Forecast> {
    cfg.validate()?;
    if horizons.is_empty() {
        return Err(Error::InvalidArgument("no horizons requested".into()));
    }
    if let Some(&bad) = horizons.iter().find(|&&h| h == 0) {
        return Err(Error::InvalidArgument(format!("horizon {bad} must be at least 1")));
    }
    match cfg.method {
        Method::Zoh => Ok(Forecast {
            horizons: horizons.to_vec(),
            predictions: horizons.iter().map(|_| seq.last().clone()).collect(),
            tucker: None,
            dmd: None,
        }),
        Method::Ar => {
            let window = seq.window(cfg.history)?;
            let predictions = ar_entrywise(window, cfg.ar_order, horizons)?;
            Ok(Forecast {
                horizons: horizons.to_vec(),
                predictions,
                tucker: None,
                dmd: None,
            })
        }
        Method::TuckerAr => {
            let window = seq.window(cfg.history)?;
            let (model, _) = hosvd(&window[0], cfg.tucker_threshold)?;
            tucker_ar_with_model(window, cfg.ar_order, horizons, model)
        }
        Method::FullDmd => {
            let window = seq.window(cfg.history)?;
            let vectors: Vec<ComplexVector> = window.iter().map(ChannelTensor::vec).collect();
            let model = dmd::fit(&dmd::build_snapshots(&vectors)?, cfg.dmd_rank)?;
            let predictions = dmd_horizons(&model, window.len(), horizons, seq.dims())?;
            Ok(Forecast {
                horizons: horizons.to_vec(),
                predictions,
                tucker: None,
                dmd: Some(model),
            })
        }
        Method::TuckerDmd => {
            let window = seq.window(cfg.history)?;
            let (model, _) = hosvd(&window[0], cfg.tucker_threshold)?;
            tucker_dmd_with_model(window, cfg.dmd_rank, horizons, model)
        }
    }
}

/// Single-horizon convenience over [`forecast`].
pub fn predict(seq: &ChannelSequence, cfg: &PredictorConfig, tau: usize) -> Result<ChannelTensor> {
    let mut f = forecast(seq, cfg, &[tau])?;
    Ok(f.predictions.pop().expect("one horizon"))
}

/// Zero-order hold: the last observed snapshot.
pub fn predict_zoh(seq: &ChannelSequence, tau: usize) -> Result<ChannelTensor> {
    predict(seq, &PredictorConfig::new(Method::Zoh), tau)
}

pub fn predict_ar(seq: &ChannelSequence, cfg: &PredictorConfig, tau: usize) -> Result<ChannelTensor> {
    predict(seq, &PredictorConfig { method: Method::Ar, ..cfg.clone() }, tau)
}

pub fn predict_t_ar(seq: &ChannelSequence, cfg: &PredictorConfig, tau: usize) -> Result<ChannelTensor> {
    predict(seq, &PredictorConfig { method: Method::TuckerAr, ..cfg.clone() }, tau)
}

pub fn predict_full_dmd(seq: &ChannelSequence, cfg: &PredictorConfig, tau: usize) -> Result<ChannelTensor> {
    predict(seq, &PredictorConfig { method: Method::FullDmd, ..cfg.clone() }, tau)
}

pub fn predict_t_dmd(seq: &ChannelSequence, cfg: &PredictorConfig, tau: usize) -> Result<ChannelTensor> {
    predict(seq, &PredictorConfig { method: Method::TuckerDmd, ..cfg.clone() }, tau)
}

/// Tucker-AR with caller-supplied factors.
pub fn tucker_ar_with_model(
    window: &[ChannelTensor],
    order: usize,
    horizons: &[usize],
    model: TuckerModel,
) -> Result<Forecast> {
    let cores = window.iter().map(|t| model.project_core(t)).collect::<Result<Vec<_>>>()?;
    let predicted = ar_entrywise(&cores, order, horizons)?;
    let predictions = predicted.iter().map(|g| model.reconstruct(g)).collect::<Result<Vec<_>>>()?;
    Ok(Forecast {
        horizons: horizons.to_vec(),
        predictions,
        tucker: Some(model),
        dmd: None,
    })
}

/// Tucker-DMD with caller-supplied factors: project every window snapshot
/// onto the fixed factors, run DMD on the vectorized cores, extrapolate the
/// core and lift it back.
pub fn tucker_dmd_with_model(
    window: &[ChannelTensor],
    rank: DmdRank,
    horizons: &[usize],
    model: TuckerModel,
) -> Result<Forecast> {
    let cores = window
        .iter()
        .map(|t| model.project_core(t).map(|g| g.vec()))
        .collect::<Result<Vec<_>>>()?;
    let dmd_model = dmd::fit(&dmd::build_snapshots(&cores)?, rank)?;
    let predicted_cores = dmd_horizons(&dmd_model, window.len(), horizons, model.ranks())?;
    let predictions = predicted_cores
        .iter()
        .map(|g| model.reconstruct(g))
        .collect::<Result<Vec<_>>>()?;
    Ok(Forecast {
        horizons: horizons.to_vec(),
        predictions,
        tucker: Some(model),
        dmd: Some(dmd_model),
    })
}

/// Amplitudes are anchored at the window's first snapshot, so `tau` steps past
/// its last snapshot is exponent `len - 1 + tau`.
fn dmd_horizons(model: &DmdModel, window_len: usize, horizons: &[usize], dims: Dims) -> Result<Vec<ChannelTensor>> {
    horizons
        .iter()
        .map(|&tau| ChannelTensor::unvec(&model.predict(window_len - 1 + tau), dims))
        .collect()
}

/// Independent AR(order) model per tensor entry, recursed to the largest
/// horizon.
fn ar_entrywise(window: &[ChannelTensor], order: usize, horizons: &[usize]) -> Result<Vec<ChannelTensor>> {
    let dims = window[0].dims();
    let steps = *horizons.iter().max().expect("non-empty horizons");
    let entries = window[0].len();
    let per_entry: Vec<Vec<Complex64>> = (0..entries)
        .into_par_iter()
        .map(|e| {
            let series: Vec<Complex64> = window.iter().map(|t| t.as_slice()[e]).collect();
            let coeffs = fit_ar(&series, order)?;
            Ok(forecast_ar(&series, &coeffs, steps))
        })
        .collect::<Result<_>>()?;
    horizons
        .iter()
        .map(|&tau| ChannelTensor::new(dims, per_entry.iter().map(|f| f[tau - 1]).collect()))
        .collect()
}

#[cfg(test)]
mod tests;
