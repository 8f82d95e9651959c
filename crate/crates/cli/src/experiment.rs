//! Experiment files: the scenario keys plus experiment keys, one
//! `key = value` per line.
//!
//! ```text
//! n_paths = 20
//! methods = ar, full_dmd, t_dmd
//! n_trials = 100
//! horizons = 1, 5, 10
//! snrs_db = none, 10, 30
//! ```

use std::str::FromStr;

use tdmd_core::channel_sim::{ScenarioConfig, SCENARIO_KEYS};
use tdmd_core::dmd::DmdRank;
use tdmd_core::evaluation::ExperimentSpec;
use tdmd_core::predictors::{Method, PredictorConfig};
use tdmd_core::{Error, Result};

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| Error::Format(format!("{key}: cannot parse {v:?}"))))
        .collect()
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("{key}: cannot parse {value:?}")))
}

pub fn parse_experiment(text: &str) -> Result<ExperimentSpec> {
    let mut scenario_lines = String::new();
    let mut methods: Vec<Method> = Method::ALL.to_vec();
    let mut base = PredictorConfig::new(Method::Zoh);
    let mut n_trials = None;
    let mut base_seed = None;
    let mut horizons = None;
    let mut snrs = None;
    let mut periods = None;

    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key = value", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if SCENARIO_KEYS.contains(&key) {
            scenario_lines.push_str(line);
            scenario_lines.push('\n');
            continue;
        }
        match key {
            "methods" => {
                methods = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty())
                    .map(Method::from_str)
                    .collect::<Result<_>>()?
            }
            "n_trials" => n_trials = Some(scalar(key, value)?),
            "base_seed" => base_seed = Some(scalar(key, value)?),
            "horizons" => horizons = Some(list(key, value)?),
            "snrs_db" => {
                snrs = Some(
                    value
                        .split(',')
                        .map(str::trim)
                        .filter(|v| !v.is_empty())
                        .map(|v| if v == "none" { Ok(None) } else { scalar(key, v).map(Some) })
                        .collect::<Result<Vec<Option<f64>>>>()?,
                )
            }
            "periods_ms" => periods = Some(list(key, value)?),
            "history" => base.history = scalar(key, value)?,
            "ar_order" => base.ar_order = scalar(key, value)?,
            "threshold" => base.tucker_threshold = scalar(key, value)?,
            "dmd_rank" => base.dmd_rank = value.parse::<DmdRank>()?,
            other => return Err(Error::Format(format!("line {}: unknown key {other:?}", n + 1))),
        }
    }

    let scenario: ScenarioConfig = scenario_lines.parse()?;
    let mut spec = ExperimentSpec::new(scenario);
    spec.predictors = methods
        .into_iter()
        .map(|m| PredictorConfig { method: m, ..base.clone() })
        .collect();
    if let Some(v) = n_trials {
        spec.n_trials = v;
    }
    if let Some(v) = base_seed {
        spec.base_seed = v;
    }
    if let Some(v) = horizons {
        spec.horizons = v;
    }
    if let Some(v) = snrs {
        spec.snrs_db = v;
    }
    if let Some(v) = periods {
        spec.periods_ms = v;
    }
    Ok(spec)
}
