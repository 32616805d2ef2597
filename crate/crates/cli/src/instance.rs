//! Instance files and seeded instance generation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use strsub::infogain::{InfoGainModel, RandomInfoGain};
use strsub::matroid::{MatroidSpec, PrefixForbidden};
use strsub::tasks::{RandomTasks, TaskModel};
use strsub::{Action, Objective, RandomSubmodular, StringMatroid, TableOracle};

use crate::{CliError, ModelKind, RunConfig};

/// An objective of any supported model.
pub enum Oracle {
    Table(TableOracle),
    Random(RandomSubmodular),
    Tasks(TaskModel),
    InfoGain(InfoGainModel),
}

impl Objective for Oracle {
    fn eval(&self, s: &[Action]) -> strsub::Result<f64> {
        match self {
            Oracle::Table(t) => t.eval(s),
            Oracle::Random(r) => r.eval(s),
            Oracle::Tasks(m) => m.eval(s),
            Oracle::InfoGain(m) => m.eval(s),
        }
    }

    fn max_len(&self) -> Option<usize> {
        match self {
            Oracle::Table(t) => t.max_len(),
            Oracle::Random(r) => r.max_len(),
            Oracle::Tasks(m) => m.max_len(),
            Oracle::InfoGain(m) => m.max_len(),
        }
    }
}

pub struct Instance {
    pub oracle: Oracle,
    pub num_actions: usize,
    pub horizon: usize,
    pub matroid: Option<MatroidSpec>,
}

impl Instance {
    pub fn build_matroid(&self) -> Result<Option<Box<dyn StringMatroid>>, CliError> {
        match &self.matroid {
            Some(spec) => Ok(Some(spec.build(self.num_actions, self.horizon)?)),
            None => Ok(None),
        }
    }

    pub fn tasks(&self) -> Option<&TaskModel> {
        match &self.oracle {
            Oracle::Tasks(m) => Some(m),
            _ => None,
        }
    }

    pub fn infogain(&self) -> Option<&InfoGainModel> {
        match &self.oracle {
            Oracle::InfoGain(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "K")]
    Horizon,
    #[serde(rename = "seed")]
    Seed,
    /// Upper probability bound of a task model.
    #[serde(rename = "u_hat")]
    UHat,
    /// Upper noise deviation bound of an information-gain model.
    #[serde(rename = "b")]
    NoiseUpper,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Horizon => "K",
            Axis::Seed => "seed",
            Axis::UHat => "u_hat",
            Axis::NoiseUpper => "b",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// Fields shared by every instance file, next to the model's own fields.
#[derive(Default, Deserialize)]
struct Envelope {
    #[serde(rename = "K")]
    horizon: Option<usize>,
    matroid: Option<MatroidSpec>,
    sweep: Option<SweepSpec>,
}

/// A parsed instance file, or the seeded default when none is given.
pub struct Source {
    pub body: Option<serde_json::Value>,
    pub matroid: Option<MatroidSpec>,
    pub sweep: Option<SweepSpec>,
    horizon: Option<usize>,
}

impl Source {
    pub fn read(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Source { body: None, matroid: None, sweep: None, horizon: None });
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let body: serde_json::Value = serde_json::from_str(&text).map_err(strsub::Error::from)?;
        let env: Envelope = serde_json::from_value(body.clone()).map_err(strsub::Error::from)?;
        Ok(Source { body: Some(body), matroid: env.matroid, sweep: env.sweep, horizon: env.horizon })
    }

    /// The instance described by the file, or generated from `seed`.
    pub fn instance(&self, cfg: &RunConfig, seed: u64) -> Result<Instance, CliError> {
        match &self.body {
            Some(body) => self.build_from(body.clone(), cfg),
            None => generate(cfg, seed, self.matroid.clone()),
        }
    }

    fn build_from(&self, body: serde_json::Value, cfg: &RunConfig) -> Result<Instance, CliError> {
        let matroid = self.matroid.clone();
        match cfg.model {
            ModelKind::Table => {
                let t = TableOracle::from_value(body)?;
                let horizon = cfg
                    .horizon
                    .or(self.horizon)
                    .ok_or_else(|| CliError::Input("table instances need a \"K\" field or --horizon".into()))?;
                Ok(Instance { num_actions: t.num_actions(), horizon, oracle: Oracle::Table(t), matroid })
            }
            ModelKind::Tasks => {
                let mut m = TaskModel::from_value(body)?;
                if let Some(k) = cfg.horizon {
                    m.horizon = k;
                    m.validate()?;
                }
                Ok(Instance { num_actions: m.num_actions(), horizon: m.horizon, oracle: Oracle::Tasks(m), matroid })
            }
            ModelKind::Infogain => {
                let mut m = InfoGainModel::from_value(body)?;
                if let Some(k) = cfg.horizon {
                    m.horizon = k;
                    m.validate()?;
                }
                if let Some(grid) = &cfg.grid {
                    m = m.with_grid(grid.clone())?;
                }
                Ok(Instance { num_actions: m.num_actions(), horizon: m.horizon, oracle: Oracle::InfoGain(m), matroid })
            }
        }
    }
}

/// Seeded instance of the configured model kind.
pub fn generate(cfg: &RunConfig, seed: u64, matroid: Option<MatroidSpec>) -> Result<Instance, CliError> {
    let horizon = cfg.horizon.unwrap_or(match cfg.model {
        ModelKind::Table => 4,
        ModelKind::Tasks | ModelKind::Infogain => 3,
    });
    match cfg.model {
        ModelKind::Table => {
            if !(1..=256).contains(&cfg.actions) {
                return Err(CliError::Input("--actions must be in 1..=256".into()));
            }
            let r = RandomSubmodular::new(seed, cfg.actions);
            Ok(Instance { num_actions: cfg.actions, horizon, oracle: Oracle::Random(r), matroid })
        }
        ModelKind::Tasks => {
            let params = RandomTasks { actions: cfg.actions, horizon, ..Default::default() };
            let m = TaskModel::random(seed, &params)?;
            Ok(Instance { num_actions: m.num_actions(), horizon, oracle: Oracle::Tasks(m), matroid })
        }
        ModelKind::Infogain => {
            let mut params = RandomInfoGain { horizon, ..Default::default() };
            if let Some(grid) = &cfg.grid {
                params.grid = grid.clone();
            }
            let m = InfoGainModel::random(seed, &params)?;
            Ok(Instance { num_actions: m.num_actions(), horizon, oracle: Oracle::InfoGain(m), matroid })
        }
    }
}

/// Random prefix-forbidden matroid used when a command needs one and the
/// instance declares none.
pub fn default_matroid(inst: &Instance, seed: u64) -> Result<Box<dyn StringMatroid>, CliError> {
    Ok(Box::new(PrefixForbidden::random(seed, inst.num_actions, inst.horizon)?))
}

/// Moves one sweep axis of an instance to `value`.
pub fn apply_axis(cfg: &RunConfig, src: &Source, axis: Axis, value: f64) -> Result<Instance, CliError> {
    let as_count = |v: f64| -> Result<u64, CliError> {
        if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as u64)
        } else {
            Err(CliError::Input(format!("sweep value {v} is not a nonnegative integer")))
        }
    };
    match axis {
        Axis::Seed => generate(cfg, as_count(value)?, src.matroid.clone()),
        Axis::Horizon => {
            let k = as_count(value)? as usize;
            let mut cfg = cfg.clone();
            cfg.horizon = Some(k);
            src.instance(&cfg, cfg.seed)
        }
        Axis::UHat => {
            let mut inst = src.instance(cfg, cfg.seed)?;
            let Oracle::Tasks(m) = &mut inst.oracle else {
                return Err(CliError::Input("the u_hat axis needs a tasks model".into()));
            };
            for u in &mut m.upper {
                *u = value;
            }
            for p in m.probs.iter_mut().flatten() {
                for (a, x) in p.iter_mut().enumerate() {
                    *x = x.min(value).max(m.lower[a]);
                }
            }
            m.validate()?;
            Ok(inst)
        }
        Axis::NoiseUpper => {
            let mut inst = src.instance(cfg, cfg.seed)?;
            let Oracle::InfoGain(m) = &mut inst.oracle else {
                return Err(CliError::Input("the b axis needs an infogain model".into()));
            };
            m.b = value;
            for v in &mut m.noise_vars {
                *v = v.min(value * value);
            }
            m.validate()?;
            Ok(inst)
        }
    }
}
