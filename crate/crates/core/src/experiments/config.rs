//! TOML experiment files:
//!
//! ```toml
//! [experiment]
//! name = "j1-7-1-gnd"
//! trials = 2000
//! seed = 7
//! T = 300
//! init_low = -10.0
//! init_high = 10.0
//!
//! [objective]
//! function = "j1"
//! n = 7
//! k = 1
//!
//! [algorithm]
//! algorithm = "gnd"
//! eta = 0.4
//! s = 0.5
//! f_lb = 0.0
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{DlGndConfig, GndConfig};

use super::{AlgorithmSpec, ExperimentConfig, InitialPoints, ObjectiveSpec, DEFAULT_THRESHOLD};

pub const DEFAULT_TRIALS: usize = 2000;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub experiment: ExperimentSection,
    pub objective: ObjectiveSection,
    pub algorithm: AlgorithmSection,
}

/// A box edge given once for every coordinate or per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Edge {
    All(f64),
    Each(Vec<f64>),
}

impl Edge {
    fn expand(&self, d: usize) -> Vec<f64> {
        match self {
            Edge::All(v) => vec![*v; d],
            Edge::Each(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_low: Option<Edge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_high: Option<Edge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(alias = "r", skip_serializing_if = "Option::is_none")]
    pub sg_noise_r: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSection {
    pub function: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub big_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_lb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_lb0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub outer_loops: Option<usize>,
    #[serde(rename = "T1", skip_serializing_if = "Option::is_none")]
    pub t1: Option<usize>,
    #[serde(rename = "T2", skip_serializing_if = "Option::is_none")]
    pub t2: Option<usize>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_y: Option<bool>,
}

fn need<T>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::param(format!("missing key `{key}`")))
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// `N = ceil((T - T1) / T2)`, at least 1.
pub fn outer_loops_for(total: usize, t1: usize, t2: usize) -> usize {
    if t2 == 0 {
        return 1;
    }
    total.saturating_sub(t1).div_ceil(t2).max(1)
}

impl ObjectiveSection {
    fn spec(&self) -> Result<ObjectiveSpec> {
        Ok(match self.function.to_ascii_lowercase().as_str() {
            "quadratic" => ObjectiveSpec::Quadratic { alpha: self.alpha.unwrap_or(1.0), dim: self.dim.unwrap_or(1) },
            "j1" => ObjectiveSpec::J1 { n: need(self.n, "n")?, k: need(self.k, "k")? },
            "j2" => ObjectiveSpec::J2 { eps: need(self.eps, "eps")?, r: need(self.big_r, "R")? },
            "rastrigin" => ObjectiveSpec::Rastrigin {
                a: self.a.unwrap_or(1.0),
                b: self.b.unwrap_or(1.0),
                c: need(self.c, "c")?,
                dim: need(self.dim, "dim")?,
            },
            other => {
                return Err(Error::param(format!(
                    "unknown function `{other}` (expected quadratic, j1, j2 or rastrigin)"
                )))
            }
        })
    }

    fn from_spec(spec: &ObjectiveSpec) -> Self {
        let mut s = ObjectiveSection::default();
        match *spec {
            ObjectiveSpec::Quadratic { alpha, dim } => {
                s.function = "quadratic".into();
                s.alpha = Some(alpha);
                s.dim = Some(dim);
            }
            ObjectiveSpec::J1 { n, k } => {
                s.function = "j1".into();
                s.n = Some(n);
                s.k = Some(k);
            }
            ObjectiveSpec::J2 { eps, r } => {
                s.function = "j2".into();
                s.eps = Some(eps);
                s.big_r = Some(r);
            }
            ObjectiveSpec::Rastrigin { a, b, c, dim } => {
                s.function = "rastrigin".into();
                s.a = Some(a);
                s.b = Some(b);
                s.c = Some(c);
                s.dim = Some(dim);
            }
        }
        s
    }
}

impl AlgorithmSection {
    fn spec(&self, experiment_t: Option<usize>) -> Result<AlgorithmSpec> {
        let total = self.iterations.or(experiment_t);
        let record_y = self.record_y.unwrap_or(false);
        Ok(match self.algorithm.to_ascii_lowercase().as_str() {
            "gnd" => AlgorithmSpec::Gnd(
                GndConfig::new(need(self.eta, "eta")?, need(self.s, "s")?, self.f_lb.unwrap_or(0.0), need(total, "T")?)
                    .with_record_y(record_y),
            ),
            "gd" => AlgorithmSpec::Gd { eta: need(self.eta, "eta")?, iterations: need(total, "T")? },
            "dlgnd" => {
                let t1 = need(self.t1, "T1")?;
                let t2 = need(self.t2, "T2")?;
                let outer_loops = match (self.outer_loops, total) {
                    (Some(n), _) => n,
                    (None, Some(total)) => outer_loops_for(total, t1, t2),
                    (None, None) => return Err(Error::param("dlgnd needs `N` or `T`")),
                };
                AlgorithmSpec::DlGnd(DlGndConfig {
                    eta: need(self.eta, "eta")?,
                    s: need(self.s, "s")?,
                    f_lb0: need(self.f_lb0, "f_lb0")?,
                    gamma: need(self.gamma, "gamma")?,
                    outer_loops,
                    t1,
                    t2,
                    record_y,
                    record_inner: false,
                })
            }
            other => return Err(Error::param(format!("unknown algorithm `{other}` (expected gnd, dlgnd or gd)"))),
        })
    }

    fn from_spec(spec: &AlgorithmSpec) -> Self {
        let mut s = AlgorithmSection { algorithm: spec.label().into(), ..Default::default() };
        match *spec {
            AlgorithmSpec::Gnd(c) => {
                s.eta = Some(c.eta);
                s.s = Some(c.s);
                s.f_lb = Some(c.f_lb);
                s.iterations = Some(c.iterations);
                s.record_y = Some(c.record_y);
            }
            AlgorithmSpec::Gd { eta, iterations } => {
                s.eta = Some(eta);
                s.iterations = Some(iterations);
            }
            AlgorithmSpec::DlGnd(c) => {
                s.eta = Some(c.eta);
                s.s = Some(c.s);
                s.f_lb0 = Some(c.f_lb0);
                s.gamma = Some(c.gamma);
                s.outer_loops = Some(c.outer_loops);
                s.t1 = Some(c.t1);
                s.t2 = Some(c.t2);
                s.record_y = Some(c.record_y);
            }
        }
        s
    }
}

impl ConfigFile {
    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        let e = &self.experiment;
        let objective = self.objective.spec()?;
        let dim = objective.build()?.dim();
        let algorithm = self.algorithm.spec(e.iterations)?;
        let init = match (&e.x0, &e.init_low, &e.init_high) {
            (Some(x0), None, None) => InitialPoints::Fixed(x0.clone()),
            (None, Some(lo), Some(hi)) => InitialPoints::Uniform { low: lo.expand(dim), high: hi.expand(dim) },
            (None, None, None) => InitialPoints::Uniform { low: vec![-10.0; dim], high: vec![10.0; dim] },
            _ => return Err(Error::param("give either `x0` or both `init_low` and `init_high`")),
        };
        let cfg = ExperimentConfig {
            name: e.name.clone().unwrap_or_else(|| format!("{}-{}", self.objective.function, algorithm.label())),
            objective,
            algorithm,
            r: e.sg_noise_r.unwrap_or(0.0),
            trials: e.trials.unwrap_or(DEFAULT_TRIALS),
            init,
            seed: e.seed.unwrap_or(0),
            threshold: e.threshold.unwrap_or(DEFAULT_THRESHOLD),
            workers: e.workers.unwrap_or_else(default_workers),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_experiment(cfg: &ExperimentConfig) -> Self {
        let (x0, init_low, init_high) = match &cfg.init {
            InitialPoints::Fixed(x0) => (Some(x0.clone()), None, None),
            InitialPoints::Uniform { low, high } => (None, Some(Edge::Each(low.clone())), Some(Edge::Each(high.clone()))),
        };
        ConfigFile {
            experiment: ExperimentSection {
                name: Some(cfg.name.clone()),
                trials: Some(cfg.trials),
                seed: Some(cfg.seed),
                threshold: Some(cfg.threshold),
                workers: Some(cfg.workers),
                iterations: None,
                init_low,
                init_high,
                x0,
                sg_noise_r: Some(cfg.r),
            },
            objective: ObjectiveSection::from_spec(&cfg.objective),
            algorithm: AlgorithmSection::from_spec(&cfg.algorithm),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config sections serialize")
    }
}

pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| Error::Config { path: path.to_path_buf(), message: e.message().to_string() })?;
    file.to_experiment()
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        context: "cannot read config",
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}
