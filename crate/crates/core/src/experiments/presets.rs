//! Named benchmark configurations for the one-dimensional `J1` study and the Rastrigin
//! studies in two and ten dimensions.

use crate::error::{Error, Result};
use crate::solver::{DlGndConfig, GndConfig};

use super::config::{default_workers, outer_loops_for, DEFAULT_TRIALS};
use super::{AlgorithmSpec, ExperimentConfig, InitialPoints, ObjectiveSpec, DEFAULT_THRESHOLD};

pub const BENCH_NAMES: [&str; 6] = ["j1-7-1", "j1-112-2", "rast2d-c05", "rast2d-c01", "rast10d-c05", "rast10d-c03"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algo {
    Gnd,
    DlGnd,
    Gd,
}

impl Algo {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gnd" => Ok(Algo::Gnd),
            "dlgnd" => Ok(Algo::DlGnd),
            "gd" => Ok(Algo::Gd),
            other => Err(Error::param(format!("unknown algorithm `{other}` (expected gnd, dlgnd or gd)"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Algo::Gnd => "gnd",
            Algo::DlGnd => "dlgnd",
            Algo::Gd => "gd",
        }
    }
}

struct Preset {
    objective: ObjectiveSpec,
    half_width: f64,
    eta: f64,
    s_gnd: f64,
    f_lb: f64,
    s_dl: f64,
    f_lb0: f64,
    gamma: f64,
    t1: usize,
    t2: usize,
    outer_loops: Option<usize>,
    iterations: usize,
}

fn j1(n: u32, k: u32, eta: f64, s: f64) -> Preset {
    Preset {
        objective: ObjectiveSpec::J1 { n, k },
        half_width: 10.0,
        eta,
        s_gnd: s,
        f_lb: 0.0,
        s_dl: s,
        f_lb0: -1.0,
        gamma: 0.5,
        t1: 40,
        t2: 10,
        outer_loops: Some(30),
        iterations: 300,
    }
}

fn rastrigin(dim: usize, c: f64, s_gnd: f64, s_dl: f64, gamma: f64) -> Preset {
    Preset {
        objective: ObjectiveSpec::Rastrigin { a: 1.0, b: 1.0, c, dim },
        half_width: 20.0,
        eta: 1.5,
        s_gnd,
        f_lb: 0.0,
        s_dl,
        f_lb0: -20.0,
        gamma,
        t1: 100,
        t2: 10,
        outer_loops: None,
        iterations: 5000,
    }
}

fn preset(name: &str) -> Result<Preset> {
    Ok(match name {
        "j1-7-1" => j1(7, 1, 0.4, 0.5),
        "j1-112-2" => j1(112, 2, 0.1, 0.2),
        "rast2d-c05" => rastrigin(2, 0.05, 2.0, 1.5, 0.3),
        "rast2d-c01" => rastrigin(2, 0.01, 4.0, 3.0, 0.03),
        "rast10d-c05" => rastrigin(10, 0.05, 1.5, 1.4, 0.025),
        "rast10d-c03" => rastrigin(10, 0.03, 2.5, 1.5, 0.0035),
        other => {
            return Err(Error::param(format!("unknown bench `{other}`; valid names: {}", BENCH_NAMES.join(", "))))
        }
    })
}

/// Default desk-scale iteration budget of a preset (for DL-GND, `T1 + N T2` when the
/// preset fixes `N`).
pub fn default_iterations(name: &str, algo: Algo) -> Result<usize> {
    let p = preset(name)?;
    Ok(match (algo, p.outer_loops) {
        (Algo::DlGnd, Some(n)) => p.t1 + n * p.t2,
        _ => p.iterations,
    })
}

/// The configuration of bench `name` under `algo`. `iterations` overrides the preset
/// budget; for DL-GND it fixes `N = ceil((T - T1) / T2)`.
pub fn bench_preset(name: &str, algo: Algo, iterations: Option<usize>) -> Result<ExperimentConfig> {
    let p = preset(name)?;
    let dim = p.objective.build()?.dim();
    let algorithm = match algo {
        Algo::Gnd => AlgorithmSpec::Gnd(GndConfig::new(p.eta, p.s_gnd, p.f_lb, iterations.unwrap_or(p.iterations))),
        Algo::Gd => AlgorithmSpec::Gd { eta: p.eta, iterations: iterations.unwrap_or(p.iterations) },
        Algo::DlGnd => {
            let outer_loops = match (iterations, p.outer_loops) {
                (Some(t), _) => outer_loops_for(t, p.t1, p.t2),
                (None, Some(n)) => n,
                (None, None) => outer_loops_for(p.iterations, p.t1, p.t2),
            };
            AlgorithmSpec::DlGnd(DlGndConfig {
                eta: p.eta,
                s: p.s_dl,
                f_lb0: p.f_lb0,
                gamma: p.gamma,
                outer_loops,
                t1: p.t1,
                t2: p.t2,
                record_y: false,
                record_inner: false,
            })
        }
    };
    Ok(ExperimentConfig {
        name: format!("{name}-{}", algo.label()),
        objective: p.objective,
        algorithm,
        r: 0.0,
        trials: DEFAULT_TRIALS,
        init: InitialPoints::Uniform { low: vec![-p.half_width; dim], high: vec![p.half_width; dim] },
        seed: 0,
        threshold: DEFAULT_THRESHOLD,
        workers: default_workers(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds() {
        for name in BENCH_NAMES {
            for algo in [Algo::Gnd, Algo::DlGnd, Algo::Gd] {
                let cfg = bench_preset(name, algo, None).unwrap();
                cfg.validate().unwrap();
                assert_eq!(cfg.algorithm.total_iterations(), default_iterations(name, algo).unwrap());
            }
        }
        assert!(bench_preset("rast3d", Algo::Gnd, None).is_err());
    }

    #[test]
    fn rastrigin_table_row() {
        let cfg = bench_preset("rast2d-c01", Algo::DlGnd, None).unwrap();
        match cfg.algorithm {
            AlgorithmSpec::DlGnd(c) => {
                assert_eq!((c.eta, c.s, c.f_lb0, c.gamma, c.t1, c.t2), (1.5, 3.0, -20.0, 0.03, 100, 10));
                assert_eq!(c.outer_loops, 490);
            }
            other => panic!("{other:?}"),
        }
        let cfg = bench_preset("rast2d-c01", Algo::Gnd, None).unwrap();
        assert_eq!(cfg.algorithm, AlgorithmSpec::Gnd(GndConfig::new(1.5, 4.0, 0.0, 5000)));
    }
}
