//! Gaussian noise descent (GND) and its double-loop variant (DL-GND) for minimizing
//! nearly convex functions, together with the test objectives, the schedules and
//! regularity audits that certify them, and a Monte-Carlo benchmark harness.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix it to `f64`, which is what the experiments and the command line use.
//!
//! ```
//! use gnd::objectives::Objective;
//! use gnd::sampling::{RngStream, SgOracle};
//! use gnd::solver::{gnd_run, GndConfig};
//!
//! let f = Objective::<f64>::j1(7, 1)?;
//! let oracle = SgOracle::exact(&f);
//! let cfg = GndConfig::new(0.4, 0.5, 0.0, 300);
//! let traj = gnd_run(&oracle, &[8.0], &cfg, &mut RngStream::new(1, 0))?;
//! assert!(traj.values[traj.t_star] < 1e-8);
//! # Ok::<(), gnd::Error>(())
//! ```

pub mod error;
pub mod objectives;
pub mod sampling;
pub mod scalar;
pub mod solver;
pub mod theory;
pub mod experiments;
pub mod cli;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Objective64 = objectives::Objective<f64>;
pub type Certificate64 = objectives::Certificate<f64>;
pub type GndConfig64 = solver::GndConfig<f64>;
pub type DlGndConfig64 = solver::DlGndConfig<f64>;
pub type Trajectory64 = solver::Trajectory<f64>;
pub type Schedule64 = theory::Schedule<f64>;
pub type DoubleLoopSchedule64 = theory::DoubleLoopSchedule<f64>;
