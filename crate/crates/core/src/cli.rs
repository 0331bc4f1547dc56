//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid parameters or configuration, 2 I/O failure,
//! 3 diverged experiment. Diagnostics and progress go to standard error; results go to
//! standard output or files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiments::{
    bench_preset, default_workers, load_config, outer_loops_for, run_monte_carlo, write_csv, write_svg, Algo,
    AlgorithmSpec, ConfigFile, ExperimentConfig, ShadowSetup, BENCH_NAMES,
};
use crate::objectives::Objective;
use crate::sampling::{gaussian_moments_exact, gaussian_moments_monte_carlo, RngStream};
use crate::theory::{
    check_eta_constraint, iterations_bound_thm1, j2_condition_table, nearly_convex_gate, regularity_constants_grid,
    schedule_theorem1, schedule_theorem2, symmetric_log_grid, EtaConstraint,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARAMETER: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "gnd", version, about = "Gaussian noise descent: schedules, regularity audits and Monte-Carlo benchmarks")]
pub struct Cli {
    /// Suppress progress messages (diagnostics are still printed).
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Step size, noise factor and iteration bounds from (alpha, L, r, f* - f_lb).
    Schedule(ScheduleArgs),
    /// Grid audit of the regularity constants of a test objective.
    Check(CheckArgs),
    /// Exact and Monte-Carlo moments of |xi|, xi ~ N(0, I_d / d).
    Moments(MomentsArgs),
    /// Run one experiment described by a TOML file.
    Run(RunArgs),
    /// Run a named benchmark preset.
    Bench(BenchArgs),
    /// Empirical versus analytic stopping-time probability on a quadratic.
    Stbound(StboundArgs),
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long = "L")]
    pub lipschitz: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    /// f* - f_lb (for the double loop, f* - f_lb^0).
    #[arg(long, default_value_t = 0.0)]
    pub fgap: f64,
    /// Target accuracy; with --zeta and --y0 also prints the iteration bounds.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub zeta: Option<f64>,
    /// |y_0 - x*|^2.
    #[arg(long)]
    pub y0: Option<f64>,
    /// Nearly-convexity distance; with --d also prints the gate and step-size check.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Also write the values as `key,value` CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// quadratic, j1, j2 or rastrigin.
    #[arg(long)]
    pub function: String,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "R")]
    pub big_r: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long)]
    pub c: Option<f64>,
    /// Alpha used for the beta estimate and the gate (default: the certificate's).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Points per sign of the log-spaced grid.
    #[arg(long, default_value_t = 50_000)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub lo: f64,
    #[arg(long, default_value_t = 10.0)]
    pub hi: f64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,10,100")]
    pub d: Vec<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// One of j1-7-1, j1-112-2, rast2d-c05, rast2d-c01, rast10d-c05, rast10d-c03.
    pub name: String,
    #[arg(long, default_value = "gnd")]
    pub algo: String,
    /// Trajectories (default 2000).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Iterations (default 300 for j1 presets, 340 = T1 + 30 T2 for their DL-GND, 5000 for Rastrigin).
    #[arg(long = "T")]
    pub iterations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long = "f-lb")]
    pub f_lb: Option<f64>,
    #[arg(long = "f-lb0")]
    pub f_lb0: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "N")]
    pub outer_loops: Option<usize>,
    #[arg(long = "T1")]
    pub t1: Option<usize>,
    #[arg(long = "T2")]
    pub t2: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StboundArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 5.0)]
    pub x0: f64,
    /// Threshold ell (default 100 b).
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long = "M", value_delimiter = ',', default_value = "100,500,2000")]
    pub m: Vec<u64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// `printf("%g")`: six significant digits, trailing zeros removed.
pub fn fmt_g(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{v:.*}", (5 - exp) as usize))
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_divergence() {
        EXIT_DIVERGED
    } else if matches!(e, Error::Io { .. }) {
        EXIT_IO
    } else {
        EXIT_PARAMETER
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARAMETER } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Schedule(a) => schedule(a),
        Command::Check(a) => check(a),
        Command::Moments(a) => moments(a),
        Command::Run(a) => {
            let mut cfg = load_config(&a.config)?;
            if let Some(w) = a.workers {
                cfg.workers = w;
            }
            experiment(&cfg, &a.out, cli.quiet)
        }
        Command::Bench(a) => {
            let cfg = bench_config(a)?;
            experiment(&cfg, &a.out, cli.quiet)
        }
        Command::Stbound(a) => stbound(a),
    }
}

struct KeyValues(Vec<(String, String)>);

impl KeyValues {
    fn push(&mut self, key: &str, v: impl ToString) {
        self.0.push((key.to_string(), v.to_string()));
    }

    fn real(&mut self, key: &str, v: f64) {
        self.push(key, fmt_g(v));
    }

    fn line(&self, from: usize) -> String {
        self.0[from..].iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }

    fn write_csv(&self, path: &Path) -> Result<()> {
        let mut body = String::from("key,value\n");
        for (k, v) in &self.0 {
            let _ = writeln!(body, "{k},{v}");
        }
        fs::write(path, body).map_err(|source| Error::Io { context: "cannot write", path: path.to_path_buf(), source })
    }
}

fn schedule(a: &ScheduleArgs) -> Result<()> {
    let mut kv = KeyValues(Vec::new());
    let s = schedule_theorem1(a.alpha, a.lipschitz, a.r, a.fgap)?;
    kv.real("eta", s.eta);
    kv.real("lambda", s.lambda);
    kv.real("s", s.s);
    kv.real("b", s.b);
    kv.real("eta_lambda", s.eta_lambda);
    println!("{}", kv.line(0));

    if let (Some(zeta), Some(y0)) = (a.zeta, a.y0) {
        let from = kv.0.len();
        let t = iterations_bound_thm1(&s, y0, zeta, a.eps.unwrap_or(0.0))?;
        kv.push("T", t);
        if let Some(eps) = a.eps.filter(|_| a.fgap > 0.0) {
            let dl = schedule_theorem2(a.alpha, a.lipschitz, a.r, eps, zeta, a.fgap, y0, a.beta.unwrap_or(0.0))?;
            kv.real("b0", dl.b0);
            kv.real("b_eps", dl.b_eps);
            kv.real("gamma", dl.gamma);
            kv.push("N", dl.outer_loops);
            kv.push("T1", dl.t1);
            kv.push("T2", dl.t2);
            kv.real("zeta_prime", dl.zeta_prime);
        }
        println!("{}", kv.line(from));
    }

    if let (Some(beta), Some(d)) = (a.beta, a.d) {
        let from = kv.0.len();
        let gate = nearly_convex_gate(a.alpha, a.lipschitz, d)?;
        kv.real("gate", gate);
        kv.push("nc_gate", beta <= gate);
        let verdict = match check_eta_constraint(s.eta, s.s, a.alpha, a.lipschitz, beta, d)? {
            EtaConstraint::Holds => "holds",
            EtaConstraint::Fails => "fails",
            EtaConstraint::NotCheckable => "not-checkable",
        };
        kv.push("eta_constraint", verdict);
        println!("{}", kv.line(from));
    }

    if let Some(path) = &a.csv {
        kv.write_csv(path)?;
    }
    Ok(())
}

fn check_objective(a: &CheckArgs) -> Result<Objective<f64>> {
    let need = |v: Option<f64>, k: &str| v.ok_or_else(|| Error::Parameter(format!("--{k} is required")));
    match a.function.as_str() {
        "quadratic" => Objective::quadratic_origin(a.alpha.unwrap_or(1.0), 1),
        "j1" => Objective::j1(
            a.n.ok_or_else(|| Error::Parameter("--n is required".into()))?,
            a.k.ok_or_else(|| Error::Parameter("--k is required".into()))?,
        ),
        "j2" => Objective::j2(need(a.eps, "eps")?, need(a.big_r, "R")?),
        "rastrigin" => Objective::rastrigin(a.a, a.b, need(a.c, "c")?, 1),
        other => Err(Error::Parameter(format!("unknown function `{other}` (expected quadratic, j1, j2 or rastrigin)"))),
    }
}

fn check(a: &CheckArgs) -> Result<()> {
    let obj = check_objective(a)?;
    let grid = symmetric_log_grid(a.lo, a.hi, a.points)?;
    let rep = regularity_constants_grid(&obj, &grid, a.alpha)?;
    let mut kv = KeyValues(Vec::new());
    kv.push("objective", obj.name().replace(", ", ";"));
    kv.push("points", rep.points);
    kv.real("mu_r_hat", rep.mu_r_hat);
    kv.real("mu_p_hat", rep.mu_p_hat);
    kv.real("mu_q_hat", rep.mu_q_hat);
    kv.real("l_hat", rep.l_hat);
    kv.real("alpha", rep.alpha);
    kv.real("L", rep.lipschitz);
    kv.real("beta_hat", rep.beta_hat);
    kv.real("gate", rep.gate);
    kv.push("nc_gate", rep.nc_gate);
    for (k, v) in &kv.0 {
        println!("{k}={v}");
    }
    println!("# beta_hat is an upper bound via the quadratic candidate; grid minima bound the true infima from above");
    if let (Some(eps), Some(r)) = (a.eps.filter(|_| a.function == "j2"), a.big_r) {
        for row in j2_condition_table(eps, r)? {
            let label = row.condition.label();
            let mut line = format!("{label}={}", row.holds);
            if let Some(p) = row.parameter {
                let _ = write!(line, " {label}_param={}", fmt_g(p));
            }
            if let Some(c) = row.certificate {
                let _ = write!(line, " {label}_alpha={} {label}_L={}", fmt_g(c.alpha), fmt_g(c.lipschitz));
            }
            println!("{line}");
        }
    }
    if let Some(path) = &a.csv {
        kv.write_csv(path)?;
    }
    Ok(())
}

fn moments(a: &MomentsArgs) -> Result<()> {
    println!("d,p,exact,estimate,std_err");
    for &d in &a.d {
        let exact = gaussian_moments_exact::<f64>(d)?.as_array();
        let est = gaussian_moments_monte_carlo(d, a.draws, &mut RngStream::new(a.seed, d as u64))?;
        for p in 0..4 {
            println!("{d},{},{},{},{}", p + 1, fmt_g(exact[p]), fmt_g(est.mean[p]), fmt_g(est.std_err[p]));
        }
    }
    Ok(())
}

fn bench_config(a: &BenchArgs) -> Result<ExperimentConfig> {
    let algo = Algo::parse(&a.algo)?;
    if !BENCH_NAMES.contains(&a.name.as_str()) {
        return Err(Error::Parameter(format!("unknown bench `{}`; valid names: {}", a.name, BENCH_NAMES.join(", "))));
    }
    let mut cfg = bench_preset(&a.name, algo, a.iterations)?;
    cfg.seed = a.seed;
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.workers {
        cfg.workers = v;
    }
    if let Some(v) = a.threshold {
        cfg.threshold = v;
    }
    if let Some(v) = a.r {
        cfg.r = v;
    }
    match &mut cfg.algorithm {
        AlgorithmSpec::Gnd(c) => {
            c.eta = a.eta.unwrap_or(c.eta);
            c.s = a.s.unwrap_or(c.s);
            c.f_lb = a.f_lb.unwrap_or(c.f_lb);
        }
        AlgorithmSpec::Gd { eta, .. } => *eta = a.eta.unwrap_or(*eta),
        AlgorithmSpec::DlGnd(c) => {
            c.eta = a.eta.unwrap_or(c.eta);
            c.s = a.s.unwrap_or(c.s);
            c.f_lb0 = a.f_lb0.unwrap_or(c.f_lb0);
            c.gamma = a.gamma.unwrap_or(c.gamma);
            c.t1 = a.t1.unwrap_or(c.t1);
            c.t2 = a.t2.unwrap_or(c.t2);
            if let Some(n) = a.outer_loops {
                c.outer_loops = n;
            } else if let Some(t) = a.iterations {
                c.outer_loops = outer_loops_for(t, c.t1, c.t2);
            }
        }
    }
    Ok(cfg)
}

fn experiment(cfg: &ExperimentConfig, out: &Path, quiet: bool) -> Result<()> {
    let obj = cfg.validate()?;
    if !quiet {
        eprintln!(
            "{}: {} on {}, {} trials, T = {}, seed {}, {} workers",
            cfg.name,
            cfg.algorithm.label(),
            obj.name(),
            cfg.trials,
            cfg.algorithm.total_iterations(),
            cfg.seed,
            cfg.workers
        );
    }
    fs::create_dir_all(out).map_err(|source| Error::Io { context: "cannot create", path: out.to_path_buf(), source })?;
    let series = run_monte_carlo(cfg)?;
    let csv = out.join(format!("{}.csv", cfg.name));
    let svg = out.join(format!("{}.svg", cfg.name));
    let sidecar = out.join(format!("{}.config", cfg.name));
    write_csv(&series, &csv)?;
    write_svg(&series, &svg)?;
    fs::write(&sidecar, ConfigFile::from_experiment(cfg).to_toml())
        .map_err(|source| Error::Io { context: "cannot write", path: sidecar.clone(), source })?;
    if !quiet {
        let last = series.mse.len() - 1;
        eprintln!("final mse={} ncp={}", fmt_g(series.mse[last]), fmt_g(series.ncp[last]));
        eprintln!("wrote {}, {}, {}", csv.display(), svg.display(), sidecar.display());
    }
    Ok(())
}

fn stbound(a: &StboundArgs) -> Result<()> {
    let obj = Objective::quadratic_origin(a.alpha, 1)?;
    let setup = ShadowSetup {
        r: a.r,
        f_lb: 0.0,
        x0: vec![a.x0],
        trials: a.trials,
        seed: a.seed,
        workers: a.workers.unwrap_or_else(default_workers),
    };
    let b = schedule_theorem1(a.alpha, a.alpha, a.r, 0.0)?.b;
    let ell = a.ell.unwrap_or(100.0 * b);
    println!("M,empirical_p,std_err,analytic_bound,b_hat");
    for e in crate::experiments::lemma_st_empirical(&obj, &setup, ell, &a.m)? {
        println!("{},{},{},{},{}", e.m, fmt_g(e.empirical_p), fmt_g(e.std_err), fmt_g(e.analytic_bound), fmt_g(e.b_hat));
    }
    Ok(())
}
