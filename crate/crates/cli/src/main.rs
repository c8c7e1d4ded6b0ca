//! `friable`: command-line front end for the saddle-point law on friable
//! integers.
//!
//! Results go to stdout (or `--out`), diagnostics to stderr. Exit codes: 0 on
//! success, 1 when verification fails or a computation breaks down, 2 for
//! usage and domain errors, 3 when an exact computation exceeds its budget.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod grid;
mod output;

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use friable::bias::{self, bias_report, delta_report, delta_theta, theta_family, BiasConfig, Magnitude, DEFAULT_EPSILON};
use friable::friable::{psi_exact, DEFAULT_TERM_BUDGET};
use friable::saddle::{psi_saddle, solve_alpha};
use friable::sampler::estimate_p;
use friable::special::xi;
use friable::verify::{run_criterion, Suite, Tolerances};
use friable::{Budget, DickmanGrid, PrimeTable};

use grid::Grid;
use output::{write_rows, Format, Row, Value};

const AFTER_HELP: &str = "\
Numbers: x, y and z accept integers or decimal/scientific notation (1e6).
Use --logx / --logz to pass the natural logarithm instead, e.g. for y = 2 and
x = 2^4096.

Grid specs (table --grid): axes separated by ';', each 'name=values' where
values is a comma list of numbers and geometric ranges a:b:m
(a, a*m, a*m^2, ... <= b). Example: 'x=1e4:1e8:100;y=30,100,1000;h=-1,0,1'.

Exit codes: 0 ok, 1 verification failed or numerical failure, 2 usage or
domain error, 3 budget exceeded.";

#[derive(Debug, Parser)]
#[command(name = "friable", version, about = "Saddle-point law on y-friable integers: bias, defect and Dickman functions", after_help = AFTER_HELP)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format (verify prints plain lines unless a format is given)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write results to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Term budget for exact enumerations
    #[arg(long, global = true, env = "FRIABLE_BUDGET", default_value_t = DEFAULT_TERM_BUDGET)]
    budget: u64,
    /// epsilon of the domain H_eps
    #[arg(long, global = true, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// TOML file overriding verification tolerances
    #[arg(long, global = true)]
    tol_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct XArg {
    /// x, integer or decimal
    #[arg(long, value_parser = parse_magnitude)]
    x: Option<Magnitude>,
    /// natural log of x
    #[arg(long, value_parser = parse_positive)]
    logx: Option<f64>,
}

impl XArg {
    fn get(&self) -> Magnitude {
        self.x.unwrap_or_else(|| Magnitude::Log(self.logx.unwrap()))
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PsiMethod {
    Exact,
    Saddle,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DeltaMethod {
    Exact,
    Nu,
    Theta,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Quantity {
    Alpha,
    Psi,
    Bias,
    Delta,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Saddle point alpha(x, y) and the moments around it
    Alpha {
        #[command(flatten)]
        x: XArg,
        /// friability bound y >= 2
        #[arg(long, value_parser = parse_int)]
        y: u64,
    },
    /// Psi(x, y), exactly or by the saddle-point formula
    Psi {
        #[command(flatten)]
        x: XArg,
        /// friability bound y >= 2
        #[arg(long, value_parser = parse_int)]
        y: u64,
        /// exact enumeration, or the saddle-point formula (any x)
        #[arg(long, value_enum, default_value = "exact")]
        method: PsiMethod,
    },
    /// Bias P(x, y, z): exact, Gaussian and kappa forms
    Bias {
        #[command(flatten)]
        x: XArg,
        /// friability bound y >= 2
        #[arg(long, value_parser = parse_int)]
        y: u64,
        /// truncation point z
        #[arg(long, value_parser = parse_magnitude, conflicts_with_all = ["logz", "h"], required_unless_present_any = ["logz", "h"])]
        z: Option<Magnitude>,
        /// natural log of z
        #[arg(long, conflicts_with = "h")]
        logz: Option<f64>,
        /// z given through z = x y^(Theta h)
        #[arg(long, allow_hyphen_values = true)]
        h: Option<f64>,
    },
    /// Defect Delta(x, y) and its asymptotic forms
    Delta {
        #[command(flatten)]
        x: XArg,
        /// friability bound y >= 2
        #[arg(long, value_parser = parse_int)]
        y: u64,
        /// restrict the report to one estimate
        #[arg(long, value_enum)]
        method: Option<DeltaMethod>,
    },
    /// rho, rho2, xi and xi' at a list of points
    Dickman {
        /// points, as a comma list or a:b:m ranges
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        /// include rho2
        #[arg(long)]
        rho2: bool,
        /// upper end of the Dickman grid
        #[arg(long, default_value_t = friable::dickman::DEFAULT_T_MAX)]
        t_max: f64,
    },
    /// kappa(u, w)
    Kappa {
        /// u >= 1
        #[arg(long)]
        u: f64,
        /// upper end of the truncated integral, w >= 0
        #[arg(long)]
        w: f64,
    },
    /// Monte Carlo estimate of P(x, y, z) from the law itself
    Sample {
        #[command(flatten)]
        x: XArg,
        /// friability bound y >= 2
        #[arg(long, value_parser = parse_int)]
        y: u64,
        /// number of draws
        #[arg(short = 'n', long = "draws", default_value_t = 100_000)]
        n: u64,
        /// draw i uses ChaCha20 stream i of this seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// truncation point (defaults to x)
        #[arg(long, value_parser = parse_magnitude)]
        z: Option<Magnitude>,
    },
    /// Tabulate a quantity over a grid
    Table {
        /// axes x and y, plus h for bias (default h=0); see the syntax below
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value = "bias")]
        quantity: Quantity,
    },
    /// Run acceptance suites; exit 0 iff all pass
    Verify {
        /// all, prime-core, dickman, saddle, bias, sampler, gradients, or 1-12
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] friable::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("{0} of {1} criteria failed")]
    Verification(usize, usize),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Lib(friable::Error::Domain(_)) => 2,
            Failure::Lib(friable::Error::Resource { .. }) => 3,
            Failure::Lib(friable::Error::Numerical(_)) | Failure::Io(_) | Failure::Verification(..) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' must be finite and > 0"))
    }
}

/// Integer, possibly written as `1e6`.
fn parse_int(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 9.2e18 {
        Ok(v as u64)
    } else {
        Err(format!("'{s}' is not a non-negative integer below 2^63"))
    }
}

/// Integers below 2^63 are kept exact; anything else is carried by its log.
fn parse_magnitude(s: &str) -> Result<Magnitude, String> {
    if let Ok(v) = parse_int(s) {
        if v == 0 {
            return Err("value must be >= 1".into());
        }
        return Ok(Magnitude::Int(v));
    }
    Ok(Magnitude::Log(parse_positive(s)?.ln()))
}

fn table_for(y: u64) -> Result<PrimeTable, Failure> {
    Ok(PrimeTable::new(y)?)
}

fn grid_for(t_max: f64) -> Result<std::borrow::Cow<'static, DickmanGrid>, Failure> {
    if t_max == friable::dickman::DEFAULT_T_MAX {
        Ok(std::borrow::Cow::Borrowed(DickmanGrid::shared()))
    } else {
        Ok(std::borrow::Cow::Owned(DickmanGrid::new(t_max)?))
    }
}

fn alpha_row(log_x: f64, table: &PrimeTable) -> Result<Row, Failure> {
    let sp = solve_alpha(log_x, table)?;
    Ok(Row::new()
        .with("log_x", sp.log_x)
        .with("y", sp.y)
        .with("u", sp.u)
        .with("ubar", sp.ubar)
        .with("alpha", sp.alpha)
        .with("log_zeta", sp.log_zeta)
        .with("sigma1", sp.sigma1)
        .with("sigma2", sp.sigma2)
        .with("sigma3", sp.sigma3)
        .with("sigma4", sp.sigma4)
        .with("theta", sp.theta))
}

fn psi_row(x: Magnitude, table: &PrimeTable, method: PsiMethod, budget: Budget) -> Result<Row, Failure> {
    let row = Row::new().with("log_x", x.ln()).with("y", table.bound());
    Ok(match method {
        PsiMethod::Exact => {
            let Magnitude::Int(n) = x else {
                return Err(usage("the exact count needs an integer x below 2^63"));
            };
            let psi = psi_exact(n, table, budget)?;
            row.with("method", "exact").with("psi", psi).with("ln_psi", (psi as f64).ln()).with("overflow", false)
        }
        PsiMethod::Saddle => {
            let est = psi_saddle(&solve_alpha(x.ln(), table)?);
            row.with("method", "saddle")
                .with("psi", est.value())
                .with("ln_psi", est.ln)
                .with("overflow", est.overflows())
        }
    })
}

fn bias_row(r: &friable::BiasReport) -> Row {
    Row::new()
        .with("log_x", r.log_x)
        .with("y", r.y)
        .with("log_z", r.log_z)
        .with("u", r.u)
        .with("ubar", r.ubar)
        .with("w", r.w)
        .with("alpha", r.alpha)
        .with("theta", r.theta)
        .with("h", r.h)
        .with("p_exact", r.p_exact)
        .with("p_gaussian", r.p_gaussian)
        .with("p_kappa", r.p_kappa)
        .with("gaussian_minus_exact", r.gaussian_minus_exact)
        .with("kappa_minus_exact", r.kappa_minus_exact)
}

fn delta_row(r: &friable::DeltaReport) -> Row {
    Row::new()
        .with("log_x", r.log_x)
        .with("y", r.y)
        .with("u", r.u)
        .with("ubar", r.ubar)
        .with("alpha", r.alpha)
        .with("beta", r.beta)
        .with("s2", r.s2)
        .with("z_ratio", r.z_ratio)
        .with("eps_y", r.eps_y)
        .with("in_h_eps", r.in_h_eps)
        .with("theta", r.theta)
        .with("theta0", r.theta0)
        .with("theta1", r.theta1)
        .with("theta2", r.theta2)
        .with("delta_theta", r.delta_theta)
        .with("nu_u", r.nu_u)
        .with("delta_drappeau", r.delta_drappeau)
        .with("no_oracle", r.no_oracle)
        .with("delta_exact", r.delta_exact)
        .with("identity_residual", r.identity_residual)
        .with("log_ratio_theta", r.log_ratio_theta)
        .with("ratio_nu", r.ratio_nu)
}

fn bias_cfg(common: &Common) -> BiasConfig {
    BiasConfig { epsilon: common.epsilon, budget: Budget::new(common.budget) }
}

fn delta_method_row(x: Magnitude, table: &PrimeTable, method: Option<DeltaMethod>, common: &Common) -> Result<Row, Failure> {
    let cfg = bias_cfg(common);
    let log_x = x.ln();
    let y = table.bound();
    let grid = DickmanGrid::shared();
    let base = || Row::new().with("log_x", log_x).with("y", y);
    Ok(match method {
        None => delta_row(&delta_report(x, table, grid, cfg)?),
        Some(DeltaMethod::Exact) => {
            let Magnitude::Int(n) = x else {
                return Err(usage("the exact defect needs an integer x below 2^63"));
            };
            let e = bias::delta_exact(n, table, cfg.budget)?;
            base()
                .with("psi", e.psi)
                .with("psi_tau", e.psi_tau)
                .with("d", e.d)
                .with("delta_exact", e.delta)
                .with("sum_r", e.sum_r)
                .with("identity_residual", e.identity_residual)
        }
        Some(DeltaMethod::Nu) => {
            let nu = bias::delta_nu(log_x, y, grid, cfg.epsilon)?;
            base().with("u", log_x / (y as f64).ln()).with("nu_u", nu)
        }
        Some(DeltaMethod::Theta) => {
            let (central, half_width) = delta_theta(log_x, y, cfg.epsilon)?;
            let fam = theta_family(log_x, y, cfg.epsilon)?;
            base()
                .with("theta", fam.theta)
                .with("in_h_eps", fam.in_h_eps)
                .with("delta_theta", central)
                .with("log_half_width", half_width)
        }
    })
}

fn dickman_rows(spec: &str, with_rho2: bool, t_max: f64) -> Result<Vec<Row>, Failure> {
    let ts = grid::parse_values(spec).map_err(|e| usage(e.to_string()))?;
    let g = grid_for(t_max)?;
    ts.iter()
        .map(|&t| {
            let mut row = Row::new().with("t", t).with("rho", g.rho(t)?).with("ln_rho", g.ln_rho(t)?);
            if with_rho2 {
                row = row.with("rho2", g.rho2(t)?);
            }
            let xv = if t >= 1.0 { Some(xi(t)?) } else { None };
            Ok(row.with("xi", xv.map(|v| v.xi)).with("xi_prime", xv.map(|v| v.xi_prime)))
        })
        .collect()
}

fn table_rows(spec: &str, quantity: Quantity, common: &Common) -> Result<Vec<Row>, Failure> {
    let g = Grid::parse(spec).map_err(|e| usage(e.to_string()))?;
    let allowed: &[&str] = match quantity {
        Quantity::Bias => &["x", "y", "h"],
        _ => &["x", "y"],
    };
    g.check(allowed, &["x", "y"]).map_err(|e| usage(e.to_string()))?;
    let xs = g.axis("x").unwrap();
    let ys: Vec<u64> = g
        .axis("y")
        .unwrap()
        .iter()
        .map(|&v| parse_int(&v.to_string()).map_err(usage))
        .collect::<Result<_, _>>()?;
    let hs = g.axis("h").map_or(vec![0.0], <[f64]>::to_vec);

    let mut tables = HashMap::new();
    for &y in &ys {
        if let std::collections::hash_map::Entry::Vacant(e) = tables.entry(y) {
            e.insert(table_for(y)?);
        }
    }
    let mut points = Vec::new();
    for &x in xs {
        let xm = parse_magnitude(&x.to_string()).map_err(usage)?;
        for &y in &ys {
            let needs_x_ge_y = matches!(quantity, Quantity::Bias | Quantity::Delta);
            if needs_x_ge_y && xm.ln() < (y as f64).ln() {
                continue;
            }
            for &h in &hs {
                points.push((xm, y, h));
            }
        }
    }
    let cfg = bias_cfg(common);
    let budget = Budget::new(common.budget);
    let dickman = DickmanGrid::shared();
    points
        .par_iter()
        .map(|&(x, y, h)| {
            let t = &tables[&y];
            match quantity {
                Quantity::Alpha => alpha_row(x.ln(), t),
                Quantity::Psi => {
                    let saddle = psi_saddle(&solve_alpha(x.ln(), t)?);
                    let exact = match x {
                        Magnitude::Int(n) => match psi_exact(n, t, budget) {
                            Ok(v) => Some(v),
                            Err(friable::Error::Resource { .. }) => None,
                            Err(e) => return Err(e.into()),
                        },
                        Magnitude::Log(_) => None,
                    };
                    Ok(Row::new()
                        .with("log_x", x.ln())
                        .with("y", y)
                        .with("psi_exact", exact)
                        .with("ln_psi_saddle", saddle.ln)
                        .with("ratio", exact.map(|e| (saddle.ln - (e as f64).ln()).exp())))
                }
                Quantity::Bias => {
                    let sp = solve_alpha(x.ln(), t)?;
                    let log_z = bias::log_z_of(&sp, h);
                    let z = if h == 0.0 { x } else { Magnitude::Log(log_z) };
                    let r = bias_report(x.ln(), z, t, dickman, cfg)?;
                    Ok(bias_row(&r))
                }
                Quantity::Delta => Ok(delta_row(&delta_report(x, t, dickman, cfg)?)),
            }
        })
        .collect()
}

fn load_tolerances(common: &Common) -> Result<Tolerances, Failure> {
    match &common.tol_file {
        None => Ok(Tolerances::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Tolerances::from_toml(&text).map_err(|e| usage(format!("tolerance file {}: {e}", path.display())))
        }
    }
}

fn open_out(common: &Common) -> Result<Box<dyn Write>, Failure> {
    Ok(match &common.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let common = &cli.common;
    let format = common.format.unwrap_or(Format::Csv);
    let budget = Budget::new(common.budget);
    if !(common.epsilon > 0.0) {
        return Err(usage("--epsilon must be > 0"));
    }
    let rows = match &cli.cmd {
        Cmd::Alpha { x, y } => vec![alpha_row(x.get().ln(), &table_for(*y)?)?],
        Cmd::Psi { x, y, method } => vec![psi_row(x.get(), &table_for(*y)?, *method, budget)?],
        Cmd::Bias { x, y, z, logz, h } => {
            let x = x.get();
            let t = table_for(*y)?;
            let z = match (z, logz, h) {
                (Some(z), _, _) => *z,
                (_, Some(l), _) => Magnitude::Log(*l),
                (_, _, Some(h)) => Magnitude::Log(bias::log_z_of(&solve_alpha(x.ln(), &t)?, *h)),
                _ => return Err(usage("one of --z, --logz, --h is required")),
            };
            vec![bias_row(&bias_report(x.ln(), z, &t, DickmanGrid::shared(), bias_cfg(common))?)]
        }
        Cmd::Delta { x, y, method } => vec![delta_method_row(x.get(), &table_for(*y)?, *method, common)?],
        Cmd::Dickman { t, rho2, t_max } => dickman_rows(t, *rho2, *t_max)?,
        Cmd::Kappa { u, w } => {
            let k = DickmanGrid::shared().kappa(*u, *w)?;
            vec![Row::new().with("u", *u).with("w", *w).with("kappa", k)]
        }
        Cmd::Sample { x, y, n, seed, z } => {
            let x = x.get();
            let t = table_for(*y)?;
            let sp = solve_alpha(x.ln(), &t)?;
            let log_z = z.unwrap_or(x).ln();
            let s = estimate_p(&sp, &t, log_z, *n, *seed)?;
            vec![Row::new()
                .with("log_x", sp.log_x)
                .with("y", sp.y)
                .with("log_z", log_z)
                .with("seed", *seed)
                .with("n_draws", s.n_draws)
                .with("mean_log_n", s.mean_log_n)
                .with("var_log_n", s.var_log_n)
                .with("sigma2", sp.sigma2)
                .with("frac_le_z", s.frac_le_z)
                .with("ci_halfwidth", s.ci_halfwidth)]
        }
        Cmd::Table { grid, quantity } => table_rows(grid, *quantity, common)?,
        Cmd::Verify { suite } => return verify(suite, common),
    };
    let mut out = open_out(common)?;
    write_rows(&mut out, format, &rows)?;
    out.flush()?;
    Ok(())
}

fn verify(suite: &str, common: &Common) -> Result<(), Failure> {
    let suite: Suite = suite.parse().map_err(|e: friable::Error| usage(e.to_string()))?;
    let tol = load_tolerances(common)?;
    let outcomes: Vec<_> = suite.criteria().into_par_iter().map(|id| run_criterion(id, &tol)).collect();
    let mut out = open_out(common)?;
    match common.format {
        None => {
            for o in &outcomes {
                writeln!(out, "{o}")?;
            }
        }
        Some(format) => {
            let rows: Vec<Row> = outcomes
                .iter()
                .map(|o| {
                    Row::new()
                        .with("criterion", o.id as u64)
                        .with("name", o.name)
                        .with("passed", o.passed)
                        .with("detail", Value::Text(o.detail.clone()))
                })
                .collect();
            write_rows(&mut out, format, &rows)?;
        }
    }
    out.flush()?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(Failure::Verification(failed, outcomes.len()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("friable: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
