//! Command-line flags, environment overrides, the optional TOML config file
//! and the resolved run configuration.
//!
//! Each setting is taken from the first source that provides it: a flag,
//! then a `POLYCONF_*` environment variable, then the config file, then the
//! built-in default.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Parser)]
#[command(name = "polyconf", version, about = "Total curvature of confined random equilateral polygons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Mean curvature of confined quadrilaterals on an r grid, with the monotonicity verdict.
    Curve,
    /// Boundary and interior measure densities along the boundary arcs at one r.
    Boundary,
    /// Named numerical checks, written as a report.
    Verify,
    /// Uniform polygons under a diameter constraint.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Quadrature,
    #[value(alias = "mc")]
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureFamily {
    Mu,
    Nu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecArg {
    Sequential,
    Parallel,
}

/// Settings shared by every subcommand. All are optional so that unset
/// flags fall through to the config file and defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Opts {
    /// TOML file with any of the settings below.
    #[arg(long, global = true, env = "POLYCONF_CONFIG")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Number of edges.
    #[arg(long, global = true, env = "POLYCONF_N")]
    pub n: Option<usize>,
    /// Diameter bound.
    #[arg(long, global = true, env = "POLYCONF_R")]
    pub r: Option<f64>,
    /// Lower end of the r grid; for `sample`, the smallest allowed diameter.
    #[arg(long, global = true, env = "POLYCONF_R_MIN")]
    pub r_min: Option<f64>,
    #[arg(long, global = true, env = "POLYCONF_R_MAX")]
    pub r_max: Option<f64>,
    /// Number of r grid points.
    #[arg(long, global = true, env = "POLYCONF_STEPS")]
    pub steps: Option<usize>,
    /// Accepted samples (per r for Monte Carlo curves).
    #[arg(long, global = true, env = "POLYCONF_SAMPLES")]
    pub samples: Option<usize>,
    /// Samples for the Monte Carlo means in `verify`.
    #[arg(long, global = true, env = "POLYCONF_MC_SAMPLES")]
    pub mc_samples: Option<usize>,
    #[arg(long, global = true, env = "POLYCONF_SEED")]
    pub seed: Option<u64>,
    /// Points per boundary arc.
    #[arg(long, global = true, env = "POLYCONF_GRID_SIZE")]
    pub grid_size: Option<usize>,
    #[arg(long, global = true, env = "POLYCONF_METHOD")]
    pub method: Option<MethodArg>,
    /// One of lemmas, dominance, crofton, alpha, knotproxy, all.
    #[arg(long, global = true, env = "POLYCONF_SUITE")]
    pub suite: Option<String>,
    /// Boundary measures to tabulate.
    #[arg(long, global = true, env = "POLYCONF_MEASURE")]
    pub measure: Option<MeasureFamily>,
    /// Convergence tolerance of the curvature quadrature.
    #[arg(long, global = true, env = "POLYCONF_TOL")]
    pub tol: Option<f64>,
    /// Step of the central difference in the Crofton residual.
    #[arg(long, global = true, env = "POLYCONF_H")]
    pub h: Option<f64>,
    #[arg(long, global = true, env = "POLYCONF_EXEC")]
    pub exec: Option<ExecArg>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, env = "POLYCONF_OUT")]
    pub out: Option<PathBuf>,
    /// Defaults to json for `verify` and csv otherwise.
    #[arg(long, global = true, env = "POLYCONF_FORMAT")]
    pub format: Option<Format>,
}

impl Opts {
    /// Fills every unset field from `other`.
    fn or(self, other: Opts) -> Opts {
        Opts {
            config: self.config.or(other.config),
            n: self.n.or(other.n),
            r: self.r.or(other.r),
            r_min: self.r_min.or(other.r_min),
            r_max: self.r_max.or(other.r_max),
            steps: self.steps.or(other.steps),
            samples: self.samples.or(other.samples),
            mc_samples: self.mc_samples.or(other.mc_samples),
            seed: self.seed.or(other.seed),
            grid_size: self.grid_size.or(other.grid_size),
            method: self.method.or(other.method),
            suite: self.suite.or(other.suite),
            measure: self.measure.or(other.measure),
            tol: self.tol.or(other.tol),
            h: self.h.or(other.h),
            exec: self.exec.or(other.exec),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
        }
    }
}

/// Fully resolved settings of one run; echoed into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    /// `None` means unconfined for `sample`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    pub steps: usize,
    pub samples: usize,
    pub mc_samples: usize,
    pub seed: u64,
    pub grid_size: usize,
    pub method: MethodArg,
    pub suite: String,
    pub measure: MeasureFamily,
    pub tol: f64,
    pub h: f64,
    pub exec: ExecArg,
    /// Not echoed, so the same run written to two paths gives identical files.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;
pub const DEFAULT_STEPS: usize = 21;

fn read_config_file(path: &Path) -> Result<Opts, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("invalid config file {}: {e}", path.display())))
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl RunConfig {
    /// Merges the sources and validates every field the command uses.
    pub fn resolve(command: Command, flags: Opts) -> Result<Self, Failure> {
        let file = match &flags.config {
            Some(path) => read_config_file(path)?,
            None => Opts::default(),
        };
        let o = flags.or(file);
        let n = o.n.unwrap_or(4);
        let cfg = RunConfig {
            command,
            n,
            r: match command {
                Command::Boundary => Some(o.r.unwrap_or(1.2)),
                _ => o.r,
            },
            r_min: match command {
                Command::Curve => Some(o.r_min.unwrap_or(1.0)),
                _ => o.r_min,
            },
            r_max: match command {
                Command::Curve => Some(o.r_max.unwrap_or(2.0)),
                _ => None,
            },
            steps: o.steps.unwrap_or(DEFAULT_STEPS),
            samples: o.samples.unwrap_or(DEFAULT_SAMPLES),
            mc_samples: o.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            grid_size: o.grid_size.unwrap_or(polyconf::measures::DEFAULT_GRID),
            method: o.method.unwrap_or(MethodArg::Quadrature),
            suite: o.suite.unwrap_or_else(|| "all".into()),
            measure: o.measure.unwrap_or(MeasureFamily::Mu),
            tol: o.tol.unwrap_or(polyconf::crofton::KAPPA_TOL),
            h: o.h.unwrap_or(polyconf::crofton::DEFAULT_H),
            exec: o.exec.unwrap_or(ExecArg::Parallel),
            out: o.out,
            format: o.format.unwrap_or(match command {
                Command::Verify => Format::Json,
                _ => Format::Csv,
            }),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Failure> {
        let positive = |name: &str, v: usize| if v == 0 { Err(usage(format!("--{name} must be positive"))) } else { Ok(()) };
        positive("samples", self.samples)?;
        positive("mc-samples", self.mc_samples)?;
        positive("steps", self.steps)?;
        if self.n < 4 {
            return Err(usage(format!("--n {} is below 4", self.n)));
        }
        if self.grid_size < polyconf::measures::MIN_GRID {
            return Err(usage(format!("--grid-size {} is below {}", self.grid_size, polyconf::measures::MIN_GRID)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(usage(format!("--tol {} must be positive", self.tol)));
        }
        if !(self.h.is_finite() && self.h > 0.0 && self.h < 0.5) {
            return Err(usage(format!("--h {} must lie in (0, 0.5)", self.h)));
        }
        match self.command {
            Command::Curve => {
                let (lo, hi) = (self.r_min.unwrap_or(1.0), self.r_max.unwrap_or(2.0));
                if !(1.0..=2.0).contains(&lo) || !(1.0..=2.0).contains(&hi) {
                    return Err(usage(format!("curve requires --r-min and --r-max in [1, 2], got {lo} and {hi}")));
                }
                if lo > hi || (lo == hi && self.steps > 1) || (lo < hi && self.steps < 2) {
                    return Err(usage(format!(
                        "--r-min {lo}, --r-max {hi} and --steps {} do not form an increasing grid",
                        self.steps
                    )));
                }
            }
            Command::Boundary => {
                let r = self.r.unwrap_or(f64::NAN);
                if !r.is_finite() {
                    return Err(usage("--r must be a finite number"));
                }
            }
            Command::Verify => {
                self.suite.parse::<polyconf::verify::Suite>().map_err(|e| usage(e.to_string()))?;
            }
            Command::Sample => {
                if let Some(r) = self.r {
                    if !(r.is_finite() && r > 0.0) {
                        return Err(usage(format!("--r {r} must be positive")));
                    }
                }
                if let Some(lo) = self.r_min {
                    let m = (self.n / 2) as f64;
                    if !self.n.is_multiple_of(2) || !(lo > m - 1.0 && lo <= m) {
                        return Err(usage(format!(
                            "--r-min selects near-maximal diameters and needs even n with r-min in ({}, {m}], got n = {}, r-min = {lo}",
                            m - 1.0,
                            self.n
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn exec(&self) -> polyconf::par::Exec {
        match self.exec {
            ExecArg::Sequential => polyconf::par::Exec::Sequential,
            ExecArg::Parallel => polyconf::par::Exec::Parallel,
        }
    }

    /// The r grid of `curve`.
    pub fn r_grid(&self) -> Vec<f64> {
        let lo = self.r_min.unwrap_or(1.0);
        let hi = self.r_max.unwrap_or(2.0);
        if self.steps == 1 {
            return vec![lo];
        }
        let k = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { hi } else { lo + (hi - lo) * i as f64 / k })
            .collect()
    }

    /// The effective configuration as `#`-prefixed TOML lines.
    pub fn header_comment(&self) -> String {
        let body = toml::to_string(self).unwrap_or_default();
        body.lines().map(|l| format!("# {l}\n")).collect()
    }
}
