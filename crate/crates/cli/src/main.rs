//! `bpskit`: batch front end for the BPS toolkit.
//!
//! Every numeric flag can also be set through an environment variable; an
//! explicit flag wins over the environment, which wins over the built-in default.
//!
//! Exit codes: 0 when every requested check passes, 1 on a verification
//! failure, 2 on bad input.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use bps_core::gv_partition::SignMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bpskit", version, about = "BPS structures, flat sections and Gopakumar-Vafa identities")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Truncation orders, cutoffs, tolerances and output settings shared by all subcommands.
#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// Truncation order in the formal variable `s`.
    #[arg(long, global = true, env = "BPSKIT_S_ORDER", default_value_t = 3)]
    pub s_order: u32,
    /// Truncation order in `u`.
    #[arg(long, global = true, env = "BPSKIT_U_ORDER", default_value_t = 8)]
    pub u_order: i32,
    /// Truncation order in `q`; also the number of `q`-powers in numeric sums.
    #[arg(long, global = true, env = "BPSKIT_Q_ORDER", default_value_t = 6)]
    pub q_order: u32,
    /// Largest `|m|` summed in the D0-charge direction.
    #[arg(long, global = true, env = "BPSKIT_M_WINDOW", default_value_t = 200)]
    pub m_window: u32,
    /// Largest multiple `k` kept in logarithm expansions and lattice sums.
    #[arg(long, global = true, env = "BPSKIT_K_MAX", default_value_t = 20)]
    pub k_max: u32,
    /// Pass/fail tolerance for numeric checks.
    #[arg(long, global = true, env = "BPSKIT_TOL", default_value_t = 1e-6)]
    pub tol: f64,
    /// Kernel convention for the exact series check: `resolved` or `literal`.
    #[arg(long, global = true, env = "BPSKIT_SIGN_MODE", default_value = "resolved", value_parser = parse_sign_mode)]
    pub sign_mode: SignMode,
    /// Significant digits in CSV output.
    #[arg(long, global = true, env = "BPSKIT_PRECISION", default_value_t = 12)]
    pub precision: usize,
    /// Output directory.
    #[arg(long, global = true, env = "BPSKIT_OUT", default_value = ".")]
    pub out: PathBuf,
}

fn parse_sign_mode(s: &str) -> Result<SignMode, String> {
    s.parse().map_err(|e: bps_core::Error| e.to_string())
}

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.u_order >= 0, "--u-order must be >= 0, got {}", self.u_order);
        anyhow::ensure!(self.tol > 0.0, "--tol must be positive, got {}", self.tol);
        anyhow::ensure!(self.k_max > 0, "--k-max must be positive");
        anyhow::ensure!((1..=17).contains(&self.precision), "--precision must lie in 1..=17");
        Ok(())
    }
}

/// Curve-class selection and the numeric point at which closed forms are evaluated.
#[derive(Args, Debug, Clone)]
pub struct GvInput {
    /// Gopakumar-Vafa table: `[{"class": [..], "degrees": {"g": n}}]`.
    #[arg(long)]
    pub gv: PathBuf,
    /// Restrict to one curve class, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub class: Option<Vec<i64>>,
    /// Geometry JSON supplying `omega . beta` and `<D, beta>`.
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// Value of `epsilon` for numeric evaluation.
    #[arg(long, default_value_t = 0.17, allow_hyphen_values = true)]
    pub epsilon: f64,
    /// `omega . beta`, used when no geometry is given.
    #[arg(long, default_value_t = 0.5)]
    pub degree: f64,
    /// `<D, beta>`, used when the geometry has no divisor.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub d_beta: i64,
}

#[derive(Args, Debug, Clone)]
pub struct BpsInput {
    /// BPS structure: `{"rank", "pairing", "charges": [[re, im]], "spectrum": [[coords, "p/q"]]}`.
    #[arg(long)]
    pub bps: PathBuf,
    /// Target charge `a` of `x_a`, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Vec<i64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Grid {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Exponential {
    Plus,
    Minus,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// GV -> sheaf -> Omega tables, and DT invariants of a BPS structure on each active ray.
    Convert {
        /// Gopakumar-Vafa table to convert.
        #[arg(long)]
        gv: Option<PathBuf>,
        /// BPS structure whose active rays get DT tables.
        #[arg(long)]
        bps: Option<PathBuf>,
    },
    /// Samples the flat section on a ray and writes one CSV row per (t, s-power, charge).
    FlatSection {
        #[command(flatten)]
        input: BpsInput,
        /// Angle of the sampling ray in radians.
        #[arg(long, allow_hyphen_values = true)]
        ray_angle: f64,
        #[arg(long, default_value_t = 0.1)]
        t_min: f64,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Grid::Log)]
        grid: Grid,
        #[arg(long, value_enum, default_value_t = Exponential::Minus)]
        exponential: Exponential,
    },
    /// Compares the two one-sided limits of the flat section across an active ray.
    JumpCheck {
        #[command(flatten)]
        input: BpsInput,
        /// Active ray angle; defaults to the first active ray.
        #[arg(long, allow_hyphen_values = true)]
        ray_angle: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_abs: f64,
    },
    /// Exact series check of the differential identity, Omega symmetry and optional extras.
    VerifyTheorem {
        #[command(flatten)]
        input: GvInput,
        /// Omega tables to check for `n -> -n` symmetry: `[{"class": [..], "omega": {"n": v}}]`.
        #[arg(long)]
        omega: Option<PathBuf>,
        /// Also require the `eps -> 0` genus-zero limit to hold.
        #[arg(long)]
        check_limit: bool,
        /// Also run a jump check on this BPS structure (uses --target).
        #[arg(long)]
        bps: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        target: Option<Vec<i64>>,
        /// Also run the large-t suite.
        #[arg(long)]
        asymptotics: bool,
    },
    /// Large-t suite: coth identity, decay fit and product formula.
    Asymptotics {
        #[command(flatten)]
        input: GvInput,
    },
    /// Plot data for `F_beta(t)` against its large-t limit.
    EmitCurve {
        #[command(flatten)]
        input: GvInput,
        #[arg(long, default_value_t = 0.1)]
        t_min: f64,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Grid::Log)]
        grid: Grid,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
