use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::recipe::{ArchKind, CommandKind, CriterionKind, Params, ResidueKind};

#[derive(Debug, Parser)]
#[command(name = "platoonlab", version, about = "String-stability analysis and simulation for vehicle platoons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check robust string stability over every lag in [0, tau0].
    /// Exit code 0 if stable, 2 if violated, 1 on input errors.
    Analyze(AnalyzeArgs),
    /// Print the minimum employable time headway per architecture, or a CSV table over ranges.
    Bounds(BoundsArgs),
    /// Pick gains that make a headway margin eta robustly string stable.
    Synthesize(SynthesizeArgs),
    /// Scan scaled (kp, kv) for a non-negative spacing-error impulse response.
    Nnir(NnirArgs),
    /// Simulate a platoon under a lead-vehicle disturbance.
    Simulate(SimulateArgs),
    /// Run the reference scenarios with headways above and below the bound.
    Table3(Table3Args),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Analyze(_) => CommandKind::Analyze,
            Command::Bounds(_) => CommandKind::Bounds,
            Command::Synthesize(_) => CommandKind::Synthesize,
            Command::Nnir(_) => CommandKind::Nnir,
            Command::Simulate(_) => CommandKind::Simulate,
            Command::Table3(_) => CommandKind::Table3,
        }
    }

    pub fn config(&self) -> &ConfigFlags {
        match self {
            Command::Analyze(a) => &a.config,
            Command::Bounds(a) => &a.config,
            Command::Synthesize(a) => &a.config,
            Command::Nnir(a) => &a.config,
            Command::Simulate(a) => &a.config,
            Command::Table3(a) => &a.config,
        }
    }

    /// Flag values as a parameter set.
    pub fn params(&self) -> Params {
        let mut p = match self {
            Command::Analyze(a) => Params {
                tau0: a.tau0,
                criterion: a.criterion,
                out: a.out.clone(),
                ..a.controller.params()
            },
            Command::Bounds(a) => Params {
                tau0: a.tau0,
                r: a.r,
                r_max: a.r_max,
                ka: a.ka,
                ka_max: a.ka_max,
                ka_step: a.ka_step,
                out: a.out.clone(),
                ..Params::default()
            },
            Command::Synthesize(a) => Params {
                ka: a.ka,
                eta: a.eta,
                tau0: a.tau0,
                out: a.out.clone(),
                ..Params::default()
            },
            Command::Nnir(a) => Params {
                ka: a.ka,
                hw_scaled: a.hw_scaled,
                kp_min: a.kp_min,
                kp_max: a.kp_max,
                kp_points: a.kp_points,
                kv_min: a.kv_min,
                kv_max: a.kv_max,
                kv_points: a.kv_points,
                tau_points: a.tau_points,
                residue_test: a.residue_test,
                out: a.out.clone(),
                ..Params::default()
            },
            Command::Simulate(a) => Params {
                tau: a.tau,
                tau0: a.tau0,
                out: a.out.clone(),
                ..a.disturbance.params().overlay(a.controller.params())
            },
            Command::Table3(a) => Params {
                out: a.out.clone(),
                ..a.disturbance.params()
            },
        };
        p.command = Some(self.kind());
        p
    }
}

#[derive(Debug, Args)]
pub struct ConfigFlags {
    /// Recipe file (TOML); its values override command-line flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Recipe to run when the file defines several.
    #[arg(long, requires = "config")]
    pub recipe: Option<String>,
}

#[derive(Debug, Args)]
pub struct ControllerFlags {
    #[arg(long, value_enum)]
    pub arch: Option<ArchKind>,
    /// Number of predecessors (rpf) or index of the far predecessor (one-and-rth).
    #[arg(long)]
    pub r: Option<usize>,
    /// Position gain [default: 45]
    #[arg(long, allow_negative_numbers = true)]
    pub kp: Option<f64>,
    /// Velocity gain [default: 0.8]
    #[arg(long, allow_negative_numbers = true)]
    pub kv: Option<f64>,
    /// Acceleration feed-forward gain [default: 0.25]
    #[arg(long, allow_negative_numbers = true)]
    pub ka: Option<f64>,
    /// Time headway (s)
    #[arg(long, allow_negative_numbers = true)]
    pub hw: Option<f64>,
    /// Standstill spacing (m) [default: 5]
    #[arg(long)]
    pub d: Option<f64>,
}

impl ControllerFlags {
    fn params(&self) -> Params {
        Params {
            arch: self.arch,
            r: self.r,
            kp: self.kp,
            kv: self.kv,
            ka: self.ka,
            hw: self.hw,
            d: self.d,
            ..Params::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct DisturbanceFlags {
    /// Platoon size including the leader [default: 15]
    #[arg(long)]
    pub n: Option<usize>,
    /// Reference speed (m/s) [default: 20]
    #[arg(long)]
    pub v_r: Option<f64>,
    /// Lead acceleration amplitude (m/s^2) [default: 2]
    #[arg(long, allow_negative_numbers = true)]
    pub amplitude: Option<f64>,
    /// Lead acceleration frequency (rad/s) [default: 1]
    #[arg(long)]
    pub frequency: Option<f64>,
    /// Disturbance start (s) [default: 5]
    #[arg(long)]
    pub t_on: Option<f64>,
    /// Disturbance end (s) [default: 10]
    #[arg(long)]
    pub t_off: Option<f64>,
    /// Disturbance phase (rad) [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub phase: Option<f64>,
    /// Integration step (s) [default: 0.001]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulated duration (s) [default: 40]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Keep every k-th step in the trajectory output [default: 10]
    #[arg(long)]
    pub record_every: Option<usize>,
}

impl DisturbanceFlags {
    fn params(&self) -> Params {
        Params {
            n: self.n,
            v_r: self.v_r,
            amplitude: self.amplitude,
            frequency: self.frequency,
            t_on: self.t_on,
            t_off: self.t_off,
            phase: self.phase,
            dt: self.dt,
            t_end: self.t_end,
            record_every: self.record_every,
            ..Params::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub controller: ControllerFlags,
    /// Upper bound of the actuation lag (s) [default: 0.5]
    #[arg(long)]
    pub tau0: Option<f64>,
    /// Frequency-domain test [default: hinf for one tap, rho otherwise]
    #[arg(long, value_enum)]
    pub criterion: Option<CriterionKind>,
    /// Also write the report to this file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Upper bound of the actuation lag (s) [default: 0.5]
    #[arg(long)]
    pub tau0: Option<f64>,
    /// Number of predecessors, or start of the range with --r-max [default: 1]
    #[arg(long)]
    pub r: Option<usize>,
    /// End of the predecessor range (inclusive).
    #[arg(long)]
    pub r_max: Option<usize>,
    /// Acceleration gain, or start of the range with --ka-max [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub ka: Option<f64>,
    /// End of the acceleration gain range (inclusive).
    #[arg(long)]
    pub ka_max: Option<f64>,
    /// Step of the acceleration gain range [default: 0.05]
    #[arg(long)]
    pub ka_step: Option<f64>,
    /// Also write the output to this file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Acceleration gain in (0, 1)
    #[arg(long, allow_negative_numbers = true)]
    pub ka: Option<f64>,
    /// Relative headway margin above the bound
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Upper bound of the actuation lag (s) [default: 0.5]
    #[arg(long)]
    pub tau0: Option<f64>,
    /// Also write the report to this file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct NnirArgs {
    /// Acceleration gain [default: 0.95]
    #[arg(long, allow_negative_numbers = true)]
    pub ka: Option<f64>,
    /// Scaled headway h_w / tau0 [default: 2 / (1 + ka)]
    #[arg(long)]
    pub hw_scaled: Option<f64>,
    /// [default: 1e-4]
    #[arg(long)]
    pub kp_min: Option<f64>,
    /// [default: 1e-2]
    #[arg(long)]
    pub kp_max: Option<f64>,
    /// [default: 41]
    #[arg(long)]
    pub kp_points: Option<usize>,
    /// [default: 0.01]
    #[arg(long)]
    pub kv_min: Option<f64>,
    /// [default: 0.3]
    #[arg(long)]
    pub kv_max: Option<f64>,
    /// [default: 41]
    #[arg(long)]
    pub kv_points: Option<usize>,
    /// Uniform scaled-lag samples on [0, 1] [default: 21]
    #[arg(long)]
    pub tau_points: Option<usize>,
    /// Lagged-case test [default: exact]
    #[arg(long, value_enum)]
    pub residue_test: Option<ResidueKind>,
    /// Write the CSV here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub controller: ControllerFlags,
    /// Actuation lag used in the simulation (s) [default: tau0]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Upper bound of the actuation lag (s) [default: 0.5]
    #[arg(long)]
    pub tau0: Option<f64>,
    #[command(flatten)]
    pub disturbance: DisturbanceFlags,
    /// Write the trajectory CSV here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigFlags,
}

#[derive(Debug, Args)]
pub struct Table3Args {
    #[command(flatten)]
    pub disturbance: DisturbanceFlags,
    /// Also write the table to this file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigFlags,
}
