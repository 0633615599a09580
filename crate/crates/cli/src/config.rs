//! Flag and config-file handling.
//!
//! Every knob can come from `--flag` or from a TOML file named by
//! `--config`; flags win field by field. All validation happens here,
//! before any physics runs, and every rejection names the offending key.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use cvcluster_core::{BinRange, FreqWindow, PumpComponent, PumpSpec};

/// Exit code 2: a flag or config value was rejected before any compute.
/// Exit code 3: the numbers violated a contract mid-compute.
/// Exit code 4: the filesystem got in the way.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {key}: {message}")]
    Config { key: String, message: String },
    #[error("numerical contract violated: {0}")]
    Numerical(String),
    #[error("io error: {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn config(key: &str, message: impl fmt::Display) -> Self {
        CliError::Config { key: key.to_string(), message: message.to_string() }
    }

    pub fn numerical(err: impl fmt::Display) -> Self {
        CliError::Numerical(err.to_string())
    }

    pub fn io(path: impl fmt::Display, err: impl fmt::Display) -> Self {
        CliError::Io { path: path.to_string(), message: err.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cvcluster", version, about = "OPO comb cluster-state toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PPT values of the four-mode block over a rotation-angle grid (csv)
    PptScan(CommonArgs),
    /// Supermode eigenvalues, variances, and coefficients (csv)
    Supermodes(CommonArgs),
    /// Dual-rail wire graph from a two-frequency pump (json or dot)
    DualRail(CommonArgs),
    /// Staggered 2D lattice at fixed angles (json or dot)
    Lattice(CommonArgs),
    /// Staggered lattice under a per-bin angle schedule (json or dot)
    TimeVarying(CommonArgs),
    /// Pump/signal/idler overlap integrals for order-2 pumps (csv)
    Overlap(CommonArgs),
}

impl Command {
    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::PptScan(a)
            | Command::Supermodes(a)
            | Command::DualRail(a)
            | Command::Lattice(a)
            | Command::TimeVarying(a)
            | Command::Overlap(a) => a,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML file providing any of the other knobs
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Interaction strength (dimensionless squeezing parameter)
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,

    /// First pump rotation, radians or e.g. "0.125pi"
    #[arg(long, value_name = "ANGLE", allow_hyphen_values = true)]
    pub theta1: Option<String>,

    /// Second pump rotation, radians or e.g. "0.25pi"
    #[arg(long, value_name = "ANGLE", allow_hyphen_values = true)]
    pub theta2: Option<String>,

    /// First pump frequency index
    #[arg(long, allow_negative_numbers = true)]
    pub p1: Option<i32>,

    /// Second pump frequency index
    #[arg(long, allow_negative_numbers = true)]
    pub p2: Option<i32>,

    /// Simulated comb window, inclusive, as "a:b"
    #[arg(long, value_name = "a:b", allow_hyphen_values = true)]
    pub window: Option<String>,

    /// Simulated time-bin range, inclusive, as "a:b"
    #[arg(long, value_name = "a:b", allow_hyphen_values = true)]
    pub bins: Option<String>,

    /// Number of scan angles over [0, pi/4]
    #[arg(long)]
    pub grid_points: Option<usize>,

    /// Output file (stdout when omitted); written atomically
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Output format: csv, json, or dot (command-dependent default)
    #[arg(long)]
    pub format: Option<String>,
}

/// An angle in a config file: a bare number is radians, a string may
/// carry a "pi" suffix ("0.125pi", "-pi").
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum AngleValue {
    Radians(f64),
    Text(String),
}

impl AngleValue {
    fn radians(&self, key: &str) -> Result<f64, CliError> {
        match self {
            AngleValue::Radians(x) => Ok(*x),
            AngleValue::Text(s) => {
                parse_angle(s).map_err(|message| CliError::Config { key: key.to_string(), message })
            }
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub gamma: Option<f64>,
    pub theta1: Option<AngleValue>,
    pub theta2: Option<AngleValue>,
    pub p1: Option<i32>,
    pub p2: Option<i32>,
    pub window: Option<String>,
    pub bins: Option<String>,
    pub grid_points: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub schedule_period: Option<u32>,
    #[serde(default)]
    pub schedule: Vec<ScheduleEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub bin: i32,
    pub theta1: AngleValue,
    pub theta2: AngleValue,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Dot,
}

impl Format {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "dot" => Ok(Format::Dot),
            other => Err(CliError::config(
                "format",
                format!("unknown format '{other}'; expected csv, json, or dot"),
            )),
        }
    }
}

/// "0.125pi" or "-pi" or plain radians.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(prefix) = t.strip_suffix("pi") {
        let factor = match prefix.trim() {
            "" => 1.0,
            "-" => -1.0,
            p => p
                .parse::<f64>()
                .map_err(|_| format!("cannot parse '{s}' as a multiple of pi"))?,
        };
        return Ok(factor * std::f64::consts::PI);
    }
    t.parse::<f64>()
        .map_err(|_| format!("cannot parse '{s}' as an angle; use radians or a pi suffix like 0.125pi"))
}

fn parse_range(s: &str, key: &str) -> Result<(i32, i32), CliError> {
    let bad = || CliError::config(key, format!("cannot parse '{s}'; expected \"a:b\" with integers"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: i32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i32 = hi.trim().parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

/// One schedule row with its angles already in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolvedEntry {
    pub bin: i32,
    pub theta1: f64,
    pub theta2: f64,
}

/// Everything a command needs, merged from flags and file and validated.
#[derive(Clone, Debug)]
pub struct Settings {
    pub gamma: Option<f64>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
    pub p1: i32,
    pub p2: i32,
    pub window: FreqWindow,
    pub bins: BinRange,
    pub grid_points: usize,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub schedule: Vec<ResolvedEntry>,
    pub schedule_period: Option<u32>,
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::config("config", e.message()))?
            }
            None => FileConfig::default(),
        };

        let theta1 = merge_angle(args.theta1.as_deref(), file.theta1.as_ref(), "theta1")?;
        let theta2 = merge_angle(args.theta2.as_deref(), file.theta2.as_ref(), "theta2")?;

        let gamma = args.gamma.or(file.gamma);
        if let Some(g) = gamma {
            if !g.is_finite() || g < 0.0 {
                return Err(CliError::config("gamma", format!("must be finite and nonnegative, got {g}")));
            }
        }

        let p1 = args.p1.or(file.p1).unwrap_or(1);
        let p2 = args.p2.or(file.p2).unwrap_or(3);
        if p1 == p2 {
            return Err(CliError::config("p2", format!("pump lines must differ, both are {p1}")));
        }

        let window_text = args.window.clone().or(file.window).unwrap_or_else(|| "-2:4".to_string());
        let (n_min, n_max) = parse_range(&window_text, "window")?;
        let window = FreqWindow::new(n_min, n_max).map_err(|e| CliError::config("window", e))?;

        let bins_text = args.bins.clone().or(file.bins).unwrap_or_else(|| "0:5".to_string());
        let (lo, hi) = parse_range(&bins_text, "bins")?;
        let bins = BinRange::new(lo, hi).map_err(|e| CliError::config("bins", e))?;

        let grid_points = args.grid_points.or(file.grid_points).unwrap_or(33);
        if grid_points < 2 {
            return Err(CliError::config("grid_points", format!("need at least 2 angles, got {grid_points}")));
        }

        let format = match args.format.as_deref().or(file.format.as_deref()) {
            Some(s) => Some(Format::parse(s)?),
            None => None,
        };

        let mut schedule = Vec::with_capacity(file.schedule.len());
        for entry in &file.schedule {
            if schedule.iter().any(|r: &ResolvedEntry| r.bin == entry.bin) {
                return Err(CliError::config("schedule", format!("bin {} listed twice", entry.bin)));
            }
            schedule.push(ResolvedEntry {
                bin: entry.bin,
                theta1: entry.theta1.radians("schedule.theta1")?,
                theta2: entry.theta2.radians("schedule.theta2")?,
            });
        }

        if let Some(period) = file.schedule_period {
            if period == 0 {
                return Err(CliError::config("schedule_period", "must be positive"));
            }
        }

        Ok(Settings {
            gamma,
            theta1,
            theta2,
            p1,
            p2,
            window,
            bins,
            grid_points,
            format,
            out: args.out.clone().or(file.out),
            schedule,
            schedule_period: file.schedule_period,
        })
    }

    pub fn require_gamma(&self) -> Result<f64, CliError> {
        self.gamma.ok_or_else(|| CliError::config("gamma", "required for this command"))
    }

    pub fn require_theta1(&self) -> Result<f64, CliError> {
        self.theta1.ok_or_else(|| CliError::config("theta1", "required for this command"))
    }

    pub fn require_theta2(&self) -> Result<f64, CliError> {
        self.theta2.ok_or_else(|| CliError::config("theta2", "required for this command"))
    }

    /// The format to use, with the command's default when unset, checked
    /// against what the command can actually emit.
    pub fn format_among(&self, default: Format, allowed: &[Format]) -> Result<Format, CliError> {
        let chosen = self.format.unwrap_or(default);
        if allowed.contains(&chosen) {
            Ok(chosen)
        } else {
            let names: Vec<&str> = allowed
                .iter()
                .map(|f| match f {
                    Format::Csv => "csv",
                    Format::Json => "json",
                    Format::Dot => "dot",
                })
                .collect();
            Err(CliError::config(
                "format",
                format!("this command emits {} only", names.join(" or ")),
            ))
        }
    }

    /// Fixed-angle pump from theta1/theta2.
    pub fn static_pump(&self) -> Result<PumpSpec, CliError> {
        Ok(PumpSpec::dual(self.p1, self.require_theta1()?, self.p2, self.require_theta2()?))
    }

    /// Scheduled pump covering every simulated bin, applying
    /// `schedule_period` when set. Missing bins are caught here so the
    /// compute stage never sees a hole.
    pub fn scheduled_pump(&self) -> Result<PumpSpec, CliError> {
        if self.schedule.is_empty() {
            return Err(CliError::config("schedule", "time-varying needs [[schedule]] entries"));
        }
        let mut map1 = BTreeMap::new();
        let mut map2 = BTreeMap::new();
        for k in self.bins.iter() {
            let lookup = match self.schedule_period {
                Some(period) => k.rem_euclid(period as i32),
                None => k,
            };
            let entry = self
                .schedule
                .iter()
                .find(|e| e.bin == lookup)
                .ok_or_else(|| CliError::config("schedule", format!("no entry covers bin {k}")))?;
            map1.insert(k, entry.theta1);
            map2.insert(k, entry.theta2);
        }
        Ok(PumpSpec {
            components: vec![
                PumpComponent::new(self.p1, 0.0).with_schedule(map1),
                PumpComponent::new(self.p2, 0.0).with_schedule(map2),
            ],
        })
    }
}

fn merge_angle(
    flag: Option<&str>,
    file: Option<&AngleValue>,
    key: &str,
) -> Result<Option<f64>, CliError> {
    if let Some(s) = flag {
        return parse_angle(s)
            .map(Some)
            .map_err(|message| CliError::Config { key: key.to_string(), message });
    }
    match file {
        Some(v) => v.radians(key).map(Some),
        None => Ok(None),
    }
}
