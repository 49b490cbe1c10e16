use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

use crate::dto::PolicyDoc;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Pretty,
}

/// Inclusive seed interval written `A..B` (or `A..=B`, or a single `A`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub first: u64,
    pub last: u64,
}

impl SeedRange {
    pub fn count(&self) -> u64 {
        self.last - self.first + 1
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.first..=self.last
    }
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("'{t}' is not a seed in '{s}'"))
        };
        let (first, last) = match s.split_once("..") {
            None => (num(s)?, num(s)?),
            Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
        };
        if last < first {
            return Err(format!("seed range '{s}' is empty"));
        }
        Ok(Self { first, last })
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

/// Dimension caps written `MxN`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
}

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected MxN, got '{s}'"))?;
        let parse = |t: &str| match t.trim().parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(format!("'{t}' is not a positive dimension in '{s}'")),
        };
        Ok(Self {
            m: parse(a)?,
            n: parse(b)?,
        })
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.m, self.n)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gramcone",
    version,
    about = "Pseudoinverse nonnegativity checks for Gram operators over polyhedral cones"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Relative singular-value cutoff for numeric rank.
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,

    #[arg(long, global = true)]
    pub membership_tol: Option<f64>,

    /// Worker threads for sweeps (default: one per core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Also test kernel translates of the condition 5 solutions.
    #[arg(long, global = true)]
    pub strict_cond5: bool,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Evaluate one instance (or instance spec) JSON file.
    Check {
        path: Option<PathBuf>,
        #[arg(long, conflicts_with = "path")]
        input: Option<PathBuf>,
        /// Include the helper-lemma checks.
        #[arg(long)]
        lemmas: bool,
    },
    /// Evaluate a range of seeded random instances.
    Sweep {
        #[arg(long, default_value = "0..999")]
        seeds: SeedRange,
        #[arg(long, default_value = "6x6")]
        dims: Dims,
    },
    /// Reproduce the three diagonal examples at truncation level N.
    Examples {
        #[arg(long, default_value_t = 50)]
        level: usize,
    },
    /// Residuals of the pseudoinverse identities over random matrices and
    /// the example truncations.
    Identities {
        #[arg(long, default_value = "0..499")]
        seeds: SeedRange,
        #[arg(long, default_value = "12x12")]
        dims: Dims,
        #[arg(long, default_value_t = 50)]
        level: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Check { input: PathBuf, lemmas: bool },
    Sweep { seeds: SeedRange, dims: Dims },
    Examples { level: usize },
    Identities { seeds: SeedRange, dims: Dims, level: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output: Option<PathBuf>,
    pub format: Format,
    /// Tolerances that override the defaults and any policy in the input.
    pub policy: PolicyDoc,
    pub workers: Option<usize>,
    pub strict_cond5: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            output: None,
            format: Format::Json,
            policy: PolicyDoc::default(),
            workers: None,
            strict_cond5: false,
        }
    }
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let command = match self.command {
            CommandArgs::Check { path, input, lemmas } => Command::Check {
                input: path
                    .or(input)
                    .ok_or_else(|| CliError::Usage("check needs an input file".into()))?,
                lemmas,
            },
            CommandArgs::Sweep { seeds, dims } => Command::Sweep { seeds, dims },
            CommandArgs::Examples { level } => Command::Examples { level },
            CommandArgs::Identities { seeds, dims, level } => Command::Identities { seeds, dims, level },
        };
        if self.workers == Some(0) {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        let policy = PolicyDoc {
            rank_rel_tol: self.rank_tol,
            membership_tol: self.membership_tol,
            identity_tol: None,
        };
        policy.to_policy().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(RunConfig {
            command,
            output: self.output,
            format: self.format,
            policy,
            workers: self.workers,
            strict_cond5: self.strict_cond5,
        })
    }
}
