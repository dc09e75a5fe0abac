use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const AFTER_HELP: &str = "\
Set expressions (--expr) use the grammar
  expr  := expr '|' expr | expr '&' expr | '!' expr | '(' expr ')' | atom
  atom  := poly '=' 0 | 'val(' poly ')' CMP int | 'rv(' poly ')' '=' '(' int ',' int ')'
  poly  := sums and products of integers and x1..xn, with '^' for powers
Balls are written depth:(r1,...,rn), points as comma-separated residues.

Exit codes: 0 success, 1 negative answer, 2 usage or input error, 3 precision exhausted.";

#[derive(Debug, Parser)]
#[command(name = "tstrat", version, about = "Finite-precision t-stratifications over Z/p^m", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Residue characteristic.
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Precision: points live in (Z/p^m)^n.
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Ambient dimension.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Demotion budget of the greedy stratifier.
    #[arg(long, global = true, default_value_t = 100)]
    pub budget: usize,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

/// Where the set or coloring comes from.
#[derive(Debug, Clone, Args)]
pub struct Source {
    /// A named example set (see `tstrat fixtures`).
    #[arg(long, conflicts_with_all = ["expr", "coloring"])]
    pub fixture: Option<String>,
    /// A set expression; needs --p, --m and --n.
    #[arg(long, conflicts_with = "coloring")]
    pub expr: Option<String>,
    /// A coloring in JSON.
    #[arg(long)]
    pub coloring: Option<PathBuf>,
}

/// Where the stratification comes from.
#[derive(Debug, Clone, Args)]
pub struct StratSource {
    /// A stratification in JSON; otherwise the fixture's reference one.
    #[arg(long)]
    pub strat: Option<PathBuf>,
    /// Use the fixture's stratification with an empty S_0.
    #[arg(long)]
    pub no_s0: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a set and list its points.
    Eval {
        #[command(flatten)]
        src: Source,
    },
    /// The tree of balls meeting a set.
    Tree {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        strat: StratSource,
        /// Report the side-branch analysis instead of the tree. Without a
        /// stratification, X is one stratum of its estimated dimension.
        #[arg(long)]
        level: bool,
    },
    /// Check the t-stratification axioms against a coloring.
    Verify {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        strat: StratSource,
    },
    /// Whether a stratification reflects a coloring.
    Reflects {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        strat: StratSource,
    },
    /// Translation space of a coloring on a ball.
    Tsp {
        #[command(flatten)]
        src: Source,
        /// Defaults to the domain of the coloring.
        #[arg(long)]
        ball: Option<String>,
    },
    /// Canonical form of a coloring up to risometry.
    Canon {
        #[command(flatten)]
        src: Source,
    },
    /// Search for a risometry carrying one coloring to another.
    Equiv {
        #[command(flatten)]
        src: Source,
        /// The second coloring, in JSON.
        #[arg(long)]
        other: PathBuf,
    },
    /// Greedy stratification of a coloring.
    Stratify {
        #[command(flatten)]
        src: Source,
        /// Starting label per color, comma separated.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
    },
    /// Exceptional directions around a point.
    Kegel {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        strat: StratSource,
        /// Defaults to the fixture's base point.
        #[arg(long)]
        point: Option<String>,
    },
    /// Valuations of pairs violating the Whitney-type condition in a ball.
    WhitneyB {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        strat: StratSource,
        /// Defaults to the domain of the stratification.
        #[arg(long)]
        ball: Option<String>,
        /// Lower stratum; defaults to the least label in the ball.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Check or search for a Jacobian witness of a polynomial on a set.
    Jacobian {
        #[command(flatten)]
        src: Source,
        /// The polynomial, in the grammar's poly production.
        #[arg(long)]
        poly: String,
        /// Check this z instead of searching for one.
        #[arg(long)]
        z: Option<String>,
    },
    /// List the example sets.
    Fixtures,
}
