//! Command-line front end.
//!
//! Each command reads its parameters from flags, then from the matching
//! table of an optional TOML file (`[build-balanced]`, `[attractor]`, ...),
//! then from built-in defaults. Reports are pretty JSON carrying the
//! SHA-256 of the resolved parameters. The exit code is 0 exactly when every
//! check the command runs passes, 1 when a check fails and 2 on errors.

mod commands;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GifsError, Result};

pub use commands::run_command;

#[derive(Parser, Debug)]
#[command(name = "gifs-lab", version, about = "Balanced Cantor sets, infinite-order GIFS and certified attractors")]
pub struct Cli {
    /// TOML file with one table per command; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a balanced set, verify it, and write tree, report and SVG.
    BuildBalanced(BuildArgs),
    /// Re-verify a stored tree.
    Verify(VerifyArgs),
    /// Iterate a system's Hutchinson operator to its fixed point.
    Attractor(AttractorArgs),
    /// Write the system of transformer maps that reproduces a tree.
    Witness(WitnessArgs),
    /// Write the refined system with every bound below `r`.
    Refine(RefineArgs),
    /// Write the system whose attractor is a tree joined with a finite set.
    Union(UnionArgs),
    /// Certify the declared Lipschitz bounds of a system from cell intervals.
    Certify(CertifyArgs),
    /// Extend a tree's system to all sequences in `R^dim` and check it.
    Extend(ExtendArgs),
    /// Upper bound on the delta-premeasure of a set for a gauge function.
    Premeasure(PremeasureArgs),
    /// Tabulate the retraction discontinuity on the example space.
    AppendixDemo(AppendixArgs),
    /// Export a tree, net or system's tree as CSV, SVG or JSON.
    Export(ExportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::BuildBalanced(_) => "build-balanced",
            Command::Verify(_) => "verify",
            Command::Attractor(_) => "attractor",
            Command::Witness(_) => "witness",
            Command::Refine(_) => "refine",
            Command::Union(_) => "union",
            Command::Certify(_) => "certify",
            Command::Extend(_) => "extend",
            Command::Premeasure(_) => "premeasure",
            Command::AppendixDemo(_) => "appendix-demo",
            Command::Export(_) => "export",
        }
    }
}

/// Field-wise `self.or(other)`.
pub trait Overlay: Sized {
    fn overlay(self, other: Self) -> Self;
}

macro_rules! args_struct {
    ($(#[$meta:meta])* $name:ident { $( $(#[$fmeta:meta])* $field:ident : $ty:ty = $default:expr ),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Args, Serialize, Deserialize, Default, Clone, Debug, PartialEq)]
        #[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            $( $(#[$fmeta])* #[arg(long)] pub $field: Option<$ty>, )*
        }

        impl Overlay for $name {
            fn overlay(self, other: Self) -> Self {
                $name { $( $field: self.$field.or(other.$field), )* }
            }
        }

        impl $name {
            pub fn defaults() -> Self {
                $name { $( $field: $default, )* }
            }
        }
    };
}

args_struct!(BuildArgs {
    /// Separation ratio, at least 2.
    q: f64 = Some(2.0),
    /// Comma-separated arities, e.g. 2,2,8.
    profile: String = Some("2,2,8".into()),
    /// Left end of the ambient interval.
    lo: f64 = Some(0.0),
    /// Right end of the ambient interval.
    hi: f64 = Some(1.0),
    /// Tree JSON output.
    out: PathBuf = Some("tree.json".into()),
    /// Verification report; defaults to `<out>.report.json`.
    report: PathBuf = None,
    /// Cell rendering; defaults to `<out>.svg`.
    svg: PathBuf = None,
});

args_struct!(VerifyArgs {
    tree: PathBuf = None,
    report: PathBuf = None,
});

args_struct!(AttractorArgs {
    /// System description JSON.
    system: PathBuf = None,
    /// Starting net JSON; defaults to one leaf point for tree systems and
    /// a 33-point grid of [0, 1] otherwise.
    s0: PathBuf = None,
    tol: f64 = Some(1e-6),
    max_iter: usize = Some(64),
    /// auto, read-view, exhaustive or anchor-nearest.
    policy: String = Some("auto".into()),
    out: PathBuf = Some("attractor.json".into()),
    trace: PathBuf = Some("trace.csv".into()),
    svg: PathBuf = None,
    report: PathBuf = None,
});

args_struct!(WitnessArgs {
    tree: PathBuf = None,
    /// Ambient dimension; the tree sits on the first axis.
    dim: usize = Some(1),
    out: PathBuf = Some("witness.json".into()),
});

args_struct!(RefineArgs {
    tree: PathBuf = None,
    /// Every map gets a bound strictly below this.
    r: f64 = Some(0.3),
    dim: usize = Some(1),
    out: PathBuf = Some("refined.json".into()),
});

args_struct!(UnionArgs {
    tree: PathBuf = None,
    /// Net JSON of the finite set.
    extra: PathBuf = None,
    /// Comma-separated points on the line, instead of `--extra`.
    points: String = None,
    r: f64 = Some(0.3),
    out: PathBuf = Some("union.json".into()),
});

args_struct!(CertifyArgs {
    system: PathBuf = None,
    report: PathBuf = Some("certificate.json".into()),
});

args_struct!(ExtendArgs {
    /// System or tree JSON providing the balanced set.
    system: PathBuf = None,
    r: f64 = Some(0.5),
    /// Ambient dimension; defaults to the system's.
    dim: usize = None,
    seed: u64 = Some(0),
    /// Random ambient pairs per map for the sampled Lipschitz ratio.
    samples: usize = Some(10_000),
    out: PathBuf = Some("extended.json".into()),
    report: PathBuf = None,
});

args_struct!(PremeasureArgs {
    /// Net JSON of the set.
    set: PathBuf = None,
    /// Tree JSON; supplies cells and, without `--set`, the set itself.
    tree: PathBuf = None,
    /// Use the middle-thirds Cantor cells to this depth.
    cantor: usize = None,
    gauge: String = Some("t^0.6309".into()),
    delta: f64 = Some(1e-3),
    /// cell:N, cell or intervals; defaults to cell with cells available.
    strategy: String = None,
    report: PathBuf = None,
});

args_struct!(AppendixArgs {
    /// Comma-separated values of n.
    n: String = Some("5,10,20,50".into()),
    resolution: f64 = Some(1e-4),
    csv: PathBuf = Some("appendix.csv".into()),
    svg: PathBuf = Some("appendix.svg".into()),
    report: PathBuf = None,
});

args_struct!(ExportArgs {
    tree: PathBuf = None,
    net: PathBuf = None,
    system: PathBuf = None,
    /// Tree level for the CSV net and the SVG bars.
    depth: usize = None,
    csv: PathBuf = None,
    svg: PathBuf = None,
    /// Tree JSON extracted from a system.
    json: PathBuf = None,
});

/// Parameters of one table of the config file, or the default when the
/// table is absent.
pub fn file_section<T: for<'de> Deserialize<'de> + Default>(config: Option<&Path>, section: &str) -> Result<T> {
    let Some(path) = config else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path)?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| GifsError::Parse(format!("{}: {e}", path.display())))?;
    match table.get(section) {
        None => Ok(T::default()),
        Some(v) => v
            .clone()
            .try_into()
            .map_err(|e| GifsError::Parse(format!("[{section}] in {}: {e}", path.display()))),
    }
}

/// Hex SHA-256 of the command name and resolved parameters.
pub fn config_hash<T: Serialize>(command: &str, config: &T) -> Result<String> {
    let body = serde_json::to_string(config)?;
    let digest = Sha256::new_with_prefix(command.as_bytes()).chain_update(b"\n").chain_update(body.as_bytes()).finalize();
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Caps rayon's pool at `GIFS_LAB_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("GIFS_LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_threads();
    match run_command(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
