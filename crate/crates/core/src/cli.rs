//! Command-line front end.
//!
//! ```
//! use polyconv::cli::{command, FLAG_INVENTORY};
//! let mut names: Vec<String> = Vec::new();
//! fn walk(cmd: &clap::Command, out: &mut Vec<String>) {
//!     for a in cmd.get_arguments() {
//!         if let Some(l) = a.get_long() {
//!             out.push(format!("--{l}"));
//!         }
//!     }
//!     for s in cmd.get_subcommands() {
//!         walk(s, out);
//!     }
//! }
//! let mut cmd = command();
//! cmd.build();
//! walk(&cmd, &mut names);
//! names.sort();
//! names.dedup();
//! let mut expected: Vec<String> = FLAG_INVENTORY.iter().map(|s| s.to_string()).collect();
//! expected.sort();
//! assert_eq!(names, expected);
//! ```

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand};

use crate::dist::literal::{parse_f64, strip_comment};
use crate::dist::{
    class_check, compound_poisson, convolve, format_distribution, parse_distribution, power_exact, ClassGrid,
    DiscreteDistribution,
};
use crate::error::{invalid, Error, Result};
use crate::harness::{
    fit_slope, overall_verdict, read_report_tables, run_experiment, write_reports, ExperimentConfig,
    ExperimentOverrides, DEFAULT_SEED, DEFAULT_TOL, EXPERIMENTS,
};
use crate::poly::{kolmogorov_rho, rho_fixed_directions, rho_m_search, DirectionSet, FixedMode, SearchConfig};

/// Every long flag the parser accepts, across all subcommands.
pub const FLAG_INVENTORY: &[&str] = &[
    "--seed",
    "--out",
    "--tol",
    "--threads",
    "--directions",
    "--search",
    "--config",
    "--family",
    "--quick",
    "--help",
    "--version",
];

/// Exit status for invalid arguments, unreadable inputs and bad configs.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "polyconv", version, about = "Convolution powers, compound Poisson laws and polyhedral distances")]
pub struct Cli {
    /// Random seed for searches and simulations.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; reports go to <out>/<experiment>.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Truncation tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads for experiments.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Operations on distribution literals.
    #[command(subcommand)]
    Dist(DistCommand),
    /// Distance between two distributions over polyhedra.
    Rho {
        g: PathBuf,
        h: PathBuf,
        /// File of directions, one per line; distance over polyhedra with these normals.
        #[arg(long, conflicts_with = "search")]
        directions: Option<PathBuf>,
        /// Lower bound on the distance over polyhedra with this many faces.
        #[arg(long)]
        search: Option<usize>,
    },
    /// Runs a rate experiment: thm1..thm5, highdim or all.
    Experiment {
        name: String,
        /// TOML file with overrides.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Test family used as F.
        #[arg(long)]
        family: Option<String>,
        /// Reduced grids: n <= 128, at most 10^4 samples.
        #[arg(long)]
        quick: bool,
    },
    /// Refits the tables of a report directory.
    Report { dir: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum DistCommand {
    /// F * G.
    Convolve { f: PathBuf, g: PathBuf },
    /// F^n.
    Power { f: PathBuf, n: u64 },
    /// e(alpha F), truncated at tail mass tol.
    Cp { f: PathBuf, alpha: f64, tol: Option<f64> },
    /// Symmetry and characteristic-function class of F.
    Classcheck { f: PathBuf },
}

/// The clap parser, for help output and introspection.
pub fn command() -> clap::Command {
    Cli::command()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn read_dist(path: &Path) -> Result<DiscreteDistribution> {
    parse_distribution(&read(path)?)
}

fn parse_directions(text: &str, dim: usize) -> Result<DirectionSet> {
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = strip_comment(line);
        if line.is_empty() {
            continue;
        }
        let v = line
            .split_whitespace()
            .map(|t| parse_f64(t, i + 1))
            .collect::<Result<Vec<f64>>>()?;
        if v.len() != dim {
            return crate::error::parse_err(i + 1, format!("expected {dim} coordinates, found {}", v.len()));
        }
        raw.push(v);
    }
    DirectionSet::normalized(dim, raw)
}

/// Writes `text` to `dir/name` through a temporary file in `dir`.
fn write_atomic(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    let target = dir.join(name);
    tmp.persist(&target).map_err(|e| Error::Io(e.error))?;
    Ok(target)
}

struct Output {
    out: Option<PathBuf>,
    lines: Vec<String>,
}

impl Output {
    /// Prints the literal, or writes it under `--out` and prints the path.
    fn literal(&mut self, name: &str, f: &DiscreteDistribution, summary: String) -> Result<()> {
        let text = format_distribution(f);
        match &self.out {
            Some(dir) => {
                let path = write_atomic(dir, name, &text)?;
                self.lines.push(format!("wrote {}", path.display()));
            }
            None => self.lines.push(text.trim_end().to_string()),
        }
        self.lines.push(format!("# {summary}"));
        Ok(())
    }
}

fn cmd_dist(cmd: &DistCommand, tol: f64, out: &mut Output) -> Result<()> {
    match cmd {
        DistCommand::Convolve { f, g } => {
            let r = convolve(&read_dist(f)?, &read_dist(g)?)?;
            let s = format!("convolve: {} atoms, mass {:?}", r.len(), r.total_mass());
            out.literal("convolve.dist", &r, s)
        }
        DistCommand::Power { f, n } => {
            let r = power_exact(&read_dist(f)?, *n)?;
            let s = format!("power {n}: {} atoms, mass {:?}", r.len(), r.total_mass());
            out.literal("power.dist", &r, s)
        }
        DistCommand::Cp { f, alpha, tol: t } => {
            let t = t.unwrap_or(tol);
            let r = compound_poisson(*alpha, &read_dist(f)?, t)?;
            let s = format!(
                "cp alpha {alpha:?} tol {t:?}: {} atoms, truncated mass {:?}",
                r.dist.len(),
                r.error_bound
            );
            out.literal("cp.dist", &r.dist, s)
        }
        DistCommand::Classcheck { f } => {
            let f = read_dist(f)?;
            let c = class_check(&f, &ClassGrid::default_for(f.dim()))?;
            out.lines.push(format!("symmetric {}", c.is_symmetric));
            match (c.alpha_lower_bound, c.min_charfn_value) {
                (Some(a), Some(m)) => {
                    out.lines.push(format!("alpha_lower_bound {a:?}"));
                    out.lines.push(format!("min_charfn {m:?}"));
                    out.lines.push(format!("plus_class {}", c.is_plus_class()));
                }
                _ => out.lines.push("alpha_lower_bound undefined".into()),
            }
            out.lines.push(format!("# classcheck: {} grid points, half range {:?}", c.grid_points_checked, c.half_range));
            Ok(())
        }
    }
}

fn cmd_rho(
    g: &Path,
    h: &Path,
    directions: Option<&Path>,
    search: Option<usize>,
    seed: u64,
    out: &mut Output,
) -> Result<()> {
    let g = read_dist(g)?;
    let h = read_dist(h)?;
    if g.dim() != h.dim() {
        return invalid(format!("dimension mismatch: {} vs {}", g.dim(), h.dim()));
    }
    let cert = match (directions, search) {
        (Some(path), _) => {
            let dirs = parse_directions(&read(path)?, g.dim())?;
            rho_fixed_directions(&g, &h, &dirs, FixedMode::default())?
        }
        (None, Some(m)) => rho_m_search(&g, &h, m, &SearchConfig { seed, ..SearchConfig::default() })?,
        (None, None) => kolmogorov_rho(&g, &h)?,
    };
    let text = format!(
        "value {:?}\nmode {}\nwitness\n{}",
        cert.value,
        cert.mode.as_str(),
        cert.witness.to_literal().trim_end()
    );
    match &out.out {
        Some(dir) => {
            let path = write_atomic(dir, "rho.txt", &format!("{text}\n"))?;
            out.lines.push(format!("value {:?}", cert.value));
            out.lines.push(format!("mode {}", cert.mode.as_str()));
            out.lines.push(format!("wrote {}", path.display()));
        }
        None => out.lines.push(text),
    }
    Ok(())
}

fn cmd_experiment(
    name: &str,
    config: Option<&Path>,
    fam: Option<&str>,
    quick: bool,
    cli: &Cli,
    out: &mut Output,
) -> Result<i32> {
    if name != "all" && !EXPERIMENTS.contains(&name) {
        return invalid(format!("unknown experiment {name:?}; expected one of {}, all", EXPERIMENTS.join(", ")));
    }
    let mut overrides = match config {
        Some(p) => ExperimentOverrides::parse(&read(p)?)?,
        None => ExperimentOverrides::default(),
    };
    if let Some(f) = fam {
        overrides.family = Some(f.to_string());
    }
    let cfg = ExperimentConfig {
        seed: cli.seed.or(overrides.seed).unwrap_or(DEFAULT_SEED),
        tol: cli.tol.or(overrides.tol).unwrap_or(DEFAULT_TOL),
        quick,
        overrides,
    };
    let reports = run_experiment(name, &cfg)?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let placed = write_reports(&dir, &reports)?;
    for (r, p) in reports.iter().zip(&placed) {
        out.lines.push(format!("{}: {} ({})", r.id, r.verdict().as_str(), p.display()));
    }
    let v = overall_verdict(&reports);
    out.lines.push(format!("overall: {}", v.as_str()));
    Ok(v.exit_code())
}

fn cmd_report(dir: &Path, out: &mut Output) -> Result<()> {
    let tables = read_report_tables(dir)?;
    if tables.is_empty() {
        return invalid(format!("{}: no tables", dir.display()));
    }
    for t in tables {
        let xs = t.grid.clone();
        let fit = match fit_slope(&xs, &t.distances) {
            Ok(f) => format!("slope {:?} r2 {:?} points {}", f.slope, f.r_squared, f.points),
            Err(e) => format!("no fit: {e}"),
        };
        out.lines.push(format!("{}: {} rows, mode {}, {fit}", t.id, t.grid.len(), t.mode.label()));
    }
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut Output) -> Result<i32> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    if !(0.0..1.0).contains(&tol) {
        return invalid("--tol must lie in [0, 1)");
    }
    match &cli.command {
        Command::Dist(d) => cmd_dist(d, tol, out).map(|_| 0),
        Command::Rho {
            g,
            h,
            directions,
            search,
        } => cmd_rho(g, h, directions.as_deref(), *search, seed, out).map(|_| 0),
        Command::Experiment {
            name,
            config,
            family,
            quick,
        } => cmd_experiment(name, config.as_deref(), family.as_deref(), *quick, cli, out),
        Command::Report { dir } => cmd_report(dir, out).map(|_| 0),
    }
}

/// Runs a parsed command, printing results to stdout and errors to stderr.
/// Returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be positive");
        return EXIT_USAGE;
    }
    let mut out = Output {
        out: match &cli.command {
            Command::Experiment { .. } => None,
            _ => cli.out.clone(),
        },
        lines: Vec::new(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| dispatch(&cli, &mut out)),
        Err(e) => Err(Error::InvalidInput(format!("thread pool: {e}"))),
    };
    match result {
        Ok(code) => {
            for l in out.lines {
                println!("{l}");
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Parses `args` and runs; clap usage errors map to status 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            code
        }
    }
}
