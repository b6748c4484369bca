//! `intergenic`: weighted rearrangement distances between genome pairs.
//!
//! Exit status: 0 on success, 1 on input errors, 2 on internal defects.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use intergenic::harness::{
    bench, parse_instance_specs, parse_pair_file, parse_scheme, write_pair_file, BenchReport, PairFileError,
    ParamError,
};
use intergenic::{
    approximation_factor, build_graph, delta_max, exact_distance, run, step_delta_values, NormalizedPair,
    OracleError, OracleLimits, Rational, RunError, WeightScheme,
};

#[derive(Debug, Parser)]
#[command(name = "intergenic", version, about = "Weighted reversal, transposition and indel distances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sort the source into the target and print the sequence.
    Dist {
        pairfile: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Print every loop iteration with its step, operations and deltas.
    Trace {
        pairfile: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Print the breakpoint graph.
    Graph {
        pairfile: PathBuf,
        /// Emit Graphviz DOT instead of a cycle listing.
        #[arg(long)]
        dot: bool,
    },
    /// Exact minimum weight by exhaustive search (tiny instances only).
    Exact {
        pairfile: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = OracleLimits::default().max_genes)]
        max_genes: usize,
        #[arg(long, default_value_t = OracleLimits::default().max_nucleotides)]
        max_nucleotides: u64,
        #[arg(long, default_value_t = OracleLimits::default().max_states)]
        max_states: usize,
        /// Plain uniform-cost search without the lower-bound estimate.
        #[arg(long)]
        no_heuristic: bool,
    },
    /// Run generated instances and write the CSV report.
    Bench {
        /// Instance groups, e.g. `m=4,k=3,r=2,xs=1,xt=1,seeds=0..99; m=6,seed=3`.
        #[arg(long)]
        spec: String,
        /// `;`-separated `WR,WT,WD,P1,P2` tuples; the four published schemes by default.
        #[arg(long)]
        schemes: Option<String>,
        /// Also run the exact search where it fits its default limits.
        #[arg(long)]
        oracle: bool,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the approximation factor of a weight scheme.
    Factors {
        #[command(flatten)]
        scheme: SchemeArgs,
    },
}

#[derive(Debug, Args)]
struct SchemeArgs {
    /// Operation weights `W(reversal),W(transposition),W(indel)`.
    #[arg(long, value_name = "WR,WT,WD")]
    weights: String,
    /// Potential coefficients `p1,p2`; defaults to the published pairing.
    #[arg(long, value_name = "P1,P2")]
    p: Option<String>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Read { path: String, source: io::Error },
    #[error("{path}: {source}")]
    PairFile { path: String, source: PairFileError },
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("no default p1,p2 for weights {0}; pass --p")]
    NoDefaultP(String),
    #[error("{0}")]
    OracleLimit(OracleError),
    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),
    #[error("internal defect: {0}")]
    Run(#[from] RunError),
    #[error("internal defect: {0}")]
    Oracle(OracleError),
    #[error("{count} instance(s) violate the approximation bound")]
    Violations { count: usize },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Run(_) | CliError::Oracle(_) | CliError::Violations { .. } => 2,
            _ => 1,
        }
    }
}

/// `p1,p2` paired with each published weight triple.
const DEFAULT_P: [(&str, &str); 4] = [("2,3,2", "4,1"), ("2,3,1", "1,1"), ("1,2,1", "4,1"), ("2,4,1", "1,1")];

impl SchemeArgs {
    fn scheme(&self) -> Result<WeightScheme, CliError> {
        let p = match &self.p {
            Some(p) => p.clone(),
            None => {
                let key: String = self.weights.chars().filter(|c| !c.is_whitespace()).collect();
                DEFAULT_P
                    .iter()
                    .find(|(w, _)| *w == key)
                    .map(|(_, p)| p.to_string())
                    .ok_or_else(|| CliError::NoDefaultP(self.weights.clone()))?
            }
        };
        Ok(parse_scheme(&self.weights, &p)?)
    }
}

fn read_pair(path: &Path) -> Result<NormalizedPair, CliError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: shown.clone(), source })?;
    parse_pair_file(&text).map_err(|source| CliError::PairFile { path: shown, source })
}

fn decimal(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn legend(out: &mut impl Write, pair: &NormalizedPair) -> io::Result<()> {
    writeln!(out, "source: {}", pair.source)?;
    writeln!(out, "target: {}", pair.target)?;
    for (k, names) in pair.target_names.iter().enumerate() {
        writeln!(out, "  {} = {}", k + 1, names.join(" "))?;
    }
    for (k, names) in pair.alpha_names.iter().enumerate() {
        writeln!(out, "  alpha.{} = {}", k + 1, names.join(" "))?;
    }
    Ok(())
}

fn parse_schemes(text: Option<&str>) -> Result<Vec<WeightScheme>, CliError> {
    let Some(text) = text else {
        return Ok(WeightScheme::published_schemes().to_vec());
    };
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|group| {
            let parts: Vec<&str> = group.split(',').collect();
            if parts.len() != 5 {
                return Err(ParamError::Arity { expected: 5, found: group.to_string() }.into());
            }
            Ok(parse_scheme(&parts[..3].join(","), &parts[3..].join(","))?)
        })
        .collect()
}

fn execute(command: Command, out: &mut impl Write) -> Result<(), CliError> {
    match command {
        Command::Dist { pairfile, scheme } => {
            let pair = read_pair(&pairfile)?;
            let w = scheme.scheme()?;
            let report = run(&pair, &w)?;
            legend(out, &pair)?;
            writeln!(out, "scheme: {w}")?;
            writeln!(out, "weight: {} ({:.3})", report.total_weight, decimal(report.total_weight))?;
            writeln!(out, "factor: {} ({:.3})", report.factor, decimal(report.factor))?;
            writeln!(out, "lower bound: {} ({:.3})", report.lower_bound, decimal(report.lower_bound))?;
            writeln!(out, "operations: {}", report.sequence.len())?;
            for (k, op) in report.sequence.iter().enumerate() {
                writeln!(out, "  {:>3}. {op}  [{}]", k + 1, w.weight_of(op))?;
            }
            let reached = report.final_genome == pair.target;
            writeln!(out, "replay: {}", if reached { "target reached" } else { "MISMATCH" })?;
        }
        Command::Trace { pairfile, scheme } => {
            let pair = read_pair(&pairfile)?;
            let w = scheme.scheme()?;
            let report = run(&pair, &w)?;
            legend(out, &pair)?;
            for (k, it) in report.iterations.iter().enumerate() {
                writeln!(
                    out,
                    "#{} step {}: claimed {:?} measured {:?} weight {} potential {} -> {}",
                    k + 1,
                    it.step,
                    it.claimed,
                    it.measured,
                    it.weight,
                    w.potential(&it.before),
                    w.potential(&it.after)
                )?;
                for op in &it.ops {
                    writeln!(out, "    {op}")?;
                }
            }
            let tail = report.sequence.len() - report.iterations.iter().flat_map(|i| &i.ops).filter(|o| !o.is_virtual()).count();
            writeln!(out, "trailing deletions for virtual insertions: {tail}")?;
            writeln!(out, "total weight: {}", report.total_weight)?;
        }
        Command::Graph { pairfile, dot } => {
            let pair = read_pair(&pairfile)?;
            let g = build_graph(&pair);
            if dot {
                write!(out, "{}", g.to_dot())?;
            } else {
                let m = g.measures();
                writeln!(out, "|pi| = {}, c = {}, c_g = {}, b = {}, b_g = {}", m.pi_len, m.c, m.c_g, m.b, m.b_g)?;
                for c in g.cycles() {
                    writeln!(
                        out,
                        "cycle @{}: {} origin edge(s), weight {} vs {}, {}{}{:?} {:?} {:?}",
                        c.leftmost,
                        c.origin.len(),
                        c.origin_weight,
                        c.target_weight,
                        if c.trivial { "trivial " } else { "" },
                        if c.labeled { "labeled " } else { "clean " },
                        c.balance,
                        c.direction,
                        c.orientation
                    )?;
                }
            }
        }
        Command::Exact { pairfile, scheme, max_genes, max_nucleotides, max_states, no_heuristic } => {
            let pair = read_pair(&pairfile)?;
            let w = scheme.scheme()?;
            let limits = OracleLimits { max_genes, max_nucleotides, max_states, heuristic: !no_heuristic, ..OracleLimits::default() };
            let result = exact_distance(&pair, &w, &limits).map_err(|e| match e {
                OracleError::Unreachable => CliError::Oracle(e),
                other => CliError::OracleLimit(other),
            })?;
            legend(out, &pair)?;
            writeln!(out, "exact weight: {} ({:.3})", result.weight, decimal(result.weight))?;
            writeln!(out, "states explored: {}", result.explored)?;
            if result.exactness_caveat {
                writeln!(out, "caveat: a state over the nucleotide cap had a lower estimate; optimality holds within the cap")?;
            }
            for (k, op) in result.witness.iter().enumerate() {
                writeln!(out, "  {:>3}. {op}  [{}]", k + 1, w.weight_of(op))?;
            }
        }
        Command::Bench { spec, schemes, oracle, out: path } => {
            let specs = parse_instance_specs(&spec)?;
            let schemes = parse_schemes(schemes.as_deref())?;
            let limits = OracleLimits::default();
            let report = bench(&specs, &schemes, oracle.then_some(&limits))?;
            let csv = report.to_csv();
            match path {
                Some(p) => fs::write(&p, &csv)?,
                None => out.write_all(csv.as_bytes())?,
            }
            summarize(&report);
            let count = report.violations().count();
            if count > 0 {
                for row in report.violations() {
                    eprintln!(
                        "violation: instance {} scheme {} ratio {} > {}\n{}",
                        row.instance,
                        row.scheme,
                        row.ratio,
                        row.factor,
                        write_pair_file(&row.pair)
                    );
                }
                return Err(CliError::Violations { count });
            }
        }
        Command::Factors { scheme } => {
            let w = scheme.scheme()?;
            let f = approximation_factor(&w);
            writeln!(out, "{f} ({:.3})", decimal(f))?;
            writeln!(out, "delta_max: {}", delta_max(&w))?;
            for (step, v) in step_delta_values(&w) {
                writeln!(out, "step {step}: {v}")?;
            }
        }
    }
    Ok(())
}

fn summarize(report: &BenchReport) {
    for s in report.summaries() {
        eprintln!(
            "{}: {} instances ({} with oracle), max ratio {:.4}, mean {:.4}, factor {}, violations {}",
            s.scheme,
            s.instances,
            s.with_oracle,
            decimal(s.max_ratio),
            decimal(s.mean_ratio),
            s.factor,
            s.violations
        );
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = execute(cli.command, &mut out);
    let flushed = out.flush();
    match result.and(flushed.map_err(CliError::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
