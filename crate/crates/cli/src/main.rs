//! `fibquilt`: sequence tables, decompositions, game analysis, simulation,
//! replay validation and the HTTP service behind one binary.
//!
//! Exit status is 0 on success, 1 when a computation or validation fails,
//! and 2 for malformed command lines.

use std::fmt::Write as _;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fibquilt::analysis::{analyze, two_term_split_check, AnalyzeOptions, SearchBudget};
use fibquilt::engine::R3F_ERRATUM;
use fibquilt::replay::MoveLog;
use fibquilt::simulation::run_distribution;
use fibquilt::verify::{run_suite, SuiteConfig};
use fibquilt::{enumerate_decompositions, extremal_counts, QuiltSequence, Rule};
use fibquilt_service::ServiceConfig;

#[derive(Debug, Parser)]
#[command(
    name = "fibquilt",
    version,
    about = "Fibonacci Quilt sequence and game toolkit"
)]
struct Cli {
    /// Print the move table, including the corrected R3f variant, and exit.
    #[arg(long)]
    about_rules: bool,

    /// Log progress and warnings to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print sequence terms as `i,q_i` CSV.
    Seq {
        #[arg(long)]
        max_index: usize,
        /// Also check the recurrence and partial-sum identities.
        #[arg(long)]
        verify: bool,
    },
    /// Write N as FQ-legal sums of sequence terms.
    Decompose {
        n: u64,
        /// Every legal decomposition, one per line.
        #[arg(long, conflicts_with = "counts")]
        all: bool,
        /// `N,L,l`: largest and smallest number of summands.
        #[arg(long)]
        counts: bool,
    },
    /// Explore the game tree from N ones and print a JSON summary.
    Analyze {
        n: u64,
        #[arg(long)]
        winner: bool,
        #[arg(long)]
        parities: bool,
        #[arg(long)]
        min_length: bool,
        /// List every game (only for small N).
        #[arg(long)]
        games: bool,
        /// Maximum number of distinct states to explore.
        #[arg(long, default_value_t = SearchBudget::default().max_states)]
        budget: usize,
    },
    /// Legal two-term splits of 2·q_I, as JSON index pairs.
    Splitcheck { i: usize },
    /// Play random games and report the length distribution.
    Simulate {
        n: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        /// Write the `length,count` histogram to this file.
        #[arg(long)]
        hist_csv: Option<PathBuf>,
        /// Print the full distribution as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Replay a move log and check that it is a complete legal game.
    PlayLog {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Serve the HTTP game API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Keep a move journal per session here and reload it on start.
        #[arg(long)]
        journal_dir: Option<PathBuf>,
        #[arg(long, default_value_t = ServiceConfig::default().max_n)]
        max_n: u64,
        #[arg(long, default_value_t = ServiceConfig::default().solver_budget.max_states)]
        solver_budget: usize,
    },
    /// Run the invariant suite.
    Verify,
}

/// A failure already reported to stderr, mapped to exit status 1.
struct Failed(String);

impl<E: std::fmt::Display> From<E> for Failed {
    fn from(e: E) -> Self {
        Failed(e.to_string())
    }
}

type Outcome = Result<(), Failed>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose {
        tracing_subscriber::filter::LevelFilter::INFO
    } else {
        tracing_subscriber::filter::LevelFilter::ERROR
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_max_level(level)
        .init();

    if cli.about_rules {
        print!("{}", rules_table());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        use clap::CommandFactory;
        let _ = Cli::command().print_help();
        return ExitCode::from(2);
    };
    match run(command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Seq { max_index, verify } => seq(max_index, verify),
        Command::Decompose { n, all, counts } => decompose(n, all, counts),
        Command::Analyze {
            n,
            winner,
            parities,
            min_length,
            games,
            budget,
        } => {
            let any = winner || parities || min_length || games;
            let opts = AnalyzeOptions {
                budget: SearchBudget::new(budget),
                winner: winner || !any,
                parities: parities || !any,
                min_length: min_length || !any,
                games,
                ..AnalyzeOptions::default()
            };
            let summary = analyze(n, &opts)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }
        Command::Splitcheck { i } => {
            let pairs = two_term_split_check(i)?;
            println!("{}", serde_json::to_string(&pairs)?);
            Ok(())
        }
        Command::Simulate {
            n,
            trials,
            seed,
            hist_csv,
            json,
        } => {
            let dist = run_distribution(n, trials, seed)?;
            if let Some(path) = hist_csv {
                std::fs::write(&path, dist.histogram_csv())
                    .map_err(|e| Failed(format!("{}: {e}", path.display())))?;
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&dist)?);
            } else {
                println!("n={} trials={} seed={}", dist.n, dist.trials, dist.seed);
                println!("mean={:.6} stddev={:.6}", dist.mean, dist.stddev);
                println!("lengths {}..={}", dist.min_length, dist.max_length);
                match dist.gaussian_diffs {
                    Some(d) => println!("d2={:.6} d4={:.6} d6={:.6}", d.d2, d.d4, d.d6),
                    None => println!("moment differences undefined (zero variance)"),
                }
            }
            Ok(())
        }
        Command::PlayLog { file, json } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| Failed(format!("{}: {e}", file.display())))?;
            let record = MoveLog::parse(&text)?.into_record()?;
            if json {
                println!("{}", serde_json::to_string_pretty(&record)?);
            } else {
                println!("valid game on n={}", record.n);
                println!("length {}", record.length);
                println!("final {}", record.final_decomposition);
                println!("winner {:?}", record.winner);
            }
            Ok(())
        }
        Command::Serve {
            port,
            host,
            journal_dir,
            max_n,
            solver_budget,
        } => {
            let config = ServiceConfig {
                max_n,
                solver_budget: SearchBudget::new(solver_budget),
                journal_dir,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(fibquilt_service::serve(SocketAddr::new(host, port), config))?;
            Ok(())
        }
        Command::Verify => {
            let outcomes = run_suite(&SuiteConfig::default());
            for o in &outcomes {
                let mark = if o.passed { "ok  " } else { "FAIL" };
                println!("{mark} {:<28} {}", o.name, o.detail);
            }
            match outcomes.iter().find(|o| !o.passed) {
                Some(o) => Err(Failed(format!("check {} failed: {}", o.name, o.detail))),
                None => Ok(()),
            }
        }
    }
}

fn seq(max_index: usize, verify: bool) -> Outcome {
    let seq = QuiltSequence::generate(max_index)?;
    let mut out = String::from("i,q_i\n");
    for (k, v) in seq.terms().iter().enumerate() {
        let _ = writeln!(out, "{},{v}", k + 1);
    }
    print!("{out}");
    if verify {
        let report = seq.verify_identities();
        if let Some(f) = report.first_failure {
            return Err(Failed(format!(
                "identity {:?} fails at n={}",
                f.identity, f.n
            )));
        }
    }
    Ok(())
}

fn decompose(n: u64, all: bool, counts: bool) -> Outcome {
    if counts {
        let c = extremal_counts(n)?;
        println!("N,L,l");
        println!("{n},{},{}", c.max_terms, c.min_terms);
        return Ok(());
    }
    let found = enumerate_decompositions(n)?;
    let shown = if all {
        &found[..]
    } else {
        &found[..found.len().min(1)]
    };
    for d in shown {
        println!("{d}");
    }
    Ok(())
}

fn rules_table() -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<5} {:<9} rewrite", "rule", "variants");
    for r in Rule::ALL {
        let variants = if r.has_variants() { "A|B" } else { "-" };
        let _ = writeln!(out, "{:<5} {:<9} {}", r.tag(), variants, r.template());
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "note: {R3F_ERRATUM}");
    out
}
