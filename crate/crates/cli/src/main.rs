//! `proofmarket`: command line front end.
//!
//! Exit codes: 0 success, 1 domain violations (guard findings, ledger
//! errors, gate failures), 2 usage or parse errors. Data goes to stdout,
//! diagnostics to stderr.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use proofmarket_core::depgraph::{build_graph, gate_violations, report_table, select_rows, table_csv, AxiomIndex, ProofClass};
use proofmarket_core::devfile::{render, DevFile, ItemKind};
use proofmarket_core::guard::{check_sources, naive_line_check, GuardError};
use proofmarket_core::ledger::{apply_to_devfile, lifecycle_report, parse_event_log, AgentId, LedgerState, Rules};
use proofmarket_core::metrics::{agent_history, agent_history_csv, growth_csv, growth_series, throughput};
use proofmarket_core::sim::{self, InitialMarket, SimConfig};
use proofmarket_core::time::{format_instant, parse_instant, Instant};

#[derive(Parser)]
#[command(name = "proofmarket", version, about = "Bounty marketplace tools for a shared formal development")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a development and list its items.
    Parse { file: PathBuf },
    /// Check a proposed revision.
    #[command(subcommand)]
    Guard(GuardCmd),
    /// Inspect or update the ledger.
    #[command(subcommand)]
    Ledger(LedgerCmd),
    /// Dependency gate and proof length table.
    #[command(subcommand)]
    Deps(DepsCmd),
    /// Run simulations.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Time series and summary figures.
    #[command(subcommand)]
    Metrics(MetricsCmd),
}

#[derive(Args)]
struct AxiomArg {
    /// Allowed-axiom index file.
    #[arg(long, env = "PROOFMARKET_AXIOM_INDEX")]
    axiom_index: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GuardCmd {
    /// Compare `--next` against `--prev` as committed by `--agent` at `--now`.
    Check {
        #[arg(long)]
        prev: PathBuf,
        #[arg(long)]
        next: PathBuf,
        #[arg(long)]
        agent: String,
        #[arg(long, value_parser = instant)]
        now: Instant,
        /// Use the old line-based checker instead.
        #[arg(long)]
        naive: bool,
        /// Admin only: report violations but accept the revision.
        #[arg(long)]
        r#override: bool,
        #[command(flatten)]
        axioms: AxiomArg,
    },
}

#[derive(Subcommand)]
enum LedgerCmd {
    /// Balances, open bounties and locks stated by a development.
    Status {
        file: PathBuf,
        /// Mark locks that have lapsed at this instant.
        #[arg(long, value_parser = instant)]
        now: Option<Instant>,
    },
    /// Replay an event log on a development and print the updated file.
    Apply {
        file: PathBuf,
        #[arg(long)]
        events: PathBuf,
        /// Overwrite `file` instead of printing.
        #[arg(long)]
        in_place: bool,
    },
    /// Where the tokens of agent-placed bounties went.
    Report {
        #[arg(long)]
        events: PathBuf,
    },
}

#[derive(Subcommand)]
enum DepsCmd {
    /// Class of every theorem and lemma.
    Classify {
        file: PathBuf,
        #[command(flatten)]
        axioms: AxiomArg,
    },
    /// Theorems by normalized proof length, longest first.
    Table {
        file: PathBuf,
        /// Keep rows strictly longer than this.
        #[arg(long, default_value_t = 0)]
        min_length: usize,
        /// Keep only this class (fully-proved, admitted-closure, admitted, open).
        #[arg(long, value_parser = proof_class)]
        class: Option<ProofClass>,
        #[command(flatten)]
        axioms: AxiomArg,
    },
}

#[derive(Subcommand)]
enum SimCmd {
    /// One seeded run.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write events.log, mg_growth.csv, agent_history.csv,
        /// rejections.log and final.mg here instead of printing the agent
        /// history.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Many runs, one summary row each.
    Sweep {
        /// Repeat for several configurations.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        /// Seeds 0..N for every configuration.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
}

#[derive(Subcommand)]
enum MetricsCmd {
    /// Raw line count of each revision, in the order given.
    Growth { revisions: Vec<PathBuf> },
    /// Per-agent balance and cumulative figures after each commit.
    Agents {
        /// Development whose header holds the starting ledger.
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        events: PathBuf,
    },
    /// Normalized lines per day between the first and last revision.
    Throughput {
        /// `<rfc3339>=<file>` pairs.
        #[arg(required = true, num_args = 2..)]
        revisions: Vec<String>,
    },
}

fn instant(s: &str) -> Result<Instant, String> {
    parse_instant(s).map_err(|e| format!("not an RFC 3339 instant: {e}"))
}

fn proof_class(s: &str) -> Result<ProofClass, String> {
    match s {
        "fully-proved" | "FullyProved" => Ok(ProofClass::FullyProved),
        "admitted-closure" | "AdmittedClosure" => Ok(ProofClass::AdmittedClosure),
        "admitted" | "Admitted" => Ok(ProofClass::Admitted),
        "open" | "Open" => Ok(ProofClass::Open),
        _ => Err(format!("unknown class `{s}`")),
    }
}

/// A failure carrying its exit code.
struct Fail(u8, String);

fn usage(e: impl Display) -> Fail {
    Fail(2, e.to_string())
}

fn domain(e: impl Display) -> Fail {
    Fail(1, e.to_string())
}

type Outcome = Result<u8, Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<DevFile, Fail> {
    DevFile::from_source(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn axioms(arg: &AxiomArg) -> Result<AxiomIndex, Fail> {
    match &arg.axiom_index {
        Some(p) => AxiomIndex::parse(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => Ok(AxiomIndex::default()),
    }
}

fn out(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Parse { file } => parse_cmd(&file),
        Command::Guard(GuardCmd::Check { prev, next, agent, now, naive, r#override, axioms: ax }) => {
            guard_cmd(&prev, &next, &agent, now, naive, r#override, &ax)
        }
        Command::Ledger(cmd) => ledger_cmd(cmd),
        Command::Deps(cmd) => deps_cmd(cmd),
        Command::Sim(cmd) => sim_cmd(cmd),
        Command::Metrics(cmd) => metrics_cmd(cmd),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("proofmarket: {msg}");
            ExitCode::from(code)
        }
    }
}

fn parse_cmd(file: &Path) -> Outcome {
    let f = load(file)?;
    let mut s = String::new();
    for i in &f.items {
        let notes: Vec<String> = i.annotations.iter().map(|a| a.kind.to_string()).collect();
        s.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", i.position, i.kind, i.name, i.proof_status, notes.join(" ")));
    }
    out(&s);
    eprintln!(
        "{} items, {} raw lines, {} normalized lines, {} header lines",
        f.items.len(),
        f.raw_line_count,
        f.normalized_line_count,
        f.header_line_count
    );
    Ok(0)
}

fn guard_cmd(prev: &Path, next: &Path, agent: &str, now: Instant, naive: bool, override_: bool, ax: &AxiomArg) -> Outcome {
    let agent = AgentId::new(agent).map_err(usage)?;
    if override_ && !agent.is_admin() {
        return Err(usage("--override is reserved for the admin"));
    }
    let (a, b) = (read(prev)?, read(next)?);
    let violations = if naive {
        DevFile::from_source(&a).map_err(|e| usage(format!("previous revision does not parse: {e}")))?;
        DevFile::from_source(&b).map_err(|e| usage(format!("proposed revision does not parse: {e}")))?;
        naive_line_check(&a, &b, now, &Rules::default())
    } else {
        match check_sources(&a, &b, agent, now, Rules::default(), axioms(ax)?) {
            Ok(v) => v.violations,
            Err(e @ GuardError::ParseFailure { .. }) => return Err(usage(e)),
        }
    };
    out(&violations.iter().map(|v| format!("{v}\n")).collect::<String>());
    if violations.is_empty() {
        return Ok(0);
    }
    if override_ {
        eprintln!("override: accepting revision with {} recorded violation(s)", violations.len());
        return Ok(0);
    }
    Ok(1)
}

fn ledger_cmd(cmd: LedgerCmd) -> Outcome {
    match cmd {
        LedgerCmd::Status { file, now } => {
            let f = load(&file)?;
            let s = LedgerState::from_devfile(&f, Rules::default());
            let mut text = format!("supply {}\nadmin_sink {}\nescrow {}\n", s.total_supply, s.admin_sink, s.escrow());
            for (a, b) in &s.balances {
                text.push_str(&format!("balance {a} {b}\n"));
            }
            for (item, b) in &s.open_bounties {
                text.push_str(&format!("bounty {item} {} {}\n", b.amount, b.creator));
            }
            for (item, l) in &s.locks {
                let state = match now {
                    Some(t) if !l.is_live(t) => " lapsed",
                    _ => "",
                };
                text.push_str(&format!("lock {item} {} {}{state}\n", l.holder, format_instant(l.expires)));
            }
            out(&text);
            let negative: Vec<_> = s.balances.iter().filter(|(_, b)| **b < 0).collect();
            if !negative.is_empty() || s.admin_sink < 0 {
                eprintln!("ledger is not valid: negative balance");
                return Ok(1);
            }
            Ok(0)
        }
        LedgerCmd::Apply { file, events, in_place } => {
            let mut f = load(&file)?;
            let log = parse_event_log(&read(&events)?).map_err(usage)?;
            apply_to_devfile(&mut f, &log.events, Rules::default())
                .map_err(|(i, e)| domain(format!("event {}: {e}", i + 1)))?;
            let text = render(&f);
            if in_place {
                fs::write(&file, text).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            } else {
                out(&text);
            }
            Ok(0)
        }
        LedgerCmd::Report { events } => {
            let log = parse_event_log(&read(&events)?).map_err(usage)?;
            let r = lifecycle_report(&log.events);
            out(&format!(
                "placed_total,self_collected,cross_collected,still_open,removed\n{},{},{},{},{}\n",
                r.placed_total, r.self_collected, r.cross_collected, r.still_open, r.removed
            ));
            Ok(0)
        }
    }
}

fn deps_cmd(cmd: DepsCmd) -> Outcome {
    match cmd {
        DepsCmd::Classify { file, axioms: ax } => {
            let f = load(&file)?;
            let graph = build_graph(&f, &axioms(&ax)?);
            let classes = graph.classify().map_err(domain)?;
            let mut text = String::from("name,class\n");
            for i in f.items.iter().filter(|i| matches!(i.kind, ItemKind::Theorem | ItemKind::Lemma)) {
                text.push_str(&format!("{},{}\n", i.name, classes[&i.name]));
            }
            out(&text);
            let bad = gate_violations(&classes);
            if bad.is_empty() {
                return Ok(0);
            }
            for name in bad {
                eprintln!("{name}: ends in Qed but depends on admitted results; it must be marked Admitted");
            }
            Ok(1)
        }
        DepsCmd::Table { file, min_length, class, axioms: ax } => {
            let f = load(&file)?;
            let graph = build_graph(&f, &axioms(&ax)?);
            let rows = report_table(&f, &graph).map_err(domain)?;
            out(&table_csv(&select_rows(rows, min_length, class)));
            Ok(0)
        }
    }
}

fn sim_config(path: Option<&Path>) -> Result<SimConfig, Fail> {
    let Some(path) = path else { return Ok(SimConfig::default()) };
    let (mut cfg, initial) = SimConfig::parse(&read(path)?).map_err(usage)?;
    if let Some(rel) = initial {
        let full = path.parent().unwrap_or(Path::new(".")).join(rel);
        cfg.initial = InitialMarket::Source(read(&full)?);
    }
    Ok(cfg)
}

fn sim_cmd(cmd: SimCmd) -> Outcome {
    match cmd {
        SimCmd::Run { config, seed, out_dir } => {
            let mut cfg = sim_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let trace = sim::run(&cfg).map_err(usage)?;
            match out_dir {
                Some(dir) => {
                    let write = |name: &str, text: String| {
                        fs::write(dir.join(name), text).map_err(|e| usage(format!("{}: {e}", dir.join(name).display())))
                    };
                    fs::create_dir_all(&dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
                    write("events.log", trace.event_log())?;
                    write("mg_growth.csv", trace.growth_csv())?;
                    write("agent_history.csv", trace.agent_history_csv())?;
                    write("rejections.log", trace.rejection_log())?;
                    write("final.mg", trace.revisions.last().cloned().unwrap_or_default())?;
                }
                None => out(&trace.agent_history_csv()),
            }
            eprintln!("{} commits accepted, {} rejected", trace.commits.len(), trace.rejections.len());
            Ok(0)
        }
        SimCmd::Sweep { config, seeds } => {
            let mut runs = Vec::new();
            for path in &config {
                let cfg = sim_config(Some(path))?;
                let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
                for seed in 0..seeds {
                    runs.push((label.clone(), SimConfig { seed, ..cfg.clone() }));
                }
            }
            let rows = sim::sweep(&runs).map_err(usage)?;
            out(&sim::sweep_csv(&rows));
            Ok(0)
        }
    }
}

fn metrics_cmd(cmd: MetricsCmd) -> Outcome {
    match cmd {
        MetricsCmd::Growth { revisions } => {
            let texts = revisions.iter().map(|p| read(p)).collect::<Result<Vec<_>, _>>()?;
            out(&growth_csv(&growth_series(&texts)).map_err(usage)?);
            Ok(0)
        }
        MetricsCmd::Agents { ledger, events } => {
            let f = load(&ledger)?;
            let log = parse_event_log(&read(&events)?).map_err(usage)?;
            let start = LedgerState::from_devfile(&f, Rules::default());
            let rows = agent_history(&start, &log.commits()).map_err(domain)?;
            out(&agent_history_csv(&rows).map_err(usage)?);
            Ok(0)
        }
        MetricsCmd::Throughput { revisions } => {
            let mut points = Vec::new();
            for pair in &revisions {
                let (t, p) = pair.split_once('=').ok_or_else(|| usage(format!("expected <time>=<file>, got `{pair}`")))?;
                let f = load(Path::new(p))?;
                points.push((instant(t).map_err(usage)?, f.normalized_line_count));
            }
            points.sort_by_key(|p| p.0);
            let first = points[0];
            let last = points[points.len() - 1];
            let rate = throughput(first, last).map_err(domain)?;
            out(&format!("lines_per_day\n{rate}\n"));
            Ok(0)
        }
    }
}
