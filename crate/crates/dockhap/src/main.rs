use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dockhap::log::{LogHeader, LogWriter};
use dockhap::report::{render_json, render_text, scenario_capability};
use dockhap::{load_scenario, load_windows, read_log};
use dockhap_core::scenario::{audit_rates, run_scenario_with, weight_oracle, RateAuditor, ScenarioError, Verdict};

const EXIT_CONFIG: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "dockhap", version, about = "Hand exoskeleton docking simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its metric log as NDJSON.
    Run {
        config: PathBuf,
        /// Log destination; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Print the composed capability of the scenario's devices.
    Capability {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
    /// Rank cans by rendered force inside lift windows.
    Oracle {
        log: PathBuf,
        windows: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Check update rates recorded in a metric log.
    Audit { log: PathBuf },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn run(config: PathBuf, out: Option<PathBuf>) -> ExitCode {
    let loaded = match load_scenario(&config) {
        Ok(l) => l,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let cfg = &loaded.config;
    let sink: Box<dyn Write> = match &out {
        Some(p) => match File::create(p) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => return fail(EXIT_CONFIG, format!("cannot create {}: {e}", p.display())),
        },
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut writer = match LogWriter::new(sink, &LogHeader::for_config(cfg)) {
        Ok(w) => w,
        Err(e) => return fail(1, e),
    };
    let mut io_err = None;
    let mut auditor = RateAuditor::new();
    let mut events = 0usize;
    let result = run_scenario_with(cfg, |r| {
        auditor.push(r);
        events += r.events.len();
        if io_err.is_none() {
            io_err = writer.write(r).err();
        }
    });
    if let Err(e) = writer.finish() {
        io_err.get_or_insert(e);
    }
    if let Some(e) = io_err {
        return fail(1, e);
    }
    match result {
        Ok(summary) => {
            let audit = auditor.finish();
            eprintln!(
                "{}: {} ticks, {} events, rates {}",
                cfg.name,
                summary.ticks,
                events,
                if audit.passed() { "ok" } else { "violated" }
            );
            ExitCode::SUCCESS
        }
        Err(e @ ScenarioError::Config(_)) => fail(EXIT_CONFIG, e),
        Err(e) => fail(EXIT_DIVERGED, e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Capability { config, json } => {
            let loaded = match load_scenario(&config) {
                Ok(l) => l,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let cap = match scenario_capability(&loaded.config) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&render_json(&loaded.config.name, &cap)).expect("json"));
            } else {
                print!("{}", render_text(&loaded.config.name, &cap));
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load_scenario(&config) {
            Ok(l) => {
                println!("{}: ok ({} arms, {} ticks)", l.config.name, l.config.arms.len(), l.config.timing.ticks());
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_CONFIG, e),
        },
        Command::Oracle { log, windows, json } => {
            let windows = match load_windows(&windows) {
                Ok(w) => w,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let file = match File::open(&log) {
                Ok(f) => f,
                Err(e) => return fail(EXIT_CONFIG, format!("cannot read {}: {e}", log.display())),
            };
            let (header, log) = match read_log(BufReader::new(file)) {
                Ok(l) => l,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let report = match weight_oracle(&log, &windows) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let (verdict, order, confidence) = match &report.verdict {
                Verdict::Ordered { order, confidence } => ("ordered", Some(order.clone()), Some(*confidence)),
                Verdict::Tie { groups, confidence } => ("tie", Some(groups.concat()), Some(*confidence)),
                Verdict::Indistinguishable => ("indistinguishable", None, None),
            };
            if json {
                let v = serde_json::json!({
                    "scenario": header.scenario,
                    "condition": header.condition,
                    "mean_force_n": report.mean_force,
                    "verdict": verdict,
                    "order": order,
                    "confidence": confidence,
                });
                println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            } else {
                println!("scenario: {} ({})", header.scenario, header.condition);
                for (i, f) in report.mean_force.iter().enumerate() {
                    println!("can {i}: {f:.6} N");
                }
                match (&report.verdict, order, confidence) {
                    (Verdict::Tie { groups, .. }, _, Some(c)) => println!("verdict: tie {groups:?} (confidence {c:.3})"),
                    (_, Some(o), Some(c)) => println!("verdict: ordered {o:?} (confidence {c:.3})"),
                    _ => println!("verdict: indistinguishable"),
                }
            }
            ExitCode::SUCCESS
        }
        Command::Audit { log } => {
            let file = match File::open(&log) {
                Ok(f) => f,
                Err(e) => return fail(EXIT_CONFIG, format!("cannot read {}: {e}", log.display())),
            };
            let (_, log) = match read_log(BufReader::new(file)) {
                Ok(l) => l,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let a = audit_rates(&log.records);
            println!("ticks: {}", a.ticks);
            println!("control tick exact: {}", a.control_tick_exact);
            match a.min_glove_interval_us {
                Some(v) => println!("min glove interval: {v} us"),
                None => println!("min glove interval: n/a"),
            }
            println!("max arm target interval: {:?} us", a.max_arm_interval_us);
            println!("result: {}", if a.passed() { "ok" } else { "violated" });
            if a.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
