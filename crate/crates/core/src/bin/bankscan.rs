use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bankscan::report::{diff_reports, render, OutputFormat, Report};
use bankscan::scan::parse_date;
use bankscan::{Error, ScanConfig, Scanner};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bankscan", version, about = "Static weakness scanner for unpacked Android banking apps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan one unpacked app directory.
    Scan {
        app_dir: PathBuf,
        /// json, text or table.
        #[arg(long, default_value = "json")]
        format: String,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        opts: ScanArgs,
    },
    /// Scan every app directory under a root and summarize.
    Corpus {
        root: PathBuf,
        /// Directory for per-app json reports and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// table or json, for the summary on stdout.
        #[arg(long, default_value = "table")]
        format: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        opts: ScanArgs,
    },
    /// Compare two json reports of the same app.
    Diff {
        old: PathBuf,
        new: PathBuf,
        /// text or json.
        #[arg(long, default_value = "text")]
        format: String,
    },
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, env = "BANKSCAN_KEYWORDS")]
    keywords: Option<PathBuf>,
    #[arg(long, env = "BANKSCAN_SINKS")]
    sinks: Option<PathBuf>,
    #[arg(long, env = "BANKSCAN_RULES")]
    rules: Option<PathBuf>,
    #[arg(long, env = "BANKSCAN_NEIGHBORS")]
    neighbors: Option<PathBuf>,
    #[arg(long, env = "BANKSCAN_STOPLIST")]
    stoplist: Option<PathBuf>,
    /// Report pattern hits even when no entry point reaches them.
    #[arg(long)]
    no_reachability: bool,
    /// Report every hard-coded key literal, used on sensitive data or not.
    #[arg(long)]
    strict_keys: bool,
    /// Date for certificate expiry checks, YYYY-MM-DD. Defaults to today.
    #[arg(long)]
    reference_date: Option<String>,
    /// Write call graphs in dot format to this directory.
    #[arg(long)]
    dump_graphs: Option<PathBuf>,
    /// Exit with status 3 when any finding is reported.
    #[arg(long)]
    fail_on_findings: bool,
    /// Record scan durations in reports.
    #[arg(long)]
    timing: bool,
    /// Taint propagation budget, in facts.
    #[arg(long)]
    budget: Option<usize>,
}

impl ScanArgs {
    fn config(&self, jobs: usize) -> Result<ScanConfig, Error> {
        let mut c = ScanConfig {
            keywords: self.keywords.clone(),
            sinks: self.sinks.clone(),
            rules: self.rules.clone(),
            neighbors: self.neighbors.clone(),
            stoplist: self.stoplist.clone(),
            no_reachability: self.no_reachability,
            strict_keys: self.strict_keys,
            jobs,
            dump_graphs: self.dump_graphs.clone(),
            timing: self.timing,
            ..ScanConfig::default()
        };
        if let Some(d) = &self.reference_date {
            c.reference_date = parse_date(d)?;
        }
        if let Some(b) = self.budget {
            c.budget = b;
        }
        Ok(c)
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_report(p: &Path) -> Result<Report, Error> {
    let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{} is not a report: {e}", p.display())))
}

/// Returns (findings reported, fail-on-findings requested).
fn run(cli: Cli) -> Result<(bool, bool), Error> {
    match cli.command {
        Command::Scan { app_dir, format, out, opts } => {
            let format: OutputFormat = format.parse()?;
            let scanner = Scanner::new(opts.config(1)?)?;
            let report = scanner.scan(&app_dir)?;
            write_out(out.as_deref(), &render(&report, format))?;
            Ok((!report.findings.is_empty(), opts.fail_on_findings))
        }
        Command::Corpus { root, out, format, jobs, opts } => {
            let format: OutputFormat = format.parse()?;
            let scanner = Scanner::new(opts.config(jobs)?)?;
            let run = scanner.scan_corpus(&root)?;
            if let Some(dir) = &out {
                run.write_to(dir)?;
            }
            match format {
                OutputFormat::Json => print!("{}", run.summary.to_json()),
                OutputFormat::Table | OutputFormat::Text => print!("{}", run.summary.to_table()),
            }
            Ok((run.summary.total_findings > 0, opts.fail_on_findings))
        }
        Command::Diff { old, new, format } => {
            let d = diff_reports(&load_report(&old)?, &load_report(&new)?);
            match format.parse::<OutputFormat>()? {
                OutputFormat::Json => print!("{}", d.to_json()),
                _ => print!("{}", d.to_text()),
            }
            Ok((false, false))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok((true, true)) => ExitCode::from(3),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bankscan: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
