//! Command-line driver: analyze a faulty program, run a corpus manifest,
//! or estimate transformer noise against a known repair.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use minthint::exec::load_tests;
use minthint::lang::parse_program;
use minthint::pipeline::{
    estimate_noise, load_manifest, run_corpus, run_pipeline, Config, DumpFlags,
};
use minthint::report::{
    analyze_table, corpus_jsonl, corpus_table, dumps_text, hints_jsonl, Format,
};
use minthint::transformer::AngelicConfig;

#[derive(Parser)]
#[command(name = "minthint", version, about = "Synthesize ranked repair hints from a test suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a faulty program and print ranked repair hints.
    Analyze {
        /// Program source file.
        #[arg(long)]
        program: PathBuf,
        /// Test suite (JSON lines: {"id", "args", "expect"}).
        #[arg(long)]
        tests: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_parser = parse_format, default_value = "table")]
        format: Format,
        /// Dump derived state transformers as JSON.
        #[arg(long)]
        dump_transformer: bool,
        /// Dump per-statement datasets as CSV.
        #[arg(long)]
        dump_dataset: bool,
        /// Dump ranked likelihood tables.
        #[arg(long)]
        dump_likelihoods: bool,
    },
    /// Run a corpus manifest of faulty/repaired tasks and summarize.
    Corpus {
        /// Manifest JSON file ({"tasks": [...]}).
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_parser = parse_format, default_value = "table")]
        format: Format,
    },
    /// Estimate transformer noise for a statement against a known repair.
    Noise {
        #[arg(long)]
        faulty: PathBuf,
        #[arg(long)]
        repaired: PathBuf,
        #[arg(long)]
        tests: PathBuf,
        /// Statement line to analyze.
        #[arg(long)]
        line: u32,
        /// Component index for multi-component statements (for headers,
        /// ternaries).
        #[arg(long, default_value_t = 0)]
        component: usize,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Number of suspicious statements to analyze.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Size bound for enumerated repair expressions.
    #[arg(long, default_value_t = 4)]
    m: usize,
    /// Likelihood threshold for simple hints.
    #[arg(long, default_value_t = 0.4)]
    delta: f64,
    /// Partial-likelihood subsumption threshold.
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Compound-set growth threshold.
    #[arg(long, default_value_t = 0.6)]
    gamma: f64,
    /// Edit distance at or below which a match becomes a replace hint.
    #[arg(long, default_value_t = 2)]
    edit_threshold: usize,
    /// Seed for tie-breaking draws.
    #[arg(long, default_value_t = 17)]
    seed: u64,
    /// Localization formula (only "ochiai" is implemented).
    #[arg(long, default_value = "ochiai")]
    localizer: String,
    /// Angelic integer search window as LO:HI.
    #[arg(long, value_parser = parse_window, default_value = "-64:64", allow_hyphen_values = true)]
    angelic_window: (i64, i64),
    /// Wall-clock budget per failing-test search, in milliseconds.
    #[arg(long, default_value_t = 5_000)]
    angelic_budget_ms: u64,
    /// Cap on dynamic executions per test during angelic search.
    #[arg(long, default_value_t = 10)]
    max_hits: usize,
    /// Interpreter steps per run.
    #[arg(long, default_value_t = 1_000_000)]
    step_budget: u64,
    /// Cap on the enumerated repair space.
    #[arg(long, default_value_t = 200_000)]
    expr_cap: usize,
    /// Fraction of passing tests to use (failing tests always all run).
    #[arg(long, default_value_t = 1.0)]
    passing_fraction: f64,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "table" => Ok(Format::Table),
        "json" => Ok(Format::Json),
        other => Err(format!("unknown format {other:?} (expected table or json)")),
    }
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    // LO:HI with negative bounds allowed, e.g. -64:64.
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo = lo.trim().parse::<i64>().map_err(|e| e.to_string())?;
    let hi = hi.trim().parse::<i64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

impl ConfigArgs {
    fn to_config(&self) -> Result<Config, String> {
        if self.localizer != "ochiai" {
            return Err(format!("unknown localizer {:?}", self.localizer));
        }
        let cfg = Config {
            k: self.k,
            m: self.m,
            delta: self.delta,
            beta: self.beta,
            gamma: self.gamma,
            edit_threshold: self.edit_threshold,
            seed: self.seed,
            expr_cap: self.expr_cap,
            step_budget: self.step_budget,
            angelic: AngelicConfig {
                window_lo: self.angelic_window.0,
                window_hi: self.angelic_window.1,
                max_hits: self.max_hits,
                budget_ms: self.angelic_budget_ms,
                ..AngelicConfig::default()
            },
            passing_fraction: self.passing_fraction,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Analyze {
            program,
            tests,
            config,
            format,
            dump_transformer,
            dump_dataset,
            dump_likelihoods,
        } => {
            let cfg = config.to_config()?;
            let program = parse_program(&read(&program)?).map_err(|e| e.to_string())?;
            let tests = load_tests(&read(&tests)?).map_err(|e| e.to_string())?;
            let dumps = DumpFlags {
                transformer: dump_transformer,
                dataset: dump_dataset,
                likelihoods: dump_likelihoods,
            };
            let output = run_pipeline(&program, &tests, &cfg, dumps).map_err(|e| e.to_string())?;
            match format {
                Format::Table => print!("{}", analyze_table(&output)),
                Format::Json => print!("{}", hints_jsonl(&output.hints)),
            }
            let extra = dumps_text(&output);
            if !extra.is_empty() {
                print!("{extra}");
            }
            Ok(())
        }
        Command::Corpus { manifest, config, format } => {
            let cfg = config.to_config()?;
            let tasks = load_manifest(&manifest).map_err(|e| e.to_string())?;
            let results = run_corpus(&tasks, &cfg);
            match format {
                Format::Table => print!("{}", corpus_table(&results)),
                Format::Json => print!("{}", corpus_jsonl(&results)),
            }
            Ok(())
        }
        Command::Noise { faulty, repaired, tests, line, component, config } => {
            let cfg = config.to_config()?;
            let faulty = parse_program(&read(&faulty)?).map_err(|e| e.to_string())?;
            let repaired = parse_program(&read(&repaired)?).map_err(|e| e.to_string())?;
            let tests = load_tests(&read(&tests)?).map_err(|e| e.to_string())?;
            let noise = estimate_noise(&faulty, &repaired, line, component, &tests, &cfg)
                .map_err(|e| e.to_string())?;
            println!("{noise:.2}");
            Ok(())
        }
    }
}
