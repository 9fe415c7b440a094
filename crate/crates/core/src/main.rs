use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use plsemb::coset::QuotientBudget;
use plsemb::pipeline::{
    self, artifact_config, ArtifactStatus, Config, count_table_csv, format_count_table,
    format_survey_table, survey_table_csv,
};
use plsemb::pls::Pls;
use plsemb::rewrite::KbLimits;

/// Enumerates partial Latin squares up to species equivalence and decides,
/// per species, whether the square embeds in a group — finite abelian,
/// finite nonabelian, only infinite, or none at all.
#[derive(Parser)]
#[command(name = "plsemb", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Search budgets shared by the classifying subcommands.  Every knob is
/// hashed into the records, so two result streams only mix when all of
/// them agree.
#[derive(clap::Args)]
struct BudgetArgs {
    /// Largest group order in the finite-embedding catalog
    #[arg(long, default_value_t = Config::default().max_catalog_order)]
    max_order: usize,
    /// Knuth-Bendix completion iteration budget
    #[arg(long, default_value_t = Config::default().kb.max_iterations)]
    kb_iterations: usize,
    /// Knuth-Bendix rule-count budget
    #[arg(long, default_value_t = Config::default().kb.max_rules)]
    kb_rules: usize,
    /// Longest rewriting rule kept during completion
    #[arg(long, default_value_t = Config::default().kb.max_rule_len)]
    kb_rule_len: usize,
    /// Coset-table bound for subgroup-index enumeration
    #[arg(long, default_value_t = Config::default().max_cosets)]
    max_cosets: usize,
    /// Rounds of random finite-quotient search
    #[arg(long, default_value_t = Config::default().quotient.rounds)]
    quotient_rounds: usize,
    /// Coset bound inside each random-quotient round
    #[arg(long, default_value_t = Config::default().quotient.max_cosets)]
    quotient_cosets: usize,
    /// Seed for the random-quotient search
    #[arg(long, default_value_t = Config::default().seed)]
    seed: u64,
    /// Worker threads (defaults to all cores; not part of the config hash)
    #[arg(long)]
    threads: Option<usize>,
}

impl BudgetArgs {
    fn config(&self) -> Config {
        Config {
            max_catalog_order: self.max_order,
            kb: KbLimits {
                max_rules: self.kb_rules,
                max_rule_len: self.kb_rule_len,
                max_iterations: self.kb_iterations,
            },
            max_cosets: self.max_cosets,
            quotient: QuotientBudget {
                rounds: self.quotient_rounds,
                max_cosets: self.quotient_cosets,
            },
            seed: self.seed,
        }
    }

    fn set_up_threads(&self) -> anyhow::Result<()> {
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring the worker pool")?;
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate species catalogs for all sizes up to a bound
    Enumerate {
        /// Largest number of filled cells to enumerate
        #[arg(long)]
        max_size: usize,
        /// Directory for the catalog files and counts.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify every candidate species up to a size into a JSONL stream
    Survey {
        /// Largest number of filled cells to classify
        #[arg(long)]
        max_size: usize,
        /// Directory of catalogs from `enumerate` (rebuilt in memory if absent)
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// JSONL output, one record per candidate species
        #[arg(long)]
        out: PathBuf,
        /// Keep existing records in the output and skip their species
        #[arg(long)]
        resume: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Classify a single square read from a text file
    Classify {
        /// Grid file: one row per line, `.` for empty cells
        #[arg(long)]
        file: PathBuf,
        /// Print the full record as JSON instead of a summary
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Re-derive and check the bundled worked examples
    VerifyPaper,
    /// Render a result stream (and optionally a catalog) as count tables
    Report {
        /// JSONL records written by `survey`
        #[arg(long)]
        r#in: PathBuf,
        /// Catalog directory whose counts.csv supplies the enumeration table
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Enumerate { max_size, out } => {
            let rows = pipeline::run_enumerate(max_size, &out)?;
            print!("{}", format_count_table(&rows));
            Ok(ExitCode::SUCCESS)
        }
        Command::Survey {
            max_size,
            catalog,
            out,
            resume,
            budget,
        } => {
            budget.set_up_threads()?;
            let cfg = budget.config();
            let rows = pipeline::run_survey(max_size, catalog.as_deref(), &out, resume, &cfg)?;
            print!("{}", format_survey_table(&rows));
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { file, json, budget } => {
            budget.set_up_threads()?;
            let text = std::fs::read_to_string(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let p = Pls::parse(&text).with_context(|| format!("parsing {}", file.display()))?;
            let cfg = budget.config();
            let groups = pipeline::group_catalog(&cfg)?;
            let rec = pipeline::classify(&p, &cfg, &groups);
            if json {
                println!("{}", serde_json::to_string(&rec)?);
            } else {
                println!("verdict: {}", rec.verdict);
                if let Some(cert) = &rec.certificate {
                    println!("certificate: {}", cert.kind());
                }
                println!("canonical id: {}", rec.canonical_id);
                println!("canonical form:\n{}", rec.pls.trim_end());
                println!("trace:");
                for line in &rec.trace {
                    println!("  {line}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyPaper => {
            let report = pipeline::verify_artifacts(&artifact_config())?;
            for check in &report.checks {
                let mark = if check.pass { "PASS" } else { "FAIL" };
                println!("{mark}  {}: {}", check.name, check.detail);
            }
            let passed = report.checks.iter().filter(|c| c.pass).count();
            println!("{passed}/{} checks passed", report.checks.len());
            Ok(match report.status {
                ArtifactStatus::AllPass => ExitCode::SUCCESS,
                ArtifactStatus::Mismatch => ExitCode::from(2),
                ArtifactStatus::BudgetExhausted => ExitCode::from(3),
            })
        }
        Command::Report { r#in, catalog } => {
            if let Some(dir) = &catalog {
                let counts = pipeline::read_counts(dir)?;
                println!("Species counts by size");
                print!("{}", format_count_table(&counts));
                println!();
                print!("{}", count_table_csv(&counts));
                println!();
            }
            let records = pipeline::read_records(&r#in)?;
            let rows = pipeline::survey_rows(&records);
            println!("Classification counts by size");
            print!("{}", format_survey_table(&rows));
            println!();
            print!("{}", survey_table_csv(&rows));
            Ok(ExitCode::SUCCESS)
        }
    }
}
