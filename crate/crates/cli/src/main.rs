use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use margext::commands::{cmd_oracle, cmd_proptest, cmd_table, cmd_verify, cmd_verify_family, Limits, Options, Report};
use margext::{CKrausFamily, NamedFamily, RankMode};
use serde_json::json;

/// Certificates for extremal CP maps with fixed marginals.
///
/// Every run produces a JSON report. Exit status: 0 pass, 1 assertion
/// failure, 2 usage error, 3 borderline numerical verdict.
#[derive(Parser, Debug)]
#[command(name = "margext", version)]
#[command(group(ArgGroup::new("mode").args(["exact", "numerical"])))]
struct Cli {
    /// Write the JSON report here; a summary goes to stdout instead.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,

    /// Exact rational rank (families with rational entries only).
    #[arg(long, global = true)]
    exact: bool,

    /// Floating-point rank with singular-value gap reporting.
    #[arg(long, global = true)]
    numerical: bool,

    /// Absolute singular-value cutoff for numerical rank.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Largest block Gram side to build.
    #[arg(long, global = true, default_value_t = 1024)]
    max_dim: usize,

    /// Lift the table limits d <= 6, d+m <= 12.
    #[arg(long, global = true)]
    override_limits: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check marginals, extremality, Choi rank and separability of a family.
    Verify {
        /// One of: paper, sigma2, ohno4, ohno-d, rank8-66, rank8k.
        #[arg(required_unless_present = "family_json")]
        family: Option<String>,
        params: Vec<usize>,
        /// Read the Kraus family from a JSON file instead.
        #[arg(long, conflicts_with = "family")]
        family_json: Option<PathBuf>,
    },
    /// Constructed rank vs the maximal-rank bound over a (d, m) grid.
    Table {
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long, default_value_t = 5)]
        d_max: usize,
        #[arg(long, default_value_t = 1)]
        m_min: usize,
        #[arg(long, default_value_t = 5)]
        m_max: usize,
    },
    /// Compare direct Gram and partial transpose with their closed forms.
    Oracle { d: usize, m: usize },
    /// Seeded randomized checks of the reductions.
    Proptest {
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
}

impl Cli {
    fn options(&self) -> Options {
        let mode = if self.exact {
            Some(RankMode::Exact)
        } else if self.numerical {
            Some(RankMode::Numerical)
        } else {
            None
        };
        Options {
            mode,
            tol: self.tol,
            seed: self.seed,
            limits: Limits {
                max_gram_side: self.max_dim,
                override_limits: self.override_limits,
                ..Limits::default()
            },
        }
    }
}

fn load_family(path: &PathBuf) -> Result<CKrausFamily, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: &Cli) -> Report {
    let opts = cli.options();
    match &cli.command {
        Command::Verify { family, params, family_json } => {
            if let Some(path) = family_json {
                return match load_family(path) {
                    Ok(f) => cmd_verify_family(&f, &opts),
                    Err(e) => Report::usage_error("verify", json!({ "family_json": path }), e),
                };
            }
            let name = family.as_deref().unwrap_or_default();
            match NamedFamily::parse(name, params) {
                Ok(f) => cmd_verify(f, &opts),
                Err(e) => Report::usage_error("verify", json!({ "family": name, "params": params }), e),
            }
        }
        Command::Table { d_min, d_max, m_min, m_max } => cmd_table((*d_min, *d_max), (*m_min, *m_max), &opts),
        Command::Oracle { d, m } => cmd_oracle(*d, *m, &opts),
        Command::Proptest { count } => cmd_proptest(*count, &opts),
    }
}

fn summary(report: &Report) -> String {
    let mut out = format!("{}: {:?}\n", report.command, report.status);
    if let Some(err) = &report.error {
        out.push_str(&format!("  error: {err}\n"));
    }
    for a in &report.assertions {
        let mark = if a.passed { "ok  " } else { "FAIL" };
        out.push_str(&format!("  {mark} {:<32} {}\n", a.name, a.detail));
    }
    if let Some(rows) = &report.table_rows {
        out.push_str("  (d1,d2)   marginals            rank bound attained\n");
        for r in rows {
            out.push_str(&format!(
                "  ({:>2},{:>2})   {:<20} {:>4} {:>5} {}\n",
                r.d1, r.d2, r.marginal_name, r.constructed_rank, r.bound, r.attained
            ));
        }
    }
    if let Some(devs) = &report.oracle_deviations {
        for (k, v) in devs {
            out.push_str(&format!("  deviation {k}: {v:e}\n"));
        }
    }
    for w in &report.warnings {
        out.push_str(&format!("  warning: {w}\n"));
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let report = Report::usage_error("", json!({}), e.to_string().trim_end());
            eprint!("{e}");
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            return ExitCode::from(2);
        }
    };
    let report = run(&cli);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &cli.json {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
            print!("{}", summary(&report));
        }
        None => println!("{text}"),
    }
    ExitCode::from(report.exit_code() as u8)
}
