//! `tariff`: command-line front end for the tariff-core solvers.

mod error;
mod files;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::{Signed, Zero};
use serde::Serialize;
use tariff_core::exact::{
    solve_exact, solve_mandatory, solve_upfront_only, solve_usage_only, SolveResult,
};
use tariff_core::fptas::fptas_solve;
use tariff_core::instances::{
    compute_hmu, gen_hmu_worstcase, gen_partition_instance, gen_random, gen_random_single_param,
    gen_single_param_counterexample, gen_usage_gap, solve_partition_reduction, Multiset,
};
use tariff_core::model::{indirect_diagnostics, validate_menu, Regime};
use tariff_core::single_param::{best_single_contract, lp_relaxation_optimum, single_param_m};
use tariff_core::{exact::Witness, rational, Error, Rational};

use crate::error::{CliError, CliResult};
use crate::files::{read_instance, read_menu, write_instance, InstanceFile};
use crate::report::{
    Amount, CompareReport, DiagnosticsOut, GapOut, MenuCheckReport, MenuOut, PartitionReport,
    RegimeOut, SingleParamReport, SolveReport,
};

#[derive(Parser)]
#[command(
    name = "tariff",
    version,
    about = "Optimal two-part tariff menus with exact arithmetic"
)]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for the solvers (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveRegime {
    Full,
    Upfront,
    Usage,
    Mandatory,
}

impl SolveRegime {
    fn name(self) -> &'static str {
        match self {
            SolveRegime::Full => "full",
            SolveRegime::Upfront => "upfront",
            SolveRegime::Usage => "usage",
            SolveRegime::Mandatory => "mandatory",
        }
    }

    fn solve(self, inst: &tariff_core::model::Instance) -> tariff_core::Result<SolveResult> {
        match self {
            SolveRegime::Full => solve_exact(inst),
            SolveRegime::Upfront => solve_upfront_only(inst),
            SolveRegime::Usage => solve_usage_only(inst),
            SolveRegime::Mandatory => solve_mandatory(inst),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum UsageRegime {
    Voluntary,
    Mandatory,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal menu under one pricing regime.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        regime: SolveRegime,
    },
    /// All four regimes, their ratios, and the H_mu sandwich.
    Compare { file: PathBuf },
    /// Approximate optimum within a factor 1 - eps.
    Fptas {
        file: PathBuf,
        #[arg(long)]
        eps: String,
    },
    /// Single-contract analysis of an instance with alpha and baseline.
    SingleParam { file: PathBuf },
    /// Decide a partition instance through the pricing reduction.
    ReducePartition {
        #[arg(long, value_delimiter = ',', required = true)]
        items: Vec<u64>,
    },
    /// Write a generated instance.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output file (default: standard output).
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Evaluate a direct menu: choices, utilities, IC and IR, profit.
    CheckMenu {
        file: PathBuf,
        menu: PathBuf,
        #[arg(long, value_enum, default_value = "voluntary")]
        regime: UsageRegime,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Worst case for upfront-only pricing under a given prior.
    Hmu {
        #[arg(long, value_delimiter = ',', required = true)]
        mu: Vec<String>,
    },
    /// Instance separating two-part tariffs from usage-only pricing.
    UsageGap,
    /// Reduction instance for a partition multiset.
    Partition {
        #[arg(long, value_delimiter = ',', required = true)]
        items: Vec<u64>,
    },
    /// Single-parameter instance where no single contract is optimal.
    Counterexample,
    /// Seeded random instance.
    Random(RandomArgs),
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 2)]
    types: usize,
    #[arg(long, default_value_t = 2)]
    actions: usize,
    #[arg(long, default_value_t = 2)]
    outcomes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest integer valuation.
    #[arg(long, default_value_t = 8)]
    bound: u32,
    /// Single-parameter valuations (writes alpha and baseline).
    #[arg(long)]
    single_param: bool,
}

/// Write errors on standard output (such as a closed pipe) are ignored.
fn emit<T: Serialize>(json: bool, report: &T, text: impl FnOnce(&T) -> String) {
    let body = if json {
        serde_json::to_string_pretty(report).expect("report serializes") + "\n"
    } else {
        text(report)
    };
    let _ = std::io::stdout().lock().write_all(body.as_bytes());
}

fn solve(file: &Path, regime: SolveRegime, json: bool) -> CliResult<()> {
    let loaded = read_instance(file)?;
    let start = Instant::now();
    let result = regime.solve(&loaded.inst)?;
    let report = SolveReport::new(
        regime.name(),
        &result,
        &compute_hmu(loaded.inst.mu()),
        start.elapsed().as_secs_f64(),
    );
    emit(json, &report, SolveReport::render);
    Ok(())
}

fn ratio_of(num: Option<&Rational>, den: Option<&Rational>) -> Option<Amount> {
    match (num, den) {
        (Some(n), Some(d)) if !d.is_zero() => Some(Amount::new(&(n / d))),
        _ => None,
    }
}

/// Refusals are recorded in the report; the exit status is 3 if any regime was refused.
fn compare(file: &Path, json: bool) -> CliResult<()> {
    let loaded = read_instance(file)?;
    let inst = &loaded.inst;
    let h = compute_hmu(inst.mu());
    let mut regimes = Vec::new();
    let mut profits: Vec<Option<Rational>> = Vec::new();
    let mut refusal = None;
    for regime in [
        SolveRegime::Full,
        SolveRegime::Upfront,
        SolveRegime::Usage,
        SolveRegime::Mandatory,
    ] {
        let start = Instant::now();
        let outcome = regime.solve(inst);
        let seconds = start.elapsed().as_secs_f64();
        match outcome {
            Ok(r) => {
                regimes.push(RegimeOut {
                    regime: regime.name(),
                    profit: Some(Amount::new(&r.profit)),
                    refused: None,
                    menu: Some(MenuOut::new(&r.witness)),
                    seconds,
                });
                profits.push(Some(r.profit));
            }
            Err(e @ Error::SizeGuard(_)) => {
                regimes.push(RegimeOut {
                    regime: regime.name(),
                    profit: None,
                    refused: Some(e.to_string()),
                    menu: None,
                    seconds,
                });
                profits.push(None);
                refusal.get_or_insert(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let [full, upfront, usage, mandatory] = [0, 1, 2, 3].map(|i| profits[i].as_ref());
    let gaps = vec![
        GapOut {
            name: "R/R_upfront".into(),
            ratio: ratio_of(full, upfront),
        },
        GapOut {
            name: "R/R_usage".into(),
            ratio: ratio_of(full, usage),
        },
        GapOut {
            name: "R/R_mandatory".into(),
            ratio: ratio_of(full, mandatory),
        },
    ];
    let sandwich = match (full, upfront, mandatory) {
        (Some(r), Some(up), Some(m)) => {
            Some(up == m && m <= r && (m.is_zero() && !r.is_negative() || *r <= &h * m))
        }
        _ => None,
    };
    let report = CompareReport {
        regimes,
        h_mu: Amount::new(&h),
        gaps,
        sandwich,
    };
    emit(json, &report, CompareReport::render);
    match refusal {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn fptas(file: &Path, eps: &str, json: bool) -> CliResult<()> {
    let eps = rational::parse(eps)
        .map_err(|_| CliError::Invalid(format!("--eps: cannot parse {eps:?} as a rational")))?;
    let loaded = read_instance(file)?;
    let start = Instant::now();
    let result = fptas_solve(&loaded.inst, &eps)?;
    let mut report = SolveReport::new(
        "fptas",
        &result,
        &compute_hmu(loaded.inst.mu()),
        start.elapsed().as_secs_f64(),
    );
    report.epsilon = Some(Amount::new(&eps));
    emit(json, &report, SolveReport::render);
    Ok(())
}

fn single_param(file: &Path, json: bool) -> CliResult<()> {
    let loaded = read_instance(file)?;
    let sp = loaded.single.ok_or_else(|| {
        CliError::Invalid("single-param needs an instance with alpha and baseline".into())
    })?;
    let start = Instant::now();
    let (m, action) = single_param_m(&sp);
    let (lp_value, t_star) = lp_relaxation_optimum(&sp);
    let (menu, revenue) = best_single_contract(&sp);
    let profit = indirect_diagnostics(&menu, sp.base())?.expected_profit(sp.base().mu());
    let (exact, refused) = match solve_exact(sp.base()) {
        Ok(r) => (Some(Amount::new(&r.profit)), None),
        Err(e @ Error::SizeGuard(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let report = SingleParamReport {
        m: Amount::new(&m),
        action,
        lp_value: Amount::new(&lp_value),
        threshold_alpha: Amount::new(&sp.alpha()[t_star]),
        contract: MenuOut::new(&Witness::Indirect(menu)),
        revenue: Amount::new(&revenue),
        profit: Amount::new(&profit),
        exact,
        refused,
        zero_costs: sp.base().costs().iter().all(Zero::is_zero),
        seconds: start.elapsed().as_secs_f64(),
    };
    emit(json, &report, SingleParamReport::render);
    Ok(())
}

fn reduce_partition(items: Vec<u64>, json: bool) -> CliResult<()> {
    let ms = Multiset::new(items)?;
    let outcome = solve_partition_reduction(&ms)?;
    let report = PartitionReport {
        items: ms.items().to_vec(),
        exists: outcome.exists,
        profit: Amount::new(&outcome.profit),
        threshold: Amount::new(&outcome.threshold),
    };
    emit(json, &report, PartitionReport::render);
    Ok(())
}

fn generate(kind: GenKind, output: Option<&Path>) -> CliResult<()> {
    let file = match kind {
        GenKind::Hmu { mu } => {
            let mu = mu
                .iter()
                .map(|m| {
                    rational::parse(m).map_err(|_| {
                        CliError::Invalid(format!("--mu: cannot parse {m:?} as a rational"))
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            InstanceFile::from_instance(&gen_hmu_worstcase(&mu)?)
        }
        GenKind::UsageGap => InstanceFile::from_instance(&gen_usage_gap()),
        GenKind::Partition { items } => {
            InstanceFile::from_instance(&gen_partition_instance(&Multiset::new(items)?))
        }
        GenKind::Counterexample => {
            InstanceFile::from_single_param(&gen_single_param_counterexample())
        }
        GenKind::Random(a) if a.single_param => InstanceFile::from_single_param(
            &gen_random_single_param(a.types, a.actions, a.outcomes, a.seed, a.bound)?,
        ),
        GenKind::Random(a) => InstanceFile::from_instance(&gen_random(
            a.types, a.actions, a.outcomes, a.seed, a.bound,
        )?),
    };
    write_instance(&file, output)
}

fn check_menu(file: &Path, menu: &Path, regime: UsageRegime, json: bool) -> CliResult<()> {
    let loaded = read_instance(file)?;
    let menu = read_menu(menu)?;
    let (name, regime) = match regime {
        UsageRegime::Voluntary => ("voluntary", Regime::Voluntary),
        UsageRegime::Mandatory => ("mandatory", Regime::Mandatory),
    };
    let diag = validate_menu(&menu, &loaded.inst, regime)?;
    let report = MenuCheckReport {
        regime: name,
        profit: Amount::new(&diag.expected_profit(loaded.inst.mu())),
        diagnostics: DiagnosticsOut::new(&diag),
    };
    emit(json, &report, MenuCheckReport::render);
    if diag.is_ic_ir() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "menu is not IC and IR ({} IC and {} IR violations)",
            diag.ic_violations.len(),
            diag.ir_violations.len()
        )))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("cannot start thread pool: {e}")))?;
    }
    let json = cli.json;
    match cli.command {
        Command::Solve { file, regime } => solve(&file, regime, json),
        Command::Compare { file } => compare(&file, json),
        Command::Fptas { file, eps } => fptas(&file, &eps, json),
        Command::SingleParam { file } => single_param(&file, json),
        Command::ReducePartition { items } => reduce_partition(items, json),
        Command::Gen { kind, output } => generate(kind, output.as_deref()),
        Command::CheckMenu { file, menu, regime } => check_menu(&file, &menu, regime, json),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
