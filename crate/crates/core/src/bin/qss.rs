//! Command-line front end.
//!
//! Exit codes: 0 when the run passes (secure verdict, all checks green),
//! 1 on a compromised verdict or failed check, 2 on a configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qss_core::harness::{
    preset_names, render, report_write, run_experiment, selftest, sweep_pe, verify_table1, ConfigOverlay,
    ExperimentConfig, FractionSpec, HarnessError, PlannedTag, ReportFormat, SessionReport, StrategyKind, StrategySpec,
};
use qss_core::protocol::{run_session, write_transcript_jsonl, Mode, OrderingPolicy, Scheme, Verdict};

#[derive(Parser)]
#[command(name = "qss", version, about = "Quantum secret sharing attack simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a preset and/or configuration file.
    Run(RunArgs),
    /// Sweep the replacement-channel efficiency against the planned attack fraction.
    Sweep(SweepArgs),
    /// Check the 16 cells of the entanglement-swapping table exactly.
    VerifyTable1 {
        /// Print the cells as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the built-in invariant suites.
    Selftest,
    /// List the shipped presets.
    Presets,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderingArg {
    Vulnerable,
    Refined,
    Sifting,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Classical,
    StateSharing,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Kki,
    Hbb,
    HardenedKki,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Passive,
    Opaque,
    OpaqueNoCheat,
    EarlyBell,
}

#[derive(Args)]
struct CommonArgs {
    /// Named preset to start from (see `qss presets`).
    #[arg(long)]
    preset: Option<String>,
    /// TOML configuration file applied on top of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    eta_prime: Option<f64>,
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<u32>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long, value_enum)]
    ordering: Option<OrderingArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Fixed attack fraction; defaults to the planned one.
    #[arg(long)]
    attack_fraction: Option<f64>,
    /// Report destination; the report goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also write the per-round transcript of the first repetition as JSON lines.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated replacement-channel efficiencies.
    #[arg(long, value_delimiter = ',')]
    eta_prime_list: Option<Vec<f64>>,
}

impl CommonArgs {
    fn overlay(&self) -> ConfigOverlay {
        let strategy = self.strategy.map(|s| {
            let kind = match s {
                StrategyArg::Passive => StrategyKind::Passive,
                StrategyArg::Opaque | StrategyArg::OpaqueNoCheat => StrategyKind::OpaqueDeferred,
                StrategyArg::EarlyBell => StrategyKind::EarlyBell,
            };
            StrategySpec {
                kind,
                attack_fraction: FractionSpec::Planned(PlannedTag::Planned),
                cheating: !matches!(s, StrategyArg::OpaqueNoCheat),
            }
        });
        ConfigOverlay {
            eta: self.eta,
            eta_prime: self.eta_prime,
            rounds: self.rounds,
            seed: self.seed,
            repetitions: self.repetitions,
            test_fraction: self.test_fraction,
            ordering: self.ordering.map(|o| match o {
                OrderingArg::Vulnerable => OrderingPolicy::Vulnerable,
                OrderingArg::Refined => OrderingPolicy::Refined,
                OrderingArg::Sifting => OrderingPolicy::SiftingFirst,
            }),
            mode: self.mode.map(|m| match m {
                ModeArg::Classical => Mode::ClassicalKey,
                ModeArg::StateSharing => Mode::StateSharing,
            }),
            scheme: self.scheme.map(|s| match s {
                SchemeArg::Kki => Scheme::Kki,
                SchemeArg::Hbb => Scheme::Hbb,
                SchemeArg::HardenedKki => Scheme::HardenedKki,
            }),
            strategy,
            out: self.out.clone(),
            format: self.format.map(|f| match f {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Json => ReportFormat::Json,
            }),
            ..ConfigOverlay::default()
        }
    }

    /// Preset, then file, then flags.
    fn resolve(&self, default_preset: &str) -> Result<ExperimentConfig, HarnessError> {
        let mut c = ExperimentConfig::preset(self.preset.as_deref().unwrap_or(default_preset))?;
        if let Some(path) = &self.config {
            ConfigOverlay::load(path)?.apply(&mut c);
        }
        self.overlay().apply(&mut c);
        if let Some(f) = self.attack_fraction {
            c.strategy.attack_fraction = FractionSpec::Fixed(f);
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit(reports: &[SessionReport], config: &ExperimentConfig) -> Result<(), HarnessError> {
    match &config.out {
        Some(path) => report_write(reports, config.format, path),
        None => {
            print!("{}", render(reports, config.format)?);
            Ok(())
        }
    }
}

fn summary(r: &SessionReport) -> String {
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
    format!(
        "{}: error {:.4} [{:.4}, {:.4}], eff bob {:.4}, eff charlie {:.4}, sift {:.4}, attacked {:.4}, ka_acc {}, kc_acc {}, verdict {}",
        r.scenario,
        r.error_rate.value,
        r.error_rate.ci.lo,
        r.error_rate.ci.hi,
        r.eff_bob.value,
        r.eff_charlie.value,
        r.sift_rate.value,
        r.attacked_fraction.value,
        opt(r.ka_acc),
        opt(r.kc_acc),
        r.verdict
    )
}

fn run(args: &RunArgs) -> Result<bool, HarnessError> {
    let config = args.common.resolve("honest")?;
    if let Some(path) = &args.transcript {
        let transcript = run_session(&config.session, &config.strategy())?;
        let io = |e: std::io::Error| HarnessError::Io {
            path: path.clone(),
            message: e.to_string(),
        };
        let file = std::fs::File::create(path).map_err(io)?;
        write_transcript_jsonl(&transcript, std::io::BufWriter::new(file)).map_err(io)?;
    }
    let report = run_experiment(&config)?;
    eprintln!("{}", summary(&report));
    emit(std::slice::from_ref(&report), &config)?;
    Ok(report.verdict == Verdict::Secure)
}

fn sweep(args: &SweepArgs) -> Result<bool, HarnessError> {
    let mut config = args.common.resolve("opaque-vulnerable")?;
    if let Some(list) = &args.eta_prime_list {
        config.eta_prime_list = list.clone();
    }
    if config.eta_prime_list.is_empty() {
        return Err(HarnessError::Config {
            field: "eta_prime_list".into(),
            message: "no sweep points given".into(),
        });
    }
    let result = sweep_pe(&config, &config.eta_prime_list)?;
    for p in &result.points {
        eprintln!(
            "eta'={:.4} formula={:.4} measured={:.4} diff={:+.4} eff_bob={:.4} eff_charlie={:.4} {}",
            p.eta_prime,
            p.formula,
            p.measured,
            p.difference,
            p.report.eff_bob.value,
            p.report.eff_charlie.value,
            if p.within_tolerance && p.efficiency_pinned {
                "ok"
            } else {
                "FAIL"
            }
        );
    }
    for s in &result.skipped {
        eprintln!("eta'={:.4} skipped: {}", s.eta_prime, s.note);
    }
    emit(&result.reports(), &config)?;
    Ok(result.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::VerifyTable1 { json } => verify_table1().and_then(|r| {
            if *json {
                println!("{}", serde_json::to_string_pretty(&r)?);
            } else {
                for c in &r.cells {
                    println!(
                        "{:<5} charlie {:<3} -> bob {:<3} phi+ {:.12} psi-/iσy {:.12} {}",
                        c.alice,
                        c.charlie,
                        c.expected_bob,
                        c.phi_plus_overlap,
                        c.psi_minus_overlap,
                        if c.pass { "pass" } else { "FAIL" }
                    );
                }
            }
            Ok(r.pass)
        }),
        Command::Selftest => selftest().map(|r| {
            for c in &r.checks {
                println!("{} {}: {}", if c.pass { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            r.pass
        }),
        Command::Presets => {
            for name in preset_names() {
                println!("{name}");
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
