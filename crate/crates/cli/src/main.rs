use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use puflab::harness::{
    expected_cost, honest_run, run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport, HarnessError, Outcome,
};
use puflab::protocols::{DeskConfig, ProtocolId};

#[derive(Parser)]
#[command(name = "puflab", version, about = "Simulation lab for PUF-based commitments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of trials.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Security parameter.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Directory for report.json, report.txt and, where produced, events.jsonl.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One honest run, printing the transcript and the functionality's event log.
    Demo { protocol: ProtocolId },
    /// Reproduce the extraction attack on the original protocol.
    Attack {
        target: AttackTarget,
        /// `original-attacker` or `honest-committer`.
        #[arg(long, default_value = "original-attacker")]
        adversary: String,
    },
    /// Run an experiment described by a TOML config. Flags override the file.
    Experiment { config: PathBuf },
    /// Compare real and simulated worlds for one corruption case.
    UcSim {
        case: UcCase,
        /// Corrupted sender strategy, for the sender case.
        #[arg(long)]
        adversary: Option<String>,
    },
    /// Measure PUFs created and exchange phases of honest runs.
    Costs { protocol: ProtocolId },
    /// Entropy lemma suite on random small-support distributions.
    Lemmas,
    /// Fuzzy extractor and PUF property experiments.
    Props {
        property: Property,
        /// Adversary id, where the property takes one.
        #[arg(long)]
        adversary: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackTarget {
    OriginalExtpuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum UcCase {
    Receiver,
    Sender,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Cq,
    Indist,
    Crp,
    Tq,
    Fe,
    Consistency,
    Uniformity,
    Unpredictability,
    Ecc,
}

impl Property {
    fn kind(self) -> ExperimentKind {
        match self {
            Property::Cq => ExperimentKind::Cq,
            Property::Indist => ExperimentKind::Indist,
            Property::Crp => ExperimentKind::Crp,
            Property::Tq => ExperimentKind::Tq,
            Property::Fe => ExperimentKind::Fe,
            Property::Consistency => ExperimentKind::Consistency,
            Property::Uniformity => ExperimentKind::Uniformity,
            Property::Unpredictability => ExperimentKind::Unpredictability,
            Property::Ecc => ExperimentKind::Ecc,
        }
    }
}

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Demo { protocol } => demo(protocol, &cli.common),
        Command::Experiment { config } => match ExperimentConfig::load(&config) {
            Ok(mut cfg) => {
                apply_overrides(&mut cfg, &cli.common);
                report(run_experiment(&cfg))
            }
            Err(e) => Err(HarnessError::Config(e)),
        },
        command => {
            let cfg = config_for(command, &cli.common);
            report(run_experiment(&cfg))
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn config_for(command: Command, common: &Common) -> ExperimentConfig {
    let (kind, protocol, adversary, trials) = match command {
        Command::Attack { target: AttackTarget::OriginalExtpuf, adversary } => {
            (ExperimentKind::Attack, Some(ProtocolId::OriginalExtpuf.id().to_string()), Some(adversary), 500)
        }
        Command::UcSim { case: UcCase::Receiver, adversary } => (ExperimentKind::UcReceiver, None, adversary, 1000),
        Command::UcSim { case: UcCase::Sender, adversary } => (ExperimentKind::UcSender, None, adversary, 1000),
        Command::Costs { protocol } => (ExperimentKind::Costs, Some(protocol.id().to_string()), None, 10),
        Command::Lemmas => (ExperimentKind::Lemmas, None, None, 10_000),
        Command::Props { property, adversary } => (property.kind(), None, adversary, 1000),
        Command::Demo { .. } | Command::Experiment { .. } => unreachable!("handled in main"),
    };
    // ecc reads n as the largest code length, lemmas as the largest support
    let n = match kind {
        ExperimentKind::Ecc => 18,
        ExperimentKind::Lemmas => 8,
        _ => 16,
    };
    let mut cfg = ExperimentConfig::new(kind, n, trials, 1);
    cfg.experiment.protocol = protocol;
    cfg.experiment.adversary = adversary;
    apply_overrides(&mut cfg, common);
    cfg
}

fn apply_overrides(cfg: &mut ExperimentConfig, common: &Common) {
    if let Some(seed) = common.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.experiment.trials = trials;
    }
    if let Some(n) = common.n {
        cfg.params.n = n;
    }
    if let Some(dir) = &common.out {
        cfg.output.report = Some(dir.join("report.json"));
        cfg.output.table = Some(dir.join("report.txt"));
        if matches!(cfg.experiment.kind.parse(), Ok(ExperimentKind::Completeness | ExperimentKind::Costs)) {
            cfg.output.events = Some(dir.join("events.jsonl"));
        }
    }
}

fn report(result: Result<ExperimentReport, HarnessError>) -> Result<bool, HarnessError> {
    let r = result?;
    print!("{}", r.table());
    Ok(r.passed())
}

fn demo(protocol: ProtocolId, common: &Common) -> Result<bool, HarnessError> {
    let cfg = DeskConfig { n: common.n.unwrap_or(16), ..DeskConfig::default() };
    let count = if protocol == ProtocolId::Collextpuf { 4 } else { 1 };
    let run = honest_run(protocol, &cfg, count, common.seed.unwrap_or(1), true)?;
    let (events, transcript) = run.logs.unwrap_or_default();
    println!("# transcript");
    print!("{transcript}");
    println!("# events");
    print!("{events}");
    let expected = expected_cost(protocol, cfg.n);
    println!("# outcome {:?}", run.outcome);
    println!("# cost pufs={} exchange_phases={} (expected {:?})", run.cost.0, run.cost.1, expected);
    if let Some(dir) = &common.out {
        write(&dir.join("transcript.jsonl"), &transcript)?;
        write(&dir.join("events.jsonl"), &events)?;
    }
    Ok(run.outcome == Outcome::Success && run.cost == expected)
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io { path: path.display().to_string(), source };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}
